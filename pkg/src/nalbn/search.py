"""Score-based structure search over the penalised NAL score."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .data import Dataset
from .graph import Dag, GraphError
from .scoring import Penalty, ScoredSearchState, _state_for, spl_score
from .types import Discrete

__all__ = [
    "OrderSearchConfig",
    "TabuConfig",
    "SearchResult",
    "exact_order_search",
    "tabu_search",
    "exhaustive_search",
    "enumerate_dags",
]

_IMPROVEMENT_EPS = 1e-12


@dataclass(frozen=True)
class OrderSearchConfig:
    ordering: tuple
    max_parents: int = 2

    def __post_init__(self):
        object.__setattr__(self, "ordering", tuple(self.ordering))
        if self.max_parents < 0:
            raise ValueError("max_parents must be non-negative")


@dataclass(frozen=True)
class TabuConfig:
    tabu_list_length: int = 10
    max_iterations: int | None = None
    max_non_improving: int = 15
    seed: int = 0
    restarts: int = 0
    perturb: int = 2

    def iterations_for(self, n_nodes: int) -> int:
        return self.max_iterations if self.max_iterations is not None else 200 + 15 * n_nodes


@dataclass
class SearchResult:
    dag: Dag
    score: float
    score_calls: int
    wall_time: float
    iterations: int
    converged: bool = True
    trace: list = field(default_factory=list)
    em_iterations: int | None = None
    network: object = None

    def metadata(self, timing=True) -> dict:
        return {
            "score": round(self.score, 6) if math.isfinite(self.score) else None,
            "score_calls": self.score_calls,
            "wall_time_ms": round(self.wall_time * 1000.0, 3) if timing else 0.0,
            "iterations": self.iterations,
            "converged": self.converged,
            "arcs": [list(a) for a in self.dag.sorted_arcs()],
        }


def _allowed_parent(types, parent, child) -> bool:
    return not (isinstance(types[child], Discrete) and not isinstance(types[parent], Discrete))


def exact_order_search(
    data: Dataset, cfg: OrderSearchConfig, penalty: Penalty, state: ScoredSearchState | None = None
) -> SearchResult:
    """Per-node optimal parent sets among order predecessors, up to ``max_parents``.

    Ties go to the smaller parent set, then to the lexicographically first one.
    """
    t0 = time.perf_counter()
    state = _state_for(data, penalty, state)
    calls0 = state.calls
    if sorted(cfg.ordering) != sorted(data.nodes) or len(set(cfg.ordering)) != len(cfg.ordering):
        raise GraphError("ordering must be a permutation of the dataset's nodes")
    types = data.types
    arcs = []
    evaluated = 0
    for i, v in enumerate(cfg.ordering):
        cands = sorted(
            (u for u in cfg.ordering[:i] if _allowed_parent(types, u, v)), key=data.index
        )
        best, best_ps = state.value(v, ()), ()
        evaluated += 1
        for size in range(1, min(cfg.max_parents, len(cands)) + 1):
            for ps in combinations(cands, size):
                s = state.value(v, ps)
                evaluated += 1
                if s > best:
                    best, best_ps = s, ps
        arcs.extend((p, v) for p in best_ps)
    dag = Dag(data.nodes, arcs)
    return SearchResult(
        dag, spl_score(data, dag, penalty, state), state.calls - calls0,
        time.perf_counter() - t0, evaluated,
    )


def _reachability(dag: Dag) -> np.ndarray:
    n = len(dag.nodes)
    reach = np.eye(n, dtype=bool)
    idx = dag.index
    for p, c in dag.arcs:
        reach[idx(p), idx(c)] = True
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    return reach


def _legal_moves(dag: Dag, types):
    """Moves in lexicographic (parent, child, operation) order."""
    reach = _reachability(dag)
    nodes = dag.nodes
    idx = dag.index
    children = {v: [] for v in nodes}
    for p, c in dag.arcs:
        children[p].append(c)
    for a, b in product(nodes, nodes):
        if a == b:
            continue
        ia, ib = idx(a), idx(b)
        if dag.has_arc(a, b):
            yield "delete", (a, b)
            if _allowed_parent(types, b, a) and not any(
                c != b and reach[idx(c), ib] for c in children[a]
            ):
                yield "reverse", (a, b)
        elif not dag.has_arc(b, a):
            if _allowed_parent(types, a, b) and not reach[ib, ia]:
                yield "add", (a, b)


def _apply(dag: Dag, op, arc) -> Dag:
    p, c = arc
    if op == "add":
        arcs = dag.arcs | {(p, c)}
    elif op == "delete":
        arcs = dag.arcs - {(p, c)}
    else:
        arcs = (dag.arcs - {(p, c)}) | {(c, p)}
    return Dag(dag.nodes, arcs, check=False)


_UNDO = {"add": "delete", "delete": "add", "reverse": "reverse"}

# When True, every accepted tabu move checks its cached delta against a full rescore.
AUDIT_DELTAS = False


def _tabu_run(state, types, start: Dag, cfg: TabuConfig, max_iter: int):
    current = start
    current_score = spl_score(state.data, current, state.penalty, state)
    best, best_score = current, current_score
    tabu = deque(maxlen=cfg.tabu_list_length)
    stale = 0
    iterations = 0
    trace = [current_score]
    while iterations < max_iter and stale < cfg.max_non_improving:
        choice = None
        for op, arc in _legal_moves(current, types):
            p, c = arc
            if op == "add":
                new = {c: current.parents(c) + (p,)}
            elif op == "delete":
                new = {c: tuple(x for x in current.parents(c) if x != p)}
            else:
                new = {c: tuple(x for x in current.parents(c) if x != p), p: current.parents(p) + (c,)}
            terms = [state.node_score(v, ps) for v, ps in new.items()]
            if not all(t.valid for t in terms):
                continue
            delta = math.fsum(t.value for t in terms) - math.fsum(
                state.value(v, current.parents(v)) for v in new
            )
            score = current_score + delta if math.isfinite(current_score) else math.inf
            if (op, arc) in tabu and not score > best_score + _IMPROVEMENT_EPS:
                continue
            dim_change = sum(t.dim for t in terms) - sum(
                state.node_score(v, current.parents(v)).dim for v in new
            )
            key = (score, -dim_change)
            if choice is None or key > choice[0]:
                choice = (key, op, arc)
        if choice is None:
            break
        (predicted, _), op, arc = choice
        current = _apply(current, op, arc)
        current_score = spl_score(state.data, current, state.penalty, state)
        if AUDIT_DELTAS and math.isfinite(predicted) and abs(predicted - current_score) > 1e-10:
            raise AssertionError(f"delta audit failed on {op} {arc}: {predicted} vs {current_score}")
        iterations += 1
        trace.append(current_score)
        undo_arc = arc if op != "reverse" else (arc[1], arc[0])
        tabu.append((_UNDO[op], undo_arc))
        if current_score > best_score + _IMPROVEMENT_EPS:
            best, best_score = current, current_score
            stale = 0
        else:
            stale += 1
    return best, best_score, iterations, stale >= cfg.max_non_improving, trace


def _perturb(dag: Dag, types, rng, n_moves) -> Dag:
    for _ in range(n_moves):
        moves = list(_legal_moves(dag, types))
        if not moves:
            break
        op, arc = moves[rng.integers(len(moves))]
        dag = _apply(dag, op, arc)
    return dag


def tabu_search(
    data: Dataset,
    cfg: TabuConfig | None = None,
    penalty: Penalty | None = None,
    state: ScoredSearchState | None = None,
    initial: Dag | None = None,
) -> SearchResult:
    """Steepest-ascent tabu search over single-arc additions, deletions and reversals.

    The best non-tabu neighbour is always accepted; a tabu move is allowed only
    if it beats the best score seen. The search stops after
    ``max_non_improving`` consecutive iterations without a new best, or after
    ``max_iterations``. ``restarts`` > 0 perturbs the best DAG with random
    moves drawn from ``seed`` and searches again.
    """
    t0 = time.perf_counter()
    cfg = cfg or TabuConfig()
    penalty = penalty or Penalty.bic()
    state = _state_for(data, penalty, state)
    calls0 = state.calls
    types = data.types
    start = initial if initial is not None else Dag.empty(data.nodes)
    if tuple(start.nodes) != tuple(data.nodes):
        raise GraphError("initial DAG must span the dataset's nodes in the same order")
    max_iter = cfg.iterations_for(len(data.nodes))
    best, best_score, iterations, stalled, trace = _tabu_run(state, types, start, cfg, max_iter)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.restarts):
        cand, cand_score, it, st, tr = _tabu_run(
            state, types, _perturb(best, types, rng, cfg.perturb), cfg, max_iter
        )
        iterations += it
        trace.extend(tr)
        if cand_score > best_score + _IMPROVEMENT_EPS:
            best, best_score, stalled = cand, cand_score, st
    return SearchResult(
        best, spl_score(data, best, penalty, state), state.calls - calls0,
        time.perf_counter() - t0, iterations, converged=stalled or iterations < max_iter,
        trace=trace,
    )


def enumerate_dags(nodes, node_types=None):
    """Yield every DAG over ``nodes`` (respecting node-type constraints if given)."""
    nodes = tuple(nodes)
    n = len(nodes)
    pairs = list(combinations(range(n), 2))
    allowed = []
    for i, j in pairs:
        states = [None]
        if node_types is None or _allowed_parent(node_types, nodes[i], nodes[j]):
            states.append((i, j))
        if node_types is None or _allowed_parent(node_types, nodes[j], nodes[i]):
            states.append((j, i))
        allowed.append(states)
    for choice in product(*allowed):
        pmask = [0] * n
        for e in choice:
            if e is not None:
                pmask[e[1]] |= 1 << e[0]
        if _acyclic_masks(pmask):
            yield Dag(nodes, [(nodes[e[0]], nodes[e[1]]) for e in choice if e is not None], check=False)


def _acyclic_masks(pmask) -> bool:
    remaining = (1 << len(pmask)) - 1
    while remaining:
        sources = [i for i in range(len(pmask)) if remaining >> i & 1 and not pmask[i] & remaining]
        if not sources:
            return False
        for i in sources:
            remaining &= ~(1 << i)
    return True


def exhaustive_search(
    data: Dataset, penalty: Penalty, state: ScoredSearchState | None = None, max_nodes: int = 5
) -> SearchResult:
    """Global maximiser of the penalised score by enumerating all DAGs.

    Ties go to fewer arcs, then to the lexicographically smallest arc list.
    """
    if len(data.nodes) > max_nodes:
        raise ValueError(f"exhaustive search is limited to {max_nodes} nodes")
    t0 = time.perf_counter()
    state = _state_for(data, penalty, state)
    calls0 = state.calls
    best = best_key = None
    count = 0
    for dag in enumerate_dags(data.nodes, data.types):
        count += 1
        s = spl_score(data, dag, penalty, state)
        key = (s, -len(dag.arcs), [tuple(-data.index(x) for x in a) for a in dag.sorted_arcs()])
        if best is None or _beats(key, best_key):
            best, best_key = dag, key
    return SearchResult(best, best_key[0], state.calls - calls0, time.perf_counter() - t0, count)


def _beats(key, other) -> bool:
    if key[0] != other[0]:
        return key[0] > other[0]
    if key[1] != other[1]:
        return key[1] > other[1]
    return key[2] > other[2]

