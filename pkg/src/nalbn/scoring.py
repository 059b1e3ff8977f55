"""Node-average likelihood scores and the penalised network score."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset, locally_complete_rows
from .graph import Dag
from .model import FitError, _columns, _local_dim, fit_local

__all__ = [
    "Penalty",
    "NodeScore",
    "ScoredSearchState",
    "lambda_value",
    "nal_node",
    "spl_score",
    "complete_bic",
    "complete_aic",
    "score_delta",
    "changed_nodes",
]

INVALID = -math.inf


@dataclass(frozen=True)
class Penalty:
    """Penalisation coefficient rule.

    ``kind`` is ``"bic"`` (log n / 2n), ``"aic"`` (1 / n) or ``"custom"``
    (n**-alpha / n_nodes).
    """

    kind: str
    alpha: float | None = None
    n_nodes: int | None = None

    def __post_init__(self):
        if self.kind not in ("bic", "aic", "custom"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "custom":
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("custom penalty needs alpha > 0")
            if self.n_nodes is None or self.n_nodes < 1:
                raise ValueError("custom penalty needs n_nodes >= 1")

    @classmethod
    def bic(cls):
        return cls("bic")

    @classmethod
    def aic(cls):
        return cls("aic")

    @classmethod
    def custom(cls, alpha, n_nodes):
        return cls("custom", float(alpha), int(n_nodes))

    @classmethod
    def parse(cls, text: str, n_nodes: int | None = None) -> "Penalty":
        """Parse ``bic``, ``aic`` or ``alpha:<value>``."""
        t = text.strip().lower()
        if t in ("bic", "aic"):
            return cls(t)
        if t.startswith("alpha:"):
            return cls.custom(float(t.split(":", 1)[1]), n_nodes)
        raise ValueError(f"cannot parse penalty {text!r}; use bic, aic or alpha:<value>")

    @property
    def label(self) -> str:
        return self.kind if self.kind != "custom" else f"alpha:{self.alpha:g}"

    def value(self, n: int) -> float:
        return lambda_value(self, n)


def lambda_value(penalty: Penalty, n: int) -> float:
    if n < 1:
        raise ValueError("sample size must be at least 1")
    if penalty.kind == "bic":
        return math.log(n) / (2.0 * n)
    if penalty.kind == "aic":
        return 1.0 / n
    return n ** (-penalty.alpha) / penalty.n_nodes


@dataclass(frozen=True)
class NodeScore:
    value: float
    nal: float
    n_local: int
    dim: int
    degenerate: bool = False

    @property
    def valid(self) -> bool:
        return math.isfinite(self.value)


def _nal(data: Dataset, node, parents):
    rows = locally_complete_rows(data, node, parents)
    if rows.size == 0:
        return INVALID, 0, True
    try:
        dist = fit_local(data, rows, node, parents)
    except FitError:
        return INVALID, int(rows.size), True
    if dist.degenerate:
        return INVALID, int(rows.size), True
    cols = _columns(data, (node,) + tuple(parents), rows)
    return float(np.mean(dist.log_density_array(cols))), int(rows.size), False


def nal_node(data: Dataset, node, parents=(), penalty: Penalty | None = None) -> NodeScore:
    """Mean log-likelihood of ``node`` on the rows where it and its parents are observed.

    With a penalty, ``value`` also subtracts the node's share lambda_n * dim.
    Empty subsets and degenerate fits give ``-inf``.
    """
    parents = tuple(sorted(parents, key=data.index))
    dim = _local_dim(data.types, node, parents)
    nal, n_local, degenerate = _nal(data, node, parents)
    value = nal
    if penalty is not None and math.isfinite(nal):
        value = nal - lambda_value(penalty, data.n_rows) * dim
    return NodeScore(value, nal, n_local, dim, degenerate)


class ScoredSearchState:
    """Cache of penalised node scores keyed by (node, parent set).

    ``calls`` counts cache misses, i.e. actual score evaluations.
    """

    def __init__(self, data: Dataset, penalty: Penalty):
        self.data = data
        self.penalty = penalty
        self.lam = lambda_value(penalty, max(data.n_rows, 1))
        self.cache: dict = {}
        self.calls = 0
        self._lock = threading.Lock()

    def node_score(self, node, parents) -> NodeScore:
        key = (node, frozenset(parents))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        ns = nal_node(self.data, node, parents, self.penalty)
        with self._lock:
            if key not in self.cache:
                self.cache[key] = ns
                self.calls += 1
            return self.cache[key]

    def value(self, node, parents) -> float:
        return self.node_score(node, parents).value

    def matches(self, data, penalty) -> bool:
        return self.data is data and self.penalty == penalty


def _state_for(data, penalty, state):
    if state is None:
        return ScoredSearchState(data, penalty)
    if not state.matches(data, penalty):
        raise ValueError("score cache belongs to a different dataset or penalty")
    return state


def spl_score(data: Dataset, dag: Dag, penalty: Penalty, state: ScoredSearchState | None = None) -> float:
    """Sum of node NALs minus lambda_n * dim(Theta), with n the dataset row count."""
    state = _state_for(data, penalty, state)
    terms = [state.value(v, dag.parents(v)) for v in dag.nodes]
    if not all(map(math.isfinite, terms)):
        return INVALID
    return math.fsum(terms)


def _require_complete(data):
    if not data.is_complete():
        raise DataError("complete-data score requested on data with missing cells")


def complete_bic(data: Dataset, dag: Dag) -> float:
    _require_complete(data)
    return spl_score(data, dag, Penalty.bic())


def complete_aic(data: Dataset, dag: Dag) -> float:
    _require_complete(data)
    return spl_score(data, dag, Penalty.aic())


def changed_nodes(op: str, arc) -> tuple:
    """Nodes whose parent sets a move alters."""
    p, c = arc
    return (c, p) if op == "reverse" else (c,)


def _new_parents(dag: Dag, op, arc) -> dict:
    p, c = arc
    if op == "add":
        return {c: dag.parents(c) + (p,)}
    if op == "delete":
        return {c: tuple(x for x in dag.parents(c) if x != p)}
    if op == "reverse":
        return {
            c: tuple(x for x in dag.parents(c) if x != p),
            p: dag.parents(p) + (c,),
        }
    raise ValueError(f"unknown operation {op!r}")


def score_delta(state: ScoredSearchState, dag: Dag, op: str, arc) -> float:
    """Change in the penalised score caused by one move, touching only altered nodes."""
    new = _new_parents(dag, op, arc)
    old_terms = [state.value(v, dag.parents(v)) for v in new]
    new_terms = [state.value(v, ps) for v, ps in new.items()]
    if not all(map(math.isfinite, new_terms)):
        return INVALID
    if not all(map(math.isfinite, old_terms)):
        return math.inf
    return math.fsum(new_terms) - math.fsum(old_terms)
