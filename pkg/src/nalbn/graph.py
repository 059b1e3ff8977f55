"""DAG and CPDAG representations, Markov-equivalence conversion and SHD."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "CycleError",
    "GraphError",
    "Dag",
    "Cpdag",
    "topological_order",
    "to_cpdag",
    "shd",
    "scaled_shd",
    "mutate",
]


class GraphError(ValueError):
    """Malformed graph or inapplicable graph operation."""


class CycleError(GraphError):
    def __init__(self, message="arc set contains a directed cycle"):
        super().__init__(message)


Arc = tuple


class Dag:
    """Immutable directed acyclic graph over an ordered node list.

    Acyclicity is checked at construction; pass ``check=False`` only when the
    caller has already guaranteed it (the search loops do this).
    """

    __slots__ = ("nodes", "arcs", "_index", "_parents")

    def __init__(self, nodes: Sequence[str], arcs: Iterable[Arc] = (), check=True):
        self.nodes = tuple(nodes)
        self._index = {v: i for i, v in enumerate(self.nodes)}
        if len(self._index) != len(self.nodes):
            raise GraphError("duplicate node names")
        arcs = frozenset((p, c) for p, c in arcs)
        parents = {v: [] for v in self.nodes}
        for p, c in arcs:
            if p not in self._index or c not in self._index:
                raise GraphError(f"arc {p}->{c} references an unknown node")
            if p == c:
                raise GraphError(f"self-loop on {p}")
            parents[c].append(p)
        self.arcs = arcs
        self._parents = {
            v: tuple(sorted(ps, key=self._index.__getitem__)) for v, ps in parents.items()
        }
        if check:
            topological_order(self)

    @classmethod
    def empty(cls, nodes):
        return cls(nodes, ())

    def parents(self, node) -> tuple:
        """Parents of ``node`` in node-list order."""
        return self._parents[node]

    def children(self, node) -> tuple:
        return tuple(c for c in self.nodes if node in self._parents[c])

    def index(self, node) -> int:
        return self._index[node]

    def has_arc(self, parent, child) -> bool:
        return (parent, child) in self.arcs

    def sorted_arcs(self) -> list:
        ix = self._index
        return sorted(self.arcs, key=lambda a: (ix[a[0]], ix[a[1]]))

    def is_reachable(self, source, target) -> bool:
        """True when a directed path source -> ... -> target exists."""
        if source == target:
            return True
        children = {v: [] for v in self.nodes}
        for p, c in self.arcs:
            children[p].append(c)
        stack, seen = [source], {source}
        while stack:
            v = stack.pop()
            for w in children[v]:
                if w == target:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, Dag) and self.nodes == other.nodes and self.arcs == other.arcs

    def __hash__(self):
        return hash((self.nodes, self.arcs))

    def __repr__(self):
        parts = []
        for v in self.nodes:
            ps = self._parents[v]
            parts.append(f"[{v}|{':'.join(ps)}]" if ps else f"[{v}]")
        return "Dag(" + "".join(parts) + ")"

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "arcs": [list(a) for a in self.sorted_arcs()]}


def topological_order(dag: Dag) -> list:
    """Kahn's algorithm; ties broken by node-list position."""
    indeg = {v: len(dag.parents(v)) for v in dag.nodes}
    children = {v: [] for v in dag.nodes}
    for p, c in dag.arcs:
        children[p].append(c)
    ready = [v for v in dag.nodes if indeg[v] == 0]
    order = []
    while ready:
        ready.sort(key=dag.index)
        v = ready.pop(0)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != len(dag.nodes):
        raise CycleError()
    return order


class Cpdag:
    """Completed partially directed acyclic graph.

    ``undirected`` holds frozenset pairs; ``directed`` holds (parent, child).
    """

    __slots__ = ("nodes", "directed", "undirected")

    def __init__(self, nodes, directed=(), undirected=()):
        self.nodes = tuple(nodes)
        self.directed = frozenset(tuple(a) for a in directed)
        self.undirected = frozenset(frozenset(e) for e in undirected)
        for a, b in self.directed:
            if frozenset((a, b)) in self.undirected:
                raise GraphError(f"pair {a},{b} is both directed and undirected")
            if (b, a) in self.directed:
                raise GraphError(f"pair {a},{b} is directed both ways")

    def edge_state(self, a, b):
        """State of the unordered pair: None, 'undirected', or the directed arc."""
        if (a, b) in self.directed:
            return (a, b)
        if (b, a) in self.directed:
            return (b, a)
        if frozenset((a, b)) in self.undirected:
            return "undirected"
        return None

    def __eq__(self, other):
        return (
            isinstance(other, Cpdag)
            and set(self.nodes) == set(other.nodes)
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self):
        return hash((frozenset(self.nodes), self.directed, self.undirected))

    def __repr__(self):
        d = sorted("->".join(a) for a in self.directed)
        u = sorted("--".join(sorted(e)) for e in self.undirected)
        return f"Cpdag(directed={d}, undirected={u})"


def _v_structure_arcs(dag: Dag) -> set:
    compelled = set()
    for c in dag.nodes:
        for a, b in combinations(dag.parents(c), 2):
            if not dag.has_arc(a, b) and not dag.has_arc(b, a):
                compelled.add((a, c))
                compelled.add((b, c))
    return compelled


def to_cpdag(dag: Dag) -> Cpdag:
    """Orient v-structures, then close under Meek's rules R1-R3."""
    directed = _v_structure_arcs(dag)
    undirected = {frozenset(a) for a in dag.arcs if a not in directed}

    def adjacent(x, y):
        return (x, y) in directed or (y, x) in directed or frozenset((x, y)) in undirected

    changed = True
    while changed:
        changed = False
        for edge in sorted(undirected, key=lambda e: sorted(map(dag.index, e))):
            x, y = sorted(edge, key=dag.index)
            for a, b in ((x, y), (y, x)):
                if _meek_orients(a, b, dag.nodes, directed, undirected, adjacent):
                    undirected.discard(edge)
                    directed.add((a, b))
                    changed = True
                    break
    return Cpdag(dag.nodes, directed, undirected)


def _meek_orients(a, b, nodes, directed, undirected, adjacent) -> bool:
    """Whether the undirected edge a--b is compelled to a->b."""
    # R1: c -> a -- b with c, b non-adjacent
    for c in nodes:
        if (c, a) in directed and c != b and not adjacent(c, b):
            return True
    # R2: a -> c -> b
    for c in nodes:
        if (a, c) in directed and (c, b) in directed:
            return True
    # R3: a -- c -> b, a -- d -> b, c and d non-adjacent
    mids = [
        c for c in nodes
        if frozenset((a, c)) in undirected and (c, b) in directed
    ]
    for c, d in combinations(mids, 2):
        if not adjacent(c, d):
            return True
    return False


def shd(a: Cpdag, b: Cpdag) -> int:
    """Number of node pairs whose edge state differs between two CPDAGs."""
    if set(a.nodes) != set(b.nodes):
        raise GraphError("CPDAGs are defined over different node sets")
    return sum(
        a.edge_state(x, y) != b.edge_state(x, y) for x, y in combinations(a.nodes, 2)
    )


def scaled_shd(learned: Cpdag, truth: Cpdag, true_arc_count: int) -> float:
    if true_arc_count <= 0:
        raise GraphError("true_arc_count must be positive")
    return shd(learned, truth) / true_arc_count


def mutate(dag: Dag, op: str, arc: Arc) -> Dag:
    """Apply one add/delete/reverse move, returning a new DAG."""
    p, c = arc
    if op == "add":
        if dag.has_arc(p, c) or dag.has_arc(c, p):
            raise GraphError(f"arc {p}->{c} already present")
        if dag.is_reachable(c, p):
            raise CycleError(f"adding {p}->{c} creates a cycle")
        return Dag(dag.nodes, dag.arcs | {(p, c)}, check=False)
    if not dag.has_arc(p, c):
        raise GraphError(f"arc {p}->{c} not found")
    if op == "delete":
        return Dag(dag.nodes, dag.arcs - {(p, c)}, check=False)
    if op == "reverse":
        rest = Dag(dag.nodes, dag.arcs - {(p, c)}, check=False)
        if rest.is_reachable(p, c):
            raise CycleError(f"reversing {p}->{c} creates a cycle")
        return Dag(dag.nodes, rest.arcs | {(c, p)}, check=False)
    raise GraphError(f"unknown operation {op!r}")
