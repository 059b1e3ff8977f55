from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nalbn.graph import (
    Cpdag, CycleError, Dag, GraphError, mutate, scaled_shd, shd, to_cpdag, topological_order,
)


def test_topological_order_examples():
    assert topological_order(Dag(["A"])) == ["A"]
    assert topological_order(Dag(["A", "B", "C"], [("A", "B"), ("B", "C")])) == ["A", "B", "C"]
    with pytest.raises(CycleError):
        Dag(["A", "B"], [("A", "B"), ("B", "A")])


def test_topological_order_respects_arcs_and_ties():
    dag = Dag(["C", "B", "A"], [("A", "B")])
    order = topological_order(dag)
    assert order.index("A") < order.index("B")
    assert order == ["C", "A", "B"]


def test_dag_rejects_bad_input():
    with pytest.raises(GraphError):
        Dag(["A", "A"])
    with pytest.raises(GraphError):
        Dag(["A"], [("A", "Z")])
    with pytest.raises(GraphError):
        Dag(["A"], [("A", "A")])


def test_cpdag_examples():
    chain = to_cpdag(Dag(["X", "Y", "Z"], [("X", "Y"), ("Y", "Z")]))
    assert chain.directed == frozenset()
    assert chain.undirected == {frozenset("XY"), frozenset("YZ")}
    collider = to_cpdag(Dag(["X", "Y", "Z"], [("X", "Z"), ("Y", "Z")]))
    assert collider.directed == {("X", "Z"), ("Y", "Z")}
    assert collider.undirected == frozenset()
    empty = to_cpdag(Dag(["X", "Y"]))
    assert not empty.directed and not empty.undirected


def test_meek_r1_propagates_below_collider():
    cp = to_cpdag(Dag(list("ABCD"), [("A", "C"), ("B", "C"), ("C", "D")]))
    assert ("C", "D") in cp.directed


def test_shd_examples():
    nodes = ["X", "Y", "Z"]
    chain = to_cpdag(Dag(nodes, [("X", "Y"), ("Y", "Z")]))
    empty = to_cpdag(Dag(nodes))
    collider = to_cpdag(Dag(nodes, [("X", "Z"), ("Y", "Z")]))
    assert shd(chain, chain) == 0
    assert shd(chain, empty) == 2
    assert shd(chain, collider) == 3
    assert scaled_shd(chain, chain, 5) == 0.0
    assert scaled_shd(chain, collider, 2) == 1.5
    with pytest.raises(GraphError):
        scaled_shd(chain, chain, 0)


def test_mutate_examples():
    two = Dag(["A", "B"])
    assert mutate(two, "add", ("A", "B")).arcs == {("A", "B")}
    assert mutate(Dag(["A", "B"], [("A", "B")]), "reverse", ("A", "B")).arcs == {("B", "A")}
    assert mutate(Dag(["A", "B"], [("A", "B")]), "delete", ("A", "B")).arcs == frozenset()
    chain = Dag(["A", "B", "C"], [("A", "B"), ("B", "C")])
    with pytest.raises(CycleError):
        mutate(chain, "add", ("C", "A"))
    with pytest.raises(GraphError):
        mutate(chain, "delete", ("A", "C"))
    with pytest.raises(GraphError):
        mutate(chain, "add", ("A", "B"))


# --- brute-force equivalence-class oracle ----------------------------------------

def _v_structures(nodes, arcs):
    parents = {v: {p for p, c in arcs if c == v} for v in nodes}
    adj = {frozenset(a) for a in arcs}
    return {
        (a, c, b) if a < b else (b, c, a)
        for c in nodes for a, b in combinations(sorted(parents[c]), 2)
        if frozenset((a, b)) not in adj
    }


def _acyclic(nodes, arcs):
    try:
        Dag(nodes, arcs)
        return True
    except CycleError:
        return False


def oracle_cpdag(dag):
    """Arcs oriented the same way in every Markov-equivalent DAG are directed."""
    nodes = list(dag.nodes)
    skeleton = [tuple(sorted(a)) for a in dag.arcs]
    target = _v_structures(nodes, dag.arcs)
    members = []
    for flips in product((False, True), repeat=len(skeleton)):
        arcs = {(b, a) if f else (a, b) for (a, b), f in zip(skeleton, flips)}
        if _acyclic(nodes, arcs) and _v_structures(nodes, arcs) == target:
            members.append(arcs)
    directed = set.intersection(*members) if members else set()
    undirected = {frozenset(e) for e in skeleton} - {frozenset(a) for a in directed}
    return Cpdag(nodes, directed, undirected)


@st.composite
def dags(draw, max_nodes=5):
    n = draw(st.integers(1, max_nodes))
    nodes = [chr(ord("A") + i) for i in range(n)]
    perm = draw(st.permutations(nodes))
    arcs = [
        (perm[i], perm[j]) for i, j in combinations(range(n), 2) if draw(st.booleans())
    ]
    return Dag(nodes, arcs)


@settings(max_examples=200, deadline=None)
@given(dags())
def test_cpdag_matches_brute_force_equivalence_class(dag):
    assert to_cpdag(dag) == oracle_cpdag(dag)


@settings(max_examples=100, deadline=None)
@given(dags(), dags(), dags())
def test_shd_is_a_metric(a, b, c):
    if not (a.nodes == b.nodes == c.nodes):
        return
    ca, cb, cc = to_cpdag(a), to_cpdag(b), to_cpdag(c)
    assert shd(ca, ca) == 0
    assert shd(ca, cb) == shd(cb, ca)
    assert shd(ca, cc) <= shd(ca, cb) + shd(cb, cc)
    assert (shd(ca, cb) == 0) == (ca == cb)


@settings(max_examples=100, deadline=None)
@given(dags(), st.data())
def test_mutate_never_creates_a_cycle(dag, data):
    nodes = dag.nodes
    if len(nodes) < 2:
        return
    p, c = data.draw(st.sampled_from([(x, y) for x in nodes for y in nodes if x != y]))
    op = data.draw(st.sampled_from(["add", "delete", "reverse"]))
    try:
        out = mutate(dag, op, (p, c))
    except GraphError:
        return
    assert _acyclic(out.nodes, out.arcs)
    assert len(topological_order(out)) == len(nodes)


def test_equivalent_dags_share_cpdag():
    nodes = list("XYZ")
    forward = Dag(nodes, [("X", "Y"), ("Y", "Z")])
    backward = Dag(nodes, [("Z", "Y"), ("Y", "X")])
    fork = Dag(nodes, [("Y", "X"), ("Y", "Z")])
    assert to_cpdag(forward) == to_cpdag(backward) == to_cpdag(fork)


def test_is_reachable():
    dag = Dag(list("ABCD"), [("A", "B"), ("B", "C")])
    assert dag.is_reachable("A", "C")
    assert not dag.is_reachable("C", "A")
    assert not dag.is_reachable("A", "D")
