"""Small hand-built networks shared by the tests."""

import numpy as np

from nalbn import BayesianNetwork, Dag, Discrete, Gaussian
from nalbn.model import Cpt, GaussianRegression


def binary_chain(n_nodes=4, flip=0.85):
    nodes = [f"N{i}" for i in range(n_nodes)]
    types = {v: Discrete(("0", "1")) for v in nodes}
    dag = Dag(nodes, list(zip(nodes, nodes[1:])))
    dists = {nodes[0]: Cpt(nodes[0], (), (), np.array([[0.5, 0.5]]))}
    for p, c in zip(nodes, nodes[1:]):
        dists[c] = Cpt(c, (p,), (2,), np.array([[flip, 1 - flip], [1 - flip, flip]]))
    return BayesianNetwork(dag, types, dists)


def binary_pair(p_root=0.5, link=None):
    """A -> B when ``link`` is given: P(B=1 | A) = link[A]; else independent uniform."""
    types = {"A": Discrete(("0", "1")), "B": Discrete(("0", "1"))}
    root = Cpt("A", (), (), np.array([[1 - p_root, p_root]]))
    if link is None:
        return BayesianNetwork(Dag(["A", "B"]), types, {"A": root, "B": Cpt("B", (), (), np.array([[0.5, 0.5]]))})
    probs = np.array([[1 - link[0], link[0]], [1 - link[1], link[1]]])
    return BayesianNetwork(Dag(["A", "B"], [("A", "B")]), types, {"A": root, "B": Cpt("B", ("A",), (2,), probs)})


def gaussian_pair(mu_x=1.0, var_x=2.0, b0=0.5, b1=1.5, var_y=0.5):
    types = {"X": Gaussian(), "Y": Gaussian()}
    dists = {
        "X": GaussianRegression("X", (), mu_x, np.zeros(0), var_x),
        "Y": GaussianRegression("Y", ("X",), b0, np.array([b1]), var_y),
    }
    return BayesianNetwork(Dag(["X", "Y"], [("X", "Y")]), types, dists)


def random_binary_network(rng, n_nodes=4, arc_prob=0.5):
    nodes = [f"V{i}" for i in range(n_nodes)]
    types = {v: Discrete(("0", "1")) for v in nodes}
    arcs = [(nodes[i], nodes[j]) for i in range(n_nodes) for j in range(i + 1, n_nodes)
            if rng.random() < arc_prob]
    dag = Dag(nodes, arcs)
    dists = {}
    for v in nodes:
        ps = dag.parents(v)
        p1 = rng.uniform(0.1, 0.9, size=2 ** len(ps))
        dists[v] = Cpt(v, ps, (2,) * len(ps), np.column_stack([1 - p1, p1]))
    return BayesianNetwork(dag, types, dists)


def lw_conditional_mean_oracle(mu_x, var_x, b0, b1, var_y, y, particles, grid=20001):
    """Exact E[X | Y=y] and the likelihood-weighting standard error at ``particles``.

    The proposal is the prior of X and the weight is the density of Y given X,
    so the self-normalised estimator has asymptotic variance
    E_q[w^2 (x - m)^2] / (E_q[w])^2 / particles. Both moments are integrated on a grid.
    """
    sx = np.sqrt(var_x)
    x = np.linspace(mu_x - 12 * sx, mu_x + 12 * sx, grid)
    dx = x[1] - x[0]
    q = np.exp(-0.5 * (x - mu_x) ** 2 / var_x) / np.sqrt(2 * np.pi * var_x)
    w = np.exp(-0.5 * (y - b0 - b1 * x) ** 2 / var_y) / np.sqrt(2 * np.pi * var_y)
    ew = np.sum(q * w) * dx
    m = np.sum(q * w * x) * dx / ew
    v = np.sum(q * w * w * (x - m) ** 2) * dx / ew ** 2
    return m, np.sqrt(v / particles)
