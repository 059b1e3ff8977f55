"""Bundled desk-scale reference networks.

Each has eight nodes, at most two parents per node and strong dependencies so
that the true structure is recoverable at a few thousand rows.
"""

from __future__ import annotations

import os

import numpy as np

from .graph import Dag
from .model import BayesianNetwork, Cpt, CgMixture, GaussianRegression
from .types import Discrete, Gaussian

__all__ = ["discrete8", "gaussian8", "cg8", "BUNDLED", "load_network"]


def _cpt(types, dag, child, rows):
    parents = dag.parents(child)
    cards = tuple(types[p].n_levels for p in parents)
    return Cpt(child, parents, cards, np.asarray(rows, dtype=float))


def _binary(p1):
    return [[1.0 - p, p] for p in p1]


def discrete8() -> BayesianNetwork:
    """Discrete BN with two v-structures (at D and G)."""
    levels = {"A": 2, "B": 3, "C": 2, "D": 2, "E": 3, "F": 2, "G": 2, "H": 2}
    types = {v: Discrete(tuple(f"{v.lower()}{i}" for i in range(k))) for v, k in levels.items()}
    arcs = [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D"), ("C", "E"),
            ("D", "F"), ("D", "G"), ("E", "G"), ("F", "H")]
    dag = Dag(list(levels), arcs)
    rows = {
        "A": [[0.4, 0.6]],
        "B": [[0.8, 0.15, 0.05], [0.1, 0.2, 0.7]],
        "C": [[0.85, 0.15], [0.2, 0.8]],
        # configs (B, C) row-major: b0c0 b0c1 b1c0 b1c1 b2c0 b2c1
        "D": _binary([0.05, 0.6, 0.4, 0.9, 0.7, 0.97]),
        "E": [[0.75, 0.2, 0.05], [0.1, 0.25, 0.65]],
        "F": _binary([0.1, 0.85]),
        # configs (D, E): d0e0 d0e1 d0e2 d1e0 d1e1 d1e2
        "G": _binary([0.05, 0.5, 0.85, 0.6, 0.9, 0.98]),
        "H": _binary([0.15, 0.75]),
    }
    return BayesianNetwork(dag, types, {v: _cpt(types, dag, v, r) for v, r in rows.items()})


def _reg(child, parents, intercept, coefs, var):
    return GaussianRegression(child, tuple(parents), float(intercept), np.asarray(coefs, dtype=float), float(var))


def gaussian8() -> BayesianNetwork:
    """Linear Gaussian BN over X1..X8."""
    nodes = [f"X{i}" for i in range(1, 9)]
    types = {v: Gaussian() for v in nodes}
    spec = {
        "X1": ((), 0.0, (), 1.0),
        "X2": ((), 1.0, (), 1.0),
        "X3": (("X1",), 0.5, (1.2,), 0.5),
        "X4": (("X1", "X2"), -1.0, (0.8, -0.9), 0.6),
        "X5": (("X3",), 0.0, (-1.0,), 0.4),
        "X6": (("X3", "X4"), 2.0, (0.7, 0.9), 0.5),
        "X7": (("X5",), 0.0, (1.1,), 0.7),
        "X8": (("X6",), -0.5, (-0.8,), 0.5),
    }
    arcs = [(p, c) for c, (ps, *_rest) in spec.items() for p in ps]
    dag = Dag(nodes, arcs)
    dists = {c: _reg(c, ps, b0, b, s2) for c, (ps, b0, b, s2) in spec.items()}
    return BayesianNetwork(dag, types, dists)


def cg8() -> BayesianNetwork:
    """Conditional linear Gaussian BN: three discrete and five Gaussian nodes."""
    types = {
        "A": Discrete(("a0", "a1")),
        "B": Discrete(("b0", "b1", "b2")),
        "C": Discrete(("c0", "c1")),
        "X": Gaussian(), "Y": Gaussian(), "Z": Gaussian(), "W": Gaussian(), "V": Gaussian(),
    }
    arcs = [("A", "B"), ("A", "C"), ("B", "X"), ("X", "Y"), ("C", "Y"),
            ("Y", "Z"), ("X", "W"), ("Z", "W"), ("C", "V")]
    dag = Dag(list(types), arcs)
    dists = {
        "A": _cpt(types, dag, "A", [[0.45, 0.55]]),
        "B": _cpt(types, dag, "B", [[0.75, 0.2, 0.05], [0.1, 0.25, 0.65]]),
        "C": _cpt(types, dag, "C", [[0.8, 0.2], [0.25, 0.75]]),
        "X": CgMixture("X", ("B",), (3,), (), [
            _reg("X", (), -2.0, (), 1.0), _reg("X", (), 0.0, (), 1.0), _reg("X", (), 2.0, (), 1.0),
        ]),
        "Y": CgMixture("Y", ("C",), (2,), ("X",), [
            _reg("Y", ("X",), 1.0, (1.0,), 1.0), _reg("Y", ("X",), -1.5, (0.5,), 0.5),
        ]),
        "Z": _reg("Z", ("Y",), 0.0, (0.8,), 1.0),
        "W": _reg("W", ("X", "Z"), 0.5, (0.7, 0.6), 1.0),
        "V": CgMixture("V", ("C",), (2,), (), [
            _reg("V", (), -1.5, (), 1.0), _reg("V", (), 1.5, (), 1.0),
        ]),
    }
    return BayesianNetwork(dag, types, dists)


BUNDLED = {"discrete8": discrete8, "gaussian8": gaussian8, "cg8": cg8}


def load_network(name_or_path) -> BayesianNetwork:
    """A bundled network by name, or a BN JSON file by path."""
    if name_or_path in BUNDLED:
        return BUNDLED[name_or_path]()
    if not os.path.exists(name_or_path):
        raise FileNotFoundError(
            f"{name_or_path!r} is neither a bundled network ({', '.join(BUNDLED)}) nor a file"
        )
    return BayesianNetwork.load(name_or_path)
