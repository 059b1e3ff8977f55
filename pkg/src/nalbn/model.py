"""Local distributions, MLE fitting, dimension accounting and sampling.

Parent configurations are enumerated row-major over the discrete parents in
node-list order: the last parent varies fastest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Union

import numpy as np

from .data import Dataset
from .graph import Dag, topological_order
from .types import Discrete, Gaussian, NodeType, node_type_from_dict, node_type_to_dict

__all__ = [
    "VARIANCE_FLOOR",
    "FitError",
    "ModelError",
    "Cpt",
    "GaussianRegression",
    "CgMixture",
    "BayesianNetwork",
    "validate_structure",
    "fit_cpt",
    "fit_gaussian_regression",
    "fit_cg_mixture",
    "fit_local",
    "dim_theta",
    "dim_theta_total",
    "log_density",
    "forward_sample",
]

VARIANCE_FLOOR = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


class FitError(ValueError):
    """A local distribution cannot be estimated from the given rows."""


class ModelError(ValueError):
    pass


def _cardinalities(node_types, parents) -> tuple:
    return tuple(node_types[p].n_levels for p in parents)


def _config_index(cols: Mapping[str, np.ndarray], parents, cards, shape) -> np.ndarray:
    idx = np.zeros(shape, dtype=np.intp)
    for p, c in zip(parents, cards):
        idx = idx * c + cols[p].astype(np.intp)
    return idx


def _columns(data: Dataset, names, rows=None) -> dict:
    out = {}
    for v in names:
        if isinstance(data.types[v], Discrete):
            col = data.codes(v)
        else:
            col = data.column(v)
        out[v] = col if rows is None else col[rows]
    return out


@dataclass
class Cpt:
    child: str
    parents: tuple
    parent_levels: tuple
    probs: np.ndarray
    degenerate: bool = False
    unobserved: tuple = ()

    @property
    def n_configs(self) -> int:
        return self.probs.shape[0]

    def parent_configs(self) -> list:
        return list(product(*(range(c) for c in self.parent_levels)))

    def log_density_array(self, cols, strict=True) -> np.ndarray:
        k = cols[self.child].astype(np.intp)
        cfg = _config_index(cols, self.parents, self.parent_levels, k.shape)
        if k.size and (k.min() < 0 or k.max() >= self.probs.shape[1]):
            raise ModelError(f"unseen level for {self.child}")
        with np.errstate(divide="ignore"):
            return np.log(self.probs[cfg, k])

    def sample_array(self, cols, u) -> np.ndarray:
        cfg = _config_index(cols, self.parents, self.parent_levels, np.shape(u))
        cum = np.cumsum(self.probs, axis=1)[cfg]
        k = (u[..., None] >= cum[..., :-1]).sum(axis=-1)
        return k.astype(float)


@dataclass
class GaussianRegression:
    child: str
    parents: tuple
    intercept: float
    coefficients: np.ndarray
    variance: float
    degenerate: bool = False
    n: int = 0

    def mean_array(self, cols, shape) -> np.ndarray:
        mu = np.full(shape, self.intercept, dtype=float)
        for p, b in zip(self.parents, self.coefficients):
            mu = mu + b * cols[p]
        return mu

    def log_density_array(self, cols, strict=True) -> np.ndarray:
        if strict and self.degenerate:
            raise ModelError(f"degenerate regression for {self.child}")
        y = cols[self.child]
        r = y - self.mean_array(cols, np.shape(y))
        return -0.5 * (LOG_2PI + math.log(self.variance)) - 0.5 * r * r / self.variance

    def sample_array(self, cols, z) -> np.ndarray:
        return self.mean_array(cols, np.shape(z)) + math.sqrt(self.variance) * z


@dataclass
class CgMixture:
    child: str
    discrete_parents: tuple
    parent_levels: tuple
    continuous_parents: tuple
    components: list = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return any(c.degenerate for c in self.components)

    @property
    def parents(self) -> tuple:
        return self.discrete_parents + self.continuous_parents

    def parent_configs(self) -> list:
        return list(product(*(range(c) for c in self.parent_levels)))

    def _stacked(self):
        ints = np.array([c.intercept for c in self.components])
        coefs = np.array([c.coefficients for c in self.components]).reshape(
            len(self.components), len(self.continuous_parents)
        )
        var = np.array([c.variance for c in self.components])
        return ints, coefs, var

    def _mean_var(self, cols, shape):
        cfg = _config_index(cols, self.discrete_parents, self.parent_levels, shape)
        ints, coefs, var = self._stacked()
        mu = ints[cfg]
        for j, p in enumerate(self.continuous_parents):
            mu = mu + coefs[cfg, j] * cols[p]
        return cfg, mu, var[cfg]

    def log_density_array(self, cols, strict=True) -> np.ndarray:
        cfg, mu, var = self._mean_var(cols, np.shape(cols[self.child]))
        bad = np.array([c.degenerate for c in self.components])
        if strict and bad[cfg].any():
            raise ModelError(f"value of {self.child} routed to a degenerate component")
        r = cols[self.child] - mu
        return -0.5 * (LOG_2PI + np.log(var)) - 0.5 * r * r / var

    def sample_array(self, cols, z) -> np.ndarray:
        _, mu, var = self._mean_var(cols, np.shape(z))
        return mu + np.sqrt(var) * z


LocalDistribution = Union[Cpt, GaussianRegression, CgMixture]


def validate_structure(dag: Dag, node_types) -> list:
    """Arcs from a Gaussian parent into a discrete child (empty list when valid)."""
    return [
        (p, c)
        for p, c in dag.sorted_arcs()
        if isinstance(node_types[c], Discrete) and isinstance(node_types[p], Gaussian)
    ]


def fit_cpt(data: Dataset, rows, child, parents=()) -> Cpt:
    """Relative-frequency MLE of a conditional probability table.

    Parent configurations absent from ``rows`` get a uniform row and make the
    table degenerate.
    """
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise FitError(f"no rows to fit {child}")
    parents = tuple(sorted(parents, key=data.index))
    cards = _cardinalities(data.types, parents)
    n_levels = data.types[child].n_levels
    cols = _columns(data, (child,) + parents, rows)
    cfg = _config_index(cols, parents, cards, rows.shape)
    n_configs = int(np.prod(cards, dtype=np.int64)) if cards else 1
    counts = np.bincount(
        cfg * n_levels + cols[child], minlength=n_configs * n_levels
    ).reshape(n_configs, n_levels).astype(float)
    totals = counts.sum(axis=1)
    seen = totals > 0
    probs = np.full((n_configs, n_levels), 1.0 / n_levels)
    probs[seen] = counts[seen] / totals[seen, None]
    unobserved = tuple(int(j) for j in np.flatnonzero(~seen))
    return Cpt(child, parents, cards, probs, degenerate=bool(unobserved), unobserved=unobserved)


def _ols(y: np.ndarray, X: np.ndarray):
    n, p = X.shape
    W = np.column_stack([np.ones(n), X])
    beta, _, rank, _ = np.linalg.lstsq(W, y, rcond=None)
    if rank < p + 1:
        raise FitError("rank-deficient design")
    resid = y - W @ beta
    return beta, float(resid @ resid) / n


def fit_gaussian_regression(data: Dataset, rows, child, parents=()) -> GaussianRegression:
    """Least-squares fit with the MLE (divide-by-n) residual variance.

    Variances below the floor are clamped and the fit is flagged degenerate,
    as are fits without a residual degree of freedom.
    """
    rows = np.asarray(rows, dtype=np.intp)
    parents = tuple(sorted(parents, key=data.index))
    p = len(parents)
    if rows.size < p + 1:
        raise FitError(f"{rows.size} rows cannot identify {p + 1} coefficients for {child}")
    y = data.column(child)[rows]
    X = np.column_stack([data.column(v)[rows] for v in parents]) if p else np.empty((rows.size, 0))
    beta, var = _ols(y, X)
    degenerate = rows.size < p + 2
    if var < VARIANCE_FLOOR:
        var, degenerate = VARIANCE_FLOOR, True
    return GaussianRegression(child, parents, float(beta[0]), beta[1:].copy(), var, degenerate, int(rows.size))


def _placeholder(child, parents, n) -> GaussianRegression:
    return GaussianRegression(child, parents, 0.0, np.zeros(len(parents)), 1.0, True, n)


def fit_cg_mixture(data: Dataset, rows, child, discrete_parents=(), continuous_parents=()):
    """One regression per configuration of the discrete parents."""
    rows = np.asarray(rows, dtype=np.intp)
    dparents = tuple(sorted(discrete_parents, key=data.index))
    cparents = tuple(sorted(continuous_parents, key=data.index))
    cards = _cardinalities(data.types, dparents)
    cfg = _config_index(_columns(data, dparents, rows), dparents, cards, rows.shape)
    n_configs = int(np.prod(cards, dtype=np.int64)) if cards else 1
    components = []
    order = np.argsort(cfg, kind="stable")
    bounds = np.searchsorted(cfg[order], np.arange(n_configs + 1))
    for j in range(n_configs):
        part = rows[order[bounds[j]:bounds[j + 1]]]
        try:
            comp = fit_gaussian_regression(data, part, child, cparents)
        except FitError:
            comp = _placeholder(child, cparents, int(part.size))
        components.append(comp)
    return CgMixture(child, dparents, cards, cparents, components)


def fit_local(data: Dataset, rows, child, parents=()) -> LocalDistribution:
    """Fit the family-appropriate local distribution for ``child``."""
    types = data.types
    if isinstance(types[child], Discrete):
        bad = [p for p in parents if not isinstance(types[p], Discrete)]
        if bad:
            raise ModelError(f"discrete node {child} cannot have Gaussian parents {bad}")
        return fit_cpt(data, rows, child, parents)
    dparents = [p for p in parents if isinstance(types[p], Discrete)]
    cparents = [p for p in parents if not isinstance(types[p], Discrete)]
    if not dparents:
        return fit_gaussian_regression(data, rows, child, cparents)
    return fit_cg_mixture(data, rows, child, dparents, cparents)


def _local_dim(node_types, node, parents) -> int:
    nt = node_types[node]
    dcards = [node_types[p].n_levels for p in parents if isinstance(node_types[p], Discrete)]
    configs = int(np.prod(dcards, dtype=np.int64)) if dcards else 1
    if isinstance(nt, Discrete):
        return (nt.n_levels - 1) * configs
    n_cont = sum(1 for p in parents if not isinstance(node_types[p], Discrete))
    return (2 + n_cont) * configs


def dim_theta(dag: Dag, node_types, node) -> int:
    return _local_dim(node_types, node, dag.parents(node))


def dim_theta_total(dag: Dag, node_types) -> int:
    return sum(_local_dim(node_types, v, dag.parents(v)) for v in dag.nodes)


def log_density(dist: LocalDistribution, row: Mapping) -> float:
    """Log mass/density of the child value in ``row`` given its parent values.

    ``row`` maps node names to level codes (discrete) or reals (Gaussian).
    """
    names = (dist.child,) + tuple(dist.parents)
    cols = {v: np.asarray([row[v]], dtype=float) for v in names}
    return float(dist.log_density_array(cols)[0])


class BayesianNetwork:
    """A DAG with one fitted local distribution per node."""

    def __init__(self, dag: Dag, node_types: Mapping[str, NodeType], distributions: Mapping):
        self.dag = dag
        self.node_types = {v: node_types[v] for v in dag.nodes}
        self.distributions = {v: distributions[v] for v in dag.nodes}
        violations = validate_structure(dag, self.node_types)
        if violations:
            raise ModelError(f"Gaussian parents of discrete nodes: {violations}")
        for v in dag.nodes:
            d = self.distributions[v]
            if tuple(sorted(d.parents, key=dag.index)) != dag.parents(v):
                raise ModelError(f"distribution of {v} does not match its parent set")

    @property
    def nodes(self) -> tuple:
        return self.dag.nodes

    @classmethod
    def fit(cls, dag: Dag, data: Dataset) -> "BayesianNetwork":
        """MLE of every local distribution on its locally-complete rows."""
        from .data import locally_complete_rows

        dists = {}
        for v in dag.nodes:
            rows = locally_complete_rows(data, v, dag.parents(v))
            dists[v] = fit_local(data, rows, v, dag.parents(v))
        return cls(dag, data.types, dists)

    def dim(self) -> int:
        return dim_theta_total(self.dag, self.node_types)

    @property
    def degenerate(self) -> bool:
        return any(d.degenerate for d in self.distributions.values())

    def sample(self, n: int, seed=None) -> Dataset:
        return forward_sample(self, n, seed)

    def topological_order(self) -> list:
        return topological_order(self.dag)

    # -- JSON ---------------------------------------------------------------

    def _config_key(self, parents, cfg) -> str:
        return ",".join(self.node_types[p].levels[c] for p, c in zip(parents, cfg))

    def to_dict(self) -> dict:
        params = {}
        for v in self.nodes:
            d = self.distributions[v]
            if isinstance(d, Cpt):
                params[v] = d.probs.tolist()
            elif isinstance(d, GaussianRegression):
                params[v] = {"": _reg_dict(d)}
            else:
                params[v] = {
                    self._config_key(d.discrete_parents, cfg): _reg_dict(comp)
                    for cfg, comp in zip(d.parent_configs(), d.components)
                }
        return {
            "nodes": [node_type_to_dict(v, self.node_types[v]) for v in self.nodes],
            "arcs": [list(a) for a in self.dag.sorted_arcs()],
            "parameters": params,
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "BayesianNetwork":
        names = [n["name"] for n in spec["nodes"]]
        types = {n["name"]: node_type_from_dict(n) for n in spec["nodes"]}
        dag = Dag(names, [tuple(a) for a in spec.get("arcs", [])])
        params = spec["parameters"]
        dists = {}
        for v in names:
            parents = dag.parents(v)
            if isinstance(types[v], Discrete):
                cards = _cardinalities(types, parents)
                probs = np.asarray(params[v], dtype=float).reshape(-1, types[v].n_levels)
                expected = int(np.prod(cards, dtype=np.int64)) if cards else 1
                if probs.shape[0] != expected:
                    raise ModelError(f"{v}: expected {expected} CPT rows, got {probs.shape[0]}")
                if (probs < 0).any() or np.abs(probs.sum(axis=1) - 1.0).max() > 1e-9:
                    raise ModelError(f"{v}: CPT rows must be probability vectors")
                dists[v] = Cpt(v, parents, cards, probs)
                continue
            dparents = tuple(p for p in parents if isinstance(types[p], Discrete))
            cparents = tuple(p for p in parents if not isinstance(types[p], Discrete))
            cards = _cardinalities(types, dparents)
            comps = []
            for cfg in product(*(range(c) for c in cards)):
                key = ",".join(types[p].levels[c] for p, c in zip(dparents, cfg))
                if key not in params[v]:
                    raise ModelError(f"{v}: missing component for configuration {key!r}")
                comps.append(_reg_from_dict(v, cparents, params[v][key]))
            if dparents:
                dists[v] = CgMixture(v, dparents, cards, cparents, comps)
            else:
                dists[v] = comps[0]
        return cls(dag, types, dists)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BayesianNetwork":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __repr__(self):
        return f"BayesianNetwork({self.dag!r}, dim={self.dim()})"


def _reg_dict(reg: GaussianRegression) -> dict:
    return {
        "intercept": reg.intercept,
        "coefficients": {p: float(b) for p, b in zip(reg.parents, reg.coefficients)},
        "variance": reg.variance,
    }


def _reg_from_dict(child, cparents, spec) -> GaussianRegression:
    coefs = spec.get("coefficients", {})
    if set(coefs) != set(cparents):
        raise ModelError(f"{child}: coefficients {sorted(coefs)} do not match parents {list(cparents)}")
    var = float(spec["variance"])
    if var <= 0:
        raise ModelError(f"{child}: variance must be positive")
    return GaussianRegression(
        child, cparents, float(spec["intercept"]), np.array([float(coefs[p]) for p in cparents]), var
    )


def forward_sample(bn: BayesianNetwork, n: int, seed=None) -> Dataset:
    """Ancestral sampling of ``n`` complete rows."""
    rng = np.random.default_rng(seed)
    order = topological_order(bn.dag)
    cols = {}
    for v in order:
        dist = bn.distributions[v]
        if isinstance(bn.node_types[v], Discrete):
            cols[v] = dist.sample_array(cols, rng.random(n)).astype(np.intp)
        else:
            cols[v] = dist.sample_array(cols, rng.standard_normal(n))
    values = np.column_stack([cols[v].astype(float) for v in bn.nodes]) if bn.nodes else np.empty((n, 0))
    values = values.reshape(n, len(bn.nodes))
    return Dataset(bn.nodes, bn.node_types, values, np.ones(values.shape, dtype=bool))
