"""Structural EM baseline with likelihood-weighted single imputation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .graph import Dag, topological_order
from .model import BayesianNetwork
from .scoring import Penalty
from .search import SearchResult, TabuConfig, tabu_search
from .types import Discrete

__all__ = [
    "DegenerateEvidenceError",
    "SemConfig",
    "impute_row",
    "impute_dataset",
    "structural_em",
]

_CHUNK = 256


class DegenerateEvidenceError(ValueError):
    """Every particle gives zero likelihood to the observed evidence."""


@dataclass(frozen=True)
class SemConfig:
    particles: int = 500
    max_em_iterations: int = 20
    score_tolerance: float = 1e-6
    tabu: TabuConfig = field(default_factory=TabuConfig)
    seed: int = 0

    def __post_init__(self):
        if self.particles < 1 or self.max_em_iterations < 1:
            raise ValueError("particles and max_em_iterations must be at least 1")
        if self.score_tolerance < 0:
            raise ValueError("score_tolerance must be non-negative")


def _row_draws(seed, row, particles, n_nodes):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(row)]))
    return rng.random((particles, n_nodes)), rng.standard_normal((particles, n_nodes))


def _impute_block(bn: BayesianNetwork, values, observed, row_ids, particles, seed, with_weights=False):
    m, n_nodes = values.shape
    U = np.empty((m, particles, n_nodes))
    Z = np.empty((m, particles, n_nodes))
    for r, row in enumerate(row_ids):
        U[r], Z[r] = _row_draws(seed, row, particles, n_nodes)
    index = {v: j for j, v in enumerate(bn.nodes)}
    logw = np.zeros((m, particles))
    cols = {}
    for v in topological_order(bn.dag):
        j = index[v]
        dist = bn.distributions[v]
        discrete = isinstance(bn.node_types[v], Discrete)
        draw = U[:, :, j] if discrete else Z[:, :, j]
        sampled = dist.sample_array(cols, draw)
        obs = observed[:, j]
        clamped = np.where(obs[:, None], np.nan_to_num(values[:, j])[:, None], sampled)
        cols[v] = clamped.astype(np.intp) if discrete else clamped
        if obs.any():
            lp = dist.log_density_array(cols, strict=False)
            logw += np.where(obs[:, None], lp, 0.0)
    top = logw.max(axis=1)
    if not np.isfinite(top).all():
        bad = row_ids[int(np.flatnonzero(~np.isfinite(top))[0])]
        raise DegenerateEvidenceError(f"row {bad}: evidence has zero likelihood under every particle")
    w = np.exp(logw - top[:, None])
    w /= w.sum(axis=1, keepdims=True)
    out = values.copy()
    for v in bn.nodes:
        j = index[v]
        miss = ~observed[:, j]
        if not miss.any():
            continue
        x = cols[v]
        if isinstance(bn.node_types[v], Discrete):
            k = bn.node_types[v].n_levels
            mass = np.stack([(w * (x == level)).sum(axis=1) for level in range(k)], axis=1)
            est = mass.argmax(axis=1).astype(float)
        else:
            est = (w * x).sum(axis=1)
        out[miss, j] = est[miss]
    if with_weights:
        return out, w, cols
    return out


def impute_row(bn: BayesianNetwork, values, observed, particles=500, seed=0, row=0):
    """Complete one row by likelihood weighting with the observed cells as evidence.

    ``values`` and ``observed`` follow ``bn.nodes`` order; discrete cells hold
    level codes. Missing discrete cells get the weighted-mode level, missing
    Gaussian cells the weighted mean. ``row`` selects the per-row random stream,
    so results match :func:`impute_dataset` for the same seed.
    """
    values = np.asarray(values, dtype=float).reshape(1, -1)
    observed = np.asarray(observed, dtype=bool).reshape(1, -1)
    if observed.all():
        return values[0].copy()
    return _impute_block(bn, values, observed, np.array([row]), particles, seed)[0]


def impute_dataset(bn: BayesianNetwork, data: Dataset, particles=500, seed=0) -> Dataset:
    """Impute every incomplete row; rows are seeded from (seed, row index)."""
    if tuple(data.nodes) != tuple(bn.nodes):
        raise ValueError("dataset and network must list the same nodes in the same order")
    values = np.array(data.values)
    incomplete = np.flatnonzero(~data.mask.all(axis=1))
    for start in range(0, incomplete.size, _CHUNK):
        rows = incomplete[start:start + _CHUNK]
        values[rows] = _impute_block(bn, values[rows], data.mask[rows], rows, particles, seed)
    return data.with_values(values, np.ones(data.shape, dtype=bool))


def structural_em(data: Dataset, cfg: SemConfig | None = None) -> SearchResult:
    """Alternate imputation with the current network and a BIC tabu M-step.

    The M-step search starts from the previous structure. Iteration stops when
    the structure repeats, the BIC changes by less than ``score_tolerance``, or
    after ``max_em_iterations``. ``result.trace`` holds the per-iteration BIC
    on the imputed data.
    """
    cfg = cfg or SemConfig()
    t0 = time.perf_counter()
    bic = Penalty.bic()
    dag = Dag.empty(data.nodes)
    if data.is_complete():
        res = tabu_search(data, cfg.tabu, bic, initial=dag)
        res.wall_time = time.perf_counter() - t0
        res.trace = [res.score]
        res.em_iterations = 1
        res.network = BayesianNetwork.fit(res.dag, data)
        return res
    bn = BayesianNetwork.fit(dag, data)
    calls = 0
    inner_iterations = 0
    trace = []
    converged = False
    imputed = data
    prev_score = None
    it = 0
    for it in range(1, cfg.max_em_iterations + 1):
        imputed = impute_dataset(bn, data, cfg.particles, cfg.seed)
        res = tabu_search(imputed, cfg.tabu, bic, initial=dag)
        calls += res.score_calls
        inner_iterations += res.iterations
        trace.append(res.score)
        bn = BayesianNetwork.fit(res.dag, imputed)
        same = res.dag == dag
        close = prev_score is not None and abs(res.score - prev_score) < cfg.score_tolerance
        dag, prev_score = res.dag, res.score
        if same or close:
            converged = True
            break
    return SearchResult(
        dag, trace[-1] if trace else -math.inf, calls, time.perf_counter() - t0,
        inner_iterations, converged=converged, trace=trace, em_iterations=it, network=bn,
    )
