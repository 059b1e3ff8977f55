"""Simulation harness: sample, inject MCAR, learn, compare against the truth."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .data import DataError, inject_mcar
from .graph import scaled_shd, shd, to_cpdag, topological_order
from .networks import load_network
from .scoring import Penalty
from .search import OrderSearchConfig, TabuConfig, exact_order_search, tabu_search
from .sem import SemConfig, structural_em

__all__ = ["RESULT_COLUMNS", "ExperimentConfig", "run_experiment", "run_cell", "summarize"]

log = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "network", "algorithm", "penalty", "k", "n", "beta", "replicate", "shd",
    "scaled_shd", "score_calls", "wall_time_ms", "learned_arcs", "em_iterations",
]
_KEY = ("network", "algorithm", "penalty", "k", "beta", "replicate")
ALGORITHMS = ("order-exact", "tabu", "sem")


@dataclass
class ExperimentConfig:
    network: str = "discrete8"
    replicates: int = 20
    k_grid: list = field(default_factory=lambda: [10, 50, 250])
    beta_grid: list = field(default_factory=lambda: [0.0, 0.1, 0.2])
    penalties: list = field(default_factory=lambda: ["alpha:0.1", "alpha:0.25", "alpha:0.6", "bic", "aic"])
    algorithms: list = field(default_factory=lambda: ["order-exact", "tabu"])
    max_parents: int = 2
    seed: int = 0
    output: str = "results.csv"
    particles: int = 500
    timing: bool = True

    def __post_init__(self):
        if not self.k_grid or not self.beta_grid or not self.penalties or not self.algorithms:
            raise ValueError("grids must be non-empty")
        if any(k < 1 for k in self.k_grid):
            raise ValueError("relative sample sizes must be >= 1")
        if any(not 0.0 <= b <= 1.0 for b in self.beta_grid):
            raise ValueError("missing proportions must lie in [0, 1]")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms {bad}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    @classmethod
    def from_dict(cls, spec: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(spec) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**spec)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


def _network_label(name) -> str:
    return os.path.splitext(os.path.basename(str(name)))[0]


def _cell_seeds(base, k, beta, replicate):
    ss = np.random.SeedSequence([int(base), int(k), int(round(beta * 1_000_000)), int(replicate)])
    sample_ss, mcar_ss, algo_ss = ss.spawn(3)
    return sample_ss, mcar_ss, int(algo_ss.generate_state(1)[0])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def run_cell(truth, data, algorithm, penalty_label, cfg: ExperimentConfig, algo_seed):
    """Learn one DAG and return its measurables."""
    n_nodes = len(truth.nodes)
    if algorithm == "order-exact":
        res = exact_order_search(
            data, OrderSearchConfig(topological_order(truth.dag), cfg.max_parents),
            Penalty.parse(penalty_label, n_nodes),
        )
    elif algorithm == "tabu":
        res = tabu_search(data, TabuConfig(seed=algo_seed), Penalty.parse(penalty_label, n_nodes))
    elif algorithm == "sem":
        res = structural_em(data, SemConfig(particles=cfg.particles, tabu=TabuConfig(seed=algo_seed), seed=algo_seed))
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    truth_cpdag = to_cpdag(truth.dag)
    learned = to_cpdag(res.dag)
    n_true = len(truth.dag.arcs)
    return {
        "shd": shd(learned, truth_cpdag),
        "scaled_shd": scaled_shd(learned, truth_cpdag, n_true),
        "score_calls": res.score_calls,
        "wall_time_ms": round(res.wall_time * 1000.0, 3) if cfg.timing else 0.0,
        "learned_arcs": len(res.dag.arcs),
        "em_iterations": res.em_iterations,
    }


def _completed(path) -> set:
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise DataError(f"{path}: existing file does not have the results header")
        return {tuple(r[c] for c in _KEY) for r in reader}


def run_experiment(cfg: ExperimentConfig):
    """Run the full grid, appending rows to ``cfg.output``; returns the results table.

    Rows already present in the output are skipped, so an interrupted run
    resumes where it stopped. Failures are written with empty measurables and
    described in ``<output>.errors.csv``.
    """
    import pandas as pd

    truth = load_network(cfg.network)
    label = _network_label(cfg.network)
    dim0 = truth.dim()
    done = _completed(cfg.output)
    new_file = not done and (not os.path.exists(cfg.output) or os.path.getsize(cfg.output) == 0)
    tasks = [(a, p) for a in cfg.algorithms for p in (["bic"] if a == "sem" else cfg.penalties)]
    with open(cfg.output, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new_file:
            writer.writerow(RESULT_COLUMNS)
            fh.flush()
        for k in cfg.k_grid:
            n = int(k) * dim0
            for beta in cfg.beta_grid:
                for rep in range(cfg.replicates):
                    key_base = (label, None, None, _fmt(k), _fmt(float(beta)), _fmt(rep))
                    todo = [
                        (a, p) for a, p in tasks
                        if (label, a, p, key_base[3], key_base[4], key_base[5]) not in done
                    ]
                    if not todo:
                        continue
                    sample_ss, mcar_ss, algo_seed = _cell_seeds(cfg.seed, k, beta, rep)
                    data = inject_mcar(truth.sample(n, seed=sample_ss), float(beta), seed=mcar_ss)
                    for algorithm, pen in todo:
                        row = {"network": label, "algorithm": algorithm, "penalty": pen, "k": k,
                               "n": n, "beta": float(beta), "replicate": rep}
                        try:
                            row.update(run_cell(truth, data, algorithm, pen, cfg, algo_seed))
                        except Exception as exc:  # recorded, run continues
                            log.warning("cell %s failed: %s", row, exc)
                            _log_error(cfg.output, row, exc)
                        writer.writerow([_fmt(row.get(c)) for c in RESULT_COLUMNS])
                        fh.flush()
    return pd.read_csv(cfg.output)


def _log_error(output, row, exc):
    path = output + ".errors.csv"
    fresh = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(list(_KEY) + ["error"])
        w.writerow([_fmt(row.get(c)) for c in _KEY] + [f"{type(exc).__name__}: {exc}"])


_GROUP = ["network", "algorithm", "penalty", "k", "beta"]


def summarize(results):
    """Aggregate a results table per (network, algorithm, penalty, k, beta).

    Non-SEM rows gain ``*_ratio_vs_sem`` columns when SEM rows exist for the
    same (network, k, beta); a 0/0 SHD ratio counts as equal performance (1.0).
    """
    import pandas as pd

    df = pd.read_csv(results) if isinstance(results, (str, os.PathLike)) else results.copy()
    missing = [c for c in RESULT_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"results table lacks columns {missing}")
    df = df.dropna(subset=["shd"])
    agg = (
        df.groupby(_GROUP, sort=True)
        .agg(
            replicates=("replicate", "count"),
            mean_shd=("shd", "mean"),
            mean_scaled_shd=("scaled_shd", "mean"),
            median_scaled_shd=("scaled_shd", "median"),
            mean_score_calls=("score_calls", "mean"),
            mean_wall_time_ms=("wall_time_ms", "mean"),
            mean_learned_arcs=("learned_arcs", "mean"),
        )
        .reset_index()
    )
    sem = agg[agg["algorithm"] == "sem"].set_index(["network", "k", "beta"])
    for col, src in (("shd_ratio_vs_sem", "mean_scaled_shd"),
                     ("calls_ratio_vs_sem", "mean_score_calls"),
                     ("time_ratio_vs_sem", "mean_wall_time_ms")):
        vals = []
        for _, r in agg.iterrows():
            key = (r["network"], r["k"], r["beta"])
            if r["algorithm"] == "sem" or key not in sem.index:
                vals.append(np.nan)
                continue
            num, den = float(r[src]), float(sem.loc[key, src])
            if den == 0.0:
                vals.append(1.0 if num == 0.0 else np.inf)
            else:
                vals.append(num / den)
        agg[col] = vals
    return agg
