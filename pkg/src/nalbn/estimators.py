"""scikit-learn style estimators wrapping the search and imputation routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data import Dataset, inject_mcar
from .graph import to_cpdag
from .model import BayesianNetwork
from .scoring import Penalty, spl_score
from .search import OrderSearchConfig, TabuConfig, exact_order_search, tabu_search
from .sem import SemConfig, impute_dataset, structural_em
from .types import Discrete, Gaussian

__all__ = [
    "check_dataset",
    "resolve_penalty",
    "NALStructureLearner",
    "StructuralEMLearner",
    "MCARInjector",
    "LikelihoodWeightingImputer",
]


def check_dataset(X, schema=None) -> Dataset:
    """Coerce ``X`` to a :class:`Dataset`.

    Accepts a Dataset, a pandas DataFrame (categorical/object columns become
    discrete, numeric ones Gaussian, NaN is missing) or a 2-D float array
    (all Gaussian). ``schema`` maps column names to node types and overrides
    inference.
    """
    if isinstance(X, Dataset):
        if schema is not None and dict(schema) != dict(X.types):
            raise ValueError("dataset types disagree with the supplied schema")
        return X
    try:
        import pandas as pd
    except ImportError:  # pragma: no cover
        pd = None
    if pd is not None and isinstance(X, pd.DataFrame):
        return _from_frame(X, schema)
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    names = tuple(schema) if schema is not None else tuple(f"X{j}" for j in range(arr.shape[1]))
    if len(names) != arr.shape[1]:
        raise ValueError("schema length does not match the number of columns")
    types = dict(schema) if schema is not None else {v: Gaussian() for v in names}
    return Dataset(names, types, arr, ~np.isnan(arr))


def _from_frame(df, schema) -> Dataset:
    import pandas as pd

    names = tuple(str(c) for c in df.columns)
    types = {}
    columns = {}
    for name, col in zip(names, df.columns):
        s = df[col]
        nt = schema[name] if schema is not None else None
        if nt is None:
            if isinstance(s.dtype, pd.CategoricalDtype):
                nt = Discrete(tuple(str(c) for c in s.cat.categories))
            elif pd.api.types.is_numeric_dtype(s):
                nt = Gaussian()
            else:
                nt = Discrete(tuple(sorted({str(v) for v in s.dropna()})))
        types[name] = nt
        if isinstance(nt, Discrete):
            columns[name] = [None if pd.isna(v) else str(v) for v in s]
        else:
            columns[name] = s.astype(float).tolist()
    return Dataset.from_columns(types, columns, nodes=names)


def resolve_penalty(penalty, n_nodes) -> Penalty:
    if isinstance(penalty, Penalty):
        return penalty
    return Penalty.parse(str(penalty), n_nodes)


class NALStructureLearner(BaseEstimator):
    """Learn a DAG by maximising the penalised node-average likelihood.

    Parameters
    ----------
    algorithm : {"tabu", "order-exact"}
    penalty : str or Penalty
        ``"bic"``, ``"aic"`` or ``"alpha:<value>"``.
    ordering : sequence of node names, required for ``"order-exact"``.
    max_parents : int, parent-set cap for ``"order-exact"``.

    Attributes
    ----------
    dag_, network_, score_, score_calls_, result_
    """

    def __init__(
        self,
        algorithm="tabu",
        penalty="bic",
        ordering=None,
        max_parents=2,
        tabu_list_length=10,
        max_iterations=None,
        max_non_improving=15,
        seed=0,
        schema=None,
    ):
        self.algorithm = algorithm
        self.penalty = penalty
        self.ordering = ordering
        self.max_parents = max_parents
        self.tabu_list_length = tabu_list_length
        self.max_iterations = max_iterations
        self.max_non_improving = max_non_improving
        self.seed = seed
        self.schema = schema

    def _tabu_config(self):
        return TabuConfig(
            self.tabu_list_length, self.max_iterations, self.max_non_improving, self.seed
        )

    def fit(self, X, y=None):
        data = check_dataset(X, self.schema)
        penalty = resolve_penalty(self.penalty, len(data.nodes))
        if self.algorithm == "order-exact":
            if self.ordering is None:
                raise ValueError("order-exact search needs an ordering")
            result = exact_order_search(data, OrderSearchConfig(self.ordering, self.max_parents), penalty)
        elif self.algorithm == "tabu":
            result = tabu_search(data, self._tabu_config(), penalty)
        else:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        self.penalty_ = penalty
        self.result_ = result
        self.dag_ = result.dag
        self.score_ = result.score
        self.score_calls_ = result.score_calls
        self.network_ = BayesianNetwork.fit(result.dag, data)
        self.feature_names_in_ = np.array(data.nodes, dtype=object)
        self.n_features_in_ = len(data.nodes)
        return self

    def score(self, X, y=None):
        """Penalised NAL of the learned DAG on ``X``."""
        check_is_fitted(self, "dag_")
        data = check_dataset(X, self.schema)
        return spl_score(data, self.dag_, self.penalty_)

    def cpdag(self):
        check_is_fitted(self, "dag_")
        return to_cpdag(self.dag_)


class StructuralEMLearner(BaseEstimator):
    """Structural EM with likelihood-weighted imputation and a BIC tabu M-step."""

    def __init__(
        self,
        particles=500,
        max_em_iterations=20,
        score_tolerance=1e-6,
        tabu_list_length=10,
        max_iterations=None,
        max_non_improving=15,
        seed=0,
        schema=None,
    ):
        self.particles = particles
        self.max_em_iterations = max_em_iterations
        self.score_tolerance = score_tolerance
        self.tabu_list_length = tabu_list_length
        self.max_iterations = max_iterations
        self.max_non_improving = max_non_improving
        self.seed = seed
        self.schema = schema

    def fit(self, X, y=None):
        data = check_dataset(X, self.schema)
        cfg = SemConfig(
            self.particles,
            self.max_em_iterations,
            self.score_tolerance,
            TabuConfig(self.tabu_list_length, self.max_iterations, self.max_non_improving, self.seed),
            self.seed,
        )
        result = structural_em(data, cfg)
        self.result_ = result
        self.dag_ = result.dag
        self.network_ = result.network
        self.score_ = result.score
        self.score_calls_ = result.score_calls
        self.em_iterations_ = result.em_iterations
        self.n_features_in_ = len(data.nodes)
        return self

    def transform(self, X):
        """Impute ``X`` with the fitted network."""
        check_is_fitted(self, "network_")
        return impute_dataset(self.network_, check_dataset(X, self.schema), self.particles, self.seed)


class MCARInjector(TransformerMixin, BaseEstimator):
    def __init__(self, beta=0.1, seed=None):
        self.beta = beta
        self.seed = seed

    def fit(self, X, y=None):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        return self

    def transform(self, X):
        return inject_mcar(check_dataset(X), self.beta, self.seed)


class LikelihoodWeightingImputer(TransformerMixin, BaseEstimator):
    """Impute missing cells from a given network, or one learned by NAL on fit."""

    def __init__(self, network=None, penalty="bic", particles=500, seed=0):
        self.network = network
        self.penalty = penalty
        self.particles = particles
        self.seed = seed

    def fit(self, X, y=None):
        if self.network is not None:
            self.network_ = self.network
        else:
            self.network_ = NALStructureLearner(penalty=self.penalty, seed=self.seed).fit(X).network_
        return self

    def transform(self, X):
        check_is_fitted(self, "network_")
        return impute_dataset(self.network_, check_dataset(X), self.particles, self.seed)
