"""Bayesian network structure learning from incomplete data with the node-average likelihood."""

from .data import Dataset, inject_mcar, locally_complete_rows, read_csv, write_csv
from .graph import Cpdag, CycleError, Dag, mutate, scaled_shd, shd, to_cpdag, topological_order
from .model import BayesianNetwork, dim_theta, dim_theta_total, forward_sample
from .networks import cg8, discrete8, gaussian8, load_network
from .scoring import Penalty, ScoredSearchState, lambda_value, nal_node, spl_score
from .search import OrderSearchConfig, TabuConfig, exact_order_search, exhaustive_search, tabu_search
from .sem import SemConfig, impute_dataset, impute_row, structural_em
from .types import Discrete, Gaussian

__version__ = "0.1.0"

__all__ = [
    "BayesianNetwork", "Cpdag", "CycleError", "Dag", "Dataset", "Discrete", "Gaussian",
    "OrderSearchConfig", "Penalty", "ScoredSearchState", "SemConfig", "TabuConfig",
    "cg8", "dim_theta", "dim_theta_total", "discrete8", "exact_order_search",
    "exhaustive_search", "forward_sample", "gaussian8", "impute_dataset", "impute_row",
    "inject_mcar", "lambda_value", "load_network", "locally_complete_rows", "mutate",
    "nal_node", "read_csv", "scaled_shd", "shd", "spl_score", "structural_em",
    "tabu_search", "to_cpdag", "topological_order", "write_csv",
]
