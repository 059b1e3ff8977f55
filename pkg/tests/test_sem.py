import numpy as np
import pytest

from nalbn import BayesianNetwork, Dag, Discrete, cg8, discrete8
from nalbn.data import inject_mcar
from nalbn.graph import shd, to_cpdag
from nalbn.model import Cpt
from nalbn.scoring import Penalty
from nalbn.search import TabuConfig, tabu_search
from nalbn.sem import DegenerateEvidenceError, SemConfig, impute_dataset, impute_row, structural_em

from nets import binary_chain, gaussian_pair, lw_conditional_mean_oracle


def test_complete_row_is_returned_unchanged():
    bn = discrete8()
    row = bn.sample(1, seed=3).values[0]
    out = impute_row(bn, row, np.ones(len(row), bool), particles=10, seed=0)
    np.testing.assert_array_equal(out, row)


def test_single_node_mode():
    bn = BayesianNetwork(Dag(["A"]), {"A": Discrete(("x", "y"))},
                         {"A": Cpt("A", (), (), np.array([[0.9, 0.1]]))})
    agree = sum(impute_row(bn, [np.nan], [False], particles=500, seed=s)[0] == 0 for s in range(20))
    assert agree >= 19


def test_gaussian_conditional_mean():
    params = dict(mu_x=1.0, var_x=2.0, b0=0.5, b1=1.5, var_y=0.5)
    bn = gaussian_pair(**params)
    y = 4.0
    exact, se = lw_conditional_mean_oracle(**params, y=y, particles=2000)
    est = impute_row(bn, [np.nan, y], [False, True], particles=2000, seed=1)[0]
    assert abs(est - exact) <= 3 * se


def test_impute_dataset_completes_and_preserves_observed():
    bn = cg8()
    data = inject_mcar(bn.sample(600, seed=1), 0.2, seed=2)
    out = impute_dataset(bn, data, particles=50, seed=3)
    assert out.is_complete()
    np.testing.assert_array_equal(out.values[data.mask], data.values[data.mask])
    assert impute_dataset(bn, data, particles=50, seed=3) == out


def test_impute_row_matches_dataset_stream():
    bn = discrete8()
    data = inject_mcar(bn.sample(20, seed=1), 0.3, seed=2)
    out = impute_dataset(bn, data, particles=40, seed=5)
    for r in range(data.n_rows):
        row = impute_row(bn, data.values[r], data.mask[r], particles=40, seed=5, row=r)
        np.testing.assert_array_equal(row, out.values[r])


def test_impossible_evidence_raises():
    types = {"A": Discrete(("x", "y")), "B": Discrete(("x", "y"))}
    bn = BayesianNetwork(Dag(["A", "B"], [("A", "B")]), types, {
        "A": Cpt("A", (), (), np.array([[0.5, 0.5]])),
        "B": Cpt("B", ("A",), (2,), np.array([[1.0, 0.0], [1.0, 0.0]])),
    })
    with pytest.raises(DegenerateEvidenceError):
        impute_row(bn, [np.nan, 1.0], [False, True], particles=20)


def test_sem_on_complete_data_is_one_tabu_run():
    data = discrete8().sample(1500, seed=4)
    sem = structural_em(data, SemConfig(particles=10))
    tabu = tabu_search(data, TabuConfig(), Penalty.bic())
    assert sem.dag == tabu.dag
    assert sem.score_calls == tabu.score_calls
    assert sem.em_iterations == 1


def test_sem_chain_sanity():
    truth = binary_chain(4)
    target = to_cpdag(truth.dag)
    empty = shd(to_cpdag(Dag.empty(truth.nodes)), target)
    good = 0
    for s in range(20):
        data = inject_mcar(truth.sample(5000, seed=s), 0.1, seed=100 + s)
        res = structural_em(data, SemConfig(particles=100, seed=s))
        good += shd(to_cpdag(res.dag), target) <= empty
        assert 1 <= res.em_iterations <= 20
        assert len(res.trace) == res.em_iterations
    assert good >= 19


def test_sem_calls_at_least_one_tabu_run():
    data = inject_mcar(discrete8().sample(1000, seed=6), 0.1, seed=7)
    sem = structural_em(data, SemConfig(particles=50))
    imputed_once = tabu_search(impute_dataset(BayesianNetwork.fit(Dag.empty(data.nodes), data), data, 50, 0),
                               TabuConfig(), Penalty.bic())
    assert sem.score_calls >= imputed_once.score_calls
    assert sem.network is not None and sem.network.dag == sem.dag


def test_sem_config_validation():
    with pytest.raises(ValueError):
        SemConfig(particles=0)
    with pytest.raises(ValueError):
        SemConfig(score_tolerance=-1.0)
