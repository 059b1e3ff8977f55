import numpy as np
import pytest

from nalbn import Dataset
from nalbn.types import Discrete, Gaussian

_ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail=""):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
    if detail:
        line += f" ({detail})"
    _ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


def binary_types(names):
    return {v: Discrete(("0", "1")) for v in names}


def random_discrete_data(rng, n_rows, n_nodes=4, max_levels=3, names=None):
    names = names or [f"V{i}" for i in range(n_nodes)]
    types = {v: Discrete(tuple(str(k) for k in range(rng.integers(2, max_levels + 1)))) for v in names}
    # correlated columns so that parent sets matter
    values = np.empty((n_rows, len(names)))
    for j, v in enumerate(names):
        k = types[v].n_levels
        base = rng.integers(0, k, n_rows)
        if j and rng.random() < 0.7:
            prev = values[:, rng.integers(0, j)].astype(int) % k
            copy = rng.random(n_rows) < 0.6
            base = np.where(copy, prev, base)
        values[:, j] = base
    return Dataset(tuple(names), types, values, np.ones(values.shape, bool))


def random_gaussian_data(rng, n_rows, n_nodes=4, names=None):
    names = names or [f"X{i}" for i in range(n_nodes)]
    values = np.empty((n_rows, len(names)))
    for j in range(len(names)):
        values[:, j] = rng.normal(size=n_rows)
        for i in range(j):
            if rng.random() < 0.5:
                values[:, j] += rng.normal(scale=1.0) * values[:, i]
    return Dataset(tuple(names), {v: Gaussian() for v in names}, values, np.ones(values.shape, bool))
