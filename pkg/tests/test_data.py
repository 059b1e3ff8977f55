import numpy as np
import pytest

from nalbn import Dataset, Discrete, Gaussian, discrete8, cg8
from nalbn.data import (
    DataError, infer_schema, inject_mcar, locally_complete_rows, read_csv, row_completion_view,
    write_csv,
)

AB = Discrete(("a", "b"))


def test_read_csv_na_cell(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,X\na,1.5\nNA,2.0\nb,NA\n")
    d = read_csv(p, {"A": AB, "X": Gaussian()})
    assert d.mask.tolist() == [[True, True], [False, True], [True, False]]
    assert d.codes("A")[2] == 1
    assert d.column("X")[1] == 2.0


def test_read_csv_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,Y\na,1\n")
    with pytest.raises(DataError):
        read_csv(p, {"A": AB, "X": Gaussian()})
    p.write_text("A,X\nc,1\n")
    with pytest.raises(DataError):
        read_csv(p, {"A": AB, "X": Gaussian()})
    p.write_text("A,X\na,one\n")
    with pytest.raises(DataError):
        read_csv(p, {"A": AB, "X": Gaussian()})
    p.write_text("A,X\na\n")
    with pytest.raises(DataError):
        read_csv(p, {"A": AB, "X": Gaussian()})


@pytest.mark.parametrize("make", [discrete8, cg8])
def test_csv_round_trip_with_missing(make, tmp_path):
    bn = make()
    d = inject_mcar(bn.sample(300, seed=5), 0.3, seed=6)
    p = tmp_path / "d.csv"
    write_csv(d, p)
    assert read_csv(p, bn) == d


def test_infer_schema(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("A,X\nu,0.1\nv,2.5\nNA,3.0\n")
    types = infer_schema(p)
    assert types["A"] == Discrete(("u", "v"))
    assert types["X"] == Gaussian()


def test_mcar_examples():
    d = discrete8().sample(500, seed=1)
    assert inject_mcar(d, 0.0, seed=2) == d
    assert not inject_mcar(d, 1.0, seed=2).mask.any()
    with pytest.raises(DataError):
        inject_mcar(d, 1.5)


def test_mcar_fraction_and_reproducibility():
    rng = np.random.default_rng(0)
    values = rng.normal(size=(10000, 10))
    d = Dataset(tuple(f"X{j}" for j in range(10)), {f"X{j}": Gaussian() for j in range(10)},
                values, np.ones(values.shape, bool))
    m = inject_mcar(d, 0.2, seed=9)
    assert abs(m.missing_fraction() - 0.2) <= 0.012
    assert inject_mcar(d, 0.2, seed=9) == m
    assert inject_mcar(d, 0.2, seed=10) != m


def test_mcar_keeps_existing_missingness():
    d = inject_mcar(discrete8().sample(200, seed=1), 0.3, seed=1)
    m = inject_mcar(d, 0.3, seed=2)
    assert not (m.mask & ~d.mask).any()


def test_locally_complete_rows_examples():
    d = Dataset.from_columns(
        {"A": AB, "B": AB, "C": AB},
        {"A": ["a", None, "b", "a"], "B": ["a", "b", "b", None], "C": [None, "a", "a", "b"]},
    )
    np.testing.assert_array_equal(locally_complete_rows(d, "B", ["A"]), [0, 2])
    full = discrete8().sample(20, seed=0)
    np.testing.assert_array_equal(locally_complete_rows(full, "D", ["B", "C"]), np.arange(20))


def test_locally_complete_subset_fraction():
    d = inject_mcar(discrete8().sample(10000, seed=3), 0.5, seed=4)
    frac = locally_complete_rows(d, "C", ["A"]).size / d.n_rows
    assert abs(frac - 0.25) <= 0.015


def test_locally_complete_subset_shrinks_with_parents():
    d = inject_mcar(discrete8().sample(500, seed=3), 0.2, seed=4)
    small = set(locally_complete_rows(d, "D", ["B"]))
    big = set(locally_complete_rows(d, "D", ["B", "C"]))
    assert big <= small


def test_row_completion_view():
    d = Dataset.from_columns(
        {"A": AB, "X": Gaussian(), "Y": Gaussian()},
        {"A": ["b", None, None], "X": [1.0, None, 2.0], "Y": [0.5, None, 3.0]},
    )
    assert row_completion_view(d, 0) == {"A": 1, "X": 1.0, "Y": 0.5}
    assert row_completion_view(d, 1) == {}
    assert row_completion_view(d, 2) == {"X": 2.0, "Y": 3.0}


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(("A",), {"A": AB}, np.array([[2.0]]), np.array([[True]]))
    with pytest.raises(DataError):
        Dataset(("A",), {"B": AB}, np.array([[0.0]]), np.array([[True]]))
    d = Dataset(("A",), {"A": AB}, np.array([[1.0]]), np.array([[True]]))
    with pytest.raises(ValueError):
        d.values[0, 0] = 0.0


def test_to_frame():
    d = inject_mcar(cg8().sample(50, seed=1), 0.2, seed=1)
    df = d.to_frame()
    assert list(df.columns) == list(d.nodes)
    assert df.isna().to_numpy().tolist() == (~d.mask).tolist()
