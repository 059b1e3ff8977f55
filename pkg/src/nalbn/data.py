"""Typed datasets with an explicit observedness mask."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .types import Discrete, Gaussian, NodeType

__all__ = [
    "DataError",
    "Dataset",
    "read_csv",
    "write_csv",
    "inject_mcar",
    "locally_complete_rows",
    "row_completion_view",
]


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-typed table.

    ``values`` is an (n, N) float array; discrete columns hold level codes.
    ``mask`` is True where a cell is observed. Masked cells are NaN and carry
    no meaning.
    """

    nodes: tuple
    types: Mapping[str, NodeType]
    values: np.ndarray
    mask: np.ndarray
    _index: dict = field(init=False, repr=False)
    _codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        values = np.array(self.values, dtype=float, copy=True).reshape(-1, len(nodes))
        mask = np.array(self.mask, dtype=bool, copy=True).reshape(values.shape)
        if set(self.types) != set(nodes):
            raise DataError("types must declare exactly the dataset's columns")
        values[~mask] = np.nan
        if np.isnan(values[mask]).any():
            raise DataError("observed cells must not be NaN")
        codes = np.zeros(values.shape, dtype=np.intp)
        for j, v in enumerate(nodes):
            nt = self.types[v]
            if isinstance(nt, Discrete):
                col = values[mask[:, j], j]
                if col.size and (
                    (col != np.round(col)).any() or col.min() < 0 or col.max() >= nt.n_levels
                ):
                    raise DataError(f"column {v} holds codes outside its level set")
                codes[mask[:, j], j] = col.astype(np.intp)
        values.setflags(write=False)
        mask.setflags(write=False)
        codes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "types", dict(self.types))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(nodes)})
        object.__setattr__(self, "_codes", codes)

    @classmethod
    def from_columns(cls, types: Mapping[str, NodeType], columns: Mapping[str, Sequence], nodes=None):
        """Build from per-column values; ``None``/NaN marks a missing cell.

        Discrete columns may hold level labels or integer codes.
        """
        nodes = tuple(nodes if nodes is not None else types)
        n = len(next(iter(columns.values()))) if columns else 0
        values = np.full((n, len(nodes)), np.nan)
        for j, v in enumerate(nodes):
            nt = types[v]
            for i, x in enumerate(columns[v]):
                if x is None or (isinstance(x, float) and np.isnan(x)):
                    continue
                if isinstance(nt, Discrete) and not isinstance(x, (int, np.integer)):
                    x = nt.code(x)
                values[i, j] = float(x)
        return cls(nodes, types, values, ~np.isnan(values))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def index(self, node) -> int:
        return self._index[node]

    def column(self, node) -> np.ndarray:
        return self.values[:, self._index[node]]

    def codes(self, node) -> np.ndarray:
        """Integer codes of a discrete column (0 where masked)."""
        return self._codes[:, self._index[node]]

    def observed(self, node) -> np.ndarray:
        return self.mask[:, self._index[node]]

    def is_complete(self) -> bool:
        return bool(self.mask.all())

    def missing_fraction(self) -> float:
        return float(1.0 - self.mask.mean()) if self.mask.size else 0.0

    def with_values(self, values, mask=None) -> "Dataset":
        return Dataset(self.nodes, self.types, values, self.mask if mask is None else mask)

    def label(self, node, code):
        nt = self.types[node]
        return nt.levels[int(code)] if isinstance(nt, Discrete) else float(code)

    def to_frame(self):
        """pandas DataFrame with categorical discrete columns and NaN for missing."""
        import pandas as pd

        out = {}
        for j, v in enumerate(self.nodes):
            nt = self.types[v]
            if isinstance(nt, Discrete):
                codes = np.where(self.mask[:, j], self._codes[:, j], -1)
                out[v] = pd.Categorical.from_codes(codes, categories=list(nt.levels))
            else:
                out[v] = self.values[:, j].copy()
        return pd.DataFrame(out, columns=list(self.nodes))

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.nodes == other.nodes
            and self.types == other.types
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def __repr__(self):
        return (
            f"Dataset(n_rows={self.n_rows}, nodes={list(self.nodes)}, "
            f"missing={self.missing_fraction():.3f})"
        )


def _schema_types(schema) -> dict:
    if hasattr(schema, "node_types"):
        return dict(schema.node_types)
    return dict(schema)


def read_csv(path, schema, na_token="NA") -> Dataset:
    """Read a CSV whose header names exactly the schema's nodes."""
    types = _schema_types(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if sorted(header) != sorted(types) or len(header) != len(set(header)):
            raise DataError(f"{path}: header {header} does not match schema {list(types)}")
        rows = list(reader)
    values = np.full((len(rows), len(header)), np.nan)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: line {i + 2} has {len(row)} fields, expected {len(header)}")
        for j, (name, cell) in enumerate(zip(header, row)):
            cell = cell.strip()
            if cell == na_token:
                continue
            nt = types[name]
            if isinstance(nt, Discrete):
                try:
                    values[i, j] = nt.code(cell)
                except ValueError as exc:
                    raise DataError(f"{path}: line {i + 2}, column {name}: {exc}") from None
            else:
                try:
                    values[i, j] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: line {i + 2}, column {name}: cannot parse {cell!r} as a real"
                    ) from None
    return Dataset(tuple(header), types, values, ~np.isnan(values))


def write_csv(data: Dataset, path, na_token="NA") -> None:
    """Write ``data`` to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(data, path, na_token)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(data, fh, na_token)


def _write_rows(data, fh, na_token):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(data.nodes)
    kinds = [isinstance(data.types[v], Discrete) for v in data.nodes]
    levels = [data.types[v].levels if k else None for v, k in zip(data.nodes, kinds)]
    for i in range(data.n_rows):
        row = []
        for j in range(len(data.nodes)):
            if not data.mask[i, j]:
                row.append(na_token)
            elif kinds[j]:
                row.append(levels[j][data._codes[i, j]])
            else:
                row.append(repr(float(data.values[i, j])))
        writer.writerow(row)


def infer_schema(path, na_token="NA") -> dict:
    """Guess node types from a CSV: all-numeric columns are Gaussian.

    Discrete levels come out sorted, so unobserved levels are lost; prefer an
    explicit schema.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cells = [set() for _ in header]
        for row in reader:
            for j, cell in enumerate(row):
                cell = cell.strip()
                if cell != na_token:
                    cells[j].add(cell)
    types = {}
    for name, seen in zip(header, cells):
        try:
            [float(c) for c in seen]
            numeric = bool(seen)
        except ValueError:
            numeric = False
        if numeric and len(seen) > 2:
            types[name] = Gaussian()
        else:
            levels = sorted(seen) if len(seen) >= 2 else sorted(seen | {"_unseen"})
            types[name] = Discrete(tuple(levels))
    return types


def inject_mcar(data: Dataset, beta: float, seed=None) -> Dataset:
    """Mask each cell independently with probability ``beta``.

    Cells that are already missing stay missing.
    """
    if not 0.0 <= beta <= 1.0:
        raise DataError(f"beta must lie in [0, 1], got {beta}")
    rng = np.random.default_rng(seed)
    drop = rng.random(data.shape) < beta
    return data.with_values(data.values, data.mask & ~drop)


def locally_complete_rows(data: Dataset, node, parents=()) -> np.ndarray:
    """Indices of rows where ``node`` and every parent are observed."""
    cols = [data.index(node)] + [data.index(p) for p in parents]
    return np.flatnonzero(data.mask[:, cols].all(axis=1))


def row_completion_view(data: Dataset, row: int, bn=None) -> dict:
    """Observed cells of one row as evidence (codes for discrete nodes)."""
    evidence = {}
    for j, v in enumerate(data.nodes):
        if data.mask[row, j]:
            if isinstance(data.types[v], Discrete):
                evidence[v] = int(data._codes[row, j])
            else:
                evidence[v] = float(data.values[row, j])
    return evidence
