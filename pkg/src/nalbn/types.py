"""Node type declarations shared by datasets and models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

__all__ = ["Discrete", "Gaussian", "NodeType", "node_type_from_dict", "node_type_to_dict"]


@dataclass(frozen=True)
class Discrete:
    levels: tuple

    def __post_init__(self):
        levels = tuple(str(v) for v in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 2:
            raise ValueError("a discrete node needs at least 2 levels")
        if len(set(levels)) != len(levels):
            raise ValueError(f"duplicate level labels in {levels}")

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def code(self, label) -> int:
        try:
            return self.levels.index(str(label))
        except ValueError:
            raise ValueError(f"unknown level {label!r}; expected one of {self.levels}") from None


@dataclass(frozen=True)
class Gaussian:
    pass


NodeType = Union[Discrete, Gaussian]


def node_type_from_dict(spec: dict) -> NodeType:
    kind = spec.get("type")
    if kind == "discrete":
        return Discrete(tuple(spec["levels"]))
    if kind == "gaussian":
        return Gaussian()
    raise ValueError(f"unknown node type {kind!r}")


def node_type_to_dict(name: str, nt: NodeType) -> dict:
    if isinstance(nt, Discrete):
        return {"name": name, "type": "discrete", "levels": list(nt.levels)}
    return {"name": name, "type": "gaussian"}
