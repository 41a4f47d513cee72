"""Finitely supported multi-indices over the coordinates 1, 2, 3, ..."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import BadParams


@dataclass(frozen=True)
class MultiIndex:
    """Sparse multi-index: sorted ``(coordinate, value)`` pairs, values > 0.

    Coordinates start at 1.  The zero multi-index has no entries.
    """

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = 0
        for i, v in self.entries:
            if i <= prev:
                raise BadParams(f"coordinates must be strictly increasing and >= 1: {self.entries}")
            if v <= 0:
                raise BadParams(f"stored entries must be positive: {self.entries}")
            prev = i

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls()

    @classmethod
    def unit(cls, i: int, k: int = 1) -> "MultiIndex":
        return cls(((i, k),)) if k else cls()

    @classmethod
    def from_dict(cls, d: Mapping[int, int]) -> "MultiIndex":
        return cls(tuple(sorted((int(i), int(v)) for i, v in d.items() if v)))

    @classmethod
    def from_dense(cls, nu: Sequence[int]) -> "MultiIndex":
        return cls(tuple((i, int(v)) for i, v in enumerate(nu, start=1) if v))

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        """Parse ``"i:g_i,j:g_j"``; ``""`` and ``"0"`` denote the zero index."""
        text = text.strip()
        if text in ("", "0"):
            return cls()
        d: dict[int, int] = {}
        try:
            for part in text.split(","):
                i, v = part.split(":")
                d[int(i)] = d.get(int(i), 0) + int(v)
        except ValueError as exc:
            raise BadParams(f"cannot parse multi-index {text!r}") from exc
        if any(v < 0 for v in d.values()):
            raise BadParams(f"negative entry in multi-index {text!r}")
        return cls.from_dict(d)

    def __str__(self) -> str:
        if not self.entries:
            return "0"
        return ",".join(f"{i}:{v}" for i, v in self.entries)

    def __repr__(self) -> str:
        return f"MultiIndex({str(self)!r})"

    def __getitem__(self, i: int) -> int:
        for j, v in self.entries:
            if j == i:
                return v
        return 0

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        d = dict(self.entries)
        for i, v in other.entries:
            d[i] = d.get(i, 0) + v
        return MultiIndex.from_dict(d)

    def __le__(self, other: "MultiIndex") -> bool:
        """Componentwise order."""
        return all(v <= other[i] for i, v in self.entries)

    @property
    def degree(self) -> int:
        return sum(v for _, v in self.entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def max_support(self) -> int:
        """Largest coordinate in the support (0 for the zero index)."""
        return self.entries[-1][0] if self.entries else 0

    def to_dense(self, d: int) -> tuple[int, ...]:
        if self.max_support > d:
            raise BadParams(f"{self} does not fit into {d} coordinates")
        out = [0] * d
        for i, v in self.entries:
            out[i - 1] = v
        return tuple(out)

    def decrements(self) -> Iterable["MultiIndex"]:
        """All indices obtained by removing one unit from one coordinate."""
        for k, (i, v) in enumerate(self.entries):
            if v > 1:
                yield MultiIndex(self.entries[:k] + ((i, v - 1),) + self.entries[k + 1:])
            else:
                yield MultiIndex(self.entries[:k] + self.entries[k + 1:])

    def sort_key(self) -> tuple:
        """Deterministic tie order: total degree, then the sparse entries."""
        return (self.degree, self.entries)
