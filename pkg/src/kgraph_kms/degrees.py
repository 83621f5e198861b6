"""Degree vectors in N^k with the componentwise lattice operations."""

from __future__ import annotations

from typing import Iterable, Iterator


class Degree:
    """An element of N^k. Immutable, hashable, with componentwise arithmetic.

    The partial order is componentwise: ``m <= n`` iff ``m_i <= n_i`` for all i.
    ``meet`` and ``join`` are the componentwise min and max.
    """

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Iterable[int]):
        ent = tuple(int(e) for e in entries)
        if any(e < 0 for e in ent):
            raise ValueError(f"degree entries must be non-negative, got {ent}")
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "_hash", hash(ent))

    def __setattr__(self, name, value):
        raise AttributeError("Degree is immutable")

    @staticmethod
    def zero(k: int) -> "Degree":
        return Degree((0,) * k)

    @staticmethod
    def unit(k: int, i: int) -> "Degree":
        """The generator e_i (colors are 1-based)."""
        if not 1 <= i <= k:
            raise ValueError(f"color {i} out of range 1..{k}")
        return Degree(tuple(1 if j == i - 1 else 0 for j in range(k)))

    @staticmethod
    def ones(k: int) -> "Degree":
        return Degree((1,) * k)

    @property
    def k(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __add__(self, other: "Degree") -> "Degree":
        self._check(other)
        return Degree(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: "Degree") -> "Degree":
        self._check(other)
        diff = tuple(a - b for a, b in zip(self.entries, other.entries))
        if any(d < 0 for d in diff):
            raise ValueError(f"{self} - {other} leaves N^k")
        return Degree(diff)

    def minus_capped(self, other: "Degree") -> "Degree":
        """Componentwise max(self - other, 0)."""
        self._check(other)
        return Degree(max(a - b, 0) for a, b in zip(self.entries, other.entries))

    def meet(self, other: "Degree") -> "Degree":
        self._check(other)
        return Degree(min(a, b) for a, b in zip(self.entries, other.entries))

    def join(self, other: "Degree") -> "Degree":
        self._check(other)
        return Degree(max(a, b) for a, b in zip(self.entries, other.entries))

    def __le__(self, other: "Degree") -> bool:
        self._check(other)
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def __ge__(self, other: "Degree") -> bool:
        return other.__le__(self)

    def __lt__(self, other: "Degree") -> bool:
        return self <= other and self != other

    def __eq__(self, other) -> bool:
        return isinstance(other, Degree) and self.entries == other.entries

    def __hash__(self) -> int:
        return self._hash

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def total(self) -> int:
        return sum(self.entries)

    def dot(self, weights) -> float:
        """r . n for a vector r of reals."""
        return sum(w * e for w, e in zip(weights, self.entries))

    def scale(self, c: int) -> "Degree":
        return Degree(c * e for e in self.entries)

    def support(self) -> tuple:
        """1-based colors with a nonzero entry."""
        return tuple(i + 1 for i, e in enumerate(self.entries) if e > 0)

    def box(self) -> Iterator["Degree"]:
        """All degrees q with 0 <= q <= self, in lexicographic order."""
        ranges = [range(e + 1) for e in self.entries]

        def rec(prefix, rest):
            if not rest:
                yield Degree(prefix)
                return
            for v in rest[0]:
                yield from rec(prefix + [v], rest[1:])

        yield from rec([], ranges)

    def _check(self, other: "Degree") -> None:
        if not isinstance(other, Degree) or len(other.entries) != len(self.entries):
            raise TypeError(f"incompatible degrees {self!r} and {other!r}")

    def __repr__(self) -> str:
        return f"Degree{self.entries}"

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"
