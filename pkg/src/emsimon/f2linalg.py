"""Bit vectors and linear algebra over GF(2).

Vectors are stored as Python ints.  The string form is MSB-first: the
leftmost character is bit index 0, so ``"010"`` has bit0=0, bit1=1, bit2=0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List

MAX_WIDTH = 16


class WidthMismatch(ValueError):
    pass


class RankDeficient(ValueError):
    """The equation set does not pin down a unique nonzero period."""


class FullRank(ValueError):
    """Every vector is constrained; only the zero vector is orthogonal."""


@dataclass(frozen=True, order=True)
class BitWord:
    """Fixed-width bit string."""

    width: int
    value: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in 1..{MAX_WIDTH}, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def parse(cls, text: str) -> "BitWord":
        text = text.strip()
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a binary string: {text!r}")
        return cls(len(text), int(text, 2))

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def bit(self, i: int) -> int:
        """Bit at index ``i`` (index 0 is the leftmost, most significant)."""
        return (self.value >> (self.width - 1 - i)) & 1

    def __xor__(self, other: "BitWord") -> "BitWord":
        _check(self, other)
        return BitWord(self.width, self.value ^ other.value)

    def __and__(self, other: "BitWord") -> "BitWord":
        _check(self, other)
        return BitWord(self.width, self.value & other.value)


def _check(x: BitWord, y: BitWord) -> None:
    if x.width != y.width:
        raise WidthMismatch(f"width {x.width} != {y.width}")


def parity(v: int) -> int:
    return bin(v).count("1") & 1


def dot(x: BitWord, y: BitWord) -> int:
    """Inner product over GF(2): parity of ``x & y``."""
    _check(x, y)
    return parity(x.value & y.value)


@dataclass
class EquationSet:
    """Incrementally maintained reduced row-echelon basis.

    ``pivots[i]`` is the leading (highest) bit of ``rows[i]``; every other
    stored row has a zero in that column.
    """

    width: int
    rows: List[int] = field(default_factory=list)
    pivots: List[int] = field(default_factory=list)

    @classmethod
    def from_words(cls, width: int, words: Iterable[BitWord]) -> "EquationSet":
        eqs = cls(width)
        for w in words:
            eqs.add_row(w)
        return eqs

    def reduce(self, v: int) -> int:
        for row, piv in zip(self.rows, self.pivots):
            if v & piv:
                v ^= row
        return v

    def add_row(self, y: BitWord) -> bool:
        """Insert ``y``; True iff it was independent of the stored rows."""
        if y.width != self.width:
            raise WidthMismatch(f"row width {y.width} != {self.width}")
        v = self.reduce(y.value)
        if not v:
            return False
        piv = 1 << (v.bit_length() - 1)
        for i, row in enumerate(self.rows):
            if row & piv:
                self.rows[i] = row ^ v
        self.rows.append(v)
        self.pivots.append(piv)
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)

    def words(self) -> List[BitWord]:
        return [BitWord(self.width, r) for r in self.rows]

    def __contains__(self, y: BitWord) -> bool:
        return self.reduce(y.value) == 0


def add_row(eqs: EquationSet, y: BitWord) -> bool:
    return eqs.add_row(y)


def rank(eqs: EquationSet) -> int:
    return eqs.rank


def nullspace_basis(eqs: EquationSet) -> List[BitWord]:
    """Basis of ``{s : dot(r, s) = 0 for every row r}``.

    One basis vector per free column: set the free bit, then fix each pivot
    bit to cancel its row's contribution.  Works because the stored form is
    fully reduced.
    """
    n = eqs.width
    pivot_set = 0
    for p in eqs.pivots:
        pivot_set |= p
    basis = []
    for k in range(n):
        free = 1 << k
        if free & pivot_set:
            continue
        s = free
        for row, piv in zip(eqs.rows, eqs.pivots):
            if row & free:
                s |= piv
        basis.append(BitWord(n, s))
    basis.sort(key=lambda w: w.value)
    return basis


def solve_period(eqs: EquationSet) -> BitWord:
    """The unique nonzero ``s`` orthogonal to all rows.

    Requires rank ``width - 1``.  Raises :class:`FullRank` at rank ``width``
    (callers read that as period 0) and :class:`RankDeficient` below
    ``width - 1``.
    """
    r = eqs.rank
    if r == eqs.width:
        raise FullRank("rows span the whole space; only s = 0 is orthogonal")
    if r < eqs.width - 1:
        raise RankDeficient(f"rank {r} < {eqs.width - 1}; period is not unique")
    (s,) = nullspace_basis(eqs)
    return s


def span(words: Iterable[BitWord], width: int) -> List[int]:
    """All elements of the span, sorted.  Only meant for small widths."""
    out = {0}
    for w in words:
        out |= {v ^ w.value for v in out}
    return sorted(out)


def orthogonal_complement(v: BitWord) -> List[int]:
    """Every ``y`` with ``dot(y, v) = 0``, by enumeration."""
    return [y for y in range(1 << v.width) if not parity(y & v.value)]
