"""GF(2^n) arithmetic, AES-style S-box construction and LUT handling.

Field elements are ints whose binary form lists polynomial coefficients
from the highest degree down, so ``0b011`` is ``x + 1``.  Polynomials
defining a field carry their degree-n term: ``0b1011`` is ``x^3 + x + 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from .f2linalg import EquationSet, BitWord, parity


class NotIrreducible(ValueError):
    pass


class NonInvertibleAffine(ValueError):
    pass


class BadLength(ValueError):
    pass


class BadDigit(ValueError):
    pass


class NotBijective(ValueError):
    pass


def clmul(a: int, b: int) -> int:
    """Carry-less product of two polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for divisor in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, divisor) == 0:
                return False
    return True


def irreducible_polys(n: int) -> List[int]:
    return [p for p in range(1 << n, 1 << (n + 1)) if is_irreducible(p)]


@dataclass(frozen=True)
class FieldSpec:
    n: int
    poly: int

    def __post_init__(self):
        if not 2 <= self.n <= 8:
            raise ValueError(f"extension degree must be in 2..8, got {self.n}")
        if self.poly.bit_length() - 1 != self.n:
            raise ValueError(f"polynomial {self.poly:b} does not have degree {self.n}")
        if not is_irreducible(self.poly):
            raise NotIrreducible(f"{self.poly:b} is reducible over GF(2)")

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        word = BitWord.parse(text)
        return cls(word.width - 1, word.value)

    def __str__(self) -> str:
        return format(self.poly, f"0{self.n + 1}b")


def gf_mul(a: int, b: int, spec: FieldSpec) -> int:
    # shift-and-reduce; never builds a product wider than n+1 bits
    top = 1 << spec.n
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= spec.poly
    return out


def gf_pow(a: int, e: int, spec: FieldSpec) -> int:
    out = 1
    while e:
        if e & 1:
            out = gf_mul(out, a, spec)
        a = gf_mul(a, a, spec)
        e >>= 1
    return out


def gf_inv(a: int, spec: FieldSpec) -> int:
    """Multiplicative inverse via ``a^(2^n - 2)``; 0 maps to 0."""
    if a == 0:
        return 0
    return gf_pow(a, (1 << spec.n) - 2, spec)


def gf_inv_search(a: int, spec: FieldSpec) -> int:
    """Exhaustive-search inverse; the reference for :func:`gf_inv`."""
    if a == 0:
        return 0
    for b in range(1, 1 << spec.n):
        if gf_mul(a, b, spec) == 1:
            return b
    raise ArithmeticError(f"{a} has no inverse")  # unreachable for a field


@dataclass(frozen=True)
class AffineMap:
    """``v -> M v + c`` over GF(2)^n.

    ``matrix[i]`` is row i as an n-bit word; output bit i (MSB-first) is the
    parity of ``matrix[i] & v``.
    """

    n: int
    matrix: Tuple[int, ...]
    constant: int = 0

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(self.matrix))
        if len(self.matrix) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.matrix)}")
        if any(not 0 <= r < (1 << self.n) for r in self.matrix):
            raise ValueError("matrix row wider than n bits")
        if not 0 <= self.constant < (1 << self.n):
            raise ValueError("constant wider than n bits")

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(n, tuple(1 << (n - 1 - i) for i in range(n)), 0)

    @classmethod
    def parse(cls, rows: Sequence[str], constant: str) -> "AffineMap":
        words = [BitWord.parse(r) for r in rows]
        n = len(words)
        if any(w.width != n for w in words):
            raise ValueError("affine matrix must be square")
        c = BitWord.parse(constant)
        if c.width != n:
            raise ValueError("affine constant width does not match matrix")
        return cls(n, tuple(w.value for w in words), c.value)

    def is_invertible(self) -> bool:
        eqs = EquationSet(self.n)
        for r in self.matrix:
            eqs.add_row(BitWord(self.n, r))
        return eqs.rank == self.n

    def linear(self, v: int) -> int:
        out = 0
        for row in self.matrix:
            out = (out << 1) | parity(row & v)
        return out

    def __call__(self, v: int) -> int:
        return self.linear(v) ^ self.constant

    def to_dict(self) -> dict:
        return {
            "matrix": [format(r, f"0{self.n}b") for r in self.matrix],
            "constant": format(self.constant, f"0{self.n}b"),
        }


@dataclass(frozen=True)
class PermTable:
    """A bijection on n-bit words, stored as its lookup table."""

    n: int
    table: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        size = 1 << self.n
        if len(self.table) != size:
            raise BadLength(f"expected {size} entries, got {len(self.table)}")
        if sorted(self.table) != list(range(size)):
            raise NotBijective("table is not a permutation of 0..2^n-1")

    @classmethod
    def identity(cls, n: int) -> "PermTable":
        return cls(n, tuple(range(1 << n)))

    def __getitem__(self, x: int) -> int:
        return self.table[int(x)]

    def __len__(self) -> int:
        return len(self.table)

    def __iter__(self) -> Iterator[int]:
        return iter(self.table)

    def __str__(self) -> str:
        return format_lut(self)


def build_sbox(spec: FieldSpec, aff: AffineMap) -> PermTable:
    """``table[a] = M * inv(a) + c``."""
    if aff.n != spec.n:
        raise ValueError(f"affine map dimension {aff.n} != field degree {spec.n}")
    if not aff.is_invertible():
        raise NonInvertibleAffine("affine matrix is singular over GF(2)")
    return PermTable(spec.n, tuple(aff(gf_inv(a, spec)) for a in range(1 << spec.n)))


def _digits_per_entry(n: int) -> int:
    if 1 <= n <= 4:
        return 1
    if 5 <= n <= 8:
        return 2
    raise ValueError(f"LUT width must be in 1..8, got {n}")


def parse_lut(text: str, n: int) -> PermTable:
    """Parse a hex LUT: one digit per entry for n <= 4, two for 5..8."""
    text = "".join(text.split())
    k = _digits_per_entry(n)
    size = 1 << n
    if len(text) != k * size:
        raise BadLength(f"expected {k * size} hex digits for n={n}, got {len(text)}")
    try:
        values = [int(text[i:i + k], 16) for i in range(0, len(text), k)]
    except ValueError:
        raise BadDigit(f"non-hex digit in LUT {text!r}") from None
    if any(v >= size for v in values):
        raise BadDigit(f"LUT entry out of range for n={n}")
    return PermTable(n, tuple(values))


def format_lut(p: PermTable) -> str:
    k = _digits_per_entry(p.n)
    return "".join(format(v, f"0{k}X") for v in p.table)


def invert_perm(p: PermTable) -> PermTable:
    inv = [0] * len(p.table)
    for x, y in enumerate(p.table):
        inv[y] = x
    return PermTable(p.n, tuple(inv))


def find_sbox_parameters(p: PermTable) -> List[Tuple[FieldSpec, AffineMap]]:
    """Every (field, affine map) pair whose S-box equals ``p``.

    Since inv(0) = 0 the constant must be ``p[0]``; inversion is an
    involution, so the column of M for basis vector e_j is
    ``p[inv(e_j)] ^ p[0]``.  Each candidate is then checked on all inputs.
    """
    n = p.n
    found = []
    for poly in irreducible_polys(n):
        spec = FieldSpec(n, poly)
        c = p[0]
        cols = [p[gf_inv(1 << (n - 1 - j), spec)] ^ c for j in range(n)]
        rows = []
        for i in range(n):
            r = 0
            for j in range(n):
                r = (r << 1) | ((cols[j] >> (n - 1 - i)) & 1)
            rows.append(r)
        aff = AffineMap(n, tuple(rows), c)
        if aff.is_invertible() and all(aff(gf_inv(a, spec)) == p[a] for a in range(1 << n)):
            found.append((spec, aff))
    return found


def invertible_matrices(n: int) -> Iterator[Tuple[int, ...]]:
    """Enumerate GL(n, 2) as row tuples.  Only practical for n <= 4."""
    for rows in itertools.product(range(1, 1 << n), repeat=n):
        if AffineMap(n, rows).is_invertible():
            yield rows
