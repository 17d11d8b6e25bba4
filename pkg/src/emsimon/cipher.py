"""Even-Mansour encryption and the periodic function used to attack it."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List

import numpy as np

from .f2linalg import BitWord, WidthMismatch
from .galois import PermTable, invert_perm


class EpsilonOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class EmKey:
    k1: BitWord
    k2: BitWord

    def __post_init__(self):
        if self.k1.width != self.k2.width:
            raise WidthMismatch("k1 and k2 must have the same width")

    @property
    def width(self) -> int:
        return self.k1.width


@dataclass(frozen=True)
class EmInstance:
    perm: PermTable
    key: EmKey

    def __post_init__(self):
        if self.perm.n != self.key.width:
            raise WidthMismatch(f"permutation width {self.perm.n} != key width {self.key.width}")

    @property
    def n(self) -> int:
        return self.perm.n

    def oracle(self) -> Callable[[BitWord], BitWord]:
        """Black-box encryption, the only view of the key an attacker gets."""
        return lambda x: em_encrypt(self, x)


def _check(inst: EmInstance, x: BitWord) -> None:
    if x.width != inst.n:
        raise WidthMismatch(f"input width {x.width} != block width {inst.n}")


def em_encrypt(inst: EmInstance, x: BitWord) -> BitWord:
    _check(inst, x)
    return BitWord(inst.n, inst.perm[x.value ^ inst.key.k1.value] ^ inst.key.k2.value)


def em_decrypt(inst: EmInstance, y: BitWord) -> BitWord:
    _check(inst, y)
    inv = invert_perm(inst.perm)
    return BitWord(inst.n, inv[y.value ^ inst.key.k2.value] ^ inst.key.k1.value)


def simon_f(inst: EmInstance, x: BitWord) -> BitWord:
    """``EM(x) ^ P(x)``; has period k1."""
    _check(inst, x)
    return BitWord(inst.n, em_encrypt(inst, x).value ^ inst.perm[x.value])


def f_table(inst: EmInstance) -> np.ndarray:
    """``simon_f`` on every input, as an int array indexed by x."""
    perm = np.asarray(inst.perm.table, dtype=np.int64)
    x = np.arange(1 << inst.n)
    return perm[x ^ inst.key.k1.value] ^ inst.key.k2.value ^ perm


def collision_counts(f: "np.ndarray | List[int]") -> List[int]:
    """``counts[t] = #{x : f(x) = f(x ^ t)}`` for every shift t."""
    f = np.asarray(f)
    x = np.arange(len(f))
    return [int(np.count_nonzero(f == f[x ^ t])) for t in range(len(f))]


def epsilon(inst: EmInstance) -> Fraction:
    """Worst collision probability over shifts other than 0 and k1.

    A constant f (which is what k1 = 0 gives) has no usable period at all
    and is assigned 1.
    """
    if inst.n < 2:
        raise ValueError("epsilon needs n >= 2")
    f = f_table(inst)
    size = 1 << inst.n
    if np.all(f == f[0]):
        return Fraction(1)
    counts = collision_counts(f)
    k1 = inst.key.k1.value
    worst = max(c for t, c in enumerate(counts) if t not in (0, k1))
    return Fraction(worst, size)


def success_probability(eps: float, c: float, n: int) -> float:
    """``1 - (2((1+eps)/2)^c)^n`` clamped at 0, for c*n queries."""
    if eps >= 1 or eps < 0:
        raise EpsilonOutOfRange(f"eps must be in [0, 1), got {eps}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    val = 1.0 - (2.0 * ((1.0 + float(eps)) / 2.0) ** c) ** n
    return max(0.0, val)


def recover_k2(oracle: Callable[[BitWord], BitWord], perm: PermTable, k1: BitWord,
               m: BitWord) -> BitWord:
    """``EM(m) ^ P(m ^ k1)``: one classical query once k1 is known."""
    if m.width != perm.n or k1.width != perm.n:
        raise WidthMismatch("message and k1 must match the permutation width")
    return BitWord(perm.n, oracle(m).value ^ perm[m.value ^ k1.value])
