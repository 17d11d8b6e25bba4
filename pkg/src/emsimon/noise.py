"""Output-level symmetric depolarization model.

The ideal result is mixed with the uniform distribution:
``sigma_p = (1-p) * ideal + p * uniform``.  For an ideal that is uniform on a
half-space S this is ``(1 - p/2) / 2^(n-1)`` on S and ``p / 2^n`` off it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .qsim import Distribution, _rng

Number = Union[float, Fraction]


@dataclass(frozen=True)
class DepolModel:
    p: Number
    n: int
    support: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "support", frozenset(int(s) for s in self.support))
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not self.support:
            raise ValueError("support must be nonempty")
        if any(not 0 <= s < (1 << self.n) for s in self.support):
            raise ValueError("support element out of range")

    @classmethod
    def from_period(cls, p: Number, k1: int, n: int) -> "DepolModel":
        s = [y for y in range(1 << n) if bin(y & k1).count("1") % 2 == 0]
        return cls(p, n, frozenset(s))


def sigma_p_exact(model: DepolModel) -> Dict[int, Fraction]:
    """The piecewise distribution in exact rational arithmetic.

    Float ``p`` is read as its exact decimal string (0.434 -> 434/1000).
    """
    p = model.p if isinstance(model.p, Fraction) else Fraction(str(model.p))
    size = 1 << model.n
    on = (1 - p) / len(model.support) + p / size
    off = p / size
    return {y: on if y in model.support else off for y in range(size)}


def sigma_p(model: DepolModel) -> Distribution:
    exact = sigma_p_exact(model)
    return Distribution(model.n, np.array([float(exact[y]) for y in range(1 << model.n)]))


def mixture(ideal: Distribution, p: float) -> Distribution:
    """``(1-p) * ideal + p * uniform`` for any ideal distribution."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    size = 1 << ideal.width
    return Distribution(ideal.width, (1 - p) * ideal.probabilities() + p / size)


def effective_p(m_pulses: float, p_gate: float) -> float:
    """Naive total error ``M * p_gate``, clamped to [0, 1]."""
    if m_pulses < 0 or p_gate < 0:
        raise ValueError("pulse count and gate error must be nonnegative")
    return min(1.0, max(0.0, m_pulses * p_gate))


def _mixed_draws(probs: np.ndarray, p: float, k: int, rng: np.random.Generator) -> np.ndarray:
    noisy = rng.random(k) < p
    ideal = rng.choice(len(probs), size=k, p=probs)
    uniform = rng.integers(0, len(probs), size=k)
    return np.where(noisy, uniform, ideal)


def noisy_sample(ideal: Distribution, p: float, shots: int, seed=None) -> Distribution:
    """Per shot: uniform with probability p, otherwise a draw from ``ideal``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    draws = _mixed_draws(ideal.probabilities(), p, shots, _rng(seed))
    counts = np.bincount(draws, minlength=1 << ideal.width)
    return Distribution(ideal.width, counts, counts=True)


def noisy_stream(ideal: Distribution, p: float, seed=None, chunk: int = 64) -> Iterator[int]:
    rng = _rng(seed)
    probs = ideal.probabilities()
    while True:
        yield from (int(y) for y in _mixed_draws(probs, p, chunk, rng))


def tv_distance(a: Distribution, b: Distribution) -> float:
    """Total variation distance; count vectors are normalised first."""
    if a.width != b.width:
        raise ValueError(f"width {a.width} != {b.width}")
    return 0.5 * float(np.abs(a.probabilities() - b.probabilities()).sum())


def fit_p(observed: Distribution, support: Iterable[int]) -> float:
    """Depolarization parameter minimising TV distance to ``observed``."""
    support = frozenset(support)
    res = minimize_scalar(
        lambda p: tv_distance(sigma_p(DepolModel(p, observed.width, support)), observed),
        bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-6},
    )
    return float(res.x)
