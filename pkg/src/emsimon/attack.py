"""The two-step key-recovery attack: Simon sampling for k1, then k2.

Randomness: one integer seed per run is expanded with
``numpy.random.SeedSequence(seed).spawn(2)``; child 0 drives the Simon
samples and child 1 the noisy k2 observations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

import numpy as np

from .cipher import EmInstance, EmKey, f_table, recover_k2
from .f2linalg import BitWord, EquationSet, solve_period
from .galois import PermTable, format_lut
from .noise import noisy_sample, noisy_stream
from .qsim import Distribution, simon_output_distribution

STRATEGIES = ("streaming", "top-half")


class ShotBudgetExhausted(RuntimeError):
    pass


class InsufficientRank(RuntimeError):
    pass


@dataclass
class StreamResult:
    k1: BitWord
    shots: int
    ranks: List[int]
    samples: List[int]


def streaming_recover_k1(samples: Iterable[int], n: int, max_shots: int, r: int = 0) -> StreamResult:
    """Feed outcomes into an equation set one at a time.

    Stops as soon as the rank reaches n (k1 = 0), or once it is n-1 and at
    least n + r outcomes have been read.  At the cap, rank n-1 still yields
    a solution; anything lower raises :class:`ShotBudgetExhausted`.

    A constant f (k1 = 0) interferes completely onto the all-zero outcome,
    so rank 0 after n + r outcomes is also reported as k1 = 0.
    """
    if max_shots < 1:
        raise ValueError("max_shots must be >= 1")
    eqs = EquationSet(n)
    ranks: List[int] = []
    seen: List[int] = []
    it = iter(samples)
    for shot in range(1, max_shots + 1):
        y = next(it)
        seen.append(y)
        eqs.add_row(BitWord(n, y))
        ranks.append(eqs.rank)
        if eqs.rank == n:
            return StreamResult(BitWord(n, 0), shot, ranks, seen)
        if shot >= n + r and eqs.rank in (0, n - 1):
            break
    if eqs.rank == 0 and len(seen) >= n + r and n > 1:
        return StreamResult(BitWord(n, 0), len(seen), ranks, seen)
    if eqs.rank < n - 1:
        raise ShotBudgetExhausted(
            f"rank {eqs.rank} after {len(seen)} shots; need {n - 1}")
    return StreamResult(solve_period(eqs), len(seen), ranks, seen)


def _top_half(counts: Distribution):
    n = counts.width
    eqs = EquationSet(n)
    ranks = []
    for y in counts.most_common(1 << (n - 1)):
        if eqs.rank == n - 1 or counts.weights[y] <= 0:
            break
        eqs.add_row(BitWord(n, y))
        ranks.append(eqs.rank)
    if eqs.rank == 0 and n > 1:
        # every observed outcome is zero: constant f, so k1 = 0 as in streaming
        return BitWord(n, 0), ranks
    if eqs.rank < n - 1:
        raise InsufficientRank(f"top half of outcomes spans only rank {eqs.rank}")
    return solve_period(eqs), ranks


def top_half_recover_k1(counts: Distribution, n: Optional[int] = None) -> BitWord:
    """Solve from the 2^(n-1) most frequent outcomes.

    Ties go to the numerically smaller outcome; outcomes never observed are
    skipped.  If only the zero outcome was observed the result is k1 = 0.
    """
    if n is not None and n != counts.width:
        raise ValueError(f"distribution width {counts.width} != {n}")
    return _top_half(counts)[0]


def verify_keys(perm: PermTable, k1: BitWord, k2: BitWord,
                oracle: Callable[[BitWord], BitWord]) -> bool:
    """True iff ``P(x ^ k1) ^ k2`` matches the oracle on every plaintext."""
    n = perm.n
    return all(perm[x ^ k1.value] ^ k2.value == oracle(BitWord(n, x)).value
               for x in range(1 << n))


@dataclass(frozen=True)
class AttackConfig:
    """Everything a simulated attack run depends on.

    ``shots`` is the exact sample count for ``top-half`` and the cap for
    ``streaming``.
    """

    perm: PermTable
    key: EmKey
    shots: int
    strategy: str = "streaming"
    noise_p: float = 0.0
    seed: int = 0
    r: int = 8
    m: int = 0
    k2_mode: str = "classical"
    k2_shots: Optional[int] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not 0 <= self.noise_p <= 1:
            raise ValueError("noise p must be in [0, 1]")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.k2_mode not in ("classical", "noisy"):
            raise ValueError("k2 mode must be 'classical' or 'noisy'")
        if not 0 <= self.m < (1 << self.perm.n):
            raise ValueError("k2 message m out of range")
        if self.perm.n != self.key.width:
            raise ValueError("key width does not match permutation width")

    @property
    def n(self) -> int:
        return self.perm.n

    def to_dict(self) -> dict:
        n = self.n
        return {
            "n": n,
            "lut": format_lut(self.perm),
            "k1": str(self.key.k1),
            "k2": str(self.key.k2),
            "shots": self.shots,
            "strategy": self.strategy,
            "noise_p": self.noise_p,
            "seed": self.seed,
            "r": self.r,
            "m": format(self.m, f"0{n}b"),
            "k2_mode": self.k2_mode,
            "k2_shots": self.k2_shots,
        }


@dataclass
class AttackResult:
    config: AttackConfig
    k1: BitWord
    k2: BitWord
    shots_used: int
    ranks: List[int]
    distribution: Distribution
    success: bool
    equivalent: bool
    k2_distribution: Optional[Distribution] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, distribution_path: Optional[str] = None) -> dict:
        out = {
            "config": self.config.to_dict(),
            "recovered_k1": str(self.k1),
            "recovered_k2": str(self.k2),
            "success": self.success,
            "equivalent_key": self.equivalent,
            "shots_used": self.shots_used,
            "rank_trajectory": self.ranks,
            "distribution_path": distribution_path,
            "seed": self.config.seed,
        }
        if self.k2_distribution is not None:
            out["k2_counts"] = {k: int(v) for k, v in self.k2_distribution.items()}
        return out

    def to_json(self, distribution_path: Optional[str] = None) -> str:
        return json.dumps(self.to_dict(distribution_path), indent=2, sort_keys=True) + "\n"


def run_attack(cfg: AttackConfig, ideal: Optional[Distribution] = None) -> AttackResult:
    """Simulate the attack end to end against the configured instance.

    ``ideal`` may be passed to reuse a precomputed exact distribution.
    Raises :class:`ShotBudgetExhausted` / :class:`InsufficientRank` when k1
    cannot be extracted.
    """
    n = cfg.n
    inst = EmInstance(cfg.perm, cfg.key)
    oracle = inst.oracle()
    if ideal is None:
        ideal = simon_output_distribution(f_table(inst), n)
    simon_seq, k2_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    simon_rng = np.random.default_rng(simon_seq)

    if cfg.strategy == "streaming":
        res = streaming_recover_k1(noisy_stream(ideal, cfg.noise_p, simon_rng), n, cfg.shots, cfg.r)
        k1, shots_used, ranks = res.k1, res.shots, res.ranks
        counts = Distribution(n, np.bincount(res.samples, minlength=1 << n), counts=True)
    else:
        counts = noisy_sample(ideal, cfg.noise_p, cfg.shots, simon_rng)
        k1, ranks = _top_half(counts)
        shots_used = cfg.shots

    m = BitWord(n, cfg.m)
    k2 = recover_k2(oracle, cfg.perm, k1, m)
    k2_counts = None
    if cfg.k2_mode == "noisy":
        point = np.zeros(1 << n)
        point[k2.value] = 1.0
        k2_counts = noisy_sample(Distribution(n, point), cfg.noise_p,
                                 cfg.k2_shots or cfg.shots, np.random.default_rng(k2_seq))
        k2 = BitWord(n, k2_counts.most_common(1)[0])

    return AttackResult(
        config=cfg,
        k1=k1,
        k2=k2,
        shots_used=shots_used,
        ranks=ranks,
        distribution=counts,
        success=(k1 == cfg.key.k1 and k2 == cfg.key.k2),
        equivalent=verify_keys(cfg.perm, k1, k2, oracle),
        k2_distribution=k2_counts,
    )


def random_instance(n: int, rng: np.random.Generator) -> EmInstance:
    perm = PermTable(n, tuple(int(v) for v in rng.permutation(1 << n)))
    k1, k2 = (BitWord(n, int(v)) for v in rng.integers(0, 1 << n, size=2))
    return EmInstance(perm, EmKey(k1, k2))

