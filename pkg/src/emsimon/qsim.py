"""Exact statevector simulation of Simon's circuit.

Amplitudes live in a numpy array of length 2^q; wire 0 is the most
significant index bit, so reshaping to ``(2,) * q`` puts wire w on axis w.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional, Sequence

import numpy as np

from .f2linalg import BitWord
from .galois import PermTable
from .synth import Circuit, Gate, GateKind

MAX_QUBITS = 24
NORM_TOL = 1e-9
AGREE_TOL = 1e-9


class NonPermutationGate(ValueError):
    pass


class SimulationMismatch(AssertionError):
    """Closed-form and statevector distributions disagree."""


@dataclass
class StateVector:
    qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}")
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.qubits,):
            raise ValueError("amplitude array has the wrong length")

    @classmethod
    def basis(cls, qubits: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state norm drifted to {self.norm()!r}")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def marginal(self, wires: Sequence[int]) -> np.ndarray:
        """Measurement distribution of ``wires`` (first wire most significant)."""
        probs = self.probabilities().reshape((2,) * self.qubits)
        others = tuple(w for w in range(self.qubits) if w not in wires)
        m = probs.sum(axis=others)
        kept = sorted(wires)
        m = np.transpose(m, [kept.index(w) for w in wires])
        return m.reshape(-1)


def _wire_values(idx: np.ndarray, wires: Sequence[int], q: int) -> np.ndarray:
    v = np.zeros_like(idx)
    for w in wires:
        v = (v << 1) | ((idx >> (q - 1 - w)) & 1)
    return v


def apply_oracle_xor(sv: StateVector, f: Sequence[int], in_range: Sequence[int],
                     out_range: Sequence[int]) -> StateVector:
    """``|x>|a> -> |x>|a ^ f(x)>`` as a permutation of basis amplitudes."""
    in_range, out_range = list(in_range), list(out_range)
    if set(in_range) & set(out_range):
        raise ValueError("input and output registers overlap")
    n = len(in_range)
    if len(out_range) != n:
        raise ValueError("registers must have equal size")
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (1 << n,):
        raise ValueError(f"f must have {1 << n} entries")
    q = sv.qubits
    idx = np.arange(1 << q, dtype=np.int64)
    fx = f[_wire_values(idx, in_range, q)]
    flip = np.zeros_like(idx)
    for k, w in enumerate(out_range):
        bit = (fx >> (n - 1 - k)) & 1
        flip |= bit << (q - 1 - w)
    new = np.empty_like(sv.amps)
    new[idx ^ flip] = sv.amps
    return StateVector(q, new)


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def apply_hadamard_layer(sv: StateVector, wires: Iterable[int]) -> StateVector:
    wires = list(wires)
    if len(set(wires)) != len(wires):
        raise ValueError("repeated wire in Hadamard layer")
    q = sv.qubits
    t = sv.amps.reshape((2,) * q)
    for w in wires:
        t = np.moveaxis(np.tensordot(_H, t, axes=([1], [w])), 0, w)
    return StateVector(q, t.reshape(-1))


def simon_statevector(f: Sequence[int], n: int) -> StateVector:
    """State just before measurement: H on input, U_f, H on input."""
    sv = StateVector.basis(2 * n)
    inp = list(range(n))
    sv = apply_hadamard_layer(sv, inp)
    sv = apply_oracle_xor(sv, f, inp, range(n, 2 * n))
    sv = apply_hadamard_layer(sv, inp)
    sv.check_norm()
    return sv


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform along the last axis."""
    a = np.array(a, dtype=np.float64)
    size = a.shape[-1]
    h = 1
    while h < size:
        a = a.reshape(a.shape[:-1] + (size // (2 * h), 2, h))
        lo, hi = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :] = lo + hi
        a[..., 1, :] = lo - hi
        a = a.reshape(a.shape[:-3] + (size,))
        h *= 2
    return a


def simon_closed_form(f: Sequence[int], n: int) -> np.ndarray:
    """``Pr[y] = 4^-n * sum_z |sum_{x: f(x)=z} (-1)^(x.y)|^2``."""
    f = np.asarray(f, dtype=np.int64)
    size = 1 << n
    values, inverse = np.unique(f, return_inverse=True)
    indicator = np.zeros((len(values), size))
    indicator[inverse, np.arange(size)] = 1.0
    spectrum = walsh_hadamard(indicator)
    return (spectrum ** 2).sum(axis=0) / float(size * size)


@dataclass
class Distribution:
    """Weights over n-bit outcomes: probabilities, or counts when ``counts``."""

    width: int
    weights: np.ndarray
    counts: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (1 << self.width,):
            raise ValueError("weight vector has the wrong length")
        if np.any(self.weights < 0):
            raise ValueError("negative weight")
        if not self.counts and abs(self.weights.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {self.weights.sum()!r}")

    @classmethod
    def from_mapping(cls, width: int, entries: Dict[str, float], counts: bool = True) -> "Distribution":
        w = np.zeros(1 << width)
        for k, v in entries.items():
            b = BitWord.parse(k)
            if b.width != width:
                raise ValueError(f"outcome {k!r} is not {width} bits wide")
            w[b.value] += v
        return cls(width, w, counts)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def probabilities(self) -> np.ndarray:
        if self.total <= 0:
            raise ValueError("empty distribution")
        return self.weights / self.total

    def normalized(self) -> "Distribution":
        return Distribution(self.width, self.probabilities())

    def support(self, tol: float = 0.0) -> list:
        return [int(y) for y in np.flatnonzero(self.weights > tol)]

    def label(self, y: int) -> str:
        return format(y, f"0{self.width}b")

    def items(self) -> Iterator:
        for y, w in enumerate(self.weights):
            yield self.label(y), float(w)

    def most_common(self, k: Optional[int] = None) -> list:
        """Outcomes by descending weight; ties go to the smaller outcome."""
        order = sorted(range(len(self.weights)), key=lambda y: (-self.weights[y], y))
        return order if k is None else order[:k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["outcome", "count" if self.counts else "probability"])
        for label, weight in self.items():
            w.writerow([label, _fmt(weight, self.counts)])
        return buf.getvalue()

    def to_json(self, **meta) -> str:
        body = {"n": self.width, **meta,
                "kind": "counts" if self.counts else "probability",
                "entries": {label: _num(weight, self.counts) for label, weight in self.items()}}
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Distribution":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip().lower() for c in rows[0]][:1] != ["outcome"]:
            raise ValueError("CSV must start with an 'outcome,<weight>' header")
        kind = rows[0][1].strip().lower() if len(rows[0]) > 1 else "count"
        entries = {r[0].strip(): float(r[1]) for r in rows[1:] if r}
        if not entries:
            raise ValueError("CSV has no rows")
        width = len(next(iter(entries)))
        return cls.from_mapping(width, entries, counts=(kind != "probability"))


def _num(w: float, counts: bool):
    if counts and float(w).is_integer():
        return int(w)
    return float(w)


def _fmt(w: float, counts: bool) -> str:
    return str(_num(w, counts))


def simon_output_distribution(f: Sequence[int], n: int, method: str = "both") -> Distribution:
    """Exact measurement distribution of the input register.

    ``method="both"`` runs the statevector and the closed form and raises
    :class:`SimulationMismatch` if they differ by more than 1e-9.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be in 1..12")
    if method == "closed_form":
        probs = simon_closed_form(f, n)
    elif method == "statevector":
        probs = simon_statevector(f, n).marginal(range(n))
    elif method == "both":
        probs = simon_closed_form(f, n)
        sv_probs = simon_statevector(f, n).marginal(range(n))
        gap = float(np.max(np.abs(probs - sv_probs)))
        if gap > AGREE_TOL:
            raise SimulationMismatch(f"closed form and statevector differ by {gap:.3g}")
    else:
        raise ValueError(f"unknown method {method!r}")
    probs = np.where(np.abs(probs) < 1e-15, 0.0, probs)
    return Distribution(n, probs / probs.sum())


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(dist: Distribution, shots: int, seed=None) -> Distribution:
    """Multinomial counts drawn from ``dist``; reproducible for a fixed seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = _rng(seed).multinomial(shots, dist.probabilities())
    return Distribution(dist.width, counts, counts=True)


def sample_stream(dist: Distribution, seed=None, chunk: int = 64) -> Iterator[int]:
    """Endless stream of single outcomes from ``dist``."""
    rng = _rng(seed)
    probs = dist.probabilities()
    while True:
        yield from (int(y) for y in rng.choice(len(probs), size=chunk, p=probs))


# -- circuits on the statevector --------------------------------------------

def apply_gate(state: np.ndarray, g: Gate) -> np.ndarray:
    """Apply ``g`` to a batch of states shaped ``(batch, 2, 2, ...)``."""
    state = state.copy()
    if g.kind is GateKind.H:
        (w,) = g.targets
        return np.moveaxis(np.tensordot(_H, state, axes=([1], [w + 1])), 0, w + 1)
    if g.kind is GateKind.SWAP:
        a, b = g.targets
        return np.ascontiguousarray(np.swapaxes(state, a + 1, b + 1))
    index = [slice(None)] * state.ndim
    for c in g.controls:
        index[c + 1] = 1
    (t,) = g.targets
    # integer indices drop axes, so the target axis shifts left
    t_axis = t + 1 - sum(1 for c in g.controls if c < t)
    view = state[tuple(index)]
    view[...] = np.flip(view, axis=t_axis).copy()
    return state


def simulate_circuit_unitary(c: Circuit, batch: int = 256) -> PermTable:
    """Basis permutation realised by ``c``, read off the simulated amplitudes."""
    if c.width > 12:
        raise ValueError("unitary simulation supports width <= 12")
    if any(g.kind is GateKind.H for g in c.gates):
        raise NonPermutationGate("circuit contains a Hadamard gate")
    size = 1 << c.width
    table = np.empty(size, dtype=np.int64)
    for start in range(0, size, batch):
        stop = min(size, start + batch)
        states = np.zeros((stop - start, size), dtype=np.complex128)
        states[np.arange(stop - start), np.arange(start, stop)] = 1.0
        t = states.reshape((stop - start,) + (2,) * c.width)
        for g in c.gates:
            t = apply_gate(t, g)
        flat = t.reshape(stop - start, size)
        hits = np.argmax(np.abs(flat), axis=1)
        peak = np.abs(flat[np.arange(stop - start), hits])
        if np.any(np.abs(peak - 1.0) > NORM_TOL):
            raise NonPermutationGate("output is not a basis state")
        table[start:stop] = hits
    return PermTable(c.width, tuple(table.tolist()))
