"""Reversible circuits over {X, CNOT, TOFFOLI, MCX, SWAP}.

Wire 0 is the most significant bit of a basis index, matching the
MSB-first strings used everywhere else.  Synthesis is bidirectional
transformation-based (Miller-Maslov-Dueck) followed by cancellation of
adjacent identical gates; it makes no depth-optimality claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .f2linalg import BitWord, WidthMismatch
from .galois import PermTable


class CircuitFormatError(ValueError):
    pass


class GateKind(str, Enum):
    X = "X"
    CNOT = "CNOT"
    TOFFOLI = "TOFFOLI"
    MCX = "MCX"
    SWAP = "SWAP"
    # Hadamard is accepted so the statevector simulator can reject it.
    H = "H"


_FILE_NAMES = {GateKind.X: "X", GateKind.CNOT: "CNOT", GateKind.TOFFOLI: "TOF",
               GateKind.MCX: "MCX", GateKind.SWAP: "SWAP", GateKind.H: "H"}
_FROM_FILE = {v: k for k, v in _FILE_NAMES.items()}
_FROM_FILE["TOFFOLI"] = GateKind.TOFFOLI
_FROM_FILE["CCX"] = GateKind.TOFFOLI
_FROM_FILE["CX"] = GateKind.CNOT


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    controls: Tuple[int, ...]
    targets: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "targets", tuple(self.targets))
        k, nc, nt = self.kind, len(self.controls), len(self.targets)
        expected = {
            GateKind.X: nc == 0 and nt == 1,
            GateKind.H: nc == 0 and nt == 1,
            GateKind.CNOT: nc == 1 and nt == 1,
            GateKind.TOFFOLI: nc == 2 and nt == 1,
            GateKind.MCX: nc >= 3 and nt == 1,
            GateKind.SWAP: nc == 0 and nt == 2,
        }[k]
        if not expected:
            raise ValueError(f"{k.value} gate with {nc} controls and {nt} targets")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"repeated wire in {self}")
        if any(w < 0 for w in self.wires):
            raise ValueError(f"negative wire in {self}")

    @classmethod
    def mcx(cls, controls: Sequence[int], target: int) -> "Gate":
        """Pick the right kind for a controlled-NOT with any number of controls."""
        kind = {0: GateKind.X, 1: GateKind.CNOT, 2: GateKind.TOFFOLI}.get(len(controls), GateKind.MCX)
        return cls(kind, tuple(sorted(controls)), (target,))

    @classmethod
    def swap(cls, a: int, b: int) -> "Gate":
        return cls(GateKind.SWAP, (), (a, b))

    @property
    def wires(self) -> Tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_reversible_classical(self) -> bool:
        return self.kind is not GateKind.H

    def __str__(self) -> str:
        return " ".join([_FILE_NAMES[self.kind], *map(str, self.wires)])


@dataclass
class Circuit:
    width: int
    gates: List[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if max(g.wires) >= self.width:
            raise ValueError(f"gate {g} exceeds circuit width {self.width}")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def reversed(self) -> "Circuit":
        """Inverse circuit; valid because every gate here is self-inverse."""
        return Circuit(self.width, list(reversed(self.gates)))

    def __len__(self) -> int:
        return len(self.gates)

    def count(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for g in self.gates:
            out[g.kind.value] = out.get(g.kind.value, 0) + 1
        return out


# -- classical semantics ----------------------------------------------------

def _mask(wires: Iterable[int], n: int) -> int:
    m = 0
    for w in wires:
        m |= 1 << (n - 1 - w)
    return m


def apply_gate_array(g: Gate, xs: np.ndarray, n: int) -> np.ndarray:
    """Apply ``g`` to every basis index in ``xs`` at once."""
    if g.kind is GateKind.H:
        raise ValueError("H has no classical reversible semantics")
    if g.kind is GateKind.SWAP:
        a, b = (n - 1 - w for w in g.targets)
        diff = ((xs >> a) ^ (xs >> b)) & 1
        return xs ^ (diff << a) ^ (diff << b)
    c = _mask(g.controls, n)
    t = _mask(g.targets, n)
    return np.where((xs & c) == c, xs ^ t, xs)


def apply_gate_classical(g: Gate, bits: BitWord) -> BitWord:
    out = apply_gate_array(g, np.array([bits.value], dtype=np.int64), bits.width)
    return BitWord(bits.width, int(out[0]))


def truth_table_array(c: Circuit) -> np.ndarray:
    xs = np.arange(1 << c.width, dtype=np.int64)
    for g in c.gates:
        xs = apply_gate_array(g, xs, c.width)
    return xs


def truth_table(c: Circuit) -> PermTable:
    """Gates applied left to right to each basis input."""
    return PermTable(c.width, tuple(truth_table_array(c).tolist()))


# -- synthesis --------------------------------------------------------------

def _controls_of(mask: int, n: int) -> List[int]:
    return [w for w in range(n) if mask >> (n - 1 - w) & 1]


def _steps(src: int, dst: int, n: int) -> List[Tuple[int, int]]:
    """(control mask, target bit) gates moving value ``src`` to ``dst``.

    Set missing bits first (controlled on the current value), then clear
    extra bits (controlled on ``dst``).  Neither step touches any value
    below ``min(src, dst)``, which keeps already-fixed rows fixed.
    """
    out = []
    v = src
    for b in range(n):
        bit = 1 << b
        if dst & bit and not v & bit:
            out.append((v, bit))
            v |= bit
    for b in range(n):
        bit = 1 << b
        if v & bit and not dst & bit:
            out.append((dst, bit))
            v ^= bit
    return out


def _to_gate(ctrl: int, tbit: int, n: int) -> Gate:
    target = n - 1 - (tbit.bit_length() - 1)
    return Gate.mcx(_controls_of(ctrl, n), target)


def synthesize(p: PermTable) -> Circuit:
    """Reversible circuit whose truth table is ``p``."""
    n = p.n
    if n > 8:
        raise ValueError("synthesis supports n <= 8")
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    f = np.array(p.table, dtype=np.int64)
    finv = np.empty_like(f)
    finv[f] = idx
    front: List[Gate] = []
    back: List[Gate] = []
    for i in range(size):
        y = int(f[i])
        if y == i:
            continue
        j = int(finv[i])
        if bin(i ^ y).count("1") <= bin(i ^ j).count("1"):
            # output side: f <- g o f
            for ctrl, tbit in _steps(y, i, n):
                hit = (f & ctrl) == ctrl
                f = np.where(hit, f ^ tbit, f)
                back.append(_to_gate(ctrl, tbit, n))
        else:
            # input side: f <- f o g, with g mapping i to j
            for ctrl, tbit in _steps(j, i, n):
                perm = np.where((idx & ctrl) == ctrl, idx ^ tbit, idx)
                f = f[perm]
                front.append(_to_gate(ctrl, tbit, n))
        finv[f] = idx
    return Circuit(n, cancel_adjacent(front + back[::-1]))


def cancel_adjacent(gates: Iterable[Gate]) -> List[Gate]:
    """Drop pairs of identical neighbouring gates until none remain."""
    out: List[Gate] = []
    for g in gates:
        if out and out[-1] == g:
            out.pop()
        else:
            out.append(g)
    return out


# -- cost metrics -----------------------------------------------------------

@dataclass(frozen=True)
class CostTable:
    """Per-gate depth and T-depth costs.

    MCX with k controls costs ``mcx_depth * (2k - 3)`` layers and
    ``mcx_t * (2k - 3)`` T-layers, a ladder-decomposition estimate.
    """

    x: int = 1
    cnot: int = 1
    swap: int = 3
    toffoli: int = 7
    mcx_depth: int = 7
    toffoli_t: int = 1
    mcx_t: int = 1
    h: int = 1

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"cost {name} must be a nonnegative integer, got {v!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "CostTable":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown cost fields: {sorted(unknown)}")
        return cls(**d)

    def depth_of(self, g: Gate) -> int:
        k = g.kind
        if k is GateKind.MCX:
            return self.mcx_depth * (2 * len(g.controls) - 3)
        return {GateKind.X: self.x, GateKind.CNOT: self.cnot, GateKind.SWAP: self.swap,
                GateKind.TOFFOLI: self.toffoli, GateKind.H: self.h}[k]

    def t_of(self, g: Gate) -> int:
        if g.kind is GateKind.TOFFOLI:
            return self.toffoli_t
        if g.kind is GateKind.MCX:
            return self.mcx_t * (2 * len(g.controls) - 3)
        return 0


DEFAULT_COSTS = CostTable()


def trailing_swaps(c: Circuit) -> List[bool]:
    """Flags for SWAPs followed only by other trailing SWAPs on their wires.

    Such SWAPs amount to relabelling the outputs and are free.
    """
    flags = [False] * len(c.gates)
    blocked = set()
    for i in range(len(c.gates) - 1, -1, -1):
        g = c.gates[i]
        if g.kind is GateKind.SWAP and not blocked.intersection(g.wires):
            flags[i] = True
        else:
            blocked.update(g.wires)
    return flags


def layers(c: Circuit) -> List[List[Gate]]:
    """Greedy as-soon-as-possible layering on wire conflicts.

    Trailing SWAPs are left out.
    """
    skip = trailing_swaps(c)
    ready = [0] * c.width
    out: List[List[Gate]] = []
    for g, s in zip(c.gates, skip):
        if s:
            continue
        layer = max(ready[w] for w in g.wires)
        if layer == len(out):
            out.append([])
        out[layer].append(g)
        for w in g.wires:
            ready[w] = layer + 1
    return out


def depth(c: Circuit, costs: CostTable = DEFAULT_COSTS) -> int:
    return sum(max(costs.depth_of(g) for g in layer) for layer in layers(c))


def t_depth(c: Circuit, costs: CostTable = DEFAULT_COSTS) -> int:
    return sum(max(costs.t_of(g) for g in layer) for layer in layers(c))


def metrics(c: Circuit, costs: CostTable = DEFAULT_COSTS) -> dict:
    return {
        "width": c.width,
        "gates": len(c),
        "gate_counts": c.count(),
        "depth": depth(c, costs),
        "t_depth": t_depth(c, costs),
    }


# -- file format ------------------------------------------------------------

def format_circuit(c: Circuit) -> str:
    lines = [f"WIDTH {c.width}"]
    lines += [str(g) for g in c.gates]
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format.

    First non-comment line is ``WIDTH n``; then one gate per line with the
    target last (``CNOT 2 0`` is control 2, target 0).
    """
    width = None
    gates: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        head = head.upper()
        try:
            wires = [int(a) for a in args]
        except ValueError:
            raise CircuitFormatError(f"line {lineno}: non-integer wire in {raw!r}") from None
        if width is None:
            if head != "WIDTH" or len(wires) != 1 or wires[0] < 1:
                raise CircuitFormatError(f"line {lineno}: expected 'WIDTH n' header")
            width = wires[0]
            continue
        if head not in _FROM_FILE:
            raise CircuitFormatError(f"line {lineno}: unknown gate {head!r}")
        kind = _FROM_FILE[head]
        try:
            if kind is GateKind.SWAP:
                g = Gate(kind, (), tuple(wires))
            elif kind is GateKind.MCX and len(wires) <= 3:
                g = Gate.mcx(wires[:-1], wires[-1])
            else:
                g = Gate(kind, tuple(wires[:-1]), tuple(wires[-1:]))
        except (ValueError, IndexError) as exc:
            raise CircuitFormatError(f"line {lineno}: {exc}") from None
        if max(g.wires) >= width:
            raise CircuitFormatError(f"line {lineno}: wire out of range for width {width}")
        gates.append(g)
    if width is None:
        raise CircuitFormatError("missing 'WIDTH n' header")
    return Circuit(width, gates)


def load_circuit(path: "str | Path") -> Circuit:
    return parse_circuit(Path(path).read_text())


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("emsimon") / "fixtures" / name))


def load_fixture_circuit(name: str) -> Circuit:
    """``fig4`` or ``fig6``: the published permutation circuits."""
    return load_circuit(fixture_path(f"{name}.circ"))


def random_circuit(width: int, n_gates: int, rng: np.random.Generator) -> Circuit:
    gates = []
    for _ in range(n_gates):
        kinds = [GateKind.X, GateKind.SWAP] if width < 2 else [GateKind.X, GateKind.CNOT, GateKind.SWAP]
        if width >= 3:
            kinds.append(GateKind.TOFFOLI)
        if width >= 4:
            kinds.append(GateKind.MCX)
        kind = kinds[rng.integers(len(kinds))]
        if kind is GateKind.SWAP:
            if width < 2:
                kind = GateKind.X
            else:
                a, b = rng.choice(width, size=2, replace=False)
                gates.append(Gate.swap(int(a), int(b)))
                continue
        nc = {GateKind.X: 0, GateKind.CNOT: 1, GateKind.TOFFOLI: 2}.get(kind)
        if nc is None:
            nc = int(rng.integers(3, width))
        wires = [int(w) for w in rng.choice(width, size=nc + 1, replace=False)]
        gates.append(Gate.mcx(wires[:-1], wires[-1]))
    return Circuit(width, gates)
