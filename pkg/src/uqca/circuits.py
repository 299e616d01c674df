"""Circuit descriptions of simulated scattering unitaries, and simulated states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import UQCAError
from .gates import NATIVE_GATE_NAMES, native_gate


@dataclass(frozen=True)
class CircuitGate:
    name: str
    position: int


@dataclass(frozen=True)
class CircuitDesc:
    """An ordered list of native two-qubit gates on 2n qubits.

    Position p in -(n-1)..(n-1) addresses the adjacent qubit pair
    (n-1+p, n+p); gates apply in list order.
    """

    n: int
    gates: tuple[CircuitGate, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise UQCAError("circuit half-width n must be >= 1")
        for g in self.gates:
            if g.name not in NATIVE_GATE_NAMES:
                raise UQCAError(f"unknown gate {g.name!r}")
            if abs(g.position) > self.n - 1:
                raise UQCAError(
                    f"gate position {g.position} out of range for width {2 * self.n}"
                )

    @property
    def m(self) -> int:
        return len(self.gates)

    @property
    def width(self) -> int:
        return 2 * self.n

    @classmethod
    def build(cls, n: int, gates) -> "CircuitDesc":
        return cls(n, tuple(CircuitGate(name, pos) for name, pos in gates))


def expansion_factors(circuit: CircuitDesc) -> tuple[int, int]:
    """Space and time expansion (s, t) of the weak simulation of this circuit."""
    s = 4 * circuit.n * circuit.m + 2 + 2 * circuit.n
    t = (3 * s) // 2  # s is even, so exact
    return s, t


def circuit_matrix(circuit: CircuitDesc) -> np.ndarray:
    """Brute-force 2n-qubit matrix: the ordered product of embedded gates.

    Qubit 0 is the leftmost and most significant index.
    """
    width = circuit.width
    dim = 1 << width
    out = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        left = circuit.n - 1 + g.position
        u4 = native_gate(g.name)
        full = np.eye(1, dtype=complex)
        full = np.kron(np.eye(1 << left, dtype=complex), u4)
        full = np.kron(full, np.eye(1 << (width - left - 2), dtype=complex))
        out = full @ out
    return out


@dataclass
class SimulatedState:
    """A superposition of qubit words for the machine being simulated.

    ``offset`` is the index of the first stored qubit; words are fixed-length
    bit tuples (gate dynamics never move the support).
    """

    offset: int
    width: int
    terms: dict[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        for word in self.terms:
            if len(word) != self.width or any(b not in (0, 1) for b in word):
                raise UQCAError(f"bad simulated word {word!r}")

    @classmethod
    def from_bits(cls, bits, offset: int = 0) -> "SimulatedState":
        word = tuple(int(b) for b in bits)
        return cls(offset, len(word), {word: 1.0 + 0j})

    @classmethod
    def from_terms(cls, offset: int, width: int, terms,
                   normalize: bool = False) -> "SimulatedState":
        acc: dict[tuple[int, ...], complex] = {}
        for word, amp in dict(terms).items():
            if amp != 0:
                acc[tuple(word)] = acc.get(tuple(word), 0j) + complex(amp)
        if normalize:
            nrm = math.sqrt(sum(abs(a) ** 2 for a in acc.values()))
            acc = {w: a / nrm for w, a in acc.items()}
        return cls(offset, width, acc)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())

    def aligned_with(self, other: "SimulatedState") -> bool:
        return self.offset == other.offset and self.width == other.width


def sim_inner(a: SimulatedState, b: SimulatedState) -> complex:
    if not a.aligned_with(b):
        raise UQCAError(
            f"simulated states differ in support: "
            f"[{a.offset},{a.offset + a.width}) vs [{b.offset},{b.offset + b.width})"
        )
    return sum(
        amp.conjugate() * b.terms.get(word, 0j) for word, amp in a.terms.items()
    )


def sim_fidelity(a: SimulatedState, b: SimulatedState) -> float:
    """|<a|b>|^2; global phase is unobservable."""
    return abs(sim_inner(a, b)) ** 2
