"""Small unitaries, controlled-gate layers, and unitarity verification."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import ScatteringUnitary, UQCAError

# The only irrational phase in either machine, computed once.
PHASE_PI_8 = cmath.exp(1j * math.pi / 8)

NATIVE_GATE_NAMES = ("swap", "h2", "h1", "cphase")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
_I2 = np.eye(2, dtype=complex)

_NATIVE = {
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
    "h2": np.kron(_I2, _H),
    "h1": np.kron(_H, _I2),
    "cphase": np.diag([1, 1, 1, PHASE_PI_8]).astype(complex),
}


def native_gate(name: str) -> np.ndarray:
    """4x4 matrix of a native two-qubit gate (first qubit = left = high bit)."""
    try:
        return _NATIVE[name].copy()
    except KeyError:
        raise UQCAError(f"unknown native gate {name!r}") from None


def derived_cnot_sequence() -> tuple[str, ...]:
    """Native sequence whose product is cNot: h2, cphase x8, h2."""
    return ("h2",) + ("cphase",) * 8 + ("h2",)


def gate_product(names) -> np.ndarray:
    """Left-to-right product of native gates (first name applied first)."""
    out = np.eye(4, dtype=complex)
    for name in names:
        out = native_gate(name) @ out
    return out


def phase_via_ancilla_cases():
    """Checkable instances of cPhase(|1> ox |psi>) = |1> ox Phase|psi>.

    Returns (input vector, expected output vector) pairs on the two-qubit
    space, with the first qubit the ancilla control.
    """
    phase = np.diag([1, PHASE_PI_8]).astype(complex)
    cases = []
    kets = [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([1, 1], dtype=complex) / math.sqrt(2),
        np.array([1, 1j], dtype=complex) / math.sqrt(2),
    ]
    for psi in kets:
        one = np.array([0, 1], dtype=complex)
        cases.append((np.kron(one, psi), np.kron(one, phase @ psi)))
        zero = np.array([1, 0], dtype=complex)
        cases.append((np.kron(zero, psi), np.kron(zero, psi)))
    return cases


# Half-codes carried by the two program signals encoding one gate.  The left
# half rides right-movers and arrives in the x slot of the colliding pair, so
# the collision keys (l(g), r(g)) must match the M-gate table rows.
GATE_LEFT_CODE = {"swap": 2, "h2": 2, "h1": 3, "cphase": 3}
GATE_RIGHT_CODE = {"swap": 2, "h2": 3, "h1": 2, "cphase": 3}
M_COLLISION_TABLE = {(2, 2): "swap", (2, 3): "h2", (3, 2): "h1", (3, 3): "cphase"}


def _pack_digits(digits, sizes) -> int:
    idx = 0
    for d, s in zip(digits, sizes):
        idx = idx * s + d
    return idx


def _unpack_digits(index: int, sizes) -> tuple[int, ...]:
    out = []
    for s in reversed(sizes):
        index, d = divmod(index, s)
        out.append(d)
    return tuple(reversed(out))


class TableGate:
    """A block unitary selected by the basis value of disjoint control digits.

    Controls and targets index the concatenated pair digits (x subsystems
    first, then y).  Control tuples absent from the table act as the identity.
    """

    def __init__(self, pair_dims, controls, targets, table, name=""):
        self.pair_dims = tuple(pair_dims)
        self.controls = tuple(controls)
        self.targets = tuple(targets)
        if set(self.controls) & set(self.targets):
            raise UQCAError(f"gate {name!r}: controls and targets overlap")
        self.target_dims = tuple(self.pair_dims[t] for t in self.targets)
        tdim = math.prod(self.target_dims)
        self.name = name or "gate"
        self.table = {}
        for key, mat in table.items():
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (tdim, tdim):
                raise UQCAError(
                    f"gate {self.name!r}: table entry {key} has shape {mat.shape}, "
                    f"expected {(tdim, tdim)}"
                )
            self.table[tuple(key)] = mat
        # Sparse column cache: control key -> {in_index: ((out_index, amp), ...)}
        self._cols: dict[tuple, dict[int, tuple]] = {}

    def apply_basis(self, digits):
        key = tuple(digits[c] for c in self.controls)
        mat = self.table.get(key)
        if mat is None:
            return {tuple(digits): 1.0 + 0j}
        col_index = _pack_digits((digits[t] for t in self.targets), self.target_dims)
        cache = self._cols.setdefault(key, {})
        entries = cache.get(col_index)
        if entries is None:
            col = mat[:, col_index]
            entries = tuple(
                (int(row), col[row].item()) for row in np.nonzero(col)[0]
            )
            cache[col_index] = entries
        out = {}
        base = list(digits)
        for row, amp in entries:
            new_digits = _unpack_digits(row, self.target_dims)
            for t, d in zip(self.targets, new_digits):
                base[t] = d
            out[tuple(base)] = amp
        return out

    def certify(self, tol: float = 1e-12) -> float:
        """Max unitarity deviation over table entries (identity default is exact)."""
        worst = 0.0
        for mat in self.table.values():
            dev = unitarity_deviation(mat)
            worst = max(worst, dev)
        if worst > tol:
            raise UQCAError(f"gate {self.name!r}: table entry deviates by {worst:.2e}")
        return worst


class ControlledSwap:
    """Swap two equal-shape digit groups when the control tuple is in the fire set."""

    def __init__(self, pair_dims, controls, fire, group_a, group_b, name=""):
        self.pair_dims = tuple(pair_dims)
        self.controls = tuple(controls)
        self.fire = frozenset(tuple(f) for f in fire)
        self.group_a = tuple(group_a)
        self.group_b = tuple(group_b)
        self.name = name or "cswap"
        touched = set(self.group_a) | set(self.group_b)
        if set(self.controls) & touched:
            raise UQCAError(f"gate {self.name!r}: controls and targets overlap")
        if len(self.group_a) != len(self.group_b):
            raise UQCAError(f"gate {self.name!r}: swap groups differ in length")
        for a, b in zip(self.group_a, self.group_b):
            if self.pair_dims[a] != self.pair_dims[b]:
                raise UQCAError(f"gate {self.name!r}: swap groups differ in shape")

    def apply_basis(self, digits):
        key = tuple(digits[c] for c in self.controls)
        if key not in self.fire:
            return {tuple(digits): 1.0 + 0j}
        base = list(digits)
        for a, b in zip(self.group_a, self.group_b):
            base[a], base[b] = base[b], base[a]
        return {tuple(base): 1.0 + 0j}

    def certify(self, tol: float = 1e-12) -> float:
        return 0.0  # involutive digit permutation


@dataclass
class UnitarityReport:
    dimension: int
    max_deviation: float
    tolerance: float
    witness: tuple[int, int] | None = None

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance


def unitarity_deviation(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix, dtype=complex)
    gram = matrix.conj().T @ matrix
    return float(np.abs(gram - np.eye(matrix.shape[0])).max())


def check_unitary(matrix: np.ndarray, tol: float = 1e-12) -> UnitarityReport:
    """Report max |(U^dagger U - I)_jk| with the location of the worst entry."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise UQCAError("check_unitary expects a square matrix")
    gram = matrix.conj().T @ matrix
    delta = np.abs(gram - np.eye(matrix.shape[0]))
    j, k = np.unravel_index(int(delta.argmax()), delta.shape)
    return UnitarityReport(
        dimension=matrix.shape[0],
        max_deviation=float(delta[j, k]),
        tolerance=tol,
        witness=(int(j), int(k)),
    )


def dense_matrix(u: ScatteringUnitary, max_dim: int = 4000) -> np.ndarray:
    """Materialize the pair-space matrix of a scattering unitary, columnwise."""
    d = u.alphabet.dim
    if d * d > max_dim * max_dim:
        raise UQCAError(
            f"refusing to materialize a {d * d}-dimensional scattering unitary"
        )
    out = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        a = u.alphabet.unpack(i)
        for j in range(d):
            b = u.alphabet.unpack(j)
            for (aa, bb), amp in u.column(a, b):
                out[u.alphabet.pack(aa) * d + u.alphabet.pack(bb), i * d + j] = amp
    return out


@dataclass
class StructuralReport:
    name: str
    gate_count: int
    max_gate_deviation: float
    quiescence_ok: bool
    sampled_columns: int
    max_gram_deviation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return (
            self.max_gate_deviation <= self.tolerance
            and self.quiescence_ok
            and self.max_gram_deviation <= self.tolerance
        )

    def lines(self) -> list[str]:
        return [
            f"unitary={self.name}",
            f"gates={self.gate_count}",
            f"max_gate_deviation={self.max_gate_deviation:.3e}",
            f"quiescence_ok={int(self.quiescence_ok)}",
            f"sampled_columns={self.sampled_columns}",
            f"max_gram_deviation={self.max_gram_deviation:.3e}",
            f"tolerance={self.tolerance:.1e}",
            f"pass={int(self.ok)}",
        ]


def certify_structure(u: ScatteringUnitary, samples: int = 0, tol: float = 1e-12,
                      seed: int = 0) -> StructuralReport:
    """Certify layer unitarity gate by gate, plus sampled column Gram checks.

    Every gate in the stack is unitary (its table entries are), so the product
    is unitary; the sampled Gram check cross-validates the assembled columns
    without materializing the full matrix.
    """
    worst_gate = 0.0
    for gate in u.gates:
        worst_gate = max(worst_gate, gate.certify(tol))
    d = u.alphabet.dim
    max_gram = 0.0
    n_cols = 0
    if samples:
        rng = np.random.default_rng(seed)
        picks = rng.choice(d * d, size=min(samples, d * d), replace=False)
        cols = []
        for p in picks:
            a = u.alphabet.unpack(int(p) // d)
            b = u.alphabet.unpack(int(p) % d)
            col = {
                u.alphabet.pack(aa) * d + u.alphabet.pack(bb): amp
                for (aa, bb), amp in u.column(a, b)
            }
            cols.append((int(p), col))
        n_cols = len(cols)
        for i in range(n_cols):
            pi, ci = cols[i]
            for j in range(i, n_cols):
                pj, cj = cols[j]
                if len(ci) > len(cj):
                    ci, cj = cj, ci
                val = sum(a.conjugate() * cj.get(k, 0j) for k, a in ci.items())
                want = 1.0 if pi == pj else 0.0
                max_gram = max(max_gram, abs(val - want))
                ci = cols[i][1]
    return StructuralReport(
        name=u.name,
        gate_count=len(u.gates),
        max_gate_deviation=worst_gate,
        quiescence_ok=u.fixes_quiescent(),
        sampled_columns=n_cols,
        max_gram_deviation=max_gram,
        tolerance=tol,
    )
