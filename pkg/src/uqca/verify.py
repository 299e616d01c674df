"""Independent oracles and axiom checks: direct simulation, shift-invariance,
causality over reduced states, and end-to-end fidelity comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    CircuitDesc,
    SimulatedState,
    circuit_matrix,
    expansion_factors,
    sim_fidelity,
)
from .core import (
    Alphabet,
    Cell,
    Configuration,
    ScatteringUnitary,
    SparseState,
    SIM,
    UQCAError,
    canonicalize,
    evolve,
    inner_product,
    shift,
    step,
)
from .gates import TableGate


# ---------------------------------------------------------------------------
# Direct simulation of a circuit-described machine


def _block_alphabet(n: int) -> Alphabet:
    if n == 1:
        return SIM
    return Alphabet(f"simblock{n}", (2 ** n + 1,), ("block",))


def direct_pqca(circuit: CircuitDesc) -> ScatteringUnitary:
    """The simulated machine itself: cells are n-qubit blocks plus quiescent.

    The scattering unitary applies the circuit to a pair of occupied blocks
    and leaves pairs with an empty side untouched, exactly matching what the
    encoded gate collisions can reach.
    """
    n = circuit.n
    alphabet = _block_alphabet(n)
    d = alphabet.dim
    v = circuit_matrix(circuit)
    big = np.eye(d * d, dtype=complex)
    blocks = 1 << n
    occupied = [(1 + a, 1 + b) for a in range(blocks) for b in range(blocks)]
    for col, (a, b) in enumerate(occupied):
        j = a * d + b
        big[:, j] = 0
        for row, (c, e) in enumerate(occupied):
            big[c * d + e, j] = v[row, col]
    gate = TableGate((d, d), (), (0, 1), {(): big}, name="simulated-circuit")
    return ScatteringUnitary(alphabet, [gate], name=f"direct-pqca-n{n}")


def sim_to_blocks(phi: SimulatedState, n: int) -> SparseState:
    """Pack a simulated state into block cells (offset must align to blocks)."""
    if phi.offset % n or phi.width % n:
        raise UQCAError("simulated support must align to whole blocks")
    alphabet = _block_alphabet(n)
    block_offset = phi.offset // n
    terms = {}
    for word, amp in phi.terms.items():
        cells = []
        for j in range(0, len(word), n):
            value = 0
            for b in word[j: j + n]:
                value = (value << 1) | b
            cells.append((1 + value,))
        terms[canonicalize(alphabet, block_offset, cells)] = amp
    return SparseState.from_terms(alphabet, terms)


def blocks_to_sim(state: SparseState, offset: int, width: int, n: int) -> SimulatedState:
    """Unpack block cells back to qubit words over [offset, offset+width)."""
    alphabet = state.alphabet
    block_offset = offset // n
    n_blocks = width // n
    terms = {}
    for config, amp in state.terms.items():
        bits: list[int] = []
        for j in range(n_blocks):
            cell = config.cell_at(block_offset + j, alphabet.quiescent)
            if cell[0] == 0:
                raise UQCAError("simulated support shrank; block became quiescent")
            value = cell[0] - 1
            bits.extend((value >> (n - 1 - i)) & 1 for i in range(n))
        terms[tuple(bits)] = amp
    return SimulatedState.from_terms(offset, width, terms)


def oracle_evolve(circuit: CircuitDesc, phi: SimulatedState,
                  macro_steps: int) -> SimulatedState:
    """Evolve the simulated machine directly for macro_steps alternating steps."""
    n = circuit.n
    u = direct_pqca(circuit)
    state = sim_to_blocks(phi, n)
    state = evolve(state, macro_steps, u)
    return blocks_to_sim(state, phi.offset, phi.width, n)


# ---------------------------------------------------------------------------
# Two-layer block structure as a single partitioned machine

WERNER = Alphabet("werner2", (5,), ("half",))
# Cell values: 0 quiescent; 1+a holds the left (A) half a; 3+b the right (B) half b.


def two_layer_to_pqca(u0: np.ndarray, u1: np.ndarray) -> ScatteringUnitary:
    """One scattering unitary whose two-step evolution alternates u1 and u0.

    Coded cells are qubit pairs split across two adjacent cells (A at even,
    B at odd positions); u1 acts inside a coded cell, u0 across neighbours.
    """
    u0 = np.asarray(u0, dtype=complex)
    u1 = np.asarray(u1, dtype=complex)
    if u0.shape != (4, 4) or u1.shape != (4, 4):
        raise UQCAError("two-layer blocks must be 4x4 (qubit halves)")
    d = WERNER.dim
    big = np.eye(d * d, dtype=complex)

    def fill(pairs, mat):
        for col, (x, y) in enumerate(pairs):
            j = x * d + y
            big[:, j] = 0
            for row, (xx, yy) in enumerate(pairs):
                big[xx * d + yy, j] = mat[row, col]

    ab_pairs = [(1 + a, 3 + b) for a in range(2) for b in range(2)]
    ba_pairs = [(3 + b, 1 + a) for b in range(2) for a in range(2)]
    fill(ab_pairs, u1)
    fill(ba_pairs, u0)
    gate = TableGate((d, d), (), (0, 1), {(): big}, name="two-layer")
    return ScatteringUnitary(WERNER, [gate], name="two-layer-pqca")


def werner_encode(cell_values, offset: int = 0) -> SparseState:
    """Encode Werner cells (a, b) at consecutive even/odd positions."""
    cells: list[Cell] = []
    for a, b in cell_values:
        cells.extend(((1 + a,), (3 + b,)))
    return SparseState.basis(WERNER, canonicalize(WERNER, 2 * offset, cells))


# ---------------------------------------------------------------------------
# Random states and axiom checks


def random_sparse_state(alphabet: Alphabet, rng: np.random.Generator,
                        max_cells: int = 4, n_terms: int = 3,
                        span: int = 5) -> SparseState:
    terms: dict[Configuration, complex] = {}
    while not terms:
        for _ in range(n_terms):
            length = int(rng.integers(1, max_cells + 1))
            offset = int(rng.integers(-span, span))
            cells = []
            for _ in range(length):
                cells.append(tuple(int(rng.integers(0, s))
                                   for s in alphabet.subsystem_sizes))
            config = canonicalize(alphabet, offset, cells)
            amp = complex(rng.standard_normal(), rng.standard_normal())
            terms[config] = terms.get(config, 0j) + amp
        terms = {c: a for c, a in terms.items() if a != 0}
    return SparseState.from_terms(alphabet, terms, normalize=True)


def state_deviation(a: SparseState, b: SparseState) -> float:
    keys = set(a.terms) | set(b.terms)
    return max(
        (abs(a.terms.get(k, 0j) - b.terms.get(k, 0j)) for k in keys),
        default=0.0,
    )


@dataclass
class AxiomReport:
    name: str
    unitary: str
    trials: int
    seed: int
    max_deviation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance

    def lines(self) -> list[str]:
        return [
            f"check={self.name}",
            f"unitary={self.unitary}",
            f"trials={self.trials}",
            f"seed={self.seed}",
            f"max_deviation={self.max_deviation:.3e}",
            f"tolerance={self.tolerance:.1e}",
            f"pass={int(self.ok)}",
        ]


def check_shift_invariance(u: ScatteringUnitary, trials: int = 100,
                           seed: int = 7, tol: float = 1e-12) -> AxiomReport:
    """Two-cell shifts commute with two-step evolutions on random states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = random_sparse_state(u.alphabet, rng)
        lhs = shift(evolve(psi, 2, u), 2)
        rhs = evolve(shift(psi, 2), 2, u)
        worst = max(worst, state_deviation(lhs, rhs))
    return AxiomReport("shift-invariance", u.name, trials, seed, worst, tol)


@dataclass
class ReducedState:
    """A density operator over a cell interval, stored sparsely."""

    region: tuple[int, int]
    entries: dict[tuple[tuple[Cell, ...], tuple[Cell, ...]], complex]

    def trace(self) -> complex:
        return sum(v for (a, b), v in self.entries.items() if a == b)


def reduced_state(state: SparseState, lo: int, hi: int) -> ReducedState:
    """Partial trace of a pure sparse state onto cells [lo, hi)."""
    alphabet = state.alphabet
    q = alphabet.quiescent
    groups: dict[tuple, dict[tuple[Cell, ...], complex]] = {}
    for config, amp in state.terms.items():
        inside = tuple(config.cell_at(i, q) for i in range(lo, hi))
        outside_cells = [
            (i, config.cell_at(i, q))
            for i in range(*config.support)
            if not lo <= i < hi and config.cell_at(i, q) != q
        ]
        key = tuple(outside_cells)
        groups.setdefault(key, {})[inside] = (
            groups.get(key, {}).get(inside, 0j) + amp
        )
    entries: dict[tuple[tuple[Cell, ...], tuple[Cell, ...]], complex] = {}
    for bucket in groups.values():
        for a, va in bucket.items():
            for b, vb in bucket.items():
                k = (a, b)
                entries[k] = entries.get(k, 0j) + va * vb.conjugate()
    return ReducedState((lo, hi), entries)


def reduced_deviation(a: ReducedState, b: ReducedState) -> float:
    keys = set(a.entries) | set(b.entries)
    return max(
        (abs(a.entries.get(k, 0j) - b.entries.get(k, 0j)) for k in keys),
        default=0.0,
    )


def _random_local_state(alphabet: Alphabet, rng, positions) -> dict[Configuration, complex]:
    terms: dict[Configuration, complex] = {}
    for _ in range(2):
        cells = {
            p: tuple(int(rng.integers(0, s)) for s in alphabet.subsystem_sizes)
            for p in positions
        }
        lo, hi = min(positions), max(positions) + 1
        word = [cells.get(i, alphabet.quiescent) for i in range(lo, hi)]
        config = canonicalize(alphabet, lo, word)
        amp = complex(rng.standard_normal(), rng.standard_normal())
        terms[config] = terms.get(config, 0j) + amp
    return terms


def _product_state(alphabet: Alphabet, part_a, part_b) -> SparseState:
    terms: dict[Configuration, complex] = {}
    for ca, aa in part_a.items():
        for cb, ab in part_b.items():
            lo = min(ca.support[0], cb.support[0])
            hi = max(ca.support[1], cb.support[1])
            q = alphabet.quiescent
            cells = []
            for i in range(lo, hi):
                xa = ca.cell_at(i, q)
                xb = cb.cell_at(i, q)
                cells.append(xa if xb == q else xb)
            config = canonicalize(alphabet, lo, cells)
            terms[config] = terms.get(config, 0j) + aa * ab
    return SparseState.from_terms(alphabet, terms, normalize=True)


def check_causality(u: ScatteringUnitary, trials: int = 200, seed: int = 11,
                    tol: float = 1e-9, step_fn=None) -> AxiomReport:
    """Radius-1/2 causality: equal reduced inputs on a pair give equal outputs.

    Pairs of pure states share their restriction to the pair {i, i+1} by
    construction (they are products across that cut); after one aligned step
    the reduced states at cell i must agree.  ``step_fn`` substitutes the
    evolution under test (used to exhibit violations for non-causal maps).
    """
    rng = np.random.default_rng(seed)
    if step_fn is None:
        step_fn = lambda state: step(state, 0, u)
    worst = 0.0
    for _ in range(trials):
        i = 2 * int(rng.integers(-2, 3))
        shared = _random_local_state(u.alphabet, rng, [i, i + 1])
        env_positions = [i - 2, i - 1, i + 2]
        env1 = _random_local_state(u.alphabet, rng, env_positions)
        env2 = _random_local_state(u.alphabet, rng, env_positions)
        psi1 = _product_state(u.alphabet, shared, env1)
        psi2 = _product_state(u.alphabet, shared, env2)
        rho1 = reduced_state(step_fn(psi1), i, i + 1)
        rho2 = reduced_state(step_fn(psi2), i, i + 1)
        worst = max(worst, reduced_deviation(rho1, rho2))
    return AxiomReport("causality", u.name, trials, seed, worst, tol)


# ---------------------------------------------------------------------------
# End-to-end comparison against the direct oracle


@dataclass
class FidelityReport:
    flavour: str
    circuit: CircuitDesc
    macro_steps: int
    fidelities: list[float] = field(default_factory=list)
    tolerance: float = 1e-9

    @property
    def epsilon(self) -> float:
        return max((1.0 - f for f in self.fidelities), default=0.0)

    @property
    def ok(self) -> bool:
        return self.epsilon <= self.tolerance

    def lines(self) -> list[str]:
        out = [
            f"check=simulate-{self.flavour}",
            f"width={self.circuit.width}",
            f"gates={self.circuit.m}",
            f"macro_steps={self.macro_steps}",
        ]
        out.extend(
            f"fidelity_{k + 1}={f:.12f}" for k, f in enumerate(self.fidelities)
        )
        out.append(f"epsilon={self.epsilon:.3e}")
        out.append(f"tolerance={self.tolerance:.1e}")
        out.append(f"pass={int(self.ok)}")
        return out


def compare_simulation(circuit: CircuitDesc, phi: SimulatedState, flavour: str,
                       macro_steps: int, tol: float = 1e-9) -> FidelityReport:
    """Encode, evolve, decode at every macro multiple, and compare to the oracle."""
    t = expansion_factors(circuit)[1]
    if flavour == "weak":
        from .compile_weak import decode_weak as decode, encode_qca_weak
        from .weak import weak_scattering

        u = weak_scattering()
        state, layout = encode_qca_weak(circuit, phi, horizon=macro_steps * t)
    elif flavour == "strong":
        from .compile_strong import decode_strong as decode, encode_qca_strong
        from .strong import strong_scattering

        u = strong_scattering()
        state, layout = encode_qca_strong(circuit, phi)
    else:
        raise UQCAError(f"unknown flavour {flavour!r}")
    report = FidelityReport(flavour, circuit, macro_steps, tolerance=tol)
    current = state
    for k in range(1, macro_steps + 1):
        current = evolve(current, t, u, first_parity=((k - 1) * t) % 2)
        decoded, _ = decode(current, layout, k)
        expected = oracle_evolve(circuit, phi, k)
        report.fidelities.append(sim_fidelity(expected, decoded))
    return report


def perturbed_weak_scattering(gate_name: str, eps: float, seed: int = 3) -> ScatteringUnitary:
    """The weak machine with one collision entry replaced by an eps-rotated one."""
    from .core import WEAK
    from .gates import M_COLLISION_TABLE
    from .weak import DATA, MODE, PROG, interaction_gates

    rng = np.random.default_rng(seed)
    herm = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    herm = (herm + herm.conj().T) / 2
    herm /= np.abs(np.linalg.eigvalsh(herm)).max()
    vals, vecs = np.linalg.eigh(herm)
    rot = (vecs * np.exp(1j * eps * vals)) @ vecs.conj().T

    pair_dims = WEAK.subsystem_sizes * 2
    gates = interaction_gates(pair_dims, (DATA, PROG, MODE),
                              (DATA + 3, PROG + 3, MODE + 3))
    from .weak import _m_matrix

    for i, g in enumerate(gates):
        if getattr(g, "name", "") == "collision":
            table = {}
            for key, name in M_COLLISION_TABLE.items():
                mat = _m_matrix(name)
                if name == gate_name:
                    lift = np.eye(9, dtype=complex)
                    occ = [(1, 1), (1, 2), (2, 1), (2, 2)]
                    for col, (a, b) in enumerate(occ):
                        j = 3 * a + b
                        lift[:, j] = 0
                        for row, (c, e) in enumerate(occ):
                            lift[3 * c + e, j] = rot[row, col]
                    mat = lift @ mat
                table[key] = mat
            gates[i] = TableGate(pair_dims, g.controls, g.targets, table,
                                 name="collision-perturbed")
    return ScatteringUnitary(WEAK, gates, name=f"weak-perturbed-{gate_name}")
