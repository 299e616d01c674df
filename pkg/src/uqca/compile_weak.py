"""Compile circuits and simulated states into weak-machine tapes, and back.

Two encodings are provided.  The repeated encoding lays one supercell
[separator | descriptor zone | separator | data zone] per simulated cell
pair, plus enough background-only periods on each side to stand in for the
periodic tape over the requested horizon.  The single-shot encoding stacks
all gate descriptors outward of one data zone and plays the circuit once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .background import ClassicalRun, occupied_positions
from .circuits import CircuitDesc, SimulatedState, expansion_factors
from .core import (
    Cell,
    Configuration,
    SparseState,
    UQCAError,
    WEAK,
    canonicalize,
)
from .gates import GATE_LEFT_CODE, GATE_RIGHT_CODE
from .weak import DATA, weak_scattering

FILLER: Cell = (0, 0, 1)      # empty middle-grey cell
SEPARATOR: Cell = (0, 1, 1)   # change-colour signal delimiting zones


class DecodeError(UQCAError):
    pass


class AlignmentError(UQCAError):
    pass


def encode_data_word(bits) -> list[Cell]:
    """Qubit basis values to data cells: b -> (b+1, 0, 0)."""
    return [(int(b) + 1, 0, 0) for b in bits]


def encode_gate_qca(name: str, position: int, n: int) -> tuple[list[Cell], list[Cell]]:
    """Left and right descriptor words (2n cells each) for the repeated encoding."""
    if abs(position) > n - 1:
        raise UQCAError(f"gate position {position} out of range for n={n}")
    l_code = (0, GATE_LEFT_CODE[name], 1)
    r_code = (0, GATE_RIGHT_CODE[name], 1)
    if position <= 0:
        l_word = [FILLER] * (2 * n - 1 - abs(position)) + [l_code] + [FILLER] * abs(position)
        r_word = [r_code] + [FILLER] * (2 * n - 1)
    else:
        l_word = [FILLER] * (2 * n - 1) + [l_code]
        r_word = [FILLER] * position + [r_code] + [FILLER] * (2 * n - 1 - position)
    return l_word, r_word


def encode_gate_once(name: str, position: int, n: int) -> tuple[list[Cell], list[Cell]]:
    """Left and right descriptor words (4n cells each) for the single-shot encoding."""
    if abs(position) > n - 1:
        raise UQCAError(f"gate position {position} out of range for n={n}")
    l_code = (0, GATE_LEFT_CODE[name], 1)
    r_code = (0, GATE_RIGHT_CODE[name], 1)
    if position <= 0:
        l_word = [FILLER] * (4 * n - 1 - 2 * abs(position)) + [l_code] + [FILLER] * (2 * abs(position))
        r_word = [r_code] + [FILLER] * (4 * n - 1)
    else:
        l_word = [FILLER] * (4 * n - 1) + [l_code]
        r_word = [FILLER] * (2 * position) + [r_code] + [FILLER] * (4 * n - 1 - 2 * position)
    return l_word, r_word


def descriptor_zone(circuit: CircuitDesc) -> list[Cell]:
    """The 4nm-cell interleaved descriptor zone w of one supercell.

    Left-moving (right-half) descriptors occupy even zone offsets, right-moving
    (left-half) descriptors odd ones; with supercells anchored at even tape
    offsets this parks every descriptor on the parity class that carries it
    over the data.
    """
    n = circuit.n
    l_cells: list[Cell] = []
    for g in reversed(circuit.gates):
        l_cells.extend(encode_gate_qca(g.name, g.position, n)[0])
    r_cells: list[Cell] = []
    for g in circuit.gates:
        r_cells.extend(encode_gate_qca(g.name, g.position, n)[1])
    zone: list[Cell] = []
    for r_cell, l_cell in zip(r_cells, l_cells):
        zone.extend((r_cell, l_cell))
    return zone


def supercell_word(circuit: CircuitDesc, data_cells) -> list[Cell]:
    data_cells = list(data_cells)
    if len(data_cells) != 2 * circuit.n:
        raise UQCAError("data zone must hold 2n cells")
    return [SEPARATOR] + descriptor_zone(circuit) + [SEPARATOR] + data_cells


@dataclass
class WeakLayout:
    """Geometry of an encoded tape plus its classical reference run."""

    circuit: CircuitDesc
    kind: str                  # "qca" or "once"
    s: int
    t: int
    n_pairs: int
    pad_periods: int
    tape_start: int
    qubit_offset: int
    horizon: int
    reference_tape: Configuration
    _run: ClassicalRun | None = field(default=None, repr=False)

    @property
    def macro_steps(self) -> int:
        return self.t if self.kind == "qca" else 4 * self.circuit.n * self.circuit.m

    @property
    def data_qubits(self) -> int:
        return 2 * self.circuit.n * self.n_pairs

    def reference(self) -> ClassicalRun:
        if self._run is None:
            self._run = ClassicalRun(self.reference_tape, weak_scattering(classical=True))
        return self._run

    def background_at(self, steps: int) -> Configuration:
        return self.reference().at(steps)

    def data_positions(self, steps: int) -> list[int]:
        positions = occupied_positions(self.background_at(steps), DATA)
        if len(positions) != self.data_qubits:
            raise DecodeError(
                f"reference run holds {len(positions)} data cells at step {steps}, "
                f"expected {self.data_qubits}; horizon exceeded?"
            )
        return positions


def _check_phi(circuit: CircuitDesc, phi: SimulatedState) -> int:
    n = circuit.n
    if phi.offset % (2 * n) or phi.width % (2 * n):
        raise AlignmentError(
            f"simulated state must cover whole cell pairs: offset and width "
            f"must be multiples of {2 * n}"
        )
    if abs(phi.norm_squared() - 1.0) > 1e-9:
        raise UQCAError("simulated state is not normalized")
    return phi.width // (2 * n)


def encode_qca_weak(circuit: CircuitDesc, phi: SimulatedState,
                    horizon: int = 0) -> tuple[SparseState, WeakLayout]:
    """Repeated encoding: one supercell per simulated pair plus padding periods."""
    if horizon < 0:
        raise UQCAError("horizon must be non-negative")
    n = circuit.n
    s, t = expansion_factors(circuit)
    n_pairs = _check_phi(circuit, phi)
    pads = -(-horizon // t) + 1
    tape_start = -pads * s

    def tape_for(word) -> Configuration:
        cells: list[Cell] = []
        for k in range(-pads, n_pairs + pads):
            if 0 <= k < n_pairs:
                data = encode_data_word(word[2 * n * k: 2 * n * (k + 1)])
            else:
                data = [WEAK.quiescent] * (2 * n)
            cells.extend(supercell_word(circuit, data))
        return canonicalize(WEAK, tape_start, cells)

    terms = {tape_for(word): amp for word, amp in phi.terms.items()}
    state = SparseState.from_terms(WEAK, terms)
    reference = tape_for((0,) * phi.width) if n_pairs else tape_for(())
    layout = WeakLayout(
        circuit=circuit,
        kind="qca",
        s=s,
        t=t,
        n_pairs=n_pairs,
        pad_periods=pads,
        tape_start=tape_start,
        qubit_offset=phi.offset,
        horizon=pads * t,
        reference_tape=reference,
    )
    return state, layout


def encode_circuit_once(circuit: CircuitDesc,
                        psi: SimulatedState) -> tuple[SparseState, WeakLayout]:
    """Single-shot encoding: descriptors stacked outward of one 2n-cell data zone."""
    n, m = circuit.n, circuit.m
    if psi.width != 2 * n:
        raise AlignmentError(f"single-shot input must be one {2 * n}-qubit word")
    tape_start = 1  # descriptors must ride the movers matching their side

    def tape_for(word) -> Configuration:
        left: list[Cell] = []
        for g in reversed(circuit.gates):
            left.extend(encode_gate_once(g.name, g.position, n)[0])
        right: list[Cell] = []
        for g in circuit.gates:
            right.extend(encode_gate_once(g.name, g.position, n)[1])
        return canonicalize(
            WEAK, tape_start, left + encode_data_word(word) + right
        )

    terms = {tape_for(word): amp for word, amp in psi.terms.items()}
    state = SparseState.from_terms(WEAK, terms)
    s, t = expansion_factors(circuit)
    layout = WeakLayout(
        circuit=circuit,
        kind="once",
        s=s,
        t=t,
        n_pairs=1,
        pad_periods=0,
        tape_start=tape_start,
        qubit_offset=psi.offset,
        horizon=4 * n * m + 2 * n - 1,
        reference_tape=tape_for((0,) * psi.width),
    )
    return state, layout


@dataclass
class DecodeReport:
    steps: int
    projection_deficit: float
    kept_terms: int
    dropped_terms: int
    positions: list[int]

    def lines(self) -> list[str]:
        return [
            f"steps={self.steps}",
            f"projection_deficit={self.projection_deficit:.3e}",
            f"kept_terms={self.kept_terms}",
            f"dropped_terms={self.dropped_terms}",
        ]


def decode_weak(state: SparseState, layout: WeakLayout, macro_steps: int,
                tol: float = 1e-10) -> tuple[SimulatedState, DecodeReport]:
    """Project onto the expected background and read the data digits in order."""
    if macro_steps < 0:
        raise AlignmentError("macro step count must be non-negative")
    steps = macro_steps * layout.macro_steps
    if steps > layout.horizon:
        raise AlignmentError(
            f"{macro_steps} macro steps = {steps} engine steps exceed the "
            f"encoded horizon {layout.horizon}"
        )
    expected = layout.background_at(steps)
    positions = layout.data_positions(steps)
    q = WEAK.quiescent
    kept: dict[tuple[int, ...], complex] = {}
    kept_mass = 0.0
    dropped = 0
    first_mismatch: tuple[int, Cell, Cell] | None = None
    for config, amp in state.sorted_terms():
        lo = min(config.support[0], expected.support[0])
        hi = max(config.support[1], expected.support[1])
        word: list[int] = []
        mismatch = None
        for i in range(lo, hi):
            got = config.cell_at(i, q)
            want = expected.cell_at(i, q)
            if got[1:] != want[1:] or (got[DATA] == 0) != (want[DATA] == 0):
                mismatch = (i, got, want)
                break
        if mismatch is None:
            bits = tuple(config.cell_at(i, q)[DATA] - 1 for i in positions)
            kept[bits] = kept.get(bits, 0j) + amp
            kept_mass += abs(amp) ** 2
        else:
            dropped += 1
            if first_mismatch is None:
                first_mismatch = mismatch
    deficit = 1.0 - kept_mass
    if deficit > tol:
        where = ""
        if first_mismatch is not None:
            i, got, want = first_mismatch
            where = f"; first mismatch at cell {i}: got {got}, expected {want}"
        raise DecodeError(
            f"background projection deficit {deficit:.3e} exceeds {tol:.1e}"
            + where
        )
    scale = 1.0 / math.sqrt(kept_mass)
    sim = SimulatedState.from_terms(
        layout.qubit_offset,
        layout.data_qubits,
        {w: a * scale for w, a in kept.items()},
    )
    report = DecodeReport(
        steps=steps,
        projection_deficit=deficit,
        kept_terms=len(kept),
        dropped_terms=dropped,
        positions=positions,
    )
    return sim, report
