"""Tape representation, sparse superpositions, and the partitioned evolution engine.

Cells are tuples of small integer digits, one per subsystem.  A configuration
is a finite word of cells anchored at an integer offset on the line, quiescent
(all-zero) outside its stored window.  States are sparse maps from
configurations to complex amplitudes.  One engine step pads every term so the
alternating pairing covers it, applies the scattering unitary to each pair
independently, and merges the resulting branches.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

Cell = tuple[int, ...]

DEFAULT_PRUNE_THRESHOLD = 1e-14
NORM_TOL = 1e-10


class UQCAError(Exception):
    pass


class InvalidCellError(UQCAError):
    pass


class AlphabetMismatchError(UQCAError):
    pass


def prune_threshold() -> float:
    """Active amplitude prune threshold (UQCA_PRUNE overrides the default)."""
    raw = os.environ.get("UQCA_PRUNE")
    return float(raw) if raw else DEFAULT_PRUNE_THRESHOLD


@dataclass(frozen=True)
class Alphabet:
    """A cell alphabet: named subsystems with given dimensions.

    The quiescent cell is all-zeros.  Cells pack into one integer index with
    the first subsystem most significant, so packed order equals tuple order.
    """

    name: str
    subsystem_sizes: tuple[int, ...]
    subsystem_names: tuple[str, ...]

    def __post_init__(self):
        if len(self.subsystem_sizes) != len(self.subsystem_names):
            raise ValueError("one name per subsystem required")
        if any(s < 1 for s in self.subsystem_sizes):
            raise ValueError("subsystem sizes must be positive")

    @property
    def dim(self) -> int:
        return math.prod(self.subsystem_sizes)

    @property
    def quiescent(self) -> Cell:
        return (0,) * len(self.subsystem_sizes)

    def pack(self, cell: Cell) -> int:
        idx = 0
        for digit, size in zip(cell, self.subsystem_sizes):
            idx = idx * size + digit
        return idx

    def unpack(self, index: int) -> Cell:
        digits = []
        for size in reversed(self.subsystem_sizes):
            index, d = divmod(index, size)
            digits.append(d)
        return tuple(reversed(digits))

    def validate_cell(self, cell: Cell, position: int | None = None) -> None:
        if len(cell) != len(self.subsystem_sizes):
            raise InvalidCellError(
                f"cell {cell!r} has {len(cell)} digits, "
                f"alphabet {self.name!r} has {len(self.subsystem_sizes)} subsystems"
                + (f" (cell {position})" if position is not None else "")
            )
        for i, (digit, size) in enumerate(zip(cell, self.subsystem_sizes)):
            if not 0 <= digit < size:
                where = f" at cell {position}" if position is not None else ""
                raise InvalidCellError(
                    f"digit {digit} out of range for subsystem "
                    f"{self.subsystem_names[i]!r} (size {size}){where}"
                )


WEAK = Alphabet("weak", (3, 4, 3), ("data", "program", "mode"))
STRONG = Alphabet(
    "strong",
    (3, 3, 3, 4, 4, 4, 3, 3),
    ("counter", "data", "wall", "copy", "bouncer", "program", "mode", "history"),
)
# Cells of a directly simulated machine: 0 = quiescent, 1+b = qubit value b.
SIM = Alphabet("sim", (3,), ("data",))

_BUILTIN_ALPHABETS = {a.name: a for a in (WEAK, STRONG, SIM)}


def builtin_alphabet(name: str) -> Alphabet:
    try:
        return _BUILTIN_ALPHABETS[name]
    except KeyError:
        raise UQCAError(f"unknown alphabet {name!r}") from None


@dataclass(frozen=True)
class Configuration:
    """A finite word of cells at an integer offset, trimmed of quiescent tails."""

    offset: int
    cells: tuple[Cell, ...]

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def support(self) -> tuple[int, int]:
        """Half-open interval [start, end) of stored cells."""
        return (self.offset, self.offset + len(self.cells))

    def cell_at(self, i: int, quiescent: Cell) -> Cell:
        j = i - self.offset
        if 0 <= j < len(self.cells):
            return self.cells[j]
        return quiescent

    def sort_key(self, alphabet: Alphabet):
        return (self.offset, tuple(alphabet.pack(c) for c in self.cells))


def canonicalize(alphabet: Alphabet, offset: int, cells) -> Configuration:
    """Trim quiescent tails and validate digits; all-quiescent becomes empty at 0."""
    cells = list(cells)
    for i, cell in enumerate(cells):
        alphabet.validate_cell(tuple(cell), position=offset + i)
    q = alphabet.quiescent
    lo = 0
    hi = len(cells)
    while lo < hi and tuple(cells[lo]) == q:
        lo += 1
    while hi > lo and tuple(cells[hi - 1]) == q:
        hi -= 1
    if lo == hi:
        return Configuration(0, ())
    return Configuration(offset + lo, tuple(tuple(c) for c in cells[lo:hi]))


EMPTY_CONFIGURATION = Configuration(0, ())


@dataclass
class SparseState:
    """A normalized superposition of configurations over one alphabet."""

    alphabet: Alphabet
    terms: dict[Configuration, complex]

    @classmethod
    def from_terms(cls, alphabet: Alphabet, terms, normalize: bool = False,
                   check: bool = True) -> "SparseState":
        acc: dict[Configuration, complex] = {}
        for config, amp in dict(terms).items():
            if amp != 0:
                acc[config] = acc.get(config, 0j) + complex(amp)
        state = cls(alphabet, acc)
        if normalize:
            nrm = math.sqrt(state.norm_squared())
            if nrm == 0:
                raise UQCAError("cannot normalize the zero state")
            state = cls(alphabet, {c: a / nrm for c, a in acc.items()})
        if check and abs(state.norm_squared() - 1.0) > NORM_TOL:
            raise UQCAError(
                f"state norm^2 = {state.norm_squared():.3e} deviates from 1 "
                f"beyond {NORM_TOL}"
            )
        return state

    @classmethod
    def basis(cls, alphabet: Alphabet, config: Configuration) -> "SparseState":
        return cls(alphabet, {config: 1.0 + 0j})

    def norm_squared(self) -> float:
        return sum((a.real * a.real + a.imag * a.imag) for a in self.terms.values())

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key(self.alphabet))

    def prune(self, threshold: float | None = None) -> "SparseState":
        cut = prune_threshold() if threshold is None else threshold
        return SparseState(
            self.alphabet, {c: a for c, a in self.terms.items() if abs(a) > cut}
        )


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b> summed over shared configurations."""
    if a.alphabet is not b.alphabet and a.alphabet != b.alphabet:
        raise AlphabetMismatchError("inner product across different alphabets")
    if len(a.terms) > len(b.terms):
        return inner_product(b, a).conjugate()
    total = 0j
    for config, amp in a.terms.items():
        other = b.terms.get(config)
        if other is not None:
            total += amp.conjugate() * other
    return total


def shift(state: SparseState, k: int) -> SparseState:
    """Translate every configuration by k cells; amplitudes unchanged."""
    if k == 0:
        return SparseState(state.alphabet, dict(state.terms))
    return SparseState(
        state.alphabet,
        {
            Configuration(c.offset + k, c.cells) if c.cells else c: a
            for c, a in state.terms.items()
        },
    )


class ScatteringUnitary:
    """A two-cell unitary given structurally as an ordered stack of gate layers.

    Each gate exposes ``apply_basis(digits) -> {digits: amplitude}`` over the
    concatenated (x, y) subsystem digits.  Columns are computed lazily per
    basis pair and memoized; well-formed tapes touch only a small part of the
    pair space, so the full matrix is never required.
    """

    def __init__(self, alphabet: Alphabet, gates, name: str = ""):
        self.alphabet = alphabet
        self.gates = tuple(gates)
        self.name = name or "scattering"
        self._columns: dict[tuple[Cell, Cell], tuple] = {}

    def column(self, a: Cell, b: Cell):
        """Image of the basis pair |a,b> as a sorted tuple of ((a',b'), amp)."""
        key = (a, b)
        cached = self._columns.get(key)
        if cached is not None:
            return cached
        k = len(self.alphabet.subsystem_sizes)
        current = {a + b: 1.0 + 0j}
        for gate in self.gates:
            nxt: dict[tuple[int, ...], complex] = {}
            for digits, amp in current.items():
                for out, w in gate.apply_basis(digits).items():
                    nxt[out] = nxt.get(out, 0j) + amp * w
            current = {d: v for d, v in nxt.items() if v != 0}
        pack = self.alphabet.pack
        result = tuple(
            sorted(
                (((d[:k], d[k:]), v) for d, v in current.items()),
                key=lambda item: (pack(item[0][0]), pack(item[0][1])),
            )
        )
        self._columns[key] = result
        return result

    def fixes_quiescent(self) -> bool:
        q = self.alphabet.quiescent
        col = self.column(q, q)
        return len(col) == 1 and col[0][0] == (q, q) and abs(col[0][1] - 1.0) < 1e-15

    def is_permutation_column(self, a: Cell, b: Cell) -> bool:
        col = self.column(a, b)
        return len(col) == 1 and abs(col[0][1] - 1.0) < 1e-15


@dataclass
class Trajectory:
    """A recorded evolution: the initial state plus per-step snapshots."""

    initial: SparseState
    states: list[SparseState] = field(default_factory=list)
    parities: list[int] = field(default_factory=list)

    def all_states(self) -> list[SparseState]:
        return [self.initial, *self.states]


def step(state: SparseState, parity: int, u: ScatteringUnitary,
         threshold: float | None = None) -> SparseState:
    """One partitioned update: apply u to every pair (2i+parity, 2i+parity+1)."""
    if state.alphabet != u.alphabet:
        raise AlphabetMismatchError(
            f"state alphabet {state.alphabet.name!r} does not match "
            f"unitary alphabet {u.alphabet.name!r}"
        )
    if parity not in (0, 1):
        raise UQCAError("parity must be 0 or 1")
    alphabet = state.alphabet
    q = alphabet.quiescent
    out: dict[Configuration, complex] = {}
    for config, amp in state.sorted_terms():
        if not config.cells:
            out[config] = out.get(config, 0j) + amp
            continue
        start = config.offset
        if (start - parity) % 2:
            start -= 1
        end = config.offset + len(config.cells)
        if (end - parity) % 2:
            end += 1
        cells = [config.cell_at(i, q) for i in range(start, end)]
        columns = [u.column(cells[i], cells[i + 1]) for i in range(0, len(cells), 2)]
        base_amp = amp
        branch_slots = []
        resolved: list[tuple[Cell, Cell]] = []
        for col in columns:
            if len(col) == 1:
                pair, w = col[0]
                resolved.append(pair)
                base_amp *= w
            else:
                resolved.append(None)
                branch_slots.append(col)
        slot_positions = [i for i, r in enumerate(resolved) if r is None]
        for choice in itertools.product(*branch_slots):
            new_cells: list[Cell] = []
            branch_amp = base_amp
            it = iter(choice)
            for i, pair in enumerate(resolved):
                if pair is None:
                    pair, w = next(it)
                    branch_amp *= w
                new_cells.extend(pair)
            cfg = canonicalize(alphabet, start, new_cells)
            out[cfg] = out.get(cfg, 0j) + branch_amp
    return SparseState(alphabet, out).prune(threshold)


def evolve(state: SparseState, steps: int, u: ScatteringUnitary,
           record: bool = False, first_parity: int = 0,
           threshold: float | None = None):
    """Iterate ``step`` with alternating parity; optionally record snapshots."""
    if steps < 0:
        raise UQCAError("steps must be non-negative")
    traj = Trajectory(initial=state) if record else None
    current = state
    for k in range(steps):
        parity = (first_parity + k) % 2
        current = step(current, parity, u, threshold=threshold)
        if traj is not None:
            traj.states.append(current)
            traj.parities.append(parity)
    return traj if record else current


@dataclass(frozen=True)
class Supercell:
    """One block of a grouped view: s adjacent cells starting at ``start``."""

    start: int
    cells: tuple[Cell, ...]
    quiescent: bool


def group_view(config: Configuration, s: int, anchor: int,
               alphabet: Alphabet) -> list[Supercell]:
    """Regroup a configuration into blocks of s cells aligned to ``anchor``."""
    if s < 1:
        raise UQCAError("supercell size must be >= 1")
    if not config.cells:
        return []
    q = alphabet.quiescent
    lo, hi = config.support
    first = anchor + ((lo - anchor) // s) * s
    blocks = []
    pos = first
    while pos < hi:
        cells = tuple(config.cell_at(pos + j, q) for j in range(s))
        blocks.append(Supercell(pos, cells, all(c == q for c in cells)))
        pos += s
    return blocks
