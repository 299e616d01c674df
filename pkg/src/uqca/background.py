"""Classical reference runs: the permutation automaton behind a quantum tape.

Programs, modes and the walls/counters of the strong machine never depend on
data values, and data occupancy moves deterministically; so running the same
tape with collisions value-suppressed yields, for every step, the exact
background digits and data positions of the full quantum run.  Decoders use
this as their independent expected-background oracle.
"""

from __future__ import annotations

from .core import (
    Configuration,
    ScatteringUnitary,
    SparseState,
    UQCAError,
    step,
)


class ClassicalRun:
    """Deterministic evolution of one basis configuration, cached per step."""

    def __init__(self, tape: Configuration, unitary: ScatteringUnitary):
        self.unitary = unitary
        self._states: list[Configuration] = [tape]

    def at(self, steps: int) -> Configuration:
        if steps < 0:
            raise UQCAError("steps must be non-negative")
        while len(self._states) <= steps:
            k = len(self._states) - 1
            current = SparseState.basis(self.unitary.alphabet, self._states[-1])
            nxt = step(current, k % 2, self.unitary)
            if len(nxt.terms) != 1:
                raise UQCAError(
                    "classical reference run branched; the value-suppressed "
                    "unitary is not a permutation on this tape"
                )
            ((config, amp),) = nxt.terms.items()
            if abs(amp - 1.0) > 1e-12:
                raise UQCAError("classical reference run acquired a phase")
            self._states.append(config)
        return self._states[steps]


def occupied_positions(config: Configuration, data_slot: int) -> list[int]:
    """Tape positions whose data digit is non-zero, in tape order."""
    return [
        config.offset + i
        for i, cell in enumerate(config.cells)
        if cell[data_slot] != 0
    ]
