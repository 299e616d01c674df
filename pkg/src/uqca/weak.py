"""The 36-dimensional universal machine: its scattering unitary as gate layers."""

from __future__ import annotations

import numpy as np

from .core import WEAK, ScatteringUnitary
from .gates import (
    ControlledSwap,
    M_COLLISION_TABLE,
    TableGate,
    dense_matrix,
    native_gate,
)

# Subsystem slots within one weak cell.
DATA, PROG, MODE = 0, 1, 2

CHANGE_COLOUR = 1          # program value that increments crossing modes
DATA_EMPTY, DATA_ZERO, DATA_ONE = 0, 1, 2


def _plus1_mod3() -> np.ndarray:
    return np.roll(np.eye(3, dtype=complex), 1, axis=0)


def _s_matrix() -> np.ndarray:
    """Move a lone data value into the empty partner cell: 01<->10, 02<->20."""
    mat = np.eye(9, dtype=complex)
    for a, b in (((0, 1), (1, 0)), ((0, 2), (2, 0))):
        i, j = 3 * a[0] + a[1], 3 * b[0] + b[1]
        mat[[i, j]] = mat[[j, i]]
    return mat


def _m_matrix(gate_name: str) -> np.ndarray:
    """Embed a native two-qubit gate on occupied data pairs; empty cells inert."""
    mat = np.eye(9, dtype=complex)
    native = native_gate(gate_name)
    occupied = [(1, 1), (1, 2), (2, 1), (2, 2)]
    for col, (a, b) in enumerate(occupied):
        j = 3 * a + b
        mat[:, j] = 0
        for row, (c, d) in enumerate(occupied):
            mat[3 * c + d, j] = native[row, col]
    return mat


def interaction_gates(pair_dims, x, y, classical: bool = False):
    """The weak machine's layer stack over (data, program, mode) slots x / y.

    ``x`` and ``y`` give the indices of the three subsystems within the pair's
    concatenated digit tuple, so the same stack embeds into larger cells.
    With ``classical`` the collision layer is dropped, leaving a permutation
    automaton whose non-data digits predict the full machine's background.
    """
    x_data, x_prog, x_mode = x
    y_data, y_prog, y_mode = y
    plus1 = _plus1_mod3()
    gates = [
        TableGate(pair_dims, (x_prog,), (y_mode,), {(CHANGE_COLOUR,): plus1},
                  name="colour-x"),
        TableGate(pair_dims, (y_prog,), (x_mode,), {(CHANGE_COLOUR,): plus1},
                  name="colour-y"),
        TableGate(pair_dims, (x_prog, y_prog, x_mode, y_mode), (x_data, y_data),
                  {(0, 0, 0, 0): _s_matrix()}, name="shuttle"),
    ]
    if not classical:
        gates.append(
            TableGate(
                pair_dims,
                (x_prog, y_prog),
                (x_data, y_data),
                {key: _m_matrix(name) for key, name in M_COLLISION_TABLE.items()},
                name="collision",
            )
        )
    gates.append(
        ControlledSwap(pair_dims, (), {()}, (x_prog, x_mode), (y_prog, y_mode),
                       name="transport")
    )
    return gates


_CACHE: dict[bool, ScatteringUnitary] = {}


def weak_scattering(classical: bool = False) -> ScatteringUnitary:
    """The weak machine's scattering unitary (shared, columns memoized)."""
    u = _CACHE.get(classical)
    if u is None:
        pair_dims = WEAK.subsystem_sizes * 2
        u = ScatteringUnitary(
            WEAK,
            interaction_gates(pair_dims, (DATA, PROG, MODE),
                              (DATA + 3, PROG + 3, MODE + 3), classical=classical),
            name="weak-classical" if classical else "weak",
        )
        _CACHE[classical] = u
    return u


def weak_dense() -> np.ndarray:
    """The 1296x1296 dense realization, assembled column by column."""
    return dense_matrix(weak_scattering())
