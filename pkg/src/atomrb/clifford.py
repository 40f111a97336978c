"""The 24-gate single-qubit Clifford set as run on the hardware.

Gates 0-3 are pure virtual-Z frame shifts, 4-9 are single resonant pulses
and 10-23 are products of those. Each gate stores its literal reference
matrix (with the table's global phase) next to an explicit pulse recipe.
Recipe phases are DDS phases; a pulse with DDS phase ``p`` rotates about
axis angle ``-p``.

Virtual Z gates are compiled by shifting the DDS phase of every later pulse
by the accumulated frame angle. The physical evolution of a compiled string
is therefore ``Rz(frame) @ prod(pulses)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from atomrb.pulses import RABI_DEFAULT, PhysicalPulse, simulate_sequence
from atomrb.su2 import KET0, KET1, I2, rotation, rotation_z

PI = np.pi
_R2 = 1 / np.sqrt(2)
_EM = np.exp(-1j * PI / 4)
_EP = np.exp(1j * PI / 4)


def _m(scale, rows):
    return scale * np.array(rows, dtype=complex)


@dataclass(frozen=True)
class CliffordGate:
    index: int
    unitary: np.ndarray = field(repr=False)
    # (area, dds_phase) in temporal order
    recipe: tuple[tuple[float, float], ...]
    offset: float
    basic_sequence: tuple[int, ...] = ()

    @property
    def area(self) -> float:
        return float(sum(a for a, _ in self.recipe))

    @property
    def n_pulses(self) -> int:
        return len(self.recipe)

    def recipe_unitary(self) -> np.ndarray:
        """Ideal unitary implied by the recipe and its trailing frame shift."""
        u = I2.copy()
        for area, dds in self.recipe:
            u = rotation(-dds, area) @ u
        return rotation_z(self.offset) @ u


# Basic Gate Sequence column is in matrix-product order (rightmost first in time).
GATES: tuple[CliffordGate, ...] = (
    CliffordGate(0, _m(1, [[1, 0], [0, 1]]), (), 0.0),
    CliffordGate(1, _m(_EM, [[1, 0], [0, 1j]]), (), PI / 2),
    CliffordGate(2, _m(-1j, [[1, 0], [0, -1]]), (), PI),
    CliffordGate(3, _m(_EP, [[1, 0], [0, -1j]]), (), -PI / 2),
    CliffordGate(4, _m(_R2, [[1, -1], [1, 1]]), ((PI / 2, -PI / 2),), 0.0),
    CliffordGate(5, _m(-1, [[0, 1], [-1, 0]]), ((PI, -PI / 2),), 0.0),
    CliffordGate(6, _m(_R2, [[1, 1], [-1, 1]]), ((PI / 2, PI / 2),), 0.0),
    CliffordGate(7, _m(_R2, [[1, -1j], [-1j, 1]]), ((PI / 2, 0.0),), 0.0),
    CliffordGate(8, _m(-1j, [[0, 1], [1, 0]]), ((PI, 0.0),), 0.0),
    CliffordGate(9, _m(_R2, [[1, 1j], [1j, 1]]), ((PI / 2, PI),), 0.0),
    CliffordGate(10, _m(-_EP, [[0, 1], [1j, 0]]), ((PI, 0.0),), PI / 2, (5, 1)),
    CliffordGate(11, _m(_EP, [[0, 1], [-1j, 0]]), ((PI, PI / 2),), PI / 2, (8, 1)),
    CliffordGate(12, _m(-1j * _R2, [[1, 1], [1, -1]]), ((PI / 2, -PI / 2), (PI, 0.0)), 0.0, (8, 4)),
    CliffordGate(13, _m(_EM * _R2, [[1, 1], [-1j, 1j]]), ((PI / 2, PI / 2),), PI / 2, (7, 1)),
    CliffordGate(14, _m(-_EP * _R2, [[1, 1], [1j, -1j]]), ((PI, 0.0), (PI / 2, PI / 2)), PI / 2, (7, 5, 1)),
    CliffordGate(15, _m(1j * _R2, [[1, -1], [-1, -1]]), ((PI / 2, PI / 2), (PI, 0.0)), 0.0, (8, 6)),
    CliffordGate(16, _m(_EM * _R2, [[1, -1], [1j, 1j]]), ((PI / 2, -PI / 2),), PI / 2, (9, 1)),
    CliffordGate(17, _m(_EP * _R2, [[1, -1], [-1j, -1j]]), ((PI, 0.0), (PI / 2, -PI / 2)), PI / 2, (9, 5, 1)),
    CliffordGate(18, _m(_EM * _R2, [[1, 1j], [-1, 1j]]), ((PI / 2, PI / 2), (PI / 2, PI)), 0.0, (9, 6)),
    CliffordGate(19, _m(_EP * _R2, [[1, 1j], [1, -1j]]), ((PI / 2, -PI / 2), (PI / 2, PI)), 0.0, (9, 4)),
    CliffordGate(20, _m(1j * _R2, [[1, 1j], [-1j, -1]]), ((PI, -PI / 2), (PI / 2, PI)), 0.0, (9, 5)),
    CliffordGate(21, _m(_EP * _R2, [[1, -1j], [-1, -1j]]), ((PI / 2, PI / 2), (PI / 2, 0.0)), 0.0, (7, 6)),
    CliffordGate(22, _m(-1j * _R2, [[1, -1j], [1j, -1]]), ((PI, -PI / 2), (PI / 2, 0.0)), 0.0, (7, 5)),
    CliffordGate(23, _m(_EM * _R2, [[1, -1j], [1, 1j]]), ((PI / 2, -PI / 2), (PI / 2, 0.0)), 0.0, (7, 4)),
)

N_GATES = len(GATES)


def _check_index(index: int) -> int:
    if not 0 <= int(index) < N_GATES:
        raise IndexError(f"Clifford index {index} out of range 0..{N_GATES - 1}")
    return int(index)


def gate_unitary(index: int) -> np.ndarray:
    return GATES[_check_index(index)].unitary.copy()


@dataclass(frozen=True)
class PhaseFrame:
    """Accumulated virtual-Z angle, kept in [0, 2 pi)."""

    angle: float = 0.0

    def shifted(self, delta: float) -> "PhaseFrame":
        return PhaseFrame(float(np.mod(self.angle + delta, 2 * PI)))


def compile_gate(
    index: int, frame: PhaseFrame = PhaseFrame(), rabi: float = RABI_DEFAULT
) -> tuple[list[PhysicalPulse], PhaseFrame]:
    """Emit the physical pulses of one gate in the current frame.

    Each pulse carries DDS phase ``recipe phase + frame angle``; the frame
    then advances by the gate's offset.
    """
    gate = GATES[_check_index(index)]
    pulses = [PhysicalPulse(-(dds + frame.angle), area, rabi) for area, dds in gate.recipe]
    return pulses, frame.shifted(gate.offset)


def compile_string(
    indices: Iterable[int], frame: PhaseFrame = PhaseFrame(), rabi: float = RABI_DEFAULT
) -> tuple[list[list[PhysicalPulse]], PhaseFrame]:
    """Compile a gate string; returns per-gate pulse lists and the final frame."""
    out = []
    for g in indices:
        pulses, frame = compile_gate(g, frame, rabi)
        out.append(pulses)
    return out, frame


def compiled_unitary(indices: Sequence[int], bb1: bool = False) -> np.ndarray:
    """Noiseless unitary of the frame-tracked physical pulse train."""
    per_gate, frame = compile_string(indices)
    pulses = [p for gate in per_gate for p in gate]
    return rotation_z(frame.angle) @ simulate_sequence(pulses, bb1=bb1)


def sequence_unitary(indices: Sequence[int]) -> np.ndarray:
    """Product of table matrices; the first index acts first."""
    u = I2.copy()
    for g in indices:
        u = GATES[_check_index(g)].unitary @ u
    return u


_KETS = (KET0, KET1)


def recovery_gate(indices: Sequence[int], initial: int = 0, target: int = 0) -> int:
    """Clifford that sends ``|initial>`` through the string to ``|target>``.

    Among all gates that do so, the one with the least physical pulse area
    wins, ties going to the lowest index.
    """
    state = sequence_unitary(indices) @ _KETS[initial]
    best = None
    for gate in GATES:
        amp = (gate.unitary @ state)[target]
        if abs(amp) ** 2 >= 1 - 1e-9:
            key = (gate.area, gate.index)
            if best is None or key < best:
                best = key
    assert best is not None, "Clifford group closure violated"
    return best[1]


def random_string(length: int, rng: np.random.Generator | int | None) -> list[int]:
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = np.random.default_rng(rng)
    return [int(g) for g in rng.integers(0, N_GATES, size=length)]


def average_gate_area(bb1: bool = True) -> float:
    """Mean total pulse area per gate in radians.

    With ``bb1`` every physical pulse of area ``a`` costs ``a + 4 pi``.
    """
    total = 0.0
    for gate in GATES:
        total += gate.area + (4 * PI * gate.n_pulses if bb1 else 0.0)
    return total / N_GATES


def product_index(i: int, j: int) -> int:
    """Index ``k`` with ``U_k ~ U_i @ U_j`` up to global phase."""
    from atomrb.su2 import equal_up_to_global_phase

    u = GATES[i].unitary @ GATES[j].unitary
    for gate in GATES:
        if equal_up_to_global_phase(u, gate.unitary, 1e-9):
            return gate.index
    raise ValueError(f"product of gates {i} and {j} is not in the table")


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def table_to_json(gates: Sequence[CliffordGate] = GATES) -> str:
    rows = []
    for g in gates:
        rows.append(
            {
                "index": g.index,
                "pulses": [{"area": a, "dds_phase": p} for a, p in g.recipe],
                "offset": g.offset,
                "basic_sequence": list(g.basic_sequence),
                "unitary": [_cx(z) for z in g.unitary.ravel()],
            }
        )
    return json.dumps(rows, indent=1)


def table_from_json(text: str) -> tuple[CliffordGate, ...]:
    gates = []
    for row in json.loads(text):
        u = np.array([complex(re, im) for re, im in row["unitary"]]).reshape(2, 2)
        recipe = tuple((float(p["area"]), float(p["dds_phase"])) for p in row["pulses"])
        gates.append(
            CliffordGate(int(row["index"]), u, recipe, float(row["offset"]), tuple(row["basic_sequence"]))
        )
    return tuple(gates)


def strings_to_json(strings: Sequence[Sequence[int]]) -> str:
    return json.dumps([list(map(int, s)) for s in strings])


def strings_from_json(text: str) -> list[list[int]]:
    strings = json.loads(text)
    for s in strings:
        for g in s:
            _check_index(g)
    return [list(map(int, s)) for s in strings]
