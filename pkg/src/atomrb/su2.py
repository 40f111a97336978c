"""Complex 2x2 linear algebra for a single qubit.

Unitaries are plain ``(2, 2)`` complex ndarrays and states are ``(2,)``
complex ndarrays ordered as ``(c0, c1)`` with ``|0> = |F=3, mF=0>`` and
``|1> = |F=4, mF=0>``.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def rotation(phi: float, theta: float) -> np.ndarray:
    """Rotation by ``theta`` about the equatorial axis at azimuth ``phi``.

    Returns ``exp(-i theta/2 (cos(phi) X + sin(phi) Y))``. ``phi = 0`` is the
    x axis and ``phi = pi/2`` the y axis.
    """
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    # -i s (cos X + sin Y) has off-diagonals -i s e^{-i phi} and -i s e^{i phi}
    return np.array(
        [[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]],
        dtype=complex,
    )


def rotation_z(theta: float) -> np.ndarray:
    """``exp(-i theta/2 Z)``, i.e. ``diag(1, e^{i theta})`` up to global phase."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def apply(u: np.ndarray, state: np.ndarray) -> np.ndarray:
    out = u @ state
    # renormalise to absorb rounding drift over long products
    return out / np.linalg.norm(out)


def population0(state: np.ndarray) -> float:
    return float(abs(state[0]) ** 2)


def global_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Max-entry distance between ``u`` and ``v`` after aligning global phase.

    The phase is taken from ``Tr(v^dagger u)``; if the trace vanishes the
    matrices cannot be proportional and the raw distance is returned.
    """
    tr = np.trace(v.conj().T @ u)
    lam = tr / abs(tr) if abs(tr) > 1e-300 else 1.0
    return float(np.max(np.abs(u - lam * v)))


def equal_up_to_global_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return global_phase_distance(u, v) <= tol


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(
        np.max(np.abs(u.conj().T @ u - I2)) <= tol and abs(abs(np.linalg.det(u)) - 1) <= tol
    )


def average_gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Average gate fidelity between two single-qubit unitaries."""
    overlap = abs(np.trace(u.conj().T @ v)) ** 2
    return float((overlap / 2 + 1) / 3)
