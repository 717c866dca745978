"""Time evolution under a pseudo-Hermitian generator and its conserved quantity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, Overflow

GROWTH_LIMIT = 1e150


@dataclass(frozen=True)
class Trajectory:
    """States ``U(t) v0`` and the values of ``v(t)^H G v(t)``.

    ``drift`` is ``max |C(t) - C(0)|`` and ``imag_residue`` the largest
    imaginary part discarded from ``C(t)``.
    """

    times: np.ndarray
    states: np.ndarray
    conserved: np.ndarray
    drift: float
    imag_residue: float

    @property
    def relative_drift(self) -> float:
        return self.drift / max(1.0, abs(float(self.conserved[0]))) if len(self.times) else 0.0


def _growth_exponent(H: np.ndarray, t: float) -> float:
    lam = np.linalg.eigvals(H)
    return float(np.max((-1j * lam * t).real)) if lam.size else 0.0


def propagator(H, t: float) -> np.ndarray:
    """``U(t) = exp(-i H t)``.

    Raises
    ------
    Overflow
        When ``||U||`` would exceed ``1e150``, judged from the spectral growth
        rate before exponentiating and from the result afterwards.
    """
    H = la.as_matrix(H)
    la.require_square(H)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if t == 0:
        return np.eye(H.shape[0], dtype=complex)
    if _growth_exponent(H, t) > np.log(GROWTH_LIMIT):
        raise Overflow(f"exp(-iHt) grows beyond {GROWTH_LIMIT:g} at t = {t}")
    U = la.expm(-1j * t * H)
    if la.norm(U) > GROWTH_LIMIT:
        raise Overflow(f"||U(t)|| exceeds {GROWTH_LIMIT:g} at t = {t}")
    return U


def pseudo_unitarity_residual(U, G) -> float:
    """``||U^H G U - G|| / ||G||``."""
    U = la.as_matrix(U)
    G = la.as_matrix(G)
    if U.shape != G.shape:
        raise DimensionMismatch(f"shapes {U.shape} and {G.shape} do not conform")
    return la.norm(la.dagger(U) @ G @ U - G) / la.norm(G)


def conserved_value(G, v) -> complex:
    v = np.asarray(v, dtype=complex)
    return complex(np.vdot(v, G @ v))


def evolve(H, v0, times: Sequence[float], G=None) -> Trajectory:
    """Evolve ``v0`` to every requested time with a fresh propagator.

    Each state is ``U(t) v0`` computed from ``t = 0``, never chained, so
    errors do not accumulate along the trajectory. ``G`` defaults to the
    identity.
    """
    H = la.as_matrix(H)
    n = la.require_square(H)
    v0 = np.asarray(v0, dtype=complex).ravel()
    if v0.size != n:
        raise DimensionMismatch(f"state of length {v0.size} for a {n}x{n} generator")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted ascending")
    G = np.eye(n, dtype=complex) if G is None else la.as_matrix(G)
    states = np.empty((times.size, n), dtype=complex)
    values = np.empty(times.size, dtype=complex)
    for i, t in enumerate(times):
        states[i] = propagator(H, t) @ v0
        values[i] = conserved_value(G, states[i])
    drift = float(np.max(np.abs(values.real - values[0].real))) if times.size else 0.0
    resid = float(np.max(np.abs(values.imag))) if times.size else 0.0
    return Trajectory(times, states, values.real.copy(), drift, resid)
