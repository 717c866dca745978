"""Hermitian intertwining operators of a square matrix.

A Hermitian ``G`` intertwines ``H`` when ``G @ H == H^H @ G``. The solutions
form a real vector space, found here as the null space of the dense
``n^2 x n^2`` Sylvester operator followed by Hermitian splitting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, NoInvertibleFound

MAX_TRIES = 64
INVERTIBLE_TOL = 1e-6


@dataclass(frozen=True)
class IntertwinerBasis:
    """Real-linear basis of the Hermitian solutions of ``G H = H^H G``.

    Attributes
    ----------
    basis : list of ndarray
        Hermitian matrices, orthonormal in the real Frobenius inner product
        ``Re tr(A^H B)``.
    residuals : list of float
        ``||G H - H^H G|| / max(||H||, 1)`` for each basis element.
    source_dimension : int
        Complex dimension of the raw Sylvester null space.
    """

    basis: List[np.ndarray]
    residuals: List[float] = field(default_factory=list)
    source_dimension: int = 0

    def __len__(self):
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)


def sylvester_operator(H) -> np.ndarray:
    """Matrix ``K`` with ``K @ vec(G) = vec(H^H G - G H)`` (row-major ``vec``)."""
    H = la.as_matrix(H)
    n = la.require_square(H)
    ident = np.eye(n, dtype=complex)
    return np.kron(la.dagger(H), ident) - np.kron(ident, H.T)


def verify_intertwiner(H, G) -> float:
    """Return ``||G H - H^H G|| / max(||H||, 1)`` without thresholding."""
    H = la.as_matrix(H)
    G = la.as_matrix(G)
    if H.shape != G.shape or H.shape[0] != H.shape[1]:
        raise DimensionMismatch(f"shapes {H.shape} and {G.shape} do not conform")
    return la.norm(G @ H - la.dagger(H) @ G) / max(la.norm(H), 1.0)


def _hermitian_coords(G: np.ndarray) -> np.ndarray:
    # real coordinates of a Hermitian matrix; isometric for Re tr(A^H B)
    return np.concatenate([G.real.ravel(), G.imag.ravel()])


def _from_coords(x: np.ndarray, n: int) -> np.ndarray:
    m = n * n
    return (x[:m] + 1j * x[m:]).reshape(n, n)


def _standard_hermitian_basis(n: int):
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1.0
        yield E
    r = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = r
            yield E
            F = np.zeros((n, n), dtype=complex)
            F[i, j] = 1j * r
            F[j, i] = -1j * r
            yield F


def intertwiner_basis(H, rank_tol: float = la.RANK_TOL) -> IntertwinerBasis:
    """All Hermitian intertwiners of ``H`` as an orthonormal real basis.

    Each raw null vector ``G0`` of the Sylvester operator contributes the two
    Hermitian candidates ``(G0 + G0^H)/2`` and ``i (G0 - G0^H)/2``. Their real
    span is then given a canonical orthonormal basis by projecting the
    standard Hermitian matrix units onto it, in order, with Gram-Schmidt.
    """
    H = la.as_matrix(H)
    n = la.require_square(H)
    K = sylvester_operator(H)
    null = la.null_space_basis(K, rank_tol)
    d = null.shape[1]
    if d == 0:
        return IntertwinerBasis([], [], 0)

    cands = []
    for col in range(d):
        G0 = la.unvec(null[:, col], n)
        cands.append(_hermitian_coords(0.5 * (G0 + la.dagger(G0))))
        cands.append(_hermitian_coords(0.5j * (G0 - la.dagger(G0))))
    C = np.array(cands).T
    U, s, _ = np.linalg.svd(C, full_matrices=False)
    r = la.numerical_rank(s, rank_tol)
    span = U[:, :r]

    picked: List[np.ndarray] = []
    for E in _standard_hermitian_basis(n):
        if len(picked) == r:
            break
        x = span @ (span.T @ _hermitian_coords(E))
        for p in picked:
            x = x - p * (p @ x)
        nx = np.linalg.norm(x)
        if nx > 1e-6:
            x = x / nx
            # second pass for orthogonality
            for p in picked:
                x = x - p * (p @ x)
            picked.append(x / np.linalg.norm(x))

    basis = []
    for x in picked:
        G = _from_coords(x, n)
        G = 0.5 * (G + la.dagger(G))
        basis.append(G)
    residuals = [verify_intertwiner(H, G) for G in basis]
    return IntertwinerBasis(basis, residuals, d)


def select_invertible(basis: IntertwinerBasis, seed: int = 0,
                      max_tries: int = MAX_TRIES) -> Tuple[np.ndarray, float]:
    """Pick an invertible element of the span of ``basis``.

    The candidate is a random real combination (standard normal coefficients
    from a generator seeded with ``seed``) rescaled to unit spectral norm, and
    it is accepted once its smallest singular value is at least ``1e-6`` times
    the largest.

    Returns
    -------
    (G, condition_number)
    """
    elements = list(basis.basis)
    if not elements:
        raise NoInvertibleFound("empty intertwiner basis")
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        if attempt == 0 and len(elements) == 1:
            coeffs = np.ones(1)
        else:
            coeffs = rng.standard_normal(len(elements))
        G = sum(c * E for c, E in zip(coeffs, elements))
        G = 0.5 * (G + la.dagger(G))
        s = np.linalg.svd(G, compute_uv=False)
        if s[0] == 0.0:
            continue
        if s[-1] >= INVERTIBLE_TOL * s[0]:
            return G / s[0], float(s[0] / s[-1])
    raise NoInvertibleFound(
        f"no invertible Hermitian intertwiner found in {max_tries} tries")


def spectrum_conjugate_closed(eigenvalues, tol: float = 1e-8) -> bool:
    """Whether a multiset of eigenvalues is closed under complex conjugation."""
    lam = np.asarray(eigenvalues, dtype=complex)
    if lam.size == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(lam))))
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(lam[:, None] - lam.conj()[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(np.max(cost[rows, cols]) <= tol * scale)


def is_pseudo_hermitian(H, rank_tol: float = la.RANK_TOL,
                        seed: int = 0) -> Tuple[bool, Optional[np.ndarray]]:
    """Decide pseudo-Hermiticity of ``H`` and return a witness ``G`` if found."""
    H = la.as_matrix(H)
    la.require_square(H)
    if la.is_hermitian(H):
        return True, np.eye(H.shape[0], dtype=complex)
    lam = la.eigvals(H)
    # loose pre-filter: defective spectra are only accurate to ~sqrt(eps)
    if not spectrum_conjugate_closed(lam, tol=1e-6):
        return False, None
    basis = intertwiner_basis(H, rank_tol)
    if not basis.basis:
        return False, None
    try:
        G, _ = select_invertible(basis, seed)
    except NoInvertibleFound:
        return False, None
    if verify_intertwiner(H, G) > 1e-8:
        return False, None
    return True, G
