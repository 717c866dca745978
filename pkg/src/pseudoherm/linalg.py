"""Dense complex linear algebra kernel.

Everything downstream (intertwiner search, Krein classification, time
evolution) is expressed in terms of the handful of routines here. Matrices
are plain ``numpy`` arrays of dtype ``complex128``; no routine mutates its
input.

The general eigensolver is a Hessenberg reduction followed by single-shift
(Wilkinson) QR iteration with Givens rotations, which yields a complex Schur
form ``A = Q T Q^H``. The Schur form is kept alongside the eigenpairs so that
invariant (root) subspaces can be extracted later by reordering.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from numba import njit

from .errors import (
    DimensionMismatch,
    InseparableCluster,
    NoConvergence,
    NotHermitian,
    NotSquare,
    Overflow,
)

HERM_TOL = 1e-10
RANK_TOL = 1e-9
CLUSTER_TOL = 1e-7

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a fresh 2-D complex array."""
    M = np.array(A, dtype=complex, copy=True)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {M.shape}")
    return M


def require_square(A: np.ndarray) -> int:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSquare(f"square matrix required, got shape {A.shape}")
    return A.shape[0]


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def norm(A: np.ndarray) -> float:
    """Frobenius norm; used as the reference scale for all residuals."""
    return float(np.linalg.norm(A))


def is_hermitian(A: np.ndarray, tol: float = HERM_TOL) -> bool:
    return norm(A - dagger(A)) <= tol * max(norm(A), _TINY)


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def vec(A, order: str = "C") -> np.ndarray:
    """Stack the entries of ``A`` into a vector.

    The default row-major layout gives ``(a11, a12, ..., a21, ...)``; with it
    ``vec(A @ G @ B) == kron(A, B.T) @ vec(G)``. ``order="F"`` stacks columns
    instead, for which ``vec(A @ G @ B) == kron(B.T, A) @ vec(G)``.
    """
    return as_matrix(A).reshape(-1, order=order)


def unvec(v: np.ndarray, n: int, order: str = "C") -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((n, n), order=order)


# ---------------------------------------------------------------------------
# Hermitian eigenproblem, SVD, null spaces, inertia


def herm_eig(A, herm_tol: float = HERM_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    (w, V)
        Real eigenvalues in ascending order and a unitary matrix whose columns
        are the matching eigenvectors.
    """
    A = as_matrix(A)
    require_square(A)
    if not is_hermitian(A, herm_tol):
        raise NotHermitian("hermEig requires a Hermitian matrix")
    Ah = 0.5 * (A + dagger(A))
    try:
        w, V = np.linalg.eigh(Ah)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return w, V


def svd(A):
    """Full SVD ``A = U @ diag(s) @ Vh`` with ``s`` descending."""
    A = as_matrix(A)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return U, s, dagger(Vh)


def numerical_rank(s: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def null_space_basis(A, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical null space of ``A``.

    Singular values at or below ``rank_tol`` times the largest one are treated
    as zero. The result may have zero columns.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    A = as_matrix(A)
    _, s, V = svd(A)
    r = numerical_rank(s, rank_tol)
    return V[:, r:]


@dataclass(frozen=True)
class Inertia:
    n_positive: int
    n_negative: int
    n_zero: int

    @property
    def dimension(self) -> int:
        return self.n_positive + self.n_negative + self.n_zero

    def as_tuple(self):
        return (self.n_positive, self.n_negative, self.n_zero)


def inertia_of(A, zero_tol: Optional[float] = None, herm_tol: float = HERM_TOL) -> Inertia:
    """Counts of positive, negative and zero eigenvalues of a Hermitian matrix.

    ``zero_tol`` is absolute; by default it is ``1e-10 * ||A||``.
    """
    w, _ = herm_eig(A, herm_tol)
    if zero_tol is None:
        zero_tol = 1e-10 * norm(as_matrix(A))
    return Inertia(
        int(np.count_nonzero(w > zero_tol)),
        int(np.count_nonzero(w < -zero_tol)),
        int(np.count_nonzero(np.abs(w) <= zero_tol)),
    )


# ---------------------------------------------------------------------------
# Hessenberg reduction and complex Schur form


def hessenberg(A):
    """Householder reduction ``A = Q @ H @ Q^H`` to upper Hessenberg form."""
    H = as_matrix(A)
    n = require_square(H)
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = math.hypot(abs(x[0]), tail)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        vc = v.conj()
        H[k + 1:, k:] -= 2.0 * np.outer(v, vc @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, vc)
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, vc)
        H[k + 2:, k] = 0.0
    return Q, H


@njit(cache=True)
def _givens(a, b):
    """Rotation ``G = [[c, s], [-conj(s), c]]`` with ``G @ [a, b] = [r, 0]``."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, b.conjugate() / abs(b)
    aa = abs(a)
    r = math.hypot(aa, abs(b))
    return aa / r, (a / aa) * b.conjugate() / r


@njit(cache=True)
def _wilkinson_shift(H, hi):
    a = H[hi - 1, hi - 1]
    b = H[hi - 1, hi]
    c = H[hi, hi - 1]
    d = H[hi, hi]
    half = 0.5 * (a - d)
    disc = cmath.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    if abs(mu1 - d) <= abs(mu2 - d):
        return mu1
    return mu2


@njit(cache=True)
def _qr_sweep(H, Z, lo, hi, shift, cs, ss):
    """One explicitly shifted QR step on the active window ``lo..hi``."""
    n = H.shape[0]
    for k in range(lo, hi + 1):
        H[k, k] -= shift
    for k in range(lo, hi):
        c, s = _givens(H[k, k], H[k + 1, k])
        cs[k] = c
        ss[k] = s
        sc = s.conjugate()
        for j in range(k, n):
            x = H[k, j]
            y = H[k + 1, j]
            H[k, j] = c * x + s * y
            H[k + 1, j] = -sc * x + c * y
        H[k + 1, k] = 0.0
    for k in range(lo, hi):
        c = cs[k]
        s = ss[k]
        sc = s.conjugate()
        # right-multiply columns k, k+1 by G^H = [[c, -s], [conj(s), c]]
        for i in range(k + 2):
            x = H[i, k]
            y = H[i, k + 1]
            H[i, k] = c * x + sc * y
            H[i, k + 1] = -s * x + c * y
        for i in range(n):
            x = Z[i, k]
            y = Z[i, k + 1]
            Z[i, k] = c * x + sc * y
            Z[i, k + 1] = -s * x + c * y
    for k in range(lo, hi + 1):
        H[k, k] += shift


@njit(cache=True)
def _qr_iterate(H, Z, scale):
    """Deflating QR iteration on Hessenberg ``H``; returns the convergence flag."""
    n = H.shape[0]
    eps = 2.220446049250313e-16
    small = eps * scale * 1e-3
    max_iter = 30 * n
    cs = np.zeros(n)
    ss = np.zeros(n, dtype=np.complex128)
    total = 0
    stagnant = 0
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1])
            if sub <= eps * (abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])) or sub <= small:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stagnant = 0
            continue
        if total >= max_iter:
            return False
        if stagnant == 10 or stagnant == 20:
            # exceptional shift to break rare cycles
            shift = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            shift = _wilkinson_shift(H, hi)
        _qr_sweep(H, Z, lo, hi, shift, cs, ss)
        total += 1
        stagnant += 1
    return True


def _schur(A: np.ndarray):
    """Return ``(Q, T, converged)`` with ``A = Q T Q^H`` and ``T`` triangular."""
    n = A.shape[0]
    Z, H = hessenberg(A)
    if n <= 1:
        return Z, H, True
    H = np.ascontiguousarray(H)
    Z = np.ascontiguousarray(Z)
    converged = _qr_iterate(H, Z, max(norm(A), _TINY))
    T = np.triu(H) if converged else H
    return Z, T, converged


def schur_decompose(A):
    """Complex Schur decomposition ``A = Q @ T @ Q^H``.

    Raises
    ------
    NoConvergence
        If QR iteration exceeds ``30 n`` sweeps.
    """
    A = as_matrix(A)
    require_square(A)
    if not np.all(np.isfinite(A)):
        raise Overflow("matrix has non-finite entries")
    Q, T, ok = _schur(A)
    if not ok:
        raise NoConvergence("Schur QR iteration did not converge", partial=(Q, T))
    return Q, T


def _swap_adjacent(Q, T, k):
    """Swap diagonal entries ``k`` and ``k+1`` of triangular ``T`` in place."""
    a, b, c = T[k, k], T[k, k + 1], T[k + 1, k + 1]
    x = np.array([b, c - a])
    nx = np.linalg.norm(x)
    if nx == 0.0:
        return
    v1, v2 = x / nx
    Zr = np.array([[v1, -v2.conjugate()], [v2, v1.conjugate()]])
    T[:, k:k + 2] = T[:, k:k + 2] @ Zr
    T[k:k + 2, :] = Zr.conj().T @ T[k:k + 2, :]
    Q[:, k:k + 2] = Q[:, k:k + 2] @ Zr
    T[k + 1, k] = 0.0
    # exact diagonal after the swap
    T[k, k], T[k + 1, k + 1] = c, a


def reorder_schur(Q, T, selection: Iterable[int], cluster_tol: float = CLUSTER_TOL):
    """Move the selected diagonal entries of ``T`` to the leading block.

    The leading ``len(selection)`` columns of the returned ``Q`` span the
    invariant subspace belonging to the selected eigenvalues.

    Raises
    ------
    InseparableCluster
        If a selected eigenvalue lies within ``cluster_tol * scale`` of an
        unselected one.
    """
    Q = as_matrix(Q)
    T = as_matrix(T)
    n = require_square(T)
    sel = sorted(set(int(i) for i in selection))
    if any(i < 0 or i >= n for i in sel):
        raise IndexError("selection index out of range")
    diag = np.diag(T).copy()
    scale = max(1.0, float(np.max(np.abs(diag))) if n else 1.0)
    rest = [j for j in range(n) if j not in set(sel)]
    for i in sel:
        for j in rest:
            if abs(diag[i] - diag[j]) <= cluster_tol * scale:
                raise InseparableCluster(
                    f"eigenvalue {diag[i]} is not separated from {diag[j]}")
    target = 0
    for i in sel:
        for k in range(i - 1, target - 1, -1):
            _swap_adjacent(Q, T, k)
        target += 1
    return Q, T


# ---------------------------------------------------------------------------
# General eigenproblem


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a general square matrix.

    ``vectors[:, i]`` is a unit-norm right eigenvector for ``eigenvalues[i]``.
    The Schur factors that produced them are kept in ``schur_q``/``schur_t``;
    ``schur_index[i]`` is the diagonal position of ``eigenvalues[i]`` in
    ``schur_t``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    converged: bool
    schur_q: np.ndarray
    schur_t: np.ndarray
    schur_index: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)


@njit(cache=True)
def _triangular_eigvecs_kernel(T, smin):
    n = T.shape[0]
    Y = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        lam = T[i, i]
        Y[i, i] = 1.0
        for j in range(i - 1, -1, -1):
            d = T[j, j] - lam
            if abs(d) < smin:
                d = smin
            acc = 0j
            for m in range(j + 1, i + 1):
                acc += T[j, m] * Y[m, i]
            Y[j, i] = -acc / d
            big = abs(Y[j, i])
            if big > 1e100:
                for m in range(j, i + 1):
                    Y[m, i] /= big
    return Y


def _triangular_eigvecs(T: np.ndarray) -> np.ndarray:
    smin = max(_EPS * norm(T), _TINY * 1e10)
    return _triangular_eigvecs_kernel(np.ascontiguousarray(T), smin)


def sort_key(values: np.ndarray):
    """Indices ordering ``values`` by real part, then imaginary part."""
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return np.arange(0)
    scale = max(1.0, float(np.max(np.abs(values))))
    re = np.round(values.real / scale, 11)
    return np.lexsort((values.imag, re))


def gen_eig(A) -> EigenDecomposition:
    """Eigenvalues and unit right eigenvectors of a general complex matrix.

    Eigenvalues are sorted by real part, then imaginary part. If QR iteration
    does not converge the partial result is returned with
    ``converged=False``.
    """
    A = as_matrix(A)
    n = require_square(A)
    if not np.all(np.isfinite(A)):
        raise Overflow("matrix has non-finite entries")
    Q, T, ok = _schur(A)
    lam = np.diag(T).copy()
    Y = _triangular_eigvecs(np.triu(T))
    V = Q @ Y
    nrm = np.linalg.norm(V, axis=0)
    nrm[nrm == 0.0] = 1.0
    V = V / nrm
    order = sort_key(lam)
    return EigenDecomposition(
        eigenvalues=lam[order],
        vectors=V[:, order],
        converged=ok,
        schur_q=Q,
        schur_t=T,
        schur_index=order,
    )


def eigvals(A) -> np.ndarray:
    """Sorted eigenvalues only (skips the eigenvector back-substitution)."""
    A = as_matrix(A)
    require_square(A)
    if not np.all(np.isfinite(A)):
        raise Overflow("matrix has non-finite entries")
    _, T, ok = _schur(A)
    if not ok:
        raise NoConvergence("Schur QR iteration did not converge")
    lam = np.diag(T).copy()
    return lam[sort_key(lam)]


# ---------------------------------------------------------------------------
# Matrix exponential

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

    The scaling power is chosen from the 1-norm so that the scaled matrix has
    1-norm at most ``theta_13 = 5.37``.

    Raises
    ------
    Overflow
        If the input or the result is not finite.
    """
    A = as_matrix(A)
    n = require_square(A)
    if not np.all(np.isfinite(A)):
        raise Overflow("matrix has non-finite entries")
    ident = np.eye(n, dtype=complex)
    nrm1 = float(np.max(np.sum(np.abs(A), axis=0))) if n else 0.0
    if nrm1 == 0.0:
        return ident
    s = 0 if nrm1 <= _THETA13 else int(math.ceil(math.log2(nrm1 / _THETA13)))
    if s > 1000:
        raise Overflow("matrix norm too large for expm")
    X = A / (2.0 ** s)
    b = _PADE13
    with np.errstate(over="raise", invalid="raise"):
        try:
            X2 = X @ X
            X4 = X2 @ X2
            X6 = X2 @ X4
            U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
                     + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
            V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
                 + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
            R = np.linalg.solve(V - U, V + U)
            for _ in range(s):
                R = R @ R
        except FloatingPointError as exc:
            raise Overflow("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(R)):
        raise Overflow("matrix exponential overflowed")
    return R
