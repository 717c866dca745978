"""Krein-kind classification of pseudo-Hermitian spectra.

Real eigenvalues are labelled by the inertia of the intertwiner restricted to
their root subspace. A matrix whose real spectrum is entirely of definite kind
cannot have its spectrum pushed off the real axis by small structure
preserving perturbations; degeneracies of indefinite kind can.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Set, Tuple

import numpy as np

from . import linalg as la
from .errors import (ComplexCluster, NoConvergence, NotAnIntertwiner,
                     NotHermitian, NotIndefinite, NotUnitary, OnDiabolicPoint,
                     SingularG, UnsupportedMultiplicity)
from .intertwiner import verify_intertwiner

REAL_TOL = 1e-8
ZERO_TOL = 1e-7
INTERTWINER_TOL = 1e-8
COMMUTATOR_TOL = 1e-8
# near-diabolic pairs carry a Schur coupling of the order of their splitting
SPREAD_FACTOR = 100.0


class Kind(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    INDEFINITE = "Indefinite"
    COMPLEX_PAIRED = "ComplexPaired"

    @property
    def sign(self) -> str:
        return {"Positive": "+", "Negative": "-"}.get(self.value, "?")

    @property
    def definite(self) -> bool:
        return self in (Kind.POSITIVE, Kind.NEGATIVE)


@dataclass(frozen=True)
class Cluster:
    """A group of numerically coincident eigenvalues."""

    representative: complex
    members: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class EigenCluster:
    """Classified eigenvalue cluster.

    Attributes
    ----------
    representative : complex
        Mean of the member eigenvalues.
    member_indices : tuple of int
        Positions in the sorted eigenvalue list.
    algebraic, geometric : int
        Multiplicities; ``geometric < algebraic`` marks an exceptional point.
    kind : Kind
    inertia : Inertia
        Inertia of the intertwiner restricted to the root subspace.
    """

    representative: complex
    member_indices: Tuple[int, ...]
    algebraic: int
    geometric: int
    kind: Kind
    inertia: la.Inertia

    @property
    def is_exceptional(self) -> bool:
        return self.geometric < self.algebraic

    @property
    def is_real(self) -> bool:
        return self.kind is not Kind.COMPLEX_PAIRED


@dataclass(frozen=True)
class SpectralClassification:
    """Full verdict for a pair ``(H, G)``."""

    eigenvalues: np.ndarray
    clusters: List[EigenCluster]
    all_real: bool
    kgl_protected: bool
    signature: Optional[str]
    positive_kind_count: int
    negative_kind_count: int
    conjugate_paired: bool = True

    def cluster_of(self, index: int) -> EigenCluster:
        for c in self.clusters:
            if index in c.member_indices:
                return c
        raise IndexError(index)

    def kinds(self) -> List[Kind]:
        """Kind of each eigenvalue, aligned with ``eigenvalues``."""
        out: List[Optional[Kind]] = [None] * len(self.eigenvalues)
        for c in self.clusters:
            for i in c.member_indices:
                out[i] = c.kind
        return out  # type: ignore[return-value]


def spectral_scale(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=complex)
    return max(1.0, float(np.max(np.abs(lam)))) if lam.size else 1.0


def cluster_eigenvalues(eigenvalues, cluster_tol: float = la.CLUSTER_TOL) -> List[Cluster]:
    """Group eigenvalues by the transitive closure of ``|a - b| <= tol * scale``.

    Clusters are returned in order of their first member; representatives are
    member means.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    lam = np.asarray(eigenvalues, dtype=complex)
    n = lam.size
    thresh = cluster_tol * spectral_scale(lam)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= thresh:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for root in sorted(groups):
        idx = tuple(groups[root])
        out.append(Cluster(complex(np.mean(lam[list(idx)])), idx))
    return out


def _decompose(H, dec: Optional[la.EigenDecomposition] = None) -> la.EigenDecomposition:
    if dec is None:
        dec = la.gen_eig(H)
    if not dec.converged:
        raise NoConvergence("eigensolver did not converge", partial=dec)
    return dec


def _reordered(H, cluster: Cluster, dec: la.EigenDecomposition,
               cluster_tol: float):
    sel = [int(dec.schur_index[i]) for i in cluster.members]
    Q, T = la.reorder_schur(dec.schur_q, dec.schur_t, sel, cluster_tol)
    return Q, T


def root_subspace_basis(H, cluster: Cluster,
                        dec: Optional[la.EigenDecomposition] = None,
                        cluster_tol: float = la.CLUSTER_TOL) -> np.ndarray:
    """Orthonormal columns spanning the root subspace of ``cluster``.

    The basis is the leading block of a reordered Schur form, so it is
    invariant under ``H`` up to rounding.
    """
    dec = _decompose(H, dec)
    Q, _ = _reordered(H, cluster, dec, cluster_tol)
    return Q[:, :cluster.size].copy()


def _geometric(T11: np.ndarray, rep: complex, scale: float, rank_tol: float) -> int:
    m = T11.shape[0]
    if m == 1:
        return 1
    spread = float(np.max(np.abs(np.diag(T11) - rep)))
    s = np.linalg.svd(T11 - rep * np.eye(m), compute_uv=False)
    thresh = max(rank_tol * scale, SPREAD_FACTOR * spread)
    return max(1, int(np.sum(s <= thresh)))


def multiplicities(H, cluster: Cluster,
                   dec: Optional[la.EigenDecomposition] = None,
                   cluster_tol: float = la.CLUSTER_TOL,
                   rank_tol: float = la.RANK_TOL) -> Tuple[int, int]:
    """Algebraic and geometric multiplicity of ``cluster``.

    The geometric multiplicity is the nullity of ``T11 - mean * I`` where
    ``T11`` is the Schur block of the cluster. Singular values below
    ``max(rank_tol * scale, 100 * spread)`` count as zero, ``spread`` being the
    distance of the computed members from their mean; this absorbs the
    ``sqrt(eps)`` splitting that rounding causes at a defective eigenvalue.
    """
    H = la.as_matrix(H)
    dec = _decompose(H, dec)
    _, T = _reordered(H, cluster, dec, cluster_tol)
    m = cluster.size
    scale = max(1.0, la.norm(H))
    return m, _geometric(T[:m, :m], cluster.representative, scale, rank_tol)


def _check_intertwiner(H, G) -> None:
    if not la.is_hermitian(G):
        raise NotHermitian("intertwiner must be Hermitian")
    if verify_intertwiner(H, G) > INTERTWINER_TOL:
        raise NotAnIntertwiner(
            f"G H - H^H G residual {verify_intertwiner(H, G):.3e} exceeds {INTERTWINER_TOL}")


def _kind_from_inertia(inertia: la.Inertia) -> Kind:
    m = inertia.dimension
    if inertia.as_tuple() == (m, 0, 0):
        return Kind.POSITIVE
    if inertia.as_tuple() == (0, m, 0):
        return Kind.NEGATIVE
    return Kind.INDEFINITE


def _restricted_inertia(G: np.ndarray, Q: np.ndarray, zero_tol: float) -> la.Inertia:
    R = la.dagger(Q) @ G @ Q
    R = 0.5 * (R + la.dagger(R))
    return la.inertia_of(R, zero_tol * max(la.norm(G), 1e-300))


def classify_kind(H, G, cluster: Cluster, zero_tol: float = ZERO_TOL,
                  real_tol: float = REAL_TOL,
                  dec: Optional[la.EigenDecomposition] = None,
                  cluster_tol: float = la.CLUSTER_TOL) -> Tuple[Kind, la.Inertia]:
    """Kind of a real cluster from the inertia of ``Q^H G Q``.

    ``zero_tol`` is relative to ``||G||``; any restricted eigenvalue within it
    makes the cluster Indefinite.
    """
    H = la.as_matrix(H)
    G = la.as_matrix(G)
    _check_intertwiner(H, G)
    dec = _decompose(H, dec)
    if abs(cluster.representative.imag) > real_tol * spectral_scale(dec.eigenvalues):
        raise ComplexCluster("cluster is not real; its kind is ComplexPaired")
    Q = root_subspace_basis(H, cluster, dec, cluster_tol)
    inertia = _restricted_inertia(G, Q, zero_tol)
    return _kind_from_inertia(inertia), inertia


def _check_invertible(G: np.ndarray) -> None:
    s = np.linalg.svd(G, compute_uv=False)
    if s.size and (s[0] == 0.0 or s[-1] < 1e-12 * s[0]):
        raise SingularG("intertwiner is singular")


def classify_spectrum(H, G, real_tol: float = REAL_TOL,
                      cluster_tol: float = la.CLUSTER_TOL,
                      zero_tol: float = ZERO_TOL,
                      rank_tol: float = la.RANK_TOL) -> SpectralClassification:
    """Cluster, classify and test the spectrum of ``H`` against ``G``.

    Realness is decided per cluster on the representative, which is stable at
    exceptional points even though the individual computed members there can
    carry imaginary parts of order ``sqrt(eps)``.
    """
    H = la.as_matrix(H)
    G = la.as_matrix(G)
    if H.shape != G.shape:
        from .errors import DimensionMismatch
        raise DimensionMismatch(f"shapes {H.shape} and {G.shape} do not conform")
    _check_intertwiner(H, G)
    _check_invertible(G)
    dec = _decompose(H)
    lam = dec.eigenvalues
    scale = spectral_scale(lam)
    hscale = max(1.0, la.norm(H))
    groups = cluster_eigenvalues(lam, cluster_tol)

    clusters: List[EigenCluster] = []
    for grp in groups:
        Q, T = _reordered(H, grp, dec, cluster_tol)
        m = grp.size
        inertia = _restricted_inertia(G, Q[:, :m], zero_tol)
        geo = _geometric(T[:m, :m], grp.representative, hscale, rank_tol)
        if abs(grp.representative.imag) > real_tol * scale:
            kind = Kind.COMPLEX_PAIRED
        else:
            kind = _kind_from_inertia(inertia)
        clusters.append(EigenCluster(grp.representative, grp.members, m, geo,
                                     kind, inertia))

    all_real = all(c.is_real for c in clusters)
    protected = all_real and all(c.kind.definite for c in clusters)
    signature = None
    if protected:
        ordered = sorted(clusters, key=lambda c: c.representative.real)
        signature = "".join(c.kind.sign * c.algebraic for c in ordered)
    pos = sum(c.inertia.n_positive for c in clusters if c.is_real)
    neg = sum(c.inertia.n_negative for c in clusters if c.is_real)

    complex_reps = [c for c in clusters if not c.is_real]
    paired = True
    for c in complex_reps:
        partner = [d for d in complex_reps
                   if abs(d.representative - np.conj(c.representative)) <= 1e-8 * scale
                   and d.algebraic == c.algebraic]
        if not partner:
            paired = False
    return SpectralClassification(lam, clusters, all_real, protected, signature,
                                  pos, neg, paired)


def kgl_protected(H, G, **tols) -> bool:
    """Whether the real spectrum of ``H`` is entirely of definite kind."""
    return classify_spectrum(H, G, **tols).kgl_protected


# ---------------------------------------------------------------------------
# Breaking perturbation


def _hermitian_projection(M: np.ndarray, dC: np.ndarray) -> np.ndarray:
    # smallest correction making M @ dC Hermitian, so G stays an intertwiner
    K = M @ dC
    return np.linalg.solve(M, 0.5 * (K + la.dagger(K)))


def construct_breaking_perturbation(H, G, cluster: Cluster,
                                    zero_tol: float = ZERO_TOL,
                                    cluster_tol: float = la.CLUSTER_TOL,
                                    rank_tol: float = la.RANK_TOL
                                    ) -> Callable[[float], np.ndarray]:
    """Family ``x -> H(x)`` that splits an indefinite real double eigenvalue.

    The family changes ``H`` only on the root subspace ``R`` of the cluster,
    ``H(x) = H + R (C(x) - C(0)) M^{-1} R^H G`` with ``M = R^H G R``, which
    keeps ``G`` an intertwiner whenever ``M C(x)`` is Hermitian. ``C(x)`` has
    eigenvalues ``lam - c + c exp(+-ix)`` with ``c = lam``, i.e. ``lam
    exp(+-ix)``, unless ``lam`` is near zero, where ``c`` falls back to the
    spectral scale so that the split is still nonreal.

    Diagonalizable and defective clusters use different ``C``: a symmetric
    rotation in a ``G``-diagonal eigenbasis, and a triangular form in a
    Jordan chain basis.
    """
    H = la.as_matrix(H)
    G = la.as_matrix(G)
    _check_intertwiner(H, G)
    if cluster.size > 2:
        raise UnsupportedMultiplicity("only double eigenvalues are supported")
    dec = _decompose(H)
    kind, _ = classify_kind(H, G, cluster, zero_tol, dec=dec, cluster_tol=cluster_tol)
    if kind is not Kind.INDEFINITE or cluster.size != 2:
        raise NotIndefinite(f"cluster kind is {kind.value}")
    lam = float(cluster.representative.real)
    scale = spectral_scale(dec.eigenvalues)
    c = lam if abs(lam) >= 1e-3 * scale else scale

    Q, T = _reordered(H, cluster, dec, cluster_tol)
    Q2 = Q[:, :2]
    T11 = T[:2, :2]
    geo = _geometric(T11, cluster.representative, max(1.0, la.norm(H)), rank_tol)

    if geo == 2:
        Mq = la.dagger(Q2) @ G @ Q2
        eta, W = la.herm_eig(0.5 * (Mq + la.dagger(Mq)))
        R = Q2 @ W
        e1, e2 = float(eta[0]), float(eta[1])
        root = np.sqrt(abs(e1 * e2))

        def core(x):
            s = np.sin(x) / root
            return (lam - c) * np.eye(2) + c * np.array(
                [[np.cos(x), e2 * s], [e1 * s, np.cos(x)]], dtype=complex)
    else:
        r2 = np.array([0.0, 1.0], dtype=complex)
        r1 = (T11 - cluster.representative * np.eye(2)) @ r2
        R = Q2 @ np.column_stack([r1, r2])
        Mr = la.dagger(R) @ G @ R
        e1 = float(Mr[0, 1].real)
        e2 = float(Mr[1, 1].real)

        def core(x):
            off = np.cos(x) - 1j * c * e2 * np.sin(x) / e1
            return (lam - c) * np.eye(2) + np.array(
                [[c * np.exp(-1j * x), off], [0.0, c * np.exp(1j * x)]])

    M = la.dagger(R) @ G @ R
    L_dag = np.linalg.solve(M, la.dagger(R) @ G)
    C0 = core(0.0)

    def family(x: float) -> np.ndarray:
        if x == 0:
            return H.copy()
        dC = _hermitian_projection(M, core(x) - C0)
        return H + R @ dC @ L_dag

    return family


# ---------------------------------------------------------------------------
# Boundary probe


def boundary_normal_form(a: float, eta1: float = 1.0, eta2: float = 1.0,
                         lam: float = 0.0, theta: float = 0.0
                         ) -> Tuple[np.ndarray, np.ndarray]:
    """Two-level degenerate matrix and its diagonal intertwiner.

    Returns ``(H0, G0)`` with ``G0 = diag(eta1, -eta2)`` and ``H0`` the
    degenerate member of the general ``2 x 2`` family, which is a diabolic
    point for ``a == 0`` and an exceptional point otherwise.
    """
    if eta1 <= 0 or eta2 <= 0:
        raise ValueError("eta1 and eta2 must be positive")
    b = a / np.sqrt(eta1 * eta2)
    H0 = np.array([[lam + a, eta2 * b * np.exp(1j * theta)],
                   [-eta1 * b * np.exp(-1j * theta), lam - a]], dtype=complex)
    G0 = np.diag([eta1, -eta2]).astype(complex)
    return H0, G0


def _two_level_reduction(H, G, cluster: Cluster, cluster_tol: float):
    dec = _decompose(H)
    Q = root_subspace_basis(H, cluster, dec, cluster_tol)
    Hr = la.dagger(Q) @ H @ Q
    Gr = la.dagger(Q) @ G @ Q
    Gr = 0.5 * (Gr + la.dagger(Gr))
    if abs(Gr[0, 1]) <= 1e-12 * la.norm(Gr):
        W = np.eye(2, dtype=complex)
        d = Gr.diagonal().real
    else:
        d, W = la.herm_eig(Gr)
    if d[0] < d[1]:
        W = W[:, ::-1]
        d = d[::-1]
    if not (d[0] > 0 > d[1]):
        raise NotIndefinite("restricted intertwiner is definite")
    Hn = np.linalg.solve(W, Hr @ W)
    return Hn, float(d[0]), float(-d[1])


def boundary_probe(H0, G0, cluster: Cluster, epsilon: float = 1e-3,
                   sample_count: int = 400, seed: int = 0,
                   cluster_tol: float = la.CLUSTER_TOL) -> Set[str]:
    """Sub-signatures of strongly stable matrices near a double eigenvalue.

    ``H0`` is reduced to the root subspace of ``cluster`` in a basis where the
    intertwiner is ``diag(eta1, -eta2)``. Nearby pseudo-Hermitian matrices are
    then sampled by displacing the gain-loss, coupling and intertwiner
    parameters by ``epsilon`` times uniform draws in ``[-1, 1]``; phase and
    trace displacements are held at zero. The returned set contains the
    signature strings of all samples that are strongly stable.
    """
    H0 = la.as_matrix(H0)
    G0 = la.as_matrix(G0)
    _check_intertwiner(H0, G0)
    if cluster.size != 2:
        raise NotIndefinite("probe needs a double eigenvalue")
    kind, _ = classify_kind(H0, G0, cluster, cluster_tol=cluster_tol)
    if kind is not Kind.INDEFINITE:
        raise NotIndefinite(f"cluster kind is {kind.value}")
    Hn, eta1, eta2 = _two_level_reduction(H0, G0, cluster, cluster_tol)
    a = 0.5 * float((Hn[0, 0] - Hn[1, 1]).real)
    off = Hn[0, 1] / eta2
    b = float(abs(off))
    theta = float(np.angle(off)) if b > 0 else 0.0
    phase = np.exp(1j * theta)

    rng = np.random.default_rng(seed)
    draws = rng.uniform(-1.0, 1.0, size=(sample_count, 4))
    found: Set[str] = set()
    for at, bt, e1t, e2t in draws:
        g1 = eta1 + epsilon * e1t
        g2 = eta2 + epsilon * e2t
        bb = b + epsilon * bt
        aa = a + epsilon * at
        H = np.array([[aa, g2 * bb * phase], [-g1 * bb / phase, -aa]])
        G = np.diag([g1, -g2]).astype(complex)
        try:
            cls = classify_spectrum(H, G)
        except (NotAnIntertwiner, SingularG):
            continue
        if cls.kgl_protected:
            found.add(cls.signature)
    return found


# ---------------------------------------------------------------------------
# Zeroth Chern number


def chern_zero(a: float, b: float, theta: float = 0.0) -> int:
    """Zeroth Chern number of the two-level family under ``G = diag(1, -1)``.

    Counts negative eigenvalues of ``H+ = -i s2 H s1``, which for ``theta = 0``
    equal ``a +- b``. Eigenvalues within ``1e-12 * (|a| + |b|)`` of zero are
    not counted, so the exceptional locus ``b = |a|`` is handled exactly.
    """
    if a == 0:
        raise OnDiabolicPoint("a = 0 is a diabolic point")
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]])
    H = np.array([[a, b * np.exp(1j * theta)], [-b * np.exp(-1j * theta), -a]])
    Hp = -1j * s2 @ H @ s1
    w, _ = la.herm_eig(Hp)
    tol = 1e-12 * (abs(a) + abs(b))
    return int(np.sum(w < -tol))


# ---------------------------------------------------------------------------
# Symmetry-induced degeneracies


class SymmetryVerdict(str, enum.Enum):
    STABLE = "StableDegeneracy"
    THRESHOLDLESS = "PotentiallyThresholdless"


def symmetry_stability_check(G, unitaries: Sequence, irrep_basis=None,
                             zero_tol: float = ZERO_TOL
                             ) -> Tuple[SymmetryVerdict, List[float]]:
    """Whether a symmetry-protected degeneracy stays real when the symmetry breaks.

    The degeneracy is stable if ``G`` commutes with every group element and,
    when an orthonormal basis of the irrep subspace is given, ``G`` restricted
    to it is definite.

    Returns
    -------
    (verdict, commutator_norms)
    """
    G = la.as_matrix(G)
    gnorm = max(la.norm(G), 1e-300)
    norms: List[float] = []
    for U in unitaries:
        U = la.as_matrix(U)
        if la.norm(la.dagger(U) @ U - np.eye(U.shape[0])) > 1e-10:
            raise NotUnitary("group element is not unitary")
        norms.append(la.norm(G @ U - U @ G))
    stable = all(c <= COMMUTATOR_TOL * gnorm for c in norms)
    if stable and irrep_basis is not None:
        inertia = _restricted_inertia(G, la.as_matrix(irrep_basis), zero_tol)
        stable = _kind_from_inertia(inertia).definite
    verdict = SymmetryVerdict.STABLE if stable else SymmetryVerdict.THRESHOLDLESS
    return verdict, norms
