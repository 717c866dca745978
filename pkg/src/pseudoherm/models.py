"""Parameterized pseudo-Hermitian model matrices with their known intertwiners."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg as la
from .errors import NotHermitian, NotInversionSymmetric, SingularG, SingularGa

DAGGER = "dagger"          # G H = H^H G
ANTI = "anti"              # G H = -H^H G; G intertwines iH
TRANSPOSE = "transpose"    # G H = H^T G; not usable for kind classification


@dataclass(frozen=True)
class Intertwiner:
    """A known intertwining relation of a model.

    ``target`` names the matrix the relation holds for (``"H"`` or ``"Ht"``
    for the traceless shift of the oscillator model).
    """

    name: str
    G: np.ndarray
    relation: str = DAGGER
    target: str = "H"

    def residual(self, matrices: Dict[str, np.ndarray]) -> float:
        H = matrices[self.target]
        G = self.G
        if self.relation == DAGGER:
            R = G @ H - la.dagger(H) @ G
        elif self.relation == ANTI:
            R = G @ H + la.dagger(H) @ G
        else:
            R = G @ H - H.T @ G
        return la.norm(R) / max(la.norm(H), 1.0)


@dataclass(frozen=True)
class ModelInstance:
    """A model matrix, its intertwiners and the parameters that built it.

    ``matrices`` holds ``"H"`` and any auxiliary matrix an intertwiner refers
    to. ``primary`` names the intertwiner used by default for classification.
    """

    name: str
    H: np.ndarray
    intertwiners: List[Intertwiner]
    parameters: Dict[str, object]
    matrices: Dict[str, np.ndarray] = field(default_factory=dict)
    primary: Optional[str] = None

    def intertwiner(self, name: Optional[str] = None) -> Intertwiner:
        name = name or self.primary
        for entry in self.intertwiners:
            if name is None or entry.name == name:
                return entry
        raise KeyError(f"model {self.name} has no intertwiner {name!r}")

    def classification_pair(self, name: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
        """``(H, G)`` ready for kind classification.

        Anti-intertwiners are consumed through ``H -> iH``; transpose
        relations are rejected.
        """
        entry = self.intertwiner(name)
        H = self.matrices.get(entry.target, self.H)
        if entry.relation == TRANSPOSE:
            raise ValueError(f"{entry.name} is a transpose relation, not a Hermitian intertwiner")
        if entry.relation == ANTI:
            H = 1j * H
        return H, entry.G


def _instance(name, H, intertwiners, params, primary=None, extra=None):
    mats = {"H": H}
    if extra:
        mats.update(extra)
    return ModelInstance(name, H, intertwiners, dict(params), mats, primary)


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def qubit(g: float = 0.5, kappa: float = 1.0) -> ModelInstance:
    """Two coupled modes with balanced gain and loss ``g`` and coupling ``kappa``."""
    H = np.array([[-1j * g, kappa], [kappa, 1j * g]], dtype=complex)
    return _instance("qubit", H, [Intertwiner("sigma_x", SIGMA_X.copy())],
                     {"g": float(g), "kappa": float(kappa)}, "sigma_x")


SCHEMATIC_G = np.diag([1.0, 1.0, -1.0]).astype(complex)


def schematic(x: float = 0.0, y: float = 0.0) -> ModelInstance:
    """Three-level example with two opposite-kind crossings in the ``(x, y)`` plane."""
    s = 0.5j * np.sin(np.pi * y / 8.0)
    H = np.array([[1.0, y, 1j * x],
                  [y, 1.5, s],
                  [1j * x, s, 9.0]], dtype=complex)
    return _instance("schematic", H, [Intertwiner("G", SCHEMATIC_G.copy())],
                     {"x": float(x), "y": float(y)}, "G")


def antidiagonal(n: int) -> np.ndarray:
    return np.fliplr(np.eye(n)).astype(complex)


def _check_inversion(V: np.ndarray) -> None:
    if np.max(np.abs(V - V[::-1]), initial=0.0) > 1e-12:
        raise NotInversionSymmetric("onsite potentials must satisfy V[i] == V[M-1-i]")


def bloch_matrix(k: float, h: float, V: Sequence[float]) -> np.ndarray:
    """Bloch block of the asymmetric-hopping chain with ``M = len(V)`` sites per cell."""
    V = np.asarray(V, dtype=float)
    M = V.size
    if M < 2:
        raise ValueError("need at least two sites per cell")
    H = np.diag(V).astype(complex)
    for a in range(M - 1):
        H[a, a + 1] += np.exp(-h)
        H[a + 1, a] += np.exp(h)
    H[0, M - 1] += np.exp(h + 1j * k)
    H[M - 1, 0] += np.exp(-h - 1j * k)
    return H


def _is_time_reversal_point(k: float) -> bool:
    r = np.mod(k, 2 * np.pi)
    return min(abs(r), abs(r - np.pi), abs(r - 2 * np.pi)) <= 1e-12


def lattice(k: float = 0.0, h: float = 0.0, V: Sequence[float] = (1.4, 1.2, 2.0, 1.2, 1.4),
            M: Optional[int] = None) -> ModelInstance:
    """Bloch block ``H(k)`` of an asymmetric-hopping chain.

    The antidiagonal ``G`` is a dagger intertwiner only at ``k = 0`` and
    ``k = pi``; for every ``k`` it is recorded as a transpose relation.
    """
    V = np.asarray(V, dtype=float)
    if M is not None and M != V.size:
        raise ValueError(f"M = {M} but {V.size} potentials given")
    _check_inversion(V)
    H = bloch_matrix(k, h, V)
    G = antidiagonal(V.size)
    entries = []
    if _is_time_reversal_point(k):
        entries.append(Intertwiner("G", G))
    entries.append(Intertwiner("G_transpose", G.copy(), TRANSPOSE))
    return _instance("lattice", H, entries,
                     {"M": V.size, "h": float(h), "k": float(k), "V": V.tolist()},
                     "G" if _is_time_reversal_point(k) else "G_transpose")


def lattice_doubled(k: float = np.pi / 2, h: float = 0.0,
                    V: Sequence[float] = (1.4, 1.2, 2.0, 1.2, 1.4),
                    M: Optional[int] = None) -> ModelInstance:
    """``H(k) + H(-k)`` as a block-diagonal matrix with the ``2M`` antidiagonal intertwiner."""
    V = np.asarray(V, dtype=float)
    if M is not None and M != V.size:
        raise ValueError(f"M = {M} but {V.size} potentials given")
    _check_inversion(V)
    n = V.size
    H = np.zeros((2 * n, 2 * n), dtype=complex)
    H[:n, :n] = bloch_matrix(k, h, V)
    H[n:, n:] = bloch_matrix(-k, h, V)
    return _instance("lattice2", H, [Intertwiner("G_doubled", antidiagonal(2 * n))],
                     {"M": n, "h": float(h), "k": float(k), "V": V.tolist()},
                     "G_doubled")


def default_tau(gamma: float) -> float:
    return 2.0 / gamma if gamma > 0 else 1.0


def oscillators(K=((2.0, -1.0), (-1.0, 2.0)), gamma: float = 0.0,
                tau: Optional[float] = None) -> ModelInstance:
    """Damped coupled unit masses with stiffness ``K`` and damping ``gamma``.

    ``H`` generates the first-order dynamics of ``(x, p)``; ``Ht`` is its
    traceless shift ``H + i gamma / 2``. ``G_b`` (symplectic) intertwines
    ``Ht``, and ``G_a`` anti-intertwines it.

    ``G_a`` is singular when ``omega * tau = -i`` for some eigenfrequency.
    An explicit ``tau`` then raises ``SingularGa``; with the default ``tau``
    (singular exactly at critical damping) the entry is left out and
    ``parameters["G_a_singular"]`` is set.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    if np.max(np.abs(K - K.T), initial=0.0) > 1e-12:
        raise NotHermitian("K must be symmetric")
    n = K.shape[0]
    explicit_tau = tau is not None
    if tau is None:
        tau = default_tau(gamma)
    I = np.eye(n)
    Z = np.zeros((n, n))
    H = -1j * np.block([[Z, -I], [K, gamma * I]])
    Ht = H + 0.5j * gamma * np.eye(2 * n)
    Gb = 1j * np.block([[Z, I], [-I, Z]])
    Ga = np.block([[gamma * I - tau * K, I], [I, tau * I]]).astype(complex)
    s = np.linalg.svd(Ga, compute_uv=False)
    entries = [Intertwiner("G_b", Gb, DAGGER, "Ht")]
    params = {"K": K.tolist(), "gamma": float(gamma), "tau": float(tau)}
    if s[-1] < 1e-12 * s[0]:
        # the default tau hits omega * tau = -i exactly at critical damping
        if explicit_tau:
            raise SingularGa(f"G_a is singular for tau = {tau}")
        params["G_a_singular"] = True
    else:
        entries.append(Intertwiner("G_a", Ga, ANTI, "Ht"))
    return _instance("oscillators", H, entries, params, "G_b", {"Ht": Ht})


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + la.dagger(A))


def random_pseudo_hermitian(G, seed: int = 0) -> np.ndarray:
    """``G^{-1} S`` for a seeded random Hermitian ``S``."""
    G = la.as_matrix(G)
    n = la.require_square(G)
    if not la.is_hermitian(G):
        raise NotHermitian("G must be Hermitian")
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] < 1e-12 * s[0]:
        raise SingularG("G is singular")
    S = random_hermitian(n, np.random.default_rng(seed))
    return np.linalg.solve(G, S)


MODELS: Dict[str, Callable[..., ModelInstance]] = {
    "qubit": qubit,
    "schematic": schematic,
    "lattice": lattice,
    "lattice2": lattice_doubled,
    "oscillators": oscillators,
}

PARAMETERS: Dict[str, Tuple[str, ...]] = {
    "qubit": ("g", "kappa"),
    "schematic": ("x", "y"),
    "lattice": ("M", "h", "k", "V"),
    "lattice2": ("M", "h", "k", "V"),
    "oscillators": ("K", "gamma", "tau"),
}


def build(name: str, **params) -> ModelInstance:
    """Instantiate a model by name, rejecting unknown parameters."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    unknown = set(params) - set(PARAMETERS[name])
    if unknown:
        raise TypeError(f"unknown parameters for {name}: {sorted(unknown)}")
    return MODELS[name](**params)
