"""Parameter sweeps: eigenvalue branches, phase maps, transitions and degeneracies."""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from . import krein as kr
from . import linalg as la
from . import models
from .errors import NoDegeneracyFound, NoSignChange, PseudoHermError

GAP_TOL = 1e-6
SCAN_POINTS = 41

ModelSpec = Union[str, Callable[..., models.ModelInstance]]


class Status(str, enum.Enum):
    STABLE = "Stable"
    BROKEN = "Broken"
    DEGENERATE = "Degenerate"
    ERROR = "Error"


@dataclass(frozen=True)
class PhasePoint:
    """Classification of one parameter point.

    ``signature`` is set for Stable points. Degenerate points (all real but
    with an indefinite cluster) carry ``ep_flag``, true when that cluster is
    defective.
    """

    parameters: Dict[str, object]
    status: Status
    eigenvalues: np.ndarray
    signature: Optional[str] = None
    ep_flag: bool = False
    kinds: Tuple[str, ...] = ()
    message: str = ""

    @property
    def key(self) -> str:
        """Status class used for region labelling."""
        if self.status is Status.STABLE:
            return f"Stable({self.signature})"
        if self.status is Status.DEGENERATE:
            return "Degenerate(EP)" if self.ep_flag else "Degenerate(DP)"
        return self.status.value


@dataclass(frozen=True)
class Boundary:
    location: Dict[str, float]
    type: str                 # "EP" or "DP"
    cells: Tuple[Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class PhaseMap:
    """Row-major grid over ``axes[0]`` (rows) and ``axes[1]`` (columns)."""

    axes: Tuple[Axis, Axis]
    grid: List[PhasePoint]
    labels: np.ndarray
    region_keys: List[str]
    boundaries: List[Boundary] = field(default_factory=list)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.axes[0].count, self.axes[1].count)

    def point(self, i: int, j: int) -> PhasePoint:
        return self.grid[i * self.axes[1].count + j]

    def nearest(self, **coords) -> Tuple[int, int]:
        ij = []
        for ax in self.axes:
            ij.append(int(np.argmin(np.abs(ax.values - coords[ax.name]))))
        return tuple(ij)  # type: ignore[return-value]

    @property
    def region_count(self) -> int:
        return len(self.region_keys)


@dataclass(frozen=True)
class Sweep1D:
    """Points along one axis with eigenvalues matched into continuous branches.

    ``branches[p, b]`` is the eigenvalue of branch ``b`` at point ``p`` and
    ``branch_kinds[p, b]`` its kind label.
    """

    name: str
    values: np.ndarray
    points: List[PhasePoint]
    branches: np.ndarray
    branch_kinds: np.ndarray


@dataclass(frozen=True)
class Degeneracy:
    location: float
    kind: kr.Kind
    ep_flag: bool
    gap: float
    representative: complex
    multiplicities: Tuple[int, int]


def _factory(model: ModelSpec) -> Tuple[str, Callable[..., models.ModelInstance]]:
    if isinstance(model, str):
        return model, models.MODELS[model]
    return getattr(model, "__name__", "model"), model


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("PSEUDOHERM_THREADS", "1")))
    except ValueError:
        return 1


def classify_point(model: ModelSpec, params: Dict[str, object],
                   intertwiner: Optional[str] = None,
                   tols: Optional[Dict[str, float]] = None) -> PhasePoint:
    """Instantiate ``model`` at ``params`` and classify it.

    Model and numerical errors are captured as an ``Error`` point so that a
    sweep can continue past them.
    """
    _, make = _factory(model)
    tols = tols or {}
    try:
        inst = make(**params)
        H, G = inst.classification_pair(intertwiner)
        cls = kr.classify_spectrum(H, G, **tols)
    except (PseudoHermError, ValueError, KeyError) as exc:
        return PhasePoint(dict(params), Status.ERROR, np.zeros(0, dtype=complex),
                          message=f"{type(exc).__name__}: {exc}")
    kinds = tuple(k.value for k in cls.kinds())
    if not cls.all_real:
        return PhasePoint(dict(params), Status.BROKEN, cls.eigenvalues, kinds=kinds)
    if cls.kgl_protected:
        return PhasePoint(dict(params), Status.STABLE, cls.eigenvalues,
                          signature=cls.signature, kinds=kinds)
    ep = any(c.kind is kr.Kind.INDEFINITE and c.is_exceptional for c in cls.clusters)
    return PhasePoint(dict(params), Status.DEGENERATE, cls.eigenvalues,
                      ep_flag=ep, kinds=kinds)


def _classify_many(model, param_list, intertwiner, tols, workers):
    workers = workers or default_workers()
    if workers <= 1 or len(param_list) < 2:
        return [classify_point(model, p, intertwiner, tols) for p in param_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(lambda p: classify_point(model, p, intertwiner, tols),
                             param_list))


def match_branches(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Permutation of ``cur`` minimizing the total distance to ``prev``."""
    cost = np.abs(prev[:, None] - cur[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(prev.size, dtype=int)
    perm[rows] = cols
    return perm


def sweep1d(model: ModelSpec, name: str, values: Sequence[float],
            fixed: Optional[Dict[str, object]] = None,
            intertwiner: Optional[str] = None,
            tols: Optional[Dict[str, float]] = None,
            workers: Optional[int] = None) -> Sweep1D:
    """Classify ``model`` along ``name`` and connect eigenvalues into branches.

    Consecutive spectra are matched by optimal assignment on the distance
    matrix. Points that failed to classify keep the previous branch values
    with kind ``"Error"``.
    """
    fixed = dict(fixed or {})
    values = np.atleast_1d(np.asarray(values, dtype=float))
    plist = [dict(fixed, **{name: float(v)}) for v in values]
    points = _classify_many(model, plist, intertwiner, tols, workers)
    n = max((p.eigenvalues.size for p in points), default=0)
    branches = np.full((values.size, n), np.nan + 0j)
    kinds = np.full((values.size, n), "Error", dtype=object)
    prev = None
    for i, p in enumerate(points):
        if p.eigenvalues.size != n:
            if prev is not None:
                branches[i] = prev
            continue
        lam = p.eigenvalues
        ks = np.array(p.kinds, dtype=object)
        if prev is None:
            perm = np.arange(n)
        else:
            perm = match_branches(prev, lam)
        branches[i] = lam[perm]
        kinds[i] = ks[perm]
        prev = branches[i]
    return Sweep1D(name, values, points, branches, kinds)


def _boundary_type(keys: np.ndarray, i: int, j: int) -> str:
    nr, nc = keys.shape
    sigs = set()
    for a in range(max(0, i - 1), min(nr, i + 2)):
        for b in range(max(0, j - 1), min(nc, j + 2)):
            if keys[a, b].startswith("Stable("):
                sigs.add(keys[a, b])
    return "DP" if len(sigs) >= 2 else "EP"


def label_regions(keys: np.ndarray) -> Tuple[np.ndarray, List[str]]:
    """4-connected components of equal status class.

    Returns integer labels (``0 .. count-1``) and the class of each label.
    """
    labels = np.full(keys.shape, -1, dtype=int)
    region_keys: List[str] = []
    for key in sorted(set(keys.ravel().tolist())):
        comp, count = ndimage.label(keys == key)
        for r in range(1, count + 1):
            labels[comp == r] = len(region_keys)
            region_keys.append(key)
    return labels, region_keys


def find_boundaries(axes: Tuple[Axis, Axis], keys: np.ndarray) -> List[Boundary]:
    """Edges between 4-neighbours of different status class.

    An edge is typed DP when two distinct stable signatures occur in the
    3x3 neighbourhood of either cell, and EP otherwise.
    """
    v0, v1 = axes[0].values, axes[1].values
    out: List[Boundary] = []
    nr, nc = keys.shape
    for i in range(nr):
        for j in range(nc):
            for di, dj in ((1, 0), (0, 1)):
                a, b = i + di, j + dj
                if a >= nr or b >= nc or keys[i, j] == keys[a, b]:
                    continue
                t1 = _boundary_type(keys, i, j)
                t2 = _boundary_type(keys, a, b)
                kind = "DP" if "DP" in (t1, t2) else "EP"
                loc = {axes[0].name: float(0.5 * (v0[i] + v0[a])),
                       axes[1].name: float(0.5 * (v1[j] + v1[b]))}
                out.append(Boundary(loc, kind, ((i, j), (a, b))))
    return out


def sweep2d(model: ModelSpec, axis1: Axis, axis2: Axis,
            fixed: Optional[Dict[str, object]] = None,
            intertwiner: Optional[str] = None,
            tols: Optional[Dict[str, float]] = None,
            workers: Optional[int] = None) -> PhaseMap:
    """Classify every grid point and label regions and boundaries."""
    if axis1.count < 2 or axis2.count < 2:
        raise ValueError("each axis needs at least two steps")
    fixed = dict(fixed or {})
    plist = [dict(fixed, **{axis1.name: float(u), axis2.name: float(w)})
             for u in axis1.values for w in axis2.values]
    grid = _classify_many(model, plist, intertwiner, tols, workers)
    keys = np.array([p.key for p in grid], dtype=object).reshape(axis1.count, axis2.count)
    labels, region_keys = label_regions(keys)
    bounds = find_boundaries((axis1, axis2), keys)
    return PhaseMap((axis1, axis2), grid, labels, region_keys, bounds)


def _spectrum(model, params, intertwiner):
    _, make = _factory(model)
    inst = make(**params)
    H, G = inst.classification_pair(intertwiner)
    return H, G


def nonreal_count(model: ModelSpec, params: Dict[str, object],
                  intertwiner: Optional[str] = None,
                  real_tol: float = kr.REAL_TOL,
                  cluster_tol: float = la.CLUSTER_TOL) -> int:
    """Number of eigenvalues in clusters with nonreal representative."""
    H, _ = _spectrum(model, params, intertwiner)
    lam = la.eigvals(H)
    scale = kr.spectral_scale(lam)
    return sum(c.size for c in kr.cluster_eigenvalues(lam, cluster_tol)
               if abs(c.representative.imag) > real_tol * scale)


def locate_transition(model: ModelSpec, name: str, bracket: Tuple[float, float],
                      fixed: Optional[Dict[str, object]] = None,
                      tol: float = 1e-8,
                      intertwiner: Optional[str] = None) -> float:
    """Bisect a change in the number of nonreal eigenvalues.

    With a real spectrum at one end this is bisection on the all-real
    predicate. Counting nonreal eigenvalues also resolves a second breaking
    inside a bracket that is already broken at both ends.

    Returns the midpoint of the final bracket, whose width is at most
    ``tol * |bracket|``.
    """
    fixed = dict(fixed or {})
    lo, hi = float(bracket[0]), float(bracket[1])

    def count(v):
        return nonreal_count(model, dict(fixed, **{name: v}), intertwiner)

    c_lo, c_hi = count(lo), count(hi)
    if c_lo == c_hi:
        raise NoSignChange(
            f"{c_lo} nonreal eigenvalues at both ends of [{lo}, {hi}]")
    width = tol * abs(hi - lo)
    while abs(hi - lo) > width:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if count(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _closest_pair(lam: np.ndarray) -> Tuple[float, int, int]:
    best = (np.inf, 0, 0)
    for i in range(lam.size):
        for j in range(i + 1, lam.size):
            d = abs(lam[i] - lam[j])
            if d < best[0]:
                best = (d, i, j)
    return best


def minimum_gap(model: ModelSpec, params: Dict[str, object],
                intertwiner: Optional[str] = None) -> float:
    """Smallest distance between two eigenvalues, relative to the spectral scale."""
    H, _ = _spectrum(model, params, intertwiner)
    lam = la.eigvals(H)
    return _closest_pair(lam)[0] / kr.spectral_scale(lam)


def locate_degeneracy(model: ModelSpec, name: str, bracket: Tuple[float, float],
                      fixed: Optional[Dict[str, object]] = None,
                      tol: float = 1e-12,
                      gap_tol: float = GAP_TOL,
                      intertwiner: Optional[str] = None) -> Degeneracy:
    """Find and classify the closest approach of two eigenvalues in ``bracket``.

    The gap is not sign-changing, so instead of bisection it is minimized:
    a coarse scan selects the basin and golden-section search narrows it to
    ``tol * |bracket|``. Golden section needs no smoothness, which matters at
    an EP where the gap has a square-root cusp. The closest pair at the
    minimizer is then classified as a two-member cluster.

    Raises
    ------
    NoDegeneracyFound
        If the smallest gap found exceeds ``gap_tol`` (relative).
    """
    fixed = dict(fixed or {})
    lo, hi = float(bracket[0]), float(bracket[1])

    def gap(v):
        return minimum_gap(model, dict(fixed, **{name: float(v)}), intertwiner)

    # coarse scan picks the basin, golden section then resolves the cusp
    grid = np.linspace(lo, hi, SCAN_POINTS)
    vals = [gap(v) for v in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    gc, gd = gap(c), gap(d)
    stop = max(tol * abs(hi - lo), 4 * np.finfo(float).eps * max(1.0, abs(a)))
    while b - a > stop:
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = gap(c)
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = gap(d)
    x = float(min((grid[k], c, d), key=gap))
    g = gap(x)
    if g > gap_tol:
        raise NoDegeneracyFound(f"smallest relative gap {g:.3e} exceeds {gap_tol:g}")

    H, G = _spectrum(model, dict(fixed, **{name: x}), intertwiner)
    dec = la.gen_eig(H)
    _, i, j = _closest_pair(dec.eigenvalues)
    rep = complex(0.5 * (dec.eigenvalues[i] + dec.eigenvalues[j]))
    cluster = kr.Cluster(rep, (i, j))
    # the pair may sit wider than the default cluster tolerance at an EP
    ctol = min(la.CLUSTER_TOL, 0.5 * g)
    if abs(rep.imag) > kr.REAL_TOL * kr.spectral_scale(dec.eigenvalues):
        kind = kr.Kind.COMPLEX_PAIRED
    else:
        kind, _ = kr.classify_kind(H, G, cluster, dec=dec, cluster_tol=ctol)
    mult = kr.multiplicities(H, cluster, dec=dec, cluster_tol=ctol)
    return Degeneracy(x, kind, mult[1] < mult[0], g, rep, mult)
