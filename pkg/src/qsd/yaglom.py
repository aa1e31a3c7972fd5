"""Yaglom limits of the conditional laws, computed from the spectrum.

Eigen-indices in this module follow the usual convention: index 1 is the
principal eigenvalue, so the coordinate ``a_i`` lives at ``coords.a[i - 2]``
and ``spec.eigenvalues[i - 1]`` is ``lambda_i``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chain import ProbDist, ReversibleChain, TransitionKernel, _reachable
from .conditioning import SeparationProfile, separation
from .errors import (
    ConvergenceFailure,
    NonPositiveEll,
    NumericalError,
    StationaryStart,
    UnsupportedDimension,
    ValidationError,
)
from .spectral import Coordinates, SpectralData, coordinates, eigendecompose

COEFF_THRESHOLD = 1e-10
PHI_CLAMP = 1e-12
HALT_TIE = 1e-9
FINGERPRINT_DECIMALS = 6
QSD_TOL = 1e-14
QSD_MAX_ITER = 1_000_000


@dataclass(frozen=True)
class YaglomReport:
    lambda_alpha: float
    index_set: Tuple[int, ...]
    ell_alpha: float
    phi_star: ProbDist
    halting_state: int
    dominant_vector: np.ndarray
    used_simplified: bool
    lazy_gamma: Optional[float] = None
    rate_alpha: float = 0.0
    residuals: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PropertyResiduals:
    evolution: float
    ratio: float
    min_entry: float
    eigen: float

    def as_dict(self) -> Dict[str, float]:
        return {"evolution": self.evolution, "ratio": self.ratio, "min_entry": self.min_entry, "eigen": self.eigen}


@dataclass(frozen=True)
class BasinMap:
    """Yaglom limits over a barycentric grid of a 3-state simplex.

    ``classes[k]`` is the rounded limit shared by all probes with
    ``class_ids == k``; ids are assigned in grid order.
    """

    resolution: int
    probes: np.ndarray
    class_ids: np.ndarray
    lambdas: np.ndarray
    classes: List[np.ndarray]
    skipped: List[np.ndarray]

    def counts(self) -> np.ndarray:
        return np.bincount(self.class_ids, minlength=len(self.classes))


@dataclass(frozen=True)
class AbsorbingQsd:
    restricted: np.ndarray
    eigenvalue: float
    rate: float
    phi: ProbDist
    iterations: int


def dominant_data(coords: Coordinates, spec: SpectralData) -> Tuple[float, Tuple[int, ...]]:
    """Leading eigenvalue seen by ``alpha`` and its whole eigenvalue cluster.

    A coordinate counts as nonzero when ``|a_i| > 1e-10 * max_j |a_j|``.
    Returns ``(lambda_alpha, I_alpha)`` with 1-based eigen-indices.
    """
    a = np.abs(coords.a)
    top = a.max() if a.size else 0.0
    if not top > 1e-14:
        raise StationaryStart("all eigen-coordinates vanish: alpha equals pi")
    for cluster in spec.clusters():
        if np.any(a[[i - 1 for i in cluster]] > COEFF_THRESHOLD * top):
            lam = float(np.mean(spec.eigenvalues[cluster]))
            return lam, tuple(i + 1 for i in cluster)
    raise StationaryStart("no eigen-coordinate above threshold")


def _cluster_profile(coords: Coordinates, spec: SpectralData, index_set: Sequence[int]) -> np.ndarray:
    # g(y) = -sum_{i in I} a_i v_i(y) / pi(y); in this gauge v_i / pi = f_i.
    idx = [i - 1 for i in index_set]
    return -(coords.a[[i - 1 for i in idx]] @ spec.right[idx])


def ell_alpha(coords: Coordinates, spec: SpectralData, index_set: Sequence[int]) -> float:
    """``max_y sum_{i in I} -a_i v_i(y) / pi(y)``."""
    ell = float(_cluster_profile(coords, spec, index_set).max())
    if not ell > 0:
        raise NonPositiveEll(f"ell_alpha = {ell:.3e}")
    return ell


def _as_dist(alpha) -> ProbDist:
    return alpha if isinstance(alpha, ProbDist) else ProbDist(alpha)


def yaglom_limit(
    alpha,
    chain: ReversibleChain,
    spec: Optional[SpectralData] = None,
    lazy: Optional[float] = None,
) -> YaglomReport:
    """Limit of the conditional laws started from ``alpha``.

    ``phi_star = pi + (1/ell) sum_{i in I} a_i v_i``. For a singleton cluster
    the closed form ``pi + v / max_{v<0} |v/pi|`` is evaluated as well and
    its distance to the general result is stored under
    ``residuals["simplified_agreement"]``.

    Raises
    ------
    StationaryStart
        ``alpha`` is (numerically) ``pi``.
    NonPositiveSpectrum
        Propagated from :func:`eigendecompose` when ``lazy`` is None.
    """
    alpha = _as_dist(alpha)
    if spec is None:
        spec = eigendecompose(chain, lazy=lazy)
    pi = np.asarray(spec.pi)
    if separation(alpha, spec.pi) < 1e-14:
        raise StationaryStart("alpha coincides with the stationary distribution")

    coords = coordinates(alpha, spec)
    lam, index_set = dominant_data(coords, spec)
    g = _cluster_profile(coords, spec, index_set)
    ell = float(g.max())
    if not ell > 0:
        raise NonPositiveEll(f"ell_alpha = {ell:.3e}")

    raw = pi * (1.0 - g / ell)
    lowest = float(raw.min())
    if lowest < -PHI_CLAMP:
        raise NumericalError(f"Yaglom limit has entry {lowest:.3e}")
    phi = np.where(raw < 0, 0.0, raw)
    phi /= phi.sum()
    vbar = -pi * g / ell
    halting = int(np.flatnonzero(g >= ell * (1.0 - HALT_TIE))[0])

    residuals = {"min_before_clamp": lowest, "threshold": COEFF_THRESHOLD}
    used_simplified = len(index_set) == 1
    if used_simplified:
        k = index_set[0]
        w = np.sign(coords.a[k - 2]) * spec.left[k - 1]
        neg = w < 0
        simple = pi + w / np.abs(w[neg] / pi[neg]).max()
        residuals["simplified_agreement"] = float(np.abs(simple - phi).max())
    P = spec.kernel.P
    residuals["eigen_residual"] = float(np.abs(vbar @ P - lam * vbar).max())
    rate = float(np.mean(spec.rates[[i - 1 for i in index_set]]))
    return YaglomReport(
        lambda_alpha=lam,
        index_set=tuple(index_set),
        ell_alpha=ell,
        phi_star=ProbDist(phi),
        halting_state=halting,
        dominant_vector=vbar,
        used_simplified=used_simplified,
        lazy_gamma=spec.lazy_gamma,
        rate_alpha=rate,
        residuals=residuals,
    )


def verify_properties(
    report: YaglomReport,
    chain: ReversibleChain,
    spec: SpectralData,
    profile: Optional[SeparationProfile] = None,
    times: Sequence[int] = (1, 5, 25),
) -> PropertyResiduals:
    """Residuals of the four structural properties of a Yaglom limit.

    ``evolution``: ``phi P^t`` against ``lam^t phi + (1 - lam^t) pi``,
    ``ratio``: ``|s_T / s_{T-1} - lam|`` (NaN without a profile of length 2),
    ``min_entry``: smallest entry of ``phi``,
    ``eigen``: ``|vbar P - lam vbar|``.
    """
    P = spec.kernel.P
    pi = np.asarray(spec.pi)
    phi = np.asarray(report.phi_star)
    lam = report.lambda_alpha
    x = phi.copy()
    worst, t = 0.0, 0
    for target in sorted(times):
        while t < target:
            x = x @ P
            t += 1
        expect = lam**t * phi + (1.0 - lam**t) * pi
        worst = max(worst, float(np.abs(x - expect).max()))
    ratio = float("nan")
    if profile is not None and profile.s.size >= 2:
        ratio = abs(profile.s[-1] / profile.s[-2] - lam)
    vbar = report.dominant_vector
    eigen = float(np.abs(vbar @ P - lam * vbar).max())
    return PropertyResiduals(evolution=worst, ratio=ratio, min_entry=float(phi.min()), eigen=eigen)


def barycentric_grid(resolution: int) -> np.ndarray:
    """All points ``(i, j, R - i - j) / R`` ordered by ``(i, j)``."""
    pts = [(i, j, resolution - i - j) for i in range(resolution + 1) for j in range(resolution + 1 - i)]
    return np.array(pts, dtype=float) / resolution


def classify_basins(
    chain: ReversibleChain,
    resolution: int,
    lazy: Optional[float] = None,
    workers: Optional[int] = None,
) -> BasinMap:
    """Group grid probes of a 3-state simplex by their Yaglom limit.

    Limits are fingerprinted by rounding to 6 decimals; a probe equal to
    ``pi`` is skipped.
    """
    if chain.n != 3:
        raise UnsupportedDimension(f"basins are defined for 3 states, got {chain.n}")
    if resolution < 10:
        raise ValidationError("resolution must be at least 10")
    spec = eigendecompose(chain, lazy=lazy)
    pi = np.asarray(spec.pi)
    grid = barycentric_grid(resolution)
    skip = np.abs(grid - pi).max(axis=1) <= 1e-12
    probes = grid[~skip]

    def one(w):
        return yaglom_limit(ProbDist(w), chain, spec=spec)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, probes))
    else:
        reports = [one(w) for w in probes]

    seen: Dict[tuple, int] = {}
    classes: List[np.ndarray] = []
    ids = np.empty(len(reports), dtype=int)
    for k, rep in enumerate(reports):
        key = tuple(np.round(np.asarray(rep.phi_star), FINGERPRINT_DECIMALS) + 0.0)
        if key not in seen:
            seen[key] = len(classes)
            classes.append(np.array(key))
        ids[k] = seen[key]
    return BasinMap(
        resolution=resolution,
        probes=probes,
        class_ids=ids,
        lambdas=np.array([r.lambda_alpha for r in reports]),
        classes=classes,
        skipped=list(grid[skip]),
    )


def restrict(kernel: TransitionKernel, keep: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Sub-matrix on the states ``keep`` and the per-row mass leaving them."""
    keep = list(keep)
    drop = [x for x in range(kernel.n) if x not in keep]
    P = kernel.P
    return P[np.ix_(keep, keep)].copy(), P[np.ix_(keep, drop)].sum(axis=1)


def absorbing_qsd(restricted, escape: Optional[Sequence[float]] = None) -> AbsorbingQsd:
    """Classical quasi-stationary law of a substochastic irreducible matrix.

    Power iteration is run on the nonnegative Green matrix
    ``G = (I - [P])^{-1}``, whose Perron vector is that of ``[P]`` with
    eigenvalue ``1/(1 - lambda*)``. ``escape`` gives the exact mass each row
    loses; when omitted it is ``1 - rowsum``. Supplying it avoids the
    cancellation in ``1 - P(x,x)`` when escape rates are tiny.

    Raises
    ------
    ConvergenceFailure
        If the iterates do not settle to 1e-14 within 10**6 steps.
    """
    Q = np.atleast_2d(np.array(restricted, dtype=float))
    m = Q.shape[0]
    if Q.shape != (m, m):
        raise ValidationError("restricted matrix must be square")
    if Q.min() < 0:
        raise ValidationError("restricted matrix has negative entries")
    esc = 1.0 - Q.sum(axis=1) if escape is None else np.asarray(escape, dtype=float)
    if esc.shape != (m,) or esc.min() < -1e-12 or not esc.max() > 0:
        raise ValidationError("restricted matrix must lose mass on some row")
    if not (_reachable(Q > 0).all() and _reachable((Q > 0).T).all()):
        raise ValidationError("restricted matrix is not irreducible")

    off = Q.copy()
    np.fill_diagonal(off, 0.0)
    M = -off
    M[np.diag_indices(m)] = np.maximum(esc, 0.0) + off.sum(axis=1)
    G = np.linalg.solve(M, np.eye(m))

    phi = np.full(m, 1.0 / m)
    for it in range(1, QSD_MAX_ITER + 1):
        nxt = phi @ G
        rho = nxt.sum()
        nxt /= rho
        done = np.abs(nxt - phi).max() <= QSD_TOL
        phi = nxt
        if done:
            break
    else:
        raise ConvergenceFailure("power iteration for the quasi-stationary law did not converge")
    rate = 1.0 / float((phi @ G).sum())
    return AbsorbingQsd(restricted=Q, eigenvalue=1.0 - rate, rate=rate, phi=ProbDist(phi), iterations=it)
