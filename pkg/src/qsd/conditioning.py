"""Separation distance and the conditional distributions of the optimal SST.

Nothing here touches spectral data: the trajectory computed in this module
is the brute-force oracle for the spectral Yaglom formulas.

The trajectory evolves the deviation ``delta_t = mu_t - pi`` instead of
``mu_t``. Forming ``mu_t - pi`` by subtraction leaves an absolute error of
order 1e-16, which swamps ``phi_t = delta_t / s_t + pi`` once ``s_t`` is
small; evolving ``delta_t`` keeps a relative error instead. Since ``phi_t``
only depends on the direction of ``delta_t``, the deviation is rescaled at
every step and ``log s_t`` is tracked separately, so nothing underflows.

Relative accuracy is lost only when a single step cancels almost all of
``delta`` (a kernel with a zero eigenvalue can annihilate it exactly). The
trajectory stops at such a step: the separation is zero from there on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .chain import ProbDist, TransitionKernel, stationary_distribution
from .errors import AlreadyStationary, NumericalError, ValidationError

STATIONARY_TOL = 1e-14
PHI_CLAMP = 1e-12
# a step whose output is this small relative to the no-cancellation bound
# |delta| P carries no significant digits
CANCELLATION_TOL = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class SeparationProfile:
    """``s[t]`` for ``t = 0..T``; ``log_s`` keeps values that underflow ``s``."""

    alpha: ProbDist
    s: np.ndarray
    log_s: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return self.s.size - 1

    def ratios(self) -> np.ndarray:
        """``s_{t+1} / s_t`` for ``t = 0..T-1``, with 0 once ``s`` has vanished."""
        if self.log_s is not None:
            with np.errstate(invalid="ignore"):
                r = np.exp(np.diff(self.log_s))
            return np.nan_to_num(r, nan=0.0)
        s = np.asarray(self.s)
        r = np.zeros(max(s.size - 1, 0))
        live = s[:-1] > 0
        r[live] = s[1:][live] / s[:-1][live]
        return r


@dataclass(frozen=True)
class ConditionalTrajectory:
    """Rows ``phi[t]`` and ``mu[t]`` for ``t = 0..len-1``.

    ``terminated_at`` is the first step whose separation is numerically zero
    (a step that cancelled the deviation); the arrays stop just before it.
    """

    phi: np.ndarray
    mu: np.ndarray
    pi: ProbDist
    terminated_at: Optional[int] = None

    def __len__(self):
        return self.phi.shape[0]

    def phi_at(self, t: int) -> ProbDist:
        return ProbDist(self.phi[t])


def separation(mu: ProbDist, pi: ProbDist) -> float:
    """``max_y (1 - mu(y)/pi(y))`` clamped to ``[0, 1]``."""
    s = float(np.max(1.0 - np.asarray(mu) / np.asarray(pi)))
    return min(max(s, 0.0), 1.0)


def _phi_from_deviation(delta: np.ndarray, pi: np.ndarray) -> Tuple[float, np.ndarray]:
    g = -delta / pi
    s = float(g.max())
    if not s > 0:
        return 0.0, pi.copy()
    # pi * (1 - g/s) vanishes exactly at the maximizer of g.
    phi = pi * (1.0 - g / s)
    if phi.min() < -PHI_CLAMP:
        raise NumericalError(f"conditional distribution has entry {phi.min():.3e}")
    phi[phi < 0] = 0.0
    return s, phi / phi.sum()


def greedy_decomposition(mu: ProbDist, pi: ProbDist) -> Tuple[float, ProbDist]:
    """Minimal ``s`` with ``mu = (1 - s) pi + s phi``, and that boundary ``phi``.

    Raises
    ------
    AlreadyStationary
        If the separation of ``mu`` from ``pi`` is below 1e-14.
    """
    p = np.asarray(pi)
    s, phi = _phi_from_deviation(np.asarray(mu) - p, p)
    s = min(s, 1.0)
    if s < STATIONARY_TOL:
        raise AlreadyStationary("mu coincides with pi")
    return s, ProbDist(phi)


def conditional_trajectory(
    alpha: ProbDist,
    kernel: TransitionKernel,
    T: int,
    pi: Optional[ProbDist] = None,
) -> Tuple[ConditionalTrajectory, SeparationProfile]:
    """Conditional laws ``phi_t`` given that the optimal SST exceeds ``t``.

    Valid for any ergodic kernel. Returns the trajectory and the separation
    profile ``s_0..s_T`` (shorter if the deviation is annihilated).

    Raises
    ------
    AlreadyStationary
        If ``s_0 < 1e-14``.
    """
    if alpha.n != kernel.n:
        raise ValidationError(f"alpha has {alpha.n} states, kernel has {kernel.n}")
    if T < 0:
        raise ValidationError("horizon must be nonnegative")
    if pi is None:
        pi = stationary_distribution(kernel)
    p = np.asarray(pi)
    P = kernel.P
    n = kernel.n

    delta = np.asarray(alpha) - p
    delta -= delta.sum() * p
    s0, phi0 = _phi_from_deviation(delta, p)
    s0 = min(s0, 1.0)
    if s0 < STATIONARY_TOL:
        raise AlreadyStationary("alpha coincides with the stationary distribution")

    phis = np.empty((T + 1, n))
    mus = np.empty((T + 1, n))
    log_s = np.empty(T + 1)
    phis[0], mus[0], log_s[0] = phi0, np.asarray(alpha), np.log(s0)
    # true deviation = exp(log_scale) * delta
    log_scale = 0.0
    terminated = None
    last = T
    for t in range(1, T + 1):
        bound = float((np.abs(delta) @ P).max())
        delta = delta @ P
        delta -= delta.sum() * p
        size = float(np.abs(delta).max())
        if size <= CANCELLATION_TOL * bound:
            terminated, last = t, t - 1
            break
        delta /= size
        log_scale += np.log(size)
        s_rel, phi = _phi_from_deviation(delta, p)
        if not s_rel > 0:
            terminated, last = t, t - 1
            break
        phis[t], log_s[t] = phi, log_scale + np.log(s_rel)
        mus[t] = p + np.exp(log_scale) * delta

    phis, mus, log_s = phis[: last + 1], mus[: last + 1], log_s[: last + 1]
    s = np.minimum(np.exp(log_s), 1.0)
    for arr in (phis, mus, s, log_s):
        arr.setflags(write=False)
    return (
        ConditionalTrajectory(phi=phis, mu=mus, pi=pi, terminated_at=terminated),
        SeparationProfile(alpha=alpha, s=s, log_s=log_s),
    )


def separation_profile(
    alpha: ProbDist, kernel: TransitionKernel, T: int, pi: Optional[ProbDist] = None
) -> SeparationProfile:
    """Separation profile ``s_0..s_T``, always of full length.

    Steps at or after a termination of the trajectory carry ``s_t = 0``;
    the profile is identically zero when ``alpha = pi``.
    """
    try:
        profile = conditional_trajectory(alpha, kernel, T, pi)[1]
    except AlreadyStationary:
        return SeparationProfile(alpha=alpha, s=np.zeros(T + 1))
    s = np.zeros(T + 1)
    s[: profile.s.size] = profile.s
    log_s = np.full(T + 1, -np.inf)
    log_s[: profile.s.size] = profile.log_s
    return SeparationProfile(alpha=alpha, s=s, log_s=log_s)


def verify_recursion(
    trajectory: ConditionalTrajectory, profile: SeparationProfile, kernel: TransitionKernel
) -> float:
    """Sup-norm residual of ``phi_t = r phi_{t-1} P + (1 - r) pi``, ``r = s_{t-1}/s_t``."""
    phi = trajectory.phi
    if len(phi) < 2:
        return 0.0
    p = np.asarray(trajectory.pi)
    # s_{t-1} / s_t from the stored profile
    r = (1.0 / profile.ratios()[: len(phi) - 1])[:, None]
    rhs = r * (phi[:-1] @ kernel.P) + (1.0 - r) * p[None, :]
    return float(np.abs(phi[1:] - rhs).max())


def scaling_residual(
    trajectory: ConditionalTrajectory, profile: SeparationProfile, kernel: TransitionKernel
) -> float:
    """Sup-norm residual of ``s_t (phi_t - pi) = s_0 (phi_0 P^t - pi)``."""
    p = np.asarray(trajectory.pi)
    x = np.array(trajectory.phi[0])
    worst = 0.0
    for t in range(len(trajectory)):
        lhs = profile.s[t] * (trajectory.phi[t] - p)
        rhs = profile.s[0] * (x - p)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
        x = x @ kernel.P
    return worst


def min_entries(trajectory: ConditionalTrajectory) -> np.ndarray:
    """``min_y phi_t(y)`` per step; every entry should vanish."""
    return trajectory.phi.min(axis=1)
