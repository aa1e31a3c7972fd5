"""Law of the optimal strong stationary time and its killed birth chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ProbDist, TransitionKernel
from .conditioning import ConditionalTrajectory, SeparationProfile
from .errors import ValidationError


@dataclass(frozen=True)
class SstProfile:
    """``pmf[t] = P(tau = t)`` for ``t <= T``; ``tail = P(tau > T) = s_T``."""

    pmf: np.ndarray
    tail: float
    survival: np.ndarray
    survival_ratios: np.ndarray

    @property
    def kill_probs(self) -> np.ndarray:
        return 1.0 - self.survival_ratios


@dataclass(frozen=True)
class BirthChain:
    """Pure-birth chain on ``0..T`` with killing into the cemetery state.

    From ``t`` it moves to ``t + 1`` with probability ``1 - kill[t]`` and is
    absorbed otherwise. ``link[t] = phi_t`` and ``cemetery_row = pi`` are the
    rows of the intertwining link; the chain starts from
    ``s_0 delta_0 + (1 - s_0) delta_cemetery``.
    """

    kill: np.ndarray
    link: np.ndarray
    cemetery_row: np.ndarray
    start_mass: float

    @property
    def horizon(self) -> int:
        return self.link.shape[0] - 1

    def hitting_pmf(self) -> np.ndarray:
        """``P(tau_cemetery = t)`` for ``t = 0..len(kill)`` under the initial law."""
        alive = self.start_mass * np.concatenate(([1.0], np.cumprod(1.0 - self.kill)))
        out = np.empty(self.kill.size + 1)
        out[0] = 1.0 - self.start_mass
        out[1:] = alive[:-1] * self.kill
        return out


def sst_profile(profile: SeparationProfile) -> SstProfile:
    s = np.asarray(profile.s, dtype=float)
    pmf = np.empty(s.size)
    pmf[0] = 1.0 - s[0]
    pmf[1:] = s[:-1] - s[1:]
    if pmf.min() < -1e-14:
        raise ValidationError(f"separation increases by {-pmf.min():.3e}")
    pmf[pmf < 0] = 0.0
    ratios = np.clip(profile.ratios(), 0.0, 1.0)
    return SstProfile(pmf=pmf, tail=float(s[-1]), survival=s.copy(), survival_ratios=ratios)


def build_birth_chain(
    trajectory: ConditionalTrajectory, profile: SeparationProfile, pi: ProbDist
) -> BirthChain:
    """Birth chain on the steps of ``trajectory``.

    If the trajectory stopped because the separation vanished, the last
    row gets kill probability 1.
    """
    m = len(trajectory)
    if profile.s.size < m:
        raise ValidationError("profile is shorter than the trajectory")
    kill = 1.0 - np.clip(profile.ratios()[: m - 1], 0.0, 1.0)
    if trajectory.terminated_at is not None:
        kill = np.append(kill, 1.0)
    return BirthChain(
        kill=kill,
        link=np.asarray(trajectory.phi),
        cemetery_row=np.asarray(pi).copy(),
        start_mass=float(profile.s[0]),
    )


def intertwining_residual(bc: BirthChain, kernel: TransitionKernel) -> float:
    """Sup-norm of ``Lambda P - P_hat Lambda`` over the rows that have a successor.

    These are the rows ``t`` with a kill probability (all but the truncated
    final one) plus the cemetery row.
    """
    P = kernel.P
    L = bc.link
    m = bc.kill.size
    if m == 0:
        raise ValidationError("intertwining needs at least two steps")
    succ = np.vstack([L[1:], bc.cemetery_row[None, :]])[:m]
    k = bc.kill[:, None]
    rhs = (1.0 - k) * succ + k * bc.cemetery_row[None, :]
    rows = np.abs(L[:m] @ P - rhs).max()
    cemetery = np.abs(bc.cemetery_row @ P - bc.cemetery_row).max()
    return float(max(rows, cemetery))
