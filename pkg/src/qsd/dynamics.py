"""Period detection for conditional-law sequences that need not converge.

Works on trajectories alone, so it applies to non-reversible kernels where no
real spectral decomposition exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from .conditioning import ConditionalTrajectory
from .errors import WindowTooShort

BURN_IN = 50
MAX_PERIOD = 24
CYCLE_TOL = 1e-8


class CycleStatus(str, Enum):
    CONVERGED = "Converged"
    PERIODIC = "Periodic"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class CycleReport:
    """Outcome of :func:`detect_cycle`.

    ``representatives[k]`` is ``phi_{burn_in + k}``, i.e. the subsequence
    limit for times ``t = burn_in + k (mod period)``.
    """

    status: CycleStatus
    period: Optional[int]
    representatives: List[np.ndarray] = field(default_factory=list)
    burn_in: int = BURN_IN
    max_dev: float = float("nan")

    def representative_for(self, t: int) -> np.ndarray:
        if self.period is None:
            raise ValueError("no cycle was detected")
        return self.representatives[(t - self.burn_in) % self.period]


def _deviation(phi: np.ndarray, start: int, stop: int, p: int) -> float:
    return float(np.abs(phi[start + p : stop + p + 1] - phi[start : stop + 1]).max())


def detect_cycle(
    trajectory: ConditionalTrajectory,
    burn_in: int = BURN_IN,
    max_period: int = MAX_PERIOD,
    tol: float = CYCLE_TOL,
) -> CycleReport:
    """Smallest ``p <= max_period`` with ``|phi_{t+p} - phi_t| <= tol`` on the window.

    The window is ``t in [burn_in, burn_in + max_period]``.

    Raises
    ------
    WindowTooShort
        If the trajectory has fewer than ``burn_in + 2 * max_period + 1`` rows.
    """
    phi = np.asarray(trajectory.phi)
    need = burn_in + 2 * max_period + 1
    if phi.shape[0] < need:
        raise WindowTooShort(f"trajectory has {phi.shape[0]} steps, need {need}")
    stop = burn_in + max_period
    for p in range(1, max_period + 1):
        dev = _deviation(phi, burn_in, stop, p)
        if dev <= tol:
            status = CycleStatus.CONVERGED if p == 1 else CycleStatus.PERIODIC
            reps = [phi[burn_in + k].copy() for k in range(p)]
            return CycleReport(status, p, reps, burn_in, dev)
    return CycleReport(CycleStatus.UNDETERMINED, None, [], burn_in, float("nan"))


def matching_periods(
    trajectory: ConditionalTrajectory,
    burn_in: int = BURN_IN,
    max_period: int = MAX_PERIOD,
    tol: float = CYCLE_TOL,
) -> List[int]:
    """Every ``p <= max_period`` passing the window test (not just the smallest)."""
    phi = np.asarray(trajectory.phi)
    stop = burn_in + max_period
    return [p for p in range(1, max_period + 1) if _deviation(phi, burn_in, stop, p) <= tol]
