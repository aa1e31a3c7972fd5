"""Transition kernels, distributions on the simplex and exact evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConvergenceFailure,
    NegativeEntry,
    NotAperiodic,
    NotIrreducible,
    NotReversible,
    ParamOutOfRange,
    RowSumError,
    ValidationError,
)

ROW_SUM_TOL = 1e-12
NEGATIVE_CLAMP = -1e-15
SIMPLEX_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-14
REVERSIBILITY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProbDist:
    """A point of the probability simplex.

    The constructor validates; use :meth:`from_weights` to normalize raw
    nonnegative weights.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("distribution must be a non-empty vector")
        if not np.all(np.isfinite(p)):
            raise ValidationError("distribution has non-finite entries")
        if p.min() < 0:
            raise ValidationError(f"distribution has a negative entry {p.min():.3e}")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"distribution sums to {p.sum():.17g}")
        object.__setattr__(self, "p", _frozen(p))

    @classmethod
    def from_weights(cls, w: Sequence[float], clamp: float = 0.0) -> "ProbDist":
        """Normalize ``w`` onto the simplex, zeroing entries in ``[-clamp, 0)``."""
        w = np.array(w, dtype=float)
        if w.min() < -clamp:
            raise ValidationError(f"weight {w.min():.3e} below clamp -{clamp:g}")
        w[w < 0] = 0.0
        total = w.sum()
        if not total > 0:
            raise ValidationError("weights have zero total mass")
        return cls(w / total)

    @classmethod
    def dirac(cls, n: int, k: int) -> "ProbDist":
        if not 0 <= k < n:
            raise ValidationError(f"state {k} out of range for n={n}")
        p = np.zeros(n)
        p[k] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, n: int) -> "ProbDist":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.p.size

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return self.p.size


@dataclass(frozen=True)
class TransitionKernel:
    """A validated row-stochastic matrix. Build it with :func:`validate_kernel`."""

    P: np.ndarray
    labels: Optional[Tuple[str, ...]] = None
    irreducible: bool = True
    aperiodic: bool = True

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def offdiag_rowsum(self) -> np.ndarray:
        """Per-row mass leaving the state; free of the ``1 - P(x,x)`` cancellation."""
        off = self.P.copy()
        np.fill_diagonal(off, 0.0)
        return off.sum(axis=1)


@dataclass(frozen=True)
class ReversibleChain:
    kernel: TransitionKernel
    pi: ProbDist
    positive_spectrum: bool

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def P(self) -> np.ndarray:
        return self.kernel.P


def _reachable(adj: np.ndarray, start: int = 0) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = np.flatnonzero(adj[frontier].any(axis=0) & ~seen)
        seen[nxt] = True
        frontier = list(nxt)
    return seen


def _period(adj: np.ndarray) -> int:
    # BFS levels from state 0; the period is the gcd of level[u] + 1 - level[v]
    # over all edges u -> v of a strongly connected graph.
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    queue = [0]
    for u in queue:
        for v in np.flatnonzero(adj[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u, v in zip(*np.nonzero(adj)):
        g = gcd(g, int(abs(level[u] + 1 - level[v])))
    return g


def validate_kernel(raw_matrix, labels: Optional[Sequence[str]] = None) -> TransitionKernel:
    """Check a raw square matrix and wrap it as a :class:`TransitionKernel`.

    Entries in ``[-1e-15, 0)`` are clamped to zero; every row must sum to one
    within 1e-12. The chain must be irreducible and aperiodic.

    Raises
    ------
    RowSumError, NegativeEntry, NotIrreducible, NotAperiodic
    """
    P = np.array(raw_matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"kernel must be square, got shape {P.shape}")
    n = P.shape[0]
    if n < 2:
        raise ValidationError("kernel needs at least two states")
    if not np.all(np.isfinite(P)):
        raise ValidationError("kernel has non-finite entries")
    if P.min() < NEGATIVE_CLAMP:
        i, j = np.unravel_index(np.argmin(P), P.shape)
        raise NegativeEntry(f"P[{i},{j}] = {P[i, j]:.3e}")
    P[P < 0] = 0.0
    if P.max() > 1.0 + ROW_SUM_TOL:
        raise ValidationError(f"entry {P.max():.17g} exceeds 1")
    dev = np.abs(P.sum(axis=1) - 1.0)
    if dev.max() > ROW_SUM_TOL:
        i = int(np.argmax(dev))
        raise RowSumError(f"row {i} sums to {P[i].sum():.17g}")
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise ValidationError(f"{len(labels)} labels for {n} states")

    adj = P > 0
    if not (_reachable(adj).all() and _reachable(adj.T).all()):
        raise NotIrreducible("the graph of positive entries is not strongly connected")
    period = _period(adj)
    if period != 1:
        raise NotAperiodic(f"chain has period {period}")
    return TransitionKernel(P=_frozen(P), labels=labels)


def _gth(P: np.ndarray) -> np.ndarray:
    # Grassmann-Taksar-Heyman elimination: subtraction-free, so every entry of
    # pi keeps full relative accuracy even when it is exponentially small.
    A = np.array(P, dtype=float)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    x = np.zeros(n)
    x[0] = 1.0
    for k in range(1, n):
        x[k] = x[:k] @ A[:k, k]
    return x / x.sum()


def _power_stationary(P: np.ndarray, tol: float, max_iter: int = 1_000_000) -> np.ndarray:
    x = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        y = x @ P
        y /= y.sum()
        if np.abs(y - x).max() <= tol:
            return y
        x = y
    raise ConvergenceFailure("power iteration for the stationary distribution did not converge")


def stationary_distribution(kernel: TransitionKernel) -> ProbDist:
    """Unique stationary law of an irreducible aperiodic kernel.

    Solved by GTH elimination; power iteration is the fallback when the
    residual ``max |pi P - pi|`` misses 1e-14.
    """
    P = kernel.P
    pi = _gth(P)
    if not (np.all(pi > 0) and np.abs(pi @ P - pi).max() <= STATIONARY_RESIDUAL_TOL):
        pi = _power_stationary(P, STATIONARY_RESIDUAL_TOL / 10)
        if np.abs(pi @ P - pi).max() > STATIONARY_RESIDUAL_TOL:
            raise ConvergenceFailure("stationary residual above 1e-14")
    return ProbDist(pi)


def check_reversibility(kernel: TransitionKernel, pi: ProbDist) -> Tuple[bool, float]:
    """Detailed-balance test; returns ``(reversible, max violation)``."""
    flux = np.asarray(pi)[:, None] * kernel.P
    violation = float(np.abs(flux - flux.T).max())
    return violation <= REVERSIBILITY_TOL * flux.max(), violation


def _positive_spectrum(kernel: TransitionKernel, pi: ProbDist, floor: float = 1e-12) -> bool:
    # All eigenvalues of the symmetrized kernel exceed ``floor`` iff
    # S - floor * I admits a Cholesky factorization.
    r = np.sqrt(np.asarray(pi))
    S = r[:, None] * kernel.P / r[None, :]
    S = 0.5 * (S + S.T) - floor * np.eye(kernel.n)
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return False
    return True


def reversible_chain(kernel: TransitionKernel, pi: Optional[ProbDist] = None) -> ReversibleChain:
    """Attach the stationary law to ``kernel`` after checking detailed balance."""
    if pi is None:
        pi = stationary_distribution(kernel)
    ok, violation = check_reversibility(kernel, pi)
    if not ok:
        raise NotReversible(f"detailed balance violated by {violation:.3e}")
    return ReversibleChain(kernel=kernel, pi=pi, positive_spectrum=_positive_spectrum(kernel, pi))


def lazy_transform(kernel: TransitionKernel, gamma: float) -> TransitionKernel:
    """Return ``(1 - gamma) P + gamma I``.

    ``gamma = 0`` is accepted and returns the kernel unchanged.
    """
    if not 0.0 <= gamma < 1.0:
        raise ParamOutOfRange(f"gamma must lie in [0, 1), got {gamma}")
    if gamma == 0.0:
        return kernel
    Q = (1.0 - gamma) * kernel.P
    Q[np.diag_indices_from(Q)] += gamma
    return validate_kernel(Q, kernel.labels)


def lazy_chain(chain: ReversibleChain, gamma: float) -> ReversibleChain:
    """Lazy version of a reversible chain; the stationary law is reused."""
    k = lazy_transform(chain.kernel, gamma)
    return ReversibleChain(kernel=k, pi=chain.pi, positive_spectrum=_positive_spectrum(k, chain.pi))


def evolve(alpha: ProbDist, kernel: TransitionKernel, t: int) -> ProbDist:
    """``alpha P^t`` by ``t`` vector-matrix products, renormalized every step."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if alpha.n != kernel.n:
        raise ValidationError(f"alpha has {alpha.n} states, kernel has {kernel.n}")
    mu = np.array(alpha.p)
    P = kernel.P
    for _ in range(t):
        mu = mu @ P
        mu /= mu.sum()
    return ProbDist(mu)
