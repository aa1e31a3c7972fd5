"""Real spectral decomposition of reversible kernels.

The kernel is symmetrized as ``S = D^{1/2} P D^{-1/2}`` with ``D = diag(pi)``
and diagonalized by cyclic Jacobi rotations. Rotations act on ``S - I`` with
the diagonal rebuilt from off-diagonal row sums, so eigenvalues close to one
keep relative accuracy in their distance ``1 - lambda`` (the "rate").

Gauge: ``sum_x pi(x) f_i(x)^2 = 1``, ``v_i = pi * f_i`` and the first
non-negligible entry of each ``f_i`` is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .chain import ProbDist, ReversibleChain, TransitionKernel, lazy_chain
from .errors import EigensolverFailure, NonPositiveSpectrum, ValidationError

GAUGE = "pi-weighted-unit"
POSITIVE_FLOOR = 1e-12
TIE_TOL = 1e-9
JACOBI_FAIL = 1e-12
MAX_SWEEPS = 100
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues sorted descending with biorthonormal eigenvector pairs.

    ``left[i]`` is the row vector ``v_{i+1}``, ``right[i]`` is ``f_{i+1}``;
    ``rates[i] = 1 - eigenvalues[i]`` computed without cancellation.
    """

    eigenvalues: np.ndarray
    rates: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pi: ProbDist
    kernel: TransitionKernel
    lazy_gamma: Optional[float] = None

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def clusters(self) -> List[List[int]]:
        """Groups of 0-based eigen-positions ``1..n-1`` with tied eigenvalues.

        The principal eigenvalue is never part of a cluster.
        """
        out: List[List[int]] = []
        for i in range(1, self.n):
            if out and abs(self.rates[i] - self.rates[out[-1][-1]]) <= TIE_TOL * max(
                1.0, abs(self.eigenvalues[i])
            ):
                out[-1].append(i)
            else:
                out.append([i])
        return out

    def reconstruct(self) -> np.ndarray:
        """``|1><pi| + sum_i lambda_i |f_i><v_i|`` as a dense matrix."""
        return (self.right * self.eigenvalues[:, None]).T @ self.left


def jacobi_eigh(A: np.ndarray, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns ``(w, V)`` with ``A V = V diag(w)`` and ``V`` orthogonal; the
    order of ``w`` is not sorted.

    Raises
    ------
    EigensolverFailure
        If the off-diagonal sup-norm is still above 1e-12 after
        ``max_sweeps`` sweeps.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.abs(A).max()
    if scale == 0.0:
        return np.zeros(n), V
    floor = 1e-30 * scale
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= floor or abs(apq) <= _EPS * np.sqrt(abs(A[p, p] * A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                rotated = True
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p].copy(), A[q].copy()
                A[p], A[q] = c * rp - s * rq, s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * cp - s * cq, s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    off = np.abs(A - np.diag(np.diag(A))).max()
    if off > JACOBI_FAIL:
        raise EigensolverFailure(f"off-diagonal residual {off:.3e} after {max_sweeps} sweeps")
    return np.diag(A).copy(), V


def symmetrized_generator(kernel: TransitionKernel) -> np.ndarray:
    """``D^{1/2} (P - I) D^{-1/2}`` for a reversible kernel.

    Off-diagonal entries are ``sqrt(P(x,y) P(y,x))``, which equals the
    symmetrization under detailed balance without touching ``pi``.
    """
    P = kernel.P
    H = np.sqrt(P * P.T)
    np.fill_diagonal(H, -kernel.offdiag_rowsum())
    return H


def _fix_sign(f: np.ndarray) -> np.ndarray:
    big = np.flatnonzero(np.abs(f) > 1e-10 * np.abs(f).max())
    return -f if f[big[0]] < 0 else f


def eigendecompose(chain: ReversibleChain, lazy: Optional[float] = None) -> SpectralData:
    """Spectral data of a reversible chain in the pi-weighted unit gauge.

    Parameters
    ----------
    chain : ReversibleChain
    lazy : float, optional
        If given and some eigenvalue is ``<= 1e-12``, the chain is replaced by
        its lazy version with this ``gamma`` (conventionally 0.5) and the
        result records ``lazy_gamma``.

    Raises
    ------
    NonPositiveSpectrum
        Some eigenvalue is ``<= 1e-12`` and ``lazy`` is None.
    """
    pi = np.asarray(chain.pi)
    n = chain.n
    w, U = jacobi_eigh(symmetrized_generator(chain.kernel))
    order = np.argsort(-w, kind="stable")
    w, U = w[order], U[:, order]
    rates = np.maximum(-w, 0.0)
    rates[0] = 0.0
    eig = 1.0 - rates
    if eig[-1] <= POSITIVE_FLOOR:
        if lazy is None:
            raise NonPositiveSpectrum(
                f"smallest eigenvalue {eig[-1]:.6g} is not positive; pass lazy=0.5 to use the lazy chain"
            )
        out = eigendecompose(lazy_chain(chain, lazy))
        return replace(out, lazy_gamma=lazy)

    root = np.sqrt(pi)
    U[:, 0] = root
    for i in range(1, n):
        u = U[:, i] - (U[:, i] @ root) * root
        U[:, i] = u / np.linalg.norm(u)
    F = U / root[:, None]
    for i in range(1, n):
        F[:, i] = _fix_sign(F[:, i])
    F[:, 0] = 1.0
    right = F.T.copy()
    left = right * pi[None, :]
    left[0] = pi
    for arr in (eig, rates, left, right):
        arr.setflags(write=False)
    return SpectralData(eig, rates, left, right, chain.pi, chain.kernel)


def spectral_evolve(alpha: ProbDist, spec: SpectralData, t: int) -> np.ndarray:
    """``pi + sum_i lambda_i^t a_i v_i``; an independent route to ``alpha P^t``."""
    a = spec.right[1:] @ np.asarray(alpha)
    return np.asarray(spec.pi) + (a * spec.eigenvalues[1:] ** t) @ spec.left[1:]


def rotate_cluster(spec: SpectralData, positions: Sequence[int], Q: np.ndarray) -> SpectralData:
    """Re-base a degenerate cluster by an orthogonal matrix ``Q``.

    ``positions`` are 0-based eigen-positions of one cluster; the new right
    vectors are ``Q^T f``. Biorthonormality is preserved because the gauge is
    pi-orthonormal.
    """
    positions = list(positions)
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (len(positions), len(positions)) or not np.allclose(Q.T @ Q, np.eye(len(positions))):
        raise ValidationError("Q must be an orthogonal matrix matching the cluster size")
    right = np.array(spec.right)
    left = np.array(spec.left)
    right[positions] = Q.T @ right[positions]
    left[positions] = Q.T @ left[positions]
    right.setflags(write=False)
    left.setflags(write=False)
    return replace(spec, right=right, left=left)


@dataclass(frozen=True)
class Coordinates:
    """``a[k] = <alpha, f_{k+2}>``: coordinates of ``alpha - pi`` on ``v_2..v_n``."""

    a: np.ndarray

    def reconstruct(self, spec: SpectralData) -> np.ndarray:
        return np.asarray(spec.pi) + self.a @ spec.left[1:]


def coordinates(alpha: ProbDist, spec: SpectralData) -> Coordinates:
    if alpha.n != spec.n:
        raise ValidationError(f"alpha has {alpha.n} states, spectrum has {spec.n}")
    a = spec.right[1:] @ np.asarray(alpha)
    a.setflags(write=False)
    return Coordinates(a)
