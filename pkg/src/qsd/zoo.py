"""Parameterized fixture chains.

State indices are 0-based: the two-block chain puts its first block on
``0..n-1`` and the second on ``n..2n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .chain import (
    ReversibleChain,
    TransitionKernel,
    lazy_transform,
    reversible_chain,
    validate_kernel,
)
from .errors import ParamOutOfRange


def make_triangle() -> ReversibleChain:
    """Mean-field walk on three states, ``P = (I + J) / 4``."""
    P = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 4.0
    return reversible_chain(validate_kernel(P, labels=("1", "2", "3")))


def make_two_block(n: int, epsilon: float, gamma: float) -> ReversibleChain:
    """Lazy two-block mean-field chain on ``2n`` states.

    ``Q`` moves within a block with probability ``1 - epsilon`` and across
    with probability ``epsilon``, uniformly over the target block; the result
    is ``(1 - gamma) Q + gamma I``.
    """
    if int(n) != n or n < 2:
        raise ParamOutOfRange(f"block size must be an integer >= 2, got {n}")
    if not 0.0 < epsilon < 0.5:
        raise ParamOutOfRange(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not 0.0 < gamma < 1.0:
        raise ParamOutOfRange(f"gamma must lie in (0, 1), got {gamma}")
    n = int(n)
    J = np.full((n, n), 1.0 / n)
    Q = np.block([[(1.0 - epsilon) * J, epsilon * J], [epsilon * J, (1.0 - epsilon) * J]])
    k = validate_kernel(Q)
    lazy = lazy_transform(k, gamma)
    return reversible_chain(lazy)


@dataclass(frozen=True)
class FwParams:
    """Barriers for the three-state low-temperature walk.

    Rates are ``a, b, c, d = exp(-beta * deltas)``.
    """

    beta: float
    deltas: Tuple[float, float, float, float]

    def __post_init__(self):
        if not self.beta > 0:
            raise ParamOutOfRange(f"beta must be positive, got {self.beta}")
        d = tuple(float(x) for x in self.deltas)
        if len(d) != 4 or min(d) < 0:
            raise ParamOutOfRange("need four nonnegative barriers")
        object.__setattr__(self, "deltas", d)

    @classmethod
    def from_rates(cls, a: float, b: float, c: float, d: float, beta: float = 1.0) -> "FwParams":
        rates = np.array([a, b, c, d], dtype=float)
        if rates.min() <= 0 or rates.max() > 1:
            raise ParamOutOfRange("rates must lie in (0, 1]")
        return cls(beta, tuple(-np.log(rates) / beta))

    @property
    def rates(self) -> Tuple[float, float, float, float]:
        return tuple(float(np.exp(-self.beta * x)) for x in self.deltas)

    @property
    def Z(self) -> float:
        a, b, c, _ = self.rates
        return (a + b + c) / c


def make_fw(params: FwParams) -> ReversibleChain:
    """Tridiagonal walk ``1 <-> 2 <-> 3`` with exponentially small rates.

    Raises
    ------
    ParamOutOfRange
        If a diagonal entry would be negative or a rate is not in (0, 1).
    """
    a, b, c, d = params.rates
    if min(a, b, c, d) <= 0 or max(a, b, c, d) >= 1:
        raise ParamOutOfRange(f"rates {params.rates} must lie in (0, 1)")
    if b + c > 1:
        raise ParamOutOfRange(f"b + c = {b + c:.6g} exceeds 1")
    P = np.array([[1.0 - a, a, 0.0], [b, 1.0 - b - c, c], [0.0, d, 1.0 - d]])
    return reversible_chain(validate_kernel(P, labels=("1", "2", "3")))


def fw_stationary_closed_form(params: FwParams) -> np.ndarray:
    a, b, c, _ = params.rates
    return np.array([b / c, a / c, 1.0]) / params.Z


def make_nonrev_triangle(p: float) -> TransitionKernel:
    """Bistochastic rotation-like kernel with spectrum ``(1, +-i p / sqrt 3)``."""
    if not 0.0 < p <= 1.0:
        raise ParamOutOfRange(f"p must lie in (0, 1], got {p}")
    P = np.array([[1.0, 1.0 + p, 1.0 - p], [1.0 - p, 1.0, 1.0 + p], [1.0 + p, 1.0 - p, 1.0]]) / 3.0
    return validate_kernel(P, labels=("1", "2", "3"))


def make_nonrev_four(epsilon: float) -> TransitionKernel:
    """Cycle ``0 -> 1 -> 2 -> 0`` leaking into state 3 with probability ``epsilon``."""
    if not 0.0 < epsilon < 1.0:
        raise ParamOutOfRange(f"epsilon must lie in (0, 1), got {epsilon}")
    e, r = epsilon, 1.0 - epsilon
    P = np.array([[0.0, r, 0.0, e], [0.0, 0.0, r, e], [r, 0.0, 0.0, e], [r / 3, r / 3, r / 3, e]])
    return validate_kernel(P, labels=("1", "2", "3", "4"))


def random_reversible(n: int, rng: np.random.Generator, gamma: float = 0.5, density: float = 1.0) -> ReversibleChain:
    """Random reversible chain with positive spectrum.

    Symmetric weights ``W`` with a positive diagonal give ``P = D^{-1} W``,
    reversible for ``pi ~ rowsum(W)``; the lazy step then pushes the
    spectrum above zero.
    """
    while True:
        W = rng.uniform(0.05, 1.0, size=(n, n))
        if density < 1.0:
            W *= rng.uniform(size=(n, n)) < density
        W = np.triu(W) + np.triu(W, 1).T
        np.fill_diagonal(W, rng.uniform(0.05, 1.0, size=n))
        P = W / W.sum(axis=1, keepdims=True)
        try:
            k = validate_kernel(P)
        except Exception:
            continue
        chain = reversible_chain(lazy_transform(k, gamma) if gamma else k)
        if chain.positive_spectrum:
            return chain


# canonical parameter sets used by tests and the CLI
FW_BETA8 = FwParams(8.0, (2.0, 3.0, 1.0, 2.0))
FW_BETA14 = FwParams(14.0, (2.0, 3.0, 1.0, 2.0))
# a = d = 1/4, b = 1/5, c = 3/10: moderate temperature with positive spectrum
FW_BASINS = FwParams.from_rates(0.25, 0.2, 0.3, 0.25)

CATALOG: Dict[str, Callable[[], object]] = {
    "triangle": make_triangle,
    "two-block": lambda: make_two_block(4, 0.1, 0.3),
    "fw-beta8": lambda: make_fw(FW_BETA8),
    "fw-beta14": lambda: make_fw(FW_BETA14),
    "fw-basins": lambda: make_fw(FW_BASINS),
    "nonrev3": lambda: make_nonrev_triangle(0.9),
    "nonrev4": lambda: make_nonrev_four(0.1),
}


def fixture(name: str):
    """Build a named fixture from :data:`CATALOG`."""
    try:
        return CATALOG[name]()
    except KeyError:
        raise ParamOutOfRange(f"unknown fixture {name!r}; choose from {sorted(CATALOG)}") from None
