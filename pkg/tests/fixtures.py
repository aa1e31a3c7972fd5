"""Shared fixture sets for the test suite."""

import numpy as np

from qsd import ProbDist, make_fw, make_nonrev_four, make_nonrev_triangle, make_triangle, make_two_block, random_reversible
from qsd.zoo import FW_BASINS, FW_BETA8, FW_BETA14


def reversible_fixtures(seed=7, n_random=6):
    """(name, chain) pairs: every reversible zoo chain plus seeded random ones."""
    out = [
        ("triangle", make_triangle()),
        ("two-block", make_two_block(4, 0.1, 0.3)),
        ("two-block-n2", make_two_block(2, 0.2, 0.5)),
        ("fw-beta8", make_fw(FW_BETA8)),
        ("fw-beta14", make_fw(FW_BETA14)),
        ("fw-basins", make_fw(FW_BASINS)),
    ]
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        out.append((f"random6-{k}", random_reversible(6, rng)))
    return out


def nonreversible_fixtures():
    return [("nonrev3", make_nonrev_triangle(0.9)), ("nonrev4", make_nonrev_four(0.1))]


def starting_laws(n, seed=0, n_random=3):
    """Diracs on every state, the uniform law and a few Dirichlet draws."""
    rng = np.random.default_rng(seed)
    laws = [ProbDist.dirac(n, k) for k in range(n)] + [ProbDist.uniform(n)]
    laws += [ProbDist(rng.dirichlet(np.ones(n))) for _ in range(n_random)]
    return laws
