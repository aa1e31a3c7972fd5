"""Quasi-stationary (Yaglom) limits for finite reversible Markov chains."""

from .chain import (
    ProbDist,
    ReversibleChain,
    TransitionKernel,
    check_reversibility,
    evolve,
    lazy_chain,
    lazy_transform,
    reversible_chain,
    stationary_distribution,
    validate_kernel,
)
from .conditioning import (
    ConditionalTrajectory,
    SeparationProfile,
    conditional_trajectory,
    greedy_decomposition,
    separation,
    separation_profile,
    verify_recursion,
)
from .dynamics import CycleReport, CycleStatus, detect_cycle
from .errors import *  # noqa: F401,F403
from .spectral import Coordinates, SpectralData, coordinates, eigendecompose, spectral_evolve
from .sst import BirthChain, SstProfile, build_birth_chain, intertwining_residual, sst_profile
from .yaglom import (
    AbsorbingQsd,
    BasinMap,
    YaglomReport,
    absorbing_qsd,
    classify_basins,
    dominant_data,
    ell_alpha,
    restrict,
    verify_properties,
    yaglom_limit,
)
from .zoo import (
    FwParams,
    make_fw,
    make_nonrev_four,
    make_nonrev_triangle,
    make_triangle,
    make_two_block,
    random_reversible,
)

__version__ = "0.1.0"
