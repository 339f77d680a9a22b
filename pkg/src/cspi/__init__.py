"""Numerical laboratory for discrete-time (spin-)coherent-state path integrals.

Exact closed-form amplitudes and operator oracles, discrete actions with
their epsilon/canonical/dynamical decomposition, stationary-action
solvers, regulated boundary-layer paths, and Gaussian fluctuation
determinants, all cross-validated against each other.
"""

from .discrete_action import (
    ActionBreakdown,
    DiscretePath,
    PhasePath,
    TimeGrid,
    dtcs_action,
    dtps_action,
    dtscs_action,
    dtscs_theta_phi_parts,
)
from .exact_oracle import (
    FockBasis,
    SpinBasis,
    composition_check,
    ho_amplitude_oracle,
    spin_amplitude_oracle,
)
from .fluctuations import (
    DetResult,
    QuadraticForm,
    build_kcs_alt_form,
    build_kscs_form,
    build_semi_eps_form,
    expand_dtcs,
    expand_dtscs,
    gaussian_K,
    tridiagonal_det,
)
from .klauder import (
    ChiProfile,
    KlauderParams,
    epsilon_term_value,
    solve_kcs_ho,
    solve_kscs_spin,
)
from .states import (
    HamiltonianKernel,
    HOKernel,
    ModelParams,
    PhasePoint,
    SpherePoint,
    SpinKernel,
    cs_overlap,
    ct_stationary_reference,
    exact_cs_amplitude,
    exact_scs_amplitude,
    scs_overlap,
)
from .stationary_path import (
    ClassicalPhaseSolution,
    ConservedPair,
    StationarySolution,
    solve_dtps_classical,
    solve_general_newton,
    solve_ho_dtcs,
    solve_spin_dtscs,
    stationary_action_spin,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ActionBreakdown",
    "ChiProfile",
    "ClassicalPhaseSolution",
    "ConservedPair",
    "DetResult",
    "DiscretePath",
    "FockBasis",
    "HOKernel",
    "HamiltonianKernel",
    "KlauderParams",
    "ModelParams",
    "PhasePath",
    "PhasePoint",
    "QuadraticForm",
    "SpherePoint",
    "SpinBasis",
    "SpinKernel",
    "StationarySolution",
    "TimeGrid",
    "build_kcs_alt_form",
    "build_kscs_form",
    "build_semi_eps_form",
    "composition_check",
    "cs_overlap",
    "ct_stationary_reference",
    "dtcs_action",
    "dtps_action",
    "dtscs_action",
    "dtscs_theta_phi_parts",
    "epsilon_term_value",
    "exact_cs_amplitude",
    "exact_scs_amplitude",
    "expand_dtcs",
    "expand_dtscs",
    "gaussian_K",
    "ho_amplitude_oracle",
    "scs_overlap",
    "solve_dtps_classical",
    "solve_general_newton",
    "solve_ho_dtcs",
    "solve_kcs_ho",
    "solve_kscs_spin",
    "solve_spin_dtscs",
    "spin_amplitude_oracle",
    "stationary_action_spin",
    "tridiagonal_det",
]
