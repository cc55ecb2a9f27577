"""Driven two-atom cavity QED simulator.

Lindblad dynamics of two coherently driven two-level atoms in a single
cavity mode: stationary states, dressed-level structure, and second/third
order photon correlation functions, with a CLI front end for reproducible
parameter sweeps.
"""

__version__ = "0.1.0"

from .dressed import (
    COLLECTIVE_BASIS,
    CollectiveBlock,
    DressedLevel,
    build_block,
    eigensystem,
    predicted_frequencies,
)
from .errors import (
    AmbiguousSteadyStateError,
    BlockadeError,
    ConfigError,
    IntegrationError,
    NoDetectablePhotonsError,
    SteadyStateConvergenceError,
    UndefinedCorrelationError,
)
from .hilbert import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    annihilation,
    basis_index,
    creation,
    expectation,
    identity,
    ket,
    make_space,
    number_operator,
    pure_state,
    sigma_minus,
    sigma_plus,
)
from .model import (
    Liouvillian,
    SystemParams,
    build_hamiltonian,
    build_liouvillian,
    unvectorize,
    vectorize,
)
from .observables import (
    CorrelationSeries,
    PhotonStatistics,
    SweepResult,
    dominant_period,
    g2_tau,
    g2_zero,
    g3_tau,
    g3_zero,
    modulation_period,
    photon_statistics,
    rabi_scan,
    spectrum_scan,
    two_photon_resonance_detuning,
)
from .solvers import (
    PropagationResult,
    PropagationSpec,
    conditional_state,
    propagate,
    rk4_max_step,
    steady_state,
    steady_state_residual,
)

__all__ = [
    "__version__",
    # spaces and operators
    "HilbertSpace", "Operator", "DensityMatrix", "make_space", "basis_index",
    "ket", "pure_state", "identity", "annihilation", "creation",
    "number_operator", "sigma_minus", "sigma_plus", "expectation",
    # model
    "SystemParams", "Liouvillian", "build_hamiltonian", "build_liouvillian",
    "vectorize", "unvectorize",
    # dressed analysis
    "COLLECTIVE_BASIS", "CollectiveBlock", "DressedLevel", "build_block",
    "eigensystem", "predicted_frequencies",
    # solvers
    "PropagationSpec", "PropagationResult", "steady_state",
    "steady_state_residual", "propagate", "conditional_state", "rk4_max_step",
    # observables
    "CorrelationSeries", "PhotonStatistics", "SweepResult", "g2_zero",
    "g3_zero", "g2_tau", "g3_tau", "photon_statistics", "spectrum_scan",
    "rabi_scan", "two_photon_resonance_detuning", "dominant_period",
    "modulation_period",
    # errors
    "BlockadeError", "AmbiguousSteadyStateError", "SteadyStateConvergenceError",
    "IntegrationError", "NoDetectablePhotonsError", "UndefinedCorrelationError",
    "ConfigError",
]
