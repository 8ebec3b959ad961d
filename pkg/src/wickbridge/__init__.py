"""Quantum propagators, their Wick-rotated diffusion counterparts, and cross-checks between them."""
from .closed_form import (
    CAUSTIC_TOL,
    OU,
    Brown,
    DriftBrown,
    FreeParticle,
    Harmonic,
    HarmonicEuclid,
    brown_kernel,
    euclid_kernel,
    harmonic_euclid_kernel,
    harmonic_partition_exact,
    ou_kernel,
    quantum_free_kernel,
    quantum_harmonic_kernel,
    quantum_kernel,
)
from .estimators import CrankNicolsonPropagator, FeynmanKacKernel, SplitStepPropagator, TransferMatrixPropagator
from .exceptions import (
    CausticError,
    DegenerateFieldError,
    DomainError,
    GridMismatchError,
    SingularityError,
    UnsupportedSpecError,
    UsageError,
    WickBridgeError,
)
from .grid import ComplexField, Grid1D, RealField, Units, integrate
from .lattice import (
    KernelMatrix,
    TimeSlicing,
    chapman_compose,
    euclid_kernel_matrix,
    euclid_propagate,
    splitstep_quantum_propagate,
)
from .master import FokkerPlanckSpec, SmoluchowskiSpec, SolverConfig, evolve_crank_nicolson
from .observables import moments, partition_function, velocity_operator_literal, velocity_via_mean_drift
from .stochastic import LangevinSpec, feynman_kac_estimate, simulate_ensemble
from .verification import run_all, run_scenario
from .wick import (
    DriftForm,
    GeneratorSpec,
    GWRMacro,
    GWRStrongDamping,
    HamiltonianSpec,
    Polynomial,
    PotentialLike,
    SWRMicro,
    continuation_check,
    gwr_map,
    swr_map,
)

__version__ = "0.1.0"
