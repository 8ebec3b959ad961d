"""scikit-learn style wrappers around the propagators and the Feynman-Kac estimator.

Rows of ``X`` are fields sampled on the estimator's grid. ``fit`` builds the
evolution operator (``X`` is ignored), ``transform`` evolves each row.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive, check_rows
from .grid import ComplexField, Grid1D, RealField
from .lattice import TimeSlicing, build_splitstep_plan, euclid_kernel_matrix
from .master import CrankNicolsonSolver, SolverConfig, smoluchowski_from_generator
from .stochastic import feynman_kac_estimate
from .wick import GeneratorSpec, HamiltonianSpec

__all__ = [
    "TransferMatrixPropagator",
    "CrankNicolsonPropagator",
    "SplitStepPropagator",
    "FeynmanKacKernel",
]


class _GridMixin:
    def _make_grid(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, check_positive("n", self.n, integer=True))

    @property
    def nodes(self) -> np.ndarray:
        check_is_fitted(self, "grid_")
        return self.grid_.nodes


class TransferMatrixPropagator(_GridMixin, TransformerMixin, BaseEstimator):
    """Euclidean lattice path integral over ``[0, t_final]`` with ``n_slices`` slices."""

    def __init__(self, generator: GeneratorSpec | None = None, x_min=-8.0, x_max=8.0, n=801,
                 t_final=1.0, n_slices=100, jacobian=True):
        self.generator = generator
        self.x_min = x_min
        self.x_max = x_max
        self.n = n
        self.t_final = t_final
        self.n_slices = n_slices
        self.jacobian = jacobian

    def fit(self, X=None, y=None):
        g = self.generator if self.generator is not None else GeneratorSpec.brown(1.0)
        if not isinstance(g, GeneratorSpec):
            raise TypeError("generator must be a GeneratorSpec")
        self.grid_ = self._make_grid()
        n_slices = check_positive("n_slices", self.n_slices, integer=True)
        slicing = TimeSlicing(0.0, check_positive("t_final", self.t_final), n_slices - 1)
        self.kernel_ = euclid_kernel_matrix(g, self.grid_, slicing, jacobian=self.jacobian)
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        P = check_rows(X, self.grid_.n)
        return P @ self.kernel_.entries.T * self.grid_.dx


class CrankNicolsonPropagator(_GridMixin, TransformerMixin, BaseEstimator):
    """Fokker-Planck/Smoluchowski evolution of density rows by Crank-Nicolson."""

    def __init__(self, spec=None, x_min=-10.0, x_max=10.0, n=1001, t_final=1.0, dt=1e-3,
                 boundary="zero_flux"):
        self.spec = spec
        self.x_min = x_min
        self.x_max = x_max
        self.n = n
        self.t_final = t_final
        self.dt = dt
        self.boundary = boundary

    def fit(self, X=None, y=None):
        spec = self.spec if self.spec is not None else GeneratorSpec.brown(1.0)
        if isinstance(spec, GeneratorSpec):
            spec = smoluchowski_from_generator(spec)
        self.spec_ = spec
        self.grid_ = self._make_grid()
        self.config_ = SolverConfig(check_positive("dt", self.dt), self.boundary)
        check_positive("t_final", self.t_final)
        self.reports_ = []
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        P = check_rows(X, self.grid_.n)
        out = np.empty_like(P)
        self.reports_ = []
        for i, row in enumerate(P):
            solver = CrankNicolsonSolver(RealField(self.grid_, row), self.spec_, self.config_)
            out[i] = solver.advance(self.t_final).values
            self.reports_.append(solver.report())
        return out


class SplitStepPropagator(_GridMixin, TransformerMixin, BaseEstimator):
    """Split-step Fourier evolution of wavefunction rows (periodic grid)."""

    def __init__(self, hamiltonian: HamiltonianSpec | None = None, x_min=-20.0, x_max=20.0, n=1024,
                 t_final=1.0, n_steps=100, order="strang"):
        self.hamiltonian = hamiltonian
        self.x_min = x_min
        self.x_max = x_max
        self.n = n
        self.t_final = t_final
        self.n_steps = n_steps
        self.order = order

    def fit(self, X=None, y=None):
        h = self.hamiltonian if self.hamiltonian is not None else HamiltonianSpec.free()
        if not isinstance(h, HamiltonianSpec):
            raise TypeError("hamiltonian must be a HamiltonianSpec")
        self.hamiltonian_ = h
        self.grid_ = self._make_grid()
        steps = check_positive("n_steps", self.n_steps, integer=True)
        self.slicing_ = TimeSlicing(0.0, check_positive("t_final", self.t_final), steps - 1)
        if not h.time_dependent:
            self.plan_ = build_splitstep_plan(self.grid_, self.slicing_.dt, h, self.order)
        return self

    def transform(self, X):
        check_is_fitted(self, "slicing_")
        psi = check_rows(X, self.grid_.n, complex_ok=True)
        dt = self.slicing_.dt
        for t in self.slicing_.times():
            if self.hamiltonian_.time_dependent:
                plan = build_splitstep_plan(self.grid_, dt, self.hamiltonian_, self.order, t=t - 0.5 * dt)
            else:
                plan = self.plan_
            psi = np.stack([plan.step(row) for row in psi])
        return psi

    def to_field(self, row) -> ComplexField:
        check_is_fitted(self, "grid_")
        return ComplexField(self.grid_, row)


class FeynmanKacKernel(BaseEstimator):
    """Bridge-sampled kernel estimates; ``predict`` takes rows ``(x_a, x_b)``."""

    def __init__(self, generator: GeneratorSpec | None = None, tau=1.0, n_steps=100, n_samples=10_000, seed=0):
        self.generator = generator
        self.tau = tau
        self.n_steps = n_steps
        self.n_samples = n_samples
        self.seed = seed

    def fit(self, X=None, y=None):
        g = self.generator if self.generator is not None else GeneratorSpec.brown(1.0)
        if not isinstance(g, GeneratorSpec):
            raise TypeError("generator must be a GeneratorSpec")
        self.generator_ = g
        check_positive("tau", self.tau)
        check_positive("n_steps", self.n_steps, integer=True)
        check_positive("n_samples", self.n_samples, integer=True)
        return self

    def predict(self, X):
        check_is_fitted(self, "generator_")
        pts = check_rows(X, 2)
        ests = [
            feynman_kac_estimate(a, b, self.tau, self.generator_, int(self.n_steps), int(self.n_samples), self.seed)
            for a, b in pts
        ]
        self.std_errs_ = np.array([e.std_err for e in ests])
        self.bias_bounds_ = np.array([e.bias_bound for e in ests])
        return np.array([e.value for e in ests])
