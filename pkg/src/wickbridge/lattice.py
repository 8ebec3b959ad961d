"""Time-sliced path integrals as executable code.

Euclidean side: each slice contributes the Gaussian short-time kernel obtained
after integrating out the imaginary wave number, with the potential (or the
force) evaluated at the later point of the slice. Composing slices is a matrix
product over grid nodes.

Quantum side: the Trotter factorization is applied to a wavefunction with the
kinetic factor realized as a multiplier in discrete-Fourier (wave-number) space.

Boundaries: Euclidean transfer matrices drop paths that leave the grid
(absorbing truncation); the split-step propagator is periodic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import DomainError, GridMismatchError
from .grid import ComplexField, Grid1D, RealField
from .wick import DriftForm, GeneratorSpec, HamiltonianSpec, derivative, evaluate

__all__ = [
    "TimeSlicing",
    "TransferMatrix",
    "KernelMatrix",
    "SplitStepPlan",
    "short_time_euclid_kernel",
    "build_transfer_matrix",
    "euclid_propagate",
    "euclid_kernel_matrix",
    "closed_form_kernel_matrix",
    "build_splitstep_plan",
    "splitstep_quantum_propagate",
    "chapman_compose",
]


@dataclass(frozen=True)
class TimeSlicing:
    """``[t_a, t_b]`` cut into ``n_interior + 1`` equal slices."""

    t_a: float
    t_b: float
    n_interior: int

    def __post_init__(self):
        if not self.t_b > self.t_a:
            raise DomainError("t_b must exceed t_a")
        if self.n_interior < 0 or int(self.n_interior) != self.n_interior:
            raise DomainError("n_interior must be a non-negative integer")

    @classmethod
    def from_dt(cls, t_a: float, t_b: float, dt: float) -> "TimeSlicing":
        n = int(round((t_b - t_a) / dt))
        if n < 1:
            raise DomainError("dt larger than the interval")
        return cls(t_a, t_b, n - 1)

    @property
    def n_slices(self) -> int:
        return self.n_interior + 1

    @property
    def dt(self) -> float:
        return (self.t_b - self.t_a) / self.n_slices

    def times(self) -> np.ndarray:
        """Slice end times ``t_1 .. t_{N+1}``."""
        return self.t_a + self.dt * np.arange(1, self.n_slices + 1)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    grid: Grid1D
    dt: float
    entries: np.ndarray

    @property
    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    @property
    def column_sum_defect(self) -> float:
        """``max_j |sum_i T[i, j] - 1|``, reported and never corrected."""
        return float(np.abs(self.column_sums - 1.0).max())


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """``entries[i, j]`` approximates the kernel from node j at ``t_a`` to node i at ``t_b``."""

    grid: Grid1D
    t_a: float
    t_b: float
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.shape != (self.grid.n, self.grid.n):
            raise GridMismatchError(f"kernel shape {e.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(e)):
            raise DomainError("kernel entries must be finite")

    @property
    def elapsed(self) -> float:
        return self.t_b - self.t_a

    def column_masses(self) -> np.ndarray:
        """Trapezoid integral of each column over ``x_to``."""
        return np.trapezoid(self.entries, dx=self.grid.dx, axis=0)

    def sup_error(self, other: "KernelMatrix | np.ndarray", cols: "slice | np.ndarray | None" = None) -> float:
        ref = other.entries if isinstance(other, KernelMatrix) else np.asarray(other)
        diff = np.abs(self.entries - ref)
        if cols is not None:
            diff = diff[:, cols]
        return float(diff.max())

    def to_csv(self, dest=None) -> str:
        x = self.grid.nodes
        cplx = np.iscomplexobj(self.entries)
        lines = ["x_to,x_from,re,im" if cplx else "x_to,x_from,value"]
        for i in range(self.grid.n):
            for j in range(self.grid.n):
                v = self.entries[i, j]
                val = f"{v.real:.17g},{v.imag:.17g}" if cplx else f"{v:.17g}"
                lines.append(f"{x[i]:.17g},{x[j]:.17g},{val}")
        text = "\n".join(lines) + "\n"
        if dest is not None:
            with open(dest, "w") as fh:
                fh.write(text)
        return text

    def summary(self, reference: "KernelMatrix | None" = None) -> dict:
        out = {
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "n": self.grid.n},
            "t_a": self.t_a,
            "t_b": self.t_b,
            "min_entry": float(np.min(self.entries.real)),
            "max_column_mass_defect": float(np.abs(self.column_masses() - 1.0).max()),
        }
        if reference is not None:
            out["sup_error"] = self.sup_error(reference)
        return out

    def summary_json(self, reference: "KernelMatrix | None" = None) -> str:
        return json.dumps(self.summary(reference), sort_keys=True)


# --- Euclidean transfer matrices ---------------------------------------------------

def short_time_euclid_kernel(x_to, x_from, dt: float, g: GeneratorSpec, t: float = 0.0, jacobian: bool = True):
    """One-slice kernel with post-point evaluation.

    Potential form: ``sqrt(mu/(2 pi dt)) exp(-(mu/2) dt ((x_to - x_from)/dt)^2 - W(x_to) dt)``.

    Drift form: ``sqrt(mu/(2 pi dt)) exp(-(mu dt / 2) [(x_to - x_from)/dt + V'(x_to)/(m gamma)]^2)``
    multiplied, when ``jacobian`` is true, by ``|1 + V''(x_to) dt / (m gamma)|``, the
    Jacobian of the post-point map ``x_to -> x_to + V'(x_to) dt / (m gamma)``.
    Without that factor each slice leaks probability at rate ``V''/(m gamma)``.
    ``t`` is the slice end time, used only by time-dependent generators.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    mu = g.mu
    x_to = np.asarray(x_to, dtype=float)
    x_from = np.asarray(x_from, dtype=float)
    pref = np.sqrt(mu / (2 * np.pi * dt))
    wf = g.w_form
    if isinstance(wf, DriftForm):
        force = evaluate(wf.Vprime, x_to, t, g.time_dependent) / wf.m_gamma
        k = pref * np.exp(-0.5 * mu * dt * ((x_to - x_from) / dt + force) ** 2)
        if jacobian:
            curv = evaluate(derivative(wf.Vprime), x_to, t, g.time_dependent) / wf.m_gamma
            k = k * np.abs(1.0 + curv * dt)
        return k
    W = evaluate(wf.W, x_to, t, g.time_dependent)
    return pref * np.exp(-0.5 * mu * (x_to - x_from) ** 2 / dt - W * dt)


def build_transfer_matrix(grid: Grid1D, dt: float, g: GeneratorSpec, t: float = 0.0, jacobian: bool = True) -> TransferMatrix:
    """``T[i, j] = short_time_euclid_kernel(x_i, x_j, dt) * dx``."""
    x = grid.nodes
    entries = short_time_euclid_kernel(x[:, None], x[None, :], dt, g, t=t, jacobian=jacobian) * grid.dx
    return TransferMatrix(grid, dt, entries)


def euclid_propagate(init: RealField, g: GeneratorSpec, slicing: TimeSlicing, jacobian: bool = True) -> RealField:
    """Apply the transfer matrix once per slice to a density."""
    grid = init.grid
    p = np.array(init.values)
    if g.time_dependent:
        for t in slicing.times():
            p = build_transfer_matrix(grid, slicing.dt, g, t=t, jacobian=jacobian).entries @ p
    else:
        T = build_transfer_matrix(grid, slicing.dt, g, jacobian=jacobian).entries
        for _ in range(slicing.n_slices):
            p = T @ p
    return RealField(grid, p)


def euclid_kernel_matrix(g: GeneratorSpec, grid: Grid1D, slicing: TimeSlicing, jacobian: bool = True) -> KernelMatrix:
    """Composed transfer matrix divided by dx, so entries approximate the continuum kernel."""
    if g.time_dependent:
        M = np.eye(grid.n)
        for t in slicing.times():
            M = build_transfer_matrix(grid, slicing.dt, g, t=t, jacobian=jacobian).entries @ M
    else:
        T = build_transfer_matrix(grid, slicing.dt, g, jacobian=jacobian).entries
        M = np.linalg.matrix_power(T, slicing.n_slices)
    return KernelMatrix(grid, slicing.t_a, slicing.t_b, M / grid.dx)


def closed_form_kernel_matrix(kernel, grid: Grid1D, t_a: float, t_b: float) -> KernelMatrix:
    """Tabulate a closed-form ``kernel(x_b, x_a, t)`` on the grid."""
    x = grid.nodes
    return KernelMatrix(grid, t_a, t_b, np.asarray(kernel(x[:, None], x[None, :], t_b - t_a)))


def chapman_compose(k1: KernelMatrix, k2: KernelMatrix) -> KernelMatrix:
    """``K(x_b, t_b | x_a, t_a) = int dx K1(x_b | x) K2(x | x_a)``; k2 runs first, k1 second."""
    if k1.grid != k2.grid:
        raise GridMismatchError("kernels live on different grids")
    if not np.isclose(k1.t_a, k2.t_b, rtol=0, atol=1e-12 * max(1.0, abs(k2.t_b))):
        raise GridMismatchError(f"time mismatch: k1 starts at {k1.t_a}, k2 ends at {k2.t_b}")
    return KernelMatrix(k1.grid, k2.t_a, k1.t_b, (k1.entries @ k2.entries) * k1.grid.dx)


# --- quantum split-step ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SplitStepPlan:
    grid: Grid1D
    dt: float
    kinetic_phase: np.ndarray
    potential_phase: np.ndarray
    splitting_order: Literal["first", "strang"] = "first"

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.grid.n, self.grid.dx)

    def step(self, psi: np.ndarray) -> np.ndarray:
        kin = self.kinetic_phase
        if self.splitting_order == "first":
            # exp(-i V dt) exp(-i T dt): kinetic first, then potential
            return self.potential_phase * np.fft.ifft(kin * np.fft.fft(psi, norm="ortho"), norm="ortho")
        half = self.potential_phase
        return half * np.fft.ifft(kin * np.fft.fft(half * psi, norm="ortho"), norm="ortho")


def build_splitstep_plan(grid: Grid1D, dt: float, h: HamiltonianSpec, order: str = "first", t: float = 0.0) -> SplitStepPlan:
    """Unit-modulus phase factors for one Trotter step.

    Kinetic: ``exp(-i k^2 dt / (2 mu_h))`` per discrete wave number (equal to
    ``exp(-i hbar k^2 dt / (2m))``). Potential: ``exp(-i V_h dt)``, halved for Strang.
    """
    if order not in ("first", "strang"):
        raise DomainError(f"splitting order must be 'first' or 'strang', got {order!r}")
    if not dt > 0:
        raise DomainError("dt must be > 0")
    k = 2 * np.pi * np.fft.fftfreq(grid.n, grid.dx)
    kin = np.exp(-1j * k**2 * dt / (2 * h.mu_h))
    V = evaluate(h.V_h, grid.nodes, t, h.time_dependent)
    frac = 1.0 if order == "first" else 0.5
    pot = np.exp(-1j * V * dt * frac)
    return SplitStepPlan(grid, dt, kin, pot, order)


def splitstep_quantum_propagate(init: ComplexField, h: HamiltonianSpec, slicing: TimeSlicing, order: str = "first") -> ComplexField:
    """Evolve a wavefunction over ``slicing`` with first-order or Strang splitting."""
    grid = init.grid
    psi = np.array(init.values)
    if h.time_dependent:
        for t in slicing.times():
            # potential sampled at the slice midpoint
            psi = build_splitstep_plan(grid, slicing.dt, h, order, t=t - 0.5 * slicing.dt).step(psi)
    else:
        plan = build_splitstep_plan(grid, slicing.dt, h, order)
        for _ in range(slicing.n_slices):
            psi = plan.step(psi)
    return ComplexField(grid, psi)
