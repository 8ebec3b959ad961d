"""Moments, drift velocity and the harmonic partition function."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import closed_form as cf
from .exceptions import DegenerateFieldError, DomainError
from .grid import Grid1D, RealField, integrate

__all__ = [
    "MomentReport",
    "moments",
    "velocity_via_mean_drift",
    "velocity_operator_literal",
    "partition_function",
    "lattice_partition_function",
    "PartitionRow",
    "partition_refinement",
]


@dataclass(frozen=True)
class MomentReport:
    mean: float
    variance: float
    mass: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def moments(field: RealField) -> MomentReport:
    """Quadrature mass, mean and central variance (normalized by the measured mass)."""
    mass = integrate(field)
    if abs(mass) < 1e-12:
        raise DegenerateFieldError(f"field mass {mass!r} too small for moments")
    x = field.x
    dx = field.grid.dx
    mean = float(np.trapezoid(x * field.values, dx=dx)) / mass
    var = float(np.trapezoid((x - mean) ** 2 * field.values, dx=dx)) / mass
    return MomentReport(mean, max(var, 0.0), mass)


def velocity_via_mean_drift(p_minus: RealField, p_plus: RealField, delta: float) -> float:
    """Centred difference ``(<x>(t + delta) - <x>(t - delta)) / (2 delta)``."""
    if not delta > 0:
        raise DomainError("delta must be > 0")
    return (moments(p_plus).mean - moments(p_minus).mean) / (2.0 * delta)


def velocity_operator_literal(density: RealField, mu: float) -> float:
    """Quadrature of ``-(1/mu) dP/dx`` over the grid.

    A total derivative, so this is ``-(P(x_max) - P(x_min)) / mu`` up to the
    accuracy of the gradient: zero for any density that decays at the edges.
    """
    if not mu > 0:
        raise DomainError("mu must be > 0")
    grad = np.gradient(density.values, density.grid.dx)
    return float(-np.trapezoid(grad, dx=density.grid.dx) / mu)


def partition_function(mu: float, omega: float, beta_hbar: float, grid: Grid1D) -> float:
    """``Z = integral dx K_E(x, x; beta_hbar)`` by trapezoid quadrature of the kernel diagonal."""
    if not beta_hbar > 0:
        raise DomainError("beta_hbar must be > 0")
    x = grid.nodes
    return float(np.trapezoid(cf.harmonic_euclid_kernel(mu, omega, x, x, beta_hbar), dx=grid.dx))


def lattice_partition_function(mu: float, omega: float, beta_hbar: float, grid: Grid1D, n_slices: int) -> float:
    """Trace of the transfer-matrix kernel for the harmonic generator."""
    from .lattice import TimeSlicing, euclid_kernel_matrix
    from .wick import GeneratorSpec

    if n_slices < 1:
        raise DomainError("n_slices must be >= 1")
    km = euclid_kernel_matrix(GeneratorSpec.harmonic(mu, omega), grid, TimeSlicing(0.0, beta_hbar, n_slices - 1))
    return float(np.trapezoid(np.diag(km.entries), dx=grid.dx))


@dataclass(frozen=True)
class PartitionRow:
    n_slices: int
    dt: float
    Z: float
    error: float
    order: float | None


def partition_refinement(mu: float, omega: float, beta_hbar: float, grid: Grid1D, n_slices=(100, 200, 400)) -> list[PartitionRow]:
    """Lattice Z over successive slice counts, with observed convergence orders."""
    exact = cf.harmonic_partition_exact(beta_hbar * omega)
    rows: list[PartitionRow] = []
    prev = None
    for n in n_slices:
        z = lattice_partition_function(mu, omega, beta_hbar, grid, n)
        err = abs(z - exact)
        order = None
        if prev is not None and prev[1] > 0 and err > 0:
            order = float(np.log(prev[1] / err) / np.log(n / prev[0]))
        rows.append(PartitionRow(n, beta_hbar / n, z, err, order))
        prev = (n, err)
    return rows
