"""Analytic transition amplitudes and transition probabilities.

These are the reference values every numerical route in the package is checked
against. All functions broadcast over array-valued positions.

Quantum kernels accept complex elapsed time so that Wick continuation
``t -> -i tau`` can be evaluated directly; Euclidean kernels are real-time and
real-valued.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import CausticError, DomainError, SingularityError

__all__ = [
    "FreeParticle",
    "Harmonic",
    "Brown",
    "DriftBrown",
    "HarmonicEuclid",
    "OU",
    "CAUSTIC_TOL",
    "quantum_free_kernel",
    "quantum_harmonic_kernel",
    "quantum_kernel",
    "brown_kernel",
    "drift_brown_pdf",
    "harmonic_euclid_kernel",
    "ou_mean",
    "ou_variance",
    "ou_kernel",
    "ou_gaussian_pdf",
    "brown_absolute_pdf",
    "ou_absolute_pdf",
    "euclid_kernel",
    "harmonic_partition_exact",
]

CAUSTIC_TOL = 1e-12


def _require_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v}")


# --- specifications ----------------------------------------------------------------

@dataclass(frozen=True)
class FreeParticle:
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        _require_positive(mass=self.mass, hbar=self.hbar)


@dataclass(frozen=True)
class Harmonic:
    mass: float = 1.0
    hbar: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        _require_positive(mass=self.mass, hbar=self.hbar, omega=self.omega)


@dataclass(frozen=True)
class Brown:
    D: float

    def __post_init__(self):
        _require_positive(D=self.D)


@dataclass(frozen=True)
class DriftBrown:
    D: float
    v: float = 0.0

    def __post_init__(self):
        _require_positive(D=self.D)


@dataclass(frozen=True)
class HarmonicEuclid:
    mu: float
    omega: float

    def __post_init__(self):
        _require_positive(mu=self.mu, omega=self.omega)


@dataclass(frozen=True)
class OU:
    D: float
    eta: float

    def __post_init__(self):
        _require_positive(D=self.D, eta=self.eta)


QuantumKernelSpec = FreeParticle | Harmonic
EuclideanKernelSpec = Brown | DriftBrown | HarmonicEuclid | OU


# --- quantum amplitudes ------------------------------------------------------------

def quantum_free_kernel(spec: FreeParticle, x_b, x_a, t: complex):
    """Free-particle amplitude ``sqrt(m / (2 pi i hbar t)) exp(i m (x_b - x_a)^2 / (2 hbar t))``.

    The square root is the principal branch, so ``t = -i tau`` gives the real heat kernel.
    """
    t = complex(t)
    if t == 0:
        raise SingularityError("free-particle kernel is singular at t = 0")
    m, hbar = spec.mass, spec.hbar
    pref = np.sqrt(m / (2j * np.pi * hbar * t))
    d2 = (np.asarray(x_b) - np.asarray(x_a)) ** 2
    return pref * np.exp(1j * m * d2 / (2 * hbar * t))


def quantum_harmonic_kernel(spec: Harmonic, x_b, x_a, t: complex, caustic_tol: float = CAUSTIC_TOL):
    """Harmonic-oscillator amplitude with complex arithmetic throughout.

    Raises CausticError when ``|sin(omega t)| < caustic_tol``.
    """
    t = complex(t)
    m, hbar, w = spec.mass, spec.hbar, spec.omega
    s = np.sin(w * t)
    if abs(s) < caustic_tol:
        raise CausticError(f"caustic: |sin(omega t)| = {abs(s):.3g} at omega*t = {w * t}")
    c = np.cos(w * t)
    x_b = np.asarray(x_b)
    x_a = np.asarray(x_a)
    pref = np.sqrt(m * w / (2j * np.pi * hbar * s))
    phase = 1j * m * w / (2 * hbar * s) * ((x_b**2 + x_a**2) * c - 2 * x_a * x_b)
    return pref * np.exp(phase)


def quantum_kernel(spec: QuantumKernelSpec, x_b, x_a, t: complex, **kw):
    if isinstance(spec, FreeParticle):
        return quantum_free_kernel(spec, x_b, x_a, t)
    if isinstance(spec, Harmonic):
        return quantum_harmonic_kernel(spec, x_b, x_a, t, **kw)
    raise TypeError(f"not a quantum kernel spec: {spec!r}")


# --- Euclidean kernels -------------------------------------------------------------

def _check_time(t):
    if not np.all(np.asarray(t) > 0):
        raise DomainError(f"elapsed time must be > 0, got {t}")


def brown_kernel(D: float, x_b, x_a, t):
    """Heat kernel ``(4 pi D t)^(-1/2) exp(-(x_b - x_a)^2 / (4 D t))``."""
    _check_time(t)
    _require_positive(D=D)
    d2 = (np.asarray(x_b) - np.asarray(x_a)) ** 2
    return np.exp(-d2 / (4 * D * t)) / np.sqrt(4 * np.pi * D * t)


def drift_brown_pdf(D: float, v: float, x, t):
    """Density at time t of Brownian motion with constant drift v, started at 0."""
    _check_time(t)
    _require_positive(D=D)
    return brown_kernel(D, x, v * t, t)


def harmonic_euclid_kernel(mu: float, omega: float, x_b, x_a, t):
    """Imaginary-time harmonic kernel in the mu-parameterization.

    ``sqrt(mu w / (2 pi sinh wt)) exp(-(mu w / (2 sinh wt)) [(x_b^2 + x_a^2) cosh wt - 2 x_a x_b])``

    Evaluated in the algebraically equivalent form
    ``-mu w [(x_b - x_a)^2 / (2 tanh wt) + x_a x_b tanh(wt / 2)]`` which stays
    accurate as ``w -> 0`` and does not overflow for large ``wt``.
    """
    _check_time(t)
    _require_positive(mu=mu, omega=omega)
    y = omega * np.asarray(t, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    x_a = np.asarray(x_a, dtype=float)
    # 1/sinh(y) = 2 e^{-y} / (1 - e^{-2y}) avoids overflow
    pref = np.sqrt(mu * omega * np.exp(-y) / (-np.pi * np.expm1(-2 * y)))
    expo = -mu * omega * ((x_b - x_a) ** 2 / (2 * np.tanh(y)) + x_a * x_b * np.tanh(0.5 * y))
    return pref * np.exp(expo)


def ou_mean(x_a, eta: float, t):
    return np.asarray(x_a) * np.exp(-eta * np.asarray(t))


def ou_variance(D: float, eta: float, t):
    # (D/eta)(1 - exp(-2 eta t)) without cancellation for small eta*t
    return -D * np.expm1(-2 * eta * np.asarray(t, dtype=float)) / eta


def ou_kernel(D: float, eta: float, x_b, x_a, t):
    """Ornstein-Uhlenbeck transition density: Gaussian with mean ``x_a e^{-eta t}``."""
    _check_time(t)
    _require_positive(D=D, eta=eta)
    m = ou_mean(x_a, eta, t)
    v = ou_variance(D, eta, t)
    return np.exp(-((np.asarray(x_b) - m) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)


def ou_gaussian_pdf(D: float, eta: float, x, t, mean0: float = 0.0, var0: float = 0.0):
    """OU density at time t from a Gaussian initial state N(mean0, var0).

    The mean relaxes as ``mean0 e^{-eta t}``; the variance as
    ``var0 e^{-2 eta t} + (D/eta)(1 - e^{-2 eta t})``.
    """
    if t == 0:
        if var0 <= 0:
            raise DomainError("zero-variance initial state has no density at t = 0")
        v = var0
        m = mean0
    else:
        _check_time(t)
        m = mean0 * np.exp(-eta * t)
        v = var0 * np.exp(-2 * eta * t) + ou_variance(D, eta, t)
    return np.exp(-((np.asarray(x) - m) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)


def brown_absolute_pdf(D: float, x, t):
    return brown_kernel(D, x, 0.0, t)


def ou_absolute_pdf(D: float, eta: float, x, t):
    return ou_kernel(D, eta, x, 0.0, t)


def euclid_kernel(spec: EuclideanKernelSpec, x_b, x_a, t):
    """Dispatch a Euclidean kernel spec to its closed form."""
    if isinstance(spec, Brown):
        return brown_kernel(spec.D, x_b, x_a, t)
    if isinstance(spec, DriftBrown):
        return brown_kernel(spec.D, x_b, np.asarray(x_a) + spec.v * t, t)
    if isinstance(spec, HarmonicEuclid):
        return harmonic_euclid_kernel(spec.mu, spec.omega, x_b, x_a, t)
    if isinstance(spec, OU):
        return ou_kernel(spec.D, spec.eta, x_b, x_a, t)
    raise TypeError(f"not a Euclidean kernel spec: {spec!r}")


def harmonic_partition_exact(beta_hbar_omega: float) -> float:
    """``1 / (2 sinh(beta hbar omega / 2))``."""
    return 1.0 / (2.0 * np.sinh(0.5 * beta_hbar_omega))
