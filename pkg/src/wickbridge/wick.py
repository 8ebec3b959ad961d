"""Special and General Wick rotations as transforms on system specifications.

A :class:`HamiltonianSpec` describes ``-H/hbar = -k^2/(2 mu_h) - V_h(x)``; a
:class:`GeneratorSpec` describes a Euclidean generator ``G`` either in
potential form ``kappa^2/(2 mu) - W(x)`` or in drift form (Smoluchowski,
``D d2/dx2 + (1/m gamma) d/dx V'(x)``). The maps act on these records, not on
operators; the operator-level content is checked numerically elsewhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import closed_form as cf
from .exceptions import DomainError, UnsupportedSpecError
from .grid import Units

__all__ = [
    "Polynomial",
    "Scaled",
    "NumericDerivative",
    "derivative",
    "evaluate",
    "HamiltonianSpec",
    "PotentialLike",
    "DriftForm",
    "GeneratorSpec",
    "SWRMicro",
    "GWRMacro",
    "GWRStrongDamping",
    "swr_map",
    "gwr_map",
    "micro_diffusion_coefficient",
    "macro_diffusion_coefficient",
    "micro_friction",
    "relaxation_rate",
    "euclid_lagrangian",
    "ContinuationResult",
    "continuation_check",
    "closed_form_counterpart",
    "spec_to_dict",
    "spec_from_dict",
    "dump_spec",
    "load_spec",
]


# --- potentials --------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Polynomial in x with ascending coefficients; the serializable potential type."""

    coeffs: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs) or (0.0,)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x, t=None):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    def derivative(self) -> "Polynomial":
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return Polynomial(tuple(d))

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @classmethod
    def harmonic(cls, k: float) -> "Polynomial":
        """``k x^2 / 2``."""
        return cls((0.0, 0.0, 0.5 * k))


@dataclass(frozen=True)
class Scaled:
    base: Callable
    factor: float

    def __call__(self, x, *args):
        return self.factor * self.base(x, *args)


@dataclass(frozen=True)
class NumericDerivative:
    """Central-difference derivative of an arbitrary callable potential."""

    base: Callable
    h: float = 1e-5

    def __call__(self, x, *args):
        x = np.asarray(x, dtype=float)
        return (self.base(x + self.h, *args) - self.base(x - self.h, *args)) / (2 * self.h)


def derivative(f: Callable) -> Callable:
    if isinstance(f, Polynomial):
        return f.derivative()
    if isinstance(f, Scaled):
        return Scaled(derivative(f.base), f.factor)
    return NumericDerivative(f)


def evaluate(f: Callable, x, t: float = 0.0, time_dependent: bool = False) -> np.ndarray:
    """Evaluate a potential, passing t only to time-dependent callables."""
    x = np.asarray(x, dtype=float)
    out = f(x, t) if time_dependent else f(x)
    return np.broadcast_to(np.asarray(out, dtype=float), x.shape)


def _scale(f: Callable, factor: float) -> Callable:
    if factor == 1.0:
        return f
    if isinstance(f, Polynomial):
        return f.scaled(factor)
    return Scaled(f, factor)


# --- specifications ----------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianSpec:
    """Scaled Hamiltonian data: ``mu_h = m / hbar`` and ``V_h = V / hbar = mu_h u(x)``.

    ``hbar`` is kept so that the physical potential ``V = hbar V_h`` (and hence
    the force ``V'``) can be recovered for the strong-damping map.
    """

    mu_h: float
    V_h: Callable = field(default_factory=Polynomial)
    time_dependent: bool = False
    hbar: float = 1.0

    def __post_init__(self):
        if not self.mu_h > 0:
            raise DomainError("mu_h must be > 0")
        if not self.hbar > 0:
            raise DomainError("hbar must be > 0")

    @classmethod
    def free(cls, mass: float = 1.0, hbar: float = 1.0) -> "HamiltonianSpec":
        return cls(mu_h=mass / hbar, hbar=hbar)

    @classmethod
    def harmonic(cls, mass: float = 1.0, hbar: float = 1.0, omega: float = 1.0) -> "HamiltonianSpec":
        mu_h = mass / hbar
        return cls(mu_h=mu_h, V_h=Polynomial.harmonic(mu_h * omega**2), hbar=hbar)

    @property
    def mass(self) -> float:
        return self.mu_h * self.hbar

    def u(self) -> Callable:
        """Potential per unit mass, ``u = V_h / mu_h``."""
        return _scale(self.V_h, 1.0 / self.mu_h)


@dataclass(frozen=True)
class PotentialLike:
    W: Callable = field(default_factory=Polynomial)


@dataclass(frozen=True)
class DriftForm:
    Vprime: Callable
    m_gamma: float

    def __post_init__(self):
        if not self.m_gamma > 0:
            raise DomainError("m_gamma must be > 0")


@dataclass(frozen=True)
class GeneratorSpec:
    mu: float
    w_form: PotentialLike | DriftForm = field(default_factory=PotentialLike)
    time_dependent: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("mu must be > 0")
        if not isinstance(self.w_form, (PotentialLike, DriftForm)):
            raise DomainError("w_form must be PotentialLike or DriftForm")

    @property
    def D(self) -> float:
        return 1.0 / (2.0 * self.mu)

    @classmethod
    def brown(cls, D: float) -> "GeneratorSpec":
        return cls(mu=1.0 / (2.0 * D))

    @classmethod
    def harmonic(cls, mu: float, omega: float) -> "GeneratorSpec":
        return cls(mu=mu, w_form=PotentialLike(Polynomial.harmonic(mu * omega**2)))

    @classmethod
    def ornstein_uhlenbeck(cls, D: float, eta: float) -> "GeneratorSpec":
        return cls(mu=1.0 / (2.0 * D), w_form=DriftForm(Polynomial((0.0, eta)), 1.0))

    @classmethod
    def constant_drift(cls, D: float, v: float) -> "GeneratorSpec":
        """Brownian motion with drift v, expressed through the linear potential ``V = -v x``."""
        return cls(mu=1.0 / (2.0 * D), w_form=DriftForm(Polynomial((-v,)), 1.0))


@dataclass(frozen=True)
class SWRMicro:
    pass


@dataclass(frozen=True)
class GWRMacro:
    D: float

    def __post_init__(self):
        if not self.D > 0:
            raise DomainError("D must be > 0")


@dataclass(frozen=True)
class GWRStrongDamping:
    D: float
    m_gamma: float

    def __post_init__(self):
        if not (self.D > 0 and self.m_gamma > 0):
            raise DomainError("D and m_gamma must be > 0")


WickMode = SWRMicro | GWRMacro | GWRStrongDamping


# --- maps --------------------------------------------------------------------------

def swr_map(h: HamiltonianSpec) -> GeneratorSpec:
    """Imaginary-time rotation: same mass parameter, ``W = V_h`` pointwise."""
    if not isinstance(h, HamiltonianSpec):
        raise TypeError("swr_map acts on HamiltonianSpec only")
    return GeneratorSpec(mu=h.mu_h, w_form=PotentialLike(h.V_h), time_dependent=h.time_dependent)


def gwr_map(h: HamiltonianSpec, mode: WickMode) -> GeneratorSpec:
    if not isinstance(h, HamiltonianSpec):
        raise TypeError("gwr_map acts on HamiltonianSpec only")
    if isinstance(mode, SWRMicro):
        return swr_map(h)
    mu_D = 1.0 / (2.0 * mode.D)
    if isinstance(mode, GWRMacro):
        # W = mu_D u = (mu_D / mu_h) V_h
        W = _scale(h.V_h, mu_D / h.mu_h)
        return GeneratorSpec(mu=mu_D, w_form=PotentialLike(W), time_dependent=h.time_dependent)
    if isinstance(mode, GWRStrongDamping):
        if h.time_dependent:
            raise UnsupportedSpecError("strong-damping map needs a time-independent potential")
        Vprime = _scale(derivative(h.V_h), h.hbar)
        return GeneratorSpec(mu=mu_D, w_form=DriftForm(Vprime, mode.m_gamma))
    raise TypeError(f"unknown Wick mode {mode!r}")


def micro_diffusion_coefficient(m: float, hbar: float) -> float:
    if not (m > 0 and hbar > 0):
        raise DomainError("m and hbar must be > 0")
    return hbar / (2.0 * m)


def macro_diffusion_coefficient(T: float, m_gamma: float, units: Units = Units()) -> float:
    """Einstein relation ``D = k_B T / (m gamma)``."""
    if not (T > 0 and m_gamma > 0):
        raise DomainError("T and m_gamma must be > 0")
    return units.k_B * T / m_gamma


def micro_friction(T: float, units: Units = Units()) -> float:
    """Friction rate ``gamma = 2 k_B T / hbar`` at which the Einstein D equals hbar/(2m)."""
    if not T > 0:
        raise DomainError("T must be > 0")
    return 2.0 * units.k_B * T / units.hbar


def relaxation_rate(omega: float, gamma: float) -> float:
    """Strong-damping OU rate ``eta = omega^2 / gamma``."""
    if not gamma > 0:
        raise DomainError("gamma must be > 0")
    return omega**2 / gamma


def euclid_lagrangian(g: GeneratorSpec) -> Callable:
    """``L_e(x, xdot)``: ``(mu/2) xdot^2 + W(x)`` or ``(mu/2) (xdot + V'(x)/(m gamma))^2``."""
    mu = g.mu
    wf = g.w_form
    if isinstance(wf, PotentialLike):
        def L(x, xdot, t=0.0):
            return 0.5 * mu * np.asarray(xdot) ** 2 + evaluate(wf.W, x, t, g.time_dependent)
    else:
        def L(x, xdot, t=0.0):
            drift = evaluate(wf.Vprime, x, t, g.time_dependent) / wf.m_gamma
            return 0.5 * mu * (np.asarray(xdot) + drift) ** 2
    return L


def closed_form_counterpart(g: GeneratorSpec) -> cf.EuclideanKernelSpec:
    """Recognize generators with a known closed-form kernel.

    Zero W gives Brown; ``W = c x^2`` gives the harmonic Euclidean kernel; a
    linear force gives OU; a constant force gives drifted Brown motion.
    """
    wf = g.w_form
    if g.time_dependent:
        raise UnsupportedSpecError("no closed form for time-dependent generators")
    if isinstance(wf, PotentialLike):
        if not isinstance(wf.W, Polynomial):
            raise UnsupportedSpecError("closed forms need a polynomial W")
        c = np.trim_zeros(np.array(wf.W.coeffs), "b")
        if c.size == 0:
            return cf.Brown(g.D)
        if c.size == 3 and c[0] == 0 and c[1] == 0 and c[2] > 0:
            return cf.HarmonicEuclid(g.mu, float(np.sqrt(2 * c[2] / g.mu)))
        raise UnsupportedSpecError(f"no closed form for W coefficients {wf.W.coeffs}")
    if not isinstance(wf.Vprime, Polynomial):
        raise UnsupportedSpecError("closed forms need a polynomial V'")
    c = np.trim_zeros(np.array(wf.Vprime.coeffs), "b")
    if c.size == 0:
        return cf.Brown(g.D)
    if c.size == 1:
        return cf.DriftBrown(g.D, -c[0] / wf.m_gamma)
    if c.size == 2 and c[0] == 0 and c[1] > 0:
        return cf.OU(g.D, c[1] / wf.m_gamma)
    raise UnsupportedSpecError(f"no closed form for V' coefficients {wf.Vprime.coeffs}")


@dataclass(frozen=True)
class ContinuationResult:
    quantum_at_imag_t: complex
    euclid: float
    abs_error: float


def continuation_check(qspec: cf.QuantumKernelSpec, x_b: float, x_a: float, tau: float) -> ContinuationResult:
    """Quantum kernel at ``t = -i tau`` against the SWR-mapped Euclidean kernel at ``tau``."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    if isinstance(qspec, cf.Harmonic):
        h = HamiltonianSpec.harmonic(qspec.mass, qspec.hbar, qspec.omega)
    elif isinstance(qspec, cf.FreeParticle):
        h = HamiltonianSpec.free(qspec.mass, qspec.hbar)
    else:
        raise TypeError(f"not a quantum kernel spec: {qspec!r}")
    q = complex(cf.quantum_kernel(qspec, x_b, x_a, -1j * tau))
    e = float(cf.euclid_kernel(closed_form_counterpart(swr_map(h)), x_b, x_a, tau))
    return ContinuationResult(q, e, abs(q - e))


# --- JSON serialization ------------------------------------------------------------

def _fn_to_dict(f) -> dict:
    if isinstance(f, Polynomial):
        return {"type": "polynomial", "coeffs": list(f.coeffs)}
    raise UnsupportedSpecError(f"only polynomial potentials serialize, got {type(f).__name__}")


def _fn_from_dict(d) -> Polynomial:
    if isinstance(d, (int, float)):
        return Polynomial((float(d),))
    kind = d.get("type", "polynomial")
    if kind == "polynomial":
        return Polynomial(tuple(d.get("coeffs", [0.0])))
    if kind == "harmonic":
        return Polynomial.harmonic(float(d["k"]))
    if kind in ("zero", "none"):
        return Polynomial()
    raise UnsupportedSpecError(f"unknown potential type {kind!r}")


_SIMPLE = {
    "free_particle": cf.FreeParticle,
    "quantum_harmonic": cf.Harmonic,
    "brown": cf.Brown,
    "drift_brown": cf.DriftBrown,
    "harmonic_euclid": cf.HarmonicEuclid,
    "ou": cf.OU,
    "swr_micro": SWRMicro,
    "gwr_macro": GWRMacro,
    "gwr_strong_damping": GWRStrongDamping,
}
_SIMPLE_TAGS = {v: k for k, v in _SIMPLE.items()}


def spec_to_dict(spec) -> dict[str, Any]:
    """Variant-tagged dictionary for any specification record in the package."""
    if type(spec) in _SIMPLE_TAGS:
        out = {"type": _SIMPLE_TAGS[type(spec)]}
        out.update({k: v for k, v in spec.__dict__.items()})
        return out
    if isinstance(spec, HamiltonianSpec):
        return {
            "type": "hamiltonian",
            "mu_h": spec.mu_h,
            "hbar": spec.hbar,
            "V_h": _fn_to_dict(spec.V_h),
            "time_dependent": spec.time_dependent,
        }
    if isinstance(spec, GeneratorSpec):
        wf = spec.w_form
        if isinstance(wf, PotentialLike):
            w = {"type": "potential_like", "W": _fn_to_dict(wf.W)}
        else:
            w = {"type": "drift_form", "Vprime": _fn_to_dict(wf.Vprime), "m_gamma": wf.m_gamma}
        return {"type": "generator", "mu": spec.mu, "w_form": w, "time_dependent": spec.time_dependent}
    # local import: master/stochastic depend on this module
    from .master import SmoluchowskiSpec
    if isinstance(spec, SmoluchowskiSpec):
        return {"type": "smoluchowski", "D": spec.D, "Vprime": _fn_to_dict(spec.Vprime), "m_gamma": spec.m_gamma}
    from .stochastic import LangevinSpec
    if isinstance(spec, LangevinSpec):
        return {"type": "langevin", "D": spec.D, "A": _fn_to_dict(spec.A), "B": _fn_to_dict(spec.B)}
    raise UnsupportedSpecError(f"cannot serialize {type(spec).__name__}")


def spec_from_dict(d: dict[str, Any]):
    kind = d.get("type")
    if kind in _SIMPLE:
        params = {k: v for k, v in d.items() if k != "type"}
        return _SIMPLE[kind](**params)
    if kind == "hamiltonian":
        return HamiltonianSpec(
            mu_h=float(d["mu_h"]),
            V_h=_fn_from_dict(d.get("V_h", {"type": "zero"})),
            time_dependent=bool(d.get("time_dependent", False)),
            hbar=float(d.get("hbar", 1.0)),
        )
    if kind == "generator":
        w = d.get("w_form", {"type": "potential_like"})
        if w.get("type") == "drift_form":
            wf = DriftForm(_fn_from_dict(w["Vprime"]), float(w["m_gamma"]))
        elif w.get("type", "potential_like") == "potential_like":
            wf = PotentialLike(_fn_from_dict(w.get("W", {"type": "zero"})))
        else:
            raise UnsupportedSpecError(f"unknown w_form {w.get('type')!r}")
        return GeneratorSpec(mu=float(d["mu"]), w_form=wf, time_dependent=bool(d.get("time_dependent", False)))
    if kind == "smoluchowski":
        from .master import SmoluchowskiSpec
        return SmoluchowskiSpec(float(d["D"]), _fn_from_dict(d["Vprime"]), float(d.get("m_gamma", 1.0)))
    if kind == "langevin":
        from .stochastic import LangevinSpec
        return LangevinSpec(
            A=_fn_from_dict(d.get("A", {"type": "zero"})),
            B=_fn_from_dict(d.get("B", {"type": "polynomial", "coeffs": [1.0]})),
            D=float(d["D"]),
        )
    raise UnsupportedSpecError(f"unknown spec type {kind!r}")


def dump_spec(spec, path=None) -> str:
    text = json.dumps(spec_to_dict(spec), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_spec(src):
    """Load a spec from a JSON path, JSON text, or an already-parsed dict."""
    if isinstance(src, dict):
        return spec_from_dict(src)
    p = Path(src)
    if p.exists():
        return spec_from_dict(json.loads(p.read_text()))
    return spec_from_dict(json.loads(src))
