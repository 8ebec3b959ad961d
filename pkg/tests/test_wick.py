import json

import numpy as np
import pytest

from wickbridge import closed_form as cf
from wickbridge.exceptions import DomainError, UnsupportedSpecError
from wickbridge.grid import Units
from wickbridge.master import SmoluchowskiSpec
from wickbridge.stochastic import LangevinSpec
from wickbridge.wick import (
    DriftForm,
    GeneratorSpec,
    GWRMacro,
    GWRStrongDamping,
    HamiltonianSpec,
    NumericDerivative,
    Polynomial,
    PotentialLike,
    SWRMicro,
    closed_form_counterpart,
    continuation_check,
    derivative,
    dump_spec,
    euclid_lagrangian,
    gwr_map,
    load_spec,
    macro_diffusion_coefficient,
    micro_diffusion_coefficient,
    micro_friction,
    relaxation_rate,
    spec_from_dict,
    spec_to_dict,
    swr_map,
)


def test_polynomial_evaluation_and_derivative():
    p = Polynomial((1.0, -2.0, 3.0))
    assert p(2.0) == 1 - 4 + 12
    assert derivative(p)(2.0) == -2 + 12
    assert Polynomial.harmonic(4.0)(1.5) == pytest.approx(4.5)
    assert Polynomial().is_zero()


def test_numeric_derivative_for_callables():
    f = derivative(lambda x: np.sin(x))
    assert isinstance(f, NumericDerivative)
    assert f(0.3) == pytest.approx(np.cos(0.3), rel=1e-9)


def test_swr_free_gives_brown_with_micro_diffusion():
    g = swr_map(HamiltonianSpec.free(mass=2.0, hbar=1.0))
    assert g.mu == 2.0
    assert closed_form_counterpart(g) == cf.Brown(micro_diffusion_coefficient(2.0, 1.0))
    assert g.D == pytest.approx(0.25)


def test_swr_harmonic_gives_harmonic_euclid():
    g = swr_map(HamiltonianSpec.harmonic(1.0, 1.0, 1.3))
    spec = closed_form_counterpart(g)
    assert isinstance(spec, cf.HarmonicEuclid)
    assert spec.mu == 1.0 and spec.omega == pytest.approx(1.3)


def test_swr_keeps_potential_pointwise():
    h = HamiltonianSpec(mu_h=0.7, V_h=Polynomial((0.0, 0.2, 0.9)))
    g = swr_map(h)
    x = np.linspace(-2, 2, 5)
    np.testing.assert_array_equal(g.w_form.W(x), h.V_h(x))


def test_gwr_macro_rescales_potential():
    h = HamiltonianSpec.harmonic(1.0, 1.0, 2.0)
    g = gwr_map(h, GWRMacro(D=0.25))
    assert g.mu == pytest.approx(2.0)
    # W = mu_D u = mu_D * w^2 x^2 / 2
    assert g.w_form.W(1.0) == pytest.approx(2.0 * 4.0 / 2)
    assert gwr_map(h, SWRMicro()) == swr_map(h)


def test_gwr_strong_damping_gives_ou():
    h = HamiltonianSpec.harmonic(1.0, 1.0, 2.0)
    g = gwr_map(h, GWRStrongDamping(D=0.5, m_gamma=4.0))
    assert isinstance(g.w_form, DriftForm)
    spec = closed_form_counterpart(g)
    assert isinstance(spec, cf.OU)
    assert spec.D == pytest.approx(0.5)
    assert spec.eta == pytest.approx(relaxation_rate(2.0, 4.0))


def test_strong_damping_force_uses_physical_potential():
    # V_h = V / hbar, so V' = hbar V_h'
    h = HamiltonianSpec.harmonic(mass=1.0, hbar=2.0, omega=1.0)
    g = gwr_map(h, GWRStrongDamping(D=1.0, m_gamma=1.0))
    assert g.w_form.Vprime(1.0) == pytest.approx(1.0)


def test_mode_and_spec_validation():
    with pytest.raises(DomainError):
        GWRMacro(D=0)
    with pytest.raises(DomainError):
        GWRStrongDamping(D=1, m_gamma=0)
    with pytest.raises(DomainError):
        GeneratorSpec(mu=0)
    with pytest.raises(DomainError):
        HamiltonianSpec(mu_h=-1)
    with pytest.raises(TypeError):
        swr_map(GeneratorSpec.brown(1.0))


def test_diffusion_coefficients_and_friction():
    assert micro_diffusion_coefficient(1.0, 1.0) == 0.5
    assert macro_diffusion_coefficient(2.0, 4.0) == 0.5
    # Einstein D at the micro friction reproduces hbar / (2m)
    u = Units(hbar=1.0, mass=1.0, k_B=1.0)
    gamma = micro_friction(0.3, u)
    assert macro_diffusion_coefficient(0.3, 1.0 * gamma, u) == pytest.approx(micro_diffusion_coefficient(1.0, 1.0))


def test_lagrangians():
    L = euclid_lagrangian(GeneratorSpec.brown(0.5))
    assert L(0.0, 2.0) == pytest.approx(2.0**2 / (4 * 0.5))
    Lh = euclid_lagrangian(GeneratorSpec.harmonic(1.0, 1.0))
    assert Lh(2.0, 1.0) == pytest.approx(0.5 + 2.0)
    Ls = euclid_lagrangian(GeneratorSpec.ornstein_uhlenbeck(1.0, 0.5))
    xs = np.linspace(-3, 3, 13)
    vs = np.linspace(-2, 2, 13)
    assert np.all(Ls(xs[:, None], vs[None, :]) >= 0)
    assert Ls(2.0, -1.0) == pytest.approx(0.0)


def test_closed_form_counterparts():
    assert closed_form_counterpart(GeneratorSpec.constant_drift(1.0, 0.3)) == cf.DriftBrown(1.0, 0.3)
    assert closed_form_counterpart(GeneratorSpec.ornstein_uhlenbeck(1.0, 0.5)) == cf.OU(1.0, 0.5)
    with pytest.raises(UnsupportedSpecError):
        closed_form_counterpart(GeneratorSpec(1.0, PotentialLike(Polynomial((0, 0, 0, 1)))))


@pytest.mark.parametrize("tau", [0.1, 0.7, 2.0])
def test_continuation_check(tau):
    r = continuation_check(cf.Harmonic(), -0.5, 0.3, tau)
    assert r.abs_error <= 1e-12
    assert abs(r.quantum_at_imag_t.imag) <= 1e-12
    rf = continuation_check(cf.FreeParticle(), -0.5, 0.3, tau)
    assert rf.abs_error <= 1e-13


def test_continuation_check_rejects_nonpositive_tau():
    with pytest.raises(DomainError):
        continuation_check(cf.Harmonic(), 0, 0, 0)


@pytest.mark.parametrize("spec", [
    cf.Brown(1.0), cf.OU(1.0, 0.5), cf.Harmonic(1.0, 1.0, 2.0), cf.FreeParticle(), cf.DriftBrown(1, 0.2),
    cf.HarmonicEuclid(1, 1), HamiltonianSpec.harmonic(1.0, 2.0, 0.5), GeneratorSpec.harmonic(1, 1),
    GeneratorSpec.ornstein_uhlenbeck(1, 0.5), SmoluchowskiSpec(1.0, Polynomial((0, 0.5)), 2.0),
    LangevinSpec(A=Polynomial((0, -1)), B=Polynomial((1,)), D=0.3), GWRStrongDamping(1, 2), SWRMicro(),
])
def test_spec_json_round_trip(spec, tmp_path):
    text = dump_spec(spec, tmp_path / "s.json")
    assert json.loads(text)["type"]
    assert load_spec(tmp_path / "s.json") == spec
    assert load_spec(text) == spec
    assert spec_from_dict(spec_to_dict(spec)) == spec


def test_harmonic_potential_shorthand():
    g = spec_from_dict({"type": "generator", "mu": 1, "w_form": {"type": "potential_like", "W": {"type": "harmonic", "k": 1}}})
    assert closed_form_counterpart(g) == cf.HarmonicEuclid(1.0, 1.0)


def test_unserializable_potential():
    with pytest.raises(UnsupportedSpecError):
        spec_to_dict(GeneratorSpec(1.0, PotentialLike(lambda x: x)))
    with pytest.raises(UnsupportedSpecError):
        spec_from_dict({"type": "nope"})
