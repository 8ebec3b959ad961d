import json
import math

import numpy as np
import pytest

from wickbridge import closed_form as cf
from wickbridge.exceptions import DomainError, UnsupportedSpecError
from wickbridge.grid import Grid1D, RealField, integrate
from wickbridge.master import (
    CrankNicolsonSolver,
    FokkerPlanckSpec,
    SmoluchowskiSpec,
    SolverConfig,
    evolve_crank_nicolson,
    fp_rhs,
    mollified_delta,
    smoluchowski_from_generator,
    smoluchowski_rhs,
)
from wickbridge.wick import GeneratorSpec, Polynomial

D, ETA = 1.0, 0.5


def gauss(x, m, v):
    return np.exp(-(x - m) ** 2 / (2 * v)) / np.sqrt(2 * np.pi * v)


def gauss_dd(x, m, v):
    return gauss(x, m, v) * ((x - m) ** 2 / v**2 - 1 / v)


def _interior_err(grid, a, b):
    return float(np.abs(a - b)[1:-1].max())


def test_pure_diffusion_rhs_second_order():
    errs = []
    for dx in (0.04, 0.02):
        grid = Grid1D.from_spacing(-8, 8, dx)
        x = grid.nodes
        p = RealField(grid, gauss(x, 0.3, 0.5))
        rhs = fp_rhs(p, FokkerPlanckSpec(A=lambda x, t: 0 * x, D=D))
        errs.append(_interior_err(grid, rhs.values, D * gauss_dd(x, 0.3, 0.5)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)


def test_zero_field_gives_zero_rhs(grid):
    out = fp_rhs(RealField(grid, np.zeros(grid.n)), FokkerPlanckSpec(A=lambda x, t: -x, D=1.0))
    assert np.all(out.values == 0)


def test_constant_drift_rhs_matches_time_derivative():
    v, t = 0.7, 1.0
    errs = []
    for dx in (0.04, 0.02):
        grid = Grid1D.from_spacing(-10, 10, dx)
        x = grid.nodes
        var = 2 * D * t
        p = RealField(grid, gauss(x, v * t, var))
        # d/dt of the drifted Gaussian: -v P' + D P''
        dp = -v * gauss(x, v * t, var) * (-(x - v * t) / var) + D * gauss_dd(x, v * t, var)
        rhs = fp_rhs(p, FokkerPlanckSpec(A=lambda x, t: np.full_like(x, v), D=D))
        errs.append(_interior_err(grid, rhs.values, dp))
    assert errs[1] < 1e-4
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.15)


def test_smoluchowski_free_equals_diffusion(grid):
    p = RealField(grid, gauss(grid.nodes, 0.0, 1.0))
    a = smoluchowski_rhs(p, SmoluchowskiSpec(D, Polynomial()))
    b = fp_rhs(p, FokkerPlanckSpec(A=lambda x, t: 0 * x, D=D))
    np.testing.assert_allclose(a.values, b.values, atol=1e-15)


def test_smoluchowski_harmonic_matches_expanded_form(grid):
    x = grid.nodes
    m, v = 0.5, 0.8
    p = RealField(grid, gauss(x, m, v))
    rhs = smoluchowski_rhs(p, SmoluchowskiSpec(D, Polynomial((0, ETA)), 1.0))
    # D P'' + eta (x P)' = D P'' + eta P + eta x P'
    P = gauss(x, m, v)
    expanded = D * gauss_dd(x, m, v) + ETA * P + ETA * x * P * (-(x - m) / v)
    assert _interior_err(grid, rhs.values, expanded) < 1e-4


def test_ou_stationary_rhs_small():
    for dx, bound in ((0.04, 2e-4), (0.02, 5e-5)):
        grid = Grid1D.from_spacing(-10, 10, dx)
        p = RealField(grid, gauss(grid.nodes, 0.0, D / ETA))
        rhs = smoluchowski_rhs(p, SmoluchowskiSpec(D, Polynomial((0, ETA))))
        assert np.abs(rhs.values).max() < bound


def test_rhs_conserves_mass_exactly(grid):
    p = RealField(grid, gauss(grid.nodes, 9.5, 0.3))  # mass touching the edge
    rhs = fp_rhs(p, FokkerPlanckSpec(A=lambda x, t: np.sin(x), B=lambda x, t: 1 + 0.1 * np.cos(x), D=0.7))
    assert abs(integrate(rhs)) < 1e-12


def test_cn_pure_diffusion_variance():
    grid = Grid1D.from_spacing(-15, 15, 0.02)
    s0 = 0.5
    init = RealField(grid, gauss(grid.nodes, 0.0, s0**2))
    out = evolve_crank_nicolson(init, FokkerPlanckSpec(A=lambda x, t: 0 * x, D=D), 1.0, SolverConfig(1e-3))
    x = grid.nodes
    var = np.trapezoid(x**2 * out.values, x) / integrate(out)
    assert var == pytest.approx(s0**2 + 2 * D * 1.0, abs=1e-4)


def test_cn_ou_delta_like_init():
    grid = Grid1D.from_spacing(-10, 10, 0.02)
    init, var0 = mollified_delta(grid, 0.0)
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial((0, ETA))), SolverConfig(1e-4))
    out = solver.advance(1.0)
    ref = cf.ou_gaussian_pdf(D, ETA, grid.nodes, 1.0, 0.0, var0)
    assert np.abs(out.values - ref).max() <= 1e-4
    # the mollifier is negligible against the unit-time OU spread
    assert np.abs(out.values - cf.ou_absolute_pdf(D, ETA, grid.nodes, 1.0)).max() <= 1e-3
    assert abs(solver.mass_drift) <= 1e-10
    assert solver.report()["undershoot_rel_peak"] <= 1e-8


def test_t_final_zero_returns_init(grid):
    init, _ = mollified_delta(grid, 0.0)
    assert evolve_crank_nicolson(init, SmoluchowskiSpec(D, Polynomial()), 0.0, SolverConfig(1e-3)) is init


def test_ou_long_time_convergence():
    grid = Grid1D.from_spacing(-10, 10, 0.01)
    x = grid.nodes
    stat = np.sqrt(ETA / (2 * np.pi * D)) * np.exp(-ETA * x**2 / (2 * D))
    init, _ = mollified_delta(grid, 1.0)
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial((0, ETA))), SolverConfig(1e-2))
    errs = []
    for t in np.arange(2.0, 20 / ETA + 1e-9, 2.0):
        solver.advance(t)
        errs.append(float(np.abs(solver.values - stat).max()))
    assert errs[-1] <= 1e-6
    assert np.all(np.diff(errs) <= 1e-12)
    assert abs(solver.mass_drift) <= 1e-10 * 20 / ETA


def test_time_dependent_drift_uses_half_step():
    # A = t shifts the mean by t^2 / 2; midpoint sampling integrates a linear drift exactly
    grid = Grid1D.from_spacing(-10, 10, 0.02)
    init = RealField(grid, gauss(grid.nodes, 0.0, 0.5))
    spec = FokkerPlanckSpec(A=lambda x, t: np.full_like(x, t), D=0.5, time_dependent=True)
    out = evolve_crank_nicolson(init, spec, 1.0, SolverConfig(0.05))
    mean = np.trapezoid(grid.nodes * out.values, grid.nodes)
    assert mean == pytest.approx(0.5, abs=1e-8)


def test_dirichlet_boundary_pins_edges(grid):
    init = RealField(grid, gauss(grid.nodes, 8.0, 1.0))
    out = evolve_crank_nicolson(init, SmoluchowskiSpec(D, Polynomial()), 1.0, SolverConfig(1e-2, "dirichlet0"))
    assert out.values[0] == 0 and out.values[-1] == 0
    assert integrate(out) < integrate(init)


def test_snapshots(tmp_path):
    grid = Grid1D.from_spacing(-5, 5, 0.05)
    init, _ = mollified_delta(grid, 0.0)
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial()), SolverConfig(0.01))
    solver.advance(0.1, snapshot_every=5, snapshot_dir=tmp_path)
    assert len(solver.snapshots) == 2
    assert sorted(p.name for p in tmp_path.iterdir()) == ["snapshot_0000005.csv", "snapshot_0000010.csv"]
    rep = json.loads(solver.report_json(solver.field))
    assert rep["linf_error"] == 0.0 and rep["steps"] == 10


def test_advance_lands_on_t_final():
    grid = Grid1D.from_spacing(-5, 5, 0.05)
    init, _ = mollified_delta(grid, 0.0)
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial()), SolverConfig(0.03))
    solver.advance(0.1)
    assert solver.t == pytest.approx(0.1, abs=1e-15)
    assert solver.n_steps_taken == 4
    with pytest.raises(DomainError):
        solver.advance(0.05)


@pytest.mark.parametrize("A", [lambda x, t: np.full_like(x, np.nan), lambda x, t: np.zeros(3)])
def test_unsupported_coefficients(grid, A):
    init, _ = mollified_delta(grid, 0.0)
    with pytest.raises(UnsupportedSpecError):
        evolve_crank_nicolson(init, FokkerPlanckSpec(A=A), 0.1, SolverConfig(0.01))


def test_spec_and_config_validation():
    with pytest.raises(DomainError):
        FokkerPlanckSpec(A=lambda x, t: x, D=0)
    with pytest.raises(DomainError):
        SmoluchowskiSpec(1.0, Polynomial(), m_gamma=0)
    with pytest.raises(DomainError):
        SolverConfig(0.0)
    with pytest.raises(DomainError):
        SolverConfig(0.1, boundary="periodic")
    with pytest.raises(DomainError):
        SolverConfig(0.1, scheme="euler")
    with pytest.raises(UnsupportedSpecError):
        fp_rhs(RealField(Grid1D(0, 1, 3), [0, 0, 0]), object())


def test_smoluchowski_from_generator():
    s = smoluchowski_from_generator(GeneratorSpec.ornstein_uhlenbeck(2.0, 0.5))
    assert s.D == 2.0 and s.Vprime(1.0) == 0.5
    assert smoluchowski_from_generator(GeneratorSpec.brown(1.0)).Vprime(3.0) == 0.0
    with pytest.raises(UnsupportedSpecError):
        smoluchowski_from_generator(GeneratorSpec.harmonic(1, 1))


def test_mollified_delta():
    grid = Grid1D.from_spacing(-2, 2, 0.01)
    f, var = mollified_delta(grid, 0.5)
    assert var == pytest.approx((3 * grid.dx) ** 2)
    assert integrate(f) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        mollified_delta(grid, 3.0)
