"""Named cross-check scenarios and machine-readable reports.

Each scenario is a registered descriptor: a default parameter set, a tolerance
and a runner returning a measured error. Scenarios that check several things
report the largest ``error / tolerance`` ratio against a tolerance of 1.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import closed_form as cf
from .exceptions import UsageError, WickBridgeError
from .grid import ComplexField, Grid1D, RealField, integrate, l2_norm_sq, write_field_csv
from .lattice import (
    TimeSlicing,
    chapman_compose,
    closed_form_kernel_matrix,
    euclid_kernel_matrix,
    euclid_propagate,
    build_splitstep_plan,
)
from .master import CrankNicolsonSolver, SmoluchowskiSpec, SolverConfig, mollified_delta
from .observables import partition_function, partition_refinement, velocity_operator_literal, velocity_via_mean_drift
from .stochastic import LangevinSpec, feynman_kac_estimate, simulate_ensemble
from .wick import GeneratorSpec, HamiltonianSpec, Polynomial, swr_map

__all__ = [
    "Scenario",
    "Outcome",
    "VerificationReport",
    "REGISTRY",
    "register",
    "scenario_names",
    "run_scenario",
    "run_all",
    "COEFFICIENT_NOTE",
    "VELOCITY_NOTE",
]

COEFFICIENT_NOTE = (
    "Coefficient check: writing the Euclidean harmonic kernel with D = 1/(2 mu) gives the prefactor "
    "sqrt(mu w / (2 pi sinh wt)) and exponent coefficient mu w / 2. A version printed with "
    "sqrt(D w / (4 pi sinh wt)) and D w / 4 is not consistent with that substitution. "
    "This library uses the mu-form throughout and the continuation identity confirms it."
)

VELOCITY_NOTE = (
    "Velocity readings differ for the drifted Gaussian: the mean-drift reading d<x>/dt returns v, "
    "while the literal expectation of -(1/mu) dP/dx is a total derivative and returns 0. "
    "The drift term of the generator is what carries v; both values are reported."
)


@dataclass
class Outcome:
    measured_error: float
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    refs: tuple
    tolerance: float
    runner: Callable[[dict], Outcome]
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.refs:
            raise ValueError("a scenario needs at least one formula reference")


@dataclass
class VerificationReport:
    scenario: str
    measured_error: float
    tolerance: float
    passed: bool
    runtime_seconds: float
    artifacts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    refs: list = field(default_factory=list)
    seed: int | None = None

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "scenario": self.scenario,
            "measured_error": _jsonable(self.measured_error),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "artifacts": list(self.artifacts),
            "notes": list(self.notes),
            "details": _jsonable(self.details),
            "refs": list(self.refs),
            "seed": self.seed,
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), sort_keys=True)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    return float(math.log(e_coarse / e_fine) / math.log(ratio))


# --- scenario runners --------------------------------------------------------------

def _swr_continuation(p: dict) -> Outcome:
    xs = np.linspace(-p["x_span"], p["x_span"], 5)
    h_err = f_err = 0.0
    hq = cf.Harmonic(1.0, 1.0, p["omega"])
    fq = cf.FreeParticle(1.0, 1.0)
    hg = swr_map(HamiltonianSpec.harmonic(1.0, 1.0, p["omega"]))
    fg = swr_map(HamiltonianSpec.free())
    max_imag = 0.0
    for tau in p["taus"]:
        for xa in xs:
            for xb in xs:
                q = complex(cf.quantum_harmonic_kernel(hq, xb, xa, -1j * tau))
                e = float(cf.harmonic_euclid_kernel(hg.mu, p["omega"], xb, xa, tau))
                h_err = max(h_err, abs(q - e))
                max_imag = max(max_imag, abs(q.imag))
                qf = complex(cf.quantum_free_kernel(fq, xb, xa, -1j * tau))
                f_err = max(f_err, abs(qf - cf.brown_kernel(fg.D, xb, xa, tau)))
    tol_h, tol_f = p["tol_harmonic"], p["tol_free"]
    return Outcome(
        max(h_err / tol_h, f_err / tol_f),
        {"harmonic_abs_error": h_err, "free_abs_error": f_err, "max_imag": max_imag,
         "tol_harmonic": tol_h, "tol_free": tol_f, "points": 5 * 5 * len(p["taus"])},
        [COEFFICIENT_NOTE],
    )


def _lattice_harmonic(p: dict) -> Outcome:
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    T = p["T"]
    h = HamiltonianSpec.harmonic(1.0, 1.0, p["omega"])
    g = swr_map(h)
    # reference: the quantum kernel continued to t = -i tau
    x = grid.nodes
    ref = np.real(cf.quantum_harmonic_kernel(cf.Harmonic(1.0, 1.0, p["omega"]), x[:, None], x[None, :], -1j * T))
    errs = []
    for dt in p["dts"]:
        km = euclid_kernel_matrix(g, grid, TimeSlicing.from_dt(0.0, T, dt))
        errs.append(km.sup_error(ref))
    orders = [_order(errs[i], errs[i + 1]) for i in range(len(errs) - 1)]
    band = p["order_band"]
    ratio = max([abs(o - 1.0) / band for o in orders] + [errs[-1] / p["max_error"]])
    return Outcome(ratio, {"dts": p["dts"], "sup_errors": errs, "orders": orders,
                           "order_band": band, "max_error": p["max_error"]})


def _ou_triangle(p: dict) -> Outcome:
    D, eta, T = p["D"], p["eta"], p["T"]
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    g = GeneratorSpec.ornstein_uhlenbeck(D, eta)
    x = grid.nodes
    ref = cf.ou_kernel(D, eta, x[:, None], x[None, :], T)
    # columns far enough from the edges that absorbing truncation is negligible
    cols = np.abs(x) <= p["kernel_inner"]
    errs = []
    for n in p["n_slices"]:
        km = euclid_kernel_matrix(g, grid, TimeSlicing(0.0, T, n - 1))
        errs.append(km.sup_error(ref, cols))
    orders = [_order(errs[i], errs[i + 1]) for i in range(len(errs) - 1)]

    init, var0 = mollified_delta(grid, p["x0"])
    lat = euclid_propagate(init, g, TimeSlicing(0.0, T, p["n_slices"][-1] - 1)).values
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial((0.0, eta)), 1.0), SolverConfig(p["cn_dt"]))
    cn = solver.advance(T).values
    exact = cf.ou_gaussian_pdf(D, eta, x, T, p["x0"], var0)
    pair = {
        "lattice_vs_closed": float(np.abs(lat - exact).max()),
        "cn_vs_closed": float(np.abs(cn - exact).max()),
        "lattice_vs_cn": float(np.abs(lat - cn).max()),
    }
    tol = p["pair_tol"]
    ratio = max([errs[-1] / p["kernel_tol"]] + [abs(o - 1.0) / p["order_band"] for o in orders]
                + [v / tol for v in pair.values()])
    return Outcome(
        ratio,
        {"kernel_sup_errors": errs, "kernel_orders": orders, "n_slices": p["n_slices"],
         "pairwise_sup": pair, "pair_tol": tol, "kernel_tol": p["kernel_tol"],
         "kernel_inner": p["kernel_inner"]},
        fields={"ou_lattice": RealField(grid, lat), "ou_cn": RealField(grid, cn), "ou_closed": RealField(grid, exact)},
    )


def _partition(p: dict) -> Outcome:
    mu, omega, bh = p["mu"], p["omega"], p["beta_hbar"]
    exact = cf.harmonic_partition_exact(bh * omega)
    z = partition_function(mu, omega, bh, Grid1D.from_spacing(-p["L"], p["L"], p["dx"]))
    rows = partition_refinement(mu, omega, bh, Grid1D.from_spacing(-p["L_lattice"], p["L_lattice"], p["dx_lattice"]),
                                tuple(p["n_slices"]))
    orders = [r.order for r in rows if r.order is not None]
    min_order = min(orders)
    ratio = max(abs(z - exact) / p["tol"], p["min_order"] / min_order if min_order > 0 else math.inf)
    return Outcome(
        ratio,
        {"exact": exact, "closed_quadrature": z, "closed_error": abs(z - exact), "tol": p["tol"],
         "lattice": [{"n_slices": r.n_slices, "dt": r.dt, "Z": r.Z, "error": r.error, "order": r.order} for r in rows],
         "required_min_order": p["min_order"]},
        ["Lattice Z is checked for at least first-order convergence; the measured order is reported."],
    )


def _chapman(p: dict) -> Outcome:
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    t = p["t"]
    kernels = {
        "brown": lambda xb, xa, s: cf.brown_kernel(p["D"], xb, xa, s),
        "harmonic_euclid": lambda xb, xa, s: cf.harmonic_euclid_kernel(p["mu"], p["omega"], xb, xa, s),
        "ou": lambda xb, xa, s: cf.ou_kernel(p["D"], p["eta"], xb, xa, s),
    }
    inner = np.abs(grid.nodes) <= p["inner"]
    errs = {}
    for name, k in kernels.items():
        k1 = closed_form_kernel_matrix(k, grid, 0.0, t)
        k2 = closed_form_kernel_matrix(k, grid, t, 2 * t)
        comp = chapman_compose(k2, k1)
        full = closed_form_kernel_matrix(k, grid, 0.0, 2 * t)
        errs[name] = float(np.abs(comp.entries - full.entries)[np.ix_(inner, inner)].max())
    return Outcome(max(errs.values()) / p["tol"], {"sup_errors": errs, "tol": p["tol"], "inner_half_width": p["inner"]})


def _normalization(p: dict) -> Outcome:
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    T = p["T"]
    x = grid.nodes
    inner = np.abs(x) <= p["inner"]
    closed = {
        "brown": cf.Brown(1.0),
        "drift_brown": cf.DriftBrown(1.0, 0.5),
        "harmonic_euclid": cf.HarmonicEuclid(1.0, 1.0),
        "ou": cf.OU(1.0, 0.5),
    }
    defects, min_entries = {}, {}
    for name, spec in closed.items():
        km = closed_form_kernel_matrix(lambda xb, xa, s, spec=spec: cf.euclid_kernel(spec, xb, xa, s), grid, 0.0, T)
        defects[f"closed:{name}"] = float(np.abs(km.column_masses()[inner] - 1.0).max())
    lattice = {
        "brown": GeneratorSpec.brown(1.0),
        "harmonic_euclid": GeneratorSpec.harmonic(1.0, 1.0),
        "ou": GeneratorSpec.ornstein_uhlenbeck(1.0, 0.5),
    }
    for name, g in lattice.items():
        km = euclid_kernel_matrix(g, grid, TimeSlicing(0.0, T, p["n_slices"] - 1))
        defects[f"lattice:{name}"] = float(np.abs(km.column_masses()[inner] - 1.0).max())
        min_entries[f"lattice:{name}"] = float(km.entries.min())
    worst_neg = max(0.0, -min(min_entries.values()))
    ratio = max(max(defects.values()) / p["mass_tol"], worst_neg / p["neg_tol"])
    notes = []
    failing = sorted(k for k, v in defects.items() if v > p["mass_tol"])
    if failing:
        notes.append(
            "Column mass outside tolerance for " + ", ".join(failing) + ". A potential W >= 0 removes "
            "probability, so the harmonic Euclidean kernel has column mass "
            "cosh(wt)^(-1/2) exp(-mu w x_a^2 tanh(wt) / 2) rather than 1."
        )
    return Outcome(ratio, {"mass_defects": defects, "min_entries": min_entries, "mass_tol": p["mass_tol"],
                           "neg_tol": p["neg_tol"]}, notes)


def _cn_ou(p: dict) -> Outcome:
    D, eta, T = p["D"], p["eta"], p["T"]
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    init, var0 = mollified_delta(grid, p["x0"])
    solver = CrankNicolsonSolver(init, SmoluchowskiSpec(D, Polynomial((0.0, eta)), 1.0), SolverConfig(p["dt"]))
    out = solver.advance(T)
    exact = RealField(grid, cf.ou_gaussian_pdf(D, eta, grid.nodes, T, p["x0"], var0))
    rep = solver.report(exact)
    ratio = max(rep["linf_error"] / p["linf_tol"], abs(rep["mass_drift"]) / p["mass_tol"],
                rep["undershoot_rel_peak"] / p["undershoot_tol"])
    rep.update({"linf_tol": p["linf_tol"], "mass_tol": p["mass_tol"], "undershoot_tol": p["undershoot_tol"]})
    return Outcome(ratio, rep, fields={"cn_ou": out, "ou_reference": exact})


def _langevin(p: dict) -> Outcome:
    D, eta, y0 = p["D"], p["eta"], p["y0"]
    n_steps = int(round(p["T"] / p["dt"]))
    check_times = p["check_times"]
    steps = [int(round(t / p["dt"])) for t in check_times]
    ens = simulate_ensemble(LangevinSpec.ornstein_uhlenbeck(D, eta), y0, p["T"], n_steps, p["n_paths"], p["seed"],
                            record_steps=steps)
    rows = []
    zmax = 0.0
    for t, s in zip(check_times, steps):
        m = ens.sample_moments(s)
        mean_ex = float(cf.ou_mean(y0, eta, t))
        var_ex = float(cf.ou_variance(D, eta, t))
        zm = abs(m["mean"] - mean_ex) / m["mean_se"]
        zv = abs(m["variance"] - var_ex) / m["variance_se"]
        zmax = max(zmax, zm, zv)
        rows.append({"t": t, **m, "mean_exact": mean_ex, "variance_exact": var_ex, "z_mean": zm, "z_variance": zv})
    v, td = p["v"], p["t_drift"]
    nd = p["drift_steps"]
    dens = simulate_ensemble(LangevinSpec.drifted(D, v), 0.0, td, nd, p["n_paths"], p["seed"] + 1, record_steps=[nd])
    dm = dens.sample_moments(nd)
    zd = abs(dm["mean"] - v * td) / dm["mean_se"]
    zmax = max(zmax, zd)
    return Outcome(zmax, {"ou": rows, "drifted": {"t": td, "v": v, **dm, "mean_exact": v * td, "z_mean": zd},
                          "n_paths": p["n_paths"], "dt": p["dt"], "band_se": 4.0})


def _feynman_kac(p: dict) -> Outcome:
    g = GeneratorSpec.harmonic(p["mu"], p["omega"])
    est = feynman_kac_estimate(p["x_a"], p["x_b"], p["tau"], g, p["n_steps"], p["n_samples"], p["seed"])
    exact = float(cf.harmonic_euclid_kernel(p["mu"], p["omega"], p["x_b"], p["x_a"], p["tau"]))
    allowed = 3.0 * est.std_err + est.bias_bound
    return Outcome(abs(est.value - exact) / allowed, {**est.to_dict(), "exact": exact, "abs_error": abs(est.value - exact),
                                                      "allowed": allowed})


def _phase_aligned_distance(a: np.ndarray, b: np.ndarray, dx: float) -> tuple[float, float]:
    ov = abs(np.sum(np.conj(a) * b) * dx)
    return math.sqrt(max(2.0 - 2.0 * ov, 0.0)), 1.0 - ov**2


def _splitstep(p: dict) -> Outcome:
    n, L = p["n"], p["L"]
    grid = Grid1D(-L / 2, L / 2 - L / n, n)
    x = grid.nodes
    s, k0 = p["sigma"], p["k0"]

    def packet(x0, t):
        # free Gaussian packet (hbar = m = 1) up to a constant factor
        a = s * s * (1 + 1j * t / (2 * s * s))
        y = x - x0 - k0 * t
        return np.exp(-y**2 / (4 * a) + 1j * k0 * (x - x0) - 0.5j * k0**2 * t) / np.sqrt(a)

    # free evolution against the analytic packet
    free = HamiltonianSpec.free()
    psi0 = packet(p["x0_free"], 0.0)
    psi0 = psi0 / math.sqrt(np.sum(abs(psi0) ** 2) * grid.dx)
    Tf = p["T_free"]
    nf = p["n_free"]
    plan = build_splitstep_plan(grid, Tf / nf, free, "strang")
    psi = psi0.copy()
    norm_drift = 0.0
    prev = l2_norm_sq(ComplexField(grid, psi))
    for _ in range(nf):
        psi = plan.step(psi)
        cur = l2_norm_sq(ComplexField(grid, psi))
        norm_drift = max(norm_drift, abs(cur - prev))
        prev = cur
    ref = packet(p["x0_free"], Tf)
    ref = ref / math.sqrt(np.sum(abs(ref) ** 2) * grid.dx)
    fid = abs(np.sum(np.conj(ref) * psi) * grid.dx) ** 2

    # harmonic full-period return
    h = HamiltonianSpec.harmonic(1.0, 1.0, 1.0)
    phi0 = np.exp(-((x - p["x0_ho"]) ** 2) / (4 * p["sigma_ho"] ** 2) + 1j * p["k0_ho"] * x)
    phi0 = phi0 / math.sqrt(np.sum(abs(phi0) ** 2) * grid.dx)
    Tp = 2 * np.pi
    results = {}
    for order in ("first", "strang"):
        dist, inf = [], []
        for N in p["n_period"]:
            plan = build_splitstep_plan(grid, Tp / N, h, order)
            phi = phi0.copy()
            for _ in range(N):
                phi = plan.step(phi)
            d, i = _phase_aligned_distance(phi0, phi, grid.dx)
            dist.append(d)
            inf.append(i)
        results[order] = {
            "distance": dist,
            "infidelity": inf,
            "distance_orders": [_order(dist[i], dist[i + 1]) for i in range(len(dist) - 1)],
            "infidelity_orders": [_order(inf[i], inf[i + 1]) for i in range(len(inf) - 1)],
        }
    so = results["strang"]["distance_orders"]
    fo = results["first"]["distance_orders"]
    ratio = max(
        (1.0 - fid) / p["infidelity_tol"],
        norm_drift / p["norm_tol"],
        max(abs(o - 2.0) for o in so) / p["strang_band"],
        max(p["first_min_order"] / o if o > 0 else math.inf for o in fo),
    )
    return Outcome(
        ratio,
        {"free_fidelity": fid, "free_infidelity": 1.0 - fid, "norm_drift_per_step": norm_drift,
         "n_period": p["n_period"], "harmonic_return": results},
        ["Return error is the phase-aligned distance sqrt(2 - 2|<psi0|psiT>|). Over one full period the "
         "first-order split is conjugate to the symmetric one, so it converges at least at first order "
         "and is observed near second order; intermediate times show the first-order rate."],
    )


def _limits(p: dict) -> Outcome:
    xs = np.linspace(-2, 2, 9)
    xa, xb = np.meshgrid(xs, xs)
    t = p["t"]
    mu = p["mu"]
    D = 1.0 / (2 * mu)
    brown = cf.brown_kernel(D, xb, xa, t)
    he = cf.harmonic_euclid_kernel(mu, p["omega"], xb, xa, t)
    ou = cf.ou_kernel(D, p["eta"], xb, xa, t)
    r_he = float(np.max(np.abs(he / brown - 1)))
    r_ou = float(np.max(np.abs(ou / brown - 1)))
    return Outcome(max(r_he, r_ou) / p["tol"], {"harmonic_to_brown_rel": r_he, "ou_to_brown_rel": r_ou,
                                                "omega": p["omega"], "eta": p["eta"], "tol": p["tol"]})


def _velocity(p: dict) -> Outcome:
    D, v, t, dl = p["D"], p["v"], p["t"], p["delta"]
    grid = Grid1D.from_spacing(-p["L"], p["L"], p["dx"])
    x = grid.nodes
    pm = RealField(grid, cf.drift_brown_pdf(D, v, x, t - dl))
    pp = RealField(grid, cf.drift_brown_pdf(D, v, x, t + dl))
    pt = RealField(grid, cf.drift_brown_pdf(D, v, x, t))
    mu = 1.0 / (2 * D)
    v_mean = velocity_via_mean_drift(pm, pp, dl)
    v_lit = velocity_operator_literal(pt, mu)
    lit_tol = p["literal_tol_factor"] * grid.dx**2
    ratio = max(abs(v_mean - v) / p["mean_tol"], abs(v_lit) / lit_tol)
    return Outcome(ratio, {"v": v, "velocity_mean_drift": v_mean, "velocity_literal": v_lit,
                           "mean_tol": p["mean_tol"], "literal_tol": lit_tol}, [VELOCITY_NOTE])


# --- registry ----------------------------------------------------------------------

REGISTRY: dict[str, Scenario] = {}

PUBLISHED_SEED = 20240611


def register(s: Scenario, registry: dict | None = None) -> Scenario:
    reg = REGISTRY if registry is None else registry
    if s.name in reg:
        raise ValueError(f"duplicate scenario {s.name!r}")
    reg[s.name] = s
    return s


def _builtin():
    reg = [
        Scenario(
            "swr-harmonic-continuation",
            "Quantum harmonic and free kernels at t = -i tau equal their Euclidean counterparts.",
            ("quantum harmonic kernel", "mu-form Euclidean harmonic kernel", "free kernel <-> heat kernel"),
            1.0, _swr_continuation,
            {"omega": 1.0, "x_span": 2.0, "taus": [0.1, 0.7, 2.0], "tol_harmonic": 1e-12, "tol_free": 1e-13},
        ),
        Scenario(
            "lattice-harmonic-convergence",
            "Transfer-matrix kernel of the SWR harmonic generator converges at first order in dt.",
            ("time-sliced Euclidean path integral", "post-point discretized action", "mu-form Euclidean harmonic kernel"),
            1.0, _lattice_harmonic,
            {"omega": 1.0, "T": 0.7, "L": 8.0, "dx": 0.02, "dts": [7e-3, 3.5e-3, 1.75e-3],
             "order_band": 0.15, "max_error": 2e-3},
        ),
        Scenario(
            "ou-triangle",
            "Strong-damping lattice kernel, Crank-Nicolson and the OU closed form agree pairwise.",
            ("strong-damping Euclidean Lagrangian", "Smoluchowski equation", "OU transition density"),
            1.0, _ou_triangle,
            {"D": 1.0, "eta": 0.5, "T": 1.0, "L": 10.0, "dx": 0.02, "n_slices": [100, 200, 400], "x0": 1.0,
             "cn_dt": 1e-4, "kernel_inner": 4.0, "pair_tol": 2e-3, "kernel_tol": 2e-3, "order_band": 0.15},
        ),
        Scenario(
            "partition-function",
            "Trace of the harmonic Euclidean kernel gives 1/(2 sinh(beta hbar omega / 2)).",
            ("partition function as kernel trace", "mu-form Euclidean harmonic kernel"),
            1.0, _partition,
            {"mu": 1.0, "omega": 1.0, "beta_hbar": 2.0, "L": 10.0, "dx": 0.01, "tol": 1e-6,
             "L_lattice": 8.0, "dx_lattice": 0.02, "n_slices": [100, 200, 400], "min_order": 0.85},
        ),
        Scenario(
            "chapman-kolmogorov",
            "Quadrature self-composition of closed-form kernels at (t, t) equals the kernel at 2t.",
            ("composition law",),
            1.0, _chapman,
            {"t": 0.5, "L": 12.0, "dx": 0.04, "inner": 4.0, "D": 1.0, "mu": 1.0, "omega": 1.0, "eta": 0.5,
             "tol": 1e-7},
        ),
        Scenario(
            "normalization-positivity",
            "Closed-form and lattice Euclidean kernel columns integrate to 1; lattice entries are non-negative.",
            ("normalization of the transition probability",),
            1.0, _normalization,
            {"T": 0.5, "L": 8.0, "dx": 0.04, "inner": 2.0, "n_slices": 50, "mass_tol": 1e-6, "neg_tol": 1e-12},
        ),
        Scenario(
            "crank-nicolson-ou",
            "Crank-Nicolson evolution of a mollified delta matches the analytically evolved OU Gaussian.",
            ("Smoluchowski equation", "OU solution with relaxing mean and variance"),
            1.0, _cn_ou,
            {"D": 1.0, "eta": 0.5, "T": 1.0, "L": 10.0, "dx": 0.02, "dt": 1e-4, "x0": 1.0,
             "linf_tol": 1e-4, "mass_tol": 1e-10, "undershoot_tol": 1e-8},
        ),
        Scenario(
            "langevin-ou-moments",
            "Euler-Maruyama OU and drifted-Brownian ensembles reproduce exact moments within 4 standard errors.",
            ("Langevin equation with 2D delta noise", "OU mean and variance", "drifted Gaussian mean vt"),
            4.0, _langevin,
            {"D": 1.0, "eta": 0.5, "y0": 1.0, "T": 2.0, "dt": 1e-3, "check_times": [0.5, 1.0, 2.0],
             "n_paths": 100_000, "seed": PUBLISHED_SEED, "v": 0.7, "t_drift": 1.0, "drift_steps": 100},
            seed=PUBLISHED_SEED,
        ),
        Scenario(
            "feynman-kac-harmonic",
            "Bridge-sampled Feynman-Kac estimate of the harmonic Euclidean kernel.",
            ("post-point discretized action", "mu-form Euclidean harmonic kernel"),
            1.0, _feynman_kac,
            {"mu": 1.0, "omega": 1.0, "tau": 0.7, "x_a": 0.3, "x_b": -0.5, "n_steps": 200,
             "n_samples": 100_000, "seed": PUBLISHED_SEED},
            seed=PUBLISHED_SEED,
        ),
        Scenario(
            "splitstep-quantum",
            "Split-step Fourier propagation: free packet fidelity, norm drift, harmonic return orders.",
            ("Trotter factorization of the quantum propagator", "kinetic factor in wave-number space"),
            1.0, _splitstep,
            {"n": 1024, "L": 40.0, "sigma": 1.0, "k0": 1.0, "x0_free": -3.0, "T_free": 2.0, "n_free": 200,
             "x0_ho": 1.5, "sigma_ho": 0.8, "k0_ho": 0.7, "n_period": [200, 400, 800],
             "infidelity_tol": 1e-10, "norm_tol": 1e-12, "strang_band": 0.2, "first_min_order": 0.85},
        ),
        Scenario(
            "limit-identities",
            "Harmonic Euclidean and OU kernels reduce to the heat kernel as omega, eta -> 0.",
            ("omega = 0 -> eta = 0 limit", "Einstein-Brown heat kernel"),
            1.0, _limits,
            {"mu": 0.5, "omega": 1e-6, "eta": 1e-8, "t": 1.0, "tol": 1e-6},
        ),
        Scenario(
            "velocity-discrepancy",
            "Mean-drift velocity returns v; the literal -(1/mu) dP/dx expectation returns 0.",
            ("real expectation of the velocity operator", "drifted Gaussian transition density"),
            1.0, _velocity,
            {"D": 1.0, "v": 0.7, "t": 1.0, "delta": 1e-3, "L": 15.0, "dx": 0.01, "mean_tol": 1e-8,
             "literal_tol_factor": 1.0},
        ),
    ]
    for s in reg:
        register(s)


_builtin()


def scenario_names(registry: dict | None = None) -> list[str]:
    return list((REGISTRY if registry is None else registry).keys())


def _write_artifacts(report: VerificationReport, outcome: Outcome, output_dir) -> None:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for key, fld in outcome.fields.items():
        path = out / f"{report.scenario}__{key}.csv"
        write_field_csv(fld, path)
        report.artifacts.append(str(path))
    path = out / f"{report.scenario}.json"
    report.artifacts.append(str(path))
    path.write_text(report.to_json() + "\n")


def run_scenario(name: str, overrides: dict | None = None, registry: dict | None = None,
                 output_dir=None) -> VerificationReport:
    """Run one registered scenario; numerical exceptions become a failed report."""
    reg = REGISTRY if registry is None else registry
    if name not in reg:
        raise UsageError(f"unknown scenario {name!r}; known: {', '.join(reg)}")
    s = reg[name]
    params = dict(s.params)
    for k, v in (overrides or {}).items():
        if k not in params:
            raise UsageError(f"scenario {name!r} has no parameter {k!r}")
        params[k] = v
    t0 = time.perf_counter()
    try:
        outcome = s.runner(params)
    except (WickBridgeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        outcome = Outcome(math.inf, {"error": f"{type(exc).__name__}: {exc}"})
    elapsed = time.perf_counter() - t0
    err = float(outcome.measured_error)
    report = VerificationReport(
        scenario=name,
        measured_error=err,
        tolerance=s.tolerance,
        passed=bool(err <= s.tolerance),
        runtime_seconds=elapsed,
        notes=list(outcome.notes),
        details=outcome.details,
        refs=list(s.refs),
        seed=params.get("seed", s.seed),
    )
    if output_dir is not None:
        _write_artifacts(report, outcome, output_dir)
    return report


def run_all(registry: dict | None = None, output_dir=None) -> list[VerificationReport]:
    """Every registered scenario, in registration order."""
    reg = REGISTRY if registry is None else registry
    return [run_scenario(n, registry=reg, output_dir=output_dir) for n in reg]
