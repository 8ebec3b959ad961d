"""Command-line front end.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage error.
Files go to ``--output`` when given, else into ``$WICKBRIDGE_OUTPUT_DIR`` when
set, else to stdout.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import closed_form as cf
from .exceptions import DomainError, GridMismatchError, UnsupportedSpecError, UsageError, WickBridgeError
from .grid import ComplexField, Grid1D, RealField, read_field_csv, write_field_csv
from .lattice import TimeSlicing, euclid_propagate, splitstep_quantum_propagate
from .master import CrankNicolsonSolver, SmoluchowskiSpec, SolverConfig, mollified_delta, smoluchowski_from_generator
from .observables import partition_function, partition_refinement
from .stochastic import LangevinSpec, feynman_kac_estimate, simulate_ensemble
from .verification import run_scenario, scenario_names
from .wick import DriftForm, GeneratorSpec, HamiltonianSpec, Polynomial, closed_form_counterpart, load_spec

OUTPUT_ENV = "WICKBRIDGE_OUTPUT_DIR"
CLI_CAUSTIC_TOL = 1e-8
OVERRIDABLE = ("omega", "mass", "hbar", "D", "mu", "eta", "v")


# --- helpers -----------------------------------------------------------------------

def _emit(text: str, output: str | None, default_name: str) -> str | None:
    """Write to --output, else to the env output dir, else stdout. Returns the path used."""
    if output:
        path = Path(output)
    elif os.environ.get(OUTPUT_ENV):
        path = Path(os.environ[OUTPUT_ENV]) / default_name
    else:
        sys.stdout.write(text)
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


def _out_dir(arg: str | None) -> Path | None:
    d = arg or os.environ.get(OUTPUT_ENV)
    if not d:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load(path: str):
    if not Path(path).exists():
        raise UsageError(f"spec file not found: {path}")
    try:
        return load_spec(path)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse spec {path}: {exc}") from exc


def _apply_overrides(spec, args):
    changes = {k: getattr(args, k) for k in OVERRIDABLE if getattr(args, k, None) is not None}
    if not changes:
        return spec
    if not dataclasses.is_dataclass(spec):
        raise UsageError("overrides need a flat spec document")
    names = {f.name for f in dataclasses.fields(spec)}
    bad = sorted(set(changes) - names)
    if bad:
        raise UsageError(f"{type(spec).__name__} has no field(s) {', '.join(bad)}")
    return dataclasses.replace(spec, **changes)


def _quantum_counterpart(h: HamiltonianSpec):
    if h.time_dependent or not isinstance(h.V_h, Polynomial):
        raise UnsupportedSpecError("no closed-form quantum kernel for this Hamiltonian")
    c = np.trim_zeros(np.array(h.V_h.coeffs), "b")
    if c.size == 0:
        return cf.FreeParticle(h.mass, h.hbar)
    if c.size == 3 and c[0] == 0 and c[1] == 0 and c[2] > 0:
        return cf.Harmonic(h.mass, h.hbar, float(math.sqrt(2 * c[2] / h.mu_h)))
    raise UnsupportedSpecError("no closed-form quantum kernel for this potential")


def _grid(args) -> Grid1D:
    return Grid1D(args.x_min, args.x_max, args.n)


def _add_grid(p, x_min=-10.0, x_max=10.0, n=1001):
    p.add_argument("--x-min", type=float, default=x_min)
    p.add_argument("--x-max", type=float, default=x_max)
    p.add_argument("--n", type=int, default=n, help="number of grid nodes")


# --- subcommands -------------------------------------------------------------------

def cmd_kernel(args) -> int:
    spec = _load(args.spec)
    if isinstance(spec, HamiltonianSpec):
        spec = _quantum_counterpart(spec)
    elif isinstance(spec, GeneratorSpec):
        spec = closed_form_counterpart(spec)
    # overrides act on the closed-form parameters (omega, D, eta, ...)
    spec = _apply_overrides(spec, args)
    grid = _grid(args)
    x = grid.nodes
    quantum = isinstance(spec, (cf.FreeParticle, cf.Harmonic))
    if args.continued:
        if not quantum:
            raise UsageError("--continued applies to quantum specs only")
        if args.tau is None:
            raise UsageError("--continued needs --tau")
        vals = cf.quantum_kernel(spec, x, args.xa, -1j * args.tau, **_ckw(spec, args))
        imag = float(np.max(np.abs(np.imag(vals))))
        if imag > 1e-10 * max(1.0, float(np.max(np.abs(vals)))):
            raise DomainError(f"continued kernel is not real (max |imag| = {imag:.3g})")
        field = RealField(grid, np.real(vals))
    else:
        if args.t is None:
            raise UsageError("--t is required (or --continued --tau)")
        if quantum:
            field = ComplexField(grid, cf.quantum_kernel(spec, x, args.xa, args.t, **_ckw(spec, args)))
        else:
            field = RealField(grid, cf.euclid_kernel(spec, x, args.xa, args.t))
    _emit(write_field_csv(field), args.output, "kernel.csv")
    return 0


def _ckw(spec, args) -> dict:
    return {"caustic_tol": args.caustic_tol} if isinstance(spec, cf.Harmonic) else {}


def _initial_field(args, grid: Grid1D, complex_: bool):
    if args.init:
        f = read_field_csv(args.init)
        if isinstance(f, ComplexField) != complex_:
            raise UsageError("initial field type does not match the engine")
        return f
    if args.x0 is None:
        raise UsageError("give --init FILE or --x0")
    if complex_:
        s = args.width if args.width else 1.0
        x = grid.nodes
        psi = np.exp(-((x - args.x0) ** 2) / (4 * s * s) + 1j * args.k0 * x)
        psi /= math.sqrt(np.trapezoid(np.abs(psi) ** 2, dx=grid.dx))
        return ComplexField(grid, psi)
    return mollified_delta(grid, args.x0, args.width)[0]


def cmd_propagate(args) -> int:
    spec = _load(args.spec)
    engine = args.engine
    grid = _grid(args)
    out_dir = _out_dir(args.output_dir)
    if engine == "lattice":
        if not isinstance(spec, GeneratorSpec):
            raise UsageError("engine 'lattice' needs a generator spec")
        init = _initial_field(args, grid, False)
        n = max(1, round(args.t_final / args.dt))
        slicing = TimeSlicing(0.0, args.t_final, n - 1)
        every = args.snapshot_every or n
        field, done = init, 0
        while done < n:
            m = min(every, n - done)
            field = euclid_propagate(field, spec, TimeSlicing(done * slicing.dt, (done + m) * slicing.dt, m - 1))
            done += m
            if out_dir is not None and done < n:
                write_field_csv(field, out_dir / f"snapshot_{done:07d}.csv")
        report = {"engine": engine, "steps": n, "dt": slicing.dt, "mass": float(np.trapezoid(field.values, dx=grid.dx)),
                  "min_value": float(field.values.min())}
    elif engine == "cn":
        if isinstance(spec, GeneratorSpec):
            try:
                spec = smoluchowski_from_generator(spec)
            except UnsupportedSpecError as exc:
                raise UsageError(str(exc)) from exc
        if not isinstance(spec, SmoluchowskiSpec):
            raise UsageError("engine 'cn' needs a smoluchowski or drift-form generator spec")
        init = _initial_field(args, grid, False)
        solver = CrankNicolsonSolver(init, spec, SolverConfig(args.dt, args.boundary))
        field = solver.advance(args.t_final, args.snapshot_every, out_dir)
        report = {"engine": engine, **solver.report()}
    elif engine == "splitstep":
        if not isinstance(spec, HamiltonianSpec):
            raise UsageError("engine 'splitstep' needs a hamiltonian spec")
        init = _initial_field(args, grid, True)
        n = max(1, round(args.t_final / args.dt))
        field = splitstep_quantum_propagate(init, spec, TimeSlicing(0.0, args.t_final, n - 1), args.order)
        report = {"engine": engine, "steps": n, "norm": float(np.trapezoid(np.abs(field.values) ** 2, dx=grid.dx))}
    else:  # argparse restricts choices
        raise UsageError(f"unknown engine {engine!r}")
    text = write_field_csv(field)
    if out_dir is not None:
        (out_dir / "final.csv").write_text(text)
        (out_dir / "report.json").write_text(json.dumps(report, sort_keys=True) + "\n")
        print(json.dumps(report, sort_keys=True))
    else:
        sys.stdout.write(text)
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return 0


def _langevin_spec(spec) -> LangevinSpec:
    if isinstance(spec, LangevinSpec):
        return spec
    if isinstance(spec, GeneratorSpec) and isinstance(spec.w_form, DriftForm):
        wf = spec.w_form
        if not isinstance(wf.Vprime, Polynomial):
            raise UsageError("drift must be polynomial")
        return LangevinSpec(A=wf.Vprime.scaled(-1.0 / wf.m_gamma), D=spec.D)
    if isinstance(spec, SmoluchowskiSpec) and isinstance(spec.Vprime, Polynomial):
        return LangevinSpec(A=spec.Vprime.scaled(-1.0 / spec.m_gamma), D=spec.D)
    raise UsageError("langevin sampling needs a langevin, smoluchowski or drift-form generator spec")


def cmd_sample(args) -> int:
    spec = _load(args.spec)
    if args.kind == "langevin":
        ls = _langevin_spec(spec)
        ens = simulate_ensemble(ls, args.y0, args.t_final, args.n_steps, args.n_paths, args.seed,
                                record_every=args.record_every)
        rows = [{"step": int(s), "t": float(t), **ens.sample_moments(int(s))}
                for s, t in zip(ens.recorded_steps, ens.times) if s > 0]
        out = {"n_paths": args.n_paths, "n_steps": args.n_steps, "dt": ens.dt, "seed": args.seed, "moments": rows}
        if args.paths_csv:
            ens.to_csv(args.paths_csv)
        _emit(json.dumps(out, sort_keys=True) + "\n", args.output, "langevin.json")
        return 0
    if not isinstance(spec, GeneratorSpec):
        raise UsageError("feynman-kac needs a generator spec")
    if isinstance(spec.w_form, DriftForm):
        raise UsageError("feynman-kac needs a potential-like generator; use the lattice or cn engine")
    est = feynman_kac_estimate(args.xa, args.xb, args.tau, spec, args.n_steps, args.n_samples, args.seed)
    _emit(est.to_json() + "\n", args.output, "feynman_kac.json")
    return 0


def cmd_partition(args) -> int:
    grid = _grid(args)
    exact = cf.harmonic_partition_exact(args.beta_hbar * args.omega)
    if args.method == "closed":
        z = partition_function(args.mu, args.omega, args.beta_hbar, grid)
        out = {"method": "closed", "Z": z, "exact": exact, "error": abs(z - exact)}
    else:
        rows = partition_refinement(args.mu, args.omega, args.beta_hbar, grid, tuple(args.n_slices))
        out = {"method": "lattice", "exact": exact, "Z": rows[-1].Z, "error": rows[-1].error,
               "table": [dataclasses.asdict(r) for r in rows]}
    _emit(json.dumps(out, sort_keys=True) + "\n", args.output, "partition.json")
    return 0


def cmd_verify(args) -> int:
    if args.list:
        print("\n".join(scenario_names()))
        return 0
    names = scenario_names() if args.all else args.scenario
    if not names:
        raise UsageError("give --scenario NAME or --all")
    unknown = [n for n in names if n not in scenario_names()]
    if unknown:
        raise UsageError(f"unknown scenario(s): {', '.join(unknown)}")
    out_dir = _out_dir(args.output_dir)
    reports = [run_scenario(n, output_dir=out_dir) for n in names]
    text = "".join(r.to_json() + "\n" for r in reports)
    _emit(text, args.output, "verify.jsonl")
    return 0 if all(r.passed for r in reports) else 1


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wickbridge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="closed-form kernel over the grid for fixed x_a")
    k.add_argument("--spec", required=True)
    k.add_argument("--xa", type=float, default=0.0)
    k.add_argument("--t", type=float)
    k.add_argument("--continued", action="store_true", help="evaluate a quantum kernel at t = -i tau")
    k.add_argument("--tau", type=float)
    k.add_argument("--caustic-tol", type=float, default=CLI_CAUSTIC_TOL)
    for name in OVERRIDABLE:
        k.add_argument(f"--{name}", type=float)
    k.add_argument("--output")
    _add_grid(k)
    k.set_defaults(func=cmd_kernel)

    pr = sub.add_parser("propagate", help="evolve an initial field")
    pr.add_argument("--spec", required=True)
    pr.add_argument("--engine", choices=("lattice", "cn", "splitstep"), required=True)
    pr.add_argument("--init", help="initial field CSV (x,value or x,re,im)")
    pr.add_argument("--x0", type=float)
    pr.add_argument("--width", type=float)
    pr.add_argument("--k0", type=float, default=0.0)
    pr.add_argument("--t-final", type=float, required=True)
    pr.add_argument("--dt", type=float, default=1e-3)
    pr.add_argument("--boundary", choices=("zero_flux", "dirichlet0"), default="zero_flux")
    pr.add_argument("--order", choices=("first", "strang"), default="strang")
    pr.add_argument("--snapshot-every", type=int)
    pr.add_argument("--output-dir")
    _add_grid(pr)
    pr.set_defaults(func=cmd_propagate)

    s = sub.add_parser("sample", help="Monte Carlo sampling")
    s.add_argument("kind", choices=("langevin", "feynman-kac"))
    s.add_argument("--spec", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--y0", type=float, default=0.0)
    s.add_argument("--t-final", type=float, default=1.0)
    s.add_argument("--n-steps", type=int, default=100)
    s.add_argument("--n-paths", type=int, default=10_000)
    s.add_argument("--record-every", type=int)
    s.add_argument("--paths-csv")
    s.add_argument("--xa", type=float, default=0.0)
    s.add_argument("--xb", type=float, default=0.0)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--n-samples", type=int, default=10_000)
    s.add_argument("--output")
    s.set_defaults(func=cmd_sample)

    z = sub.add_parser("partition", help="harmonic partition function")
    z.add_argument("--mu", type=float, required=True)
    z.add_argument("--omega", type=float, required=True)
    z.add_argument("--beta-hbar", type=float, required=True)
    z.add_argument("--method", choices=("closed", "lattice"), default="closed")
    z.add_argument("--n-slices", type=int, nargs="+", default=[100, 200, 400])
    z.add_argument("--output")
    _add_grid(z, -8.0, 8.0, 801)
    z.set_defaults(func=cmd_partition)

    v = sub.add_parser("verify", help="run verification scenarios")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--scenario", action="append")
    g.add_argument("--all", action="store_true")
    g.add_argument("--list", action="store_true")
    v.add_argument("--output")
    v.add_argument("--output-dir", help="directory for per-scenario JSON and CSV artifacts")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (UsageError, UnsupportedSpecError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WickBridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
