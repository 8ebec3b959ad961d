"""Euler-Maruyama path ensembles and a bridge-sampled Feynman-Kac kernel estimator.

Every random draw comes from a numpy ``Generator`` seeded through
``SeedSequence(seed, spawn_key=(i,))``, so path ``i`` sees the same noise no
matter how the ensemble is chunked.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import closed_form as cf
from .exceptions import DomainError, UnsupportedSpecError
from .grid import Grid1D, RealField
from .wick import DriftForm, GeneratorSpec, Polynomial, evaluate

__all__ = [
    "LangevinSpec",
    "PathEnsemble",
    "FKEstimate",
    "EmpiricalDensity",
    "path_rng",
    "euler_maruyama_step",
    "simulate_ensemble",
    "empirical_pdf",
    "sample_brownian_bridge",
    "feynman_kac_estimate",
    "fk_bias_bound",
]

CHUNK = 4096


@dataclass(frozen=True)
class LangevinSpec:
    """``dy = A(y, t) dt + B(y, t) dW`` with noise strength ``<xi xi> = 2 D delta``."""

    A: Callable = field(default_factory=Polynomial)
    B: Callable = field(default_factory=lambda: Polynomial((1.0,)))
    D: float = 1.0

    def __post_init__(self):
        if not self.D > 0:
            raise DomainError("D must be > 0")

    @classmethod
    def ornstein_uhlenbeck(cls, D: float, eta: float) -> "LangevinSpec":
        return cls(A=Polynomial((0.0, -eta)), D=D)

    @classmethod
    def drifted(cls, D: float, v: float) -> "LangevinSpec":
        return cls(A=Polynomial((v,)), D=D)


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index``; a pure function of ``(seed, index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def euler_maruyama_step(y, t: float, dt: float, spec: LangevinSpec, xi):
    """``y + A(y, t) dt + B(y, t) sqrt(2 D dt) xi``."""
    if not dt > 0:
        raise DomainError("dt must be > 0")
    y = np.asarray(y, dtype=float)
    return y + spec.A(y, t) * dt + spec.B(y, t) * math.sqrt(2.0 * spec.D * dt) * np.asarray(xi)


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Trajectories sampled at ``recorded_steps``; ``positions[i, j]`` is path i at step ``recorded_steps[j]``."""

    n_paths: int
    n_steps: int
    dt: float
    positions: np.ndarray
    seed: int
    recorded_steps: np.ndarray
    t0: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.recorded_steps * self.dt

    def column(self, step_index: int) -> int:
        hits = np.flatnonzero(self.recorded_steps == step_index)
        if hits.size == 0:
            raise DomainError(f"step {step_index} was not recorded")
        return int(hits[0])

    def at_step(self, step_index: int) -> np.ndarray:
        return self.positions[:, self.column(step_index)]

    def sample_moments(self, step_index: int) -> dict:
        """Mean and variance at one step, with their standard errors."""
        y = self.at_step(step_index)
        n = y.size
        mean = float(y.mean())
        var = float(y.var(ddof=1))
        m4 = float(np.mean((y - mean) ** 4))
        return {
            "mean": mean,
            "mean_se": math.sqrt(var / n),
            "variance": var,
            "variance_se": math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n),
        }

    def to_csv(self, dest=None) -> str:
        """Rows ``path_id,step,x``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path_id", "step", "x"])
        for i in range(self.n_paths):
            for j, s in enumerate(self.recorded_steps):
                w.writerow([i, int(s), format(float(self.positions[i, j]), ".17g")])
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w") as fh:
                fh.write(text)
        return text


def _resolve_steps(n_steps: int, record_every: int | None, record_steps) -> np.ndarray:
    if record_steps is not None:
        steps = np.unique(np.asarray(record_steps, dtype=int))
        if steps.size == 0 or steps[0] < 0 or steps[-1] > n_steps:
            raise DomainError("record_steps must lie in [0, n_steps]")
        return steps
    every = 1 if record_every is None else int(record_every)
    if every < 1:
        raise DomainError("record_every must be >= 1")
    steps = np.arange(0, n_steps + 1, every)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return steps


def simulate_ensemble(
    spec: LangevinSpec,
    y0: float,
    t_final: float,
    n_steps: int,
    n_paths: int,
    seed: int,
    *,
    record_every: int | None = None,
    record_steps=None,
    t0: float = 0.0,
    chunk_size: int = CHUNK,
) -> PathEnsemble:
    """Euler-Maruyama ensemble from a common start ``y0``.

    Only the steps in ``record_steps`` (or every ``record_every``-th step, plus the
    last) are stored; the default keeps all of them.
    """
    if not (t_final > 0 and n_steps >= 1 and n_paths >= 1):
        raise DomainError("t_final, n_steps and n_paths must be positive")
    dt = t_final / n_steps
    steps = _resolve_steps(n_steps, record_every, record_steps)
    slot = {int(s): j for j, s in enumerate(steps)}
    out = np.empty((n_paths, steps.size))
    for lo in range(0, n_paths, chunk_size):
        hi = min(lo + chunk_size, n_paths)
        xi = np.stack([path_rng(seed, i).standard_normal(n_steps) for i in range(lo, hi)])
        y = np.full(hi - lo, float(y0))
        if 0 in slot:
            out[lo:hi, slot[0]] = y
        for k in range(n_steps):
            y = euler_maruyama_step(y, t0 + k * dt, dt, spec, xi[:, k])
            j = slot.get(k + 1)
            if j is not None:
                out[lo:hi, j] = y
    out.flags.writeable = False
    return PathEnsemble(n_paths, n_steps, dt, out, seed, steps, t0)


@dataclass(frozen=True, eq=False)
class EmpiricalDensity(RealField):
    """Histogram density plus coverage metadata."""

    off_grid_fraction: float = 0.0
    coverage_warning: str | None = None


def empirical_pdf(ensemble: PathEnsemble, grid: Grid1D, step_index: int) -> EmpiricalDensity:
    """Counts per node-centred bin divided by ``n_paths * dx``; off-grid samples are dropped."""
    y = ensemble.at_step(step_index)
    dx = grid.dx
    idx = np.rint((y - grid.x_min) / dx)
    inside = (idx >= 0) & (idx <= grid.n - 1)
    counts = np.bincount(idx[inside].astype(int), minlength=grid.n)
    off = 1.0 - inside.sum() / y.size
    warn = None
    if off > 0.01:
        warn = f"{100 * off:.2f}% of samples fall outside [{grid.x_min}, {grid.x_max}]"
    return EmpiricalDensity(grid, counts / (y.size * dx), float(off), warn)


def sample_brownian_bridge(x_a: float, x_b: float, tau: float, n_steps: int, D: float, rng, size: int | None = None):
    """Discrete Brownian bridge ``x_0 = x_a, ..., x_N = x_b`` with exact marginals.

    Returns an array of length ``n_steps + 1`` (or ``(size, n_steps + 1)``).
    """
    if not tau > 0 or n_steps < 1:
        raise DomainError("need tau > 0 and n_steps >= 1")
    if D < 0:
        raise DomainError("D must be >= 0")
    shape = (1 if size is None else size, n_steps + 1)
    path = np.empty(shape)
    path[:, 0] = x_a
    path[:, -1] = x_b
    dt = tau / n_steps
    x = np.full(shape[0], float(x_a))
    for k in range(1, n_steps):
        rem = tau - k * dt  # time left after the new node
        mean = x + (x_b - x) * dt / (rem + dt)
        sd = math.sqrt(2.0 * D * dt * rem / (rem + dt))
        x = mean + sd * rng.standard_normal(shape[0]) if sd > 0 else mean
        path[:, k] = x
    return path[0] if size is None else path


@dataclass(frozen=True)
class FKEstimate:
    value: float
    std_err: float
    n_samples: int
    n_steps: int = 0
    seed: int | None = None
    bias_bound: float = 0.0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_err": self.std_err,
            "n_samples": self.n_samples,
            "n_steps": self.n_steps,
            "seed": self.seed,
            "bias_bound": self.bias_bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def fk_bias_bound(W, x_a: float, x_b: float, tau: float, n_steps: int, kernel_value: float) -> float:
    """Leading post-point bias ``dt (|W(x_a)| + |W(x_b)|) / 2 * K``."""
    dt = tau / n_steps
    return dt * 0.5 * (abs(float(W(x_a))) + abs(float(W(x_b)))) * abs(kernel_value)


def feynman_kac_estimate(
    x_a: float,
    x_b: float,
    tau: float,
    g: GeneratorSpec,
    n_steps: int,
    n_samples: int,
    seed: int,
    chunk_size: int = 8192,
) -> FKEstimate:
    """Free kernel times the bridge average of ``exp(-dt * sum_{n=1}^{N+1} W(x_n))``.

    ``n_steps`` is the number of time slices; the start point carries no weight
    and the end point ``x_b`` does.
    """
    if isinstance(g.w_form, DriftForm):
        raise UnsupportedSpecError("Feynman-Kac estimation needs a potential-like generator")
    if not (tau > 0 and n_steps >= 1 and n_samples >= 1):
        raise DomainError("tau, n_steps and n_samples must be positive")
    W = g.w_form.W
    D = g.D
    dt = tau / n_steps
    times = dt * np.arange(1, n_steps + 1)
    free = float(cf.brown_kernel(D, x_b, x_a, tau))
    rng = np.random.default_rng(seed)
    weights = np.empty(n_samples)
    for lo in range(0, n_samples, chunk_size):
        hi = min(lo + chunk_size, n_samples)
        paths = sample_brownian_bridge(x_a, x_b, tau, n_steps, D, rng, size=hi - lo)[:, 1:]
        if g.time_dependent:
            wv = np.stack([evaluate(W, paths[:, k], times[k], True) for k in range(n_steps)], axis=1)
        else:
            wv = evaluate(W, paths)
        weights[lo:hi] = np.exp(-dt * wv.sum(axis=1))
    mean = float(weights.mean())
    sd = float(weights.std(ddof=1)) if n_samples > 1 else 0.0
    value = free * mean
    if g.time_dependent:
        bias = dt * 0.5 * (abs(float(evaluate(W, x_a, 0.0, True))) + abs(float(evaluate(W, x_b, tau, True)))) * value
    else:
        bias = fk_bias_bound(W, x_a, x_b, tau, n_steps, value)
    return FKEstimate(value, free * sd / math.sqrt(n_samples), n_samples, n_steps, seed, bias)
