"""Uniform 1-D grids, real and complex fields, trapezoid quadrature, and CSV I/O."""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .exceptions import DomainError, GridMismatchError

__all__ = [
    "Grid1D",
    "RealField",
    "ComplexField",
    "Units",
    "integrate",
    "l2_norm_sq",
    "expectation",
    "delta_on_grid",
    "truncation_half_width",
    "trapezoid_weights",
    "write_field_csv",
    "read_field_csv",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with nodes ``x_i = x_min + i * dx`` for ``i = 0..n-1``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"grid needs at least 2 nodes, got n={self.n}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise DomainError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise DomainError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        """Grid on ``[x_min, x_max]`` whose spacing is ``dx`` (rounded to fit the interval)."""
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, x_max, n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        x = self.x_min + np.arange(self.n) * self.dx
        x.flags.writeable = False
        return x

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max

    def nearest_index(self, x0: float) -> int:
        if not self.contains(x0):
            raise DomainError(f"x0={x0} outside grid [{self.x_min}, {self.x_max}]")
        return int(np.clip(np.rint((x0 - self.x_min) / self.dx), 0, self.n - 1))


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RealField:
    """Real node values on a grid, typically a probability density."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values, float)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @classmethod
    def from_function(cls, grid: Grid1D, f: Callable[[np.ndarray], np.ndarray]) -> "RealField":
        return cls(grid, np.broadcast_to(f(grid.nodes), (grid.n,)))

    def with_values(self, values) -> "RealField":
        return RealField(self.grid, values)

    def __add__(self, other: "RealField") -> "RealField":
        _check_same_grid(self.grid, other.grid)
        return RealField(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> "RealField":
        return RealField(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex node values on a grid, typically a wavefunction."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values, complex)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @classmethod
    def from_function(cls, grid: Grid1D, f: Callable[[np.ndarray], np.ndarray]) -> "ComplexField":
        return cls(grid, np.broadcast_to(f(grid.nodes), (grid.n,)))

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)

    def __mul__(self, c: complex) -> "ComplexField":
        return ComplexField(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    mass: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "k_B"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")


def _check_same_grid(a: Grid1D, b: Grid1D) -> None:
    if a != b:
        raise GridMismatchError(f"grids differ: {a} vs {b}")


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def integrate(field: RealField) -> float:
    """Trapezoid-rule integral of the field over its grid."""
    return float(np.trapezoid(field.values, dx=field.grid.dx))


def l2_norm_sq(field: ComplexField) -> float:
    """Trapezoid-rule integral of ``|psi|^2``."""
    return float(np.trapezoid(np.abs(field.values) ** 2, dx=field.grid.dx))


def expectation(field: RealField, observable: Callable[[np.ndarray], np.ndarray]) -> float:
    """Quadrature of ``f(x) * P(x)``.

    The density is expected to be normalized; a warning is emitted (and nothing is
    rescaled) when its mass differs from 1 by more than 1e-6.
    """
    mass = integrate(field)
    if abs(mass - 1.0) > 1e-6:
        warnings.warn(f"expectation of a field with mass {mass!r} (not normalized)", stacklevel=2)
    f = np.broadcast_to(observable(field.x), (field.grid.n,))
    return float(np.trapezoid(f * field.values, dx=field.grid.dx))


def delta_on_grid(grid: Grid1D, x0: float) -> RealField:
    """Single-node spike of height ``1/dx`` at the node nearest ``x0``.

    Integrates to exactly 1 when that node is interior (0.5 at an end node).
    """
    i = grid.nearest_index(x0)
    v = np.zeros(grid.n)
    v[i] = 1.0 / grid.dx
    return RealField(grid, v)


def truncation_half_width(mean: float, std: float) -> float:
    """Half-width ``|mean| + 8 std`` that keeps a Gaussian's edge density below 1e-12 of its peak."""
    if std <= 0:
        raise DomainError("std must be positive")
    return abs(mean) + 8.0 * std


# --- CSV ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_field_csv(field: RealField | ComplexField, dest=None) -> str:
    """Write ``x,value`` (real) or ``x,re,im`` (complex) rows; returns the CSV text.

    ``dest`` may be a path, an open text file, or None (text only).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(field, ComplexField):
        w.writerow(["x", "re", "im"])
        for x, v in zip(field.x, field.values):
            w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])
    else:
        w.writerow(["x", "value"])
        for x, v in zip(field.x, field.values):
            w.writerow([_fmt(x), _fmt(v)])
    text = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    elif dest is not None:
        dest.write(text)
    return text


def read_field_csv(src) -> RealField | ComplexField:
    """Inverse of :func:`write_field_csv`; the grid is rebuilt from the first and last x."""
    if hasattr(src, "read"):
        text = src.read()
    elif isinstance(src, str) and "\n" in src:
        text = src
    else:
        text = Path(src).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    data = np.array(body, dtype=float)
    grid = Grid1D(data[0, 0], data[-1, 0], len(data))
    if header == ["x", "value"]:
        return RealField(grid, data[:, 1])
    if header == ["x", "re", "im"]:
        return ComplexField(grid, data[:, 1] + 1j * data[:, 2])
    raise ValueError(f"unrecognized field CSV header {header}")
