import io
import warnings

import numpy as np
import pytest

from wickbridge.exceptions import DomainError, GridMismatchError
from wickbridge.grid import (
    ComplexField,
    Grid1D,
    RealField,
    Units,
    delta_on_grid,
    expectation,
    integrate,
    l2_norm_sq,
    read_field_csv,
    trapezoid_weights,
    truncation_half_width,
    write_field_csv,
)


def test_grid_nodes_and_spacing():
    g = Grid1D(-1.0, 1.0, 5)
    assert g.dx == 0.5
    np.testing.assert_array_equal(g.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert not g.nodes.flags.writeable


def test_from_spacing_matches_requested_dx():
    g = Grid1D.from_spacing(-8, 8, 0.02)
    assert g.n == 801
    assert g.dx == pytest.approx(0.02)


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 5), (0, np.inf, 5), (0, 1, 2.5)])
def test_grid_rejects_bad_parameters(args):
    with pytest.raises(DomainError):
        Grid1D(*args)


def test_nearest_index_and_out_of_range():
    g = Grid1D(0.0, 1.0, 11)
    assert g.nearest_index(0.34) == 3
    with pytest.raises(DomainError):
        g.nearest_index(1.5)


def test_field_values_are_read_only_and_checked():
    g = Grid1D(0, 1, 3)
    f = RealField(g, [1, 2, 3])
    with pytest.raises(ValueError):
        f.values[0] = 5
    with pytest.raises(GridMismatchError):
        RealField(g, [1, 2])
    with pytest.raises(DomainError):
        RealField(g, [1, np.nan, 3])


def test_field_arithmetic_needs_same_grid():
    a = RealField(Grid1D(0, 1, 3), [1, 1, 1])
    b = RealField(Grid1D(0, 2, 3), [1, 1, 1])
    np.testing.assert_array_equal((a + a).values, [2, 2, 2])
    np.testing.assert_array_equal((2 * a).values, [2, 2, 2])
    with pytest.raises(GridMismatchError):
        a + b


def test_integrate_gaussian(grid):
    f = RealField.from_function(grid, lambda x: np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))
    assert integrate(f) == pytest.approx(1.0, abs=1e-12)


def test_trapezoid_weights_sum_to_length(grid):
    assert trapezoid_weights(grid).sum() == pytest.approx(grid.length)


def test_l2_norm_of_complex_field(grid):
    psi = ComplexField.from_function(grid, lambda x: (2 * np.pi) ** -0.25 * np.exp(-x**2 / 4 + 2j * x))
    assert l2_norm_sq(psi) == pytest.approx(1.0, abs=1e-12)


def test_expectation_warns_for_unnormalized(grid):
    f = RealField.from_function(grid, lambda x: 2 * np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))
    with pytest.warns(UserWarning, match="not normalized"):
        m = expectation(f, lambda x: x**2)
    assert m == pytest.approx(2.0, rel=1e-10)
    g = RealField.from_function(grid, lambda x: np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert expectation(g, lambda x: x**2) == pytest.approx(1.0, rel=1e-10)


def test_delta_on_grid_is_unit_spike():
    g = Grid1D(-1, 1, 21)
    d = delta_on_grid(g, 0.33)
    assert d.values.max() == pytest.approx(1 / g.dx)
    assert np.count_nonzero(d.values) == 1
    assert integrate(d) == pytest.approx(1.0)


def test_truncation_half_width():
    assert truncation_half_width(-1.0, 0.5) == 5.0
    with pytest.raises(DomainError):
        truncation_half_width(0.0, 0.0)


def test_units_positive():
    with pytest.raises(DomainError):
        Units(hbar=0.0)


@pytest.mark.parametrize("complex_", [False, True])
def test_csv_round_trip(complex_, tmp_path):
    g = Grid1D(-1, 1, 7)
    vals = np.linspace(0, 1, 7) * (1 + 0.5j if complex_ else 1)
    f = (ComplexField if complex_ else RealField)(g, vals)
    path = tmp_path / "f.csv"
    text = write_field_csv(f, path)
    assert text.splitlines()[0] == ("x,re,im" if complex_ else "x,value")
    back = read_field_csv(path)
    assert type(back) is type(f)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)
    back2 = read_field_csv(io.StringIO(text))
    np.testing.assert_array_equal(back2.values, f.values)
