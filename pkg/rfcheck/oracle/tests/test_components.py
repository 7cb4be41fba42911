import math

import numpy as np
import pytest

from rfcheck.errors import ConfigurationError
from rfcheck.oracle.components import (
    ConstantComponent,
    LinearComponent,
    PiecewiseLinearComponent,
    PolynomialComponent,
    SineComponent,
    component_from_dict,
)
from rfcheck.oracle.quadrature import adaptive_simpson


class Test_adaptive_simpson:
    def test_sine(self):
        value, error = adaptive_simpson(math.sin, 0.0, math.pi)
        assert value == pytest.approx(2.0, abs=1e-9)
        assert error < 1e-8

    def test_reversed_bounds(self):
        value, _ = adaptive_simpson(lambda x: x**2, 1.0, 0.0)
        assert value == pytest.approx(-1 / 3, abs=1e-12)

    def test_empty_interval(self):
        assert adaptive_simpson(math.exp, 0.3, 0.3) == (0.0, 0.0)

    def test_cubic_is_exact(self):
        value, _ = adaptive_simpson(lambda x: 4 * x**3 - x, 0.0, 2.0)
        assert value == pytest.approx(14.0, abs=1e-12)


@pytest.mark.parametrize(
    ["settings", "expected"],
    [
        pytest.param({"name": "constant", "value": 2}, ConstantComponent(2.0), id="constant"),
        pytest.param({"name": "linear", "slope": 10}, LinearComponent(10.0), id="linear"),
        pytest.param(
            {"name": "polynomial", "coefficients": [0, 0, 10]},
            PolynomialComponent((0.0, 0.0, 10.0)),
            id="polynomial",
        ),
        pytest.param(
            {"name": "sine", "amplitude": 2, "frequency": 0.5},
            SineComponent(amplitude=2, frequency=0.5),
            id="sine",
        ),
    ],
)
def test_component_from_dict(settings, expected):
    component = component_from_dict(settings)
    assert component == expected
    assert component_from_dict(component.to_dict()) == expected


@pytest.mark.parametrize(
    "settings",
    [
        pytest.param({"name": "spline"}, id="unknown_name"),
        pytest.param({"slope": 1}, id="missing_name"),
        pytest.param({"name": "linear", "gradient": 1}, id="unknown_parameter"),
        pytest.param({"name": "polynomial", "coefficients": [1] * 6}, id="degree_five"),
        pytest.param({"name": "sine", "frequency": 0}, id="zero_frequency"),
        pytest.param(
            {"name": "piecewise_linear", "knots": [0, 0.5], "values": [0, 1]},
            id="knots_stop_short",
        ),
        pytest.param(
            {"name": "piecewise_linear", "knots": [0, 0.6, 0.4, 1], "values": [0, 1, 1, 0]},
            id="knots_unordered",
        ),
    ],
)
def test_component_from_dict_errors(settings):
    with pytest.raises(ConfigurationError):
        component_from_dict(settings)


def test_polynomial_integral_and_square():
    component = PolynomialComponent((1.0, 0.0, 3.0))
    assert component.integral(0.0, 1.0) == pytest.approx(2.0)
    # (1 + 3x^2)^2 = 1 + 6x^2 + 9x^4
    assert component.square_integral(0.0, 1.0) == pytest.approx(1 + 2 + 9 / 5)


def test_polynomial_integral_on_arrays():
    component = LinearComponent(slope=2.0)
    np.testing.assert_allclose(component.integral(0.0, np.array([0.5, 1.0])), [0.25, 1.0])


@pytest.mark.parametrize(
    ["component", "interval", "expected"],
    [
        pytest.param(LinearComponent(-2.0), (0.25, 0.75), (-1.5, -0.5), id="decreasing_line"),
        pytest.param(
            PolynomialComponent((0.25, -1.0, 1.0)), (0.0, 1.0), (0.0, 0.25), id="parabola"
        ),
        pytest.param(
            PolynomialComponent((0.25, -1.0, 1.0)), (0.6, 0.9), (0.01, 0.16), id="parabola_side"
        ),
        pytest.param(ConstantComponent(3.0), (0.1, 0.2), (3.0, 3.0), id="constant"),
        pytest.param(SineComponent(), (0.0, 1.0), (-1.0, 1.0), id="sine_period"),
        pytest.param(SineComponent(), (0.0, 0.2), (0.0, math.sin(0.4 * math.pi)), id="sine_rising"),
        pytest.param(
            PiecewiseLinearComponent((0.0, 0.5, 1.0), (0.0, 1.0, 0.0)),
            (0.25, 0.9),
            (0.2, 1.0),
            id="tent",
        ),
    ],
)
def test_extrema(component, interval, expected):
    low, high = component.extrema(*interval)
    assert low == pytest.approx(expected[0], abs=1e-9)
    assert high == pytest.approx(expected[1], abs=1e-9)


def test_sine_integrals():
    component = SineComponent(amplitude=1.0, frequency=1.0)
    assert component.integral(0.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert component.integral(0.0, 0.5) == pytest.approx(1 / math.pi, abs=1e-12)
    assert component.square_integral(0.0, 1.0) == pytest.approx(0.5, abs=1e-9)


def test_piecewise_linear_integrals():
    tent = PiecewiseLinearComponent((0.0, 0.5, 1.0), (0.0, 1.0, 0.0))
    assert tent.integral(0.0, 1.0) == pytest.approx(0.5)
    assert tent.integral(0.0, 0.25) == pytest.approx(0.0625)
    assert tent.integral(0.25, 0.75) == pytest.approx(0.375)
    # twice the integral of (2x)^2 over [0, 0.5]
    assert tent.square_integral(0.0, 1.0) == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    ["component", "expected"],
    [
        pytest.param(ConstantComponent(1.0), True, id="constant"),
        pytest.param(PolynomialComponent((2.0, 0.0)), True, id="flat_polynomial"),
        pytest.param(LinearComponent(0.5), False, id="linear"),
        pytest.param(SineComponent(amplitude=0.0), True, id="zero_amplitude"),
        pytest.param(
            PiecewiseLinearComponent((0.0, 1.0), (4.0, 4.0)), True, id="flat_piecewise"
        ),
    ],
)
def test_is_constant(component, expected):
    assert component.is_constant is expected
