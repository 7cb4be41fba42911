"""
Catalog of univariate component functions m_j on [0, 1].

Every component evaluates on arrays and provides its antiderivative (so
interval means are exact), the integral of its square, and its extrema
over an interval. Polynomial and piecewise-linear components do all three
analytically. The sine component integrates its square by adaptive Simpson
quadrature and locates its extrema on a dense grid refined by bounded
scalar optimization.
"""

import abc
import dataclasses
import math
from typing import ClassVar, Dict, Tuple, Type

import numpy as np
from numpy.polynomial import Polynomial

from rfcheck.errors import ConfigurationError
from rfcheck.oracle.quadrature import adaptive_simpson

"""Grid size for numerical extrema search"""
extrema_grid_size: int = 10_000


class Component(abc.ABC):
    name: ClassVar[str]

    @abc.abstractmethod
    def __call__(self, x):
        """Evaluate the component at a scalar or array x."""

    @abc.abstractmethod
    def antiderivative(self, x):
        """An antiderivative F with F(0) = 0, evaluated at a scalar or array x."""

    @abc.abstractmethod
    def square_integral(self, a: float, b: float) -> float:
        """Integral of m(x)^2 over [a, b]"""

    @abc.abstractmethod
    def extrema(self, a: float, b: float) -> Tuple[float, float]:
        """(min, max) of m over [a, b]"""

    @abc.abstractmethod
    def to_dict(self) -> dict:
        """Parameters, with the catalog name under "name"."""

    @property
    def is_constant(self) -> bool:
        return False

    def integral(self, a, b):
        """Integral of m over [a, b]; a and b may be arrays."""
        return self.antiderivative(b) - self.antiderivative(a)

    def range(self, a: float, b: float) -> float:
        low, high = self.extrema(a, b)
        return high - low


@dataclasses.dataclass(frozen=True)
class PolynomialComponent(Component):
    """m(x) = c0 + c1 x + ... + c4 x^4"""

    name: ClassVar[str] = "polynomial"
    coefficients: Tuple[float, ...]
    max_degree: ClassVar[int] = 4

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if not 1 <= len(coefficients) <= self.max_degree + 1:
            raise ConfigurationError(
                f"{self.name} takes 1 to {self.max_degree + 1} coefficients, "
                f"received {len(coefficients)}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coefficients)

    @property
    def is_constant(self) -> bool:
        return not any(self.coefficients[1:])

    def __call__(self, x):
        return self.polynomial(x)

    def antiderivative(self, x):
        return self.polynomial.integ()(x)

    def square_integral(self, a: float, b: float) -> float:
        primitive = (self.polynomial**2).integ()
        return float(primitive(b) - primitive(a))

    def extrema(self, a: float, b: float) -> Tuple[float, float]:
        candidates = [a, b]
        derivative = self.polynomial.deriv()
        if derivative.degree() >= 1 and any(derivative.coef):
            for root in derivative.roots():
                if abs(root.imag) < 1e-12 and a < root.real < b:
                    candidates.append(root.real)
        values = self.polynomial(np.asarray(candidates))
        return float(values.min()), float(values.max())

    def to_dict(self) -> dict:
        return {"name": self.name, "coefficients": list(self.coefficients)}


class ConstantComponent(PolynomialComponent):
    """m(x) = value"""

    name: ClassVar[str] = "constant"

    def __init__(self, value: float = 0.0):
        super().__init__(coefficients=(value,))

    @property
    def value(self) -> float:
        return self.coefficients[0]

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value}


class LinearComponent(PolynomialComponent):
    """m(x) = slope x + intercept"""

    name: ClassVar[str] = "linear"

    def __init__(self, slope: float = 1.0, intercept: float = 0.0):
        super().__init__(coefficients=(intercept, slope))

    def to_dict(self) -> dict:
        intercept, slope = self.coefficients
        return {"name": self.name, "slope": slope, "intercept": intercept}


@dataclasses.dataclass(frozen=True)
class SineComponent(Component):
    """m(x) = amplitude * sin(2 pi frequency x + phase)"""

    name: ClassVar[str] = "sine"
    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.frequency <= 0:
            raise ConfigurationError(f"sine frequency must be positive: {self.frequency}")

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0

    @property
    def _omega(self) -> float:
        return 2 * math.pi * self.frequency

    def __call__(self, x):
        return self.amplitude * np.sin(self._omega * np.asarray(x, dtype=float) + self.phase)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        scale = self.amplitude / self._omega
        return scale * (math.cos(self.phase) - np.cos(self._omega * x + self.phase))

    def square_integral(self, a: float, b: float) -> float:
        value, _ = adaptive_simpson(lambda x: float(self(x)) ** 2, a, b, tol=1e-10)
        return value

    def extrema(self, a: float, b: float) -> Tuple[float, float]:
        from scipy.optimize import minimize_scalar

        grid = np.linspace(a, b, extrema_grid_size)
        values = self(grid)
        step = grid[1] - grid[0]
        found = []
        for sign, index in ((1.0, int(np.argmin(values))), (-1.0, int(np.argmax(values)))):
            low = max(a, grid[index] - step)
            high = min(b, grid[index] + step)
            result = minimize_scalar(
                lambda x, sign=sign: sign * float(self(x)),
                bounds=(low, high),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = min(sign * values[index], result.fun)
            found.append(sign * best)
        return float(found[0]), float(found[1])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self.phase,
        }


@dataclasses.dataclass(frozen=True)
class PiecewiseLinearComponent(Component):
    """
    Continuous piecewise-linear interpolation of `values` at increasing
    `knots`, with the first knot at 0 and the last at 1.
    """

    name: ClassVar[str] = "piecewise_linear"
    knots: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        if len(knots) < 2 or len(knots) != len(values):
            raise ConfigurationError(
                "piecewise_linear needs at least two knots and one value per knot"
            )
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ConfigurationError("piecewise_linear knots must start at 0 and end at 1")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ConfigurationError("piecewise_linear knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @property
    def is_constant(self) -> bool:
        return len(set(self.values)) == 1

    def _pieces(self):
        """Yield (start, stop, polynomial) per segment."""
        for (x0, y0), (x1, y1) in zip(
            zip(self.knots, self.values), zip(self.knots[1:], self.values[1:])
        ):
            slope = (y1 - y0) / (x1 - x0)
            yield x0, x1, Polynomial([y0 - slope * x0, slope])

    def __call__(self, x):
        return np.interp(x, self.knots, self.values)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        knots = np.asarray(self.knots)
        values = np.asarray(self.values)
        areas = np.diff(knots) * (values[:-1] + values[1:]) / 2
        cumulative = np.concatenate([[0.0], np.cumsum(areas)])
        segment = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(knots) - 2)
        start = knots[segment]
        partial = (x - start) * (values[segment] + self(x)) / 2
        return cumulative[segment] + partial

    def square_integral(self, a: float, b: float) -> float:
        total = 0.0
        for x0, x1, piece in self._pieces():
            low, high = max(a, x0), min(b, x1)
            if low < high:
                primitive = (piece**2).integ()
                total += primitive(high) - primitive(low)
        return float(total)

    def extrema(self, a: float, b: float) -> Tuple[float, float]:
        inner = [k for k in self.knots if a < k < b]
        values = self(np.asarray([a, b] + inner))
        return float(values.min()), float(values.max())

    def to_dict(self) -> dict:
        return {"name": self.name, "knots": list(self.knots), "values": list(self.values)}


catalog: Dict[str, Type[Component]] = {
    cls.name: cls
    for cls in (
        ConstantComponent,
        LinearComponent,
        PolynomialComponent,
        SineComponent,
        PiecewiseLinearComponent,
    )
}


def component_from_dict(settings: dict) -> Component:
    """
    Build a component from a mapping such as {"name": "linear", "slope": 10}.
    """
    settings = dict(settings)
    name = settings.pop("name", None)
    if name not in catalog:
        raise ConfigurationError(
            f"unknown component {name!r}; the catalog has {', '.join(sorted(catalog))}"
        )
    try:
        return catalog[name](**settings)
    except TypeError as error:
        raise ConfigurationError(f"bad parameters for component {name!r}: {error}") from None
