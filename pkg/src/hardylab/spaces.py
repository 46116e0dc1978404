"""Model spaces, balls and weighted measures.

The geometries are the classical half-line, the upper half-space, the
exterior of the unit ball, the punctured space carrying an inverse-square
potential, and the Bessel half-line restricted to (1, oo).  Every geometry
except the half-space is handled in a single radial coordinate: points are
radii, balls are intervals clipped to the domain, and reference measures
are monomial densities in the radius (times the unit-sphere area where the
model comes from R^n).  The half-space keeps its product structure; its
ball masses reduce to one-dimensional integrals over the normal coordinate
with the cross-section volume under the integral, so no quadrature in this
module ever has dimension above one.

Weighted measures carry either a monomial density (closed-form ball
masses), an arbitrary callable density (adaptive quadrature), or a power
of the normal coordinate on the half-space (reduced quadrature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DivergentIntegral, NonFiniteMass, OutsideDomain
from .quadrature import adaptive

__all__ = [
    "Ball", "Monomial", "NormalPower", "ModelSpace", "WeightedMeasure",
    "ball_mass", "doubling_constant", "distance_to_boundary", "sphere_area",
]


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class Ball:
    """Metric ball B(center, radius); on radial models the center is a radius."""

    center: Union[float, tuple]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def interval(self) -> tuple[float, float]:
        """Unclipped (center - r, center + r); radial models only."""
        c = float(self.center)
        return c - self.radius, c + self.radius

    def to_json(self) -> dict:
        c = self.center
        return {"center": list(c) if isinstance(c, (tuple, list)) else float(c),
                "radius": float(self.radius)}

    @classmethod
    def from_json(cls, obj: dict) -> "Ball":
        c = obj["center"]
        return cls(tuple(c) if isinstance(c, list) else float(c), float(obj["radius"]))


@dataclass(frozen=True)
class Monomial:
    """Density coeff * x**power on (0, oo)."""

    coeff: float
    power: float

    def __call__(self, x):
        return self.coeff * np.asarray(x, dtype=float) ** self.power

    def integral(self, a: float, b: float) -> float:
        """Int_a^b coeff x^power dx in closed form; a >= 0 required."""
        if b <= a:
            return 0.0
        if a < 0:
            raise ValueError("monomial integrals are defined on the positive axis")
        p1 = self.power + 1.0
        if a == 0.0 and p1 <= 0.0:
            raise DivergentIntegral(
                f"x^{self.power} is not integrable at 0")
        if abs(p1) < 1e-14:
            return self.coeff * math.log(b / a)
        return self.coeff * (b ** p1 - a ** p1) / p1

    def scaled(self, factor: float) -> "Monomial":
        return Monomial(self.coeff * factor, self.power)

    def times(self, other: "Monomial") -> "Monomial":
        return Monomial(self.coeff * other.coeff, self.power + other.power)

    def pow(self, q: float) -> "Monomial":
        return Monomial(self.coeff ** q, self.power * q)


@dataclass(frozen=True)
class NormalPower:
    """Half-space density x_n**q (q >= 0)."""

    q: float


_RADIAL_KINDS = {"half_line", "exterior_ball", "inverse_square", "exterior_bessel"}


class ModelSpace:
    """One of the model geometries, identified by kind plus parameters.

    Kinds and parameters
    --------------------
    half_line        alpha >= 0, boundary in {dirichlet, neumann};
                     domain (0, oo), reference measure x^alpha dx
    half_space       n >= 2; domain R^{n-1} x (0, oo), Lebesgue measure
    exterior_ball    n >= 2; radial domain (1, oo), measure omega_{n-1} r^{n-1} dr
    inverse_square   n >= 3, gamma > 0; radial domain (0, oo),
                     measure omega_{n-1} r^{n-1} dr
    exterior_bessel  alpha > -1, alpha != 1; domain (1, oo), measure x^alpha dx
    """

    def __init__(self, kind: str, **params):
        self.kind = kind
        self.params = params
        if kind == "half_line":
            alpha = params.setdefault("alpha", 0.0)
            params.setdefault("boundary", "dirichlet")
            if alpha < 0:
                raise ValueError("half_line needs alpha >= 0")
            if params["boundary"] not in ("dirichlet", "neumann"):
                raise ValueError("boundary must be dirichlet or neumann")
        elif kind == "half_space":
            if params.get("n", 0) < 2:
                raise ValueError("half_space needs n >= 2")
        elif kind == "exterior_ball":
            if params.get("n", 0) < 2:
                raise ValueError("exterior_ball needs n >= 2")
        elif kind == "inverse_square":
            if params.get("n", 0) < 3:
                raise ValueError("inverse_square needs n >= 3")
            if not params.get("gamma", 0.0) > 0:
                raise ValueError("inverse_square needs gamma > 0")
        elif kind == "exterior_bessel":
            alpha = params.get("alpha")
            if alpha is None or alpha <= -1 or alpha == 1:
                raise ValueError("exterior_bessel needs alpha > -1, alpha != 1")
        else:
            raise ValueError(f"unknown model space kind: {kind}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def half_line(cls, alpha: float = 0.0, boundary: str = "dirichlet") -> "ModelSpace":
        return cls("half_line", alpha=float(alpha), boundary=boundary)

    @classmethod
    def half_space(cls, n: int) -> "ModelSpace":
        return cls("half_space", n=int(n))

    @classmethod
    def exterior_ball(cls, n: int) -> "ModelSpace":
        return cls("exterior_ball", n=int(n))

    @classmethod
    def inverse_square(cls, n: int, gamma: float) -> "ModelSpace":
        return cls("inverse_square", n=int(n), gamma=float(gamma))

    @classmethod
    def exterior_bessel(cls, alpha: float) -> "ModelSpace":
        return cls("exterior_bessel", alpha=float(alpha))

    # -- geometry ----------------------------------------------------------
    @property
    def is_radial(self) -> bool:
        return self.kind in _RADIAL_KINDS

    @property
    def interval(self) -> tuple[float, float]:
        """Radial domain (lo, oo)."""
        if not self.is_radial:
            raise ValueError("half_space has no radial interval")
        lo = 1.0 if self.kind in ("exterior_ball", "exterior_bessel") else 0.0
        return lo, math.inf

    @property
    def dimension(self) -> int:
        """Homogeneous dimension of the reference measure."""
        if self.kind == "half_line":
            return int(math.ceil(self.params["alpha"] + 1))
        if self.kind == "exterior_bessel":
            return int(math.ceil(self.params["alpha"] + 1))
        return int(self.params["n"])

    def base_density(self) -> Monomial:
        """Reference measure density in the radial coordinate."""
        k = self.kind
        if k == "half_line":
            return Monomial(1.0, self.params["alpha"])
        if k == "exterior_bessel":
            return Monomial(1.0, self.params["alpha"])
        if k in ("exterior_ball", "inverse_square"):
            n = self.params["n"]
            return Monomial(sphere_area(n), n - 1.0)
        raise ValueError("half_space reference measure is not radial")

    def contains(self, x) -> bool:
        if self.kind == "half_space":
            x = np.asarray(x, dtype=float)
            return x.shape == (self.params["n"],) and x[-1] > 0
        lo, _ = self.interval
        return bool(np.all(np.asarray(x, dtype=float) > lo))

    def require(self, x):
        if not self.contains(x):
            raise OutsideDomain(f"{x!r} is not in the {self.kind} domain")

    def metric(self, x, y) -> float:
        if self.kind == "half_space":
            return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))
        return abs(float(x) - float(y))

    def boundary_distance(self, x) -> float:
        """Distance from x to the complement of the domain."""
        self.require(x)
        if self.kind == "half_space":
            return float(np.asarray(x, dtype=float)[-1])
        lo, _ = self.interval
        return float(x) - lo

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "ModelSpace":
        return cls(obj["kind"], **obj.get("params", {}))

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"ModelSpace({self.kind}, {inner})"

    def __eq__(self, other):
        return (isinstance(other, ModelSpace)
                and self.kind == other.kind and self.params == other.params)


Density = Union[Monomial, NormalPower, Callable[[np.ndarray], np.ndarray]]


class WeightedMeasure:
    """A measure density * (reference measure) on a model space.

    density may be a Monomial (closed-form ball masses on radial models),
    a NormalPower (half-space, reduced quadrature), or a callable taken
    relative to the radial reference measure (adaptive quadrature).
    """

    def __init__(self, space: ModelSpace, density: Density | None = None):
        self.space = space
        if density is None:
            density = Monomial(1.0, 0.0) if space.is_radial else NormalPower(0.0)
        self.density = density
        if isinstance(density, NormalPower) and space.kind != "half_space":
            raise ValueError("NormalPower densities live on the half-space")

    @property
    def closed_form(self) -> bool:
        return self.space.is_radial and isinstance(self.density, Monomial)

    def radial_density(self) -> Monomial | None:
        """Full density against dr when it is a monomial, else None."""
        if self.closed_form:
            return self.space.base_density().times(self.density)
        return None

    def density_values(self, r: np.ndarray) -> np.ndarray:
        """Density against dr at radii r (radial models only)."""
        base = self.space.base_density()
        if isinstance(self.density, Monomial):
            return base(r) * self.density(r)
        return base(r) * np.asarray(self.density(r), dtype=float)

    def mass(self, ball: Ball) -> float:
        """Measure of B(center, radius) intersected with the domain."""
        if self.space.kind == "half_space":
            return self._half_space_mass(ball)
        lo, _ = self.space.interval
        self.space.require(ball.center)
        a, b = ball.interval()
        a, b = max(a, lo), b
        if b <= a:
            return 0.0
        if self.closed_form:
            try:
                return self.radial_density().integral(a, b)
            except DivergentIntegral as exc:
                raise NonFiniteMass(str(exc)) from exc
        try:
            value = adaptive(lambda r: self.density_values(r), a, b,
                             epsabs=1e-13, epsrel=1e-11)
        except Exception as exc:  # quadrature failure or bad density
            raise NonFiniteMass(f"ball mass on ({a}, {b}) failed: {exc}") from exc
        if not math.isfinite(value):
            raise NonFiniteMass("ball mass is not finite")
        return value

    def _half_space_mass(self, ball: Ball) -> float:
        n = self.space.params["n"]
        self.space.require(ball.center)
        c = np.asarray(ball.center, dtype=float)
        r = ball.radius
        q = self.density.q if isinstance(self.density, NormalPower) else 0.0
        vol_unit = math.pi ** ((n - 1) / 2.0) / math.gamma((n + 1) / 2.0)
        cn = c[-1]
        a, b = max(0.0, cn - r), cn + r

        def integrand(u):
            s2 = np.maximum(r * r - (u - cn) ** 2, 0.0)
            return u ** q * vol_unit * s2 ** ((n - 1) / 2.0)

        return adaptive(integrand, a, b, epsabs=1e-13, epsrel=1e-10)

    def describe(self) -> dict:
        if isinstance(self.density, Monomial):
            dens = {"type": "monomial", "coeff": self.density.coeff, "power": self.density.power}
        elif isinstance(self.density, NormalPower):
            dens = {"type": "normal_power", "q": self.density.q}
        else:
            dens = {"type": "callable"}
        return {"space": self.space.to_json(), "density": dens}


def ball_mass(measure: WeightedMeasure, ball: Ball) -> float:
    """Mass of a ball under a weighted measure (clipped to the domain)."""
    return measure.mass(ball)


def doubling_constant(measure: WeightedMeasure, centers, radii) -> float:
    """Empirical doubling constant over a grid of centers and radii.

    Returns max over the grid of mass(B(x, 2r)) / mass(B(x, r)).
    """
    worst = 0.0
    for x in centers:
        for r in radii:
            m1 = measure.mass(Ball(x, float(r)))
            m2 = measure.mass(Ball(x, 2.0 * float(r)))
            if m1 <= 0.0:
                raise NonFiniteMass(f"ball B({x}, {r}) has zero mass")
            worst = max(worst, m2 / m1)
    return worst


def distance_to_boundary(space: ModelSpace, x) -> float:
    """Distance from a domain point to the boundary of the model space."""
    return space.boundary_distance(x)
