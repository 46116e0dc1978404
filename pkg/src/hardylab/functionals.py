"""Maximal and square functions, oscillation norms, and the atom pairing.

All operators act on sampled radial profiles (GridFunction) through a
heat kernel or its weight transform.  Pointwise values are returned on
caller-supplied points; integrated norms use output grids anchored to
the support ball of the input, so dilating the input rescales the grid
with it and reported norms are exactly dilation covariant.

Default time grids are likewise anchored to the support scale s of the
input: the maximal function scans t in s^2 * [1e-4, 1e4] and the square
functions scan t in s * [1e-2, 1e2], both log-uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateBall, DomainError, InvalidAtom
from .gridfn import GridFunction
from .quadrature import (gauss_rule, log_grid, merge_breaks, panel_rule,
                         refine_breaks, trapezoid_log)
from .spaces import Ball, ModelSpace, Monomial, WeightedMeasure

__all__ = [
    "semigroup_apply", "maximal", "g_function", "area_function",
    "maximal_times", "square_times", "output_grid", "l1_norm",
    "weighted_norm", "BmoValue", "bmo_local", "BmoReport", "bmo_norm",
    "PairingReport", "duality_pair",
]


def _measure_of(kernel) -> WeightedMeasure:
    m = getattr(kernel, "measure", None)
    if m is not None:
        return m
    return WeightedMeasure(kernel.space, Monomial(1.0, 0.0))


def _density_of(kernel):
    return _measure_of(kernel).density_values


def _as_points(xs):
    arr = np.atleast_1d(np.asarray(xs, dtype=float))
    scalar = np.asarray(xs).ndim == 0
    return arr, scalar


def _require_radial(kernel) -> None:
    if not kernel.space.is_radial:
        raise DomainError("sampled-profile operators need a radial model; "
                          "reduce product kernels to their normal coordinate first")


# ---------------------------------------------------------------------------
# semigroup action
# ---------------------------------------------------------------------------

def semigroup_apply(kernel, t: float, xs, f: GridFunction, density=None, *,
                    mode: str = "heat", order: int = 8, resolve: float = 0.5,
                    cap: int = 16, chunk: int = 256):
    """Integrate kernel(t, x, .) against f on the weighted measure.

    mode "heat" uses the kernel itself, "lp" its time-derivative kernel
    -t dT/dt.  Quadrature panels follow the breakpoints of f, subdivided
    to about half the diffusion length sqrt(t).
    """
    if not t > 0:
        raise DomainError("time must be positive")
    _require_radial(kernel)
    if mode not in ("heat", "lp"):
        raise ConfigError(f"unknown mode {mode!r}")
    kfn = kernel.lp if mode == "lp" else kernel
    rho = _density_of(kernel) if density is None else density
    lo, _ = kernel.space.interval
    pts, scalar = _as_points(xs)
    a = max(lo, float(f.xs[0]))
    b = float(f.xs[-1])
    if not b > a:
        out = np.zeros_like(pts)
        return float(out[0]) if scalar else out
    breaks = merge_breaks(f.breakpoints(), lo=a, hi=b)
    fine = refine_breaks(breaks, resolve * math.sqrt(t), cap=cap)
    ys, ws = panel_rule(fine, order)
    fy = ws * f(ys) * np.asarray(rho(ys), dtype=float)
    out = np.empty(pts.size)
    for start in range(0, pts.size, chunk):
        sl = slice(start, start + chunk)
        out[sl] = np.asarray(kfn(t, pts[sl][:, None], ys[None, :])) @ fy
    return float(out[0]) if scalar else out


def maximal_times(scale: float, n: int = 60) -> np.ndarray:
    s2 = scale * scale
    return log_grid(s2 * 1e-4, s2 * 1e4, n)


def square_times(scale: float, n: int = 60) -> np.ndarray:
    return log_grid(scale * 1e-2, scale * 1e2, n)


def maximal(f: GridFunction, kernel, xs, times=None, density=None, **kw):
    """Largest |T_t f| over the time grid, pointwise in x."""
    if times is None:
        times = maximal_times(f.support_scale())
    pts, scalar = _as_points(xs)
    out = np.zeros(pts.size)
    for t in np.asarray(times, dtype=float):
        np.maximum(out, np.abs(semigroup_apply(kernel, float(t), pts, f,
                                               density, **kw)), out=out)
    return float(out[0]) if scalar else out


def g_function(f: GridFunction, kernel, xs, times=None, density=None, **kw):
    """Vertical square function from the derivative kernel at times t^2."""
    if times is None:
        times = square_times(f.support_scale())
    ts = np.asarray(times, dtype=float)
    pts, scalar = _as_points(xs)
    rows = np.empty((pts.size, ts.size))
    for j, t in enumerate(ts):
        rows[:, j] = semigroup_apply(kernel, float(t * t), pts, f, density,
                                     mode="lp", **kw)
    out = np.sqrt(np.maximum(trapezoid_log(rows * rows, ts), 0.0))
    return float(out[0]) if scalar else out


def area_function(f: GridFunction, kernel, xs, times=None, density=None,
                  aperture: float = 1.0, order: int = 12, **kw):
    """Conical square function; cone cross sections averaged on the
    kernel's weighted measure."""
    _require_radial(kernel)
    measure = _measure_of(kernel)
    rho = _density_of(kernel) if density is None else density
    lo, _ = kernel.space.interval
    if times is None:
        times = square_times(f.support_scale(), 40)
    ts = np.asarray(times, dtype=float)
    pts, scalar = _as_points(xs)
    gx, gw = gauss_rule(order)
    inner = np.empty((pts.size, ts.size))
    for j, t in enumerate(ts):
        r = aperture * float(t)
        a = np.maximum(lo, pts - r)
        b = pts + r
        half = (b - a) / 2.0
        ys = (a + b)[:, None] / 2.0 + half[:, None] * gx[None, :]
        ws = half[:, None] * gw[None, :]
        q = semigroup_apply(kernel, float(t * t), ys.ravel(), f, density,
                            mode="lp", **kw).reshape(ys.shape)
        masses = np.array([measure.mass(Ball(float(x), r)) for x in pts])
        inner[:, j] = np.sum(ws * q * q * np.asarray(rho(ys), dtype=float),
                             axis=1) / masses
    out = np.sqrt(np.maximum(trapezoid_log(inner, ts), 0.0))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# integrated norms
# ---------------------------------------------------------------------------

def output_grid(f: GridFunction, lo: float = 0.0, *, near: float = 4.0,
                far: float = 256.0, per_decade: int = 24) -> np.ndarray:
    """Evaluation grid anchored to the support ball of f.

    Dense window at half the input spacing out to `near` radii, then a
    geometric tail to `far` radii on the right and down to the domain
    edge on the left.  Every length entering the construction is a
    multiple of the support radius or input spacing, so dilating f
    dilates the grid.
    """
    ball = f.support_ball
    if ball is None:
        raise ConfigError("cannot anchor a grid to the zero profile")
    c, r = float(ball.center), float(ball.radius)
    step = f.min_spacing() / 2.0
    start = c - near * r
    parts = []
    if start <= lo + step:
        start = lo + step / 2.0
    else:
        gmax = (c - lo - step / 2.0) / (near * r)
        if gmax > 1.0:
            m = max(int(math.ceil(per_decade * math.log10(gmax))) + 1, 2)
            dist = np.geomspace(near * r, near * r * gmax, m)
            parts.append((c - dist)[::-1][:-1])
    span = c + near * r - start
    n_dense = max(int(round(span / step)) + 1, 2)
    parts.append(np.linspace(start, c + near * r, n_dense))
    n_tail = int(math.ceil(per_decade * math.log10(far / near))) + 1
    parts.append((c + np.geomspace(near * r, far * r, n_tail))[1:])
    return np.concatenate(parts)


def l1_norm(xs, values, density) -> float:
    xs = np.asarray(xs, dtype=float)
    vals = np.abs(np.asarray(values, dtype=float))
    return float(np.trapezoid(vals * np.asarray(density(xs), dtype=float), xs))


def weighted_norm(f: GridFunction, measure, p: float = 2.0,
                  order: int = 16) -> float:
    """L^p norm of the interpolant against a weighted measure.

    Panels follow the sample grid, split additionally at sign changes of
    the interpolant, so polynomial densities are integrated exactly.
    """
    if isinstance(measure, ModelSpace):
        measure = WeightedMeasure(measure, Monomial(1.0, 0.0))
    if not p >= 1.0:
        raise ConfigError("weighted_norm needs p >= 1")
    if not measure.space.is_radial:
        raise DomainError("weighted_norm on grid functions is radial only")
    lo, _ = measure.space.interval
    xs, vs = f.xs, f.values
    sign_flip = vs[:-1] * vs[1:] < 0.0
    roots = xs[:-1][sign_flip] - vs[:-1][sign_flip] * np.diff(xs)[sign_flip] \
        / (vs[1:][sign_flip] - vs[:-1][sign_flip])
    a = max(lo, float(xs[0]))
    b = float(xs[-1])
    if not b > a:
        return 0.0
    breaks = merge_breaks(xs, roots, lo=a, hi=b)
    ys, ws = panel_rule(breaks, order)
    total = float(np.dot(ws, np.abs(f(ys)) ** p
                         * np.asarray(measure.density_values(ys), dtype=float)))
    return max(total, 0.0) ** (1.0 / p)


# ---------------------------------------------------------------------------
# oscillation norms
# ---------------------------------------------------------------------------

@dataclass
class BmoValue:
    """Weighted mean oscillation of g on one ball.

    c_star is the minimizing multiple of the weight: the oscillation is
    measured against c_star * h rather than a constant.
    """
    value: float
    c_star: float
    ball: Ball

    def to_json(self) -> dict:
        return {"value": self.value, "c_star": self.c_star,
                "ball": self.ball.to_json()}


@dataclass
class BmoReport:
    norm: float
    argmax_ball: Ball
    c_star: float
    at_family_edge: bool
    n_balls: int
    samples: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"norm": self.norm, "argmax_ball": self.argmax_ball.to_json(),
                "c_star": self.c_star, "at_family_edge": self.at_family_edge,
                "n_balls": self.n_balls}


def bmo_local(g: GridFunction, profile, ball: Ball, order: int = 16) -> BmoValue:
    """Mean oscillation of g against multiples of the weight, one ball.

    The projection constant is c* = int_B g h^2 dmu / int_B h^3 dmu and
    the value is the L^2(h dmu) deviation normalized by int_B h dmu.
    The sample grid of g must cover the ball.
    """
    space = profile.space
    if not space.is_radial:
        raise DomainError("oscillation norms on grid functions are radial only")
    lo, _ = space.interval
    a = max(lo, ball.center - ball.radius)
    b = ball.center + ball.radius
    if not b > a:
        raise DegenerateBall("ball does not meet the domain")
    if a < g.xs[0] - 1e-12 or b > g.xs[-1] + 1e-12:
        raise ConfigError("sample grid does not cover the ball")
    rho = space.base_density()
    breaks = merge_breaks(g.xs, lo=a, hi=b)
    ys, ws = panel_rule(breaks, order)
    hv = np.asarray(profile(ys), dtype=float)
    wh = ws * np.asarray(rho(ys), dtype=float) * hv
    mu_h = float(np.sum(wh))
    i_h3 = float(np.dot(wh, hv * hv))
    if not (mu_h > 0.0 and i_h3 > 0.0):
        raise DegenerateBall("weight carries no mass on the ball")
    gv = g(ys)
    c_star = float(np.dot(wh, hv * gv)) / i_h3
    dev = gv - c_star * hv
    value = math.sqrt(max(float(np.dot(wh, dev * dev)), 0.0) / mu_h)
    return BmoValue(value=value, c_star=c_star, ball=ball)


def bmo_norm(g: GridFunction, profile, balls) -> BmoReport:
    """Largest local oscillation over a family of balls.

    at_family_edge flags a supremum attained at the largest radius in
    the family, a hint that the family should be extended.
    """
    balls = list(balls)
    if not balls:
        raise ConfigError("empty ball family")
    locals_ = [bmo_local(g, profile, b) for b in balls]
    best = max(locals_, key=lambda v: v.value)
    max_r = max(b.radius for b in balls)
    samples = [[float(v.ball.center), float(v.ball.radius), v.value, v.c_star]
               for v in locals_]
    return BmoReport(norm=best.value, argmax_ball=best.ball,
                     c_star=best.c_star,
                     at_family_edge=bool(best.ball.radius >= max_r * (1 - 1e-12)),
                     n_balls=len(balls), samples=samples)


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------

@dataclass
class PairingReport:
    """One atom paired against one oscillation class.

    The bound is the local oscillation value on the atom's ball; the
    pairing inequality holds with constant one, checked with slack
    tol * (1 + bound).
    """
    value: float
    bound: float
    constant: float
    slack: float
    passed: bool
    flavor: str
    ball: Ball

    def to_json(self) -> dict:
        return {"value": self.value, "bound": self.bound,
                "constant": self.constant, "slack": self.slack,
                "pass": self.passed, "flavor": self.flavor,
                "ball": self.ball.to_json()}


def duality_pair(atom, g: GridFunction, profile, order: int = 16,
                 tol: float = 1e-6) -> PairingReport:
    """Check |int a g dmu| against the local oscillation of g.

    The atom is validated first; an invalid atom raises rather than
    producing a vacuous certificate.  Both sides of the inequality are
    evaluated on one panel rule (breakpoints of the atom and of g over
    the atom's ball), so the bound inherits the discrete Cauchy-Schwarz
    inequality and stays valid even when the oscillation is at rounding
    level.
    """
    from .atoms import validate as _validate
    report = _validate(atom, profile)
    if not report.ok:
        raise InvalidAtom("; ".join(report.failures))
    space = profile.space
    lo, _ = space.interval
    rho = space.base_density()
    ball = atom.ball
    a = max(lo, ball.center - ball.radius)
    b = ball.center + ball.radius
    if a < g.xs[0] - 1e-12 or b > g.xs[-1] + 1e-12:
        raise ConfigError("sample grid of g does not cover the atom's ball")
    breaks = merge_breaks(atom.breakpoints(), g.xs, lo=a, hi=b)
    ys, ws = panel_rule(breaks, order)
    rv = np.asarray(rho(ys), dtype=float)
    hv = np.asarray(profile(ys), dtype=float)
    av = np.asarray(atom(ys), dtype=float)
    gv = g(ys)
    wh = ws * rv * hv
    mu_h = float(np.sum(wh))
    i_h3 = float(np.dot(wh, hv * hv))
    if not (mu_h > 0.0 and i_h3 > 0.0):
        raise DegenerateBall("weight carries no mass on the atom's ball")
    c_star = float(np.dot(wh, hv * gv)) / i_h3
    dev = gv - c_star * hv
    # equal to int a g dmu by the atom's weighted cancellation; pairing
    # against the deviation keeps the roundoff of value and bound aligned
    value = float(np.dot(ws, av * dev * rv))
    bound = math.sqrt(max(float(np.dot(wh, dev * dev)), 0.0) / mu_h)
    slack = bound * (1.0 + tol) - abs(value)
    return PairingReport(value=value, bound=bound, constant=1.0, slack=slack,
                         passed=bool(slack >= 0.0), flavor=atom.flavor,
                         ball=ball)
