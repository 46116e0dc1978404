"""Muckenhoupt-type weight checks against weighted reference measures.

The quantity checked on a ball B is the usual A_p product

    (avg_B w) * (avg_B w^{-1/(p-1)})^{p-1},

with averages taken against a supplied reference measure restricted to
B cap X.  For a harmonic weight h there is a closed reformulation of the
A_p product of w = h^{-1} against the measure h^2 d(mu) purely in terms
of ball masses of h^q d(mu):

    [h(B) / h^2(B)] * [h^{2 + 1/(p-1)}(B) / h^2(B)]^{p-1},

where h^q(B) is the mass of B under h^q d(mu).  Both routes are computed
independently; the test suite keeps them within 1e-10 of each other.

Averages of monomial weights against monomial densities integrate in
closed form; divergent averages (for example w = 1/x averaged over an
interval touching the origin against Lebesgue measure) raise
DivergentIntegral rather than returning junk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from ._version import __version__
from .errors import DivergentIntegral, NonFiniteMass
from .kernels import HarmonicProfile
from .quadrature import adaptive
from .spaces import Ball, Monomial, WeightedMeasure

__all__ = ["ApReport", "ap_quantity", "apw_quantity", "ap_sup"]


@dataclass
class ApReport:
    """Supremum of a weight quantity over a sampled family of balls."""

    p: float
    supremum: float
    argmax_ball: Ball | None
    ceiling: float
    passed: bool
    refinement: dict = field(default_factory=dict)
    divergent: list = field(default_factory=list)
    n_balls: int = 0
    version: str = __version__
    samples: dict | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "supremum": self.supremum,
            "argmax_ball": self.argmax_ball.to_json() if self.argmax_ball else None,
            "ceiling": self.ceiling,
            "pass": self.passed,
            "refinement": self.refinement,
            "divergent": self.divergent,
            "n_balls": self.n_balls,
            "version": self.version,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _restricted_integral(measure: WeightedMeasure, weight, ball: Ball) -> float:
    """Int_{B cap X} weight d(measure); weight may be a Monomial or callable."""
    space = measure.space
    if space.kind == "half_space":
        raise DivergentIntegral("weight averages are implemented on radial models")
    lo, _ = space.interval
    a, b = ball.interval()
    a = max(a, lo)
    if b <= a:
        raise DivergentIntegral("ball does not meet the domain")
    dens = measure.radial_density()
    if dens is not None and isinstance(weight, Monomial):
        return dens.times(weight).integral(a, b)

    def integrand(r):
        w = weight(r) if not isinstance(weight, Monomial) else weight(r)
        return measure.density_values(r) * np.asarray(w, dtype=float)

    value = adaptive(integrand, a, b, epsabs=1e-13, epsrel=1e-10)
    if not math.isfinite(value):
        raise DivergentIntegral("weight average is not finite")
    return value


def ap_quantity(measure: WeightedMeasure, weight, p: float, ball: Ball) -> float:
    """A_p product of a weight on one ball against a reference measure.

    Parameters
    ----------
    measure : WeightedMeasure
        Reference measure for the averages.
    weight : Monomial or callable
        The weight w; its dual power w^{-1/(p-1)} is formed internally.
    p : float
        Exponent, p > 1.
    ball : Ball

    Raises DivergentIntegral when either average diverges on B cap X.
    """
    if not p > 1.0:
        raise ValueError("ap_quantity needs p > 1")
    total = measure.mass(ball)
    if total <= 0:
        raise DivergentIntegral("ball carries no reference mass")
    dual_exp = -1.0 / (p - 1.0)
    if isinstance(weight, Monomial):
        dual = weight.pow(dual_exp)
    else:
        def dual(r, _w=weight, _e=dual_exp):
            return np.asarray(_w(r), dtype=float) ** _e
    try:
        iw = _restricted_integral(measure, weight, ball)
        idual = _restricted_integral(measure, dual, ball)
    except NonFiniteMass as exc:
        raise DivergentIntegral(str(exc)) from exc
    return (iw / total) * (idual / total) ** (p - 1.0)


def apw_quantity(profile: HarmonicProfile, p: float, ball: Ball) -> float:
    """Ball-mass form of the A_p product for the weight 1/h against h^2 d(mu).

    Evaluates [h(B)/h^2(B)] * [h^{2+1/(p-1)}(B)/h^2(B)]^{p-1} where h^q(B)
    is the mass of the ball under h^q d(mu); closed form whenever the
    profile is a monomial.
    """
    if not p > 1.0:
        raise ValueError("apw_quantity needs p > 1")
    try:
        m1 = profile.weighted_measure(1.0).mass(ball)
        m2 = profile.weighted_measure(2.0).mass(ball)
        mq = profile.weighted_measure(2.0 + 1.0 / (p - 1.0)).mass(ball)
    except NonFiniteMass as exc:
        raise DivergentIntegral(str(exc)) from exc
    if m2 <= 0:
        raise DivergentIntegral("ball carries no h^2 mass")
    return (m1 / m2) * (mq / m2) ** (p - 1.0)


def _refine(values) -> list[float]:
    """Insert geometric midpoints between consecutive grid values."""
    vals = sorted(float(v) for v in values)
    out = []
    for a, b in zip(vals[:-1], vals[1:]):
        out.extend([a, math.sqrt(a * b)])
    out.append(vals[-1])
    return out


def ap_sup(profile: HarmonicProfile, p: float, centers, radii,
           ceiling: float = 100.0) -> ApReport:
    """Supremum of apw_quantity over a grid of balls, with a refinement check.

    The same supremum is recomputed on a grid with geometric midpoints
    inserted in both the center and radius directions; the relative change
    is recorded so a report can be read as evidence the sampled supremum is
    stable.  A single divergent ball fails the report.
    """
    def sweep(cs, rs):
        balls = [Ball(float(c), float(r)) for c in cs for r in rs]

        def one(b):
            try:
                return apw_quantity(profile, p, b), None
            except DivergentIntegral as exc:
                return math.nan, str(exc)

        out = parallel_map(one, balls)
        return balls, out

    base_balls, base_out = sweep(centers, radii)
    divergent = [{"ball": b.to_json(), "reason": reason}
                 for b, (_, reason) in zip(base_balls, base_out) if reason]
    finite = [(v, b) for b, (v, reason) in zip(base_balls, base_out) if not reason]
    if not finite:
        return ApReport(p=p, supremum=math.nan, argmax_ball=None, ceiling=ceiling,
                        passed=False, divergent=divergent, n_balls=len(base_balls))
    sup_base, arg = max(finite, key=lambda vb: vb[0])
    fine_balls, fine_out = sweep(_refine(centers), _refine(radii))
    fine_vals = [v for v, reason in fine_out if not reason and math.isfinite(v)]
    sup_fine = max(fine_vals) if fine_vals else math.nan
    change = abs(sup_fine - sup_base) / sup_base if sup_base else math.nan
    passed = (not divergent) and sup_base <= ceiling and math.isfinite(sup_base)
    rows = [[b.center, b.radius, v] for b, (v, reason) in zip(base_balls, base_out)
            if not reason]
    return ApReport(
        p=p, supremum=max(sup_base, sup_fine), argmax_ball=arg, ceiling=ceiling,
        passed=bool(passed),
        refinement={"coarse": sup_base, "refined": sup_fine, "rel_change": change,
                    "stable_5pct": bool(change < 0.05)},
        divergent=divergent, n_balls=len(base_balls) + len(fine_balls),
        samples={"columns": ["center", "radius", "value"], "rows": rows},
    )
