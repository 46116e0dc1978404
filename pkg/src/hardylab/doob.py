"""Doob-transformed kernels and numerical certificates.

Dividing a heat kernel by the harmonic weight at both arguments,
K(t, x, y) = T_t(x, y) / (h(x) h(y)), produces a semigroup acting on the
weighted measure d(nu) = h^2 d(mu).  Three facts about this quotient are
certified numerically:

* conservativity: Int K(t, x, y) d(nu)(y) = 1, equivalently the weight is
  invariant, Int T_t(x, y) h(y) d(mu)(y) = h(x);
* a two-sided Gaussian sandwich: K(t, x, y) * nu(B(x, sqrt(t))) stays
  between two Gaussian envelopes exp(-d^2 / (c_i t)) up to constants whose
  ratio is bounded over the sample grid;
* Hoelder continuity in the second argument, probed as a log-log slope of
  the increment against the Gaussian majorant.

Each check returns a Certificate: a frozen record of the claim, the grid,
the constants found, the tolerance, and a pass flag.  Certificates with
identical inputs are bit-identical apart from the timestamp.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from ._version import __version__
from .errors import DegenerateFit, DomainError
from .kernels import HarmonicProfile, HeatKernel
from .quadrature import adaptive, gaussian_window
from .spaces import Ball, WeightedMeasure

__all__ = [
    "Certificate", "DoobKernel", "doob_kernel",
    "verify_harmonicity", "verify_conservative",
    "gaussian_sandwich", "holder_probe",
]

SCHEMA_VERSION = 1


def _utcnow() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class Certificate:
    """Outcome of a numerical hypothesis check.

    constants holds the numbers the claim is about (deviations, sandwich
    constants, fitted exponents); samples, when present, is a plain table
    of the per-grid-point evaluations for CSV export and plotting and is
    not part of the JSON payload.
    """

    claim: str
    grid: dict
    constants: dict
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=_utcnow)
    version: str = __version__
    samples: dict | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "claim": self.claim,
            "grid": self.grid,
            "constants": self.constants,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
            "timestamp": self.timestamp,
            "version": self.version,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps() + "\n")

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        return cls(claim=obj["claim"], grid=obj["grid"], constants=obj["constants"],
                   tolerance=obj["tolerance"], passed=obj["pass"],
                   details=obj.get("details", {}), timestamp=obj.get("timestamp", ""),
                   version=obj.get("version", ""))


class DoobKernel:
    """Heat kernel divided by a harmonic weight at both arguments."""

    def __init__(self, kernel: HeatKernel, profile: HarmonicProfile):
        if profile.kind == "constant":
            profile = HarmonicProfile.constant(kernel.space)
        elif profile.space != kernel.space:
            raise DomainError(
                f"profile {profile.kind} lives on {profile.space!r}, "
                f"kernel on {kernel.space!r}")
        self.kernel = kernel
        self.profile = profile
        self.measure: WeightedMeasure = profile.weighted_measure(2.0)

    @property
    def space(self):
        return self.kernel.space

    def __call__(self, t: float, x, y):
        h = self.profile
        return self.kernel(t, x, y) / (h(x) * h(y))

    def gaussian_quotient(self, t: float, x, y):
        h = self.profile
        return self.kernel.gaussian_quotient(t, x, y) / (h(x) * h(y))

    def lp(self, t: float, x, y):
        """Transform of -t dT_t/dt, divided by the weight at both arguments."""
        h = self.profile
        return self.kernel.lp(t, x, y) / (h(x) * h(y))

    def describe(self) -> dict:
        return {"kernel": self.kernel.to_json(), "profile": self.profile.to_json()}


def doob_kernel(dk: DoobKernel, t: float, x, y):
    """Evaluate the transformed kernel at (t, x, y)."""
    return dk(t, x, y)


def _weighted_semigroup_mass(kernel: HeatKernel, profile: HarmonicProfile,
                             t: float, x, rel_tol: float) -> float:
    """Int T_t(x, y) h(y) d(mu)(y), reduced to one dimension and truncated."""
    red = kernel.reduction(profile)
    a = red.coordinate(x)
    wlo, whi = gaussian_window(a, t, c=4.0)
    lo = max(red.lo, wlo)

    def integrand(u):
        return red.kernel(t, a, u) * red.profile_values(u) * red.density(u)

    scale = max(float(red.profile_values(np.atleast_1d(a))[0]), 1e-12)
    return adaptive(integrand, lo, whi, epsabs=rel_tol * scale * 1e-2,
                    epsrel=rel_tol * 1e-2, points=[a])


def verify_harmonicity(kernel: HeatKernel, profile: HarmonicProfile,
                       times, points, tol: float = 1e-6) -> Certificate:
    """Certify Int T_t(x, .) h d(mu) = h(x) over a (times x points) grid.

    The relative deviation is recorded per grid point; the certificate
    passes when the largest deviation is below tol.
    """
    times = [float(t) for t in times]
    points = list(points)
    if profile.kind != "constant" and profile.space != kernel.space:
        raise DomainError("profile and kernel live on different spaces")

    def one(pair):
        t, x = pair
        target = float(profile(x))
        got = _weighted_semigroup_mass(kernel, profile, t, x, rel_tol=tol)
        return got, target, abs(got - target) / abs(target)

    jobs = [(t, x) for t in times for x in points]
    results = parallel_map(one, jobs)
    rows = [[t, _point_repr(x), got, target, dev]
            for (t, x), (got, target, dev) in zip(jobs, results)]
    worst = max(dev for _, _, dev in results)
    return Certificate(
        claim="semigroup preserves the harmonic weight",
        grid={"times": times, "points": [_point_repr(x) for x in points],
              "kernel": kernel.to_json(), "profile": profile.to_json()},
        constants={"max_rel_deviation": worst},
        tolerance=tol,
        passed=bool(worst <= tol),
        samples={"columns": ["t", "x", "integral", "target", "rel_deviation"],
                 "rows": rows},
    )


def verify_conservative(dk: DoobKernel, times, points, tol: float = 1e-6) -> Certificate:
    """Certify Int K(t, x, .) d(nu) = 1 for the transformed kernel."""
    times = [float(t) for t in times]
    points = list(points)

    def one(pair):
        t, x = pair
        hx = float(dk.profile(x))
        got = _weighted_semigroup_mass(dk.kernel, dk.profile, t, x, rel_tol=tol) / hx
        return got, abs(got - 1.0)

    jobs = [(t, x) for t in times for x in points]
    results = parallel_map(one, jobs)
    rows = [[t, _point_repr(x), got, dev] for (t, x), (got, dev) in zip(jobs, results)]
    worst = max(dev for _, dev in results)
    return Certificate(
        claim="transformed semigroup is conservative",
        grid={"times": times, "points": [_point_repr(x) for x in points],
              "kernel": dk.kernel.to_json(), "profile": dk.profile.to_json()},
        constants={"max_deviation_from_one": worst},
        tolerance=tol,
        passed=bool(worst <= tol),
        samples={"columns": ["t", "x", "mass", "deviation"], "rows": rows},
    )


def gaussian_sandwich(dk: DoobKernel, points, times, c_lower: float = 4.0,
                      c_upper: float = 8.0, ratio_ceiling: float = 1e4) -> Certificate:
    """Two-sided Gaussian bound constants for the transformed kernel.

    For every grid point computes R_c = K(t,x,y) nu(B(x, sqrt t)) e^{d^2/(c t)}
    for both envelope constants.  The upper constant is max R_{c_upper}, the
    lower is min R_{c_lower}; the claim passes when the lower constant is
    positive and their ratio stays under ratio_ceiling.  Using c_lower = 4
    (the exact Gaussian decay rate) the exponential factor cancels against
    the kernel analytically, so no overflow occurs at large separations.
    """
    pts = list(points)
    times = [float(t) for t in times]
    space = dk.space
    rows = []
    c_up_val, c_low_val = -math.inf, math.inf
    arg_up, arg_low = None, None
    for t in times:
        sqt = math.sqrt(t)
        masses = parallel_map(lambda x: dk.measure.mass(Ball(x, sqt)), pts)
        for x, mass in zip(pts, masses):
            for y in pts:
                d2 = space.metric(x, y) ** 2
                gq = float(dk.gaussian_quotient(t, x, y))
                r_low = gq * mass * _exp_clipped(d2 * (1.0 / c_lower - 0.25) / t)
                r_up = gq * mass * _exp_clipped(d2 * (1.0 / c_upper - 0.25) / t)
                rows.append([t, _point_repr(x), _point_repr(y), r_low, r_up])
                if r_up > c_up_val:
                    c_up_val, arg_up = r_up, (t, x, y)
                if r_low < c_low_val:
                    c_low_val, arg_low = r_low, (t, x, y)
    ratio = math.inf if c_low_val <= 0 else c_up_val / c_low_val
    return Certificate(
        claim="two-sided Gaussian sandwich for the transformed kernel",
        grid={"times": times, "points": [_point_repr(x) for x in pts],
              "kernel": dk.kernel.to_json(), "profile": dk.profile.to_json(),
              "c_lower": c_lower, "c_upper": c_upper},
        constants={"upper_constant": c_up_val, "lower_constant": c_low_val,
                   "ratio": ratio,
                   "argmax_upper": _arg_repr(arg_up), "argmin_lower": _arg_repr(arg_low)},
        tolerance=ratio_ceiling,
        passed=bool(c_low_val > 0 and ratio < ratio_ceiling),
        samples={"columns": ["t", "x", "y", "ratio_lower", "ratio_upper"], "rows": rows},
    )


def holder_probe(dk: DoobKernel, t: float, x, y0, offsets, c: float = 8.0,
                 floor: float = 0.5) -> Certificate:
    """Estimate the Hoelder exponent of y -> K(t, x, y) near y0.

    Fits the slope of log |K(t,x,y0+s) - K(t,x,y0)| - log M(y) against
    log(|s| / sqrt t), where M is the Gaussian majorant
    nu(B(x, sqrt t))^{-1} exp(-d(x,y)^2 / (c t)).  Offsets with |s| >=
    sqrt t, landing outside the domain, or producing a zero increment are
    skipped; at least three usable offsets are required.
    """
    if not space_is_radial(dk.space):
        raise DomainError("holder_probe works on radial (one-dimensional) models")
    sqt = math.sqrt(t)
    mass = dk.measure.mass(Ball(x, sqt))
    base = float(dk(t, x, y0))
    lo, _ = dk.space.interval
    logs_s, logs_r, rows = [], [], []
    skipped = 0
    for s in offsets:
        y = y0 + float(s)
        if s == 0 or y <= lo or abs(float(s)) >= sqt:
            skipped += 1
            continue
        diff = abs(float(dk(t, x, y)) - base)
        if diff <= 0.0:
            skipped += 1
            continue
        majorant = math.exp(-dk.space.metric(x, y) ** 2 / (c * t)) / mass
        logs_s.append(math.log(abs(float(s)) / sqt))
        logs_r.append(math.log(diff / majorant))
        rows.append([float(s), diff, majorant, diff / majorant])
    if len(logs_s) < 3:
        raise DegenerateFit(
            f"holder_probe needs >= 3 usable offsets, got {len(logs_s)}")
    slope, intercept = np.polyfit(np.asarray(logs_s), np.asarray(logs_r), 1)
    return Certificate(
        claim="Hoelder regularity of the transformed kernel",
        grid={"t": t, "x": x, "y0": y0, "offsets": [float(s) for s in offsets],
              "c": c, "kernel": dk.kernel.to_json(), "profile": dk.profile.to_json()},
        constants={"delta_hat": float(slope), "log_prefactor": float(intercept),
                   "skipped_offsets": skipped},
        tolerance=floor,
        passed=bool(slope >= floor),
        samples={"columns": ["offset", "increment", "majorant", "quotient"],
                 "rows": rows},
    )


def space_is_radial(space) -> bool:
    return space.kind != "half_space"


def _exp_clipped(arg: float) -> float:
    try:
        return math.exp(arg)
    except OverflowError:
        return math.inf


def _point_repr(x):
    if isinstance(x, (tuple, list, np.ndarray)):
        return [float(v) for v in x]
    return float(x)


def _arg_repr(arg):
    if arg is None:
        return None
    t, x, y = arg
    return {"t": float(t), "x": _point_repr(x), "y": _point_repr(y)}
