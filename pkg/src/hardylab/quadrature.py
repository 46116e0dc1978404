"""Quadrature helpers shared by the measure, certificate and functional layers.

Two integration styles are used throughout the package:

* composite Gauss-Legendre panels on explicit breakpoints, for integrands
  built from piecewise-polynomial data (grid functions, atom payloads)
  where panel boundaries can be placed on every kink;
* adaptive quadrature (QUADPACK via scipy) on smooth kernel integrands,
  always preceded by a Gaussian tail truncation so the integrand passed to
  the adaptive code has no long flat tail to chase.

The truncation rule: a Gaussian factor exp(-d^2/(c t)) is below
``tail_eps`` once d > sqrt(c t ln(1/tail_eps)); integration windows are
clipped there.  With the default tail_eps = 1e-18 the discarded tail is
orders of magnitude below every tolerance used by the certificates.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate as _sciint

from .errors import QuadratureFailure

TAIL_EPS = 1e-18


@lru_cache(maxsize=16)
def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def panel_rule(breaks: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive panels.

    Parameters
    ----------
    breaks : array
        Strictly increasing panel boundaries, length m+1 for m panels.
    order : int
        Nodes per panel.

    Returns
    -------
    nodes, weights : arrays of length m*order.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_rule(order)
    a = breaks[:-1]
    h = np.diff(breaks)
    nodes = a[:, None] + (x[None, :] + 1.0) * (h[:, None] / 2.0)
    weights = np.broadcast_to(w[None, :], nodes.shape) * (h[:, None] / 2.0)
    return nodes.ravel(), weights.ravel()


def integrate_panels(fn, breaks, order: int = 16) -> float:
    """Integrate a vectorized callable over explicit panels."""
    breaks = np.asarray(breaks, dtype=float)
    if breaks.size < 2:
        return 0.0
    nodes, weights = panel_rule(breaks, order)
    return float(np.dot(weights, fn(nodes)))


def refine_breaks(breaks, max_width: float, cap: int = 64) -> np.ndarray:
    """Subdivide panels so that no panel is wider than max_width.

    The per-panel subdivision count is capped to keep node counts bounded
    when max_width is far below the panel scale.
    """
    breaks = np.asarray(breaks, dtype=float)
    out = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = int(min(cap, max(1, math.ceil((b - a) / max_width))))
        out.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(out)


def merge_breaks(*arrays, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Sorted union of breakpoints clipped to [lo, hi]."""
    pts = np.unique(np.concatenate([np.atleast_1d(np.asarray(a, dtype=float)) for a in arrays]))
    if lo is not None:
        pts = pts[pts >= lo - 0.0]
        if pts.size == 0 or pts[0] > lo:
            pts = np.concatenate([[lo], pts])
    if hi is not None:
        pts = pts[pts <= hi]
        if pts.size == 0 or pts[-1] < hi:
            pts = np.concatenate([pts, [hi]])
    return pts


def gaussian_window(center: float, t: float, c: float = 4.0,
                    tail_eps: float = TAIL_EPS) -> tuple[float, float]:
    """Interval outside which exp(-(y-center)^2/(c t)) < tail_eps."""
    r = math.sqrt(c * t * math.log(1.0 / tail_eps))
    return center - r, center + r


def adaptive(fn, a: float, b: float, *, epsabs: float = 1e-12, epsrel: float = 1e-11,
             points=None, limit: int = 200) -> float:
    """Adaptive quadrature with an error check.

    Raises QuadratureFailure when QUADPACK reports a problem or the error
    estimate is not comfortably below the requested tolerance.
    """
    if b <= a:
        return 0.0
    kw = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit, "full_output": 1}
    if points is not None:
        pts = [p for p in points if a < p < b]
        if pts:
            kw["points"] = sorted(pts)
    out = _sciint.quad(fn, a, b, **kw)
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureFailure(f"quadrature did not converge on [{a}, {b}]: {out[3]}")
    tol = max(epsabs, epsrel * abs(value))
    if abserr > 50.0 * tol + 1e-300:
        raise QuadratureFailure(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance {tol:.3e} on [{a}, {b}]")
    return float(value)


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n log-spaced values from lo to hi inclusive."""
    if lo <= 0 or hi <= lo:
        raise ValueError("log grid needs 0 < lo < hi")
    return np.geomspace(lo, hi, n)


def trapezoid_log(values: np.ndarray, ts: np.ndarray):
    """Trapezoid rule for Int f(t) dt/t over a log-spaced grid.

    Integrates along the last axis, so a (points, times) array yields
    one value per point.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.trapezoid(values, np.log(ts), axis=-1)
    return float(out) if np.ndim(out) == 0 else out
