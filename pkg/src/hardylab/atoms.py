"""Atom flavors, validation, and constructive re-decompositions.

Three flavors on the half-line:

* classical_alpha1: supp a in a ball B, ||a||_{L2(mu)} <= mu(B)^{-1/2},
  int a dmu = 0;
* local_alpha2: exactly |I_m|^{-1} chi_{I_m} on the dyadic interval
  I_m = (2^m, 2^{m+1});
* mu_h_beta: supp a in B, ||a||_{L2(h^{-1}mu)} <= mu_h(B)^{-1/2},
  int a h dmu = 0.

Piecewise-constant payloads carry Fractions end to end, so the
re-decomposition identities (telescoping sums, coefficient recursions,
moment cancellations) hold exactly; sampled payloads (GridFunction) go
through quadrature.  Decompositions require the support ball to sit
inside one dyadic interval, or inside two adjacent ones; anything wider
is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (ConfigError, DomainError, InvalidAtom, NotDecomposable,
                     UnsupportedGeometry)
from .gridfn import GridFunction
from .quadrature import merge_breaks, panel_rule
from .spaces import Ball

SIZE_SLACK = 1e-9
CANCEL_CAP = 1e-10

FLAVORS = ("classical_alpha1", "local_alpha2", "mu_h_beta")

__all__ = [
    "Atom", "ValidationReport", "validate", "Decomposition",
    "decompose_local", "decompose_classical", "decompose_beta",
    "atomic_norm_upper", "moment", "random_beta_atom",
]


# ---------------------------------------------------------------------------
# exact piece helpers; values may be Fraction (exact path) or float
# ---------------------------------------------------------------------------

def _ipow(lo, hi, q):
    """Integral of x^q over (lo, hi); exact when endpoints and q allow."""
    if q <= -1 and lo <= 0:
        return math.inf
    if q == -1:
        return math.log(float(hi) / float(lo))
    if (isinstance(lo, (Fraction, int)) and isinstance(hi, (Fraction, int))
            and float(q).is_integer()):
        k = int(q)
        return (Fraction(hi) ** (k + 1) - Fraction(lo) ** (k + 1)) / (k + 1)
    return (float(hi) ** (q + 1) - float(lo) ** (q + 1)) / (q + 1)


def _coeffs(v):
    """Constant v or linear pair (a0, a1) meaning a0 + a1 x."""
    if isinstance(v, (tuple, list)):
        return v[0], v[1]
    return v, 0


def _vzero(v):
    a0, a1 = _coeffs(v)
    return a0 == 0 and a1 == 0


def _vsub(v, c):
    if isinstance(v, (tuple, list)):
        return (v[0] - c, v[1])
    return v - c


def _vscale(v, factor):
    if isinstance(v, (tuple, list)):
        return (v[0] * factor, v[1] * factor)
    return v * factor


def _piece_value(pieces, y):
    for lo, hi, v in pieces:
        if lo <= y < hi:
            return v
    return 0


def _subtract_indicator(pieces, lo, hi, value):
    """Pieces of f - value * chi_{(lo, hi)}, merged and pruned."""
    pts = sorted({p for piece in pieces for p in piece[:2]} | {lo, hi})
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        mid = (a + b) / 2
        v = _piece_value(pieces, mid)
        if lo <= mid < hi:
            v = _vsub(v, value)
        if not _vzero(v):
            out.append((a, b, v))
    return out


def _scale_pieces(pieces, factor):
    return [(lo, hi, _vscale(v, factor)) for lo, hi, v in pieces]


def _abs_linear_int(lo, hi, a0, a1, alpha):
    """Integral of |a0 + a1 x| x^alpha over (lo, hi)."""
    def signed(a, b):
        out = 0
        if a0 != 0:
            out = out + a0 * _ipow(a, b, alpha)
        if a1 != 0:
            out = out + a1 * _ipow(a, b, alpha + 1)
        return out
    if a1 == 0:
        return abs(a0) * _ipow(lo, hi, alpha)
    root = -a0 / a1
    if lo < root < hi:
        return abs(signed(lo, root)) + abs(signed(root, hi))
    return abs(signed(lo, hi))


def _sqrt_upper(q):
    """A number whose square is >= q; rational for rational input."""
    if isinstance(q, Fraction):
        if q <= 0:
            return Fraction(0)
        x = Fraction(math.sqrt(float(q))).limit_denominator(10 ** 12)
        bump = 1 + Fraction(1, 10 ** 9)
        while x * x < q:
            x *= bump
        return x
    return math.sqrt(max(q, 0.0)) * (1.0 + 1e-12)


def _rational_str(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def _parse_rational(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


# ---------------------------------------------------------------------------
# the Atom type
# ---------------------------------------------------------------------------

class Atom:
    """One atom: a flavor tag, a support ball, and a payload.

    The payload is either a list of (lo, hi, value) pieces (half-open,
    disjoint, sorted; value is a constant or an (a0, a1) pair meaning
    a0 + a1 x) or a GridFunction.  Pieces with Fraction entries keep
    the exact-arithmetic pipeline alive.
    """

    def __init__(self, flavor: str, ball: Ball, payload, m: int | None = None):
        if flavor not in FLAVORS:
            raise ConfigError(f"unknown atom flavor {flavor!r}")
        if flavor == "local_alpha2" and m is None:
            raise ConfigError("local_alpha2 atoms need the dyadic index m")
        self.flavor = flavor
        self.ball = ball
        self.m = m
        if isinstance(payload, GridFunction):
            self.pieces = None
            self.grid = payload
            self.exact = False
        else:
            self.pieces = [(lo, hi, v) for lo, hi, v in payload
                           if not _vzero(v)]
            for lo, hi, _ in self.pieces:
                if not hi > lo:
                    raise ConfigError("atom pieces must have positive width")
            self.grid = None

            def _exact_entry(e):
                if isinstance(e, (tuple, list)):
                    return all(isinstance(x, (Fraction, int)) for x in e)
                return isinstance(e, (Fraction, int))
            self.exact = all(_exact_entry(e)
                             for piece in self.pieces for e in piece)

    # -- constructors --------------------------------------------------------
    @classmethod
    def alpha2(cls, m: int) -> "Atom":
        lo, hi = Fraction(2) ** m, Fraction(2) ** (m + 1)
        ball = Ball(float((lo + hi) / 2), float((hi - lo) / 2))
        return cls("local_alpha2", ball, [(lo, hi, Fraction(2) ** (-m))], m=m)

    @classmethod
    def classical(cls, pieces, ball: Ball) -> "Atom":
        return cls("classical_alpha1", ball, pieces)

    @classmethod
    def beta(cls, pieces, ball: Ball) -> "Atom":
        return cls("mu_h_beta", ball, pieces)

    @classmethod
    def from_grid(cls, flavor: str, f: GridFunction, ball: Ball | None = None) -> "Atom":
        ball = ball or f.support_ball
        if ball is None:
            raise ConfigError("a sampled atom needs a support ball")
        return cls(flavor, ball, f)

    # -- evaluation -----------------------------------------------------------
    def is_zero(self) -> bool:
        if self.grid is not None:
            return not np.any(self.grid.values)
        return len(self.pieces) == 0

    def __call__(self, ys):
        if self.grid is not None:
            return self.grid(ys)
        ys = np.asarray(ys, dtype=float)
        out = np.zeros(ys.shape if ys.ndim else (1,))
        flat = np.atleast_1d(ys)
        for lo, hi, v in self.pieces:
            a0, a1 = _coeffs(v)
            mask = (flat >= float(lo)) & (flat < float(hi))
            out[mask] = float(a0) + float(a1) * flat[mask]
        return out if ys.ndim else float(out[0])

    def value_at(self, y):
        """Exact pointwise value; piecewise payloads only."""
        if self.pieces is None:
            raise ConfigError("exact evaluation needs a piecewise payload")
        a0, a1 = _coeffs(_piece_value(self.pieces, y))
        return a0 if a1 == 0 else a0 + a1 * y

    def breakpoints(self) -> np.ndarray:
        if self.grid is not None:
            return self.grid.breakpoints()
        pts = sorted({float(p) for piece in self.pieces for p in piece[:2]})
        return np.asarray(pts, dtype=float)

    def support_hull(self):
        if self.grid is not None:
            b = self.grid.support_ball
            if b is None:
                return None
            return b.center - b.radius, b.center + b.radius
        if not self.pieces:
            return None
        return self.pieces[0][0], self.pieces[-1][1]

    def scale(self, factor) -> "Atom":
        if self.grid is not None:
            return Atom(self.flavor, self.ball, self.grid.scale(float(factor)),
                        m=self.m)
        return Atom(self.flavor, self.ball,
                    _scale_pieces(self.pieces, factor), m=self.m)

    def to_grid(self, per_piece: int = 24, jump: float = 1e-9) -> GridFunction:
        """Sampled stand-in; jumps become ramps of relative width `jump`."""
        if self.grid is not None:
            return self.grid
        if not self.pieces:
            raise ConfigError("cannot sample the zero atom")
        lo, hi = self.support_hull()
        eps = (float(hi) - float(lo)) * jump
        xs: list[float] = [float(lo) - eps]
        vals: list[float] = [0.0]
        prev_hi = None
        for plo, phi, v in self.pieces:
            a, b = float(plo), float(phi)
            if prev_hi is not None and a > prev_hi:
                xs.extend([prev_hi + eps, a - eps])
                vals.extend([0.0, 0.0])
            inner = np.linspace(a + eps, b - eps, per_piece)
            a0, a1 = _coeffs(v)
            xs.extend(inner.tolist())
            vals.extend((float(a0) + float(a1) * inner).tolist())
            prev_hi = b
        xs.append(float(hi) + eps)
        vals.append(0.0)
        return GridFunction(np.asarray(xs), np.asarray(vals), self.ball)

    # -- IO -------------------------------------------------------------------
    def to_json(self) -> dict:
        if self.pieces is None:
            raise ConfigError("only piecewise atoms serialize to atom JSON")
        if any(isinstance(v, (tuple, list)) for _, _, v in self.pieces):
            raise ConfigError("atom JSON carries constant pieces only")
        obj = {"flavor": self.flavor, "ball": self.ball.to_json(),
               "pieces": [{"from": _rational_str(lo), "to": _rational_str(hi),
                           "value": _rational_str(v)}
                          for lo, hi, v in self.pieces]}
        if self.m is not None:
            obj["m"] = self.m
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Atom":
        pieces = [(_parse_rational(p["from"]), _parse_rational(p["to"]),
                   _parse_rational(p["value"])) for p in obj["pieces"]]
        return cls(obj["flavor"], Ball.from_json(obj["ball"]), pieces,
                   m=obj.get("m"))

    def __repr__(self):
        kind = "grid" if self.grid is not None else f"{len(self.pieces)} pieces"
        return f"Atom({self.flavor}, ball={self.ball!r}, {kind})"


def moment(atom: Atom, power: int = 1):
    """int a(x) x^power dx, exact for piecewise payloads."""
    if atom.grid is not None:
        ys, ws = panel_rule(atom.grid.breakpoints(), order=16)
        return float(np.dot(ws, atom.grid(ys) * ys ** power))
    total = Fraction(0) if atom.exact else 0.0
    for lo, hi, v in atom.pieces:
        a0, a1 = _coeffs(v)
        if a0 != 0:
            total += a0 * _ipow(lo, hi, power)
        if a1 != 0:
            total += a1 * _ipow(lo, hi, power + 1)
    return total


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    flavor: str
    ok: bool
    support_ok: bool
    size_ok: bool
    cancellation_ok: bool
    size: float
    size_bound: float
    size_ratio: float
    cancellation_abs: float
    cancellation_cap: float
    l1_mass: float
    exact: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"flavor": self.flavor, "pass": self.ok,
                "support_ok": self.support_ok, "size_ok": self.size_ok,
                "cancellation_ok": self.cancellation_ok,
                "size": self.size, "size_bound": self.size_bound,
                "size_ratio": self.size_ratio,
                "cancellation_abs": self.cancellation_abs,
                "cancellation_cap": self.cancellation_cap,
                "l1_mass": self.l1_mass, "exact_arithmetic": self.exact,
                "failures": list(self.failures)}


def _support_ok(atom: Atom) -> bool:
    hull = atom.support_hull()
    if hull is None:
        return True
    lo, hi = float(hull[0]), float(hull[1])
    slack = 1e-12 * atom.ball.radius
    return (lo >= atom.ball.center - atom.ball.radius - slack
            and hi <= atom.ball.center + atom.ball.radius + slack)


def _piece_integrals(atom: Atom, alpha, hpow, hcoeff):
    """(cancellation, size squared, L1 mass) for piecewise payloads."""
    canc = Fraction(0) if atom.exact else 0.0
    size2 = 0.0
    l1 = Fraction(0) if atom.exact else 0.0
    for lo, hi, v in atom.pieces:
        a0, a1 = _coeffs(v)
        if a0 != 0:
            canc += a0 * hcoeff * _ipow(lo, hi, hpow + alpha)
        if a1 != 0:
            canc += a1 * hcoeff * _ipow(lo, hi, hpow + alpha + 1)
        q = alpha - hpow
        if a0 != 0:
            size2 += float(a0) ** 2 * float(_ipow(lo, hi, q)) / float(hcoeff)
        if a0 != 0 and a1 != 0:
            size2 += 2.0 * float(a0) * float(a1) \
                * float(_ipow(lo, hi, q + 1)) / float(hcoeff)
        if a1 != 0:
            size2 += float(a1) ** 2 * float(_ipow(lo, hi, q + 2)) / float(hcoeff)
        l1 += _abs_linear_int(lo, hi, a0, a1, alpha)
    return canc, size2, l1


def _grid_integrals(f: GridFunction, hfun, rho):
    ys, ws = panel_rule(f.breakpoints(), order=16)
    hv = np.asarray(hfun(ys), dtype=float)
    rv = np.asarray(rho(ys), dtype=float)
    fv = f(ys)
    canc = float(np.dot(ws, fv * hv * rv))
    size2 = float(np.dot(ws, fv * fv / hv * rv))
    l1 = float(np.dot(ws, np.abs(fv) * rv))
    return canc, size2, l1


def validate(atom: Atom, profile) -> ValidationReport:
    """Flavor-specific checks; returns data, never raises.

    Size carries a 1 + 1e-9 slack; the cancellation cap is
    1e-10 * ||a||_{L1(mu)} * sup_B h.  The zero atom passes vacuously.
    """
    space = profile.space
    if not space.is_radial:
        raise DomainError("atoms live on radial models")
    support_ok = _support_ok(atom)
    failures = [] if support_ok else ["support exceeds the declared ball"]

    if atom.flavor == "local_alpha2":
        m = atom.m
        target = [(Fraction(2) ** m, Fraction(2) ** (m + 1), Fraction(2) ** (-m))]
        match = atom.pieces is not None and [
            (Fraction(lo), Fraction(hi), Fraction(v))
            for lo, hi, v in atom.pieces] == target
        if not match:
            failures.append("payload is not exactly |I_m|^{-1} chi_{I_m}")
        l1 = float(_ipow(target[0][0], target[0][1], 0) * target[0][2]) \
            if match else 0.0
        return ValidationReport(
            flavor=atom.flavor, ok=support_ok and match, support_ok=support_ok,
            size_ok=match, cancellation_ok=match, size=0.0, size_bound=0.0,
            size_ratio=1.0, cancellation_abs=0.0, cancellation_cap=0.0,
            l1_mass=l1, exact=bool(atom.exact), failures=failures)

    alpha = space.base_density().power
    if atom.flavor == "classical_alpha1":
        hpow, hcoeff = 0.0, 1.0
        hfun = lambda y: np.ones_like(np.asarray(y, dtype=float))
        sup_h = 1.0
        mass_h = space.base_density().integral(
            max(space.interval[0], atom.ball.center - atom.ball.radius),
            atom.ball.center + atom.ball.radius)
        have_mono = True
    else:
        mono = profile.monomial()
        hfun = profile
        sup_h = profile.max_on_ball(atom.ball)
        mass_h = profile.weighted_measure(1.0).mass(atom.ball)
        have_mono = mono is not None
        if have_mono:
            hpow, hcoeff = mono.power, mono.coeff

    if atom.is_zero():
        return ValidationReport(
            flavor=atom.flavor, ok=support_ok, support_ok=support_ok,
            size_ok=True, cancellation_ok=True, size=0.0,
            size_bound=float(mass_h) ** -0.5 if mass_h > 0 else 0.0,
            size_ratio=0.0, cancellation_abs=0.0, cancellation_cap=0.0,
            l1_mass=0.0, exact=bool(atom.exact), failures=failures)

    exact_h = (have_mono and float(hpow).is_integer()
               and float(hcoeff).is_integer() and float(alpha).is_integer())
    if atom.pieces is not None and exact_h:
        canc, size2, l1 = _piece_integrals(
            atom, int(alpha), int(hpow),
            Fraction(int(hcoeff)) if atom.exact else float(hcoeff))
    else:
        canc, size2, l1 = _grid_integrals(
            atom.to_grid(), hfun, space.base_density())

    size = math.sqrt(max(size2, 0.0))
    bound = float(mass_h) ** -0.5
    size_ratio = size / bound
    size_ok = size_ratio <= 1.0 + SIZE_SLACK
    cap = CANCEL_CAP * float(l1) * float(sup_h)
    cancellation_ok = canc == 0 or abs(float(canc)) < cap
    if not size_ok:
        failures.append(f"size {size:.6g} exceeds bound {bound:.6g}")
    if not cancellation_ok:
        failures.append(
            f"cancellation {float(canc):.3e} not below cap {cap:.3e}")
    return ValidationReport(
        flavor=atom.flavor, ok=support_ok and size_ok and cancellation_ok,
        support_ok=support_ok, size_ok=size_ok,
        cancellation_ok=cancellation_ok, size=size, size_bound=bound,
        size_ratio=float(size_ratio), cancellation_abs=abs(float(canc)),
        cancellation_cap=cap, l1_mass=float(l1), exact=bool(atom.exact),
        failures=failures)


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    """f = sum_k coefficients[k] * atoms[k], with bookkeeping.

    residual records the L1(mu) mass of the terminal block that a
    depth-K truncation of the underlying infinite series would drop;
    the atom list itself reconstructs the input exactly.  normalization
    is the factor by which emitted atoms may exceed the validation size
    bound; dividing any emitted atom by it yields a valid atom.
    """
    coefficients: list
    atoms: list
    K: int
    residual: object
    chain: list | None = None
    normalization: float = 1.0
    taus: list | None = None

    def sum_abs(self):
        return sum(abs(c) for c in self.coefficients)

    def reconstruct(self, ys):
        ys = np.asarray(ys, dtype=float)
        out = np.zeros_like(ys)
        for lam, atom in zip(self.coefficients, self.atoms):
            out += float(lam) * atom(ys)
        return out

    def value_at(self, y):
        """Exact reconstruction value at a point (piecewise atoms only)."""
        total = 0
        for lam, atom in zip(self.coefficients, self.atoms):
            total = total + lam * atom.value_at(y)
        return total

    def to_json(self) -> dict:
        return {"coefficients": [_rational_str(c) for c in self.coefficients],
                "atoms": [a.to_json() for a in self.atoms],
                "K": self.K, "residual": _rational_str(self.residual),
                "sum_abs_coefficients": float(self.sum_abs()),
                "normalization": self.normalization,
                "chain": [[float(a), float(b)] for a, b in self.chain]
                if self.chain else None}


# uniform size ratio of the dyadic-ladder blocks b_k: their weighted L2
# norm times mu_h of the support hull is scale free
_LADDER_RATIO = math.sqrt(255.0 / 32.0 * math.log(2.0))


def decompose_local(m: int, K: int = 40) -> Decomposition:
    """Expand the unit dyadic indicator atom into h-cancelling blocks.

    Emits K blocks b_k = 2^k (tau_k chi_{I_{m+k}} - tau_{k+1} chi_{I_{m+k+1}})
    with coefficients 2^{-k}, tau_k = 2^{-m} 4^{-k}, plus the terminal
    unit atom on I_{m+K} weighted 2^{-K}; reconstruction is exact and
    each block kills the first weighted moment.
    """
    if K < 1:
        raise ConfigError("decompose_local needs K >= 1")
    coeffs: list = []
    out: list = []
    for k in range(K):
        j = m + k
        lo, mid, hi = Fraction(2) ** j, Fraction(2) ** (j + 1), Fraction(2) ** (j + 2)
        v = Fraction(2) ** (-m - k)
        pieces = [(lo, mid, v), (mid, hi, -v / 4)]
        ball = Ball(float((lo + hi) / 2), float((hi - lo) / 2))
        out.append(Atom.beta(pieces, ball))
        coeffs.append(Fraction(2) ** (-k))
    coeffs.append(Fraction(2) ** (-K))
    out.append(Atom.alpha2(m + K))
    return Decomposition(coefficients=coeffs, atoms=out, K=K,
                         residual=Fraction(2) ** (-K),
                         normalization=_LADDER_RATIO)


def _require_constant_pieces(atom: Atom) -> None:
    if atom.pieces is None:
        raise ConfigError("decompositions need piecewise payloads")
    if any(isinstance(v, (tuple, list)) for _, _, v in atom.pieces):
        raise ConfigError("decompositions handle constant pieces only")


def _dyadic_window(ball: Ball):
    """(m, lo, hi, pair) of the smallest dyadic window holding the ball."""
    lo = Fraction(ball.center) - Fraction(ball.radius)
    hi = Fraction(ball.center) + Fraction(ball.radius)
    if lo <= 0:
        raise UnsupportedGeometry("dyadic decompositions need support in (0, oo)")
    m = math.floor(math.log2(float(lo)))
    while Fraction(2) ** m > lo:
        m -= 1
    while Fraction(2) ** (m + 1) <= lo:
        m += 1
    if hi <= Fraction(2) ** (m + 1):
        return m, Fraction(2) ** m, Fraction(2) ** (m + 1), False
    if hi <= Fraction(2) ** (m + 2):
        return m, Fraction(2) ** m, Fraction(2) ** (m + 2), True
    raise UnsupportedGeometry(
        "support ball spans more than two adjacent dyadic intervals")


def _doubling_chain(q_lo, q_hi, w_lo, w_hi):
    """Q_0 subset ... subset Q_N = window by symmetric radius doubling.

    Clipping to the window keeps every length ratio at most 2.
    """
    chain = [(q_lo, q_hi)]
    c = (q_lo + q_hi) / 2
    r = (q_hi - q_lo) / 2
    while chain[-1] != (w_lo, w_hi):
        r *= 2
        nxt = (max(w_lo, c - r), min(w_hi, c + r))
        if nxt == chain[-1]:
            raise NotDecomposable("doubling chain stalled")  # pragma: no cover
        chain.append(nxt)
    return chain


def _terminal_alpha2(tau, m, pair):
    """Split tau * chi_window into unit dyadic atoms with coefficients."""
    coeffs, out = [], []
    for j in ([m, m + 1] if pair else [m]):
        lam = tau * (Fraction(2) ** (j + 1) - Fraction(2) ** j)
        if lam != 0:
            coeffs.append(lam)
            out.append(Atom.alpha2(j))
    return coeffs, out


def _ball_of(q):
    return Ball(float((q[0] + q[1]) / 2), float((q[1] - q[0]) / 2))


def _beta_size_ratio(pieces, ball) -> float:
    """Size ratio of a piecewise block against the h(x) = x bound."""
    size2 = sum(float(v) * float(v) * _ipow(lo, hi, -1) for lo, hi, v in pieces)
    lo_b = Fraction(ball.center) - Fraction(ball.radius)
    hi_b = Fraction(ball.center) + Fraction(ball.radius)
    return math.sqrt(max(size2, 0.0) * float(_ipow(max(lo_b, 0), hi_b, 1)))


def decompose_classical(a: Atom) -> Decomposition:
    """Rewrite a classical atom as h-cancelling blocks plus a dyadic tail.

    Follows the interval chain from the support ball up to its dyadic
    window; block k carries the coefficient 2^{k-m} |B|.  Emitted blocks
    satisfy the weighted cancellation exactly; their size bound holds
    after division by the reported normalization.
    """
    if a.flavor != "classical_alpha1":
        raise InvalidAtom("decompose_classical expects a classical_alpha1 atom")
    _require_constant_pieces(a)
    identity = _IdentityProfile.get()
    report = validate(a, identity)
    if not report.ok:
        raise InvalidAtom("; ".join(report.failures))
    if a.is_zero():
        return Decomposition([], [], K=0, residual=Fraction(0))
    m, w_lo, w_hi, pair = _dyadic_window(a.ball)
    q0 = (Fraction(a.ball.center) - Fraction(a.ball.radius),
          Fraction(a.ball.center) + Fraction(a.ball.radius))
    chain = _doubling_chain(q0[0], q0[1], w_lo, w_hi)
    b_len = q0[1] - q0[0]

    mom = moment(a, 1)
    tau = mom / _ipow(q0[0], q0[1], 1)
    taus = [tau]
    coeffs: list = []
    out: list = []
    ratios = [0.0]

    lam0 = Fraction(2) ** (-m) * b_len
    head = _subtract_indicator(a.pieces, q0[0], q0[1], tau)
    if head:
        coeffs.append(lam0)
        out.append(Atom.beta(_scale_pieces(head, 1 / lam0), _ball_of(q0)))
        ratios.append(_beta_size_ratio(out[-1].pieces, out[-1].ball))
    for k in range(1, len(chain)):
        prev, cur = chain[k - 1], chain[k]
        tau_next = tau * _ipow(prev[0], prev[1], 1) / _ipow(cur[0], cur[1], 1)
        lam = Fraction(2) ** (k - m) * b_len
        block = _subtract_indicator([(prev[0], prev[1], tau)],
                                    cur[0], cur[1], tau_next)
        if block:
            coeffs.append(lam)
            out.append(Atom.beta(_scale_pieces(block, 1 / lam), _ball_of(cur)))
            ratios.append(_beta_size_ratio(out[-1].pieces, out[-1].ball))
        tau = tau_next
        taus.append(tau)
    term_coeffs, term_atoms = _terminal_alpha2(tau, m, pair)
    coeffs.extend(term_coeffs)
    out.extend(term_atoms)
    return Decomposition(coefficients=coeffs, atoms=out, K=len(out),
                         residual=Fraction(0), chain=chain,
                         normalization=max(max(ratios), 1.0), taus=taus)


def decompose_beta(b: Atom) -> Decomposition:
    """Rewrite an h-cancelling atom as classical atoms plus a dyadic tail.

    Mirror construction: the plain integral s = int b dx is preserved
    down the chain (tau_k |Q_k| = s), the terminal contributes s split
    over the window's dyadic intervals, and every emitted classical
    atom is valid as emitted.
    """
    if b.flavor != "mu_h_beta":
        raise InvalidAtom("decompose_beta expects a mu_h_beta atom")
    _require_constant_pieces(b)
    identity = _IdentityProfile.get()
    report = validate(b, identity)
    if not report.ok:
        raise InvalidAtom("; ".join(report.failures))
    if b.is_zero():
        return Decomposition([], [], K=0, residual=Fraction(0))
    m, w_lo, w_hi, pair = _dyadic_window(b.ball)
    q0 = (Fraction(b.ball.center) - Fraction(b.ball.radius),
          Fraction(b.ball.center) + Fraction(b.ball.radius))
    chain = _doubling_chain(q0[0], q0[1], w_lo, w_hi)

    s = moment(b, 0)
    tau = s / (q0[1] - q0[0])
    taus = [tau]
    coeffs: list = []
    out: list = []

    head = _subtract_indicator(b.pieces, q0[0], q0[1], tau)
    if head:
        r2 = sum(v * v * (hi - lo) for lo, hi, v in head) * (q0[1] - q0[0])
        lam0 = Fraction(1) if (s == 0 and r2 <= 1) else _sqrt_upper(r2)
        coeffs.append(lam0)
        out.append(Atom.classical(_scale_pieces(head, 1 / lam0), _ball_of(q0)))
    if s != 0:
        for k in range(1, len(chain)):
            prev, cur = chain[k - 1], chain[k]
            tau_next = tau * (prev[1] - prev[0]) / (cur[1] - cur[0])
            block = _subtract_indicator([(prev[0], prev[1], tau)],
                                        cur[0], cur[1], tau_next)
            if block:
                r2 = sum(v * v * (hi - lo) for lo, hi, v in block) \
                    * (cur[1] - cur[0])
                lam = _sqrt_upper(r2)
                coeffs.append(lam)
                out.append(Atom.classical(_scale_pieces(block, 1 / lam),
                                          _ball_of(cur)))
            tau = tau_next
            taus.append(tau)
        term_coeffs, term_atoms = _terminal_alpha2(tau, m, pair)
        coeffs.extend(term_coeffs)
        out.extend(term_atoms)
    return Decomposition(coefficients=coeffs, atoms=out, K=len(out),
                         residual=Fraction(0), chain=chain, taus=taus)


class _IdentityProfile:
    """Lazy singleton of the h(x) = x weight to avoid import cycles."""
    _cached = None

    @classmethod
    def get(cls):
        if cls._cached is None:
            from .kernels import HarmonicProfile
            cls._cached = HarmonicProfile.identity()
        return cls._cached


# ---------------------------------------------------------------------------
# greedy atomic-norm bound
# ---------------------------------------------------------------------------

def _quad_on(f: GridFunction, extra=None, order: int = 16):
    breaks = f.breakpoints() if extra is None \
        else merge_breaks(f.breakpoints(), np.asarray(extra, dtype=float))
    return panel_rule(breaks, order)


def atomic_norm_upper(f: GridFunction, profile, K: int = 40,
                      tol: float = 1e-9) -> float:
    """Greedy upper bound for the weighted atomic norm of f.

    Splits off a weight-cancelling head block on the support ball, runs
    the interval chain to the dyadic window, then the dyadic ladder to
    depth K; each block is counted at the weight that makes it a valid
    atom.  A sampled dyadic indicator is recognized and routed through
    the exact ladder expansion instead.  The leftover ladder mass must
    drop below tol or the input is declared not decomposable here.
    """
    ball = f.support_ball
    if ball is None:
        return 0.0
    space = profile.space
    rho = space.base_density()
    m, w_lo, w_hi, pair = _dyadic_window(ball)

    nz = f.values[f.values != 0.0]
    hull = ball.center - ball.radius, ball.center + ball.radius
    if (nz.size and np.ptp(nz) <= 1e-9 * abs(nz[0]) and not pair
            and abs(hull[0] - float(w_lo)) <= 1e-9 * float(w_lo)
            and abs(hull[1] - float(w_hi)) <= 1e-9 * float(w_hi)):
        coeff = abs(float(nz[0])) * float(w_hi - w_lo)
        residual = coeff * 2.0 ** (-K)
        if residual > tol:
            raise NotDecomposable(
                f"ladder residual {residual:.3e} exceeds {tol:.1e} at K={K}")
        return coeff * (2.0 - 2.0 ** (-K))

    w1 = profile.weighted_measure(1.0)
    w2 = profile.weighted_measure(2.0)
    ys, ws = _quad_on(f)
    hv = np.asarray(profile(ys), dtype=float)
    rv = np.asarray(rho(ys), dtype=float)
    fv = f(ys)

    c0 = float(np.dot(ws, fv * hv * rv)) / w2.mass(ball)
    head2 = float(np.dot(ws, (fv - c0 * hv) ** 2 / hv * rv))
    total = math.sqrt(max(head2, 0.0) * w1.mass(ball))

    chain = _doubling_chain(Fraction(ball.center) - Fraction(ball.radius),
                            Fraction(ball.center) + Fraction(ball.radius),
                            w_lo, w_hi)
    sigma = c0
    for k in range(1, len(chain)):
        prev, cur = chain[k - 1], chain[k]
        mh_prev, mh_cur = w1.mass(_ball_of(prev)), w1.mass(_ball_of(cur))
        sig_next = sigma * w2.mass(_ball_of(prev)) / w2.mass(_ball_of(cur))
        block2 = (sigma * sigma - 2.0 * sigma * sig_next) * mh_prev \
            + sig_next * sig_next * mh_cur
        total += math.sqrt(max(block2, 0.0) * mh_cur)
        sigma = sig_next

    residual = 0.0
    for j0 in ([m, m + 1] if pair else [m]):
        s = sigma
        for j in range(j0, j0 + K):
            cur = (Fraction(2) ** j, Fraction(2) ** (j + 1))
            nxt = (Fraction(2) ** (j + 1), Fraction(2) ** (j + 2))
            s_next = s * w2.mass(_ball_of(cur)) / w2.mass(_ball_of(nxt))
            block2 = s * s * w1.mass(_ball_of(cur)) \
                + s_next * s_next * w1.mass(_ball_of(nxt))
            hull_ball = _ball_of((cur[0], nxt[1]))
            total += math.sqrt(max(block2, 0.0) * w1.mass(hull_ball))
            s = s_next
        tail = (Fraction(2) ** (j0 + K), Fraction(2) ** (j0 + K + 1))
        residual += abs(s) * w1.mass(_ball_of(tail))
    if residual > tol:
        raise NotDecomposable(
            f"ladder residual {residual:.3e} exceeds {tol:.1e} at K={K}")
    return float(total)


# ---------------------------------------------------------------------------
# randomized atoms for property tests
# ---------------------------------------------------------------------------

def random_beta_atom(rng, profile=None, n_samples: int = 121,
                     ball: Ball | None = None) -> Atom:
    """A validated sampled atom with machine-exact weighted cancellation."""
    profile = profile or _IdentityProfile.get()
    space = profile.space
    lo_dom = space.interval[0]
    if ball is None:
        # radius <= 0.3 c keeps the ball inside two adjacent dyadic
        # intervals, so decomposition routines accept these atoms too
        c = lo_dom + float(rng.uniform(1.0, 6.0))
        r = float(rng.uniform(0.15, 0.3)) * (c - lo_dom)
        ball = Ball(c, r)
    c, r = ball.center, ball.radius
    xs = np.linspace(c - r, c + r, n_samples)
    vals = rng.standard_normal(n_samples)
    win = np.hanning(9)
    vals = np.convolve(vals, win / win.sum(), mode="same")
    vals[0] = vals[-1] = 0.0

    rho = space.base_density()
    ys, ws = panel_rule(xs, order=16)
    hv = np.asarray(profile(ys), dtype=float)
    rv = np.asarray(rho(ys), dtype=float)
    wh = ws * hv * rv
    j = float(np.dot(wh, hv))
    for _ in range(2):
        f = GridFunction(xs, vals, ball)
        i = float(np.dot(wh, f(ys)))
        vals = vals - (i / j) * xs
    f = GridFunction(xs, vals, ball)
    size = math.sqrt(float(np.dot(ws, f(ys) ** 2 / hv * rv))
                     * profile.weighted_measure(1.0).mass(ball))
    vals = vals * ((1.0 - 1e-12) / size)
    return Atom.from_grid("mu_h_beta", GridFunction(xs, vals, ball), ball)
