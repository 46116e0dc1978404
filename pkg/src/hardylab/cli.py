"""Command-line surface.

Subcommands wrap one module operation each and write a JSON report plus
a CSV of the per-sample numbers next to it; --figures additionally
renders a PNG from the same rows.  Reports embed the full run
configuration, so re-running the printed config reproduces the file
byte for byte apart from the timestamp.

Exit codes: 0 the certified claim passed, 1 it failed (or could not be
certified on this input), 2 configuration or usage error.  The env var
HARDYLAB_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._version import __version__
from .atoms import Atom, decompose_beta, decompose_classical, decompose_local
from .doob import (DoobKernel, Certificate, gaussian_sandwich, holder_probe,
                   verify_conservative, verify_harmonicity)
from .errors import (ConfigError, DegenerateBall, DegenerateFit,
                     DivergentIntegral, DomainError, InvalidAtom,
                     NonFiniteMass, NotDecomposable, OutsideDomain,
                     QuadratureFailure, ToolkitError, UnsupportedGeometry)
from .functionals import (area_function, bmo_local, duality_pair, g_function,
                          l1_norm, maximal, output_grid)
from .gridfn import read_grid_csv
from .kernels import HarmonicProfile, HeatKernel
from .spaces import Ball, doubling_constant
from .weights import ap_sup

USAGE_ERRORS = (ConfigError, DomainError, OutsideDomain, UnsupportedGeometry,
                NonFiniteMass, ValueError, KeyError, FileNotFoundError)
FAILURE_ERRORS = (InvalidAtom, NotDecomposable, DegenerateFit, DegenerateBall,
                  DivergentIntegral, QuadratureFailure)


def _utcnow() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# spec strings: "name" or "name:key=val,key=val"
# ---------------------------------------------------------------------------

def _split_spec(spec: str):
    name, _, tail = spec.partition(":")
    params = {}
    if tail:
        for part in tail.split(","):
            key, _, val = part.partition("=")
            if not val:
                raise ConfigError(f"malformed spec parameter {part!r} in {spec!r}")
            params[key.strip()] = float(val)
    return name.strip().lower(), params


def parse_kernel(spec: str) -> HeatKernel:
    name, params = _split_spec(spec)
    if name == "half-line-dirichlet":
        return HeatKernel.half_line_dirichlet()
    if name == "half-space":
        return HeatKernel.half_space_dirichlet(int(params.get("n", 2)))
    if name == "bessel-neumann":
        return HeatKernel.bessel_neumann(params.get("alpha", 2.0))
    raise ConfigError(
        f"unknown space {spec!r}; expected half-line-dirichlet, "
        "half-space:n=N, or bessel-neumann:alpha=A")


def parse_profile(spec: str | None, kernel: HeatKernel | None = None) -> HarmonicProfile:
    if spec is None or spec == "natural":
        return kernel.natural_profile() if kernel else HarmonicProfile.identity()
    name, params = _split_spec(spec)
    if name == "identity":
        return HarmonicProfile.identity()
    if name == "constant":
        return HarmonicProfile.constant(kernel.space if kernel else None)
    if name == "half-space-normal":
        return HarmonicProfile.half_space_normal(int(params.get("n", 2)))
    if name == "exterior-log":
        return HarmonicProfile.exterior_log()
    if name == "exterior-power":
        return HarmonicProfile.exterior_power(int(params.get("n", 3)))
    if name == "inverse-square":
        return HarmonicProfile.inverse_square_power(
            int(params.get("n", 3)), params.get("gamma", 0.0))
    if name == "bessel-power":
        return HarmonicProfile.bessel_power(params.get("alpha", 0.5))
    if name == "bessel-exterior":
        return HarmonicProfile.bessel_exterior(params.get("alpha", 2.0))
    raise ConfigError(f"unknown profile {spec!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated floats, got {text!r}") from exc


def _parse_ball(text: str) -> Ball:
    vals = _floats(text)
    if len(vals) != 2:
        raise ConfigError(f"--ball wants 'center,radius', got {text!r}")
    return Ball(vals[0], vals[1])


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _config_dict(args, extra=None) -> dict:
    cfg = {
        "space": getattr(args, "space", None),
        "profile": getattr(args, "profile", None),
        "p": getattr(args, "p", None),
        "tol": getattr(args, "tol", None),
        "seed": getattr(args, "seed", 0),
        "grid_points": getattr(args, "grid_points", None),
        "time_grid": getattr(args, "time_grid", None),
        "K": getattr(args, "K", None),
    }
    if extra:
        cfg.update(extra)
    return cfg


def _emit(args, command: str, plot_kind: str, title: str, result: dict,
          passed: bool, columns, rows, extra_config=None) -> int:
    out = Path(args.out) if args.out else Path(f"hardylab-{command}.json")
    report = {
        "schema_version": 1,
        "command": command,
        "config": _config_dict(args, extra_config),
        "result": result,
        "pass": bool(passed),
        "version": __version__,
        "timestamp": _utcnow(),
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    csv_path = out.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)
    if getattr(args, "figures", False):
        from .plots import render
        render(plot_kind, columns, rows, title, out.with_suffix(".png"))
    print(f"{command}: {'pass' if passed else 'FAIL'} -> {out}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    kernel = parse_kernel(args.space)
    profile = parse_profile(args.profile, kernel)
    tol = args.tol if args.tol is not None else 1e-6
    if tol <= 0:
        raise ConfigError("--tol must be positive")
    times = _floats(args.time_grid) if args.time_grid else None
    n = args.grid_points

    if args.claim == "harmonic":
        cert = verify_harmonicity(
            kernel, profile, times or [0.1, 1.0, 10.0],
            np.geomspace(0.25, 4.0, n).tolist() if n else [0.25, 1.0, 4.0],
            tol=tol)
    elif args.claim == "conservative":
        dk = DoobKernel(kernel, profile)
        cert = verify_conservative(
            dk, times or [0.1, 1.0, 10.0],
            np.geomspace(0.25, 4.0, n).tolist() if n else [0.25, 1.0, 4.0],
            tol=tol)
    elif args.claim == "sandwich":
        dk = DoobKernel(kernel, profile)
        cert = gaussian_sandwich(
            dk, np.geomspace(0.1, 10.0, n or 8).tolist(),
            times or np.geomspace(1e-2, 1e2, 5).tolist(),
            ratio_ceiling=args.ceiling)
    elif args.claim == "holder":
        dk = DoobKernel(kernel, profile)
        t = (times or [1.0])[0]
        offsets = np.concatenate([-np.geomspace(1e-3, 0.3, 8),
                                  np.geomspace(1e-3, 0.3, 8)])
        cert = holder_probe(dk, t, 1.0, 1.5, offsets.tolist(), floor=args.floor)
    elif args.claim == "doubling":
        profile_m = profile.weighted_measure(2.0)
        if not kernel.space.is_radial:
            raise ConfigError("doubling check runs on radial models")
        centers = np.geomspace(0.5, 8.0, n or 6)
        radii = np.geomspace(0.125, 2.0, n or 6)
        rows = []
        worst = 0.0
        for c in centers:
            for r in radii:
                ratio = doubling_constant(profile_m, [float(c)], [float(r)])
                rows.append([float(c), float(r), ratio])
                worst = max(worst, ratio)
        cert = Certificate(
            claim="weighted measure is doubling on the sampled family",
            grid={"centers": centers.tolist(), "radii": radii.tolist(),
                  "profile": profile.to_json()},
            constants={"doubling_constant": worst},
            tolerance=args.ceiling,
            passed=bool(math.isfinite(worst) and 0 < worst <= args.ceiling),
            samples={"columns": ["center", "radius", "ratio"], "rows": rows},
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown claim {args.claim!r}")

    samples = cert.samples or {"columns": [], "rows": []}
    return _emit(args, f"verify-{args.claim}", args.claim, cert.claim,
                 cert.to_json(), cert.passed,
                 samples["columns"], samples["rows"])


def cmd_ap(args) -> int:
    profile = parse_profile(args.profile)
    p = args.p if args.p is not None else 2.0
    centers = _floats(args.centers) if args.centers else \
        np.geomspace(0.5, 8.0, args.grid_points or 5).tolist()
    radii = _floats(args.radii) if args.radii else \
        np.geomspace(0.1, 4.0, args.grid_points or 5).tolist()
    report = ap_sup(profile, p, centers, radii, ceiling=args.ceiling)
    samples = report.samples or {"columns": [], "rows": []}
    return _emit(args, "ap", "ap", f"A_p characteristic, p = {p}",
                 report.to_json(), report.passed,
                 samples["columns"], samples["rows"],
                 extra_config={"centers": centers, "radii": radii})


def cmd_norm(args) -> int:
    f = read_grid_csv(args.f)
    if not hasattr(f, "support_ball"):
        raise ConfigError("norm expects a one-dimensional x,value CSV")
    profile = parse_profile(args.profile)
    if args.functional == "bmo":
        ball = _parse_ball(args.ball) if args.ball else f.support_ball
        if ball is None:
            raise ConfigError("the sampled function has empty support")
        res = bmo_local(f, profile, ball)
        xs = f.xs[(f.xs >= ball.center - ball.radius)
                  & (f.xs <= ball.center + ball.radius)]
        hv = np.asarray(profile(xs), dtype=float)
        rows = [[float(x), float(f(x)), float(res.c_star * h)]
                for x, h in zip(xs, hv)]
        return _emit(args, "norm-bmo", "norm", "local mean oscillation",
                     res.to_json(), True, ["x", "g", "c_star_h"], rows,
                     extra_config={"f": str(args.f), "functional": "bmo"})

    # maximal/g/s act through the space's own semigroup; the profile
    # enters only the bmo branch above
    kernel = parse_kernel(args.space) if args.space else HeatKernel.half_line_dirichlet()
    xs = output_grid(f, lo=kernel.space.interval[0],
                     per_decade=args.grid_points or 24)
    times = _floats(args.time_grid) if args.time_grid else None
    if args.functional == "maximal":
        vals = maximal(f, kernel, xs, times=times)
    elif args.functional == "g":
        vals = g_function(f, kernel, xs, times=times)
    else:
        vals = area_function(f, kernel, xs, times=times)
    norm = l1_norm(xs, vals, kernel.space.base_density())
    rows = [[float(x), float(v)] for x, v in zip(xs, vals)]
    result = {"functional": args.functional, "l1_norm": norm,
              "n_outputs": len(rows), "kernel": kernel.to_json()}
    return _emit(args, f"norm-{args.functional}", "norm",
                 f"{args.functional} functional", result,
                 math.isfinite(norm), ["x", "value"], rows,
                 extra_config={"f": str(args.f)})


def cmd_atomize(args) -> int:
    if args.mode == "local":
        dec = decompose_local(args.m, args.K)
    else:
        if not args.atom:
            raise ConfigError(f"--mode {args.mode} needs --atom FILE")
        with open(args.atom, encoding="utf-8") as fh:
            atom = Atom.from_json(json.load(fh))
        dec = decompose_classical(atom) if args.mode == "classical" \
            else decompose_beta(atom)
    result = dec.to_json()
    if isinstance(dec.sum_abs(), Fraction):
        result["sum_abs_exact"] = str(dec.sum_abs())
        result["residual_exact"] = str(dec.residual)
    rows = []
    for k, (lam, atom) in enumerate(zip(dec.coefficients, dec.atoms)):
        hull = atom.support_hull() or (math.nan, math.nan)
        rows.append([k, float(lam), atom.flavor,
                     float(hull[0]), float(hull[1])])
    return _emit(args, "atomize", "atomize",
                 f"{args.mode} decomposition", result, True,
                 ["k", "coefficient", "flavor", "support_lo", "support_hi"],
                 rows, extra_config={"mode": args.mode, "m": args.m,
                                     "atom": args.atom})


def cmd_pair(args) -> int:
    with open(args.atom, encoding="utf-8") as fh:
        atom = Atom.from_json(json.load(fh))
    g = read_grid_csv(args.g)
    profile = parse_profile(args.profile)
    tol = args.tol if args.tol is not None else 1e-6
    rep = duality_pair(atom, g, profile, tol=tol)
    ys = np.union1d(atom.breakpoints(), g.xs)
    lo = atom.ball.center - atom.ball.radius
    hi = atom.ball.center + atom.ball.radius
    ys = ys[(ys >= lo) & (ys <= hi)]
    rows = [[float(y), float(atom(y)), float(g(y))] for y in ys]
    return _emit(args, "pair", "pair", "atom-function pairing",
                 rep.to_json(), rep.passed, ["x", "atom", "g"], rows,
                 extra_config={"atom": str(args.atom), "g": str(args.g)})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sp, *, space=False, space_required=False):
    if space:
        sp.add_argument("--space", required=space_required,
                        help="kernel family, e.g. half-line-dirichlet, "
                             "half-space:n=2, bessel-neumann:alpha=2")
    sp.add_argument("--profile", help="harmonic weight, e.g. identity, "
                                      "constant, natural, bessel-power:alpha=0.5")
    sp.add_argument("--p", type=float, help="exponent for weight quantities")
    sp.add_argument("--tol", type=float, help="certification tolerance")
    sp.add_argument("--out", help="JSON report path (CSV written alongside)")
    sp.add_argument("--seed", type=int, default=0, help="recorded in the report")
    sp.add_argument("--grid-points", type=int, dest="grid_points",
                    help="sample count for default grids")
    sp.add_argument("--time-grid", dest="time_grid",
                    help="comma-separated times")
    sp.add_argument("--K", type=int, default=40, help="series truncation depth")
    sp.add_argument("--figures", action="store_true",
                    help="render a PNG next to the report")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hardylab",
        description="Certificates and functionals for weighted heat kernels.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one numerical certificate")
    v.add_argument("claim", choices=["harmonic", "conservative", "sandwich",
                                     "holder", "doubling"])
    _add_common(v, space=True, space_required=True)
    v.add_argument("--ceiling", type=float, default=1e4,
                   help="ratio ceiling for sandwich/doubling")
    v.add_argument("--floor", type=float, default=0.5,
                   help="exponent floor for the holder probe")
    v.set_defaults(fn=cmd_verify)

    a = sub.add_parser("ap", help="Muckenhoupt characteristic of 1/h")
    _add_common(a)
    a.add_argument("--centers", help="comma-separated ball centers")
    a.add_argument("--radii", help="comma-separated ball radii")
    a.add_argument("--ceiling", type=float, default=100.0)
    a.set_defaults(fn=cmd_ap)

    n = sub.add_parser("norm", help="functional norms of a sampled function")
    n.add_argument("functional", choices=["maximal", "g", "s", "bmo"])
    n.add_argument("--f", required=True, help="input CSV (x,value)")
    _add_common(n, space=True)
    n.add_argument("--ball", help="center,radius for the bmo window")
    n.set_defaults(fn=cmd_norm)

    z = sub.add_parser("atomize", help="constructive atom re-decompositions")
    z.add_argument("--mode", choices=["local", "classical", "beta"],
                   required=True)
    z.add_argument("--m", type=int, default=0, help="dyadic index for local mode")
    z.add_argument("--atom", help="Atom JSON input for classical/beta")
    _add_common(z)
    z.set_defaults(fn=cmd_atomize)

    d = sub.add_parser("pair", help="pair an atom against a sampled function")
    d.add_argument("--atom", required=True, help="Atom JSON")
    d.add_argument("--g", required=True, help="function CSV (x,value)")
    _add_common(d)
    d.set_defaults(fn=cmd_pair)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FAILURE_ERRORS as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
