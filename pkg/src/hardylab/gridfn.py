"""Sampled functions on grids, with CSV round-tripping.

A GridFunction is a one-dimensional sample set interpreted as the
piecewise-linear interpolant through its points and zero outside the
sample range.  The CSV schema is a header row ``x,value`` followed by
rows with strictly increasing first column.  Product grids in dimension
n use the header ``x1,...,xn,value`` with one row per grid node in
lexicographic order; they interpolate multilinearly.
"""

from __future__ import annotations

import csv
import math
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .quadrature import gauss_rule
from .spaces import Ball

__all__ = ["GridFunction", "GridFunctionND", "read_grid_csv"]


class GridFunction:
    """Piecewise-linear interpolant of samples, zero outside the sample range."""

    def __init__(self, xs, values, ball: Ball | None = None):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
            raise ConfigError("grid function needs matching 1-d arrays of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise ConfigError("grid abscissae must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(values))):
            raise ConfigError("grid function samples must be finite")
        if ball is not None:
            nz = xs[values != 0.0]
            if nz.size and (nz.min() < ball.center - ball.radius - 1e-12
                            or nz.max() > ball.center + ball.radius + 1e-12):
                raise ConfigError("declared support ball misses nonzero samples")
        self.xs = xs
        self.values = values
        self.ball = ball

    # -- evaluation ---------------------------------------------------------
    def __call__(self, y):
        return np.interp(np.asarray(y, dtype=float), self.xs, self.values,
                         left=0.0, right=0.0)

    def breakpoints(self) -> np.ndarray:
        return self.xs

    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.xs)))

    @property
    def support_ball(self) -> Ball | None:
        """Declared ball, else the hull of the nonzero samples."""
        if self.ball is not None:
            return self.ball
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return None
        a = self.xs[max(nz[0] - 1, 0)]
        b = self.xs[min(nz[-1] + 1, self.xs.size - 1)]
        return Ball((a + b) / 2.0, max((b - a) / 2.0, 1e-300))

    def support_scale(self) -> float:
        ball = self.support_ball
        if ball is None:
            raise ConfigError("grid function is identically zero")
        return ball.radius

    # -- algebra --------------------------------------------------------------
    def scale(self, factor: float) -> "GridFunction":
        """Pointwise multiple."""
        b = self.ball
        return GridFunction(self.xs, self.values * factor, b)

    def dilate(self, lam: float) -> "GridFunction":
        """L^1-normalized dilation x -> f(x / lam) / lam."""
        if lam <= 0:
            raise ConfigError("dilation factor must be positive")
        b = self.ball
        nb = Ball(b.center * lam, b.radius * lam) if b else None
        return GridFunction(self.xs * lam, self.values / lam, nb)

    def plus(self, other: "GridFunction") -> "GridFunction":
        """Sum, resampled on the union grid."""
        xs = np.union1d(self.xs, other.xs)
        return GridFunction(xs, self(xs) + other(xs))

    # -- IO --------------------------------------------------------------------
    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            for x, v in zip(self.xs, self.values):
                writer.writerow([repr(float(x)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        gf = read_grid_csv(path)
        if not isinstance(gf, GridFunction):
            raise ConfigError(f"{path}: expected a 1-d grid (header x,value)")
        return gf


class GridFunctionND:
    """Multilinear interpolant on a product grid, zero outside the box."""

    def __init__(self, axes: Sequence[np.ndarray], values: np.ndarray):
        axes = [np.asarray(a, dtype=float) for a in axes]
        values = np.asarray(values, dtype=float)
        if values.shape != tuple(len(a) for a in axes):
            raise ConfigError("value array shape must match axis lengths")
        for a in axes:
            if a.size < 2 or not np.all(np.diff(a) > 0):
                raise ConfigError("axes must be strictly increasing, length >= 2")
        self.axes = axes
        self.values = values

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def __call__(self, pts):
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator(self.axes, self.values,
                                         bounds_error=False, fill_value=0.0)
        return interp(np.asarray(pts, dtype=float))

    def weighted_norm(self, p: float, density=None, order: int = 4) -> float:
        """(Int |f|^p density dx)^{1/p} by cellwise Gauss quadrature."""
        if not p >= 1.0:
            raise ConfigError("weighted_norm needs p >= 1")
        gx, gw = gauss_rule(order)
        node_axes, weight_axes = [], []
        for a in self.axes:
            lo, h = a[:-1], np.diff(a)
            nodes = (lo[:, None] + (gx[None, :] + 1.0) * h[:, None] / 2.0).ravel()
            wts = (np.broadcast_to(gw[None, :], (h.size, order)) * h[:, None] / 2.0).ravel()
            node_axes.append(nodes)
            weight_axes.append(wts)
        mesh = np.meshgrid(*node_axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = np.abs(self(pts)) ** p
        if density is not None:
            vals = vals * np.asarray(density(pts), dtype=float)
        wmesh = np.meshgrid(*weight_axes, indexing="ij")
        w = np.ones_like(wmesh[0])
        for wm in wmesh:
            w = w * wm
        return float(np.dot(w.ravel(), vals) ** (1.0 / p))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(self.ndim)] + ["value"])
            mesh = np.meshgrid(*self.axes, indexing="ij")
            flat = [m.ravel() for m in mesh]
            for idx in range(flat[0].size):
                writer.writerow([repr(float(c[idx])) for c in flat]
                                + [repr(float(self.values.ravel()[idx]))])


def read_grid_csv(path):
    """Read a grid CSV; returns GridFunction or GridFunctionND by header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ConfigError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if header == ["x", "value"]:
        data = np.asarray(rows, dtype=float)
        if data.size == 0:
            raise ConfigError(f"{path}: no data rows")
        xs, vals = data[:, 0], data[:, 1]
        if not np.all(np.diff(xs) > 0):
            bad = int(np.nonzero(np.diff(xs) <= 0)[0][0]) + 3
            raise ConfigError(f"{path}:{bad}: first column must be strictly increasing")
        return GridFunction(xs, vals)
    if header[-1] == "value" and all(h == f"x{i + 1}" for i, h in enumerate(header[:-1])):
        n = len(header) - 1
        data = np.asarray(rows, dtype=float)
        axes = [np.unique(data[:, i]) for i in range(n)]
        shape = tuple(len(a) for a in axes)
        if math.prod(shape) != data.shape[0]:
            raise ConfigError(f"{path}: rows do not fill the product grid")
        values = np.full(shape, np.nan)
        idx = tuple(np.searchsorted(axes[i], data[:, i]) for i in range(n))
        values[idx] = data[:, n]
        if np.any(np.isnan(values)):
            raise ConfigError(f"{path}: duplicate or missing grid nodes")
        return GridFunctionND(axes, values)
    raise ConfigError(f"{path}: header must be x,value or x1,...,xn,value")
