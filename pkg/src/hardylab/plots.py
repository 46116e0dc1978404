"""Figure rendering for CLI reports.

Each report kind gets one PNG drawn from the same rows that land in the
delimited output, so the figure never shows anything the CSV does not.
Backend is forced to Agg; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render"]


def _column(rows, idx):
    return np.asarray([float(r[idx]) for r in rows])


def _fig(title):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.set_title(title, fontsize=10)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _deviation_plot(columns, rows, ycol, title, path, refline=None):
    fig, ax = _fig(title)
    ts = _column(rows, 0)
    ys = _column(rows, ycol)
    for x in sorted({r[1] if not isinstance(r[1], list) else tuple(r[1])
                     for r in rows}):
        mask = [r[1] == x or (isinstance(r[1], list) and tuple(r[1]) == x)
                for r in rows]
        mask = np.asarray(mask)
        order = np.argsort(ts[mask])
        ax.plot(ts[mask][order], ys[mask][order], "o-", label=f"x = {x}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(columns[ycol])
    if refline is not None:
        ax.axhline(refline, color="k", lw=0.8, ls="--")
    ax.legend(fontsize=7)
    _save(fig, path)


def _sandwich_plot(columns, rows, title, path):
    fig, ax = _fig(title)
    low = _column(rows, 3)
    up = _column(rows, 4)
    ax.hist(np.log10(low[low > 0]), bins=40, alpha=0.6, label="lower envelope ratio")
    ax.hist(np.log10(up[up > 0]), bins=40, alpha=0.6, label="upper envelope ratio")
    ax.set_xlabel("log10 ratio")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)
    _save(fig, path)


def _holder_plot(columns, rows, title, path):
    fig, ax = _fig(title)
    s = np.abs(_column(rows, 0))
    q = _column(rows, 3)
    order = np.argsort(s)
    ax.loglog(s[order], q[order], "o-")
    ax.set_xlabel("|offset|")
    ax.set_ylabel("increment / majorant")
    _save(fig, path)


def _xy_plot(columns, rows, title, path, logx=False):
    fig, ax = _fig(title)
    xs = _column(rows, 0)
    ys = _column(rows, 1)
    order = np.argsort(xs)
    ax.plot(xs[order], ys[order], "-")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(columns[0])
    ax.set_ylabel(columns[1])
    _save(fig, path)


def _ball_family_plot(columns, rows, title, path):
    fig, ax = _fig(title)
    rs = _column(rows, 1)
    vs = _column(rows, 2)
    ax.loglog(rs, vs, "o")
    ax.set_xlabel(columns[1])
    ax.set_ylabel(columns[2])
    _save(fig, path)


def _pair_plot(columns, rows, title, path):
    fig, ax = _fig(title)
    xs = _column(rows, 0)
    a = _column(rows, 1)
    g = _column(rows, 2)
    order = np.argsort(xs)
    ax.plot(xs[order], a[order], label=columns[1])
    ax2 = ax.twinx()
    ax2.plot(xs[order], g[order], color="tab:orange", label=columns[2])
    ax.set_xlabel(columns[0])
    ax.set_ylabel(columns[1])
    ax2.set_ylabel(columns[2])
    _save(fig, path)


def _atomize_plot(columns, rows, title, path):
    fig, ax = _fig(title)
    ks = _column(rows, 0)
    lams = np.abs(_column(rows, 1))
    ax.semilogy(ks, lams, "o-")
    ax.set_xlabel("block index")
    ax.set_ylabel("|coefficient|")
    _save(fig, path)


def render(kind: str, columns, rows, title: str, path) -> None:
    """Draw the PNG for one report table; kind picks the layout."""
    if not rows:
        fig, ax = _fig(title)
        ax.text(0.5, 0.5, "no samples", ha="center", va="center")
        _save(fig, path)
        return
    if kind in ("harmonic", "conservative"):
        _deviation_plot(columns, rows, len(columns) - 1, title, path)
    elif kind == "sandwich":
        _sandwich_plot(columns, rows, title, path)
    elif kind == "holder":
        _holder_plot(columns, rows, title, path)
    elif kind in ("doubling", "ap"):
        _ball_family_plot(columns, rows, title, path)
    elif kind == "pair":
        _pair_plot(columns, rows, title, path)
    elif kind == "atomize":
        _atomize_plot(columns, rows, title, path)
    else:
        _xy_plot(columns, rows, title, path)
