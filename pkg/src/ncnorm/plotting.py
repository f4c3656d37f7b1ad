"""Figures written next to the CSV reports.

Figures are drawn on bare ``matplotlib.figure.Figure`` objects with the Agg
canvas, so nothing touches pyplot's global state.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _figure(width=5.0, height=3.4):
    from matplotlib.figure import Figure

    fig = Figure(figsize=(width, height), dpi=120)
    ax = fig.add_subplot(1, 1, 1)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def divergence_figure(rows, ord, path) -> Path:
    """Ratio ``psi / nc`` against ``n`` with the analytic lower bound."""
    n = np.array([r.n for r in rows])
    ratio = np.array([r.ratio for r in rows])
    bound = np.array([r.paper_bound for r in rows]) ** (1.0 / ord.p)
    fig, ax = _figure()
    ax.plot(n, ratio, "o-", ms=3, lw=1.2, label="psi / nc")
    ax.plot(n, bound, "--", lw=1.0, color="0.4", label="lower bound")
    if rows and rows[0].cl_nc_lower is not None:
        ax.plot(n, [r.cl_nc_lower for r in rows], "s:", ms=3, lw=1.0, label="cl / nc lower bound")
    ax.set_xlabel("n")
    ax.set_ylabel("ratio")
    ax.set_title(f"harmonic family, p = {ord.p:g}, q = {ord.q:g}", fontsize=10)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    return path


def nonmono_figure(points, path, splitting="2x2-swapped") -> Path:
    """Sign map of the estimated ``g'(0+)`` over the ``(p, q)`` grid."""
    pts = [pt for pt in points if pt.splitting == splitting]
    fig, ax = _figure()
    if pts:
        p = np.array([pt.p for pt in pts])
        q = np.array([pt.q for pt in pts])
        d = np.array([pt.derivative for pt in pts])
        lim = float(np.max(np.abs(d))) or 1.0
        sc = ax.scatter(p, q, c=d, cmap="coolwarm", vmin=-lim, vmax=lim, s=14)
        fig.colorbar(sc, ax=ax, label="g'(0+)")
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title(f"derivative of psi along W ({splitting})", fontsize=10)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    return path
