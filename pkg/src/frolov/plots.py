"""Figure rendering for the report-producing CLI paths.

Figures are written next to the delimited output (same stem, ``.png``).
The Agg backend is forced so rendering works headless.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .cubature import ConvergenceStudy
from .dual import DualSpectrumReport
from .enumeration import LatticePointSet
from .fooling import FoolingDemo

_DPI = 150


def _fitted_curve(ns: np.ndarray, intercept: float, main: float, logexp: float) -> np.ndarray:
    return np.exp(intercept) * ns ** (-main) * np.log(ns) ** logexp


def save_study_figure(study: ConvergenceStudy, path: str) -> None:
    ns = np.array([r.n for r in study.records])
    errs = np.array([r.abs_error for r in study.records])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    pos = errs > 0
    ax.loglog(ns[pos], errs[pos], "o", ms=5, color="tab:blue", label="measured |error|")
    if (~pos).any():
        ax.plot(ns[~pos], np.full((~pos).sum(), errs[pos].min() if pos.any() else 1e-17),
                "x", color="tab:gray", label="exact zero (plotted at floor)")
    grid = np.geomspace(ns.min(), ns.max(), 200)
    if study.fit is not None:
        f = study.fit
        ax.loglog(grid, _fitted_curve(grid, f.intercept, f.main_rate, f.log_exponent),
                  "-", color="tab:orange",
                  label=f"fit: n^-{f.main_rate:.2f} (log n)^{f.log_exponent:.2f}")
    if study.prediction is not None and pos.any():
        p = study.prediction
        anchor = errs[pos][0] / (ns[pos][0] ** (-p.main_rate) * math.log(ns[pos][0]) ** p.log_exponent)
        ax.loglog(grid, anchor * grid ** (-p.main_rate) * np.log(grid) ** p.log_exponent,
                  "--", color="tab:green",
                  label=f"predicted slope: n^-{p.main_rate:.2f} (log n)^{p.log_exponent:.2f}")
    ax.set_xlabel("n")
    ax.set_ylabel("absolute error")
    ax.set_title(f"{study.function_name}: convergence")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_demo_figure(demo: FoolingDemo, path: str) -> None:
    ns = np.array([r.n for r in demo.rows])
    ints = np.array([r.integral for r in demo.rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(ns, ints, "o", ms=5, color="tab:blue", label="fooling integral")
    if demo.fit is not None:
        f = demo.fit
        grid = np.geomspace(ns.min(), ns.max(), 200)
        ax.loglog(grid, _fitted_curve(grid, f.intercept, f.main_rate, f.log_exponent),
                  "-", color="tab:orange", label=f"fit: n^-{f.main_rate:.2f}")
    ax.set_xlabel("n")
    ax.set_ylabel("integral of fooling function")
    ax.set_title(f"variant {demo.variant}: lower-bound scaling")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_dual_figure(report: DualSpectrumReport, path: str) -> None:
    levels: dict[int, int] = {}
    for m, count in report.z_counts:
        levels[sum(m)] = levels.get(sum(m), 0) + count
    ls = sorted(levels)
    totals = np.array([levels[l] for l in ls], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.bar(ls, totals, color="tab:blue", label="dual points per level |m|_1")
    if report.fitted_c is not None:
        thr = math.log2(report.n) - report.fitted_c
        ax.axvline(thr, color="tab:red", ls="--",
                   label=f"empty below |m|_1 = {thr:g} (fitted_c = {report.fitted_c:g})")
    ax.set_xlabel("|m|_1")
    ax.set_ylabel("points in shells")
    ax.set_title(f"dual shells, n = {report.n:g}, d = {report.dimension}")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_points_figure(point_set: LatticePointSet, path: str, max_points: int = 20000) -> bool:
    """Scatter for d <= 2; returns False (no figure) in higher dimension."""
    d = point_set.lattice.dimension
    if d > 2:
        return False
    pts = point_set.points
    if len(pts) > max_points:
        stride = int(math.ceil(len(pts) / max_points))
        pts = pts[::stride]
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    if d == 2:
        ax.plot(pts[:, 0], pts[:, 1], ".", ms=2)
        ax.set_ylabel("x_2")
    else:
        ax.plot(pts[:, 0], np.zeros(len(pts)), "|", ms=12)
        ax.set_yticks([])
    ax.set_xlabel("x_1")
    ax.set_xlim(0, 1)
    if d == 2:
        ax.set_ylim(0, 1)
    ax.set_title(f"lattice points, n = {point_set.lattice.n:g} (count {point_set.count})")
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return True
