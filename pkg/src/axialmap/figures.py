"""Figure rendering for the report subcommands.

Histograms with fitted lognormal curves for the bend statistics, and a
flow-versus-integration scatter for the correlation report.  Map
rendering is intentionally not provided; exports carry class indices
instead of pixels.
"""

from __future__ import annotations

import math
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .stats import LognormalFit  # noqa: E402


def _lognormal_pdf(x: float, mu: float, sigma: float) -> float:
    if x <= 0.0 or sigma <= 0.0:
        return 0.0
    z = (math.log(x) - mu) / sigma
    return math.exp(-0.5 * z * z) / (x * sigma * math.sqrt(2.0 * math.pi))


def _fit_panel(ax, values: Sequence[float], fit: LognormalFit, title: str) -> None:
    ax.hist(values, bins=40, density=True, color="#7aa6c2",
            edgecolor="white", linewidth=0.3)
    lo, hi = min(values), max(values)
    if hi > lo and fit.sigma > 0.0:
        xs = [lo + (hi - lo) * i / 256.0 for i in range(1, 257)]
        ax.plot(xs, [_lognormal_pdf(x, fit.mu, fit.sigma) for x in xs],
                color="#b03030", linewidth=1.5)
    ax.set_title(title)
    ax.text(0.97, 0.95,
            "mu=%.3f\nsigma=%.3f\nKS=%.4f" % (fit.mu, fit.sigma, fit.gof_statistic),
            transform=ax.transAxes, ha="right", va="top", fontsize=8,
            bbox=dict(boxstyle="round", facecolor="white", alpha=0.8))


def save_distribution_figure(x_values: Sequence[float], x_fit: LognormalFit,
                             ratio_values: Sequence[float], ratio_fit: LognormalFit,
                             path: str) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    _fit_panel(axes[0], x_values, x_fit, "bend offset x (m)")
    _fit_panel(axes[1], ratio_values, ratio_fit, "bend ratio x/d")
    axes[0].set_ylabel("density")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_correlation_figure(metric_values: Sequence[float],
                            flows: Sequence[float],
                            r2: float, t_stat: float, significant: bool,
                            path: str,
                            metric_label: str = "local integration") -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.scatter(metric_values, flows, s=18, color="#39618f", alpha=0.75)
    n = len(metric_values)
    if n >= 2:
        mean_m = sum(metric_values) / n
        mean_f = sum(flows) / n
        var_m = sum((m - mean_m) ** 2 for m in metric_values)
        if var_m > 0:
            slope = sum((m - mean_m) * (f - mean_f)
                        for m, f in zip(metric_values, flows)) / var_m
            intercept = mean_f - slope * mean_m
            lo, hi = min(metric_values), max(metric_values)
            ax.plot([lo, hi], [intercept + slope * lo, intercept + slope * hi],
                    color="#b03030", linewidth=1.5)
    ax.set_xlabel(metric_label)
    ax.set_ylabel("observed flow")
    ax.set_title("R^2=%.3f  t=%.2f  %s"
                 % (r2, t_stat, "significant" if significant else "not significant"))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
