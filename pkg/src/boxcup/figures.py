"""Static matplotlib renderings of the experiment tables.

Every function takes plain arrays (as parsed back from the CSV outputs),
writes one PNG, and returns the path.  Rendering is presentation only;
nothing here feeds back into the numbers.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_differences_figure",
    "save_profile_figure",
    "save_radius_width_figure",
    "save_pair_distance_figure",
    "save_worstcase_figure",
]

_STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "legend.framealpha": 0.9,
}

_SERIES_COLORS = {"h": "tab:gray", "1": "tab:red", "2": "tab:orange", "3": "tab:green"}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_differences_figure(
    d_h3: np.ndarray, d_23: np.ndarray, d_13: np.ndarray, path: str | Path
) -> Path:
    """Width differences per bound set, in the sorted row order of the table."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(d_h3))
        ax.plot(x, d_13, "o-", ms=3, label="omega(1) - omega(3)", color="tab:red")
        ax.plot(x, d_23, "s-", ms=3, label="omega(2) - omega(3)", color="tab:orange")
        ax.plot(x, d_h3, "^-", ms=3, label="omega(h) - omega(3)", color="tab:gray")
        ax.axhline(0.0, color="black", lw=0.8)
        ax.set_xlabel("bound set (sorted by omega(1) - omega(h))")
        ax.set_ylabel("quasi-mean-width difference")
        ax.legend()
        return _finish(fig, path)


def save_profile_figure(
    tau: np.ndarray, fractions: dict[str, np.ndarray], path: str | Path
) -> Path:
    """Performance profiles of the three double-McCormick relaxations."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for rel in ("3", "2", "1"):
            ax.plot(tau, fractions[rel], label=f"system {rel}", color=_SERIES_COLORS[rel])
        ax.set_xlabel("tau = log of allowed width factor over the hull")
        ax.set_ylabel("fraction of bound sets within the factor")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="lower right")
        return _finish(fig, path)


def _scatter_with_fit(ax, x, y, fit, title):
    slope, intercept, r2 = fit
    ax.plot(x, y, "o", ms=4)
    grid = np.linspace(min(x), max(x), 50)
    ax.plot(grid, slope * grid + intercept, "-", color="black", lw=1)
    label = "R^2 undefined" if r2 is None else f"R^2 = {r2:.4f}"
    ax.set_title(f"{title} ({label})")


def save_radius_width_figure(
    points: dict[str, tuple[np.ndarray, np.ndarray]],
    fits: dict[str, tuple[float, float, float | None]],
    path: str | Path,
) -> Path:
    """Aggregated idealized radius vs quasi mean width, one panel per relaxation."""
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(7.4, 6.0))
        for ax, rel in zip(axes.flat, ("h", "3", "2", "1")):
            x, y = points[rel]
            _scatter_with_fit(ax, x, y, fits[rel], f"relaxation {rel}")
            ax.set_xlabel("aggregated idealized radius")
            ax.set_ylabel("quasi mean width")
        return _finish(fig, path)


def save_pair_distance_figure(
    points: dict[str, tuple[np.ndarray, np.ndarray]],
    fits: dict[str, tuple[float, float, float | None]],
    path: str | Path,
) -> Path:
    """Aggregated radial distance to the hull vs width difference, per pair."""
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4))
        for ax, rel in zip(axes.flat, ("3", "2", "1")):
            x, y = points[rel]
            _scatter_with_fit(ax, x, y, fits[rel], f"system {rel} vs hull")
            ax.set_xlabel("aggregated radial distance")
            ax.set_ylabel("width difference")
        return _finish(fig, path)


def save_worstcase_figure(
    b3: int, a3: np.ndarray, d_23: np.ndarray, d_21: np.ndarray, path: str | Path
) -> Path:
    """Width differences across the a3 sweep for one fixed b3."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(a3, d_23, "o-", ms=3, label="omega(2) - omega(3)", color="tab:orange")
        ax.plot(a3, d_21, "s-", ms=3, label="omega(2) - omega(1)", color="tab:blue")
        ax.axvline(b3 / 3.0, color="black", lw=0.8, ls="--", label="a3 = b3/3")
        ax.set_xlabel("a3")
        ax.set_ylabel("quasi-mean-width difference")
        ax.set_title(f"b3 = {b3}")
        ax.legend()
        return _finish(fig, path)
