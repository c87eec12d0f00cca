"""Static SVG plots for reproduction reports."""

import io
import logging
from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "orbitlab"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..models import AlphaFit, write_output_file  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig, file_path: Path) -> Path:
    """Write ``fig`` as SVG without a creation date so reruns are byte-identical."""
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    write_output_file(Path(file_path), buffer.getvalue())
    logger.debug(f"Wrote plot {file_path}")
    return Path(file_path)


def plot_series(series: Dict[str, Sequence[float]], file_path: Path, title: str,
                ylabel: str, log_y: bool = False) -> Path:
    """One line per named series against its index n."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in series.items():
        values = np.asarray(values, dtype=float)
        if log_y:
            values = np.where(values > 0, values, np.nan)
        ax.plot(np.arange(len(values)), values, label=label, linewidth=1)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize="small")
    return _save(fig, file_path)


def plot_gap_curves(gaps: Dict[str, Sequence[float]], file_path: Path, tol: float) -> Path:
    """Boundary-to-interior gaps |F_n(zeta) - F_n(z0)| on a log scale with the tolerance line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in gaps.items():
        values = np.asarray(values, dtype=float)
        ax.semilogy(np.arange(len(values)), np.where(values > 0, values, np.nan), label=label, linewidth=1)
    ax.axhline(tol, color="black", linestyle="--", linewidth=0.8, label=f"tol = {tol:g}")
    ax.set_xlabel("n")
    ax.set_ylabel("gap")
    ax.set_title("Boundary orbit gaps")
    ax.legend(fontsize="small")
    return _save(fig, file_path)


def plot_density_histogram(scores: Sequence[float], K: int, file_path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(scores, bins=np.linspace(0.0, 1.0, K + 2), edgecolor="black", linewidth=0.5)
    ax.set_xlabel(f"density score over {K} arcs")
    ax.set_ylabel("samples")
    ax.set_title(title or "Orbit density scores")
    return _save(fig, file_path)


def plot_alpha_fits(fits: Dict[str, AlphaFit], file_path: Path) -> Path:
    """Log-log harmonic measure against radius, with the fitted lines."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, fit in fits.items():
        radii = np.asarray(fit.radii)
        ax.errorbar(radii, fit.measures, yerr=fit.std_errors, fmt="o", markersize=3, label=f"{label}")
        ax.plot(radii, np.exp(fit.intercept) * radii ** fit.exponent, linewidth=0.8,
                label=f"{label}: alpha = {fit.exponent:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("distance to boundary point")
    ax.set_ylabel("harmonic measure")
    ax.set_title("Harmonic measure exponents")
    ax.legend(fontsize="x-small")
    return _save(fig, file_path)
