"""Figure rendering for the batch CLI.

Every plot lands in a file next to the delimited output it illustrates.
The Agg backend is forced so headless runs produce identical bytes; a
fixed Software tag keeps the PNG metadata stable across hosts.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PNG_META = {"Software": "odtshift"}


def _save(fig, path) -> None:
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def save_profile_figure(path, coords_m, series: dict, xlabel: str,
                        ylabel: str, scale: float = 1.0) -> None:
    """One line per named series against a common coordinate axis."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    xs = np.asarray(coords_m, dtype=float) * 1e6
    for label, values in series.items():
        ax.plot(xs, np.asarray(values, dtype=float) * scale, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_heatmap_figure(path, xs_m, zs_m, grid, label: str) -> None:
    """Pseudocolor map of a (z, x) grid; used for potentials and images."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=120)
    xs = np.asarray(xs_m, dtype=float) * 1e6
    zs = np.asarray(zs_m, dtype=float) * 1e6
    mesh = ax.pcolormesh(xs, zs, np.asarray(grid, dtype=float),
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label=label)
    ax.set_xlabel("x (um)")
    ax.set_ylabel("z (um)")
    fig.tight_layout()
    _save(fig, path)


def save_power_scan_figure(path, rows) -> None:
    """Peak OD and both atom-number estimates against trap power."""
    powers = [r.power_w for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 6.4), dpi=120,
                                      sharex=True)
    top.plot(powers, [r.peak_od for r in rows], marker="o")
    top.set_ylabel("peak OD")
    top.grid(True, alpha=0.3)
    bottom.plot(powers, [r.atoms_naive for r in rows], marker="s",
                label="naive")
    bottom.plot(powers, [r.atoms_corrected for r in rows], marker="o",
                label="shift corrected")
    bottom.set_xlabel("trap power (W)")
    bottom.set_ylabel("atom number")
    bottom.grid(True, alpha=0.3)
    bottom.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_equipotential_figure(path, xs_m, rs_m, area_m2: float,
                              temperature_k: float) -> None:
    """Generating curve of the closed isopotential surface, mirrored in r."""
    fig, ax = plt.subplots(figsize=(6.4, 3.2), dpi=120)
    xs = np.asarray(xs_m, dtype=float) * 1e3
    rs = np.asarray(rs_m, dtype=float) * 1e6
    ax.plot(xs, rs, color="tab:blue")
    ax.plot(xs, -rs, color="tab:blue")
    ax.fill_between(xs, -rs, rs, alpha=0.15)
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("r (um)")
    ax.set_title(f"kB*{temperature_k * 1e6:g} uK surface, "
                 f"area {area_m2:.4e} m^2", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def save_estimate_figure(path, image, peak_index) -> None:
    """Observed OD map with the filtered-peak pixel marked."""
    xs, zs = image.frame.pixel_centers()
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=120)
    mesh = ax.pcolormesh(xs * 1e6, zs * 1e6, image.data, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="OD")
    iz, ix = peak_index
    ax.plot([xs[ix] * 1e6], [zs[iz] * 1e6], marker="+", color="red",
            markersize=12, markeredgewidth=2)
    ax.set_xlabel("x (um)")
    ax.set_ylabel("z (um)")
    fig.tight_layout()
    _save(fig, path)
