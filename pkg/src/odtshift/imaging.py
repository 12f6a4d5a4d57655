"""Synthetic absorption images and trap-light-corrected atom counting.

The probe propagates along y; an image pixel (x, z) holds the optical
depth, the line integral of density times the local effective
cross-section. OD is linear in the peak density (the cross-section model
has no saturation), which is what makes the corrected estimate a simple
peak ratio against a unit-density synthetic reference.

Image layout convention: data[row, col] = data[z index, x index], matching
the CSV format where each text row is one z value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.integrate import simpson
from scipy.ndimage import median_filter

from .absorption import (
    CrossSectionTable,
    ProbeConfig,
    base_cross_sections,
    naive_sigma0,
    sigma_eff_vs_intensity,
)
from .atomic_data import CONSTANTS, Catalog
from .beam import BeamGeometry


@dataclass(frozen=True)
class CloudModel:
    """Gaussian atom cloud: peak density, center, 1/e^(1/2) radii."""

    n0_m3: float
    center_m: tuple
    sigma_m: tuple

    def __post_init__(self) -> None:
        if self.n0_m3 < 0:
            raise ValueError(f"peak density must be >= 0, got {self.n0_m3}")
        if len(self.center_m) != 3 or len(self.sigma_m) != 3:
            raise ValueError("center_m and sigma_m must have three components")
        if any(s <= 0 for s in self.sigma_m):
            raise ValueError(f"cloud widths must be > 0, got {self.sigma_m}")
        object.__setattr__(self, "center_m", tuple(float(v) for v in self.center_m))
        object.__setattr__(self, "sigma_m", tuple(float(v) for v in self.sigma_m))

    def density(self, x, y, z):
        cx, cy, cz = self.center_m
        sx, sy, sz = self.sigma_m
        arg = (((np.asarray(x, dtype=float) - cx) / sx) ** 2
               + ((np.asarray(y, dtype=float) - cy) / sy) ** 2
               + ((np.asarray(z, dtype=float) - cz) / sz) ** 2)
        out = self.n0_m3 * np.exp(-0.5 * arg)
        return float(out) if out.ndim == 0 else out

    def total_atoms(self) -> float:
        sx, sy, sz = self.sigma_m
        return self.n0_m3 * (2.0 * math.pi) ** 1.5 * sx * sy * sz


@dataclass(frozen=True)
class ImageFrame:
    """Square-pixel detector grid in the (x, z) object plane."""

    nx: int
    nz: int
    pixel_pitch_m: float
    origin_x_m: float
    origin_z_m: float

    def __post_init__(self) -> None:
        if self.nx < 1 or self.nz < 1:
            raise ValueError(f"frame must have >= 1 pixel per axis, got "
                             f"{self.nx} x {self.nz}")
        if self.pixel_pitch_m <= 0:
            raise ValueError(f"pixel pitch must be > 0, got {self.pixel_pitch_m}")

    def pixel_centers(self):
        xs = self.origin_x_m + self.pixel_pitch_m * np.arange(self.nx)
        zs = self.origin_z_m + self.pixel_pitch_m * np.arange(self.nz)
        return xs, zs


@dataclass(frozen=True, eq=False)
class ODImage:
    data: np.ndarray  # shape (nz, nx)
    frame: ImageFrame


@dataclass(frozen=True)
class NumberEstimate:
    n_atoms: float
    peak_density_m3: float | None
    method: str


@dataclass(frozen=True)
class PowerScanRow:
    power_w: float
    peak_od: float
    atoms_naive: float
    atoms_corrected: float


def synth_od(catalog: Catalog, beam: BeamGeometry, probe: ProbeConfig,
             cloud: CloudModel, frame: ImageFrame, f_level=2,
             samples: int = 201, refine: bool = True,
             rel_tol: float = 1e-3,
             table: CrossSectionTable | None = None) -> ODImage:
    """Synthesize the OD image of a cloud sitting in trap light.

    The probe line integral runs over +-6 sigma_y around the cloud with
    Simpson quadrature; with refine the sample count doubles until the
    image changes by less than rel_tol in max norm. Trap light carves
    narrow resonance shells into the integrand (a sublevel shifted
    exactly onto the probe), so convergence can take a few thousand
    points; the cross-section is therefore tabulated against intensity
    once and interpolated.
    """
    if table is None:
        table = base_cross_sections(catalog, probe)
    omega_trap = 2.0 * math.pi * CONSTANTS.c / beam.wavelength_m
    i_peak = beam.peak_intensity()
    if i_peak > 0.0:
        i_grid = np.linspace(0.0, i_peak, 65537)
        s_grid = sigma_eff_vs_intensity(catalog, table, probe, f_level,
                                        omega_trap, i_grid)

        def sigma_of(intensity):
            return np.interp(intensity, i_grid, s_grid)
    else:
        s_dark = sigma_eff_vs_intensity(catalog, table, probe, f_level,
                                        omega_trap, 0.0)

        def sigma_of(intensity):
            return np.full_like(intensity, s_dark)

    xs, zs = frame.pixel_centers()
    y_center = cloud.center_m[1]
    y_half = 6.0 * cloud.sigma_m[1]
    x3 = xs[:, None, None]
    z3 = zs[None, :, None]

    def one_pass(n: int) -> np.ndarray:
        ys = np.linspace(y_center - y_half, y_center + y_half, n)
        y3 = ys[None, None, :]
        integrand = (cloud.density(x3, y3, z3)
                     * sigma_of(beam.intensity(x3, y3, z3)))
        return simpson(integrand, x=ys, axis=-1).T  # (nz, nx)

    if samples % 2 == 0:
        samples += 1
    data = one_pass(samples)
    if not refine:
        return ODImage(data=data, frame=frame)
    for _ in range(6):
        samples = 2 * samples - 1
        finer = one_pass(samples)
        scale = float(np.max(np.abs(finer)))
        converged = (scale == 0.0
                     or float(np.max(np.abs(finer - data))) <= rel_tol * scale)
        data = finer
        if converged:
            return ODImage(data=data, frame=frame)
    raise RuntimeError("OD line integral did not converge; the cloud may be "
                       "far smaller than the resonance shell structure")


def _filtered(data: np.ndarray) -> np.ndarray:
    # 3x3 median knocks out single-pixel artifacts before peak picking
    return median_filter(data, size=3)


def peak_od(image: ODImage):
    """(value, (row, col)) of the median-filtered maximum.

    Ties resolve to the lowest row-major index.
    """
    smooth = _filtered(image.data)
    flat = int(np.argmax(smooth))
    idx = np.unravel_index(flat, smooth.shape)
    return float(smooth[idx]), (int(idx[0]), int(idx[1]))


def estimate_naive(image: ODImage, sigma0_m2: float) -> NumberEstimate:
    """Atom number from the plain pixel sum over a fixed cross-section.

    Negative pixels (noise in real data) are clamped to zero first.
    """
    if sigma0_m2 <= 0:
        raise ValueError(f"cross-section must be > 0, got {sigma0_m2}")
    total = float(np.clip(image.data, 0.0, None).sum())
    n = total * image.frame.pixel_pitch_m ** 2 / sigma0_m2
    return NumberEstimate(n_atoms=n, peak_density_m3=None, method="naive")


def estimate_corrected(image: ODImage, catalog: Catalog, beam: BeamGeometry,
                       probe: ProbeConfig, cloud_widths_m, cloud_center_m,
                       f_level=2) -> NumberEstimate:
    """Atom number with the position-dependent cross-section folded in.

    A unit-density reference image is synthesized on the same frame with
    the same trap light; the observed-to-reference ratio at the observed
    peak gives the density scale, and the known widths convert it to a
    total. Requires the cloud geometry (widths and center) from an
    independent fit or calibration.
    """
    reference = CloudModel(n0_m3=1.0, center_m=tuple(cloud_center_m),
                           sigma_m=tuple(cloud_widths_m))
    ref_img = synth_od(catalog, beam, probe, reference, image.frame,
                       f_level=f_level)
    smooth_obs = _filtered(image.data)
    smooth_ref = _filtered(ref_img.data)
    idx = np.unravel_index(int(np.argmax(smooth_obs)), smooth_obs.shape)
    ref_peak = float(smooth_ref[idx])
    if ref_peak <= 0.0:
        raise ValueError("observed peak lies outside the reference cloud "
                         "support; check cloud_center_m and the frame")
    n0 = float(smooth_obs[idx]) / ref_peak
    total = n0 * reference.total_atoms()
    return NumberEstimate(n_atoms=total, peak_density_m3=n0, method="corrected")


def power_scan(catalog: Catalog, beam: BeamGeometry, probe: ProbeConfig,
               cloud: CloudModel, frame: ImageFrame, powers_w,
               f_level=2) -> list:
    """Peak OD and both estimates across trap powers, one row per power."""
    table = base_cross_sections(catalog, probe)
    sigma0 = naive_sigma0(table, probe, f_level)
    rows = []
    for p in powers_w:
        b = replace(beam, power_w=float(p))
        img = synth_od(catalog, b, probe, cloud, frame, f_level=f_level,
                       table=table)
        peak, _ = peak_od(img)
        naive = estimate_naive(img, sigma0)
        corrected = estimate_corrected(img, catalog, b, probe,
                                       cloud.sigma_m, cloud.center_m,
                                       f_level=f_level)
        rows.append(PowerScanRow(power_w=float(p), peak_od=peak,
                                 atoms_naive=naive.n_atoms,
                                 atoms_corrected=corrected.n_atoms))
    return rows


def pgm_bytes(data) -> bytes:
    """Binary 8-bit PGM rendering of a 2-D array, linear over [0, max]."""
    clipped = np.clip(np.asarray(data, dtype=float), 0.0, None)
    vmax = float(clipped.max())
    if vmax > 0.0:
        levels = np.rint(clipped / vmax * 255.0).astype(np.uint8)
    else:
        levels = np.zeros_like(clipped, dtype=np.uint8)
    nz, nx = clipped.shape
    return f"P5\n{nx} {nz}\n255\n".encode("ascii") + levels.tobytes()


def write_od_image(image: ODImage, stem) -> list:
    """Write stem.csv, stem.meta, stem.pgm; returns the three paths.

    CSV rows are z lines with full float precision; the PGM is an 8-bit
    linear rendering of [0, max] for quick looks.
    """
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    meta_path = stem.with_suffix(".meta")
    pgm_path = stem.with_suffix(".pgm")

    np.savetxt(csv_path, image.data, delimiter=",", fmt="%.16e")
    f = image.frame
    meta_path.write_text(
        f"pixel_pitch_m = {f.pixel_pitch_m:.16e}\n"
        f"origin_x_m = {f.origin_x_m:.16e}\n"
        f"origin_z_m = {f.origin_z_m:.16e}\n")

    pgm_path.write_bytes(pgm_bytes(image.data))
    return [csv_path, meta_path, pgm_path]


def read_od_image(csv_path) -> ODImage:
    """Read an image written by write_od_image (CSV plus .meta sidecar)."""
    csv_path = Path(csv_path)
    data = np.loadtxt(csv_path, delimiter=",", ndmin=2)
    meta = {}
    for line in csv_path.with_suffix(".meta").read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        meta[key.strip()] = float(value)
    frame = ImageFrame(nx=data.shape[1], nz=data.shape[0],
                       pixel_pitch_m=meta["pixel_pitch_m"],
                       origin_x_m=meta["origin_x_m"],
                       origin_z_m=meta["origin_z_m"])
    return ODImage(data=data, frame=frame)
