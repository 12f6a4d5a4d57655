"""Batch front end: TOML config in, CSV/PGM/PNG artifacts out.

One TOML file drives a run: a table per shared concern ([beam], [probe],
[cloud], [frame]) plus a table per subcommand. Every key has a built-in
default and a command-line override, and all physical keys carry an SI
unit suffix. Identical config and inputs give byte-identical outputs.
On any failure the files written by that invocation are removed and the
exit status is nonzero; exit 0 means every artifact landed.
"""

from __future__ import annotations

import copy
import csv
import math
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import plots
from .absorption import (base_cross_sections, naive_sigma0, resonant_probe,
                         sigma_eff, sigma_eff_averaged)
from .angular import HalfInt
from .atomic_data import (CONSTANTS, Catalog, CatalogError, HyperfineState,
                          bundled_catalog, load_catalog)
from .beam import BeamGeometry
from .imaging import (CloudModel, ImageFrame, estimate_corrected,
                      estimate_naive, peak_od, pgm_bytes, power_scan,
                      read_od_image, synth_od, write_od_image)
from .stark import shift_profile
from .trap import TrapPotential, equipotential_area, equipotential_profile, trap_depth

_DEFAULTS = {
    "catalog": {},
    "beam": {"power_w": 1.0, "waist_m": 17.0e-6, "wavelength_m": 1.064e-6,
             "focus_m": 0.0},
    "probe": {"f_lower": 2, "f_upper": 3, "polarization": "isotropic",
              "linewidth_rad_s": 0.0, "lower_term": "5S1/2",
              "upper_term": "5P3/2"},
    "cloud": {"peak_density_m3": 1.0e17, "center_m": [0.0, 0.0, 0.0],
              "sigma_m": [60.0e-6, 3.0e-6, 10.0e-6]},
    "frame": {"nx": 101, "nz": 17, "pixel_pitch_m": 6.0e-6,
              "origin_x_m": -300.0e-6, "origin_z_m": -48.0e-6},
    "shift": {"axis": "y", "half_span_m": 51.0e-6, "points": 201,
              "states": ["5S1/2 F=1", "5S1/2 F=2", "5P3/2 F=3"]},
    "potential": {"term": "5S1/2", "f": 2, "half_span_x_m": 2.0e-3,
                  "half_span_z_m": 40.0e-6, "nx": 81, "nz": 41,
                  "heatmap": True},
    "sigma_eff": {"f": 2, "axis": "y", "half_span_m": 51.0e-6,
                  "points": 201},
    "synth_od": {"f": 2, "basename": "synth_od"},
    "estimate_n": {"f": 2, "results_csv": "estimates.csv"},
    "power_scan": {"powers_w": [0.0, 19.7, 24.9, 27.7], "f": 2},
    "equipotential_area": {"term": "5S1/2", "f": 2,
                           "temperature_k": 120.0e-6, "points": 2001},
}

# keys accepted per section; optional keys without defaults listed too
_ALLOWED = {section: frozenset(table) for section, table in _DEFAULTS.items()}
_ALLOWED["catalog"] = frozenset({"path"})
_ALLOWED["sigma_eff"] = _ALLOWED["sigma_eff"] | {"mf"}
_ALLOWED["equipotential_area"] = _ALLOWED["equipotential_area"] | {"offsets_m"}


def _load_config(path) -> dict:
    cfg = copy.deepcopy(_DEFAULTS)
    if path is None:
        return cfg
    with open(path, "rb") as fh:
        try:
            user = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise click.ClickException(f"bad config {path}: {exc}")
    for section, table in user.items():
        if section not in _ALLOWED:
            raise click.ClickException(
                f"unknown config section [{section}] in {path}")
        if not isinstance(table, dict):
            raise click.ClickException(
                f"[{section}] must be a table of keys in {path}")
        for key, value in table.items():
            if key not in _ALLOWED[section]:
                raise click.ClickException(
                    f"unknown key {key!r} in [{section}] of {path}")
            cfg[section][key] = value
    return cfg


def _override(table: dict, **pairs) -> None:
    for key, value in pairs.items():
        if value is not None:
            table[key] = value


def _parse_halfint(text: str) -> HalfInt:
    """Integer or n/2 spelling ("2", "-1", "3/2") to a HalfInt."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        if den.strip() != "2":
            raise CatalogError(f"half-integers must be written n/2, got {text!r}")
        return HalfInt(int(num))
    return HalfInt(2 * int(text))


def _halfint_of(value) -> HalfInt:
    if isinstance(value, str):
        return _parse_halfint(value)
    return HalfInt.of(value)


def _term_j(catalog: Catalog, term: str) -> HalfInt:
    for t in catalog.transitions:
        for st in (t.lower, t.upper):
            if st.term == term:
                return st.J
    raise CatalogError(f"term {term!r} does not appear in the catalog")


def parse_state_label(catalog: Catalog, label: str) -> HyperfineState:
    """Parse "5S1/2 F=2" or "5P3/2 F=3 mF=-1"; J is looked up by term."""
    parts = label.split()
    if not parts:
        raise CatalogError("empty state label")
    term, f_val, mf_val = parts[0], None, None
    for token in parts[1:]:
        key, _, value = token.partition("=")
        if key == "F":
            f_val = _parse_halfint(value)
        elif key == "mF":
            mf_val = _parse_halfint(value)
        else:
            raise CatalogError(f"unrecognized token {token!r} in state {label!r}")
    if f_val is None:
        raise CatalogError(f"state {label!r} needs an F=<value> token")
    return HyperfineState(term, _term_j(catalog, term), f_val, mf_val)


def _catalog_from(cfg) -> Catalog:
    path = cfg["catalog"].get("path")
    return load_catalog(path) if path else bundled_catalog()


def _beam_from(cfg) -> BeamGeometry:
    b = cfg["beam"]
    return BeamGeometry(power_w=float(b["power_w"]),
                        waist_m=float(b["waist_m"]),
                        wavelength_m=float(b["wavelength_m"]),
                        focus_m=float(b["focus_m"]))


def _probe_from(cfg, catalog: Catalog):
    p = cfg["probe"]
    return resonant_probe(catalog, _halfint_of(p["f_lower"]),
                          _halfint_of(p["f_upper"]),
                          polarization=p["polarization"],
                          linewidth_rad_s=float(p["linewidth_rad_s"]),
                          lower_term=p["lower_term"],
                          upper_term=p["upper_term"])


def _cloud_from(cfg) -> CloudModel:
    c = cfg["cloud"]
    return CloudModel(n0_m3=float(c["peak_density_m3"]),
                      center_m=tuple(float(v) for v in c["center_m"]),
                      sigma_m=tuple(float(v) for v in c["sigma_m"]))


def _frame_from(cfg) -> ImageFrame:
    f = cfg["frame"]
    return ImageFrame(nx=int(f["nx"]), nz=int(f["nz"]),
                      pixel_pitch_m=float(f["pixel_pitch_m"]),
                      origin_x_m=float(f["origin_x_m"]),
                      origin_z_m=float(f["origin_z_m"]))


def _axis_coords(beam: BeamGeometry, axis: str, half_span_m: float,
                 points: int) -> np.ndarray:
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if points < 2:
        raise ValueError(f"need at least 2 profile points, got {points}")
    offsets = np.linspace(-half_span_m, half_span_m, points)
    if points % 2:
        offsets[points // 2] = 0.0  # keep the r=0 row exact
    # the x profile walks the beam axis, so recenter it on the focus
    return offsets + (beam.focus_m if axis == "x" else 0.0)


def _axis_positions(beam: BeamGeometry, axis: str, coords: np.ndarray):
    zeros = np.zeros_like(coords)
    if axis == "x":
        return coords, zeros, zeros
    focal_plane = np.full_like(coords, beam.focus_m)
    if axis == "y":
        return focal_plane, coords, zeros
    return focal_plane, zeros, coords


class _OutputSession:
    """Files written by one command, so a failure can roll them back."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.written.append(p)
        return p

    def rollback(self) -> None:
        for p in self.written:
            try:
                p.unlink()
            except FileNotFoundError:
                pass


def _run_command(ctx, worker) -> None:
    out_dir = Path(ctx.obj["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    session = _OutputSession(out_dir)
    try:
        messages = worker(session)
    except click.ClickException:
        session.rollback()
        raise
    except Exception as exc:
        session.rollback()
        raise click.ClickException(str(exc)) from exc
    # echo only after the artifacts are safely on disk: a dying stdout
    # (closed pipe) must not roll back finished outputs
    for line in messages:
        click.echo(line)


def _fmt(value: float) -> str:
    return f"{float(value):.16e}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _beam_overrides(fn):
    fn = click.option("--focus-m", type=float, default=None,
                      help="Focal position on the beam axis.")(fn)
    fn = click.option("--wavelength-m", type=float, default=None,
                      help="Trap wavelength.")(fn)
    fn = click.option("--waist-m", type=float, default=None,
                      help="1/e^2 intensity radius at the focus.")(fn)
    fn = click.option("--power-w", type=float, default=None,
                      help="Trap beam power.")(fn)
    return fn


def _probe_overrides(fn):
    fn = click.option("--probe-linewidth-rad-s", type=float, default=None,
                      help="Extra Lorentzian width of the probe.")(fn)
    fn = click.option("--polarization",
                      type=click.Choice(["pi", "sigma_plus", "sigma_minus",
                                         "isotropic"]),
                      default=None, help="Probe polarization model.")(fn)
    fn = click.option("--f-upper", type=str, default=None,
                      help="Probe line upper F'.")(fn)
    fn = click.option("--f-lower", type=str, default=None,
                      help="Probe line lower F.")(fn)
    return fn


def _cloud_overrides(fn):
    fn = click.option("--cloud-sigma-m", type=float, nargs=3, default=None,
                      help="Gaussian widths sx sy sz.")(fn)
    fn = click.option("--cloud-center-m", type=float, nargs=3, default=None,
                      help="Cloud center x y z.")(fn)
    fn = click.option("--peak-density-m3", type=float, default=None,
                      help="Peak atom density.")(fn)
    return fn


def _frame_overrides(fn):
    fn = click.option("--origin-z-m", type=float, default=None)(fn)
    fn = click.option("--origin-x-m", type=float, default=None)(fn)
    fn = click.option("--pixel-pitch-m", type=float, default=None)(fn)
    fn = click.option("--nz", type=int, default=None)(fn)
    fn = click.option("--nx", type=int, default=None)(fn)
    return fn


def _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m) -> None:
    _override(cfg["beam"], power_w=power_w, waist_m=waist_m,
              wavelength_m=wavelength_m, focus_m=focus_m)


def _apply_probe(cfg, f_lower, f_upper, polarization,
                 probe_linewidth_rad_s) -> None:
    _override(cfg["probe"], f_lower=f_lower, f_upper=f_upper,
              polarization=polarization,
              linewidth_rad_s=probe_linewidth_rad_s)


def _apply_cloud(cfg, peak_density_m3, cloud_center_m, cloud_sigma_m) -> None:
    _override(cfg["cloud"], peak_density_m3=peak_density_m3)
    if cloud_center_m is not None:
        cfg["cloud"]["center_m"] = list(cloud_center_m)
    if cloud_sigma_m is not None:
        cfg["cloud"]["sigma_m"] = list(cloud_sigma_m)


def _apply_frame(cfg, nx, nz, pixel_pitch_m, origin_x_m, origin_z_m) -> None:
    _override(cfg["frame"], nx=nx, nz=nz, pixel_pitch_m=pixel_pitch_m,
              origin_x_m=origin_x_m, origin_z_m=origin_z_m)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="TOML run configuration.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=".", show_default=True,
              help="Directory for all output artifacts.")
@click.option("--threads", type=click.IntRange(min=0), default=0,
              show_default=True,
              help="Worker threads, 0 = auto. Kernels are vectorized in "
                   "process; results never depend on this.")
@click.option("--seed", type=int, default=None,
              help="Reserved; every computation is deterministic.")
@click.pass_context
def main(ctx, config_path, out_dir, threads, seed):
    """Light shifts, trap potentials and imaging corrections for a
    focused-Gaussian optical dipole trap."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_config(config_path)
    ctx.obj["out_dir"] = out_dir
    ctx.obj["threads"] = threads  # accepted for batch wrappers; unused
    ctx.obj["seed"] = seed


@main.command("shift")
@_beam_overrides
@click.option("--axis", type=click.Choice(["x", "y", "z"]), default=None,
              help="Profile axis through the focus.")
@click.option("--half-span-m", type=float, default=None,
              help="Half extent of the profile.")
@click.option("--points", type=int, default=None,
              help="Samples along the profile.")
@click.option("--state", "states", multiple=True,
              help='Replace the state list; repeatable (e.g. "5S1/2 F=2").')
@click.pass_context
def cmd_shift(ctx, power_w, waist_m, wavelength_m, focus_m, axis,
              half_span_m, points, states):
    """Light-shift profiles of chosen hyperfine levels along one axis."""
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _override(cfg["shift"], axis=axis, half_span_m=half_span_m, points=points)
    if states:
        cfg["shift"]["states"] = list(states)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        sh = cfg["shift"]
        labels = [str(s) for s in sh["states"]]
        parsed = [parse_state_label(catalog, s) for s in labels]
        coords = _axis_coords(beam, sh["axis"], float(sh["half_span_m"]),
                              int(sh["points"]))
        columns = []
        for state in parsed:
            results = shift_profile(catalog, beam, state, sh["axis"], coords)
            columns.append([r.shift_hz for r in results])
        rows = [[_fmt(c)] + [_fmt(col[i]) for col in columns]
                for i, c in enumerate(coords)]
        csv_path = session.path("shift_profile.csv")
        _write_csv(csv_path, ["position_m"]
                   + [f"shift_hz[{lab}]" for lab in labels], rows)
        fig_path = session.path("shift_profile.png")
        plots.save_profile_figure(fig_path, coords,
                                  dict(zip(labels, columns)),
                                  xlabel=f"{sh['axis']} (um)",
                                  ylabel="shift (MHz)", scale=1e-6)
        return [f"wrote {csv_path}", f"wrote {fig_path}"]

    _run_command(ctx, worker)


@main.command("potential")
@_beam_overrides
@click.option("--term", type=str, default=None, help="Trapped level term.")
@click.option("--f", "f_value", type=str, default=None,
              help="Trapped level F.")
@click.option("--half-span-x-m", type=float, default=None)
@click.option("--half-span-z-m", type=float, default=None)
@click.option("--grid-nx", type=int, default=None)
@click.option("--grid-nz", type=int, default=None)
@click.option("--heatmap/--no-heatmap", default=None,
              help="Also write an 8-bit PGM of the depth map.")
@click.pass_context
def cmd_potential(ctx, power_w, waist_m, wavelength_m, focus_m, term,
                  f_value, half_span_x_m, half_span_z_m, grid_nx, grid_nz,
                  heatmap):
    """Trapping potential map U(x, z) in mK plus the printed trap depth."""
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _override(cfg["potential"], term=term, f=f_value,
              half_span_x_m=half_span_x_m, half_span_z_m=half_span_z_m,
              nx=grid_nx, nz=grid_nz, heatmap=heatmap)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        pc = cfg["potential"]
        state = HyperfineState(pc["term"], _term_j(catalog, pc["term"]),
                               _halfint_of(pc["f"]))
        pot = TrapPotential(catalog=catalog, beam=beam, state=state)
        xs = beam.focus_m + np.linspace(-float(pc["half_span_x_m"]),
                                        float(pc["half_span_x_m"]),
                                        int(pc["nx"]))
        zs = np.linspace(-float(pc["half_span_z_m"]),
                         float(pc["half_span_z_m"]), int(pc["nz"]))
        grid_x, grid_z = np.meshgrid(xs, zs)
        u_mk = pot.energy_j(grid_x, 0.0, grid_z) / CONSTANTS.kB * 1e3

        csv_path = session.path("potential_mk.csv")
        header = ["z_m"] + [_fmt(x) for x in xs]
        rows = [[_fmt(z)] + [_fmt(v) for v in row]
                for z, row in zip(zs, u_mk)]
        _write_csv(csv_path, header, rows)
        fig_path = session.path("potential_mk.png")
        plots.save_heatmap_figure(fig_path, xs, zs, u_mk, label="U (mK)")
        messages = [f"trap depth: {trap_depth(pot):.9g} mK",
                    f"wrote {csv_path}", f"wrote {fig_path}"]
        if pc["heatmap"]:
            pgm_path = session.path("potential_mk.pgm")
            pgm_path.write_bytes(pgm_bytes(-u_mk))
            messages.append(f"wrote {pgm_path}")
        return messages

    _run_command(ctx, worker)


@main.command("sigma-eff")
@_beam_overrides
@_probe_overrides
@click.option("--f", "f_value", type=str, default=None,
              help="Ground F level being imaged.")
@click.option("--mf", type=str, default=None,
              help="Single sublevel instead of the mF average "
                   "(use --mf=-2 for negatives).")
@click.option("--axis", type=click.Choice(["x", "y", "z"]), default=None)
@click.option("--half-span-m", type=float, default=None)
@click.option("--points", type=int, default=None)
@click.pass_context
def cmd_sigma_eff(ctx, power_w, waist_m, wavelength_m, focus_m, f_lower,
                  f_upper, polarization, probe_linewidth_rad_s, f_value, mf,
                  axis, half_span_m, points):
    """Effective probe cross-section along one axis through the trap."""
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _apply_probe(cfg, f_lower, f_upper, polarization, probe_linewidth_rad_s)
    _override(cfg["sigma_eff"], f=f_value, mf=mf, axis=axis,
              half_span_m=half_span_m, points=points)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        probe = _probe_from(cfg, catalog)
        sc = cfg["sigma_eff"]
        table = base_cross_sections(catalog, probe)
        f_level = _halfint_of(sc["f"])
        sigma0 = naive_sigma0(table, probe, f_level)
        coords = _axis_coords(beam, sc["axis"], float(sc["half_span_m"]),
                              int(sc["points"]))
        x, y, z = _axis_positions(beam, sc["axis"], coords)
        mf_key = sc.get("mf")
        if mf_key is None:
            sigma = sigma_eff_averaged(catalog, beam, table, probe, f_level,
                                       x, y, z)
        else:
            sigma = sigma_eff(catalog, beam, table, probe, f_level,
                              _halfint_of(mf_key), x, y, z)
        sigma = np.atleast_1d(sigma)

        csv_path = session.path("sigma_eff.csv")
        rows = [[_fmt(c), _fmt(s), _fmt(s / sigma0)]
                for c, s in zip(coords, sigma)]
        _write_csv(csv_path, ["position_m", "sigma_m2", "sigma_over_sigma0"],
                   rows)
        fig_path = session.path("sigma_eff.png")
        plots.save_profile_figure(fig_path, coords,
                                  {"sigma_eff / sigma0": sigma / sigma0},
                                  xlabel=f"{sc['axis']} (um)",
                                  ylabel="relative cross-section")
        return [f"naive sigma0: {sigma0:.9e} m^2",
                f"minimum along profile: {float(sigma.min()):.9e} m^2",
                f"wrote {csv_path}", f"wrote {fig_path}"]

    _run_command(ctx, worker)


@main.command("synth-od")
@_beam_overrides
@_probe_overrides
@_cloud_overrides
@_frame_overrides
@click.option("--f", "f_value", type=str, default=None,
              help="Ground F level being imaged.")
@click.option("--basename", type=str, default=None,
              help="Stem for the image artifact files.")
@click.pass_context
def cmd_synth_od(ctx, power_w, waist_m, wavelength_m, focus_m, f_lower,
                 f_upper, polarization, probe_linewidth_rad_s,
                 peak_density_m3, cloud_center_m, cloud_sigma_m, nx, nz,
                 pixel_pitch_m, origin_x_m, origin_z_m, f_value, basename):
    """Synthetic OD image of the configured cloud sitting in trap light."""
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _apply_probe(cfg, f_lower, f_upper, polarization, probe_linewidth_rad_s)
    _apply_cloud(cfg, peak_density_m3, cloud_center_m, cloud_sigma_m)
    _apply_frame(cfg, nx, nz, pixel_pitch_m, origin_x_m, origin_z_m)
    _override(cfg["synth_od"], f=f_value, basename=basename)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        probe = _probe_from(cfg, catalog)
        cloud = _cloud_from(cfg)
        frame = _frame_from(cfg)
        so = cfg["synth_od"]
        image = synth_od(catalog, beam, probe, cloud, frame,
                         f_level=_halfint_of(so["f"]))
        stem = so["basename"]
        if "." in stem or "/" in stem:
            raise click.ClickException(
                f"basename must be a bare stem, got {stem!r}")
        paths = [session.path(stem + ext) for ext in (".csv", ".meta", ".pgm")]
        write_od_image(image, session.out_dir / stem)
        fig_path = session.path(stem + ".png")
        pxs, pzs = frame.pixel_centers()
        plots.save_heatmap_figure(fig_path, pxs, pzs, image.data, label="OD")
        value, (iz, ix) = peak_od(image)
        return [f"peak OD {value:.6f} at pixel (iz={iz}, ix={ix})"] \
            + [f"wrote {p}" for p in paths + [fig_path]]

    _run_command(ctx, worker)


@main.command("estimate-n")
@click.argument("image_path", type=click.Path(exists=True, dir_okay=False))
@_beam_overrides
@_probe_overrides
@_cloud_overrides
@click.option("--f", "f_value", type=str, default=None,
              help="Ground F level being imaged.")
@click.option("--results-csv", type=str, default=None,
              help="Results file (under --out) the report row is appended to.")
@click.pass_context
def cmd_estimate_n(ctx, image_path, power_w, waist_m, wavelength_m, focus_m,
                   f_lower, f_upper, polarization, probe_linewidth_rad_s,
                   peak_density_m3, cloud_center_m, cloud_sigma_m, f_value,
                   results_csv):
    """Atom-number report for one OD image (CSV plus .meta sidecar).

    The naive estimate divides the integrated OD by the unshifted
    cross-section; the corrected one fits the peak against a synthetic
    reference cloud in the same trap light, so it needs the cloud widths
    and center from the [cloud] table.
    """
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _apply_probe(cfg, f_lower, f_upper, polarization, probe_linewidth_rad_s)
    _apply_cloud(cfg, peak_density_m3, cloud_center_m, cloud_sigma_m)
    _override(cfg["estimate_n"], f=f_value, results_csv=results_csv)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        probe = _probe_from(cfg, catalog)
        en = cfg["estimate_n"]
        f_level = _halfint_of(en["f"])
        image = read_od_image(image_path)
        table = base_cross_sections(catalog, probe)
        sigma0 = naive_sigma0(table, probe, f_level)
        naive = estimate_naive(image, sigma0)
        c = cfg["cloud"]
        corrected = estimate_corrected(image, catalog, beam, probe,
                                       cloud_widths_m=c["sigma_m"],
                                       cloud_center_m=c["center_m"],
                                       f_level=f_level)
        factor = (corrected.n_atoms / naive.n_atoms
                  if naive.n_atoms > 0 else float("nan"))

        fig_path = session.path(f"estimate_{Path(image_path).stem}.png")
        _, peak_index = peak_od(image)
        plots.save_estimate_figure(fig_path, image, peak_index)

        results_path = Path(ctx.obj["out_dir"]) / en["results_csv"]
        header = ["image", "power_w", "n_naive", "n_corrected",
                  "peak_density_m3", "correction_factor"]
        is_new = not results_path.exists()
        if is_new:
            session.written.append(results_path)  # roll back only if created
        with open(results_path, "a", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if is_new:
                writer.writerow(header)
            writer.writerow([image_path, _fmt(beam.power_w),
                             _fmt(naive.n_atoms), _fmt(corrected.n_atoms),
                             _fmt(corrected.peak_density_m3), _fmt(factor)])

        return [f"N_naive = {naive.n_atoms:.6e}",
                f"N_corrected = {corrected.n_atoms:.6e}",
                f"n0_m3 = {corrected.peak_density_m3:.6e}",
                f"correction_factor = {factor:.6f}",
                f"wrote {fig_path}",
                f"appended {results_path}"]

    _run_command(ctx, worker)


@main.command("power-scan")
@_beam_overrides
@_probe_overrides
@_cloud_overrides
@_frame_overrides
@click.option("--f", "f_value", type=str, default=None,
              help="Ground F level being imaged.")
@click.option("--power", "powers", multiple=True, type=float,
              help="Replace the power list; repeatable.")
@click.pass_context
def cmd_power_scan(ctx, power_w, waist_m, wavelength_m, focus_m, f_lower,
                   f_upper, polarization, probe_linewidth_rad_s,
                   peak_density_m3, cloud_center_m, cloud_sigma_m, nx, nz,
                   pixel_pitch_m, origin_x_m, origin_z_m, f_value, powers):
    """Peak OD and both atom-number estimates across trap powers."""
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _apply_probe(cfg, f_lower, f_upper, polarization, probe_linewidth_rad_s)
    _apply_cloud(cfg, peak_density_m3, cloud_center_m, cloud_sigma_m)
    _apply_frame(cfg, nx, nz, pixel_pitch_m, origin_x_m, origin_z_m)
    _override(cfg["power_scan"], f=f_value)
    if powers:
        cfg["power_scan"]["powers_w"] = list(powers)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        probe = _probe_from(cfg, catalog)
        cloud = _cloud_from(cfg)
        frame = _frame_from(cfg)
        ps = cfg["power_scan"]
        rows = power_scan(catalog, beam, probe, cloud, frame,
                          [float(p) for p in ps["powers_w"]],
                          f_level=_halfint_of(ps["f"]))
        csv_path = session.path("power_scan.csv")
        _write_csv(csv_path,
                   ["power_w", "peak_od", "atoms_naive", "atoms_corrected"],
                   [[_fmt(r.power_w), _fmt(r.peak_od), _fmt(r.atoms_naive),
                     _fmt(r.atoms_corrected)] for r in rows])
        fig_path = session.path("power_scan.png")
        plots.save_power_scan_figure(fig_path, rows)
        return [f"P = {r.power_w:g} W: peak OD {r.peak_od:.4f}, "
                f"N_naive {r.atoms_naive:.4e}, "
                f"N_corrected {r.atoms_corrected:.4e}" for r in rows] \
            + [f"wrote {csv_path}", f"wrote {fig_path}"]

    _run_command(ctx, worker)


@main.command("equipotential-area")
@_beam_overrides
@click.option("--term", type=str, default=None, help="Trapped level term.")
@click.option("--f", "f_value", type=str, default=None,
              help="Trapped level F.")
@click.option("--temperature-k", type=float, default=None,
              help="MOT temperature defining the surface level kB*T.")
@click.option("--points", type=int, default=None,
              help="Axial samples for the profile and quadrature.")
@click.option("--offset-m", "offsets", multiple=True, type=float,
              help="Focal offsets to sweep; repeatable.")
@click.pass_context
def cmd_equipotential_area(ctx, power_w, waist_m, wavelength_m, focus_m,
                           term, f_value, temperature_k, points, offsets):
    """Closed equipotential surface at kB*T: profile, area, offset sweep.

    The total revolution area is invariant under focal displacement; what
    the sweep adds is the surface's cross-section disc where it crosses
    the plane x = 0 (the MOT anchor), which peaks at a finite offset.
    """
    cfg = ctx.obj["config"]
    _apply_beam(cfg, power_w, waist_m, wavelength_m, focus_m)
    _override(cfg["equipotential_area"], term=term, f=f_value,
              temperature_k=temperature_k, points=points)
    if offsets:
        cfg["equipotential_area"]["offsets_m"] = list(offsets)

    def worker(session):
        catalog = _catalog_from(cfg)
        beam = _beam_from(cfg)
        eq = cfg["equipotential_area"]
        state = HyperfineState(eq["term"], _term_j(catalog, eq["term"]),
                               _halfint_of(eq["f"]))
        temp = float(eq["temperature_k"])
        num = int(eq["points"])
        pot = TrapPotential(catalog=catalog, beam=beam, state=state)
        level = CONSTANTS.kB * temp
        xs, rs = equipotential_profile(pot, level, num=num)
        area = equipotential_area(pot, temp, num=num)

        csv_path = session.path("equipotential.csv")
        _write_csv(csv_path, ["x_m", "r_m"],
                   [[_fmt(x), _fmt(r)] for x, r in zip(xs, rs)])
        fig_path = session.path("equipotential.png")
        plots.save_equipotential_figure(fig_path, xs, rs, area, temp)
        messages = [f"trap depth: {trap_depth(pot):.9g} mK",
                    f"surface area: {area:.9e} m^2",
                    f"wrote {csv_path}", f"wrote {fig_path}"]

        sweep = eq.get("offsets_m")
        if sweep:
            rows = []
            discs = []
            areas = []
            for d in sweep:
                moved = TrapPotential(catalog=catalog,
                                      beam=replace(beam, focus_m=float(d)),
                                      state=state)
                a = equipotential_area(moved, temp, num=num)
                # r^2 at the MOT plane x=0, zero once the surface no
                # longer reaches it
                w2 = moved.beam.spot_radius(0.0) ** 2
                axis_depth = abs(CONSTANTS.h
                                 * moved.coefficient_hz_per_intensity
                                 * moved.beam.intensity(0.0, 0.0, 0.0))
                r2 = 0.5 * w2 * math.log(axis_depth / level) \
                    if axis_depth > level else 0.0
                disc = math.pi * r2
                rows.append([_fmt(d), _fmt(a), _fmt(disc)])
                areas.append(a)
                discs.append(disc)
            sweep_csv = session.path("area_vs_offset.csv")
            _write_csv(sweep_csv,
                       ["focus_offset_m", "area_m2", "mot_plane_disc_m2"],
                       rows)
            sweep_fig = session.path("area_vs_offset.png")
            plots.save_profile_figure(sweep_fig, list(sweep),
                                      {"total area": areas,
                                       "disc at x=0": discs},
                                      xlabel="focus offset (um)",
                                      ylabel="area (m^2)")
            messages += [f"wrote {sweep_csv}", f"wrote {sweep_fig}"]
        return messages

    _run_command(ctx, worker)


if __name__ == "__main__":
    main()
