"""Run configuration: ``[section]`` / ``key = value`` text with units in key names.

See README.md for the full grammar. Unknown sections and keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import keyvalue
from .events import FiberSpectrometer, RunConfig
from .interferometer import BeamSplitter
from .keyvalue import FormatError
from .reconstruct import ReconstructionConfig
from .scene import FS2_PER_MM, Dispersion, LayerStack, MirrorObject, object_from_sections
from .spectral import C_LIGHT, SpectralGrid, make_grid, sigma_lambda_to_omega

__all__ = ["Config", "SourceConfig", "GridConfig", "parse_config", "load_config", "FormatError"]

KNOWN_SECTIONS = {
    "grid", "source", "beamsplitter", "mirror", "stack", "layer", "dispersion", "scan",
    "fiber_a", "fiber_b", "run", "reconstruct", "rolloff",
}


@dataclass(frozen=True)
class SourceConfig:
    kind: str = "classical"  # classical | biphoton
    center_wavelength: float = 1550e-9
    sigma_lambda: float = 100e-9
    sigma_prime_lambda: float = 100e-9
    alpha: float = 0.1
    photons_per_pulse: float = 1.0
    rep_rate: float = 100e6
    rho: float = 0.0


@dataclass(frozen=True)
class GridConfig:
    grid: SpectralGrid
    oversample: int = 1
    bin_width: float | None = None  # rad/s; None = point sampling


@dataclass(frozen=True)
class Config:
    grid: GridConfig
    source: SourceConfig
    beamsplitter: BeamSplitter
    port_b: str
    tau: float
    obj: MirrorObject | LayerStack
    dispersion: Dispersion | None
    positions: int
    tilt: float
    fiber_a: FiberSpectrometer
    fiber_b: FiberSpectrometer
    run: RunConfig | None
    n_pulses: int | None
    reconstruct: ReconstructionConfig
    search_window: tuple[float, float] | None
    rolloff_depths: tuple[float, ...] = ()
    digest: str = ""
    sections: tuple = field(default=(), repr=False)

    def with_seed(self, seed: int) -> "Config":
        if self.run is None:
            return self
        return replace(self, run=replace(self.run, rng_seed=int(seed)))


def _one(sections, name):
    found = [b for n, b in sections if n == name]
    if len(found) > 1:
        raise FormatError(f"section [{name}] appears more than once")
    return keyvalue.Section(name, found[0] if found else {})


def _fiber(sec: keyvalue.Section, ref_omega: float) -> FiberSpectrometer:
    ref_wl = sec.float("ref_wavelength_nm", 0.0)
    fib = FiberSpectrometer(
        ref_omega=2 * np.pi * C_LIGHT / (ref_wl * 1e-9) if ref_wl else ref_omega,
        length=sec.float("length_km", 5.0) * 1e3,
        beta1_ref=sec.float("group_index", 1.4682) / C_LIGHT,
        beta2=sec.float("beta2_fs2_per_mm", 23.0) * FS2_PER_MM,
        jitter_sigma=sec.float("jitter_ps", 35.0) * 1e-12,
        efficiency=sec.float("efficiency", 0.65),
        time_bin=sec.float("time_bin_ps", 1.0) * 1e-12,
    )
    sec.check_unknown()
    return fib


def parse_config(text: str) -> Config:
    """Parse and validate a config; raises :class:`FormatError` on any problem."""
    sections = keyvalue.parse(text)
    unknown = {n for n, _ in sections} - KNOWN_SECTIONS
    if unknown:
        raise FormatError(f"unknown sections: {', '.join(sorted(unknown))}")
    try:
        return _build(sections)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _build(sections) -> Config:
    s = _one(sections, "source")
    kind = s.str("kind", "classical", {"classical", "biphoton"})
    g = _one(sections, "grid")
    center_nm = g.float("center_wavelength_nm", 1550.0)
    src = SourceConfig(
        kind=kind,
        center_wavelength=s.float("center_wavelength_nm", center_nm) * 1e-9,
        sigma_lambda=s.float("sigma_nm", 100.0) * 1e-9,
        sigma_prime_lambda=s.float("sigma_prime_nm", s.float("sigma_nm", 100.0)) * 1e-9,
        alpha=s.float("alpha", 0.1),
        photons_per_pulse=s.float("photons_per_pulse", 1.0),
        rep_rate=s.float("rep_rate_mhz", 100.0) * 1e6,
        rho=s.float("rho", 0.0),
    )
    s.check_unknown()
    if src.sigma_lambda <= 0 or src.sigma_prime_lambda <= 0:
        raise FormatError("[source] widths must be positive")
    if kind == "classical" and src.rho != 0:
        raise FormatError("[source] rho only applies to kind = biphoton")
    if not -1 < src.rho < 1:
        raise FormatError("[source] rho must lie in (-1, 1)")
    if src.alpha < 0 or src.photons_per_pulse <= 0 or src.rep_rate <= 0:
        raise FormatError("[source] alpha must be >= 0; photons_per_pulse and rep_rate_mhz > 0")

    n_points = g.int("n_points", 256)
    span_nm = g.float("span_wavelength_nm", 0.0)
    span_sig = g.float("span_sigmas", 0.0)
    if bool(span_nm) == bool(span_sig):
        raise FormatError("[grid] needs exactly one of span_wavelength_nm or span_sigmas")
    if span_nm:
        grid = make_grid(center_nm * 1e-9, span_nm * 1e-9, n_points)
    else:
        sig_w = sigma_lambda_to_omega(center_nm * 1e-9, src.sigma_lambda)
        grid = SpectralGrid(2 * np.pi * C_LIGHT / (center_nm * 1e-9), span_sig * sig_w, n_points)
    bin_nm = g.float("bin_width_nm", 0.0)
    oversample = g.int("oversample", 16 if bin_nm else 1)
    if oversample < 1:
        raise FormatError("[grid] oversample must be >= 1")
    gcfg = GridConfig(grid, oversample, sigma_lambda_to_omega(center_nm * 1e-9, bin_nm * 1e-9) if bin_nm else None)
    g.check_unknown()

    b = _one(sections, "beamsplitter")
    bs = BeamSplitter(b.float("theta_rad", np.pi / 2), b.float("phi_t_rad", 0.0), b.float("phi_r_rad", 0.0))
    port_b = b.str("port_b", "printed", {"printed", "split"})
    tau = b.float("tau_fs", 0.0) * 1e-15
    b.check_unknown()

    obj, dispersion = object_from_sections(sections)

    sc = _one(sections, "scan")
    positions = sc.int("positions", 1)
    tilt = sc.float("tilt_um", 0.0) * 1e-6
    sc.check_unknown()
    if positions < 1:
        raise FormatError("[scan] positions must be >= 1")

    fiber_a = _fiber(_one(sections, "fiber_a"), grid.center_omega)
    fiber_b = _fiber(_one(sections, "fiber_b"), grid.center_omega)

    rs = _one(sections, "run")
    run, n_pulses = None, None
    if rs.body:
        n_pulses = rs.int("n_pulses")
        seed = rs.int("seed", 0)
        dark = rs.float("dark_count_rate_hz", 0.0)
        rs.check_unknown()
        if n_pulses < 1:
            raise FormatError("[run] n_pulses must be >= 1")
        run = RunConfig(n_pulses, seed, dark, src.rep_rate)

    r = _one(sections, "reconstruct")
    diag_default = "anti" if kind == "biphoton" else "main"
    window = r.str("window", "none", {"none", "hann"})
    rec = ReconstructionConfig(
        mode=r.str("mode", "row", {"row", "column", "diagonal"}),
        n_diagonals=r.int("n_diagonals", 20),
        anti_diagonal=r.str("diagonal", diag_default, {"main", "anti"}) == "anti",
        zero_pad=r.int("zero_pad", 4),
        window=None if window == "none" else window,
        phase_poly=tuple(r.floats("phase_poly", ())),
        db_floor=r.float("db_floor", -60.0),
    )
    lo, hi = r.float("search_min_um", -1.0), r.float("search_max_um", -1.0)
    search = (lo * 1e-6, hi * 1e-6) if lo >= 0 and hi > lo else None
    r.check_unknown()

    ro = _one(sections, "rolloff")
    depths: tuple[float, ...] = ()
    if ro.body:
        start, stop, step = ro.float("depth_start_um"), ro.float("depth_stop_um"), ro.float("depth_step_um")
        ro.check_unknown()
        if step <= 0 or stop <= start:
            raise FormatError("[rolloff] needs depth_stop_um > depth_start_um and depth_step_um > 0")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        depths = tuple((start + step * np.arange(n)) * 1e-6)

    return Config(
        grid=gcfg, source=src, beamsplitter=bs, port_b=port_b, tau=tau, obj=obj, dispersion=dispersion,
        positions=positions, tilt=tilt, fiber_a=fiber_a, fiber_b=fiber_b, run=run, n_pulses=n_pulses,
        reconstruct=rec, search_window=search, rolloff_depths=depths,
        digest=keyvalue.digest(sections), sections=tuple(sections),
    )


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
