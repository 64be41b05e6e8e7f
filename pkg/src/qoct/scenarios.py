"""High-level drivers shared by the command line and the acceptance tests.

Each function takes a parsed :class:`~qoct.config.Config` and returns plain
data objects; nothing here touches the filesystem.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from . import coincidence as co
from . import reconstruct as rc
from .config import Config
from .events import ModelError, simulate_run
from .interferometer import (
    BiphotonSource,
    CoherentSource,
    biphoton_joint_spectrum,
    biphoton_jsa,
    click_probabilities,
    coherent_joint_spectrum,
)
from .scene import MirrorObject, transfer
from .spectral import (
    C_LIGHT,
    JointSpectrum,
    SpectralGrid,
    bin_integrate,
    effective_bin_width,
    gaussian_amplitude,
    sigma_lambda_to_omega,
)

__all__ = [
    "evaluation_grid",
    "object_at",
    "analytic_joint",
    "click_vectors",
    "simulate_tags",
    "process_tags",
    "rolloff_sweep",
    "predicted_six_db_range",
    "bscan_scene",
    "default_search_window",
    "compare",
]


def evaluation_grid(cfg: Config) -> SpectralGrid:
    """Grid on which the physics is evaluated (oversampled when bins integrate)."""
    g = cfg.grid
    return g.grid.oversampled(g.oversample) if g.oversample > 1 else g.grid


def _bin_width(cfg: Config) -> float:
    g = cfg.grid
    return g.grid.step if g.bin_width is None else g.bin_width


def object_at(cfg: Config, position: int = 0):
    """Configured object shifted by ``position * tilt`` (lateral scan)."""
    obj, shift = cfg.obj, position * cfg.tilt
    if shift == 0:
        return obj
    if isinstance(obj, MirrorObject):
        return replace(obj, depth=obj.depth + shift)
    return replace(obj, air_gap=obj.air_gap + shift / 2)


def _transfer(cfg: Config, grid: SpectralGrid, obj):
    return transfer(grid, obj, cfg.dispersion)


def _coherent_source(cfg: Config, grid: SpectralGrid) -> CoherentSource:
    s = cfg.source
    return CoherentSource(s.alpha, gaussian_amplitude(grid, s.center_wavelength, s.sigma_lambda), s.rep_rate)


def _biphoton_source(cfg: Config) -> BiphotonSource:
    s = cfg.source
    return BiphotonSource.from_wavelength(s.center_wavelength, s.sigma_lambda, s.rho, s.sigma_prime_lambda)


def _coarse_args(cfg: Config):
    if cfg.grid.oversample > 1:
        return {"coarse": cfg.grid.grid, "bin_width": _bin_width(cfg)}
    return {}


def click_vectors(cfg: Config, obj=None):
    """Per-bin click probabilities ``(p_a, p_b)`` on the configured grid (classical source)."""
    if cfg.source.kind != "classical":
        raise ModelError("per-channel click vectors exist only for the classical source")
    fine = evaluation_grid(cfg)
    f = _transfer(cfg, fine, cfg.obj if obj is None else obj)
    return click_probabilities(_coherent_source(cfg, fine), f, cfg.beamsplitter, cfg.tau, cfg.port_b,
                               cfg.source.photons_per_pulse, **_coarse_args(cfg))


def analytic_joint(cfg: Config, obj=None) -> JointSpectrum:
    """Analytic joint spectrum of the configured source and object."""
    obj = cfg.obj if obj is None else obj
    fine = evaluation_grid(cfg)
    f = _transfer(cfg, fine, obj)
    if cfg.source.kind == "classical":
        js = coherent_joint_spectrum(_coherent_source(cfg, fine), f, cfg.beamsplitter, cfg.tau,
                                     port_b=cfg.port_b, photons_per_pulse=cfg.source.photons_per_pulse,
                                     **_coarse_args(cfg))
    else:
        js = biphoton_joint_spectrum(biphoton_jsa(_biphoton_source(cfg), fine), f)
        if cfg.grid.oversample > 1:
            coarse, w = cfg.grid.grid, _bin_width(cfg)
            v = np.apply_along_axis(bin_integrate, 0, js.values, fine, coarse, w)
            v = np.apply_along_axis(bin_integrate, 1, v, fine, coarse, w)
            md = dict(js.metadata)
            md["bin_width"] = repr(w)
            js = JointSpectrum(coarse, coarse, v, js.kind, md)
    return js.with_metadata(config_sha256=cfg.digest)


def simulate_tags(cfg: Config, workers: int = 1) -> np.ndarray:
    if cfg.run is None:
        raise ModelError("simulate-tags needs a [run] section")
    pa, pb = click_vectors(cfg)
    return simulate_run(pa, pb, cfg.grid.grid, cfg.fiber_a, cfg.fiber_b, cfg.run, workers)


def process_tags(tags: np.ndarray, cfg: Config):
    """Pair, histogram and normalise a tag stream.

    The normalised spectrum is divided by both detector efficiencies, so it
    estimates the per-pulse coincidence probability before detection loss.

    Returns ``(counts, probability, counters)``.
    """
    if cfg.run is None:
        raise ModelError("process-tags needs a [run] section for n_pulses")
    grid = cfg.grid.grid
    pairs, counters = co.match_pairs(tags, cfg.fiber_a, cfg.fiber_b, grid.band)
    counts = co.accumulate(pairs, grid).with_metadata(config_sha256=cfg.digest)
    prob = co.normalize(counts, cfg.run.n_pulses)
    eta = cfg.fiber_a.efficiency * cfg.fiber_b.efficiency
    if eta <= 0:
        raise ModelError("detector efficiency is zero; nothing to normalise")
    prob = JointSpectrum(prob.grid_a, prob.grid_b, np.minimum(prob.values / eta, 1.0), prob.kind,
                         {**prob.metadata, "efficiency_corrected": "true"})
    return counts, prob, counters


def default_search_window(cfg: Config, obj=None, spec: rc.LineSpectrum | None = None):
    """Peak search range: configured, else around a mirror's OPD, else beyond the DC lobe."""
    if cfg.search_window is not None:
        return cfg.search_window
    obj = cfg.obj if obj is None else obj
    if isinstance(obj, MirrorObject) and obj.opd > 0:
        return (0.5 * obj.opd, 1.5 * obj.opd)
    step = cfg.grid.grid.step if spec is None else spec.step
    return (0.05 * np.pi * C_LIGHT / step, np.pi * C_LIGHT / step)


def rolloff_sweep(cfg: Config):
    """Mirror stepped through the configured depths; returns ``(curve, scans)``."""
    if not cfg.rolloff_depths:
        raise ModelError("rolloff needs a [rolloff] section")
    if not isinstance(cfg.obj, MirrorObject):
        raise ModelError("rolloff sweeps a [mirror] object")
    depths = np.asarray(cfg.rolloff_depths)
    scans = [rc.reconstruct_ascan(analytic_joint(cfg, replace(cfg.obj, depth=float(d))), cfg.reconstruct)
             for d in depths]
    return rc.rolloff(scans, depths), scans


def predicted_six_db_range(cfg: Config) -> float:
    """-6 dB depth of the box-bin fringe visibility ``sinc(z w / 2c)``.

    Referenced to the shallowest configured depth, as the measured curve is.
    ``inf`` when the level is not reached before the first visibility zero.
    """
    w = effective_bin_width(evaluation_grid(cfg), _bin_width(cfg)) if cfg.grid.oversample > 1 else 0.0
    if w == 0:
        return np.inf

    def vis(z):
        return np.sinc(z * w / (2 * np.pi * C_LIGHT))

    z0 = cfg.rolloff_depths[0] if cfg.rolloff_depths else 0.0
    target = 10 ** -0.6 * vis(z0)
    z_zero = 2 * np.pi * C_LIGHT / w
    if z0 >= z_zero:
        return np.inf
    return float(brentq(lambda z: vis(z) - target, z0, z_zero))


def bscan_scene(cfg: Config, mode: str | None = None) -> rc.BScan:
    """B-scan over ``[scan] positions`` lateral positions of the configured object."""
    rcfg = cfg.reconstruct if mode is None else replace(cfg.reconstruct, mode=mode)
    jss = [analytic_joint(cfg, object_at(cfg, i)) for i in range(cfg.positions)]
    return rc.bscan(jss, rcfg)


def _fwhm(js, rcfg, window):
    return rc.peak_metrics(rc.reconstruct_ascan(js, rcfg), window)


def compare(cfg: Config) -> dict[str, float]:
    """Classical versus entangled metrics for the configured mirror.

    Both sources share the grid, centre and ``sigma_nm``. The biphoton
    uses the configured ``rho`` (``-0.99`` when the config is classical).
    Dispersion metrics appear when a ``[dispersion]`` section is present.
    """
    if not isinstance(cfg.obj, MirrorObject) or cfg.obj.opd <= 0:
        raise ModelError("compare needs a [mirror] with opd_um > 0")
    rho = cfg.source.rho if cfg.source.kind == "biphoton" else -0.99
    classical = replace(cfg, source=replace(cfg.source, kind="classical", rho=0.0), dispersion=None)
    quantum = replace(cfg, source=replace(cfg.source, kind="biphoton", rho=rho), dispersion=None)
    window = default_search_window(cfg)
    base = replace(cfg.reconstruct, phase_poly=())
    row = replace(base, mode="row")
    col = replace(base, mode="column")
    diag = replace(base, mode="diagonal", anti_diagonal=False)
    anti = replace(base, mode="diagonal", anti_diagonal=True)

    jc = analytic_joint(classical)
    jq = analytic_joint(quantum)
    out = {
        "fwhm_row_um": _fwhm(jc, row, window).fwhm * 1e6,
        "fwhm_column_um": _fwhm(jc, col, window).fwhm * 1e6,
        "fwhm_diagonal_um": _fwhm(jc, diag, window).fwhm * 1e6,
        "fwhm_biphoton_um": _fwhm(jq, anti, window).fwhm * 1e6,
        "peak_row_um": _fwhm(jc, row, window).position * 1e6,
        "sv_ratio_classical": rc.singular_value_ratio(jc),
        "sv_ratio_biphoton": rc.singular_value_ratio(jq),
        "rho": rho,
    }
    out["resolution_ratio"] = out["fwhm_biphoton_um"] / out["fwhm_row_um"]
    if cfg.dispersion is not None:
        d = cfg.dispersion
        cd = replace(classical, dispersion=d)
        qd = replace(quantum, dispersion=d)
        fr = _fwhm(analytic_joint(cd), row, window).fwhm * 1e6
        fq = _fwhm(analytic_joint(qd), anti, window).fwhm * 1e6
        b = d.beta2 * d.length / 2
        out.update(
            fwhm_row_dispersed_um=fr,
            fwhm_biphoton_dispersed_um=fq,
            broadening_classical=fr / out["fwhm_row_um"],
            broadening_classical_oracle=float(np.sqrt(1 + (b * _sigma_omega(cfg) ** 2) ** 2)),
            broadening_biphoton=fq / out["fwhm_biphoton_um"],
        )
    return out


def _sigma_omega(cfg: Config) -> float:
    return sigma_lambda_to_omega(cfg.source.center_wavelength, cfg.source.sigma_lambda)
