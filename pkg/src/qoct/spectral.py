"""Spectral axes and containers shared by every other module.

All frequencies are angular frequencies in rad/s and all lengths are in
metres. Grids are uniform in omega.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.constants import c as C_LIGHT

__all__ = [
    "C_LIGHT",
    "SpectralGrid",
    "ComplexSpectrum",
    "JointSpectrum",
    "make_grid",
    "gaussian_amplitude",
    "sigma_lambda_to_omega",
    "bin_integrate",
    "effective_bin_width",
    "grid_from_omegas",
    "spectrum_to_csv",
    "spectrum_from_csv",
    "joint_to_csv",
    "joint_from_csv",
]


def _readonly(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform angular-frequency axis.

    ``omega_k = center_omega + span_omega * (k / (n_points - 1) - 1/2)``.
    """

    center_omega: float
    span_omega: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (np.isfinite(self.center_omega) and np.isfinite(self.span_omega)):
            raise ValueError("grid parameters must be finite")
        if self.span_omega <= 0:
            raise ValueError("span_omega must be positive")
        if self.center_omega - self.span_omega / 2 <= 0:
            raise ValueError("all grid frequencies must be positive")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def step(self) -> float:
        return self.span_omega / (self.n_points - 1)

    @property
    def omega(self) -> np.ndarray:
        k = np.arange(self.n_points)
        w = self.center_omega + self.span_omega * (k / (self.n_points - 1) - 0.5)
        w.setflags(write=False)
        return w

    @property
    def detuning(self) -> np.ndarray:
        """``omega - center_omega``."""
        return self.omega - self.center_omega

    @property
    def band(self) -> tuple[float, float]:
        return (self.center_omega - self.span_omega / 2, self.center_omega + self.span_omega / 2)

    def omega_at(self, k):
        return self.center_omega + self.span_omega * (np.asarray(k) / (self.n_points - 1) - 0.5)

    def index_of(self, omega):
        """Nearest grid index (not clipped)."""
        x = (np.asarray(omega, dtype=float) - self.band[0]) / self.step
        return np.rint(x).astype(np.int64)

    def oversampled(self, factor: int) -> "SpectralGrid":
        """Same band with ``factor`` sub-steps per step; ``fine.omega[::factor] == omega``."""
        factor = int(factor)
        if factor < 1:
            raise ValueError("oversampling factor must be >= 1")
        return SpectralGrid(self.center_omega, self.span_omega, (self.n_points - 1) * factor + 1)

    def is_compatible(self, other: "SpectralGrid", rtol: float = 1e-12) -> bool:
        return (
            self.n_points == other.n_points
            and abs(self.center_omega - other.center_omega) <= rtol * self.center_omega
            and abs(self.span_omega - other.span_omega) <= rtol * self.span_omega
        )


@dataclass(frozen=True)
class ComplexSpectrum:
    grid: SpectralGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        a = _readonly(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} amplitudes, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.omega

    def __mul__(self, other):
        if isinstance(other, ComplexSpectrum):
            _check_same_grid(self.grid, other.grid)
            return ComplexSpectrum(self.grid, self.amplitudes * other.amplitudes)
        return ComplexSpectrum(self.grid, self.amplitudes * other)

    __rmul__ = __mul__


@dataclass(frozen=True)
class JointSpectrum:
    """Coincidence map; rows follow ``grid_a`` (channel A), columns ``grid_b``.

    ``kind`` is ``"probability"`` (per pulse) or ``"counts"``.
    """

    grid_a: SpectralGrid
    grid_b: SpectralGrid
    values: np.ndarray
    kind: str = "probability"
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("probability", "counts"):
            raise ValueError(f"unknown kind {self.kind!r}")
        v = _readonly(self.values, dtype=np.int64 if self.kind == "counts" else float)
        if v.shape != (self.grid_a.n_points, self.grid_b.n_points):
            raise ValueError(f"values shape {v.shape} does not match the grids")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if np.any(v < 0):
            raise ValueError("joint spectrum values must be non-negative")
        if self.kind == "probability" and np.any(v > 1):
            raise ValueError("probability joint spectrum has cells above 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "metadata", MappingProxyType({str(k): str(x) for k, x in dict(self.metadata).items()}))

    @property
    def shape(self):
        return self.values.shape

    def with_metadata(self, **extra) -> "JointSpectrum":
        md = dict(self.metadata)
        md.update({k: str(v) for k, v in extra.items()})
        return JointSpectrum(self.grid_a, self.grid_b, self.values, self.kind, md)


def _check_same_grid(a: SpectralGrid, b: SpectralGrid):
    if not a.is_compatible(b):
        raise ValueError("spectra are defined on different grids")


def make_grid(center_wavelength: float, span_wavelength: float, n_points: int) -> SpectralGrid:
    """Uniform omega grid covering ``center +/- span/2`` in wavelength.

    The band edges are converted exactly (``omega = 2 pi c / lambda``); the
    grid centre is ``2 pi c / center_wavelength``, so the wavelength
    footprint is covered but generally not symmetric in omega. The span is
    taken as twice the larger edge offset.
    """
    if center_wavelength <= 0 or span_wavelength <= 0:
        raise ValueError("wavelengths must be positive")
    if int(n_points) != n_points or n_points < 2:
        raise ValueError("n_points must be an integer >= 2")
    if span_wavelength >= 2 * center_wavelength:
        raise ValueError("span_wavelength must be below 2 * center_wavelength")
    w_c = 2 * np.pi * C_LIGHT / center_wavelength
    w_hi = 2 * np.pi * C_LIGHT / (center_wavelength - span_wavelength / 2)
    w_lo = 2 * np.pi * C_LIGHT / (center_wavelength + span_wavelength / 2)
    half = max(w_hi - w_c, w_c - w_lo)
    return SpectralGrid(w_c, 2 * half, int(n_points))


def sigma_lambda_to_omega(center_wavelength: float, sigma_lambda: float) -> float:
    """Linearised width conversion ``|d omega| = 2 pi c / lambda^2 |d lambda|``."""
    return 2 * np.pi * C_LIGHT * sigma_lambda / center_wavelength**2


def gaussian_amplitude(grid: SpectralGrid, center_wavelength: float, sigma_lambda: float) -> ComplexSpectrum:
    """Real Gaussian amplitude ``exp(-(w - w_c)^2 / (2 sigma_w^2))`` with unit peak.

    ``sigma_lambda`` is a standard deviation in wavelength, converted at the
    centre wavelength. The power spectrum is ``exp(-(w - w_c)^2 / sigma_w^2)``.
    """
    if sigma_lambda <= 0:
        raise ValueError("sigma_lambda must be positive")
    if center_wavelength <= 0:
        raise ValueError("center_wavelength must be positive")
    w_c = 2 * np.pi * C_LIGHT / center_wavelength
    s = sigma_lambda_to_omega(center_wavelength, sigma_lambda)
    d = grid.omega - w_c
    return ComplexSpectrum(grid, np.exp(-(d**2) / (2 * s**2)))


def bin_integrate(fine_values, fine: SpectralGrid, coarse: SpectralGrid, width: float) -> np.ndarray:
    """Average ``fine_values`` over a box of ``width`` (rad/s) around each coarse point.

    ``fine`` must be ``coarse.oversampled(m)``. The box holds an odd number of
    fine samples, ``2 * round(width / (2 * fine.step)) + 1``; samples beyond
    the band are treated as missing and the mean is taken over those present.
    """
    fine_values = np.asarray(fine_values)
    m = (fine.n_points - 1) // (coarse.n_points - 1)
    if not coarse.oversampled(m).is_compatible(fine):
        raise ValueError("fine grid is not an oversampling of the coarse grid")
    half = int(round(width / (2 * fine.step)))
    kernel = np.ones(2 * half + 1)
    num = np.convolve(fine_values, kernel, mode="same")
    den = np.convolve(np.ones(fine.n_points), kernel, mode="same")
    return (num / den)[::m]


def effective_bin_width(fine: SpectralGrid, width: float) -> float:
    """Width actually realised by :func:`bin_integrate`."""
    half = int(round(width / (2 * fine.step)))
    return (2 * half + 1) * fine.step


# --- CSV ---------------------------------------------------------------------


def _meta_lines(metadata: Mapping[str, str]) -> str:
    return "".join(f"# {k}={v}\n" for k, v in sorted(metadata.items()))


def _split_meta(text: str):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    return meta, body


def grid_from_omegas(omegas, rtol: float = 1e-9) -> SpectralGrid:
    w = np.asarray(omegas, dtype=float)
    if w.size < 2:
        raise ValueError("need at least two frequencies")
    g = SpectralGrid((w[0] + w[-1]) / 2, w[-1] - w[0], w.size)
    if not np.allclose(g.omega, w, rtol=rtol, atol=0):
        raise ValueError("frequency column is not a uniform grid")
    return g


def spectrum_to_csv(spec: ComplexSpectrum, metadata: Mapping[str, str] | None = None) -> str:
    buf = io.StringIO()
    buf.write(_meta_lines(metadata or {}))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega_rad_per_s", "re", "im"])
    for om, a in zip(spec.omega, spec.amplitudes):
        w.writerow([repr(float(om)), repr(float(a.real)), repr(float(a.imag))])
    return buf.getvalue()


def spectrum_from_csv(text: str) -> tuple[ComplexSpectrum, dict]:
    meta, body = _split_meta(text)
    rows = list(csv.reader(body))
    if rows[0] != ["omega_rad_per_s", "re", "im"]:
        raise ValueError("unexpected spectrum CSV header")
    data = np.array(rows[1:], dtype=float)
    return ComplexSpectrum(grid_from_omegas(data[:, 0]), data[:, 1] + 1j * data[:, 2]), meta


def joint_to_csv(js: JointSpectrum) -> str:
    """Header row holds the channel-B frequencies, first column channel A."""
    buf = io.StringIO()
    md = dict(js.metadata)
    md["kind"] = js.kind
    buf.write(_meta_lines(md))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega_a\\omega_b"] + [repr(float(x)) for x in js.grid_b.omega])
    fmt = (lambda x: str(int(x))) if js.kind == "counts" else (lambda x: repr(float(x)))
    for om, row in zip(js.grid_a.omega, js.values):
        w.writerow([repr(float(om))] + [fmt(x) for x in row])
    return buf.getvalue()


def joint_from_csv(text: str) -> JointSpectrum:
    meta, body = _split_meta(text)
    rows = list(csv.reader(body))
    grid_b = grid_from_omegas(np.array(rows[0][1:], dtype=float))
    data = np.array(rows[1:], dtype=float)
    grid_a = grid_from_omegas(data[:, 0])
    kind = meta.pop("kind", "probability")
    values = data[:, 1:]
    if kind == "counts":
        values = np.rint(values).astype(np.int64)
    return JointSpectrum(grid_a, grid_b, values, kind, meta)
