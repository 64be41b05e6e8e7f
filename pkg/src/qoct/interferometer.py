"""Analytic coincidence models.

Coherent light: a weak pulse passes the Michelson-Linnik interferometer
(beam splitter BS1 twice), then BS2 splits the returning light onto two
spectrally resolving detectors A and B. Each detector is a binary
click/no-click device per spectral bin, so the coincidence probability is
the outer product of the two per-bin click probabilities.

Entangled pairs: ``P(w, w') = |phi(w, w')|^2 |f(w) - f(w')|^2`` with a
correlated Gaussian joint spectral intensity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    ComplexSpectrum,
    JointSpectrum,
    SpectralGrid,
    _check_same_grid,
    bin_integrate,
    sigma_lambda_to_omega,
)
from .spectral import C_LIGHT

__all__ = [
    "ALPHA_REF",
    "BeamSplitter",
    "CoherentSource",
    "BiphotonSource",
    "bs_matrix",
    "output_amplitudes",
    "photon_density",
    "click_probabilities",
    "coherent_joint_spectrum",
    "biphoton_jsa",
    "biphoton_joint_spectrum",
]

# Amplitude at which ``photons_per_pulse`` photons enter the interferometer.
ALPHA_REF = 0.1

PORT_B_FORMS = ("printed", "split")


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless splitter; transmittance ``cos^2(theta/2)``."""

    theta: float = np.pi / 2
    phi_t: float = 0.0
    phi_r: float = 0.0

    @property
    def transmittance(self) -> float:
        return np.cos(self.theta / 2) ** 2

    @property
    def reflectance(self) -> float:
        return np.sin(self.theta / 2) ** 2


@dataclass(frozen=True)
class CoherentSource:
    alpha: float
    u: ComplexSpectrum
    rep_rate: float = 100e6

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        # the continuous envelope peaks at 1; an even grid may straddle the peak
        peak = np.max(np.abs(self.u.amplitudes))
        if not 0 < peak <= 1 + 1e-9:
            raise ValueError(f"source spectrum must be peak-normalised to 1 (sampled peak {peak})")
        if not self.rep_rate > 0:
            raise ValueError("rep_rate must be positive")


@dataclass(frozen=True)
class BiphotonSource:
    """Correlated Gaussian pair source; widths in rad/s, ``center`` in rad/s."""

    sigma: float
    sigma_prime: float
    rho: float
    center: float

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if not (self.sigma > 0 and self.sigma_prime > 0):
            raise ValueError("spectral widths must be positive")

    @classmethod
    def from_wavelength(cls, center_wavelength, sigma_lambda, rho, sigma_prime_lambda=None):
        if sigma_prime_lambda is None:
            sigma_prime_lambda = sigma_lambda
        return cls(
            sigma=sigma_lambda_to_omega(center_wavelength, sigma_lambda),
            sigma_prime=sigma_lambda_to_omega(center_wavelength, sigma_prime_lambda),
            rho=rho,
            center=2 * np.pi * C_LIGHT / center_wavelength,
        )


def bs_matrix(bs: BeamSplitter) -> np.ndarray:
    c, s = np.cos(bs.theta / 2), np.sin(bs.theta / 2)
    return np.array(
        [
            [c * np.exp(1j * bs.phi_t), s * np.exp(1j * bs.phi_r)],
            [-s * np.exp(-1j * bs.phi_r), c * np.exp(-1j * bs.phi_t)],
        ]
    )


def output_amplitudes(src: CoherentSource, f: ComplexSpectrum, bs: BeamSplitter, tau: float = 0.0,
                      grid: SpectralGrid | None = None, port_b: str = "printed"):
    """Coherent amplitudes at the two detector ports.

    With ``gamma = alpha u f`` and ``zeta = alpha u exp(-i w tau)``::

        alpha~ = gamma c^3 e^{3i phi_t} - zeta c s^2 e^{i phi_t}

    ``port_b="printed"`` uses
    ``beta~ = c s^2 (gamma e^{i(phi_t - 2 phi_r)} + zeta e^{-i(phi_t + 2 phi_r)})``.
    ``port_b="split"`` instead sends the same returning field to both ports,
    ``beta~ = s e^{-i phi_r} (gamma c^2 e^{2i phi_t} - zeta s^2)``.

    Returns
    -------
    (alpha_tilde, beta_tilde) : tuple of ComplexSpectrum
    """
    if port_b not in PORT_B_FORMS:
        raise ValueError(f"port_b must be one of {PORT_B_FORMS}")
    _check_same_grid(src.u.grid, f.grid)
    if grid is not None:
        _check_same_grid(grid, f.grid)
    g = f.grid
    a = src.alpha * src.u.amplitudes
    gamma = a * f.amplitudes
    zeta = a * np.exp(-1j * g.omega * tau)
    c, s = np.cos(bs.theta / 2), np.sin(bs.theta / 2)
    pt, pr = bs.phi_t, bs.phi_r
    at = gamma * c**3 * np.exp(3j * pt) - zeta * c * s**2 * np.exp(1j * pt)
    if port_b == "printed":
        bt = c * s**2 * (gamma * np.exp(1j * (pt - 2 * pr)) + zeta * np.exp(-1j * (pt + 2 * pr)))
    else:
        bt = s * np.exp(-1j * pr) * (gamma * c**2 * np.exp(2j * pt) - zeta * s**2)
    return ComplexSpectrum(g, at), ComplexSpectrum(g, bt)


def photon_density(src: CoherentSource, f: ComplexSpectrum, bs: BeamSplitter, tau: float = 0.0,
                   port_b: str = "printed", photons_per_pulse: float = 1.0):
    """Mean photon number per unit angular frequency at ports A and B.

    ``|alpha~(w)|^2`` is scaled by ``1 / omega_norm`` with
    ``omega_norm = ALPHA_REF^2 * integral |u|^2 dw / photons_per_pulse``, so
    at ``alpha = ALPHA_REF`` the pulse entering the interferometer carries
    ``photons_per_pulse`` photons on average.
    """
    if photons_per_pulse <= 0:
        raise ValueError("photons_per_pulse must be positive")
    at, bt = output_amplitudes(src, f, bs, tau, port_b=port_b)
    omega_norm = ALPHA_REF**2 * np.sum(np.abs(src.u.amplitudes) ** 2) * f.grid.step / photons_per_pulse
    return np.abs(at.amplitudes) ** 2 / omega_norm, np.abs(bt.amplitudes) ** 2 / omega_norm


def click_probabilities(src: CoherentSource, f: ComplexSpectrum, bs: BeamSplitter, tau: float = 0.0,
                        port_b: str = "printed", photons_per_pulse: float = 1.0,
                        coarse: SpectralGrid | None = None, bin_width: float | None = None):
    """Per-bin click probabilities ``1 - exp(-n_k)`` for detectors A and B.

    Without ``coarse`` the bins are the points of ``f.grid`` and
    ``n_k = density(w_k) * dw``. With ``coarse`` (``f.grid`` must oversample
    it) each bin integrates the photon density over ``bin_width`` around the
    coarse point, which washes out fringes finer than the bin.
    """
    da, db = photon_density(src, f, bs, tau, port_b, photons_per_pulse)
    if coarse is None:
        step = f.grid.step
    else:
        width = coarse.step if bin_width is None else bin_width
        da = bin_integrate(da, f.grid, coarse, width)
        db = bin_integrate(db, f.grid, coarse, width)
        step = coarse.step
    return -np.expm1(-da * step), -np.expm1(-db * step)


def coherent_joint_spectrum(src: CoherentSource, f: ComplexSpectrum, bs: BeamSplitter, tau: float = 0.0,
                            grid: SpectralGrid | None = None, port_b: str = "printed",
                            photons_per_pulse: float = 1.0, coarse: SpectralGrid | None = None,
                            bin_width: float | None = None) -> JointSpectrum:
    """Coincidence probability per pulse, the outer product of the click probabilities."""
    if grid is not None:
        _check_same_grid(grid, f.grid)
    pa, pb = click_probabilities(src, f, bs, tau, port_b, photons_per_pulse, coarse, bin_width)
    g = f.grid if coarse is None else coarse
    md = {
        "model": "coherent",
        "alpha": repr(src.alpha),
        "theta": repr(bs.theta),
        "phi_t": repr(bs.phi_t),
        "phi_r": repr(bs.phi_r),
        "tau": repr(tau),
        "port_b": port_b,
        "photons_per_pulse": repr(photons_per_pulse),
    }
    if coarse is not None:
        md["bin_width"] = repr(coarse.step if bin_width is None else bin_width)
    return JointSpectrum(g, g, np.outer(pa, pb), "probability", md)


def biphoton_jsa(src: BiphotonSource, grid: SpectralGrid) -> JointSpectrum:
    """Joint spectral intensity ``|phi(w, w')|^2`` as a density (per rad^2/s^2).

    Standard bivariate Gaussian in the detunings ``x = w - w0``,
    ``y = w' - w0``::

        exp(-(x^2/s^2 + y^2/s'^2 - 2 rho x y / (s s')) / (1 - rho^2)) / (pi s s' sqrt(1 - rho^2))

    so the double integral is 1 and ``rho`` is the correlation coefficient.
    """
    x = grid.omega - src.center
    s, sp, r = src.sigma, src.sigma_prime, src.rho
    X, Y = x[:, None] / s, x[None, :] / sp
    q = (X**2 + Y**2 - 2 * r * X * Y) / (1 - r**2)
    vals = np.exp(-q) / (np.pi * s * sp * np.sqrt(1 - r**2))
    md = {
        "model": "biphoton_jsi",
        "normalization": "density",
        "sigma": repr(s),
        "sigma_prime": repr(sp),
        "rho": repr(r),
        "center": repr(src.center),
    }
    return JointSpectrum(grid, grid, vals, "probability", md)


def biphoton_joint_spectrum(jsa: JointSpectrum, f: ComplexSpectrum) -> JointSpectrum:
    """``|phi(w, w')|^2 |f(w) - f(w')|^2``."""
    _check_same_grid(jsa.grid_a, f.grid)
    _check_same_grid(jsa.grid_b, f.grid)
    fa = f.amplitudes
    cross = np.abs(fa[:, None] - fa[None, :]) ** 2
    md = dict(jsa.metadata)
    md["model"] = "biphoton"
    return JointSpectrum(jsa.grid_a, jsa.grid_b, jsa.values * cross, jsa.kind, md)
