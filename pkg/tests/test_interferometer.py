import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qoct.interferometer import (
    ALPHA_REF,
    BeamSplitter,
    BiphotonSource,
    CoherentSource,
    biphoton_joint_spectrum,
    biphoton_jsa,
    bs_matrix,
    click_probabilities,
    coherent_joint_spectrum,
    output_amplitudes,
    photon_density,
)
from qoct.reconstruct import singular_value_ratio
from qoct.scene import MirrorObject, mirror_transfer
from qoct.spectral import C_LIGHT, ComplexSpectrum, SpectralGrid, gaussian_amplitude, sigma_lambda_to_omega

LAM = 1550e-9
W_C = 2 * np.pi * C_LIGHT / LAM
SIG = sigma_lambda_to_omega(LAM, 100e-9)
GRID = SpectralGrid(W_C, 8 * SIG, 256)
U = gaussian_amplitude(GRID, LAM, 100e-9)
SRC = CoherentSource(0.1, U)
angles = st.floats(-2 * np.pi, 2 * np.pi)


def const(value, grid=GRID):
    return ComplexSpectrum(grid, np.full(grid.n_points, value, dtype=complex))


def random_f(rng, grid=GRID):
    mag = rng.random(grid.n_points)
    return ComplexSpectrum(grid, mag * np.exp(2j * np.pi * rng.random(grid.n_points)))


def test_50_50_splitter_moduli():
    np.testing.assert_allclose(np.abs(bs_matrix(BeamSplitter())), 1 / np.sqrt(2), rtol=1e-15)


def test_theta_zero_is_diagonal_phase():
    m = bs_matrix(BeamSplitter(0.0, 0.3, 1.1))
    assert m[0, 1] == 0 and m[1, 0] == 0
    np.testing.assert_allclose(np.abs(np.diag(m)), 1)


@given(angles, angles, angles)
def test_unitarity(theta, pt, pr):
    m = bs_matrix(BeamSplitter(theta, pt, pr))
    assert np.abs(m.conj().T @ m - np.eye(2)).max() <= 1e-12
    bs = BeamSplitter(theta, pt, pr)
    assert bs.transmittance + bs.reflectance == pytest.approx(1.0)


def test_dark_port_amplitude_vanishes():
    at, _ = output_amplitudes(SRC, const(1.0), BeamSplitter())
    assert np.abs(at.amplitudes).max() < 1e-15 * SRC.alpha


@given(st.floats(0.05, np.pi - 0.05), angles, angles)
def test_no_object_port_b(theta, pt, pr):
    bs = BeamSplitter(theta, pt, pr)
    _, bt = output_amplitudes(SRC, const(0.0), bs, tau=3e-15)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    a2 = np.abs(SRC.alpha * U.amplitudes) ** 2
    np.testing.assert_allclose(np.abs(bt.amplitudes) ** 2, a2 * c**2 * s**4, rtol=1e-12, atol=1e-30)


@pytest.mark.parametrize("port_b", ["printed", "split"])
def test_pointwise_energy_bound(port_b):
    rng = np.random.default_rng(11)
    a2 = np.abs(SRC.alpha * U.amplitudes) ** 2
    for _ in range(1000):
        bs = BeamSplitter(*rng.uniform(-2 * np.pi, 2 * np.pi, 3))
        at, bt = output_amplitudes(SRC, random_f(rng), bs, tau=rng.normal() * 1e-14, port_b=port_b)
        total = np.abs(at.amplitudes) ** 2 + np.abs(bt.amplitudes) ** 2
        assert np.all(total <= a2 * (1 + 1e-12) + 1e-300)


def test_energy_equality_does_not_hold_for_lossless_object():
    # |f| = 1 does not make the two detected ports carry all the light:
    # half of it leaves through the splitter's other input arm
    f = mirror_transfer(GRID, MirrorObject(1.0, 30e-6))
    at, bt = output_amplitudes(SRC, f, BeamSplitter())
    total = np.abs(at.amplitudes) ** 2 + np.abs(bt.amplitudes) ** 2
    np.testing.assert_allclose(total, 0.5 * np.abs(SRC.alpha * U.amplitudes) ** 2, rtol=1e-12)


def test_printed_factors_at_half_pi():
    rng = np.random.default_rng(5)
    f = random_f(rng)
    a2 = np.abs(SRC.alpha * U.amplitudes) ** 2
    for pr in (0.0, 0.7, np.pi):
        at, bt = output_amplitudes(SRC, f, BeamSplitter(np.pi / 2, 0.0, pr))
        np.testing.assert_allclose(np.abs(at.amplitudes) ** 2, a2 * np.abs(f.amplitudes - 1) ** 2 / 8, rtol=1e-12)
        np.testing.assert_allclose(np.abs(bt.amplitudes) ** 2, a2 * np.abs(f.amplitudes + 1) ** 2 / 8, rtol=1e-12)


def test_split_form_gives_f_minus_one_on_both_ports():
    rng = np.random.default_rng(6)
    f = random_f(rng)
    a2 = np.abs(SRC.alpha * U.amplitudes) ** 2
    at, bt = output_amplitudes(SRC, f, BeamSplitter(np.pi / 2, 0.0, 1.3), port_b="split")
    np.testing.assert_allclose(np.abs(at.amplitudes) ** 2, a2 * np.abs(f.amplitudes - 1) ** 2 / 8, rtol=1e-12)
    np.testing.assert_allclose(np.abs(bt.amplitudes) ** 2, a2 * np.abs(f.amplitudes - 1) ** 2 / 8, rtol=1e-12)


def test_printed_form_never_gives_two_minus_factors():
    # port A goes as |f e^{2i phi_t} - 1|^2 and port B as |f e^{2i phi_t} + 1|^2
    # for every phase pair, so the printed chain cannot yield |f-1|^2 twice
    rng = np.random.default_rng(7)
    f = random_f(rng)
    a2 = np.abs(SRC.alpha * U.amplitudes) ** 2
    for pt in np.linspace(0, np.pi, 13):
        for pr in np.linspace(0, np.pi, 5):
            at, bt = output_amplitudes(SRC, f, BeamSplitter(np.pi / 2, pt, pr))
            g = f.amplitudes * np.exp(2j * pt)
            np.testing.assert_allclose(np.abs(at.amplitudes) ** 2, a2 * np.abs(g - 1) ** 2 / 8, rtol=1e-10)
            np.testing.assert_allclose(np.abs(bt.amplitudes) ** 2, a2 * np.abs(g + 1) ** 2 / 8, rtol=1e-10)


def test_grid_mismatch_rejected():
    other = SpectralGrid(W_C, 4 * SIG, 256)
    with pytest.raises(ValueError):
        output_amplitudes(SRC, const(1.0, other), BeamSplitter())
    with pytest.raises(ValueError):
        output_amplitudes(SRC, const(1.0), BeamSplitter(), port_b="other")


def test_photon_normalisation():
    # f = -1 sends half of the entering light to port A and none to printed port B
    for ppp in (1.0, 2.5):
        da, db = photon_density(CoherentSource(ALPHA_REF, U), const(-1.0), BeamSplitter(), photons_per_pulse=ppp)
        assert da.sum() * GRID.step == pytest.approx(0.5 * ppp, rel=1e-12)
        assert db.max() < 1e-30


def test_click_probability_is_poisson_no_click_complement():
    f = mirror_transfer(GRID, MirrorObject(1.0, 50e-6))
    da, db = photon_density(SRC, f, BeamSplitter())
    pa, pb = click_probabilities(SRC, f, BeamSplitter())
    np.testing.assert_allclose(pa, -np.expm1(-da * GRID.step), rtol=1e-12)
    np.testing.assert_allclose(pb, -np.expm1(-db * GRID.step), rtol=1e-12)


def test_binned_click_probability_averages_density():
    coarse = SpectralGrid(W_C, 8 * SIG, 65)
    fine = coarse.oversampled(8)
    src = CoherentSource(0.1, gaussian_amplitude(fine, LAM, 100e-9))
    f = mirror_transfer(fine, MirrorObject(1.0, 20e-6))
    pa, _ = click_probabilities(src, f, BeamSplitter(), coarse=coarse, bin_width=coarse.step)
    da, _ = photon_density(src, f, BeamSplitter())
    kern = np.ones(9)
    avg = (np.convolve(da, kern, "same") / np.convolve(np.ones(da.size), kern, "same"))[::8]
    np.testing.assert_allclose(pa, -np.expm1(-avg * coarse.step), rtol=1e-12)


def test_dark_port_joint_spectrum_is_zero():
    js = coherent_joint_spectrum(SRC, const(1.0), BeamSplitter(), tau=0.0)
    assert js.values.max() < 1e-15
    assert js.kind == "probability"


def test_coherent_joint_is_outer_product_and_rank_one():
    rng = np.random.default_rng(3)
    for _ in range(10):
        bs = BeamSplitter(*rng.uniform(0, np.pi, 3))
        f = random_f(rng)
        js = coherent_joint_spectrum(SRC, f, bs, tau=rng.normal() * 1e-14)
        assert singular_value_ratio(js) < 1e-10


def test_coherent_joint_matches_click_vectors():
    f = mirror_transfer(GRID, MirrorObject(0.8, 50e-6))
    bs = BeamSplitter(1.2, 0.1, 0.4)
    pa, pb = click_probabilities(SRC, f, bs, 1e-15)
    js = coherent_joint_spectrum(SRC, f, bs, 1e-15)
    np.testing.assert_array_equal(js.values, np.outer(pa, pb))


def test_coherent_joint_monotone_in_alpha():
    f = mirror_transfer(GRID, MirrorObject(1.0, 50e-6))
    lo = coherent_joint_spectrum(CoherentSource(0.1, U), f, BeamSplitter()).values
    hi = coherent_joint_spectrum(CoherentSource(0.13, U), f, BeamSplitter()).values
    nz = lo > 0
    assert np.all(hi[nz] > lo[nz])


def test_source_validation():
    with pytest.raises(ValueError):
        CoherentSource(-0.1, U)
    with pytest.raises(ValueError):
        CoherentSource(0.1, U * 2)
    with pytest.raises(ValueError):
        BiphotonSource(1e14, 1e14, 1.0, W_C)
    with pytest.raises(ValueError):
        BiphotonSource(0.0, 1e14, 0.0, W_C)


@pytest.mark.parametrize("rho", [0.0, -0.5, 0.7, -0.9])
def test_jsi_normalisation(rho):
    src = BiphotonSource(SIG, 0.8 * SIG, rho, W_C)
    g = SpectralGrid(W_C, 10 * SIG, 601)
    js = biphoton_jsa(src, g)
    assert js.values.sum() * g.step**2 == pytest.approx(1.0, abs=1e-3)
    assert js.metadata["normalization"] == "density"


def test_jsi_uncorrelated_is_separable():
    src = BiphotonSource(SIG, 1.3 * SIG, 0.0, W_C)
    assert singular_value_ratio(biphoton_jsa(src, GRID)) < 1e-10


def test_jsi_negative_correlation_elongates_anti_diagonal():
    src = BiphotonSource.from_wavelength(LAM, 100e-9, -0.5)
    js = biphoton_jsa(src, GRID)
    x = GRID.detuning
    w = js.values / js.values.sum()
    s = x[:, None] + x[None, :]
    d = x[:, None] - x[None, :]
    assert (w * s**2).sum() < (w * d**2).sum()


def test_biphoton_constant_object_gives_zero():
    jsa = biphoton_jsa(BiphotonSource(SIG, SIG, -0.5, W_C), GRID)
    assert biphoton_joint_spectrum(jsa, const(0.3 * np.exp(1j))).values.max() == 0


def test_biphoton_swap_symmetry_and_rank():
    jsa = biphoton_jsa(BiphotonSource(SIG, SIG, -0.5, W_C), GRID)
    p = biphoton_joint_spectrum(jsa, mirror_transfer(GRID, MirrorObject(1.0, 5e-6)))
    v = p.values / p.values.max()
    assert np.abs(v - v.T).max() < 1e-12
    assert singular_value_ratio(p) > 0.05


def test_biphoton_diagonal_cross_term_oracle():
    # along the anti-diagonal the cross term |f(w) - f(w')|^2 of a mirror is
    # 2 - 2 cos(z (w - w') / c), i.e. it oscillates in the difference frequency
    z = 40e-6
    f = mirror_transfer(GRID, MirrorObject(1.0, z))
    jsa = biphoton_jsa(BiphotonSource(SIG, SIG, -0.9, W_C), GRID)
    p = biphoton_joint_spectrum(jsa, f).values
    k = np.arange(GRID.n_points)
    w, wp = GRID.omega[k], GRID.omega[::-1][k]
    direct = jsa.values[k, k[::-1]] * (2 - 2 * np.cos(z * (w - wp) / C_LIGHT))
    np.testing.assert_allclose(p[k, k[::-1]], direct, rtol=1e-9, atol=1e-300)
