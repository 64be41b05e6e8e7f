from pathlib import Path

import numpy as np
import pytest

from qoct.config import FormatError, load_config, parse_config
from qoct.scene import LayerStack, MirrorObject
from qoct.spectral import C_LIGHT, sigma_lambda_to_omega

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL = """
[grid]
span_wavelength_nm = 115
[mirror]
opd_um = 273
"""


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.ini")), ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert len(cfg.digest) == 64


def test_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.source.kind == "classical"
    assert cfg.source.alpha == 0.1 and cfg.source.photons_per_pulse == 1.0
    assert cfg.grid.grid.n_points == 256 and cfg.grid.oversample == 1 and cfg.grid.bin_width is None
    assert cfg.grid.grid.center_omega == pytest.approx(2 * np.pi * C_LIGHT / 1550e-9)
    assert cfg.beamsplitter.theta == pytest.approx(np.pi / 2)
    assert cfg.port_b == "printed" and cfg.tau == 0
    assert isinstance(cfg.obj, MirrorObject) and cfg.obj.opd == pytest.approx(273e-6)
    assert cfg.fiber_a.length == 5e3 and cfg.fiber_b.efficiency == 0.65
    assert cfg.run is None and cfg.rolloff_depths == ()
    assert cfg.reconstruct.mode == "row" and not cfg.reconstruct.anti_diagonal


def test_biphoton_defaults_to_anti_diagonal():
    cfg = parse_config(MINIMAL + "[source]\nkind = biphoton\nrho = -0.5\n")
    assert cfg.reconstruct.anti_diagonal


def test_span_in_sigmas():
    cfg = parse_config("[grid]\nspan_sigmas = 8\n[source]\nsigma_nm = 100\n[mirror]\nopd_um = 5\n")
    assert cfg.grid.grid.span_omega == pytest.approx(8 * sigma_lambda_to_omega(1550e-9, 100e-9))


def test_bin_width_enables_oversampling():
    cfg = parse_config(MINIMAL.replace("[mirror]", "bin_width_nm = 2\n[mirror]"))
    assert cfg.grid.oversample == 16
    assert cfg.grid.bin_width == pytest.approx(sigma_lambda_to_omega(1550e-9, 2e-9))


def test_rolloff_depths():
    cfg = parse_config(MINIMAL + "[rolloff]\ndepth_start_um = 100\ndepth_stop_um = 1000\ndepth_step_um = 50\n")
    assert len(cfg.rolloff_depths) == 19
    assert cfg.rolloff_depths[-1] == pytest.approx(1e-3)


def test_stack_object_and_scan():
    cfg = load_config(CONFIGS / "glass_stack.ini")
    assert isinstance(cfg.obj, LayerStack) and len(cfg.obj.layers) == 2
    assert cfg.positions == 10


def test_digest_and_seed_override():
    a = parse_config(MINIMAL + "[run]\nn_pulses = 10\nseed = 3\n")
    b = parse_config("# comment\n" + MINIMAL + "[run]\nn_pulses=10\nseed=3\n")
    assert a.digest == b.digest
    assert a.with_seed(9).run.rng_seed == 9
    assert parse_config(MINIMAL).with_seed(9).run is None


@pytest.mark.parametrize("text", [
    MINIMAL + "[grid2]\nx = 1\n",
    MINIMAL + "[source]\ncolour = red\n",
    "[grid]\nn_points = 256\n[mirror]\nopd_um = 1\n",
    "[grid]\nspan_wavelength_nm = 115\nspan_sigmas = 8\n[mirror]\nopd_um = 1\n",
    MINIMAL + "[run]\nn_pulses = 0\n",
    MINIMAL + "[run]\nseed = 1\n",
    MINIMAL + "[source]\nkind = laser\n",
    MINIMAL + "[source]\nrho = -0.5\n",
    MINIMAL + "[source]\nkind = biphoton\nrho = 1\n",
    MINIMAL + "[source]\nsigma_nm = 0\n",
    MINIMAL + "[beamsplitter]\nport_b = other\n",
    MINIMAL + "[fiber_a]\nefficiency = 2\n",
    MINIMAL + "[reconstruct]\nmode = sum\n",
    MINIMAL + "[rolloff]\ndepth_start_um = 5\ndepth_stop_um = 1\ndepth_step_um = 1\n",
    MINIMAL + "[scan]\npositions = 0\n",
    MINIMAL + "[grid]\nn_points = 8\n",
    "[grid]\nspan_wavelength_nm = 115\n",
])
def test_config_errors(text):
    with pytest.raises(FormatError):
        parse_config(text)
