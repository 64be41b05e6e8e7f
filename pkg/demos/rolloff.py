"""Sensitivity roll-off from finite spectral bins.

Steps a mirror from 0.1 to 1.0 mm and prints the peak height in dB next to
the box-bin visibility prediction.
"""

import numpy as np

from _common import config
from qoct import scenarios
from qoct.spectral import C_LIGHT, effective_bin_width

cfg = config("rolloff.ini")
curve, _ = scenarios.rolloff_sweep(cfg)
w = effective_bin_width(scenarios.evaluation_grid(cfg), cfg.grid.bin_width)
vis = np.abs(np.sinc(curve.depths * w / (2 * np.pi * C_LIGHT)))
pred_db = 10 * np.log10(vis / vis[0])
print(f"{'depth_um':>9} {'simulated_dB':>13} {'sinc_dB':>8}")
for z, s, p in zip(curve.depths, curve.sensitivity_db, pred_db):
    print(f"{z * 1e6:9.0f} {s:13.2f} {p:8.2f}")
print(f"6 dB range {curve.six_db_range * 1e6:.1f} um, predicted {scenarios.predicted_six_db_range(cfg) * 1e6:.1f} um")
