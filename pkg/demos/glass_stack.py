"""B-scan of a quartz layer on BK7 behind an air gap.

Prints the strongest reflections of the first column beyond the zero-delay
lobe, next to the configured interface optical depths.
"""

from scipy.signal import find_peaks

from _common import config
from qoct import scenarios

cfg = config("glass_stack.ini")
b = scenarios.bscan_scene(cfg)
col = b.linear[:, 0]
idx, _ = find_peaks(col, height=0.05 * col[b.depth > 100e-6].max())
print(f"B-scan {b.linear.shape[0]} depths x {b.linear.shape[1]} columns")
print("configured interfaces (um):", ", ".join(f"{z * 1e6:.1f}" for z in cfg.obj.interface_opds()))
print(f"{'depth_um':>9} {'dB':>7}")
for i in idx:
    if b.depth[i] > 100e-6:
        print(f"{b.depth[i] * 1e6:9.1f} {b.log_db[i, 0]:7.1f}")
