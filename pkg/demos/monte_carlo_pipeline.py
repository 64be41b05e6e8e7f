"""Time-tag Monte Carlo of the coherent source and its reconstruction.

Simulates detector clicks through dispersive fibres, pairs them, and prints
how the estimated joint spectrum approaches the analytic one.
"""

import os
from dataclasses import replace

from _common import config
from qoct import scenarios
from qoct.coincidence import tv_distance

cfg = config("montecarlo.ini")
reference = scenarios.analytic_joint(cfg)
print(f"analytic coincidence probability per pulse {reference.values.sum():.4f}")
print(f"{'pulses':>9} {'records':>9} {'pairs':>8} {'TV':>8}")
for n in (10**4, 10**5, 10**6):
    c = replace(cfg, run=replace(cfg.run, n_pulses=n), n_pulses=n)
    tags = scenarios.simulate_tags(c, os.cpu_count() or 1)
    counts, prob, _ = scenarios.process_tags(tags, c)
    print(f"{n:9d} {tags.size:9d} {int(counts.values.sum()):8d} {tv_distance(prob, reference):8.4f}")
