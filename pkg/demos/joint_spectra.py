"""Joint spectra of a weak coherent pulse and of entangled pairs off a mirror.

Prints the separability of each map and the dominant 2-D fringe frequency:
coherent fringes run parallel to the axes, entangled fringes at an angle.
"""

import numpy as np

from _common import config
from qoct import reconstruct as rc
from qoct import scenarios
from qoct.interferometer import biphoton_jsa
from qoct.spectral import gaussian_amplitude

coh = config("coherent_mirror.ini")
bip = config("biphoton_mirror.ini")
jc = scenarios.analytic_joint(coh)
jb = scenarios.analytic_joint(bip)

u2 = np.abs(gaussian_amplitude(coh.grid.grid, coh.source.center_wavelength, coh.source.sigma_lambda).amplitudes) ** 2
jsi = biphoton_jsa(scenarios._biphoton_source(bip), bip.grid.grid).values

print(f"coherent : sum {jc.values.sum():.4f}  s2/s1 {rc.singular_value_ratio(jc):.1e}"
      f"  fringe peak {rc.fringe_peak(jc.values, np.outer(u2, u2))}")
step = bip.grid.grid.step
print(f"biphoton : integral {jb.values.sum() * step**2:.4f}  s2/s1 {rc.singular_value_ratio(jb):.3f}"
      f"  fringe peak {rc.fringe_peak(jb.values, jsi)}")
print(f"biphoton main diagonal max {np.abs(np.diag(jb.values)).max():.1e} (pairs never coincide at equal frequency)")
