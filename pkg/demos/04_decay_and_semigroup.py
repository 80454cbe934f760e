"""Exponential decay of the survival amplitude and the truncated evolution."""
from __future__ import annotations

import numpy as np

from resonance_kit import HardyGrid, bundled_model, decay_fit, locate_resonances, survival_amplitude
from resonance_kit.semigroup import eigen_sweep

model = bundled_model("scalar")
zeta = locate_resonances(model)[0].zeta
t = np.linspace(0, 60, 121)
amp = survival_amplitude(model, [1.0], t)
fit = decay_fit(t, amp)
print(f"A(0) = {amp[0]:.12f}, max |A| = {np.abs(amp).max():.12f}")
print(f"fitted rate {fit.gamma:.6f} vs 2|Im zeta| {2 * abs(zeta.imag):.6f}")
for tt in (10, 30, 60):
    k = int(tt / 0.5)
    print(f"  |A({tt:2d})| = {abs(amp[k]):.6f}   exp(-Gamma t/2) = {np.exp(-fit.gamma * tt / 2):.6f}")

# pre-Gamov eigen-defect on Cayley grids of growing size: geometric convergence
for n in (256, 512, 1024, 2048, 2 ** 14):
    print(f"n = {n:6d}  worst ‖Z(t)f - e^(-i zeta t) f‖/‖f‖ = {eigen_sweep(HardyGrid(n)).max():.2e}")
