"""Locate the resonance of the bundled one-level model and compare routes.

Run with ``python demos/01_scalar_resonance.py``.
"""
from __future__ import annotations

import numpy as np
from scipy.special import dawsn, wofz

from resonance_kit import bundled_model, locate_resonances

model = bundled_model("scalar")  # λ₀ = 1, M(λ) = 0.1 exp(-λ²/2)
res = locate_resonances(model)
zeta = res[0].zeta
print(f"search rectangle {res.rect.as_tuple()}, winding {res.winding}")
print(f"zeta_0            = {zeta:.16f}")

# closed form: L₊(z) = z - 1 + iπ g² w(z) with the Faddeeva function w
g = 0.1
z = 1.0 + 0j
for _ in range(40):
    f = z - 1 + 1j * np.pi * g * g * wofz(z)
    df = 1 + 1j * np.pi * g * g * (-2 * z * wofz(z) + 2j / np.sqrt(np.pi))
    z -= f / df
print(f"Faddeeva Newton   = {z:.16f}   |diff| = {abs(z - zeta):.1e}")

# first-order estimate; the O(g⁴) remainder is about 5e-4 here
pert = 1 + g * g * (2 * np.sqrt(np.pi) * dawsn(1.0) - 1j * np.pi * np.exp(-1.0))
print(f"first order       = {pert:.16f}   |diff| = {abs(pert - zeta):.3e}")
print(f"width Gamma = 2|Im zeta| = {2 * abs(zeta.imag):.6f}")
