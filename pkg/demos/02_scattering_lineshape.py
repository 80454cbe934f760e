"""S-matrix unitarity and the Breit-Wigner shape of the spectral density."""
from __future__ import annotations

import numpy as np

from resonance_kit import SpectralDensity, breit_wigner_fit, bundled_model, locate_resonances
from resonance_kit.livsic import default_scan
from resonance_kit.scattering import intertwining_defect, unitarity_defect

for name in ("scalar", "coupled"):
    model = bundled_model(name)
    lam = np.linspace(*default_scan(model), 201)
    print(f"{name:8s} max ‖S S* - 1‖ = {unitarity_defect(model, lam).max():.1e}, "
          f"max ‖M S_E - S_K M‖ = {intertwining_defect(model, lam).max():.1e}")

model = bundled_model("scalar")
zeta = locate_resonances(model)[0].zeta
gamma = 2 * abs(zeta.imag)
window = np.linspace(zeta.real - 5 * gamma, zeta.real + 5 * gamma, 201)
rho = SpectralDensity(model).rho(window, [1.0])
fit = breit_wigner_fit(window, rho)
print(f"Breit-Wigner centre {fit.lambda0_fit:.6f} vs Re zeta {zeta.real:.6f} "
      f"(offset {(fit.lambda0_fit - zeta.real) / gamma:+.4f} Gamma)")
print(f"Breit-Wigner width  {fit.gamma_fit:.6f} vs 2|Im zeta| {gamma:.6f} "
      f"(rel. error {fit.gamma_fit / gamma - 1:+.2e})")
