"""Gamov vector of a resonance: weak eigen-relation, Dirac pairing, Paley-Wiener."""
from __future__ import annotations

import numpy as np

from resonance_kit import bundled_model, gamov_vector, locate_resonances
from resonance_kit.gamov import (bundled_s0, bundled_test_elements, defect_matrix, dirac_pairing,
                                 eigen_defect, paley_wiener_check, psi_route_pairing,
                                 random_rational)

model = bundled_model("two_channel")
for r in locate_resonances(model):
    gv = gamov_vector(model, r)
    elements = bundled_test_elements(model.n)
    # along the kernel vector e₀ the weak eigen-relation holds exactly
    worst = max(abs(eigen_defect(model, r.zeta, gv.e0, x)) for x in elements)
    # at a wrong eigenvalue no direction e₀ makes every defect vanish
    shifted = defect_matrix(model, r.zeta + 0.1, elements)
    sig = np.linalg.svd(shifted, compute_uv=False).min() / np.sqrt(len(elements))
    print(f"zeta = {r.zeta:.6f}")
    print(f"  eigen-defect at zeta      max |defect| = {worst:.1e}")
    print(f"  eigen-defect at zeta+0.1  sigma_min/sqrt(5) = {sig:.3f}")
    s = bundled_s0(model)[1]
    dp, pr = dirac_pairing(gv, s), psi_route_pairing(model, gv, s)
    print(f"  Dirac pairing {dp:.6e}, via Psi {pr:.6e}")
    out = paley_wiener_check(gv, random_rational(model.n, np.random.default_rng(0)))
    print(f"  Paley-Wiener rel. error {out['rel_err']:.1e} (residue oracle {out['oracle']:.6e})")
