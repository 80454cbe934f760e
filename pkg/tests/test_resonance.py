from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ZETA_SCALAR, faddeeva_dL, faddeeva_L
from resonance_kit import (ConvergenceError, NotResonantError, bundled_model, evaluator, kernel,
                           locate_resonances, refine_newton, scalar_gaussian)
from resonance_kit.model import model_from_dict
from resonance_kit.resonance import worker_count


def _faddeeva_newton(z, g=0.1, lam0=1.0):
    for _ in range(60):
        step = faddeeva_L(z, g, lam0) / faddeeva_dL(z, g)
        z = z - step
        if abs(step) < 1e-16:
            break
    return complex(z)


def test_reference_zero_from_closed_form():
    # the frozen reference value is a root of the Faddeeva closed form
    z = _faddeeva_newton(1.0 - 0.01j)
    assert abs(z - ZETA_SCALAR) < 1e-15
    assert abs(faddeeva_L(z)) < 1e-15


def test_scalar_search(scalar_res):
    assert len(scalar_res) == 1 and scalar_res.complete
    r = scalar_res[0]
    assert abs(r.zeta - ZETA_SCALAR) < 1e-12
    assert (r.det_order, r.q) == (1, 1)
    assert r.residual < 1e-12
    assert scalar_res.winding == 1


def test_two_channel_mirror_pair(two_channel_res):
    a, b = two_channel_res
    assert abs(a.zeta + np.conj(b.zeta)) < 1e-12
    assert abs(b.zeta - ZETA_SCALAR) < 1e-12
    # decoupled channels: kernels are the coordinate axes
    assert abs(abs(a.kernel_basis[1, 0]) - 1) < 1e-12
    assert abs(abs(b.kernel_basis[0, 0]) - 1) < 1e-12


def test_coupled_search(coupled, coupled_res):
    assert len(coupled_res) == 2 and coupled_res.complete
    ev = evaluator(coupled)
    for r in coupled_res:
        assert abs(ev.det_plus(r.zeta)) < 1e-12
        e = r.kernel_basis[:, 0]
        assert np.linalg.norm(ev.plus(r.zeta) @ e) < 1e-10
        assert r.zeta.imag < 0


@given(st.floats(0.05, 0.3), st.floats(-1.5, 1.5))
@settings(max_examples=15, deadline=None)
def test_newton_matches_closed_form(g, lam0):
    m = scalar_gaussian(g, lam0, region=(-3.0, 3.0, -1.0, 1.0))
    seed = lam0 - 1j * np.pi * g * g * np.exp(-lam0 ** 2)
    z = refine_newton(m, seed)
    assert abs(z - _faddeeva_newton(seed, g, lam0)) < 1e-12


def test_newton_seed_outside_region(scalar):
    with pytest.raises(ConvergenceError):
        refine_newton(scalar, -5 - 5j)


def test_kernel_not_resonant(scalar):
    with pytest.raises(NotResonantError):
        kernel(scalar, 0.5 - 0.1j)


def test_degenerate_double_zero():
    cfg = {"n": 2, "lambda0": [[1.0, 0.0], [0.0, 1.0]],
           "formfactor": {"terms": [
               {"row": 0, "col": 0, "coeffs": [0.1], "width": 1.0},
               {"row": 1, "col": 1, "coeffs": [0.1], "width": 1.0}]},
           "region": {"re_min": -2, "re_max": 4, "im_min": -1, "im_max": 1}}
    res = locate_resonances(model_from_dict(cfg), (0.5, 1.5, -0.2, -1e-3))
    assert len(res) == 1
    r = res[0]
    assert (r.det_order, r.q) == (2, 2)
    assert abs(r.zeta - ZETA_SCALAR) < 1e-9


def test_boundary_zero_is_jittered(scalar):
    # left edge passes exactly through the zero
    res = locate_resonances(scalar, (ZETA_SCALAR.real, 2.0, -0.5, -1e-3))
    assert res.jitters >= 1
    assert len(res) == 1 and abs(res[0].zeta - ZETA_SCALAR) < 1e-12


def test_empty_rectangle(scalar):
    res = locate_resonances(scalar, (1.5, 3.5, -0.9, -0.01))
    assert len(res) == 0 and res.winding == 0 and res.complete


def test_zero_coupling_has_no_resonances():
    res = locate_resonances(bundled_model("zero_coupling"), (0.0, 2.0, -0.5, -0.01))
    assert len(res) == 0


def test_depth_limit_reports_exhausted_cells(scalar):
    res = locate_resonances(scalar, (0.0, 2.0, -0.5, -1e-3), max_depth=0)
    assert not res.complete
    assert res.exhausted[0][1] == 1


def test_rectangle_validation(scalar):
    with pytest.raises(ValueError, match="lower half-plane"):
        locate_resonances(scalar, (0.0, 2.0, -0.5, 0.1))
    with pytest.raises(ValueError, match="continuation region"):
        locate_resonances(scalar, (0.0, 9.0, -0.5, -0.1))


def test_threaded_search_is_deterministic(scalar):
    a = locate_resonances(scalar, (0.0, 2.0, -0.5, -1e-3), workers=1)
    b = locate_resonances(scalar, (0.0, 2.0, -0.5, -1e-3), workers=3)
    assert [r.zeta for r in a] == [r.zeta for r in b]


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("RESONANCE_KIT_THREADS", "2")
    assert worker_count(8) == 2
    monkeypatch.setenv("RESONANCE_KIT_THREADS", "junk")
    assert worker_count(3) == 3
    monkeypatch.delenv("RESONANCE_KIT_THREADS")
    assert worker_count(5) == 5


def test_as_dict(scalar_res):
    d = scalar_res[0].as_dict()
    assert d["zeta"] == [ZETA_SCALAR.real, pytest.approx(ZETA_SCALAR.imag, abs=1e-12)]
    assert len(d["kernel_basis"]) == 1
