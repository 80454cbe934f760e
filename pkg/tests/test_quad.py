from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import dawsn

from resonance_kit.quad import (Circle, ContourError, QuadratureError, Rectangle, adaptive_gl,
                                argument_integral, contour_integral, integrate_real_line,
                                pv_integrate, winding_number)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12), st.floats(-3, 0), st.floats(0.1, 3))
@settings(max_examples=40, deadline=None)
def test_polynomials_exact(coeffs, a, width):
    p = np.polynomial.Polynomial(coeffs)
    b = a + width
    r = adaptive_gl(p, a, b, tol=1e-14)
    exact = p.integ()(b) - p.integ()(a)
    assert abs(r.value - exact) <= 1e-12 * (1 + np.abs(p.integ().coef).sum() * 10)


def test_peaked_integrand():
    eps = 1e-3
    r = adaptive_gl(lambda x: eps / (x * x + eps * eps), -1, 1, tol=1e-12)
    assert r.converged
    assert abs(r.value - 2 * np.arctan(1 / eps)) < 1e-11
    assert r.edges is not None and r.edges[0] == -1 and r.edges[-1] == 1


def test_vector_valued():
    r = adaptive_gl(lambda x: np.stack([np.sin(x), np.cos(x)], axis=-1), 0, np.pi)
    np.testing.assert_allclose(r.value, [2.0, 0.0], atol=1e-13)


def test_jump_discontinuity_terminates():
    # a jump inside a panel would otherwise bisect forever
    r = adaptive_gl(lambda x: np.where(x < 1 / 3, 0.0, 1.0), 0, 1, tol=1e-14)
    assert r.converged
    assert abs(r.value - 2 / 3) < 1e-9


def test_panel_cap():
    r = adaptive_gl(lambda x: np.sin(1 / (x + 1e-300)), 0, 1, tol=1e-15, max_panels=64)
    assert not r.converged


def test_bad_interval():
    with pytest.raises(ValueError):
        adaptive_gl(np.sin, 1, 0)


def test_real_line_gaussian():
    r = integrate_real_line(lambda x: np.exp(-x * x / 4), decay_width_hint=2.0)
    assert abs(r.value - np.sqrt(4 * np.pi)) < 1e-12
    assert r.abs_err_estimate < 1e-8


def test_real_line_strict_cap():
    with pytest.raises(QuadratureError):
        integrate_real_line(lambda x: np.sin(1e4 * x) * np.exp(-x * x), max_panels=32,
                            strict=True, tol=1e-14)


@pytest.mark.parametrize("x", [-2.0, 0.0, 0.3, 1.0, 2.5])
def test_pv_against_dawson(x):
    # PV ∫ e^{-μ²} / (x - μ) dμ = 2√π D(x)
    r = pv_integrate(lambda mu: np.exp(-mu * mu), x, strict=True, tol=1e-13)
    assert abs(r.value - 2 * np.sqrt(np.pi) * dawsn(x)) < 1e-12


def test_pv_matrix_valued():
    f = lambda mu: np.exp(-mu * mu)[:, None, None] * np.array([[1.0, 2.0], [0.0, -1.0]])
    r = pv_integrate(f, 0.7)
    np.testing.assert_allclose(r.value, 2 * np.sqrt(np.pi) * dawsn(0.7) * np.array([[1, 2], [0, -1]]),
                               atol=1e-11)


def test_circle_residue():
    r = contour_integral(lambda z: np.exp(z) / (z - 0.2), Circle(0j, 1.0), residue=True)
    assert abs(r.value - np.exp(0.2)) < 1e-14


def test_rectangle_integral_cauchy():
    rect = Rectangle(-1, 2, -1, 1)
    r = contour_integral(lambda z: 1 / (z - 0.5 - 0.1j), rect, residue=True)
    assert abs(r.value - 1) < 1e-12
    r = contour_integral(lambda z: z ** 3, rect)
    assert abs(r.value) < 1e-12


def test_contour_argument_errors():
    with pytest.raises(ValueError):
        contour_integral(np.exp, Circle(0j, 1.0), nodes=4)
    with pytest.raises(TypeError):
        contour_integral(np.exp, (0, 1))
    with pytest.raises(ValueError):
        Circle(0j, 0.0)
    with pytest.raises(ValueError):
        Rectangle(1, 1, 0, 1)


def test_rectangle_geometry():
    r = Rectangle(0, 2, -1, 1)
    assert r.center == 1 + 0j
    assert r.contains(1 + 0.5j) and not r.contains(3)
    kids = r.split()
    assert len(kids) == 4
    assert sum((k.re_max - k.re_min) * (k.im_max - k.im_min) for k in kids) == pytest.approx(4.0)
    assert Rectangle.from_tuple(r.as_tuple()) == r


@given(st.lists(st.tuples(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9)), min_size=0, max_size=4))
@settings(max_examples=25, deadline=None)
def test_winding_counts_roots(pts):
    roots = [complex(a, b) for a, b in pts]
    rect = Rectangle(-1, 1, -1, 1)
    g = lambda z: np.prod([z - r for r in roots], axis=0) if roots else np.ones_like(z)
    dlog = lambda z: sum(1 / (z - r) for r in roots) if roots else np.zeros_like(z)
    assert winding_number(g, rect, dlog=dlog) == len(roots)


def test_winding_with_finite_difference_and_poles():
    g = lambda z: (z - 0.2) ** 2 / (z + 0.3j)
    assert winding_number(g, Rectangle(-1, 1, -1, 1)) == 1
    assert winding_number(g, Rectangle(0, 1, -0.1, 0.1)) == 2


def test_zero_on_contour_detected():
    with pytest.raises(ContourError):
        winding_number(lambda z: z - 1.0, Rectangle(-1, 1, -1, 1))


def test_argument_integral_needs_input():
    with pytest.raises(ValueError):
        argument_integral(None, Rectangle(-1, 1, -1, 1))
