"""Gamov vectors, eigen-form pairings and the Dirac / Paley-Wiener identities.

Inner products are antilinear in the FIRST slot throughout:
``(u, v) = Σ conj(u_j) v_j``.  Every vector-valued function used here is
entire or rational, so its "sharp" continuation ``f^#(z) = conj(f(z̄))`` is
available in closed form and supplies the conjugated factor off the axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .livsic import evaluator, eval_L
from .model import ModelSpec
from .quad import (Circle, QuadratureError, Rectangle, adaptive_gl, contour_integral,
                   winding_number)

__all__ = [
    "GamovError",
    "GamovVector",
    "TestFunction",
    "GaussianFamily",
    "FormFactorFamily",
    "RationalFamily",
    "gamov_vector",
    "representer_gamma",
    "pairing_phi0",
    "resolvent_pairing_check",
    "eigen_defect",
    "defect_matrix",
    "bundled_test_elements",
    "bundled_s0",
    "psi_minus",
    "psi_continued",
    "dirac_pairing",
    "psi_route_pairing",
    "paley_wiener_check",
    "random_rational",
]

_SUBTRACT_BAND = 1.0
_GAUSS_REACH = 7.0
# absolute floor for line quadratures; sits above the roundoff noise of the
# pole subtraction and far below every acceptance tolerance
_ABS_TOL = 1e-14


class GamovError(ValueError):
    """Raised when a Gamov vector cannot be formed (e.g. ``k₀ = 0``)."""


# ----------------------------------------------------------------------
# test functions
class TestFunction:
    """Closed-form ``ℂ -> 𝒦`` function with its sharp continuation.

    Subclasses implement ``__call__`` (trailing axis of length ``n``) and
    ``sharp``.  ``family`` records the declared function class: ``"S0"``
    for the continuable class used with Dirac pairings, ``"H2+"`` for the
    rational Hardy class, ``"entire"`` for plain representers.
    """

    __test__ = False  # keep pytest from collecting the class
    n: int
    family: str = "entire"

    def __call__(self, z) -> np.ndarray:
        raise NotImplementedError

    def sharp(self, z) -> np.ndarray:
        raise NotImplementedError

    def scale(self, c: complex) -> "TestFunction":
        return _Scaled(self, complex(c))


class _Scaled(TestFunction):
    def __init__(self, base: TestFunction, c: complex):
        self.base, self.c, self.n, self.family = base, c, base.n, base.family

    def __call__(self, z):
        return self.c * self.base(z)

    def sharp(self, z):
        return np.conj(self.c) * self.base.sharp(z)


def _vec(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != n:
        raise ValueError(f"vector of length {v.size} for dimension {n}")
    return v


@dataclass(frozen=True)
class _GaussTerm:
    coeffs: tuple[float, ...]
    width: float
    center: float
    vector: np.ndarray

    def scalar(self, z):
        u = np.asarray(z, dtype=complex) - self.center
        return P.polyval(u, np.asarray(self.coeffs, dtype=float)) * np.exp(-0.5 * self.width * u * u)


class GaussianFamily(TestFunction):
    """``Σ_k p_k(z - b_k) exp(-a_k (z - b_k)² / 2) v_k`` with real ``p_k, a_k ≥ 0, b_k``.

    ``a = 0`` gives a vector polynomial, used for representers such as
    ``x(λ) = (λ - Λ₀) e``.
    """

    def __init__(self, n: int, terms=(), family: str = "entire"):
        self.n = int(n)
        self.family = family
        self.terms: list[_GaussTerm] = []
        for t in terms:
            self.add(*t)

    def add(self, coeffs, width: float, center: float, vector) -> "GaussianFamily":
        if width < 0:
            raise ValueError("width must be non-negative")
        self.terms.append(_GaussTerm(tuple(float(c) for c in np.atleast_1d(coeffs)),
                                     float(width), float(center), _vec(vector, self.n)))
        return self

    def _eval(self, z, conj: bool):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n,), dtype=complex)
        for t in self.terms:
            v = np.conj(t.vector) if conj else t.vector
            out += t.scalar(z)[..., None] * v
        return out

    def __call__(self, z):
        return self._eval(z, False)

    def sharp(self, z):
        return self._eval(z, True)


class FormFactorFamily(TestFunction):
    """``s(z) = M(z) p(z)`` with a vector polynomial ``p``.

    The representer ``L₊ M⁻¹ s = L₊ p`` is entire, so ``s`` lies in the
    continuable class by construction.  ``coeffs[j]`` is the vector
    coefficient of ``z^j``.
    """

    family = "S0"

    def __init__(self, model: ModelSpec, coeffs):
        self.model = model
        self.n = model.n
        c = np.asarray(coeffs, dtype=complex)
        self.coeffs = c.reshape(-1, self.n) if c.ndim <= 2 else None
        if self.coeffs is None:
            raise ValueError("coeffs must be (degree+1, n)")

    def _poly(self, z, c):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n,), dtype=complex)
        for j in range(c.shape[0] - 1, -1, -1):
            out = out * z[..., None] + c[j]
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.einsum("...ij,...j->...i", self.model.M(z), self._poly(z, self.coeffs))

    def sharp(self, z):
        # M has real coefficients, so M^# = M
        z = np.asarray(z, dtype=complex)
        return np.einsum("...ij,...j->...i", self.model.M(z), self._poly(z, np.conj(self.coeffs)))


class RationalFamily(TestFunction):
    """``Σ_k q_k(z) / Π_j (z - p_kj) · v_k`` with every pole in ℂ₋.

    Each term must decay like ``|z|⁻²`` at least, which puts ``s`` in the
    upper Hardy class.
    """

    family = "H2+"

    def __init__(self, n: int, terms=()):
        self.n = int(n)
        self.terms: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        for t in terms:
            self.add(*t)

    def add(self, numerator, poles, vector) -> "RationalFamily":
        num = np.atleast_1d(np.asarray(numerator, dtype=complex))
        poles = np.atleast_1d(np.asarray(poles, dtype=complex))
        if np.any(poles.imag >= 0):
            raise ValueError("poles must lie in the open lower half-plane")
        if poles.size - (num.size - 1) < 2:
            raise ValueError("term must decay at least like |z|^-2")
        self.terms.append((num, poles, _vec(vector, self.n)))
        return self

    @property
    def poles(self) -> np.ndarray:
        return np.unique(np.concatenate([p for _, p, _ in self.terms])) if self.terms else np.array([])

    def _eval(self, z, conj: bool):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n,), dtype=complex)
        for num, poles, v in self.terms:
            if conj:
                num, poles, v = np.conj(num), np.conj(poles), np.conj(v)
            den = np.ones_like(z)
            for p in poles:
                den = den * (z - p)
            out += (P.polyval(z, num) / den)[..., None] * v
        return out

    def __call__(self, z):
        return self._eval(z, False)

    def sharp(self, z):
        return self._eval(z, True)


def random_rational(n: int, rng: np.random.Generator, *, terms: int = 3,
                    im_range=(-2.0, -0.5), re_range=(-2.0, 2.0)) -> RationalFamily:
    """Random ``Σ c_j / ((z - p_j)(z - q_j))`` with poles in ``Im < -0.5``."""
    s = RationalFamily(n)
    for _ in range(terms):
        poles = rng.uniform(*re_range, 2) + 1j * rng.uniform(*im_range, 2)
        c = rng.normal(size=n) + 1j * rng.normal(size=n)
        s.add([1.0], poles, c)
    return s


# ----------------------------------------------------------------------
@dataclass
class GamovVector:
    """``λ -> k₀ / (ζ₀ - λ)`` with ``k₀ = M(ζ₀) e₀`` and ``L₊(ζ₀) e₀ = 0``."""

    zeta: complex
    e0: np.ndarray
    k0: np.ndarray
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        return self.k0 / (self.zeta - lam)[..., None]

    def as_dict(self) -> dict:
        return {"zeta": [self.zeta.real, self.zeta.imag],
                "e0": [[complex(v).real, complex(v).imag] for v in self.e0],
                "k0": [[complex(v).real, complex(v).imag] for v in self.k0],
                "residual": self.residual}


def gamov_vector(model: ModelSpec, res, e0_index: int = 0) -> GamovVector:
    """Gamov vector for kernel column ``e0_index`` of a located resonance."""
    if not 0 <= e0_index < res.q:
        raise IndexError(f"e0_index {e0_index} out of range for q={res.q}")
    zeta = complex(res.zeta)
    e0 = np.asarray(res.kernel_basis[:, e0_index], dtype=complex)
    e0 = e0 / np.linalg.norm(e0)
    k0 = model.M(zeta) @ e0
    if np.linalg.norm(k0) < 1e-12:
        raise GamovError("M(ζ₀) e₀ vanishes: form factor not invertible at the resonance")
    resid = float(np.linalg.norm(evaluator(model).plus(zeta) @ e0))
    return GamovVector(zeta, e0, k0, resid)


# ----------------------------------------------------------------------
# pairing φ₀^×
def representer_gamma(model: ModelSpec, e) -> GaussianFamily:
    """Representer ``x(λ) = (λ - Λ₀) e`` of the vector ``Γe``."""
    e = _vec(e, model.n)
    return GaussianFamily(model.n, [([0.0, 1.0], 0.0, 0.0, e),
                                    ([1.0], 0.0, 0.0, -(model.lambda0 @ e))])


def _line_window(model: ModelSpec, z: complex, subtract: bool):
    lo, hi = model.window()
    if subtract:
        lo, hi = min(lo, z.real - _GAUSS_REACH), max(hi, z.real + _GAUSS_REACH)
    return lo, hi


def _cauchy_line(model: ModelSpec, phi, phi_at_z, z: complex, sign: int, tol: float):
    """``∫ φ(μ) / (sign·(μ - z)) dμ`` continued entire in ``z`` from ℂ₊ (sign=+1)
    or from ℂ₋ (sign=-1 means the kernel is ``1/(z - μ)`` understood from ℂ₋).

    ``phi_at_z`` is the closed-form entire extension of ``φ`` at ``z``.
    """
    subtract = abs(z.imag) < _SUBTRACT_BAND
    lo, hi = _line_window(model, z, subtract)
    bp = [z.real] if lo < z.real < hi else None
    if subtract:
        fz = phi_at_z()

        def f(mu):
            u = mu - z
            return (phi(mu) - fz * np.exp(-u * u)) / u

        r = adaptive_gl(f, lo, hi, tol=tol, abs_tol=_ABS_TOL, breakpoints=bp)
        value = r.value + 1j * np.pi * fz
    else:
        r = adaptive_gl(lambda mu: phi(mu) / (mu - z), lo, hi, tol=tol, abs_tol=_ABS_TOL,
                        breakpoints=bp)
        value = r.value
        if z.imag < 0:
            value = value + 2j * np.pi * phi_at_z()
    if not r.converged:
        raise QuadratureError("pairing quadrature did not converge", r)
    return sign * value, r.abs_err_estimate


def pairing_phi0(model: ModelSpec, zeta: complex, e0, x: TestFunction, *,
                 tol: float = 1e-12, full_output: bool = False):
    """``⟨x | φ₀^×(ζ)⟩ = ∫ (D(μ) x(μ), (ζ - μ - L₊(ζ)) e₀) / (μ - ζ) dμ``.

    The integral is holomorphic in ``ζ`` ∈ ℂ₊; below the axis it is continued
    by the residue of the integrand's entire extension, which at ``μ = ζ``
    equals ``-x^#(ζ)ᵀ L₋(ζ)⁻¹ B(ζ) e₀`` (``D L₊ = L₋⁻¹ B`` there).
    """
    zeta = complex(zeta)
    if zeta.imag == 0:
        raise ValueError("pairing is defined off the real axis")
    if zeta.imag < 0 and not model.region.contains(zeta):
        raise ValueError("continued pairing needs zeta inside the continuation region")
    e0 = _vec(e0, model.n)
    ev = evaluator(model)
    lz = ev.plus(zeta)
    w = -(lz @ e0)  # (ζ - μ - L₊(ζ)) e₀ = (ζ - μ) e₀ + w

    def phi(mu):
        d = ev.density(mu)
        xm = np.conj(x(mu))
        v = (zeta - mu)[:, None] * e0 + w
        return np.einsum("ki,kij,kj->k", xm, d, v)

    def phi_at_z():
        lm = ev.minus(zeta)
        y = np.linalg.solve(lm, model.B(zeta) @ e0)
        return -complex(x.sharp(zeta) @ y)

    value, err = _cauchy_line(model, phi, phi_at_z, zeta, 1, tol)
    return (value, err) if full_output else value


def resolvent_pairing_check(model: ModelSpec, z: complex, e0, e, *, tol: float = 1e-12) -> dict:
    """Two routes to ``(e, L₊(z) e₀)`` for ``z`` ∈ ℂ₊.

    ``lhs = (e, (z - Λ₀) e₀) - ⟨Γe | φ₀^×(z)⟩`` through the pairing;
    ``rhs`` from the defining integral of ``L₊`` (independent quadrature).
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("identity is checked in the upper half-plane")
    e0, e = _vec(e0, model.n), _vec(e, model.n)
    pair = pairing_phi0(model, z, e0, representer_gamma(model, e), tol=tol)
    lhs = complex(np.vdot(e, (z * np.eye(model.n) - model.lambda0) @ e0)) - pair
    lz = eval_L(model, z, "plus_upper", method="direct").matrix
    rhs = complex(np.vdot(e, lz @ e0))
    return {"z": z, "lhs": lhs, "rhs": rhs, "rel_err": abs(lhs - rhs) / max(abs(rhs), 1e-300)}


# ----------------------------------------------------------------------
# eigen-defect
def _moment(model: ModelSpec, x: TestFunction, e0, weight, tol: float) -> complex:
    """``∫ conj(weight(μ)) (x(μ), D(μ) e₀) dμ`` over the model window."""
    ev = evaluator(model)
    lo, hi = model.window()

    def f(mu):
        d = ev.density(mu)
        return np.conj(weight(mu)) * np.einsum("ki,kij,j->k", np.conj(x(mu)), d, e0)

    r = adaptive_gl(f, lo, hi, tol=tol, abs_tol=_ABS_TOL)
    if not r.converged:
        raise QuadratureError("moment quadrature did not converge", r)
    return complex(r.value)


class _Shifted(TestFunction):
    """``x'(λ) = (λ - conj(ζ)) x(λ)``."""

    def __init__(self, base: TestFunction, zeta: complex):
        self.base, self.zeta, self.n, self.family = base, complex(zeta), base.n, base.family

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (z - np.conj(self.zeta))[..., None] * self.base(z)

    def sharp(self, z):
        z = np.asarray(z, dtype=complex)
        return (z - self.zeta)[..., None] * self.base.sharp(z)


def eigen_defect(model: ModelSpec, zeta: complex, e0, x: TestFunction, *,
                 tol: float = 1e-12) -> complex:
    """Weak eigenvalue residual ``⟨(H - ζ)d | d^×⟩`` for a test element ``d``.

    ``d`` enters through its ℰ-representer ``x``.  With ``x' = (λ - ζ̄) x``
    the residual is ``⟨x' | φ₀^×(ζ)⟩ + ∫ (x', D e₀) dλ``; it vanishes when
    ``L₊(ζ) e₀ = 0``.
    """
    e0 = _vec(e0, model.n)
    xs = _Shifted(x, zeta)
    return pairing_phi0(model, zeta, e0, xs, tol=tol) + _moment(model, xs, e0, lambda mu: 1.0, tol)


def defect_matrix(model: ModelSpec, zeta: complex, elements, *, tol: float = 1e-12) -> np.ndarray:
    """``A[i, j] = eigen_defect(d_i, e_j)`` over the standard basis (linear in ``e₀``)."""
    eye = np.eye(model.n)
    return np.array([[eigen_defect(model, zeta, eye[:, j], x, tol=tol) for j in range(model.n)]
                     for x in elements])


def bundled_test_elements(n: int) -> list[GaussianFamily]:
    """Five representers: constant, linear, Gaussian, shifted Gaussian × quadratic
    and a wide Gaussian × linear, each along its own direction in ℰ."""
    specs = [([1.0], 0.0, 0.0), ([0.0, 1.0], 0.0, 0.0), ([1.0], 2.0, 0.0),
             ([1.0, -0.5, 0.25], 1.0, 0.7), ([1.0, 1.0], 0.5, 0.0)]
    out = []
    for k, (c, a, b) in enumerate(specs):
        v = np.zeros(n, dtype=complex)
        v[k % n] += 1.0
        v[(k + 1) % n] += 0.5j if n > 1 else 0.0
        out.append(GaussianFamily(n, [(c, a, b, v / np.linalg.norm(v))]))
    return out


def bundled_s0(model: ModelSpec) -> list[FormFactorFamily]:
    """Three continuable test functions ``s = M p`` with vector polynomials ``p``."""
    n = model.n
    a = np.ones(n)
    b = np.arange(1, n + 1, dtype=float)
    return [FormFactorFamily(model, [a]),
            FormFactorFamily(model, [0.5 * b, 1j * a]),
            FormFactorFamily(model, [a, np.zeros(n), (0.3 - 0.2j) * b])]


# ----------------------------------------------------------------------
# Ψ functions and the Dirac pairing
def _psi_integrand(model: ModelSpec, s: TestFunction):
    ev = evaluator(model)

    def f(mu):
        mu = np.asarray(mu, dtype=complex)
        lm = ev.minus(mu)
        mt = np.swapaxes(model.M(mu), -1, -2)
        return np.linalg.solve(lm, (mt @ s(mu)[..., None]))[..., 0]

    return f


def psi_minus(model: ModelSpec, w: complex, s: TestFunction, *, tol: float = 1e-12,
              full_output: bool = False):
    """``Ψ(w) = ∫ L₋(μ)⁻¹ M(μ)ᵀ s(μ) / (w - μ) dμ`` for ``w`` off the axis.

    The same formula gives ``Ψ₋`` below and ``Ψ₊`` above the axis; near the
    axis the pole is subtracted with a Gaussian of the integrand's
    continuation.
    """
    w = complex(w)
    if w.imag == 0:
        raise ValueError("w must lie off the real axis")
    f = _psi_integrand(model, s)
    subtract = abs(w.imag) < _SUBTRACT_BAND
    lo, hi = _line_window(model, w, subtract)
    bp = [w.real] if lo < w.real < hi else None
    if subtract:
        fw = f(np.array([w]))[0]

        def g(mu):
            u = (w - mu)[:, None]
            return (f(mu) - fw * np.exp(-u * u)) / u

        r = adaptive_gl(g, lo, hi, tol=tol, abs_tol=_ABS_TOL, breakpoints=bp)
        # ∫ exp(-(μ-w)²)/(w-μ) dμ = -iπ sign(Im w)
        value = r.value - 1j * np.pi * np.sign(w.imag) * fw
    else:
        r = adaptive_gl(lambda mu: f(mu) / (w - mu)[:, None], lo, hi, tol=tol,
                        abs_tol=_ABS_TOL, breakpoints=bp)
        value = r.value
    if not r.converged:
        raise QuadratureError("Ψ quadrature did not converge", r)
    value = np.asarray(value)
    return (value, r.abs_err_estimate) if full_output else value


def psi_continued(model: ModelSpec, w: complex, s: TestFunction, *, half_width: float = 0.25,
                  clearance: float = 0.3, tol: float = 1e-12) -> np.ndarray:
    """Continuation of ``Ψ₋`` to ``w`` ∈ ℂ₊ by deforming the line over ``w``.

    The segment ``[Re w ± half_width]`` is replaced by the upper three sides
    of the box reaching ``Im w + clearance``.  The box must hold no zero of
    ``det L₋`` (checked by the argument principle).
    """
    w = complex(w)
    if not w.imag > 0:
        raise ValueError("continuation target must lie in the upper half-plane")
    a, b, top = w.real - half_width, w.real + half_width, w.imag + clearance
    ev = evaluator(model)
    box = Rectangle(a, b, 1e-3, top)
    wind = winding_number(lambda z: np.linalg.det(ev.minus(z)), box)
    if wind != 0:
        raise ValueError("deformation box encloses a zero of det L₋")
    f = _psi_integrand(model, s)
    lo, hi = model.window()
    lo, hi = min(lo, a - 1.0), max(hi, b + 1.0)

    def kern(mu):
        return f(mu) / (w - mu)[:, None]

    total = 0
    for p, q in ((lo, a), (b, hi)):
        total = total + adaptive_gl(kern, p, q, tol=tol, abs_tol=_ABS_TOL).value
    for z0, z1 in ((a, a + 1j * top), (a + 1j * top, b + 1j * top), (b + 1j * top, b)):
        def edge(t, z0=z0, z1=z1):
            return kern(z0 + (z1 - z0) * t) * (z1 - z0)
        r = adaptive_gl(edge, 0.0, 1.0, tol=tol, abs_tol=_ABS_TOL)
        if not r.converged:
            raise QuadratureError("bump contour quadrature did not converge", r)
        total = total + r.value
    return np.asarray(total)


def dirac_pairing(gv: GamovVector, s: TestFunction) -> complex:
    """``2πi (s(ζ̄₀), k₀)``, antilinear in ``s``."""
    zb = np.conj(gv.zeta)
    return complex(2j * np.pi * np.vdot(s(zb), gv.k0))


def psi_route_pairing(model: ModelSpec, gv: GamovVector, s: TestFunction, *,
                      radius: float | None = None, nodes: int = 32, tol: float = 1e-12) -> complex:
    """Value at ``ζ₀`` of ``F(z) = 2πi (M(z̄)ᵀ s(z̄), e₀)ᵃ + (Ψ₊(z̄), L₊(z) e₀)``.

    ``F`` is holomorphic near ``ζ₀``; it is evaluated by the mean value over a
    circle of radius below ``|Im ζ₀|`` so that ``L₊(z)e₀ ≠ 0`` on every node
    and the Ψ term genuinely contributes.
    """
    zeta = complex(gv.zeta)
    if radius is None:
        radius = 0.45 * abs(zeta.imag)
    if radius >= abs(zeta.imag):
        raise ValueError("circle must stay in the lower half-plane")
    ev = evaluator(model)
    e0 = gv.e0

    def F(z):
        out = []
        for zz in np.atleast_1d(z):
            psi = psi_minus(model, np.conj(zz), s, tol=tol)
            first = 2j * np.pi * (s.sharp(zz) @ (model.M(zz) @ e0))
            out.append(first + np.vdot(psi, ev.plus(zz) @ e0))
        return np.array(out)

    r = contour_integral(lambda z: F(z) / (2j * np.pi * (z - zeta)), Circle(zeta, radius), nodes)
    return complex(r.value)


# ----------------------------------------------------------------------
def _residue(f, q: complex, radius: float, nodes: int = 64) -> complex:
    return complex(contour_integral(f, Circle(q, radius), nodes, residue=True).value)


def paley_wiener_check(gv: GamovVector, s: RationalFamily, *, tol: float = 1e-12,
                       abs_floor: float = 1e-14) -> dict:
    """``∫ (s(λ), k₀/(ζ₀-λ)) dλ`` against ``2πi (s(ζ̄₀), k₀)``.

    The quadrature maps ℝ to ``(-π/2, π/2)`` by ``λ = Re ζ₀ + tan θ``.  The
    result also carries an ``oracle`` value from closing the contour in the
    upper half-plane (residues at the conjugated poles of ``s``), which does
    not see the pole at ``ζ₀`` at all.
    """
    zeta, k0 = complex(gv.zeta), gv.k0
    c = zeta.real

    def integrand(lam):
        return (s.sharp(lam) @ k0) / (zeta - lam)

    def mapped(theta):
        lam = c + np.tan(theta)
        return integrand(lam.astype(complex)) / np.cos(theta) ** 2

    poles = np.concatenate([[zeta], np.conj(s.poles)])
    bps = np.arctan(poles.real - c)
    edge = 0.5 * np.pi * (1 - 1e-12)
    r = adaptive_gl(mapped, -edge, edge, tol=tol, abs_tol=_ABS_TOL, initial_panels=32,
                    breakpoints=bps)
    if not r.converged:
        raise QuadratureError("Paley-Wiener quadrature did not converge", r)
    lhs = complex(r.value)
    rhs = dirac_pairing(gv, s)
    # oracle: close in ℂ₊ where only the conjugated poles of s live
    qs = np.unique(np.round(np.conj(s.poles), 14))
    oracle = 0j
    for q in qs:
        others = np.concatenate([qs[qs != q], [zeta]])
        rad = 0.4 * float(np.min(np.abs(others - q)))
        oracle += 2j * np.pi * _residue(integrand, q, rad)
    if abs(rhs) < abs_floor:
        rel = abs(lhs - rhs)
        mode = "absolute"
    else:
        rel = abs(lhs - rhs) / abs(rhs)
        mode = "relative"
    return {"lhs": lhs, "rhs": rhs, "oracle": oracle, "rel_err": rel, "mode": mode,
            "quad_err": r.abs_err_estimate}
