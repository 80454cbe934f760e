"""Livšic matrix ``L±(z) = z - Λ₀ - ∫ B(μ)/(z - μ) dμ`` and its continuation.

Two independent evaluation routes are provided.

``direct``
    The defining integral by adaptive quadrature, with Sokhotski-Plemelj
    on the real axis and ``+2πi B(z)`` for the continued plus branch.
``entire``
    Subtract ``B(z) exp(-(μ-z)²)`` from the numerator.  Because
    ``∫ exp(-(μ-z)²)/(z-μ) dμ = -iπ sign(Im z)`` the remainder
    ``R(z) = ∫ [B(μ) - B(z) e^{-(μ-z)²}]/(z-μ) dμ`` is entire, and

        L₊(z) = z - Λ₀ - R(z) + iπ B(z),   L₋(z) = z - Λ₀ - R(z) - iπ B(z)

    hold on the whole plane (``L₊`` continued into ℂ₋, ``L₋`` into ℂ₊).
    ``R`` is integrated on a fixed composite Gauss grid whose node values of
    ``B`` are cached, which makes batched evaluation cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import numpy as np
from scipy import optimize

from .model import MAX_DIM, ModelSpec
from .quad import QuadratureError, gauss_legendre, integrate_real_line, pv_integrate

__all__ = [
    "BRANCHES",
    "LivsicValue",
    "LivsicEvaluator",
    "evaluator",
    "eval_L",
    "eval_L_derivative",
    "det",
    "Assumption2Report",
    "check_assumption2",
]

BRANCHES = ("plus_upper", "plus_boundary", "plus_continued", "minus_lower", "minus_boundary")
SQRT_PI = np.sqrt(np.pi)
_SUBTRACT_BAND = 1.0     # |Im z| below which the entire route subtracts
_GAUSS_REACH = 7.0       # exp(-49) is below roundoff
_COINCIDE = 1e-6         # node distance switching to the Taylor limit
_CHUNK = 2 ** 21         # complex entries per work block


@dataclass(frozen=True)
class LivsicValue:
    z: complex
    branch: str
    matrix: np.ndarray
    err: float


def det(a: np.ndarray):
    """Determinant by LU with partial pivoting (batched over leading axes)."""
    if a.shape[-1] > MAX_DIM:
        raise ValueError(f"matrix dimension above supported cap {MAX_DIM}")
    return np.linalg.det(a)


class LivsicEvaluator:
    """Batched evaluation of the entire plus/minus Livšic matrices for one model."""

    def __init__(self, model: ModelSpec, spacing: float | None = None):
        self.model = model
        self.n = model.n
        self.h = spacing or model.node_spacing()
        self.window = model.window()
        self._panels: dict[int, tuple] = {}
        self._grid_cache: dict[tuple[int, int], tuple] = {}
        self._eye = np.eye(self.n)

    # nodes ------------------------------------------------------------
    def _panel(self, k: int, shift: int = 0):
        got = self._panels.get((k, shift))
        if got is None:
            x, w = gauss_legendre(16)
            a = (k + 0.5 * shift) * self.h
            mu = a + 0.5 * self.h * (x + 1.0)
            got = (mu, 0.5 * self.h * w, self.model.B(mu).real)
            self._panels[(k, shift)] = got
        return got

    def grid(self, lo: float, hi: float, shift: int = 0):
        """Cached nodes, weights and ``B`` values covering ``[lo, hi]``.

        ``shift=1`` moves every panel by half a panel length; the two node
        sets are well separated, which :meth:`_regular` uses to keep real
        evaluation points away from the nodes.
        """
        off = 0.5 * shift * self.h
        k0, k1 = int(np.floor((lo - off) / self.h)), int(np.ceil((hi - off) / self.h))
        key = (k0, k1, shift)
        got = self._grid_cache.get(key)
        if got is None:
            parts = [self._panel(k, shift) for k in range(k0, k1)]
            mu = np.concatenate([p[0] for p in parts])
            w = np.concatenate([p[1] for p in parts])
            b = np.concatenate([p[2] for p in parts]).reshape(-1, self.n * self.n)
            if len(self._grid_cache) > 64:
                self._grid_cache.clear()
            got = (mu, w, b)
            self._grid_cache[key] = got
        return got

    def _span(self, z: np.ndarray, subtract: bool, shift: int = 0):
        lo, hi = self.window
        if subtract and z.size:
            lo = min(lo, float(z.real.min()) - _GAUSS_REACH)
            hi = max(hi, float(z.real.max()) + _GAUSS_REACH)
        return self.grid(lo, hi, shift)

    def _node_gap(self, z: np.ndarray, shift: int) -> np.ndarray:
        """Distance from ``z`` to the nearest node of the (shifted) grid."""
        x, _ = gauss_legendre(16)
        local = 0.5 * (x + 1.0) * self.h
        t = np.mod(z.real - 0.5 * shift * self.h, self.h)
        d = np.abs(t[:, None] - np.concatenate([local - self.h, local, local + self.h])[None, :])
        return np.hypot(d.min(axis=1), z.imag)

    # kernels ----------------------------------------------------------
    def _regular(self, z: np.ndarray, order: int):
        """``R(z)`` (order 0) or ``R'(z)`` (order 1) on the subtraction route.

        Each point uses whichever of the two node grids lies farther from it,
        bounding the cancellation in ``(B(μ) - B(z) g) / (μ - z)``.
        """
        if z.size == 0:
            return np.empty(z.shape + (self.n, self.n), dtype=complex)
        alt = self._node_gap(z, 1) > self._node_gap(z, 0)
        if alt.any() and not alt.all():
            out = np.empty(z.shape + (self.n, self.n), dtype=complex)
            out[~alt] = self._regular_on(z[~alt], order, 0)
            out[alt] = self._regular_on(z[alt], order, 1)
            return out
        return self._regular_on(z, order, int(alt[0]))

    def _regular_on(self, z: np.ndarray, order: int, shift: int):
        nn = self.n * self.n
        mu, w, bmu = self._span(z, True, shift)
        bz = self.model.B(z, order=2)
        out = np.empty((z.size, nn), dtype=complex)
        step = max(1, _CHUNK // max(mu.size, 1))
        for s in range(0, z.size, step):
            zz = z[s:s + step]
            u = mu[None, :] - zz[:, None]
            near = np.abs(u) < _COINCIDE
            if near.any():
                u = np.where(near, 1.0, u)
            g = np.exp(-u * u)
            b0 = bz[0][s:s + step].reshape(-1, nn)
            if order == 0:
                k = w[None, :] / (-u)
                val = k @ bmu - b0 * (k * g).sum(axis=1)[:, None]
            else:
                b1 = bz[1][s:s + step].reshape(-1, nn)
                k = w[None, :] / (u * u)
                val = -(k @ bmu - b0 * (k * g).sum(axis=1)[:, None]
                        - b1 * (k * g * u).sum(axis=1)[:, None]) + 2 * SQRT_PI * b0
            if near.any():
                val = val + self._coincide_fix(zz, mu, w, bmu, near, u, g,
                                               [b[s:s + step].reshape(-1, nn) for b in bz], order)
            out[s:s + step] = val
        return out.reshape(z.shape + (self.n, self.n))

    @staticmethod
    def _coincide_fix(zz, mu, w, bmu, near, u, g, bz, order):
        # replace the placeholder contribution (u := 1) by the analytic limit
        fix = np.zeros((zz.size, bmu.shape[1]), dtype=complex)
        for i, j in zip(*np.nonzero(near)):
            if order == 0:
                placeholder = w[j] * (bmu[j] - bz[0][i] * g[i, j]) / (-1.0)
                limit = -w[j] * bz[1][i]
            else:
                placeholder = -w[j] * (bmu[j] - (bz[0][i] + bz[1][i]) * g[i, j])
                limit = -w[j] * (0.5 * bz[2][i] + bz[0][i])
            fix[i] += limit - placeholder
        return fix

    def _cauchy(self, z: np.ndarray, power: int = 1):
        """``∫ B(μ)/(z-μ)^power dμ`` on the fixed grid (for |Im z| >= 1)."""
        nn = self.n * self.n
        mu, w, bmu = self._span(z, False)
        out = np.empty((z.size, nn), dtype=complex)
        step = max(1, _CHUNK // max(mu.size, 1))
        for s in range(0, z.size, step):
            d = z[s:s + step, None] - mu[None, :]
            out[s:s + step] = (w[None, :] / d ** power) @ bmu
        return out.reshape(z.shape + (self.n, self.n))

    # public -----------------------------------------------------------
    def plus(self, z) -> np.ndarray:
        """Entire ``L₊``: the upper-half-plane value for Im z > 0, the
        boundary value on ℝ and the continuation for Im z < 0."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape + (self.n, self.n), dtype=complex)
        band = np.abs(flat.imag) < _SUBTRACT_BAND
        zi = flat[:, None, None] * self._eye - self.model.lambda0
        if band.any():
            zb = flat[band]
            out[band] = zi[band] - self._regular(zb, 0) + 1j * np.pi * self.model.B(zb)
        if (~band).any():
            zf = flat[~band]
            val = zi[~band] - self._cauchy(zf)
            low = zf.imag < 0
            if low.any():
                val[low] += 2j * np.pi * self.model.B(zf[low])
            out[~band] = val
        return out.reshape(z.shape + (self.n, self.n))

    def minus(self, z) -> np.ndarray:
        """Entire ``L₋(z) = L₊(z̄)^H``."""
        z = np.asarray(z, dtype=complex)
        return np.conj(np.swapaxes(self.plus(np.conj(z)), -1, -2))

    def plus_derivative(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape + (self.n, self.n), dtype=complex)
        band = np.abs(flat.imag) < _SUBTRACT_BAND
        if band.any():
            zb = flat[band]
            out[band] = self._eye - self._regular(zb, 1) + 1j * np.pi * self.model.B(zb, 1)[1]
        if (~band).any():
            zf = flat[~band]
            val = self._eye + self._cauchy(zf, 2)
            low = zf.imag < 0
            if low.any():
                val[low] += 2j * np.pi * self.model.B(zf[low], 1)[1]
            out[~band] = val
        return out.reshape(z.shape + (self.n, self.n))

    def det_plus(self, z):
        return det(self.plus(z))

    def dlog_det_plus(self, z):
        """``tr(L₊⁻¹ L₊')``, the logarithmic derivative of ``det L₊``."""
        l = self.plus(z)
        dl = self.plus_derivative(z)
        return np.trace(np.linalg.solve(l, dl), axis1=-2, axis2=-1)

    def density(self, lam) -> np.ndarray:
        """``D(λ) = L₊(λ)⁻¹ B(λ) L₋(λ)⁻¹`` on the real axis."""
        lam = np.asarray(lam, dtype=float)
        lp = self.plus(lam)
        b = self.model.B(lam).real
        x = np.linalg.solve(lp, b.astype(complex))
        # X L₋⁻¹ = (L₊⁻¹ X^H)^H because L₋ = L₊^H on the axis
        y = np.linalg.solve(lp, np.conj(np.swapaxes(x, -1, -2)))
        return np.conj(np.swapaxes(y, -1, -2))


@lru_cache(maxsize=32)
def evaluator(model: ModelSpec) -> LivsicEvaluator:
    """Shared evaluator per model object (models are immutable)."""
    return LivsicEvaluator(model)


# ----------------------------------------------------------------------
def _check_branch(z: complex, branch: str, model: ModelSpec):
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    y = z.imag
    if branch == "plus_upper" and not y > 0:
        raise ValueError("plus_upper requires Im z > 0")
    if branch == "minus_lower" and not y < 0:
        raise ValueError("minus_lower requires Im z < 0")
    if branch.endswith("boundary") and y != 0:
        raise ValueError("boundary branches require real z")
    if branch == "plus_continued":
        if not y < 0:
            raise ValueError("plus_continued requires Im z < 0")
        if not model.region.contains(z):
            raise ValueError("plus_continued requires z inside the continuation region")


def _direct_integral(model: ModelSpec, z: complex, power: int, tol: float):
    nn = model.n

    def f(mu):
        return model.B(mu).real.reshape(-1, nn, nn) / ((z - mu) ** power)[:, None, None]

    lo, hi = model.window()
    # put a breakpoint under the pole so the first panels straddle it
    bp = [z.real] if lo < z.real < hi else None
    return integrate_real_line(f, window=(lo, hi), tol=tol, breakpoints=bp,
                               tail_bound=model.tail_bound() / max(abs(z.imag), 1e-300) ** power)


def eval_L(model: ModelSpec, z, branch: str, *, method: str = "direct",
           tol: float = 1e-10) -> LivsicValue:
    """Livšic matrix at one point on the requested branch.

    Parameters
    ----------
    method : {"direct", "entire"}
        ``direct`` follows the defining integral (Plemelj on ℝ, residue
        ``2πi B(z)`` for the continued branch); ``entire`` uses the
        subtracted representation and serves as an independent route.

    Examples
    --------
    >>> from resonance_kit.model import scalar_gaussian
    >>> v = eval_L(scalar_gaussian(1.0, 0.0), 0.0, "plus_boundary")
    >>> complex(np.round(v.matrix[0, 0], 10))
    3.1415926536j
    """
    z = complex(z)
    _check_branch(z, branch, model)
    n = model.n
    eye = np.eye(n)
    if method == "entire":
        ev = evaluator(model)
        m = ev.minus(z) if branch.startswith("minus") else ev.plus(z)
        scale = 1.0 + float(np.abs(m).max())
        return LivsicValue(z, branch, m[()] if m.ndim == 2 else m, 1e-13 * scale)
    if method != "direct":
        raise ValueError("method must be 'direct' or 'entire'")
    if branch.endswith("boundary"):
        lam = z.real
        lo, hi = model.window()
        r = pv_integrate(lambda mu: model.B(mu).real.reshape(-1, n, n), lam,
                         window=(lo, hi), tol=tol)
        jump = 1j * np.pi * model.B(lam).real
        base = (lam * eye - model.lambda0) - r.value
        m = base + jump if branch == "plus_boundary" else base - jump
        err = r.abs_err_estimate
        converged = r.converged
    else:
        r = _direct_integral(model, z, 1, tol)
        m = z * eye - model.lambda0 - r.value
        if branch == "plus_continued":
            m = m + 2j * np.pi * model.B(z)
        err = r.abs_err_estimate
        converged = r.converged
    if not converged:
        raise QuadratureError(f"Livšic quadrature did not converge at z={z}", r)
    return LivsicValue(z, branch, np.asarray(m, dtype=complex), float(err))


def eval_L_derivative(model: ModelSpec, z, branch: str, *, method: str = "direct",
                      tol: float = 1e-10) -> np.ndarray:
    """``dL₊/dz`` on ``plus_upper`` or ``plus_continued``."""
    z = complex(z)
    if branch not in ("plus_upper", "plus_continued"):
        raise ValueError("derivative is available on plus_upper and plus_continued")
    _check_branch(z, branch, model)
    if method == "entire":
        return evaluator(model).plus_derivative(z)
    r = _direct_integral(model, z, 2, tol)
    if not r.converged:
        raise QuadratureError(f"derivative quadrature did not converge at z={z}", r)
    out = np.eye(model.n) + r.value
    if branch == "plus_continued":
        out = out + 2j * np.pi * model.B(z, 1)[1]
    return np.asarray(out, dtype=complex)


# ----------------------------------------------------------------------
@dataclass
class Assumption2Report:
    min_abs_det: float
    argmin: float
    passed: bool
    threshold: float
    scan: tuple[float, float]
    step: float

    def as_dict(self) -> dict:
        return {"min_abs_det": self.min_abs_det, "argmin": self.argmin,
                "pass": self.passed, "threshold": self.threshold,
                "scan": list(self.scan), "step": self.step}


def default_scan(model: ModelSpec) -> tuple[float, float]:
    ev = model.eigenvalues
    pad = 3.0 * model.length_scale()
    return float(ev.min() - pad), float(ev.max() + pad)


def check_assumption2(model: ModelSpec, scan: tuple[float, float] | None = None,
                      step: float = 1e-2, threshold: float = 1e-8) -> Assumption2Report:
    """Scan ``|det L₊(λ)|`` on a real grid; pass when its minimum exceeds ``threshold``.

    The grid minimum is polished with a bounded scalar minimizer and the
    eigenvalues of ``Λ₀`` are always sampled, since decoupled levels sit
    exactly there.
    """
    lo, hi = scan if scan is not None else default_scan(model)
    ev = evaluator(model)
    grid = np.union1d(np.arange(lo, hi + 0.5 * step, step), model.eigenvalues)
    grid = grid[(grid >= lo) & (grid <= hi)]
    vals = np.abs(ev.det_plus(grid))
    k = int(np.argmin(vals))
    best, arg = float(vals[k]), float(grid[k])
    a, b = max(lo, arg - step), min(hi, arg + step)
    if b > a:
        res = optimize.minimize_scalar(lambda x: float(np.abs(ev.det_plus(np.array([x]))[0])),
                                       bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-12})
        if res.fun < best:
            best, arg = float(res.fun), float(res.x)
    return Assumption2Report(best, arg, best > threshold, threshold, (float(lo), float(hi)), step)


def plemelj_jump(model: ModelSpec, lam) -> np.ndarray:
    """``‖L₊(λ) - L₋(λ) - 2πi B(λ)‖₂`` with ``L₊`` by principal value and
    ``L₋`` by the entire route."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    ev = evaluator(model)
    out = np.empty(lam.size)
    for i, x in enumerate(lam):
        lp = eval_L(model, x, "plus_boundary").matrix
        lm = ev.minus(x)
        out[i] = np.linalg.norm(lp - lm - 2j * np.pi * model.B(x).real, 2)
    return out

