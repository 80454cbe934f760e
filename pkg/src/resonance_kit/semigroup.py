"""Discretized upper Hardy space, the truncated evolution and survival amplitudes.

Convention: ``f ∈ H²₊`` iff ``f(λ) = ∫₀^∞ g(t) e^{iλt} dt``, i.e. ``f`` is
analytic in the upper half-plane.  Then ``k/(λ - ζ)`` with ``Im ζ < 0``
lies in ``H²₊``.

Discretization
--------------
The Cayley map ``w = (λ - iβ)/(λ + iβ)`` sends ℝ onto the unit circle, and

    φ_m(λ) = sqrt(β/π) (λ - iβ)^m / (λ + iβ)^{m+1},   m ∈ ℤ,

is an orthonormal basis of ``L²(ℝ)`` with ``H²₊ = span{φ_m : m ≥ 0}``.
Coefficients follow from one FFT of ``sqrt(π/β)(λ + iβ) f(λ)`` sampled at
``θ_j = 2π(j + 1/2)/n``, ``λ_j = -β cot(θ_j/2)``.  ``Q₊`` zeroes the
modes ``m < 0`` and is exactly idempotent.  Multiplication by
``e^{-iλt}`` is analytic and bounded in ℂ₋, so ``Z(t) = Q₊ e^{-iλt}`` acts
on the coefficients as an upper-triangular Toeplitz matrix with symbol

    e^{-iλt} = Σ_{k≥0} τ_k w^{-k},   τ_k = e^{-βt} L_k^{(-1)}(2βt).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import matmul_toeplitz

from .livsic import evaluator
from .model import ModelSpec
from .quad import QuadratureError, adaptive_gl, gauss_legendre

__all__ = [
    "HardyGrid",
    "DecayFit",
    "DecayFitError",
    "hardy_project",
    "evolution_symbol",
    "truncated_evolution",
    "semigroup_defect",
    "pre_gamov",
    "pre_gamov_defect",
    "eigen_sweep",
    "survival_amplitude",
    "survival_amplitude_fft",
    "rho_function",
    "decay_fit",
    "DEFAULT_N",
    "DEFAULT_BETA",
]

DEFAULT_N = 2 ** 14
DEFAULT_BETA = 1.0


class DecayFitError(ValueError):
    """Exponential fit not possible on the requested window."""


# ----------------------------------------------------------------------
class HardyGrid:
    """Cayley-mapped sampling grid for ``𝒦``-valued functions on ℝ.

    Parameters
    ----------
    n : int
        Number of samples, a power of two; ``n // 2`` Hardy modes are kept.
    beta : float
        Cayley scale; nodes cluster within ``|λ| ≲ β`` and spread as ``1/θ``.
    dim : int
        Fiber dimension ``dim 𝒦``.
    """

    def __init__(self, n: int = DEFAULT_N, beta: float = DEFAULT_BETA, dim: int = 1):
        n = int(n)
        if n < 8 or n & (n - 1):
            raise ValueError("n must be a power of two >= 8")
        if not beta > 0:
            raise ValueError("beta must be positive")
        self.n, self.beta, self.dim = n, float(beta), int(dim)
        self.theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        self.lam = -self.beta / np.tan(0.5 * self.theta)
        self.modes = np.fft.fftfreq(n, 1.0 / n).astype(int)
        self._weight = np.sqrt(np.pi / self.beta) * (self.lam + 1j * self.beta)
        self._phase = np.exp(-1j * np.pi * self.modes / n)

    @property
    def hardy_modes(self) -> int:
        return self.n // 2

    def __repr__(self):
        return f"HardyGrid(n={self.n}, beta={self.beta}, dim={self.dim})"

    def sample(self, f) -> np.ndarray:
        """Samples of a callable ``f(λ) -> (.., dim)`` on the grid, shape ``(n, dim)``."""
        v = np.asarray(f(self.lam), dtype=complex)
        return v.reshape(self.n, self.dim)

    def _shape(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        if f.shape[0] != self.n:
            raise ValueError(f"expected {self.n} samples, got {f.shape[0]}")
        return f.reshape(self.n, -1)

    def coeffs(self, f) -> np.ndarray:
        """All ``n`` coefficients in FFT order (``self.modes`` gives ``m``)."""
        f = self._shape(f)
        return np.fft.fft(self._weight[:, None] * f, axis=0) / self.n * self._phase[:, None]

    def samples(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=complex).reshape(self.n, -1)
        big = np.fft.ifft(c / self._phase[:, None], axis=0) * self.n
        return big / self._weight[:, None]

    def hardy_coeffs(self, f) -> np.ndarray:
        """Coefficients of modes ``0 .. n/2 - 1``, shape ``(n/2, dim)``."""
        return self.coeffs(f)[: self.hardy_modes]

    def from_hardy(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=complex).reshape(self.hardy_modes, -1)
        full = np.zeros((self.n, c.shape[1]), dtype=complex)
        full[: self.hardy_modes] = c
        return self.samples(full)

    def norm(self, f) -> float:
        """``L²(ℝ, 𝒦)`` norm from the coefficients (Parseval)."""
        return float(np.linalg.norm(self.coeffs(f)))


def hardy_project(grid: HardyGrid, f) -> np.ndarray:
    """``Q₊ f`` on the grid: drop the modes with ``m < 0``."""
    c = grid.coeffs(f)
    c[grid.modes < 0] = 0
    return grid.samples(c)


def evolution_symbol(grid: HardyGrid, t: float) -> np.ndarray:
    """``τ_k = e^{-βt} L_k^{(-1)}(2βt)`` for ``k < n/2``.

    Forward three-term recurrence ``(k+1)L_{k+1} = (2k - y)L_k - (k-1)L_{k-1}``
    started from ``L_0 = 1``, ``L_1 = -y``, carried with the ``e^{-y/2}``
    factor folded in.
    """
    if t < 0:
        raise ValueError("the truncated evolution is defined for t >= 0 only")
    y = 2 * grid.beta * float(t)
    m = grid.hardy_modes
    tau = np.empty(m)
    tau[0] = np.exp(-0.5 * y)
    if m > 1:
        tau[1] = -y * tau[0]
    for k in range(1, m - 1):
        tau[k + 1] = ((2 * k - y) * tau[k] - (k - 1) * tau[k - 1]) / (k + 1)
    return tau


def _evolve_coeffs(grid: HardyGrid, c: np.ndarray, t: float) -> np.ndarray:
    if t == 0:
        return c.copy()
    tau = evolution_symbol(grid, t).astype(complex)
    first_col = np.zeros_like(tau)
    first_col[0] = tau[0]
    return matmul_toeplitz((first_col, tau), c, check_finite=False)


def truncated_evolution(grid: HardyGrid, f, t: float) -> np.ndarray:
    """``Z(t) f = Q₊ e^{-iλt} f`` for ``t ≥ 0``.

    ``f`` is projected to ``H²₊`` first; the product with ``e^{-iλt}`` is
    applied in coefficient space, which avoids sampling the unresolved
    oscillation near ``λ = ±∞``.
    """
    if t < 0:
        raise ValueError("the truncated evolution is defined for t >= 0 only")
    c = grid.hardy_coeffs(f)
    return grid.from_hardy(_evolve_coeffs(grid, c, t))


def semigroup_defect(grid: HardyGrid, f, t1: float, t2: float) -> float:
    """``‖Z(t1+t2)f - Z(t1)Z(t2)f‖ / ‖f‖``."""
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be non-negative")
    c = grid.hardy_coeffs(f)
    lhs = _evolve_coeffs(grid, c, t1 + t2)
    rhs = _evolve_coeffs(grid, _evolve_coeffs(grid, c, t2), t1)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(c))


def pre_gamov(grid: HardyGrid, zeta: complex, k) -> np.ndarray:
    """Samples of ``k / (λ - ζ)`` with ``ζ`` in the lower half-plane."""
    zeta = complex(zeta)
    if not zeta.imag < 0:
        raise ValueError("pre-Gamov vectors need Im zeta < 0")
    k = np.asarray(k, dtype=complex).reshape(-1)
    return k[None, :] / (grid.lam - zeta)[:, None]


def pre_gamov_defect(grid: HardyGrid, zeta: complex, k, t: float) -> float:
    """``‖Z(t)f - e^{-iζt} f‖ / ‖f‖`` for ``f = k/(λ - ζ)``."""
    f = pre_gamov(grid, zeta, k)
    c = grid.hardy_coeffs(f)
    d = _evolve_coeffs(grid, c, t) - np.exp(-1j * complex(zeta) * t) * c
    return float(np.linalg.norm(d) / np.linalg.norm(c))


def eigen_sweep(grid: HardyGrid, zetas=None, times=(0.1, 1.0, 5.0)) -> np.ndarray:
    """Worst pre-Gamov defect over basis vectors of ``𝒦``; shape ``(len(zetas), len(times))``."""
    if zetas is None:
        zetas = [complex(a, b) for a in (-2.0, 0.0, 2.0) for b in (-0.05, -0.3, -1.0)]
    eye = np.eye(grid.dim)
    out = np.zeros((len(zetas), len(times)))
    for i, z in enumerate(zetas):
        for j, t in enumerate(times):
            out[i, j] = max(pre_gamov_defect(grid, z, eye[:, q], t) for q in range(grid.dim))
    return out


# ----------------------------------------------------------------------
# survival amplitude
def rho_function(model: ModelSpec, e0):
    """``ρ(λ) = (e₀, D(λ) e₀)``."""
    e0 = np.asarray(e0, dtype=complex).reshape(-1)
    ev = evaluator(model)

    def rho(lam):
        d = ev.density(np.asarray(lam, dtype=float))
        return np.real(np.einsum("i,...ij,j->...", np.conj(e0), d, e0))

    return rho


def _unit(e0, n: int) -> np.ndarray:
    e0 = np.asarray(e0, dtype=complex).reshape(-1)
    if e0.size != n:
        raise ValueError("e0 has the wrong dimension")
    nrm = np.linalg.norm(e0)
    if not abs(nrm - 1) < 1e-12:
        raise ValueError("e0 must be a unit vector")
    return e0


def survival_amplitude(model: ModelSpec, e0, times, *, tol: float = 1e-12,
                       nyquist: float = 8.0) -> np.ndarray:
    """``A(t) = ∫ e^{-iλt} ρ(λ) dλ`` by composite Gauss-Legendre.

    Panels are first adapted to ``ρ`` (which resolves the resonance peak),
    then bisected until ``panel length × max t ≤ nyquist``.
    """
    e0 = _unit(e0, model.n)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho = rho_function(model, e0)
    lo, hi = model.window()
    r = adaptive_gl(rho, lo, hi, tol=tol, abs_tol=1e-15, initial_panels=32)
    if not r.converged:
        raise QuadratureError("density quadrature did not converge", r)
    edges = r.edges
    tmax = float(np.max(np.abs(times))) if times.size else 0.0
    if tmax > 0:
        parts = []
        for a, b in zip(edges[:-1], edges[1:]):
            k = max(1, int(np.ceil((b - a) * tmax / nyquist)))
            parts.append(np.linspace(a, b, k + 1)[:-1])
        edges = np.concatenate(parts + [[edges[-1]]])
    x, w = gauss_legendre(16)
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x).ravel()
    weights = (0.5 * (b - a)[:, None] * w).ravel() * rho(nodes)
    out = np.empty(times.size, dtype=complex)
    step = max(1, 2 ** 22 // max(nodes.size, 1))
    for s in range(0, times.size, step):
        out[s:s + step] = np.exp(-1j * np.outer(times[s:s + step], nodes)) @ weights
    return out


def survival_amplitude_fft(model: ModelSpec, e0, t_max: float, *, h: float = 1e-3):
    """Trapezoid rule with step ``h`` on the model window, summed by one FFT.

    Returns ``(times, A)`` on the FFT time grid ``dt = 2π / (N h)`` up to
    ``t_max``.  The trapezoid rule converges geometrically for the analytic
    ``ρ``, so this is an independent check of :func:`survival_amplitude`.
    """
    e0 = _unit(e0, model.n)
    lo, hi = model.window()
    lam = np.arange(lo, hi + h / 2, h)
    vals = rho_function(model, e0)(lam)
    nfft = 1 << int(np.ceil(np.log2(max(lam.size, 8 * t_max / (2 * np.pi) * (hi - lo) + 1))))
    nfft = max(nfft, lam.size)
    dt = 2 * np.pi / (nfft * h)
    m = int(np.floor(t_max / dt)) + 1
    spec = np.fft.fft(vals, nfft)[:m]
    times = dt * np.arange(m)
    return times, h * np.exp(-1j * lo * times) * spec


# ----------------------------------------------------------------------
@dataclass
class DecayFit:
    """``|A(t)| ≈ c exp(-gamma t / 2)`` on ``window``."""

    c: float
    gamma: float
    window: tuple[float, float]
    rms_log_residual: float
    points: int
    converged: bool = True

    def as_dict(self) -> dict:
        return {"c": self.c, "gamma": self.gamma, "window": list(self.window),
                "rms_log_residual": self.rms_log_residual, "points": self.points,
                "converged": self.converged}


def decay_fit(times, amplitudes, window=(5.0, 60.0), *, floor: float = 1e-12) -> DecayFit:
    """Linear least squares of ``log|A|`` against ``t``; ``gamma = -2 · slope``.

    Examples
    --------
    >>> t = np.linspace(0, 80, 81)
    >>> round(decay_fit(t, np.exp(-0.05 * t)).gamma, 12)
    0.1
    """
    t = np.asarray(times, dtype=float)
    a = np.abs(np.asarray(amplitudes))
    sel = (t >= window[0]) & (t <= window[1])
    if np.any(a[sel] <= floor):
        raise DecayFitError("amplitude underflow in window")
    if sel.sum() < 4:
        raise DecayFitError("fewer than 4 usable points in the fit window")
    ts, ys = t[sel], np.log(a[sel])
    slope, icpt = np.polyfit(ts, ys, 1)
    rms = float(np.sqrt(np.mean((ys - (slope * ts + icpt)) ** 2)))
    gamma = -2.0 * float(slope)
    return DecayFit(float(np.exp(icpt)), gamma, (float(window[0]), float(window[1])), rms,
                    int(sel.sum()), bool(gamma > 0))
