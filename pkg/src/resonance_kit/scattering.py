"""Scattering matrices, spectral density, pole residues and Breit-Wigner fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .livsic import evaluator
from .model import ModelSpec
from .quad import Circle, contour_integral

__all__ = [
    "SpectralDensity",
    "BWFit",
    "FitError",
    "s_matrix_K",
    "s_matrix_E",
    "residue_SE",
    "Prop4Result",
    "prop4_check",
    "principal_angle",
    "breit_wigner",
    "breit_wigner_fit",
    "unitarity_defect",
    "intertwining_defect",
    "density_jump_defect",
]


class FitError(RuntimeError):
    """Line-shape fit failed (degenerate data or no convergence)."""


def _real(lam) -> np.ndarray:
    lam = np.asarray(lam)
    if np.iscomplexobj(lam):
        if np.any(lam.imag != 0):
            raise ValueError("boundary quantities need real λ")
        lam = lam.real
    return lam.astype(float)


def _h(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def s_matrix_K(model: ModelSpec, lam) -> np.ndarray:
    """``S_K(λ) = 1 - 2πi M(λ) L₊(λ)⁻¹ M(λ)^*`` (channel representation)."""
    lam = _real(lam)
    ev = evaluator(model)
    m = model.M(lam).real
    lp = ev.plus(lam)
    cond = np.linalg.cond(lp)
    if np.any(cond > 1e14):
        raise np.linalg.LinAlgError("L₊ numerically singular on the axis")
    x = np.linalg.solve(lp, np.swapaxes(m, -1, -2).astype(complex))
    return np.eye(model.n) - 2j * np.pi * (m @ x)


def s_matrix_E(model: ModelSpec, z, branch_note: str = "auto") -> np.ndarray:
    """``S_E(z) = L₊(z)⁻¹ L₋(z)``.

    On the axis both factors are boundary values.  Off the axis ``L₊`` is
    the continued plus branch and ``L₋`` the defining integral in ℂ₋ (for
    ``z`` in the lower half-plane); both come from the entire representation,
    so the product is meromorphic with poles at the resonances.
    """
    ev = evaluator(model)
    z = np.asarray(z, dtype=complex)
    if branch_note == "boundary" and np.any(z.imag != 0):
        raise ValueError("boundary branch needs real points")
    return np.linalg.solve(ev.plus(z), ev.minus(z))


class SpectralDensity:
    """``D(λ) = L₊(λ)⁻¹ M(λ)^* M(λ) L₋(λ)⁻¹`` with a small evaluation cache."""

    def __init__(self, model: ModelSpec):
        self.model = model
        self._ev = evaluator(model)
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, lam) -> np.ndarray:
        lam = _real(lam)
        if lam.ndim == 0:
            key = float(lam)
            got = self._cache.get(key)
            if got is None:
                got = self._ev.density(lam)
                if len(self._cache) > 4096:
                    self._cache.clear()
                self._cache[key] = got
            return got
        return self._ev.density(lam)

    def rho(self, lam, e0) -> np.ndarray:
        """``(e₀, D(λ) e₀)``, real and non-negative."""
        e0 = np.asarray(e0, dtype=complex)
        d = self(lam)
        return np.real(np.einsum("i,...ij,j->...", np.conj(e0), d, e0))


def unitarity_defect(model: ModelSpec, lam) -> np.ndarray:
    s = s_matrix_K(model, lam)
    return np.linalg.norm(s @ _h(s) - np.eye(model.n), 2, axis=(-2, -1))


def intertwining_defect(model: ModelSpec, lam) -> np.ndarray:
    """``‖M S_E - S_K M‖₂`` on the axis."""
    lam = _real(lam)
    m = model.M(lam)
    r = m @ s_matrix_E(model, lam) - s_matrix_K(model, lam) @ m
    return np.linalg.norm(r, 2, axis=(-2, -1))


def density_jump_defect(model: ModelSpec, lam) -> np.ndarray:
    """Entry-wise ``max |(L₋⁻¹ - L₊⁻¹)/2πi - D|`` on the axis."""
    lam = _real(lam)
    ev = evaluator(model)
    lp, lm = ev.plus(lam), ev.minus(lam)
    lhs = (np.linalg.inv(lm) - np.linalg.inv(lp)) / (2j * np.pi)
    d = ev.density(lam)
    return np.abs(lhs - d).reshape(lam.shape + (-1,)).max(axis=-1)


# ----------------------------------------------------------------------
def residue_SE(model: ModelSpec, res, radius: float | None = None, nodes: int = 64) -> np.ndarray:
    """``(1/2πi) ∮ S_E(z) dz`` on a circle around a resonance.

    ``res`` is a :class:`~resonance_kit.resonance.Resonance` or a bare point.
    The radius defaults to half the distance to the real axis; a circle
    reaching the axis is rejected.
    """
    zeta = complex(getattr(res, "zeta", res))
    if radius is None:
        radius = 0.5 * abs(zeta.imag)
    if radius >= abs(zeta.imag):
        raise ValueError("residue circle touches the real axis")
    ev = evaluator(model)
    # reject circles passing near a zero of det L₊
    theta = np.linspace(0, 2 * np.pi, 4 * nodes, endpoint=False)
    ring = zeta + radius * np.exp(1j * theta)
    scale = float(np.abs(ev.det_plus(zeta + 2 * radius)))
    if np.min(np.abs(ev.det_plus(ring))) < 1e-10 * max(scale, 1e-300):
        raise ValueError("residue circle passes through another resonance")
    r = contour_integral(lambda z: s_matrix_E(model, z), Circle(zeta, radius), nodes, residue=True)
    return np.asarray(r.value)


def principal_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle between the column spans of ``a`` and ``b``."""
    return float(np.max(subspace_angles(np.atleast_2d(a), np.atleast_2d(b))))


@dataclass
class Prop4Result:
    principal_angle: float
    passed: bool
    rank: int
    q: int
    rank_matches: bool
    residue_norm: float

    def as_dict(self) -> dict:
        return {"principal_angle": self.principal_angle, "pass": self.passed,
                "rank": self.rank, "q": self.q, "rank_matches": self.rank_matches,
                "residue_norm": self.residue_norm}


def prop4_check(model: ModelSpec, res, *, basis: np.ndarray | None = None,
                threshold: float = 1e-6, rank_tol: float = 1e-8,
                radius: float | None = None, nodes: int = 64) -> Prop4Result:
    """Compare ``ima Res S_E`` at a simple pole with ``ker L₊``.

    ``basis`` overrides the kernel basis stored on ``res`` (used by the
    negative control).
    """
    r = residue_SE(model, res, radius, nodes)
    u, s, _ = np.linalg.svd(r)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    kb = res.kernel_basis if basis is None else np.asarray(basis)
    kb = kb.reshape(model.n, -1)
    if rank == 0:
        return Prop4Result(np.pi / 2, False, 0, kb.shape[1], False, float(s[0]))
    angle = principal_angle(u[:, :rank], kb)
    matches = rank == kb.shape[1]
    return Prop4Result(angle, bool(angle < threshold and matches), rank, kb.shape[1],
                       matches, float(s[0]))


# ----------------------------------------------------------------------
@dataclass
class BWFit:
    c: float
    lambda0_fit: float
    gamma_fit: float
    rms_residual: float
    converged: bool
    iterations: int = 0

    def as_dict(self) -> dict:
        return {"c": self.c, "lambda0_fit": self.lambda0_fit, "gamma_fit": self.gamma_fit,
                "rms_residual": self.rms_residual, "converged": self.converged,
                "iterations": self.iterations}


def breit_wigner(lam, c: float, lambda0: float, gamma: float):
    """Lorentzian ``c / ((λ-λ₀)² + (Γ/2)²)``."""
    lam = np.asarray(lam, dtype=float)
    return c / ((lam - lambda0) ** 2 + 0.25 * gamma * gamma)


def _fwhm(lam: np.ndarray, y: np.ndarray, k: int) -> float:
    half = 0.5 * y[k]
    i = k
    while i > 0 and y[i] > half:
        i -= 1
    j = k
    while j < y.size - 1 and y[j] > half:
        j += 1
    # linear interpolation of both half-maximum crossings
    left = lam[i] if y[i] > half or i == k else lam[i] + (half - y[i]) * (lam[i + 1] - lam[i]) / (y[i + 1] - y[i])
    right = lam[j] if y[j] > half or j == k else lam[j - 1] + (half - y[j - 1]) * (lam[j] - lam[j - 1]) / (y[j] - y[j - 1])
    return float(right - left)


def breit_wigner_fit(samples=None, y=None, *, max_iter: int = 200, step_tol: float = 1e-10):
    """Damped Gauss-Newton (Levenberg-Marquardt) fit of a Breit-Wigner bump.

    Accepts either ``breit_wigner_fit([(λ, y), ...])`` or
    ``breit_wigner_fit(λ_array, y_array)``.  The damping is multiplied by
    10 after a rejected step and divided by 10 after an accepted one.

    Examples
    --------
    >>> lam = np.linspace(0.5, 1.5, 50)
    >>> fit = breit_wigner_fit(lam, breit_wigner(lam, 2.0, 1.0, 0.1))
    >>> round(fit.gamma_fit, 8)
    0.1
    """
    if y is None:
        arr = np.asarray(samples, dtype=float)
        lam, yy = arr[:, 0], arr[:, 1]
    else:
        lam, yy = np.asarray(samples, dtype=float), np.asarray(y, dtype=float)
    order = np.argsort(lam)
    lam, yy = lam[order], yy[order]
    if lam.size < 8:
        raise FitError("need at least 8 samples")
    if np.any(yy < 0):
        raise FitError("samples must be non-negative")
    spread = yy.max() - yy.min()
    if not spread > 1e-12 * max(abs(yy.max()), 1e-300):
        raise FitError("degenerate data: no bump to fit")
    k = int(np.argmax(yy))
    gamma = _fwhm(lam, yy, k)
    if not gamma > 0:
        gamma = (lam[-1] - lam[0]) / 4
    p = np.array([yy[k] * (gamma / 2) ** 2, lam[k], gamma])
    # centre and width both live on the width scale (a centre guess of 0 is common)
    scale = np.array([abs(p[0]) + 1e-300, gamma, gamma])

    def resid(p):
        return breit_wigner(lam, *p) - yy

    def jac(p):
        c, l0, g = p
        den = (lam - l0) ** 2 + 0.25 * g * g
        return np.stack([1 / den, 2 * c * (lam - l0) / den ** 2, -0.5 * c * g / den ** 2], axis=1)

    mu = 1e-3
    r = resid(p)
    cost = float(r @ r)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        j = jac(p) * scale
        a = j.T @ j
        gvec = j.T @ r
        accepted = False
        for _ in range(40):
            step = -np.linalg.solve(a + mu * np.diag(np.diag(a)), gvec) * scale
            pn = p + step
            rn = resid(pn)
            cn = float(rn @ rn)
            if np.isfinite(cn) and cn <= cost:
                accepted = True
                break
            mu *= 10
        if not accepted:
            break
        small = np.all(np.abs(step) <= step_tol * (np.abs(pn) + step_tol))
        p, r, cost = pn, rn, cn
        mu = max(mu / 10, 1e-15)
        if small:
            converged = True
            break
    c, l0, g = p
    rms = float(np.sqrt(cost / lam.size))
    if not converged:
        raise FitError(f"no convergence after {it} iterations (rms {rms:.3g})")
    return BWFit(float(c), float(l0), float(abs(g)), rms, bool(abs(g) > 0), it)
