"""Resonance search: zeros of ``det L₊`` (continued branch) in the lower half-plane.

The search is certified by the argument principle.  A rectangle is split
into quarters until every cell with non-zero winding number is small and
holds a single zero, which Newton's method then polishes using Jacobi's
formula ``(det L)'/det L = tr(L⁻¹ L')``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .livsic import evaluator
from .model import ModelSpec
from .quad import ContourError, Rectangle, winding_number

__all__ = [
    "Resonance",
    "ResonanceList",
    "ConvergenceError",
    "NotResonantError",
    "SearchError",
    "locate_resonances",
    "refine_newton",
    "newton_det",
    "kernel",
    "worker_count",
]

DEDUP_RADIUS = 1e-9
JITTER = 1e-6
MAX_JITTERS = 5
CELL_DIAMETER = 0.1


class ConvergenceError(RuntimeError):
    """Newton iteration failed to converge."""


class NotResonantError(ValueError):
    """``L₊(ζ)`` has no numerical kernel at the given tolerance."""


class SearchError(RuntimeError):
    """The search rectangle could not be certified."""


@dataclass
class Resonance:
    """A located zero of ``det L₊`` with its kernel data.

    Attributes
    ----------
    zeta : complex
    det_order : int
        Winding number of the final isolating cell.
    kernel_basis : ndarray, shape (n, q)
        Orthonormal columns spanning ``ker L₊(zeta)``.
    q : int
        Geometric multiplicity.
    residual : float
        Worst ``‖L₊(zeta) e‖`` over the basis columns.
    """

    zeta: complex
    det_order: int
    kernel_basis: np.ndarray
    q: int
    residual: float
    cell: tuple[float, float, float, float] | None = None

    def as_dict(self) -> dict:
        kb = self.kernel_basis
        return {
            "zeta": [self.zeta.real, self.zeta.imag],
            "det_order": self.det_order,
            "q": self.q,
            "residual": self.residual,
            "kernel_basis": [[[complex(v).real, complex(v).imag] for v in kb[:, j]]
                             for j in range(kb.shape[1])],
        }


class ResonanceList(list):
    """List of resonances carrying search bookkeeping."""

    def __init__(self, items=(), *, rect=None, winding=0, exhausted=(), jitters=0):
        super().__init__(items)
        self.rect = rect
        self.winding = winding
        self.exhausted = list(exhausted)
        self.jitters = jitters

    @property
    def complete(self) -> bool:
        return not self.exhausted


def worker_count(requested: int | None = None) -> int:
    """Thread count, capped by ``RESONANCE_KIT_THREADS`` when set."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("RESONANCE_KIT_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


# ----------------------------------------------------------------------
def newton_det(mat: Callable, dmat: Callable, z0: complex, *, tol: float = 1e-12,
               max_iter: int = 50, multiplicity: int = 1,
               inside: Callable[[complex], bool] | None = None,
               full_output: bool = False):
    """Newton iteration on ``det mat(z)`` via ``z <- z - m / tr(mat⁻¹ mat')``.

    A singular matrix mid-iteration halves the step and retries.
    """
    z = complex(z0)
    if inside is not None and not inside(z):
        raise ConvergenceError(f"seed {z0} lies outside the continuation region")
    for it in range(1, max_iter + 1):
        l = np.atleast_2d(mat(z))
        if not np.all(np.isfinite(l)):
            raise ConvergenceError(f"non-finite matrix at {z}")
        if np.linalg.cond(l) > 1e15:
            return (z, it - 1) if full_output else z
        tr = complex(np.trace(np.linalg.solve(l, np.atleast_2d(dmat(z)))))
        if tr == 0 or not np.isfinite(tr):
            raise ConvergenceError(f"vanishing logarithmic derivative at {z}")
        step = multiplicity / tr
        znew = z - step
        # halve the step while the iterate leaves the region
        for _ in range(30):
            if inside is None or inside(znew):
                break
            step *= 0.5
            znew = z - step
        else:
            raise ConvergenceError(f"iterate left the continuation region near {z}")
        dz = abs(znew - z)
        z = znew
        if dz < tol * max(1.0, abs(z)):
            return (z, it) if full_output else z
    raise ConvergenceError(f"no convergence in {max_iter} iterations from {z0}")


def refine_newton(model: ModelSpec, z0: complex, tol: float = 1e-12, *,
                  max_iter: int = 50, multiplicity: int = 1, full_output: bool = False):
    """Polish a zero of ``det L₊`` (continued branch) from the seed ``z0``.

    Iterates are confined to the model region; leaving it counts as failure.
    """
    ev = evaluator(model)
    region = model.region
    return newton_det(lambda z: ev.plus(z), lambda z: ev.plus_derivative(z), z0, tol=tol,
                      max_iter=max_iter, multiplicity=multiplicity,
                      inside=lambda z: region.contains(z), full_output=full_output)


def kernel(model: ModelSpec, zeta: complex, rel_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``ker L₊(zeta)`` from the SVD.

    Singular values below ``rel_tol * scale`` count as zero, where
    ``scale = max(σ_max(L₊), ‖zeta - Λ₀‖₂)``.  The second term keeps the
    test meaningful for ``n = 1`` where ``σ_max`` itself vanishes at a zero.
    """
    zeta = complex(zeta)
    l = evaluator(model).plus(zeta)
    _, s, vh = np.linalg.svd(l)
    scale = max(float(s[0]), float(np.linalg.norm(zeta * np.eye(model.n) - model.lambda0, 2)))
    null = s < rel_tol * scale
    if not null.any():
        raise NotResonantError("not a resonance at given tolerance")
    return np.conj(vh[null]).T


def _winding(ev, rect: Rectangle) -> int:
    return winding_number(lambda z: ev.det_plus(z), rect, dlog=lambda z: ev.dlog_det_plus(z))


def _jitter_offsets():
    # deterministic sequence of small outward/inward shifts
    return [JITTER * k * s for k in range(1, MAX_JITTERS + 1) for s in (1, -1)][:MAX_JITTERS]


def _certified(ev, rect: Rectangle):
    """Winding of ``rect``, jittering its edges when a zero sits on the boundary."""
    try:
        return rect, _winding(ev, rect), 0
    except ContourError:
        pass
    for k, d in enumerate(_jitter_offsets(), start=1):
        r = Rectangle(rect.re_min - d, rect.re_max + d, rect.im_min - d,
                      min(rect.im_max + d, -JITTER) if rect.im_max < 0 else rect.im_max + d)
        try:
            return r, _winding(ev, r), k
        except ContourError:
            continue
    raise SearchError(f"boundary zero persists after {MAX_JITTERS} jitters on {rect.as_tuple()}")


def _children(ev, rect: Rectangle, parent_w: int):
    """Quadrisect with jittered split points until the windings add up."""
    fracs = [(0.5, 0.5)] + [(0.5 + JITTER * k, 0.5 - 1.3 * JITTER * k) for k in range(1, MAX_JITTERS + 1)]
    for fx, fy in fracs:
        kids = rect.split(fx, fy)
        try:
            ws = [_winding(ev, c) for c in kids]
        except ContourError:
            continue
        if sum(ws) == parent_w:
            return list(zip(kids, ws))
    raise SearchError(f"could not split {rect.as_tuple()} consistently")


def _polish(model, ev, rect: Rectangle, w: int, tol: float):
    """Try to isolate and polish the zero(s) of a small cell; ``None`` if not yet possible."""
    inside = lambda z: rect.contains(z, pad=1e-6 * max(rect.diameter, 1e-6))
    try:
        z = newton_det(lambda z: ev.plus(z), lambda z: ev.plus_derivative(z), rect.center,
                       tol=tol, multiplicity=w, inside=lambda z: model.region.contains(z))
    except ConvergenceError:
        return None
    if not inside(z):
        return None
    if w > 1:
        box = Rectangle(z.real - 1e-6, z.real + 1e-6, z.imag - 1e-6, z.imag + 1e-6)
        try:
            if _winding(ev, box) != w:
                return None
        except ContourError:
            return None
    return z


def locate_resonances(model: ModelSpec, rect=None, max_depth: int = 14, *,
                      tol: float = 1e-12, kernel_rel_tol: float = 1e-8,
                      workers: int | None = None) -> ResonanceList:
    """All zeros of ``det L₊`` inside ``rect`` (a lower-half-plane rectangle).

    Parameters
    ----------
    rect : Rectangle or 4-tuple, optional
        Defaults to the lower half of the model region, kept ``1e-4`` off
        the real axis.
    max_depth : int
        Quadrisection depth limit; cells still unresolved are listed in
        ``result.exhausted`` with their winding number.

    Returns
    -------
    ResonanceList
        Sorted by real then imaginary part.
    """
    if rect is None:
        rect = Rectangle(*model.region.lower_half())
    elif not isinstance(rect, Rectangle):
        rect = Rectangle.from_tuple(rect)
    if rect.im_max >= 0:
        raise ValueError("search rectangle must lie in the open lower half-plane")
    reg = model.region
    if not (reg.re_min <= rect.re_min and rect.re_max <= reg.re_max and reg.im_min <= rect.im_min):
        raise ValueError("search rectangle must lie inside the continuation region")
    ev = evaluator(model)
    rect, total, jitters = _certified(ev, rect)
    found: list[tuple[complex, int, Rectangle]] = []
    exhausted: list[tuple[Rectangle, int]] = []
    level = [(rect, total, 0)] if total > 0 else []
    nworkers = worker_count(workers)
    pool = ThreadPoolExecutor(nworkers) if nworkers > 1 else None
    try:
        while level:
            nxt = []
            pending = []
            for cell, w, depth in level:
                if w <= 0:
                    continue
                # multiple zeros are confirmed by a tight winding box in _polish
                if cell.diameter < CELL_DIAMETER:
                    z = _polish(model, ev, cell, w, tol)
                    if z is not None:
                        found.append((z, w, cell))
                        continue
                if depth >= max_depth:
                    exhausted.append((cell, w))
                    continue
                pending.append((cell, w, depth))
            mapper = pool.map if pool else map
            results = list(mapper(lambda item: _children(ev, item[0], item[1]), pending))
            for (cell, w, depth), kids in zip(pending, results):
                nxt.extend((c, cw, depth + 1) for c, cw in kids if cw > 0)
            level = nxt
    finally:
        if pool:
            pool.shutdown()
    out = []
    for z, w, cell in sorted(found, key=lambda t: (t[0].real, t[0].imag)):
        if any(abs(z - r.zeta) < DEDUP_RADIUS for r in out):
            continue
        basis = kernel(model, z, kernel_rel_tol)
        res = np.linalg.norm(ev.plus(z) @ basis, axis=0)
        out.append(Resonance(z, w, basis, basis.shape[1], float(res.max()), cell.as_tuple()))
    exhausted.sort(key=lambda t: (t[0].center.real, t[0].center.imag))
    return ResonanceList(out, rect=rect, winding=total, exhausted=exhausted, jitters=jitters)
