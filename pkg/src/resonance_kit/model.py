"""Friedrichs model description: level matrix, analytic form factor, region.

A model couples an ``n``-level space to ``n`` continuum channels through a
form factor ``M(z)`` whose entries are sums of real polynomial times
Gaussian terms.  The kernel ``B(z) = M(z)^T M(z)`` is then entire, and on the
real axis it coincides with ``M(λ)^* M(λ)``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "ModelError",
    "FormFactorTerm",
    "Region",
    "ModelSpec",
    "parse_model",
    "model_from_dict",
    "load_model",
    "bundled_model",
    "BUNDLED",
    "eval_M",
    "eval_B",
]

MAX_DIM = 16
BUNDLED = ("scalar", "two_channel", "zero_coupling", "unit_coupling", "coupled")

_TOP_KEYS = {"n", "lambda0", "formfactor", "region"}
_FF_KEYS = {"terms"}
_TERM_KEYS = {"row", "col", "coeffs", "width", "center"}
_REGION_KEYS = {"re_min", "re_max", "im_min", "im_max"}


class ModelError(ValueError):
    """Raised when a model description violates an invariant."""


@dataclass(frozen=True)
class FormFactorTerm:
    """One additive contribution ``p(z - c) exp(-a (z - c)^2 / 2)`` to ``M[row, col]``."""

    row: int
    col: int
    coeffs: tuple[float, ...]
    width: float
    center: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise ModelError("width must be positive")
        if len(self.coeffs) == 0:
            raise ModelError("coeffs must be non-empty")
        if not all(np.isfinite(self.coeffs)) or not np.isfinite(self.center):
            raise ModelError("term parameters must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def values(self, z, order: int = 0):
        """Return the term and its first ``order`` derivatives at ``z``."""
        u = np.asarray(z, dtype=complex) - self.center
        a = self.width
        c = np.asarray(self.coeffs, dtype=float)
        gauss = np.exp(-0.5 * a * u * u)
        p = P.polyval(u, c)
        out = [p * gauss]
        if order >= 1:
            dp = P.polyval(u, P.polyder(c)) if len(c) > 1 else 0.0
            out.append((dp - a * u * p) * gauss)
        if order >= 2:
            d2p = P.polyval(u, P.polyder(c, 2)) if len(c) > 2 else 0.0
            out.append((d2p - 2 * a * u * dp - a * p + a * a * u * u * p) * gauss)
        return out

    def envelope(self, r: float) -> float:
        """Upper bound of ``|term(λ)|`` for real ``|λ - center| >= r`` (``r`` past the peak)."""
        c = np.abs(np.asarray(self.coeffs, dtype=float))
        return float(P.polyval(r, c) * np.exp(-0.5 * self.width * r * r))


@dataclass(frozen=True)
class Region:
    """Axis-parallel rectangle; the continuation region must be conjugation symmetric."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ModelError("region must have re_min < re_max and im_min < im_max")

    def contains(self, z, pad: float = 0.0) -> bool:
        z = complex(z)
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def lower_half(self, gap: float = 1e-4) -> tuple[float, float, float, float]:
        return (self.re_min, self.re_max, self.im_min, -gap)

    def as_dict(self) -> dict:
        return {"re_min": self.re_min, "re_max": self.re_max,
                "im_min": self.im_min, "im_max": self.im_max}


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Immutable Friedrichs model.

    Attributes
    ----------
    n : int
        Number of levels, equal to the number of channels.
    lambda0 : ndarray, shape (n, n)
        Real symmetric level matrix, stored read-only.
    terms : tuple of FormFactorTerm
    region : Region
        Continuation region, symmetric under conjugation.
    """

    n: int
    lambda0: np.ndarray
    terms: tuple[FormFactorTerm, ...]
    region: Region
    name: str = field(default="model", compare=False)

    def __post_init__(self):
        lam = np.array(self.lambda0, dtype=float)
        if lam.ndim != 2 or lam.shape != (self.n, self.n):
            raise ModelError("dimension mismatch")
        if self.n < 1 or self.n > MAX_DIM:
            raise ModelError(f"n must lie in 1..{MAX_DIM}")
        if not np.all(np.isfinite(lam)):
            raise ModelError("lambda0 must be finite")
        if not np.array_equal(lam, lam.T):
            raise ModelError("lambda0 must be symmetric")
        lam.setflags(write=False)
        object.__setattr__(self, "lambda0", lam)
        for t in self.terms:
            if not (0 <= t.row < self.n and 0 <= t.col < self.n):
                raise ModelError("dimension mismatch")
        r = self.region
        if r.im_min != -r.im_max:
            raise ModelError("region must be symmetric under conjugation")
        ev = self.eigenvalues
        if ev.min() <= r.re_min or ev.max() >= r.re_max:
            raise ModelError("region does not contain the spectrum of lambda0")

    # ------------------------------------------------------------------
    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.lambda0)

    @property
    def coupled(self) -> bool:
        return any(np.any(np.asarray(t.coeffs) != 0) for t in self.terms)

    def M(self, z, order: int = 0):
        """Form factor and derivatives; trailing axes are ``(n, n)``."""
        z = np.asarray(z, dtype=complex)
        outs = [np.zeros(z.shape + (self.n, self.n), dtype=complex) for _ in range(order + 1)]
        for t in self.terms:
            for k, v in enumerate(t.values(z, order)):
                outs[k][..., t.row, t.col] += v
        return outs if order else outs[0]

    def B(self, z, order: int = 0):
        """``B = M^T M`` and derivatives (plain transpose, so ``B`` is entire)."""
        if order == 0:
            m = self.M(z)
            return np.swapaxes(m, -1, -2) @ m
        ms = self.M(z, order)
        mt = [np.swapaxes(x, -1, -2) for x in ms]
        out = [mt[0] @ ms[0], mt[1] @ ms[0] + mt[0] @ ms[1]]
        if order >= 2:
            out.append(mt[2] @ ms[0] + 2 * (mt[1] @ ms[1]) + mt[0] @ ms[2])
        return out

    def length_scale(self) -> float:
        """Largest Gaussian length ``1/sqrt(a)`` among the terms (1 when uncoupled)."""
        if not self.terms:
            return 1.0
        return max(1.0 / np.sqrt(t.width) for t in self.terms)

    def node_spacing(self) -> float:
        """Panel length resolving the narrowest Gaussian factor."""
        if not self.terms:
            return 0.5
        a = max(t.width for t in self.terms)
        return 0.5 / np.sqrt(max(a, 1.0))

    def window(self, rel: float = 1e-10) -> tuple[float, float]:
        """Real interval outside which every entry of ``M`` is below ``rel * scale``.

        ``B`` is then below ``(n * rel * scale)**2`` there, which is far under
        double precision for the default.
        """
        if not self.terms:
            ev = self.eigenvalues
            return float(ev.min() - 1.0), float(ev.max() + 1.0)
        scale = max(max(abs(c) for c in t.coeffs) for t in self.terms) or 1.0
        floor = rel * scale / len(self.terms)
        lo, hi = np.inf, -np.inf
        for t in self.terms:
            r = np.sqrt(max(t.degree, 1) / t.width)
            while t.envelope(r) > floor:
                r += 0.25
            lo = min(lo, t.center - r)
            hi = max(hi, t.center + r)
        return float(lo), float(hi)

    def tail_bound(self, rel: float = 1e-10) -> float:
        """Bound for the mass of ``|B|`` outside :meth:`window` (Gaussian tail estimate)."""
        if not self.terms:
            return 0.0
        scale = max(max(abs(c) for c in t.coeffs) for t in self.terms) or 1.0
        floor = self.n * rel * scale
        a = min(t.width for t in self.terms)
        return float(floor ** 2 * 2.0 / np.sqrt(a))

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda0": self.lambda0.tolist(),
            "formfactor": {"terms": [
                {"row": t.row, "col": t.col, "coeffs": list(t.coeffs),
                 "width": t.width, "center": t.center} for t in self.terms]},
            "region": self.region.as_dict(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def __repr__(self):
        return f"ModelSpec(name={self.name!r}, n={self.n}, terms={len(self.terms)})"


# ----------------------------------------------------------------------
def _reject_unknown(obj: dict, allowed: set, where: str):
    if not isinstance(obj, dict):
        raise ModelError(f"{where} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ModelError(f"unknown keys in {where}: {sorted(extra)}")


def _default_region(lam: np.ndarray) -> Region:
    ev = np.linalg.eigvalsh(lam)
    return Region(float(ev.min() - 3.0), float(ev.max() + 3.0), -2.0, 2.0)


def model_from_dict(cfg: dict, name: str = "model") -> ModelSpec:
    """Build a :class:`ModelSpec` from an already decoded config mapping."""
    _reject_unknown(cfg, _TOP_KEYS, "config")
    for key in ("n", "lambda0", "formfactor"):
        if key not in cfg:
            raise ModelError(f"missing key {key!r}")
    n = cfg["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ModelError("n must be an integer")
    try:
        lam = np.array(cfg["lambda0"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"lambda0 is not a numeric matrix: {exc}") from None
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise ModelError("lambda0 must be square")
    if lam.shape != (n, n):
        raise ModelError("dimension mismatch")
    if not np.all(np.isfinite(lam)):
        raise ModelError("lambda0 must be finite")
    ff = cfg["formfactor"]
    _reject_unknown(ff, _FF_KEYS, "formfactor")
    terms = []
    for k, t in enumerate(ff.get("terms", [])):
        _reject_unknown(t, _TERM_KEYS, f"term {k}")
        missing = _TERM_KEYS - {"center"} - set(t)
        if missing:
            raise ModelError(f"term {k} lacks {sorted(missing)}")
        coeffs = t["coeffs"]
        if not isinstance(coeffs, list) or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs):
            raise ModelError(f"term {k}: coeffs must be a list of real numbers")
        terms.append(FormFactorTerm(int(t["row"]), int(t["col"]),
                                    tuple(float(c) for c in coeffs),
                                    float(t["width"]), float(t.get("center", 0.0))))
    if "region" in cfg:
        r = cfg["region"]
        _reject_unknown(r, _REGION_KEYS, "region")
        try:
            region = Region(*(float(r[k]) for k in ("re_min", "re_max", "im_min", "im_max")))
        except KeyError as exc:
            raise ModelError(f"region lacks {exc}") from None
    else:
        region = _default_region(lam)
    return ModelSpec(n, lam, tuple(terms), region, name=name)


def parse_model(config_text: str, name: str = "model") -> ModelSpec:
    """Parse a JSON model description and validate every invariant.

    Examples
    --------
    >>> m = parse_model('{"n": 1, "lambda0": [[1.0]], '
    ...                 '"formfactor": {"terms": [{"row": 0, "col": 0, '
    ...                 '"coeffs": [1.0], "width": 1.0, "center": 0.0}]}}')
    >>> float(eval_B(m, 0.0)[0, 0].real)
    1.0
    """
    try:
        cfg = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed config: {exc}") from None
    return model_from_dict(cfg, name=name)


def load_model(path: str | Path) -> ModelSpec:
    path = Path(path)
    return parse_model(path.read_text(), name=path.stem)


def bundled_model(name: str) -> ModelSpec:
    """Load one of the reference models shipped in ``resonance_kit/data``."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled model {name!r}; choose from {BUNDLED}")
    text = resources.files("resonance_kit").joinpath("data").joinpath(f"{name}.json").read_text()
    return parse_model(text, name=name)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("resonance_kit").joinpath("data").joinpath(f"{name}.json")))


def scalar_gaussian(g: float = 1.0, lambda0: float = 1.0, width: float = 1.0,
                    region: Iterable[float] | None = None) -> ModelSpec:
    """Single level coupled through ``g exp(-width λ²/2)``."""
    cfg: dict[str, Any] = {
        "n": 1, "lambda0": [[lambda0]],
        "formfactor": {"terms": [{"row": 0, "col": 0, "coeffs": [g],
                                  "width": width, "center": 0.0}]},
    }
    if region is not None:
        cfg["region"] = dict(zip(("re_min", "re_max", "im_min", "im_max"), region))
    return model_from_dict(cfg, name=f"scalar_g{g}")


# spec-level wrappers ---------------------------------------------------
def eval_M(model: ModelSpec, z) -> np.ndarray:
    """Form factor at ``z``; real on the real axis."""
    return model.M(z)


def eval_B(model: ModelSpec, z) -> np.ndarray:
    """Entire continuation ``M(z)^T M(z)`` of ``M(λ)^* M(λ)``."""
    return model.B(z)
