"""Named verification checks and the run report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .gamov import (bundled_s0, bundled_test_elements, dirac_pairing, eigen_defect,
                    resolvent_pairing_check, gamov_vector, paley_wiener_check, psi_route_pairing,
                    random_rational)
from .livsic import default_scan, plemelj_jump
from .model import ModelSpec
from .resonance import ResonanceList, locate_resonances
from .scattering import intertwining_defect, prop4_check, unitarity_defect
from .semigroup import HardyGrid, decay_fit, eigen_sweep, survival_amplitude

__all__ = ["Check", "RunReport", "DEFAULT_TOLERANCES", "run_verification", "jsonable",
           "narrowest"]

SCHEMA = "resonance-kit/report/v1"

DEFAULT_TOLERANCES: dict[str, float] = {
    "plemelj": 1e-8,
    "unitarity": 1e-8,
    "intertwining": 1e-10,
    "prop4": 1e-6,
    "resolvent_pairing": 1e-8,
    "eigen_defect": 1e-8,
    "dirac": 1e-6,
    "paley_wiener": 1e-8,
    "semigroup": 1e-3,
    "a0": 1e-6,
    "amplitude_bound": 1e-8,
    "decay_rate": 0.15,
    "kernel_rel": 1e-8,
    "newton": 1e-12,
}


def jsonable(x: Any):
    """Convert numpy / complex values to JSON-friendly structures."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class Check:
    """``pass`` iff ``|lhs - rhs| <= tolerance`` (or the explicit ``passed``)."""

    name: str
    lhs: Any
    rhs: Any
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    @classmethod
    def bound(cls, name: str, value: float, tolerance: float, **detail) -> "Check":
        """Check of the form ``value < tolerance`` (rhs is the target 0)."""
        value = float(value)
        return cls(name, value, 0.0, tolerance, bool(np.isfinite(value) and value < tolerance),
                   detail)

    @classmethod
    def above(cls, name: str, value: float, threshold: float, **detail) -> "Check":
        """Negative-control style check ``value > threshold``."""
        value = float(value)
        return cls(name, value, threshold, threshold, bool(value > threshold), detail)

    def as_dict(self) -> dict:
        return jsonable({"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                         "tolerance": self.tolerance, "pass": self.passed,
                         "detail": self.detail})


@dataclass
class RunReport:
    command: str
    model: ModelSpec | None
    results: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def body(self) -> dict:
        model = None
        if self.model is not None:
            model = {"name": self.model.name, "digest": self.model.digest(),
                     "parameters": self.model.to_dict()}
        return jsonable({
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "model": model,
            "tolerances": self.tolerances,
            "results": self.results,
            "checks": [c.as_dict() for c in self.checks],
            "pass": self.passed,
            "notes": self.notes,
        })

    def as_dict(self) -> dict:
        body = self.body()
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return {**body, "checksum": hashlib.sha256(blob.encode()).hexdigest()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def narrowest(resonances):
    """Resonance closest to the real axis (``None`` for an empty list)."""
    return min(resonances, key=lambda r: abs(r.zeta.imag)) if resonances else None


# ----------------------------------------------------------------------
def run_verification(model: ModelSpec, rect=None, tolerances: dict | None = None, *,
                     resonances: ResonanceList | None = None, zeta_shift: complex = 0.0,
                     pw_samples: int = 10, seed: int = 0,
                     grid: HardyGrid | None = None) -> RunReport:
    """Run the full named-check suite on one model.

    ``zeta_shift`` perturbs the resonance used by the eigen-defect check and
    serves as a negative control: a shift of ``0.1`` must make it fail.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    rep = RunReport("verify", model, tolerances=tol)
    n = model.n

    lo, hi = default_scan(model)
    lam = np.linspace(lo, hi, 101)
    jump = plemelj_jump(model, lam).max()
    rep.add(Check.bound("plemelj_jump", jump, tol["plemelj"], grid=[lo, hi, 101]))
    rep.add(Check.bound("s_unitarity", unitarity_defect(model, lam).max(), tol["unitarity"]))
    rep.add(Check.bound("intertwining", intertwining_defect(model, lam).max(),
                        tol["intertwining"]))

    if resonances is None:
        resonances = locate_resonances(model, rect, tol=tol["newton"],
                                       kernel_rel_tol=tol["kernel_rel"])
    rep.results["resonances"] = [r.as_dict() for r in resonances]
    rep.results["search"] = {"rect": list(resonances.rect.as_tuple()) if resonances.rect else None,
                             "winding": resonances.winding, "jitters": resonances.jitters,
                             "exhausted": [[list(c.as_tuple()), w] for c, w in resonances.exhausted]}
    rep.add(Check("search_complete", len(resonances.exhausted), 0, 0, resonances.complete))
    rep.add(Check("resonances_found", len(resonances), ">=1", 1, len(resonances) >= 1))

    e0 = np.ones(n) / np.sqrt(n)
    e = (np.arange(1, n + 1) + 0.3j) / np.linalg.norm(np.arange(1, n + 1) + 0.3j)
    for z in (2j, 0.5 + 0.2j):
        out = resolvent_pairing_check(model, z, e0, e)
        rep.add(Check(f"resolvent_pairing[z={z}]", out["lhs"], out["rhs"], tol["resolvent_pairing"],
                      bool(out["rel_err"] < tol["resolvent_pairing"]), {"rel_err": out["rel_err"]}))

    elements = bundled_test_elements(n)
    rng = np.random.default_rng(seed)
    for idx, res in enumerate(resonances):
        tag = f"res{idx}"
        if res.det_order == 1:
            p4 = prop4_check(model, res, threshold=tol["prop4"])
            rep.add(Check.bound(f"prop4[{tag}]", p4.principal_angle, tol["prop4"],
                                rank=p4.rank, q=p4.q))
            if not p4.rank_matches:
                rep.add(Check("prop4_rank[" + tag + "]", p4.rank, p4.q, 0, False))
        else:
            rep.notes.append(f"{tag}: det order {res.det_order}, q={res.q}; "
                             "residue relation not asserted for non-simple poles")
        for j in range(res.q):
            gv = gamov_vector(model, res, j)
            zeta = res.zeta + zeta_shift
            worst = max(abs(eigen_defect(model, zeta, gv.e0, x)) for x in elements)
            rep.add(Check.bound(f"eigen_defect[{tag},{j}]", worst, tol["eigen_defect"],
                                zeta=zeta, shift=zeta_shift))
            for si, s in enumerate(bundled_s0(model)):
                dp = dirac_pairing(gv, s)
                pr = psi_route_pairing(model, gv, s)
                rel = abs(pr - dp) / max(abs(dp), 1e-300)
                rep.add(Check(f"dirac_vs_psi[{tag},{j},s{si}]", dp, pr, tol["dirac"],
                              bool(rel < tol["dirac"]), {"rel_err": rel}))
            worst_pw, worst_lhs, worst_rhs = 0.0, 0j, 0j
            for _ in range(pw_samples):
                out = paley_wiener_check(gv, random_rational(n, rng))
                if out["rel_err"] >= worst_pw:
                    worst_pw, worst_lhs, worst_rhs = out["rel_err"], out["lhs"], out["rhs"]
            rep.add(Check(f"paley_wiener[{tag},{j}]", worst_lhs, worst_rhs, tol["paley_wiener"],
                          bool(worst_pw < tol["paley_wiener"]),
                          {"rel_err": worst_pw, "samples": pw_samples, "seed": seed}))

    g = grid or HardyGrid(dim=n)
    sweep = eigen_sweep(g)
    rep.add(Check.bound("semigroup_eigen_defect", sweep.max(), tol["semigroup"],
                        n=g.n, beta=g.beta))

    target = narrowest(resonances)
    if target is not None:
        e_dec = target.kernel_basis[:, 0] / np.linalg.norm(target.kernel_basis[:, 0])
    else:
        e_dec = np.eye(n)[0]
    times = np.linspace(0.0, 60.0, 121)
    amp = survival_amplitude(model, e_dec, times)
    rep.results["survival"] = {"e0": e_dec, "t": times, "A": amp}
    rep.add(Check("A(0)=1", amp[0], 1.0, tol["a0"], bool(abs(amp[0] - 1) < tol["a0"])))
    rep.add(Check.bound("amplitude_bound", max(0.0, float(np.abs(amp).max()) - 1.0),
                        tol["amplitude_bound"]))
    if target is not None:
        fit = decay_fit(times, amp)
        expect = 2 * abs(target.zeta.imag)
        rel = abs(fit.gamma - expect) / expect
        rep.results["decay_fit"] = fit.as_dict()
        rep.add(Check("decay_rate", fit.gamma, expect, tol["decay_rate"],
                      bool(rel < tol["decay_rate"]), {"rel_err": rel}))
    return rep
