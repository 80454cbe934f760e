"""Command-line entry point ``resonance-kit``.

Exit codes: 0 pass, 1 usage or I/O error, 2 invalid model, 3 incomplete
resonance search, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .checks import DEFAULT_TOLERANCES, Check, RunReport, narrowest, run_verification
from .gamov import bundled_test_elements, eigen_defect, gamov_vector, GamovError
from .livsic import check_assumption2, default_scan
from .model import ModelError, ModelSpec, load_model
from .quad import QuadratureError, Rectangle
from .resonance import SearchError, locate_resonances
from .scattering import FitError, SpectralDensity, breit_wigner_fit, s_matrix_K
from .semigroup import DecayFitError, decay_fit, survival_amplitude

log = logging.getLogger("resonance_kit")

EXIT_OK, EXIT_IO, EXIT_MODEL, EXIT_SEARCH, EXIT_VERIFY = 0, 1, 2, 3, 4
COMMANDS = ("validate", "resonances", "smatrix", "gamov", "decay", "verify")


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
def _parse_rect(text: str | None) -> Rectangle | None:
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--rect expects four numbers: {exc}") from None
    if len(vals) != 4:
        raise UsageError("--rect expects re_min,re_max,im_min,im_max")
    try:
        return Rectangle(*vals)
    except ValueError as exc:
        raise UsageError(f"--rect: {exc}") from None


def _parse_tols(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VAL, got {item!r}")
        if name not in DEFAULT_TOLERANCES:
            raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
        try:
            v = float(val)
        except ValueError:
            raise UsageError(f"tolerance {name} is not a number: {val!r}") from None
        if not v > 0:
            raise UsageError(f"tolerance {name} must be positive")
        out[name] = v
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _search(model: ModelSpec, rect, tol: dict, report: RunReport):
    res = locate_resonances(model, rect, tol=tol["newton"], kernel_rel_tol=tol["kernel_rel"])
    report.results["search"] = {
        "rect": list(res.rect.as_tuple()), "winding": res.winding, "jitters": res.jitters,
        "exhausted": [[list(c.as_tuple()), w] for c, w in res.exhausted],
    }
    if res.jitters:
        report.notes.append(f"search rectangle jittered {res.jitters} time(s) to clear a boundary zero")
    return res


def _resonance_records(model: ModelSpec, res) -> list[dict]:
    out = []
    for r in res:
        rec = r.as_dict()
        rec["r"] = r.det_order
        ks = []
        for j in range(r.q):
            try:
                ks.append(gamov_vector(model, r, j).as_dict()["k0"])
            except GamovError as exc:
                ks.append(str(exc))
        rec["k0"] = ks
        out.append(rec)
    return out


# ----------------------------------------------------------------------
def cmd_validate(model: ModelSpec, args, tol, out: Path) -> int:
    rep = RunReport("validate", model, tolerances=tol)
    a2 = check_assumption2(model)
    rep.results["assumption2"] = a2.as_dict()
    rep.add(Check("assumption2_min_abs_det", a2.min_abs_det, a2.threshold, a2.threshold,
                  a2.passed, {"argmin": a2.argmin}))
    if not a2.passed:
        rep.notes.append(f"det L₊ vanishes on the real axis near λ = {a2.argmin:.6g}")
    _write_json(out / "report.json", rep.as_dict())
    return EXIT_OK if a2.passed else EXIT_MODEL


def cmd_resonances(model: ModelSpec, args, tol, out: Path) -> int:
    rep = RunReport("resonances", model, tolerances=tol)
    res = _search(model, args.rect, tol, rep)
    records = _resonance_records(model, res)
    rep.results["resonances"] = records
    rep.add(Check("search_complete", len(res.exhausted), 0, 0, res.complete))
    _write_json(out / "resonances.json", {"resonances": records, "complete": res.complete})
    _write_json(out / "report.json", rep.as_dict())
    return EXIT_OK if res.complete else EXIT_SEARCH


def cmd_smatrix(model: ModelSpec, args, tol, out: Path) -> int:
    rep = RunReport("smatrix", model, tolerances=tol)
    lo, hi = default_scan(model)
    lam = np.linspace(lo, hi, args.points)
    s = s_matrix_K(model, lam)
    n = model.n
    header = ["lambda"] + [f"{p}S{i}{j}" for i in range(n) for j in range(n) for p in ("re_", "im_")]
    rows = [[l] + [v for i in range(n) for j in range(n) for v in (s[k, i, j].real, s[k, i, j].imag)]
            for k, l in enumerate(lam)]
    _write_csv(out / "smatrix.csv", header, rows)
    dens = SpectralDensity(model)
    eye = np.eye(n)
    rho = np.stack([dens.rho(lam, eye[:, j]) for j in range(n)], axis=1)
    _write_csv(out / "rho.csv", ["lambda"] + [f"rho_{j}" for j in range(n)],
               [[l, *r] for l, r in zip(lam, rho)])
    res = _search(model, args.rect, tol, rep)
    fits = []
    for r in res:
        gamma = 2 * abs(r.zeta.imag)
        window = np.linspace(r.zeta.real - 5 * gamma, r.zeta.real + 5 * gamma, 201)
        e0 = r.kernel_basis[:, 0]
        try:
            fit = breit_wigner_fit(window, dens.rho(window, e0 / np.linalg.norm(e0)))
            fits.append({"zeta": r.zeta, **fit.as_dict(),
                         "center_offset_over_gamma": (fit.lambda0_fit - r.zeta.real) / gamma,
                         "width_rel_err": fit.gamma_fit / gamma - 1})
        except FitError as exc:
            fits.append({"zeta": r.zeta, "error": str(exc)})
    rep.results["breit_wigner"] = fits
    _write_json(out / "report.json", rep.as_dict())
    return EXIT_OK if res.complete else EXIT_SEARCH


def cmd_gamov(model: ModelSpec, args, tol, out: Path) -> int:
    rep = RunReport("gamov", model, tolerances=tol)
    res = _search(model, args.rect, tol, rep)
    records = _resonance_records(model, res)
    rep.results["resonances"] = records
    elements = bundled_test_elements(model.n)
    for idx, r in enumerate(res):
        for j in range(r.q):
            gv = gamov_vector(model, r, j)
            zeta = r.zeta + args.zeta_shift
            worst = max(abs(eigen_defect(model, zeta, gv.e0, x)) for x in elements)
            rep.add(Check.bound(f"eigen_defect[res{idx},{j}]", worst, tol["eigen_defect"],
                                zeta=zeta, shift=args.zeta_shift))
    _write_json(out / "resonances.json", {"resonances": records, "complete": res.complete})
    _write_json(out / "report.json", rep.as_dict())
    if not res.complete:
        return EXIT_SEARCH
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_decay(model: ModelSpec, args, tol, out: Path) -> int:
    rep = RunReport("decay", model, tolerances=tol)
    res = _search(model, args.rect, tol, rep)
    target = narrowest(res)
    if target is not None:
        e0 = target.kernel_basis[:, 0] / np.linalg.norm(target.kernel_basis[:, 0])
    else:
        e0 = np.eye(model.n)[0].astype(complex)
    times = np.linspace(0.0, args.t_max, int(round(args.t_max / args.dt)) + 1)
    amp = survival_amplitude(model, e0, times)
    _write_csv(out / "survival.csv", ["t", "re_A", "im_A", "abs_A"],
               [[t, a.real, a.imag, abs(a)] for t, a in zip(times, amp)])
    rep.results["e0"] = e0
    rep.add(Check("A(0)=1", amp[0], 1.0, tol["a0"], bool(abs(amp[0] - 1) < tol["a0"])))
    rep.add(Check.bound("amplitude_bound", max(0.0, float(np.abs(amp).max()) - 1),
                        tol["amplitude_bound"]))
    try:
        fit = decay_fit(times, amp, (args.fit_start, args.fit_end))
        rep.results["decay_fit"] = fit.as_dict()
        if target is not None:
            expect = 2 * abs(target.zeta.imag)
            rel = abs(fit.gamma - expect) / expect
            rep.add(Check("decay_rate", fit.gamma, expect, tol["decay_rate"],
                          bool(rel < tol["decay_rate"]), {"rel_err": rel}))
    except DecayFitError as exc:
        rep.results["decay_fit"] = {"error": str(exc)}
    _write_json(out / "report.json", rep.as_dict())
    if not res.complete:
        return EXIT_SEARCH
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_verify(model: ModelSpec, args, tol, out: Path) -> int:
    rep = run_verification(model, args.rect, tol, zeta_shift=args.zeta_shift)
    _write_json(out / "report.json", rep.as_dict())
    return EXIT_OK if rep.passed else EXIT_VERIFY


HANDLERS = {"validate": cmd_validate, "resonances": cmd_resonances, "smatrix": cmd_smatrix,
            "gamov": cmd_gamov, "decay": cmd_decay, "verify": cmd_verify}


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resonance-kit",
                                description="Resonances and Gamov vectors of finite-rank Friedrichs models.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="model JSON file")
    p.add_argument("--rect", help="search rectangle re_min,re_max,im_min,im_max")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--tol", action="append", metavar="NAME=VAL",
                   help="override a tolerance; repeatable")
    p.add_argument("--zeta-shift", type=float, default=0.0,
                   help="shift the resonance used by the eigen-defect check (negative control)")
    p.add_argument("--points", type=int, default=401, help="smatrix grid size")
    p.add_argument("--t-max", type=float, default=60.0)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--fit-start", type=float, default=5.0)
    p.add_argument("--fit-end", type=float, default=60.0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.rect = _parse_rect(args.rect)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(_parse_tols(args.tol))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except (UsageError, OSError) as exc:
        print(f"resonance-kit: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        model = load_model(args.config)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"resonance-kit: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ModelError as exc:
        if str(exc).startswith("malformed config"):
            print(f"resonance-kit: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"resonance-kit: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    try:
        code = HANDLERS[args.command](model, args, tol, out)
    except ValueError as exc:
        print(f"resonance-kit: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SearchError, QuadratureError) as exc:
        print(f"resonance-kit: search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except OSError as exc:
        print(f"resonance-kit: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
