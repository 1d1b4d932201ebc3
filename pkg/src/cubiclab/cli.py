"""Command-line entry point: experiment orchestration and structured reports.

Every subcommand is a thin dispatcher over the library modules; all randomness
is seeded through flags or config so reports reproduce bit for bit.  Exit
codes: 0 success, 2 config error, 3 budget exceeded, 4 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import (
    CubicLabError,
    NotConverged,
    ResourceLimit,
    ToleranceNotMet,
)
from . import equidist as eq
from . import exp_sums as es
from . import forms_core as fc
from . import kernels as kn
from . import lattice_enum as le
from . import linear_construction as lc
from . import singular_integral as si
from . import singular_series as ss

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_CONVERGENCE = 4


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "__dict__") or hasattr(obj, "__dataclass_fields__"):
        try:
            return asdict(obj)
        except TypeError:
            return str(obj)
    return str(obj)


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip() != ""]


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _load_form(path: str) -> fc.CubicForm:
    return fc.load_cubic_form(path)


def _load_linsys(path: Optional[str], n: int) -> fc.LinearSystem:
    if path is None:
        return fc.LinearSystem.empty(n)
    return fc.load_linear_system(path)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_count(args) -> int:
    C = _load_form(args.form)
    Lsys = _load_linsys(args.linsys, C.n)
    tau = tuple(_floats(args.tau)) if args.tau else ()
    t0 = time.perf_counter()
    query = le.CountQuery(C=C, Lsys=Lsys if Lsys.r else None, tau=tau, eta=args.eta,
                          P=args.P, weighted=args.weighted, strategy=args.strategy,
                          keep_solutions=10**9 if args.dump_solutions else 0)
    result = le.count(query)
    wall_ms = 1000 * (time.perf_counter() - t0)
    if args.dump_solutions:
        with open(args.dump_solutions, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(1, C.n + 1)])
            for sol in result.solutions or ():
                writer.writerow(sol)
    _emit({"value": result.value, "points_examined": result.points_examined,
           "wall_ms": wall_ms})
    return EXIT_OK


def cmd_expsum(args) -> int:
    C = _load_form(args.form)
    if args.which == "complete":
        avec = _ints(args.avec) if args.avec else [0] * C.n
        fn = es.complete_sum_crt if args.crt else es.complete_sum
        val = fn(C, args.q, args.a, avec)
    else:
        lam = _floats(args.lam) if args.lam else [0.0] * C.n
        val = es.sum_g(C, args.P, args.alpha0, lam, weighted=args.weighted)
    _emit({"re": val.re, "im": val.im, "abs_error": val.abs_error})
    return EXIT_OK


def cmd_sseries(args) -> int:
    C = _load_form(args.form)
    report = ss.positivity_report(C, pmax=args.pmax, m_max=args.mmax, Q=args.Q,
                                  h_lower=args.h_lower, psi=args.psi)
    locals_table = []
    for p in sorted(report.certificates):
        try:
            d = ss.local_density(C, p, args.depth)
            locals_table.append({"p": p, "k": args.depth, "sigma": str(d.sigma),
                                 "solutions": d.solutions})
        except ResourceLimit:
            locals_table.append({"p": p, "k": args.depth, "sigma": None,
                                 "solutions": None})
    certs = []
    for p in sorted(report.certificates):
        cert = report.certificates[p]
        if cert is None:
            certs.append({"p": p, "found": False})
        else:
            certs.append({"p": p, "found": True, "a": list(cert.a), "m": cert.m,
                          "t": cert.t, "slack": cert.slack})
    _emit({
        "partial_sum": report.partial_sum,
        "Q": report.Q,
        "per_q": [{"q": q, "term": t} for q, t in report.per_q],
        "local": locals_table,
        "certificates": certs,
        "tail_heuristic": report.tail_heuristic,
        "tail_exponent": report.tail_exponent,
        "note": report.note,
    })
    return EXIT_OK


def cmd_sintegral(args) -> int:
    C = _load_form(args.form)
    Lsys = _load_linsys(args.linsys, C.n)
    Lsys_opt = Lsys if Lsys.r else None
    if args.oscillatory:
        val = si.chi_w_oscillatory(C, Lsys_opt, box=(args.box, args.box), tol=args.tol)
        _emit({"value": val.re, "im": val.im, "error_bar": val.abs_error})
        return EXIT_OK
    schedule = _floats(args.schedule)
    est = si.chi_w_estimate(C, Lsys_opt, schedule, samples=args.samples, seed=args.seed)
    _emit({
        "value": est.value,
        "error_bar": est.error_bar,
        "table": [{"L": row.L, "IL": row.value, "stderr": row.std_error}
                  for row in est.table],
    })
    return EXIT_OK


def cmd_kernel(args) -> int:
    if args.verb != "check":
        raise ValueError(f"unknown kernel verb {args.verb!r}")
    kp = kn.KernelParams.from_P(args.eta, args.P, "plus", policy=args.policy)
    grid = np.linspace(-2 * args.eta, 2 * args.eta, args.grid)
    report = kn.sandwich_check(args.eta, kp.rho, grid.tolist(), args.tol)
    _emit({
        "eta": report.eta, "rho": report.rho, "T_policy": args.policy,
        "quad_tol": report.quad_tol, "tail_bound": report.tail_bound,
        "max_numeric_dev_plus": report.max_numeric_dev_plus,
        "max_numeric_dev_minus": report.max_numeric_dev_minus,
        "points_checked": report.points_checked,
        "sandwich_ok": True,
    })
    return EXIT_OK


def cmd_weyl(args) -> int:
    C = _load_form(args.form)
    Lsys = _load_linsys(args.linsys, C.n)
    stat = eq.weyl_sum(C, Lsys, _ints(args.k), args.P, strategy=args.strategy)
    _emit({
        "k": list(stat.k), "P": stat.P, "N": stat.N,
        "sum": {"re": stat.sum.real, "im": stat.sum.imag},
        "normalized_abs": abs(stat.normalized),
    })
    return EXIT_OK


def cmd_equidist(args) -> int:
    C = _load_form(args.form)
    Lsys = _load_linsys(args.linsys, C.n)
    k_set = [_ints(part) for part in args.kset.split(";") if part.strip()]
    rows = eq.equidist_experiment(C, Lsys, _floats(args.Pgrid), k_set,
                                  boxes=args.boxes, seed=args.seed,
                                  strategy=args.strategy)
    if args.out:
        eq.write_equidist_csv(rows, args.out)
    _emit({"rows": [{
        "P": row.P, "N": row.N, "discrepancy": row.discrepancy,
        "weyl": [{"k": list(k), "normalized_abs": m} for k, m in row.weyl],
    } for row in rows]})
    return EXIT_OK


def cmd_construct(args) -> int:
    C = _load_form(args.form)
    decomp = fc.load_h_decomposition(args.decomp)
    Lsys = fc.load_linear_system(args.linsys)
    tau = _floats(args.tau)
    x = lc.solve_system(C, decomp, Lsys, tau, args.eta, args.Y)
    if x is None:
        _emit({"found": False, "message": f"not found within bound Y={args.Y}"})
        return EXIT_OK
    transcript = {
        "cubic_value": str(fc.eval_cubic(C, x)),
        "linear_values": fc.eval_linear(Lsys, x),
        "tau": tau,
        "eta": args.eta,
        "constraints_ok": all(abs(v - t) < args.eta
                              for v, t in zip(fc.eval_linear(Lsys, x), tau)),
    }
    _emit({"found": True, "x": list(x), "verification": transcript})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Config-driven experiment


@dataclass(frozen=True)
class ExperimentConfig:
    form_path: str
    linsys_path: Optional[str]
    decomp_path: Optional[str]
    tau: Tuple[float, ...]
    eta: float
    P_grid: Tuple[float, ...]
    seed: int
    Q: int
    schedule: Tuple[float, ...]
    samples: int
    kernel_policy: str
    strategy: str
    h_search_height: int

    @classmethod
    def from_dict(cls, doc: dict, base: str = ".") -> "ExperimentConfig":
        def path_of(key):
            p = doc.get(key)
            return None if p is None else os.path.join(base, p)
        P_grid = doc.get("P_grid") or [doc["P"]]
        return cls(
            form_path=path_of("form") or "",
            linsys_path=path_of("linsys"),
            decomp_path=path_of("decomp"),
            tau=tuple(float(t) for t in doc.get("tau", [])),
            eta=float(doc.get("eta", 1.0)),
            P_grid=tuple(float(p) for p in P_grid),
            seed=int(doc.get("seed", 7)),
            Q=int(doc.get("Q", 20)),
            schedule=tuple(float(v) for v in doc.get("schedule", [4, 8, 16, 32])),
            samples=int(doc.get("samples", 1 << 16)),
            kernel_policy=str(doc.get("kernel_policy", "log")),
            strategy=str(doc.get("strategy", "auto")),
            h_search_height=int(doc.get("h_search_height", 2)),
        )


def validate_config(path: str) -> List[str]:
    """Schema and invariant diagnostics for a config file; empty means clean."""
    issues: List[str] = []
    try:
        doc = json.load(open(path))
    except (OSError, json.JSONDecodeError) as exc:
        return [f"{path}: cannot parse: {exc}"]
    base = os.path.dirname(os.path.abspath(path))
    if "form" not in doc:
        issues.append("config: missing required key 'form'")
    if "eta" in doc and not (isinstance(doc["eta"], (int, float)) and doc["eta"] > 0):
        issues.append("config.eta: eta must be positive")
    if "P" not in doc and "P_grid" not in doc:
        issues.append("config: need P or P_grid")
    form_path = os.path.join(base, doc.get("form", ""))
    C = None
    if doc.get("form") and os.path.exists(form_path):
        try:
            raw = json.load(open(form_path))
            for idx, m in enumerate(raw.get("monomials", [])):
                if not (m.get("i", 0) <= m.get("j", 0) <= m.get("k", 0)):
                    issues.append(f"form.monomials[{idx}]: index order violated (need i <= j <= k)")
            C = fc.load_cubic_form(form_path)
        except (ValueError, KeyError) as exc:
            issues.append(f"form: {exc}")
    elif doc.get("form"):
        issues.append(f"form: file not found: {form_path}")
    if doc.get("linsys"):
        lp = os.path.join(base, doc["linsys"])
        if not os.path.exists(lp):
            issues.append(f"linsys: file not found: {lp}")
        else:
            try:
                Lsys = fc.load_linear_system(lp)
                tau = doc.get("tau", [])
                if len(tau) != Lsys.r:
                    issues.append(f"config.tau: length {len(tau)} != r {Lsys.r}")
                if C is not None and Lsys.n != C.n:
                    issues.append(f"linsys: n {Lsys.n} != form n {C.n}")
            except (ValueError, KeyError) as exc:
                issues.append(f"linsys: {exc}")
    if doc.get("decomp"):
        dp = os.path.join(base, doc["decomp"])
        if not os.path.exists(dp):
            issues.append(f"decomp: file not found: {dp}")
        else:
            try:
                D = fc.load_h_decomposition(dp)
                if C is not None and not fc.verify_h_decomposition(C, D):
                    issues.append("decomp: does not reproduce the form")
            except (ValueError, KeyError) as exc:
                issues.append(f"decomp: {exc}")
    return issues


def run_asymptotic_experiment(cfg: ExperimentConfig) -> dict:
    """Compare N_w(P) against (2 eta)^r * S * chi_w * P^(n-r-3) along a P grid,
    flagging whether the theorem hypotheses hold for the certified h window."""
    C = fc.load_cubic_form(cfg.form_path)
    Lsys = fc.load_linear_system(cfg.linsys_path) if cfg.linsys_path else fc.LinearSystem.empty(C.n)
    r = Lsys.r
    witness = fc.load_h_decomposition(cfg.decomp_path) if cfg.decomp_path else None
    h_lo, h_hi = fc.h_bounds(C, witness, fc.SpaceSearchParams(H=cfg.h_search_height))
    series, per_q = ss.singular_series_truncated(C, cfg.Q)
    chi_table = []
    converged = True
    try:
        chi = si.chi_w_estimate(C, Lsys if r else None, cfg.schedule, cfg.samples, cfg.seed)
        chi_value, chi_err = chi.value, chi.error_bar
        chi_table = [(row.L, row.value, row.std_error) for row in chi.table]
    except NotConverged as exc:
        converged = False
        chi_table = [(row.L, row.value, row.std_error) for row in (exc.table or ())]
        chi_value = chi_table[-1][1] if chi_table else float("nan")
        chi_err = float("inf")
    rows = []
    for P in cfg.P_grid:
        q = le.CountQuery(C=C, Lsys=Lsys if r else None, tau=cfg.tau, eta=cfg.eta,
                          P=P, weighted=True, strategy=cfg.strategy)
        res = le.count(q)
        predicted = (2 * cfg.eta) ** r * series * chi_value * P ** (C.n - r - 3)
        rows.append({
            "P": P, "N_w": res.value, "predicted": predicted,
            "ratio": res.value / predicted if predicted else float("nan"),
            "points_examined": res.points_examined,
        })
    report = {
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in asdict(cfg).items()},
        "version": __version__,
        "h_window": [h_lo, h_hi],
        "hypotheses": {
            "weighted_asymptotic_h_gt_16_plus_8r": h_lo > 16 + 8 * r,
            "solvability_n_gt_16_plus_9r": C.n > 16 + 9 * r,
            "equidistribution_h_gt_16": h_lo > 16,
            "note": "flags use the certified h lower bound; tool runs outside these regimes by design",
        },
        "singular_series": {"Q": cfg.Q, "partial_sum": series},
        "chi_w": {"value": chi_value, "error_bar": chi_err,
                  "converged": converged,
                  "table": [{"L": L, "IL": v, "stderr": s} for L, v, s in chi_table]},
        "counts": rows,
    }
    return report


def cmd_asymptotic(args) -> int:
    issues = validate_config(args.config)
    if issues:
        _emit({"diagnostics": issues})
        return EXIT_CONFIG
    doc = json.load(open(args.config))
    cfg = ExperimentConfig.from_dict(doc, base=os.path.dirname(os.path.abspath(args.config)))
    report = run_asymptotic_experiment(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_jsonable)
    _emit(report)
    return EXIT_OK


def cmd_validate(args) -> int:
    issues = validate_config(args.config)
    _emit({"diagnostics": issues, "clean": not issues})
    return EXIT_OK if not issues else EXIT_CONFIG


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubiclab",
        description="numerical laboratory for integer zeros of cubic forms under "
                    "real linear inequality constraints",
    )
    parser.add_argument("--version", action="version", version=f"cubiclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="count constrained integer zeros")
    p.add_argument("--form", required=True)
    p.add_argument("--linsys")
    p.add_argument("--tau", default="")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--strategy", default="auto", choices=["auto", "direct", "mim", "meet_in_middle"])
    p.add_argument("--dump-solutions", dest="dump_solutions")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("expsum", help="complete and box exponential sums")
    which = p.add_subparsers(dest="which", required=True)
    pc = which.add_parser("complete")
    pc.add_argument("--form", required=True)
    pc.add_argument("--q", type=int, required=True)
    pc.add_argument("--a", type=int, required=True)
    pc.add_argument("--avec", default="")
    pc.add_argument("--crt", action="store_true")
    pc.set_defaults(func=cmd_expsum)
    pg = which.add_parser("g")
    pg.add_argument("--form", required=True)
    pg.add_argument("--P", type=float, required=True)
    pg.add_argument("--alpha0", type=float, default=0.0)
    pg.add_argument("--lambda", dest="lam", default="")
    pg.add_argument("--weighted", action="store_true")
    pg.set_defaults(func=cmd_expsum)

    p = sub.add_parser("sseries", help="truncated singular series and local data")
    p.add_argument("--form", required=True)
    p.add_argument("--Q", type=int, default=20)
    p.add_argument("--pmax", type=int, default=7)
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--h-lower", dest="h_lower", type=int, default=1)
    p.add_argument("--psi", type=float, default=0.25)
    p.set_defaults(func=cmd_sseries)

    p = sub.add_parser("sintegral", help="weighted singular integral estimators")
    p.add_argument("--form", required=True)
    p.add_argument("--linsys")
    p.add_argument("--schedule", default="4,8,16,32")
    p.add_argument("--samples", type=int, default=1 << 17)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--oscillatory", action="store_true")
    p.add_argument("--box", type=float, default=12.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_sintegral)

    p = sub.add_parser("kernel", help="smoothing kernel checks")
    p.add_argument("verb", choices=["check"])
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--policy", default="log", choices=["log", "pow"])
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("weyl", help="normalized Weyl sum over the zero set")
    p.add_argument("--form", required=True)
    p.add_argument("--linsys", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--strategy", default="auto")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("equidist", help="equidistribution experiment table")
    p.add_argument("--form", required=True)
    p.add_argument("--linsys", required=True)
    p.add_argument("--Pgrid", required=True)
    p.add_argument("--kset", required=True)
    p.add_argument("--boxes", type=int, default=500)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--strategy", default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_equidist)

    p = sub.add_parser("construct", help="solve the system through a decomposition kernel")
    p.add_argument("--form", required=True)
    p.add_argument("--decomp", required=True)
    p.add_argument("--linsys", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--Y", type=int, default=500)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("asymptotic", help="end-to-end comparison experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("validate", help="config diagnostics")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimit as exc:
        _emit({"error": "budget exceeded", "detail": str(exc)})
        return EXIT_BUDGET
    except (NotConverged, ToleranceNotMet) as exc:
        _emit({"error": "convergence failure", "detail": str(exc)})
        return EXIT_CONVERGENCE
    except (CubicLabError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _emit({"error": "config error", "detail": str(exc)})
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
