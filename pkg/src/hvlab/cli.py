"""Command-line front end.

Every subcommand prints one JSON document to stdout. Exit codes: 0 when the
check holds (feasible, colorable, match), 1 for a mathematically meaningful
negative (violation, infeasible, uncolorable, mismatch), 2 for usage or input
errors, which get a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import inequalities as ineq
from . import io
from .errors import HVLabError
from .kochenspecker import (
    frame_function_obstruction,
    orthogonality_graph,
    peres33,
    search_coloring,
)
from .models import (
    FactorizedModel,
    StochasticKernelModel,
    check_bell_locality,
    check_freedom,
    check_parameter_independence,
    check_perfect_correlation,
    derandomize,
    predicted_table,
    simulate,
)
from .quantum import (
    Frame,
    PairStats,
    born_oracle_photon,
    born_oracle_spin1,
    photon_stats,
    spin1_joint,
)

ORACLE_TOL = 1e-12
SIGMA_BOUND = 4.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


@dataclass
class CommandResult:
    exit_code: int
    payload: dict | None


def _stats(s: PairStats) -> dict:
    return {"p11": s.p11, "p10": s.p10, "p01": s.p01, "p00": s.p00, "mismatch": s.mismatch}


def _nine(text: str) -> Frame:
    parts = text.replace(",", " ").split()
    try:
        return Frame.from_rows([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"frame must be nine reals, got {text!r}") from None


def _load_model(path: str, kind: type):
    m = io.load_model(path)
    if not isinstance(m, kind):
        want = "deterministic (response_f/response_g)" if kind is FactorizedModel else "stochastic (kernel_f/kernel_g)"
        raise HVLabError(f"{path}: expected a {want} model")
    return m


def _boole_summary(m: FactorizedModel) -> dict:
    reports = ineq.boole_audit_model(m)
    slack = min((r.slack for r in reports), default=0.0)
    return {"checked": len(reports), "min_slack": slack, "holds": all(r.holds for r in reports)}


# subcommands


def cmd_predict_photon(args) -> CommandResult:
    s = photon_stats(args.alpha, args.beta)
    payload = {"command": "predict photon", "alpha": args.alpha, "beta": args.beta, "stats": _stats(s)}
    code = 0
    if args.oracle:
        o = born_oracle_photon(args.alpha, args.beta)
        payload["oracle"] = _stats(o)
        payload["max_abs_diff"] = s.max_abs_diff(o)
        code = 0 if payload["max_abs_diff"] <= ORACLE_TOL else 1
    return CommandResult(code, payload)


def cmd_predict_spin1(args) -> CommandResult:
    a, b = _nine(args.frame_a), _nine(args.frame_b)
    joint = spin1_joint(a, b)
    payload = {
        "command": "predict spin1",
        "frame_a": a.rows(),
        "frame_b": b.rows(),
        "joint": [list(r) for r in joint.cells],
        "pairs": [[_stats(joint.pair_stats(i, j)) for j in range(3)] for i in range(3)],
    }
    code = 0
    if args.oracle:
        o = born_oracle_spin1(a, b)
        payload["oracle_joint"] = [list(r) for r in o.cells]
        payload["max_abs_diff"] = joint.max_abs_diff(o)
        code = 0 if payload["max_abs_diff"] <= ORACLE_TOL else 1
    return CommandResult(code, payload)


def cmd_scan_boole(args) -> CommandResult:
    scan = ineq.scan_f(args.min, args.max, args.step)
    if args.csv:
        Path(args.csv).write_text(io.scan_csv(scan.thetas, scan.values), encoding="utf-8")
    k = int(np.argmin(scan.values))
    n_bad = int(scan.violation_mask.sum())
    payload = {
        "command": "scan-boole",
        "min": args.min,
        "max": args.max,
        "step": args.step,
        "points": len(scan.thetas),
        "violations": n_bad,
        "min_f": float(scan.values[k]),
        "argmin_theta": float(scan.thetas[k]),
        "csv": args.csv,
    }
    return CommandResult(1 if n_bad else 0, payload)


def cmd_lhv_check(args) -> CommandResult:
    m = _load_model(args.model, FactorizedModel)
    raw = m.induced_raw_model()
    fr = check_freedom(raw, args.tol)
    pi = check_parameter_independence(raw)
    diff = raw.conditional_table().max_abs_diff(predicted_table(m))
    payload = {
        "command": "lhv check",
        "variant": m.variant,
        "freedom": {"probabilistic": fr.probabilistic, "surjective": fr.surjective, "residual": fr.residual},
        "parameter_independence": pi.holds,
        "reduction_max_abs_diff": diff,
    }
    holds = fr.probabilistic and fr.surjective and pi.holds and diff <= args.tol
    if m.variant == "photon":
        payload["boole"] = _boole_summary(m)
        holds = holds and payload["boole"]["holds"]
    else:
        pc = check_perfect_correlation(m)
        payload["perfect_correlation"] = {
            "holds": pc.holds,
            "checked": pc.checked,
            "skipped": len(pc.skipped),
            "witness": pc.witness,
        }
        holds = holds and pc.holds
    payload["holds"] = holds
    return CommandResult(0 if holds else 1, payload)


def cmd_lhv_table(args) -> CommandResult:
    m = _load_model(args.model, FactorizedModel)
    return CommandResult(0, {"command": "lhv table", "table": io.table_to_dict(predicted_table(m))})


def cmd_lhv_simulate(args) -> CommandResult:
    if args.shots < 1:
        raise UsageError("--shots must be at least 1")
    m = _load_model(args.model, FactorizedModel)
    emp = simulate(m, args.shots, args.seed)
    pred = predicted_table(m)
    n = emp.counts[:, :, None, None].astype(float)
    p = pred.probs
    sd = np.sqrt(p * (1 - p) / np.where(n > 0, n, 1))
    dev = np.abs(np.where(emp.present[:, :, None, None], emp.probs, p) - p)
    exact = sd == 0
    max_sigma = float(np.max(np.where(exact, 0.0, dev / np.where(exact, 1.0, sd))))
    ok = max_sigma <= SIGMA_BOUND and not (dev[exact] > 0).any()
    payload = {
        "command": "lhv simulate",
        "shots": args.shots,
        "seed": args.seed,
        "table": io.table_to_dict(emp),
        "counts": emp.counts.tolist(),
        "max_sigma": max_sigma,
        "within_tolerance": bool(ok),
    }
    return CommandResult(0 if ok else 1, payload)


def cmd_polytope(args) -> CommandResult:
    table = io.load_table(args.table)
    res = ineq.local_polytope_feasible(table)
    b = ineq.boole_table_check(table)
    payload = {
        "command": "polytope",
        "feasible": res.feasible,
        "residual": res.residual,
        "weights": list(res.weights) if res.weights is not None else None,
        "strategies": [{"alice": list(s.alice), "bob": list(s.bob)} for s in res.strategies],
        "boole": {"lhs": b.lhs, "rhs": b.rhs, "slack": b.slack, "holds": b.holds},
    }
    return CommandResult(0 if res.feasible else 1, payload)


def cmd_stochastic_check(args) -> CommandResult:
    m = _load_model(args.model, StochasticKernelModel)
    rep = check_bell_locality(m.joint(), args.tol)
    payload = {
        "command": "stochastic check",
        "bell_local": rep.bell_local,
        "freedom": rep.freedom,
        "locality_residual": rep.locality_residual,
        "freedom_residual": rep.freedom_residual,
    }
    return CommandResult(0 if rep.bell_local and rep.freedom else 1, payload)


def cmd_stochastic_reduce(args) -> CommandResult:
    m = _load_model(args.model, StochasticKernelModel)
    res = derandomize(m)
    payload = {
        "command": "stochastic reduce",
        "certified": res.certified,
        "max_abs_diff": res.max_abs_diff,
        "hidden_values": len(res.model.z),
        "table": io.table_to_dict(res.table),
    }
    holds = res.certified
    if m.variant == "photon" and len(m.settings_a) >= 2 and len(m.settings_b) >= 2:
        payload["boole"] = _boole_summary(res.model)
        holds = holds and payload["boole"]["holds"]
        if res.table.shape == (2, 2, 2, 2):
            payload["polytope_feasible"] = ineq.local_polytope_feasible(res.table).feasible
            holds = holds and payload["polytope_feasible"]
    return CommandResult(0 if holds else 1, payload)


def cmd_ks_color(args) -> CommandResult:
    rays = io.load_rays(args.rays)
    rep = search_coloring(orthogonality_graph(rays), count=args.count)
    payload = {
        "colorable": rep.colorable,
        "witness": list(rep.witness.value) if rep.witness is not None else None,
        "nodes": rep.nodes_explored,
        "exhausted": rep.exhausted,
    }
    if args.count:
        payload["count"] = rep.count
    return CommandResult(0 if rep.colorable else 1, payload)


def cmd_ks_peres33(args) -> CommandResult:
    rays = peres33()
    if args.emit:
        Path(args.emit).write_text(io.format_rays(rays, "Peres 33-ray set"), encoding="utf-8")
    payload = {
        "command": "ks peres33",
        "count": len(rays),
        "rays": [list(r.components) for r in rays.rays],
        "emitted": args.emit,
    }
    return CommandResult(0, payload)


def cmd_ks_obstruction(args) -> CommandResult:
    rays = io.load_rays(args.rays)
    model = _load_model(args.model, FactorizedModel) if args.model else None
    rep = frame_function_obstruction(rays, model)
    payload = {
        "command": "ks obstruction",
        "model_exists": rep.model_exists,
        "status": rep.status,
        "colorings": [list(c.value) for c in rep.colorings],
        "failure": rep.failure,
        "uncovered": list(rep.uncovered),
    }
    if rep.search is not None:
        payload["nodes"] = rep.search.nodes_explored
    return CommandResult(0 if rep.model_exists else 1, payload)


# parser


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hvlab", description="Hidden-variable no-go checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    predict = sub.add_parser("predict", help="quantum predictions")
    psub = predict.add_subparsers(dest="which", required=True, parser_class=_Parser)
    ph = psub.add_parser("photon")
    ph.add_argument("--alpha", type=_finite, required=True)
    ph.add_argument("--beta", type=_finite, required=True)
    ph.add_argument("--oracle", action="store_true")
    ph.set_defaults(func=cmd_predict_photon)
    sp = psub.add_parser("spin1")
    sp.add_argument("--frame-a", required=True)
    sp.add_argument("--frame-b", required=True)
    sp.add_argument("--oracle", action="store_true")
    sp.set_defaults(func=cmd_predict_spin1)

    scan = sub.add_parser("scan-boole", help="scan f(theta) for Boole violations")
    scan.add_argument("--min", type=_finite, default=ineq.DEFAULT_SCAN[0])
    scan.add_argument("--max", type=_finite, default=ineq.DEFAULT_SCAN[1])
    scan.add_argument("--step", type=_finite, default=ineq.DEFAULT_SCAN[2])
    scan.add_argument("--csv", metavar="PATH")
    scan.set_defaults(func=cmd_scan_boole)

    lhv = sub.add_parser("lhv", help="deterministic local models")
    lsub = lhv.add_subparsers(dest="which", required=True, parser_class=_Parser)
    chk = lsub.add_parser("check")
    chk.add_argument("model")
    chk.add_argument("--tol", type=_finite, default=1e-12)
    chk.set_defaults(func=cmd_lhv_check)
    tab = lsub.add_parser("table")
    tab.add_argument("model")
    tab.set_defaults(func=cmd_lhv_table)
    sim = lsub.add_parser("simulate")
    sim.add_argument("model")
    sim.add_argument("--shots", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.set_defaults(func=cmd_lhv_simulate)

    poly = sub.add_parser("polytope", help="local polytope membership of a 2x2 table")
    poly.add_argument("table")
    poly.set_defaults(func=cmd_polytope)

    sto = sub.add_parser("stochastic", help="stochastic local models")
    ssub = sto.add_subparsers(dest="which", required=True, parser_class=_Parser)
    sc = ssub.add_parser("check")
    sc.add_argument("model")
    sc.add_argument("--tol", type=_finite, default=1e-12)
    sc.set_defaults(func=cmd_stochastic_check)
    sr = ssub.add_parser("reduce")
    sr.add_argument("model")
    sr.set_defaults(func=cmd_stochastic_reduce)

    ks = sub.add_parser("ks", help="Kochen-Specker colorings")
    ksub = ks.add_subparsers(dest="which", required=True, parser_class=_Parser)
    kc = ksub.add_parser("color")
    kc.add_argument("rays")
    kc.add_argument("--count", action="store_true")
    kc.set_defaults(func=cmd_ks_color)
    kp = ksub.add_parser("peres33")
    kp.add_argument("--emit", metavar="PATH")
    kp.set_defaults(func=cmd_ks_peres33)
    ko = ksub.add_parser("obstruction")
    ko.add_argument("rays")
    ko.add_argument("--model", metavar="MODEL.json")
    ko.set_defaults(func=cmd_ks_obstruction)
    return p


def dispatch(argv: Sequence[str]) -> CommandResult:
    """Parse ``argv`` and run the subcommand; errors become exit code 2."""
    try:
        args = build_parser().parse_args(list(argv))
        return args.func(args)
    except (UsageError, HVLabError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        return CommandResult(2, {"error": msg})


def main(argv: Sequence[str] | None = None) -> int:
    result = dispatch(sys.argv[1:] if argv is None else argv)
    if result.exit_code == 2:
        print(f"hvlab: error: {result.payload['error']}", file=sys.stderr)
    else:
        sys.stdout.write(io.dumps(result.payload) + "\n")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
