"""Command-line front end.

Each subcommand builds a RunReport, writes it as canonical JSON (stdout,
or ``--out``), and exits 0 exactly when the report's verdict is pass.
Progress goes to stderr.  Settings are resolved as: command-line flag,
then the ``--config`` JSON file, then the built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds
from .certificate import (
    DEFAULT_GRID_INTERVALS,
    DEFAULT_MAX_PASSES,
    DEFAULT_MENU,
    TARGET_RATE,
    Certificate,
    CertificateError,
    check_certificate,
    run_certificate,
)
from .interval import iv_const, iv_contains
from .operators import ExponentialPGF, op_A, op_H, op_L
from .report import RunReport, dumps, emit_report
from .simulator.boxmodel import FiniteDistribution, enumerate_box_model, pgf_exact, pgf_handle
from .simulator.config import VARIANTS, ModelConfig
from .simulator.episodes import batch_summary, outcomes_to_csv, run_batch, run_coupled_batch
from .simulator.walks import estimate_hit_prob, estimate_phi_transitions

__all__ = ["DEFAULTS", "build_parser", "dispatch", "main"]

SIGMA_BOUND = 4
MAX_EXCLUSION = 0.05

DEFAULTS = {
    "grid_size": DEFAULT_GRID_INTERVALS + 1,
    "step_menu": ",".join(f"{d.numerator}/{d.denominator}" for d in DEFAULT_MENU),
    "max_passes": DEFAULT_MAX_PASSES,
    "a": ["15"],
    "variant": "selfsimilar",
    "mode": "episodes",
    "episodes": 1000,
    "depth_cap": 40,
    "step_cap": 10_000,
    "seed": 0,
    "threads": 1,
    "model": "all",
    "dist": "all",
    "op": "A",
}

DISTS = {
    "delta0": FiniteDistribution.delta(0),
    "delta1": FiniteDistribution.delta(1),
    "uniform01": FiniteDistribution.uniform([0, 1]),
}
BOX_OPS = {"A": ("A-star", op_A), "L": ("L-star", op_L), "H": ("H-star", op_H)}


class UsageError(Exception):
    pass


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _frac(s: str, name: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{name}: not a rational number: {s!r}") from None


def _menu(s: str) -> tuple:
    items = [x for x in str(s).split(",") if x.strip()]
    if not items:
        raise UsageError("step_menu: empty")
    menu = tuple(_frac(x.strip(), "step_menu") for x in items)
    if any(d <= 0 for d in menu):
        raise UsageError("step_menu: steps must be positive")
    return menu


def _model_config(o, variant=None) -> ModelConfig:
    try:
        return ModelConfig(
            variant=variant or o.variant,
            depth_cap=int(o.depth_cap),
            step_cap=int(o.step_cap),
            episodes=int(o.episodes),
            seed=int(o.seed),
            threads=int(o.threads),
        )
    except ValueError as exc:
        raise UsageError(f"config: {exc}") from None


def _sim_echo(cfg: ModelConfig) -> dict:
    # threads changes scheduling only, never results, so it stays out of reports
    return {
        "variant": cfg.variant,
        "depth_cap": cfg.depth_cap,
        "step_cap": cfg.step_cap,
        "episodes": cfg.episodes,
        "seed": cfg.seed,
    }


# -- subcommands ------------------------------------------------------------------


def cmd_certify(o) -> RunReport:
    grid = int(o.grid_size)
    if grid < 2:
        raise UsageError("grid_size: need at least 2 points")
    menu = _menu(o.step_menu)
    passes = int(o.max_passes)
    if passes < 0:
        raise UsageError("max_passes: must be nonnegative")

    def tick(n, u):
        if n % 20 == 0 or n == passes:
            _progress(f"pass {n}: rate {float(u):.6f}")

    cert = run_certificate(grid - 1, menu, passes, progress=tick)
    if o.certificate:
        Path(o.certificate).write_text(cert.to_json() + "\n")
    results = {
        "passes": cert.passes,
        "final_rate": cert.final_rate,
        "final_rate_float": float(cert.final_rate),
        "reaches_target": cert.reaches(),
        "target_rate": TARGET_RATE,
        "step_counts": {
            f"{d.numerator}/{d.denominator}": sum(1 for s in cert.steps if s.delta == d) for d in cert.step_menu
        },
        "overlap_rejections": list(cert.overlap_rejections),
        "certificate": cert.as_dict(),
    }
    config = {"grid_size": grid, "step_menu": list(menu), "max_passes": passes}
    return RunReport("certify", config, results, cert.reaches())


def _load_certificate(path) -> Certificate:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificate {path}: {exc}") from None
    if isinstance(doc, dict) and "results" in doc and "certificate" in doc["results"]:
        doc = doc["results"]["certificate"]
    return Certificate.from_dict(doc)


def cmd_verify(o) -> RunReport:
    try:
        cert = _load_certificate(o.path)
        ok, where, reason = check_certificate(cert)
    except CertificateError as exc:
        return RunReport("verify", {"path": str(o.path)}, {"ok": False, "reason": str(exc)}, False)
    reaches = cert.final_rate >= TARGET_RATE
    results = {
        "steps_ok": ok,
        "first_failing_step": where,
        "reason": reason,
        "final_rate": cert.final_rate,
        "reaches_target": reaches,
    }
    return RunReport("verify", {"path": str(o.path)}, results, ok and reaches)


def cmd_bounds(o) -> RunReport:
    rates = [_frac(a, "a") for a in o.a]
    out = {}
    ok = True
    for a in rates:
        if a < bounds.MIN_RATE:
            raise UsageError(f"a: {a} is below {bounds.MIN_RATE}")
        entry = {"psi_dominates_A": bounds.psi_dominates_A(a)}
        if a >= 15:
            regions = bounds.region_constants(a)
            entry["regions"] = [r.as_dict() for r in regions]
            lhs, rhs, ps_ok = bounds.psbound_check(a)
            entry["psbound"] = {"lhs": lhs, "rhs": rhs, "verdict": ps_ok}
            entry["eps_step"] = bounds.eps_step_check(a)
            checks = [r.verdict for r in regions] + [r.matches_reference for r in regions if r.matches_reference is not None]
            checks += [ps_ok, entry["eps_step"]]
        else:
            checks = []
        checks.append(entry["psi_dominates_A"])
        entry["verdict"] = all(checks)
        ok &= entry["verdict"]
        out[f"{a.numerator}/{a.denominator}"] = entry
    return RunReport("bounds", {"a": rates}, {"rates": out}, ok)


def _within(est, se, target, k=SIGMA_BOUND) -> bool:
    return bool(abs(est - target) <= k * se)


def cmd_simulate(o) -> RunReport:
    cfg = _model_config(o)
    mode = o.mode
    if mode == "episodes":
        outs = run_batch(cfg)
        if o.csv:
            Path(o.csv).write_text(outcomes_to_csv(outs, cfg.variant))
        results = batch_summary(outs, cfg)
        return RunReport("simulate", {**_sim_echo(cfg), "mode": mode}, results, True)
    if mode == "hit":
        res, ok = {}, True
        for n, target in ((1, Fraction(4, 9)), (2, Fraction(3, 8))):
            e = estimate_hit_prob(n, cfg)
            within = _within(e.estimate, e.stderr, target)
            res[str(n)] = {
                "estimate": e.estimate,
                "stderr": e.stderr,
                "expected": target,
                "walks": e.n,
                "truncated": e.truncated,
                "within_4_sigma": within,
            }
            ok &= within
        return RunReport("simulate", {**_sim_echo(cfg), "mode": mode}, {"hit": res}, ok)
    if mode == "phi":
        t = estimate_phi_transitions(cfg, depths=(1, 2, 3))
        res, ok = {"first_up": {}, "up_after_up": {}}, True
        for n, est in t.first_up.items():
            target = Fraction(1, 3) if n % 2 else Fraction(1, 4)
            w = _within(est, t.first_up_se[n], target)
            res["first_up"][str(n)] = {"estimate": est, "stderr": t.first_up_se[n], "expected": target, "within_4_sigma": w}
            ok &= w
        for n, est in t.up_after_up.items():
            target = Fraction(1, 2) if n % 2 else Fraction(1, 3)
            w = _within(est, t.up_after_up_se[n], target)
            res["up_after_up"][str(n)] = {"estimate": est, "stderr": t.up_after_up_se[n], "expected": target, "within_4_sigma": w}
            ok &= w
        res["truncated"] = {str(k): v for k, v in t.truncated.items()}
        return RunReport("simulate", {**_sim_echo(cfg), "mode": mode}, res, ok)
    if mode == "coupled":
        res = run_coupled_batch(cfg)
        ok = res["subset_violations"] == 0 and res["order_violations"] == 0 and res["exclusion_rate"] < MAX_EXCLUSION
        return RunReport("simulate", {**_sim_echo(cfg), "mode": mode}, res, ok)
    raise UsageError(f"mode: unknown {mode!r}")


def oracle_compare(model_key: str, dist_key: str, points: int = 11) -> dict:
    model, op = BOX_OPS[model_key]
    U = DISTS[dist_key]
    law = enumerate_box_model(model, U)
    handle = pgf_handle(U)
    rows, ok, max_w = [], True, 0.0
    for k in range(points):
        x = Fraction(k, points - 1)
        iv = op(handle, iv_const(x))
        exact = pgf_exact(law, x)
        inside = iv_contains(iv, exact)
        max_w = max(max_w, iv.hi - iv.lo)
        ok &= inside
        rows.append({"x": x, "exact": exact, "enclosure": iv, "inside": inside})
    return {"law": law.as_dict(), "points": rows, "max_width": max_w, "verdict": ok}


def cmd_oracle(o) -> RunReport:
    models = list(BOX_OPS) if o.model == "all" else [o.model]
    dists = list(DISTS) if o.dist == "all" else [o.dist]
    for m in models:
        if m not in BOX_OPS:
            raise UsageError(f"model: unknown {m!r}; choose from {sorted(BOX_OPS)} or all")
    for d in dists:
        if d not in DISTS:
            raise UsageError(f"dist: unknown {d!r}; choose from {sorted(DISTS)} or all")
    res = {}
    for m in models:
        for d in dists:
            _progress(f"enumerating {m} with {d}")
            res[f"{m}/{d}"] = oracle_compare(m, d)
    ok = all(r["verdict"] for r in res.values())
    return RunReport("oracle", {"model": o.model, "dist": o.dist}, {"comparisons": res}, ok)


def cmd_eval(o) -> RunReport:
    grid = int(o.grid_size)
    if grid < 2:
        raise UsageError("grid_size: need at least 2 points")
    a = _frac(o.a[0], "a")
    xs = bounds.default_grid(grid - 1)
    if o.op == "psi":
        vals = bounds.psi(a, xs)
    else:
        op = {"A": op_A, "L": op_L, "H": op_H}.get(o.op)
        if op is None:
            raise UsageError(f"op: unknown {o.op!r}")
        vals = op(ExponentialPGF(a), xs)
    x_mid = np.asarray(xs.mid)
    res = {"x": x_mid, "lo": np.asarray(vals.lo), "hi": np.asarray(vals.hi)}
    return RunReport("eval", {"a": a, "op": o.op, "grid_size": grid}, res, True)


COMMANDS = {
    "certify": cmd_certify,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings (flags take precedence)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = argparse.ArgumentParser(prog="frogcert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", parents=[common], help="run the rate certificate")
    c.add_argument("--grid-size", type=int, default=None, help="number of grid points (default 257)")
    c.add_argument("--step-menu", default=None, help="comma-separated rationals (default 1/16,1/32,3/256)")
    c.add_argument("--max-passes", type=int, default=None)
    c.add_argument("--certificate", help="also write the bare certificate JSON here")

    v = sub.add_parser("verify", parents=[common], help="re-check a certificate file")
    v.add_argument("path")

    b = sub.add_parser("bounds", parents=[common], help="region constants and envelope checks")
    b.add_argument("--a", action="append", default=None, help="rate (repeatable)")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo runs")
    s.add_argument("--mode", choices=["episodes", "hit", "phi", "coupled"], default=None)
    s.add_argument("--variant", choices=VARIANTS, default=None)
    s.add_argument("--episodes", type=int, default=None)
    s.add_argument("--depth-cap", type=int, default=None)
    s.add_argument("--step-cap", type=int, default=None)
    s.add_argument("--csv", help="per-episode CSV (episodes mode)")

    r = sub.add_parser("oracle", parents=[common], help="box-model enumeration vs operators")
    r.add_argument("--model", default=None, help="A, L, H or all")
    r.add_argument("--dist", default=None, help="delta0, delta1, uniform01 or all")

    e = sub.add_parser("eval", parents=[common], help="operator values on the grid")
    e.add_argument("--op", choices=["A", "L", "H", "psi"], default=None)
    e.add_argument("--a", action="append", default=None)
    e.add_argument("--grid-size", type=int, default=None)
    return p


def _resolve(ns: argparse.Namespace) -> argparse.Namespace:
    file_cfg = {}
    if ns.config:
        try:
            file_cfg = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config: cannot read {ns.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config: top level must be an object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
    for key, default in DEFAULTS.items():
        if getattr(ns, key, None) is None:
            val = file_cfg.get(key, default)
            if key == "a" and not isinstance(val, list):
                val = [val]
            setattr(ns, key, val)
    if key_a := getattr(ns, "a", None):
        ns.a = [str(x) for x in key_a]
    return ns


def dispatch(argv) -> tuple[int, RunReport | None]:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2) or 0, None
    try:
        ns = _resolve(ns)
        t0 = time.perf_counter()
        report = COMMANDS[ns.command](ns)
        report.wall_time = time.perf_counter() - t0
    except UsageError as exc:
        print(f"frogcert {ns.command}: {exc}", file=sys.stderr)
        return 2, None
    if ns.out:
        emit_report(report, ns.out, timing=ns.timing)
    else:
        sys.stdout.write(dumps(report, timing=ns.timing))
    _progress(f"{ns.command}: {'pass' if report.verdict else 'fail'} ({report.wall_time:.1f}s)")
    return (0 if report.verdict else 1), report


def main(argv=None) -> int:
    code, _ = dispatch(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
