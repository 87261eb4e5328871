"""Command-line front door.

Subcommands
-----------
bound     closed-form report: regime, sum-SDoF bound, optimal plan,
          constraint status, antenna threshold.
plan      optimal phase plan details for one antenna configuration.
verify    run the numeric verification suites (rank oracles, replay,
          causality audit, leakage slope, noiseless decode) for one
          configuration; nonzero exit on any failure.
simulate  Monte Carlo decode MSE over an SNR list.
sweep     one CSV row per M: bound, plan, rank checks, leakage and MSE
          slopes; deterministic under --master-seed.

SNR convention: symbols are unit-variance, so snr = 1 / noise_power.
Tolerances can be overridden with the environment variables
XSDOF_RANK_REL_TOL, XSDOF_SLOPE_TOL, XSDOF_LEAKAGE_SLOPE_TOL or the
corresponding --rank-tol/--slope-tol/--leakage-tol flags.

Exit codes: 0 all checks pass, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import analysis, decoder, params, precoding, scheme
from .channel import generate_trace
from .numerics import ToleranceConfig, spawn_seeds
from .params import AntennaConfig, PhasePlan, Regime

__all__ = ["main", "run_verification", "mse_curve", "loglog_slope"]

NOISELESS_MSE_LIMIT = 1e-18
REPLAY_LIMIT = 1e-9


def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _plan_dict(plan: PhasePlan) -> dict:
    return {
        "tau1": _fraction_str(plan.tau1),
        "tau2": _fraction_str(plan.tau2),
        "tau3": _fraction_str(plan.tau3),
        "tau4": _fraction_str(plan.tau4),
        "scale": plan.scale,
        "slots": list(plan.integerized().as_ints()),
    }


# ---------------------------------------------------------------------------
# Monte Carlo harness


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log10(y) against log10(x)."""
    lx = np.log10(np.asarray(xs, dtype=float))
    ly = np.log10(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def mse_curve(
    cfg: AntennaConfig,
    plan: PhasePlan,
    snrs,
    trials: int,
    master_seed: int = 0,
    tol_cfg: ToleranceConfig | None = None,
) -> list[float]:
    """Average decode MSE at each SNR over `trials` independent runs.

    One channel/precoder/symbol draw per trial (seeds fanned out from the
    master seed); the noiseless run is shared across SNR points and only
    the noise is redrawn, which is exact because transmit signals never
    depend on receiver noise.
    """
    plan = plan.integerized()
    total = int(plan.total_duration())
    sums = np.zeros(len(snrs))
    seeds = spawn_seeds(master_seed, trials)
    for trial, seed in enumerate(seeds):
        trace = generate_trace(cfg, total, seed)
        pc = precoding.generate_precoders(plan, cfg, seed)
        sy = scheme.generate_symbols(plan, cfg, seed)
        record = scheme.run_scheme(trace, pc, sy, plan, noise_power=0.0)
        if trace.audit.violations():
            raise RuntimeError("delayed-CSI violation during Monte Carlo run")
        for k, snr in enumerate(snrs):
            noisy = scheme.with_noise(record, 1.0 / snr, noise_seed=(seed, k))
            sums[k] += decoder.decode(noisy, tol_cfg).mse
    return list(sums / trials)


# ---------------------------------------------------------------------------
# Verification suites


def run_verification(
    cfg: AntennaConfig,
    seeds: int = 10,
    tau1_override=None,
    tol_cfg: ToleranceConfig | None = None,
) -> dict:
    """Run all verification suites for one configuration.

    Returns a JSON-ready summary: per-suite pass flags and details.  The
    plan is the optimal one unless tau1_override replaces the AN duration.
    """
    tol = tol_cfg or ToleranceConfig.from_env()
    plan = params.optimal_phase_plan(cfg)
    if tau1_override is not None:
        plan = params.phase_plan(tau1_override, plan.tau2, plan.tau3, plan.tau4)
    plan = plan.integerized()
    total = int(plan.total_duration())
    suites: dict[str, dict] = {}

    # rank oracles: numeric ranks against the closed forms, every seed
    mismatches = []
    leak_slopes = []
    for seed in range(seeds):
        trace = generate_trace(cfg, total, seed)
        pc = precoding.generate_precoders(plan, cfg, seed, tol)
        system = analysis.assemble_H1(trace, pc, plan)
        security = analysis.assemble_security(trace, pc, plan)
        from .numerics import numeric_rank

        got = (
            numeric_rank(system.h1, tol),
            numeric_rank(security.a, tol),
            numeric_rank(security.b, tol),
        )
        want = (
            analysis.rank_H1_formula(plan, cfg),
            analysis.rank_A_formula(plan, cfg),
            analysis.rank_B_formula(plan, cfg),
        )
        if got != want:
            mismatches.append({"seed": seed, "numeric": got, "formula": want})
        leak_slopes.append(analysis.leakage_prelog(security, tol_cfg=tol))
    suites["rank_oracles"] = {
        "passed": not mismatches,
        "mismatches": mismatches[:5],
        "seeds": seeds,
    }

    # replay + causality + noiseless decode on a fresh trace per seed
    replay_worst = 0.0
    causality_ok = True
    decode_worst = 0.0
    decode_errors = []
    for seed in range(seeds):
        trace = generate_trace(cfg, total, (seed, 99))
        pc = precoding.generate_precoders(plan, cfg, seed, tol)
        sy = scheme.generate_symbols(plan, cfg, seed)
        record = scheme.run_scheme(trace, pc, sy, plan, noise_power=0.0)
        noisy = scheme.with_noise(record, 1e-2, noise_seed=seed)
        replay_worst = max(replay_worst, scheme.replay_residual(record), scheme.replay_residual(noisy))
        causality_ok = causality_ok and not trace.audit.violations() and trace.audit.accesses
        for rec in (record, scheme.swap_roles(record)):
            try:
                decode_worst = max(decode_worst, decoder.decode(rec, tol).mse)
            except decoder.RankDeficiencyError as exc:
                decode_errors.append({"seed": seed, "error": str(exc)})
    suites["replay"] = {"passed": replay_worst < REPLAY_LIMIT, "worst_residual": replay_worst}
    suites["causality"] = {"passed": bool(causality_ok)}
    suites["noiseless_decode"] = {
        "passed": not decode_errors and decode_worst < NOISELESS_MSE_LIMIT,
        "worst_mse": decode_worst,
        "rank_failures": decode_errors[:5],
    }

    # leakage: the formula gap must be zero and the measured slope saturated
    gap = analysis.rank_A_formula(plan, cfg) - analysis.rank_B_formula(plan, cfg)
    measured = float(np.mean(leak_slopes))
    suites["leakage"] = {
        "passed": gap == 0 and all(abs(s) < tol.leakage_slope_tol for s in leak_slopes),
        "expected_prelog": gap,
        "measured_prelog": measured,
    }

    report = {
        "m": cfg.m,
        "n": cfg.n,
        "plan": _plan_dict(plan),
        "constraints_ok": bool(params.security_constraints_ok(plan, cfg)),
        "suites": suites,
        "passed": all(s["passed"] for s in suites.values()),
    }
    return report


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_bound(args) -> int:
    cfg = AntennaConfig(args.m, args.n)
    regime = params.classify_regime(cfg)
    bound = params.sdof_lower_bound(cfg)
    theta_n, argmax = params.antenna_threshold(args.n)
    out = {
        "m": cfg.m,
        "n": cfg.n,
        "regime": regime.value,
        "bound": _fraction_str(bound),
        "bound_decimal": float(bound),
        "threshold": theta_n,
        "best_m": argmax,
    }
    note = None
    if regime is Regime.SILENT:
        note = "keep both transmitters silent: any AN is immediately resolvable by the other receiver"
    elif regime is Regime.SATURATED:
        note = (
            "achieved by a single-pair scheme outside this simulator's scope; "
            "not simulated (switch off antennas down to M=2N to stay in scope)"
        )
    else:
        plan = params.optimal_phase_plan(cfg)
        out["plan"] = _plan_dict(plan)
        out["constraints"] = str(params.security_constraints_ok(plan, cfg))
    if note:
        out["note"] = note
    if args.json:
        print(json.dumps(out, indent=2))
        return 0
    print(f"antennas: M={cfg.m} per transmitter, N={cfg.n} per receiver")
    print(f"regime: {regime.value}")
    print(f"sum-SDoF lower bound: {out['bound']} = {out['bound_decimal']:.6f}")
    if "plan" in out:
        p = out["plan"]
        print(
            f"optimal plan: tau1={p['tau1']}, tau2={p['tau2']}, tau3={p['tau3']}, "
            f"tau4={p['tau4']} (scale L={p['scale']}, slots {p['slots']})"
        )
        print(f"security constraints: {out['constraints']}")
    if note:
        print(f"note: {note}")
    print(f"threshold: theta*N = {theta_n:.6f}; best integer M in (N, 2N] is {argmax}")
    return 0


def _cmd_plan(args) -> int:
    cfg = AntennaConfig(args.m, args.n)
    try:
        plan = params.optimal_phase_plan(cfg)
    except params.RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    info = _plan_dict(plan)
    info["total_slots"] = int(plan.integerized().total_duration())
    info["sdof"] = _fraction_str(params.scheme_sdof(plan, cfg))
    info["constraints"] = str(params.security_constraints_ok(plan, cfg))
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        print(
            f"optimal plan for M={cfg.m}, N={cfg.n}: "
            f"tau1={info['tau1']}, tau2={info['tau2']}, tau3={info['tau3']}, tau4={info['tau4']}"
        )
        print(f"minimal integerization: L={info['scale']} -> slots {info['slots']} "
              f"({info['total_slots']} total)")
        print(f"delivered sum-SDoF: {info['sdof']}")
        print(f"security constraints: {info['constraints']}")
    return 0


def _cmd_verify(args) -> int:
    cfg = AntennaConfig(args.m, args.n)
    if not cfg.n < cfg.m <= 2 * cfg.n:
        print("error: verify requires N < M <= 2N", file=sys.stderr)
        return 2
    tol = _tolerances(args)
    report = run_verification(cfg, seeds=args.seeds, tau1_override=args.tau1, tol_cfg=tol)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"verification for M={cfg.m}, N={cfg.n}, plan slots {report['plan']['slots']}, "
              f"{args.seeds} seeds")
        for name, suite in report["suites"].items():
            status = "pass" if suite["passed"] else "FAIL"
            extra = ""
            if name == "leakage":
                extra = (f" (measured prelog {suite['measured_prelog']:.3f}, "
                         f"formula gap {suite['expected_prelog']})")
            if name == "rank_oracles" and suite["mismatches"]:
                first = suite["mismatches"][0]
                extra = f" (e.g. seed {first['seed']}: numeric {first['numeric']} vs formula {first['formula']})"
            print(f"  {name}: {status}{extra}")
        print("all suites passed" if report["passed"] else "verification FAILED")
    return 0 if report["passed"] else 1


def _cmd_simulate(args) -> int:
    cfg = AntennaConfig(args.m, args.n)
    try:
        plan = params.optimal_phase_plan(cfg)
    except params.RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    tol = _tolerances(args)
    mses = mse_curve(cfg, plan, args.snr, args.trials, args.master_seed, tol)
    slope = loglog_slope(args.snr, mses) if len(args.snr) > 1 else None
    if args.json:
        print(json.dumps({
            "m": cfg.m, "n": cfg.n, "trials": args.trials,
            "snr": args.snr, "mse": mses, "slope": slope,
        }, indent=2))
        return 0
    print(f"decode MSE for M={cfg.m}, N={cfg.n} ({args.trials} trials/point, "
          f"master seed {args.master_seed})")
    for snr, mse in zip(args.snr, mses):
        print(f"  snr {snr:>12.4g}: mse {mse:.6e}")
    if slope is not None:
        print(f"log-log slope: {slope:.4f} (expected -1)")
    return 0


SWEEP_FIELDS = [
    "m", "n", "ratio", "regime", "bound", "bound_decimal",
    "tau1", "tau2", "tau3", "tau4", "scale",
    "rank_checks", "leakage_slope", "mse_slope", "note",
]


def _sweep_row(m, n, snrs, trials, seeds, master_seed, tol) -> dict:
    cfg = AntennaConfig(m, n)
    regime = params.classify_regime(cfg)
    bound = params.sdof_lower_bound(cfg)
    row = {
        "m": m,
        "n": n,
        "ratio": f"{m / n:.6f}",
        "regime": regime.value,
        "bound": _fraction_str(bound),
        "bound_decimal": f"{float(bound):.6f}",
        "tau1": "", "tau2": "", "tau3": "", "tau4": "", "scale": "",
        "rank_checks": "", "leakage_slope": "", "mse_slope": "",
        "note": "",
    }
    if regime is Regime.SILENT:
        row["note"] = "silent"
        return row
    if regime is Regime.SATURATED:
        row["note"] = "not simulated (single-pair scheme regime)"
        return row
    plan = params.optimal_phase_plan(cfg)
    row.update({k: _fraction_str(v) for k, v in
                zip(("tau1", "tau2", "tau3", "tau4"), plan.taus)})
    row["scale"] = str(plan.scale)
    iplan = plan.integerized()
    total = int(iplan.total_duration())
    from .numerics import numeric_rank

    ok = True
    slopes = []
    for seed in spawn_seeds((master_seed, m), seeds):
        trace = generate_trace(cfg, total, seed)
        pc = precoding.generate_precoders(iplan, cfg, seed, tol)
        system = analysis.assemble_H1(trace, pc, iplan)
        security = analysis.assemble_security(trace, pc, iplan)
        ok = ok and (
            numeric_rank(system.h1, tol) == analysis.rank_H1_formula(iplan, cfg)
            and numeric_rank(security.a, tol) == analysis.rank_A_formula(iplan, cfg)
            and numeric_rank(security.b, tol) == analysis.rank_B_formula(iplan, cfg)
        )
        slopes.append(analysis.leakage_prelog(security, tol_cfg=tol))
    row["rank_checks"] = "pass" if ok else "fail"
    row["leakage_slope"] = f"{float(np.mean(slopes)):.6f}"
    mses = mse_curve(cfg, iplan, snrs, trials, (master_seed, m, 1), tol)
    row["mse_slope"] = f"{loglog_slope(snrs, mses):.6f}" if len(snrs) > 1 else ""
    return row


def _cmd_sweep(args) -> int:
    m_min = args.m_min if args.m_min is not None else args.n + 1
    m_max = args.m_max if args.m_max is not None else 2 * args.n
    if m_min > m_max:
        print("error: empty M range", file=sys.stderr)
        return 2
    tol = _tolerances(args)
    rows = [
        _sweep_row(m, args.n, args.snr, args.trials, args.seeds, args.master_seed, tol)
        for m in range(m_min, m_max + 1)
    ]
    try:
        out = open(args.out, "w", newline="")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    with out:
        writer = csv.DictWriter(out, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _tolerances(args) -> ToleranceConfig:
    tol = ToleranceConfig.from_env()
    overrides = {}
    if getattr(args, "rank_tol", None) is not None:
        overrides["rank_rel_tol"] = args.rank_tol
    if getattr(args, "slope_tol", None) is not None:
        overrides["slope_tol"] = args.slope_tol
    if getattr(args, "leakage_tol", None) is not None:
        overrides["leakage_slope_tol"] = args.leakage_tol
    return replace(tol, **overrides) if overrides else tol


def _add_antennas(p):
    p.add_argument("--m", type=int, required=True, help="transmit antennas per transmitter")
    p.add_argument("--n", type=int, required=True, help="receive antennas per receiver")


def _add_tolerance_flags(p):
    p.add_argument("--rank-tol", type=float, help="relative singular value cutoff for numeric rank")
    p.add_argument("--slope-tol", type=float, help="allowed deviation of the MSE slope from -1")
    p.add_argument("--leakage-tol", type=float, help="allowed saturated leakage growth per log2-SNR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xsdof",
        description="Secure degrees-of-freedom laboratory for the two-user MIMO X channel "
                    "with delayed CSIT (snr = 1/noise_power, unit-variance symbols).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="closed-form bound, plan, and threshold report")
    _add_antennas(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("plan", help="optimal phase plan for one configuration")
    _add_antennas(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("verify", help="numeric verification suites; nonzero exit on failure")
    _add_antennas(p)
    p.add_argument("--seeds", type=int, default=10, help="independent channel draws per suite")
    p.add_argument("--tau1", type=int, help="override the AN phase duration")
    p.add_argument("--json", action="store_true")
    _add_tolerance_flags(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo decode MSE over an SNR list")
    _add_antennas(p)
    p.add_argument("--snr", type=float, nargs="+", default=[1e2, 1e3, 1e4, 1e5, 1e6])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    _add_tolerance_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="CSV of bounds and checks over an M range")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-min", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--snr", type=float, nargs="+", default=[1e2, 1e4, 1e6])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seeds", type=int, default=3, help="channel draws for the rank checks")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    _add_tolerance_flags(p)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; normalize other exits
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (ValueError, params.RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
