"""Command-line entry point: ``pinchcovert {solve,sweep,verify,detect}``.

Exit codes: 0 success, 1 infeasible, 2 config/validation error,
3 oracle failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import Config, ConfigError, load_config
from .detection import (
    UncertaintyRegionError,
    channel_gain_eve_ground,
    dep_false_alarm,
    dep_miss,
    detection_report,
    optimal_detection,
)
from .geometry import link_distances
from .oracle import verify_delta3_variants, verify_lemma1, verify_monte_carlo, verify_p1
from .optimizer import solve_ao
from .sweep import SWEEP_UNITS, load_sweep, rows_to_csv, run_sweep

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_ORACLE, EXIT_IO = 0, 1, 2, 3, 4


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *parts):
        if not self.quiet:
            print(*parts)


def _load(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _ensure_writable_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(dir=path):
        pass


def cmd_solve(args, out: _Out) -> int:
    cfg = _load(args)
    system = cfg.to_system()
    res = solve_ao(system, tol=cfg.ao_tol, max_iter=cfg.ao_max_iter)
    p0 = f"{res.p0_dbm:.6f} dBm" if res.feasible and res.p0_opt > 0 else "-"
    out(f"feasible          : {res.feasible}")
    out(f"P0*               : {p0}")
    out(f"x_TPA*            : {res.tpa_x_opt:.6f} m")
    out(f"rate              : {res.rate:.6f} bits/s")
    out(f"binding constraint: {res.binding_constraint.value}")
    out(f"iterations        : {res.iterations}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["p0_opt_dbm", "tpa_x_m", "rate_bps", "feasible", "binding_constraint", "iterations"])
            w.writerow([
                repr(res.p0_dbm) if res.feasible and res.p0_opt > 0 else "",
                repr(res.tpa_x_opt), repr(res.rate),
                "true" if res.feasible else "false",
                res.binding_constraint.value, res.iterations,
            ])
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_sweep(args, out: _Out) -> int:
    cfg = _load(args)
    spec = load_sweep(args.sweep)
    out_dir = Path(args.out or ".")
    _ensure_writable_dir(out_dir)
    rows = run_sweep(cfg, spec, workers=args.workers)
    csv_path = out_dir / f"{spec.name}.csv"
    csv_path.write_bytes(rows_to_csv(rows).encode("utf-8"))
    svg_path = out_dir / f"{spec.name}.svg"
    from .plotting import plot_csv

    unit = SWEEP_UNITS[spec.variable]
    plot_csv(csv_path, svg_path, xlabel=f"{spec.variable} ({unit})" if unit else spec.variable)
    out(f"wrote {csv_path} ({len(rows)} rows) and {svg_path}")
    return EXIT_OK


def cmd_verify(args, out: _Out) -> int:
    cfg = _load(args)
    n = cfg.mc_samples if args.mc_samples is None else args.mc_samples
    if n < 1:
        raise ConfigError(f"Monte-Carlo sample count must be >= 1, got {n}")
    if args.printed_delta3:
        cfg = cfg.replace(delta3_form="printed")
    system = cfg.to_system()
    ao = solve_ao(system, tol=cfg.ao_tol, max_iter=cfg.ao_max_iter)

    verdicts = []
    report = _detection_at(system, ao.p0_opt if ao.feasible else system.power.p_max,
                           ao.tpa_x_opt if ao.feasible else system.scenario.layout.tpa_x)
    if report is not None:
        verdicts.append(verify_lemma1(report.delta1, report.delta2, system.noise))
        m = system.noise
        optimal = optimal_detection(report.delta1, report.delta2, m).threshold
        # mid-support threshold exercises both interior branches
        mid = 0.5 * (m.x_lo + m.x_hi + report.delta1 + report.delta2)
        for gamma in (optimal, mid):
            verdicts.extend(verify_monte_carlo(gamma, report.delta1, report.delta2, m, n, cfg.seed))
    verdicts.append(verify_p1(system, ao=ao))
    for v in verdicts:
        out(v.line())
    d3 = verify_delta3_variants(system)
    out(f"[{'PASS' if d3.passed else 'FAIL'}] delta3 ({d3.selected_form} form in use, P0 = {d3.p0:.6g} W)")
    for line in d3.lines():
        out(line)
    ok = all(v.passed for v in verdicts) and d3.passed
    return EXIT_OK if ok else EXIT_ORACLE


def _detection_at(system, p0, tpa_x):
    """Detection report for Eve at her estimated location with the nominal gain."""
    sc = system.scenario.with_tpa(tpa_x)
    d = link_distances(sc)
    eve_gain = float(channel_gain_eve_ground(d.d_b_e_est, system.eve.g_est, system.rf))
    worst = system.worst_gain
    if not np.isfinite(worst):
        return None
    return detection_report(p0, d.d_pT_e_est, d.d_pT_b, eve_gain, worst, system.power, system.rf, system.noise)


def cmd_detect(args, out: _Out) -> int:
    cfg = _load(args)
    system = cfg.to_system()
    if args.points < 2:
        raise ConfigError("--points must be >= 2")
    report = _detection_at(system, system.power.p0, system.scenario.layout.tpa_x)
    if report is None:
        raise UncertaintyRegionError("eavesdropper uncertainty region contains the device")
    for f in dataclasses.fields(report):
        out(f"{f.name:20s}: {getattr(report, f.name)!r}")
    m = system.noise
    lo, hi = m.x_lo + report.delta1, m.x_hi + report.delta2
    pad = 0.05 * (hi - lo)
    gammas = np.linspace(lo - pad, hi + pad, args.points)
    pf = dep_false_alarm(gammas, report.delta1, m)
    pm = dep_miss(gammas, report.delta2, m)
    rows = [["gamma_w", "p_false_alarm", "p_miss", "p_total"]]
    rows += [[repr(float(g)), repr(float(a)), repr(float(b)), repr(float(a + b))] for g, a, b in zip(gammas, pf, pm)]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\r\n").writerows(rows)
    else:
        for r in rows:
            out(",".join(r))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (key = value); defaults used when omitted")
    common.add_argument("--out", help="output file (solve/detect) or directory (sweep)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--quiet", action="store_true", help="suppress normal output")

    p = argparse.ArgumentParser(prog="pinchcovert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("solve", parents=[common], help="AO solve of one scenario")
    s = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV + SVG")
    s.add_argument("--sweep", required=True, help="sweep spec file")
    s.add_argument("--workers", type=int, default=1)
    v = sub.add_parser("verify", parents=[common], help="run the brute-force oracles")
    v.add_argument("--mc-samples", type=int, help="Monte-Carlo draws (default: config mc_samples)")
    v.add_argument("--printed-delta3", action="store_true", help="force the printed Delta3 form")
    d = sub.add_parser("detect", parents=[common], help="DEP tables versus threshold")
    d.add_argument("--points", type=int, default=21)
    return p


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify, "detect": cmd_detect}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args.quiet)
    try:
        return COMMANDS[args.cmd](args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
