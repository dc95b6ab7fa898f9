"""Command-line front end: run scenarios, verify traces, sweep parameters.

Exit codes: 0 success; 2 config parse error or trace corruption;
3 scenario validation error, unknown sweep parameter, or empty sweep;
4 trace outcome mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional

from . import netsim, trace as trace_mod
from .errors import ConfigError, InvalidScenario
from .scenario import ScenarioConfig, canonical_text, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVALID = 3
EXIT_MISMATCH = 4

SWEEPABLE = {
    "n": ("committee_size", int),
    "f_min": ("quorum", int),
    "delta_net": ("delta_net_max_s", float),
    "t_prove": ("t_prove_s", float),
    "fraud_period": ("fraud_period", int),
    "b": ("adversary_count", int),
}


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _load_scenario(config_path: Optional[str], seed: Optional[int]) -> ScenarioConfig:
    config = ScenarioConfig() if config_path is None else load_config(config_path)
    if seed is not None:
        config = replace(config, seed=seed)
    return config


def _write_run_outputs(run_trace: netsim.RunTrace, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "config.txt"), run_trace.config_text)
    _atomic_write(os.path.join(out_dir, "trace.txt"), trace_mod.render_trace(run_trace))
    _atomic_write(os.path.join(out_dir, "epochs.csv"), trace_mod.render_csv(run_trace))
    summary = netsim.metrics(run_trace)
    _atomic_write(os.path.join(out_dir, "metrics.txt"), summary.to_text())


def cmd_run(config_path: Optional[str], out_dir: str, seed: Optional[int]) -> int:
    try:
        config = _load_scenario(config_path, seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config.validate()
        run_trace = netsim.run(config)
    except InvalidScenario as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write_run_outputs(run_trace, out_dir)
    summary = netsim.metrics(run_trace)
    print(f"ran {summary.epochs} epochs, {summary.accepted_epochs} accepted, "
          f"{summary.slash_count} slash events")
    print(f"outputs in {out_dir}: config.txt trace.txt epochs.csv metrics.txt")
    return EXIT_OK


def cmd_verify_trace(trace_path: str) -> int:
    check = trace_mod.verify_trace_file(trace_path)
    if check.ok:
        print("trace verified: all recorded outcomes match replay")
    else:
        for problem in check.problems:
            print(problem, file=sys.stderr)
    return check.exit_code


def cmd_sweep(
    config_path: Optional[str], parameter: str, values_text: str, out_dir: str
) -> int:
    if parameter not in SWEEPABLE:
        print(
            f"unknown sweep parameter {parameter!r}; "
            f"choose from {', '.join(sorted(SWEEPABLE))}",
            file=sys.stderr,
        )
        return EXIT_INVALID
    field, cast = SWEEPABLE[parameter]
    raw_values = [v.strip() for v in values_text.split(",") if v.strip()]
    if not raw_values:
        print("empty sweep value list", file=sys.stderr)
        return EXIT_INVALID
    try:
        values = [cast(v) for v in raw_values]
    except ValueError as exc:
        print(f"bad sweep value: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        base = _load_scenario(config_path, None)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    chains = tuple(base.chains)
    for value in values:
        config = replace(base, **{field: value})
        if parameter == "delta_net":
            config = replace(
                config, delta_net_min_s=min(config.delta_net_min_s, float(value))
            )
        try:
            config.validate()
            run_trace = netsim.run(config)
        except InvalidScenario as exc:
            print(f"invalid scenario at {parameter}={value}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        _write_run_outputs(run_trace, os.path.join(out_dir, f"{parameter}_{value}"))
        summary = netsim.metrics(run_trace)
        liveness = netsim.check_liveness(run_trace)
        gas_by_chain = {c: 0 for c in chains}
        for chain_id, _, total in summary.gas_totals:
            gas_by_chain[chain_id] += total
        rows.append(
            [
                parameter,
                str(value),
                str(summary.epochs),
                str(summary.accepted_epochs),
                str(summary.throughput_pps),
                "" if summary.mean_e2e_s is None else str(summary.mean_e2e_s),
                "" if summary.stdev_e2e_s is None else str(summary.stdev_e2e_s),
                str(summary.slash_count),
                ""
                if summary.mean_slash_latency_s is None
                else str(summary.mean_slash_latency_s),
                str(len(liveness.violations)),
            ]
            + [str(gas_by_chain[c]) for c in chains]
        )
        print(f"{parameter}={value}: {summary.accepted_epochs}/{summary.epochs} accepted")

    header = [
        "param",
        "value",
        "epochs",
        "accepted_epochs",
        "throughput_pps",
        "mean_e2e_s",
        "stdev_e2e_s",
        "slash_count",
        "mean_slash_latency_s",
        "liveness_violations",
    ] + [f"gas_{c}" for c in chains]
    csv_text = "\n".join([",".join(header)] + [",".join(row) for row in rows]) + "\n"
    _atomic_write(os.path.join(out_dir, "sweep.csv"), csv_text)
    print(f"sweep table written to {os.path.join(out_dir, 'sweep.csv')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vzor",
        description="Deterministic cross-chain oracle protocol simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario and write its outputs")
    run_p.add_argument("--config", help="scenario file; defaults are used when omitted")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")

    verify_p = sub.add_parser("verify-trace", help="re-check a recorded trace")
    verify_p.add_argument("trace", help="path to a trace.txt produced by run")

    sweep_p = sub.add_parser("sweep", help="run a scenario across parameter values")
    sweep_p.add_argument("--config", help="base scenario file")
    sweep_p.add_argument("--param", required=True, help="parameter to sweep")
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    sweep_p.add_argument("--out", required=True, help="output directory")

    sub.add_parser("print-config", help="print the default scenario")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed)
    if args.command == "verify-trace":
        return cmd_verify_trace(args.trace)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.param, args.values, args.out)
    if args.command == "print-config":
        sys.stdout.write(canonical_text(ScenarioConfig()))
        return EXIT_OK
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
