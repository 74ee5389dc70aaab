"""Command-line front end: single runs, rate-region sweeps, policy comparisons.

Exit codes: 0 success, 2 invalid configuration or scenario, 3 runtime
failure.  All outputs are deterministic in the flags, so repeated
invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .policy import PolicyConfig
from .scenarios import Scenario, ScenarioError, resolve_scenario, with_rates
from .sim import SimulationTrace, classify_stability, compare_policies, run, sweep_region

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_POLICY_CHOICES = ("mw", "lpnc", "qpnc")


class _CliError(Exception):
    """Configuration problem surfaced to the user with exit code 2."""


def _policy_config(kind: str, horizon: int, tau_hard: int | None, all_hard: bool) -> PolicyConfig:
    if kind == "mw":
        return PolicyConfig(kind="maxweight")
    if horizon < 1:
        raise _CliError("--horizon must be at least 1")
    tau = horizon if all_hard else tau_hard
    if tau is None:
        tau = min(2, horizon)
    if not 1 <= tau <= horizon:
        raise _CliError(f"--tau-hard {tau} out of range 1..{horizon}")
    return PolicyConfig(kind=kind, horizon=horizon, tau_hard=tau)


def _load(args, rate_overrides: bool = True) -> Scenario:
    scenario = resolve_scenario(args.scenario,
                                alternating=getattr(args, "alternating", False),
                                phase_offset=getattr(args, "phase_offset", 0))
    if rate_overrides:
        a1 = getattr(args, "a1", None)
        a2 = getattr(args, "a2", None)
        if a1 is not None or a2 is not None:
            scenario = with_rates(scenario, a1, a2)
    return scenario


def _write_trace_csv(path: str, trace: SimulationTrace, n: int, m: int) -> None:
    header = (["t", "sigma"]
              + [f"q_{i + 1}" for i in range(n)]
              + [f"u_{j + 1}" for j in range(m)]
              + [f"s_{j + 1}" for j in range(m)]
              + [f"a_{i + 1}" for i in range(n)])
    lines = [",".join(header)]
    for t in range(trace.length):
        row = ([t, trace.sigmas[t]]
               + list(trace.queues[t]) + list(trace.controls[t])
               + list(trace.link_success[t]) + list(trace.arrivals[t]))
        lines.append(",".join(str(int(v)) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(value: float) -> str:
    return str(float(value))


def cmd_simulate(args) -> int:
    scenario = _load(args)
    cfg = _policy_config(args.policy, args.horizon, args.tau_hard, args.all_hard)
    trace = run(scenario.spec, cfg, args.slots, args.seed,
                q0=scenario.initial_queue, sigma0=scenario.initial_sigma)
    summary: dict = {
        "avg_queue": [float(v) for v in trace.avg_queue],
        "final_queue": [int(v) for v in trace.final_queue],
    }
    if trace.length >= 200:
        verdict = classify_stability(trace)
        summary["slope"] = verdict.slope
        summary["stable"] = verdict.stable
    else:
        summary["slope"] = None
        summary["stable"] = None
    if args.out:
        _write_trace_csv(args.out, trace, scenario.spec.n, scenario.spec.m)
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_range(text: str, flag: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _CliError(f"{flag} expects min:max:step, got {text!r}")
    try:
        lo, hi, step = (float(v) for v in parts)
    except ValueError as exc:
        raise _CliError(f"{flag}: {exc}") from exc
    if step <= 0:
        raise _CliError(f"{flag}: step must be positive")
    if hi < lo - 1e-12:
        raise _CliError(f"{flag}: empty range {text!r}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(count)]


def cmd_sweep(args) -> int:
    scenario = _load(args, rate_overrides=False)
    cfg = _policy_config(args.policy, args.horizon, args.tau_hard, args.all_hard)
    a1_vals = _parse_range(args.a1, "--a1")
    a2_vals = _parse_range(args.a2, "--a2")
    grid = [(a1, a2) for a1 in a1_vals for a2 in a2_vals]
    result = sweep_region(scenario.spec, cfg, grid, args.slots, range(args.seeds),
                          q0=scenario.initial_queue, sigma0=scenario.initial_sigma)
    lines = ["a1,a2,stable_fraction,stable"]
    for a1, a2 in grid:
        point = result[(a1, a2)]
        lines.append(f"{_fmt(a1)},{_fmt(a2)},{_fmt(point.stable_fraction)},{int(point.stable)}")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _parse_policies(text: str, tau_hard: int | None, all_hard: bool) -> list[PolicyConfig]:
    cfgs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise _CliError("--policies contains an empty entry")
        kind, _, horizon_text = item.partition(":")
        if kind not in _POLICY_CHOICES:
            raise _CliError(f"unknown policy {kind!r}; expected one of {_POLICY_CHOICES}")
        if horizon_text:
            try:
                horizon = int(horizon_text)
            except ValueError as exc:
                raise _CliError(f"bad horizon in {item!r}") from exc
        else:
            horizon = 1 if kind == "mw" else 2
        cfgs.append(_policy_config(kind, horizon, tau_hard, all_hard))
    return cfgs


def cmd_compare(args) -> int:
    scenario = _load(args)
    cfgs = _parse_policies(args.policies, args.tau_hard, args.all_hard)
    rows = compare_policies(scenario.spec, cfgs, args.slots, range(args.seeds),
                            q0=scenario.initial_queue, sigma0=scenario.initial_sigma)
    lines = ["policy,horizon,buffer,avg_queue"]
    for row in rows:
        lines.append(f"{row['policy']},{row['horizon']},{row['buffer']},{_fmt(row['avg_queue'])}")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True,
                   help="path to a scenario JSON file, or builtin:generic / builtin:natural")
    p.add_argument("--a1", type=float, default=None,
                   help="override buffer 1 arrival rate (packets per slot)")
    p.add_argument("--a2", type=float, default=None,
                   help="override buffer 2 arrival rate (packets per slot)")
    p.add_argument("--alternating", action="store_true",
                   help="use the alternating high/low arrival schedules (builtin:natural)")
    p.add_argument("--phase-offset", type=int, default=0,
                   help="shift the arrival schedules by this many slots")


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", required=True, choices=_POLICY_CHOICES)
    p.add_argument("--horizon", type=int, default=2, help="planning horizon (ignored for mw)")
    _add_tau_flags(p)


def _add_tau_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau-hard", type=int, default=None,
                   help="hard-constrained planning steps (default min(2, horizon))")
    p.add_argument("--all-hard", action="store_true",
                   help="hard constraints over the whole horizon")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pncsim",
        description="Simulate MaxWeight and receding-horizon control of stochastic packet networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    _add_scenario_flags(sim)
    _add_policy_flags(sim)
    sim.add_argument("--slots", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None, help="trace CSV path")
    sim.add_argument("--summary", default=None, help="summary JSON path (default: stdout)")
    sim.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("sweep", help="stability map over an arrival-rate grid")
    sweep.add_argument("--scenario", required=True)
    _add_policy_flags(sweep)
    sweep.add_argument("--a1", required=True, help="buffer 1 rate grid, min:max:step")
    sweep.add_argument("--a2", required=True, help="buffer 2 rate grid, min:max:step")
    sweep.add_argument("--slots", type=int, default=10000)
    sweep.add_argument("--seeds", type=int, default=5)
    sweep.add_argument("--out", required=True, help="region CSV path")
    sweep.set_defaults(func=cmd_sweep, alternating=False, phase_offset=0)

    comp = sub.add_parser("compare", help="paired-seed policy comparison")
    _add_scenario_flags(comp)
    comp.add_argument("--policies", required=True,
                      help="comma list of kind[:horizon], e.g. mw,qpnc:2,qpnc:3")
    _add_tau_flags(comp)
    comp.add_argument("--slots", type=int, default=2000)
    comp.add_argument("--seeds", type=int, default=10)
    comp.add_argument("--out", required=True, help="summary CSV path")
    comp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (_CliError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failures
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
