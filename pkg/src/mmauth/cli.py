"""Command line front end.

One subcommand per study plus ``serve`` for the HTTP facade.  Reports go to
stdout (or ``--out DIR`` as files with figures); threshold flags turn a run
into a CI gate: exit 0 when every gate holds, exit 2 when one does not.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import netsim
from .attacks import run_attack_suite
from .errors import MobileAuthError
from .harness import (DEFAULT_ATTEMPTS, LoadSpec, ScenarioSpec, compare_methods,
                      run_load, run_scenario, run_session_integrity)
from .report import FORMATS, build_payload, emit_report, render

GATE_EXIT = 2


def _apply_config(path: str | None) -> None:
    if path is None:
        return
    profiles, gsm = netsim.load_overrides(path)
    netsim.PROFILES.update(profiles)
    netsim.GSM_PROFILES.update(gsm)


def _emit(result, args) -> None:
    if args.out:
        path = emit_report(result, args.format, args.out)
        print(f"report written to {path}", file=sys.stderr)
    else:
        sys.stdout.write(render(build_payload(result), args.format))


def _gate(checks: list[tuple[str, bool]]) -> int:
    failed = False
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {label}", file=sys.stderr)
        failed = failed or not ok
    return GATE_EXIT if failed else 0


def _add_report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=[*FORMATS, "markdown-table"],
                   default="json", help="report format (default json)")
    p.add_argument("--out", metavar="DIR",
                   help="write the report and figures here instead of stdout")
    p.add_argument("--config", metavar="FILE",
                   help="JSON network-profile overrides")
    p.add_argument("--seed", type=int, default=1)


def cmd_scenario(args) -> int:
    spec = ScenarioSpec(method=args.method, profile=args.profile,
                        gsm=args.gsm, attempts=args.attempts, seed=args.seed)
    result = run_scenario(spec)
    _emit(result, args)
    checks = []
    if args.min_success is not None:
        rate = result.success_rate
        checks.append((f"success rate {rate:.4f} >= {args.min_success}",
                       rate >= args.min_success))
    return _gate(checks)


def cmd_compare(args) -> int:
    result = compare_methods(profile_name=args.profile, attempts=args.attempts,
                             seed=args.seed, gsm_name=args.gsm)
    _emit(result, args)
    checks = []
    if args.min_diff is not None:
        checks.append(
            (f"mean difference {result.mean_gap_s:.3f}s >= {args.min_diff}s",
             result.mean_gap_s >= args.min_diff))
    if args.max_p is not None:
        checks.append((f"p {result.summary.p_value:.3g} < {args.max_p}",
                       result.summary.p_value < args.max_p))
    return _gate(checks)


def cmd_integrity(args) -> int:
    result = run_session_integrity(sessions=args.sessions, seed=args.seed,
                                   gsm_name=args.gsm, profile_name=args.profile)
    _emit(result, args)
    checks = []
    if args.min_recovery is not None:
        checks.append(
            (f"recovery rate {result.recovery_rate:.4f} >= {args.min_recovery}",
             result.recovery_rate >= args.min_recovery))
    if args.max_reconnect is not None:
        checks.append(
            (f"mean reconnect {result.mean_reconnect_s:.3f}s <= {args.max_reconnect}s",
             result.mean_reconnect_s <= args.max_reconnect))
    return _gate(checks)


def cmd_load(args) -> int:
    spec = LoadSpec(users=args.users, ramp_s=args.ramp, sustain_s=args.sustain,
                    method=args.method, profile=args.profile, gsm=args.gsm,
                    seed=args.seed)
    result = run_load(spec)
    _emit(result, args)
    checks = []
    if args.max_error_rate is not None:
        checks.append(
            (f"error rate {result.error_rate:.4f} <= {args.max_error_rate}",
             result.error_rate <= args.max_error_rate))
    return _gate(checks)


def cmd_attack(args) -> int:
    result = run_attack_suite(seed=args.seed, quick=args.quick,
                              incidents=not args.no_incidents)
    _emit(result, args)
    checks = [(f"{o.name} ({'sensitivity' if o.sensitivity_check else o.stride})",
               o.passed) for o in result.outcomes]
    return _gate(checks)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app, load_fixture

    fixture = load_fixture(args.fixture) if args.fixture else None
    app = create_app(seed=args.seed, scale=args.scale,
                     cors_origins=args.cors_origin or None, fixture=fixture)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmauth",
        description="Mobile money authentication simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run one batch of login journeys")
    p.add_argument("--method", choices=["mma", "sso"], default="mma")
    p.add_argument("--profile", default="good")
    p.add_argument("--gsm", default="stable")
    p.add_argument("--attempts", type=int, default=DEFAULT_ATTEMPTS)
    p.add_argument("--min-success", type=float, default=None,
                   help="gate: minimum success rate")
    _add_report_flags(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("compare", help="approval flow vs password baseline")
    p.add_argument("--profile", default="good")
    p.add_argument("--gsm", default="stable")
    p.add_argument("--attempts", type=int, default=DEFAULT_ATTEMPTS)
    p.add_argument("--min-diff", type=float, default=None,
                   help="gate: minimum mean difference in seconds")
    p.add_argument("--max-p", type=float, default=None,
                   help="gate: maximum two-tailed p-value")
    _add_report_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("integrity",
                       help="session recovery under scheduled disruptions")
    p.add_argument("--sessions", type=int, default=10_000)
    p.add_argument("--gsm", default="intermittent")
    p.add_argument("--profile", default="good")
    p.add_argument("--min-recovery", type=float, default=None,
                   help="gate: minimum recovery rate")
    p.add_argument("--max-reconnect", type=float, default=None,
                   help="gate: maximum mean reconnect seconds")
    _add_report_flags(p)
    p.set_defaults(func=cmd_integrity)

    p = sub.add_parser("load", help="multi-user load run on virtual time")
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--ramp", type=float, default=60.0,
                   help="ramp-in window, seconds (default 60)")
    p.add_argument("--sustain", type=float, default=900.0,
                   help="sustain window, seconds (default 900)")
    p.add_argument("--method", choices=["mma", "sso"], default="mma")
    p.add_argument("--profile", default="good")
    p.add_argument("--gsm", default="stable")
    p.add_argument("--max-error-rate", type=float, default=None,
                   help="gate: maximum journey error rate")
    _add_report_flags(p)
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("attack", help="run the STRIDE attack suite")
    p.add_argument("--quick", action="store_true",
                   help="shrink the exhaustive loops")
    p.add_argument("--no-incidents", action="store_true",
                   help="skip the incident-rate study")
    _add_report_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("serve", help="run the HTTP facade on wall time")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--scale", type=float, default=1.0,
                   help="wall seconds per simulated second (default 1.0)")
    p.add_argument("--cors-origin", action="append", metavar="ORIGIN",
                   help="allowed browser origin; repeatable (default localhost)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--fixture", metavar="FILE",
                   help="JSON file of demo subscribers and accounts")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config(args.config)
        return args.func(args)
    except MobileAuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
