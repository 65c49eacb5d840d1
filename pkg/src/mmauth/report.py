"""Report rendering: JSON, CSV, markdown tables and PNG figures.

Every report embeds the calibration parameters and seeds that produced it,
states that it is simulator output, and contains no wall-clock timestamps,
so rendering the same result twice gives identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path
from typing import Union

from .attacks import (AttackSuiteResult, INCIDENT_CRED_THEFT_SUCCESS,
                      INCIDENT_SWAP_SUCCESS, INCIDENT_TARGETED_FRACTION)
from .auth import (MAX_LEG_RETRIES, MAX_SESSION_RECOVERIES, PENDING_LIFETIME_MS,
                   RATE_LIMIT_MAX, RATE_LIMIT_WINDOW_MS, TOKEN_ISSUE_MODEL,
                   TOKEN_LIFETIME_S)
from .errors import ConfigError
from .harness import (CompareResult, INTEGRITY_HORIZON_S, IntegrityResult,
                      LoadReport, MENU_SHARE, ScenarioResult, WORKERS)
from .mno import MAX_PIN_ATTEMPTS, PUSH_LATENCY_FACTOR
from .netsim import (GSM_PROFILES, PROFILES, RECONNECT_CAP_S, RECONNECT_MEAN_S)
from .sso import BASE_TIME_RANGE_S, OTP_ENTRY_MS, ROUND_TRIPS
from .ussd import PIN_ENTRY_MODEL

ReportSource = Union[ScenarioResult, CompareResult, IntegrityResult,
                     LoadReport, AttackSuiteResult]

FORMATS = ("json", "csv", "markdown")

_EXT = {"json": ".json", "csv": ".csv", "markdown": ".md"}

PROVENANCE = ("All values are outputs of a parameterized, seeded simulation; "
              "none are field measurements.")

INCIDENT_DEFINITION = ("security incident = a completed authentication "
                       "accepted for someone other than the enrolled user")

# Budgeted step means and measured means are different quantities: the budget
# ignores network legs, menu latency, retries and human variance.  Reports
# show both and leave the gap visible instead of calibrating it away.
TIMING_NOTE = ("nominal_step_total_s is the sum of configured step means; "
               "the empirical distribution includes everything the steps "
               "leave out and is reported unreconciled")


def nominal_step_budget_s() -> dict:
    """Per-step mean budget for the approval flow on a stable signaling path."""
    gsm = GSM_PROFILES["stable"]
    steps = {
        "ussd_push": PUSH_LATENCY_FACTOR * gsm.latency_ms_mean / 1000.0,
        "pin_entry": PIN_ENTRY_MODEL.mean_ms / 1000.0,
        "pin_verification": gsm.latency_ms_mean / 1000.0,
        "token_issue": TOKEN_ISSUE_MODEL.mean_ms / 1000.0,
    }
    steps["total"] = round(sum(steps.values()), 6)
    return steps


def calibration_block() -> dict:
    """Every tunable that shapes the numbers, in one place."""
    return {
        "clock": "virtual",
        "provenance": PROVENANCE,
        "internet_profiles": {name: asdict(p) for name, p in PROFILES.items()},
        "gsm_profiles": {name: asdict(p) for name, p in GSM_PROFILES.items()},
        "reconnect_model": {
            "distribution": "exponential",
            "mean_s": RECONNECT_MEAN_S,
            "cap_s": RECONNECT_CAP_S,
            "max_recoveries_per_session": MAX_SESSION_RECOVERIES,
            "max_retries_per_leg": MAX_LEG_RETRIES,
            "integrity_horizon_s": INTEGRITY_HORIZON_S,
        },
        "approval_flow": {
            "pin_entry_ms": asdict(PIN_ENTRY_MODEL),
            "menu_share_of_entry": MENU_SHARE,
            "push_latency_factor": PUSH_LATENCY_FACTOR,
            "token_issue_ms": asdict(TOKEN_ISSUE_MODEL),
            "max_pin_attempts": MAX_PIN_ATTEMPTS,
            "pending_lifetime_ms": PENDING_LIFETIME_MS,
            "token_lifetime_s": TOKEN_LIFETIME_S,
            "rate_limit": {"max": RATE_LIMIT_MAX,
                           "window_ms": RATE_LIMIT_WINDOW_MS},
        },
        "password_baseline": {
            "base_time_range_s": list(BASE_TIME_RANGE_S),
            "round_trips": ROUND_TRIPS,
            "otp_entry_ms": list(OTP_ENTRY_MS),
        },
        "incident_model": {
            "definition": INCIDENT_DEFINITION,
            "targeted_fraction": INCIDENT_TARGETED_FRACTION,
            "credential_theft_success": INCIDENT_CRED_THEFT_SUCCESS,
            "sim_swap_success": INCIDENT_SWAP_SUCCESS,
        },
        "scenario_workers": WORKERS,
    }


def build_payload(result: ReportSource) -> dict:
    if isinstance(result, ScenarioResult):
        return _scenario_payload(result)
    if isinstance(result, CompareResult):
        return _compare_payload(result)
    if isinstance(result, IntegrityResult):
        return _integrity_payload(result)
    if isinstance(result, LoadReport):
        return _load_payload(result)
    if isinstance(result, AttackSuiteResult):
        return _attacks_payload(result)
    raise ConfigError(f"no report renderer for {type(result).__name__}")


def _scenario_payload(result: ScenarioResult) -> dict:
    spec = result.spec
    payload = {
        "kind": "scenario",
        "spec": {"method": spec.method, "profile": spec.profile,
                 "gsm": spec.gsm, "attempts": spec.attempts, "seed": spec.seed},
        "results": result.summary(),
        "meta": calibration_block(),
    }
    if spec.method == "mma":
        payload["nominal_step_budget_s"] = nominal_step_budget_s()
        payload["timing_note"] = TIMING_NOTE
    return payload


def _compare_payload(result: CompareResult) -> dict:
    return {
        "kind": "compare",
        "spec": {"profile": result.profile, "gsm": result.gsm,
                 "attempts": result.attempts, "seed": result.seed},
        "mma": result.mma.summary(),
        "sso": result.sso.summary(),
        "stats": result.summary.to_json_dict(),
        "nominal_step_budget_s": nominal_step_budget_s(),
        "timing_note": TIMING_NOTE,
        "meta": calibration_block(),
    }


def _integrity_payload(result: IntegrityResult) -> dict:
    return {
        "kind": "integrity",
        "results": result.to_json_dict(),
        "meta": calibration_block(),
    }


def _load_payload(result: LoadReport) -> dict:
    return {
        "kind": "load",
        "results": result.to_json_dict(),
        "meta": calibration_block(),
    }


def _attacks_payload(result: AttackSuiteResult) -> dict:
    return {
        "kind": "attacks",
        "results": result.to_json_dict(),
        "incident_definition": INCIDENT_DEFINITION,
        "meta": calibration_block(),
    }


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# CSV is the payload flattened to (path, value) rows.  Dict keys join with
# dots, list elements use [i], values are JSON scalars, so parse_csv can
# rebuild the exact payload and the round trip is lossless.

def _flatten(value, path: str, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        if not value:
            rows.append((path, json.dumps(value)))
            return
        for k in value:
            if not isinstance(k, str) or "." in k or "[" in k or "]" in k:
                raise ConfigError(f"key {k!r} cannot be flattened")
            _flatten(value[k], f"{path}.{k}" if path else k, rows)
    elif isinstance(value, list):
        if not value:
            rows.append((path, json.dumps(value)))
            return
        for i, item in enumerate(value):
            _flatten(item, f"{path}[{i}]", rows)
    else:
        rows.append((path, json.dumps(value)))


def render_csv(payload: dict) -> str:
    rows: list[tuple[str, str]] = []
    _flatten(payload, "", rows)
    rows.sort(key=lambda kv: kv[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", "value"])
    writer.writerows(rows)
    return buf.getvalue()


def _split_path(path: str) -> list:
    parts: list = []
    for piece in path.split("."):
        while "[" in piece:
            head, rest = piece.split("[", 1)
            idx, piece = rest.split("]", 1)
            if head:
                parts.append(head)
            parts.append(int(idx))
        if piece:
            parts.append(piece)
    return parts


def parse_csv(text: str) -> dict:
    """Rebuild the payload written by :func:`render_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["path", "value"]:
        raise ConfigError(f"not a report CSV (header {header!r})")
    root: dict = {}
    for path, raw in reader:
        parts = _split_path(path)
        node = root
        for part, nxt in zip(parts, parts[1:]):
            if isinstance(part, int):
                while len(node) <= part:
                    node.append(None)
                if node[part] is None:
                    node[part] = [] if isinstance(nxt, int) else {}
                node = node[part]
            else:
                if part not in node:
                    node[part] = [] if isinstance(nxt, int) else {}
                node = node[part]
        leaf = parts[-1]
        value = json.loads(raw)
        if isinstance(leaf, int):
            while len(node) <= leaf:
                node.append(None)
            node[leaf] = value
        else:
            node[leaf] = value
    return root


def _md_table(headers: list[str], rows: list[list]) -> str:
    out = ["| " + " | ".join(headers) + " |",
           "|" + "|".join(" --- " for _ in headers) + "|"]
    for row in rows:
        out.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(out)


def _fmt(value, digits: int = 3) -> str:
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def _md_meta(payload: dict) -> str:
    meta = payload["meta"]
    return "\n".join([
        "## Calibration",
        "",
        f"Clock: {meta['clock']}. {meta['provenance']}",
        "",
        "```json",
        json.dumps(meta, indent=2, sort_keys=True),
        "```",
    ])


def _md_summary_rows(summary: dict) -> list[list]:
    rows = [["attempts", summary["attempts"]],
            ["successes", summary["successes"]],
            ["success rate", _fmt(summary["success_rate"], 4)],
            ["incident rate", _fmt(summary["incident_rate"], 4)],
            ["retries total", summary["retries_total"]]]
    if "auth_time_s" in summary:
        t = summary["auth_time_s"]
        rows += [["auth time mean (s)", _fmt(t["mean"])],
                 ["auth time p50 (s)", _fmt(t["p50"])],
                 ["auth time p95 (s)", _fmt(t["p95"])],
                 ["auth time p99 (s)", _fmt(t["p99"])],
                 ["interactions per login", _fmt(summary["interaction_count_mean"], 2)]]
    for reason, count in summary["failures"].items():
        rows.append([f"failures: {reason}", count])
    return rows


def _md_scenario(payload: dict) -> str:
    spec = payload["spec"]
    parts = [
        f"# Scenario: {spec['method']} / {spec['profile']} net / {spec['gsm']} signaling",
        "",
        f"Attempts: {spec['attempts']}, seed: {spec['seed']}.",
        "",
        _md_table(["Metric", "Value"], _md_summary_rows(payload["results"])),
    ]
    if "component_means_s" in payload["results"]:
        comp = payload["results"]["component_means_s"]
        parts += ["", "## Step means",
                  "", _md_table(["Step", "Mean (s)"],
                                [[k, _fmt(v)] for k, v in comp.items()])]
    if "nominal_step_budget_s" in payload:
        budget = payload["nominal_step_budget_s"]
        parts += ["", "## Nominal step budget",
                  "", payload["timing_note"] + ".",
                  "", _md_table(["Step", "Budget (s)"],
                                [[k, _fmt(v)] for k, v in budget.items()])]
    parts += ["", _md_meta(payload), ""]
    return "\n".join(parts)


_COMPARE_ROWS = [
    # category, label, getter path into a per-method summary
    ("Performance", "Mean auth time (s)", ("auth_time_s", "mean")),
    ("Performance", "Median auth time (s)", ("auth_time_s", "p50")),
    ("Performance", "p95 auth time (s)", ("auth_time_s", "p95")),
    ("Usability", "Interactions per login", ("interaction_count_mean",)),
    ("Reliability", "Success rate", ("success_rate",)),
    ("Reliability", "Retries (total)", ("retries_total",)),
    ("Security", "Incident rate", ("incident_rate",)),
]


def _dig(summary: dict, path: tuple):
    node = summary
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return "n/a"
        node = node[key]
    return _fmt(node, 4) if isinstance(node, float) else node


def _md_compare(payload: dict) -> str:
    spec = payload["spec"]
    stats = payload["stats"]
    rows = [[cat, label, _dig(payload["mma"], path), _dig(payload["sso"], path)]
            for cat, label, path in _COMPARE_ROWS]
    def cell(v, digits=3):
        return _fmt(v, digits) if isinstance(v, float) else str(v)

    a, b = stats["a"], stats["b"]
    stat_rows = [
        ["mean difference (SSO − MMA, s)", cell(stats["mean_diff"])],
        ["Welch t", cell(stats["t_stat"])],
        ["degrees of freedom", cell(stats["dof"], 1)],
        ["p (two-tailed)", f"{stats['p_value']:.3g}"],
        ["Cohen's d", cell(stats["cohens_d"])],
        ["n (MMA, SSO)", f"{a['n']}, {b['n']}"],
        ["MMA mean 95% CI (s)", f"[{cell(a['ci95_low'])}, {cell(a['ci95_high'])}]"],
        ["SSO mean 95% CI (s)", f"[{cell(b['ci95_low'])}, {cell(b['ci95_high'])}]"],
    ]
    budget = payload["nominal_step_budget_s"]
    return "\n".join([
        f"# Method comparison: {spec['profile']} net / {spec['gsm']} signaling",
        "",
        f"Attempts per method: {spec['attempts']}, seed: {spec['seed']}.",
        "",
        _md_table(["Category", "Metric", "Mobile approval", "Web password"], rows),
        "",
        "## Statistics",
        "",
        _md_table(["Statistic", "Value"], stat_rows),
        "",
        "## Nominal step budget",
        "",
        payload["timing_note"] + ".",
        "",
        _md_table(["Step", "Budget (s)"],
                  [[k, _fmt(v)] for k, v in budget.items()]),
        "",
        _md_meta(payload),
        "",
    ])


def _md_integrity(payload: dict) -> str:
    r = payload["results"]
    rows = [["sessions", r["sessions"]],
            ["seed", r["seed"]],
            ["sessions hit by a disruption", r["affected"]],
            ["recovered", r["recovered"]],
            ["failed after drop", r["failed_after_drop"]],
            ["recovery rate", _fmt(r["recovery_rate"], 4)],
            ["mean reconnect (s)", _fmt(r["mean_reconnect_s"])],
            ["reconnects observed", r["reconnect_count"]],
            ["overall success rate", _fmt(r["overall_success_rate"], 4)]]
    hist_rows = [[k, v] for k, v in r["drop_histogram"].items()]
    return "\n".join([
        "# Session integrity under signaling disruptions",
        "",
        _md_table(["Metric", "Value"], rows),
        "",
        "## Disruptions per session",
        "",
        _md_table(["Drops", "Sessions"], hist_rows),
        "",
        _md_meta(payload),
        "",
    ])


def _md_load(payload: dict) -> str:
    r = payload["results"]
    rows = [["virtual users", r["users"]],
            ["ramp / sustain (s)", f"{r['ramp_s']} / {r['sustain_s']}"],
            ["method / profile / gsm", f"{r['method']} / {r['profile']} / {r['gsm']}"],
            ["seed", r["seed"]],
            ["journeys started", r["journeys_started"]],
            ["journeys succeeded", r["journeys_succeeded"]],
            ["error rate", _fmt(r["error_rate"], 4)],
            ["p50 / p95 / p99 (ms)",
             f"{_fmt(r['p50_ms'], 0)} / {_fmt(r['p95_ms'], 0)} / {_fmt(r['p99_ms'], 0)}"],
            ["peak in-flight sessions", r["peak_in_flight"]],
            ["events processed", r["resources"]["events_processed"]],
            ["audit records", r["resources"]["audit_records"]],
            ["sessions tracked", r["resources"]["sessions_tracked"]]]
    bucket_rows = [[b["minute"], b["journeys"], b["successes"],
                    _fmt(b["p50_ms"], 0), _fmt(b["p95_ms"], 0), _fmt(b["p99_ms"], 0)]
                   for b in r["buckets"]]
    return "\n".join([
        "# Load run",
        "",
        _md_table(["Metric", "Value"], rows),
        "",
        "## Per-minute buckets",
        "",
        _md_table(["Minute", "Journeys", "Successes", "p50 ms", "p95 ms", "p99 ms"],
                  bucket_rows),
        "",
        _md_meta(payload),
        "",
    ])


def _md_attacks(payload: dict) -> str:
    r = payload["results"]
    rows = [[o["name"], o["stride"], "yes" if o["defended"] else "no",
             o["attempts"], o["compromised"],
             "sensitivity" if o["sensitivity_check"] else "defense",
             "PASS" if o["passed"] else "FAIL"]
            for o in r["outcomes"]]
    matrix_rows = [[letter, ", ".join(attacks)]
                   for letter, attacks in r["stride_matrix"].items()]
    parts = [
        "# Attack suite verdicts",
        "",
        f"Seed: {r['seed']}. {payload['incident_definition']}.",
        "",
        _md_table(["Attack", "STRIDE", "Defended", "Attempts", "Compromised",
                   "Kind", "Verdict"], rows),
        "",
        f"All defenses held: {r['all_defended']}. All checks passed: {r['all_passed']}.",
        "",
        "## STRIDE coverage",
        "",
        _md_table(["Category", "Exercised by"], matrix_rows),
    ]
    if "incidents" in r:
        inc = r["incidents"]
        parts += ["", "## Modeled incident rates",
                  "", inc["definition"][0].upper() + inc["definition"][1:] + ".",
                  "", _md_table(["Method", "Incident rate"],
                                [["mobile approval", _fmt(inc["mma_rate"], 4)],
                                 ["web password", _fmt(inc["sso_rate"], 4)]])]
    parts += ["", _md_meta(payload), ""]
    return "\n".join(parts)


_MD_RENDERERS = {
    "scenario": _md_scenario,
    "compare": _md_compare,
    "integrity": _md_integrity,
    "load": _md_load,
    "attacks": _md_attacks,
}


def render_markdown(payload: dict) -> str:
    return _MD_RENDERERS[payload["kind"]](payload)


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return render_json(payload)
    if fmt == "csv":
        return render_csv(payload)
    if fmt in ("markdown", "markdown-table", "md"):
        return render_markdown(payload)
    raise ConfigError(f"unknown report format {fmt!r}; pick one of {FORMATS}")


# ---------------------------------------------------------------------------
# Figures.  Rendered from the result objects (payloads only carry summaries).

def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    _plt().close(fig)
    return path


def _scenario_figure(result: ScenarioResult, out: Path) -> list[Path]:
    plt = _plt()
    times = [r.auth_time_s for r in result.records if r.success]
    summary = result.summary()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    if times:
        ax1.hist(times, bins=40, color="#3b6ea5", edgecolor="white")
        ax1.axvline(summary["auth_time_s"]["mean"], color="#c0392b",
                    linestyle="--", label=f"mean {summary['auth_time_s']['mean']:.2f}s")
        ax1.legend()
    ax1.set_xlabel("auth time (s)")
    ax1.set_ylabel("journeys")
    ax1.set_title(f"{result.spec.method} / {result.spec.profile}")
    comp = summary.get("component_means_s", {})
    if comp:
        names = list(comp)
        ax2.barh(names, [comp[n] for n in names], color="#3b6ea5")
        ax2.set_xlabel("mean share of journey (s)")
        ax2.set_title("per-step means")
        ax2.invert_yaxis()
    return [_save(fig, out / "scenario_times.png")]


def _compare_figure(result: CompareResult, out: Path) -> list[Path]:
    plt = _plt()
    mma = [r.auth_time_s for r in result.mma.records if r.success]
    sso = [r.auth_time_s for r in result.sso.records if r.success]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.hist([mma, sso], bins=30, label=["mobile approval", "web password"],
             color=["#3b6ea5", "#e67e22"])
    ax1.set_xlabel("auth time (s)")
    ax1.set_ylabel("journeys")
    ax1.legend()
    ax1.set_title(f"completed logins, {result.profile} profile")
    means = [sum(mma) / len(mma) if mma else 0.0,
             sum(sso) / len(sso) if sso else 0.0]
    ax2.bar(["mobile approval", "web password"], means,
            color=["#3b6ea5", "#e67e22"])
    for i, m in enumerate(means):
        ax2.text(i, m, f"{m:.2f}s", ha="center", va="bottom")
    ax2.set_ylabel("mean auth time (s)")
    ax2.set_title(f"gap {result.mean_gap_s:.2f}s, p {result.summary.p_value:.2g}")
    return [_save(fig, out / "compare_times.png")]


def _integrity_figure(result: IntegrityResult, out: Path) -> list[Path]:
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    hist = sorted(result.drop_histogram.items())
    ax1.bar([str(k) for k, _ in hist], [v for _, v in hist], color="#3b6ea5")
    ax1.set_xlabel("disruptions during session")
    ax1.set_ylabel("sessions")
    ax1.set_title("disruption exposure")
    ax2.bar(["recovered", "failed"],
            [result.recovered, result.failed_after_drop],
            color=["#27ae60", "#c0392b"])
    ax2.set_title(f"recovery {result.recovery_rate * 100:.1f}%, "
                  f"mean reconnect {result.mean_reconnect_s:.2f}s")
    return [_save(fig, out / "integrity_recovery.png")]


def _load_figure(result: LoadReport, out: Path) -> list[Path]:
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    minutes = [b.minute for b in result.buckets]
    for attr, color in (("p50_ms", "#27ae60"), ("p95_ms", "#e67e22"),
                        ("p99_ms", "#c0392b")):
        ax1.plot(minutes, [getattr(b, attr) for b in result.buckets],
                 marker="o", markersize=3, label=attr[:-3], color=color)
    ax1.set_xlabel("minute")
    ax1.set_ylabel("journey duration (ms)")
    ax1.set_title(f"{result.spec.users} users")
    ax1.legend()
    ax2.bar(minutes, [b.journeys for b in result.buckets], color="#3b6ea5")
    ax2.set_xlabel("minute")
    ax2.set_ylabel("journeys started")
    ax2.set_title(f"peak in-flight {result.peak_in_flight}")
    return [_save(fig, out / "load_buckets.png")]


def write_figures(result: ReportSource, out_dir: Path) -> list[Path]:
    """Render this result's figures under ``out_dir``; attacks have none."""
    out = Path(out_dir)
    if isinstance(result, ScenarioResult):
        return _scenario_figure(result, out)
    if isinstance(result, CompareResult):
        return _compare_figure(result, out)
    if isinstance(result, IntegrityResult):
        return _integrity_figure(result, out)
    if isinstance(result, LoadReport):
        return _load_figure(result, out)
    return []


_BASENAMES = {"scenario": "scenario", "compare": "compare",
              "integrity": "integrity", "load": "load", "attacks": "attacks"}


def emit_report(result: ReportSource, fmt: str = "json",
                out_dir: str | Path = ".", figures: bool = True,
                basename: str | None = None) -> Path:
    """Write the report file (plus figures) and return the report path."""
    payload = build_payload(result)
    fmt_key = "markdown" if fmt in ("markdown-table", "md") else fmt
    if fmt_key not in FORMATS:
        raise ConfigError(f"unknown report format {fmt!r}; pick one of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = basename or _BASENAMES[payload["kind"]]
    path = out / f"{name}{_EXT[fmt_key]}"
    path.write_text(render(payload, fmt_key), encoding="utf-8")
    if figures:
        write_figures(result, out / "figures")
    return path
