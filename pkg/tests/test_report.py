"""Report rendering: payloads, formats, CSV round trip, figures."""

import json

import pytest

from mmauth.attacks import run_attack_suite
from mmauth.domain import METHOD_MMA, METHOD_SSO
from mmauth.errors import ConfigError
from mmauth.harness import (LoadSpec, ScenarioSpec, compare_methods, run_load,
                            run_scenario, run_session_integrity)
from mmauth.report import (FORMATS, PROVENANCE, build_payload, emit_report,
                           nominal_step_budget_s, parse_csv, render,
                           render_csv, render_json, render_markdown,
                           write_figures)


@pytest.fixture(scope="module")
def scenario_result():
    return run_scenario(ScenarioSpec(METHOD_MMA, "good", attempts=60, seed=8))


@pytest.fixture(scope="module")
def compare_result():
    return compare_methods(attempts=60, seed=8)


@pytest.fixture(scope="module")
def integrity_result():
    return run_session_integrity(sessions=200, seed=8)


@pytest.fixture(scope="module")
def load_result():
    return run_load(LoadSpec(users=10, ramp_s=20.0, sustain_s=120.0, seed=8))


@pytest.fixture(scope="module")
def attacks_result():
    return run_attack_suite(seed=8, quick=True, incidents=True)


def all_results(request):
    return [request.getfixturevalue(name) for name in
            ("scenario_result", "compare_result", "integrity_result",
             "load_result", "attacks_result")]


def test_nominal_step_budget_derives_from_models():
    budget = nominal_step_budget_s()
    assert budget["ussd_push"] == pytest.approx(1.2, abs=0.01)
    assert budget["pin_entry"] == pytest.approx(5.7, abs=0.01)
    assert budget["pin_verification"] == pytest.approx(0.8, abs=0.01)
    assert budget["token_issue"] == pytest.approx(0.3, abs=0.01)
    steps = {k: v for k, v in budget.items() if k != "total"}
    assert budget["total"] == pytest.approx(sum(steps.values()))


def test_every_payload_kind_renders_every_format(request):
    for result in all_results(request):
        payload = build_payload(result)
        assert payload["kind"] in ("scenario", "compare", "integrity", "load",
                                   "attacks")
        assert payload["meta"]["provenance"] == PROVENANCE
        for fmt in FORMATS:
            text = render(payload, fmt)
            assert text.strip()
    with pytest.raises(ConfigError):
        render({"kind": "x"}, "yaml")
    with pytest.raises(ConfigError):
        build_payload(object())


def test_payloads_carry_no_wall_clock_values(request):
    for result in all_results(request):
        text = render_json(build_payload(result))
        assert "elapsed_wall" not in text
        assert "timestamp" not in text


def test_json_render_is_canonical(scenario_result):
    payload = build_payload(scenario_result)
    text = render_json(payload)
    assert text == json.dumps(payload, indent=2, sort_keys=True) + "\n"
    assert json.loads(text) == payload


def test_csv_round_trip_is_lossless(request):
    for result in all_results(request):
        payload = build_payload(result)
        assert parse_csv(render_csv(payload)) == payload


def test_csv_round_trip_handles_tricky_shapes():
    payload = {"digit_keys": {"0": 1, "10": 2},
               "nested": [{"a": [1, 2]}, {"b": {}}],
               "empties": {"list": [], "dict": {}},
               "scalars": [None, True, 1.5, "text, with commas"]}
    assert parse_csv(render_csv(payload)) == payload


def test_csv_rejects_foreign_header():
    with pytest.raises(ConfigError):
        parse_csv("a,b\n1,2\n")


def test_markdown_carries_comparison_table(compare_result):
    text = render_markdown(build_payload(compare_result))
    assert "| Category | Metric |" in text
    assert "Mean auth time (s)" in text
    assert "Success rate" in text
    assert PROVENANCE.split(";")[0] in text


def test_markdown_scenario_mentions_nominal_budget(scenario_result):
    text = render_markdown(build_payload(scenario_result))
    assert "nominal" in text.lower()
    assert "| Step | Budget (s) |" in text


def test_sso_scenario_payload_omits_step_budget():
    res = run_scenario(ScenarioSpec(METHOD_SSO, "good", attempts=30, seed=8))
    payload = build_payload(res)
    assert "nominal_step_budget_s" not in payload
    render_markdown(payload)  # renders without the budget section


def test_emit_report_writes_file_and_figures(tmp_path, scenario_result):
    out = emit_report(scenario_result, fmt="markdown", out_dir=tmp_path)
    assert out.exists() and out.suffix == ".md"
    figures = sorted(p.name for p in (tmp_path / "figures").iterdir())
    assert figures == ["scenario_times.png"]
    # png magic bytes, not an empty file
    magic = (tmp_path / "figures" / "scenario_times.png").read_bytes()[:8]
    assert magic == b"\x89PNG\r\n\x1a\n"


def test_emit_report_without_figures(tmp_path, integrity_result):
    out = emit_report(integrity_result, fmt="json", out_dir=tmp_path,
                      figures=False, basename="integrity-check")
    assert out.name == "integrity-check.json"
    assert not (tmp_path / "figures").exists()
    assert json.loads(out.read_text())["kind"] == "integrity"


def test_figures_per_kind(tmp_path, request):
    expected = {
        "scenario_result": ["scenario_times.png"],
        "compare_result": ["compare_times.png"],
        "integrity_result": ["integrity_recovery.png"],
        "load_result": ["load_buckets.png"],
        "attacks_result": [],
    }
    for name, want in expected.items():
        result = request.getfixturevalue(name)
        out = tmp_path / name
        out.mkdir()
        paths = write_figures(result, out)
        assert sorted(p.name for p in paths) == want
