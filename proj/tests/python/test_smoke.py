"""Smoke tests for the python module: drive the bundled scenarios end to end."""

import increvise


def test_negation_repair_roundtrip():
    run = increvise.generate_file(increvise.assets_dir() / "scenarios" / "negation-en.scn")
    assert run["exit_code"] == 0
    assert "oops" in run["transcript"].split()
    assert run["metrics"]["repair_count"] == 1
    assert run["effective"] == [
        "I", "won't", "be", "able", "to", "meet", "you", "at", "the", "hotel", "this", "evening",
    ]


def test_strict_threshold_matches_oracle():
    scenario = increvise.assets_dir() / "scenarios" / "negation-en.scn"
    strict = increvise.generate_file(scenario, threshold=1.0)
    oracle = increvise.batch_file(scenario)
    assert strict["metrics"]["repair_count"] == 0
    assert increvise.equivalent_content(strict["trace_jsonl"], oracle["trace_jsonl"])


def test_passive_repair_transcript():
    run = increvise.generate_file(
        increvise.assets_dir() / "scenarios" / "dummy-verb-de-passive.scn"
    )
    assert run["transcript"] == "der Besucher äh dieser Termin wird von dem Besucher gewünscht"
    assert run["effective"] == ["dieser", "Termin", "wird", "von", "dem", "Besucher", "gewünscht"]


def test_metrics_recomputable_from_trace():
    run = increvise.generate_file(increvise.assets_dir() / "scenarios" / "number-en.scn")
    recomputed = increvise.compute_metrics(run["trace_jsonl"])
    assert recomputed == run["metrics"]
    assert recomputed["defaults_applied"] == 1


def test_determinism():
    scenario = increvise.assets_dir() / "scenarios" / "multi-default.scn"
    a = increvise.generate_file(scenario)
    b = increvise.generate_file(scenario)
    assert a["trace_jsonl"] == b["trace_jsonl"]
