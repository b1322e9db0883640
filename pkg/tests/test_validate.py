import json

import bottletrie.validate as validate
from bottletrie.validate import (
    SUITES,
    dump_counterexample,
    format_report,
    replay_counterexample,
    run_suites,
)


def test_all_suites_pass_small():
    reports = run_suites(list(SUITES), 5, seed=3, d_max=8)
    assert all(r.ok for r in reports)
    text = format_report(reports)
    for name in SUITES:
        assert name in text
    assert "FAIL" not in text


def test_zero_trials_is_trivially_ok():
    reports = run_suites(["oracle"], 0, seed=0)
    assert reports[0].ok and reports[0].trials == 0


def test_seeding_is_reproducible():
    a = run_suites(["compact"], 4, seed=9, d_max=8)
    b = run_suites(["compact"], 4, seed=9, d_max=8)
    assert a[0].ok == b[0].ok


def test_fault_injection_produces_replayable_counterexample(tmp_path, monkeypatch):
    # break the soundness invariant artificially: pretend every exact
    # distance is enormous so the index bound looks violated
    real = validate.exact_bottleneck
    monkeypatch.setattr(validate, "exact_bottleneck", lambda P, Q: 1e9)
    reports = run_suites(["compact"], 5, seed=1, d_max=8)
    assert not reports[0].ok
    ce = reports[0].counterexample
    assert ce.detail["reason"] in ("soundness", "approximation")
    path = tmp_path / "ce.json"
    dump_counterexample(path, ce)
    obj = json.loads(path.read_text())
    assert obj["suite"] == "compact"
    assert obj["sets"] and obj["query"]

    # with the real oracle restored, the replay shows the invariant holds
    monkeypatch.setattr(validate, "exact_bottleneck", real)
    report = replay_counterexample(path, d_max=8)
    assert report.ok
