import pathlib

import pytest

import costrec

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def read(name):
    return (CONFIGS / name).read_text()


def test_demo_schedule():
    summary, schedule, profiles = costrec.run(read("pe3_demo.yaml"))
    assert summary["k"] == 2
    assert summary["threshold"] == 4.0
    assert abs(summary["expected_revenue"]["mean"] - 4.0) < 1e-12
    assert "log_h,2,4,2.25,0,4,1,0,1,1\n" in schedule
    assert profiles.startswith("index,probability,values,served,payments")


def test_audits():
    ok, reports = costrec.audit(read("pe3_demo.yaml"))
    assert ok
    ok, reports = costrec.audit(read("flat_price_fixture.yaml"))
    assert not ok
    assert any(r["name"] == "bic_grid" and not r["pass"] for r in reports)


def test_errors():
    with pytest.raises(costrec.ConfigError, match="reduction.delta"):
        costrec.run(read("malformed_delta.yaml"))
    with pytest.raises(costrec.Error, match="Incompatible"):
        costrec.run(read("continuous_exact.yaml"))


def test_sampled_runs_repeat():
    a = costrec.run(read("pe3_combined_sampled.yaml"), jobs=1)
    b = costrec.run(read("pe3_combined_sampled.yaml"), jobs=3)
    assert a == b


def test_helpers():
    assert costrec.sample_count(0.1, 2, 0.25) == 254
    lhs, bound, ok = costrec.harmonic_inequality([1, 1, 1])
    assert abs(lhs - 11 / 6) < 1e-12 and abs(bound - 11 / 3) < 1e-12 and ok
    assert costrec.log_h_constant(16) == 13.0
    assert len(costrec.config_hash("x")) == 16


def test_lower_bound_small():
    reports = costrec.lower_bound(agents=64, samples=5000, seed=3)
    assert {r["name"] for r in reports} >= {"lower_bound_floor", "lower_bound_baseline"}
    assert all(r["pass"] or r["informational"] for r in reports)
