import math

import pytest

import aoistarve


def test_closed_form_values():
    pred = aoistarve.average_aoi(p_sch=1.0, x=0.0, gamma=100, phi=1.0)
    assert pred["average_aoi_ms"] == pytest.approx(201.5, abs=1e-9)
    attacked = aoistarve.average_aoi(p_sch=1.0, x=0.9, gamma=100, phi=1.0)
    assert attacked["average_aoi_ms"] == pytest.approx(210.5, abs=1e-9)


def test_effective_sch_prob_and_degenerate_x():
    assert aoistarve.effective_sch_prob(1.0, 0.5) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        aoistarve.effective_sch_prob(1.0, 1.0)


def test_dtmc_first_passage_matches_closed_form():
    mfpt = aoistarve.dtmc_mean_first_passage(gamma=10, p_sch_eff=0.5)
    assert mfpt == pytest.approx(2.0 + 4.5 + 10.0, abs=1e-8)


def test_safety_helpers():
    names = [s["name"] for s in aoistarve.builtin_services()]
    assert names == ["FCW", "EBW", "LCW"]
    p = aoistarve.violation_probability(0.8468, 2.0, 100.0)
    assert p == pytest.approx(1.0 - 0.8468**20, rel=1e-12)


def test_simulate_small_run():
    out = aoistarve.simulate(
        n_vehicles=5, sim_duration_ms=20000, seed=7, attack_mode="off"
    )
    report = out["report"]
    assert report["has_data"]
    assert report["prr"] == pytest.approx(1.0)
    assert math.isfinite(report["avg_aoi_ms"])
    assert out["prediction"]["average_aoi_ms"] == pytest.approx(201.5)
    again = aoistarve.simulate(
        n_vehicles=5, sim_duration_ms=20000, seed=7, attack_mode="off"
    )
    assert again["report"]["avg_aoi_ms"] == report["avg_aoi_ms"]


def test_config_hash_sensitivity():
    h1 = aoistarve.config_hash(seed=1)
    h2 = aoistarve.config_hash(seed=2)
    assert h1 != h2
    assert h1 == aoistarve.config_hash(seed=1)
