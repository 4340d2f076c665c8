import csv
import math

import pytest

from thtp.config import SimConfig
from thtp.experiments import (
    AGGREGATE_COLUMNS,
    SWEEP_VALUES,
    RunOutcome,
    SweepSpec,
    aggregate,
    run_experiment,
    run_sweep,
)

SHORT = SimConfig(t_end=120.0, n=120)


def test_default_sweep_values_loaded():
    spec = SweepSpec("density")
    assert len(spec.values) == 4
    expected = [k / (100**2 * 3.14) for k in (7.5, 10, 20, 40)]
    assert spec.values == pytest.approx(expected)
    assert SWEEP_VALUES["period"] == [1.0, 3.0, 5.0, 10.0, 20.0]
    assert len(list(spec.configs())) == 40


def test_unknown_parameter():
    with pytest.raises(ValueError):
        SweepSpec("colour")


def test_summary_fields():
    rows, s = run_experiment(SHORT, seed=5)
    assert len(rows) == 120
    assert s["msgs_total"] == s["msgs_spread"] + s["msgs_agent"] + s["msgs_routing"]
    assert s["msgs_per_node"] == pytest.approx(s["msgs_total"] / 120)
    assert 0 <= s["localized_fraction"] <= 1
    assert s["expected_neighbours"] == pytest.approx(10.0)
    assert s["sensing_coverage"] == pytest.approx(0.625)


def test_zero_duration_experiment():
    rows, s = run_experiment(SHORT.replace(t_end=0.0))
    assert rows == [] and s["msgs_total"] == 0 and s["localizations"] == 0


def test_sweep_writes_files(tmp_path):
    spec = SweepSpec("speed", [5.0, 35.0], 2, SHORT)
    table, outcomes = run_sweep(spec, tmp_path)
    assert len(outcomes) == 4 and len(table) == 2
    assert (tmp_path / "run_speed_5_0.csv").exists()
    assert (tmp_path / "run_speed_35_1.csv").exists()
    with open(tmp_path / "sweep_speed.csv") as fh:
        rd = list(csv.reader(fh))
    assert tuple(rd[0]) == AGGREGATE_COLUMNS
    assert len(rd) == 3


def test_single_value_sweep_repeats_config():
    spec = SweepSpec("sensing", [25.0], 3, SHORT)
    table, outcomes = run_sweep(spec)
    assert [o.seed for o in outcomes] == [0, 1, 2]
    assert table[0]["runs"] == 3


def fake(value, seed, spread):
    s = {"localizations": seed, "localized_fraction": 0.1, "msgs_spread": spread, "msgs_per_node": 1.0}
    return RunOutcome(value, seed, [], s)


def test_aggregate_skips_failures_and_is_order_invariant():
    outs = [fake(1.0, k, 10 * k) for k in range(5)]
    outs.append(RunOutcome(1.0, 9, None, None, "boom"))
    a = aggregate(outs, [1.0, 2.0])
    b = aggregate(list(reversed(outs)), [1.0, 2.0])
    assert a == b or (a[0] == b[0] and math.isnan(b[1]["q1"]))
    assert a[0]["median_msgs_spread"] == 20.0
    assert (a[0]["q1"], a[0]["q3"]) == (10.0, 30.0)
    assert a[0]["runs"] == 5
    assert a[1]["runs"] == 0 and math.isnan(a[1]["median_msgs_spread"])


def test_failed_run_does_not_abort(monkeypatch):
    import thtp.experiments as ex

    real = ex.run_experiment

    def flaky(cfg, seed=None, **kw):
        if cfg.seed == 1:
            raise RuntimeError("injected")
        return real(cfg, seed, **kw)

    monkeypatch.setattr(ex, "run_experiment", flaky)
    table, outcomes = run_sweep(SweepSpec("speed", [5.0], 3, SHORT))
    assert [o.error is None for o in outcomes] == [True, False, True]
    assert table[0]["runs"] == 2


def test_parallel_matches_serial():
    spec = SweepSpec("speed", [5.0, 25.0], 2, SHORT)
    t1, _ = run_sweep(spec)
    t2, _ = run_sweep(spec, workers=2)
    assert t1 == t2
