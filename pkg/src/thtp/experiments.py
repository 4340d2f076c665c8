"""Single runs, parameter sweeps and their CSV outputs."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimConfig
from .geometry import PI_APPROX, density_from_neighbours
from .metrics import MetricRow, write_rows_csv
from .simulation import Simulation

log = logging.getLogger(__name__)

# parameter name -> SimConfig field
SWEEP_FIELDS = {
    "density": "density",
    "speed": "target_speed",
    "sensing": "d_dtx",
    "period": "propagation_period",
}

SWEEP_VALUES = {
    "density": [density_from_neighbours(k) for k in (7.5, 10, 20, 40)],
    "speed": [5.0, 15.0, 25.0, 35.0],
    "sensing": [10.0, 40.0, 70.0, 100.0],
    "period": [1.0, 3.0, 5.0, 10.0, 20.0],
}

AGGREGATE_COLUMNS = (
    "value", "median_localizations", "median_localized_fraction",
    "median_msgs_spread", "q1", "q3", "median_msgs_per_node",
)


def summarize(sim: Simulation, rows: list[MetricRow]) -> dict:
    cfg = sim.config
    transitions, prev = 0, False
    for r in rows:
        if r.localized and not prev:
            transitions += 1
        prev = r.localized
    n = len(sim.network)
    total = sim.total_messages
    delivered = sum(m.deliver_time is not None for m in sim.messages)
    return {
        "localizations": transitions,
        "localized_samples": sum(r.localized for r in rows),
        "localized_fraction": (sum(r.localized for r in rows) / len(rows)) if rows else 0.0,
        "msgs_spread": sim.counts["spread"],
        "msgs_agent": sim.counts["agent"],
        "msgs_routing": sim.counts["routing"],
        "msgs_total": total,
        "msgs_per_node": total / n,
        "giant_component_fraction": sim.network.giant_component_fraction(),
        "detections": len(sim.detections[0].nodes),
        "results_sent": len(sim.messages),
        "results_delivered": delivered,
        # sanity diagnostics for the density parameter
        "expected_neighbours": cfg.density * PI_APPROX * cfg.d_trx**2,
        "sensing_coverage": cfg.density * PI_APPROX * cfg.d_dtx**2,
    }


def run_experiment(config: SimConfig, seed: int | None = None, **sim_kwargs) -> tuple[list[MetricRow], dict]:
    """One full run of ``config`` (optionally under another ``seed``)."""
    if seed is not None:
        config = config.replace(seed=seed)
    sim = Simulation(config, **sim_kwargs)
    rows = sim.run()
    summary = summarize(sim, rows)
    log.debug(
        "seed=%d neighbours~%.3g coverage~%.3g giant=%.3f",
        config.seed, summary["expected_neighbours"], summary["sensing_coverage"],
        summary["giant_component_fraction"],
    )
    return rows, summary


@dataclass
class SweepSpec:
    parameter: str
    values: list = field(default_factory=list)
    seeds_per_value: int = 10
    base: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        if self.parameter not in SWEEP_FIELDS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            self.values = list(SWEEP_VALUES[self.parameter])
        if self.seeds_per_value < 1:
            raise ValueError("seeds_per_value must be >= 1")

    def configs(self):
        fld = SWEEP_FIELDS[self.parameter]
        for v in self.values:
            for k in range(self.seeds_per_value):
                yield v, self.base.replace(**{fld: v, "seed": self.base.seed + k})


@dataclass
class RunOutcome:
    value: float
    seed: int
    rows: list | None
    summary: dict | None
    error: str | None = None


def _run_one(args) -> RunOutcome:
    value, cfg = args
    try:
        rows, summary = run_experiment(cfg)
    except Exception as exc:  # a failed run is recorded, never fatal to the sweep
        return RunOutcome(value, cfg.seed, None, None, f"{type(exc).__name__}: {exc}")
    return RunOutcome(value, cfg.seed, rows, summary)


def aggregate(outcomes: list[RunOutcome], values) -> list[dict]:
    table = []
    for v in values:
        ok = [o.summary for o in outcomes if o.value == v and o.summary is not None]
        if not ok:
            table.append({"value": v, **{c: math.nan for c in AGGREGATE_COLUMNS[1:]}, "runs": 0})
            continue
        spread = np.array([s["msgs_spread"] for s in ok], dtype=float)
        table.append({
            "value": v,
            "median_localizations": float(np.median([s["localizations"] for s in ok])),
            "median_localized_fraction": float(np.median([s["localized_fraction"] for s in ok])),
            "median_msgs_spread": float(np.median(spread)),
            "q1": float(np.percentile(spread, 25)),
            "q3": float(np.percentile(spread, 75)),
            "median_msgs_per_node": float(np.median([s["msgs_per_node"] for s in ok])),
            "runs": len(ok),
        })
    return table


def value_label(v) -> str:
    return format(float(v), "g")


def run_sweep(spec: SweepSpec, out_dir=None, workers: int = 1) -> tuple[list[dict], list[RunOutcome]]:
    """Run every (value, seed) pair; aggregate medians and quartiles per value.

    With ``out_dir`` set, writes one time-series CSV per run plus
    ``sweep_<param>.csv``. Runs go to a process pool when ``workers > 1``;
    files are written here, after all runs finish.
    """
    jobs = list(spec.configs())
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    for o in outcomes:
        if o.error:
            log.warning("run %s=%s seed=%d failed: %s", spec.parameter, o.value, o.seed, o.error)
    table = aggregate(outcomes, spec.values)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for o in outcomes:
            if o.rows is not None:
                write_rows_csv(out / f"run_{spec.parameter}_{value_label(o.value)}_{o.seed}.csv", o.rows)
        write_aggregate_csv(out / f"sweep_{spec.parameter}.csv", table)
    return table, outcomes


def write_aggregate_csv(path, table) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for row in table:
            w.writerow([repr(float(row[c])) for c in AGGREGATE_COLUMNS])
