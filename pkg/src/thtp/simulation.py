"""One protocol run: network, target, traces, agents and routing on one clock."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import replace

import numpy as np

from .agent import AgentState, MarkStore, agent_step, observe_and_update_best, spawn_agents
from .config import SimConfig
from .engine import Event, EventKind, Scheduler
from .geometry import Network
from .metrics import NO_NODE, DetectionHistory, MetricRow, make_row
from .mobility import MobileEntity, leg_detections, next_leg
from .routing import HYBRID, INVERTED, SINK_ID, ResultMessage, route_hybrid, route_inverted_tracking
from .spreading import deliver, spread
from .traces import TraceStore, TraceType

TARGET_ID = 0
SAMPLE_PERIOD = 1.0


class Simulation:
    """A single seeded run.

    Random streams are split per concern (network, target, sink, spreading,
    agents, clocks) so that e.g. changing the agent count leaves the network
    and the target's path untouched.

    ``record`` keeps the executed-event log, trace history, spread messages,
    detections and agent trajectories for inspection and export.
    ``snapshot_every`` (seconds, 0 = off) stores trace-table snapshots.
    """

    def __init__(
        self,
        config: SimConfig,
        network: Network | None = None,
        record: bool = False,
        snapshot_every: float = 0.0,
        with_target: bool = True,
        with_agents: bool = True,
        sink_start=None,
    ):
        self.config = cfg = config
        streams = np.random.SeedSequence(cfg.seed).spawn(6)
        rng_net, self.rng_target, self.rng_sink, self.rng_spread, self.rng_agent, rng_clock = (
            np.random.default_rng(s) for s in streams
        )
        if network is None:
            network = Network.random(cfg.n, cfg.side, cfg.d_trx, rng_net)
        self.network = network
        n = len(network)
        offsets = None
        if cfg.clock_skew > 0:
            offsets = rng_clock.uniform(-cfg.clock_skew, cfg.clock_skew, n)

        self.record = record
        self.snapshot_every = snapshot_every
        self.sched = Scheduler(record=record)
        self.store = TraceStore(n, cfg.max_intensity, cfg.decay_rate, offsets, keep_history=record)
        self.marks = MarkStore(cfg.visited_mark_lifetime, cfg.bad_mark_lifetime)
        self.route_marks = MarkStore(cfg.visited_mark_lifetime, cfg.bad_mark_lifetime)
        self.counts = {"spread": 0, "agent": 0, "routing": 0}
        self.pending: dict[tuple[int, int], Event] = {}
        self.reached: dict[int, set[int]] = defaultdict(set)
        self.detections: dict[int, DetectionHistory] = defaultdict(DetectionHistory)
        self.detection_log: list[tuple[float, int, int]] = []
        self.spread_log: list[tuple] = []
        self.rows: list[MetricRow] = []
        self.snapshots: list[tuple[float, list]] = []
        self.entities: dict[int, MobileEntity] = {}
        self.agents: list[AgentState] = []
        self.messages: list[ResultMessage] = []
        self._was_localized = False
        self._last_report = -math.inf

        s = self.sched
        s.on(EventKind.TARGET_WAYPOINT_ARRIVAL, self._on_waypoint)
        s.on(EventKind.DETECTION, self._on_detection)
        s.on(EventKind.SPREAD_FORWARD, self._on_spread)
        s.on(EventKind.AGENT_STEP, self._on_agent_step)
        s.on(EventKind.METRIC_SAMPLE, self._on_sample)
        s.on(EventKind.ROUTE_HOP, self._on_route_hop)

        side = network.side
        target_start = self.rng_target.random(2) * side
        drawn = self.rng_sink.random(2) * side
        sink_start = drawn if sink_start is None else sink_start
        self.sink_start = (float(sink_start[0]), float(sink_start[1]))
        if with_target:
            self._add_entity(MobileEntity.start(TARGET_ID, "target", cfg.target_speed_mps, target_start))
        if cfg.routing != "none":
            self._add_entity(
                MobileEntity.start(SINK_ID, "sink", cfg.sink_speed_mps, sink_start, dwell=cfg.sink_dwell)
            )
        if with_agents:
            self.spawn(cfg.agents, network.nearest_node(sink_start), 0.0)
        if with_target or with_agents:
            if cfg.t_end >= SAMPLE_PERIOD:
                s.schedule(SAMPLE_PERIOD, EventKind.METRIC_SAMPLE)

    # -- setup -------------------------------------------------------------

    def _add_entity(self, ent: MobileEntity) -> None:
        self.entities[ent.id] = ent
        self.sched.schedule(ent.leg.t0, EventKind.TARGET_WAYPOINT_ARRIVAL, ent.id)

    def spawn(self, count: int, origin: int, t: float) -> list[AgentState]:
        new = spawn_agents(count, origin, TARGET_ID, t, first_id=len(self.agents), record=self.record)
        for a in new:
            self.agents.append(a)
            self._observe(a, t)
            self.sched.schedule(t + self.config.propagation_period, EventKind.AGENT_STEP, a.id)
        return new

    def seed_trace(self, node: int, target_id: int = TARGET_ID, t: float | None = None):
        """Plant an INITIAL trace as if ``node`` had just detected ``target_id``."""
        t = self.sched.now if t is None else t
        return self._detect(node, target_id, t)

    # -- queries -----------------------------------------------------------

    def intensity_fn(self, target_id: int, t: float):
        store = self.store
        return lambda node: store.intensity(node, target_id, t)

    def best_estimate(self):
        """Best estimation over all agents (highest key, lowest agent id on ties)."""
        policy = self.config.best_estimation
        best = None
        for a in self.agents:
            if a.best is not None and (best is None or a.best.key(policy) > best.key(policy)):
                best = a.best
        return best

    def sink_position(self, t: float):
        return self.entities[SINK_ID].position_at(t)

    # -- handlers ----------------------------------------------------------

    def _rng_for(self, ent_id: int):
        return self.rng_sink if ent_id == SINK_ID else self.rng_target

    def _on_waypoint(self, ev: Event) -> None:
        ent = self.entities[ev.payload]
        t = self.sched.now
        leg = next_leg(ent, self._rng_for(ent.id), self.network.side, t)
        for node, td in leg_detections(leg, self.network.positions, self.config.d_dtx):
            self.sched.schedule(td, EventKind.DETECTION, (node, ent.id))
        self.sched.schedule(leg.t1, EventKind.TARGET_WAYPOINT_ARRIVAL, ent.id)

    def _on_detection(self, ev: Event) -> None:
        node, target_id = ev.payload
        self._detect(node, target_id, self.sched.now)

    def _detect(self, node: int, target_id: int, t: float):
        tr = self.store.record_detection(node, target_id, t)
        self.reached[target_id].add(node)
        self.detections[target_id].add(t, node)
        if self.record:
            self.detection_log.append((t, node, target_id))
        self._schedule_forward(node, target_id, t)
        return tr

    def _schedule_forward(self, node: int, target_id: int, t: float) -> None:
        key = (node, target_id)
        self.sched.cancel(self.pending.get(key))
        self.pending[key] = self.sched.schedule(
            t + self.config.propagation_period, EventKind.SPREAD_FORWARD, key
        )

    def _on_spread(self, ev: Event) -> None:
        node, target_id = key = ev.payload
        if self.pending.get(key) is ev:
            del self.pending[key]
        t = self.sched.now
        cfg = self.config
        msgs = spread(
            self.network, self.store, node, target_id, t, self.rng_spread,
            cfg.spreading_penalty, cfg.inhibition, cfg.inhibition_scope,
        )
        self.counts["spread"] += len(msgs)
        for m in msgs:
            stored = deliver(self.store, m, t)
            if stored is not None:
                self.reached[target_id].add(m.receiver)
                self._schedule_forward(m.receiver, target_id, t)
            if self.record:
                self.spread_log.append(
                    (t, m.sender, m.receiver, target_id, m.carried_intensity, stored is not None)
                )

    def _observe(self, agent: AgentState, t: float) -> None:
        observed = self.store.intensity(agent.current, agent.target_id, t)
        observe_and_update_best(agent, agent.current, observed, t, self.config.best_estimation)
        if agent.trajectory is not None:
            agent.trajectory.append((t, agent.current, agent.mode, observed))

    def _on_agent_step(self, ev: Event) -> None:
        agent = self.agents[ev.payload]
        t = self.sched.now
        cfg = self.config
        # one query + one reply per polled neighbour
        self.counts["agent"] += 2 * len(self.network.adjacency[agent.current])
        agent_step(
            agent, self.network, self.intensity_fn(agent.target_id, t), self.marks, t,
            self.rng_agent, cfg.fresh_threshold, cfg.best_estimation,
        )
        self.sched.schedule(t + cfg.propagation_period, EventKind.AGENT_STEP, agent.id)

    def _on_sample(self, ev: Event) -> None:
        t = self.sched.now
        best = self.best_estimate()
        est = best.node if best is not None else NO_NODE
        row = make_row(t, self.detections[TARGET_ID].latest, est, self.network.positions, self.counts)
        self.rows.append(row)
        if self.snapshot_every and _is_multiple(t, self.snapshot_every):
            self.snapshots.append((t, self.store.snapshot(t)))
        if self.config.routing != "none":
            self._maybe_report(t, row.localized)
        self._was_localized = row.localized
        if t + SAMPLE_PERIOD <= self.config.t_end:
            self.sched.schedule(t + SAMPLE_PERIOD, EventKind.METRIC_SAMPLE)

    # -- routing -----------------------------------------------------------

    def _maybe_report(self, t: float, localized: bool) -> None:
        cfg = self.config
        if cfg.report == "localization":
            due = localized and not self._was_localized
        else:
            due = t - self._last_report >= cfg.report_period
        if due:
            self.send_result(t)

    def ttl(self) -> int:
        return self.config.ttl or 10 * self.network.hop_diameter_estimate()

    def send_result(self, t: float, strategy: str | None = None, from_node: int | None = None) -> ResultMessage:
        """Launch a result message carrying the current best estimation."""
        self._last_report = t
        best = self.best_estimate()
        agent = self.agents[0] if self.agents else None
        if from_node is None:
            from_node = agent.current if agent is not None else 0
        origin_node = agent.origin if agent is not None else from_node
        op = self.network.positions[origin_node]
        msg = ResultMessage(
            current=from_node,
            target_id=SINK_ID,
            id=len(self.messages),
            strategy=strategy or (HYBRID if self.config.routing == "hybrid" else INVERTED),
            payload=None if best is None else replace(best),
            origin=(float(op[0]), float(op[1])),
            send_time=t,
            ttl=self.ttl(),
        )
        self.messages.append(msg)
        if not self._check_delivery(msg, t):
            self.sched.schedule(t + self.config.propagation_period, EventKind.ROUTE_HOP, msg.id)
        return msg

    def _check_delivery(self, msg: ResultMessage, t: float) -> bool:
        sx, sy = self.sink_position(t)
        p = self.network.positions[msg.current]
        if math.hypot(p[0] - sx, p[1] - sy) <= self.network.d_trx:
            msg.deliver_time = t
            return True
        return False

    def _on_route_hop(self, ev: Event) -> None:
        msg = self.messages[ev.payload]
        t = self.sched.now
        cfg = self.config
        if msg.hops >= msg.ttl:
            msg.failed = True
            return
        tracking = msg.strategy == INVERTED or msg.phase == 2
        self.counts["routing"] += 1
        if tracking:
            self.counts["routing"] += 2 * len(self.network.adjacency[msg.current])
        route = route_inverted_tracking if msg.strategy == INVERTED else route_hybrid
        route(
            msg, self.network, self.intensity_fn(SINK_ID, t), self.route_marks, t,
            self.rng_agent, cfg.fresh_threshold,
        )
        msg.hops += 1
        if not self._check_delivery(msg, t):
            self.sched.schedule(t + cfg.propagation_period, EventKind.ROUTE_HOP, msg.id)

    # -- running -----------------------------------------------------------

    def run(self, t_end: float | None = None) -> list[MetricRow]:
        self.sched.run_until(self.config.t_end if t_end is None else t_end)
        return self.rows

    def run_to_quiescence(self, max_events: int | None = None) -> int:
        return self.sched.run(max_events)

    @property
    def total_messages(self) -> int:
        return sum(self.counts.values())

    # -- exports -----------------------------------------------------------

    def spread_tree(self, target_id: int | None = None):
        """(child, parent, target, time) for every stored SPREAD trace."""
        if self.store.history is None:
            raise RuntimeError("spread tree needs a run with record=True")
        return [
            (r.node, r.parent, r.target_id, r.time)
            for r in self.store.history
            if r.type is TraceType.SPREAD and (target_id is None or r.target_id == target_id)
        ]

    def write_spread_tree(self, path, target_id: int | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for child, parent, tid, t in self.spread_tree(target_id):
                fh.write(f"{child} {parent} {tid} {t!r}\n")

    def write_trajectories(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["agent", "time_s", "node", "mode", "observed_intensity"])
            for a in self.agents:
                for t, node, mode, obs in a.trajectory or ():
                    w.writerow([a.id, repr(float(t)), node, mode, repr(float(obs))])


def _is_multiple(t: float, step: float) -> bool:
    k = round(t / step)
    return abs(t - k * step) < 1e-9


def spread_coverage_run(
    network: Network,
    origin: int,
    config: SimConfig | None = None,
    record: bool = False,
) -> tuple[int, int]:
    """Spread one INITIAL trace from ``origin`` over a static network until
    nothing is left to send. Returns (nodes that stored it, messages sent)."""
    sim = coverage_simulation(network, origin, config, record)
    return len(sim.reached[TARGET_ID]), sim.counts["spread"]


def coverage_simulation(network: Network, origin: int, config: SimConfig | None = None, record: bool = False) -> Simulation:
    cfg = config or SimConfig()
    sim = Simulation(cfg, network=network, record=record, with_target=False, with_agents=False)
    sim.seed_trace(origin, TARGET_ID, 0.0)
    sim.run_to_quiescence()
    return sim
