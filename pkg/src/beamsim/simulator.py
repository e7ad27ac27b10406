"""Deterministic fixed-step simulation of beam allocation on the highway.

Tick order: move vehicles (wrapping finished transits), close connections
whose vehicle left the serving footprint, let idle beams decide in ascending
id order, then measure every live connection and label every vehicle tick as
exactly one of service / interference / outage. Identical config and seed
reproduce the run bit for bit.

Interference comes in two flavours. Geometric: a served vehicle is
interfered while it sits inside any other same-band beam that is itself
serving. Practical: the link budget decides; a tick is interfered when the
SINR falls below the decode threshold while a same-band interferer covers
the vehicle, and beam footprints shrink to the SNR-threshold radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from beamsim.agents import (
    Action,
    CentralNode,
    ContextAgent,
    compute_reward,
    derive_mask,
    observe_context,
    popcount,
    select_best_snr,
    select_random,
)
from beamsim.analytic import HighwayGeometry, Layout
from beamsim.channel import ChannelParams, practical_beam_radius
from beamsim.mobility import TrafficConfig, spawn_population, wrap
from beamsim.scenario import ScenarioParams, build_highway, build_layout, monitored_beam_id

POLICIES = ("macol", "best_snr", "random")
MODES = ("geometric", "practical")

SERVICE, INTERFERENCE, OUTAGE = "service", "interference", "outage"

_mask_cache: dict = {}


def _masks_for(layout: Layout, hw: HighwayGeometry, key) -> list[int]:
    if key not in _mask_cache:
        _mask_cache[key] = [derive_mask(layout, hw, i)
                            for i in range(len(layout.beams))]
    return _mask_cache[key]


@dataclass(frozen=True)
class SimConfig:
    policy: str = "macol"
    interference_mode: str = "geometric"
    vehicle_count: int = 30
    sim_duration_s: float = 2000.0
    exploration_s: float = 600.0
    epsilon: float = 0.05
    dt_s: float = 0.1
    seed: int = 1
    band_count: int = 1
    warmup_s: float = 60.0
    window_s: float = 10.0
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.interference_mode not in MODES:
            raise ValueError(f"interference_mode must be one of {MODES}")
        if self.dt_s <= 0 or self.sim_duration_s <= 0:
            raise ValueError("dt_s and sim_duration_s must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.band_count < 1:
            raise ValueError("band_count must be >= 1")

    @property
    def effective_exploration_s(self) -> float:
        """Baselines have no learning phase; everything is exploitation."""
        return self.exploration_s if self.policy == "macol" else 0.0


@dataclass
class Connection:
    beam_id: int
    vehicle_slot: int
    vehicle_id: int
    band: int
    start_s: float
    context: int
    explore: bool
    x0_m: float = 0.0
    lane: int = 0
    speed_mps: float = 0.0
    heading: float = 0.0
    ticks: int = 0
    clean_ticks: int = 0
    interfered_ticks: int = 0
    undecodable_ticks: int = 0
    bits: float = 0.0
    clean_m: float = 0.0
    sinr_db_sum: float = 0.0


@dataclass
class _Transit:
    vehicle_id: int
    start_s: float
    ticks: int = 0
    service: int = 0
    interference: int = 0
    outage: int = 0


def classify_tick(mode: str, covering_interferers: int,
                  decodable: bool | None = None) -> str:
    """Label one connected tick.

    Geometric: interfered iff any other same-band serving beam covers the
    vehicle. Practical: interfered iff such a beam exists and the SINR fell
    below the decode threshold.
    """
    if mode == "geometric":
        return INTERFERENCE if covering_interferers > 0 else SERVICE
    if mode == "practical":
        if decodable is None:
            raise ValueError("practical mode needs the decodability flag")
        return INTERFERENCE if covering_interferers > 0 and not decodable else SERVICE
    raise ValueError(f"unknown interference mode {mode!r}")


def assign_band(mask: int, live: dict[int, "Connection"], band_count: int) -> int:
    """Least-loaded band among the beam's potential interferers, ties low."""
    if band_count == 1:
        return 0
    loads = [0] * band_count
    for conn in live.values():
        if (mask >> conn.beam_id) & 1:
            loads[conn.band] += 1
    return min(range(band_count), key=lambda b: (loads[b], b))


def transit_decomposition(transit: dict) -> tuple[float, float, float]:
    """(service, interference, outage) fractions of one completed transit."""
    total = transit["ticks"]
    if total <= 0:
        raise ValueError("empty transit")
    return (transit["service"] / total, transit["interference"] / total,
            transit["outage"] / total)


class _PhaseAccumulator:
    """Vehicle-tick label counts, split by learning phase, warm-up excluded."""

    def __init__(self):
        self.counts = {phase: {SERVICE: 0, INTERFERENCE: 0, OUTAGE: 0}
                       for phase in ("exploration", "exploitation")}

    def add(self, phase: str, label: str):
        self.counts[phase][label] += 1

    def fractions(self, phase: str) -> dict:
        c = self.counts[phase]
        total = sum(c.values())
        if total == 0:
            return {SERVICE: 0.0, INTERFERENCE: 0.0, OUTAGE: 0.0, "ticks": 0}
        return {SERVICE: c[SERVICE] / total, INTERFERENCE: c[INTERFERENCE] / total,
                OUTAGE: c[OUTAGE] / total, "ticks": total}


@dataclass
class MetricsReport:
    """Everything a run produced, in plain serializable structures."""

    config: dict
    aggregates: dict
    per_beam: dict
    signaling: dict
    loss: dict
    windows: list
    transits: list
    service_samples: list
    sinr_services: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1) + "\n"

    def summary(self) -> dict:
        return {
            "config": self.config,
            "aggregates": self.aggregates,
            "per_beam": self.per_beam,
            "signaling": self.signaling,
            "loss": self.loss,
        }


def _service_distance_stats(samples: list, phase: str) -> dict:
    vals = [s["clean_m"] for s in samples if s["phase"] == phase]
    if not vals:
        return {"count": 0, "mean_m": 0.0, "zero_fraction": 0.0}
    return {
        "count": len(vals),
        "mean_m": float(np.mean(vals)),
        "zero_fraction": float(np.mean([v == 0.0 for v in vals])),
    }


def run(config: SimConfig) -> MetricsReport:
    """Execute one simulation and collect the full metrics report."""
    rng = np.random.default_rng(config.seed)
    params = config.scenario
    if config.interference_mode == "practical":
        radius = practical_beam_radius(config.channel)
        layout = build_layout(params, beam_radius=radius)
    else:
        radius = params.beam_radius
        layout = build_layout(params)
    hw = build_highway(params)
    beams = layout.beams
    n_beams = len(beams)
    masks = _masks_for(layout, hw, (params, radius))
    node = CentralNode(n_beams)
    exploration_end = config.effective_exploration_s

    agents = {
        b.id: ContextAgent(beam_id=b.id, mask=masks[b.id],
                           exploration_end=exploration_end,
                           epsilon=config.epsilon)
        for b in beams
    } if config.policy == "macol" else {}

    traffic = TrafficConfig(vehicle_count=config.vehicle_count, highway=hw)
    fleet = spawn_population(traffic, rng)
    next_vehicle_id = config.vehicle_count
    lane_y = np.array([hw.lane_y(v.lane_index) for v in fleet])
    xs = np.array([v.x for v in fleet])
    vel = np.array([math.cos(v.heading) * v.speed for v in fleet])
    seg_len = hw.length

    bx = np.array([b.origin_x for b in beams])
    by = np.array([b.origin_y for b in beams])
    btheta = np.array([b.pointing for b in beams])
    br2 = np.array([b.radius ** 2 for b in beams])
    bhw = np.array([b.half_width for b in beams])

    live: dict[int, Connection] = {}
    conn_of_slot: dict[int, int] = {}
    transits = {v.id: _Transit(v.id, v.spawn_time) for v in fleet}
    slot_transit = {i: fleet[i].id for i in range(len(fleet))}

    finished_transits: list[dict] = []
    service_samples: list[dict] = []
    sinr_services: list[dict] = []
    phase_acc = _PhaseAccumulator()
    n_windows = int(math.ceil(config.sim_duration_s / config.window_s))
    window_counts = np.zeros((n_windows, 3), dtype=np.int64)
    per_beam = {b.id: {"services": 0, "exploration_services": 0,
                       "explore_decisions": 0, "backoffs": 0} for b in beams}
    loss_ticks = {"undecodable_service_ticks": 0, "service_ticks": 0}

    snr_threshold = config.channel.snr_threshold_db
    noise_mw = 10.0 ** ((-174.0 + 10.0 * math.log10(config.channel.bandwidth_hz)
                         + config.channel.noise_figure_db) / 10.0)
    eirp_db = config.channel.tx_power_dbm + config.channel.beamforming_gain_db
    pl_const = 32.4 + 20.0 * math.log10(config.channel.carrier_ghz)

    def rx_mw(d: float) -> float:
        alpha = (config.channel.alpha_near if d < config.channel.breakpoint_m
                 else config.channel.alpha_far)
        pl = pl_const + 10.0 * alpha * math.log10(max(d, 1e-3))
        return 10.0 ** ((eirp_db - pl) / 10.0)

    def close_connection(conn: Connection, now: float):
        duration = conn.ticks * config.dt_s
        beam_id = conn.beam_id
        if conn.ticks > 0:
            reward = compute_reward(conn.bits, duration)
            phase = "exploration" if conn.start_s < exploration_end else "exploitation"
            if config.policy == "macol":
                agents[beam_id].update_reward(conn.context, reward, duration)
            per_beam[beam_id]["services"] += 1
            if now <= exploration_end:
                per_beam[beam_id]["exploration_services"] += 1
            service_samples.append({
                "beam": beam_id, "start_s": conn.start_s, "duration_s": duration,
                "clean_m": conn.clean_m, "reward": reward, "band": conn.band,
                "explore": conn.explore, "phase": phase,
                "undecodable_ticks": conn.undecodable_ticks, "ticks": conn.ticks,
                "x0_m": conn.x0_m, "lane": conn.lane,
                "speed_mps": conn.speed_mps, "heading": conn.heading,
            })
            if config.interference_mode == "practical":
                sinr_services.append({
                    "beam": beam_id, "start_s": conn.start_s,
                    "duration_s": duration,
                    "mean_sinr_db": conn.sinr_db_sum / conn.ticks,
                    "phase": phase,
                })
        node.push_status(beam_id, False)
        del live[beam_id]
        del conn_of_slot[conn.vehicle_slot]

    n_ticks = int(round(config.sim_duration_s / config.dt_s))
    for tick in range(n_ticks):
        now = (tick + 1) * config.dt_s

        # 1. move vehicles; wrap finished transits (dropping their connections)
        xs += vel * config.dt_s
        wrapped = np.flatnonzero(((vel > 0) & (xs >= seg_len))
                                 | ((vel < 0) & (xs <= 0.0)))
        for slot in wrapped:
            slot = int(slot)
            if slot in conn_of_slot:
                close_connection(live[conn_of_slot[slot]], now)
            tr = transits.pop(slot_transit[slot])
            if tr.ticks > 0:
                finished_transits.append({
                    "vehicle_id": tr.vehicle_id, "start_s": tr.start_s,
                    "end_s": now, "ticks": tr.ticks, "service": tr.service,
                    "interference": tr.interference, "outage": tr.outage,
                })
            fresh = wrap(fleet[slot], traffic, rng, next_vehicle_id, now)
            next_vehicle_id += 1
            fleet[slot] = fresh
            xs[slot] = fresh.x
            vel[slot] = math.cos(fresh.heading) * fresh.speed
            transits[fresh.id] = _Transit(fresh.id, now)
            slot_transit[slot] = fresh.id

        # 2. containment of every vehicle in every beam footprint
        dx = xs[:, None] - bx[None, :]
        dy = lane_y[:, None] - by[None, :]
        d2 = dx * dx + dy * dy
        rel = np.arctan2(dy, dx) - btheta[None, :]
        rel = (rel + math.pi) % (2 * math.pi) - math.pi
        covered = (d2 <= br2[None, :]) & (np.abs(rel) <= bhw[None, :])

        # 3. close connections whose vehicle left the serving footprint
        for beam_id in sorted(live):
            conn = live[beam_id]
            if not covered[conn.vehicle_slot, beam_id]:
                close_connection(conn, now)

        # 4. idle beams decide, ascending id
        for beam_id in range(n_beams):
            if beam_id in live:
                continue
            agent = agents.get(beam_id)
            if agent is not None and agent.in_backoff(now):
                continue
            slots = [int(s) for s in np.flatnonzero(covered[:, beam_id])
                     if int(s) not in conn_of_slot]
            if not slots:
                continue
            explore = False
            context = 0
            if config.policy == "macol":
                context = observe_context(node, masks[beam_id])
                decision = agent.decide(context, now, rng)
                if decision.action is Action.BACKOFF:
                    per_beam[beam_id]["backoffs"] += 1
                    continue
                explore = decision.action is Action.EXPLORE
                pick = select_random([fleet[s].id for s in slots], rng)
            elif config.policy == "random":
                pick = select_random([fleet[s].id for s in slots], rng)
            else:
                pick = select_best_snr(
                    [(fleet[s].id, math.sqrt(d2[s, beam_id])) for s in slots])
            slot = next(s for s in slots if fleet[s].id == pick)
            band = assign_band(masks[beam_id], live, config.band_count)
            live[beam_id] = Connection(
                beam_id=beam_id, vehicle_slot=slot, vehicle_id=pick, band=band,
                start_s=now, context=context, explore=explore,
                x0_m=float(xs[slot]), lane=fleet[slot].lane_index,
                speed_mps=fleet[slot].speed, heading=fleet[slot].heading)
            conn_of_slot[slot] = beam_id
            node.push_status(beam_id, True)

        # 5. measure live connections and label every vehicle tick
        labels = [OUTAGE] * len(fleet)
        for beam_id, conn in live.items():
            slot = conn.vehicle_slot
            interferers = [b for b, other in live.items()
                           if b != beam_id and other.band == conn.band
                           and covered[slot, b]]
            if config.interference_mode == "geometric":
                label = classify_tick("geometric", len(interferers))
                clean = label == SERVICE
                if clean:
                    conn.bits += config.dt_s
            else:
                serving_d = math.sqrt(d2[slot, beam_id])
                interference_mw = sum(rx_mw(math.sqrt(d2[slot, b]))
                                      for b in interferers)
                sinr = 10.0 * math.log10(
                    rx_mw(serving_d) / (noise_mw + interference_mw))
                decodable = sinr >= snr_threshold
                label = classify_tick("practical", len(interferers), decodable)
                clean = label == SERVICE
                conn.sinr_db_sum += sinr
                if decodable:
                    conn.bits += config.dt_s * config.channel.bandwidth_hz * (
                        math.log2(1.0 + 10.0 ** (sinr / 10.0)))
                else:
                    conn.undecodable_ticks += 1
                loss_ticks["undecodable_service_ticks"] += 0 if decodable else 1
            loss_ticks["service_ticks"] += 1
            conn.ticks += 1
            if clean:
                conn.clean_ticks += 1
                conn.clean_m += fleet[slot].speed * config.dt_s
            else:
                conn.interfered_ticks += 1
            labels[slot] = label

        phase = "exploration" if now <= exploration_end else "exploitation"
        win = min(int((now - 1e-9) / config.window_s), n_windows - 1)
        for slot, label in enumerate(labels):
            tr = transits[slot_transit[slot]]
            tr.ticks += 1
            if label == SERVICE:
                tr.service += 1
            elif label == INTERFERENCE:
                tr.interference += 1
            else:
                tr.outage += 1
            col = (SERVICE, INTERFERENCE, OUTAGE).index(label)
            window_counts[win, col] += 1
            if now > config.warmup_s:
                phase_acc.add(phase, label)

    windows = []
    for i, counts in enumerate(window_counts):
        total = int(counts.sum())
        windows.append({
            "t0_s": i * config.window_s,
            "t1_s": min((i + 1) * config.window_s, config.sim_duration_s),
            SERVICE: int(counts[0]) / total if total else 0.0,
            INTERFERENCE: int(counts[1]) / total if total else 0.0,
            OUTAGE: int(counts[2]) / total if total else 0.0,
        })

    per_beam_out = {}
    for beam_id, stats in per_beam.items():
        agent = agents.get(beam_id)
        per_beam_out[str(beam_id)] = dict(
            stats,
            contexts_observed=len(agent.contexts) if agent else 0,
            mask_popcount=popcount(masks[beam_id]),
        )

    service_ticks = loss_ticks["service_ticks"]
    loss_rate = (loss_ticks["undecodable_service_ticks"] / service_ticks
                 if service_ticks else 0.0)
    phase_loss = {}
    for phase in ("exploration", "exploitation"):
        sam = [s for s in service_samples if s["phase"] == phase]
        ticks = sum(s["ticks"] for s in sam)
        bad = sum(s["undecodable_ticks"] for s in sam)
        phase_loss[f"loss_rate_{phase}"] = bad / ticks if ticks else 0.0

    aggregates = {
        "exploration": phase_acc.fractions("exploration"),
        "exploitation": phase_acc.fractions("exploitation"),
        "service_distance_exploitation": _service_distance_stats(
            service_samples, "exploitation"),
        "service_distance_exploration": _service_distance_stats(
            service_samples, "exploration"),
        "completed_transits": len(finished_transits),
    }

    return MetricsReport(
        config=_config_dict(config),
        aggregates=aggregates,
        per_beam=per_beam_out,
        signaling={"pushes": node.push_count, "pulls": node.pull_count},
        loss=dict(loss_ticks, loss_rate=loss_rate, **phase_loss),
        windows=windows,
        transits=finished_transits,
        service_samples=service_samples,
        sinr_services=sinr_services,
    )


def _config_dict(config: SimConfig) -> dict:
    out = asdict(config)
    out["effective_exploration_s"] = config.effective_exploration_s
    return out


def monitored_beam(config: SimConfig) -> int:
    """Default SINR-trace beam: the center south-side north-pointing one."""
    return monitored_beam_id(build_layout(config.scenario))
