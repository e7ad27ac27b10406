"""Per-beam learning agents, their shared status board, and baseline pickers.

Beam statuses, masks and contexts are plain integer bit vectors: bit i is
beam i. An agent sees the global status through its mask (bitwise AND), so
its context space is 2**popcount(mask). Context learning keeps a running
mean reward per observed context; at decision time the agent serves only
when the current context's mean beats the average of all observed context
means, otherwise it backs off for that context's typical connection length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from beamsim.analytic import HighwayGeometry, Layout, _contains_xy
MASK_SAMPLE_STEP = 0.5


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def derive_mask(layout: Layout, hw_geom: HighwayGeometry, beam_id: int,
                sample_step: float = MASK_SAMPLE_STEP) -> int:
    """Potential-interferer mask for one beam.

    Bit k is set when beam k's footprint overlaps beam `beam_id`'s footprint
    inside the highway strip (membership tested on a sampling grid), or when
    the two beams radiate from the same origin on adjacent sectors (shared
    edge ray; zero-area overlap that still marks a potential interferer).
    The beam's own bit stays clear.
    """
    me = layout.beams[beam_id]
    xs = np.arange(0.0, hw_geom.length + sample_step / 2, sample_step)
    ys = hw_geom.y_south + np.arange(
        sample_step / 2, hw_geom.width, sample_step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    mine = _contains_xy(me, gx, gy)

    mask = 0
    for other in layout.beams:
        if other.id == beam_id:
            continue
        overlap = bool(np.any(mine & _contains_xy(other, gx, gy)))
        adjacent = (
            other.origin_x == me.origin_x and other.origin_y == me.origin_y
            and abs(abs(_angle_diff(other.pointing, me.pointing))
                    - 0.5 * (other.beamwidth + me.beamwidth)) < 1e-9)
        if overlap or adjacent:
            mask |= 1 << other.id
    return mask


def _angle_diff(a: float, b: float) -> float:
    return (a - b + math.pi) % (2 * math.pi) - math.pi


class CentralNode:
    """Passive status registry: pools beam active/idle bits, decides nothing.

    Push/pull counters meter the signaling volume; a push that does not
    change the bit is a no-op and is not metered.
    """

    def __init__(self, beam_count: int):
        self.beam_count = beam_count
        self.status = 0
        self.push_count = 0
        self.pull_count = 0

    def push_status(self, beam_id: int, active: bool) -> None:
        bit = 1 << beam_id
        new = (self.status | bit) if active else (self.status & ~bit)
        if new != self.status:
            self.status = new
            self.push_count += 1

    def pull_status(self) -> int:
        self.pull_count += 1
        return self.status


def observe_context(node: CentralNode, mask: int) -> int:
    """Masked view of the global status: the agent's own context."""
    return node.pull_status() & mask


@dataclass
class ContextStats:
    """Running statistics for one observed context."""

    mean_reward: float = 0.0
    trials: int = 0
    mean_duration: float = 0.0

    def update(self, reward: float, duration: float) -> None:
        if not math.isfinite(reward):
            raise ValueError(f"reward must be finite, got {reward}")
        if duration <= 0:
            raise ValueError(f"duration must be positive, got {duration}")
        self.mean_reward = (self.mean_reward * self.trials + reward) / (self.trials + 1)
        self.mean_duration = (self.mean_duration * self.trials + duration) / (self.trials + 1)
        self.trials += 1


class Action(Enum):
    SERVE = "serve"
    EXPLORE = "explore"
    BACKOFF = "backoff"


@dataclass(frozen=True)
class Decision:
    action: Action
    backoff_s: float = 0.0


@dataclass
class ContextAgent:
    """Explore-first context-learning agent for one beam."""

    beam_id: int
    mask: int
    exploration_end: float
    epsilon: float = 0.05
    contexts: dict[int, ContextStats] = field(default_factory=dict)
    backoff_until: float | None = None
    services: int = 0
    exploration_services: int = 0
    explore_decisions: int = 0

    def in_backoff(self, now: float) -> bool:
        return self.backoff_until is not None and now < self.backoff_until

    def update_reward(self, context: int, reward: float, duration: float) -> None:
        stats = self.contexts.setdefault(context, ContextStats())
        stats.update(reward, duration)

    def classification_threshold(self) -> float:
        """Unweighted mean of per-context mean rewards over observed contexts."""
        if not self.contexts:
            raise ValueError("no contexts observed yet")
        return sum(s.mean_reward for s in self.contexts.values()) / len(self.contexts)

    def _backoff_duration(self, context: int) -> float:
        stats = self.contexts.get(context)
        if stats is not None and stats.trials > 0:
            return stats.mean_duration
        trials = sum(s.trials for s in self.contexts.values())
        if trials > 0:
            total = sum(s.mean_duration * s.trials for s in self.contexts.values())
            return total / trials
        return 1.0

    def decide(self, context: int, now: float, rng) -> Decision:
        """Serve, explore, or back off under the given masked context.

        Exploration phase serves unconditionally. In exploitation the agent
        explores with probability epsilon, otherwise serves only when the
        context's mean reward beats the average over observed context means
        (an unseen context scores 0 and so backs off once anything better
        has been seen).
        """
        if now < self.exploration_end:
            return Decision(Action.SERVE)
        if rng.uniform() < self.epsilon:
            self.explore_decisions += 1
            return Decision(Action.EXPLORE)
        if not self.contexts:
            return Decision(Action.EXPLORE)
        threshold = self.classification_threshold()
        stats = self.contexts.get(context)
        mean = stats.mean_reward if stats is not None else 0.0
        if mean > threshold:
            return Decision(Action.SERVE)
        duration = self._backoff_duration(context)
        self.backoff_until = now + duration
        return Decision(Action.BACKOFF, backoff_s=duration)


def compute_reward(bits_delivered: float, connection_duration: float) -> float:
    """Goodput rate: successfully delivered bits per second of connection."""
    if connection_duration <= 0:
        raise ValueError(f"duration must be positive, got {connection_duration}")
    return bits_delivered / connection_duration


def select_random(candidates, rng) -> int:
    """Uniform pick among candidate vehicle ids."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to select from")
    return candidates[int(rng.integers(len(candidates)))]


def select_best_snr(candidates_with_distance) -> int:
    """Strongest-uplink pick: nearest vehicle, ties to the lowest id."""
    items = list(candidates_with_distance)
    if not items:
        raise ValueError("no candidates to select from")
    return min(items, key=lambda vd: (vd[1], vd[0]))[0]
