"""Sub-school formation through follower/leader links.

The link formator lets each fish sample one random peer per iteration and
follow it when the peer is heavier; an existing follower may switch leaders
when its own followers collectively outweigh the sampled peer. Links from a
follower grown heavier than its leader are broken after the pass, and links
that would close a cycle are refused, so the graph is always a forest.

Leader-aware movement replaces the school-wide aggregates: the instinctive
drift mixes only the fish's own displacement with its leader's, ramped up by
rho = t / horizon over the run, and the volitive barycenter is computed per
fish from the fish/leader pair (a leaderless fish does not move).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Problem, clamp
from .school import Fish

__all__ = [
    "LinkGraph",
    "link_formator",
    "instinctive_with_leader",
    "volitive_with_leader",
    "leader_instinctive_step",
    "leader_volitive_step",
]


@dataclass
class LinkGraph:
    """Follower-to-leader map; entry -1 means no leader."""

    leader: np.ndarray  # (n,) int

    @classmethod
    def empty(cls, n: int) -> "LinkGraph":
        return cls(leader=np.full(n, -1, dtype=np.int64))

    @property
    def size(self) -> int:
        return self.leader.shape[0]

    def leader_of(self, i: int) -> int | None:
        l = int(self.leader[i])
        return None if l < 0 else l

    def follower_weight_sum(self, i: int, weights: np.ndarray) -> float:
        return float(weights[self.leader == i].sum())

    def links(self) -> list[tuple[int, int]]:
        return [(a, int(l)) for a, l in enumerate(self.leader) if l >= 0]

    def is_forest(self) -> bool:
        """Out-degree is <= 1 by construction; check every chain terminates."""
        n = self.size
        for start in range(n):
            seen = set()
            node = start
            while node >= 0:
                if node in seen:
                    return False
                seen.add(node)
                node = int(self.leader[node])
        return True


def _chain_reaches(leader: np.ndarray, start: int, target: int) -> bool:
    node = start
    while node >= 0:
        if node == target:
            return True
        node = int(leader[node])
    return False


def link_formator(
    weights: np.ndarray, links: LinkGraph, rng: np.random.Generator
) -> LinkGraph:
    """One link-formation pass over the school in index order.

    Each fish a samples one uniform random peer b != a. A leaderless a starts
    following a strictly heavier b; an a that already has a leader switches to
    b when the summed weight of a's own followers exceeds b's weight. Any link
    that would close a cycle is refused. Afterwards every link whose follower
    became strictly heavier than its leader is broken.
    """
    n = links.size
    leader = links.leader.copy()
    if n < 2:
        return LinkGraph(leader=leader)
    weights = np.asarray(weights, dtype=float)
    raw = rng.integers(0, n - 1, size=n)
    partner = raw + (raw >= np.arange(n))

    follower_sum = np.zeros(n)
    for a, l in enumerate(leader):
        if l >= 0:
            follower_sum[l] += weights[a]

    for a in range(n):
        b = int(partner[a])
        current = int(leader[a])
        if current < 0:
            if weights[b] > weights[a] and not _chain_reaches(leader, b, a):
                leader[a] = b
                follower_sum[b] += weights[a]
        elif b != current:
            if follower_sum[a] > weights[b] and not _chain_reaches(leader, b, a):
                leader[a] = b
                follower_sum[current] -= weights[a]
                follower_sum[b] += weights[a]

    for a in range(n):
        l = int(leader[a])
        if l >= 0 and weights[a] > weights[l]:
            leader[a] = -1
    return LinkGraph(leader=leader)


def instinctive_with_leader(fish: Fish, leader: Fish | None, rho: float) -> np.ndarray:
    """Leader-aware instinctive displacement, scaled by the ramp ``rho``.

    Mixes the fish's and its leader's last displacements weighted by their
    score deltas; a zero combined delta yields no displacement.
    """
    if rho < 0.0 or rho > 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    num = fish.delta_x * fish.delta_f
    den = fish.delta_f
    if leader is not None:
        num = num + leader.delta_x * leader.delta_f
        den = den + leader.delta_f
    if den == 0.0:
        return np.zeros_like(fish.position)
    return rho * (num / den)


def volitive_with_leader(
    fish: Fish,
    leader: Fish | None,
    problem: Problem,
    step_vol: float | np.ndarray,
    weight_increased: bool,
    rng: np.random.Generator,
) -> np.ndarray:
    """Volitive move toward/away from the fish/leader pair barycenter.

    A leaderless fish has its own position as barycenter and does not move;
    likewise a fish exactly at the pair barycenter. Returns the new position.
    """
    if leader is None:
        return fish.position.copy()
    pair_b = (fish.position * fish.weight + leader.position * leader.weight) / (
        fish.weight + leader.weight
    )
    diff = fish.position - pair_b
    dist = float(np.linalg.norm(diff))
    if dist == 0.0:
        return fish.position.copy()
    r = rng.random(fish.position.shape)
    sign = -1.0 if weight_increased else 1.0
    return clamp(problem, fish.position + sign * step_vol * r * diff / dist)


def leader_instinctive_step(
    positions: np.ndarray,
    delta_x: np.ndarray,
    delta_f: np.ndarray,
    links: LinkGraph,
    rho: float,
    lower: np.ndarray,
    upper: np.ndarray,
) -> np.ndarray:
    """Whole-school leader-aware instinctive movement (vectorized).

    Row-for-row equivalent to :func:`instinctive_with_leader` applied to each
    fish against the frozen link graph.
    """
    has_leader = links.leader >= 0
    num = delta_x * delta_f[:, None]
    den = delta_f.astype(float).copy()
    if has_leader.any():
        li = links.leader[has_leader]
        num[has_leader] = num[has_leader] + delta_x[li] * delta_f[li, None]
        den[has_leader] += delta_f[li]
    drift = np.zeros_like(positions)
    np.divide(num, den[:, None], out=drift, where=den[:, None] != 0.0)
    return np.clip(positions + rho * drift, lower, upper)


def leader_volitive_step(
    positions: np.ndarray,
    weights: np.ndarray,
    links: LinkGraph,
    step_vol: float | np.ndarray,
    weight_increased: bool,
    draws: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
) -> np.ndarray:
    """Whole-school leader-aware volitive movement (vectorized).

    ``draws`` holds one uniform [0, 1) row per fish; only rows of fish that
    actually move are consumed. Row-for-row equivalent to
    :func:`volitive_with_leader`.
    """
    out = positions.copy()
    followers = np.flatnonzero(links.leader >= 0)
    if followers.size == 0:
        return out
    li = links.leader[followers]
    wf = weights[followers]
    wl = weights[li]
    pair_b = (positions[followers] * wf[:, None] + positions[li] * wl[:, None]) / (
        wf + wl
    )[:, None]
    diff = positions[followers] - pair_b
    dist = np.linalg.norm(diff, axis=1)
    moving = dist > 0.0
    if moving.any():
        tgt = followers[moving]
        sign = -1.0 if weight_increased else 1.0
        step = sign * step_vol * draws[tgt] * diff[moving] / dist[moving, None]
        out[tgt] = np.clip(positions[tgt] + step, lower, upper)
    return out
