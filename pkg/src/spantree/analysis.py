"""Analytic containment oracles and campaign statistics.

Given an augmented overlay (honest graph plus the collective adversary node
``m``) and the honest root ``r``, three BFS passes determine everything the
theory predicts about a run:

* the attested protocol's worst-case lost set against a level-minimizing
  adversary: nodes whose adversary route (shortened by the one-level cheat)
  is at most as long as their shortest route to the root;
* the smaller set a disturbance-causing adversary can keep unstable: nodes
  whose cheated adversary route is strictly shorter than their best route to
  the root over honest nodes only;
* the baseline protocol's lost set: nodes strictly closer to the adversary
  than to the root, with equal-distance nodes recorded separately since their
  outcome depends only on tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .graph import INF, Graph, bfs_distances, bfs_distances_avoiding
from .simcore import RunOutcome, WalkStatus, snapshot_status


@dataclass(frozen=True)
class ContainmentReport:
    """Analytic per-instance prediction from the three BFS passes."""

    containment_set: frozenset[int]
    strict_set: frozenset[int]
    baseline_lost: frozenset[int]
    baseline_ties: frozenset[int]
    adv_root_distance: int
    deg_sum: int
    dist_root: np.ndarray
    dist_adv: np.ndarray
    dist_root_honest: np.ndarray
    cheat: bool

    @property
    def disturbance_budget(self) -> int:
        return 2 * self.deg_sum - len(self.containment_set - self.strict_set)


@dataclass(frozen=True)
class RunSummary:
    rln: float
    mean_dist_root: float
    mean_dist_adv: float
    effective_adv_dist: float
    convergence_round: int | None


@dataclass(frozen=True)
class CampaignStats:
    mean: float
    ci99_half_width: float
    count: int


def containment_sets(
    g: Graph, root: int, adversary: int, cheat: bool = True
) -> ContainmentReport:
    """Compute the analytic lost sets for one placement.

    With a single collective adversary the closest-malicious-node distance
    collapses to d(r, m).  ``cheat=False`` drops the one-level shortcut,
    modeling an adversary that follows the protocol faithfully.
    """
    if root == adversary:
        raise ValueError("the root must be honest")
    dist_root = bfs_distances(g, [root])
    dist_adv = bfs_distances(g, [adversary])
    dist_root_honest = bfs_distances_avoiding(g, root, [adversary])
    honest = [u for u in range(g.n) if u != adversary]
    if any(dist_root[u] == INF for u in honest):
        raise ValueError("root cannot reach every honest node; no spanning tree exists")
    if dist_root[adversary] == INF:
        raise ValueError("adversary is disconnected from the overlay")
    adv_root_distance = int(dist_root[adversary])
    offset = 1 if cheat else 0

    s_b = []
    s_l = []
    base = []
    ties = []
    for u in honest:
        if u == root:
            continue
        via_adv = adv_root_distance + dist_adv[u] - offset
        if via_adv <= dist_root[u]:
            s_b.append(u)
        if via_adv < dist_root_honest[u]:
            s_l.append(u)
        if dist_adv[u] < dist_root[u]:
            base.append(u)
        elif dist_adv[u] == dist_root[u]:
            ties.append(u)

    s_b_set = frozenset(s_b)
    s_l_set = frozenset(s_l)
    deg_sum = int(sum(g.degree(u) for u in s_b_set - s_l_set))
    return ContainmentReport(
        containment_set=s_b_set,
        strict_set=s_l_set,
        baseline_lost=frozenset(base),
        baseline_ties=frozenset(ties),
        adv_root_distance=adv_root_distance,
        deg_sum=deg_sum,
        dist_root=dist_root,
        dist_adv=dist_adv,
        dist_root_honest=dist_root_honest,
        cheat=cheat,
    )


def rln(lost, honest) -> float:
    """Ratio of lost nodes: |lost| / |honest|."""
    lost_set = frozenset(lost)
    honest_set = frozenset(honest)
    if not honest_set:
        raise ValueError("honest set is empty")
    if not lost_set <= honest_set:
        raise ValueError("lost set must be a subset of the honest set")
    return len(lost_set) / len(honest_set)


def distance_diagnostics(g: Graph, root: int, adversary: int) -> tuple[float, float, float]:
    """Mean honest-node distances to the root and to the adversary, plus the
    effective adversary distance (the mean adversary distance shifted by the
    level the adversary can credibly claim)."""
    dist_root = bfs_distances(g, [root])
    dist_adv = bfs_distances(g, [adversary])
    honest = [u for u in range(g.n) if u != adversary]
    d_r = float(np.mean([dist_root[u] for u in honest]))
    d_m = float(np.mean([dist_adv[u] for u in honest]))
    big_d = d_m + float(dist_root[adversary]) - 1.0
    return d_r, d_m, big_d


def mean_ci99(samples) -> tuple[float, float]:
    """Sample mean and Student-t 99% confidence half-width."""
    vals = [float(x) for x in samples]
    if len(vals) < 2:
        raise ValueError("need at least two samples")
    n = len(vals)
    mean = sum(vals) / n
    var = sum((x - mean) ** 2 for x in vals) / (n - 1)
    half = float(stats.t.ppf(0.995, n - 1)) * math.sqrt(var / n)
    return mean, half


def campaign_stats(samples) -> CampaignStats:
    """Per-cell aggregate of a sampled metric."""
    mean, half = mean_ci99(samples)
    return CampaignStats(mean=mean, ci99_half_width=half, count=len(list(samples)))


def simulated_lost_set(outcome: RunOutcome, window_start_round: int) -> frozenset[int]:
    """Measured lost set: honest nodes that changed level or pid anywhere in
    the window, or whose final parent chain runs through the adversary."""
    window = [s for s in outcome.trace if s.round >= window_start_round]
    if len(window) < 2:
        raise ValueError("trace too short for the requested window")
    g = outcome.cfg.graph
    malicious = outcome.final.malicious
    honest = outcome.honest
    lost: set[int] = set()
    for a, b in zip(window, window[1:]):
        for u in honest:
            if a.levels[u] != b.levels[u] or a.pids[u] != b.pids[u]:
                lost.add(u)
    last = window[-1]
    for u in honest:
        if snapshot_status(g, outcome.cfg.root, malicious, last, u) is WalkStatus.ILL:
            lost.add(u)
    return frozenset(lost)
