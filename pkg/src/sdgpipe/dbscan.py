"""Density clustering over map points, plus label utilities.

A point is core when its closed eps-ball (itself included) holds at least
min_pts points. Clusters grow by breadth-first expansion from core points in
input order, so cluster ids are assigned deterministically: id 0 goes to the
cluster seeded by the lowest-index core point, and a border point reachable
from several clusters keeps the id of the cluster that reached it first.
Unreachable points get the noise label -1.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from sdgpipe.errors import EmptyClusterError, ShapeMismatchError

NOISE = -1
_UNVISITED = -2

DEFAULT_MIN_PTS = 5


@dataclass(frozen=True)
class ClusterLabels:
    """Per-point integer labels (noise = -1) and the parameters that made them."""

    labels: np.ndarray
    eps: float
    min_pts: int

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max(initial=-1) + 1)

    @property
    def noise_fraction(self) -> float:
        return float(np.mean(self.labels == NOISE))


@dataclass(frozen=True)
class ClusterSwitch:
    """A country whose label changes between consecutive panel years."""

    country: str
    year: int
    from_cluster: int
    to_cluster: int


def _labels_from_distances(dist: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    n = dist.shape[0]
    core = (dist <= eps).sum(axis=1) >= min_pts
    labels = np.full(n, _UNVISITED, dtype=int)
    cluster_id = 0
    for seed in range(n):
        if labels[seed] != _UNVISITED:
            continue
        if not core[seed]:
            labels[seed] = NOISE
            continue
        labels[seed] = cluster_id
        queue = deque(np.flatnonzero(dist[seed] <= eps).tolist())
        while queue:
            point = queue.popleft()
            if labels[point] == NOISE:
                labels[point] = cluster_id  # border point reclaimed from noise
            if labels[point] != _UNVISITED:
                continue
            labels[point] = cluster_id
            if core[point]:
                queue.extend(np.flatnonzero(dist[point] <= eps).tolist())
        cluster_id += 1
    return labels


def cluster(points: np.ndarray, eps: float, min_pts: int = DEFAULT_MIN_PTS) -> ClusterLabels:
    """Label every row of points; eps > 0 and min_pts >= 1 required."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty 2-d array")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    dist = cdist(points, points)
    labels = _labels_from_distances(dist, eps, min_pts)
    labels.flags.writeable = False
    return ClusterLabels(labels=labels, eps=float(eps), min_pts=int(min_pts))


def scan_eps(
    points: np.ndarray,
    eps_values: np.ndarray,
    min_pts: int = DEFAULT_MIN_PTS,
) -> list[tuple[float, int, float]]:
    """(eps, n_clusters, noise_fraction) for each eps; no winner is picked."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty 2-d array")
    eps_values = [float(e) for e in np.asarray(eps_values, dtype=float).ravel()]
    if not eps_values or any(e <= 0 for e in eps_values):
        raise ValueError("eps grid must be nonempty and positive")
    dist = cdist(points, points)
    rows = []
    for eps in eps_values:
        labels = _labels_from_distances(dist, eps, min_pts)
        n_clusters = int(labels.max(initial=-1) + 1)
        rows.append((eps, n_clusters, float(np.mean(labels == NOISE))))
    return rows


def final_year_membership(labels: np.ndarray, index: list[tuple[str, int]]) -> dict[str, int]:
    """Each country's label in its last panel year (noise included, as -1)."""
    labels = np.asarray(labels)
    if labels.shape != (len(index),):
        raise ShapeMismatchError(
            f"{labels.shape[0] if labels.ndim else 0} labels for {len(index)} observations"
        )
    latest: dict[str, int] = {}
    latest_year: dict[str, int] = {}
    for label, (country, year) in zip(labels, index):
        if country not in latest_year or year > latest_year[country]:
            latest_year[country] = year
            latest[country] = int(label)
    return latest


def members_of(membership: dict[str, int], cluster_id: int) -> list[str]:
    """Countries assigned to cluster_id, sorted; raises when none are."""
    members = sorted(c for c, lab in membership.items() if lab == cluster_id)
    if not members:
        raise EmptyClusterError(cluster_id)
    return members


def detect_switches(
    labels: np.ndarray, index: list[tuple[str, int]]
) -> list[ClusterSwitch]:
    """Label changes between consecutive years, per country.

    The reported year is the first year of the new label. Countries are
    scanned in sorted order, years ascending.
    """
    labels = np.asarray(labels)
    if labels.shape != (len(index),):
        raise ShapeMismatchError(
            f"{labels.shape[0] if labels.ndim else 0} labels for {len(index)} observations"
        )
    by_country: dict[str, list[tuple[int, int]]] = {}
    for label, (country, year) in zip(labels, index):
        by_country.setdefault(country, []).append((year, int(label)))
    switches = []
    for country in sorted(by_country):
        series = sorted(by_country[country])
        for (_, prev), (year, cur) in zip(series, series[1:]):
            if cur != prev:
                switches.append(
                    ClusterSwitch(country=country, year=year, from_cluster=prev, to_cluster=cur)
                )
    return switches


def adjusted_rand_index(a: np.ndarray, b: np.ndarray) -> float:
    """Adjusted Rand index between two labelings of the same points.

    Noise labels participate as ordinary groups. Returns 1.0 when the
    pair-counting denominator vanishes (both labelings trivial and equal).
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ShapeMismatchError(f"label arrays {a.shape} vs {b.shape}")
    n = a.size
    if n == 0:
        raise ValueError("need at least one point")

    def comb2(x: np.ndarray) -> float:
        return float((x * (x - 1) // 2).sum())

    _, a_ids = np.unique(a, return_inverse=True)
    _, b_ids = np.unique(b, return_inverse=True)
    table = np.zeros((a_ids.max() + 1, b_ids.max() + 1), dtype=np.int64)
    np.add.at(table, (a_ids, b_ids), 1)
    sum_cells = comb2(table)
    sum_rows = comb2(table.sum(axis=1))
    sum_cols = comb2(table.sum(axis=0))
    total = n * (n - 1) / 2
    expected = sum_rows * sum_cols / total if total else 0.0
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return (sum_cells - expected) / (maximum - expected)
