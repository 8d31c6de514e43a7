"""Loading, validation, and standardization of country-by-year score panels.

The input is a long-format CSV with one row per (country, year) observation
and 17 goal-score columns on a 0..100 scale. Rows are held in a canonical
(country, year) sort order so that every downstream artifact is reproducible
byte for byte.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sdgpipe.errors import (
    DuplicateObservationError,
    EmptyResultError,
    MalformedHeaderError,
    NonNumericScoreError,
    ScoreRangeError,
    ShapeMismatchError,
    ZeroVarianceError,
)

N_GOALS = 17
GOAL_COLUMNS = tuple(f"goal{i:02d}" for i in range(1, N_GOALS + 1))
PANEL_HEADER = ("country", "year") + GOAL_COLUMNS
GDP_HEADER = ("country", "gdp_per_capita")

# Cells parsed as missing, compared case-insensitively after stripping.
_MISSING_MARKERS = frozenset({"", "na", "nan", "null"})

# Scores this far past [0, 100] are treated as rounding residue and clamped;
# anything further out is rejected.
PARSE_TOLERANCE = 1e-6

# Pooled spreads below this are treated as zero variance.
_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScorePanel:
    """Validated panel in canonical (country, year) row order.

    scores is (n_observations, 17) float64 with NaN marking missing cells;
    index pairs each row with its (country, year).
    """

    countries: tuple[str, ...]
    years: tuple[int, ...]
    index: tuple[tuple[str, int], ...]
    scores: np.ndarray

    @property
    def n_observations(self) -> int:
        return len(self.index)

    @property
    def is_complete(self) -> bool:
        if np.isnan(self.scores).any():
            return False
        return self.n_observations == len(self.countries) * len(self.years)

    def dense(self) -> np.ndarray:
        """Scores reshaped to (n_countries, n_years, 17); complete panels only."""
        if not self.is_complete:
            raise EmptyResultError("panel has gaps; filter_complete it first")
        return self.scores.reshape(len(self.countries), len(self.years), N_GOALS)

    def row_years(self) -> np.ndarray:
        return np.array([year for _, year in self.index], dtype=int)

    def row_countries(self) -> list[str]:
        return [country for country, _ in self.index]


@dataclass(frozen=True)
class StandardizedPanel:
    """Z-scored panel plus the pooled moments used to produce it."""

    countries: tuple[str, ...]
    years: tuple[int, ...]
    index: tuple[tuple[str, int], ...]
    z: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _parse_score(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if text.lower() in _MISSING_MARKERS:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        raise NonNumericScoreError(row, column, cell) from None
    if not math.isfinite(value):
        raise NonNumericScoreError(row, column, cell)
    if value < -PARSE_TOLERANCE or value > 100.0 + PARSE_TOLERANCE:
        raise ScoreRangeError(row, column, value)
    return min(max(value, 0.0), 100.0)


def load_panel(path: str | Path) -> ScorePanel:
    """Read and validate a long-format panel CSV.

    Header must be country,year,goal01..goal17. Blank and NA-style cells
    become missing values; scores within 1e-6 of the [0, 100] bounds are
    clamped, anything further out raises. Duplicate (country, year) rows are
    rejected. Rows come back sorted by (country, year).
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeaderError(f"{path}: empty file") from None
        got = tuple(cell.strip().lower() for cell in header)
        if got != PANEL_HEADER:
            raise MalformedHeaderError(
                f"{path}: expected header {','.join(PANEL_HEADER)}, got {','.join(got)}"
            )
        rows: dict[tuple[str, int], list[float]] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(PANEL_HEADER):
                raise MalformedHeaderError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(PANEL_HEADER)}"
                )
            country = row[0].strip()
            if not country:
                raise MalformedHeaderError(f"{path}: row {line_no} has an empty country")
            try:
                year = int(row[1].strip())
            except ValueError:
                raise NonNumericScoreError(line_no, "year", row[1]) from None
            key = (country, year)
            if key in rows:
                raise DuplicateObservationError(country, year)
            rows[key] = [
                _parse_score(cell, line_no, column)
                for cell, column in zip(row[2:], GOAL_COLUMNS)
            ]
    if not rows:
        raise EmptyResultError(f"{path}: no data rows")
    keys = sorted(rows)
    scores = np.array([rows[key] for key in keys], dtype=float)
    return ScorePanel(
        countries=tuple(sorted({country for country, _ in keys})),
        years=tuple(sorted({year for _, year in keys})),
        index=tuple(keys),
        scores=_freeze(scores),
    )


def write_panel_csv(panel: ScorePanel, path: str | Path, decimals: int = 6) -> None:
    """Write a panel back out in the input schema (missing cells left blank)."""
    path = Path(path)
    fmt = f"{{:.{decimals}f}}"
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for (country, year), row in zip(panel.index, panel.scores):
            cells = ["" if math.isnan(v) else fmt.format(v) for v in row]
            writer.writerow([country, year, *cells])


def filter_complete(panel: ScorePanel) -> ScorePanel:
    """Keep only countries observed in every panel year with no missing scores.

    The year grid is the union of years present in the input. Raises
    EmptyResultError when no country survives.
    """
    all_years = set(panel.years)
    seen: dict[str, set[int]] = {}
    complete_rows: dict[str, bool] = {}
    for (country, year), row in zip(panel.index, panel.scores):
        seen.setdefault(country, set()).add(year)
        if np.isnan(row).any():
            complete_rows[country] = False
        else:
            complete_rows.setdefault(country, True)
    keep = sorted(
        country
        for country in panel.countries
        if seen.get(country) == all_years and complete_rows.get(country, False)
    )
    if not keep:
        raise EmptyResultError("no country has complete coverage")
    keep_set = set(keep)
    mask = [country in keep_set for country, _ in panel.index]
    index = tuple(key for key, hit in zip(panel.index, mask) if hit)
    scores = panel.scores[np.array(mask, dtype=bool)].copy()
    return ScorePanel(
        countries=tuple(keep),
        years=panel.years,
        index=index,
        scores=_freeze(scores),
    )


def _pooled_moments(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = scores.mean(axis=0)
    std = np.sqrt(np.mean((scores - mean) ** 2, axis=0))
    return mean, std


def standardize(panel: ScorePanel) -> StandardizedPanel:
    """Z-score each goal column against moments pooled over all observations.

    Country-year rows are pooled jointly, so a single mean and spread per
    goal covers the whole panel. Population denominator. A constant goal
    column raises ZeroVarianceError.
    """
    if np.isnan(panel.scores).any():
        raise EmptyResultError("panel has missing scores; filter_complete it first")
    mean, std = _pooled_moments(panel.scores)
    for g, sigma in enumerate(std):
        if sigma <= _VARIANCE_FLOOR:
            raise ZeroVarianceError(GOAL_COLUMNS[g])
    z = (panel.scores - mean) / std
    return StandardizedPanel(
        countries=panel.countries,
        years=panel.years,
        index=panel.index,
        z=_freeze(z),
        mean=_freeze(mean),
        std=_freeze(std),
    )


def destandardize(standardized: StandardizedPanel) -> np.ndarray:
    """Invert standardize, recovering raw scores from z-scores."""
    return standardized.z * standardized.std + standardized.mean


def standardize_within_cluster(
    panel: ScorePanel, labels: np.ndarray
) -> tuple[np.ndarray, dict[int, tuple[np.ndarray, np.ndarray]]]:
    """Z-score each observation against its own cluster's pooled moments.

    labels holds one integer cluster id per observation; noise (-1) forms its
    own group. Returns the z-scored array and a map from cluster id to that
    cluster's (mean, std). A goal constant within some cluster raises
    ZeroVarianceError naming the cluster.
    """
    labels = np.asarray(labels)
    if labels.shape != (panel.n_observations,):
        raise ShapeMismatchError(
            f"labels shape {labels.shape} does not match {panel.n_observations} observations"
        )
    if np.isnan(panel.scores).any():
        raise EmptyResultError("panel has missing scores; filter_complete it first")
    z = np.empty_like(panel.scores)
    moments: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for label in sorted(set(labels.tolist())):
        rows = labels == label
        mean, std = _pooled_moments(panel.scores[rows])
        for g, sigma in enumerate(std):
            if sigma <= _VARIANCE_FLOOR:
                raise ZeroVarianceError(GOAL_COLUMNS[g], group=f"cluster {label}")
        z[rows] = (panel.scores[rows] - mean) / std
        moments[int(label)] = (_freeze(mean), _freeze(std))
    return _freeze(z), moments


def yearly_goal_means(panel: ScorePanel) -> tuple[np.ndarray, np.ndarray]:
    """Per-year mean of each goal over all countries; (years, n_years x 17)."""
    dense = panel.dense()
    years = np.array(panel.years, dtype=int)
    return years, dense.mean(axis=0)


def load_gdp(path: str | Path) -> dict[str, float]:
    """Read a country,gdp_per_capita CSV; missing cells are skipped entirely."""
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeaderError(f"{path}: empty file") from None
        got = tuple(cell.strip().lower() for cell in header)
        if got != GDP_HEADER:
            raise MalformedHeaderError(
                f"{path}: expected header {','.join(GDP_HEADER)}, got {','.join(got)}"
            )
        table: dict[str, float] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise MalformedHeaderError(
                    f"{path}: row {line_no} has {len(row)} cells, expected 2"
                )
            country = row[0].strip()
            cell = row[1].strip()
            if cell.lower() in _MISSING_MARKERS:
                continue
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericScoreError(line_no, "gdp_per_capita", row[1]) from None
            if not math.isfinite(value) or value <= 0:
                raise ScoreRangeError(line_no, "gdp_per_capita", value)
            if country in table:
                raise DuplicateObservationError(country)
            table[country] = value
    return table
