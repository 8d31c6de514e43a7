"""Artifact file names and small CSV/JSON helpers shared by the stages.

Numeric CSV cells are written at fixed six decimals (correlations at four,
always signed) and JSON numbers at full repr precision, so repeated runs of
the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from sdgpipe.errors import MissingArtifactError

PANEL_FILTERED = "panel_filtered.csv"
MOMENTS = "moments.csv"
STANDARDIZED = "standardized.csv"
YEARLY_MEANS = "yearly_means.csv"
PCA_MODEL = "pca_model.json"
PCA_PROJECTION = "pca_projection.csv"
PCA_LOADINGS = "pca_loadings.csv"
PCA_IDEAL = "pca_ideal.csv"
EMBEDDING = "embedding.csv"
KL_HISTORY = "kl_history.csv"
LABELS = "labels.csv"
SWITCHES = "switches.csv"
CLUSTER_COUNTRIES = "cluster_countries.csv"
CLUSTER_STANDARDIZED = "cluster_standardized.csv"
CLUSTER_GDP = "cluster_gdp.csv"
EPS_SCAN = "eps_scan.csv"
CORRELATION_GLOBAL = "correlation_global.csv"
DISTANCES = "distances.csv"
GAUSSIAN_FITS = "gaussian_fits.csv"
TRAJECTORY_FITS = "trajectory_fits.json"
MANIFEST = "manifest.json"


def correlation_cluster_name(cluster_id: int) -> str:
    return f"correlation_cluster{cluster_id}.csv"


def correlation_year_name(year: int) -> str:
    return f"correlation_year{year}.csv"


def trajectory_name(cluster_id: int) -> str:
    return f"trajectory_cluster{cluster_id}.csv"


def fmt(value: float, decimals: int = 6) -> str:
    return f"{value:.{decimals}f}"


def fmt_signed(value: float, decimals: int = 4) -> str:
    return f"{value:+.{decimals}f}"


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise MissingArtifactError(path.name)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if not rows:
        raise MissingArtifactError(path.name)
    return rows[0], rows[1:]


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: Path) -> dict:
    if not path.exists():
        raise MissingArtifactError(path.name)
    return json.loads(path.read_text())


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
