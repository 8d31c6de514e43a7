"""Stage orchestration: config handling, artifact emission, run manifest.

Every stage reads its inputs from files that earlier stages wrote into the
output directory and writes its own artifacts there, so running stages one
at a time and running them all in one go produce identical bytes. A stage
failure removes whatever partial files that stage had written and surfaces
as a StageError naming the stage.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from sdgpipe import artifacts, dbscan, dynamics, pca, tsne
from sdgpipe.correlation import cluster_correlations, pearson_matrix, yearly_correlations
from sdgpipe.errors import (
    ConfigError,
    MissingArtifactError,
    PipelineError,
    StageError,
    TooFewMembersError,
)
from sdgpipe.panel import (
    GOAL_COLUMNS,
    N_GOALS,
    ScorePanel,
    filter_complete,
    load_gdp,
    load_panel,
    standardize,
    standardize_within_cluster,
    yearly_goal_means,
)

DEFAULT_EPS_GRID = tuple(round(0.5 * k, 1) for k in range(1, 17))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; file values < CLI overrides."""

    panel: Path | None = None
    out: Path | None = None
    gdp: Path | None = None
    perplexity: float = 50.0
    pca_components: int = 10
    embed_dim: int = 2
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    exaggeration: float = 12.0
    exaggeration_until: int = 250
    record_every: int = 50
    init_scale: float = 1e-4
    seed: int = 0
    eps: float | None = None
    min_pts: int = 5
    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    exclude_years: tuple[int, ...] = (2020, 2021, 2022)
    distribution_years: tuple[int, ...] = (2000, 2010, 2020)
    per_year_correlations: bool = False
    extrapolate_to: int = 2100

    def validate(self) -> None:
        if self.panel is None:
            raise ConfigError("panel CSV path is required")
        if self.out is None:
            raise ConfigError("output directory is required")
        if self.perplexity <= 1:
            raise ConfigError("perplexity must exceed 1")
        if self.pca_components < 1:
            raise ConfigError("pca_components must be >= 1")
        if self.embed_dim not in (2, 3):
            raise ConfigError("embed_dim must be 2 or 3")
        if self.iterations < 1 or self.record_every < 1:
            raise ConfigError("iterations and record_every must be >= 1")
        if self.learning_rate <= 0 or self.init_scale <= 0:
            raise ConfigError("learning_rate and init_scale must be positive")
        if self.eps is not None and self.eps <= 0:
            raise ConfigError("eps must be positive")
        if self.min_pts < 1:
            raise ConfigError("min_pts must be >= 1")
        if not self.eps_grid or any(e <= 0 for e in self.eps_grid):
            raise ConfigError("eps_grid must be nonempty and positive")

    def schedule(self) -> tsne.GradientSchedule:
        return tsne.GradientSchedule(
            iterations=self.iterations,
            learning_rate=self.learning_rate,
            momentum_early=self.momentum_early,
            momentum_late=self.momentum_late,
            momentum_switch=self.momentum_switch,
            exaggeration=self.exaggeration,
            exaggeration_until=self.exaggeration_until,
            record_every=self.record_every,
            init_scale=self.init_scale,
        )


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part.strip()) for part in text.split(","))


def _parse_float_tuple(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part.strip()) for part in text.split(","))


_FIELD_PARSERS = {
    "panel": Path,
    "out": Path,
    "gdp": Path,
    "perplexity": float,
    "pca_components": int,
    "embed_dim": int,
    "iterations": int,
    "learning_rate": float,
    "momentum_early": float,
    "momentum_late": float,
    "momentum_switch": int,
    "exaggeration": float,
    "exaggeration_until": int,
    "record_every": int,
    "init_scale": float,
    "seed": int,
    "eps": float,
    "min_pts": int,
    "eps_grid": _parse_float_tuple,
    "exclude_years": _parse_int_tuple,
    "distribution_years": _parse_int_tuple,
    "per_year_correlations": _parse_bool,
    "extrapolate_to": int,
}


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a key=value config file (# comments and blank lines allowed)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, object] = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {exc}") from None
    return PipelineConfig(**values)


def apply_overrides(config: PipelineConfig, **overrides: object) -> PipelineConfig:
    """Replace fields with any non-None override values."""
    known = {f.name for f in fields(PipelineConfig)}
    cleaned = {}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
        if value is not None:
            cleaned[key] = value
    return replace(config, **cleaned) if cleaned else config


# ---------------------------------------------------------------------------
# artifact readers


def _read_panel_artifact(out: Path) -> ScorePanel:
    path = out / artifacts.PANEL_FILTERED
    if not path.exists():
        raise MissingArtifactError(artifacts.PANEL_FILTERED)
    return load_panel(path)


def _read_matrix_artifact(
    path: Path, meta_columns: int
) -> tuple[list[list[str]], np.ndarray]:
    """Rows of leading string cells plus the numeric remainder as an array."""
    _, rows = artifacts.read_csv(path)
    meta = [row[:meta_columns] for row in rows]
    data = np.array([[float(cell) for cell in row[meta_columns:]] for row in rows])
    return meta, data


def _read_labels(out: Path, index: tuple[tuple[str, int], ...]) -> np.ndarray:
    meta, data = _read_matrix_artifact(out / artifacts.LABELS, 2)
    got = [(country, int(year)) for country, year in meta]
    if got != list(index):
        raise PipelineError("labels.csv rows do not line up with panel_filtered.csv")
    return data[:, 0].astype(int)


# ---------------------------------------------------------------------------
# stages


def stage_ingest(config: PipelineConfig, written: list[Path]) -> None:
    """Load, validate, filter, and standardize the input panel."""
    out = config.out
    panel = filter_complete(load_panel(config.panel))
    zpanel = standardize(panel)
    years, means = yearly_goal_means(panel)

    path = out / artifacts.PANEL_FILTERED
    artifacts.write_csv(
        path,
        ["country", "year", *GOAL_COLUMNS],
        [
            [country, str(year), *(artifacts.fmt(v) for v in row)]
            for (country, year), row in zip(panel.index, panel.scores)
        ],
    )
    written.append(path)

    path = out / artifacts.MOMENTS
    artifacts.write_csv(
        path,
        ["goal", "mean", "std"],
        [
            [GOAL_COLUMNS[g], artifacts.fmt(zpanel.mean[g]), artifacts.fmt(zpanel.std[g])]
            for g in range(N_GOALS)
        ],
    )
    written.append(path)

    path = out / artifacts.STANDARDIZED
    artifacts.write_csv(
        path,
        ["country", "year", *GOAL_COLUMNS],
        [
            [country, str(year), *(artifacts.fmt(v) for v in row)]
            for (country, year), row in zip(zpanel.index, zpanel.z)
        ],
    )
    written.append(path)

    path = out / artifacts.YEARLY_MEANS
    artifacts.write_csv(
        path,
        ["year", *GOAL_COLUMNS],
        [
            [str(int(year)), *(artifacts.fmt(v) for v in row)]
            for year, row in zip(years, means)
        ],
    )
    written.append(path)


def stage_pca(config: PipelineConfig, written: list[Path]) -> None:
    """Fit the component basis on standardized scores and project everything."""
    out = config.out
    meta, Z = _read_matrix_artifact(out / artifacts.STANDARDIZED, 2)
    _, moment_data = _read_matrix_artifact(out / artifacts.MOMENTS, 1)
    mean, std = moment_data[:, 0], moment_data[:, 1]

    model = pca.fit(Z, config.pca_components)
    coords = pca.project(model, Z)
    pc_names = [f"pc{j + 1:02d}" for j in range(model.n_components)]

    path = out / artifacts.PCA_MODEL
    artifacts.write_json(
        path,
        {
            "components": model.components.tolist(),
            "explained_variance": model.explained_variance.tolist(),
            "explained_variance_ratio": model.explained_variance_ratio.tolist(),
            "center": model.center.tolist(),
        },
    )
    written.append(path)

    path = out / artifacts.PCA_PROJECTION
    artifacts.write_csv(
        path,
        ["country", "year", *pc_names],
        [
            [*row_meta, *(artifacts.fmt(v) for v in row)]
            for row_meta, row in zip(meta, coords)
        ],
    )
    written.append(path)

    # The ideal point (every goal at 100) expressed in the fitted basis.
    ideal_z = (100.0 - mean) / std
    ideal_coords = pca.project(model, ideal_z)[0]
    path = out / artifacts.PCA_IDEAL
    artifacts.write_csv(path, pc_names, [[artifacts.fmt(v) for v in ideal_coords]])
    written.append(path)

    if model.n_components >= 2:
        vectors = pca.loadings(model)
        path = out / artifacts.PCA_LOADINGS
        artifacts.write_csv(
            path,
            ["goal", "x", "y"],
            [
                [GOAL_COLUMNS[g], artifacts.fmt(vectors[g, 0]), artifacts.fmt(vectors[g, 1])]
                for g in range(N_GOALS)
            ],
        )
        written.append(path)


def stage_tsne(config: PipelineConfig, written: list[Path]) -> None:
    """Embed the component coordinates into the low-dimensional map."""
    out = config.out
    meta, X = _read_matrix_artifact(out / artifacts.PCA_PROJECTION, 2)
    embedding = tsne.run(
        X,
        config.perplexity,
        n_components=config.embed_dim,
        seed=config.seed,
        schedule=config.schedule(),
    )
    axis_names = ["x", "y", "z"][: config.embed_dim]

    path = out / artifacts.EMBEDDING
    artifacts.write_csv(
        path,
        ["country", "year", *axis_names],
        [
            [*row_meta, *(artifacts.fmt(v) for v in row)]
            for row_meta, row in zip(meta, embedding.Y)
        ],
    )
    written.append(path)

    path = out / artifacts.KL_HISTORY
    artifacts.write_csv(
        path,
        ["iteration", "kl"],
        [[str(step), artifacts.fmt(value)] for step, value in embedding.kl_history],
    )
    written.append(path)


def stage_cluster(config: PipelineConfig, written: list[Path]) -> None:
    """Run density clustering on the map and derive membership artifacts."""
    out = config.out
    if config.eps is None:
        raise PipelineError("eps is not set; run scan-eps and pick a value")
    meta, Y = _read_matrix_artifact(out / artifacts.EMBEDDING, 2)
    index = tuple((country, int(year)) for country, year in meta)
    result = dbscan.cluster(Y, config.eps, config.min_pts)
    labels = result.labels

    path = out / artifacts.LABELS
    artifacts.write_csv(
        path,
        ["country", "year", "cluster"],
        [
            [country, str(year), str(int(label))]
            for (country, year), label in zip(index, labels)
        ],
    )
    written.append(path)

    switches = dbscan.detect_switches(labels, list(index))
    path = out / artifacts.SWITCHES
    artifacts.write_csv(
        path,
        ["country", "year", "from_cluster", "to_cluster"],
        [
            [s.country, str(s.year), str(s.from_cluster), str(s.to_cluster)]
            for s in switches
        ],
    )
    written.append(path)

    membership = dbscan.final_year_membership(labels, list(index))
    path = out / artifacts.CLUSTER_COUNTRIES
    artifacts.write_csv(
        path,
        ["country", "cluster"],
        [[country, str(membership[country])] for country in sorted(membership)],
    )
    written.append(path)

    panel = _read_panel_artifact(out)
    z, _ = standardize_within_cluster(panel, labels)
    path = out / artifacts.CLUSTER_STANDARDIZED
    artifacts.write_csv(
        path,
        ["country", "year", "cluster", *GOAL_COLUMNS],
        [
            [country, str(year), str(int(label)), *(artifacts.fmt(v) for v in row)]
            for (country, year), label, row in zip(panel.index, labels, z)
        ],
    )
    written.append(path)

    if config.gdp is not None:
        gdp = load_gdp(config.gdp)
        rows = []
        for cluster_id in sorted(set(membership.values())):
            members = [c for c, lab in membership.items() if lab == cluster_id]
            values = np.array([gdp[c] for c in members if c in gdp])
            if values.size:
                mean = artifacts.fmt(float(values.mean()), 2)
                spread = artifacts.fmt(
                    float(np.sqrt(np.mean((values - values.mean()) ** 2))), 2
                )
            else:
                mean = spread = ""
            rows.append(
                [str(cluster_id), str(len(members)), str(values.size), mean, spread]
            )
        path = out / artifacts.CLUSTER_GDP
        artifacts.write_csv(
            path, ["cluster", "n_countries", "n_with_gdp", "gdp_mean", "gdp_std"], rows
        )
        written.append(path)


def stage_scan_eps(config: PipelineConfig, written: list[Path]) -> None:
    """Tabulate cluster count and noise share across the eps grid."""
    out = config.out
    _, Y = _read_matrix_artifact(out / artifacts.EMBEDDING, 2)
    rows = dbscan.scan_eps(Y, np.array(config.eps_grid), config.min_pts)
    path = out / artifacts.EPS_SCAN
    artifacts.write_csv(
        path,
        ["eps", "n_clusters", "noise_fraction"],
        [
            [artifacts.fmt(eps), str(n), artifacts.fmt(frac)]
            for eps, n, frac in rows
        ],
    )
    written.append(path)


def _write_correlation(path: Path, values: np.ndarray) -> None:
    artifacts.write_csv(
        path,
        ["goal", *GOAL_COLUMNS],
        [
            [GOAL_COLUMNS[i], *(artifacts.fmt_signed(v) for v in values[i])]
            for i in range(N_GOALS)
        ],
    )


def stage_correlate(config: PipelineConfig, written: list[Path]) -> None:
    """Pearson matrices: pooled, per cluster, optionally per year."""
    out = config.out
    panel = _read_panel_artifact(out)
    labels = _read_labels(out, panel.index)

    path = out / artifacts.CORRELATION_GLOBAL
    _write_correlation(path, pearson_matrix(panel).values)
    written.append(path)

    for cluster_id, matrix in cluster_correlations(panel, labels).items():
        path = out / artifacts.correlation_cluster_name(cluster_id)
        _write_correlation(path, matrix.values)
        written.append(path)

    if config.per_year_correlations:
        for year, matrix in yearly_correlations(panel).items():
            path = out / artifacts.correlation_year_name(year)
            _write_correlation(path, matrix.values)
            written.append(path)


def stage_dynamics(config: PipelineConfig, written: list[Path]) -> None:
    """Distance-to-ideal series, per-year Gaussian fits, trend extrapolation."""
    out = config.out
    panel = _read_panel_artifact(out)
    labels = _read_labels(out, panel.index)
    distances = dynamics.distance_series(panel)

    path = out / artifacts.DISTANCES
    artifacts.write_csv(
        path,
        ["country", "year", "cluster", "distance"],
        [
            [country, str(year), str(int(label)), artifacts.fmt(dist)]
            for (country, year), label, dist in zip(panel.index, labels, distances)
        ],
    )
    written.append(path)

    cluster_ids = sorted(c for c in set(labels.tolist()) if c >= 0)
    dist_years = [y for y in config.distribution_years if y in panel.years]
    fit_rows = []
    for cluster_id in cluster_ids:
        for year in dist_years:
            try:
                fit, _ = dynamics.cluster_distance_distribution(
                    panel, labels, cluster_id, year
                )
            except TooFewMembersError:
                continue  # cluster empty or singleton that year
            fit_rows.append(
                [
                    str(fit.cluster),
                    str(fit.year),
                    artifacts.fmt(fit.mean),
                    artifacts.fmt(fit.std),
                    str(fit.n_members),
                ]
            )
    path = out / artifacts.GAUSSIAN_FITS
    artifacts.write_csv(path, ["cluster", "year", "mean", "std", "n_members"], fit_rows)
    written.append(path)

    membership = dbscan.final_year_membership(labels, list(panel.index))
    final_ids = sorted(c for c in set(membership.values()) if c >= 0)
    last_year = max(panel.years)
    fits_payload: dict[str, dict] = {}
    for cluster_id in final_ids:
        table = dynamics.displacement_table(panel, labels, cluster_id)
        path = out / artifacts.trajectory_name(cluster_id)
        artifacts.write_csv(
            path,
            ["year", "mean", "std", "n"],
            [
                [str(year), artifacts.fmt(mean), artifacts.fmt(std), str(n)]
                for year, mean, std, n in table
            ],
        )
        written.append(path)

        curve = {year: mean for year, mean, _, _ in table}
        fit = dynamics.fit_trajectory(curve, config.exclude_years)
        attained = dynamics.attainment_year(fit, last_year)
        zero = _zero_crossing(fit, last_year)
        fits_payload[str(cluster_id)] = {
            "a": fit.a,
            "b": fit.b,
            "c": fit.c,
            "rms_residual": fit.rms_residual,
            "years_used": list(fit.years_used),
            "excluded_years": sorted(
                set(config.exclude_years) & set(curve)
            ),
            "last_data_year": last_year,
            "zero_crossing": zero,
            "attainment_year": attained,
            "extrapolate_to": config.extrapolate_to,
        }
    path = out / artifacts.TRAJECTORY_FITS
    artifacts.write_json(path, fits_payload)
    written.append(path)


def _zero_crossing(fit: dynamics.TrajectoryFit, last_data_year: int) -> float | None:
    """Exact location of the first future root, for plotting."""
    a, b, c = fit.a, fit.b, fit.c
    if c == 0.0:
        roots = [] if b == 0.0 else [-a / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        roots = [(-b - sq) / (2.0 * c), (-b + sq) / (2.0 * c)]
    future = [root for root in roots if root > last_data_year]
    return min(future) if future else None


# ---------------------------------------------------------------------------
# orchestration


def _stage_figures(config: PipelineConfig, written: list[Path]) -> None:
    from sdgpipe.figures import emit_figures

    emit_figures(config.out, written=written)


_STAGES = {
    "ingest": stage_ingest,
    "pca": stage_pca,
    "tsne": stage_tsne,
    "cluster": stage_cluster,
    "scan-eps": stage_scan_eps,
    "correlate": stage_correlate,
    "dynamics": stage_dynamics,
    "figures": _stage_figures,
}

FULL_RUN = ("ingest", "pca", "tsne", "cluster", "correlate", "dynamics", "figures")


def run_stage(name: str, config: PipelineConfig) -> tuple[list[Path], float]:
    """Run one stage; on failure remove its partial outputs and re-raise."""
    if name not in _STAGES:
        raise ConfigError(f"unknown stage {name!r}")
    config.validate()
    config.out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    start = time.perf_counter()
    try:
        _STAGES[name](config, written)
    except Exception as exc:
        for path in written:
            path.unlink(missing_ok=True)
        raise StageError(name, exc) from exc
    return written, time.perf_counter() - start


def run_pipeline(config: PipelineConfig, stages: tuple[str, ...] = FULL_RUN) -> Path:
    """Run the given stages in order and write the manifest; returns its path."""
    config.validate()
    all_written: list[Path] = []
    timings: list[dict[str, object]] = []
    for name in stages:
        written, seconds = run_stage(name, config)
        all_written.extend(written)
        timings.append({"name": name, "seconds": round(seconds, 3)})
    return write_manifest(config, all_written, timings)


def config_snapshot(config: PipelineConfig) -> dict[str, object]:
    snapshot = asdict(config)
    for key in ("panel", "out", "gdp"):
        if snapshot[key] is not None:
            snapshot[key] = str(snapshot[key])
    for key in ("eps_grid", "exclude_years", "distribution_years"):
        snapshot[key] = list(snapshot[key])
    return snapshot


def write_manifest(
    config: PipelineConfig,
    written: list[Path],
    timings: list[dict[str, object]],
) -> Path:
    """Record config, input checksums, timings, and output checksums."""
    inputs = {}
    for key in ("panel", "gdp"):
        value = getattr(config, key)
        if value is not None:
            inputs[key] = {"path": str(value), "sha256": artifacts.sha256_of(value)}
    outputs = {
        path.name: artifacts.sha256_of(path)
        for path in sorted(set(written), key=lambda p: p.name)
    }
    path = config.out / artifacts.MANIFEST
    artifacts.write_json(
        path,
        {
            "config": config_snapshot(config),
            "inputs": inputs,
            "stages": timings,
            "outputs": outputs,
        },
    )
    return path
