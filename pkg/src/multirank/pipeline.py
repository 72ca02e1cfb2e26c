"""Rolling-window orchestration: networks, ranks, features, sweeps.

One window slides month by month over the span of origination dates.  Within
each window the records become a two-layer network, the window's defaulters
seed three personalized rank runs (plus a flattened baseline), and every
borrower originating in the scoring tail gets one feature row.  Rows are
emitted sorted by (window start, borrower id) and all computation is
deterministic, including under the worker pool capped by the
``MULTIRANK_THREADS`` environment variable.
"""
from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import features as feat
from .errors import InvalidConfigError, SpanTooShortError
from .graph import aggregate_network, largest_component_fraction, supra_adjacency, supra_transition
from .ingest import LoanRecord, WindowSpec, build_window_network, defaulter_set, format_month
from .propagation import (
    RESTART_MODES,
    SCENARIOS,
    InfluenceSpec,
    build_influence_matrix,
    flat_personalized_pagerank,
    personalized_pagerank,
)

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "MULTIRANK_THREADS"

#: Windows whose largest component covers less than this fraction of nodes
#: are flagged in the log (they are still processed).
COMPONENT_FRACTION_BAR = 0.995


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for the rolling pipeline.  Field names double as config file keys."""

    window_months: int = 60
    tail_months: int = 1
    r: float = 0.85
    stickiness: float = 1.0
    scenarios: tuple[str, ...] = SCENARIOS
    restart_mode: str = "faithful_matrix"
    flat_baseline: bool = True
    tol: float = 1e-10
    max_iter: int = 1000
    threads: int | None = None
    out: str | None = None

    def __post_init__(self) -> None:
        if self.tail_months < 1 or self.window_months <= self.tail_months:
            raise InvalidConfigError(
                f"window of {self.window_months} months cannot hold a "
                f"{self.tail_months} month tail"
            )
        if not 0.0 <= self.r <= 1.0:
            raise InvalidConfigError(f"r must lie in [0, 1], got {self.r!r}")
        if not self.stickiness >= 0:
            raise InvalidConfigError(f"stickiness must be >= 0, got {self.stickiness!r}")
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        unknown = [sc for sc in self.scenarios if sc not in SCENARIOS]
        if unknown or not self.scenarios:
            raise InvalidConfigError(
                f"scenarios must be a non-empty subset of {SCENARIOS}, "
                f"got {self.scenarios!r}"
            )
        if self.restart_mode not in RESTART_MODES:
            raise InvalidConfigError(
                f"unknown restart mode '{self.restart_mode}', "
                f"expected one of {RESTART_MODES}"
            )
        if not self.tol > 0:
            raise InvalidConfigError(f"tol must be positive, got {self.tol!r}")
        if self.max_iter < 1:
            raise InvalidConfigError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.threads is not None and self.threads < 1:
            raise InvalidConfigError(f"threads must be >= 1, got {self.threads!r}")


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise InvalidConfigError(f"config key '{key}': bad boolean {text!r}")


def parse_config_lines(lines: Iterable[str], source: str = "<config>") -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment line."""
    out: dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{source}:{number}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_mapping(
    mapping: Mapping[str, str], base: PipelineConfig | None = None
) -> PipelineConfig:
    """Overlay string key-values (e.g. from a config file) onto a config."""
    base = base or PipelineConfig()
    valid = {f.name for f in fields(PipelineConfig)}
    updates: dict[str, object] = {}
    for key, raw in mapping.items():
        if key not in valid:
            raise InvalidConfigError(f"unknown config key '{key}'")
        try:
            if key in ("window_months", "tail_months", "max_iter", "threads"):
                updates[key] = int(raw)
            elif key in ("r", "stickiness", "tol"):
                updates[key] = float(raw)
            elif key == "flat_baseline":
                updates[key] = _parse_bool(raw, key)
            elif key == "scenarios":
                updates[key] = tuple(
                    part.strip() for part in raw.split(",") if part.strip()
                )
            else:
                updates[key] = raw
        except ValueError:
            raise InvalidConfigError(f"config key '{key}': bad value {raw!r}") from None
    return replace(base, **updates)


def load_config_file(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    with open(path) as handle:
        return config_from_mapping(parse_config_lines(handle, str(path)), base)


@dataclass(frozen=True)
class WindowStats:
    """Per-window diagnostics collected during a pipeline run."""

    window_start: int
    n_records: int
    n_tail_borrowers: int
    n_sources: int
    component_fraction: float | None
    rank_seconds: float
    flat_seconds: float
    nonconverged: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunResult:
    rows: list[feat.FeatureRow]
    stats: list[WindowStats]


def _process_window(
    records: Sequence[LoanRecord], window: WindowSpec, config: PipelineConfig
) -> tuple[list[feat.FeatureRow], WindowStats]:
    label = format_month(window.start)
    sources = defaulter_set(records, window)
    index = feat.DegreeIndex(records, window, sources)
    tail_borrowers = index.tail_borrowers
    if not tail_borrowers:
        stats = WindowStats(window.start, len(records), 0, len(sources), None, 0.0, 0.0)
        return [], stats
    net = build_window_network(records, window, config.stickiness)
    fraction = largest_component_fraction(net)
    if fraction < COMPONENT_FRACTION_BAR:
        logger.warning(
            "window %s: largest component holds %.4f of nodes "
            "(below %.3f), scores may mix disconnected parts",
            label,
            fraction,
            COMPONENT_FRACTION_BAR,
        )
    results = None
    flat_result = None
    rank_seconds = 0.0
    flat_seconds = 0.0
    nonconverged: list[str] = []
    if sources:
        transition = supra_transition(supra_adjacency(net))
        tick = time.perf_counter()
        results = {}
        for scenario in config.scenarios:
            spec = InfluenceSpec(frozenset(sources), scenario, config.restart_mode)
            influence = build_influence_matrix(net, spec)
            result = personalized_pagerank(
                transition,
                influence,
                r=config.r,
                tol=config.tol,
                max_iter=config.max_iter,
                mode=config.restart_mode,
            )
            if not result.converged:
                nonconverged.append(scenario)
                logger.warning(
                    "window %s: scenario '%s' hit max_iter (residual %.3e)",
                    label,
                    scenario,
                    result.residual,
                )
            results[scenario] = result
        rank_seconds = time.perf_counter() - tick
        if config.flat_baseline:
            tick = time.perf_counter()
            flat_result = flat_personalized_pagerank(
                aggregate_network(net),
                sources,
                r=config.r,
                tol=config.tol,
                max_iter=config.max_iter,
            )
            flat_seconds = time.perf_counter() - tick
    else:
        logger.warning("window %s: no defaulters, score features left empty", label)
    rows = []
    for borrower in tail_borrowers:
        scores = (
            feat.score_features(net, results, borrower, config.scenarios)
            if results is not None
            else None
        )
        aggregate = flat_result.score_of(borrower) if flat_result is not None else None
        label_flag = any(rec.defaulted for rec in index.tail_loans(borrower))
        rows.append(
            feat.FeatureRow(
                borrower_id=borrower,
                window_start=window.start,
                degrees=index.counts(borrower),
                scores=scores,
                aggregate=aggregate,
                label=label_flag,
            )
        )
    stats = WindowStats(
        window_start=window.start,
        n_records=len(records),
        n_tail_borrowers=len(tail_borrowers),
        n_sources=len(sources),
        component_fraction=fraction,
        rank_seconds=rank_seconds,
        flat_seconds=flat_seconds,
        nonconverged=tuple(nonconverged),
    )
    return rows, stats


def _resolve_threads(config: PipelineConfig) -> int:
    if config.threads is not None:
        return config.threads
    raw = os.environ.get(THREADS_ENV_VAR, "")
    if raw.strip():
        try:
            value = int(raw)
        except ValueError:
            raise InvalidConfigError(
                f"{THREADS_ENV_VAR} must be an integer, got {raw!r}"
            ) from None
        if value < 1:
            raise InvalidConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
        return value
    return 1


def run_rolling(
    records: Sequence[LoanRecord], config: PipelineConfig | None = None
) -> RunResult:
    """Emit feature rows for every window over the records' origination span.

    Windows start at every month from the earliest origination through the
    last month that still fits a full window.  Results do not depend on the
    input record order or on the worker count.
    """
    config = config or PipelineConfig()
    if not records:
        raise SpanTooShortError("no records")
    ordered = sorted(records, key=lambda r: (r.origination, r.loan_id, r.borrower_id))
    months = np.fromiter((r.origination for r in ordered), np.int64, count=len(ordered))
    first, last = int(months[0]), int(months[-1])
    span = last - first + 1
    if span < config.window_months:
        raise SpanTooShortError(
            f"records span {span} months but one window needs {config.window_months}"
        )
    starts = list(range(first, last - config.window_months + 2))

    def job(start: int) -> tuple[list[feat.FeatureRow], WindowStats]:
        lo = int(np.searchsorted(months, start, side="left"))
        hi = int(np.searchsorted(months, start + config.window_months, side="left"))
        window = WindowSpec(start, config.window_months, config.tail_months)
        return _process_window(ordered[lo:hi], window, config)

    threads = _resolve_threads(config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, starts))
    else:
        outcomes = [job(start) for start in starts]
    rows: list[feat.FeatureRow] = []
    stats: list[WindowStats] = []
    for window_rows, window_stats in outcomes:
        rows.extend(window_rows)
        stats.append(window_stats)
    return RunResult(rows, stats)


def window_feature_rows(
    records: Sequence[LoanRecord], window: WindowSpec, config: PipelineConfig | None = None
) -> tuple[list[feat.FeatureRow], WindowStats]:
    """Feature rows for a single explicit window (the ``features`` command)."""
    config = config or PipelineConfig(
        window_months=window.length_months, tail_months=window.scoring_tail_months
    )
    ordered = sorted(records, key=lambda r: (r.origination, r.loan_id, r.borrower_id))
    in_window = [r for r in ordered if window.contains(r.origination)]
    return _process_window(in_window, window, config)


def _format_score(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def feature_table_header(include_aggregate: bool) -> list[str]:
    header = ["window_start", "borrower_id", *feat.DEGREE_COLUMNS, *feat.SCORE_COLUMNS]
    if include_aggregate:
        header.append(feat.AGGREGATE_COLUMN)
    header.append("label")
    return header


def write_feature_table(
    rows: Iterable[feat.FeatureRow], path: str | Path, include_aggregate: bool = True
) -> None:
    """Write rows as CSV with a fixed column order and exact float text."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(feature_table_header(include_aggregate))
        for row in rows:
            cells: list[str] = [format_month(row.window_start), row.borrower_id]
            cells.extend(str(row.degrees[c]) for c in feat.DEGREE_COLUMNS)
            scores = row.scores or {}
            cells.extend(_format_score(scores.get(c)) for c in feat.SCORE_COLUMNS)
            if include_aggregate:
                cells.append(_format_score(row.aggregate))
            cells.append(str(int(row.label)))
            writer.writerow(cells)


@dataclass(frozen=True)
class SweepEntry:
    r: float
    stickiness: float
    feature: str
    auc: float
    n_obs: int


def tune_sweep(
    records: Sequence[LoanRecord],
    r_grid: Sequence[float],
    s_grid: Sequence[float],
    config: PipelineConfig | None = None,
) -> list[SweepEntry]:
    """Run the pipeline per grid point and report each score feature's AUC.

    AUCs pool all rows that carry scores; rows from windows without
    defaulters contribute nothing.  Label degeneracy raises, because an AUC
    over one class would be meaningless.
    """
    config = config or PipelineConfig()
    if not r_grid or not s_grid:
        raise InvalidConfigError("sweep grids must be non-empty")
    columns = list(feat.SCORE_COLUMNS)
    if config.flat_baseline:
        columns.append(feat.AGGREGATE_COLUMN)
    entries: list[SweepEntry] = []
    for r in r_grid:
        for stickiness in s_grid:
            run = run_rolling(records, replace(config, r=r, stickiness=stickiness))
            for column in columns:
                values: list[float] = []
                labels: list[bool] = []
                for row in run.rows:
                    if column == feat.AGGREGATE_COLUMN:
                        value = row.aggregate
                    else:
                        value = None if row.scores is None else row.scores.get(column)
                    if value is not None:
                        values.append(value)
                        labels.append(row.label)
                auc = feat.univariate_auc(values, labels)
                entries.append(SweepEntry(r, stickiness, column, auc, len(values)))
    return entries


def write_sweep_table(entries: Iterable[SweepEntry], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["r", "stickiness", "feature", "auc", "n_obs"])
        for entry in entries:
            writer.writerow(
                [
                    f"{entry.r:.17g}",
                    f"{entry.stickiness:.17g}",
                    entry.feature,
                    f"{entry.auc:.17g}",
                    entry.n_obs,
                ]
            )
