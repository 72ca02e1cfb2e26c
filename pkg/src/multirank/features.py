"""Network features for borrowers scored in a window's tail.

Twenty degree features count distinct other borrowers reachable through shared
connectors (products, districts, areas, and the product/district and
product/area intersections), over the last one and five years of the window,
each with a variant restricted to the window's defaulter set.  Twelve score
features carry the personalized rank mass of the borrower itself and the
maximum over its product, district, and area nodes, for each influence
scenario.  The optional ``Aggregate`` column holds the flattened-network
baseline score.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .errors import (
    BorrowerNotInTailError,
    DegenerateLabelsError,
    MissingScenarioRunError,
    ValidationError,
)
from .graph import MultilayerNetwork
from .ingest import (
    AREA_PREFIX,
    DISTRICT_PREFIX,
    GEOGRAPHY_LAYER,
    PRODUCT_LAYER,
    PRODUCT_PREFIX,
    LoanRecord,
    WindowSpec,
    defaulter_set,
)
from .propagation import SCENARIOS, RankResult

logger = logging.getLogger(__name__)

#: Month horizons behind the window end used by the degree features.
_HORIZONS = ((1, 12), (5, 60))

DEGREE_COLUMNS = tuple(
    f"{base}Degree{years}{suffix}"
    for base in ("Prod", "Dist", "Area", "ProdDist", "ProdArea")
    for years, _ in _HORIZONS
    for suffix in ("", "_DF")
)

SCORE_COLUMNS = tuple(f"Bipart_{sc}" for sc in SCENARIOS) + tuple(
    f"Bipart_{entity}_{sc}_max"
    for entity in ("product", "district", "area")
    for sc in SCENARIOS
)

AGGREGATE_COLUMN = "Aggregate"

FEATURE_COLUMNS = DEGREE_COLUMNS + SCORE_COLUMNS


@dataclass(frozen=True)
class FeatureRow:
    """One scored borrower in one window."""

    borrower_id: str
    window_start: int
    degrees: dict[str, int]
    scores: dict[str, float] | None
    aggregate: float | None
    label: bool


_EMPTY = np.empty(0, dtype=np.int64)


class DegreeIndex:
    """Shared lookups for computing degree features across one window.

    Built once per window; ``counts`` then answers per borrower from sorted
    integer arrays, so a window full of tail borrowers stays cheap.
    """

    def __init__(
        self,
        records: Sequence[LoanRecord],
        window: WindowSpec,
        defaulters: set[str] | None = None,
    ) -> None:
        self.window = window
        in_window = [r for r in records if window.contains(r.origination)]
        if defaulters is None:
            defaulters = defaulter_set(records, window)
        one_year_start = max(window.start, window.end - 12)

        index: dict[str, int] = {}
        for rec in in_window:
            index.setdefault(rec.borrower_id, len(index))
        self._index = index

        full: dict[tuple[str, str], set[int]] = {}
        recent: dict[tuple[str, str], set[int]] = {}
        products_of: dict[str, set[str]] = {}
        districts_of: dict[str, set[str]] = {}
        areas_of: dict[str, set[str]] = {}
        tail: dict[str, list[LoanRecord]] = {}
        for rec in in_window:
            b = index[rec.borrower_id]
            is_recent = rec.origination >= one_year_start
            keys = [("district", rec.district), ("area", rec.area)]
            keys.extend(("product", p) for p in rec.products)
            for key in keys:
                full.setdefault(key, set()).add(b)
                if is_recent:
                    recent.setdefault(key, set()).add(b)
            products_of.setdefault(rec.borrower_id, set()).update(rec.products)
            districts_of.setdefault(rec.borrower_id, set()).add(rec.district)
            areas_of.setdefault(rec.borrower_id, set()).add(rec.area)
            if window.in_tail(rec.origination):
                tail.setdefault(rec.borrower_id, []).append(rec)

        self._full = {k: np.fromiter(sorted(v), np.int64) for k, v in full.items()}
        self._recent = {k: np.fromiter(sorted(v), np.int64) for k, v in recent.items()}
        self._products_of = products_of
        self._districts_of = districts_of
        self._areas_of = areas_of
        self._tail = tail
        mask = np.zeros(len(index), dtype=bool)
        for borrower in defaulters:
            b = index.get(borrower)
            if b is not None:
                mask[b] = True
        self._df_mask = mask

    @property
    def tail_borrowers(self) -> tuple[str, ...]:
        return tuple(sorted(self._tail))

    def tail_loans(self, borrower: str) -> tuple[LoanRecord, ...]:
        return tuple(self._tail.get(borrower, ()))

    def _neighbourhood(
        self, table: dict[tuple[str, str], np.ndarray], kind: str, values: set[str], me: int
    ) -> np.ndarray:
        arrays = [table[(kind, v)] for v in sorted(values) if (kind, v) in table]
        if not arrays:
            return _EMPTY
        union = arrays[0] if len(arrays) == 1 else reduce(np.union1d, arrays)
        return union[union != me]

    def counts(self, borrower: str) -> dict[str, int]:
        """The twenty degree features for one tail borrower."""
        if borrower not in self._tail:
            raise BorrowerNotInTailError(
                f"borrower '{borrower}' has no loan in the scoring tail of this window"
            )
        me = self._index[borrower]
        mask = self._df_mask
        out: dict[str, int] = {}
        sets: dict[tuple[str, int], np.ndarray] = {}
        for years, table in ((1, self._recent), (5, self._full)):
            sets[("Prod", years)] = self._neighbourhood(
                table, "product", self._products_of[borrower], me
            )
            sets[("Dist", years)] = self._neighbourhood(
                table, "district", self._districts_of[borrower], me
            )
            sets[("Area", years)] = self._neighbourhood(
                table, "area", self._areas_of[borrower], me
            )
            sets[("ProdDist", years)] = np.intersect1d(
                sets[("Prod", years)], sets[("Dist", years)], assume_unique=True
            )
            sets[("ProdArea", years)] = np.intersect1d(
                sets[("Prod", years)], sets[("Area", years)], assume_unique=True
            )
        for base in ("Prod", "Dist", "Area", "ProdDist", "ProdArea"):
            for years, _ in _HORIZONS:
                neighbours = sets[(base, years)]
                out[f"{base}Degree{years}"] = int(neighbours.size)
                out[f"{base}Degree{years}_DF"] = int(mask[neighbours].sum())
        return {name: out[name] for name in DEGREE_COLUMNS}


def degree_features(
    records: Sequence[LoanRecord], window: WindowSpec, borrower: str
) -> dict[str, int]:
    """Degree features for one borrower; defaulters derived from the records."""
    return DegreeIndex(records, window).counts(borrower)


def score_features(
    net: MultilayerNetwork,
    results: Mapping[str, RankResult],
    borrower: str,
    scenarios: Sequence[str] = SCENARIOS,
) -> dict[str, float]:
    """Score features for one borrower from per-scenario rank results.

    For each scenario the borrower's own aggregated score is reported together
    with the maximum score over its connected product, district, and area
    nodes (candidates visited in ascending node id, so ties resolve to the
    smallest id).
    """
    missing = [sc for sc in scenarios if sc not in results]
    if missing:
        raise MissingScenarioRunError(f"missing rank results for {missing}")
    if not net.is_common(borrower):
        raise MissingScenarioRunError(
            f"borrower '{borrower}' is not a node of the window network"
        )
    try:
        product_idx = net.layer_names.index(PRODUCT_LAYER)
        geo_idx = net.layer_names.index(GEOGRAPHY_LAYER)
    except ValueError:
        raise ValidationError(
            "score features need the product and geography layers"
        ) from None
    products = net.adjacency_lists[product_idx].get(borrower, ())
    geo = net.adjacency_lists[geo_idx].get(borrower, ())
    districts = tuple(s for s in geo if s.startswith(DISTRICT_PREFIX))
    areas = tuple(s for s in geo if s.startswith(AREA_PREFIX))
    for entity, nodes in (("product", products), ("district", districts), ("area", areas)):
        if not nodes:
            raise ValidationError(
                f"borrower '{borrower}' has no {entity} node in the window network"
            )
    out: dict[str, float] = {}
    for sc in scenarios:
        result = results[sc]
        out[f"Bipart_{sc}"] = result.score_of(borrower)
        for entity, nodes in (
            ("product", products),
            ("district", districts),
            ("area", areas),
        ):
            best = -np.inf
            for node in sorted(nodes):
                score = result.score_of(node)
                if score > best:
                    best = score
            out[f"Bipart_{entity}_{sc}_max"] = best
    return {name: out[name] for name in SCORE_COLUMNS if name in out}


@dataclass
class PruneResult:
    """Columns kept by correlation pruning plus a human-readable log."""

    retained: list[str]
    log: list[str] = field(default_factory=list)


def correlation_prune(
    table: pd.DataFrame, cutoff: float = 0.70, target: str = "label"
) -> PruneResult:
    """Greedily drop one column from every over-correlated pair.

    Pairs with absolute Pearson correlation above ``cutoff`` are processed in
    descending correlation (ties by column name); the member less correlated
    with the target is dropped (ties keep the lexicographically smaller name).
    Zero-variance columns cannot participate in correlations and are dropped
    up front with a log entry.  The target column is never dropped.  A
    constant target makes every target correlation zero, so pruning then
    falls back to the name tie rule.
    """
    if target not in table.columns:
        raise ValidationError(f"target column '{target}' not in table")
    feature_names = [c for c in table.columns if c != target]
    try:
        matrix = table[feature_names].to_numpy(dtype=np.float64)
        y = table[target].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"feature table is not numeric: {exc}") from None
    log: list[str] = []
    alive: dict[str, int] = {}
    for pos, name in enumerate(feature_names):
        column = matrix[:, pos]
        if column.size == 0 or np.all(column == column[0]):
            log.append(f"dropped '{name}': zero variance")
            logger.info("correlation_prune dropped constant column '%s'", name)
        else:
            alive[name] = pos

    with np.errstate(invalid="ignore", divide="ignore"):
        if y.size and not np.all(y == y[0]):
            target_corr = {
                name: abs(float(np.corrcoef(matrix[:, pos], y)[0, 1]))
                for name, pos in alive.items()
            }
        else:
            target_corr = {name: 0.0 for name in alive}
            log.append(f"target '{target}' has zero variance; name ties decide drops")
        names = list(alive)
        if len(names) > 1:
            corr = np.corrcoef(matrix[:, [alive[n] for n in names]], rowvar=False)
        else:
            corr = np.ones((len(names), len(names)))
    target_corr = {n: (0.0 if np.isnan(v) else v) for n, v in target_corr.items()}

    pairs: list[tuple[float, str, str]] = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            value = abs(float(corr[i, j]))
            if np.isnan(value):
                value = 0.0
            if value > cutoff:
                first, second = sorted((names[i], names[j]))
                pairs.append((value, first, second))
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))

    for value, first, second in pairs:
        if first not in alive or second not in alive:
            continue
        ta, tb = target_corr[first], target_corr[second]
        if ta > tb:
            keep, drop = first, second
        elif tb > ta:
            keep, drop = second, first
        else:
            keep, drop = first, second
        del alive[drop]
        log.append(
            f"dropped '{drop}': |corr({first},{second})|={value:.4f} > {cutoff}, "
            f"|corr with {target}| {target_corr[drop]:.4f} <= {target_corr[keep]:.4f}"
        )
    retained = [c for c in table.columns if c == target or c in alive]
    return PruneResult(retained, log)


def univariate_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Probability a positive outscores a negative, ties counting one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape:
        raise ValidationError("scores and labels differ in length")
    if np.isnan(s).any():
        raise ValidationError("scores contain NaN")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(
            f"need both label classes, got {n_pos} positive / {n_neg} negative"
        )
    ranks = rankdata(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
