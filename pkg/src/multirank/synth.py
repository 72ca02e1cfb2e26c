"""Synthetic loan portfolios with plantable area and product risk clusters.

Borrowers are placed uniformly over areas (areas nest inside districts) and
carry one to three products.  Each borrower takes a single loan at a uniform
month with a term of one to four years.  Default is simulated month by month:
every live loan-month defaults with probability ``base_default_rate``, and
shocked area-months or product-months multiply that month's hazard by
``1 + strength`` (clipped at one).

Shocks are drawn per (area, month) and (product, month), but a small share of
areas and products is persistently shock-prone with a much higher monthly
shock probability.  That persistence is what makes recent defaults near a
borrower informative about the borrower's own future, which is the point of
the planted effect.  Everything is reproducible byte for byte from the seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .ingest import LoanRecord

#: Share of areas / products that are persistently shock-prone.
PRONE_SHARE = 0.15
#: Monthly shock probability for prone and calm entities.
PRONE_MONTH_PROB = 0.8
CALM_MONTH_PROB = 0.01
#: Loan term range in months (inclusive).
TERM_MIN = 12
TERM_MAX = 48
#: Month index of the first generated month (January 2000).
BASE_MONTH = 2000 * 12


@dataclass(frozen=True)
class SynthConfig:
    n_borrowers: int = 1000
    n_products: int = 20
    n_districts: int = 10
    areas_per_district: int = 4
    months: int = 72
    base_default_rate: float = 0.005
    area_shock_strength: float = 0.0
    product_shock_strength: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_borrowers", "n_products", "n_districts", "areas_per_district", "months"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be positive")
        if not 0.0 < self.base_default_rate < 1.0:
            raise InvalidConfigError(
                f"base_default_rate must lie in (0, 1), got {self.base_default_rate!r}"
            )
        if self.area_shock_strength < 0 or self.product_shock_strength < 0:
            raise InvalidConfigError("shock strengths must be non-negative")


def _shock_matrix(rng: np.random.Generator, count: int, months: int) -> np.ndarray:
    """Month-by-month shock indicators with a persistent prone tier."""
    prone = rng.random(count) < PRONE_SHARE
    prob = np.where(prone, PRONE_MONTH_PROB, CALM_MONTH_PROB)
    return rng.random((count, months)) < prob[:, None]


def generate_loans(config: SynthConfig) -> list[LoanRecord]:
    """Generate one loan per borrower under the configured shock process."""
    rng = np.random.default_rng(config.seed)
    n = config.n_borrowers
    n_areas = config.n_districts * config.areas_per_district
    horizon = config.months + TERM_MAX

    area = rng.integers(0, n_areas, size=n)
    district = area // config.areas_per_district
    product_count = rng.integers(1, 4, size=n)
    product_draws = rng.integers(0, config.n_products, size=(n, 3))
    origination = rng.integers(0, config.months, size=n)
    term = rng.integers(TERM_MIN, TERM_MAX + 1, size=n)

    area_shock = _shock_matrix(rng, n_areas, horizon)
    product_shock = _shock_matrix(rng, config.n_products, horizon)

    products: list[tuple[str, ...]] = []
    product_any = np.zeros((n, horizon), dtype=bool)
    for i in range(n):
        chosen = tuple(dict.fromkeys(product_draws[i, : product_count[i]].tolist()))
        products.append(tuple(f"P{p:03d}" for p in sorted(chosen)))
        for p in chosen:
            product_any[i] |= product_shock[p]

    # Flatten every loan-month, look up its shock state, and draw one uniform
    # per month; the first hit is the default month.
    starts = np.concatenate(([0], np.cumsum(term)[:-1]))
    total = int(term.sum())
    loan_idx = np.repeat(np.arange(n), term)
    offset = np.arange(total) - np.repeat(starts, term)
    month = origination[loan_idx] + offset

    hazard = config.base_default_rate * (
        1.0 + config.area_shock_strength * area_shock[area[loan_idx], month]
    ) * (1.0 + config.product_shock_strength * product_any[loan_idx, month])
    np.clip(hazard, 0.0, 1.0, out=hazard)
    hits = rng.random(total) < hazard

    big = np.iinfo(np.int64).max
    first = np.minimum.reduceat(np.where(hits, offset, big), starts)
    defaulted = first < big
    default_month = BASE_MONTH + origination + np.where(defaulted, first, 0)
    origination = BASE_MONTH + origination

    records: list[LoanRecord] = []
    width = len(str(n))
    for i in range(n):
        records.append(
            LoanRecord(
                loan_id=f"L{i:0{width}d}",
                borrower_id=f"B{i:0{width}d}",
                origination=int(origination[i]),
                products=products[i],
                district=f"D{district[i]:03d}",
                area=f"A{area[i]:03d}",
                defaulted=bool(defaulted[i]),
                default_month=int(default_month[i]) if defaulted[i] else None,
            )
        )
    return records
