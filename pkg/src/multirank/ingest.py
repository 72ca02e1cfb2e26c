"""Loan table ingestion and window-level network construction.

Months are handled as integer indices (``year * 12 + month - 1``) so window
arithmetic stays plain integer comparison.  A rolling window covers the
half-open month range ``[start, start + length)``; its last
``scoring_tail_months`` months form the scoring tail and the months before the
tail form the influence period from which defaulter sets are drawn.

Each window's records become a two-layer network: a product layer connecting
borrowers to the products of their loans, and a geography layer connecting
borrowers to both the district and the area of each loan.  Specific node ids
are namespaced (``product:``, ``district:``, ``area:``) so the three connector
classes can never collide.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    AreaDistrictConflictError,
    BadDateError,
    InvalidConfigError,
    MalformedRowError,
    MissingColumnError,
)
from .graph import Edge, Layer, MultilayerNetwork, build_network

LOAN_COLUMNS = (
    "loan_id",
    "borrower_id",
    "origination",
    "products",
    "district",
    "area",
    "defaulted",
    "default_month",
)

PRODUCT_LAYER = "product"
GEOGRAPHY_LAYER = "geography"

PRODUCT_PREFIX = "product:"
DISTRICT_PREFIX = "district:"
AREA_PREFIX = "area:"

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(text: str) -> int:
    """Turn ``YYYY-MM`` into a month index."""
    match = _MONTH_RE.match(text.strip())
    if not match:
        raise BadDateError(f"invalid month {text!r} (expected YYYY-MM)")
    year, month = int(match.group(1)), int(match.group(2))
    if not 1 <= month <= 12:
        raise BadDateError(f"invalid month {text!r} (month out of range)")
    return year * 12 + month - 1


def format_month(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


@dataclass(frozen=True)
class LoanRecord:
    """One validated loan row."""

    loan_id: str
    borrower_id: str
    origination: int
    products: tuple[str, ...]
    district: str
    area: str
    defaulted: bool
    default_month: int | None

    def __post_init__(self) -> None:
        if not self.products:
            raise MalformedRowError(f"loan '{self.loan_id}': empty product set")
        if self.defaulted and self.default_month is None:
            raise BadDateError(
                f"loan '{self.loan_id}': defaulted but default_month missing"
            )
        if not self.defaulted and self.default_month is not None:
            raise BadDateError(
                f"loan '{self.loan_id}': default_month set on a non-defaulted loan"
            )
        if self.default_month is not None and self.default_month < self.origination:
            raise BadDateError(
                f"loan '{self.loan_id}': default_month precedes origination"
            )


@dataclass(frozen=True)
class WindowSpec:
    """A half-open month window with a scoring tail at its end."""

    start: int
    length_months: int = 60
    scoring_tail_months: int = 1

    def __post_init__(self) -> None:
        if self.scoring_tail_months < 1:
            raise InvalidConfigError("scoring tail must be at least one month")
        if self.length_months <= self.scoring_tail_months:
            raise InvalidConfigError(
                "window length must exceed the scoring tail "
                f"({self.length_months} <= {self.scoring_tail_months})"
            )

    @property
    def end(self) -> int:
        return self.start + self.length_months

    @property
    def influence_end(self) -> int:
        """First month of the scoring tail."""
        return self.end - self.scoring_tail_months

    def contains(self, month: int) -> bool:
        return self.start <= month < self.end

    def in_tail(self, month: int) -> bool:
        return self.influence_end <= month < self.end

    def in_influence_period(self, month: int) -> bool:
        return self.start <= month < self.influence_end


def parse_loans(lines: Iterable[str], source: str = "<loans>") -> list[LoanRecord]:
    """Parse loan rows, validating dates, flags, and area-district nesting.

    Errors carry ``source:line`` positions.  Extra columns are ignored; the
    required ones are listed in :data:`LOAN_COLUMNS`.
    """
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumnError(f"{source}: empty input") from None
    positions: dict[str, int] = {}
    for column in LOAN_COLUMNS:
        if column not in header:
            raise MissingColumnError(f"{source}: missing column '{column}'")
        positions[column] = header.index(column)

    area_district: dict[str, tuple[str, int]] = {}
    records: list[LoanRecord] = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        line = reader.line_num
        if len(row) < len(header):
            raise MalformedRowError(
                f"{source}:{line}: expected {len(header)} cells, got {len(row)}"
            )

        def cell(column: str) -> str:
            return row[positions[column]].strip()

        loan_id = cell("loan_id")
        borrower_id = cell("borrower_id")
        if not loan_id or not borrower_id:
            raise MalformedRowError(f"{source}:{line}: empty loan or borrower id")
        try:
            origination = parse_month(cell("origination"))
        except BadDateError as exc:
            raise BadDateError(f"{source}:{line}: {exc}") from None
        products = tuple(
            dict.fromkeys(p.strip() for p in cell("products").split(";") if p.strip())
        )
        if not products:
            raise MalformedRowError(f"{source}:{line}: empty products cell")
        district = cell("district")
        area = cell("area")
        if not district or not area:
            raise MalformedRowError(f"{source}:{line}: empty district or area")
        known = area_district.get(area)
        if known is not None and known[0] != district:
            raise AreaDistrictConflictError(
                f"{source}:{line}: area '{area}' belongs to district '{district}' "
                f"here but to '{known[0]}' on line {known[1]}"
            )
        if known is None:
            area_district[area] = (district, line)
        raw_flag = cell("defaulted")
        if raw_flag not in ("0", "1"):
            raise MalformedRowError(
                f"{source}:{line}: defaulted must be 0 or 1, got {raw_flag!r}"
            )
        defaulted = raw_flag == "1"
        raw_default = cell("default_month")
        default_month: int | None = None
        if raw_default:
            try:
                default_month = parse_month(raw_default)
            except BadDateError as exc:
                raise BadDateError(f"{source}:{line}: {exc}") from None
        try:
            record = LoanRecord(
                loan_id=loan_id,
                borrower_id=borrower_id,
                origination=origination,
                products=products,
                district=district,
                area=area,
                defaulted=defaulted,
                default_month=default_month,
            )
        except (BadDateError, MalformedRowError) as exc:
            raise type(exc)(f"{source}:{line}: {exc}") from None
        records.append(record)
    return records


def load_loans(path: str | Path) -> list[LoanRecord]:
    with open(path, newline="") as handle:
        return parse_loans(handle, source=str(path))


def write_loans_csv(records: Iterable[LoanRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(LOAN_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.loan_id,
                    rec.borrower_id,
                    format_month(rec.origination),
                    ";".join(rec.products),
                    rec.district,
                    rec.area,
                    int(rec.defaulted),
                    format_month(rec.default_month)
                    if rec.default_month is not None
                    else "",
                ]
            )


def build_window_network(
    records: Sequence[LoanRecord],
    window: WindowSpec,
    stickiness: float = 1.0,
) -> MultilayerNetwork:
    """Build the two-layer network of loans originated inside the window.

    Every loan contributes weight 1 edges from its borrower to each product,
    to its district, and to its area; repeated pairs accumulate weight.
    """
    product_edges: dict[tuple[str, str], float] = {}
    geo_edges: dict[tuple[str, str], float] = {}
    product_nodes: dict[str, None] = {}
    geo_nodes: dict[str, None] = {}
    geo_tags: dict[tuple[str, str], str] = {}
    for rec in records:
        if not window.contains(rec.origination):
            continue
        for product in rec.products:
            node = PRODUCT_PREFIX + product
            product_nodes.setdefault(node, None)
            key = (rec.borrower_id, node)
            product_edges[key] = product_edges.get(key, 0.0) + 1.0
        for node, tag in (
            (DISTRICT_PREFIX + rec.district, "district"),
            (AREA_PREFIX + rec.area, "area"),
        ):
            geo_nodes.setdefault(node, None)
            key = (rec.borrower_id, node)
            geo_edges[key] = geo_edges.get(key, 0.0) + 1.0
            geo_tags[key] = tag
    product_layer = Layer(
        PRODUCT_LAYER,
        tuple(product_nodes),
        tuple(Edge(c, s, w, "product") for (c, s), w in product_edges.items()),
    )
    geography_layer = Layer(
        GEOGRAPHY_LAYER,
        tuple(geo_nodes),
        tuple(Edge(c, s, w, geo_tags[(c, s)]) for (c, s), w in geo_edges.items()),
    )
    return build_network([product_layer, geography_layer], stickiness)


def defaulter_set(records: Sequence[LoanRecord], window: WindowSpec) -> set[str]:
    """Borrowers with a loan in the window defaulting before the scoring tail.

    The defaulted loan itself must originate inside the window, which keeps
    every returned borrower a common node of the window network.  An empty set
    simply means the window saw no qualifying defaults.
    """
    out: set[str] = set()
    for rec in records:
        if (
            rec.defaulted
            and rec.default_month is not None
            and window.contains(rec.origination)
            and window.in_influence_period(rec.default_month)
        ):
            out.add(rec.borrower_id)
    return out
