"""Shared fixtures: tiny hand-checkable networks and loan sets."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from multirank.graph import Edge, Layer, MultilayerNetwork, build_network
from multirank.ingest import LoanRecord, WindowSpec, parse_month

# Raw layer descriptions usable by both the production builders and the dense
# oracles in support.py: (name, declared specifics, [(common, specific, w)]).
T1_LAYERS = [
    ("product", ["p1"], [("b1", "p1", 1.0), ("b2", "p1", 1.0)]),
    ("geo", ["a1"], [("b2", "a1", 1.0), ("b3", "a1", 1.0)]),
]


def layers_from_data(data) -> list[Layer]:
    return [
        Layer(name, tuple(specifics), tuple(Edge(c, s, w) for c, s, w in edges))
        for name, specifics, edges in data
    ]


@pytest.fixture
def t1_network() -> MultilayerNetwork:
    """The five-node two-layer toy: b2 bridges the product and geo layers."""
    return build_network(layers_from_data(T1_LAYERS), stickiness=1.0)


def nine_borrower_layers():
    """Nine borrowers, three products, three locations, two layers (N=15).

    Borrowers split three per location; products rotate so each product
    serves three borrowers, and m1 carries a second product.
    """
    product_edges = []
    location_edges = []
    for i in range(1, 10):
        product_edges.append((f"m{i}", f"crop{(i - 1) % 3 + 1}", 1.0))
        location_edges.append((f"m{i}", f"loc{(i - 1) // 3 + 1}", 1.0))
    product_edges.append(("m1", "crop2", 1.0))
    return [
        ("product", ["crop1", "crop2", "crop3"], product_edges),
        ("location", ["loc1", "loc2", "loc3"], location_edges),
    ]


@pytest.fixture
def nine_borrower_network() -> MultilayerNetwork:
    return build_network(layers_from_data(nine_borrower_layers()), stickiness=1.0)


def make_loan(
    loan_id: str,
    borrower: str,
    origination: str,
    products: str,
    district: str,
    area: str,
    default_month: str | None = None,
) -> LoanRecord:
    return LoanRecord(
        loan_id=loan_id,
        borrower_id=borrower,
        origination=parse_month(origination),
        products=tuple(products.split(";")),
        district=district,
        area=area,
        defaulted=default_month is not None,
        default_month=parse_month(default_month) if default_month else None,
    )


@pytest.fixture
def t1_loans():
    """Loan records whose 2000-01 window network mirrors the T1 shape.

    b2 shares product p1 with b1 and area a1 with b3; b2 originates in the
    scoring tail of the default-length window starting 2000-01.
    """
    return [
        make_loan("l1", "b1", "2000-06", "p1", "d9", "a9"),
        make_loan("l2", "b3", "2001-06", "p7", "d1", "a1"),
        make_loan("l3", "b2", "2004-12", "p1", "d1", "a1"),
    ]


@pytest.fixture
def t1_window() -> WindowSpec:
    return WindowSpec(parse_month("2000-01"), 60, 1)
