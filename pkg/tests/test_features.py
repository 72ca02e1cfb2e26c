"""Degree features, score features, pruning, and univariate AUC."""
from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import support
from conftest import make_loan
from multirank.errors import (
    BorrowerNotInTailError,
    DegenerateLabelsError,
    MissingScenarioRunError,
    ValidationError,
)
from multirank.features import (
    DEGREE_COLUMNS,
    FEATURE_COLUMNS,
    SCORE_COLUMNS,
    DegreeIndex,
    correlation_prune,
    degree_features,
    score_features,
    univariate_auc,
)
from multirank.graph import supra_adjacency, supra_transition
from multirank.ingest import WindowSpec, build_window_network, defaulter_set
from multirank.propagation import (
    InfluenceSpec,
    build_influence_matrix,
    personalized_pagerank,
)

# ---------------------------------------------------------------------------
# Degree features.


def test_degree_columns_fixed_order():
    assert len(DEGREE_COLUMNS) == 20
    assert DEGREE_COLUMNS[0] == "ProdDegree1"
    assert DEGREE_COLUMNS[-1] == "ProdAreaDegree5_DF"
    assert len(FEATURE_COLUMNS) == 32  # 20 degrees + 12 scores; Aggregate is separate


def test_degree_features_hand_example(t1_loans, t1_window):
    counts = degree_features(t1_loans, t1_window, "b2")
    # b2 shares p1 with b1 and d1/a1 with b3; neither neighbour originated
    # within the final year, and the two neighbour sets are disjoint.
    expected = dict.fromkeys(DEGREE_COLUMNS, 0)
    expected.update({"ProdDegree5": 1, "DistDegree5": 1, "AreaDegree5": 1})
    assert counts == expected


def test_degree_features_defaulter_overlay(t1_loans, t1_window):
    loans = list(t1_loans)
    loans[0] = make_loan("l1", "b1", "2000-06", "p1", "d9", "a9", default_month="2000-10")
    sources = defaulter_set(loans, t1_window)
    assert sources == {"b1"}
    index = DegreeIndex(loans, t1_window, defaulters=sources)
    counts = index.counts("b2")
    assert counts["ProdDegree5_DF"] == 1
    assert counts["DistDegree5_DF"] == 0
    assert counts["AreaDegree5_DF"] == 0


def test_degree_features_recent_horizon(t1_window):
    loans = [
        make_loan("l1", "b1", "2004-06", "p1", "d9", "a9"),
        make_loan("l3", "b2", "2004-12", "p1", "d1", "a1"),
    ]
    counts = degree_features(loans, t1_window, "b2")
    # 2004-06 falls inside the last twelve months of the window.
    assert counts["ProdDegree1"] == 1 and counts["ProdDegree5"] == 1


def test_degree_features_requires_tail_borrower(t1_loans, t1_window):
    with pytest.raises(BorrowerNotInTailError):
        degree_features(t1_loans, t1_window, "b1")
    with pytest.raises(BorrowerNotInTailError):
        degree_features(t1_loans, t1_window, "nobody")


def test_tail_bookkeeping(t1_loans, t1_window):
    index = DegreeIndex(t1_loans, t1_window)
    assert index.tail_borrowers == ("b2",)
    assert [r.loan_id for r in index.tail_loans("b2")] == ["l3"]
    assert index.tail_loans("b1") == ()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_degree_features_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    records = support.random_loans(rng, int(rng.integers(20, 200)))
    window = WindowSpec(support.MONTH0, 60, 1)
    defaulters = defaulter_set(records, window)
    index = DegreeIndex(records, window, defaulters=defaulters)
    for borrower in index.tail_borrowers:
        expected = support.brute_degree_counts(
            list(records), window.start, window.length_months, borrower, defaulters
        )
        assert index.counts(borrower) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_degree_count_invariants(seed):
    rng = np.random.default_rng(seed)
    records = support.random_loans(rng, int(rng.integers(20, 150)))
    window = WindowSpec(support.MONTH0, 60, 1)
    index = DegreeIndex(records, window, defaulters=defaulter_set(records, window))
    for borrower in index.tail_borrowers:
        c = index.counts(borrower)
        for name in ("Prod", "Dist", "Area", "ProdDist", "ProdArea"):
            for years in (1, 5):
                assert c[f"{name}Degree{years}_DF"] <= c[f"{name}Degree{years}"]
            assert c[f"{name}Degree1"] <= c[f"{name}Degree5"]
        for years in (1, 5):
            assert c[f"ProdDistDegree{years}"] <= min(
                c[f"ProdDegree{years}"], c[f"DistDegree{years}"]
            )
            assert c[f"ProdAreaDegree{years}"] <= min(
                c[f"ProdDegree{years}"], c[f"AreaDegree{years}"]
            )


# ---------------------------------------------------------------------------
# Score features.


def _window_results(loans, window, sources):
    net = build_window_network(loans, window)
    transition = supra_transition(supra_adjacency(net))
    results = {}
    for scenario in ("intra", "inter", "combined"):
        spec = InfluenceSpec(frozenset(sources), scenario=scenario)
        influence = build_influence_matrix(net, spec)
        results[scenario] = personalized_pagerank(transition, influence)
    return net, results


def test_score_features_columns_and_values(t1_loans, t1_window):
    net, results = _window_results(t1_loans, t1_window, {"b1"})
    row = score_features(net, results, "b2")
    assert tuple(row) == SCORE_COLUMNS
    for scenario in ("intra", "inter", "combined"):
        result = results[scenario]
        assert row[f"Bipart_{scenario}"] == result.score_of("b2")
        # b2 has exactly one product and one district and area, so each max
        # is that single candidate's score.
        assert row[f"Bipart_product_{scenario}_max"] == result.score_of("product:p1")
        assert row[f"Bipart_district_{scenario}_max"] == result.score_of("district:d1")
        assert row[f"Bipart_area_{scenario}_max"] == result.score_of("area:a1")


def test_score_features_max_over_candidates(t1_window):
    loans = [
        make_loan("l1", "b1", "2000-06", "p1;p2", "d1", "a1"),
        make_loan("l2", "b2", "2000-07", "p1", "d1", "a1"),
        make_loan("l3", "b3", "2000-08", "p1", "d2", "a5"),
    ]
    net, results = _window_results(loans, t1_window, {"b3"})
    row = score_features(net, results, "b1")
    # b1 carries p1 and p2; the feature takes the better-scoring one.
    for scenario in ("intra", "inter", "combined"):
        result = results[scenario]
        scores = [result.score_of("product:p1"), result.score_of("product:p2")]
        assert row[f"Bipart_product_{scenario}_max"] == max(scores)
        assert row[f"Bipart_product_{scenario}_max"] == result.score_of("product:p1")


def test_score_features_missing_scenario(t1_loans, t1_window):
    net, results = _window_results(t1_loans, t1_window, {"b1"})
    del results["inter"]
    with pytest.raises(MissingScenarioRunError):
        score_features(net, results, "b2")


def test_score_features_unknown_borrower(t1_loans, t1_window):
    net, results = _window_results(t1_loans, t1_window, {"b1"})
    with pytest.raises(ValidationError):
        score_features(net, results, "b99")


# ---------------------------------------------------------------------------
# Correlation pruning.


def _frame(**columns):
    return pd.DataFrame(columns)


def test_prune_drops_duplicate_column():
    x = [1.0, 2.0, 3.0, 4.0, 5.0, 1.5]
    label = [0, 0, 1, 1, 1, 0]
    noise = [0.3, -0.2, 0.1, 0.0, -0.1, 0.25]
    table = _frame(a=x, b=x, noise=noise, label=label)
    result = correlation_prune(table)
    # Tie on target correlation: the lexicographically later twin goes.  The
    # target column always stays.
    assert result.retained == ["a", "noise", "label"]
    assert any("b" in entry for entry in result.log)


def test_prune_keeps_uncorrelated_columns():
    rng = np.random.default_rng(0)
    table = _frame(
        a=rng.normal(size=40),
        b=rng.normal(size=40),
        label=(rng.random(40) > 0.5).astype(int),
    )
    result = correlation_prune(table)
    assert result.retained == ["a", "b", "label"]
    assert result.log == []


def test_prune_keeps_better_predictor():
    rng = np.random.default_rng(1)
    n = 200
    label = (rng.random(n) > 0.5).astype(float)
    shared = rng.normal(size=n)
    strong = label + 0.5 * shared
    weak = label + 0.5 * shared + 0.45 * rng.normal(size=n)
    # strong and weak correlate above the cutoff through the shared noise;
    # strong tracks the label better and must survive.
    assert abs(np.corrcoef(strong, weak)[0, 1]) > 0.7
    assert np.corrcoef(strong, label)[0, 1] > np.corrcoef(weak, label)[0, 1]
    table = _frame(strong=strong, weak=weak, label=label)
    result = correlation_prune(table)
    assert result.retained == ["strong", "label"]


def test_prune_drops_constant_columns_with_log():
    table = _frame(a=[1.0, 2.0, 3.0, 4.0], flat=[7.0] * 4, label=[0, 0, 1, 1])
    result = correlation_prune(table)
    assert result.retained == ["a", "label"]
    assert any("flat" in entry for entry in result.log)


def test_prune_never_drops_target():
    x = [1.0, 2.0, 3.0, 4.0]
    table = _frame(a=x, label=x)
    result = correlation_prune(table, target="label")
    assert "label" in result.retained


def test_prune_validation():
    with pytest.raises(ValidationError):
        correlation_prune(_frame(a=[1.0, 2.0]), target="label")
    with pytest.raises(ValidationError):
        correlation_prune(_frame(a=["x", "y"], label=[0, 1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.5, 0.7, 0.9]))
def test_prune_matches_exhaustive_oracle(seed, cutoff):
    rng = np.random.default_rng(seed)
    n = 60
    base = rng.normal(size=(n, 3))
    mix = rng.normal(size=(3, 6)) * (rng.random((3, 6)) > 0.4)
    data = base @ mix + rng.normal(scale=0.3, size=(n, 6))
    table = pd.DataFrame(data, columns=[f"f{i}" for i in range(6)])
    table["label"] = (base[:, 0] > 0).astype(float)
    result = correlation_prune(table, cutoff=cutoff)
    features_only = [c for c in result.retained if c != "label"]
    assert features_only == support.exhaustive_prune(table, cutoff, "label")


def test_prune_column_order_preserved_in_output():
    x = np.linspace(0.0, 1.0, 12)
    rng = np.random.default_rng(3)
    table = _frame(z=rng.normal(size=12), a=x, label=(x > 0.5).astype(int))
    result = correlation_prune(table)
    assert result.retained == ["z", "a", "label"]


# ---------------------------------------------------------------------------
# Univariate AUC.


def test_auc_hand_values():
    assert univariate_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    assert univariate_auc([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1]) == 1.0
    assert univariate_auc([4.0, 3.0, 2.0, 1.0], [0, 0, 1, 1]) == 0.0
    assert univariate_auc([5.0, 5.0, 5.0, 5.0], [0, 1, 0, 1]) == 0.5


def test_auc_tie_handling():
    assert univariate_auc([1.0, 2.0, 2.0], [0, 0, 1]) == pytest.approx(0.75)


def test_auc_errors():
    with pytest.raises(DegenerateLabelsError):
        univariate_auc([1.0, 2.0], [1, 1])
    with pytest.raises(DegenerateLabelsError):
        univariate_auc([1.0, 2.0], [0, 0])
    with pytest.raises(ValidationError):
        univariate_auc([1.0], [0, 1])
    with pytest.raises(ValidationError):
        univariate_auc([float("nan"), 2.0], [0, 1])


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=30),
    st.integers(0, 10_000),
)
def test_auc_matches_pairwise_oracle(scores, seed):
    rng = np.random.default_rng(seed)
    labels = [bool(b) for b in rng.integers(0, 2, size=len(scores))]
    if len(set(labels)) < 2:
        labels[0], labels[1] = False, True
    assert univariate_auc(scores, labels) == pytest.approx(
        support.pair_auc(scores, labels), abs=1e-12
    )
