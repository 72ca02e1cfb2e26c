"""How fast does the multilayer walk approach its single-layer limit?

As the inter-layer coupling S grows, a walker hops between a borrower's layer
copies ever more freely and the layer structure stops mattering: the
layer-aggregated scores converge to those of a walk on the flattened network,
where all edges coexist and the coupling mass sits on borrower self-loops.
This script measures that convergence as the Spearman correlation between the
two rankings across an S grid, per rolling window, and prints one row per
(window, S).

Usage:
    python3 scripts/stickiness_trend.py
"""

from __future__ import annotations

import argparse
import logging

import numpy as np
from scipy.stats import spearmanr

from multirank.graph import supra_adjacency, supra_transition
from multirank.ingest import WindowSpec, build_window_network, defaulter_set, format_month
from multirank.propagation import InfluenceSpec, build_influence_matrix, personalized_pagerank
from multirank.synth import SynthConfig, generate_loans

S_GRID = (1.0, 10.0, 100.0, 10_000.0)


def flat_coloured_scores(net, sources: list[str], stickiness: float, r: float) -> np.ndarray:
    """Personalized walk on the flattened network: every layer's edges in one
    adjacency, inter-layer mass folded onto common-node self-loops."""
    ids = list(net.node_ids)
    index = {node: i for i, node in enumerate(ids)}
    n = len(ids)
    adjacency = np.zeros((n, n))
    for layer in net.layers:
        for edge in layer.edges:
            adjacency[index[edge.common], index[edge.specific]] += edge.weight
            adjacency[index[edge.specific], index[edge.common]] += edge.weight
    n_layers = len(net.layers)
    loop = stickiness * n_layers * (n_layers - 1)
    for common in net.common_ids:
        adjacency[index[common], index[common]] += loop
    columns = adjacency.sum(axis=0)
    transition = np.where(columns > 0, adjacency / np.where(columns == 0, 1.0, columns), 1.0 / n)
    restart = np.zeros(n)
    restart[[index[s] for s in sources]] = 1.0 / len(sources)
    return np.linalg.solve(np.eye(n) - r * transition, (1.0 - r) * restart)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--borrowers", type=int, default=300)
    parser.add_argument("--months", type=int, default=70)
    parser.add_argument("--window-months", type=int, default=60)
    parser.add_argument("--r", type=float, default=0.85)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    logging.basicConfig(level=logging.WARNING)

    records = generate_loans(
        SynthConfig(
            n_borrowers=args.borrowers,
            n_products=8,
            n_districts=4,
            areas_per_district=2,
            months=args.months,
            base_default_rate=0.01,
            area_shock_strength=3.0,
            seed=args.seed,
        )
    )
    first = min(r.origination for r in records)
    last = max(r.origination for r in records)
    starts = range(first, last - args.window_months + 2, 12)

    print("window    S         spearman(omega, flat)")
    for start in starts:
        window = WindowSpec(start, args.window_months, 1)
        sources = sorted(defaulter_set(records, window))
        if len(sources) < 2:
            continue
        for stickiness in S_GRID:
            net = build_window_network(records, window, stickiness)
            transition = supra_transition(supra_adjacency(net))
            spec = InfluenceSpec(frozenset(sources), "combined", "collapsed_vector")
            result = personalized_pagerank(
                transition,
                build_influence_matrix(net, spec),
                r=args.r,
                mode="collapsed_vector",
            )
            omega = np.array([result.score_of(node) for node in net.node_ids])
            flat = flat_coloured_scores(net, sources, stickiness, args.r)
            rho = spearmanr(omega, flat).statistic
            print(f"{format_month(start)}  {stickiness:<9g} {rho:.6f}")


if __name__ == "__main__":
    main()
