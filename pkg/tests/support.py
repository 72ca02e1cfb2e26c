"""Independent oracles and random input builders for the test suite.

Everything here is deliberately written from the documented contracts with
plain dense numpy and double loops, not by calling the production code, so
that agreement between the two is evidence rather than tautology.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from multirank.ingest import LoanRecord

# ---------------------------------------------------------------------------
# Dense multilayer matrices built straight from edge lists.


@dataclass(frozen=True)
class DensePlan:
    """Node bookkeeping shared by the dense builders."""

    node_ids: tuple[str, ...]
    common_ids: tuple[str, ...]
    n_layers: int

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def dim(self) -> int:
        return self.n_nodes * self.n_layers

    def state(self, node_id: str, layer: int) -> int:
        return layer * self.n_nodes + self.node_ids.index(node_id)


def plan_nodes(layers: list[tuple[str, list[str], list[tuple[str, str, float]]]]) -> DensePlan:
    """Node order per the documented rule: commons by first appearance on the
    common edge side across layers in order, then specifics grouped by layer
    in declaration order."""
    commons: list[str] = []
    for _, _, edges in layers:
        for common, _, _ in edges:
            if common not in commons:
                commons.append(common)
    ordered = list(commons)
    for _, specifics, _ in layers:
        for node in specifics:
            if node not in ordered:
                ordered.append(node)
    return DensePlan(tuple(ordered), tuple(commons), len(layers))


def dense_supra_adjacency(
    layers: list[tuple[str, list[str], list[tuple[str, str, float]]]],
    stickiness: float,
) -> tuple[np.ndarray, DensePlan]:
    plan = plan_nodes(layers)
    mat = np.zeros((plan.dim, plan.dim))
    for index, (_, _, edges) in enumerate(layers):
        for common, specific, weight in edges:
            row = plan.state(common, index)
            col = plan.state(specific, index)
            mat[row, col] += weight
            mat[col, row] += weight
    for alpha in range(plan.n_layers):
        for beta in range(plan.n_layers):
            if alpha == beta:
                continue
            for common in plan.common_ids:
                mat[plan.state(common, alpha), plan.state(common, beta)] = stickiness
    return mat, plan


def dense_transition(adjacency: np.ndarray) -> np.ndarray:
    out = np.array(adjacency, dtype=float)
    dim = out.shape[0]
    for col in range(dim):
        total = out[:, col].sum()
        if total == 0.0:
            out[:, col] = 1.0 / dim
        else:
            out[:, col] = out[:, col] / total
    return out


def dense_influence(plan: DensePlan, sources: list[str], scenario: str) -> np.ndarray:
    mat = np.zeros((plan.dim, plan.dim))
    for node in sources:
        for alpha in range(plan.n_layers):
            if scenario in ("intra", "combined"):
                mat[plan.state(node, alpha), plan.state(node, alpha)] = 1.0
            if scenario in ("inter", "combined"):
                for beta in range(plan.n_layers):
                    if beta != alpha:
                        mat[plan.state(node, alpha), plan.state(node, beta)] = 1.0
    return mat


def solve_restart(transition: np.ndarray, restart: np.ndarray, r: float) -> np.ndarray:
    """Exact solution of x = r*T*x + (1-r)*v (requires r < 1)."""
    dim = transition.shape[0]
    return np.linalg.solve(np.eye(dim) - r * transition, (1.0 - r) * restart)


def restart_from_influence(influence: np.ndarray) -> np.ndarray:
    sums = influence.sum(axis=1)
    return sums / sums.sum()


def renormalized_power(matrix: np.ndarray, steps: int = 10_000) -> np.ndarray:
    """Power iteration with per-step L1 renormalization from a uniform start."""
    x = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for _ in range(steps):
        x = matrix @ x
        x = x / np.abs(x).sum()
    return x


def dense_stationary(transition: np.ndarray) -> np.ndarray:
    """Stationary distribution of a column-stochastic matrix via linear solve."""
    dim = transition.shape[0]
    system = np.vstack([np.eye(dim) - transition, np.ones((1, dim))])
    rhs = np.zeros(dim + 1)
    rhs[-1] = 1.0
    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return solution


def layer_aggregate(per_state: np.ndarray, plan: DensePlan) -> dict[str, float]:
    per_node = per_state.reshape(plan.n_layers, plan.n_nodes).sum(axis=0)
    return dict(zip(plan.node_ids, per_node.tolist()))


def dense_flat_coloured(
    layers: list[tuple[str, list[str], list[tuple[str, str, float]]]],
    stickiness: float,
) -> tuple[np.ndarray, DensePlan]:
    """N x N flattening of the supra adjacency: the union of every layer's
    edges, plus the inter-layer coupling mass folded onto common-node
    self-loops (weight stickiness * L * (L-1), one contribution per ordered
    layer pair)."""
    plan = plan_nodes(layers)
    index = {node: i for i, node in enumerate(plan.node_ids)}
    flat = np.zeros((plan.n_nodes, plan.n_nodes))
    for _, _, edges in layers:
        for common, specific, weight in edges:
            flat[index[common], index[specific]] += weight
            flat[index[specific], index[common]] += weight
    loop = stickiness * plan.n_layers * (plan.n_layers - 1)
    for common in plan.common_ids:
        flat[index[common], index[common]] += loop
    return flat, plan


# ---------------------------------------------------------------------------
# Brute-force degree counts (double loop over loans).


def _in_span(month: int, lo: int, hi: int) -> bool:
    return lo <= month < hi


def brute_degree_counts(
    records: list[LoanRecord],
    window_start: int,
    window_months: int,
    borrower: str,
    defaulters: set[str],
) -> dict[str, int]:
    end = window_start + window_months
    window_loans = [r for r in records if _in_span(r.origination, window_start, end)]

    own_products: set[str] = set()
    own_districts: set[str] = set()
    own_areas: set[str] = set()
    for loan in window_loans:
        if loan.borrower_id == borrower:
            own_products.update(loan.products)
            own_districts.add(loan.district)
            own_areas.add(loan.area)

    out: dict[str, int] = {}
    for years, months in ((1, 12), (5, 60)):
        lo = end - months
        prod: set[str] = set()
        dist: set[str] = set()
        area: set[str] = set()
        for loan in window_loans:
            other = loan.borrower_id
            if other == borrower or not _in_span(loan.origination, lo, end):
                continue
            if own_products & set(loan.products):
                prod.add(other)
            if loan.district in own_districts:
                dist.add(other)
            if loan.area in own_areas:
                area.add(other)
        combos = {
            f"ProdDegree{years}": prod,
            f"DistDegree{years}": dist,
            f"AreaDegree{years}": area,
            f"ProdDistDegree{years}": prod & dist,
            f"ProdAreaDegree{years}": prod & area,
        }
        for name, group in combos.items():
            out[name] = len(group)
            out[f"{name}_DF"] = len(group & defaulters)
    return out


# ---------------------------------------------------------------------------
# Pairwise AUC and exhaustive correlation pruning.


def pair_auc(scores: list[float], labels: list[bool]) -> float:
    wins = 0.0
    pairs = 0
    for score, label in zip(scores, labels):
        if not label:
            continue
        for other, other_label in zip(scores, labels):
            if other_label:
                continue
            pairs += 1
            if score > other:
                wins += 1.0
            elif score == other:
                wins += 0.5
    return wins / pairs


def exhaustive_prune(table, cutoff: float, target: str) -> list[str]:
    """Re-apply the documented pairwise rule until no pair exceeds the cutoff,
    recomputing the offending-pair list from scratch every round."""
    survivors = [c for c in table.columns if c != target]
    survivors = [c for c in survivors if float(np.std(table[c].to_numpy())) > 0.0]
    target_vals = table[target].to_numpy(dtype=float)

    def corr(a: np.ndarray, b: np.ndarray) -> float:
        if np.std(a) == 0.0 or np.std(b) == 0.0:
            return 0.0
        return float(np.corrcoef(a, b)[0, 1])

    while True:
        offending = []
        for i, left in enumerate(survivors):
            for right in survivors[i + 1 :]:
                c = abs(corr(table[left].to_numpy(dtype=float), table[right].to_numpy(dtype=float)))
                if c > cutoff:
                    offending.append((c, tuple(sorted((left, right))), left, right))
        if not offending:
            return survivors
        offending.sort(key=lambda item: (-item[0], item[1]))
        _, _, left, right = offending[0]
        left_t = abs(corr(table[left].to_numpy(dtype=float), target_vals))
        right_t = abs(corr(table[right].to_numpy(dtype=float), target_vals))
        if left_t > right_t:
            drop = right
        elif right_t > left_t:
            drop = left
        else:
            drop = max(left, right)
        survivors = [c for c in survivors if c != drop]


# ---------------------------------------------------------------------------
# Random inputs.


def random_bilayer(
    rng: np.random.Generator,
    max_common: int = 12,
    max_specific: int = 4,
    stickiness: float | None = None,
) -> tuple[list[tuple[str, list[str], list[tuple[str, str, float]]]], float]:
    """A random connected two-layer edge-list description.

    Every common node gets at least one edge in at least one layer, every
    declared specific node at least one edge, and specific nodes within a
    layer are chained through shared borrowers often enough that the supra
    network is usually connected; callers should still verify when
    connectivity matters.
    """
    n_common = int(rng.integers(3, max_common + 1))
    commons = [f"c{i}" for i in range(n_common)]
    layers = []
    for name in ("alpha", "beta"):
        n_spec = int(rng.integers(1, max_specific + 1))
        specifics = [f"{name}_s{j}" for j in range(n_spec)]
        edges: list[tuple[str, str, float]] = []
        for j, spec in enumerate(specifics):
            anchor = commons[int(rng.integers(0, n_common))]
            edges.append((anchor, spec, 1.0))
            if j > 0:
                prev_anchor = edges[-2][0] if rng.random() < 0.5 else commons[0]
                edges.append((prev_anchor, spec, 1.0))
        for common in commons:
            if rng.random() < 0.8:
                spec = specifics[int(rng.integers(0, n_spec))]
                edges.append((common, spec, 1.0))
        deduped: dict[tuple[str, str], float] = {}
        for common, spec, weight in edges:
            deduped[(common, spec)] = deduped.get((common, spec), 0.0) + weight
        edges = [(c, s, w) for (c, s), w in deduped.items()]
        layers.append((name, specifics, edges))
    if stickiness is None:
        stickiness = float(rng.choice([0.5, 1.0, 2.0]))
    return layers, stickiness


MONTH0 = 2000 * 12


def random_loans(
    rng: np.random.Generator,
    n_loans: int,
    months: int = 70,
    n_borrowers: int | None = None,
    n_products: int = 6,
    n_districts: int = 3,
    areas_per_district: int = 2,
    default_rate: float = 0.25,
) -> list[LoanRecord]:
    """Random loan records with repeat borrowers and multi-product loans."""
    if n_borrowers is None:
        n_borrowers = max(2, (2 * n_loans) // 3)
    n_areas = n_districts * areas_per_district
    borrower_area = rng.integers(0, n_areas, size=n_borrowers)
    records = []
    for i in range(n_loans):
        borrower = int(rng.integers(0, n_borrowers))
        area = int(borrower_area[borrower])
        count = int(rng.integers(1, 4))
        chosen = sorted({int(p) for p in rng.integers(0, n_products, size=count)})
        origination = MONTH0 + int(rng.integers(0, months))
        defaulted = bool(rng.random() < default_rate)
        default_month = None
        if defaulted:
            default_month = origination + int(rng.integers(0, 24))
        records.append(
            LoanRecord(
                loan_id=f"L{i:04d}",
                borrower_id=f"B{borrower:04d}",
                origination=origination,
                products=tuple(f"P{p}" for p in chosen),
                district=f"D{area // areas_per_district}",
                area=f"A{area}",
                defaulted=defaulted,
                default_month=default_month,
            )
        )
    return records
