"""Random-walk scores over the supra state space.

The standard score is the steady state of ``x <- r*T*x + (1-r)/dim`` on the
supra transition matrix T, aggregated per node by summing a node's states over
layers.  Personalized variants bias the teleport toward a set of source nodes
through an influence matrix u with ones at chosen state pairs:

* ``intra``    ones at (i, a) -> (i, a) for each source i and layer a,
* ``inter``    ones at (i, a) -> (i, b) for each source i and layers a != b,
* ``combined`` both.

Two restart semantics are provided.  ``faithful_matrix`` forms
``R = r*T + (1-r) * u / sum(u)`` and runs power iteration with an L1
renormalization of the iterate after every multiply; R is generally not
column-stochastic, so the renormalization is essential.  ``collapsed_vector``
compresses u into a restart vector v proportional to its row sums and solves
the proper stochastic fixed point ``x = r*T*x + (1-r)*v``.  An all-ones u is
recognized and routed to the standard uniform teleport in either mode.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import sparse

from .errors import (
    EmptySourceSetError,
    InvalidConfigError,
    NotStochasticError,
    SourceNotCommonNodeError,
    ValidationError,
)
from .graph import MultilayerNetwork, SupraMatrix, supra_adjacency, supra_transition

logger = logging.getLogger(__name__)

SCENARIOS = ("intra", "inter", "combined")
RESTART_MODES = ("faithful_matrix", "collapsed_vector")

#: Tolerance for accepting a matrix as column-stochastic.
STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class InfluenceSpec:
    """Which nodes inject influence, through which scenario and semantics."""

    sources: frozenset[str]
    scenario: str = "combined"
    restart_mode: str = "faithful_matrix"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", frozenset(self.sources))
        if not self.sources:
            raise EmptySourceSetError("influence source set is empty")
        if self.scenario not in SCENARIOS:
            raise InvalidConfigError(
                f"unknown scenario '{self.scenario}', expected one of {SCENARIOS}"
            )
        if self.restart_mode not in RESTART_MODES:
            raise InvalidConfigError(
                f"unknown restart mode '{self.restart_mode}', "
                f"expected one of {RESTART_MODES}"
            )


@dataclass(frozen=True)
class RankResult:
    """Scores per state and per node, plus convergence diagnostics."""

    per_state: np.ndarray
    per_node: np.ndarray
    iterations: int
    residual: float
    converged: bool
    node_ids: tuple[str, ...]
    layer_names: tuple[str, ...]

    @cached_property
    def _node_scores(self) -> dict[str, float]:
        return dict(zip(self.node_ids, self.per_node.tolist()))

    def score_of(self, node_id: str) -> float:
        try:
            return self._node_scores[node_id]
        except KeyError:
            raise ValidationError(f"unknown node id '{node_id}'") from None


def _validate_sources(net: MultilayerNetwork, sources: Iterable[str]) -> list[int]:
    """Check sources are non-empty common nodes; return sorted node indices."""
    sources = list(sources)
    if not sources:
        raise EmptySourceSetError("influence source set is empty")
    indices = []
    for node_id in sources:
        if not net.is_common(node_id):
            raise SourceNotCommonNodeError(
                f"source '{node_id}' is not a common node of the network"
            )
        indices.append(net.node_index(node_id))
    return sorted(indices)


def build_influence_matrix(net: MultilayerNetwork, spec: InfluenceSpec) -> SupraMatrix:
    """Place scenario ones for each source node across the layer blocks."""
    idx = _validate_sources(net, spec.sources)
    n, n_layers = net.n_nodes, net.n_layers
    rows: list[int] = []
    cols: list[int] = []
    intra = spec.scenario in ("intra", "combined")
    inter = spec.scenario in ("inter", "combined")
    for i in idx:
        for a in range(n_layers):
            if intra:
                rows.append(a * n + i)
                cols.append(a * n + i)
            if inter:
                for b in range(n_layers):
                    if b != a:
                        rows.append(a * n + i)
                        cols.append(b * n + i)
    data = np.ones(len(rows), dtype=np.float64)
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(net.dim, net.dim)).tocsr()
    return SupraMatrix("influence", matrix, net.node_ids, net.layer_names)


def _check_transition(matrix: SupraMatrix) -> None:
    if matrix.kind != "transition":
        raise NotStochasticError(
            f"expected a transition matrix, got kind '{matrix.kind}'"
        )
    sums = matrix.column_sums()
    worst = float(np.abs(sums - 1.0).max()) if sums.size else 0.0
    if worst > STOCHASTIC_TOL:
        raise NotStochasticError(
            f"columns deviate from sum 1 by up to {worst:.3e}"
        )


def _is_all_ones(influence: SupraMatrix) -> bool:
    m = influence.data
    return m.nnz == m.shape[0] * m.shape[1] and bool((m.data == 1.0).all())


def _restart_iteration(
    transition: SupraMatrix,
    restart: np.ndarray,
    r: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, float, bool]:
    """Iterate ``x <- r*T*x + (1-r)*v`` from uniform until the L1 change <= tol.

    T column-stochastic and v summing to one keep the iterate's mass fixed, so
    no renormalization is applied; with r = 0 the restart vector is returned
    bit for bit.
    """
    dim = transition.dim
    x = np.full(dim, 1.0 / dim)
    hold = 1.0 - r
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        new = r * transition.matvec(x) + hold * restart
        residual = float(np.abs(new - x).sum())
        x = new
        if residual <= tol:
            return x, iteration, residual, True
    return x, max_iter, residual, False


def _renormalized_power_iteration(
    step: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, float, bool]:
    """Power iteration with L1 renormalization after every multiply."""
    x = np.full(dim, 1.0 / dim)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        y = step(x)
        total = float(np.abs(y).sum())
        if total <= 0.0:
            raise ValidationError("iterate collapsed to zero during power iteration")
        y = y / total
        residual = float(np.abs(y - x).sum())
        x = y
        if residual <= tol:
            return x, iteration, residual, True
    return x, max_iter, residual, False


def _finish(
    transition: SupraMatrix,
    x: np.ndarray,
    iterations: int,
    residual: float,
    converged: bool,
) -> RankResult:
    n, n_layers = transition.n_nodes, transition.n_layers
    per_node = x.reshape(n_layers, n).sum(axis=0)
    if not converged:
        logger.warning(
            "rank iteration stopped at max_iter with residual %.3e", residual
        )
    return RankResult(
        per_state=x,
        per_node=per_node,
        iterations=iterations,
        residual=residual,
        converged=converged,
        node_ids=transition.node_ids,
        layer_names=transition.layer_names,
    )


def _validate_params(r: float, tol: float, max_iter: int) -> None:
    if not 0.0 <= r <= 1.0:
        raise InvalidConfigError(f"damping r must lie in [0, 1], got {r!r}")
    if not tol > 0:
        raise InvalidConfigError(f"tolerance must be positive, got {tol!r}")
    if max_iter < 1:
        raise InvalidConfigError(f"max_iter must be >= 1, got {max_iter!r}")


def multilayer_pagerank(
    transition: SupraMatrix,
    *,
    r: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> RankResult:
    """Standard walk with the uniform teleport ``(1-r)/dim``."""
    return personalized_pagerank(transition, None, r=r, tol=tol, max_iter=max_iter)


def personalized_pagerank(
    transition: SupraMatrix,
    influence: SupraMatrix | None = None,
    *,
    r: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
    mode: str = "faithful_matrix",
) -> RankResult:
    """Rank states of a transition matrix, optionally biased by an influence
    matrix.

    ``influence=None`` (or an explicit all-ones matrix) selects the standard
    uniform teleport.  Otherwise ``mode`` picks the restart semantics; see the
    module docstring.  The result carries a ``converged`` flag instead of
    raising when ``max_iter`` is hit.
    """
    _validate_params(r, tol, max_iter)
    if mode not in RESTART_MODES:
        raise InvalidConfigError(
            f"unknown restart mode '{mode}', expected one of {RESTART_MODES}"
        )
    _check_transition(transition)
    dim = transition.dim
    if dim == 0:
        raise ValidationError("transition matrix has dimension zero")
    if influence is not None:
        if influence.dim != dim:
            raise ValidationError(
                f"influence dimension {influence.dim} does not match "
                f"transition dimension {dim}"
            )
        if _is_all_ones(influence):
            influence = None

    if influence is None:
        uniform = np.full(dim, 1.0 / dim)
        x, iters, residual, ok = _restart_iteration(
            transition, uniform, r, tol, max_iter
        )
    elif mode == "collapsed_vector":
        row_sums = np.asarray(influence.data.sum(axis=1)).ravel()
        total = row_sums.sum()
        if total <= 0:
            raise ValidationError("influence matrix has no mass")
        restart = row_sums / total
        x, iters, residual, ok = _restart_iteration(
            transition, restart, r, tol, max_iter
        )
    else:
        mass = influence.data.sum()
        if mass <= 0:
            raise ValidationError("influence matrix has no mass")
        weight = (1.0 - r) / mass
        u = influence.data

        def step(x: np.ndarray) -> np.ndarray:
            return r * transition.matvec(x) + weight * (u @ x)

        x, iters, residual, ok = _renormalized_power_iteration(
            step, dim, tol, max_iter
        )
    return _finish(transition, x, iters, residual, ok)


def flat_personalized_pagerank(
    net: MultilayerNetwork,
    sources: Iterable[str],
    *,
    r: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> RankResult:
    """Ordinary personalized walk on an aggregated (single-layer) network.

    The restart is uniform over the source nodes.  This is the flattened
    baseline against which multilayer scores are compared.
    """
    if net.n_layers != 1:
        raise ValidationError(
            f"flat scores need a single-layer network, got {net.n_layers} layers"
        )
    _validate_params(r, tol, max_iter)
    indices = _validate_sources(net, sources)
    transition = supra_transition(supra_adjacency(net))
    restart = np.zeros(net.dim)
    restart[indices] = 1.0 / len(indices)
    x, iters, residual, ok = _restart_iteration(transition, restart, r, tol, max_iter)
    return _finish(transition, x, iters, residual, ok)


def write_node_scores(result: RankResult, path: str | Path) -> None:
    """Write ``node_id,score`` rows at full double precision."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["node_id", "score"])
        for node_id, score in zip(result.node_ids, result.per_node):
            writer.writerow([node_id, f"{score:.17g}"])


def write_state_scores(result: RankResult, path: str | Path) -> None:
    """Write ``node_id,layer,score`` rows in state-index order."""
    n = len(result.node_ids)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["node_id", "layer", "score"])
        for layer_idx, layer_name in enumerate(result.layer_names):
            for i, node_id in enumerate(result.node_ids):
                score = result.per_state[layer_idx * n + i]
                writer.writerow([node_id, layer_name, f"{score:.17g}"])
