"""Bipartite multilayer networks and their supra matrices.

A network has one pool of common nodes shared by every layer plus, per layer,
a pool of layer-specific nodes.  Intra-layer edges run only between common and
specific nodes of that layer; inter-layer coupling connects each common node
to its own copies in the other layers with a configurable weight (stickiness).
All nodes are materialized in every layer, so a network with N distinct nodes
and L layers flattens to matrices of dimension N*L with state index
``layer * N + node``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import (
    DuplicateNodeIdError,
    EdgeEndpointMissingError,
    EmptyNetworkError,
    MalformedRowError,
    MissingColumnError,
    NegativeStickinessError,
    NonPositiveWeightError,
    ValidationError,
)

#: Largest dimension for which dense conversions are allowed.  Dense matrices
#: exist for oracles and small diagnostics only; production paths stay sparse.
DENSE_DIM_LIMIT = 2000

LAYER_EDGE_COLUMNS = ("common_id", "specific_id", "weight")


class NodeKind(Enum):
    COMMON = "common"
    SPECIFIC = "specific"


@dataclass(frozen=True)
class NodeRef:
    """A node identity: its id, role, and (for specific nodes) home layer."""

    id: str
    kind: NodeKind
    layer_of_origin: int | None = None


class Edge(NamedTuple):
    """An intra-layer edge between a common and a specific node.

    ``tag`` is an optional colour kept through aggregation (for example the
    connector class an ingested edge came from).  It never affects weights.
    """

    common: str
    specific: str
    weight: float = 1.0
    tag: str = ""


@dataclass(frozen=True)
class Layer:
    """One layer: declared specific nodes plus common-to-specific edges.

    Duplicate ``(common, specific)`` pairs are merged by summing weights at
    construction time, so a layer never carries parallel edges.
    """

    name: str
    specific_nodes: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        specifics = tuple(dict.fromkeys(self.specific_nodes))
        declared = set(specifics)
        merged: dict[tuple[str, str], Edge] = {}
        for raw in self.edges:
            edge = raw if isinstance(raw, Edge) else Edge(*raw)
            if not edge.weight > 0:
                raise NonPositiveWeightError(
                    f"layer '{self.name}': edge ({edge.common}, {edge.specific}) "
                    f"has non-positive weight {edge.weight!r}"
                )
            if edge.specific not in declared:
                raise EdgeEndpointMissingError(
                    f"layer '{self.name}': edge endpoint '{edge.specific}' is not "
                    f"a declared specific node"
                )
            key = (edge.common, edge.specific)
            if key in merged:
                old = merged[key]
                merged[key] = old._replace(weight=old.weight + float(edge.weight))
            else:
                merged[key] = Edge(edge.common, edge.specific, float(edge.weight), edge.tag)
        object.__setattr__(self, "specific_nodes", specifics)
        object.__setattr__(self, "edges", tuple(merged.values()))

    @property
    def common_nodes(self) -> tuple[str, ...]:
        """Common-side ids in order of first appearance."""
        return tuple(dict.fromkeys(e.common for e in self.edges))

    @property
    def total_weight(self) -> float:
        return float(sum(e.weight for e in self.edges))


@dataclass(frozen=True)
class MultilayerNetwork:
    """A validated multilayer network.  Construct through :func:`build_network`.

    Node ordering is fixed at construction: common nodes first (in order of
    first appearance on the common side of any edge), then specific nodes
    grouped by their layer of origin, each group in declaration order.
    """

    layers: tuple[Layer, ...]
    stickiness: float
    common_ids: tuple[str, ...]
    node_ids: tuple[str, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def dim(self) -> int:
        return self.n_nodes * self.n_layers

    @property
    def layer_names(self) -> tuple[str, ...]:
        return tuple(layer.name for layer in self.layers)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {node_id: i for i, node_id in enumerate(self.node_ids)}

    @cached_property
    def _common_set(self) -> frozenset[str]:
        return frozenset(self.common_ids)

    @cached_property
    def nodes(self) -> tuple[NodeRef, ...]:
        refs = [NodeRef(i, NodeKind.COMMON) for i in self.common_ids]
        for layer_idx, layer in enumerate(self.layers):
            refs.extend(
                NodeRef(s, NodeKind.SPECIFIC, layer_idx) for s in layer.specific_nodes
            )
        return tuple(refs)

    @cached_property
    def adjacency_lists(self) -> tuple[dict[str, tuple[str, ...]], ...]:
        """Per layer, each common node's specific neighbours in edge order."""
        out = []
        for layer in self.layers:
            lists: dict[str, list[str]] = {}
            for edge in layer.edges:
                lists.setdefault(edge.common, []).append(edge.specific)
            out.append({c: tuple(s) for c, s in lists.items()})
        return tuple(out)

    def node_index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise ValidationError(f"unknown node id '{node_id}'") from None

    def state(self, node_id: str, layer_index: int) -> int:
        """Flattened state index of ``node_id`` inside layer ``layer_index``."""
        if not 0 <= layer_index < self.n_layers:
            raise ValidationError(f"layer index {layer_index} out of range")
        return layer_index * self.n_nodes + self.node_index(node_id)

    def is_common(self, node_id: str) -> bool:
        return node_id in self._common_set

    def total_intra_weight(self) -> float:
        return float(sum(layer.total_weight for layer in self.layers))


def build_network(layers: Sequence[Layer], stickiness: float = 1.0) -> MultilayerNetwork:
    """Validate layers and assemble a :class:`MultilayerNetwork`.

    Common nodes are exactly the ids appearing on the common side of any edge.
    Specific node pools must be disjoint across layers and disjoint from the
    common pool.  ``stickiness`` is the inter-layer coupling weight; zero
    disconnects the layers from each other.
    """
    if not stickiness >= 0:
        raise NegativeStickinessError(f"stickiness must be >= 0, got {stickiness!r}")
    layers = tuple(layers)
    seen_names: set[str] = set()
    for layer in layers:
        if layer.name in seen_names:
            raise ValidationError(f"duplicate layer name '{layer.name}'")
        seen_names.add(layer.name)

    commons: dict[str, None] = {}
    for layer in layers:
        for edge in layer.edges:
            commons.setdefault(edge.common, None)

    specific_owner: dict[str, str] = {}
    for layer in layers:
        for s in layer.specific_nodes:
            if s in specific_owner:
                raise DuplicateNodeIdError(
                    f"specific node '{s}' declared in both layer "
                    f"'{specific_owner[s]}' and layer '{layer.name}'"
                )
            if s in commons:
                raise DuplicateNodeIdError(
                    f"node id '{s}' is used both as a common node and as a "
                    f"specific node of layer '{layer.name}'"
                )
            specific_owner[s] = layer.name

    node_ids = list(commons)
    for layer in layers:
        node_ids.extend(layer.specific_nodes)
    return MultilayerNetwork(
        layers=layers,
        stickiness=float(stickiness),
        common_ids=tuple(commons),
        node_ids=tuple(node_ids),
    )


@dataclass(frozen=True)
class SupraMatrix:
    """A sparse matrix over the flattened state space of a network.

    ``kind`` is ``"adjacency"``, ``"transition"``, or ``"influence"``.  For the
    transition form, columns that had no outgoing weight (dangling states) are
    not materialized in ``data``; they are recorded in ``dangling`` and stand
    for a uniform column ``1 / dim``.  :meth:`matvec` and :meth:`to_dense`
    apply that repair.
    """

    kind: str
    data: sparse.csr_matrix
    node_ids: tuple[str, ...]
    layer_names: tuple[str, ...]
    dangling: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_layers(self) -> int:
        return len(self.layer_names)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Multiply by ``x``, applying the implicit dangling-column repair."""
        y = self.data @ x
        if self.dangling is not None and self._dangling_any:
            y += x[self.dangling].sum() / self.dim
        return y

    @cached_property
    def _dangling_any(self) -> bool:
        return bool(self.dangling is not None and self.dangling.any())

    def column_sums(self) -> np.ndarray:
        """Column sums of the logical matrix (dangling columns included)."""
        sums = np.asarray(self.data.sum(axis=0)).ravel()
        if self.dangling is not None and self._dangling_any:
            sums = sums + self.dangling * ((1.0 / self.dim) * self.dim)
        return sums

    def entry(self, row: int, col: int) -> float:
        value = self.data[row, col]
        if self.dangling is not None and self.dangling[col]:
            value += 1.0 / self.dim
        return float(value)

    def to_dense(self) -> np.ndarray:
        """Materialize the logical matrix.  Guarded for small dimensions only."""
        if self.dim > DENSE_DIM_LIMIT:
            raise ValidationError(
                f"dense conversion refused for dim {self.dim} > {DENSE_DIM_LIMIT}"
            )
        dense = self.data.toarray()
        if self.dangling is not None and self._dangling_any:
            dense[:, self.dangling] += 1.0 / self.dim
        return dense


def supra_adjacency(net: MultilayerNetwork) -> SupraMatrix:
    """Flatten a network into its symmetric supra adjacency matrix.

    Each layer's bipartite adjacency sits on the block diagonal; every ordered
    pair of distinct layers gets the stickiness weight on the diagonal entries
    of the common nodes.  Specific nodes have no inter-layer entries, so their
    copies in foreign layers are isolated.
    """
    n, n_layers = net.n_nodes, net.n_layers
    dim = net.dim
    index = {node_id: i for i, node_id in enumerate(net.node_ids)}
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for layer_idx, layer in enumerate(net.layers):
        offset = layer_idx * n
        for edge in layer.edges:
            i = offset + index[edge.common]
            j = offset + index[edge.specific]
            rows.extend((i, j))
            cols.extend((j, i))
            vals.extend((edge.weight, edge.weight))
    if net.stickiness > 0 and n_layers > 1:
        common_idx = np.array([index[c] for c in net.common_ids], dtype=np.int64)
        for a in range(n_layers):
            for b in range(n_layers):
                if a == b:
                    continue
                rows.extend((a * n + common_idx).tolist())
                cols.extend((b * n + common_idx).tolist())
                vals.extend([net.stickiness] * len(common_idx))
    matrix = sparse.coo_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(dim, dim)
    ).tocsr()
    return SupraMatrix("adjacency", matrix, net.node_ids, net.layer_names)


def supra_transition(adjacency: SupraMatrix) -> SupraMatrix:
    """Column-normalize a supra adjacency into a column-stochastic matrix.

    Columns with no outgoing weight are replaced by the uniform distribution
    over all states (kept implicit, see :class:`SupraMatrix`).
    """
    if adjacency.kind != "adjacency":
        raise ValidationError(
            f"supra_transition expects an adjacency matrix, got '{adjacency.kind}'"
        )
    csc = adjacency.data.tocsc(copy=True)
    if csc.nnz and csc.data.min() < 0:
        raise NonPositiveWeightError("adjacency matrix has negative entries")
    sums = np.asarray(csc.sum(axis=0)).ravel()
    dangling = sums == 0.0
    inv = np.zeros_like(sums)
    nonzero = ~dangling
    inv[nonzero] = 1.0 / sums[nonzero]
    csc.data = csc.data * np.repeat(inv, np.diff(csc.indptr))
    return SupraMatrix(
        "transition", csc.tocsr(), adjacency.node_ids, adjacency.layer_names, dangling
    )


def aggregate_network(net: MultilayerNetwork) -> MultilayerNetwork:
    """Collapse all layers into one, keeping every edge and its weight.

    Specific node pools are disjoint, so no edges merge; each edge keeps its
    tag (or inherits its source layer's name) so colours stay recoverable.
    Aggregating a single-layer network returns it unchanged.
    """
    if net.n_layers <= 1:
        return net
    specifics: list[str] = []
    edges: list[Edge] = []
    for layer in net.layers:
        specifics.extend(layer.specific_nodes)
        for edge in layer.edges:
            edges.append(edge if edge.tag else edge._replace(tag=layer.name))
    merged = Layer("aggregate", tuple(specifics), tuple(edges))
    return build_network([merged], net.stickiness)


def largest_component_fraction(net: MultilayerNetwork) -> float:
    """Fraction of distinct nodes inside the largest connected component.

    For a coupled network (stickiness > 0) connectivity is computed on the
    supra adjacency and a node counts as reached if any of its layer copies
    is; isolated foreign copies of specific nodes do not fragment the result.
    With stickiness 0 the layers cannot talk, so connectivity is taken on the
    aggregated union graph instead.
    """
    if net.n_nodes == 0:
        raise EmptyNetworkError("network has no nodes")
    if net.n_layers > 1 and net.stickiness > 0:
        matrix = supra_adjacency(net).data
        n_comp, labels = csgraph.connected_components(matrix, directed=False)
        node_of_state = np.tile(np.arange(net.n_nodes), net.n_layers)
        pairs = np.unique(np.stack([labels, node_of_state], axis=1), axis=0)
        counts = np.bincount(pairs[:, 0], minlength=n_comp)
        return float(counts.max() / net.n_nodes)
    flat = aggregate_network(net) if net.n_layers > 1 else net
    matrix = supra_adjacency(flat).data
    _, labels = csgraph.connected_components(matrix, directed=False)
    return float(np.bincount(labels).max() / flat.n_nodes)


def parse_layer_csv(lines: Iterable[str], name: str, source: str = "<layer>") -> Layer:
    """Read a layer from ``common_id,specific_id,weight`` rows with a header."""
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumnError(f"{source}: empty layer file") from None
    positions = {}
    for column in LAYER_EDGE_COLUMNS:
        if column not in header:
            raise MissingColumnError(f"{source}: missing column '{column}'")
        positions[column] = header.index(column)
    specifics: dict[str, None] = {}
    edges: list[Edge] = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        line = reader.line_num
        if len(row) < len(header):
            raise MalformedRowError(f"{source}:{line}: expected {len(header)} cells")
        common = row[positions["common_id"]].strip()
        specific = row[positions["specific_id"]].strip()
        raw_weight = row[positions["weight"]].strip()
        if not common or not specific:
            raise MalformedRowError(f"{source}:{line}: empty node id")
        try:
            weight = float(raw_weight)
        except ValueError:
            raise MalformedRowError(
                f"{source}:{line}: bad weight {raw_weight!r}"
            ) from None
        specifics.setdefault(specific, None)
        edges.append(Edge(common, specific, weight))
    return Layer(name, tuple(specifics), tuple(edges))


def read_layer_csv(path: str | Path, name: str) -> Layer:
    with open(path, newline="") as handle:
        return parse_layer_csv(handle, name, source=str(path))


def write_layer_csv(layer: Layer, path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(LAYER_EDGE_COLUMNS)
        for edge in layer.edges:
            writer.writerow([edge.common, edge.specific, f"{edge.weight:.17g}"])
