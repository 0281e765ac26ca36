"""Problem representation and elementary operations on multicut instances.

An instance is a weighted graph; a candidate solution is a 0/1 labeling of
its edges (1 = cut, 0 = joined).  A labeling is feasible (a *multicut*) iff
every cut edge has its endpoints in different connected components of the
joined subgraph, which is equivalent to the chordless-cycle inequalities.

Complete instances store one cost per unordered node pair in canonical
lexicographic order (i, j) with i < j; all labelings of complete instances
use the same order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InfeasibleLabelingError,
    InvalidPartitionError,
    SizeGuardError,
)

# Chordless-cycle enumeration is exponential; this bounds the test oracle.
CYCLE_CHECK_MAX_NODES = 12

NORMALIZED_REL_TOL = 1e-9


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pairs_of(n: int) -> np.ndarray:
    """All unordered node pairs of an n-node graph in canonical order."""
    return np.column_stack(np.triu_indices(n, 1)).astype(np.int64)


def pair_index(n: int, i, j):
    """Canonical index of pair (i, j), i < j, vectorized over i and j."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def condensed_to_matrix(values: np.ndarray, n: int) -> np.ndarray:
    """Expand a canonical pair vector into a symmetric (n, n) matrix."""
    out = np.zeros((n, n), dtype=values.dtype)
    iu, ju = np.triu_indices(n, 1)
    out[iu, ju] = values
    out[ju, iu] = values
    return out


def matrix_to_condensed(matrix: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(matrix.shape[0], 1)
    return matrix[iu, ju].copy()


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class UnionFind:
    """Array-based disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return int(x)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def labels(self) -> np.ndarray:
        """Contiguous component ids in order of first appearance."""
        roots = np.fromiter(
            (self.find(i) for i in range(len(self.parent))),
            dtype=np.int64,
            count=len(self.parent),
        )
        _, labels = np.unique(roots, return_inverse=True)
        # np.unique sorts by root id; remap to first-appearance order
        order = {}
        out = np.empty_like(labels)
        for pos, lab in enumerate(labels):
            if lab not in order:
                order[lab] = len(order)
            out[pos] = order[lab]
        return out


@dataclass(frozen=True)
class Instance:
    """Weighted graph: ``n`` nodes, an edge list and one real cost per edge."""

    n: int
    edges: np.ndarray
    costs: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        costs = np.asarray(self.costs, dtype=np.float64).reshape(-1)
        if self.n < 1:
            raise ValueError("instance needs at least one node")
        if edges.shape[0] != costs.shape[0]:
            raise ValueError("edge list and cost vector lengths differ")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if not (edges[:, 0] < edges[:, 1]).all():
                raise ValueError("edges must be stored as (i, j) with i < j")
            idx = pair_index(self.n, edges[:, 0], edges[:, 1])
            if len(np.unique(idx)) != len(idx):
                raise ValueError("duplicate edges")
        if not np.isfinite(costs).all():
            raise ValueError("edge costs must be finite")
        object.__setattr__(self, "edges", _frozen_array(edges, np.int64))
        object.__setattr__(self, "costs", _frozen_array(costs, np.float64))

    @property
    def m(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class CompleteInstance:
    """Complete graph with dense per-pair costs in canonical order.

    ``normalized`` records that the absolute costs sum to the number of
    pairs (the all-zero instance is exempt).
    """

    n: int
    costs: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=np.float64).reshape(-1)
        if self.n < 1:
            raise ValueError("instance needs at least one node")
        if costs.shape[0] != pair_count(self.n):
            raise ValueError("cost vector length != n(n-1)/2")
        if not np.isfinite(costs).all():
            raise ValueError("costs must be finite")
        if self.normalized and costs.size:
            total = np.abs(costs).sum()
            if total > 0.0 and abs(total - costs.size) > NORMALIZED_REL_TOL * costs.size:
                raise ValueError("normalized flag set but |costs| do not sum to pair count")
        object.__setattr__(self, "costs", _frozen_array(costs, np.float64))

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    def pairs(self) -> np.ndarray:
        return pairs_of(self.n)

    def cost(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("no cost on a (i, i) pair")
        a, b = (i, j) if i < j else (j, i)
        return float(self.costs[pair_index(self.n, a, b)])

    def dense(self) -> np.ndarray:
        """Mutable symmetric cost matrix with zero diagonal."""
        return condensed_to_matrix(self.costs, self.n)

    def to_instance(self) -> Instance:
        return Instance(self.n, pairs_of(self.n), self.costs)


@dataclass(frozen=True)
class ContractionRecord:
    """Book-keeping for one edge contraction.

    ``node_map`` maps every pre-contraction node index to its index in the
    contracted instance; the removed node maps to the kept node's new index.
    The freed slot is filled by the previously-last node (swap-remove) so
    indices stay contiguous.
    """

    kept: int
    removed: int
    n_before: int
    node_map: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "node_map", _frozen_array(self.node_map, np.int64))

    def map_pair(self, a: int, b: int) -> tuple[int, int] | None:
        """New index pair for an old pair, or None for the contracted pair."""
        ma, mb = int(self.node_map[a]), int(self.node_map[b])
        if ma == mb:
            return None
        return (ma, mb) if ma < mb else (mb, ma)


def _edge_array(inst) -> np.ndarray:
    if isinstance(inst, CompleteInstance):
        return inst.pairs()
    return inst.edges


def _cost_array(inst) -> np.ndarray:
    return inst.costs


def _check_labeling(inst, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (_edge_array(inst).shape[0],):
        raise ValueError("labeling length does not match the edge count")
    if x.size and not ((x == 0) | (x == 1)).all():
        raise ValueError("labeling entries must be 0 or 1")
    return x.astype(np.int8)


def objective(inst, x) -> float:
    """Total cost of the cut edges, sum of c_e * x_e."""
    x = _check_labeling(inst, x)
    return float(np.dot(_cost_array(inst), x))


def is_multicut(inst, x) -> bool:
    """Feasibility via connectivity of the joined subgraph (union-find)."""
    x = _check_labeling(inst, x)
    edges = _edge_array(inst)
    uf = UnionFind(inst.n)
    for (i, j), cut in zip(edges, x):
        if not cut:
            uf.union(int(i), int(j))
    for (i, j), cut in zip(edges, x):
        if cut and uf.find(int(i)) == uf.find(int(j)):
            return False
    return True


def _chordless_cycle_index_lists(inst) -> list[np.ndarray]:
    """Chordless cycles as arrays of edge indices, cached per instance.

    Instances are immutable, so the enumeration result can be stashed on
    the object; this keeps the exponential enumeration to one run per
    graph even when many labelings are checked against it.
    """
    cached = inst.__dict__.get("_chordless_cycle_cache")
    if cached is not None:
        return cached
    import networkx as nx

    edges = _edge_array(inst)
    index = {}
    graph = nx.Graph()
    graph.add_nodes_from(range(inst.n))
    for e, (i, j) in enumerate(edges):
        graph.add_edge(int(i), int(j))
        index[(int(i), int(j))] = e
        index[(int(j), int(i))] = e
    cycles = [
        np.array(
            [index[(cycle[k], cycle[(k + 1) % len(cycle)])] for k in range(len(cycle))],
            dtype=np.int64,
        )
        for cycle in nx.chordless_cycles(graph)
    ]
    object.__setattr__(inst, "_chordless_cycle_cache", cycles)
    return cycles


def check_cycle_inequalities(inst, x) -> bool:
    """Feasibility by explicit chordless-cycle enumeration.

    Exponential; intended as an independent cross-check of
    :func:`is_multicut` on small instances only.
    """
    if inst.n > CYCLE_CHECK_MAX_NODES:
        raise SizeGuardError(
            f"cycle enumeration limited to {CYCLE_CHECK_MAX_NODES} nodes, got {inst.n}"
        )
    x = _check_labeling(inst, x)
    for cycle in _chordless_cycle_index_lists(inst):
        if int(x[cycle].sum()) == 1:
            return False
    return True


def _validate_partition(p, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=np.int64).reshape(-1)
    if p.shape[0] != n:
        raise InvalidPartitionError("partition must assign every node")
    ids = np.unique(p)
    if p.size and (ids.min() != 0 or not np.array_equal(ids, np.arange(len(ids)))):
        raise InvalidPartitionError("cluster ids must be contiguous from 0")
    return p


def partition_to_multicut(inst, p) -> np.ndarray:
    """Edge labeling cutting exactly the edges that straddle clusters."""
    p = _validate_partition(p, inst.n)
    edges = _edge_array(inst)
    # every cluster must induce a connected subgraph
    uf = UnionFind(inst.n)
    for i, j in edges:
        if p[i] == p[j]:
            uf.union(int(i), int(j))
    for cid in range(p.max() + 1 if p.size else 0):
        members = np.flatnonzero(p == cid)
        roots = {uf.find(int(v)) for v in members}
        if len(roots) > 1:
            raise InvalidPartitionError(f"cluster {cid} is disconnected")
    return (p[edges[:, 0]] != p[edges[:, 1]]).astype(np.int8)


def multicut_to_partition(inst, x) -> np.ndarray:
    """Clusters = connected components of the joined subgraph."""
    x = _check_labeling(inst, x)
    if not is_multicut(inst, x):
        raise InfeasibleLabelingError("labeling is not a multicut")
    edges = _edge_array(inst)
    uf = UnionFind(inst.n)
    for (i, j), cut in zip(edges, x):
        if not cut:
            uf.union(int(i), int(j))
    return uf.labels()


def complete(inst: Instance) -> CompleteInstance:
    """Add all missing pairs with cost zero; optimal objective is unchanged."""
    costs = np.zeros(pair_count(inst.n))
    if inst.m:
        idx = pair_index(inst.n, inst.edges[:, 0], inst.edges[:, 1])
        costs[idx] = inst.costs
    return CompleteInstance(inst.n, costs)


def normalize(ci: CompleteInstance) -> CompleteInstance:
    """Scale costs so their absolute values sum to the number of pairs.

    Positive scaling, so the set of optimal labelings is unchanged.  An
    all-zero instance is returned as-is (any labeling is optimal).
    """
    total = float(np.abs(ci.costs).sum())
    if total == 0.0:
        return replace(ci, normalized=True)
    return CompleteInstance(ci.n, ci.costs * (ci.m / total), normalized=True)


def contract(ci: CompleteInstance, i: int, j: int) -> tuple[CompleteInstance, ContractionRecord]:
    """Merge node j into node i, summing the costs of parallel pairs.

    The contracted pair is semantically joined; any labeling of the result
    lifts back (merged pairs inherit their label, the contracted pair gets 0)
    with the same objective.
    """
    n = ci.n
    if i == j:
        raise ValueError("cannot contract a node with itself")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("node index out of range")
    dense = ci.dense()
    others = np.array([k for k in range(n) if k != i and k != j], dtype=np.int64)
    if others.size:
        dense[i, others] += dense[j, others]
        dense[others, i] = dense[i, others]
    # swap-remove: the last node fills j's slot
    order = np.arange(n)
    if j != n - 1:
        order[j] = n - 1
    order = order[: n - 1]
    node_map = np.full(n, -1, dtype=np.int64)
    node_map[order] = np.arange(n - 1)
    node_map[j] = node_map[i]
    new_costs = (
        matrix_to_condensed(dense[np.ix_(order, order)]) if n > 2 else np.zeros(0)
    )
    record = ContractionRecord(kept=i, removed=j, n_before=n, node_map=node_map)
    return CompleteInstance(n - 1, new_costs), record


def lift_labeling(record: ContractionRecord, x_contracted) -> np.ndarray:
    """Labeling of the pre-contraction instance induced by a contracted one."""
    n = record.n_before
    x_contracted = np.asarray(x_contracted).reshape(-1)
    if x_contracted.shape[0] != pair_count(n - 1):
        raise ValueError("labeling length does not match the contracted instance")
    pairs = pairs_of(n)
    ma = record.node_map[pairs[:, 0]]
    mb = record.node_map[pairs[:, 1]]
    lo = np.minimum(ma, mb)
    hi = np.maximum(ma, mb)
    out = np.zeros(pair_count(n), dtype=np.int8)
    keep = lo != hi
    out[keep] = x_contracted[pair_index(n - 1, lo[keep], hi[keep])]
    return out


def partition_labeling(n: int, p) -> np.ndarray:
    """Complete-graph labeling induced by a partition (no connectivity check)."""
    p = np.asarray(p, dtype=np.int64)
    pairs = pairs_of(n)
    return (p[pairs[:, 0]] != p[pairs[:, 1]]).astype(np.int8)
