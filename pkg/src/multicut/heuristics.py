"""Classical multicut heuristics on complete instances.

All solvers here are contraction- or move-based and therefore always
return feasible labelings.  Ties are broken on the lexicographically
smallest pair of original node labels (a cluster is identified by the
smallest label it contains), which makes every run reproducible.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    CompleteInstance,
    UnionFind,
    objective,
    pairs_of,
)
from .errors import InvalidPartitionError

# committed local-search moves must improve by more than this
_KL_EPS = 0.0


@dataclass(frozen=True)
class HeuristicResult:
    labeling: np.ndarray
    value: float
    iterations: int
    wall_time: float


def _labels_from_parent(parent: np.ndarray) -> np.ndarray:
    n = len(parent)
    uf = UnionFind(n)
    for v in range(n):
        if parent[v] != v:
            uf.union(int(parent[v]), int(v))
    return uf.labels()


def _result(ci: CompleteInstance, labels: np.ndarray, iterations: int, t0: float) -> HeuristicResult:
    pairs = pairs_of(ci.n)
    labeling = (labels[pairs[:, 0]] != labels[pairs[:, 1]]).astype(np.int8)
    return HeuristicResult(
        labeling=labeling,
        value=objective(ci, labeling),
        iterations=iterations,
        wall_time=time.perf_counter() - t0,
    )


def greedy_additive_contraction(weights: np.ndarray, aux: np.ndarray | None = None):
    """Contract the largest positive entry until none remains.

    ``weights`` is a symmetric matrix over current clusters (diagonal
    ignored); merged rows are summed.  ``aux``, when given, is a second
    matrix merged additively alongside (used to track original costs when
    ``weights`` holds model logits).

    Returns contiguous cluster labels and the contraction sequence as
    ``(i, j, weight, aux_between)`` tuples with i < j the smallest labels
    of the merged clusters.
    """
    n = weights.shape[0]
    w = weights.astype(np.float64, copy=True)
    aux = None if aux is None else aux.astype(np.float64, copy=True)
    alive = np.ones(n, dtype=bool)
    version = np.zeros(n, dtype=np.int64)
    parent = np.arange(n, dtype=np.int64)
    heap = []
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] > 0.0:
                heap.append((-w[i, j], i, j, 0, 0))
    heapq.heapify(heap)
    seq = []
    while heap:
        negw, i, j, vi, vj = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or version[i] != vi or version[j] != vj:
            continue
        seq.append((i, j, -negw, 0.0 if aux is None else float(aux[i, j])))
        others = np.flatnonzero(alive)
        others = others[(others != i) & (others != j)]
        w[i, others] += w[j, others]
        w[others, i] = w[i, others]
        if aux is not None:
            aux[i, others] += aux[j, others]
            aux[others, i] = aux[i, others]
        alive[j] = False
        parent[j] = i
        version[i] += 1
        for k in others:
            if w[i, k] > 0.0:
                a, b = (i, k) if i < k else (k, i)
                heapq.heappush(heap, (-w[i, k], a, b, int(version[a]), int(version[b])))
    return _labels_from_parent(parent), seq


def gaec(ci: CompleteInstance) -> HeuristicResult:
    """Greedy additive edge contraction: merge the best positive pair."""
    t0 = time.perf_counter()
    labels, seq = greedy_additive_contraction(ci.dense())
    return _result(ci, labels, len(seq), t0)


def _fixation_loop(ci: CompleteInstance, merge_max: bool) -> tuple[np.ndarray, int]:
    """Process pairs by decreasing |cost|: contract positives, mutex negatives.

    A positive pair between mutexed clusters is fixed cut instead of
    contracted.  Stops when only zero costs remain unprocessed.
    """
    n = ci.n
    w = ci.dense()
    alive = np.ones(n, dtype=bool)
    version = np.zeros(n, dtype=np.int64)
    parent = np.arange(n, dtype=np.int64)
    mutex: dict[int, set[int]] = {i: set() for i in range(n)}
    heap = []
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] != 0.0:
                heap.append((-abs(w[i, j]), i, j, 0, 0, w[i, j]))
    heapq.heapify(heap)
    contractions = 0
    while heap:
        _, i, j, vi, vj, value = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or version[i] != vi or version[j] != vj:
            continue
        if value > 0.0:
            if j in mutex[i]:
                continue  # fixed cut
            assert i not in mutex[j]
            others = np.flatnonzero(alive)
            others = others[(others != i) & (others != j)]
            if merge_max:
                w[i, others] = np.maximum(w[i, others], w[j, others])
            else:
                w[i, others] += w[j, others]
            w[others, i] = w[i, others]
            alive[j] = False
            parent[j] = i
            version[i] += 1
            contractions += 1
            for r in mutex[j]:
                mutex[r].discard(j)
                mutex[r].add(i)
                mutex[i].add(r)
            mutex[j] = set()
            for k in others:
                if w[i, k] != 0.0:
                    a, b = (i, k) if i < k else (k, i)
                    heapq.heappush(
                        heap, (-abs(w[i, k]), a, b, int(version[a]), int(version[b]), w[i, k])
                    )
        elif value < 0.0:
            mutex[i].add(j)
            mutex[j].add(i)
    return _labels_from_parent(parent), contractions


def greedy_fixation(ci: CompleteInstance) -> HeuristicResult:
    """Greedy edge fixation: additive merges, repulsive mutex constraints."""
    t0 = time.perf_counter()
    labels, contractions = _fixation_loop(ci, merge_max=False)
    return _result(ci, labels, contractions, t0)


def mutex_watershed(ci: CompleteInstance) -> HeuristicResult:
    """Mutex watershed: like greedy fixation but merged costs take the max."""
    t0 = time.perf_counter()
    labels, contractions = _fixation_loop(ci, merge_max=True)
    return _result(ci, labels, contractions, t0)


def _cluster_members(labels: np.ndarray) -> dict[int, list[int]]:
    members: dict[int, list[int]] = {}
    for v, c in enumerate(labels):
        members.setdefault(int(c), []).append(v)
    return members


def _kl_sequence(w: np.ndarray, labels: np.ndarray, a: int, b: int):
    """Kernighan-Lin gain sequence of single-node moves between clusters a, b.

    Tentatively relocates every node of the two clusters once (best move
    first, moved nodes locked) and returns the move list with cumulative
    objective deltas.
    """
    nodes = [v for v in range(len(labels)) if labels[v] in (a, b)]
    side = {v: int(labels[v]) for v in nodes}
    moves = []
    cums = []
    cum = 0.0
    unlocked = set(nodes)
    while unlocked:
        best = None
        for v in sorted(unlocked):
            own = [u for u in nodes if u != v and side[u] == side[v]]
            other_side = a if side[v] == b else b
            other = [u for u in nodes if side[u] == other_side]
            delta = w[v, own].sum() - w[v, other].sum()
            if best is None or delta < best[0]:
                best = (delta, v)
        delta, v = best
        side[v] = a if side[v] == b else b
        unlocked.discard(v)
        cum += delta
        moves.append(v)
        cums.append(cum)
    return moves, cums


def kernighan_lin_joins(
    ci: CompleteInstance, init: np.ndarray | None = None
) -> HeuristicResult:
    """Local search over partitions with node moves and cluster joins.

    For every cluster pair (plus each cluster against a fresh empty one)
    the best strictly-improving prefix of a Kernighan-Lin move sequence is
    applied; joining the two clusters is tested as well.  Sweeps repeat
    until no change improves the objective, which therefore never
    increases.  This is one member of the KL-with-joins family; the exact
    move repertoire of other implementations varies (see README).
    """
    t0 = time.perf_counter()
    n = ci.n
    w = ci.dense()
    if init is None:
        labels = np.asarray(gaec(ci).labeling, dtype=np.int8)
        pairs = pairs_of(n)
        uf = UnionFind(n)
        for (i, j), cut in zip(pairs, labels):
            if not cut:
                uf.union(int(i), int(j))
        labels = uf.labels()
    else:
        labels = np.asarray(init, dtype=np.int64).reshape(-1)
        if labels.shape[0] != n:
            raise InvalidPartitionError("init partition must assign every node")
        ids = np.unique(labels)
        if ids.min() != 0 or not np.array_equal(ids, np.arange(len(ids))):
            raise InvalidPartitionError("init cluster ids must be contiguous from 0")
    labels = labels.astype(np.int64)

    def obj(lab: np.ndarray) -> float:
        pairs = pairs_of(n)
        return float(np.dot(ci.costs, lab[pairs[:, 0]] != lab[pairs[:, 1]]))

    current = obj(labels)
    commits = 0
    improved = True
    while improved:
        improved = False
        cluster_ids = sorted(_cluster_members(labels))
        fresh = (max(cluster_ids) if cluster_ids else -1) + 1
        targets = [(a, b) for ai, a in enumerate(cluster_ids) for b in cluster_ids[ai + 1 :]]
        targets += [(a, fresh) for a in cluster_ids]
        for a, b in targets:
            if not np.any(labels == a) or (b != fresh and not np.any(labels == b)):
                continue
            # join move (real cluster pairs only)
            if b != fresh:
                in_a = labels == a
                in_b = labels == b
                delta = -float(w[np.ix_(np.flatnonzero(in_a), np.flatnonzero(in_b))].sum())
                if delta < -_KL_EPS:
                    candidate = labels.copy()
                    candidate[in_b] = a
                    cand_obj = obj(candidate)
                    if cand_obj < current:
                        labels, current = candidate, cand_obj
                        commits += 1
                        improved = True
                        continue
            moves, cums = _kl_sequence(w, labels, a, b)
            if not moves:
                continue
            k_best = int(np.argmin(cums))
            if cums[k_best] < -_KL_EPS:
                candidate = labels.copy()
                for v in moves[: k_best + 1]:
                    candidate[v] = b if candidate[v] == a else a
                cand_obj = obj(candidate)
                if cand_obj < current:
                    labels, current = candidate, cand_obj
                    commits += 1
                    improved = True
        # drop emptied ids, keep labels contiguous
        _, labels = np.unique(labels, return_inverse=True)
    return _result(ci, labels.astype(np.int64), commits, t0)
