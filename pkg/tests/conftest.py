import itertools

import numpy as np
import pytest

from multicut.core import Instance, pair_count, pairs_of

# 7-node worked example; its optimum was verified by exhaustive enumeration:
# value -6, cut set {(0,1),(0,2),(1,4),(1,5),(3,4)}, clusters {0},{1,2,3},{4,5,6}.
WORKED_EDGES = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (3, 4), (4, 6), (5, 6), (4, 5), (1, 5)]
WORKED_COSTS = [-1.0, -4.0, 3.0, -5.0, 1.0, 2.0, -1.0, 2.0, 4.0, 2.0]
WORKED_OPTIMUM = -6.0
WORKED_CUT_SET = {(0, 1), (0, 2), (1, 4), (1, 5), (3, 4)}


@pytest.fixture
def worked_example() -> Instance:
    return Instance(7, WORKED_EDGES, WORKED_COSTS)


def random_sparse_instance(rng, n_lo=2, n_hi=8, keep=0.6, integer=False) -> Instance:
    n = int(rng.integers(n_lo, n_hi + 1))
    pairs = pairs_of(n)
    mask = rng.random(len(pairs)) < keep
    edges = pairs[mask]
    if integer:
        costs = rng.integers(-5, 6, size=mask.sum()).astype(float)
    else:
        costs = rng.normal(size=mask.sum())
    return Instance(n, edges, costs)


def random_complete_instance(rng, n, lo=-5, hi=5) -> Instance:
    costs = rng.integers(lo, hi, endpoint=True, size=pair_count(n)).astype(float)
    return Instance(n, pairs_of(n), costs)


def iter_partitions(n):
    """All set partitions of range(n), independent of the library code."""
    if n == 0:
        yield []
        return
    for smaller in iter_partitions(n - 1):
        node = n - 1
        for k in range(len(smaller)):
            yield smaller[:k] + [smaller[k] + [node]] + smaller[k + 1 :]
        yield smaller + [[node]]


def min_cost_by_enumeration(inst: Instance) -> float:
    """Tiny independent optimum: best over all partitions."""
    best = np.inf
    for part in iter_partitions(inst.n):
        label = np.empty(inst.n, dtype=int)
        for cid, cluster in enumerate(part):
            label[cluster] = cid
        value = float(
            np.dot(inst.costs, label[inst.edges[:, 0]] != label[inst.edges[:, 1]])
        )
        best = min(best, value)
    return best


def all_graphs(n):
    """Every edge subset of the complete graph on n labeled nodes."""
    pairs = [tuple(p) for p in pairs_of(n)]
    for r in range(len(pairs) + 1):
        for chosen in itertools.combinations(range(len(pairs)), r):
            yield np.array([pairs[c] for c in chosen], dtype=np.int64).reshape(-1, 2)
