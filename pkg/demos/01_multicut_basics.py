"""Tour of the core objects: instances, labelings, partitions, contractions.

A multicut of a weighted graph is the set of edges straddling the clusters
of some node partition; minimizing the total cost of the cut edges is the
optimization problem this package solves.  This script walks through the
elementary operations on a small 7-node instance whose optimal value (-6)
is known from exhaustive enumeration.
"""

import numpy as np

from multicut import (
    CompleteInstance,
    Instance,
    check_cycle_inequalities,
    complete,
    contract,
    is_multicut,
    multicut_to_partition,
    normalize,
    objective,
    partition_to_multicut,
)

inst = Instance(
    7,
    [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (3, 4), (4, 6), (5, 6), (4, 5), (1, 5)],
    [-1, -4, 3, -5, 1, 2, -1, 2, 4, 2],
)
print(f"instance: {inst.n} nodes, {inst.m} edges, total cost {inst.costs.sum():+g}")

# A partition induces a labeling: 1 = cut, 0 = joined.
clusters = np.array([0, 1, 1, 1, 2, 2, 2])
x = partition_to_multicut(inst, clusters)
print("\nclusters {0} | {1,2,3} | {4,5,6} cut the edges:")
print("  ", [tuple(e) for e, b in zip(inst.edges.tolist(), x) if b])
print("objective:", objective(inst, x))

# Feasibility: cutting a single edge of a triangle is impossible.
k3 = Instance(3, [(0, 1), (0, 2), (1, 2)], [1.0, 1.0, 1.0])
print("\ntriangle, one edge cut:")
print("  component criterion:", is_multicut(k3, [1, 0, 0]))
print("  cycle-inequality enumeration:", check_cycle_inequalities(k3, [1, 0, 0]))

# Mapping a feasible labeling back to clusters recovers the partition.
recovered = multicut_to_partition(inst, x)
print("\nrecovered clusters:", recovered.tolist())

# Completion adds every missing pair with cost zero; the optimum and its
# optimal labelings are untouched.
ci = complete(inst)
print(f"\ncompleted graph: {ci.m} pairs, {int((ci.costs == 0).sum())} of them zero-cost")

# Normalization rescales so the absolute costs sum to the pair count;
# a positive scaling never changes which labelings are optimal.
cn = normalize(ci)
print(f"normalized: sum |c| = {np.abs(cn.costs).sum():.6f} over {cn.m} pairs")
print(f"scale factor applied: {cn.costs[0] / ci.costs[0]:.6f}")

# Contracting a pair merges two nodes and sums parallel costs.
small = CompleteInstance(3, [5.0, -2.0, 3.0])
merged, record = contract(small, 0, 1)
print("\ncontract (0,1) in a triangle with costs (5, -2, 3):")
print(f"  result has {merged.n} nodes, cost {merged.costs[0]:+g}   (= -2 + 3)")
print(f"  record: kept {record.kept}, removed {record.removed}")
