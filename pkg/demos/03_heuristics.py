"""The classical baselines: greedy contraction, fixation, watershed, local search.

All four operate on the completed graph and always return feasible
labelings.  On random instances they are compared here against the exact
optimum; greedy additive contraction (the strongest single pass) is the
default initializer for the Kernighan-Lin local search with joins.
"""

import numpy as np

from multicut import (
    CompleteInstance,
    brute_force,
    complete,
    gaec,
    generate_random,
    greedy_fixation,
    kernighan_lin_joins,
    mutex_watershed,
)

# How the merge rule matters: after contracting the strongly attractive
# pair, the additive rule sees -5 + 4 = -1 and stops; the max rule sees
# +4 and keeps merging.
ci = CompleteInstance(3, [10.0, -5.0, 4.0])
print("triangle costs (10, -5, 4):")
print("  additive merge (gaec):  value", gaec(ci).value,
      "clusters", 2 if gaec(ci).labeling.any() else 1)
print("  max merge (watershed):  value", mutex_watershed(ci).value,
      "clusters", 2 if mutex_watershed(ci).labeling.any() else 1)

# Greedy fixation processes pairs by absolute cost and pins strongly
# repulsive pairs apart before anything can merge them.
ci = CompleteInstance(3, [-10.0, 6.0, 5.0])
res = greedy_fixation(ci)
print("\ntriangle costs (-10, 6, 5): fixation value", res.value,
      "(optimum:", brute_force(ci).value, ")")

solvers = {
    "gaec": lambda c: gaec(c),
    "greedy fixation": lambda c: greedy_fixation(c),
    "mutex watershed": lambda c: mutex_watershed(c),
    "KL with joins": lambda c: kernighan_lin_joins(c),
}

print("\nmean value over 50 random 12-node instances (costs in [-5, 5]):")
values = {name: [] for name in solvers}
optima = []
for seed in range(50):
    inst = generate_random(12, -5, 5, seed=seed)
    ci = complete(inst)
    optima.append(brute_force(inst).value)
    for name, solver in solvers.items():
        values[name].append(solver(ci).value)
print(f"  {'optimum':>16}: {np.mean(optima):8.2f}")
for name, vals in values.items():
    hits = sum(1 for v, o in zip(vals, optima) if abs(v - o) < 1e-9)
    print(f"  {name:>16}: {np.mean(vals):8.2f}   optimal on {hits}/50")
