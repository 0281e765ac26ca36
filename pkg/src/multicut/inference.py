"""Contraction-based inference: autoregressive and single-pass solving.

The autoregressive loop alternates a model evaluation with one edge
contraction (the pair with the largest positive logit) until every logit
is non-positive; remaining inter-cluster pairs form the multicut.  The
single-pass variant evaluates the model once and then runs the greedy
additive contraction loop on the logits themselves, which coincides with
GAEC when the logits are the costs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CompleteInstance,
    Instance,
    UnionFind,
    complete,
    matrix_to_condensed,
    normalize,
    objective,
)
from .heuristics import HeuristicResult, greedy_additive_contraction


@dataclass(frozen=True)
class TraceRecord:
    pass_index: int
    edge: tuple[int, int]  # smallest original labels of the merged clusters
    logit: float
    objective: float  # objective of the partition reached after this step


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)
    labeling: np.ndarray | None = None
    value: float = 0.0

    def to_jsonl(self, path):
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(
                    json.dumps(
                        {
                            "pass": rec.pass_index,
                            "edge": list(rec.edge),
                            "logit": rec.logit,
                            "objective": rec.objective,
                        }
                    )
                    + "\n"
                )


class IdentityLogits:
    """Stub model whose logits are exactly the input costs."""

    def forward(self, ci: CompleteInstance, keep_cache=False, require_normalized=True):
        return ci.costs.copy()


def _labeling_from_uf(inst: Instance, uf: UnionFind) -> np.ndarray:
    roots = np.fromiter((uf.find(v) for v in range(inst.n)), dtype=np.int64, count=inst.n)
    return (roots[inst.edges[:, 0]] != roots[inst.edges[:, 1]]).astype(np.int8)


def _argmax_pair(values: np.ndarray, reps: np.ndarray) -> tuple[int, int, float]:
    """Largest entry of a symmetric matrix; ties to smallest original labels."""
    m = values.shape[0]
    iu, ju = np.triu_indices(m, 1)
    vals = values[iu, ju]
    best = vals.max()
    cand = np.flatnonzero(vals == best)
    ci, cj = iu[cand], ju[cand]
    lo = np.minimum(reps[ci], reps[cj])
    hi = np.maximum(reps[ci], reps[cj])
    pick = np.lexsort((hi, lo))[0]
    return int(ci[pick]), int(cj[pick]), float(best)


def solve_autoregressive(
    model,
    inst: Instance,
    *,
    renormalize_each_pass: bool = True,
    contractions_per_pass: int = 1,
) -> tuple[HeuristicResult, SolveTrace]:
    """Alternate model evaluation and argmax-logit contraction.

    Costs are completed once; by default they are re-normalized before
    every model pass so the model always sees the training distribution.
    Stops when the largest logit is no longer strictly positive.  At most
    n - 1 contractions happen, so with one contraction per pass the total
    work is one model pass per surviving node.
    """
    t0 = time.perf_counter()
    ci = complete(inst)
    weights = ci.dense()  # original completed costs, contracted additively
    reps = np.arange(inst.n, dtype=np.int64)  # min original label per cluster
    uf = UnionFind(inst.n)
    obj_now = float(inst.costs.sum())  # all-singleton objective
    trace = SolveTrace()
    pass_index = 0
    normalized_once = False
    while weights.shape[0] >= 2:
        m = weights.shape[0]
        current = CompleteInstance(m, matrix_to_condensed(weights))
        if renormalize_each_pass or not normalized_once:
            current = normalize(current)
            normalized_once = True
        logits = model.forward(current, require_normalized=renormalize_each_pass)
        zmat = np.zeros((m, m))
        iu, ju = np.triu_indices(m, 1)
        zmat[iu, ju] = logits
        zmat[ju, iu] = logits
        advanced = False
        for _ in range(max(1, contractions_per_pass)):
            if weights.shape[0] < 2:
                break
            a, b, z = _argmax_pair(zmat, reps)
            if z <= 0.0:
                break
            obj_now -= weights[a, b]
            uf.union(int(reps[a]), int(reps[b]))
            lo, hi = sorted((int(reps[a]), int(reps[b])))
            trace.records.append(TraceRecord(pass_index, (lo, hi), z, obj_now))
            # merge b into a (swap-remove with the last row/column)
            keep = np.arange(weights.shape[0])
            keep[b] = weights.shape[0] - 1
            keep = keep[:-1]
            weights[a, :] += weights[b, :]
            weights[:, a] = weights[a, :]
            zmat[a, :] += zmat[b, :]  # additive within-pass merge
            zmat[:, a] = zmat[a, :]
            reps[a] = min(reps[a], reps[b])
            weights = weights[np.ix_(keep, keep)]
            np.fill_diagonal(weights, 0.0)
            zmat = zmat[np.ix_(keep, keep)]
            np.fill_diagonal(zmat, 0.0)
            reps = reps[keep]
            advanced = True
        pass_index += 1
        if not advanced:
            break
    labeling = _labeling_from_uf(inst, uf)
    value = objective(inst, labeling)
    result = HeuristicResult(
        labeling=labeling,
        value=value,
        iterations=len(trace.records),
        wall_time=time.perf_counter() - t0,
    )
    trace.labeling = labeling
    trace.value = value
    return result, trace


def solve_single_pass(model, inst: Instance) -> tuple[HeuristicResult, SolveTrace]:
    """One model pass, then greedy additive contraction on the logits.

    Logit matrices of merged clusters are summed, and contraction stops
    when no positive logit remains; with identity logits this is exactly
    GAEC under the shared tie-break.
    """
    t0 = time.perf_counter()
    ci = normalize(complete(inst))
    logits = model.forward(ci)
    n = inst.n
    zmat = np.zeros((n, n))
    if n >= 2:
        iu, ju = np.triu_indices(n, 1)
        zmat[iu, ju] = logits
        zmat[ju, iu] = logits
    weights = complete(inst).dense()
    labels, seq = greedy_additive_contraction(zmat, aux=weights)
    uf = UnionFind(n)
    obj_now = float(inst.costs.sum())
    trace = SolveTrace()
    for i, j, z, between in seq:
        uf.union(i, j)
        obj_now -= between
        trace.records.append(TraceRecord(0, (i, j), z, obj_now))
    labeling = _labeling_from_uf(inst, uf)
    value = objective(inst, labeling)
    trace.labeling = labeling
    trace.value = value
    return (
        HeuristicResult(
            labeling=labeling,
            value=value,
            iterations=len(seq),
            wall_time=time.perf_counter() - t0,
        ),
        trace,
    )
