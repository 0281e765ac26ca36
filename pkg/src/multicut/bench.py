"""Random evaluation instances, optimality gaps, and benchmark campaigns."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Instance, complete, pair_count, pairs_of
from .errors import UndefinedGapError

SOLVER_NAMES = ("gaec", "gf", "mws", "klj", "bruteforce", "bnb", "gnn", "gnn1")


def generate_random(n: int, cost_lo: int, cost_hi: int, seed: int) -> Instance:
    """Complete instance with i.i.d. uniform integer costs in [lo, hi]."""
    if n < 2:
        raise ValueError("need at least two nodes")
    if int(cost_lo) != cost_lo or int(cost_hi) != cost_hi:
        raise ValueError("cost bounds must be integers")
    if cost_lo > cost_hi:
        raise ValueError("empty cost range")
    rng = np.random.default_rng(seed)
    costs = rng.integers(int(cost_lo), int(cost_hi), endpoint=True, size=pair_count(n))
    return Instance(n, pairs_of(n), costs.astype(np.float64))


def optimality_gap(value: float, reference: float) -> float:
    """(value - reference) / |reference|; non-negative for true optima."""
    if reference == 0.0:
        raise UndefinedGapError("reference objective is zero, gap undefined")
    return (value - reference) / abs(reference)


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    solver: str
    objective: float
    reference: float | None
    ref_is_optimal: bool
    gap: float | None  # only set when the reference is a nonzero optimum
    wall_time: float
    seed: int | None = None
    error: str = ""


def make_solver(name: str, *, model=None, time_limit: float | None = None):
    """Callable Instance -> result object with .value and .labeling."""
    from . import exact, heuristics
    from .inference import solve_autoregressive, solve_single_pass

    if name == "gaec":
        return lambda inst: heuristics.gaec(complete(inst))
    if name == "gf":
        return lambda inst: heuristics.greedy_fixation(complete(inst))
    if name == "mws":
        return lambda inst: heuristics.mutex_watershed(complete(inst))
    if name == "klj":
        return lambda inst: heuristics.kernighan_lin_joins(complete(inst))
    if name == "bruteforce":
        return exact.brute_force
    if name == "bnb":
        return lambda inst: exact.branch_and_bound(complete(inst), time_limit)
    if name == "gnn":
        if model is None:
            raise ValueError("gnn solver needs a model")
        return lambda inst: solve_autoregressive(model, inst)[0]
    if name == "gnn1":
        if model is None:
            raise ValueError("gnn1 solver needs a model")
        return lambda inst: solve_single_pass(model, inst)[0]
    raise ValueError(f"unknown solver {name!r}")


def _record(name, solver_name, inst, fn, reference, seed) -> BenchRecord:
    ref_value, ref_optimal = (None, False) if reference is None else reference
    start = time.perf_counter()
    try:
        result = fn(inst)
    except Exception as exc:  # a failing solver must not kill the campaign
        return BenchRecord(
            instance=name,
            solver=solver_name,
            objective=math.nan,
            reference=ref_value,
            ref_is_optimal=ref_optimal,
            gap=None,
            wall_time=time.perf_counter() - start,
            seed=seed,
            error=f"{type(exc).__name__}: {exc}",
        )
    elapsed = time.perf_counter() - start
    gap = None
    if ref_value is not None and ref_optimal and ref_value != 0.0:
        gap = optimality_gap(result.value, ref_value)
    return BenchRecord(
        instance=name,
        solver=solver_name,
        objective=float(result.value),
        reference=ref_value,
        ref_is_optimal=ref_optimal,
        gap=gap,
        wall_time=elapsed,
        seed=seed,
    )


def run_benchmark(
    instances,
    solvers: dict,
    out_path=None,
    references: dict | None = None,
    parallel: bool = False,
    seeds: dict | None = None,
) -> list[BenchRecord]:
    """Solve every instance with every solver, timing the solve call only.

    ``instances`` is a list of (name, Instance); ``solvers`` maps solver
    names to callables; ``references`` maps instance names to (value,
    is_optimal).  Records are written to ``out_path`` (CSV) together with
    a per-solver summary; gap statistics skip records without a known
    nonzero optimum.  With ``parallel`` the instances of each solver run
    in a thread pool; timing still wraps the solve call only, but
    contention can inflate wall times, so the sequential default is the
    mode meant for runtime comparisons.
    """
    references = references or {}
    seeds = seeds or {}
    tasks = [
        (name, inst, solver_name, fn, references.get(name), seeds.get(name))
        for solver_name, fn in solvers.items()
        for name, inst in instances
    ]
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            records = list(
                pool.map(lambda t: _record(t[0], t[2], t[1], t[3], t[4], t[5]), tasks)
            )
    else:
        records = [_record(t[0], t[2], t[1], t[3], t[4], t[5]) for t in tasks]
    if out_path is not None:
        write_benchmark_csv(records, out_path)
        write_summary_csv(records, Path(str(out_path) + ".summary.csv"))
    return records


_CSV_FIELDS = (
    "instance", "solver", "objective", "reference", "ref_is_optimal",
    "gap", "wall_time", "seed", "error",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_benchmark_csv(records: list[BenchRecord], path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, f)) for f in _CSV_FIELDS])


def read_benchmark_csv(path) -> list[BenchRecord]:
    """Inverse of :func:`write_benchmark_csv`; round-trips exactly."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(
                BenchRecord(
                    instance=row["instance"],
                    solver=row["solver"],
                    objective=float(row["objective"]),
                    reference=float(row["reference"]) if row["reference"] else None,
                    ref_is_optimal=row["ref_is_optimal"] == "1",
                    gap=float(row["gap"]) if row["gap"] else None,
                    wall_time=float(row["wall_time"]),
                    seed=int(row["seed"]) if row["seed"] else None,
                    error=row["error"],
                )
            )
    return records


def summarize(records: list[BenchRecord]) -> list[dict]:
    """Per-solver means and quartiles of gaps and runtimes."""
    out = []
    solvers = sorted({r.solver for r in records})
    for solver in solvers:
        rows = [r for r in records if r.solver == solver and not r.error]
        gaps = np.array([r.gap for r in rows if r.gap is not None])
        times = np.array([r.wall_time for r in rows])
        entry = {
            "solver": solver,
            "instances": len(rows),
            "with_optimum": int(gaps.size),
            "mean_gap": float(gaps.mean()) if gaps.size else None,
            "q25_gap": float(np.quantile(gaps, 0.25)) if gaps.size else None,
            "median_gap": float(np.quantile(gaps, 0.5)) if gaps.size else None,
            "q75_gap": float(np.quantile(gaps, 0.75)) if gaps.size else None,
            "mean_time": float(times.mean()) if times.size else None,
            "q25_time": float(np.quantile(times, 0.25)) if times.size else None,
            "median_time": float(np.quantile(times, 0.5)) if times.size else None,
            "q75_time": float(np.quantile(times, 0.75)) if times.size else None,
        }
        out.append(entry)
    return out


def write_summary_csv(records: list[BenchRecord], path):
    rows = summarize(records)
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def load_references(path) -> dict[str, tuple[float, bool]]:
    """Reference objectives: CSV with columns name, value, optimal."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out[row["name"]] = (float(row["value"]), row["optimal"].strip() in ("1", "true", "yes"))
    return out
