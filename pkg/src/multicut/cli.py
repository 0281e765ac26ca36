"""Command line interface.

Subcommands: ``gen`` (random instance), ``solve`` (one instance, one
solver), ``train`` (config-driven training), ``bench`` (campaign over a
glob of instances), ``gradcheck`` (finite-difference audit).

Exit codes: 0 ok, 2 parse error, 3 infeasible input / contract violation,
4 time limit hit.  ``MC_SEED`` overrides default seeds.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
from pathlib import Path

import numpy as np

from .errors import (
    InfeasibleLabelingError,
    InvalidPartitionError,
    NotNormalizedError,
    ParseError,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4


def _default_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("MC_SEED")
    return int(env) if env else 0


def _cmd_gen(args) -> int:
    from .bench import generate_random
    from .io import write_instance

    inst = generate_random(args.n, args.lo, args.hi, _default_seed(args.seed))
    write_instance(inst, args.out)
    print(f"wrote {args.out}: n={inst.n} m={inst.m} costs in [{args.lo}, {args.hi}]")
    return EXIT_OK


def _load_model(path: str):
    from .checkpoint import load_checkpoint

    return load_checkpoint(path)


def _cmd_solve(args) -> int:
    from .core import multicut_to_partition
    from .bench import make_solver
    from .io import parse_instance
    from .inference import solve_autoregressive, solve_single_pass

    inst = parse_instance(args.path, args.format, negate=args.negate)
    model = _load_model(args.model) if args.model else None
    trace = None
    if args.solver in ("gnn", "gnn1"):
        if model is None:
            print("solver requires --model PATH", file=sys.stderr)
            return EXIT_PARSE
        if args.solver == "gnn":
            result, trace = solve_autoregressive(model, inst)
        else:
            result, trace = solve_single_pass(model, inst)
    else:
        solver = make_solver(args.solver, time_limit=args.time_limit)
        result = solver(inst)
    clusters = int(multicut_to_partition(inst, result.labeling).max()) + 1
    print(f"solver     : {args.solver}")
    print(f"objective  : {result.value}")
    print(f"clusters   : {clusters}")
    if hasattr(result, "proven_optimal"):
        print(f"optimal    : {'yes' if result.proven_optimal else 'no (time limit)'}")
    if hasattr(result, "wall_time"):
        print(f"wall_time  : {result.wall_time:.6f}s")
    if args.trace:
        if trace is None:
            print("note: --trace is only recorded for gnn/gnn1", file=sys.stderr)
        else:
            trace.to_jsonl(args.trace)
            print(f"trace      : {args.trace}")
    if hasattr(result, "proven_optimal") and not result.proven_optimal:
        return EXIT_TIMEOUT
    return EXIT_OK


def _cmd_train(args) -> int:
    from .checkpoint import load_checkpoint, save_checkpoint
    from .io import model_config_from_pairs, read_config_pairs, train_config_from_pairs
    from .model import TmpModel, count_parameters
    from .training import generate_dataset, train

    pairs = read_config_pairs(args.config)
    env_seed = os.environ.get("MC_SEED")
    model_cfg = model_config_from_pairs(pairs)
    train_cfg = train_config_from_pairs(
        pairs, default_seed=int(env_seed) if env_seed else None
    )
    if args.resume:
        model = load_checkpoint(args.resume)
    else:
        model = TmpModel(model_cfg, seed=train_cfg.seed)
    print(f"model: {model.config} ({count_parameters(model)} parameters)")
    print(f"training: {train_cfg}")
    dataset = generate_dataset(train_cfg)
    print(f"dataset: {len(dataset)} optimally labeled instances")
    out_model = Path(args.out_model)
    ckpt_dir = out_model.with_name(out_model.name + ".ckpts")
    loss_csv = out_model.with_name(out_model.name + ".loss.csv")
    model, curve = train(
        model, dataset, train_cfg, checkpoint_dir=ckpt_dir, loss_csv=loss_csv
    )
    save_checkpoint(model, out_model)
    print(f"final mean loss: {curve[-1][1]:.6f}")
    print(f"model written to {out_model}, loss curve to {loss_csv}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import load_references, make_solver, run_benchmark, summarize
    from .io import parse_instance

    paths = sorted(glob.glob(args.instances))
    if not paths:
        print(f"no instances match {args.instances!r}", file=sys.stderr)
        return EXIT_PARSE
    instances = [(Path(p).stem, parse_instance(p, "edgelist")) for p in paths]
    solvers = {}
    for token in args.solvers.split(","):
        token = token.strip()
        if not token:
            continue
        name, _, model_path = token.partition(":")
        model = _load_model(model_path) if model_path else None
        solvers[name] = make_solver(name, model=model)
    references = load_references(args.ref) if args.ref else None
    records = run_benchmark(
        instances, solvers, out_path=args.out, references=references, parallel=args.parallel
    )
    failures = [r for r in records if r.error]
    print(f"wrote {len(records)} records to {args.out}")
    for row in summarize(records):
        gap = "n/a" if row["mean_gap"] is None else f"{row['mean_gap']:.6f}"
        print(
            f"  {row['solver']:>12}: {row['instances']} instances, "
            f"mean gap {gap}, mean time {row['mean_time']:.6f}s"
        )
    for rec in failures:
        print(f"  failed: {rec.solver} on {rec.instance}: {rec.error}", file=sys.stderr)
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    from .core import CompleteInstance, normalize, pair_count
    from .model import ModelConfig, TmpModel
    from .nn import Linear, LayerNorm, bce_with_logits, gelu, gelu_grad, grad_check

    rng = np.random.default_rng(0)
    failures = []

    def show(block, report):
        for name, err in report.items():
            status = "ok" if err < args.tolerance else "FAIL"
            print(f"  {block}.{name:<12} max rel err {err:.3e}  [{status}]")
            if err >= args.tolerance:
                failures.append(f"{block}.{name}")

    lin = Linear(4, 3, rng)
    x = rng.standard_normal((5, 4))
    ref = rng.standard_normal((5, 3))
    lin.zero_grad()
    out = lin.forward(x)
    lin.backward(ref)
    show(
        "linear",
        grad_check(
            lambda: float((lin.forward(x) * ref).sum()),
            [("weight", lin.weight), ("bias", lin.bias)],
            [("weight", lin.grad_weight), ("bias", lin.grad_bias)],
            rng=rng,
        ),
    )

    theta = rng.standard_normal((3, 4))
    ref = rng.standard_normal((3, 4))
    analytic = gelu_grad(theta) * ref
    show(
        "gelu",
        grad_check(
            lambda: float((gelu(theta) * ref).sum()),
            [("input", theta)],
            [("input", analytic)],
            rng=rng,
        ),
    )

    ln = LayerNorm(6)
    xln = rng.standard_normal((4, 6))
    ref = rng.standard_normal((4, 6))
    ln.zero_grad()
    ln.forward(xln)
    dx = ln.backward(ref)
    show(
        "layer_norm",
        grad_check(
            lambda: float((ln.forward(xln) * ref).sum()),
            [("gain", ln.gain), ("shift", ln.shift), ("input", xln)],
            [("gain", ln.grad_gain), ("shift", ln.grad_shift), ("input", dx)],
            rng=rng,
        ),
    )

    z = rng.standard_normal(12)
    target = rng.integers(0, 2, size=12).astype(float)
    _, dz = bce_with_logits(z, target)
    show(
        "bce_with_logits",
        grad_check(
            lambda: bce_with_logits(z, target)[0],
            [("logits", z)],
            [("logits", dz)],
            rng=rng,
        ),
    )

    model = TmpModel(ModelConfig(layers=2, width=4), seed=1)
    ci = normalize(CompleteInstance(5, rng.standard_normal(pair_count(5))))
    tgt = rng.integers(0, 2, size=ci.m).astype(float)
    model.zero_grads()
    logits = model.forward(ci, keep_cache=True)
    _, dz = bce_with_logits(logits, tgt)
    model.backward(dz, ci.n)
    show(
        "model[2x4,n=5]",
        grad_check(
            lambda: bce_with_logits(model.forward(ci), tgt)[0],
            model.parameters(),
            model.grads(),
            rng=rng,
        ),
    )

    if failures:
        print(f"FAILED: {len(failures)} blocks above tolerance {args.tolerance}")
        return 1
    print(f"all gradient checks below tolerance {args.tolerance}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random complete instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("--in", dest="path", required=True)
    p.add_argument("--format", choices=("edgelist", "lt"), default="edgelist")
    p.add_argument("--negate", action="store_true")
    p.add_argument(
        "--solver",
        required=True,
        choices=("gaec", "gf", "mws", "klj", "bruteforce", "bnb", "gnn", "gnn1"),
    )
    p.add_argument("--model", default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--resume", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("bench", help="run a benchmark campaign")
    p.add_argument("--instances", required=True, help="glob of edgelist files")
    p.add_argument("--solvers", required=True, help="comma list, gnn as gnn:MODEL")
    p.add_argument("--ref", default=None, help="CSV name,value,optimal")
    p.add_argument("--out", required=True)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleLabelingError, InvalidPartitionError, NotNormalizedError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
