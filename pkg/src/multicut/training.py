"""Synthetic dataset generation, contraction augmentation, training loop.

Training samples are complete instances with cost-normalized weights and a
certified optimal labeling (1 = cut).  The model is trained to score pairs
for *joining*, so the cross-entropy targets are the complements of the cut
indicators: a positive logit proposes a contraction.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    CompleteInstance,
    complete,
    contract,
    normalize,
    pair_count,
    pair_index,
    pairs_of,
)
from .errors import TrainingDiverged
from .exact import BRUTE_FORCE_MAX_NODES, branch_and_bound, brute_force
from .nn import AdamState, adam_step, bce_with_logits, cosine_lr

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainSample:
    """Normalized complete instance with its optimal cut labeling."""

    instance: CompleteInstance
    target: np.ndarray
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrainConfig:
    """Dataset and optimization settings.

    The defaults are the desk-scale setup (exact labels from enumeration);
    larger grids go through the same fields.
    """

    sizes: tuple = (6, 8, 10, 12)
    cost_ranges: tuple = ((-1, 1), (-5, 5), (-100, 100))
    instances_per_cell: int = 500
    epochs: int = 500
    lr_max: float = 1e-4
    lr_min: float = 1e-6
    batch_size: int = 1
    seed: int = 0
    augment: bool = True
    checkpoint_every: int = 50
    exact_time_limit: float = 10.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("need at least one epoch")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        for lo, hi in self.cost_ranges:
            if lo > hi:
                raise ValueError("empty cost range")


def generate_dataset(cfg: TrainConfig) -> list[TrainSample]:
    """One optimally-labeled sample per (size, range, index) cell entry.

    Pure function of the config: per-sample seeds are split off the config
    seed, so regeneration (also in parallel) yields identical data.
    Instances whose exact solve times out are skipped and logged.
    """
    from .bench import generate_random

    total = len(cfg.sizes) * len(cfg.cost_ranges) * cfg.instances_per_cell
    seeds = np.random.SeedSequence(cfg.seed).generate_state(max(total, 1))
    samples = []
    pos = 0
    for n in cfg.sizes:
        for lo, hi in cfg.cost_ranges:
            for _ in range(cfg.instances_per_cell):
                seed = int(seeds[pos])
                pos += 1
                inst = generate_random(n, lo, hi, seed)
                ci = complete(inst)
                if n <= BRUTE_FORCE_MAX_NODES:
                    res = brute_force(inst)
                else:
                    res = branch_and_bound(ci, cfg.exact_time_limit)
                    if not res.proven_optimal:
                        log.warning(
                            "skipping sample (n=%d seed=%d): exact solve timed out", n, seed
                        )
                        continue
                samples.append(
                    TrainSample(
                        instance=normalize(ci),
                        target=np.asarray(res.labeling, dtype=np.int8),
                        provenance={
                            "seed": seed,
                            "n": int(n),
                            "cost_range": (int(lo), int(hi)),
                            "augmentation_depth": 0,
                        },
                    )
                )
    return samples


def augment_by_contraction(sample: TrainSample, rng: np.random.Generator) -> TrainSample:
    """Contract a uniformly chosen joined pair of the optimal solution.

    Both merged pairs carry equal labels when the contracted pair is
    joined in an optimum, so the contracted labeling is well-defined and
    remains optimal for the contracted instance.  Returns the sample
    unchanged when nothing is joined.
    """
    joined = np.flatnonzero(sample.target == 0)
    if joined.size == 0:
        return sample
    n = sample.instance.n
    pick = int(joined[rng.integers(joined.size)])
    pairs = pairs_of(n)
    i, j = int(pairs[pick, 0]), int(pairs[pick, 1])
    contracted, record = contract(sample.instance, i, j)
    lo = np.minimum(record.node_map[pairs[:, 0]], record.node_map[pairs[:, 1]])
    hi = np.maximum(record.node_map[pairs[:, 0]], record.node_map[pairs[:, 1]])
    survives = lo != hi
    new_idx = pair_index(n - 1, lo[survives], hi[survives])
    new_target = np.full(pair_count(n - 1), -1, dtype=np.int8)
    new_target[new_idx] = sample.target[survives]
    if not np.array_equal(new_target[new_idx], sample.target[survives]):
        raise AssertionError("merged pairs carried conflicting labels")
    assert (new_target >= 0).all()
    depth = sample.provenance.get("augmentation_depth", 0) + 1
    return TrainSample(
        instance=normalize(contracted),
        target=new_target,
        provenance={**sample.provenance, "augmentation_depth": depth},
    )


def _augment(sample: TrainSample, rng: np.random.Generator) -> TrainSample:
    depth = int(rng.integers(0, max(1, sample.instance.n - 2)))  # 0 .. n-3
    for _ in range(depth):
        grown = augment_by_contraction(sample, rng)
        if grown is sample:
            break
        sample = grown
    return sample


def train(
    model,
    dataset: list[TrainSample],
    cfg: TrainConfig,
    *,
    checkpoint_dir: str | Path | None = None,
    loss_csv: str | Path | None = None,
) -> tuple[object, list[tuple[int, float, float]]]:
    """Supervised training with Adam and a cosine learning-rate schedule.

    Samples are reshuffled each epoch with a seeded generator; gradients
    of a batch are averaged.  Returns the model and the loss curve as
    (epoch, mean_loss, lr) rows.  A non-finite loss aborts with a
    diagnostic checkpoint.
    """
    from .checkpoint import save_checkpoint

    if not dataset:
        raise ValueError("empty dataset")
    rng = np.random.default_rng([cfg.seed, 0x7261])
    params = [arr for _, arr in model.parameters()]
    state = AdamState.init(params)
    curve: list[tuple[int, float, float]] = []
    checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if checkpoint_dir is not None:
        checkpoint_dir.mkdir(parents=True, exist_ok=True)
    for epoch in range(cfg.epochs):
        lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min)
        order = rng.permutation(len(dataset))
        losses = []
        in_batch = 0
        model.zero_grads()
        for pos, si in enumerate(order):
            sample = dataset[int(si)]
            if cfg.augment:
                sample = _augment(sample, rng)
            logits = model.forward(sample.instance, keep_cache=True)
            join_target = 1.0 - sample.target
            loss, dloss = bce_with_logits(logits, join_target)
            if not np.isfinite(loss):
                if checkpoint_dir is not None:
                    save_checkpoint(model, checkpoint_dir / "diverged.mctmp")
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            model.backward(dloss, sample.instance.n)
            losses.append(loss)
            in_batch += 1
            if in_batch == cfg.batch_size or pos == len(order) - 1:
                grads = [g for _, g in model.grads()]
                if in_batch > 1:
                    for g in grads:
                        g /= in_batch
                adam_step(params, grads, state, lr)
                model.zero_grads()
                in_batch = 0
        curve.append((epoch, float(np.mean(losses)), lr))
        if checkpoint_dir is not None and (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(model, checkpoint_dir / f"epoch{epoch + 1:05d}.mctmp")
    if loss_csv is not None:
        write_loss_curve(curve, loss_csv)
    return model, curve


def write_loss_curve(curve, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_loss", "lr"])
        for epoch, mean_loss, lr in curve:
            writer.writerow([epoch, repr(float(mean_loss)), repr(float(lr))])


def save_dataset(samples: list[TrainSample], directory: str | Path):
    """One record file per sample plus a manifest with the seeds.

    Record format: header "n m", m lines "i j c" over all pairs, and a
    final "labels b1 ... bm" line with the optimal cut indicators.
    """
    import json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for idx, sample in enumerate(samples):
        name = f"sample_{idx:05d}.txt"
        names.append(name)
        inst = sample.instance
        pairs = pairs_of(inst.n)
        with open(directory / name, "w") as fh:
            fh.write(f"{inst.n} {inst.m}\n")
            for (i, j), c in zip(pairs, inst.costs):
                fh.write(f"{i} {j} {float(c)!r}\n")
            fh.write("labels " + " ".join(str(int(b)) for b in sample.target) + "\n")
    manifest = {
        "files": names,
        "normalized": True,
        "provenance": [
            {k: (list(v) if isinstance(v, tuple) else v) for k, v in s.provenance.items()}
            for s in samples
        ],
    }
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)


def load_dataset(directory: str | Path) -> list[TrainSample]:
    import json

    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    samples = []
    for name, prov in zip(manifest["files"], manifest["provenance"]):
        with open(directory / name) as fh:
            tokens = fh.read().split()
        n, m = int(tokens[0]), int(tokens[1])
        costs = np.empty(m)
        rows = tokens[2 : 2 + 3 * m]
        expect = pairs_of(n)
        for e in range(m):
            i, j, c = int(rows[3 * e]), int(rows[3 * e + 1]), float(rows[3 * e + 2])
            if (i, j) != (int(expect[e, 0]), int(expect[e, 1])):
                raise ValueError(f"{name}: pairs not in canonical order")
            costs[e] = c
        if tokens[2 + 3 * m] != "labels":
            raise ValueError(f"{name}: missing labels line")
        target = np.array([int(t) for t in tokens[3 + 3 * m :]], dtype=np.int8)
        if target.shape[0] != m:
            raise ValueError(f"{name}: label count mismatch")
        prov = {k: (tuple(v) if isinstance(v, list) else v) for k, v in prov.items()}
        samples.append(
            TrainSample(
                instance=CompleteInstance(n, costs, normalized=manifest["normalized"]),
                target=target,
                provenance=prov,
            )
        )
    return samples
