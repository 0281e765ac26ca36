"""Instance file parsing/serialization and key=value config files.

Two instance formats are supported.  ``edgelist``: a header ``n m``
followed by m rows ``i j c`` with 0-based endpoints.  ``lt`` (lower
triangle): a node count followed by n(n-1)/2 costs row by row, row i
listing the costs to every j < i.  Whitespace is free-form and ``#``
starts a comment.  Costs are "price of cutting"; files stating clique
partitioning profits to be maximized can be ingested with ``negate``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Instance, pair_count, pair_index, pairs_of
from .errors import ParseError

INSTANCE_FORMATS = ("edgelist", "lt")


def _tokens_with_lines(text: str):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for tok in body.split():
            out.append((tok, lineno))
    return out


def _take(tokens, pos, kind, what):
    if pos >= len(tokens):
        last = tokens[-1][1] if tokens else 1
        raise ParseError(f"unexpected end of file, expected {what}", last)
    tok, line = tokens[pos]
    try:
        return kind(tok), line
    except ValueError:
        raise ParseError(f"expected {what}, got {tok!r}", line) from None


def parse_instance(path, fmt: str = "edgelist", negate: bool = False) -> Instance:
    if fmt not in INSTANCE_FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    text = Path(path).read_text()
    tokens = _tokens_with_lines(text)
    if fmt == "edgelist":
        inst = _parse_edgelist(tokens)
    else:
        inst = _parse_lower_triangle(tokens)
    if negate:
        inst = Instance(inst.n, inst.edges, -inst.costs)
    return inst


def _parse_edgelist(tokens) -> Instance:
    pos = 0
    n, _ = _take(tokens, pos, int, "node count")
    m, header_line = _take(tokens, pos + 1, int, "edge count")
    pos += 2
    if n < 1 or m < 0:
        raise ParseError("malformed header", header_line)
    edges = np.zeros((m, 2), dtype=np.int64)
    costs = np.zeros(m)
    seen = {}
    for e in range(m):
        i, line = _take(tokens, pos, int, "edge endpoint")
        j, _ = _take(tokens, pos + 1, int, "edge endpoint")
        c, _ = _take(tokens, pos + 2, float, "edge cost")
        pos += 3
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"endpoint out of range in edge ({i}, {j})", line)
        if i == j:
            raise ParseError(f"self-loop on node {i}", line)
        a, b = (i, j) if i < j else (j, i)
        if (a, b) in seen:
            raise ParseError(f"duplicate edge ({a}, {b})", line)
        seen[(a, b)] = True
        edges[e] = (a, b)
        costs[e] = c
    if pos != len(tokens):
        raise ParseError("trailing data after the declared edges", tokens[pos][1])
    return Instance(n, edges, costs)


def _parse_lower_triangle(tokens) -> Instance:
    pos = 0
    n, header_line = _take(tokens, pos, int, "node count")
    pos += 1
    if n < 1:
        raise ParseError("malformed header", header_line)
    expected = pair_count(n)
    costs = np.zeros(expected)
    order = [(j, i) for i in range(1, n) for j in range(i)]  # row i: costs to j < i
    for j, i in order:
        c, _ = _take(tokens, pos, float, f"cost of pair ({j}, {i})")
        pos += 1
        costs[int(pair_index(n, j, i))] = c
    if pos != len(tokens):
        raise ParseError("trailing data after the cost triangle", tokens[pos][1])
    return Instance(n, pairs_of(n), costs)


def write_instance(inst: Instance, path, fmt: str = "edgelist"):
    if fmt not in INSTANCE_FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    if fmt == "edgelist":
        lines = [f"{inst.n} {inst.m}"]
        for (i, j), c in zip(inst.edges, inst.costs):
            lines.append(f"{i} {j} {float(c)!r}")
    else:
        if inst.m != pair_count(inst.n):
            raise ValueError("lower-triangle format requires a complete instance")
        dense = np.zeros(pair_count(inst.n))
        idx = pair_index(inst.n, inst.edges[:, 0], inst.edges[:, 1])
        dense[idx] = inst.costs
        lines = [f"{inst.n}"]
        for i in range(1, inst.n):
            row = [repr(float(dense[int(pair_index(inst.n, j, i))])) for j in range(i)]
            lines.append(" ".join(row))
    path.write_text("\n".join(lines) + "\n")


# -- key=value config files -------------------------------------------------

_BOOL_WORDS = {"on": True, "true": True, "1": True, "yes": True,
               "off": False, "false": False, "0": False, "no": False}

MODEL_KEYS = ("layers", "width", "mlp_hidden_layers", "layer_norm", "residual",
              "message_scheme")
TRAIN_KEYS = ("sizes", "ranges", "count", "epochs", "lr_max", "lr_min",
              "batch_size", "seed", "augment", "checkpoint_every",
              "exact_time_limit")


def read_config_pairs(path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected key=value, got {body!r}", lineno)
        key, value = body.split("=", 1)
        key, value = key.strip(), value.strip()
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if key not in MODEL_KEYS and key not in TRAIN_KEYS:
            raise ParseError(f"unknown config key {key!r}", lineno)
        pairs[key] = value
    return pairs


def _bool(value: str) -> bool:
    try:
        return _BOOL_WORDS[value.lower()]
    except KeyError:
        raise ParseError(f"expected on/off, got {value!r}") from None


def model_config_from_pairs(pairs: dict[str, str]):
    from .model import ModelConfig

    kwargs = {}
    if "layers" in pairs:
        kwargs["layers"] = int(pairs["layers"])
    if "width" in pairs:
        kwargs["width"] = int(pairs["width"])
    if "mlp_hidden_layers" in pairs:
        kwargs["mlp_hidden_layers"] = int(pairs["mlp_hidden_layers"])
    if "layer_norm" in pairs:
        kwargs["layer_norm"] = _bool(pairs["layer_norm"])
    if "residual" in pairs:
        kwargs["residual"] = _bool(pairs["residual"])
    if "message_scheme" in pairs:
        kwargs["message_scheme"] = pairs["message_scheme"]
    return ModelConfig(**kwargs)


def train_config_from_pairs(pairs: dict[str, str], default_seed: int | None = None):
    from .training import TrainConfig

    kwargs = {}
    if "sizes" in pairs:
        kwargs["sizes"] = tuple(int(t) for t in pairs["sizes"].split(",") if t)
    if "ranges" in pairs:
        ranges = []
        for chunk in pairs["ranges"].split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            lo, _, hi = chunk.partition(":")
            ranges.append((int(lo), int(hi)))
        kwargs["cost_ranges"] = tuple(ranges)
    if "count" in pairs:
        kwargs["instances_per_cell"] = int(pairs["count"])
    if "epochs" in pairs:
        kwargs["epochs"] = int(pairs["epochs"])
    if "lr_max" in pairs:
        kwargs["lr_max"] = float(pairs["lr_max"])
    if "lr_min" in pairs:
        kwargs["lr_min"] = float(pairs["lr_min"])
    if "batch_size" in pairs:
        kwargs["batch_size"] = int(pairs["batch_size"])
    if "seed" in pairs:
        kwargs["seed"] = int(pairs["seed"])
    elif default_seed is not None:
        kwargs["seed"] = default_seed
    if "augment" in pairs:
        kwargs["augment"] = _bool(pairs["augment"])
    if "checkpoint_every" in pairs:
        kwargs["checkpoint_every"] = int(pairs["checkpoint_every"])
    if "exact_time_limit" in pairs:
        kwargs["exact_time_limit"] = float(pairs["exact_time_limit"])
    return TrainConfig(**kwargs)


def parse_model_config(path):
    return model_config_from_pairs(read_config_pairs(path))


def parse_train_config(path, default_seed: int | None = None):
    return train_config_from_pairs(read_config_pairs(path), default_seed)


def write_model_config(config, path):
    lines = [
        f"layers={config.layers}",
        f"width={config.width}",
        f"mlp_hidden_layers={config.mlp_hidden_layers}",
        f"layer_norm={'on' if config.layer_norm else 'off'}",
        f"residual={'on' if config.residual else 'off'}",
        f"message_scheme={config.message_scheme}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")
