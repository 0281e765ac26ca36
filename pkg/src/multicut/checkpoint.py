"""Versioned binary model checkpoints with a text manifest.

Layout: the magic ``MCTMP1``, a little-endian u32 count of affine blocks,
then per block u32 input/output dims followed by the weights (row-major
f64) and the biases; after that a u32 count of norm blocks, each a u32
dimension followed by the gains and the shifts.  Blocks appear in layer
order, message map before update map.

The sidecar ``<path>.manifest.txt`` records the architecture (so a model
can be rebuilt from the checkpoint alone), every block shape, and a
SHA-256 checksum of the binary file.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError
from .io import model_config_from_pairs
from .model import TmpModel

MAGIC = b"MCTMP1"


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.txt")


def save_checkpoint(model: TmpModel, path):
    path = Path(path)
    blob = bytearray(MAGIC)
    linears = [lin for layer in model.layers for lin in layer.linears()]
    norms = [layer.layer_norm for layer in model.layers if layer.layer_norm is not None]
    blob += struct.pack("<I", len(linears))
    shapes = []
    for lin in linears:
        blob += struct.pack("<II", lin.in_dim, lin.out_dim)
        blob += lin.weight.astype("<f8").tobytes(order="C")
        blob += lin.bias.astype("<f8").tobytes(order="C")
        shapes.append(f"linear {lin.in_dim} {lin.out_dim}")
    blob += struct.pack("<I", len(norms))
    for ln in norms:
        blob += struct.pack("<I", ln.dim)
        blob += ln.gain.astype("<f8").tobytes(order="C")
        blob += ln.shift.astype("<f8").tobytes(order="C")
        shapes.append(f"norm {ln.dim}")
    path.write_bytes(blob)
    digest = hashlib.sha256(blob).hexdigest()
    cfg = model.config
    manifest = [
        "format=MCTMP1",
        f"sha256={digest}",
        f"layers={cfg.layers}",
        f"width={cfg.width}",
        f"mlp_hidden_layers={cfg.mlp_hidden_layers}",
        f"layer_norm={'on' if cfg.layer_norm else 'off'}",
        f"residual={'on' if cfg.residual else 'off'}",
        f"message_scheme={cfg.message_scheme}",
    ] + shapes
    _manifest_path(path).write_text("\n".join(manifest) + "\n")


def load_checkpoint(path) -> TmpModel:
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise ParseError(f"{path}: not a model checkpoint (bad magic)")
    manifest_file = _manifest_path(path)
    if not manifest_file.exists():
        raise ParseError(f"missing manifest {manifest_file}")
    pairs = {}
    for line in manifest_file.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith(("linear ", "norm ")):
            continue
        key, _, value = line.partition("=")
        pairs[key] = value
    if pairs.get("format") != "MCTMP1":
        raise ParseError(f"{manifest_file}: unsupported format")
    digest = hashlib.sha256(blob).hexdigest()
    if pairs.get("sha256") != digest:
        raise ParseError(f"{path}: checksum mismatch, checkpoint corrupted")
    config = model_config_from_pairs(
        {k: v for k, v in pairs.items() if k not in ("format", "sha256")}
    )
    model = TmpModel(config, seed=0)
    offset = len(MAGIC)

    def unpack(fmt):
        nonlocal offset
        size = struct.calcsize(fmt)
        values = struct.unpack_from(fmt, blob, offset)
        offset += size
        return values

    def read_array(shape):
        nonlocal offset
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        return arr.reshape(shape).astype(np.float64)

    linears = [lin for layer in model.layers for lin in layer.linears()]
    (n_linear,) = unpack("<I")
    if n_linear != len(linears):
        raise ParseError(f"{path}: expected {len(linears)} affine blocks, found {n_linear}")
    for lin in linears:
        in_dim, out_dim = unpack("<II")
        if (in_dim, out_dim) != (lin.in_dim, lin.out_dim):
            raise ParseError(
                f"{path}: block shape ({in_dim}, {out_dim}) does not match the architecture"
            )
        lin.weight[:] = read_array((out_dim, in_dim))
        lin.bias[:] = read_array((out_dim,))
    norms = [layer.layer_norm for layer in model.layers if layer.layer_norm is not None]
    (n_norm,) = unpack("<I")
    if n_norm != len(norms):
        raise ParseError(f"{path}: expected {len(norms)} norm blocks, found {n_norm}")
    for ln in norms:
        (dim,) = unpack("<I")
        if dim != ln.dim:
            raise ParseError(f"{path}: norm dimension {dim} does not match the architecture")
        ln.gain[:] = read_array((dim,))
        ln.shift[:] = read_array((dim,))
    if offset != len(blob):
        raise ParseError(f"{path}: {len(blob) - offset} trailing bytes")
    return model
