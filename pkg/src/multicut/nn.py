"""Reverse-mode building blocks for the fixed network architecture.

Everything is double precision; 2-D arrays are row-major (C order).  The
backward passes are hand-written per layer type: the architecture is
static, so no general tape is needed.  Layers accumulate parameter
gradients in place and return the gradient w.r.t. their input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def assert_finite(name: str, arr: np.ndarray):
    if not np.isfinite(arr).all():
        raise FloatingPointError(f"non-finite values in {name}")


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact GELU, x * Phi(x) with Phi the standard normal CDF."""
    return x * ndtr(x)


def gelu_grad(x: np.ndarray) -> np.ndarray:
    """d/dx GELU = Phi(x) + x * phi(x)."""
    return ndtr(x) + x * (_INV_SQRT_2PI * np.exp(-0.5 * np.square(x)))


class Linear:
    """Affine map y = x W^T + b with gradient accumulation."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator | None = None):
        self.in_dim = in_dim
        self.out_dim = out_dim
        if rng is None:
            self.weight = np.zeros((out_dim, in_dim))
        else:
            std = math.sqrt(2.0 / (in_dim + out_dim))
            self.weight = rng.normal(0.0, std, size=(out_dim, in_dim))
        self.bias = np.zeros(out_dim)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._input: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(
                f"expected input of shape (*, {self.in_dim}), got {x.shape}"
            )
        self._input = x
        return x @ self.weight.T + self.bias

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._input is None:
            raise RuntimeError("backward before forward")
        if upstream.shape != (self._input.shape[0], self.out_dim):
            raise ValueError("upstream gradient shape mismatch")
        self.accumulate(self._input, upstream)
        return upstream @ self.weight

    def accumulate(self, x: np.ndarray, upstream: np.ndarray):
        """Gradient accumulation against an explicit input (no cache)."""
        self.grad_weight += upstream.T @ x
        self.grad_bias += upstream.sum(axis=0)

    def zero_grad(self):
        self.grad_weight[:] = 0.0
        self.grad_bias[:] = 0.0


def linear_forward(layer: Linear, x: np.ndarray) -> np.ndarray:
    return layer.forward(x)


def linear_backward(layer: Linear, upstream: np.ndarray) -> np.ndarray:
    return layer.backward(upstream)


class LayerNorm:
    """Per-row normalization to zero mean / unit variance, then affine."""

    EPS = 1e-5

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("layer norm needs a feature dimension of at least 2")
        self.dim = dim
        self.gain = np.ones(dim)
        self.shift = np.zeros(dim)
        self.grad_gain = np.zeros(dim)
        self.grad_shift = np.zeros(dim)
        self._xhat: np.ndarray | None = None
        self._inv: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"expected input of shape (*, {self.dim}), got {x.shape}")
        mean = x.mean(axis=1, keepdims=True)
        var = np.square(x - mean).mean(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt(var + self.EPS)
        xhat = (x - mean) * inv
        self._xhat, self._inv = xhat, inv
        return xhat * self.gain + self.shift

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        xhat, inv = self._xhat, self._inv
        if xhat is None:
            raise RuntimeError("backward before forward")
        self.grad_gain += (upstream * xhat).sum(axis=0)
        self.grad_shift += upstream.sum(axis=0)
        dxhat = upstream * self.gain
        m1 = dxhat.mean(axis=1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
        return inv * (dxhat - m1 - xhat * m2)

    def zero_grad(self):
        self.grad_gain[:] = 0.0
        self.grad_shift[:] = 0.0


def layer_norm(x: np.ndarray, gain: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Stateless layer-norm forward (see :class:`LayerNorm` for training)."""
    ln = LayerNorm(x.shape[1])
    ln.gain = np.asarray(gain, dtype=np.float64)
    ln.shift = np.asarray(shift, dtype=np.float64)
    return ln.forward(np.asarray(x, dtype=np.float64))


def bce_with_logits(z: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy of sigmoid(z) against 0/1 targets.

    Computed in the overflow-safe form max(z,0) - z*t + log(1+exp(-|z|)).
    Returns the loss and its gradient (sigmoid(z) - t) / len(z).
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if z.size == 0:
        raise ValueError("empty logit vector")
    if z.shape != target.shape:
        raise ValueError("logit and target lengths differ")
    if not np.isin(target, (0.0, 1.0)).all():
        raise ValueError("targets must be 0 or 1")
    losses = np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))
    loss = float(losses.mean())
    grad = (expit(z) - target) / z.size
    return loss, grad


@dataclass
class AdamState:
    """First/second moment estimates for a list of parameter arrays."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: list[np.ndarray], **kwargs) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **kwargs,
        )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
) -> AdamState:
    """One bias-corrected Adam update, applied to the parameters in place."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ValueError("parameter, gradient and state lengths differ")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError("parameter/gradient shape mismatch")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return state


def cosine_lr(epoch: int, total: int, lr_max: float = 1e-4, lr_min: float = 1e-6) -> float:
    """Cosine annealing from lr_max (epoch 0) down to lr_min (epoch total)."""
    if total <= 0:
        raise ValueError("total epoch count must be positive")
    if not 0 <= epoch <= total:
        raise ValueError("epoch outside [0, total]")
    return lr_min + (lr_max - lr_min) * (1.0 + math.cos(math.pi * epoch / total)) / 2.0


def grad_check(
    loss_fn,
    params: list[tuple[str, np.ndarray]],
    grads: list[tuple[str, np.ndarray]],
    h: float = 1e-6,
    max_entries: int = 64,
    rng: np.random.Generator | None = None,
) -> dict[str, float]:
    """Central-difference check of analytic gradients.

    ``loss_fn`` re-evaluates the scalar loss from the current parameter
    values; ``grads`` holds the analytic gradients at the unperturbed
    point.  Large blocks are subsampled.  Returns the maximum relative
    error per parameter block.
    """
    rng = rng or np.random.default_rng(0)
    report: dict[str, float] = {}
    for (name, p), (_, g) in zip(params, grads):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        if flat_p.size <= max_entries:
            idxs = np.arange(flat_p.size)
        else:
            idxs = rng.choice(flat_p.size, size=max_entries, replace=False)
        worst = 0.0
        for i in idxs:
            orig = flat_p[i]
            flat_p[i] = orig + h
            lp = loss_fn()
            flat_p[i] = orig - h
            lm = loss_fn()
            flat_p[i] = orig
            numeric = (lp - lm) / (2.0 * h)
            denom = max(abs(numeric), abs(flat_g[i]), 1e-8)
            worst = max(worst, abs(numeric - flat_g[i]) / denom)
        report[name] = worst
    return report
