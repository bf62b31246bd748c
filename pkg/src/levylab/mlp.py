"""Small fully-connected rectifier networks with exact backpropagation.

Everything is plain numpy on flat float64 parameter vectors so gradient
noise can be pooled and sliced per layer without framework plumbing.  Layer
indices run 1..depth in all public interfaces; index 0 is reserved for
whole-network aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError
from .rng import RngStream

LOSS_KINDS = ("nll", "linear_hinge")


@dataclass(eq=False)
class MlpModel:
    """Rectifier MLP; depth counts weight layers, hidden layers use ReLU.

    ``mean_field`` switches to unit-Gaussian weights with zero bias and a
    forward pass that divides each matrix product by its fan-in, so widths
    can grow without blowing up activations.
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)
    mean_field: bool = False

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ParameterError(f"need input and output sizes, got {self.layer_sizes}")
        if any(s < 1 for s in self.layer_sizes):
            raise ParameterError(f"layer sizes must be positive, got {self.layer_sizes}")

    @property
    def depth(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def layer_slices(self) -> list[slice]:
        """Flat-vector ownership per layer, indexed 1..depth (entry 0 is the
        whole vector)."""
        slices = [slice(0, self.parameter_count)]
        start = 0
        for w, b in zip(self.weights, self.biases):
            stop = start + w.size + b.size
            slices.append(slice(start, stop))
            start = stop
        return slices

    def get_params(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.parameter_count,):
            raise ShapeError(f"expected {(self.parameter_count,)}, got {flat.shape}")
        pos = 0
        for w, b in zip(self.weights, self.biases):
            w[...] = flat[pos : pos + w.size].reshape(w.shape)
            pos += w.size
            b[...] = flat[pos : pos + b.size]
            pos += b.size

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for a batch of inputs (B, input_dim)."""
        h, _ = self._forward_cached(np.asarray(x, dtype=float))
        return h

    def _forward_cached(self, x):
        acts = [x]
        h = x
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if self.mean_field:
                z = z / w.shape[1]
            if l < self.depth - 1:
                h = np.maximum(z, 0.0)
            else:
                h = z
            acts.append(h)
        return h, acts


def init_mlp(
    layer_sizes: tuple[int, ...], rng: RngStream, scheme: str = "fan_in"
) -> MlpModel:
    """Fresh model; 'fan_in' draws N(0, 1/fan_in), 'mean_field' draws N(0, 1)
    with zero bias and fan-in division in the forward pass."""
    if scheme not in ("fan_in", "mean_field"):
        raise ParameterError(f"scheme must be 'fan_in' or 'mean_field', got {scheme!r}")
    gen = rng.generator()
    sizes = tuple(int(s) for s in layer_sizes)
    model = MlpModel(layer_sizes=sizes, mean_field=(scheme == "mean_field"))
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        if scheme == "fan_in":
            w = gen.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_out, fan_in))
            b = np.zeros(fan_out)
        else:
            w = gen.normal(0.0, 1.0, (fan_out, fan_in))
            b = np.zeros(fan_out)
        model.weights.append(w)
        model.biases.append(b)
    return model


def _loss_grad_logits(logits: np.ndarray, y: np.ndarray, loss_kind: str):
    """Batch-mean loss and its gradient in the logits."""
    B = logits.shape[0]
    rows = np.arange(B)
    if loss_kind == "nll":
        shifted = logits - logits.max(axis=1, keepdims=True)
        logz = np.log(np.exp(shifted).sum(axis=1))
        loss = float(np.mean(logz - shifted[rows, y]))
        p = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
        d = p
        d[rows, y] -= 1.0
        return loss, d / B
    if loss_kind == "linear_hinge":
        margins = 1.0 + logits - logits[rows, y][:, None]
        margins[rows, y] = 0.0
        active = margins > 0.0
        loss = float(np.sum(np.where(active, margins, 0.0)) / B)
        d = active.astype(float)
        d[rows, y] = -active.sum(axis=1)
        return loss, d / B
    raise ParameterError(f"loss_kind must be one of {LOSS_KINDS}, got {loss_kind!r}")


def forward_backward(
    model: MlpModel, x: np.ndarray, y: np.ndarray, loss_kind: str
) -> tuple[float, np.ndarray]:
    """Batch-mean loss and the exact flat gradient over all parameters."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"batch must be nonempty (B, input_dim), got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ShapeError(f"labels must be ({x.shape[0]},), got {y.shape}")
    logits, acts = model._forward_cached(x)
    loss, delta = _loss_grad_logits(logits, y, loss_kind)
    grads = []
    for l in range(model.depth - 1, -1, -1):
        w = model.weights[l]
        if model.mean_field:
            delta = delta / w.shape[1]
        gw = delta.T @ acts[l]
        gb = delta.sum(axis=0)
        grads.append((gw, gb))
        if l > 0:
            delta = (delta @ w) * (acts[l] > 0.0)
    parts = []
    for gw, gb in reversed(grads):
        parts.append(gw.ravel())
        parts.append(gb.ravel())
    return loss, np.concatenate(parts)


def accuracy(model: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    """Fraction of argmax predictions matching the labels."""
    logits = model.forward(x)
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(y)))
