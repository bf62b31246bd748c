"""SGD training loop with periodic gradient-noise tail measurement.

At each logging step the training set is partitioned into disjoint
minibatches in storage order; the deviations of those minibatch gradients
from the full gradient form the noise pool whose tail index is estimated
for the whole parameter vector and per layer.  The measurement happens at
the current iterate before that iteration's update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import DatasetSplit
from .errors import DegenerateInputError, ParameterError
from .mlp import MlpModel, accuracy, forward_backward, init_mlp
from .rng import RngStream
from .stability import stability_condition
from .stable import sample_standard_sas
from .tail_index import TailEstimate, choose_block_size, estimate_alpha


def train_log_header(depth: int) -> str:
    layers = ",".join(f"alpha_layer_{l}" for l in range(1, depth + 1))
    return f"iteration,train_acc,test_acc,loss,alpha_whole,{layers},c_st"


@dataclass(frozen=True)
class TrainLogRow:
    """One logging-step snapshot of training and noise-tail metrics."""

    iteration: int
    train_acc: float
    test_acc: float
    loss: float
    alpha_whole: float
    alpha_layers: tuple[float, ...]
    c_st: float | None = None

    def csv_row(self) -> str:
        layers = ",".join(repr(a) for a in self.alpha_layers)
        cst = "" if self.c_st is None else repr(self.c_st)
        return (
            f"{self.iteration},{self.train_acc!r},{self.test_acc!r},{self.loss!r},"
            f"{self.alpha_whole!r},{layers},{cst}"
        )


@dataclass(frozen=True)
class InjectedNoise:
    """Synthetic stable noise substituted for the measured pool."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.scale <= 0.0:
            raise ParameterError(f"scale must be positive, got {self.scale}")


def noise_pool_grads(
    model: MlpModel, data: DatasetSplit, b: int, loss_kind: str
) -> tuple[float, np.ndarray, np.ndarray]:
    """Full-train loss and gradient plus disjoint minibatch gradients.

    The partition walks the training set in storage order; when b does not
    divide n_train the remainder is left out of the pool.  Returns
    (loss, full_grad, minibatch_grads of shape (n_train//b, d)).
    """
    n = data.n_train
    if not (1 <= b <= n):
        raise ParameterError(f"batch size {b} must lie in [1, {n}]")
    loss, g_full = forward_backward(model, data.train_x, data.train_y, loss_kind)
    n_batches = n // b
    grads = np.empty((n_batches, g_full.size))
    for i in range(n_batches):
        sl = slice(i * b, (i + 1) * b)
        _, grads[i] = forward_backward(
            model, data.train_x[sl], data.train_y[sl], loss_kind
        )
    return loss, g_full, grads


def _pool_estimate(pool: np.ndarray) -> TailEstimate:
    try:
        return estimate_alpha(pool, choose_block_size(pool.size))
    except (DegenerateInputError, ParameterError):
        return TailEstimate(
            alpha_hat=float("nan"), k1=0, k2=0, n_used=0, n_dropped=0, unreliable=True
        )


def layerwise_alpha(
    grad_full: np.ndarray, grads_minibatch: np.ndarray, model: MlpModel
) -> list[TailEstimate]:
    """Tail estimates indexed 0..depth; 0 covers the whole parameter vector.

    A layer whose pool is too small or degenerate comes back flagged
    unreliable instead of raising.
    """
    deviations = grads_minibatch - grad_full[None, :]
    out = []
    for sl in model.layer_slices():
        out.append(_pool_estimate(deviations[:, sl].ravel()))
    return out


def _log_metrics(
    model: MlpModel,
    data: DatasetSplit,
    b: int,
    loss_kind: str,
    iteration: int,
    injection: InjectedNoise | None,
    measure_c_st: bool,
    rng: RngStream,
) -> TrainLogRow:
    loss, g_full, grads = noise_pool_grads(model, data, b, loss_kind)
    if injection is not None:
        gen = rng.substream(iteration, 0).generator()
        synth = injection.scale * sample_standard_sas(injection.alpha, grads.shape, gen)
        grads = g_full[None, :] + synth
    estimates = layerwise_alpha(g_full, grads, model)
    c_st = None
    if measure_c_st:
        pool = (grads - g_full[None, :]).ravel()
        report = stability_condition(pool, rng.substream(iteration, 1))
        c_st = report.c_st
    return TrainLogRow(
        iteration=iteration,
        train_acc=accuracy(model, data.train_x, data.train_y),
        test_acc=accuracy(model, data.test_x, data.test_y),
        loss=loss,
        alpha_whole=estimates[0].alpha_hat,
        alpha_layers=tuple(e.alpha_hat for e in estimates[1:]),
        c_st=c_st,
    )


def train_with_tail_logging(
    model: MlpModel,
    data: DatasetSplit,
    b: int,
    eta: float,
    iters: int,
    loss_kind: str,
    rng: RngStream,
    log_every: int = 100,
    measure_c_st: bool = False,
    injection: InjectedNoise | None = None,
) -> list[TrainLogRow]:
    """Plain constant-stepsize SGD, logging tail metrics every log_every steps.

    No momentum or weight decay.  Logging happens before the update at that
    iteration; training stops early once a logging step sees 100% train
    accuracy.  Fixed streams make the row sequence deterministic.
    """
    if eta <= 0.0:
        raise ParameterError(f"eta must be positive, got {eta}")
    if iters < 1:
        raise ParameterError(f"iters must be >= 1, got {iters}")
    if log_every < 1:
        raise ParameterError(f"log_every must be >= 1, got {log_every}")
    if not (1 <= b <= data.n_train):
        raise ParameterError(f"batch size {b} must lie in [1, {data.n_train}]")
    batch_gen = rng.substream(0).generator()
    log_stream = rng.substream(1)
    rows: list[TrainLogRow] = []
    for k in range(iters):
        if k % log_every == 0:
            row = _log_metrics(
                model, data, b, loss_kind, k, injection, measure_c_st, log_stream
            )
            rows.append(row)
            if row.train_acc >= 1.0:
                return rows
        _sgd_step(model, data, b, eta, loss_kind, batch_gen)
    return rows


def _sgd_step(model, data, b, eta, loss_kind, batch_gen) -> None:
    idx = batch_gen.choice(data.n_train, size=b, replace=False)
    _, g = forward_backward(model, data.train_x[idx], data.train_y[idx], loss_kind)
    model.set_params(model.get_params() - eta * g)


SWEEP_CELL_HEADER = (
    "width,depth,batch_size,eta,ratio,final_train_acc,final_test_acc,"
    "test_error,alpha_hat,diverged"
)
SWEEP_GROUP_HEADER = "ratio,n_cells,n_diverged,mean_test_error,mean_alpha_hat"


@dataclass(frozen=True)
class SweepCell:
    """One (architecture, batch size, stepsize) training outcome."""

    width: int
    depth: int
    batch_size: int
    eta: float
    ratio: float
    final_train_acc: float
    final_test_acc: float
    test_error: float
    alpha_hat: float
    diverged: bool

    def csv_row(self) -> str:
        return (
            f"{self.width},{self.depth},{self.batch_size},{self.eta!r},{self.ratio!r},"
            f"{self.final_train_acc!r},{self.final_test_acc!r},{self.test_error!r},"
            f"{self.alpha_hat!r},{'true' if self.diverged else 'false'}"
        )


@dataclass(frozen=True)
class SweepGroup:
    """Cells sharing one stepsize-to-batch ratio, averaged."""

    ratio: float
    n_cells: int
    n_diverged: int
    mean_test_error: float
    mean_alpha_hat: float

    def csv_row(self) -> str:
        return (
            f"{self.ratio!r},{self.n_cells},{self.n_diverged},"
            f"{self.mean_test_error!r},{self.mean_alpha_hat!r}"
        )


def noise_scale_sweep(
    data: DatasetSplit,
    widths: tuple[int, ...],
    depths: tuple[int, ...],
    batch_sizes: tuple[int, ...],
    etas: tuple[float, ...],
    loss_kind: str,
    iters: int,
    rng: RngStream,
) -> tuple[list[SweepCell], list[SweepGroup]]:
    """Stepsize-to-batch-ratio grid in the wide-layer scaling convention.

    Every cell trains a fresh mean-field-initialized network; cells whose
    loss or parameters leave float range are flagged divergent and excluded
    from group averages.  Groups collect cells with exactly equal eta/b
    (the usual dyadic grids make those ratios float-exact).
    """
    if not (widths and depths and batch_sizes and etas):
        raise ParameterError("sweep grid must be nonempty in every dimension")
    cells = []
    cell_id = 0
    for width in widths:
        for depth in depths:
            if depth < 2:
                raise ParameterError(f"depth must be >= 2 weight layers, got {depth}")
            sizes = (data.input_dim, *([width] * (depth - 1)), data.n_classes)
            for b in batch_sizes:
                for eta in etas:
                    stream = rng.substream(cell_id)
                    cell_id += 1
                    model = init_mlp(sizes, stream.substream(0), scheme="mean_field")
                    batch_gen = stream.substream(1).generator()
                    with np.errstate(all="ignore"):
                        for _ in range(iters):
                            _sgd_step(model, data, b, eta, loss_kind, batch_gen)
                        params_ok = bool(np.isfinite(model.get_params()).all())
                        loss, g_full, grads = noise_pool_grads(model, data, b, loss_kind)
                    diverged = not (params_ok and np.isfinite(loss) and
                                    np.isfinite(grads).all())
                    if diverged:
                        alpha_hat = float("nan")
                        tr_acc = te_acc = float("nan")
                    else:
                        est = _pool_estimate((grads - g_full[None, :]).ravel())
                        alpha_hat = est.alpha_hat
                        tr_acc = accuracy(model, data.train_x, data.train_y)
                        te_acc = accuracy(model, data.test_x, data.test_y)
                    cells.append(
                        SweepCell(
                            width=width, depth=depth, batch_size=b, eta=eta,
                            ratio=eta / b, final_train_acc=tr_acc,
                            final_test_acc=te_acc, test_error=1.0 - te_acc,
                            alpha_hat=alpha_hat, diverged=diverged,
                        )
                    )
    groups = []
    for ratio in sorted({c.ratio for c in cells}):
        members = [c for c in cells if c.ratio == ratio]
        alive = [c for c in members if not c.diverged]
        groups.append(
            SweepGroup(
                ratio=ratio,
                n_cells=len(members),
                n_diverged=len(members) - len(alive),
                mean_test_error=(
                    float(np.mean([c.test_error for c in alive])) if alive else float("nan")
                ),
                mean_alpha_hat=(
                    float(np.mean([c.alpha_hat for c in alive])) if alive else float("nan")
                ),
            )
        )
    return cells, groups
