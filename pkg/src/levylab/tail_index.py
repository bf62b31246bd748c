"""Tail-index estimation from block sums.

The estimator exploits the exact summation stability of alpha-stable laws:
if X_1, ..., X_K are SaS(alpha) and Y_i sums K1 consecutive X's, then Y_i is
again SaS with scale K1**(1/alpha) times larger, so

    1/alpha_hat = (1/log K1) * ( mean(log|Y_i|) - mean(log|X_i|) ).

The estimate is scale invariant and needs no moment assumptions.  It is
reported unclamped: values above 2 signal lighter-than-stable tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError, ShapeError

TAIL_ESTIMATE_HEADER = "alpha_hat,k1,k2,n_used,n_dropped"


@dataclass(frozen=True)
class TailEstimate:
    """Result of a block tail-index estimation.

    ``n_used == k1 * k2`` always holds; samples lost to zero removal,
    remainder truncation, or zero-sum block removal are counted in
    ``n_dropped``.  ``unreliable`` flags estimates from pools too small to
    trust (set by layer-wise consumers, never an error).
    """

    alpha_hat: float
    k1: int
    k2: int
    n_used: int
    n_dropped: int
    unreliable: bool = False

    def csv_row(self) -> str:
        return f"{self.alpha_hat!r},{self.k1},{self.k2},{self.n_used},{self.n_dropped}"


def estimate_alpha(samples: np.ndarray, k1: int) -> TailEstimate:
    """Estimate the tail index from a flat sample pool with block size k1.

    Exact zeros are dropped first (log would diverge), the remainder after
    the last full block is truncated, and any block whose sum is exactly
    zero is dropped together with its members.
    """
    if k1 < 2:
        raise ParameterError(f"k1 must be >= 2, got {k1}")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DegenerateInputError("empty sample pool")
    nonzero = x[x != 0.0]
    n_dropped = x.size - nonzero.size
    if nonzero.size == 0:
        raise DegenerateInputError("all samples are exactly zero")
    if nonzero.size < k1:
        raise ParameterError(
            f"need at least k1={k1} nonzero samples, have {nonzero.size}"
        )
    k2 = nonzero.size // k1
    used = nonzero[: k1 * k2]
    n_dropped += nonzero.size - used.size
    blocks = used.reshape(k2, k1)
    block_sums = blocks.sum(axis=1)
    keep = block_sums != 0.0
    if not np.all(keep):
        blocks = blocks[keep]
        block_sums = block_sums[keep]
        n_dropped += (k2 - blocks.shape[0]) * k1
        k2 = blocks.shape[0]
        if k2 == 0:
            raise DegenerateInputError("every block sum is exactly zero")
    mean_log_y = np.log(np.abs(block_sums)).mean()
    mean_log_x = np.log(np.abs(blocks)).mean()
    alpha_hat = math.log(k1) / (mean_log_y - mean_log_x)
    return TailEstimate(
        alpha_hat=float(alpha_hat),
        k1=k1,
        k2=int(k2),
        n_used=int(k1 * k2),
        n_dropped=int(n_dropped),
    )


def choose_block_size(n_samples: int) -> int:
    """Block size closest to sqrt(K) among divisors, ties to the smaller.

    Only divisors within a factor 2 of sqrt(K) are admissible, so a prime or
    otherwise awkward pool size falls back to truncating K downward until an
    admissible divisor exists (the estimator truncates the remainder anyway).
    """
    if n_samples < 4:
        raise ParameterError(f"need at least 4 samples, got {n_samples}")
    for k in range(n_samples, 3, -1):
        root = math.sqrt(k)
        best = None
        d = 1
        while d * d <= k:
            if k % d == 0:
                for cand in (d, k // d):
                    if root / 2.0 <= cand <= 2.0 * root:
                        if best is None or (abs(cand - root), cand) < (abs(best - root), best):
                            best = cand
            d += 1
        if best is not None:
            return int(best)
    raise ParameterError(f"no admissible block size at or below {n_samples}")


def gradient_noise_alpha(
    grad_full: np.ndarray, grads_minibatch: list[np.ndarray] | np.ndarray
) -> TailEstimate:
    """Tail index of stochastic gradient noise.

    Each minibatch gradient minus the full-data gradient gives one noise
    vector; all vectors are flattened and concatenated in minibatch order
    into a single pool, treating every coordinate as a draw from one
    symmetric law.  Block size follows ``choose_block_size``.
    """
    full = np.asarray(grad_full, dtype=float).ravel()
    stacked = [np.asarray(g, dtype=float).ravel() for g in grads_minibatch]
    if not stacked:
        raise ParameterError("need at least one minibatch gradient")
    for g in stacked:
        if g.shape != full.shape:
            raise ShapeError(
                f"minibatch gradient shape {g.shape} != full gradient shape {full.shape}"
            )
    pool = np.concatenate([g - full for g in stacked])
    if not np.isfinite(pool).all():
        raise ParameterError("gradient noise pool contains non-finite values")
    return estimate_alpha(pool, choose_block_size(pool.size))
