"""Constant-stepsize SGD benchmark for heavy-tailed gradient noise.

Measures the decay of the best squared gradient norm over K iterations of

    w[k+1] = w[k] - eta (grad f(w[k]) + U[k]),

with U mean-zero per-coordinate noise whose (1+gamma)-th moment is finite,
against the guarantee

    min_k E |grad f(w[k])|^2  <=  gap/(K eta) + M/(1+gamma) eta^gamma sigma^(1+gamma),

optimized by eta = c_gamma / K^(1/(1+gamma)).  The expectation is proxied
by the replicate average; with stable noise that average is itself heavy
tailed, so replicate counts buy less than they would under a Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .objectives import ObjectiveSpec
from .rng import RngStream
from .stable import sample_standard_sas

CONVERGENCE_ROW_HEADER = (
    "K,eta,gamma,alpha,min_grad_sq_mean,min_grad_sq_stderr,bound,diverged_fraction"
)

DEFAULT_GAMMA_SAFETY = 0.8


def default_gamma(alpha: float) -> float:
    """Moment exponent safely inside [0, alpha - 1)."""
    if not (1.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must lie in (1, 2] for a usable gamma, got {alpha}")
    return DEFAULT_GAMMA_SAFETY * (alpha - 1.0)


def _check_constants(gamma: float, sigma_gamma: float, M: float) -> None:
    if not (0.0 < gamma <= 1.0):
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if sigma_gamma <= 0.0:
        raise ParameterError(f"sigma_gamma must be positive, got {sigma_gamma}")
    if M <= 0.0:
        raise ParameterError(f"M must be positive, got {M}")


def optimal_c_gamma(gamma: float, sigma_gamma: float, M: float, gap: float) -> float:
    """Stepsize constant minimizing the bound at eta = c / K^(1/(1+gamma))."""
    _check_constants(gamma, sigma_gamma, M)
    if gap <= 0.0:
        raise ParameterError(f"gap must be positive, got {gap}")
    return (1.0 / sigma_gamma) * ((1.0 + gamma) / (gamma * M) * gap) ** (1.0 / (1.0 + gamma))


def a_gamma_bound(gamma: float, sigma_gamma: float, M: float, gap: float) -> float:
    """Prefactor of the guaranteed min-gradient bound a / K^(gamma/(1+gamma))."""
    _check_constants(gamma, sigma_gamma, M)
    if gap < 0.0:
        raise ParameterError(f"gap must be nonnegative, got {gap}")
    return (
        sigma_gamma
        * ((1.0 + gamma) / gamma * M) ** (1.0 / (1.0 + gamma))
        * gap ** (gamma / (1.0 + gamma))
    )


def constant_step_bound(
    K: int, eta: float, gamma: float, sigma_gamma: float, M: float, gap: float
) -> float:
    """Guaranteed value of min_k E|grad f|^2 for a constant stepsize run."""
    _check_constants(gamma, sigma_gamma, M)
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    if eta <= 0.0:
        raise ParameterError(f"eta must be positive, got {eta}")
    if gap < 0.0:
        raise ParameterError(f"gap must be nonnegative, got {gap}")
    return gap / (K * eta) + M / (1.0 + gamma) * eta**gamma * sigma_gamma ** (1.0 + gamma)


@dataclass(frozen=True)
class GradientNoise:
    """Mean-zero per-coordinate noise added to the true gradient."""

    kind: str  # "sas" or "gaussian"
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sas", "gaussian"):
            raise ParameterError(f"kind must be 'sas' or 'gaussian', got {self.kind!r}")
        if self.kind == "gaussian" and self.alpha != 2.0:
            raise ParameterError("gaussian noise requires alpha = 2.0")
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.scale <= 0.0:
            raise ParameterError(f"scale must be positive, got {self.scale}")

    def sample(self, shape, gen: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian":
            return self.scale * gen.normal(0.0, 1.0, shape)
        return self.scale * sample_standard_sas(self.alpha, shape, gen)


@dataclass(frozen=True)
class ConvergenceConfig:
    """Sweep definition: constants of the bound plus the K grid."""

    gamma: float
    sigma_gamma: float
    M: float
    gap: float
    ks: tuple[int, ...]
    replicates: int = 100
    stepsize_c: float | None = None  # None picks optimal_c_gamma
    eta: float | None = None  # set for a fixed stepsize across the sweep

    def __post_init__(self):
        _check_constants(self.gamma, self.sigma_gamma, self.M)
        if self.gap < 0.0:
            raise ParameterError(f"gap must be nonnegative, got {self.gap}")
        if len(self.ks) < 1 or any(k < 1 for k in self.ks):
            raise ParameterError(f"ks must be positive iteration counts, got {self.ks}")
        if self.replicates < 1:
            raise ParameterError(f"replicates must be >= 1, got {self.replicates}")
        if self.eta is not None and self.eta <= 0.0:
            raise ParameterError(f"eta must be positive, got {self.eta}")

    def eta_for(self, K: int) -> float:
        if self.eta is not None:
            return self.eta
        c = self.stepsize_c
        if c is None:
            c = optimal_c_gamma(self.gamma, self.sigma_gamma, self.M, self.gap)
        return c / K ** (1.0 / (1.0 + self.gamma))


@dataclass(frozen=True)
class ConvergenceRow:
    """Sweep result at one K."""

    K: int
    eta: float
    gamma: float
    alpha: float
    min_grad_sq_mean: float
    min_grad_sq_stderr: float
    bound: float
    diverged_fraction: float

    def csv_row(self) -> str:
        return (
            f"{self.K},{self.eta!r},{self.gamma!r},{self.alpha!r},"
            f"{self.min_grad_sq_mean!r},{self.min_grad_sq_stderr!r},"
            f"{self.bound!r},{self.diverged_fraction!r}"
        )


def estimate_sigma_gamma(
    spec: ObjectiveSpec,
    noise: GradientNoise,
    w0: np.ndarray,
    gamma: float,
    rng: RngStream,
    n_samples: int = 20_000,
) -> float:
    """Monte Carlo estimate of (E|grad f(w0) + U|^(1+gamma))^(1/(1+gamma)).

    The bound only needs an upper moment at the start point; for injected
    noise there is no closed form on a general objective.
    """
    if not (0.0 < gamma <= 1.0):
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if n_samples < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    g0 = np.atleast_1d(np.asarray(spec.grad(w0), dtype=float))
    gen = rng.generator()
    u = noise.sample((n_samples, w0.size), gen)
    norms = np.sqrt(np.sum((g0[None, :] + u) ** 2, axis=1))
    return float(np.mean(norms ** (1.0 + gamma)) ** (1.0 / (1.0 + gamma)))


def run_convergence(
    spec: ObjectiveSpec,
    noise: GradientNoise,
    config: ConvergenceConfig,
    w0: np.ndarray,
    rng: RngStream,
) -> list[ConvergenceRow]:
    """Constant-stepsize sweep over the K grid.

    For each K, runs ``replicates`` chains with eta = config.eta_for(K) and
    records the minimum over k of the replicate-averaged squared gradient
    norm, its standard error at the argmin, the guaranteed bound, and the
    fraction of replicates that left float range (those are excluded from
    the statistics, never merged in).
    """
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    if w0.size != spec.dim:
        raise ParameterError(f"w0 dim {w0.size} != objective dim {spec.dim}")
    rows = []
    for i, K in enumerate(config.ks):
        eta = config.eta_for(K)
        gen = rng.substream(i).generator()
        R = config.replicates
        W = np.tile(w0, (R, 1))
        grad_sq = np.full((K, R), np.nan)
        with np.errstate(all="ignore"):
            for k in range(K):
                G = spec.grad(W)
                grad_sq[k] = np.sum(G * G, axis=1)
                U = noise.sample((R, w0.size), gen)
                W = W - eta * (G + U)
        # a lane is excluded from the step where it first went non-finite
        finite = np.isfinite(grad_sq)
        alive_counts = finite.sum(axis=1)
        if np.any(alive_counts == 0):
            raise ParameterError(f"all replicates diverged at K={K}; shrink eta or scale")
        sums = np.where(finite, grad_sq, 0.0).sum(axis=1)
        means = sums / alive_counts
        k_star = int(np.argmin(means))
        vals = grad_sq[k_star][finite[k_star]]
        stderr = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
        diverged = float(1.0 - finite[-1].sum() / R)
        rows.append(
            ConvergenceRow(
                K=K,
                eta=eta,
                gamma=config.gamma,
                alpha=noise.alpha,
                min_grad_sq_mean=float(means[k_star]),
                min_grad_sq_stderr=stderr,
                bound=constant_step_bound(
                    K, eta, config.gamma, config.sigma_gamma, config.M, config.gap
                ),
                diverged_fraction=diverged,
            )
        )
    return rows


def fitted_rate_slope(rows: list[ConvergenceRow]) -> float:
    """Log-log slope of the measured minima against K."""
    if len(rows) < 2:
        raise ParameterError("need at least two sweep points to fit a slope")
    ks = np.array([r.K for r in rows], dtype=float)
    ys = np.array([r.min_grad_sq_mean for r in rows], dtype=float)
    if np.any(ys <= 0):
        raise ParameterError("nonpositive measured minima; cannot fit log-log slope")
    return float(np.polyfit(np.log(ks), np.log(ys), 1)[0])
