"""Monte Carlo studies comparing simulated paths to small-jump asymptotics.

The analytic exit-time and valley-occupancy formulas are stated for a
driving process whose jump intensity is exactly |y|^(-1-alpha).  A scale-1
symmetric alpha-stable driver in the characteristic-function convention has
that intensity only up to the constant sigma* = unit_jump_scale(alpha), so
each study accepts a ``noise_scaling`` switch:

  "jump"  multiply the nominal epsilon by sigma* before simulating, so the
          simulated process is the one the formulas describe (default);
  "cf"    drive with the literal scale-1 stable law and leave the nominal
          epsilon alone, in which case measured times sit a factor of about
          sigma*^alpha away from the predictions.

Predictions are always evaluated at the nominal epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .metastability import expected_exit_time, generator_matrix, solved_model
from .objectives import ObjectiveSpec
from .rng import RngStream
from .sde import (
    ExitTimeRecord,
    SdeConfig,
    TransitionRecord,
    first_exit_ensemble,
    first_transition_ensemble,
    occupancy_ensemble,
)
from .stable import unit_jump_scale

EXIT_STUDY_HEADER = (
    "alpha,epsilon,radius_a,eta,n_replicates,noise_scaling,"
    "n_exited,n_diverged,n_censored,mean_exit_time,predicted_mean,ks_distance"
)
SCALING_ROW_HEADER = "alpha,epsilon,eta,n_replicates,mean_exit_time,predicted_mean"
TRANSITION_STUDY_HEADER = (
    "alpha,epsilon,delta,eta,n_replicates,noise_scaling,"
    "n_transitioned,n_diverged,mean_transition_time,predicted_mean"
)


def ks_distance_exponential(values: np.ndarray, rate: float) -> float:
    """Kolmogorov distance between the sample and Exp(rate)."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ParameterError("KS distance needs at least one value")
    if not (rate > 0.0):
        raise ParameterError(f"rate must be positive, got {rate}")
    cdf = 1.0 - np.exp(-rate * v)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus))


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ParameterError("slope fit needs two same-length arrays with >= 2 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ParameterError("slope fit needs strictly positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _effective_epsilon(epsilon: float, alpha: float, noise_scaling: str) -> float:
    if noise_scaling == "jump":
        return epsilon * unit_jump_scale(alpha)
    if noise_scaling == "cf":
        return epsilon
    raise ParameterError(f"noise_scaling must be 'jump' or 'cf', got {noise_scaling!r}")


@dataclass(frozen=True)
class ExitTimeStudy:
    """Exit-time ensemble summary against the closed-form law."""

    alpha: float
    epsilon: float
    radius_a: float
    eta: float
    n_replicates: int
    noise_scaling: str
    n_exited: int
    n_diverged: int
    n_censored: int
    mean_exit_time: float
    predicted_mean: float
    ks_distance: float
    records: tuple[ExitTimeRecord, ...]

    def csv_row(self) -> str:
        return (
            f"{self.alpha!r},{self.epsilon!r},{self.radius_a!r},{self.eta!r},"
            f"{self.n_replicates},{self.noise_scaling},{self.n_exited},{self.n_diverged},"
            f"{self.n_censored},{self.mean_exit_time!r},{self.predicted_mean!r},"
            f"{self.ks_distance!r}"
        )


def exit_time_study(
    spec: ObjectiveSpec,
    center: tuple[float, ...] | float,
    alpha: float,
    epsilon: float,
    a: float,
    eta: float,
    rng: RngStream,
    n_replicates: int = 500,
    xi: float = 0.0,
    sigma_brownian: float = 0.0,
    time_cap_factor: float = 8.0,
    noise_scaling: str = "jump",
    linear_rate: float | None = None,
) -> ExitTimeStudy:
    """Measure first-exit times from radius a around a minimum.

    Paths start at the center.  The time cap is time_cap_factor times the
    predicted mean, so the censored fraction is about exp(-time_cap_factor)
    when the law holds.  Divergent replicates are excluded from the mean
    and KS statistics and counted separately.
    """
    if time_cap_factor <= 1.0:
        raise ParameterError(f"time_cap_factor must exceed 1, got {time_cap_factor}")
    predicted = expected_exit_time(a, epsilon, alpha)
    eps_eff = _effective_epsilon(epsilon, alpha, noise_scaling)
    max_steps = int(np.ceil(time_cap_factor * predicted / eta))
    c = np.atleast_1d(np.asarray(center, dtype=float))
    config = SdeConfig(
        eta=eta,
        epsilon=eps_eff,
        alpha=alpha,
        w0=tuple(c),
        sigma_brownian=sigma_brownian,
        max_steps=max_steps,
    )
    records = first_exit_ensemble(
        config, spec, center, a, xi, rng, n_replicates, linear_rate=linear_rate
    )
    times = np.array([r.exit_time for r in records if r.exited])
    n_diverged = sum(r.diverged for r in records)
    n_censored = sum((not r.exited) and (not r.diverged) for r in records)
    if times.size == 0:
        raise ParameterError("no replicate exited; raise time_cap_factor or epsilon")
    rate = (2.0 / a**alpha) / alpha
    ks = ks_distance_exponential(epsilon**alpha * times, rate)
    return ExitTimeStudy(
        alpha=alpha,
        epsilon=epsilon,
        radius_a=a,
        eta=eta,
        n_replicates=n_replicates,
        noise_scaling=noise_scaling,
        n_exited=int(times.size),
        n_diverged=int(n_diverged),
        n_censored=int(n_censored),
        mean_exit_time=float(times.mean()),
        predicted_mean=predicted,
        ks_distance=ks,
        records=tuple(records),
    )


@dataclass(frozen=True)
class ExitScalingStudy:
    """Mean exit time across an epsilon ladder plus the fitted slope."""

    alpha: float
    epsilons: tuple[float, ...]
    mean_exit_times: tuple[float, ...]
    slope_vs_inverse_epsilon: float
    studies: tuple[ExitTimeStudy, ...]


def exit_scaling_study(
    spec: ObjectiveSpec,
    center: tuple[float, ...] | float,
    alpha: float,
    epsilons: tuple[float, ...],
    a: float,
    eta: float,
    rng: RngStream,
    n_replicates: int = 300,
    noise_scaling: str = "jump",
    linear_rate: float | None = None,
    time_cap_factor: float = 8.0,
) -> ExitScalingStudy:
    """Fit the growth of the mean exit time against 1/epsilon.

    The law predicts mean = (alpha/2) a^alpha eps^-alpha, so the log-log
    slope against 1/epsilon is alpha.  Each epsilon gets its own substream.
    """
    if len(epsilons) < 2:
        raise ParameterError("need at least two epsilon values")
    studies = []
    for i, eps in enumerate(epsilons):
        studies.append(
            exit_time_study(
                spec,
                center,
                alpha,
                eps,
                a,
                eta,
                rng.substream(i),
                n_replicates=n_replicates,
                noise_scaling=noise_scaling,
                linear_rate=linear_rate,
                time_cap_factor=time_cap_factor,
            )
        )
    means = np.array([s.mean_exit_time for s in studies])
    slope = fit_loglog_slope(1.0 / np.asarray(epsilons), means)
    return ExitScalingStudy(
        alpha=alpha,
        epsilons=tuple(epsilons),
        mean_exit_times=tuple(float(m) for m in means),
        slope_vs_inverse_epsilon=slope,
        studies=tuple(studies),
    )


@dataclass(frozen=True)
class TransitionStudy:
    """First hops between valleys against the generator-matrix prediction."""

    alpha: float
    epsilon: float
    delta: float
    eta: float
    n_replicates: int
    noise_scaling: str
    start_basin: int
    n_transitioned: int
    n_diverged: int
    mean_transition_time: float
    predicted_mean: float
    destination_fractions: tuple[float, ...]
    predicted_destination_fractions: tuple[float, ...]
    records: tuple[TransitionRecord, ...]

    def csv_row(self) -> str:
        return (
            f"{self.alpha!r},{self.epsilon!r},{self.delta!r},{self.eta!r},"
            f"{self.n_replicates},{self.noise_scaling},{self.n_transitioned},"
            f"{self.n_diverged},{self.mean_transition_time!r},{self.predicted_mean!r}"
        )


def transition_study(
    spec: ObjectiveSpec,
    alpha: float,
    epsilon: float,
    delta: float,
    eta: float,
    rng: RngStream,
    n_replicates: int = 300,
    start_basin: int | None = None,
    noise_scaling: str = "jump",
    time_cap_factor: float = 8.0,
) -> TransitionStudy:
    """First transition out of a starting valley on a multi-well objective.

    On the chain time scale the holding time in basin i is exponential with
    rate |q_ii|, so the mean first-transition time is eps^-alpha / |q_ii|
    and destinations split as q_ij / |q_ii|.  Paths start at the basin's
    minimum.
    """
    if spec.minima is None:
        raise ParameterError("transition study needs an objective with declared geometry")
    Q = generator_matrix(spec.minima, spec.saddles, alpha).Q
    if start_basin is None:
        start_basin = 0
    r = len(spec.minima)
    if not (0 <= start_basin < r):
        raise ParameterError(f"start_basin {start_basin} out of range for {r} minima")
    rate_out = float(-Q[start_basin, start_basin])
    predicted = epsilon**-alpha / rate_out
    eps_eff = _effective_epsilon(epsilon, alpha, noise_scaling)
    max_steps = int(np.ceil(time_cap_factor * predicted / eta))
    config = SdeConfig(
        eta=eta,
        epsilon=eps_eff,
        alpha=alpha,
        w0=(float(spec.minima[start_basin]),),
        max_steps=max_steps,
    )
    records, diverged = first_transition_ensemble(config, spec, delta, rng, n_replicates)
    if not records:
        raise ParameterError("no replicate transitioned; raise time_cap_factor or epsilon")
    times = np.array([rec.transition_time for rec in records])
    dest = np.array([rec.end_basin for rec in records])
    counts = np.bincount(dest, minlength=r).astype(float)
    counts[start_basin] = 0.0
    fractions = counts / counts.sum()
    pred_fracs = Q[start_basin].copy()
    pred_fracs[start_basin] = 0.0
    pred_fracs = pred_fracs / rate_out
    return TransitionStudy(
        alpha=alpha,
        epsilon=epsilon,
        delta=delta,
        eta=eta,
        n_replicates=n_replicates,
        noise_scaling=noise_scaling,
        start_basin=start_basin,
        n_transitioned=len(records),
        n_diverged=int(diverged.sum()),
        mean_transition_time=float(times.mean()),
        predicted_mean=predicted,
        destination_fractions=tuple(float(f) for f in fractions),
        predicted_destination_fractions=tuple(float(f) for f in pred_fracs),
        records=tuple(records),
    )


@dataclass(frozen=True)
class OccupancyStudy:
    """Long-run valley occupancy against the stationary distribution."""

    alpha: float
    epsilon: float
    eta: float
    n_steps: int
    burn_in: int
    n_replicates: int
    noise_scaling: str
    n_diverged: int
    fractions: tuple[float, ...]
    pi: tuple[float, ...]
    max_abs_error: float

    def header(self) -> str:
        r = len(self.fractions)
        cols = ["alpha", "epsilon", "eta", "n_steps", "burn_in", "n_replicates",
                "noise_scaling", "n_diverged"]
        cols += [f"fraction_{i}" for i in range(r)]
        cols += [f"pi_{i}" for i in range(r)]
        cols.append("max_abs_error")
        return ",".join(cols)

    def csv_row(self) -> str:
        vals = [repr(self.alpha), repr(self.epsilon), repr(self.eta), str(self.n_steps),
                str(self.burn_in), str(self.n_replicates), self.noise_scaling,
                str(self.n_diverged)]
        vals += [repr(f) for f in self.fractions]
        vals += [repr(p) for p in self.pi]
        vals.append(repr(self.max_abs_error))
        return ",".join(vals)


def occupancy_study(
    spec: ObjectiveSpec,
    alpha: float,
    epsilon: float,
    eta: float,
    rng: RngStream,
    n_replicates: int = 8,
    n_steps: int = 1_000_000,
    burn_in_fraction: float = 0.1,
    noise_scaling: str = "jump",
    w0: tuple[float, ...] | None = None,
) -> OccupancyStudy:
    """Compare pooled valley occupancy to the stationary chain distribution.

    Lanes start at the deepest minimum unless w0 is given; the leading
    burn_in fraction of every lane is dropped before counting.
    """
    if spec.minima is None:
        raise ParameterError("occupancy study needs an objective with declared geometry")
    if not (0.0 <= burn_in_fraction < 1.0):
        raise ParameterError(f"burn_in_fraction must lie in [0, 1), got {burn_in_fraction}")
    model = solved_model(spec.minima, spec.saddles, alpha)
    if w0 is None:
        f_vals = [spec.f(np.asarray(m)) for m in spec.minima]
        w0 = (float(spec.minima[int(np.argmin(f_vals))]),)
    eps_eff = _effective_epsilon(epsilon, alpha, noise_scaling)
    burn_in = int(burn_in_fraction * n_steps)
    config = SdeConfig(
        eta=eta, epsilon=eps_eff, alpha=alpha, w0=w0, max_steps=n_steps
    )
    fractions, n_diverged = occupancy_ensemble(config, spec, rng, n_replicates, burn_in)
    pi = np.asarray(model.pi)
    err = float(np.max(np.abs(fractions - pi)))
    return OccupancyStudy(
        alpha=alpha,
        epsilon=epsilon,
        eta=eta,
        n_steps=n_steps,
        burn_in=burn_in,
        n_replicates=n_replicates,
        noise_scaling=noise_scaling,
        n_diverged=n_diverged,
        fractions=tuple(float(f) for f in fractions),
        pi=tuple(float(p) for p in pi),
        max_abs_error=err,
    )
