"""Euler simulation of gradient flow driven by Brownian plus stable noise.

The discrete process is

    w[k+1] = w[k] - eta * grad f(w[k])
             + eps * sigma_brownian * sqrt(eta) * Z[k+1]
             + eps * eta**(1/alpha) * S[k+1],

with Z standard normal and S scale-1 symmetric alpha-stable, drawn
independently per component.  The eta**(1/alpha) factor makes the stable
term an exact increment of the driving motion over a step of length eta, so
a finer step discretizes the same continuous-time process.

Ensemble drivers advance many replicates in lockstep with chunked noise
generation; every replicate consumes its own substream, which keeps paths
reproducible per replicate and invariant under changes of the stopping rule
(enlarging an exit radius can only delay the recorded exit on the same
path).  Extreme draws are never truncated; an iterate that leaves float
range halts its path with a divergence marker, which exit measurements
count separately and never silently merge into exit statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .objectives import ObjectiveSpec
from .rng import RngStream
from .stable import sample_standard_sas

CHUNK_CAP = 8192

TRAJECTORY_HEADER_PREFIX = "step,time"
EXIT_RECORD_HEADER = "replicate,exited,exit_step,exit_time,radius_a,margin_xi,diverged"
TRANSITION_RECORD_HEADER = "replicate,start_basin,end_basin,transition_step,transition_time"


@dataclass(frozen=True)
class SdeConfig:
    """Discretization and noise parameters for one simulation run."""

    eta: float
    epsilon: float
    alpha: float
    w0: tuple[float, ...]
    sigma_brownian: float = 0.0
    max_steps: int = 10_000

    def __post_init__(self):
        if not (self.eta > 0.0):
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.epsilon < 0.0:
            raise ParameterError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.sigma_brownian < 0.0:
            raise ParameterError(f"sigma_brownian must be nonnegative, got {self.sigma_brownian}")
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.max_steps < 1:
            raise ParameterError(f"max_steps must be >= 1, got {self.max_steps}")
        w0 = tuple(float(v) for v in np.atleast_1d(np.asarray(self.w0, dtype=float)))
        if len(w0) < 1:
            raise ParameterError("w0 must have at least one component")
        object.__setattr__(self, "w0", w0)

    @property
    def dim(self) -> int:
        return len(self.w0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Stored iterates w^0 .. w^T (finite ones only) plus divergence marker."""

    points: np.ndarray  # shape (T+1, dim)
    eta: float
    diverged: bool = False
    diverged_step: int | None = None

    @property
    def n_steps(self) -> int:
        return self.points.shape[0] - 1

    def times(self) -> np.ndarray:
        return self.eta * np.arange(self.points.shape[0])


@dataclass(frozen=True)
class ExitTimeRecord:
    """First-exit outcome of one replicate."""

    replicate: int
    exited: bool
    exit_step: int | None
    exit_time: float | None
    radius_a: float
    margin_xi: float
    center: tuple[float, ...]
    diverged: bool = False

    def csv_row(self) -> str:
        step = "" if self.exit_step is None else str(self.exit_step)
        time = "" if self.exit_time is None else repr(self.exit_time)
        return (
            f"{self.replicate},{'true' if self.exited else 'false'},{step},{time},"
            f"{self.radius_a!r},{self.margin_xi!r},{'true' if self.diverged else 'false'}"
        )


@dataclass(frozen=True)
class TransitionRecord:
    """One recorded hop between minimum neighborhoods."""

    replicate: int
    start_basin: int
    end_basin: int
    transition_step: int
    transition_time: float

    def csv_row(self) -> str:
        return (
            f"{self.replicate},{self.start_basin},{self.end_basin},"
            f"{self.transition_step},{self.transition_time!r}"
        )


def _chunk_len(eta: float, max_steps: int) -> int:
    # the linear fast path rescales noise by (1-eta)^(-j) within a chunk,
    # so chunks are capped near 30/eta to keep those factors in range
    cap = max(64, min(CHUNK_CAP, math.ceil(30.0 / eta)))
    return min(cap, max_steps)


def noise_increments(config: SdeConfig, n_steps: int, gen: np.random.Generator) -> np.ndarray:
    """Combined per-step noise increments, shape (n_steps, dim).

    Draw order is fixed (stable block first, then the Brownian block when
    sigma_brownian > 0) so that paths are reproducible from the stream alone.
    """
    d = config.dim
    amp_s = config.epsilon * config.eta ** (1.0 / config.alpha)
    inc = amp_s * sample_standard_sas(config.alpha, (n_steps, d), gen)
    if config.sigma_brownian > 0.0:
        amp_z = config.epsilon * config.sigma_brownian * math.sqrt(config.eta)
        inc += amp_z * gen.normal(0.0, 1.0, (n_steps, d))
    return inc


def simulate(config: SdeConfig, spec: ObjectiveSpec, rng: RngStream) -> Trajectory:
    """Single Euler path of length up to max_steps.

    Runs are bit-identical for a fixed stream.  A non-finite iterate at step
    k truncates the stored path to w^0 .. w^(k-1) and marks divergence at k.
    """
    if spec.dim != config.dim:
        raise ParameterError(f"objective dim {spec.dim} != config dim {config.dim}")
    gen = rng.generator()
    d = config.dim
    eta = config.eta
    points = np.empty((config.max_steps + 1, d))
    points[0] = config.w0
    w = np.array(config.w0, dtype=float)
    done = 0
    L0 = _chunk_len(eta, config.max_steps)
    with np.errstate(all="ignore"):
        while done < config.max_steps:
            L = min(L0, config.max_steps - done)
            inc = noise_increments(config, L, gen)
            for j in range(L):
                w = w - eta * spec.grad(w) + inc[j]
                points[done + 1 + j] = w
            block = points[done + 1 : done + 1 + L]
            finite = np.isfinite(block).all(axis=1)
            if not finite.all():
                bad = int(np.argmin(finite))
                k = done + 1 + bad
                return Trajectory(
                    points=points[:k].copy(), eta=eta, diverged=True, diverged_step=k
                )
            done += L
    return Trajectory(points=points, eta=eta)


def _lane_streams(rng: RngStream, n: int) -> list[np.random.Generator]:
    return [rng.substream(r).generator() for r in range(n)]


def _scan_chunk_generic(wa, spec, eta, inc):
    """Advance active lanes through one chunk, returning the (A, L, d) block."""
    A, L, d = inc.shape
    W = np.empty((A, L, d))
    for j in range(L):
        wa = wa - eta * spec.grad(wa) + inc[:, j]
        W[:, j] = wa
    return W, wa


def _scan_chunk_linear(wa, rate, eta, inc):
    """Exact chunk evaluation of w[k+1] = (1 - eta*rate) w[k] + n[k].

    Uses the rescaled cumulative sum w_j = c^j (w_0 + sum_i n_i c^-i); chunk
    lengths are capped so the c^-i factors stay in floating range.
    """
    A, L, d = inc.shape
    c = 1.0 - eta * rate
    j = np.arange(1, L + 1)
    cpos = c**j
    cneg = c**(-j)
    s = np.cumsum(inc * cneg[None, :, None], axis=1)
    W = (wa[:, None, :] + s) * cpos[None, :, None]
    return W, W[:, -1].copy()


def _run_until(
    config: SdeConfig,
    spec: ObjectiveSpec,
    rng: RngStream,
    n_replicates: int,
    detector,
    linear_rate: float | None = None,
):
    """Advance an ensemble until each lane triggers, diverges, or times out.

    ``detector(W)`` maps an (A, L, d) position block to a boolean trigger
    matrix (A, L) and an optional integer payload matrix.  Returns arrays
    (hit_step, payload, diverged) indexed by replicate; hit_step is -1 for
    lanes that never triggered.
    """
    if spec.dim != config.dim:
        raise ParameterError(f"objective dim {spec.dim} != config dim {config.dim}")
    if linear_rate is not None and not (0.0 < 1.0 - config.eta * linear_rate < 1.0):
        linear_rate = None  # fall back to the generic scan outside the stable band
    d = config.dim
    eta = config.eta
    gens = _lane_streams(rng, n_replicates)
    w = np.tile(np.asarray(config.w0), (n_replicates, 1))
    active = np.arange(n_replicates)
    hit_step = np.full(n_replicates, -1, dtype=np.int64)
    payload = np.full(n_replicates, -1, dtype=np.int64)
    diverged = np.zeros(n_replicates, dtype=bool)
    done = 0
    L0 = _chunk_len(eta, config.max_steps)
    with np.errstate(all="ignore"):
        while active.size and done < config.max_steps:
            L = min(L0, config.max_steps - done)
            A = active.size
            inc = np.empty((A, L, d))
            for i, rid in enumerate(active):
                inc[i] = noise_increments(config, L, gens[rid])
            wa = w[active]
            if linear_rate is None:
                W, wa = _scan_chunk_generic(wa, spec, eta, inc)
            else:
                W, wa = _scan_chunk_linear(wa, linear_rate, eta, inc)
            trigger, pay = detector(W)
            bad = ~np.isfinite(W).all(axis=2)
            stop = trigger | bad
            hit_any = stop.any(axis=1)
            if hit_any.any():
                first = stop.argmax(axis=1)
                for i in np.flatnonzero(hit_any):
                    rid = active[i]
                    f = first[i]
                    hit_step[rid] = done + 1 + f
                    diverged[rid] = bool(bad[i, f])
                    if pay is not None and not bad[i, f]:
                        payload[rid] = pay[i, f]
            w[active] = wa
            active = active[~hit_any]
            done += L
    return hit_step, payload, diverged


def first_exit_ensemble(
    config: SdeConfig,
    spec: ObjectiveSpec,
    center: tuple[float, ...] | float,
    a: float,
    xi: float,
    rng: RngStream,
    n_replicates: int,
    linear_rate: float | None = None,
) -> list[ExitTimeRecord]:
    """First exit from the ball of radius a + xi around center, per replicate.

    ``linear_rate`` enables the exact linear-drift chunk scan when the
    caller knows grad f(w) = rate * (w - center); paths agree with the
    generic scan up to floating-point reassociation.
    """
    if a <= 0.0:
        raise ParameterError(f"radius a must be positive, got {a}")
    if xi < 0.0:
        raise ParameterError(f"margin xi must be nonnegative, got {xi}")
    if n_replicates < 1:
        raise ParameterError(f"n_replicates must be >= 1, got {n_replicates}")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size != config.dim:
        raise ParameterError(f"center dim {c.size} != config dim {config.dim}")
    start_dist = float(np.sqrt(np.sum((np.asarray(config.w0) - c) ** 2)))
    if start_dist > a + xi:
        raise ParameterError(
            f"w0 lies outside the exit ball: |w0 - center| = {start_dist} > a + xi = {a + xi}"
        )
    thr = a + xi

    def detector(W):
        dist = np.sqrt(np.sum((W - c[None, None, :]) ** 2, axis=2))
        return dist > thr, None

    hit_step, _, diverged = _run_until(
        config, spec, rng, n_replicates, detector, linear_rate=linear_rate
    )
    records = []
    for r in range(n_replicates):
        hit = int(hit_step[r])
        div = bool(diverged[r])
        exited = hit >= 0 and not div
        records.append(
            ExitTimeRecord(
                replicate=r,
                exited=exited,
                exit_step=hit if hit >= 0 else None,
                exit_time=hit * config.eta if hit >= 0 else None,
                radius_a=a,
                margin_xi=xi,
                center=tuple(c),
                diverged=div,
            )
        )
    return records


def first_exit(
    config: SdeConfig,
    spec: ObjectiveSpec,
    center: tuple[float, ...] | float,
    a: float,
    xi: float,
    rng: RngStream,
) -> ExitTimeRecord:
    """Single-replicate first exit (replicate stream 0 of the given stream)."""
    return first_exit_ensemble(config, spec, center, a, xi, rng, 1)[0]


def _validate_neighborhoods(spec: ObjectiveSpec, delta: float) -> np.ndarray:
    if spec.minima is None:
        raise ParameterError("transition tracing needs an objective with declared geometry")
    if delta <= 0.0:
        raise ParameterError(f"delta must be positive, got {delta}")
    minima = np.asarray(spec.minima)
    bounds = np.concatenate(([-np.inf], np.asarray(spec.saddles), [np.inf]))
    for i, m in enumerate(minima):
        if not (bounds[i] < m - delta and m + delta < bounds[i + 1]):
            raise ParameterError(
                f"delta-neighborhood of minimum {m} leaves its valley "
                f"({bounds[i]}, {bounds[i+1]}); shrink delta={delta}"
            )
    return minima


def transition_trace(
    config: SdeConfig,
    spec: ObjectiveSpec,
    delta: float,
    rng: RngStream,
    replicate: int = 0,
) -> list[TransitionRecord]:
    """Hops between minimum neighborhoods along one simulated path.

    The last-visited minimum starts as the valley of w0; a record is emitted
    each time the iterate enters the delta-neighborhood of a different
    minimum.  A path started and kept inside one neighborhood yields no
    records.
    """
    minima = _validate_neighborhoods(spec, delta)
    traj = simulate(config, spec, rng)
    pts = traj.points[:, 0]
    steps = np.arange(pts.size)
    dist = np.abs(pts[:, None] - minima[None, :])
    nearest = np.argmin(dist, axis=1)
    within = dist[steps, nearest] <= delta
    current = int(spec.valley_index(np.asarray(config.w0[0])))
    records = []
    for k in np.flatnonzero(within):
        j = int(nearest[k])
        if j != current:
            records.append(
                TransitionRecord(
                    replicate=replicate,
                    start_basin=current,
                    end_basin=j,
                    transition_step=int(k),
                    transition_time=float(k * config.eta),
                )
            )
            current = j
    return records


def first_transition_ensemble(
    config: SdeConfig,
    spec: ObjectiveSpec,
    delta: float,
    rng: RngStream,
    n_replicates: int,
) -> tuple[list[TransitionRecord], np.ndarray]:
    """First hop out of the starting neighborhood for each replicate.

    Returns the records of replicates that transitioned, plus a boolean
    divergence mask over all replicates; diverged or timed-out replicates
    produce no record.
    """
    minima = _validate_neighborhoods(spec, delta)
    start = int(spec.valley_index(np.asarray(config.w0[0])))
    others = np.array([j for j in range(minima.size) if j != start])
    targets = minima[others]

    def detector(W):
        dist = np.abs(W[:, :, 0][:, :, None] - targets[None, None, :])
        nearest = np.argmin(dist, axis=2)
        A, L = nearest.shape
        within = dist[np.arange(A)[:, None], np.arange(L)[None, :], nearest] <= delta
        return within, others[nearest]

    hit_step, payload, diverged = _run_until(config, spec, rng, n_replicates, detector)
    records = []
    for r in range(n_replicates):
        if hit_step[r] >= 0 and not diverged[r]:
            records.append(
                TransitionRecord(
                    replicate=r,
                    start_basin=start,
                    end_basin=int(payload[r]),
                    transition_step=int(hit_step[r]),
                    transition_time=float(hit_step[r] * config.eta),
                )
            )
    return records, diverged


def occupancy(trajectory: Trajectory, spec: ObjectiveSpec) -> np.ndarray:
    """Fraction of stored iterates in each valley; fractions sum to one."""
    if spec.minima is None:
        raise ParameterError("occupancy needs an objective with declared geometry")
    idx = spec.valley_index(trajectory.points[:, 0])
    counts = np.bincount(idx, minlength=len(spec.minima))
    return counts / counts.sum()


def occupancy_ensemble(
    config: SdeConfig,
    spec: ObjectiveSpec,
    rng: RngStream,
    n_replicates: int,
    burn_in: int = 0,
) -> tuple[np.ndarray, int]:
    """Pooled valley occupancy over an ensemble of full-length runs.

    Each replicate runs max_steps steps on its own substream; the first
    ``burn_in`` steps of every lane are excluded from the counts.  A lane
    that diverges contributes its finite prefix and is then ignored.
    Returns (fractions, n_diverged).
    """
    if spec.minima is None:
        raise ParameterError("occupancy needs an objective with declared geometry")
    if not (0 <= burn_in < config.max_steps):
        raise ParameterError(f"burn_in must lie in [0, max_steps), got {burn_in}")
    saddles = np.asarray(spec.saddles)
    n_valleys = len(spec.minima)
    counts = np.zeros(n_valleys, dtype=np.int64)
    gens = _lane_streams(rng, n_replicates)
    eta = config.eta
    d = config.dim
    w = np.tile(np.asarray(config.w0), (n_replicates, 1))
    done = 0
    L0 = _chunk_len(eta, config.max_steps)
    with np.errstate(all="ignore"):
        while done < config.max_steps:
            L = min(L0, config.max_steps - done)
            inc = np.empty((n_replicates, L, d))
            for r in range(n_replicates):
                inc[r] = noise_increments(config, L, gens[r])
            W, w = _scan_chunk_generic(w, spec, eta, inc)
            keep_from = max(0, burn_in - done)
            if keep_from < L:
                block = W[:, keep_from:, 0].ravel()
                finite = np.isfinite(block)
                idx = np.searchsorted(saddles, block[finite])
                counts += np.bincount(idx, minlength=n_valleys)
            done += L
    n_diverged = int((~np.isfinite(w).all(axis=1)).sum())
    if counts.sum() == 0:
        raise ParameterError("no samples survived burn-in")
    return counts / counts.sum(), n_diverged
