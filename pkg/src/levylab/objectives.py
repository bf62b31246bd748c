"""Test objectives with declared landscape geometry.

An ``ObjectiveSpec`` bundles a loss, its gradient, and (in one dimension)
the interleaved minima/saddles that define valleys for exit-time and
occupancy measurements.  ``f`` and ``grad`` are numpy-vectorized: for
``dim == 1`` they map arrays elementwise, for ``dim > 1`` the last axis is
the coordinate axis and ``f`` reduces over it.  Probe-based checkers cover
the dissipativity and Holder-gradient conditions the convergence theory
assumes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError

GRAD_TOL_AT_MINIMA = 1e-8
FLAT_CURVATURE_TOL = 1e-6


@dataclass(frozen=True)
class ObjectiveSpec:
    """A differentiable objective plus optional one-dimensional geometry.

    ``minima`` and ``saddles`` (when present, ``dim == 1`` only) satisfy
    ``-inf < m_1 < s_1 < m_2 < ... < s_{r-1} < m_r < +inf``; the outer
    boundaries at infinity are implicit.  Valley ``i`` is the interval
    between neighboring saddles around ``m_i``.
    """

    dim: int
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    minima: tuple[float, ...] | None = None
    saddles: tuple[float, ...] | None = None
    f_star: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        if self.minima is None:
            return
        if self.dim != 1:
            raise ParameterError("declared geometry is only supported for dim == 1")
        minima = tuple(float(m) for m in self.minima)
        saddles = tuple(float(s) for s in (self.saddles or ()))
        if len(saddles) != len(minima) - 1:
            raise ParameterError(
                f"{len(minima)} minima require {len(minima) - 1} interior saddles, "
                f"got {len(saddles)}"
            )
        interleaved = [minima[0]]
        for s, m in zip(saddles, minima[1:]):
            interleaved.extend((s, m))
        if any(a >= b for a, b in zip(interleaved, interleaved[1:])):
            raise ParameterError(
                f"minima and saddles must strictly interleave, got {interleaved}"
            )
        for m in minima:
            g = float(np.asarray(self.grad(np.asarray(m))))
            if abs(g) >= GRAD_TOL_AT_MINIMA:
                raise ParameterError(f"gradient at declared minimum {m} is {g:.3e}")
        for point in (*minima, *saddles):
            h = 1e-4
            curv = (
                float(self.f(np.asarray(point + h)))
                - 2.0 * float(self.f(np.asarray(point)))
                + float(self.f(np.asarray(point - h)))
            ) / h**2
            if abs(curv) < FLAT_CURVATURE_TOL:
                warnings.warn(
                    f"near-degenerate curvature {curv:.3e} at declared critical "
                    f"point {point}; exit-time asymptotics may be unreliable",
                    stacklevel=2,
                )

    def valley_index(self, w: np.ndarray) -> np.ndarray:
        """Valley membership of points (0-based), by saddle partition."""
        if self.minima is None:
            raise ParameterError("objective declares no geometry")
        return np.searchsorted(np.asarray(self.saddles), np.asarray(w))


def quadratic(dim: int = 1) -> ObjectiveSpec:
    """f(w) = ||w||^2 / 2, the single-well baseline."""

    def f(w):
        w = np.asarray(w, dtype=float)
        if dim == 1:
            return 0.5 * w**2
        return 0.5 * np.sum(w**2, axis=-1)

    def grad(w):
        return np.asarray(w, dtype=float)

    geometry = {"minima": (0.0,), "saddles": (), "f_star": 0.0} if dim == 1 else {}
    return ObjectiveSpec(dim=dim, f=f, grad=grad, **geometry)


def double_well(m1: float, m2: float, scale: float = 1.0) -> ObjectiveSpec:
    """One-dimensional double well with minima at m1 < 0 < m2, saddle at 0.

    Built from the cubic derivative f'(w) = scale * w (w - m1)(w - m2); the
    loss is its exact quartic antiderivative with f(0) = 0, so the declared
    geometry is consistent with the gradient by construction.
    """
    if not (m1 < 0.0 < m2):
        raise ParameterError(f"need m1 < 0 < m2, got m1={m1}, m2={m2}")
    if scale <= 0.0:
        raise ParameterError(f"scale must be positive, got {scale}")

    def f(w):
        w = np.asarray(w, dtype=float)
        return scale * (w**4 / 4.0 - (m1 + m2) * w**3 / 3.0 + m1 * m2 * w**2 / 2.0)

    def grad(w):
        w = np.asarray(w, dtype=float)
        return scale * w * (w - m1) * (w - m2)

    f_star = float(min(f(np.asarray(m1)), f(np.asarray(m2))))
    return ObjectiveSpec(
        dim=1, f=f, grad=grad, minima=(m1, m2), saddles=(0.0,), f_star=f_star
    )


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient, the reference for gradient consistency."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return np.asarray((float(f(x + h)) - float(f(x - h))) / (2.0 * h))
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        out.flat[i] = (float(f(x + e)) - float(f(x - e))) / (2.0 * h)
    return out


def check_dissipativity(
    spec: ObjectiveSpec,
    m: float,
    b: float,
    gamma: float,
    probes: Sequence[np.ndarray],
) -> bool:
    """Whether <x, grad f(x)> >= m ||x||^(1+gamma) - b at every probe."""
    if m <= 0 or b < 0:
        raise ParameterError(f"need m > 0 and b >= 0, got m={m}, b={b}")
    for x in probes:
        x = np.asarray(x, dtype=float)
        g = np.asarray(spec.grad(x))
        inner = float(np.sum(x * g))
        norm = float(np.sqrt(np.sum(x**2)))
        if inner < m * norm ** (1.0 + gamma) - b:
            return False
    return True


def check_holder(
    spec: ObjectiveSpec,
    M: float,
    gamma: float,
    probe_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
) -> bool:
    """Whether ||grad f(x) - grad f(y)|| <= M ||x - y||^gamma at every pair."""
    if M <= 0 or not (0.0 < gamma <= 1.0):
        raise ParameterError(f"need M > 0 and gamma in (0, 1], got M={M}, gamma={gamma}")
    for x, y in probe_pairs:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dg = float(np.sqrt(np.sum((np.asarray(spec.grad(x)) - np.asarray(spec.grad(y))) ** 2)))
        dx = float(np.sqrt(np.sum((x - y) ** 2)))
        if dg > M * dx**gamma:
            return False
    return True
