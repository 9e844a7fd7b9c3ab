"""Frequency responses, step metrics and magnitude-only plant identification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ratfun import PoleEvaluationError, RationalTF


class IdentificationError(RuntimeError):
    """Gauss-Newton did not converge from any grid seed."""


@dataclass(frozen=True)
class FrequencySample:
    omega: float
    magnitude: float
    phase: float = math.nan

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.magnitude >= 0:
            raise ValueError("magnitude must be non-negative")

    @property
    def mag_db(self) -> float:
        return db(self.magnitude)


@dataclass(frozen=True)
class BodeGrid:
    omega_min: float
    omega_max: float
    points_per_decade: int = 20

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValueError(f"need 0 < omega_min < omega_max, got {self.omega_min}, {self.omega_max}")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be at least 1")

    def omegas(self) -> np.ndarray:
        """Log-spaced grid including both ends; ``ppd`` samples per decade."""
        decades = math.log10(self.omega_max / self.omega_min)
        n = int(round(decades * self.points_per_decade)) + 1
        return np.logspace(math.log10(self.omega_min), math.log10(self.omega_max), max(n, 2))


@dataclass(frozen=True)
class StepMetrics:
    overshoot: float
    settling_time_2pct: float
    steady_state_error: float
    settled: bool = True


def db(magnitude):
    return 20.0 * np.log10(magnitude)


def from_db(mag_db):
    return 10.0 ** (np.asarray(mag_db) / 20.0)


def bode_magnitude(tf: RationalTF, grid: BodeGrid | Sequence[float]) -> list[FrequencySample]:
    omegas = grid.omegas() if isinstance(grid, BodeGrid) else np.asarray(grid, dtype=float)
    out = []
    for w in omegas:
        try:
            h = tf.freqresp(w)
        except PoleEvaluationError:
            raise PoleEvaluationError(f"pole on the frequency grid at omega = {float(w)!r} rad/s") from None
        out.append(FrequencySample(float(w), float(abs(h)), float(np.angle(h))))
    return out


def step_metrics(t, y, target: float, y0: float | None = None, band: float = 0.02) -> StepMetrics:
    """Overshoot, 2 % settling time and terminal error of a step response.

    ``t`` is measured from the step instant.  The terminal error is the mean
    absolute deviation over the last 5 % of samples.  A response that is
    outside the band at the last sample is reported with ``settled=False``
    and a NaN settling time.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    y0 = y[0] if y0 is None else y0
    step = target - y0
    tail = y[-max(1, int(math.ceil(0.05 * y.size))):]
    sse = float(abs(np.mean(tail - target)))
    if step == 0.0:
        tol = band * max(abs(target), np.finfo(float).tiny)
        overshoot = 0.0
    else:
        tol = band * abs(step)
        overshoot = max(0.0, float(np.max((y - target) * np.sign(step))) / abs(step))
    err = np.abs(y - target)
    outside = np.flatnonzero(err > tol)
    if outside.size == 0:
        return StepMetrics(overshoot, 0.0, sse)
    last = outside[-1]
    if last == y.size - 1:
        return StepMetrics(overshoot, math.nan, sse, settled=False)
    # linear interpolation of the final band crossing
    e0, e1 = err[last], err[last + 1]
    frac = (e0 - tol) / (e0 - e1) if e0 != e1 else 1.0
    ts = t[last] + frac * (t[last + 1] - t[last]) - t[0]
    return StepMetrics(overshoot, float(ts), sse)


def trace_step_metrics(records, target: float, signal: str = "x_true", t_step: float | None = None) -> StepMetrics:
    """:func:`step_metrics` on a simulation trace, from ``t_step`` onward."""
    t = np.array([rec.t for rec in records])
    y = np.array([getattr(rec, signal) for rec in records])
    if t_step is not None:
        keep = t >= t_step
        t, y = t[keep], y[keep]
    return step_metrics(t, y, target)


def integrator_lag_magnitude(omega, K: float, tau: float) -> np.ndarray:
    """``|K/(jw(tau jw + 1))|``."""
    omega = np.asarray(omega, dtype=float)
    return K / (omega * np.sqrt(1.0 + (tau * omega) ** 2))


def synthetic_frf(omega, K: float, tau: float, noise: float = 0.0, rng=None) -> list[FrequencySample]:
    """Samples of the integrating first-order plant, optional multiplicative noise."""
    omega = np.asarray(omega, dtype=float)
    mag = integrator_lag_magnitude(omega, K, tau)
    if noise:
        rng = np.random.default_rng(rng)
        mag = mag * (1.0 + noise * rng.standard_normal(omega.size))
    phase = -0.5 * np.pi - np.arctan(tau * omega)
    return [FrequencySample(float(w), float(m), float(p)) for w, m, p in zip(omega, mag, phase)]


def _log_residual(theta, lw, lm):
    logK, logtau = theta
    model = logK - lw - 0.5 * np.log1p(np.exp(2.0 * (logtau + lw)))
    return lm - model


def _log_jacobian(theta, lw):
    # d(residual)/d(logK, logtau)
    q = np.exp(2.0 * (theta[1] + lw))
    return np.column_stack([-np.ones_like(lw), q / (1.0 + q)])


def identify_first_order_integrator(
    samples: Sequence[FrequencySample],
    max_iter: int = 200,
) -> tuple[float, float, float]:
    """Fit ``K/(w sqrt(1 + tau^2 w^2))`` to magnitude samples.

    Least squares on log-magnitude over ``(log K, log tau)``: an 8x8 grid of
    log-spaced seeds, then damped Gauss-Newton from the best seed.  Returns
    ``(K, tau, residual)`` with the residual as RMS log-magnitude error.
    """
    if len(samples) < 3:
        raise ValueError("identification needs at least 3 samples")
    w = np.array([s.omega for s in samples], dtype=float)
    m = np.array([s.magnitude for s in samples], dtype=float)
    if np.any(m <= 0):
        raise ValueError("magnitudes must be positive for a log fit")
    if w.max() / w.min() < 10.0 * (1 - 1e-9):
        raise ValueError("samples must span at least one decade")
    lw, lm = np.log(w), np.log(m)

    k_center = np.median(m * w)
    K_grid = np.log(k_center) + np.linspace(np.log(0.1), np.log(10.0), 8)
    tau_grid = np.linspace(np.log(1e-3 / w.max()), np.log(10.0 / w.min()), 8)
    seeds = [(a, b) for a in K_grid for b in tau_grid]
    costs = [float(np.sum(_log_residual(np.array(s), lw, lm) ** 2)) for s in seeds]
    best = np.array(seeds[int(np.argmin(costs))])
    theta = best.copy()

    cost = float(np.sum(_log_residual(theta, lw, lm) ** 2))
    lam = 1e-3
    converged = False
    for _ in range(max_iter):
        r = _log_residual(theta, lw, lm)
        J = _log_jacobian(theta, lw)
        g = J.T @ r
        JTJ = J.T @ J
        improved = False
        for _ in range(30):
            step = -np.linalg.solve(JTJ + lam * np.diag(np.diag(JTJ) + 1e-12), g)
            trial = theta + step
            trial_cost = float(np.sum(_log_residual(trial, lw, lm) ** 2))
            if trial_cost <= cost:
                improved = True
                break
            lam *= 10.0
        if not improved:
            converged = cost < 1e-20 or np.max(np.abs(g)) < 1e-10 * (1.0 + cost)
            break
        gain = cost - trial_cost
        theta, cost = trial, trial_cost
        lam = max(lam / 10.0, 1e-12)
        if gain <= 1e-15 * (1.0 + cost) or np.max(np.abs(step)) < 1e-12:
            converged = True
            break
    if not converged:
        raise IdentificationError(
            f"no convergence; best grid seed K={math.exp(best[0]):.4g}, tau={math.exp(best[1]):.4g}, "
            f"seed cost={min(costs):.3g}, final cost={cost:.3g}"
        )
    residual = math.sqrt(cost / len(samples))
    return math.exp(theta[0]), math.exp(theta[1]), residual
