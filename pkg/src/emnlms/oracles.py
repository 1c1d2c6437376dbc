"""Slow reference implementations used to validate the streaming kernels.

Nothing in here is meant for the per-sample processing path: the full-matrix
filter keeps an M x M covariance (O(M^2) per step) and the ensemble estimator
re-simulates the generative model thousands of times.  Tests use them as
independent ground truth for the scalar-variance update and the stepsize
rule of ``em_nlms``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import EmHyper, FilterState, em_nlms_e_step

__all__ = [
    "FullKalmanState",
    "GenerativeModel",
    "DegenerateEnsembleError",
    "kalman_full_step",
    "trace_average",
    "scalar_variance_recursion",
    "mc_optimal_stepsize",
]

_SYM_TOL = 1e-10


class DegenerateEnsembleError(RuntimeError):
    """The simulated ensemble produced zero mean squared error."""


@dataclass
class FullKalmanState:
    """Coefficients plus the full posterior covariance matrix."""

    h_hat: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.h_hat = np.asarray(self.h_hat, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        m = self.h_hat.size
        if self.cov.shape != (m, m):
            raise ValueError(
                f"covariance shape {self.cov.shape} does not match {m} taps"
            )
        asym = np.max(np.abs(self.cov - self.cov.T), initial=0.0)
        if asym > _SYM_TOL * (1.0 + np.max(np.abs(self.cov), initial=0.0)):
            raise ValueError(f"covariance is asymmetric (max deviation {asym:g})")


@dataclass
class GenerativeModel:
    """Random-walk coefficient model with white-Gaussian excitation.

    Per trial, the true coefficient vector starts at a draw around ``h_init``
    and receives isotropic Gaussian increments of variance ``c_w``; each
    observation is the regressor inner product plus Gaussian noise of
    variance ``c_v``.  All streams are deterministic in ``seed``.
    """

    m: int
    c_w: float
    c_v: float
    h_init: np.ndarray
    seed: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"tap count must be >= 1, got {self.m}")
        if self.c_w < 0 or self.c_v < 0:
            raise ValueError("noise variances must be >= 0")
        self.h_init = np.asarray(self.h_init, dtype=float)
        if self.h_init.shape != (self.m,):
            raise ValueError(
                f"h_init shape {self.h_init.shape} does not match m={self.m}"
            )


def kalman_full_step(
    state: FullKalmanState, x, d: float, c_w: float, c_v: float
) -> FullKalmanState:
    """Full-covariance filter update (no scalar-variance approximation).

    Predict ``P = cov + c_w I``, apply the gain ``P x / (x'P x + c_v)`` and
    contract the covariance with ``(I - gain x') P``.  The result is
    symmetrized to keep floating-point asymmetry from accumulating.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != state.h_hat.shape:
        raise ValueError(
            f"input vector has length {x.size}, filter has {state.h_hat.size} taps"
        )
    p = state.cov + c_w * np.eye(state.h_hat.size)
    px = p @ x
    denom = float(x @ px + c_v)
    if denom == 0.0:
        raise ZeroDivisionError("singular gain denominator: x'Px + c_v is zero")
    gain = px / denom
    e = float(d - x @ state.h_hat)
    h_new = state.h_hat + gain * e
    cov_new = p - np.outer(gain, px)
    cov_new = 0.5 * (cov_new + cov_new.T)
    return FullKalmanState(h_new, cov_new)


def trace_average(cov) -> float:
    """Mean of the diagonal entries of a square matrix."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {cov.shape}")
    return float(np.trace(cov)) / cov.shape[0]


def scalar_variance_recursion(
    c_h0: float, c_w: float, c_v: float, m: int, steps: int
) -> np.ndarray:
    """Deterministic posterior-variance sequence at the expected energy.

    Evaluates the scalar-variance update with the regressor energy replaced
    by its expectation ``m`` (unit-variance white input).  Returns an array
    of length ``steps + 1``; entry ``t`` is the variance after ``t`` updates.
    """
    seq = np.empty(steps + 1)
    seq[0] = c_h0
    c = c_h0
    for t in range(steps):
        lam = (c + c_w) / (m * (c + c_w) + c_v)
        c = (1.0 - lam) * (c + c_w)
        seq[t + 1] = c
    return seq


def mc_optimal_stepsize(
    model: GenerativeModel,
    hyper: EmHyper,
    c_h0: float,
    steps: int,
    trials: int,
) -> float:
    """Ensemble estimate of the optimal stepsize at the final step.

    Simulates ``trials`` independent realizations of the generative model and
    runs the ``em_nlms`` coefficient update on each, with the posterior
    variance pinned to :func:`scalar_variance_recursion` and no online
    variance re-estimation.  Returns the ratio of the mean squared distance
    between the true and the (pre-update) estimated coefficients, per tap,
    to the mean squared a-priori error, both taken at step ``steps``.

    The initial true coefficients are drawn around ``model.h_init`` with
    variance ``c_h0`` so that the ensemble starts consistent with the
    filter's prior.  Trial ``i`` uses seed ``model.seed + i``; the reduction
    over trials runs in fixed index order.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    m = model.m
    c_seq = scalar_variance_recursion(c_h0, hyper.c_w, hyper.c_v, m, steps)
    sq_dist = np.empty(trials)
    sq_err = np.empty(trials)
    for i in range(trials):
        rng = np.random.default_rng(model.seed + i)
        h_true = model.h_init + np.sqrt(c_h0) * rng.standard_normal(m)
        w_all = np.sqrt(model.c_w) * rng.standard_normal((steps, m))
        x_all = rng.standard_normal((steps, m))
        v_all = np.sqrt(model.c_v) * rng.standard_normal(steps)
        h_hat = model.h_init.copy()
        for t in range(steps):
            h_true = h_true + w_all[t]
            x = x_all[t]
            d = float(x @ h_true + v_all[t])
            state = FilterState(h_hat, c_seq[t])
            if t == steps - 1:
                diff = h_true - h_hat
                sq_dist[i] = diff @ diff
                e = float(d - x @ h_hat)
                sq_err[i] = e * e
            state, _ = em_nlms_e_step(state, hyper, x, d)
            h_hat = state.h_hat
    mean_err = float(sq_err.mean())
    if mean_err == 0.0:
        raise DegenerateEnsembleError("ensemble mean squared error is zero")
    return float(sq_dist.mean()) / m / mean_err
