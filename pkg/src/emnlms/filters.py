"""Per-sample update kernels for the three adaptive filters.

All three algorithms share the coefficient update ``h <- h + lambda * x * e``
and differ only in how the stepsize ``lambda`` is chosen:

* ``em_nlms``    -- a Kalman-style update with a scalar posterior variance,
  where the observation- and process-noise variances are re-estimated online
  after every sample (:func:`em_nlms_e_step` / :func:`em_nlms_m_step`).
* ``adapt_nlms`` -- the classic variable stepsize built from the leading
  (artificially delayed) coefficients and a recursively smoothed error power
  (:func:`adapt_nlms_step`).
* ``conv_nlms``  -- conventional NLMS with a fixed numerator and an optional
  energy gate that freezes adaptation in signal pauses
  (:func:`conv_nlms_step`).

Every operation is a pure function of ``(state, inputs)`` returning fresh
state; nothing here touches shared mutable data, so independent runs can be
driven concurrently as long as each run feeds its samples in order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FilterState",
    "EmHyper",
    "AdaptNlmsState",
    "ConvNlmsState",
    "StepOutcome",
    "error_signal",
    "lambda_em",
    "em_nlms_e_step",
    "em_nlms_m_step",
    "process_noise_raw",
    "adapt_nlms_step",
    "adapt_nlms_bootstrap_step",
    "conv_nlms_step",
]


def _as_coeffs(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"coefficient vector must be 1-D, got shape {arr.shape}")
    return arr


def _check_lengths(x: np.ndarray, h_hat: np.ndarray) -> None:
    if x.shape != h_hat.shape:
        raise ValueError(
            f"input vector has length {x.shape[0]}, filter has {h_hat.shape[0]} taps"
        )


@dataclass
class FilterState:
    """Adaptive coefficients plus the scalar posterior variance of em_nlms."""

    h_hat: np.ndarray
    c_h: float

    def __post_init__(self):
        self.h_hat = _as_coeffs(self.h_hat)
        if self.c_h < 0:
            raise ValueError(f"posterior variance must be >= 0, got {self.c_h}")


@dataclass
class EmHyper:
    """Noise-variance parameters of em_nlms, re-estimated every sample.

    ``eps`` regularizes the stepsize denominator.  It is normally positive
    (0.01 by default in the experiment configs); 0 is accepted so the update
    can be compared against its unregularized full-covariance counterpart.
    """

    c_v: float
    c_w: float
    eps: float

    def __post_init__(self):
        if self.c_v < 0 or self.c_w < 0:
            raise ValueError(
                f"noise variances must be >= 0, got c_v={self.c_v}, c_w={self.c_w}"
            )
        if self.eps < 0:
            raise ValueError(f"regularizer must be >= 0, got {self.eps}")


@dataclass
class AdaptNlmsState:
    """State of the variable-stepsize NLMS driven by the leading coefficients.

    ``err_power`` carries the recursive estimate of the previous squared
    error, ``n_t`` is the number of leading (delay) coefficients feeding the
    stepsize numerator, ``eta`` the forgetting factor and ``lambda_cap`` an
    optional absolute stepsize limit.
    """

    h_hat: np.ndarray
    err_power: float
    n_t: int
    eta: float
    lambda_cap: float | None = None

    def __post_init__(self):
        self.h_hat = _as_coeffs(self.h_hat)
        if self.err_power < 0:
            raise ValueError(f"error power must be >= 0, got {self.err_power}")
        if not 0 <= self.eta < 1:
            raise ValueError(f"forgetting factor must be in [0, 1), got {self.eta}")
        if not 1 <= self.n_t <= self.h_hat.size:
            raise ValueError(
                f"delay coefficient count must be in [1, {self.h_hat.size}], got {self.n_t}"
            )
        if self.lambda_cap is not None and self.lambda_cap <= 0:
            raise ValueError(f"stepsize cap must be > 0, got {self.lambda_cap}")


@dataclass
class ConvNlmsState:
    """State of conventional NLMS: fixed numerator, optional energy gate."""

    h_hat: np.ndarray
    mu: float = 0.5
    gate_threshold: float | None = None

    def __post_init__(self):
        self.h_hat = _as_coeffs(self.h_hat)
        if self.mu <= 0:
            raise ValueError(f"stepsize numerator must be > 0, got {self.mu}")
        if self.gate_threshold is not None and self.gate_threshold < 0:
            raise ValueError(f"gate threshold must be >= 0, got {self.gate_threshold}")


@dataclass(frozen=True)
class StepOutcome:
    """Per-sample byproducts: a-priori error, stepsize, normalized stepsize."""

    e: float
    lam: float
    alpha: float  # always lam * (x'x) with the energy the step computed


def error_signal(x, h_hat, d: float) -> float:
    """A-priori error ``d - x'h_hat`` of one sample."""
    x = np.asarray(x, dtype=float)
    h_hat = np.asarray(h_hat, dtype=float)
    _check_lengths(x, h_hat)
    return float(d - x @ h_hat)


def lambda_em(c_h_prev, c_w, c_v, energy, eps):
    """Scalar stepsize of em_nlms.

    ``(c_h_prev + c_w) / (energy * (c_h_prev + c_w) + c_v + eps)``.  With
    nonnegative variances and ``c_v + eps > 0`` the normalized stepsize
    ``lambda * energy`` always lies in [0, 1).  Plain arithmetic, so array
    arguments broadcast elementwise.
    """
    total = c_h_prev + c_w
    return total / (energy * total + c_v + eps)


def em_nlms_e_step(
    state: FilterState, hyper: EmHyper, x, d: float
) -> tuple[FilterState, StepOutcome]:
    """MMSE coefficient update of em_nlms for one sample.

    Computes the a-priori error, the scalar stepsize from the current
    variances, and updates both the coefficients and the scalar posterior
    variance ``c_h``.  The posterior variance stays nonnegative because the
    normalized stepsize is below 1.
    """
    x = np.asarray(x, dtype=float)
    _check_lengths(x, state.h_hat)
    m = x.size
    energy = float(x @ x)
    e = float(d - x @ state.h_hat)
    lam = float(lambda_em(state.c_h, hyper.c_w, hyper.c_v, energy, hyper.eps))
    h_new = state.h_hat + (lam * e) * x
    c_h_new = (1.0 - lam * energy / m) * (state.c_h + hyper.c_w)
    return FilterState(h_new, c_h_new), StepOutcome(e, lam, lam * energy)


def process_noise_raw(state_after: FilterState, state_before: FilterState) -> float:
    """Unfloored process-noise estimate: change of the posterior variance plus
    the per-tap change of the coefficient autocorrelation."""
    h_a = state_after.h_hat
    h_b = state_before.h_hat
    _check_lengths(h_a, h_b)
    m = h_a.size
    return float(state_after.c_h - state_before.c_h + (h_a @ h_a - h_b @ h_b) / m)


def em_nlms_m_step(
    state_after: FilterState,
    state_before: FilterState,
    x,
    d: float,
    hyper: EmHyper,
) -> EmHyper:
    """Online re-estimation of the noise variances after a coefficient update.

    The observation-noise estimate combines the squared a-posteriori error
    (using the updated coefficients) with the energy-weighted posterior
    variance; the process-noise estimate is the autocorrelation difference
    from :func:`process_noise_raw`, floored at 0 because a negative variance
    would break the stepsize positivity on the next sample.  The returned
    parameters seed the next sample's update.
    """
    x = np.asarray(x, dtype=float)
    _check_lengths(x, state_after.h_hat)
    energy = float(x @ x)
    e_post = float(d - x @ state_after.h_hat)
    c_v_new = e_post * e_post + energy * state_after.c_h
    c_w_new = max(process_noise_raw(state_after, state_before), 0.0)
    return EmHyper(c_v=c_v_new, c_w=c_w_new, eps=hyper.eps)


def adapt_nlms_step(
    state: AdaptNlmsState, x, d: float, eps: float
) -> tuple[AdaptNlmsState, StepOutcome]:
    """One update of the variable-stepsize NLMS.

    The stepsize is the mean square of the first ``n_t`` coefficients over a
    recursively smoothed error power; ``lambda_cap``, if set, limits it.  The
    error-power recursion is advanced with the raw a-priori error regardless
    of capping.
    """
    x = np.asarray(x, dtype=float)
    _check_lengths(x, state.h_hat)
    energy = float(x @ x)
    e = float(d - x @ state.h_hat)
    head = state.h_hat[: state.n_t]
    smoothed = (1.0 - state.eta) * e * e + state.eta * state.err_power
    lam = float(head @ head) / state.n_t / (smoothed + eps)
    if state.lambda_cap is not None:
        lam = min(lam, state.lambda_cap)
    h_new = state.h_hat + (lam * e) * x
    new_state = AdaptNlmsState(
        h_new, smoothed, state.n_t, state.eta, state.lambda_cap
    )
    return new_state, StepOutcome(e, lam, lam * energy)


def adapt_nlms_bootstrap_step(
    state: AdaptNlmsState, x, d: float, eps: float, mu: float = 0.5
) -> tuple[AdaptNlmsState, StepOutcome]:
    """Fixed-numerator warm-up step for a cold-started variable-stepsize NLMS.

    With all-zero coefficients the regular stepsize numerator is zero and the
    filter would never move, so the harness applies one conventional update
    ``lambda = mu / (x'x + eps)`` to seed the leading coefficients.  The
    error-power recursion advances exactly as in :func:`adapt_nlms_step`.
    """
    x = np.asarray(x, dtype=float)
    _check_lengths(x, state.h_hat)
    energy = float(x @ x)
    e = float(d - x @ state.h_hat)
    lam = mu / (energy + eps)
    h_new = state.h_hat + (lam * e) * x
    smoothed = (1.0 - state.eta) * e * e + state.eta * state.err_power
    new_state = AdaptNlmsState(
        h_new, smoothed, state.n_t, state.eta, state.lambda_cap
    )
    return new_state, StepOutcome(e, lam, lam * energy)


def conv_nlms_step(
    state: ConvNlmsState, x, d: float, eps: float
) -> tuple[ConvNlmsState, StepOutcome]:
    """One conventional NLMS update, ``lambda = mu / (x'x + eps)``.

    When a gate threshold is set and the input energy falls below it the
    stepsize is forced to 0, freezing adaptation for that sample.
    """
    x = np.asarray(x, dtype=float)
    _check_lengths(x, state.h_hat)
    energy = float(x @ x)
    e = float(d - x @ state.h_hat)
    if state.gate_threshold is not None and energy < state.gate_threshold:
        lam = 0.0
    else:
        lam = state.mu / (energy + eps)
    h_new = state.h_hat + (lam * e) * x
    new_state = ConvNlmsState(h_new, state.mu, state.gate_threshold)
    return new_state, StepOutcome(e, lam, lam * energy)
