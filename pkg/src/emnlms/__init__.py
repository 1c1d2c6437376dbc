"""Streaming NLMS-family adaptive filters for acoustic echo cancellation.

The package provides three per-sample filter kernels (EM-NLMS with an online
learned stepsize, the delay-coefficients variable-stepsize NLMS, and
conventional NLMS), a synthetic echo-cancellation scenario generator, full
reference implementations for validation, and a reproducible experiment
runner with a CLI (``emnlms run <config>``).
"""

from .config import ConfigError, ScenarioConfig, parse_config
from .filters import (
    AdaptNlmsState,
    ConvNlmsState,
    EmHyper,
    FilterState,
    StepOutcome,
    adapt_nlms_bootstrap_step,
    adapt_nlms_step,
    conv_nlms_step,
    em_nlms_e_step,
    em_nlms_m_step,
    error_signal,
    lambda_em,
    process_noise_raw,
)
from .metrics import TraceRecord, normalized_alpha, system_distance_db
from .oracles import (
    FullKalmanState,
    GenerativeModel,
    kalman_full_step,
    mc_optimal_stepsize,
    scalar_variance_recursion,
    trace_average,
)
from .runner import RunResult, run_experiment
from .signals import (
    DegenerateScenarioError,
    RirSpec,
    SignalStream,
    gen_speechlike,
    gen_white_noise,
    read_rir_csv,
    simulate_microphone,
    synth_rir,
    write_rir_csv,
)
from .wavio import WavEncodingError, WavError, WavFormatError, read_wav, write_wav

__version__ = "0.1.0"
