"""Monte-Carlo harness: recovery sweeps, noise-model calibration, cross-path checks.

Each trial derives its own seed from the master seed and the trial index, so
results do not depend on execution order and can be distributed across
workers without changing the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hw_datapath import reconstruct_hardware, threshold_fixed
from .recon_core import (
    AmpMode,
    ReconstructionResult,
    ThresholdConfig,
    detect_positions,
    initial_dft,
    missing_noise_variance,
    reconstruct,
    threshold,
)
from .signal_model import (
    SparseSpec,
    random_pattern,
    sample,
    sum_sq_amplitudes,
    synthesize,
)

__all__ = [
    "derive_trial_seed",
    "Metrics",
    "compute_metrics",
    "run_recovery_trials",
    "CalibrationTrial",
    "CalibrationResult",
    "run_variance_calibration",
    "XcheckTrial",
    "XcheckResult",
    "run_threshold_xcheck",
]


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Stable per-trial seed from (master seed, trial index)."""
    seq = np.random.SeedSequence(entropy=[int(master_seed), int(trial_index)])
    return int(seq.generate_state(1)[0])


@dataclass(frozen=True)
class Metrics:
    """Quality figures for one reconstruction against the known truth."""

    support_exact: bool
    precision: float
    recall: float
    rel_mse_time: float
    threshold: float
    variance: float
    n_detected: int


def compute_metrics(
    result: ReconstructionResult,
    original: np.ndarray,
    true_support: np.ndarray,
) -> Metrics:
    """Support precision/recall and relative time-domain MSE."""
    original = np.asarray(original, dtype=complex)
    detected = set(int(i) for i in result.detection.positions)
    true = set(int(i) for i in np.asarray(true_support).ravel())
    hits = len(detected & true)
    precision = hits / len(detected) if detected else 1.0
    recall = hits / len(true) if true else 1.0
    denom = float(np.sum(np.abs(original) ** 2))
    err = float(np.sum(np.abs(result.time_signal - original) ** 2))
    rel_mse = err / denom if denom > 0.0 else err
    return Metrics(
        support_exact=detected == true,
        precision=precision,
        recall=recall,
        rel_mse_time=rel_mse,
        threshold=result.detection.threshold,
        variance=result.detection.variance,
        n_detected=result.detection.n_detected,
    )


def run_recovery_trials(
    spec: SparseSpec,
    n_a: int,
    cfg: ThresholdConfig,
    trials: int,
    master_seed: int,
    hardware: bool = False,
) -> list[Metrics]:
    """Reconstruct the same signal under independently drawn patterns."""
    x = synthesize(spec)
    ssa = sum_sq_amplitudes(spec) if cfg.amp_mode is AmpMode.ORACLE else None
    out = []
    for trial in range(int(trials)):
        seed = derive_trial_seed(master_seed, trial)
        meas = sample(x, random_pattern(spec.n, n_a, seed))
        if hardware:
            result, _ = reconstruct_hardware(meas, cfg, ssa)
        else:
            result = reconstruct(meas, cfg, ssa)
        out.append(compute_metrics(result, x, spec.freq_bins))
    return out


@dataclass(frozen=True)
class CalibrationTrial:
    trial: int
    seed: int
    noise_power_mean: float
    noise_mag_max: float
    all_below: bool


@dataclass(frozen=True)
class CalibrationResult:
    """Noise-model calibration over many random patterns.

    ``empirical_variance`` is the grand mean of |V|**2 over the non-signal
    bins, to be compared with ``model_variance``; ``p_hat`` is the fraction
    of trials where every noise bin stayed strictly below the threshold.
    """

    trials: tuple[CalibrationTrial, ...]
    threshold: float
    model_variance: float
    empirical_variance: float
    p_hat: float


def run_variance_calibration(
    spec: SparseSpec,
    n_a: int,
    cfg: ThresholdConfig,
    trials: int,
    master_seed: int,
) -> CalibrationResult:
    """Measure the noise-bin statistics of the initial DFT against the model.

    With no missing samples there is no missing-sample noise to test, so
    every trial counts as below the (zero) threshold vacuously.
    """
    x = synthesize(spec)
    ssa = sum_sq_amplitudes(spec)
    var = missing_noise_variance(spec.n, n_a, ssa)
    t = threshold(var, spec.n, cfg)
    noise_bins = np.setdiff1d(np.arange(spec.n), spec.freq_bins)
    vacuous = int(n_a) == spec.n
    rows = []
    below = 0
    for trial in range(int(trials)):
        seed = derive_trial_seed(master_seed, trial)
        meas = sample(x, random_pattern(spec.n, n_a, seed))
        noise_mags = np.abs(initial_dft(meas)[noise_bins])
        if vacuous or noise_mags.size == 0:
            all_below = True
        else:
            all_below = bool(noise_mags.max() < t)
        below += all_below
        rows.append(
            CalibrationTrial(
                trial=trial,
                seed=seed,
                noise_power_mean=float(np.mean(noise_mags**2)),
                noise_mag_max=float(noise_mags.max()) if noise_mags.size else 0.0,
                all_below=all_below,
            )
        )
    return CalibrationResult(
        trials=tuple(rows),
        threshold=t,
        model_variance=var,
        empirical_variance=float(np.mean([r.noise_power_mean for r in rows])),
        p_hat=below / len(rows) if rows else 1.0,
    )


@dataclass(frozen=True)
class XcheckTrial:
    trial: int
    seed: int
    threshold_ref: float
    threshold_fixed: float
    rel_err: float
    support_match: bool


@dataclass(frozen=True)
class XcheckResult:
    """Reference vs fixed-point threshold agreement over random patterns."""

    trials: tuple[XcheckTrial, ...]
    max_rel_err: float
    agreement_rate: float


def run_threshold_xcheck(
    spec: SparseSpec,
    n_a: int,
    cfg: ThresholdConfig,
    trials: int,
    master_seed: int,
) -> XcheckResult:
    """Compare thresholds and detected supports between the two paths."""
    x = synthesize(spec)
    ssa = sum_sq_amplitudes(spec)
    var = missing_noise_variance(spec.n, n_a, ssa)
    t_ref = threshold(var, spec.n, cfg)
    t_fix = threshold_fixed(spec.n, n_a, ssa, cfg.p, cfg.variant).t_fixed
    rel_err = abs(t_fix - t_ref) / t_ref if t_ref > 0.0 else abs(t_fix)
    rows = []
    matches = 0
    for trial in range(int(trials)):
        seed = derive_trial_seed(master_seed, trial)
        meas = sample(x, random_pattern(spec.n, n_a, seed))
        v_spec = initial_dft(meas)
        pos_ref = detect_positions(v_spec, t_ref)
        pos_fix = detect_positions(v_spec, t_fix)
        match = bool(np.array_equal(pos_ref, pos_fix))
        matches += match
        rows.append(
            XcheckTrial(
                trial=trial,
                seed=seed,
                threshold_ref=t_ref,
                threshold_fixed=t_fix,
                rel_err=rel_err,
                support_match=match,
            )
        )
    return XcheckResult(
        trials=tuple(rows),
        max_rel_err=max((r.rel_err for r in rows), default=rel_err),
        agreement_rate=matches / len(rows) if rows else 1.0,
    )
