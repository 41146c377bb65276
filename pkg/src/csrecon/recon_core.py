"""Reference reconstruction pipeline in double precision.

The chain: form the initial DFT from the available samples placed at their
original time positions, model the spectral noise caused by the missing
samples, derive a detection threshold, pick the bins above it, and solve a
small least-squares system on a partial DFT matrix to recover the exact
amplitudes at the detected bins. The zero-filled spectrum is then inverted
back to the time domain. Everything here is a pure function; the fixed-point
counterpart of the threshold stage lives in :mod:`csrecon.hw_datapath`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal_model import Measurement, SamplingPattern, estimate_sum_sq_amplitudes

__all__ = [
    "ThresholdVariant",
    "AmpMode",
    "ThresholdConfig",
    "DetectionResult",
    "ReconstructionResult",
    "EmptySupportError",
    "UnderdeterminedError",
    "SingularSystemError",
    "initial_dft",
    "missing_noise_variance",
    "threshold",
    "detect_positions",
    "effective_threshold",
    "build_cs_matrix",
    "hermitian",
    "ls_solve",
    "spectral_positioning",
    "idft",
    "reconstruct",
    "write_spectrum_csv",
    "write_detection_csv",
]


class EmptySupportError(ValueError):
    """No bins were detected; there is nothing to solve for."""


class UnderdeterminedError(ValueError):
    """More unknown bins than available measurements."""


class SingularSystemError(ValueError):
    """The normal-equation matrix is numerically singular."""


class ThresholdVariant(str, Enum):
    """Which closed form the threshold uses.

    ``paper``: T = (1/n) * sqrt(-var**2 * log10(1 - P**(1/n)))
    ``ref10``: T = sqrt(-var * ln(1 - P**(1/n)))

    The ``ref10`` form matches the exponential tail statistics of the
    missing-sample noise and is the default; ``paper`` keeps the
    squared-variance, base-10 form available for comparison.
    """

    PAPER = "paper"
    REF10 = "ref10"


class AmpMode(str, Enum):
    """Where the sum of squared amplitudes comes from: supplied by the
    caller (``oracle``) or estimated from the measurement power
    (``estimate``)."""

    ORACLE = "oracle"
    ESTIMATE = "estimate"


@dataclass(frozen=True)
class ThresholdConfig:
    """Detection settings: confidence level, threshold form, amplitude source."""

    p: float
    variant: ThresholdVariant = ThresholdVariant.REF10
    amp_mode: AmpMode = AmpMode.ORACLE

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "variant", ThresholdVariant(self.variant))
        object.__setattr__(self, "amp_mode", AmpMode(self.amp_mode))
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"probability must lie strictly in (0, 1), got {self.p}")


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Threshold, modeled noise variance, and the detected bin indices."""

    threshold: float
    variance: float
    positions: np.ndarray

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.int64).copy()
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @property
    def n_detected(self) -> int:
        return int(self.positions.size)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Solved amplitudes, zero-filled spectrum, time signal, and detection info."""

    amplitudes: np.ndarray
    spectrum: np.ndarray
    time_signal: np.ndarray
    detection: DetectionResult
    empty_support: bool = False


def initial_dft(meas: Measurement, n: int | None = None) -> np.ndarray:
    """DFT of the available samples placed at their original time positions.

    Returns the length-n complex vector with
    ``V[f] = sum_a v[a] * exp(-2j*pi*f*positions[a]/n)``.
    Using the original positions in the exponent is what keeps the signal
    bins aligned with the full-data DFT.
    """
    if meas.values.size == 0:
        raise ValueError("measurement is empty")
    if n is None:
        n = meas.pattern.n
    elif int(n) != meas.pattern.n:
        raise ValueError(f"length {n} does not match pattern length {meas.pattern.n}")
    freqs = np.arange(n)
    kernel = np.exp(-2j * np.pi * np.outer(freqs, meas.pattern.positions) / n)
    return kernel @ meas.values


def missing_noise_variance(n: int, n_a: int, sum_sq_amp: float) -> float:
    """Variance of the spectral noise caused by the missing samples.

    ``var = (n - n_a) * n_a / (n - 1) * sum_sq_amp``: randomly omitting
    samples perturbs every DFT bin, and the perturbation's second moment
    follows the without-replacement sampling variance of the phase sums.
    """
    n = int(n)
    n_a = int(n_a)
    sum_sq_amp = float(sum_sq_amp)
    if n < 2:
        raise ValueError(f"signal length must be at least 2, got {n}")
    if not 1 <= n_a <= n:
        raise ValueError(f"available count {n_a} outside [1, {n}]")
    if sum_sq_amp < 0.0:
        raise ValueError(f"sum of squared amplitudes must be nonnegative, got {sum_sq_amp}")
    return (n - n_a) * n_a / (n - 1) * sum_sq_amp


def threshold(var: float, n: int, cfg: ThresholdConfig) -> float:
    """Magnitude level separating signal bins from missing-sample noise.

    With confidence ``cfg.p`` all noise bins stay below the returned level.
    The argument of the square root is nonnegative for every valid input
    because 0 < 1 - p**(1/n) < 1 makes the logarithm negative.
    """
    var = float(var)
    if var < 0.0:
        raise ValueError(f"variance must be nonnegative, got {var}")
    u = 1.0 - cfg.p ** (1.0 / n)
    if cfg.variant is ThresholdVariant.PAPER:
        return (1.0 / n) * math.sqrt(-(var * var) * math.log10(u))
    return math.sqrt(-var * math.log(u))


def detect_positions(v_spec: np.ndarray, t: float) -> np.ndarray:
    """Indices of the bins strictly above the threshold, ascending."""
    if t < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    v_spec = np.asarray(v_spec, dtype=complex)
    return np.flatnonzero(np.abs(v_spec) > t).astype(np.int64)


_DUST_FLOOR_REL = 1e-9


def effective_threshold(t: float, v_spec: np.ndarray) -> float:
    """Detection level actually used by the pipelines.

    Never drops below 1e-9 of the spectral peak: bins that are zero in
    exact arithmetic carry double-precision rounding dust, and with no
    missing samples the modeled threshold is exactly zero, which would
    otherwise flag every bin. Away from that corner the floor is orders of
    magnitude below any modeled threshold and has no effect.
    """
    v_spec = np.asarray(v_spec, dtype=complex)
    peak = float(np.max(np.abs(v_spec))) if v_spec.size else 0.0
    return max(float(t), _DUST_FLOOR_REL * peak)


def build_cs_matrix(n: int, pattern: SamplingPattern, pos: np.ndarray) -> np.ndarray:
    """Partial inverse-DFT matrix: available-sample rows, detected-bin columns.

    ``a[m, i] = (1/n) * exp(+2j*pi*positions[m]*pos[i]/n)``. With this
    convention the measurement equals the matrix applied to the unnormalized
    DFT restricted to the detected bins, so the solved amplitudes land on the
    same scale as the initial DFT.
    """
    n = int(n)
    pos = np.asarray(pos, dtype=np.int64)
    if pos.size == 0:
        raise EmptySupportError("no detected bins to build the matrix from")
    if pos.size > pattern.n_a:
        raise UnderdeterminedError(
            f"{pos.size} detected bins but only {pattern.n_a} measurements"
        )
    return np.exp(2j * np.pi * np.outer(pattern.positions, pos) / n) / n


def hermitian(mtx: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(mtx).conj().T


def _solve_qr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve the square complex system a @ x = b by Householder QR.

    Reflections are applied in place to both the matrix and the right-hand
    side, followed by back-substitution. Raises
    :class:`SingularSystemError` when the triangular factor has a diagonal
    entry below 1e-10 of the largest one.
    """
    r = np.array(a, dtype=complex)
    y = np.array(b, dtype=complex)
    k = r.shape[0]
    for j in range(k):
        col = r[j:, j]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            continue
        # phase-aligned sign choice avoids cancellation in v[0]
        pivot = col[0]
        sign = pivot / abs(pivot) if pivot != 0.0 else 1.0
        v = col.copy()
        v[0] += sign * nrm
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        r[j:, j:] -= 2.0 * np.outer(v, v.conj() @ r[j:, j:])
        y[j:] -= 2.0 * v * (v.conj() @ y[j:])
    diag = np.abs(np.diag(r))
    if diag.max() == 0.0 or diag.min() < 1e-10 * diag.max():
        raise SingularSystemError(
            "normal-equation matrix is numerically singular "
            f"(diagonal spread {diag.min():.3e} / {diag.max():.3e})"
        )
    x = np.zeros(k, dtype=complex)
    for i in range(k - 1, -1, -1):
        x[i] = (y[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
    return x


def ls_solve(a_cs: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Least-squares amplitudes on the detected bins.

    Forms the normal equations (the conjugate-transpose products) and solves
    them by Householder QR with back-substitution. For a consistent system,
    i.e. the true support under noiseless sampling, the solution is exactly
    n times the component amplitudes.
    """
    a_cs = np.asarray(a_cs, dtype=complex)
    v = np.asarray(v, dtype=complex)
    rows, cols = a_cs.shape
    if rows < cols:
        raise UnderdeterminedError(f"{cols} unknowns but only {rows} measurements")
    if v.shape != (rows,):
        raise ValueError(f"right-hand side length {v.shape} does not match {rows} rows")
    ah = hermitian(a_cs)
    return _solve_qr(ah @ a_cs, ah @ v)


def spectral_positioning(x_tp: np.ndarray, pos: np.ndarray, n: int) -> np.ndarray:
    """Place the solved amplitudes at their bins; all other bins are zero."""
    x_tp = np.asarray(x_tp, dtype=complex)
    pos = np.asarray(pos, dtype=np.int64)
    if x_tp.size != pos.size:
        raise ValueError(f"{x_tp.size} amplitudes for {pos.size} positions")
    spectrum = np.zeros(int(n), dtype=complex)
    spectrum[pos] = x_tp
    return spectrum


def idft(x_spec: np.ndarray) -> np.ndarray:
    """Inverse DFT, ``x[t] = (1/n) * sum_f X[f] * exp(+2j*pi*f*t/n)``."""
    return np.fft.ifft(np.asarray(x_spec, dtype=complex))


def reconstruct(
    meas: Measurement,
    cfg: ThresholdConfig,
    sum_sq_amp: float | None = None,
) -> ReconstructionResult:
    """Run the full pipeline on one measurement.

    ``sum_sq_amp`` is required in oracle amplitude mode and ignored in
    estimate mode, where the measurement power supplies it. An empty support
    is a legitimate outcome reported through ``empty_support`` with a zero
    spectrum; underdetermined and singular systems raise instead.
    """
    n = meas.pattern.n
    v_spec = initial_dft(meas)
    if cfg.amp_mode is AmpMode.ORACLE:
        if sum_sq_amp is None:
            raise ValueError("oracle amplitude mode requires sum_sq_amp")
        ssa = float(sum_sq_amp)
    else:
        ssa = estimate_sum_sq_amplitudes(meas)
    var = missing_noise_variance(n, meas.pattern.n_a, ssa)
    t = threshold(var, n, cfg)
    pos = detect_positions(v_spec, effective_threshold(t, v_spec))
    detection = DetectionResult(threshold=t, variance=var, positions=pos)
    if pos.size == 0:
        zeros = np.zeros(n, dtype=complex)
        return ReconstructionResult(
            amplitudes=np.zeros(0, dtype=complex),
            spectrum=zeros,
            time_signal=zeros.copy(),
            detection=detection,
            empty_support=True,
        )
    a_cs = build_cs_matrix(n, meas.pattern, pos)
    x_tp = ls_solve(a_cs, meas.values)
    spectrum = spectral_positioning(x_tp, pos, n)
    return ReconstructionResult(
        amplitudes=x_tp,
        spectrum=spectrum,
        time_signal=idft(spectrum),
        detection=detection,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_spectrum_csv(path, spectrum: np.ndarray) -> None:
    """Write a spectrum as ``bin,re,im,magnitude`` rows."""
    spectrum = np.asarray(spectrum, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "re", "im", "magnitude"])
        for i, v in enumerate(spectrum):
            writer.writerow([i, _fmt(v.real), _fmt(v.imag), _fmt(abs(v))])


def write_detection_csv(path, detection: DetectionResult) -> None:
    """Write a one-row detection summary; positions are semicolon-separated."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "variance", "n_detected", "positions"])
        writer.writerow(
            [
                _fmt(detection.threshold),
                _fmt(detection.variance),
                detection.n_detected,
                ";".join(str(int(p)) for p in detection.positions),
            ]
        )
