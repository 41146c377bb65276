"""Fixed-point threshold datapath and comparator stage.

Mirrors the block structure of the detection front end: the threshold is
computed with the LUT logarithm and the non-restoring square root instead of
libm calls, and the comparator turns the initial DFT into a bit vector. The
adders and multipliers around those primitives are modeled at value level in
double precision; only the log and root stages are bit-true.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .hw_primitives import FixedLog, SqrtResult, lut_log2, nr_sqrt
from .recon_core import (
    AmpMode,
    DetectionResult,
    ReconstructionResult,
    ThresholdConfig,
    ThresholdVariant,
    build_cs_matrix,
    effective_threshold,
    idft,
    initial_dft,
    ls_solve,
    missing_noise_variance,
    spectral_positioning,
)
from .signal_model import Measurement, estimate_sum_sq_amplitudes

__all__ = [
    "ComparatorBits",
    "FixedThresholdTrace",
    "Part1Result",
    "threshold_fixed",
    "comparator",
    "part1_pipeline",
    "reconstruct_hardware",
    "write_trace_csv",
]

_LOG2_10 = math.log2(10.0)
_LN_10 = math.log(10.0)
_U32_MAX = (1 << 32) - 1


@dataclass(frozen=True, eq=False)
class ComparatorBits:
    """Per-bin comparator outputs: 1 where the magnitude exceeds the threshold."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.uint8).copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def count_ones(self) -> int:
        return int(self.bits.sum())

    def positions(self) -> np.ndarray:
        """Indices of the set bits, ascending."""
        return np.flatnonzero(self.bits).astype(np.int64)


@dataclass(frozen=True)
class FixedThresholdTrace:
    """Stage-by-stage record of the fixed-point threshold computation.

    ``var_fixed`` is the Q15 image of the variance, ``log_term`` the raw LUT
    logarithm of 1 - p**(1/n), ``root_in``/``root_out`` the integer square
    root stage, ``scale_shift`` the even power of two applied to fit the
    root argument into 32 bits, and ``t_fixed`` the rescaled final value.
    """

    var_fixed: int
    log_term: FixedLog
    root_in: int
    root_out: SqrtResult
    t_fixed: float
    scale_shift: int


class Part1Result(NamedTuple):
    bits: ComparatorBits
    trace: FixedThresholdTrace
    spectrum: np.ndarray


def threshold_fixed(
    n: int,
    n_a: int,
    sum_sq_amp: float,
    p: float,
    variant: ThresholdVariant = ThresholdVariant.REF10,
) -> FixedThresholdTrace:
    """Threshold computed through the fixed-point primitives.

    The logarithm goes through the Q15 LUT, the square root through the
    32-bit non-restoring unit. The root argument is prescaled by an even
    power of two so its most significant bit lands at position 29 or 30,
    then the root is post-scaled by half that exponent; even shifts keep the
    rescaling exact. Stays within 1e-3 relative of the double-precision
    threshold across the supported variance range.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie strictly in (0, 1), got {p}")
    variant = ThresholdVariant(variant)
    var = missing_noise_variance(n, n_a, sum_sq_amp)

    # the n-th root of p has no dedicated hardware unit; host precision
    u = 1.0 - math.exp(math.log(p) / n)
    log_term = lut_log2(u)
    log10_u = log_term.value / _LOG2_10
    if variant is ThresholdVariant.PAPER:
        root_arg = -(var * var) * log10_u
    else:
        root_arg = -var * (log10_u * _LN_10)

    if root_arg <= 0.0:
        root_in = 0
        root_out = nr_sqrt(0)
        shift = 0
        root_value = 0.0
    else:
        _, exp = math.frexp(root_arg)  # root_arg in [2**(exp-1), 2**exp)
        shift = 30 - exp
        if shift % 2:
            shift += 1
        root_in = round(math.ldexp(root_arg, shift))
        assert 0 <= root_in <= _U32_MAX, "prescaled root input left 32-bit range"
        root_out = nr_sqrt(root_in)
        root_value = math.ldexp(root_out.root, -(shift // 2))

    t_fixed = root_value / n if variant is ThresholdVariant.PAPER else root_value
    return FixedThresholdTrace(
        var_fixed=round(math.ldexp(var, 15)),
        log_term=log_term,
        root_in=root_in,
        root_out=root_out,
        t_fixed=t_fixed,
        scale_shift=shift,
    )


def comparator(v_spec: np.ndarray, t: float) -> ComparatorBits:
    """Bit per bin: 1 when the magnitude strictly exceeds the threshold."""
    if t < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    v_spec = np.asarray(v_spec, dtype=complex)
    return ComparatorBits(bits=(np.abs(v_spec) > t).astype(np.uint8))


def part1_pipeline(
    meas: Measurement,
    cfg: ThresholdConfig,
    sum_sq_amp: float | None = None,
) -> Part1Result:
    """Detection front end: initial DFT, fixed-point threshold, comparator.

    The comparator level is floored at the transform's rounding-dust scale,
    mirroring the reference pipeline's zero-variance behavior.
    """
    v_spec = initial_dft(meas)
    if cfg.amp_mode is AmpMode.ORACLE:
        if sum_sq_amp is None:
            raise ValueError("oracle amplitude mode requires sum_sq_amp")
        ssa = float(sum_sq_amp)
    else:
        ssa = estimate_sum_sq_amplitudes(meas)
    trace = threshold_fixed(meas.pattern.n, meas.pattern.n_a, ssa, cfg.p, cfg.variant)
    bits = comparator(v_spec, effective_threshold(trace.t_fixed, v_spec))
    return Part1Result(bits=bits, trace=trace, spectrum=v_spec)


def reconstruct_hardware(
    meas: Measurement,
    cfg: ThresholdConfig,
    sum_sq_amp: float | None = None,
) -> tuple[ReconstructionResult, FixedThresholdTrace]:
    """Full reconstruction with detection driven by the fixed-point path.

    The matrix arithmetic past the comparator is the shared double-precision
    implementation; only the threshold stage differs from the reference.
    """
    bits, trace, _ = part1_pipeline(meas, cfg, sum_sq_amp)
    n = meas.pattern.n
    pos = bits.positions()
    if cfg.amp_mode is AmpMode.ORACLE:
        ssa = float(sum_sq_amp)  # validated inside part1_pipeline
    else:
        ssa = estimate_sum_sq_amplitudes(meas)
    var = missing_noise_variance(n, meas.pattern.n_a, ssa)
    detection = DetectionResult(threshold=trace.t_fixed, variance=var, positions=pos)
    if pos.size == 0:
        zeros = np.zeros(n, dtype=complex)
        result = ReconstructionResult(
            amplitudes=np.zeros(0, dtype=complex),
            spectrum=zeros,
            time_signal=zeros.copy(),
            detection=detection,
            empty_support=True,
        )
        return result, trace
    a_cs = build_cs_matrix(n, meas.pattern, pos)
    x_tp = ls_solve(a_cs, meas.values)
    spectrum = spectral_positioning(x_tp, pos, n)
    result = ReconstructionResult(
        amplitudes=x_tp,
        spectrum=spectrum,
        time_signal=idft(spectrum),
        detection=detection,
    )
    return result, trace


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(path, trace: FixedThresholdTrace) -> None:
    """Dump the threshold datapath stages as ``stage,raw_value,scaled_value``."""
    half_shift = trace.scale_shift // 2
    rows = [
        ("variance", trace.var_fixed, _fmt(math.ldexp(trace.var_fixed, -15))),
        ("log2_term", trace.log_term.raw, _fmt(trace.log_term.value)),
        ("root_in", trace.root_in, _fmt(math.ldexp(trace.root_in, -trace.scale_shift))),
        ("root", trace.root_out.root, _fmt(math.ldexp(trace.root_out.root, -half_shift))),
        ("remainder", trace.root_out.remainder, _fmt(math.ldexp(trace.root_out.remainder, -trace.scale_shift))),
        ("scale_shift", trace.scale_shift, str(trace.scale_shift)),
        ("threshold", "", _fmt(trace.t_fixed)),
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "raw_value", "scaled_value"])
        writer.writerows(rows)
