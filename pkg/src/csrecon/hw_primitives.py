"""Software models of the FPGA-friendly numeric primitives.

Two primitives are modeled at bit level: a lookup-table logarithm working on
the mantissa/exponent split of a positive float, and a digit-by-digit
non-restoring square root over 32-bit unsigned integers. Both mirror what a
block-RAM table and a small adder/shifter datapath would compute, so results
are exactly reproducible integer for integer.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

__all__ = [
    "LOG_SCALE_BITS",
    "LUT_INDEX_BITS",
    "FloatDecomposition",
    "FixedLog",
    "SqrtResult",
    "decompose",
    "lut_log2",
    "lut_log10",
    "nr_sqrt",
    "nr_sqrt_batch",
    "fixed_sqrt_real",
    "log_lut_entries",
]

LOG_SCALE_BITS = 15  # log values are Q15: represented value = raw / 2**15
LUT_INDEX_BITS = 12  # 4096-entry table, a realistic block-RAM size

_LUT_SIZE = 1 << LUT_INDEX_BITS
_LOG_SCALE = 1 << LOG_SCALE_BITS
_LOG2_10 = math.log2(10.0)
_U32_MAX = (1 << 32) - 1


def _build_log_lut() -> np.ndarray:
    i = np.arange(_LUT_SIZE, dtype=np.float64)
    table = np.rint(_LOG_SCALE * np.log2(1.0 + i / _LUT_SIZE)).astype(np.int64)
    table.flags.writeable = False
    return table


_LOG_LUT = _build_log_lut()


def log_lut_entries() -> np.ndarray:
    """The 4096-entry base-2 log table (read-only); entry i holds
    round(2**15 * log2(1 + i/4096))."""
    return _LOG_LUT


class FloatDecomposition(NamedTuple):
    mantissa: float  # in [1, 2)
    exponent: int


class FixedLog(NamedTuple):
    """Q15 fixed-point logarithm: represented value is raw / 2**15."""

    raw: int

    @property
    def value(self) -> float:
        return self.raw / _LOG_SCALE


class SqrtResult(NamedTuple):
    root: int  # 16-bit floor square root
    remainder: int  # 17-bit remainder, input - root**2


def decompose(x: float) -> FloatDecomposition:
    """Split a positive finite float into mantissa in [1, 2) and exponent.

    Exact for every binary float, subnormals included: mantissa * 2**exponent
    reproduces the input bit for bit.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"expected a positive finite value, got {x}")
    m, e = math.frexp(x)  # m in [0.5, 1)
    return FloatDecomposition(mantissa=2.0 * m, exponent=e - 1)


def lut_log2(x: float) -> FixedLog:
    """Base-2 logarithm via table lookup on the truncated mantissa.

    raw = exponent * 2**15 + table[floor((mantissa - 1) * 2**12)].
    Exact at powers of two; worst-case error is one table step plus entry
    rounding, about 3.7e-4 in log2 units.
    """
    mantissa, exponent = decompose(x)
    idx = int((mantissa - 1.0) * _LUT_SIZE)  # truncation, never interpolated
    return FixedLog(raw=exponent * _LOG_SCALE + int(_LOG_LUT[idx]))


def lut_log10(x: float) -> float:
    """Base-10 logarithm derived from the base-2 table via the constant
    1/log2(10). Absolute error stays below 5e-4."""
    return lut_log2(x).value / _LOG2_10


def nr_sqrt(b: int) -> SqrtResult:
    """Non-restoring square root of a 32-bit unsigned integer.

    Processes two input bits per step, high pair first. A negative partial
    remainder is not restored; the next step adds instead of subtracts, and
    a single correction at the end fixes a leftover negative remainder.
    Returns the floor square root (16 bits) and the remainder (17 bits).
    """
    b = int(b)
    if not 0 <= b <= _U32_MAX:
        raise ValueError(f"input must fit in 32 bits, got {b}")
    root = 0
    rem = 0
    for i in range(15, -1, -1):
        pair = (b >> (2 * i)) & 3
        if rem >= 0:
            rem = (rem << 2) + pair - ((root << 2) | 1)
        else:
            rem = (rem << 2) + pair + ((root << 2) | 3)
        if rem >= 0:
            root = (root << 1) | 1
        else:
            root = root << 1
    if rem < 0:
        rem += (root << 1) | 1
    return SqrtResult(root=root, remainder=rem)


def nr_sqrt_batch(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`nr_sqrt` over an array of 32-bit unsigned values.

    Runs the identical recurrence on int64 lanes; used by the sweep and
    verification harnesses where millions of inputs are checked.
    """
    b = np.asarray(values, dtype=np.int64)
    if b.size and (b.min() < 0 or b.max() > _U32_MAX):
        raise ValueError("inputs must fit in 32 bits")
    root = np.zeros(b.shape, dtype=np.int64)
    rem = np.zeros(b.shape, dtype=np.int64)
    for i in range(15, -1, -1):
        pair = (b >> (2 * i)) & 3
        nonneg = rem >= 0
        appended = (rem << 2) + pair
        rem = np.where(nonneg, appended - ((root << 2) | 1), appended + ((root << 2) | 3))
        root = (root << 1) + (rem >= 0)
    rem = np.where(rem < 0, rem + (root << 1) + 1, rem)
    return root, rem


def fixed_sqrt_real(x: float, frac_bits: int = 8) -> float:
    """Square root of a nonnegative real through the integer datapath.

    The input is scaled by 2**(2*frac_bits), rounded to an integer, rooted
    with :func:`nr_sqrt`, and the root rescaled by 2**frac_bits.
    """
    x = float(x)
    if x < 0.0 or not math.isfinite(x):
        raise ValueError(f"expected a nonnegative finite value, got {x}")
    frac_bits = int(frac_bits)
    scaled = round(math.ldexp(x, 2 * frac_bits))
    if scaled > _U32_MAX:
        raise OverflowError(
            f"{x} * 2**{2 * frac_bits} = {scaled} does not fit in 32 bits"
        )
    return math.ldexp(nr_sqrt(scaled).root, -frac_bits)
