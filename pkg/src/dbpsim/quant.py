"""Configurable minifloat codec and fusion-payload quantization.

The codec is IEEE-like: round-to-nearest-even, subnormals, and an all-ones
exponent reserved for infinities and NaNs. Encoding a finite value that
overflows the format saturates to the largest finite magnitude instead of
producing an infinity; infinite inputs keep their infinity codes so that
every code word round-trips exactly.

Only values that cross cluster boundaries are quantized; all local
arithmetic stays in double precision.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, WidthError


@dataclass(frozen=True)
class MinifloatFormat:
    """1 sign bit, ``exponent_bits`` exponent bits, ``mantissa_bits`` mantissa bits."""

    exponent_bits: int
    mantissa_bits: int

    def __post_init__(self):
        if self.exponent_bits < 2:
            raise ValueError("need at least 2 exponent bits")
        if self.mantissa_bits < 1:
            raise ValueError("need at least 1 mantissa bit")
        if self.width > 32:
            raise ValueError("total width must be <= 32 bits")

    @property
    def width(self) -> int:
        return 1 + self.exponent_bits + self.mantissa_bits

    @property
    def bias(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def max_exponent(self) -> int:
        # largest unbiased exponent of a normal number (all-ones is reserved)
        return (1 << self.exponent_bits) - 2 - self.bias

    @property
    def min_exponent(self) -> int:
        return 1 - self.bias

    @property
    def max_finite(self) -> float:
        if self.max_exponent > 1023:
            return math.inf  # wider range than float64; saturation unreachable
        return math.ldexp(2.0 - math.ldexp(1.0, -self.mantissa_bits), self.max_exponent)

    @property
    def smallest_subnormal(self) -> float:
        return math.ldexp(1.0, self.min_exponent - self.mantissa_bits)


FP8 = MinifloatFormat(exponent_bits=5, mantissa_bits=2)
FP32 = MinifloatFormat(exponent_bits=8, mantissa_bits=23)


def parse_precision(text: str) -> MinifloatFormat:
    """Parse a config precision string: ``fp32``, ``fp8``, or ``custom:s/e/m``."""
    t = text.strip().lower()
    if t == "fp32":
        return FP32
    if t == "fp8":
        return FP8
    if t.startswith("custom:"):
        parts = t[len("custom:") :].split("/")
        if len(parts) != 3:
            raise ConfigError("precision", f"expected custom:s/e/m, got '{text}'")
        s, e, m = (int(p) for p in parts)
        if s != 1:
            raise ConfigError("precision", "only 1 sign bit is supported")
        return MinifloatFormat(exponent_bits=e, mantissa_bits=m)
    raise ConfigError("precision", f"unknown precision '{text}'")


def _nan_code(x: float, fmt: MinifloatFormat) -> int:
    # preserve the top mantissa_bits of the double NaN payload; keep it a NaN
    bits = struct.unpack(">Q", struct.pack(">d", x))[0]
    sign = bits >> 63
    payload = (bits >> (52 - fmt.mantissa_bits)) & ((1 << fmt.mantissa_bits) - 1)
    if payload == 0:
        payload = 1 << (fmt.mantissa_bits - 1)
    exp_field = (1 << fmt.exponent_bits) - 1
    return (sign << (fmt.width - 1)) | (exp_field << fmt.mantissa_bits) | payload


def encode(x: float, fmt: MinifloatFormat) -> int:
    """Round ``x`` to the nearest representable value (ties to even) and code it.

    Finite overflow saturates to the largest finite magnitude; ``+-inf``
    keeps its infinity code and signed zeros keep their sign.
    """
    x = float(x)
    exp_all_ones = (1 << fmt.exponent_bits) - 1
    sign_bit = 1 if math.copysign(1.0, x) < 0 else 0
    sign = sign_bit << (fmt.width - 1)

    if math.isnan(x):
        return _nan_code(x, fmt)
    if math.isinf(x):
        return sign | (exp_all_ones << fmt.mantissa_bits)

    a = abs(x)
    if a == 0.0:
        return sign

    _, e2 = math.frexp(a)  # a = m * 2**e2, m in [0.5, 1)
    exp = e2 - 1  # normalized exponent: a = (2*m) * 2**exp, 2*m in [1, 2)

    if exp < fmt.min_exponent:
        # subnormal grid: multiples of 2**(min_exponent - mantissa_bits)
        n = round(math.ldexp(a, fmt.mantissa_bits - fmt.min_exponent))
        if n >= (1 << fmt.mantissa_bits):  # rounded up into the first normal binade
            return sign | (1 << fmt.mantissa_bits) | (n - (1 << fmt.mantissa_bits))
        return sign | n

    if exp > fmt.max_exponent:
        return sign | ((exp_all_ones - 1) << fmt.mantissa_bits) | (
            (1 << fmt.mantissa_bits) - 1
        )

    frac = math.ldexp(a, -exp) - 1.0  # exact: value in [0, 1)
    n = round(math.ldexp(frac, fmt.mantissa_bits))
    if n == (1 << fmt.mantissa_bits):  # mantissa carry into the next binade
        exp += 1
        n = 0
        if exp > fmt.max_exponent:  # saturate instead of producing an infinity
            return sign | ((exp_all_ones - 1) << fmt.mantissa_bits) | (
                (1 << fmt.mantissa_bits) - 1
            )
    return sign | ((exp + fmt.bias) << fmt.mantissa_bits) | n


def decode(code: int, fmt: MinifloatFormat) -> float:
    """Exact value of a code word (including signed zeros, inf, and NaN)."""
    code = int(code)
    if code < 0 or code >= (1 << fmt.width):
        raise WidthError(f"code {code:#x} does not fit a {fmt.width}-bit format")
    sign = -1.0 if (code >> (fmt.width - 1)) & 1 else 1.0
    exp_field = (code >> fmt.mantissa_bits) & ((1 << fmt.exponent_bits) - 1)
    mant_field = code & ((1 << fmt.mantissa_bits) - 1)

    if exp_field == (1 << fmt.exponent_bits) - 1:
        if mant_field == 0:
            return sign * math.inf
        bits = (0x7FF << 52) | (mant_field << (52 - fmt.mantissa_bits))
        if sign < 0:
            bits |= 1 << 63
        return struct.unpack(">d", struct.pack(">Q", bits))[0]
    if exp_field == 0:
        return sign * math.ldexp(mant_field, fmt.min_exponent - fmt.mantissa_bits)
    return sign * math.ldexp(
        (1 << fmt.mantissa_bits) + mant_field,
        exp_field - fmt.bias - fmt.mantissa_bits,
    )


def quantize(values, fmt: MinifloatFormat) -> np.ndarray:
    """Vectorized ``decode(encode(.))`` over a real array.

    Bit-for-bit equivalent to the scalar codec on finite inputs; infinities
    pass through and NaNs stay NaN.
    """
    a = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(a)
    max_finite = fmt.max_finite

    if fmt.exponent_bits == 8 and fmt.mantissa_bits == 23:
        # the format is IEEE binary32: one cast round-trips the grid exactly
        with np.errstate(over="ignore"):
            q = a.astype(np.float32).astype(np.float64)
        q = np.clip(q, -max_finite, max_finite)  # finite overflow saturates
        out = np.where(finite, q, a)
        return out if out.shape else np.float64(out)

    mag = np.abs(np.where(finite, a, 0.0))
    _, e2 = np.frexp(mag)
    exp = np.maximum(e2 - 1, fmt.min_exponent)
    # round on the exact dyadic grid of the target binade (scalings by powers
    # of two are exact, np.rint ties to even)
    step_exp = exp - fmt.mantissa_bits
    n = np.rint(np.ldexp(mag, -step_exp))
    q = np.ldexp(n, step_exp)
    q = np.minimum(q, max_finite)
    out = np.where(finite, np.copysign(q, a), a)
    return out if out.shape else np.float64(out)


def quantize_complex(values, fmt: MinifloatFormat) -> np.ndarray:
    a = np.asarray(values, dtype=np.complex128)
    return quantize(a.real, fmt) + 1j * quantize(a.imag, fmt)


def quantize_payload(payload, fmt: MinifloatFormat):
    """Quantize an inter-cluster payload, returning the same type.

    Gram matrices are re-mirrored from the lower triangle afterwards so the
    Hermitian invariant holds exactly; noise variances are clamped to the
    format's smallest positive value so fusion weights stay defined.
    Plain arrays (precoding broadcasts) are quantized elementwise.
    """
    from .numerics import mirror_hermitian
    from .uplink import LocalEstimate, LocalPreprocessOutput

    if isinstance(payload, LocalPreprocessOutput):
        return LocalPreprocessOutput(
            gram=mirror_hermitian(quantize_complex(payload.gram, fmt)),
            y_mrc=quantize_complex(payload.y_mrc, fmt),
        )
    if isinstance(payload, LocalEstimate):
        return LocalEstimate(
            x_hat=quantize_complex(payload.x_hat, fmt),
            noise_var=np.maximum(quantize(payload.noise_var, fmt), fmt.smallest_subnormal),
        )
    a = np.asarray(payload)
    if np.iscomplexobj(a):
        return quantize_complex(a, fmt)
    return quantize(a, fmt)


def pack4(codes, fmt: MinifloatFormat = FP8) -> int:
    """Pack four 8-bit codes into one 32-bit word, lane 0 in the low byte."""
    if fmt.width != 8:
        raise WidthError(f"pack4 needs an 8-bit format, got {fmt.width} bits")
    codes = tuple(int(c) for c in codes)
    if len(codes) != 4 or any(c < 0 or c > 0xFF for c in codes):
        raise WidthError("pack4 takes exactly four 8-bit codes")
    return codes[0] | (codes[1] << 8) | (codes[2] << 16) | (codes[3] << 24)


def unpack4(word: int, fmt: MinifloatFormat = FP8):
    """Inverse of :func:`pack4`."""
    if fmt.width != 8:
        raise WidthError(f"unpack4 needs an 8-bit format, got {fmt.width} bits")
    word = int(word)
    if word < 0 or word > 0xFFFFFFFF:
        raise WidthError("packed word must fit 32 bits")
    return tuple((word >> (8 * lane)) & 0xFF for lane in range(4))
