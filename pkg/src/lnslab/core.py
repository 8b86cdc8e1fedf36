"""LNS formats, values, conversions and the two rounding disciplines.

A format is a base ``b`` plus a fixed-point exponent ``Q(i, f)``.  Exponent
codes are integers; the exponent value is ``code * 2**-f`` and the real value
is ``b ** (code * 2**-f) == r ** code`` with radix ``r = b ** 2**-f``.

Every computation goes through ``ln_radix`` (``ln b * 2**-f``).  Aliased
formats (same radix, shifted binary point) therefore share a bit-identical
``ln_radix`` and produce bit-identical values, tables and error figures.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .exceptions import CapacityError, DomainError, ParseError

MAX_ENUM_BITS = 24


class Convention(enum.Enum):
    """How ``Q(i, f)`` maps onto a range of exponent codes.

    TWOS_COMPLEMENT_HALF: ``i + f`` bit two's complement codes,
    ``[-2**(i+f-1), 2**(i+f-1) - 1]``.

    SYMMETRIC_WIDE: magnitude of ``i + f`` bits plus a sign,
    ``[-(2**(i+f) - 1), 2**(i+f) - 1]``; smallest value ``b**-(2**i - 2**-f)``.
    """

    TWOS_COMPLEMENT_HALF = "twos-complement-half"
    SYMMETRIC_WIDE = "symmetric-wide"

    @classmethod
    def parse(cls, text: str) -> "Convention":
        key = text.strip().lower().replace("_", "-")
        aliases = {"tch": cls.TWOS_COMPLEMENT_HALF, "sw": cls.SYMMETRIC_WIDE}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ParseError(f"unknown exponent convention {text!r}") from None


class RoundingDomain(enum.Enum):
    LOG = "log"
    REAL = "real"


class Outcome(enum.Enum):
    """Out-of-range results of rounding an exponent."""

    ZERO = "zero"
    OVERFLOW = "overflow"


class Status(enum.Enum):
    OK = "ok"
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"


@dataclass(frozen=True)
class LnsFormat:
    base: float
    int_bits: int
    frac_bits: int
    convention: Convention = Convention.TWOS_COMPLEMENT_HALF
    ln_base: float = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if not (self.base > 1.0) or not math.isfinite(self.base):
            raise DomainError(f"LNS base must exceed 1, got {self.base!r}")
        if self.int_bits < 1 or self.frac_bits < 0:
            raise DomainError(
                f"invalid exponent format Q({self.int_bits},{self.frac_bits})"
            )
        if self.ln_base is None:
            object.__setattr__(self, "ln_base", math.log(self.base))

    @property
    def bits(self) -> int:
        """Exponent bits ``i + f``."""
        return self.int_bits + self.frac_bits

    @property
    def word_bits(self) -> int:
        """Word length including the sign bit (the zero flag is not counted)."""
        return 1 + self.bits

    @property
    def ulp_lns(self) -> float:
        return math.ldexp(1.0, -self.frac_bits)

    @property
    def ln_radix(self) -> float:
        return math.ldexp(self.ln_base, -self.frac_bits)

    @property
    def radix(self) -> float:
        return math.exp(self.ln_radix)

    @property
    def ulp(self) -> float:
        """Real-domain ratio between neighbouring values (the radix)."""
        return self.radix

    @property
    def ulp_half(self) -> float:
        return math.exp(self.ln_radix / 2)

    @property
    def code_min(self) -> int:
        if self.convention is Convention.SYMMETRIC_WIDE:
            return -(2**self.bits - 1)
        return -(2 ** (self.bits - 1))

    @property
    def code_max(self) -> int:
        if self.convention is Convention.SYMMETRIC_WIDE:
            return 2**self.bits - 1
        return 2 ** (self.bits - 1) - 1

    @property
    def n_codes(self) -> int:
        return self.code_max - self.code_min + 1

    @property
    def q(self) -> str:
        return f"Q({self.int_bits},{self.frac_bits})"

    def real(self, code: int) -> float:
        """Unscaled positive real value of an exponent code."""
        return self.radix**code

    def token(self) -> str:
        return f"b={self.base!r}:{self.q}:{self.convention.value}"

    def with_frac_bits(self, frac_bits: int) -> "LnsFormat":
        """Same base and integer bits, different precision."""
        return LnsFormat(self.base, self.int_bits, frac_bits, self.convention, self.ln_base)

    def __str__(self) -> str:
        return f"b={self.base:g} {self.q}"


@dataclass(frozen=True)
class LnsValue:
    """The ``(zero, sign, exponent code)`` triplet.

    ``status`` records saturation or underflow of the operation that produced
    the value.  It does not take part in equality.
    """

    zero: bool
    sign: bool
    code: int
    status: Status = field(default=Status.OK, compare=False)

    def __post_init__(self):
        if self.zero and (self.sign or self.code != 0):
            raise DomainError("zero LNS value must have sign=False and code=0")

    @classmethod
    def zero_value(cls, status: Status = Status.OK) -> "LnsValue":
        return cls(True, False, 0, status)

    def negate(self) -> "LnsValue":
        if self.zero:
            return self
        return LnsValue(False, not self.sign, self.code, self.status)


class Bounds(NamedTuple):
    min_exp: float
    max_exp: float
    min_pos_real: float
    max_real: float


def make_format(
    base: float,
    int_bits: int,
    frac_bits: int,
    convention: Convention = Convention.TWOS_COMPLEMENT_HALF,
) -> LnsFormat:
    return LnsFormat(float(base), int(int_bits), int(frac_bits), convention)


def alias_format(fmt: LnsFormat, point_shift: int) -> LnsFormat:
    """Move the binary point of the exponent right by ``point_shift`` bits.

    ``(b, Q(i, f))`` and ``(b**(2**s), Q(i - s, f + s))`` hold the same real
    values: both have radix ``b ** 2**-f`` and the same number of codes.
    """
    i, f = fmt.int_bits - point_shift, fmt.frac_bits + point_shift
    if i < 1 or f < 0:
        raise DomainError(f"shift {point_shift} leaves invalid format Q({i},{f})")
    ln_base = math.ldexp(fmt.ln_base, point_shift)
    return LnsFormat(fmt.base ** (2.0**point_shift), i, f, fmt.convention, ln_base)


def format_bounds(fmt: LnsFormat) -> Bounds:
    u = fmt.ulp_lns
    return Bounds(
        fmt.code_min * u, fmt.code_max * u, fmt.real(fmt.code_min), fmt.real(fmt.code_max)
    )


def check_value(v: LnsValue, fmt: LnsFormat) -> None:
    if not v.zero and not fmt.code_min <= v.code <= fmt.code_max:
        raise DomainError(f"code {v.code} outside {fmt.q} range")


def decode(v: LnsValue, fmt: LnsFormat, scale: float = 1.0) -> float:
    if v.zero:
        return 0.0
    x = scale * fmt.real(v.code)
    return -x if v.sign else x


def round_half_away(x: float) -> int:
    if x >= 0:
        return math.floor(x + 0.5)
    return -math.floor(-x + 0.5)


def round_units(v: float, fmt: LnsFormat) -> int | Outcome:
    """Round an exponent given in ULP_LNS units to a code."""
    if v == -math.inf or v < fmt.code_min - 0.5:
        return Outcome.ZERO
    if v > fmt.code_max + 0.5:
        return Outcome.OVERFLOW
    return min(max(round_half_away(v), fmt.code_min), fmt.code_max)


def round_log_domain(m: float, fmt: LnsFormat) -> int | Outcome:
    """Nearest exponent code to ``m`` (ties away from zero).

    Exponents more than half a ULP below the smallest code round to zero;
    more than half a ULP above the largest code overflow.
    """
    if math.isnan(m) or m == math.inf:
        raise DomainError(f"cannot round exponent {m!r}")
    return round_units(math.ldexp(m, fmt.frac_bits), fmt)


def round_real_domain(value: float, fmt: LnsFormat, scale: float = 1.0) -> int | Outcome:
    """Code whose real value is additively nearest to ``value`` (> 0).

    Ties go to the larger magnitude.  Below the smallest positive value the
    choice is between zero and the smallest code.
    """
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f"real-domain rounding needs a positive finite value, got {value!r}")
    if not scale > 0:
        raise DomainError("scale must be positive")
    t = value / scale
    lo = math.floor(math.log(t) / fmt.ln_radix)
    # log/ln_radix can land one code off near exact powers
    if fmt.real(lo) > t:
        lo -= 1
    elif fmt.real(lo + 1) <= t:
        lo += 1
    if lo < fmt.code_min:
        return Outcome.ZERO if 2 * t < fmt.real(fmt.code_min) else fmt.code_min
    if lo >= fmt.code_max:
        if t - fmt.real(fmt.code_max) < fmt.real(fmt.code_max + 1) - t:
            return fmt.code_max
        return Outcome.OVERFLOW
    if t - fmt.real(lo) < fmt.real(lo + 1) - t:
        return lo
    return lo + 1


def encode(
    value: float,
    fmt: LnsFormat,
    domain: RoundingDomain = RoundingDomain.LOG,
    scale: float = 1.0,
) -> LnsValue:
    if not math.isfinite(value):
        raise DomainError(f"cannot encode non-finite value {value!r}")
    if not scale > 0:
        raise DomainError("scale must be positive")
    if value == 0:
        return LnsValue.zero_value()
    sign = value < 0
    if domain is RoundingDomain.LOG:
        r = round_units(math.log(abs(value) / scale) / fmt.ln_radix, fmt)
    else:
        r = round_real_domain(abs(value), fmt, scale)
    return _from_outcome(r, sign, fmt)


def _from_outcome(r: int | Outcome, sign: bool, fmt: LnsFormat) -> LnsValue:
    if r is Outcome.ZERO:
        return LnsValue.zero_value(Status.UNDERFLOW)
    if r is Outcome.OVERFLOW:
        return LnsValue(False, sign, fmt.code_max, Status.OVERFLOW)
    return LnsValue(False, sign, r)


def from_code(code: int, sign: bool, fmt: LnsFormat) -> LnsValue:
    """Range-check an integer code, flushing to zero or saturating."""
    if code < fmt.code_min:
        return LnsValue.zero_value(Status.UNDERFLOW)
    if code > fmt.code_max:
        return LnsValue(False, sign, fmt.code_max, Status.OVERFLOW)
    return LnsValue(False, sign, code)


def requantize(v: LnsValue, src: LnsFormat, dst: LnsFormat) -> LnsValue:
    """Convert between formats of the same base, rounding in the log domain."""
    if src.ln_base != dst.ln_base:
        raise DomainError("requantize needs formats with the same base")
    if v.zero:
        return v
    shift = dst.frac_bits - src.frac_bits
    if shift >= 0:
        return from_code(v.code << shift, v.sign, dst)
    return _from_outcome(round_units(math.ldexp(v.code, shift), dst), v.sign, dst)


def value_set(fmt: LnsFormat, scale: float = 1.0) -> list[float]:
    """Every positive representable value, ascending."""
    if fmt.bits > MAX_ENUM_BITS:
        raise CapacityError(f"{fmt.q} has too many codes to enumerate")
    r = fmt.radix
    return [scale * r**k for k in range(fmt.code_min, fmt.code_max + 1)]


_Q_RE = re.compile(r"^\s*Q\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$", re.IGNORECASE)


def parse_q(text: str) -> tuple[int, int]:
    m = _Q_RE.match(text)
    if not m:
        raise ParseError(f"bad Q-format {text!r}, expected Q(i,f)")
    return int(m.group(1)), int(m.group(2))


def parse_format(text: str, convention: Convention | None = None) -> LnsFormat:
    """Parse ``b=<base>:Q(i,f)[:<convention>]``."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3) or not parts[0].startswith("b="):
        raise ParseError(f"bad format token {text!r}")
    try:
        base = float(parts[0][2:])
    except ValueError:
        raise ParseError(f"bad base in {text!r}") from None
    i, f = parse_q(parts[1])
    conv = Convention.parse(parts[2]) if len(parts) == 3 else convention
    try:
        return make_format(base, i, f, conv or Convention.TWOS_COMPLEMENT_HALF)
    except DomainError as e:
        raise ParseError(str(e)) from None
