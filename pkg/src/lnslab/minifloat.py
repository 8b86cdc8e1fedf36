"""Short IEEE-like floating-point formats used as conversion sources."""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

from .exceptions import CapacityError, DomainError, ParseError

MAX_ENUM_BITS = 20


@dataclass(frozen=True)
class MiniFloatFormat:
    """Sign, ``exp_bits`` exponent bits and ``mant_bits`` mantissa bits.

    With ``reserve_inf_nan`` off the all-ones exponent holds ordinary
    normal numbers, so every encoding is finite.
    """

    exp_bits: int
    mant_bits: int
    bias: int = field(default=None)  # type: ignore[assignment]
    supports_subnormals: bool = True
    reserve_inf_nan: bool = False

    def __post_init__(self):
        if self.exp_bits < 1 or self.mant_bits < 0:
            raise DomainError(f"invalid minifloat e{self.exp_bits}m{self.mant_bits}")
        if self.bias is None:
            object.__setattr__(self, "bias", 2 ** (self.exp_bits - 1) - 1)
        if self.reserve_inf_nan and self.exp_bits < 2:
            raise DomainError("reserving inf/NaN needs at least two exponent bits")

    @property
    def total_bits(self) -> int:
        return 1 + self.exp_bits + self.mant_bits

    @property
    def name(self) -> str:
        return f"e{self.exp_bits}m{self.mant_bits}"

    def decode_bits(self, exp_field: int, mant_field: int) -> float:
        """Positive value of one (exponent, mantissa) field pair."""
        m = self.mant_bits
        if exp_field == 0:
            if not self.supports_subnormals:
                return 0.0
            return math.ldexp(mant_field, 1 - self.bias - m)
        return math.ldexp((1 << m) + mant_field, exp_field - self.bias - m)

    @cached_property
    def _positives(self) -> tuple[float, ...]:
        if self.total_bits > MAX_ENUM_BITS:
            raise CapacityError(f"{self.name} has too many encodings to enumerate")
        top = 2**self.exp_bits - (1 if self.reserve_inf_nan else 0)
        vals = {
            self.decode_bits(e, mf)
            for e in range(top)
            for mf in range(2**self.mant_bits)
        }
        vals.discard(0.0)
        return tuple(sorted(vals))

    def positive_values(self) -> list[float]:
        """Every positive finite value, ascending."""
        return list(self._positives)

    @property
    def max_value(self) -> float:
        return self._positives[-1]

    @property
    def min_positive(self) -> float:
        return self._positives[0]

    def quantize(self, x: float) -> float:
        """Nearest representable value, ties away from zero, saturating."""
        if not math.isfinite(x):
            raise DomainError(f"cannot quantize {x!r}")
        a = abs(x)
        pos = self._positives
        if a >= pos[-1]:
            q = pos[-1]
        else:
            j = bisect.bisect_left(pos, a)
            lo = pos[j - 1] if j > 0 else 0.0
            hi = pos[j]
            q = lo if a - lo < hi - a else hi
        return -q if x < 0 else q


_MF_RE = re.compile(r"^e(\d+)m(\d+)$", re.IGNORECASE)


def parse_minifloat(text: str) -> MiniFloatFormat:
    m = _MF_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad minifloat spec {text!r}, expected e<i>m<f>")
    try:
        return MiniFloatFormat(int(m.group(1)), int(m.group(2)))
    except DomainError as exc:
        raise ParseError(str(exc)) from None
