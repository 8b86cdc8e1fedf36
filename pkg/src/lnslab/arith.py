"""LNS multiply, divide, square root and table-driven add/subtract.

Addition and subtraction use the Gaussian logarithms

    m = max(m_x, m_y) + phi(|m_x - m_y|)
    phi+(x) = log_b(1 + b**-x),   phi-(x) = log_b(1 - b**-x)

with the table picked by ``s_x xor s_y xor op``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

from .core import (
    LnsFormat,
    LnsValue,
    Status,
    check_value,
    from_code,
    round_half_away,
)
from .exceptions import CapacityError, DivideByZero, DomainError

MAX_TABLE_BITS = 20


class PhiKind(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class Tag(enum.Enum):
    FORCED_ZERO = "forced-zero"


FORCED_ZERO = Tag.FORCED_ZERO


def phi_selector(s_x: bool, s_y: bool, op: bool) -> PhiKind:
    """Pick the table: ``op`` is False for addition, True for subtraction."""
    return PhiKind.MINUS if (s_x ^ s_y ^ op) else PhiKind.PLUS


def lns_mul(a: LnsValue, b: LnsValue, fmt: LnsFormat) -> LnsValue:
    if a.zero or b.zero:
        return LnsValue.zero_value()
    return from_code(a.code + b.code, a.sign ^ b.sign, fmt)


def lns_div(a: LnsValue, b: LnsValue, fmt: LnsFormat) -> LnsValue:
    if b.zero:
        raise DivideByZero("LNS division by zero")
    if a.zero:
        return LnsValue.zero_value()
    return from_code(a.code - b.code, a.sign ^ b.sign, fmt)


def lns_sqrt(a: LnsValue, fmt: LnsFormat) -> LnsValue:
    if a.zero:
        return a
    if a.sign:
        raise DomainError("square root of a negative LNS value")
    return from_code(round_half_away(a.code / 2), False, fmt)


def phi_exact(x: float, base: float, kind: PhiKind) -> float:
    """Exact Gaussian logarithm; ``phi-(0)`` is ``-inf``."""
    if not x >= 0:
        raise DomainError(f"phi is defined for x >= 0, got {x!r}")
    ln_b = math.log(base)
    t = math.exp(-x * ln_b)
    if kind is PhiKind.PLUS:
        return math.log1p(t) / ln_b
    if x == 0:
        return -math.inf
    return math.log1p(-t) / ln_b


def _phi_units(k: int, in_fmt: LnsFormat, out_fmt: LnsFormat, kind: PhiKind) -> float:
    # phi at x = k * 2**-f_in, in units of the output ULP
    t = math.exp(-k * in_fmt.ln_radix)
    if kind is PhiKind.PLUS:
        return math.log1p(t) / out_fmt.ln_radix
    if k == 0:
        return -math.inf
    return math.log1p(-t) / out_fmt.ln_radix


@dataclass(frozen=True)
class PhiTable:
    """Quantized phi table indexed by the unsigned code of ``x``.

    ``entries[k]`` is the output code (in output ULPs) of phi at
    ``x = k * 2**-f_in``, or ``FORCED_ZERO`` where the subtraction result
    falls below the output format's round-to-zero threshold.  ``exact`` keeps
    the unrounded values in the same units.
    """

    kind: PhiKind
    input_format: LnsFormat
    output_format: LnsFormat
    entries: tuple
    exact: tuple

    def __len__(self) -> int:
        return len(self.entries)

    def x_value(self, k: int) -> float:
        return k * self.input_format.ulp_lns

    @property
    def extra_frac_bits(self) -> int:
        return self.output_format.frac_bits - self.input_format.frac_bits

    def n_forced_zero(self) -> int:
        return sum(e is FORCED_ZERO for e in self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "x_value", "exact_phi", "stored_code", "forced_zero"])
        ulp = self.output_format.ulp_lns
        for k, (e, v) in enumerate(zip(self.entries, self.exact)):
            forced = e is FORCED_ZERO
            w.writerow(
                [k, repr(self.x_value(k)), repr(v * ulp), 0 if forced else e, int(forced)]
            )
        return buf.getvalue()


def build_phi_table(
    in_fmt: LnsFormat, out_fmt: LnsFormat | None, kind: PhiKind
) -> PhiTable:
    out_fmt = out_fmt or in_fmt
    if in_fmt.ln_base != out_fmt.ln_base:
        raise DomainError("phi table input and output formats must share a base")
    if out_fmt.frac_bits < in_fmt.frac_bits:
        raise DomainError("output format needs at least as many fractional bits as input")
    if in_fmt.bits > MAX_TABLE_BITS:
        raise CapacityError(f"{in_fmt.q} needs a table of 2**{in_fmt.bits} entries")
    zero_below = out_fmt.code_min - 0.5
    entries, exact = [], []
    for k in range(2**in_fmt.bits):
        v = _phi_units(k, in_fmt, out_fmt, kind)
        exact.append(v)
        # phi+ never underflows; its codes are stored unclamped as table words
        if kind is PhiKind.MINUS and v < zero_below:
            entries.append(FORCED_ZERO)
        else:
            entries.append(round_half_away(v))
    return PhiTable(kind, in_fmt, out_fmt, tuple(entries), tuple(exact))


def build_addsub_tables(
    fmt: LnsFormat, out_frac_bits: int | None = None
) -> tuple[PhiTable, PhiTable]:
    """Plus/minus tables for an add/sub unit working in ``fmt``'s base.

    The minus table's output word gets one extra integer bit.  A forced-zero
    entry then always means the subtraction result underflows, so the
    zero-detect path never discards a representable result.
    """
    f_out = fmt.frac_bits if out_frac_bits is None else out_frac_bits
    out = fmt.with_frac_bits(f_out)
    wide = LnsFormat(fmt.base, fmt.int_bits + 1, f_out, fmt.convention, fmt.ln_base)
    return build_phi_table(fmt, out, PhiKind.PLUS), build_phi_table(fmt, wide, PhiKind.MINUS)


def table_index(d: int, shift: int, size: int) -> int:
    """Table row for an exponent difference of ``d`` working ULPs."""
    idx = d if shift == 0 else (d + (1 << (shift - 1))) >> shift
    return min(idx, size - 1)


def lns_add_sub(
    a: LnsValue,
    b: LnsValue,
    op: bool,
    tbl_plus: PhiTable,
    tbl_minus: PhiTable,
    fmt: LnsFormat,
) -> LnsValue:
    """``a + b`` (op False) or ``a - b`` (op True) through the phi tables.

    ``a`` and ``b`` are codes of ``fmt``, whose fractional bits must equal the
    tables' output precision.  With mixed-precision tables ``fmt`` is the wide
    accumulator format and the difference is rounded onto the table's input
    grid before lookup.
    """
    if tbl_plus.kind is not PhiKind.PLUS or tbl_minus.kind is not PhiKind.MINUS:
        raise DomainError("tables passed in the wrong order")
    for t in (tbl_plus, tbl_minus):
        if t.output_format.frac_bits != fmt.frac_bits:
            raise DomainError("table output precision must match the working format")
    check_value(a, fmt)
    check_value(b, fmt)
    if op:
        b = b.negate()
    if a.zero and b.zero:
        return LnsValue.zero_value()
    if a.zero:
        return LnsValue(False, b.sign, b.code)
    if b.zero:
        return LnsValue(False, a.sign, a.code)

    d = abs(a.code - b.code)
    if a.sign != b.sign:
        if d == 0:
            return LnsValue.zero_value()
        tbl = tbl_minus
    else:
        tbl = tbl_plus
    sign = a.sign if a.code >= b.code else b.sign
    entry = tbl.entries[table_index(d, tbl.extra_frac_bits, len(tbl))]
    if entry is FORCED_ZERO:
        return LnsValue.zero_value(Status.UNDERFLOW)
    return from_code(max(a.code, b.code) + entry, sign, fmt)
