"""Error metrics, representation and arithmetic error sweeps, base searches."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from .arith import FORCED_ZERO, PhiKind, PhiTable, build_phi_table
from .core import LnsFormat, Outcome, round_units
from .exceptions import CapacityError, DomainError, ParseError
from .minifloat import MiniFloatFormat

# Errors below this many ULPs count as exact hits.
EXACT_TOL = 1e-9


def err_abs(m_hat: float, m: float) -> float:
    return m_hat - m


def err_rel(m_hat: float, m: float) -> float:
    if m == 0:
        raise DomainError("relative error undefined at m = 0")
    return (m_hat - m) / m


def err_real_rel(m_hat: float, m: float, base: float) -> float:
    return math.expm1((m_hat - m) * math.log(base))


def err_mult(m_hat: float, m: float, base: float) -> float:
    return base ** (m_hat - m)


def geo_mean_mult(errors: Sequence[float], base: float) -> float:
    """Geometric mean of multiplicative errors via the mean of their logs."""
    if not errors:
        raise DomainError("geometric mean of an empty list")
    ln_b = math.log(base)
    mean_log = math.fsum(math.log(e) / ln_b for e in errors) / len(errors)
    return base**mean_log


@dataclass(frozen=True)
class ErrorReport:
    """Aggregate error of one sweep, in percent of the log-domain ULP.

    ``n_excluded`` counts samples left out of the mean for reasons other than
    underflow or overflow (zero-valued table words, exact hits), so
    ``n_zero + n_overflow + n_excluded + sample_count`` is the number of
    enumerated samples.
    """

    mean_abs_err_pct_ulp: float
    n_zero: int
    n_overflow: int
    max_abs_err_pct_ulp: float
    geo_mean_mult_err: float
    sample_count: int
    n_excluded: int = 0
    mean_signed_err_pct_ulp: float = 0.0

    @property
    def total(self) -> int:
        return self.n_zero + self.n_overflow + self.n_excluded + self.sample_count

    @classmethod
    def from_errors(
        cls,
        signed: Sequence[float],
        ln_unit: float,
        n_zero: int = 0,
        n_overflow: int = 0,
        n_excluded: int = 0,
    ) -> "ErrorReport":
        """Build from signed errors in ULPs; ``ln_unit`` is ln of one ULP's ratio."""
        n = len(signed)
        if n == 0:
            return cls(0.0, n_zero, n_overflow, 0.0, 1.0, 0, n_excluded, 0.0)
        mean_abs = math.fsum(abs(e) for e in signed) / n
        mean_signed = math.fsum(signed) / n
        return cls(
            100 * mean_abs,
            n_zero,
            n_overflow,
            100 * max(abs(e) for e in signed),
            math.exp(mean_signed * ln_unit),
            n,
            n_excluded,
            100 * mean_signed,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class Target(enum.Enum):
    REPR_SCALED = "repr-scaled"
    REPR_UNSCALED = "repr-unscaled"
    ARITH_PLUS = "arith-plus"
    ARITH_MINUS = "arith-minus"

    @classmethod
    def parse(cls, text: str) -> "Target":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(t.value for t in cls)
            raise ParseError(f"unknown target {text!r} (expected one of {names})") from None


@dataclass(frozen=True)
class SweepGrid:
    """Evenly spaced bases, inclusive of both ends.

    Bases are generated in decimal so that e.g. 1.730 is the float nearest
    to 1.73 rather than an accumulated sum.
    """

    base_lo: float = 1.414
    base_hi: float = 2.0
    step: float = 0.001

    def __post_init__(self):
        if not self.base_lo > 1 or self.base_hi < self.base_lo or not self.step > 0:
            raise DomainError(f"invalid sweep grid {self}")

    def bases(self) -> list[float]:
        lo, hi, st = (Decimal(repr(v)) for v in (self.base_lo, self.base_hi, self.step))
        n = int((hi - lo) // st) + 1
        return [float(lo + k * st) for k in range(n)]

    def __len__(self) -> int:
        return len(self.bases())

    @classmethod
    def parse(cls, text: str) -> "SweepGrid":
        """``lo:hi:step``; a step of 1 with lo == hi gives a single base."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"bad grid {text!r}, expected lo:hi:step")
        try:
            lo, hi, st = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"bad grid {text!r}") from None
        try:
            return cls(lo, hi, st)
        except DomainError as exc:
            raise ParseError(str(exc)) from None


def at_base(template: LnsFormat, base: float) -> LnsFormat:
    return LnsFormat(base, template.int_bits, template.frac_bits, template.convention)


def default_source(fmt: LnsFormat) -> MiniFloatFormat:
    """Minifloat with the same bit budget: i exponent bits, f mantissa bits."""
    return MiniFloatFormat(fmt.int_bits, fmt.frac_bits)


def repr_error_sweep(
    src: MiniFloatFormat, fmt: LnsFormat, scaled: bool = True
) -> ErrorReport:
    """Round every positive minifloat value to the nearest LNS value."""
    values = src.positive_values()
    if fmt.bits > 24:
        raise CapacityError(f"{fmt.q} too large")
    scale = values[-1] / fmt.real(fmt.code_max) if scaled else 1.0
    signed, n_zero, n_over = [], 0, 0
    for v in values:
        units = math.log(v / scale) / fmt.ln_radix
        r = round_units(units, fmt)
        if r is Outcome.ZERO:
            n_zero += 1
        elif r is Outcome.OVERFLOW:
            n_over += 1
        else:
            signed.append(r - units)
    return ErrorReport.from_errors(signed, fmt.ln_radix, n_zero, n_over)


def arith_error_sweep(
    tbl: PhiTable,
    skip_zero_output: bool = True,
    skip_exact: bool = True,
    unit: str = "output",
) -> ErrorReport:
    """Quantization error of every table entry.

    Forced-zero entries go to ``n_zero``.  Entries storing a zero word
    (phi rounded to nothing) and entries that hit the grid exactly are left
    out of the mean by default.  ``unit`` selects output or input ULPs.
    """
    if unit not in ("output", "input"):
        raise DomainError(f"unit must be 'output' or 'input', got {unit!r}")
    per_unit = 2.0**-tbl.extra_frac_bits if unit == "input" else 1.0
    ln_unit = tbl.output_format.ln_radix / per_unit
    signed, n_zero, n_excl = [], 0, 0
    for e, v in zip(tbl.entries, tbl.exact):
        if e is FORCED_ZERO or v == -math.inf:
            n_zero += 1
            continue
        err = e - v
        if (skip_zero_output and e == 0) or (skip_exact and abs(err) < EXACT_TOL):
            n_excl += 1
            continue
        signed.append(err * per_unit)
    return ErrorReport.from_errors(signed, ln_unit, n_zero, 0, n_excl)


def _evaluate(job) -> ErrorReport:
    fmt, target, src, out_frac, unit = job
    if target in (Target.REPR_SCALED, Target.REPR_UNSCALED):
        return repr_error_sweep(src or default_source(fmt), fmt, target is Target.REPR_SCALED)
    kind = PhiKind.PLUS if target is Target.ARITH_PLUS else PhiKind.MINUS
    out = fmt if out_frac is None else fmt.with_frac_bits(out_frac)
    return arith_error_sweep(build_phi_table(fmt, out, kind), unit=unit)


def base_sweep(
    grid: SweepGrid | Iterable[float],
    template: LnsFormat,
    target: Target,
    src: MiniFloatFormat | None = None,
    workers: int = 1,
    out_frac_bits: int | None = None,
    unit: str = "output",
) -> list[tuple[float, ErrorReport]]:
    """One report per base, in grid order, independent of ``workers``."""
    bases = grid.bases() if isinstance(grid, SweepGrid) else list(grid)
    jobs = [(at_base(template, b), target, src, out_frac_bits, unit) for b in bases]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reports = [_evaluate(j) for j in jobs]
    return list(zip(bases, reports))


def argmin(results: Sequence[tuple[float, ErrorReport]]) -> tuple[float, ErrorReport]:
    """Lowest mean error; the smaller base wins ties."""
    if not results:
        raise DomainError("argmin of an empty sweep")
    return min(results, key=lambda br: (br[1].mean_abs_err_pct_ulp, br[0]))


@dataclass(frozen=True)
class MixedCell:
    out_frac_bits: int
    out_word_bits: int
    best_base: float
    best_error_pct: float
    report: ErrorReport


def mixed_precision_sweep(
    template: LnsFormat,
    out_frac_range: Iterable[int],
    grid: SweepGrid | Iterable[float],
    kind: PhiKind = PhiKind.PLUS,
    workers: int = 1,
) -> list[MixedCell]:
    """Best base and error for each output precision.

    Errors are in input ULPs so that widths are comparable; with the output
    equal to the input this is the plain arithmetic error.
    """
    target = Target.ARITH_PLUS if kind is PhiKind.PLUS else Target.ARITH_MINUS
    cells = []
    for f_out in out_frac_range:
        if f_out < template.frac_bits:
            raise DomainError("output precision below input precision")
        word = 1 + template.int_bits + f_out
        if word > 16:
            raise CapacityError(f"output word of {word} bits exceeds 16")
        res = base_sweep(grid, template, target, workers=workers, out_frac_bits=f_out, unit="input")
        b, rep = argmin(res)
        cells.append(MixedCell(f_out, word, b, rep.mean_abs_err_pct_ulp, rep))
    return cells


CSV_FIELDS = ["base", "format", "target", "mean_pct", "max_pct", "n_zero", "n_overflow", "samples"]


def reports_to_csv(
    results: Sequence[tuple[float, ErrorReport]], template: LnsFormat, target: Target
) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    fmt_label = f"{template.q}:{template.convention.value}"
    for b, r in results:
        w.writerow(
            [
                repr(b),
                fmt_label,
                target.value,
                f"{r.mean_abs_err_pct_ulp:.4f}",
                f"{r.max_abs_err_pct_ulp:.4f}",
                r.n_zero,
                r.n_overflow,
                r.sample_count,
            ]
        )
    return buf.getvalue()


def reports_to_json(
    results: Sequence[tuple[float, ErrorReport]], template: LnsFormat, target: Target
) -> str:
    doc = {
        "format": template.q,
        "convention": template.convention.value,
        "target": target.value,
        "results": [dict(base=b, **r.to_dict()) for b, r in results],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
