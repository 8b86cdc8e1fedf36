"""Direct-form FIR filters under reference, fixed-point, minifloat and LNS
arithmetic."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .arith import FORCED_ZERO, PhiTable, build_addsub_tables, lns_add_sub, lns_mul
from .core import (
    LnsFormat,
    LnsValue,
    Status,
    decode,
    encode,
    parse_format,
    parse_q,
    requantize,
)
from .exceptions import DomainError, ParseError
from .minifloat import MiniFloatFormat, parse_minifloat


def design_lowpass(order: int, cutoff: float) -> np.ndarray:
    """Hamming-windowed sinc with unity DC gain; ``cutoff`` in cycles/sample."""
    if order < 0:
        raise DomainError("filter order must be non-negative")
    if not 0 < cutoff < 0.5:
        raise DomainError(f"cutoff must lie in (0, 0.5), got {cutoff}")
    n = np.arange(order + 1) - order / 2
    h = 2 * cutoff * np.sinc(2 * cutoff * n) * np.hamming(order + 1)
    h = h / h.sum()
    # exact symmetry regardless of rounding in the window
    return (h + h[::-1]) / 2


@dataclass(frozen=True)
class Reference:
    label: str = "reference"


@dataclass(frozen=True)
class Fixed:
    """Signed fixed point with ``int_bits`` integer and ``frac_bits``
    fractional bits plus a sign bit; saturating, rounded after every op."""

    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise DomainError("fixed-point bit counts must be non-negative")

    @property
    def label(self) -> str:
        return f"fixed:Q({self.int_bits},{self.frac_bits})"

    def quantize(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        step = 2.0**-self.frac_bits
        hi = 2.0**self.int_bits - step
        lo = -(2.0**self.int_bits)
        q = np.sign(x) * np.floor(np.abs(x) / step + 0.5) * step
        sat = (q > hi) | (q < lo)
        return np.clip(q, lo, hi), sat


@dataclass(frozen=True)
class MiniFloat:
    fmt: MiniFloatFormat

    @property
    def label(self) -> str:
        return f"float:{self.fmt.name}"

    def quantize(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = np.asarray(self.fmt.positive_values())
        a = np.abs(x)
        j = np.searchsorted(pos, a)
        lo = np.where(j > 0, pos[np.maximum(j - 1, 0)], 0.0)
        hi = pos[np.minimum(j, len(pos) - 1)]
        q = np.where(a - lo < hi - a, lo, hi)
        sat = a > pos[-1]
        q = np.where(sat, pos[-1], q)
        return np.where(x < 0, -q, q), sat


@dataclass(frozen=True)
class Lns:
    """LNS with an optional wider accumulator (more fractional bits)."""

    fmt: LnsFormat
    acc_frac_bits: int | None = None

    def __post_init__(self):
        if self.acc_frac_bits is not None and self.acc_frac_bits < self.fmt.frac_bits:
            raise DomainError("accumulator needs at least the input precision")

    @property
    def label(self) -> str:
        s = f"lns:{self.fmt.token()}"
        return s if self.acc_frac_bits is None else f"{s}:acc={self.acc_frac_bits}"

    @property
    def acc_format(self) -> LnsFormat:
        f = self.fmt.frac_bits if self.acc_frac_bits is None else self.acc_frac_bits
        return self.fmt.with_frac_bits(f)

    def tables(self) -> tuple[PhiTable, PhiTable]:
        return build_addsub_tables(self.fmt, self.acc_format.frac_bits)


NumberSystem = Union[Reference, Fixed, MiniFloat, Lns]


@dataclass(frozen=True)
class FirSpec:
    coefficients: tuple[float, ...]
    system: NumberSystem

    def __post_init__(self):
        if len(self.coefficients) < 1:
            raise DomainError("a filter needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise DomainError("coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class FirRun:
    y: np.ndarray
    saturated: np.ndarray
    lns_values: tuple[LnsValue, ...] | None = None


def _delayed(x: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return x
    out = np.zeros_like(x)
    out[k:] = x[:-k] if k < len(x) else out[k:]
    return out


def _check_input(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DomainError("input must be a finite 1-D sequence")
    return x


def fir_eval(spec: FirSpec, x: Sequence[float]) -> FirRun:
    """Evaluate ``y(n) = sum_k h(k) x(n-k)``, accumulating over k in order."""
    x = _check_input(x)
    h = np.asarray(spec.coefficients, dtype=float)
    sys_ = spec.system
    if isinstance(sys_, Reference):
        y = np.zeros_like(x)
        for k in range(len(h)):
            y = y + h[k] * _delayed(x, k)
        return FirRun(y, np.zeros(len(x), dtype=bool))
    if isinstance(sys_, (Fixed, MiniFloat)):
        return _eval_rounded(sys_, h, x)
    if isinstance(sys_, Lns):
        return _eval_lns(sys_, h, x)
    raise DomainError(f"unknown number system {sys_!r}")


def _eval_rounded(sys_: Fixed | MiniFloat, h: np.ndarray, x: np.ndarray) -> FirRun:
    xq, sat = sys_.quantize(x)
    hq, hsat = sys_.quantize(h)
    sat = sat | bool(hsat.any())
    acc = np.zeros_like(x)
    for k in range(len(h)):
        p, s1 = sys_.quantize(hq[k] * _delayed(xq, k))
        acc, s2 = sys_.quantize(acc + p)
        sat = sat | s1 | s2
    return FirRun(acc, sat)


def _encode_all(values, fmt: LnsFormat) -> list[LnsValue]:
    return [encode(float(v), fmt) for v in values]


def _unpack(vals: list[LnsValue]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = np.array([v.zero for v in vals], dtype=bool)
    s = np.array([v.sign for v in vals], dtype=bool)
    c = np.array([v.code for v in vals], dtype=np.int64)
    return z, s, c


def _table_arrays(tbl: PhiTable) -> tuple[np.ndarray, np.ndarray]:
    forced = np.array([e is FORCED_ZERO for e in tbl.entries], dtype=bool)
    codes = np.array([0 if e is FORCED_ZERO else e for e in tbl.entries], dtype=np.int64)
    return codes, forced


def _eval_lns(sys_: Lns, h: np.ndarray, x: np.ndarray) -> FirRun:
    fmt, acc_fmt = sys_.fmt, sys_.acc_format
    shift = acc_fmt.frac_bits - fmt.frac_bits
    plus, minus = sys_.tables()
    p_codes, _ = _table_arrays(plus)
    m_codes, m_forced = _table_arrays(minus)
    last = len(plus) - 1
    lo, hi = acc_fmt.code_min, acc_fmt.code_max

    hv = _encode_all(h, fmt)
    xv = _encode_all(x, fmt)
    xz, xs, xc = _unpack(xv)
    sat = np.array([v.status is Status.OVERFLOW for v in xv], dtype=bool)
    if any(v.status is Status.OVERFLOW for v in hv):
        sat[:] = True

    n = len(x)
    az = np.ones(n, dtype=bool)
    as_ = np.zeros(n, dtype=bool)
    ac = np.zeros(n, dtype=np.int64)
    for k, hk in enumerate(hv):
        # delayed input; the history before n=0 is zero
        dz = np.ones(n, dtype=bool)
        ds = np.zeros(n, dtype=bool)
        dc = np.zeros(n, dtype=np.int64)
        if k < n:
            dz[k:], ds[k:], dc[k:] = xz[: n - k], xs[: n - k], xc[: n - k]
        # product in the input format, then widened to the accumulator
        pc = dc + hk.code
        pz = dz | hk.zero | (pc < fmt.code_min)
        over = ~pz & (pc > fmt.code_max)
        sat |= over
        pc = np.where(pz, 0, np.minimum(pc, fmt.code_max)) << shift
        ps = np.where(pz, False, ds ^ hk.sign)

        d = np.abs(ac - pc)
        idx = d if shift == 0 else (d + (1 << (shift - 1))) >> shift
        idx = np.minimum(idx, last)
        sub = as_ != ps
        entry = np.where(sub, m_codes[idx], p_codes[idx])
        code = np.maximum(ac, pc) + entry
        sign = np.where(ac >= pc, as_, ps)
        rz = (sub & ((d == 0) | m_forced[idx])) | (code < lo)
        ro = ~rz & (code > hi)
        sat |= ro & ~az & ~pz
        code = np.where(rz, 0, np.minimum(code, hi))
        sign = np.where(rz, False, sign)
        # zero operands pass the other one through
        nz = np.where(az, pz, np.where(pz, az, rz))
        ns = np.where(az, ps, np.where(pz, as_, sign))
        nc = np.where(az, pc, np.where(pz, ac, code))
        az, as_, ac = nz, ns, nc

    if shift:
        v = ac / float(1 << shift)
        r = np.sign(v) * np.floor(np.abs(v) + 0.5)
        under = v < fmt.code_min - 0.5
        over = v > fmt.code_max + 0.5
        sat |= over & ~az
        az = az | under
        ac = np.where(az, 0, np.clip(r, fmt.code_min, fmt.code_max)).astype(np.int64)
        as_ = np.where(az, False, as_)
    vals = [LnsValue(bool(z), bool(s), int(c)) for z, s, c in zip(az, as_, ac)]
    y = np.array([decode(v, fmt) for v in vals])
    return FirRun(y, sat, tuple(vals))


def fir_eval_scalar(sys_: Lns, h: Sequence[float], x: Sequence[float]) -> list[LnsValue]:
    """Step-by-step oracle built from the scalar LNS operations."""
    fmt, acc_fmt = sys_.fmt, sys_.acc_format
    plus, minus = sys_.tables()
    hv = _encode_all(h, fmt)
    xv = _encode_all(x, fmt)
    out = []
    for n in range(len(xv)):
        acc = LnsValue.zero_value()
        for k, hk in enumerate(hv):
            xk = xv[n - k] if n - k >= 0 else LnsValue.zero_value()
            p = requantize(lns_mul(hk, xk, fmt), fmt, acc_fmt)
            acc = lns_add_sub(acc, p, False, plus, minus, acc_fmt)
        out.append(requantize(acc, acc_fmt, fmt))
    return out


@dataclass(frozen=True)
class SystemReport:
    label: str
    rms: float
    max_abs: float
    n_saturated: int


def compare_systems(
    coefficients: Sequence[float], systems: Sequence[NumberSystem], x: Sequence[float]
) -> list[SystemReport]:
    """Error of each system against double-precision evaluation."""
    x = _check_input(x)
    ref = fir_eval(FirSpec(tuple(coefficients), Reference()), x).y
    reports = []
    for s in systems:
        run = fir_eval(FirSpec(tuple(coefficients), s), x)
        e = run.y - ref
        reports.append(
            SystemReport(
                s.label,
                float(np.sqrt(np.mean(e * e))) if len(e) else 0.0,
                float(np.max(np.abs(e))) if len(e) else 0.0,
                int(run.saturated.sum()),
            )
        )
    return reports


def reports_csv(reports: Sequence[SystemReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["system", "rms", "max_abs", "n_saturated"])
    for r in reports:
        w.writerow([r.label, repr(r.rms), repr(r.max_abs), r.n_saturated])
    return buf.getvalue()


def impulse(n: int) -> np.ndarray:
    x = np.zeros(n)
    if n:
        x[0] = 1.0
    return x


def step(n: int) -> np.ndarray:
    return np.ones(n)


def noise(n: int, seed: int = 0, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.random.default_rng(seed).uniform(-1.0, 1.0, n)


def sine(n: int, seed: int = 0, freq: float = 0.03, amplitude: float = 0.9) -> np.ndarray:
    """Sine with a seed-chosen phase."""
    phase = np.random.default_rng(seed).uniform(0, 2 * np.pi)
    return amplitude * np.sin(2 * np.pi * freq * np.arange(n) + phase)


_GENERATORS = {"impulse": impulse, "step": step, "noise": noise, "sine": sine}


def parse_stimulus(text: str) -> np.ndarray:
    """``kind:length[:seed=N]``, e.g. ``sine:1024:seed=7``."""
    parts = text.strip().split(":")
    if len(parts) < 2 or parts[0] not in _GENERATORS:
        raise ParseError(f"bad stimulus {text!r}, expected kind:length[:seed=N]")
    try:
        n = int(parts[1])
    except ValueError:
        raise ParseError(f"bad stimulus length in {text!r}") from None
    if n < 0:
        raise ParseError("stimulus length must be non-negative")
    kwargs = {}
    for p in parts[2:]:
        m = re.fullmatch(r"seed=(\d+)", p)
        if not m or parts[0] in ("impulse", "step"):
            raise ParseError(f"bad stimulus option {p!r}")
        kwargs["seed"] = int(m.group(1))
    return _GENERATORS[parts[0]](n, **kwargs)


def parse_system(text: str) -> NumberSystem:
    """``reference``, ``fixed:Q(i,f)``, ``float:e<i>m<f>`` or
    ``lns:b=<base>:Q(i,f)[:<convention>][:acc=<f>]``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    if kind == "reference" and not rest:
        return Reference()
    if kind == "fixed":
        return Fixed(*parse_q(rest))
    if kind == "float":
        return MiniFloat(parse_minifloat(rest))
    if kind == "lns":
        acc = None
        m = re.search(r":acc=(\d+)$", rest)
        if m:
            acc, rest = int(m.group(1)), rest[: m.start()]
        try:
            return Lns(parse_format(rest), acc)
        except DomainError as exc:
            raise ParseError(str(exc)) from None
    raise ParseError(f"unknown number system {text!r}")


def split_systems(text: str) -> list[NumberSystem]:
    """Comma-separated systems; commas inside ``Q(i,f)`` are kept."""
    items, depth, cur = [], 0, ""
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            items.append(cur)
            cur = ""
        else:
            cur += ch
    items.append(cur)
    return [parse_system(s) for s in items if s.strip()]
