"""Truth tables, BLIF export and the ROM transistor-count model."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from .arith import FORCED_ZERO, PhiTable
from .exceptions import DomainError, ParseError, RangeError, UnknownDecoder


@dataclass(frozen=True)
class TruthTable:
    """``rows[k]`` is the output word for input ``k``; bit ``out_bits - 1`` is
    the leftmost (MSB) column."""

    in_bits: int
    out_bits: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.in_bits < 0 or self.out_bits < 1:
            raise DomainError("truth table needs in_bits >= 0 and out_bits >= 1")
        if len(self.rows) != 2**self.in_bits:
            raise DomainError(f"expected {2 ** self.in_bits} rows, got {len(self.rows)}")
        limit = 1 << self.out_bits
        for r in self.rows:
            if not 0 <= r < limit:
                raise DomainError(f"row value {r} does not fit in {self.out_bits} bits")

    def column(self, j: int) -> tuple[int, ...]:
        """Column ``j`` counted from the MSB."""
        if not 0 <= j < self.out_bits:
            raise RangeError(f"column {j} outside 0..{self.out_bits - 1}")
        shift = self.out_bits - 1 - j
        return tuple((r >> shift) & 1 for r in self.rows)

    def ones(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)


def truth_table(tbl: PhiTable, drop_zero_msbs: bool = False) -> TruthTable:
    """Table words as unsigned magnitudes; forced-zero entries become 0.

    The word is wide enough for the output format's exponent bits and for
    the largest stored magnitude.  ``drop_zero_msbs`` removes leading
    columns that are zero in every row.
    """
    rows = tuple(0 if e is FORCED_ZERO else abs(e) for e in tbl.entries)
    top = max(rows)
    width = max(tbl.output_format.bits, top.bit_length())
    if drop_zero_msbs:
        width = max(1, top.bit_length())
    return TruthTable(tbl.input_format.bits, width, rows)


def _bits(k: int, n: int) -> str:
    return format(k, f"0{n}b") if n else ""


def emit_blif(tt: TruthTable, model_name: str) -> str:
    """On-set cover, one cube per minterm.  Inputs and outputs are listed
    MSB-first as ``x<n-1> .. x0`` and ``y<m-1> .. y0``."""
    if tt.in_bits < 1:
        raise DomainError("BLIF export needs at least one input bit")
    if not model_name or any(c.isspace() for c in model_name):
        raise DomainError(f"bad model name {model_name!r}")
    ins = [f"x{k}" for k in range(tt.in_bits - 1, -1, -1)]
    lines = [f".model {model_name}", ".inputs " + " ".join(ins)]
    lines.append(".outputs " + " ".join(f"y{k}" for k in range(tt.out_bits - 1, -1, -1)))
    for k in range(tt.out_bits - 1, -1, -1):
        on = [i for i, r in enumerate(tt.rows) if (r >> k) & 1]
        if not on:
            lines.append(f".names y{k}")
            continue
        lines.append(".names " + " ".join(ins) + f" y{k}")
        lines.extend(f"{_bits(i, tt.in_bits)} 1" for i in on)
    lines.append(".end")
    return "\n".join(lines) + "\n"


def parse_blif(text: str) -> tuple[str, TruthTable]:
    """Strict reader for the subset written by :func:`emit_blif`."""
    lines = [(n, ln.rstrip("\n")) for n, ln in enumerate(text.splitlines(), 1)]
    lines = [(n, ln) for n, ln in lines if ln.strip()]
    it = iter(lines)

    def expect(prefix: str) -> tuple[int, list[str]]:
        try:
            n, ln = next(it)
        except StopIteration:
            raise ParseError(f"unexpected end of file, expected {prefix}") from None
        parts = ln.split()
        if parts[0] != prefix:
            raise ParseError(f"expected {prefix}, got {parts[0]!r}", n)
        return n, parts[1:]

    n, args = expect(".model")
    if len(args) != 1:
        raise ParseError(".model takes one name", n)
    name = args[0]
    n, ins = expect(".inputs")
    n_in = len(ins)
    if n_in < 1 or ins != [f"x{k}" for k in range(n_in - 1, -1, -1)]:
        raise ParseError("inputs must be x<n-1> .. x0", n)
    n, outs = expect(".outputs")
    n_out = len(outs)
    if n_out < 1 or outs != [f"y{k}" for k in range(n_out - 1, -1, -1)]:
        raise ParseError("outputs must be y<m-1> .. y0", n)

    rows = [0] * (2**n_in)
    pending = list(range(n_out - 1, -1, -1))
    cur = None
    prev = -1
    ended = False
    for n, ln in it:
        parts = ln.split()
        if ended:
            raise ParseError("content after .end", n)
        if parts[0] == ".end":
            if len(parts) != 1:
                raise ParseError(".end takes no arguments", n)
            ended = True
        elif parts[0] == ".names":
            if not pending:
                raise ParseError("too many .names blocks", n)
            k = pending.pop(0)
            if parts[1:] not in ([f"y{k}"], ins + [f"y{k}"]):
                raise ParseError(f"bad .names header for y{k}", n)
            cur = k if len(parts) > 2 else None
            prev = -1
        else:
            if cur is None:
                raise ParseError("cube outside a .names block with inputs", n)
            if len(parts) != 2 or parts[1] != "1" or len(parts[0]) != n_in:
                raise ParseError(f"bad cube {ln!r}", n)
            if set(parts[0]) - {"0", "1"}:
                raise ParseError(f"cube {parts[0]!r} is not a minterm", n)
            idx = int(parts[0], 2)
            if idx <= prev:
                raise ParseError("minterms must be strictly ascending", n)
            prev = idx
            rows[idx] |= 1 << cur
    if not ended:
        raise ParseError("missing .end")
    if pending:
        raise ParseError(f"missing .names block for y{pending[0]}")
    return name, TruthTable(n_in, n_out, tuple(rows))


def split_columns(tt: TruthTable, k: int, from_msb: bool = True) -> tuple[TruthTable, TruthTable]:
    """Split off ``k`` columns from the MSB (or LSB) side; returns
    ``(group, rest)``."""
    if not 0 < k < tt.out_bits:
        raise RangeError(f"split size {k} outside 1..{tt.out_bits - 1}")
    lo_bits = tt.out_bits - k if from_msb else k
    mask = (1 << lo_bits) - 1
    high = tuple(r >> lo_bits for r in tt.rows)
    low = tuple(r & mask for r in tt.rows)
    high_t = TruthTable(tt.in_bits, tt.out_bits - lo_bits, high)
    low_t = TruthTable(tt.in_bits, lo_bits, low)
    return (high_t, low_t) if from_msb else (low_t, high_t)


def merge_columns(group: TruthTable, rest: TruthTable, from_msb: bool = True) -> TruthTable:
    """Inverse of :func:`split_columns`."""
    if group.in_bits != rest.in_bits:
        raise DomainError("tables have different inputs")
    high, low = (group, rest) if from_msb else (rest, group)
    rows = tuple((h << low.out_bits) | l for h, l in zip(high.rows, low.rows))
    return TruthTable(group.in_bits, group.out_bits + rest.out_bits, rows)


def column_groups(tt: TruthTable, from_msb: bool = True) -> Iterator[tuple[int, TruthTable]]:
    """Tables of the first ``k`` columns for k = 1..out_bits."""
    for k in range(1, tt.out_bits):
        yield k, split_columns(tt, k, from_msb)[0]
    yield tt.out_bits, tt


def _log2_exact(n: int, what: str) -> int:
    if n < 1 or n & (n - 1):
        raise DomainError(f"{what} must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class RomGeometry:
    words: int
    word_bits: int
    rows_phys: int
    words_per_row: int

    def __post_init__(self):
        _log2_exact(self.rows_phys, "rows_phys")
        _log2_exact(self.words_per_row, "words_per_row")
        if self.rows_phys * self.words_per_row != self.words:
            raise DomainError("rows_phys * words_per_row must equal words")
        if self.word_bits < 1:
            raise DomainError("word_bits must be positive")

    @property
    def row_address_bits(self) -> int:
        return _log2_exact(self.rows_phys, "rows_phys")

    @property
    def column_address_bits(self) -> int:
        return _log2_exact(self.words_per_row, "words_per_row")

    @property
    def columns(self) -> int:
        return self.words_per_row * self.word_bits


SEEDED_DECODER_COSTS = {7: 1022, 4: 122, 3: 54}
SEEDED_DECODER_DELAYS = {4: 4.7, 3: 3.3}
# Fitted so that the geometries below reproduce the reference mixed-precision
# ROM costs; not synthesis data.
FITTED_DECODER_COSTS = {1: 2, 2: 11, 3: 54, 4: 122, 5: 250, 6: 510, 7: 1022, 8: 2050}
# (rows_phys, words_per_row) per input word length.  One arrangement serves
# every output width of a given input width.  Not always the cheapest one.
REFERENCE_GEOMETRY = {
    5: (8, 2), 6: (8, 4), 7: (16, 4), 8: (16, 8), 9: (32, 8), 10: (32, 16),
    11: (64, 16), 12: (64, 32), 13: (128, 32), 14: (128, 64), 15: (256, 64),
    16: (256, 128),
}


def reference_geometry(wl_in: int, wl_out: int) -> RomGeometry:
    """ROM for a mixed-precision table: ``2**(wl_in-1)`` words of
    ``wl_out - 1`` bits (the sign is not stored)."""
    if wl_in not in REFERENCE_GEOMETRY or not wl_in <= wl_out <= 16:
        raise RangeError(f"no fitted geometry for WL_i={wl_in}, WL_o={wl_out}")
    rows, wpr = REFERENCE_GEOMETRY[wl_in]
    return RomGeometry(rows * wpr, wl_out - 1, rows, wpr)


@dataclass(frozen=True)
class RomCostModel:
    """Decoder costs are keyed by address bits (n -> 2**n outputs)."""

    decoder_costs: Mapping[int, int] = field(default_factory=lambda: dict(SEEDED_DECODER_COSTS))
    bit_cost: int = 1
    sense_amp_cost: int = 5
    precharge_cost: int = 1
    decoder_delays: Mapping[int, float] = field(
        default_factory=lambda: dict(SEEDED_DECODER_DELAYS)
    )
    fitted: bool = False

    def __post_init__(self):
        costs = [self.bit_cost, self.sense_amp_cost, self.precharge_cost]
        costs += list(self.decoder_costs.values())
        if any(c <= 0 for c in costs):
            raise DomainError("all costs must be positive")

    @classmethod
    def fitted_costs(cls) -> "RomCostModel":
        return cls(decoder_costs=dict(FITTED_DECODER_COSTS), fitted=True)

    def with_decoders(self, extra: Mapping[int, int]) -> "RomCostModel":
        merged = dict(self.decoder_costs)
        merged.update(extra)
        return RomCostModel(
            merged,
            self.bit_cost,
            self.sense_amp_cost,
            self.precharge_cost,
            dict(self.decoder_delays),
            self.fitted,
        )

    def decoder_cost(self, address_bits: int) -> int:
        if address_bits == 0:
            return 0
        try:
            return self.decoder_costs[address_bits]
        except KeyError:
            raise UnknownDecoder(address_bits) from None

    def decoder_delay(self, address_bits: int) -> float:
        if address_bits == 0:
            return 0.0
        try:
            return self.decoder_delays[address_bits]
        except KeyError:
            raise UnknownDecoder(address_bits) from None


class RomCost(NamedTuple):
    storage: int
    precharge: int
    sense: int
    decoder: int
    total: int


def rom_cost(geom: RomGeometry, model: RomCostModel | None = None) -> RomCost:
    model = model or RomCostModel()
    storage = geom.words * geom.word_bits * model.bit_cost
    precharge = geom.columns * model.precharge_cost
    sense = geom.columns * model.sense_amp_cost
    decoder = model.decoder_cost(geom.row_address_bits) + model.decoder_cost(
        geom.column_address_bits
    )
    return RomCost(storage, precharge, sense, decoder, storage + precharge + sense + decoder)


def rom_cost_minimize(
    words: int, word_bits: int, model: RomCostModel | None = None
) -> tuple[RomGeometry, RomCost]:
    """Cheapest power-of-two arrangement; ties go to more words per row."""
    model = model or RomCostModel()
    n = _log2_exact(words, "words")
    best = None
    missing = None
    for c in range(n + 1):
        geom = RomGeometry(words, word_bits, words >> c, 1 << c)
        try:
            cost = rom_cost(geom, model)
        except UnknownDecoder as exc:
            missing = missing if missing is not None else exc.address_bits
            continue
        if best is None or cost.total <= best[1].total:
            best = (geom, cost)
    if best is None:
        raise UnknownDecoder(missing)
    return best


def delay_report(geom: RomGeometry, model: RomCostModel | None = None) -> dict:
    model = model or RomCostModel()
    d = model.decoder_delay(geom.row_address_bits) + model.decoder_delay(geom.column_address_bits)
    return {"decoder_delay_units": round(d, 12)}


SYNTH_FIELDS = ["base", "format", "table", "transistors", "delay"]


def import_synth_stats(text: str) -> dict[float, dict]:
    """Parse ``base,format,table,transistors,delay`` rows from external tools.

    A header row is optional.  Each base may appear once.
    """
    out: dict[float, dict] = {}
    for n, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if n == 1 and [c.lower() for c in cells] == SYNTH_FIELDS:
            continue
        if len(cells) != 5:
            raise ParseError(f"expected 5 fields, got {len(cells)}", n)
        base_s, fmt, table, tr_s, delay_s = cells
        try:
            base = float(base_s)
        except ValueError:
            raise ParseError(f"bad base {base_s!r}", n) from None
        try:
            transistors = int(tr_s)
        except ValueError:
            raise ParseError(f"bad transistor count {tr_s!r}", n) from None
        try:
            delay = float(delay_s)
        except ValueError:
            raise ParseError(f"bad delay {delay_s!r}", n) from None
        if not base > 1 or not math.isfinite(base):
            raise ParseError(f"base must exceed 1, got {base_s}", n)
        if transistors < 0 or not delay >= 0 or not math.isfinite(delay):
            raise ParseError("transistors and delay must be non-negative", n)
        if base in out:
            raise ParseError(f"duplicate base {base_s}", n)
        out[base] = {"format": fmt, "table": table, "transistors": transistors, "delay": delay}
    return out


def export_synth_stats(stats: Mapping[float, Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SYNTH_FIELDS)
    for base in sorted(stats):
        s = stats[base]
        w.writerow([repr(base), s["format"], s["table"], s["transistors"], repr(float(s["delay"]))])
    return buf.getvalue()


def merge_synth_stats(rows: list[dict], stats: Mapping[float, Mapping]) -> list[dict]:
    """Attach imported synthesis figures to sweep rows keyed by ``base``."""
    merged = []
    for r in rows:
        s = stats.get(float(r["base"]))
        extra = {"transistors": s["transistors"], "delay": s["delay"]} if s else {}
        merged.append({**r, **extra})
    return merged
