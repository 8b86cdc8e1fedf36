"""``lnslab`` command-line front end."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .arith import PhiKind, build_addsub_tables, build_phi_table
from .core import Convention, LnsFormat, alias_format, make_format, parse_format, parse_q, value_set
from .errorlab import SweepGrid, Target, argmin, base_sweep, reports_to_csv, reports_to_json
from .exceptions import CapacityError, DomainError, LnsError, ParseError, UnknownDecoder
from .fir import compare_systems, design_lowpass, parse_stimulus, reports_csv, split_systems
from .minifloat import parse_minifloat
from .synth import (
    RomCostModel,
    RomGeometry,
    column_groups,
    delay_report,
    emit_blif,
    parse_blif,
    rom_cost,
    rom_cost_minimize,
    truth_table,
)

MANIFEST_SCHEMA = 1
EXIT_CONFIG = 2
EXIT_CAPACITY = 1


class ConfigError(LnsError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get("LNSLAB_OUT") or "lnslab_out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(path: Path, text: str, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    written.append(path)


def _manifest(out: Path, command: str, config: dict, written: list[Path]) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA,
        "tool": "lnslab",
        "version": __version__,
        "command": command,
        "config": config,
        "files": sorted(str(p.relative_to(out)) for p in written),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _base_label(base: float) -> str:
    return repr(base)


def _config(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _template(args) -> LnsFormat:
    i, f = parse_q(args.fmt)
    return make_format(2.0, i, f, Convention.parse(args.convention))


def cmd_sweep(args) -> int:
    target = Target.parse(args.target)
    template = _template(args)
    grid = SweepGrid.parse(args.grid)
    src = parse_minifloat(args.src) if args.src else None
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    results = base_sweep(
        grid, template, target, src=src, workers=args.workers, out_frac_bits=args.out_frac
    )
    out = _out_dir(args)
    written: list[Path] = []
    _write(out / "sweep.csv", reports_to_csv(results, template, target), written)
    _write(out / "sweep.json", reports_to_json(results, template, target), written)
    b, rep = argmin(results)
    best = {"base": b, "format": template.q, "target": target.value, **rep.to_dict()}
    _write(out / "best.json", json.dumps(best, indent=2, sort_keys=True) + "\n", written)
    _manifest(out, "sweep", _config(args), written)
    print(
        f"{target.value} {template.q} ({template.convention.value}): "
        f"best base {b:.3f}, mean {rep.mean_abs_err_pct_ulp:.4f}% ULP, N_z {rep.n_zero}, "
        f"{len(results)} bases"
    )
    return 0


def cmd_table(args) -> int:
    i, f = parse_q(args.fmt)
    fmt = make_format(args.base, i, f, Convention.parse(args.convention))
    kind = PhiKind(args.kind)
    f_out = f if args.out_frac is None else args.out_frac
    if args.widen_minus:
        plus, minus = build_addsub_tables(fmt, f_out)
        tbl = plus if kind is PhiKind.PLUS else minus
    else:
        tbl = build_phi_table(fmt, fmt.with_frac_bits(f_out), kind)
    out = _out_dir(args)
    written: list[Path] = []
    base_dir = Path(_base_label(fmt.base)) / f"Q{i}_{f}" if f_out == f else Path(
        _base_label(fmt.base)
    ) / f"Q{i}_{f}_o{f_out}"
    if args.emit == "csv":
        _write(out / "tables" / base_dir / f"{kind.value}.csv", tbl.to_csv(), written)
        print(f"{kind.value} table {fmt.q} base {fmt.base!r}: {len(tbl)} rows")
    else:
        tt = truth_table(tbl, drop_zero_msbs=args.drop_zero_msbs)
        groups = [(None, tt)]
        if args.split:
            groups = list(column_groups(tt, from_msb=args.split == "msb"))
        for k, part in groups:
            suffix = "" if k is None else f"_cols{k}{args.split}"
            name = f"{kind.value}{suffix}"
            text = emit_blif(part, name)
            if parse_blif(text)[1] != part:
                raise LnsError("BLIF round trip failed")
            _write(out / "blif" / base_dir / f"{name}.blif", text, written)
        print(f"{len(groups)} BLIF file(s), {tt.in_bits} inputs, {tt.out_bits} outputs")
    _manifest(out, "table", _config(args), written)
    return 0


def _model(args) -> RomCostModel:
    model = RomCostModel.fitted_costs() if args.fitted_decoders else RomCostModel()
    extra = {}
    for item in args.decoder or []:
        try:
            n, cost = item.split("=")
            extra[int(n)] = int(cost)
        except ValueError:
            raise ConfigError(f"bad --decoder {item!r}, expected bits=cost") from None
    return model.with_decoders(extra) if extra else model


def _print_cost(geom: RomGeometry, cost, label: str = "") -> None:
    print(
        f"{label}{geom.words}x{geom.word_bits} as {geom.rows_phys} rows x "
        f"{geom.words_per_row} words: storage {cost.storage}, precharge {cost.precharge}, "
        f"sense {cost.sense}, decoder {cost.decoder}, total {cost.total}"
    )


def cmd_romcost(args) -> int:
    model = _model(args)
    results = []
    if args.reference_cases:
        cases = [
            ("one decoder: ", RomGeometry(128, 7, 128, 1)),
            ("two decoders: ", RomGeometry(128, 7, 16, 8)),
            ("5-bit, two decoders: ", RomGeometry(128, 5, 16, 8)),
        ]
        for label, g in cases:
            c = rom_cost(g, model)
            _print_cost(g, c, label)
            results.append((g, c))
    else:
        if args.words is None or args.bits is None:
            raise ConfigError("--words and --bits are required")
        if args.minimize:
            g, c = rom_cost_minimize(args.words, args.bits, model)
        else:
            rows = args.rows or args.words
            wpr = args.words // rows if args.words % rows == 0 else 0
            if wpr == 0:
                raise ConfigError("--rows must divide --words")
            g = RomGeometry(args.words, args.bits, rows, wpr)
            c = rom_cost(g, model)
        _print_cost(g, c)
        results.append((g, c))
        try:
            print(f"decoder delay {delay_report(g, model)['decoder_delay_units']} units")
        except UnknownDecoder as exc:
            print(f"decoder delay unavailable ({exc})")
    if args.out or os.environ.get("LNSLAB_OUT"):
        out = _out_dir(args)
        written: list[Path] = []
        doc = [{**g.__dict__, **c._asdict()} for g, c in results]
        _write(out / "romcost.json", json.dumps(doc, indent=2, sort_keys=True) + "\n", written)
        _manifest(out, "romcost", _config(args), written)
    return 0


def cmd_fir(args) -> int:
    systems = split_systems(args.systems)
    if not systems:
        raise ConfigError("--systems is empty")
    h = design_lowpass(args.order, args.cutoff)
    x = parse_stimulus(args.input)
    reports = compare_systems(h, systems, x)
    out_path = Path(args.out)
    if not out_path.is_absolute():
        out_path = Path(os.environ.get("LNSLAB_OUT", ".")) / out_path
    out_dir = out_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    _write(out_path, reports_csv(reports), written)
    for r in reports:
        print(f"{r.label}: rms {r.rms:.6g}, max {r.max_abs:.6g}, saturated {r.n_saturated}")
    _manifest(out_dir, "fir", _config(args), written)
    return 0


def cmd_alias_check(args) -> int:
    fmt = parse_format(args.fmt, Convention.parse(args.convention))
    if args.other:
        other = parse_format(args.other, fmt.convention)
        ours, theirs = value_set(fmt), value_set(other)
        same = len(ours) == len(theirs) and all(
            math.isclose(a, b, rel_tol=args.rel_tol, abs_tol=0.0) for a, b in zip(ours, theirs)
        )
    else:
        other = alias_format(fmt, args.shift)
        same = value_set(fmt) == value_set(other)
    verdict = "PASS" if same else "FAIL"
    print(f"{verdict}: b={fmt.base!r} {fmt.q} vs b={other.base!r} {other.q}")
    return 0 if same else 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lnslab", description="Arbitrary-base LNS toolkit.")
    p.add_argument("--version", action="version", version=f"lnslab {__version__}")
    p.add_argument("--config", help="JSON file with default option values")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default=None):
        sp.add_argument("--out", default=out_default, help="output directory (default $LNSLAB_OUT)")
        sp.add_argument("--convention", default="twos-complement-half")

    s = sub.add_parser("sweep", help="error sweep over a grid of bases")
    s.add_argument("--target", required=True)
    s.add_argument("--fmt", required=True, help="Q(i,f)")
    s.add_argument("--grid", default="1.414:2.0:0.001", help="lo:hi:step")
    s.add_argument("--src", help="minifloat source for repr targets, e.g. e2m2")
    s.add_argument("--out-frac", type=int, help="output fractional bits (mixed precision)")
    s.add_argument("--workers", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("table", help="build a phi table and dump CSV or BLIF")
    t.add_argument("--fmt", required=True)
    t.add_argument("--base", type=float, required=True)
    t.add_argument("--kind", choices=["plus", "minus"], required=True)
    t.add_argument("--out-frac", type=int)
    t.add_argument("--emit", choices=["csv", "blif"], default="csv")
    t.add_argument("--drop-zero-msbs", action="store_true")
    t.add_argument("--split", choices=["msb", "lsb"], help="emit one BLIF per column group")
    t.add_argument("--widen-minus", action="store_true", help="minus table with one extra integer bit")
    common(t)
    t.set_defaults(func=cmd_table)

    r = sub.add_parser("romcost", help="ROM transistor count")
    r.add_argument("--words", type=int)
    r.add_argument("--bits", type=int)
    r.add_argument("--rows", type=int, help="physical rows (default: one word per row)")
    r.add_argument("--minimize", action="store_true")
    r.add_argument("--reference-cases", action="store_true", help="the three 128-word reference cases")
    r.add_argument("--fitted-decoders", action="store_true", help="use the fitted decoder cost set")
    r.add_argument("--decoder", action="append", help="extra decoder cost, bits=cost")
    r.add_argument("--out")
    r.set_defaults(func=cmd_romcost)

    f = sub.add_parser("fir", help="FIR filter comparison")
    f.add_argument("action", choices=["run"])
    f.add_argument("--order", type=int, default=11)
    f.add_argument("--cutoff", type=float, default=0.2)
    f.add_argument("--systems", required=True)
    f.add_argument("--input", default="sine:1024:seed=7")
    f.add_argument("--out", default="report.csv")
    f.set_defaults(func=cmd_fir)

    a = sub.add_parser("alias-check", help="compare value sets of aliased formats")
    a.add_argument("--fmt", required=True, help="b=<base>:Q(i,f)")
    a.add_argument("--shift", type=int, default=0)
    a.add_argument("--other", help="second format to compare instead of a shift")
    a.add_argument("--rel-tol", type=float, default=1e-12)
    a.add_argument("--convention", default="twos-complement-half")
    a.set_defaults(func=cmd_alias_check)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {known.config}: {exc}") from None
        if not isinstance(defaults, dict):
            raise ConfigError("config file must hold a JSON object")
        for action in parser._subparsers._group_actions:  # noqa: SLF001
            for sp in action.choices.values():
                sp.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (CapacityError, UnknownDecoder) as exc:
        print(f"lnslab: error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ParseError, DomainError, ConfigError, ValueError) as exc:
        print(f"lnslab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    raise SystemExit(main())
