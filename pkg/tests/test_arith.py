import math

import pytest

from lnslab import (
    FORCED_ZERO,
    CapacityError,
    Convention,
    DivideByZero,
    DomainError,
    LnsValue,
    PhiKind,
    Status,
    build_addsub_tables,
    build_phi_table,
    decode,
    encode,
    lns_add_sub,
    lns_div,
    lns_mul,
    lns_sqrt,
    make_format,
    phi_exact,
    phi_selector,
)
from lnslab.arith import table_index

SMALL = [(2, 2), (2, 3), (3, 3)]
BASES = [1.5, math.sqrt(2), 2.0]


def nonzero(fmt):
    for c in range(fmt.code_min, fmt.code_max + 1):
        yield LnsValue(False, False, c)
        yield LnsValue(False, True, c)


def operands(fmt):
    yield LnsValue.zero_value()
    yield from nonzero(fmt)


def v(code, sign=False):
    return LnsValue(False, sign, code)


class TestMulDiv:
    def test_mul(self):
        f = make_format(2.0, 3, 0)
        assert decode(lns_mul(v(1), v(2), f), f) == 8.0
        assert lns_mul(LnsValue.zero_value(), v(2), f).zero

    def test_mul_saturates(self):
        f = make_format(2.0, 2, 2)
        r = lns_mul(v(f.code_max), v(f.code_max), f)
        assert r.code == f.code_max and r.status is Status.OVERFLOW

    def test_div(self):
        f = make_format(2.0, 3, 0)
        assert decode(lns_div(v(3), v(1), f), f) == 4.0
        assert lns_div(LnsValue.zero_value(), v(1), f).zero
        with pytest.raises(DivideByZero):
            lns_div(v(1), LnsValue.zero_value(), f)

    def test_div_underflow(self):
        f = make_format(2.0, 2, 2)
        r = lns_div(v(f.code_min), v(f.code_max), f)
        assert r.zero and r.status is Status.UNDERFLOW

    @pytest.mark.parametrize("base", BASES)
    def test_mul_div_exhaustive_oracle(self, base):
        f = make_format(base, 2, 2)
        for a in operands(f):
            for b in operands(f):
                exact = decode(a, f) * decode(b, f)
                assert lns_mul(a, b, f) == encode(exact, f)
                if exact and lns_mul(a, b, f).status is Status.OK:
                    assert decode(lns_mul(a, b, f), f) == pytest.approx(exact, rel=1e-12)
                if not b.zero:
                    assert lns_div(a, b, f) == encode(decode(a, f) / decode(b, f), f)

    def test_sqrt(self):
        f = make_format(2.0, 4, 0)
        assert decode(lns_sqrt(v(4), f), f) == 4.0
        assert lns_sqrt(v(3), f).code == 2
        assert lns_sqrt(v(-3), f).code == -2
        assert lns_sqrt(LnsValue.zero_value(), f).zero
        with pytest.raises(DomainError):
            lns_sqrt(v(2, True), f)

    def test_sqrt_oracle(self):
        f = make_format(2.0, 2, 2)
        for c in range(f.code_min, f.code_max + 1):
            r = lns_sqrt(v(c), f)
            exact = math.sqrt(f.real(c))
            # within half a ULP in the log domain
            assert abs(r.code * f.ln_radix - math.log(exact)) <= f.ln_radix / 2 + 1e-12


class TestPhi:
    def test_values(self):
        assert phi_exact(0, 2.0, PhiKind.PLUS) == 1.0
        assert phi_exact(1, 2.0, PhiKind.MINUS) == -1.0
        assert phi_exact(0, 2.0, PhiKind.MINUS) == -math.inf
        assert phi_exact(80, 2.0, PhiKind.PLUS) < 1e-20

    def test_domain(self):
        with pytest.raises(DomainError):
            phi_exact(-0.1, 2.0, PhiKind.PLUS)

    def test_selector(self):
        assert phi_selector(False, False, False) is PhiKind.PLUS
        assert phi_selector(False, True, False) is PhiKind.MINUS
        assert phi_selector(False, False, True) is PhiKind.MINUS
        assert phi_selector(True, True, True) is PhiKind.MINUS
        assert phi_selector(True, False, True) is PhiKind.PLUS


class TestTables:
    def test_sizes_and_first_entries(self):
        f = make_format(2.0, 3, 0)
        p = build_phi_table(f, f, PhiKind.PLUS)
        m = build_phi_table(f, f, PhiKind.MINUS)
        assert len(p) == len(m) == 8
        assert p.entries[0] == 1
        assert m.entries[0] is FORCED_ZERO

    def test_eight_bit_table_shape(self):
        f = make_format(2.0, 4, 3)
        p = build_phi_table(f, None, PhiKind.PLUS)
        assert len(p) == 128
        assert max(p.entries) <= 8

    def test_base_mismatch(self):
        with pytest.raises(DomainError):
            build_phi_table(make_format(2.0, 2, 2), make_format(1.5, 2, 2), PhiKind.PLUS)

    def test_precision_order(self):
        with pytest.raises(DomainError):
            build_phi_table(make_format(2.0, 2, 3), make_format(2.0, 2, 2), PhiKind.PLUS)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            build_phi_table(make_format(2.0, 11, 10), None, PhiKind.PLUS)

    @pytest.mark.parametrize("conv", list(Convention))
    @pytest.mark.parametrize("base", BASES + [1.73])
    @pytest.mark.parametrize("q", SMALL + [(4, 3)])
    def test_invariants(self, conv, base, q):
        f = make_format(base, *q, conv)
        for f_out in (f.frac_bits, f.frac_bits + 3):
            out = f.with_frac_bits(f_out)
            p = build_phi_table(f, out, PhiKind.PLUS)
            m = build_phi_table(f, out, PhiKind.MINUS)
            u = out.ulp_lns
            assert all(e >= 0 for e in p.entries)
            assert all(e * u <= math.log(2, base) + u / 2 + 1e-12 for e in p.entries)
            assert all(a >= b for a, b in zip(p.entries, p.entries[1:]))
            assert m.entries[0] is FORCED_ZERO
            zero_below = out.code_min - 0.5
            for e, x in zip(m.entries, m.exact):
                assert (e is FORCED_ZERO) == (x < zero_below)
            tail = [e for e in m.entries if e is not FORCED_ZERO]
            assert all(a <= b <= 0 for a, b in zip(tail, tail[1:]))
            assert m.entries.index(tail[0]) == m.n_forced_zero()

    def test_csv(self):
        f = make_format(2.0, 2, 1)
        text = build_phi_table(f, None, PhiKind.MINUS).to_csv()
        lines = text.splitlines()
        assert lines[0] == "index,x_value,exact_phi,stored_code,forced_zero"
        assert len(lines) == 1 + 8
        assert lines[1].startswith("0,0.0,-inf,0,1")

    def test_index_rounding(self):
        assert table_index(5, 0, 8) == 5
        assert table_index(5, 1, 8) == 3
        assert table_index(4, 2, 8) == 1
        assert table_index(6, 2, 8) == 2
        assert table_index(99, 0, 8) == 7

    def test_widened_minus(self):
        f = make_format(2.0, 2, 2)
        p, m = build_addsub_tables(f)
        assert p.output_format == f
        assert m.output_format.int_bits == 3
        assert m.n_forced_zero() <= build_phi_table(f, f, PhiKind.MINUS).n_forced_zero()


class TestAddSub:
    def test_worked_example(self):
        f = make_format(math.sqrt(2), 4, 0)
        p, m = build_addsub_tables(f)
        r = lns_add_sub(encode(1.0, f), encode(2.0, f), False, p, m, f)
        assert decode(r, f) == pytest.approx(2 * math.sqrt(2))

    def test_self_subtraction(self):
        f = make_format(1.5, 2, 3)
        p, m = build_addsub_tables(f)
        for a in nonzero(f):
            r = lns_add_sub(a, a, True, p, m, f)
            assert r.zero and r.status is Status.OK

    def test_zero_operands(self):
        f = make_format(2.0, 2, 2)
        p, m = build_addsub_tables(f)
        z = LnsValue.zero_value()
        assert lns_add_sub(z, z, True, p, m, f).zero
        assert lns_add_sub(z, v(3), True, p, m, f) == v(3, True)
        assert lns_add_sub(v(3), z, True, p, m, f) == v(3)

    def test_table_order_checked(self):
        f = make_format(2.0, 2, 2)
        p, m = build_addsub_tables(f)
        with pytest.raises(DomainError):
            lns_add_sub(v(1), v(2), False, m, p, f)

    def test_working_precision_checked(self):
        f = make_format(2.0, 2, 2)
        p, m = build_addsub_tables(f, 4)
        with pytest.raises(DomainError):
            lns_add_sub(v(1), v(2), False, p, m, f)

    @pytest.mark.parametrize("base", BASES)
    @pytest.mark.parametrize("q", SMALL)
    def test_exhaustive_oracle(self, base, q):
        f = make_format(base, *q)
        p, m = build_addsub_tables(f)
        for a in operands(f):
            for b in operands(f):
                for op in (False, True):
                    exact = decode(a, f) + (-decode(b, f) if op else decode(b, f))
                    assert lns_add_sub(a, b, op, p, m, f) == encode(exact, f)

    @pytest.mark.parametrize("base", BASES)
    @pytest.mark.parametrize("q", SMALL)
    def test_commutative(self, base, q):
        f = make_format(base, *q)
        p, m = build_addsub_tables(f)
        for a in operands(f):
            for b in operands(f):
                assert lns_add_sub(a, b, False, p, m, f) == lns_add_sub(b, a, False, p, m, f)

    @pytest.mark.parametrize("base", BASES)
    def test_same_format_minus_only_loses_on_forced_zero(self, base):
        # with a minus table in the operand format, a forced-zero hit may
        # discard a representable result; nothing else differs
        f = make_format(base, 2, 2)
        p = build_phi_table(f, f, PhiKind.PLUS)
        m = build_phi_table(f, f, PhiKind.MINUS)
        for a in nonzero(f):
            for b in nonzero(f):
                for op in (False, True):
                    r = lns_add_sub(a, b, op, p, m, f)
                    exact = decode(a, f) + (-decode(b, f) if op else decode(b, f))
                    want = encode(exact, f)
                    if r != want:
                        idx = table_index(abs(a.code - b.code), 0, len(m))
                        assert m.entries[idx] is FORCED_ZERO
                        assert r.zero and r.status is Status.UNDERFLOW

    def test_mixed_precision_accumulator(self):
        f = make_format(2.0, 2, 2)
        w = f.with_frac_bits(5)
        p, m = build_addsub_tables(f, 5)
        a = LnsValue(False, False, 8)
        b = LnsValue(False, False, 12)
        r = lns_add_sub(a, b, False, p, m, w)
        exact = math.log2(2 ** (8 / 32) + 2 ** (12 / 32)) * 32
        # the difference of 4 working ULPs is rounded onto the 8-ULP table grid
        assert r.code == 8 * 5
        assert abs(r.code - exact) <= 0.5 + 0.5 * 8 * 0.5
