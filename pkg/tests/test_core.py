import math

import pytest
from hypothesis import given, strategies as st

from lnslab import (
    CapacityError,
    Convention,
    DomainError,
    LnsFormat,
    LnsValue,
    Outcome,
    ParseError,
    RoundingDomain,
    Status,
    alias_format,
    decode,
    encode,
    format_bounds,
    make_format,
    parse_format,
    requantize,
    round_log_domain,
    round_real_domain,
    value_set,
)
from lnslab.core import from_code, parse_q, round_half_away

SW = Convention.SYMMETRIC_WIDE
SMALL = [(2, 2), (2, 3), (3, 3)]
BASES = [1.5, math.sqrt(2), 2.0]


def all_values(fmt):
    yield LnsValue.zero_value()
    for c in range(fmt.code_min, fmt.code_max + 1):
        yield LnsValue(False, False, c)
        yield LnsValue(False, True, c)


class TestFormat:
    def test_radix(self):
        f = make_format(2.0, 4, 3)
        assert f.radix == pytest.approx(2 ** (1 / 8), rel=1e-15)
        assert f.ulp_lns == 0.125
        assert f.ulp_half == pytest.approx(2 ** (1 / 16), rel=1e-15)

    @pytest.mark.parametrize("args", [(1.0, 2, 2), (0.5, 2, 2), (2.0, 0, 2), (2.0, 2, -1)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            make_format(*args)

    def test_nan_base(self):
        with pytest.raises(DomainError):
            make_format(float("nan"), 2, 2)

    def test_code_ranges(self):
        f = make_format(2.0, 2, 2)
        assert (f.code_min, f.code_max, f.n_codes) == (-8, 7, 16)
        g = make_format(2.0, 2, 2, SW)
        assert (g.code_min, g.code_max) == (-15, 15)

    def test_bounds_tch(self):
        b = format_bounds(make_format(2.0, 2, 2))
        assert (b.min_exp, b.max_exp) == (-2.0, 1.75)
        assert b.max_real == pytest.approx(2**1.75)

    def test_bounds_sw_matches_closed_form(self):
        for base in BASES:
            for i, f in SMALL:
                b = format_bounds(make_format(base, i, f, SW))
                assert b.min_exp == -(2**i - 2.0**-f)
                assert b.min_pos_real == pytest.approx(base ** -(2**i - 2.0**-f), rel=1e-13)

    def test_token_roundtrip(self):
        f = make_format(1.73, 4, 3, SW)
        assert parse_format(f.token()) == f

    def test_parse_format_default_convention(self):
        f = parse_format("b=2:Q(2,4)")
        assert f.convention is Convention.TWOS_COMPLEMENT_HALF
        assert (f.int_bits, f.frac_bits) == (2, 4)

    @pytest.mark.parametrize("bad", ["2:Q(2,2)", "b=x:Q(2,2)", "b=2:Q2,2", "b=2:Q(2,2):nope", "b=1:Q(2,2)"])
    def test_parse_format_errors(self, bad):
        with pytest.raises(ParseError):
            parse_format(bad)

    def test_parse_q(self):
        assert parse_q(" Q( 4 , 3 ) ") == (4, 3)
        with pytest.raises(ParseError):
            parse_q("Q(4)")

    def test_convention_aliases(self):
        assert Convention.parse("SW") is SW
        assert Convention.parse("tch") is Convention.TWOS_COMPLEMENT_HALF
        with pytest.raises(ParseError):
            Convention.parse("other")


class TestValue:
    def test_canonical_zero(self):
        with pytest.raises(DomainError):
            LnsValue(True, True, 0)
        with pytest.raises(DomainError):
            LnsValue(True, False, 3)

    def test_status_not_in_equality(self):
        assert LnsValue(False, False, 7, Status.OVERFLOW) == LnsValue(False, False, 7)

    def test_negate(self):
        assert LnsValue(False, False, 3).negate() == LnsValue(False, True, 3)
        assert LnsValue.zero_value().negate().zero


class TestAlias:
    def test_worked_example(self):
        a = make_format(math.sqrt(2), 3, 3)
        b = alias_format(a, 1)
        assert b.base == pytest.approx(2.0, rel=1e-15)
        assert (b.int_bits, b.frac_bits) == (2, 4)
        assert value_set(a) == value_set(b)

    def test_shift_zero(self):
        f = make_format(1.7, 3, 2)
        assert alias_format(f, 0) == f

    def test_negative_shift(self):
        f = make_format(2.0, 3, 4)
        g = alias_format(f, -1)
        # the base moves toward 1 as the point moves left
        assert g.base == pytest.approx(math.sqrt(2), rel=1e-15)
        assert (g.int_bits, g.frac_bits) == (4, 3)
        assert value_set(f) == value_set(g)

    def test_invalid_shift(self):
        with pytest.raises(DomainError):
            alias_format(make_format(2.0, 2, 2), 2)
        with pytest.raises(DomainError):
            alias_format(make_format(2.0, 2, 0), -1)

    @pytest.mark.parametrize("conv", list(Convention))
    @pytest.mark.parametrize("base", BASES + [1.73])
    def test_value_sets_exhaustive(self, conv, base):
        f = make_format(base, 4, 3, conv)
        for s in range(-3, 4):
            assert value_set(alias_format(f, s)) == value_set(f)


class TestValueSet:
    def test_powers_of_two(self):
        vs = value_set(make_format(2.0, 3, 0))
        assert vs[vs.index(1.0):][:4] == [1.0, 2.0, 4.0, 8.0]

    def test_length(self):
        assert len(value_set(make_format(1.6, 3, 2))) == 32
        assert len(value_set(make_format(1.6, 3, 2, SW))) == 63

    def test_sqrt2_alias(self):
        assert value_set(make_format(math.sqrt(2), 3, 0)) == pytest.approx(
            value_set(make_format(2.0, 2, 1)), rel=1e-15
        )

    def test_scale(self):
        assert value_set(make_format(2.0, 2, 0), 3.0) == [0.75, 1.5, 3.0, 6.0]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            value_set(make_format(2.0, 13, 12))


class TestRounding:
    def test_worked_example(self):
        f = make_format(2.0, 3, 0)
        assert round_log_domain(0.5625, f) == 1
        assert round_real_domain(2**0.5625, f) == 0
        mid = decode(LnsValue(False, False, 9), make_format(2.0, 3, 4))
        assert mid == pytest.approx(2**0.5625, rel=1e-15)
        assert mid - 1 < 2 - mid

    def test_log_exact(self):
        f = make_format(2.0, 2, 2)
        assert round_log_domain(0.75, f) == 3

    def test_log_ties_away(self):
        f = make_format(2.0, 3, 0)
        assert round_log_domain(0.5, f) == 1
        assert round_log_domain(-0.5, f) == -1

    def test_round_to_zero_rule(self):
        f = make_format(2.0, 2, 2)
        lo = f.code_min * f.ulp_lns
        assert round_log_domain(lo - 0.6 * f.ulp_lns, f) is Outcome.ZERO
        assert round_log_domain(lo - 0.4 * f.ulp_lns, f) == f.code_min
        assert round_log_domain(-math.inf, f) is Outcome.ZERO

    def test_overflow(self):
        f = make_format(2.0, 2, 2)
        hi = f.code_max * f.ulp_lns
        assert round_log_domain(hi + 0.6 * f.ulp_lns, f) is Outcome.OVERFLOW
        assert round_log_domain(hi + 0.4 * f.ulp_lns, f) == f.code_max

    def test_real_midpoint_ties_up(self):
        assert round_real_domain(1.5, make_format(2.0, 3, 0)) == 1

    def test_real_below_min(self):
        f = make_format(2.0, 2, 0)
        smallest = f.real(f.code_min)
        assert round_real_domain(smallest * 0.49, f) is Outcome.ZERO
        assert round_real_domain(smallest * 0.51, f) == f.code_min

    def test_real_above_max(self):
        f = make_format(2.0, 2, 0)
        top = f.real(f.code_max)
        assert round_real_domain(top * 1.4, f) == f.code_max
        assert round_real_domain(top * 1.6, f) is Outcome.OVERFLOW

    def test_real_bad_input(self):
        with pytest.raises(DomainError):
            round_real_domain(-1.0, make_format(2.0, 2, 2))

    def test_half_away(self):
        assert [round_half_away(v) for v in (2.5, -2.5, 2.49, -0.5, 0.0)] == [3, -3, 2, -1, 0]

    @pytest.mark.parametrize("base", BASES)
    @pytest.mark.parametrize("q", SMALL)
    def test_log_error_bound(self, base, q):
        f = make_format(base, *q)
        u = f.ulp_lns
        m = f.code_min * u - 0.5 * u
        while m <= f.code_max * u + 0.5 * u:
            r = round_log_domain(m, f)
            if not isinstance(r, Outcome):
                assert abs(r * u - m) <= 0.5 * u + 1e-15
            m += u / 37

    @pytest.mark.parametrize("base", BASES)
    @pytest.mark.parametrize("q", SMALL)
    def test_error_bounds(self, base, q):
        f = make_format(base, *q)
        lo, hi = f.real(f.code_min), f.real(f.code_max)
        r = f.radix
        n = 400
        for k in range(n + 1):
            v = lo * (hi / lo) ** (k / n)
            # log-domain rounding: multiplicative error within ULP_h
            got = f.real(encode(v, f).code)
            assert 1 / f.ulp_half - 1e-12 <= got / v <= f.ulp_half + 1e-12
            # real-domain rounding: additive relative error within sqrt(r) - 1
            got = f.real(round_real_domain(v, f))
            assert abs(got - v) / v <= math.sqrt(r) - 1 + 1e-12


class TestEncodeDecode:
    def test_zero(self):
        assert encode(0.0, make_format(2.0, 2, 2)) == LnsValue(True, False, 0)

    def test_negative_one(self):
        assert encode(-1.0, make_format(2.0, 2, 2)) == LnsValue(False, True, 0)

    def test_three_in_sqrt2(self):
        f = make_format(math.sqrt(2), 4, 0)
        assert decode(encode(3.0, f), f) == pytest.approx(2 * math.sqrt(2))

    def test_saturation_flag(self):
        f = make_format(2.0, 2, 2)
        v = encode(100.0, f)
        assert v.code == f.code_max and v.status is Status.OVERFLOW
        z = encode(1e-6, f)
        assert z.zero and z.status is Status.UNDERFLOW

    def test_non_finite(self):
        with pytest.raises(DomainError):
            encode(math.inf, make_format(2.0, 2, 2))

    @pytest.mark.parametrize("domain", list(RoundingDomain))
    @pytest.mark.parametrize("base", BASES)
    @pytest.mark.parametrize("q", SMALL)
    def test_identity_on_representables(self, domain, base, q):
        f = make_format(base, *q)
        for v in all_values(f):
            assert encode(decode(v, f), f, domain) == v

    def test_scale(self):
        f = make_format(2.0, 2, 2)
        v = encode(6.0, f, scale=3.0)
        assert v.code == 4
        assert decode(v, f, 3.0) == pytest.approx(6.0, rel=1e-15)

    @given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False))
    def test_log_rounding_nearest(self, x):
        f = make_format(1.6, 4, 3)
        v = encode(x, f)
        if x == 0 or v.status is not Status.OK:
            return
        err = v.code - math.log(abs(x)) / f.ln_radix
        assert abs(err) <= 0.5 + 1e-9
        assert v.sign == (x < 0)


class TestRequantize:
    def test_widen_exact(self):
        a, b = make_format(2.0, 2, 2), make_format(2.0, 2, 5)
        v = LnsValue(False, True, -3)
        w = requantize(v, a, b)
        assert w.code == -24
        assert decode(w, b) == pytest.approx(decode(v, a), rel=1e-14)

    def test_narrow_rounds_once(self):
        a, b = make_format(2.0, 2, 5), make_format(2.0, 2, 2)
        assert requantize(LnsValue(False, False, 4), a, b).code == 1
        assert requantize(LnsValue(False, False, 3), a, b).code == 0
        assert requantize(LnsValue(False, False, -4), a, b).code == -1

    def test_base_mismatch(self):
        with pytest.raises(DomainError):
            requantize(LnsValue(False, False, 1), make_format(2.0, 2, 2), make_format(1.5, 2, 3))

    def test_from_code(self):
        f = make_format(2.0, 2, 2)
        assert from_code(100, True, f) == LnsValue(False, True, 7)
        assert from_code(-100, True, f).zero


def test_lnsformat_is_hashable():
    assert len({make_format(2.0, 2, 2), make_format(2.0, 2, 2)}) == 1
    assert isinstance(make_format(2, 2, 2), LnsFormat)
