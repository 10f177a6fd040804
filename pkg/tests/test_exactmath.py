import pytest
from hypothesis import given, settings, strategies as st

from laxkit.core.errors import ExactMathError
from laxkit.services.exactmath import (INFINITE_ORDER, INFINITY, ZERO, Point, RationalFunction, coefficient,
                                       format_rf, format_scalar, laurent_expand, ord_at, parse_rf, parse_scalar,
                                       point, residue_at, residue_sum, rf_arithmetic, scalar)

Z = RationalFunction.monomial(1)


def rf(num, den=(1,)):
    return RationalFunction.from_coefficients(num, den)


class TestScalars:
    @pytest.mark.parametrize("text", ["0", "-3", "1/2", "-7/3", "i", "-i", "3/4*i", "1/2-3/4*i", "-2+5*i"])
    def test_format_inverts_parse(self, text):
        c = parse_scalar(text)
        assert parse_scalar(format_scalar(c)) == c

    def test_gaussian_parts(self):
        c = parse_scalar("1/2-3/4*i")
        assert format_scalar(c) == "1/2-3/4*i"
        assert parse_scalar("i") * parse_scalar("i") == scalar(-1)

    @pytest.mark.parametrize("bad", ["", "1/0", "abc", "1.5"])
    def test_malformed(self, bad):
        with pytest.raises(ExactMathError):
            parse_scalar(bad)


class TestRationalFunctions:
    def test_additive_inverse(self):
        f = Z / (Z - 1)
        assert rf_arithmetic(f, -f, "add").is_zero

    def test_multiplicative_inverse(self):
        assert rf_arithmetic(Z, RationalFunction.monomial(-1), "mul") == RationalFunction.constant(1)

    def test_canonical_form(self):
        assert rf([-1, 0, 1], [-1, 1]) == rf([1, 1])

    def test_monic_denominator(self):
        f = rf([2], [0, 4])
        assert f.den.LC == scalar(1)
        assert f == RationalFunction.monomial(-1, parse_scalar("1/2"))

    def test_division_by_zero(self):
        with pytest.raises(ExactMathError):
            rf_arithmetic(Z, RationalFunction.constant(0), "div")

    def test_string_form_round_trip(self):
        f = (Z * Z + parse_scalar("1/2+i")) / (Z - 3)
        assert parse_rf(format_rf(f)) == f

    def test_evaluation_at_pole(self):
        with pytest.raises(ExactMathError):
            (1 / Z)(0)


class TestLocalExpansions:
    def test_monomial_jet(self):
        jet = laurent_expand(RationalFunction.monomial(-1), point(0), -2, 0)
        assert dict(jet.items()) == {-2: ZERO, -1: scalar(1), 0: ZERO}

    def test_geometric_series(self):
        jet = laurent_expand(1 / (Z - 1), point(0), 0, 2)
        assert [c for _, c in jet.items()] == [scalar(-1)] * 3

    def test_chart_at_infinity(self):
        jet = laurent_expand(Z * Z, INFINITY, -2, 0)
        assert dict(jet.items()) == {-2: scalar(1), -1: ZERO, 0: ZERO}

    def test_truncation_is_recorded(self):
        jet = laurent_expand(RationalFunction.monomial(-2), point(0), 0, 1)
        assert jet.truncated
        with pytest.raises(ExactMathError):
            jet[-1]

    @pytest.mark.parametrize("p, expected", [(point(1), 3), (INFINITY, -2)])
    def test_orders(self, p, expected):
        f = (Z - 1) ** 3 / Z
        assert ord_at(f, p) == expected

    def test_order_of_constant_and_zero(self):
        assert ord_at(RationalFunction.constant(5), point(0)) == 0
        assert ord_at(RationalFunction.constant(0), point(0)) == INFINITE_ORDER

    @pytest.mark.parametrize("f, p, expected", [
        (RationalFunction.monomial(-1), point(0), 1),
        (RationalFunction.monomial(-1), INFINITY, -1),
        (Z, INFINITY, 0),
    ])
    def test_residues(self, f, p, expected):
        assert residue_at(f, p) == scalar(expected)


points = st.lists(st.integers(-3, 3), min_size=1, max_size=3, unique=True)
small = st.integers(-4, 4)


@st.composite
def rational_functions(draw):
    """Nonzero functions with poles at a few integer points."""
    poles = draw(points)
    num = draw(st.lists(small, min_size=1, max_size=4).filter(any))
    den = RationalFunction.constant(1)
    for p in poles:
        den = den * (Z - p) ** draw(st.integers(1, 3))
    return rf(num) / den, [Point(scalar(p)) for p in poles]


@settings(max_examples=40, deadline=None)
@given(rational_functions())
def test_residues_sum_to_zero(data):
    f, poles = data
    assert residue_sum(f, poles + [INFINITY]) == ZERO


@settings(max_examples=40, deadline=None)
@given(rational_functions(), rational_functions(), st.integers(-3, 3))
def test_order_is_additive(a, b, at):
    f, g = a[0], b[0]
    p = Point(scalar(at))
    assert ord_at(f * g, p) == ord_at(f, p) + ord_at(g, p)
    assert ord_at(f * g, INFINITY) == ord_at(f, INFINITY) + ord_at(g, INFINITY)


@settings(max_examples=30, deadline=None)
@given(rational_functions(), rational_functions(), st.integers(-3, 3))
def test_jets_multiply(a, b, at):
    f, g = a[0], b[0]
    p = Point(scalar(at))
    lf, lg = int(ord_at(f, p)), int(ord_at(g, p))
    product = laurent_expand(f, p, lf, lf + 3) * laurent_expand(g, p, lg, lg + 3)
    for k, c in product.items():
        assert c == coefficient(f * g, p, k)


@settings(max_examples=30, deadline=None)
@given(rational_functions(), st.integers(-3, 3))
def test_residue_is_jet_coefficient(a, at):
    f = a[0]
    p = Point(scalar(at))
    assert residue_at(f, p) == laurent_expand(f, p, -1, 0)[-1]
