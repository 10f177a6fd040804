import pytest
from conftest import make_config

from laxkit.core.errors import ConfigError, NonGenericError, PrescriptionError
from laxkit.services.exactmath import INFINITY, RationalFunction, ord_at, point
from laxkit.services.geometry import (ConstraintSystem, Divisor, GradingPrescription, grading_divisor,
                                      normalized_sections, rr_dim, section_space)
from laxkit.services.laxalgebra import tyurin_conditions


class TestDivisors:
    def test_arithmetic_drops_zero_multiplicities(self):
        d = Divisor.from_map({point(0): 2, INFINITY: -1}) - Divisor.single(point(0), 2)
        assert d.items == ((INFINITY, -1),)
        assert d.degree == -1

    def test_riemann_roch_dimension(self):
        assert rr_dim(Divisor.from_map({point(0): 2, INFINITY: 1})) == 4
        assert rr_dim(Divisor.single(point(0), -1), r=3) == 0

    @pytest.mark.parametrize("poles", [{0: 2}, {0: 1, 1: 1, "inf": 2}, {0: 3, "inf": -1}])
    def test_section_space_has_riemann_roch_dimension(self, poles):
        d = Divisor.from_map({INFINITY if p == "inf" else point(p): m for p, m in poles.items()})
        sections = section_space(ConstraintSystem(d))
        assert len(sections) == rr_dim(d)
        for (f,) in sections:
            for p, m in d.items:
                assert ord_at(f, p) >= -m

    def test_tyurin_conditions_cut_the_space(self):
        config = make_config("gl", 2, tyurin=(("2", ("1", "0")),))
        d = Divisor.single(point(2), 1)
        sections = section_space(ConstraintSystem(d, tyurin_conditions(config)), 4)
        # constants with alpha as eigenvector (3) plus one residue alpha beta^t with beta^t alpha = 0
        assert len(sections) == 4


class TestMarkedConfig:
    def test_counts(self):
        config = make_config("gl", 2, in_points=("0", "1"), out_points=("inf",), tyurin=(("2", ("1", "1")),))
        assert (config.N, config.M, config.K) == (2, 1, 1)
        assert config.marked_points == (point(0), point(1), INFINITY)

    def test_repeated_point(self):
        with pytest.raises(ConfigError):
            make_config("sl", 2, in_points=("0",), out_points=("0",))

    def test_infinite_tyurin_point(self):
        with pytest.raises(ConfigError):
            make_config("gl", 2, tyurin=(("inf", ("1", "0")),), out_points=("1",))

    def test_so_needs_isotropic_alpha(self):
        with pytest.raises(ConfigError):
            make_config("so", 4, tyurin=(("1", ("1", "0", "0", "0")),))
        make_config("so", 4, tyurin=(("1", ("1", "i", "0", "0")),))

    def test_alpha_length(self):
        with pytest.raises(ConfigError):
            make_config("gl", 2, tyurin=(("2", ("1",)),))


class TestPrescriptions:
    def test_single_out_point(self):
        config = make_config("sl", 2, in_points=("0", "1"))
        d = grading_divisor(1, config, GradingPrescription.single_out(2))
        assert d.support == {point(0): -1, point(1): -1, INFINITY: 3}

    def test_standard_degrees(self):
        config = make_config("sl", 2, in_points=("0", "1", "2"), out_points=("inf", "5"))
        prescription = GradingPrescription.standard(3, 2)
        prescription.validate(3, 2, range(-3, 4))
        d = grading_divisor(0, config, prescription)
        assert d.degree == config.N - 1

    def test_standard_needs_enough_in_points(self):
        with pytest.raises(PrescriptionError):
            GradingPrescription.standard(1, 2)

    def test_tyurin_points_enter_the_divisor(self):
        config = make_config("sp", 1, tyurin=(("1", ("1", "0")),))
        d = grading_divisor(0, config, GradingPrescription.single_out(1))
        assert d.multiplicity(point(1)) == 2

    def test_expected_S(self):
        assert GradingPrescription.single_out(1).expected_S() == 0
        assert GradingPrescription.single_out(2).expected_S() == 1


class TestNormalization:
    def test_too_many_sections_are_not_accepted(self):
        system = ConstraintSystem(Divisor.single(INFINITY, 2))
        with pytest.raises(NonGenericError) as info:
            normalized_sections(system, 1, (point(0),), 0, INFINITY, 2)
        assert info.value.failing == [(1, 0)]

    def test_removing_poles_when_allowed(self):
        system = ConstraintSystem(Divisor.single(INFINITY, 2))
        outcome = normalized_sections(system, 1, (point(0),), 0, INFINITY, 2, tag=(0,), downward=True)
        assert outcome.space_dimension == 1
        assert outcome.sections[(0, 0)].components == (RationalFunction.constant(1),)
        assert outcome.adjustments == [
            {"index": [0], "delta": -2, "point": "inf", "reason": "dimension", "dimension": 3}]

    def test_adding_a_pole_at_the_bump_point(self):
        system = ConstraintSystem(Divisor.single(INFINITY, -1))
        outcome = normalized_sections(system, 1, (point(0),), 0, INFINITY, 1, tag=(0,))
        assert outcome.space_dimension == 1
        assert outcome.sections[(0, 0)].delta == 1
        assert outcome.adjustments[0]["reason"] == "dimension"

    def test_generic_spaces_need_no_bump(self):
        system = ConstraintSystem(Divisor.single(point(0), -1) + Divisor.single(INFINITY, 1))
        outcome = normalized_sections(system, 1, (point(0),), 1, INFINITY, 0)
        assert outcome.sections[(0, 0)].components == (RationalFunction.monomial(1),)
        assert outcome.adjustments == []


def test_constant_functions_are_sections():
    (f,) = section_space(ConstraintSystem(Divisor()))[0]
    assert f == RationalFunction.constant(1)
