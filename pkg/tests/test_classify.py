import pytest
from conftest import make_config

from laxkit.core.errors import CocycleError, WindowError
from laxkit.services.classify import local_space_dimension, level_recursion_check, normalize_cocycle, psi_forms
from laxkit.services.cocycles import Cycle, coboundary_table, residue_tables
from laxkit.services.connection import build_connection_form
from laxkit.services.exactmath import ONE, ZERO, parse_scalar, scalar
from laxkit.services.grading import homogeneous_basis

H, E, F = 0, 1, 2


@pytest.fixture(scope="module")
def classical_gamma(classical_sl2, classical_basis):
    omega = build_connection_form(classical_sl2)
    return residue_tables(classical_basis, "gamma1", omega).table(Cycle.around_in(classical_sl2, 1))


class TestPsiForms:
    def test_classical_killing_constant(self, classical_basis, classical_gamma):
        psi = psi_forms(classical_gamma, classical_basis)
        trace_gram = classical_basis.algebra.trace_gram
        assert psi.forms[0] == [[-x for x in row] for row in trace_gram]
        assert psi.killing_constants == [parse_scalar("-1/4")]

    def test_scaling_the_cocycle(self, classical_basis, classical_gamma):
        psi = psi_forms(classical_gamma.scale(scalar(3)), classical_basis)
        assert psi.killing_constants == [parse_scalar("-3/4")]

    def test_abelian_form(self):
        config = make_config("gl", 1)
        basis = homogeneous_basis((-1, 1), config)
        table = residue_tables(basis, "gamma2").table(Cycle.around_in(config, 1))
        psi = psi_forms(table, basis)
        assert psi.forms[0][0][0] == scalar(-1)

    def test_gl_trace_form_fit(self):
        config = make_config("gl", 2)
        basis = homogeneous_basis((-1, 1), config)
        table = residue_tables(basis, "gamma1", build_connection_form(config)).table(Cycle.around_in(config, 1))
        assert psi_forms(table, basis).gl_coefficients == [(scalar(-1), ZERO)]

    def test_window_must_reach_both_sides(self, classical_sl2):
        basis = homogeneous_basis((0, 2), classical_sl2)
        table = residue_tables(basis, "gamma1", build_connection_form(classical_sl2)).table(
            Cycle.around_in(classical_sl2, 1))
        with pytest.raises(WindowError):
            psi_forms(table, basis)


def test_level_relations(classical_sl2, classical_basis, classical_consts, classical_gamma):
    omega = build_connection_form(classical_sl2)
    checks = level_recursion_check(classical_gamma, classical_basis, classical_consts, omega, invariance_budget=30)
    assert [c.name for c in checks if not c.passed] == []


class TestNormalization:
    def test_classical_cocycle_is_already_normal(self, classical_basis, classical_consts, classical_gamma):
        nmap, normalized, checks = normalize_cocycle(classical_gamma, classical_basis, classical_consts, 1)
        assert nmap.to_json()["phi"] == []
        assert normalized.equals(classical_gamma)
        assert all(c.passed for c in checks)

    def test_coboundaries_below_the_cutoff_are_absorbed(self, classical_basis, classical_consts, classical_gamma):
        phi0 = {(0, 1, H): ONE, (-1, 1, E): scalar(2), (-2, 1, F): scalar(-1), (0, 1, F): scalar(5)}
        moved = classical_gamma + coboundary_table(phi0, classical_basis, classical_consts)
        _, reference, _ = normalize_cocycle(classical_gamma, classical_basis, classical_consts, 1)
        _, normalized, checks = normalize_cocycle(moved, classical_basis, classical_consts, 1)
        assert normalized.equals(reference)
        assert all(c.passed for c in checks)

    def test_values_above_the_cutoff(self, classical_basis, classical_consts, classical_gamma):
        with pytest.raises(CocycleError):
            normalize_cocycle(classical_gamma, classical_basis, classical_consts, 0)

    def test_cutoff_above_the_window(self, classical_basis, classical_consts, classical_gamma):
        with pytest.raises(WindowError):
            normalize_cocycle(classical_gamma, classical_basis, classical_consts, 9)


class TestLocalSpace:
    def test_classical(self, classical_sl2):
        verdict = local_space_dimension(classical_sl2, window=(-1, 1))
        assert (verdict.bounded_rank, verdict.local_rank) == (1, 1)
        assert verdict.separating_in_span
        assert all(c.passed for c in verdict.checks())

    def test_two_in_points(self, sl2_two_in, sl2_two_in_basis):
        verdict = local_space_dimension(sl2_two_in, basis=sl2_two_in_basis)
        assert (verdict.bounded_rank, verdict.local_rank) == (2, 1)
        assert verdict.separating_in_span
        assert len(verdict.witnesses) == 1

    def test_gl_with_two_in_points(self):
        config = make_config("gl", 2, in_points=("0", "1"))
        verdict = local_space_dimension(config, window=(-1, 1))
        assert (verdict.bounded_rank, verdict.local_rank) == (4, 2)
        assert (verdict.expected_bounded, verdict.expected_local) == (4, 2)

    def test_window_without_both_sides(self, classical_sl2):
        verdict = local_space_dimension(classical_sl2, window=(0, 3))
        assert verdict.verdict == "inconclusive within window"
        assert verdict.needed_window == (-1, 3)
        assert verdict.checks()[0].passed
