import random

import pytest

from laxkit.core.errors import ConnectionFormError
from laxkit.services.classical import finite_algebra
from laxkit.services.connection import (D1Element, DgElement, build_connection_form, connection_check,
                                        covariant_derivative, d1_bracket, dg_bracket, perturb_connection,
                                        verify_module_axioms)
from laxkit.services.exactmath import ONE, ZERO_RF, RationalFunction, residue_at
from laxkit.services.laxalgebra import LaxElement, VectorField, is_member
from laxkit.services.sampling import member_divisor, random_member

Z = RationalFunction.monomial(1)


@pytest.fixture(scope="module")
def gl2_omega(gl2_tyurin):
    return build_connection_form(gl2_tyurin)


class TestConnectionForm:
    def test_vanishes_without_weak_singularities(self, classical_sl2):
        omega = build_connection_form(classical_sl2)
        assert omega.is_zero
        assert connection_check(omega).passed

    def test_minimal_pole_budget(self, gl2_tyurin, gl2_omega):
        assert gl2_omega.violations() == []
        assert connection_check(gl2_omega).passed
        # the residue at gamma forces a pole at the out-point
        assert gl2_omega.o_pole_budget == 1
        with pytest.raises(ConnectionFormError):
            build_connection_form(gl2_tyurin, budget=0)

    def test_sl_forms_are_gl_valued(self, sl2_tyurin):
        omega = build_connection_form(sl2_tyurin)
        gamma = sl2_tyurin.tyurin[0].gamma
        assert residue_at(omega.matrix.trace(), gamma) == ONE

    def test_perturbation_by_a_member(self, gl2_tyurin, gl2_omega):
        L = random_member(gl2_tyurin, random.Random(3), divisor=member_divisor(gl2_tyurin, order_at_in=0))
        perturbed = perturb_connection(gl2_omega, L)
        assert perturbed.violations() == []

    def test_perturbation_with_pole_at_in_point(self, gl2_tyurin, gl2_omega):
        L = LaxElement([[1 / Z, 0], [0, 0]], gl2_tyurin)
        with pytest.raises(ConnectionFormError):
            perturb_connection(gl2_omega, L)


class TestCovariantDerivative:
    @pytest.mark.parametrize("k, m", [(-1, 2), (0, 3), (2, -1)])
    def test_classical_action_on_currents(self, classical_sl2, k, m):
        omega = build_connection_form(classical_sl2)
        x = finite_algebra(classical_sl2.algebra).basis[1]
        current = LaxElement.constant(classical_sl2, x, RationalFunction.monomial(m))
        derived = covariant_derivative(omega, VectorField.monomial(k + 1), current)
        assert derived == LaxElement.constant(classical_sl2, x, RationalFunction.monomial(k + m)).scale(m)

    def test_preserves_membership(self, gl2_tyurin, gl2_omega):
        rng = random.Random(11)
        L = random_member(gl2_tyurin, rng)
        assert is_member(covariant_derivative(gl2_omega, VectorField(Z ** 2 + 1), L))

    def test_d1_bracket(self):
        x = D1Element(Z, VectorField.monomial(1))
        y = D1Element(Z ** 2, VectorField.monomial(2))
        result = d1_bracket(x, y)
        assert result.function == Z ** 2
        assert result.field == VectorField.monomial(2)

    def test_dg_bracket_of_a_field_and_a_current(self, gl2_tyurin, gl2_omega):
        L = random_member(gl2_tyurin, random.Random(4))
        e = VectorField.monomial(2)
        result = dg_bracket(DgElement(LaxElement.zero(gl2_tyurin), e), DgElement(L, VectorField(ZERO_RF)), gl2_omega)
        assert result.current == covariant_derivative(gl2_omega, e, L)
        assert result.field.is_zero

    def test_dg_jacobi(self, gl2_tyurin, gl2_omega):
        rng = random.Random(12)
        x, y, w = (DgElement(random_member(gl2_tyurin, rng), VectorField.monomial(k)) for k in (0, 1, 2))

        def br(a, b):
            return dg_bracket(a, b, gl2_omega)

        total = br(br(x, y), w) + br(br(y, w), x) + br(br(w, x), y)
        assert total.current.is_zero
        assert total.field.is_zero


@pytest.mark.parametrize("config_fixture, basis_fixture", [
    ("classical_sl2", "classical_basis"),
    ("gl2_tyurin", "gl2_tyurin_basis"),
])
def test_module_axioms(request, config_fixture, basis_fixture):
    config = request.getfixturevalue(config_fixture)
    basis = request.getfixturevalue(basis_fixture)
    omega = build_connection_form(config)
    checks = verify_module_axioms(basis, omega, sample_budget=2, seed=0)
    failed = [c.name for c in checks if not c.passed]
    assert failed == []
    assert checks[0].checked == 2
