import random

import pytest
from conftest import make_config

from laxkit.core.errors import FamilyError, MembershipError
from laxkit.services.exactmath import RationalFunction, ord_at, parse_scalar, point
from laxkit.services.laxalgebra import (LaxElement, VectorField, gl_split, is_member, kn_function_basis,
                                        kn_vector_basis, lax_bracket, lax_product, product_identities, vf_action,
                                        vf_bracket)
from laxkit.services.sampling import random_member, random_members

Z = RationalFunction.monomial(1)


@pytest.fixture(scope="module")
def gl2_split_alpha():
    return make_config("gl", 2, tyurin=(("2", ("1", "0")),))


class TestMembership:
    def test_rank_one_residue_is_a_member(self, gl2_split_alpha):
        L = LaxElement([[2, 1 / (Z - 2)], [0, 3]], gl2_split_alpha)
        verdict = is_member(L)
        assert verdict.is_member
        assert verdict.witnesses["2"]["kappa"] == "2"
        assert verdict.witnesses["2"]["beta"] == ["0", "1"]

    def test_residue_not_killing_alpha(self, gl2_split_alpha):
        verdict = is_member(LaxElement([[1 / (Z - 2), 0], [0, 0]], gl2_split_alpha))
        assert not verdict
        assert verdict.point == point(2)
        assert "alpha" in verdict.condition

    def test_alpha_not_an_eigenvector(self, gl2_split_alpha):
        verdict = is_member(LaxElement([[0, 0], [1, 0]], gl2_split_alpha))
        assert not verdict
        assert "eigenvector" in verdict.condition

    def test_pole_outside_the_marked_points(self, gl2_split_alpha):
        verdict = is_member(LaxElement([[1 / (Z - 5), 0], [0, 0]], gl2_split_alpha))
        assert not verdict
        assert verdict.condition == "pole outside A u W"

    def test_double_pole_for_gl(self, gl2_split_alpha):
        verdict = is_member(LaxElement([[0, (Z - 2) ** -2], [0, 0]], gl2_split_alpha))
        assert not verdict

    def test_family_constraint(self, sl2_tyurin):
        verdict = is_member(LaxElement([[1, 0], [0, 1]], sl2_tyurin))
        assert not verdict
        assert "family" in verdict.condition

    def test_shape_mismatch(self, gl2_split_alpha):
        with pytest.raises(MembershipError):
            is_member([[Z]], gl2_split_alpha)


class TestProducts:
    def test_gl_split(self, gl2_split_alpha):
        L = LaxElement([[2, 1 / (Z - 2)], [0, 3]], gl2_split_alpha)
        scalar_part, trace_free = gl_split(L)
        assert scalar_part.entries[0][0] == RationalFunction.constant(parse_scalar("5/2"))
        assert ord_at(scalar_part.entries[0][0], point(2)) >= 0
        assert trace_free.trace().is_zero
        assert is_member(trace_free)

    def test_gl_split_needs_gl(self, sl2_tyurin):
        with pytest.raises(FamilyError):
            gl_split(LaxElement.zero(sl2_tyurin))

    def test_product_only_for_gl(self, sl2_tyurin):
        with pytest.raises(FamilyError):
            lax_product(LaxElement.zero(sl2_tyurin), LaxElement.zero(sl2_tyurin))

    def test_random_members_are_members(self, gl2_tyurin):
        for L in random_members(gl2_tyurin, random.Random(0), 4):
            assert is_member(L)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_product_identities(self, gl2_tyurin, seed):
        rng = random.Random(seed)
        L1, L2 = random_member(gl2_tyurin, rng), random_member(gl2_tyurin, rng)
        identities = product_identities(L1, L2, gl2_tyurin.tyurin[0])
        assert identities.double_pole_vanishes
        assert identities.kappa_law
        assert is_member(lax_product(L1, L2))

    @pytest.mark.parametrize("fixture", ["gl2_tyurin", "sl2_tyurin"])
    def test_bracket_closes(self, request, fixture):
        config = request.getfixturevalue(fixture)
        rng = random.Random(7)
        for _ in range(3):
            L1, L2 = random_member(config, rng), random_member(config, rng)
            assert is_member(lax_bracket(L1, L2))


WEAK_SINGULARITIES = {
    "gl": (2, (("2", ("1", "1")), ("-1", ("1", "i")))),
    "sl": (2, (("2", ("1", "1")), ("-1", ("1", "0")))),
    "s": (2, (("2", ("1", "1")), ("-1", ("0", "1")))),
    "so": (4, (("2", ("1", "i", "0", "0")), ("-1", ("0", "0", "1", "i")))),
    "sp": (2, (("2", ("1", "0", "0", "0")), ("-1", ("0", "1", "1", "0")))),
}


@pytest.mark.parametrize("K", [0, 1, 2])
@pytest.mark.parametrize("family", sorted(WEAK_SINGULARITIES))
def test_closure_for_every_family(family, K):
    n, tyurin = WEAK_SINGULARITIES[family]
    config = make_config(family, n, in_points=("0", "1"), tyurin=tyurin[:K])
    rng = random.Random(f"{family}:{K}")
    for _ in range(4):
        L1, L2 = random_member(config, rng), random_member(config, rng)
        assert is_member(L1) and is_member(L2)
        assert is_member(lax_bracket(L1, L2))
        if family in ("gl", "s"):
            assert is_member(lax_product(L1, L2))


class TestKricheverNovikovBases:
    def test_two_in_points(self):
        config = make_config("sl", 2, in_points=("0", "1"))
        assert kn_function_basis(0, 1, config) == 1 - Z
        assert kn_function_basis(0, 2, config) == Z

    @pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
    def test_classical_functions_and_fields(self, classical_sl2, m):
        assert kn_function_basis(m, 1, classical_sl2) == RationalFunction.monomial(m)
        assert kn_vector_basis(m, 1, classical_sl2).coefficient == RationalFunction.monomial(m + 1)

    def test_witt_relations(self):
        e = VectorField.monomial
        assert vf_bracket(e(2), e(-1)) == e(0).scaled(RationalFunction.constant(-3))
        assert e(1).act(Z ** 3) == Z ** 3 * 3
        assert vf_action(e(2), Z ** 3) == Z ** 4 * 3

    def test_in_point_index(self, classical_sl2):
        with pytest.raises(MembershipError):
            kn_function_basis(0, 2, classical_sl2)
