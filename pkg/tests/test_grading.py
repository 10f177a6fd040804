import pytest
from conftest import CONFIG_DIR, bundled, make_config

from laxkit.core.config import settings
from laxkit.core.errors import FamilyError, NonGenericError, WindowError
from laxkit.models import build_marked_config, parse_run_config
from laxkit.services.exactmath import ONE, RationalFunction, scalar
from laxkit.services.geometry import GradingPrescription
from laxkit.services.grading import (almost_grading_check, commutator_approximation, degree_decompose,
                                     dimension_check, filtration_check, homogeneous_basis, structure_constants)
from laxkit.services.laxalgebra import LaxElement, default_bump_limit, tyurin_conditions
from laxkit.services.classical import finite_algebra

H, E, F = 0, 1, 2


class TestBasis:
    @pytest.mark.parametrize("fixture", ["classical_basis", "sl2_two_in_basis", "gl2_tyurin_basis"])
    def test_dimension_law(self, request, fixture):
        basis = request.getfixturevalue(fixture)
        assert dimension_check(basis).passed
        assert all(d == basis.expected_dimension for d in basis.dimensions.values())

    def test_classical_elements_are_monomials(self, classical_basis):
        for m in (-2, 0, 3):
            coords = classical_basis.coordinates[(m, 1, E)]
            assert coords == (RationalFunction.constant(0), RationalFunction.monomial(m), RationalFunction.constant(0))
        assert not classical_basis.adjustments

    def test_margin_above_the_window(self, classical_basis):
        assert classical_basis.top == 4 + 2
        assert (6, 1, H) in classical_basis
        assert (5, 1, H) not in classical_basis.indices()

    def test_element_outside_the_basis(self, classical_basis):
        with pytest.raises(WindowError):
            classical_basis.element((-9, 1, H))

    def test_filtration(self, classical_basis):
        assert filtration_check(classical_basis, []).passed

    @pytest.mark.parametrize("name", sorted(p.stem for p in CONFIG_DIR.glob("*.json")))
    def test_bundled_configurations(self, name):
        config, prescription = build_marked_config(parse_run_config(bundled(name)))
        basis = homogeneous_basis((0, 0), config, prescription, margin=0)
        assert dimension_check(basis).passed
        assert len(basis.indices()) == basis.expected_dimension
        assert all(adj["delta"] >= 0 for adj in basis.adjustments)


class TestNonGeneric:
    def test_symplectic_weak_singularity_with_one_in_point(self):
        # alpha^t sigma L alpha is a function of negative degree, so one Tyurin relation is redundant
        config = make_config("sp", 2, tyurin=(("1", ("1", "0", "0", "0")),))
        with pytest.raises(NonGenericError) as info:
            homogeneous_basis((0, 0), config, margin=0)
        assert (0, 1, 0) in info.value.failing

    def test_default_bump_limit(self, classical_sl2, gl2_tyurin, monkeypatch):
        relations = len(tyurin_conditions(gl2_tyurin))
        assert default_bump_limit(classical_sl2) == 0
        assert default_bump_limit(gl2_tyurin, relations) == relations > 0
        monkeypatch.setattr(settings, "BUMP_LIMIT", 1)
        assert default_bump_limit(gl2_tyurin, relations) == 1

    def test_weak_singularity_bumps_are_recorded(self, gl2_tyurin_basis):
        assert dimension_check(gl2_tyurin_basis).passed
        for adj in gl2_tyurin_basis.adjustments:
            assert adj["reason"] == "normalisation"
            assert adj["delta"] >= 0
            assert adj["point"] == "inf"


class TestStructureConstants:
    def test_classical_table(self, classical_consts):
        assert classical_consts.observed_S == 0
        assert classical_consts.fine_structure_failures == []
        assert classical_consts.terms((1, 1, E), (-1, 1, F)) == (((0, 1, H), ONE),)
        assert classical_consts.terms((2, 1, H), (1, 1, E)) == (((3, 1, E), scalar(2)),)
        assert almost_grading_check(classical_consts, 0).passed

    def test_antisymmetric_lookup(self, classical_consts):
        a, b = (-1, 1, E), (2, 1, F)
        assert classical_consts.terms(a, b) == tuple((h, -c) for h, c in classical_consts.terms(b, a))
        assert classical_consts.terms(a, a) == ()

    def test_levels_outside_the_window_are_skipped(self, classical_consts):
        assert not classical_consts.covers((3, 1, E), (2, 1, F))
        assert classical_consts.excluded > 0

    def test_two_out_points_stay_almost_graded(self):
        config = make_config("sl", 2, in_points=("0", "1"), out_points=("inf", "2"))
        prescription = GradingPrescription.standard(2, 2)
        assert prescription.expected_S() == 1
        basis = homogeneous_basis((-1, 1), config, prescription)
        assert dimension_check(basis).passed
        consts = structure_constants(basis)
        assert consts.observed_S <= 1
        assert consts.fine_structure_failures == []

    def test_two_in_points_fine_structure(self, sl2_two_in_basis):
        consts = structure_constants(sl2_two_in_basis)
        assert consts.fine_structure_failures == []
        # different in-points commute at the leading level
        terms = consts.terms((0, 1, E), (0, 2, F))
        assert all(h[0] > 0 for h, _ in terms)

    def test_worker_count_does_not_change_the_table(self, sl2_two_in):
        serial = homogeneous_basis((-1, 1), sl2_two_in, jobs=1)
        threaded = homogeneous_basis((-1, 1), sl2_two_in, jobs=3)
        assert serial.coordinates == threaded.coordinates
        assert structure_constants(serial, jobs=1).to_json() == structure_constants(threaded, jobs=3).to_json()


class TestDecomposition:
    def test_basis_element(self, classical_basis):
        decomposition = degree_decompose(classical_basis.element((2, 1, H)), classical_basis)
        assert decomposition.coefficients == {(2, 1, H): ONE}

    def test_mixed_degrees(self, classical_basis):
        L = classical_basis.element((2, 1, H)) + classical_basis.element((-1, 1, E)).scale(scalar(3))
        decomposition = degree_decompose(L, classical_basis)
        assert decomposition.coefficients == {(-1, 1, E): scalar(3), (2, 1, H): ONE}
        assert (decomposition.lowest(), decomposition.highest()) == (-1, 2)
        assert decomposition.component(2) == classical_basis.element((2, 1, H))

    def test_below_the_window(self, classical_sl2, classical_basis):
        alg = finite_algebra(classical_sl2.algebra)
        L = LaxElement.constant(classical_sl2, alg.basis[H], RationalFunction.monomial(-6))
        with pytest.raises(WindowError):
            degree_decompose(L, classical_basis)


class TestCommutatorApproximation:
    def test_single_pair(self, classical_basis):
        pairs = commutator_approximation(classical_basis.element((1, 1, H)), 2, classical_basis)
        assert len(pairs) == 1
        (y1, y2), = pairs
        assert y1 == classical_basis.element((0, 1, E))
        assert y2 == classical_basis.element((1, 1, F))

    def test_already_deep_enough(self, classical_basis):
        assert commutator_approximation(classical_basis.element((3, 1, E)), 2, classical_basis) == []

    def test_needs_a_simple_algebra(self, gl2_tyurin_basis):
        with pytest.raises(FamilyError):
            commutator_approximation(gl2_tyurin_basis.element((0, 1, 0)), 1, gl2_tyurin_basis)
