"""Almost-graded structure: homogeneous bases, degree decomposition and structure constants.

Elements are handled through their coordinate functions in the g-basis. Degree
decomposition peels leading jets at the in-points; it stops with an exact certificate:
a remainder vanishing to order h at all N in-points, with poles bounded by B_j at the
out-points and by eps at the active weak singularities, is zero once N*h exceeds
sum_j B_j + eps_eff.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..core.config import settings
from ..core.errors import FamilyError, WindowError
from ..core.parallel import parallel_map
from ..models import Check
from . import linalg
from .classical import FiniteAlgebra, finite_algebra
from .exactmath import ONE, ZERO, ZERO_RF, INFINITE_ORDER, RationalFunction, Scalar, coefficient, format_scalar, ord_at
from .geometry import ConstraintSystem, GradingPrescription, MarkedConfig, grading_divisor, normalized_sections
from .laxalgebra import LaxElement, default_bump_limit, tyurin_conditions

logger = logging.getLogger(__name__)

Index = Tuple[int, int, int]
Coordinates = Tuple[RationalFunction, ...]


def format_index(idx: Index) -> List[int]:
    return [idx[0], idx[1], idx[2]]


@dataclass
class GradedBasis:
    """X^u_{m,s} for m in [window[0], top]; the window proper is what tables and checks range over."""

    config: MarkedConfig
    prescription: GradingPrescription
    window: Tuple[int, int]
    top: int
    algebra: FiniteAlgebra
    coordinates: Dict[Index, Coordinates]
    dimensions: Dict[int, int]
    adjustments: List[Dict[str, object]] = field(default_factory=list)
    pole_orders: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    @property
    def expected_dimension(self) -> int:
        return self.config.N * self.algebra.dim

    def element(self, idx: Index) -> LaxElement:
        try:
            coords = self.coordinates[idx]
        except KeyError:
            raise WindowError(f"basis element {list(idx)} lies outside degrees {self.window[0]}..{self.top}",
                              needed=idx[0]) from None
        return LaxElement.from_coordinates(self.config, coords, self.algebra)

    def indices(self, lo: Optional[int] = None, hi: Optional[int] = None) -> List[Index]:
        lo = self.window[0] if lo is None else lo
        hi = self.window[1] if hi is None else hi
        return [(m, s, u) for m in range(lo, hi + 1) for s in range(1, self.config.N + 1)
                for u in range(self.algebra.dim) if (m, s, u) in self.coordinates]

    def __contains__(self, idx: Index) -> bool:
        return idx in self.coordinates

    def label(self, idx: Index) -> str:
        return f"{self.algebra.labels[idx[2]]}_({idx[0]},{idx[1]})"

    def to_json(self) -> Dict[str, object]:
        return {
            "window": list(self.window),
            "top": self.top,
            "algebra": self.algebra.describe(),
            "dimensions": {str(m): d for m, d in sorted(self.dimensions.items())},
            "expected_dimension": self.expected_dimension,
            "elements": [
                {"index": format_index(idx), "label": self.label(idx),
                 "matrix": self.element(idx).to_json()}
                for idx in self.indices()
            ],
            "adjustments": self.adjustments,
        }


# ---------------------------------------------------------------------------
# construction


def _degree_outcome(m: int, config: MarkedConfig, prescription: GradingPrescription, limit: int, downward: bool):
    alg = finite_algebra(config.algebra)
    system = ConstraintSystem(grading_divisor(m, config, prescription), tyurin_conditions(config, alg))
    return normalized_sections(system, alg.dim, config.in_points, m, config.last_out, limit, tag=(m,),
                               downward=downward)


def _pole_orders(coords: Iterable[Coordinates], config: MarkedConfig) -> Tuple[int, ...]:
    out = []
    for q in config.out_points:
        worst = 0
        for cs in coords:
            for f in cs:
                o = ord_at(f, q)
                if o != INFINITE_ORDER:
                    worst = max(worst, -int(o))
        out.append(worst)
    return tuple(out)


def homogeneous_basis(window: Tuple[int, int], config: MarkedConfig,
                      prescription: Optional[GradingPrescription] = None, margin: Optional[int] = None,
                      jobs: Optional[int] = None) -> GradedBasis:
    """Builds g_m = L'(D_m) with leading jets normalised to X^u z_s^m for every m in the window.

    The basis is extended above the window by ``margin`` degrees (default S+2) so that
    brackets of window elements can be decomposed.
    """
    prescription = prescription or GradingPrescription.default_for(config)
    lo, hi = window
    if margin is None:
        margin = prescription.expected_S() + 2
    top = hi + margin
    prescription.validate(config.N, config.M, range(lo, top + 1))
    alg = finite_algebra(config.algebra)
    limit = default_bump_limit(config, len(tyurin_conditions(config, alg)))
    degrees = list(range(lo, top + 1))
    logger.info("building %s basis for degrees %d..%d", alg.spec.name, lo, top)
    outcomes = parallel_map(lambda m: _degree_outcome(m, config, prescription, limit, settings.BUMP_DOWNWARD),
                            degrees, jobs)
    coordinates: Dict[Index, Coordinates] = {}
    dimensions: Dict[int, int] = {}
    adjustments: List[Dict[str, object]] = []
    poles: Dict[int, Tuple[int, ...]] = {}
    for m, outcome in zip(degrees, outcomes):
        dimensions[m] = outcome.space_dimension
        for (p, u), sec in outcome.sections.items():
            coordinates[(m, p + 1, u)] = sec.components
        adjustments.extend(outcome.adjustments)
        poles[m] = _pole_orders((sec.components for sec in outcome.sections.values()), config)
    return GradedBasis(config, prescription, (lo, hi), top, alg, coordinates, dimensions, adjustments, poles)


def dimension_check(basis: GradedBasis) -> Check:
    bad = {str(m): d for m, d in sorted(basis.dimensions.items()) if d != basis.expected_dimension}
    return Check(name="dimension law dim g_m = N dim g", passed=not bad, checked=len(basis.dimensions),
                 details={"expected": basis.expected_dimension},
                 counterexample={"dimensions": bad} if bad else None)


# ---------------------------------------------------------------------------
# degree decomposition


@dataclass
class DegreeDecomposition:
    coefficients: Dict[Index, Scalar]
    certified_through: int
    basis: GradedBasis = field(repr=False)

    @property
    def degrees(self) -> List[int]:
        return sorted({idx[0] for idx in self.coefficients})

    def component(self, m: int) -> LaxElement:
        acc = LaxElement.zero(self.basis.config)
        for idx, c in sorted(self.coefficients.items()):
            if idx[0] == m:
                acc = acc + self.basis.element(idx).scale(c)
        return acc

    def components(self) -> Dict[int, LaxElement]:
        return {m: self.component(m) for m in self.degrees}

    def lowest(self) -> Optional[int]:
        return min(self.degrees) if self.coefficients else None

    def highest(self) -> Optional[int]:
        return max(self.degrees) if self.coefficients else None

    def to_json(self) -> List[Dict[str, object]]:
        return [{"index": format_index(idx), "c": format_scalar(c)} for idx, c in sorted(self.coefficients.items())]


def _min_order(coords: Coordinates, basis: GradedBasis):
    return min(ord_at(f, p) for f in coords for p in basis.config.in_points)


def decompose_coordinates(coords: Coordinates, basis: GradedBasis) -> Dict[Index, Scalar]:
    config = basis.config
    N = config.N
    h = _min_order(coords, basis)
    if h == INFINITE_ORDER:
        return {}
    h = int(h)
    if h < basis.window[0]:
        raise WindowError(f"element starts at degree {h}, below the basis window {basis.window[0]}", needed=h)
    bounds = list(_pole_orders([coords], config))
    eps_eff = config.effective_eps
    result: Dict[Index, Scalar] = {}
    dim = basis.algebra.dim
    while N * h <= sum(bounds) + eps_eff:
        if h > basis.top:
            needed = (sum(bounds) + eps_eff) // N
            raise WindowError(f"decomposition needs degree {needed}, basis stops at {basis.top}", needed=needed)
        for s, p in enumerate(config.in_points, start=1):
            for u in range(dim):
                c = coefficient(coords[u], p, h)
                for idx, a in result.items():
                    # jets of earlier basis elements at this point and order
                    x = coefficient(basis.coordinates[idx][u], p, h)
                    if x:
                        c = c - a * x
                if c:
                    result[(h, s, u)] = c
        if any(idx[0] == h for idx in result):
            bounds = [max(b, q) for b, q in zip(bounds, basis.pole_orders[h])]
        h += 1
    return result


def degree_decompose(L: Union[LaxElement, Coordinates], basis: GradedBasis) -> DegreeDecomposition:
    """Exact coordinates of L in the graded basis; raises WindowError when the basis is too short."""
    coords = tuple(L.coordinates()) if isinstance(L, LaxElement) else tuple(L)
    coefficients = decompose_coordinates(coords, basis)
    top = max((idx[0] for idx in coefficients), default=basis.window[0])
    return DegreeDecomposition(coefficients, top, basis)


def combine_coordinates(basis: GradedBasis, coefficients: Dict[Index, Scalar]) -> Coordinates:
    acc = [ZERO_RF] * basis.algebra.dim
    for idx, c in coefficients.items():
        for u, f in enumerate(basis.coordinates[idx]):
            if f:
                acc[u] = acc[u] + f * c
    return tuple(acc)


def bracket_coordinates(a: Coordinates, b: Coordinates, alg: FiniteAlgebra) -> Coordinates:
    out = [ZERO_RF] * alg.dim
    for (u, v), terms in alg.structure.items():
        if a[u] and b[v]:
            prod = a[u] * b[v]
            for w, c in terms:
                out[w] = out[w] + prod * c
    return tuple(out)


# ---------------------------------------------------------------------------
# structure constants


Terms = Tuple[Tuple[Index, Scalar], ...]


@dataclass
class StructureConstants:
    window: Tuple[int, int]
    order: Dict[Index, int]
    tensor: Dict[Tuple[Index, Index], Terms]
    observed_S: int
    excluded: int
    fine_structure_failures: List[Dict[str, object]] = field(default_factory=list)

    def terms(self, a: Index, b: Index) -> Optional[Terms]:
        """Decomposition of [a, b]; None when the pair was not computed."""
        if a == b:
            return ()
        if self.order[a] < self.order[b]:
            return self.tensor.get((a, b))
        t = self.tensor.get((b, a))
        return None if t is None else tuple((h, -c) for h, c in t)

    def covers(self, a: Index, b: Index) -> bool:
        return a == b or self.terms(a, b) is not None

    def to_json(self) -> Dict[str, object]:
        records = []
        for (a, b), terms in sorted(self.tensor.items()):
            if not terms:
                continue
            records.append({"left": format_index(a), "right": format_index(b),
                            "terms": [{"h": h[0], "t": h[1], "w": h[2], "c": format_scalar(c)} for h, c in terms]})
        return {"window": list(self.window), "observed_S": self.observed_S, "excluded": self.excluded,
                "fine_structure_failures": self.fine_structure_failures, "records": records}


def _fine_structure(a: Index, b: Index, terms: Terms, alg: FiniteAlgebra) -> Optional[Dict[str, object]]:
    (k, s, u), (m, p, v) = a, b
    level = k + m
    expected: Dict[Index, Scalar] = {}
    if s == p:
        for w, c in alg.structure.get((u, v), ()):
            expected[(level, s, w)] = c
    got = {h: c for h, c in terms if h[0] == level}
    below = [h for h, _ in terms if h[0] < level]
    if got != expected or below:
        return {"left": format_index(a), "right": format_index(b),
                "expected": {str(list(h)): format_scalar(c) for h, c in expected.items()},
                "got": {str(list(h)): format_scalar(c) for h, c in got.items()}}
    return None


def structure_constants(basis: GradedBasis, jobs: Optional[int] = None) -> StructureConstants:
    """Decomposes [X_a, X_b] for window pairs whose level stays inside the window."""
    lo, hi = basis.window
    indices = basis.indices()
    order = {idx: k for k, idx in enumerate(indices)}
    pairs = []
    excluded = 0
    for i, a in enumerate(indices):
        for b in indices[i + 1:]:
            if lo <= a[0] + b[0] <= hi:
                pairs.append((a, b))
            else:
                excluded += 1
    alg = basis.algebra

    def work(pair):
        a, b = pair
        coords = bracket_coordinates(basis.coordinates[a], basis.coordinates[b], alg)
        try:
            decomposition = decompose_coordinates(coords, basis)
        except WindowError as exc:
            logger.debug("pair %s %s leaves the basis window: %s", a, b, exc.detail)
            return None
        return tuple(sorted(decomposition.items()))

    results = parallel_map(work, pairs, jobs)
    tensor: Dict[Tuple[Index, Index], Terms] = {}
    observed = 0
    failures: List[Dict[str, object]] = []
    for (a, b), terms in zip(pairs, results):
        if terms is None:
            excluded += 1
            continue
        tensor[(a, b)] = terms
        if terms:
            observed = max(observed, max(h[0] for h, _ in terms) - (a[0] + b[0]))
        failure = _fine_structure(a, b, terms, alg)
        if failure is not None:
            failures.append(failure)
    logger.info("structure constants: %d pairs, observed S = %d, %d excluded", len(pairs), observed, excluded)
    return StructureConstants((lo, hi), order, tensor, observed, excluded, failures)


def almost_grading_check(consts: StructureConstants, expected_S: Optional[int] = None) -> Check:
    passed = not consts.fine_structure_failures and (expected_S is None or consts.observed_S <= expected_S)
    return Check(name="almost-grading and fine structure", passed=passed, checked=len(consts.tensor),
                 skipped=consts.excluded,
                 details={"observed_S": consts.observed_S, "expected_S": expected_S},
                 counterexample=consts.fine_structure_failures[0] if consts.fine_structure_failures else None)


# ---------------------------------------------------------------------------
# filtration


def filtration_check(basis: GradedBasis, members: Sequence[Tuple[int, LaxElement]]) -> Check:
    """Double inclusion of g_(m) and {L : ord_{P_s} L >= m} on basis elements and given members.

    ``members`` pairs each sample with the order m it is known to reach at every in-point.
    """
    checked = 0
    for idx in basis.indices():
        checked += 1
        order = _min_order(basis.coordinates[idx], basis)
        if order < idx[0]:
            return Check(name="filtration", passed=False, checked=checked,
                         counterexample={"index": format_index(idx), "order": int(order)})
    skipped = 0
    for m, L in members:
        try:
            decomposition = degree_decompose(L, basis)
        except WindowError:
            skipped += 1
            continue
        checked += 1
        low = decomposition.lowest()
        if low is not None and low < m:
            return Check(name="filtration", passed=False, checked=checked, skipped=skipped,
                         counterexample={"m": m, "lowest_degree": low, "member": L.to_json()})
        rebuilt = combine_coordinates(basis, decomposition.coefficients)
        if tuple(rebuilt) != tuple(L.coordinates()):
            return Check(name="filtration", passed=False, checked=checked, skipped=skipped,
                         counterexample={"m": m, "reason": "decomposition does not reproduce the member"})
    return Check(name="filtration", passed=True, checked=checked, skipped=skipped)


# ---------------------------------------------------------------------------
# commutator approximation


@lru_cache(maxsize=None)
def commutator_representation(alg: FiniteAlgebra) -> Tuple[Tuple[Tuple[int, int, Scalar], ...], ...]:
    """For each basis element X^u a list of (a, b, lam) with X^u = sum lam [X^a, X^b]."""
    if not alg.spec.is_semisimple:
        raise FamilyError(f"{alg.spec.name} is not perfect; commutator approximation needs a simple g")
    pairs = [(a, b) for a in range(alg.dim) for b in range(a + 1, alg.dim) if (a, b) in alg.structure]
    rows: List[Dict[int, Scalar]] = [dict() for _ in range(alg.dim)]
    for col, (a, b) in enumerate(pairs):
        for w, c in alg.structure[(a, b)]:
            rows[w][col] = c
    out = []
    for u in range(alg.dim):
        rhs = [ONE if w == u else ZERO for w in range(alg.dim)]
        sol = linalg.solve(rows, rhs, len(pairs))
        if sol is None:
            raise FamilyError(f"{alg.labels[u]} is not a sum of commutators")
        out.append(tuple((pairs[c][0], pairs[c][1], lam) for c, lam in sorted(sol.items())))
    return tuple(out)


def commutator_approximation(y: LaxElement, m: int, basis: GradedBasis) -> List[Tuple[LaxElement, LaxElement]]:
    """Pairs (y1_i, y2_i) with y - sum [y1_i, y2_i] in g_(m), peeling leading terms degree by degree."""
    if not basis.config.algebra.is_semisimple:
        raise FamilyError("commutator approximation needs a simple g")
    if m > basis.top:
        raise WindowError(f"target degree {m} lies above the basis (top {basis.top})", needed=m)
    if 0 not in {idx[0] for idx in basis.coordinates}:
        raise WindowError("the basis must contain degree 0", needed=0)
    rep = commutator_representation(basis.algebra)
    alg = basis.algebra
    residual = tuple(y.coordinates())
    pairs: List[Tuple[LaxElement, LaxElement]] = []
    while True:
        decomposition = decompose_coordinates(residual, basis)
        if not decomposition:
            return pairs
        h = min(idx[0] for idx in decomposition)
        if h >= m:
            return pairs
        subtract = [ZERO_RF] * alg.dim
        for (deg, s, u), c in sorted(decomposition.items()):
            if deg != h:
                continue
            for a, b, lam in rep[u]:
                left = tuple(f * (c * lam) for f in basis.coordinates[(0, s, a)])
                right = basis.coordinates[(h, s, b)]
                pairs.append((LaxElement.from_coordinates(basis.config, left, alg),
                              LaxElement.from_coordinates(basis.config, right, alg)))
                br = bracket_coordinates(left, right, alg)
                subtract = [x + z for x, z in zip(subtract, br)]
        residual = tuple(x - z for x, z in zip(residual, subtract))
        logger.debug("commutator approximation peeled degree %d", h)


def lowest_degree(L: LaxElement, basis: GradedBasis) -> Optional[int]:
    return degree_decompose(L, basis).lowest()


__all__ = [
    "Index", "GradedBasis", "DegreeDecomposition", "StructureConstants", "homogeneous_basis", "degree_decompose",
    "decompose_coordinates", "structure_constants", "commutator_approximation", "dimension_check",
    "filtration_check", "almost_grading_check", "bracket_coordinates", "combine_coordinates",
]
