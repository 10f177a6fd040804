"""Lax operator algebras: elements, membership, products, brackets and the KN bases."""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.matrices import DomainMatrix

from ..core.config import settings
from ..core.errors import FamilyError, MembershipError
from . import linalg
from .classical import AlgebraSpec, FiniteAlgebra, finite_algebra
from .exactmath import (INFINITY, ONE, ONE_RF, ZERO, ZERO_RF, Point, RationalFunction, Scalar, coefficient,
                        finite_poles_outside, format_point, format_rf, format_scalar, local_order, ord_at, parse_rf,
                        scalar)
from .geometry import (ConstraintSystem, Divisor, GradingPrescription, JetCondition, MarkedConfig, TyurinPoint,
                       normalized_sections, out_divisor, vector_field_out_divisor)
from .linalg import Vector

logger = logging.getLogger(__name__)

__all__ = [
    "AlgebraSpec", "TyurinPoint", "MarkedConfig", "LaxElement", "VectorField", "MembershipVerdict",
    "is_member", "lax_product", "lax_bracket", "gl_split", "kn_function_basis", "kn_vector_basis",
    "vf_action", "vf_bracket", "tyurin_conditions", "product_identities", "default_bump_limit",
]


def default_bump_limit(config: MarkedConfig, relations: int = 0) -> int:
    """Bumps allowed at Q_M: 2g - 1 + H + 1 with g = 0 and H the number of relations at the weak singularities."""
    if settings.BUMP_LIMIT is not None:
        return settings.BUMP_LIMIT
    genus = 0
    return 2 * genus - 1 + relations + 1


# ---------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class VectorField:
    """f(z) d/dz; at infinity it reads -w^2 f(1/w) d/dw."""

    coefficient: RationalFunction

    @classmethod
    def monomial(cls, k: int, c=1) -> "VectorField":
        return cls(RationalFunction.monomial(k, c))

    def act(self, f: RationalFunction) -> RationalFunction:
        return self.coefficient * f.derivative()

    def bracket(self, other: "VectorField") -> "VectorField":
        e, f = self.coefficient, other.coefficient
        return VectorField(e * f.derivative() - f * e.derivative())

    def scaled(self, g: RationalFunction) -> "VectorField":
        return VectorField(self.coefficient * g)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.coefficient + other.coefficient)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.coefficient - other.coefficient)

    def __neg__(self) -> "VectorField":
        return VectorField(-self.coefficient)

    def order_at(self, p: Point):
        return local_order(self.coefficient, p, weight=-1)

    @property
    def is_zero(self) -> bool:
        return self.coefficient.is_zero

    def to_json(self) -> str:
        return f"{format_rf(self.coefficient)} d/dz"


def vf_action(e: VectorField, f: RationalFunction) -> RationalFunction:
    return e.act(f)


def vf_bracket(e: VectorField, f: VectorField) -> VectorField:
    return e.bracket(f)


# ---------------------------------------------------------------------------
# Lax elements


Matrix = Tuple[Tuple[RationalFunction, ...], ...]


class LaxElement:
    """An n x n matrix of rational functions tied to a marked configuration."""

    __slots__ = ("entries", "config", "_hash")

    def __init__(self, entries: Sequence[Sequence[RationalFunction]], config: MarkedConfig):
        rows = tuple(tuple(x if isinstance(x, RationalFunction) else RationalFunction.constant(x) for x in row)
                     for row in entries)
        self.entries: Matrix = rows
        self.config = config
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, config: MarkedConfig) -> "LaxElement":
        n = config.algebra.size
        return cls([[ZERO_RF] * n for _ in range(n)], config)

    @classmethod
    def constant(cls, config: MarkedConfig, matrix: DomainMatrix, f: RationalFunction = ONE_RF) -> "LaxElement":
        return cls([[f * x for x in row] for row in linalg.entries(matrix)], config)

    @classmethod
    def from_coordinates(cls, config: MarkedConfig, coords: Sequence[RationalFunction],
                         algebra: Optional[FiniteAlgebra] = None) -> "LaxElement":
        """sum_u coords[u] X^u over the g-basis (or the given basis)."""
        alg = algebra or finite_algebra(config.algebra)
        n = alg.size
        acc = [[ZERO_RF] * n for _ in range(n)]
        for f, b in zip(coords, alg.basis):
            if f.is_zero:
                continue
            rows = linalg.entries(b)
            for i in range(n):
                for j in range(n):
                    if rows[i][j]:
                        acc[i][j] = acc[i][j] + f * rows[i][j]
        return cls(acc, config)

    @classmethod
    def from_json(cls, config: MarkedConfig, rows: Sequence[Sequence[str]]) -> "LaxElement":
        return cls([[parse_rf(x) for x in row] for row in rows], config)

    # shape

    @property
    def size(self) -> int:
        return len(self.entries)

    def flat(self) -> List[RationalFunction]:
        return [x for row in self.entries for x in row]

    def coordinates(self) -> List[RationalFunction]:
        return finite_algebra(self.config.algebra).coordinates(self.flat())

    @property
    def is_zero(self) -> bool:
        return all(x.is_zero for x in self.flat())

    def _check(self, other: "LaxElement") -> None:
        if self.config != other.config:
            raise MembershipError("elements belong to different configurations")

    # arithmetic

    def __add__(self, other: "LaxElement") -> "LaxElement":
        self._check(other)
        return LaxElement([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                          self.config)

    def __neg__(self) -> "LaxElement":
        return LaxElement([[-a for a in row] for row in self.entries], self.config)

    def __sub__(self, other: "LaxElement") -> "LaxElement":
        return self + (-other)

    def scale(self, c: Union[Scalar, int, RationalFunction]) -> "LaxElement":
        """c * L for a scalar, or g * L for a function g (the A-module action)."""
        return LaxElement([[a * c for a in row] for row in self.entries], self.config)

    def matmul(self, other: "LaxElement") -> "LaxElement":
        self._check(other)
        n = self.size
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = ZERO_RF
                for k in range(n):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LaxElement(out, self.config)

    def bracket(self, other: "LaxElement") -> "LaxElement":
        return self.matmul(other) - other.matmul(self)

    def matmul_constant(self, matrix: DomainMatrix, left: bool = True) -> "LaxElement":
        return (LaxElement.constant(self.config, matrix).matmul(self) if left
                else self.matmul(LaxElement.constant(self.config, matrix)))

    def derivative(self) -> "LaxElement":
        return LaxElement([[a.derivative() for a in row] for row in self.entries], self.config)

    def trace(self) -> RationalFunction:
        acc = ZERO_RF
        for i in range(self.size):
            acc = acc + self.entries[i][i]
        return acc

    def min_order(self, p: Point):
        return min(ord_at(x, p) for x in self.flat())

    def jet_matrix(self, p: Point, k: int) -> List[List[Scalar]]:
        return [[coefficient(x, p, k) for x in row] for row in self.entries]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaxElement):
            return NotImplemented
        return self.config == other.config and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def to_json(self) -> List[List[str]]:
        return [[format_rf(x) for x in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"LaxElement({self.to_json()!r})"


# ---------------------------------------------------------------------------
# Tyurin conditions as matrix functionals


def _flat(i: int, j: int, n: int) -> int:
    return i * n + j


def pole_directions(spec: AlgebraSpec, alpha: Sequence[Scalar]) -> List[DomainMatrix]:
    """Matrices spanning the allowed residue directions at a weak singularity (one per beta = e_j)."""
    n = spec.size
    a = linalg.matrix([[x] for x in alpha])
    out = []
    for j in range(n):
        e = linalg.matrix([[ONE if k == j else ZERO] for k in range(n)])
        if spec.family == "so":
            out.append(a * e.transpose() - e * a.transpose())
        elif spec.family == "sp":
            out.append((a * e.transpose() + e * a.transpose()) * spec.sigma_matrix())
        else:
            out.append(a * e.transpose())
    return out


def _annihilator(matrices: Sequence[DomainMatrix], n: int) -> List[Vector]:
    flat = [{k: v for k, v in enumerate(linalg.flatten(m)) if v} for m in matrices]
    return linalg.kernel(flat, n * n)


def _orthogonal(alpha: Sequence[Scalar]) -> List[Vector]:
    """Basis of {c : c . alpha = 0}."""
    return linalg.kernel([{k: v for k, v in enumerate(alpha) if v}], len(alpha))


@dataclass(frozen=True)
class MatrixCondition:
    order: int
    functional: Tuple[Tuple[int, Scalar], ...]
    value: Scalar
    label: str


def matrix_conditions(spec: AlgebraSpec, alpha: Sequence[Scalar], connection: bool = False) -> List[MatrixCondition]:
    """Jet functionals at a weak singularity, over row-major matrix entries.

    Members: L_{-1} in the pole directions with L_{-1} alpha = 0, and L_0 alpha parallel to
    alpha; sp adds L_{-2} parallel to alpha alpha^t sigma and alpha^t sigma L_1 alpha = 0.
    Connection forms: omega_{-1} alpha = alpha instead of 0, and no second order pole.
    """
    n = spec.size
    out: List[MatrixCondition] = []

    def add(order: int, functional: Vector, value: Scalar, label: str) -> None:
        out.append(MatrixCondition(order, tuple(sorted(functional.items())), value, label))

    if spec.family == "sp" and not connection:
        a = linalg.matrix([[x] for x in alpha])
        span = [a * a.transpose() * spec.sigma_matrix()]
        for fn in _annihilator(span, n):
            add(-2, fn, ZERO, "L_{-2} is not a multiple of alpha alpha^t sigma")
    for fn in _annihilator(pole_directions(spec, alpha), n):
        add(-1, fn, ZERO, "L_{-1} is not of the allowed rank-one form in alpha")
    for i in range(n):
        fn = {_flat(i, j, n): alpha[j] for j in range(n) if alpha[j]}
        add(-1, fn, alpha[i] if connection else ZERO,
            "omega_{-1} alpha != alpha" if connection else "L_{-1} alpha != 0 (beta^t alpha must vanish)")
    for c in _orthogonal(alpha):
        fn: Vector = {}
        for i, ci in c.items():
            for j in range(n):
                if alpha[j]:
                    fn[_flat(i, j, n)] = fn.get(_flat(i, j, n), ZERO) + ci * alpha[j]
        add(0, fn, ZERO, "L_0 alpha is not an eigenvector multiple of alpha")
    if spec.family == "sp":
        sigma = linalg.entries(spec.sigma_matrix())
        row = [sum((alpha[k] * sigma[k][i] for k in range(n)), ZERO) for i in range(n)]
        fn = {_flat(i, j, n): row[i] * alpha[j] for i in range(n) for j in range(n) if row[i] and alpha[j]}
        add(1, fn, ZERO, "alpha^t sigma L_1 alpha != 0")
    return out


def tyurin_conditions(config: MarkedConfig, algebra: Optional[FiniteAlgebra] = None,
                      connection: bool = False) -> Tuple[JetCondition, ...]:
    """Jet conditions at every weak singularity, in coordinates of ``algebra``'s basis."""
    alg = algebra or finite_algebra(config.algebra)
    flat_basis = [linalg.flatten(b) for b in alg.basis]
    out: List[JetCondition] = []
    for t in config.tyurin:
        if not t.is_active:
            if connection:
                continue
            for order in range(-config.eps, 0):
                for u in range(alg.dim):
                    out.append(JetCondition(t.gamma, order, ((u, ONE),), ZERO, "holomorphic at gamma with alpha = 0"))
            continue
        for cond in matrix_conditions(config.algebra, t.alpha, connection):
            weights = []
            for u, fb in enumerate(flat_basis):
                w = ZERO
                for k, v in cond.functional:
                    if fb[k]:
                        w = w + v * fb[k]
                if w:
                    weights.append((u, w))
            if weights or cond.value:
                out.append(JetCondition(t.gamma, cond.order, tuple(weights), cond.value, cond.label))
    return tuple(out)


# ---------------------------------------------------------------------------
# membership


@dataclass
class MembershipVerdict:
    is_member: bool
    condition: Optional[str] = None
    point: Optional[Point] = None
    witnesses: Dict[str, object] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.is_member

    def to_json(self) -> Dict[str, object]:
        return {"member": self.is_member, "condition": self.condition,
                "point": None if self.point is None else format_point(self.point), "witnesses": self.witnesses}


def _apply(functional: Iterable[Tuple[int, Scalar]], flat: Sequence[Scalar]) -> Scalar:
    acc = ZERO
    for k, v in functional:
        if flat[k]:
            acc = acc + v * flat[k]
    return acc


def _witnesses(spec: AlgebraSpec, alpha: Sequence[Scalar], jets: Dict[int, List[Scalar]]) -> Dict[str, object]:
    n = spec.size
    pivot = next(i for i, a in enumerate(alpha) if a)
    out: Dict[str, object] = {}
    l0a = [sum((jets[0][_flat(i, j, n)] * alpha[j] for j in range(n)), ZERO) for i in range(n)]
    out["kappa"] = format_scalar(l0a[pivot] / alpha[pivot])
    directions = pole_directions(spec, alpha)
    cols = [linalg.flatten(d) for d in directions]
    rows = [{j: cols[j][k] for j in range(n) if cols[j][k]} for k in range(n * n)]
    beta = linalg.solve(rows, jets[-1], n)
    if beta is not None:
        out["beta"] = [format_scalar(beta.get(j, ZERO)) for j in range(n)]
    if spec.family == "sp":
        a = linalg.matrix([[x] for x in alpha])
        ref = linalg.flatten(a * a.transpose() * spec.sigma_matrix())
        k = next(i for i, x in enumerate(ref) if x)
        out["nu"] = format_scalar(jets[-2][k] / ref[k])
    return out


def is_member(L: Union[LaxElement, Sequence[Sequence[RationalFunction]]],
              config: Optional[MarkedConfig] = None) -> MembershipVerdict:
    """Exact decision whether L satisfies every Lax condition of the configuration."""
    if isinstance(L, LaxElement):
        config = config or L.config
        rows = L.entries
    else:
        rows = tuple(tuple(r) for r in L)
    if config is None:
        raise MembershipError("a configuration is required")
    spec = config.algebra
    n = spec.size
    if len(rows) != n or any(len(r) != n for r in rows):
        raise MembershipError(f"matrix must be {n}x{n} for {spec.name}")
    flat = [x for r in rows for x in r]

    alg = finite_algebra(spec)
    for fn in alg.annihilator:
        acc = ZERO_RF
        for k, v in fn.items():
            if not flat[k].is_zero:
                acc = acc + flat[k] * v
        if not acc.is_zero:
            return MembershipVerdict(False, f"family constraint of {spec.name} violated", None,
                                     {"residual": format_rf(acc)})

    for t in config.tyurin:
        if not t.is_active and any(ord_at(x, t.gamma) < 0 for x in flat):
            return MembershipVerdict(False, "pole at a Tyurin point with alpha = 0 (holomorphy required)", t.gamma)
    allowed = list(config.marked_points) + [t.gamma for t in config.active_tyurin]
    for x in flat:
        if finite_poles_outside(x, allowed):
            return MembershipVerdict(False, "pole outside A u W", None, {"entry": format_rf(x)})
    if INFINITY not in allowed and any(ord_at(x, INFINITY) < 0 for x in flat):
        return MembershipVerdict(False, "pole outside A u W", INFINITY)

    witnesses: Dict[str, object] = {}
    for t in config.active_tyurin:
        if any(ord_at(x, t.gamma) < -config.eps for x in flat):
            return MembershipVerdict(False, f"pole order above {config.eps} at a weak singularity", t.gamma)
        jets = {k: [coefficient(x, t.gamma, k) for x in flat] for k in range(-config.eps, 2)}
        for cond in matrix_conditions(spec, t.alpha):
            if _apply(cond.functional, jets[cond.order]) != cond.value:
                return MembershipVerdict(False, cond.label, t.gamma)
        witnesses[format_point(t.gamma)] = _witnesses(spec, t.alpha, jets)
    return MembershipVerdict(True, None, None, witnesses)


# ---------------------------------------------------------------------------
# products and brackets


def lax_product(L: LaxElement, L2: LaxElement) -> LaxElement:
    """Pointwise product; only gl and s are closed under it."""
    if L.config.algebra.family not in ("gl", "s"):
        raise FamilyError(f"{L.config.algebra.name} is not closed under the matrix product")
    return L.matmul(L2)


def lax_bracket(L: LaxElement, L2: LaxElement) -> LaxElement:
    return L.bracket(L2)


def gl_split(L: LaxElement) -> Tuple[LaxElement, LaxElement]:
    """(tr L / n) I and the trace-free remainder, as elements of s(n) and sl(n) configurations."""
    spec = L.config.algebra
    if spec.family != "gl":
        raise FamilyError("gl_split needs a gl configuration")
    n = spec.size
    scalar_fn = L.trace() * (ONE / scalar(n))
    scalar_rows = [[scalar_fn if i == j else ZERO_RF for j in range(n)] for i in range(n)]
    sl_rows = [[L.entries[i][j] - (scalar_fn if i == j else ZERO_RF) for j in range(n)] for i in range(n)]
    s_config = _with_family(L.config, "s")
    sl_config = _with_family(L.config, "sl") if n >= 2 else s_config
    return LaxElement(scalar_rows, s_config), LaxElement(sl_rows, sl_config)


def _with_family(config: MarkedConfig, family: str) -> MarkedConfig:
    return MarkedConfig(config.in_points, config.out_points, config.tyurin,
                        AlgebraSpec(family, config.algebra.n), config.genus)


@dataclass
class ProductIdentities:
    double_pole_vanishes: bool
    kappa_law: bool
    kappa_product: Scalar
    kappa_predicted: Scalar


def product_identities(L1: LaxElement, L2: LaxElement, t: TyurinPoint) -> ProductIdentities:
    """Checks that L1 L2 has no double pole at gamma and kappa = beta1^t L2_1 alpha + kappa1 kappa2."""
    if L1.config.algebra.family not in ("gl", "s"):
        raise FamilyError("product identities are stated for gl")
    n = L1.size
    alpha = t.alpha
    pivot = next(i for i, a in enumerate(alpha) if a)
    product = lax_product(L1, L2)
    double = all(not c for row in product.jet_matrix(t.gamma, -2) for c in row)

    def kappa(el: LaxElement) -> Scalar:
        l0 = el.jet_matrix(t.gamma, 0)
        return sum((l0[pivot][j] * alpha[j] for j in range(n)), ZERO) / alpha[pivot]

    lm1 = L1.jet_matrix(t.gamma, -1)
    beta1 = [lm1[pivot][j] / alpha[pivot] for j in range(n)]
    l2_1 = L2.jet_matrix(t.gamma, 1)
    l2a = [sum((l2_1[i][j] * alpha[j] for j in range(n)), ZERO) for i in range(n)]
    predicted = sum((beta1[i] * l2a[i] for i in range(n)), ZERO) + kappa(L1) * kappa(L2)
    actual = kappa(product)
    return ProductIdentities(double, actual == predicted, actual, predicted)


# ---------------------------------------------------------------------------
# KN function and vector field bases


@lru_cache(maxsize=None)
def _function_basis(m: int, config: MarkedConfig, prescription: GradingPrescription, limit: int,
                    downward: bool = False):
    divisor = Divisor.from_map({p: -m for p in config.in_points}) + out_divisor(m, config, prescription)
    system = ConstraintSystem(divisor)
    return normalized_sections(system, 1, config.in_points, m, config.last_out, limit, tag=(m,),
                               downward=downward)


@lru_cache(maxsize=None)
def _vector_basis(m: int, config: MarkedConfig, prescription: GradingPrescription, limit: int,
                  downward: bool = False):
    divisor = Divisor.from_map({p: -(m + 1) for p in config.in_points})
    divisor = divisor + vector_field_out_divisor(m, config, prescription)
    system = ConstraintSystem(divisor, weight=-1)
    return normalized_sections(system, 1, config.in_points, m + 1, config.last_out, limit, tag=(m,),
                               downward=downward)


def kn_function_basis(m: int, s: int, config: MarkedConfig,
                      prescription: Optional[GradingPrescription] = None) -> RationalFunction:
    """A_{m,s}: order m at P_s with leading coefficient 1, order m+1 at the other in-points."""
    if not 1 <= s <= config.N:
        raise MembershipError(f"in-point index {s} outside 1..{config.N}")
    prescription = prescription or GradingPrescription.default_for(config)
    outcome = _function_basis(m, config, prescription, default_bump_limit(config), settings.BUMP_DOWNWARD)
    return outcome.sections[(s - 1, 0)].components[0]


def kn_vector_basis(m: int, s: int, config: MarkedConfig,
                    prescription: Optional[GradingPrescription] = None) -> VectorField:
    """e_{m,s}: order m+1 at P_s (leading coefficient 1), m+2 at the other in-points."""
    if not 1 <= s <= config.N:
        raise MembershipError(f"in-point index {s} outside 1..{config.N}")
    prescription = prescription or GradingPrescription.default_for(config)
    outcome = _vector_basis(m, config, prescription, default_bump_limit(config), settings.BUMP_DOWNWARD)
    return VectorField(outcome.sections[(s - 1, 0)].components[0])


def kn_adjustments(m: int, config: MarkedConfig, prescription: GradingPrescription) -> List[Dict[str, object]]:
    limit = default_bump_limit(config)
    return (_function_basis(m, config, prescription, limit, settings.BUMP_DOWNWARD).adjustments
            + _vector_basis(m, config, prescription, limit, settings.BUMP_DOWNWARD).adjustments)
