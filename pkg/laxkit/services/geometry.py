"""Divisors on the sphere, the marked configuration and constrained section spaces.

Sections are found from a partial-fraction ansatz for L(D+): the constant 1, then
(z - p)^-k for each finite point p of D+ (points in sorted order, k ascending), then z^k
for infinity. Unknowns are ordered ansatz function first, vector component second, so
kernel bases are reproducible.
"""
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from ..core.errors import ConfigError, NonGenericError, PrescriptionError
from . import linalg
from .classical import AlgebraSpec
from .exactmath import (INFINITY, ONE, ONE_RF, ZERO, Point, PolyRing, RationalFunction, Scalar, Z, format_point,
                        format_scalar, linear_factor, local_coefficient)
from .linalg import Vector

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class Divisor:
    """Finite formal sum of points; zero multiplicities are never stored."""

    items: Tuple[Tuple[Point, int], ...] = ()

    @classmethod
    def from_map(cls, mapping: Mapping[Point, int]) -> "Divisor":
        merged = {p: m for p, m in mapping.items() if m}
        return cls(tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key())))

    @classmethod
    def single(cls, p: Point, m: int = 1) -> "Divisor":
        return cls.from_map({p: m})

    @property
    def support(self) -> Dict[Point, int]:
        return dict(self.items)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.items)

    def multiplicity(self, p: Point) -> int:
        return self.support.get(p, 0)

    def __add__(self, other: "Divisor") -> "Divisor":
        out = self.support
        for p, m in other.items:
            out[p] = out.get(p, 0) + m
        return Divisor.from_map(out)

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((p, -m) for p, m in self.items))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __mul__(self, k: int) -> "Divisor":
        return Divisor.from_map({p: k * m for p, m in self.items})

    __rmul__ = __mul__

    def positive_part(self) -> "Divisor":
        return Divisor.from_map({p: m for p, m in self.items if m > 0})

    def negative_part(self) -> "Divisor":
        return Divisor.from_map({p: -m for p, m in self.items if m < 0})

    def restricted(self, points: Iterable[Point]) -> "Divisor":
        keep = set(points)
        return Divisor.from_map({p: m for p, m in self.items if p in keep})

    def to_json(self) -> List[Dict[str, object]]:
        return [{"point": format_point(p), "multiplicity": m} for p, m in self.items]


def rr_dim(divisor: Divisor, r: int = 1) -> int:
    """Riemann-Roch dimension on the sphere, for r-vector valued functions."""
    return r * max(0, divisor.degree + 1)


# ---------------------------------------------------------------------------
# marked configuration


@dataclass(frozen=True)
class TyurinPoint:
    gamma: Point
    alpha: Tuple[Scalar, ...]

    @property
    def is_active(self) -> bool:
        return any(self.alpha)


@dataclass(frozen=True)
class MarkedConfig:
    """In-points I, out-points O, Tyurin data and the algebra; genus is always 0."""

    in_points: Tuple[Point, ...]
    out_points: Tuple[Point, ...]
    tyurin: Tuple[TyurinPoint, ...]
    algebra: AlgebraSpec
    genus: int = 0

    def __post_init__(self):
        if self.genus != 0:
            raise ConfigError("only genus 0 is executable", field_path=("genus",))
        if not self.in_points:
            raise ConfigError("at least one in-point is required", field_path=("in_points",))
        if not self.out_points:
            raise ConfigError("at least one out-point is required", field_path=("out_points",))
        seen: Dict[Point, str] = {}
        for role, pts in (("in_points", self.in_points), ("out_points", self.out_points),
                          ("tyurin", tuple(t.gamma for t in self.tyurin))):
            for idx, p in enumerate(pts):
                if p in seen:
                    raise ConfigError(f"point {format_point(p)} repeats (already in {seen[p]})",
                                      field_path=(role, idx))
                seen[p] = role
        size = self.algebra.size
        for idx, t in enumerate(self.tyurin):
            if t.gamma.is_infinite:
                raise ConfigError("Tyurin points must be finite", field_path=("tyurin", idx, "gamma"))
            if len(t.alpha) != size:
                raise ConfigError(f"alpha needs {size} entries, got {len(t.alpha)}",
                                  field_path=("tyurin", idx, "alpha"))
            if self.algebra.family == "so":
                norm = ZERO
                for a in t.alpha:
                    norm = norm + a * a
                if norm:
                    raise ConfigError("so requires an isotropic alpha (alpha^t alpha = 0)",
                                      field_path=("tyurin", idx, "alpha"))

    @property
    def N(self) -> int:
        return len(self.in_points)

    @property
    def M(self) -> int:
        return len(self.out_points)

    @property
    def K(self) -> int:
        return len(self.tyurin)

    @property
    def eps(self) -> int:
        return self.algebra.eps

    @property
    def marked_points(self) -> Tuple[Point, ...]:
        """A = I u O."""
        return self.in_points + self.out_points

    @property
    def weak_points(self) -> Tuple[Point, ...]:
        return tuple(t.gamma for t in self.tyurin)

    @property
    def active_tyurin(self) -> Tuple[TyurinPoint, ...]:
        return tuple(t for t in self.tyurin if t.is_active)

    @property
    def effective_eps(self) -> int:
        """Total pole allowance at the weak singularities actually carrying poles."""
        return self.eps * len(self.active_tyurin)

    @property
    def last_out(self) -> Point:
        return self.out_points[-1]

    def to_json(self) -> Dict[str, object]:
        return {
            "genus": self.genus,
            "algebra": {"family": self.algebra.family, "n": self.algebra.n},
            "in_points": [format_point(p) for p in self.in_points],
            "out_points": [format_point(p) for p in self.out_points],
            "tyurin": [{"gamma": format_point(t.gamma), "alpha": [format_scalar(a) for a in t.alpha]}
                       for t in self.tyurin],
        }


# ---------------------------------------------------------------------------
# grading prescriptions


@dataclass(frozen=True)
class GradingPrescription:
    """(D_m)_O = sum_i (a_i m + b_{m,i}) Q_i.

    ``b`` holds the default b_i; ``overrides`` maps (m, i) to a replacement b_{m,i}.
    """

    kind: str
    a: Tuple[object, ...]
    b: Tuple[object, ...]
    overrides: Tuple[Tuple[Tuple[int, int], object], ...] = ()
    bound: Optional[object] = None

    @classmethod
    def standard(cls, N: int, M: int) -> "GradingPrescription":
        if N < M:
            raise PrescriptionError(f"the standard prescription needs N >= M (N={N}, M={M}); use a custom one")
        a = tuple([QQ(1)] * (M - 1) + [QQ(N - M + 1)])
        b = tuple([QQ(1)] * (M - 1) + [QQ(N - M)])
        return cls("standard", a, b)

    @classmethod
    def single_out(cls, N: int) -> "GradingPrescription":
        return cls("m1", (QQ(N),), (QQ(N - 1),))

    @classmethod
    def default_for(cls, config: MarkedConfig) -> "GradingPrescription":
        if config.M == 1:
            return cls.single_out(config.N)
        return cls.standard(config.N, config.M)

    def b_at(self, m: int, i: int):
        return dict(self.overrides).get((m, i), self.b[i])

    def effective_bound(self):
        if self.bound is not None:
            return self.bound
        values = [abs(v) for v in self.b] + [abs(v) for _, v in self.overrides]
        return max(values, default=QQ(0)) + 1

    def coefficient(self, m: int, i: int) -> int:
        value = self.a[i] * m + self.b_at(m, i)
        if value.denominator != 1:
            raise PrescriptionError(f"a_{i + 1} m + b_(m,{i + 1}) is not an integer at m={m}")
        return int(value.numerator)

    def validate(self, N: int, M: int, degrees: Iterable[int] = ()) -> None:
        if len(self.a) != M or len(self.b) != M:
            raise PrescriptionError(f"prescription needs {M} values of a and b")
        if sum(self.a, QQ(0)) != N:
            raise PrescriptionError(f"sum of a_i must equal N={N}")
        if any(a <= 0 for a in self.a):
            raise PrescriptionError("every a_i must be positive")
        bound = self.effective_bound()
        for m in degrees:
            bs = [self.b_at(m, i) for i in range(M)]
            if sum(bs, QQ(0)) != N - 1:
                raise PrescriptionError(f"sum of b_(m,i) must equal N+g-1={N - 1} at m={m}")
            for i in range(M):
                self.coefficient(m, i)
                if abs(bs[i]) >= bound:
                    raise PrescriptionError(f"|b_({m},{i + 1})| must stay below B={bound}")
                if self.coefficient(m + 1, i) <= self.coefficient(m, i):
                    raise PrescriptionError(f"(D_m)_O must increase at Q_{i + 1} from m={m} to m={m + 1}")

    def expected_S(self) -> int:
        """Almost-grading constant implied by the prescription."""
        worst = 0
        for a, b in zip(self.a, self.b):
            p, q = b.numerator * a.denominator, b.denominator * a.numerator
            worst = max(worst, -((-p) // q))
        return int(max(0, worst))

    def to_json(self) -> Dict[str, object]:
        def fmt(q) -> str:
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        return {"kind": self.kind, "a": [fmt(x) for x in self.a], "b": [fmt(x) for x in self.b],
                "overrides": [{"m": m, "i": i + 1, "b": fmt(v)} for (m, i), v in self.overrides]}


def out_divisor(m: int, config: MarkedConfig, prescription: GradingPrescription) -> Divisor:
    return Divisor.from_map({q: prescription.coefficient(m, i) for i, q in enumerate(config.out_points)})


def grading_divisor(m: int, config: MarkedConfig, prescription: GradingPrescription) -> Divisor:
    """D_m = -m sum P_s + eps sum gamma_s + (D_m)_O."""
    prescription.validate(config.N, config.M, (m,))
    parts: Dict[Point, int] = {p: -m for p in config.in_points}
    for t in config.tyurin:
        parts[t.gamma] = config.eps
    divisor = Divisor.from_map(parts) + out_divisor(m, config, prescription)
    return divisor


def vector_field_out_divisor(m: int, config: MarkedConfig, prescription: GradingPrescription) -> Divisor:
    """(D^L_m)_O = (D_{m+1})_O - 2 Q_M."""
    return out_divisor(m + 1, config, prescription) - Divisor.single(config.last_out, 2)


# ---------------------------------------------------------------------------
# constrained section spaces


@dataclass(frozen=True)
class JetCondition:
    """sum_c weights[c] * (coefficient of order ``order`` of component c at ``point``) = value."""

    point: Point
    order: int
    weights: Tuple[Tuple[int, Scalar], ...]
    value: Scalar = ZERO
    label: str = ""


@dataclass(frozen=True)
class ConstraintSystem:
    """L'(D) data: sections with (v) >= -D subject to jet conditions.

    ``weight`` selects the chart at infinity: 0 functions, -1 vector fields, 1 one-forms.
    """

    ansatz_divisor: Divisor
    conditions: Tuple[JetCondition, ...] = ()
    weight: int = 0

    def with_conditions(self, extra: Iterable[JetCondition]) -> "ConstraintSystem":
        return replace(self, conditions=self.conditions + tuple(extra))


class SectionSolver:
    """Builds the partial-fraction ansatz and the linear system of a ConstraintSystem."""

    def __init__(self, system: ConstraintSystem, r: int):
        self.system = system
        self.r = r
        weight = system.weight
        # the ansatz is for the coefficient function f of f (dz)^weight
        fdiv = system.ansatz_divisor + Divisor.single(INFINITY, -2 * weight)
        self.function_divisor = fdiv
        self.positive = fdiv.positive_part()
        self.negative = fdiv.negative_part()
        ansatz: List[Tuple[str, Point, int]] = [("const", INFINITY, 0)]
        finite = [(p, m) for p, m in self.positive.items if not p.is_infinite]
        for p, m in finite:
            ansatz.extend(("pole", p, k) for k in range(1, m + 1))
        at_infinity = self.positive.multiplicity(INFINITY)
        ansatz.extend(("pole", INFINITY, k) for k in range(1, at_infinity + 1))
        self.ansatz = ansatz
        self.functions = [ONE_RF if kind == "const" else RationalFunction.pole(p, k) for kind, p, k in ansatz]
        den = PolyRing.one
        for p, m in finite:
            den = den * linear_factor(p) ** m
        self.common_denominator = den
        numerators = []
        for kind, p, k in ansatz:
            if kind == "const":
                numerators.append(den)
            elif p.is_infinite:
                numerators.append(den * Z ** k)
            else:
                numerators.append(den.exquo(linear_factor(p) ** k))
        self.numerators = numerators

    @property
    def ncols(self) -> int:
        return len(self.functions) * self.r

    def column(self, j: int, c: int) -> int:
        return j * self.r + c

    def functional_row(self, p: Point, order: int, weights: Mapping[int, Scalar],
                       chart_weight: Optional[int] = None) -> Vector:
        weight = self.system.weight if chart_weight is None else chart_weight
        row: Vector = {}
        for j, f in enumerate(self.functions):
            value = local_coefficient(f, p, order, weight)
            if not value:
                continue
            for c, w in weights.items():
                if w:
                    row[self.column(j, c)] = value * w
        return row

    @cached_property
    def rows(self) -> Tuple[List[Vector], List[Scalar]]:
        rows: List[Vector] = []
        values: List[Scalar] = []
        for p, m in self.negative.items:
            # function divisor forbids orders below m at p
            for order in range(0, m):
                for c in range(self.r):
                    rows.append(self.functional_row(p, order, {c: ONE}, chart_weight=0))
                    values.append(ZERO)
        for cond in self.system.conditions:
            rows.append(self.functional_row(cond.point, cond.order, dict(cond.weights)))
            values.append(cond.value)
        return rows, values

    def kernel(self) -> List[Vector]:
        rows, _ = self.rows
        return linalg.kernel(rows, self.ncols)

    def particular(self) -> Optional[Vector]:
        rows, values = self.rows
        return linalg.solve(rows, values, self.ncols)

    def realize(self, vec: Mapping[int, Scalar]) -> Tuple[RationalFunction, ...]:
        """Vector-valued rational function for a coefficient vector."""
        out = []
        for c in range(self.r):
            num = PolyRing.zero
            for j, n in enumerate(self.numerators):
                x = vec.get(self.column(j, c))
                if x:
                    num = num + n * x
            out.append(RationalFunction(num, self.common_denominator))
        return tuple(out)


def section_space(system: ConstraintSystem, r: int = 1) -> List[Tuple[RationalFunction, ...]]:
    """Basis of L'(D): r-vector valued rational functions with (v) >= -D meeting every condition."""
    solver = SectionSolver(system, r)
    return [solver.realize(v) for v in solver.kernel()]


def particular_section(system: ConstraintSystem, r: int = 1) -> Optional[Tuple[RationalFunction, ...]]:
    """Solution of an inhomogeneous system with free unknowns zero, or None if inconsistent."""
    solver = SectionSolver(system, r)
    sol = solver.particular()
    return None if sol is None else solver.realize(sol)


# ---------------------------------------------------------------------------
# leading-term normalisation


@dataclass(frozen=True)
class NormalizedSection:
    point_index: int
    component: int
    components: Tuple[RationalFunction, ...]
    delta: int
    unique: bool


@dataclass
class NormalizationOutcome:
    sections: Dict[Tuple[int, int], NormalizedSection]
    space_dimension: int
    adjustments: List[Dict[str, object]] = field(default_factory=list)


class _BumpedSpace:
    """Kernel of L'(D + delta Q) together with its leading-jet map at the lead points."""

    def __init__(self, system: ConstraintSystem, r: int, lead_points: Sequence[Point], lead_order: int,
                 bump_point: Point, delta: int):
        self.delta = delta
        self.solver = SectionSolver(replace(system, ansatz_divisor=system.ansatz_divisor
                                            + Divisor.single(bump_point, delta)), r)
        self.kern = self.solver.kernel()
        lead_rows = [self.solver.functional_row(p, lead_order, {u: ONE}) for p in lead_points for u in range(r)]
        self.phi = linalg.compose_rows(lead_rows, self.kern)
        self.targets = len(lead_rows)

    @property
    def dimension(self) -> int:
        return len(self.kern)

    @cached_property
    def defect(self) -> int:
        return self.dimension - linalg.rank(self.phi, self.dimension)

    def solve(self, wanted: Sequence[int]) -> Dict[int, Tuple[RationalFunction, ...]]:
        rhs = [[ONE if row == t else ZERO for row in range(self.targets)] for t in wanted]
        out = {}
        for t, sol in zip(wanted, linalg.solve_many(self.phi, rhs, self.dimension)):
            if sol is not None:
                out[t] = self.solver.realize(linalg.combine(self.kern, sol))
        return out


def normalized_sections(system: ConstraintSystem, r: int, lead_points: Sequence[Point], lead_order: int,
                        bump_point: Point, bump_limit: int, tag: Tuple[int, ...] = (),
                        downward: bool = False) -> NormalizationOutcome:
    """Sections whose order-``lead_order`` jets at the lead points are unit vectors.

    The pole order allowed at ``bump_point`` is shifted by the first delta in 0, 1, ..., bump_limit
    (then -1, ..., -bump_limit when ``downward``) with dim L'(D + delta Q) = len(lead_points) * r.
    Targets without a preimage there are searched further up to ``bump_limit``; anything left
    raises NonGenericError.
    """
    expected = len(lead_points) * r
    every = [(p, u) for p in range(len(lead_points)) for u in range(r)]
    spaces: Dict[int, _BumpedSpace] = {}

    def space(delta: int) -> _BumpedSpace:
        if delta not in spaces:
            spaces[delta] = _BumpedSpace(system, r, lead_points, lead_order, bump_point, delta)
        return spaces[delta]

    def search(deltas: Iterable[int], overshoot: Callable[[int], bool]) -> Optional[_BumpedSpace]:
        # the spaces are nested in delta, so a direction stops once it passes the expected dimension
        for delta in deltas:
            candidate = space(delta)
            if candidate.dimension == expected:
                return candidate
            if overshoot(candidate.dimension):
                return None
        return None

    accepted = search(range(0, bump_limit + 1), lambda d: d > expected)
    if accepted is None and downward:
        accepted = search(range(-1, -bump_limit - 1, -1), lambda d: d < expected)
    if accepted is None:
        tried = {d: s.dimension for d, s in sorted(spaces.items())}
        failing = [tag + (p + 1, u) for p, u in every]
        raise NonGenericError(f"dim L'(D + k Q) never equals {expected} for {tag}: {tried}", failing)

    found: Dict[Tuple[int, int], NormalizedSection] = {}
    remaining = list(every)
    for delta in range(accepted.delta, bump_limit + 1):
        if not remaining:
            break
        current = space(delta)
        solved = current.solve([p * r + u for p, u in remaining])
        for p, u in remaining:
            if p * r + u in solved:
                found[(p, u)] = NormalizedSection(p, u, solved[p * r + u], delta, current.defect == 0)
        remaining = [t for t in remaining if t not in found]
    if remaining:
        failing = [tag + (p + 1, u) for p, u in remaining]
        raise NonGenericError(f"no normalised section within bump limit {bump_limit} for {failing}", failing)

    adjustments: List[Dict[str, object]] = []
    if accepted.delta:
        adjustments.append({"index": list(tag), "delta": accepted.delta, "point": format_point(bump_point),
                            "reason": "dimension", "dimension": space(0).dimension})
    for (p, u), sec in sorted(found.items()):
        if sec.delta != accepted.delta or not sec.unique:
            adjustments.append({"index": list(tag) + [p + 1, u], "delta": sec.delta,
                                "point": format_point(bump_point), "reason": "normalisation", "unique": sec.unique})
    if adjustments:
        logger.info("normalisation %s needed %d adjustments", tag, len(adjustments))
    return NormalizationOutcome(found, accepted.dimension, adjustments)
