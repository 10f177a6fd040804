"""The geometric cocycles gamma_1 and gamma_2, their tables and the cohomological checks.

Cycles are formal sums of small circles around marked points; integrals are residue sums.
Tables over a graded basis are built from per-point residue tables, so a cycle table is a
weighted sum and the separating-cycle relation becomes an entrywise identity.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from ..core.errors import CocycleError
from ..core.parallel import parallel_map
from ..models import Check
from . import linalg
from .classical import mixed_structure
from .connection import ConnectionForm, DgElement, covariant_derivative, dg_bracket
from .exactmath import (ONE, ZERO, ZERO_RF, Point, RationalFunction, Scalar, coefficient, format_point, format_scalar,
                        ord_at, parse_point, residue_at)
from .geometry import MarkedConfig
from .grading import GradedBasis, Index, StructureConstants, format_index
from .laxalgebra import LaxElement, VectorField, kn_vector_basis, lax_bracket

logger = logging.getLogger(__name__)

Evaluator = Callable[[LaxElement, LaxElement], Scalar]


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    """sum_P weight(P) C_P with C_P a small positively oriented circle around P."""

    weights: Tuple[Tuple[Point, int], ...]
    label: str = ""

    @classmethod
    def from_map(cls, mapping: Mapping[Point, int], label: str = "") -> "Cycle":
        items = tuple(sorted(((p, w) for p, w in mapping.items() if w), key=lambda kv: kv[0].sort_key()))
        return cls(items, label)

    @classmethod
    def around_in(cls, config: MarkedConfig, i: int) -> "Cycle":
        return cls.from_map({config.in_points[i - 1]: 1}, f"C{i}")

    @classmethod
    def around_out(cls, config: MarkedConfig, j: int) -> "Cycle":
        return cls.from_map({config.out_points[j - 1]: 1}, f"C*{j}")

    @classmethod
    def separating(cls, config: MarkedConfig) -> "Cycle":
        return cls.from_map({p: 1 for p in config.in_points}, "CS")

    @classmethod
    def full(cls, config: MarkedConfig) -> "Cycle":
        return cls.from_map({p: 1 for p in config.marked_points}, "CA")

    @classmethod
    def parse(cls, config: MarkedConfig, name: str) -> "Cycle":
        """"C1", "C*2", "CS", "CA" or "C@<point>"."""
        text = name.strip()
        try:
            if text == "CS":
                return cls.separating(config)
            if text == "CA":
                return cls.full(config)
            if text.startswith("C*"):
                j = int(text[2:])
                if not 1 <= j <= config.M:
                    raise IndexError
                return cls.around_out(config, j)
            if text.startswith("C@"):
                p = parse_point(text[2:])
                if p not in config.marked_points:
                    raise CocycleError(f"cycle point {text[2:]} is not a marked point")
                return cls.from_map({p: 1}, text)
            if text.startswith("C"):
                i = int(text[1:])
                if not 1 <= i <= config.N:
                    raise IndexError
                return cls.around_in(config, i)
        except (ValueError, IndexError):
            pass
        raise CocycleError(f"unknown cycle {name!r}")

    @property
    def support(self) -> Dict[Point, int]:
        return dict(self.weights)

    def __add__(self, other: "Cycle") -> "Cycle":
        merged = self.support
        for p, w in other.weights:
            merged[p] = merged.get(p, 0) + w
        return Cycle.from_map(merged, f"{self.label}+{other.label}")

    def __neg__(self) -> "Cycle":
        return Cycle(tuple((p, -w) for p, w in self.weights), f"-{self.label}")

    def to_json(self) -> Dict[str, int]:
        return {format_point(p): w for p, w in self.weights}


# ---------------------------------------------------------------------------
# direct evaluation


def _integrate(f: RationalFunction, cycle: Cycle) -> Scalar:
    total = ZERO
    for p, w in cycle.weights:
        r = residue_at(f, p)
        if r:
            total = total + r * w
    return total


def gamma1_integrand(omega: ConnectionForm, L: LaxElement, L2: LaxElement) -> RationalFunction:
    """tr(L nabla L') as the coefficient of dz."""
    return L.matmul(L2.derivative() + omega.matrix.bracket(L2)).trace()


def evaluate_gamma1(omega: ConnectionForm, C: Cycle, L: LaxElement, L2: LaxElement) -> Scalar:
    return _integrate(gamma1_integrand(omega, L, L2), C)


def evaluate_gamma2(C: Cycle, L: LaxElement, L2: LaxElement) -> Scalar:
    return _integrate(L.trace() * L2.trace().derivative(), C)


def gamma1(omega: ConnectionForm, C: Cycle) -> Evaluator:
    return partial(evaluate_gamma1, omega, C)


def gamma2(C: Cycle) -> Evaluator:
    return partial(evaluate_gamma2, C)


# ---------------------------------------------------------------------------
# tables


@dataclass
class CocycleTable:
    """Values on pairs (a, b) of window basis indices with a before b; zero values are not stored."""

    name: str
    window: Tuple[int, int]
    indices: Tuple[Index, ...]
    values: Dict[Tuple[Index, Index], Scalar]
    meta: Dict[str, object] = field(default_factory=dict)
    _position: Dict[Index, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._position:
            self._position = {idx: k for k, idx in enumerate(self.indices)}

    def position(self, idx: Index) -> int:
        return self._position[idx]

    def value(self, a: Index, b: Index) -> Scalar:
        if a == b:
            return ZERO
        if self._position[a] < self._position[b]:
            return self.values.get((a, b), ZERO)
        return -self.values.get((b, a), ZERO)

    def pairs(self) -> Iterator[Tuple[Index, Index]]:
        for i, a in enumerate(self.indices):
            for b in self.indices[i + 1:]:
                yield a, b

    def _like(self, values: Dict[Tuple[Index, Index], Scalar], name: str) -> "CocycleTable":
        return CocycleTable(name, self.window, self.indices, {k: v for k, v in values.items() if v}, {},
                            self._position)

    def _check(self, other: "CocycleTable") -> None:
        if self.indices != other.indices:
            raise CocycleError(f"tables {self.name} and {other.name} live on different windows")

    def __add__(self, other: "CocycleTable") -> "CocycleTable":
        self._check(other)
        out = dict(self.values)
        for k, v in other.values.items():
            out[k] = out.get(k, ZERO) + v
        return self._like(out, f"{self.name}+{other.name}")

    def __neg__(self) -> "CocycleTable":
        return self._like({k: -v for k, v in self.values.items()}, f"-{self.name}")

    def __sub__(self, other: "CocycleTable") -> "CocycleTable":
        return self + (-other)

    def scale(self, c: Scalar) -> "CocycleTable":
        return self._like({k: v * c for k, v in self.values.items()}, f"{format_scalar(c)}*{self.name}")

    def restricted(self, keep: Callable[[Index, Index], bool]) -> "CocycleTable":
        return self._like({k: v for k, v in self.values.items() if keep(*k)}, self.name)

    def equals(self, other: "CocycleTable") -> bool:
        self._check(other)
        return self.values == other.values

    def levels(self) -> List[int]:
        return sorted({a[0] + b[0] for (a, b) in self.values})

    def to_json(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "window": list(self.window),
            "values": [{"pair": [format_index(a), format_index(b)], "value": format_scalar(v)}
                       for (a, b), v in sorted(self.values.items(), key=lambda kv: (self._position[kv[0][0]],
                                                                                    self._position[kv[0][1]]))],
            "meta": self.meta,
        }


def combine_tables(tables: Sequence[CocycleTable], coefficients: Sequence[Scalar], name: str) -> CocycleTable:
    if not tables:
        raise CocycleError("no tables to combine")
    out: Dict[Tuple[Index, Index], Scalar] = {}
    for t, c in zip(tables, coefficients):
        tables[0]._check(t)
        if not c:
            continue
        for k, v in t.values.items():
            out[k] = out.get(k, ZERO) + v * c
    return tables[0]._like(out, name)


def _residue_of_product(a: RationalFunction, b: RationalFunction, p: Point) -> Scalar:
    """Residue of a*b dz at p from the two local expansions."""
    if not a or not b:
        return ZERO
    oa, ob = int(ord_at(a, p)), int(ord_at(b, p))
    # at infinity res(F dz) = -(coefficient of w^1 of F)
    target = 1 if p.is_infinite else -1
    acc = ZERO
    for i in range(oa, target - ob + 1):
        ca = coefficient(a, p, i)
        if ca:
            cb = coefficient(b, p, target - i)
            if cb:
                acc = acc + ca * cb
    return -acc if p.is_infinite else acc


@dataclass
class ResidueTables:
    """Per-point residue tables of gamma_1 (for one omega) or gamma_2 on the window basis."""

    kind: str
    basis: GradedBasis
    indices: Tuple[Index, ...]
    per_point: Dict[Point, Dict[Tuple[Index, Index], Scalar]]

    def table(self, cycle: Cycle) -> CocycleTable:
        out: Dict[Tuple[Index, Index], Scalar] = {}
        for p, w in cycle.weights:
            if p not in self.per_point:
                raise CocycleError(f"no residue table at {format_point(p)}")
            for k, v in self.per_point[p].items():
                out[k] = out.get(k, ZERO) + v * w
        name = f"{self.kind}[{cycle.label or cycle.to_json()}]"
        return CocycleTable(name, self.basis.window, self.indices, {k: v for k, v in out.items() if v},
                            {"cycle": cycle.to_json(), "kind": self.kind})


def _gamma1_partners(basis: GradedBasis, omega: ConnectionForm, idx: Index) -> Tuple[RationalFunction, ...]:
    """g-coordinates of dX/dz + [W, X] for the basis element X."""
    g = basis.coordinates[idx]
    out = [f.derivative() for f in g]
    w_coords = omega.coordinates()
    mixed = mixed_structure(basis.config.algebra)
    for (a, v), terms in mixed.items():
        if w_coords[a] and g[v]:
            prod = w_coords[a] * g[v]
            for w, c in terms:
                out[w] = out[w] + prod * c
    return tuple(out)


def residue_tables(basis: GradedBasis, kind: str, omega: Optional[ConnectionForm] = None,
                   points: Optional[Iterable[Point]] = None, jobs: Optional[int] = None) -> ResidueTables:
    """Residues at each point (default: the marked points) of the gamma integrand on window pairs."""
    if kind not in ("gamma1", "gamma2"):
        raise CocycleError(f"unknown cocycle kind {kind!r}")
    if kind == "gamma1" and omega is None:
        raise CocycleError("gamma1 needs a connection form")
    config = basis.config
    pts = tuple(points) if points is not None else config.marked_points
    indices = tuple(basis.indices())
    alg = basis.algebra
    if kind == "gamma1":
        gram = [(u, w, c) for u, row in enumerate(alg.trace_gram) for w, c in enumerate(row) if c]
        partners = {idx: _gamma1_partners(basis, omega, idx) for idx in indices}
    else:
        traces = alg.traces
        trace_fn = {}
        for idx in indices:
            acc = ZERO_RF
            for t, f in zip(traces, basis.coordinates[idx]):
                if t and f:
                    acc = acc + f * t
            trace_fn[idx] = acc
        derived = {idx: f.derivative() for idx, f in trace_fn.items()}

    def row(i: int) -> Dict[Point, Dict[Tuple[Index, Index], Scalar]]:
        a = indices[i]
        out: Dict[Point, Dict[Tuple[Index, Index], Scalar]] = {p: {} for p in pts}
        for b in indices[i + 1:]:
            for p in pts:
                if kind == "gamma1":
                    fa, db = basis.coordinates[a], partners[b]
                    value = ZERO
                    for u, w, c in gram:
                        r = _residue_of_product(fa[u], db[w], p)
                        if r:
                            value = value + c * r
                else:
                    value = _residue_of_product(trace_fn[a], derived[b], p)
                if value:
                    out[p][(a, b)] = value
        return out

    rows = parallel_map(row, range(len(indices)), jobs)
    per_point: Dict[Point, Dict[Tuple[Index, Index], Scalar]] = {p: {} for p in pts}
    for r in rows:
        for p, values in r.items():
            per_point[p].update(values)
    logger.info("%s residue tables on %d elements at %d points", kind, len(indices), len(pts))
    return ResidueTables(kind, basis, indices, per_point)


def coboundary_table(phi: Mapping[Index, Scalar], basis: GradedBasis, consts: StructureConstants,
                     name: str = "coboundary") -> CocycleTable:
    """(delta phi)(a, b) = phi([a, b]) on every covered window pair."""
    indices = tuple(basis.indices())
    values: Dict[Tuple[Index, Index], Scalar] = {}
    for i, a in enumerate(indices):
        for b in indices[i + 1:]:
            terms = consts.terms(a, b)
            if not terms:
                continue
            acc = ZERO
            for h, c in terms:
                x = phi.get(h)
                if x:
                    acc = acc + c * x
            if acc:
                values[(a, b)] = acc
    return CocycleTable(name, basis.window, indices, values, {"kind": "coboundary"})


# ---------------------------------------------------------------------------
# identities


def _fmt_pair(L: LaxElement, L2: LaxElement) -> Dict[str, object]:
    return {"L": L.to_json(), "L2": L2.to_json()}


def verify_cocycle_identity(gamma: Evaluator, triples: Iterable[Tuple[LaxElement, LaxElement, LaxElement]],
                            name: str = "cocycle identity") -> Check:
    """gamma([L,L'],L'') + gamma([L',L''],L) + gamma([L'',L],L') = 0 on every triple."""
    checked = 0
    for L, L2, L3 in triples:
        checked += 1
        total = gamma(lax_bracket(L, L2), L3) + gamma(lax_bracket(L2, L3), L) + gamma(lax_bracket(L3, L), L2)
        if total:
            return Check(name=name, passed=False, checked=checked,
                         counterexample={"L": L.to_json(), "L2": L2.to_json(), "L3": L3.to_json(),
                                         "value": format_scalar(total)})
    return Check(name=name, passed=True, checked=checked)


def antisymmetry_check(gamma: Evaluator, pairs: Iterable[Tuple[LaxElement, LaxElement]],
                       name: str = "antisymmetry") -> Check:
    checked = 0
    for L, L2 in pairs:
        checked += 1
        if gamma(L, L2) + gamma(L2, L) or gamma(L, L):
            return Check(name=name, passed=False, checked=checked, counterexample=_fmt_pair(L, L2))
    return Check(name=name, passed=True, checked=checked)


def invariance_defect(gamma: Evaluator, omega_action: ConnectionForm, e: VectorField, L: LaxElement,
                      L2: LaxElement) -> Scalar:
    return gamma(covariant_derivative(omega_action, e, L), L2) + gamma(L, covariant_derivative(omega_action, e, L2))


def l_invariance_check(gamma: Evaluator, omega_action: ConnectionForm,
                       samples: Iterable[Tuple[VectorField, LaxElement, LaxElement]],
                       name: str = "L-invariance") -> Check:
    """gamma(nabla'_e L, L') + gamma(L, nabla'_e L') = 0; stops at the first violating triple."""
    checked = 0
    for e, L, L2 in samples:
        checked += 1
        defect = invariance_defect(gamma, omega_action, e, L, L2)
        if defect:
            witness = {"e": e.to_json(), **_fmt_pair(L, L2), "value": format_scalar(defect)}
            return Check(name=name, passed=False, checked=checked, counterexample=witness)
    return Check(name=name, passed=True, checked=checked)


def basis_triples(basis: GradedBasis, ks: Sequence[int] = (0, 1, -1),
                  levels: Sequence[int] = (-2, -1, 0)) -> Iterator[Tuple[VectorField, LaxElement, LaxElement]]:
    """(e_{k,s}, X_a, X_b) over window pairs whose level plus k lies in ``levels``."""
    config = basis.config
    indices = basis.indices()
    for k in ks:
        for s in range(1, config.N + 1):
            e = kn_vector_basis(k, s, config, basis.prescription)
            for i, a in enumerate(indices):
                for b in indices[i + 1:]:
                    if a[0] + b[0] + k in levels:
                        yield e, basis.element(a), basis.element(b)


def dg_extension_check(gamma: Evaluator, omega: ConnectionForm,
                       samples: Iterable[Tuple[VectorField, LaxElement, LaxElement]],
                       name: str = "cocycle of D_g (extension by zero)") -> Check:
    """Cocycle identity of gamma extended by zero to D_g on (L, 0), (L', 0), (0, e).

    Its value is compared with the invariance defect on the same triple.
    """
    checked = 0
    mismatches = 0
    zero_field = VectorField(ZERO_RF)
    first: Optional[Dict[str, object]] = None
    for e, L, L2 in samples:
        checked += 1
        x = DgElement(L, zero_field)
        y = DgElement(L2, zero_field)
        z = DgElement(LaxElement.zero(L.config), e)

        def ext(u: DgElement, v: DgElement) -> Scalar:
            return gamma(u.current, v.current)

        total = (ext(dg_bracket(x, y, omega), z) + ext(dg_bracket(y, z, omega), x)
                 + ext(dg_bracket(z, x, omega), y))
        if total != invariance_defect(gamma, omega, e, L, L2):
            mismatches += 1
        if total and first is None:
            first = {"e": e.to_json(), **_fmt_pair(L, L2), "value": format_scalar(total)}
    return Check(name=name, passed=first is None, checked=checked,
                 details={"mismatches_with_invariance": mismatches}, counterexample=first)


def omega_difference_check(omega: ConnectionForm, omega2: ConnectionForm, C: Cycle,
                           pairs: Iterable[Tuple[LaxElement, LaxElement]]) -> Check:
    """gamma_1,omega - gamma_1,omega' = integral of tr((omega' - omega)[L, L'])."""
    name = "gamma_1 difference for two connection forms"
    delta = omega2.matrix - omega.matrix
    checked = 0
    for L, L2 in pairs:
        checked += 1
        lhs = evaluate_gamma1(omega, C, L, L2) - evaluate_gamma1(omega2, C, L, L2)
        rhs = _integrate(delta.matmul(L.bracket(L2)).trace(), C)
        if lhs != rhs:
            return Check(name=name, passed=False, checked=checked,
                         counterexample={**_fmt_pair(L, L2), "difference": format_scalar(lhs),
                                         "integral": format_scalar(rhs)})
    return Check(name=name, passed=True, checked=checked)


def residue_theorem_check(omega: ConnectionForm, config: MarkedConfig,
                          pairs: Iterable[Tuple[LaxElement, LaxElement]]) -> Check:
    """Both integrands have no residue at the weak singularities and residues summing to zero over A."""
    name = "residue theorem over all marked points"
    full = Cycle.full(config)
    checked = 0
    for L, L2 in pairs:
        checked += 1
        for integrand in (gamma1_integrand(omega, L, L2), L.trace() * L2.trace().derivative()):
            at_weak = [format_point(t.gamma) for t in config.tyurin if residue_at(integrand, t.gamma)]
            if at_weak or _integrate(integrand, full):
                return Check(name=name, passed=False, checked=checked,
                             counterexample={**_fmt_pair(L, L2), "weak_points_with_residue": at_weak})
    return Check(name=name, passed=True, checked=checked)


def separating_cycle_check(tables: ResidueTables) -> Check:
    """table(C_S) = sum_i table(C_i) = -sum_j table(C*_j), entrywise."""
    config = tables.basis.config
    cs = tables.table(Cycle.separating(config))
    by_in = combine_tables([tables.table(Cycle.around_in(config, i)) for i in range(1, config.N + 1)],
                           [ONE] * config.N, "sum C_i")
    by_out = combine_tables([tables.table(Cycle.around_out(config, j)) for j in range(1, config.M + 1)],
                            [-ONE] * config.M, "-sum C*_j")
    ok = cs.equals(by_in) and cs.equals(by_out)
    counter = None
    if not ok:
        for key in set(cs.values) | set(by_out.values):
            if cs.values.get(key, ZERO) != by_out.values.get(key, ZERO):
                counter = {"pair": [format_index(key[0]), format_index(key[1])],
                           "C_S": format_scalar(cs.values.get(key, ZERO)),
                           "minus_out": format_scalar(by_out.values.get(key, ZERO))}
                break
    return Check(name=f"separating cycle relation ({tables.kind})", passed=ok, checked=len(cs.values),
                 counterexample=counter)


# ---------------------------------------------------------------------------
# bounds, coboundaries and ranks


def classify_bounds(table: CocycleTable) -> Dict[str, object]:
    """Window-relative bounds: a bound counts only when the window shows a vanishing stretch beyond it."""
    lo, hi = table.window
    levels = table.levels()
    if not levels:
        meta = {"zero": True, "bounded_above": None, "bounded_below": None, "local": True,
                "upper_bound_zero": True, "verdict": "zero within window"}
    else:
        r1, r2 = max(levels), min(levels)
        above = r1 if r1 <= hi else None
        below = r2 if r2 >= lo else None
        local = above is not None and below is not None
        verdict = "local within window" if local else (
            "bounded within window" if above is not None or below is not None else "inconclusive within window")
        meta = {"zero": False, "bounded_above": above, "bounded_below": below, "local": local,
                "upper_bound_zero": above is not None and above <= 0, "verdict": verdict,
                "observed_levels": [r2, r1]}
    table.meta.update(meta)
    return meta


def bounds_check(table: CocycleTable, expect_upper_zero: bool = False, expect_local: bool = False,
                 expect_below: bool = False) -> Check:
    meta = classify_bounds(table)
    ok = True
    if expect_upper_zero:
        ok = ok and bool(meta["upper_bound_zero"])
    if expect_local:
        ok = ok and bool(meta["local"])
    if expect_below:
        ok = ok and (meta["zero"] or meta["bounded_below"] is not None)
    return Check(name=f"bounds of {table.name}", passed=ok, checked=len(table.values),
                 details={k: v for k, v in meta.items()}, counterexample=None if ok else {"meta": dict(meta)})


@dataclass
class CoboundaryWitness:
    phi: Dict[Index, Scalar]

    def to_json(self) -> List[Dict[str, object]]:
        return [{"index": format_index(idx), "phi": format_scalar(c)} for idx, c in sorted(self.phi.items())]


@dataclass
class CoboundaryVerdict:
    witness: Optional[CoboundaryWitness]
    used_pairs: int
    excluded_pairs: int

    @property
    def is_coboundary(self) -> bool:
        return self.witness is not None

    def to_json(self) -> Dict[str, object]:
        return {"coboundary": self.is_coboundary, "used_pairs": self.used_pairs,
                "excluded_pairs": self.excluded_pairs,
                "witness": None if self.witness is None else self.witness.to_json()}


def _coboundary_system(table: CocycleTable, consts: StructureConstants):
    unknowns: Dict[Index, int] = {}
    rows: List[Dict[int, Scalar]] = []
    keys: List[Tuple[Index, Index]] = []
    excluded = 0
    for a, b in table.pairs():
        terms = consts.terms(a, b)
        if terms is None:
            excluded += 1
            continue
        row: Dict[int, Scalar] = {}
        for h, c in terms:
            col = unknowns.setdefault(h, len(unknowns))
            row[col] = row.get(col, ZERO) + c
        rows.append(row)
        keys.append((a, b))
    return unknowns, rows, keys, excluded


def coboundary_solve(table: CocycleTable, basis: GradedBasis, consts: StructureConstants) -> CoboundaryVerdict:
    """Looks for phi with phi([a, b]) = gamma(a, b) on every covered pair; None certifies there is none."""
    unknowns, rows, keys, excluded = _coboundary_system(table, consts)
    rhs = [table.value(a, b) for a, b in keys]
    solution = linalg.solve(rows, rhs, len(unknowns))
    if solution is None:
        return CoboundaryVerdict(None, len(keys), excluded)
    inverse = {col: idx for idx, col in unknowns.items()}
    phi = {inverse[col]: c for col, c in solution.items() if c}
    return CoboundaryVerdict(CoboundaryWitness(phi), len(keys), excluded)


def coboundary_vectors(tables: Sequence[CocycleTable], consts: StructureConstants):
    """(table vectors, coboundary generators, column count, excluded pairs) over the covered pairs."""
    unknowns, rows, keys, excluded = _coboundary_system(tables[0], consts)
    cols = {k: n for n, k in enumerate(keys)}
    cob: List[Dict[int, Scalar]] = [dict() for _ in unknowns]
    for n, row in enumerate(rows):
        for col, c in row.items():
            if c:
                cob[col][n] = c
    vectors = [{cols[k]: v for k, v in t.values.items() if k in cols} for t in tables]
    return vectors, cob, len(cols), excluded


def rank_of_classes(tables: Sequence[CocycleTable], modulo_coboundaries: bool, basis: GradedBasis,
                    consts: Optional[StructureConstants] = None) -> int:
    """Rank of the value vectors, optionally modulo the coboundaries seen on covered pairs."""
    if not tables:
        return 0
    if not modulo_coboundaries:
        cols = {k: n for n, k in enumerate(tables[0].pairs())}
        vectors = [{cols[k]: v for k, v in t.values.items()} for t in tables]
        return linalg.rank(vectors, len(cols))
    if consts is None:
        raise CocycleError("structure constants are needed to work modulo coboundaries")
    vectors, cob, ncols, _ = coboundary_vectors(tables, consts)
    return linalg.rank(vectors + cob, ncols) - linalg.rank(cob, ncols)


def rank_check(tables: Sequence[CocycleTable], expected: int, basis: GradedBasis, consts: StructureConstants,
               name: str) -> Check:
    rank = rank_of_classes(tables, True, basis, consts)
    return Check(name=name, passed=rank == expected, checked=len(tables),
                 details={"rank": rank, "expected": expected, "tables": [t.name for t in tables]})


__all__ = [
    "Cycle", "CocycleTable", "ResidueTables", "CoboundaryWitness", "CoboundaryVerdict", "Evaluator",
    "evaluate_gamma1", "evaluate_gamma2", "gamma1", "gamma2", "residue_tables", "coboundary_table",
    "combine_tables", "verify_cocycle_identity", "antisymmetry_check", "l_invariance_check", "invariance_defect",
    "basis_triples", "dg_extension_check", "omega_difference_check", "residue_theorem_check",
    "separating_cycle_check", "classify_bounds", "bounds_check", "coboundary_solve", "coboundary_vectors",
    "rank_of_classes", "rank_check",
]
