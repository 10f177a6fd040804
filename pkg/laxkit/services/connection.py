"""Connection forms omega = W dz, the covariant derivative and the semidirect algebras D^1 and D_g."""
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..core.config import settings
from ..core.errors import ConnectionFormError, LaxkitError
from ..models import Check
from .classical import connection_algebra
from .exactmath import ZERO, ZERO_RF, RationalFunction, coefficient, format_point, format_rf, ord_at, scalar
from .geometry import ConstraintSystem, Divisor, MarkedConfig, particular_section
from .grading import GradedBasis, degree_decompose, format_index
from .laxalgebra import LaxElement, VectorField, gl_split, is_member, kn_function_basis, kn_vector_basis, \
    matrix_conditions, tyurin_conditions
from .sampling import random_function, random_member, random_vector_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConnectionForm:
    """omega = W dz; W is gl-valued for gl, sl and s and g-valued for so and sp."""

    matrix: LaxElement
    o_pole_budget: int = 0

    @property
    def config(self) -> MarkedConfig:
        return self.matrix.config

    @property
    def is_zero(self) -> bool:
        return self.matrix.is_zero

    def coordinates(self) -> List[RationalFunction]:
        return connection_algebra(self.config.algebra).coordinates(self.matrix.flat())

    def is_holomorphic_at(self, points: Sequence) -> bool:
        return all(ord_at(x, p) >= 0 for x in self.matrix.flat() for p in points if not p.is_infinite) and all(
            ord_at(x, p) >= 2 for x in self.matrix.flat() for p in points if p.is_infinite)

    def violations(self) -> List[str]:
        """Jet conditions at the weak singularities that fail (empty for a valid form)."""
        out = []
        flat = self.matrix.flat()
        for t in self.config.active_tyurin:
            if any(ord_at(x, t.gamma) < -1 for x in flat):
                out.append(f"pole order above 1 at {format_point(t.gamma)}")
                continue
            jets = {k: [coefficient(x, t.gamma, k) for x in flat] for k in (-1, 0, 1)}
            for cond in matrix_conditions(self.config.algebra, t.alpha, connection=True):
                value = sum((v * jets[cond.order][k] for k, v in cond.functional), ZERO)
                if value != cond.value:
                    out.append(f"{cond.label} at {format_point(t.gamma)}")
        return out

    def to_json(self) -> Dict[str, object]:
        return {"matrix": self.matrix.to_json(), "marker": "dz", "o_pole_budget": self.o_pole_budget}


def build_connection_form(config: MarkedConfig, budget: Optional[int] = None) -> ConnectionForm:
    """Solves for omega with the smallest uniform pole order allowed at the out-points."""
    if not config.active_tyurin:
        return ConnectionForm(LaxElement.zero(config), 0)
    alg = connection_algebra(config.algebra)
    conditions = tyurin_conditions(config, alg, connection=True)
    cap = settings.CONNECTION_BUDGET if budget is None else budget
    for b in range(cap + 1):
        parts = {t.gamma: 1 for t in config.active_tyurin}
        for q in config.out_points:
            parts[q] = b
        # weight 1: the ansatz is for W of the one-form W dz
        system = ConstraintSystem(Divisor.from_map(parts), conditions, weight=1)
        solution = particular_section(system, alg.dim)
        if solution is None:
            continue
        matrix = LaxElement.from_coordinates(config, solution, alg)
        omega = ConnectionForm(matrix, b)
        problems = omega.violations()
        if problems:
            raise ConnectionFormError(f"constructed connection form fails its own conditions: {problems[0]}")
        logger.info("connection form found with out-point pole budget %d", b)
        return omega
    raise ConnectionFormError(f"no connection form within out-point pole budget {cap}", context={"budget": cap})


def perturb_connection(omega: ConnectionForm, L: LaxElement) -> ConnectionForm:
    """omega + L dz; stays a connection form when L is a member holomorphic at the in-points."""
    if any(ord_at(x, p) < 0 for x in L.flat() for p in omega.config.in_points):
        raise ConnectionFormError("the perturbation must be holomorphic at the in-points")
    return ConnectionForm(omega.matrix + L, omega.o_pole_budget)


def covariant_derivative(omega: ConnectionForm, e: VectorField, L: LaxElement) -> LaxElement:
    """nabla_e L = e (dL/dz + [W, L])."""
    inner = L.derivative() + omega.matrix.bracket(L)
    return inner.scale(e.coefficient)


# ---------------------------------------------------------------------------
# D^1 = A + L and D_g = g + L


@dataclass(frozen=True)
class D1Element:
    function: RationalFunction
    field: VectorField


def d1_bracket(x: D1Element, y: D1Element) -> D1Element:
    """[(g, e), (h, f)] = (e.h - f.g, [e, f])."""
    return D1Element(x.field.act(y.function) - y.field.act(x.function), x.field.bracket(y.field))


@dataclass(frozen=True)
class DgElement:
    current: LaxElement
    field: VectorField

    def __add__(self, other: "DgElement") -> "DgElement":
        return DgElement(self.current + other.current, self.field + other.field)

    def to_json(self) -> Dict[str, object]:
        return {"current": self.current.to_json(), "field": self.field.to_json()}


def dg_bracket(x: DgElement, y: DgElement, omega: ConnectionForm) -> DgElement:
    """([L, L'] + nabla_e L' - nabla_f L, [e, f])."""
    current = (x.current.bracket(y.current)
               + covariant_derivative(omega, x.field, y.current)
               - covariant_derivative(omega, y.field, x.current))
    return DgElement(current, x.field.bracket(y.field))


def _dg_jacobi(a: DgElement, b: DgElement, c: DgElement, omega: ConnectionForm) -> DgElement:
    return (dg_bracket(dg_bracket(a, b, omega), c, omega)
            + dg_bracket(dg_bracket(b, c, omega), a, omega)
            + dg_bracket(dg_bracket(c, a, omega), b, omega))


# ---------------------------------------------------------------------------
# verification


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.skipped = 0
        self.counterexample: Optional[Dict[str, object]] = None
        self.details: Dict[str, object] = {}

    def record(self, ok: bool, witness) -> None:
        self.checked += 1
        if not ok and self.counterexample is None:
            self.counterexample = witness() if callable(witness) else witness

    def result(self) -> Check:
        return Check(name=self.name, passed=self.counterexample is None, checked=self.checked,
                     skipped=self.skipped, details=self.details, counterexample=self.counterexample)


def verify_module_axioms(basis: GradedBasis, omega: ConnectionForm, sample_budget: Optional[int] = None,
                         seed: Optional[int] = None) -> List[Check]:
    """Exact checks of the module and derivation identities of nabla on sampled elements."""
    config = basis.config
    budget = settings.SAMPLE_BUDGET if sample_budget is None else sample_budget
    rng = random.Random(settings.SEED if seed is None else seed)

    def nabla(e, L):
        return covariant_derivative(omega, e, L)

    a_module = _Tally("nabla_e(g L) = (e.g) L + g nabla_e L")
    flat = _Tally("nabla_(g e) = g nabla_e")
    curvature = _Tally("nabla_[e,f] = [nabla_e, nabla_f]")
    derivation = _Tally("nabla_e [L, L'] = [nabla_e L, L'] + [L, nabla_e L']")
    closure = _Tally("nabla_e L is a member")
    jacobi_d1 = _Tally("Jacobi identity in D^1")
    jacobi_dg = _Tally("Jacobi identity in D_g")
    checks = [a_module, flat, curvature, derivation, closure, jacobi_d1, jacobi_dg]

    for _ in range(budget):
        L, L2 = random_member(config, rng), random_member(config, rng)
        e, f = random_vector_field(config, rng), random_vector_field(config, rng)
        g, h = random_function(config, rng), random_function(config, rng)

        lhs = nabla(e, L.scale(g))
        rhs = L.scale(e.act(g)) + nabla(e, L).scale(g)
        a_module.record(lhs == rhs, lambda: {"L": L.to_json(), "g": format_rf(g), "e": e.to_json()})
        flat.record(nabla(e.scaled(g), L) == nabla(e, L).scale(g), lambda: {"L": L.to_json(), "g": format_rf(g)})
        commutator = nabla(e, nabla(f, L)) - nabla(f, nabla(e, L))
        curvature.record(nabla(e.bracket(f), L) == commutator, lambda: {"L": L.to_json(), "e": e.to_json()})
        derivation.record(nabla(e, L.bracket(L2)) == nabla(e, L).bracket(L2) + L.bracket(nabla(e, L2)),
                          lambda: {"L": L.to_json(), "L2": L2.to_json(), "e": e.to_json()})
        derived = nabla(e, L)
        verdict = is_member(derived)
        closure.record(bool(verdict), lambda: {"L": L.to_json(), "e": e.to_json(), "condition": verdict.condition})

        x, y, z = D1Element(g, e), D1Element(h, f), D1Element(random_function(config, rng), random_vector_field(config, rng))
        jac = [d1_bracket(d1_bracket(x, y), z), d1_bracket(d1_bracket(y, z), x), d1_bracket(d1_bracket(z, x), y)]
        total_fn = jac[0].function + jac[1].function + jac[2].function
        total_vf = jac[0].field + jac[1].field + jac[2].field
        jacobi_d1.record(total_fn.is_zero and total_vf.is_zero, lambda: {"g": format_rf(g), "e": e.to_json()})

        p, q, r = DgElement(L, e), DgElement(L2, f), DgElement(random_member(config, rng), VectorField(ZERO_RF))
        total = _dg_jacobi(p, q, r, omega)
        jacobi_dg.record(total.current.is_zero and total.field.is_zero, lambda: {"L": L.to_json(), "e": e.to_json()})

    if config.algebra.family == "gl":
        split = _Tally("scalar and trace-free parts are preserved by nabla")
        for _ in range(budget):
            L = random_member(config, rng)
            e = random_vector_field(config, rng)
            scalar_part, sl_part = gl_split(L)
            derived_scalar, derived_sl = gl_split(nabla(e, L))
            ok = (derived_scalar.entries == scalar_part.derivative().scale(e.coefficient).entries
                  and derived_sl.entries == nabla(e, LaxElement(sl_part.entries, config)).entries)
            split.record(ok, lambda: {"L": L.to_json(), "e": e.to_json()})
        checks.append(split)

    checks.extend(_fine_structure_checks(basis, omega, budget))
    return [c.result() for c in checks]


def _fine_structure_checks(basis: GradedBasis, omega: ConnectionForm, budget: int) -> List[_Tally]:
    """A_{k,s} X_{m,r} and nabla_{e_{k,s}} X_{m,r} against their leading terms, and the L-action bound."""
    config = basis.config
    lo, hi = basis.window
    a_fine = _Tally("A_(k,s) X_(m,r) = X_(k+m,s) delta_rs + higher")
    e_fine = _Tally("nabla_(e_(k,s)) X_(m,r) = m X_(k+m,s) delta_rs + higher")
    spread = 0
    ks = [k for k in (-1, 0, 1) if lo <= k <= hi]
    ms = range(max(lo, -2), min(hi, 2) + 1)
    for k in ks:
        for s in range(1, config.N + 1):
            A = kn_function_basis(k, s, config, basis.prescription)
            e = kn_vector_basis(k, s, config, basis.prescription)
            for m in ms:
                if not lo <= k + m <= hi:
                    continue
                for r in range(1, config.N + 1):
                    if a_fine.checked >= budget:
                        break
                    for u in range(basis.algebra.dim):
                        idx = (m, r, u)
                        X = basis.element(idx)
                        for tally, image, factor in ((a_fine, X.scale(A), 1), (e_fine, covariant_derivative(omega, e, X), m)):
                            try:
                                dec = degree_decompose(image, basis)
                            except LaxkitError:
                                tally.skipped += 1
                                continue
                            level = k + m
                            expected = {(level, s, u): scalar(factor)} if r == s and factor else {}
                            got = {i: c for i, c in dec.coefficients.items() if i[0] <= level}
                            tally.record(got == expected, {"k": k, "s": s, "index": format_index(idx)})
                            if tally is e_fine and dec.coefficients:
                                spread = max(spread, max(i[0] for i in dec.coefficients) - level)
    e_fine.details = {"observed_action_bound": spread}
    return [a_fine, e_fine]


def connection_check(omega: ConnectionForm) -> Check:
    problems = omega.violations()
    holo = omega.is_holomorphic_at(omega.config.in_points)
    return Check(name="connection form conditions", passed=not problems and holo, checked=1,
                 details={"o_pole_budget": omega.o_pole_budget, "holomorphic_at_in_points": holo},
                 counterexample={"violations": problems} if problems else None)


__all__ = [
    "ConnectionForm", "DgElement", "D1Element", "build_connection_form", "perturb_connection",
    "covariant_derivative", "dg_bracket", "d1_bracket", "verify_module_axioms", "connection_check",
]
