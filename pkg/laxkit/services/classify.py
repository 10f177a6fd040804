"""Chevalley bases, psi-forms, level relations, normalised cocycles and the local cohomology rank."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..core.config import settings
from ..core.errors import ChevalleyError, CocycleError, WindowError
from ..models import Check
from . import linalg
from .classical import AlgebraSpec, ChevalleyBasis, FiniteAlgebra, Root, build_chevalley, negate
from .cocycles import (CocycleTable, Cycle, coboundary_table, coboundary_vectors, combine_tables, rank_of_classes,
                       residue_tables)
from .connection import ConnectionForm, build_connection_form, covariant_derivative
from .exactmath import ONE, ZERO, Scalar, format_scalar, scalar
from .geometry import GradingPrescription, MarkedConfig
from .grading import GradedBasis, Index, StructureConstants, degree_decompose, format_index, homogeneous_basis, \
    structure_constants
from .laxalgebra import kn_vector_basis

logger = logging.getLogger(__name__)

HALF = ONE / scalar(2)


# ---------------------------------------------------------------------------
# Chevalley bases


def _root_label(r: Root) -> str:
    return "[" + ",".join(str(c) for c in r) + "]"


def _same(a, b) -> bool:
    return linalg.is_zero(a - b)


def chevalley_relations(cb: ChevalleyBasis) -> List[str]:
    """Every failing Chevalley relation, described; empty when the basis is valid."""
    failures: List[str] = []
    bracket = linalg.commutator
    for alpha in cb.positive_roots:
        e, f, h = cb.root_vectors[alpha], cb.root_vectors[negate(alpha)], cb.coroots[alpha]
        if not _same(bracket(e, f), h):
            failures.append(f"[E{_root_label(alpha)}, E-{_root_label(alpha)}] != H{_root_label(alpha)}")
        if not _same(bracket(h, e), e * scalar(2)) or not _same(bracket(h, f), f * scalar(-2)):
            failures.append(f"H{_root_label(alpha)} does not act by +-2 on its root vectors")
    for i, hi in enumerate(cb.cartan):
        for hj in cb.cartan[i + 1:]:
            if not linalg.is_zero(bracket(hi, hj)):
                failures.append(f"Cartan elements H{i + 1} do not commute")
        for beta in cb.roots:
            value = sum(b * cb.cartan_matrix[i][j] for j, b in enumerate(beta))
            e = cb.root_vectors[beta]
            if not _same(bracket(hi, e), e * scalar(value)):
                failures.append(f"[H{i + 1}, E{_root_label(beta)}] != {value} E{_root_label(beta)}")
    for alpha in cb.roots:
        for beta in cb.roots:
            if beta == alpha or beta == negate(alpha):
                continue
            lhs = bracket(cb.root_vectors[alpha], cb.root_vectors[beta])
            total = tuple(a + b for a, b in zip(alpha, beta))
            if total not in cb.root_vectors:
                if not linalg.is_zero(lhs):
                    failures.append(f"[E{_root_label(alpha)}, E{_root_label(beta)}] should vanish")
                continue
            r = 0
            while tuple(b - (r + 1) * a for a, b in zip(alpha, beta)) in cb.root_vectors:
                r += 1
            target = cb.root_vectors[total]
            if not _same(lhs, target * scalar(r + 1)) and not _same(lhs, target * scalar(-(r + 1))):
                failures.append(f"[E{_root_label(alpha)}, E{_root_label(beta)}] != +-{r + 1} E{_root_label(total)}")
    return failures


def chevalley_basis(spec: AlgebraSpec) -> ChevalleyBasis:
    """The Chevalley basis of sl, so or sp, with every structure relation verified exactly."""
    if spec.family in ("gl", "s"):
        raise ChevalleyError(f"{spec.name} has no Chevalley basis; split gl into s and sl first")
    cb = build_chevalley(spec)
    failures = chevalley_relations(cb)
    if failures:
        raise ChevalleyError(f"Chevalley relations fail for {spec.name}: {failures[0]}",
                             context={"failures": failures})
    return cb


@dataclass(frozen=True)
class _ChevalleyIndex:
    """Positions of the Chevalley elements inside the g-basis of a FiniteAlgebra."""

    algebra: FiniteAlgebra

    @property
    def cb(self) -> ChevalleyBasis:
        if self.algebra.chevalley is None:
            raise ChevalleyError(f"{self.algebra.spec.name} has no Chevalley basis")
        return self.algebra.chevalley

    def root(self, r: Root) -> int:
        pos = self.cb.positive_roots
        if r in pos:
            return self.cb.rank + pos.index(r)
        return self.cb.rank + len(pos) + pos.index(negate(r))

    def coroot(self, alpha: Root) -> Dict[int, Scalar]:
        """H^alpha in g-coordinates (a combination of the H^i)."""
        coords = self.algebra.matrix_coordinates(self.cb.coroots[alpha])
        return {u: c for u, c in enumerate(coords) if c}

    def simple(self, i: int) -> Root:
        return self.cb.simple_roots[i]


# ---------------------------------------------------------------------------
# table helpers


def _value(table: CocycleTable, a: Index, b: Index) -> Optional[Scalar]:
    if a not in table._position or b not in table._position:
        return None
    return table.value(a, b)


def _lifted(s: int, m: int, coords: Dict[int, Scalar]) -> Dict[Index, Scalar]:
    return {(m, s, u): c for u, c in coords.items()}


def _bilinear(table: CocycleTable, left: Dict[Index, Scalar], right: Dict[Index, Scalar]) -> Optional[Scalar]:
    acc = ZERO
    for a, x in left.items():
        for b, y in right.items():
            v = _value(table, a, b)
            if v is None:
                return None
            if v:
                acc = acc + x * y * v
    return acc


# ---------------------------------------------------------------------------
# psi-forms


@dataclass
class PsiForm:
    """psi_s(X^u, X^v) = gamma(X^u_{1,s}, X^v_{-1,s}) for every in-point s."""

    labels: Tuple[str, ...]
    forms: List[List[List[Scalar]]]
    killing_constants: Optional[List[Scalar]] = None
    gl_coefficients: Optional[List[Tuple[Scalar, Scalar]]] = None
    relative_values: List[Dict[str, str]] = field(default_factory=list)

    def to_json(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "labels": list(self.labels),
            "forms": [[[format_scalar(x) for x in row] for row in form] for form in self.forms],
        }
        if self.killing_constants is not None:
            out["killing_constants"] = [format_scalar(c) for c in self.killing_constants]
        if self.gl_coefficients is not None:
            out["gl_coefficients"] = [{"trace_form": format_scalar(a), "trace_product": format_scalar(b)}
                                      for a, b in self.gl_coefficients]
        if self.relative_values:
            out["relative_to_first_simple_root"] = self.relative_values
        return out


def psi_forms(table: CocycleTable, basis: GradedBasis) -> PsiForm:
    """Reads and verifies the level-zero forms; raises CocycleError on asymmetry or non-invariance."""
    lo, hi = table.window
    if lo > -1 or hi < 1:
        raise WindowError("psi-forms need degrees -1..1 in the window", needed=-1 if lo > -1 else 1)
    alg = basis.algebra
    N = basis.config.N
    forms: List[List[List[Scalar]]] = []
    for s in range(1, N + 1):
        forms.append([[table.value((1, s, u), (-1, s, v)) for v in range(alg.dim)] for u in range(alg.dim)])

    # cross-point symmetry gamma(X^u_{1,r}, X^v_{-1,s}) = gamma(X^v_{1,s}, X^u_{-1,r})
    for r in range(1, N + 1):
        for s in range(1, N + 1):
            for u in range(alg.dim):
                for v in range(alg.dim):
                    if table.value((1, r, u), (-1, s, v)) != table.value((1, s, v), (-1, r, u)):
                        raise CocycleError(
                            f"psi-form is not symmetric at ({alg.labels[u]}, {alg.labels[v]}), points {r}, {s}",
                            context={"pair": [[1, r, u], [-1, s, v]]})

    structure = alg.structure
    for s, form in enumerate(forms, start=1):
        for a in range(alg.dim):
            for b in range(alg.dim):
                for c in range(alg.dim):
                    left = sum((k * form[w][c] for w, k in structure.get((a, b), ())), ZERO)
                    right = sum((k * form[a][w] for w, k in structure.get((b, c), ())), ZERO)
                    if left != right:
                        raise CocycleError(
                            f"psi-form at point {s} is not invariant on "
                            f"({alg.labels[a]}, {alg.labels[b]}, {alg.labels[c]})")

    psi = PsiForm(tuple(alg.labels), forms)
    spec = alg.spec
    if spec.is_simple:
        killing = alg.killing
        pivot = next((u, v) for u in range(alg.dim) for v in range(alg.dim) if killing[u][v])
        constants = []
        for s, form in enumerate(forms, start=1):
            lam = form[pivot[0]][pivot[1]] / killing[pivot[0]][pivot[1]]
            for u in range(alg.dim):
                for v in range(alg.dim):
                    if form[u][v] != lam * killing[u][v]:
                        raise CocycleError(f"psi-form at point {s} is not proportional to the Killing form")
            constants.append(lam)
        psi.killing_constants = constants
        psi.relative_values = _relative_values(alg, killing)
    elif spec.family in ("gl", "s"):
        gram, traces = alg.trace_gram, alg.traces
        rows = [{0: gram[u][v], 1: traces[u] * traces[v]} for u in range(alg.dim) for v in range(alg.dim)]
        fits = []
        for s, form in enumerate(forms, start=1):
            rhs = [form[u][v] for u in range(alg.dim) for v in range(alg.dim)]
            sol = linalg.solve(rows, rhs, 2)
            if sol is None:
                raise CocycleError(f"psi-form at point {s} is not a combination of tr(XY) and tr X tr Y")
            fits.append((sol.get(0, ZERO), sol.get(1, ZERO)))
        psi.gl_coefficients = fits
    return psi


def _relative_values(alg: FiniteAlgebra, killing) -> List[Dict[str, str]]:
    """kappa(X^u, X^v) / kappa(H^{alpha_1}, H^{alpha_1}) on the Killing-nonzero pairs."""
    index = _ChevalleyIndex(alg)
    h = index.coroot(index.simple(0))
    ref = sum((x * y * killing[u][v] for u, x in h.items() for v, y in h.items()), ZERO)
    if not ref:
        return []
    out = []
    for u in range(alg.dim):
        for v in range(u, alg.dim):
            if killing[u][v]:
                out.append({"pair": f"{alg.labels[u]},{alg.labels[v]}", "value": format_scalar(killing[u][v] / ref)})
    return out


# ---------------------------------------------------------------------------
# level relations


def _level_check(name: str, table: CocycleTable, pairs, predicate) -> Check:
    checked = 0
    for a, b in pairs:
        checked += 1
        bad = predicate(a, b)
        if bad is not None:
            return Check(name=name, passed=False, checked=checked,
                         counterexample={"pair": [format_index(a), format_index(b)], **bad})
    return Check(name=name, passed=True, checked=checked)


def level_recursion_check(table: CocycleTable, basis: GradedBasis, consts: StructureConstants,
                          omega: ConnectionForm, invariance_budget: Optional[int] = None) -> List[Check]:
    """Relations satisfied by bounded L-invariant cocycles, checked exactly inside the window."""
    lo, hi = table.window
    N = basis.config.N
    dim = basis.algebra.dim
    checks: List[Check] = []

    def nonzero(a, b):
        v = table.value(a, b)
        return {"value": format_scalar(v)} if v else None

    checks.append(_level_check("values above level zero vanish", table,
                               ((a, b) for a, b in table.pairs() if a[0] + b[0] > 0), nonzero))
    checks.append(_level_check("degree-zero pairs vanish", table,
                               ((a, b) for a, b in table.pairs() if a[0] == 0 and b[0] == 0), nonzero))
    checks.append(_level_check("cross-point level-zero values vanish", table,
                               ((a, b) for a, b in table.pairs() if a[0] + b[0] == 0 and a[1] != b[1]), nonzero))

    top = min(hi, -lo)

    def scaled(a, b):
        n, r, u = a
        expected = table.value((1, r, u), (-1, r, b[2])) * scalar(n)
        got = table.value(a, b)
        if got != expected:
            return {"value": format_scalar(got), "expected": format_scalar(expected)}
        return None

    if top >= 1:
        scaling_pairs = [((n, r, u), (-n, r, v)) for n in range(-top, top + 1) for r in range(1, N + 1)
                         for u in range(dim) for v in range(dim)]
        checks.append(_level_check("level-zero values scale with the degree", table, scaling_pairs, scaled))

        def symmetric(a, b):
            mirrored = table.value((1, b[1], b[2]), (-1, a[1], a[2]))
            if table.value(a, b) != mirrored:
                return {"value": format_scalar(table.value(a, b)), "mirrored": format_scalar(mirrored)}
            return None

        sym_pairs = [((1, r, u), (-1, s, v)) for r in range(1, N + 1) for s in range(1, N + 1)
                     for u in range(dim) for v in range(dim)]
        checks.append(_level_check("level-zero symmetry", table, sym_pairs, symmetric))

    checks.append(_invariance_relation(table, basis, omega, invariance_budget))
    return checks


def _invariance_relation(table: CocycleTable, basis: GradedBasis, omega: ConnectionForm,
                         budget: Optional[int]) -> Check:
    """gamma(nabla_e X_a, X_b) + gamma(X_a, nabla_e X_b) = 0 with nabla_e decomposed in the graded basis."""
    name = "invariance under the vector-field basis"
    config = basis.config
    budget = settings.SAMPLE_BUDGET * 10 if budget is None else budget
    indices = table.indices
    cache: Dict[Tuple[int, int, Index], Optional[Dict[Index, Scalar]]] = {}

    def image(k: int, p: int, e, idx: Index) -> Optional[Dict[Index, Scalar]]:
        key = (k, p, idx)
        if key not in cache:
            try:
                cache[key] = degree_decompose(covariant_derivative(omega, e, basis.element(idx)), basis).coefficients
            except WindowError:
                cache[key] = None
        return cache[key]

    checked = skipped = 0
    for k in (-1, 0, 1):
        for p in range(1, config.N + 1):
            e = kn_vector_basis(k, p, config, basis.prescription)
            for i, a in enumerate(indices):
                for b in indices[i + 1:]:
                    if a[0] + b[0] + k not in (-1, 0):
                        continue
                    if checked >= budget:
                        return Check(name=name, passed=True, checked=checked, skipped=skipped)
                    ea, eb = image(k, p, e, a), image(k, p, e, b)
                    if ea is None or eb is None:
                        skipped += 1
                        continue
                    left = _bilinear(table, ea, {b: ONE})
                    right = _bilinear(table, {a: ONE}, eb)
                    if left is None or right is None:
                        skipped += 1
                        continue
                    checked += 1
                    if left + right:
                        return Check(name=name, passed=False, checked=checked, skipped=skipped,
                                     counterexample={"e": [k, p], "pair": [format_index(a), format_index(b)],
                                                     "value": format_scalar(left + right)})
    return Check(name=name, passed=True, checked=checked, skipped=skipped)


# ---------------------------------------------------------------------------
# normalisation


@dataclass
class NormalizationMap:
    """Phi on the window basis; Phi vanishes at degrees >= cutoff."""

    phi_values: Dict[Index, Scalar]
    cutoff: int

    def __call__(self, coefficients: Dict[Index, Scalar]) -> Scalar:
        acc = ZERO
        for idx, c in coefficients.items():
            if not c or idx[0] >= self.cutoff:
                continue
            v = self.phi_values.get(idx)
            if v is None:
                raise CocycleError(f"Phi is not defined at {list(idx)}")
            if v:
                acc = acc + c * v
        return acc

    def to_json(self) -> Dict[str, object]:
        return {"cutoff": self.cutoff,
                "phi": [{"index": format_index(idx), "value": format_scalar(v)}
                        for idx, v in sorted(self.phi_values.items()) if v]}


def _bracket_terms(consts: StructureConstants, left: Dict[Index, Scalar], right: Index,
                   where: str) -> Dict[Index, Scalar]:
    out: Dict[Index, Scalar] = {}
    for a, x in left.items():
        terms = consts.terms(a, right)
        if terms is None:
            raise WindowError(f"bracket for {where} does not decompose inside the window", needed=right[0],
                              context={"slot": where})
        for h, c in terms:
            out[h] = out.get(h, ZERO) + x * c
    return out


def normalize_cocycle(table: CocycleTable, basis: GradedBasis, consts: StructureConstants,
                      cutoff: int) -> Tuple[NormalizationMap, CocycleTable, List[Check]]:
    """Builds Phi by descending induction and returns (Phi, gamma - delta Phi, checks on the result)."""
    lo, hi = table.window
    if cutoff > hi + 1:
        raise WindowError(f"cutoff {cutoff} lies above the window; it must not exceed {hi + 1}", needed=cutoff - 1)
    above = [(a, b) for (a, b), v in table.values.items() if v and a[0] + b[0] >= cutoff]
    if above:
        a, b = above[0]
        raise CocycleError(f"the table has values at level {a[0] + b[0]}, at or above the cutoff {cutoff}",
                           context={"pair": [format_index(a), format_index(b)]})
    index = _ChevalleyIndex(basis.algebra)
    cb = index.cb
    N = basis.config.N
    phi: Dict[Index, Scalar] = {idx: ZERO for idx in table.indices if idx[0] >= cutoff}
    nmap = NormalizationMap(phi, cutoff)

    def lifted_value(left: Dict[Index, Scalar], right: Index, slot: str) -> Scalar:
        v = _bilinear(table, left, {right: ONE})
        if v is None:
            raise WindowError(f"value for {slot} lies outside the table", needed=right[0])
        return v

    def remainder_phi(remainder: Dict[Index, Scalar], n: int, slot: str) -> Scalar:
        leftover = {idx: c for idx, c in remainder.items() if c and idx[0] <= n}
        if leftover:
            raise CocycleError(f"remainder for {slot} has terms at degree <= {n}",
                               context={"terms": [format_index(i) for i in leftover]})
        return nmap(remainder)

    for n in range(min(cutoff, hi + 1) - 1, lo - 1, -1):
        for s in range(1, N + 1):
            for alpha in cb.positive_roots:
                h0 = _lifted(s, 0, index.coroot(alpha))
                for sign, root in ((1, alpha), (-1, negate(alpha))):
                    e_n = (n, s, index.root(root))
                    slot = f"E{_root_label(root)}_({n},{s})"
                    half = HALF if sign > 0 else -HALF
                    remainder = {e_n: ONE}
                    for h, c in _bracket_terms(consts, h0, e_n, slot).items():
                        remainder[h] = remainder.get(h, ZERO) - half * c
                    phi[e_n] = half * lifted_value(h0, e_n, slot) + remainder_phi(remainder, n, slot)
            for i in range(cb.rank):
                a_i = index.simple(i)
                e0 = {(0, s, index.root(a_i)): ONE}
                f_n = (n, s, index.root(negate(a_i)))
                h_n = (n, s, i)
                slot = f"H{i + 1}_({n},{s})"
                remainder = {h_n: ONE}
                for h, c in _bracket_terms(consts, e0, f_n, slot).items():
                    remainder[h] = remainder.get(h, ZERO) - c
                phi[h_n] = lifted_value(e0, f_n, slot) + remainder_phi(remainder, n, slot)

    delta = coboundary_table(phi, basis, consts, "delta Phi")
    covered = {(a, b) for a, b in table.pairs() if consts.terms(a, b) is not None}
    normalized = (table - delta).restricted(lambda a, b: (a, b) in covered)
    normalized.name = f"normalized {table.name}"
    normalized.meta = {"cutoff": cutoff, "uncovered_pairs": sum(1 for _ in table.pairs()) - len(covered)}
    positive = [(a, b) for (a, b), v in normalized.values.items() if v and a[0] + b[0] > 0]
    checks = [
        Check(name="normalised values above level zero vanish", passed=not positive, checked=len(normalized.values),
              counterexample=None if not positive else {"pair": [format_index(positive[0][0]),
                                                                 format_index(positive[0][1])]}),
        _normalization_conditions(normalized, index, N),
        _h_pair_relations(normalized, index, N),
    ]
    logger.info("normalised %s with cutoff %d", table.name, cutoff)
    return nmap, normalized, checks


def _normalization_conditions(table: CocycleTable, index: _ChevalleyIndex, N: int) -> Check:
    """gamma(H^alpha_{0,s}, E^{+-alpha}_{n,s}) = 0 and gamma(E^{alpha_i}_{0,s}, E^{-alpha_i}_{n,s}) = 0."""
    lo, hi = table.window
    cb = index.cb
    checked = skipped = 0
    for n in range(lo, hi + 1):
        for s in range(1, N + 1):
            slots = []
            for alpha in cb.positive_roots:
                h0 = _lifted(s, 0, index.coroot(alpha))
                for root in (alpha, negate(alpha)):
                    slots.append((h0, (n, s, index.root(root)), f"H{_root_label(alpha)}, E{_root_label(root)}"))
            for i in range(cb.rank):
                a_i = index.simple(i)
                slots.append(({(0, s, index.root(a_i)): ONE}, (n, s, index.root(negate(a_i))), f"simple root {i + 1}"))
            for left, right, label in slots:
                v = _bilinear(table, left, {right: ONE})
                if v is None:
                    skipped += 1
                    continue
                checked += 1
                if v:
                    return Check(name="normalisation conditions", passed=False, checked=checked, skipped=skipped,
                                 counterexample={"slot": label, "n": n, "s": s, "value": format_scalar(v)})
    return Check(name="normalisation conditions", passed=True, checked=checked, skipped=skipped)


def _h_pair_relations(table: CocycleTable, index: _ChevalleyIndex, N: int) -> Check:
    """gamma(H_{n,s}, H_{-n,r}) = n gamma(H_{1,s}, H_{-1,s}) delta_rs and gamma(H_{0,r}, H_{0,s}) = 0 for H = H^{alpha_1}."""
    lo, hi = table.window
    top = min(hi, -lo)
    h = index.coroot(index.simple(0))
    checked = 0
    base = {}
    for s in range(1, N + 1):
        base[s] = _bilinear(table, _lifted(s, 1, h), _lifted(s, -1, h)) if top >= 1 else None
    for n in range(0, top + 1):
        for s in range(1, N + 1):
            for r in range(1, N + 1):
                v = _bilinear(table, _lifted(s, n, h), _lifted(r, -n, h))
                if v is None:
                    continue
                expected = base[s] * scalar(n) if (r == s and n and base[s] is not None) else ZERO
                checked += 1
                if v != expected:
                    return Check(name="H-pair relations of the first simple root", passed=False, checked=checked,
                                 counterexample={"n": n, "s": s, "r": r, "value": format_scalar(v),
                                                 "expected": format_scalar(expected)})
    values = {str(s): format_scalar(v) for s, v in base.items() if v is not None}
    return Check(name="H-pair relations of the first simple root", passed=True, checked=checked,
                 details={"level_zero_values": values})


# ---------------------------------------------------------------------------
# local cohomology rank


@dataclass
class LocalSpaceVerdict:
    window: Tuple[int, int]
    verdict: str
    bounded_rank: Optional[int] = None
    local_rank: Optional[int] = None
    expected_bounded: Optional[int] = None
    expected_local: Optional[int] = None
    witnesses: List[Dict[str, str]] = field(default_factory=list)
    separating_in_span: Optional[bool] = None
    excluded_pairs: int = 0
    needed_window: Optional[Tuple[int, int]] = None

    def checks(self) -> List[Check]:
        if self.bounded_rank is None:
            return [Check(name="local cohomology rank", passed=True, skipped=1,
                          details={"verdict": self.verdict, "needed_window": list(self.needed_window or ())})]
        return [
            Check(name="rank of the bounded family", passed=self.bounded_rank == self.expected_bounded, checked=1,
                  details={"rank": self.bounded_rank, "expected": self.expected_bounded}),
            Check(name="rank of the local subfamily", passed=self.local_rank == self.expected_local, checked=1,
                  details={"rank": self.local_rank, "expected": self.expected_local}),
            Check(name="separating cycle spans the local subfamily", passed=bool(self.separating_in_span),
                  checked=1, details={"witnesses": self.witnesses}),
        ]

    def to_json(self) -> Dict[str, object]:
        return {
            "window": list(self.window), "verdict": self.verdict, "bounded_rank": self.bounded_rank,
            "local_rank": self.local_rank, "expected_bounded": self.expected_bounded,
            "expected_local": self.expected_local, "witnesses": self.witnesses,
            "separating_in_span": self.separating_in_span, "excluded_pairs": self.excluded_pairs,
            "needed_window": None if self.needed_window is None else list(self.needed_window),
        }


def local_space_dimension(config: MarkedConfig, omega: Optional[ConnectionForm] = None,
                          window: Optional[Tuple[int, int]] = None,
                          prescription: Optional[GradingPrescription] = None,
                          basis: Optional[GradedBasis] = None, consts: Optional[StructureConstants] = None,
                          jobs: Optional[int] = None) -> LocalSpaceVerdict:
    """Ranks of the bounded (in-point) and local (in- and out-point) cocycle families modulo coboundaries."""
    window = window or (basis.window if basis is not None else settings.window)
    lo, hi = window
    if lo > -1 or hi < 1:
        return LocalSpaceVerdict(window, "inconclusive within window", needed_window=(min(lo, -1), max(hi, 1)))
    omega = omega or build_connection_form(config)
    basis = basis or homogeneous_basis(window, config, prescription, jobs=jobs)
    consts = consts or structure_constants(basis, jobs)
    with_gamma2 = config.algebra.family == "gl"

    kinds = [residue_tables(basis, "gamma1", omega, jobs=jobs)]
    if with_gamma2:
        kinds.append(residue_tables(basis, "gamma2", jobs=jobs))
    in_family = [rt.table(Cycle.around_in(config, i)) for rt in kinds for i in range(1, config.N + 1)]
    out_family = [rt.table(Cycle.around_out(config, j)) for rt in kinds for j in range(1, config.M + 1)]
    separating = [rt.table(Cycle.separating(config)) for rt in kinds]

    rank_in = rank_of_classes(in_family, True, basis, consts)
    rank_out = rank_of_classes(out_family, True, basis, consts)
    rank_all = rank_of_classes(in_family + out_family, True, basis, consts)
    local_rank = rank_in + rank_out - rank_all

    vectors, cob, ncols, excluded = coboundary_vectors(in_family + out_family, consts)
    columns = vectors + cob
    rows = [{k: col[c] for k, col in enumerate(columns) if c in col} for c in range(ncols)]
    kernel = linalg.kernel(rows, len(columns))
    restricted = [{k: v for k, v in vec.items() if k < len(in_family)} for vec in kernel]
    reduced, _ = linalg.rref([r for r in restricted if r], len(in_family))
    witnesses = [{in_family[k].name: format_scalar(v) for k, v in sorted(vec.items())} for vec in reduced]
    local_tables = [combine_tables(in_family, [vec.get(k, ZERO) for k in range(len(in_family))], "local")
                    for vec in reduced]
    in_span = (rank_of_classes(local_tables + separating, True, basis, consts)
               == rank_of_classes(local_tables, True, basis, consts)) if local_tables else False

    per_kind = 2 if with_gamma2 else 1
    verdict = LocalSpaceVerdict(
        window=window, verdict="certified within window", bounded_rank=rank_in, local_rank=local_rank,
        expected_bounded=per_kind * config.N, expected_local=per_kind, witnesses=witnesses,
        separating_in_span=in_span, excluded_pairs=excluded,
    )
    logger.info("local space: bounded rank %d, local rank %d", rank_in, local_rank)
    return verdict


__all__ = [
    "chevalley_basis", "chevalley_relations", "PsiForm", "psi_forms", "level_recursion_check", "NormalizationMap",
    "normalize_cocycle", "LocalSpaceVerdict", "local_space_dimension",
]
