"""
Command handlers behind the CLI.

Each handler takes a RunContext and returns its checks, artifacts and summary; `run_command`
wraps them into a Report.
"""
import itertools
import logging
import random
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..core.config import settings
from ..core.errors import CocycleError, ConfigError, LaxkitError, WindowError
from ..models import Check, RunConfig, build_marked_config
from ..services.classify import (chevalley_basis, level_recursion_check, local_space_dimension, normalize_cocycle,
                                 psi_forms)
from ..services.cocycles import (Cycle, antisymmetry_check, basis_triples, bounds_check, classify_bounds,
                                 dg_extension_check, gamma1, gamma2, l_invariance_check, omega_difference_check,
                                 residue_tables, residue_theorem_check, separating_cycle_check,
                                 verify_cocycle_identity)
from ..services.connection import (ConnectionForm, build_connection_form, connection_check, perturb_connection,
                                   verify_module_axioms)
from ..services.exactmath import format_rf
from ..services.geometry import GradingPrescription, MarkedConfig
from ..services.grading import (GradedBasis, StructureConstants, almost_grading_check, dimension_check,
                                filtration_check, homogeneous_basis, structure_constants)
from ..services.laxalgebra import (is_member, kn_adjustments, kn_function_basis, kn_vector_basis, lax_bracket,
                                   lax_product, product_identities)
from ..services.sampling import member_divisor, random_member, random_vector_field
from .report import Report, inputs_hash

logger = logging.getLogger(__name__)

COMMANDS = ("basis", "structconst", "cocycle", "verify", "classify")


@dataclass
class RunContext:
    run: RunConfig
    config: MarkedConfig
    prescription: GradingPrescription
    window: Tuple[int, int]
    seed: int
    jobs: int
    sample_budget: int

    @classmethod
    def create(cls, run: RunConfig, window: Optional[Tuple[int, int]] = None, seed: Optional[int] = None,
               jobs: Optional[int] = None) -> "RunContext":
        config, prescription = build_marked_config(run)
        if window is None:
            window = settings.window if run.window is None else _window(run.window)
        seed = seed if seed is not None else (run.seed if run.seed is not None else settings.SEED)
        budget = run.sample_budget or settings.SAMPLE_BUDGET
        if jobs is None:
            jobs = settings.JOBS
            if jobs < 1:
                raise ConfigError("must be at least 1", field_path=("LAXKIT_JOBS",))
        return cls(run, config, prescription, window, seed, jobs, budget)

    def rng(self, salt: str) -> random.Random:
        # string seeds hash deterministically, so every suite draws the same samples on every run
        return random.Random(f"{self.seed}:{salt}")

    @cached_property
    def basis(self) -> GradedBasis:
        return homogeneous_basis(self.window, self.config, self.prescription, jobs=self.jobs)

    @cached_property
    def consts(self) -> StructureConstants:
        return structure_constants(self.basis, self.jobs)

    @cached_property
    def omega(self) -> ConnectionForm:
        return build_connection_form(self.config)

    @cached_property
    def tables(self):
        kinds = {"gamma1": residue_tables(self.basis, "gamma1", self.omega, jobs=self.jobs)}
        if self.config.algebra.family in ("gl", "s"):
            kinds["gamma2"] = residue_tables(self.basis, "gamma2", jobs=self.jobs)
        return kinds

    def cycles(self) -> List[Cycle]:
        if self.run.cycles:
            return [Cycle.parse(self.config, name) for name in self.run.cycles]
        return ([Cycle.around_in(self.config, i) for i in range(1, self.config.N + 1)]
                + [Cycle.around_out(self.config, j) for j in range(1, self.config.M + 1)]
                + [Cycle.separating(self.config)])


def _window(text: str) -> Tuple[int, int]:
    from ..core.config import parse_window

    try:
        return parse_window(text)
    except ValueError as exc:
        raise ConfigError(str(exc), field_path=("window",)) from exc


@dataclass
class Outcome:
    checks: List[Check] = field(default_factory=list)
    artifacts: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    adjustments: List[Dict[str, Any]] = field(default_factory=list)


def _file_label(cycle: Cycle) -> str:
    return cycle.label.replace("*", "star").replace("@", "at_")


# ---------------------------------------------------------------------------
# handlers


def _handle_basis(ctx: RunContext) -> Outcome:
    basis = ctx.basis
    config = ctx.config
    lo, hi = ctx.window
    rng = ctx.rng("filtration")
    members = []
    for m in sorted({lo, 0, hi} & set(range(lo, hi + 1))):
        for _ in range(2):
            members.append((m, random_member(config, rng, divisor=member_divisor(config, order_at_in=m))))
    checks = [dimension_check(basis), filtration_check(basis, members)]

    functions, fields, adjustments = [], [], list(basis.adjustments)
    for m in range(lo, hi + 1):
        adjustments.extend(kn_adjustments(m, config, ctx.prescription))
        for s in range(1, config.N + 1):
            functions.append({"m": m, "s": s, "function": format_rf(kn_function_basis(m, s, config, ctx.prescription))})
            fields.append({"m": m, "s": s, "field": kn_vector_basis(m, s, config, ctx.prescription).to_json()})
    artifacts = {
        "basis.json": {"config": config.to_json(), "prescription": ctx.prescription.to_json(), **basis.to_json()},
        "kn_bases.json": {"functions": functions, "vector_fields": fields},
    }
    summary = {"dimensions": {str(m): d for m, d in sorted(basis.dimensions.items())},
               "expected_dimension": basis.expected_dimension}
    return Outcome(checks, artifacts, summary, adjustments)


def _handle_structconst(ctx: RunContext) -> Outcome:
    consts = ctx.consts
    expected = ctx.prescription.expected_S()
    checks = [almost_grading_check(consts, expected)]
    summary = {"observed_S": consts.observed_S, "expected_S": expected, "excluded_pairs": consts.excluded}
    return Outcome(checks, {"structconst.json": consts.to_json()}, summary, list(ctx.basis.adjustments))


def _handle_cocycle(ctx: RunContext) -> Outcome:
    config, omega = ctx.config, ctx.omega
    holomorphic = omega.is_holomorphic_at(config.in_points)
    out = Outcome(adjustments=list(ctx.basis.adjustments))
    out.artifacts["connection.json"] = omega.to_json()
    for kind, rt in ctx.tables.items():
        out.checks.append(separating_cycle_check(rt))
        for cycle in ctx.cycles():
            table = rt.table(cycle)
            if cycle.label.startswith("C*"):
                check = bounds_check(table, expect_below=True)
            elif cycle.label == "CS":
                check = bounds_check(table, expect_upper_zero=True, expect_local=True)
            elif cycle.label.startswith("C") and cycle.label[1:].isdigit():
                check = bounds_check(table, expect_upper_zero=kind == "gamma2" or holomorphic)
            else:
                classify_bounds(table)
                check = None
            if check is not None:
                out.checks.append(check)
            out.artifacts[f"cocycle_{kind}_{_file_label(cycle)}.json"] = table.to_json()
            out.summary[table.name] = table.meta.get("verdict")
    return out


def _closure_checks(ctx: RunContext) -> List[Check]:
    config = ctx.config
    rng = ctx.rng("closure")
    bracket_failure = product_failure = identity_failure = None
    products = identities = 0
    family = config.algebra.family
    for _ in range(ctx.sample_budget):
        L, L2 = random_member(config, rng), random_member(config, rng)
        verdict = is_member(lax_bracket(L, L2))
        if not verdict and bracket_failure is None:
            bracket_failure = {"L": L.to_json(), "L2": L2.to_json(), "condition": verdict.condition}
        if family in ("gl", "s"):
            products += 1
            verdict = is_member(lax_product(L, L2))
            if not verdict and product_failure is None:
                product_failure = {"L": L.to_json(), "L2": L2.to_json(), "condition": verdict.condition}
            for t in config.active_tyurin:
                identities += 1
                result = product_identities(L, L2, t)
                if not (result.double_pole_vanishes and result.kappa_law) and identity_failure is None:
                    identity_failure = {"L": L.to_json(), "L2": L2.to_json(), "double_pole": result.double_pole_vanishes,
                                        "kappa_law": result.kappa_law}
    checks = [Check(name="brackets of members are members", passed=bracket_failure is None,
                    checked=ctx.sample_budget, counterexample=bracket_failure)]
    if products:
        checks.append(Check(name="products of members are members", passed=product_failure is None,
                            checked=products, counterexample=product_failure))
    if identities:
        checks.append(Check(name="product identities at the weak singularities", passed=identity_failure is None,
                            checked=identities, counterexample=identity_failure))
    return checks


def _handle_verify(ctx: RunContext) -> Outcome:
    config, basis, omega = ctx.config, ctx.basis, ctx.omega
    out = Outcome(adjustments=list(basis.adjustments))
    out.checks += [dimension_check(basis), almost_grading_check(ctx.consts, ctx.prescription.expected_S()),
                   connection_check(omega)]
    out.checks += _closure_checks(ctx)
    out.checks += verify_module_axioms(basis, omega, ctx.sample_budget, ctx.seed)

    rng = ctx.rng("cocycles")
    budget = ctx.sample_budget
    triples = [(random_member(config, rng), random_member(config, rng), random_member(config, rng))
               for _ in range(budget)]
    pairs = [(a, b) for a, b, _ in triples]
    fields = [random_vector_field(config, rng) for _ in range(budget)]
    samples = [(e, a, b) for e, (a, b, _) in zip(fields, triples)]
    evaluators = {"gamma1": lambda c: gamma1(omega, c)}
    if config.algebra.family in ("gl", "s"):
        evaluators["gamma2"] = gamma2
    for kind, make in evaluators.items():
        for cycle in ctx.cycles():
            gamma = make(cycle)
            out.checks.append(verify_cocycle_identity(gamma, triples, f"cocycle identity of {kind} over {cycle.label}"))
        out.checks.append(antisymmetry_check(make(Cycle.around_in(config, 1)), pairs, f"antisymmetry of {kind}"))
    out.checks.append(residue_theorem_check(omega, config, pairs))
    for kind, rt in ctx.tables.items():
        out.checks.append(separating_cycle_check(rt))

    first = Cycle.around_in(config, 1)
    out.checks.append(l_invariance_check(gamma1(omega, first), omega, samples, "L-invariance of gamma1"))
    out.checks.append(dg_extension_check(gamma1(omega, first), omega, samples))
    perturbed = _perturbation(ctx)
    if perturbed is not None:
        out.checks.append(omega_difference_check(omega, perturbed, first, pairs))
        if "gamma2" in evaluators:
            out.checks.append(l_invariance_check(gamma2(first), perturbed, samples,
                                                 "L-invariance of gamma2 for another connection"))
        if config.algebra.is_simple:
            search = l_invariance_check(gamma1(omega, first), perturbed,
                                        itertools.islice(basis_triples(basis), 10 * budget),
                                        "L-invariance of gamma1 for another connection")
            out.checks.append(Check(name="invariance dichotomy for a perturbed connection", passed=not search.passed,
                                    checked=search.checked, details={"witness": search.counterexample}))

    lo, hi = ctx.window
    if lo <= -1 and hi >= 1:
        rt = ctx.tables["gamma1"]
        for i in range(1, config.N + 1):
            table = rt.table(Cycle.around_in(config, i))
            for check in level_recursion_check(table, basis, ctx.consts, omega, ctx.sample_budget * 10):
                out.checks.append(check.model_copy(update={"name": f"{check.name} ({table.name})"}))
    return out


def _perturbation(ctx: RunContext) -> Optional[ConnectionForm]:
    """omega + X_(0,1) dz with X the first basis direction; None when the window misses degree 0."""
    if 0 not in ctx.basis.dimensions:
        return None
    return perturb_connection(ctx.omega, ctx.basis.element((0, 1, 0)))


def _handle_classify(ctx: RunContext) -> Outcome:
    config, basis = ctx.config, ctx.basis
    out = Outcome(adjustments=list(basis.adjustments))
    spec = config.algebra
    if spec.family in ("sl", "so", "sp"):
        try:
            chevalley_basis(spec)
            out.checks.append(Check(name="Chevalley relations", passed=True, checked=1))
        except LaxkitError as exc:
            out.checks.append(Check(name="Chevalley relations", passed=False, checked=1, counterexample=exc.to_dict()))

    verdict = local_space_dimension(config, ctx.omega, ctx.window, ctx.prescription, basis, ctx.consts, ctx.jobs)
    out.checks += verdict.checks()
    out.artifacts["classification.json"] = verdict.to_json()
    out.summary["local_space"] = verdict.to_json()
    if verdict.bounded_rank is None:
        return out

    rt = ctx.tables["gamma1"]
    forms = {}
    for i in range(1, config.N + 1):
        table = rt.table(Cycle.around_in(config, i))
        try:
            forms[table.name] = psi_forms(table, basis).to_json()
            out.checks.append(Check(name=f"psi-form of {table.name}", passed=True, checked=1))
        except CocycleError as exc:
            out.checks.append(Check(name=f"psi-form of {table.name}", passed=False, checked=1,
                                    counterexample=exc.to_dict()))
    out.artifacts["psi_forms.json"] = forms

    if basis.algebra.chevalley is not None:
        normalized = {}
        for i in range(1, config.N + 1):
            table = rt.table(Cycle.around_in(config, i))
            try:
                phi, table_n, checks = normalize_cocycle(table, basis, ctx.consts, cutoff=1)
            except (WindowError, CocycleError) as exc:
                out.checks.append(Check(name=f"normalisation of {table.name}", passed=False,
                                        counterexample=exc.to_dict()))
                continue
            out.checks += [c.model_copy(update={"name": f"{c.name} ({table.name})"}) for c in checks]
            normalized[table.name] = {"phi": phi.to_json(), "table": table_n.to_json()}
        out.artifacts["normalized.json"] = normalized
    return out


HANDLERS: Dict[str, Callable[[RunContext], Outcome]] = {
    "basis": _handle_basis,
    "structconst": _handle_structconst,
    "cocycle": _handle_cocycle,
    "verify": _handle_verify,
    "classify": _handle_classify,
}


def run_command(command: str, run: RunConfig, window: Optional[Tuple[int, int]] = None,
                seed: Optional[int] = None, jobs: Optional[int] = None) -> Tuple[Report, Dict[str, Any]]:
    """Runs one command; returns the report and the artifacts to write next to it."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}; choose one of {', '.join(COMMANDS)}")
    started = time.perf_counter()
    ctx = RunContext.create(run, window, seed, jobs)
    logger.info("running %s on %s (window %s, seed %d)", command, run.name, ctx.window, ctx.seed)
    outcome = HANDLERS[command](ctx)
    report = Report(
        command=command,
        config_name=run.name,
        inputs_hash=inputs_hash(command, run, ctx.window, ctx.seed),
        window=ctx.window,
        seed=ctx.seed,
        checks=outcome.checks,
        adjustments=outcome.adjustments,
        summary=outcome.summary,
    )
    if settings.REPORT_TIMING:
        report.timing = {"seconds": round(time.perf_counter() - started, 3)}
    for failure in report.failures:
        logger.warning("FAIL %s: %s", failure.name, failure.counterexample)
    return report, outcome.artifacts
