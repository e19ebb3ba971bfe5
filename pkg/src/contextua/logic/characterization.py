"""Cross-checks between contextuality of the empirical models a set of legal
sentences describes and the sequents those sentences entail on models.

This is a finite harness, not a prover: it evaluates both sides on the
supplied families and on the countermodels built along the way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from ..errors import HypothesisViolated, NotAWitness, NotLegal, SchemaError
from ..hidden import STAGE, build_hv_model, build_weak_hv_model, extract_empirical, model_no_signalling
from ..presheaves import StochasticModel
from ..scenarios import (
    EmpiricalModel,
    GlobalSection,
    MeasurementScenario,
    find_global_section,
    is_global_section,
)
from ..semiring import Distribution
from .semantics import Evaluator, counterexamples
from .sentences import det_sentence, describes, is_legal, lambda_axioms, stage_hypotheses
from .syntax import Atom, Box, Diamond, Not, Sequent, Top, conjoin, subformulas

CONTEXTUAL = "contextual"
STRONG = "strong"


def target_sentence(scenario: MeasurementScenario, mode: str):
    det = det_sentence(scenario)
    if mode == CONTEXTUAL:
        return Not(Box((STAGE,), det))
    if mode == STRONG:
        return Box((STAGE,), Not(det))
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class ModelCheck:
    """Outcome for one stochastic model: whether it qualifies (no-signalling,
    validates the label axioms) and the root states refuting the sequent."""

    name: str
    qualifies: bool
    refuting_states: list
    extracted: EmpiricalModel | None = None
    extracted_is_described: bool | None = None
    extracted_witness_ok: bool | None = None


@dataclass
class CharacterizationReport:
    mode: str
    described: list = field(default_factory=list)          # indices of described models
    all_described_contextual: bool = True
    countermodels: list = field(default_factory=list)        # (index, ModelCheck)
    rejected_witnesses: int = 0
    model_checks: list = field(default_factory=list)
    sequent_valid_on_family: bool = True
    consistent: bool = True


def _label_axioms(scenario: MeasurementScenario, delta) -> list[Sequent]:
    bodies = {Top()} | {Atom(a, k) for a in scenario.order for k in scenario.outcomes(a)}
    for f in delta:
        bodies |= {g for g in subformulas(f) if not isinstance(g, (Box, Diamond))}
    return lambda_axioms(scenario, sorted(bodies, key=repr))


def _check_model(name, M: StochasticModel, scenario, delta, goal, mode, ev=None) -> ModelCheck:
    ev = ev or Evaluator(M)
    try:
        nosig = model_no_signalling(M, scenario).holds
    except SchemaError:
        nosig = False
    qualifies = nosig and all(not counterexamples(M, ax, ev) for ax in _label_axioms(scenario, delta))
    refuting = [st for st in counterexamples(M, Sequent(delta, goal), ev) if st[0] == M.base.root]
    check = ModelCheck(name, qualifies, refuting)
    if qualifies and refuting:
        _extract(check, M, scenario, delta, mode, ev)
    return check


def _extract(check: ModelCheck, M, scenario, delta, mode, ev: Evaluator):
    """Rebuild an empirical model from a refuting root state, following the
    converse direction of the characterization."""
    stage, s = check.refuting_states[0]
    E = extract_empirical(M, scenario, s)
    check.extracted = E
    check.extracted_is_described = all(describes(f, E) for f in delta)
    y = M.base.child_by_label(stage, STAGE)
    d = M.system.edges[y].weights[s]
    sr = M.semiring
    if mode == CONTEXTUAL:
        weights = {}
        for f in scenario.global_assignments():
            bound = conjoin(Box((a,), Atom(a, k)) for a, k in zip(scenario.order, f))
            weights[f] = sr.sum(d[t] for t in d.carrier if ev.holds(bound, (y, t)))
        try:
            section = Distribution(sr, weights)
            check.extracted_witness_ok = is_global_section(E, section)
        except ValueError:
            check.extracted_witness_ok = False
    else:
        det = det_sentence(scenario)
        good = [t for t in d.support if ev.holds(det, (y, t))]
        ok = False
        for t in good:
            f = tuple(
                next(k for k in scenario.outcomes(a) if ev.holds(Box((a,), Atom(a, k)), (y, t)))
                for a in scenario.order
            )
            ok = all(scenario.restrict(f, e) in E.tables[e].support for e in scenario.contexts)
            if ok:
                break
        check.extracted_witness_ok = ok


def check_characterization(
    delta,
    models,
    mode: str = CONTEXTUAL,
    stochastic=(),
    scenario: MeasurementScenario | None = None,
) -> CharacterizationReport:
    """Evaluate both sides of the characterization on finite families.

    ``models`` are empirical models; ``stochastic`` are (name, model) pairs.
    Every described empirical model that is not (strongly) contextual yields
    a countermodel by the matching hidden-variable construction; every
    qualifying stochastic model refuting the sequent yields an empirical
    model with a global section (or a consistent global assignment).
    """
    delta = list(delta)
    models = list(models)
    if scenario is None:
        if not models:
            raise SchemaError("need a scenario or at least one empirical model")
        scenario = models[0].scenario
    for f in delta:
        if not is_legal(f, scenario):
            raise NotLegal(f"not a legal sentence: {f!r}")
    missing = [h for h in stage_hypotheses(scenario) if h not in delta]
    if missing:
        raise HypothesisViolated(f"missing nonemptiness sentences: {missing}")
    goal = target_sentence(scenario, mode)
    report = CharacterizationReport(mode)

    for idx, E in enumerate(models):
        if not all(describes(f, E) for f in delta):
            continue
        report.described.append(idx)
        if mode == CONTEXTUAL:
            res = find_global_section(E)
            if isinstance(res, GlobalSection):
                report.all_described_contextual = False
                H = build_hv_model(E, res)
                report.countermodels.append((idx, _check_model(f"hv[{idx}]", H, scenario, delta, goal, mode)))
        else:
            for f in scenario.global_assignments():
                try:
                    H = build_weak_hv_model(E, f)
                except NotAWitness:
                    report.rejected_witnesses += 1
                    continue
                report.all_described_contextual = False
                report.countermodels.append((idx, _check_model(f"weak-hv[{idx}]", H, scenario, delta, goal, mode)))
                break

    for name, M in stochastic:
        report.model_checks.append(_check_model(name, M, scenario, delta, goal, mode))

    checks = report.model_checks + [c for _, c in report.countermodels]
    report.sequent_valid_on_family = not any(c.qualifies and c.refuting_states for c in checks)
    # each countermodel must qualify and refute; each refutation must give back
    # a described, non-contextual empirical model
    counter_ok = all(c.qualifies and c.refuting_states for _, c in report.countermodels)
    extract_ok = all(
        c.extracted_is_described and c.extracted_witness_ok
        for c in checks if c.qualifies and c.refuting_states
    )
    report.consistent = (
        counter_ok and extract_ok
        and report.all_described_contextual == report.sequent_valid_on_family
    )
    return report
