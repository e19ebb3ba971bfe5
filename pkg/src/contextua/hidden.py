"""Three-stage transition models for empirical models, including the
hidden-variable constructions.

Layout of every model built here: a root stage ``x`` holding the single
state ``s``, optionally an edge ``i`` to a middle stage ``y`` holding
latent states, and one edge per maximal context e into a leaf stage
``z_e`` holding the joint outcomes of e. Each non-maximal context e gets
its own tree with the same shape and a projection from the initial tree
sending every leaf of a larger context onto ``z_e``.
"""
from __future__ import annotations

from typing import Hashable, Mapping

from .errors import NegativeWeight, NotASection, NotAWitness, SchemaError, ensure
from .presheaves import RRelationalPresheaf, StochasticModel, eval_path, restrict_base
from .relations import RRelation
from .scenarios import (
    MIDDLE,
    ROOT,
    ROOT_STATE,
    EmpiricalModel,
    GlobalSection,
    NoSignallingVerdict,
    MeasurementScenario,
    check_no_signalling,
    empirical_presheaf,
    empirical_tree,
    is_global_section,
    leaf_node,
)
from .semiring import BOOL, Distribution, Semiring, dist_unit
from .trees import LabelTree, TreeProjection

STAGE = "i"
PLAIN = "*"   # the single latent state of a model with a trivial middle stage
INITIAL = "L0"


def tree_name(scenario: MeasurementScenario, context) -> str:
    return f"L_{scenario.label(context)}"


def _tree(scenario: MeasurementScenario, contexts, with_stage: bool) -> LabelTree:
    top = MIDDLE if with_stage else ROOT
    edges = [(ROOT, MIDDLE, STAGE)] if with_stage else []
    edges += [(top, leaf_node(scenario.label(e)), scenario.label(e)) for e in contexts]
    return LabelTree.from_edges(ROOT, edges)


def tree_family(scenario: MeasurementScenario, with_stage: bool):
    """The initial tree, one tree per non-maximal context, and projections."""
    L0 = _tree(scenario, scenario.contexts, with_stage)
    trees = {INITIAL: L0}
    projections = {}
    for e in scenario.all_contexts()[len(scenario.contexts):]:
        Le = _tree(scenario, [e], with_stage)
        name = tree_name(scenario, e)
        trees[name] = Le
        m = {ROOT: ROOT}
        if with_stage:
            m[MIDDLE] = MIDDLE
        for big in scenario.maximal_supersets(e):
            m[leaf_node(scenario.label(big))] = leaf_node(scenario.label(e))
        projections[name] = TreeProjection(L0, Le, m)
    return trees, projections


def leaf_valuation(scenario: MeasurementScenario) -> dict[str, frozenset]:
    """``a=k`` holds at the leaf states of every maximal context containing a
    whose joint outcome gives a the value k."""
    val = {}
    for a in scenario.order:
        for k in scenario.outcomes(a):
            val[f"{a}={k}"] = frozenset(
                (leaf_node(scenario.label(e)), g)
                for e in scenario.contexts if a in e
                for g in scenario.joint_outcomes(e)
                if g[e.index(a)] == k
            )
    return val


def staged_model(
    scenario: MeasurementScenario,
    semiring: Semiring,
    latent: Distribution | None,
    kernels: Mapping,
) -> StochasticModel:
    """Assemble a model from latent weights and per-latent-state context kernels.

    ``latent`` is the distribution of the stage-i edge (None for a model
    without stage i, in which case ``kernels`` has the single key ``s``).
    ``kernels[h][e]`` is the distribution over joint outcomes of e at h.
    Every leaf edge relates each latent state to the support of its kernel
    when the kernel is deterministic, and to every joint outcome otherwise.
    """
    with_stage = latent is not None
    trees, projections = tree_family(scenario, with_stage)
    top = MIDDLE if with_stage else ROOT
    hidden = set(latent.carrier) if with_stage else {ROOT_STATE}
    if set(kernels) != hidden:
        raise SchemaError("need one kernel family per latent state")
    fiber = {ROOT: {ROOT_STATE}, top: hidden}
    edges = {}
    if with_stage:
        edges[MIDDLE] = RRelation({ROOT_STATE}, hidden, {ROOT_STATE: hidden}, {ROOT_STATE: latent}, semiring)
    for e in scenario.contexts:
        node = leaf_node(scenario.label(e))
        outs = frozenset(scenario.joint_outcomes(e))
        fiber[node] = outs
        arrows, weights = {}, {}
        for h in hidden:
            d = kernels[h][e]
            arrows[h] = d.support if len(d.support) == 1 and d.carrier == d.support else outs
            weights[h] = d
        edges[node] = RRelation(hidden, outs, arrows, weights, semiring)
    system = RRelationalPresheaf(trees[INITIAL], fiber, edges, semiring)
    return StochasticModel(trees, INITIAL, projections, system, leaf_valuation(scenario))


def empirical_to_model(E: EmpiricalModel, with_stage: bool = False) -> StochasticModel:
    """The transition model of E itself; with ``with_stage`` an edge i to a
    single latent state precedes the measurements."""
    kernels = {e: E.tables[e] for e in E.scenario.contexts}
    if with_stage:
        return staged_model(E.scenario, E.semiring, dist_unit(E.semiring, PLAIN), {PLAIN: kernels})
    return staged_model(E.scenario, E.semiring, None, {ROOT_STATE: kernels})


def build_hv_model(E: EmpiricalModel, section: GlobalSection | Distribution) -> StochasticModel:
    """Deterministic hidden-variable model: the latent states are global
    assignments weighted by the section, each measuring deterministically."""
    d = section.distribution if isinstance(section, GlobalSection) else section
    sc, sr = E.scenario, E.semiring
    if not is_global_section(E, d):
        raise NotASection("the distribution does not marginalize to every table")
    latent = Distribution(sr, {f: d[f] for f in sc.global_assignments()})
    kernels = {f: {e: dist_unit(sr, sc.restrict(f, e)) for e in sc.contexts} for f in latent.carrier}
    H = staged_model(sc, sr, latent, kernels)
    ensure(forget_stage(H, sc) == empirical_presheaf(E), "forgetting stage i does not reproduce E")
    ensure(model_no_signalling(H, sc).holds, "hidden-variable model is signalling")
    return H


LEFTOVER = "t"


def build_weak_hv_model(E: EmpiricalModel, witness: tuple) -> StochasticModel:
    """Two latent states: the assignment ``witness`` with weight the least
    probability any context gives its restriction, and a leftover state
    ``t`` carrying the remaining weight of every table."""
    sc, sr = E.scenario, E.semiring
    if sr.name == "rational":
        raise SchemaError("weak hidden-variable models need non-negative or Boolean weights")
    witness = tuple(witness)
    if len(witness) != len(sc.order) or any(
        witness[i] not in sc.outcomes(a) for i, a in enumerate(sc.order)
    ):
        raise NotAWitness("not a global assignment of this scenario")
    for e in sc.contexts:
        if sc.restrict(witness, e) not in E.tables[e].support:
            raise NotAWitness(f"restriction to {e!r} is impossible in E")
    if sr is BOOL:
        latent = Distribution(sr, {witness: True, LEFTOVER: True})
        rest = {e: E.tables[e] for e in sc.contexts}
    else:
        w_f = min(E.tables[e][sc.restrict(witness, e)] for e in sc.contexts)
        w_t = sr.one - w_f
        latent = Distribution(sr, {witness: w_f, LEFTOVER: w_t})
        rest = {}
        for e in sc.contexts:
            if w_t == 0:
                # the leftover state is unreachable; any distribution will do
                rest[e] = E.tables[e]
                continue
            fe = sc.restrict(witness, e)
            ws = {}
            for g in sc.joint_outcomes(e):
                v = E.tables[e][g] - (w_f if g == fe else 0)
                if v < 0:
                    raise NegativeWeight(f"leftover weight at {e!r} {g!r} is negative")
                ws[g] = v / w_t
            rest[e] = Distribution(sr, ws)
    kernels = {
        witness: {e: dist_unit(sr, sc.restrict(witness, e)) for e in sc.contexts},
        LEFTOVER: rest,
    }
    H = staged_model(sc, sr, latent, kernels)
    ensure(forget_stage(H, sc) == empirical_presheaf(E), "forgetting stage i does not reproduce E")
    ensure(model_no_signalling(H, sc).holds, "weak hidden-variable model is signalling")
    return H


def forget_stage(M: StochasticModel, scenario: MeasurementScenario) -> RRelationalPresheaf:
    """Restrict the system to the tree without stage i."""
    coarse = empirical_tree(scenario)
    return restrict_base(M.system, coarse, {n: n for n in coarse.nodes})


def _induced_tables(M: StochasticModel, scenario: MeasurementScenario, reach) -> EmpiricalModel:
    """Tables whose weight at g is the mass, under ``reach(e) = (leaf, d)``,
    of the leaf states where every letter of g holds."""
    tables = {}
    for e in scenario.contexts:
        leaf, d = reach(e)
        try:
            tables[e] = Distribution(M.semiring, {
                g: d.mass([u for u in d.carrier
                           if all((leaf, u) in M.valuation[f"{a}={k}"] for a, k in zip(e, g))])
                for g in scenario.joint_outcomes(e)
            })
        except KeyError as exc:
            raise SchemaError(f"valuation is missing the letter {exc}") from None
    return EmpiricalModel(scenario, M.semiring, tables)


def extract_empirical(
    M: StochasticModel, scenario: MeasurementScenario, state: Hashable = ROOT_STATE,
    with_stage: bool = True,
) -> EmpiricalModel:
    """Read off, at a root state, the distribution over joint outcomes that
    each maximal context induces through the valuation (after stage i when
    ``with_stage``)."""
    L0, S = M.base, M.system
    root = L0.root
    start = L0.child_by_label(root, STAGE) if with_stage else root
    if start is None:
        raise SchemaError("the model has no stage i at its root")

    def reach(e):
        leaf = L0.child_by_label(start, scenario.label(e))
        if leaf is None:
            raise SchemaError(f"no edge for context {scenario.label(e)!r}")
        return leaf, eval_path(S, root, leaf).weights[state]

    return _induced_tables(M, scenario, reach)


def model_no_signalling(M: StochasticModel, scenario: MeasurementScenario) -> NoSignallingVerdict:
    """No-signalling of the tables induced at every state of every stage from
    which all the context edges leave, and at the root through stage i."""
    L0, S = M.base, M.system
    views = []
    for node in sorted(L0.nodes, key=repr):
        kids = {L0.label[c]: c for c in L0.children(node)}
        if not all(scenario.label(e) in kids for e in scenario.contexts):
            continue
        for state in sorted(S.fiber[node], key=repr):
            views.append(_induced_tables(
                M, scenario,
                lambda e, kids=kids, state=state: (
                    kids[scenario.label(e)], S.edges[kids[scenario.label(e)]].weights[state]),
            ))
    if L0.child_by_label(L0.root, STAGE) is not None:
        views += [extract_empirical(M, scenario, s) for s in S.fiber[L0.root]]
    for view in views:
        verdict = check_no_signalling(view)
        if not verdict.holds:
            return verdict
    return NoSignallingVerdict(True)
