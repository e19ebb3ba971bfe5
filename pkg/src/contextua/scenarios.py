"""Measurement scenarios, empirical models, no-signalling and contextuality.

Joint outcomes of a context are tuples in the context's declared measurement
order; global assignments are tuples in the scenario's measurement order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from itertools import combinations, product
from types import MappingProxyType
from typing import Hashable, Iterable, Mapping, Sequence

from . import simplex
from .errors import NotAFactorization, SchemaError, SignallingInput
from .presheaves import RPresheaf, RRelationalPresheaf
from .relations import RMap, rmap_compose, rmap_from_weights
from .semiring import BOOL, NONNEG, RATIONAL, Distribution, Semiring, get_semiring
from .trees import LabelTree


@dataclass(frozen=True, eq=False)
class MeasurementScenario:
    measurements: Mapping[str, tuple]      # name -> ordered outcomes
    contexts: tuple                        # maximal contexts, each an ordered tuple
    parties: tuple | None = None           # optional grouping into parties

    def __post_init__(self):
        meas = {str(a): tuple(str(o) for o in os) for a, os in dict(self.measurements).items()}
        object.__setattr__(self, "measurements", MappingProxyType(meas))
        ctxs = tuple(tuple(str(a) for a in e) for e in self.contexts)
        object.__setattr__(self, "contexts", ctxs)
        if not ctxs:
            raise SchemaError("a scenario needs at least one context")
        for a, os in meas.items():
            if not os:
                raise SchemaError(f"measurement {a!r} has no outcomes")
            if len(set(os)) != len(os):
                raise SchemaError(f"measurement {a!r} repeats an outcome")
        for e in ctxs:
            if not e:
                raise SchemaError("empty context")
            if len(set(e)) != len(e):
                raise SchemaError(f"context {e!r} repeats a measurement")
            for a in e:
                if a not in meas:
                    raise SchemaError(f"context {e!r} names unknown measurement {a!r}")
        for e0 in ctxs:
            for e1 in ctxs:
                if e0 is not e1 and set(e0) <= set(e1):
                    raise SchemaError(f"context {e0!r} is not maximal")
        covered = {a for e in ctxs for a in e}
        if covered != set(meas):
            raise SchemaError(f"measurements outside every context: {sorted(set(meas) - covered)}")
        if self.parties is not None:
            parts = tuple(tuple(p) for p in self.parties)
            object.__setattr__(self, "parties", parts)
            flat = [a for p in parts for a in p]
            if sorted(flat) != sorted(meas):
                raise SchemaError("parties must partition the measurements")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(meas)})
        labels = [self.label(c) for c in self.all_contexts()]
        if len(labels) != len(set(labels)):
            raise SchemaError("context labels collide; rename measurements")

    @property
    def order(self) -> tuple:
        return tuple(self.measurements)

    def outcomes(self, a) -> tuple:
        return self.measurements[a]

    def joint_outcomes(self, context: Sequence[str]) -> list[tuple]:
        return list(product(*(self.measurements[a] for a in context)))

    def global_assignments(self) -> list[tuple]:
        return self.joint_outcomes(self.order)

    def restrict(self, f: tuple, context: Sequence[str], source: Sequence[str] | None = None) -> tuple:
        """Restrict an assignment on ``source`` (default: all measurements) to ``context``."""
        if source is None:
            return tuple(f[self._index[a]] for a in context)
        pos = {a: i for i, a in enumerate(source)}
        return tuple(f[pos[a]] for a in context)

    def canonical(self, context: Iterable[str]) -> tuple:
        """A sub-context written in measurement order."""
        return tuple(sorted(set(context), key=self._index.__getitem__))

    def label(self, context: Sequence[str]) -> str:
        return "".join(context)

    def all_contexts(self) -> list[tuple]:
        """Maximal contexts (declared order) followed by the non-maximal ones."""
        out = list(self.contexts)
        seen = {frozenset(e) for e in out}
        for e in self.contexts:
            for k in range(len(e) - 1, 0, -1):
                for sub in combinations(e, k):
                    key = frozenset(sub)
                    if key not in seen:
                        seen.add(key)
                        out.append(self.canonical(sub))
        return out

    def context_of_label(self, label: str) -> tuple | None:
        for c in self.all_contexts():
            if self.label(c) == label:
                return c
        return None

    def maximal_supersets(self, context: Iterable[str]) -> list[tuple]:
        c = set(context)
        return [e for e in self.contexts if c <= set(e)]

    def is_context(self, context: Iterable[str]) -> bool:
        return bool(self.maximal_supersets(context))

    def to_json(self) -> dict:
        out = {
            "measurements": {a: list(os) for a, os in self.measurements.items()},
            "contexts": [list(e) for e in self.contexts],
        }
        if self.parties is not None:
            out["parties"] = [list(p) for p in self.parties]
        return out


def nkl_scenario(n: int, k: int, l: int) -> MeasurementScenario:
    """n parties, k measurements each (a, a', a'', ...), l outcomes each."""
    letters = "abcdefghjkmnpqrstuvw"
    if n > len(letters):
        raise SchemaError("too many parties")
    parties = [tuple(letters[p] + "'" * j for j in range(k)) for p in range(n)]
    outs = tuple(str(o) for o in range(l))
    meas = {a: outs for p in parties for a in p}
    return MeasurementScenario(meas, tuple(product(*parties)), tuple(parties))


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    scenario: MeasurementScenario
    semiring: Semiring
    tables: Mapping[tuple, Distribution]

    def __post_init__(self):
        tabs = {tuple(e): d for e, d in dict(self.tables).items()}
        if set(tabs) != set(self.scenario.contexts):
            raise SchemaError("need exactly one table per maximal context")
        for e, d in tabs.items():
            if d.semiring is not self.semiring:
                raise SchemaError(f"table at {e!r} uses the wrong semiring")
            outs = self.scenario.joint_outcomes(e)
            if not d.carrier <= set(outs):
                raise SchemaError(f"table at {e!r} weighs impossible joint outcomes")
            if d.carrier != set(outs):
                # every joint outcome is related, possibly with weight zero
                tabs[e] = Distribution(self.semiring, {g: d[g] for g in outs})
        object.__setattr__(self, "tables", MappingProxyType(tabs))

    @classmethod
    def from_weights(cls, scenario: MeasurementScenario, semiring: Semiring, weights: Mapping) -> "EmpiricalModel":
        """Tables from {context: {joint: weight}}; unlisted joint outcomes weigh zero."""
        tables = {}
        for e in scenario.contexts:
            w = dict(weights.get(e, weights.get(tuple(e), {})))
            tables[e] = Distribution(
                semiring, {g: w.get(g, semiring.zero) for g in scenario.joint_outcomes(e)}
            )
        return cls(scenario, semiring, tables)

    def marginal(self, context: Sequence[str], sub: Sequence[str]) -> Distribution:
        sc = self.scenario
        return self.tables[tuple(context)].pushforward(lambda g: sc.restrict(g, sub, context))

    def support_marginals(self, sub: Sequence[str]) -> list[tuple[tuple, Distribution]]:
        return [(e, self.marginal(e, sub)) for e in self.scenario.maximal_supersets(sub)]

    def to_json(self) -> dict:
        sc = self.scenario
        out = sc.to_json()
        out["semiring"] = self.semiring.name
        out["tables"] = {
            ",".join(e): {
                ",".join(g): self.semiring.format(self.tables[e][g])
                for g in sc.joint_outcomes(e)
            }
            for e in sc.contexts
        }
        return out

    def __eq__(self, other):
        if not isinstance(other, EmpiricalModel):
            return NotImplemented
        return (
            self.semiring is other.semiring
            and self.scenario.to_json() == other.scenario.to_json()
            and dict(self.tables) == dict(other.tables)
        )

    __hash__ = None


def empirical_from_json(data: Mapping, semiring: Semiring | None = None) -> EmpiricalModel:
    try:
        meas = {a: tuple(os) for a, os in data["measurements"].items()}
        contexts = tuple(tuple(e) for e in data["contexts"])
        parties = data.get("parties")
        sr = semiring or get_semiring(data.get("semiring", "nonneg-rational"))
        scenario = MeasurementScenario(meas, contexts, parties)
        weights = {}
        raw = data["tables"]
        for e in contexts:
            key = ",".join(e)
            if key not in raw:
                raise SchemaError(f"missing table for context {key!r}")
            table = {}
            for gk, w in raw[key].items():
                g = tuple(gk.split(",")) if len(e) > 1 or "," in gk else (gk,)
                if len(g) != len(e):
                    raise SchemaError(f"joint outcome {gk!r} has the wrong arity for {key!r}")
                table[g] = w
            weights[e] = table
        return EmpiricalModel.from_weights(scenario, sr, weights)
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(str(exc)) from None


# ----------------------------------------------------------------------------
# presheaf views of an empirical model

ROOT = "x"
MIDDLE = "y"


def leaf_node(label: str) -> str:
    return f"z_{label}"


def empirical_tree(scenario: MeasurementScenario) -> LabelTree:
    return LabelTree.from_edges(
        ROOT, [(ROOT, leaf_node(scenario.label(e)), scenario.label(e)) for e in scenario.contexts]
    )


ROOT_STATE = "s"


def empirical_rpresheaf(E: EmpiricalModel) -> RPresheaf:
    """The R-presheaf: one root state, each context's joint outcomes above it."""
    sc = E.scenario
    tree = empirical_tree(sc)
    fiber = {ROOT: {ROOT_STATE}}
    edges = {}
    for e in sc.contexts:
        node = leaf_node(sc.label(e))
        outs = sc.joint_outcomes(e)
        fiber[node] = set(outs)
        edges[node] = rmap_from_weights(
            E.semiring, {g: ROOT_STATE for g in outs}, {ROOT_STATE: dict(E.tables[e].weights)}
        )
    return RPresheaf(tree, fiber, edges, E.semiring)


def empirical_presheaf(E: EmpiricalModel) -> RRelationalPresheaf:
    return empirical_rpresheaf(E).to_relational()


# ----------------------------------------------------------------------------
# marginalization and no-signalling


def marginalize(h: RMap, f: Mapping, g: Mapping) -> RMap:
    """The unique R-map on g through which h factors, for h's surjection = g . f.

    Weight of t over s is the sum of h's weights over the f-preimage of t.
    """
    f, g = dict(f), dict(g)
    if set(f) != set(h.target) or set(g) != set(f.values()):
        raise NotAFactorization("f and g do not chain from h's target")
    if set(g.values()) != set(h.source):
        raise NotAFactorization("g is not onto h's source")
    for u, s in h.under.items():
        if g[f[u]] != s:
            raise NotAFactorization(f"g . f disagrees with h at {u!r}")
    sr = h.semiring
    weights: dict = {}
    for u, s in h.under.items():
        t = f[u]
        row = weights.setdefault(s, {})
        row[t] = sr.add(row.get(t, sr.zero), h.fibers[s][u])
    return rmap_from_weights(sr, g, weights)


@dataclass(frozen=True)
class SignallingWitness:
    """Two contexts whose marginals on a shared sub-context disagree at ``outcome``."""

    subcontext: tuple
    outcome: tuple
    context0: tuple
    context1: tuple
    value0: object
    value1: object

    def to_json(self, semiring: Semiring) -> dict:
        return {
            "subcontext": list(self.subcontext),
            "outcome": list(self.outcome),
            "contexts": [list(self.context0), list(self.context1)],
            "values": [semiring.format(self.value0), semiring.format(self.value1)],
        }


@dataclass(frozen=True)
class BundleWitness:
    """A restricted state t and two external choices v0, v1 over pi_A(t) with
    different masses above t."""

    state: Hashable
    choice0: Hashable
    choice1: Hashable
    value0: object
    value1: object


@dataclass(frozen=True)
class NoSignallingVerdict:
    holds: bool
    witness: SignallingWitness | BundleWitness | None = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class PartyRestriction:
    """The data of a restriction from the whole system to a subsystem:
    the weighted bundle pi^R over L_AB, the stage projection p_L, the state
    projection p_S, and the restricted bundle pi_A."""

    pi_R: RMap
    p_L: Mapping
    p_S: Mapping
    pi_A: Mapping
    semiring: Semiring

    def choices_over(self, w) -> list:
        return sorted((v for v, ww in self.p_L.items() if ww == w), key=repr)

    def internalized(self, p_weights: Mapping) -> RMap:
        """pi^R composed with the given weights on p_L."""
        p_R = rmap_from_weights(self.semiring, self.p_L, p_weights)
        return rmap_compose(p_R, self.pi_R)

    def marginal(self, p_weights: Mapping) -> RMap:
        """phi(pi^R . p_L^R), marginalized along p_S."""
        return marginalize(self.internalized(p_weights), self.p_S, self.pi_A)

    def point_mass(self, choice) -> dict:
        """Weights on p_L putting all mass on ``choice`` above its image,
        and on the lowest-sorted choice elsewhere."""
        w = self.p_L[choice]
        out = {}
        for ww in set(self.p_L.values()):
            over = self.choices_over(ww)
            pick = choice if ww == w else over[0]
            out[ww] = {v: (self.semiring.one if v == pick else self.semiring.zero) for v in over}
        return out


def party_restriction(E: EmpiricalModel, keep: Iterable[str]) -> PartyRestriction:
    """Restrict the (rooted) bundle of E to the measurements in ``keep``.

    Every maximal context must meet ``keep``.
    """
    sc = E.scenario
    keep = set(keep)
    pi_R = empirical_rpresheaf(E).vertical()
    p_L = {ROOT: ROOT}
    p_S = {(ROOT, ROOT_STATE): (ROOT, ROOT_STATE)}
    pi_A = {(ROOT, ROOT_STATE): ROOT}
    for e in sc.contexts:
        sub = tuple(a for a in e if a in keep)
        if not sub:
            raise SchemaError(f"context {e!r} does not meet the kept measurements")
        node, sub_node = leaf_node(sc.label(e)), leaf_node(sc.label(sub))
        p_L[node] = sub_node
        for g in sc.joint_outcomes(e):
            t = (sub_node, sc.restrict(g, sub, e))
            p_S[(node, g)] = t
            pi_A[t] = sub_node
    return PartyRestriction(pi_R, MappingProxyType(p_L), MappingProxyType(p_S),
                            MappingProxyType(pi_A), E.semiring)


def _bundle_no_signalling(B: PartyRestriction) -> NoSignallingVerdict:
    sr = B.semiring
    pi = B.pi_R.under
    for t in sorted(B.pi_A, key=repr):
        w = B.pi_A[t]
        vals = []
        for v in B.choices_over(w):
            mass = sr.sum(
                B.pi_R.fibers[v][u] for u, tt in B.p_S.items() if tt == t and pi[u] == v
            )
            vals.append((v, mass))
        for v, mass in vals[1:]:
            if not sr.eq(mass, vals[0][1]):
                return NoSignallingVerdict(False, BundleWitness(t, vals[0][0], v, vals[0][1], mass))
    return NoSignallingVerdict(True)


def check_no_signalling(E: EmpiricalModel | PartyRestriction) -> NoSignallingVerdict:
    """Marginals to every shared sub-context agree (or, for a party
    restriction, the mass above each restricted state is independent of the
    external choice)."""
    if isinstance(E, PartyRestriction):
        return _bundle_no_signalling(E)
    sc, sr = E.scenario, E.semiring
    for i, e0 in enumerate(sc.contexts):
        for e1 in sc.contexts[i + 1:]:
            shared = sc.canonical(set(e0) & set(e1))
            if not shared:
                continue
            m0, m1 = E.marginal(e0, shared), E.marginal(e1, shared)
            for g in sc.joint_outcomes(shared):
                if not sr.eq(m0[g], m1[g]):
                    return NoSignallingVerdict(
                        False, SignallingWitness(shared, g, e0, e1, m0[g], m1[g])
                    )
    return NoSignallingVerdict(True)


# ----------------------------------------------------------------------------
# global sections


@dataclass(frozen=True)
class GlobalSection:
    distribution: Distribution   # over global assignments (scenario order)


@dataclass(frozen=True)
class Infeasible:
    """No global section. For rational semirings ``certificate`` holds the
    Farkas multipliers as {("norm",): y0, (context, joint): y}; for Bool it
    lists the support entries no consistent global assignment covers."""

    certificate: Mapping
    gap: object = None

    def bell_inequality(self, E: EmpiricalModel) -> tuple[dict, Fraction]:
        """Coefficients c[(e, g)] and bound such that every noncontextual
        model has sum c * E <= bound, while this E exceeds it by ``gap``."""
        coeffs = {k: v for k, v in self.certificate.items() if k != ("norm",)}
        return coeffs, -self.certificate.get(("norm",), Fraction(0))


def _lp_system(E: EmpiricalModel):
    sc = E.scenario
    assigns = sc.global_assignments()
    rows, rhs, keys = [], [], []
    rows.append([Fraction(1)] * len(assigns))
    rhs.append(Fraction(1))
    keys.append(("norm",))
    for e in sc.contexts:
        for g in sc.joint_outcomes(e):
            rows.append([Fraction(1) if sc.restrict(f, e) == g else Fraction(0) for f in assigns])
            rhs.append(Fraction(E.tables[e][g]))
            keys.append((e, g))
    return assigns, rows, rhs, keys


def _require_no_signalling(E: EmpiricalModel):
    verdict = check_no_signalling(E)
    if not verdict.holds:
        raise SignallingInput("empirical model is signalling", verdict.witness)


def find_global_section(E: EmpiricalModel) -> GlobalSection | Infeasible:
    """Decide whether one distribution over global assignments marginalizes
    to every table; returns it, or an infeasibility certificate."""
    _require_no_signalling(E)
    if E.semiring is BOOL:
        return _bool_global_section(E)
    assigns, A, b, keys = _lp_system(E)
    solver = simplex.solve_free if E.semiring is RATIONAL else simplex.solve_nonneg
    res = solver(A, b)
    if isinstance(res, simplex.Feasible):
        d = Distribution(E.semiring, dict(zip(assigns, res.x)))
        return GlobalSection(d)
    return Infeasible(MappingProxyType(dict(zip(keys, res.y))), res.gap)


def consistent_assignments(E: EmpiricalModel) -> list[tuple]:
    sc = E.scenario
    return [
        f for f in sc.global_assignments()
        if all(sc.restrict(f, e) in E.tables[e].support for e in sc.contexts)
    ]


def _bool_global_section(E: EmpiricalModel) -> GlobalSection | Infeasible:
    sc = E.scenario
    good = consistent_assignments(E)
    covered = {(e, sc.restrict(f, e)) for f in good for e in sc.contexts}
    missing = [(e, g) for e in sc.contexts for g in sorted(E.tables[e].support) if (e, g) not in covered]
    if missing:
        return Infeasible(MappingProxyType({k: True for k in missing}))
    return GlobalSection(Distribution(BOOL, {f: True for f in good}))


def is_global_section(E: EmpiricalModel, d: Distribution) -> bool:
    sc = E.scenario
    if d.semiring is not E.semiring:
        return False
    return all(
        d.pushforward(lambda f, e=e: sc.restrict(f, e)) == E.tables[e] for e in sc.contexts
    )


def is_contextual(E: EmpiricalModel) -> bool:
    return not isinstance(find_global_section(E), GlobalSection)


def strong_witness(E: EmpiricalModel) -> tuple | None:
    """A global assignment whose restriction to every context is possible,
    found by backtracking (most constrained measurement first)."""
    _require_no_signalling(E)
    sc = E.scenario
    supports = {e: E.tables[e].support for e in sc.contexts}
    weight = {a: 0 for a in sc.order}
    for e in sc.contexts:
        for a in e:
            weight[a] += len(sc.joint_outcomes(e)) - len(supports[e])
    order = sorted(sc.order, key=lambda a: (-weight[a], sc.order.index(a)))
    partial: dict = {}

    def consistent() -> bool:
        for e in sc.contexts:
            if all(a in partial for a in e):
                if tuple(partial[a] for a in e) not in supports[e]:
                    return False
            else:
                fixed = [(i, partial[a]) for i, a in enumerate(e) if a in partial]
                if fixed and not any(all(g[i] == v for i, v in fixed) for g in supports[e]):
                    return False
        return True

    def search(k: int):
        if k == len(order):
            return tuple(partial[a] for a in sc.order)
        a = order[k]
        for o in sc.outcomes(a):
            partial[a] = o
            if consistent():
                found = search(k + 1)
                if found is not None:
                    return found
            del partial[a]
        return None

    return search(0)


def is_strongly_contextual(E: EmpiricalModel) -> bool:
    return strong_witness(E) is None


# ----------------------------------------------------------------------------
# canonical models


def canonical_pr_box() -> EmpiricalModel:
    """Perfect correlation on ab, ab', a'b and perfect anticorrelation on a'b',
    each allowed pair with weight 1/2."""
    sc = nkl_scenario(2, 2, 2)
    half = Fraction(1, 2)
    weights = {}
    for e in sc.contexts:
        anti = e == ("a'", "b'")
        weights[e] = {
            g: half if (g[0] != g[1]) == anti else Fraction(0) for g in sc.joint_outcomes(e)
        }
    return EmpiricalModel.from_weights(sc, NONNEG, weights)


def load_data(name: str) -> dict:
    return json.loads(resources.files("contextua.data").joinpath(name).read_text())


def canonical_hardy(semiring: Semiring = BOOL) -> EmpiricalModel:
    """The shipped Hardy table (or its supports over Bool), verified no-signalling."""
    E = empirical_from_json(load_data("hardy.json"), NONNEG)
    verdict = check_no_signalling(E)
    if not verdict.holds:
        raise SchemaError(f"shipped Hardy table is signalling: {verdict.witness}")
    if semiring is NONNEG:
        return E
    return support_model(E)


def support_model(E: EmpiricalModel) -> EmpiricalModel:
    """The possibilistic collapse: a Bool table marking each support."""
    sc = E.scenario
    return EmpiricalModel.from_weights(
        sc, BOOL, {e: {g: True for g in E.tables[e].support} for e in sc.contexts}
    )


def product_model(scenario: MeasurementScenario, local: Mapping[str, Mapping], semiring: Semiring = NONNEG) -> EmpiricalModel:
    """Each table is the product of fixed per-measurement distributions."""
    weights = {}
    for e in scenario.contexts:
        weights[e] = {
            g: semiring.product(semiring.coerce(local[a][o]) for a, o in zip(e, g))
            for g in scenario.joint_outcomes(e)
        }
    return EmpiricalModel.from_weights(scenario, semiring, weights)


def product_section(scenario: MeasurementScenario, local: Mapping[str, Mapping], semiring: Semiring = NONNEG) -> Distribution:
    return Distribution(semiring, {
        f: semiring.product(semiring.coerce(local[a][o]) for a, o in zip(scenario.order, f))
        for f in scenario.global_assignments()
    })


def compose_models(A: EmpiricalModel, B: EmpiricalModel) -> EmpiricalModel:
    """Uncorrelated composite of two empirical models on disjoint measurements:
    contexts are unions, tables are products."""
    if A.semiring is not B.semiring:
        raise SchemaError("models over different semirings")
    sa, sb = A.scenario, B.scenario
    if set(sa.order) & set(sb.order):
        raise SchemaError("composed scenarios must use disjoint measurement names")
    meas = {**sa.measurements, **sb.measurements}
    parties = None
    if sa.parties is not None or sb.parties is not None:
        parties = (sa.parties or (sa.order,)) + (sb.parties or (sb.order,))
    contexts = tuple(ea + eb for ea in sa.contexts for eb in sb.contexts)
    sc = MeasurementScenario(meas, contexts, parties)
    sr = A.semiring
    weights = {}
    for ea in sa.contexts:
        for eb in sb.contexts:
            weights[ea + eb] = {
                ga + gb: sr.mul(A.tables[ea][ga], B.tables[eb][gb])
                for ga in sa.joint_outcomes(ea) for gb in sb.joint_outcomes(eb)
            }
    return EmpiricalModel.from_weights(sc, sr, weights)
