"""Weighted functors from label trees: R-presheaves, R-relational presheaves,
change of base, internalization and fibered products.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from types import MappingProxyType
from typing import Callable, Mapping

from .errors import (
    InvalidRelation,
    InvalidTree,
    NotAnEmbedding,
    NotSynchronized,
    SchemaError,
)
from .relations import (
    RMap,
    RRelation,
    rmap_compose,
    rmap_from_weights,
    rmap_identity,
    rmap_to_rrel,
    rrel_compose,
    rrel_identity,
)
from .semiring import Distribution, Semiring
from .trees import LabelTree, TreeProjection, path_between


@dataclass(frozen=True, eq=False)
class RRelationalPresheaf:
    """A covariant functor from a label tree into R-relations.

    ``edges[y]`` is the R-relation fiber(parent(y)) -> fiber(y).
    """

    base: LabelTree
    fiber: Mapping
    edges: Mapping
    semiring: Semiring

    def __post_init__(self):
        fib = {n: frozenset(self.fiber.get(n, ())) for n in self.base.nodes}
        object.__setattr__(self, "fiber", MappingProxyType(fib))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))
        if set(self.edges) != set(self.base.parent):
            raise InvalidRelation("need exactly one R-relation per edge")
        for y, rel in self.edges.items():
            x = self.base.parent[y]
            if rel.source != fib[x] or rel.target != fib[y]:
                raise InvalidRelation(f"edge into {y!r} does not connect the stage fibers")
            if rel.semiring is not self.semiring:
                raise InvalidRelation("edge relation over the wrong semiring")

    def states(self) -> frozenset:
        """All states, qualified by their stage."""
        return frozenset((n, s) for n, ss in self.fiber.items() for s in ss)

    def edge(self, y) -> RRelation:
        return self.edges[y]

    def __eq__(self, other):
        if not isinstance(other, RRelationalPresheaf):
            return NotImplemented
        return (
            self.base == other.base
            and dict(self.fiber) == dict(other.fiber)
            and dict(self.edges) == dict(other.edges)
        )

    __hash__ = None


def eval_path(S: RRelationalPresheaf, x, y) -> RRelation:
    """Composite R-relation along the unique path x -> ... -> y."""
    path = path_between(S.base, x, y)
    rel = rrel_identity(S.semiring, S.fiber[x])
    for _, b, _ in path:
        rel = rrel_compose(rel, S.edges[b])
    return rel


def restrict_base(S: RRelationalPresheaf, coarse: LabelTree, m: Mapping) -> RRelationalPresheaf:
    """Precompose with an embedding ``m`` of ``coarse`` into ``S.base``.

    The stages of S.base outside the image are forgotten; every coarse edge
    gets the composite relation between the images of its endpoints.
    """
    m = dict(m)
    fine = S.base
    if set(m) != set(coarse.nodes):
        raise NotAnEmbedding("embedding must be defined on every coarse stage")
    if len(set(m.values())) != len(m):
        raise NotAnEmbedding("embedding is not injective")
    if not set(m.values()) <= fine.nodes:
        raise NotAnEmbedding("embedding hits unknown stages")
    if m[coarse.root] != fine.root:
        raise NotAnEmbedding("root must map to root")
    for a in coarse.nodes:
        for b in coarse.nodes:
            if coarse.leq(a, b) and not fine.leq(m[a], m[b]):
                raise NotAnEmbedding(f"order between {a!r} and {b!r} is not preserved")
    fiber = {x: S.fiber[m[x]] for x in coarse.nodes}
    edges = {y: eval_path(S, m[x], m[y]) for y, x in coarse.parent.items()}
    return RRelationalPresheaf(coarse, fiber, edges, S.semiring)


@dataclass(frozen=True, eq=False)
class RPresheaf:
    """A contravariant functor into R-maps: ``edges[y]`` is the R-map
    fiber(parent(y)) -> fiber(y), sitting on the restriction fiber(y) ->> fiber(parent(y)).
    """

    base: LabelTree
    fiber: Mapping
    edges: Mapping
    semiring: Semiring

    def __post_init__(self):
        fib = {n: frozenset(self.fiber.get(n, ())) for n in self.base.nodes}
        object.__setattr__(self, "fiber", MappingProxyType(fib))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))
        if set(self.edges) != set(self.base.parent):
            raise InvalidRelation("need exactly one R-map per edge")
        for y, rm in self.edges.items():
            x = self.base.parent[y]
            if rm.source != fib[x] or rm.target != fib[y]:
                raise InvalidRelation(f"R-map into {y!r} does not connect the stage fibers")

    def to_relational(self) -> RRelationalPresheaf:
        return RRelationalPresheaf(
            self.base, self.fiber, {y: rmap_to_rrel(m) for y, m in self.edges.items()},
            self.semiring,
        )

    def composite(self, x, y) -> RMap:
        """The R-map fiber(x) -> fiber(y) along the path (identity when x == y)."""
        out = rmap_identity(self.semiring, self.fiber[x])
        for _, b, _ in path_between(self.base, x, y):
            out = rmap_compose(out, self.edges[b])
        return out

    def vertical(self) -> RMap:
        """Weights on the bundle pi: states ->> stages, for a rooted presheaf.

        The fiber over stage y is weighted by the probability of reaching each
        state of S(y) from the unique root state.
        """
        root = self.base.root
        if len(self.fiber[root]) != 1:
            raise InvalidTree("vertical weights need a single root state")
        (s0,) = self.fiber[root]
        under = {(y, t): y for y in self.base.nodes for t in self.fiber[y]}
        weights = {}
        for y in self.base.nodes:
            comp = self.composite(root, y).fibers[s0]
            weights[y] = {(y, t): comp[t] for t in self.fiber[y]}
        return rmap_from_weights(self.semiring, under, weights)


@dataclass(frozen=True, eq=False)
class StochasticModel:
    """An R-relational presheaf over an initial tree, a family of coarser
    trees reached by projections, and a valuation of propositional letters.

    ``projections[name]`` maps the initial tree onto ``trees[name]``; the
    initial tree itself uses the identity. ``valuation`` maps a letter such
    as ``"a=0"`` to a set of (stage, state) pairs.
    """

    trees: Mapping[str, LabelTree]
    initial: str
    projections: Mapping[str, TreeProjection]
    system: RRelationalPresheaf
    valuation: Mapping[str, frozenset]
    extra_projections: tuple = ()

    def __post_init__(self):
        trees = dict(self.trees)
        object.__setattr__(self, "trees", MappingProxyType(trees))
        projs = dict(self.projections)
        if self.initial not in trees:
            raise SchemaError(f"initial tree {self.initial!r} is not in the family")
        L0 = trees[self.initial]
        if self.system.base != L0:
            raise SchemaError("the system must live over the initial tree")
        projs.setdefault(self.initial, TreeProjection.identity(L0))
        for name in trees:
            if name not in projs:
                raise SchemaError(f"tree {name!r} is not reached by a projection")
            p = projs[name]
            if p.source != L0 or p.target != trees[name]:
                raise SchemaError(f"projection onto {name!r} has the wrong endpoints")
        object.__setattr__(self, "projections", MappingProxyType(projs))
        states = self.system.states()
        val = {k: frozenset(v) for k, v in self.valuation.items()}
        for k, v in val.items():
            if not v <= states:
                raise SchemaError(f"valuation of {k!r} names unknown states")
        object.__setattr__(self, "valuation", MappingProxyType(val))

    @property
    def base(self) -> LabelTree:
        return self.trees[self.initial]

    @property
    def semiring(self) -> Semiring:
        return self.system.semiring

    def states(self) -> frozenset:
        return self.system.states()

    def root_states(self) -> list:
        r = self.base.root
        return sorted(((r, s) for s in self.system.fiber[r]), key=repr)


def internalize(pi_R: RMap, p_under: Mapping, p_weights: Mapping, semiring: Semiring | None = None) -> RMap:
    """Compose a weighted bundle with explicitly weighted external choices.

    ``pi_R`` is an R-map from stages of L0 to states (on pi: S ->> L0);
    ``p_under`` is the surjection L0 ->> L1 and ``p_weights`` gives, for
    every stage of L1, the weights of the L0 stages above it. The result is
    the weighted bundle p . pi over L1.
    """
    sr = semiring or pi_R.semiring
    p_R = rmap_from_weights(sr, p_under, p_weights)
    return rmap_compose(p_R, pi_R)


@dataclass(frozen=True)
class FiberedProduct:
    """Result of :func:`fibered_product`: the product presheaf plus the two
    projection pairs (stage map, state map) onto its factors."""

    presheaf: RRelationalPresheaf
    stage_to_left: Mapping
    stage_to_right: Mapping
    state_to_left: Mapping
    state_to_right: Mapping


def _default_label(a: str, b: str) -> str:
    return a + b


def fibered_product(
    A: RRelationalPresheaf,
    B: RRelationalPresheaf,
    clock: LabelTree,
    p_A: Mapping,
    p_B: Mapping,
    rename: Callable[[str, str], str] = _default_label,
) -> FiberedProduct:
    """Synchronized product of two weighted presheaves over a linear clock.

    Stages of the product are pairs of stages at the same clock tick, states
    are pairs of states, relations and weights are taken componentwise. No
    correlation is introduced.
    """
    if A.semiring is not B.semiring:
        raise NotSynchronized("factors over different semirings")
    sr = A.semiring
    if any(len(clock.children(n)) > 1 for n in clock.nodes):
        raise NotSynchronized("the clock tree must be linear")
    for side, S, p in (("left", A, p_A), ("right", B, p_B)):
        if set(p) != set(S.base.nodes):
            raise NotSynchronized(f"{side} clock leg must be total")
        for n in S.base.nodes:
            if p[n] not in clock.nodes or clock.depth(p[n]) != S.base.depth(n):
                raise NotSynchronized(f"{side} stage {n!r} is off the clock")
    LA, LB = A.base, B.base
    root = (LA.root, LB.root)
    parent, label = {}, {}
    frontier = [root]
    nodes = [root]
    while frontier:
        nxt = []
        for x, y in frontier:
            for cx in LA.children(x):
                for cy in LB.children(y):
                    node = (cx, cy)
                    parent[node] = (x, y)
                    label[node] = rename(LA.label[cx], LB.label[cy])
                    nxt.append(node)
        nodes.extend(nxt)
        frontier = nxt
    tree = LabelTree(root, parent, label)
    fiber = {(x, y): frozenset(product(A.fiber[x], B.fiber[y])) for x, y in nodes}
    edges = {}
    for (cx, cy), (x, y) in parent.items():
        ra, rb = A.edges[cx], B.edges[cy]
        arrows = {
            (s, t): frozenset(product(ra.arrows[s], rb.arrows[t])) for s, t in fiber[(x, y)]
        }
        weights = {}
        for s, t in fiber[(x, y)]:
            da, db = ra.weights[s], rb.weights[t]
            weights[(s, t)] = Distribution(
                sr, {(u, v): sr.mul(da[u], db[v]) for u, v in arrows[(s, t)]}
            )
        edges[(cx, cy)] = RRelation(fiber[(x, y)], fiber[(cx, cy)], arrows, weights, sr)
    presheaf = RRelationalPresheaf(tree, fiber, edges, sr)
    return FiberedProduct(
        presheaf,
        MappingProxyType({n: n[0] for n in tree.nodes}),
        MappingProxyType({n: n[1] for n in tree.nodes}),
        MappingProxyType({(n, st): (n[0], st[0]) for n in tree.nodes for st in fiber[n]}),
        MappingProxyType({(n, st): (n[1], st[1]) for n in tree.nodes for st in fiber[n]}),
    )


def clock_map(S: RRelationalPresheaf, clock: LabelTree) -> dict:
    """Send every stage to the clock tick at the same depth."""
    ticks = {clock.depth(n): n for n in clock.nodes}
    try:
        return {n: ticks[S.base.depth(n)] for n in S.base.nodes}
    except KeyError:
        raise NotSynchronized("clock is shorter than the tree") from None
