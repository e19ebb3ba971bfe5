"""R-maps, R-relations and stochastic maps, with their compositions.

An :class:`RMap` from X to Y sits on a surjection Y -> X (note the reversed
direction) and carries a distribution on each fiber. An :class:`RRelation`
from X to Y sits on an entire relation X -> Y and carries, per source, a
distribution whose support is contained in the related targets. The one
place where the direction flips is :func:`rmap_to_rrel`.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .errors import InvalidRelation, Mismatch, MissingWeights, ensure
from .semiring import Distribution, Semiring, dist_bind, dist_unit


def _freeze_sets(mapping) -> Mapping:
    return MappingProxyType({k: frozenset(v) for k, v in mapping.items()})


@dataclass(frozen=True, eq=False)
class RMap:
    source: frozenset          # X
    target: frozenset          # Y
    under: Mapping             # surjection Y -> X
    fibers: Mapping            # s in X -> Distribution on under^-1(s)
    semiring: Semiring

    def __post_init__(self):
        object.__setattr__(self, "source", frozenset(self.source))
        object.__setattr__(self, "target", frozenset(self.target))
        object.__setattr__(self, "under", MappingProxyType(dict(self.under)))
        object.__setattr__(self, "fibers", MappingProxyType(dict(self.fibers)))
        if set(self.under) != set(self.target):
            raise InvalidRelation("underlying map must be total on the target set")
        if set(self.under.values()) != set(self.source):
            raise InvalidRelation("underlying map must be onto the source set")
        if set(self.fibers) != set(self.source):
            raise InvalidRelation("need one fiber distribution per source point")
        pre = self.preimages()
        for s, d in self.fibers.items():
            if d.semiring is not self.semiring:
                raise InvalidRelation("fiber distribution over the wrong semiring")
            if d.carrier != pre[s]:
                raise InvalidRelation(f"fiber over {s!r} must be carried by its preimage")

    def preimages(self) -> dict:
        pre: dict = {s: set() for s in self.source}
        for y, s in self.under.items():
            pre[s].add(y)
        return {s: frozenset(v) for s, v in pre.items()}

    def __eq__(self, other):
        if not isinstance(other, RMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and dict(self.under) == dict(other.under)
            and dict(self.fibers) == dict(other.fibers)
        )

    __hash__ = None

    def __repr__(self):
        return f"RMap({sorted(self.source, key=repr)} <- {sorted(self.target, key=repr)})"


def rmap_from_weights(semiring: Semiring, under: Mapping, weights: Mapping) -> RMap:
    """Build an RMap from a surjection Y->>X and nested {s: {y: w}} weights.

    Singleton fibers may be omitted (they can only carry the point mass);
    any other missing fiber raises MissingWeights.
    """
    under = dict(under)
    source = frozenset(under.values())
    pre: dict = {s: [] for s in source}
    for y, s in under.items():
        pre[s].append(y)
    fibers = {}
    for s, ys in pre.items():
        if s not in weights:
            if len(ys) != 1:
                raise MissingWeights(f"no weights for the fiber over {s!r}")
            fibers[s] = Distribution(semiring, {ys[0]: semiring.one})
            continue
        w = dict(weights[s])
        if not set(w) <= set(ys):
            raise MissingWeights(f"weights over {s!r} name points outside its fiber")
        fibers[s] = Distribution(semiring, {y: w.get(y, semiring.zero) for y in ys})
    return RMap(source, frozenset(under), under, fibers, semiring)


def rmap_identity(semiring: Semiring, points) -> RMap:
    points = frozenset(points)
    return RMap(points, points, {x: x for x in points},
                {x: dist_unit(semiring, x) for x in points}, semiring)


def rmap_compose(g: RMap, f: RMap) -> RMap:
    """Composite X -> Z of g: X -> Y (on Y->>X) and f: Y -> Z (on Z->>Y).

    Weight of u over s is g's weight of f(u) times f's weight of u.
    """
    if g.target != f.source:
        raise Mismatch("middle sets of the two R-maps differ")
    if g.semiring is not f.semiring:
        raise Mismatch("R-maps over different semirings")
    sr = g.semiring
    under = {u: g.under[y] for u, y in f.under.items()}
    fpre = f.preimages()
    fibers = {}
    gpre = g.preimages()
    for s in g.source:
        ws = {}
        for y in gpre[s]:
            for u in fpre[y]:
                ws[u] = sr.mul(g.fibers[s][y], f.fibers[y][u])
        total = sr.sum(ws.values())
        ensure(sr.eq(total, sr.one), f"composite fiber over {s!r} sums to {total!r}")
        fibers[s] = Distribution(sr, ws)
    return RMap(g.source, f.target, under, fibers, sr)


@dataclass(frozen=True, eq=False)
class RRelation:
    source: frozenset          # X
    target: frozenset          # Y
    arrows: Mapping            # s -> frozenset of related t (entire)
    weights: Mapping           # s -> Distribution, support within arrows[s]
    semiring: Semiring

    def __post_init__(self):
        object.__setattr__(self, "source", frozenset(self.source))
        object.__setattr__(self, "target", frozenset(self.target))
        arrows = {s: frozenset(self.arrows.get(s, ())) for s in self.source}
        object.__setattr__(self, "arrows", MappingProxyType(arrows))
        object.__setattr__(self, "weights", MappingProxyType(dict(self.weights)))
        if set(self.weights) != set(self.source):
            raise InvalidRelation("need one distribution per source point")
        for s in self.source:
            if not arrows[s]:
                raise InvalidRelation(f"relation is not entire at {s!r}")
            if not arrows[s] <= self.target:
                raise InvalidRelation(f"arrows from {s!r} leave the target set")
            d = self.weights[s]
            if d.semiring is not self.semiring:
                raise InvalidRelation("distribution over the wrong semiring")
            if not d.support <= arrows[s]:
                raise InvalidRelation(f"support at {s!r} is not within the related states")

    def pairs(self) -> frozenset:
        return frozenset((s, t) for s, ts in self.arrows.items() for t in ts)

    def __eq__(self, other):
        if not isinstance(other, RRelation):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and dict(self.arrows) == dict(other.arrows)
            and dict(self.weights) == dict(other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return f"RRelation({len(self.source)} -> {len(self.target)}, {len(self.pairs())} arrows)"


def rrel_make(semiring: Semiring, source, target, arrows: Mapping, weights: Mapping) -> RRelation:
    """Build from arrow sets and nested {s: {t: w}} weights (missing weights are zero)."""
    dists = {}
    for s in source:
        ws = dict(weights.get(s, {}))
        dists[s] = Distribution(
            semiring, {t: ws.get(t, semiring.zero) for t in set(arrows.get(s, ())) | set(ws)}
        )
    return RRelation(frozenset(source), frozenset(target), _freeze_sets(arrows), dists, semiring)


def rrel_identity(semiring: Semiring, points) -> RRelation:
    points = frozenset(points)
    return RRelation(points, points, {x: {x} for x in points},
                     {x: dist_unit(semiring, x) for x in points}, semiring)


def rrel_compose(f: RRelation, g: RRelation) -> RRelation:
    """g after f: relational composite, weights summed over the middle states."""
    if f.target != g.source:
        raise Mismatch("middle sets of the two R-relations differ")
    if f.semiring is not g.semiring:
        raise Mismatch("R-relations over different semirings")
    sr = f.semiring
    arrows = {s: frozenset().union(*(g.arrows[t] for t in f.arrows[s])) for s in f.source}
    weights = {}
    for s in f.source:
        d = dist_bind(f.weights[s], g.weights)
        ensure(d.support <= arrows[s], "composite violates the support condition")
        weights[s] = Distribution(sr, {u: d[u] for u in arrows[s]})
    return RRelation(f.source, g.target, arrows, weights, sr)


def rmap_to_rrel(m: RMap) -> RRelation:
    """Flip an R-map's surjection into a relation, keeping the fiber weights."""
    pre = m.preimages()
    return RRelation(m.source, m.target, pre, dict(m.fibers), m.semiring)


@dataclass(frozen=True, eq=False)
class StochasticMap:
    source: frozenset
    target: frozenset
    kernel: Mapping            # s -> Distribution on target
    semiring: Semiring

    def __post_init__(self):
        object.__setattr__(self, "source", frozenset(self.source))
        object.__setattr__(self, "target", frozenset(self.target))
        object.__setattr__(self, "kernel", MappingProxyType(dict(self.kernel)))
        if set(self.kernel) != set(self.source):
            raise InvalidRelation("kernel must be defined on every source point")
        for s, d in self.kernel.items():
            if not d.support <= self.target:
                raise InvalidRelation(f"kernel at {s!r} leaves the target set")

    def __eq__(self, other):
        if not isinstance(other, StochasticMap):
            return NotImplemented
        return (self.source, self.target, dict(self.kernel)) == (
            other.source, other.target, dict(other.kernel))

    __hash__ = None


def stoch_compose(f: StochasticMap, g: StochasticMap) -> StochasticMap:
    if f.target != g.source:
        raise Mismatch("middle sets of the two stochastic maps differ")
    return StochasticMap(
        f.source, g.target, {s: dist_bind(f.kernel[s], g.kernel) for s in f.source}, f.semiring
    )


def rrel_retract(r: RRelation) -> StochasticMap:
    """Forget the underlying relation, keeping the kernels."""
    return StochasticMap(r.source, r.target, dict(r.weights), r.semiring)


def stoch_section(k: StochasticMap) -> RRelation:
    """Relate each source exactly to the support of its kernel."""
    return RRelation(
        k.source, k.target, {s: d.support for s, d in k.kernel.items()},
        {s: Distribution(k.semiring, dict(d.items())) for s, d in k.kernel.items()},
        k.semiring,
    )
