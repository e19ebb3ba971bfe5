"""Label trees, finite posets, fibrations, and set-valued presheaves over trees.

A :class:`LabelTree` is stored parent-pointer style: every non-root stage
knows its parent and the label of the edge that leads into it. Edges are
therefore identified by their target stage.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from types import MappingProxyType
from typing import Hashable, Iterable, Mapping

from .errors import (
    InvalidProjection,
    InvalidTree,
    NotAFibration,
    NotComparable,
)

Node = Hashable


@dataclass(frozen=True, eq=False)
class LabelTree:
    root: Node
    parent: Mapping[Node, Node]
    label: Mapping[Node, str]

    def __post_init__(self):
        parent = dict(self.parent)
        label = dict(self.label)
        if self.root in parent:
            raise InvalidTree("the root has no parent")
        if set(parent) != set(label):
            raise InvalidTree("every non-root stage needs exactly one incoming label")
        nodes = {self.root, *parent}
        for child, par in parent.items():
            if par not in nodes:
                raise InvalidTree(f"parent {par!r} of {child!r} is not a stage")
        for n in parent:
            seen = {n}
            cur = n
            while cur != self.root:
                cur = parent[cur]
                if cur in seen:
                    raise InvalidTree(f"cycle through {n!r}")
                seen.add(cur)
        children: dict = {n: [] for n in nodes}
        for child, par in parent.items():
            children[par].append(child)
        for par, kids in children.items():
            labels = [label[k] for k in kids]
            if len(labels) != len(set(labels)):
                raise InvalidTree(f"sibling edges below {par!r} repeat a label")
        object.__setattr__(self, "parent", MappingProxyType(parent))
        object.__setattr__(self, "label", MappingProxyType(label))
        object.__setattr__(
            self, "_children",
            {k: tuple(sorted(v, key=repr)) for k, v in children.items()},
        )
        object.__setattr__(self, "_nodes", frozenset(nodes))

    @classmethod
    def from_edges(cls, root, edges: Iterable[tuple[Node, Node, str]]) -> "LabelTree":
        parent, label = {}, {}
        for src, dst, lbl in edges:
            if dst in parent:
                raise InvalidTree(f"stage {dst!r} has two parents")
            parent[dst] = src
            label[dst] = lbl
        return cls(root, parent, label)

    @property
    def nodes(self) -> frozenset:
        return self._nodes

    def children(self, node) -> tuple:
        return self._children[node]

    def edges(self) -> list[tuple[Node, Node, str]]:
        return [(self.parent[n], n, self.label[n]) for n in sorted(self.parent, key=repr)]

    def child_by_label(self, node, lbl):
        for c in self._children[node]:
            if self.label[c] == lbl:
                return c
        return None

    def ancestors(self, node) -> list:
        """Stages from ``node`` up to the root, inclusive at both ends."""
        out = [node]
        while node != self.root:
            node = self.parent[node]
            out.append(node)
        return out

    def depth(self, node) -> int:
        return len(self.ancestors(node)) - 1

    def leq(self, x, y) -> bool:
        """x <= y iff x is an ancestor-or-self of y."""
        return x in self.ancestors(y)

    def leaves(self) -> list:
        return [n for n in sorted(self._nodes, key=repr) if not self._children[n]]

    def poset(self) -> "Poset":
        return Poset(
            self._nodes,
            frozenset((a, n) for n in self._nodes for a in self.ancestors(n)),
        )

    def __eq__(self, other):
        if not isinstance(other, LabelTree):
            return NotImplemented
        return (self.root, dict(self.parent), dict(self.label)) == (
            other.root, dict(other.parent), dict(other.label))

    def __hash__(self):
        return hash((self.root, frozenset(self.parent.items())))

    def __repr__(self):
        return f"LabelTree(root={self.root!r}, edges={self.edges()!r})"

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "edges": [{"from": s, "to": d, "label": lbl} for s, d, lbl in self.edges()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LabelTree":
        return cls.from_edges(
            data["root"], [(e["from"], e["to"], e["label"]) for e in data.get("edges", [])]
        )


def path_between(tree: LabelTree, x, y) -> list[tuple[Node, Node, str]]:
    """The unique edge path from x up-to-down to y."""
    anc = tree.ancestors(y)
    if x not in anc:
        raise NotComparable(f"{x!r} is not below-or-equal to {y!r}")
    chain = anc[: anc.index(x) + 1][::-1]
    return [(a, b, tree.label[b]) for a, b in zip(chain, chain[1:])]


def linear_tree(depth: int, prefix: str = "t") -> LabelTree:
    """The clock tree t0 -> t1 -> ... of the given depth."""
    return LabelTree.from_edges(
        f"{prefix}0", [(f"{prefix}{k}", f"{prefix}{k + 1}", f"{k + 1}") for k in range(depth)]
    )


@dataclass(frozen=True)
class Poset:
    """A finite poset given by its (reflexive, transitive) order relation."""

    elements: frozenset
    order: frozenset  # pairs (a, b) meaning a <= b

    def leq(self, a, b) -> bool:
        return (a, b) in self.order

    def below(self, t) -> list:
        return [s for s in self.elements if (s, t) in self.order]

    def is_partial_order(self) -> bool:
        els = self.elements
        if any((a, a) not in self.order for a in els):
            return False
        for a, b in self.order:
            if a != b and (b, a) in self.order:
                return False
        for a, b in self.order:
            for c in els:
                if (b, c) in self.order and (a, c) not in self.order:
                    return False
        return True

    def covers(self) -> set:
        """Hasse-diagram edges (a, b): a < b with nothing strictly between."""
        out = set()
        for a, b in self.order:
            if a == b:
                continue
            if not any(
                c not in (a, b) and (a, c) in self.order and (c, b) in self.order
                for c in self.elements
            ):
                out.add((a, b))
        return out

    def is_forest(self) -> bool:
        """Every element's down-set is a chain."""
        for t in self.elements:
            down = self.below(t)
            for a, b in product(down, down):
                if not (self.leq(a, b) or self.leq(b, a)):
                    return False
        return True

    def is_tree(self) -> bool:
        minimal = [a for a in self.elements if self.below(a) == [a]]
        return self.is_forest() and len(minimal) == 1


@dataclass(frozen=True)
class MonotoneMap:
    source: Poset
    target: Poset
    mapping: Mapping

    def is_monotone(self) -> bool:
        m = self.mapping
        return all(
            self.target.leq(m[a], m[b])
            for a, b in self.source.order
            if a in m and b in m
        )

    def is_total(self) -> bool:
        return all(a in self.mapping for a in self.source.elements)


def fibration_defect(f: MonotoneMap):
    """First (x, t, lifts) violating unique lifting, or None."""
    if not f.is_total() or not f.is_monotone():
        return ("not a total monotone map", None, None)
    fibers: dict = {}
    for s in f.source.elements:
        fibers.setdefault(f.mapping[s], []).append(s)
    for t in sorted(f.source.elements, key=repr):
        base = f.mapping[t]
        for x in sorted(f.target.elements, key=repr):
            if not f.target.leq(x, base):
                continue
            lifts = [s for s in fibers.get(x, []) if f.source.leq(s, t)]
            if len(lifts) != 1:
                return (x, t, lifts)
    return None


def is_fibration(f: MonotoneMap) -> bool:
    """Whenever x <= f(t) there is exactly one s over x with s <= t."""
    return fibration_defect(f) is None


@dataclass(frozen=True, eq=False)
class Presheaf:
    """A contravariant Sets-valued functor over a label tree.

    ``restrict[y]`` is the function fiber(y) -> fiber(parent(y)) assigned to
    the edge into ``y``; composites along longer paths are computed.
    """

    base: LabelTree
    fiber: Mapping[Node, frozenset]
    restrict: Mapping[Node, Mapping]

    def __post_init__(self):
        fib = {n: frozenset(self.fiber.get(n, ())) for n in self.base.nodes}
        res = {}
        for y, par in self.base.parent.items():
            r = dict(self.restrict.get(y, {}))
            if set(r) != set(fib[y]):
                raise InvalidTree(f"restriction into {y!r} must be total on its fiber")
            if not set(r.values()) <= fib[par]:
                raise InvalidTree(f"restriction into {y!r} leaves the parent fiber")
            res[y] = MappingProxyType(r)
        object.__setattr__(self, "fiber", MappingProxyType(fib))
        object.__setattr__(self, "restrict", MappingProxyType(res))

    def restriction(self, x, y, t):
        """S(x, y)(t) for x <= y and t in S(y)."""
        for a, b, _ in reversed(path_between(self.base, x, y)):
            t = self.restrict[b][t]
        return t

    def __eq__(self, other):
        if not isinstance(other, Presheaf):
            return NotImplemented
        return (
            self.base == other.base
            and dict(self.fiber) == dict(other.fiber)
            and {k: dict(v) for k, v in self.restrict.items()}
            == {k: dict(v) for k, v in other.restrict.items()}
        )

    __hash__ = None


@dataclass(frozen=True)
class Fibration:
    """A fibration together with the base tree it lives over."""

    map: MonotoneMap
    base: LabelTree

    @property
    def total(self) -> Poset:
        return self.map.source


def presheaf_to_fibration(S: Presheaf) -> Fibration:
    """Dependent-sum construction: elements (x, s), ordered by restriction."""
    L = S.base
    elements = frozenset((x, s) for x in L.nodes for s in S.fiber[x])
    order = set()
    for (y, t) in elements:
        for x in L.ancestors(y):
            order.add(((x, S.restriction(x, y, t)), (y, t)))
    total = Poset(elements, frozenset(order))
    pi = MonotoneMap(total, L.poset(), MappingProxyType({e: e[0] for e in elements}))
    return Fibration(pi, L)


def fibration_to_presheaf(fib: Fibration) -> Presheaf:
    """Fibers are preimages; restriction picks the unique lift below."""
    defect = fibration_defect(fib.map)
    if defect is not None:
        raise NotAFibration(f"unique-lift condition fails: {defect!r}")
    L = fib.base
    pi = fib.map.mapping
    fibers: dict = {x: set() for x in L.nodes}
    for s in fib.total.elements:
        fibers[pi[s]].add(s)
    restrict = {}
    for y, x in L.parent.items():
        restrict[y] = {
            t: next(s for s in fibers[x] if fib.total.leq(s, t)) for t in fibers[y]
        }
    return Presheaf(L, {x: frozenset(v) for x, v in fibers.items()}, restrict)


def _canonical_forms(S: Presheaf) -> list[str]:
    L = S.base
    kids: dict = {}
    for y in L.parent:
        for t in S.fiber[y]:
            kids.setdefault((L.parent[y], S.restrict[y][t]), []).append((y, t))

    def canon(node, elem) -> str:
        inner = sorted(canon(y, t) for y, t in kids.get((node, elem), []))
        return f"{node!r}(" + ",".join(inner) + ")"

    return sorted(canon(L.root, s) for s in S.fiber[L.root])


def presheaves_isomorphic(S: Presheaf, T: Presheaf) -> bool:
    """Isomorphism over the identity on the (shared) base tree.

    Over a tree, a presheaf is a forest of elements labelled by stages, so
    comparing canonical forms of the root-fiber subtrees decides it exactly.
    Elements not below any root element cannot exist since restriction
    maps are total.
    """
    if S.base != T.base:
        return False
    if any(len(S.fiber[x]) != len(T.fiber[x]) for x in S.base.nodes):
        return False
    return _canonical_forms(S) == _canonical_forms(T)


def natural_map_to_monotone(S: Presheaf, T: Presheaf, alpha: Mapping[Node, Mapping]) -> MonotoneMap:
    """The map of total posets induced by a natural transformation S => T."""
    for y, par in S.base.parent.items():
        for t in S.fiber[y]:
            if alpha[par][S.restrict[y][t]] != T.restrict[y][alpha[y][t]]:
                raise InvalidTree(f"alpha is not natural on the edge into {y!r}")
    fs, ft = presheaf_to_fibration(S), presheaf_to_fibration(T)
    mapping = {(x, s): (x, alpha[x][s]) for (x, s) in fs.total.elements}
    return MonotoneMap(fs.total, ft.total, MappingProxyType(mapping))


@dataclass(frozen=True, eq=False)
class TreeProjection:
    """A partial, surjective, order-preserving map between label trees.

    Undefined stages are simply absent from ``node_map``. Edges either map to
    edges of the target or are undefined.
    """

    source: LabelTree
    target: LabelTree
    node_map: Mapping[Node, Node]

    def __post_init__(self):
        m = dict(self.node_map)
        object.__setattr__(self, "node_map", MappingProxyType(m))
        src, tgt = self.source, self.target
        if not set(m) <= src.nodes or not set(m.values()) <= tgt.nodes:
            raise InvalidProjection("node map refers to unknown stages")
        if set(m.values()) != tgt.nodes:
            raise InvalidProjection("projection is not onto the target tree")
        if m.get(src.root) != tgt.root:
            raise InvalidProjection("root must map to root")
        for y, x in src.parent.items():
            if x in m and y in m and tgt.parent.get(m[y]) != m[x]:
                raise InvalidProjection(f"edge into {y!r} does not map to an edge")
        for a in m:
            for b in m:
                if src.leq(a, b) and not tgt.leq(m[a], m[b]):
                    raise InvalidProjection("projection is not order preserving")

    def edge_label(self, child):
        """Target label of the source edge into ``child``, or None if undefined."""
        x = self.source.parent.get(child)
        if x is None or x not in self.node_map or child not in self.node_map:
            return None
        return self.target.label[self.node_map[child]]

    def then(self, other: "TreeProjection") -> "TreeProjection":
        """Composite self followed by other, defined where both legs are."""
        m = {
            a: other.node_map[b]
            for a, b in self.node_map.items()
            if b in other.node_map
        }
        return TreeProjection(self.source, other.target, m)

    @classmethod
    def identity(cls, tree: LabelTree) -> "TreeProjection":
        return cls(tree, tree, {n: n for n in tree.nodes})
