import pytest

from contextua.errors import InvalidProjection, InvalidTree, NotAFibration, NotComparable
from contextua.trees import (
    Fibration,
    LabelTree,
    MonotoneMap,
    Poset,
    Presheaf,
    TreeProjection,
    fibration_to_presheaf,
    is_fibration,
    linear_tree,
    natural_map_to_monotone,
    path_between,
    presheaf_to_fibration,
    presheaves_isomorphic,
)

from generators import break_bundle, rand_presheaf, rand_tree, rng


def alice_tree() -> LabelTree:
    return LabelTree.from_edges("x", [("x", "y", "a"), ("x", "z", "a'")])


def alice_presheaf() -> Presheaf:
    """One root state, two outcomes under each of a and a'."""
    L = alice_tree()
    return Presheaf(
        L,
        {"x": {"s"}, "y": {"y0", "y1"}, "z": {"z0", "z1"}},
        {"y": {"y0": "s", "y1": "s"}, "z": {"z0": "s", "z1": "s"}},
    )


def identity_map(tree: LabelTree) -> MonotoneMap:
    P = tree.poset()
    return MonotoneMap(P, P, {n: n for n in tree.nodes})


# trees --------------------------------------------------------------------


def test_tree_validation():
    with pytest.raises(InvalidTree):
        LabelTree.from_edges("r", [("r", "u", "a"), ("r", "v", "a")])
    with pytest.raises(InvalidTree):
        LabelTree("r", {"u": "v", "v": "u"}, {"u": "a", "v": "b"})
    with pytest.raises(InvalidTree):
        LabelTree.from_edges("r", [("r", "u", "a"), ("q", "u", "b")])


def test_random_trees_are_trees():
    r = rng(21)
    for _ in range(50):
        t = rand_tree(r)
        assert len(t.edges()) == len(t.nodes) - 1
        P = t.poset()
        assert P.is_partial_order() and P.is_tree()
        for x in t.nodes:
            for y in t.nodes:
                if t.leq(x, y):
                    path = path_between(t, x, y)
                    assert len(path) == t.depth(y) - t.depth(x)


def test_tree_json_round_trip():
    t = alice_tree()
    assert LabelTree.from_json(t.to_json()) == t


def test_path_between():
    t = alice_tree()
    assert path_between(t, "x", "x") == []
    assert path_between(t, "x", "z") == [("x", "z", "a'")]
    with pytest.raises(NotComparable):
        path_between(t, "y", "z")


def test_path_through_stage():
    t = LabelTree.from_edges("x", [("x", "y", "i"), ("y", "z_ab", "ab"), ("y", "z_ab'", "ab'")])
    assert [lbl for _, _, lbl in path_between(t, "x", "z_ab")] == ["i", "ab"]


def test_linear_tree():
    t = linear_tree(2)
    assert t.depth("t2") == 2 and t.leaves() == ["t2"]


# fibrations ---------------------------------------------------------------


def test_identity_is_fibration():
    r = rng(22)
    for _ in range(20):
        assert is_fibration(identity_map(rand_tree(r)))


def test_missing_predecessor_is_not_fibration():
    # two states over a one-edge tree; the upper one has no state below it
    L = LabelTree.from_edges("x", [("x", "y", "e")])
    S = Poset(frozenset({"s", "t"}), frozenset({("s", "s"), ("t", "t")}))
    assert not is_fibration(MonotoneMap(S, L.poset(), {"s": "x", "t": "y"}))


def test_alice_bundle_is_fibration():
    fib = presheaf_to_fibration(alice_presheaf())
    assert len(fib.total.elements) == 5
    assert is_fibration(fib.map)
    assert fib.total.is_tree()


def test_constant_presheaf():
    L = LabelTree.from_edges("x", [("x", "y", "e")])
    S = Presheaf(L, {"x": {"s"}, "y": {"s"}}, {"y": {"s": "s"}})
    fib = presheaf_to_fibration(S)
    assert sorted(fib.total.elements) == [("x", "s"), ("y", "s")]
    assert all(len([e for e in fib.total.elements if e[0] == n]) == 1 for n in L.nodes)


def test_alice_round_trip():
    S = alice_presheaf()
    back = fibration_to_presheaf(presheaf_to_fibration(S))
    assert presheaves_isomorphic(S, back)
    assert {n: len(back.fiber[n]) for n in S.base.nodes} == {"x": 1, "y": 2, "z": 2}


def test_round_trip_random():
    r = rng(23)
    for _ in range(50):
        S = rand_presheaf(r, rand_tree(r, 6))
        fib = presheaf_to_fibration(S)
        assert is_fibration(fib.map)
        assert fib.total.is_tree() or len(S.fiber[S.base.root]) > 1
        assert fib.total.is_forest()
        assert presheaves_isomorphic(fibration_to_presheaf(fib), S)


def test_round_trip_from_fibration_side():
    r = rng(24)
    for _ in range(20):
        fib = presheaf_to_fibration(rand_presheaf(r, rand_tree(r, 5)))
        again = presheaf_to_fibration(fibration_to_presheaf(fib))
        # renaming: elements of ``again`` are (stage, element-of-fib)
        assert {e[1] for e in again.total.elements} == set(fib.total.elements)
        assert all(
            again.total.leq(a, b) == fib.total.leq(a[1], b[1])
            for a in again.total.elements for b in again.total.elements
        )


def test_broken_bundles_rejected():
    r = rng(25)
    broken = 0
    while broken < 20:
        tree = rand_tree(r, 6)
        if len(tree.nodes) < 2:
            continue
        fib = presheaf_to_fibration(rand_presheaf(r, tree))
        bad = break_bundle(r, fib)
        assert not is_fibration(bad)
        with pytest.raises(NotAFibration):
            fibration_to_presheaf(Fibration(bad, tree))
        broken += 1


def test_natural_maps_induce_fibrations():
    r = rng(26)
    for _ in range(30):
        tree = rand_tree(r, 5)
        T = rand_presheaf(r, tree)
        # S copies some elements of T; alpha collapses the copies
        fiber = {x: {(t, k) for t in T.fiber[x] for k in range(r.randint(1, 2))} for x in tree.nodes}
        restrict = {}
        for y in tree.parent:
            restrict[y] = {(t, k): (T.restrict[y][t], 0) for (t, k) in fiber[y]}
        S = Presheaf(tree, fiber, restrict)
        alpha = {x: {(t, k): t for (t, k) in fiber[x]} for x in tree.nodes}
        f = natural_map_to_monotone(S, T, alpha)
        assert f.is_monotone()
        assert is_fibration(f)


def test_unnatural_map_rejected():
    S = alice_presheaf()
    L = S.base
    T = Presheaf(L, {"x": {"p", "q"}, "y": {"y0"}, "z": {"z0"}}, {"y": {"y0": "p"}, "z": {"z0": "q"}})
    alpha = {"x": {"s": "p"}, "y": {"y0": "y0", "y1": "y0"}, "z": {"z0": "z0", "z1": "z0"}}
    with pytest.raises(InvalidTree):
        natural_map_to_monotone(S, T, alpha)


# projections --------------------------------------------------------------


def test_projection_checks():
    L = alice_tree()
    clock = linear_tree(1)
    p = TreeProjection(L, clock, {"x": "t0", "y": "t1", "z": "t1"})
    assert p.edge_label("y") == "1"
    with pytest.raises(InvalidProjection):
        TreeProjection(L, clock, {"x": "t0"})
    with pytest.raises(InvalidProjection):
        TreeProjection(L, clock, {"x": "t1", "y": "t0"})


def test_partial_projection_composition():
    L = LabelTree.from_edges("x", [("x", "y", "i"), ("y", "z", "ab")])
    mid = LabelTree.from_edges("x", [("x", "z", "ab")])
    p = TreeProjection(L, mid, {"x": "x", "z": "z"})
    assert p.edge_label("y") is None
    assert p.edge_label("z") is None  # y is undefined, so the edge y->z is
    q = p.then(TreeProjection.identity(mid))
    assert dict(q.node_map) == {"x": "x", "z": "z"}
