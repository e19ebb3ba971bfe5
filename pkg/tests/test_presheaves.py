from fractions import Fraction

import pytest

from contextua.errors import MissingWeights, NotAnEmbedding, NotComparable, NotSynchronized
from contextua.hidden import STAGE, build_hv_model, forget_stage
from contextua.presheaves import (
    RRelationalPresheaf,
    clock_map,
    eval_path,
    fibered_product,
    internalize,
    restrict_base,
)
from contextua.relations import RRelation, rrel_compose, rrel_identity
from contextua.scenarios import (
    ROOT,
    EmpiricalModel,
    empirical_presheaf,
    empirical_rpresheaf,
    find_global_section,
    leaf_node,
    marginalize,
    nkl_scenario,
)
from contextua.semiring import BOOL, NONNEG
from contextua.trees import LabelTree, linear_tree

from generators import rand_product, rand_rrel, rand_tree, rng

F = Fraction


def alice(p0=F(1, 3), q0=F(3, 4), semiring=NONNEG) -> EmpiricalModel:
    sc = nkl_scenario(1, 2, 2)
    a, a2 = sc.contexts
    if semiring is BOOL:
        return EmpiricalModel.from_weights(sc, BOOL, {a: {("0",): True, ("1",): True}, a2: {("0",): True}})
    return EmpiricalModel.from_weights(sc, NONNEG, {a: {("0",): p0, ("1",): 1 - p0}, a2: {("0",): q0, ("1",): 1 - q0}})


def rand_system(r, tree: LabelTree, sr=NONNEG) -> RRelationalPresheaf:
    fiber = {n: [f"{n}.{i}" for i in range(r.randint(1, 3))] for n in tree.nodes}
    edges = {y: rand_rrel(r, sr, fiber[x], fiber[y]) for y, x in tree.parent.items()}
    return RRelationalPresheaf(tree, fiber, edges, sr)


def chain_tree(n: int) -> LabelTree:
    return LabelTree.from_edges("c0", [(f"c{k}", f"c{k + 1}", f"e{k}") for k in range(n)])


# eval_path ----------------------------------------------------------------


def test_eval_path_identity():
    S = empirical_presheaf(alice())
    assert eval_path(S, ROOT, ROOT) == rrel_identity(NONNEG, {"s"})
    with pytest.raises(NotComparable):
        eval_path(S, leaf_node("a"), leaf_node("a'"))


def test_eval_path_through_latent_stage():
    r = rng(41)
    sc = nkl_scenario(2, 2, 2)
    E, _ = rand_product(r, sc)
    H = build_hv_model(E, find_global_section(E))
    y = H.base.child_by_label(ROOT, STAGE)
    z = H.base.child_by_label(y, "ab")
    composite = eval_path(H.system, ROOT, z)
    assert composite == rrel_compose(H.system.edges[y], H.system.edges[z])
    assert composite.weights["s"] == E.tables[("a", "b")]


def test_eval_path_associative_on_chains():
    r = rng(42)
    for _ in range(30):
        S = rand_system(r, chain_tree(3))
        e1, e2, e3 = (S.edges[f"c{k}"] for k in (1, 2, 3))
        left = rrel_compose(rrel_compose(e1, e2), e3)
        right = rrel_compose(e1, rrel_compose(e2, e3))
        assert eval_path(S, "c0", "c3") == left == right


# restrict_base ------------------------------------------------------------


def test_restrict_identity():
    r = rng(43)
    for _ in range(20):
        S = rand_system(r, rand_tree(r, 5))
        assert restrict_base(S, S.base, {n: n for n in S.base.nodes}) == S


def test_forgetting_latent_stage_averages():
    r = rng(44)
    sc = nkl_scenario(2, 2, 2)
    for _ in range(5):
        E, _ = rand_product(r, sc)
        H = build_hv_model(E, find_global_section(E))
        forgotten = forget_stage(H, sc)
        y = H.base.child_by_label(ROOT, STAGE)
        hi = H.system.edges[y].weights["s"]
        for e in sc.contexts:
            z = leaf_node(sc.label(e))
            he = H.system.edges[z]
            for u in sc.joint_outcomes(e):
                by_hand = sum((hi[t] * he.weights[t][u] for t in hi.support), F(0))
                assert forgotten.edges[z].weights["s"][u] == by_hand
        assert forgotten == empirical_presheaf(E)


def test_forgetting_middle_stage_merges_labels():
    fine = LabelTree.from_edges("x", [("x", "y", "a"), ("y", "z", "b")])
    coarse = LabelTree.from_edges("x", [("x", "z", "ab")])
    r = rng(45)
    S = rand_system(r, fine)
    T = restrict_base(S, coarse, {"x": "x", "z": "z"})
    assert T.base.label["z"] == "ab"
    assert T.edges["z"] == rrel_compose(S.edges["y"], S.edges["z"])


def test_restrict_rejects_non_embeddings():
    fine = LabelTree.from_edges("x", [("x", "y", "a"), ("x", "z", "b")])
    S = rand_system(rng(46), fine)
    coarse = LabelTree.from_edges("x", [("x", "w", "c")])
    with pytest.raises(NotAnEmbedding):
        restrict_base(S, coarse, {"x": "y", "w": "z"})
    with pytest.raises(NotAnEmbedding):
        restrict_base(S, coarse, {"x": "x", "w": "x"})
    coarse2 = LabelTree.from_edges("x", [("x", "u", "c"), ("u", "w", "d")])
    with pytest.raises(NotAnEmbedding):
        restrict_base(S, coarse2, {"x": "x", "u": "y", "w": "z"})


def test_restrict_is_functorial():
    r = rng(47)
    fine = chain_tree(3)
    mid = LabelTree.from_edges("c0", [("c0", "c2", "m"), ("c2", "c3", "n")])
    top = LabelTree.from_edges("c0", [("c0", "c3", "k")])
    for _ in range(20):
        S = rand_system(r, fine)
        step = restrict_base(restrict_base(S, mid, {n: n for n in mid.nodes}), top, {"c0": "c0", "c3": "c3"})
        direct = restrict_base(S, top, {"c0": "c0", "c3": "c3"})
        assert step == direct


# fibered products -----------------------------------------------------------


def _product(A_model, B_model):
    A, B = empirical_presheaf(A_model), empirical_presheaf(B_model)
    clock = linear_tree(1)
    return A, B, fibered_product(A, B, clock, clock_map(A, clock), clock_map(B, clock))


def test_two_party_product_shape():
    _, _, P = _product(alice(), alice(F(1, 2), F(1, 5)))
    tree = P.presheaf.base
    root = tree.root
    assert len(tree.children(root)) == 4
    assert all(len(P.presheaf.fiber[c]) == 4 for c in tree.children(root))
    assert sorted(tree.label[c] for c in tree.children(root)) == sorted(
        x + y for x in ("a", "a'") for y in ("a", "a'")
    )


def test_product_weights_multiply():
    A_model, B_model = alice(), alice(F(1, 2), F(1, 5))
    A, B, P = _product(A_model, B_model)
    S = P.presheaf
    for c in S.base.children(S.base.root):
        ca, cb = c
        for (u, v) in S.fiber[c]:
            w = S.edges[c].weights[("s", "s")][(u, v)]
            assert w == A.edges[ca].weights["s"][u] * B.edges[cb].weights["s"][v]


def test_product_with_trivial_party():
    A_model = alice()
    sc1 = nkl_scenario(1, 1, 1)
    unit = EmpiricalModel.from_weights(sc1, NONNEG, {sc1.contexts[0]: {("0",): 1}})
    A, _, P = _product(A_model, unit)
    S = P.presheaf
    assert len(S.base.nodes) == len(A.base.nodes)
    for c in S.base.children(S.base.root):
        left = P.stage_to_left[c]
        ws = S.edges[c].weights[("s", "s")]
        assert {u: ws[(u, ("0",))] for (u, _) in S.fiber[c]} == {
            u: A.edges[left].weights["s"][u] for u in A.fiber[left]
        }


def test_bool_product_is_conjunction():
    r = rng(48)
    tree = LabelTree.from_edges("x", [("x", "y", "e")])
    clock = linear_tree(1)
    for _ in range(30):
        A, B = rand_system(r, tree, BOOL), rand_system(r, tree, BOOL)
        P = fibered_product(A, B, clock, clock_map(A, clock), clock_map(B, clock)).presheaf
        node = ("y", "y")
        for s, t in P.fiber[("x", "x")]:
            for u, v in P.fiber[node]:
                got = P.edges[node].weights[(s, t)][(u, v)]
                assert got == (A.edges["y"].weights[s][u] and B.edges["y"].weights[t][v])


def test_product_eval_path_is_product_of_paths():
    r = rng(49)
    clock = linear_tree(2)
    for _ in range(10):
        A, B = rand_system(r, chain_tree(2)), rand_system(r, chain_tree(2))
        P = fibered_product(A, B, clock, clock_map(A, clock), clock_map(B, clock)).presheaf
        pa, pb = eval_path(A, "c0", "c2"), eval_path(B, "c0", "c2")
        pp = eval_path(P, ("c0", "c0"), ("c2", "c2"))
        for s, t in P.fiber[("c0", "c0")]:
            for u, v in P.fiber[("c2", "c2")]:
                assert pp.weights[(s, t)][(u, v)] == pa.weights[s][u] * pb.weights[t][v]


def test_product_marginal_recovers_left_weights():
    A_model, B_model = alice(), alice(F(1, 2), F(1, 5))
    A, _, P = _product(A_model, B_model)
    S = P.presheaf
    for c in S.base.children(S.base.root):
        left = P.stage_to_left[c]
        d = S.edges[c].weights[("s", "s")].pushforward(lambda uv: uv[0])
        assert d == A.edges[left].weights["s"]


def test_product_requires_synchronized_clock():
    A = empirical_presheaf(alice())
    clock = linear_tree(1)
    bad = {n: "t1" for n in A.base.nodes}
    with pytest.raises(NotSynchronized):
        fibered_product(A, A, clock, bad, clock_map(A, clock))
    with pytest.raises(NotSynchronized):
        clock_map(A, linear_tree(0))


# internalize --------------------------------------------------------------


def _alice_bundle(E):
    pi_R = empirical_rpresheaf(E).vertical()
    p_under = {ROOT: "t0", leaf_node("a"): "t1", leaf_node("a'"): "t1"}
    return pi_R, p_under


def test_internalize_identity():
    E = alice()
    pi_R = empirical_rpresheaf(E).vertical()
    ident = {n: n for n in pi_R.source}
    assert internalize(pi_R, ident, {}) == pi_R


def test_internalize_weights_choices():
    E = alice()
    pi_R, p_under = _alice_bundle(E)
    q = F(2, 5)
    out = internalize(pi_R, p_under, {"t1": {leaf_node("a"): q, leaf_node("a'"): 1 - q}})
    d = out.fibers["t1"]
    for ctx, choice in ((("a",), q), (("a'",), 1 - q)):
        node = leaf_node(ctx[0])
        for g in E.scenario.joint_outcomes(ctx):
            assert d[(node, g)] == choice * E.tables[ctx][g]


def test_internalize_point_mass_gives_row():
    E = alice()
    pi_R, p_under = _alice_bundle(E)
    out = internalize(pi_R, p_under, {"t1": {leaf_node("a"): 1, leaf_node("a'"): 0}})
    # marginalize away the stage component: states (z_a, g) -> g at t1
    f = {st: (st[1] if st[0] != ROOT else "root") for st in out.target}
    g = {v: ("t1" if v != "root" else "t0") for v in f.values()}
    m = marginalize(out, f, g)
    row = E.tables[("a",)]
    assert {k: m.fibers["t1"][k] for k in row.carrier} == dict(row.weights)


def test_internalize_requires_weights():
    pi_R, p_under = _alice_bundle(alice())
    with pytest.raises(MissingWeights):
        internalize(pi_R, p_under, {})


def test_empirical_presheaf_relations_are_entire_and_supported():
    r = rng(50)
    for sc in (nkl_scenario(2, 2, 2), nkl_scenario(3, 2, 2)):
        E, _ = rand_product(r, sc)
        S = empirical_presheaf(E)
        for rel in S.edges.values():
            assert isinstance(rel, RRelation)
            for s in rel.source:
                assert rel.arrows[s] and rel.weights[s].support <= rel.arrows[s]
