from fractions import Fraction
from itertools import product

import pytest

from contextua.errors import InvalidRelation, Mismatch, MissingWeights
from contextua.relations import (
    RMap,
    RRelation,
    StochasticMap,
    rmap_compose,
    rmap_from_weights,
    rmap_identity,
    rmap_to_rrel,
    rrel_compose,
    rrel_identity,
    rrel_make,
    rrel_retract,
    stoch_compose,
    stoch_section,
)
from contextua.semiring import BOOL, NONNEG, Distribution, dist_bind

from generators import rand_dist, rand_rmap, rand_rrel, rand_set, rng

F = Fraction
SEMIRINGS = [NONNEG, BOOL]


def test_rmap_invariants():
    with pytest.raises(InvalidRelation):
        # not onto the source
        RMap({"s", "r"}, {"t"}, {"t": "s"}, {"s": Distribution(NONNEG, {"t": 1})}, NONNEG)
    with pytest.raises(InvalidRelation):
        # fiber carried by the wrong points
        RMap({"s"}, {"t", "u"}, {"t": "s", "u": "s"}, {"s": Distribution(NONNEG, {"t": 1})}, NONNEG)
    with pytest.raises(MissingWeights):
        rmap_from_weights(NONNEG, {"t0": "s", "t1": "s"}, {})
    with pytest.raises(MissingWeights):
        rmap_from_weights(NONNEG, {"t0": "s", "t1": "s"}, {"s": {"zz": 1}})


def test_rmap_compose_example():
    g = rmap_from_weights(NONNEG, {"t0": "s", "t1": "s"}, {"s": {"t0": F(1, 2), "t1": F(1, 2)}})
    f = rmap_from_weights(
        NONNEG, {"u00": "t0", "u01": "t0", "u1": "t1"}, {"t0": {"u00": F(1, 3), "u01": F(2, 3)}}
    )
    h = rmap_compose(g, f)
    assert h.fibers["s"]["u01"] == F(1, 3)
    assert h.fibers["s"]["u00"] == F(1, 6)
    assert h.fibers["s"]["u1"] == F(1, 2)
    assert dict(h.under) == {"u00": "s", "u01": "s", "u1": "s"}


def test_rmap_compose_mismatch():
    g = rmap_identity(NONNEG, {"a"})
    f = rmap_identity(NONNEG, {"b"})
    with pytest.raises(Mismatch):
        rmap_compose(g, f)


@pytest.mark.parametrize("sr", SEMIRINGS)
def test_rmap_category_laws(sr):
    r = rng(31)
    for _ in range(200):
        X = rand_set(r, "x")
        g = rand_rmap(r, sr, X, "y")
        f = rand_rmap(r, sr, sorted(g.target), "z")
        h = rand_rmap(r, sr, sorted(f.target), "w")
        assert rmap_compose(rmap_identity(sr, g.source), g) == g
        assert rmap_compose(g, rmap_identity(sr, g.target)) == g
        assert rmap_compose(rmap_compose(g, f), h) == rmap_compose(g, rmap_compose(f, h))
        gf = rmap_compose(g, f)
        assert set(gf.under.values()) == set(g.source)
        for s in gf.source:
            assert sr.sum(gf.fibers[s].weights.values()) == sr.one
        assert rmap_to_rrel(gf) == rrel_compose(rmap_to_rrel(g), rmap_to_rrel(f))


def test_bool_rmap_support_is_preimage_chain():
    r = rng(32)
    for _ in range(100):
        g = rand_rmap(r, BOOL, rand_set(r, "x", 1, 3), "y")
        f = rand_rmap(r, BOOL, sorted(g.target), "z")
        gf = rmap_compose(g, f)
        for s in g.source:
            chain = {u for u in f.target if f.under[u] in g.fibers[s].support and u in f.fibers[f.under[u]].support}
            assert gf.fibers[s].support == chain


def test_rrel_requires_entire_and_support():
    with pytest.raises(InvalidRelation):
        RRelation({"s"}, {"t"}, {"s": set()}, {"s": Distribution(NONNEG, {"t": 1})}, NONNEG)
    with pytest.raises(InvalidRelation):
        RRelation({"s"}, {"t", "u"}, {"s": {"t"}}, {"s": Distribution(NONNEG, {"u": 1})}, NONNEG)


def test_rrel_diamond():
    f = rrel_make(NONNEG, {"s"}, {"t0", "t1"}, {"s": {"t0", "t1"}}, {"s": {"t0": F(1, 2), "t1": F(1, 2)}})
    g = rrel_make(NONNEG, {"t0", "t1"}, {"u"}, {"t0": {"u"}, "t1": {"u"}}, {"t0": {"u": 1}, "t1": {"u": 1}})
    h = rrel_compose(f, g)
    assert h.weights["s"]["u"] == 1
    assert h.arrows["s"] == {"u"}


def test_rrel_mismatch():
    with pytest.raises(Mismatch):
        rrel_compose(rrel_identity(NONNEG, {"a"}), rrel_identity(NONNEG, {"b"}))


@pytest.mark.parametrize("sr", SEMIRINGS)
def test_rrel_category_laws(sr):
    r = rng(33)
    for _ in range(200):
        X, Y, Z, W = (rand_set(r, p) for p in "xyzw")
        f, g, h = rand_rrel(r, sr, X, Y), rand_rrel(r, sr, Y, Z), rand_rrel(r, sr, Z, W)
        assert rrel_compose(rrel_identity(sr, X), f) == f
        assert rrel_compose(f, rrel_identity(sr, Y)) == f
        fg = rrel_compose(f, g)
        assert rrel_compose(fg, h) == rrel_compose(f, rrel_compose(g, h))
        for s in X:
            # relational composite, Kleisli weights, support condition
            assert fg.arrows[s] == {u for t in f.arrows[s] for u in g.arrows[t]}
            assert fg.weights[s] == dist_bind(f.weights[s], g.weights)
            assert fg.weights[s].support <= fg.arrows[s]


def test_bool_rrel_support_is_relational_composite():
    r = rng(34)
    for _ in range(100):
        X, Y, Z = (rand_set(r, p) for p in "xyz")
        f, g = rand_rrel(r, BOOL, X, Y), rand_rrel(r, BOOL, Y, Z)
        fg = rrel_compose(f, g)
        for s in X:
            assert fg.weights[s].support == {
                u for t in f.weights[s].support for u in g.weights[t].support
            }


def test_rmap_to_rrel_identity():
    assert rmap_to_rrel(rmap_identity(NONNEG, {"a", "b"})) == rrel_identity(NONNEG, {"a", "b"})


def test_rmap_to_rrel_keeps_arrows():
    p = F(1, 3)
    m = rmap_from_weights(NONNEG, {"0": "s", "1": "s"}, {"s": {"0": p, "1": 1 - p}})
    rel = rmap_to_rrel(m)
    assert rel.pairs() == {("s", "0"), ("s", "1")}
    assert rel.weights["s"]["0"] == p and rel.weights["s"]["1"] == 1 - p


def test_section_after_retract_forgets_zero_edges():
    rel = rrel_make(NONNEG, {"s"}, {"00", "01"}, {"s": {"00", "01"}}, {"s": {"01": 1}})
    back = stoch_section(rrel_retract(rel))
    assert back != rel
    assert back.arrows["s"] == {"01"}


def test_section_after_retract_full_support():
    rel = rrel_make(NONNEG, {"s"}, {"00", "01"}, {"s": {"00", "01"}}, {"s": {"00": F(1, 4), "01": F(3, 4)}})
    assert stoch_section(rrel_retract(rel)) == rel


@pytest.mark.parametrize("sr", SEMIRINGS)
def test_retract_and_section_preserve_composition(sr):
    r = rng(35)
    for _ in range(100):
        X, Y, Z = (rand_set(r, p) for p in "xyz")
        f, g = rand_rrel(r, sr, X, Y), rand_rrel(r, sr, Y, Z)
        assert rrel_retract(rrel_compose(f, g)) == stoch_compose(rrel_retract(f), rrel_retract(g))
        k = StochasticMap(X, Y, {s: rand_dist(r, sr, Y) for s in X}, sr)
        assert rrel_retract(stoch_section(k)) == k


def test_exhaustive_small_functoriality():
    """Every surjection pair on sets of size at most three, with fixed weights."""
    sets = [["x0"], ["x0", "x1"]]
    for X in sets:
        for ny in (1, 2, 3):
            Y = [f"y{i}" for i in range(ny)]
            for gy in product(X, repeat=ny):
                if set(gy) != set(X):
                    continue
                under_g = dict(zip(Y, gy))
                wg = {s: {y: F(1, sum(1 for v in gy if v == s)) for y in Y if under_g[y] == s} for s in X}
                g = rmap_from_weights(NONNEG, under_g, wg)
                for nz in range(ny, 4):
                    Z = [f"z{i}" for i in range(nz)]
                    for fz in product(Y, repeat=nz):
                        if set(fz) != set(Y):
                            continue
                        under_f = dict(zip(Z, fz))
                        wf = {t: {u: F(1, sum(1 for v in fz if v == t)) for u in Z if under_f[u] == t} for t in Y}
                        f = rmap_from_weights(NONNEG, under_f, wf)
                        assert rmap_to_rrel(rmap_compose(g, f)) == rrel_compose(rmap_to_rrel(g), rmap_to_rrel(f))
