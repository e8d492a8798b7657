import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from enrichcat.fincat import FinCat, FinFunctor, enumerate_functors
from enrichcat import corr
from enrichcat import quiv as q


def point():
    return q.category_precategory(FinCat.point())


def constant_kernel(C, D, elements):
    """``K(c, d) = S`` for one-object categories with trivial actions."""
    (c,), (d,) = C.X.objects, D.X.objects
    right = {(c, c, d, f, k): k for f in C.quiver(c, c) for k in elements}
    left = {(c, d, d, k, g): k for g in D.quiver(d, d) for k in elements}
    return corr.Correspondence(C, D, {(c, d): elements}, right, left)


# -- conversions ------------------------------------------------------------------------------

def test_point_kernel_gives_cross_arrows():
    K = constant_kernel(point(), point(), ("s", "t", "u"))
    assert not K.problems()
    S = corr.to_over_segment(K)
    A = S.precat.quiver
    assert len(S.precat.X.objects) == 2
    assert len(A((0, "*"), (1, "*"))) == 3 and not A((1, "*"), (0, "*"))
    assert not S.problems() and not q.check_precategory(S.precat)


def test_empty_kernel_gives_disjoint_union():
    C = q.category_precategory(FinCat.chain(1))
    D = q.category_precategory(FinCat.chain(2))
    S = corr.to_over_segment(corr.Correspondence(C, D, {}, {}, {}))
    A = S.precat.quiver
    cross = [(x, y) for x in S.precat.X.objects for y in S.precat.X.objects
             if S.side[x] != S.side[y] and A(x, y)]
    assert not cross
    assert sum(len(v) for v in A.body.sets.values()) == 3 + 6


def test_from_over_segment_reads_kernel():
    K = constant_kernel(point(), point(), ("s",))
    back = corr.from_over_segment(corr.to_over_segment(K))
    assert sum(len(v) for v in back.sets.values()) == 1
    assert not corr.correspondence_roundtrip_problems(K)


def test_from_over_segment_graph_kernel():
    Cc = FinCat.chain(1)
    G = FinFunctor.identity(Cc)
    K = corr.graph_correspondence(G)
    back = corr.from_over_segment(corr.to_over_segment(K))
    # K(c, d) = Hom(c, d) on [1]: one element for 0<=0, 0<=1, 1<=1 and none for (1, 0)
    assert sorted(len(v) for v in back.sets.values() if v) == [1, 1, 1]
    assert not back.problems()


def test_invalid_over_segment_rejected():
    P = q.category_precategory(FinCat.chain(1))
    S = corr.OverSegment(P, {0: 1, 1: 0})
    assert S.problems()
    with pytest.raises(ValueError):
        corr.from_over_segment(S)


def test_over_segment_json_roundtrip():
    K = constant_kernel(point(), point(), ("s", "t"))
    S = corr.to_over_segment(K)
    data = json.loads(json.dumps(S.to_json()))
    S2 = corr.OverSegment.from_json(data)
    assert not S2.problems() and not q.check_precategory(S2.precat)
    K2 = corr.from_over_segment(S2)
    assert sorted(len(v) for v in K2.sets.values() if v) == [2]


# -- representability -------------------------------------------------------------------------

def test_identity_kernel_represents_identity():
    C = q.category_precategory(FinCat.chain(2))
    omap, hmap, bad = corr.right_representable(corr.identity_correspondence(C))
    assert bad is None
    assert omap == {x: x for x in C.X.objects}
    assert not corr.represented_functor_problems(corr.identity_correspondence(C), omap, hmap)


def test_wrong_cardinality_is_not_representable():
    K = constant_kernel(point(), point(), ("s", "t"))
    omap, hmap, bad = corr.right_representable(K)
    assert omap is None and bad == "*"


def test_graph_kernel_recovers_functor():
    Cc, Dc = FinCat.chain(2), FinCat.chain(1)
    for G in enumerate_functors(Dc, Cc):
        omap, hmap, bad = corr.right_representable(corr.graph_correspondence(G))
        assert bad is None and omap == G.omap


# -- the doubled comparison category ------------------------------------------------------------

def test_e_phi_length_one_ass():
    E = corr.build_e_phi("00")
    assert E.case == "ass"
    assert len(E.A.cat.objects) == 5
    assert E.cat.is_valid()
    assert E.summands["R"] == []
    assert E.summands["L"] == ["L", "R"]
    assert E.summands[(0, 1)] == [("'", (0, 1)), ("''", (0, 1))]


def test_e_phi_left_module_word():
    E = corr.build_e_phi("001")
    assert E.case == "lm" and E.cat.is_valid()
    assert E.summands[(2, 2)] == []
    assert E.summands[(1, 2)] == [(1, E.nn - 1)]


def test_e_phi_rejects_bimodule_word():
    with pytest.raises(ValueError):
        corr.build_e_phi("0011")


@pytest.mark.parametrize("word", ["0", "00", "01"])
def test_e_phi_restriction_small_sets(word):
    rep = corr.e_phi_restriction_check(corr.build_e_phi(word), max_size=1)
    assert rep["ok"], rep


def test_non_cartesian_total_functor_is_detected():
    E = corr.build_e_phi("0")
    S = corr.finite_sets(2)
    found = False
    for F in enumerate_functors(E.cat, S, cap=10 ** 5):
        G = corr.functor_to_sets(F)
        if not corr.e_phi_cartesian(E, G):
            found = True
            break
    assert found


# -- properties ---------------------------------------------------------------------------------

def make_category(rng):
    return q.random_category(rng, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_roundtrips(seed):
    K = corr.random_correspondence(random.Random(seed), make_category)
    assert not K.problems()
    S = corr.to_over_segment(K)
    assert not S.problems() and not q.check_precategory(S.precat)
    assert not corr.correspondence_roundtrip_problems(K)
    assert not corr.segment_roundtrip_problems(S)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_planted_functor_recovered(seed):
    G, K = corr.random_graph_kernel(random.Random(seed), make_category)
    omap, hmap, bad = corr.right_representable(K)
    assert bad is None
    assert omap == G.omap
    assert all(hmap[(G.dom.src[g], G.dom.tgt[g], g)] == G.amap[g] for g in G.dom.arrows)
