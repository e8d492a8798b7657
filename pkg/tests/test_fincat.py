import itertools

import pytest
from hypothesis import assume, given, settings, strategies as st

from enrichcat.fincat import (
    CapExceeded, FinCat, FinFunctor, SetFunctor, UnsupportedInput, coproduct, cocone_mediators,
    colim_set, enumerate_functors, find_isomorphism, flat_over_2_check, left_kan,
    nat_transformations, opposite, product, twisted_arrows,
)
from enrichcat.shapes import BmWord, shape_vertex


def parallel_pair():
    return FinCat.free(["s", "t"], [("f", "s", "t"), ("g", "s", "t")])


@st.composite
def posets(draw, max_objects=4):
    n = draw(st.integers(1, max_objects))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rel = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return FinCat.poset(range(n), rel)


@st.composite
def monoid_cats(draw):
    # cyclic monoids Z/n and the two-element idempotent monoid
    kind = draw(st.sampled_from(["cyclic", "idem"]))
    if kind == "idem":
        return FinCat.monoid(["1", "a"], lambda x, y: "1" if x == y == "1" else "a", "1")
    n = draw(st.integers(1, 4))
    return FinCat.monoid(range(n), lambda x, y: (x + y) % n, 0)


cats = st.one_of(posets(), monoid_cats())


def components(F: SetFunctor):
    """Connected components of the category of elements, by plain search."""
    C = F.dom
    adj = {}
    for f in C.arrows:
        for a, b in F.maps[f].items():
            u, v = (C.src[f], a), (C.tgt[f], b)
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    seen, count = set(), 0
    for x in C.objects:
        for a in F.sets[x]:
            if (x, a) in seen:
                continue
            count += 1
            stack = [(x, a)]
            while stack:
                e = stack.pop()
                if e in seen:
                    continue
                seen.add(e)
                stack.extend(adj.get(e, ()))
    return count


# -- examples ------------------------------------------------------------------------------------

def test_opposite_of_discrete_is_itself():
    D = FinCat.discrete([0, 1, 2])
    assert opposite(D) == D


def test_opposite_reverses_single_arrow():
    P = opposite(FinCat.chain(1))
    assert P.hom(1, 0) == [(0, 1)]
    assert P.hom(0, 1) == []


def test_product_counts():
    assert len(product(FinCat.discrete([0, 1]), FinCat.discrete([0, 1, 2])).objects) == 6
    C = FinCat.chain(2)
    assert find_isomorphism(product(FinCat.point(), C), C) is not None


def test_coproduct_disjoint():
    S = coproduct(FinCat.chain(1), FinCat.point())
    assert len(S.objects) == 3 and len(S.arrows) == 4
    assert S.is_valid()


def test_twisted_arrows_of_point_and_segment():
    tw, _ = twisted_arrows(FinCat.point())
    assert len(tw.objects) == 1 and len(tw.arrows) == 1
    C = FinCat.chain(1)
    tw, proj = twisted_arrows(C)
    assert tw.is_valid() and proj.is_valid()
    # brute force: an arrow f -> g for each (p, q) with g = q f p
    expected = sum(1 for f in C.arrows for p in C.arrows for q in C.arrows
                   if C.tgt[p] == C.src[f] and C.src[q] == C.tgt[f])
    assert len(tw.arrows) == expected == 5
    u = (0, 1)
    nonid = [a for a in tw.arrows if not tw.is_identity(a)]
    assert sorted((tw.src[a], tw.tgt[a]) for a in nonid) == [((0, 0), u), ((1, 1), u)]


def test_colimit_constant_on_connected():
    F = SetFunctor.constant(FinCat.chain(2), ["p", "q"])
    assert len(colim_set(F).apex) == 2


def test_colimit_disjoint_union():
    D = FinCat.discrete([0, 1])
    F = SetFunctor(D, {0: ["a"], 1: ["b", "c"]},
                   {D.ident[0]: {"a": "a"}, D.ident[1]: {"b": "b", "c": "c"}})
    assert len(colim_set(F).apex) == 3


def test_colimit_coequalizer_matches_search():
    C = parallel_pair()
    F = SetFunctor(C, {"s": [1, 2], "t": ["p", "q"]},
                   {C.ident["s"]: {1: 1, 2: 2}, C.ident["t"]: {"p": "p", "q": "q"},
                    ("f",): {1: "p", 2: "p"}, ("g",): {1: "q", 2: "p"}})
    assert F.is_valid()
    assert len(colim_set(F).apex) == components(F) == 1


def test_left_kan_identity():
    C = FinCat.chain(2)
    F = SetFunctor.hom(C, 0)
    lan, unit = left_kan(F, FinFunctor.identity(C))
    assert {x: len(v) for x, v in lan.sets.items()} == {x: len(v) for x, v in F.sets.items()}
    assert all(len(set(unit[x].values())) == len(F.sets[x]) for x in C.objects)


def test_left_kan_collapse_to_point():
    D, P = FinCat.discrete([0, 1]), FinCat.point()
    q = FinFunctor(D, P, {0: "*", 1: "*"}, {D.ident[0]: P.ident["*"], D.ident[1]: P.ident["*"]})
    F = SetFunctor(D, {0: ["a"], 1: ["b", "c"]},
                   {D.ident[0]: {"a": "a"}, D.ident[1]: {"b": "b", "c": "c"}})
    lan, _ = left_kan(F, q)
    assert len(lan.sets["*"]) == 3


def test_left_kan_along_inclusion():
    D, C = FinCat.discrete([0, 1]), FinCat.chain(1)
    q = FinFunctor(D, C, {0: 0, 1: 1}, {D.ident[0]: C.ident[0], D.ident[1]: C.ident[1]})
    F = SetFunctor(D, {0: ["a"], 1: ["b"]}, {D.ident[0]: {"a": "a"}, D.ident[1]: {"b": "b"}})
    lan, unit = left_kan(F, q)
    assert len(lan.sets[0]) == 1 and len(lan.sets[1]) == 2
    assert lan.is_valid()
    assert lan.maps[(0, 1)][unit[0]["a"]] != unit[1]["b"]


def test_enumerate_functor_counts():
    X = FinCat.discrete([0, 1, 2])
    assert len(enumerate_functors(FinCat.discrete([0, 1]), X)) == 9
    assert len(enumerate_functors(FinCat.chain(1), FinCat.chain(1))) == 3
    a = shape_vertex(BmWord.parse("00")).cat
    assert len(enumerate_functors(a, FinCat.chain(2))) == 9


def test_enumerate_functors_cap():
    with pytest.raises(CapExceeded):
        enumerate_functors(FinCat.discrete(range(4)), FinCat.discrete(range(4)), cap=10)


def test_find_isomorphism_examples():
    C = FinCat.chain(2)
    assert find_isomorphism(C, C.relabel()) is not None
    assert find_isomorphism(FinCat.discrete([0, 1]), FinCat.chain(1)) is None


def test_flat_over_2_examples():
    C = FinCat.chain(2)
    assert flat_over_2_check((C, {0: 0, 1: 1, 2: 2}))
    P = FinCat.poset(["a", "b"], [("a", "b")])
    assert not flat_over_2_check((P, {"a": 0, "b": 2}))
    with pytest.raises(UnsupportedInput):
        flat_over_2_check((FinCat.monoid([0, 1], lambda x, y: (x + y) % 2, 0), {"*": 0}))


def test_json_roundtrip():
    C = FinCat.free(["x", "y", "z"], [("u", "x", "y"), ("v", "y", "z")])
    R = C.relabel()
    assert R.is_valid()
    assert find_isomorphism(C, R) is not None


# -- properties ----------------------------------------------------------------------------------

@given(cats)
def test_generated_categories_are_valid(C):
    assert C.is_valid()


@given(cats)
def test_opposite_involution(C):
    assert opposite(opposite(C)) == C


@given(posets(3), posets(2))
def test_product_sizes(C, D):
    P = product(C, D)
    assert len(P.objects) == len(C.objects) * len(D.objects)
    assert len(P.arrows) == len(C.arrows) * len(D.arrows)
    assert P.is_valid()


@settings(max_examples=40)
@given(cats)
def test_twisted_arrows_valid(C):
    tw, proj = twisted_arrows(C)
    assert tw.is_valid() and proj.is_valid()
    assert len(tw.objects) == len(C.arrows)


@st.composite
def set_functors(draw):
    C = draw(posets(3))
    sizes = {x: draw(st.integers(0, 2)) for x in C.objects}
    # draw arbitrary maps and keep only the functorial draws
    sets = {x: tuple((x, i) for i in range(sizes[x])) for x in C.objects}
    maps = {}
    for a in C.arrows:
        s, t = C.src[a], C.tgt[a]
        if s == t:
            maps[a] = {e: e for e in sets[s]}
        else:
            maps[a] = {e: draw(st.sampled_from(sets[t])) if sets[t] else None for e in sets[s]}
    F = SetFunctor(C, sets, maps)
    assume(F.is_valid())
    return F


@settings(max_examples=60)
@given(set_functors())
def test_colimit_counts_components(F):
    assert len(colim_set(F).apex) == components(F)


@settings(max_examples=30)
@given(set_functors(), st.integers(1, 2))
def test_colimit_universal_property(F, n):
    apex = tuple(range(n))
    colim = colim_set(F)
    # every cocone into `apex` factors uniquely; cocones are functions out of the colimit
    for values in itertools.product(apex, repeat=len(colim.apex)):
        m = dict(zip(colim.apex, values))
        legs = {x: {a: m[colim.legs[x][a]] for a in F.sets[x]} for x in F.dom.objects}
        assert cocone_mediators(F, apex, legs) == [m]


@settings(max_examples=30)
@given(set_functors())
def test_left_kan_identity_is_iso(F):
    lan, unit = left_kan(F, FinFunctor.identity(F.dom))
    for x in F.dom.objects:
        assert sorted(unit[x].values()) == sorted(lan.sets[x])
        assert len(set(unit[x].values())) == len(F.sets[x])


@settings(max_examples=30)
@given(posets(3), posets(3))
def test_functor_enumeration_matches_brute_force(C, D):
    got = {F.key() for F in enumerate_functors(C, D)}
    # posets: functors are monotone object maps
    want = set()
    for values in itertools.product(D.objects, repeat=len(C.objects)):
        om = dict(zip(C.objects, values))
        if all(D.leq(om[C.src[a]], om[C.tgt[a]]) for a in C.arrows):
            want.add((tuple(values), tuple((om[C.src[a]], om[C.tgt[a]]) for a in C.arrows)))
    assert got == want


@settings(max_examples=30)
@given(cats)
def test_isomorphism_with_relabelled_copy(C):
    F = find_isomorphism(C, C.relabel())
    assert F is not None and F.is_valid()


@settings(max_examples=20)
@given(set_functors())
def test_nat_transformations_identity_present(F):
    ids = {x: {a: a for a in F.sets[x]} for x in F.dom.objects}
    assert ids in nat_transformations(F, F)
