import random

import pytest
from hypothesis import given, settings, strategies as st

from enrichcat.fincat import FinCat, SetFunctor, find_isomorphism
from enrichcat import quiv as q
from enrichcat.shapes import BmArrow, BmWord


def two_element_monoid():
    return q.monoid_precategory(["1", "a"], lambda x, y: "1" if x == y == "1" else "a", "1")


def brute_tensor_size(A, B, u, v):
    """Composable pairs over a discrete middle: a plain sum over middle objects."""
    return sum(len(A(x, v)) * len(B(u, x)) for x in A.U.objects)


# -- quivers and the tensor product ----------------------------------------------------------------

def test_unit_quiver_discrete_and_segment():
    assert q.unit_quiver(FinCat.discrete([0, 1])).sizes() == {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 1}
    assert q.unit_quiver(FinCat.chain(1)).sizes() == {(0, 0): 1, (0, 1): 1, (1, 0): 0, (1, 1): 1}


def test_tensor_discrete_composition_count():
    X = FinCat.discrete(["x", "y", "z"])
    B = q.Quiver.over(X, {("x", "y"): ["f", "g"]})
    A = q.Quiver.over(X, {("y", "z"): ["h"]})
    T = q.tensor(A, B)
    assert len(T("x", "z")) == 2 and T.size() == 2
    assert not q.tensor_oracle_problems(T)


def test_unit_tensor_unit_on_segment():
    U = q.unit_quiver(FinCat.chain(1))
    T = q.tensor(U, U)
    assert len(T(0, 1)) == 1
    assert T.sizes() == U.sizes()


def test_maps_required_over_non_discrete():
    with pytest.raises(ValueError):
        q.Quiver.over(FinCat.chain(1), {(0, 1): ["e"]})


def test_quiver_json_roundtrip():
    rng = random.Random(3)
    A = q.random_quiver(FinCat.chain(1), rng, 2)
    B = q.Quiver.from_json(A.to_json())
    assert not B.problems()
    assert sorted(B.sizes().values()) == sorted(A.sizes().values())


def test_module_quiver_roundtrip():
    C = FinCat.chain(2)
    F = SetFunctor.hom(C, 0)
    G = q.quiver_module(q.module_quiver(F))
    assert G.sets == F.sets and G.maps == F.maps


# -- precategories -------------------------------------------------------------------------------

def test_unit_and_monoid_precategories_pass():
    assert not q.check_precategory(q.unit_precategory(FinCat.chain(2)))
    assert not q.check_precategory(two_element_monoid())


def test_corrupted_composition_is_located():
    from enrichcat.cli import corrupt_precategory
    bad = corrupt_precategory(two_element_monoid())
    problems = q.check_precategory(bad)
    assert problems[0] == ("right unit", "*", "*", "1")


def test_monoid_segal_sizes():
    S = q.to_segal(two_element_monoid(), 4)
    assert [len(l) for l in S.levels] == [1, 2, 4, 8, 16]
    assert not S.problems()


def test_nerve_of_segment():
    P = q.from_segal(q.nerve(FinCat.chain(1), 3))
    sizes = sorted(P.quiver.sizes().values())
    assert sizes == [0, 1, 1, 1]


def test_from_segal_rejects_non_segal():
    # a second 2-simplex with the same spine makes the Segal map non-injective
    S = q.nerve(FinCat.chain(1), 3)
    levels = [list(l) for l in S.levels]
    first = levels[2][0]
    levels[2].append("twin")
    faces = {k: dict(v) for k, v in S.faces.items()}
    for i in range(3):
        faces[(2, i)]["twin"] = faces[(2, i)][first]
    broken = q.SegalObject(3, levels, faces, S.degens)
    assert broken.segal_problems()
    with pytest.raises(ValueError, match="Segal"):
        q.from_segal(broken)


def test_monoid_segal_recovers_monoid():
    P = two_element_monoid()
    assert not q.precategory_roundtrip_problems(P, 4)
    Q = q.from_segal(q.to_segal(P, 4))
    assert list(Q.quiver.sizes().values()) == [2]
    assert not q.check_precategory(Q)


def test_segal_conversion_needs_discrete_objects():
    with pytest.raises(ValueError):
        q.to_segal(q.unit_precategory(FinCat.chain(1)), 3)


# -- slice model ----------------------------------------------------------------------------------

def test_convolution_with_diagonal():
    X = FinCat.discrete([0, 1])
    A = q.Quiver.over(X, {(0, 1): ["e"], (1, 1): ["f", "g"]})
    T1 = q.total_space(A)
    diag = q.diagonal(X)
    assert len(q.convolution(T1, diag)) == len(T1)
    assert not q.unit_slice_problems(X)


def test_slice_model_example():
    X = FinCat.discrete(["x", "y", "z"])
    B = q.Quiver.over(X, {("x", "y"): ["f", "g"]})
    A = q.Quiver.over(X, {("y", "z"): ["h"]})
    witness, problems = q.compare_slice_model(A, B)
    assert not problems
    assert len(witness) == 2


# -- segment categories -----------------------------------------------------------------------------

def test_segment_of_empty_word():
    E = q.segment_cat("0")
    assert len(E.cat.objects) == 3
    assert E.cat.hom((0, 0), "L") and E.cat.hom("L", (0, 0))
    assert not E.cat.hom("L", "R")


def test_segment_of_a():
    E = q.segment_cat("00")
    C = E.cat
    assert len(C.objects) == 5 and C.is_valid()
    assert C.hom((0, 1), (0, 0)) and C.hom((0, 1), (1, 1))
    for p in [(0, 0), (1, 1)]:
        assert C.hom(p, "L") and C.hom("L", p)


def test_segment_functors_preserve_squares():
    w = BmWord.parse("0001")
    for phi in [(0, 1, 3), (0, 3), (1, 2), (0, 0, 2)]:
        f = BmArrow(w, phi)
        assert q.segment_functor(f).is_valid()
        assert q.preserves_squares(f)


def test_modot_from_spans():
    X, Y = ["x0", "x1"], ["y0"]
    spans = [{"s": ("x0", "x0"), "t": ("x1", "x0")}, {"u": ("x0", "x1")}]
    F = q.segment_functor_from_spans("000", spans, X, X)
    assert F.is_valid()
    assert q.modot_check(F, X, X)
    # length one: any span is fine
    G = q.segment_functor_from_spans("00", [{"s": ("x0", "x1"), "t": ("x0", "x0")}], X, X)
    assert q.modot_check(G, X, X)
    assert not q.modot_check(G, X, Y)


def test_modot_rejects_non_cartesian_square():
    X = ["x0", "x1"]
    spans = [{"s": ("x0", "x0")}, {"u": ("x0", "x1")}]
    F = q.segment_functor_from_spans("000", spans, X, X)
    sets = dict(F.sets)
    maps = dict(F.maps)
    top = (0, 2)
    extra = ("extra",)
    sets[top] = F.sets[top] + (extra,)
    for a in F.dom.out_arrows(top):
        m = dict(maps[a])
        m[extra] = extra if F.dom.is_identity(a) else m[F.sets[top][0]]
        maps[a] = m
    G = SetFunctor(F.dom, sets, maps)
    assert G.is_valid()
    assert ("not cartesian", ((0, 2), (0, 1), (1, 2), (1, 1))) in q.modot_failures(G, X, X)


# -- properties ----------------------------------------------------------------------------------

@st.composite
def quiver_triples(draw):
    seed = draw(st.integers(0, 10 ** 6))
    rng = random.Random(seed)
    X = FinCat.chain(1) if draw(st.booleans()) else FinCat.discrete(range(rng.randint(1, 3)))
    return X, [q.random_quiver(X, rng, 3) for _ in range(3)]


@settings(max_examples=40, deadline=None)
@given(quiver_triples())
def test_tensor_monoid_laws(data):
    X, (A, B, C) = data
    assert not A.problems()
    assert not q.monoid_law_problems(A, B, C)


@settings(max_examples=40, deadline=None)
@given(quiver_triples())
def test_tensor_matches_coend_oracle(data):
    X, (A, B, _) = data
    assert not q.tensor_oracle_problems(q.tensor(A, B))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_tensor_over_discrete_is_a_sum(seed):
    rng = random.Random(seed)
    X = FinCat.discrete(range(rng.randint(1, 3)))
    A, B = q.random_quiver(X, rng, 3), q.random_quiver(X, rng, 3)
    T = q.tensor(A, B)
    for u in X.objects:
        for v in X.objects:
            assert len(T(u, v)) == brute_tensor_size(A, B, u, v)
    assert not q.compare_slice_model(A, B, T)[1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_segal_roundtrip(seed):
    P = q.random_precategory(random.Random(seed), 3)
    assert not q.check_precategory(P)
    assert not q.precategory_roundtrip_problems(P, 4)
    assert not q.segal_roundtrip_problems(q.to_segal(P, 4))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_nerve_segal_roundtrip(seed):
    C = q.random_category(random.Random(seed), 3)
    S = q.nerve(C, 3)
    assert not S.problems()
    P = q.from_segal(S)
    assert find_isomorphism(FinCat.discrete(C.objects), FinCat.discrete(P.X.objects)) is not None
    assert not q.segal_roundtrip_problems(S)
