import itertools

import pytest
from hypothesis import given, settings, strategies as st

from enrichcat.fincat import FinCat, enumerate_functors, find_isomorphism, opposite
from enrichcat import shapes as sh
from enrichcat.shapes import BmArrow, BmSimplex, BmWord, parse_simplex, shape, shape_vertex


def labels(S):
    return sorted((sh.vertex_label(u), sh.vertex_label(v)) for u, v in S.edges)


@st.composite
def simplices(draw, max_dim=2, max_n=3):
    bits = draw(st.integers(0, max_n))
    ones = draw(st.integers(0, bits + 1))
    w = BmWord((0,) * (bits + 1 - ones) + (1,) * ones)
    phis = []
    for _ in range(draw(st.integers(0, max_dim))):
        n = BmSimplex(w, phis).words[-1].n
        k = draw(st.integers(0, max_n))
        phi = sorted(draw(st.lists(st.integers(0, n), min_size=k + 1, max_size=k + 1)))
        phis.append(phi)
    return BmSimplex(w, phis)


# -- words and parsing --------------------------------------------------------------------------

@pytest.mark.parametrize("word,count", [("00", 2), ("01", 1), ("0", 0), ("0001", 5), ("0011", 3)])
def test_vertex_counts(word, count):
    S = shape_vertex(BmWord.parse(word))
    assert len(S.vertices) == count and not S.edges


def test_letters():
    assert BmWord.from_letters("aam") == BmWord.parse("0001")
    assert BmWord.from_letters("amb").n == 3
    with pytest.raises(ValueError):
        BmWord.from_letters("ab")


def test_non_monotone_word_rejected():
    with pytest.raises(ValueError):
        BmWord.parse("010")


def test_parse_errors_name_the_token():
    with pytest.raises(sh.SimplexSyntaxError, match="'x'"):
        parse_simplex("w=0000;phi=[0,x]")
    with pytest.raises(sh.SimplexSyntaxError, match=r"\[0,9\]"):
        parse_simplex("w=0000;phi=[0,9]")
    with pytest.raises(sh.SimplexSyntaxError):
        parse_simplex("w=0000;phi=[3,1]")


@given(simplices(3, 3))
def test_format_parse_roundtrip(s):
    assert parse_simplex(sh.format_simplex(s)) == s


# -- small pictures -----------------------------------------------------------------------------

def test_inert_arrow_picture():
    S = sh.shape_arrow(BmArrow(BmWord.parse("00000"), [1, 2, 3]))
    assert len(S.vertices) == 12
    assert labels(S) == sorted([("x2'", "x3"), ("y3", "y2'"), ("x1'", "x2"), ("y2", "y1'")])


def test_active_arrow_picture():
    S = shape(parse_simplex("w=0000;phi=[0,3]"))
    assert len(S.vertices) == 8
    assert labels(S) == sorted([("x1'", "x3"), ("y3", "x2"), ("y2", "x1"), ("y1", "y1'")])


def test_dimensions_zero_and_one():
    w = BmWord.parse("000")
    assert shape(BmSimplex(w)).vertices == shape_vertex(w).vertices
    f = BmArrow(w, [0, 2])
    assert shape(BmSimplex(w, [f.phi])).edges == sh.shape_arrow(f).edges


def test_identity_middle_arrow_face_is_bijective_on_outer_floors():
    s = parse_simplex("w=000;phi=[0,1,2];phi=[0,2]")
    F, vmap = sh.inner_face_map(s, 1)
    assert sh.inner_face_monotone(s, 1)
    assert sorted(vmap.values()) == sorted(v for v in shape(s).vertices if v[0] != 1)


def test_component_types_identity_on_a():
    f = parse_simplex("w=00;phi=[0,1]").arrows[0]
    assert sorted(t for t, _ in sh.classify_components(f)) == [3, 4]


def test_component_types_active_arrow():
    f = parse_simplex("w=0000;phi=[0,3]").arrows[0]
    assert sorted(t for t, _ in sh.classify_components(f)) == [3, 4, 6, 6]


def test_degeneracy_has_lower_horizontal_component():
    # the lower floor pair (x2', y2') joined with nothing above
    f = parse_simplex("w=00;phi=[0,1,1]").arrows[0]
    kinds = dict((edge, t) for t, edge in sh.classify_components(f))
    assert kinds[("x2'", "y2'")] == 5


def test_eval_shape_counts():
    assert len(sh.eval_shape(BmSimplex(BmWord.parse("00")), FinCat.discrete([0, 1]))) == 4
    assert len(sh.eval_shape(BmSimplex(BmWord.parse("01")), FinCat.chain(1))) == 2


def test_eval_count_matches_enumeration():
    s = parse_simplex("w=0000;phi=[0,3]")
    X = FinCat.chain(1)
    assert sh.eval_count(shape(s), X) == len(enumerate_functors(shape(s).cat, X))


def test_flat_compose_examples():
    assert sh.flat_compose_check(parse_simplex("w=0000;phi=[0,2,3];phi=[0,2]"))
    assert sh.flat_compose_check(parse_simplex("w=0000;phi=[0,1,3];phi=[0,2]"))
    with pytest.raises(ValueError, match="precondition"):
        sh.flat_compose_check(parse_simplex("w=0000;phi=[0,1,3];phi=[1,2]"))


def test_cap_is_a_flatness_obstruction():
    # inserting a pair and then forgetting it by an inert arrow strands it on the middle floor
    s = parse_simplex("w=0;phi=[0,0];phi=[0]")
    assert not s.arrows[1].is_active()
    assert sh.flat_compose_obstructions(s) == [("middle", ("x1'", "y1'"))]
    with pytest.raises(ValueError, match="precondition"):
        sh.flat_compose_check(s)


def test_fibrous_point():
    r = sh.segal_fibrous_check(FinCat.point(), max_dim=2, max_n=2)
    assert r.ok and r.checked["segal"] > 0


def test_json_and_dot_are_deterministic():
    s = parse_simplex("w=0001;phi=[0,1,3]")
    assert sh.shape_json(s) == sh.shape_json(s)
    dot = shape(s).to_dot()
    assert dot.count("rank=same") == 2


def test_amb_bimodule_vertex_split():
    w = BmWord.from_letters("amb")
    s = BmSimplex(w)
    assert len(shape(s).vertices) == 3
    sh.piass_compare(s)


# -- properties ---------------------------------------------------------------------------------

@settings(max_examples=150)
@given(simplices(3, 3))
def test_shape_is_a_union_of_chains(s):
    S = shape(s)
    assert S.is_acyclic() and S.degree_ok()
    assert not sh.cap_cup_violations(S, excursions_only=True)


@settings(max_examples=150)
@given(simplices(1, 4))
def test_arrow_count(s):
    if s.dim == 1:
        assert len(shape(s).edges) == sh.arrow_count(s.arrows[0])


@settings(max_examples=100)
@given(simplices(3, 3))
def test_dual_segal_and_inner_faces_monotone(s):
    assert sh.dual_segal_ok(s)
    for i in range(1, s.dim):
        assert sh.inner_face_monotone(s, i)


@settings(max_examples=60)
@given(simplices(2, 3))
def test_ass_op_isomorphism(s):
    if s.in_ass():
        vmap = sh.ass_op_compare(s)
        assert len(vmap) == len(shape(s).vertices)


@settings(max_examples=60)
@given(simplices(2, 3))
def test_piass_and_fold(s):
    sh.piass_compare(s)
    if s.in_lm():
        sh.fold_shape(s)


@settings(max_examples=30)
@given(simplices(1, 3))
def test_shape_category_matches_reachability(s):
    S = shape(s)
    C = S.cat
    for u, v in itertools.product(S.vertices, repeat=2):
        assert bool(C.hom(u, v)) == S.leq(u, v)


@pytest.mark.parametrize("text", ["w=000;phi=[0,2]", "w=0000;phi=[1,2,3];phi=[0,1]",
                                  "w=000;phi=[0,0,2]"])
def test_reversed_shape_is_opposite_by_search(text):
    s = parse_simplex(text)
    assert find_isomorphism(shape(s.reverse()).cat, opposite(shape(s).cat)) is not None
