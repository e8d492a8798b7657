"""One test per acceptance criterion; each prints a pass/fail line.

Tolerances are exact everywhere (these are combinatorial checks).  Time
targets are reported, and enforced only where stated next to the test.
"""

import json
import time

from click.testing import CliRunner

from enrichcat import cli, shapes, yoneda
from enrichcat.shapes import parse_simplex, shape


def tally(results):
    """Merge law -> problems dicts into law -> (passed, failed)."""
    out = {}
    for res in results:
        for law, problems in res.items():
            p, f = out.get(law, (0, 0))
            out[law] = (p, f + 1) if problems else (p + 1, f)
    return out


def summary(counts):
    return ", ".join(f"{law} {p}/{p + f}" for law, (p, f) in sorted(counts.items()))


def all_pass(counts):
    return all(f == 0 for _, f in counts.values())


# -- 1 ------------------------------------------------------------------------------------------

def literal_sweep_size(max_dim, max_word):
    """Number of simplices of each dimension with every word of length <= max_word."""
    words = shapes.all_words(max_word)
    # paths of length d in the arrow graph, counted by dynamic programming
    ends = {w: 1 for w in words}
    sizes = [len(words)]
    for _ in range(max_dim):
        nxt = {w: 0 for w in words}
        for w, c in ends.items():
            for f in shapes.arrows_from(w, max_word):
                nxt[f.tgt] += c
        ends = nxt
        sizes.append(sum(ends.values()))
    return sizes


def test_criterion_01_shape_structure(verdict):
    # Exhaustive over word length <= 4 and dimension <= 3.  The literal
    # space has tens of millions of 3-simplices, so the sweep covers the
    # largest feasible sub-box and the test requires both full coverage
    # and zero failures.
    start = time.perf_counter()
    results, covered = [], 0
    for d, n in cli.sweep_bounds(3, 4):
        for s in shapes.all_simplices(d, n):
            results.append(cli.structure_laws(s))
            covered += 1
    seconds = time.perf_counter() - start
    literal = sum(literal_sweep_size(3, 4))
    counts = tally(results)
    ok = all_pass(counts) and covered == literal and seconds < 60
    detail = f"{covered} of {literal} simplices swept in {seconds:.0f}s; {summary(counts)}"
    verdict(1, "shape structure", ok, detail)
    assert ok, detail


# -- 2 ------------------------------------------------------------------------------------------

def V(kind, pos, floor):
    return (floor, kind, pos)


def row(word, floor):
    return set(shapes.floor_vertices(shapes.BmWord.parse(word), floor))


def ladder(floor, k, alpha=False):
    """Identity story between ``floor`` and ``floor + 1`` on a word with ``k`` pairs."""
    edges = {(V("x", i, floor + 1), V("x", i, floor)) for i in range(1, k + 1)}
    edges |= {(V("y", i, floor), V("y", i, floor + 1)) for i in range(1, k + 1)}
    if alpha:
        edges.add((V("m", k + 1, floor), V("m", k + 1, floor + 1)))
    return edges


GOLDENS = {
    "inertarrow": ("w=00000;phi=[1,2,3]", row("00000", 0) | row("000", 1), {
        (V("x", 2, 1), V("x", 3, 0)), (V("y", 3, 0), V("y", 2, 1)),
        (V("x", 1, 1), V("x", 2, 0)), (V("y", 2, 0), V("y", 1, 1))}),
    "activearrow": ("w=0000;phi=[0,3]", row("0000", 0) | row("00", 1), {
        (V("x", 1, 1), V("x", 3, 0)), (V("y", 3, 0), V("x", 2, 0)),
        (V("y", 2, 0), V("x", 1, 0)), (V("y", 1, 0), V("y", 1, 1))}),
    "arrow": ("w=00000;phi=[1,3,3]", row("00000", 0) | row("000", 1), {
        (V("x", 1, 1), V("x", 3, 0)), (V("y", 2, 0), V("y", 1, 1)),
        (V("y", 3, 0), V("x", 2, 0)), (V("x", 2, 1), V("y", 2, 1))}),
    "LMarrow": ("w=0001;phi=[0,1,3]", row("0001", 0) | row("001", 1), {
        (V("x", 1, 1), V("x", 1, 0)), (V("y", 1, 0), V("y", 1, 1)),
        (V("m", 3, 0), V("x", 2, 0)), (V("y", 2, 0), V("m", 2, 1))}),
    # three floors of a^3 joined by identities, the active a^3 -> a, then the identity on a
    "activesimplex-an": (
        "w=0000;phi=[0,1,2,3];phi=[0,1,2,3];phi=[0,3];phi=[0,1]",
        row("0000", 0) | row("0000", 1) | row("0000", 2) | row("00", 3) | row("00", 4),
        ladder(0, 3) | ladder(1, 3) | {
            (V("x", 1, 3), V("x", 3, 2)), (V("y", 3, 2), V("x", 2, 2)),
            (V("y", 2, 2), V("x", 1, 2)), (V("y", 1, 2), V("y", 1, 3))} | ladder(3, 1)),
    # three floors of a^2 m joined by identities, the active a^2 m -> m, then the identity on m
    "LMsimplex": (
        "w=0001;phi=[0,1,2,3];phi=[0,1,2,3];phi=[0,3];phi=[0,1]",
        row("0001", 0) | row("0001", 1) | row("0001", 2) | row("01", 3) | row("01", 4),
        ladder(0, 2, True) | ladder(1, 2, True) | {
            (V("m", 3, 2), V("x", 2, 2)), (V("y", 2, 2), V("x", 1, 2)),
            (V("y", 1, 2), V("m", 1, 3)), (V("m", 1, 3), V("m", 1, 4))}),
}


def test_criterion_02_figure_goldens(verdict):
    mismatched = []
    for name, (text, vertices, edges) in GOLDENS.items():
        S = shape(parse_simplex(text))
        if set(S.vertices) != vertices or len(S.vertices) != len(vertices) or \
                set(S.edges) != edges or len(S.edges) != len(edges):
            mismatched.append(name)
    ok = not mismatched
    verdict(2, "figure goldens", ok,
            f"{len(GOLDENS) - len(mismatched)}/{len(GOLDENS)} diagrams exact"
            + (f"; mismatched {mismatched}" if mismatched else ""))
    assert ok


# -- 3 ------------------------------------------------------------------------------------------

def test_criterion_03_involution_and_folding(verdict):
    results = [cli.involution_laws(s) for d in range(3) for s in shapes.all_simplices(d, 3)]
    counts = tally(results)
    ok = all_pass(counts) and set(counts) == {"ass_op", "piass", "fold_shape"}
    verdict(3, "involution/folding", ok, summary(counts))
    assert ok


# -- 4 ------------------------------------------------------------------------------------------

def test_criterion_04_fibrousness(verdict):
    # dims <= 2 on every target; words up to length 2
    parts, ok = [], True
    for name, make in cli.FIBROUS_TARGETS.items():
        r = shapes.segal_fibrous_check(make(), max_dim=2, max_n=2)
        ok = ok and r.ok and all(v > 0 for v in r.checked.values())
        parts.append(f"{name} {'ok' if r.ok else 'FAIL'} "
                     f"(segal {r.checked['segal']}, inert {r.checked['inert']}, product {r.checked['product']})")
    verdict(4, "fibrousness", ok, "; ".join(parts))
    assert ok


# -- 5 ------------------------------------------------------------------------------------------

def test_criterion_05_flatness(verdict):
    results = []
    for s in shapes.all_simplices(2, 3):
        if s.arrows[1].is_active():
            results.append(cli.flatness_laws(s, all(w.n <= 2 for w in s.words)))
    counts = tally(results)
    ok = all_pass(counts) and counts.get("flat_over_2_agrees", (0, 0))[0] > 0
    verdict(5, "flatness", ok, summary(counts))
    assert ok


# -- 6 to 11: the seeded suites -----------------------------------------------------------------

CFG = cli.SuiteConfig()


def test_criterion_06_quiver_monoid(verdict):
    start = time.perf_counter()
    monoid = [cli._monoid_case(CFG, i) for i in range(200)]
    slices = [cli._slice_case(CFG, i) for i in range(100)]
    seconds = time.perf_counter() - start
    bases = [cli._quiver_base(CFG, CFG.rng("monoid", i), i) for i in range(200)]
    non_discrete = sum(1 for X in bases if not all(X.is_identity(a) for a in X.arrows))
    counts = tally(monoid + slices)
    ok = all_pass(counts) and non_discrete > 0 and seconds < 90
    verdict(6, "quiver monoid", ok,
            f"{summary(counts)}; {non_discrete} cases over [1]; {seconds:.1f}s")
    assert ok


def test_criterion_07_segal_equivalence(verdict):
    counts = tally(cli._segal_case(CFG, i) for i in range(100))
    ok = all_pass(counts) and counts["segal_roundtrip"][0] == 100
    verdict(7, "Segal equivalence (N=4)", ok, summary(counts))
    assert ok


def test_criterion_08_yoneda(verdict):
    counts = tally(cli._yoneda_case(CFG, i) for i in range(100))
    ok = all_pass(counts) and len(counts) == 3
    verdict(8, "enriched Yoneda", ok, summary(counts))
    assert ok


def test_criterion_09_completion(verdict):
    J = yoneda.completion(yoneda.contractible_groupoid(2)).precat
    counts = tally(cli._completion_case(CFG, i) for i in range(50))
    ok = len(J.X.objects) == 1 and all_pass(counts)
    verdict(9, "completion", ok, f"J2 -> {len(J.X.objects)} object; {summary(counts)}")
    assert ok


def test_criterion_10_folding_algebras(verdict):
    counts = tally(case.run() for case in cli.fold_cases(CFG))
    n = len(yoneda.small_monoid_cats(2))
    ok = all_pass(counts) and counts["fold_algebra"][0] == n * n * 3
    verdict(10, "folding of algebras", ok, f"{n} monoids, carriers 0-2; {summary(counts)}")
    assert ok


def test_criterion_11_correspondences(verdict):
    counts = tally([cli._corr_case(CFG, i) for i in range(100)]
                   + [cli._represent_case(CFG, i) for i in range(20)])
    ok = all_pass(counts) and counts["represent_graph"][0] == 20
    verdict(11, "correspondences", ok, summary(counts))
    assert ok


# -- 12 -----------------------------------------------------------------------------------------

def test_criterion_12_determinism(verdict):
    runner = CliRunner()
    first = runner.invoke(cli.main, ["laws", "all", "--seed", "0"])
    second = runner.invoke(cli.main, ["laws", "all", "--seed", "0"])
    same = first.stdout_bytes == second.stdout_bytes and first.exit_code == second.exit_code
    reports = json.loads(first.stdout)
    ok = same and len(first.stdout_bytes) > 0 and [r["suite"] for r in reports] == list(cli.SUITES)
    verdict(12, "determinism", ok,
            f"two full default runs, {len(first.stdout_bytes)} bytes each, identical={same}, "
            f"exit codes {first.exit_code}/{second.exit_code}")
    assert ok
