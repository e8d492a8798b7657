"""Command line: shape emission, law suites, converters and single checks."""

from __future__ import annotations

import json
import random
import sys
import time

import click
import jsonschema

from . import corr, quiv, shapes, yoneda
from .fincat import CapExceeded, FinCat, label

SUITES = ("shapes", "quiv", "yoneda", "corr", "fold")


# -- suite runner ------------------------------------------------------------------------------

class SuiteConfig:
    """Caps and seed shared by every suite; defaults keep a full run near a minute."""

    def __init__(self, max_word=4, max_dim=3, size=3, max_fiber=3, seed=0, cases=None,
                 inject_fault=False):
        for name, v in (("max_word", max_word), ("max_dim", max_dim), ("size", size),
                        ("max_fiber", max_fiber)):
            if v < 1 and name != "max_dim":
                raise ValueError(f"{name} must be positive")
        if max_dim < 0:
            raise ValueError("max_dim must be non-negative")
        self.max_word = max_word
        self.max_dim = max_dim
        self.size = size
        self.max_fiber = max_fiber
        self.seed = seed
        self.cases = cases
        self.inject_fault = inject_fault

    def count(self, default):
        return default if self.cases is None else self.cases

    def rng(self, law, i):
        return random.Random(f"{self.seed}/{law}/{i}")

    def to_json(self):
        return {"max_word": self.max_word, "max_dim": self.max_dim, "size": self.size,
                "max_fiber": self.max_fiber, "seed": self.seed, "cases": self.cases,
                "inject_fault": self.inject_fault}


class Case:
    """One replayable unit of a suite; ``run()`` maps law names to problem lists."""

    def __init__(self, case_id, run):
        self.id = case_id
        self.run = run


class SuiteReport:
    def __init__(self, suite, cfg: SuiteConfig):
        self.suite = suite
        self.cfg = cfg
        self.counts = {}
        self.failures = []
        self.seconds = 0.0

    def record(self, law, case_id, problems):
        c = self.counts.setdefault(law, {"passed": 0, "failed": 0})
        if problems:
            c["failed"] += 1
            self.failures.append({"law": law, "case": case_id,
                                  "problem": _render(problems[0]), "problems": len(problems)})
        else:
            c["passed"] += 1

    @property
    def ok(self):
        return not self.failures

    def to_json(self, max_failures=20):
        shown, per_law = [], {}
        for f in sorted(self.failures, key=lambda f: (f["law"], f["case"])):
            per_law[f["law"]] = per_law.get(f["law"], 0) + 1
            if per_law[f["law"]] <= max_failures:
                shown.append(f)
        return {"suite": self.suite, "config": self.cfg.to_json(), "ok": self.ok,
                "laws": {k: self.counts[k] for k in sorted(self.counts)},
                "failures": shown}

    def to_text(self):
        lines = [f"suite {self.suite}: {'pass' if self.ok else 'FAIL'}"]
        for law in sorted(self.counts):
            c = self.counts[law]
            lines.append(f"  {law}: {c['passed']} passed, {c['failed']} failed")
        for f in self.to_json()["failures"]:
            lines.append(f"  counterexample {f['law']} @ {f['case']}: {f['problem']}")
        return "\n".join(lines) + "\n"


def _render(p):
    if isinstance(p, str):
        return p
    return label(p) if isinstance(p, tuple) else json.dumps(p, sort_keys=True, default=str)


def run_suite(name, cfg: SuiteConfig, replay=None) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    report = SuiteReport(name, cfg)
    start = time.perf_counter()
    for case in SUITE_CASES[name](cfg):
        if replay is not None and case.id != replay:
            continue
        try:
            results = case.run()
        except (ValueError, AssertionError, KeyError) as e:
            results = {"runs_cleanly": [f"{type(e).__name__}: {e}"]}
        for law, problems in results.items():
            report.record(law, case.id, problems)
    report.seconds = time.perf_counter() - start
    return report


# -- shapes ------------------------------------------------------------------------------------

def sweep_bounds(max_dim, max_word):
    """Word-length bound per dimension: ``max_word`` up to dimension 1, one less per extra story."""
    return [(d, max(0, max_word - max(0, d - 1))) for d in range(max_dim + 1)]


def structure_laws(s: shapes.BmSimplex):
    S = shapes.shape(s)
    out = {"acyclic": [] if S.is_acyclic() else ["cycle"],
           "degree": [] if S.degree_ok() else ["vertex with two incoming or outgoing arrows"]}
    if out["acyclic"] or out["degree"]:
        return out
    out["cap_cup"] = shapes.cap_cup_violations(S)[:1]
    if s.dim >= 2:
        out["inner_face_monotone"] = [i for i in range(1, s.dim) if not shapes.inner_face_monotone(s, i)]
        out["inner_face_reflects"] = [i for i in range(1, s.dim)
                                      if shapes.inner_face_reflection_failures(s, i)]
        out["dual_segal"] = [] if shapes.dual_segal_ok(s) else ["floor gluing"]
    if s.dim == 1:
        want, got = shapes.arrow_count(s.arrows[0]), len(S.edges)
        out["arrow_count"] = [] if want == got else [f"expected {want}, found {got}"]
    return out


def involution_laws(s: shapes.BmSimplex):
    out = {}
    if s.in_ass():
        out["ass_op"] = _raises(shapes.ass_op_compare, s)
    out["piass"] = _raises(shapes.piass_compare, s)
    if s.in_lm():
        out["fold_shape"] = _raises(shapes.fold_shape, s)
    return out


def _raises(fn, *args):
    try:
        fn(*args)
    except AssertionError as e:
        return [str(e)]
    return []


FIBROUS_TARGETS = {
    "point": FinCat.point,
    "discrete2": lambda: FinCat.discrete([0, 1]),
    "discrete3": lambda: FinCat.discrete([0, 1, 2]),
    "chain1": lambda: FinCat.chain(1),
    "chain2": lambda: FinCat.chain(2),
}


def flatness_laws(s: shapes.BmSimplex, with_total):
    out = {"flat_compose": shapes.flat_compose_obstructions(s)[:1]}
    if with_total:
        total = shapes.total_flatness_failures(s, FinCat.chain(1))
        agree = (not total) == (not out["flat_compose"])
        out["flat_over_2_agrees"] = [] if agree else [f"total category failures {len(total)}"]
    return out


def shapes_cases(cfg: SuiteConfig):
    for d, n in sweep_bounds(cfg.max_dim, cfg.max_word):
        for s in shapes.all_simplices(d, n):
            yield Case(f"structure:{shapes.format_simplex(s)}", lambda s=s: structure_laws(s))
    small = min(cfg.max_word, 3)
    for d in range(min(cfg.max_dim, 2) + 1):
        for s in shapes.all_simplices(d, small):
            yield Case(f"involution:{shapes.format_simplex(s)}", lambda s=s: involution_laws(s))
    for name, make in FIBROUS_TARGETS.items():
        def run(make=make):
            r = shapes.segal_fibrous_check(make(), max_dim=min(cfg.max_dim, 2), max_n=min(cfg.max_word, 2))
            return {"fibrous": [list(f) for f in r.failures]}
        yield Case(f"fibrous:{name}", run)
    if cfg.max_dim >= 2:
        for s in shapes.all_simplices(2, min(cfg.max_word - 1, 3)):
            if s.arrows[1].is_active():
                with_total = all(w.n <= 2 for w in s.words)
                yield Case(f"flatness:{shapes.format_simplex(s)}",
                           lambda s=s, t=with_total: flatness_laws(s, t))


# -- quivers and Segal objects ----------------------------------------------------------------

def _quiver_base(cfg, rng, i):
    if i % 10 == 0:
        return FinCat.chain(1)
    return FinCat.discrete(list(range(rng.randint(1, cfg.size))))


def _monoid_case(cfg, i):
    rng = cfg.rng("monoid", i)
    X = _quiver_base(cfg, rng, i)
    A, B, C = (quiv.random_quiver(X, rng, cfg.max_fiber) for _ in range(3))
    return {"tensor_monoid": quiv.monoid_law_problems(A, B, C)}


def _slice_case(cfg, i):
    rng = cfg.rng("slice", i)
    X = FinCat.discrete(list(range(rng.randint(1, cfg.size))))
    A, B, A2, B2 = (quiv.random_quiver(X, rng, cfg.max_fiber) for _ in range(4))
    f, g = quiv.quiver_map(A, A2, rng), quiv.quiver_map(B, B2, rng)
    if f is None:
        A2, f = A, quiv.identity_map(A)
    if g is None:
        B2, g = B, quiv.identity_map(B)
    out = {"slice_model": quiv.compare_slice_model(A, B)[1],
           "slice_naturality": quiv.slice_naturality_problems(A, B, A2, B2, f, g)}
    if i == 0:
        out["slice_unit"] = quiv.unit_slice_problems(X)
    return out


def _coherence_case(cfg, i):
    rng = cfg.rng("coherence", i)
    X = FinCat.chain(1) if i % 2 == 0 else FinCat.discrete([0, 1])
    A, B, C, D = (quiv.random_quiver(X, rng, 2) for _ in range(4))
    from .fincat import SetFunctor
    F = SetFunctor.hom(X, X.objects[0])
    return {"pentagon": quiv.pentagon_problems(A, B, C, D),
            "triangle": quiv.triangle_problems(A, B),
            "module": quiv.module_law_problems(A, B, F)}


def corrupt_precategory(P: quiv.Precategory):
    """Swap two composites with equal ends and different values, or ``None`` if impossible."""
    by_ends = {}
    for k, v in P.comp.items():
        by_ends.setdefault(k[:3], []).append(k)
    for keys in by_ends.values():
        for k1 in keys:
            for k2 in keys:
                if P.comp[k1] != P.comp[k2]:
                    comp = dict(P.comp)
                    comp[k1], comp[k2] = comp[k2], comp[k1]
                    return quiv.Precategory(P.quiver, P.unit, comp)
    return None


def _segal_case(cfg, i):
    rng = cfg.rng("segal", i)
    P = quiv.random_precategory(rng, cfg.size)
    if cfg.inject_fault:
        P = corrupt_precategory(P) or P
    bad = quiv.check_precategory(P)
    if bad:
        return {"precategory_laws": bad}
    return {"precategory_laws": [],
            "segal_roundtrip": quiv.precategory_roundtrip_problems(P, 4)
            + quiv.segal_roundtrip_problems(quiv.to_segal(P, 4))}


def quiv_cases(cfg: SuiteConfig):
    for i in range(cfg.count(200)):
        yield Case(f"monoid:{i:04d}", lambda i=i: _monoid_case(cfg, i))
    for i in range(min(cfg.count(100), 100)):
        yield Case(f"slice:{i:04d}", lambda i=i: _slice_case(cfg, i))
    for i in range(min(cfg.count(10), 10)):
        yield Case(f"coherence:{i:04d}", lambda i=i: _coherence_case(cfg, i))
    for i in range(min(cfg.count(100), 100)):
        yield Case(f"segal:{i:04d}", lambda i=i: _segal_case(cfg, i))


# -- Yoneda and completion --------------------------------------------------------------------

def _yoneda_case(cfg, i):
    rng = cfg.rng("yoneda", i)
    P = quiv.random_precategory(rng, cfg.size)
    if cfg.inject_fault:
        P = corrupt_precategory(P) or P
    lemma, free = [], []
    for x in P.X.objects:
        F = yoneda.random_presheaf(P, rng)
        ok, _, problems = yoneda.yoneda_lemma_check(P, x, F)
        lemma += problems or ([] if ok else [("not a bijection", x)])
        G = yoneda.representable_point(P, x)
        if yoneda.find_module_iso(yoneda.free_module(G, P), yoneda.yoneda_presheaf(P, x)) is None:
            free.append(("free module is not representable", x))
    Y, h = yoneda.yoneda_embedding(P)
    return {"yoneda_lemma": lemma, "representable_free": free,
            "fully_faithful": yoneda.fully_faithful_failures(P, Y, h)}


def _completion_case(cfg, i):
    rng = cfg.rng("completion", i)
    C = quiv.random_category(rng, cfg.size)
    P = quiv.category_precategory(yoneda.plant_isomorphic_copy(C, rng.choice(C.objects)))
    R = yoneda.completion(P)
    Q = R.precat
    R2 = yoneda.completion(Q)
    out = {"completion_complete": [] if yoneda.completeness_check(Q) else ["not complete"],
           "completion_equivalence": yoneda.is_equivalence(P, Q, R.omap, R.hmap),
           "completion_idempotent": ([] if yoneda.precategory_iso(Q, R2.precat) is not None
                                     else ["second completion is not isomorphic"])}
    if i == 0:
        J = yoneda.completion(yoneda.contractible_groupoid(2)).precat
        out["completion_J2"] = [] if len(J.X.objects) == 1 else [f"{len(J.X.objects)} objects"]
    return out


def yoneda_cases(cfg: SuiteConfig):
    for i in range(cfg.count(100)):
        yield Case(f"yoneda:{i:04d}", lambda i=i: _yoneda_case(cfg, i))
    for i in range(min(cfg.count(50), 50)):
        yield Case(f"completion:{i:04d}", lambda i=i: _completion_case(cfg, i))


# -- correspondences ----------------------------------------------------------------------------

def _make_category(cfg):
    return lambda rng: quiv.random_category(rng, cfg.size)


def _corr_case(cfg, i):
    rng = cfg.rng("corr", i)
    K = corr.random_correspondence(rng, _make_category(cfg))
    S = corr.to_over_segment(K)
    return {"correspondence_valid": K.problems(),
            "over_segment_valid": S.problems() + quiv.check_precategory(S.precat),
            "corr_roundtrip": corr.correspondence_roundtrip_problems(K),
            "segment_roundtrip": corr.segment_roundtrip_problems(S)}


def _represent_case(cfg, i):
    rng = cfg.rng("represent", i)
    G, K = corr.random_graph_kernel(rng, _make_category(cfg))
    omap, hmap, bad = corr.right_representable(K)
    if bad is not None:
        return {"represent_graph": [("not representable at", bad)]}
    wrong = [d for d in G.dom.objects if omap[d] != G.omap[d]]
    wrong += [g for g in G.dom.arrows if hmap[(G.dom.src[g], G.dom.tgt[g], g)] != G.amap[g]]
    return {"represent_graph": wrong + corr.represented_functor_problems(K, omap, hmap)}


E_PHI_WORDS = (("0", 2), ("00", 1), ("000", 1), ("01", 1), ("001", 1))


def _e_phi_case(word, size):
    E = corr.build_e_phi(word)
    out = {"e_phi_category": E.cat.problems()}
    rep = corr.e_phi_restriction_check(E, max_size=size)
    out["e_phi_restriction"] = [] if rep["ok"] else [rep]
    return out


def corr_cases(cfg: SuiteConfig):
    for i in range(cfg.count(100)):
        yield Case(f"corr:{i:04d}", lambda i=i: _corr_case(cfg, i))
    for i in range(min(cfg.count(20), 20)):
        yield Case(f"represent:{i:04d}", lambda i=i: _represent_case(cfg, i))
    for word, size in E_PHI_WORDS:
        yield Case(f"e_phi:{word}:{size}", lambda w=word, k=size: _e_phi_case(w, k))


# -- folding of algebras --------------------------------------------------------------------------

def fold_cases(cfg: SuiteConfig):
    monoids = yoneda.small_monoid_cats(2)
    for a, A in enumerate(monoids):
        for b, B in enumerate(monoids):
            for n in range(3):
                def run(A=A, B=B, n=n):
                    carrier = tuple(range(n))
                    ok, rep = yoneda.fold_algebra_check(A, B, carrier)
                    perm = {m: (m + 1) % n for m in carrier}
                    return {"fold_algebra": [] if ok else [rep],
                            "fold_naturality": [] if yoneda.fold_naturality_check(A, B, carrier, perm)
                            else ["relabelling does not commute with folding"]}
                yield Case(f"fold:{a}:{b}:{n}", run)


SUITE_CASES = {"shapes": shapes_cases, "quiv": quiv_cases, "yoneda": yoneda_cases,
               "corr": corr_cases, "fold": fold_cases}


# -- schemas --------------------------------------------------------------------------------------

_ROWS = {"type": "array", "items": {"type": "array"}}
FINCAT_SCHEMA = {
    "type": "object",
    "required": ["objects", "arrows", "identity", "composition"],
    "properties": {
        "objects": {"type": "array", "items": {"type": "string"}},
        "arrows": {"type": "array", "items": {
            "type": "object", "required": ["id", "src", "tgt"],
            "properties": {k: {"type": "string"} for k in ("id", "src", "tgt")}}},
        "identity": {"type": "object", "additionalProperties": {"type": "string"}},
        "composition": _ROWS,
    },
}
QUIVER_SCHEMA = {
    "type": "object",
    "required": ["source", "target", "components", "action"],
    "properties": {
        "source": FINCAT_SCHEMA, "target": FINCAT_SCHEMA,
        "components": {"type": "array", "items": {
            "type": "object", "required": ["src", "tgt", "elements"],
            "properties": {"elements": {"type": "array", "items": {"type": "string"}}}}},
        "action": {"type": "array"},
    },
}
PRECATEGORY_SCHEMA = {
    "type": "object",
    "required": ["quiver", "unit", "comp"],
    "properties": {"quiver": QUIVER_SCHEMA,
                   "unit": {"type": "array", "items": {"type": "array", "minItems": 4, "maxItems": 4}},
                   "comp": {"type": "array", "items": {"type": "array", "minItems": 6, "maxItems": 6}}},
}
SEGAL_SCHEMA = {
    "type": "object",
    "required": ["N", "levels", "faces", "degeneracies"],
    "properties": {"N": {"type": "integer", "minimum": 3}, "levels": _ROWS,
                   "faces": _ROWS, "degeneracies": _ROWS},
}
CORRESPONDENCE_SCHEMA = {
    "type": "object",
    "required": ["source", "target", "kernel", "right", "left"],
    "properties": {
        "source": PRECATEGORY_SCHEMA, "target": PRECATEGORY_SCHEMA,
        "kernel": {"type": "array", "items": {"type": "object", "required": ["c", "d", "elements"]}},
        "right": {"type": "array", "items": {"type": "array", "minItems": 6, "maxItems": 6}},
        "left": {"type": "array", "items": {"type": "array", "minItems": 6, "maxItems": 6}},
    },
}
OVER_SEGMENT_SCHEMA = {
    "type": "object",
    "required": ["precategory", "side"],
    "properties": {"precategory": PRECATEGORY_SCHEMA,
                   "side": {"type": "object", "additionalProperties": {"enum": [0, 1]}}},
}


class InputError(click.ClickException):
    exit_code = 2


def load_json(path, schema, what):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    validate(data, schema, what)
    return data


def validate(data, schema, what):
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise InputError(f"{what} schema violation at {pointer}: {e.message}")


def emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _build(fn, *args):
    """Run a constructor on user data, turning bad references into usage errors."""
    try:
        return fn(*args)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"invalid input: {e!r}")


# -- commands ---------------------------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Finite models of enriched categories and their shape calculus."""


@main.command()
@click.argument("simplex")
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default=None)
@click.option("--dot", "as_dot", is_flag=True, help="Same as --format dot.")
@click.option("--json", "as_json", is_flag=True, help="Same as --format json.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def shape(simplex, fmt, as_dot, as_json, out):
    """Emit the shape poset of SIMPLEX, e.g. "w=0000;phi=[0,3]"."""
    if as_dot and as_json:
        raise click.UsageError("choose one of --dot and --json")
    fmt = fmt or ("dot" if as_dot else "json")
    try:
        s = shapes.parse_simplex(simplex)
    except ValueError as e:
        raise InputError(f"parse error: {e}")
    S = shapes.shape(s)
    emit(S.to_dot() if fmt == "dot" else dumps(S.to_json()), out)


@main.command()
@click.argument("suite", type=click.Choice(SUITES + ("all",)))
@click.option("--max-dim", default=3, show_default=True, type=click.IntRange(0))
@click.option("--max-word", default=4, show_default=True, type=click.IntRange(1))
@click.option("--size", default=3, show_default=True, type=click.IntRange(1), help="Objects per random category.")
@click.option("--max-fiber", default=3, show_default=True, type=click.IntRange(1))
@click.option("--cases", default=None, type=click.IntRange(1), help="Random cases per law.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--replay", default=None, help="Run only the case with this id.")
@click.option("--inject-fault", is_flag=True, hidden=True,
              help="Corrupt one composition table per case (negative control).")
def laws(suite, max_dim, max_word, size, max_fiber, cases, seed, fmt, out, replay, inject_fault):
    """Run a law suite; exit code 1 when any law fails."""
    cfg = SuiteConfig(max_word, max_dim, size, max_fiber, seed, cases, inject_fault)
    names = SUITES if suite == "all" else (suite,)
    reports = []
    try:
        for name in names:
            r = run_suite(name, cfg, replay)
            click.echo(f"{name}: {r.seconds:.1f}s", err=True)
            reports.append(r)
    except CapExceeded as e:
        raise InputError(f"cap exceeded: {e}")
    if fmt == "json":
        body = [r.to_json() for r in reports]
        emit(dumps(body[0] if len(body) == 1 else body), out)
    else:
        emit("".join(r.to_text() for r in reports), out)
    sys.exit(0 if all(r.ok for r in reports) else 1)


@main.command()
@click.argument("kind", type=click.Choice(["segal", "corr"]))
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--levels", default=4, show_default=True, type=click.IntRange(3))
@click.option("--roundtrip", is_flag=True, help="Convert back and check the result.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def convert(kind, path, levels, roundtrip, out):
    """Precategory <-> Segal object, or over-segment <-> correspondence (direction from the input)."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}")
    if kind == "segal":
        if isinstance(data, dict) and "levels" in data:
            validate(data, SEGAL_SCHEMA, "Segal object")
            S = _build(quiv.SegalObject.from_json, data)
            problems = S.problems()
            if problems:
                raise InputError(f"not a Segal object: {_render(problems[0])}")
            result = _build(quiv.from_segal, S)
            back = quiv.segal_roundtrip_problems(S) if roundtrip else []
        else:
            validate(data, PRECATEGORY_SCHEMA, "precategory")
            P = _build(quiv.Precategory.from_json, data)
            bad = quiv.check_precategory(P)
            if bad:
                raise InputError(f"not a precategory: {_render(bad[0])}")
            result = _build(quiv.to_segal, P, levels)
            back = quiv.precategory_roundtrip_problems(P, levels) if roundtrip else []
    else:
        if isinstance(data, dict) and "side" in data:
            validate(data, OVER_SEGMENT_SCHEMA, "over-segment category")
            S = _build(corr.OverSegment.from_json, data)
            result = _build(corr.from_over_segment, S)
            back = corr.segment_roundtrip_problems(S) if roundtrip else []
        else:
            validate(data, CORRESPONDENCE_SCHEMA, "correspondence")
            K = _build(corr.Correspondence.from_json, data)
            bad = K.problems()
            if bad:
                raise InputError(f"not a correspondence: {_render(bad[0])}")
            result = corr.to_over_segment(K)
            back = corr.correspondence_roundtrip_problems(K) if roundtrip else []
    emit(dumps(result.to_json()), out)
    if roundtrip:
        click.echo("roundtrip: " + ("ok" if not back else f"FAILED {_render(back[0])}"), err=True)
        sys.exit(1 if back else 0)


@main.command()
@click.argument("left", type=click.Path(dir_okay=False))
@click.argument("right", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def tensor(left, right, out):
    """Tensor product LEFT (x) RIGHT of two quivers (RIGHT supplies the first leg)."""
    A = _build(quiv.Quiver.from_json, load_json(left, QUIVER_SCHEMA, "quiver"))
    B = _build(quiv.Quiver.from_json, load_json(right, QUIVER_SCHEMA, "quiver"))
    T = _build(quiv.tensor, A, B)
    emit(dumps(T.to_json()), out)


@main.command()
@click.argument("direction", type=click.Choice(["to", "from"]))
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--levels", default=4, show_default=True, type=click.IntRange(3))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def segal(direction, path, levels, out):
    """Precategory to Segal object (to) or back (from)."""
    if direction == "to":
        P = _build(quiv.Precategory.from_json, load_json(path, PRECATEGORY_SCHEMA, "precategory"))
        emit(dumps(_build(quiv.to_segal, P, levels).to_json()), out)
    else:
        S = _build(quiv.SegalObject.from_json, load_json(path, SEGAL_SCHEMA, "Segal object"))
        emit(dumps(_build(quiv.from_segal, S).to_json()), out)


@main.group("yoneda")
def yoneda_group():
    """Yoneda checks on a precategory."""


@yoneda_group.command("check")
@click.argument("path", type=click.Path(dir_okay=False))
def yoneda_check(path):
    """Yoneda lemma on every representable and full faithfulness of the embedding."""
    P = _build(quiv.Precategory.from_json, load_json(path, PRECATEGORY_SCHEMA, "precategory"))
    bad = quiv.check_precategory(P)
    if bad:
        raise InputError(f"not a precategory: {_render(bad[0])}")
    report = {"yoneda_lemma": {}, "fully_faithful": None}
    ok = True
    for x in P.X.objects:
        good, _, problems = yoneda.yoneda_lemma_check(P, x, yoneda.yoneda_presheaf(P, x))
        report["yoneda_lemma"][label(x)] = good and not problems
        ok = ok and good and not problems
    Y, h = yoneda.yoneda_embedding(P)
    ff = yoneda.fully_faithful_failures(P, Y, h)
    report["fully_faithful"] = not ff
    report["ok"] = ok and not ff
    click.echo(dumps(report), nl=False)
    sys.exit(0 if report["ok"] else 1)


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--strict", is_flag=True, help="Also reject nontrivial automorphisms.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def complete(path, strict, out):
    """Completion of a precategory; reports whether the input was already complete."""
    P = _build(quiv.Precategory.from_json, load_json(path, PRECATEGORY_SCHEMA, "precategory"))
    was = yoneda.completeness_check(P, strict=strict)
    R = yoneda.completion(P)
    click.echo(f"input complete: {was}; {len(P.X.objects)} -> {len(R.precat.X.objects)} objects", err=True)
    emit(dumps(R.precat.to_json()), out)


@main.command("fold-alg")
@click.option("--max-monoid", default=2, show_default=True, type=click.IntRange(1, 3))
@click.option("--carrier", default=2, show_default=True, type=click.IntRange(0, 3))
def fold_alg(max_monoid, carrier):
    """Folding bijection for every pair of small monoids and carriers up to the given size."""
    monoids = yoneda.small_monoid_cats(max_monoid)
    rows, ok = [], True
    for a, A in enumerate(monoids):
        for b, B in enumerate(monoids):
            for n in range(carrier + 1):
                good, rep = yoneda.fold_algebra_check(A, B, tuple(range(n)))
                ok = ok and good
                rows.append(dict(rep, left=a, right=b, ok=good))
    click.echo(dumps({"ok": ok, "cases": rows}), nl=False)
    sys.exit(0 if ok else 1)


@main.group("corr")
def corr_group():
    """Correspondences and categories over the segment."""


@corr_group.command("to-seg")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def corr_to_seg(path, out):
    K = _build(corr.Correspondence.from_json, load_json(path, CORRESPONDENCE_SCHEMA, "correspondence"))
    bad = K.problems()
    if bad:
        raise InputError(f"not a correspondence: {_render(bad[0])}")
    emit(dumps(corr.to_over_segment(K).to_json()), out)


@corr_group.command("from-seg")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def corr_from_seg(path, out):
    S = _build(corr.OverSegment.from_json, load_json(path, OVER_SEGMENT_SCHEMA, "over-segment category"))
    emit(dumps(_build(corr.from_over_segment, S).to_json()), out)


@corr_group.command("represent")
@click.argument("path", type=click.Path(dir_okay=False))
def corr_represent(path):
    """Extract the functor represented by a correspondence, if any."""
    K = _build(corr.Correspondence.from_json, load_json(path, CORRESPONDENCE_SCHEMA, "correspondence"))
    omap, hmap, bad = corr.right_representable(K)
    if bad is not None:
        click.echo(dumps({"representable": False, "failing": label(bad)}), nl=False)
        sys.exit(1)
    click.echo(dumps({"representable": True,
                      "objects": {label(d): label(c) for d, c in omap.items()},
                      "arrows": [[label(d), label(d2), label(g), label(v)]
                                 for (d, d2, g), v in hmap.items()]}), nl=False)


if __name__ == "__main__":
    main()
