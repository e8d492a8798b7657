"""Finite categories with explicit tables, functors, set-valued diagrams,
colimits, pointwise left Kan extensions and isomorphism search."""

from __future__ import annotations

import itertools
import json
import os

from networkx.utils import UnionFind


class CapExceeded(RuntimeError):
    """Raised when an enumeration would exceed a configured resource cap."""


class UnsupportedInput(ValueError):
    pass


def _env_cap(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


#: default ceiling on the number of functors any single enumeration may produce
MAX_FUNCTORS = _env_cap("ENRICHCAT_MAX_FUNCTORS", 2_000_000)


def label(obj) -> str:
    """Stable string rendering of an object or arrow id."""
    if isinstance(obj, str):
        return obj
    if isinstance(obj, tuple):
        return "(" + ",".join(label(o) for o in obj) + ")"
    return str(obj)


class FinCat:
    """A finite category stored as explicit tables.

    ``comp[(g, f)]`` is the composite ``g . f`` (first ``f``, then ``g``),
    defined exactly when ``tgt[f] == src[g]``.
    """

    def __init__(self, objects, arrows, src, tgt, ident, comp, name=None):
        self.objects = tuple(objects)
        self.arrows = tuple(arrows)
        self.src = dict(src)
        self.tgt = dict(tgt)
        self.ident = dict(ident)
        self.comp = dict(comp)
        self.name = name
        self._obj_index = {o: i for i, o in enumerate(self.objects)}
        self._arr_index = {a: i for i, a in enumerate(self.arrows)}
        if len(self._obj_index) != len(self.objects):
            raise ValueError("duplicate object ids")
        if len(self._arr_index) != len(self.arrows):
            raise ValueError("duplicate arrow ids")
        self._homs = {}
        self._out = {o: [] for o in self.objects}
        self._in = {o: [] for o in self.objects}
        for a in self.arrows:
            s, t = self.src[a], self.tgt[a]
            if s not in self._obj_index or t not in self._obj_index:
                raise ValueError(f"arrow {a!r} has undeclared endpoint")
            self._homs.setdefault((s, t), []).append(a)
            self._out[s].append(a)
            self._in[t].append(a)
        for o in self.objects:
            if o not in self.ident:
                raise ValueError(f"object {o!r} has no identity")

    def __repr__(self):
        return f"FinCat({self.name or ''}: {len(self.objects)} objects, {len(self.arrows)} arrows)"

    def __eq__(self, other):
        return (isinstance(other, FinCat) and self.objects == other.objects
                and self.arrows == other.arrows and self.src == other.src
                and self.tgt == other.tgt and self.ident == other.ident
                and self.comp == other.comp)

    __hash__ = object.__hash__

    def hom(self, x, y):
        return self._homs.get((x, y), [])

    def out_arrows(self, x):
        return self._out[x]

    def in_arrows(self, x):
        return self._in[x]

    def compose(self, g, f):
        """``g . f``."""
        return self.comp[(g, f)]

    def then(self, *arrows):
        """Composite of a path given in diagrammatic order."""
        result = arrows[0]
        for a in arrows[1:]:
            result = self.comp[(a, result)]
        return result

    def obj_index(self, x):
        return self._obj_index[x]

    def arr_index(self, a):
        return self._arr_index[a]

    def is_identity(self, a):
        return self.ident[self.src[a]] == a

    def composable_pairs(self):
        for f in self.arrows:
            for g in self._out[self.tgt[f]]:
                yield g, f

    def problems(self):
        """List of violated category axioms (empty when valid)."""
        out = []
        for o in self.objects:
            i = self.ident[o]
            if self.src.get(i) != o or self.tgt.get(i) != o:
                out.append(f"identity of {o!r} is not an endo-arrow")
        for g, f in self.composable_pairs():
            h = self.comp.get((g, f))
            if h is None:
                out.append(f"missing composite {g!r} . {f!r}")
            elif self.src[h] != self.src[f] or self.tgt[h] != self.tgt[g]:
                out.append(f"composite {g!r} . {f!r} has wrong endpoints")
        for key in self.comp:
            g, f = key
            if self.tgt.get(f) != self.src.get(g):
                out.append(f"composite defined for non-composable {key!r}")
        if out:
            return out
        for f in self.arrows:
            if self.comp[(self.ident[self.tgt[f]], f)] != f or self.comp[(f, self.ident[self.src[f]])] != f:
                out.append(f"identity law fails at {f!r}")
        for g, f in self.composable_pairs():
            gf = self.comp[(g, f)]
            for h in self._out[self.tgt[g]]:
                if self.comp[(h, gf)] != self.comp[(self.comp[(h, g)], f)]:
                    out.append(f"associativity fails at {h!r},{g!r},{f!r}")
        return out

    def is_valid(self):
        return not self.problems()

    def is_poset(self):
        if any(len(v) > 1 for v in self._homs.values()):
            return False
        return all(not (x != y and self.hom(y, x)) for (x, y) in self._homs)

    def leq(self, x, y):
        return bool(self.hom(x, y))

    def covering_pairs(self):
        """Covering relations of a poset, as (lower, upper) pairs."""
        pairs = []
        for (x, y) in self._homs:
            if x == y:
                continue
            if not any(z not in (x, y) and self.hom(x, z) and self.hom(z, y) for z in self.objects):
                pairs.append((x, y))
        pairs.sort(key=lambda p: (self._obj_index[p[0]], self._obj_index[p[1]]))
        return pairs

    # -- constructors --------------------------------------------------

    @classmethod
    def discrete(cls, objects, name=None):
        objects = list(objects)
        ident = {o: ("id", o) for o in objects}
        arrows = [ident[o] for o in objects]
        src = {ident[o]: o for o in objects}
        comp = {(ident[o], ident[o]): ident[o] for o in objects}
        return cls(objects, arrows, src, src, ident, comp, name=name)

    @classmethod
    def poset(cls, objects, relations, name=None):
        """Poset generated by ``relations`` (pairs x <= y); arrows are the pairs."""
        objects = list(objects)
        index = {o: i for i, o in enumerate(objects)}
        n = len(objects)
        up = [set([i]) for i in range(n)]
        for x, y in relations:
            up[index[x]].add(index[y])
        changed = True
        while changed:
            changed = False
            for i in range(n):
                new = set(up[i])
                for j in up[i]:
                    new |= up[j]
                if new != up[i]:
                    up[i] = new
                    changed = True
        for i in range(n):
            for j in up[i]:
                if i != j and i in up[j]:
                    raise ValueError("relations contain a cycle")
        arrows, src, tgt, comp = [], {}, {}, {}
        for i in range(n):
            for j in sorted(up[i]):
                a = (objects[i], objects[j])
                arrows.append(a)
                src[a], tgt[a] = objects[i], objects[j]
        for (x, y) in arrows:
            for z in (objects[k] for k in sorted(up[index[y]])):
                comp[((y, z), (x, y))] = (x, z)
        ident = {o: (o, o) for o in objects}
        return cls(objects, arrows, src, tgt, ident, comp, name=name)

    @classmethod
    def chain(cls, n):
        """The ordinal [n] = {0 < 1 < ... < n}."""
        return cls.poset(range(n + 1), [(i, i + 1) for i in range(n)], name=f"[{n}]")

    @classmethod
    def point(cls):
        return cls.discrete(["*"], name="*")

    @classmethod
    def monoid(cls, elements, mult, unit, name=None):
        """One-object category; ``mult(a, b)`` is the product ``a*b`` = ``a . b``."""
        elements = list(elements)
        src = {e: "*" for e in elements}
        comp = {(a, b): mult(a, b) for a in elements for b in elements}
        return cls(["*"], elements, src, src, {"*": unit}, comp, name=name)

    @classmethod
    def free(cls, objects, edges, name=None):
        """Free category on an acyclic graph; ``edges`` are (id, src, tgt).

        Arrows are identities ``("id", x)`` and paths, stored as tuples of
        edge ids in diagrammatic order.
        """
        objects = list(objects)
        out = {o: [] for o in objects}
        for e, s, t in edges:
            out[s].append((e, t))
        paths, src, tgt = [], {}, {}

        def walk(start, here, path, seen):
            if here in seen:
                raise ValueError("free category requires an acyclic graph")
            for e, t in out[here]:
                p = path + (e,)
                paths.append(p)
                src[p], tgt[p] = start, t
                walk(start, t, p, seen | {here})

        for o in objects:
            walk(o, o, (), frozenset())
        ident = {o: ("id", o) for o in objects}
        arrows = [ident[o] for o in objects] + paths
        for o in objects:
            src[ident[o]] = tgt[ident[o]] = o
        comp = {}
        for f in arrows:
            for g in arrows:
                if tgt[f] != src[g]:
                    continue
                if f[0] == "id":
                    comp[(g, f)] = g
                elif g[0] == "id":
                    comp[(g, f)] = f
                else:
                    comp[(g, f)] = f + g
        return cls(objects, arrows, src, tgt, ident, comp, name=name)

    # -- serialization -------------------------------------------------

    def to_json(self):
        return {
            "objects": [label(o) for o in self.objects],
            "arrows": [{"id": label(a), "src": label(self.src[a]), "tgt": label(self.tgt[a])}
                       for a in self.arrows],
            "identity": {label(o): label(self.ident[o]) for o in self.objects},
            "composition": [[label(g), label(f), label(self.comp[(g, f)])]
                            for g, f in self.composable_pairs()],
        }

    @classmethod
    def from_json(cls, data):
        objects = list(data["objects"])
        arrows = [a["id"] for a in data["arrows"]]
        src = {a["id"]: a["src"] for a in data["arrows"]}
        tgt = {a["id"]: a["tgt"] for a in data["arrows"]}
        ident = dict(data["identity"])
        comp = {(g, f): h for g, f, h in data["composition"]}
        return cls(objects, arrows, src, tgt, ident, comp)

    def relabel(self):
        """Copy with all ids rendered as strings (what a JSON round trip gives)."""
        return FinCat.from_json(json.loads(json.dumps(self.to_json())))


def to_dot(C: FinCat, name="C") -> str:
    """DOT rendering; posets show covering relations only."""
    lines = [f"digraph {name} {{"]
    for o in C.objects:
        lines.append(f'  "{label(o)}";')
    if C.is_poset():
        for x, y in C.covering_pairs():
            lines.append(f'  "{label(x)}" -> "{label(y)}";')
    else:
        for a in C.arrows:
            if not C.is_identity(a):
                lines.append(f'  "{label(C.src[a])}" -> "{label(C.tgt[a])}" [label="{label(a)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


class FinFunctor:
    def __init__(self, dom: FinCat, cod: FinCat, omap, amap):
        self.dom = dom
        self.cod = cod
        self.omap = dict(omap)
        self.amap = dict(amap)

    def __call__(self, a):
        return self.amap[a]

    def __eq__(self, other):
        return (isinstance(other, FinFunctor) and self.omap == other.omap
                and self.amap == other.amap)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"FinFunctor({self.dom!r} -> {self.cod!r})"

    def key(self):
        """Hashable snapshot, ordered by the domain's declarations."""
        return (tuple(self.omap[o] for o in self.dom.objects),
                tuple(self.amap[a] for a in self.dom.arrows))

    def problems(self):
        out = []
        C, D = self.dom, self.cod
        for a in C.arrows:
            b = self.amap.get(a)
            if b is None:
                out.append(f"arrow {a!r} unmapped")
            elif D.src[b] != self.omap[C.src[a]] or D.tgt[b] != self.omap[C.tgt[a]]:
                out.append(f"arrow {a!r} endpoints not preserved")
        if out:
            return out
        for o in C.objects:
            if self.amap[C.ident[o]] != D.ident[self.omap[o]]:
                out.append(f"identity of {o!r} not preserved")
        for g, f in C.composable_pairs():
            if self.amap[C.comp[(g, f)]] != D.comp[(self.amap[g], self.amap[f])]:
                out.append(f"composite {g!r}.{f!r} not preserved")
        return out

    def is_valid(self):
        return not self.problems()

    def then(self, other: "FinFunctor") -> "FinFunctor":
        """``other . self``."""
        return FinFunctor(self.dom, other.cod,
                          {o: other.omap[v] for o, v in self.omap.items()},
                          {a: other.amap[v] for a, v in self.amap.items()})

    def to_json(self):
        return {"omap": {label(k): label(v) for k, v in self.omap.items()},
                "amap": {label(k): label(v) for k, v in self.amap.items()}}

    @classmethod
    def identity(cls, C):
        return cls(C, C, {o: o for o in C.objects}, {a: a for a in C.arrows})


class SetFunctor:
    """Set-valued functor: ``sets[x]`` is a tuple, ``maps[f]`` a dict."""

    def __init__(self, dom: FinCat, sets, maps):
        self.dom = dom
        self.sets = {x: tuple(v) for x, v in sets.items()}
        self.maps = {f: dict(m) for f, m in maps.items()}

    def __call__(self, f, a):
        return self.maps[f][a]

    def __repr__(self):
        sizes = {label(x): len(v) for x, v in self.sets.items()}
        return f"SetFunctor({sizes})"

    def problems(self):
        C = self.dom
        out = []
        for f in C.arrows:
            m = self.maps.get(f)
            s, t = self.sets[C.src[f]], set(self.sets[C.tgt[f]])
            if m is None or set(m) != set(s) or not set(m.values()) <= t:
                out.append(f"map of {f!r} is not a function between the right sets")
        if out:
            return out
        for o in C.objects:
            if any(self.maps[C.ident[o]][a] != a for a in self.sets[o]):
                out.append(f"identity of {o!r} does not act trivially")
        for g, f in C.composable_pairs():
            gf = self.maps[C.comp[(g, f)]]
            mg, mf = self.maps[g], self.maps[f]
            if any(gf[a] != mg[mf[a]] for a in self.sets[C.src[f]]):
                out.append(f"composite {g!r}.{f!r} not respected")
        return out

    def is_valid(self):
        return not self.problems()

    def restrict(self, q: FinFunctor) -> "SetFunctor":
        """Precomposition ``self . q``."""
        return SetFunctor(q.dom, {x: self.sets[q.omap[x]] for x in q.dom.objects},
                          {f: self.maps[q.amap[f]] for f in q.dom.arrows})

    def to_json(self):
        return {"sets": {label(x): [label(a) for a in v] for x, v in self.sets.items()},
                "maps": {label(f): {label(a): label(b) for a, b in m.items()}
                         for f, m in self.maps.items()}}

    @classmethod
    def constant(cls, C, values):
        values = tuple(values)
        return cls(C, {x: values for x in C.objects},
                   {f: {a: a for a in values} for f in C.arrows})

    @classmethod
    def hom(cls, C, x):
        """Corepresentable ``Hom(x, -)``."""
        return cls(C, {y: tuple(C.hom(x, y)) for y in C.objects},
                   {g: {f: C.comp[(g, f)] for f in C.hom(x, C.src[g])} for g in C.arrows})


class Cocone:
    def __init__(self, apex, legs):
        self.apex = tuple(apex)
        self.legs = legs

    def __repr__(self):
        return f"Cocone(|apex|={len(self.apex)})"


# -- constructions ------------------------------------------------------

def opposite(C: FinCat) -> FinCat:
    comp = {(f, g): h for (g, f), h in C.comp.items()}
    name = None if C.name is None else C.name + "^op"
    if C.name and C.name.endswith("^op"):
        name = C.name[:-3]
    return FinCat(C.objects, C.arrows, C.tgt, C.src, C.ident, comp, name=name)


def product(C: FinCat, D: FinCat) -> FinCat:
    objects = [(x, y) for x in C.objects for y in D.objects]
    arrows = [(f, g) for f in C.arrows for g in D.arrows]
    src = {(f, g): (C.src[f], D.src[g]) for f, g in arrows}
    tgt = {(f, g): (C.tgt[f], D.tgt[g]) for f, g in arrows}
    ident = {(x, y): (C.ident[x], D.ident[y]) for x, y in objects}
    comp = {}
    dpairs = list(D.comp.items())
    for (g1, f1), h1 in C.comp.items():
        for (g2, f2), h2 in dpairs:
            comp[((g1, g2), (f1, f2))] = (h1, h2)
    return FinCat(objects, arrows, src, tgt, ident, comp)


def coproduct(*cats: FinCat) -> FinCat:
    """Disjoint union; objects and arrows are tagged ``(i, x)``."""
    objects, arrows, src, tgt, ident, comp = [], [], {}, {}, {}, {}
    for i, C in enumerate(cats):
        objects += [(i, x) for x in C.objects]
        for a in C.arrows:
            arrows.append((i, a))
            src[(i, a)], tgt[(i, a)] = (i, C.src[a]), (i, C.tgt[a])
        ident.update({(i, x): (i, C.ident[x]) for x in C.objects})
        comp.update({((i, g), (i, f)): (i, h) for (g, f), h in C.comp.items()})
    return FinCat(objects, arrows, src, tgt, ident, comp)


def twisted_arrows(C: FinCat):
    """Twisted arrow category with its projection to ``C^op x C``.

    An arrow ``f -> g`` is ``(f, p, q)`` with ``g = q . f . p``.
    """
    objects = list(C.arrows)
    arrows, src, tgt = [], {}, {}
    for f in C.arrows:
        x, y = C.src[f], C.tgt[f]
        for p in C.in_arrows(x):
            fp = C.comp[(f, p)]
            for q in C.out_arrows(y):
                a = (f, p, q)
                arrows.append(a)
                src[a], tgt[a] = f, C.comp[(q, fp)]
    ident = {f: (f, C.ident[C.src[f]], C.ident[C.tgt[f]]) for f in C.arrows}
    comp = {}
    by_src = {}
    for a in arrows:
        by_src.setdefault(src[a], []).append(a)
    for a in arrows:
        f, p, q = a
        for b in by_src.get(tgt[a], []):
            _, p2, q2 = b
            comp[(b, a)] = (f, C.comp[(p, p2)], C.comp[(q2, q)])
    tw = FinCat(objects, arrows, src, tgt, ident, comp,
                name=None if C.name is None else f"Tw({C.name})")
    target = product(opposite(C), C)
    proj = FinFunctor(tw, target, {f: (C.src[f], C.tgt[f]) for f in objects},
                      {a: (a[1], a[2]) for a in arrows})
    return tw, proj


def comma(q: FinFunctor, d):
    """The comma category ``(q | d)`` with its projection to ``q.dom``."""
    C, D = q.dom, q.cod
    objects = [(c, g) for c in C.objects for g in D.hom(q.omap[c], d)]
    arrows, src, tgt = [], {}, {}
    for h in C.arrows:
        for g2 in D.hom(q.omap[C.tgt[h]], d):
            a = (h, g2)
            arrows.append(a)
            src[a] = (C.src[h], D.comp[(g2, q.amap[h])])
            tgt[a] = (C.tgt[h], g2)
    ident = {(c, g): (C.ident[c], g) for c, g in objects}
    comp = {}
    by_src = {}
    for a in arrows:
        by_src.setdefault(src[a], []).append(a)
    for a in arrows:
        for b in by_src.get(tgt[a], []):
            comp[(b, a)] = (C.comp[(b[0], a[0])], b[1])
    K = FinCat(objects, arrows, src, tgt, ident, comp)
    proj = FinFunctor(K, C, {o: o[0] for o in objects}, {a: a[0] for a in arrows})
    return K, proj


def _quotient(elements, relations):
    """Classes of the equivalence generated by ``relations`` on ``elements``.

    Returns ``(reps, rep_of)`` where each class is represented by its
    earliest member in ``elements`` order.
    """
    uf = UnionFind(elements)
    for a, b in relations:
        uf.union(a, b)
    order = {e: i for i, e in enumerate(elements)}
    best = {}
    for e in elements:
        r = uf[e]
        if r not in best or order[e] < order[best[r]]:
            best[r] = e
    rep_of = {e: best[uf[e]] for e in elements}
    reps = sorted(set(rep_of.values()), key=order.__getitem__)
    return reps, rep_of


def colim_set(F: SetFunctor) -> Cocone:
    C = F.dom
    elements = [(x, a) for x in C.objects for a in F.sets[x]]
    relations = [((C.src[f], a), (C.tgt[f], b)) for f in C.arrows for a, b in F.maps[f].items()]
    reps, rep_of = _quotient(elements, relations)
    legs = {x: {a: rep_of[(x, a)] for a in F.sets[x]} for x in C.objects}
    return Cocone(reps, legs)


def cocone_mediators(F: SetFunctor, apex, legs):
    """All functions from ``colim_set(F).apex`` to ``apex`` factoring ``legs``.

    Brute force over every function, used to test the universal property.
    """
    colim = colim_set(F)
    found = []
    for values in itertools.product(apex, repeat=len(colim.apex)):
        m = dict(zip(colim.apex, values))
        if all(m[colim.legs[x][a]] == legs[x][a] for x in F.dom.objects for a in F.sets[x]):
            found.append(m)
    return found


def left_kan(F: SetFunctor, q: FinFunctor):
    """Pointwise left Kan extension of ``F`` along ``q``.

    Elements of the value at ``d`` are class representatives
    ``((c, g), a)`` with ``g: q(c) -> d`` and ``a`` in ``F(c)``.
    Returns ``(lan, unit)`` where ``unit[c][a]`` is the image of ``a``
    in ``lan(q c)``.
    """
    C, D = q.dom, q.cod
    sets, rep_maps = {}, {}
    for d in D.objects:
        elements = [((c, g), a) for c in C.objects for g in D.hom(q.omap[c], d) for a in F.sets[c]]
        relations = []
        for h in C.arrows:
            c, c2 = C.src[h], C.tgt[h]
            qh = q.amap[h]
            mh = F.maps[h]
            for g2 in D.hom(q.omap[c2], d):
                g = D.comp[(g2, qh)]
                for a in F.sets[c]:
                    relations.append((((c, g), a), ((c2, g2), mh[a])))
        reps, rep_of = _quotient(elements, relations)
        sets[d] = reps
        rep_maps[d] = rep_of
    maps = {}
    for delta in D.arrows:
        d, d2 = D.src[delta], D.tgt[delta]
        maps[delta] = {e: rep_maps[d2][((e[0][0], D.comp[(delta, e[0][1])]), e[1])] for e in sets[d]}
    lan = SetFunctor(D, sets, maps)
    unit = {c: {a: rep_maps[q.omap[c]][((c, D.ident[q.omap[c]]), a)] for a in F.sets[c]}
            for c in C.objects}
    return lan, unit


# -- natural transformations ----------------------------------------------

def nat_transformations(F: SetFunctor, G: SetFunctor, cap=None):
    """All natural transformations ``F -> G`` as dicts ``x -> {a: b}``.

    Backtracks element by element; every choice is propagated along all
    arrows so that only consistent partial assignments survive.
    """
    C = F.dom
    cap = MAX_FUNCTORS if cap is None else cap
    slots = [(x, a) for x in C.objects for a in F.sets[x]]
    results = []

    def propagate(assign, x, a, b):
        stack = [(x, a, b)]
        added = []
        while stack:
            x, a, b = stack.pop()
            cur = assign.get((x, a))
            if cur is not None:
                if cur != b:
                    for k in added:
                        del assign[k]
                    return None
                continue
            assign[(x, a)] = b
            added.append((x, a))
            for f in C.out_arrows(x):
                stack.append((C.tgt[f], F.maps[f][a], G.maps[f][b]))
        return added

    def go(i, assign):
        while i < len(slots) and slots[i] in assign:
            i += 1
        if i == len(slots):
            results.append({x: {a: assign[(x, a)] for a in F.sets[x]} for x in C.objects})
            if len(results) > cap:
                raise CapExceeded("natural transformation count exceeds cap")
            return
        x, a = slots[i]
        for b in G.sets[x]:
            added = propagate(assign, x, a, b)
            if added is None:
                continue
            go(i + 1, assign)
            for k in added:
                del assign[k]

    go(0, {})
    return results


# -- functor enumeration ----------------------------------------------------

def _generators(C: FinCat):
    """Greedy generating set (declared order) with a word for every arrow."""
    words = {C.ident[o]: () for o in C.objects}
    gens = []
    for a in C.arrows:
        if a in words:
            continue
        gens.append(a)
        words[a] = (len(gens) - 1,)
        changed = True
        while changed:
            changed = False
            for f, wf in list(words.items()):
                for g in C.out_arrows(C.tgt[f]):
                    wg = words.get(g)
                    if wg is None:
                        continue
                    h = C.comp[(g, f)]
                    if h not in words:
                        words[h] = wf + wg
                        changed = True
    return gens, words


def iter_functors(C: FinCat, D: FinCat):
    """Depth-first enumeration of all functors ``C -> D``.

    Objects are assigned in declared order, then generators in declared
    order; composites are checked as soon as they are determined.
    """
    gens, words = _generators(C)
    steps = {}
    for a in C.arrows:
        w = words[a]
        steps[a] = 0 if not w else 1 + max(w)
    derived_at = [[] for _ in range(len(gens) + 1)]
    for a in C.arrows:
        if not (len(words[a]) == 1 and gens[words[a][0]] == a):
            derived_at[steps[a]].append(a)
    checks_at = [[] for _ in range(len(gens) + 1)]
    for g, f in C.composable_pairs():
        checks_at[max(steps[g], steps[f], steps[C.comp[(g, f)]])].append((g, f))
    gen_needs = {}
    for i, a in enumerate(gens):
        j = max(C.obj_index(C.src[a]), C.obj_index(C.tgt[a]))
        gen_needs.setdefault(j, []).append(a)
    objs = C.objects
    omap, amap = {}, {}

    def stage(step):
        for a in derived_at[step]:
            w = words[a]
            if not w:
                amap[a] = D.ident[omap[C.src[a]]]
            else:
                r = amap[gens[w[0]]]
                for k in w[1:]:
                    r = D.comp[(amap[gens[k]], r)]
                amap[a] = r
        for g, f in checks_at[step]:
            if amap[C.comp[(g, f)]] != D.comp[(amap[g], amap[f])]:
                return False
        return True

    def gen_step(i):
        if i == len(gens):
            yield FinFunctor(C, D, dict(omap), dict(amap))
            return
        a = gens[i]
        for b in D.hom(omap[C.src[a]], omap[C.tgt[a]]):
            amap[a] = b
            if stage(i + 1):
                yield from gen_step(i + 1)
        amap.pop(a, None)

    def obj_step(j):
        if j == len(objs):
            if stage(0):
                yield from gen_step(0)
            return
        for y in D.objects:
            omap[objs[j]] = y
            if all(D.hom(omap[C.src[a]], omap[C.tgt[a]]) for a in gen_needs.get(j, ())):
                yield from obj_step(j + 1)
        omap.pop(objs[j], None)

    yield from obj_step(0)


def enumerate_functors(C: FinCat, D: FinCat, cap=None):
    cap = MAX_FUNCTORS if cap is None else cap
    out = []
    for F in iter_functors(C, D):
        out.append(F)
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} functors from {C!r} to {D!r}")
    return out


# -- isomorphism search -------------------------------------------------------

def _object_profile(C: FinCat, x):
    out_counts = sorted(len(C.hom(x, y)) for y in C.objects)
    in_counts = sorted(len(C.hom(y, x)) for y in C.objects)
    return (len(C.out_arrows(x)), len(C.in_arrows(x)), len(C.hom(x, x)),
            tuple(out_counts), tuple(in_counts))


def find_isomorphism(C: FinCat, D: FinCat):
    """An isomorphism of categories ``C -> D`` or ``None``."""
    if len(C.objects) != len(D.objects) or len(C.arrows) != len(D.arrows):
        return None
    cprof = {x: _object_profile(C, x) for x in C.objects}
    dprof = {y: _object_profile(D, y) for y in D.objects}
    if sorted(cprof.values()) != sorted(dprof.values()):
        return None
    # most constrained objects first: rare profiles, then declared order
    freq = {}
    for p in cprof.values():
        freq[p] = freq.get(p, 0) + 1
    order = sorted(C.objects, key=lambda x: (freq[cprof[x]], cprof[x], C.obj_index(x)))
    omap, used = {}, set()

    def objects_ok(x, y):
        for x2, y2 in omap.items():
            if len(C.hom(x, x2)) != len(D.hom(y, y2)) or len(C.hom(x2, x)) != len(D.hom(y2, y)):
                return False
        return len(C.hom(x, x)) == len(D.hom(y, y))

    pairs = None

    def arrow_search():
        nonlocal pairs
        homs = [(x, x2) for x in C.objects for x2 in C.objects if C.hom(x, x2)]
        homs.sort(key=lambda p: len(C.hom(*p)))
        amap = {}
        for x in C.objects:
            amap[C.ident[x]] = D.ident[omap[x]]
        checks = list(C.composable_pairs())

        def consistent():
            for g, f in checks:
                if g in amap and f in amap:
                    h = C.comp[(g, f)]
                    if h in amap and amap[h] != D.comp[(amap[g], amap[f])]:
                        return False
            return True

        def go(i):
            if i == len(homs):
                return True
            x, x2 = homs[i]
            src_arrows = [a for a in C.hom(x, x2) if a not in amap]
            tgt_arrows = [b for b in D.hom(omap[x], omap[x2]) if b not in set(amap.values())]
            return place(i, src_arrows, tgt_arrows)

        def place(i, src_arrows, tgt_arrows):
            if not src_arrows:
                return go(i + 1)
            a = src_arrows[0]
            for b in tgt_arrows:
                amap[a] = b
                if consistent() and place(i, src_arrows[1:], [t for t in tgt_arrows if t != b]):
                    return True
                del amap[a]
            return False

        if go(0):
            pairs = dict(amap)
            return True
        return False

    def assign(i):
        if i == len(order):
            return arrow_search()
        x = order[i]
        for y in D.objects:
            if y in used or dprof[y] != cprof[x] or not objects_ok(x, y):
                continue
            omap[x] = y
            used.add(y)
            if assign(i + 1):
                return True
            del omap[x]
            used.discard(y)
        return False

    if assign(0):
        return FinFunctor(C, D, omap, pairs)
    return None


# -- flatness over [2] ------------------------------------------------------------

def _reflexive_transitive(objects, pairs):
    up = {x: {x} for x in objects}
    for x, y in pairs:
        up[x].add(y)
    changed = True
    while changed:
        changed = False
        for x in objects:
            new = set(up[x])
            for y in up[x]:
                new |= up[y]
            if new != up[x]:
                up[x] = new
                changed = True
    return up


def flat_over_2_failures(C: FinCat, level):
    """Relations of ``C`` not recovered by gluing ``C_{01}`` and ``C_{12}``.

    ``level`` maps objects of the poset ``C`` to 0, 1 or 2 monotonically.
    """
    if not C.is_poset():
        raise UnsupportedInput("flatness over [2] is only decidable here for posets")
    for x, y in ((C.src[a], C.tgt[a]) for a in C.arrows):
        if level[x] > level[y]:
            raise ValueError("level map is not monotone")
    glued = [(C.src[a], C.tgt[a]) for a in C.arrows
             if {level[C.src[a]], level[C.tgt[a]]} != {0, 2}]
    up = _reflexive_transitive(C.objects, glued)
    return [(C.src[a], C.tgt[a]) for a in C.arrows if C.tgt[a] not in up[C.src[a]]]


def flat_over_2_check(p) -> bool:
    """Whether ``C_{01}`` glued to ``C_{12}`` along ``C_1`` recovers ``C``.

    ``p`` is a functor to the chain [2] (or a plain level dict paired with
    ``C`` as ``(C, level)``).
    """
    if isinstance(p, FinFunctor):
        C, level = p.dom, p.omap
    else:
        C, level = p
    return not flat_over_2_failures(C, level)
