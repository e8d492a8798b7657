"""Correspondences between precategories: the kernel encoding, the
encoding as a precategory over the segment [1], representability, and
the comparison category built from segment categories."""

from __future__ import annotations

import itertools

from .fincat import FinCat, FinFunctor, SetFunctor, enumerate_functors, label
from .quiv import Precategory, Quiver, category_precategory
from .shapes import BmWord
from .yoneda import ModuleMap, Presheaf, yoneda_inverse, yoneda_presheaf


# -- correspondences ---------------------------------------------------------------------------

class Correspondence:
    """A kernel ``K(c, d)`` acted on by ``C`` from the right and ``D`` from the left.

    ``right[(c2, c, d, f, k)]`` is ``k`` precomposed with ``f`` in ``C(c2, c)``;
    ``left[(c, d, d2, k, g)]`` is ``k`` followed by ``g`` in ``D(d, d2)``.
    Equivalently a functor from ``D`` to presheaves on ``C``.
    """

    def __init__(self, C: Precategory, D: Precategory, sets, right, left):
        self.C = C
        self.D = D
        self.sets = {k: tuple(v) for k, v in sets.items()}
        self.right = dict(right)
        self.left = dict(left)

    def __call__(self, c, d):
        return self.sets.get((c, d), ())

    def __repr__(self):
        return f"Correspondence({sum(len(v) for v in self.sets.values())} kernel elements)"

    def problems(self):
        C, D = self.C, self.D
        A, B = C.quiver, D.quiver
        cs, ds = C.X.objects, D.X.objects
        out = []
        for c in cs:
            for d in ds:
                for k in self(c, d):
                    for c2 in cs:
                        for f in A(c2, c):
                            if self.right.get((c2, c, d, f, k)) not in self(c2, d):
                                out.append(("right action missing", c2, c, d, f, k))
                    for d2 in ds:
                        for g in B(d, d2):
                            if self.left.get((c, d, d2, k, g)) not in self(c, d2):
                                out.append(("left action missing", c, d, d2, k, g))
        if out:
            return out
        for c in cs:
            for d in ds:
                for k in self(c, d):
                    if self.right[(c, c, d, C.eta(c, c, C.X.ident[c]), k)] != k:
                        out.append(("right unit", c, d, k))
                    if self.left[(c, d, d, k, D.eta(d, d, D.X.ident[d]))] != k:
                        out.append(("left unit", c, d, k))
                    for c2 in cs:
                        for f in A(c2, c):
                            kf = self.right[(c2, c, d, f, k)]
                            for c3 in cs:
                                for f2 in A(c3, c2):
                                    if (self.right[(c3, c2, d, f2, kf)]
                                            != self.right[(c3, c, d, C.mu(c3, c2, c, f2, f), k)]):
                                        out.append(("right associativity", c3, c2, c, d))
                            for d2 in ds:
                                for g in B(d, d2):
                                    if (self.left[(c2, d, d2, kf, g)]
                                            != self.right[(c2, c, d2, f, self.left[(c, d, d2, k, g)])]):
                                        out.append(("actions do not commute", c2, c, d, d2))
                    for d2 in ds:
                        for g in B(d, d2):
                            kg = self.left[(c, d, d2, k, g)]
                            for d3 in ds:
                                for g2 in B(d2, d3):
                                    if (self.left[(c, d2, d3, kg, g2)]
                                            != self.left[(c, d, d3, k, D.mu(d, d2, d3, g, g2))]):
                                        out.append(("left associativity", c, d, d2, d3))
        return out

    def is_valid(self):
        return not self.problems()

    def presheaf(self, d) -> Presheaf:
        """``K(-, d)`` as a presheaf on ``C``."""
        C = self.C
        from .yoneda import opposite_precat
        Xop = opposite_precat(C).X
        sets = {c: self(c, d) for c in C.X.objects}
        maps = {a: {k: k for k in sets[Xop.src[a]]} for a in Xop.arrows}
        action = {(c, c2, f, k): self.right[(c2, c, d, f, k)]
                  for c in C.X.objects for c2 in C.X.objects
                  for f in C.quiver(c2, c) for k in self(c, d)}
        return Presheaf(C, SetFunctor(Xop, sets, maps), action)

    def to_json(self):
        return {"source": self.C.to_json(), "target": self.D.to_json(),
                "kernel": [{"c": label(c), "d": label(d), "elements": [label(k) for k in v]}
                           for (c, d), v in self.sets.items()],
                "right": [[label(x) for x in key] + [label(v)] for key, v in self.right.items()],
                "left": [[label(x) for x in key] + [label(v)] for key, v in self.left.items()]}

    @classmethod
    def from_json(cls, data):
        C = Precategory.from_json(data["source"])
        D = Precategory.from_json(data["target"])
        sets = {(r["c"], r["d"]): r["elements"] for r in data["kernel"]}
        right = {tuple(r[:5]): r[5] for r in data["right"]}
        left = {tuple(r[:5]): r[5] for r in data["left"]}
        return cls(C, D, sets, right, left)


def graph_correspondence(G: FinFunctor) -> Correspondence:
    """Kernel ``K(c, d) = C(c, G d)`` of a functor ``G: D -> C`` of categories."""
    Dc, Cc = G.dom, G.cod
    C, D = category_precategory(Cc), category_precategory(Dc)
    sets = {(c, d): tuple(Cc.hom(c, G.omap[d])) for c in Cc.objects for d in Dc.objects}
    right, left = {}, {}
    for (c, d), ks in sets.items():
        for k in ks:
            for f in Cc.in_arrows(c):
                right[(Cc.src[f], c, d, f, k)] = Cc.comp[(k, f)]
            for g in Dc.out_arrows(d):
                left[(c, d, Dc.tgt[g], k, g)] = Cc.comp[(G.amap[g], k)]
    return Correspondence(C, D, sets, right, left)


def identity_correspondence(C: Precategory) -> Correspondence:
    A = C.quiver
    cs = C.X.objects
    sets = {(c, d): A(c, d) for c in cs for d in cs}
    right = {(c2, c, d, f, k): C.mu(c2, c, d, f, k)
             for c in cs for d in cs for k in A(c, d) for c2 in cs for f in A(c2, c)}
    left = {(c, d, d2, k, g): C.mu(c, d, d2, k, g)
            for c in cs for d in cs for k in A(c, d) for d2 in cs for g in A(d, d2)}
    return Correspondence(C, C, sets, right, left)


# -- categories over the segment -------------------------------------------------------------

class OverSegment:
    """A precategory with each object placed over 0 or 1 and nothing going from 1 to 0."""

    def __init__(self, precat: Precategory, side):
        self.precat = precat
        self.side = dict(side)

    def problems(self):
        A = self.precat.quiver
        out = []
        for x in self.precat.X.objects:
            if self.side.get(x) not in (0, 1):
                out.append(("no side", x))
        for x in self.precat.X.objects:
            for y in self.precat.X.objects:
                if self.side.get(x) == 1 and self.side.get(y) == 0 and A(x, y):
                    out.append(("arrow from 1 to 0", x, y))
        return out

    def __repr__(self):
        return f"OverSegment({self.precat!r})"

    def to_json(self):
        return {"precategory": self.precat.to_json(),
                "side": {label(x): s for x, s in self.side.items()}}

    @classmethod
    def from_json(cls, data):
        P = Precategory.from_json(data["precategory"])
        return cls(P, dict(data["side"]))


def restrict_precat(P: Precategory, objects) -> Precategory:
    """Full sub-precategory on ``objects`` (discrete object sets)."""
    objects = list(objects)
    keep = set(objects)
    X = FinCat.discrete(objects)
    Q = Quiver.over(X, {(x, y): P.quiver(x, y) for x in objects for y in objects})
    unit = {(x, x, X.ident[x]): P.eta(x, x, P.X.ident[x]) for x in objects}
    comp = {k: v for k, v in P.comp.items() if k[0] in keep and k[1] in keep and k[2] in keep}
    return Precategory(Q, unit, comp)


def to_over_segment(K: Correspondence) -> OverSegment:
    """Objects ``(0, c)`` and ``(1, d)``; cross arrows are kernel elements."""
    C, D = K.C, K.D
    cs = [(0, c) for c in C.X.objects]
    ds = [(1, d) for d in D.X.objects]
    objects = cs + ds
    X = FinCat.discrete(objects)
    sets = {}
    for (s, x) in objects:
        for (t, y) in objects:
            if s == t == 0:
                sets[((s, x), (t, y))] = C.quiver(x, y)
            elif s == t == 1:
                sets[((s, x), (t, y))] = D.quiver(x, y)
            elif s == 0:
                sets[((s, x), (t, y))] = K(x, y)
            else:
                sets[((s, x), (t, y))] = ()
    Q = Quiver.over(X, sets)
    unit = {}
    for (s, x) in objects:
        P = C if s == 0 else D
        unit[((s, x), (s, x), X.ident[(s, x)])] = P.eta(x, x, P.X.ident[x])
    comp = {}
    for u in objects:
        for x in objects:
            for v in objects:
                for b in sets[(u, x)]:
                    for a in sets[(x, v)]:
                        comp[(u, x, v, b, a)] = _compose_over(K, u, x, v, b, a)
    return OverSegment(Precategory(Q, unit, comp), {o: o[0] for o in objects})


def _compose_over(K, u, x, v, b, a):
    (s, u0), (t, x0), (r, v0) = u, x, v
    if s == t == r == 0:
        return K.C.mu(u0, x0, v0, b, a)
    if s == t == r == 1:
        return K.D.mu(u0, x0, v0, b, a)
    if t == 0:
        return K.right[(u0, x0, v0, b, a)]
    return K.left[(u0, x0, v0, b, a)]


def from_over_segment(S: OverSegment) -> Correspondence:
    bad = S.problems()
    if bad:
        raise ValueError(f"not a category over the segment: {bad[0]}")
    P = S.precat
    xs = [x for x in P.X.objects if S.side[x] == 0]
    ys = [y for y in P.X.objects if S.side[y] == 1]
    C, D = restrict_precat(P, xs), restrict_precat(P, ys)
    sets = {(c, d): P.quiver(c, d) for c in xs for d in ys}
    right, left = {}, {}
    for (c, d), ks in sets.items():
        for k in ks:
            for c2 in xs:
                for f in P.quiver(c2, c):
                    right[(c2, c, d, f, k)] = P.mu(c2, c, d, f, k)
            for d2 in ys:
                for g in P.quiver(d, d2):
                    left[(c, d, d2, k, g)] = P.mu(c, d, d2, k, g)
    return Correspondence(C, D, sets, right, left)


def correspondence_roundtrip_problems(K: Correspondence):
    """``from_over_segment(to_over_segment(K))`` equals ``K`` after stripping side tags."""
    K2 = from_over_segment(to_over_segment(K))
    out = []
    strip = {(0, c): c for c in K.C.X.objects}
    strip.update({(1, d): d for d in K.D.X.objects})

    def untag(t):
        return tuple(strip.get(x, x) if i < 3 else x for i, x in enumerate(t))

    if ({(strip[c], strip[d]): v for (c, d), v in K2.sets.items() if v}
            != {k: v for k, v in K.sets.items() if v}):
        out.append(("kernel",))
    if {untag(k): v for k, v in K2.right.items()} != K.right:
        out.append(("right action",))
    if {untag(k): v for k, v in K2.left.items()} != K.left:
        out.append(("left action",))
    for P, P2 in ((K.C, K2.C), (K.D, K2.D)):
        if {(strip[u], strip[x], strip[v], b, a): r for (u, x, v, b, a), r in P2.comp.items()} != P.comp:
            out.append(("composition",))
    return out


def segment_roundtrip_problems(S: OverSegment):
    """``to_over_segment(from_over_segment(S))`` equals ``S`` after tagging objects by side."""
    S2 = to_over_segment(from_over_segment(S))
    tag = {x: (S.side[x], x) for x in S.precat.X.objects}
    P, P2 = S.precat, S2.precat
    out = []
    for x in P.X.objects:
        for y in P.X.objects:
            if tuple(P.quiver(x, y)) != tuple(P2.quiver(tag[x], tag[y])):
                out.append(("component", x, y))
    for (u, x, v, b, a), r in P.comp.items():
        if P2.mu(tag[u], tag[x], tag[v], b, a) != r:
            out.append(("composition", u, x, v))
    if {tag[x]: s for x, s in S.side.items()} != S2.side:
        out.append(("sides",))
    return out


# -- representability --------------------------------------------------------------------------

def universal_element(K: Correspondence, d):
    """``(c, k)`` with ``k`` in ``K(c, d)`` inducing ``Y(c) ~ K(-, d)``, or ``None``.

    Candidates are tried in declaration order, so an identity in a graph
    kernel is found first.
    """
    F = K.presheaf(d)
    C = K.C
    for c in C.X.objects:
        if any(len(C.quiver(z, c)) != len(F(z)) for z in C.X.objects):
            continue
        Y = yoneda_presheaf(C, c)
        for k in F(c):
            m = yoneda_inverse(C, c, F, k, Y)
            if m.is_iso() and not m.problems():
                return c, k, m
    return None


def right_representable(K: Correspondence):
    """The functor ``D -> C`` represented by ``K``, or ``None`` with the failing object.

    Returns ``(omap, hmap, None)`` on success and ``(None, None, d)`` otherwise.
    ``hmap[(d, d2, g)]`` is the element of ``C(omap d, omap d2)`` induced by ``g``.
    """
    C, D = K.C, K.D
    univ = {}
    for d in D.X.objects:
        found = universal_element(K, d)
        if found is None:
            return None, None, d
        univ[d] = found
    omap = {d: univ[d][0] for d in D.X.objects}
    hmap = {}
    for d in D.X.objects:
        c, k, _ = univ[d]
        for d2 in D.X.objects:
            c2, _, m2 = univ[d2]
            for g in D.quiver(d, d2):
                pushed = K.left[(c, d, d2, k, g)]
                hmap[(d, d2, g)] = m2.inverse()(c, pushed)
    return omap, hmap, None


def represented_functor_problems(K: Correspondence, omap, hmap):
    """The extracted data respects units and composition."""
    C, D = K.C, K.D
    out = []
    for d in D.X.objects:
        if hmap[(d, d, D.eta(d, d, D.X.ident[d]))] != C.eta(omap[d], omap[d], C.X.ident[omap[d]]):
            out.append(("unit", d))
    for (u, x, v, b, a), r in D.comp.items():
        if hmap[(u, v, r)] != C.mu(omap[u], omap[x], omap[v], hmap[(u, x, b)], hmap[(x, v, a)]):
            out.append(("composition", u, x, v))
    return out


# -- the comparison category for LM words --------------------------------------------------------

class _Pieces:
    """Segment categories of several words glued along their ends ``L`` and ``R``.

    Objects are ``(tag, (i, j))`` for intervals (or the bare interval when
    there is a single untagged piece), plus ``"L"`` and ``"R"``.  Arrows are
    ``(src, via, tgt)`` as in ``SegmentCat``; ``via`` is a point of the
    source interval and may reach any point-class object of either piece.
    """

    def __init__(self, pieces):
        self.pieces = pieces
        single = len(pieces) == 1 and pieces[0][0] is None
        self.name = (lambda tag, iv: iv) if single else (lambda tag, iv: (tag, iv))
        objects, cls_of, interval = [], {"L": "L", "R": "R"}, {}
        for tag, w in pieces:
            n = w.n
            for i in range(n + 1):
                for j in range(i, n + 1):
                    o = self.name(tag, (i, j))
                    objects.append(o)
                    interval[o] = (tag, i, j, w)
                    if i == j:
                        cls_of[o] = "LR"[w.bits[i]]
        objects += ["L", "R"]
        self.cls_of, self.interval = cls_of, interval
        arrows, src, tgt = [], {}, {}

        def add(a):
            arrows.append(a)
            src[a], tgt[a] = a[0], a[2]

        for o in objects:
            if o in ("L", "R"):
                for t in objects:
                    if cls_of.get(t) == o:
                        add((o, None, t))
                continue
            tag, i, j, w = interval[o]
            for i2 in range(i, j + 1):
                for j2 in range(i2 + 1, j + 1):
                    add((o, None, self.name(tag, (i2, j2))))
            for k in range(i, j + 1):
                for t in objects:
                    if cls_of.get(t) == "LR"[w.bits[k]]:
                        add((o, k, t))
        ident = {}
        for o in objects:
            diag = o not in ("L", "R") and interval[o][1] == interval[o][2]
            ident[o] = (o, interval[o][1], o) if diag else (o, None, o)
        comp = {}
        out_of = {}
        for a in arrows:
            out_of.setdefault(a[0], []).append(a)
        for f in arrows:
            for g in out_of.get(f[2], ()):
                if f[0] in ("L", "R"):
                    h = (f[0], None, g[2])
                elif f[1] is not None:
                    h = (f[0], f[1], g[2])
                else:
                    h = (f[0], g[1], g[2])
                comp[(g, f)] = h
        self.cat = FinCat(objects, arrows, src, tgt, ident, comp)

    def arrow(self, s, via, t):
        """Normalized arrow id from ``s`` to ``t``."""
        if s == t:
            return self.cat.ident[s]
        if s in ("L", "R") or t not in self.cls_of:
            return (s, None, t)
        if via is None:
            raise ValueError("a point must be named to reach a point-class object")
        return (s, via, t)

    def squares(self):
        out = []
        for tag, w in self.pieces:
            n = w.n
            for i in range(n + 1):
                for j in range(i, n + 1):
                    for k in range(j, n + 1):
                        nm = lambda a, b: self.name(tag, (a, b))
                        top, l, r, b = nm(i, k), nm(i, j), nm(j, k), nm(j, j)
                        out.append((self.arrow(top, None if l not in self.cls_of else j, l),
                                    self.arrow(top, None if r not in self.cls_of else j, r),
                                    self.arrow(l, j, b), self.arrow(r, j, b)))
        return out


class EPhi:
    """Total category of the correspondence from ``E(s)`` to its doubled version.

    ``cat`` has objects ``("A", e)`` for ``e`` in ``E(s)`` and ``("B", e)`` for
    the doubled category; cross arrows are ``("x", e, i, b)`` with ``b`` leaving
    the i-th corepresenting object of ``e``.  ``squares`` are the
    distinguished squares of the doubled part and ``products`` the second
    kind of distinguished diagrams, one family of cross arrows per ``e``.
    """

    def __init__(self, word: BmWord):
        if not word.in_lm():
            raise ValueError(f"{word} is not a left-module word")
        self.word = word
        n = word.n
        self.A = _Pieces([(None, word)])
        if word.in_ass():
            self.case = "ass"
            self.B = _Pieces([("'", word), ("''", word.op())])
            nn = n
            first = lambda iv: ("'", iv)
            second = lambda iv: ("''", iv)
            top = None
        else:
            self.case = "lm"
            star = word.star()
            self.B = _Pieces([(None, star)])
            nn = star.n
            first = second = lambda iv: iv
            top = n
        self.nn = nn

        def e1(o):
            return o if o in ("L", "R") else first(o)

        def e2(o):
            if o in ("L", "R"):
                return "R" if o == "L" else "L"
            return second((nn - o[1], nn - o[0]))

        def summands(o):
            if o == "R" or (o not in ("L",) and top is not None and o == (top, top)):
                return []
            if top is not None and o != "L" and o[1] == top:
                return [(o[0], nn - o[0])]
            return [e1(o), e2(o)]

        self.summands = {o: summands(o) for o in self.A.cat.objects}
        B = self.B

        def image(g, which):
            s, via, t = g
            if which == 1:
                return B.arrow(e1(s), via, e1(t))
            return B.arrow(e2(s), None if via is None else nn - via, e2(t))

        smap = {}
        Acat = self.A.cat
        for g in Acat.arrows:
            s, via, t = g
            ys, ys2 = self.summands[t], self.summands[s]
            m = {}
            for i, y in enumerate(ys):
                if len(ys2) == 2:
                    m[i] = (i, image(g, i + 1))
                else:
                    (y2,) = ys2
                    v = via if i == 0 else (None if via is None else nn - via)
                    m[i] = (0, B.arrow(y2, v, y))
            smap[g] = m
        self.smap = smap
        objects = [("A", o) for o in Acat.objects] + [("B", o) for o in B.cat.objects]
        arrows, src, tgt, comp = [], {}, {}, {}
        for g in Acat.arrows:
            a = ("A", g)
            arrows.append(a)
            src[a], tgt[a] = ("A", Acat.src[g]), ("A", Acat.tgt[g])
        for b in B.cat.arrows:
            a = ("B", b)
            arrows.append(a)
            src[a], tgt[a] = ("B", B.cat.src[b]), ("B", B.cat.tgt[b])
        for o in Acat.objects:
            for i, y in enumerate(self.summands[o]):
                for b in B.cat.out_arrows(y):
                    a = ("x", o, i, b)
                    arrows.append(a)
                    src[a], tgt[a] = ("A", o), ("B", B.cat.tgt[b])
        ident = {("A", o): ("A", Acat.ident[o]) for o in Acat.objects}
        ident.update({("B", o): ("B", B.cat.ident[o]) for o in B.cat.objects})
        for (g, f), h in Acat.comp.items():
            comp[(("A", g), ("A", f))] = ("A", h)
        for (g, f), h in B.cat.comp.items():
            comp[(("B", g), ("B", f))] = ("B", h)
        for a in arrows:
            if a[0] != "x":
                continue
            _, o, i, b = a
            for c in B.cat.out_arrows(B.cat.tgt[b]):
                comp[(("B", c), a)] = ("x", o, i, B.cat.comp[(c, b)])
            for g in Acat.in_arrows(o):
                j, beta = smap[g][i]
                comp[(a, ("A", g))] = ("x", Acat.src[g], j, B.cat.comp[(b, beta)])
        self.cat = FinCat(objects, arrows, src, tgt, ident, comp, name=f"Ephi({word})")
        self.squares = [tuple(("B", a) for a in sq) for sq in B.squares()]
        self.products = [(("A", o), [("x", o, i, B.cat.ident[y]) for i, y in enumerate(self.summands[o])])
                         for o in Acat.objects]
        self.a_squares = [tuple(("A", a) for a in sq) for sq in self.A.squares()]

    def __repr__(self):
        return f"EPhi({self.word}: {len(self.cat.objects)} objects, {len(self.cat.arrows)} arrows)"


def build_e_phi(s) -> EPhi:
    return EPhi(s if isinstance(s, BmWord) else BmWord.parse(s))


def _square_ok(F: SetFunctor, sq):
    to_l, to_r, lb, rb = sq
    C = F.dom
    top, l, r = C.src[to_l], C.tgt[to_l], C.tgt[to_r]
    pb = {(x, y) for x in F.sets[l] for y in F.sets[r] if F.maps[lb][x] == F.maps[rb][y]}
    image = [(F.maps[to_l][t], F.maps[to_r][t]) for t in F.sets[top]]
    return len(set(image)) == len(image) and set(image) == pb


def _product_ok(F: SetFunctor, obj, legs):
    image = [tuple(F.maps[a][t] for a in legs) for t in F.sets[obj]]
    full = set(itertools.product(*[F.sets[F.dom.tgt[a]] for a in legs]))
    return len(set(image)) == len(image) and set(image) == full


def e_phi_cartesian(E: EPhi, F: SetFunctor, second_kind=True):
    """``F`` on ``E.cat`` sends the distinguished diagrams to limits."""
    if not all(_square_ok(F, sq) for sq in E.squares):
        return False
    return not second_kind or all(_product_ok(F, o, legs) for o, legs in E.products)


def b_cartesian(E: EPhi, G: SetFunctor):
    return all(_square_ok(G, tuple(a[1] for a in sq)) for sq in E.squares)


def right_kan_extension(E: EPhi, G: SetFunctor) -> SetFunctor:
    """Extend ``G`` on the doubled part by products over the corepresenting objects."""
    B = E.B.cat
    sets, maps = {}, {}
    for o in E.cat.objects:
        side, e = o
        if side == "B":
            sets[o] = G.sets[e]
        else:
            sets[o] = tuple(itertools.product(*[G.sets[y] for y in E.summands[e]]))
    for a in E.cat.arrows:
        s, t = E.cat.src[a], E.cat.tgt[a]
        if a[0] == "B":
            maps[a] = G.maps[a[1]]
        elif a[0] == "x":
            _, o, i, b = a
            maps[a] = {tup: G.maps[b][tup[i]] for tup in sets[s]}
        else:
            g = a[1]
            m = E.smap[g]
            maps[a] = {tup: tuple(G.maps[m[i][1]][tup[m[i][0]]] for i in range(len(E.summands[g[2]])))
                       for tup in sets[s]}
    return SetFunctor(E.cat, sets, maps)


def restrict_to_b(E: EPhi, F: SetFunctor) -> SetFunctor:
    B = E.B.cat
    return SetFunctor(B, {o: F.sets[("B", o)] for o in B.objects},
                      {b: F.maps[("B", b)] for b in B.arrows})


def finite_sets(max_size=2) -> FinCat:
    """Skeleton of finite sets ``{0..k-1}``, ``k <= max_size``, with all functions."""
    objects = list(range(max_size + 1))
    arrows, src, tgt = [], {}, {}
    for a in objects:
        for b in objects:
            for values in itertools.product(range(b), repeat=a):
                f = (a, b, values)
                arrows.append(f)
                src[f], tgt[f] = a, b
    ident = {a: (a, a, tuple(range(a))) for a in objects}
    comp = {}
    for f in arrows:
        for g in arrows:
            if f[1] == g[0]:
                comp[(g, f)] = (f[0], g[1], tuple(g[2][v] for v in f[2]))
    return FinCat(objects, arrows, src, tgt, ident, comp, name="FinSet")


def functor_to_sets(F: FinFunctor) -> SetFunctor:
    C = F.dom
    return SetFunctor(C, {o: tuple(range(F.omap[o])) for o in C.objects},
                      {a: dict(enumerate(F.amap[a][2])) for a in C.arrows})


def e_phi_restriction_check(E: EPhi, max_size=2, cap=None):
    """Restriction from the total category to the doubled part, on functors into small sets.

    Enumerates cartesian functors on both sides into the skeleton of sets
    of size at most ``max_size``.  Checks that every cartesian functor on
    the doubled part extends (its right Kan extension is cartesian and
    restricts back), and that every cartesian functor on the total
    category is the right Kan extension of its restriction up to the
    canonical comparison bijection.  Extensions too large for the chosen
    sets are left out of the total side, so the restriction classes are
    compared with the extensions that fit.  Returns a report dict.
    """
    S = finite_sets(max_size)
    B = E.B.cat
    gs = [functor_to_sets(G) for G in enumerate_functors(B, S, cap=cap)]
    gs = [G for G in gs if b_cartesian(E, G)]
    report = {"b_functors": len(gs), "extensions_ok": 0, "fitting": 0, "total_functors": 0,
              "comparisons_ok": 0, "restriction_classes": 0, "a_part_cartesian": 0}
    for G in gs:
        F = right_kan_extension(E, G)
        report["fitting"] += all(len(v) <= max_size for v in F.sets.values())
        if F.is_valid() and e_phi_cartesian(E, F) and _same(restrict_to_b(E, F), G):
            report["extensions_ok"] += 1
        if all(_square_ok(F, sq) for sq in E.a_squares):
            report["a_part_cartesian"] += 1
    fs = [functor_to_sets(F) for F in enumerate_functors(E.cat, S, cap=cap)]
    fs = [F for F in fs if e_phi_cartesian(E, F)]
    report["total_functors"] = len(fs)
    classes = set()
    for F in fs:
        G = restrict_to_b(E, F)
        classes.add(_key(G))
        R = right_kan_extension(E, G)
        ok = True
        for o, legs in E.products:
            comparison = {t: tuple(F.maps[a][t] for a in legs) for t in F.sets[o]}
            if len(set(comparison.values())) != len(comparison) or set(comparison.values()) != set(R.sets[o]):
                ok = False
        report["comparisons_ok"] += ok
    report["restriction_classes"] = len(classes)
    report["ok"] = (report["extensions_ok"] == report["b_functors"]
                    and report["comparisons_ok"] == report["total_functors"]
                    and report["restriction_classes"] == report["fitting"])
    return report


def _key(F: SetFunctor):
    C = F.dom
    return (tuple(F.sets[o] for o in C.objects),
            tuple(tuple(sorted(F.maps[a].items())) for a in C.arrows))


def _same(F, G):
    return _key(F) == _key(G)


# -- random instances --------------------------------------------------------------------------

def random_graph_kernel(rng, make_category, tries=50):
    """A random functor ``G: D -> C`` between random categories and its kernel."""
    for _ in range(tries):
        Cc, Dc = make_category(rng), make_category(rng)
        funcs = enumerate_functors(Dc, Cc, cap=5000)
        if funcs:
            G = rng.choice(funcs)
            return G, graph_correspondence(G)
    raise RuntimeError("no functor found")


def random_correspondence(rng, make_category):
    """Kernels of functors, identities and disjoint unions (empty kernels)."""
    kind = rng.choice(["graph", "identity", "empty"])
    if kind == "graph":
        return random_graph_kernel(rng, make_category)[1]
    C = category_precategory(make_category(rng))
    if kind == "identity":
        return identity_correspondence(C)
    D = category_precategory(make_category(rng))
    return Correspondence(C, D, {}, {}, {})
