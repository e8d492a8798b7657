"""Quivers over a finite cartesian base, their tensor product by coends,
precategories, Segal objects, the slice (convolution) model and the
segment categories used to build the monoidal structure."""

from __future__ import annotations

import itertools

from .fincat import (Cocone, FinCat, FinFunctor, SetFunctor, _generators, _quotient, colim_set, coproduct,
                     label, left_kan, opposite, product, twisted_arrows)
from .shapes import BmArrow, BmWord


# -- base ------------------------------------------------------------------------------------

class FiniteSets:
    """Finite sets as a cartesian base.  Objects are tuples of hashable elements."""

    name = "FinSet"

    def terminal(self):
        return ((),)

    def initial(self):
        return ()

    def product(self, A, B):
        """``(A x B, pr1, pr2)``."""
        pairs = tuple((a, b) for a in A for b in B)
        return pairs, {p: p[0] for p in pairs}, {p: p[1] for p in pairs}

    def colimit(self, F: SetFunctor) -> Cocone:
        return colim_set(F)


FINSET = FiniteSets()
CartBase = FiniteSets

_index_cache = {}


def index_cat(U: FinCat, V: FinCat) -> FinCat:
    """``U^op x V``, cached per pair of category objects."""
    key = (id(U), id(V))
    hit = _index_cache.get(key)
    if hit is None or hit[0] is not U or hit[1] is not V:
        hit = _index_cache[key] = (U, V, product(opposite(U), V))
    return hit[2]


_tw_cache = {}


def _twisted(X: FinCat):
    hit = _tw_cache.get(id(X))
    if hit is None or hit[0] is not X:
        hit = _tw_cache[id(X)] = (X, twisted_arrows(X)[0])
    return hit[1]


# -- quivers ---------------------------------------------------------------------------------

class Quiver:
    """A functor ``U^op x V -> base``; ``Q(x, y)`` is the set of arrows from x to y.

    For an ordinary quiver ``U`` and ``V`` are the same category ``X``.
    ``Q.act(p, q, a)`` transports ``a`` in ``Q(x, y)`` along ``p: x' -> x``
    and ``q: y -> y'``.
    """

    def __init__(self, U: FinCat, V: FinCat, body: SetFunctor, base=FINSET):
        self.U = U
        self.V = V
        self.body = body
        self.base = base

    @classmethod
    def over(cls, X: FinCat, sets, maps=None, base=FINSET):
        """Quiver on ``X`` from its component sets.

        ``maps`` may be omitted when ``X`` is discrete.
        """
        return cls.between(X, X, sets, maps, base)

    @classmethod
    def between(cls, U, V, sets, maps=None, base=FINSET):
        P = index_cat(U, V)
        sets = {o: tuple(sets.get(o, ())) for o in P.objects}
        if maps is None:
            if any(not P.is_identity(a) for a in P.arrows):
                raise ValueError("maps are required unless both categories are discrete")
            maps = {}
        maps = dict(maps)
        for a in P.arrows:
            if P.is_identity(a) and a not in maps:
                maps[a] = {e: e for e in sets[P.src[a]]}
        return cls(U, V, SetFunctor(P, sets, maps), base)

    @property
    def X(self):
        if self.U is not self.V and self.U != self.V:
            raise ValueError("quiver has different source and target categories")
        return self.U

    def __call__(self, x, y):
        return self.body.sets[(x, y)]

    def act(self, p, q, a):
        return self.body.maps[(p, q)][a]

    def size(self):
        return sum(len(v) for v in self.body.sets.values())

    def sizes(self):
        return {o: len(v) for o, v in self.body.sets.items()}

    def problems(self):
        return self.body.problems()

    def __repr__(self):
        return f"Quiver({self.size()} elements over {len(self.U.objects)}x{len(self.V.objects)})"

    def to_json(self):
        P = self.body.dom
        return {
            "source": self.U.to_json(),
            "target": self.V.to_json(),
            "components": [{"src": label(x), "tgt": label(y),
                            "elements": [label(e) for e in self.body.sets[(x, y)]]}
                           for x, y in P.objects],
            "action": [{"pre": label(p), "post": label(q),
                        "map": [[label(a), label(b)] for a, b in self.body.maps[(p, q)].items()]}
                       for p, q in P.arrows if not P.is_identity((p, q))],
        }

    @classmethod
    def from_json(cls, data):
        U = FinCat.from_json(data["source"])
        V = U if data["target"] == data["source"] else FinCat.from_json(data["target"])
        sets = {(c["src"], c["tgt"]): c["elements"] for c in data["components"]}
        maps = {(m["pre"], m["post"]): dict(map(tuple, m["map"])) for m in data["action"]}
        P = index_cat(U, V)
        for a in P.arrows:
            if P.is_identity(a):
                maps[a] = {e: e for e in sets.get(P.src[a], ())}
        return cls(U, V, SetFunctor(P, {o: sets.get(o, ()) for o in P.objects}, maps))


def unit_quiver(X: FinCat, base=FINSET) -> Quiver:
    """``(x, y) -> Hom(x, y)`` with the action by composition."""
    P = index_cat(X, X)
    sets = {(x, y): tuple(X.hom(x, y)) for x, y in P.objects}
    maps = {(p, q): {f: X.comp[(q, X.comp[(f, p)])] for f in sets[(X.tgt[p], X.src[q])]}
            for p, q in P.arrows}
    return Quiver(X, X, SetFunctor(P, sets, maps), base)


def module_quiver(F: SetFunctor) -> Quiver:
    """A left module ``F`` on ``X`` viewed as a quiver from the point to ``X``."""
    X = F.dom
    pt = _POINT
    P = index_cat(pt, X)
    sets = {("*", z): F.sets[z] for z in X.objects}
    maps = {(p, f): F.maps[f] for p, f in P.arrows}
    return Quiver(pt, X, SetFunctor(P, sets, maps))


def quiver_module(Q: Quiver) -> SetFunctor:
    """Inverse of ``module_quiver``."""
    X = Q.V
    pt_id = Q.U.ident["*"]
    return SetFunctor(X, {z: Q.body.sets[("*", z)] for z in X.objects},
                      {f: Q.body.maps[(pt_id, f)] for f in X.arrows})


_POINT = FinCat.point()


# -- tensor product ----------------------------------------------------------------------------

class Tensor(Quiver):
    """``A (x) B``: composable pairs "first ``b``, then ``a``" glued along the middle.

    ``(A (x) B)(u, v)`` is the colimit over twisted arrows ``phi: x -> y``
    of ``A(y, v) x B(u, x)``, computed as a pointwise left Kan extension.
    ``raw`` returns a representative triple ``(a, phi, b)`` of an element
    and ``cls`` the class of any triple.
    """

    def __init__(self, left: Quiver, right: Quiver, body, unit):
        super().__init__(right.U, left.V, body, left.base)
        self.left = left
        self.right = right
        self.mid = left.U
        self.legs = unit

    def raw(self, u, v, e):
        ((c, g), (a, b)) = e
        (_, phi), _ = c
        p, q = g
        X = self.mid
        a2 = self.left.act(X.ident[X.tgt[phi]], q, a)
        b2 = self.right.act(p, X.ident[X.src[phi]], b)
        return a2, phi, b2

    def cls(self, u, v, a, phi, b):
        return self.legs[((u, phi), v)][(a, b)]


def tensor(A: Quiver, B: Quiver) -> Tensor:
    """``A (x) B``; ``B`` supplies the first leg of each composable pair."""
    if A.base is not B.base:
        raise ValueError("quivers live over different bases")
    X = A.U
    if not (X is B.V or X == B.V):
        raise ValueError("middle categories differ")
    U, V = B.U, A.V
    tw = _twisted(X)
    C = product(product(opposite(U), opposite(tw)), V)
    sets = {}
    for c in C.objects:
        (u, phi), v = c
        sets[c] = tuple((a, b) for a in A(X.tgt[phi], v) for b in B(u, X.src[phi]))
    maps = {}
    for arrow in C.arrows:
        (p, t), q = arrow
        (u2, g), v2 = C.src[arrow]
        _, pp, qq = t
        amaps, bmaps = A.body.maps[(qq, q)], B.body.maps[(p, pp)]
        maps[arrow] = {(a, b): (amaps[a], bmaps[b]) for a, b in sets[C.src[arrow]]}
    F = SetFunctor(C, sets, maps)
    P = index_cat(U, V)
    proj = FinFunctor(C, P, {c: (c[0][0], c[1]) for c in C.objects},
                      {a: (a[0][0], a[1]) for a in C.arrows})
    lan, unit = left_kan(F, proj)
    lan = SetFunctor(P, lan.sets, lan.maps)
    return Tensor(A, B, lan, unit)


def coend_classes(A: Quiver, B: Quiver, u, v):
    """Independent oracle: the coend at ``(u, v)`` from raw triples and Tw relations.

    Returns ``(triples, rep_of)``.
    """
    X = A.U
    tw = _twisted(X)
    triples = [(a, phi, b) for phi in X.arrows
               for a in A(X.tgt[phi], v) for b in B(u, X.src[phi])]
    Vid, Uid = A.V.ident[v], B.U.ident[u]
    relations = []
    for t in tw.arrows:
        f, pp, qq = t
        g = tw.tgt[t]
        for a in A(X.tgt[g], v):
            for b in B(u, X.src[g]):
                relations.append(((a, g, b), (A.act(qq, Vid, a), f, B.act(Uid, pp, b))))
    reps, rep_of = _quotient(triples, relations)
    return triples, rep_of


def tensor_oracle_problems(T: Tensor):
    """Compare ``T`` with the direct coend at every component."""
    out = []
    A, B = T.left, T.right
    for u, v in T.body.dom.objects:
        triples, rep_of = coend_classes(A, B, u, v)
        image = {}
        for tr in triples:
            e = T.cls(u, v, *tr)
            r = rep_of[tr]
            if image.setdefault(r, e) != e:
                out.append(("not well defined", u, v, tr))
        if len(set(image.values())) != len(image):
            out.append(("not injective", u, v))
        if set(image.values()) != set(T(u, v)):
            out.append(("not surjective", u, v))
    return out


# -- maps of quivers -----------------------------------------------------------------------------

def identity_map(A: Quiver):
    return {o: {e: e for e in A.body.sets[o]} for o in A.body.dom.objects}


def compose_maps(f, g):
    """``g . f`` componentwise."""
    return {o: {e: g[o][f[o][e]] for e in m} for o, m in f.items()}


def map_problems(f, S: Quiver, T: Quiver, iso=True):
    """Naturality (and bijectivity when ``iso``) of a componentwise map ``S -> T``."""
    out = []
    P = S.body.dom
    for o in P.objects:
        m = f.get(o, {})
        if set(m) != set(S.body.sets[o]) or not set(m.values()) <= set(T.body.sets[o]):
            out.append(("not a function", o))
        elif iso and (len(set(m.values())) != len(m) or len(m) != len(T.body.sets[o])):
            out.append(("not bijective", o))
    if out:
        return out
    for arrow in P.arrows:
        s, t = P.src[arrow], P.tgt[arrow]
        for e in S.body.sets[s]:
            if f[t][S.body.maps[arrow][e]] != T.body.maps[arrow][f[s][e]]:
                out.append(("not natural", arrow, e))
                break
    return out


def tensor_map(src: Tensor, tgt: Tensor, f, g):
    """``f (x) g: src -> tgt`` for ``f: src.left -> tgt.left`` and ``g: src.right -> tgt.right``."""
    X = src.mid
    out = {}
    for u, v in src.body.dom.objects:
        m = {}
        for e in src(u, v):
            a, phi, b = src.raw(u, v, e)
            m[e] = tgt.cls(u, v, f[(X.tgt[phi], v)][a], phi, g[(u, X.src[phi])][b])
        out[(u, v)] = m
    return out


def associator(L: Tensor, R: Tensor):
    """``(A (x) B) (x) C -> A (x) (B (x) C)`` through representatives.

    ``L = tensor(tensor(A, B), C)`` and ``R = tensor(A, tensor(B, C))``.
    """
    AB, BC = L.left, R.right
    out = {}
    for u, v in L.body.dom.objects:
        m = {}
        for e in L(u, v):
            e1, psi, c = L.raw(u, v, e)
            y = AB.mid.tgt[psi]
            a, phi, b = AB.raw(y, v, e1)
            x2 = AB.mid.src[phi]
            bc = BC.cls(u, x2, b, psi, c)
            m[e] = R.cls(u, v, a, phi, bc)
        out[(u, v)] = m
    return out


def left_unitor(T: Tensor):
    """``unit (x) A -> A``."""
    X, A = T.mid, T.right
    out = {}
    for u, v in T.body.dom.objects:
        out[(u, v)] = {}
        for e in T(u, v):
            f, phi, a = T.raw(u, v, e)
            out[(u, v)][e] = A.act(A.U.ident[u], X.comp[(f, phi)], a)
    return out


def right_unitor(T: Tensor):
    """``A (x) unit -> A``."""
    X, A = T.mid, T.left
    out = {}
    for u, v in T.body.dom.objects:
        out[(u, v)] = {}
        for e in T(u, v):
            a, phi, g = T.raw(u, v, e)
            out[(u, v)][e] = A.act(X.comp[(phi, g)], A.V.ident[v], a)
    return out


def monoid_law_problems(A: Quiver, B: Quiver, C: Quiver):
    """Associator and unitors are natural bijections, and the oracle agrees."""
    out = []
    AB, BC = tensor(A, B), tensor(B, C)
    L, R = tensor(AB, C), tensor(A, BC)
    out += [("associator",) + p for p in map_problems(associator(L, R), L, R)]
    out += [("oracle",) + p for p in tensor_oracle_problems(AB)]
    one = unit_quiver(A.U)
    B1 = tensor(one, B)
    out += [("left unitor",) + p for p in map_problems(left_unitor(B1), B1, B)]
    A1 = tensor(A, unit_quiver(A.U))
    out += [("right unitor",) + p for p in map_problems(right_unitor(A1), A1, A)]
    return out


def pentagon_problems(A, B, C, D):
    """Both associator composites ``((AB)C)D -> A(B(CD))`` agree."""
    AB, BC, CD = tensor(A, B), tensor(B, C), tensor(C, D)
    AB_C, A_BC = tensor(AB, C), tensor(A, BC)
    BC_D, B_CD = tensor(BC, D), tensor(B, CD)
    ABC_D, AB_CD = tensor(AB_C, D), tensor(AB, CD)
    A_B_CD, A_BC_D, A_BCD = tensor(A, B_CD), tensor(A_BC, D), tensor(A, BC_D)
    top = compose_maps(associator(ABC_D, AB_CD), associator(AB_CD, A_B_CD))
    bottom = compose_maps(
        compose_maps(tensor_map(ABC_D, A_BC_D, associator(AB_C, A_BC), identity_map(D)),
                     associator(A_BC_D, A_BCD)),
        tensor_map(A_BCD, A_B_CD, identity_map(A), associator(BC_D, B_CD)))
    return [o for o in top if top[o] != bottom[o]]


def triangle_problems(A, B):
    """``(A 1) B -> A (1 B) -> A B`` equals ``rho (x) id``."""
    one = unit_quiver(A.U)
    A1, _1B, AB = tensor(A, one), tensor(one, B), tensor(A, B)
    A1_B, A_1B = tensor(A1, B), tensor(A, _1B)
    via = compose_maps(associator(A1_B, A_1B),
                       tensor_map(A_1B, AB, identity_map(A), left_unitor(_1B)))
    direct = tensor_map(A1_B, AB, right_unitor(A1), identity_map(B))
    return [o for o in via if via[o] != direct[o]]


# -- action on modules -------------------------------------------------------------------------

def act(A: Quiver, F) -> Tensor:
    """``A (x) F`` for a left module ``F`` (a SetFunctor on X or a point-sourced quiver).

    The result is a Tensor; ``quiver_module`` turns it back into a functor on X.
    """
    M = module_quiver(F) if isinstance(F, SetFunctor) else F
    return tensor(A, M)


def module_law_problems(A: Quiver, B: Quiver, F: SetFunctor):
    """``act(A (x) B, F) ~ act(A, act(B, F))`` and ``act(unit, F) ~ F``."""
    M = module_quiver(F)
    AB, BF = tensor(A, B), act(B, M)
    L, R = act(AB, M), act(A, BF)
    out = [("associativity",) + p for p in map_problems(associator(L, R), L, R)]
    U1 = act(unit_quiver(B.V), M)
    out += [("unit",) + p for p in map_problems(left_unitor(U1), U1, M)]
    return out


# -- precategories --------------------------------------------------------------------------

class Precategory:
    """An associative algebra in quivers over ``X``.

    ``unit[(x, y, f)]`` is the element of ``A(x, y)`` attached to an arrow
    ``f: x -> y`` of X.  ``comp[(u, x, v, b, a)]`` composes ``b`` in
    ``A(u, x)`` with ``a`` in ``A(x, v)`` (first ``b``, then ``a``).
    """

    def __init__(self, quiver: Quiver, unit, comp):
        self.quiver = quiver
        self.unit = dict(unit)
        self.comp = dict(comp)

    @property
    def X(self):
        return self.quiver.X

    def mu(self, u, x, v, b, a):
        return self.comp[(u, x, v, b, a)]

    def eta(self, x, y, f):
        return self.unit[(x, y, f)]

    def __repr__(self):
        return f"Precategory({self.quiver!r})"

    def to_json(self):
        return {"quiver": self.quiver.to_json(),
                "unit": [[label(x), label(y), label(f), label(e)] for (x, y, f), e in self.unit.items()],
                "comp": [[label(k) for k in key] + [label(e)] for key, e in self.comp.items()]}

    @classmethod
    def from_json(cls, data):
        Q = Quiver.from_json(data["quiver"])
        unit = {(x, y, f): e for x, y, f, e in data["unit"]}
        comp = {tuple(row[:5]): row[5] for row in data["comp"]}
        return cls(Q, unit, comp)


def unit_precategory(X: FinCat) -> Precategory:
    Q = unit_quiver(X)
    unit = {(X.src[f], X.tgt[f], f): f for f in X.arrows}
    comp = {(X.src[b], X.tgt[b], X.tgt[a], b, a): X.comp[(a, b)]
            for b in X.arrows for a in X.out_arrows(X.tgt[b])}
    return Precategory(Q, unit, comp)


def category_precategory(C: FinCat) -> Precategory:
    """A category as a precategory over its discrete object set."""
    X = FinCat.discrete(C.objects)
    Q = Quiver.over(X, {(x, y): C.hom(x, y) for x in C.objects for y in C.objects})
    unit = {(x, x, X.ident[x]): C.ident[x] for x in C.objects}
    comp = {(C.src[b], C.tgt[b], C.tgt[a], b, a): C.comp[(a, b)]
            for b in C.arrows for a in C.out_arrows(C.tgt[b])}
    return Precategory(Q, unit, comp)


def monoid_precategory(elements, mult, one) -> Precategory:
    """One object; ``mult(a, b)`` is ``a`` after ``b``."""
    return category_precategory(FinCat.monoid(elements, mult, one))


def check_precategory(P: Precategory):
    """Failing cells of the naturality, dinaturality, unit and associativity laws."""
    A, X = P.quiver, P.X
    out = []
    keys = {(x, y) for x, y in A.body.dom.objects}
    for f in X.arrows:
        x, y = X.src[f], X.tgt[f]
        e = P.unit.get((x, y, f))
        if e is None or e not in A(x, y):
            out.append(("unit missing", x, y, f))
    for (u, x) in keys:
        for v in X.objects:
            for b in A(u, x):
                for a in A(x, v):
                    r = P.comp.get((u, x, v, b, a))
                    if r is None or r not in A(u, v):
                        out.append(("composition missing", u, x, v, b, a))
    if out:
        return out
    for f in X.arrows:
        x, y = X.src[f], X.tgt[f]
        for p in X.in_arrows(x):
            for q in X.out_arrows(y):
                if P.eta(X.src[p], X.tgt[q], X.comp[(q, X.comp[(f, p)])]) != A.act(p, q, P.eta(x, y, f)):
                    out.append(("unit naturality", f, p, q))
    for (u, x, v, b, a), r in P.comp.items():
        for p in X.in_arrows(u):
            for q in X.out_arrows(v):
                b2 = A.act(p, X.ident[x], b)
                a2 = A.act(X.ident[x], q, a)
                if P.mu(X.src[p], x, X.tgt[q], b2, a2) != A.act(p, q, r):
                    out.append(("composition naturality", (u, x, v, b, a), p, q))
    for phi in X.arrows:
        x, y = X.src[phi], X.tgt[phi]
        for u in X.objects:
            for v in X.objects:
                for b in A(u, x):
                    for a in A(y, v):
                        left = P.mu(u, x, v, b, A.act(phi, X.ident[v], a))
                        right = P.mu(u, y, v, A.act(X.ident[u], phi, b), a)
                        if left != right:
                            out.append(("dinaturality", phi, u, v, b, a))
    for (u, x) in keys:
        for b in A(u, x):
            if P.mu(u, x, x, b, P.eta(x, x, X.ident[x])) != b:
                out.append(("right unit", u, x, b))
            if P.mu(u, u, x, P.eta(u, u, X.ident[u]), b) != b:
                out.append(("left unit", u, x, b))
    for u in X.objects:
        for x in X.objects:
            for c in A(u, x):
                for y in X.objects:
                    for b in A(x, y):
                        cb = P.mu(u, x, y, c, b)
                        for v in X.objects:
                            for a in A(y, v):
                                if P.mu(u, y, v, cb, a) != P.mu(u, x, v, c, P.mu(x, y, v, b, a)):
                                    out.append(("associativity", u, x, y, v, c, b, a))
    return out


def multiplication_map(P: Precategory, T: Tensor = None):
    """The map ``A (x) A -> A`` induced by ``comp`` on canonical representatives."""
    A, X = P.quiver, P.X
    T = T or tensor(A, A)
    out = {}
    for u, v in T.body.dom.objects:
        out[(u, v)] = {}
        for e in T(u, v):
            a, phi, b = T.raw(u, v, e)
            x = X.src[phi]
            out[(u, v)][e] = P.mu(u, x, v, b, A.act(phi, X.ident[v], a))
    return T, out


# -- Segal objects -----------------------------------------------------------------------------

class SegalObject:
    """A simplicial set truncated at level ``N``.

    ``levels[n]`` lists the n-simplices; ``faces[(n, i)]`` maps level n to
    level n-1 and ``degens[(n, i)]`` maps level n to level n+1.
    """

    def __init__(self, N, levels, faces, degens):
        self.N = N
        self.levels = [tuple(l) for l in levels]
        self.faces = {k: dict(v) for k, v in faces.items()}
        self.degens = {k: dict(v) for k, v in degens.items()}

    def __repr__(self):
        return f"SegalObject(N={self.N}, sizes={[len(l) for l in self.levels]})"

    def d(self, n, i, e):
        return self.faces[(n, i)][e]

    def s(self, n, i, e):
        return self.degens[(n, i)][e]

    def vertex(self, n, e, j):
        """The j-th vertex of an n-simplex."""
        for m in range(n, 0, -1):
            if j < m:
                e = self.d(m, m, e)
            else:
                e = self.d(m, 0, e)
                j -= 1
        return e

    def edge(self, n, e, j):
        """The spine edge from vertex j-1 to vertex j."""
        keep = (j - 1, j)
        verts = list(range(n + 1))
        m = n
        for idx in range(n, -1, -1):
            if verts[idx] in keep:
                continue
            e = self.d(m, idx, e)
            del verts[idx]
            m -= 1
        return e

    def spine(self, n, e):
        return tuple(self.edge(n, e, j) for j in range(1, n + 1))

    def identity_problems(self):
        out = []
        N = self.N
        for n in range(2, N + 1):
            for j in range(n + 1):
                for i in range(j):
                    for e in self.levels[n]:
                        if self.d(n - 1, i, self.d(n, j, e)) != self.d(n - 1, j - 1, self.d(n, i, e)):
                            out.append(("d d", n, i, j, e))
        for n in range(0, N):
            for j in range(n + 1):
                for e in self.levels[n]:
                    se = self.s(n, j, e)
                    if self.d(n + 1, j, se) != e or self.d(n + 1, j + 1, se) != e:
                        out.append(("d s", n, j, e))
                    for i in range(n + 2):
                        if i < j:
                            if self.d(n + 1, i, se) != self.s(n - 1, j - 1, self.d(n, i, e)):
                                out.append(("d s", n, i, j, e))
                        elif i > j + 1:
                            if self.d(n + 1, i, se) != self.s(n - 1, j, self.d(n, i - 1, e)):
                                out.append(("d s", n, i, j, e))
        for n in range(0, N - 1):
            for j in range(n + 1):
                for i in range(j + 1):
                    for e in self.levels[n]:
                        if self.s(n + 1, i, self.s(n, j, e)) != self.s(n + 1, j + 1, self.s(n, i, e)):
                            out.append(("s s", n, i, j, e))
        return out

    def segal_problems(self):
        """Levels whose Segal map is not a bijection onto the fiber product."""
        out = []
        ends = {e: (self.d(1, 1, e), self.d(1, 0, e)) for e in self.levels[1]} if self.N >= 1 else {}
        by_start = {}
        for e, (x, y) in ends.items():
            by_start.setdefault(x, []).append(e)
        counts = {x: 1 for x in self.levels[0]}
        for n in range(1, self.N + 1):
            new = {}
            for x, c in counts.items():
                for e in by_start.get(x, ()):
                    y = ends[e][1]
                    new[y] = new.get(y, 0) + c
            counts = new
            spines = set()
            for e in self.levels[n]:
                sp = self.spine(n, e)
                if any(ends[sp[i]][1] != ends[sp[i + 1]][0] for i in range(n - 1)):
                    out.append(("spine not composable", n, e))
                spines.add(sp)
            if len(spines) != len(self.levels[n]):
                out.append(("not injective", n))
            if len(spines) != sum(counts.values()):
                out.append(("not surjective", n))
        return out

    def problems(self):
        return self.identity_problems() + self.segal_problems()

    def to_json(self):
        return {"N": self.N,
                "levels": [[label(e) for e in l] for l in self.levels],
                "faces": [[n, i, [[label(a), label(b)] for a, b in m.items()]]
                          for (n, i), m in sorted(self.faces.items())],
                "degeneracies": [[n, i, [[label(a), label(b)] for a, b in m.items()]]
                                 for (n, i), m in sorted(self.degens.items())]}

    @classmethod
    def from_json(cls, data):
        faces = {(n, i): dict(map(tuple, m)) for n, i, m in data["faces"]}
        degens = {(n, i): dict(map(tuple, m)) for n, i, m in data["degeneracies"]}
        return cls(data["N"], data["levels"], faces, degens)


def _require_discrete(X: FinCat):
    if any(not X.is_identity(a) for a in X.arrows):
        raise ValueError("Segal conversion needs a discrete object set")


def to_segal(P: Precategory, N: int) -> SegalObject:
    """Chains ``x0 -> ... -> xn`` of composable elements; inner faces compose."""
    X, A = P.X, P.quiver
    _require_discrete(X)
    levels = [[((x,), ()) for x in X.objects]]
    for n in range(1, N + 1):
        nxt = []
        for xs, es in levels[-1]:
            for y in X.objects:
                for a in A(xs[-1], y):
                    nxt.append((xs + (y,), es + (a,)))
        levels.append(nxt)
    faces, degens = {}, {}
    for n in range(1, N + 1):
        for i in range(n + 1):
            m = {}
            for xs, es in levels[n]:
                if i == 0:
                    m[(xs, es)] = (xs[1:], es[1:])
                elif i == n:
                    m[(xs, es)] = (xs[:-1], es[:-1])
                else:
                    c = P.mu(xs[i - 1], xs[i], xs[i + 1], es[i - 1], es[i])
                    m[(xs, es)] = (xs[:i] + xs[i + 1:], es[:i - 1] + (c,) + es[i + 1:])
            faces[(n, i)] = m
    for n in range(0, N):
        for i in range(n + 1):
            m = {}
            for xs, es in levels[n]:
                x = xs[i]
                m[(xs, es)] = (xs[:i + 1] + xs[i:], es[:i] + (P.eta(x, x, X.ident[x]),) + es[i:])
            degens[(n, i)] = m
    return SegalObject(N, levels, faces, degens)


def nerve(C: FinCat, N: int) -> SegalObject:
    """Nerve of a finite category truncated at level ``N``."""
    levels = [[((x,), ()) for x in C.objects]]
    for n in range(1, N + 1):
        levels.append([(xs + (C.tgt[a],), es + (a,)) for xs, es in levels[-1]
                       for a in C.out_arrows(xs[-1])])
    faces, degens = {}, {}
    for n in range(1, N + 1):
        for i in range(n + 1):
            m = {}
            for xs, es in levels[n]:
                if i == 0:
                    m[(xs, es)] = (xs[1:], es[1:])
                elif i == n:
                    m[(xs, es)] = (xs[:-1], es[:-1])
                else:
                    c = C.comp[(es[i], es[i - 1])]
                    m[(xs, es)] = (xs[:i] + xs[i + 1:], es[:i - 1] + (c,) + es[i + 1:])
            faces[(n, i)] = m
    for n in range(0, N):
        for i in range(n + 1):
            degens[(n, i)] = {(xs, es): (xs[:i + 1] + xs[i:], es[:i] + (C.ident[xs[i]],) + es[i:])
                              for xs, es in levels[n]}
    return SegalObject(N, levels, faces, degens)


def from_segal(S: SegalObject) -> Precategory:
    """Precategory over the discrete set of 0-simplices.

    ``A(x, y)`` is the fiber of (source, target) over ``(x, y)``;
    composition goes through the inverse of the level-2 Segal map.
    """
    if S.N < 3:
        raise ValueError("need simplices up to level 3 to recover associativity")
    bad = S.segal_problems()
    if bad:
        raise ValueError(f"Segal maps are not bijective: {bad[0]}")
    X = FinCat.discrete(S.levels[0])
    sets = {(x, y): [] for x in X.objects for y in X.objects}
    for e in S.levels[1]:
        sets[(S.d(1, 1, e), S.d(1, 0, e))].append(e)
    Q = Quiver.over(X, sets)
    unit = {(x, x, X.ident[x]): S.s(0, 0, x) for x in X.objects}
    comp = {}
    for sigma in S.levels[2]:
        b, a = S.spine(2, sigma)
        comp[(S.d(1, 1, b), S.d(1, 0, b), S.d(1, 0, a), b, a)] = S.d(2, 1, sigma)
    P = Precategory(Q, unit, comp)
    bad = check_precategory(P)
    if bad:
        raise ValueError(f"recovered structure is not a precategory: {bad[0]}")
    return P


def precategory_roundtrip_problems(P: Precategory, N: int):
    """``from_segal(to_segal(P))`` against ``P`` through ``x -> ((x,), ())``."""
    Q = from_segal(to_segal(P, N))
    X, A = P.X, P.quiver
    ob = {x: ((x,), ()) for x in X.objects}
    el = {(x, y): {a: ((x, y), (a,)) for a in A(x, y)} for x in X.objects for y in X.objects}
    out = []
    if sorted(map(repr, Q.X.objects)) != sorted(repr(ob[x]) for x in X.objects):
        out.append(("objects",))
        return out
    for (x, y), m in el.items():
        if sorted(map(repr, m.values())) != sorted(map(repr, Q.quiver(ob[x], ob[y]))):
            out.append(("component", x, y))
    for x in X.objects:
        if Q.eta(ob[x], ob[x], Q.X.ident[ob[x]]) != el[(x, x)][P.eta(x, x, X.ident[x])]:
            out.append(("unit", x))
    for (u, x, v, b, a), r in P.comp.items():
        if Q.mu(ob[u], ob[x], ob[v], el[(u, x)][b], el[(x, v)][a]) != el[(u, v)][r]:
            out.append(("composition", u, x, v, b, a))
    return out


def segal_roundtrip_problems(S: SegalObject):
    """``to_segal(from_segal(S))`` against ``S`` through the spine bijection."""
    P = from_segal(S)
    T = to_segal(P, S.N)
    out = []
    iso = []
    for n in range(S.N + 1):
        m = {}
        for e in S.levels[n]:
            if n == 0:
                m[e] = ((e,), ())
            else:
                sp = S.spine(n, e)
                verts = (S.d(1, 1, sp[0]),) + tuple(S.d(1, 0, t) for t in sp)
                m[e] = (verts, sp)
        if len(set(m.values())) != len(m) or set(m.values()) != set(T.levels[n]):
            out.append(("level", n))
        iso.append(m)
    if out:
        return out
    for (n, i), f in S.faces.items():
        for e, r in f.items():
            if T.d(n, i, iso[n][e]) != iso[n - 1][r]:
                out.append(("face", n, i, e))
    for (n, i), f in S.degens.items():
        for e, r in f.items():
            if T.s(n, i, iso[n][e]) != iso[n + 1][r]:
                out.append(("degeneracy", n, i, e))
    return out


# -- slice model ---------------------------------------------------------------------------------

def total_space(A: Quiver):
    """``sum_{x,y} A(x, y) -> X x X`` as a dict element -> (x, y)."""
    return {(x, y, a): (x, y) for x, y in A.body.dom.objects for a in A(x, y)}


def convolution(T1, T2):
    """Pairs ``(t1, t2)`` whose middle coordinates match, over the outer ones."""
    by_mid = {}
    for t2, (m, z) in T2.items():
        by_mid.setdefault(m, []).append((t2, z))
    out = {}
    for t1, (x, m) in T1.items():
        for t2, z in by_mid.get(m, ()):
            out[(t1, t2)] = (x, z)
    return out


def diagonal(X: FinCat):
    return {x: (x, x) for x in X.objects}


def compare_slice_model(A: Quiver, B: Quiver, T: Tensor = None):
    """Bijection ``(A (x) B) -> convolution(total(B), total(A))`` over ``X x X``.

    Returns ``(witness, problems)``; the witness maps ``(u, v, e)`` to a pair
    of total-space elements.
    """
    X = A.U
    _require_discrete(X)
    T = T or tensor(A, B)
    conv = convolution(total_space(B), total_space(A))
    witness = {}
    for u, v in T.body.dom.objects:
        for e in T(u, v):
            a, phi, b = T.raw(u, v, e)
            x = X.src[phi]
            witness[(u, v, e)] = ((u, x, b), (x, v, a))
    problems = []
    if len(set(witness.values())) != len(witness) or set(witness.values()) != set(conv):
        problems.append(("not bijective",))
    for (u, v, e), pair in witness.items():
        if conv.get(pair) != (u, v):
            problems.append(("wrong fiber", u, v, e))
    return witness, problems


def slice_naturality_problems(A, B, A2, B2, f, g):
    """The slice bijection commutes with ``f (x) g`` and with ``total(f) * total(g)``."""
    T, T2 = tensor(A, B), tensor(A2, B2)
    w, p1 = compare_slice_model(A, B, T)
    w2, p2 = compare_slice_model(A2, B2, T2)
    fg = tensor_map(T, T2, f, g)
    out = p1 + p2
    for (u, v, e), ((_, x, b), (_, _, a)) in w.items():
        lhs = w2[(u, v, fg[(u, v)][e])]
        rhs = ((u, x, g[(u, x)][b]), (x, v, f[(x, v)][a]))
        if lhs != rhs:
            out.append(("not natural", u, v, e))
    return out


def unit_slice_problems(X: FinCat):
    """``total(unit_quiver(X))`` is the diagonal."""
    _require_discrete(X)
    tot = total_space(unit_quiver(X))
    diag = diagonal(X)
    image = {(x, y, f): x for (x, y, f) in tot}
    if set(image.values()) != set(diag) or len(image) != len(diag):
        return [("unit is not the diagonal",)]
    return [("wrong fiber", k) for k, x in image.items() if tot[k] != diag[x]]


# -- segment categories ---------------------------------------------------------------------

class SegmentCat:
    """The category of intervals ``(i, j)`` of a word, glued to the two ends ``L``, ``R``.

    Intervals are ordered by nesting, ``(i, j) -> (i2, j2)`` when
    ``i <= i2 <= j2 <= j``.  Each point ``(i, i)`` is identified with ``L`` or
    ``R`` according to the letter ``s(i)``.  Arrows are ``(src, via, tgt)``:
    ``via`` is the point through which an interval reaches a point-class
    object, or ``None``.
    """

    def __init__(self, word: BmWord):
        self.word = word
        s = word.bits
        n = word.n
        intervals = [(i, j) for i in range(n + 1) for j in range(i, n + 1)]
        ends = ["L", "R"]
        objects = intervals + ends
        cls_of = {(i, i): ends[s[i]] for i in range(n + 1)}
        cls_of.update({"L": "L", "R": "R"})
        self.cls_of = cls_of
        arrows, src, tgt = [], {}, {}

        def add(a):
            arrows.append(a)
            src[a], tgt[a] = a[0], a[2]

        for (i, j) in intervals:
            for (i2, j2) in intervals:
                if i <= i2 <= j2 <= j and i2 < j2:
                    add(((i, j), None, (i2, j2)))
            for k in range(i, j + 1):
                for t in objects:
                    if t in cls_of and cls_of[t] == ends[s[k]]:
                        add(((i, j), k, t))
        for e in ends:
            for t in objects:
                if cls_of.get(t) == e:
                    add((e, None, t))
        ident = {}
        for o in objects:
            if o in ("L", "R"):
                ident[o] = (o, None, o)
            elif o[0] == o[1]:
                ident[o] = (o, o[0], o)
            else:
                ident[o] = (o, None, o)
        comp = {}
        out_of = {}
        for a in arrows:
            out_of.setdefault(src[a], []).append(a)
        for f in arrows:
            for g in out_of.get(tgt[f], ()):
                if g[1] is None and g[2] not in cls_of:
                    h = (f[0], None, g[2])
                elif f[0] in ("L", "R"):
                    h = (f[0], None, g[2])
                elif f[1] is None:
                    h = (f[0], g[1], g[2]) if g[1] is not None else (f[0], None, g[2])
                else:
                    h = (f[0], f[1], g[2])
                comp[(g, f)] = h
        self.cat = FinCat(objects, arrows, src, tgt, ident, comp, name=f"E({word})")
        self.squares = [((i, k), (i, j), (j, k), (j, j))
                        for i in range(n + 1) for j in range(i, n + 1) for k in range(j, n + 1)]

    def square_arrows(self, sq):
        top, left, right, bottom = sq
        j = bottom[0]
        return (self.arrow(top, left), self.arrow(top, right),
                (left, j, bottom), (right, j, bottom))

    def arrow(self, a, b):
        """The nesting arrow between intervals (identity when equal)."""
        if a == b:
            return self.cat.ident[a]
        if b[0] == b[1]:
            return (a, b[0], b)
        return (a, None, b)

    def __repr__(self):
        return f"SegmentCat({self.word}: {len(self.cat.objects)} objects, {len(self.squares)} squares)"


def segment_cat(s) -> SegmentCat:
    return SegmentCat(s if isinstance(s, BmWord) else BmWord.parse(s))


def segment_functor(f: BmArrow):
    """``E(f.tgt) -> E(f.src)`` sending ``(i, j)`` to ``(phi i, phi j)``."""
    E, E2 = segment_cat(f.tgt), segment_cat(f.src)
    phi = f.phi

    def ob(o):
        return o if o in ("L", "R") else (phi[o[0]], phi[o[1]])

    amap = {}
    for a in E.cat.arrows:
        s2, t2 = ob(a[0]), ob(a[2])
        if a[1] is None:
            if s2 == t2:
                amap[a] = E2.cat.ident[s2]
            elif t2 in E2.cls_of and s2 not in ("L", "R"):
                amap[a] = (s2, t2[0], t2)
            else:
                amap[a] = (s2, None, t2)
        else:
            amap[a] = (s2, phi[a[1]], t2)
    return FinFunctor(E.cat, E2.cat, {o: ob(o) for o in E.cat.objects}, amap)


def preserves_squares(f: BmArrow):
    F = segment_functor(f)
    E, E2 = segment_cat(f.tgt), segment_cat(f.src)
    targets = {E2.square_arrows(sq) for sq in E2.squares}
    return all(tuple(F.amap[a] for a in E.square_arrows(sq)) in targets for sq in E.squares)


def modot_check(phi: SetFunctor, X, Y, E: SegmentCat = None) -> bool:
    """``phi`` has ends ``X``, ``Y`` and sends distinguished squares to pullbacks."""
    return not modot_failures(phi, X, Y, E)


def modot_failures(phi: SetFunctor, X, Y, E: SegmentCat = None):
    E = E or _segment_of(phi.dom)
    out = []
    if set(phi.sets["L"]) != set(X) or set(phi.sets["R"]) != set(Y):
        out.append(("ends",))
    for sq in E.squares:
        top, left, right, bottom = sq
        to_left, to_right, lb, rb = E.square_arrows(sq)
        pb = {(l, r) for l in phi.sets[left] for r in phi.sets[right]
              if phi.maps[lb][l] == phi.maps[rb][r]}
        image = [(phi.maps[to_left][t], phi.maps[to_right][t]) for t in phi.sets[top]]
        if len(set(image)) != len(image) or set(image) != pb:
            out.append(("not cartesian", sq))
    return out


def _segment_of(C: FinCat) -> SegmentCat:
    word = BmWord.parse(C.name[2:-1])
    return segment_cat(word)


def segment_functor_from_spans(word, spans, X, Y):
    """Extend spans ``T_i -> ends(i-1) x ends(i)`` to a functor on the segment category.

    ``spans[i-1]`` maps elements of ``T_i`` to pairs.  Intervals receive
    iterated pullbacks (tuples of composable span elements); points
    receive ``X`` or ``Y`` by their letter.
    """
    E = segment_cat(word)
    s = E.word.bits
    n = E.word.n
    ends = {"L": tuple(X), "R": tuple(Y)}
    sets = {"L": ends["L"], "R": ends["R"]}
    for i in range(n + 1):
        sets[(i, i)] = ends[E.cls_of[(i, i)]]
    for i in range(n + 1):
        chains = [()]
        for j in range(i + 1, n + 1):
            T = spans[j - 1]
            chains = [c + (t,) for c in chains for t in T
                      if not c or spans[j - 2][c[-1]][1] == T[t][0]]
            sets[(i, j)] = chains

    def point(i, j, el, k):
        """Coordinate of interval element ``el`` at point ``k``."""
        if i == j:
            return el
        if k == i:
            return spans[i][el[0]][0]
        return spans[k - 1][el[k - i - 1]][1]

    maps = {}
    for a in E.cat.arrows:
        s0, via, t = a
        if s0 in ("L", "R"):
            maps[a] = {e: e for e in sets[s0]}
        elif via is None:
            (i, j), (i2, j2) = s0, t
            maps[a] = {el: el[i2 - i:j2 - i] if i < j else el for el in sets[s0]}
        else:
            i, j = s0
            maps[a] = {el: point(i, j, el, via) for el in sets[s0]}
    return SetFunctor(E.cat, sets, maps)


# -- random instances --------------------------------------------------------------------------

def random_quiver(X: FinCat, rng, max_fiber=3, tries=200) -> Quiver:
    """A random valid quiver with fibers of size at most ``max_fiber``.

    Discrete X: random sets.  Otherwise random maps along generating
    arrows, rejected until the functor laws hold; falls back to a sum of
    hom-shaped pieces.
    """
    P = index_cat(X, X)
    if all(P.is_identity(a) for a in P.arrows):
        sets = {o: [f"e{i}" for i in range(rng.randint(0, max_fiber))] for o in P.objects}
        return Quiver.over(X, sets)
    for _ in range(tries):
        sets = {o: tuple(f"e{i}" for i in range(rng.randint(0, max_fiber))) for o in P.objects}
        maps = {}
        for a in P.arrows:
            s, t = P.src[a], P.tgt[a]
            if P.is_identity(a):
                maps[a] = {e: e for e in sets[s]}
        ok = True
        for a in _generators(P)[0]:
            s, t = P.src[a], P.tgt[a]
            if sets[s] and not sets[t]:
                ok = False
                break
            maps[a] = {e: rng.choice(sets[t]) for e in sets[s]}
        if not ok:
            continue
        if not _complete_maps(P, maps):
            continue
        F = SetFunctor(P, sets, maps)
        if F.is_valid():
            return Quiver(X, X, F)
    return unit_quiver(X)


def _complete_maps(P: FinCat, maps):
    """Fill composite arrows from generators; False on conflict."""
    changed = True
    while changed:
        changed = False
        for g, f in P.composable_pairs():
            if g in maps and f in maps:
                h = P.comp[(g, f)]
                m = {e: maps[g][maps[f][e]] for e in maps[f]}
                if h in maps:
                    if maps[h] != m:
                        return False
                else:
                    maps[h] = m
                    changed = True
    return all(a in maps for a in P.arrows)


def quiver_map(A: Quiver, B: Quiver, rng, tries=200):
    """A random natural map ``A -> B`` (identity-free fibers only for discrete X)."""
    P = A.body.dom
    for _ in range(tries):
        f = {}
        ok = True
        for o in P.objects:
            if A.body.sets[o] and not B.body.sets[o]:
                ok = False
                break
            f[o] = {e: rng.choice(B.body.sets[o]) for e in A.body.sets[o]}
        if ok and not map_problems(f, A, B, iso=False):
            return f
    return None


_monoid_cache = {}


def small_monoids(max_size=3):
    """Multiplication tables of monoids on ``0..k-1`` with unit 0, ``k <= max_size``.

    Brute force; isomorphic copies are kept.
    """
    if max_size in _monoid_cache:
        return _monoid_cache[max_size]
    out = []
    for k in range(1, max_size + 1):
        cells = [(a, b) for a in range(1, k) for b in range(1, k)]
        for values in itertools.product(range(k), repeat=len(cells)):
            t = {(0, b): b for b in range(k)}
            t.update({(a, 0): a for a in range(k)})
            t.update(dict(zip(cells, values)))
            if all(t[(t[(a, b)], c)] == t[(a, t[(b, c)])]
                   for a in range(k) for b in range(k) for c in range(k)):
                out.append((k, t))
    _monoid_cache[max_size] = out
    return out


def random_category(rng, max_objects=3) -> FinCat:
    """A small random category: poset, free acyclic, monoid, sum or product of these."""
    kind = rng.choice(["poset", "free", "monoid", "sum", "product"])
    if kind == "poset":
        n = rng.randint(1, max_objects)
        rel = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
        return FinCat.poset(range(n), rel)
    if kind == "free":
        n = rng.randint(1, max_objects)
        edges = [(f"g{i}{j}{c}", i, j) for i in range(n) for j in range(i + 1, n)
                 for c in range(rng.randint(0, 2 if n < 3 else 1))]
        return FinCat.free(range(n), edges)
    if kind == "monoid":
        k, t = rng.choice(small_monoids(3))
        return FinCat.monoid(range(k), lambda a, b: t[(a, b)], 0)
    if kind == "sum":
        parts = []
        for _ in range(rng.randint(2, max(2, max_objects))):
            k, t = rng.choice(small_monoids(2))
            parts.append(FinCat.monoid(range(k), lambda a, b, t=t: t[(a, b)], 0))
        return coproduct(*parts)
    k, t = rng.choice(small_monoids(2))
    M = FinCat.monoid(range(k), lambda a, b: t[(a, b)], 0)
    return product(M, FinCat.chain(1))


def random_precategory(rng, max_objects=3) -> Precategory:
    return category_precategory(random_category(rng, max_objects))
