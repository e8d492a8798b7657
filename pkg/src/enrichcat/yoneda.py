"""Modules and presheaves over precategories, the Yoneda lemma, fully
faithful functors, endomorphism precategories, completeness, completion
and folding of bimodules into left modules."""

from __future__ import annotations

import itertools

from .fincat import (CapExceeded, FinCat, MAX_FUNCTORS, SetFunctor, label, nat_transformations,
                     opposite)
from .quiv import (Precategory, Quiver, act, category_precategory, check_precategory,
                   index_cat, quiver_module)


# -- modules -------------------------------------------------------------------------------

class Module:
    """Left module over ``P``: a functor ``F`` on X with ``A(x, y) x F(x) -> F(y)``.

    ``action[(x, y, a, e)]`` is ``a`` applied to ``e``.
    """

    def __init__(self, P: Precategory, carrier: SetFunctor, action):
        self.P = P
        self.carrier = carrier
        self.action = dict(action)

    @property
    def X(self):
        return self.P.X

    def __call__(self, x):
        return self.carrier.sets[x]

    def apply(self, x, y, a, e):
        return self.action[(x, y, a, e)]

    def size(self):
        return sum(len(v) for v in self.carrier.sets.values())

    def __repr__(self):
        return f"{type(self).__name__}({ {label(x): len(v) for x, v in self.carrier.sets.items()} })"

    def problems(self):
        P, X, A = self.P, self.P.X, self.P.quiver
        out = [("carrier",) + (p,) for p in self.carrier.problems()]
        if out:
            return out
        for x in X.objects:
            for y in X.objects:
                for a in A(x, y):
                    for e in self(x):
                        r = self.action.get((x, y, a, e))
                        if r is None or r not in self(y):
                            out.append(("action missing", x, y, a, e))
        if out:
            return out
        for f in X.arrows:
            x, y = X.src[f], X.tgt[f]
            for e in self(x):
                if self.apply(x, y, P.eta(x, y, f), e) != self.carrier.maps[f][e]:
                    out.append(("unit", f, e))
        for x in X.objects:
            for e in self(x):
                for y in X.objects:
                    for b in A(x, y):
                        be = self.apply(x, y, b, e)
                        for z in X.objects:
                            for a in A(y, z):
                                if self.apply(y, z, a, be) != self.apply(x, z, P.mu(x, y, z, b, a), e):
                                    out.append(("associativity", x, y, z, b, a, e))
        return out

    def is_valid(self):
        return not self.problems()

    def to_json(self):
        return {"carrier": self.carrier.to_json(),
                "action": [[label(x), label(y), label(a), label(e), label(r)]
                           for (x, y, a, e), r in self.action.items()]}


class Presheaf(Module):
    """A left module over the opposite precategory; ``of`` is the original one."""

    def __init__(self, of: Precategory, carrier, action):
        super().__init__(opposite_precat(of), carrier, action)
        self.of = of


class ModuleMap:
    """Components ``comps[x]: F(x) -> G(x)``."""

    def __init__(self, source: Module, target: Module, comps):
        self.source = source
        self.target = target
        self.comps = {x: dict(m) for x, m in comps.items()}

    def key(self):
        F = self.source
        return tuple(tuple(self.comps[x][e] for e in F(x)) for x in F.X.objects)

    def __eq__(self, other):
        return isinstance(other, ModuleMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ModuleMap({self.key()!r})"

    def __call__(self, x, e):
        return self.comps[x][e]

    def then(self, other: "ModuleMap") -> "ModuleMap":
        """``other . self``."""
        return ModuleMap(self.source, other.target,
                         {x: {e: other.comps[x][v] for e, v in m.items()} for x, m in self.comps.items()})

    def problems(self):
        F, G = self.source, self.target
        X, A = F.X, F.P.quiver
        out = []
        for x in X.objects:
            m = self.comps.get(x, {})
            if set(m) != set(F(x)) or not set(m.values()) <= set(G(x)):
                out.append(("not a function", x))
        if out:
            return out
        for x in X.objects:
            for y in X.objects:
                for a in A(x, y):
                    for e in F(x):
                        if self.comps[y][F.apply(x, y, a, e)] != G.apply(x, y, a, self.comps[x][e]):
                            out.append(("not equivariant", x, y, a, e))
        return out

    def is_iso(self):
        return all(len(set(m.values())) == len(m) == len(self.target(x)) for x, m in self.comps.items())

    def inverse(self):
        return ModuleMap(self.target, self.source,
                         {x: {v: e for e, v in m.items()} for x, m in self.comps.items()})


def identity_module_map(F: Module) -> ModuleMap:
    return ModuleMap(F, F, {x: {e: e for e in F(x)} for x in F.X.objects})


def module_maps(F: Module, G: Module, cap=None):
    """All module maps ``F -> G``; each choice is propagated through the action."""
    if F.P is not G.P:
        raise ValueError("modules over different precategories")
    cap = MAX_FUNCTORS if cap is None else cap
    X, A = F.X, F.P.quiver
    slots = [(x, e) for x in X.objects for e in F(x)]
    arrows_from = {x: [(y, a) for y in X.objects for a in A(x, y)] for x in X.objects}
    results = []

    def propagate(assign, x, e, v):
        stack = [(x, e, v)]
        added = []
        while stack:
            x, e, v = stack.pop()
            cur = assign.get((x, e))
            if cur is not None:
                if cur != v:
                    for k in added:
                        del assign[k]
                    return None
                continue
            assign[(x, e)] = v
            added.append((x, e))
            for y, a in arrows_from[x]:
                stack.append((y, F.apply(x, y, a, e), G.apply(x, y, a, v)))
        return added

    def go(i, assign):
        while i < len(slots) and slots[i] in assign:
            i += 1
        if i == len(slots):
            results.append(ModuleMap(F, G, {x: {e: assign[(x, e)] for e in F(x)} for x in X.objects}))
            if len(results) > cap:
                raise CapExceeded("module map count exceeds cap")
            return
        x, e = slots[i]
        for v in G(x):
            added = propagate(assign, x, e, v)
            if added is None:
                continue
            go(i + 1, assign)
            for k in added:
                del assign[k]

    go(0, {})
    return results


def module_maps_brute(F: Module, G: Module):
    """Oracle: filter every family of component functions."""
    X = F.X
    slots = [(x, e) for x in X.objects for e in F(x)]
    found = []
    for values in itertools.product(*[G(x) for x, _ in slots]):
        comps = {x: {} for x in X.objects}
        for (x, e), v in zip(slots, values):
            comps[x][e] = v
        m = ModuleMap(F, G, comps)
        if not m.problems():
            found.append(m)
    return found


def find_module_iso(F: Module, G: Module):
    if any(len(F(x)) != len(G(x)) for x in F.X.objects):
        return None
    for m in module_maps(F, G):
        if m.is_iso():
            return m
    return None


# -- opposite and representables -----------------------------------------------------------

def opposite_precat(P: Precategory) -> Precategory:
    """Transpose onto ``X^op``; composition takes its arguments in the other order.

    Cached on ``P`` so that presheaves on ``P`` share one opposite.
    """
    cached = getattr(P, "_op", None)
    if cached is not None:
        return cached
    X, A = P.X, P.quiver
    Xop = opposite(X)
    I = index_cat(Xop, Xop)
    sets = {(y, x): A(x, y) for x, y in A.body.dom.objects}
    maps = {(q, p): A.body.maps[(p, q)] for p, q in A.body.dom.arrows}
    Q = Quiver(Xop, Xop, SetFunctor(I, sets, maps), A.base)
    unit = {(y, x, f): e for (x, y, f), e in P.unit.items()}
    comp = {(v, x, u, a, b): r for (u, x, v, b, a), r in P.comp.items()}
    Pop = Precategory(Q, unit, comp)
    Pop._op = P
    P._op = Pop
    return Pop


def yoneda_presheaf(P: Precategory, x) -> Presheaf:
    """``y -> A(y, x)``, acted on by precomposition."""
    X, A = P.X, P.quiver
    Pop = opposite_precat(P)
    Xop = Pop.X
    sets = {y: A(y, x) for y in X.objects}
    maps = {p: {a: A.act(p, X.ident[x], a) for a in A(X.tgt[p], x)} for p in X.arrows}
    carrier = SetFunctor(Xop, sets, maps)
    action = {}
    for y in X.objects:
        for z in X.objects:
            for c in A(z, y):
                for a in A(y, x):
                    action[(y, z, c, a)] = P.mu(z, y, x, c, a)
    return Presheaf(P, carrier, action)


def representable_point(P: Precategory, x) -> SetFunctor:
    """``Hom_X(-, x)`` as a functor on ``X^op``."""
    return SetFunctor.hom(opposite_precat(P).X, x)


def free_module(G: SetFunctor, P: Precategory) -> Presheaf:
    """Free presheaf ``A^op (x) G`` on a functor ``G`` on ``X^op``."""
    Pop = opposite_precat(P)
    T = act(Pop.quiver, G)
    carrier = quiver_module(T)
    Xop = Pop.X
    action = {}
    for z in Xop.objects:
        for w in Xop.objects:
            for c in Pop.quiver(z, w):
                for e in T("*", z):
                    a, phi, g = T.raw("*", z, e)
                    y = Xop.tgt[phi]
                    action[(z, w, c, e)] = T.cls("*", w, Pop.mu(y, z, w, a, c), phi, g)
    return Presheaf(P, carrier, action)


def free_adjunction_problems(G: SetFunctor, F: Presheaf, cap=None):
    """``|maps(free G, F)| == |Nat(G, F)|`` with the restriction map a bijection."""
    P = F.of
    Fr = free_module(G, P)
    maps = module_maps(Fr, F, cap)
    nats = nat_transformations(G, F.carrier, cap)
    if len(maps) != len(nats):
        return [("count", len(maps), len(nats))]
    Pop = F.P
    T = act(Pop.quiver, G)
    Xop = Pop.X
    restricted = set()
    for m in maps:
        key = []
        for z in Xop.objects:
            row = []
            for g in G.sets[z]:
                e = T.cls("*", z, Pop.eta(z, z, Xop.ident[z]), Xop.ident[z], g)
                row.append(m(z, e))
            key.append(tuple(row))
        restricted.add(tuple(key))
    nat_keys = {tuple(tuple(n[z][g] for g in G.sets[z]) for z in Xop.objects) for n in nats}
    if restricted != nat_keys:
        return [("restriction is not a bijection",)]
    return []


# -- Yoneda lemma --------------------------------------------------------------------------

def yoneda_map(P: Precategory, x, F: Presheaf):
    """``m -> m_x(id_x)`` on all module maps ``Y(x) -> F``."""
    if F.P is not opposite_precat(P):
        raise ValueError("F is not a presheaf on P")
    Y = yoneda_presheaf(P, x)
    ident = P.eta(x, x, P.X.ident[x])
    return Y, {m: m(x, ident) for m in module_maps(Y, F)}


def yoneda_inverse(P: Precategory, x, F: Presheaf, e, Y=None):
    """The module map ``Y(x) -> F`` sending ``a`` in ``A(y, x)`` to ``a . e``."""
    Y = Y or yoneda_presheaf(P, x)
    comps = {y: {a: F.apply(x, y, a, e) for a in Y(y)} for y in P.X.objects}
    return ModuleMap(Y, F, comps)


def yoneda_lemma_check(P: Precategory, x, F: Presheaf):
    """Evaluation at the identity is a bijection ``maps(Y(x), F) -> F(x)``.

    Returns ``(ok, bijection, problems)``; naturality in ``x`` is checked
    along every element of ``A(x2, x)``.
    """
    Y, ev = yoneda_map(P, x, F)
    problems = []
    if len(set(ev.values())) != len(ev) or set(ev.values()) != set(F(x)):
        problems.append(("evaluation not bijective", x))
    for e in F(x):
        m = yoneda_inverse(P, x, F, e, Y)
        if m.problems():
            problems.append(("inverse not a module map", x, e))
        elif ev.get(m) != e:
            problems.append(("not inverse", x, e))
    A = P.quiver
    for x2 in P.X.objects:
        Y2 = yoneda_presheaf(P, x2)
        for a in A(x2, x):
            post = postcompose(P, a, x2, x, Y2, Y)
            for m, e in ev.items():
                if post.then(m)(x2, P.eta(x2, x2, P.X.ident[x2])) != F.apply(x, x2, a, e):
                    problems.append(("not natural in x", x2, x, a))
                    break
    return not problems, ev, problems


def yoneda_naturality_in_F(P: Precategory, x, g: ModuleMap):
    """``ev(g . m) == g_x(ev(m))`` for all ``m: Y(x) -> F``."""
    F = g.source
    Y, ev = yoneda_map(P, x, F)
    return [m for m, e in ev.items() if m.then(g)(x, P.eta(x, x, P.X.ident[x])) != g(x, e)]


def postcompose(P: Precategory, a, x, y, Yx=None, Yy=None) -> ModuleMap:
    """``Y(a): Y(x) -> Y(y)`` for ``a`` in ``A(x, y)``."""
    Yx = Yx or yoneda_presheaf(P, x)
    Yy = Yy or yoneda_presheaf(P, y)
    comps = {z: {b: P.mu(z, x, y, b, a) for b in Yx(z)} for z in P.X.objects}
    return ModuleMap(Yx, Yy, comps)


def fully_faithful_check(P: Precategory, objects, arrows) -> bool:
    """``a -> arrows(x, y, a)`` is a bijection ``A(x, y) -> maps(objects[x], objects[y])``."""
    return not fully_faithful_failures(P, objects, arrows)


def fully_faithful_failures(P: Precategory, objects, arrows):
    out = []
    A = P.quiver
    for x in P.X.objects:
        for y in P.X.objects:
            targets = set(module_maps(objects[x], objects[y]))
            image = [arrows(x, y, a) for a in A(x, y)]
            if len(set(image)) != len(image) or set(image) != targets:
                out.append((x, y))
    return out


def yoneda_embedding(P: Precategory):
    """Object and arrow maps of the Yoneda embedding."""
    Y = {x: yoneda_presheaf(P, x) for x in P.X.objects}
    return Y, lambda x, y, a: postcompose(P, a, x, y, Y[x], Y[y])


# -- endomorphism precategories ----------------------------------------------------------

def endomorphism_precat(objects) -> Precategory:
    """Precategory on the keys of ``objects`` with homs the module maps."""
    names = list(objects)
    X = FinCat.discrete(names)
    homs = {(x, y): module_maps(objects[x], objects[y]) for x in names for y in names}
    Q = Quiver.over(X, {k: v for k, v in homs.items()})
    unit = {(x, x, X.ident[x]): identity_module_map(objects[x]) for x in names}
    comp = {}
    for u in names:
        for x in names:
            for v in names:
                for b in homs[(u, x)]:
                    for a in homs[(x, v)]:
                        comp[(u, x, v, b, a)] = b.then(a)
    return Precategory(Q, unit, comp)


def tautological_check(objects, E: Precategory = None) -> bool:
    """The identity on homs makes ``objects`` a fully faithful functor from its endomorphism precategory."""
    E = E or endomorphism_precat(objects)
    return fully_faithful_check(E, objects, lambda x, y, a: a)


# -- completeness and completion ---------------------------------------------------------------

def _require_discrete(X: FinCat):
    if any(not X.is_identity(a) for a in X.arrows):
        raise ValueError("completeness is defined here for discrete object sets")


def invertible_pairs(P: Precategory):
    """Pairs ``(x, y, u, v)`` with ``u: x -> y`` and ``v: y -> x`` mutually inverse."""
    X, A = P.X, P.quiver
    out = []
    for x in X.objects:
        ix = P.eta(x, x, X.ident[x])
        for y in X.objects:
            iy = P.eta(y, y, X.ident[y])
            for u in A(x, y):
                for v in A(y, x):
                    if P.mu(x, y, x, u, v) == ix and P.mu(y, x, y, v, u) == iy:
                        out.append((x, y, u, v))
    return out


def completeness_check(P: Precategory, strict=False) -> bool:
    """No invertible element connects two distinct objects.

    With ``strict`` the set of invertible pairs must also be exactly the
    identities, which rules out nontrivial automorphisms as well.
    """
    _require_discrete(P.X)
    pairs = invertible_pairs(P)
    if strict:
        return len(pairs) == len(P.X.objects)
    return all(x == y for x, y, _, _ in pairs)


def contractible_groupoid(n=2) -> Precategory:
    """One element in every hom set between ``n`` objects."""
    objects = list(range(n))
    arrows = [(x, y) for x in objects for y in objects]
    src = {a: a[0] for a in arrows}
    tgt = {a: a[1] for a in arrows}
    comp = {((y, z), (x, y)): (x, z) for x in objects for y in objects for z in objects}
    C = FinCat(objects, arrows, src, tgt, {x: (x, x) for x in objects}, comp, name=f"J{n}")
    return category_precategory(C)


def plant_isomorphic_copy(C: FinCat, x, tag="copy"):
    """``C`` with an extra object isomorphic to ``x``.

    Arrows become triples ``(a, b, f)`` with ``f`` an arrow of ``C``
    between the underlying objects.
    """
    new = (tag, x)
    under = {o: o for o in C.objects}
    under[new] = x
    objects = list(C.objects) + [new]
    arrows, src, tgt = [], {}, {}
    for a in objects:
        for b in objects:
            for f in C.hom(under[a], under[b]):
                t = (a, b, f)
                arrows.append(t)
                src[t], tgt[t] = a, b
    ident = {o: (o, o, C.ident[under[o]]) for o in objects}
    comp = {}
    for (a, b, f) in arrows:
        for c in objects:
            for g in C.hom(under[b], under[c]):
                comp[((b, c, g), (a, b, f))] = (a, c, C.comp[(g, f)])
    return FinCat(objects, arrows, src, tgt, ident, comp)


class Completion:
    """Result of ``completion``: the precategory, the object map and the hom map of the unit."""

    def __init__(self, precat, omap, hmap, classes):
        self.precat = precat
        self.omap = omap
        self.hmap = hmap
        self.classes = classes

    def __iter__(self):
        return iter((self.precat, self.omap, self.hmap))


def completion(P: Precategory) -> Completion:
    """Objects become isomorphism classes of representables.

    Each class is represented by its earliest object; the unit sends ``a``
    in ``A(x, y)`` to ``i_y . Y(a) . i_x^-1`` where ``i_x`` is the chosen iso
    from ``Y(x)`` to the representative.
    """
    _require_discrete(P.X)
    X = P.X
    Y = {x: yoneda_presheaf(P, x) for x in X.objects}
    reps, iso = [], {}
    for x in X.objects:
        for r in reps:
            m = find_module_iso(Y[x], Y[r])
            if m is not None:
                iso[x] = (r, m)
                break
        else:
            reps.append(x)
            iso[x] = (x, identity_module_map(Y[x]))
    E = endomorphism_precat({r: Y[r] for r in reps})
    omap = {x: iso[x][0] for x in X.objects}

    def hmap(x, y, a):
        (rx, ix), (ry, iy) = iso[x], iso[y]
        return ix.inverse().then(postcompose(P, a, x, y, Y[x], Y[y])).then(iy)

    classes = {r: [x for x in X.objects if omap[x] == r] for r in reps}
    return Completion(E, omap, hmap, classes)


def functor_problems(P: Precategory, Q: Precategory, omap, hmap):
    """``(omap, hmap)`` respects units and composition."""
    out = []
    X = P.X
    for x in X.objects:
        if hmap(x, x, P.eta(x, x, X.ident[x])) != Q.eta(omap[x], omap[x], Q.X.ident[omap[x]]):
            out.append(("unit", x))
    for (u, x, v, b, a), r in P.comp.items():
        if hmap(u, v, r) != Q.mu(omap[u], omap[x], omap[v], hmap(u, x, b), hmap(x, v, a)):
            out.append(("composition", u, x, v))
    return out


def is_equivalence(P: Precategory, Q: Precategory, omap, hmap):
    """Functor, bijective on every hom, and every object of ``Q`` isomorphic to an image."""
    out = functor_problems(P, Q, omap, hmap)
    for x in P.X.objects:
        for y in P.X.objects:
            image = [hmap(x, y, a) for a in P.quiver(x, y)]
            target = Q.quiver(omap[x], omap[y])
            if len(set(image)) != len(image) or set(image) != set(target):
                out.append(("not fully faithful", x, y))
    hit = set(omap.values())
    linked = {y for x, y, _, _ in invertible_pairs(Q) if x in hit}
    for z in Q.X.objects:
        if z not in hit and z not in linked:
            out.append(("object not reached", z))
    return out


def precategory_iso(P: Precategory, Q: Precategory):
    """An isomorphism of precategories over discrete object sets, or ``None``."""
    if len(P.X.objects) != len(Q.X.objects):
        return None
    xs, ys = list(P.X.objects), list(Q.X.objects)
    for perm in itertools.permutations(ys):
        omap = dict(zip(xs, perm))
        if any(len(P.quiver(x, y)) != len(Q.quiver(omap[x], omap[y])) for x in xs for y in xs):
            continue
        found = _hom_bijection(P, Q, omap)
        if found is not None:
            return omap, found
    return None


def _hom_bijection(P, Q, omap):
    xs = list(P.X.objects)
    cells = [(x, y) for x in xs for y in xs]
    choice = {}

    def ok():
        for (u, x, v, b, a), r in P.comp.items():
            if (u, x) in choice and (x, v) in choice and (u, v) in choice:
                if choice[(u, v)][r] != Q.mu(omap[u], omap[x], omap[v], choice[(u, x)][b], choice[(x, v)][a]):
                    return False
        for x in xs:
            if (x, x) in choice:
                if choice[(x, x)][P.eta(x, x, P.X.ident[x])] != Q.eta(omap[x], omap[x], Q.X.ident[omap[x]]):
                    return False
        return True

    def go(i):
        if i == len(cells):
            return True
        x, y = cells[i]
        src = list(P.quiver(x, y))
        for perm in itertools.permutations(Q.quiver(omap[x], omap[y])):
            choice[(x, y)] = dict(zip(src, perm))
            if ok() and go(i + 1):
                return True
        choice.pop((x, y), None)
        return False

    if go(0):
        return {k: dict(v) for k, v in choice.items()}
    return None


# -- folding of algebras ---------------------------------------------------------------------------

def monoid_table(M):
    """``(elements, mult, unit)`` from a one-object FinCat or precategory.

    ``mult[(a, b)]`` is ``a`` after ``b``.
    """
    if isinstance(M, Precategory):
        (x,) = M.X.objects
        els = list(M.quiver(x, x))
        mult = {(a, b): M.mu(x, x, x, b, a) for a in els for b in els}
        return els, mult, M.eta(x, x, M.X.ident[x])
    (x,) = M.objects
    els = list(M.arrows)
    return els, {(a, b): M.comp[(a, b)] for a in els for b in els}, M.ident[x]


def _actions(els, mult, one, carrier, side):
    """All unital associative actions of a monoid on ``carrier``.

    ``side`` is "left" (``a.(b.m) = (ab).m``) or "right" (``(m.a).b = m.(ab)``).
    """
    cells = [(a, m) for a in els for m in carrier]
    found = []
    for values in itertools.product(carrier, repeat=len(cells)):
        t = dict(zip(cells, values))
        if any(t[(one, m)] != m for m in carrier):
            continue
        if side == "left":
            good = all(t[(a, t[(b, m)])] == t[(mult[(a, b)], m)]
                       for a in els for b in els for m in carrier)
        else:
            good = all(t[(b, t[(a, m)])] == t[(mult[(a, b)], m)]
                       for a in els for b in els for m in carrier)
        if good:
            found.append(t)
    return found


def bimodules(A, B, carrier):
    """``(left, right)`` action pairs that commute: ``a.(m.b) == (a.m).b``."""
    ea, ma, ua = monoid_table(A)
    eb, mb, ub = monoid_table(B)
    lefts = _actions(ea, ma, ua, carrier, "left")
    rights = _actions(eb, mb, ub, carrier, "right")
    out = []
    for l in lefts:
        for r in rights:
            if all(l[(a, r[(b, m)])] == r[(b, l[(a, m)])] for a in ea for b in eb for m in carrier):
                out.append((l, r))
    return out


def product_with_opposite(A, B):
    """``A x B^op`` as ``(elements, mult, unit)``."""
    ea, ma, ua = monoid_table(A)
    eb, mb, ub = monoid_table(B)
    els = [(a, b) for a in ea for b in eb]
    mult = {((a, b), (a2, b2)): (ma[(a, a2)], mb[(b2, b)]) for a, b in els for a2, b2 in els}
    return els, mult, (ua, ub)


def fold(l, r, A, B, carrier):
    """The left ``A x B^op`` action ``(a, b).m = a.(m.b)``."""
    ea, _, _ = monoid_table(A)
    eb, _, _ = monoid_table(B)
    return {((a, b), m): l[(a, r[(b, m)])] for a in ea for b in eb for m in carrier}


def unfold(k, A, B, carrier):
    ea, _, ua = monoid_table(A)
    eb, _, ub = monoid_table(B)
    l = {(a, m): k[((a, ub), m)] for a in ea for m in carrier}
    r = {(b, m): k[((ua, b), m)] for b in eb for m in carrier}
    return l, r


def _freeze(t):
    return tuple(sorted(t.items(), key=repr))


def fold_algebra_check(A, B, carrier):
    """Folding is a bijection from bimodule structures to left module structures.

    Returns ``(ok, report)``; the report holds both counts.
    """
    carrier = tuple(carrier)
    bims = bimodules(A, B, carrier)
    els, mult, one = product_with_opposite(A, B)
    lefts = _actions(els, mult, one, carrier, "left")
    folded = [_freeze(fold(l, r, A, B, carrier)) for l, r in bims]
    targets = {_freeze(k) for k in lefts}
    ok = len(set(folded)) == len(folded) and set(folded) == targets
    for k in lefts:
        l, r = unfold(k, A, B, carrier)
        if _freeze(fold(l, r, A, B, carrier)) != _freeze(k):
            ok = False
    return ok, {"bimodules": len(bims), "left_modules": len(lefts), "carrier": len(carrier)}


def fold_naturality_check(A, B, carrier, perm):
    """Relabelling the carrier by ``perm`` commutes with folding."""
    carrier = tuple(carrier)
    ok = True
    for l, r in bimodules(A, B, carrier):
        l2 = {(a, perm[m]): perm[v] for (a, m), v in l.items()}
        r2 = {(b, perm[m]): perm[v] for (b, m), v in r.items()}
        k = fold(l, r, A, B, carrier)
        k2 = fold(l2, r2, A, B, tuple(perm[m] for m in carrier))
        if {(ab, perm[m]): perm[v] for (ab, m), v in k.items()} != k2:
            ok = False
    return ok


def small_monoid_cats(max_size=2):
    """Monoids of size up to ``max_size`` as one-object categories."""
    from .quiv import small_monoids
    out = []
    for k, t in small_monoids(max_size):
        out.append(FinCat.monoid(range(k), lambda a, b, t=t: t[(a, b)], 0))
    return out


# -- random instances ------------------------------------------------------------------------

def random_presheaf(P: Precategory, rng, max_free=2):
    """A random presheaf: the free presheaf on random points, then a random quotient attempt.

    Free presheaves on sums of representable points cover every shape of
    carrier the checks need; quotients are kept only when they remain modules.
    """
    Xop = opposite_precat(P).X
    sets = {z: tuple(f"g{i}" for i in range(rng.randint(0, max_free))) for z in Xop.objects}
    if any(not Xop.is_identity(a) for a in Xop.arrows):
        sets = {z: () for z in Xop.objects}
        x = rng.choice(Xop.objects)
        G = representable_point(P, x)
    else:
        G = SetFunctor(Xop, sets, {a: {e: e for e in sets[Xop.src[a]]} for a in Xop.arrows})
    F = free_module(G, P)
    return _random_quotient(F, rng)


def _random_quotient(F: Presheaf, rng):
    """Identify two random elements of one component, closing under the action."""
    X = F.X
    candidates = [x for x in X.objects if len(F(x)) >= 2]
    if not candidates or rng.random() < 0.5:
        return F
    x = rng.choice(candidates)
    e1, e2 = rng.sample(list(F(x)), 2)
    from .fincat import _quotient
    elements = [(y, e) for y in X.objects for e in F(y)]
    relations = [((x, e1), (x, e2))]
    A = F.P.quiver
    for _ in range(len(elements)):
        reps, rep_of = _quotient(elements, relations)
        extra = []
        for (y, a), (z, b) in relations:
            for w in X.objects:
                for c in A(y, w):
                    extra.append(((w, F.apply(y, w, c, a)), (w, F.apply(z, w, c, b))))
        new = set(relations) | set(extra)
        if len(new) == len(relations):
            break
        relations = list(new)
    reps, rep_of = _quotient(elements, relations)
    sets = {y: tuple(e for e in F(y) if rep_of[(y, e)] == (y, e)) for y in X.objects}
    maps = {f: {e: rep_of[(X.tgt[f], F.carrier.maps[f][e])][1] for e in sets[X.src[f]]} for f in X.arrows}
    action = {(y, w, c, e): rep_of[(w, F.apply(y, w, c, e))][1]
              for y in X.objects for w in X.objects for c in A(y, w) for e in sets[y]}
    Q = Presheaf(F.of, SetFunctor(X, sets, maps), action)
    return Q if Q.is_valid() else F
