"""Bimodule shape calculus.

Words are monotone 0/1 sequences ``s: [n] -> [1]``; consecutive pairs read
as letters ``00 -> a``, ``01 -> m``, ``11 -> b``.  An arrow ``w -> w'`` is a
monotone map ``phi: [n'] -> [n]`` with ``w' = w . phi``.  A simplex is a
chain of such arrows, and its shape is the planar poset generated by the
story graphs of the arrows, floor 0 on top.

Vertices are ``(floor, kind, pos)`` with ``kind`` one of ``"x"``, ``"y"``
or ``"m"`` (the vertex of the letter ``m``, a y-type point stored at
position ``k + 1``).  Positions are counted right to left, so ``x_1, y_1``
are the rightmost pair.
"""

from __future__ import annotations

import itertools
import json
import operator
import re
from functools import cached_property, lru_cache

from .fincat import (CapExceeded, FinCat, FinFunctor, MAX_FUNCTORS, enumerate_functors,
                     find_isomorphism, flat_over_2_failures, opposite)


class BmWord:
    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = tuple(int(b) for b in bits)
        if not bits:
            raise ValueError("a word needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        if any(bits[i] > bits[i + 1] for i in range(len(bits) - 1)):
            raise ValueError(f"bits {bits} are not monotone")
        self.bits = bits

    @classmethod
    def parse(cls, text):
        return cls(int(c) for c in text.strip())

    @classmethod
    def from_letters(cls, letters, empty="0"):
        """Word from a letter string like ``"aamb"``; ``empty`` picks 0 or 1 for ``""``."""
        k, alpha, l = letters.count("a"), letters.count("m"), letters.count("b")
        if letters != "a" * k + "m" * alpha + "b" * l or alpha > 1 or (alpha == 0 and k and l):
            raise ValueError(f"{letters!r} is not a word")
        if alpha:
            return cls((0,) * (k + 1) + (1,) * (l + 1))
        if k:
            return cls((0,) * (k + 1))
        if l:
            return cls((1,) * (l + 1))
        return cls(empty)

    def __eq__(self, other):
        return isinstance(other, BmWord) and self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    def __repr__(self):
        return f"BmWord({self})"

    @property
    def n(self):
        return len(self.bits) - 1

    @property
    def k(self):
        return sum(1 for i in range(self.n) if self.bits[i] == 0 and self.bits[i + 1] == 0)

    @property
    def alpha(self):
        return 1 if 0 in self.bits and 1 in self.bits else 0

    @property
    def l(self):
        return self.n - self.k - self.alpha

    @property
    def letters(self):
        return "a" * self.k + "m" * self.alpha + "b" * self.l

    def in_ass(self):
        return 1 not in self.bits

    def in_lm(self):
        return self.bits[0] == 0 and sum(self.bits) <= 1

    def in_lm_minus(self):
        return self.in_lm() and self.alpha == 1

    def op(self):
        return BmWord(1 - b for b in reversed(self.bits))

    def star(self):
        """``a^k m -> a^k m b^k``."""
        if not self.in_lm_minus():
            raise ValueError("star is defined on words a^k m")
        return BmWord((0,) * (self.k + 1) + (1,) * (self.k + 1))

    def vertex_count(self):
        return 2 * self.k + self.alpha


class BmArrow:
    """Arrow ``src -> src . phi``."""

    __slots__ = ("src", "phi")

    def __init__(self, src: BmWord, phi):
        phi = tuple(int(p) for p in phi)
        if not phi:
            raise ValueError("phi needs at least one value")
        if any(p < 0 or p > src.n for p in phi):
            raise ValueError(f"phi {phi} leaves [0, {src.n}]")
        if any(phi[i] > phi[i + 1] for i in range(len(phi) - 1)):
            raise ValueError(f"phi {phi} is not monotone")
        self.src = src
        self.phi = phi

    def __eq__(self, other):
        return isinstance(other, BmArrow) and self.src == other.src and self.phi == other.phi

    def __hash__(self):
        return hash((self.src, self.phi))

    def __repr__(self):
        return f"BmArrow({self.src} -> {self.tgt}, phi={list(self.phi)})"

    @property
    def tgt(self):
        return BmWord(self.src.bits[j] for j in self.phi)

    def is_inert(self):
        return all(self.phi[i] == self.phi[0] + i for i in range(len(self.phi)))

    def is_active(self):
        return self.phi[0] == 0 and self.phi[-1] == self.src.n

    def then(self, other: "BmArrow") -> "BmArrow":
        if other.src != self.tgt:
            raise ValueError("arrows are not composable")
        return BmArrow(self.src, tuple(self.phi[j] for j in other.phi))

    def op(self):
        n, n2 = self.src.n, len(self.phi) - 1
        return BmArrow(self.src.op(), tuple(n - self.phi[n2 - j] for j in range(n2 + 1)))

    def star(self):
        """The arrow ``v* -> v'*`` between doubled words."""
        v, v2 = self.src, self.tgt
        if not (v.in_lm_minus() and v2.in_lm_minus()):
            raise ValueError("star is defined on arrows between words a^k m")
        k, k2 = v.k, v2.k
        phi = [0] * (2 * k2 + 2)
        for j in range(k2 + 1):
            phi[j] = self.phi[j]
            phi[2 * k2 + 1 - j] = 2 * k + 1 - self.phi[j]
        return BmArrow(v.star(), phi)

    @classmethod
    def identity(cls, w):
        return cls(w, range(w.n + 1))


class BmSimplex:
    __slots__ = ("w0", "phis", "words")

    def __init__(self, w0: BmWord, phis=()):
        self.w0 = w0
        self.phis = tuple(tuple(p) for p in phis)
        words = [w0]
        for p in self.phis:
            words.append(BmArrow(words[-1], p).tgt)
        self.words = tuple(words)

    @classmethod
    def from_arrows(cls, arrows):
        arrows = list(arrows)
        for a, b in zip(arrows, arrows[1:]):
            if a.tgt != b.src:
                raise ValueError("arrows are not composable")
        return cls(arrows[0].src, [a.phi for a in arrows])

    def __eq__(self, other):
        return isinstance(other, BmSimplex) and self.w0 == other.w0 and self.phis == other.phis

    def __hash__(self):
        return hash((self.w0, self.phis))

    def __repr__(self):
        return f"BmSimplex({format_simplex(self)})"

    @property
    def dim(self):
        return len(self.phis)

    @property
    def arrows(self):
        return tuple(BmArrow(w, p) for w, p in zip(self.words, self.phis))

    def face(self, i):
        """Simplicial face ``d_i``."""
        n = self.dim
        if not 0 <= i <= n or n == 0:
            raise ValueError("face index out of range")
        if i == 0:
            return BmSimplex(self.words[1], self.phis[1:])
        if i == n:
            return BmSimplex(self.w0, self.phis[:-1])
        merged = tuple(self.phis[i - 1][j] for j in self.phis[i])
        return BmSimplex(self.w0, self.phis[:i - 1] + (merged,) + self.phis[i + 1:])

    def restrict(self, a, b):
        """Sub-chain on floors ``a..b``."""
        return BmSimplex(self.words[a], self.phis[a:b])

    def in_ass(self):
        return all(w.in_ass() for w in self.words)

    def in_lm(self):
        return all(w.in_lm() for w in self.words)

    def op(self):
        if not self.phis:
            return BmSimplex(self.w0.op())
        return BmSimplex.from_arrows(a.op() for a in self.arrows)

    def reverse(self):
        """Order reversal of the underlying maps, keeping the words (Ass only)."""
        if not self.in_ass():
            raise ValueError("reversal keeps words only inside Ass")
        phis = []
        w = self.w0
        for a in self.arrows:
            n, n2 = a.src.n, len(a.phi) - 1
            phis.append(tuple(n - a.phi[n2 - j] for j in range(n2 + 1)))
        return BmSimplex(w, phis)

    def project_ass(self):
        """Image under the projection to Ass: every word becomes ``a^n``."""
        return BmSimplex(BmWord((0,) * (self.w0.n + 1)), self.phis)


# -- enumeration of words, arrows, simplices --------------------------------------

def all_words(max_n):
    out = []
    for n in range(max_n + 1):
        for ones in range(n + 2):
            out.append(BmWord((0,) * (n + 1 - ones) + (1,) * ones))
    return out


def monotone_maps(n2, n):
    """All monotone maps ``[n2] -> [n]`` in lexicographic order."""
    return [tuple(c) for c in itertools.combinations_with_replacement(range(n + 1), n2 + 1)]


def arrows_from(w: BmWord, max_n):
    return [BmArrow(w, phi) for n2 in range(max_n + 1) for phi in monotone_maps(n2, w.n)]


def all_arrows(max_n):
    return [f for w in all_words(max_n) for f in arrows_from(w, max_n)]


def all_simplices(dim, max_n, start=None):
    """All simplices of the given dimension with every word of length <= max_n."""
    starts = all_words(max_n) if start is None else [start]
    out = []

    def go(w0, phis, w):
        if len(phis) == dim:
            out.append(BmSimplex(w0, phis))
            return
        for f in arrows_from(w, max_n):
            go(w0, phis + [f.phi], f.tgt)

    for w in starts:
        go(w, [], w)
    return out


# -- parsing -----------------------------------------------------------------------------

SIMPLEX_GRAMMAR = """\
simplex  = word { ";" map } ;
word     = "w" "=" bit { bit } ;
map      = "phi" "=" "[" int { "," int } "]" ;
bit      = "0" | "1" ;
int      = digit { digit } ;
"""

_TOKEN = re.compile(r"\s*(?:(w|phi)|(=)|(;)|(\[)|(\])|(,)|(\d+))")


class SimplexSyntaxError(ValueError):
    def __init__(self, msg, pos, token):
        super().__init__(f"{msg} at position {pos}: {token!r}")
        self.pos = pos
        self.token = token


def _tokens(text):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            end = start
            while end < len(text) and not text[end].isspace() and text[end] not in "=;[],":
                end += 1
            raise SimplexSyntaxError("unexpected token", start, text[start:end or start + 1])
        start = m.start(m.lastindex)
        toks.append((m.group(m.lastindex), start))
        pos = m.end()
    return toks


def parse_simplex(text) -> BmSimplex:
    toks = _tokens(text)
    i = 0

    def expect(value):
        nonlocal i
        if i >= len(toks):
            raise SimplexSyntaxError(f"expected {value!r}", len(text), "<end>")
        tok, pos = toks[i]
        if tok != value:
            raise SimplexSyntaxError(f"expected {value!r}", pos, tok)
        i += 1

    expect("w")
    expect("=")
    if i >= len(toks) or not toks[i][0].isdigit():
        tok, pos = toks[i] if i < len(toks) else ("<end>", len(text))
        raise SimplexSyntaxError("expected bits", pos, tok)
    bits, pos = toks[i]
    i += 1
    try:
        w0 = BmWord.parse(bits)
    except ValueError as e:
        raise SimplexSyntaxError(str(e), pos, bits) from None
    phis = []
    w = w0
    while i < len(toks):
        expect(";")
        expect("phi")
        expect("=")
        expect("[")
        values = []
        start = toks[i - 1][1]
        while True:
            if i >= len(toks):
                raise SimplexSyntaxError("unterminated map", len(text), "<end>")
            tok, pos = toks[i]
            if not tok.isdigit():
                raise SimplexSyntaxError("expected an integer", pos, tok)
            values.append(int(tok))
            i += 1
            if i < len(toks) and toks[i][0] == ",":
                i += 1
                continue
            expect("]")
            break
        try:
            f = BmArrow(w, values)
        except ValueError as e:
            raise SimplexSyntaxError(str(e), start, "[" + ",".join(map(str, values)) + "]") from None
        phis.append(f.phi)
        w = f.tgt
    return BmSimplex(w0, phis)


def format_simplex(s: BmSimplex) -> str:
    parts = [f"w={s.w0}"] + ["phi=[" + ",".join(map(str, p)) + "]" for p in s.phis]
    return ";".join(parts)


# -- shapes ---------------------------------------------------------------------------------

def floor_vertices(w: BmWord, floor):
    """Vertices of one floor in planar left-to-right order."""
    out = []
    if w.alpha:
        out.append((floor, "m", w.k + 1))
    for r in range(w.k, 0, -1):
        out.append((floor, "x", r))
        out.append((floor, "y", r))
    return out


def story_edges(f: BmArrow, top, bottom):
    """Covering arrows contributed by ``f`` between floors ``top`` (source) and ``bottom``."""
    w, w2, phi = f.src, f.tgt, f.phi
    k, k2 = w.k, w2.k

    def y(j):
        return (top, "m", j) if (w.alpha and j == k + 1) else (top, "y", j)

    edges = []
    for i in range(1, k2 + 1):
        lo, hi = phi[i - 1], phi[i]
        if lo == hi:
            edges.append(((bottom, "x", i), (bottom, "y", i)))
        else:
            edges.append(((bottom, "x", i), (top, "x", hi)))
            edges.append((y(lo + 1), (bottom, "y", i)))
            for j in range(lo + 2, hi + 1):
                edges.append((y(j), (top, "x", j - 1)))
    if w2.alpha:
        lo = phi[k2]
        edges.append((y(lo + 1), (bottom, "m", k2 + 1)))
        for j in range(lo + 2, k + 2):
            edges.append((y(j), (top, "x", j - 1)))
    return edges


def vertex_label(v):
    floor, kind, pos = v
    primes = "'" * floor if floor <= 3 else f"^({floor})"
    if kind == "m":
        return "y" + primes
    return f"{kind}{pos}{primes}"


class ShapePoset:
    """The planar poset attached to a simplex (or a gluing of such)."""

    def __init__(self, vertices, edges, floors, simplex=None):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.floors = tuple(tuple(f) for f in floors)
        self.simplex = simplex
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self.succ, self.pred = {}, {}
        self.multi = []
        for u, v in self.edges:
            if u in self.succ or v in self.pred:
                self.multi.append((u, v))
            self.succ.setdefault(u, v)
            self.pred.setdefault(v, u)

    def __repr__(self):
        return f"ShapePoset({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def floor_of(self, v):
        return v[0]

    def degree_ok(self):
        outs, ins = {}, {}
        for u, v in self.edges:
            outs[u] = outs.get(u, 0) + 1
            ins[v] = ins.get(v, 0) + 1
        return all(c <= 1 for c in outs.values()) and all(c <= 1 for c in ins.values())

    def is_acyclic(self):
        state = {}
        adj = {}
        for u, v in self.edges:
            adj.setdefault(u, []).append(v)
        for s in self.vertices:
            if s in state:
                continue
            stack = [(s, iter(adj.get(s, ())))]
            state[s] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(nxt) == 1:
                    return False
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(adj.get(nxt, ()))))
        return True

    @cached_property
    def chains(self):
        """Connected components as vertex lists in increasing order."""
        if not self.degree_ok() or not self.is_acyclic():
            raise ValueError("graph is not a disjoint union of chains")
        out = []
        for v in self.vertices:
            if v in self.pred:
                continue
            chain = [v]
            while chain[-1] in self.succ:
                chain.append(self.succ[chain[-1]])
            out.append(chain)
        return out

    @cached_property
    def position(self):
        """vertex -> (chain index, height in chain)."""
        pos = {}
        for c, chain in enumerate(self.chains):
            for h, v in enumerate(chain):
                pos[v] = (c, h)
        return pos

    def leq(self, u, v):
        cu, hu = self.position[u]
        cv, hv = self.position[v]
        return cu == cv and hu <= hv

    def path(self, u, v):
        """Covering edges from ``u`` up to ``v`` (requires ``u <= v``)."""
        c, hu = self.position[u]
        _, hv = self.position[v]
        chain = self.chains[c]
        return [(chain[h], chain[h + 1]) for h in range(hu, hv)]

    @cached_property
    def cat(self) -> FinCat:
        return FinCat.poset(self.vertices, self.edges)

    def reachability_cat(self) -> FinCat:
        """Poset from plain reachability closure (independent of the chain view)."""
        return FinCat.poset(self.vertices, self.edges)

    def floor_order(self, floor):
        return self.floors[floor]

    def neighbors(self, u, v):
        """Whether ``u`` sits immediately left of ``v`` on a common floor."""
        if u[0] != v[0]:
            return False
        row = self.floors[u[0]]
        i = row.index(u)
        return i + 1 < len(row) and row[i + 1] == v

    def to_json(self):
        return {
            "simplex": None if self.simplex is None else format_simplex(self.simplex),
            "floors": [[vertex_label(v) for v in row] for row in self.floors],
            "vertices": [{"id": _vid(v), "label": vertex_label(v), "floor": v[0],
                          "kind": v[1], "pos": v[2]} for v in self.vertices],
            "edges": [[_vid(u), _vid(v)] for u, v in self.edges],
        }

    def to_dot(self, name="shape"):
        lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [shape=circle, fontsize=10];"]
        for f, row in enumerate(self.floors):
            ids = " ".join(f'"{_vid(v)}";' for v in row)
            lines.append(f"  {{ rank=same; {ids} }}")
            for v in row:
                fill = "white" if v[1] == "x" else "black"
                font = "black" if v[1] == "x" else "white"
                lines.append(f'  "{_vid(v)}" [label="{vertex_label(v)}", style=filled, '
                             f'fillcolor={fill}, fontcolor={font}];')
            for a, b in zip(row, row[1:]):
                lines.append(f'  "{_vid(a)}" -> "{_vid(b)}" [style=invis];')
        for u, v in self.edges:
            lines.append(f'  "{_vid(u)}" -> "{_vid(v)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _vid(v):
    return f"{v[1]}{v[2]}_{v[0]}"


@lru_cache(maxsize=None)
def shape_vertex(w: BmWord) -> ShapePoset:
    row = floor_vertices(w, 0)
    return ShapePoset(row, [], [row], BmSimplex(w))


@lru_cache(maxsize=None)
def shape(s: BmSimplex) -> ShapePoset:
    floors = [floor_vertices(w, i) for i, w in enumerate(s.words)]
    edges = []
    for i, f in enumerate(s.arrows):
        edges.extend(story_edges(f, i, i + 1))
    return ShapePoset([v for row in floors for v in row], edges, floors, s)


def shape_arrow(f: BmArrow) -> ShapePoset:
    return shape(BmSimplex(f.src, [f.phi]))


def arrow_count(f: BmArrow):
    """Number of covering arrows of ``shape_arrow(f)``."""
    k, k2, a2 = f.src.k, f.tgt.k, f.tgt.alpha
    if k2 + a2 == 0:
        return 0
    return k2 + min(f.phi[k2 + a2], k + f.src.alpha) - f.phi[0]


def arrow_count_closed_form(f: BmArrow):
    """``k' + phi(k' + alpha') - phi(0)``; valid when phi does not reach past the m letter."""
    k2, a2 = f.tgt.k, f.tgt.alpha
    if k2 + a2 == 0:
        return 0
    return k2 + f.phi[k2 + a2] - f.phi[0]


# -- structural checks ---------------------------------------------------------------------

def cap_cup_violations(S: ShapePoset, excursions_only=False):
    """Paths with both ends on one floor that break the neighbor rule.

    A path starting upward and ending downward must join ``u`` to its right
    neighbor; one starting downward and ending upward must join neighbors.
    With ``excursions_only`` only paths whose interior avoids the end floor
    are considered.
    """
    bad = []
    for chain in S.chains:
        for i in range(len(chain)):
            for j in range(i + 2, len(chain)):
                u, v = chain[i], chain[j]
                if u[0] != v[0]:
                    continue
                if excursions_only and any(w[0] == u[0] for w in chain[i + 1:j]):
                    continue
                first = chain[i + 1][0] - u[0]
                last = v[0] - chain[j - 1][0]
                if first < 0 and last > 0:
                    if not S.neighbors(u, v):
                        bad.append(("cap", u, v))
                elif first > 0 and last < 0:
                    if not (S.neighbors(u, v) or S.neighbors(v, u)):
                        bad.append(("cup", u, v))
    return bad


def inner_face_map(s: BmSimplex, i):
    """Vertex map ``shape(d_i s) -> shape(s)`` for an interior index."""
    if not 0 < i < s.dim:
        raise ValueError("inner faces need 0 < i < dim; outer faces restrict floors")
    face = s.face(i)
    F = shape(face)
    return F, {v: (v[0] if v[0] < i else v[0] + 1, v[1], v[2]) for v in F.vertices}


def inner_face(s: BmSimplex, i):
    """The monotone inclusion ``shape(d_i s) -> shape(s)`` as a FinFunctor."""
    F, vmap = inner_face_map(s, i)
    G = shape(s)
    for u, v in F.edges:
        if not G.leq(vmap[u], vmap[v]):
            raise AssertionError(f"inner face {i} of {s} is not monotone at {u},{v}")
    return FinFunctor(F.cat, G.cat, vmap, {(u, v): (vmap[u], vmap[v]) for (u, v) in F.cat.arrows})


def inner_face_monotone(s: BmSimplex, i):
    F, vmap = inner_face_map(s, i)
    G = shape(s)
    return len(set(vmap.values())) == len(vmap) and all(G.leq(vmap[u], vmap[v]) for u, v in F.edges)


def inner_face_reflection_failures(s: BmSimplex, i):
    """Pairs incomparable in ``shape(d_i s)`` whose images are comparable."""
    F, vmap = inner_face_map(s, i)
    G = shape(s)
    return [(u, v) for u in F.vertices for v in F.vertices
            if not F.leq(u, v) and G.leq(vmap[u], vmap[v])]


def inner_face_reflects_order(s: BmSimplex, i):
    return inner_face_monotone(s, i) and not inner_face_reflection_failures(s, i)


def dual_segal_ok(s: BmSimplex):
    """Shape of ``s`` is the floor gluing of the shapes of its arrows.

    Checks that floors reproduce the word shapes, that the edge set is the
    union of the story edge sets, and that every story edge stays a
    covering relation in the glued poset.
    """
    S = shape(s)
    for i, w in enumerate(s.words):
        if list(S.floors[i]) != floor_vertices(w, i):
            return False
    union = []
    for i in range(s.dim):
        A = shape(s.restrict(i, i + 1))
        union.extend(((u[0] + i, u[1], u[2]), (v[0] + i, v[1], v[2])) for u, v in A.edges)
    if sorted(union) != sorted(S.edges):
        return False
    P = S.cat
    covers = set(P.covering_pairs())
    return all(e in covers for e in union)


def check_shape(s: BmSimplex):
    """List of structural failures of ``shape(s)``."""
    S = shape(s)
    out = []
    if not S.is_acyclic():
        out.append("cycle")
    if not S.degree_ok():
        out.append("vertex with two incoming or two outgoing arrows")
    if out:
        return out
    if cap_cup_violations(S):
        out.append("cap/cup law")
    for i in range(1, s.dim):
        if not inner_face_monotone(s, i):
            out.append(f"inner face {i} not monotone")
        elif inner_face_reflection_failures(s, i):
            out.append(f"inner face {i} not order-reflecting")
    if s.dim >= 2 and not dual_segal_ok(s):
        out.append("floor gluing")
    if s.dim == 1 and len(S.edges) != arrow_count(s.arrows[0]):
        out.append("arrow count")
    return out


# -- components ---------------------------------------------------------------------------

COMPONENT_TYPES = {
    1: "x-type single vertex",
    2: "y-type single vertex",
    3: "upward arrow",
    4: "downward arrow",
    5: "lower horizontal arrow",
    6: "upper horizontal arrow",
}


def classify_components(f: BmArrow):
    """Tag every component of ``shape_arrow(f)`` with its type (1)-(6).

    Returns a list of ``(type, vertex labels)`` in planar reading order.
    """
    S = shape_arrow(f)
    report = []
    for chain in S.chains:
        if len(chain) == 1:
            t = 1 if chain[0][1] == "x" else 2
        elif len(chain) == 2:
            (fu, _, _), (fv, _, _) = chain
            if fu == 1 and fv == 0:
                t = 3
            elif fu == 0 and fv == 1:
                t = 4
            elif fu == fv == 1:
                t = 5
            else:
                t = 6
        else:
            raise AssertionError("components of a single story have at most one arrow")
        report.append((t, tuple(vertex_label(v) for v in chain)))
    return report


# -- op, projection and folding ----------------------------------------------------------

def _order_isomorphic(A: ShapePoset, B: ShapePoset, vmap, reverse=False):
    """Whether ``vmap`` is an order isomorphism ``A -> B`` (or ``A -> B^op``)."""
    if sorted(vmap.values(), key=repr) != sorted(B.vertices, key=repr) or len(vmap) != len(A.vertices):
        return False
    for u in A.vertices:
        for v in A.vertices:
            lhs = A.leq(u, v)
            rhs = B.leq(vmap[v], vmap[u]) if reverse else B.leq(vmap[u], vmap[v])
            if lhs != rhs:
                return False
    return True


def ass_op_compare(s: BmSimplex):
    """Vertex map ``shape(s reversed) -> shape(s)^op``, verified.

    On a floor with word ``a^n`` it sends ``x_i`` to ``y_{n+1-i}`` and
    ``y_i`` to ``x_{n+1-i}``.
    """
    if not s.in_ass():
        raise ValueError("simplex does not lie in Ass")
    A, B = shape(s.reverse()), shape(s)
    vmap = {}
    for v in A.vertices:
        n = s.words[v[0]].n
        vmap[v] = (v[0], "y" if v[1] == "x" else "x", n + 1 - v[2])
    if not _order_isomorphic(A, B, vmap, reverse=True):
        raise AssertionError(f"op comparison failed for {s}")
    return vmap


def glue_shapes(parts, shared_floors=0):
    """Disjoint union of shapes, identifying their first ``shared_floors`` floors.

    Each part is ``(tag, ShapePoset)``; vertices off the shared floors get
    the part tag prepended.  Edges are unioned (shared edges collapse).
    """
    def rename(tag, v):
        return v if v[0] < shared_floors else (tag,) + v

    vertices, edges, floors = [], [], []
    seen_v, seen_e = set(), set()
    nfloors = max(len(P.floors) for _, P in parts)
    for f in range(nfloors):
        row = []
        for tag, P in parts:
            if f < len(P.floors):
                for v in P.floors[f]:
                    r = rename(tag, v)
                    if r not in seen_v:
                        seen_v.add(r)
                        row.append(r)
        floors.append(row)
        vertices.extend(row)
    for tag, P in parts:
        for u, v in P.edges:
            e = (rename(tag, u), rename(tag, v))
            if e not in seen_e:
                seen_e.add(e)
                edges.append(e)
    return _TaggedShape(vertices, edges, floors)


class _TaggedShape(ShapePoset):
    def floor_of(self, v):
        return v[-3]

    def neighbors(self, u, v):
        for row in self.floors:
            if u in row and v in row:
                i = row.index(u)
                return i + 1 < len(row) and row[i + 1] == v
        return False


def piass_compare(s: BmSimplex):
    """Verified map ``shape(pi s) -> shape(s) + shape(s^op)^op``.

    Letter ``j`` of a floor word gives the pair ``x_j, y_j`` of the
    projected word; an a-letter matches the same pair of ``shape(s)``, a
    b-letter the pair of ``shape(s^op)`` at the mirrored position with
    colors exchanged, and the m-letter matches the m-vertex of ``shape(s)``
    (black) and the m-vertex of ``shape(s^op)`` (white).
    """
    P = shape(s.project_ass())
    A, B = shape(s), shape(s.op())
    vmap = {}
    for v in P.vertices:
        f, kind, j = v
        w = s.words[f]
        n = w.n
        if j <= w.k:
            vmap[v] = ("bm", f, kind, j)
        elif j == w.k + 1 and w.alpha:
            vmap[v] = ("bm", f, "m", j) if kind == "y" else ("op", f, "m", n + 1 - j)
        else:
            vmap[v] = ("op", f, "y" if kind == "x" else "x", n + 1 - j)
    for v in P.vertices:
        side = vmap[v][0]
        target = A if side == "bm" else B
        if vmap[v][1:] not in target._index:
            raise AssertionError(f"piass comparison sends {v} outside the target")
    if len(set(vmap.values())) != len(A.vertices) + len(B.vertices):
        raise AssertionError("piass comparison is not bijective")

    def leq_target(a, b):
        if a[0] != b[0]:
            return False
        if a[0] == "bm":
            return A.leq(a[1:], b[1:])
        return B.leq(b[1:], a[1:])

    for u in P.vertices:
        for v in P.vertices:
            if P.leq(u, v) != leq_target(vmap[u], vmap[v]):
                raise AssertionError(f"piass comparison not monotone for {s} at {u},{v}")
    return vmap


def lm_split(s: BmSimplex):
    """Index ``m`` of the last word containing the letter m (``-1`` if none)."""
    if not s.in_lm():
        raise ValueError("simplex does not lie in LM")
    m = -1
    for i, w in enumerate(s.words):
        if w.in_lm_minus():
            m = i
    return m


def fold_parts(s: BmSimplex):
    """The two simplices ``(psi_minus, psi_plus)`` whose shapes glue to the fold."""
    m = lm_split(s)
    arrows = s.arrows
    if m == -1:
        return s, s.op(), m
    head = [a.star() for a in arrows[:m]]
    stars = [w.star() for w in s.words[:m + 1]]
    if m == s.dim:
        core = BmSimplex.from_arrows(head) if head else BmSimplex(stars[0])
        return core, core, m
    vm = s.words[m]
    k = vm.k
    f = arrows[m]
    minus_link = BmArrow(stars[m], f.phi)
    plus_link = BmArrow(stars[m], tuple(k + p for p in f.op().phi))
    minus = head + [minus_link] + list(arrows[m + 1:])
    plus = head + [plus_link] + [a.op() for a in arrows[m + 1:]]
    return BmSimplex.from_arrows(minus), BmSimplex.from_arrows(plus), m


def fold_shape(s: BmSimplex):
    """Folded shape with a verified isomorphism to ``shape(s)``.

    Returns ``(glued, iso)`` where ``iso`` is a FinFunctor from the glued
    poset to the shape poset of ``s``.
    """
    minus, plus, m = fold_parts(s)
    if minus == plus:
        glued = glue_shapes([("-", shape(minus))], shared_floors=s.dim + 1)
    else:
        glued = glue_shapes([("-", shape(minus)), ("+", shape(plus))], shared_floors=m + 1)
    iso = find_isomorphism(glued.cat, shape(s).cat)
    if iso is None:
        raise AssertionError(f"folded shape of {s} is not isomorphic to its shape")
    return glued, iso


# -- evaluation in a finite category ------------------------------------------------------------

class Evaluation:
    """Functors from a shape to ``X``, stored as (objects, arrows) tuples.

    ``objects`` follows ``shape.vertices``; ``arrows`` follows
    ``shape.edges``.
    """

    def __init__(self, S: ShapePoset, X: FinCat, elements):
        self.shape = S
        self.X = X
        self.elements = elements
        self.vindex = {v: i for i, v in enumerate(S.vertices)}
        self.eindex = {e: i for i, e in enumerate(S.edges)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def on_vertices(self, element, vertices):
        objs = element[0]
        return tuple(objs[self.vindex[v]] for v in vertices)

    def floor(self, element, f):
        return self.on_vertices(element, self.shape.floors[f])


def _chain_assignments(chain_len, X: FinCat):
    """Sequences of composable arrows of length ``chain_len - 1`` in ``X``."""
    out = []
    if chain_len == 1:
        return [((o,), ()) for o in X.objects]

    def go(objs, arrs):
        if len(objs) == chain_len:
            out.append((tuple(objs), tuple(arrs)))
            return
        for a in X.out_arrows(objs[-1]):
            go(objs + [X.tgt[a]], arrs + [a])

    for o in X.objects:
        go([o], [])
    return out


def eval_shape(s, X: FinCat, cap=None, fixed=None) -> Evaluation:
    """All functors ``shape(s) -> X``.

    Components are chains, so a functor is a product of composable
    sequences, one per chain.  ``fixed`` optionally pins vertex values.
    """
    cap = MAX_FUNCTORS if cap is None else cap
    S = s if isinstance(s, ShapePoset) else shape(s)
    chains = S.chains
    eidx = {e: i for i, e in enumerate(S.edges)}
    vidx = {v: i for i, v in enumerate(S.vertices)}
    per_chain = []
    total = 1
    cache = {}
    for chain in chains:
        opts = cache.get(len(chain))
        if opts is None:
            opts = cache[len(chain)] = _chain_assignments(len(chain), X)
        if fixed:
            opts = [o for o in opts if all(fixed.get(v, o[0][h]) == o[0][h] for h, v in enumerate(chain))]
        per_chain.append(opts)
        total *= len(opts)
        if total > cap:
            raise CapExceeded(f"evaluation of {S!r} would exceed {cap} functors")
    elements = []
    nv, ne = len(S.vertices), len(S.edges)
    vslots = [[vidx[v] for v in chain] for chain in chains]
    eslots = [[eidx[(chain[h], chain[h + 1])] for h in range(len(chain) - 1)] for chain in chains]
    for combo in itertools.product(*per_chain):
        objs = [None] * nv
        arrs = [None] * ne
        for c, (os_, as_) in enumerate(combo):
            for slot, o in zip(vslots[c], os_):
                objs[slot] = o
            for slot, a in zip(eslots[c], as_):
                arrs[slot] = a
        elements.append((tuple(objs), tuple(arrs)))
    return Evaluation(S, X, elements)


def eval_shape_generic(s, X: FinCat, cap=None):
    """Same set via generic functor enumeration on the reachability poset."""
    S = s if isinstance(s, ShapePoset) else shape(s)
    out = []
    for F in enumerate_functors(S.cat, X, cap=cap):
        out.append((tuple(F.omap[v] for v in S.vertices), tuple(F.amap[e] for e in S.edges)))
    return Evaluation(S, X, out)


def pull_back(big: Evaluation, element, sub: ShapePoset, vmap):
    """Restrict a functor on ``big.shape`` along a vertex embedding of ``sub``."""
    X = big.X
    objs, arrs = element
    B = big.shape
    sub_objs = tuple(objs[big.vindex[vmap[v]]] for v in sub.vertices)
    sub_arrs = []
    for u, v in sub.edges:
        path = B.path(vmap[u], vmap[v])
        a = X.ident[objs[big.vindex[vmap[u]]]]
        for e in path:
            a = X.comp[(arrs[big.eindex[e]], a)]
        sub_arrs.append(a)
    return sub_objs, tuple(sub_arrs)


def inert_lift(f: BmArrow, x_values, X: FinCat):
    """Cocartesian lifting of an inert arrow at a floor value.

    ``x_values`` lists objects on the source floor in planar order; the
    result is the functor on ``shape_arrow(f)`` whose arrows are all
    identities.
    """
    if not f.is_inert():
        raise ValueError("lifting recipe applies to inert arrows")
    S = shape_arrow(f)
    src_vals = dict(zip(S.floors[0], x_values))
    c = f.phi[0]
    objs = []
    for v in S.vertices:
        if v[0] == 0:
            objs.append(src_vals[v])
        else:
            objs.append(src_vals[(0, v[1], v[2] + c)])
    index = {v: i for i, v in enumerate(S.vertices)}
    arrs = []
    for u, v in S.edges:
        if objs[index[u]] != objs[index[v]]:
            raise AssertionError("inert lifting recipe produced a non-identity arrow")
        arrs.append(X.ident[objs[index[u]]])
    return S, (tuple(objs), tuple(arrs))


class Composer:
    """Glue functors on ``shape(f)`` and ``shape(g)`` and restrict to ``shape(f then g)``.

    The plan records, for every vertex of the composite shape, where its
    value comes from, and for every covering arrow, the path of story
    arrows it composes in the glued shape.
    """

    def __init__(self, f: BmArrow, g: BmArrow):
        s = BmSimplex(f.src, [f.phi, g.phi])
        S = shape(s)
        A, B = shape_arrow(f), shape_arrow(g)
        F, vmap = inner_face_map(s, 1)
        self.shape = F
        aidx = {v: i for i, v in enumerate(A.vertices)}
        bidx = {(v[0] + 1, v[1], v[2]): i for i, v in enumerate(B.vertices)}
        nA = len(A.edges)
        eidx = {e: i for i, e in enumerate(S.edges)}
        self.vplan = []
        for v in F.vertices:
            w = vmap[v]
            self.vplan.append((0, aidx[w]) if w in aidx else (1, bidx[w]))
        self.eplan = []
        for u, v in F.edges:
            start = vmap[u]
            src = (0, aidx[start]) if start in aidx else (1, bidx[start])
            steps = []
            for e in S.path(vmap[u], vmap[v]):
                i = eidx[e]
                steps.append((0, i) if i < nA else (1, i - nA))
            self.eplan.append((src, steps))

    def __call__(self, X: FinCat, a_elem, b_elem):
        parts = (a_elem, b_elem)
        objs = tuple(parts[side][0][i] for side, i in self.vplan)
        arrs = []
        for (side, i), steps in self.eplan:
            r = X.ident[parts[side][0][i]]
            for p, j in steps:
                r = X.comp[(parts[p][1][j], r)]
            arrs.append(r)
        return objs, tuple(arrs)


class EvalCache:
    """Memoized ``eval_shape`` for one target category."""

    def __init__(self, X: FinCat, cap=None):
        self.X = X
        self.cap = cap
        self._evals = {}
        self._groups = {}
        self._composers = {}

    def eval(self, S: ShapePoset) -> Evaluation:
        E = self._evals.get(id(S))
        if E is None:
            E = self._evals[id(S)] = eval_shape(S, self.X, cap=self.cap)
        return E

    def by_ends(self, S: ShapePoset):
        """Elements grouped by (first floor, last floor) values."""
        G = self._groups.get(id(S))
        if G is None:
            E = self.eval(S)
            G = {}
            last = len(S.floors) - 1
            for el in E:
                G.setdefault((E.floor(el, 0), E.floor(el, last)), []).append(el)
            self._groups[id(S)] = G
        return G

    def by_first(self, S: ShapePoset):
        """Elements grouped by first floor value."""
        key = ("first", id(S))
        G = self._groups.get(key)
        if G is None:
            E = self.eval(S)
            G = {}
            for el in E:
                G.setdefault(E.floor(el, 0), []).append(el)
            self._groups[key] = G
        return G

    def composer(self, f, g):
        key = (f, g)
        c = self._composers.get(key)
        if c is None:
            c = self._composers[key] = Composer(f, g)
        return c


class FibrousReport:
    def __init__(self):
        self.checked = {"segal": 0, "inert": 0, "product": 0}
        self.failures = []

    @property
    def ok(self):
        return not self.failures

    def __repr__(self):
        return f"FibrousReport(checked={self.checked}, failures={len(self.failures)})"


def eval_count(S: ShapePoset, X: FinCat):
    """Number of functors ``S -> X`` without listing them."""
    per_len = {}
    total = 1
    for chain in S.chains:
        n = per_len.get(len(chain))
        if n is None:
            n = per_len[len(chain)] = len(_chain_assignments(len(chain), X))
        total *= n
    return total


ELEMENTWISE_LIMIT = 20000


def _getter(idx):
    if not idx:
        return lambda t: ()
    if len(idx) == 1:
        j = idx[0]
        return lambda t: (t[j],)
    return operator.itemgetter(*idx)


def segal_check_simplex(s: BmSimplex, X: FinCat, cap=None, cache=None):
    """Segal bijection ``eval(s) -> eval(f_1) x_{eval(w_1)} ... x eval(f_n)``.

    The restriction map is a coordinate projection.  It is injective when
    the story pieces together cover every vertex and covering arrow of
    the shape; this is checked structurally, and element by element when
    the evaluation has at most ``ELEMENTWISE_LIMIT`` members.  The source
    size is then compared with the size of the iterated fiber product.
    """
    cache = cache or EvalCache(X, cap)
    S = shape(s)
    vidx = {v: i for i, v in enumerate(S.vertices)}
    eidx = {e: i for i, e in enumerate(S.edges)}
    selectors = []
    for i in range(s.dim):
        sub = shape(s.restrict(i, i + 1))
        vs = [vidx[(v[0] + i, v[1], v[2])] for v in sub.vertices]
        es = [eidx[((u[0] + i,) + u[1:], (v[0] + i,) + v[1:])] for u, v in sub.edges]
        selectors.append((vs, es))
    covered_v = {j for vs, _ in selectors for j in vs}
    covered_e = {j for _, es in selectors for j in es}
    if covered_v != set(range(len(S.vertices))) or covered_e != set(range(len(S.edges))):
        return False
    size = eval_count(S, X)
    if size <= ELEMENTWISE_LIMIT:
        E = eval_shape(S, X, cap=cache.cap)
        getters = [(_getter(vs), _getter(es)) for vs, es in selectors]
        images = set()
        for objs, arrs in E:
            images.add(tuple((gv(objs), ge(arrs)) for gv, ge in getters))
        if len(images) != len(E) or len(E) != size:
            return False
    counts = None
    for i in range(s.dim):
        groups = cache.by_ends(shape(s.restrict(i, i + 1)))
        if counts is None:
            counts = {}
            for (a, b), els in groups.items():
                counts[b] = counts.get(b, 0) + len(els)
        else:
            new = {}
            for (a, b), els in groups.items():
                if a in counts:
                    new[b] = new.get(b, 0) + counts[a] * len(els)
            counts = new
    return sum(counts.values()) == size


def inert_cocartesian_ok(f: BmArrow, X: FinCat, max_n, cap=None, cache=None):
    """Check the lifting of inert ``f`` at every source value is cocartesian.

    For every ``g`` out of ``f.tgt`` (words up to ``max_n``), composing with
    the lifting must biject functors on ``shape(g)`` starting at the lifted
    value with functors on ``shape(f then g)`` starting at the original one.
    """
    cache = cache or EvalCache(X, cap)
    failures = []
    gs = arrows_from(f.tgt, max_n)
    for xv in cache.eval(shape_vertex(f.src)):
        x_values = xv[0]
        L, lift = inert_lift(f, x_values, X)
        y_values = tuple(lift[0][i] for i, v in enumerate(L.vertices) if v[0] == 1)
        for g in gs:
            comp = cache.composer(f, g)
            starts = cache.by_first(shape_arrow(g)).get(y_values, [])
            targets = set(cache.by_first(shape_arrow(f.then(g))).get(x_values, []))
            images = {comp(X, lift, b) for b in starts}
            if len(images) != len(starts) or images != targets:
                failures.append((f, g, x_values))
    return failures


def product_decomposition_ok(f: BmArrow, X: FinCat, cap=None, cache=None):
    """``Map_f(x, y) -> prod_i Map_{rho_i f}(x, y_i)`` is bijective for all ``x, y``."""
    cache = cache or EvalCache(X, cap)
    u = f.tgt
    rhos = [BmArrow(u, (i - 1, i)) for i in range(1, u.n + 1)]
    composers = [cache.composer(f, r) for r in rhos]
    groups = cache.by_ends(shape_arrow(f))
    rho_groups = [cache.by_ends(shape_arrow(f.then(r))) for r in rhos]
    failures = []
    for xe in cache.eval(shape_vertex(f.src)):
        x = xe[0]
        for ye in cache.eval(shape_vertex(u)):
            y = ye[0]
            lifts = []
            for r in rhos:
                L, lift = inert_lift(r, y, X)
                yi = tuple(lift[0][i] for i, v in enumerate(L.vertices) if v[0] == 1)
                lifts.append((lift, yi))
            allowed = [set(G.get((x, yi), ())) for (_, yi), G in zip(lifts, rho_groups)]
            expected = 1
            for a in allowed:
                expected *= len(a)
            elems = groups.get((x, y), [])
            images = set()
            for a in elems:
                image = tuple(c(X, a, lift) for c, (lift, _) in zip(composers, lifts))
                if any(img not in ok for img, ok in zip(image, allowed)):
                    failures.append((f, x, y))
                    break
                images.add(image)
            if len(elems) != expected or len(images) != len(elems):
                failures.append((f, x, y))
    return failures


def segal_fibrous_check(X: FinCat, max_dim=2, max_n=2, cap=None):
    """Segal bijections, inert liftings and product decompositions for ``X``."""
    report = FibrousReport()
    cache = EvalCache(X, cap)
    for d in range(2, max_dim + 1):
        for s in all_simplices(d, max_n):
            report.checked["segal"] += 1
            if not segal_check_simplex(s, X, cache=cache):
                report.failures.append(("segal", format_simplex(s)))
    for f in all_arrows(max_n):
        if f.is_inert():
            report.checked["inert"] += 1
            for fail in inert_cocartesian_ok(f, X, max_n, cache=cache):
                report.failures.append(("inert", repr(fail[0]), repr(fail[1]), fail[2]))
        report.checked["product"] += 1
        for fail in product_decomposition_ok(f, X, cache=cache):
            report.failures.append(("product", repr(fail[0]), fail[1], fail[2]))
    return report


# -- flatness ----------------------------------------------------------------------------------

def _components(S: ShapePoset):
    comp = {}
    for c, chain in enumerate(S.chains):
        for v in chain:
            comp[v] = c
    return comp


def flat_compose_check(s: BmSimplex):
    """Component structure of ``shape(d_1 s)`` matches the gluing in ``shape(s)``.

    Requires ``d_0 s`` active.  Fails exactly when some component of the
    glued shape is trapped on the middle floor (a cap with nowhere to go)
    or the outer-floor partition into components differs.
    """
    if s.dim != 2:
        raise ValueError("flat_compose_check takes 2-simplices")
    if not s.arrows[1].is_active():
        raise ValueError("precondition: the second arrow must be active")
    return not flat_compose_obstructions(s)


def flat_compose_obstructions(s: BmSimplex):
    S = shape(s)
    F, vmap = inner_face_map(s, 1)
    comp_s = _components(S)
    comp_f = _components(F)
    out = []
    for chain in S.chains:
        if all(v[0] == 1 for v in chain):
            out.append(("middle", tuple(vertex_label(v) for v in chain)))
    for u in F.vertices:
        for v in F.vertices:
            if (comp_f[u] == comp_f[v]) != (comp_s[vmap[u]] == comp_s[vmap[v]]):
                out.append(("partition", vertex_label(u), vertex_label(v)))
    return out


def total_category(s: BmSimplex, X: FinCat, cap=None):
    """The category of ``X``-decorations over the floors of ``s``.

    Objects are ``(i, e)`` with ``e`` a functor on floor ``i``; arrows over
    ``i <= j`` are functors on the shape of the sub-chain ``i..j`` with the
    given end values.  For a poset ``X`` this is a poset; returned as such
    together with the level map.
    """
    objects = []
    for i, w in enumerate(s.words):
        for e in eval_shape(shape_vertex(w), X, cap=cap):
            objects.append((i, e[0]))
    relations = set()
    for i in range(s.dim + 1):
        for j in range(i, s.dim + 1):
            sub = s.restrict(i, j)
            if i == j:
                sub = BmSimplex(s.words[i], [BmArrow.identity(s.words[i]).phi])
            merged = sub
            while merged.dim > 1:
                merged = merged.face(1)
            E = eval_shape(merged, X, cap=cap)
            for el in E:
                relations.add(((i, E.floor(el, 0)), (j, E.floor(el, merged.dim))))
    relations = sorted(relations, key=repr)
    C = FinCat.poset(objects, relations)
    level = {o: o[0] for o in objects}
    return C, level


def total_flatness_failures(s: BmSimplex, X: FinCat, cap=None):
    C, level = total_category(s, X, cap=cap)
    return flat_over_2_failures(C, level)


# -- serialization ---------------------------------------------------------------------------

def shape_json(s: BmSimplex) -> str:
    return json.dumps(shape(s).to_json(), indent=2, sort_keys=True) + "\n"
