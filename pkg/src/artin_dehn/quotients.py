"""Quotient diagrams attached to a generator t.

The coarse diagram merges equivalent regions; the Howie diagram contracts
every edge not labelled t and keeps the contracted letters as corner words;
the tilde diagram collapses the bigons left by t-bands.  The composite map
on 1-skeleta is kept explicitly in both directions."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .diagram import OUTER, Diagram, DiagramError, face_n
from .bands_moves import is_disc
from .presentation import LabeledGraph, subgraph
from .words import Word, free_reduce


class QuotientError(DiagramError):
    pass


class AdequacyError(QuotientError):
    def __init__(self, msg: str, faces: list[int]):
        super().__init__(msg)
        self.faces = faces


class RegionKind(str, Enum):
    BIG = "4+"
    BAND = "B"
    H = "H"


def region_kind(d: Diagram, f: int, t: str, presentation=None) -> RegionKind:
    w = d.face_word(f)
    if t not in w.support():
        return RegionKind.H
    return RegionKind.BIG if face_n(d, f, presentation) >= 3 else RegionKind.BAND


def t_set(d: Diagram, presentation=None) -> set[str]:
    """Generators occurring in regions that are not commutators."""
    out: set[str] = set()
    for f in d.inner_faces():
        if face_n(d, f, presentation) >= 3:
            out |= d.face_word(f).support()
    return out


class _UF:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self, items) -> dict:
        out: dict = {}
        for x in items:
            out.setdefault(self.find(x), []).append(x)
        return out


def _is_t(d: Diagram, x: int, t: str) -> bool:
    return d.label[x][0] == t


# ----------------------------------------------------------------------
# coarse diagram


@dataclass
class CoarseDiagram:
    base: Diagram
    diagram: Diagram
    t: str
    classes: dict[int, list[int]]  # coarse tag -> regions of the base
    kinds: dict[int, RegionKind]
    n: dict[int, int] = field(default_factory=dict)  # 4+ classes only

    def of_kind(self, kind: RegionKind) -> list[int]:
        return sorted(f for f, k in self.kinds.items() if k == kind)

    @property
    def reg4plus(self) -> list[int]:
        return self.of_kind(RegionKind.BIG)

    @property
    def bands(self) -> list[int]:
        return self.of_kind(RegionKind.BAND)

    @property
    def hregions(self) -> list[int]:
        return self.of_kind(RegionKind.H)


def region_classes(d: Diagram, t: str, presentation=None) -> list[tuple[RegionKind, list[int]]]:
    """The t-equivalence, H_t-equivalence and B_t-equivalence classes."""
    kinds = {f: region_kind(d, f, t, presentation) for f in d.inner_faces()}
    supp = {f: d.face_word(f).support() for f in kinds}
    uf = _UF()
    for x in d.origin:
        f, g = d.ftag[x], d.ftag[d.opp[x]]
        if f == OUTER or g == OUTER or f == g or kinds[f] != kinds[g]:
            continue
        k = kinds[f]
        if k == RegionKind.BIG and supp[f] != supp[g]:
            continue
        if k == RegionKind.BAND and not _is_t(d, x, t):
            continue
        uf.union(f, g)
    groups = uf.groups(sorted(kinds))
    return [(kinds[r], sorted(fs)) for r, fs in sorted(groups.items())]


def build_coarse(d: Diagram, t: str, presentation=None) -> CoarseDiagram:
    if t not in t_set(d, presentation):
        raise QuotientError(f"{t} does not occur in a region that is not a commutator")
    classes = region_classes(d, t, presentation)
    cls_of: dict[int, int] = {}
    for i, (kind, fs) in enumerate(classes):
        if not is_disc(d, fs):
            raise AdequacyError(f"{kind.value} class {fs} is not an open disc", fs)
        for f in fs:
            cls_of[f] = i
    new = d.copy()
    new.corner = {}
    while True:
        hit = next(
            (x for x in new.edges()
             if new.ftag[x] != OUTER and new.ftag[new.opp[x]] != OUTER
             and new.ftag[x] != new.ftag[new.opp[x]]
             and cls_of[d.ftag[x]] == cls_of[d.ftag[new.opp[x]]]),
            None,
        )
        if hit is None:
            break
        new.delete_edge(hit)
    # leftover trees inside a merged face
    while True:
        hit = next((x for x in new.edges() if new.ftag[x] == new.ftag[new.opp[x]] != OUTER), None)
        if hit is None:
            break
        new.delete_edge(hit)
    out = CoarseDiagram(d, new, t, {}, {})
    for i, (kind, fs) in enumerate(classes):
        x = next(x for x in new.origin if d.ftag.get(x) in fs and cls_of[d.ftag[x]] == i)
        tag = new.ftag[x]
        out.classes[tag] = fs
        out.kinds[tag] = kind
        if kind == RegionKind.BIG:
            out.n[tag] = face_n(d, fs[0], presentation)
    return out


# ----------------------------------------------------------------------
# Howie diagram


@dataclass
class HowieDiagram:
    coarse: CoarseDiagram
    diagram: Diagram
    vertex_map: dict[int, int]  # coarse vertex -> Howie vertex
    region_map: dict[int, int | None]  # coarse tag -> Howie tag

    def vertex_words(self) -> dict[int, Word]:
        """Corner words around each vertex, in rotation order."""
        h = self.diagram
        out = {}
        for v in sorted(h.vertices):
            w = Word()
            for z in h.around(v):
                w = w + h.corner.get(z, Word())
            out[v] = w
        return out

    def inner_vertices(self) -> list[int]:
        bv = self.diagram.boundary_vertices()
        return sorted(v for v in self.diagram.vertices if v not in bv)


def _priority(kinds: dict[int, RegionKind], tag: int) -> int:
    if tag == OUTER:
        return 3
    return 1 if kinds.get(tag) == RegionKind.H else 2


def _drop_loop(h: Diagram, x: int, kinds: dict[int, RegionKind]) -> None:
    """Delete a loop edge; corner words around it are merged so that the
    merged face still reads a product of conjugates of the old faces."""
    y = h.opp[x]
    if _priority(kinds, h.ftag[y]) > _priority(kinds, h.ftag[x]):
        x, y = y, x
    doomed = {x, y}
    updates = {}
    for s in h.around(h.origin[x]):
        if s in doomed or h.rinv[s] not in doomed:
            continue
        acc = h.corner.get(s, Word())
        z = h.rinv[s]
        while z in doomed:
            acc = h.corner.get(z, Word()) + Word((h.label[z],)) + acc
            z = h.rinv[z]
        updates[s] = acc
    h.delete_edge(x)
    for s, w in updates.items():
        if s in h.origin:
            h.corner[s] = w


def build_howie(cd: CoarseDiagram) -> HowieDiagram:
    t = cd.t
    h = cd.diagram.copy()
    h.corner = {}
    vmap = {v: v for v in h.vertices}
    anchors = {}
    for tag in cd.kinds:
        if cd.kinds[tag] == RegionKind.H:
            continue
        anchors[tag] = next(x for x in h.origin if h.ftag[x] == tag and _is_t(h, x, t))
    while True:
        x = next((x for x in h.edges() if not _is_t(h, x, t)), None)
        if x is None:
            break
        u, v = h.origin[x], h.head(x)
        if u == v:
            _drop_loop(h, x, cd.kinds)
            continue
        h.contract_edge(x)
        for w, img in vmap.items():
            if img == v:
                vmap[w] = u
    for x in h.origin:
        if h.origin[x] == h.head(x):
            raise QuotientError(f"contraction identifies the two ends of the t-edge of dart {x}")
    rmap: dict[int, int | None] = {tag: None for tag in cd.kinds}
    for tag, x in anchors.items():
        rmap[tag] = h.ftag[x]
    return HowieDiagram(cd, h, vmap, rmap)


HtSolver = Callable[[Word], object]


def ht_solver_for(g: LabeledGraph, t: str, caps=None) -> HtSolver:
    """Word problem of the parabolic subgroup on every generator except t."""
    from .solver import decide

    sub = subgraph(g, [v for v in g.vertices if v != t])
    return lambda w: decide(w, sub, caps).status


@dataclass
class HowieCheck:
    result: bool | None  # None when the solver could not decide a vertex
    words: dict[int, Word]
    failed: list[int]
    unknown: list[int]


def verify_howie(h: HowieDiagram | Diagram, ht_solver: HtSolver) -> HowieCheck:
    """Every inner vertex must read a trivial element of H_t."""
    if isinstance(h, Diagram):
        h = HowieDiagram(None, h, {}, {})
    words = h.vertex_words()
    failed, unknown = [], []
    for v in h.inner_vertices():
        w = free_reduce(words[v])
        if not w:
            continue
        st = ht_solver(w)
        st = getattr(st, "value", st)
        if st == "NONTRIVIAL":
            failed.append(v)
        elif st != "TRIVIAL":
            unknown.append(v)
    result = False if failed else (None if unknown else True)
    return HowieCheck(result, {v: words[v] for v in h.inner_vertices()}, failed, unknown)


# ----------------------------------------------------------------------
# tilde diagram


@dataclass
class TildeDiagram:
    howie: HowieDiagram
    diagram: Diagram
    dart_map: dict[int, int]  # Howie dart -> tilde dart

    def degree(self, f: int) -> int:
        return len(self.diagram.face_walk(f))


def _bigon(g: Diagram) -> list[int] | None:
    for f, walk in sorted(g.faces().items()):
        if f == OUTER or len(walk) != 2:
            continue
        x1, x2 = walk
        if x2 != g.opp[x1]:
            return walk
    return None


def build_tilde(h: HowieDiagram) -> TildeDiagram:
    g = h.diagram.copy()
    g.corner = {}
    dmap = {x: x for x in g.origin}
    while True:
        walk = _bigon(g)
        if walk is None:
            break
        x1, x2 = walk
        keep_fwd, keep_back = g.opp[x2], x2  # parallel to x1 and to opp(x1)
        gone = {x1: keep_fwd, g.opp[x1]: keep_back}
        g.delete_edge(g.opp[x1])
        for z, img in dmap.items():
            if img in gone:
                dmap[z] = gone[img]
    return TildeDiagram(h, g, dmap)


# ----------------------------------------------------------------------
# the composite map on 1-skeleta


@dataclass
class Psi:
    coarse: CoarseDiagram
    howie: HowieDiagram
    tilde: TildeDiagram
    vertex: dict[int, int]  # coarse vertex -> tilde vertex
    edge: dict[int, int]  # coarse t-dart -> tilde dart

    def vertex_pre(self, tv: int) -> set[int]:
        return {v for v, w in self.vertex.items() if w == tv}

    def edge_pre(self, td: int) -> set[int]:
        return {x for x, y in self.edge.items() if y == td}

    def region_map(self) -> dict[int, int | None]:
        """Coarse region -> tilde region (None when it vanished)."""
        g = self.tilde.diagram
        out: dict[int, int | None] = {}
        for tag, htag in self.howie.region_map.items():
            out[tag] = None
            if htag is None or self.coarse.kinds[tag] != RegionKind.BIG:
                continue
            x = next(x for x in self.howie.diagram.origin if self.howie.diagram.ftag[x] == htag)
            img = self.tilde.dart_map[x]
            out[tag] = g.ftag[img] if g.ftag[img] != OUTER else None
        return out


def psi_t(d: Diagram, t: str, presentation=None) -> Psi:
    cd = build_coarse(d, t, presentation)
    hd = build_howie(cd)
    td = build_tilde(hd)
    c = cd.diagram
    edge = {x: td.dart_map[x] for x in c.origin if _is_t(c, x, t)}
    return Psi(cd, hd, td, dict(hd.vertex_map), edge)


def h_classes(d: Diagram, t: str) -> dict[int, set[int]]:
    """Vertex -> its class under connection by edges not labelled t."""
    uf = _UF()
    for x in d.origin:
        if not _is_t(d, x, t):
            uf.union(d.origin[x], d.head(x))
    groups = uf.groups(sorted(d.vertices))
    return {v: set(groups[uf.find(v)]) for v in d.vertices}


def lemma_checks(p: Psi) -> list[str]:
    """Failures of the preimage identities of the composite map."""
    c, t = p.coarse.diagram, p.coarse.t
    hc = h_classes(c, t)
    bad = []
    for x, img in sorted(p.edge.items()):
        if x > c.opp[x]:
            continue
        pre = p.edge_pre(img) | p.edge_pre(p.tilde.diagram.opp[img])
        band = [f for f in (c.ftag[x], c.ftag[c.opp[x]]) if p.coarse.kinds.get(f) == RegionKind.BAND]
        if band:
            want = {z for f in band for z in c.face_walk(f) if _is_t(c, z, t)}
            want |= {c.opp[z] for z in want}
            if pre != want:
                bad.append(f"t-edge {x}: preimage {sorted(pre)} is not the pole set {sorted(want)}")
            verts = {w for z in want for w in hc[c.origin[z]]}
            got = {w for z in pre for w in (p.vertex_pre(p.vertex[c.origin[z]]))}
            if got != verts:
                bad.append(f"t-edge {x}: vertex preimage differs from the band classes")
        elif pre != {x, c.opp[x]}:
            bad.append(f"t-edge {x}: preimage {sorted(pre)} is not the edge itself")
        for z in (x, c.opp[x]):
            tz = p.edge[z]
            g = p.tilde.diagram
            if p.vertex[c.origin[z]] != g.origin[tz] or p.vertex[c.head(z)] != g.head(tz):
                bad.append(f"t-dart {z}: endpoints do not commute with the map")
    for v in sorted(c.vertices):
        if p.vertex_pre(p.vertex[v]) != hc[v]:
            bad.append(f"vertex {v}: preimage is not its H_t class")
    for tv in sorted(p.tilde.diagram.vertices):
        back = {p.vertex[v] for v in p.vertex_pre(tv)}
        if back != {tv}:
            bad.append(f"tilde vertex {tv}: image of its preimage is {sorted(back)}")
    return bad


@dataclass
class CountCheck:
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def as_tuple(self) -> tuple[int, int, bool]:
        return self.lhs, self.rhs, self.equal


def count_check(d: Diagram, t: str, presentation=None) -> CountCheck:
    p = psi_t(d, t, presentation)
    return CountCheck(len(p.coarse.reg4plus), p.tilde.diagram.area())


# ----------------------------------------------------------------------
# constructed inputs


def octagon(a: str = "a", t: str = "t", m: int = 4) -> Diagram:
    from .presentation import artin_relator

    return Diagram.single_face(artin_relator(a, t, m))


def two_octagons_with_band(length: int = 2, a: str = "a", t: str = "t", c: str = "c") -> Diagram:
    """Two octagons over {a, t} joined by a t-band of commutators [t, c]."""
    A, T, C = (a, 1), (t, 1), (c, 1)
    ia, it, ic = (a, -1), (t, -1), (c, -1)
    # lower octagon reads a t a t a^-1 t^-1 a^-1 t^-1 from vertex 0; its
    # edge 1 -> 2 (t) is the lower pole of the band
    lo = list(range(8))
    lo_word = [A, T, A, T, ia, it, ia, it]
    faces = [(lo, lo_word)]
    left, right = 1, 2
    nxt = 8
    for _ in range(length):
        nl, nr = nxt, nxt + 1
        nxt += 2
        # square over the t-edge left -> right: reads t^-1 c t c^-1 ... from right
        faces.append(([right, left, nl, nr], [it, C, T, ic]))
        left, right = nl, nr
    # upper octagon uses the top edge right -> left as t^-1
    up = [right, left] + list(range(nxt, nxt + 6))
    faces.append((up, [it, ia, it, ia, T, A, T, A]))
    return Diagram.from_faces(faces)


def two_friendly_octagons(a: str = "a", t: str = "t") -> Diagram:
    A, T = (a, 1), (t, 1)
    ia, it = (a, -1), (t, -1)
    word = [A, T, A, T, ia, it, ia, it]
    # second copy glued along letter 0 of the first against letter 4 of itself
    return Diagram.from_faces([
        (list(range(8)), word),
        ([8, 9, 10, 11, 1, 0, 12, 13], word),
    ])


def howie_square_example() -> Diagram:
    """Four length-6 regions around a commutator of a and b, each region
    reading g t g t^-1 g^-1 t^-1 up to rotation for g in {a, b}."""
    a, b, t = ("a", 1), ("b", 1), ("t", 1)
    ia, ib, it = ("a", -1), ("b", -1), ("t", -1)
    C = [0, 1, 2, 3]
    U = [4, 5, 6, 7]
    X = [8, 9, 10, 11]
    Y = [12, 13, 14, 15]
    forms = {
        a: [a, t, a, it, ia, it],
        b: [b, t, b, it, ib, it],
        ia: [ia, t, a, t, ia, it],
        ib: [ib, t, b, t, ib, it],
    }
    faces = []
    for i, g in enumerate((a, b, ia, ib)):
        j = (i + 1) % 4
        faces.append(([C[i], C[j], U[j], X[i], Y[i], U[i]], forms[g]))
    faces.append(([C[1], C[0], C[3], C[2]], [ia, b, a, ib]))
    return Diagram.from_faces(faces)


def howie_from_faces(faces: list[tuple[list[int], list, list[Word]]]) -> Diagram:
    """Howie map from (vertices, t-letters, corner words) per face; corner
    j is read just before letter j."""
    h = Diagram.from_faces([(vs, ls) for vs, ls, _ in faces])
    pos = 0
    for vs, _, corners in faces:
        for j, c in enumerate(corners):
            if c:
                h.corner[pos + j] = c
        pos += len(vs)
    return h


def commutator_howie_example(centre: Word | None = None) -> Diagram:
    """Four triangles of t-edges around a vertex whose corner word is
    a b a^-1 b^-1 (or ``centre`` in place of the first corner a)."""
    t, it = ("t", 1), ("t", -1)
    a, b = Word.parse("a"), Word.parse("b")
    U = [1, 2, 3, 4]
    specs = [(a, [t, it, it], [a, a.inverse()]),
             (b, [t, it, it], [b, b.inverse()]),
             (a.inverse(), [t, t, it], [a, a.inverse()]),
             (b.inverse(), [t, t, it], [b, b.inverse()])]
    faces = []
    for i, (h1, letters, (h2, h3)) in enumerate(specs):
        if i == 0 and centre is not None:
            h1 = centre
        faces.append(([0, U[(i + 1) % 4], U[i]], letters, [h1, h2, h3]))
    return howie_from_faces(faces)


def octagon_chain(
    big: list[tuple[str, int]],
    bands: list[list[str]],
    flaps: list[tuple[int, str]] = (),
    t: str = "t",
) -> Diagram:
    """Regions R(g_i, t) stacked upwards, consecutive ones joined by a t-band
    whose squares read [t, c] for the listed side generators c (an empty
    band glues the two regions along a t-edge).  A flap (i, c) glues a
    commutator square [g_i, c] on a free edge of region i."""
    from .presentation import artin_relator

    if len(bands) != len(big) - 1:
        raise ValueError("need one band between consecutive regions")
    T, iT = (t, 1), (t, -1)
    faces = []
    counter = iter(range(10**9))
    used: list[set[int]] = []
    rel_verts: list[list[int]] = []
    left = right = None
    for i, (g, m) in enumerate(big):
        word = list(artin_relator(g, t, m).letters)
        n = len(word)
        up = [j for j, x in enumerate(word) if x == T]
        down = [j for j, x in enumerate(word) if x == iT]
        verts = [None] * n
        if left is not None:
            j = down[0]
            verts[j], verts[(j + 1) % n] = right, left
        verts = [v if v is not None else next(counter) for v in verts]
        faces.append((verts, word))
        rel_verts.append(verts)
        mark = set()
        if left is not None:
            mark |= {verts[down[0]], verts[(down[0] + 1) % n]}
        if i < len(bands):
            j = up[0]
            left, right = verts[j], verts[(j + 1) % n]
            mark |= {left, right}
            for c in bands[i]:
                nl, nr = next(counter), next(counter)
                faces.append(([right, left, nl, nr], [iT, (c, 1), T, (c, -1)]))
                left, right = nl, nr
        used.append(mark)
    for i, c in flaps:
        verts, word = faces[[k for k, f in enumerate(faces) if f[0] is rel_verts[i]][0]]
        n = len(word)
        for j in range(n):
            if word[j][0] == t:
                continue
            u, v = verts[j], verts[(j + 1) % n]
            if u in used[i] or v in used[i]:
                continue
            x, y = next(counter), next(counter)
            ell = word[j]
            faces.append(([v, u, x, y], [(ell[0], -ell[1]), (c, 1), ell, (c, -1)]))
            used[i] |= {u, v}
            break
    return Diagram.from_faces(faces)


def chain_graph(big: list[tuple[str, int]], sides: str = "cd", t: str = "t") -> LabeledGraph:
    gens = sorted({g for g, _ in big} | set(sides) | {t})
    edges = {(min(g, t), max(g, t)): m for g, m in big}
    for c in sides:
        edges[(min(c, t), max(c, t))] = 2
        for g, _ in big:
            edges[(min(g, c), max(g, c))] = 2
    return LabeledGraph.build(gens, [(a, b, m) for (a, b), m in sorted(edges.items())])


def random_chain(rng, max_regions: int = 4, t: str = "t") -> tuple[Diagram, LabeledGraph]:
    """Random octagon chain over generators a, b (labels drawn once per
    generator from {4, 5, 6}) with bands over c, d and a few flaps."""
    labels = {g: rng.choice((4, 5, 6)) for g in "ab"}
    k = rng.randint(1, max_regions)
    big = [(g, labels[g]) for g in (rng.choice("ab") for _ in range(k))]
    bands = [[rng.choice("cd") for _ in range(rng.randint(0, 3))] for _ in range(k - 1)]
    flaps = [(rng.randrange(k), rng.choice("cd")) for _ in range(rng.randint(0, 2))]
    return octagon_chain(big, bands, flaps, t), chain_graph(big, "cd", t)
