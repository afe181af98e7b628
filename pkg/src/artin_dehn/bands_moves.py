"""Bands, coarse equivalence classes and the surgeries that preserve the
boundary label: diamond moves, prism I-moves, region transfer, push-up."""

from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Sequence

from .diagram import (
    OUTER,
    PLANAR,
    SPHERICAL,
    Diagram,
    DiagramError,
    boundary_darts,
    classify_regions,
    face_n,
)
from .presentation import GraphError, LabeledGraph, artin_relator
from .words import Letter, Word, cyclic_reduce, free_reduce, inv, is_cyclically_reduced


class MoveError(DiagramError):
    pass


class MoveKind(str, Enum):
    DIAMOND = "DIAMOND"
    IMOVE = "IMOVE"
    EXTENDED_IMOVE = "EXTENDED_IMOVE"
    TRANSFER = "TRANSFER"
    PUSH_UP = "PUSH_UP"


# ----------------------------------------------------------------------
# statistics and records


@dataclass
class DiagramStats:
    area: int
    reg2: int
    reg4plus: int
    classes4: int
    boundary: str

    @classmethod
    def of(cls, d: Diagram, presentation=None) -> "DiagramStats":
        cls_ = classify_regions(d, presentation)
        classes = equivalence_classes(d)
        c4 = sum(1 for c in classes if c.faces[0] in cls_.reg4plus)
        return cls(d.area(), len(cls_.reg2), len(cls_.reg4plus), c4, str(reduced_boundary(d)))


@dataclass
class MoveRecord:
    kind: MoveKind
    location: dict
    before: DiagramStats
    after: DiagramStats

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MoveRecord":
        return cls(MoveKind(data["kind"]), data["location"], DiagramStats(**data["before"]), DiagramStats(**data["after"]))


def reduced_boundary(d: Diagram) -> Word:
    """Cyclically reduced form of the boundary label."""
    return cyclic_reduce(d.boundary_word())[0]


def same_cyclic_word(u: Word, v: Word) -> bool:
    u, v = cyclic_reduce(u)[0], cyclic_reduce(v)[0]
    if len(u) != len(v):
        return False
    if not u:
        return True
    doubled = u.letters + u.letters
    n = len(v)
    return any(doubled[i:i + n] == v.letters for i in range(len(u)))


def _check_boundary(before: Word, after: Diagram) -> None:
    if not same_cyclic_word(before, after.boundary_word()):
        raise MoveError("surgery changed the cyclically reduced boundary label")


# ----------------------------------------------------------------------
# assembling maps from faces


def assemble(
    faces: Sequence[tuple[Sequence[int], Sequence[Letter], Sequence]],
    kind: str = PLANAR,
    tags: Sequence[int] | None = None,
) -> Diagram:
    """Build a map from faces given as (vertices, letters, edge keys).

    Darts carrying the same edge key are glued; keys used once face the
    outer region.  Face i gets tag tags[i] (default i + 1)."""
    by_key: dict = {}
    for i, (verts, letters, keys) in enumerate(faces):
        if not (len(verts) == len(letters) == len(keys)):
            raise MoveError("face data of unequal lengths")
        for j, k in enumerate(keys):
            by_key.setdefault(k, []).append((i, j))
    pairs = {}
    for k, occ in by_key.items():
        if len(occ) > 2:
            raise MoveError(f"edge {k} used {len(occ)} times")
        if len(occ) == 2:
            pairs[occ[0]] = occ[1]
            pairs[occ[1]] = occ[0]
    d = Diagram.from_faces([(list(v), list(l)) for v, l, _ in faces], kind, pairs)
    if tags is not None:
        remap = {i + 1: t for i, t in enumerate(tags)}
        for x, t in d.ftag.items():
            if t != OUTER:
                d.ftag[x] = remap[t]
        d._face = max(tags, default=0) + 1
    d._vertex = max(d.vertices, default=-1) + 1
    return d


def _edge_key(d: Diagram, x: int):
    return ("d", min(x, d.opp[x]))


def face_data(d: Diagram, f: int) -> tuple[list[int], list[Letter], list]:
    walk = d.face_walk(f)
    return [d.origin[x] for x in walk], [d.label[x] for x in walk], [_edge_key(d, x) for x in walk]


def has_spines(d: Diagram) -> bool:
    return any(d.ftag[x] == OUTER and d.ftag[d.opp[x]] == OUTER for x in d.origin)


def submap(d: Diagram, faces: Iterable[int]) -> Diagram:
    """The planar map made of the given faces, keeping vertex ids and tags."""
    faces = sorted(set(faces))
    return assemble([face_data(d, f) for f in faces], PLANAR, faces)


def is_disc(d: Diagram, faces: Iterable[int]) -> bool:
    """Edge-connected union of regions that is a disc with simple boundary."""
    faces = set(faces)
    if not faces:
        return False
    start = min(faces)
    seen = {start}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in d.neighbours(f):
            if g in faces and g not in seen:
                seen.add(g)
                stack.append(g)
    if seen != faces:
        return False
    vs, es = set(), set()
    out_count: dict[int, int] = {}
    for f in faces:
        for x in d.face_walk(f):
            vs.add(d.origin[x])
            es.add(min(x, d.opp[x]))
            if d.ftag[d.opp[x]] not in faces:
                out_count[d.origin[x]] = out_count.get(d.origin[x], 0) + 1
    if len(vs) - len(es) + len(faces) != 1:
        return False
    return all(k == 1 for k in out_count.values())


# ----------------------------------------------------------------------
# equivalence classes


@dataclass
class EquivalenceClass:
    faces: list[int]
    support: frozenset
    disc: bool


def equivalence_classes(d: Diagram) -> list[EquivalenceClass]:
    """Transitive closure of: sharing an edge and having equal support."""
    faces = d.inner_faces()
    supp = {f: d.face_word(f).support() for f in faces}
    parent = {f: f for f in faces}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for f in faces:
        for g in d.inner_neighbours(f):
            if supp[f] == supp[g]:
                parent[find(f)] = find(g)
    groups: dict[int, list[int]] = {}
    for f in faces:
        groups.setdefault(find(f), []).append(f)
    out = [EquivalenceClass(sorted(g), supp[g[0]], is_disc(d, g)) for g in groups.values()]
    out.sort(key=lambda c: c.faces[0])
    return out


# ----------------------------------------------------------------------
# bands


@dataclass
class Band:
    generator: str
    regions: list[int]
    poles: tuple[int, int]  # entering dart of the first region, exit dart of the last
    sides: tuple[list[int], list[int]]
    closed: bool = False

    def __len__(self) -> int:
        return len(self.regions)


def _square_walk(d: Diagram, entry: int) -> list[int]:
    return d.face_walk(d.ftag[entry], entry)


def _reg2_faces(d: Diagram, presentation=None) -> set[int]:
    return {f for f in d.inner_faces() if len(d.face_walk(f)) == 4 and face_n(d, f, presentation) == 2}


def extract_bands(d: Diagram, presentation=None) -> list[Band]:
    """All a-bands for every generator a.  A commutator square lies in two
    bands, one for each generator of its support."""
    reg2 = _reg2_faces(d, presentation)
    bands = []
    for gen in sorted({g for f in reg2 for g in d.face_word(f).support()}):
        pool = {f for f in reg2 if gen in d.face_word(f).support()}
        seen: set[int] = set()
        for f in sorted(pool):
            if f in seen:
                continue
            walk = d.face_walk(f)
            entry = next(x for x in walk if d.label[x][0] == gen)
            bands.append(_trace_band(d, entry, gen, pool, seen))
    return bands


def _trace_band(d: Diagram, entry: int, gen: str, pool: set[int], seen: set[int]) -> Band:
    start = d.ftag[entry]
    # walk backwards first to find the true start of the band
    x = entry
    closed = False
    visited = {start}
    while True:
        back = d.opp[x]
        g = d.ftag[back]
        if g not in pool or g in visited:
            closed = g == start and g in pool
            break
        visited.add(g)
        x = _square_walk(d, back)[2]
    first = x if not closed else entry
    regions, side1, side2 = [], [], []
    x = first
    while True:
        w = _square_walk(d, x)
        f = d.ftag[x]
        regions.append(f)
        seen.add(f)
        side1.append(w[1])
        side2.append(w[3])
        out = w[2]
        nxt = d.opp[out]
        g = d.ftag[nxt]
        if g not in pool or g in regions:
            return Band(gen, regions, (first, out), (side1, side2), closed)
        x = nxt


def band_bundle(d: Diagram, bands: Sequence[Band]) -> "BandBundle":
    """Check that consecutive bands share a full side and bundle them."""
    for b1, b2 in zip(bands, bands[1:]):
        if len(b1) != len(b2):
            raise MoveError("bundled bands must have equal length")
        e1 = [{min(x, d.opp[x]) for x in s} for s in b1.sides]
        e2 = [{min(x, d.opp[x]) for x in s} for s in b2.sides]
        if not any(a == b for a in e1 for b in e2):
            raise MoveError("bands are not homogeneous adjacent")
    return BandBundle(list(bands), len(bands), len(bands[0]) if bands else 0)


@dataclass
class BandBundle:
    bands: list[Band]
    width: int
    height: int


def band_adequate(b: Band, d: Diagram) -> bool:
    """Simply connected one-layer band with simple boundary and cyclically
    reduced boundary label."""
    from .analysis import one_layer_decompose

    if b.closed or len(set(b.regions)) != len(b.regions):
        return False
    if not is_disc(d, b.regions):
        return False
    sub = submap(d, b.regions)
    walk = sub.outer_walk()
    if len({sub.origin[x] for x in walk}) != len(walk):
        return False
    if not is_cyclically_reduced(sub.boundary_word()):
        return False
    return one_layer_decompose(sub) is not None


def str_adequate(d: Diagram, bands: list[Band] | None = None) -> bool:
    bands = extract_bands(d) if bands is None else bands
    if not all(band_adequate(b, d) for b in bands):
        return False
    for b1, b2 in itertools.combinations(bands, 2):
        if len(set(b1.regions) & set(b2.regions)) > 1:
            return False
    return True


# ----------------------------------------------------------------------
# B-connectivity


@dataclass
class BConnectivity:
    targets: dict  # dart of the region boundary -> ("boundary", pos) | ("region", face) | ("none",)
    cap_boundary: list[int]
    i_B: int


def b_connectivity(d: Diagram, delta, presentation=None) -> BConnectivity:
    faces = {delta} if isinstance(delta, int) else set(delta)
    reg2 = _reg2_faces(d, presentation)
    bpos = {x: i for i, x in enumerate(boundary_darts(d))}
    targets = {}
    for f in sorted(faces):
        for x in d.face_walk(f):
            y = d.opp[x]
            if d.ftag[y] in faces:
                continue
            targets[x] = _follow(d, x, reg2, faces, bpos)
    cap = [x for x, t in targets.items() if t[0] == "boundary"]
    neighbours = {t[1] for x, t in targets.items() if t[0] == "region"}
    return BConnectivity(targets, cap, len(neighbours))


def _follow(d: Diagram, x: int, reg2: set[int], faces: set[int], bpos: dict):
    seen = set()
    while True:
        if x in bpos:
            return ("boundary", bpos[x])
        y = d.opp[x]
        g = d.ftag[y]
        if g in faces or g not in reg2:
            return ("region", g)
        if g in seen:
            return ("none",)
        seen.add(g)
        x = _square_walk(d, y)[2]


# ----------------------------------------------------------------------
# diamond moves


def cancelling_corners(d: Diagram) -> list[int]:
    """Outer darts a whose successor on the boundary cancels with a; the
    shared vertex is head(a)."""
    out = []
    for a in d.outer_walk():
        b = d.phi(a)
        if b != a and d.label[b] == inv(d.label[a]):
            out.append(a)
    return out


def diamond_move(d: Diagram, v: int, corner: int | None = None, length: int | None = None, presentation=None) -> tuple[Diagram, MoveRecord]:
    """Split v and identify u with w along a cancelling boundary path
    u alpha v beta w.  alpha is zipped against beta up to ``length`` letters
    (default: as far as the labels cancel)."""
    corners = [a for a in cancelling_corners(d) if d.head(a) == v]
    if corner is not None:
        if corner not in corners:
            raise MoveError(f"no cancellation at the given corner of vertex {v}")
        corners = [corner]
    if not corners:
        raise MoveError(f"no boundary cancellation at vertex {v}")
    before = DiagramStats.of(d, presentation)
    w0 = d.boundary_word()
    new = d.copy()
    a = corners[0]
    done = 0
    while length is None or done < length:
        if a not in new.origin or new.ftag.get(a) != OUTER:
            break
        b = new.phi(a)
        if b == a or new.label[b] != inv(new.label[a]):
            break
        pa = new.phi_inv(a)
        if b == new.opp[a]:
            new.prune_leaf(a)
        else:
            x1 = new.opp[a]
            if new.head(x1) == new.head(b) or new.head(x1) == new.origin[x1]:
                break  # u and w already coincide: nothing left to identify
            new.fold(x1, b)
        done += 1
        if pa in (a, b) or pa not in new.origin:
            break
        a = pa
    if done == 0:
        raise MoveError(f"diamond move at {v} is not applicable")
    _check_boundary(w0, new)
    rec = MoveRecord(MoveKind.DIAMOND, {"vertex": v, "letters": 2 * done}, before, DiagramStats.of(new, presentation))
    return new, rec


def cyclically_reduce_by_diamonds(d: Diagram, presentation=None, rng: random.Random | None = None) -> tuple[Diagram, list[MoveRecord]]:
    recs = []
    while True:
        corners = cancelling_corners(d)
        if not corners:
            return d, recs
        a = rng.choice(corners) if rng else corners[0]
        try:
            d, rec = diamond_move(d, d.head(a), a, presentation=presentation)
        except MoveError:
            return d, recs
        recs.append(rec)


# ----------------------------------------------------------------------
# prisms and identity sequences


@dataclass
class Prism:
    triple: tuple | None
    m: int
    sphere: Diagram
    big: tuple[int, ...]
    belt: list[int]
    belt_generator: str


def prism_over(base: Diagram, t: str) -> Prism:
    """Sphere made of a copy of a planar disc, its mirror image and a belt
    of commutator squares [x, t] along the boundary."""
    if has_spines(base) or not base.inner_faces():
        raise MoveError("prism base must be a disc without spines")
    off = max(base.vertices) + 1
    faces, tags = [], []
    top = base.inner_faces()
    for f in top:
        vs, ls, ks = face_data(base, f)
        faces.append((vs, ls, [("top", k) for k in ks]))
        tags.append(len(tags) + 1)
    for f in top:
        walk = list(reversed(base.face_walk(f)))
        faces.append((
            [base.head(x) + off for x in walk],
            [inv(base.label[x]) for x in walk],
            [("bot", _edge_key(base, x)) for x in walk],
        ))
        tags.append(len(tags) + 1)
    belt = []
    for x in boundary_darts(base):
        u, v = base.origin[x], base.head(x)
        ell = base.label[x]
        faces.append((
            [v, u, u + off, v + off],
            [inv(ell), (t, 1), ell, (t, -1)],
            [("top", _edge_key(base, x)), ("vert", u), ("bot", _edge_key(base, x)), ("vert", v)],
        ))
        tags.append(len(tags) + 1)
        belt.append(tags[-1])
    sphere = assemble(faces, SPHERICAL, tags)
    big = tuple(i + 1 for i in range(2 * len(top)))
    return Prism(None, len(boundary_darts(base)) // 2, sphere, big, belt, t)


def make_prism(g: LabeledGraph, i: str, j: str, k: str, allow_cube: bool = False) -> Prism:
    lij, ljk, lik = g.label(i, j), g.label(j, k), g.label(i, k)
    if lij != 2 or ljk != 2:
        raise GraphError(f"prism needs labels 2 on {i}-{j} and {j}-{k}, got {lij} and {ljk}")
    if lik < 4 and not (allow_cube and lik == 2):
        raise GraphError(f"prism needs a label >= 4 on {i}-{k}, got {lik}")
    p = prism_over(Diagram.single_face(artin_relator(i, k, lik)), j)
    p.triple = (i, j, k)
    p.m = lik
    return p


def mirror(d: Diagram) -> Diagram:
    """Orientation-reversed copy: faces read the inverse words."""
    new = d.copy()
    new.rot, new.rinv = dict(d.rinv), dict(d.rot)
    new.ftag = {x: d.ftag[d.opp[x]] for x in d.origin}
    return new


def identity_sequence_check(d: Diagram, basepoint: int | None = None) -> bool:
    """Peel the faces of a sphere one at a time from a closed path around the
    first face, collecting conjugated face boundaries.  The sphere realizes an
    identity sequence when the product of the collected labels is freely
    trivial and the leftover path is freely trivial in the 1-skeleton."""
    if not d.origin:
        return True
    faces = d.faces()
    if OUTER in faces:
        return False
    if d.euler() != 2:
        return False
    f0 = d.ftag[basepoint] if basepoint is not None else min(faces)
    start = basepoint if basepoint is not None else faces[f0][0]
    path = list(d.face_walk(f0, start))
    product = [d.label[x] for x in path]
    peeled = {f0}
    factors: list[list[Letter]] = []
    while len(peeled) < len(faces):
        for idx, x in enumerate(path):
            f = d.ftag[d.opp[x]]
            if f not in peeled:
                break
        else:
            return False
        y = d.opp[x]
        walk = d.face_walk(f, y)  # y, z1, ..., zk
        rest = walk[1:]
        prefix = path[:idx]
        # x = C^-1 z1..zk with C = z1..zk y read from head(y)
        c_word = [d.label[z] for z in rest] + [d.label[y]]
        p_word = [d.label[z] for z in prefix]
        factors.append(p_word + [inv(l) for l in reversed(c_word)] + [inv(l) for l in reversed(p_word)])
        path = _reduce_path(d, prefix + rest + path[idx + 1:])
        peeled.add(f)
    if path:
        return False
    total: list[Letter] = []
    for fac in factors:
        total += fac
    return not free_reduce(Word(tuple(product)).inverse().letters + tuple(total))


def _reduce_path(d: Diagram, path: list[int]) -> list[int]:
    out: list[int] = []
    for x in path:
        if out and out[-1] == d.opp[x]:
            out.pop()
        else:
            out.append(x)
    return out


# ----------------------------------------------------------------------
# I-moves


@dataclass
class Embedding:
    darts: dict
    vertices: dict
    faces: dict
    sphere: Diagram


def find_embedding(d: Diagram, faces: Iterable[int], sphere: Diagram, presentation=None, max_reg4: bool = True) -> Embedding | None:
    """Anchored backtracking from the smallest submap face; both
    orientations of the sphere are tried."""
    faces = sorted(set(faces))
    for s in (sphere, mirror(sphere)):
        for emb in _embeddings(d, faces, s):
            if not max_reg4:
                return emb
            image = set(emb.faces.values())
            rest = [f for f in s.inner_faces() if f not in image]
            if not rest:
                continue
            big_in = sum(1 for f in faces if face_n(d, f, presentation) >= 4)
            big_out = sum(1 for f in rest if face_n(s, f) >= 4)
            if big_out <= big_in:
                return emb
    return None


def _embeddings(d: Diagram, faces: list[int], s: Diagram):
    f0 = faces[0]
    walk0 = d.face_walk(f0)
    word0 = [d.label[x] for x in walk0]
    fset = set(faces)
    for y0 in sorted(s.origin):
        wy = s.face_walk(s.ftag[y0], y0)
        if [s.label[z] for z in wy] != word0:
            continue
        emb = _propagate(d, fset, s, walk0[0], y0)
        if emb is not None:
            yield emb


def _propagate(d: Diagram, fset: set[int], s: Diagram, x0: int, y0: int) -> Embedding | None:
    dm: dict[int, int] = {}
    vm: dict[int, int] = {}
    vinv: dict[int, int] = {}
    fm: dict[int, int] = {}
    queue = deque([(x0, y0)])
    while queue:
        x, y = queue.popleft()
        f, g = d.ftag[x], s.ftag[y]
        if f in fm:
            if fm[f] != g or dm.get(x) != y:
                return None
            continue
        if g in fm.values():
            return None
        wx, wy = d.face_walk(f, x), s.face_walk(g, y)
        if len(wx) != len(wy) or any(d.label[a] != s.label[b] for a, b in zip(wx, wy)):
            return None
        fm[f] = g
        for a, b in zip(wx, wy):
            dm[a] = b
            u, p = d.origin[a], s.origin[b]
            if vm.get(u, p) != p or vinv.get(p, u) != u:
                return None
            vm[u] = p
            vinv[p] = u
        for a, b in zip(wx, wy):
            oa = d.opp[a]
            if d.ftag[oa] in fset:
                queue.append((oa, s.opp[b]))
    return Embedding(dm, vm, fm, s)


def i_move(
    d: Diagram,
    faces: Iterable[int],
    prism: Prism | Diagram,
    presentation=None,
    embedding: Embedding | None = None,
    kind: MoveKind = MoveKind.IMOVE,
) -> tuple[Diagram, MoveRecord, dict]:
    """Cut out the submap and glue in the rest of the sphere.

    Returns the new diagram, the move record and a map from sphere faces of
    the inserted part to their new tags."""
    sphere = prism.sphere if isinstance(prism, Prism) else prism
    faces = sorted(set(faces))
    if has_spines(d):
        raise MoveError("diagram has spine edges; prune them first")
    if not is_disc(d, faces):
        raise MoveError("submap is not a disc with simple boundary")
    emb = embedding or find_embedding(d, faces, sphere, presentation)
    if emb is None:
        raise MoveError("no valid embedding of the submap into the sphere")
    s = emb.sphere
    image = set(emb.faces.values())
    rest = [f for f in s.inner_faces() if f not in image]
    before = DiagramStats.of(d, presentation)
    w0 = d.boundary_word()
    dinv = {b: a for a, b in emb.darts.items()}
    vinv = {p: u for u, p in emb.vertices.items()}
    fresh = itertools.count(max(d.vertices) + 1)
    newv: dict[int, int] = {}

    def vert(p):
        if p in vinv:
            return vinv[p]
        if p not in newv:
            newv[p] = next(fresh)
        return newv[p]

    def key(z):
        oz = s.opp[z]
        if s.ftag[oz] in image:
            a = dinv[oz]
            return _edge_key(d, a)
        return ("s", min(z, oz))

    data, tags = [], []
    gone = set(faces)
    for f in d.inner_faces():
        if f not in gone:
            data.append(face_data(d, f))
            tags.append(f)
    nxt = d._face
    inserted = {}
    for g in rest:
        walk = list(reversed(s.face_walk(g)))
        data.append(([vert(s.head(z)) for z in walk], [inv(s.label[z]) for z in walk], [key(z) for z in walk]))
        inserted[g] = nxt
        tags.append(nxt)
        nxt += 1
    new = assemble(data, PLANAR, tags)
    _check_boundary(w0, new)
    rec = MoveRecord(kind, {"faces": faces, "inserted": sorted(inserted.values())}, before, DiagramStats.of(new, presentation))
    return new, rec, inserted


# ----------------------------------------------------------------------
# transfer and push-up


def _component_without(d: Diagram, start: int, removed: set[int]) -> set[int]:
    comp = {start}
    stack = [start]
    while stack:
        f = stack.pop()
        for g in d.inner_neighbours(f):
            if g not in removed and g not in comp:
                comp.add(g)
                stack.append(g)
    return comp


def _contact_block(d: Diagram, region: set[int], band: Band) -> list[int]:
    """Band squares sharing a side edge with the region, as a contiguous block."""
    side_edges = {min(x, d.opp[x]) for s in band.sides for x in s}
    touching = []
    for i, f in enumerate(band.regions):
        for x in d.face_walk(f):
            if d.ftag[d.opp[x]] in region:
                if min(x, d.opp[x]) not in side_edges:
                    raise MoveError("region meets the band at a pole")
                touching.append(i)
                break
    if not touching:
        raise MoveError("region does not touch the band")
    if touching != list(range(touching[0], touching[-1] + 1)):
        raise MoveError("band contact is not contiguous")
    return [band.regions[i] for i in touching]


def _contact_connected(d: Diagram, region: set[int], block: set[int]) -> bool:
    bd = []
    for f in sorted(region):
        for x in d.face_walk(f):
            if d.ftag[d.opp[x]] not in region:
                bd.append(x)
    # order the boundary of the region as a cycle and count arcs on the block
    nxt = {}
    for x in bd:
        y = x
        while True:
            y = d.phi(y)
            if y in bd or d.ftag[y] not in region:
                break
            y = d.opp[y]
        nxt[x] = y
    start = bd[0]
    cyc = [start]
    while nxt.get(cyc[-1], start) != start and len(cyc) <= len(bd):
        cyc.append(nxt[cyc[-1]])
    if len(cyc) != len(bd):
        cyc = bd
    flags = [d.ftag[d.opp[x]] in block for x in cyc]
    if all(flags):
        return True
    return sum(1 for i in range(len(flags)) if flags[i] and not flags[i - 1]) == 1


def transfer_region(d: Diagram, D: int, band: Band, m0: set[int] | None = None, presentation=None) -> tuple[Diagram, MoveRecord]:
    """Move D across the part of the band it touches (one I-move)."""
    new, rec, _ = _cross(d, {D}, band, m0, presentation, MoveKind.TRANSFER)
    return new, rec


def extended_i_move(d: Diagram, delta: Iterable[int], band: Band, presentation=None) -> tuple[Diagram, MoveRecord, list[int]]:
    """Move a coarse region across a band in one sweep; the new copy of the
    region is returned as the third component."""
    return _cross(d, set(delta), band, None, presentation, MoveKind.EXTENDED_IMOVE)


def _cross(d, region: set[int], band: Band, m0, presentation, kind):
    if band.closed:
        raise MoveError("closed bands are not used for transfers")
    if any(f in region for f in band.regions):
        raise MoveError("region lies on the band")
    block = _contact_block(d, region, band)
    if not _contact_connected(d, region, set(block)):
        raise MoveError("region meets the band in a disconnected set")
    if m0 is None:
        m0 = _component_without(d, min(region), set(band.regions))
    if not region <= m0:
        raise MoveError("region is not in the banded submap")
    prism = prism_over(submap(d, region), band.generator)
    new, rec, inserted = i_move(d, sorted(region | set(block)), prism, presentation, kind=kind)
    copies = [inserted[g] for g in prism.big if g in inserted]
    rec.location.update({
        "region": sorted(region),
        "band": band.generator,
        "subband": block,
        "m0_before": len(m0),
        "m0_after": len(m0 - region),
        "copy": copies,
    })
    return new, rec, copies


def push_up(d: Diagram, delta: Iterable[int], bundle: BandBundle, presentation=None) -> tuple[Diagram, MoveRecord]:
    """Relocate a region across the rows of a band-bundle emanating from it.

    Row r consists of the r-th squares (counted from the region) of every
    band; each row is a piece of a crossing band, and the region crosses it
    by one extended I-move."""
    region = set(delta)
    bands = []
    for b in bundle.bands:
        ends = [d.ftag[d.opp[b.poles[0]]], d.ftag[d.opp[b.poles[1]]]]
        if ends[0] in region:
            bands.append(list(b.regions))
        elif ends[1] in region:
            bands.append(list(reversed(b.regions)))
        else:
            raise MoveError("bundle band does not emanate from the region")
    before = DiagramStats.of(d, presentation)
    height = len(bands[0])
    cur = d
    for r in range(height):
        row = [b[r] for b in bands]
        crossing = _row_band(cur, row, {b.generator for b in bundle.bands}, presentation)
        cur, _, copies = extended_i_move(cur, region, crossing, presentation)
        region = set(copies)
    rec = MoveRecord(MoveKind.PUSH_UP, {"region": sorted(delta), "rows": height, "copy": sorted(region)}, before, DiagramStats.of(cur, presentation))
    return cur, rec


def _row_band(d: Diagram, row: list[int], skip: set[str], presentation) -> Band:
    rs = set(row)
    for b in extract_bands(d, presentation):
        if b.generator not in skip and rs <= set(b.regions):
            idx = [b.regions.index(f) for f in row]
            lo, hi = min(idx), max(idx)
            if hi - lo + 1 == len(row):
                return b
    raise MoveError("bundle row is not part of a single crossing band")


# ----------------------------------------------------------------------
# fixed instances


def cube_corner() -> Diagram:
    """Three commutator squares around a vertex, boundary a b c a^-1 b^-1 c^-1."""
    A, B, C = ("a", 1), ("b", 1), ("c", 1)
    faces = [
        ([2, 3, 4, 6], [C, inv(A), inv(C), A]),
        ([0, 1, 2, 6], [A, B, inv(A), inv(B)]),
        ([0, 6, 4, 5], [B, C, inv(B), inv(C)]),
    ]
    return Diagram.from_faces(faces)


def cube_corner_with_flap() -> Diagram:
    """The cube corner with a fourth square glued on two boundary edges,
    boundary a b c b^-1 a^-1 c^-1."""
    A, B, C = ("a", 1), ("b", 1), ("c", 1)
    faces = [
        ([2, 3, 4, 6], [C, inv(A), inv(C), A]),
        ([0, 1, 2, 6], [A, B, inv(A), inv(B)]),
        ([0, 6, 4, 5], [B, C, inv(B), inv(C)]),
        ([5, 4, 3, 7], [B, A, inv(B), inv(A)]),
    ]
    return Diagram.from_faces(faces)


def cube() -> Prism:
    g = LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 2), ("a", "c", 2)])
    return make_prism(g, "a", "c", "b", allow_cube=True)


# ----------------------------------------------------------------------
# random instances


def random_bouquet(presentation, rng: random.Random, k: int = 3, conj_len: int = 3) -> Diagram:
    """Unreduced lollipop diagram of a random product of conjugated relators;
    its boundary usually offers many diamond moves."""
    from .solver import bouquet, sample_with_witness

    s = sample_with_witness(presentation, k, conj_len, rng.randrange(2**32))
    return bouquet(s.factors)


def _grow_disc(s: Diagram, rng: random.Random, size: int) -> set[int] | None:
    faces = s.inner_faces()
    cur = {rng.choice(faces)}
    while len(cur) < size:
        frontier = sorted({g for f in cur for g in s.neighbours(f)} - cur)
        if not frontier:
            return None
        cur.add(rng.choice(frontier))
    rest = set(faces) - cur
    if not rest or not is_disc(s, cur) or not is_disc(s, rest):
        return None
    return cur


def random_imove_instance(rng: random.Random, max_tries: int = 200) -> tuple[Diagram, list[int], Prism]:
    """A random disc of a random prism, optionally with commutator squares in
    a fresh generator glued on boundary edges.  Returns the diagram, the
    faces to replace and the prism."""
    for _ in range(max_tries):
        m = rng.choice((2, 4, 5, 6))
        g = LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 2), ("a", "c", m)])
        prism = make_prism(g, "a", "b", "c", allow_cube=True)
        s = prism.sphere
        n = len(s.inner_faces())
        part = _grow_disc(s, rng, rng.randint(1, n - 1))
        if part is None:
            continue
        big_in = sum(1 for f in part if f in prism.big)
        if m > 2 and len(prism.big) - big_in > big_in:
            continue
        base = submap(s, part)
        data = [face_data(base, f) for f in sorted(part)]
        tags = sorted(part)
        bd = boundary_darts(base)
        picks = sorted(rng.sample(range(len(bd)), min(len(bd), rng.randint(0, 2))))
        if len(picks) == 2 and (picks[1] - picks[0]) in (1, len(bd) - 1):
            picks = picks[:1]
        fresh = max(base.vertices) + 1
        for i in picks:
            x = bd[i]
            u, v, ell = base.origin[x], base.head(x), base.label[x]
            data.append((
                [v, u, fresh, fresh + 1],
                [inv(ell), ("z", 1), ell, ("z", -1)],
                [_edge_key(base, x), ("z", i, 0), ("z", i, 1), ("z", i, 2)],
            ))
            tags.append(max(tags) + 1)
            fresh += 2
        return assemble(data, PLANAR, tags), sorted(part), prism
    raise MoveError("could not draw an I-move instance")
