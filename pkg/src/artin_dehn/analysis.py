"""Greendlinger regions, layer decompositions, one-layer recognition and
the boundary-region predicates used for small-cancellation diagrams."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from enum import Enum

from .diagram import OUTER, Diagram, DiagramError, boundary_darts, face_n, polyomino
from .words import Word, syllables


class Shape(str, Enum):
    ONE_LAYER = "ONE_LAYER"
    TRIPOD_DUAL = "TRIPOD_DUAL"
    OTHER = "OTHER"


# ----------------------------------------------------------------------
# local geometry helpers


def edge_neighbours(d: Diagram, f: int) -> set[int]:
    return d.inner_neighbours(f)


def face_vertex_set(d: Diagram, f: int) -> set[int]:
    return {d.origin[x] for x in d.face_walk(f)}


def is_simple_region(d: Diagram, f: int) -> bool:
    """The boundary walk of f visits no vertex twice."""
    vs = d.face_vertices(f)
    return len(vs) == len(set(vs))


def _arcs(flags: list[bool]) -> int:
    """Number of maximal cyclic runs of True."""
    n = len(flags)
    if all(flags):
        return 1
    return sum(1 for i in range(n) if flags[i] and not flags[i - 1])


def boundary_contact(d: Diagram, f: int) -> tuple[list[int], int]:
    """Darts of f on the outer boundary and the number of arcs they form."""
    walk = d.face_walk(f)
    flags = [d.ftag[d.opp[x]] == OUTER for x in walk]
    return [x for x, fl in zip(walk, flags) if fl], _arcs(flags) if any(flags) else 0


def boundary_intersection_connected(d: Diagram, f: int) -> bool:
    """The closed set (boundary of f) meet (boundary of M) is connected.

    Besides whole edges this sees isolated boundary vertices of f."""
    walk = d.face_walk(f)
    bverts = d.boundary_vertices()
    n = len(walk)
    on_edge = [d.ftag[d.opp[x]] == OUTER for x in walk]
    # vertex i is the origin of walk[i]; it is in the set if on the boundary
    on_vertex = [d.origin[x] in bverts for x in walk]
    if not any(on_vertex):
        return False
    # components along the cycle: vertices joined by boundary edges
    pieces = 0
    for i in range(n):
        if on_vertex[i] and not (on_edge[i - 1] and on_vertex[i - 1]):
            pieces += 1
    if pieces == 0:
        pieces = 1
    if pieces > 1:
        return False
    # a repeated vertex could glue separate pieces; simple regions exclude it
    return True


def intersection_connected(d: Diagram, f: int, g: int) -> bool:
    """The common boundary of two regions is empty or connected."""
    vf, vg = face_vertex_set(d, f), face_vertex_set(d, g)
    common = vf & vg
    if not common:
        return True
    shared = [x for x in d.face_walk(f) if d.ftag[d.opp[x]] == g]
    parent = {v: v for v in common}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for x in shared:
        a, b = find(d.origin[x]), find(d.head(x))
        parent[a] = b
    return len({find(v) for v in common}) == 1


def layer_valency(d: Diagram, faces: set[int], v: int) -> int:
    """Number of edges at v that lie on some region of the submap."""
    count = 0
    for x in d.around(v):
        if d.ftag[x] in faces or d.ftag[d.opp[x]] in faces:
            count += 1
    return count


# ----------------------------------------------------------------------
# Greendlinger regions


@dataclass
class GreendlingerReport:
    regions: list[tuple[int, int, int]]  # (face, i(D), k)
    sum_defect: int
    shape: Shape
    d0: list[int] = field(default_factory=list)
    d0_sum_defect: int = 0
    problems: list[str] = field(default_factory=list)

    @property
    def faces(self) -> list[int]:
        return [f for f, _, _ in self.regions]


def greendlinger(d: Diagram, check: bool = True) -> GreendlingerReport:
    from .diagram import diagram_C4T4

    problems = []
    faces = d.inner_faces()
    if check:
        if len(faces) < 2:
            problems.append("fewer than two regions")
        if not diagram_C4T4(d):
            problems.append("diagram is not C(4)&T(4)")
        if not interior_connected(d):
            problems.append("interior is not connected")
    bverts = d.boundary_vertices()
    regions = []
    for f in faces:
        if not any(d.origin[x] in bverts for x in d.face_walk(f)):
            continue
        if not is_simple_region(d, f):
            continue
        if not boundary_intersection_connected(d, f):
            continue
        i = len(edge_neighbours(d, f))
        if i <= 2:
            regions.append((f, i, i))
    total = sum(3 - i for _, i, _ in regions)
    if len(regions) == 2:
        shape = Shape.ONE_LAYER
    elif len(regions) == 3:
        shape = Shape.TRIPOD_DUAL
    else:
        shape = Shape.OTHER
    val = d.valencies()
    d0 = []
    for f, i, _ in regions:
        if i == 2:
            darts, _ = boundary_contact(d, f)
            ends = _contact_endpoints(d, f)
            if not any(val[v] == 3 for v in ends):
                continue
        d0.append(f)
    d0_sum = sum(3 - i for f, i, _ in regions if f in d0)
    return GreendlingerReport(regions, total, shape, d0, d0_sum, problems)


def _contact_endpoints(d: Diagram, f: int) -> list[int]:
    """Endpoints of the boundary arc of f (f assumed to meet it in one arc)."""
    walk = d.face_walk(f)
    n = len(walk)
    flags = [d.ftag[d.opp[x]] == OUTER for x in walk]
    if not any(flags):
        bverts = d.boundary_vertices()
        return [d.origin[x] for x in walk if d.origin[x] in bverts]
    if all(flags):
        return []
    ends = []
    for i in range(n):
        if flags[i] and not flags[i - 1]:
            ends.append(d.origin[walk[i]])
        if flags[i] and not flags[(i + 1) % n]:
            ends.append(d.head(walk[i]))
    return ends


def interior_connected(d: Diagram) -> bool:
    """Regions are connected through shared edges."""
    faces = d.inner_faces()
    if not faces:
        return True
    seen = {faces[0]}
    stack = [faces[0]]
    while stack:
        f = stack.pop()
        for g in edge_neighbours(d, f):
            if g not in seen:
                seen.add(g)
                stack.append(g)
    return len(seen) == len(faces)


# ----------------------------------------------------------------------
# layers


@dataclass
class LayerStructure:
    base: int
    layers: list[set]  # layers[0] is the base vertex set, then face sets
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    convex: bool = True
    violations: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return len(self.layers) - 1


def layer_structure(d: Diagram, v0: int, exact: bool = False) -> LayerStructure:
    if v0 not in d.vertices:
        raise DiagramError(f"no vertex {v0}")
    faces = d.inner_faces()
    verts = {f: face_vertex_set(d, f) for f in faces}
    layers: list[set] = [{v0}]
    done: set[int] = set()
    touched = {v0}
    while len(done) < len(faces):
        nxt = {f for f in faces if f not in done and verts[f] & touched}
        if not nxt:
            raise DiagramError("diagram interior is not connected to the base vertex")
        layers.append(nxt)
        done |= nxt
        for f in nxt:
            touched |= verts[f]
    ls = LayerStructure(v0, layers)
    index = {f: i for i, layer in enumerate(layers) if i for f in layer}
    for f in faces:
        i = index[f]
        nb = edge_neighbours(d, f)
        ls.alpha[f] = sum(1 for g in nb if index[g] == i - 1)
        ls.beta[f] = sum(1 for g in nb if index[g] == i)
        ls.gamma[f] = sum(1 for g in nb if index[g] == i + 1)
        if ls.alpha[f] > 1:
            ls.violations.append(f"alpha({f}) = {ls.alpha[f]}")
        if ls.beta[f] > 2:
            ls.violations.append(f"beta({f}) = {ls.beta[f]}")
    # local convexity test
    prev_verts = {v0}
    for i in range(1, len(layers)):
        L = layers[i]
        for f in L:
            if not _contact_connected(d, f, prev_verts, layers, i):
                ls.convex = False
                ls.violations.append(f"region {f} meets the previous layers in a disconnected set")
        for f, g in itertools.combinations(sorted(L), 2):
            common = verts[f] & verts[g]
            if common and not (common & prev_verts):
                ls.convex = False
                ls.violations.append(f"regions {f} and {g} of layer {i} meet off the previous layers")
        for f in L:
            prev_verts = prev_verts | verts[f]
    # valency on the interface with the next layer; the outermost interface
    # with the boundary is skipped since concave boundary corners break it
    for i in range(1, len(layers) - 1):
        L = layers[i]
        lv = set().union(*(verts[f] for f in L))
        nxt = set().union(*(verts[f] for f in layers[i + 1]))
        for v in lv & nxt:
            k = layer_valency(d, L, v)
            if k > 3:
                ls.violations.append(f"vertex {v} has valency {k} in layer {i}")
    if exact:
        ok = convex_exact(d, ls)
        if ok != ls.convex:
            ls.violations.append("local and exact convexity tests disagree")
        ls.convex = ls.convex and ok
    return ls


def _contact_connected(d: Diagram, f: int, prev: set[int], layers, i) -> bool:
    """Intersection of the boundary of f with the union of earlier layers."""
    if i == 1:
        return True
    earlier = set().union(*layers[1:i])
    walk = d.face_walk(f)
    on_v = [d.origin[x] in prev for x in walk]
    on_e = [d.ftag[d.opp[x]] in earlier for x in walk]
    n = len(walk)
    pieces = sum(1 for k in range(n) if on_v[k] and not (on_e[k - 1] and on_v[k - 1]))
    return pieces <= 1 or all(on_v)


def _simply_connected(d: Diagram, faces: set[int], extra_vertices: set[int]) -> bool:
    """The 2-complex made of the closed regions (plus isolated vertices) is
    connected with Euler characteristic 1."""
    vs = set(extra_vertices)
    es = set()
    for f in faces:
        for x in d.face_walk(f):
            vs.add(d.origin[x])
            es.add(min(x, d.opp[x]))
    if not vs:
        return True
    parent = {v: v for v in vs}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in es:
        parent[find(d.origin[e])] = find(d.head(e))
    if len({find(v) for v in vs}) != 1:
        return False
    return len(vs) - len(es) + len(faces) == 1


def convex_exact(d: Diagram, ls: LayerStructure, limit: int = 14) -> bool:
    """Every subset of a layer together with the earlier layers is simply
    connected.  Exponential; layers larger than ``limit`` are skipped."""
    before: set[int] = set()
    for i in range(1, len(ls.layers)):
        L = sorted(ls.layers[i])
        if len(L) <= limit:
            for r in range(1, len(L) + 1):
                for sub in itertools.combinations(L, r):
                    if not _simply_connected(d, before | set(sub), {ls.base}):
                        return False
        before |= set(L)
    return True


# ----------------------------------------------------------------------
# one-layer maps


@dataclass
class OneLayer:
    regions: list[int]
    mu: list[int]
    nu: list[int]
    components: list[list[int]] = field(default_factory=list)


def _path_order(d: Diagram, comp: set[int]) -> list[int] | None:
    if len(comp) == 1:
        return list(comp)
    nb = {f: edge_neighbours(d, f) & comp for f in comp}
    ends = [f for f in comp if len(nb[f]) == 1]
    if len(ends) != 2 or any(len(nb[f]) not in (1, 2) for f in comp):
        return None
    order = [min(ends)]
    while len(order) < len(comp):
        nxt = [g for g in nb[order[-1]] if g not in order]
        if len(nxt) != 1:
            return None
        order.append(nxt[0])
    return order


def _components(d: Diagram) -> list[set[int]]:
    faces = set(d.inner_faces())
    out = []
    while faces:
        start = min(faces)
        comp = {start}
        stack = [start]
        while stack:
            f = stack.pop()
            for g in edge_neighbours(d, f):
                if g not in comp:
                    comp.add(g)
                    stack.append(g)
        out.append(comp)
        faces -= comp
    return out


def one_layer_decompose(d: Diagram) -> OneLayer | None:
    comps = _components(d)
    if not comps:
        return None
    orders = []
    for comp in comps:
        order = _path_order(d, comp)
        if order is None:
            return None
        # each region meets the boundary; inner regions have two arcs
        for f in order:
            _, arcs = boundary_contact(d, f)
            if arcs == 0:
                return None
        orders.append(order)
    if len(comps) > 1 and not _chain_of_blocks(d, comps):
        return None
    regions = [f for o in orders for f in o]
    mu, nu = _sides(d, regions)
    return OneLayer(regions, mu, nu, orders)


def _chain_of_blocks(d: Diagram, comps: list[set[int]]) -> bool:
    """Interior components linked in a path through vertices or spines."""
    verts = [set().union(*(face_vertex_set(d, f) for f in c)) for c in comps]
    # contract each component to a node; spines connect via the 1-skeleton
    node_of = {}
    for i, vs in enumerate(verts):
        for v in vs:
            if v in node_of:
                return False  # two blocks share a cut vertex: fine only in a chain
            node_of[v] = i
    adj: dict[int, set[int]] = {i: set() for i in range(len(comps))}
    # walk spines from each component
    for i, vs in enumerate(verts):
        for v in vs:
            for x in d.around(v):
                if d.ftag[x] != OUTER or d.ftag[d.opp[x]] != OUTER:
                    continue
                cur = d.head(x)
                seen = {v}
                while cur not in node_of and cur not in seen:
                    seen.add(cur)
                    nxt = [d.head(y) for y in d.around(cur) if d.head(y) not in seen]
                    if len(nxt) != 1:
                        break
                    cur = nxt[0]
                if cur in node_of and node_of[cur] != i:
                    adj[i].add(node_of[cur])
    degs = [len(a) for a in adj.values()]
    return sum(1 for k in degs if k == 1) == 2 and all(k in (1, 2) for k in degs)


def _sides(d: Diagram, regions: list[int]) -> tuple[list[int], list[int]]:
    """Split the boundary into the two sides running from the first region
    to the last one."""
    bd = boundary_darts(d)
    if not bd or len(regions) == 1:
        return bd, []
    first, last = regions[0], regions[-1]
    tags = [d.ftag[x] for x in bd]
    n = len(bd)
    # rotate so the walk starts right after the arc of the first region
    start = next((i for i in range(n) if tags[i] == first and tags[(i + 1) % n] != first), 0)
    rot = bd[start + 1:] + bd[: start + 1]
    rtags = [d.ftag[x] for x in rot]
    end = max(i for i, t in enumerate(rtags) if t == last)
    mu = rot[: end + 1]
    nu = rot[end + 1:]
    return mu, nu


# ----------------------------------------------------------------------
# boundary predicates


def _path_on(d: Diagram, f: int, path: set[int]) -> tuple[list[int], bool]:
    """Darts of f whose edge lies on the given boundary path, in walk order,
    and whether they form one connected arc."""
    walk = d.face_walk(f)
    flags = [x in path or d.opp[x] in path for x in walk]
    if not any(flags):
        return [], False
    n = len(walk)
    if all(flags):
        return walk, True
    start = next(i for i in range(n) if flags[i] and not flags[i - 1])
    ordered = [walk[(start + k) % n] for k in range(n)]
    oflags = [flags[(start + k) % n] for k in range(n)]
    arc = []
    for x, fl in zip(ordered, oflags):
        if not fl:
            break
        arc.append(x)
    return [x for x, fl in zip(ordered, oflags) if fl], len(arc) == sum(oflags)


def dd_membership(d: Diagram, face: int, mu, presentation=None) -> bool:
    """Connected contact with mu, syllable length at least n, and the
    complement no longer than the contact."""
    path = set(mu)
    arc, connected = _path_on(d, face, path)
    if not arc or not connected:
        return False
    n = face_n(d, face, presentation)
    label = Word(tuple(d.label[x] for x in arc))
    if len(syllables(label)) < n:
        return False
    return len(d.face_walk(face)) - len(arc) <= len(arc)


@dataclass
class CaseMatch:
    case: str
    side: int
    regions: tuple


def split_boundary(d: Diagram, k: int, basepoint: int | None = None) -> tuple[list[int], list[int]]:
    bd = boundary_darts(d, basepoint)
    if not 0 < k < len(bd):
        raise ValueError("split must leave both sides nonempty")
    return bd[:k], bd[k:]


def theoremC_cases(d: Diagram, split, presentation=None) -> list[CaseMatch]:
    """Report which of the three boundary configurations occur for the split
    of the boundary into omega_1 and omega_2."""
    if isinstance(split, int):
        split = split_boundary(d, split)
    w1, w2 = split
    all_bd = set(boundary_darts(d))
    if not set(w1) <= all_bd or not set(w2) <= all_bd or set(w1) & set(w2):
        raise ValueError("malformed split")
    from .diagram import classify_regions

    cls = classify_regions(d, presentation)
    out = []
    for j, side in ((1, set(w1)), (2, set(w2))):
        big = []
        small = []
        for f in sorted(cls.reg4plus):
            if dd_membership(d, f, side, presentation):
                out.append(CaseMatch("a", j, (f,)))
            arc, conn = _path_on(d, f, side)
            if conn and len(syllables(Word(tuple(d.label[x] for x in arc)))) >= 2:
                big.append(f)
        for f in sorted(cls.reg2):
            arc, conn = _path_on(d, f, side)
            if conn and len(arc) >= 2:
                small.append(f)
        for f, g in itertools.combinations(small, 2):
            out.append(CaseMatch("b", j, (f, g)))
        for f in small:
            for k in big:
                out.append(CaseMatch("c", j, (f, k)))
    return out


# ----------------------------------------------------------------------
# corpora of small-cancellation maps


def strip(n: int) -> Diagram:
    return polyomino([(i, 0) for i in range(n)])


def tripod(a: int, b: int, c: int) -> Diagram:
    """A centre square with three straight arms of the given lengths."""
    cells = {(0, 0)}
    cells |= {(-i, 0) for i in range(1, a + 1)}
    cells |= {(i, 0) for i in range(1, b + 1)}
    cells |= {(0, i) for i in range(1, c + 1)}
    return polyomino(cells)


def _polyomino_ok(cells: set) -> bool:
    """Simply connected with connected interior: no holes and no two cells
    meeting only at a corner."""
    for x, y in cells:
        for dx, dy in ((1, 1), (1, -1)):
            if (x + dx, y + dy) in cells and (x + dx, y) not in cells and (x, y + dy) not in cells:
                return False
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    lo_x, hi_x, lo_y, hi_y = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    outside = {(lo_x, lo_y)}
    stack = [(lo_x, lo_y)]
    while stack:
        x, y = stack.pop()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if lo_x <= nx <= hi_x and lo_y <= ny <= hi_y and (nx, ny) not in cells and (nx, ny) not in outside:
                outside.add((nx, ny))
                stack.append((nx, ny))
    total = (hi_x - lo_x + 1) * (hi_y - lo_y + 1)
    return len(outside) + len(cells) == total


def random_polyomino(rng: random.Random, size: int) -> set:
    cells = {(0, 0)}
    tries = 0
    while len(cells) < size and tries < 50 * size:
        tries += 1
        x, y = rng.choice(sorted(cells))
        dx, dy = rng.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
        c = (x + dx, y + dy)
        if c in cells:
            continue
        cells.add(c)
        if not _polyomino_ok(cells):
            cells.discard(c)
    return cells


def c4t4_corpus(count: int = 200, seed: int = 0, max_faces: int = 25) -> list[tuple[str, Diagram]]:
    """Grids, strips, tripods and random polyominoes with 2..max_faces squares."""
    out: list[tuple[str, Diagram]] = []
    for n in range(2, max_faces + 1):
        out.append((f"strip {n}", strip(n)))
    for w in range(1, 6):
        for h in range(1, 6):
            if 2 <= w * h <= max_faces and w <= h:
                out.append((f"grid {w}x{h}", polyomino([(x, y) for x in range(w) for y in range(h)])))
    for a in range(1, 8):
        for b in range(1, 8):
            for c in range(1, 8):
                if a <= b <= c and a + b + c + 1 <= max_faces and len(out) < count // 2 + 60:
                    out.append((f"tripod {a},{b},{c}", tripod(a, b, c)))
    rng = random.Random(seed)
    while len(out) < count:
        size = rng.randint(2, max_faces)
        cells = random_polyomino(rng, size)
        if len(cells) >= 2:
            out.append((f"polyomino {sorted(cells)}", polyomino(cells)))
    return out
