"""Planar combinatorial maps with labelled darts.

A map is a set of darts with an edge involution ``opp``, an origin vertex
and a rotation ``rot`` (next dart counterclockwise around the origin).
Faces are the orbits of ``phi(d) = rot[opp[d]]`` and are never stored
authoritatively; every dart only carries the tag of the face it bounds so
that faces keep stable names across surgeries.

All faces, the outer one included, are read along their orbit.  The
boundary word of a planar map is the outer orbit read backwards, which
puts it in the same rotational sense as the inner faces."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .words import Letter, Word, format_word, free_reduce, inv

OUTER = 0
PLANAR = "planar"
SPHERICAL = "spherical"


class DiagramError(ValueError):
    pass


class GluingError(DiagramError):
    pass


class DiagramParseError(DiagramError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


class Diagram:
    def __init__(self, kind: str = PLANAR):
        self.kind = kind
        self.origin: dict[int, int] = {}
        self.label: dict[int, Letter] = {}
        self.opp: dict[int, int] = {}
        self.rot: dict[int, int] = {}
        self.rinv: dict[int, int] = {}
        self.ftag: dict[int, int] = {}
        self.vertices: set[int] = set()
        # Howie corner words: corner[d] is read in the face of d just before d
        self.corner: dict[int, Word] = {}
        self._dart = 0
        self._vertex = 0
        self._face = 0

    # ------------------------------------------------------------------
    # basic structure

    def copy(self) -> "Diagram":
        d = Diagram(self.kind)
        d.origin = dict(self.origin)
        d.label = dict(self.label)
        d.opp = dict(self.opp)
        d.rot = dict(self.rot)
        d.rinv = dict(self.rinv)
        d.ftag = dict(self.ftag)
        d.vertices = set(self.vertices)
        d.corner = dict(self.corner)
        d._dart, d._vertex, d._face = self._dart, self._vertex, self._face
        return d

    def new_vertex(self) -> int:
        self._vertex = max(self._vertex, max(self.vertices, default=-1) + 1)
        v = self._vertex
        self._vertex += 1
        self.vertices.add(v)
        return v

    def new_dart(self) -> int:
        self._dart = max(self._dart, max(self.origin, default=-1) + 1)
        d = self._dart
        self._dart += 1
        return d

    def new_face_id(self) -> int:
        self._face = max(self._face, max(self.ftag.values(), default=0) + 1)
        f = self._face
        self._face += 1
        return f

    def darts(self) -> list[int]:
        return sorted(self.origin)

    def head(self, d: int) -> int:
        return self.origin[self.opp[d]]

    def phi(self, d: int) -> int:
        return self.rot[self.opp[d]]

    def phi_inv(self, d: int) -> int:
        return self.opp[self.rinv[d]]

    def set_rot(self, a: int, b: int) -> None:
        self.rot[a] = b
        self.rinv[b] = a

    def around(self, v_or_dart: int, *, dart: bool = False) -> list[int]:
        """Darts leaving a vertex in counterclockwise order."""
        if dart:
            start = v_or_dart
        else:
            ds = self._darts_at().get(v_or_dart, [])
            if not ds:
                return []
            start = min(ds)
        out = [start]
        x = self.rot[start]
        while x != start:
            out.append(x)
            x = self.rot[x]
        return out

    def _darts_at(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for d, v in self.origin.items():
            out.setdefault(v, []).append(d)
        return out

    def valency(self, v: int) -> int:
        return sum(1 for x in self.origin.values() if x == v)

    def valencies(self) -> dict[int, int]:
        out = {v: 0 for v in self.vertices}
        for x in self.origin.values():
            out[x] += 1
        return out

    def edges(self) -> list[int]:
        """One representative dart per edge (the smaller id)."""
        return sorted(d for d in self.origin if d < self.opp[d])

    def orbit(self, d: int) -> list[int]:
        out = [d]
        x = self.phi(d)
        while x != d:
            out.append(x)
            x = self.phi(x)
        return out

    def face_orbits(self) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for d in sorted(self.origin):
            if d in seen:
                continue
            orb = self.orbit(d)
            seen.update(orb)
            out.append(orb)
        return out

    def faces(self) -> dict[int, list[int]]:
        """Face tag -> dart walk, starting at the smallest dart."""
        out = {}
        for orb in self.face_orbits():
            out[self.ftag[orb[0]]] = orb
        return out

    def inner_faces(self) -> list[int]:
        return sorted(f for f in self.faces() if f != OUTER)

    def face_of(self, d: int) -> int:
        return self.ftag[d]

    def face_walk(self, f: int, start: int | None = None) -> list[int]:
        if start is not None:
            return self.orbit(start)
        for d in sorted(self.origin):
            if self.ftag[d] == f:
                return self.orbit(d)
        raise DiagramError(f"no face {f}")

    def face_word(self, f: int, start: int | None = None) -> Word:
        return Word(tuple(self.label[d] for d in self.face_walk(f, start)))

    def face_vertices(self, f: int) -> list[int]:
        return [self.origin[d] for d in self.face_walk(f)]

    def outer_walk(self) -> list[int]:
        return [d for d in self.face_walk(OUTER)] if self.has_outer_darts() else []

    def has_outer_darts(self) -> bool:
        return any(t == OUTER for t in self.ftag.values())

    def boundary_vertices(self) -> set[int]:
        if self.kind == SPHERICAL:
            return set()
        if not self.has_outer_darts():
            return set(self.vertices)
        return {self.origin[d] for d in self.ftag if self.ftag[d] == OUTER}

    def boundary_word(self, basepoint: int | None = None) -> Word:
        """Boundary label read from the origin of an outer dart."""
        if self.kind != PLANAR:
            raise DiagramError("boundary word is defined for planar diagrams")
        if not self.has_outer_darts():
            return Word()
        if basepoint is None:
            # start the word with the smallest boundary dart of an inner face
            first = min((d for d in self.ftag if self.ftag[self.opp[d]] == OUTER and self.ftag[d] != OUTER), default=None)
            if first is None:
                basepoint = min(d for d, t in self.ftag.items() if t == OUTER)
            else:
                basepoint = self.phi(self.opp[first])
        if self.ftag.get(basepoint) != OUTER:
            raise DiagramError(f"dart {basepoint} is not on the outer face")
        walk = self.orbit(basepoint)
        return Word(tuple(inv(self.label[d]) for d in reversed(walk)))

    def area(self) -> int:
        return len(self.inner_faces())

    def euler(self) -> int:
        faces = len(self.face_orbits()) if self.origin else 1
        return len(self.vertices) - len(self.origin) // 2 + faces

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for d, v in self.origin.items():
            adj[v].add(self.head(d))
        start = next(iter(self.vertices))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def neighbours(self, f: int) -> set[int]:
        """Faces sharing an edge with f (f itself excluded)."""
        return {self.ftag[self.opp[d]] for d in self.face_walk(f)} - {f}

    def inner_neighbours(self, f: int) -> set[int]:
        return self.neighbours(f) - {OUTER}

    def edge_between(self, f: int, g: int) -> list[int]:
        return [d for d in self.face_walk(f) if self.ftag[self.opp[d]] == g]

    # ------------------------------------------------------------------
    # tags

    def retag(self, prefer: dict[int, int] | None = None) -> None:
        """Make face tags uniform on orbits after a surgery.

        An orbit keeps OUTER if any of its darts had it, otherwise the
        smallest old tag not claimed by an earlier orbit, otherwise a fresh
        id."""
        claimed: set[int] = set()
        orbits = self.face_orbits()
        # the outer face is claimed first so it never moves
        orbits.sort(key=lambda o: (0 if any(self.ftag.get(d) == OUTER for d in o) else 1, min(o)))
        for orb in orbits:
            tags = sorted({self.ftag.get(d) for d in orb} - {None})
            choice = None
            if self.kind == PLANAR and OUTER in tags and OUTER not in claimed:
                choice = OUTER
            else:
                for t in tags:
                    if t != OUTER and t not in claimed:
                        choice = t
                        break
            if choice is None:
                choice = self.new_face_id()
                while choice in claimed:
                    choice = self.new_face_id()
            claimed.add(choice)
            for d in orb:
                self.ftag[d] = choice

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_faces(
        cls,
        faces: Sequence[tuple[Sequence[int], Sequence[Letter]]],
        kind: str = PLANAR,
        pairs: dict | None = None,
    ) -> "Diagram":
        """Assemble a map from faces given as vertex cycles and letters.

        Face i runs verts[j] -> verts[j+1] with letter labels[j].  Darts are
        paired through ``pairs`` ((i, j) -> (k, l)) or else by matching
        reversed vertex pairs.  Unpaired darts bound the outer face."""
        d = cls(kind)
        dart_of: dict[tuple[int, int], int] = {}
        for i, (verts, labels) in enumerate(faces):
            if len(verts) != len(labels) or not verts:
                raise GluingError(f"face {i} has mismatched vertex and label lists")
            for j in range(len(verts)):
                x = d.new_dart()
                dart_of[(i, j)] = x
                d.origin[x] = verts[j]
                d.label[x] = labels[j]
                d.ftag[x] = i + 1
                d.vertices.add(verts[j])
        if pairs is None:
            by_ends: dict[tuple[int, int], list] = {}
            for (i, j), x in dart_of.items():
                verts = faces[i][0]
                by_ends.setdefault((verts[j], verts[(j + 1) % len(verts)]), []).append((i, j))
            pairs = {}
            for (u, v), occ in by_ends.items():
                if len(occ) > 1:
                    raise GluingError(f"edge {u}->{v} occurs {len(occ)} times in one direction")
                back = by_ends.get((v, u), [])
                if back:
                    pairs[occ[0]] = back[0]
        for a, b in list(pairs.items()):
            if pairs.get(b, a) != a:
                raise GluingError(f"inconsistent pairing {a} {b}")
        for a, b in pairs.items():
            x, y = dart_of[a], dart_of[b]
            if x == y:
                raise GluingError("an edge cannot be glued to itself")
            if d.label[x] != inv(d.label[y]):
                raise GluingError(f"labels {d.label[x]} and {d.label[y]} do not match across an edge")
            fa, fb = faces[a[0]][0], faces[b[0]][0]
            if fa[a[1]] != fb[(b[1] + 1) % len(fb)] or fb[b[1]] != fa[(a[1] + 1) % len(fa)]:
                raise GluingError("glued edges do not share endpoints")
            d.opp[x] = y
        inner = list(dart_of.values())
        for x in inner:
            if x in d.opp:
                continue
            if kind == SPHERICAL:
                raise GluingError("spherical diagram has an unmatched edge")
            o = d.new_dart()
            d.opp[x] = o
            d.opp[o] = x
            d.label[o] = inv(d.label[x])
            d.ftag[o] = OUTER
        # origins of outer darts
        for (i, j), x in dart_of.items():
            verts = faces[i][0]
            o = d.opp[x]
            if d.ftag[o] == OUTER:
                d.origin[o] = verts[(j + 1) % len(verts)]
        # rotation from face successors: rot[opp(d_j)] = d_{j+1}
        for i, (verts, _) in enumerate(faces):
            k = len(verts)
            for j in range(k):
                d.set_rot(d.opp[dart_of[(i, j)]], dart_of[(i, (j + 1) % k)])
        d._close_rotations()
        d._face = len(faces) + 1
        d._check_built()
        return d

    def _close_rotations(self) -> None:
        """Close the partial rotation at boundary vertices.

        Each vertex carries chains outer-dart -> ... -> dart-without-successor;
        the chains are linked cyclically, trying orders until the map is a
        sphere with a single outer face."""
        missing = [x for x in self.origin if x not in self.rot]
        if not missing:
            return
        by_v: dict[int, list[int]] = {}
        for x in missing:
            by_v.setdefault(self.origin[x], []).append(x)
        chains: dict[int, list[tuple[int, int]]] = {}
        for v, ends in by_v.items():
            out = []
            for end in ends:
                start = end
                while start in self.rinv:
                    start = self.rinv[start]
                out.append((start, end))
            out.sort()
            chains[v] = out
        pinch = [v for v in chains if len(chains[v]) > 2]
        choices = [list(itertools.permutations(chains[v][1:])) for v in pinch]
        for v, ch in chains.items():
            if len(ch) <= 2:
                self._link(ch)
        for combo in itertools.product(*choices):
            for v, perm in zip(pinch, combo):
                self._link([chains[v][0], *perm])
            if self._one_outer_sphere():
                return
        raise GluingError("gluing is not planar")

    def _link(self, chain_list: list[tuple[int, int]]) -> None:
        k = len(chain_list)
        for i in range(k):
            self.set_rot(chain_list[i][1], chain_list[(i + 1) % k][0])

    def _one_outer_sphere(self) -> bool:
        outer_orbits = 0
        for orb in self.face_orbits():
            tags = {self.ftag[d] for d in orb}
            if OUTER in tags:
                if tags != {OUTER}:
                    return False
                outer_orbits += 1
        return outer_orbits <= 1 and self.euler() == 2

    def _check_built(self) -> None:
        if not self.is_connected():
            raise GluingError("gluing is not connected")
        for orb in self.face_orbits():
            if len({self.ftag[d] for d in orb}) != 1:
                raise GluingError("gluing is not planar (faces do not close up)")
        if self.euler() != 2:
            raise GluingError(f"gluing is not planar (Euler characteristic {self.euler()})")
        if self.kind == PLANAR and len([o for o in self.face_orbits() if self.ftag[o[0]] == OUTER]) != 1:
            raise GluingError("gluing does not have exactly one outer face")

    @classmethod
    def single_face(cls, word: Word) -> "Diagram":
        n = len(word)
        return cls.from_faces([(list(range(n)), list(word.letters))])

    # ------------------------------------------------------------------
    # local surgery primitives

    def _detach(self, x: int) -> None:
        p, n = self.rinv[x], self.rot[x]
        if p != x:
            self.set_rot(p, n)
        del self.rot[x]
        del self.rinv[x]

    def _insert_after(self, a: int, x: int) -> None:
        n = self.rot[a]
        self.set_rot(a, x)
        self.set_rot(x, n)

    def _drop_dart(self, x: int) -> None:
        for table in (self.origin, self.label, self.opp, self.ftag, self.corner):
            table.pop(x, None)

    def add_edge(self, u: int, v: int, letter: Letter, after_u: int | None, after_v: int | None) -> int:
        """Add an edge u -> v inserted after the given darts in the rotations
        (None when the vertex has no darts yet).  Returns the dart at u."""
        x, y = self.new_dart(), self.new_dart()
        self.origin[x], self.origin[y] = u, v
        self.label[x], self.label[y] = letter, inv(letter)
        self.opp[x], self.opp[y] = y, x
        for dart, after in ((x, after_u), (y, after_v)):
            if after is None:
                self.set_rot(dart, dart)
            else:
                self._insert_after(after, dart)
        return x

    def delete_edge(self, x: int) -> None:
        """Remove an edge; its two faces merge.  A vertex left without darts
        is removed unless it is the last vertex."""
        y = self.opp[x]
        keep = self.ftag[x] if self.ftag[x] == OUTER or self.ftag[y] != OUTER else self.ftag[y]
        u, v = self.origin[x], self.origin[y]
        merged_from = (self.ftag[x], self.ftag[y])
        for z in (x, y):
            self._detach(z)
        for z in (x, y):
            self._drop_dart(z)
        for w in {u, v}:
            if w not in self.origin.values() and len(self.vertices) > 1:
                self.vertices.discard(w)
        if merged_from[0] != merged_from[1]:
            for dd, t in self.ftag.items():
                if t in merged_from:
                    self.ftag[dd] = keep
        self.retag()

    def contract_edge(self, x: int) -> None:
        """Merge the endpoints of a non-loop edge; Howie corner words absorb
        the contracted letter."""
        y = self.opp[x]
        u, v = self.origin[x], self.origin[y]
        if u == v:
            raise DiagramError("cannot contract a loop")
        for a, b in ((x, y), (y, x)):
            # the letter of a moves into the corner of the next surviving dart
            acc = self.corner.get(a, Word()) + Word((self.label[a],))
            nxt = self.phi(a)
            if nxt == b:
                acc = acc + self.corner.get(b, Word()) + Word((self.label[b],))
                nxt = self.phi(b)
            if nxt not in (a, b):
                self.corner[nxt] = acc + self.corner.get(nxt, Word())
            if self.phi(a) == b:
                break
        a_list = self.around(x, dart=True)[1:]
        b_list = self.around(y, dart=True)[1:]
        for z in (x, y):
            del self.rot[z], self.rinv[z]
        merged = [z for z in a_list if z != x] + [z for z in b_list if z != y]
        for z in merged:
            self.origin[z] = u
        for i, z in enumerate(merged):
            self.set_rot(z, merged[(i + 1) % len(merged)])
        self._drop_dart(x)
        self._drop_dart(y)
        self.vertices.discard(v)
        self.retag()

    def fold(self, x1: int, x2: int) -> None:
        """Identify two equally labelled darts adjacent in a rotation.

        x2 must follow x1 counterclockwise; the corner between them lies in
        face F and reads a cancelling pair there.  When the far endpoints
        differ they merge.  When they coincide the two edges bound a disc
        whose boundary reads trivially; the side of it that avoids the outer
        face is discarded (F's side when both do)."""
        if self.rot[x1] != x2 or x1 == x2:
            raise DiagramError("fold needs consecutive darts")
        if self.label[x1] != self.label[x2]:
            raise DiagramError("fold needs equal labels")
        y1, y2 = self.opp[x1], self.opp[x2]
        if y1 == x2:
            raise DiagramError("fold on a single edge")
        v, h1, h2 = self.origin[x1], self.origin[y1], self.origin[y2]
        if v in (h1, h2):
            raise DiagramError("fold of a loop edge is not supported")
        t_f, t_g = self.ftag[x2], self.ftag[y2]
        if h1 != h2:
            # y1 takes over the place of y2 in its face
            self.ftag[y1] = t_g
            others = self.around(y2, dart=True)[1:]
            self._detach(y2)
            for z in others:
                self.origin[z] = h1
            if others:
                bk = self.rinv[y1]
                self.set_rot(bk, others[0])
                self.set_rot(others[-1], y1)
            self._detach(x2)
            self._drop_dart(x2)
            self._drop_dart(y2)
            self.vertices.discard(h2)
            self.retag()
            return
        h = h1
        f_side = self._side([*self._between(y2, y1)], {v, h})
        other = self._side(self._between(x2, x1) + self._between(y1, y2), {v, h})
        f_outer = any(self.ftag[z] == OUTER for z in f_side) or self.ftag[x2] == OUTER
        o_outer = any(self.ftag[z] == OUTER for z in other) or self.ftag[y2] == OUTER
        if f_outer and o_outer:
            raise DiagramError("fold would disconnect the boundary")
        doomed = other if f_outer else f_side
        self._remove_darts(doomed, {v, h})
        if f_outer:
            self.ftag[x1] = self.ftag[y1] = t_f
        else:
            self.ftag[y1] = t_g
        self._detach(x2)
        self._detach(y2)
        self._drop_dart(x2)
        self._drop_dart(y2)
        self.retag()

    def _side(self, seeds: list[int], walls: set[int]) -> set[int]:
        """Darts reachable from seeds without passing through wall vertices."""
        doomed: set[int] = set(seeds)
        seen_v: set[int] = set()
        queue = deque(self.head(s) for s in seeds)
        while queue:
            w = queue.popleft()
            if w in walls or w in seen_v:
                continue
            seen_v.add(w)
            for z in self.around(w):
                doomed.add(z)
                queue.append(self.head(z))
        return doomed | {self.opp[z] for z in doomed}

    def _remove_darts(self, doomed: set[int], walls: set[int]) -> None:
        gone_v = {self.origin[z] for z in doomed} - walls
        for z in doomed:
            if self.origin[z] in walls:
                self._detach(z)
        for z in doomed:
            self.rot.pop(z, None)
            self.rinv.pop(z, None)
            self._drop_dart(z)
        self.vertices -= gone_v

    def _between(self, a: int, b: int) -> list[int]:
        """Darts strictly between a and b going counterclockwise at their vertex."""
        out = []
        x = self.rot[a]
        while x != b:
            if x == a:
                raise DiagramError("darts are not at one vertex")
            out.append(x)
            x = self.rot[x]
        return out

    def prune_leaf(self, x: int) -> None:
        """Remove the edge of x when its head is a leaf."""
        w = self.head(x)
        if self.valency(w) != 1:
            raise DiagramError("not a leaf edge")
        self.delete_edge(x)

    def reduce_face_at(self, a: int) -> int:
        """Zip the face of a starting from the corner after a.  Returns the
        number of folds and prunes performed."""
        steps = 0
        while True:
            if a not in self.origin:
                return steps
            b = self.phi(a)
            if b == a or self.label[b] != inv(self.label[a]):
                return steps
            pa = self.phi_inv(a)
            nb = self.phi(b)
            if b == self.opp[a]:
                # spine: head of a is a leaf
                self.prune_leaf(a)
                steps += 1
                if pa == b or pa not in self.origin:
                    return steps
                a = pa
                continue
            self.fold(self.opp[a], b)
            steps += 1
            if pa in (a, b) or nb in (a, b) or pa not in self.origin:
                return steps
            if self.phi(pa) != nb:
                return steps
            a = pa

    def reduce_boundary(self) -> int:
        """Fold and prune until the boundary word is cyclically reduced."""
        total = 0
        while True:
            walk = self.outer_walk()
            if not walk:
                return total
            hit = None
            for i, a in enumerate(walk):
                b = walk[(i + 1) % len(walk)]
                if self.label[b] == inv(self.label[a]):
                    hit = a
                    break
            if hit is None:
                return total
            total += self.reduce_face_at(hit)

    def prune_spines(self) -> None:
        """Remove dangling trees from the map."""
        changed = True
        while changed:
            changed = False
            val = self.valencies()
            for x in sorted(self.origin):
                if x in self.origin and val.get(self.head(x)) == 1:
                    self.delete_edge(x)
                    changed = True
                    break

    # ------------------------------------------------------------------
    # comparison

    def canonical_code(self, root: int) -> tuple:
        """Relabelling-invariant code of the map rooted at a dart."""
        order = {root: 0}
        queue = deque([root])
        seq = []
        while queue:
            x = queue.popleft()
            nbrs = (self.opp[x], self.rot[x])
            codes = []
            for y in nbrs:
                if y not in order:
                    order[y] = len(order)
                    queue.append(y)
                codes.append(order[y])
            seq.append((self.label[x], self.ftag[x] == OUTER, tuple(codes), self.corner.get(x, Word()).letters))
        return tuple(seq)

    def isomorphic(self, other: "Diagram") -> bool:
        if self.kind != other.kind or len(self.origin) != len(other.origin) or len(self.vertices) != len(other.vertices):
            return False
        if not self.origin:
            return True
        if self.kind == PLANAR and self.has_outer_darts():
            mine = min(d for d, t in self.ftag.items() if t == OUTER)
            cands = [d for d, t in other.ftag.items() if t == OUTER]
        else:
            mine = min(self.origin)
            cands = list(other.origin)
        code = self.canonical_code(mine)
        return any(other.canonical_code(c) == code for c in cands)

    def __eq__(self, other) -> bool:  # structural equality, including ids
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.origin == other.origin
            and self.label == other.label
            and self.opp == other.opp
            and self.rot == other.rot
            and self.vertices == other.vertices
            and self.ftag == other.ftag
            and {k: v for k, v in self.corner.items() if v} == {k: v for k, v in other.corner.items() if v}
        )

    __hash__ = None  # mutable


# ----------------------------------------------------------------------
# gluing descriptions


def build_from_gluing(faces: Sequence[Word], gluings: Iterable[tuple[tuple[int, int], tuple[int, int]]] = (), kind: str = PLANAR) -> Diagram:
    """Diagram from face boundary words plus identified edge pairs.

    A gluing ((i, p), (j, q)) identifies letter p of face i with letter q of
    face j traversed backwards; the letters must be mutually inverse."""
    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    n = [len(w) for w in faces]
    pairs = {}
    for (i, p), (j, q) in gluings:
        if not (0 <= i < len(faces) and 0 <= j < len(faces) and 0 <= p < n[i] and 0 <= q < n[j]):
            raise GluingError(f"gluing position out of range: {(i, p)} {(j, q)}")
        if faces[i].letters[p] != inv(faces[j].letters[q]):
            raise GluingError(f"inconsistent labels across gluing {(i, p)} {(j, q)}")
        if (i, p) in pairs or (j, q) in pairs:
            raise GluingError("an edge is glued twice")
        pairs[(i, p)] = (j, q)
        pairs[(j, q)] = (i, p)
        union((i, p), (j, (q + 1) % n[j]))
        union((i, (p + 1) % n[i]), (j, q))
    vid: dict = {}
    spec = []
    for i, w in enumerate(faces):
        verts = []
        for p in range(n[i]):
            r = find((i, p))
            verts.append(vid.setdefault(r, len(vid)))
        spec.append((verts, list(w.letters)))
    return Diagram.from_faces(spec, kind, pairs)


# ----------------------------------------------------------------------
# analyses over a presentation


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    face_matches: dict = field(default_factory=dict)
    boundary: Word | None = None
    area: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def relator_match(word: Word, presentation) -> tuple[int, int] | None:
    if presentation is None:
        return None
    return presentation.relator_keys.get(word.letters)


def validate(d: Diagram, presentation=None, howie: bool = False) -> ValidationReport:
    rep = ValidationReport()
    v = rep.violations
    for x in d.origin:
        y = d.opp.get(x)
        if y is None or d.opp.get(y) != x or y == x:
            v.append(f"involution broken at dart {x}")
            continue
        if d.label.get(y) != inv(d.label.get(x, ("?", 0))):
            v.append(f"label of opposite of dart {x} is not inverse")
        if x not in d.rot or d.rinv.get(d.rot[x]) != x:
            v.append(f"rotation broken at dart {x}")
        elif d.origin[d.rot[x]] != d.origin[x]:
            v.append(f"rotation at dart {x} leaves its vertex")
        if d.origin[x] not in d.vertices:
            v.append(f"dart {x} starts at an unknown vertex")
    if v:
        return rep
    if not d.is_connected():
        v.append("map is not connected")
    orbits = d.face_orbits()
    seen_tags: dict[int, int] = {}
    for orb in orbits:
        tags = {d.ftag.get(x) for x in orb}
        if len(tags) != 1:
            v.append(f"face orbit starting at dart {orb[0]} carries tags {sorted(map(str, tags))}")
            continue
        t = tags.pop()
        if t in seen_tags:
            v.append(f"face tag {t} used by two orbits")
        seen_tags[t] = orb[0]
    if d.euler() != 2:
        v.append(f"Euler characteristic {d.euler()} != 2")
    n_outer = sum(1 for orb in orbits if d.ftag.get(orb[0]) == OUTER)
    if d.kind == PLANAR and n_outer != 1 and d.origin:
        v.append(f"{n_outer} outer faces")
    if d.kind == SPHERICAL and n_outer:
        v.append("spherical diagram has an outer face")
    if presentation is not None and not howie:
        for f in d.inner_faces():
            w = d.face_word(f)
            m = relator_match(w, presentation)
            rep.face_matches[f] = m
            if m is None:
                v.append(f"face {f} label {format_word(w)} is not a relator")
    bverts = d.boundary_vertices()
    for vert, k in d.valencies().items():
        if k == 2 and vert not in bverts:
            rep.warnings.append(f"inner vertex {vert} has valency 2")
    if d.kind == PLANAR and not v:
        rep.boundary = d.boundary_word()
    rep.area = d.area()
    return rep


@dataclass
class RegionClassification:
    reg2: set
    reg4plus: set
    T_set: set
    n: dict


def face_n(d: Diagram, f: int, presentation=None) -> int:
    w = d.face_word(f)
    if presentation is not None:
        m = relator_match(w, presentation)
        if m is not None:
            a, b = presentation.relators[m[0]][1]
            return presentation.source.label(a, b) if presentation.source else len(w) // 2
    return len(w) // 2


def classify_regions(d: Diagram, presentation=None) -> RegionClassification:
    reg2, reg4 = set(), set()
    T: set[str] = set()
    ns = {}
    for f in d.inner_faces():
        n = face_n(d, f, presentation)
        ns[f] = n
        if n == 2:
            reg2.add(f)
        else:
            reg4.add(f)
            T |= d.face_word(f).support()
    return RegionClassification(reg2, reg4, T, ns)


def region_degree(d: Diagram, f: int) -> int:
    """Edges of f in the map with valency-2 vertices suppressed: runs of the
    face walk along a single neighbouring face."""
    walk = d.face_walk(f)
    nb = [d.ftag[d.opp[x]] for x in walk]
    val = d.valencies()
    cuts = 0
    for i in range(len(walk)):
        j = (i + 1) % len(walk)
        joint = d.origin[walk[j]]
        if nb[i] != nb[j] or val[joint] != 2:
            cuts += 1
    return max(cuts, 1)


def diagram_C4T4(d: Diagram) -> bool:
    """Inner vertices have valency >= 4 and regions disjoint from the
    boundary have >= 4 edges."""
    bverts = d.boundary_vertices()
    for v, k in d.valencies().items():
        if v not in bverts and k < 4:
            return False
    for f in d.inner_faces():
        if any(d.origin[x] in bverts for x in d.face_walk(f)):
            continue
        if region_degree(d, f) < 4:
            return False
    return True


def is_cancelling_pair(d: Diagram, x: int) -> bool:
    """Faces on both sides of the edge of x are mirror images across it."""
    y = d.opp[x]
    f, g = d.ftag[x], d.ftag[y]
    if f == g or OUTER in (f, g):
        return False
    wf = d.face_word(f, x)
    wg = d.face_word(g, y)
    if len(wf) != len(wg):
        return False
    mirror = Word((inv(wf.letters[0]),)) + wf[1:].inverse()
    if wg != mirror:
        return False
    if d.corner:
        cf = [d.corner.get(z, Word()) for z in d.face_walk(f, x)]
        cg = [d.corner.get(z, Word()) for z in d.face_walk(g, y)]
        if [free_reduce(c) for c in cf[1:]] != [free_reduce(c.inverse()) for c in reversed(cg[1:])]:
            return False
    return True


def is_reduced(d: Diagram) -> bool:
    return not any(is_cancelling_pair(d, x) for x in d.edges())


def remove_cancelling_pair(d: Diagram, x: int) -> None:
    """Excise a cancelling pair across the edge of x and sew the hole."""
    if not is_cancelling_pair(d, x):
        raise DiagramError("not a cancelling pair")
    pa = d.phi_inv(x)  # last dart of the first face before x
    d.delete_edge(x)
    d.reduce_face_at(pa)


def free_reduce_diagram(d: Diagram) -> int:
    """Remove cancelling pairs until none remain; returns how many."""
    count = 0
    while True:
        hit = next((x for x in d.edges() if is_cancelling_pair(d, x)), None)
        if hit is None:
            return count
        remove_cancelling_pair(d, hit)
        count += 1


# ----------------------------------------------------------------------
# text formats


def _tok(letter: Letter) -> str:
    return letter[0] if letter[1] > 0 else f"{letter[0]}^-1"


def serialize(d: Diagram) -> str:
    lines = [f"diagram {d.kind}"]
    for v in sorted(d.vertices):
        if not any(o == v for o in d.origin.values()):
            lines.append(f"vertex {v}")
    for x in sorted(d.origin):
        extra = ""
        c = d.corner.get(x)
        if c:
            extra = " corner=" + ",".join(_tok(l) for l in c.letters)
        lines.append(f"dart {x} vertex={d.origin[x]} label={_tok(d.label[x])} opp={d.opp[x]} next={d.rot[x]}{extra}")
    for f, walk in sorted(d.faces().items()):
        tag = "outer" if f == OUTER else str(f)
        lines.append(f"face {tag} : " + " ".join(map(str, walk)))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> Diagram:
    d = None
    face_lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "diagram":
                if len(parts) != 2 or parts[1] not in (PLANAR, SPHERICAL):
                    raise DiagramParseError("expected 'diagram planar|spherical'", no)
                d = Diagram(parts[1])
            elif d is None:
                raise DiagramParseError("missing 'diagram' header", no)
            elif parts[0] == "vertex":
                d.vertices.add(int(parts[1]))
            elif parts[0] == "dart":
                x = int(parts[1])
                kv = dict(p.split("=", 1) for p in parts[2:])
                d.origin[x] = int(kv["vertex"])
                d.vertices.add(d.origin[x])
                d.label[x] = Word.parse(kv["label"]).letters[0]
                d.opp[x] = int(kv["opp"])
                d.rot[x] = int(kv["next"])
                if "corner" in kv:
                    d.corner[x] = Word.parse(kv["corner"].replace(",", " "))
            elif parts[0] == "face":
                if ":" not in parts:
                    raise DiagramParseError("expected 'face <tag> : darts'", no)
                k = parts.index(":")
                tag = OUTER if parts[1] == "outer" else int(parts[1])
                face_lines.append((no, tag, [int(p) for p in parts[k + 1:]]))
            else:
                raise DiagramParseError(f"unknown record {parts[0]!r}", no)
        except DiagramParseError:
            raise
        except (KeyError, ValueError, IndexError) as exc:
            raise DiagramParseError(f"malformed record ({exc})", no) from None
    if d is None:
        raise DiagramParseError("empty diagram text")
    for x, y in d.rot.items():
        d.rinv[y] = x
    for no, tag, ds in face_lines:
        for x in ds:
            if x not in d.origin:
                raise DiagramParseError(f"unknown dart {x}", no)
            d.ftag[x] = tag
    for x in d.origin:
        if x not in d.ftag:
            raise DiagramParseError(f"dart {x} is not listed in any face")
        if x not in d.opp or d.opp[x] not in d.origin or x not in d.rot or d.rot[x] not in d.origin:
            raise DiagramParseError(f"dart {x} refers to unknown darts")
    d._dart = max(d.origin, default=-1) + 1
    d._vertex = max(d.vertices, default=-1) + 1
    d._face = max(d.ftag.values(), default=0) + 1
    return d


def to_dot(d: Diagram) -> str:
    lines = ["graph diagram {", "  node [shape=point];"]
    for v in sorted(d.vertices):
        lines.append(f'  v{v} [xlabel="{v}"];')
    for x in d.edges():
        lab = format_word(Word((d.label[x],)))
        f1, f2 = d.ftag[x], d.ftag[d.opp[x]]
        lines.append(f'  v{d.origin[x]} -- v{d.head(x)} [label="{lab}", dir=forward, tooltip="faces {f1}|{f2}"];')
    for f, walk in sorted(d.faces().items()):
        name = "outer" if f == OUTER else f"F{f}"
        lines.append(f'  // {name}: {format_word(Word(tuple(d.label[x] for x in walk)))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def boundary_darts(d: Diagram, basepoint: int | None = None) -> list[int]:
    """Darts read by boundary_word, in order; each lies inside the disc
    (its opposite is on the outer face)."""
    if not d.has_outer_darts():
        return []
    if basepoint is None:
        first = min((x for x in d.ftag if d.ftag[d.opp[x]] == OUTER and d.ftag[x] != OUTER), default=None)
        basepoint = d.phi(d.opp[first]) if first is not None else min(x for x, t in d.ftag.items() if t == OUTER)
    return [d.opp[x] for x in reversed(d.orbit(basepoint))]


# ----------------------------------------------------------------------
# square-lattice diagrams


def polyomino(cells: Iterable[tuple[int, int]], gens: tuple[str, str] = ("a", "b")) -> Diagram:
    """Diagram of unit squares labelled by the commutator of two generators,
    one square per lattice cell."""
    return lattice(cells, lambda x: gens[0], lambda y: gens[1])


def lattice(cells: Iterable[tuple[int, int]], col, row) -> Diagram:
    """Unit squares where cell (x, y) reads [col(x), row(y)]: horizontal edges
    carry the column generator and vertical edges the row generator."""
    cells = sorted(set(cells))
    if not cells:
        raise DiagramError("no cells")
    vid: dict[tuple[int, int], int] = {}

    def v(p):
        return vid.setdefault(p, len(vid))

    faces = []
    for x, y in cells:
        a, b = (col(x), 1), (row(y), 1)
        verts = [v((x, y)), v((x + 1, y)), v((x + 1, y + 1)), v((x, y + 1))]
        faces.append((verts, [a, b, inv(a), inv(b)]))
    return Diagram.from_faces(faces)


def grid(w: int, h: int, gens: tuple[str, str] = ("a", "b")) -> Diagram:
    return polyomino([(x, y) for x in range(w) for y in range(h)], gens)
