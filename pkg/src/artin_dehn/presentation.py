"""Labelled defining graphs, Artin relators, and presentation-level
small-cancellation checks (pieces, C(p), T(q))."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .words import Letter, Word, check_name, inv


class GraphError(ValueError):
    pass


class GraphParseError(GraphError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


@dataclass(frozen=True)
class LabeledGraph:
    """Simple graph on generator names with integer labels m >= 2.

    A missing edge means the two generators generate a free subgroup."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            check_name(v)
            if v in seen:
                raise GraphError(f"duplicate generator {v}")
            seen.add(v)
        norm = {}
        for a, b, m in self.edges:
            if a not in seen or b not in seen:
                raise GraphError(f"edge {a}-{b} uses an unknown generator")
            if a == b:
                raise GraphError(f"loop at {a}")
            if m < 2:
                raise GraphError(f"label {m} on {a}-{b} is below 2")
            key = (min(a, b), max(a, b))
            if key in norm:
                raise GraphError(f"repeated edge {key[0]}-{key[1]}")
            norm[key] = int(m)
        object.__setattr__(self, "edges", tuple((a, b, norm[(a, b)]) for a, b in sorted(norm)))

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, int]] = ()) -> "LabeledGraph":
        return cls(tuple(vertices), tuple(edges))

    @cached_property
    def _labels(self) -> dict:
        out = {}
        for a, b, m in self.edges:
            out[(a, b)] = m
            out[(b, a)] = m
        return out

    def label(self, a: str, b: str) -> int:
        """Edge label, or 0 when a and b are not adjacent."""
        return self._labels.get((a, b), 0)

    def edge_list(self) -> tuple[tuple[str, str, int], ...]:
        return self.edges

    @property
    def no_three(self) -> bool:
        return all(m != 3 for _, _, m in self.edges)

    def is_raag(self) -> bool:
        return all(m == 2 for _, _, m in self.edges)

    def neighbours(self, a: str) -> list[str]:
        return [v for v in self.vertices if self.label(a, v)]

    def to_text(self) -> str:
        lines = ["gens " + " ".join(self.vertices)]
        lines += [f"edge {a} {b} {m}" for a, b, m in self.edges]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> LabeledGraph:
    gens: list[str] = []
    edges = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "gens":
            for p in parts[1:]:
                try:
                    gens.append(check_name(p))
                except ValueError as exc:
                    raise GraphParseError(str(exc), no) from None
        elif parts[0] == "edge":
            if len(parts) != 4:
                raise GraphParseError("expected 'edge <a> <b> <m>'", no)
            try:
                m = int(parts[3])
            except ValueError:
                raise GraphParseError(f"bad label {parts[3]!r}", no) from None
            edges.append((parts[1], parts[2], m))
        else:
            raise GraphParseError(f"unknown directive {parts[0]!r}", no)
    try:
        return LabeledGraph(tuple(gens), tuple(edges))
    except GraphError as exc:
        raise GraphParseError(str(exc)) from None


def load_graph(path: str) -> LabeledGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def artin_relator(a: str, b: str, m: int) -> Word:
    """Braid-type relator of label m on generators a, b."""
    if a == b or m < 2:
        raise GraphError(f"invalid edge ({a}, {b}, {m})")
    A, B = (a, 1), (b, 1)
    if m % 2 == 0:
        k = m // 2
        return Word((A, B) * k + (inv(A), inv(B)) * k)
    n = (m - 1) // 2
    return Word((A, B) * n + (A,) + (inv(B), inv(A)) * n + (inv(B),))


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[tuple[Word, tuple[str, str]], ...]
    source: LabeledGraph | None = None

    @property
    def words(self) -> list[Word]:
        return [r for r, _ in self.relators]

    @property
    def max_relator_length(self) -> int:
        return max((len(r) for r, _ in self.relators), default=0)

    @property
    def no_three(self) -> bool:
        return self.source is None or self.source.no_three

    @cached_property
    def cyclic_forms(self) -> tuple[tuple[Word, int, int, int], ...]:
        """All rotations of relators and their inverses as
        (word, relator index, orientation, shift); duplicates kept once."""
        out = []
        seen = set()
        for idx, (r, _) in enumerate(self.relators):
            for eps, w in ((1, r), (-1, r.inverse())):
                for s in range(len(w)):
                    f = w.rotate(s)
                    if f.letters in seen:
                        continue
                    seen.add(f.letters)
                    out.append((f, idx, eps, s))
        return tuple(out)

    @cached_property
    def forms_by_first(self) -> dict[Letter, list[tuple[Word, int, int, int]]]:
        out: dict[Letter, list] = {}
        for f in self.cyclic_forms:
            out.setdefault(f[0].letters[0], []).append(f)
        return out

    @cached_property
    def relator_keys(self) -> dict:
        """Map from every cyclic form (letters) to (relator index, orientation)."""
        return {f.letters: (idx, eps) for f, idx, eps, _ in self.cyclic_forms}


def presentation_from_graph(g: LabeledGraph) -> Presentation:
    rels = tuple((artin_relator(a, b, m), (a, b)) for a, b, m in g.edges)
    return Presentation(g.vertices, rels, g)


def gamma2(g: LabeledGraph) -> LabeledGraph:
    return LabeledGraph(g.vertices, tuple(e for e in g.edges if e[2] == 2))


def subgraph(g: LabeledGraph, sub: Iterable[str]) -> LabeledGraph:
    sub = set(sub)
    unknown = sub - set(g.vertices)
    if unknown:
        raise GraphError(f"unknown generators {sorted(unknown)}")
    verts = tuple(v for v in g.vertices if v in sub)
    return LabeledGraph(verts, tuple(e for e in g.edges if e[0] in sub and e[1] in sub))


def parabolic(g: LabeledGraph, sub: Iterable[str]) -> Presentation:
    return presentation_from_graph(subgraph(g, sub))


@dataclass
class PieceTable:
    pieces: set = field(default_factory=set)
    max_piece_length: int = 0
    factorization: list = field(default_factory=list)


def _occurrences(p: Presentation) -> list[tuple[int, int, int, tuple[Letter, ...]]]:
    occ = []
    for idx, (r, _) in enumerate(p.relators):
        for eps, w in ((1, r), (-1, r.inverse())):
            for s in range(len(w)):
                occ.append((idx, eps, s, w.letters))
    return occ


def _common_prefix(u: tuple, i: int, v: tuple, j: int) -> int:
    n = min(len(u), len(v))
    k = 0
    while k < n and u[(i + k) % len(u)] == v[(j + k) % len(v)]:
        k += 1
    return k


def compute_pieces(p: Presentation) -> PieceTable:
    """Pieces among the cyclic closure of the relators and their inverses.

    Two occurrences are the same only when relator, orientation and start
    position all agree."""
    occ = _occurrences(p)
    table = PieceTable()
    longest: dict[tuple[int, int, int], int] = {}
    by_first: dict[Letter, list] = {}
    for o in occ:
        by_first.setdefault(o[3][o[2]], []).append(o)
    for group in by_first.values():
        for x in group:
            best = 0
            for y in group:
                if x[:3] == y[:3]:
                    continue
                k = _common_prefix(x[3], x[2], y[3], y[2])
                best = max(best, k)
                for L in range(1, k + 1):
                    table.pieces.add(Word(tuple(x[3][(x[2] + t) % len(x[3])] for t in range(L))))
            longest[x[:3]] = best
    table.max_piece_length = max((len(w) for w in table.pieces), default=0)
    for idx, (r, _) in enumerate(p.relators):
        n = len(r)
        reach = [longest[(idx, 1, s)] for s in range(n)]
        table.factorization.append(_min_cover(reach))
    return table


def _min_cover(reach: list[int]) -> int | None:
    """Fewest pieces whose concatenation spells the cyclic relator, given the
    longest piece starting at each position; None if impossible."""
    n = len(reach)
    if any(r == 0 for r in reach):
        return None
    best = None
    for start in range(n):
        # breadth-first jump game along the cut-open word
        dist = {0: 0}
        frontier = [0]
        while frontier and n not in dist:
            nxt = []
            for pos in frontier:
                for L in range(1, reach[(start + pos) % n] + 1):
                    q = pos + L
                    if q > n or q in dist:
                        continue
                    dist[q] = dist[pos] + 1
                    nxt.append(q)
            frontier = nxt
        if n in dist and (best is None or dist[n] < best):
            best = dist[n]
    return best


def check_Cp(p: Presentation, k: int, table: PieceTable | None = None) -> bool:
    table = table or compute_pieces(p)
    return all(f is None or f >= k for f in table.factorization)


def check_Tq(p: Presentation, q: int) -> bool:
    """T(q): no cyclic chain of 3 <= h < q symmetrized relators in which every
    consecutive product cancels and no neighbours are mutually inverse.

    Cancellation only involves first and last letters, so the search runs
    over (form) -> (form) transitions and counts closed walks."""
    if q < 3:
        raise ValueError("q must be at least 3")
    forms = [f.letters for f, _, _, _ in p.cyclic_forms]
    index = {f: i for i, f in enumerate(forms)}
    inverse_of = [index.get(Word(f).inverse().letters) for f in forms]
    succ: list[list[int]] = []
    for i, f in enumerate(forms):
        want = inv(f[-1])
        succ.append([j for j, g in enumerate(forms) if g[0] == want and j != inverse_of[i]])
    for h in range(3, q):
        for start in range(len(forms)):
            # walks of length h returning to start
            layer = {start}
            for _ in range(h - 1):
                layer = {j for i in layer for j in succ[i]}
            if any(start in succ[i] for i in layer):
                return False
    return True
