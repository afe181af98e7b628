"""Word problem pipeline: RAAG piling, dihedral Garside normal forms, a
brute-force Cayley oracle, an exact bounded-area search over relator
substitutions, and random trivial words."""

from __future__ import annotations

import math
import random
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .diagram import Diagram, OUTER
from .presentation import GraphError, LabeledGraph, Presentation, gamma2, parabolic, subgraph
from .words import (
    Cert,
    Letter,
    Word,
    abelianization_certificate,
    corollary3_peel,
    corollary4_peel,
    corollary5_route,
    cyclic_canonical,
    cyclic_reduce,
    free_reduce,
    inv,
    replay_substitution,
)


class Status(str, Enum):
    TRIVIAL = "TRIVIAL"
    NONTRIVIAL = "NONTRIVIAL"
    UNKNOWN = "UNKNOWN"


class CertKind(str, Enum):
    FREE = "FREE"
    ABELIANIZATION = "ABELIANIZATION"
    COROLLARY3 = "COROLLARY3"
    COROLLARY4 = "COROLLARY4"
    RAAG = "RAAG"
    PARABOLIC = "PARABOLIC"
    BFS = "BFS"
    SEARCH = "SEARCH"
    EXHAUSTED = "EXHAUSTED"


class ClassError(ValueError):
    """Raised when a graph has a label the search is not sound for."""


@dataclass(frozen=True)
class Step:
    """Rotate the cyclic word to pos, replace form[:k] by form[k:]^-1."""

    pos: int
    form: Word
    k: int


@dataclass
class SearchCaps:
    area_cap: int | None = None
    length_cap: int | None = None
    node_cap: int = 200_000
    time_cap: float | None = None
    rigorous: bool = False

    def __post_init__(self):
        for name in ("area_cap", "length_cap", "node_cap", "time_cap"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")

    def resolved(self, w: Word, p: Presentation) -> "SearchCaps":
        n = len(w)
        area = self.area_cap if self.area_cap is not None else max(1, n ** 6)
        if self.length_cap is not None:
            length = self.length_cap
        elif self.rigorous:
            length = area * p.max_relator_length + n
        else:
            length = n + 2 * p.max_relator_length
        return SearchCaps(area, length, self.node_cap, self.time_cap, self.rigorous)


@dataclass
class Verdict:
    status: Status
    kind: CertKind
    word: Word = field(default_factory=Word)
    trace: list[Step] | None = None
    detail: str = ""
    nodes: int = 0

    @property
    def area(self) -> int | None:
        return None if self.trace is None else len(self.trace)

    def replay(self) -> Word:
        return replay_trace(self.word, self.trace or [])


def replay_trace(w: Word, trace: Iterable[Step]) -> Word:
    cur = cyclic_reduce(w)[0]
    for s in trace:
        cur = replay_substitution(cur, s.pos, s.form, s.k)
    return cur


# ----------------------------------------------------------------------
# right-angled piling


def pile_stacks(w: Word, g2: LabeledGraph) -> dict[str, list[int]]:
    gens = set(g2.vertices)
    stacks: dict[str, list[int]] = {v: [] for v in g2.vertices}
    blockers = {v: [u for u in g2.vertices if u != v and g2.label(u, v) != 2] for v in g2.vertices}
    for x, e in w.letters:
        if x not in gens:
            raise GraphError(f"generator {x} is not in the graph")
        st = stacks[x]
        if st and st[-1] == -e and all(stacks[y] and stacks[y][-1] == 0 for y in blockers[x]):
            st.pop()
            for y in blockers[x]:
                stacks[y].pop()
        else:
            st.append(e)
            for y in blockers[x]:
                stacks[y].append(0)
    return stacks


def pile_decide(w: Word, g2: LabeledGraph) -> Status:
    """Triviality in the right-angled Artin group on the label-2 edges of g2."""
    stacks = pile_stacks(w, g2)
    return Status.TRIVIAL if all(not s for s in stacks.values()) else Status.NONTRIVIAL


def raag_trace(w: Word, g2: LabeledGraph) -> list[Step]:
    """Commutation moves emptying a word that is trivial in the RAAG.

    Repeatedly pick the closest cancelling pair x^e ... x^-e whose letters
    in between all commute with x and slide x^e one swap to the right; the
    least gap shrinks at every step, so the loop terminates."""
    cur = cyclic_reduce(w)[0]
    trace: list[Step] = []
    while cur:
        n = len(cur)
        L = cur.letters
        move = None
        best = n
        for i in range(n):
            x = L[i]
            for j in range(1, min(n, best)):
                y = L[(i + j) % n]
                if y == inv(x):
                    z = L[(i + 1) % n]
                    move, best = Step(i, Word((x, z, inv(x), inv(z))), 2), j
                    break
                if y[0] == x[0] or g2.label(x[0], y[0]) != 2:
                    break
        if move is None:
            raise ValueError("word is not trivial in the right-angled group")
        trace.append(move)
        cur = replay_substitution(cur, move.pos, move.form, move.k)
    return trace


# ----------------------------------------------------------------------
# dihedral Garside structure


class _Dihedral:
    """Positive monoid of the two-generator Artin group with label m.

    Simple elements are alternating words of length <= m, stored as
    (first letter index, length); length m is the Garside element."""

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("m must be at least 2")
        self.m = m

    def last(self, s):
        f, n = s
        return f if n % 2 == 1 else 1 - f

    def word(self, s) -> list[int]:
        f, n = s
        return [(f + i) % 2 for i in range(n)]

    def norm(self, s):
        return (0, self.m) if s[1] == self.m else (s if s[1] else (0, 0))

    def weight(self, s, t):
        """Left-weight the pair (s, t): move the largest prefix of t into s."""
        m = self.m
        if s[1] == m or t[1] == 0:
            return s, t
        if s[1] == 0:
            return self.norm(t), (0, 0)
        need = 1 - self.last(s)
        room = m - s[1]
        if t[1] == m:
            rest_first = (need + room) % 2
            return (0, m), self.norm((rest_first, m - room))
        if t[0] != need:
            return s, t
        k = min(room, t[1])
        s2 = self.norm((s[0], s[1] + k))
        t2 = self.norm(((t[0] + k) % 2, t[1] - k))
        return s2, t2

    def normal_form(self, letters: list[int]) -> tuple[int, list]:
        """Left-greedy normal form of a positive word: (Delta power, simples)."""
        seq = [(x, 1) for x in letters]
        changed = True
        while changed:
            changed = False
            for i in range(len(seq) - 2, -1, -1):
                a, b = self.weight(seq[i], seq[i + 1])
                if (a, b) != (seq[i], seq[i + 1]):
                    seq[i], seq[i + 1] = a, b
                    changed = True
            seq = [s for s in seq if s[1]]
        power = 0
        while seq and seq[0][1] == self.m:
            power += 1
            seq.pop(0)
        return power, seq


def dihedral_normal_form(w: Word, m: int, gens: tuple[str, str] | None = None) -> tuple[int, list[Word]]:
    """Garside normal form Delta^p s_1 ... s_r of w in the dihedral Artin group."""
    if gens is None:
        gens = tuple(sorted(w.support()))
    if len(gens) != 2 or not w.support() <= set(gens):
        raise ValueError("dihedral normal form needs exactly two generators")
    idx = {gens[0]: 0, gens[1]: 1}
    D = _Dihedral(m)
    pos: list[int] = []
    neg = 0
    for g, e in w.letters:
        x = idx[g]
        if e > 0:
            pos.append(x)
            continue
        # x^-1 = Delta^-1 v where v x = Delta; move Delta^-1 left past pos
        neg += 1
        if m % 2 == 1:
            pos = [1 - y for y in pos]
        first = (x + m + 1) % 2  # the Garside word ending with x starts here
        pos.extend((first + i) % 2 for i in range(m - 1))
    power, simples = D.normal_form(pos)
    words = [Word(tuple((gens[y], 1) for y in D.word(s))) for s in simples]
    return power - neg, words


def dihedral_decide(w: Word, m: int, gens: tuple[str, str] | None = None) -> Status:
    """Triviality in the Artin group on two generators with label m (0 for
    no edge, meaning the free group)."""
    if m == 0:
        return Status.TRIVIAL if not free_reduce(w) else Status.NONTRIVIAL
    supp = sorted(w.support())
    if gens is None:
        if len(supp) > 2:
            raise ValueError("word has more than two generators")
        gens = tuple(supp) if len(supp) == 2 else (supp[0] if supp else "a", "\0")
    power, simples = dihedral_normal_form(w, m, gens)
    return Status.TRIVIAL if power == 0 and not simples else Status.NONTRIVIAL


# ----------------------------------------------------------------------
# brute force oracle


@dataclass
class OracleResult:
    status: Status
    depth: int | None = None
    certificate: str = ""
    nodes: int = 0


def nontrivial_certificate(w: Word, g: LabeledGraph) -> str | None:
    """An independently checkable reason for w != 1, or None."""
    if abelianization_certificate(w, g).status == Cert.NONTRIVIAL:
        return "abelianization"
    supp = w.support()
    sub = subgraph(g, supp)
    if all(m == 2 for _, _, m in sub.edges):
        if pile_decide(w, sub) == Status.NONTRIVIAL:
            return "pile"
    if len(supp) == 2:
        a, b = sorted(supp)
        if dihedral_decide(w, g.label(a, b), (a, b)) == Status.NONTRIVIAL:
            return "dihedral"
    r = retraction_certificate(w, g)
    if r:
        return r
    return None


def bfs_oracle(w: Word, p: Presentation, radius: int, node_cap: int = 500_000) -> OracleResult:
    """Breadth-first search over single relator insertions on linear words."""
    start = free_reduce(w)
    if not start:
        return OracleResult(Status.TRIVIAL, 0)
    limit = len(start) + radius
    forms = [f.letters for f, _, _, _ in p.cyclic_forms]
    seen = {start.letters: 0}
    queue = deque([start.letters])
    found = None
    while queue and found is None:
        cur = queue.popleft()
        d = seen[cur]
        for i in range(len(cur) + 1):
            for f in forms:
                nxt = free_reduce(cur[:i] + f + cur[i:]).letters
                if len(nxt) > limit or nxt in seen:
                    continue
                seen[nxt] = d + 1
                if not nxt:
                    found = d + 1
                    break
                queue.append(nxt)
            if found is not None:
                break
        if len(seen) > node_cap:
            break
    if found is not None:
        return OracleResult(Status.TRIVIAL, found, nodes=len(seen))
    cert = nontrivial_certificate(w, p.source) if p.source is not None else None
    if cert is None and p.source is None and not p.relators and free_reduce(w):
        cert = "free group"
    if cert:
        return OracleResult(Status.NONTRIVIAL, None, cert, len(seen))
    return OracleResult(Status.UNKNOWN, None, "", len(seen))


def trivial_closure(p: Presentation, limit: int) -> set[tuple]:
    """All freely reduced words of length <= limit joined to the empty word
    by single relator insertions through words of length <= limit.

    Insertions are reversible, so w lies in this set exactly when
    bfs_oracle(w, p, limit - |w|) reaches the empty word (without a node cap)."""
    forms = [f.letters for f, _, _, _ in p.cyclic_forms]
    seen = {()}
    queue = deque([()])
    while queue:
        cur = queue.popleft()
        for i in range(len(cur) + 1):
            head, tail = cur[:i], cur[i:]
            for f in forms:
                # both pieces are reduced, so cancellation only happens at the joins
                out = list(head)
                for x in f:
                    if out and out[-1] == (x[0], -x[1]):
                        out.pop()
                    else:
                        out.append(x)
                j = 0
                while j < len(tail) and out and out[-1] == (tail[j][0], -tail[j][1]):
                    out.pop()
                    j += 1
                if len(out) + len(tail) - j > limit:
                    continue
                nxt = tuple(out) + tail[j:]
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return seen


def bfs_verdicts(words: Iterable[Word], p: Presentation, radius: int) -> list[OracleResult]:
    """bfs_oracle over many words at once, sharing one closure per length."""
    words = [free_reduce(w) for w in words]
    closures: dict[int, set] = {}
    out = []
    for w in words:
        if not w:
            out.append(OracleResult(Status.TRIVIAL, 0))
            continue
        lim = len(w) + radius
        if lim not in closures:
            closures[lim] = trivial_closure(p, lim)
        if w.letters in closures[lim]:
            out.append(OracleResult(Status.TRIVIAL))
            continue
        cert = nontrivial_certificate(w, p.source) if p.source is not None else None
        out.append(OracleResult(Status.NONTRIVIAL, None, cert) if cert else OracleResult(Status.UNKNOWN))
    return out


# ----------------------------------------------------------------------
# lower bounds from planar projections


def _winding_mass(letters: list[tuple[int, int]]) -> int | None:
    """Total |winding number| of the closed lattice path given by unit
    steps (axis, sign); None if the path does not close."""
    x = y = 0
    cols: dict[int, list[tuple[int, int]]] = {}
    for axis, s in letters:
        if axis == 0:
            c = x if s > 0 else x - 1
            cols.setdefault(c, []).append((y, s))
            x += s
        else:
            y += s
    if x or y:
        return None
    total = 0
    for edges in cols.values():
        edges.sort()
        # winding of cell (c, j) is the signed count of steps above height j
        acc = sum(s for _, s in edges)
        prev = edges[0][0]
        for h, s in edges:
            total += abs(acc) * (h - prev)
            acc -= s
            prev = h
    return total


@dataclass
class _PairBound:
    a: str
    b: str
    m: int
    unit: int


class LowerBound:
    """Admissible area lower bound for a fixed graph.

    For generators a, b whose other incident labels are all even, killing
    every other generator is a retraction onto the parabolic on {a, b}.
    Each application of the a-b relator moves the winding mass of the
    projected lattice loop by at most its own mass; the other relators
    project to freely trivial words."""

    def __init__(self, g: LabeledGraph):
        self.graph = g
        self.pairs: list[_PairBound] = []
        vs = g.vertices
        for i, a in enumerate(vs):
            for b in vs[i + 1:]:
                others = [m for x, y, m in g.edges if (x in (a, b)) != (y in (a, b))]
                if any(m % 2 for m in others):
                    continue
                m = g.label(a, b)
                if m % 2:
                    continue
                unit = 0
                if m:
                    from .presentation import artin_relator
                    r = artin_relator(a, b, m)
                    unit = _winding_mass([(0 if x == a else 1, s) for x, s in r.letters]) or 0
                self.pairs.append(_PairBound(a, b, m, unit))

    def __call__(self, w: Word) -> float:
        total = 0
        for pb in self.pairs:
            steps = [(0 if x == pb.a else 1, s) for x, s in w.letters if x in (pb.a, pb.b)]
            mass = _winding_mass(steps)
            if mass is None:
                return math.inf
            if mass == 0:
                continue
            if pb.unit == 0:
                return math.inf
            total += -(-mass // pb.unit)
        return total


def retraction_certificate(w: Word, g: LabeledGraph) -> str | None:
    """w != 1 when its image under a retraction onto a two-generator
    parabolic is nontrivial there."""
    vs = g.vertices
    supp = w.support()
    for i, a in enumerate(vs):
        for b in vs[i + 1:]:
            if a not in supp and b not in supp:
                continue
            others = [m for x, y, m in g.edges if (x in (a, b)) != (y in (a, b))]
            if any(m % 2 for m in others):
                continue
            image = Word(tuple(x for x in w.letters if x[0] in (a, b)))
            if dihedral_decide(image, g.label(a, b), (a, b)) == Status.NONTRIVIAL:
                return f"retraction onto {a},{b}"
    return None


# ----------------------------------------------------------------------
# exact bounded-area search


def _successors(w: tuple, p: Presentation, length_cap: int):
    n = len(w)
    out = {}
    for pos in range(n):
        first = w[pos]
        for form, _, _, _ in p.forms_by_first.get(first, ()):
            f = form.letters
            L = 1
            top = min(len(f), n)
            while L < top and w[(pos + L) % n] == f[L]:
                L += 1
            for k in range(1, L + 1):
                rest = tuple(w[(pos + k + t) % n] for t in range(n - k))
                new = tuple(inv(x) for x in reversed(f[k:])) + rest
                red = cyclic_reduce(Word(new))[0].letters
                if len(red) > length_cap:
                    continue
                key = cyclic_canonical(Word(red))
                if key not in out:
                    out[key] = (red, Step(pos, form, k))
    return out


class _Budget(Exception):
    pass


class AreaSearch:
    """Iterative deepening A* over substitution moves on cyclic words.

    A move cuts a boundary region off a van Kampen diagram, so the least
    number of moves reaching the empty word is exactly the area, given
    that intermediate words stay within the length cap."""

    def __init__(self, p: Presentation, caps: SearchCaps, h: LowerBound | None = None):
        self.p = p
        self.caps = caps
        self.h = h or (LowerBound(p.source) if p.source is not None else (lambda w: 0))
        self.lb: dict[tuple, float] = {}
        self.succ: dict[tuple, dict] = {}
        self.nodes = 0
        self.deadline = None
        self.length_hit = False

    def _h(self, key: tuple, w: tuple) -> float:
        v = self.lb.get(key)
        if v is None:
            v = self.h(Word(w))
            self.lb[key] = v
        return v

    def _expand(self, key, w):
        s = self.succ.get(key)
        if s is None:
            self.nodes += 1
            if self.nodes > self.caps.node_cap:
                raise _Budget("node cap")
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise _Budget("time cap")
            s = _successors(w, self.p, self.caps.length_cap)
            s = sorted(s.items(), key=lambda kv: (self._h(kv[0], kv[1][0]), len(kv[1][0]), kv[0]))
            if len(self.succ) < 400_000:
                self.succ[key] = s
        return s

    def _dfs(self, key, w, g, bound):
        f = g + self._h(key, w)
        if f > bound:
            return f, None
        if not w:
            return f, []
        best = math.inf
        for ckey, (cw, step) in self._expand(key, w):
            val, sol = self._dfs(ckey, cw, g + 1, bound)
            if sol is not None:
                return val, [step] + sol
            best = min(best, val)
        # every completion from here costs at least best - g
        self.lb[key] = max(self.lb.get(key, 0), best - g)
        return best, None

    def solve(self, w: Word, start_bound: int = 0) -> tuple[Status, list[Step] | None, str]:
        cur = cyclic_reduce(w)[0]
        if not cur:
            return Status.TRIVIAL, [], ""
        if self.caps.time_cap:
            self.deadline = time.monotonic() + self.caps.time_cap
        key = cyclic_canonical(cur)
        h0 = self._h(key, cur.letters)
        if h0 == math.inf:
            return Status.NONTRIVIAL, None, "projection"
        bound = max(start_bound, h0)
        while bound <= self.caps.area_cap:
            try:
                val, sol = self._dfs(key, cur.letters, 0, bound)
            except _Budget as exc:
                return Status.UNKNOWN, None, str(exc)
            if sol is not None:
                return Status.TRIVIAL, sol, ""
            if val == math.inf:
                if self.caps.rigorous:
                    return Status.NONTRIVIAL, None, "search space exhausted"
                return Status.UNKNOWN, None, "search space exhausted within the length cap"
            bound = max(bound + 1, int(val))
        if self.caps.rigorous and self.caps.area_cap >= len(cur) ** 6:
            return Status.NONTRIVIAL, None, "no trace within the isoperimetric bound"
        return Status.UNKNOWN, None, "area cap"


def _check_class(p: Presentation) -> None:
    if not p.no_three:
        raise ClassError("graphs with a label 3 are outside the solver's scope")


def bounded_diagram_search(w: Word, p: Presentation, caps: SearchCaps | None = None) -> Verdict:
    _check_class(p)
    cur = cyclic_reduce(w)[0]
    caps = (caps or SearchCaps()).resolved(cur, p)
    s = AreaSearch(p, caps)
    status, trace, why = s.solve(cur)
    if status == Status.TRIVIAL:
        return Verdict(status, CertKind.SEARCH, cur, trace, nodes=s.nodes)
    if status == Status.NONTRIVIAL:
        kind = CertKind.PARABOLIC if why == "projection" else CertKind.SEARCH
        return Verdict(status, kind, cur, None, why, s.nodes)
    return Verdict(status, CertKind.EXHAUSTED, cur, None, why, s.nodes)


def min_area(w: Word, p: Presentation, cap: int | None = None, caps: SearchCaps | None = None) -> int | None:
    """Least number of relator applications emptying w; None when a cap binds."""
    cur = cyclic_reduce(w)[0]
    caps = caps or SearchCaps(area_cap=cap)
    if cap is not None:
        caps = SearchCaps(cap, caps.length_cap, caps.node_cap, caps.time_cap, caps.rigorous)
    caps = caps.resolved(cur, p)
    status, trace, _ = AreaSearch(p, caps).solve(cur)
    return len(trace) if status == Status.TRIVIAL else None


def min_area_trace(w: Word, p: Presentation, caps: SearchCaps | None = None) -> list[Step] | None:
    cur = cyclic_reduce(w)[0]
    caps = (caps or SearchCaps()).resolved(cur, p)
    status, trace, _ = AreaSearch(p, caps).solve(cur)
    return trace if status == Status.TRIVIAL else None


# ----------------------------------------------------------------------
# pipeline


def _attach_trace(v: Verdict, g: LabeledGraph, caps: SearchCaps) -> Verdict:
    """TRIVIAL verdicts from exact certificates still get a witness trace."""
    if v.status != Status.TRIVIAL or v.trace is not None:
        return v
    p = parabolic(g, v.word.support())
    if v.kind == CertKind.RAAG:
        try:
            v.trace = raag_trace(v.word, gamma2(subgraph(g, v.word.support())))
            return v
        except ValueError:
            pass
    found = bounded_diagram_search(v.word, p, caps)
    if found.status == Status.TRIVIAL:
        v.trace = found.trace
    else:
        v.detail = (v.detail + "; " if v.detail else "") + "no witness trace within caps"
    return v


def decide(w: Word, g: LabeledGraph, caps: SearchCaps | None = None, _depth: int = 0) -> Verdict:
    if not g.no_three:
        raise ClassError("graphs with a label 3 are outside the solver's scope")
    caps = caps or SearchCaps()
    unknown = w.support() - set(g.vertices)
    if unknown:
        raise GraphError(f"word uses generators outside the graph: {sorted(unknown)}")
    cur = cyclic_reduce(w)[0]
    if not cur:
        return Verdict(Status.TRIVIAL, CertKind.FREE, cur, [])
    if abelianization_certificate(cur, g).status == Cert.NONTRIVIAL:
        return Verdict(Status.NONTRIVIAL, CertKind.ABELIANIZATION, cur, detail="exponent sums")
    # syllable peeling: a nontrivial peeled word certifies the original
    for peel, kind in ((corollary3_peel, CertKind.COROLLARY3), (corollary4_peel, CertKind.COROLLARY4)):
        red = peel(cur)
        if red.status == Cert.NONTRIVIAL:
            return Verdict(Status.NONTRIVIAL, kind, cur, detail=f"generator {red.gen}")
        if red.status == Cert.PEELED and _depth < 8:
            sub = decide(red.word, g, caps, _depth + 1)
            if sub.status == Status.NONTRIVIAL:
                return Verdict(Status.NONTRIVIAL, kind, cur, detail=f"peeled {red.gen}: {sub.kind.value}")
    if corollary5_route(cur, g).status == Cert.ROUTE_TO_RAAG:
        st = pile_decide(cur, gamma2(g))
        return _attach_trace(Verdict(st, CertKind.RAAG, cur, detail="syllable counts at most 3"), g, caps)
    supp = sorted(cur.support())
    if len(supp) <= 2:
        a, b = (supp + ["\0"])[:2]
        m = g.label(a, b) if len(supp) == 2 else 2
        st = dihedral_decide(cur, m, (a, b))
        return _attach_trace(Verdict(st, CertKind.PARABOLIC, cur, detail=f"dihedral m={m}"), g, caps)
    sub = subgraph(g, supp)
    if all(m == 2 for _, _, m in sub.edges):
        st = pile_decide(cur, sub)
        return _attach_trace(Verdict(st, CertKind.RAAG, cur, detail="right-angled support"), g, caps)
    why = retraction_certificate(cur, g)
    if why:
        return Verdict(Status.NONTRIVIAL, CertKind.PARABOLIC, cur, detail=why)
    return bounded_diagram_search(cur, parabolic(g, supp), caps)


# ----------------------------------------------------------------------
# sampling and witnesses


@dataclass
class Sample:
    word: Word
    factors: list[tuple[Word, Word]]  # (conjugator f, relator form R^e); product of f R f^-1

    @property
    def witness_area(self) -> int:
        return len(self.factors)


def _random_word(rng: random.Random, gens: tuple[str, ...], n: int) -> Word:
    out: list[Letter] = []
    while len(out) < n:
        x = (rng.choice(gens), rng.choice((1, -1)))
        if out and out[-1] == inv(x):
            continue
        out.append(x)
    return Word(tuple(out))


def sample_with_witness(p: Presentation, k: int, conj_len: int, seed, retries: int = 100) -> Sample:
    if k < 1:
        raise ValueError("k must be at least 1")
    if not p.relators:
        raise ValueError("presentation has no relators")
    rng = random.Random(seed)
    for _ in range(retries):
        factors = []
        total = Word()
        for _ in range(k):
            r, _ = rng.choice(p.relators)
            r = r.rotate(rng.randrange(len(r)))
            if rng.random() < 0.5:
                r = r.inverse()
            f = _random_word(rng, p.generators, conj_len)
            factors.append((f, r))
            total = total + f + r + f.inverse()
        word = cyclic_reduce(total)[0]
        if word:
            return Sample(word, factors)
    raise ValueError("could not sample a nonempty word")


def sample_trivial_word(p: Presentation, k: int, conj_len: int, seed) -> Word:
    return sample_with_witness(p, k, conj_len, seed).word


def trace_factors(w: Word, trace: list[Step]) -> list[tuple[Word, Word]]:
    """Write w as a product of conjugates A_i r_i A_i^-1 following a trace.

    Each step rewrites the rotation c^-1 W c = r' v^-1 rest as r' * new,
    and new = d W' d^-1, so W = (c r' c^-1)(c d) W' (c d)^-1."""
    cur = cyclic_reduce(w)[0]
    if cur != free_reduce(w):
        raise ValueError("trace factors need a cyclically reduced word")
    acc = Word()
    out = []
    for s in trace:
        c = cur[: s.pos]
        out.append((free_reduce(acc + c), s.form))
        rot = cur.rotate(s.pos)
        new = s.form[s.k:].inverse() + rot[s.k:]
        nxt, d = cyclic_reduce(new)
        # cyclic_reduce works on the freely reduced word
        acc = acc + c + d
        cur = nxt
    if cur:
        raise ValueError("trace does not empty the word")
    return out


def bouquet(factors: list[tuple[Word, Word]]) -> Diagram:
    """Lollipop diagram with boundary prod A_i r_i A_i^-1 (not reduced)."""
    d = Diagram()
    base = d.new_vertex()
    blocks: list[list[int]] = []
    for stem, face in factors:
        stem = free_reduce(stem)
        cur = base
        first = None
        last_in = None  # dart at the end of the stem pointing back up
        for letter in stem.letters:
            v = d.new_vertex()
            x, y = d.new_dart(), d.new_dart()
            d.origin[x], d.origin[y] = cur, v
            d.label[x], d.label[y] = letter, inv(letter)
            d.opp[x], d.opp[y] = y, x
            if first is None:
                first = x
            else:
                d.set_rot(last_in, x)
                d.set_rot(x, last_in)
            last_in = y
            cur = v
        L = len(face)
        verts = [cur] + [d.new_vertex() for _ in range(L - 1)]
        fd = []
        for j, letter in enumerate(face.letters):
            x, y = d.new_dart(), d.new_dart()
            d.origin[x], d.origin[y] = verts[j], verts[(j + 1) % L]
            d.label[x], d.label[y] = letter, inv(letter)
            d.opp[x], d.opp[y] = y, x
            fd.append(x)
        for j in range(1, L):
            d.set_rot(d.opp[fd[j - 1]], fd[j])
            d.set_rot(fd[j], d.opp[fd[j - 1]])
        tag = d.new_face_id()
        for x in fd:
            d.ftag[x] = tag
        closing = d.opp[fd[-1]]
        if first is None:
            blocks.append([closing, fd[0]])
        else:
            d.set_rot(closing, fd[0])
            d.set_rot(fd[0], last_in)
            d.set_rot(last_in, closing)
            blocks.append([first])
    order = [x for blk in reversed(blocks) for x in blk]
    for i, x in enumerate(order):
        d.set_rot(x, order[(i + 1) % len(order)])
    for x in d.origin:
        d.ftag.setdefault(x, OUTER)
    d.retag()
    return d


def diagram_from_trace(w: Word, trace: list[Step]) -> Diagram:
    d = bouquet(trace_factors(w, trace))
    d.reduce_boundary()
    return d
