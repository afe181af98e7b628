"""Free-group words, reductions, length functions and the syllable-counting
decision reductions used by the solver pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

Letter = tuple[str, int]

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


class WordParseError(ValueError):
    pass


def check_name(name: str) -> str:
    if not _NAME.match(name):
        raise ValueError(f"invalid generator name {name!r}")
    return name


def inv(letter: Letter) -> Letter:
    return (letter[0], -letter[1])


@dataclass(frozen=True, order=True)
class Word:
    """An element of the free group, stored as a tuple of (generator, sign)
    letters. Reduction is never implicit."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def of(cls, letters: Iterable[Letter]) -> "Word":
        return cls(tuple((g, 1 if s > 0 else -1) for g, s in letters))

    @classmethod
    def parse(cls, text: str) -> "Word":
        out: list[Letter] = []
        for tok in text.replace(",", " ").split():
            if tok in ("1", "e"):
                continue
            m = _TOKEN.match(tok)
            if not m:
                raise WordParseError(f"bad word token {tok!r}")
            gen, exp = m.group(1), m.group(2)
            k = 1 if exp is None else int(exp)
            if k == 0:
                raise WordParseError(f"zero exponent in token {tok!r}")
            out.extend([(gen, 1 if k > 0 else -1)] * abs(k))
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.letters[i])
        return self.letters[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(inv(x) for x in reversed(self.letters)))

    def rotate(self, k: int) -> "Word":
        if not self.letters:
            return self
        k %= len(self.letters)
        return Word(self.letters[k:] + self.letters[:k])

    def support(self) -> frozenset[str]:
        return frozenset(g for g, _ in self.letters)

    def __str__(self) -> str:
        return format_word(self)


def format_word(w: Word | Sequence[Letter]) -> str:
    letters = w.letters if isinstance(w, Word) else tuple(w)
    if not letters:
        return "1"
    parts = []
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        g, s = letters[i]
        k = (j - i) * s
        parts.append(g if k == 1 else f"{g}^{k}")
        i = j
    return " ".join(parts)


def free_reduce(w: Word | Sequence[Letter]) -> Word:
    letters = w.letters if isinstance(w, Word) else w
    stack: list[Letter] = []
    for x in letters:
        if stack and stack[-1][0] == x[0] and stack[-1][1] == -x[1]:
            stack.pop()
        else:
            stack.append(x)
    return Word(tuple(stack))


def is_reduced(w: Word) -> bool:
    L = w.letters
    return all(not (L[i][0] == L[i + 1][0] and L[i][1] == -L[i + 1][1]) for i in range(len(L) - 1))


def is_cyclically_reduced(w: Word) -> bool:
    if not is_reduced(w):
        return False
    if len(w) < 2:
        return True
    return w.letters[0] != inv(w.letters[-1])


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return (w', c) with w' cyclically reduced and w = c w' c^-1 in F."""
    r = free_reduce(w).letters
    i, j = 0, len(r)
    while j - i >= 2 and r[i] == inv(r[j - 1]):
        i += 1
        j -= 1
    return Word(r[i:j]), Word(r[:i])


def cyclic_canonical(w: Word) -> tuple[Letter, ...]:
    """Canonical key of a cyclically reduced word up to rotation and inversion."""
    L = w.letters
    if not L:
        return ()
    best = None
    for cand in (L, w.inverse().letters):
        for k in range(len(cand)):
            r = cand[k:] + cand[:k]
            if best is None or r < best:
                best = r
    return best


@dataclass(frozen=True)
class WordMetrics:
    length: int
    per_gen_length: dict
    syllables: int
    per_gen_syllables: dict
    support: frozenset


def syllables(w: Word) -> list[tuple[str, int]]:
    """Maximal single-generator blocks of a linear word as (gen, exponent)."""
    out: list[tuple[str, int]] = []
    for g, s in w.letters:
        if out and out[-1][0] == g:
            out[-1] = (g, out[-1][1] + s)
        else:
            out.append((g, s))
    return out


def metrics(w: Word) -> WordMetrics:
    if not is_reduced(w):
        raise ValueError("metrics requires a freely reduced word")
    per_len: dict[str, int] = {}
    for g, _ in w.letters:
        per_len[g] = per_len.get(g, 0) + 1
    per_syl: dict[str, int] = {}
    syl = syllables(w)
    for g, _ in syl:
        per_syl[g] = per_syl.get(g, 0) + 1
    return WordMetrics(len(w), per_len, len(syl), per_syl, w.support())


def cyclic_syllables(w: Word) -> list[tuple[str, int, int, int]]:
    """Syllables of a cyclically reduced word read cyclically.

    Returns (gen, exponent, start, length) with start an index into w; a
    block wrapping past the end is reported once."""
    L = w.letters
    n = len(L)
    if n == 0:
        return []
    if all(x[0] == L[0][0] for x in L):
        return [(L[0][0], sum(s for _, s in L), 0, n)]
    start = 0
    while L[start - 1][0] == L[start][0]:
        start -= 1
    start %= n
    out = []
    i = 0
    while i < n:
        g = L[(start + i) % n][0]
        j = i
        e = 0
        while j < n and L[(start + j) % n][0] == g:
            e += L[(start + j) % n][1]
            j += 1
        out.append((g, e, (start + i) % n, j - i))
        i = j
    return out


def cyclically_reduced_words(gens: Sequence[str], length: int) -> Iterator[Word]:
    """All cyclically reduced words of the given length, in lexicographic order."""
    letters = sorted((g, e) for g in gens for e in (-1, 1))
    if length == 0:
        yield Word()
        return
    buf: list[Letter] = []

    def rec():
        if len(buf) == length:
            if length == 1 or buf[-1] != inv(buf[0]):
                yield Word(tuple(buf))
            return
        for x in letters:
            if buf and x == inv(buf[-1]):
                continue
            buf.append(x)
            yield from rec()
            buf.pop()

    yield from rec()


def cyclic_classes(gens: Sequence[str], length: int) -> Iterator[Word]:
    """One representative (the cyclic_canonical key) per class of cyclically
    reduced words of the given length under rotation and inversion."""
    letters = sorted((g, e) for g in gens for e in (-1, 1))
    if length == 0:
        yield Word()
        return
    buf: list[Letter] = []

    def rec():
        if len(buf) == length:
            if (length == 1 or buf[-1] != inv(buf[0])) and cyclic_canonical(Word(tuple(buf))) == tuple(buf):
                yield Word(tuple(buf))
            return
        for x in letters:
            if buf and (x == inv(buf[-1]) or x < buf[0] or inv(x) < buf[0]):
                continue
            buf.append(x)
            yield from rec()
            buf.pop()

    yield from rec()


def exponent_sums(w: Word) -> dict[str, int]:
    out: dict[str, int] = {}
    for g, s in w.letters:
        out[g] = out.get(g, 0) + s
    return out


class Cert(str, Enum):
    NONTRIVIAL = "NONTRIVIAL"
    INCONCLUSIVE = "INCONCLUSIVE"
    PEELED = "PEELED"
    NOT_APPLICABLE = "NOT_APPLICABLE"
    ROUTE_TO_RAAG = "ROUTE_TO_RAAG"


@dataclass(frozen=True)
class Reduction:
    status: Cert
    word: Word | None = None
    gen: str | None = None


def odd_classes(gens: Iterable[str], edges: Iterable[tuple[str, str, int]]) -> dict[str, str]:
    """Generators identified in the abelianization (joined by odd labels)."""
    parent = {g: g for g in gens}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, m in edges:
        if m % 2 == 1:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return {g: find(g) for g in parent}


def abelianization_certificate(w: Word, graph) -> Reduction:
    classes = odd_classes(graph.vertices, graph.edge_list())
    sums: dict[str, int] = {}
    for g, s in w.letters:
        c = classes.get(g, g)
        sums[c] = sums.get(c, 0) + s
    if any(v != 0 for v in sums.values()):
        return Reduction(Cert.NONTRIVIAL)
    return Reduction(Cert.INCONCLUSIVE)


def _peel(w: Word, count: int) -> Reduction:
    if not is_cyclically_reduced(w):
        raise ValueError("expected a cyclically reduced word")
    syl = cyclic_syllables(w)
    by_gen: dict[str, list[int]] = {}
    for idx, (g, _, _, _) in enumerate(syl):
        by_gen.setdefault(g, []).append(idx)
    n = len(w)
    for g in sorted(by_gen):
        idxs = by_gen[g]
        if len(idxs) == 1 and syl[idxs[0]][1] != 0:
            # a generator met once is never cancelled (degenerate case)
            return Reduction(Cert.NONTRIVIAL, gen=g)
        if len(idxs) != count:
            continue
        if sum(syl[i][1] for i in idxs) != 0:
            return Reduction(Cert.NONTRIVIAL, gen=g)
        # rotate so the word ends with the last g-syllable, then drop g-blocks
        last = syl[idxs[-1]]
        origin = (last[2] + last[3]) % n
        rot = w.rotate(origin)
        rest = tuple(x for x in rot.letters if x[0] != g)
        peeled, _ = cyclic_reduce(Word(rest))
        return Reduction(Cert.PEELED, peeled, g)
    return Reduction(Cert.NOT_APPLICABLE)


def corollary3_peel(w: Word) -> Reduction:
    """Two-syllable reduction: W = W1 a^x W2 a^y with a outside W1, W2."""
    return _peel(w, 2)


def corollary4_peel(w: Word) -> Reduction:
    """Three-syllable analogue of corollary3_peel."""
    return _peel(w, 3)


def corollary5_route(w: Word, graph=None) -> Reduction:
    if not w:
        return Reduction(Cert.ROUTE_TO_RAAG, w)
    counts: dict[str, int] = {}
    for g, _, _, _ in cyclic_syllables(w):
        counts[g] = counts.get(g, 0) + 1
    if all(c <= 3 for c in counts.values()):
        return Reduction(Cert.ROUTE_TO_RAAG, w)
    return Reduction(Cert.NOT_APPLICABLE)


def replay_substitution(w: Word, pos: int, form: Word, k: int) -> Word:
    """Apply one relator substitution to a cyclic word.

    The rotation of w starting at pos must begin with form[:k]; that prefix
    is replaced by the inverse of form[k:] and the result cyclically reduced."""
    rot = w.rotate(pos)
    if rot.letters[:k] != form.letters[:k]:
        raise ValueError("substitution does not match the word")
    new = form[k:].inverse() + rot[k:]
    return cyclic_reduce(new)[0]

