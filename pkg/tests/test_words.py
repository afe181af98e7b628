import random

import pytest
from hypothesis import given, strategies as st

from artin_dehn.words import (
    Cert,
    Word,
    WordParseError,
    abelianization_certificate,
    corollary3_peel,
    corollary4_peel,
    corollary5_route,
    cyclic_canonical,
    cyclic_classes,
    cyclic_reduce,
    cyclic_syllables,
    cyclically_reduced_words,
    format_word,
    free_reduce,
    inv,
    is_cyclically_reduced,
    is_reduced,
    metrics,
    replay_substitution,
)

from conftest import graph

W = Word.parse

letters = st.tuples(st.sampled_from("abc"), st.sampled_from((1, -1)))
words = st.lists(letters, max_size=20).map(lambda xs: Word(tuple(xs)))


def test_parse_and_format():
    assert W("a^2 b^-1") == Word((("a", 1), ("a", 1), ("b", -1)))
    assert format_word(W("a a b^-1 b^-1 a")) == "a^2 b^-2 a"
    assert format_word(Word()) == "1"
    assert W("1") == Word()
    for bad in ("a^0", "a^", "2a", "a-b"):
        with pytest.raises(WordParseError):
            W(bad)


@given(words)
def test_format_parse_roundtrip(w):
    assert W(format_word(w)) == w


def test_free_reduce_examples():
    assert free_reduce(W("a a^-1 b")) == W("b")
    assert free_reduce(Word()) == Word()
    assert free_reduce(W("a b b^-1 a")) == W("a a")


def _random_order_reduce(w: Word, rng: random.Random) -> Word:
    L = list(w.letters)
    while True:
        spots = [i for i in range(len(L) - 1) if L[i + 1] == inv(L[i])]
        if not spots:
            return Word(tuple(L))
        i = rng.choice(spots)
        del L[i:i + 2]


@given(words, st.integers(0, 10**6))
def test_free_reduce_properties(w, seed):
    r = free_reduce(w)
    assert is_reduced(r)
    assert free_reduce(r) == r
    assert len(r) <= len(w)
    assert _random_order_reduce(w, random.Random(seed)) == r


def test_cyclic_reduce_examples():
    assert cyclic_reduce(W("a b a^-1")) == (W("b"), W("a"))
    assert cyclic_reduce(W("a b a^-1 b^-1")) == (W("a b a^-1 b^-1"), Word())
    core, c = cyclic_reduce(W("a^-1 a b a^-1 a"))
    assert core == W("b") and c == Word()


@given(words)
def test_cyclic_reduce_conjugates(w):
    core, c = cyclic_reduce(w)
    assert is_cyclically_reduced(core)
    assert free_reduce(c + core + c.inverse()) == free_reduce(w)


def test_metrics_examples():
    m = metrics(W("a b^2 a^-1 b^-1"))
    assert (m.length, m.per_gen_length["b"], m.syllables, m.per_gen_syllables["b"]) == (5, 3, 4, 2)
    assert m.support == {"a", "b"}
    m = metrics(W("t^5"))
    assert (m.length, m.syllables) == (5, 1)
    m = metrics(W("a b a b"))
    assert (m.syllables, m.per_gen_syllables["a"]) == (4, 2)
    with pytest.raises(ValueError):
        metrics(W("a a^-1"))


@given(words)
def test_metric_identities(w):
    m = metrics(free_reduce(w))
    assert m.length == sum(m.per_gen_length.values())
    assert m.syllables == sum(m.per_gen_syllables.values())


def test_abelianization_examples():
    g = graph("ab", ("a", "b", 4))
    assert abelianization_certificate(W("a^2"), g).status == Cert.NONTRIVIAL
    assert abelianization_certificate(W("a b a^-1 b^-1"), g).status == Cert.INCONCLUSIVE
    assert abelianization_certificate(W("a b^-1"), graph("ab", ("a", "b", 5))).status == Cert.INCONCLUSIVE
    assert abelianization_certificate(W("a b^-1"), g).status == Cert.NONTRIVIAL


def test_first_peel_examples():
    assert corollary3_peel(W("b a^2 b^-1 c a^-1 c^-1")).status == Cert.NONTRIVIAL
    r = corollary3_peel(W("b a b^-1 c a^-1 c^-1"))
    assert r.status == Cert.PEELED and r.word == Word() and r.gen == "a"
    # two a-syllables with exponent sum 2
    assert corollary3_peel(W("a b a b")).status == Cert.NONTRIVIAL
    assert corollary3_peel(W("a b a^-1 b^-1 a b a^-1 b^-1")).status == Cert.NOT_APPLICABLE
    # a generator met in one syllable cannot cancel
    assert corollary3_peel(W("a b c b^-1 c^-1")).status == Cert.NONTRIVIAL
    with pytest.raises(ValueError):
        corollary3_peel(W("a b a^-1"))


def test_second_peel_examples():
    assert corollary4_peel(W("a b a c a^-1 d")).status == Cert.NONTRIVIAL
    r = corollary4_peel(W("a b a^-2 c a d"))
    assert r.status == Cert.PEELED and r.gen == "a"
    assert free_reduce(r.word) == r.word and r.word.support() == {"b", "c", "d"}
    assert corollary4_peel(W("a b a b^-1 a^-1 b a^-1 b^-1")).status == Cert.NOT_APPLICABLE


def test_peeling_drops_the_generator():
    w = W("b a c a^-2 c^-1 b^-1 a")
    r = corollary4_peel(w)
    assert r.status == Cert.PEELED
    assert r.word == Word()


def test_raag_route_examples():
    assert corollary5_route(W("a b a^-1 b^-1"), graph("ab", ("a", "b", 4))).status == Cert.ROUTE_TO_RAAG
    assert corollary5_route(W("t^4 x t^-4 x^-1")).status == Cert.ROUTE_TO_RAAG
    assert corollary5_route(W("a b a b a^-1 b^-1 a^-1 b^-1")).status == Cert.NOT_APPLICABLE


def test_cyclic_syllables_wrap():
    syl = cyclic_syllables(W("a b a"))
    assert [(g, e) for g, e, _, _ in syl] == [("a", 2), ("b", 1)]
    assert cyclic_syllables(W("a a")) == [("a", 2, 0, 2)]


def test_enumerators_match_brute_force():
    import itertools
    gens = "ab"
    alphabet = [(g, s) for g in gens for s in (1, -1)]
    for n in range(1, 6):
        brute = [Word(t) for t in itertools.product(alphabet, repeat=n) if is_cyclically_reduced(Word(t))]
        assert sorted(brute) == sorted(cyclically_reduced_words(gens, n))
        assert {cyclic_canonical(w) for w in brute} == {w.letters for w in cyclic_classes(gens, n)}
        assert all(cyclic_canonical(w) == w.letters for w in cyclic_classes(gens, n))


def test_replay_substitution():
    w = W("a b a^-1 b^-1 c")
    # replace the commutator prefix a b by b a
    out = replay_substitution(w, 0, W("a b a^-1 b^-1"), 2)
    assert out == W("c")
    with pytest.raises(ValueError):
        replay_substitution(w, 1, W("a b a^-1 b^-1"), 2)


def _peel_pairs(g, max_len):
    from artin_dehn.cli import exact_verdict
    from artin_dehn.solver import Status

    for n in range(1, max_len + 1):
        for w in cyclic_classes(g.vertices, n):
            before = exact_verdict(w, g)
            if before is None:
                continue
            for peel in (corollary3_peel, corollary4_peel):
                r = peel(w)
                if r.status == Cert.PEELED:
                    after = exact_verdict(r.word, g) if len(r.word) else Status.TRIVIAL
                    if after is not None:
                        yield w, peel, before, after


@pytest.mark.parametrize("edges", [[("a", "b", 4)], [("a", "b", 2), ("b", "c", 4)], [("a", "b", 2), ("b", "c", 2), ("a", "c", 2)]])
def test_peeling_keeps_trivial_words_trivial(edges):
    from artin_dehn.solver import Status

    g = graph("abc" if len(edges) > 1 else "ab", *edges)
    for w, peel, before, after in _peel_pairs(g, 6):
        if before == Status.TRIVIAL:
            assert after == Status.TRIVIAL, (peel.__name__, format_word(w))


def test_peeling_can_lose_nontriviality():
    # the implication only runs one way: a nontrivial commutator peels to nothing
    from artin_dehn.cli import exact_verdict
    from artin_dehn.solver import Status

    g = graph("ab", ("a", "b", 4))
    w = W("a^-1 b^-1 a b")
    assert exact_verdict(w, g) == Status.NONTRIVIAL
    r = corollary3_peel(w)
    assert r.status == Cert.PEELED and len(r.word) == 0
