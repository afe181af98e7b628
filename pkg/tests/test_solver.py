import time

import pytest
from hypothesis import given, settings, strategies as st

from artin_dehn.bands_moves import same_cyclic_word
from artin_dehn.diagram import validate
from artin_dehn.presentation import presentation_from_graph
from artin_dehn.solver import (
    ClassError,
    SearchCaps,
    Status,
    bfs_oracle,
    bfs_verdicts,
    bounded_diagram_search,
    decide,
    diagram_from_trace,
    dihedral_decide,
    min_area,
    pile_decide,
    raag_trace,
    replay_trace,
    sample_with_witness,
)
from artin_dehn.words import Word, cyclic_reduce, exponent_sums, free_reduce

from conftest import graph

W = Word.parse
K3 = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))

letters = st.sampled_from([("a", 1), ("a", -1), ("b", 1), ("b", -1), ("c", 1), ("c", -1)])
words3 = st.lists(letters, max_size=12).map(lambda ls: Word(tuple(ls)))
words2 = st.lists(st.sampled_from([("a", 1), ("a", -1), ("b", 1), ("b", -1)]), max_size=10).map(lambda ls: Word(tuple(ls)))


@pytest.mark.parametrize(
    "word, area",
    [
        ("a b c a^-1 b^-1 c^-1", 3),
        ("a b c b^-1 a^-1 c^-1", 2),
        ("a b^2 a^-1 b^-2", 2),
        ("a^2 b^2 a^-2 b^-2", 4),
        ("a^3 b^3 a^-3 b^-3", 9),
    ],
)
def test_min_area_in_free_abelian_group(k3p, word, area):
    t0 = time.time()
    assert min_area(W(word), k3p) == area
    assert time.time() - t0 < 10


def test_min_area_dihedral(edge4):
    p = presentation_from_graph(edge4)
    assert min_area(W("a b a b a^-1 b^-1 a^-1 b^-1"), p) == 1
    assert min_area(W("a b a b^-1 a^-1 b^-1"), p, cap=3) is None


@settings(max_examples=200, deadline=None)
@given(words3)
def test_pile_matches_abelian_oracle(w):
    # all labels 2 on a triangle gives Z^3
    want = Status.TRIVIAL if not any(exponent_sums(w).values()) else Status.NONTRIVIAL
    assert pile_decide(w, K3) == want


@settings(max_examples=200, deadline=None)
@given(words3)
def test_pile_on_free_group(w):
    empty = graph("abc")
    want = Status.TRIVIAL if not free_reduce(w) else Status.NONTRIVIAL
    assert pile_decide(w, empty) == want
    assert dihedral_decide(Word(tuple(x for x in w.letters if x[0] != "c")), 0, ("a", "b")) == (
        Status.TRIVIAL if not free_reduce(Word(tuple(x for x in w.letters if x[0] != "c"))) else Status.NONTRIVIAL
    )


@settings(max_examples=100, deadline=None)
@given(words2, st.sampled_from([2, 4, 5]))
def test_dihedral_agrees_with_bfs(w, m):
    p = presentation_from_graph(graph("ab", ("a", "b", m)))
    got = dihedral_decide(w, m, ("a", "b"))
    oracle = bfs_oracle(w, p, 4, node_cap=20_000)
    if oracle.status == Status.TRIVIAL:
        assert got == Status.TRIVIAL
    if m == 2:
        assert (got == Status.TRIVIAL) == (not any(exponent_sums(w).values()))


def test_dihedral_examples():
    assert dihedral_decide(W("a b a b^-1 a^-1 b^-1"), 3) == Status.TRIVIAL
    assert dihedral_decide(W("a b a b^-1 a^-1 b^-1"), 4) == Status.NONTRIVIAL
    assert dihedral_decide(W("a b a^-1 b^-1"), 0) == Status.NONTRIVIAL
    assert dihedral_decide(W("a b a^-1 b^-1"), 2) == Status.TRIVIAL


@settings(max_examples=100, deadline=None)
@given(words3)
def test_raag_trace_replays_to_empty(w):
    w = cyclic_reduce(w)[0]
    if pile_decide(w, K3) != Status.TRIVIAL:
        return
    assert not replay_trace(w, raag_trace(w, K3))


def test_bfs_oracle_examples(k3p, edge4):
    assert bfs_oracle(W("a b a^-1 b^-1"), k3p, 2).status == Status.TRIVIAL
    r = bfs_oracle(W("a b a^-1 b^-1"), presentation_from_graph(edge4), 2)
    assert r.status == Status.NONTRIVIAL and r.certificate == "dihedral"


def test_bfs_batch_matches_single(k3p):
    words = [W("a b a^-1 b^-1"), W("a b c a^-1 b^-1 c^-1"), W("a b"), W("a b a^-1 c^-1"), W("")]
    batch = bfs_verdicts(words, k3p, 2)
    for w, r in zip(words, batch):
        assert r.status == bfs_oracle(w, k3p, 2).status


def test_bounded_search_examples(k3p, edge4):
    v = bounded_diagram_search(W("a b c a^-1 b^-1 c^-1"), k3p, SearchCaps(area_cap=5))
    assert v.status == Status.TRIVIAL and v.area == 3
    assert not v.replay()
    v = bounded_diagram_search(W("a b a^-1 b^-1"), presentation_from_graph(edge4), SearchCaps(area_cap=3, node_cap=2000))
    assert v.status != Status.TRIVIAL


def test_decide_examples(k3, edge4):
    assert decide(W("a b c a^-1 b^-1 c^-1"), k3).status == Status.TRIVIAL
    assert decide(W("a b a^-1 b^-1"), edge4).status == Status.NONTRIVIAL
    assert decide(W("a b a b a^-1 b^-1 a^-1 b^-1"), edge4).status == Status.TRIVIAL
    assert decide(W("a a"), edge4).status == Status.NONTRIVIAL
    assert decide(W(""), edge4).status == Status.TRIVIAL


def test_decide_rejects_label_three():
    with pytest.raises(ClassError):
        decide(W("a b"), graph("ab", ("a", "b", 3)))


def test_sampling_is_deterministic(k3p):
    a = sample_with_witness(k3p, 3, 2, 7)
    b = sample_with_witness(k3p, 3, 2, 7)
    assert a.word == b.word and a.factors == b.factors
    assert a.witness_area == 3
    with pytest.raises(ValueError):
        sample_with_witness(k3p, 0, 2, 7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_sampled_words_are_trivial(seed, k):
    g = graph("abc", ("a", "b", 2), ("b", "c", 4), ("a", "c", 2))
    p = presentation_from_graph(g)
    s = sample_with_witness(p, k, 2, seed)
    v = decide(s.word, g, SearchCaps(area_cap=k, node_cap=20_000))
    assert v.status != Status.NONTRIVIAL
    if v.trace is not None:
        assert not v.replay()
        area = min_area(s.word, p, cap=k)
        assert area is None or area <= k


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_diagram_from_trace(seed, k):
    p = presentation_from_graph(K3)
    w = cyclic_reduce(sample_with_witness(p, k, 2, seed).word)[0]
    if not w:
        return
    trace = raag_trace(w, K3)
    d = diagram_from_trace(w, trace)
    assert validate(d, p).ok
    # folding the boundary may pinch off and drop spherical parts
    assert 1 <= d.area() <= len(trace)
    assert same_cyclic_word(free_reduce(d.boundary_word()), w) or same_cyclic_word(free_reduce(d.boundary_word()).inverse(), w)


@pytest.mark.parametrize("m, max_len", [(4, 10), (5, 10)])
def test_trivial_edge_words_have_many_syllables(m, max_len):
    from artin_dehn.words import cyclic_classes, cyclic_syllables

    seen = 0
    for n in range(1, max_len + 1):
        for w in cyclic_classes(("a", "b"), n):
            if len(w.support()) == 2 and dihedral_decide(w, m, ("a", "b")) == Status.TRIVIAL:
                seen += 1
                assert len(cyclic_syllables(w)) >= 2 * m, str(w)
    assert seen >= 1
