import itertools

import pytest
from hypothesis import given, strategies as st

from artin_dehn.presentation import (
    GraphError,
    GraphParseError,
    artin_relator,
    check_Cp,
    check_Tq,
    compute_pieces,
    gamma2,
    parabolic,
    parse_graph,
    presentation_from_graph,
    subgraph,
)
from artin_dehn.words import Word, is_cyclically_reduced, syllables

from conftest import graph

W = Word.parse


def test_relator_examples():
    assert artin_relator("a", "b", 2) == W("a b a^-1 b^-1")
    assert artin_relator("a", "b", 4) == W("a b a b a^-1 b^-1 a^-1 b^-1")
    assert artin_relator("a", "b", 5) == W("a b a b a b^-1 a^-1 b^-1 a^-1 b^-1")


@pytest.mark.parametrize("a,b,m", [("a", "a", 2), ("a", "b", 1), ("a", "b", 0)])
def test_relator_rejects_bad_edges(a, b, m):
    with pytest.raises(GraphError):
        artin_relator(a, b, m)


def _rotations(w: Word):
    return {w.rotate(k).letters for k in range(len(w))}


@given(st.integers(2, 12))
def test_relator_shape(m):
    r = artin_relator("a", "b", m)
    assert len(r) == 2 * m
    assert len(syllables(r)) == 2 * m
    assert is_cyclically_reduced(r)
    assert r.support() == {"a", "b"}
    # relation symmetry: swapping the generators gives a rotated inverse
    assert artin_relator("b", "a", m).letters in _rotations(r.inverse())


@given(st.integers(2, 9))
def test_relator_is_braid_relation(m):
    # prod(a, b, m) = prod(b, a, m) read off the relator
    r = artin_relator("a", "b", m)
    lhs = [("a", "b")[i % 2] for i in range(m)]
    rhs = [("b", "a")[i % 2] for i in range(m)]
    word = Word(tuple((g, 1) for g in lhs) + tuple((g, -1) for g in reversed(rhs)))
    assert word.letters in _rotations(r)


def test_presentation_examples():
    assert presentation_from_graph(graph("abc")).relators == ()
    k3 = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))
    p = presentation_from_graph(k3)
    assert len(p.relators) == 3 and all(len(r) == 4 for r in p.words)
    p4 = presentation_from_graph(graph("ab", ("a", "b", 4)))
    assert [len(r) for r in p4.words] == [8]


def test_graph_validation():
    with pytest.raises(GraphError):
        graph("ab", ("a", "b", 1))
    with pytest.raises(GraphError):
        graph("ab", ("a", "a", 2))
    with pytest.raises(GraphError):
        graph("ab", ("a", "b", 2), ("b", "a", 4))
    with pytest.raises(GraphError):
        graph("aa")
    assert not graph("ab", ("a", "b", 3)).no_three
    assert graph("ab", ("a", "b", 4)).no_three


def test_parse_graph_roundtrip_and_errors():
    g = parse_graph("# comment\ngens a b c\nedge a b 4  # label\nedge b c 2\n")
    assert g.label("b", "a") == 4 and g.label("a", "c") == 0
    assert parse_graph(g.to_text()) == g
    with pytest.raises(GraphParseError) as exc:
        parse_graph("gens a b\nedge a b x\n")
    assert exc.value.line == 2
    with pytest.raises(GraphParseError):
        parse_graph("gens a\nvertex b\n")


def test_gamma2_and_parabolic():
    g = graph("abc", ("a", "b", 2), ("b", "c", 4), ("a", "c", 2))
    assert gamma2(g).edges == (("a", "b", 2), ("a", "c", 2))
    k3 = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))
    assert gamma2(k3) == k3
    assert gamma2(graph("ab", ("a", "b", 4))).edges == ()
    assert gamma2(gamma2(g)) == gamma2(g)
    assert parabolic(g, g.vertices) == presentation_from_graph(g)
    assert parabolic(g, {"a"}).relators == ()
    assert parabolic(g, {"b", "c"}).words == [artin_relator("b", "c", 4)]
    with pytest.raises(GraphError):
        subgraph(g, {"z"})


def brute_pieces(p) -> set:
    """Every common subword of two distinct occurrences, by direct search."""
    occ = []
    for idx, r in enumerate(p.words):
        for eps, w in ((1, r), (-1, r.inverse())):
            for s in range(len(w)):
                occ.append(((idx, eps, s), w.rotate(s).letters))
    out = set()
    for (k1, u), (k2, v) in itertools.permutations(occ, 2):
        if k1 == k2:
            continue
        L = 0
        while L < min(len(u), len(v)) and u[L] == v[L]:
            L += 1
            out.add(u[:L])
    return out


@pytest.mark.parametrize("edges", [[("a", "b", 2)], [("a", "b", 4)], [("a", "b", 5)],
                                   [("a", "b", 2), ("b", "c", 4)]])
def test_pieces_match_brute_force(edges):
    p = presentation_from_graph(graph("abc", *edges))
    table = compute_pieces(p)
    brute = brute_pieces(p)
    assert {w.letters for w in table.pieces} == brute
    assert table.max_piece_length == max(len(x) for x in brute)


def test_piece_examples():
    comm = presentation_from_graph(graph("ab", ("a", "b", 2)))
    t = compute_pieces(comm)
    assert t.max_piece_length == 1 and t.factorization == [4]
    assert check_Cp(comm, 4) and not check_Cp(comm, 5)
    assert compute_pieces(presentation_from_graph(graph("ab"))).pieces == set()
    assert check_Cp(presentation_from_graph(graph("ab", ("a", "b", 6))), 4)


def test_piece_length_for_larger_labels():
    # rotations of (ab)^k share long subwords with themselves
    p = presentation_from_graph(graph("ab", ("a", "b", 4)))
    assert compute_pieces(p).max_piece_length == 3


@pytest.mark.parametrize("m", [2, 4, 5, 6, 7])
def test_single_edge_T4(m):
    assert check_Tq(presentation_from_graph(graph("ab", ("a", "b", m))), 4)


def test_Tq_counterexamples():
    # three commutators around a triangle close a chain of length 3
    k3 = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))
    assert not check_Tq(presentation_from_graph(k3), 4)
    assert check_Tq(presentation_from_graph(k3), 3)
    with pytest.raises(ValueError):
        check_Tq(presentation_from_graph(k3), 2)


def brute_Tq(p, q) -> bool:
    forms = [f.letters for f, _, _, _ in p.cyclic_forms]
    inverse = {f: Word(f).inverse().letters for f in forms}
    for h in range(3, q):
        for chain in itertools.product(forms, repeat=h):
            ok = True
            for i in range(h):
                u, v = chain[i], chain[(i + 1) % h]
                if v == inverse[u] or u[-1] != (v[0][0], -v[0][1]):
                    ok = False
                    break
            if ok:
                return False
    return True


@pytest.mark.parametrize("edges", [[("a", "b", 2)], [("a", "b", 2), ("b", "c", 2)],
                                   [("a", "b", 2), ("b", "c", 2), ("a", "c", 2)]])
def test_Tq_matches_brute_force(edges):
    p = presentation_from_graph(graph("abc", *edges))
    assert check_Tq(p, 4) == brute_Tq(p, 4)
