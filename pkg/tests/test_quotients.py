import random

import pytest
from hypothesis import given, settings, strategies as st

from artin_dehn.presentation import presentation_from_graph
from artin_dehn.quotients import (
    QuotientError,
    build_coarse,
    commutator_howie_example,
    count_check,
    howie_square_example,
    ht_solver_for,
    lemma_checks,
    octagon,
    psi_t,
    random_chain,
    t_set,
    two_friendly_octagons,
    two_octagons_with_band,
    verify_howie,
)
from artin_dehn.words import Word

from conftest import graph

W = Word.parse


def test_octagon_howie_corners():
    p = psi_t(octagon(), "t")
    h = p.howie.diagram
    (f,) = h.inner_faces()
    walk = h.face_walk(f)
    # the a-syllables between consecutive t letters of a t a t a^-1 t^-1 a^-1 t^-1
    assert [h.corner.get(x) for x in walk] == [W("a"), W("a"), W("a^-1"), W("a^-1")]
    assert [h.label[x] for x in walk] == [("t", 1), ("t", 1), ("t", -1), ("t", -1)]
    assert count_check(octagon(), "t").as_tuple() == (1, 1, True)


def test_unknown_t_generator():
    with pytest.raises(QuotientError):
        build_coarse(octagon(), "c")


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_band_collapses_to_shared_edge(k):
    d = two_octagons_with_band(k)
    p = psi_t(d, "t")
    g = p.tilde.diagram
    assert count_check(d, "t").as_tuple() == (2, 2, True)
    f1, f2 = g.inner_faces()
    assert p.tilde.degree(f1) == p.tilde.degree(f2) == 4
    assert len(g.edge_between(f1, f2)) == 1
    assert lemma_checks(p) == []


def test_friendly_octagons_form_one_region():
    d = two_friendly_octagons()
    assert count_check(d, "t").as_tuple() == (1, 1, True)
    assert count_check(d, "a").as_tuple() == (1, 1, True)


def test_howie_square():
    d = howie_square_example()
    assert t_set(d) == {"a", "b", "t"}
    p = psi_t(d, "t")
    assert count_check(d, "t").equal
    g = graph("abt", ("a", "b", 2), ("a", "t", 3), ("b", "t", 3))
    assert verify_howie(p.howie, ht_solver_for(g, "t")).result is True


def test_howie_vertex_check():
    g = graph("abt", ("a", "b", 2), ("a", "t", 3), ("b", "t", 3))
    solver = ht_solver_for(g, "t")
    ok = verify_howie(commutator_howie_example(), solver)
    assert ok.result is True
    assert ok.words == {0: W("a b a^-1 b^-1")}
    bad = verify_howie(commutator_howie_example(W("a^2")), solver)
    assert bad.result is False and bad.failed == [0]


def test_howie_without_inner_vertices():
    p = psi_t(octagon(), "t")
    assert p.howie.inner_vertices() == []
    assert verify_howie(p.howie, lambda w: "NONTRIVIAL").result is True


def test_howie_unknown_vertex():
    chk = verify_howie(commutator_howie_example(), lambda w: "UNKNOWN")
    assert chk.result is None and chk.unknown == [0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_chains(seed):
    d, g = random_chain(random.Random(seed))
    p = presentation_from_graph(g)
    for t in sorted(t_set(d, p)):
        ps = psi_t(d, t, p)
        assert len(ps.coarse.reg4plus) == ps.tilde.diagram.area()
        assert lemma_checks(ps) == []


def test_tilde_degree_matches_inner_valency():
    # every corpus instance except the one built from label-3 relators
    from artin_dehn.cli import quotient_corpus

    checked = 0
    for name, d, g in quotient_corpus(0, 60):
        if name == "howie square":
            continue
        p = presentation_from_graph(g) if g is not None else None
        for t in sorted(t_set(d, p)):
            td = psi_t(d, t, p).tilde.diagram
            big_faces = all(len(td.face_walk(f)) >= 4 for f in td.inner_faces())
            bv = td.boundary_vertices()
            no_two = all(k != 2 or v in bv for v, k in td.valencies().items())
            assert big_faces == no_two, (name, t)
            checked += 1
    assert checked >= 50
