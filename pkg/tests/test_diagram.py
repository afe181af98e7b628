import random

import pytest
from hypothesis import given, settings, strategies as st

from artin_dehn.analysis import random_polyomino, strip, tripod
from artin_dehn.bands_moves import make_prism
from artin_dehn.diagram import (
    OUTER,
    Diagram,
    DiagramParseError,
    GluingError,
    build_from_gluing,
    classify_regions,
    deserialize,
    diagram_C4T4,
    free_reduce_diagram,
    grid,
    is_reduced,
    polyomino,
    serialize,
    to_dot,
    validate,
)
from artin_dehn.presentation import artin_relator, presentation_from_graph
from artin_dehn.words import Word, free_reduce

from conftest import graph

W = Word.parse


def counts(d):
    return len(d.vertices), len(d.edges()), d.area()


def cyclic_equal(u, v):
    a, b = u.letters, v.letters
    return len(a) == len(b) and any(a[i:] + a[:i] == b for i in range(max(len(a), 1)))


def test_single_square():
    d = build_from_gluing([W("a b a^-1 b^-1")])
    assert counts(d) == (4, 4, 1)
    assert d.euler() == 2
    assert cyclic_equal(d.boundary_word(), W("a b a^-1 b^-1")) or cyclic_equal(
        d.boundary_word().inverse(), W("a b a^-1 b^-1")
    )


def test_two_squares_glued():
    sq = W("a b a^-1 b^-1")
    # the right side of the first square against the left side of the second
    d = build_from_gluing([sq, sq], [((0, 1), (1, 3))])
    assert counts(d) == (6, 7, 2)
    assert validate(d).ok
    assert free_reduce(d.boundary_word()) == d.boundary_word()
    assert len(d.boundary_word()) == 6


def test_grid_counts():
    d = grid(3, 3)
    assert counts(d) == (16, 24, 9)
    assert len(d.boundary_word()) == 12


def test_bad_gluing_labels():
    sq = W("a b a^-1 b^-1")
    with pytest.raises(GluingError):
        build_from_gluing([sq, sq], [((0, 0), (1, 0))])
    with pytest.raises(GluingError):
        build_from_gluing([sq], [((0, 0), (3, 0))])


def test_validate_flags_non_relator(k3p):
    d = build_from_gluing([W("a b c")])
    rep = validate(d, k3p)
    assert not rep.ok
    assert any("not a relator" in v for v in rep.violations)


def test_validate_flags_broken_rotation():
    d = grid(2, 1)
    x = next(iter(d.rot))
    d.rot[x] = x
    assert not validate(d).ok


def test_validate_accepts_relator_faces(k3p):
    d = grid(2, 2)
    rep = validate(d, k3p)
    assert rep.ok
    assert rep.area == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 14))
def test_polyomino_euler_and_boundary(seed, size):
    cells = random_polyomino(random.Random(seed), size)
    d = polyomino(cells)
    assert d.euler() == 2
    assert validate(d).ok
    # the boundary word of a lattice disc is trivial in Z^2
    w = d.boundary_word()
    assert sum(e for g, e in w.letters if g == "a") == 0
    assert sum(e for g, e in w.letters if g == "b") == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12))
def test_serialize_round_trip(seed, size):
    d = polyomino(random_polyomino(random.Random(seed), size))
    e = deserialize(serialize(d))
    assert e == d
    assert serialize(e) == serialize(d)


def test_deserialize_errors():
    with pytest.raises(DiagramParseError):
        deserialize("")
    with pytest.raises(DiagramParseError):
        deserialize("dart 0 vertex=0 label=a opp=1 next=0\n")
    with pytest.raises(DiagramParseError):
        deserialize("diagram planar\nbogus 1\n")


def test_to_dot_lists_edges():
    d = grid(2, 1)
    out = to_dot(d)
    assert out.startswith("graph diagram {")
    assert out.count(" -- ") == len(d.edges())


def test_cancelling_pair_detection():
    r = W("a b a^-1 b^-1")
    # a square glued to its mirror image along one edge
    d = build_from_gluing([r, r.inverse()], [((0, 0), (1, 3))])
    assert not is_reduced(d)
    assert free_reduce_diagram(d) == 1
    assert d.area() == 0
    assert len(free_reduce(d.boundary_word())) == 0
    assert is_reduced(grid(3, 2))


def test_C4T4_examples():
    assert diagram_C4T4(grid(3, 3))
    assert diagram_C4T4(strip(5))
    assert diagram_C4T4(tripod(2, 2, 2))
    # an inner vertex of valency 3: three squares around a point
    assert not diagram_C4T4(_three_around_a_point())


def _three_around_a_point():
    faces = [
        ([0, 1, 2, 3], [("a", 1), ("b", 1), ("a", -1), ("c", -1)]),
        ([0, 3, 4, 5], [("c", 1), ("b", 1), ("c", -1), ("d", -1)]),
        ([0, 5, 6, 1], [("d", 1), ("x", 1), ("d", -1), ("a", -1)]),
    ]
    return Diagram.from_faces(faces)


def test_three_around_a_point_is_a_disc():
    d = _three_around_a_point()
    assert validate(d).ok
    assert d.valency(0) == 3
    assert 0 not in d.boundary_vertices()


def test_prism_classification():
    g = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 4))
    p = make_prism(g, "a", "b", "c")
    cls = classify_regions(p.sphere, presentation_from_graph(g))
    assert len(cls.reg4plus) == 2
    assert len(cls.reg2) == 8
    assert cls.T_set == {"a", "c"}
    assert validate(p.sphere, presentation_from_graph(g)).ok
    assert not p.sphere.has_outer_darts()


def test_outer_face_is_unique():
    d = grid(2, 2)
    assert sum(1 for f in d.faces() if f == OUTER) == 1
    assert d.faces().keys() - {OUTER} == set(d.inner_faces())


def test_relator_face_word():
    r = artin_relator("a", "b", 3)
    d = Diagram.single_face(r)
    (f,) = d.inner_faces()
    assert d.face_word(f) == r


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 20))
def test_small_cancellation_area_bound(seed, size):
    d = polyomino(random_polyomino(random.Random(seed), size))
    if not (is_reduced(d) and diagram_C4T4(d)):
        return
    n = len(d.boundary_word())
    assert all(len(d.face_walk(f)) <= n for f in d.inner_faces())
    assert d.area() <= n * n
