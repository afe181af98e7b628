import random

import pytest
from hypothesis import given, settings, strategies as st

from artin_dehn.bands_moves import (
    MoveError,
    b_connectivity,
    band_bundle,
    cancelling_corners,
    classify_regions,
    cube,
    cube_corner,
    cube_corner_with_flap,
    diamond_move,
    equivalence_classes,
    extended_i_move,
    extract_bands,
    i_move,
    identity_sequence_check,
    make_prism,
    push_up,
    random_bouquet,
    random_imove_instance,
    reduced_boundary,
    same_cyclic_word,
    str_adequate,
    transfer_region,
)
from artin_dehn.diagram import (
    SPHERICAL,
    Diagram,
    build_from_gluing,
    free_reduce_diagram,
    grid,
    is_cancelling_pair,
    is_reduced,
    polyomino,
    validate,
)
from artin_dehn.presentation import GraphError, presentation_from_graph
from artin_dehn.quotients import two_octagons_with_band
from artin_dehn.words import Word

from conftest import graph

W = Word.parse
A, T, C = ("a", 1), ("t", 1), ("c", 1)
IA, IT, IC = ("a", -1), ("t", -1), ("c", -1)


def band_shape(d, presentation=None):
    return sorted((b.generator, len(b), b.closed) for b in extract_bands(d, presentation))


def test_bands_of_grid():
    assert band_shape(grid(2, 3)) == [("a", 3, False)] * 2 + [("b", 2, False)] * 3


def test_bands_of_single_square():
    assert band_shape(grid(1, 1)) == [("a", 1, False), ("b", 1, False)]


def test_prism_belt_is_a_closed_band():
    g = graph("abt", ("a", "t", 2), ("t", "b", 2), ("a", "b", 4))
    p = make_prism(g, "a", "t", "b")
    shape = band_shape(p.sphere, presentation_from_graph(g))
    assert ("t", 8, True) in shape
    assert sum(1 for s in shape if s[2]) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 14))
def test_band_sizes_cover_squares_twice(seed, size):
    from artin_dehn.analysis import random_polyomino

    d = polyomino(random_polyomino(random.Random(seed), size))
    assert sum(len(b) for b in extract_bands(d)) == 2 * len(classify_regions(d).reg2)


def test_equivalence_classes():
    (cls,) = equivalence_classes(grid(2, 3))
    assert sorted(cls.faces) == [1, 2, 3, 4, 5, 6]
    assert cls.support == {"a", "b"} and cls.disc
    classes = equivalence_classes(two_octagons_with_band(2))
    assert sorted(sorted(c.faces) for c in classes) == [[1], [2, 3], [4]]


def test_adequacy():
    assert str_adequate(grid(2, 3))
    assert str_adequate(two_octagons_with_band(2))
    # a closed band is never adequate
    assert not str_adequate(cube().sphere)


def test_b_connectivity_reaches_the_far_octagon():
    d = two_octagons_with_band(2)
    bc = b_connectivity(d, 1)
    assert bc.i_B == 1
    assert len(bc.cap_boundary) == 7
    assert ("region", 4) in bc.targets.values()


def test_diamond_move_refused_without_cancellation():
    with pytest.raises(MoveError):
        diamond_move(grid(2, 2), 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_diamond_moves_keep_boundary_and_area(seed):
    rng = random.Random(seed)
    p = presentation_from_graph(graph("abc", ("a", "b", 2), ("b", "c", 4), ("a", "c", 2)))
    d = random_bouquet(p, rng)
    for _ in range(8):
        corners = cancelling_corners(d)
        if not corners:
            break
        a = rng.choice(corners)
        new, rec = diamond_move(d, d.head(a), a, presentation=p)
        assert validate(new).ok
        assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
        assert rec.before.area == rec.after.area
        d = new


def test_prism_needs_the_right_labels():
    g = graph("abc", ("a", "b", 4), ("b", "c", 2), ("a", "c", 4))
    with pytest.raises(GraphError):
        make_prism(g, "a", "b", "c")
    k3 = graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))
    with pytest.raises(GraphError):
        make_prism(k3, "a", "b", "c")
    assert len(make_prism(k3, "a", "b", "c", allow_cube=True).sphere.inner_faces()) == 6


@pytest.mark.parametrize("m", [4, 5, 6])
def test_prism_identity_sequence(m):
    g = graph("ijk", ("i", "j", 2), ("j", "k", 2), ("i", "k", m))
    s = make_prism(g, "i", "j", "k").sphere
    assert len(s.inner_faces()) == 2 * m + 2
    assert s.euler() == 2
    assert identity_sequence_check(s)


def test_identity_sequence_of_doubled_square():
    r = W("a b a^-1 b^-1")
    s = build_from_gluing(
        [r, W("b a b^-1 a^-1")],
        [((0, 0), (1, 3)), ((0, 1), (1, 2)), ((0, 2), (1, 1)), ((0, 3), (1, 0))],
        kind=SPHERICAL,
    )
    assert validate(s).ok
    assert identity_sequence_check(s)


def test_identity_sequence_detects_corruption():
    s = cube().sphere
    for x in list(s.label):
        bad = s.copy()
        g, e = bad.label[x]
        bad.label[x] = ("c" if g != "c" else "a", e)
        assert not identity_sequence_check(bad)
    # a planar disc is not a sphere
    assert not identity_sequence_check(grid(1, 1))


def test_cube_corner_i_move():
    d = cube_corner()
    new, rec, _ = i_move(d, d.inner_faces(), cube())
    assert new.area() == 3
    assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
    assert validate(new).ok


def test_cube_corner_with_flap_reduces():
    d = cube_corner_with_flap()
    assert d.area() == 4
    new, _, _ = i_move(d, [1, 2, 3], cube())
    assert not is_reduced(new)
    free_reduce_diagram(new)
    assert new.area() == 2
    assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_random_i_moves(seed):
    d, faces, prism = random_imove_instance(random.Random(seed))
    before = len(classify_regions(d).reg4plus)
    new, _, _ = i_move(d, faces, prism)
    assert validate(new).ok
    assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
    assert len(classify_regions(new).reg4plus) <= before


def _u_shape():
    # cells (0,0),(0,1),(1,0),(1,1),(2,0),(2,1) get tags 1..6 in sorted order
    return polyomino([(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (1, 1)])


def _bottom_band(d):
    return next(b for b in extract_bands(d) if sorted(b.regions) == [1, 3, 5])


def test_transfer_across_band():
    d = _u_shape()
    new, rec = transfer_region(d, 4, _bottom_band(d))
    assert validate(new).ok
    assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
    assert rec.location["m0_after"] == rec.location["m0_before"] - 1


def test_transfer_errors():
    d = _u_shape()
    band = _bottom_band(d)
    with pytest.raises(MoveError):
        transfer_region(d, 3, band)
    # squares 2 and 6 touch the band at its two ends only
    with pytest.raises(MoveError):
        extended_i_move(d, {2, 6}, band)


def _mirrored_octagons(k):
    """Two octagons over {a, t} joined by a t-band of length k, the upper
    one the mirror image of the lower one across the band."""
    faces = [(list(range(8)), [A, T, A, T, IA, IT, IA, IT])]
    left, right, nxt = 1, 2, 8
    for _ in range(k):
        nl, nr = nxt, nxt + 1
        nxt += 2
        faces.append(([right, left, nl, nr], [IT, C, T, IC]))
        left, right = nl, nr
    faces.append(([right, left] + list(range(nxt, nxt + 6)), [IT, IA, T, A, T, A, IT, IA]))
    return Diagram.from_faces(faces)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_push_up_creates_cancelling_pair(k):
    d = _mirrored_octagons(k)
    assert validate(d).ok and is_reduced(d)
    band = next(b for b in extract_bands(d) if b.generator == "t")
    new, rec = push_up(d, [1], band_bundle(d, [band]))
    assert same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
    (copy,) = rec.location["copy"]
    upper = k + 2
    assert any(is_cancelling_pair(new, x) for x in new.face_walk(copy) if new.ftag[new.opp[x]] == upper)
    area = new.area()
    assert free_reduce_diagram(new) >= 1
    assert new.area() < area


def test_push_up_without_mirror_stays_reduced():
    d = two_octagons_with_band(2)
    band = next(b for b in extract_bands(d) if b.generator == "t")
    new, _ = push_up(d, [1], band_bundle(d, [band]))
    assert is_reduced(new)
