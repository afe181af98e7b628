import random

import pytest
from hypothesis import given, settings, strategies as st

from artin_dehn.analysis import (
    Shape,
    c4t4_corpus,
    dd_membership,
    greendlinger,
    layer_structure,
    one_layer_decompose,
    random_polyomino,
    split_boundary,
    strip,
    theoremC_cases,
    tripod,
)
from artin_dehn.diagram import DiagramError, boundary_darts, diagram_C4T4, grid, polyomino


def test_greendlinger_grid_corners():
    r = greendlinger(grid(3, 3))
    assert r.problems == []
    assert len(r.regions) == 4
    # each corner square has two interior edges
    assert all(i == 2 for _, i, _ in r.regions)
    assert r.sum_defect >= 4


def test_greendlinger_strip_is_one_layer():
    r = greendlinger(strip(3))
    assert r.shape == Shape.ONE_LAYER
    assert len(r.regions) == 2
    assert r.problems == []


def test_greendlinger_tripod_shape():
    r = greendlinger(tripod(2, 2, 2))
    assert r.shape == Shape.TRIPOD_DUAL
    assert len(r.regions) == 3


def test_greendlinger_single_region_reports_problem():
    r = greendlinger(strip(1))
    assert r.problems


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 16))
def test_greendlinger_on_random_polyominoes(seed, size):
    d = polyomino(random_polyomino(random.Random(seed), size))
    if d.area() < 2 or not diagram_C4T4(d):
        return
    r = greendlinger(d)
    assert r.problems == []
    assert len(r.regions) >= 2
    assert r.sum_defect >= 4


def test_layers_from_inner_vertex():
    d = grid(3, 3)
    inner = sorted(v for v in d.vertices if v not in d.boundary_vertices())
    ls = layer_structure(d, inner[0])
    assert [len(x) for x in ls.layers] == [1, 4, 5]
    assert ls.convex and ls.violations == []


def test_layers_from_corner():
    d = grid(3, 3)
    corner = next(v for v in d.vertices if d.valency(v) == 2)
    ls = layer_structure(d, corner)
    assert [len(x) for x in ls.layers] == [1, 1, 3, 5]
    assert ls.convex


def test_layers_unknown_vertex():
    with pytest.raises(DiagramError):
        layer_structure(grid(1, 1), 99)


def test_layers_cover_corpus():
    for name, d in c4t4_corpus(count=12, seed=3):
        v = min(d.vertices)
        ls = layer_structure(d, v)
        assert ls.violations == [], name
        assert set().union(*ls.layers[1:]) == set(d.inner_faces()), name


def test_one_layer_examples():
    o = one_layer_decompose(strip(4))
    assert o is not None and o.regions == [1, 2, 3, 4]
    assert len(o.mu) + len(o.nu) == len(boundary_darts(strip(4)))
    assert one_layer_decompose(polyomino([(0, 0), (1, 0), (1, 1)])) is not None
    assert one_layer_decompose(grid(2, 2)) is None
    assert one_layer_decompose(tripod(1, 1, 1)) is None


def test_dd_membership_strip():
    d = strip(3)
    bd = boundary_darts(d)
    member = {f: dd_membership(d, f, bd) for f in d.inner_faces()}
    # the end squares meet the boundary in one arc of three edges, the middle one in two arcs
    assert member == {1: True, 2: False, 3: True}


def test_boundary_cases_strip():
    d = strip(3)
    for k in (1, 2, 3):
        cases = theoremC_cases(d, k)
        assert [(c.case, c.side, c.regions) for c in cases] == [("b", 2, (1, 3))]
    with pytest.raises(ValueError):
        split_boundary(d, 0)
    with pytest.raises(ValueError):
        theoremC_cases(d, ([0], [0]))
