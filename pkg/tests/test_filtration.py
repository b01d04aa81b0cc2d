import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfl.filtration import Simplex, build_sublevel_filtration, negate_filter
from gfl.graph import Graph
from helpers import brute_force_filtration, injective_filter, random_graph


def _as_tuples(flt):
    return [(s.vertices, v) for s, v in flt]


def test_path_example():
    g = Graph(3, [[0, 1], [1, 2]])
    f = np.array([0.1, 0.4, 0.2])
    flt = build_sublevel_filtration(g, f)
    assert _as_tuples(flt) == brute_force_filtration(g, f)
    assert [repr(s) for s in flt.ordered_simplices] == ["v0", "v2", "v1", "e(0, 1)", "e(1, 2)"]
    assert flt.values[3:].tolist() == [0.4, 0.4]
    assert flt.levels.tolist() == [0.1, 0.2, 0.4]
    assert flt.level_index.tolist() == [1, 2, 3, 3, 3]


def test_single_vertex():
    flt = build_sublevel_filtration(Graph(1, np.zeros((0, 2))), [0.7])
    assert [repr(s) for s in flt.ordered_simplices] == ["v0"]
    assert flt.m == 1


def test_tied_edge_goes_to_smaller_vertex():
    flt = build_sublevel_filtration(Graph(2, [[0, 1]]), [0.3, 0.3])
    assert [repr(s) for s in flt.ordered_simplices] == ["v0", "v1", "e(0, 1)"]
    assert flt.m == 1
    assert flt.attribution.tolist() == [0, 1, 0]


def test_nonfinite_rejected():
    with pytest.raises(FloatingPointError):
        build_sublevel_filtration(Graph(2, [[0, 1]]), [0.1, np.nan])


def test_negate():
    assert negate_filter([0.2, 0.9]).tolist() == [-0.2, -0.9]
    assert negate_filter([0.0]).tolist() == [0.0]
    f = np.random.default_rng(0).normal(size=7)
    assert np.array_equal(negate_filter(negate_filter(f)), f)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.floats(0, 1), st.booleans())
def test_invariants_against_brute_force(seed, n, p, tied):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p)
    f = rng.integers(0, 3, n) / 2.0 if tied else rng.uniform(size=n)
    flt = build_sublevel_filtration(g, f)
    assert _as_tuples(flt) == brute_force_filtration(g, f)
    assert np.all(np.diff(flt.values) >= 0)
    pos = {s: i for i, s in enumerate(flt.ordered_simplices)}
    for s, i in pos.items():
        if s.dim == 1:
            assert pos[Simplex((s.vertices[0],))] < i and pos[Simplex((s.vertices[1],))] < i
    # within a level vertices precede edges
    dims = np.array([s.dim for s in flt.ordered_simplices])
    for lvl in np.unique(flt.level_index):
        d = dims[flt.level_index == lvl]
        assert np.all(np.diff(d) >= 0)
    for s, w, a in zip(flt.ordered_simplices, flt.values, flt.attribution):
        assert a in s.vertices and f[a] == w
        if s.dim == 1 and f[s.vertices[0]] == f[s.vertices[1]]:
            assert a == s.vertices[0]
    assert np.array_equal(flt.levels[flt.level_index - 1], flt.values)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_small_perturbation_keeps_order(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.5)
    f = injective_filter(rng, n)
    gap = np.diff(np.sort(f)).min()
    f2 = f + rng.uniform(-0.49, 0.49, n) * gap
    a = build_sublevel_filtration(g, f)
    b = build_sublevel_filtration(g, f2)
    assert a.ordered_simplices == b.ordered_simplices
    assert np.array_equal(a.attribution, b.attribution)
