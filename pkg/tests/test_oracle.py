import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfl.filtration import build_sublevel_filtration
from gfl.graph import Graph
from gfl.oracle import betti_table, gf2_rank, multiplicities, oracle_barcode, persistent_betti
from helpers import components, injective_filter, random_graph


def test_gf2_rank():
    assert gf2_rank([]) == 0
    assert gf2_rank([0b11, 0b110, 0b101]) == 2
    assert gf2_rank([1, 2, 4, 8]) == 4


def test_triangle_betti():
    flt = build_sublevel_filtration(Graph(3, [[0, 1], [1, 2], [0, 2]]), [0.2, 0.5, 0.9])
    assert persistent_betti(flt, 0, 2, 2) == 1
    assert persistent_betti(flt, 0, flt.m, flt.m) == 1
    for k in (0, 1):
        for j in range(flt.m + 1):
            assert persistent_betti(flt, k, 0, j) == 0
    with pytest.raises(IndexError):
        persistent_betti(flt, 0, 2, 1)


def test_path_multiplicities():
    flt = build_sublevel_filtration(Graph(3, [[0, 1], [1, 2]]), [0.1, 0.4, 0.2])
    mu, mu_inf = multiplicities(betti_table(flt), 0)
    assert mu == {(1, 2): 0, (1, 3): 0, (2, 3): 1}
    assert mu_inf == {1: 1, 2: 0, 3: 0}


def test_late_bridge():
    # components {0,1} born 0.1 and {2} born 0.2 joined by a bridge at 0.8
    g = Graph(4, [[0, 1], [1, 3], [2, 3]])
    flt = build_sublevel_filtration(g, [0.1, 0.1, 0.2, 0.8])
    fin = [(b, d) for b, d, z in oracle_barcode(flt).b0_finite if not z]
    assert fin == [(0.2, 0.8)]


def test_k4_cycles():
    g = Graph(4, [[i, j] for i in range(4) for j in range(i + 1, 4)])
    rng = np.random.default_rng(0)
    assert len(oracle_barcode(build_sublevel_filtration(g, injective_filter(rng, 4))).b1_essential) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.booleans())
def test_betti_table_properties(seed, n, tied):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.4)
    f = rng.integers(0, 3, n) / 3.0 if tied else injective_filter(rng, n)
    flt = build_sublevel_filtration(g, f)
    bt = betti_table(flt)
    m = flt.m
    assert bt(0, m, m) == components(g)
    for k in (0, 1):
        for i in range(m + 1):
            row = [bt(k, i, j) for j in range(i, m + 1)]
            assert all(a >= b for a, b in zip(row, row[1:]))
            if k == 1:
                assert len(set(row)) <= 1
        mu, mu_inf = multiplicities(bt, k)
        assert all(v >= 0 for v in mu.values()) and all(v >= 0 for v in mu_inf.values())
        if k == 0:
            assert sum(mu_inf.values()) == components(g)
    if g.num_edges == g.num_vertices - components(g):
        mu1, mu1_inf = multiplicities(bt, 1)
        assert not any(mu1.values()) and not any(mu1_inf.values())
