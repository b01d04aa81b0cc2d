import numpy as np

from gfl.bench import loglog_slope, persistence_seconds, random_sparse_graph, scaling_graphs, timing_benchmark, write_csv
from gfl.graph import Graph


def test_empty_graph_is_fast():
    assert persistence_seconds(Graph(0, np.zeros((0, 2))), np.zeros(0), repeats=3) < 1e-2


def test_random_sparse_graph_size():
    rng = np.random.default_rng(0)
    for m in (100, 1000, 10000):
        g = random_sparse_graph(m, rng)
        assert abs(g.num_vertices + g.num_edges - m) <= max(2, 0.01 * m)


def test_loglog_slope_recovers_power_law():
    m = np.array([1e2, 1e3, 1e4, 1e5])
    assert abs(loglog_slope(list(zip(m, 3e-6 * m))) - 1.0) < 1e-12
    assert abs(loglog_slope(list(zip(m, 1e-9 * m ** 2))) - 2.0) < 1e-12


def test_timing_rows_and_csv(tmp_path):
    rows = timing_benchmark(scaling_graphs([50, 20, 200]), repeats=1)
    assert [m for m, _ in rows] == sorted(m for m, _ in rows)
    assert all(s > 0 for _, s in rows)
    write_csv(rows, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "m,seconds" and len(lines) == 4
