"""Runtime of the forward persistence computation versus simplex count."""

from __future__ import annotations

import time
from typing import Iterable, Sequence

import numpy as np

from .filtration import build_sublevel_filtration, negate_filter
from .graph import Graph
from .persistence import persistence_union_find


def persistence_seconds(g: Graph, f: np.ndarray, repeats: int = 3) -> float:
    """Best-of-``repeats`` time for sub- plus superlevel union-find persistence."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        persistence_union_find(build_sublevel_filtration(g, f))
        persistence_union_find(build_sublevel_filtration(g, negate_filter(f)))
        best = min(best, time.perf_counter() - t0)
    return best


def timing_benchmark(graphs: Iterable[Graph], repeats: int = 3, seed: int = 0) -> list[tuple[int, float]]:
    """``(m, seconds)`` per graph, sorted by ``m = |V| + |E|``; filters are uniform random."""
    rng = np.random.default_rng(seed)
    rows = []
    for g in graphs:
        f = rng.uniform(0.0, 1.0, g.num_vertices)
        rows.append((g.num_vertices + g.num_edges, persistence_seconds(g, f, repeats)))
    rows.sort()
    return rows


def random_sparse_graph(num_simplices: int, rng: np.random.Generator, mean_degree: float = 4.0) -> Graph:
    """Random graph with about ``num_simplices`` vertices plus edges."""
    n = max(1, int(round(num_simplices / (1.0 + mean_degree / 2.0))))
    e = num_simplices - n
    if n < 2 or e <= 0:
        return Graph(n, np.zeros((0, 2), np.int64))
    pairs = rng.integers(0, n, size=(int(e * 1.1) + 8, 2))
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    pairs = pairs[rng.permutation(len(pairs))[:e]]
    return Graph(n, pairs)


def scaling_graphs(sizes: Sequence[int], per_size: int = 1, seed: int = 0) -> list[Graph]:
    rng = np.random.default_rng(seed)
    return [random_sparse_graph(m, rng) for m in sizes for _ in range(per_size)]


def loglog_slope(rows: Sequence[tuple[int, float]]) -> float:
    m = np.array([r[0] for r in rows], dtype=float)
    t = np.array([r[1] for r in rows], dtype=float)
    keep = (m > 0) & (t > 0)
    slope, _ = np.polyfit(np.log(m[keep]), np.log(t[keep]), 1)
    return float(slope)


def write_csv(rows: Sequence[tuple[int, float]], path) -> None:
    with open(path, "w") as fh:
        fh.write("m,seconds\n")
        for m, s in rows:
            fh.write(f"{m},{s:.9g}\n")
