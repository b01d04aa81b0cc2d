"""Sublevel-set filtrations of vertex-filtered graphs.

Edges take the maximum of their endpoint values. Simplices are totally
ordered by ``(value, dimension, sorted vertex tuple)``, so faces always come
before cofaces and within one value level every vertex precedes every edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .graph import Graph


class Simplex(NamedTuple):
    vertices: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def kind(self) -> str:
        return "vertex" if len(self.vertices) == 1 else "edge"

    def __repr__(self):
        if len(self.vertices) == 1:
            return f"v{self.vertices[0]}"
        return f"e{self.vertices}"


@dataclass(frozen=True)
class Filtration:
    """Array-backed filtration of a graph.

    ``order[p]`` identifies the simplex at position ``p``: ids ``< n`` are
    vertices, id ``n + e`` is edge ``edges[e]``. ``values``, ``attribution``
    and ``level_index`` are indexed by position. Levels are 1-based ranks
    into the sorted distinct values ``levels``.
    """

    num_vertices: int
    edges: np.ndarray
    vertex_values: np.ndarray
    order: np.ndarray
    values: np.ndarray
    attribution: np.ndarray
    level_index: np.ndarray
    levels: np.ndarray
    vertex_position: np.ndarray  # position of each vertex in the vertex-only order
    edge_order: np.ndarray       # edge ids sorted by filtration position
    edge_attribution: np.ndarray  # per edge id

    @property
    def m(self) -> int:
        """Number of distinct filtration levels."""
        return len(self.levels)

    @property
    def num_simplices(self) -> int:
        return len(self.order)

    def simplex(self, sid: int) -> Simplex:
        if sid < self.num_vertices:
            return Simplex((int(sid),))
        u, v = self.edges[sid - self.num_vertices]
        return Simplex((int(u), int(v)))

    @property
    def ordered_simplices(self) -> list[Simplex]:
        return [self.simplex(int(s)) for s in self.order]

    def __iter__(self) -> Iterator[tuple[Simplex, float]]:
        for sid, val in zip(self.order, self.values):
            yield self.simplex(int(sid)), float(val)


def build_sublevel_filtration(g: Graph, f) -> Filtration:
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    n = g.num_vertices
    if f.shape != (n,):
        raise ValueError(f"expected {n} filter values, got {f.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise FloatingPointError("filter values must be finite")
    edges = g.edges
    u, v = edges[:, 0], edges[:, 1]
    fu, fv = f[u], f[v]
    edge_values = np.maximum(fu, fv)
    # equal endpoint values: the smaller index (u, since u < v) takes the edge
    edge_attr = np.where(fv > fu, v, u)

    vertex_sorted = np.lexsort((np.arange(n), f))
    edge_sorted = np.lexsort((v, u, edge_values))
    vertex_position = np.empty(n, dtype=np.int64)
    vertex_position[vertex_sorted] = np.arange(n)

    # merge vertices and edges: key (value, dim); ties broken by the per-dim sort above
    all_values = np.concatenate([f[vertex_sorted], edge_values[edge_sorted]])
    dims = np.concatenate([np.zeros(n, np.int64), np.ones(len(edges), np.int64)])
    rank_within = np.concatenate([np.arange(n), np.arange(len(edges))])
    merge = np.lexsort((rank_within, dims, all_values))
    ids = np.concatenate([vertex_sorted, n + edge_sorted])[merge]
    values = all_values[merge]
    attribution = np.concatenate([vertex_sorted, edge_attr[edge_sorted]])[merge]
    levels, level_index = np.unique(values, return_inverse=True)
    return Filtration(
        num_vertices=n,
        edges=edges,
        vertex_values=f,
        order=ids,
        values=values,
        attribution=attribution,
        level_index=level_index.reshape(-1) + 1,
        levels=levels,
        vertex_position=vertex_position,
        edge_order=edge_sorted,
        edge_attribution=edge_attr,
    )


def negate_filter(f):
    return -np.asarray(f, dtype=np.float64)
