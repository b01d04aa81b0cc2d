"""0- and 1-dimensional persistence of graph filtrations.

Two engines produce identical output: a union-find sweep (the fast path used
in training) and GF(2) column reduction of the boundary matrix. Every barcode
point remembers the vertex whose filter value realizes its birth and death;
gradients are routed through these attributions.

For a 1-dimensional complex nothing can kill a cycle, so all 1-dim classes
are essential and the finite 1-dim barcode is always empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .filtration import Filtration


class BarcodePoint(NamedTuple):
    birth: float
    death: float
    birth_attribution: int
    death_attribution: int | None
    zero_persistence: bool = False


@dataclass(frozen=True)
class RawBarcodes:
    """Barcodes of one filtration, stored as attribution vertex arrays.

    Values are read off ``vertex_values`` (the filter the filtration was
    built from), so ``birth == vertex_values[birth_vertex]`` by construction.
    """

    vertex_values: np.ndarray
    finite_birth: np.ndarray    # vertex ids
    finite_death: np.ndarray    # vertex ids
    finite_zero: np.ndarray     # bool: birth and death on the same level
    essential0: np.ndarray      # vertex ids
    essential1: np.ndarray      # vertex ids

    @property
    def b0_finite(self) -> list[BarcodePoint]:
        f = self.vertex_values
        return [
            BarcodePoint(float(f[b]), float(f[d]), int(b), int(d), bool(z))
            for b, d, z in zip(self.finite_birth, self.finite_death, self.finite_zero)
        ]

    @property
    def b0_essential(self) -> np.ndarray:
        return self.vertex_values[self.essential0]

    @property
    def b1_essential(self) -> np.ndarray:
        return self.vertex_values[self.essential1]

    def value_multisets(self) -> tuple[list, list, list]:
        """Sorted value multisets ``(b0 finite (b, d, zero), b0 ess, b1 ess)``."""
        f = self.vertex_values
        fin = sorted(
            (float(f[b]), float(f[d]), bool(z))
            for b, d, z in zip(self.finite_birth, self.finite_death, self.finite_zero)
        )
        return fin, sorted(self.b0_essential.tolist()), sorted(self.b1_essential.tolist())

    def canonical(self) -> tuple:
        """Sorted multisets including attributions; equal iff point-for-point identical."""
        fin = sorted(zip(self.finite_birth.tolist(), self.finite_death.tolist(), self.finite_zero.tolist()))
        return fin, sorted(self.essential0.tolist()), sorted(self.essential1.tolist())


def _raw(f, fin_b, fin_d, ess0, ess1) -> RawBarcodes:
    fin_b = np.asarray(fin_b, dtype=np.int64)
    fin_d = np.asarray(fin_d, dtype=np.int64)
    return RawBarcodes(
        vertex_values=f,
        finite_birth=fin_b,
        finite_death=fin_d,
        finite_zero=f[fin_b] == f[fin_d],
        essential0=np.asarray(ess0, dtype=np.int64),
        essential1=np.asarray(ess1, dtype=np.int64),
    )


def persistence_union_find(flt: Filtration) -> RawBarcodes:
    """Elder-rule union-find sweep over the edges in filtration order.

    Each component is represented by its oldest vertex (earliest in the
    vertex order, i.e. smallest ``(value, index)``). When an edge merges two
    components the younger one dies at the edge's value.
    """
    n = flt.num_vertices
    parent = list(range(n))
    pos = flt.vertex_position.tolist()
    order = flt.edge_order
    eu = flt.edges[order, 0].tolist()
    ev = flt.edges[order, 1].tolist()
    ea = flt.edge_attribution[order].tolist()
    fin_b, fin_d, ess1 = [], [], []
    for a, b, w in zip(eu, ev, ea):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            ess1.append(w)
            continue
        if pos[a] > pos[b]:
            a, b = b, a
        parent[b] = a
        fin_b.append(b)
        fin_d.append(w)
    roots = [v for v in range(n) if parent[v] == v]
    roots.sort(key=pos.__getitem__)
    return _raw(flt.vertex_values, fin_b, fin_d, roots, ess1)


def boundary_columns(flt: Filtration) -> list[int]:
    """Boundary matrix over GF(2) in filtration order, one int bitset per column.

    Bit ``p`` of a column is set when the simplex at position ``p`` is a face.
    """
    n = flt.num_vertices
    full_pos = np.empty(flt.num_simplices, dtype=np.int64)
    full_pos[flt.order] = np.arange(flt.num_simplices)
    cols = []
    for sid in flt.order.tolist():
        if sid < n:
            cols.append(0)
        else:
            u, v = flt.edges[sid - n]
            cols.append((1 << int(full_pos[u])) | (1 << int(full_pos[v])))
    return cols


def persistence_matrix_reduction(flt: Filtration) -> RawBarcodes:
    """Standard left-to-right column reduction; pairs come from lowest ones."""
    n = flt.num_vertices
    cols = boundary_columns(flt)
    order = flt.order.tolist()
    attribution = flt.attribution.tolist()
    pivot_col: dict[int, int] = {}
    paired = [False] * len(cols)
    fin_b, fin_d, ess1 = [], [], []
    for j, col in enumerate(cols):
        while col:
            low = col.bit_length() - 1
            other = pivot_col.get(low)
            if other is None:
                break
            col ^= cols[other]
        cols[j] = col
        if col:
            low = col.bit_length() - 1
            pivot_col[low] = j
            paired[low] = paired[j] = True
            fin_b.append(order[low])
            fin_d.append(attribution[j])
        elif order[j] >= n:
            ess1.append(attribution[j])
    ess0 = [order[p] for p in range(len(cols)) if order[p] < n and not paired[p]]
    return _raw(flt.vertex_values, fin_b, fin_d, ess0, ess1)


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Barcode:
    """One processed barcode channel.

    ``values[p, k] == signs[p, k] * f[vertices[p, k]]`` where ``f`` is the
    original (sublevel) filter; ``source`` is 0 for points from ``f`` and 1
    for mirrored points from ``-f``.
    """

    values: np.ndarray
    vertices: np.ndarray
    signs: np.ndarray
    source: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.values)

    @classmethod
    def empty(cls, d: int) -> "Barcode":
        return cls(np.zeros((0, d)), np.zeros((0, d), np.int64), np.zeros((0, d)), np.zeros(0, np.int64))

    @classmethod
    def concat(cls, parts: list["Barcode"]) -> "Barcode":
        return cls(
            np.concatenate([p.values for p in parts]),
            np.concatenate([p.vertices for p in parts]),
            np.concatenate([p.signs for p in parts]),
            np.concatenate([p.source for p in parts]),
        )


CHANNELS = ("h0", "h0_essential", "h1_essential")


@dataclass(frozen=True)
class BarcodeSet:
    h0: Barcode
    h0_essential: Barcode
    h1_essential: Barcode

    def channels(self) -> tuple[Barcode, Barcode, Barcode]:
        return self.h0, self.h0_essential, self.h1_essential

    def __iter__(self) -> Iterator[Barcode]:
        return iter(self.channels())


def assemble_processed_barcodes(sub: RawBarcodes, sup: RawBarcodes) -> BarcodeSet:
    """Union of sublevel barcodes of ``f`` with mirrored superlevel barcodes of ``-f``.

    Zero-persistence points are dropped. Finite superlevel points ``(b, d)``
    map to ``(-d, -b)``; essential superlevel births ``b`` map to ``-b``.
    """
    f = sub.vertex_values
    if len(f) and (f.min() < 0.0 or f.max() > 1.0):
        raise DomainError("filter values must lie in [0, 1] for mirroring")
    g = sup.vertex_values

    keep = ~sub.finite_zero
    sub_fin_v = np.stack([sub.finite_birth[keep], sub.finite_death[keep]], axis=1)
    keep = ~sup.finite_zero
    # mirrored: new birth is -death, new death is -birth
    sup_fin_v = np.stack([sup.finite_death[keep], sup.finite_birth[keep]], axis=1)

    def channel(sub_v, sup_v, d):
        sub_v = sub_v.reshape(-1, d)
        sup_v = sup_v.reshape(-1, d)
        vertices = np.concatenate([sub_v, sup_v])
        values = np.concatenate([f[sub_v], -g[sup_v]])
        # g = -f and the mirror negates again, so every coordinate is +f[v]
        signs = np.ones(vertices.shape)
        source = np.concatenate([np.zeros(len(sub_v), np.int64), np.ones(len(sup_v), np.int64)])
        return Barcode(values.reshape(-1, d), vertices, signs, source)

    return BarcodeSet(
        channel(sub_fin_v, sup_fin_v, 2),
        channel(sub.essential0, sup.essential0, 1),
        channel(sub.essential1, sup.essential1, 1),
    )


def compute_barcodes(g, f, engine: str = "union_find") -> BarcodeSet:
    """Filter -> sub/superlevel persistence -> processed barcodes for one graph."""
    from .filtration import build_sublevel_filtration, negate_filter

    run = persistence_union_find if engine == "union_find" else persistence_matrix_reduction
    sub = run(build_sublevel_filtration(g, f))
    sup = run(build_sublevel_filtration(g, negate_filter(f)))
    return assemble_processed_barcodes(sub, sup)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def format_barcodes(bs: BarcodeSet) -> str:
    """Line format ``dim birth death birth_attr death_attr``; essential deaths are ``inf`` / ``-``."""
    lines = []
    for (b, d), (vb, vd) in zip(bs.h0.values.tolist(), bs.h0.vertices.tolist()):
        lines.append(f"0 {_fmt(b)} {_fmt(d)} {vb} {vd}")
    for dim, ch in ((0, bs.h0_essential), (1, bs.h1_essential)):
        for (b,), (vb,) in zip(ch.values.tolist(), ch.vertices.tolist()):
            lines.append(f"{dim} {_fmt(b)} inf {vb} -")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_barcodes(text: str) -> list[tuple[int, BarcodePoint]]:
    """Inverse of :func:`format_barcodes`; returns ``(dim, point)`` pairs."""
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 5 fields")
        dim = int(parts[0])
        if dim not in (0, 1):
            raise ValueError(f"line {lineno}: unsupported dimension {dim}")
        death_attr = None if parts[4] == "-" else int(parts[4])
        points.append((dim, BarcodePoint(float(parts[1]), float(parts[2]), int(parts[3]), death_attr)))
    return points


def write_raw_barcodes(raw: RawBarcodes) -> str:
    """Same line format for unprocessed barcodes (zero-persistence points included)."""
    lines = [f"0 {_fmt(p.birth)} {_fmt(p.death)} {p.birth_attribution} {p.death_attribution}" for p in raw.b0_finite]
    lines += [f"0 {_fmt(raw.vertex_values[v])} inf {v} -" for v in raw.essential0.tolist()]
    lines += [f"1 {_fmt(raw.vertex_values[v])} inf {v} -" for v in raw.essential1.tolist()]
    return "\n".join(lines) + ("\n" if lines else "")
