"""Brute-force persistence ground truth via persistent Betti numbers over GF(2).

Slow on purpose: every pair of filtration steps gets its own rank
computation. Meant for graphs with a dozen vertices, in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .filtration import Filtration


def gf2_rank(vectors: Iterable[int]) -> int:
    """Rank over GF(2) of int-bitset vectors (XOR basis keyed by leading bit)."""
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            lead = v.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = v
                break
            v ^= b
    return len(basis)


def _boundary_vectors(flt: Filtration, edge_ids) -> list[int]:
    return [(1 << int(flt.edges[e, 0])) | (1 << int(flt.edges[e, 1])) for e in edge_ids]


def _step_complexes(flt: Filtration, refined: bool):
    """Vertex and edge id lists of each filtration step, K^0 = empty first.

    With ``refined`` every level ``i`` is split into a vertex-only step
    followed by the full level, giving ``2m`` steps.
    """
    n = flt.num_vertices
    vlevel = np.zeros(n, dtype=np.int64)
    elevel = np.zeros(len(flt.edges), dtype=np.int64)
    for sid, lvl in zip(flt.order.tolist(), flt.level_index.tolist()):
        if sid < n:
            vlevel[sid] = lvl
        else:
            elevel[sid - n] = lvl
    steps = [(np.zeros(0, np.int64), np.zeros(0, np.int64))]
    for i in range(1, flt.m + 1):
        if refined:
            steps.append((np.flatnonzero(vlevel <= i), np.flatnonzero(elevel <= i - 1)))
        steps.append((np.flatnonzero(vlevel <= i), np.flatnonzero(elevel <= i)))
    return steps


def _betti(flt: Filtration, steps, k: int, i: int, j: int) -> int:
    verts_i, edges_i = steps[i]
    if k == 1:
        # no 2-simplices: nothing bounds, so persistent and ordinary H1 agree
        return len(edges_i) - gf2_rank(_boundary_vectors(flt, edges_i))
    if k != 0:
        raise ValueError("only k in {0, 1} is supported")
    _, edges_j = steps[j]
    boundaries = _boundary_vectors(flt, edges_j)
    outside = (1 << flt.num_vertices) - 1
    for v in verts_i.tolist():
        outside &= ~(1 << v)
    # dim(B_j ∩ C_0(K_i)) = rank B_j - rank of B_j projected off K_i's vertices
    meet = gf2_rank(boundaries) - gf2_rank(b & outside for b in boundaries)
    return len(verts_i) - meet


def persistent_betti(flt: Filtration, k: int, i: int, j: int) -> int:
    """Rank of the persistent homology group H_k^{i,j} of the sublevel filtration."""
    if not (0 <= i <= j <= flt.m):
        raise IndexError(f"need 0 <= i <= j <= m={flt.m}, got i={i}, j={j}")
    return _betti(flt, _step_complexes(flt, refined=False), k, i, j)


@dataclass
class BettiTable:
    m: int
    beta: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def __call__(self, k: int, i: int, j: int) -> int:
        if i == 0:
            return 0
        return self.beta[(k, i, j)]


def betti_table(flt: Filtration, refined: bool = False) -> BettiTable:
    steps = _step_complexes(flt, refined)
    m = len(steps) - 1
    table = BettiTable(m)
    for k in (0, 1):
        for i in range(m + 1):
            b1 = _betti(flt, steps, 1, i, i) if k == 1 else None
            for j in range(i, m + 1):
                table.beta[(k, i, j)] = b1 if k == 1 else _betti(flt, steps, 0, i, j)
    return table


def multiplicities(bt: BettiTable, k: int) -> tuple[dict[tuple[int, int], int], dict[int, int]]:
    """Finite multiplicities mu^{i,j} (1 <= i < j <= m) and essential mu^{i,inf}."""
    m = bt.m
    mu = {}
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            mu[(i, j)] = (bt(k, i, j - 1) - bt(k, i, j)) - (bt(k, i - 1, j - 1) - bt(k, i - 1, j))
    mu_inf = {i: bt(k, i, m) - bt(k, i - 1, m) for i in range(1, m + 1)}
    return mu, mu_inf


@dataclass(frozen=True)
class OracleBarcodes:
    b0_finite: list  # sorted (birth, death, zero_persistence)
    b0_essential: list
    b1_essential: list

    def value_multisets(self) -> tuple[list, list, list]:
        return self.b0_finite, self.b0_essential, self.b1_essential


def oracle_barcode(flt: Filtration) -> OracleBarcodes:
    """Barcode value multisets from multiplicities on the refined step sequence.

    Refined step ``2i-1`` holds the vertices of level ``i`` without its edges,
    so classes born and killed inside one level show up as flagged
    zero-persistence points ``(a_i, a_i)``.
    """
    bt = betti_table(flt, refined=True)
    levels = flt.levels

    def value(step):
        return float(levels[(step + 1) // 2 - 1])

    out = []
    for k in (0, 1):
        mu, mu_inf = multiplicities(bt, k)
        if any(c < 0 for c in mu.values()) or any(c < 0 for c in mu_inf.values()):
            raise AssertionError("negative multiplicity: Betti table is inconsistent")
        finite = []
        for (i, j), c in mu.items():
            li, lj = (i + 1) // 2, (j + 1) // 2
            finite.extend([(value(i), value(j), li == lj)] * c)
        if k == 1 and finite:
            raise AssertionError("1-dim classes cannot die in a graph")
        essential = []
        for i, c in mu_inf.items():
            essential.extend([value(i)] * c)
        out.append((sorted(finite), sorted(essential)))
    return OracleBarcodes(out[0][0], out[0][1], out[1][1])
