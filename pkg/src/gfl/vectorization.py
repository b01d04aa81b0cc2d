"""Barcode coordinate functions built from rational hat structure elements.

    s(p; c, r) = 1 / (1 + |p - c|_1) - 1 / (1 + | |r| - |p - c|_1 |)

Essential barcodes hold births only; for them ``p`` and ``c`` are scalars and
the l1 norm is the absolute value. Nondifferentiable points use sign(0) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .persistence import BarcodeSet

N_ELEMENTS = 100
CHANNEL_DIMS = (2, 1, 1)


@dataclass
class StructureElement:
    c: np.ndarray
    r: float


def rational_hat(p, e: StructureElement) -> float:
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    c = np.atleast_1d(np.asarray(e.c, dtype=np.float64))
    if p.shape != c.shape:
        raise ValueError("point and center dimensions differ")
    dist = np.abs(p - c).sum()
    return float(1.0 / (1.0 + dist) - 1.0 / (1.0 + abs(abs(e.r) - dist)))


def rational_hat_grad(p, e: StructureElement) -> tuple[np.ndarray, np.ndarray, float]:
    """Partial derivatives ``(ds/dp, ds/dc, ds/dr)``."""
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    c = np.atleast_1d(np.asarray(e.c, dtype=np.float64))
    diff = p - c
    dist = np.abs(diff).sum()
    gap = abs(e.r) - dist
    t1 = 1.0 / (1.0 + dist)
    t2 = 1.0 / (1.0 + abs(gap))
    ds_ddist = -t1 * t1 - np.sign(gap) * t2 * t2
    dp = ds_ddist * np.sign(diff)
    dr = float(np.sign(gap) * t2 * t2 * np.sign(e.r))
    return dp, -dp, dr


def hat_matrix(points: np.ndarray, centers: np.ndarray, radii: np.ndarray, with_grad: bool = False):
    """Evaluate all ``(point, element)`` pairs at once.

    ``points`` is ``(P, d)``, ``centers`` ``(K, d)``, ``radii`` ``(K,)``.
    Returns ``s`` of shape ``(P, K)``; with ``with_grad`` also the pieces
    ``(ds/ddist, sign(p - c), ds/dr)`` needed by the backward pass.
    """
    diff = points[:, None, :] - centers[None, :, :]
    dist = np.abs(diff).sum(axis=2)
    gap = np.abs(radii)[None, :] - dist
    t1 = 1.0 / (1.0 + dist)
    t2 = 1.0 / (1.0 + np.abs(gap))
    s = t1 - t2
    if not with_grad:
        return s
    sg = np.sign(gap)
    t2sq = t2 * t2
    ds_ddist = -t1 * t1 - sg * t2sq
    ds_dr = sg * t2sq * np.sign(radii)[None, :]
    return s, ds_ddist, np.sign(diff), ds_dr


@dataclass
class VectorizationParams:
    """Centers and radii of the structure elements, one block per channel."""

    centers: list[np.ndarray]  # (K, 2), (K, 1), (K, 1)
    radii: list[np.ndarray]    # (K,) each

    def __post_init__(self):
        if len(self.centers) != 3 or len(self.radii) != 3:
            raise ValueError("expected three barcode channels")
        sizes = {len(c) for c in self.centers} | {len(r) for r in self.radii}
        if len(sizes) != 1:
            raise ValueError("every channel needs the same number of elements")
        for c, d in zip(self.centers, CHANNEL_DIMS):
            if c.ndim != 2 or c.shape[1] != d:
                raise ValueError(f"center block must be (K, {d})")

    @property
    def n_elements(self) -> int:
        return len(self.radii[0])

    @property
    def output_dim(self) -> int:
        return 3 * self.n_elements

    def element(self, channel: int, k: int) -> StructureElement:
        return StructureElement(self.centers[channel][k], float(self.radii[channel][k]))

    @classmethod
    def init(cls, rng: np.random.Generator, n_elements: int = N_ELEMENTS, radius: float = 0.25):
        centers = [rng.uniform(0.0, 1.0, size=(n_elements, d)) for d in CHANNEL_DIMS]
        radii = [np.full(n_elements, radius) for _ in CHANNEL_DIMS]
        return cls(centers, radii)


class DiagonalPointError(ValueError):
    pass


@dataclass
class VectorizeTape:
    points: list[np.ndarray]
    graph_index: list[np.ndarray]
    pieces: list[tuple]
    num_graphs: int


def _check_offdiagonal(points: np.ndarray):
    if len(points) and np.any(points[:, 0] == points[:, 1]):
        raise DiagonalPointError("barcode contains zero-persistence points; filter them before vectorizing")


def vectorize_batch(
    channel_points: list[np.ndarray],
    channel_graphs: list[np.ndarray],
    num_graphs: int,
    vp: VectorizationParams,
) -> tuple[np.ndarray, VectorizeTape]:
    """Sum of hats per graph for several graphs; returns ``(num_graphs, 3K)``."""
    K = vp.n_elements
    out = np.zeros((num_graphs, 3 * K))
    pieces = []
    for ch, (pts, gi) in enumerate(zip(channel_points, channel_graphs)):
        if ch == 0:
            _check_offdiagonal(pts)
        s, ds_ddist, sgn, ds_dr = hat_matrix(pts, vp.centers[ch], vp.radii[ch], with_grad=True)
        block = out[:, ch * K:(ch + 1) * K]
        # accumulate in a canonical point order so the sum ignores input order
        order = np.lexsort(tuple(pts.T[::-1]) + (gi,))
        np.add.at(block, gi[order], s[order])
        pieces.append((ds_ddist, sgn, ds_dr))
    return out, VectorizeTape(channel_points, channel_graphs, pieces, num_graphs)


def vectorize_backward(tape: VectorizeTape, grad_out: np.ndarray, vp: VectorizationParams):
    """Gradients w.r.t. each channel's points, centers and radii."""
    K = vp.n_elements
    grad_points, grad_centers, grad_radii = [], [], []
    for ch, (ds_ddist, sgn, ds_dr) in enumerate(tape.pieces):
        g = grad_out[tape.graph_index[ch], ch * K:(ch + 1) * K]  # (P, K)
        w = g * ds_ddist
        contrib = w[:, :, None] * sgn  # d/dp for each (point, element)
        grad_points.append(contrib.sum(axis=1))
        grad_centers.append(-contrib.sum(axis=0))
        grad_radii.append((g * ds_dr).sum(axis=0))
    return grad_points, grad_centers, grad_radii


def vectorize(bs: BarcodeSet, vp: VectorizationParams) -> np.ndarray:
    """Single-graph vectorization: ``3K`` vector, channel-major."""
    pts = [ch.values for ch in bs.channels()]
    gi = [np.zeros(len(p), dtype=np.int64) for p in pts]
    out, _ = vectorize_batch(pts, gi, 1, vp)
    return out[0]
