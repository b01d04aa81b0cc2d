"""Graphs, TU-format dataset ingestion, initial node features and CV folds."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


class DatasetFormatError(ValueError):
    """A TU dataset file is malformed or structurally inconsistent."""


class FeatureConfigError(ValueError):
    pass


class StratificationError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph; read as the 1-dim simplicial complex K_G.

    ``edges`` is an ``(E, 2)`` int array with ``i < j`` in every row.
    """

    num_vertices: int
    edges: np.ndarray
    node_labels: np.ndarray | None = None
    graph_label: int = 0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            if np.any(lo == hi):
                raise ValueError("self-loops are not allowed")
            if lo.min() < 0 or hi.max() >= self.num_vertices:
                raise ValueError("edge endpoint out of range")
            edges = np.unique(np.stack([lo, hi], axis=1), axis=0)
        object.__setattr__(self, "edges", edges)
        edges.setflags(write=False)
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64)
            if labels.shape != (self.num_vertices,):
                raise ValueError("node_labels must have one entry per vertex")
            if len(labels) and labels.min() < 0:
                raise ValueError("node labels must be nonnegative")
            labels.setflags(write=False)
            object.__setattr__(self, "node_labels", labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.num_vertices)

    def num_components(self) -> int:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        if self.num_vertices == 0:
            return 0
        n = self.num_vertices
        adj = coo_matrix(
            (np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])), shape=(n, n)
        )
        return int(connected_components(adj, directed=False)[0])

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        labels = None
        if self.node_labels is not None:
            labels = np.empty_like(self.node_labels)
            labels[perm] = self.node_labels
        return Graph(self.num_vertices, perm[self.edges], labels, self.graph_label)


@dataclass
class GraphDataset:
    graphs: list[Graph]
    num_classes: int = field(init=False)
    max_degree: int = field(init=False)
    num_node_labels: int = field(init=False)

    def __post_init__(self):
        labels = {g.graph_label for g in self.graphs}
        self.num_classes = len(labels)
        self.max_degree = max((int(g.degrees().max(initial=0)) for g in self.graphs), default=0)
        self.num_node_labels = max(
            (int(g.node_labels.max(initial=-1)) + 1 for g in self.graphs if g.node_labels is not None),
            default=0,
        )

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.graph_label for g in self.graphs], dtype=np.int64)


def _int_rows(data: bytes | str, name: str, width: int | None) -> list[list[int]]:
    text = data.decode() if isinstance(data, bytes) else data
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = [int(tok) for tok in line.replace(",", " ").split()]
        except ValueError:
            raise DatasetFormatError(f"{name}: line {lineno}: not an integer record: {line!r}") from None
        if width is not None and len(row) != width:
            raise DatasetFormatError(f"{name}: line {lineno}: expected {width} fields, got {len(row)}")
        rows.append(row)
    return rows


def _stream(files: Mapping[str, bytes | str], suffix: str, required: bool = True):
    for key, value in files.items():
        if key == suffix or key.endswith("_" + suffix) or key.endswith("_" + suffix + ".txt"):
            return key, value
    if required:
        raise DatasetFormatError(f"missing stream '{suffix}'")
    return None, None


def parse_tu_dataset(files: Mapping[str, bytes | str]) -> GraphDataset:
    """Parse TU benchmark streams keyed by name (``DS_A``, ``DS_graph_indicator``, ...).

    Keys are matched on their suffix, so both ``"A"`` and ``"IMDB-BINARY_A.txt"`` work.
    """
    a_name, a_data = _stream(files, "A")
    i_name, i_data = _stream(files, "graph_indicator")
    l_name, l_data = _stream(files, "graph_labels")
    n_name, n_data = _stream(files, "node_labels", required=False)

    indicator = np.array([r[0] for r in _int_rows(i_data, i_name, 1)], dtype=np.int64)
    raw_labels = [r[0] for r in _int_rows(l_data, l_name, 1)]
    num_graphs = len(raw_labels)
    if len(indicator) and (indicator.min() < 1 or indicator.max() > num_graphs):
        raise DatasetFormatError(f"{i_name}: graph id outside 1..{num_graphs}")
    if len(indicator) > 1 and np.any(np.diff(indicator) < 0):
        raise DatasetFormatError(f"{i_name}: nodes must be grouped by graph in ascending order")

    node_labels = None
    if n_data is not None:
        node_labels = np.array([r[0] for r in _int_rows(n_data, n_name, 1)], dtype=np.int64)
        if len(node_labels) != len(indicator):
            raise DatasetFormatError(f"{n_name}: {len(node_labels)} labels for {len(indicator)} nodes")
        if len(node_labels):
            node_labels = node_labels - node_labels.min()

    counts = np.bincount(indicator - 1, minlength=num_graphs) if len(indicator) else np.zeros(num_graphs, int)
    offsets = np.concatenate([[0], np.cumsum(counts)])

    per_graph: list[list[tuple[int, int]]] = [[] for _ in range(num_graphs)]
    for lineno, row in enumerate(_int_rows(a_data, a_name, 2), start=1):
        u, v = row[0] - 1, row[1] - 1
        if not (0 <= u < len(indicator) and 0 <= v < len(indicator)):
            raise DatasetFormatError(f"{a_name}: line {lineno}: node id out of range")
        gu, gv = indicator[u] - 1, indicator[v] - 1
        if gu != gv:
            raise DatasetFormatError(f"{a_name}: line {lineno}: edge ({u + 1}, {v + 1}) spans graphs {gu + 1} and {gv + 1}")
        if u == v:
            raise DatasetFormatError(f"{a_name}: line {lineno}: self-loop on node {u + 1}")
        per_graph[gu].append((min(u, v) - offsets[gu], max(u, v) - offsets[gu]))

    classes = {lab: i for i, lab in enumerate(sorted(set(raw_labels)))}
    graphs = []
    for gi in range(num_graphs):
        lo, hi = offsets[gi], offsets[gi + 1]
        graphs.append(
            Graph(
                num_vertices=int(hi - lo),
                edges=np.array(per_graph[gi], dtype=np.int64).reshape(-1, 2),
                node_labels=None if node_labels is None else node_labels[lo:hi],
                graph_label=classes[raw_labels[gi]],
            )
        )
    return GraphDataset(graphs)


def load_tu_dataset(path: str | os.PathLike) -> GraphDataset:
    """Load ``<path>/<DS>_A.txt`` etc.; ``path`` is the dataset directory."""
    path = Path(path)
    files = {p.stem: p.read_bytes() for p in path.glob("*.txt")}
    if not files:
        raise FileNotFoundError(f"no TU dataset files in {path}")
    return parse_tu_dataset(files)


def serialize_tu_dataset(dataset: GraphDataset, name: str = "DS") -> dict[str, str]:
    """Inverse of :func:`parse_tu_dataset`; returns ``{stream name: text}``."""
    a_lines, ind_lines, lab_lines, node_lines = [], [], [], []
    have_labels = all(g.node_labels is not None for g in dataset.graphs) and len(dataset.graphs) > 0
    offset = 0
    for gi, g in enumerate(dataset.graphs, start=1):
        for u, v in g.edges:
            a_lines.append(f"{u + offset + 1}, {v + offset + 1}")
            a_lines.append(f"{v + offset + 1}, {u + offset + 1}")
        ind_lines.extend([str(gi)] * g.num_vertices)
        lab_lines.append(str(g.graph_label))
        if have_labels:
            node_lines.extend(str(x) for x in g.node_labels)
        offset += g.num_vertices
    out = {
        f"{name}_A": "\n".join(a_lines) + "\n",
        f"{name}_graph_indicator": "\n".join(ind_lines) + "\n",
        f"{name}_graph_labels": "\n".join(lab_lines) + "\n",
    }
    if have_labels:
        out[f"{name}_node_labels"] = "\n".join(node_lines) + "\n"
    return out


def write_tu_dataset(dataset: GraphDataset, directory: str | os.PathLike, name: str | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for key, text in serialize_tu_dataset(dataset, name or directory.name).items():
        (directory / f"{key}.txt").write_text(text)
    return directory


FEATURE_MODES = ("degree", "uninformative", "degree_and_label")


def initial_features(g: Graph, mode: str = "degree") -> np.ndarray:
    """Per-vertex embedding indices.

    ``degree`` -> ``deg(v)``; ``uninformative`` -> all zeros;
    ``degree_and_label`` -> ``(n, 2)`` array of ``(deg(v), lab(v))``.
    """
    if mode == "degree":
        return g.degrees()
    if mode == "uninformative":
        return np.zeros(g.num_vertices, dtype=np.int64)
    if mode == "degree_and_label":
        if g.node_labels is None:
            raise FeatureConfigError("degree_and_label features need node labels")
        return np.stack([g.degrees(), g.node_labels], axis=1)
    raise FeatureConfigError(f"unknown feature mode {mode!r}")


def stratified_folds(dataset: GraphDataset | Sequence[int], k: int, seed: int = 0) -> list[np.ndarray]:
    """Split indices into ``k`` disjoint folds with per-class counts balanced to +-1."""
    if k < 2:
        raise StratificationError("need at least 2 folds")
    labels = dataset.labels if isinstance(dataset, GraphDataset) else np.asarray(dataset)
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    start = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise StratificationError(f"class {cls} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        # continue the round-robin where the previous class stopped so fold sizes stay balanced
        for t, idx in enumerate(members):
            buckets[(start + t) % k].append(int(idx))
        start = (start + len(members)) % k
    return [np.sort(np.array(b, dtype=np.int64)) for b in buckets]
