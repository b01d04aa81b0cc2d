"""Synthetic graph families with known first Betti number."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphDataset

_ALIASES = {"trees": "tree", "cycle": "cycles1", "single_cycle": "cycles1", "two_cycle": "cycles2",
            "two_cycles": "cycles2"}
_FAMILY = re.compile(r"^(pa_)?(tree|cycles(\d+))$")


class SyntheticConfigError(ValueError):
    pass


@dataclass
class SyntheticSpec:
    classes: list[str]
    n_per_class: int = 100
    size_min: int = 10
    size_max: int = 30
    seed: int = 0


def parse_family(name: str) -> tuple[bool, int]:
    """``tree`` / ``cyclesK`` with optional ``pa_`` prefix -> (preferential, cycle rank)."""
    key = name.strip().lower()
    pa = key.startswith("pa_")
    base = _ALIASES.get(key[3:] if pa else key, key[3:] if pa else key)
    match = _FAMILY.match(("pa_" if pa else "") + base)
    if not match:
        raise SyntheticConfigError(f"unknown graph family {name!r}")
    return pa, 0 if match.group(2) == "tree" else int(match.group(3))


def random_tree(n: int, rng: np.random.Generator, preferential: bool = False) -> list[tuple[int, int]]:
    """Random recursive tree; with ``preferential`` new vertices attach by degree."""
    edges = []
    degree = np.zeros(n)
    for v in range(1, n):
        if preferential:
            w = degree[:v] + 1.0
            u = int(rng.choice(v, p=w / w.sum()))
        else:
            u = int(rng.integers(v))
        edges.append((u, v))
        degree[u] += 1
        degree[v] += 1
    return edges


def random_family_graph(n: int, cycles: int, rng: np.random.Generator, preferential: bool = False,
                        label: int = 0) -> Graph:
    """Connected graph on ``n`` vertices with ``|E| - |V| + 1 = cycles``."""
    max_extra = n * (n - 1) // 2 - (n - 1)
    if cycles > max_extra:
        raise SyntheticConfigError(f"{n} vertices cannot carry {cycles} independent cycles")
    edges = set(random_tree(n, rng, preferential))
    while len(edges) < n - 1 + cycles:
        u, v = sorted(rng.choice(n, size=2, replace=False).tolist())
        edges.add((u, v))
    return Graph(n, np.array(sorted(edges), dtype=np.int64).reshape(-1, 2), graph_label=label)


def generate_synthetic(spec: SyntheticSpec) -> GraphDataset:
    if not spec.classes:
        raise SyntheticConfigError("at least one graph family is required")
    if spec.size_min < 1 or spec.size_max < spec.size_min:
        raise SyntheticConfigError("invalid size range")
    families = [parse_family(c) for c in spec.classes]
    rng = np.random.default_rng(spec.seed)
    graphs = []
    for label, (pa, cycles) in enumerate(families):
        lo = max(spec.size_min, _min_vertices(cycles))
        if lo > spec.size_max:
            raise SyntheticConfigError(f"{spec.classes[label]!r} needs at least {lo} vertices")
        for _ in range(spec.n_per_class):
            n = int(rng.integers(lo, spec.size_max + 1))
            graphs.append(random_family_graph(n, cycles, rng, pa, label))
    return GraphDataset(graphs)


def _min_vertices(cycles: int) -> int:
    n = 1
    while n * (n - 1) // 2 - (n - 1) < cycles:
        n += 1
    return n


def read_spec(path) -> SyntheticSpec:
    from .config import read_key_values

    kv = read_key_values(path)
    try:
        return SyntheticSpec(
            classes=[c.strip() for c in kv.get("classes", "").split(",") if c.strip()],
            n_per_class=int(kv.get("n_per_class", 100)),
            size_min=int(kv.get("size_min", 10)),
            size_max=int(kv.get("size_max", 30)),
            seed=int(kv.get("seed", 0)),
        )
    except ValueError as exc:
        raise SyntheticConfigError(str(exc)) from None
