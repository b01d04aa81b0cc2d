import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfl.synthetic import (
    SyntheticConfigError,
    SyntheticSpec,
    generate_synthetic,
    parse_family,
    random_family_graph,
    read_spec,
)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(0, 4), st.booleans())
def test_cycle_rank_and_connectivity(seed, n, k, pa):
    rng = np.random.default_rng(seed)
    if k > n * (n - 1) // 2 - (n - 1):
        with pytest.raises(SyntheticConfigError):
            random_family_graph(n, k, rng, pa)
        return
    g = random_family_graph(n, k, rng, pa)
    assert g.num_edges - g.num_vertices + 1 == k
    assert g.num_components() == 1


def test_trees_vs_two_cycles_dataset():
    ds = generate_synthetic(SyntheticSpec(["trees", "two_cycle"], 100, 10, 30, seed=0))
    assert len(ds) == 200 and ds.num_classes == 2
    for g in ds.graphs:
        assert 10 <= g.num_vertices <= 30
        assert g.num_edges - g.num_vertices + 1 == (0 if g.graph_label == 0 else 2)


def test_deterministic_per_seed():
    a = generate_synthetic(SyntheticSpec(["tree", "cycles1"], 5, seed=3))
    b = generate_synthetic(SyntheticSpec(["tree", "cycles1"], 5, seed=3))
    assert [g.edges.tolist() for g in a.graphs] == [g.edges.tolist() for g in b.graphs]


def test_family_names_and_errors(tmp_path):
    assert parse_family("pa_cycles3") == (True, 3)
    assert parse_family("two_cycle") == (False, 2)
    with pytest.raises(SyntheticConfigError):
        parse_family("wheel")
    with pytest.raises(SyntheticConfigError):
        generate_synthetic(SyntheticSpec([]))
    with pytest.raises(SyntheticConfigError):
        generate_synthetic(SyntheticSpec(["cycles40"], size_min=3, size_max=5))
    spec = tmp_path / "s.cfg"
    spec.write_text("classes = tree, pa_two_cycle  # two classes\nn_per_class = 4\nseed = 9\n")
    parsed = read_spec(spec)
    assert parsed.classes == ["tree", "pa_two_cycle"]
    assert parsed.n_per_class == 4 and parsed.seed == 9
    assert len(generate_synthetic(parsed)) == 8
