import dataclasses

import numpy as np
import pytest

from gfl.config import ConfigError, TrainConfig
from gfl.graph import Graph, GraphDataset, stratified_folds
from gfl.persistence import parse_barcodes
from gfl.synthetic import SyntheticSpec, generate_synthetic
from gfl.train import Adam, DivergenceError, learning_rate, run_cv, train_fold


def _cfg(**kw):
    base = dict(synthetic="tree,two_cycle", synthetic_n_per_class=10, synthetic_size_min=6, synthetic_size_max=10,
                epochs=2, folds=2, hidden=8, n_elements=6, batch_size=8)
    base.update(kw)
    return TrainConfig(**base)


def test_learning_rate_schedule():
    assert learning_rate(0, 0.01, 20) == 0.01
    assert learning_rate(19, 0.01, 20) == 0.01
    assert learning_rate(20, 0.01, 20) == 0.005
    # epoch 85 in 1-based counting
    assert learning_rate(84, 0.01, 20) == pytest.approx(0.000625, abs=1e-15)


def test_adam_first_step_is_lr_times_sign():
    p = {"w": np.array([1.0, -2.0, 0.5])}
    opt = Adam(p)
    opt.step(p, {"w": np.array([0.3, -4.0, 0.0])}, lr=0.1)
    np.testing.assert_allclose(p["w"], [0.9, -1.9, 0.5], atol=1e-6)


def test_adam_weight_decay_pulls_to_zero():
    p = {"w": np.array([3.0])}
    opt = Adam(p, weight_decay=1.0)
    for _ in range(50):
        opt.step(p, {"w": np.zeros(1)}, lr=0.05)
    assert 0 < p["w"][0] < 3.0


def test_config_validation_and_file(tmp_path):
    with pytest.raises(ConfigError):
        TrainConfig()
    with pytest.raises(ConfigError):
        TrainConfig(dataset="x", synthetic="tree")
    with pytest.raises(ConfigError):
        _cfg(epochs=0)
    path = tmp_path / "run.cfg"
    path.write_text("dataset = data/DS  # relative to the config\nepochs = 3\nlr = 0.5\n")
    cfg = TrainConfig.from_file(path, seed=4)
    assert cfg.dataset == str((tmp_path / "data" / "DS").resolve())
    assert (cfg.epochs, cfg.lr, cfg.seed) == (3, 0.5, 4)
    path.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        TrainConfig.from_file(path)


def test_one_epoch_and_seed_determinism():
    a = run_cv(_cfg(epochs=1))
    b = run_cv(_cfg(epochs=1))
    assert a.fold_accuracies == b.fold_accuracies
    assert a.loss_curves == b.loss_curves
    assert all(len(c) == 1 for c in a.loss_curves)
    c = run_cv(_cfg(epochs=1, seed=1))
    assert c.loss_curves != a.loss_curves


@pytest.mark.parametrize("readout", ["ph_only", "sum", "baseline"])
def test_other_readouts_train(readout):
    m = run_cv(_cfg(readout=readout))
    assert all(np.isfinite(c).all() for c in m.loss_curves)
    assert 0.0 <= m.mean <= 1.0


def test_ph_only_has_no_filter_parameters():
    _, model = train_fold(_cfg(readout="ph_only", epochs=1), 0, return_model=True)
    assert not any(k.startswith(("gin", "filter", "embed")) for k in model.params)


def test_baseline_ignores_edges():
    cfg = _cfg(readout="baseline", features="uninformative")
    ds = generate_synthetic(SyntheticSpec(["tree", "two_cycle"], 10, 6, 10, seed=0))
    rng = np.random.default_rng(0)
    rewired = GraphDataset([Graph(g.num_vertices, random_edges(rng, g), graph_label=g.graph_label) for g in ds.graphs])
    a = run_cv(cfg, dataset=ds)
    b = run_cv(cfg, dataset=rewired)
    assert a.loss_curves == b.loss_curves and a.fold_accuracies == b.fold_accuracies


def random_edges(rng, g):
    n = g.num_vertices
    iu, ju = np.triu_indices(n, 1)
    pick = rng.permutation(len(iu))[: g.num_edges]
    return np.stack([iu[pick], ju[pick]], axis=1)


def test_test_labels_do_not_leak_into_training():
    cfg = _cfg(epochs=2)
    ds = generate_synthetic(SyntheticSpec(["tree", "two_cycle"], 10, 6, 10, seed=0))
    folds = stratified_folds(ds, cfg.folds, cfg.seed)
    poisoned = GraphDataset([
        dataclasses.replace(g, graph_label=1 - g.graph_label) if i in set(folds[0].tolist()) else g
        for i, g in enumerate(ds.graphs)
    ])
    clean = train_fold(cfg, 0, ds, folds)
    dirty = train_fold(cfg, 0, poisoned, folds)
    assert clean.loss_curve == dirty.loss_curve
    assert dirty.accuracy == pytest.approx(1.0 - clean.accuracy)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_is_reported():
    with pytest.raises(DivergenceError, match="fold 0, epoch 1"):
        train_fold(_cfg(lr=1e300, epochs=3), 0)


def test_fold_sizes():
    labels = np.repeat([0, 1], 500)
    folds = stratified_folds(labels, 10, seed=0)
    assert [len(f) for f in folds] == [100] * 10


def test_dump_barcodes(tmp_path):
    run_cv(_cfg(epochs=1), dump_barcodes=tmp_path)
    files = sorted(tmp_path.glob("fold*/graph*.txt"))
    assert len(files) == 20
    points = parse_barcodes(files[0].read_text())
    assert points and all(dim in (0, 1) for dim, _ in points)
