"""Cross-validated training with Adam and a step-halving learning rate."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .graph import GraphDataset, load_tu_dataset, stratified_folds
from .model import Model, ModelConfig, make_batch
from .persistence import format_barcodes
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    pass


class Adam:
    """Adam with L2 weight decay added to the gradient."""

    def __init__(self, params: dict[str, np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        self.beta1, self.beta2, self.eps, self.weight_decay = beta1, beta2, eps, weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1 ** self.t
        c2 = 1 - b2 ** self.t
        for k, p in params.items():
            g = grads[k] + self.weight_decay * p
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            p -= lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def learning_rate(epoch: int, lr0: float, period: int) -> float:
    """Rate for 0-based ``epoch``: halved after every ``period`` epochs."""
    return lr0 * 0.5 ** (epoch // period)


def load_dataset(cfg: TrainConfig) -> GraphDataset:
    if cfg.dataset:
        return load_tu_dataset(cfg.dataset)
    spec = SyntheticSpec(
        classes=[c.strip() for c in cfg.synthetic.split(",") if c.strip()],
        n_per_class=cfg.synthetic_n_per_class,
        size_min=cfg.synthetic_size_min,
        size_max=cfg.synthetic_size_max,
        seed=cfg.synthetic_seed,
    )
    return generate_synthetic(spec)


def model_config(cfg: TrainConfig, ds: GraphDataset) -> ModelConfig:
    label_vocab = max(ds.num_node_labels, 1) if cfg.features == "degree_and_label" else 0
    return ModelConfig(
        num_classes=ds.num_classes,
        feature_vocab=1 if cfg.features == "uninformative" else ds.max_degree + 1,
        label_vocab=label_vocab,
        readout=cfg.readout,
        hidden=cfg.hidden,
        n_elements=cfg.n_elements,
    )


@dataclass
class FoldResult:
    fold: int
    accuracy: float
    loss_curve: list[float]
    train_seconds: float
    eval_seconds: float


@dataclass
class RunMetrics:
    fold_accuracies: list[float]
    mean: float
    std: float
    loss_curves: list[list[float]]
    timings: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_folds(cls, results: list[FoldResult]) -> "RunMetrics":
        acc = np.array([r.accuracy for r in results])
        return cls(
            fold_accuracies=acc.tolist(),
            mean=float(acc.mean()),
            std=float(acc.std()),
            loss_curves=[r.loss_curve for r in results],
            timings={
                "train_seconds": float(sum(r.train_seconds for r in results)),
                "eval_seconds": float(sum(r.eval_seconds for r in results)),
            },
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _batches(ds, idx, cfg, mcfg):
    return make_batch(
        [ds[i] for i in idx], cfg.features, mcfg.feature_vocab, mcfg.label_vocab or None, ds.max_degree
    )


def train_fold(cfg: TrainConfig, fold_index: int, dataset: GraphDataset | None = None,
               folds: list[np.ndarray] | None = None, dump_barcodes: str | Path | None = None,
               return_model: bool = False):
    """Train on all folds but ``fold_index``; evaluate the final-epoch model on it."""
    ds = dataset if dataset is not None else load_dataset(cfg)
    folds = folds if folds is not None else stratified_folds(ds, cfg.folds, cfg.seed)
    test_idx = folds[fold_index]
    train_idx = np.sort(np.concatenate([f for i, f in enumerate(folds) if i != fold_index]))
    rng = np.random.default_rng([cfg.seed, fold_index])
    mcfg = model_config(cfg, ds)
    model = Model(mcfg, rng)
    opt = Adam(model.params, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.weight_decay)

    t0 = time.perf_counter()
    curve = []
    for epoch in range(cfg.epochs):
        lr = learning_rate(epoch, cfg.lr, cfg.lr_halving_period)
        order = rng.permutation(train_idx)
        losses, sizes = [], []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            try:
                loss, grads = model.loss_and_grad(_batches(ds, idx, cfg, mcfg), train=True)
            except FloatingPointError as exc:  # non-finite filter values reach the filtration
                raise DivergenceError(f"fold {fold_index}, epoch {epoch + 1}: {exc}") from exc
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise DivergenceError(f"fold {fold_index}, epoch {epoch + 1}: non-finite loss or gradient ({loss})")
            opt.step(model.params, grads, lr)
            losses.append(loss)
            sizes.append(len(idx))
        curve.append(float(np.average(losses, weights=sizes)))
        log.debug("fold %d epoch %d lr %.6f loss %.4f", fold_index, epoch + 1, lr, curve[-1])
    t1 = time.perf_counter()

    correct = 0
    for start in range(0, len(test_idx), cfg.batch_size):
        idx = test_idx[start:start + cfg.batch_size]
        batch = _batches(ds, idx, cfg, mcfg)
        correct += int((model.predict(batch) == batch.labels).sum())
        if dump_barcodes is not None and cfg.readout in ("gfl", "ph_only"):
            out = Path(dump_barcodes) / f"fold{fold_index:02d}"
            out.mkdir(parents=True, exist_ok=True)
            for gi, bs in zip(idx, model.barcodes(batch)):
                (out / f"graph{gi:05d}.txt").write_text(format_barcodes(bs))
    t2 = time.perf_counter()
    result = FoldResult(fold_index, correct / len(test_idx), curve, t1 - t0, t2 - t1)
    log.info("fold %d: accuracy %.4f (train %.1fs)", fold_index, result.accuracy, t1 - t0)
    return (result, model) if return_model else result


def _fold_job(args):
    cfg, k, ds, folds, dump = args
    return train_fold(cfg, k, ds, folds, dump)


def run_cv(cfg: TrainConfig, dataset: GraphDataset | None = None, dump_barcodes=None,
           deterministic: bool = False) -> RunMetrics:
    ds = dataset if dataset is not None else load_dataset(cfg)
    folds = stratified_folds(ds, cfg.folds, cfg.seed)
    jobs = [(cfg, k, ds, folds, dump_barcodes) for k in range(cfg.folds)]
    start = time.perf_counter()
    if cfg.workers > 1 and not deterministic:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_fold_job, jobs))
    else:
        results = [_fold_job(j) for j in jobs]
    metrics = RunMetrics.from_folds(results)
    metrics.timings["wall_seconds"] = time.perf_counter() - start
    return metrics
