"""Learnable vertex filter, persistence readout and classifiers.

Architecture (hidden width ``H``, ``K`` structure elements per barcode)::

    vertex filter   Embedding[n,H] -> GIN-eps(FC[H,H]-BatchNorm-LeakyReLU-FC[H,H])
                    -> FC[H,H]-BatchNorm-LeakyReLU-FC[H,1]-Sigmoid
    GFL readout     sub/superlevel persistence -> 3 barcodes -> 3K rational hats
    classifier      FC[3K,H]-ReLU-FC[H,#classes]

``readout`` selects the variant: ``gfl`` (above), ``ph_only`` (filter frozen
to the normalized degree), ``sum`` (GIN features summed per graph) and
``baseline`` (per-vertex MLP summed per graph, no message passing).
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .graph import Graph, initial_features
from .persistence import BarcodeSet, compute_barcodes
from .vectorization import VectorizationParams, vectorize_backward, vectorize_batch

READOUTS = ("gfl", "ph_only", "sum", "baseline")


@dataclass
class ModelConfig:
    num_classes: int
    feature_vocab: int
    label_vocab: int = 0
    readout: str = "gfl"
    hidden: int = 64
    n_elements: int = 100
    leaky_slope: float = 0.01
    bn_momentum: float = 0.1
    radius_init: float = 0.25

    def __post_init__(self):
        if self.readout not in READOUTS:
            raise ValueError(f"readout must be one of {READOUTS}")


@dataclass
class GraphBatch:
    """Several graphs glued into one block-diagonal graph."""

    graphs: list[Graph]
    features: np.ndarray          # (N,) or (N, 2) embedding indices
    adjacency: sp.csr_matrix      # (N, N), symmetric
    node_graph: np.ndarray        # (N,) graph index of each node
    offsets: np.ndarray           # (G + 1,)
    labels: np.ndarray            # (G,)
    norm_degree: np.ndarray       # (N,) degree / dataset max degree, for ph_only

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    @property
    def num_nodes(self) -> int:
        return int(self.offsets[-1])


def make_batch(graphs: Sequence[Graph], feature_mode: str = "degree", feature_vocab: int | None = None,
               label_vocab: int | None = None, max_degree: int | None = None) -> GraphBatch:
    """Build a batch; feature indices beyond the vocabulary clamp to its last entry."""
    graphs = list(graphs)
    sizes = np.array([g.num_vertices for g in graphs], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    feats = [initial_features(g, feature_mode) for g in graphs]
    if feats:
        features = np.concatenate(feats)
    else:
        features = np.zeros((0, 2) if feature_mode == "degree_and_label" else 0, np.int64)
    features = features.astype(np.int64)
    if feature_vocab is not None:
        if features.ndim == 1:
            features = np.minimum(features, feature_vocab - 1)
        else:
            features[:, 0] = np.minimum(features[:, 0], feature_vocab - 1)
            if label_vocab:
                features[:, 1] = np.minimum(features[:, 1], label_vocab - 1)
    rows = [g.edges + off for g, off in zip(graphs, offsets[:-1]) if g.num_edges]
    edges = np.concatenate(rows) if rows else np.zeros((0, 2), np.int64)
    n = int(offsets[-1])
    adj = sp.coo_matrix(
        (np.ones(2 * len(edges)), (np.concatenate([edges[:, 0], edges[:, 1]]), np.concatenate([edges[:, 1], edges[:, 0]]))),
        shape=(n, n),
    ).tocsr()
    degree = np.asarray(adj.sum(axis=1)).ravel()
    if max_degree is None:
        max_degree = int(degree.max(initial=0))
    norm_degree = np.minimum(degree / max(max_degree, 1), 1.0)
    return GraphBatch(
        graphs=graphs,
        features=features,
        adjacency=adj,
        node_graph=np.repeat(np.arange(len(graphs)), sizes),
        offsets=offsets,
        labels=np.array([g.graph_label for g in graphs], dtype=np.int64),
        norm_degree=norm_degree,
    )


def _uniform(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Model:
    """Parameters, batchnorm running statistics and the forward passes."""

    def __init__(self, config: ModelConfig, seed: int | np.random.Generator = 0):
        self.config = config
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        H = config.hidden
        p: dict[str, np.ndarray] = {}
        self.state: dict[str, dict[str, np.ndarray]] = {}

        def mlp(prefix, d_in, d_out):
            p[f"{prefix}.fc1.w"] = _uniform(rng, d_in, (d_in, H))
            p[f"{prefix}.fc1.b"] = _uniform(rng, d_in, (H,))
            p[f"{prefix}.bn.gamma"] = np.ones(H)
            p[f"{prefix}.bn.beta"] = np.zeros(H)
            p[f"{prefix}.fc2.w"] = _uniform(rng, H, (H, d_out))
            p[f"{prefix}.fc2.b"] = _uniform(rng, H, (d_out,))
            self.state[f"{prefix}.bn"] = {"mean": np.zeros(H), "var": np.ones(H)}

        ro = config.readout
        if ro != "ph_only":
            p["embed.feature"] = rng.standard_normal((config.feature_vocab, H))
            if config.label_vocab:
                p["embed.label"] = rng.standard_normal((config.label_vocab, H))
        if ro in ("gfl", "sum"):
            p["gin.eps"] = np.zeros(1)
            mlp("gin", H, H)
        if ro == "gfl":
            mlp("filter", H, 1)
        if ro == "baseline":
            mlp("node", H, H)
        if ro in ("gfl", "ph_only"):
            vp = VectorizationParams.init(rng, config.n_elements, config.radius_init)
            for ch in range(3):
                p[f"vec.c{ch}"] = vp.centers[ch]
                p[f"vec.r{ch}"] = vp.radii[ch]
            d_readout = 3 * config.n_elements
        else:
            d_readout = H
        p["cls.fc1.w"] = _uniform(rng, d_readout, (d_readout, H))
        p["cls.fc1.b"] = _uniform(rng, d_readout, (H,))
        p["cls.fc2.w"] = _uniform(rng, H, (H, config.num_classes))
        p["cls.fc2.b"] = _uniform(rng, H, (config.num_classes,))
        self.params = p

    # -- building blocks -------------------------------------------------

    def _mlp(self, prefix: str, x: ad.Var, P, train: bool, update: bool) -> ad.Var:
        h = ad.linear(x, P[f"{prefix}.fc1.w"], P[f"{prefix}.fc1.b"])
        h = ad.batch_norm(h, P[f"{prefix}.bn.gamma"], P[f"{prefix}.bn.beta"], self.state[f"{prefix}.bn"],
                          train, momentum=self.config.bn_momentum, update=update)
        h = ad.leaky_relu(h, self.config.leaky_slope)
        return ad.linear(h, P[f"{prefix}.fc2.w"], P[f"{prefix}.fc2.b"])

    def _embed(self, batch: GraphBatch, P) -> ad.Var:
        feats = batch.features
        if feats.ndim == 1:
            return ad.embed(P["embed.feature"], feats)
        h = ad.embed(P["embed.feature"], feats[:, 0])
        if "embed.label" in P:
            h = ad.add(h, ad.embed(P["embed.label"], feats[:, 1]))
        return h

    def _gin(self, batch: GraphBatch, P, train, update) -> ad.Var:
        h = self._embed(batch, P)
        agg = ad.gin_combine(h, P["gin.eps"], ad.spmm(batch.adjacency, h))
        return self._mlp("gin", agg, P, train, update)

    def _classify(self, rep: ad.Var, P) -> ad.Var:
        h = ad.relu(ad.linear(rep, P["cls.fc1.w"], P["cls.fc1.b"]))
        return ad.linear(h, P["cls.fc2.w"], P["cls.fc2.b"])

    def filter_values(self, batch: GraphBatch, tape: ad.Tape, P, train: bool, update: bool = True) -> ad.Var:
        if self.config.readout == "ph_only":
            return tape.constant(batch.norm_degree.astype(np.float64))
        z = self._gin(batch, P, train, update)
        out = ad.sigmoid(self._mlp("filter", z, P, train, update))
        return ad.reshape(out, (batch.num_nodes,))

    def _persistence_readout(self, batch: GraphBatch, f: ad.Var, P, tape: ad.Tape) -> ad.Var:
        fv = f.value
        per_channel: list[list] = [[], [], []]
        barcodes = []
        for gi, g in enumerate(batch.graphs):
            lo, hi = batch.offsets[gi], batch.offsets[gi + 1]
            bs = compute_barcodes(g, fv[lo:hi])
            barcodes.append(bs)
            for ch, bc in enumerate(bs.channels()):
                if len(bc):
                    per_channel[ch].append((bc.vertices + lo, bc.signs, np.full(len(bc), gi)))
        tape.extras["barcodes"] = barcodes
        points, graph_index = [], []
        for ch, d in enumerate((2, 1, 1)):
            if per_channel[ch]:
                verts = np.concatenate([v for v, _, _ in per_channel[ch]])
                signs = np.concatenate([s for _, s, _ in per_channel[ch]])
                gidx = np.concatenate([g for _, _, g in per_channel[ch]])
            else:
                verts, signs, gidx = np.zeros((0, d), np.int64), np.zeros((0, d)), np.zeros(0, np.int64)
            points.append(ad.gather_signed(f, verts, signs))
            graph_index.append(gidx)
        tape.extras["points"] = points
        return self._vectorize(points, graph_index, batch.num_graphs, P)

    def _vectorize(self, points: list[ad.Var], graph_index, num_graphs: int, P) -> ad.Var:
        centers = [P[f"vec.c{ch}"] for ch in range(3)]
        radii = [P[f"vec.r{ch}"] for ch in range(3)]
        vp = VectorizationParams([c.value for c in centers], [r.value for r in radii])
        out, vtape = vectorize_batch([p.value for p in points], graph_index, num_graphs, vp)
        tape = points[0].tape
        for p, c, r in zip(points, vp.centers, vp.radii):
            if len(p.value):
                # the hat has kinks where p_i = c_i, on the rim |r| = |p - c|_1 and at r = 0
                diff = np.abs(p.value[:, None, :] - c[None, :, :])
                rim = np.abs(np.abs(r)[None, :] - diff.sum(axis=2))
                tape.kink_margins.extend([float(diff.min()), float(rim.min()), float(np.abs(r).min())])

        def vjp(g):
            gp, gc, gr = vectorize_backward(vtape, g, vp)
            return (*gp, *gc, *gr)

        return tape.op(out, (*points, *centers, *radii), vjp)

    # -- forward passes --------------------------------------------------

    def forward(self, batch: GraphBatch, train: bool = False, update_stats: bool = True) -> tuple[ad.Var, ad.Tape]:
        """Class logits ``(G, C)`` and the tape that produced them."""
        tape = ad.Tape()
        P = {name: tape.leaf(value, name) for name, value in self.params.items()}
        ro = self.config.readout
        if ro in ("gfl", "ph_only"):
            f = self.filter_values(batch, tape, P, train, update_stats)
            tape.extras["filter"] = f
            rep = self._persistence_readout(batch, f, P, tape)
        elif ro == "sum":
            rep = ad.segment_sum(self._gin(batch, P, train, update_stats), batch.node_graph, batch.num_graphs)
        else:
            h = self._mlp("node", self._embed(batch, P), P, train, update_stats)
            rep = ad.segment_sum(h, batch.node_graph, batch.num_graphs)
        tape.extras["representation"] = rep
        logits = self._classify(rep, P)
        tape.extras["logits"] = logits
        return logits, tape

    def loss_and_grad(self, batch: GraphBatch, train: bool = True, update_stats: bool = True,
                      loss_scale: float = 1.0) -> tuple[float, dict[str, np.ndarray]]:
        logits, tape = self.forward(batch, train=train, update_stats=update_stats)
        loss = ad.softmax_cross_entropy(logits, batch.labels)
        grads = tape.backward(loss, seed=np.asarray(loss_scale))
        return float(loss.value) * loss_scale, grads

    def loss(self, batch: GraphBatch, train: bool = True) -> float:
        logits, _ = self.forward(batch, train=train, update_stats=False)
        return float(ad.softmax_cross_entropy(logits, batch.labels).value)

    def predict(self, batch: GraphBatch) -> np.ndarray:
        logits, _ = self.forward(batch, train=False)
        return logits.value.argmax(axis=1)

    def barcodes(self, batch: GraphBatch) -> list[BarcodeSet]:
        if self.config.readout not in ("gfl", "ph_only"):
            raise ValueError("only persistence readouts produce barcodes")
        _, tape = self.forward(batch, train=False)
        return tape.extras["barcodes"]

    # -- checkpoints -----------------------------------------------------

    def save(self, path: str | Path) -> None:
        save_checkpoint(path, self)

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        return load_checkpoint(path)


# Functional entry points ------------------------------------------------

def vertex_filter_forward(g: Graph, features: str, model: Model, train: bool = False):
    """Filter values of one graph in ``(0, 1)`` plus the recording tape."""
    batch = make_batch([g], features, model.config.feature_vocab, model.config.label_vocab or None)
    tape = ad.Tape()
    P = {name: tape.leaf(value, name) for name, value in model.params.items()}
    f = model.filter_values(batch, tape, P, train, update=False)
    return f.value, tape


def full_forward(g: Graph, features: str, model: Model, mode: str = "eval"):
    batch = make_batch([g], features, model.config.feature_vocab, model.config.label_vocab or None)
    logits, tape = model.forward(batch, train=(mode == "train"))
    return logits.value[0], tape


def backward(tape: ad.Tape, loss_grad) -> dict[str, np.ndarray]:
    """Parameter gradients given ``d loss / d logits`` for the tape's forward pass."""
    logits = tape.extras["logits"]
    return tape.backward(logits, seed=np.asarray(loss_grad, dtype=np.float64).reshape(logits.shape))


def baseline_forward(g: Graph, features: str, model: Model):
    if model.config.readout != "baseline":
        raise ValueError("model was not built with readout='baseline'")
    return full_forward(g, features, model)[0]


def sum_readout_forward(g: Graph, features: str, model: Model):
    if model.config.readout != "sum":
        raise ValueError("model was not built with readout='sum'")
    return full_forward(g, features, model)[0]


# Checkpoint format ------------------------------------------------------
#
#   bytes 0..7    magic b"GFLCKPT1"
#   bytes 8..11   header length L, uint32 little-endian
#   next L bytes  UTF-8 JSON: {"config": {...}, "sections": [{"name", "shape", "offset"}]}
#   remainder     float64 little-endian flat array; section offsets count elements
#
# Parameter sections are named as in ``Model.params``; batchnorm running
# statistics are stored as ``state/<layer>/mean`` and ``state/<layer>/var``.

MAGIC = b"GFLCKPT1"


def save_checkpoint(path: str | Path, model: Model) -> None:
    arrays = dict(model.params)
    for layer, stats in model.state.items():
        for key, value in stats.items():
            arrays[f"state/{layer}/{key}"] = value
    sections, chunks, offset = [], [], 0
    for name, value in arrays.items():
        value = np.asarray(value, dtype="<f8")
        sections.append({"name": name, "shape": list(value.shape), "offset": offset})
        chunks.append(value.ravel())
        offset += value.size
    header = json.dumps({"config": asdict(model.config), "sections": sections}).encode()
    flat = np.concatenate(chunks) if chunks else np.zeros(0, "<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def load_checkpoint(path: str | Path) -> Model:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ValueError("not a GFL checkpoint")
    (hlen,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + hlen].decode())
    flat = np.frombuffer(data[12 + hlen:], dtype="<f8")
    model = Model(ModelConfig(**header["config"]), seed=0)
    for sec in header["sections"]:
        size = int(np.prod(sec["shape"])) if sec["shape"] else 1
        value = flat[sec["offset"]:sec["offset"] + size].reshape(sec["shape"]).astype(np.float64)
        name = sec["name"]
        if name.startswith("state/"):
            _, layer, key = name.split("/")
            model.state[layer][key] = value
        else:
            model.params[name] = value
    return model
