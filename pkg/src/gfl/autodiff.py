"""A small reverse-mode tape over numpy arrays.

Each op computes its value eagerly and records a vector-Jacobian product.
``Tape.backward`` replays the records in reverse and accumulates gradients
for every recorded variable, including named parameter leaves.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Var:
    __slots__ = ("value", "tape", "idx", "name")

    def __init__(self, value, tape: "Tape", idx: int, name: str | None = None):
        self.value = value
        self.tape = tape
        self.idx = idx
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Var#{self.idx}{label}{tuple(self.value.shape)}"


class Tape:
    def __init__(self):
        self._records: list[tuple[int, tuple[Var, ...], Callable]] = []
        self._count = 0
        self.params: dict[str, Var] = {}
        self.extras: dict = {}
        # smallest |input| seen by each piecewise-linear op: distance to its kink
        self.kink_margins: list[float] = []
        self._grads: dict[int, np.ndarray] = {}

    def _new(self, value, name=None) -> Var:
        v = Var(value, self, self._count, name)
        self._count += 1
        return v

    def leaf(self, value, name: str | None = None) -> Var:
        v = self._new(np.asarray(value), name)
        if name is not None:
            self.params[name] = v
        return v

    def constant(self, value) -> Var:
        return self._new(np.asarray(value))

    def op(self, value, parents: Sequence[Var], vjp: Callable) -> Var:
        """Record ``value = op(*parents)``; ``vjp(g)`` returns one gradient per parent (or None)."""
        out = self._new(value)
        self._records.append((out.idx, tuple(parents), vjp))
        return out

    def backward(self, out: Var, seed=None) -> dict[str, np.ndarray]:
        """Backpropagate from ``out``; returns gradients of named leaves (zeros if untouched)."""
        grads: dict[int, np.ndarray] = {out.idx: np.ones_like(out.value) if seed is None else np.asarray(seed, dtype=float)}
        for idx, parents, vjp in reversed(self._records):
            g = grads.pop(idx, None)
            if g is None:
                continue
            for p, gp in zip(parents, vjp(g)):
                if gp is None:
                    continue
                if p.idx in grads:
                    grads[p.idx] = grads[p.idx] + gp
                else:
                    grads[p.idx] = gp
        self._grads = grads
        return {
            name: grads.get(v.idx, np.zeros_like(v.value, dtype=float)) for name, v in self.params.items()
        }

    def grad(self, v: Var):
        return self._grads.get(v.idx)


def matmul(x: Var, w: Var) -> Var:
    return x.tape.op(x.value @ w.value, (x, w), lambda g: (g @ w.value.T, x.value.T @ g))


def linear(x: Var, w: Var, b: Var) -> Var:
    def vjp(g):
        return g @ w.value.T, x.value.T @ g, g.sum(axis=0)

    return x.tape.op(x.value @ w.value + b.value, (x, w, b), vjp)


def add(a: Var, b: Var) -> Var:
    return a.tape.op(a.value + b.value, (a, b), lambda g: (g, g))


def embed(table: Var, idx: np.ndarray) -> Var:
    def vjp(g):
        gt = np.zeros_like(table.value)
        np.add.at(gt, idx, g)
        return (gt,)

    return table.tape.op(table.value[idx], (table,), vjp)


def spmm(adj, x: Var) -> Var:
    """``adj @ x`` for a constant (sparse) matrix."""
    adj_t = adj.T.tocsr()
    return x.tape.op(adj @ x.value, (x,), lambda g: (adj_t @ g,))


def gin_combine(h: Var, eps: Var, neigh: Var) -> Var:
    """``(1 + eps) * h + neigh`` with scalar learnable ``eps``."""
    scale = 1.0 + eps.value.reshape(())

    def vjp(g):
        return g * scale, np.array([np.sum(g * h.value)]).reshape(eps.value.shape), g

    return h.tape.op(scale * h.value + neigh.value, (h, eps, neigh), vjp)


def batch_norm(x: Var, gamma: Var, beta: Var, running: dict | None, train: bool,
               momentum: float = 0.1, eps: float = 1e-5, update: bool = True) -> Var:
    """Batch normalization over rows.

    Training uses batch statistics and (if ``update``) folds them into
    ``running`` with exponential averaging; evaluation uses ``running``.
    """
    xv = x.value
    if train:
        n = xv.shape[0]
        mean = xv.mean(axis=0)
        var = xv.var(axis=0)
        if update and running is not None:
            unbiased = var * n / (n - 1) if n > 1 else var
            running["mean"] = (1 - momentum) * running["mean"] + momentum * mean
            running["var"] = (1 - momentum) * running["var"] + momentum * unbiased
    else:
        mean, var = running["mean"], running["var"]
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (xv - mean) * inv_std
    out = gamma.value * xhat + beta.value

    def vjp(g):
        dgamma = (g * xhat).sum(axis=0)
        dbeta = g.sum(axis=0)
        dxhat = g * gamma.value
        if train:
            n = xv.shape[0]
            dx = inv_std / n * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
        else:
            dx = dxhat * inv_std
        return dx, dgamma, dbeta

    return x.tape.op(out, (x, gamma, beta), vjp)


def _note_kink(x: Var):
    if x.value.size:
        x.tape.kink_margins.append(float(np.abs(x.value).min()))


def leaky_relu(x: Var, slope: float = 0.01) -> Var:
    _note_kink(x)
    mask = x.value > 0
    return x.tape.op(np.where(mask, x.value, slope * x.value), (x,), lambda g: (np.where(mask, g, slope * g),))


def relu(x: Var) -> Var:
    _note_kink(x)
    mask = x.value > 0
    return x.tape.op(np.where(mask, x.value, 0.0), (x,), lambda g: (g * mask,))


def sigmoid(x: Var) -> Var:
    # tanh form is stable for large |x|
    y = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return x.tape.op(y, (x,), lambda g: (g * y * (1.0 - y),))


def reshape(x: Var, shape) -> Var:
    old = x.value.shape
    return x.tape.op(x.value.reshape(shape), (x,), lambda g: (g.reshape(old),))


def gather_signed(x: Var, idx: np.ndarray, signs: np.ndarray) -> Var:
    """``signs * x[idx]`` for a 1-d ``x``; output takes the shape of ``idx``."""
    def vjp(g):
        gx = np.zeros_like(x.value)
        np.add.at(gx, idx.ravel(), (g * signs).ravel())
        return (gx,)

    return x.tape.op(signs * x.value[idx], (x,), vjp)


def segment_sum(x: Var, segment: np.ndarray, num_segments: int) -> Var:
    out = np.zeros((num_segments,) + x.value.shape[1:])
    np.add.at(out, segment, x.value)
    return x.tape.op(out, (x,), lambda g: (g[segment],))


def concat(xs: Sequence[Var], axis: int = 1) -> Var:
    sizes = np.cumsum([v.value.shape[axis] for v in xs])[:-1]
    return xs[0].tape.op(
        np.concatenate([v.value for v in xs], axis=axis), tuple(xs), lambda g: tuple(np.split(g, sizes, axis=axis))
    )


def softmax_cross_entropy(logits: Var, labels: np.ndarray) -> Var:
    """Mean cross-entropy over rows; returns a scalar Var."""
    z = logits.value - logits.value.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = len(labels)
    loss = -logp[np.arange(n), labels].mean()

    def vjp(g):
        p = np.exp(logp)
        p[np.arange(n), labels] -= 1.0
        return (g * p / n,)

    return logits.tape.op(np.asarray(loss), (logits,), vjp)
