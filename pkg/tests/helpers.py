import numpy as np

from gfl.graph import Graph


def random_graph(rng, n, p, labels=0, graph_label=0):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    node_labels = rng.integers(0, labels, n) if labels else None
    return Graph(n, edges, node_labels, graph_label)


def injective_filter(rng, n):
    """Distinct values in (0, 1), well separated from each other."""
    return rng.permutation(n) / max(n, 1) * 0.9 + 0.05 + rng.uniform(0, 0.01, n)


def brute_force_filtration(g, f):
    """Filtration order by direct enumeration of the definition."""
    simplices = [((v,), f[v]) for v in range(g.num_vertices)]
    simplices += [((int(u), int(v)), max(f[u], f[v])) for u, v in g.edges]
    simplices.sort(key=lambda s: (s[1], len(s[0]), s[0]))
    return simplices


def components(g):
    parent = list(range(g.num_vertices))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for u, v in g.edges:
        parent[find(u)] = find(v)
    return len({find(v) for v in range(g.num_vertices)})


def filter_gap(values):
    """Smallest distance between two filter values (inf for fewer than two)."""
    v = np.sort(np.asarray(values, dtype=float))
    return float(np.diff(v).min()) if len(v) > 1 else float("inf")


def kink_margin(model, batch):
    """Distance of the training-mode forward pass to the nearest kink of a piecewise-linear op."""
    _, tape = model.forward(batch, train=True, update_stats=False)
    return min(tape.kink_margins, default=float("inf"))


def gradient_check(model, batch, h=1e-6, rtol=1e-4, atol=1e-7):
    """Central differences of the training loss for every parameter entry.

    Batchnorm uses batch statistics without touching the running averages, so
    every evaluation sees the same function. Returns the failing entries as
    ``(name, index, analytic, numeric)`` and the number of entries checked.
    """
    _, grads = model.loss_and_grad(batch, train=True, update_stats=False)
    failures, checked = [], 0
    for name, p in model.params.items():
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + h
            up = model.loss(batch, train=True)
            p[i] = old - h
            down = model.loss(batch, train=True)
            p[i] = old
            num = (up - down) / (2 * h)
            ana = grads[name][i]
            err = abs(ana - num)
            checked += 1
            if err >= atol and err >= rtol * max(abs(ana), abs(num)):
                failures.append((name, i, float(ana), float(num)))
    return failures, checked
