import numpy as np
import pytest

from graphem import Graph, LabelSet, generate_sbm


def naive_softmax(z, tau=1.0):
    z = np.asarray(z, dtype=np.float64) / tau
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def dense_row_adj(graph, self_loops=True):
    """Reference row-normalized adjacency built with dense numpy only."""
    a = np.zeros((graph.num_nodes, graph.num_nodes))
    a[graph.src, graph.dst] = 1.0
    np.fill_diagonal(a, 0.0)
    if self_loops:
        np.fill_diagonal(a, 1.0)
    rs = a.sum(axis=1, keepdims=True)
    rs[rs == 0] = 1.0
    return a / rs


def dense_sym_adj(graph, self_loops=True):
    a = np.zeros((graph.num_nodes, graph.num_nodes))
    a[graph.src, graph.dst] = 1.0
    np.fill_diagonal(a, 0.0)
    if self_loops:
        np.fill_diagonal(a, 1.0)
    d = a.sum(axis=1)
    d[d == 0] = 1.0
    inv = 1.0 / np.sqrt(d)
    return a * inv[:, None] * inv[None, :]


@pytest.fixture
def path_graph():
    # 0 - 1 - 2 - 3, undirected
    return Graph(4, np.array([0, 1, 2]), np.array([1, 2, 3]),
                 undirected_input=True)


@pytest.fixture
def triangle_graph():
    return Graph(3, np.array([0, 1, 2]), np.array([1, 2, 0]),
                 undirected_input=True)


@pytest.fixture
def small_sbm():
    graph, feats, labels = generate_sbm(36, 3, 0.5, 0.1, 5, 0.8, seed=11)
    label_set = LabelSet(labels=labels, num_classes=3,
                         train_idx=np.arange(0, 36, 3),
                         val_idx=np.arange(1, 36, 3),
                         test_idx=np.arange(2, 36, 3))
    return graph, feats, label_set


def fd_gradients(params, loss_fn, eps=1e-6):
    """Central finite differences over every parameter entry."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat_p = p.ravel()
        flat_g = g.ravel()
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + eps
            up = loss_fn()
            flat_p[k] = orig - eps
            down = loss_fn()
            flat_p[k] = orig
            flat_g[k] = (up - down) / (2 * eps)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric, floor=1e-8):
    worst = 0.0
    for a, b in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst
