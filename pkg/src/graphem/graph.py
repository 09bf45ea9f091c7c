"""Sparse graph storage and the operations every method shares:
adjacency normalization, aggregation and its transpose, inductive edge
masking, BFS distance grouping, and a stochastic-block-model generator
for offline tests and experiments.

Topology lives in plain index arrays; the normalized adjacency wraps a
scipy CSR matrix (and a materialized CSR of its transpose) so that
aggregation runs at SpMM speed while the directed edge list stays
available for the edge sampler.
"""

from collections import deque

import numpy as np
import scipy.sparse as sp

from .errors import InputError, ShapeError

UNREACHABLE = -1


class Graph:
    """Directed edge set over ``num_nodes`` nodes.

    Edges are canonicalized: sorted by (src, dst) with duplicates
    removed. Undirected input materializes both directions so that
    directed-edge sampling covers both roles of every link.
    """

    def __init__(self, num_nodes, src, dst, undirected_input=False,
                 _canonical=False):
        self.num_nodes = int(num_nodes)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ShapeError("src and dst must have equal length")
        if src.size and (src.min() < 0 or dst.min() < 0
                         or src.max() >= num_nodes or dst.max() >= num_nodes):
            raise InputError("edge endpoint out of range")
        if undirected_input and src.size:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
            _canonical = False
        if not _canonical:
            key = src * np.int64(self.num_nodes) + dst
            key = np.unique(key)
            src = key // self.num_nodes
            dst = key % self.num_nodes
        self.src = src
        self.dst = dst
        self.undirected_input = bool(undirected_input)
        self._indptr = None
        self._indices = None

    @property
    def num_edges(self):
        """Directed edge count after canonicalization."""
        return int(self.src.size)

    def _csr(self):
        if self._indptr is None:
            counts = np.bincount(self.src, minlength=self.num_nodes)
            self._indptr = np.concatenate([[0], np.cumsum(counts)])
            self._indices = self.dst  # src is sorted, so dst is CSR order
        return self._indptr, self._indices

    def neighbors(self, v):
        indptr, indices = self._csr()
        return indices[indptr[v]:indptr[v + 1]]

    def is_symmetric(self):
        key_f = self.src * np.int64(self.num_nodes) + self.dst
        key_r = self.dst * np.int64(self.num_nodes) + self.src
        return np.array_equal(np.sort(key_f), np.sort(key_r))


def mask_inductive(graph, heldout):
    """Drop every edge incident to a held-out node; nodes are kept."""
    heldout = np.asarray(list(heldout), dtype=np.int64)
    if heldout.size and (heldout.min() < 0 or heldout.max() >= graph.num_nodes):
        raise InputError("held-out node out of range")
    mask = np.zeros(graph.num_nodes, dtype=bool)
    mask[heldout] = True
    keep = ~(mask[graph.src] | mask[graph.dst])
    return Graph(graph.num_nodes, graph.src[keep], graph.dst[keep],
                 undirected_input=False, _canonical=True)


def bfs_distance_groups(graph, seeds):
    """Unweighted shortest distance from each node to the seed set.

    Seeds get 0; unreachable nodes get ``UNREACHABLE`` (-1). Traversal
    follows edge direction, which is moot for symmetric graphs.
    """
    seeds = np.asarray(list(seeds), dtype=np.int64)
    if seeds.size == 0:
        raise InputError("seed set must be nonempty")
    dist = np.full(graph.num_nodes, UNREACHABLE, dtype=np.int64)
    dist[seeds] = 0
    queue = deque(int(s) for s in np.unique(seeds))
    indptr, indices = graph._csr()
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for u in indices[indptr[v]:indptr[v + 1]]:
            if dist[u] == UNREACHABLE:
                dist[u] = d
                queue.append(int(u))
    return dist


class NormalizedAdjacency:
    """Sparse normalized adjacency with its transpose, both CSR.

    ``mode`` is "row" (every row sums to 1; required by the edge-wise
    loss bound) or "sym" (D^-1/2 (A+I) D^-1/2, the GCN convention).
    """

    def __init__(self, num_nodes, src, dst, weights, mode, self_loops):
        self.num_nodes = int(num_nodes)
        self.mode = mode
        self.self_loops = bool(self_loops)
        order = np.lexsort((dst, src))
        self.edge_src = np.ascontiguousarray(src[order])
        self.edge_dst = np.ascontiguousarray(dst[order])
        self.edge_weight = np.ascontiguousarray(weights[order])
        if np.any(self.edge_weight <= 0):
            raise InputError("normalized weights must be positive")
        n = self.num_nodes
        self._mat = sp.csr_matrix(
            (self.edge_weight, (self.edge_src, self.edge_dst)), shape=(n, n))
        self._mat_t = self._mat.T.tocsr()

    @property
    def num_edges(self):
        return int(self.edge_weight.size)

    @property
    def average_degree(self):
        """Directed edges per node; the EMA accumulation scale."""
        return self.num_edges / self.num_nodes

    def row_sums(self):
        return np.asarray(self._mat.sum(axis=1)).ravel()

    def is_row_stochastic(self, tol=None):
        if tol is None:
            tol = 1e-5 if self.edge_weight.dtype == np.float32 else 1e-12
        return self.mode == "row" and bool(
            np.all(np.abs(self.row_sums() - 1.0) <= tol))

    def matmul(self, h):
        """Aggregate: row i of the result is sum_j A_ij h_j.

        Dense input yields dense output; sparse stays sparse, which is
        what the first layer of an input-aggregating model wants.
        """
        if h.shape[0] != self.num_nodes:
            raise ShapeError(
                f"matrix has {h.shape[0]} rows, graph has {self.num_nodes}")
        if sp.issparse(h):
            return (self._mat @ h).tocsr()
        return self._mat @ np.asarray(h)

    def t_matmul(self, y):
        """Transpose aggregate: row j of the result is sum_i A_ij y_i."""
        if y.shape[0] != self.num_nodes:
            raise ShapeError(
                f"matrix has {y.shape[0]} rows, graph has {self.num_nodes}")
        if sp.issparse(y):
            return (self._mat_t @ y).tocsr()
        return self._mat_t @ np.asarray(y)

    def astype(self, dtype):
        """Copy with edge weights cast; float32 runs avoid upcasting."""
        dtype = np.dtype(dtype)
        if self.edge_weight.dtype == dtype:
            return self
        return NormalizedAdjacency(
            self.num_nodes, self.edge_src, self.edge_dst,
            self.edge_weight.astype(dtype), self.mode, self.self_loops)

    def to_dense(self):
        return self._mat.toarray()

    @classmethod
    def from_weighted_edges(cls, num_nodes, src, dst, weights, mode="row",
                            tol=1e-12):
        """Wrap explicit weighted edges; validates row sums in row mode."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        adj = cls(num_nodes, src, dst, weights, mode, self_loops=False)
        if mode == "row" and not adj.is_row_stochastic(tol):
            raise InputError("row mode requires rows summing to 1")
        return adj


def aggregate(adj, h):
    return adj.matmul(h)


def aggregate_transpose(adj, y):
    return adj.t_matmul(y)


def normalize_adjacency(graph, mode="row", self_loops=True,
                        isolated="self-loop"):
    """Build the normalized adjacency used by training and inference.

    With ``self_loops`` every node gets a loop edge before normalizing.
    ``isolated`` decides what to do with nodes that have no neighbor
    besides themselves: the default keeps them on a pure self-loop row,
    ``"reject"`` raises so surprise isolation in a dataset surfaces.
    """
    if graph.num_nodes == 0:
        raise InputError("graph is empty")
    if mode not in ("row", "sym"):
        raise InputError(f"unknown normalization mode {mode!r}")
    if isolated not in ("self-loop", "reject"):
        raise InputError(f"unknown isolated-node policy {isolated!r}")
    n = graph.num_nodes
    src, dst = graph.src, graph.dst
    no_loop = src != dst
    src, dst = src[no_loop], dst[no_loop]
    deg = np.bincount(src, minlength=n) + np.bincount(dst, minlength=n)
    isolated_nodes = np.flatnonzero(deg == 0)
    if isolated_nodes.size and isolated == "reject":
        raise InputError(
            f"{isolated_nodes.size} isolated node(s); drop them or use "
            "the self-loop policy")
    loops = np.arange(n, dtype=np.int64) if self_loops else isolated_nodes
    src = np.concatenate([src, loops])
    dst = np.concatenate([dst, loops])

    out_deg = np.bincount(src, minlength=n).astype(np.float64)
    if mode == "row":
        if np.any(out_deg == 0):
            raise InputError("zero out-degree row; add self-loops")
        weights = 1.0 / out_deg[src]
    else:
        in_deg = np.bincount(dst, minlength=n).astype(np.float64)
        if np.any(out_deg == 0) or np.any(in_deg == 0):
            raise InputError("zero degree in symmetric mode; add self-loops")
        weights = 1.0 / (np.sqrt(out_deg[src]) * np.sqrt(in_deg[dst]))
    return NormalizedAdjacency(n, src, dst, weights, mode, self_loops)


def generate_sbm(num_nodes, num_classes, p_in, p_out, feature_dim,
                 feature_noise, seed):
    """Stochastic block model with class-centroid features.

    Nodes are split into ``num_classes`` contiguous blocks; undirected
    edges appear independently with probability ``p_in`` inside a block
    and ``p_out`` across blocks. Features are the class centroid plus
    isotropic Gaussian noise. Fully deterministic given ``seed``.
    """
    if num_nodes < 2 or num_classes < 1 or num_classes > num_nodes:
        raise InputError("degenerate node/class counts")
    if feature_dim < 1:
        raise InputError("feature_dim must be >= 1")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise InputError("need 0 <= p_out <= p_in <= 1")
    rng = np.random.default_rng(seed)
    n, c = int(num_nodes), int(num_classes)
    labels = (np.arange(n, dtype=np.int64) * c) // n

    centroids = rng.normal(0.0, 1.0, size=(c, feature_dim))
    features = centroids[labels] + feature_noise * rng.normal(
        0.0, 1.0, size=(n, feature_dim))

    iu, ju = np.triu_indices(n, k=1)
    p = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(p.shape) < p
    src, dst = iu[keep], ju[keep]
    graph = Graph(n, src, dst, undirected_input=True)
    return graph, features, labels
