"""Training drivers for the entropy-minimization family and baselines.

Six methods share one driver. "gem" trains full batch: aggregate the
MLP outputs, build pseudo-labels from the tempered softmax with
labeled rows snapped to ground truth, and regress the raw outputs onto
the transpose-aggregated pseudo-labels next to the supervised term.
"eem" replaces the aggregation with sampled directed edges and an
exponential-moving-average logit buffer. "okdeem" widens the output to
two heads (peer and self estimates) that co-distill over sampled
edges. "mlp", "gcn" and "gcn1" are the supervised baselines.

Edge batches treat src as the peer whose features are read and dst as
the target whose label (or buffered logit row) supplies the target
distribution. Batch weights are 1 for sampled edges; the deterministic
sweep carries m * A_e / n so weighted batch means match the n-row
averages the sampler estimates, and the buffer increments sum to the
exact transpose aggregation.
"""

import itertools
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from .errors import DataFormatError, InputError, ShapeError
from .graph import normalize_adjacency
from .inference import equilibrium_residual, f1_micro
from .sampling import EdgeSampler, exact_sweep_batches
from .tensor_nn import (AdamState, Mlp, adam_step, glorot_uniform, one_hot,
                        softmax_cross_entropy, softmax_temperature,
                        tempered_softmax_vjp)

METHODS = ("mlp", "gcn", "gcn1", "gem", "eem", "okdeem")
EDGEWISE_METHODS = ("eem", "okdeem")

# exhaustive model-selection grids; keys expand in this order, last
# key fastest, and ties resolve to the earlier combination
GEM_TABLE_GRID = {
    "weight_decay": (0.0, 0.005, 0.0005),
    "num_layers": (2, 3),
    "tau": (0.25, 0.5, 0.75),
    "lam": (0.1, 0.3, 0.5),
}
OKDEEM_TABLE_GRID = dict(GEM_TABLE_GRID, alpha=(0.1, 1.0))


@dataclass
class TrainConfig:
    method: str = "gem"
    num_layers: int = 2
    hidden_dim: int = 256
    dropout: float = 0.5
    lr: float = 0.01
    weight_decay: float = 0.0
    tau: float = 0.5
    lam: float = 0.3
    alpha: float = 1.0
    epochs: int = 500
    patience: int = 100
    batch_size: int = 1024
    exact_sweep: bool = False
    detach_targets: bool = True
    dtype: str = "float64"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        if self.num_layers < 2:
            raise InputError("need at least one hidden layer")
        if self.hidden_dim < 1 or self.epochs < 1 or self.batch_size < 1:
            raise InputError("hidden_dim, epochs, batch_size must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise InputError("dropout must sit in [0, 1)")
        if self.tau <= 0:
            raise InputError("tau must be positive")
        if self.patience < 0:
            raise InputError("patience must be >= 0")
        if self.dtype not in ("float64", "float32"):
            raise InputError("dtype must be float64 or float32")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


@dataclass
class LabelSet:
    """Node labels plus the train/val/test index split.

    Only ``train_idx`` rows ever reach a loss or a pseudo-label; val
    and test labels are read exclusively by the scorer.
    """
    labels: np.ndarray
    num_classes: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        n = self.labels.size
        if self.num_classes < 2:
            raise InputError("need at least two classes")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise InputError("label outside [0, num_classes)")
        parts = []
        for name in ("train_idx", "val_idx", "test_idx"):
            idx = np.unique(np.asarray(getattr(self, name), dtype=np.int64))
            if idx.size == 0:
                raise InputError(f"{name} is empty")
            if idx.min() < 0 or idx.max() >= n:
                raise InputError(f"{name} out of range")
            setattr(self, name, idx)
            parts.append(idx)
        for a in range(3):
            for b in range(a + 1, 3):
                if np.intersect1d(parts[a], parts[b]).size:
                    raise InputError("split parts overlap")
        self.train_mask = np.zeros(n, dtype=bool)
        self.train_mask[self.train_idx] = True

    @property
    def num_nodes(self):
        return self.labels.size

    def y_onehot(self, dtype=np.float64):
        return one_hot(self.labels, self.num_classes, dtype=dtype)

    def y_train_onehot(self, dtype=np.float64):
        y = self.y_onehot(dtype)
        y[~self.train_mask] = 0
        return y


def label_set_from_split(labels, num_classes, split):
    """Adapt any object with train/val/test index attributes."""
    return LabelSet(labels=labels, num_classes=num_classes,
                    train_idx=split.train, val_idx=split.val,
                    test_idx=split.test)


@dataclass
class RunReport:
    """Everything one training run produced, JSON-serializable.

    Curves are indexed by epoch with entry 0 holding the untrained
    model, so ``best_epoch == 0`` means initialization was never
    beaten. ``loss_curve[k]`` belongs to epoch k + 1. The aux fields
    track the dual-head model's non-hop head and stay None elsewhere.
    Wall-clock fields are excluded from determinism comparisons.
    """
    method: str
    seed: int
    config: dict
    epochs_run: int = 0
    best_epoch: int = 0
    best_val: float = float("-inf")
    test_at_best: float = float("nan")
    best_epoch_aux: int = None
    best_val_aux: float = None
    test_at_best_aux: float = None
    val_curve: list = field(default_factory=list)
    test_curve: list = field(default_factory=list)
    val_curve_aux: list = None
    test_curve_aux: list = None
    loss_curve: list = field(default_factory=list)
    residual_curve: list = None
    train_seconds: float = 0.0
    sampling_seconds: float = 0.0
    eval_seconds: float = 0.0
    epoch_train_seconds: list = field(default_factory=list)
    epoch_sampling_seconds: list = field(default_factory=list)

    TIMING_FIELDS = ("train_seconds", "sampling_seconds", "eval_seconds",
                     "epoch_train_seconds", "epoch_sampling_seconds")

    def to_dict(self, include_timing=True):
        d = asdict(self)
        if not include_timing:
            for key in self.TIMING_FIELDS:
                d.pop(key)
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), sort_keys=True)


class EmaLogits:
    """Per-node logit buffer the edge-wise trainer regresses onto.

    Labeled rows start at ``kappa`` on the true class (a finite stand-
    in for log of a one-hot), unlabeled rows at zero. ``accumulate``
    adds peer outputs scaled by 1/d with d the average directed degree,
    so one epoch of draws adds the transpose aggregation in
    expectation; ``decay`` multiplies everything by (1 - tau) at epoch
    end.
    """

    def __init__(self, label_set, average_degree, kappa=10.0,
                 dtype=np.float64):
        if average_degree <= 0:
            raise InputError("average degree must be positive")
        z = np.zeros((label_set.num_nodes, label_set.num_classes),
                     dtype=dtype)
        z[label_set.train_idx, label_set.labels[label_set.train_idx]] = kappa
        self.z = z
        self.d = float(average_degree)

    def accumulate(self, dst, h_slots, weights):
        inc = h_slots * (weights / self.d)[:, None]
        np.add.at(self.z, dst, inc.astype(self.z.dtype, copy=False))

    def decay(self, tau):
        self.z *= 1.0 - tau


class _GcnTape:
    __slots__ = ("inputs", "relu_masks", "drop_masks", "train")

    def __init__(self, inputs, relu_masks, drop_masks, train):
        self.inputs = inputs
        self.relu_masks = relu_masks
        self.drop_masks = drop_masks
        self.train = train


class GcnModel:
    """Graph-convolution stacks sharing the MLP optimizer interface.

    variant "gcn" aggregates the input of every linear layer, so the
    two-layer network is A relu(A X W0 + b0) W1 + b1. variant "gcn1"
    runs a plain MLP and aggregates only the final logits, isolating a
    single output-side propagation. The adjacency is expected to be
    symmetric (its transpose is still used in backward so the gradient
    stays exact either way).
    """

    def __init__(self, dims, adj, dropout=0.0, rng=None, dtype=np.float64,
                 variant="gcn"):
        if variant not in ("gcn", "gcn1"):
            raise InputError(f"unknown variant {variant!r}")
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise InputError("dims must list >= 2 positive sizes")
        if not 0.0 <= dropout < 1.0:
            raise InputError("dropout must sit in [0, 1)")
        rng = np.random.default_rng() if rng is None else rng
        self.dims = tuple(int(d) for d in dims)
        self.adj = adj
        self.dropout = float(dropout)
        self.dtype = np.dtype(dtype)
        self.variant = variant
        self.weights = [
            glorot_uniform(rng, self.dims[l], self.dims[l + 1], self.dtype)
            for l in range(len(self.dims) - 1)
        ]
        self.biases = [np.zeros(self.dims[l + 1], dtype=self.dtype)
                       for l in range(len(self.dims) - 1)]

    @property
    def in_dim(self):
        return self.dims[0]

    @property
    def out_dim(self):
        return self.dims[-1]

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def decay_flags(self):
        return [True, False] * len(self.weights)

    def forward(self, x, train=False, rng=None, adj=None):
        adj = self.adj if adj is None else adj
        num_layers = len(self.weights)
        use_dropout = train and self.dropout > 0.0
        if use_dropout and rng is None:
            raise InputError("training forward with dropout needs an rng")
        inputs, relu_masks, drop_masks = [], [], []
        a = x
        for l in range(num_layers):
            p = adj.matmul(a) if self.variant == "gcn" else a
            inputs.append(p)
            s = p @ self.weights[l] + self.biases[l]
            if l < num_layers - 1:
                mask = s > 0
                relu_masks.append(mask)
                a = np.where(mask, s, 0)
                if use_dropout:
                    keep = 1.0 - self.dropout
                    dm = (rng.random(a.shape) < keep).astype(self.dtype)
                    dm /= keep
                    a = a * dm
                    drop_masks.append(dm)
                else:
                    drop_masks.append(None)
            else:
                a = s
        out = adj.matmul(a) if self.variant == "gcn1" else a
        return out, _GcnTape(inputs, relu_masks, drop_masks, train)

    def backward(self, tape, output_grad, adj=None):
        adj = self.adj if adj is None else adj
        num_layers = len(self.weights)
        if len(tape.inputs) != num_layers:
            raise InputError("tape does not belong to this model")
        delta = np.asarray(output_grad, dtype=self.dtype)
        if self.variant == "gcn1":
            delta = adj.t_matmul(delta)
        grads = [None] * (2 * num_layers)
        for l in reversed(range(num_layers)):
            p = tape.inputs[l]
            grads[2 * l] = p.T @ delta
            grads[2 * l + 1] = delta.sum(axis=0)
            if l > 0:
                da = delta @ self.weights[l].T
                if self.variant == "gcn":
                    da = adj.t_matmul(da)
                dm = tape.drop_masks[l - 1]
                if dm is not None:
                    da = da * dm
                delta = np.where(tape.relu_masks[l - 1], da, 0)
        return grads


def combine_pseudo_labels(probs, y_onehot, train_mask):
    """Pseudo-label matrix: model beliefs with labeled rows snapped."""
    return np.where(train_mask[:, None], y_onehot, probs)


def gem_loss_and_grads(model, adj, features, label_set, tau, lam,
                       detach_targets=True, train=False, rng=None,
                       pseudo_override=None):
    """Full-batch loss and parameter gradients for one step.

    Returns (loss, grads, aux) with aux holding the raw outputs, the
    aggregated logits and the pseudo-label matrix. ``pseudo_override``
    freezes the pseudo-labels at a given matrix, which also makes the
    detached loss a plain function of the parameters for finite-
    difference checks. Without detaching, gradients also flow through
    the tempered softmax that produced the unlabeled pseudo rows.
    """
    out, tape = model.forward(features, train=train, rng=rng)
    n = out.shape[0]
    z = adj.matmul(out)
    y = label_set.y_onehot(out.dtype)
    if pseudo_override is None:
        pseudo = combine_pseudo_labels(softmax_temperature(z, tau), y,
                                       label_set.train_mask)
    else:
        pseudo = pseudo_override
    targets = adj.t_matmul(pseudo)

    tr = label_set.train_idx
    loss_sup, g_sup = softmax_cross_entropy(z[tr], y[tr])
    loss_em, g_em = softmax_cross_entropy(out, targets)

    dz = np.zeros_like(z)
    dz[tr] = g_sup
    if not detach_targets and pseudo_override is None:
        # path through the pseudo-labels: d loss_em / d pseudo routed
        # back through the tempered softmax on unlabeled rows
        lse = logsumexp(out, axis=1)
        upstream = adj.matmul((lse[:, None] - out) / n)
        upstream[label_set.train_mask] = 0
        dz += lam * tempered_softmax_vjp(z, upstream, tau)
    dout = lam * g_em + adj.t_matmul(dz)
    grads = model.backward(tape, dout)
    loss = loss_sup + lam * loss_em
    aux = {"out": out, "z": z, "pseudo": pseudo}
    return loss, grads, aux


def supervised_loss_and_grads(model, features, label_set, train=False,
                              rng=None):
    """Plain masked cross entropy for the mlp/gcn/gcn1 baselines."""
    out, tape = model.forward(features, train=train, rng=rng)
    tr = label_set.train_idx
    y = label_set.y_onehot(out.dtype)
    loss, g = softmax_cross_entropy(out[tr], y[tr])
    dout = np.zeros_like(out)
    dout[tr] = g
    grads = model.backward(tape, dout)
    return loss, grads, {"out": out}


def eem_batch_loss_and_grads(model, features, batch, label_set, ema, lam,
                             train=False, rng=None):
    """Edge-batch loss and gradients against the logit buffer.

    Only the peer side of each edge is forwarded (unique rows once).
    Targets are constants: ground-truth labels on slots whose target
    node is labeled, and the softmax of the buffered logits everywhere
    for the entropy term, so no gradient path needs detaching.
    """
    uniq, inv = np.unique(batch.src, return_inverse=True)
    out_u, tape = model.forward(features[uniq], train=train, rng=rng)
    h = out_u[inv]
    w = np.asarray(batch.weight, dtype=np.float64)
    lab = label_set.train_mask[batch.dst].astype(np.float64)

    y_sup = label_set.y_train_onehot(out_u.dtype)[batch.dst]
    loss_sup, g_sup = softmax_cross_entropy(h, y_sup, row_weights=w * lab)
    t_em = softmax_temperature(ema.z[batch.dst]).astype(out_u.dtype)
    loss_em, g_em = softmax_cross_entropy(h, t_em, row_weights=w)

    g_out = np.zeros_like(out_u)
    np.add.at(g_out, inv, g_sup + lam * g_em)
    grads = model.backward(tape, g_out)
    loss = loss_sup + lam * loss_em
    aux = {"h_slots": h, "dst": batch.dst, "weights": w}
    return loss, grads, aux


def okdeem_batch_loss_and_grads(model, features, batch, label_set, tau, lam,
                                alpha, detach_targets=True, train=False,
                                rng=None, target_override=None):
    """Edge-batch loss and gradients for the dual-head model.

    The 2C-wide output splits into a peer head h (estimates of the
    other endpoint) and a self head zh. Per edge slot, with y the
    ground truth where the indexed node is labeled:

      supervised   ce(h_src + zh_dst, y_dst) and ce(h_dst + zh_src, y_src)
      entropy      ce(h_src, t_dst_self)  and ce(h_dst, t_src_self)
      distillation ce(zh_src, t_src_peer) and ce(zh_dst, t_dst_peer)

    where t_*_self is the tempered softmax of the node's own self head
    and t_*_peer the tempered softmax of the other endpoint's peer
    head. Supervised terms average over their labeled slots, the rest
    over all slots. ``target_override`` freezes the four target
    matrices (order: t_dst_self, t_src_self, t_src_peer, t_dst_peer).
    """
    src, dst = batch.src, batch.dst
    nsl = src.size
    uniq, inv = np.unique(np.concatenate([src, dst]), return_inverse=True)
    i_pos, j_pos = inv[:nsl], inv[nsl:]
    out_u, tape = model.forward(features[uniq], train=train, rng=rng)
    if out_u.shape[1] != 2 * label_set.num_classes:
        raise ShapeError("model output width must be twice num_classes")
    c = label_set.num_classes
    h_u, zh_u = out_u[:, :c], out_u[:, c:]
    h_i, h_j = h_u[i_pos], h_u[j_pos]
    zh_i, zh_j = zh_u[i_pos], zh_u[j_pos]

    lab_i = label_set.train_mask[src]
    lab_j = label_set.train_mask[dst]
    y_full = label_set.y_train_onehot(out_u.dtype)
    y_i, y_j = y_full[src], y_full[dst]
    w = np.asarray(batch.weight, dtype=np.float64)

    if target_override is None:
        t_j_self = np.where(lab_j[:, None], y_j, softmax_temperature(zh_j, tau))
        t_i_self = np.where(lab_i[:, None], y_i, softmax_temperature(zh_i, tau))
        t_i_peer = np.where(lab_i[:, None], y_i, softmax_temperature(h_j, tau))
        t_j_peer = np.where(lab_j[:, None], y_j, softmax_temperature(h_i, tau))
    else:
        t_j_self, t_i_self, t_i_peer, t_j_peer = target_override

    loss_sl1, g_sl1 = softmax_cross_entropy(h_i + zh_j, y_j,
                                            row_weights=w * lab_j)
    loss_sl2, g_sl2 = softmax_cross_entropy(h_j + zh_i, y_i,
                                            row_weights=w * lab_i)
    loss_em1, g_em1 = softmax_cross_entropy(h_i, t_j_self, row_weights=w)
    loss_em2, g_em2 = softmax_cross_entropy(h_j, t_i_self, row_weights=w)
    loss_kd1, g_kd1 = softmax_cross_entropy(zh_i, t_i_peer, row_weights=w)
    loss_kd2, g_kd2 = softmax_cross_entropy(zh_j, t_j_peer, row_weights=w)

    # slot-level gradients, grouped by which head and endpoint they hit
    peer_i = g_sl1 + lam * g_em1
    peer_j = g_sl2 + lam * g_em2
    self_i = g_sl2 + alpha * g_kd1
    self_j = g_sl1 + alpha * g_kd2
    if not detach_targets and target_override is None:
        sw = w.sum()
        scale = w[:, None] / sw

        def _upstream(logits, off_mask):
            u = scale * (logsumexp(logits, axis=1)[:, None] - logits)
            u[off_mask] = 0
            return u

        self_j = self_j + lam * tempered_softmax_vjp(
            zh_j, _upstream(h_i, lab_j), tau)
        self_i = self_i + lam * tempered_softmax_vjp(
            zh_i, _upstream(h_j, lab_i), tau)
        peer_j = peer_j + alpha * tempered_softmax_vjp(
            h_j, _upstream(zh_i, lab_i), tau)
        peer_i = peer_i + alpha * tempered_softmax_vjp(
            h_i, _upstream(zh_j, lab_j), tau)

    g_out = np.zeros_like(out_u)
    np.add.at(g_out[:, :c], i_pos, peer_i)
    np.add.at(g_out[:, :c], j_pos, peer_j)
    np.add.at(g_out[:, c:], i_pos, self_i)
    np.add.at(g_out[:, c:], j_pos, self_j)
    grads = model.backward(tape, g_out)
    loss = (loss_sl1 + loss_sl2 + lam * (loss_em1 + loss_em2)
            + alpha * (loss_kd1 + loss_kd2))
    return loss, grads, {"out_slots": out_u}


def _edge_batches(cfg, adj, sampler):
    if cfg.exact_sweep:
        yield from exact_sweep_batches(adj, cfg.batch_size)
        return
    budget = adj.num_edges
    while budget > 0:
        take = min(cfg.batch_size, budget)
        yield sampler.sample(take)
        budget -= take


def _evaluate(model, cfg, adj_eval, features, label_set):
    """Score val and test; returns (val, test, val_aux, test_aux, resid)."""
    method = cfg.method
    out, _ = (model.forward(features, adj=adj_eval)
              if isinstance(model, GcnModel) else model.forward(features))
    val_aux = test_aux = residual = None
    if method in ("gem", "eem"):
        scores = adj_eval.matmul(out)
    elif method == "okdeem":
        c = label_set.num_classes
        scores = adj_eval.matmul(out[:, :c])
        aux_scores = out[:, c:]
        val_aux = f1_micro(np.argmax(aux_scores[label_set.val_idx], axis=1),
                           label_set.labels[label_set.val_idx])
        test_aux = f1_micro(np.argmax(aux_scores[label_set.test_idx], axis=1),
                            label_set.labels[label_set.test_idx])
    else:
        scores = out
    if method == "gem":
        y = label_set.y_onehot(out.dtype)
        pseudo = combine_pseudo_labels(softmax_temperature(scores, cfg.tau),
                                       y, label_set.train_mask)
        residual = equilibrium_residual(adj_eval, pseudo, y,
                                        label_set.train_mask, cfg.tau)
    val = f1_micro(np.argmax(scores[label_set.val_idx], axis=1),
                   label_set.labels[label_set.val_idx])
    test = f1_micro(np.argmax(scores[label_set.test_idx], axis=1),
                    label_set.labels[label_set.test_idx])
    return val, test, val_aux, test_aux, residual


def train(cfg, graph, features, label_set, eval_graph=None,
          on_epoch_end=None):
    """Run one configuration to early stop; returns (report, model).

    ``eval_graph`` switches scoring to a different topology (the full
    graph after training on an edge-masked one); training always uses
    ``graph``. ``on_epoch_end(epoch, model, report, ema)`` fires after
    each epoch's evaluation, with ``ema`` the live logit buffer (None
    unless edge-wise with a buffer). Identical inputs and seed
    reproduce the report exactly.
    """
    n = graph.num_nodes
    if label_set.num_nodes != n:
        raise ShapeError("label set and graph disagree on node count")
    if features.shape[0] != n:
        raise ShapeError("feature matrix and graph disagree on node count")
    dtype = cfg.np_dtype
    x = (features.tocsr().astype(dtype) if sp.issparse(features)
         else np.asarray(features, dtype=dtype))
    method = cfg.method

    ss = np.random.SeedSequence(cfg.seed)
    seq_init, seq_drop, seq_sample = ss.spawn(3)
    init_rng = np.random.default_rng(seq_init)
    drop_rng = np.random.default_rng(seq_drop)

    needs_row = method in ("gem", "eem", "okdeem")
    adj_row = (normalize_adjacency(graph, "row").astype(dtype)
               if needs_row else None)
    if method in ("gcn", "gcn1"):
        adj_model = normalize_adjacency(graph, "sym").astype(dtype)
        adj_model_eval = (normalize_adjacency(eval_graph, "sym").astype(dtype)
                          if eval_graph is not None else adj_model)
    else:
        adj_model = adj_model_eval = None
    adj_row_eval = (normalize_adjacency(eval_graph, "row").astype(dtype)
                    if eval_graph is not None and needs_row else adj_row)

    c = label_set.num_classes
    out_dim = 2 * c if method == "okdeem" else c
    dims = ([x.shape[1]] + [cfg.hidden_dim] * (cfg.num_layers - 1)
            + [out_dim])
    if method in ("gcn", "gcn1"):
        model = GcnModel(dims, adj_model, dropout=cfg.dropout, rng=init_rng,
                         dtype=dtype, variant=method)
    else:
        model = Mlp(dims, dropout=cfg.dropout, rng=init_rng, dtype=dtype)
    opt = AdamState(model.params())
    flags = model.decay_flags()

    sampler = None
    ema = None
    if method in EDGEWISE_METHODS and not cfg.exact_sweep:
        sampler = EdgeSampler(adj_row, seq_sample)
    if method == "eem":
        ema = EmaLogits(label_set, adj_row.average_degree, dtype=dtype)

    report = RunReport(method=method, seed=cfg.seed, config=asdict(cfg))
    if method == "okdeem":
        report.val_curve_aux = []
        report.test_curve_aux = []
        report.best_epoch_aux = 0
        report.best_val_aux = float("-inf")
        report.test_at_best_aux = float("nan")
    if method == "gem":
        report.residual_curve = []

    adj_eval = adj_row_eval if needs_row else adj_model_eval

    def run_eval():
        t0 = time.perf_counter()
        val, test, val_aux, test_aux, resid = _evaluate(
            model, cfg, adj_eval, x, label_set)
        report.eval_seconds += time.perf_counter() - t0
        report.val_curve.append(float(val))
        report.test_curve.append(float(test))
        if val_aux is not None:
            report.val_curve_aux.append(float(val_aux))
            report.test_curve_aux.append(float(test_aux))
        if resid is not None:
            report.residual_curve.append(float(resid))

    run_eval()  # epoch 0, untrained
    report.best_val = report.val_curve[0]
    report.test_at_best = report.test_curve[0]
    if method == "okdeem":
        report.best_val_aux = report.val_curve_aux[0]
        report.test_at_best_aux = report.test_curve_aux[0]

    for epoch in range(1, cfg.epochs + 1):
        epoch_sample = 0.0
        t0 = time.perf_counter()
        if method == "gem":
            loss, grads, _ = gem_loss_and_grads(
                model, adj_row, x, label_set, cfg.tau, cfg.lam,
                detach_targets=cfg.detach_targets, train=True, rng=drop_rng)
            adam_step(model.params(), grads, opt, cfg.lr,
                      weight_decay=cfg.weight_decay, decay_flags=flags)
            epoch_loss = loss
        elif method in ("mlp", "gcn", "gcn1"):
            loss, grads, _ = supervised_loss_and_grads(
                model, x, label_set, train=True, rng=drop_rng)
            adam_step(model.params(), grads, opt, cfg.lr,
                      weight_decay=cfg.weight_decay, decay_flags=flags)
            epoch_loss = loss
        else:
            losses = []
            batches = _edge_batches(cfg, adj_row, sampler)
            while True:
                # draws are timed apart from the gradient work so the
                # harness can attribute sampling cost separately
                ts = time.perf_counter()
                batch = next(batches, None)
                epoch_sample += time.perf_counter() - ts
                if batch is None:
                    break
                if method == "eem":
                    loss, grads, aux = eem_batch_loss_and_grads(
                        model, x, batch, label_set, ema, cfg.lam,
                        train=True, rng=drop_rng)
                else:
                    loss, grads, aux = okdeem_batch_loss_and_grads(
                        model, x, batch, label_set, cfg.tau, cfg.lam,
                        cfg.alpha, detach_targets=cfg.detach_targets,
                        train=True, rng=drop_rng)
                adam_step(model.params(), grads, opt, cfg.lr,
                          weight_decay=cfg.weight_decay, decay_flags=flags)
                if method == "eem":
                    # buffer sees this batch's pre-step outputs only
                    # after the parameters moved
                    ema.accumulate(aux["dst"], aux["h_slots"],
                                   aux["weights"])
                losses.append(loss)
            if method == "eem":
                ema.decay(cfg.tau)
            epoch_loss = float(np.mean(losses))
        epoch_total = time.perf_counter() - t0
        report.train_seconds += epoch_total - epoch_sample
        report.sampling_seconds += epoch_sample
        report.epoch_train_seconds.append(epoch_total - epoch_sample)
        report.epoch_sampling_seconds.append(epoch_sample)
        report.loss_curve.append(float(epoch_loss))
        report.epochs_run = epoch

        run_eval()
        if report.val_curve[epoch] > report.best_val:
            report.best_val = report.val_curve[epoch]
            report.best_epoch = epoch
            report.test_at_best = report.test_curve[epoch]
        last_improved = report.best_epoch
        if method == "okdeem":
            if report.val_curve_aux[epoch] > report.best_val_aux:
                report.best_val_aux = report.val_curve_aux[epoch]
                report.best_epoch_aux = epoch
                report.test_at_best_aux = report.test_curve_aux[epoch]
            last_improved = max(last_improved, report.best_epoch_aux)
        if on_epoch_end is not None:
            on_epoch_end(epoch=epoch, model=model, report=report, ema=ema)
        if epoch - last_improved >= cfg.patience:
            break
    return report, model


def expand_grid(grid):
    """Cartesian expansion preserving key order; last key fastest."""
    keys = list(grid)
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


@dataclass
class GridResult:
    combos: list
    mean_val: list
    mean_val_aux: list
    best_index: int
    best_combo: dict
    reports: list

    def best_config(self, base_cfg):
        return replace(base_cfg, **self.best_combo)

    def select(self, objective="val"):
        """Index of the winning combo; first wins on exact ties."""
        means = self.mean_val if objective == "val" else self.mean_val_aux
        if means is None:
            raise InputError(f"objective {objective!r} was not tracked")
        return int(np.argmax(means))


def grid_search(base_cfg, grid, graph, features, label_set, seeds=(0,),
                objective="val", eval_graph=None):
    """Exhaustive search selecting the best mean validation score.

    Every combo trains once per seed. For the dual-head method the
    non-hop head's validation means are tracked too, so a second row
    can be selected from the same runs without retraining.
    """
    combos = expand_grid(grid)
    if not combos:
        raise InputError("empty grid")
    track_aux = base_cfg.method == "okdeem"
    mean_val, mean_aux, reports = [], [], []
    for combo in combos:
        runs = []
        for seed in seeds:
            cfg = replace(base_cfg, seed=int(seed), **combo)
            rep, _ = train(cfg, graph, features, label_set,
                           eval_graph=eval_graph)
            runs.append(rep)
        reports.append(runs)
        mean_val.append(float(np.mean([r.best_val for r in runs])))
        if track_aux:
            mean_aux.append(float(np.mean([r.best_val_aux for r in runs])))
    result = GridResult(combos=combos, mean_val=mean_val,
                        mean_val_aux=mean_aux if track_aux else None,
                        best_index=0, best_combo={}, reports=reports)
    result.best_index = result.select(objective)
    result.best_combo = combos[result.best_index]
    return result


def save_model(model, path):
    """Persist a trained model as a plain npz archive.

    Layout: key "header" holds a JSON string with dims, dropout, dtype,
    kind ("mlp" or "gcn") and variant; keys "w0", "b0", "w1", "b1", ...
    hold the layer parameters in order. Graph models store no
    adjacency; supply one when loading.
    """
    header = {
        "dims": [int(d) for d in model.dims],
        "dropout": float(model.dropout),
        "dtype": np.dtype(model.dtype).name,
        "kind": "gcn" if isinstance(model, GcnModel) else "mlp",
        "variant": getattr(model, "variant", None),
    }
    arrays = {}
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{l}"] = w
        arrays[f"b{l}"] = b
    np.savez(path, header=json.dumps(header, sort_keys=True), **arrays)


def load_model(path, adj=None):
    """Rebuild a model saved by ``save_model``."""
    with np.load(path, allow_pickle=False) as f:
        header = json.loads(str(f["header"]))
        dims = header["dims"]
        dtype = np.dtype(header["dtype"])
        if header["kind"] == "gcn":
            if adj is None:
                raise InputError("graph models need an adjacency to load")
            model = GcnModel(dims, adj, dropout=header["dropout"],
                             dtype=dtype, variant=header["variant"])
        else:
            model = Mlp(dims, dropout=header["dropout"], dtype=dtype)
        for l in range(len(dims) - 1):
            w = np.asarray(f[f"w{l}"], dtype=dtype)
            b = np.asarray(f[f"b{l}"], dtype=dtype)
            if w.shape != model.weights[l].shape or b.shape != (dims[l + 1],):
                raise DataFormatError(
                    f"layer {l}: stored shapes {w.shape}/{b.shape} do not "
                    f"match dims {dims}")
            model.weights[l] = w
            model.biases[l] = b
    return model
