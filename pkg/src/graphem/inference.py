"""Prediction paths and the two analytic checks the theory rests on.

Inference is deliberately tiny: every trained body is an MLP, and the
only graph use at test time is a single aggregation hop. The dual-head
model additionally supports a non-hop path that reads class scores
straight from its second head.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError
from .tensor_nn import cross_entropy_soft, softmax_temperature


@dataclass(frozen=True)
class Prediction:
    """Class probabilities with argmax labels for a node subset."""
    nodes: np.ndarray
    probs: np.ndarray

    @property
    def labels(self):
        return np.argmax(self.probs, axis=1)


def f1_micro(pred_labels, true_labels):
    """Micro-averaged F1 for single-label multiclass prediction.

    Micro-F1 pools TP/FP/FN over classes; with exactly one predicted
    and one true label per node every miss is simultaneously a FP and
    a FN, so the score reduces to plain accuracy. Computed from the
    pooled counts anyway so the reduction stays visible.
    """
    pred_labels = np.asarray(pred_labels).ravel()
    true_labels = np.asarray(true_labels).ravel()
    if pred_labels.shape != true_labels.shape:
        raise ShapeError("prediction/label length mismatch")
    if pred_labels.size == 0:
        raise InputError("cannot score an empty node set")
    tp = int(np.count_nonzero(pred_labels == true_labels))
    fp = pred_labels.size - tp
    fn = fp
    return 2.0 * tp / (2.0 * tp + fp + fn)


def _model_logits(model, features):
    out, _ = model.forward(features, train=False)
    return out


def infer_one_hop(model, adj, features, nodes=None, dual_head=False):
    """Aggregate model outputs over each node's neighborhood.

    Single-head: probs = softmax rows of A @ f(X), the training-time
    forward. Dual-head: the first-head outputs of self plus neighbors
    are averaged uniformly (1 / (deg + 1), realized by a row-normalized
    adjacency with self-loops) before the softmax.
    """
    out = _model_logits(model, features)
    if dual_head:
        if out.shape[1] % 2:
            raise ShapeError("dual-head output width must be even")
        out = out[:, : out.shape[1] // 2]
    if not adj.is_row_stochastic():
        raise InputError("one-hop inference needs a row-stochastic adjacency")
    z = adj.matmul(out)
    if nodes is None:
        nodes = np.arange(adj.num_nodes, dtype=np.int64)
    else:
        nodes = np.asarray(nodes, dtype=np.int64)
    return Prediction(nodes=nodes, probs=softmax_temperature(z[nodes]))


def infer_non_hop(model, features, nodes=None):
    """Read the dual-head model's second head directly; no graph."""
    out = _model_logits(model, features)
    if out.shape[1] % 2:
        raise ShapeError("dual-head output width must be even")
    z = out[:, out.shape[1] // 2:]
    if nodes is None:
        nodes = np.arange(out.shape[0], dtype=np.int64)
    else:
        nodes = np.asarray(nodes, dtype=np.int64)
    return Prediction(nodes=nodes, probs=softmax_temperature(z[nodes]))


def verify_bound(adj, h, targets):
    """Check the aggregation-vs-transposed-targets loss inequality.

    Returns (lhs, rhs) where lhs is the mean cross-entropy of A @ H
    against the targets and rhs the mean cross-entropy of H against
    A^T @ targets. Convexity of cross-entropy in the logits gives
    lhs <= rhs whenever A is row-stochastic, so non-row-stochastic
    adjacencies are rejected rather than silently producing numbers
    the inequality says nothing about.
    """
    if not adj.is_row_stochastic():
        raise InputError("bound requires a row-stochastic adjacency")
    h = np.asarray(h, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if h.shape[0] != adj.num_nodes or targets.shape != h.shape[:1] + targets.shape[1:]:
        raise ShapeError("h/targets must have one row per node")
    lhs = cross_entropy_soft(adj.matmul(h), targets)
    rhs = cross_entropy_soft(h, adj.t_matmul(targets))
    return lhs, rhs


def equilibrium_residual(adj, pseudo, labels_onehot, train_mask, tau):
    """Frobenius distance of a pseudo-label matrix from its fixed point.

    The fixed-point map re-derives pseudo-labels from themselves:
    unlabeled rows become softmax(A log softmax(A^T Y~) / tau), labeled
    rows snap back to ground truth. log softmax emits -inf on zero
    columns; the outer softmax maps those to 0 mass, which is the
    correct limit, so the intermediate -inf is expected and silenced.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    pseudo = np.asarray(pseudo, dtype=np.float64)
    labels_onehot = np.asarray(labels_onehot, dtype=np.float64)
    train_mask = np.asarray(train_mask, dtype=bool)
    if pseudo.shape != labels_onehot.shape or train_mask.shape != pseudo.shape[:1]:
        raise ShapeError("pseudo/labels/mask shapes disagree")
    s = adj.t_matmul(pseudo)
    with np.errstate(divide="ignore"):
        log_s = np.log(s)
    # a -inf neighbor entry must zero the class after the softmax, but a
    # row of all -inf would turn into nan; a deep finite floor keeps the
    # zero-mass limit while making the degenerate row uniform instead
    np.maximum(log_s, -1e4, out=log_s)
    mapped = softmax_temperature(adj.matmul(log_s), tau)
    mapped[train_mask] = labels_onehot[train_mask]
    return float(np.linalg.norm(pseudo - mapped))
