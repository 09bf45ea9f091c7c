"""Dense numeric kernels: softmax/cross-entropy, a rectifier MLP with
manual backpropagation, and an Adam optimizer.

Everything here is plain numpy. Arrays are float64 by default (tests and
gradient checks need the precision); training harnesses may pass
``dtype=np.float32`` for speed. The MLP accepts either a dense ndarray or
a ``scipy.sparse`` matrix as input; sparse inputs keep the first-layer
matmul cheap for high-dimensional bag-of-words features.
"""

import numpy as np
import scipy.sparse as sp

from .errors import InputError, NonFiniteError, ShapeError


def softmax_temperature(logits, tau=1.0):
    """Row-wise softmax of ``logits / tau``.

    Stabilized by per-row max subtraction, so magnitudes up to ~1e4 and
    -inf entries are handled exactly. ``tau`` must be positive; values
    below 1 sharpen the distribution.
    """
    if not tau > 0:
        raise InputError(f"temperature must be positive, got {tau}")
    z = np.asarray(logits)
    if tau != 1.0:
        z = z / tau
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits):
    """Row-wise log softmax, max-shifted for stability."""
    z = np.asarray(logits)
    m = np.max(z, axis=-1, keepdims=True)
    shifted = z - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def cross_entropy_soft(logits, soft_targets, row_weights=None):
    """Weighted-mean cross entropy against soft target rows.

    Each target row may be a sub-probability vector (entries >= 0, row
    sum <= 1); rows produced by transpose aggregation do not sum to 1.
    Returns sum_r w_r * ce_r / sum_r w_r where
    ce_r = -sum_c t_rc * log softmax(z_r)_c. A zero total weight yields
    0.0 (empty supervised batches are legal).
    """
    loss, _ = softmax_cross_entropy(logits, soft_targets, row_weights,
                                    with_grad=False)
    return loss


def softmax_cross_entropy(logits, soft_targets, row_weights=None,
                          with_grad=True):
    """Cross entropy plus, optionally, its gradient w.r.t. ``logits``.

    The gradient accounts for target rows that do not sum to 1:
    d/dz_r = w_r * (mass_r * softmax(z_r) - t_r) / sum(w).
    """
    z = np.asarray(logits)
    t = np.asarray(soft_targets)
    if z.shape != t.shape:
        raise ShapeError(f"logits {z.shape} vs targets {t.shape}")
    if np.any(t < 0):
        raise InputError("soft targets must be nonnegative")
    n = z.shape[0]
    if row_weights is None:
        w = None
        total_w = float(n)
    else:
        w = np.asarray(row_weights, dtype=z.dtype)
        if w.shape != (n,):
            raise ShapeError(f"row_weights shape {w.shape}, want ({n},)")
        total_w = float(w.sum())
    if total_w <= 0.0 or n == 0:
        grad = np.zeros_like(z) if with_grad else None
        return 0.0, grad

    m = np.max(z, axis=-1, keepdims=True)
    shifted = z - m
    lse = np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True)) + m
    mass = t.sum(axis=-1)
    # ce_r = mass_r * lse_r - <t_r, z_r>
    ce = mass * lse[:, 0] - np.sum(t * z, axis=-1)
    if w is None:
        loss = float(ce.sum() / total_w)
    else:
        loss = float((w * ce).sum() / total_w)
    if not with_grad:
        return loss, None
    p = np.exp(shifted - (lse - m))
    grad = mass[:, None] * p - t
    if w is not None:
        grad *= w[:, None]
    grad /= total_w
    return loss, grad


def tempered_softmax_vjp(logits, upstream, tau):
    """Vector-Jacobian product of p = softmax(logits / tau).

    Returns d<upstream, p>/d logits = (p * u - (p . u) p) / tau, row-wise.
    Used when gradients are allowed to flow into pseudo-label targets.
    """
    p = softmax_temperature(logits, tau)
    inner = np.sum(p * upstream, axis=-1, keepdims=True)
    return (p * upstream - inner * p) / tau


def one_hot(labels, num_classes, dtype=np.float64):
    labels = np.asarray(labels)
    out = np.zeros((labels.shape[0], num_classes), dtype=dtype)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def glorot_uniform(rng, fan_in, fan_out, dtype=np.float64):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


class ForwardTape:
    """Cached activations from one forward pass, consumed by backward."""

    __slots__ = ("x", "inputs", "relu_masks", "drop_masks", "train")

    def __init__(self, x, inputs, relu_masks, drop_masks, train):
        self.x = x
        self.inputs = inputs          # input to each linear layer
        self.relu_masks = relu_masks  # z > 0 per hidden layer
        self.drop_masks = drop_masks  # scaled keep masks, or None
        self.train = train


class Mlp:
    """Fully connected network: linear layers with rectifier activations
    between them and an identity output layer.

    Dropout uses inverted scaling (multiply kept units by 1/(1-p) at
    train time) and is applied after each hidden activation, so eval-mode
    forward passes need no rescaling and are pure functions of
    (model, x).
    """

    def __init__(self, dims, dropout=0.0, rng=None, dtype=np.float64):
        if len(dims) < 2:
            raise InputError("need at least input and output dims")
        if any(int(d) < 1 for d in dims):
            raise InputError(f"layer widths must be positive, got {dims}")
        if not 0.0 <= dropout < 1.0:
            raise InputError(f"dropout must be in [0, 1), got {dropout}")
        if rng is None:
            rng = np.random.default_rng()
        self.dims = list(int(d) for d in dims)
        self.dropout = float(dropout)
        self.dtype = dtype
        self.weights = [glorot_uniform(rng, self.dims[i], self.dims[i + 1], dtype)
                        for i in range(len(self.dims) - 1)]
        self.biases = [np.zeros(self.dims[i + 1], dtype=dtype)
                       for i in range(len(self.dims) - 1)]

    @property
    def in_dim(self):
        return self.dims[0]

    @property
    def out_dim(self):
        return self.dims[-1]

    @property
    def num_layers(self):
        return len(self.weights)

    def params(self):
        """Flat parameter list, weights and biases interleaved."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def decay_flags(self):
        """Weight decay applies to weight matrices only, not biases."""
        return [i % 2 == 0 for i in range(2 * self.num_layers)]

    def forward(self, x, train=False, rng=None):
        """Run the network; returns (output, tape).

        ``x`` may be dense or scipy-sparse with ``x.shape[1] == in_dim``.
        In train mode with dropout > 0, ``rng`` supplies the masks.
        """
        if x.shape[1] != self.in_dim:
            raise ShapeError(
                f"input has {x.shape[1]} columns, model expects {self.in_dim}")
        use_drop = train and self.dropout > 0.0
        if use_drop and rng is None:
            raise InputError("train-mode forward with dropout needs an rng")
        inputs, relu_masks, drop_masks = [], [], []
        a = x
        last = self.num_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(a)
            z = a @ w
            z = np.asarray(z) + b
            if i == last:
                a = z
                break
            mask = z > 0
            relu_masks.append(mask)
            a = np.where(mask, z, 0.0)
            if use_drop:
                keep = (rng.random(a.shape) >= self.dropout)
                scale = keep.astype(self.dtype) / (1.0 - self.dropout)
                drop_masks.append(scale)
                a = a * scale
            else:
                drop_masks.append(None)
        return a, ForwardTape(x, inputs, relu_masks, drop_masks, train)

    def backward(self, tape, output_grad):
        """Backpropagate ``output_grad`` through the taped forward pass.

        Returns gradients as a flat list matching ``params()``. Dropout
        masks recorded on the tape are reused exactly.
        """
        if len(tape.inputs) != self.num_layers:
            raise InputError("tape does not match this model")
        if output_grad.shape[-1] != self.out_dim:
            raise ShapeError(
                f"output_grad has {output_grad.shape[-1]} columns, "
                f"model emits {self.out_dim}")
        grads_w = [None] * self.num_layers
        grads_b = [None] * self.num_layers
        delta = output_grad
        for i in range(self.num_layers - 1, -1, -1):
            a = tape.inputs[i]
            if sp.issparse(a):
                grads_w[i] = np.asarray((a.T @ delta))
            else:
                grads_w[i] = a.T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
                scale = tape.drop_masks[i - 1]
                if scale is not None:
                    delta = delta * scale
                delta = np.where(tape.relu_masks[i - 1], delta, 0.0)
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.append(gw)
            out.append(gb)
        return out


class AdamState:
    """First/second moment accumulators plus a step counter."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps


def adam_step(params, grads, state, lr, weight_decay=0.0, decay_flags=None):
    """One Adam update, in place.

    Weight decay is the conventional L2 term folded into the gradient
    before the moment updates, applied only where ``decay_flags`` is
    true (weights yes, biases no). Rejects non-finite gradients.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("params/grads/state length mismatch")
    state.t += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"param {i}: shape {p.shape} vs grad {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient in parameter {i}")
        if weight_decay and (decay_flags is None or decay_flags[i]):
            g = g + weight_decay * p
        m = state.m[i]
        v = state.v[i]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
