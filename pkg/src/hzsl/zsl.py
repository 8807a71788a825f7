"""Base scorers feeding both the standalone baselines and the tree model.

Three pieces live here: a linear softmax classifier head over the training
classes (a stand-in for a frozen pretrained feature classifier), a two-layer
rectifier compatibility network scoring label attribute vectors against
input features, and the convex-combination embedder that represents an input
as a probability-weighted mix of training-class attribute vectors.

Training is plain mini-batch gradient descent with hand-written gradients;
everything is float64 and deterministic given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors
from .numerics import log_softmax, logsumexp, softmax


@dataclass
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    lr_decay: float = 1.0  # multiplicative step decay applied after each epoch


def uniform_init(rng, shape, fan_in):
    s = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-s, s, size=shape)


def _as_batches(rng, count, batch_size):
    perm = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield perm[start:start + batch_size]


# ---------------------------------------------------------------------------
# softmax classifier head


class SoftmaxHead:
    """Linear classifier over an ordered list of training-class node ids.

    Frozen after pretraining; downstream consumers only read probabilities.
    """

    def __init__(self, class_ids, W, b):
        self.class_ids = np.ascontiguousarray(class_ids, dtype=np.int64)
        self.W = np.ascontiguousarray(W, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)
        if self.W.shape[0] != self.class_ids.shape[0] or self.b.shape[0] != self.W.shape[0]:
            raise errors.DimensionMismatch("softmax head shapes disagree")

    @property
    def d_feature(self):
        return self.W.shape[1]

    def logits(self, features):
        return np.asarray(features, dtype=np.float64) @ self.W.T + self.b

    def probs(self, h):
        return softmax(self.logits(h))

    def prob_matrix(self, features):
        return softmax(self.logits(features), axis=-1)

    def to_fields(self, prefix=""):
        return {
            prefix + "classes": self.class_ids,
            prefix + "W": self.W,
            prefix + "b": self.b,
        }

    @classmethod
    def from_fields(cls, fields, prefix=""):
        return cls(fields[prefix + "classes"], fields[prefix + "W"], fields[prefix + "b"])


def init_softmax_head(class_ids, d_feature, seed):
    rng = np.random.default_rng(seed)
    k = len(class_ids)
    return SoftmaxHead(class_ids, uniform_init(rng, (k, d_feature), d_feature), np.zeros(k))


def train_softmax_head(features, labels, class_ids, config):
    """Fit the head by mini-batch gradient descent on cross-entropy.

    Returns (head, per-epoch mean loss trace). Deterministic given
    ``config.seed``; ``epochs=0`` returns the seeded initialization.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] == 0:
        raise errors.EmptyDataset()
    class_ids = np.asarray(sorted(class_ids), dtype=np.int64)
    pos = {int(c): i for i, c in enumerate(class_ids)}
    try:
        targets = np.array([pos[int(y)] for y in labels], dtype=np.int64)
    except KeyError as exc:
        raise errors.LabelOutsideTrainSet(exc.args[0]) from None

    rng = np.random.default_rng(config.seed)
    head = init_softmax_head(class_ids, features.shape[1], config.seed)
    W, b = head.W.copy(), head.b.copy()
    lr = config.learning_rate
    trace = []
    for _ in range(config.epochs):
        losses = []
        for batch in _as_batches(rng, features.shape[0], config.batch_size):
            H = features[batch]
            t = targets[batch]
            logits = H @ W.T + b
            logp = log_softmax(logits, axis=-1)
            losses.append(-float(np.mean(logp[np.arange(len(t)), t])))
            G = np.exp(logp)
            G[np.arange(len(t)), t] -= 1.0
            G /= len(t)
            W -= lr * (G.T @ H)
            b -= lr * G.sum(axis=0)
        trace.append(float(np.mean(losses)))
        lr *= config.lr_decay
    return SoftmaxHead(class_ids, W, b), trace


# ---------------------------------------------------------------------------
# two-layer compatibility network


class CompatModel:
    """Rectifier network h -> g(W2 g(W1 h)) scored against attribute vectors."""

    def __init__(self, W1, W2):
        self.W1 = np.ascontiguousarray(W1, dtype=np.float64)
        self.W2 = np.ascontiguousarray(W2, dtype=np.float64)
        if self.W1.shape[0] != self.W2.shape[1]:
            raise errors.DimensionMismatch("compat layer shapes disagree")

    @property
    def d_feature(self):
        return self.W1.shape[1]

    @property
    def d_embed(self):
        return self.W2.shape[0]

    def embed(self, h):
        return np.maximum(self.W2 @ np.maximum(self.W1 @ np.asarray(h, np.float64), 0.0), 0.0)

    def embed_batch(self, features):
        z1 = np.asarray(features, np.float64) @ self.W1.T
        return np.maximum(np.maximum(z1, 0.0) @ self.W2.T, 0.0)

    def copy(self):
        return CompatModel(self.W1.copy(), self.W2.copy())

    def to_fields(self, prefix=""):
        return {prefix + "W1": self.W1, prefix + "W2": self.W2}

    @classmethod
    def from_fields(cls, fields, prefix=""):
        return cls(fields[prefix + "W1"], fields[prefix + "W2"])


def init_compat(d_feature, d_hidden, d_embed, seed):
    rng = np.random.default_rng(seed)
    return CompatModel(
        uniform_init(rng, (d_hidden, d_feature), d_feature),
        uniform_init(rng, (d_embed, d_hidden), d_hidden),
    )


def compat_log_scores(model, h, attrs, candidates):
    """Log-probabilities of the candidate labels under the compatibility net.

    Component c is a_c . embed(h) minus the log-sum-exp over the candidate
    list; exponentials sum to one. Candidate order is preserved.
    """
    candidates = list(candidates)
    if not candidates:
        raise errors.EmptyCandidates()
    A = attrs.matrix(candidates)
    raw = A @ model.embed(h)
    return raw - logsumexp(raw)


def train_compat(model, features, labels, attrs, class_ids, config):
    """Minimize -log score of the true class over the training classes.

    Attribute vectors stay fixed; only W1 and W2 move. Returns a new model
    plus the per-epoch mean loss trace.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] == 0:
        raise errors.EmptyDataset()
    class_ids = np.asarray(sorted(class_ids), dtype=np.int64)
    pos = {int(c): i for i, c in enumerate(class_ids)}
    try:
        targets = np.array([pos[int(y)] for y in labels], dtype=np.int64)
    except KeyError as exc:
        raise errors.LabelOutsideTrainSet(exc.args[0]) from None
    A = attrs.matrix(class_ids)

    rng = np.random.default_rng(config.seed)
    W1, W2 = model.W1.copy(), model.W2.copy()
    lr = config.learning_rate
    trace = []
    for _ in range(config.epochs):
        losses = []
        for batch in _as_batches(rng, features.shape[0], config.batch_size):
            H = features[batch]
            t = targets[batch]
            nb = len(t)
            Z1 = H @ W1.T
            H1 = np.maximum(Z1, 0.0)
            Z2 = H1 @ W2.T
            E = np.maximum(Z2, 0.0)
            raw = E @ A.T
            logp = log_softmax(raw, axis=-1)
            losses.append(-float(np.mean(logp[np.arange(nb), t])))

            G = np.exp(logp)
            G[np.arange(nb), t] -= 1.0
            G /= nb
            dE = G @ A
            dZ2 = dE * (Z2 > 0.0)
            dZ1 = (dZ2 @ W2) * (Z1 > 0.0)
            W2 -= lr * (dZ2.T @ H1)
            W1 -= lr * (dZ1.T @ H)
        trace.append(float(np.mean(losses)))
        lr *= config.lr_decay
    return CompatModel(W1, W2), trace


# ---------------------------------------------------------------------------
# convex-combination embedding


@dataclass
class ConseConfig:
    m: int = 10


def conse_embed(probs, class_ids, attrs, m):
    """Probability-weighted mean of the attribute vectors for the m most
    probable training classes (ties broken toward the smaller label id)."""
    probs = np.asarray(probs, dtype=np.float64)
    class_ids = np.asarray(class_ids, dtype=np.int64)
    if not 1 <= m <= class_ids.shape[0]:
        raise errors.ConfigInvalid(f"m={m} outside 1..{class_ids.shape[0]}")
    top = np.lexsort((class_ids, -probs))[:m]
    z = float(probs[top].sum())
    if z <= 0.0:
        raise errors.DegenerateZ()
    return (probs[top] @ attrs.matrix(class_ids[top])) / z


def _argmax_smallest_id(candidates, scores):
    order = np.argsort(candidates, kind="stable")
    best = order[int(np.argmax(scores[order]))]
    return int(candidates[best])


def devise_predict(model, h, attrs, candidates):
    """Candidate with the highest compatibility log-score (ties: smallest id)."""
    candidates = np.asarray(list(candidates), dtype=np.int64)
    scores = compat_log_scores(model, h, attrs, candidates)
    return _argmax_smallest_id(candidates, scores)


def conse_cosines(head, h, attrs, cfg, candidates):
    """Cosine between each candidate's attribute vector and the
    convex-combination embedding of ``h``."""
    eps = conse_embed(head.probs(h), head.class_ids, attrs, cfg.m)
    ne = np.linalg.norm(eps)
    if ne == 0.0:
        raise errors.ZeroVector()
    A = attrs.matrix(candidates)
    norms = np.linalg.norm(A, axis=1)
    return (A @ eps) / (norms * ne)


def conse_predict(head, h, attrs, cfg, candidates):
    """Candidate whose attribute vector is closest in cosine to the
    convex-combination embedding (ties: smallest id)."""
    candidates = np.asarray(list(candidates), dtype=np.int64)
    if candidates.size == 0:
        raise errors.EmptyCandidates()
    scores = conse_cosines(head, h, attrs, cfg, candidates)
    return _argmax_smallest_id(candidates, scores)
