"""Conditional random field over the valid root-to-node paths of a label tree.

The model assigns each label configuration an energy that is a weighted sum
of three per-class feature families (a linear projection of the input, the
compatibility network's log-probabilities, and cosine similarity against the
convex-combination embedding) accumulated along the path, plus a bias. Only
the N nesting-valid configurations (one per node) carry probability mass, so
the partition function is an exact sum over N paths computed in one
prefix pass. Training minimizes the average negative conditional
log-likelihood with exact hand-derived gradients; the classifier head and
attribute vectors stay frozen while the compatibility layers move jointly
with the path weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors, kernels
from .numerics import log_softmax, logsumexp
from .zsl import CompatModel, SoftmaxHead, uniform_init


@dataclass(eq=False)
class CrfParameters:
    """Per-class weights, feature projection, and the embedded submodels."""

    hierarchy: object
    attrs: object
    head: SoftmaxHead
    compat: CompatModel
    conse_m: int
    w_linear: np.ndarray   # (N,)
    w_compat: np.ndarray   # (N,)
    w_cosine: np.ndarray   # (N,)
    proj: np.ndarray       # (N, d_feature)
    bias: float

    def __post_init__(self):
        n = self.hierarchy.n
        self.w_linear = np.ascontiguousarray(self.w_linear, dtype=np.float64)
        self.w_compat = np.ascontiguousarray(self.w_compat, dtype=np.float64)
        self.w_cosine = np.ascontiguousarray(self.w_cosine, dtype=np.float64)
        self.proj = np.ascontiguousarray(self.proj, dtype=np.float64)
        for name, arr in (("w_linear", self.w_linear), ("w_compat", self.w_compat),
                          ("w_cosine", self.w_cosine)):
            if arr.shape != (n,):
                raise errors.DimensionMismatch(f"{name} must have shape ({n},)")
        if self.proj.shape[0] != n:
            raise errors.DimensionMismatch(f"proj must have {n} rows")
        if self.proj.shape[1] != self.compat.d_feature:
            raise errors.DimensionMismatch("proj and compat feature dims disagree")
        self.attrs.check_covers(self.hierarchy)
        if np.any(np.diff(self.head.class_ids) <= 0):
            raise errors.DimensionMismatch("head class ids must be strictly increasing")
        if not 1 <= self.conse_m <= self.head.class_ids.shape[0]:
            raise errors.ConfigInvalid(
                f"conse_m={self.conse_m} outside 1..{self.head.class_ids.shape[0]}"
            )
        # frozen per-parameter caches
        self._A = self.attrs.matrix(range(n))
        self._A_norm = np.linalg.norm(self._A, axis=1)
        self._A_head = self.attrs.matrix(self.head.class_ids)

    @property
    def d_feature(self):
        return self.proj.shape[1]

    def copy(self):
        return CrfParameters(
            self.hierarchy, self.attrs, self.head, self.compat.copy(), self.conse_m,
            self.w_linear.copy(), self.w_compat.copy(), self.w_cosine.copy(),
            self.proj.copy(), float(self.bias),
        )

    def to_fields(self):
        fields = {
            "w_linear": self.w_linear,
            "w_compat": self.w_compat,
            "w_cosine": self.w_cosine,
            "proj": self.proj,
            "bias": float(self.bias),
            "conse_m": int(self.conse_m),
            "fingerprint": self.hierarchy.fingerprint(),
        }
        fields.update(self.head.to_fields("head."))
        fields.update(self.compat.to_fields("compat."))
        return fields

    @classmethod
    def from_fields(cls, fields, hierarchy, attrs):
        found = fields.get("fingerprint")
        expected = hierarchy.fingerprint()
        if found != expected:
            raise errors.FingerprintMismatch(expected, found)
        return cls(
            hierarchy, attrs,
            SoftmaxHead.from_fields(fields, "head."),
            CompatModel.from_fields(fields, "compat."),
            int(fields["conse_m"]),
            fields["w_linear"], fields["w_compat"], fields["w_cosine"],
            fields["proj"], float(fields["bias"]),
        )


def init_crf(hierarchy, attrs, head, compat, conse_m, seed):
    """Fresh parameters: zero path weights, small random projection."""
    rng = np.random.default_rng(seed)
    n = hierarchy.n
    d = compat.d_feature
    return CrfParameters(
        hierarchy, attrs, head, compat.copy(), conse_m,
        np.zeros(n), np.zeros(n), np.zeros(n),
        uniform_init(rng, (n, d), d), 0.0,
    )


@dataclass(eq=False)
class ClassFeatureBundle:
    """Per-class feature values for one input, over all N classes."""

    linear: np.ndarray       # projection scores
    compat_logp: np.ndarray  # log-probabilities, normalized over all classes
    cosine: np.ndarray       # cosine against the convex-combination embedding


@dataclass(eq=False)
class CrfGradient:
    w_linear: np.ndarray
    w_compat: np.ndarray
    w_cosine: np.ndarray
    proj: np.ndarray
    bias: float
    W1: np.ndarray
    W2: np.ndarray


@dataclass(eq=False)
class PathDistribution:
    """Probabilities over the N valid paths, indexed by ending node id."""

    p: np.ndarray
    hierarchy: object
    _masses: np.ndarray = field(default=None, repr=False)

    def masses(self):
        """Total probability of paths ending inside each node's subtree."""
        if self._masses is None:
            h = self.hierarchy
            self._masses = kernels.subtree_sums(h.parent_ids, h.order, self.p)
        return self._masses


def _batch_forward(params, features):
    """All per-class features, energies, and path log-probabilities for a batch."""
    H = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if H.shape[1] != params.d_feature:
        raise errors.DimensionMismatch(
            f"feature dim {H.shape[1]}, model expects {params.d_feature}"
        )
    h = params.hierarchy

    fL = H @ params.proj.T                                     # (B, N)

    Z1 = H @ params.compat.W1.T
    H1 = np.maximum(Z1, 0.0)
    Z2 = H1 @ params.compat.W2.T
    Emb = np.maximum(Z2, 0.0)                                  # (B, d_embed)
    raw = Emb @ params._A.T                                    # (B, N)
    fD = log_softmax(raw, axis=-1)

    P_head = params.head.prob_matrix(H)                        # (B, K)
    m = params.conse_m
    top = np.argsort(-P_head, axis=1, kind="stable")[:, :m]    # ties -> smaller id
    pi = np.take_along_axis(P_head, top, axis=1)
    z = pi.sum(axis=1, keepdims=True)
    if np.any(z <= 0.0):
        raise errors.DegenerateZ()
    eps = np.einsum("bm,bmd->bd", pi, params._A_head[top]) / z  # (B, d_embed)
    eps_norm = np.linalg.norm(eps, axis=1)
    if np.any(eps_norm == 0.0):
        raise errors.ZeroVector()
    fC = (eps @ params._A.T) / (eps_norm[:, None] * params._A_norm[None, :])

    terms = params.w_linear * fL + params.w_compat * fD + params.w_cosine * fC
    energies = kernels.path_sums(h.parent_ids, h.order, terms) + params.bias
    logp = log_softmax(-energies, axis=-1)
    return {
        "H": H, "fL": fL, "fD": fD, "fC": fC,
        "Z1": Z1, "H1": H1, "Z2": Z2, "raw": raw,
        "energies": energies, "logp": logp,
    }


def compute_features(params, h):
    """The three per-class feature vectors for a single input."""
    fw = _batch_forward(params, h)
    return ClassFeatureBundle(fw["fL"][0], fw["fD"][0], fw["fC"][0])


def path_energies(params, bundle):
    """Energy of each root-to-node path, via one prefix pass over the tree."""
    h = params.hierarchy
    terms = (params.w_linear * bundle.linear
             + params.w_compat * bundle.compat_logp
             + params.w_cosine * bundle.cosine)
    return kernels.path_sums(h.parent_ids, h.order, terms) + params.bias


def path_distribution(energies, hierarchy):
    """Normalize exp(-energy) over the N valid paths (stable log-sum-exp)."""
    energies = np.asarray(energies, dtype=np.float64)
    if not np.all(np.isfinite(energies)):
        raise errors.NonFiniteEnergy()
    p = np.exp(log_softmax(-energies, axis=-1))
    return PathDistribution(p, hierarchy)


def predict_paths(params, h):
    """Convenience: features -> energies -> path distribution for one input."""
    fw = _batch_forward(params, h)
    return PathDistribution(np.exp(fw["logp"][0]), params.hierarchy)


def _check_labels(params, labels):
    labels = np.asarray(labels, dtype=np.int64)
    bad = (labels < 0) | (labels >= params.hierarchy.n)
    if np.any(bad):
        raise errors.UnknownLabel(int(labels[bad][0]))
    return labels


def nll(params, features, labels):
    """Mean negative log-probability of the true paths."""
    labels = _check_labels(params, labels)
    fw = _batch_forward(params, features)
    rows = np.arange(labels.shape[0])
    return -float(np.mean(fw["logp"][rows, labels]))


def _loss_and_grad(params, features, labels):
    labels = _check_labels(params, labels)
    fw = _batch_forward(params, features)
    h = params.hierarchy
    B = labels.shape[0]
    rows = np.arange(B)

    loss = -float(np.mean(fw["logp"][rows, labels]))

    P = np.exp(fw["logp"])
    gE = -P                      # d nll_i / d E_v = onehot - p
    gE[rows, labels] += 1.0
    gt = kernels.subtree_sums(h.parent_ids, h.order, gE)

    fL, fD, fC = fw["fL"], fw["fD"], fw["fC"]
    dw_linear = (gt * fL).sum(axis=0) / B
    dw_compat = (gt * fD).sum(axis=0) / B
    dw_cosine = (gt * fC).sum(axis=0) / B
    dbias = float(gE.sum(axis=1).mean())
    dproj = (gt * params.w_linear).T @ fw["H"] / B

    # through the log-softmax of the compatibility scores
    u = gt * params.w_compat
    draw = u - np.exp(fD) * u.sum(axis=1, keepdims=True)
    dEmb = draw @ params._A
    dZ2 = dEmb * (fw["Z2"] > 0.0)
    dW2 = dZ2.T @ fw["H1"] / B
    dH1 = dZ2 @ params.compat.W2
    dZ1 = dH1 * (fw["Z1"] > 0.0)
    dW1 = dZ1.T @ fw["H"] / B

    grad = CrfGradient(dw_linear, dw_compat, dw_cosine, dproj, dbias, dW1, dW2)
    return loss, grad


def nll_gradient(params, features, labels):
    """Exact gradient of the mean negative log-likelihood.

    Frozen components (the classifier head, the attribute vectors, and hence
    the cosine feature values) receive no gradient; the bias gradient is
    analytically zero and is reported as computed.
    """
    _, grad = _loss_and_grad(params, features, labels)
    return grad


def train_crf(params, features, labels, config):
    """Mini-batch gradient descent on the path NLL.

    The compatibility layers are updated jointly with the per-class weights;
    the head stays frozen. Returns new parameters and the per-epoch mean
    batch loss trace. Deterministic given the seed.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = _check_labels(params, labels)
    if features.shape[0] == 0:
        raise errors.EmptyDataset()

    out = params.copy()
    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    trace = []
    for _ in range(config.epochs):
        losses = []
        perm = rng.permutation(features.shape[0])
        for start in range(0, features.shape[0], config.batch_size):
            batch = perm[start:start + config.batch_size]
            loss, g = _loss_and_grad(out, features[batch], labels[batch])
            losses.append(loss)
            out.w_linear -= lr * g.w_linear
            out.w_compat -= lr * g.w_compat
            out.w_cosine -= lr * g.w_cosine
            out.proj -= lr * g.proj
            out.bias -= lr * g.bias
            out.compat.W1 -= lr * g.W1
            out.compat.W2 -= lr * g.W2
        trace.append(float(np.mean(losses)))
        lr *= config.lr_decay
    return out, trace


# ---------------------------------------------------------------------------
# prediction rules


def subtree_mass(dist, node):
    """Probability of all paths ending at or below ``node``."""
    return float(dist.masses()[dist.hierarchy._check(node)])


def predict_free(dist):
    """Ending node of the most probable path (ties: smallest id)."""
    return int(np.argmax(dist.p))


def predict_within_level(dist, level):
    """Most probable node at the given depth by subtree mass, unnormalized."""
    ids = dist.hierarchy.nodes_at_level(level)
    if not ids:
        raise errors.EmptyLevel(level)
    ids = np.asarray(ids, dtype=np.int64)
    return int(ids[int(np.argmax(dist.masses()[ids]))])


def predict_max_utility(dist, spec):
    """Node maximizing expected utility under the path distribution.

    Returns (node, expected utility); ties go to the smallest id.
    """
    eu = spec.matrix() @ dist.p
    best = int(np.argmax(eu))
    return best, float(eu[best])


def predict_restricted(dist, candidates):
    """Most probable path ending among the candidates (no renormalization)."""
    candidates = sorted(int(c) for c in candidates)
    if not candidates:
        raise errors.EmptyCandidates()
    ids = np.asarray(candidates, dtype=np.int64)
    return int(ids[int(np.argmax(dist.p[ids]))])
