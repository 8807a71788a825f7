"""Central finite-difference verification of the analytic NLL gradients.

Builds a small random hierarchy and model, then compares every parameter
group against central differences. The ``corrupt`` hook perturbs one group's
analytic gradient so the failure path stays testable.
"""

from __future__ import annotations

import numpy as np

from .attributes import AttributeTable
from .crf import CrfParameters, _loss_and_grad, nll
from .hierarchy import random_hierarchy
from .zsl import CompatModel, SoftmaxHead

GROUPS = ("w_linear", "w_compat", "w_cosine", "proj", "W1", "W2")
REL_TOL = 1e-4
BIAS_TOL = 1e-12


def build_random_setup(seed, n_nodes, d_feature=6, d_hidden=5, d_embed=4, batch=4):
    """Random hierarchy, attributes, frozen head, and CRF parameters."""
    rng = np.random.default_rng(seed)
    hierarchy = random_hierarchy(n_nodes, seed)
    attrs = AttributeTable(
        {v: rng.normal(size=d_embed) for v in range(hierarchy.n)}
    )
    class_ids = np.array(sorted(hierarchy.leaves()), dtype=np.int64)
    head = SoftmaxHead(
        class_ids,
        rng.normal(size=(len(class_ids), d_feature)) * 0.5,
        rng.normal(size=len(class_ids)) * 0.1,
    )
    compat = CompatModel(
        rng.normal(size=(d_hidden, d_feature)) * 0.5,
        rng.normal(size=(d_embed, d_hidden)) * 0.5,
    )
    params = CrfParameters(
        hierarchy, attrs, head, compat, min(3, len(class_ids)),
        rng.normal(size=hierarchy.n) * 0.5,
        rng.normal(size=hierarchy.n) * 0.5,
        rng.normal(size=hierarchy.n) * 0.5,
        rng.normal(size=(hierarchy.n, d_feature)) * 0.3,
        float(rng.normal()) * 0.3,
    )
    features = rng.normal(size=(batch, d_feature))
    labels = rng.integers(0, hierarchy.n, size=batch)
    return params, features, labels


def _group_array(params, group):
    if group == "W1":
        return params.compat.W1
    if group == "W2":
        return params.compat.W2
    return getattr(params, group)


def _grad_array(grad, group):
    return getattr(grad, group)


def run_gradient_check(seed=0, n_nodes=9, eps=1e-6, corrupt=None, batch=4):
    """Compare analytic and finite-difference gradients at one random point.

    The error for a group is the largest coordinate discrepancy divided by
    the group's largest gradient magnitude. Coordinates whose true gradient
    is analytically zero (the root's weights, like the bias, cancel in the
    normalization) only see central-difference roundoff, so a per-coordinate
    ratio would measure float64 noise rather than correctness.

    Returns (per-group relative error, |bias gradient|, passed).
    """
    params, features, labels = build_random_setup(seed, n_nodes, batch=batch)
    _, grad = _loss_and_grad(params, features, labels)

    results = {}
    for group in GROUPS:
        theta = _group_array(params, group)
        analytic = np.array(_grad_array(grad, group), dtype=np.float64)
        if corrupt == group:
            analytic = analytic + 1e-2
        flat = theta.reshape(-1)
        fd = np.empty_like(flat)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + eps
            hi = nll(params, features, labels)
            flat[i] = orig - eps
            lo = nll(params, features, labels)
            flat[i] = orig
            fd[i] = (hi - lo) / (2.0 * eps)
        a = analytic.reshape(-1)
        scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(fd))), 1e-12)
        results[group] = float(np.max(np.abs(a - fd)) / scale)

    bias_abs = abs(grad.bias)
    if corrupt == "bias":
        bias_abs += 1e-3
    passed = all(v < REL_TOL for v in results.values()) and bias_abs <= BIAS_TOL
    return results, bias_abs, passed
