"""Prediction utilities over the hierarchy and expected-utility evaluation.

Three built-in utilities score a predicted node against the true node, all
with range [0, 1] and U(y, y) = 1:

* ``exact``: 1 on exact match, else 0.
* ``pathlen``: 1 minus the tree distance normalized by the tree diameter
  (or, behind a switch, by the maximum root-to-node depth).
* ``subtreedepth``: depth(pred)/depth(true) when the prediction is an
  ancestor-or-self of the true node, else 0. Predicting the root for a
  root-labelled instance scores 1 for closure.
"""

from __future__ import annotations

import numpy as np

from . import errors


def u_path_length(hierarchy, pred, true, normalizer="diameter"):
    """1 - tree_distance(pred, true) / max distance; symmetric in its arguments."""
    if normalizer == "diameter":
        norm = hierarchy.diameter()
    elif normalizer == "maxdepth":
        norm = hierarchy.max_depth()
    else:
        raise errors.ConfigInvalid(f"unknown path-length normalizer {normalizer!r}")
    if norm == 0:
        raise errors.DegenerateTree()
    return 1.0 - hierarchy.tree_distance(pred, true) / norm


def u_subtree_depth(hierarchy, pred, true):
    """depth(pred)/depth(true) when pred is an ancestor-or-self of true, else 0."""
    if not hierarchy.is_ancestor_or_self(pred, true):
        return 0.0
    dt = hierarchy.depth(true)
    if dt == 0:
        return 1.0  # both are the root
    return hierarchy.depth(pred) / dt


KINDS = ("exact", "pathlen", "subtreedepth")


class UtilitySpec:
    """Evaluable utility U(pred, true) bound to one hierarchy."""

    def __init__(self, kind, hierarchy, pathlen_normalizer="diameter"):
        if kind not in KINDS:
            raise errors.ConfigInvalid(f"utility must be one of {KINDS}, got {kind!r}")
        self.kind = kind
        self.hierarchy = hierarchy
        self.pathlen_normalizer = pathlen_normalizer
        self._matrix = None

    def value(self, pred, true):
        if self.kind == "exact":
            return 1.0 if int(pred) == int(true) else 0.0
        if self.kind == "pathlen":
            return u_path_length(self.hierarchy, pred, true, self.pathlen_normalizer)
        return u_subtree_depth(self.hierarchy, pred, true)

    def matrix(self):
        """Dense table M[pred, true]; built once, then reused."""
        if self._matrix is None:
            n = self.hierarchy.n
            m = np.empty((n, n), dtype=np.float64)
            for pred in range(n):
                for true in range(n):
                    m[pred, true] = self.value(pred, true)
            m.setflags(write=False)
            self._matrix = m
        return self._matrix


def expected_utility(dist, pred, spec):
    """Expectation of U(pred, .) under the path distribution."""
    return float(spec.matrix()[int(pred)] @ dist.p)


def mean_utility(predictions, spec):
    """Arithmetic mean of U(pred, true) over (pred, true) pairs."""
    predictions = list(predictions)
    if not predictions:
        raise errors.EmptyList()
    return float(np.mean([spec.value(p, t) for p, t in predictions]))
