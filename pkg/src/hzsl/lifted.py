"""Lifted prediction: project a fine-grained prediction to a requested level.

Any scorer exposing ``scores(h, candidate_ids) -> array`` can be lifted. The
module also provides the direct within-level baseline (score only the
level's own attribute vectors, ignoring the tree) and scorer adapters for
the compatibility network, the convex-combination embedder, and the path
model.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from . import errors
from .crf import predict_paths
from .zsl import compat_log_scores, conse_cosines


class BaseScorer(Protocol):
    def scores(self, h, candidates):  # pragma: no cover - interface only
        ...


class DeviseScorer:
    """Compatibility-network log-scores over a candidate list."""

    def __init__(self, model, attrs):
        self.model = model
        self.attrs = attrs

    def scores(self, h, candidates):
        return compat_log_scores(self.model, h, self.attrs, candidates)


class ConseScorer:
    """Cosine between candidate attribute vectors and the convex-combination
    embedding derived from the frozen head."""

    def __init__(self, head, attrs, cfg):
        self.head = head
        self.attrs = attrs
        self.cfg = cfg

    def scores(self, h, candidates):
        return conse_cosines(self.head, h, self.attrs, self.cfg, candidates)


class CrfScorer:
    """Path probabilities of the candidates' paths under the tree model."""

    def __init__(self, params):
        self.params = params

    def scores(self, h, candidates):
        dist = predict_paths(self.params, h)
        ids = np.asarray(list(candidates), dtype=np.int64)
        return dist.p[ids]


def _argmax_candidate(scorer, h, candidates):
    ids = np.asarray(sorted(int(c) for c in candidates), dtype=np.int64)
    if ids.size == 0:
        raise errors.EmptyCandidates()
    scores = np.asarray(scorer.scores(h, ids), dtype=np.float64)
    return int(ids[int(np.argmax(scores))])


def lift_predict(scorer, h, fine_candidates, level, hierarchy):
    """Fine-grained argmax over the candidates, projected to its ancestor at
    ``level``. Every candidate must sit at or below that level."""
    fine = sorted(int(c) for c in fine_candidates)
    if not fine:
        raise errors.EmptyCandidates()
    for c in fine:
        if hierarchy.depth(c) < level:
            raise errors.CandidateAboveLevel(hierarchy.labels[c], level)
    best = _argmax_candidate(scorer, h, fine)
    return hierarchy.ancestor(best, level)


def direct_within_level(scorer, h, hierarchy, level):
    """Argmax of the scorer over the level's nodes only (no tree information)."""
    ids = hierarchy.nodes_at_level(level)
    if not ids:
        raise errors.EmptyLevel(level)
    return _argmax_candidate(scorer, h, ids)
