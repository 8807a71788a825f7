"""Benchmark evaluation: run prediction methods over a task and build a report.

Method names follow the CLI convention:

* ``crf-native``      tree model used natively (restricted argmax, subtree
                      mass within a level, max path or max expected utility
                      for free prediction)
* ``lifted:<base>``   base prediction over fine candidates, projected to
                      the requested level; base is devise, conse, or crf
* ``direct:<base>``   base scorer applied to the task's candidate set only
"""

from __future__ import annotations

import time

import numpy as np

from . import errors
from .crf import (predict_free, predict_max_utility, predict_paths,
                  predict_restricted, predict_within_level)
from .dataio import split_candidates
from .lifted import (ConseScorer, CrfScorer, DeviseScorer, direct_within_level,
                     lift_predict)
from .report import EvalReport, ReportRow
from .utility import UtilitySpec, mean_utility
from .zsl import ConseConfig

BASES = ("devise", "conse", "crf")


class MethodSet:
    """Resolved models shared by the evaluated methods."""

    def __init__(self, dataset, head=None, compat=None, crf_params=None, conse_m=10):
        self.dataset = dataset
        self.head = head
        self.compat = compat
        self.crf_params = crf_params
        self.conse_cfg = ConseConfig(conse_m)

    def scorer(self, base):
        if base == "devise":
            if self.compat is None:
                raise errors.ConfigInvalid("method needs a compat checkpoint")
            return DeviseScorer(self.compat, self.dataset.attrs)
        if base == "conse":
            if self.head is None:
                raise errors.ConfigInvalid("method needs a head checkpoint")
            return ConseScorer(self.head, self.dataset.attrs, self.conse_cfg)
        if base == "crf":
            if self.crf_params is None:
                raise errors.ConfigInvalid("method needs a crf checkpoint")
            return CrfScorer(self.crf_params)
        raise errors.ConfigInvalid(f"unknown base scorer {base!r}; expected {BASES}")

    def require_crf(self):
        if self.crf_params is None:
            raise errors.ConfigInvalid("crf-native needs a crf checkpoint")
        return self.crf_params


def parse_method(name):
    """Split a method name into ('native'|'lifted'|'direct', base or None)."""
    if name == "crf-native":
        return ("native", None)
    for prefix in ("lifted", "direct"):
        if name.startswith(prefix + ":"):
            base = name[len(prefix) + 1:]
            if base not in BASES:
                raise errors.ConfigInvalid(f"unknown base {base!r} in method {name!r}")
            return (prefix, base)
    raise errors.ConfigInvalid(f"unknown method {name!r}")


def predict_with_method(methods, name, task, instances, candidates, level=None,
                        decision="max-path", decision_spec=None):
    """Predicted node per instance for one method on one task."""
    h = methods.dataset.hierarchy
    mode, base = parse_method(name)
    preds = np.empty(len(instances), dtype=np.int64)

    if mode == "native":
        params = methods.require_crf()
        for i, inst in enumerate(instances):
            dist = predict_paths(params, inst.features)
            if task == "level":
                preds[i] = predict_within_level(dist, level)
            elif task == "free":
                if decision == "expected-utility":
                    preds[i], _ = predict_max_utility(dist, decision_spec)
                else:
                    preds[i] = predict_free(dist)
            else:
                preds[i] = predict_restricted(dist, candidates)
        return preds

    scorer = methods.scorer(base)
    if mode == "lifted":
        if task != "level":
            raise errors.ConfigInvalid("lifted methods need the level task")
        fine = [v for v in range(h.n) if h.depth(v) >= level]
        for i, inst in enumerate(instances):
            preds[i] = lift_predict(scorer, inst.features, fine, level, h)
        return preds

    # direct application of the base scorer to the task's candidate set
    if task == "level":
        for i, inst in enumerate(instances):
            preds[i] = direct_within_level(scorer, inst.features, h, level)
    else:
        ids = np.asarray(candidates, dtype=np.int64)
        for i, inst in enumerate(instances):
            scores = np.asarray(scorer.scores(inst.features, ids), dtype=np.float64)
            preds[i] = int(ids[int(np.argmax(scores))])
    return preds


def evaluate(methods, names, dataset, task, level=None, split=None, seed=0,
             decision="max-path", utility_kind="subtreedepth"):
    """Run every method on the task and assemble an EvalReport.

    Free-task rows include mean path-length and subtree-depth utilities of
    the predictions against the true nodes; other tasks report accuracy only.
    """
    h = dataset.hierarchy
    started = time.perf_counter()
    instances, candidates, gt = split_candidates(dataset, task, level=level, split=split)
    u_pl = UtilitySpec("pathlen", h)
    u_sd = UtilitySpec("subtreedepth", h)
    decision_spec = UtilitySpec(utility_kind, h) if decision == "expected-utility" else None

    if task == "level":
        scope = f"level-{level}"
    elif task == "free":
        scope = f"free-{split}" if split else "free"
    else:
        scope = task

    rows = []
    for name in dict.fromkeys(names):
        preds = predict_with_method(methods, name, task, instances, candidates,
                                    level=level, decision=decision,
                                    decision_spec=decision_spec)
        accuracy = float(np.mean(preds == gt))
        if task == "free":
            pairs = list(zip(preds.tolist(), gt.tolist()))
            rows.append(ReportRow(name, scope, len(instances), accuracy,
                                  mean_utility(pairs, u_pl), mean_utility(pairs, u_sd)))
        else:
            rows.append(ReportRow(name, scope, len(instances), accuracy))

    config = {
        "task": task,
        "level": "" if level is None else str(level),
        "split": split or "",
        "decision": decision,
        "utility": utility_kind if decision == "expected-utility" else "",
        "methods": ",".join(dict.fromkeys(names)),
    }
    return EvalReport(task, rows, config, seed, wall_clock=time.perf_counter() - started)
