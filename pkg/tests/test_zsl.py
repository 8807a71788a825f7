import math

import numpy as np
import pytest

from hzsl import errors
from hzsl.attributes import AttributeTable
from hzsl.zsl import (CompatModel, ConseConfig, TrainConfig, compat_log_scores,
                      conse_embed, conse_predict, devise_predict, init_compat,
                      train_compat, train_softmax_head)


def _two_gaussians(n_per=100, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=(-3.0, 0.0), scale=0.5, size=(n_per, 2))
    b = rng.normal(loc=(3.0, 0.0), scale=0.5, size=(n_per, 2))
    X = np.vstack([a, b])
    y = np.array([5] * n_per + [9] * n_per)
    return X, y


def test_head_separates_two_gaussians():
    X, y = _two_gaussians()
    head, trace = train_softmax_head(X, y, [5, 9], TrainConfig(epochs=20, seed=0))
    preds = head.class_ids[np.argmax(head.prob_matrix(X), axis=1)]
    assert (preds == y).mean() >= 0.99
    assert trace[-1] < trace[0]


def test_head_single_class_degenerate():
    X = np.random.default_rng(0).normal(size=(30, 3))
    y = np.full(30, 2)
    head, _ = train_softmax_head(X, y, [2], TrainConfig(epochs=3, seed=0))
    assert np.all(head.prob_matrix(X) >= 0.99)


def test_head_training_deterministic():
    X, y = _two_gaussians()
    h1, t1 = train_softmax_head(X, y, [5, 9], TrainConfig(epochs=5, seed=3))
    h2, t2 = train_softmax_head(X, y, [5, 9], TrainConfig(epochs=5, seed=3))
    np.testing.assert_array_equal(h1.W, h2.W)
    np.testing.assert_array_equal(h1.b, h2.b)
    assert t1 == t2


def test_head_probs_normalized():
    X, y = _two_gaussians()
    head, _ = train_softmax_head(X, y, [5, 9], TrainConfig(epochs=5, seed=0))
    sums = head.prob_matrix(X).sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, atol=1e-9)


def test_head_rejects_label_outside_train_set():
    X, y = _two_gaussians()
    with pytest.raises(errors.LabelOutsideTrainSet):
        train_softmax_head(X, y, [5], TrainConfig(epochs=1))


def test_head_rejects_empty_dataset():
    with pytest.raises(errors.EmptyDataset):
        train_softmax_head(np.zeros((0, 2)), np.zeros(0, dtype=int), [1], TrainConfig())


# ---------------------------------------------------------------------------
# compatibility network


def _small_setup(seed=0, n_classes=4, d_feature=3, d_hidden=4, d_embed=3):
    rng = np.random.default_rng(seed)
    attrs = AttributeTable({i: rng.normal(size=d_embed) for i in range(n_classes)})
    model = CompatModel(rng.normal(size=(d_hidden, d_feature)),
                        rng.normal(size=(d_embed, d_hidden)))
    return rng, attrs, model


def test_compat_log_scores_singleton_is_zero():
    rng, attrs, model = _small_setup()
    h = rng.normal(size=3)
    scores = compat_log_scores(model, h, attrs, [2])
    assert scores.shape == (1,)
    assert scores[0] == pytest.approx(0.0, abs=1e-12)


def test_compat_log_scores_equal_attrs_split_evenly():
    rng, _, model = _small_setup()
    attrs = AttributeTable({0: np.ones(3), 1: np.ones(3)})
    scores = compat_log_scores(model, rng.normal(size=3), attrs, [0, 1])
    np.testing.assert_allclose(scores, math.log(0.5), atol=1e-12)


def test_compat_log_scores_against_straight_line_oracle():
    rng, attrs, model = _small_setup(seed=7)
    h = rng.normal(size=3)
    cands = [3, 0, 2, 1]
    got = compat_log_scores(model, h, attrs, cands)

    # independent scalar-by-scalar evaluation
    z1 = [max(0.0, sum(model.W1[i, j] * h[j] for j in range(3))) for i in range(4)]
    z2 = [max(0.0, sum(model.W2[i, j] * z1[j] for j in range(4))) for i in range(3)]
    raw = [sum(attrs[c][i] * z2[i] for i in range(3)) for c in cands]
    denom = math.log(sum(math.exp(r) for r in raw))
    want = [r - denom for r in raw]
    np.testing.assert_allclose(got, want, atol=1e-9)
    assert math.fsum(math.exp(s) for s in got) == pytest.approx(1.0, abs=1e-9)


def test_compat_log_scores_shift_invariant_under_candidate_permutation():
    rng, attrs, model = _small_setup(seed=2)
    h = rng.normal(size=3)
    base = compat_log_scores(model, h, attrs, [0, 1, 2, 3])
    perm = compat_log_scores(model, h, attrs, [2, 0, 3, 1])
    np.testing.assert_allclose(perm, base[[2, 0, 3, 1]], atol=1e-12)


def test_train_compat_zero_epochs_is_identity():
    rng, attrs, model = _small_setup()
    X = rng.normal(size=(10, 3))
    y = rng.integers(0, 4, size=10)
    out, trace = train_compat(model, X, y, attrs, [0, 1, 2, 3], TrainConfig(epochs=0))
    np.testing.assert_array_equal(out.W1, model.W1)
    np.testing.assert_array_equal(out.W2, model.W2)
    assert trace == []


def test_train_compat_loss_trend_down():
    rng = np.random.default_rng(4)
    centers = rng.normal(size=(3, 6)) * 3
    attrs = AttributeTable({i: rng.normal(size=4) for i in range(3)})
    X = np.vstack([centers[i] + 0.3 * rng.normal(size=(40, 6)) for i in range(3)])
    y = np.repeat([0, 1, 2], 40)
    model = init_compat(6, 8, 4, seed=0)
    _, trace = train_compat(model, X, y, attrs, [0, 1, 2],
                            TrainConfig(learning_rate=0.1, epochs=15, seed=0))
    # average over a 5-epoch window must decrease
    assert np.mean(trace[-5:]) < np.mean(trace[:5])


def test_train_compat_gradients_match_finite_differences():
    rng, attrs, model = _small_setup(seed=9)
    X = rng.normal(size=(6, 3))
    y = rng.integers(0, 4, size=6)
    class_ids = [0, 1, 2, 3]
    A = attrs.matrix(class_ids)

    def loss(W1, W2):
        z1 = np.maximum(X @ W1.T, 0.0)
        e = np.maximum(z1 @ W2.T, 0.0)
        raw = e @ A.T
        lse = np.log(np.exp(raw).sum(axis=1))
        return float(np.mean(lse - raw[np.arange(6), y]))

    # analytic gradient from one full-batch step with lr 1
    cfg = TrainConfig(learning_rate=1.0, epochs=1, batch_size=6, seed=0)
    stepped, _ = train_compat(model, X, y, attrs, class_ids, cfg)
    gW1 = model.W1 - stepped.W1
    gW2 = model.W2 - stepped.W2

    eps = 1e-6
    for G, W, which in ((gW1, model.W1, "W1"), (gW2, model.W2, "W2")):
        fd = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += eps
            Wm[idx] -= eps
            if which == "W1":
                fd[idx] = (loss(Wp, model.W2) - loss(Wm, model.W2)) / (2 * eps)
            else:
                fd[idx] = (loss(model.W1, Wp) - loss(model.W1, Wm)) / (2 * eps)
        scale = max(np.abs(G).max(), np.abs(fd).max(), 1e-12)
        assert np.abs(G - fd).max() / scale < 1e-4


# ---------------------------------------------------------------------------
# convex-combination embedding


def test_conse_embed_point_mass():
    _, attrs, _ = _small_setup()
    probs = np.array([0.0, 1.0, 0.0, 0.0])
    out = conse_embed(probs, np.array([0, 1, 2, 3]), attrs, m=3)
    np.testing.assert_allclose(out, attrs[1], atol=1e-12)


def test_conse_embed_uniform_full_m_is_mean():
    _, attrs, _ = _small_setup()
    probs = np.full(4, 0.25)
    out = conse_embed(probs, np.array([0, 1, 2, 3]), attrs, m=4)
    np.testing.assert_allclose(out, attrs.matrix([0, 1, 2, 3]).mean(axis=0), atol=1e-12)


def test_conse_embed_two_class_arithmetic():
    _, attrs, _ = _small_setup()
    probs = np.array([0.6, 0.2, 0.15, 0.05])
    out = conse_embed(probs, np.array([0, 1, 2, 3]), attrs, m=2)
    want = (0.6 * attrs[0] + 0.2 * attrs[1]) / 0.8
    np.testing.assert_allclose(out, want, atol=1e-12)


def test_conse_embed_convex_hull_property():
    rng, attrs, _ = _small_setup(seed=5)
    for _ in range(20):
        raw = rng.uniform(size=4)
        probs = raw / raw.sum()
        m = int(rng.integers(1, 5))
        top = np.argsort(-probs, kind="stable")[:m]
        coeffs = probs[top] / probs[top].sum()
        assert np.all(coeffs >= 0)
        assert coeffs.sum() == pytest.approx(1.0, abs=1e-12)
        out = conse_embed(probs, np.array([0, 1, 2, 3]), attrs, m=m)
        want = coeffs @ attrs.matrix(top)
        np.testing.assert_allclose(out, want, atol=1e-12)


def test_conse_embed_ties_prefer_smaller_id():
    attrs = AttributeTable({0: np.array([1.0, 0.0]), 1: np.array([0.0, 1.0])})
    probs = np.array([0.5, 0.5])
    out = conse_embed(probs, np.array([0, 1]), attrs, m=1)
    np.testing.assert_array_equal(out, attrs[0])


def test_conse_embed_m_out_of_range():
    _, attrs, _ = _small_setup()
    with pytest.raises(errors.ConfigInvalid):
        conse_embed(np.full(4, 0.25), np.array([0, 1, 2, 3]), attrs, m=5)


# ---------------------------------------------------------------------------
# predictors


def test_predicts_singleton_candidates():
    rng, attrs, model = _small_setup()
    h = rng.normal(size=3)
    assert devise_predict(model, h, attrs, [3]) == 3


def test_conse_predict_point_mass_recovers_class():
    X, y = _two_gaussians(n_per=50, seed=2)
    head, _ = train_softmax_head(X, y, [5, 9], TrainConfig(epochs=20, seed=0))
    rng = np.random.default_rng(0)
    attrs = AttributeTable({5: rng.normal(size=4), 9: rng.normal(size=4)})
    # instance deep inside class 5's cluster: head prob ~ 1 on 5
    h = np.array([-3.0, 0.0])
    assert conse_predict(head, h, attrs, ConseConfig(m=1), [5, 9]) == 5


def test_predicts_match_exhaustive_scan():
    rng, attrs, model = _small_setup(seed=13)
    X, y = _two_gaussians(n_per=30, seed=3)
    head, _ = train_softmax_head(X[:, :2], y, [5, 9], TrainConfig(epochs=5, seed=0))
    attrs59 = AttributeTable({5: rng.normal(size=4), 9: rng.normal(size=4),
                              7: rng.normal(size=4)})
    cands = [9, 5, 7]
    for i in range(10):
        h = rng.normal(size=3)
        scores = compat_log_scores(model, h, attrs, [0, 1, 2, 3])
        want = min((c for c in [0, 1, 2, 3]),
                   key=lambda c: (-scores[[0, 1, 2, 3].index(c)], c))
        assert devise_predict(model, h, attrs, [0, 1, 2, 3]) == want

        h2 = X[i, :2]
        got = conse_predict(head, h2, attrs59, ConseConfig(m=2), cands)
        from hzsl.zsl import conse_cosines
        cos = conse_cosines(head, h2, attrs59, ConseConfig(m=2), sorted(cands))
        want2 = sorted(cands)[int(np.argmax(cos))]
        assert got == want2
