"""Depth scoring against a naive per-pixel loop oracle and hand-computed cases."""

import numpy as np
import pytest

from corrbench.depthmetrics import (
    DepthMap,
    DepthScores,
    EvalProtocol,
    aggregate_set,
    compute_scores,
    dee,
)
from corrbench.errors import (
    EmptyEvaluationError,
    InvalidDepthError,
    InvalidParameterError,
)

FULL_RANGE = EvalProtocol(min_depth=1e-3, max_depth=100.0, crop=None,
                          median_scaling=False)


def scores_oracle(pred, gt_vals, gt_valid, proto):
    """Independent re-implementation: plain loops, no vectorization."""
    h, w = gt_vals.shape
    if proto.crop is None:
        top, bottom, left, right = 0, h, 0, w
    else:
        top = int(proto.crop[0] * h)
        bottom = int(proto.crop[1] * h)
        left = int(proto.crop[2] * w)
        right = int(proto.crop[3] * w)
    g, p = [], []
    for y in range(h):
        for x in range(w):
            if not gt_valid[y, x]:
                continue
            if not (proto.min_depth <= gt_vals[y, x] <= proto.max_depth):
                continue
            if not (top <= y < bottom and left <= x < right):
                continue
            g.append(gt_vals[y, x])
            p.append(pred[y, x])
    if not g:
        raise EmptyEvaluationError("oracle: nothing to score")
    if proto.median_scaling:
        ratio = float(np.median(g)) / float(np.median(p))
        p = [v * ratio for v in p]
    p = [min(max(v, proto.min_depth), proto.max_depth) for v in p]

    n = len(g)
    abs_rel = sum(abs(gi - pi) / gi for gi, pi in zip(g, p)) / n
    sq_rel = sum((gi - pi) ** 2 / gi for gi, pi in zip(g, p)) / n
    rmse = (sum((gi - pi) ** 2 for gi, pi in zip(g, p)) / n) ** 0.5
    rmse_log = (sum((np.log(gi) - np.log(pi)) ** 2 for gi, pi in zip(g, p)) / n) ** 0.5
    d1 = sum(max(pi / gi, gi / pi) < 1.25 for gi, pi in zip(g, p)) / n
    d2 = sum(max(pi / gi, gi / pi) < 1.25 ** 2 for gi, pi in zip(g, p)) / n
    d3 = sum(max(pi / gi, gi / pi) < 1.25 ** 3 for gi, pi in zip(g, p)) / n
    return DepthScores(abs_rel, sq_rel, rmse, rmse_log, d1, d2, d3)


class TestDee:
    def test_formula_anchors(self):
        # reproduced clean scores and their composite values
        assert abs(dee(0.115, 0.877) - 0.119) < 1e-12
        assert abs(dee(0.099, 0.900) - 0.0995) < 1e-12
        assert dee(0.0, 1.0) == 0.0

    def test_monotone_in_both_arguments(self):
        base = dee(0.2, 0.8)
        assert dee(0.25, 0.8) > base
        assert dee(0.2, 0.85) < base

    def test_can_exceed_one_for_pathological_abs_rel(self):
        assert dee(1.5, 0.0) > 1.0

    def test_domain_validation(self):
        with pytest.raises(InvalidParameterError):
            dee(-0.1, 0.5)
        with pytest.raises(InvalidParameterError):
            dee(0.1, 1.5)


class TestComputeScores:
    def test_perfect_prediction(self):
        vals = np.full((8, 8), 5.0)
        s = compute_scores(DepthMap(vals.copy()), DepthMap(vals.copy()), FULL_RANGE)
        assert s.abs_rel == 0 and s.sq_rel == 0 and s.rmse == 0
        assert s.d1 == s.d2 == s.d3 == 1.0
        assert s.dee == 0.0

    def test_four_pixel_hand_oracle(self):
        gt = np.array([[1.0, 2.0], [4.0, 8.0]])
        pred = np.array([[1.1, 1.8], [4.4, 8.0]])
        s = compute_scores(DepthMap(pred), DepthMap(gt), FULL_RANGE)
        assert abs(s.abs_rel - 0.075) < 1e-12
        assert s.d1 == 1.0
        assert abs(s.dee - 0.0375) < 1e-12
        assert abs(s.sq_rel - np.mean([0.01, 0.02, 0.04, 0.0])) < 1e-12
        assert abs(s.rmse - np.sqrt(np.mean([0.01, 0.04, 0.16, 0.0]))) < 1e-12

    @pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
    def test_median_scaling_invariance(self, c):
        gt = np.abs(np.random.default_rng(0).normal(10, 3, (16, 16))) + 1.0
        proto = EvalProtocol(min_depth=1e-3, max_depth=100.0, crop=None,
                             median_scaling=True)
        s = compute_scores(DepthMap(gt * c), DepthMap(gt.copy()), proto)
        assert s.dee < 1e-12
        assert s.abs_rel < 1e-12

    def test_matches_loop_oracle_with_full_protocol(self):
        rng = np.random.default_rng(42)
        proto = EvalProtocol(min_depth=2.0, max_depth=30.0,
                             crop=(0.25, 0.9, 0.1, 0.95), median_scaling=True)
        for trial in range(20):
            gt_vals = rng.uniform(0.5, 40.0, (16, 16))
            valid = rng.uniform(size=(16, 16)) > 0.3
            valid[0, 0] = True
            gt_vals[~valid] = 1.0
            pred = gt_vals * rng.uniform(0.7, 1.4, (16, 16)) + rng.uniform(0, 0.5)
            got = compute_scores(DepthMap(pred.copy()),
                                 DepthMap(gt_vals.copy(), valid.copy()), proto)
            want = scores_oracle(pred, gt_vals, valid, proto)
            for name in ("abs_rel", "sq_rel", "rmse", "rmse_log", "d1", "d2", "d3", "dee"):
                assert abs(getattr(got, name) - getattr(want, name)) < 1e-9, name

    def test_delta_ordering(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            gt = rng.uniform(1, 50, (12, 12))
            pred = gt * rng.uniform(0.5, 2.0, (12, 12))
            s = compute_scores(DepthMap(pred), DepthMap(gt), FULL_RANGE)
            assert s.d1 <= s.d2 <= s.d3

    def test_prediction_resized_to_gt(self):
        gt = np.full((16, 16), 10.0)
        pred = np.full((8, 8), 10.0)
        s = compute_scores(DepthMap(pred), DepthMap(gt), FULL_RANGE)
        assert s.dee == 0.0

    def test_no_valid_pixels(self):
        gt = DepthMap(np.full((8, 8), 200.0))  # beyond max_depth
        pred = DepthMap(np.full((8, 8), 10.0))
        with pytest.raises(EmptyEvaluationError):
            compute_scores(pred, gt, EvalProtocol(1e-3, 80.0, None, False))

    def test_invalid_depth_rejected(self):
        with pytest.raises(InvalidDepthError):
            DepthMap(np.zeros((4, 4)))

    def test_kitti_profile_defaults(self):
        proto = EvalProtocol.kitti()
        assert proto.max_depth == 80.0 and proto.median_scaling
        assert proto.crop == (0.4081, 0.9919, 0.0352, 0.9648)
        nyu = EvalProtocol.nyu()
        assert nyu.max_depth == 10.0 and not nyu.median_scaling


class TestAggregate:
    def test_singleton(self):
        s = DepthScores(0.1, 0.2, 1.0, 0.1, 0.9, 0.95, 0.99)
        agg = aggregate_set([s])
        assert agg == s

    def test_mean_of_identical(self):
        s = DepthScores(0.1, 0.2, 1.0, 0.1, 0.9, 0.95, 0.99)
        agg = aggregate_set([s, DepthScores(**{k: getattr(s, k) for k in
                                               ("abs_rel", "sq_rel", "rmse", "rmse_log",
                                                "d1", "d2", "d3")})])
        assert agg.abs_rel == s.abs_rel and agg.dee == s.dee

    def test_arithmetic_oracle(self):
        a = DepthScores(0.1, 0.0, 0.0, 0.0, 0.9, 0.95, 0.99)
        b = DepthScores(0.3, 0.0, 0.0, 0.0, 0.7, 0.8, 0.9)
        agg = aggregate_set([a, b])
        assert abs(agg.abs_rel - 0.2) < 1e-12
        assert abs(agg.d1 - 0.8) < 1e-12
        # composite recomputed from the averaged components
        assert abs(agg.dee - dee(0.2, 0.8)) < 1e-12
        assert abs(agg.dee - 0.2) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(EmptyEvaluationError):
            aggregate_set([])
