import itertools
import math

import numpy as np
import pytest

from vbll_calib.metrics import (
    PredictionSet,
    auc_roc,
    brier,
    classification_report,
    ece,
    full_report,
    nll,
    reliability_bins,
)

# ---------------------------------------------------------------------------
# Independent brute-force reimplementations, kept deliberately naive.

LOG_EPS = 1e-12


def bf_classification_report(p, y, threshold=0.5):
    yhat = [1 if pi >= threshold else 0 for pi in p]
    correct = sum(1 for a, b in zip(yhat, y) if a == b)
    tp = sum(1 for a, b in zip(yhat, y) if a == 1 and b == 1)
    fp = sum(1 for a, b in zip(yhat, y) if a == 1 and b == 0)
    fn = sum(1 for a, b in zip(yhat, y) if a == 0 and b == 1)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return correct / len(y), prec, rec, f1


def bf_auc(p, y):
    """Pairwise win counting; ties count as half a win."""
    pos = [pi for pi, yi in zip(p, y) if yi == 1]
    neg = [pi for pi, yi in zip(p, y) if yi == 0]
    wins = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                wins += 1.0
            elif a == b:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def bf_nll(p, y):
    total = 0.0
    for pi, yi in zip(p, y):
        pi = min(max(pi, LOG_EPS), 1 - LOG_EPS)
        total += -math.log(pi) if yi == 1 else -math.log(1 - pi)
    return total / len(y)


def bf_brier(p, y):
    return sum((pi - yi) ** 2 for pi, yi in zip(p, y)) / len(y)


def bf_ece(p, y, n_bins, weighting):
    buckets = {}
    for pi, yi in zip(p, y):
        b = min(int(pi * n_bins), n_bins - 1)
        buckets.setdefault(b, []).append((pi, yi))
    gaps, weights = [], []
    for members in buckets.values():
        conf = sum(m[0] for m in members) / len(members)
        acc = sum(m[1] for m in members) / len(members)
        gaps.append(abs(acc - conf))
        weights.append(len(members) / len(y))
    if weighting == "mass_weighted":
        return sum(g * w for g, w in zip(gaps, weights))
    return sum(gaps) / len(gaps)


def _grid_cases():
    """Exhaustive for N <= 3 on the coarse probability grid, sampled beyond."""
    grid = [round(0.1 * k, 1) for k in range(11)]
    cases = []
    for n in (1, 2, 3):
        for p in itertools.product(grid, repeat=n):
            for y in itertools.product((0, 1), repeat=n):
                cases.append((list(p), list(y)))
    rng = np.random.default_rng(0)
    for n in (4, 5, 6):
        for _ in range(400):
            p = [grid[i] for i in rng.integers(0, 11, n)]
            y = list(rng.integers(0, 2, n))
            cases.append((p, y))
    return cases


GRID_CASES = _grid_cases()


class TestBruteForceOracles:
    def test_exhaustive_grid(self):
        for p, y in GRID_CASES:
            pred = PredictionSet(p_pos=np.array(p, dtype=float),
                                 y=np.array(y, dtype=int))
            assert classification_report(pred) == pytest.approx(
                bf_classification_report(p, y), abs=1e-12
            )
            assert nll(pred) == pytest.approx(bf_nll(p, y), abs=1e-12)
            assert brier(pred) == pytest.approx(bf_brier(p, y), abs=1e-12)
            for weighting in ("mass_weighted", "bin_mean"):
                assert ece(pred, 40, weighting) == pytest.approx(
                    bf_ece(p, y, 40, weighting), abs=1e-12
                )
            if 0 < sum(y) < len(y):
                assert auc_roc(pred) == pytest.approx(bf_auc(p, y), abs=1e-12)


class TestClassificationReport:
    def test_perfect(self):
        pred = PredictionSet(np.array([0.9, 0.1]), np.array([1, 0]))
        assert classification_report(pred) == (1.0, 1.0, 1.0, 1.0)

    def test_hand_confusion(self):
        pred = PredictionSet(np.array([0.9, 0.9]), np.array([1, 0]))
        acc, prec, rec, f1 = classification_report(pred)
        assert acc == 0.5
        assert prec == 0.5
        assert rec == 1.0
        assert f1 == pytest.approx(2 / 3)

    def test_zero_division_rule(self):
        pred = PredictionSet(np.array([0.1, 0.2]), np.array([1, 1]))
        acc, prec, rec, f1 = classification_report(pred)
        assert prec == 0.0
        assert f1 == 0.0

    def test_accuracy_is_one_minus_hamming(self):
        rng = np.random.default_rng(1)
        p = rng.uniform(0, 1, 50)
        y = rng.integers(0, 2, 50)
        pred = PredictionSet(p, y)
        acc = classification_report(pred)[0]
        hamming = np.mean((p >= 0.5).astype(int) != y)
        assert acc == pytest.approx(1 - hamming, abs=1e-15)


class TestAuc:
    def test_perfect_separation(self):
        pred = PredictionSet(np.array([0.1, 0.2, 0.8, 0.9]),
                             np.array([0, 0, 1, 1]))
        assert auc_roc(pred) == 1.0

    def test_all_tied(self):
        pred = PredictionSet(np.full(6, 0.5), np.array([0, 1, 0, 1, 0, 1]))
        assert auc_roc(pred) == 0.5

    def test_hand_case(self):
        pred = PredictionSet(np.array([0.1, 0.4, 0.35, 0.8]),
                             np.array([0, 0, 1, 1]))
        assert auc_roc(pred) == pytest.approx(0.75)

    def test_single_class_error(self):
        with pytest.raises(ValueError):
            auc_roc(PredictionSet(np.array([0.1, 0.2]), np.array([1, 1])))

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        p = rng.uniform(0.01, 0.99, 30)
        y = rng.integers(0, 2, 30)
        y[0], y[1] = 0, 1
        a = auc_roc(PredictionSet(p, y))
        b = auc_roc(PredictionSet(p**3, y))  # strictly increasing on [0,1]
        assert a == b


class TestNll:
    def test_certain_correct(self):
        pred = PredictionSet(np.array([1.0]), np.array([1]))
        assert nll(pred) < 1e-11

    def test_coin_flip(self):
        pred = PredictionSet(np.array([0.5, 0.5]), np.array([0, 1]))
        assert nll(pred) == pytest.approx(np.log(2))

    def test_hand_case(self):
        pred = PredictionSet(np.array([0.8, 0.4]), np.array([1, 0]))
        expected = (-np.log(0.8) - np.log(0.6)) / 2
        assert nll(pred) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.36698, abs=1e-5)

    def test_non_negative(self):
        rng = np.random.default_rng(4)
        pred = PredictionSet(rng.uniform(0, 1, 40), rng.integers(0, 2, 40))
        assert nll(pred) >= 0.0


class TestBrier:
    def test_exact_match(self):
        pred = PredictionSet(np.array([0.0, 1.0]), np.array([0, 1]))
        assert brier(pred) == 0.0

    def test_single_value(self):
        pred = PredictionSet(np.array([0.7]), np.array([1]))
        assert brier(pred) == pytest.approx(0.09)

    def test_hand_case(self):
        pred = PredictionSet(np.array([0.7, 0.2]), np.array([1, 0]))
        assert brier(pred) == pytest.approx(0.065)


class TestEce:
    def test_perfectly_calibrated(self):
        pred = PredictionSet(np.ones(4), np.ones(4, dtype=int))
        assert ece(pred, 40, "mass_weighted") == 0.0
        assert ece(pred, 40, "bin_mean") == 0.0

    def test_single_bin(self):
        pred = PredictionSet(np.full(4, 0.9), np.array([1, 1, 1, 0]))
        assert ece(pred, 40, "mass_weighted") == pytest.approx(0.15)
        assert ece(pred, 40, "bin_mean") == pytest.approx(0.15)

    def test_two_singleton_bins(self):
        pred = PredictionSet(np.array([0.2, 0.9]), np.array([0, 1]))
        assert ece(pred, 40, "mass_weighted") == pytest.approx(0.15)
        assert ece(pred, 40, "bin_mean") == pytest.approx(0.15)

    def test_zero_bins_rejected(self):
        pred = PredictionSet(np.array([0.5]), np.array([1]))
        with pytest.raises(ValueError):
            ece(pred, 0)

    def test_bounds_and_permutation_invariance(self):
        rng = np.random.default_rng(5)
        p = rng.uniform(0, 1, 60)
        y = rng.integers(0, 2, 60)
        base = ece(PredictionSet(p, y), 40, "mass_weighted")
        assert 0.0 <= base <= 1.0
        perm = rng.permutation(60)
        assert ece(PredictionSet(p[perm], y[perm]), 40, "mass_weighted") == \
            pytest.approx(base, abs=1e-15)


class TestReliabilityBins:
    def test_single_point(self):
        bins = reliability_bins(PredictionSet(np.array([0.5]), np.array([1])), 40)
        assert bins.count.sum() == 1
        assert (bins.count > 0).sum() == 1

    def test_counts_partition(self):
        rng = np.random.default_rng(6)
        p = rng.uniform(0, 1, 100)
        y = rng.integers(0, 2, 100)
        bins = reliability_bins(PredictionSet(p, y), 40)
        assert bins.count.sum() == 100
        np.testing.assert_allclose(bins.upper - bins.lower, 1 / 40)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        pred = PredictionSet(rng.uniform(0, 1, 30), rng.integers(0, 2, 30))
        a = reliability_bins(pred, 40)
        b = reliability_bins(pred, 40)
        np.testing.assert_array_equal(a.count, b.count)
        np.testing.assert_array_equal(
            np.nan_to_num(a.confidence), np.nan_to_num(b.confidence)
        )

    def test_csv_empty_bins_blank(self, tmp_path):
        pred = PredictionSet(np.array([0.5]), np.array([1]))
        bins = reliability_bins(pred, 4)
        path = tmp_path / "b.csv"
        bins.to_csv(path)
        lines = path.read_text().splitlines()
        assert len(lines) == 5
        assert lines[1].endswith(",0,,")  # empty bin carries no conf/acc


class TestFullReport:
    def test_ranges(self):
        rng = np.random.default_rng(8)
        pred = PredictionSet(rng.uniform(0, 1, 80), rng.integers(0, 2, 80))
        r = full_report(pred)
        for v in (r.accuracy, r.precision, r.recall, r.f1, r.auc_roc,
                  r.ece, r.ece_bin_mean, r.brier):
            assert 0.0 <= v <= 1.0
        assert r.nll >= 0.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            PredictionSet(np.array([1.2]), np.array([1]))
        with pytest.raises(ValueError):
            PredictionSet(np.array([0.5]), np.array([2]))
        with pytest.raises(ValueError):
            PredictionSet(np.array([np.nan]), np.array([0]))
