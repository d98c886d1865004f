"""Metrics, cross-validation, feature reduction, and tuning.

scipy and scikit-learn act as oracles for the statistics; the package
itself never imports them.
"""

import csv
import math

import numpy as np
import pytest

from rumourlens.learn import Hyperparams
from rumourlens.select import (CVResult, Metrics, PCAResult, SelectError,
                               SelectionTrace, anova_f, auc_score,
                               compute_metrics, default_grid, fit_model,
                               kfold_cv, pca, reduce_features,
                               stratified_folds, tune, write_cv_report,
                               write_trace_csv)


def planted(n=60, m=4, seed=0, noise=0.05):
    """Random features with column 1 carrying the label."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    y = (np.arange(n) % 2).astype(np.int64)
    X[:, 1] = y + noise * rng.normal(size=n)
    return X, y


# --- metrics -----------------------------------------------------------------

def test_perfect_predictions():
    y = np.array([1, 0, 1, 1, 0])
    m = compute_metrics(y, y, y.astype(float))
    assert m.accuracy == 1.0
    assert m.kappa == 1.0
    assert m.f1 == 1.0
    assert m.auc == 1.0


def test_published_confusion_matrix_row():
    # TP=16, FP=0, FN=1, TN=12
    y_true = [1] * 17 + [0] * 12
    y_pred = [1] * 16 + [0] + [0] * 12
    m = compute_metrics(y_true, y_pred, [float(p) for p in y_pred])
    assert m.accuracy == pytest.approx(0.966, abs=1e-3)
    assert m.precision == pytest.approx(1.0, abs=1e-3)
    assert m.recall == pytest.approx(0.941, abs=1e-3)
    assert m.f1 == pytest.approx(0.970, abs=1e-3)


def test_constant_classifier_kappa_zero():
    y_true = [1, 0, 1, 0]
    y_pred = [1, 1, 1, 1]
    m = compute_metrics(y_true, y_pred, [1.0] * 4)
    assert m.kappa == 0.0
    assert m.recall == 1.0
    assert m.precision == 0.5


def test_zero_denominator_conventions():
    m = compute_metrics([1, 1, 0], [0, 0, 0], [0.2, 0.3, 0.1])
    assert m.precision == 0.0   # no positive predictions
    assert m.f1 == 0.0
    m = compute_metrics([0, 0], [1, 0], [0.9, 0.1])
    assert m.recall == 0.0      # no positive labels
    assert m.auc is None


def test_metrics_match_sklearn_on_random_confusions():
    from sklearn.metrics import (accuracy_score, cohen_kappa_score, f1_score,
                                 precision_score, recall_score)

    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(5, 40))
        y_true = rng.integers(0, 2, size=n)
        y_pred = rng.integers(0, 2, size=n)
        if len(set(y_true)) < 2 or len(set(y_pred)) < 2:
            continue
        m = compute_metrics(y_true, y_pred, y_pred.astype(float))
        assert m.accuracy == pytest.approx(accuracy_score(y_true, y_pred))
        assert m.precision == pytest.approx(
            precision_score(y_true, y_pred, zero_division=0))
        assert m.recall == pytest.approx(
            recall_score(y_true, y_pred, zero_division=0))
        assert m.f1 == pytest.approx(f1_score(y_true, y_pred, zero_division=0))
        assert m.kappa == pytest.approx(cohen_kappa_score(y_true, y_pred))


def test_auc_matches_sklearn_with_ties():
    from sklearn.metrics import roc_auc_score

    rng = np.random.default_rng(2)
    for _ in range(25):
        n = int(rng.integers(6, 50))
        y = rng.integers(0, 2, size=n)
        if len(set(y)) < 2:
            continue
        proba = rng.integers(0, 4, size=n) / 4.0  # heavy ties
        assert auc_score(y, proba) == pytest.approx(roc_auc_score(y, proba))


def test_auc_undefined_on_single_class():
    assert auc_score([1, 1, 1], [0.1, 0.5, 0.9]) is None


def test_random_scores_auc_near_half():
    rng = np.random.default_rng(3)
    y = np.array([0, 1] * 1000)
    assert 0.4 <= auc_score(y, rng.random(2000)) <= 0.6


def test_metrics_length_mismatch():
    with pytest.raises(SelectError, match="mismatch"):
        compute_metrics([1, 0], [1], [0.5])
    with pytest.raises(SelectError, match="empty"):
        compute_metrics([], [], [])


# --- folds and cross-validation -------------------------------------------------

def test_folds_partition_and_balance():
    y = np.array([1] * 41 + [0] * 31)
    assignment = stratified_folds(y, 10, seed=4)
    assert assignment.shape == (72,)
    sizes = np.bincount(assignment, minlength=10)
    assert sizes.sum() == 72
    assert sizes.max() - sizes.min() <= 1
    # class counts per fold can differ by at most one as well
    pos = np.bincount(assignment[y == 1], minlength=10)
    assert pos.max() - pos.min() <= 1


def test_folds_deterministic_and_seed_sensitive():
    y = np.array([0, 1] * 20)
    a = stratified_folds(y, 5, seed=7)
    b = stratified_folds(y, 5, seed=7)
    c = stratified_folds(y, 5, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_folds_validation():
    with pytest.raises(SelectError, match=">= 2"):
        stratified_folds([0, 1, 0], 1)
    with pytest.raises(SelectError, match="exceeds"):
        stratified_folds([0, 1], 3)


def test_cv_separable_data_perfect_f1():
    X, y = planted(n=30, m=3, seed=5, noise=0.01)
    result = kfold_cv("cart", Hyperparams(), X, y, k=3, seed=0)
    assert result.mean_f1 == 1.0
    assert len(result.folds) == 3


def test_cv_tests_each_row_once():
    X, y = planted(n=24, m=2, seed=6)
    result = kfold_cv("logreg", None, X, y, k=4, seed=1)
    assert sorted(set(result.assignment)) == [0, 1, 2, 3]
    assert len(result.assignment) == 24


def test_cv_shuffled_labels_near_chance():
    rng = np.random.default_rng(9)
    accs = []
    for seed in range(8):
        X = rng.normal(size=(40, 3))
        y = np.array([0, 1] * 20)
        accs.append(kfold_cv("logreg", None, X, y, k=4, seed=seed)
                    .mean("accuracy"))
    assert 0.35 <= float(np.mean(accs)) <= 0.65


def test_cv_deterministic():
    X, y = planted(n=30, m=3, seed=10)
    a = kfold_cv("rf", Hyperparams(rf_trees=5), X, y, k=3, seed=2)
    b = kfold_cv("rf", Hyperparams(rf_trees=5), X, y, k=3, seed=2)
    assert a == b


# --- ANOVA ----------------------------------------------------------------------

def test_anova_hand_example():
    X = np.array([[1.0], [2.0], [5.0], [6.0]])
    y = np.array([0, 0, 1, 1])
    assert anova_f(X, y)[0] == pytest.approx(32.0)


def test_anova_matches_scipy():
    from scipy.stats import f_oneway

    rng = np.random.default_rng(11)
    X = rng.normal(size=(30, 5))
    y = rng.integers(0, 2, size=30)
    y[0], y[1] = 0, 1
    ours = anova_f(X, y)
    for j in range(5):
        stat = f_oneway(X[y == 0, j], X[y == 1, j]).statistic
        assert ours[j] == pytest.approx(stat)


def test_anova_scale_invariance():
    X = np.array([[1.0], [2.0], [5.0], [6.0]])
    y = np.array([0, 0, 1, 1])
    assert anova_f(X * 37.0, y)[0] == pytest.approx(anova_f(X, y)[0])


def test_anova_degenerate_features():
    X = np.array([[1.0, 3.0], [1.0, 3.0], [2.0, 3.0], [2.0, 3.0]])
    y = np.array([0, 0, 1, 1])
    f = anova_f(X, y)
    assert f[0] == math.inf   # distinct means, zero within-class variance
    assert f[1] == 0.0        # constant feature
    with pytest.raises(SelectError, match="both classes"):
        anova_f(X, np.zeros(4, dtype=int))


# --- PCA -------------------------------------------------------------------------

def test_pca_eigenvalues_and_reconstruction():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(40, 6)) @ rng.normal(size=(6, 6))
    result = pca(X)
    assert all(result.eigenvalues[i] >= result.eigenvalues[i + 1] - 1e-12
               for i in range(5))
    Z = (X - result.means) / result.scales
    back = result.transform(X, 6) @ result.components
    assert np.allclose(back, Z, atol=1e-8)


def test_pca_matches_svd_eigenvalues():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(25, 4))
    result = pca(X)
    Z = (X - result.means) / result.scales
    s = np.linalg.svd(Z, compute_uv=False)
    assert np.allclose(result.eigenvalues, s ** 2 / (25 - 1), atol=1e-10)


def test_pca_sign_convention_reproducible():
    rng = np.random.default_rng(14)
    X = rng.normal(size=(30, 3))
    a = pca(X)
    for row in a.components:
        assert row[np.argmax(np.abs(row))] > 0


def test_pca_transform_shapes():
    X = np.random.default_rng(15).normal(size=(20, 5))
    result = pca(X)
    assert result.transform(X, 2).shape == (20, 2)


# --- reduction methods --------------------------------------------------------------

def test_method_2_selects_planted_feature_first():
    X, y = planted(n=40, m=4, seed=16)
    trace = reduce_features(2, "cart", None, X, y, budget=2, seed=0, k=4)
    assert trace.feature_names[0] == "f1"
    assert trace.method == 2
    assert len(trace.steps) == 2


def test_method_2_first_step_is_single_feature_argmax():
    X, y = planted(n=30, m=4, seed=17, noise=0.4)
    trace = reduce_features(2, "cart", None, X, y, budget=1, seed=3, k=3)
    singles = [kfold_cv("cart", None, X[:, [j]], y, k=3, seed=3).mean_f1
               for j in range(4)]
    assert trace.steps[0].f1_mean == pytest.approx(max(singles))


def test_method_3_pool_is_anova_ranked():
    X, y = planted(n=40, m=5, seed=18)
    trace = reduce_features(3, "cart", None, X, y, budget=2, seed=0, k=4)
    f = anova_f(X, y)
    expected_pool = [f"f{j}" for j in
                     sorted(range(5), key=lambda j: (-f[j], j))]
    assert list(trace.details["pool"]) == expected_pool
    assert trace.feature_names[0] == "f1"


def test_method_1_enumerates_all_triples():
    X, y = planted(n=30, m=5, seed=19)
    trace = reduce_features(1, "cart", None, X, y, budget=4, seed=0, k=3)
    assert trace.details["evaluated_combinations"] == math.comb(5, 3)
    # the winning triple is replayed as the first three steps
    assert [s.step for s in trace.steps] == [1, 2, 3, 4]
    assert "f1" in trace.feature_names[:3]


def test_method_4_components_in_eigenvalue_order():
    X, y = planted(n=40, m=5, seed=20)
    trace = reduce_features(4, "logreg", None, X, y, budget=3, seed=0, k=4)
    assert trace.feature_names == ("pc1", "pc2", "pc3")
    assert [s.chosen for s in trace.steps] == ["pc1", "pc2", "pc3"]
    ev = trace.details["eigenvalues"]
    assert ev == sorted(ev, reverse=True)
    assert len(ev) == 5


def test_budget_respected_and_validated():
    X, y = planted(n=30, m=6, seed=21)
    trace = reduce_features(2, "cart", None, X, y, budget=3, seed=0, k=3)
    assert len(trace.feature_names) == 3
    with pytest.raises(SelectError, match="budget"):
        reduce_features(2, "cart", None, X, y, budget=0, k=3)
    with pytest.raises(SelectError, match="unknown reduction"):
        reduce_features(5, "cart", None, X, y, k=3)


def test_trace_rejects_overlong_step_list():
    steps = tuple(
        __import__("rumourlens.select", fromlist=["SelectionStep"])
        .SelectionStep(step=i, chosen=f"f{i}", f1_mean=0.5, f1_std=0.0)
        for i in range(31))
    with pytest.raises(SelectError, match="budget"):
        SelectionTrace(method=2, steps=steps, feature_names=(), details={})


# --- tuning ----------------------------------------------------------------------

def test_tune_singleton_grid():
    X, y = planted(n=20, m=2, seed=22)
    hp = Hyperparams(rf_trees=7)
    assert tune("rf", [hp], X, y, k=2) is hp


def test_tune_prefers_more_trees_on_noisy_signal():
    X, y = planted(n=60, m=5, seed=23, noise=1.2)
    chosen = tune("rf", [Hyperparams(rf_trees=1), Hyperparams(rf_trees=50)],
                  X, y, k=4, seed=0)
    assert chosen.rf_trees == 50


def test_tune_tie_breaks_to_simpler_model():
    X, y = planted(n=30, m=2, seed=24, noise=0.01)  # trivially separable
    chosen = tune("cart", [Hyperparams(cart_criterion="entropy"),
                           Hyperparams(cart_criterion="gini")], X, y, k=3)
    assert chosen.cart_criterion == "gini"
    chosen = tune("logreg", [Hyperparams(logreg_reg=0.1),
                             Hyperparams(logreg_reg=1.0)], X, y, k=3)
    assert chosen.logreg_reg == 1.0   # stronger regularisation on a tie
    chosen = tune("rf", [Hyperparams(rf_trees=25), Hyperparams(rf_trees=5)],
                  X, y, k=3)
    assert chosen.rf_trees == 5


def test_tune_rejects_empty_grid():
    X, y = planted(n=20, m=2, seed=25)
    with pytest.raises(SelectError, match="empty"):
        tune("cart", [], X, y)


def test_default_grids_valid():
    for family in ("logreg", "cart", "rf", "nb", "svm"):
        grid = default_grid(family)
        assert grid and all(isinstance(hp, Hyperparams) for hp in grid)


# --- standardisation ---------------------------------------------------------------

def test_fit_model_standardises_linear_families_only():
    X, y = planted(n=30, m=3, seed=26)
    assert fit_model("logreg", X, y).scaler is not None
    assert fit_model("svm", X, y).scaler is not None
    assert fit_model("cart", X, y).scaler is None
    assert fit_model("nb", X, y).scaler is None


def test_standardised_fit_invariant_to_affine_rescaling():
    from rumourlens.learn import predict_proba

    X, y = planted(n=40, m=3, seed=27)
    probe = np.random.default_rng(28).normal(size=(10, 3))
    base = fit_model("logreg", X, y, Hyperparams(logreg_reg=0.5))
    scaled = fit_model("logreg", X * 3.0 + 11.0, y, Hyperparams(logreg_reg=0.5))
    assert np.allclose(predict_proba(base, probe),
                       predict_proba(scaled, probe * 3.0 + 11.0), atol=1e-8)


# --- report export -------------------------------------------------------------------

def test_trace_csv_round_trips(tmp_path):
    X, y = planted(n=30, m=3, seed=29)
    trace = reduce_features(2, "cart", None, X, y, budget=2, seed=0, k=3)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(trace.steps)
    assert rows[0]["chosen"] == trace.steps[0].chosen
    assert float(rows[0]["f1_mean"]) == trace.steps[0].f1_mean


def test_cv_report_has_per_fold_and_mean_rows(tmp_path):
    X, y = planted(n=24, m=2, seed=30)
    result = kfold_cv("cart", None, X, y, k=4, seed=0)
    path = tmp_path / "cv.csv"
    write_cv_report(result, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "fold"
    assert len(rows) == 1 + 4 + 1
    assert rows[-1][0] == "mean"
    assert float(rows[-1][4]) == pytest.approx(result.mean("f1"))
