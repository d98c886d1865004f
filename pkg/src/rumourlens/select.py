"""Model assessment: metrics, stratified k-fold CV, feature-space
reduction, and hyperparameter tuning.

The four reduction methods:

1. ANOVA filter to 30, exhaustive 3-subset search over the survivors,
   then greedy forward additions.
2. Pure greedy forward selection over all features.
3. ANOVA filter to 30, then greedy forward selection within the pool.
4. PCA on standardised features, components added in descending-eigenvalue
   order.

Every step is scored by cross-validated mean F1 and recorded in a trace.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .learn import Hyperparams, LearnError, TrainedModel, canonical_family, \
    predict_proba, train

SELECTION_BUDGET = 30

# families whose inputs are standardised with train-fold statistics; trees
# consume raw values
STANDARDISED_FAMILIES = ("logreg", "svm")


class SelectError(ValueError):
    """Raised on invalid selection or CV configuration."""


# --- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: Optional[float]   # None when only one true class is present
    kappa: float

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "auc": self.auc,
                "kappa": self.kappa}


def _rankdata(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_score(y_true: np.ndarray, y_proba: np.ndarray) -> Optional[float]:
    """Rank-statistic AUC; undefined (None) when a class is absent."""
    y_true = np.asarray(y_true)
    n1 = int(np.sum(y_true == 1))
    n0 = int(np.sum(y_true == 0))
    if n1 == 0 or n0 == 0:
        return None
    ranks = _rankdata(np.asarray(y_proba, dtype=np.float64))
    pos_rank_sum = float(ranks[y_true == 1].sum())
    return (pos_rank_sum - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def compute_metrics(y_true, y_pred, y_proba) -> Metrics:
    """Standard binary metrics with positive class = true rumour.

    Precision/recall/F1 fall back to 0 when their denominator is empty.
    Degenerate kappa (chance agreement 1) reports 1 for perfect agreement,
    0 otherwise.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    y_proba = np.asarray(y_proba, dtype=np.float64)
    if not (len(y_true) == len(y_pred) == len(y_proba)):
        raise SelectError("y_true, y_pred, y_proba length mismatch")
    n = len(y_true)
    if n == 0:
        raise SelectError("empty evaluation set")

    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))

    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)

    pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n)
    if abs(1.0 - pe) < 1e-12:
        kappa = 1.0 if accuracy == 1.0 else 0.0
    else:
        kappa = (accuracy - pe) / (1.0 - pe)

    return Metrics(accuracy=accuracy, precision=precision, recall=recall,
                   f1=f1, auc=auc_score(y_true, y_proba), kappa=kappa)


# --- cross-validation ----------------------------------------------------------

def stratified_folds(y, k: int, seed: int = 0) -> np.ndarray:
    """Fold id per row. Each class is shuffled then dealt to the currently
    least-loaded fold, so overall fold sizes differ by at most one while
    preserving the class ratio as far as integer counts allow."""
    if k < 2:
        raise SelectError("k must be >= 2")
    y = np.asarray(y)
    if k > len(y):
        raise SelectError("k exceeds the number of rows")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    loads = np.zeros(k, dtype=np.int64)
    for cls in sorted(np.unique(y)):
        idx = np.flatnonzero(y == cls)
        for row in rng.permutation(idx):
            fold = int(np.argmin(loads))   # ties -> lowest fold id
            assignment[row] = fold
            loads[fold] += 1
    return assignment


@dataclass(frozen=True)
class CVResult:
    folds: tuple[Metrics, ...]
    assignment: tuple[int, ...]

    def mean(self, metric: str) -> Optional[float]:
        vals = [getattr(m, metric) for m in self.folds]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None

    def std(self, metric: str) -> Optional[float]:
        vals = [getattr(m, metric) for m in self.folds]
        vals = [v for v in vals if v is not None]
        return float(np.std(vals)) if vals else None

    @property
    def mean_f1(self) -> float:
        return self.mean("f1") or 0.0


def standardiser(X_train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(means, scales) from the training rows; constant columns scale by 1."""
    means = X_train.mean(axis=0)
    scales = X_train.std(axis=0)
    scales[scales == 0.0] = 1.0
    return means, scales


def fit_model(family: str, X, y, hp: Optional[Hyperparams] = None,
              seed: int = 0, feature_names: Optional[Sequence[str]] = None,
              catalog_version: str = "unversioned",
              standardise: Optional[bool] = None) -> TrainedModel:
    """Train with optional input standardisation folded into the model."""
    family = canonical_family(family)
    if standardise is None:
        standardise = family in STANDARDISED_FAMILIES
    X = np.asarray(X, dtype=np.float64)
    if standardise:
        means, scales = standardiser(X)
        model = train(family, (X - means) / scales, y, hp, seed,
                      feature_names, catalog_version)
        return model.with_scaler(means, scales)
    return train(family, X, y, hp, seed, feature_names, catalog_version)


def kfold_cv(family: str, hp: Optional[Hyperparams], X, y, k: int = 10,
             seed: int = 0,
             feature_names: Optional[Sequence[str]] = None) -> CVResult:
    """Each row tested exactly once; per-fold training excludes the fold.

    Rows of a class rarer than the fold count can leave a training fold
    single-class, which surfaces as a training error rather than a silent
    skip.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    assignment = stratified_folds(y, k, seed)
    fold_metrics = []
    for fold in range(k):
        test = assignment == fold
        train_rows = ~test
        model = fit_model(family, X[train_rows], y[train_rows], hp, seed,
                          feature_names)
        proba = predict_proba(model, X[test])
        pred = (proba >= 0.5).astype(np.int64)
        fold_metrics.append(compute_metrics(y[test], pred, proba))
    return CVResult(folds=tuple(fold_metrics), assignment=tuple(assignment))


# --- ANOVA filter ----------------------------------------------------------

def anova_f(X, y) -> np.ndarray:
    """One-way F statistic per feature between the two class samples.

    Zero within-class variance with distinct class means reports +inf;
    fully constant features report 0.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        raise SelectError("both classes required for the F statistic")
    n = X.shape[0]
    overall = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    for cls in classes:
        rows = X[y == cls]
        ssb += rows.shape[0] * (rows.mean(axis=0) - overall) ** 2
        ssw += ((rows - rows.mean(axis=0)) ** 2).sum(axis=0)
    msb = ssb / (len(classes) - 1)
    msw = ssw / (n - len(classes))
    out = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        if msw[j] > 0:
            out[j] = msb[j] / msw[j]
        else:
            out[j] = np.inf if msb[j] > 0 else 0.0
    return out


def _anova_pool(X, y, size: int) -> list[int]:
    """Indices of the top-scoring features, descending F, ties by index."""
    f = anova_f(X, y)
    order = sorted(range(X.shape[1]), key=lambda j: (-f[j], j))
    return order[:size]


# --- PCA ---------------------------------------------------------------------

@dataclass(frozen=True)
class PCAResult:
    means: np.ndarray
    scales: np.ndarray
    components: np.ndarray     # rows = components, descending eigenvalue
    eigenvalues: np.ndarray

    def transform(self, X: np.ndarray, n_components: int) -> np.ndarray:
        Z = (np.asarray(X, dtype=np.float64) - self.means) / self.scales
        return Z @ self.components[:n_components].T


def pca(X) -> PCAResult:
    """Covariance eigendecomposition of standardised features.

    Eigenvector signs are fixed so each component's largest-magnitude
    entry is positive, making the decomposition reproducible.
    """
    X = np.asarray(X, dtype=np.float64)
    means, scales = standardiser(X)
    Z = (X - means) / scales
    cov = (Z.T @ Z) / max(X.shape[0] - 1, 1)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    components = vectors[:, order].T
    for i in range(components.shape[0]):
        lead = np.argmax(np.abs(components[i]))
        if components[i, lead] < 0:
            components[i] = -components[i]
    return PCAResult(means=means, scales=scales, components=components,
                     eigenvalues=eigenvalues)


# --- reduction methods -------------------------------------------------------

@dataclass(frozen=True)
class SelectionStep:
    step: int
    chosen: str
    f1_mean: float
    f1_std: float


@dataclass(frozen=True)
class SelectionTrace:
    method: int
    steps: tuple[SelectionStep, ...]
    feature_names: tuple[str, ...]   # selected, in order (or component ids)
    details: Mapping

    def __post_init__(self) -> None:
        if len(self.steps) > SELECTION_BUDGET:
            raise SelectError("selection trace exceeds the 30-feature budget")


def _cv_f1(family, hp, X, y, cols, k, seed, names) -> tuple[float, float]:
    sub_names = tuple(names[c] for c in cols)
    result = kfold_cv(family, hp, X[:, cols], y, k=k, seed=seed,
                      feature_names=sub_names)
    return result.mean_f1, result.std("f1") or 0.0


def _greedy_forward(family, hp, X, y, pool, start, budget, k, seed, names,
                    trace, start_step):
    """Add the best remaining pool feature by CV-mean F1 until the budget."""
    selected = list(start)
    remaining = [c for c in pool if c not in selected]
    step = start_step
    while remaining and len(selected) < budget:
        best = None
        for cand in remaining:           # ascending index; ties keep first
            f1, f1_std = _cv_f1(family, hp, X, y, selected + [cand], k, seed,
                                names)
            if best is None or f1 > best[0]:
                best = (f1, f1_std, cand)
        f1, f1_std, chosen = best
        selected.append(chosen)
        remaining.remove(chosen)
        trace.append(SelectionStep(step=step, chosen=names[chosen],
                                   f1_mean=f1, f1_std=f1_std))
        step += 1
    return selected


def reduce_features(method: int, family: str, hp: Optional[Hyperparams],
                    X, y, budget: int = SELECTION_BUDGET, seed: int = 0,
                    k: int = 10,
                    feature_names: Optional[Sequence[str]] = None) -> SelectionTrace:
    """Run one reduction method, recording each step's CV-mean F1."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    m = X.shape[1]
    if budget > m and method != 4:
        budget = m
    if budget < 1:
        raise SelectError("budget must be >= 1")
    names = tuple(feature_names) if feature_names is not None \
        else tuple(f"f{i}" for i in range(m))
    family = canonical_family(family)
    trace: list[SelectionStep] = []
    details: dict = {}

    if method == 2:
        selected = _greedy_forward(family, hp, X, y, list(range(m)), [],
                                   budget, k, seed, names, trace, 1)

    elif method == 3:
        pool = _anova_pool(X, y, min(SELECTION_BUDGET, m))
        details["pool"] = [names[c] for c in pool]
        selected = _greedy_forward(family, hp, X, y, pool, [],
                                   min(budget, len(pool)), k, seed, names,
                                   trace, 1)

    elif method == 1:
        pool = _anova_pool(X, y, min(SELECTION_BUDGET, m))
        details["pool"] = [names[c] for c in pool]
        subset_size = min(3, len(pool))
        best_triple = None
        best_f1 = -1.0
        evaluated = 0
        for combo in combinations(sorted(pool), subset_size):
            f1, _ = _cv_f1(family, hp, X, y, list(combo), k, seed, names)
            evaluated += 1
            if f1 > best_f1:
                best_f1 = f1
                best_triple = combo
        details["evaluated_combinations"] = evaluated
        # replay the winning subset as the first trace steps
        prefix: list[int] = []
        for step, col in enumerate(best_triple, start=1):
            prefix.append(col)
            f1, f1_std = _cv_f1(family, hp, X, y, prefix, k, seed, names)
            trace.append(SelectionStep(step=step, chosen=names[col],
                                       f1_mean=f1, f1_std=f1_std))
        selected = _greedy_forward(family, hp, X, y, pool, prefix,
                                   min(budget, len(pool)), k, seed, names,
                                   trace, len(prefix) + 1)

    elif method == 4:
        fitted = pca(X)
        n_pool = min(SELECTION_BUDGET, len(fitted.eigenvalues))
        details["eigenvalues"] = [float(v) for v in fitted.eigenvalues]
        projected = fitted.transform(X, n_pool)
        comp_names = tuple(f"pc{i + 1}" for i in range(n_pool))
        selected = []
        for n_comp in range(1, min(budget, n_pool) + 1):
            result = kfold_cv(family, hp, projected[:, :n_comp], y, k=k,
                              seed=seed, feature_names=comp_names[:n_comp])
            trace.append(SelectionStep(step=n_comp, chosen=comp_names[n_comp - 1],
                                       f1_mean=result.mean_f1,
                                       f1_std=result.std("f1") or 0.0))
            selected.append(n_comp - 1)
        return SelectionTrace(method=4, steps=tuple(trace),
                              feature_names=comp_names[:len(selected)],
                              details=details)

    else:
        raise SelectError(f"unknown reduction method {method!r}")

    return SelectionTrace(method=method, steps=tuple(trace),
                          feature_names=tuple(names[c] for c in selected),
                          details=details)


# --- tuning ----------------------------------------------------------------

def _simplicity(hp: Hyperparams) -> tuple:
    """Sort key favouring the simpler model on F1 ties: fewer trees, gini,
    stronger regularisation."""
    return (hp.rf_trees, 0 if hp.cart_criterion == "gini" else 1,
            -hp.logreg_reg, -hp.svm_reg)


def tune(family: str, grid: Iterable[Hyperparams], X, y, k: int = 10,
         seed: int = 0) -> Hyperparams:
    """Exhaustive grid search by CV-mean F1."""
    grid = list(grid)
    if not grid:
        raise SelectError("empty hyperparameter grid")
    best_hp = None
    best_key = None
    for hp in grid:
        f1 = kfold_cv(family, hp, X, y, k=k, seed=seed).mean_f1
        key = (-f1, _simplicity(hp))
        if best_key is None or key < best_key:
            best_key = key
            best_hp = hp
    return best_hp


def default_grid(family: str) -> list[Hyperparams]:
    """Small exhaustive grids per family, mirroring the tuned parameters:
    regularisation strength, tree count, split criterion."""
    family = canonical_family(family)
    if family == "logreg":
        return [Hyperparams(logreg_reg=r) for r in (0.01, 0.1, 1.0, 10.0)]
    if family == "rf":
        return [Hyperparams(rf_trees=t, cart_criterion=c)
                for t in (25, 50, 100) for c in ("gini", "entropy")]
    if family == "cart":
        return [Hyperparams(cart_criterion=c) for c in ("gini", "entropy")]
    if family == "svm":
        return [Hyperparams(svm_reg=r) for r in (0.01, 0.1, 1.0)]
    return [Hyperparams(nb_var_smoothing=s) for s in (1e-9, 1e-8)]


# --- report export ---------------------------------------------------------

def write_trace_csv(trace: SelectionTrace, path: str | Path) -> None:
    """Plot-ready step/f1 CSV (one row per selection step)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "chosen", "f1_mean", "f1_std"])
        for s in trace.steps:
            writer.writerow([s.step, s.chosen, repr(s.f1_mean), repr(s.f1_std)])


def write_cv_report(result: CVResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "accuracy", "precision", "recall", "f1",
                         "auc", "kappa"])
        for i, m in enumerate(result.folds):
            writer.writerow([i, m.accuracy, m.precision, m.recall, m.f1,
                             "" if m.auc is None else m.auc, m.kappa])
        writer.writerow(["mean", result.mean("accuracy"), result.mean("precision"),
                         result.mean("recall"), result.mean("f1"),
                         result.mean("auc") or "", result.mean("kappa")])
