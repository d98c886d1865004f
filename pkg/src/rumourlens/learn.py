"""From-scratch binary classifiers with probability outputs.

Five families: L2 logistic regression (Newton iterations), CART decision
trees, random forests over them, Gaussian naive Bayes, and a linear SVM
trained by batch subgradient descent. All accept a dense float matrix and
0/1 labels, train deterministically for a given seed, and predict the
probability of the positive class.

Also here: impurity-based random-forest feature importance (averaged over
repeated runs) and the likelihood-ratio significance test for logistic
regression coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

FAMILIES = ("logreg", "cart", "rf", "nb", "svm")

_FAMILY_ALIASES = {
    "logistic_regression": "logreg",
    "decision_tree": "cart",
    "random_forest": "rf",
    "naive_bayes": "nb",
    "linear_svm": "svm",
}


class LearnError(ValueError):
    """Raised on invalid training input or model misuse."""


@dataclass(frozen=True)
class Hyperparams:
    logreg_reg: float = 1.0          # L2 coefficient on weights (bias free)
    svm_reg: float = 0.1             # hinge-loss L2 coefficient
    cart_criterion: str = "gini"     # or "entropy"
    rf_trees: int = 100
    rf_bootstrap: bool = True
    rf_max_features: Optional[int] = None  # None -> floor(sqrt(M)), min 1
    nb_var_smoothing: float = 1e-9
    logreg_tol: float = 1e-6
    logreg_max_iter: int = 100
    svm_epochs: int = 1000

    def __post_init__(self) -> None:
        if self.cart_criterion not in ("gini", "entropy"):
            raise LearnError(f"unknown split criterion {self.cart_criterion!r}")
        for name in ("logreg_reg", "svm_reg", "nb_var_smoothing", "logreg_tol"):
            if getattr(self, name) <= 0:
                raise LearnError(f"{name} must be positive")
        if self.rf_trees < 1:
            raise LearnError("rf_trees must be >= 1")


@dataclass(frozen=True)
class TrainedModel:
    family: str
    feature_names: tuple[str, ...]
    catalog_version: str
    params: Mapping
    seed: int
    hyperparams: Hyperparams
    # (means, scales) applied to inputs before scoring, when trained on
    # standardised features
    scaler: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None

    def with_scaler(self, means: Sequence[float],
                    scales: Sequence[float]) -> "TrainedModel":
        return replace(self, scaler=(tuple(float(m) for m in means),
                                     tuple(float(s) for s in scales)))


def canonical_family(name: str) -> str:
    family = _FAMILY_ALIASES.get(name, name)
    if family not in FAMILIES:
        raise LearnError(f"unknown classifier family {name!r}")
    return family


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _validate(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise LearnError("X must be a 2-D matrix")
    if X.shape[1] == 0:
        raise LearnError("zero features")
    if X.shape[0] != y.shape[0]:
        raise LearnError("X and y length mismatch")
    if X.shape[0] < 2:
        raise LearnError("need at least 2 rows")
    if not np.isfinite(X).all():
        raise LearnError("X contains NaN or infinite values")
    if set(np.unique(y)) - {0, 1}:
        raise LearnError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise LearnError("single-class input")
    return X, y


# --- logistic regression ---------------------------------------------------

def logreg_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                     reg: float) -> float:
    """Penalised negative log-likelihood: -LL + reg/2 * ||w||^2."""
    z = X @ w + b
    ll = float(np.sum(y * z - np.logaddexp(0.0, z)))
    return -ll + 0.5 * reg * float(w @ w)


def logreg_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                    reg: float) -> tuple[np.ndarray, float]:
    p = _sigmoid(X @ w + b)
    return X.T @ (p - y) + reg * w, float(np.sum(p - y))


def _fit_logreg(X: np.ndarray, y: np.ndarray, reg: float, tol: float,
                max_iter: int) -> dict:
    n, m = X.shape
    Xb = np.hstack([X, np.ones((n, 1))])
    theta = np.zeros(m + 1)
    penalty = np.concatenate([np.full(m, reg), [0.0]])  # bias unpenalised

    def objective(t: np.ndarray) -> float:
        return logreg_objective(t[:m], t[m], X, y, reg)

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = Xb @ theta
        p = _sigmoid(z)
        grad = Xb.T @ (p - y) + penalty * theta
        if np.linalg.norm(grad) <= tol:
            converged = True
            break
        W = p * (1.0 - p)
        H = (Xb * W[:, None]).T @ Xb + np.diag(penalty)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        # halve until the penalised objective stops increasing
        f0 = objective(theta)
        scale = 1.0
        for _ in range(30):
            cand = theta - scale * step
            if objective(cand) <= f0 + 1e-12:
                break
            scale *= 0.5
        theta = theta - scale * step
    else:
        it = max_iter

    z = Xb @ theta
    grad = Xb.T @ (_sigmoid(z) - y) + penalty * theta
    if np.linalg.norm(grad) <= tol:
        converged = True
    loglik = float(np.sum(y * z - np.logaddexp(0.0, z)))
    return {
        "weights": [float(v) for v in theta[:m]],
        "bias": float(theta[m]),
        "loglik": loglik,           # unpenalised, at the regularised optimum
        "converged": bool(converged),
        "n_iter": it,
    }


# --- CART ------------------------------------------------------------------

def _impurity_pair(n0: np.ndarray, n1: np.ndarray, criterion: str) -> np.ndarray:
    n = n0 + n1
    p0 = np.divide(n0, n, out=np.zeros_like(n, dtype=np.float64), where=n > 0)
    p1 = np.divide(n1, n, out=np.zeros_like(n, dtype=np.float64), where=n > 0)
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    xlog = lambda p: np.where(p > 0, p * np.log2(p, out=np.zeros_like(p),
                                                 where=p > 0), 0.0)
    return -(xlog(p0) + xlog(p1))


def _node_impurity(counts: np.ndarray, criterion: str) -> float:
    return float(_impurity_pair(np.array([counts[0]], dtype=np.float64),
                                np.array([counts[1]], dtype=np.float64),
                                criterion)[0])


def _best_split(X, y, idx, feats, criterion, node_imp, n_node):
    """Highest-impurity-decrease (feature, threshold); ties resolve to the
    lowest feature index then the lowest threshold via scan order."""
    best = None
    best_dec = 0.0
    ysub = y[idx].astype(np.float64)
    for f in feats:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cum1 = np.cumsum(ysub[order])
        boundary = np.nonzero(sv[:-1] < sv[1:])[0]
        if boundary.size == 0:
            continue
        nl = (boundary + 1).astype(np.float64)
        nr = n_node - nl
        l1 = cum1[boundary]
        r1 = cum1[-1] - l1
        il = _impurity_pair(nl - l1, l1, criterion)
        ir = _impurity_pair(nr - r1, r1, criterion)
        dec = node_imp - (nl * il + nr * ir) / n_node
        j = int(np.argmax(dec))            # first max -> lowest threshold
        # an impure node splits even on a zero-decrease tie (duplicated
        # feature values can hide the gain one level down, as in XOR)
        if best is None or dec[j] > best_dec:
            best_dec = max(float(dec[j]), 0.0)
            best = (int(f), float((sv[boundary[j]] + sv[boundary[j] + 1]) / 2.0),
                    best_dec)
    return best


def _grow_tree(X, y, idx, criterion, rng, max_features) -> dict:
    counts = np.bincount(y[idx], minlength=2)
    n = int(idx.size)
    leaf = {"kind": "leaf", "n": n,
            "fractions": [float(counts[0]) / n, float(counts[1]) / n]}
    if counts[0] == 0 or counts[1] == 0 or n < 2:
        return leaf
    m = X.shape[1]
    if rng is not None and max_features is not None and max_features < m:
        feats = np.sort(rng.choice(m, size=max_features, replace=False))
    else:
        feats = np.arange(m)
    split = _best_split(X, y, idx, feats, criterion,
                        _node_impurity(counts, criterion), float(n))
    if split is None:
        return leaf
    f, thr, dec = split
    mask = X[idx, f] <= thr
    return {
        "kind": "split", "feature": f, "threshold": thr, "n": n,
        "decrease": dec,
        "left": _grow_tree(X, y, idx[mask], criterion, rng, max_features),
        "right": _grow_tree(X, y, idx[~mask], criterion, rng, max_features),
    }


def _tree_proba(node: Mapping, x: np.ndarray) -> float:
    while node["kind"] == "split":
        node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
    return node["fractions"][1]


def _tree_raw_importance(node: Mapping, out: np.ndarray, n_root: float) -> None:
    if node["kind"] == "split":
        out[node["feature"]] += (node["n"] / n_root) * node["decrease"]
        _tree_raw_importance(node["left"], out, n_root)
        _tree_raw_importance(node["right"], out, n_root)


# --- training dispatch -------------------------------------------------------

def train(family: str, X, y, hp: Optional[Hyperparams] = None, seed: int = 0,
          feature_names: Optional[Sequence[str]] = None,
          catalog_version: str = "unversioned") -> TrainedModel:
    """Fit one model; deterministic for fixed (inputs, hp, seed)."""
    family = canonical_family(family)
    hp = hp or Hyperparams()
    X, y = _validate(X, y)
    n, m = X.shape
    names = tuple(feature_names) if feature_names is not None \
        else tuple(f"f{i}" for i in range(m))
    if len(names) != m:
        raise LearnError("feature_names length mismatch")

    if family == "logreg":
        params = _fit_logreg(X, y, hp.logreg_reg, hp.logreg_tol, hp.logreg_max_iter)
    elif family == "cart":
        tree = _grow_tree(X, y, np.arange(n), hp.cart_criterion, None, None)
        params = {"tree": tree, "n_train": n}
    elif family == "rf":
        max_features = hp.rf_max_features
        if max_features is None:
            max_features = max(1, int(math.sqrt(m)))
        max_features = min(max_features, m)
        trees = []
        for i in range(hp.rf_trees):
            rng = np.random.default_rng([seed, i])
            idx = rng.integers(0, n, size=n) if hp.rf_bootstrap else np.arange(n)
            if len(np.unique(y[idx])) < 2:
                # degenerate bootstrap sample: keep the majority-vote leaf
                trees.append(_grow_tree(X, y, idx, hp.cart_criterion, None, None))
                continue
            trees.append(_grow_tree(X, y, idx, hp.cart_criterion, rng, max_features))
        params = {"trees": trees, "n_train": n, "max_features": int(max_features)}
    elif family == "nb":
        eps = hp.nb_var_smoothing * float(np.max(np.var(X, axis=0)))
        if eps <= 0:
            eps = hp.nb_var_smoothing
        priors, means, variances = [], [], []
        for cls in (0, 1):
            rows = X[y == cls]
            priors.append(rows.shape[0] / n)
            means.append([float(v) for v in rows.mean(axis=0)])
            variances.append([float(v) for v in rows.var(axis=0) + eps])
        params = {"priors": priors, "means": means, "vars": variances}
    else:  # svm
        ypm = 2.0 * y - 1.0
        w = np.zeros(m)
        b = 0.0
        radius = 1.0 / math.sqrt(hp.svm_reg)
        for t in range(hp.svm_epochs):
            eta = 1.0 / (hp.svm_reg * (t + 1))
            viol = ypm * (X @ w + b) < 1.0
            gw = hp.svm_reg * w - (ypm[viol, None] * X[viol]).sum(axis=0) / n
            gb = -float(ypm[viol].sum()) / n
            w = w - eta * gw
            b = b - eta * gb
            norm = float(np.linalg.norm(w))
            if norm > radius:
                w *= radius / norm
        params = {"weights": [float(v) for v in w], "bias": float(b)}

    return TrainedModel(family=family, feature_names=names,
                        catalog_version=catalog_version, params=params,
                        seed=seed, hyperparams=hp)


# --- prediction --------------------------------------------------------------

def predict_proba(model: TrainedModel, X) -> Union[float, np.ndarray]:
    """P(class true). Accepts a feature-vector object (keyed by the model's
    feature names), a single row, or a matrix."""
    if hasattr(X, "names") and hasattr(X, "values"):
        row = np.array([X[name] for name in model.feature_names], dtype=np.float64)
        return float(predict_proba(model, row[None, :])[0])
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != len(model.feature_names):
        raise LearnError(f"expected {len(model.feature_names)} features, "
                         f"got {X.shape[1]}")
    if model.scaler is not None:
        means, scales = (np.array(model.scaler[0]), np.array(model.scaler[1]))
        X = (X - means) / scales
    p = _predict_proba_matrix(model, X)
    return float(p[0]) if single else p


def _predict_proba_matrix(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    params = model.params
    if model.family in ("logreg", "svm"):
        z = X @ np.array(params["weights"]) + params["bias"]
        return _sigmoid(z)
    if model.family == "cart":
        return np.array([_tree_proba(params["tree"], row) for row in X])
    if model.family == "rf":
        per_tree = np.array([[_tree_proba(t, row) for t in params["trees"]]
                             for row in X])
        return per_tree.mean(axis=1)
    # nb: joint log density per class, normalised posterior
    log_priors = np.log(np.array(params["priors"]))
    means = np.array(params["means"])      # (2, m)
    variances = np.array(params["vars"])   # (2, m)
    joint = np.empty((X.shape[0], 2))
    for cls in (0, 1):
        delta = X - means[cls]
        joint[:, cls] = log_priors[cls] - 0.5 * np.sum(
            np.log(2.0 * np.pi * variances[cls]) + delta * delta / variances[cls],
            axis=1)
    return np.exp(joint[:, 1] - np.logaddexp(joint[:, 0], joint[:, 1]))


def predict(model: TrainedModel, X) -> Union[int, np.ndarray]:
    """Hard labels: probability >= 0.5."""
    p = predict_proba(model, X)
    if isinstance(p, float):
        return int(p >= 0.5)
    return (p >= 0.5).astype(np.int64)


# --- random-forest importance ------------------------------------------------

def rf_importance(X, y, hp: Optional[Hyperparams] = None, runs: int = 1000,
                  seed: int = 0,
                  feature_names: Optional[Sequence[str]] = None) -> dict:
    """Mean impurity-decrease importance over `runs` forests with distinct
    seeds; each run's vector is normalised to sum 1."""
    if runs < 1:
        raise LearnError("runs must be >= 1")
    X, y = _validate(X, y)
    hp = hp or Hyperparams()
    m = X.shape[1]
    total = np.zeros(m)
    for r in range(runs):
        model = train("rf", X, y, hp, seed=seed + r)
        raw = np.zeros(m)
        for tree in model.params["trees"]:
            _tree_raw_importance(tree, raw, float(tree["n"]))
        s = raw.sum()
        total += raw / s if s > 0 else np.full(m, 1.0 / m)
    mean = total / runs
    keys = feature_names if feature_names is not None else range(m)
    return {k: float(v) for k, v in zip(keys, mean)}


# --- logistic-regression significance ----------------------------------------

@dataclass(frozen=True)
class SignificanceResult:
    statistic: float
    significant: bool


def loglik_significance(model: TrainedModel, X, y,
                        alpha: float = 0.05) -> dict[str, SignificanceResult]:
    """Likelihood-ratio test per feature: 2(LL_full - LL_without) vs the
    chi-square(1) critical value at `alpha`.

    Log-likelihoods are the unpenalised data terms evaluated at the
    L2-regularised optima, with the same penalty for full and restricted fits.
    """
    from scipy.stats import chi2

    if model.family != "logreg":
        raise LearnError("significance test requires a logreg model")
    X, y = _validate(X, y)
    hp = model.hyperparams
    ll_full = model.params["loglik"]
    critical = float(chi2.ppf(1.0 - alpha, df=1))
    out = {}
    for j, name in enumerate(model.feature_names):
        restricted = _fit_logreg(np.delete(X, j, axis=1), y, hp.logreg_reg,
                                 hp.logreg_tol, hp.logreg_max_iter)
        if not restricted["converged"]:
            raise LearnError(f"restricted fit without {name!r} did not converge")
        stat = max(2.0 * (ll_full - restricted["loglik"]), 0.0)
        out[name] = SignificanceResult(statistic=stat,
                                       significant=stat > critical)
    return out


# --- persistence ---------------------------------------------------------------

def save_model(model: TrainedModel, path: str | Path) -> None:
    doc = {
        "format": "rumourlens-model",
        "v": 1,
        "family": model.family,
        "catalog_version": model.catalog_version,
        "feature_names": list(model.feature_names),
        "seed": model.seed,
        "hyperparams": asdict(model.hyperparams),
        "scaler": [list(model.scaler[0]), list(model.scaler[1])]
                  if model.scaler else None,
        "params": model.params,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1),
                          encoding="utf-8")


def load_model(path: str | Path,
               expected_catalog_version: Optional[str] = None) -> TrainedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != "rumourlens-model" or doc.get("v") != 1:
        raise LearnError(f"{path}: not a recognised model file")
    if (expected_catalog_version is not None
            and doc["catalog_version"] != expected_catalog_version):
        raise LearnError(
            f"model catalog version {doc['catalog_version']!r} does not match "
            f"expected {expected_catalog_version!r}")
    scaler = doc.get("scaler")
    return TrainedModel(
        family=canonical_family(doc["family"]),
        feature_names=tuple(doc["feature_names"]),
        catalog_version=doc["catalog_version"],
        params=doc["params"],
        seed=int(doc["seed"]),
        hyperparams=Hyperparams(**doc["hyperparams"]),
        scaler=(tuple(scaler[0]), tuple(scaler[1])) if scaler else None,
    )
