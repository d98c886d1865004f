"""Holdout evaluation, baseline benchmarks, accuracy-over-time curves, and
the seeded synthetic corpus generator.

The generator plants class-dependent signal (deny fraction, cascade counts,
verified-user rate, negation and hedging language) so that selection and
classification have a real, recoverable structure to find at desk scale.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import (Dataset, FolloweeIndex, Rumour, Tweet, TweetKind,
                     UserProfile, CorpusPaths, save_corpus)
from .features import (FeatureCatalog, dataset_features, default_catalog,
                       extract_timeseries, window_stance_counts, WINDOW_COUNT)
from .learn import Hyperparams, TrainedModel, predict_proba
from .lingua import Lexicon
from .select import (Metrics, SelectionTrace, compute_metrics, default_grid,
                     fit_model, reduce_features, tune)

BENCHMARKS = ("random", "always_true", "single_attr_1", "single_attr_2")

# corpus-wide support:against tweet ratio used by single_attr_2
RATIO_THRESHOLD = 2.22


class BenchError(ValueError):
    """Raised on degenerate splits or infeasible synthetic specs."""


# --- train/test split -------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.6
    stratified: bool = True
    seed: int = 0


def train_test_split(y, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (train, test); both classes present in both halves."""
    y = np.asarray(y)
    rng = np.random.default_rng(spec.seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    if spec.stratified:
        for cls in sorted(np.unique(y)):
            rows = rng.permutation(np.flatnonzero(y == cls))
            if len(rows) < 2:
                raise BenchError(f"class {cls} has fewer than 2 rows; "
                                 "split degenerate")
            n_train = int(round(spec.train_fraction * len(rows)))
            n_train = min(max(n_train, 1), len(rows) - 1)
            train_idx.extend(rows[:n_train])
            test_idx.extend(rows[n_train:])
    else:
        rows = rng.permutation(len(y))
        n_train = int(round(spec.train_fraction * len(rows)))
        train_idx = list(rows[:n_train])
        test_idx = list(rows[n_train:])
        for half in (train_idx, test_idx):
            if len(np.unique(y[half])) < 2:
                raise BenchError("split degenerate: a half is single-class")
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


# --- holdout evaluation ------------------------------------------------------

def evaluate_holdout(models: Mapping[str, TrainedModel], X_test, y_test
                     ) -> dict[str, Metrics]:
    """Metrics per model on held-out rows; predictions come from features
    only, labels enter at metric time."""
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.int64)
    table = {}
    for name, model in models.items():
        proba = predict_proba(model, X_test)
        pred = (proba >= 0.5).astype(np.int64)
        table[name] = compute_metrics(y_test, pred, proba)
    return table


# --- benchmark baselines -----------------------------------------------------

def benchmark_predict(model_id: str, support_count: int, against_count: int,
                      rng: Optional[random.Random] = None) -> bool:
    """The four baseline rules. Only `random` consumes the RNG."""
    if model_id == "random":
        if rng is None:
            raise BenchError("random benchmark requires a seeded RNG")
        return rng.random() < 0.5
    if model_id == "always_true":
        return True
    if model_id == "single_attr_1":
        return support_count > against_count
    if model_id == "single_attr_2":
        if against_count == 0:
            return True
        return support_count / against_count > RATIO_THRESHOLD
    raise BenchError(f"unknown benchmark {model_id!r}")


# --- experiment orchestration ---------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple[str, ...] = ("logreg", "cart", "rf")
    method: int = 2
    budget: int = 8
    k: int = 10
    seed: int = 0
    split: SplitSpec = field(default_factory=SplitSpec)
    tune_grids: bool = True


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    feature_names: tuple[str, ...]
    rumour_ids: tuple[str, ...]
    labels: tuple[int, ...]
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    traces: Mapping[str, SelectionTrace]
    hyperparams: Mapping[str, Hyperparams]
    selected: Mapping[str, tuple[str, ...]]
    models: Mapping[str, TrainedModel]
    holdout: Mapping[str, Metrics]


def run_experiment(dataset: Dataset, lexicon: Lexicon,
                   catalog: Optional[FeatureCatalog] = None,
                   config: Optional[ExperimentConfig] = None) -> ExperimentResult:
    """Full pipeline on one corpus: extract, split, reduce, tune, train,
    evaluate. Selection and tuning see only the training half."""
    config = config or ExperimentConfig()
    catalog = catalog or default_catalog()
    X, y, ids, names = dataset_features(dataset, lexicon, catalog)
    train_rows, test_rows = train_test_split(y, config.split)
    X_train, y_train = X[train_rows], y[train_rows]
    X_test, y_test = X[test_rows], y[test_rows]

    traces, hyperparams, selected, models = {}, {}, {}, {}
    for family in config.families:
        trace = reduce_features(config.method, family, None, X_train, y_train,
                                budget=config.budget, seed=config.seed,
                                k=config.k, feature_names=names)
        subset = trace.feature_names
        cols = [names.index(f) for f in subset]
        hp = (tune(family, default_grid(family), X_train[:, cols], y_train,
                   k=config.k, seed=config.seed)
              if config.tune_grids else Hyperparams())
        model = fit_model(family, X_train[:, cols], y_train, hp,
                          seed=config.seed, feature_names=subset,
                          catalog_version=catalog.version)
        traces[family] = trace
        hyperparams[family] = hp
        selected[family] = subset
        models[family] = model

    holdout = {}
    for family, model in models.items():
        cols = [names.index(f) for f in selected[family]]
        holdout.update(evaluate_holdout({family: model}, X_test[:, cols], y_test))

    return ExperimentResult(
        config=config, feature_names=names,
        rumour_ids=tuple(ids), labels=tuple(int(v) for v in y),
        train_ids=tuple(ids[i] for i in train_rows),
        test_ids=tuple(ids[i] for i in test_rows),
        traces=traces, hyperparams=hyperparams, selected=selected,
        models=models, holdout=holdout,
    )


# --- accuracy-over-time curves ----------------------------------------------

@dataclass(frozen=True)
class TimeCurve:
    model: str
    accuracies: tuple[float, ...]   # exactly 20 values


def time_curves(dataset: Dataset, lexicon: Lexicon,
                experiment: ExperimentResult,
                catalog: Optional[FeatureCatalog] = None,
                seed: int = 0,
                retrain_per_interval: bool = False) -> dict[str, TimeCurve]:
    """Accuracy per cumulative window for trained models and baselines.

    Trained models are evaluated on the held-out rumours so that window 20
    reproduces the holdout accuracy. By default they are trained once on
    full-duration training features; `retrain_per_interval` refits them on
    the training half's window-k features instead. Baselines take no
    training, so their curves run over every rumour.
    """
    catalog = catalog or default_catalog()
    labels = {rid: lab for rid, lab in zip(experiment.rumour_ids,
                                           experiment.labels)}
    by_id = {r.rumour_id: r for r in dataset.rumours}

    test_series = {
        rid: extract_timeseries(by_id[rid], dataset.users, dataset.followees,
                                lexicon, catalog)
        for rid in experiment.test_ids
    }
    curves: dict[str, TimeCurve] = {}

    train_series = {}
    if retrain_per_interval:
        train_series = {
            rid: extract_timeseries(by_id[rid], dataset.users,
                                    dataset.followees, lexicon, catalog)
            for rid in experiment.train_ids
        }

    for family, model in experiment.models.items():
        subset = experiment.selected[family]
        accs = []
        for w in range(WINDOW_COUNT):
            window_model = model
            if retrain_per_interval:
                Xw = np.array([[train_series[rid].vectors[w][f] for f in subset]
                               for rid in experiment.train_ids])
                yw = np.array([labels[rid] for rid in experiment.train_ids])
                window_model = fit_model(family, Xw, yw,
                                         experiment.hyperparams[family],
                                         seed=experiment.config.seed,
                                         feature_names=subset,
                                         catalog_version=catalog.version)
            rows = np.array([[test_series[rid].vectors[w][f] for f in subset]
                             for rid in experiment.test_ids])
            proba = predict_proba(window_model, rows)
            pred = (proba >= 0.5).astype(np.int64)
            truth = np.array([labels[rid] for rid in experiment.test_ids])
            accs.append(float(np.mean(pred == truth)))
        curves[family] = TimeCurve(model=family, accuracies=tuple(accs))

    counts = {r.rumour_id: window_stance_counts(r) for r in dataset.rumours}
    all_ids = [r.rumour_id for r in dataset.rumours]
    rng = random.Random(seed)
    for bench in BENCHMARKS:
        accs = []
        for w in range(WINDOW_COUNT):
            hits = 0
            for rid in all_ids:
                sup, agn = counts[rid][w]
                pred = benchmark_predict(bench, sup, agn, rng)
                hits += int(pred == bool(labels[rid]))
            accs.append(hits / len(all_ids))
        curves[bench] = TimeCurve(model=bench, accuracies=tuple(accs))
    return curves


# --- synthetic corpus ---------------------------------------------------------

@dataclass(frozen=True)
class StanceRates:
    """Per-stance Bernoulli rates for one planted attribute.

    The ratio aggregation only transmits differences between the support
    and against sides, so class signal has to be planted as a per-stance
    contrast, not a uniform shift.
    """

    support: float
    neutral: float
    against: float

    def get(self, stance: int) -> float:
        return {1: self.support, 0: self.neutral, -1: self.against}[stance]

    def validate(self, name: str) -> None:
        for v in (self.support, self.neutral, self.against):
            if not 0.0 <= v <= 1.0:
                raise BenchError(f"{name} rates must lie in [0, 1]")


@dataclass(frozen=True)
class ClassProfile:
    """Generative knobs for one veracity class."""

    deny_beta: tuple[float, float]   # Beta(a, b) for per-rumour deny fraction
    originals_rate: float            # chance a tweet roots a new cascade
    verified: StanceRates
    negation: StanceRates
    tentative: StanceRates
    certainty: StanceRates

    def validate(self) -> None:
        a, b = self.deny_beta
        if a <= 0 or b <= 0:
            raise BenchError("deny_beta parameters must be positive")
        if not 0.0 <= self.originals_rate <= 1.0:
            raise BenchError("originals_rate must lie in [0, 1]")
        self.verified.validate("verified")
        self.negation.validate("negation")
        self.tentative.validate("tentative")
        self.certainty.validate("certainty")


# True rumours: verified accounts back the claim confidently; deniers negate.
TRUE_PROFILE = ClassProfile(
    deny_beta=(2.5, 7.5),
    originals_rate=0.12,
    verified=StanceRates(support=0.45, neutral=0.20, against=0.08),
    negation=StanceRates(support=0.02, neutral=0.10, against=0.55),
    tentative=StanceRates(support=0.08, neutral=0.20, against=0.15),
    certainty=StanceRates(support=0.35, neutral=0.10, against=0.10),
)
# False rumours: the credible accounts deny; supporters hedge.
FALSE_PROFILE = ClassProfile(
    deny_beta=(4.5, 5.5),
    originals_rate=0.35,
    verified=StanceRates(support=0.05, neutral=0.20, against=0.50),
    negation=StanceRates(support=0.30, neutral=0.10, against=0.20),
    tentative=StanceRates(support=0.45, neutral=0.25, against=0.10),
    certainty=StanceRates(support=0.06, neutral=0.10, against=0.40),
)


@dataclass(frozen=True)
class SynthSpec:
    n_rumours: int = 72
    true_fraction: float = 41.0 / 72.0
    tweets_low: int = 24
    tweets_high: int = 60
    past_tweets_high: int = 5
    topics: tuple[str, ...] = ("city-incident", "quake-report", "transit-alarm")
    true_profile: ClassProfile = field(default_factory=lambda: TRUE_PROFILE)
    false_profile: ClassProfile = field(default_factory=lambda: FALSE_PROFILE)
    seed: int = 0

    def validate(self) -> None:
        if self.n_rumours < 2:
            raise BenchError("need at least 2 rumours")
        n_true = int(round(self.true_fraction * self.n_rumours))
        if n_true < 1 or n_true >= self.n_rumours:
            raise BenchError("true_fraction leaves a class empty")
        if self.tweets_low < 3 or self.tweets_high < self.tweets_low:
            raise BenchError("tweet count range infeasible")
        if not self.topics:
            raise BenchError("at least one topic required")
        self.true_profile.validate()
        self.false_profile.validate()


_FILLER = ("the", "a", "crowd", "station", "street", "people", "report",
           "photo", "video", "now", "scene", "area", "police", "witness",
           "earlier", "tonight", "city", "breaking", "update", "source")
_POSITIVE = ("good", "great", "happy", "safe", "glad", "relief")
_NEGATIVE = ("bad", "awful", "terrible", "sad", "fake", "hoax", "wrong")
_TENTATIVE = ("maybe", "perhaps", "allegedly", "unconfirmed", "might")
_CERTAINTY = ("confirmed", "definitely", "official", "sure", "verified")
_NEGATION = ("not", "no", "never", "dont", "isnt")

_EPOCH_2016 = 1451606400000  # 2016-01-01T00:00:00Z in ms


def _tweet_text(rng: random.Random, stance: int, profile: ClassProfile) -> str:
    words = [rng.choice(_FILLER) for _ in range(rng.randint(5, 14))]
    if rng.random() < profile.tentative.get(stance):
        words.append(rng.choice(_TENTATIVE))
    if rng.random() < profile.certainty.get(stance):
        words.append(rng.choice(_CERTAINTY))
    if rng.random() < profile.negation.get(stance):
        words.append(rng.choice(_NEGATION))
    if stance == 1 and rng.random() < 0.5:
        words.append(rng.choice(_POSITIVE))
    if stance == -1 and rng.random() < 0.6:
        words.append(rng.choice(_NEGATIVE))
    rng.shuffle(words)
    if rng.random() < 0.3:
        words.append(f"https://t.example/{rng.randrange(16**6):06x}")
    return " ".join(words)


def _past_texts(rng: random.Random, started_at: int,
                high: int) -> tuple[tuple[int, str], ...]:
    n = rng.randint(0, high)
    out = []
    for _ in range(n):
        ts = started_at - rng.randint(1, 90) * 86_400_000 - rng.randint(0, 1000)
        mood = rng.choice((_POSITIVE, _NEGATIVE, _FILLER))
        words = [rng.choice(_FILLER) for _ in range(rng.randint(3, 9))]
        words.append(rng.choice(mood))
        out.append((ts, " ".join(words)))
    return tuple(sorted(out))


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Deterministic synthetic corpus; same spec (incl. seed) gives the same
    dataset, and saving it re-serialises byte-identically."""
    spec.validate()
    rng = random.Random(spec.seed)
    n_true = int(round(spec.true_fraction * spec.n_rumours))
    veracities = [True] * n_true + [False] * (spec.n_rumours - n_true)

    rumours = []
    users: dict[str, UserProfile] = {}
    followees: dict[str, set[str]] = {}

    for r, veracity in enumerate(veracities):
        profile = spec.true_profile if veracity else spec.false_profile
        rid = f"r{r:03d}"
        started_at = _EPOCH_2016 + r * 7 * 86_400_000
        duration = rng.randint(2, 12) * 3_600_000
        verified_at = started_at + duration
        n_tweets = rng.randint(spec.tweets_low, spec.tweets_high)
        times = sorted(rng.sample(range(started_at, verified_at), n_tweets))

        deny_frac = rng.betavariate(*profile.deny_beta)
        support_frac = (1.0 - deny_frac) * rng.uniform(0.6, 0.85)

        def draw_stance() -> int:
            u = rng.random()
            if u < deny_frac:
                return -1
            if u < deny_frac + support_frac:
                return 1
            return 0

        user_ids = []

        def new_user(stance: int) -> str:
            uid = f"u{r:03d}_{len(user_ids):04d}"
            registered = started_at - rng.randint(200, 2000) * 86_400_000
            users[uid] = UserProfile(
                user_id=uid,
                registered_at=registered,
                verified=rng.random() < profile.verified.get(stance),
                followers_count=int(rng.lognormvariate(5.0, 1.5)),
                friends_count=int(rng.lognormvariate(4.5, 1.0)),
                statuses_count=rng.randint(10, 40_000),
                likes_count=rng.randint(0, 8_000),
                has_description=rng.random() < 0.7,
                has_location=rng.random() < 0.5,
                past_tweets=_past_texts(rng, started_at, spec.past_tweets_high),
            )
            followees[uid] = set()
            user_ids.append(uid)
            return uid

        tweets = []
        # cascades[stance] -> list of (tweet_id, author_id) already emitted
        cascades: dict[int, list[tuple[str, str]]] = {1: [], 0: [], -1: []}
        for j, ts in enumerate(times):
            tid = f"t{r:03d}_{j:04d}"
            stance = draw_stance()
            author = new_user(stance) if (not user_ids or rng.random() < 0.9) \
                else rng.choice(user_ids)
            pool = cascades[stance]
            if not pool or rng.random() < profile.originals_rate:
                tweets.append(Tweet(tweet_id=tid, rumour_id=rid,
                                    author_id=author, timestamp=ts,
                                    text=_tweet_text(rng, stance, profile),
                                    kind=TweetKind.ORIGINAL,
                                    source_tweet_id=None, stance=stance,
                                    attributes={}))
            else:
                src_tid, src_author = rng.choice(pool)
                if src_author != author:
                    followees[author].add(src_author)
                tweets.append(Tweet(tweet_id=tid, rumour_id=rid,
                                    author_id=author, timestamp=ts,
                                    text="", kind=TweetKind.RETWEET,
                                    source_tweet_id=src_tid, stance=None,
                                    attributes={}))
            pool.append((tid, author))

        # light extra social fabric beyond the guaranteed cascade edges
        for uid in user_ids:
            others = [u for u in user_ids if u != uid]
            for f in rng.sample(others, min(len(others), rng.randint(0, 3))):
                followees[uid].add(f)

        rumours.append(Rumour(
            rumour_id=rid,
            topic=spec.topics[r % len(spec.topics)],
            claim=f"unverified report {r:03d} circulating",
            veracity=veracity,
            started_at=started_at,
            verified_at=verified_at,
            tweets=tuple(tweets),
        ))

    index = FolloweeIndex(
        {uid: frozenset(f) for uid, f in followees.items() if f})
    return Dataset(rumours=tuple(rumours), users=users, followees=index,
                   warnings=())


def generate_corpus_files(spec: SynthSpec, out_dir: str | Path) -> CorpusPaths:
    dataset = generate_synthetic(spec)
    return save_corpus(dataset, out_dir)


# --- report export -----------------------------------------------------------

def write_metrics_table(table: Mapping[str, Metrics], path: str | Path) -> None:
    """Model-per-row metrics CSV (test-set table shape)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "accuracy", "precision", "recall", "f1",
                         "auc", "kappa"])
        for name, m in table.items():
            writer.writerow([name, m.accuracy, m.precision, m.recall, m.f1,
                             "" if m.auc is None else m.auc, m.kappa])


def write_curves_csv(curves: Mapping[str, TimeCurve], path: str | Path) -> None:
    """Long-format (interval, model, accuracy) CSV for plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["interval", "model", "accuracy"])
        for name in curves:
            for k, acc in enumerate(curves[name].accuracies, start=1):
                writer.writerow([k, name, repr(acc)])
