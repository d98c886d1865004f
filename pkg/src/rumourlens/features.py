"""Rumour-level feature vectors from stance-aggregated attributes.

Every attribute is summarised per stance side as (S, N, A), the means over
supporting, neutral, and against tweets (or users, or the per-stance network
value), and folded into one number by the feature's aggregation rule:

* ``ratio``       (S + N + 1) / (A + N + 1)
* ``difference``  S - A, for signed sentiment attributes
* ``fraction``    plain fraction of all tweets (support/deny shares)

A versioned catalog fixes the feature list and order. The 20-window time
series applies the same extraction to cumulative prefixes of the rumour.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import lingua
from .corpus import MS_PER_DAY, Dataset, FolloweeIndex, Rumour, UserProfile
from .graph import build_stance_forests, network_attributes
from .lingua import Lexicon

WINDOW_COUNT = 20

STANCES = (1, 0, -1)


class FeatureError(ValueError):
    """Raised for unknown attributes or non-finite feature values."""


@dataclass(frozen=True)
class StanceAggregate:
    """Per-side means (support, neutral, against) of one attribute.

    A side with no members contributes 0 by convention.
    """

    S: float
    N: float
    A: float


def aggregate_ratio(agg: StanceAggregate) -> float:
    """(S + N + 1) / (A + N + 1); the unit term keeps the denominator positive."""
    return (agg.S + agg.N + 1.0) / (agg.A + agg.N + 1.0)


def aggregate_sentiment(agg: StanceAggregate) -> float:
    """S - A, used for attributes that may be negative."""
    return agg.S - agg.A


def stance_means(samples: Iterable[tuple[int, float]]) -> StanceAggregate:
    """Mean of (stance, value) samples per side; empty sides give 0."""
    sums = {1: 0.0, 0: 0.0, -1: 0.0}
    counts = {1: 0, 0: 0, -1: 0}
    for stance, value in samples:
        sums[stance] += value
        counts[stance] += 1
    side = lambda s: sums[s] / counts[s] if counts[s] else 0.0
    return StanceAggregate(S=side(1), N=side(0), A=side(-1))


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    source: str     # message | user | network
    attribute: str  # key into the per-source attribute table
    rule: str       # ratio | difference | fraction


@dataclass(frozen=True)
class FeatureCatalog:
    """Versioned, ordered feature list. M = len(features)."""

    version: str
    features: tuple[FeatureSpec, ...]
    log_scale_user_counts: bool = True

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise FeatureError("duplicate feature names in catalog")
        for f in self.features:
            if f.rule not in ("ratio", "difference", "fraction"):
                raise FeatureError(f"unknown aggregation rule {f.rule!r}")
            if f.source not in ("message", "user", "network"):
                raise FeatureError(f"unknown feature source {f.source!r}")

    @property
    def size(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def with_tweet_attributes(self, attribute_names: Sequence[str]) -> "FeatureCatalog":
        """Extend with ratio-aggregated precomputed tweet attributes.

        The version string records the extension so persisted models cannot
        silently mix catalogs.
        """
        extra = tuple(
            FeatureSpec(name=f"msg_{a}", source="message", attribute=a, rule="ratio")
            for a in attribute_names
        )
        return FeatureCatalog(
            version=f"{self.version}+ext{len(extra)}",
            features=self.features + extra,
            log_scale_user_counts=self.log_scale_user_counts,
        )


_LEXICON_RULE = {"positive": "difference", "negative": "difference"}

_DEFAULT_SPECS: tuple[FeatureSpec, ...] = (
    FeatureSpec("fraction_support", "message", "is_support", "fraction"),
    FeatureSpec("fraction_deny", "message", "is_deny", "fraction"),
    FeatureSpec("msg_word_count", "message", "word_count", "ratio"),
    FeatureSpec("msg_has_url", "message", "has_url", "ratio"),
    FeatureSpec("msg_negation", "message", "negation", "ratio"),
    FeatureSpec("msg_parse_depth", "message", "parse_depth", "ratio"),
) + tuple(
    FeatureSpec(f"msg_{cat}", "message", cat, _LEXICON_RULE.get(cat, "ratio"))
    for cat in lingua.CATEGORIES
) + (
    FeatureSpec("user_followers", "user", "followers", "ratio"),
    FeatureSpec("user_friends", "user", "friends", "ratio"),
    FeatureSpec("user_statuses", "user", "statuses", "ratio"),
    FeatureSpec("user_likes", "user", "likes", "ratio"),
    FeatureSpec("user_verified", "user", "verified", "ratio"),
    FeatureSpec("user_has_description", "user", "has_description", "ratio"),
    FeatureSpec("user_has_location", "user", "has_location", "ratio"),
    FeatureSpec("user_tenure_days", "user", "tenure_days", "ratio"),
    FeatureSpec("user_post_frequency", "user", "post_frequency", "ratio"),
    FeatureSpec("user_past_sentiment", "user", "past_sentiment", "difference"),
    FeatureSpec("net_tree_count", "network", "tree_count", "ratio"),
    FeatureSpec("net_lcc_root_degree", "network", "lcc_root_degree", "ratio"),
    FeatureSpec("net_retweets_within", "network", "retweets_within_network", "ratio"),
    FeatureSpec("net_quotes_within", "network", "quotes_within_network", "ratio"),
    FeatureSpec("net_low_to_high", "network", "low_to_high_diffusion", "ratio"),
)


def default_catalog(log_scale_user_counts: bool = True) -> FeatureCatalog:
    return FeatureCatalog(version="default-v1", features=_DEFAULT_SPECS,
                          log_scale_user_counts=log_scale_user_counts)


@dataclass(frozen=True)
class FeatureVector:
    catalog_version: str
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise FeatureError(f"unknown feature {name!r}") from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class RumourTimeSeries:
    rumour_id: str
    cutoffs: tuple[int, ...]        # window end timestamps, ms
    tweet_counts: tuple[int, ...]   # cumulative tweets per window
    vectors: tuple[FeatureVector, ...]


def message_attributes(text: str, lexicon: Lexicon,
                       precomputed: Mapping[str, float]) -> dict[str, float]:
    """Per-tweet message attribute table; corpus-supplied values win over
    derived fallbacks."""
    scored = lingua.score_text(text, lexicon)
    wc = float(precomputed.get("word_count", scored.word_count))
    attrs = {
        "word_count": wc,
        "has_url": float(precomputed.get(
            "has_url", 1.0 if lingua.contains_url(text) else 0.0)),
        "negation": float(precomputed.get(
            "negation", 1.0 if lingua.has_negation(text) else 0.0)),
        "parse_depth": float(precomputed.get(
            "parse_depth", lingua.parse_depth_fallback(int(wc)))),
    }
    for cat in lingua.CATEGORIES:
        attrs[cat] = float(precomputed.get(cat, scored.scores[cat]))
    for key, value in precomputed.items():
        attrs.setdefault(key, float(value))
    return attrs


def user_attributes(profile: UserProfile, rumour_start: int, lexicon: Lexicon,
                    log_counts: bool) -> dict[str, float]:
    """Per-user attribute table for one rumour.

    Tenure clamps at 0 for accounts registered mid-rumour; post frequency
    divides lifetime statuses by tenure floored at one day.
    """
    scale: Callable[[float], float] = math.log1p if log_counts else float
    tenure = max((rumour_start - profile.registered_at) / MS_PER_DAY, 0.0)
    return {
        "followers": scale(profile.followers_count),
        "friends": scale(profile.friends_count),
        "statuses": scale(profile.statuses_count),
        "likes": scale(profile.likes_count),
        "verified": 1.0 if profile.verified else 0.0,
        "has_description": 1.0 if profile.has_description else 0.0,
        "has_location": 1.0 if profile.has_location else 0.0,
        "tenure_days": tenure,
        "post_frequency": profile.statuses_count / max(tenure, 1.0),
        "past_sentiment": lingua.user_past_sentiment(profile, lexicon),
    }


def extract_features(
    rumour: Rumour,
    users: Mapping[str, UserProfile],
    followees: FolloweeIndex,
    lexicon: Lexicon,
    catalog: Optional[FeatureCatalog] = None,
) -> FeatureVector:
    """One vector per rumour, every catalog feature under its declared rule.

    The rumour's tweets may be any cumulative prefix; an empty tweet list
    yields the neutral defaults (ratios 1, differences and fractions 0).
    """
    catalog = catalog or default_catalog()
    tweets = rumour.tweets
    total = len(tweets)

    msg_samples: dict[str, list[tuple[int, float]]] = {}
    needed_msg = {f.attribute for f in catalog.features
                  if f.source == "message" and f.rule != "fraction"}
    if needed_msg:
        for t in tweets:
            table = message_attributes(t.text, lexicon, t.attributes)
            for attr in needed_msg:
                if attr not in table:
                    raise FeatureError(
                        f"tweet {t.tweet_id} lacks attribute {attr!r}")
                msg_samples.setdefault(attr, []).append((t.stance, table[attr]))

    user_aggs: dict[str, StanceAggregate] = {}
    needed_user = {f.attribute for f in catalog.features if f.source == "user"}
    if needed_user:
        # distinct users per side; both-side contributors count on both
        sides: dict[int, set[str]] = {1: set(), 0: set(), -1: set()}
        for t in tweets:
            sides[t.stance].add(t.author_id)
        tables = {
            uid: user_attributes(users[uid], rumour.started_at, lexicon,
                                 catalog.log_scale_user_counts)
            for uid in set().union(*sides.values())
        }
        for attr in needed_user:
            samples = [(stance, tables[uid][attr])
                       for stance in STANCES for uid in sides[stance]]
            user_aggs[attr] = stance_means(samples)

    net_aggs: dict[str, StanceAggregate] = {}
    if any(f.source == "network" for f in catalog.features):
        forests = build_stance_forests(rumour, followees)
        per_side = {s: network_attributes(forests[s], users).as_dict()
                    for s in STANCES}
        for attr in per_side[1]:
            net_aggs[attr] = StanceAggregate(
                S=per_side[1][attr], N=per_side[0][attr], A=per_side[-1][attr])

    values = []
    for f in catalog.features:
        if f.rule == "fraction":
            if f.attribute == "is_support":
                v = sum(1 for t in tweets if t.stance == 1) / total if total else 0.0
            elif f.attribute == "is_deny":
                v = sum(1 for t in tweets if t.stance == -1) / total if total else 0.0
            else:
                raise FeatureError(f"unknown fraction attribute {f.attribute!r}")
        elif f.source == "message":
            agg = stance_means(msg_samples.get(f.attribute, []))
            v = aggregate_sentiment(agg) if f.rule == "difference" else aggregate_ratio(agg)
        elif f.source == "user":
            agg = user_aggs[f.attribute]
            v = aggregate_sentiment(agg) if f.rule == "difference" else aggregate_ratio(agg)
        else:
            if f.attribute not in net_aggs:
                raise FeatureError(f"unknown network attribute {f.attribute!r}")
            agg = net_aggs[f.attribute]
            v = aggregate_sentiment(agg) if f.rule == "difference" else aggregate_ratio(agg)
        if not math.isfinite(v):
            raise FeatureError(f"feature {f.name} is not finite for {rumour.rumour_id}")
        values.append(v)

    return FeatureVector(catalog_version=catalog.version,
                         names=catalog.names, values=tuple(values))


def window_cutoffs(rumour: Rumour) -> tuple[int, ...]:
    """End timestamps of the 20 cumulative windows (integer ms arithmetic;
    window 20 ends exactly at verification)."""
    d = rumour.duration_ms
    return tuple(rumour.started_at + (k * d) // WINDOW_COUNT
                 for k in range(1, WINDOW_COUNT + 1))


def window_rumour(rumour: Rumour, cutoff: int) -> Rumour:
    return replace(rumour,
                   tweets=tuple(t for t in rumour.tweets if t.timestamp <= cutoff))


def extract_timeseries(
    rumour: Rumour,
    users: Mapping[str, UserProfile],
    followees: FolloweeIndex,
    lexicon: Lexicon,
    catalog: Optional[FeatureCatalog] = None,
) -> RumourTimeSeries:
    """Window-k vector = extract_features on tweets up to cutoff k.

    Window 20 covers the full rumour, so its vector equals the plain
    extract_features output exactly.
    """
    cutoffs = window_cutoffs(rumour)
    counts = []
    vectors = []
    for cutoff in cutoffs:
        prefix = window_rumour(rumour, cutoff)
        counts.append(len(prefix.tweets))
        vectors.append(extract_features(prefix, users, followees, lexicon, catalog))
    return RumourTimeSeries(rumour_id=rumour.rumour_id, cutoffs=cutoffs,
                            tweet_counts=tuple(counts), vectors=tuple(vectors))


def window_stance_counts(rumour: Rumour) -> list[tuple[int, int]]:
    """(support, against) tweet counts per cumulative window."""
    out = []
    for cutoff in window_cutoffs(rumour):
        sup = sum(1 for t in rumour.tweets
                  if t.timestamp <= cutoff and t.stance == 1)
        agn = sum(1 for t in rumour.tweets
                  if t.timestamp <= cutoff and t.stance == -1)
        out.append((sup, agn))
    return out


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Row-per-vector float64 matrix; rejects mixed catalogs."""
    if not vectors:
        return np.zeros((0, 0))
    version = vectors[0].catalog_version
    for v in vectors:
        if v.catalog_version != version:
            raise FeatureError("feature vectors from different catalogs")
    return np.array([v.values for v in vectors], dtype=np.float64)


def dataset_features(
    dataset: Dataset, lexicon: Lexicon, catalog: Optional[FeatureCatalog] = None
) -> tuple[np.ndarray, np.ndarray, list[str], tuple[str, ...]]:
    """(X, y, rumour_ids, feature_names) over all rumours, rumour-id order."""
    catalog = catalog or default_catalog()
    vectors = []
    labels = []
    ids = []
    for r in dataset.rumours:
        vectors.append(extract_features(r, dataset.users, dataset.followees,
                                        lexicon, catalog))
        labels.append(1 if r.veracity else 0)
        ids.append(r.rumour_id)
    return feature_matrix(vectors), np.array(labels, dtype=np.int64), ids, catalog.names


def write_feature_csv(path: str | Path, ids: Sequence[str], labels: Sequence[int],
                      vectors: Sequence[FeatureVector]) -> None:
    """Header rumour_id,label,<feature names>; one row per rumour."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rumour_id", "label", *vectors[0].names])
        for rid, label, vec in zip(ids, labels, vectors):
            writer.writerow([rid, label, *[repr(v) for v in vec.values]])


def write_timeseries_csv(path: str | Path, labels: Mapping[str, int],
                         series: Sequence[RumourTimeSeries]) -> None:
    """Header rumour_id,interval,label,<feature names>; 20 rows per rumour."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rumour_id", "interval", "label", *series[0].vectors[0].names])
        for ts in series:
            for k, vec in enumerate(ts.vectors, start=1):
                writer.writerow([ts.rumour_id, k, labels[ts.rumour_id],
                                 *[repr(v) for v in vec.values]])
