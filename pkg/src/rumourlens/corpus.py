"""Corpus data model, loading, validation and annotation closure.

A corpus lives in four line-delimited JSON files (tweets, users, followees,
rumours). Every record carries a schema version field ``"v": 1``; unknown
fields are ignored. Loading produces an immutable :class:`Dataset` that is
safe to share across parallel readers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

SCHEMA_VERSION = 1
PAST_TWEETS_CAP = 400

MS_PER_DAY = 86_400_000
MS_PER_HOUR = 3_600_000


class CorpusError(ValueError):
    """Raised on malformed or inconsistent corpus files."""


class AnnotationError(ValueError):
    """Raised when stance annotations cannot be closed."""


class Stance(IntEnum):
    SUPPORT = 1
    NEUTRAL = 0
    AGAINST = -1


class TweetKind(str, Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"
    QUOTE = "quote"
    REPLY = "reply"


@dataclass(frozen=True)
class Tweet:
    tweet_id: str
    rumour_id: str
    author_id: str
    timestamp: int  # UTC epoch milliseconds
    text: str
    kind: TweetKind
    source_tweet_id: Optional[str] = None
    stance: Optional[int] = None  # -1 / 0 / +1, mandatory after closure
    attributes: Mapping[str, float | bool] = field(default_factory=dict)


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    registered_at: int
    verified: bool
    followers_count: int
    friends_count: int
    statuses_count: int
    likes_count: int
    has_description: bool
    has_location: bool
    past_tweets: tuple[tuple[int, str], ...] = ()

    def past_before(self, ts: int) -> tuple[tuple[int, str], ...]:
        """Past tweets strictly before ``ts`` (a rumour start)."""
        return tuple(pt for pt in self.past_tweets if pt[0] < ts)


class FolloweeIndex:
    """Map user_id -> frozen set of followee user_ids."""

    def __init__(self, mapping: Mapping[str, Iterable[str]] | None = None):
        self._map: dict[str, frozenset[str]] = {}
        for uid, fols in (mapping or {}).items():
            fset = frozenset(fols)
            if uid in fset:
                raise CorpusError(f"user {uid} follows itself")
            self._map[uid] = fset

    def followees(self, user_id: str) -> frozenset[str]:
        return self._map.get(user_id, frozenset())

    def follows(self, follower: str, followee: str) -> bool:
        return followee in self._map.get(follower, frozenset())

    def items(self):
        return self._map.items()

    def __len__(self) -> int:
        return len(self._map)


@dataclass(frozen=True)
class Rumour:
    rumour_id: str
    topic: str
    claim: str
    veracity: bool
    started_at: int
    verified_at: int
    tweets: tuple[Tweet, ...] = ()

    @property
    def duration_ms(self) -> int:
        return self.verified_at - self.started_at

    def stance_counts(self) -> tuple[int, int, int]:
        """(support, neutral, against) counts over annotated tweets."""
        sup = sum(1 for t in self.tweets if t.stance == Stance.SUPPORT)
        neu = sum(1 for t in self.tweets if t.stance == Stance.NEUTRAL)
        aga = sum(1 for t in self.tweets if t.stance == Stance.AGAINST)
        return sup, neu, aga


@dataclass(frozen=True)
class Dataset:
    rumours: tuple[Rumour, ...]
    users: Mapping[str, UserProfile]
    followees: FolloweeIndex
    warnings: tuple[str, ...] = ()

    def rumour(self, rumour_id: str) -> Rumour:
        for r in self.rumours:
            if r.rumour_id == rumour_id:
                return r
        raise KeyError(rumour_id)

    def summary_rows(self) -> list[dict]:
        """Per-rumour summary rows: tweets, %support, %against, users, hours."""
        rows = []
        for r in self.rumours:
            n = len(r.tweets)
            sup, _neu, aga = r.stance_counts()
            rows.append({
                "rumour_id": r.rumour_id,
                "topic": r.topic,
                "tweets": n,
                "pct_support": 100.0 * sup / n if n else 0.0,
                "pct_against": 100.0 * aga / n if n else 0.0,
                "users": len({t.author_id for t in r.tweets}),
                "duration_hours": r.duration_ms / MS_PER_HOUR,
            })
        return rows

    def summary_totals(self) -> dict:
        total = sum(len(r.tweets) for r in self.rumours)
        sup = sum(r.stance_counts()[0] for r in self.rumours)
        aga = sum(r.stance_counts()[2] for r in self.rumours)
        users = len({t.author_id for r in self.rumours for t in r.tweets})
        return {
            "rumours": len(self.rumours),
            "tweets": total,
            "pct_support": 100.0 * sup / total if total else 0.0,
            "pct_against": 100.0 * aga / total if total else 0.0,
            "users": users,
        }


@dataclass(frozen=True)
class CorpusPaths:
    tweets: Path
    users: Path
    followees: Path
    rumours: Path

    @classmethod
    def from_dir(cls, directory: str | Path) -> "CorpusPaths":
        d = Path(directory)
        return cls(
            tweets=d / "tweets.jsonl",
            users=d / "users.jsonl",
            followees=d / "followees.jsonl",
            rumours=d / "rumours.jsonl",
        )


def _iter_records(path: Path):
    """Yield (line_number, record) for each non-blank line; validate schema tag."""
    if not path.exists():
        raise CorpusError(f"missing corpus file: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}:{lineno}: malformed record: not an object")
            if rec.get("v") != SCHEMA_VERSION:
                raise CorpusError(f"{path}:{lineno}: missing or unsupported schema version 'v'")
            yield lineno, rec


def _require(rec: dict, key: str, path: Path, lineno: int):
    if key not in rec or rec[key] is None:
        raise CorpusError(f"{path}:{lineno}: malformed record: missing field {key!r}")
    return rec[key]


def _parse_tweet(rec: dict, path: Path, lineno: int) -> Tweet:
    kind_raw = _require(rec, "kind", path, lineno)
    try:
        kind = TweetKind(kind_raw)
    except ValueError:
        raise CorpusError(f"{path}:{lineno}: malformed record: unknown kind {kind_raw!r}") from None
    stance = rec.get("stance")
    if stance is not None and stance not in (-1, 0, 1):
        raise CorpusError(f"{path}:{lineno}: malformed record: stance must be -1/0/1")
    source = rec.get("source_tweet_id")
    tweet = Tweet(
        tweet_id=str(_require(rec, "tweet_id", path, lineno)),
        rumour_id=str(_require(rec, "rumour_id", path, lineno)),
        author_id=str(_require(rec, "author_id", path, lineno)),
        timestamp=int(_require(rec, "timestamp", path, lineno)),
        text=str(rec.get("text", "")),
        kind=kind,
        source_tweet_id=str(source) if source is not None else None,
        stance=int(stance) if stance is not None else None,
        attributes=dict(rec.get("attributes", {})),
    )
    if tweet.kind != TweetKind.ORIGINAL:
        if tweet.source_tweet_id is None:
            raise CorpusError(
                f"{path}:{lineno}: tweet {tweet.tweet_id} of kind {tweet.kind.value} "
                f"has no source_tweet_id")
        if tweet.source_tweet_id == tweet.tweet_id:
            raise CorpusError(f"{path}:{lineno}: tweet {tweet.tweet_id} sources itself")
    return tweet


def _parse_user(rec: dict, path: Path, lineno: int) -> UserProfile:
    past = rec.get("past_tweets", [])
    if not isinstance(past, list):
        raise CorpusError(f"{path}:{lineno}: malformed record: past_tweets must be a list")
    parsed = sorted(((int(ts), str(txt)) for ts, txt in past), key=lambda p: -p[0])
    # Keep the most recent PAST_TWEETS_CAP entries, chronological order.
    parsed = tuple(sorted(parsed[:PAST_TWEETS_CAP]))
    counts = {}
    for key in ("followers_count", "friends_count", "statuses_count", "likes_count"):
        counts[key] = int(rec.get(key, 0))
        if counts[key] < 0:
            raise CorpusError(f"{path}:{lineno}: malformed record: negative {key}")
    return UserProfile(
        user_id=str(_require(rec, "user_id", path, lineno)),
        registered_at=int(_require(rec, "registered_at", path, lineno)),
        verified=bool(rec.get("verified", False)),
        has_description=bool(rec.get("has_description", False)),
        has_location=bool(rec.get("has_location", False)),
        past_tweets=parsed,
        **counts,
    )


def _parse_rumour(rec: dict, path: Path, lineno: int) -> Rumour:
    r = Rumour(
        rumour_id=str(_require(rec, "rumour_id", path, lineno)),
        topic=str(rec.get("topic", "")),
        claim=str(rec.get("claim", "")),
        veracity=bool(_require(rec, "veracity", path, lineno)),
        started_at=int(_require(rec, "started_at", path, lineno)),
        verified_at=int(_require(rec, "verified_at", path, lineno)),
    )
    if r.verified_at <= r.started_at:
        raise CorpusError(f"{path}:{lineno}: rumour {r.rumour_id} has non-positive duration")
    return r


def load_corpus(paths: CorpusPaths | str | Path) -> Dataset:
    """Load and validate the four corpus files.

    Raises :class:`CorpusError` on malformed records (with file and line
    number), unresolved authors, duplicate tweet ids, or timing violations.
    Dangling retweet/quote/reply sources produce warnings, not errors.
    """
    if not isinstance(paths, CorpusPaths):
        paths = CorpusPaths.from_dir(paths)
    warnings: list[str] = []

    rumour_meta: dict[str, Rumour] = {}
    for lineno, rec in _iter_records(paths.rumours):
        r = _parse_rumour(rec, paths.rumours, lineno)
        if r.rumour_id in rumour_meta:
            raise CorpusError(f"{paths.rumours}:{lineno}: duplicate rumour_id {r.rumour_id}")
        rumour_meta[r.rumour_id] = r

    users: dict[str, UserProfile] = {}
    for lineno, rec in _iter_records(paths.users):
        u = _parse_user(rec, paths.users, lineno)
        if u.user_id in users:
            raise CorpusError(f"{paths.users}:{lineno}: duplicate user_id {u.user_id}")
        users[u.user_id] = u

    followee_map: dict[str, list[str]] = {}
    for lineno, rec in _iter_records(paths.followees):
        uid = str(_require(rec, "user_id", paths.followees, lineno))
        fols = rec.get("followees", [])
        if not isinstance(fols, list):
            raise CorpusError(f"{paths.followees}:{lineno}: malformed record: followees must be a list")
        if uid in (str(f) for f in fols):
            raise CorpusError(f"{paths.followees}:{lineno}: user {uid} follows itself")
        followee_map.setdefault(uid, []).extend(str(f) for f in fols)
    followees = FolloweeIndex(followee_map)

    tweets_by_rumour: dict[str, list[Tweet]] = {rid: [] for rid in rumour_meta}
    seen_tweet_ids: set[str] = set()
    for lineno, rec in _iter_records(paths.tweets):
        t = _parse_tweet(rec, paths.tweets, lineno)
        if t.tweet_id in seen_tweet_ids:
            raise CorpusError(f"{paths.tweets}:{lineno}: duplicate tweet_id {t.tweet_id}")
        seen_tweet_ids.add(t.tweet_id)
        if t.rumour_id not in rumour_meta:
            raise CorpusError(f"{paths.tweets}:{lineno}: tweet {t.tweet_id} references "
                              f"unknown rumour {t.rumour_id}")
        if t.author_id not in users:
            raise CorpusError(f"{paths.tweets}:{lineno}: unresolved author {t.author_id} "
                              f"for tweet {t.tweet_id}")
        meta = rumour_meta[t.rumour_id]
        if not (meta.started_at <= t.timestamp <= meta.verified_at):
            raise CorpusError(f"{paths.tweets}:{lineno}: tweet {t.tweet_id} timestamp outside "
                              f"rumour window [{meta.started_at}, {meta.verified_at}]")
        tweets_by_rumour[t.rumour_id].append(t)

    if not seen_tweet_ids or not rumour_meta:
        raise CorpusError("corpus has zero rumours")

    # registered_at must not postdate the user's earliest tweet in the corpus
    earliest: dict[str, int] = {}
    for ts in tweets_by_rumour.values():
        for t in ts:
            prev = earliest.get(t.author_id)
            if prev is None or t.timestamp < prev:
                earliest[t.author_id] = t.timestamp
    for uid, ts in earliest.items():
        if users[uid].registered_at > ts:
            raise CorpusError(f"user {uid} registered after their earliest tweet")

    rumours = []
    for rid in sorted(rumour_meta):
        ts = tweets_by_rumour[rid]
        if not ts:
            raise CorpusError(f"rumour {rid} has no tweets")
        ts.sort(key=lambda t: (t.timestamp, t.tweet_id))
        by_id = {t.tweet_id: t for t in ts}
        for t in ts:
            if t.source_tweet_id is not None and t.source_tweet_id not in by_id:
                warnings.append(f"rumour {rid}: tweet {t.tweet_id} has dangling "
                                f"source {t.source_tweet_id}; treated as tree root")
        rumours.append(replace(rumour_meta[rid], tweets=tuple(ts)))

    return Dataset(rumours=tuple(rumours), users=users, followees=followees,
                   warnings=tuple(warnings))


def _is_untranslatable(t: Tweet) -> bool:
    return bool(t.attributes.get("untranslatable", False))


def close_annotations(dataset: Dataset) -> Dataset:
    """Propagate stances so that every tweet is annotated.

    Retweets inherit the stance of their transitively resolved source tweet;
    non-retweets flagged untranslatable (and dangling retweet roots) default
    to neutral. Any other tweet without a stance is an error.
    """
    closed_rumours = []
    for rumour in dataset.rumours:
        by_id = {t.tweet_id: t for t in rumour.tweets}
        stance_of: dict[str, int] = {}

        unannotated = []
        for t in rumour.tweets:
            if t.kind == TweetKind.RETWEET and t.source_tweet_id in by_id:
                continue  # resolved below
            if t.stance is not None:
                stance_of[t.tweet_id] = t.stance
            elif _is_untranslatable(t):
                stance_of[t.tweet_id] = int(Stance.NEUTRAL)
            else:
                unannotated.append(t)
        for t in unannotated:
            if t.kind == TweetKind.RETWEET:
                raise AnnotationError(
                    f"rumour {rumour.rumour_id}: retweet chain with no annotated root "
                    f"(dangling retweet {t.tweet_id} lacks a stance)")
            raise AnnotationError(
                f"rumour {rumour.rumour_id}: {t.kind.value} tweet {t.tweet_id} lacks a stance")

        def resolve(tweet_id: str, trail: tuple[str, ...] = ()) -> int:
            if tweet_id in stance_of:
                return stance_of[tweet_id]
            if tweet_id in trail:
                raise AnnotationError(f"rumour {rumour.rumour_id}: retweet source cycle "
                                      f"through {tweet_id}")
            t = by_id[tweet_id]
            s = resolve(t.source_tweet_id, trail + (tweet_id,))
            stance_of[tweet_id] = s
            return s

        closed = []
        for t in rumour.tweets:
            s = resolve(t.tweet_id)
            closed.append(t if t.stance == s else replace(t, stance=s))
        closed_rumours.append(replace(rumour, tweets=tuple(closed)))

    return Dataset(rumours=tuple(closed_rumours), users=dataset.users,
                   followees=dataset.followees, warnings=dataset.warnings)


def _canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def tweet_record(t: Tweet) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "tweet_id": t.tweet_id,
        "rumour_id": t.rumour_id,
        "author_id": t.author_id,
        "timestamp": t.timestamp,
        "text": t.text,
        "kind": t.kind.value,
        "source_tweet_id": t.source_tweet_id,
        "stance": t.stance,
        "attributes": dict(t.attributes),
    }


def user_record(u: UserProfile) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "user_id": u.user_id,
        "registered_at": u.registered_at,
        "verified": u.verified,
        "followers_count": u.followers_count,
        "friends_count": u.friends_count,
        "statuses_count": u.statuses_count,
        "likes_count": u.likes_count,
        "has_description": u.has_description,
        "has_location": u.has_location,
        "past_tweets": [[ts, txt] for ts, txt in u.past_tweets],
    }


def rumour_record(r: Rumour) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "rumour_id": r.rumour_id,
        "topic": r.topic,
        "claim": r.claim,
        "veracity": r.veracity,
        "started_at": r.started_at,
        "verified_at": r.verified_at,
    }


def save_corpus(dataset: Dataset, out_dir: str | Path) -> CorpusPaths:
    """Serialise a dataset in canonical order. Round-trips byte-stably."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = CorpusPaths.from_dir(out)

    tweets = sorted((t for r in dataset.rumours for t in r.tweets),
                    key=lambda t: (t.rumour_id, t.timestamp, t.tweet_id))
    with open(paths.tweets, "w", encoding="utf-8") as fh:
        for t in tweets:
            fh.write(_canonical_line(tweet_record(t)) + "\n")

    with open(paths.users, "w", encoding="utf-8") as fh:
        for uid in sorted(dataset.users):
            fh.write(_canonical_line(user_record(dataset.users[uid])) + "\n")

    with open(paths.followees, "w", encoding="utf-8") as fh:
        for uid, fols in sorted(dataset.followees.items()):
            rec = {"v": SCHEMA_VERSION, "user_id": uid, "followees": sorted(fols)}
            fh.write(_canonical_line(rec) + "\n")

    with open(paths.rumours, "w", encoding="utf-8") as fh:
        for r in sorted(dataset.rumours, key=lambda r: r.rumour_id):
            fh.write(_canonical_line(rumour_record(r)) + "\n")

    return paths
