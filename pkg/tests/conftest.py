"""Shared builders and fixtures for the test suite."""

from pathlib import Path

import pytest

from rumourlens.bench import SynthSpec, generate_synthetic
from rumourlens.corpus import (Dataset, FolloweeIndex, Rumour, Tweet, TweetKind,
                               UserProfile, close_annotations)
from rumourlens.lingua import default_lexicon

T0 = 1_457_172_000_000  # 2016-03-05T10:00:00Z
HOUR = 3_600_000
DAY = 86_400_000

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "example4"


def make_user(uid: str, **kw) -> UserProfile:
    defaults = dict(
        user_id=uid, registered_at=T0 - 500 * DAY, verified=False,
        followers_count=100, friends_count=50, statuses_count=1000,
        likes_count=10, has_description=True, has_location=False,
        past_tweets=())
    defaults.update(kw)
    return UserProfile(**defaults)


def make_tweet(tid: str, author: str, ts: int, *, rid: str = "r1",
               kind: str = "original", source: str | None = None,
               stance: int | None = 0, text: str = "", attributes=None) -> Tweet:
    return Tweet(tweet_id=tid, rumour_id=rid, author_id=author, timestamp=ts,
                 text=text, kind=TweetKind(kind), source_tweet_id=source,
                 stance=stance, attributes=attributes or {})


def make_rumour(tweets, *, rid: str = "r1", veracity: bool = True,
                started_at: int = T0, verified_at: int | None = None,
                topic: str = "topic-a", claim: str = "claim") -> Rumour:
    if verified_at is None:
        verified_at = max((t.timestamp for t in tweets), default=T0) + HOUR
    return Rumour(rumour_id=rid, topic=topic, claim=claim, veracity=veracity,
                  started_at=started_at, verified_at=verified_at,
                  tweets=tuple(sorted(tweets, key=lambda t: (t.timestamp, t.tweet_id))))


def make_dataset(rumours, users, followees=None) -> Dataset:
    if isinstance(users, (list, tuple)):
        users = {u.user_id: u for u in users}
    index = followees if isinstance(followees, FolloweeIndex) \
        else FolloweeIndex(followees or {})
    return Dataset(rumours=tuple(rumours), users=users, followees=index)


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def synth24():
    """Small stance-closed synthetic corpus shared by pipeline tests."""
    return close_annotations(generate_synthetic(SynthSpec(n_rumours=24, seed=5)))
