"""Stance-partitioned propagation forests and network attributes.

Nodes are users; a directed edge points from the retweeted user to the
retweeting user and carries the retweet timestamp. Edge inference is
followee-constrained: a retweeter attaches to the most recent earlier
cascade participant they follow, falling back to the cascade's source
author, and roots a new tree when the source is absent.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .corpus import FolloweeIndex, Rumour, Tweet, TweetKind, UserProfile

logger = logging.getLogger(__name__)

STANCE_NAMES = {1: "support", 0: "neutral", -1: "against"}


@dataclass(frozen=True)
class ForestEdge:
    parent: str
    child: str
    ts: int
    via_follow: bool  # True when the child follows the parent


@dataclass(frozen=True)
class QuoteEdge:
    parent: str
    child: str
    ts: int
    via_follow: bool


@dataclass(frozen=True)
class PropagationForest:
    stance: int
    joined_at: Mapping[str, int]        # user_id -> first-appearance timestamp
    edges: tuple[ForestEdge, ...]
    roots: tuple[str, ...]              # tree roots in join-time order
    quote_edges: tuple[QuoteEdge, ...] = ()

    @property
    def node_count(self) -> int:
        return len(self.joined_at)

    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {u: [] for u in self.joined_at}
        for e in self.edges:
            out[e.parent].append(e.child)
        return out

    def tree_sizes(self) -> dict[str, int]:
        """Node count per tree, keyed by root user."""
        kids = self.children()
        sizes = {}
        for root in self.roots:
            count = 0
            stack = [root]
            while stack:
                u = stack.pop()
                count += 1
                stack.extend(kids[u])
            sizes[root] = count
        return sizes


@dataclass(frozen=True)
class NetworkAttributes:
    tree_count: int
    lcc_root_degree: int
    retweets_within_network: float
    quotes_within_network: float
    low_to_high_diffusion: float

    def as_dict(self) -> dict[str, float]:
        return {
            "tree_count": float(self.tree_count),
            "lcc_root_degree": float(self.lcc_root_degree),
            "retweets_within_network": self.retweets_within_network,
            "quotes_within_network": self.quotes_within_network,
            "low_to_high_diffusion": self.low_to_high_diffusion,
        }


def _resolve_cascade_root(tweet: Tweet, by_id: Mapping[str, Tweet]) -> Tweet:
    """Follow the source chain to the cascade's root tweet (or the deepest
    tweet present, when the chain dangles)."""
    seen = {tweet.tweet_id}
    current = tweet
    while current.kind == TweetKind.RETWEET and current.source_tweet_id in by_id:
        nxt = by_id[current.source_tweet_id]
        if nxt.tweet_id in seen:
            break  # defensive; load/closure reject cycles
        seen.add(nxt.tweet_id)
        current = nxt
    return current


def build_forest(
    tweets: Sequence[Tweet],
    followees: FolloweeIndex,
    stance: Optional[int] = None,
    quote_source_authors: Optional[Mapping[str, tuple[str, int]]] = None,
) -> PropagationForest:
    """Build the propagation forest for one stance partition.

    ``tweets`` is the partition (annotation-closed). Non-retweets root
    cascades; each retweet attaches to the latest strictly-earlier cascade
    participant it follows, else to the cascade's source author, else roots
    a new tree. ``quote_source_authors`` maps a quote tweet's source id to
    (author, timestamp) for quotes whose source lies outside the partition.
    """
    if stance is None and tweets:
        stance = tweets[0].stance
    ordered = sorted(tweets, key=lambda t: (t.timestamp, t.tweet_id))
    by_id = {t.tweet_id: t for t in ordered}

    joined_at: dict[str, int] = {}
    edges: list[ForestEdge] = []
    roots: list[str] = []
    quote_edges: list[QuoteEdge] = []
    # cascade root tweet id -> {participant user -> latest appearance ts}
    participants: dict[str, dict[str, int]] = {}
    missing_followees = 0

    for t in ordered:
        root_tweet = _resolve_cascade_root(t, by_id)
        cascade = participants.setdefault(root_tweet.tweet_id, {})

        if t.kind == TweetKind.QUOTE and t.source_tweet_id is not None:
            src = by_id.get(t.source_tweet_id)
            if src is not None:
                quoted, q_ts = src.author_id, src.timestamp
            elif quote_source_authors and t.source_tweet_id in quote_source_authors:
                quoted, q_ts = quote_source_authors[t.source_tweet_id]
            else:
                quoted = None
            if quoted is not None and quoted != t.author_id and t.timestamp > q_ts:
                quote_edges.append(QuoteEdge(
                    parent=quoted, child=t.author_id, ts=t.timestamp,
                    via_follow=followees.follows(t.author_id, quoted)))

        is_attached_retweet = (
            t.kind == TweetKind.RETWEET and root_tweet.tweet_id != t.tweet_id)

        if t.author_id not in joined_at:
            if not is_attached_retweet:
                joined_at[t.author_id] = t.timestamp
                roots.append(t.author_id)
            else:
                followed = followees.followees(t.author_id)
                if not followed:
                    missing_followees += 1
                candidates = [
                    (ts, u) for u, ts in cascade.items()
                    if ts < t.timestamp and u != t.author_id and u in followed
                ]
                if candidates:
                    _ts, parent = max(candidates)
                    via = True
                else:
                    parent = root_tweet.author_id
                    via = followees.follows(t.author_id, parent)
                    if (parent == t.author_id or parent not in joined_at
                            or joined_at[parent] >= t.timestamp
                            or cascade.get(parent, t.timestamp) >= t.timestamp):
                        parent = None
                if parent is None:
                    joined_at[t.author_id] = t.timestamp
                    roots.append(t.author_id)
                else:
                    joined_at[t.author_id] = t.timestamp
                    edges.append(ForestEdge(parent=parent, child=t.author_id,
                                            ts=t.timestamp, via_follow=via))
        cascade[t.author_id] = max(t.timestamp, cascade.get(t.author_id, t.timestamp))

    if missing_followees:
        logger.debug("forest(stance=%s): %d retweeters had empty followee lists; "
                     "degraded to direct-source edges", stance, missing_followees)

    return PropagationForest(
        stance=int(stance) if stance is not None else 0,
        joined_at=joined_at,
        edges=tuple(edges),
        roots=tuple(roots),
        quote_edges=tuple(quote_edges),
    )


def build_stance_forests(
    rumour: Rumour, followees: FolloweeIndex
) -> dict[int, PropagationForest]:
    """Three independent forests per rumour: support (+1), neutral (0), against (-1)."""
    all_by_id = {t.tweet_id: t for t in rumour.tweets}
    quote_sources = {tid: (t.author_id, t.timestamp) for tid, t in all_by_id.items()}
    out = {}
    for stance in (1, 0, -1):
        part = [t for t in rumour.tweets if t.stance == stance]
        out[stance] = build_forest(part, followees, stance=stance,
                                   quote_source_authors=quote_sources)
    return out


def network_attributes(
    forest: PropagationForest, users: Mapping[str, UserProfile]
) -> NetworkAttributes:
    """Compute the network attribute block for one forest.

    Empty partitions yield all zeros. Largest-tree ties break toward the
    earliest root join time (then user id).
    """
    if forest.node_count == 0:
        return NetworkAttributes(0, 0, 0.0, 0.0, 0.0)

    sizes = forest.tree_sizes()
    lcc_root = min(sizes, key=lambda r: (-sizes[r], forest.joined_at[r], r))
    kids = forest.children()
    lcc_degree = len(kids[lcc_root])

    n_edges = len(forest.edges)
    if n_edges:
        within = sum(1 for e in forest.edges if e.via_follow) / n_edges
        low_to_high = sum(
            1 for e in forest.edges
            if _followers(users, e.child) > _followers(users, e.parent)
        ) / n_edges
    else:
        within = 0.0
        low_to_high = 0.0

    n_quotes = len(forest.quote_edges)
    q_within = (sum(1 for e in forest.quote_edges if e.via_follow) / n_quotes
                if n_quotes else 0.0)

    return NetworkAttributes(
        tree_count=len(forest.roots),
        lcc_root_degree=lcc_degree,
        retweets_within_network=within,
        quotes_within_network=q_within,
        low_to_high_diffusion=low_to_high,
    )


def _followers(users: Mapping[str, UserProfile], user_id: str) -> int:
    u = users.get(user_id)
    return u.followers_count if u is not None else 0


def export_forest_records(rumour_id: str, forest: PropagationForest) -> list[dict]:
    """Line-delimited edge records; roots appear with parent=null."""
    stance_name = STANCE_NAMES[forest.stance]
    records = []
    for root in forest.roots:
        records.append({
            "rumour_id": rumour_id, "stance": stance_name, "parent": None,
            "child": root, "ts": forest.joined_at[root], "via_follow": False,
        })
    for e in forest.edges:
        records.append({
            "rumour_id": rumour_id, "stance": stance_name, "parent": e.parent,
            "child": e.child, "ts": e.ts, "via_follow": e.via_follow,
        })
    return records


def write_forests_jsonl(
    path: str | Path, forests_by_rumour: Mapping[str, Mapping[int, PropagationForest]]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rid in sorted(forests_by_rumour):
            for stance in (1, 0, -1):
                for rec in export_forest_records(rid, forests_by_rumour[rid][stance]):
                    fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
