"""Lexicon-driven linguistic scoring of tweet text.

Produces the eight dictionary-category fractions (positive, negative,
insight, cause, tentative, certainty, swear, netspeak) plus word counts.
Commercial dictionaries are proprietary, so a small open demo lexicon ships
with the package and user lexicons load from TSV (``category<TAB>pattern``,
``#`` comments allowed). Patterns are literal tokens or stem wildcards
(``certain*``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import UserProfile

CATEGORIES = (
    "positive", "negative", "insight", "cause",
    "tentative", "certainty", "swear", "netspeak",
)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_TOKEN_RE = re.compile(r"[#@]?\w+")


class LexiconError(ValueError):
    """Raised on invalid lexicon definitions."""


@dataclass(frozen=True)
class Lexicon:
    """Eight word-pattern sets, one per category."""

    literals: Mapping[str, frozenset[str]]
    prefixes: Mapping[str, tuple[str, ...]]

    @classmethod
    def from_patterns(cls, patterns: Mapping[str, Iterable[str]]) -> "Lexicon":
        extra = set(patterns) - set(CATEGORIES)
        if extra:
            raise LexiconError(f"unknown lexicon categories: {sorted(extra)}")
        missing = [c for c in CATEGORIES if not patterns.get(c)]
        if missing:
            raise LexiconError(f"lexicon categories missing or empty: {missing}")
        literals = {}
        prefixes = {}
        for cat in CATEGORIES:
            lits, prefs = set(), set()
            for pat in patterns[cat]:
                pat = pat.strip().lower()
                if not pat:
                    continue
                if pat.endswith("*"):
                    stem = pat[:-1]
                    if not stem:
                        raise LexiconError(f"bare wildcard pattern in category {cat}")
                    prefs.add(stem)
                else:
                    lits.add(pat)
            literals[cat] = frozenset(lits)
            prefixes[cat] = tuple(sorted(prefs))
        return cls(literals=literals, prefixes=prefixes)

    def matches(self, category: str, token: str) -> bool:
        if token in self.literals[category]:
            return True
        return any(token.startswith(p) for p in self.prefixes[category])


@dataclass(frozen=True)
class LinguisticScores:
    """Per-category token fractions in [0, 1] plus the token count."""

    scores: Mapping[str, float]
    word_count: int

    def __getitem__(self, category: str) -> float:
        return self.scores[category]

    @property
    def sentiment(self) -> float:
        return self.scores["positive"] - self.scores["negative"]


def tokenize(text: str) -> list[str]:
    """Lowercase tokens; URLs stripped; # and @ kept as token prefixes."""
    return _TOKEN_RE.findall(_URL_RE.sub(" ", text).lower())


def contains_url(text: str) -> bool:
    return _URL_RE.search(text) is not None


def score_text(text: str, lexicon: Lexicon) -> LinguisticScores:
    """Fraction of tokens matching each category. Empty text scores zero."""
    tokens = tokenize(text)
    n = len(tokens)
    if n == 0:
        return LinguisticScores(scores={c: 0.0 for c in CATEGORIES}, word_count=0)
    scores = {}
    for cat in CATEGORIES:
        hits = sum(1 for tok in tokens if lexicon.matches(cat, tok))
        scores[cat] = hits / n
    return LinguisticScores(scores=scores, word_count=n)


def user_past_sentiment(profile: UserProfile, lexicon: Lexicon) -> float:
    """Mean (positive - negative) score over the profile's past tweets."""
    if not profile.past_tweets:
        return 0.0
    total = 0.0
    for _ts, text in profile.past_tweets:
        total += score_text(text, lexicon).sentiment
    return total / len(profile.past_tweets)


NEGATION_TOKENS = frozenset({
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor",
    "without", "cannot", "cant", "dont", "doesnt", "didnt", "wont", "isnt",
    "wasnt", "arent", "werent", "aint", "couldnt", "shouldnt", "wouldnt",
    "havent", "hasnt", "hadnt",
})


def has_negation(text: str) -> bool:
    """Token-level negation heuristic for corpora without a precomputed flag.

    Matches apostrophe-free contractions as commonly typed ("dont");
    apostrophised forms split under tokenisation ("don't" -> "don", "t")
    and are not recognised. Supply a negation attribute for fidelity.
    """
    return any(tok in NEGATION_TOKENS for tok in tokenize(text))


def parse_depth_fallback(word_count: int) -> int:
    """Heuristic stand-in for dependency-tree depth: ceil(log2(wc + 1)).

    Not a faithful parse depth; use only when the corpus carries no
    precomputed ``parse_depth`` attribute.
    """
    return math.ceil(math.log2(word_count + 1)) if word_count > 0 else 0


def load_lexicon_tsv(path: str | Path) -> Lexicon:
    """Load ``category<TAB>pattern`` lines; blank lines and # comments skipped."""
    patterns: dict[str, list[str]] = {c: [] for c in CATEGORIES}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"{path}:{lineno}: expected category<TAB>pattern")
            cat, pat = parts[0].strip().lower(), parts[1]
            if cat not in CATEGORIES:
                raise LexiconError(f"{path}:{lineno}: unknown category {cat!r}")
            patterns[cat].append(pat)
    return Lexicon.from_patterns(patterns)


_DEFAULT_PATTERNS = {
    "positive": ["good", "great", "love*", "happy", "best", "awesome", "amazing",
                 "nice", "win*", "safe", "hope*", "thank*", "glad", "relief",
                 "wonderful", "excellent"],
    "negative": ["bad", "awful", "terrible", "hate*", "worst", "sad", "fear*",
                 "horri*", "tragic", "fake", "wrong", "angry", "scared", "hoax",
                 "lies", "panic"],
    "insight": ["think*", "know*", "believe*", "understand*", "realiz*", "aware",
                "consider*", "reason*", "sense", "means", "learn*"],
    "cause": ["because", "why", "cause*", "effect*", "hence", "therefore",
              "since", "result*", "led", "leads", "due"],
    "tentative": ["maybe", "perhaps", "seem*", "possib*", "might", "unsure",
                  "guess*", "apparently", "allegedly", "unconfirmed", "rumor*",
                  "rumour*", "doubt*", "if"],
    "certainty": ["always", "definitely", "certain*", "confirm*", "sure",
                  "absolutely", "clearly", "official*", "fact*", "truly",
                  "undeniab*", "proof", "proven", "verified"],
    "swear": ["damn", "hell", "shit*", "fuck*", "crap", "bastard*", "bloody",
              "wtf", "ass"],
    "netspeak": ["b4", "lol", "omg", "wtf", "lmao", "btw", "idk", "smh", "rt",
                 "thx", "pls", "plz", "u", "ur", "gr8", "2day", "imo", "tbh",
                 "fyi", "irl"],
}


def default_lexicon() -> Lexicon:
    """The bundled demo lexicon (small, open, same eight categories)."""
    return Lexicon.from_patterns(_DEFAULT_PATTERNS)


def save_lexicon_tsv(lexicon: Lexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# category<TAB>pattern; * = stem wildcard\n")
        for cat in CATEGORIES:
            for pat in sorted(lexicon.literals[cat]):
                fh.write(f"{cat}\t{pat}\n")
            for stem in lexicon.prefixes[cat]:
                fh.write(f"{cat}\t{stem}*\n")
