"""Read-only HTTP service for exploring analysed rumours.

The service never computes anything at request time: a build step exports one
``explorer.json`` artifact (summaries, per-interval feature vectors and
veracity probabilities, stance forests, word clouds) and the endpoints slice
it. Identical requests therefore return identical bodies, and the app can
serve concurrent readers without locking.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path
from typing import Mapping, Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import lingua
from .corpus import Dataset
from .features import FeatureCatalog, default_catalog, extract_timeseries, window_rumour
from .graph import build_stance_forests, export_forest_records
from .learn import LearnError, TrainedModel, predict_proba
from .lingua import Lexicon

ARTIFACT_VERSION = 1
ARTIFACT_FILE = "explorer.json"
INTERVALS = 20

STANCE_COLOURS = {"support": "green", "neutral": "grey", "against": "red"}

WORD_CLOUD_SIZE = 40

# Display-level stopwords for the word cloud; scoring never uses this list.
_STOPWORDS = frozenset(
    "a an and are as at be been but by for from had has have he her his i if in"
    " is it its me my no not of on or our she so that the their them they this"
    " to u ur was we were will with you your".split())


class ServiceError(ValueError):
    """Raised when explorer artifacts are missing or malformed."""


def word_cloud(texts, top: int = WORD_CLOUD_SIZE) -> list[dict]:
    """Token frequencies over the given texts, stopwords and digits dropped."""
    counts: Counter[str] = Counter()
    for text in texts:
        for tok in lingua.tokenize(text):
            if len(tok) < 2 or tok in _STOPWORDS or tok.isdigit():
                continue
            counts[tok] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [{"token": t, "count": n} for t, n in ranked[:top]]


def _histogram(rumour) -> dict:
    sup, neu, aga = rumour.stance_counts()
    return {"support": sup, "neutral": neu, "against": aga}


def build_artifacts(
    dataset: Dataset,
    lexicon: Lexicon,
    model: TrainedModel,
    out_dir: str | Path,
    catalog: Optional[FeatureCatalog] = None,
) -> Path:
    """Export everything the explorer endpoints serve into ``explorer.json``.

    The model scores every rumour at every interval; its catalog version must
    match the catalog used for extraction.
    """
    catalog = catalog or default_catalog()
    if model.catalog_version != catalog.version:
        raise LearnError(f"model built for catalog {model.catalog_version!r}, "
                         f"artifacts use {catalog.version!r}")

    topics: dict[str, list[str]] = {}
    rumours: dict[str, dict] = {}
    intervals: dict[str, list[dict]] = {}
    forests: dict[str, list[dict]] = {}

    for rumour in dataset.rumours:
        rid = rumour.rumour_id
        topics.setdefault(rumour.topic, []).append(rid)

        series = extract_timeseries(rumour, dataset.users, dataset.followees,
                                    lexicon, catalog)
        rows = []
        for k in range(1, INTERVALS + 1):
            cutoff = series.cutoffs[k - 1]
            vec = series.vectors[k - 1]
            rows.append({
                "interval": k,
                "cutoff": cutoff,
                "tweet_count": series.tweet_counts[k - 1],
                "stance_histogram": _histogram(window_rumour(rumour, cutoff)),
                "features": vec.as_dict(),
                "veracity_probability": predict_proba(model, vec),
            })
        intervals[rid] = rows

        final = rows[-1]
        rumours[rid] = {
            "rumour_id": rid,
            "topic": rumour.topic,
            "claim": rumour.claim,
            "started_at": rumour.started_at,
            "verified_at": rumour.verified_at,
            "first_tweet_at": rumour.tweets[0].timestamp,
            "tweet_count": final["tweet_count"],
            "user_count": len({t.author_id for t in rumour.tweets}),
            "stance_histogram": final["stance_histogram"],
            "features": final["features"],
            "veracity_probability": final["veracity_probability"],
            "predicted_true": final["veracity_probability"] >= 0.5,
            "word_cloud": word_cloud(t.text for t in rumour.tweets),
        }

        stance_forests = build_stance_forests(rumour, dataset.followees)
        records = []
        for stance in (1, 0, -1):
            records.extend(export_forest_records(rid, stance_forests[stance]))
        forests[rid] = records

    doc = {
        "v": ARTIFACT_VERSION,
        "catalog_version": catalog.version,
        "model_family": model.family,
        "model_features": list(model.feature_names),
        "topics": [
            {"topic": t, "rumour_count": len(rids), "rumour_ids": rids}
            for t, rids in sorted(topics.items())
        ],
        "rumours": rumours,
        "intervals": intervals,
        "forests": forests,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / ARTIFACT_FILE
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return path


def load_artifacts(artifacts_dir: str | Path) -> dict:
    path = Path(artifacts_dir) / ARTIFACT_FILE
    if not path.exists():
        raise ServiceError(f"missing artifact file: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("v") != ARTIFACT_VERSION:
        raise ServiceError(f"{path}: unsupported artifact version")
    return doc


def create_app(artifacts: str | Path | Mapping) -> FastAPI:
    """Build the FastAPI app over a loaded (or loadable) artifact document."""
    doc = artifacts if isinstance(artifacts, Mapping) else load_artifacts(artifacts)
    app = FastAPI(title="rumour explorer service")
    # read-only data; let a browser UI served from another origin call us
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"])

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"v": ARTIFACT_VERSION, "error": message})

    def rumour_row(rid: str) -> dict:
        r = doc["rumours"][rid]
        return {k: r[k] for k in (
            "rumour_id", "claim", "started_at", "first_tweet_at", "tweet_count",
            "stance_histogram", "veracity_probability", "predicted_true")}

    @app.get("/topics")
    def topics():
        listing = [{"topic": t["topic"], "rumour_count": t["rumour_count"]}
                   for t in doc["topics"]]
        return {"v": ARTIFACT_VERSION, "topics": listing}

    @app.get("/topics/{topic}/rumours")
    def topic_rumours(topic: str):
        for entry in doc["topics"]:
            if entry["topic"] == topic:
                return {"v": ARTIFACT_VERSION, "topic": topic,
                        "rumours": [rumour_row(rid) for rid in entry["rumour_ids"]]}
        return error(404, f"unknown topic {topic}")

    @app.get("/rumours/{rumour_id}/summary")
    def rumour_summary(rumour_id: str):
        r = doc["rumours"].get(rumour_id)
        if r is None:
            return error(404, f"unknown rumour {rumour_id}")
        return {"v": ARTIFACT_VERSION, **r}

    def parse_interval(raw: str):
        try:
            k = int(raw)
        except ValueError:
            return None
        return k if 1 <= k <= INTERVALS else None

    @app.get("/rumours/{rumour_id}/intervals/{k}")
    def rumour_interval(rumour_id: str, k: str):
        if rumour_id not in doc["intervals"]:
            return error(404, f"unknown rumour {rumour_id}")
        interval = parse_interval(k)
        if interval is None:
            return error(400, f"interval out of range 1..{INTERVALS}")
        row = doc["intervals"][rumour_id][interval - 1]
        return {"v": ARTIFACT_VERSION, "rumour_id": rumour_id, **row}

    @app.get("/rumours/{rumour_id}/forest/{k}")
    def rumour_forest(rumour_id: str, k: str):
        if rumour_id not in doc["forests"]:
            return error(404, f"unknown rumour {rumour_id}")
        interval = parse_interval(k)
        if interval is None:
            return error(400, f"interval out of range 1..{INTERVALS}")
        cutoff = doc["intervals"][rumour_id][interval - 1]["cutoff"]

        # Window forests are restrictions of the full forest: a parent always
        # joins strictly before its child, so filtering on join time keeps
        # every included child's parent and leaves root status unchanged.
        stances = []
        for name, colour in STANCE_COLOURS.items():
            nodes, edges, roots = [], [], []
            for rec in doc["forests"][rumour_id]:
                if rec["stance"] != name or rec["ts"] > cutoff:
                    continue
                nodes.append({"user": rec["child"], "joined_at": rec["ts"]})
                if rec["parent"] is None:
                    roots.append(rec["child"])
                else:
                    edges.append({"parent": rec["parent"], "child": rec["child"],
                                  "ts": rec["ts"], "via_follow": rec["via_follow"]})
            stances.append({"stance": name, "colour": colour, "nodes": nodes,
                            "edges": edges, "roots": roots})
        return {"v": ARTIFACT_VERSION, "rumour_id": rumour_id,
                "interval": interval, "cutoff": cutoff, "stances": stances}

    return app
