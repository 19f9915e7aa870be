"""HTTP facade over the annotation queue for the review UI.

Versioned JSON API under /api/v1; an optional static directory (the built
review UI) is mounted at /. The service holds no state of its own; every
read and write goes through the event-sourced queue.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .annotate import (AnnotationQueue, AnnotationRecord,
                       DuplicateDecisionError, LabelError, QueueError,
                       UnknownItemError)
from .labels import DRUG_CLASSES, FLAGS
from .lexicon import PhraseScanner, SlangLexicon, seed_lexicon
from .normalize import clean_text

API_PREFIX = "/api/v1"


class DecisionBody(BaseModel):
    annotator: str = Field(min_length=1)
    drug: str = Field(min_length=1)
    symptoms: list[str] = []
    flags: list[str] = []


def _record_view(record: AnnotationRecord, drug_scanner: PhraseScanner,
                 symptom_scanner: PhraseScanner, labels: tuple[str, ...]) -> dict:
    toks = tuple(clean_text(record.post.text).split())
    highlights = {
        "drugs": [{"phrase": phrase, "label": value, "offset": off}
                  for value, phrase, off in drug_scanner.scan(toks)],
        "symptoms": [{"phrase": phrase, "label": labels[idx], "offset": off}
                     for idx, phrase, off in symptom_scanner.scan(toks)],
    }
    d = record.to_dict()
    d["post_id"] = record.post_id
    d["highlights"] = highlights
    return d


def create_app(queue: AnnotationQueue, lexicon: SlangLexicon | None = None,
               static_dir: str | None = None) -> FastAPI:
    if lexicon is None:
        lexicon = seed_lexicon()
    drug_scanner = PhraseScanner(lexicon.entries)
    symptom_scanner = PhraseScanner(queue.vocab.phrase_map())
    labels = queue.vocab.labels

    app = FastAPI(title="drugwatch review service", version=__version__)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def view(record: AnnotationRecord) -> dict:
        return _record_view(record, drug_scanner, symptom_scanner, labels)

    @app.get(API_PREFIX + "/meta")
    def meta() -> dict:
        return {
            "api": "v1",
            "service_version": __version__,
            "drug_classes": list(DRUG_CLASSES),
            "symptoms": list(labels),
            "flags": list(FLAGS),
        }

    @app.get(API_PREFIX + "/queue/next")
    def queue_next(annotator: str | None = Query(default=None)):
        if not annotator:
            raise HTTPException(status_code=400,
                                detail="annotator query parameter is required")
        record = queue.next_pending(annotator)
        if record is None:
            return Response(status_code=204)
        return view(record)

    @app.get(API_PREFIX + "/items/{post_id}")
    def get_item(post_id: str) -> dict:
        try:
            record = queue.get(post_id)
        except UnknownItemError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        return view(record)

    @app.post(API_PREFIX + "/items/{post_id}/decision")
    def post_decision(post_id: str, body: DecisionBody) -> dict:
        try:
            record = queue.record_decision(
                post_id, body.annotator, body.drug,
                body.symptoms, body.flags)
        except UnknownItemError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except DuplicateDecisionError as e:
            raise HTTPException(status_code=409, detail=str(e)) from e
        except LabelError as e:
            raise HTTPException(status_code=422, detail=str(e)) from e
        stats = queue.stats()
        return {"post_id": post_id, "status": record.status,
                "corrections": stats["corrected"]}

    @app.post(API_PREFIX + "/items/{post_id}/adjudication")
    def post_adjudication(post_id: str, body: DecisionBody) -> dict:
        try:
            record = queue.adjudicate(post_id, body.annotator, body.drug,
                                      body.symptoms, body.flags)
        except UnknownItemError as e:
            raise HTTPException(status_code=404, detail=str(e)) from e
        except LabelError as e:
            raise HTTPException(status_code=422, detail=str(e)) from e
        stats = queue.stats()
        return {"post_id": post_id, "status": record.status,
                "corrections": stats["corrected"]}

    @app.get(API_PREFIX + "/stats")
    def get_stats() -> dict:
        return queue.stats()

    @app.post(API_PREFIX + "/rounds/{round_no}/close")
    def close_round(round_no: int) -> dict:
        try:
            report = queue.close_round(round_no)
        except QueueError as e:
            raise HTTPException(status_code=409, detail=str(e)) from e
        return report.to_dict()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app
