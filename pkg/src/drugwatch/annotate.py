"""Hybrid human+LLM annotation loop.

An LLM provider suggests labels for each post; suggestions enter a
persistent queue; humans review, correct, or adjudicate; closed rounds
export corrected gold. No suggestion ever becomes gold without a human
decision.

Persistence is an append-only JSONL event log ({seq, ts, kind, payload})
plus a periodic snapshot; replaying the log reconstructs the exact queue
state, so the queue survives crashes after any persisted event. Raw LLM
responses are archived verbatim inside 'suggested' events for audit.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import string
import threading
import time
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .corpus import LabeledPost, Post
from .labels import DRUG_CLASSES, DRUG_INDEX, FLAGS, SymptomVocabulary, \
    canonical_drug, default_vocabulary
from .lexicon import PhraseScanner, SlangLexicon
from .metrics import KappaReport, MultilabelKappaReport, fleiss_kappa, \
    multilabel_kappa
from .normalize import clean_text

SUGGESTION_STATUSES = ("ok", "parse_failed", "transport_failed")
RECORD_STATUSES = ("pending", "decided", "conflict")
MERGE_MODES = ("adjudicate", "majority")


class QueueError(ValueError):
    """Invalid queue operation."""


class UnknownItemError(QueueError):
    pass


class DuplicateDecisionError(QueueError):
    pass


class DuplicateEnqueueError(QueueError):
    pass


class LabelError(QueueError):
    """Decision labels outside the allowed vocabularies."""


class ProviderTransportError(RuntimeError):
    """Network-level provider failure (after any HTTP error or timeout)."""


@dataclass(frozen=True)
class AnnotatorConfig:
    endpoint: str
    model: str
    prompt_template: str = "suggest_v1"
    timeout: float = 30.0
    max_retries: int = 3
    credential_env: str = "DRUGWATCH_LLM_KEY"
    max_tokens: int = 512
    backoff_base: float = 0.5

    def __post_init__(self):
        if not self.endpoint:
            raise ValueError("endpoint must be non-empty")
        if not self.model:
            raise ValueError("model must be non-empty")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class SuggestedAnnotation:
    """Parsed LLM suggestion; drug None means the model answered Unknown.

    status != "ok" carries no labels but always preserves raw_response.
    """

    post_id: str
    status: str
    drug: str | None = None
    symptoms: tuple[str, ...] = ()
    rationale: str = ""
    raw_response: str = ""

    def __post_init__(self):
        if self.status not in SUGGESTION_STATUSES:
            raise ValueError(f"unknown suggestion status: {self.status!r}")

    def to_dict(self) -> dict:
        return {"post_id": self.post_id, "status": self.status,
                "drug": self.drug, "symptoms": list(self.symptoms),
                "rationale": self.rationale, "raw_response": self.raw_response}

    @classmethod
    def from_dict(cls, d: dict) -> "SuggestedAnnotation":
        return cls(post_id=d["post_id"], status=d["status"], drug=d.get("drug"),
                   symptoms=tuple(d.get("symptoms", ())),
                   rationale=d.get("rationale", ""),
                   raw_response=d.get("raw_response", ""))


# ---------------------------------------------------------------- providers

class MockProvider:
    """In-process provider for tests and offline demos.

    labeler maps a rendered prompt to a completion string. fail_every /
    garble_every make every Nth call raise a transport error / return
    unparseable text, so failure paths stay exercised deterministically.
    """

    def __init__(self, labeler: Callable[[str], str], fail_every: int = 0,
                 garble_every: int = 0):
        self.labeler = labeler
        self.fail_every = fail_every
        self.garble_every = garble_every
        self.calls = 0

    @classmethod
    def rule_based(cls, lexicon: SlangLexicon, vocab: SymptomVocabulary,
                   **kwargs) -> "MockProvider":
        return cls(make_rule_labeler(lexicon, vocab), **kwargs)

    def complete(self, request: dict) -> dict:
        self.calls += 1
        if self.fail_every and self.calls % self.fail_every == 0:
            raise ProviderTransportError("mock transport failure")
        if self.garble_every and self.calls % self.garble_every == 0:
            return {"text": "sorry, I cannot help with that request"}
        return {"text": self.labeler(request["prompt"])}


class HttpProvider:
    """Minimal completion-style wire client: POST {model, prompt, max_tokens}
    to the endpoint, expect {"text": ...} back. The credential is read from
    the env var named in the config at call time and never persisted."""

    def __init__(self, cfg: AnnotatorConfig):
        import httpx

        self.cfg = cfg
        self._client = httpx.Client(timeout=cfg.timeout)

    def complete(self, request: dict) -> dict:
        import httpx

        headers = {}
        key = os.environ.get(self.cfg.credential_env, "") if self.cfg.credential_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            r = self._client.post(self.cfg.endpoint, json=request, headers=headers)
        except httpx.HTTPError as e:
            raise ProviderTransportError(str(e)) from e
        if r.status_code != 200:
            raise ProviderTransportError(f"HTTP {r.status_code}")
        try:
            return r.json()
        except ValueError:
            return {"text": r.text}


_POST_MARKER = "Post:\n"


def make_rule_labeler(lexicon: SlangLexicon,
                      vocab: SymptomVocabulary) -> Callable[[str], str]:
    """Deterministic LLM stand-in: scans the post portion of the prompt with
    the slang lexicon and symptom cues and answers in the JSON shape."""
    drug_scanner = PhraseScanner(lexicon.entries)
    symptom_scanner = PhraseScanner(vocab.phrase_map())

    def labeler(prompt: str) -> str:
        text = prompt.rsplit(_POST_MARKER, 1)[-1]
        toks = tuple(clean_text(text).split())
        drugs = drug_scanner.scan(toks)
        symptoms = []
        for idx, _, _ in symptom_scanner.scan(toks):
            label = vocab.labels[idx]
            if label not in symptoms:
                symptoms.append(label)
        return json.dumps({
            "drug": drugs[0][0] if drugs else "Unknown",
            "symptoms": symptoms,
            "rationale": "matched lexicon terms and symptom cues",
        })

    return labeler


# ------------------------------------------------------------ prompt + parse

def load_prompt_template(template_id: str) -> string.Template:
    text = resources.files("drugwatch.prompts").joinpath(
        f"{template_id}.txt").read_text("utf-8")
    return string.Template(text)


_SLANG_EXAMPLES = '"smack" -> Heroin, "china white" -> Fentanyl, "booze" -> Alcohol, "molly" -> Ecstasy'


def render_prompt(template: string.Template, post: Post,
                  vocab: SymptomVocabulary,
                  few_shot: Sequence[LabeledPost] = ()) -> str:
    shots = []
    for ex in few_shot:
        answer = json.dumps({"drug": ex.drug, "symptoms": list(ex.symptoms),
                             "rationale": "reviewed gold example"})
        shots.append(f"{_POST_MARKER}{ex.post.text}\nAnswer: {answer}\n")
    return template.substitute(
        classes="\n".join(f"- {c}" for c in DRUG_CLASSES),
        symptoms="\n".join(f"- {s}" for s in vocab.labels),
        slang_examples=_SLANG_EXAMPLES,
        few_shot="".join(shots),
        post_text=post.text,
    )


_JSON_RE = re.compile(r"\{.*\}", re.S)
_DRUG_LINE_RE = re.compile(r"drug\s*[:=]\s*([^;\n]+)", re.I)
_SYMPTOM_LINE_RE = re.compile(r"symptoms\s*[:=]\s*([^;\n]*)", re.I)


def _resolve_drug(raw: str, lexicon: SlangLexicon) -> tuple[str | None, bool]:
    """(canonical-or-None, ok). None+ok means an explicit Unknown."""
    name = raw.strip().strip('"').strip()
    if not name:
        return None, False
    if name.lower() == "unknown":
        return None, True
    canon = canonical_drug(name)
    if canon is not None:
        return canon, True
    alias = lexicon.entries.get(" ".join(name.lower().split()))
    if alias is not None:
        return alias, True
    return None, False


def parse_suggestion(post_id: str, text: str, lexicon: SlangLexicon,
                     vocab: SymptomVocabulary) -> SuggestedAnnotation:
    """Parse a completion into validated labels; anything that does not
    resolve to the closed vocabularies yields parse_failed with the raw text
    preserved. Labels are never invented."""
    failed = SuggestedAnnotation(post_id=post_id, status="parse_failed",
                                 raw_response=text)
    data = None
    m = _JSON_RE.search(text)
    if m:
        try:
            data = json.loads(m.group(0))
        except json.JSONDecodeError:
            data = None
    if data is None:
        dm = _DRUG_LINE_RE.search(text)
        if dm:
            sm = _SYMPTOM_LINE_RE.search(text)
            raw_syms = sm.group(1) if sm else ""
            data = {"drug": dm.group(1),
                    "symptoms": [s for s in (p.strip() for p in raw_syms.split(","))
                                 if s],
                    "rationale": ""}
    if not isinstance(data, dict) or "drug" not in data:
        return failed
    drug, ok = _resolve_drug(str(data["drug"]), lexicon)
    if not ok:
        return failed
    raw_symptoms = data.get("symptoms", [])
    if not isinstance(raw_symptoms, list):
        return failed
    symptoms: list[str] = []
    known = set(vocab.labels)
    for s in raw_symptoms:
        label = str(s).strip().lower()
        if label not in known:
            return failed
        if label not in symptoms:
            symptoms.append(label)
    return SuggestedAnnotation(
        post_id=post_id, status="ok", drug=drug, symptoms=tuple(symptoms),
        rationale=str(data.get("rationale", "")), raw_response=text)


def suggest_labels(post: Post, cfg: AnnotatorConfig, lexicon: SlangLexicon,
                   vocab: SymptomVocabulary, provider=None,
                   few_shot: Sequence[LabeledPost] = (),
                   template: string.Template | None = None) -> SuggestedAnnotation:
    """One provider call with retry/backoff, parsed into a suggestion.

    Transport failures after max_retries yield status=transport_failed;
    unparseable completions yield parse_failed. Both keep the raw response.
    """
    if provider is None:
        provider = HttpProvider(cfg)
    if template is None:
        template = load_prompt_template(cfg.prompt_template)
    prompt = render_prompt(template, post, vocab, few_shot)
    request = {"model": cfg.model, "prompt": prompt,
               "max_tokens": cfg.max_tokens}
    delay = cfg.backoff_base
    last: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        try:
            response = provider.complete(request)
            break
        except ProviderTransportError as e:
            last = e
            if attempt < cfg.max_retries and delay > 0:
                time.sleep(delay)
                delay *= 2
    else:
        return SuggestedAnnotation(post_id=post.id, status="transport_failed",
                                   raw_response=f"transport error: {last}")
    return parse_suggestion(post.id, str(response.get("text", "")), lexicon, vocab)


# ------------------------------------------------------------------- records

def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class Decision:
    annotator: str
    drug: str
    symptoms: tuple[str, ...]
    flags: tuple[str, ...]
    ts: str

    def to_dict(self) -> dict:
        return {"annotator": self.annotator, "drug": self.drug,
                "symptoms": list(self.symptoms), "flags": list(self.flags),
                "ts": self.ts}

    @classmethod
    def from_dict(cls, d: dict) -> "Decision":
        return cls(annotator=d["annotator"], drug=d["drug"],
                   symptoms=tuple(d["symptoms"]), flags=tuple(d["flags"]),
                   ts=d["ts"])


@dataclass(frozen=True)
class AnnotationRecord:
    post: Post
    round: int
    seq: int  # enqueue order
    suggestion: SuggestedAnnotation | None = None
    decisions: tuple[Decision, ...] = ()
    adjudication: Decision | None = None
    status: str = "pending"

    @property
    def post_id(self) -> str:
        return self.post.id

    def decided_by(self, annotator: str) -> bool:
        return any(d.annotator == annotator for d in self.decisions)

    def to_dict(self) -> dict:
        return {
            "post": self.post.to_dict(),
            "round": self.round,
            "seq": self.seq,
            "suggestion": None if self.suggestion is None else self.suggestion.to_dict(),
            "decisions": [d.to_dict() for d in self.decisions],
            "adjudication": None if self.adjudication is None else self.adjudication.to_dict(),
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            post=Post.from_dict(d["post"]),
            round=d["round"],
            seq=d["seq"],
            suggestion=None if d["suggestion"] is None
            else SuggestedAnnotation.from_dict(d["suggestion"]),
            decisions=tuple(Decision.from_dict(x) for x in d["decisions"]),
            adjudication=None if d["adjudication"] is None
            else Decision.from_dict(d["adjudication"]),
            status=d["status"],
        )


def _compute_status(decisions: tuple[Decision, ...], adjudication,
                    required: int, mode: str) -> str:
    if adjudication is not None:
        return "decided"
    if len(decisions) >= required:
        drugs = {d.drug for d in decisions}
        if len(drugs) == 1 or mode == "majority":
            return "decided"
        return "conflict"
    return "pending"


def _merge_decisions(decisions: Sequence[Decision]) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
    """Majority merge: drug by vote (ties to drug-class order), symptoms by
    per-label majority (at least half the deciders), flags by union. If the
    majority filter empties both symptoms and flags, the symptom union is
    kept so the merged record stays schema-valid."""
    m = len(decisions)
    drug_votes: dict[str, int] = {}
    for d in decisions:
        drug_votes[d.drug] = drug_votes.get(d.drug, 0) + 1
    drug = min(drug_votes, key=lambda c: (-drug_votes[c], DRUG_INDEX[c]))
    sym_votes: dict[str, int] = {}
    for d in decisions:
        for s in d.symptoms:
            sym_votes[s] = sym_votes.get(s, 0) + 1
    symptoms = tuple(s for s in sorted(sym_votes) if sym_votes[s] * 2 >= m)
    flags = tuple(f for f in FLAGS if any(f in d.flags for d in decisions))
    if not symptoms and not flags:
        symptoms = tuple(sorted(sym_votes))
    return drug, symptoms, flags


def record_gold(record: AnnotationRecord) -> LabeledPost:
    """The exported label for a decided record: the adjudicated decision when
    present, otherwise the (merged) human decisions."""
    if record.status != "decided":
        raise QueueError(f"record {record.post_id} is not decided")
    if record.adjudication is not None:
        d = record.adjudication
        drug, symptoms, flags = d.drug, d.symptoms, d.flags
    elif len(record.decisions) == 1:
        d = record.decisions[0]
        drug, symptoms, flags = d.drug, d.symptoms, d.flags
    else:
        drug, symptoms, flags = _merge_decisions(record.decisions)
    return LabeledPost(post=record.post, drug=drug, symptoms=symptoms,
                       flags=flags)


def record_corrected(record: AnnotationRecord) -> bool:
    """True when the human outcome differs from the suggestion's labels (or
    the suggestion failed and humans had to label from scratch). Flags are
    reviewer metadata and do not count as corrections."""
    gold = record_gold(record)
    s = record.suggestion
    if s is None or s.status != "ok":
        return True
    return gold.drug != s.drug or set(gold.symptoms) != set(s.symptoms)


@dataclass(frozen=True)
class RoundReport:
    round: int
    suggested: int
    decided: int
    corrected: int
    correction_rate: float
    kappa_drug: dict | None = None
    kappa_symptoms: dict | None = None

    def to_dict(self) -> dict:
        return {"round": self.round, "suggested": self.suggested,
                "decided": self.decided, "corrected": self.corrected,
                "correction_rate": self.correction_rate,
                "kappa_drug": self.kappa_drug,
                "kappa_symptoms": self.kappa_symptoms}


# --------------------------------------------------------------------- queue

def _validate_decision_labels(drug: str, symptoms: Sequence[str],
                              flags: Sequence[str],
                              vocab: SymptomVocabulary) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
    canon = canonical_drug(drug)
    if canon is None:
        raise LabelError(f"unknown drug class: {drug!r}")
    known = set(vocab.labels)
    seen: list[str] = []
    for s in symptoms:
        label = str(s).strip().lower()
        if label not in known:
            raise LabelError(f"unknown symptom label: {s!r}")
        if label not in seen:
            seen.append(label)
    for f in flags:
        if f not in FLAGS:
            raise LabelError(f"unknown flag: {f!r}")
    if not seen and not flags:
        raise LabelError("a decision needs at least one symptom or one flag")
    return canon, tuple(seen), tuple(dict.fromkeys(flags))


class AnnotationQueue:
    """Event-sourced annotation queue.

    State lives in store_dir/events.jsonl (append-only) with a snapshot in
    store_dir/snapshot.json for fast loads; replaying events over the
    snapshot reconstructs identical state. All mutations serialize through
    one lock; required_decisions and merge_mode are owner configuration, not
    events, so reopen the store with the same settings.
    """

    def __init__(self, store_dir: str, vocab: SymptomVocabulary | None = None,
                 required_decisions: int = 1, merge_mode: str = "adjudicate",
                 snapshot_every: int = 500):
        if required_decisions < 1:
            raise ValueError("required_decisions must be >= 1")
        if merge_mode not in MERGE_MODES:
            raise ValueError(f"unknown merge mode: {merge_mode!r}")
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.events_path = self.store_dir / "events.jsonl"
        self.snapshot_path = self.store_dir / "snapshot.json"
        self.vocab = vocab if vocab is not None else default_vocabulary()
        self.required_decisions = required_decisions
        self.merge_mode = merge_mode
        self.snapshot_every = snapshot_every
        self._lock = threading.Lock()
        self._records: dict[str, AnnotationRecord] = {}
        self._order: list[str] = []
        self._seq = 0
        self._open_round: int | None = None
        self._closed_rounds: set[int] = set()
        self._load()

    # -- persistence

    def _load(self) -> None:
        start_seq = 0
        if self.snapshot_path.exists():
            with open(self.snapshot_path, encoding="utf-8") as f:
                snap = json.load(f)
            self._seq = start_seq = snap["seq"]
            self._open_round = snap["open_round"]
            self._closed_rounds = set(snap["closed_rounds"])
            for rd in snap["records"]:
                rec = AnnotationRecord.from_dict(rd)
                self._records[rec.post_id] = rec
                self._order.append(rec.post_id)
        if self.events_path.exists():
            with open(self.events_path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    ev = json.loads(line)
                    if ev["seq"] <= start_seq:
                        continue
                    self._apply(ev)
                    self._seq = ev["seq"]

    def _append(self, kind: str, payload: dict) -> dict:
        self._seq += 1
        ev = {"seq": self._seq, "ts": _now(), "kind": kind, "payload": payload}
        with open(self.events_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(ev, ensure_ascii=False, sort_keys=True))
            f.write("\n")
        self._apply(ev)
        if self.snapshot_every and self._seq % self.snapshot_every == 0:
            self._write_snapshot()
        return ev

    def _write_snapshot(self) -> None:
        snap = {
            "seq": self._seq,
            "open_round": self._open_round,
            "closed_rounds": sorted(self._closed_rounds),
            "records": [self._records[pid].to_dict() for pid in self._order],
        }
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(snap, f, ensure_ascii=False, sort_keys=True)
        os.replace(tmp, self.snapshot_path)

    # -- event application (no validation: events are established facts)

    def _apply(self, ev: dict) -> None:
        kind, p = ev["kind"], ev["payload"]
        if kind == "suggested":
            rec = AnnotationRecord(
                post=Post.from_dict(p["post"]),
                round=p["round"],
                seq=ev["seq"],
                suggestion=None if p["suggestion"] is None
                else SuggestedAnnotation.from_dict(p["suggestion"]),
            )
            self._records[rec.post_id] = rec
            self._order.append(rec.post_id)
            self._open_round = p["round"]
        elif kind == "decided":
            rec = self._records[p["post_id"]]
            decisions = rec.decisions + (Decision(
                annotator=p["annotator"], drug=p["drug"],
                symptoms=tuple(p["symptoms"]), flags=tuple(p["flags"]),
                ts=p["ts"]),)
            status = _compute_status(decisions, rec.adjudication,
                                     self.required_decisions, self.merge_mode)
            self._records[p["post_id"]] = AnnotationRecord(
                post=rec.post, round=rec.round, seq=rec.seq,
                suggestion=rec.suggestion, decisions=decisions,
                adjudication=rec.adjudication, status=status)
        elif kind == "adjudicated":
            rec = self._records[p["post_id"]]
            adj = Decision(annotator=p["annotator"], drug=p["drug"],
                           symptoms=tuple(p["symptoms"]),
                           flags=tuple(p["flags"]), ts=p["ts"])
            self._records[p["post_id"]] = AnnotationRecord(
                post=rec.post, round=rec.round, seq=rec.seq,
                suggestion=rec.suggestion, decisions=rec.decisions,
                adjudication=adj, status="decided")
        elif kind == "round_closed":
            self._closed_rounds.add(p["round"])
            if self._open_round == p["round"]:
                self._open_round = None
        else:
            raise QueueError(f"unknown event kind: {kind!r}")

    # -- queries

    @property
    def open_round(self) -> int | None:
        return self._open_round

    @property
    def closed_rounds(self) -> tuple[int, ...]:
        return tuple(sorted(self._closed_rounds))

    def __len__(self) -> int:
        return len(self._records)

    def get(self, post_id: str) -> AnnotationRecord:
        rec = self._records.get(post_id)
        if rec is None:
            raise UnknownItemError(f"unknown post id: {post_id!r}")
        return rec

    def records(self, round_no: int | None = None) -> list[AnnotationRecord]:
        recs = (self._records[pid] for pid in self._order)
        if round_no is None:
            return list(recs)
        return [r for r in recs if r.round == round_no]

    def next_pending(self, annotator: str) -> AnnotationRecord | None:
        """Oldest pending record this annotator has not decided yet."""
        with self._lock:
            for pid in self._order:
                rec = self._records[pid]
                if rec.status == "pending" and not rec.decided_by(annotator):
                    return rec
        return None

    def state_fingerprint(self) -> str:
        """Digest of the full queue state, for replay equivalence checks."""
        doc = {
            "seq": self._seq,
            "open_round": self._open_round,
            "closed_rounds": sorted(self._closed_rounds),
            "records": [self._records[pid].to_dict() for pid in self._order],
        }
        blob = json.dumps(doc, ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- mutations

    def enqueue_batch(self, posts: Sequence[Post],
                      suggestions: dict[str, SuggestedAnnotation | None],
                      round_no: int) -> int:
        """Persist one 'suggested' event per post, status pending."""
        if not posts:
            return 0
        with self._lock:
            if round_no in self._closed_rounds:
                raise QueueError(f"round {round_no} is already closed")
            if self._open_round is not None and self._open_round != round_no:
                raise QueueError(
                    f"round {self._open_round} is still open; close it first")
            dupes = [p.id for p in posts if p.id in self._records]
            dupes += [pid for pid, c in Counter(p.id for p in posts).items()
                      if c > 1]
            if dupes:
                raise DuplicateEnqueueError(
                    "already queued or repeated ids: "
                    + ", ".join(sorted(set(dupes))[:10]))
            for post in posts:
                sug = suggestions.get(post.id)
                self._append("suggested", {
                    "post": post.to_dict(),
                    "round": round_no,
                    "suggestion": None if sug is None else sug.to_dict(),
                })
            return len(posts)

    def record_decision(self, post_id: str, annotator: str, drug: str,
                        symptoms: Sequence[str] = (),
                        flags: Sequence[str] = ()) -> AnnotationRecord:
        with self._lock:
            rec = self.get(post_id)
            if not annotator:
                raise LabelError("annotator id must be non-empty")
            if rec.decided_by(annotator):
                raise DuplicateDecisionError(
                    f"annotator {annotator!r} already decided {post_id!r}")
            canon, syms, fls = _validate_decision_labels(
                drug, symptoms, flags, self.vocab)
            self._append("decided", {
                "post_id": post_id, "annotator": annotator, "drug": canon,
                "symptoms": list(syms), "flags": list(fls), "ts": _now()})
            return self._records[post_id]

    def adjudicate(self, post_id: str, annotator: str, drug: str,
                   symptoms: Sequence[str] = (),
                   flags: Sequence[str] = ()) -> AnnotationRecord:
        """Designated adjudicator's decision; wins over member decisions."""
        with self._lock:
            self.get(post_id)
            canon, syms, fls = _validate_decision_labels(
                drug, symptoms, flags, self.vocab)
            self._append("adjudicated", {
                "post_id": post_id, "annotator": annotator, "drug": canon,
                "symptoms": list(syms), "flags": list(fls), "ts": _now()})
            return self._records[post_id]

    def close_round(self, round_no: int) -> RoundReport:
        with self._lock:
            if self._open_round != round_no:
                raise QueueError(f"round {round_no} is not the open round")
            recs = [self._records[pid] for pid in self._order
                    if self._records[pid].round == round_no]
            unfinished = [r for r in recs if r.status != "decided"]
            if unfinished:
                counts: dict[str, int] = {}
                for r in unfinished:
                    counts[r.status] = counts.get(r.status, 0) + 1
                raise QueueError(
                    f"round {round_no} has unfinished records: "
                    + ", ".join(f"{v} {k}" for k, v in sorted(counts.items())))
            report = self._round_report(round_no, recs)
            self._append("round_closed", {"round": round_no,
                                          "report": report.to_dict()})
            self._write_snapshot()
            return report

    def _round_report(self, round_no: int, recs: list[AnnotationRecord]) -> RoundReport:
        decided = [r for r in recs if r.status == "decided"]
        corrected = sum(1 for r in decided if record_corrected(r))
        rate = corrected / len(decided) if decided else 0.0
        kd, ks = self._kappas(decided)
        return RoundReport(round=round_no, suggested=len(recs),
                           decided=len(decided), corrected=corrected,
                           correction_rate=rate,
                           kappa_drug=kd.to_dict() if kd else None,
                           kappa_symptoms=ks.to_dict() if ks else None)

    def _kappas(self, recs: list[AnnotationRecord]):
        annotators = sorted({d.annotator for r in recs for d in r.decisions})
        if len(annotators) < 2:
            return None, None
        complete = [r for r in recs
                    if all(r.decided_by(a) for a in annotators)]
        if not complete:
            return None, None
        return agreement_report(complete, annotators, self.vocab)

    def export_gold(self, round_no: int | None = None) -> list[LabeledPost]:
        """Corrected gold for decided records only, in enqueue order."""
        with self._lock:
            out = []
            for pid in self._order:
                rec = self._records[pid]
                if round_no is not None and rec.round != round_no:
                    continue
                if rec.status != "decided":
                    continue
                out.append(record_gold(rec))
            return out

    def stats(self) -> dict:
        with self._lock:
            counts = {"pending": 0, "decided": 0, "conflict": 0}
            for pid in self._order:
                counts[self._records[pid].status] += 1
            decided = [self._records[pid] for pid in self._order
                       if self._records[pid].status == "decided"]
            corrected = sum(1 for r in decided if record_corrected(r))
            rate = corrected / len(decided) if decided else 0.0
            kd, ks = self._kappas(decided)
            if self._open_round is not None:
                current = self._open_round
            elif self._closed_rounds:
                current = max(self._closed_rounds)
            else:
                current = 0
            return {
                "pending": counts["pending"],
                "decided": counts["decided"],
                "conflict": counts["conflict"],
                "corrected": corrected,
                "correction_rate": rate,
                "kappa_drug": kd.kappa if kd else None,
                "kappa_symptoms": ks.macro_kappa if ks else None,
                "round": current,
            }


def agreement_report(records: Sequence[AnnotationRecord],
                     annotator_ids: Sequence[str],
                     vocab: SymptomVocabulary | None = None
                     ) -> tuple[KappaReport, MultilabelKappaReport]:
    """Drug and symptom agreement across the listed annotators.

    Every record must carry a decision from every listed annotator; missing
    (item, annotator) pairs are reported in the error.
    """
    if vocab is None:
        vocab = default_vocabulary()
    ids = list(annotator_ids)
    if len(ids) < 2:
        raise ValueError("need at least 2 annotators")
    missing = [(r.post_id, a) for r in records for a in ids
               if not r.decided_by(a)]
    if missing:
        shown = ", ".join(f"({pid}, {a})" for pid, a in missing[:5])
        raise ValueError(f"missing decisions for {len(missing)} (item, "
                         f"annotator) pairs: {shown}")
    if not records:
        raise ValueError("no records to compare")
    by_ann = {a: {} for a in ids}
    for r in records:
        for d in r.decisions:
            if d.annotator in by_ann:
                by_ann[d.annotator][r.post_id] = d
    table = []
    for r in records:
        row = [0] * len(DRUG_CLASSES)
        for a in ids:
            row[DRUG_INDEX[by_ann[a][r.post_id].drug]] += 1
        table.append(row)
    drug_kappa = fleiss_kappa(table, len(ids))
    per_annotator_sets = [
        [frozenset(by_ann[a][r.post_id].symptoms) for r in records]
        for a in ids
    ]
    symptom_kappa = multilabel_kappa(per_annotator_sets, vocab)
    return drug_kappa, symptom_kappa


# ---------------------------------------------------------------- the loop

class AutoReviewer:
    """Scripted reviewer that decides every record from a truth table
    (post_id -> {"drug", "symptoms", "flags"}). Stands in for the human
    review step in tests and demos."""

    def __init__(self, truth: dict[str, dict], annotator: str = "auto-reviewer"):
        self.truth = truth
        self.annotator = annotator

    def __call__(self, record: AnnotationRecord) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
        t = self.truth[record.post_id]
        return t["drug"], tuple(t["symptoms"]), tuple(t.get("flags", ()))


class AcceptReviewer:
    """Reviewer that accepts every ok suggestion unchanged. Records whose
    suggestion failed raise, so use it only with clean providers."""

    def __init__(self, annotator: str = "accept-reviewer"):
        self.annotator = annotator

    def __call__(self, record: AnnotationRecord) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
        s = record.suggestion
        if s is None or s.status != "ok" or s.drug is None:
            raise QueueError(
                f"record {record.post_id} has no accepted-able suggestion")
        return s.drug, s.symptoms, ()


def run_round(batch: Sequence[Post], cfg: AnnotatorConfig,
              queue: AnnotationQueue, round_no: int, lexicon: SlangLexicon,
              provider=None, reviewer=None, few_shot_k: int = 5,
              gold_path: str | None = None) -> RoundReport | None:
    """Suggest labels for a batch, enqueue it, optionally auto-review, and
    close the round.

    Earlier rounds' corrected gold feeds the prompt as few-shot examples
    (the round-to-round improvement step). With reviewer=None the round is
    left open for human review over the HTTP service and None is returned;
    call queue.close_round(round_no) once decisions are complete.
    """
    if queue.open_round is not None:
        raise QueueError(f"round {queue.open_round} is still open")
    vocab = queue.vocab
    template = load_prompt_template(cfg.prompt_template)
    gold_so_far = queue.export_gold()
    few_shot = gold_so_far[-few_shot_k:] if few_shot_k > 0 else []
    suggestions: dict[str, SuggestedAnnotation | None] = {}
    for post in batch:
        suggestions[post.id] = suggest_labels(
            post, cfg, lexicon, vocab, provider=provider,
            few_shot=few_shot, template=template)
    queue.enqueue_batch(list(batch), suggestions, round_no)
    if reviewer is None:
        return None
    for post in batch:
        record = queue.get(post.id)
        drug, symptoms, flags = reviewer(record)
        queue.record_decision(post.id, reviewer.annotator, drug, symptoms, flags)
    report = queue.close_round(round_no)
    if gold_path is not None:
        from .corpus import save_corpus

        save_corpus(gold_path, queue.export_gold(round_no))
    return report
