"""Corpus data model and JSONL IO, plus dedup / relevance filter / balance / split.

Wire format is JSON Lines, UTF-8, one object per line. Unlabeled records:
{"id", "text", "source", "created_at"}; labeled records add {"drug",
"symptoms": [str], "flags": [str]} flat on the same object. Keys are sorted
on write so files are byte-stable for a given corpus.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .labels import DRUG_CLASSES, DRUG_INDEX, FLAGS, SymptomVocabulary
from .lexicon import SlangLexicon
from .normalize import NormalizeConfig, Normalizer

MAX_POST_CHARS = 40_000

BALANCE_STRATEGIES = ("downsample_to_min", "none")


class CorpusError(ValueError):
    """Malformed corpus input; message carries file/line context."""


@dataclass(frozen=True)
class Post:
    id: str
    text: str
    created_at: str | None = None  # ISO-8601 when the platform supplied it
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise CorpusError("post id must be non-empty")
        if not self.text:
            raise CorpusError(f"post {self.id}: text must be non-empty")
        if len(self.text) > MAX_POST_CHARS:
            raise CorpusError(
                f"post {self.id}: text exceeds {MAX_POST_CHARS} characters"
            )

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text,
                "created_at": self.created_at, "source": self.source}

    @classmethod
    def from_dict(cls, d: dict) -> "Post":
        for key in ("id", "text"):
            if key not in d:
                raise CorpusError(f"missing field {key}")
        return cls(id=str(d["id"]), text=d["text"],
                   created_at=d.get("created_at"), source=d.get("source", ""))


@dataclass(frozen=True)
class LabeledPost:
    """A post with its gold drug class, symptom label set, and flags.

    Symptoms are canonical label strings (the wire format); indices into a
    SymptomVocabulary are derived on demand via symptom_indices().
    """

    post: Post
    drug: str
    symptoms: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.drug not in DRUG_INDEX:
            raise CorpusError(f"post {self.post.id}: unknown drug class {self.drug!r}")
        for fl in self.flags:
            if fl not in FLAGS:
                raise CorpusError(f"post {self.post.id}: unknown flag {fl!r}")
        if not self.symptoms and not self.flags:
            raise CorpusError(
                f"post {self.post.id}: symptoms may be empty only when a flag is set"
            )
        if len(set(self.symptoms)) != len(self.symptoms):
            raise CorpusError(f"post {self.post.id}: duplicate symptom labels")

    def symptom_indices(self, vocab: SymptomVocabulary) -> frozenset[int]:
        return frozenset(vocab.index(s) for s in self.symptoms)

    def validate_against(self, vocab: SymptomVocabulary) -> None:
        for s in self.symptoms:
            if s not in vocab.labels:
                raise CorpusError(
                    f"post {self.post.id}: symptom {s!r} not in vocabulary"
                )

    def to_dict(self) -> dict:
        d = self.post.to_dict()
        d.update({"drug": self.drug, "symptoms": list(self.symptoms),
                  "flags": list(self.flags)})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LabeledPost":
        if "drug" not in d:
            raise CorpusError("missing field drug")
        return cls(post=Post.from_dict(d), drug=d["drug"],
                   symptoms=tuple(d.get("symptoms", ())),
                   flags=tuple(d.get("flags", ())))


def _load_jsonl(path: str, parse) -> list:
    out = []
    ids: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(
                    f"{path}: line {lineno}: invalid JSON ({e.msg})"
                ) from e
            try:
                rec = parse(obj)
            except CorpusError as e:
                raise CorpusError(f"{path}: line {lineno}: {e}") from e
            pid = rec.id if isinstance(rec, Post) else rec.post.id
            if pid in ids:
                raise CorpusError(f"{path}: line {lineno}: duplicate id {pid!r}")
            ids.add(pid)
            out.append(rec)
    return out


def _save_jsonl(path: str, items: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item.to_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")


def load_corpus(path: str, labeled: bool = False,
                vocab: SymptomVocabulary | None = None) -> list:
    """Load a JSONL corpus; malformed lines raise CorpusError with the line
    number. With labeled=True, records parse as LabeledPost and symptoms are
    checked against vocab when one is given."""
    if not labeled:
        return _load_jsonl(path, Post.from_dict)
    items = _load_jsonl(path, LabeledPost.from_dict)
    if vocab is not None:
        for item in items:
            item.validate_against(vocab)
    return items


def save_corpus(path: str, items: Iterable) -> None:
    _save_jsonl(path, items)


def dedup_key(text: str) -> str:
    return " ".join(text.lower().split())


def _text_of(item) -> str:
    return item.text if isinstance(item, Post) else item.post.text


def deduplicate(items: Sequence) -> list:
    """Drop posts whose lower-cased, space-collapsed text repeats an earlier
    one; first occurrence wins, order otherwise preserved."""
    seen: set[str] = set()
    kept = []
    for item in items:
        key = dedup_key(_text_of(item))
        if key in seen:
            continue
        seen.add(key)
        kept.append(item)
    return kept


def filter_relevant(items: Sequence, lexicon: SlangLexicon,
                    vocab: SymptomVocabulary,
                    cfg: NormalizeConfig = NormalizeConfig()) -> list:
    """Keep posts whose cleaned text contains >= 1 slang or symptom phrase."""
    norm = Normalizer(cfg, lexicon, vocab)
    return [it for it in items if norm.has_relevant_mention(_text_of(it))]


def balance(items: Sequence[LabeledPost], strategy: str = "downsample_to_min",
            seed: int = 0) -> list[LabeledPost]:
    """Downsample every drug class to the smallest class count.

    Requires every drug class to be present under downsample_to_min. The
    within-class draw is seeded and without replacement; output keeps the
    original corpus order.
    """
    if strategy not in BALANCE_STRATEGIES:
        raise ValueError(f"unknown balance strategy: {strategy!r}")
    if strategy == "none":
        return list(items)
    by_class: dict[str, list[int]] = {c: [] for c in DRUG_CLASSES}
    for i, item in enumerate(items):
        by_class[item.drug].append(i)
    empty = [c for c, v in by_class.items() if not v]
    if empty:
        raise CorpusError(
            "downsample_to_min requires every class present; missing: "
            + ", ".join(sorted(empty))
        )
    target = min(len(v) for v in by_class.values())
    rng = random.Random(seed)
    keep: set[int] = set()
    for cls in DRUG_CLASSES:  # fixed class order keeps the draw reproducible
        idxs = by_class[cls]
        keep.update(idxs if len(idxs) <= target else rng.sample(idxs, target))
    return [items[i] for i in sorted(keep)]


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0
    stratify_by_drug: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class SplitResult:
    train: tuple[LabeledPost, ...]
    test: tuple[LabeledPost, ...]
    warnings: tuple[str, ...] = ()


def split(items: Sequence[LabeledPost], cfg: SplitConfig) -> SplitResult:
    """Seeded disjoint train/test split, stratified by drug class by default.

    |train| = floor(train_fraction * n) overall in both modes. Stratified
    mode floors per class first, then tops train up to the overall floor by
    drawing one extra item from the classes with the largest fractional
    remainders (ties in class order), so every class keeps at least its
    floored share. A class with fewer than 2 members goes wholly to train
    with a warning.
    """
    if not items:
        raise ValueError("cannot split an empty corpus")
    rng = random.Random(cfg.seed)
    target = int(cfg.train_fraction * len(items))
    if not cfg.stratify_by_drug:
        order = list(range(len(items)))
        rng.shuffle(order)
        train = [items[i] for i in sorted(order[:target])]
        test = [items[i] for i in sorted(order[target:])]
        return SplitResult(tuple(train), tuple(test), ())

    warnings: list[str] = []
    by_class: dict[str, list[int]] = {c: [] for c in DRUG_CLASSES}
    for i, item in enumerate(items):
        by_class[item.drug].append(i)
    train_idx: list[int] = []
    pools: dict[str, list[int]] = {}  # per-class test candidates, draw order
    in_train = 0
    for cls in DRUG_CLASSES:
        idxs = by_class[cls]
        if not idxs:
            continue
        if len(idxs) < 2:
            warnings.append(f"class {cls}: only {len(idxs)} item(s); kept in train")
            train_idx.extend(idxs)
            in_train += len(idxs)
            continue
        shuffled = idxs[:]
        rng.shuffle(shuffled)
        cut = int(cfg.train_fraction * len(idxs))
        train_idx.extend(shuffled[:cut])
        in_train += cut
        pools[cls] = shuffled[cut:]
    rank = {c: i for i, c in enumerate(DRUG_CLASSES)}
    frac = {cls: cfg.train_fraction * len(by_class[cls])
            - int(cfg.train_fraction * len(by_class[cls])) for cls in pools}
    order = sorted(pools, key=lambda c: (-frac[c], rank[c]))
    deficit = target - in_train
    while deficit > 0:
        moved = False
        for cls in order:
            if deficit == 0:
                break
            if pools[cls]:
                train_idx.append(pools[cls].pop(0))
                deficit -= 1
                moved = True
        if not moved:
            break
    test_idx = [i for pool in pools.values() for i in pool]
    train = [items[i] for i in sorted(train_idx)]
    test = [items[i] for i in sorted(test_idx)]
    return SplitResult(tuple(train), tuple(test), tuple(warnings))
