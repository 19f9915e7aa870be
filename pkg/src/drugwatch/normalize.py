"""Text cleaning, tokenization, stopword removal, stemming, and mention scanning.

Slang and symptom scanning run on the cleaned, pre-stemming token stream
(stemming destroys multi-word surface forms like "china white"); the reduced,
stemmed token list is what feature extraction consumes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from . import stemmer
from .labels import SymptomVocabulary
from .lexicon import PhraseScanner, SlangLexicon

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
_APOSTROPHE_RE = re.compile(r"[’']")


def clean_text(text: str, strip_mentions: bool = True) -> str:
    """Lower-case and strip URLs, @-mentions, '#' markers, emoji, digits and
    punctuation, collapsing whitespace. Idempotent; output is letters and
    single spaces only (non-Latin letters survive, lower-cased)."""
    text = text.lower()
    text = _URL_RE.sub(" ", text)
    if strip_mentions:
        text = _MENTION_RE.sub(" ", text)
    text = _APOSTROPHE_RE.sub("", text)  # keep contractions as one token
    text = "".join(ch if ch.isalpha() or ch.isspace() else " " for ch in text)
    return " ".join(text.split())


def load_stopwords(list_id: str = "english") -> frozenset[str]:
    """Resolve a stopword list id ("english", "none") or a file path."""
    if list_id == "none":
        return frozenset()
    if list_id == "english":
        text = resources.files("drugwatch.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        with open(list_id, encoding="utf-8") as f:
            text = f.read()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@dataclass(frozen=True)
class NormalizeConfig:
    strip_mentions: bool = True
    stemmer: str = "porter_like"  # or "none"
    stopword_list: str = "english"

    def __post_init__(self):
        if self.stemmer not in ("porter_like", "none"):
            raise ValueError(f"unknown stemmer: {self.stemmer!r}")


def tokenize_and_reduce(text: str, cfg: NormalizeConfig, stop: frozenset[str]) -> list[str]:
    """Clean raw text, whitespace-tokenize, drop stopwords, stem the rest.

    Accepts raw or already-cleaned input (cleaning is idempotent).
    """
    cleaned = clean_text(text, strip_mentions=cfg.strip_mentions)
    tokens = [t for t in cleaned.split() if t not in stop]
    if cfg.stemmer == "porter_like":
        tokens = [stemmer.stem(t) for t in tokens]
    return tokens


@dataclass(frozen=True)
class NormalizedDoc:
    """Preprocessing output for one post.

    Mention offsets index clean_tokens (the pre-stemming stream the scanners
    ran on); tokens is the reduced, stemmed list used for features.
    """

    post_id: str
    tokens: tuple[str, ...]
    clean_tokens: tuple[str, ...]
    drug_mentions: tuple[tuple[str, str, int], ...]  # (DrugClass, phrase, offset)
    symptom_mentions: tuple[tuple[int, str, int], ...]  # (vocab index, phrase, offset)

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "tokens": list(self.tokens),
            "clean_tokens": list(self.clean_tokens),
            "drug_mentions": [list(m) for m in self.drug_mentions],
            "symptom_mentions": [list(m) for m in self.symptom_mentions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizedDoc":
        return cls(
            post_id=d["post_id"],
            tokens=tuple(d["tokens"]),
            clean_tokens=tuple(d["clean_tokens"]),
            drug_mentions=tuple((m[0], m[1], m[2]) for m in d["drug_mentions"]),
            symptom_mentions=tuple((m[0], m[1], m[2]) for m in d["symptom_mentions"]),
        )


class Normalizer:
    """Reusable normalize pipeline; scanners are compiled once per instance."""

    def __init__(self, cfg: NormalizeConfig, lexicon: SlangLexicon,
                 vocab: SymptomVocabulary):
        self.cfg = cfg
        self.lexicon = lexicon
        self.vocab = vocab
        self._stop = load_stopwords(cfg.stopword_list)
        self._drug_scanner = PhraseScanner(lexicon.entries)
        self._symptom_scanner = PhraseScanner(vocab.phrase_map())

    def __call__(self, post) -> NormalizedDoc:
        cleaned = clean_text(post.text, strip_mentions=self.cfg.strip_mentions)
        clean_tokens = tuple(cleaned.split())
        drug_mentions = tuple(self._drug_scanner.scan(clean_tokens))
        symptom_mentions = tuple(
            (idx, phrase, off)
            for idx, phrase, off in self._symptom_scanner.scan(clean_tokens)
        )
        tokens = tuple(tokenize_and_reduce(cleaned, self.cfg, self._stop))
        return NormalizedDoc(
            post_id=post.id,
            tokens=tokens,
            clean_tokens=clean_tokens,
            drug_mentions=drug_mentions,
            symptom_mentions=symptom_mentions,
        )

    def has_relevant_mention(self, text: str) -> bool:
        """True when cleaned text contains >= 1 drug or symptom phrase."""
        toks = tuple(clean_text(text, strip_mentions=self.cfg.strip_mentions).split())
        return bool(self._drug_scanner.scan(toks)) or bool(self._symptom_scanner.scan(toks))


def normalize(post, cfg: NormalizeConfig, lexicon: SlangLexicon,
              vocab: SymptomVocabulary) -> NormalizedDoc:
    """One-shot normalize; prefer Normalizer for whole corpora."""
    return Normalizer(cfg, lexicon, vocab)(post)
