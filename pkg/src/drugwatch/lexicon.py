"""Slang lexicon and the longest-match phrase scanner.

The lexicon maps lower-cased surface phrases (1-3 tokens, stored pre-stemming)
to canonical drug classes. The same scanner also drives symptom-cue matching,
so both kinds of mention share one matching rule: scan left to right, longest
window first, consumed spans suppress shorter overlapping matches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .labels import canonical_drug

MAX_PHRASE_TOKENS = 3


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class SlangLexicon:
    entries: dict[str, str]  # phrase -> canonical DrugClass name
    version: str = "seed-1"
    notes: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, phrase: str) -> bool:
        return phrase in self.entries


def _parse_rows(lines, source: str) -> SlangLexicon:
    entries: dict[str, str] = {}
    notes: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise LexiconError(f"{source} row {lineno}: expected phrase<TAB>class")
        phrase = parts[0].strip().lower()
        if not phrase:
            raise LexiconError(f"{source} row {lineno}: empty phrase")
        if len(phrase.split()) > MAX_PHRASE_TOKENS:
            raise LexiconError(
                f"{source} row {lineno}: phrase {phrase!r} longer than "
                f"{MAX_PHRASE_TOKENS} tokens"
            )
        drug = canonical_drug(parts[1])
        if drug is None:
            raise LexiconError(
                f"{source} row {lineno}: unknown canonical class {parts[1].strip()!r}"
            )
        if phrase in entries:
            raise LexiconError(f"{source} row {lineno}: duplicate phrase {phrase!r}")
        entries[phrase] = drug
        if len(parts) > 2 and parts[2].strip():
            notes[phrase] = parts[2].strip()
    return SlangLexicon(entries=entries, notes=notes)


def compile_lexicon(path) -> SlangLexicon:
    """Compile a TSV lexicon file (phrase<TAB>class<TAB>note?, '#' comments)."""
    with open(path, encoding="utf-8") as f:
        return _parse_rows(f, str(path))


def seed_lexicon() -> SlangLexicon:
    """The packaged seed lexicon covering the documented street names."""
    text = resources.files("drugwatch.data").joinpath("slang_lexicon.tsv").read_text("utf-8")
    lex = _parse_rows(text.splitlines(), "slang_lexicon.tsv")
    return SlangLexicon(entries=lex.entries, version="seed-1", notes=lex.notes)


class PhraseScanner:
    """Longest-match-first scanner over tokenized text.

    Built from a phrase -> value map; phrases are space-joined token sequences.
    scan() returns (value, phrase, offset) triples with strictly increasing,
    non-overlapping spans.
    """

    def __init__(self, phrase_map: dict):
        self._by_len: dict[int, dict[tuple[str, ...], object]] = {}
        for phrase, value in phrase_map.items():
            toks = tuple(phrase.split())
            if not toks:
                continue
            self._by_len.setdefault(len(toks), {})[toks] = value
        self.max_len = max(self._by_len, default=0)

    def scan(self, tokens) -> list[tuple]:
        tokens = tuple(tokens)
        n = len(tokens)
        out = []
        i = 0
        while i < n:
            matched = False
            for width in range(min(self.max_len, n - i), 0, -1):
                table = self._by_len.get(width)
                if table is None:
                    continue
                window = tokens[i : i + width]
                if window in table:
                    out.append((table[window], " ".join(window), i))
                    i += width
                    matched = True
                    break
            if not matched:
                i += 1
        return out


def map_slang(clean_tokens, lexicon: SlangLexicon) -> list[tuple[str, str, int]]:
    """Drug mentions in a cleaned (pre-stemming) token stream.

    Returns (DrugClass name, matched phrase, token offset) triples; longer
    phrases win over shorter overlapping ones ("china white" beats "white").
    """
    return PhraseScanner(lexicon.entries).scan(clean_tokens)
