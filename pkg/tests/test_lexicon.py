import pytest

from drugwatch.labels import DRUG_CLASSES, canonical_drug
from drugwatch.lexicon import (LexiconError, PhraseScanner, compile_lexicon,
                               map_slang, seed_lexicon)


class TestSeedLexicon:
    def test_every_entry_maps_to_a_known_class(self, lexicon):
        assert lexicon.entries
        for phrase, cls in lexicon.entries.items():
            assert cls in DRUG_CLASSES, (phrase, cls)
            assert phrase == phrase.lower()
            assert 1 <= len(phrase.split()) <= 3

    @pytest.mark.parametrize("phrase,cls", [
        ("booze", "Alcohol"), ("liquor", "Alcohol"), ("brew", "Alcohol"),
        ("sauce", "Alcohol"), ("hooch", "Alcohol"), ("whiskey", "Alcohol"),
        ("smack", "Heroin"), ("dope", "Heroin"), ("junk", "Heroin"),
        ("black tar", "Heroin"), ("horse", "Heroin"), ("h", "Heroin"),
        ("china white", "Fentanyl"),
        ("coke", "Cocaine"), ("blow", "Cocaine"), ("snow", "Cocaine"),
        ("powder", "Cocaine"), ("yayo", "Cocaine"), ("white", "Cocaine"),
        ("molly", "Ecstasy"), ("e", "Ecstasy"), ("x", "Ecstasy"),
        ("adam", "Ecstasy"), ("ecstasy", "Ecstasy"), ("mdma", "Ecstasy"),
        ("acid", "LSD"),
        ("meth", "Methamphetamine"), ("crystal meth", "Methamphetamine"),
    ])
    def test_pinned_mappings(self, lexicon, phrase, cls):
        assert lexicon.entries[phrase] == cls

    def test_single_letter_terms_match_standalone_tokens_only(self, lexicon):
        scanner = PhraseScanner(lexicon.entries)
        assert scanner.scan(("took", "h", "today")) == [("Heroin", "h", 1)]
        # 'h' inside a word never matches: scanning is token-level
        assert scanner.scan(("hat",)) == []

    def test_no_vodka_entry(self, lexicon):
        assert "vodka" not in lexicon.entries


class TestScanner:
    def test_longest_match_wins(self, lexicon):
        scanner = PhraseScanner(lexicon.entries)
        hits = scanner.scan(("took", "china", "white", "today"))
        assert hits == [("Fentanyl", "china white", 1)]

    def test_single_word_fallback(self, lexicon):
        scanner = PhraseScanner({"china white": "Fentanyl", "white": "Cocaine"})
        assert scanner.scan(("pure", "white", "stuff")) == [
            ("Cocaine", "white", 1)]
        assert scanner.scan(("china", "white")) == [
            ("Fentanyl", "china white", 0)]

    def test_non_overlapping_consumption(self):
        scanner = PhraseScanner({"a b": 1, "b c": 2})
        # "a b" consumes b, so "b c" cannot start inside it
        assert scanner.scan(("a", "b", "c")) == [(1, "a b", 0)]

    def test_offsets_and_multiple_hits(self, lexicon):
        scanner = PhraseScanner(lexicon.entries)
        hits = scanner.scan(("smack", "then", "more", "smack"))
        assert hits == [("Heroin", "smack", 0), ("Heroin", "smack", 3)]

    def test_map_slang(self, lexicon):
        assert map_slang(("took", "smack",), lexicon) == [
            ("Heroin", "smack", 1)]
        assert map_slang(("nonsense",), lexicon) == []


class TestCompile:
    def test_round_trip_tsv(self, tmp_path, lexicon):
        p = tmp_path / "lex.tsv"
        lines = ["# comment line", ""]
        lines += [f"{k}\t{v}" for k, v in sorted(lexicon.entries.items())]
        p.write_text("\n".join(lines) + "\n")
        again = compile_lexicon(str(p))
        assert again.entries == lexicon.entries

    def test_unknown_class_rejected_with_row(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("smack\tHeroin\nvod\tVodka\n")
        with pytest.raises(LexiconError) as exc:
            compile_lexicon(str(p))
        assert "row 2" in str(exc.value)
        assert "Vodka" in str(exc.value)

    def test_conflicting_duplicate_rejected(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("smack\tHeroin\nsmack\tCocaine\n")
        with pytest.raises(LexiconError):
            compile_lexicon(str(p))

    def test_too_many_words_rejected(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("one two three four\tHeroin\n")
        with pytest.raises(LexiconError):
            compile_lexicon(str(p))


class TestCanonicalDrug:
    @pytest.mark.parametrize("raw,expected", [
        ("Heroin", "Heroin"),
        ("heroin", "Heroin"),
        ("HEROIN", "Heroin"),
        ("meth", "Methamphetamine"),
        ("methamphetamine", "Methamphetamine"),
        ("ecstasy", "Ecstasy"),
        ("mdma", "Ecstasy"),
        ("alcohol", "Alcohol"),
        ("fentanyl", "Fentanyl"),
        ("lsd", "LSD"),
        ("ketamine", "Ketamine"),
        ("cocaine", "Cocaine"),
        ("Vodka", None),
        ("", None),
    ])
    def test_resolution(self, raw, expected):
        assert canonical_drug(raw) == expected
