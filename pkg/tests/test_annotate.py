import json
import os

import httpx
import pytest

from drugwatch.annotate import (AcceptReviewer, AnnotationQueue,
                                AnnotationRecord, AnnotatorConfig,
                                AutoReviewer, Decision,
                                DuplicateDecisionError, DuplicateEnqueueError,
                                HttpProvider, LabelError, MockProvider,
                                ProviderTransportError, QueueError,
                                SuggestedAnnotation, UnknownItemError,
                                agreement_report, load_prompt_template,
                                parse_suggestion, record_corrected,
                                record_gold, render_prompt, run_round,
                                suggest_labels)
from drugwatch.corpus import LabeledPost, Post


def _post(i, text):
    return Post(id=f"p{i:03d}", text=text, source="test")


@pytest.fixture
def queue(tmp_path, vocab):
    return AnnotationQueue(str(tmp_path / "store"), vocab=vocab)


class TestAnnotatorConfig:
    def test_defaults(self, annotator_config):
        assert annotator_config.prompt_template == "suggest_v1"
        assert annotator_config.credential_env == "DRUGWATCH_LLM_KEY"

    def test_validation(self):
        with pytest.raises(ValueError):
            AnnotatorConfig(endpoint="", model="m")
        with pytest.raises(ValueError):
            AnnotatorConfig(endpoint="http://x", model="")
        with pytest.raises(ValueError):
            AnnotatorConfig(endpoint="http://x", model="m", timeout=0)
        with pytest.raises(ValueError):
            AnnotatorConfig(endpoint="http://x", model="m", max_retries=-1)


class TestSuggestedAnnotation:
    def test_round_trip(self):
        s = SuggestedAnnotation(post_id="p1", status="ok", drug="Heroin",
                                symptoms=("nausea",), rationale="r",
                                raw_response="{}")
        assert SuggestedAnnotation.from_dict(s.to_dict()) == s

    def test_unknown_status_rejected(self):
        with pytest.raises(ValueError):
            SuggestedAnnotation(post_id="p1", status="maybe")

    def test_unknown_drug_is_none(self):
        s = SuggestedAnnotation(post_id="p1", status="ok", drug=None)
        assert s.drug is None


class TestPromptRendering:
    def test_template_renders_all_sections(self, vocab):
        template = load_prompt_template("suggest_v1")
        post = _post(1, "took some smack and passed out")
        text = render_prompt(template, post, vocab)
        assert "took some smack and passed out" in text
        assert "- Heroin" in text
        assert "- nausea" in text

    def test_few_shot_examples_included(self, vocab, tiny_labeled):
        template = load_prompt_template("suggest_v1")
        post = _post(2, "feeling dizzy after some molly")
        text = render_prompt(template, post, vocab,
                             few_shot=tiny_labeled[:2])
        for ex in tiny_labeled[:2]:
            assert ex.post.text in text
            assert ex.drug in text

    def test_unknown_template_raises(self):
        with pytest.raises(FileNotFoundError):
            load_prompt_template("no_such_template")


class TestParseSuggestion:
    def test_clean_json(self, lexicon, vocab):
        text = json.dumps({"drug": "Heroin", "symptoms": ["nausea", "coma"],
                           "rationale": "because"})
        s = parse_suggestion("p1", text, lexicon, vocab)
        assert s.status == "ok"
        assert s.drug == "Heroin"
        assert s.symptoms == ("nausea", "coma")
        assert s.rationale == "because"
        assert s.raw_response == text

    def test_json_embedded_in_prose(self, lexicon, vocab):
        text = 'Sure! Here is my answer:\n{"drug": "Cocaine", "symptoms": []}\nHope that helps.'
        s = parse_suggestion("p1", text, lexicon, vocab)
        assert s.status == "ok"
        assert s.drug == "Cocaine"

    def test_key_value_fallback(self, lexicon, vocab):
        s = parse_suggestion("p1", "drug: Ecstasy; symptoms: nausea, sweating",
                             lexicon, vocab)
        assert s.status == "ok"
        assert s.drug == "Ecstasy"
        assert s.symptoms == ("nausea", "sweating")

    def test_slang_alias_resolves(self, lexicon, vocab):
        s = parse_suggestion("p1", '{"drug": "smack", "symptoms": []}',
                             lexicon, vocab)
        assert s.status == "ok"
        assert s.drug == "Heroin"

    def test_explicit_unknown_is_ok_with_none(self, lexicon, vocab):
        s = parse_suggestion("p1", '{"drug": "Unknown", "symptoms": []}',
                             lexicon, vocab)
        assert s.status == "ok"
        assert s.drug is None

    def test_unresolvable_drug_fails(self, lexicon, vocab):
        s = parse_suggestion("p1", '{"drug": "Vodka", "symptoms": []}',
                             lexicon, vocab)
        assert s.status == "parse_failed"
        assert s.drug is None
        assert "Vodka" in s.raw_response

    def test_invalid_symptom_fails_whole_parse(self, lexicon, vocab):
        s = parse_suggestion(
            "p1", '{"drug": "Heroin", "symptoms": ["nausea", "sleepiness"]}',
            lexicon, vocab)
        assert s.status == "parse_failed"
        assert s.symptoms == ()

    def test_symptom_case_and_dupes_normalized(self, lexicon, vocab):
        s = parse_suggestion(
            "p1", '{"drug": "Heroin", "symptoms": ["Nausea", "nausea "]}',
            lexicon, vocab)
        assert s.status == "ok"
        assert s.symptoms == ("nausea",)

    def test_free_text_refusal_fails(self, lexicon, vocab):
        s = parse_suggestion("p1", "sorry, I cannot help with that",
                             lexicon, vocab)
        assert s.status == "parse_failed"

    def test_non_list_symptoms_fails(self, lexicon, vocab):
        s = parse_suggestion("p1", '{"drug": "Heroin", "symptoms": "nausea"}',
                             lexicon, vocab)
        assert s.status == "parse_failed"


class _FlakyProvider:
    """Raises a transport error for the first n calls, then delegates."""

    def __init__(self, inner, fail_first):
        self.inner = inner
        self.fail_first = fail_first
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        if self.calls <= self.fail_first:
            raise ProviderTransportError("flaky")
        return self.inner.complete(request)


class TestSuggestLabels:
    def test_rule_provider_round_trip(self, annotator_config, lexicon, vocab):
        provider = MockProvider.rule_based(lexicon, vocab)
        post = _post(1, "took some smack last night and passed out")
        s = suggest_labels(post, annotator_config, lexicon, vocab,
                           provider=provider)
        assert s.status == "ok"
        assert s.drug == "Heroin"
        assert "fainting" in s.symptoms  # cue phrase "passed out"

    def test_no_mention_yields_unknown(self, annotator_config, lexicon, vocab):
        provider = MockProvider.rule_based(lexicon, vocab)
        post = _post(2, "lovely weather in the park today")
        s = suggest_labels(post, annotator_config, lexicon, vocab,
                           provider=provider)
        assert s.status == "ok"
        assert s.drug is None

    def test_transport_failure_exhausts_retries(self, annotator_config,
                                                lexicon, vocab):
        provider = MockProvider(lambda p: "{}", fail_every=1)
        post = _post(3, "anything")
        s = suggest_labels(post, annotator_config, lexicon, vocab,
                           provider=provider)
        assert s.status == "transport_failed"
        assert provider.calls == annotator_config.max_retries + 1
        assert "transport error" in s.raw_response

    def test_recovers_after_transient_failures(self, annotator_config,
                                               lexicon, vocab):
        inner = MockProvider.rule_based(lexicon, vocab)
        provider = _FlakyProvider(inner, fail_first=2)
        post = _post(4, "sniffed some china white")
        s = suggest_labels(post, annotator_config, lexicon, vocab,
                           provider=provider)
        assert s.status == "ok"
        assert s.drug == "Fentanyl"
        assert provider.calls == 3

    def test_garbled_response_is_parse_failed(self, annotator_config,
                                              lexicon, vocab):
        provider = MockProvider.rule_based(lexicon, vocab, garble_every=1)
        post = _post(5, "took some smack")
        s = suggest_labels(post, annotator_config, lexicon, vocab,
                           provider=provider)
        assert s.status == "parse_failed"
        assert s.raw_response


class TestHttpProvider:
    def _patched(self, monkeypatch, handler):
        transport = httpx.MockTransport(handler)
        real = httpx.Client
        monkeypatch.setattr(
            httpx, "Client",
            lambda timeout=None: real(transport=transport, timeout=timeout))

    def test_sends_bearer_header_from_env(self, monkeypatch, annotator_config):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={"text": "{}"})

        self._patched(monkeypatch, handler)
        monkeypatch.setenv(annotator_config.credential_env, "s3cr3t-token")
        provider = HttpProvider(annotator_config)
        out = provider.complete({"model": "m", "prompt": "p", "max_tokens": 8})
        assert out == {"text": "{}"}
        assert seen["auth"] == "Bearer s3cr3t-token"
        assert seen["body"]["model"] == "m"

    def test_no_credential_sends_no_header(self, monkeypatch,
                                           annotator_config):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"text": "{}"})

        self._patched(monkeypatch, handler)
        monkeypatch.delenv(annotator_config.credential_env, raising=False)
        HttpProvider(annotator_config).complete({"prompt": "p"})
        assert seen["auth"] is None

    def test_non_200_raises_transport_error(self, monkeypatch,
                                            annotator_config):
        self._patched(monkeypatch,
                      lambda request: httpx.Response(500, text="boom"))
        with pytest.raises(ProviderTransportError, match="500"):
            HttpProvider(annotator_config).complete({"prompt": "p"})

    def test_non_json_body_wrapped_as_text(self, monkeypatch,
                                           annotator_config):
        self._patched(monkeypatch,
                      lambda request: httpx.Response(200, text="plain answer"))
        out = HttpProvider(annotator_config).complete({"prompt": "p"})
        assert out == {"text": "plain answer"}


def _enqueue(queue, posts, round_no=1, suggestions=None):
    sugs = suggestions or {}
    queue.enqueue_batch(posts, {p.id: sugs.get(p.id) for p in posts},
                        round_no)


def _ok_suggestion(post, drug, symptoms=()):
    return SuggestedAnnotation(post_id=post.id, status="ok", drug=drug,
                               symptoms=tuple(symptoms), raw_response="{}")


class TestQueueBasics:
    def test_enqueue_creates_pending_records(self, queue):
        posts = [_post(i, f"text {i}") for i in range(3)]
        _enqueue(queue, posts)
        assert len(queue) == 3
        assert queue.open_round == 1
        for p in posts:
            rec = queue.get(p.id)
            assert rec.status == "pending"
            assert rec.round == 1

    def test_duplicate_enqueue_rejected(self, queue):
        posts = [_post(1, "a")]
        _enqueue(queue, posts)
        with pytest.raises(DuplicateEnqueueError, match="p001"):
            _enqueue(queue, [_post(1, "a again")])

    def test_repeated_ids_within_batch_rejected(self, queue):
        with pytest.raises(DuplicateEnqueueError):
            _enqueue(queue, [_post(1, "a"), _post(1, "b")])

    def test_cannot_enqueue_into_other_open_round(self, queue):
        _enqueue(queue, [_post(1, "a")], round_no=1)
        with pytest.raises(QueueError, match="still open"):
            _enqueue(queue, [_post(2, "b")], round_no=2)

    def test_cannot_reopen_closed_round(self, queue):
        _enqueue(queue, [_post(1, "a")])
        queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        queue.close_round(1)
        with pytest.raises(QueueError, match="closed"):
            _enqueue(queue, [_post(2, "b")], round_no=1)

    def test_unknown_item(self, queue):
        with pytest.raises(UnknownItemError):
            queue.get("nope")

    def test_records_filters_by_round(self, queue):
        _enqueue(queue, [_post(1, "a")], round_no=1)
        queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        queue.close_round(1)
        _enqueue(queue, [_post(2, "b")], round_no=2)
        assert [r.post_id for r in queue.records()] == ["p001", "p002"]
        assert [r.post_id for r in queue.records(2)] == ["p002"]

    def test_empty_batch_is_noop(self, queue):
        assert queue.enqueue_batch([], {}, 1) == 0
        assert queue.open_round is None


class TestDecisions:
    def test_single_decision_decides_by_default(self, queue):
        _enqueue(queue, [_post(1, "a")])
        rec = queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        assert rec.status == "decided"
        assert rec.decisions[0].annotator == "ann1"

    def test_duplicate_decision_rejected(self, queue):
        _enqueue(queue, [_post(1, "a")])
        queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        with pytest.raises(DuplicateDecisionError,
                           match="'ann1' already decided 'p001'"):
            queue.record_decision("p001", "ann1", "Heroin", ["coma"])

    def test_label_validation(self, queue):
        _enqueue(queue, [_post(1, "a")])
        with pytest.raises(LabelError, match="unknown drug"):
            queue.record_decision("p001", "ann1", "Vodka", ["nausea"])
        with pytest.raises(LabelError, match="unknown symptom"):
            queue.record_decision("p001", "ann1", "Heroin", ["sleepy"])
        with pytest.raises(LabelError, match="unknown flag"):
            queue.record_decision("p001", "ann1", "Heroin", ["nausea"],
                                  flags=["starred"])
        with pytest.raises(LabelError, match="at least one"):
            queue.record_decision("p001", "ann1", "Heroin", [])

    def test_flag_only_decision_is_valid(self, queue):
        _enqueue(queue, [_post(1, "a")])
        rec = queue.record_decision("p001", "ann1", "Heroin", [],
                                    flags=["withdrawal_suspected"])
        assert rec.status == "decided"

    def test_drug_alias_not_accepted_for_decisions(self, queue):
        # human decisions must use canonical class names, not slang
        _enqueue(queue, [_post(1, "a")])
        with pytest.raises(LabelError):
            queue.record_decision("p001", "ann1", "smack", ["nausea"])

    def test_empty_annotator_rejected(self, queue):
        _enqueue(queue, [_post(1, "a")])
        with pytest.raises(LabelError, match="annotator"):
            queue.record_decision("p001", "", "Heroin", ["nausea"])


class TestMultiAnnotator:
    def _queue(self, tmp_path, vocab, **kw):
        return AnnotationQueue(str(tmp_path / "store"), vocab=vocab, **kw)

    def test_pending_until_required_met(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=2)
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        assert q.get("p001").status == "pending"
        q.record_decision("p001", "ann2", "Heroin", ["nausea"])
        assert q.get("p001").status == "decided"

    def test_conflicting_drugs_flag_conflict(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=2)
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        q.record_decision("p001", "ann2", "Fentanyl", ["nausea"])
        assert q.get("p001").status == "conflict"

    def test_adjudication_resolves_conflict_and_wins(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=2)
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        q.record_decision("p001", "ann2", "Fentanyl", ["coma"])
        rec = q.adjudicate("p001", "lead", "Fentanyl", ["nausea", "coma"])
        assert rec.status == "decided"
        gold = record_gold(rec)
        assert gold.drug == "Fentanyl"
        assert set(gold.symptoms) == {"nausea", "coma"}

    def test_majority_mode_merges_without_adjudication(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=3,
                        merge_mode="majority")
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea", "coma"])
        q.record_decision("p001", "ann2", "Heroin", ["nausea"])
        q.record_decision("p001", "ann3", "Fentanyl", ["sweating"])
        rec = q.get("p001")
        assert rec.status == "decided"
        gold = record_gold(rec)
        assert gold.drug == "Heroin"  # 2 of 3 votes
        assert "nausea" in gold.symptoms  # 2 of 3 deciders
        assert "sweating" not in gold.symptoms  # 1 of 3

    def test_majority_drug_tie_breaks_by_class_order(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=2,
                        merge_mode="majority")
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        q.record_decision("p001", "ann2", "Alcohol", ["nausea"])
        gold = record_gold(q.get("p001"))
        assert gold.drug == "Alcohol"  # earlier in the fixed class order

    def test_next_pending_skips_own_decisions(self, tmp_path, vocab):
        q = self._queue(tmp_path, vocab, required_decisions=2)
        _enqueue(q, [_post(1, "a"), _post(2, "b")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        nxt = q.next_pending("ann1")
        assert nxt is not None and nxt.post_id == "p002"
        nxt2 = q.next_pending("ann2")
        assert nxt2 is not None and nxt2.post_id == "p001"

    def test_next_pending_none_when_done(self, queue):
        _enqueue(queue, [_post(1, "a")])
        queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        assert queue.next_pending("ann1") is None


class TestCloseRound:
    def test_close_requires_open_round(self, queue):
        with pytest.raises(QueueError, match="not the open round"):
            queue.close_round(1)

    def test_close_reports_unfinished_counts(self, tmp_path, vocab):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab,
                            required_decisions=2)
        _enqueue(q, [_post(1, "a"), _post(2, "b"), _post(3, "c")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        q.record_decision("p001", "ann2", "Fentanyl", ["coma"])
        q.record_decision("p002", "ann1", "Heroin", ["nausea"])
        q.record_decision("p002", "ann2", "Heroin", ["nausea"])
        with pytest.raises(QueueError, match="1 conflict, 1 pending"):
            q.close_round(1)

    def test_close_writes_report_and_reopens_next(self, queue):
        posts = [_post(i, f"t{i}") for i in range(4)]
        sugs = {p.id: _ok_suggestion(p, "Heroin", ["nausea"]) for p in posts}
        _enqueue(queue, posts, suggestions=sugs)
        for i, p in enumerate(posts):
            drug = "Heroin" if i < 3 else "Cocaine"
            queue.record_decision(p.id, "ann1", drug, ["nausea"])
        report = queue.close_round(1)
        assert report.round == 1
        assert report.suggested == 4
        assert report.decided == 4
        assert report.corrected == 1
        assert report.correction_rate == pytest.approx(0.25)
        assert queue.open_round is None
        assert queue.closed_rounds == (1,)
        _enqueue(queue, [_post(9, "next")], round_no=2)
        assert queue.open_round == 2


class TestGoldExport:
    def test_only_decided_in_enqueue_order(self, tmp_path, vocab):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab,
                            required_decisions=2)
        posts = [_post(i, f"t{i}") for i in range(3)]
        _enqueue(q, posts)
        q.record_decision("p002", "ann1", "Cocaine", ["sweating"])
        q.record_decision("p002", "ann2", "Cocaine", ["sweating"])
        q.record_decision("p000", "ann1", "Heroin", ["nausea"])
        q.record_decision("p000", "ann2", "Heroin", ["nausea"])
        gold = q.export_gold()
        assert [g.post.id for g in gold] == ["p000", "p002"]
        assert all(isinstance(g, LabeledPost) for g in gold)

    def test_suggestion_alone_never_exports(self, queue):
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        assert queue.export_gold() == []
        queue.record_decision(p.id, "ann1", "Heroin", ["nausea"])
        assert len(queue.export_gold()) == 1

    def test_round_filter(self, queue):
        _enqueue(queue, [_post(1, "a")], round_no=1)
        queue.record_decision("p001", "ann1", "Heroin", ["nausea"])
        queue.close_round(1)
        _enqueue(queue, [_post(2, "b")], round_no=2)
        queue.record_decision("p002", "ann1", "Cocaine", ["sweating"])
        assert [g.post.id for g in queue.export_gold(1)] == ["p001"]
        assert [g.post.id for g in queue.export_gold(2)] == ["p002"]
        assert len(queue.export_gold()) == 2

    def test_exported_labels_are_schema_valid(self, queue, vocab):
        _enqueue(queue, [_post(1, "a")])
        queue.record_decision("p001", "ann1", "Heroin",
                              ["Nausea", "nausea", "coma"])
        g = queue.export_gold()[0]
        assert g.drug == "Heroin"
        assert g.symptoms == ("nausea", "coma")
        for s in g.symptoms:
            assert s in vocab.labels


class TestCorrectionTracking:
    def test_matching_decision_is_not_correction(self, queue):
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        queue.record_decision(p.id, "ann1", "Heroin", ["nausea"])
        assert record_corrected(queue.get(p.id)) is False

    def test_drug_change_is_correction(self, queue):
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        queue.record_decision(p.id, "ann1", "Fentanyl", ["nausea"])
        assert record_corrected(queue.get(p.id)) is True

    def test_symptom_change_is_correction(self, queue):
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        queue.record_decision(p.id, "ann1", "Heroin", ["nausea", "coma"])
        assert record_corrected(queue.get(p.id)) is True

    def test_flags_do_not_count_as_correction(self, queue):
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        queue.record_decision(p.id, "ann1", "Heroin", ["nausea"],
                              flags=["polydrug_uncertainty"])
        assert record_corrected(queue.get(p.id)) is False

    def test_failed_suggestion_always_counts(self, queue):
        p = _post(1, "a")
        failed = SuggestedAnnotation(post_id=p.id, status="parse_failed",
                                     raw_response="garbage")
        _enqueue(queue, [p], suggestions={p.id: failed})
        queue.record_decision(p.id, "ann1", "Heroin", ["nausea"])
        assert record_corrected(queue.get(p.id)) is True

    def test_stats_shape(self, queue):
        assert queue.stats() == {
            "pending": 0, "decided": 0, "conflict": 0, "corrected": 0,
            "correction_rate": 0.0, "kappa_drug": None,
            "kappa_symptoms": None, "round": 0,
        }
        p = _post(1, "a")
        _enqueue(queue, [p],
                 suggestions={p.id: _ok_suggestion(p, "Heroin", ["nausea"])})
        queue.record_decision(p.id, "ann1", "Cocaine", ["nausea"])
        st = queue.stats()
        assert st["decided"] == 1
        assert st["corrected"] == 1
        assert st["correction_rate"] == 1.0
        assert st["round"] == 1


class TestPersistence:
    def test_reload_reproduces_fingerprint(self, tmp_path, vocab):
        store = str(tmp_path / "s")
        q = AnnotationQueue(store, vocab=vocab, required_decisions=2)
        posts = [_post(i, f"t{i}") for i in range(5)]
        sugs = {p.id: _ok_suggestion(p, "Heroin", ["nausea"]) for p in posts}
        _enqueue(q, posts, suggestions=sugs)
        for p in posts[:4]:
            q.record_decision(p.id, "ann1", "Heroin", ["nausea"])
            q.record_decision(p.id, "ann2", "Heroin", ["nausea"])
        q.record_decision(posts[4].id, "ann1", "Heroin", ["nausea"])
        q.record_decision(posts[4].id, "ann2", "Fentanyl", ["coma"])
        q.adjudicate(posts[4].id, "lead", "Fentanyl", ["coma"])
        q.close_round(1)
        fp = q.state_fingerprint()
        again = AnnotationQueue(store, vocab=vocab, required_decisions=2)
        assert again.state_fingerprint() == fp
        assert [g.post.id for g in again.export_gold()] == \
            [g.post.id for g in q.export_gold()]

    def test_replay_without_snapshot_matches(self, tmp_path, vocab):
        store = tmp_path / "s"
        q = AnnotationQueue(str(store), vocab=vocab)
        _enqueue(q, [_post(1, "a"), _post(2, "b")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        fp = q.state_fingerprint()
        (store / "snapshot.json").unlink(missing_ok=True)
        again = AnnotationQueue(str(store), vocab=vocab)
        assert again.state_fingerprint() == fp

    def test_snapshot_every_one_still_replays(self, tmp_path, vocab):
        store = str(tmp_path / "s")
        q = AnnotationQueue(store, vocab=vocab, snapshot_every=1)
        _enqueue(q, [_post(1, "a")])
        q.record_decision("p001", "ann1", "Heroin", ["nausea"])
        again = AnnotationQueue(store, vocab=vocab, snapshot_every=1)
        assert again.state_fingerprint() == q.state_fingerprint()

    def test_crash_prefix_is_a_valid_earlier_state(self, tmp_path, vocab):
        store_a = tmp_path / "a"
        qa = AnnotationQueue(str(store_a), vocab=vocab, snapshot_every=10_000)
        _enqueue(qa, [_post(1, "x"), _post(2, "y")])
        qa.record_decision("p001", "ann1", "Heroin", ["nausea"])
        qa.record_decision("p002", "ann1", "Cocaine", ["sweating"])
        events = (store_a / "events.jsonl").read_text().splitlines()

        # replay only the first three events into a fresh store; the result
        # must equal the state the original queue had at that point
        store_b = tmp_path / "b"
        store_b.mkdir()
        (store_b / "events.jsonl").write_text("\n".join(events[:3]) + "\n")
        qb = AnnotationQueue(str(store_b), vocab=vocab)
        assert len(qb) == 2
        assert qb.get("p001").status == "decided"
        assert qb.get("p002").status == "pending"

    def test_unknown_event_kind_rejected_on_load(self, tmp_path, vocab):
        store = tmp_path / "s"
        store.mkdir()
        ev = {"seq": 1, "ts": "2026-01-01T00:00:00+00:00",
              "kind": "exploded", "payload": {}}
        (store / "events.jsonl").write_text(json.dumps(ev) + "\n")
        with pytest.raises(QueueError, match="exploded"):
            AnnotationQueue(str(store), vocab=vocab)

    def test_credential_never_written_to_store(self, tmp_path, vocab, lexicon,
                                               annotator_config, monkeypatch):
        secret = "hunter2-very-secret-token"
        monkeypatch.setenv(annotator_config.credential_env, secret)
        store = tmp_path / "s"
        q = AnnotationQueue(str(store), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        posts = [_post(1, "took some smack and passed out")]
        run_round(posts, annotator_config, q, 1, lexicon, provider=provider,
                  reviewer=AcceptReviewer())
        for path in store.rglob("*"):
            if path.is_file():
                assert secret not in path.read_text(encoding="utf-8")


class TestAgreementReport:
    def _records(self, assignments):
        """assignments: list of (post_id, {annotator: (drug, symptoms)})."""
        out = []
        for i, (pid, by_ann) in enumerate(assignments):
            decisions = tuple(
                Decision(annotator=a, drug=d, symptoms=tuple(s), flags=(),
                         ts="t")
                for a, (d, s) in sorted(by_ann.items()))
            out.append(AnnotationRecord(
                post=Post(id=pid, text="t"), round=1, seq=i,
                decisions=decisions, status="decided"))
        return out

    def test_perfect_agreement(self, vocab):
        recs = self._records([
            ("p1", {"a": ("Heroin", ["nausea"]), "b": ("Heroin", ["nausea"])}),
            ("p2", {"a": ("Cocaine", ["sweating"]),
                    "b": ("Cocaine", ["sweating"])}),
        ])
        kd, ks = agreement_report(recs, ["a", "b"], vocab)
        assert kd.kappa == pytest.approx(1.0, abs=1e-12)
        assert kd.interpretation == "Perfect agreement"
        assert ks.macro_kappa == pytest.approx(1.0, abs=1e-12)

    def test_missing_pairs_listed(self, vocab):
        recs = self._records([
            ("p1", {"a": ("Heroin", ["nausea"])}),
        ])
        with pytest.raises(ValueError, match=r"\(p1, b\)"):
            agreement_report(recs, ["a", "b"], vocab)

    def test_needs_two_annotators(self, vocab):
        recs = self._records([("p1", {"a": ("Heroin", ["nausea"])})])
        with pytest.raises(ValueError, match="at least 2"):
            agreement_report(recs, ["a"], vocab)


class TestRunRound:
    def test_auto_reviewed_round(self, tmp_path, vocab, lexicon,
                                 annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        posts = [
            _post(1, "took some smack and passed out"),
            _post(2, "too much booze feeling dizzy"),
        ]
        truth = {
            "p001": {"drug": "Heroin", "symptoms": ["loss of consciousness"]},
            "p002": {"drug": "Alcohol", "symptoms": ["dizziness"]},
        }
        report = run_round(posts, annotator_config, q, 1, lexicon,
                           provider=provider, reviewer=AutoReviewer(truth))
        assert report is not None
        assert report.decided == 2
        assert q.closed_rounds == (1,)
        gold = q.export_gold(1)
        assert {g.drug for g in gold} == {"Heroin", "Alcohol"}

    def test_reviewer_none_leaves_round_open(self, tmp_path, vocab, lexicon,
                                             annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        out = run_round([_post(1, "smack overdose, felt nausea")],
                        annotator_config, q, 1, lexicon, provider=provider)
        assert out is None
        assert q.open_round == 1
        assert q.get("p001").status == "pending"

    def test_second_round_requires_first_closed(self, tmp_path, vocab,
                                                lexicon, annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        run_round([_post(1, "smack overdose")], annotator_config, q, 1,
                  lexicon, provider=provider)
        with pytest.raises(QueueError, match="still open"):
            run_round([_post(2, "more text")], annotator_config, q, 2,
                      lexicon, provider=provider)

    def test_transport_failures_still_enqueue(self, tmp_path, vocab, lexicon,
                                              annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider(lambda p: "{}", fail_every=1)
        run_round([_post(1, "anything at all")], annotator_config, q, 1,
                  lexicon, provider=provider)
        rec = q.get("p001")
        assert rec.suggestion is not None
        assert rec.suggestion.status == "transport_failed"
        assert rec.status == "pending"

    def test_later_rounds_use_earlier_gold_as_few_shot(self, tmp_path, vocab,
                                                       lexicon,
                                                       annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        prompts = []
        rule = MockProvider.rule_based(lexicon, vocab)

        class Spy:
            def complete(self, request):
                prompts.append(request["prompt"])
                return rule.complete(request)

        round1_text = "took some smack and passed out cold"
        truth = {"p001": {"drug": "Heroin",
                          "symptoms": ["loss of consciousness"]},
                 "p002": {"drug": "Alcohol", "symptoms": ["dizziness"]}}
        run_round([_post(1, round1_text)], annotator_config, q, 1, lexicon,
                  provider=Spy(), reviewer=AutoReviewer(truth))
        run_round([_post(2, "drank too much booze, head spinning")],
                  annotator_config, q, 2, lexicon, provider=Spy(),
                  reviewer=AutoReviewer(truth))
        # few-shot blocks carry an "Answer:" line; round 1 has no gold yet
        assert "Answer:" not in prompts[0]
        assert "Answer:" in prompts[1]
        assert round1_text in prompts[1]

    def test_accept_reviewer_records_zero_corrections(self, tmp_path, vocab,
                                                      lexicon,
                                                      annotator_config):
        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        posts = [_post(1, "took some smack, felt nausea")]
        report = run_round(posts, annotator_config, q, 1, lexicon,
                           provider=provider, reviewer=AcceptReviewer())
        assert report.corrected == 0
        assert report.correction_rate == 0.0

    def test_gold_path_written(self, tmp_path, vocab, lexicon,
                               annotator_config):
        from drugwatch.corpus import load_corpus

        q = AnnotationQueue(str(tmp_path / "s"), vocab=vocab)
        provider = MockProvider.rule_based(lexicon, vocab)
        gold_path = str(tmp_path / "gold.jsonl")
        truth = {"p001": {"drug": "Heroin", "symptoms": ["nausea"]}}
        run_round([_post(1, "smack made me sick with nausea")],
                  annotator_config, q, 1, lexicon, provider=provider,
                  reviewer=AutoReviewer(truth), gold_path=gold_path)
        loaded = load_corpus(gold_path, labeled=True, vocab=vocab)
        assert len(loaded) == 1
        assert loaded[0].drug == "Heroin"
