from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from signalcast.errors import MissingLabelError, ValidationError
from signalcast.ingest import TweetRecord
from signalcast.sentiment import (
    LexiconProvider,
    PassthroughProvider,
    SidecarProvider,
    classify,
    classify_corpus,
)


def rec(id_="1", text="hello", sentiment=None):
    return TweetRecord(
        id=id_,
        timestamp=datetime(2021, 3, 1, tzinfo=timezone.utc),
        text=text,
        small_region="Melbourne",
        larger_region="Victoria",
        precomputed_sentiment=sentiment,
    )


class TestPassthrough:
    def test_reads_precomputed(self):
        label = classify(rec(sentiment=2), PassthroughProvider())
        assert label.label == 2
        assert label.probabilities == (0.0, 0.0, 1.0)

    def test_missing_label_errors(self):
        with pytest.raises(MissingLabelError):
            classify(rec(sentiment=None), PassthroughProvider())


class TestLexicon:
    provider = LexiconProvider({"good": 1, "bad": -1})

    def test_positive_repeats(self):
        label = classify("good good", self.provider)
        assert label.label == 2
        assert label.probabilities[2] == max(label.probabilities)

    def test_negative(self):
        assert classify("bad day bad", self.provider).label == 0

    def test_zero_hits_is_neutral_uniform(self):
        label = classify("nothing matches here", self.provider)
        assert label.label == 1
        assert label.probabilities == (1 / 3, 1 / 3, 1 / 3)

    def test_empty_text_is_neutral_uniform(self):
        label = classify("", self.provider)
        assert label.label == 1
        assert label.probabilities == (1 / 3, 1 / 3, 1 / 3)

    def test_accepts_records_too(self):
        assert classify(rec(text="good"), self.provider).label == 2

    def test_punctuation_stripped_before_lookup(self):
        assert classify("good!", self.provider).label == 2

    def test_bundled_lexicon_loads(self):
        bundled = LexiconProvider.bundled()
        assert classify("great wonderful", bundled).label == 2
        assert classify("awful terrible", bundled).label == 0

    def test_bad_sign_rejected(self):
        with pytest.raises(ValidationError):
            LexiconProvider({"x": 2})

    @given(st.lists(st.sampled_from(["good", "bad", "meh", "ok"]), max_size=20))
    def test_probabilities_always_valid(self, words):
        label = classify(" ".join(words), self.provider)
        assert abs(sum(label.probabilities) - 1.0) < 1e-9
        assert label.probabilities[label.label] == max(label.probabilities)


class TestSidecar:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("id,label\n1,0\n2,2\n", encoding="utf-8")
        provider = SidecarProvider.from_csv(path)
        assert classify(rec("2"), provider).label == 2

    def test_missing_entry(self):
        with pytest.raises(MissingLabelError):
            classify(rec("zzz"), SidecarProvider({"1": 0}))

    def test_bad_label_value(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("id,label\n1,7\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            SidecarProvider.from_csv(path)


def test_corpus_labels_cover_every_record():
    provider = LexiconProvider({"good": 1, "bad": -1})
    records = [rec(str(i), text) for i, text in enumerate(["good", "bad", "meh", ""])]
    labels = classify_corpus(records, provider)
    assert len(labels) == len(records)
    assert [l.label for l in labels] == [2, 0, 1, 1]


def test_classify_is_deterministic():
    provider = LexiconProvider.bundled()
    a = classify("sad news but some hope", provider)
    b = classify("sad news but some hope", provider)
    assert a == b
