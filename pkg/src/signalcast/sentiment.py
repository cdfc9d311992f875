"""Three-class sentiment labelling behind a pluggable provider interface.

Labels follow the 0=negative, 1=neutral, 2=positive convention. Providers
are read-only after construction and classification is a pure function, so
corpora can be labelled in parallel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Union

from .errors import MissingLabelError, ValidationError
from .ingest import TweetRecord

NEGATIVE, NEUTRAL, POSITIVE = 0, 1, 2

Classifiable = Union[TweetRecord, str]


@dataclass(frozen=True)
class SentimentLabel:
    label: int
    probabilities: tuple[float, float, float]

    def __post_init__(self):
        if self.label not in (0, 1, 2):
            raise ValidationError(f"label must be in {{0,1,2}}, got {self.label}")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValidationError("probabilities must sum to 1")


def _one_hot(label: int) -> SentimentLabel:
    probs = [0.0, 0.0, 0.0]
    probs[label] = 1.0
    return SentimentLabel(label, tuple(probs))


class PassthroughProvider:
    """Reads the precomputed sentiment carried on the record itself."""

    def classify(self, item: Classifiable) -> SentimentLabel:
        if not isinstance(item, TweetRecord):
            raise ValidationError("pass-through provider needs a TweetRecord")
        if item.precomputed_sentiment is None:
            raise MissingLabelError(f"record {item.id} has no precomputed sentiment")
        return _one_hot(item.precomputed_sentiment)


class SidecarProvider:
    """Labels supplied externally as an id -> label CSV (columns id,label)."""

    def __init__(self, labels: Mapping[str, int]):
        for tweet_id, label in labels.items():
            if label not in (0, 1, 2):
                raise ValidationError(f"sidecar label for {tweet_id} not in {{0,1,2}}: {label}")
        self._labels = dict(labels)

    @classmethod
    def from_csv(cls, path) -> "SidecarProvider":
        labels: dict[str, int] = {}
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "label"} <= set(reader.fieldnames):
                raise ValidationError(f"sidecar file {path} must have columns id,label")
            for row in reader:
                try:
                    labels[row["id"].strip()] = int(row["label"])
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"bad sidecar row {row!r} in {path}") from exc
        return cls(labels)

    def classify(self, item: Classifiable) -> SentimentLabel:
        if not isinstance(item, TweetRecord):
            raise ValidationError("sidecar provider needs a TweetRecord")
        if item.id not in self._labels:
            raise MissingLabelError(f"no sidecar label for record {item.id}")
        return _one_hot(self._labels[item.id])


class LexiconProvider:
    """Signed word counts -> softmax over (-s, 0, s).

    s = (#positive hits) - (#negative hits) over lowercased alphanumeric
    words. Zero signal (no hits, or an empty text) is neutral by definition:
    label 1 with uniform probabilities.
    """

    def __init__(self, lexicon: Mapping[str, int]):
        if not lexicon:
            raise ValidationError("lexicon must be nonempty")
        for term, sign in lexicon.items():
            if sign not in (-1, 1):
                raise ValidationError(f"lexicon sign for {term!r} must be +1 or -1")
        self._lexicon = {t.lower(): s for t, s in lexicon.items()}

    @classmethod
    def bundled(cls) -> "LexiconProvider":
        text = resources.files("signalcast.data").joinpath("lexicon.txt").read_text("utf-8")
        lex: dict[str, int] = {}
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            term, sign = line.split("\t")
            lex[term] = int(sign)
        return cls(lex)

    def score(self, text: str) -> int:
        s = 0
        for raw in text.lower().split():
            word = "".join(ch for ch in raw if ch.isalnum())
            s += self._lexicon.get(word, 0)
        return s

    def classify(self, item: Classifiable) -> SentimentLabel:
        text = item.text if isinstance(item, TweetRecord) else item
        s = self.score(text)
        if s == 0:
            # No measurable signal: neutral, not the generic lowest-index tie rule.
            return SentimentLabel(NEUTRAL, (1 / 3, 1 / 3, 1 / 3))
        scores = (-float(s), 0.0, float(s))
        m = max(scores)
        exps = [math.exp(v - m) for v in scores]
        z = sum(exps)
        probs = tuple(e / z for e in exps)
        label = max(range(3), key=lambda i: (probs[i], -i))
        return SentimentLabel(label, probs)


def classify(item: Classifiable, provider) -> SentimentLabel:
    """Classify one record (or raw text, for text-based providers)."""
    return provider.classify(item)


def classify_corpus(records, provider) -> list[SentimentLabel]:
    """One label per record, in order; never drops a record."""
    return [provider.classify(rec) for rec in records]
