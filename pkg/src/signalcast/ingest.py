"""Microblog corpus ingestion: parsing, selection, cleaning, bigram merging.

The functions here take a raw tweets CSV down to tokenized documents ready
for bag-of-words modelling. Everything is a pure function of its inputs and
deterministic, so the whole stage can be re-run byte-for-byte.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from importlib import resources
from typing import Callable, Iterable, Optional, Sequence

from .errors import MissingColumnError, ValidationError

Normalizer = Callable[[str], str]

_URL_PREFIXES = ("http://", "https://", "www.")
_TOKEN_KEEP = re.compile(r"[^a-z0-9_]+")
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class TweetRecord:
    """One parsed microblog post."""

    id: str
    timestamp: datetime          # timezone-aware, UTC
    text: str
    small_region: str
    larger_region: str
    precomputed_sentiment: Optional[int] = None


@dataclass(frozen=True)
class CleanDoc:
    """Tokenized document; tokens are lowercase [a-z0-9_] terms."""

    tweet_id: str
    date: date
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class StopwordList:
    terms: frozenset[str]

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("stopword list must be nonempty")

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "StopwordList":
        return cls(frozenset(t.strip().lower() for t in terms if t.strip()))

    @classmethod
    def bundled(cls) -> "StopwordList":
        """The static English list shipped with the package."""
        text = resources.files("signalcast.data").joinpath("stopwords.txt").read_text("utf-8")
        terms = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        return cls.from_terms(terms)


@dataclass(frozen=True)
class CorpusSchema:
    """Column names of the tweets CSV."""

    id: str = "id"
    created_at: str = "created_at"
    text: str = "text"
    small_region: str = "small_region"
    larger_region: str = "larger_region"
    sentiment: str = "sentiment"   # optional column

    def required(self) -> tuple[str, ...]:
        return (self.id, self.created_at, self.text, self.small_region, self.larger_region)


@dataclass(frozen=True)
class Rejection:
    row_number: int     # 1-based file row; the header is row 1
    reason: str


def _parse_timestamp(raw: str) -> datetime:
    s = raw.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_corpus(
    path, schema: CorpusSchema = CorpusSchema()
) -> tuple[list[TweetRecord], list[Rejection]]:
    """Read a tweets CSV into records, reporting (not dropping) bad rows.

    Rows with an unparseable timestamp, empty/duplicate id, or a sentiment
    value outside {0,1,2} are returned as Rejection entries instead of
    records. A header-only file yields ([], []).

    Raises FileNotFoundError for a missing file, MissingColumnError when a
    required column is absent, and ValidationError on malformed quoting.
    """
    records: list[TweetRecord] = []
    rejections: list[Rejection] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        try:
            header = reader.fieldnames
        except csv.Error as exc:
            raise ValidationError(f"malformed CSV header in {path}: {exc}") from exc
        if header is None:
            return [], []
        for col in schema.required():
            if col not in header:
                raise MissingColumnError(f"missing required column {col!r} in {path}")
        has_sentiment = schema.sentiment in header
        try:
            for row_number, row in enumerate(reader, start=2):
                if row.get(None) is not None or any(v is None for v in row.values()):
                    rejections.append(Rejection(row_number, "wrong field count"))
                    continue
                tweet_id = row[schema.id].strip()
                if not tweet_id:
                    rejections.append(Rejection(row_number, "empty id"))
                    continue
                if tweet_id in seen_ids:
                    rejections.append(Rejection(row_number, f"duplicate id {tweet_id}"))
                    continue
                try:
                    ts = _parse_timestamp(row[schema.created_at])
                except ValueError:
                    rejections.append(
                        Rejection(row_number, f"unparseable timestamp {row[schema.created_at]!r}")
                    )
                    continue
                sentiment: Optional[int] = None
                if has_sentiment and row[schema.sentiment].strip() != "":
                    try:
                        sentiment = int(row[schema.sentiment])
                    except ValueError:
                        sentiment = -1
                    if sentiment not in (0, 1, 2):
                        rejections.append(
                            Rejection(row_number, f"sentiment not in {{0,1,2}}: {row[schema.sentiment]!r}")
                        )
                        continue
                seen_ids.add(tweet_id)
                records.append(
                    TweetRecord(
                        id=tweet_id,
                        timestamp=ts,
                        text=row[schema.text],
                        small_region=row[schema.small_region].strip(),
                        larger_region=row[schema.larger_region].strip(),
                        precomputed_sentiment=sentiment,
                    )
                )
        except csv.Error as exc:
            raise ValidationError(f"malformed CSV in {path} near row {reader.line_num}: {exc}") from exc
    return records, rejections


def write_rejections(path, rejections: Sequence[Rejection]) -> None:
    """Rejection report CSV: row_number,reason."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_number", "reason"])
        for rej in rejections:
            writer.writerow([rej.row_number, rej.reason])


def term_count(text: str) -> int:
    """Whitespace-separated term count of the raw text (pre-cleaning)."""
    return len(text.split())


def select_tweets(records: Sequence[TweetRecord], min_terms: int = 10) -> list[TweetRecord]:
    """Apply the selection rules: dedupe exact texts, length and geotag filters.

    Exact-duplicate texts keep the first occurrence by ascending
    (timestamp, id). Records with fewer than ``min_terms`` raw whitespace
    terms, or with both region fields empty, are dropped. Output is sorted
    by (timestamp, id); the function is idempotent.
    """
    if min_terms < 1:
        raise ValidationError("min_terms must be >= 1")
    ordered = sorted(records, key=lambda r: (r.timestamp, r.id))
    seen_texts: set[str] = set()
    kept: list[TweetRecord] = []
    for rec in ordered:
        if rec.text in seen_texts:
            continue
        seen_texts.add(rec.text)
        if term_count(rec.text) < min_terms:
            continue
        if not rec.small_region and not rec.larger_region:
            continue
        kept.append(rec)
    return kept


def split_region(full_name: str) -> tuple[str, str]:
    """Split a "[small region, larger region]" location on its last comma.

    A comma-free value is a small region on its own: ``(full_name, "")``.
    """
    if "," not in full_name:
        return full_name.strip(), ""
    small, _, larger = full_name.rpartition(",")
    return small.strip(), larger.strip()


def identity_normalizer(token: str) -> str:
    return token


def suffix_normalizer(token: str) -> str:
    """Light suffix stripper: ing/ed/es/s, longest match, never below 3 chars."""
    for suffix in ("ing", "ed", "es", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def clean_and_tokenize(
    record: TweetRecord,
    stopwords: StopwordList,
    normalizer: Normalizer = identity_normalizer,
    tz: timezone = timezone.utc,
) -> Optional[CleanDoc]:
    """Lowercase, strip URLs/mentions/punctuation, drop stopwords, normalize.

    Returns None when nothing survives (the caller must drop the document);
    otherwise a CleanDoc dated by the record timestamp in ``tz``.
    """
    tokens: list[str] = []
    for raw in _WS.split(record.text.lower()):
        if not raw or raw.startswith(_URL_PREFIXES) or raw.startswith("@"):
            continue
        term = _TOKEN_KEEP.sub("", raw)
        if not term or term in stopwords:
            continue
        tokens.append(normalizer(term))
    if not tokens:
        return None
    return CleanDoc(
        tweet_id=record.id,
        date=record.timestamp.astimezone(tz).date(),
        tokens=tuple(tokens),
    )


def clean_corpus(
    records: Sequence[TweetRecord],
    stopwords: StopwordList,
    normalizer: Normalizer = identity_normalizer,
    tz: timezone = timezone.utc,
) -> tuple[list[CleanDoc], list[str]]:
    """clean_and_tokenize over a corpus; returns (docs, ids dropped as empty)."""
    docs: list[CleanDoc] = []
    dropped: list[str] = []
    for rec in records:
        doc = clean_and_tokenize(rec, stopwords, normalizer, tz)
        if doc is None:
            dropped.append(rec.id)
        else:
            docs.append(doc)
    return docs, dropped


def detect_and_merge_bigrams(
    docs: Sequence[CleanDoc], min_freq: int
) -> tuple[set[tuple[str, str]], list[CleanDoc]]:
    """Merge adjacent token pairs occurring >= min_freq times corpus-wide.

    Counting runs over the original documents; rewriting is a single
    left-to-right non-overlapping pass, so [a, b, a, b] becomes
    [a_b, a_b] when (a, b) is frequent.
    """
    if min_freq < 1:
        raise ValidationError("min_freq must be >= 1")
    pair_counts: Counter[tuple[str, str]] = Counter()
    for doc in docs:
        toks = doc.tokens
        for i in range(len(toks) - 1):
            pair_counts[(toks[i], toks[i + 1])] += 1
    bigrams = {pair for pair, n in pair_counts.items() if n >= min_freq}
    if not bigrams:
        return bigrams, list(docs)
    rewritten: list[CleanDoc] = []
    for doc in docs:
        toks = doc.tokens
        out: list[str] = []
        i = 0
        while i < len(toks):
            if i + 1 < len(toks) and (toks[i], toks[i + 1]) in bigrams:
                out.append(toks[i] + "_" + toks[i + 1])
                i += 2
            else:
                out.append(toks[i])
                i += 1
        rewritten.append(CleanDoc(doc.tweet_id, doc.date, tuple(out)))
    return bigrams, rewritten
