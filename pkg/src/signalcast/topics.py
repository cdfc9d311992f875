"""Topic modelling: collapsed-Gibbs LDA, coherence scoring, k selection.

The sampler is deliberately self-contained and seeded: identical inputs and
seed give a bit-identical model. Coherence follows the sliding-window
boolean co-occurrence -> NPMI context vector -> cosine similarity pipeline
with one-set segmentation, averaged per topic and then across topics.
"""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    EmptyCorpusError,
    EmptyDocError,
    OutOfVocabularyError,
    ValidationError,
)
from .ingest import CleanDoc


@dataclass(frozen=True)
class Vocabulary:
    term_to_id: dict[str, int]
    id_to_term: tuple[str, ...]
    doc_freq: np.ndarray    # documents containing each term
    term_freq: np.ndarray   # corpus-wide occurrence count

    def __len__(self) -> int:
        return len(self.id_to_term)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_id


@dataclass(frozen=True)
class BowCorpus:
    """Bag-of-words docs as (term_id, count) pairs, term ids ascending."""

    docs: tuple[tuple[tuple[int, int], ...], ...]
    doc_ids: tuple[str, ...]
    dropped_ids: tuple[str, ...]    # docs emptied by vocabulary pruning

    def __len__(self) -> int:
        return len(self.docs)


@dataclass
class LdaModel:
    k: int
    alpha: float
    beta: float
    topic_word_counts: np.ndarray   # k x V
    doc_topic_counts: np.ndarray    # D x k
    token_assignments: tuple[np.ndarray, ...]
    seed: int
    vocab: Vocabulary
    iterations: int

    def topic_word_distribution(self) -> np.ndarray:
        """Rows are smoothed per-topic term distributions (each sums to 1)."""
        v = len(self.vocab)
        counts = self.topic_word_counts.astype(float)
        denom = counts.sum(axis=1, keepdims=True) + v * self.beta
        return (counts + self.beta) / denom

    def top_terms(self, topic: int, n: int) -> list[str]:
        """Top-n terms by count, ties broken by ascending term id."""
        counts = self.topic_word_counts[topic]
        order = sorted(range(len(counts)), key=lambda t: (-counts[t], t))
        return [self.vocab.id_to_term[t] for t in order[:n]]


@dataclass(frozen=True)
class CoherenceScore:
    value: float
    per_topic: tuple[float, ...]


def build_vocabulary(
    docs: Sequence[CleanDoc], min_freq: int
) -> tuple[Vocabulary, BowCorpus]:
    """Map terms to dense ids, pruning terms rarer than min_freq corpus-wide.

    Documents emptied by pruning are dropped and reported via
    BowCorpus.dropped_ids. Raises EmptyCorpusError when nothing survives.
    """
    if not docs:
        raise EmptyCorpusError("no documents to build a vocabulary from")
    if min_freq < 1:
        raise ValidationError("min_freq must be >= 1")
    term_freq: Counter[str] = Counter()
    doc_freq: Counter[str] = Counter()
    for doc in docs:
        term_freq.update(doc.tokens)
        doc_freq.update(set(doc.tokens))
    term_to_id: dict[str, int] = {}
    for doc in docs:    # first-appearance order keeps ids stable
        for tok in doc.tokens:
            if tok not in term_to_id and term_freq[tok] >= min_freq:
                term_to_id[tok] = len(term_to_id)
    if not term_to_id:
        raise EmptyCorpusError(f"no term reaches corpus frequency {min_freq}")
    id_to_term = tuple(sorted(term_to_id, key=term_to_id.get))
    bow_docs: list[tuple[tuple[int, int], ...]] = []
    doc_ids: list[str] = []
    dropped: list[str] = []
    for doc in docs:
        counts = Counter(
            term_to_id[tok] for tok in doc.tokens if tok in term_to_id
        )
        if not counts:
            dropped.append(doc.tweet_id)
            continue
        bow_docs.append(tuple(sorted(counts.items())))
        doc_ids.append(doc.tweet_id)
    if not bow_docs:
        raise EmptyCorpusError("all documents became empty after pruning")
    vocab = Vocabulary(
        term_to_id=term_to_id,
        id_to_term=id_to_term,
        doc_freq=np.array([doc_freq[t] for t in id_to_term], dtype=np.int64),
        term_freq=np.array([term_freq[t] for t in id_to_term], dtype=np.int64),
    )
    return vocab, BowCorpus(tuple(bow_docs), tuple(doc_ids), tuple(dropped))


def _expand_tokens(bow_doc: Iterable[tuple[int, int]]) -> list[int]:
    out: list[int] = []
    for term_id, count in bow_doc:
        out.extend([term_id] * count)
    return out


def fit_lda(
    corpus: BowCorpus,
    k: int,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    vocab: Optional[Vocabulary] = None,
) -> LdaModel:
    """Collapsed Gibbs sampler in fixed doc/token order.

    alpha defaults to 50/k and beta to 0.01. All randomness comes from the
    seeded generator: same (corpus, k, alpha, beta, iterations, seed) gives
    identical token assignments.
    """
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot fit LDA on an empty corpus")
    if k < 2:
        raise ValidationError("k must be >= 2")
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    if alpha is None:
        alpha = 50.0 / k
    if alpha <= 0 or beta <= 0:
        raise ValidationError("alpha and beta must be > 0")
    if k > len(corpus):
        warnings.warn(f"k={k} exceeds the number of documents ({len(corpus)})")

    n_docs = len(corpus)
    v = 1 + max(tid for doc in corpus.docs for tid, _ in doc)
    if vocab is not None:
        v = len(vocab)
    doc_tokens = [_expand_tokens(doc) for doc in corpus.docs]

    rng = random.Random(seed)
    nkw = [[0] * v for _ in range(k)]
    ndk = [[0] * k for _ in range(n_docs)]
    nk = [0] * k
    z: list[list[int]] = []
    for d, tokens in enumerate(doc_tokens):
        zd = []
        nd = ndk[d]
        for w in tokens:
            j = rng.randrange(k)
            zd.append(j)
            nd[j] += 1
            nkw[j][w] += 1
            nk[j] += 1
        z.append(zd)

    vbeta = v * beta
    cum = [0.0] * k
    rng_random = rng.random
    for _ in range(iterations):
        for d, tokens in enumerate(doc_tokens):
            nd = ndk[d]
            zd = z[d]
            for i, w in enumerate(tokens):
                j = zd[i]
                nd[j] -= 1
                nkw[j][w] -= 1
                nk[j] -= 1
                total = 0.0
                for t in range(k):
                    total += (nd[t] + alpha) * (nkw[t][w] + beta) / (nk[t] + vbeta)
                    cum[t] = total
                u = rng_random() * total
                j = 0
                while cum[j] < u:
                    j += 1
                zd[i] = j
                nd[j] += 1
                nkw[j][w] += 1
                nk[j] += 1

    placeholder_vocab = vocab
    if placeholder_vocab is None:
        terms = tuple(str(t) for t in range(v))
        placeholder_vocab = Vocabulary(
            term_to_id={t: i for i, t in enumerate(terms)},
            id_to_term=terms,
            doc_freq=np.zeros(v, dtype=np.int64),
            term_freq=np.zeros(v, dtype=np.int64),
        )
    return LdaModel(
        k=k,
        alpha=alpha,
        beta=beta,
        topic_word_counts=np.array(nkw, dtype=np.int64),
        doc_topic_counts=np.array(ndk, dtype=np.int64),
        token_assignments=tuple(np.array(zd, dtype=np.int64) for zd in z),
        seed=seed,
        vocab=placeholder_vocab,
        iterations=iterations,
    )


def _sliding_windows(tokens: Sequence[int], window: int) -> Iterable[Sequence[int]]:
    # A doc shorter than the window is one window.
    if len(tokens) <= window:
        yield tokens
        return
    for i in range(len(tokens) - window + 1):
        yield tokens[i : i + window]


def coherence_cv(
    model: LdaModel,
    docs: Sequence[CleanDoc],
    top_n: int = 20,
    window: int = 110,
    epsilon: float = 1e-12,
) -> CoherenceScore:
    """Sliding-window/NPMI/cosine topic coherence with one-set segmentation.

    Boolean occurrence counts come from windows of ``window`` consecutive
    tokens (whole doc when shorter). Each topic's top_n terms get NPMI
    context vectors against that same term set; the topic score is the mean
    cosine between each term's vector and the summed set vector.
    """
    v = len(model.vocab)
    if top_n > v:
        raise ValidationError(f"top_n={top_n} exceeds vocabulary size {v}")
    if window < 1:
        raise ValidationError("window must be >= 1")

    top_ids: list[list[int]] = []
    for topic in range(model.k):
        counts = model.topic_word_counts[topic]
        order = sorted(range(v), key=lambda t: (-counts[t], t))
        top_ids.append(order[:top_n])
    needed = set().union(*map(set, top_ids))

    n_windows = 0
    occ: Counter[int] = Counter()
    joint: Counter[tuple[int, int]] = Counter()
    term_to_id = model.vocab.term_to_id
    for doc in docs:
        ids = [term_to_id.get(tok, -1) for tok in doc.tokens]
        for win in _sliding_windows(ids, window):
            n_windows += 1
            present = sorted({t for t in win if t in needed})
            for a_i, a in enumerate(present):
                occ[a] += 1
                for b in present[a_i + 1 :]:
                    joint[(a, b)] += 1
    if n_windows == 0:
        raise EmptyCorpusError("no windows: docs are empty")

    def prob(t: int) -> float:
        return occ[t] / n_windows

    def prob_joint(a: int, b: int) -> float:
        if a == b:
            return occ[a] / n_windows
        key = (a, b) if a < b else (b, a)
        return joint[key] / n_windows

    def npmi(a: int, b: int) -> float:
        pa, pb = prob(a), prob(b)
        if pa == 0.0 or pb == 0.0:
            return 0.0
        pj = prob_joint(a, b) + epsilon
        denom = -math.log(pj)
        if denom == 0.0:
            return 1.0
        return math.log(pj / (pa * pb)) / denom

    def cosine(x: np.ndarray, y: np.ndarray) -> float:
        nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
        if nx == 0.0 or ny == 0.0:
            return 0.0
        return float(np.dot(x, y) / (nx * ny))

    per_topic: list[float] = []
    for ids in top_ids:
        vectors = np.array([[npmi(a, b) for b in ids] for a in ids])
        set_vector = vectors.sum(axis=0)
        sims = [cosine(vectors[i], set_vector) for i in range(len(ids))]
        per_topic.append(float(np.mean(sims)))
    return CoherenceScore(value=float(np.mean(per_topic)), per_topic=tuple(per_topic))


def select_k(
    corpus: BowCorpus,
    docs: Sequence[CleanDoc],
    k_range: Iterable[int] = range(5, 51),
    per_k_seeds: int = 1,
    *,
    vocab: Optional[Vocabulary] = None,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    top_n: int = 20,
    window: int = 110,
) -> tuple[LdaModel, dict[int, float]]:
    """Fit per-k models, score mean coherence over per_k_seeds, pick argmax.

    Ties go to the smaller k; within the winning k the returned model is the
    one with the highest individual coherence (then the lowest seed index).
    """
    ks = sorted(set(k_range))
    if not ks:
        raise ValidationError("k_range must be nonempty")
    if per_k_seeds < 1:
        raise ValidationError("per_k_seeds must be >= 1")
    table: dict[int, float] = {}
    best: tuple[float, int, float, LdaModel] | None = None
    for k in ks:
        fits: list[tuple[float, LdaModel]] = []
        for s in range(per_k_seeds):
            model = fit_lda(
                corpus, k, alpha=alpha, beta=beta,
                iterations=iterations, seed=seed + s, vocab=vocab,
            )
            score = coherence_cv(model, docs, top_n=top_n, window=window).value
            fits.append((score, model))
        mean_score = sum(score for score, _ in fits) / per_k_seeds
        table[k] = mean_score
        if best is None or mean_score > best[0]:
            top_score, top_model = max(fits, key=lambda sm: sm[0])
            best = (mean_score, k, top_score, top_model)
    assert best is not None
    return best[3], table


def assign_topic(
    model: LdaModel,
    doc: CleanDoc,
    sweeps: int = 50,
    average_last: int = 10,
) -> tuple[int, tuple[float, ...]]:
    """Fold-in posterior for an unseen document with frozen topic-word counts.

    Runs ``sweeps`` Gibbs sweeps over the document's in-vocabulary tokens
    (unknown tokens ignored) and reads the topic distribution from expected
    counts accumulated over the last ``average_last`` sweeps. Returns
    (argmax topic, probabilities); exact ties go to the lowest topic id.
    """
    if not doc.tokens:
        raise EmptyDocError(f"document {doc.tweet_id} has no tokens")
    term_to_id = model.vocab.term_to_id
    tokens = [term_to_id[t] for t in doc.tokens if t in term_to_id]
    if not tokens:
        raise OutOfVocabularyError(
            f"document {doc.tweet_id} has no in-vocabulary tokens"
        )
    if not 1 <= average_last <= sweeps:
        raise ValidationError("need 1 <= average_last <= sweeps")

    k = model.k
    alpha, beta = model.alpha, model.beta
    vbeta = len(model.vocab) * beta
    nkw = model.topic_word_counts
    nk = nkw.sum(axis=1)
    # Per-token word factors are constant during fold-in (global counts frozen).
    word_factor = [
        [(float(nkw[t, w]) + beta) / (float(nk[t]) + vbeta) for t in range(k)]
        for w in tokens
    ]

    rng = random.Random(model.seed * 1000003 + 17)
    nd = [0] * k
    z = []
    for _ in tokens:
        j = rng.randrange(k)
        z.append(j)
        nd[j] += 1
    acc = [0.0] * k
    cum = [0.0] * k
    for sweep in range(sweeps):
        accumulate = sweep >= sweeps - average_last
        for i in range(len(tokens)):
            j = z[i]
            nd[j] -= 1
            wf = word_factor[i]
            total = 0.0
            for t in range(k):
                total += (nd[t] + alpha) * wf[t]
                cum[t] = total
            if accumulate:
                prev = 0.0
                for t in range(k):
                    acc[t] += (cum[t] - prev) / total
                    prev = cum[t]
            u = rng.random() * total
            j = 0
            while cum[j] < u:
                j += 1
            z[i] = j
            nd[j] += 1

    expected = [a / average_last for a in acc]
    denom = len(tokens) + k * alpha
    probs = tuple((e + alpha) / denom for e in expected)
    topic = max(range(k), key=lambda t: (probs[t], -t))
    return topic, probs
