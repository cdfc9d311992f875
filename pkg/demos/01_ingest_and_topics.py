"""Walkthrough: raw tweets CSV -> cleaned documents -> LDA topics.

Runs on the bundled synthetic mini corpus (regenerate it with
`python -m signalcast.synthetic data/mini`).
"""

from pathlib import Path

from signalcast import (
    StopwordList,
    build_vocabulary,
    clean_corpus,
    coherence_cv,
    detect_and_merge_bigrams,
    fit_lda,
    parse_corpus,
    select_tweets,
)

MINI = Path(__file__).resolve().parent.parent / "data" / "mini"

records, rejections = parse_corpus(MINI / "tweets.csv")
print(f"parsed {len(records)} rows, {len(rejections)} rejected")
for rej in rejections[:3]:
    print(f"  row {rej.row_number}: {rej.reason}")

selected = select_tweets(records, min_terms=10)
print(f"{len(selected)} tweets survive dedup + length + geotag selection")

docs, empty = clean_corpus(selected, StopwordList.bundled())
bigrams, docs = detect_and_merge_bigrams(docs, min_freq=500)
print(f"cleaned {len(docs)} documents ({len(empty)} emptied), "
      f"{len(bigrams)} frequent bigrams merged: {sorted('_'.join(b) for b in bigrams)}")

vocab, bow = build_vocabulary(docs, min_freq=500)
print(f"vocabulary: {len(vocab)} terms after frequency pruning")

model = fit_lda(bow, k=3, alpha=1.0, iterations=80, seed=7, vocab=vocab)
score = coherence_cv(model, docs, top_n=10)
print(f"\n3-topic model, coherence {score.value:.3f}")
for topic in range(model.k):
    print(f"  topic {topic} ({score.per_topic[topic]:.3f}): "
          + " ".join(model.top_terms(topic, 8)))
