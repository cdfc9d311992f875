"""Deterministic synthetic mini-corpus for pipeline smoke runs and demos.

The generator plants a known structure end to end: three disjoint topic
vocabularies, lexicon-scored sentiment words, one designed frequent bigram,
and a single (topic, sentiment) component whose daily volume drives the
synthetic case counts three days later. A pipeline run over these files
should therefore rediscover the causal component and beat the no-exogenous
baseline in a backtest.
"""

from __future__ import annotations

import csv
import json
import random
from datetime import date, timedelta
from pathlib import Path

TOPIC_VOCABS = {
    "sick": [
        "test", "cases", "testing", "symptom", "clinic", "swab", "fever",
        "isolation", "quarantine", "result", "queue", "throat", "tracing",
        "temperature", "sample", "pathology",
    ],
    "policy": [
        "lockdown", "restriction", "curfew", "border", "travel", "rules",
        "announcement", "premier", "exemption", "stage", "roadmap",
        "compliance", "checkpoint", "permit", "zone", "enforcement",
    ],
    "vaccine": [
        "vaccine", "dose", "jab", "rollout", "pfizer", "astrazeneca",
        "appointment", "vaccination", "booster", "schedule", "batch",
        "eligibility", "hub", "clinics", "vial", "syringe",
    ],
}

NEGATIVE_WORDS = ["worried", "scared", "awful", "terrible", "grim"]
POSITIVE_WORDS = ["hopeful", "grateful", "relieved", "happy", "glad"]
FILLERS = ["the", "and", "of", "a", "in"]
REGIONS = [
    ("Melbourne", "Victoria"),
    ("Sydney", "New South Wales"),
    ("Brisbane", "Queensland"),
    ("New South Wales", ""),
]

CAUSAL_TOPIC = "sick"       # the (sick, negative) component drives cases
CAUSAL_LAG = 3
START = date(2021, 1, 1)
N_DAYS = 160


def _component_counts(rng: random.Random) -> dict[tuple[str, int], list[int]]:
    """Daily tweet counts per (topic, sentiment); one component is AR-like."""
    counts: dict[tuple[str, int], list[int]] = {}
    x = 10.0
    causal = []
    for _ in range(N_DAYS):
        x = 10.0 + 0.75 * (x - 10.0) + rng.gauss(0.0, 2.2)
        causal.append(max(2, min(30, round(x))))
    for topic in TOPIC_VOCABS:
        for sentiment in (0, 1, 2):
            if topic == CAUSAL_TOPIC and sentiment == 0:
                counts[(topic, sentiment)] = causal
            else:
                counts[(topic, sentiment)] = [
                    1 + _poisson(rng, 4.0) for _ in range(N_DAYS)
                ]
    return counts


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's method; lam is small here
    import math

    l = math.exp(-lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= l:
            return k
        k += 1


def _tweet_text(rng: random.Random, topic: str, sentiment: int) -> str:
    vocab = TOPIC_VOCABS[topic]
    weights = [1.0 / (r + 1) ** 0.6 for r in range(len(vocab))]
    words = rng.choices(vocab, weights=weights, k=10)
    if sentiment == 0:
        words += rng.sample(NEGATIVE_WORDS, 2)
    elif sentiment == 2:
        words += rng.sample(POSITIVE_WORDS, 2)
    words += rng.sample(FILLERS, 2)
    rng.shuffle(words)
    if topic == "policy" and rng.random() < 0.30:
        # designed frequent bigram, inserted adjacently after the shuffle
        at = rng.randrange(len(words))
        words[at:at] = ["stage", "four"]
    if rng.random() < 0.08:
        words.insert(rng.randrange(len(words)), "https://t.co/xyz")
    if rng.random() < 0.05:
        words.insert(rng.randrange(len(words)), "@somebody")
    return " ".join(words)


def generate_mini_corpus(out_dir, seed: int = 20210101) -> dict:
    """Write tweets.csv, cases.csv, and config.json into out_dir.

    Returns a manifest with the planted ground truth (causal topic words,
    per-component daily counts, and case construction constants).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    counts = _component_counts(rng)

    sentiments = {0: NEGATIVE_WORDS, 1: [], 2: POSITIVE_WORDS}
    rows = []
    tweet_no = 0
    for day_idx in range(N_DAYS):
        day = START + timedelta(days=day_idx)
        for (topic, sentiment), series in counts.items():
            for _ in range(series[day_idx]):
                tweet_no += 1
                small, larger = REGIONS[tweet_no % len(REGIONS)]
                hour = 6 + (tweet_no * 7) % 16
                minute = (tweet_no * 13) % 60
                rows.append(
                    {
                        "id": f"t{tweet_no:06d}",
                        "created_at": f"{day.isoformat()}T{hour:02d}:{minute:02d}:00Z",
                        "text": _tweet_text(rng, topic, sentiment),
                        "small_region": small,
                        "larger_region": larger,
                    }
                )
    # a handful of rows that must be filtered or rejected downstream
    dup_source = [r for r in rows if len(rows) > 50][:15]
    for i, src in enumerate(dup_source):
        tweet_no += 1
        rows.append({**src, "id": f"t{tweet_no:06d}"})    # exact duplicate text
    for i in range(3):
        tweet_no += 1
        rows.append(
            {
                "id": f"t{tweet_no:06d}",
                "created_at": "not a timestamp",
                "text": "broken row with enough words to pass the length rule ok",
                "small_region": "Melbourne",
                "larger_region": "Victoria",
            }
        )
    for i in range(3):
        tweet_no += 1
        rows.append(
            {
                "id": f"t{tweet_no:06d}",
                "created_at": f"2021-02-0{i + 1}T10:00:00Z",
                "text": "tweet with no geotag that still has more than ten words total",
                "small_region": "",
                "larger_region": "",
            }
        )
    for i in range(2):
        tweet_no += 1
        rows.append(
            {
                "id": f"t{tweet_no:06d}",
                "created_at": f"2021-02-1{i}T10:00:00Z",
                "text": "too short",
                "small_region": "Perth",
                "larger_region": "Western Australia",
            }
        )

    with open(out / "tweets.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["id", "created_at", "text", "small_region", "larger_region"]
        )
        writer.writeheader()
        writer.writerows(rows)

    causal = counts[(CAUSAL_TOPIC, 0)]
    with open(out / "cases.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "new_cases"])
        for day_idx in range(N_DAYS):
            lagged = causal[max(0, day_idx - CAUSAL_LAG)]
            value = max(1, round(150 + 9.0 * lagged + rng.gauss(0.0, 4.0)))
            writer.writerow([(START + timedelta(days=day_idx)).isoformat(), value])

    config = {
        "tweets_csv": "tweets.csv",
        "cases_csv": "cases.csv",
        "window": {"start": START.isoformat(), "end": (START + timedelta(days=N_DAYS - 1)).isoformat()},
        "seed": 7,
        "min_terms": 10,
        "normalizer": "identity",
        "sentiment_provider": "lexicon",
        "bigram_min_freq": 500,
        "vocab_min_freq": 500,
        "topics": 3,
        "lda_iterations": 80,
        "lda_alpha": 1.0,
        "coherence_top_n": 10,
        "coherence_window": 110,
        "max_lag": 14,
        "min_count": 10,
        "alpha": 0.05,
        "d_cap": 2,
        "grid_p": [0, 2],
        "grid_q": [0, 2],
        "significances": [0.05, 0.01],
        "split_date": "2021-05-26",
        "exog_top": 1,
        "arima_use_exog": True,
        "var_p_max": 6,
        "var_difference": False,
        "forecast_horizon": 7,
    }
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)

    manifest = {
        "seed": seed,
        "causal_topic_words": TOPIC_VOCABS[CAUSAL_TOPIC],
        "causal_sentiment": 0,
        "causal_lag": CAUSAL_LAG,
        "n_tweets": len(rows),
        "component_counts": {f"{t}/{s}": c for (t, s), c in counts.items()},
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def main(argv=None):
    import argparse

    parser = argparse.ArgumentParser(description="Regenerate the bundled mini corpus")
    parser.add_argument("out_dir", help="target directory (e.g. data/mini)")
    parser.add_argument("--seed", type=int, default=20210101)
    args = parser.parse_args(argv)
    manifest = generate_mini_corpus(args.out_dir, seed=args.seed)
    print(f"wrote {manifest['n_tweets']} tweets to {args.out_dir}")


if __name__ == "__main__":
    main()
