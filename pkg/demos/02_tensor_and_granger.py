"""Walkthrough: daily topic/sentiment tensor -> Granger-causal feature ranking.

Builds the tensor from planted ground truth (skipping the LDA step, which
demo 01 covers) so the causal structure is known: the (sick, negative)
component drives the synthetic case counts three days later.
"""

import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from signalcast import CaseSeries, SeriesTensor, ensure_stationary, select_features

MINI = Path(__file__).resolve().parent.parent / "data" / "mini"
manifest = json.loads((MINI / "manifest.json").read_text())

start = date(2021, 1, 1)
components = manifest["component_counts"]
n_days = len(next(iter(components.values())))
topics = sorted({key.split("/")[0] for key in components})

counts = np.zeros((n_days, len(topics), 3), dtype=np.int64)
for key, series in components.items():
    topic, sentiment = key.split("/")
    counts[:, topics.index(topic), int(sentiment)] = series
tensor = SeriesTensor(start, start + timedelta(days=n_days - 1), counts)

cases_rows = (MINI / "cases.csv").read_text().strip().splitlines()[1:]
cases = CaseSeries(start, np.array([int(r.split(",")[1]) for r in cases_rows]))

_, d = ensure_stationary(cases.values.astype(float), max_d=2)
print(f"cases series is stationary after d={d} difference(s)")

ranked = select_features(tensor, cases, max_lag=14, alpha=0.05, min_count=10)
print(f"\ncomponents Granger-causing cases at >=10 of 14 lags:")
for r in ranked:
    topic_name = topics[r.topic]
    print(f"  {topic_name}/sentiment{r.sentiment}: significant at "
          f"{r.significant_count}/14 lags (differenced d={r.d_used})")

print(f"\nplanted driver was the (sick, negative) component at lag "
      f"{manifest['causal_lag']}; the ranking should recover exactly that.")
