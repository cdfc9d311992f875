from collections import Counter
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signalcast.errors import NumericError, ValidationError
from signalcast.series import (
    CaseSeries,
    SeriesTensor,
    TrendBlock,
    build_tensor,
    difference,
    lag_features,
    lagged_column_name,
    rescale_trend_blocks,
    undifference,
    volumetric_series,
)

D0 = date(2021, 3, 1)


def day(i):
    return D0 + timedelta(days=i)


class TestBuildTensor:
    def test_three_docs_same_cell(self):
        docs = [(day(1), 2, 0)] * 3
        tensor, rejected = build_tensor(docs, (D0, day(4)), n_topics=3)
        assert rejected == []
        assert tensor.counts[1, 2, 0] == 3
        assert tensor.counts.sum() == 3

    def test_empty_doc_set_gives_zero_tensor(self):
        tensor, _ = build_tensor([], (D0, day(2)), n_topics=5)
        assert tensor.counts.shape == (3, 5, 3)
        assert tensor.counts.sum() == 0

    def test_out_of_window_reported_and_excluded(self):
        docs = [(day(0), 0, 0), (day(10), 0, 0)]
        tensor, rejected = build_tensor(docs, (D0, day(4)), n_topics=1)
        assert tensor.counts.sum() == 1
        assert rejected == [(day(10), 0, 0)]

    def test_randomized_counts_match_brute_force(self):
        rng = np.random.default_rng(0)
        n_topics, n_days = 4, 30
        docs = [
            (day(int(rng.integers(n_days))), int(rng.integers(n_topics)), int(rng.integers(3)))
            for _ in range(1000)
        ]
        tensor, rejected = build_tensor(docs, (D0, day(n_days - 1)), n_topics)
        assert rejected == []
        oracle = Counter(docs)  # independent triple-keyed count
        for (d, j, k), n in oracle.items():
            assert tensor.counts[(d - D0).days, j, k] == n
        assert tensor.counts.sum() == 1000

    def test_bad_topic_or_sentiment(self):
        with pytest.raises(ValidationError):
            build_tensor([(day(0), 9, 0)], (D0, day(1)), n_topics=2)
        with pytest.raises(ValidationError):
            build_tensor([(day(0), 0, 5)], (D0, day(1)), n_topics=2)

    def test_flattened_layout_matches_component_names(self):
        rng = np.random.default_rng(6)
        counts = rng.integers(0, 7, size=(10, 18, 3))
        tensor = SeriesTensor(D0, day(9), counts)
        names = tensor.component_names()
        flat = tensor.flattened()
        assert len(names) == flat.shape[1] == 18 * 3  # the 54 component series
        assert names[0] == "topic0_negative" and names[-1] == "topic17_positive"
        for idx, name in enumerate(names):
            j, k = idx // 3, idx % 3
            assert np.array_equal(flat[:, idx], tensor.component(j, k)), name

    def test_marginal_consistency_with_overall_volume(self):
        rng = np.random.default_rng(1)
        docs = [
            (day(int(rng.integers(10))), int(rng.integers(2)), int(rng.integers(3)))
            for _ in range(200)
        ]
        window = (D0, day(9))
        tensor, _ = build_tensor(docs, window, n_topics=2)
        overall = volumetric_series(docs, window, mode="overall")
        assert np.array_equal(tensor.counts.sum(axis=(1, 2)), overall.values)


def small_tensor(component, n_topics=1):
    values = np.asarray(component, dtype=np.int64)
    counts = np.zeros((len(values), n_topics, 3), dtype=np.int64)
    counts[:, 0, 0] = values
    return SeriesTensor(D0, day(len(values) - 1), counts)


class TestLagFeatures:
    def test_single_component_lags(self):
        tensor = small_tensor([1, 2, 3, 4])
        y = CaseSeries(D0, np.array([10, 20, 30, 40]))
        ds = lag_features(tensor, y, max_lag=1)
        assert list(ds.columns[lagged_column_name(0, 0, 0)]) == [2, 3, 4]
        assert list(ds.columns[lagged_column_name(0, 0, 1)]) == [1, 2, 3]
        assert list(ds.y) == [20, 30, 40]
        assert ds.dates[0] == day(1)

    def test_max_lag_zero_is_flattened_tensor(self):
        tensor = small_tensor([5, 6, 7])
        y = CaseSeries(D0, np.array([1, 2, 3]))
        ds = lag_features(tensor, y, max_lag=0)
        assert len(ds.columns) == 3  # one topic x three sentiments, lag 0 only
        assert np.array_equal(ds.columns[lagged_column_name(0, 0, 0)], tensor.component(0, 0))
        assert np.array_equal(ds.y, y.values)

    def test_paper_scale_column_count(self):
        rng = np.random.default_rng(2)
        counts = rng.integers(0, 5, size=(40, 18, 3))
        tensor = SeriesTensor(D0, day(39), counts)
        y = CaseSeries(D0, rng.integers(0, 100, size=40))
        ds = lag_features(tensor, y, max_lag=14)
        assert len(ds.columns) == 18 * 3 * 15  # 54 components x lags 0..14
        assert len(ds.dates) == 40 - 14

    def test_lag_column_is_shifted_lag0(self):
        rng = np.random.default_rng(3)
        comp = rng.integers(0, 9, size=25)
        tensor = small_tensor(comp)
        y = CaseSeries(D0, rng.integers(0, 9, size=25))
        ds = lag_features(tensor, y, max_lag=6)
        base = comp[6:]
        for lag in range(7):
            col = ds.columns[lagged_column_name(0, 0, lag)]
            for t in range(len(base)):
                assert col[t] == comp[6 + t - lag]
        assert np.array_equal(ds.columns[lagged_column_name(0, 0, 0)], base)

    def test_date_range_mismatch(self):
        tensor = small_tensor([1, 2, 3])
        y = CaseSeries(day(1), np.array([1, 2, 3]))
        with pytest.raises(ValidationError):
            lag_features(tensor, y, max_lag=1)


class TestDifference:
    def test_first_difference(self):
        assert list(difference([1, 3, 6], 1)) == [2, 3]

    def test_second_difference(self):
        assert list(difference([1, 3, 6, 10], 2)) == [1, 1]

    def test_d_zero_identity(self):
        assert list(difference([4, 2, 7], 0)) == [4, 2, 7]

    def test_too_short(self):
        with pytest.raises(ValidationError):
            difference([1, 2], 2)

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=40),
        st.integers(0, 3),
    )
    @settings(max_examples=100)
    def test_round_trip(self, values, d):
        if len(values) <= d:
            return
        arr = np.asarray(values)
        heads = [difference(arr, i)[0] for i in range(d)]
        rebuilt = undifference(difference(arr, d), heads)
        assert np.allclose(rebuilt, arr, atol=1e-6 * (1 + np.abs(arr).max()))


class TestVolumetric:
    def make_docs(self, seed=4, n=300, n_topics=3, n_days=12):
        rng = np.random.default_rng(seed)
        return [
            (day(int(rng.integers(n_days))), int(rng.integers(n_topics)), int(rng.integers(3)))
            for _ in range(n)
        ], (D0, day(n_days - 1))

    def test_overall_equals_tensor_marginal(self):
        docs, window = self.make_docs()
        tensor, _ = build_tensor(docs, window, 3)
        overall = volumetric_series(docs, window, "overall")
        assert np.array_equal(overall.values, tensor.counts.sum(axis=(1, 2)))

    def test_topic_mode_equals_tensor_topic_marginal(self):
        docs, window = self.make_docs()
        tensor, _ = build_tensor(docs, window, 3)
        sick = volumetric_series(docs, window, 1)
        assert np.array_equal(sick.values, tensor.counts[:, 1, :].sum(axis=1))

    def test_matches_brute_force_filtered_count(self):
        docs, window = self.make_docs(seed=5)
        series = volumetric_series(docs, window, 2)
        oracle = Counter(d for d, j, _ in docs if j == 2)
        for i, d in enumerate(series.dates()):
            assert series.values[i] == oracle.get(d, 0)


class TestRescaleTrendBlocks:
    def test_single_point_overlap_factor_two(self):
        b1 = TrendBlock(D0, np.array([10.0, 20.0, 50.0]))
        b2 = TrendBlock(day(2), np.array([25.0, 30.0, 40.0]))
        merged, factors = rescale_trend_blocks([b1, b2])
        assert factors == [1.0, 2.0]
        assert list(merged.values) == [10.0, 20.0, 50.0, 60.0, 80.0]

    def test_identical_overlap_is_identity_merge(self):
        b1 = TrendBlock(D0, np.array([5.0, 6.0, 7.0]))
        b2 = TrendBlock(day(1), np.array([6.0, 7.0, 8.0]))
        merged, factors = rescale_trend_blocks([b1, b2])
        assert factors == [1.0, 1.0]
        assert list(merged.values) == [5.0, 6.0, 7.0, 8.0]

    def test_factors_compose(self):
        # Hand-composed: block2 at half scale (factor 2), block3 at a further
        # third of block2's scale (factor 3 against raw block2), so the merge
        # must scale block3 by 2*3 = 6.
        truth = np.arange(1.0, 13.0)
        b1 = TrendBlock(D0, truth[:6].copy())
        b2 = TrendBlock(day(4), truth[4:9] / 2.0)
        b3 = TrendBlock(day(7), truth[7:] / 6.0)
        merged, factors = rescale_trend_blocks([b1, b2, b3])
        assert factors == [1.0, 2.0, 6.0]
        assert np.allclose(merged.values, truth, rtol=0, atol=1e-12)

    def test_gap_is_an_error(self):
        b1 = TrendBlock(D0, np.array([1.0, 2.0]))
        b2 = TrendBlock(day(5), np.array([1.0, 2.0]))
        with pytest.raises(NumericError):
            rescale_trend_blocks([b1, b2])

    def test_all_zero_overlap_is_an_error(self):
        b1 = TrendBlock(D0, np.array([1.0, 0.0]))
        b2 = TrendBlock(day(1), np.array([0.0, 3.0]))
        with pytest.raises(NumericError):
            rescale_trend_blocks([b1, b2])
