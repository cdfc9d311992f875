import json
from pathlib import Path

import pytest

from signalcast.cli import main

REPO = Path(__file__).resolve().parent.parent
MINI = REPO / "data" / "mini"


def write_config(tmp_path, **overrides):
    config = {
        "tweets_csv": str(MINI / "tweets.csv"),
        "cases_csv": str(MINI / "cases.csv"),
        "window": {"start": "2021-01-01", "end": "2021-06-09"},
        "seed": 7,
        "topics": 3,
        "lda_iterations": 30,
        "lda_alpha": 1.0,
        "vocab_min_freq": 500,
        "bigram_min_freq": 500,
        "split_date": "2021-05-26",
        "exog_top": 1,
        "grid_p": [0, 1],
        "grid_q": [0, 1],
        "var_p_max": 4,
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def mini_exists():
    if not (MINI / "tweets.csv").exists():
        pytest.skip("bundled mini corpus not generated")


class TestConfigValidation:
    def test_missing_seed_exits_one(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "tweets_csv": "x.csv",
                    "cases_csv": "y.csv",
                    "window": {"start": "2021-01-01", "end": "2021-02-01"},
                }
            )
        )
        assert main(["ingest", "--config", str(path)]) == 1
        assert "seed" in capsys.readouterr().err

    def test_bad_json_exits_one(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        assert main(["ingest", "--config", str(path)]) == 1

    def test_unknown_subcommand_exits_one(self, capsys):
        assert main(["frobnicate", "--config", "x.json"]) == 1

    def test_missing_tweets_file_exits_one(self, tmp_path, capsys):
        config = write_config(tmp_path, tweets_csv=str(tmp_path / "absent.csv"))
        assert main(["ingest", "--config", str(config), "--out", str(tmp_path / "out")]) == 1


class TestStageSequencing:
    def test_granger_before_build_series_hints_at_stage(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        code = main(["granger", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "build-series" in capsys.readouterr().err

    def test_topics_before_ingest_hints_at_stage(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        code = main(["topics", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "ingest" in capsys.readouterr().err

    def test_forecast_without_any_fit(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        code = main(["forecast", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "fit-var" in capsys.readouterr().err


class TestIngestStage:
    def test_ingest_writes_docs_and_rejections(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["ingest", "--config", str(config), "--out", str(out)]) == 0
        assert (out / "ingest" / "docs.jsonl").exists()
        assert (out / "ingest" / "rejections.csv").exists()
        assert (out / "resolved_config.json").exists()
        first = json.loads((out / "ingest" / "docs.jsonl").read_text().splitlines()[0])
        assert set(first) == {"id", "date", "tokens", "sentiment"}
        rejections = (out / "ingest" / "rejections.csv").read_text().splitlines()
        assert rejections[0] == "row_number,reason"
        assert len(rejections) == 4      # three bad-timestamp rows in the corpus

    def test_seed_override_lands_in_resolved_config(self, tmp_path, mini_exists):
        config = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["ingest", "--config", str(config), "--seed", "99", "--out", str(out)]) == 0
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["seed"] == 99


class TestNumericFailureExit:
    def test_granger_on_hopelessly_trending_cases_exits_two(self, tmp_path, capsys):
        # cases ~ t^3 stays trending after the d=2 cap, so ensure_stationary
        # fails numerically: exit code 2, not 1.
        import numpy as np

        rng = np.random.default_rng(0)
        days = 120
        out = tmp_path / "out"
        (out / "series").mkdir(parents=True)
        tensor_rows = ["date,topic,sentiment,count"]
        cases_rows = ["date,new_cases"]
        from datetime import date as _date, timedelta as _td

        start = _date(2021, 1, 1)
        for i in range(days):
            day = (start + _td(days=i)).isoformat()
            count = int(rng.integers(1, 10))
            tensor_rows.append(f"{day},0,0,{count}")
            cases_rows.append(f"{day},{int(i**3 / 50) + int(rng.integers(0, 3)) + 1}")
        (out / "series" / "tensor.csv").write_text("\n".join(tensor_rows) + "\n")
        cases_path = tmp_path / "cases.csv"
        cases_path.write_text("\n".join(cases_rows) + "\n")
        config = write_config(
            tmp_path,
            cases_csv=str(cases_path),
            window={"start": "2021-01-01", "end": (start + _td(days=days - 1)).isoformat()},
        )
        code = main(["granger", "--config", str(config), "--out", str(out)])
        assert code == 2
        assert "numeric failure" in capsys.readouterr().err


class TestForecastStage:
    def test_plain_arima_fit_forecasts_to_spec_format(self, tmp_path, mini_exists):
        config = write_config(tmp_path, forecast_horizon=5)
        out = tmp_path / "out"
        fit_doc = {
            "format_version": 1,
            "spec": [1, 0, 0],
            "intercept": 2.0,
            "ar": [0.5],
            "ma": [],
            "exog_coeffs": {},
            "sigma2": 1.0,
            "loglik": 0.0,
            "aic": 0.0,
            "bic": 0.0,
            "converged": True,
            "n_effective": 29,
            "residuals": [0.0] * 29,
            "y_train": [4.0] * 29 + [10.0],
            "start_date": "2021-01-01",
        }
        (out / "arima").mkdir(parents=True)
        (out / "arima" / "fit.json").write_text(json.dumps(fit_doc))
        assert main(["forecast", "--config", str(config), "--out", str(out)]) == 0
        lines = (out / "forecast" / "arima_forecast.csv").read_text().splitlines()
        assert lines[0] == "date,point,lower_5,upper_5,lower_1,upper_1"
        assert len(lines) == 1 + 5
        first = lines[1].split(",")
        assert first[0] == "2021-01-31"
        point, l5, u5, l1, u1 = map(float, first[1:])
        assert point == pytest.approx(2.0 + 0.5 * 10.0, abs=1e-6)
        assert l1 < l5 < point < u5 < u1

    def test_exogenous_fit_is_skipped_with_note(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        out = tmp_path / "out"
        fit_doc = {
            "format_version": 1, "spec": [0, 0, 0], "intercept": 2.0,
            "ar": [], "ma": [], "exog_coeffs": {"z": 1.0}, "sigma2": 1.0,
            "loglik": 0.0, "aic": 0.0, "bic": 0.0, "converged": True,
            "n_effective": 30, "residuals": [0.0] * 30,
            "y_train": [4.0] * 30, "start_date": "2021-01-01",
        }
        (out / "arima").mkdir(parents=True)
        (out / "arima" / "fit.json").write_text(json.dumps(fit_doc))
        assert main(["forecast", "--config", str(config), "--out", str(out)]) == 0
        assert "skipped" in capsys.readouterr().out


class TestEmitPlots:
    def test_per_figure_csvs(self, tmp_path, mini_exists):
        config = write_config(tmp_path)
        out = tmp_path / "out"
        backtest_dir = out / "backtest"
        backtest_dir.mkdir(parents=True)
        header = "date,actual,point,lower_5,upper_5,lower_1,upper_1\n"
        row = "2021-06-01,100,95.0,90.0,101.0,85.0,106.0\n"
        (backtest_dir / "baseline_forecast.csv").write_text(header + row)
        (backtest_dir / "social_forecast.csv").write_text(header + row)
        assert main(["emit-plots", "--config", str(config), "--out", str(out)]) == 0
        plots = sorted(p.name for p in (out / "plots").iterdir())
        assert "actual_vs_predicted_baseline_upper_5.csv" in plots
        assert "actual_vs_predicted_social_upper_1.csv" in plots
        assert "actual_vs_predicted_baseline_point.csv" in plots
        content = (out / "plots" / "actual_vs_predicted_baseline_upper_5.csv").read_text()
        assert content.splitlines()[0] == "date,actual,predicted"
        assert content.splitlines()[1] == "2021-06-01,100,101.0"

    def test_emit_plots_without_backtest_exits_one(self, tmp_path, capsys, mini_exists):
        config = write_config(tmp_path)
        code = main(["emit-plots", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "backtest" in capsys.readouterr().err
