import json

import pytest
from click.testing import CliRunner

from segexplain.cli import main

from fixtures import covid_total_relation


@pytest.fixture(scope="module")
def covid_total_csv(tmp_path_factory):
    rel = covid_total_relation()
    path = tmp_path_factory.mktemp("data") / "covid_total.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,state,total_cases\n")
        dcol, scol, vcol = rel.columns["date"], rel.columns["state"], rel.columns["total_cases"]
        for i in range(rel.row_count):
            fh.write(f"{dcol[i].isoformat()},{scol[i]},{vcol[i]}\n")
    return path


class TestExplainCommand:
    def test_covid_defaults_auto_k(self, covid_total_csv, tmp_path):
        out = tmp_path / "result.json"
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--measure", "total_cases",
                "--agg", "sum",
                "--explain-by", "state",
                "--k", "auto",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["k"] == 6
        assert doc["cuts"][1:-1] == [
            "2020-03-14", "2020-05-04", "2020-05-29", "2020-09-25", "2020-11-27",
        ]

    def test_fixed_k_one(self, covid_total_csv, tmp_path):
        out = tmp_path / "k1.json"
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--measure", "total_cases",
                "--explain-by", "state",
                "--k", "1",
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["k"] == 1
        assert len(doc["segments"]) == 1
        assert len(doc["segments"][0]["explanations"]) <= 3

    def test_unknown_explain_by_exits_3_with_message(self, covid_total_csv, tmp_path):
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--measure", "total_cases",
                "--explain-by", "county",
                "--out", str(tmp_path / "x.json"),
            ],
        )
        assert result.exit_code == 3
        assert "county" in result.output

    def test_bad_flag_exits_2(self, covid_total_csv, tmp_path):
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--explain-by", "state",
                "--k", "soon",
                "--out", str(tmp_path / "x.json"),
            ],
        )
        assert result.exit_code == 2

    def test_plot_svg_written(self, covid_total_csv, tmp_path):
        out, plot = tmp_path / "r.json", tmp_path / "plot.svg"
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--measure", "total_cases",
                "--explain-by", "state",
                "--k", "3",
                "--out", str(out),
                "--plot", str(plot),
            ],
        )
        assert result.exit_code == 0, result.output
        assert plot.read_text().lstrip().startswith("<?xml")

    def test_derived_column_config(self, tmp_path):
        csv_path = tmp_path / "prices.csv"
        csv_path.write_text(
            "date,stock,price,share\n"
            "2020-01-01,AAA,10.0,3.0\n2020-01-01,BBB,5.0,2.0\n"
            "2020-01-02,AAA,12.0,3.0\n2020-01-02,BBB,4.0,2.0\n"
            "2020-01-03,AAA,14.0,3.0\n2020-01-03,BBB,3.0,2.0\n"
        )
        config = tmp_path / "config.json"
        config.write_text(
            json.dumps({"derived_columns": [{"name": "weighted", "expression": "price*share/2.0"}]})
        )
        out = tmp_path / "r.json"
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(csv_path),
                "--time", "date",
                "--measure", "weighted",
                "--explain-by", "stock",
                "--k", "1",
                "--out", str(out),
                "--config", str(config),
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        top = doc["segments"][0]["explanations"][0]
        assert top["predicates"] == [{"attr": "stock", "value": "AAA"}]
        # gamma of AAA on the derived measure: |14*3/2 - 10*3/2| = 6
        assert top["gamma"] == 6.0

    def test_config_file_overrides_defaults(self, covid_total_csv, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"m": 2}))
        out = tmp_path / "r.json"
        result = CliRunner().invoke(
            main,
            [
                "explain",
                "--input", str(covid_total_csv),
                "--time", "date",
                "--measure", "total_cases",
                "--explain-by", "state",
                "--k", "2",
                "--out", str(out),
                "--config", str(config),
            ],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert all(len(seg["explanations"]) <= 2 for seg in doc["segments"])


class TestSynthCommand:
    def test_writes_datasets_and_sidecars(self, tmp_path):
        result = CliRunner().invoke(
            main, ["synth", "--snr", "50,40", "--seeds", "2", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert csvs == [
            "synth_snr40_seed0.csv",
            "synth_snr40_seed1.csv",
            "synth_snr50_seed0.csv",
            "synth_snr50_seed1.csv",
        ]
        sidecar = json.loads((tmp_path / "synth_snr50_seed0.truth.json").read_text())
        assert {"n", "cuts", "per_category_cuts", "snr_db", "seed"} <= set(sidecar)

    def test_zero_seeds_is_usage_error(self, tmp_path):
        result = CliRunner().invoke(main, ["synth", "--seeds", "0", "--out", str(tmp_path)])
        assert result.exit_code == 2


class TestBenchCommand:
    def test_small_bench_report(self, tmp_path):
        result = CliRunner().invoke(
            main,
            [
                "bench",
                "--snr", "50",
                "--seeds", "1",
                "--samples", "40",
                "--out", str(tmp_path),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "bench_report.json").read_text())
        assert report["accuracy"][0]["tse_distance_percent"] == 0.0
        ranks = report["metric_rank"]["mean_rank_by_snr"]["50.0"]
        assert all(v == 1.0 for v in ranks.values())
        assert (tmp_path / "accuracy.csv").exists()
        assert (tmp_path / "metric_rank.csv").exists()

    def test_zero_samples_is_usage_error(self, tmp_path):
        result = CliRunner().invoke(
            main, ["bench", "--samples", "0", "--out", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_report_validates_against_published_schema(self, tmp_path):
        import jsonschema
        from importlib import resources

        result = CliRunner().invoke(
            main,
            ["bench", "--snr", "45", "--seeds", "1", "--samples", "25", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((tmp_path / "bench_report.json").read_text())
        schema = json.loads(
            resources.files("segexplain").joinpath("schemas/bench_report.schema.json").read_text()
        )
        jsonschema.validate(report, schema)
