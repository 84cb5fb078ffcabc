import json
import math
import os

import pytest

from treelevels.cli import main
from treelevels.errors import ConfigError
from treelevels.reporting import CSV_HEADER, Row, format_rows_csv
from treelevels.suites import ExperimentConfig, SUITES, list_suites, run_suite


class TestConfig:
    def test_unknown_suite_suggests_nearest(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"suite": "fixed-k-cl"})
        assert "fixed-k-clt" in str(err.value)
        assert err.value.field == "suite"

    def test_unknown_field_rejected_with_hint(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"suite": "moments", "replicate": 10})
        assert err.value.field == "replicate"
        assert "replicates" in str(err.value)

    def test_zero_replicates_rejected(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict({"suite": "moments", "replicates": 0})
        assert err.value.field == "replicates"

    def test_bad_u_grid_rejected(self):
        for grid in ([], [0.0, 1.0], [2.0, 1.0]):
            with pytest.raises(ConfigError):
                ExperimentConfig.from_dict({"suite": "limit-process", "u_grid": grid})

    def test_bad_threads_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"suite": "moments", "threads": 0})

    def test_bad_interarrival_rejected(self):
        with pytest.raises(ConfigError) as err:
            ExperimentConfig.from_dict(
                {"suite": "renewal-clt", "interarrival": {"family": "pareto"}}
            )
        assert err.value.field == "interarrival"

    def test_every_suite_round_trips(self):
        for name, _ in list_suites():
            cfg = ExperimentConfig.from_dict({"suite": name})
            assert cfg.resolved().suite == name


class TestRegistry:
    def test_expected_suites_present(self):
        assert set(SUITES) == {
            "enumeration-check",
            "mean-oracle",
            "embedding-identity",
            "moments",
            "fluctuation-asymptotics",
            "limit-process",
            "fixed-k-clt",
            "multivariate-clt",
            "intermediate-clt",
            "renewal-clt",
        }

    def test_descriptions_nonempty(self):
        for name, desc in list_suites():
            assert desc and len(desc) < 100


class TestCsvFormat:
    def test_header_and_line_endings(self):
        rows = [Row(0, 5, 2, None, 3, 1.5), Row(1, 5, 2, 0.5, 4, -0.25)]
        text = format_rows_csv(rows)
        lines = text.split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[0] == "replicate_index,n,k_or_m,u,raw_value,normalized_value"
        assert "\r" not in text
        assert text.endswith("\n")
        assert lines[1] == "0,5,2,,3,1.5"
        assert lines[2] == "1,5,2,0.5,4,-0.25"

    def test_float_formatting_round_trips(self):
        val = 0.8333333333333334
        text = format_rows_csv([Row(0, None, 2, 1.0, val, 1e-15)])
        cell = text.split("\n")[1].split(",")[4]
        assert float(cell) == val


class TestSuiteDeterminism:
    @pytest.mark.parametrize(
        "config",
        [
            {"suite": "enumeration-check", "n_ladder": [2, 3], "replicates": 2000},
            {"suite": "limit-process", "replicates": 400},
            {
                "suite": "fixed-k-clt",
                "n_ladder": [100, 1000],
                "replicates": 300,
            },
        ],
    )
    def test_thread_count_invariance(self, config):
        results = {}
        for threads in (1, 8):
            cfg = ExperimentConfig.from_dict({**config, "threads": threads})
            res = run_suite(cfg)
            results[threads] = format_rows_csv(res.rows)
        assert results[1] == results[8]
        assert results[1].count("\n") > 1

    def test_different_seeds_differ(self):
        a = run_suite(
            ExperimentConfig(suite="limit-process", replicates=200, seed=1)
        )
        b = run_suite(
            ExperimentConfig(suite="limit-process", replicates=200, seed=2)
        )
        assert format_rows_csv(a.rows) != format_rows_csv(b.rows)


class TestSuiteBehavior:
    def test_enumeration_summary_has_exact_pmf(self):
        res = run_suite(
            ExperimentConfig(
                suite="enumeration-check", n_ladder=[3], k=2, replicates=5000
            )
        )
        case = res.summary["cases"][0]
        assert case["pmf_exact_rational"] == {"0": "1/6", "1": "2/3", "2": "1/6"}
        assert math.isclose(case["pmf_exact"]["1"], 2.0 / 3.0)
        assert case["tv_distance"] < 0.05
        assert res.all_passed

    def test_moments_rows_carry_variance_and_residual(self):
        res = run_suite(ExperimentConfig(suite="moments", k_max=5, t_grid=[1.0]))
        row = next(r for r in res.rows if r.k_or_m == 2 and r.u == 1.0)
        assert math.isclose(row.raw_value, 5.0 / 6.0, rel_tol=1e-12)
        assert abs(row.normalized_value) < 1e-12
        assert res.all_passed

    def test_mean_oracle_small(self):
        res = run_suite(
            ExperimentConfig(
                suite="mean-oracle", n_ladder=[50], k=3, replicates=4000
            )
        )
        assert res.all_passed

    def test_intermediate_rejects_bad_u(self):
        with pytest.raises(ConfigError):
            run_suite(
                ExperimentConfig(
                    suite="intermediate-clt",
                    n_ladder=[1000],
                    u_grid=[0.01],
                    replicates=10,
                )
            )


class TestCli:
    def _write_config(self, tmp_path, payload):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    def test_list_suites(self, capsys):
        assert main(["list-suites"]) == 0
        out = capsys.readouterr().out
        assert "enumeration-check" in out and "renewal-clt" in out

    def test_moments_subcommand(self, capsys):
        assert main(["moments", "--k", "2", "--t", "1"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == CSV_HEADER
        cells = lines[1].split(",")
        assert math.isclose(float(cells[4]), 5.0 / 6.0, rel_tol=1e-12)
        assert abs(float(cells[5])) <= 1e-12

    def test_moments_usage_error(self, capsys):
        assert main(["moments", "--k", "1", "--t", "1"]) == 2

    def test_run_writes_artifacts_and_passes(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path,
            {
                "suite": "enumeration-check",
                "n_ladder": [2],
                "replicates": 30_000,
                "plots": False,
            },
        )
        out_dir = str(tmp_path / "out")
        assert main(["run", "--config", cfg, "--out", out_dir]) == 0
        csv_path = os.path.join(out_dir, "enumeration-check.csv")
        json_path = os.path.join(out_dir, "enumeration-check-summary.json")
        assert os.path.exists(csv_path) and os.path.exists(json_path)
        with open(csv_path, "rb") as fh:
            data = fh.read()
        assert data.startswith(CSV_HEADER.encode()) and b"\r" not in data
        with open(json_path, encoding="utf-8") as fh:
            summary = json.load(fh)
        assert summary["all_passed"] is True
        assert summary["reports"][0]["verdict"] == "pass"

    def test_run_plots_emitted(self, tmp_path):
        cfg = self._write_config(
            tmp_path,
            {
                "suite": "limit-process",
                "replicates": 300,
                "plots": True,
            },
        )
        out_dir = str(tmp_path / "out")
        code = main(["run", "--config", cfg, "--out", out_dir])
        svgs = [f for f in os.listdir(out_dir) if f.endswith(".svg")]
        assert svgs, "expected SVG plots"
        with open(os.path.join(out_dir, svgs[0]), encoding="utf-8") as fh:
            assert fh.read().startswith("<svg")
        assert code in (0, 1)  # tiny replicate count may statistically fail

    def test_run_unknown_suite_exits_2(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path, {"suite": "moment"})
        assert main(["run", "--config", cfg]) == 2
        err = capsys.readouterr().err
        assert "nearest" in err and "moments" in err

    def test_run_far_off_suite_exits_2(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path, {"suite": "zzz"})
        assert main(["run", "--config", cfg]) == 2
        assert "unknown suite" in capsys.readouterr().err

    def test_run_invalid_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["run", "--config", str(path)]) == 2

    def test_run_degenerate_grid_exits_2(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path,
            {
                "suite": "limit-process",
                "replicates": 60,
                "u_grid": [1.0, 1.0 + 1e-14, 2.0],
            },
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "too close" in capsys.readouterr().err

    def test_run_budget_error_exits_3(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path,
            {
                "suite": "renewal-clt",
                "replicates": 10,
                "interarrival": {"family": "exponential", "mean": 1e-9},
            },
        )
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
        assert "budget" in capsys.readouterr().err

    def test_env_var_sets_default_out_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TREELEVELS_OUT", str(tmp_path / "envout"))
        monkeypatch.chdir(tmp_path)
        cfg = self._write_config(
            tmp_path, {"suite": "moments", "k_max": 4, "t_grid": [1.0]}
        )
        assert main(["run", "--config", cfg]) == 0
        assert os.path.exists(tmp_path / "envout" / "moments-summary.json")

    def test_seed_flag_overrides(self, tmp_path):
        cfg = self._write_config(
            tmp_path,
            {"suite": "limit-process", "replicates": 200, "seed": 1},
        )
        outs = []
        for seed, sub in ((None, "a"), ("1", "b"), ("2", "c")):
            args = ["run", "--config", cfg, "--out", str(tmp_path / sub)]
            if seed:
                args += ["--seed", seed]
            main(args)
            with open(tmp_path / sub / "limit-process.csv", "rb") as fh:
                outs.append(fh.read())
        assert outs[0] == outs[1]
        assert outs[0] != outs[2]
