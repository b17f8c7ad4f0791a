import json
import math

import numpy as np
import pytest

from dpsampler.cli import ExperimentConfig, main, run, table_sweep
from dpsampler.core import write_kary_csv, write_vector_csv
from dpsampler.errors import ConfigInvalid
from dpsampler.kary import shurr_weak_complexity, subrr_sample_complexity


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def kary_file(tmp_path):
    path = tmp_path / "kary.csv"
    gen = np.random.default_rng(80)
    write_kary_csv(path, gen.integers(1, 4, size=200))
    return path


@pytest.fixture
def vector_file(tmp_path):
    path = tmp_path / "vec.csv"
    gen = np.random.default_rng(81)
    write_vector_csv(path, gen.normal(0.0, 1.0, size=(300, 1)))
    return path


class TestComplexityCommand:
    def test_kary_single_example(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["complexity", "--family", "kary", "--task", "single",
             "--k", "10", "--alpha", "0.1", "--eps", "1"],
        )
        assert code == 0
        report = json.loads(out)
        assert report["derived"]["n_required"] == 81
        assert report["outputs"]["report"]["formula_name"] == "kary_single"

    def test_gaussian_tasks(self, capsys):
        for task, expected in [("pure", 214), ("zcdp-known", 8)]:
            code, out, _ = run_cli(
                capsys,
                ["complexity", "--family", "gaussian", "--task", task,
                 "--dim", "1", "--R", "1", "--alpha", "0.1", "--eps", "1"],
            )
            assert code == 0
            assert json.loads(out)["derived"]["n_required"] == expected

    def test_missing_parameter_exits_one(self, capsys):
        code, _, err = run_cli(
            capsys, ["complexity", "--family", "kary", "--task", "single", "--k", "10"]
        )
        assert code == 1
        assert "missing required parameter" in err


class TestSampleKary:
    def test_too_many_outputs_exit_one(self, capsys, kary_file):
        code, _, err = run_cli(
            capsys,
            ["sample-kary", "--mode", "shuffle", "--in", str(kary_file),
             "--eps", "300", "--delta", "0.5", "--m", "500", "--seed", "1"],
        )
        assert code == 1
        assert "m=500" in err

    def test_deterministic_artifacts(self, capsys, kary_file, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            code, _, _ = run_cli(
                capsys,
                ["sample-kary", "--mode", "shuffle", "--in", str(kary_file),
                 "--eps", "300", "--delta", "0.5", "--m", "50",
                 "--seed", "7", "--out", str(out)],
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_sub_mode_reports_eps0(self, capsys, kary_file):
        code, out, _ = run_cli(
            capsys,
            ["sample-kary", "--mode", "sub", "--in", str(kary_file),
             "--eps", "1", "--seed", "3"],
        )
        assert code == 0
        report = json.loads(out)
        assert report["derived"]["eps0"] == pytest.approx(math.log(200.0))
        assert len(report["outputs"]["values"]) == 1

    def test_seed_required(self, capsys, kary_file):
        with pytest.raises(SystemExit) as exc:
            main(["sample-kary", "--mode", "sub", "--in", str(kary_file), "--eps", "1"])
        assert exc.value.code == 1

    def test_combinator_modes(self, capsys, kary_file):
        for mode, extra in [
            ("repeat", []),
            ("both", []),
            ("precision", ["--delta", "0.5"]),
        ]:
            code, out, _ = run_cli(
                capsys,
                ["sample-kary", "--mode", mode, "--in", str(kary_file),
                 "--eps", "300", "--m", "3", "--alpha", "0.5", "--seed", "5"] + extra,
            )
            assert code == 0
            assert len(json.loads(out)["outputs"]["values"]) == 3


class TestSampleGaussian:
    def test_pure_variant_writes_rows(self, capsys, vector_file, tmp_path):
        out = tmp_path / "samples.csv"
        code, stdout, _ = run_cli(
            capsys,
            ["sample-gaussian", "--variant", "pure", "--in", str(vector_file),
             "--R", "1", "--alpha", "0.1", "--eps", "1", "--count", "5",
             "--seed", "11", "--out", str(out)],
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 5
        report = json.loads(stdout)
        assert report["derived"]["B"] == pytest.approx(1 + 2 * math.sqrt(math.log(10)))

    def test_zcdp_variants(self, capsys, vector_file):
        for variant in ("zcdp-known", "zcdp-bounded"):
            code, stdout, _ = run_cli(
                capsys,
                ["sample-gaussian", "--variant", variant, "--in", str(vector_file),
                 "--R", "1", "--alpha", "0.1", "--eps", "1", "--seed", "12"],
            )
            assert code == 0
            assert "sigma2" in json.loads(stdout)["derived"]

    def test_multisampling_modes(self, capsys, vector_file):
        for variant in ("pure", "zcdp-known", "zcdp-bounded"):
            for mode in ("repeat", "precision", "both"):
                code, stdout, _ = run_cli(
                    capsys,
                    ["sample-gaussian", "--variant", variant, "--mode", mode,
                     "--in", str(vector_file), "--R", "1", "--alpha", "0.4",
                     "--eps", "5", "--m", "3", "--seed", "14"],
                )
                assert code == 0, (variant, mode)
                assert json.loads(stdout)["outputs"]["count"] == 3


class TestElapCommand:
    def test_sampling_to_csv(self, capsys, tmp_path):
        out = tmp_path / "elap.csv"
        code, _, _ = run_cli(
            capsys,
            ["elap", "--dim", "3", "--scale", "2.0", "--count", "10",
             "--seed", "2", "--out", str(out)],
        )
        assert code == 0
        rows = out.read_text().splitlines()
        assert len(rows) == 10 and len(rows[0].split(",")) == 3

    def test_tail_query(self, capsys):
        code, out, _ = run_cli(
            capsys, ["elap", "--tail", "--dim", "3", "--scale", "1.0", "--alpha", "0.1"]
        )
        assert code == 0
        derived = json.loads(out)["derived"]
        assert derived["tail_radius"] == pytest.approx(3 * math.log(30.0))
        assert derived["exact_tail"] <= 0.1


class TestTvdistCommand:
    def test_report_shape(self, capsys, tmp_path):
        gen = np.random.default_rng(83)
        p = tmp_path / "p.csv"
        q = tmp_path / "q.csv"
        write_vector_csv(p, gen.normal(size=(2000, 1)))
        write_vector_csv(q, gen.normal(size=(2000, 1)))
        code, out, _ = run_cli(
            capsys, ["tvdist", "--p", str(p), "--q", str(q), "--bins", "30", "--seed", "4"]
        )
        assert code == 0
        report = json.loads(out)["outputs"]["report"]
        assert set(report) == {"estimate", "halfwidth", "bins"}
        assert report["estimate"] < 0.2


class TestAuditCommand:
    def test_rr_pass_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, ["audit", "--mechanism", "rr", "--k", "3", "--eps0", "1.0"])
        assert code == 0
        assert json.loads(out)["outputs"]["report"]["verdict"] == "pass"

    def test_subrr_fail_exit_two(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["audit", "--mechanism", "subrr", "--k", "2", "--n", "2",
             "--eps", "1.0", "--claimed-eps", "0.1"],
        )
        assert code == 2
        assert json.loads(out)["outputs"]["report"]["verdict"] == "fail"

    def test_shurr_advisory_fail_exit_three(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["audit", "--mechanism", "shurr", "--k", "2", "--n", "10",
             "--eps", "0.05", "--delta", "0.001", "--eps0", "12.0", "--seed", "9"],
        )
        assert code == 3
        report = json.loads(out)["outputs"]["report"]
        assert report["advisory"] and report["verdict"] == "fail"

    def test_elap_audit_passes(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["audit", "--mechanism", "elap", "--dim", "2", "--B", "1.0",
             "--eps", "1.0", "--seed", "13"],
        )
        assert code == 0

    def test_zcdp_audit(self, capsys):
        code, _, _ = run_cli(
            capsys,
            ["audit", "--mechanism", "zcdp", "--variant", "known_cov", "--B", "1.0",
             "--sigma2", "1.0", "--eps", "1.0", "--n", "10", "--orders", "1.5,2,4"],
        )
        assert code == 0


class TestSweep:
    def test_single_cell_matches_direct_call(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run_cli(
            capsys,
            ["sweep", "--family", "kary", "--k", "10", "--alpha", "0.1",
             "--eps", "1", "--delta", "1e-6", "--m", "5", "--out", str(out)],
        )
        assert code == 0
        header, row = out.read_text().splitlines()
        cols = dict(zip(header.split(","), row.split(",")))
        assert int(cols["kary_single"]) == subrr_sample_complexity(10, 0.1, 1.0).n_required
        assert int(cols["kary_weak"]) == shurr_weak_complexity(10, 0.1, 1.0, 1e-6, 5).n_required

    def test_single_vs_weak_crossover(self):
        # repetition costs m * n_single; the shuffled bound is flat in m until
        # m itself dominates, so it wins exactly once m exceeds fixed/n_single
        k, alpha, eps, delta = 10, 0.1, 0.5, 1e-6
        n_single = subrr_sample_complexity(k, alpha, eps).n_required
        fixed = shurr_weak_complexity(k, alpha, eps, delta, 1).n_required
        m_star = math.ceil(fixed / n_single)
        header, rows = table_sweep(
            "kary",
            {"k": [k], "alpha": [alpha], "eps": [eps], "delta": [delta],
             "m": [max(1, m_star // 2), 2 * m_star]},
        )
        idx = {name: i for i, name in enumerate(header)}
        low_m, high_m = rows[0], rows[1]
        assert low_m[idx["m"]] * n_single < low_m[idx["kary_weak"]]
        assert high_m[idx["m"]] * n_single > high_m[idx["kary_weak"]]

    def test_strong_weak_ratio_tracks_m(self):
        k, alpha, eps, delta = 10, 0.1, 0.5, 1e-6
        for m in (10, 100):
            header, rows = table_sweep(
                "kary", {"k": [k], "alpha": [alpha], "eps": [eps], "delta": [delta], "m": [m]}
            )
            idx = {name: i for i, name in enumerate(header)}
            ratio = rows[0][idx["kary_strong"]] / rows[0][idx["kary_weak"]]
            assert ratio == pytest.approx(m, rel=1e-6)

    def test_gaussian_family(self):
        header, rows = table_sweep(
            "gaussian", {"dim": [1, 2], "R": [1.0], "alpha": [0.1], "eps": [1.0]}
        )
        assert len(rows) == 2
        assert header[-3:] == ["gaussian_pure", "gaussian_zcdp_known", "gaussian_zcdp_bounded"]

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigInvalid):
            table_sweep("kary", {})


class TestRunReportRoundTrip:
    def test_rerun_from_echoed_config(self, capsys, kary_file, tmp_path):
        out = tmp_path / "first.csv"
        code, stdout, _ = run_cli(
            capsys,
            ["sample-kary", "--mode", "shuffle", "--in", str(kary_file),
             "--eps", "300", "--delta", "0.5", "--m", "20",
             "--seed", "21", "--out", str(out)],
        )
        assert code == 0
        first_bytes = out.read_bytes()
        echoed = json.loads(stdout)["config"]
        echoed["output_path"] = str(tmp_path / "second.csv")
        report = run(ExperimentConfig.from_dict(echoed))
        assert (tmp_path / "second.csv").read_bytes() == first_bytes
        # every derived parameter needed for reproduction is in the report
        assert "eps0" in report.derived and "eps1" in report.derived

    def test_report_written_to_json_path(self, capsys, tmp_path):
        json_path = tmp_path / "report.json"
        code, stdout, _ = run_cli(
            capsys,
            ["complexity", "--family", "kary", "--task", "single",
             "--k", "4", "--alpha", "0.2", "--eps", "1", "--json", str(json_path)],
        )
        assert code == 0
        assert json.loads(json_path.read_text()) == json.loads(stdout)
