import json
import math
from pathlib import Path

import pytest

from zetalab import cli


def run_cli(args):
    return cli.main([str(a) for a in args])


def read_outputs(out_dir):
    out = Path(out_dir)
    return (
        (out / "results.csv").read_text(),
        json.loads((out / "results.json").read_text()),
        json.loads((out / "manifest.json").read_text()),
    )


class TestParseComplex:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2", 2 + 0j),
            ("-1", -1 + 0j),
            ("0.5+0.5i", 0.5 + 0.5j),
            ("1+i", 1 + 1j),
            ("i", 1j),
            ("-2.5j", -2.5j),
            ("1-i", 1 - 1j),
        ],
    )
    def test_forms(self, text, expected):
        assert cli.parse_complex(text) == expected


class TestRmtMoment:
    def test_row_and_manifest(self, tmp_path):
        out = tmp_path / "run"
        status = run_cli(
            ["--output-dir", out, "rmt-moment", "--n", 8, "--k", "2",
             "--samples", 20000, "--seed", 7]
        )
        assert status == 0
        csv_text, rows, manifest = read_outputs(out)
        assert csv_text.splitlines()[0] == ",".join(cli.CSV_COLUMNS)
        assert rows[0]["experiment"] == "rmt-moment"
        assert float(rows[0]["predicted_re"]) == pytest.approx(-15.0, abs=1e-9)
        # estimate lands in a loose band around the exact value at 2e4 samples
        assert float(rows[0]["empirical_re"]) == pytest.approx(-15.0, abs=10.0)
        assert manifest["config"]["seed"] == 7
        assert manifest["checksums"]["results.csv"]
        assert manifest["column_contract"]["provenance"]["empirical_re"] == "empirical"

    def test_byte_identical_reruns(self, tmp_path):
        args = ["rmt-moment", "--n", 4, "--k", "1", "--samples", 5000, "--seed", 3]
        run_cli(["--output-dir", tmp_path / "a"] + args)
        run_cli(["--output-dir", tmp_path / "b"] + args)
        a = (tmp_path / "a" / "results.csv").read_bytes()
        b = (tmp_path / "b" / "results.csv").read_bytes()
        assert a == b


class TestGates:
    def test_toeplitz_k0_gate_passes(self, tmp_path):
        status = run_cli(
            ["--output-dir", tmp_path, "toeplitz-check", "--k", "0", "--sizes", "8,16,32"]
        )
        assert status == 0
        _, rows, manifest = read_outputs(tmp_path)
        assert len(rows) == 3
        assert manifest["gates"]
        assert manifest["gate_failures"] == []

    def test_failing_gate_nonzero_exit(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "gates": [{"name": "impossible", "column": "ratio_re", "min": 0.999999, "max": 1.000001}]
        }))
        status = run_cli(
            ["--config", cfg, "--output-dir", tmp_path / "out", "toeplitz-check",
             "--k", "1", "--sizes", "8"]
        )
        assert status == 3
        err = capsys.readouterr().err
        assert "impossible" in err

    def test_config_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 2, "k": "1", "samples": 2000, "seed": 1}))
        status = run_cli(
            ["--config", cfg, "--output-dir", tmp_path / "out", "rmt-moment", "--samples", 4000]
        )
        assert status == 0
        _, rows, manifest = read_outputs(tmp_path / "out")
        assert manifest["config"]["samples"] == 4000  # flag wins
        assert manifest["config"]["n"] == 2  # config survives

    def test_missing_field_config_error(self, tmp_path):
        status = run_cli(["--output-dir", tmp_path, "rmt-moment", "--n", 4])
        assert status == 2


class TestZerosSubcommands:
    def test_compute_load_cross_validate(self, tmp_path, published_table_path):
        out_file = tmp_path / "computed.txt"
        status = run_cli(
            ["--output-dir", tmp_path / "c", "zeros", "compute", "--t-max", 60, "--out", out_file]
        )
        assert status == 0
        assert out_file.exists()

        status = run_cli(["--output-dir", tmp_path / "l", "zeros", "load", "--path", out_file])
        assert status == 0
        _, rows, _ = read_outputs(tmp_path / "l")
        assert int(rows[0]["n_zeros"]) == 13  # zeros below 60

        status = run_cli(
            ["--output-dir", tmp_path / "x", "zeros", "cross-validate",
             "--a", out_file, "--b", published_table_path]
        )
        assert status == 0
        _, rows, _ = read_outputs(tmp_path / "x")
        assert float(rows[0]["empirical_re"]) < 1e-6  # max |delta gamma|


class TestOracleAndHybrid:
    def test_rmt_oracle(self, tmp_path):
        status = run_cli(
            ["--output-dir", tmp_path, "rmt-oracle", "--n", 2, "--k", "1", "--grid", 512]
        )
        assert status == 0
        _, rows, _ = read_outputs(tmp_path)
        assert float(rows[0]["empirical_im"]) == pytest.approx(1.5, abs=1e-5)

    def test_hybrid_fourier_check(self, tmp_path):
        status = run_cli(
            ["--output-dir", tmp_path, "hybrid-fourier-check", "--x", math.e**2,
             "--k", "1", "--j-window", 40, "--grid", 64, "--m-max", 4]
        )
        assert status == 0
        _, rows, _ = read_outputs(tmp_path)
        assert len(rows) == 4
        for row in rows:
            emp = complex(float(row["empirical_re"]), float(row["empirical_im"]))
            pred = complex(float(row["predicted_re"]), float(row["predicted_im"]))
            assert abs(emp - pred) < 1e-5


class TestExperimentSubcommands:
    def test_landau_gonek_with_table(self, tmp_path, zeros_5000, zeros_cache_dir):
        table = tmp_path / "zeros.txt"
        table.write_text("".join(f"{g:.11f}\n" for g in zeros_5000.gammas))
        status = run_cli(
            ["--output-dir", tmp_path / "lg", "landau-gonek", "--t", 5000,
             "--m", 2, "--zeros", table]
        )
        assert status == 0
        _, rows, _ = read_outputs(tmp_path / "lg")
        assert float(rows[0]["predicted_re"]) == pytest.approx(-275.8, abs=0.1)
        assert float(rows[0]["empirical_re"]) == pytest.approx(-275.8, rel=0.2)

    def test_conjecture_table(self, tmp_path, zeros_5000):
        table = tmp_path / "zeros.txt"
        table.write_text("".join(f"{g:.11f}\n" for g in zeros_5000.gammas))
        status = run_cli(
            ["--output-dir", tmp_path / "ct", "conjecture-table", "--k", "1",
             "--t", "1000,2500", "--zeros", table]
        )
        assert status == 0
        _, rows, _ = read_outputs(tmp_path / "ct")
        assert [float(r["T"]) for r in rows] == [1000.0, 2500.0]
        assert all(r["n_zeros"] for r in rows)
