"""Exit codes, report formats, and manifest determinism for the CLI."""

import json
import shutil
import subprocess
import sys
from fractions import Fraction

import pytest

from twotor import cli
from twotor import census
from twotor import local_density


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def strip_volatile(text: str) -> str:
    lines = []
    for ln in text.splitlines():
        if ln.startswith("# wall_time_s:") or '"wall_time_s"' in ln:
            continue
        lines.append(ln)
    return "\n".join(lines)


class TestClassify:
    def test_five_five_invariants(self, capsys):
        code, doc = run_json(capsys, ["classify", "5", "5"])
        assert code == 0
        assert doc["invariants"]["delta"] == 2000
        assert doc["invariants"]["cond_poly"] == 25
        at5 = [row for row in doc["local"] if row["p"] == 5]
        assert at5 and at5[0]["symbol"] == "III"

    def test_nonminimal_input_reduced(self, capsys):
        code, doc = run_json(capsys, ["classify", "150", "3125"])
        assert code == 0
        assert (doc["invariants"]["minimal_a"], doc["invariants"]["minimal_b"]) == (6, 5)

    def test_singular_rejected(self, capsys):
        assert cli.main(["classify", "2", "1"]) == 2

    def test_csv_table(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        assert cli.main(["classify", "5", "5", "--out", str(out)]) == 0
        text = out.read_text()
        assert "# subcommand: classify" in text
        assert "# config_sha256: " in text
        header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
        assert header.split(",")[:2] == ["p", "v_a"]
        assert any(ln.startswith("5,") and ",III," in ln for ln in text.splitlines())


class TestCensusCommand:
    def test_csv_rows_match_library(self, tmp_path, capsys):
        out = tmp_path / "census.csv"
        code = cli.main(["census", "--x", "10000", "--family", "condpoly",
                         "--order-by", "condpoly", "--out", str(out)])
        assert code == 0
        report = census.run_census(census.CensusConfig(X=10000))
        rows = [ln.split(",") for ln in out.read_text().splitlines()
                if ln and not ln.startswith("#") and not ln.startswith("X,")]
        assert [int(r[0]) for r in rows] == list(report.cutoffs)
        assert [int(r[1]) for r in rows] == list(report.counts)

    def test_json_includes_anomalies(self, capsys):
        code, doc = run_json(capsys, ["census", "--x", "1000"])
        assert code == 0
        assert "out_of_list_symbols" in doc["report"]["anomalies"]
        assert doc["report"]["config"]["family"] == "CondPoly"

    def test_grid_flag(self, capsys):
        code, doc = run_json(capsys, ["census", "--x", "1e3", "--grid", "1e2,1e3"])
        assert code == 0
        assert doc["report"]["cutoffs"] == [100, 1000]

    @pytest.mark.parametrize("argv", [
        ["census", "--x", "0"],
        ["census", "--x", "100", "--kappa", "2"],
        ["census", "--x", "100", "--grid", "10,abc"],
        ["census", "--x", "100", "--workers", "0"],
    ])
    def test_config_errors(self, argv, capsys):
        assert cli.main(argv) == 2

    def test_sieve_env_hook(self, monkeypatch, capsys):
        called = {}
        monkeypatch.setenv("CENSUS_SIEVE_BOUND", "1e5")
        monkeypatch.setattr(cli.arithmetic, "ensure_sieve",
                            lambda n: called.setdefault("n", n))
        assert cli.main(["census", "--x", "100"]) == 0
        assert called["n"] == 10**5


class TestLocalDensityCommand:
    def test_check_agrees(self, capsys):
        code, doc = run_json(capsys, ["local-density", "--p", "7",
                                      "--class", "I0*", "--check"])
        assert code == 0
        assert doc["density"]["match"] is True
        assert doc["density"]["density"] == {"num": 6, "den": 2401}

    def test_semistable_needs_k(self, capsys):
        assert cli.main(["local-density", "--p", "5", "--class", "semistable"]) == 2
        code, doc = run_json(capsys, ["local-density", "--p", "5",
                                      "--class", "semistable", "--k", "2", "--check"])
        assert code == 0
        assert doc["density"]["density"] == {"num": 32, "den": 625}

    def test_forced_mismatch_is_exit_3(self, monkeypatch, capsys):
        monkeypatch.setattr(cli.local_density, "density_empirical",
                            lambda *a, **k: Fraction(1, 2))
        assert cli.main(["local-density", "--p", "5", "--class", "III",
                         "--check"]) == 3


class TestRealDensityCommand:
    def test_closed_value(self, capsys):
        code, doc = run_json(capsys, ["real-density", "--method", "closed", "--z", "1"])
        assert code == 0
        assert doc["area"]["value"] == pytest.approx(11.936352617582644)

    def test_quad_matches_closed(self, capsys):
        code, doc = run_json(capsys, ["real-density", "--method", "quad",
                                      "--z", "1", "--tol", "1e-9"])
        assert code == 0
        assert doc["area"]["value"] == pytest.approx(11.936352617582644, rel=1e-7)

    def test_mc_deterministic(self, capsys):
        argv = ["real-density", "--method", "mc", "--z", "100",
                "--samples", "20000", "--seed", "5"]
        _, doc1 = run_json(capsys, argv)
        _, doc2 = run_json(capsys, argv)
        assert doc1["area"] == doc2["area"]


class TestLpCommand:
    def test_single_point_rationals(self, capsys):
        code, doc = run_json(capsys, ["lp", "--delta", "1/102", "--r", "1/100"])
        assert code == 0
        row = doc["rows"][0]
        assert row["certificate"] == {"num": 2551, "den": 1700}
        assert row["simplex"] == row["certificate"]
        assert row["match"] is True

    def test_origin_is_three_halves(self, capsys):
        code, doc = run_json(capsys, ["lp", "--delta", "0", "--r", "0"])
        assert code == 0
        assert doc["rows"][0]["certificate"] == {"num": 3, "den": 2}

    def test_sweep_csv(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert cli.main(["lp", "--sweep", "--out", str(out)]) == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "delta,r,certificate,simplex,match"
        assert len(lines) == 1 + 44
        assert all(ln.endswith(",True") for ln in lines[1:])

    def test_bad_fraction_rejected(self, capsys):
        assert cli.main(["lp", "--delta", "zero"]) == 2
        assert cli.main(["lp", "--delta", "1/2"]) == 2  # outside [0, 1/2)


class TestTailsCommand:
    def test_index_grid(self, capsys):
        code, doc = run_json(capsys, ["tails", "index", "--grid", "1e2,1e3"])
        assert code == 0
        assert [row["X"] for row in doc["tails"]] == [100, 1000]
        assert all(row["count"] >= 0 for row in doc["tails"])

    def test_szpiro_single(self, capsys):
        code, doc = run_json(capsys, ["tails", "szpiro", "--x", "1e3",
                                      "--theta", "0.25", "--kappa", "2.2"])
        assert code == 0
        assert doc["tails"][0]["params"] == "theta=0.25;kappa=2.2"

    def test_bad_theta(self, capsys):
        assert cli.main(["tails", "szpiro", "--x", "100", "--theta", "-1"]) == 2


class TestEulerCommand:
    def test_condpoly_constant(self, capsys):
        code, doc = run_json(capsys, ["euler", "--family", "condpoly",
                                      "--tol", "1e-8"])
        assert code == 0
        assert doc["euler"]["mt1_constant"] == pytest.approx(0.2637393, abs=1e-5)
        assert doc["euler"]["euler_product"] == pytest.approx(
            doc["euler"]["dirichlet_index_sum"], abs=1e-7)

    def test_unreachable_tolerance(self, capsys):
        assert cli.main(["euler", "--family", "cubefree", "--tol", "1e-12"]) == 2


class TestPlumbing:
    def test_unknown_subcommand(self, capsys):
        assert cli.main(["bogus"]) == 2

    def test_help_exits_zero(self, capsys):
        assert cli.main(["--help"]) == 0

    def test_bad_out_extension(self, capsys):
        assert cli.main(["classify", "5", "5", "--out", "/tmp/x.txt"]) == 2

    def test_reports_byte_identical_modulo_wall_time(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["census", "--x", "1000", "--grid", "1e2,1e3"]
        assert cli.main(argv + ["--out", str(a)]) == 0
        assert cli.main(argv + ["--out", str(b)]) == 0
        assert strip_volatile(a.read_text()) == strip_volatile(b.read_text())
        assert a.read_text() != ""

    def test_config_hash_tracks_args(self, capsys):
        _, d1 = run_json(capsys, ["lp", "--delta", "0", "--r", "0"])
        _, d2 = run_json(capsys, ["lp", "--delta", "0", "--r", "0"])
        _, d3 = run_json(capsys, ["lp", "--delta", "1/100", "--r", "0"])
        h = lambda d: d["manifest"]["input_hashes"]["config_sha256"]
        assert h(d1) == h(d2) != h(d3)

    def test_manifest_embedded_everywhere(self, capsys):
        for argv in (["classify", "5", "5"], ["lp", "--delta", "0", "--r", "0"]):
            _, doc = run_json(capsys, argv)
            assert doc["manifest"]["subcommand"] == argv[0]
            assert doc["manifest"]["version"]

    @pytest.mark.skipif(shutil.which("twotor") is None,
                        reason="console script not on PATH")
    def test_console_script(self):
        proc = subprocess.run(["twotor", "lp", "--delta", "0", "--r", "0"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["rows"][0]["match"] is True

    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "twotor.cli", "classify", "5", "5"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["invariants"]["delta"] == 2000
