import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from metropolis_epi.cli import main
from metropolis_epi.config import RunConfig, parse_config
from metropolis_epi.errors import ConfigError, DataError
from metropolis_epi.fileio import load_dataset, read_chain_csv, write_chain_csv, write_trace_svg
from metropolis_epi.report import parse_tsv
from metropolis_epi.sampler import Variant
from metropolis_epi.target import Flat, Normal


class TestConfig:
    def test_empty_is_defaults(self):
        cfg = parse_config("")
        assert cfg == RunConfig()
        assert cfg.variant is Variant.GUIDED_ADAPTIVE
        assert (cfg.iterations, cfg.burnin, cfg.incidence) == (100_000, 1_000, 4.8e-5)
        assert (cfg.proposal_beta0, cfg.proposal_beta1) == (0.1, 0.1)
        assert cfg.prior_beta0 == Flat() and cfg.prior_beta1 == Flat()

    def test_normal_prior(self):
        cfg = parse_config("# priors\nprior.beta1 = normal(0, 0.5)  # informative\n")
        assert cfg.prior_beta1 == Normal(0.0, 0.5)

    def test_range_error_names_key_and_line(self):
        with pytest.raises(ConfigError) as e:
            parse_config("seed = 3\niterations = -5\n")
        assert e.value.key == "iterations" and e.value.line == 2
        assert "iterations" in str(e.value)

    @pytest.mark.parametrize("text,key,line", [
        ("itrations = 5", "itrations", 1),
        ("\nburnin = ten", "burnin", 2),
        ("seed = 1\nseed = 2", "seed", 2),
        ("prior.beta0 = cauchy(0, 1)", "prior.beta0", 1),
        ("variant = hmc", "variant", 1),
        ("incidence = 2", "incidence", 1),
        ("window = 9:3", "window", 1),
    ])
    def test_errors(self, text, key, line):
        with pytest.raises(ConfigError) as e:
            parse_config(text)
        assert (e.value.key, e.value.line) == (key, line)

    def test_round_trip(self):
        cfg = parse_config("variant = rw\nprior.beta0 = normal(0, 100)\nwindow = 10:20\ninit = 1.5, -2")
        assert parse_config(cfg.to_text()) == cfg

    def test_override_wins(self):
        assert parse_config("seed = 1", {"seed": "2"}).seed == 2


class TestDataset:
    def test_record_level_matches_bundled(self, tmp_path, leukemia):
        rows = ["y,x"] + [f"{y},{x}" for y, x in leukemia.expand()]
        p = tmp_path / "records.csv"
        p.write_text("\n".join(rows) + "\n")
        assert load_dataset(p) == leukemia

    @pytest.mark.parametrize("body,row", [
        ("y,x,count\n1,1,3\n2,0,4\n", 3),
        ("y,x,count\n1,1,-3\n", 2),
        ("y,x\n1,1\n0,a\n", 3),
        ("a,b\n1,1\n", 1),
        ("", 1),
    ])
    def test_errors(self, tmp_path, body, row):
        p = tmp_path / "bad.csv"
        p.write_text(body)
        with pytest.raises(DataError) as e:
            load_dataset(p)
        assert e.value.row == row

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_dataset(tmp_path / "nope.csv")


def test_chain_csv_round_trip(tmp_path, rng):
    draws = rng.standard_normal((200, 2)) * 1e-7
    lps = rng.standard_normal(200) * 1e5
    acc = rng.random(200) < 0.5
    write_chain_csv(tmp_path / "c.csv", draws, lps, acc, first_iteration=1001)
    back = read_chain_csv(tmp_path / "c.csv")
    assert back["draws"].tobytes() == draws.tobytes()
    assert back["log_posts"].tobytes() == lps.tobytes()
    np.testing.assert_array_equal(back["accepted"], acc)
    assert back["iteration"][0] == 1001


def _points(svg):
    root = ET.parse(svg).getroot()
    line = root.find("{http://www.w3.org/2000/svg}polyline")
    return line.get("points").split()


def test_svg_points(tmp_path, rng):
    it = np.arange(1, 501)
    write_trace_svg(tmp_path / "t.svg", it, rng.standard_normal(500), "beta1")
    assert len(_points(tmp_path / "t.svg")) == 500
    write_trace_svg(tmp_path / "w.svg", it, rng.standard_normal(500), "beta1", thin=10, window=(101, 300))
    assert len(_points(tmp_path / "w.svg")) == 20


def _run(tmp_path, *extra, name="out"):
    out = tmp_path / name
    assert main(["run", "--output-dir", str(out), "--iterations", "4000", "--burnin", "200", *extra]) == 0
    return out


class TestCli:
    def test_run_outputs(self, tmp_path, capsys):
        out = _run(tmp_path)
        for f in ("chain.csv", "burnin.csv", "summary.tsv", "trace_beta0.svg", "trace_beta1.svg", "config.txt"):
            assert (out / f).exists()
        chain = read_chain_csv(out / "chain.csv")
        assert chain["draws"].shape == (4000, 2)
        assert chain["iteration"][0] == 201
        assert len(_points(out / "trace_beta1.svg")) == 4000
        assert read_chain_csv(out / "burnin.csv")["draws"].shape == (200, 2)

    def test_same_seed_byte_identical(self, tmp_path):
        a = _run(tmp_path, name="a")
        b = _run(tmp_path, name="b")
        assert (a / "chain.csv").read_bytes() == (b / "chain.csv").read_bytes()
        c = _run(tmp_path, "--seed", "7", name="c")
        assert (a / "chain.csv").read_bytes() != (c / "chain.csv").read_bytes()

    def test_summarize_rederives_exactly(self, tmp_path, capsys):
        out = _run(tmp_path, "--variant", "guided")
        capsys.readouterr()
        assert main(["summarize", str(out / "chain.csv"), "--method", "guided"]) == 0
        assert capsys.readouterr().out == (out / "summary.tsv").read_text()

    def test_summarize_python_backend(self, tmp_path, capsys):
        out = _run(tmp_path, "--backend", "python", "--iterations", "500")
        capsys.readouterr()
        assert main(["summarize", str(out / "chain.csv"), "--method", "guided-adaptive", "--backend", "python"]) == 0
        assert capsys.readouterr().out == (out / "summary.tsv").read_text()

    def test_config_file_and_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("variant = random-walk\nseed = 5\n")
        out = _run(tmp_path, "--config", str(cfg), "--seed", "6")
        assert "seed = 6" in (out / "config.txt").read_text()
        assert parse_tsv((out / "summary.tsv").read_text())[0]["method"] == "random-walk"

    def test_compare_writes_three(self, tmp_path):
        out = _run(tmp_path, "--compare")
        rows = parse_tsv((out / "summary.tsv").read_text())
        assert [r["method"] for r in rows] == [v.value for v in Variant]
        assert (out / "guided" / "chain.csv").exists()
        assert (out / "comparison.tsv").exists()

    def test_exit_codes(self, tmp_path, capsys):
        assert main(["run", "--iterations", "-5", "--output-dir", str(tmp_path)]) == 1
        assert "iterations" in capsys.readouterr().err
        bad = tmp_path / "bad.csv"
        bad.write_text("y,x\n2,0\n")
        assert main(["run", "--data", str(bad), "--output-dir", str(tmp_path)]) == 2
        assert main(["run", "--incidence", "1e-300", "--iterations", "50", "--burnin", "100",
                     "--output-dir", str(tmp_path / "n")]) == 3
        with pytest.raises(SystemExit) as e:
            main(["frobnicate"])
        assert e.value.code == 1

    def test_mle(self, capsys):
        assert main(["mle"]) == 0
        row = parse_tsv(capsys.readouterr().out)[0]
        assert abs(row["or"] - 3.51) <= 0.005 and abs(row["se_beta1"] - 0.754) <= 0.001

    def test_bootstrap(self, capsys):
        assert main(["bootstrap", "--b", "1000"]) == 0
        captured = capsys.readouterr()
        assert 0.03 <= parse_tsv(captured.out)[0]["separated_fraction"] <= 0.07
        assert "separation" in captured.err

    def test_demo_two_state(self, capsys):
        assert main(["demo-two-state", "--ratio", "2"]) == 0
        assert abs(parse_tsv(capsys.readouterr().out)[0]["freq_b"] - 2 / 3) < 0.01

    def test_module_entry_point(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "metropolis_epi", "mle"], capture_output=True, text=True)
        assert r.returncode == 0 and "maximum-likelihood" in r.stdout
