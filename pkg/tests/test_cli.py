import csv
import subprocess
import sys

import numpy as np
import pytest

from csrecon.cli import main
from csrecon.recon_core import idft
from csrecon.signal_model import read_signal_csv


def run(*argv):
    return main(list(argv))


class TestGen:
    def test_dc_tone(self, tmp_path):
        out = tmp_path / "dc.csv"
        assert run("gen", "--n", "8", "--tones", "1@0", "--out", str(out)) == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "index,re,im"
        assert len(rows) == 9
        x = read_signal_csv(out)
        np.testing.assert_allclose(x, np.ones(8), atol=1e-15)

    def test_quarter_turn(self, tmp_path):
        out = tmp_path / "q.csv"
        assert run("gen", "--n", "4", "--tones", "2@1", "--out", str(out)) == 0
        np.testing.assert_allclose(read_signal_csv(out), [2, 2j, -2, -2j], atol=1e-12)

    def test_random_tones_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run("gen", "--n", "64", "--tones", "random:3:0.5:2.0",
                       "--seed", "9", "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_k_shorthand(self, tmp_path):
        out = tmp_path / "k.csv"
        assert run("gen", "--n", "64", "--k", "3", "--seed", "4", "--out", str(out)) == 0
        x = read_signal_csv(out)
        spectrum = np.fft.fft(x)
        assert np.sum(np.abs(spectrum) > 1.0) == 3

    def test_bad_tone_grammar(self, tmp_path):
        assert run("gen", "--n", "8", "--tones", "nope", "--out", str(tmp_path / "x.csv")) == 2

    def test_random_tones_need_seed(self, tmp_path):
        assert run("gen", "--n", "8", "--tones", "random:2:1:1",
                   "--out", str(tmp_path / "x.csv")) == 2

    def test_duplicate_bins_config_error(self, tmp_path):
        assert run("gen", "--n", "8", "--tones", "1@3,1@3",
                   "--out", str(tmp_path / "x.csv")) == 2


@pytest.fixture()
def three_tone_signal(tmp_path):
    path = tmp_path / "sig.csv"
    assert run("gen", "--n", "256", "--tones", "1@10,1@60,1@201", "--out", str(path)) == 0
    return path


def read_metrics(prefix):
    with open(f"{prefix}.metrics.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows[0]


class TestRecon:
    def test_full_sampling(self, tmp_path, three_tone_signal):
        prefix = tmp_path / "full"
        code = run("recon", "--in", str(three_tone_signal), "--na", "256",
                   "--p", "0.99", "--seed", "0", "--out", str(prefix))
        assert code == 0
        m = read_metrics(prefix)
        assert m["support_exact"] == "true"
        assert float(m["rel_mse_time"]) < 1e-12
        assert float(m["threshold"]) == 0.0

    def test_half_sampling_exact(self, tmp_path, three_tone_signal):
        prefix = tmp_path / "half"
        code = run("recon", "--in", str(three_tone_signal), "--na", "128",
                   "--p", "0.99", "--seed", "1", "--variant", "ref10",
                   "--amp-mode", "oracle", "--out", str(prefix))
        assert code == 0
        m = read_metrics(prefix)
        assert m["support_exact"] == "true"
        assert float(m["rel_mse_time"]) <= 1e-12
        # verify support by brute-force comparison against the input's DFT
        x = read_signal_csv(three_tone_signal)
        true_support = sorted(np.flatnonzero(np.abs(np.fft.fft(x)) > 1e-6 * 256))
        with open(f"{prefix}.detection.csv", newline="") as fh:
            det = list(csv.DictReader(fh))[0]
        got = sorted(int(p) for p in det["positions"].split(";"))
        assert got == true_support == [10, 60, 201]

    def test_hardware_path_writes_trace(self, tmp_path, three_tone_signal):
        prefix = tmp_path / "hw"
        code = run("recon", "--in", str(three_tone_signal), "--na", "128",
                   "--p", "0.99", "--seed", "1", "--path", "hardware",
                   "--out", str(prefix))
        assert code == 0
        assert (tmp_path / "hw.trace.csv").exists()
        assert read_metrics(prefix)["support_exact"] == "true"

    def test_metrics_recomputable_from_spectrum(self, tmp_path, three_tone_signal):
        prefix = tmp_path / "redo"
        assert run("recon", "--in", str(three_tone_signal), "--na", "128",
                   "--p", "0.99", "--seed", "3", "--out", str(prefix)) == 0
        x = read_signal_csv(three_tone_signal)
        with open(f"{prefix}.spectrum.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        spectrum = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        rel_mse = np.sum(np.abs(idft(spectrum) - x) ** 2) / np.sum(np.abs(x) ** 2)
        reported = float(read_metrics(prefix)["rel_mse_time"])
        assert abs(rel_mse - reported) <= 1e-12

    def test_empty_support_exit_code(self, tmp_path):
        # one available sample of a two-tone signal can never clear the
        # threshold, so detection comes back empty deterministically
        sig = tmp_path / "two.csv"
        assert run("gen", "--n", "16", "--tones", "1@1,1@5", "--out", str(sig)) == 0
        prefix = tmp_path / "empty"
        code = run("recon", "--in", str(sig), "--na", "1", "--p", "0.99",
                   "--seed", "0", "--out", str(prefix))
        assert code == 3
        m = read_metrics(prefix)
        assert m["n_detected"] == "0"

    def test_underdetermined_exit_code(self, tmp_path):
        # a permissive confidence level detects far more bins than there
        # are measurements, forcing the underdetermined failure
        sig = tmp_path / "three.csv"
        assert run("gen", "--n", "16", "--tones", "1@1,1@5,1@11", "--out", str(sig)) == 0
        code = run("recon", "--in", str(sig), "--na", "2", "--p", "1e-9",
                   "--seed", "0", "--out", str(tmp_path / "under"))
        assert code == 4

    def test_na_too_large_is_config_error(self, tmp_path, three_tone_signal):
        code = run("recon", "--in", str(three_tone_signal), "--na", "257",
                   "--p", "0.99", "--seed", "0", "--out", str(tmp_path / "x"))
        assert code == 2

    def test_deterministic_outputs(self, tmp_path, three_tone_signal):
        pa, pb = tmp_path / "ra", tmp_path / "rb"
        for prefix in (pa, pb):
            assert run("recon", "--in", str(three_tone_signal), "--na", "128",
                       "--p", "0.99", "--seed", "5", "--out", str(prefix)) == 0
        for suffix in (".spectrum.csv", ".detection.csv", ".metrics.csv"):
            assert (tmp_path / f"ra{suffix}").read_bytes() == (tmp_path / f"rb{suffix}").read_bytes()


class TestCalibrate:
    def test_summary_row(self, tmp_path):
        out = tmp_path / "cal.csv"
        code = run("calibrate", "--n", "128", "--na", "64", "--tones", "1@37",
                   "--p", "0.9", "--trials", "100", "--seed", "7", "--out", str(out))
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 101
        summary = rows[-1]
        assert summary["kind"] == "summary"
        model = float(summary["model_variance"])
        empirical = float(summary["noise_power_mean"])
        assert abs(empirical - model) <= 0.1 * model
        assert 0.8 <= float(summary["all_below"]) <= 1.0  # targets 0.9

    def test_too_few_trials(self, tmp_path):
        code = run("calibrate", "--n", "128", "--na", "64", "--tones", "1@37",
                   "--p", "0.9", "--trials", "99", "--seed", "7",
                   "--out", str(tmp_path / "c.csv"))
        assert code == 2

    def test_full_sampling_vacuous(self, tmp_path):
        out = tmp_path / "cal0.csv"
        code = run("calibrate", "--n", "64", "--na", "64", "--tones", "1@7",
                   "--p", "0.9", "--trials", "100", "--seed", "1", "--out", str(out))
        assert code == 0
        with open(out, newline="") as fh:
            summary = list(csv.DictReader(fh))[-1]
        assert float(summary["model_variance"]) == 0.0
        assert float(summary["all_below"]) == 1.0


class TestXcheck:
    def test_zero_variance_full_agreement(self, tmp_path):
        out = tmp_path / "xc0.csv"
        code = run("xcheck", "--n", "64", "--na", "64", "--tones", "1@7",
                   "--p", "0.99", "--trials", "20", "--seed", "2", "--out", str(out))
        assert code == 0
        with open(out, newline="") as fh:
            summary = list(csv.DictReader(fh))[-1]
        assert float(summary["threshold_ref"]) == 0.0
        assert float(summary["threshold_fixed"]) == 0.0
        assert float(summary["rel_err"]) == 0.0
        assert float(summary["support_match"]) == 1.0

    def test_half_sampling(self, tmp_path):
        out = tmp_path / "xc.csv"
        code = run("xcheck", "--n", "256", "--na", "128", "--k", "3",
                   "--p", "0.99", "--trials", "50", "--seed", "3", "--out", str(out))
        assert code == 0
        with open(out, newline="") as fh:
            summary = list(csv.DictReader(fh))[-1]
        assert float(summary["rel_err"]) <= 1e-3
        assert float(summary["support_match"]) >= 0.98


class TestDumpLut:
    def test_contents(self, tmp_path):
        out = tmp_path / "lut.csv"
        assert run("dump-lut", "--out", str(out)) == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4096
        assert rows[0]["value"] == "0"
        assert rows[2048]["value"] == "19168"


def test_console_entry_point(tmp_path):
    sig = tmp_path / "sig.csv"
    result = subprocess.run(
        [sys.executable, "-m", "csrecon.cli", "gen", "--n", "8",
         "--tones", "1@0", "--out", str(sig)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "wrote" in result.stdout
    bad = subprocess.run(
        [sys.executable, "-m", "csrecon.cli", "gen", "--n", "8",
         "--tones", "nope", "--out", str(tmp_path / "y.csv")],
        capture_output=True, text=True,
    )
    assert bad.returncode == 2
    assert "error" in bad.stderr
