"""Tests for the click command-line interface."""

import numpy as np
import pytest
from click.testing import CliRunner

from svdfbmc.cli.commands import apply_overrides, cli
from svdfbmc.core.config import SimConfig


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return CliRunner()


def test_init_creates_config(runner, tmp_path):
    result = runner.invoke(cli, ["init", "--file", "run.py"])
    assert result.exit_code == 0
    assert (tmp_path / "run.py").exists()


def test_init_keeps_existing_file(runner, tmp_path):
    (tmp_path / "run.py").write_text("SYSTEM = 'ofdm'\n")
    result = runner.invoke(cli, ["init", "--file", "run.py"], input="n\n")
    assert "Aborted." in result.output
    assert (tmp_path / "run.py").read_text() == "SYSTEM = 'ofdm'\n"


def test_flops_table(runner):
    result = runner.invoke(cli, ["flops", "--max-antennas", "2"])
    assert result.exit_code == 0
    row = [line.split() for line in result.output.splitlines() if line.strip().startswith("2 ")]
    assert row[-1] == ["2", "93", "168"]


def test_filter_export(runner, tmp_path):
    result = runner.invoke(cli, ["filter", "-o", "g.txt"])
    assert result.exit_code == 0
    assert "Non-negligible tones: 7" in result.output
    assert np.loadtxt(str(tmp_path / "g.txt")).shape == (256, 5)


def test_schemes_listing(runner):
    result = runner.invoke(cli, ["schemes"])
    assert result.exit_code == 0
    for name in ("ofdm", "sc", "sc-smooth", "finer", "proposed", "awgn"):
        assert f"- {name}:" in result.output


def test_ber_sweep(runner, tmp_path):
    result = runner.invoke(
        cli,
        [
            "ber",
            "--system",
            "awgn",
            "--no-coding",
            "--frames-per-point",
            "2",
            "--min-frames",
            "2",
            "--snr-grid-db",
            "10,20",
            "--target-ber",
            "0.01",
            "--output-dir",
            str(tmp_path / "out"),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "SNR at BER 0.01:" in result.output
    assert len(list((tmp_path / "out").glob("ber_*.csv"))) == 1
    assert len(list((tmp_path / "out").glob("ber_*.manifest.py"))) == 1


def awgn_sweep_args(out, workers):
    return [
        "ber",
        "--system",
        "awgn",
        "--no-coding",
        "--snr-grid-db",
        "10",
        "--frames-per-point",
        "4",
        "--min-frames",
        "2",
        "--workers",
        str(workers),
        "--output-dir",
        str(out),
    ]


def test_worker_count_gives_identical_csv(runner, tmp_path):
    for workers in (1, 2):
        result = runner.invoke(cli, awgn_sweep_args(tmp_path / f"w{workers}", workers))
        assert result.exit_code == 0, result.output
    (one,) = (tmp_path / "w1").glob("ber_*.csv")
    (two,) = (tmp_path / "w2").glob("ber_*.csv")
    assert one.name == two.name
    assert one.read_bytes() == two.read_bytes()


def test_ber_dumps_tone_frames(runner, tmp_path):
    path = tmp_path / "frames.c64"
    result = runner.invoke(
        cli,
        [
            "ber",
            "--system",
            "proposed",
            "--no-coding",
            "--snr-grid-db",
            "30",
            "--frames-per-point",
            "1",
            "--min-frames",
            "1",
            "--output-dir",
            str(tmp_path / "out"),
            "--dump-frames",
            str(path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "Tone frames of shape (14, 2, 256)" in result.output
    assert path.stat().st_size == 14 * 2 * 256 * 8


def test_ber_dump_rejects_subchannel_system(runner, tmp_path):
    result = runner.invoke(
        cli, ["ber", "--system", "sc", "--dump-frames", str(tmp_path / "frames.c64")]
    )
    assert result.exit_code == 1
    assert "tone-level" in result.output
    assert not list(tmp_path.glob("results/ber_*.csv"))


def test_ber_rejects_unknown_system(runner):
    result = runner.invoke(cli, ["ber", "--system", "bogus"])
    assert result.exit_code == 1
    assert "Unknown system" in result.output


def test_missing_config_file(runner):
    result = runner.invoke(cli, ["--config", "missing.py", "schemes"])
    assert result.exit_code == 1


def test_config_file_is_used(runner, tmp_path):
    (tmp_path / "config.py").write_text('SYSTEM = "finer"\n')
    result = runner.invoke(cli, ["schemes"])
    assert "Configured system: finer" in result.output


def test_apply_overrides():
    config = apply_overrides(
        SimConfig(), {"snr_grid_db": "5, 10", "coding": False, "n_iter": None}
    )
    assert config.SNR_GRID_DB == [5.0, 10.0]
    assert config.CODING is False
    assert config.N_ITER == 3


def test_leak_report(runner):
    result = runner.invoke(
        cli, ["leak", "--draws", "1", "--systems", "finer", "--channel-model", "flat"]
    )
    assert result.exit_code == 0, result.output
    assert "finer:" in result.output


def test_leak_rejects_ofdm(runner):
    result = runner.invoke(cli, ["leak", "--draws", "1", "--systems", "ofdm"])
    assert result.exit_code == 1


def test_hist_writes_csv(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["hist", "--draws", "1", "--dump", "--output-dir", str(out)])
    assert result.exit_code == 0, result.output
    assert "Total variation phase vs ortho" in result.output
    assert len(list(out.glob("hist_*.csv"))) == 1
    assert (out / "beamformers_ortho.c64").exists()
