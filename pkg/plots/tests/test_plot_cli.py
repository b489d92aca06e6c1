import shutil
import subprocess
import sys

import pytest

from dbpplots.cli import main

from test_render import write_ber_csv, write_tradeoff_csv


class TestCli:
    def test_renders_ber(self, tmp_path, capsys):
        csv = write_ber_csv(tmp_path / "ber.csv")
        out = tmp_path / "fig.png"
        assert main(["--input", str(csv), "--kind", "ber", "--output", str(out)]) == 0
        assert out.is_file()
        assert str(out) in capsys.readouterr().out

    def test_log_toggles(self, tmp_path):
        csv = write_tradeoff_csv(tmp_path / "tradeoff.csv")
        out = tmp_path / "fig.png"
        code = main(
            ["--input", str(csv), "--kind", "transfer", "--output", str(out), "--linear-x"]
        )
        assert code == 0 and out.is_file()

    def test_missing_column_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("n_coh,m_pd_ul\n1,1152\n")
        code = main(["--input", str(bad), "--kind", "transfer", "--output", str(tmp_path / "x.png")])
        assert code == 1
        assert "m_fd_ul" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = main(
            ["--input", str(tmp_path / "nope.csv"), "--kind", "ber", "--output", str(tmp_path / "x.png")]
        )
        assert code == 2


@pytest.mark.skipif(shutil.which("dbpsim") is None, reason="simulator CLI not installed")
class TestAgainstSimulatorOutputs:
    """End to end through the file interface: simulator CSVs in, images out."""

    def run_sim(self, args):
        return subprocess.run(
            ["dbpsim", *args], capture_output=True, text=True, check=True, timeout=300
        )

    def test_tradeoff_preset_renders(self, tmp_path):
        self.run_sim(["tradeoff", "--config", "fig3b", "--out", str(tmp_path)])
        for kind in ("transfer", "complexity"):
            out = tmp_path / f"{kind}.png"
            assert main(["--input", str(tmp_path / "tradeoff.csv"), "--kind", kind,
                         "--output", str(out)]) == 0
            assert out.is_file() and out.stat().st_size > 1000

    def test_ber_preset_renders(self, tmp_path):
        # the fig3a preset grid with a quick trial budget; same CSV schema
        self.run_sim(
            [
                "ber",
                "--config",
                "fig3a",
                "--out",
                str(tmp_path),
                "--set",
                "trials=2000",
                "--set",
                "snr_db=[-10,-5,0]",
            ]
        )
        out = tmp_path / "ber.png"
        assert main(["--input", str(tmp_path / "ber.csv"), "--kind", "ber",
                     "--output", str(out)]) == 0
        assert out.is_file() and out.stat().st_size > 1000
