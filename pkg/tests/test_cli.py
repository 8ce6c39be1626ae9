"""
Tests for the srpsim command line
"""

import pandas as pd
import pytest
from click.testing import CliRunner

from srpsim.cli import cli
from srpsim.io import read_fit_report, read_header, read_table

SMALL_RUN = """\
lattice:
  kind: square
  L: 4
chain:
  alpha: 0.8
  seed: 11
  thermalization_sweeps: 6
  sweeps_between_samples: 2
  samples: 6
output:
  checkpoint_every: 0
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_RUN)
    return str(path)


class TestSimulate:
    """simulate and --resume"""

    def test_writes_outputs(self, runner, small_config, tmp_path):
        out = tmp_path / "run"
        result = runner.invoke(cli, ["simulate", "--config", small_config, "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "Samples: 6" in result.output
        samples = read_table(out / "samples.csv")
        assert len(samples) == 6
        assert samples["sweep"].tolist() == [8, 10, 12, 14, 16, 18]
        assert read_header(out / "samples.csv")["L"] == "4"
        assert (out / "traces.csv").exists() and (out / "checkpoint.npz").exists()

    def test_same_seed_same_samples(self, runner, small_config, tmp_path):
        for name in ("a", "b"):
            runner.invoke(cli, ["simulate", "--config", small_config, "--out", str(tmp_path / name)])
        pd.testing.assert_frame_equal(read_table(tmp_path / "a" / "samples.csv"),
                                      read_table(tmp_path / "b" / "samples.csv"))

    def test_resume_continues_the_run(self, runner, small_config, tmp_path):
        full, first, rest = tmp_path / "full", tmp_path / "first", tmp_path / "rest"
        runner.invoke(cli, ["simulate", "--config", small_config, "--out", str(full)])
        runner.invoke(cli, ["simulate", "--config", small_config, "--samples", "3", "--out", str(first)])
        result = runner.invoke(cli, ["simulate", "--config", small_config, "--out", str(rest),
                                     "--resume", str(first / "checkpoint.npz")])
        assert result.exit_code == 0, result.output
        joined = pd.concat([read_table(first / "samples.csv"), read_table(rest / "samples.csv")],
                           ignore_index=True)
        pd.testing.assert_frame_equal(joined, read_table(full / "samples.csv"))

    def test_invalid_override(self, runner, tmp_path):
        result = runner.invoke(cli, ["simulate", "--L", "1", "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "Error" in result.output


class TestNuCurve:
    """nu-curve sampling and injection"""

    def test_inject_is_exact(self, runner, tmp_path):
        source = tmp_path / "nu_in.csv"
        values = [1.0, 0.75, 0.1 + 0.2, 1.0 / 7.0, 0.0]
        source.write_text("K,nu\n" + "".join(f"{k},{v!r}\n" for k, v in enumerate(values)))
        out = tmp_path / "out"
        result = runner.invoke(cli, ["nu-curve", "--inject", str(source), "--out", str(out)])
        assert result.exit_code == 0, result.output
        table = read_table(out / "nu_curve.csv")
        assert table["nu"].tolist() == values
        assert table["K"].tolist() == [0, 1, 2, 3, 4]

    def test_malformed_injection(self, runner, tmp_path):
        source = tmp_path / "nu_in.csv"
        source.write_text("K,nu\n0,1.0\n1\n")
        result = runner.invoke(cli, ["nu-curve", "--inject", str(source), "--out", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "line 3" in result.output

    def test_sampled_curve(self, runner, small_config, tmp_path):
        out = tmp_path / "nu"
        result = runner.invoke(cli, ["nu-curve", "--config", small_config, "--out", str(out)])
        assert result.exit_code == 0, result.output
        table = read_table(out / "nu_curve.csv")
        assert set(table.columns) >= {"alpha", "K", "nu"}
        assert (table["nu"].diff().dropna() <= 0).all()
        assert table["nu"].between(0, 1).all()

    def test_single_site_curve(self, runner, tmp_path):
        path = tmp_path / "site.yaml"
        path.write_text(SMALL_RUN + "nu_curve:\n  kmax: 16\n  site: 5\n")
        out = tmp_path / "nu"
        result = runner.invoke(cli, ["nu-curve", "--config", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert read_header(out / "nu_curve.csv")["site"] == "5"
        table = read_table(out / "nu_curve.csv")
        # each sample adds 0 or 1, so nu is a multiple of 1/samples
        assert ((table["nu"] * 6).round(9) % 1 == 0).all()
        assert (table["nu"].diff().dropna() <= 0).all()

    def test_site_outside_lattice(self, runner, tmp_path):
        path = tmp_path / "site.yaml"
        path.write_text(SMALL_RUN + "nu_curve:\n  site: 16\n")
        result = runner.invoke(cli, ["nu-curve", "--config", str(path), "--out", str(tmp_path / "nu")])
        assert result.exit_code == 1
        assert "outside" in result.output


class TestBoxDim:
    """Calibration sets through the command line"""

    @pytest.mark.parametrize("name,dimension", [("grid", 2.0), ("line", 1.0)])
    def test_calibration(self, runner, tmp_path, name, dimension):
        out = tmp_path / "cal"
        result = runner.invoke(cli, ["boxdim", "--calibrate", name, "--L", "128", "--out", str(out)])
        assert result.exit_code == 0, result.output
        slope = float(read_header(out / f"boxdim_{name}.csv")["slope"])
        assert slope == pytest.approx(dimension, abs=0.02)


class TestFit:
    """fit on two-column tables"""

    def test_crossing(self, runner, tmp_path):
        source = tmp_path / "p.csv"
        source.write_text("alpha,p\n0.1,0.8\n0.2,0.6\n0.3,0.4\n0.4,0.2\n")
        out = tmp_path / "fits"
        result = runner.invoke(cli, ["fit", "--input", str(source), "--model", "crossing", "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = read_fit_report(out / "fit_linear_law.txt")
        assert report.params["slope"] == pytest.approx(-2.0)
        assert report.extra["crossing"] == pytest.approx(0.375)

    def test_unknown_model(self, runner, tmp_path):
        source = tmp_path / "p.csv"
        source.write_text("0.1,0.8\n0.2,0.6\n")
        result = runner.invoke(cli, ["fit", "--input", str(source), "--model", "spline"])
        assert result.exit_code == 2


class TestValidate:
    """validate exit status"""

    def test_passes(self, runner, tmp_path):
        result = runner.invoke(cli, ["validate", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "FAIL" not in result.output
        assert read_table(tmp_path / "validation.csv")["passed"].all()

    def test_corrupted_acceptance_fails(self, runner):
        result = runner.invoke(cli, ["validate", "--corrupt-acceptance", "1.01"])
        assert result.exit_code == 1
        assert "FAIL" in result.output


class TestEnumerate:
    """Golden tables for tiny tori"""

    def test_two_by_two(self, runner, tmp_path):
        result = runner.invoke(cli, ["enumerate", "--L", "2", "--alpha", "0", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "Permutations: 24" in result.output
        lengths = read_table(tmp_path / "exact_cycle_length_law.csv")
        assert lengths["probability"].tolist() == pytest.approx([0.25] * 4)

    def test_too_large(self, runner, tmp_path):
        result = runner.invoke(cli, ["enumerate", "--L", "4", "--alpha", "1", "--out", str(tmp_path)])
        assert result.exit_code == 1
