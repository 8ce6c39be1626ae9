"""
Tests for tables, fit reports and checkpoints
"""

import json

import numpy as np
import pandas as pd
import pytest

from srpsim.analysis.fits import FitModel, FitResult
from srpsim.core.lattice import LatticeSpec
from srpsim.exceptions import CheckpointError, TableParseError
from srpsim.io import (load_checkpoint, read_fit_report, read_header, read_pairs_table, read_table,
                       save_checkpoint, write_fit_report, write_table)
from srpsim.sampling.runner import Chain, run_experiment


class TestTables:
    """CSV with comment header"""

    def test_header_and_exact_floats(self, tmp_path):
        frame = pd.DataFrame({"K": [0, 1, 2], "nu": [1.0, 0.1, 1.0 / 3.0]})
        path = write_table(frame, tmp_path / "nu.csv", header={"config_hash": "abc", "L": 8})
        text = path.read_bytes().decode("utf-8")
        assert text.startswith("# config_hash=abc\n# L=8\nK,nu\n")
        assert "\r" not in text
        assert read_header(path) == {"config_hash": "abc", "L": "8"}
        back = read_table(path)
        assert list(back.columns) == ["K", "nu"]
        assert back["nu"].iloc[2] == 1.0 / 3.0

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# a=1\nK,nu\n0,1.0\n1,0.5,7\n")
        with pytest.raises(TableParseError) as info:
            read_table(path)
        assert info.value.line == 4

    def test_pairs_with_header(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("alpha,nu\n0.1,0.9\n0.2,0.8\n")
        frame = read_pairs_table(path)
        assert list(frame.columns) == ["x", "y"]
        assert frame["y"].tolist() == [0.9, 0.8]

    @pytest.mark.parametrize("body,line", [
        ("0.1,0.9\n0.2\n", 2),
        ("0.1,0.9\n0.2,oops\n", 2),
        ("# c\nalpha,nu\n0.1,0.9\nx,y\n", 4),
    ])
    def test_pairs_malformed(self, tmp_path, body, line):
        path = tmp_path / "curve.csv"
        path.write_text(body)
        with pytest.raises(TableParseError) as info:
            read_pairs_table(path)
        assert info.value.line == line

    def test_pairs_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# nothing\n")
        with pytest.raises(TableParseError):
            read_pairs_table(path)


class TestFitReports:
    """key=value fit reports"""

    def test_round_trip(self, tmp_path):
        result = FitResult(
            model=FitModel.KT_POWER,
            params={"a": 0.1 + 0.2, "b": -0.439, "alpha0": 0.721, "gamma": 0.617},
            residual_sum_squares=1.5e-12,
            param_stderr={"a": 1e-3, "b": 2e-3, "alpha0": 3e-4, "gamma": 5e-3},
            iterations=42,
            n_points=9,
        )
        path = write_fit_report(result, tmp_path / "fit.txt", header={"input": "nu.csv"})
        text = path.read_text()
        assert "model=kt_power" in text
        assert "param.a=0.30000000000000004" in text
        back = read_fit_report(path)
        assert back.model is FitModel.KT_POWER
        assert back.params == result.params
        assert back.param_stderr == result.param_stderr
        assert back.iterations == 42 and back.converged

    def test_missing_model(self, tmp_path):
        path = tmp_path / "fit.txt"
        path.write_text("rss=0.1\n")
        with pytest.raises(TableParseError):
            read_fit_report(path)


class TestCheckpoints:
    """Interrupted runs resume exactly"""

    @pytest.fixture
    def spec(self):
        return LatticeSpec.square(4)

    def test_resume_matches_uninterrupted_run(self, tmp_path, spec, quick_chain):
        full = run_experiment(quick_chain, spec, 20)

        chain = Chain(quick_chain, spec)
        first = run_experiment(quick_chain, spec, 10, chain=chain)
        path = save_checkpoint(chain, tmp_path / "chain.npz", config_hash="h1")
        resumed = load_checkpoint(path, expected_hash="h1")
        assert resumed.sweeps_done == chain.sweeps_done
        assert np.array_equal(resumed.state.fwd, chain.state.fwd)
        second = run_experiment(quick_chain, spec, 20, chain=resumed)

        joined = pd.concat([first.samples, second.samples], ignore_index=True)
        pd.testing.assert_frame_equal(joined, full.samples)

    def test_restores_configuration(self, tmp_path, spec, quick_chain):
        chain = Chain(quick_chain, spec, stream=3)
        run_experiment(quick_chain, spec, 2, chain=chain)
        resumed = load_checkpoint(save_checkpoint(chain, tmp_path / "c.npz"))
        assert resumed.cfg == chain.cfg
        assert resumed.stream == 3
        assert resumed.state.energy == chain.state.energy
        assert resumed.rng.random() == chain.rng.random()

    def test_version_mismatch(self, tmp_path, spec, quick_chain):
        path = save_checkpoint(Chain(quick_chain, spec), tmp_path / "c.npz")
        with np.load(path) as archive:
            fwd, meta = archive["fwd"], json.loads(str(archive["meta"]))
        meta["version"] = 99
        np.savez(path, fwd=fwd, meta=np.array(json.dumps(meta)))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    def test_size_mismatch(self, tmp_path, spec, quick_chain):
        path = save_checkpoint(Chain(quick_chain, spec), tmp_path / "c.npz")
        with np.load(path) as archive:
            meta = str(archive["meta"])
        np.savez(path, fwd=np.arange(9, dtype=np.int64), meta=np.array(meta))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.npz")
