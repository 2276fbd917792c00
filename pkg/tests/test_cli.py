import json

import numpy as np
import pytest

from colide.cli import main
from colide.graphs import load_adjacency_csv

FAST_SCHED = "1:1:4000, 0.1:0.9:4000, 0.01:0.8:4000, 0.001:0.7:8000"

CFG = f"""
graph.model = ER
graph.d = 6
graph.k = 2
data.n = 300
fit.schedule = {FAST_SCHED}
run.seeds = 0
"""


@pytest.fixture()
def cfg_path(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(CFG)
    return p


class TestSimulateFitEval:
    def test_end_to_end(self, tmp_path, cfg_path, capsys):
        prefix = str(tmp_path / "run")
        assert main(["simulate", "--config", str(cfg_path),
                     "--seed", "0", "--out", prefix]) == 0
        assert (tmp_path / "run.data.csv").exists()
        assert (tmp_path / "run.truth.csv").exists()
        noise = json.loads((tmp_path / "run.noise.json").read_text())
        assert len(noise["true_sigmas"]) == 6

        assert main(["fit", "--data", f"{prefix}.data.csv",
                     "--method", "colide_ev", "--out", prefix]) == 0
        W = load_adjacency_csv(f"{prefix}.adjacency.csv")
        assert W.shape == (6, 6)
        scales = json.loads((tmp_path / "run.scales.json").read_text())
        assert scales["sigma"] > 0

        assert main(["eval", "--est", f"{prefix}.adjacency.csv",
                     "--truth", f"{prefix}.truth.csv",
                     "--out", str(tmp_path / "metrics.json")]) == 0
        report = json.loads((tmp_path / "metrics.json").read_text())
        assert {"shd", "sid", "tpr", "fdr"} <= set(report)

    def test_eval_self_is_zero(self, tmp_path, cfg_path, capsys):
        prefix = str(tmp_path / "x")
        main(["simulate", "--config", str(cfg_path), "--out", prefix])
        capsys.readouterr()  # discard the simulate status line
        main(["eval", "--est", f"{prefix}.truth.csv",
              "--truth", f"{prefix}.truth.csv"])
        report = json.loads(capsys.readouterr().out)
        assert report["shd"] == 0 and report["sid"] == 0


class TestBenchCommand:
    def test_bench_writes_records(self, tmp_path, cfg_path, capsys):
        out = tmp_path / "results.jsonl"
        assert main(["bench", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert json.loads(lines[-1])["meta"] is True
        assert (tmp_path / "results.jsonl.summary.csv").exists()

    def test_bench_without_out_is_config_error(self, cfg_path, capsys):
        assert main(["bench", "--config", str(cfg_path)]) == 1


class TestExitCodes:
    def test_bad_config_key(self, tmp_path, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("graph.shape = torus\n")
        assert main(["bench", "--config", str(p), "--out", "x"]) == 1

    def test_missing_data_file(self, tmp_path, capsys):
        assert main(["fit", "--data", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_ragged_data_file(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("1,2\n3\n")
        assert main(["fit", "--data", str(p),
                     "--out", str(tmp_path / "o")]) == 2

    def test_eval_mismatched_shapes(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        np.savetxt(a, np.zeros((3, 3)), delimiter=",")
        np.savetxt(b, np.zeros((4, 4)), delimiter=",")
        assert main(["eval", "--est", str(a), "--truth", str(b)]) == 2

    def test_sachs_missing_files(self, tmp_path, capsys):
        assert main(["sachs", "--data", str(tmp_path / "no.csv"),
                     "--truth", str(tmp_path / "no2.csv")]) == 2
