import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pseudoherm import __version__
from pseudoherm.cli import main


def run_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def values(entries):
    return np.array([e["re"] + 1j * e["im"] for e in entries])


class TestClassify:
    def test_qubit(self, capsys):
        doc = run_json(capsys, "classify", "--model", "qubit", "--g", "0.5", "--kappa", "1")
        np.testing.assert_allclose(values(doc["eigenvalues"]), [-0.8660254037844386, 0.8660254037844386],
                                   atol=1e-12)
        assert doc["kinds"] == ["Negative", "Positive"]
        assert doc["protected"] is True and doc["signature"] == "-+"

    def test_metadata(self, capsys):
        doc = run_json(capsys, "classify", "--model", "schematic", "--x", "1", "--real-tol", "1e-9")
        meta = doc["metadata"]
        assert meta["version"] == __version__
        assert meta["tolerances"]["real_tol"] == 1e-9
        assert meta["config"]["parameters"] == {"x": 1.0}
        assert meta["config"]["command"] == "classify"

    def test_oscillators_anti(self, capsys):
        doc = run_json(capsys, "classify", "--model", "oscillators", "--K", "2,-1;-1,2",
                       "--gamma", "3", "--intertwiner", "G_a")
        assert doc["relation"] == "anti"
        assert sum(k == "Positive" for k in doc["kinds"]) == 2

    def test_lattice_vector_parameter(self, capsys):
        doc = run_json(capsys, "classify", "--model", "lattice", "--V", "1.4,1.2,2,1.2,1.4",
                       "--h", "0.0009995", "--k", "0")
        assert (doc["positive_kind_count"], doc["negative_kind_count"]) == (3, 2)


class TestOtherCommands:
    def test_chern(self, capsys):
        assert run_json(capsys, "chern", "--a", "-0.3", "--b", "0.3")["chern"] == 1
        assert run_json(capsys, "chern", "--a", "0.3", "--b", "0.3")["chern"] == 0

    def test_intertwiners(self, capsys):
        doc = run_json(capsys, "intertwiners", "--model", "qubit", "--g", "0.5")
        assert doc["dimension"] == 2
        assert "invertible" in doc

    def test_probe(self, capsys):
        doc = run_json(capsys, "probe", "--a", "0", "--samples", "300")
        assert doc["signatures"] == ["+-", "-+"]

    def test_locate_transition(self, capsys):
        doc = run_json(capsys, "locate", "--model", "qubit", "--param", "g", "--bracket", "0.5:1.5")
        assert abs(doc["value"] - 1.0) < 1e-8

    def test_locate_degeneracy(self, capsys):
        doc = run_json(capsys, "locate", "--model", "schematic", "--param", "x", "--bracket", "3:5",
                       "--what", "degeneracy")
        assert abs(doc["value"] - 4) < 1e-6 and doc["ep"] is True

    def test_evolve_csv(self, capsys):
        assert main(["evolve", "--model", "qubit", "--g", "0.5", "--times", "0:10:11",
                     "--v0", "1,0", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == f"# pseudoherm {__version__}"
        assert lines[1].startswith("# metadata: ")
        assert lines[2].split(",") == ["t", "re0", "im0", "re1", "im1", "C"]
        assert len(lines) == 3 + 11

    def test_sweep1d_json(self, capsys):
        doc = run_json(capsys, "sweep1d", "--model", "qubit", "--g", "0:2:21", "--format", "json")
        status = [p["status"] for p in doc["points"]]
        assert status[:10] == ["Stable"] * 10 and status[-5:] == ["Broken"] * 5

    def test_sweep2d_csv(self, capsys):
        assert main(["sweep2d", "--model", "schematic", "--x", "-6:6:13", "--y", "-2:12:15"]) == 0
        lines = capsys.readouterr().out.splitlines()
        header = lines[2].split(",")
        assert header[:5] == ["x", "y", "status", "signature", "ep"]
        assert len(lines) == 3 + 13 * 15


    def test_sweep2d_json_summary(self, capsys):
        doc = run_json(capsys, "sweep2d", "--model", "schematic", "--x", "-6:6:13", "--y", "-2:12:15",
                       "--format", "json")
        status = {r["status"] for r in doc["regions"]}
        assert {"Stable(++-)", "Stable(+-+)", "Broken"} <= status
        assert {"location": {"x": 4.0, "y": 0.0}, "ep": True} in doc["critical_points"]
        assert all(b["type"] in ("EP", "DP") for b in doc["boundaries"])


class TestReproducibility:
    def test_byte_identical(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            path = tmp_path / name
            assert main(["sweep2d", "--model", "qubit", "--g", "0:2:9", "--kappa", "0:2:9",
                         "--output", str(path), "--seed", "3"]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_probe_seeded(self, capsys):
        first = run_json(capsys, "probe", "--a", "0.5", "--seed", "9", "--samples", "50")
        second = run_json(capsys, "probe", "--a", "0.5", "--seed", "9", "--samples", "50")
        assert first == second


class TestConfigFile:
    def test_yaml_with_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("command: classify\nmodel: qubit\nparameters:\n  g: 1.5\n  kappa: 1\n")
        assert run_json(capsys, "--config", str(cfg))["all_real"] is False
        assert run_json(capsys, "--config", str(cfg), "--g", "0.5")["protected"] is True

    def test_json_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "chern", "options": {"a": -1, "b": 1}}))
        assert run_json(capsys, "--config", str(cfg))["chern"] == 1

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("command: classify\nmodel: qubit\ncolour: red\n")
        assert main(["--config", str(cfg)]) == 1
        assert "colour" in capsys.readouterr().err


class TestExitCodes:
    def test_usage(self, capsys):
        assert main(["bogus"]) == 1

    def test_missing_model(self, capsys):
        assert main(["classify"]) == 1

    def test_bad_range(self, capsys):
        assert main(["sweep1d", "--model", "qubit", "--g", "0:1"]) == 1

    def test_numerical_failure(self, capsys):
        assert main(["evolve", "--model", "qubit", "--g", "5", "--times", "0:200:3"]) == 2
        assert "Overflow" in capsys.readouterr().err

    def test_model_error(self, capsys):
        assert main(["classify", "--model", "lattice", "--V", "1,2,3"]) == 1


class TestAtomicWrite:
    def test_no_partial_file_on_failure(self, tmp_path):
        target = tmp_path / "out.json"
        target.write_text("previous")
        assert main(["evolve", "--model", "qubit", "--g", "5", "--times", "0:200:3",
                     "--output", str(target)]) == 2
        assert target.read_text() == "previous"
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]

    def test_written(self, tmp_path):
        target = tmp_path / "out.json"
        assert main(["chern", "--a", "1", "--b", "1", "--output", str(target)]) == 0
        assert json.loads(target.read_text())["chern"] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pseudoherm", "chern", "--a", "-1", "--b", "1"],
                          capture_output=True, text=True, check=True,
                          env=dict(os.environ, PSEUDOHERM_THREADS="2"))
    assert json.loads(proc.stdout)["chern"] == 1
