import json
import subprocess
import sys

import pytest

from misp.cli import main
from misp.harness import SecretaryInstance
from misp.matroids import UniformMatroid


@pytest.fixture
def bipartite_file(tmp_path):
    path = tmp_path / "bip.json"
    assert main(["gen", "--family", "bipartite-matching-intersection", "--size", "8", "--seed", "3",
                 "-o", str(path)]) == 0
    return path


def test_gen_is_deterministic(tmp_path, bipartite_file):
    other = tmp_path / "again.json"
    main(["gen", "--family", "bipartite-matching-intersection", "--size", "8", "--seed", "3", "-o", str(other)])
    assert bipartite_file.read_text() == other.read_text()
    assert SecretaryInstance.load(bipartite_file).k == 2


def test_gen_to_stdout(capsys):
    assert main(["gen", "--family", "random-partition", "--size", "5"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["weights"]) == 5


def test_run_writes_outputs(tmp_path, bipartite_file, capsys):
    out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
    code = main(["run", "--instance", str(bipartite_file), "--algo", "combine-opt", "--trials", "200",
                 "--seed", "1", "--threads", "1", "--out-json", str(out_json), "--out-csv", str(out_csv)])
    assert code == 0
    table = capsys.readouterr().out
    assert "1/256" in table and "margin" in table
    report = json.loads(out_json.read_text())
    assert report["trials"] == 200 and report["seed"] == 1
    assert out_csv.read_bytes().startswith(b"trial,ratio,accepted_ids,seed\r\n")


def test_flags_override_config(tmp_path, bipartite_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instance": str(bipartite_file), "algo": "combine-opt", "trials": 50,
                               "seed": 4, "threads": 1, "out_json": str(tmp_path / "a.json")}))
    assert main(["run", "--config", str(cfg), "--quiet"]) == 0
    assert json.loads((tmp_path / "a.json").read_text())["trials"] == 50
    assert main(["run", "--config", str(cfg), "--trials", "30", "--quiet"]) == 0
    assert json.loads((tmp_path / "a.json").read_text())["trials"] == 30


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"bogus": 1}'])
def test_bad_config_exit_code(tmp_path, content, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert main(["run", "--config", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_arguments_exit_code(bipartite_file):
    assert main(["run", "--instance", str(bipartite_file), "--algo", "nope", "--trials", "5"]) == 2
    assert main(["run", "--instance", str(bipartite_file), "--algo", "combine-opt", "--trials", "0"]) == 2
    assert main(["run", "--instance", "/nonexistent.json", "--algo", "combine-opt"]) == 2
    assert main(["run", "--instance", str(bipartite_file), "--algo", "combine-opt", "-p", "abc"]) == 2


def test_resource_limit_exit_code(tmp_path):
    path = tmp_path / "big.json"
    SecretaryInstance([UniformMatroid(21, 1)], list(range(1, 22))).save(path)
    assert main(["run", "--instance", str(path), "--algo", "simple-partition", "--trials", "5",
                 "--threads", "1", "--quiet"]) == 3


def test_verify_subset(capsys):
    assert main(["verify", "--only", "2,6"]) == 0
    out = capsys.readouterr().out
    assert "AC02" in out and "AC06" in out and "AC01" not in out
    assert "2/2 criteria passed" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "misp", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verify" in proc.stdout
