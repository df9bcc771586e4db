import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import E4
from silopt import io
from silopt.cli import main
from silopt.core import partition_from_labels


@pytest.fixture
def e4_csv(tmp_path):
    path = tmp_path / "e4.csv"
    io.write_dissimilarity(path, E4, ids=list("abcd"))
    return path


def test_cluster_dist(tmp_path, e4_csv, capsys):
    out = tmp_path / "part.csv"
    assert main(["cluster", "--dist", str(e4_csv), "--method", "osil", "--k", "2", "--out", str(out)]) == 0
    assert out.read_text() == "id,label\na,1\nb,1\nc,2\nd,2\n"
    report = json.loads(out.with_suffix(".json").read_text())
    assert report["asw"] == pytest.approx(0.9) and report["kstar"] == 2
    assert "kmeans" not in report["options"]["initializers"]
    assert "k*=2" in capsys.readouterr().out


def test_cluster_reproducible(tmp_path):
    data = tmp_path / "x.csv"
    X = np.random.default_rng(0).normal(size=(30, 2))
    data.write_text("a,b\n" + "\n".join(f"{x},{y}" for x, y in X) + "\n")
    outs = []
    for name in ("p1.csv", "p2.csv"):
        out = tmp_path / name
        assert main(["cluster", "--input", str(data), "--method", "fosil", "--kmin", "2", "--kmax", "4",
                     "--ns", "10", "--m", "3", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("extra", [["--method", "kmeans", "--k", "2"],
                                   ["--method", "osil", "--k", "4"],
                                   ["--method", "osil", "--kmin", "2"],
                                   ["--method", "osil", "--k", "2", "--inits", "gmm"]])
def test_cluster_invalid_input_exit_2(tmp_path, e4_csv, extra):
    assert main(["cluster", "--dist", str(e4_csv), *extra, "--out", str(tmp_path / "o.csv")]) == 2


def test_missing_file_exit_2(tmp_path):
    assert main(["cluster", "--dist", str(tmp_path / "none.csv"), "--method", "pam", "--k", "2",
                 "--out", str(tmp_path / "o.csv")]) == 2


def test_eval(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_partition(a, partition_from_labels([1, 1, 2, 2]))
    io.write_partition(b, partition_from_labels([1, 2, 1, 2]))
    assert main(["eval", "--pred", str(a), "--truth", str(a)]) == 0
    assert capsys.readouterr().out.strip() == "1.0"
    assert main(["eval", "--pred", str(a), "--truth", str(b)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(-0.5)


def test_simulate(tmp_path, capsys):
    assert main(["simulate", "--dgp", "1", "--methods", "osil,ward", "--reps", "1", "--fixed-k",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.csv").exists()
    assert "reps=1" in capsys.readouterr().err


def test_simulate_dgp5_gate(tmp_path):
    assert main(["simulate", "--dgp", "5", "--methods", "ward", "--reps", "1", "--fixed-k",
                 "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--dgp", "5", "--methods", "ward", "--reps", "1", "--fixed-k",
                 "--paper-compat", "--out", str(tmp_path)]) == 0


def test_axioms_suite(capsys):
    assert main(["axioms", "--suite", "scale", "--suite", "isomorphism"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(line.startswith("PASS") for line in lines)


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--fig1", "--sizes", "40", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "n,method,seconds,asw,ari" and len(rows) == 3
    assert main(["bench", "--sizes", "10", "--out", str(out)]) == 2


def test_generate_with_outlier(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["generate", "--dgp", "1", "--seed", "2", "--append=50,50", "--out", str(out)]) == 0
    data = io.read_dataset(out)
    assert data.n == 101 and data.labels.k == 3 and data.labels.sizes[-1] == 1
    assert main(["generate", "--dgp", "1", "--append=1,2,3", "--out", str(out)]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "silopt", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("silopt ")
