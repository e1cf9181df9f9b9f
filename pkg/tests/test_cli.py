import json
import subprocess
import sys

import numpy as np
import pytest

from clscore.cli import main
from clscore.io import load_complex, read_distance_matrix


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def toy(tmp_path):
    # equilateral triangle with unit sides
    return write(tmp_path / "toy.csv", "x,y\n0,0\n1,0\n0.5,0.8660254037844386\n")


@pytest.fixture
def toy_features(tmp_path):
    return write(tmp_path / "feat.tsv", "name\ts0\ts1\ts2\na\t1\t0\t0\nb\t0\t1\t0\nc\t1\t1\t0\n")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_tsv(text):
    lines = text.strip().splitlines()
    header = lines[0].split("\t")
    return header, [dict(zip(header, ln.split("\t"))) for ln in lines[1:]]


# ---------------------------------------------------------------- build


def test_build_toy(toy, tmp_path, capsys):
    out = tmp_path / "k.json"
    code, _, err = run(["build", "--input", toy, "--epsilon", "1.1", "--out", str(out)], capsys)
    assert code == 0
    assert "0:3 1:3 2:1" in err
    doc = json.loads(out.read_text())
    k = load_complex(str(out))
    assert k.counts() == [3, 3, 1]
    assert doc["simplices"]["2"] == [[0, 1, 2]]


def test_build_max_dim_one(toy, capsys):
    code, out, _ = run(["build", "--input", toy, "--epsilon", "1.1", "--max-dim", "1"], capsys)
    assert code == 0
    assert len(json.loads(out)["simplices"]) == 2


def test_build_asymmetric_precomputed(tmp_path, capsys):
    path = write(tmp_path / "d.csv", "0,1,2\n1,0,1\n2,1.5,0\n")
    code, _, err = run(["build", "--input", path, "--metric", "precomputed", "--epsilon", "1"], capsys)
    assert code == 1
    assert "cell (1, 2)" in err and "d.csv:2" in err


def test_build_bad_number_names_line(tmp_path, capsys):
    path = write(tmp_path / "p.csv", "0,0\n1,zz\n")
    code, _, err = run(["build", "--input", path, "--epsilon", "1"], capsys)
    assert code == 1 and "p.csv:2" in err and "column 2" in err


def test_build_requires_epsilon(toy, capsys):
    code, _, err = run(["build", "--input", toy], capsys)
    assert code == 2 and "--epsilon" in err


def test_build_correlation_metric(tmp_path, capsys):
    path = write(tmp_path / "p.tsv", "1\t2\t3\n3\t2\t1\n1\t2\t3.5\n")
    code, out, _ = run(["build", "--input", path, "--metric", "correlation", "--epsilon", "0.1"], capsys)
    assert code == 0
    assert json.loads(out)["simplices"]["1"] == [[0, 2]]


# ---------------------------------------------------------------- score


def test_score_k3(toy, toy_features, capsys):
    code, out, _ = run(["score", "--input", toy, "--epsilon", "1.1", "--features", toy_features,
                        "--permutations", "50"], capsys)
    assert code == 0
    header, rows = parse_tsv(out)
    assert header == ["feature", "q", "score", "p_value", "q_value", "rejected"]
    assert [r["feature"] for r in rows] == ["a", "b", "c"]
    # K3 graph with coface weights: L = I - A/2, spectrum {0, 1.5, 1.5}
    for r in rows:
        assert float(r["score"]) == pytest.approx(1.5, abs=1e-12)
        assert 1 / 51 <= float(r["p_value"]) <= 1


def test_score_unit_weights(toy, toy_features, capsys):
    code, out, _ = run(["score", "--input", toy, "--epsilon", "1.1", "--features", toy_features,
                        "--weights", "unit", "--permutations", "5"], capsys)
    assert code == 0
    assert float(parse_tsv(out)[1][0]["score"]) == pytest.approx(3.0, abs=1e-12)


def test_score_q1_without_edges(toy, toy_features, capsys):
    code, _, err = run(["score", "--input", toy, "--epsilon", "0.5", "--features", toy_features,
                        "--q", "1", "--permutations", "5"], capsys)
    assert code != 0 and "NoSimplicesAtDimension" in err


def test_score_is_reproducible(tmp_path, capsys):
    rng = np.random.default_rng(3)
    pts = write(tmp_path / "p.csv", "\n".join(",".join(map(str, r)) for r in rng.normal(size=(25, 2))))
    feats = write(tmp_path / "f.tsv", "\n".join(
        f"f{i}\t" + "\t".join(map(str, r)) for i, r in enumerate(rng.normal(size=(8, 25)))))
    outs = []
    for i, threads in enumerate(["1", "1", "3"]):
        path = tmp_path / f"r{i}.tsv"
        code, _, _ = run(["score", "--input", pts, "--epsilon", "0.8", "--features", feats,
                          "--permutations", "99", "--seed", "4", "--threads", threads,
                          "--out", str(path)], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_build_then_score_matches_one_shot(tmp_path, capsys):
    rng = np.random.default_rng(9)
    pts = write(tmp_path / "p.csv", "\n".join(",".join(map(str, r)) for r in rng.normal(size=(20, 3))))
    feats = write(tmp_path / "f.tsv", "\n".join(
        f"f{i}\t" + "\t".join(map(str, r)) for i, r in enumerate(rng.normal(size=(5, 20)))))
    cx = tmp_path / "k.json"
    for q in ("0", "1"):
        assert main(["build", "--input", pts, "--epsilon", "1.5", "--out", str(cx)]) == 0
        _, a, _ = run(["score", "--complex", str(cx), "--features", feats, "--q", q,
                       "--permutations", "30"], capsys)
        _, b, _ = run(["score", "--input", pts, "--epsilon", "1.5", "--max-dim", "2",
                       "--features", feats, "--q", q, "--permutations", "30"], capsys)
        assert a == b and a.count("\n") == 6


def test_score_pair_features(toy, tmp_path, capsys):
    pairs = write(tmp_path / "gap.tsv", "i\tj\tvalue\n0\t1\t0.5\n0\t2\t2.0\n1\t2\t1.0\n")
    code, out, _ = run(["score", "--input", toy, "--epsilon", "1.1", "--pair-features", pairs,
                        "--q", "1", "--permutations", "5"], capsys)
    assert code == 0
    rows = parse_tsv(out)[1]
    assert rows[0]["feature"] == "gap" and rows[0]["q"] == "1"


def test_score_pair_features_need_q1(toy, tmp_path, capsys):
    pairs = write(tmp_path / "gap.tsv", "0\t1\t0.5\n0\t2\t2.0\n1\t2\t1.0\n")
    code, _, _ = run(["score", "--input", toy, "--epsilon", "1.1", "--pair-features", pairs], capsys)
    assert code == 2


def test_score_flags_constant_feature_but_succeeds(toy, tmp_path, capsys):
    feats = write(tmp_path / "f.tsv", "c\t1\t1\t1\na\t1\t0\t0\n")
    code, out, _ = run(["score", "--input", toy, "--epsilon", "1.1", "--features", feats,
                        "--permutations", "5"], capsys)
    assert code == 0
    assert parse_tsv(out)[1][0]["score"] == "NA"


# ---------------------------------------------------------------- sweep


def test_sweep_single_epsilon(toy, toy_features, capsys):
    code, out, err = run(["sweep", "--input", toy, "--grid", "1.1", "--features", toy_features,
                          "--permutations", "5"], capsys)
    assert code == 0
    header, rows = parse_tsv(out)
    assert header == ["epsilon", "n_edges", "n_rejected"]
    assert len(rows) == 1 and rows[0]["n_edges"] == "3"
    assert "best epsilon: 1.1" in err


def test_sweep_empty_grid(toy, toy_features, capsys):
    code, _, _ = run(["sweep", "--input", toy, "--grid", "", "--features", toy_features], capsys)
    assert code == 2


def test_sweep_descending_grid(toy, toy_features, capsys):
    code, _, _ = run(["sweep", "--input", toy, "--grid", "1,0.5", "--features", toy_features], capsys)
    assert code == 2


def test_sweep_two_clusters(tmp_path, capsys):
    rng = np.random.default_rng(21)
    labels = np.repeat([0, 1], 30)
    pts = rng.normal(scale=0.5, size=(60, 2))
    pts[:, 0] += 4 * labels
    X = (rng.random((40, 60)) < 0.5).astype(float)
    for r in range(4):
        X[r] = np.where(rng.random(60) < 0.1, 1 - labels, labels)
    p = write(tmp_path / "p.csv", "\n".join(",".join(map(str, r)) for r in pts))
    f = write(tmp_path / "f.tsv", "\n".join(f"f{i}\t" + "\t".join(map(str, r)) for i, r in enumerate(X)))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    iu = d[np.triu_indices(60, 1)]
    grid = [iu.min() / 2, 0.5, 1.0, 1.5, iu.max()]
    code, out, _ = run(["sweep", "--input", p, "--features", f, "--permutations", "200",
                        "--grid", ",".join(map(str, map(float, grid)))], capsys)
    assert code == 0
    counts = [int(r["n_rejected"]) for r in parse_tsv(out)[1]]
    inner = max(counts[1:-1])
    assert inner > counts[0] and inner > counts[-1]


# ---------------------------------------------------------------- eigenmap


@pytest.fixture
def p3(tmp_path):
    return write(tmp_path / "p3.csv", "0\n1\n2\n")


def test_eigenmap_p3_fiedler(p3, capsys):
    code, out, _ = run(["eigenmap", "--input", p3, "--epsilon", "1.1", "--m", "1", "--skip", "1"], capsys)
    assert code == 0
    header, rows = parse_tsv(out)
    assert header == ["simplex", "y1"]
    y = np.array([float(r["y1"]) for r in rows])
    assert y[0] > 0
    assert y / y[0] == pytest.approx([1, 0, -1], abs=1e-10)


def test_eigenmap_p3_lowest_is_constant(p3, capsys):
    code, out, _ = run(["eigenmap", "--input", p3, "--epsilon", "1.1", "--m", "2"], capsys)
    y = np.array([[float(r["y1"]), float(r["y2"])] for r in parse_tsv(out)[1]])
    assert np.allclose(y[:, 0], y[0, 0]) and y[0, 0] > 0
    assert y[:, 1] / y[0, 1] == pytest.approx([1, 0, -1], abs=1e-10)


def test_eigenmap_m_too_large(p3, capsys):
    code, _, _ = run(["eigenmap", "--input", p3, "--epsilon", "1.1", "--m", "4"], capsys)
    assert code == 2


def test_eigenmap_edges_of_c4(tmp_path, capsys):
    sq = write(tmp_path / "sq.csv", "0,0\n1,0\n1,1\n0,1\n")
    code, out, _ = run(["eigenmap", "--input", sq, "--epsilon", "1.1", "--q", "1", "--m", "1"], capsys)
    assert code == 0
    header, rows = parse_tsv(out)
    assert len(rows) == 4 and header == ["simplex", "y1"]
    assert [r["simplex"] for r in rows] == ["0-1", "0-3", "1-2", "2-3"]


# ---------------------------------------------------------------- export


def test_export_dot_and_json(toy, capsys):
    code, dot, _ = run(["export", "--input", toy, "--epsilon", "1.1", "--format", "dot"], capsys)
    assert code == 0 and dot.startswith("graph complex {") and dot.count("--") == 3
    code, js, _ = run(["export", "--input", toy, "--epsilon", "1.1", "--format", "json"], capsys)
    doc = json.loads(js)
    assert doc["edges"] == [[0, 1], [0, 2], [1, 2]]
    assert doc["node_weights"] == [2.0, 2.0, 2.0]


def test_export_from_complex_file(toy, tmp_path, capsys):
    cx = tmp_path / "k.json"
    main(["build", "--input", toy, "--epsilon", "1.1", "--out", str(cx)])
    code, js, _ = run(["export", "--complex", str(cx), "--format", "json"], capsys)
    # triangle present: every edge has one coface
    assert code == 0 and json.loads(js)["edge_weights"] == [1.0, 1.0, 1.0]


def test_complex_and_input_are_exclusive(toy, tmp_path, capsys):
    cx = tmp_path / "k.json"
    main(["build", "--input", toy, "--epsilon", "1.1", "--out", str(cx)])
    code, _, _ = run(["export", "--complex", str(cx), "--input", toy], capsys)
    assert code == 2


def test_module_entry_point(toy):
    proc = subprocess.run([sys.executable, "-m", "clscore.cli", "build", "--input", toy, "--epsilon", "1.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["vertex_count"] == 3


def test_distance_reader_symmetrises_within_tolerance(tmp_path):
    d = read_distance_matrix(write(tmp_path / "d.tsv", "0\t1\n1.0000000001\t0\n"))
    assert d[0, 1] == d[1, 0]
