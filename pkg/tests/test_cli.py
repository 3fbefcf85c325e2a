import json
from pathlib import Path

import numpy as np
import pytest

from radiomarker.cli import main, read_manifest
from radiomarker.evaluation import THREADS_ENV
from radiomarker.synth import gen_tabular
from radiomarker.table import read_table_csv, write_table_csv

FAST_GRID = ["--C-values", "0.01,1", "--pca-k", "2,3", "--smote-k", "3"]


@pytest.fixture(scope="module")
def phantoms(tmp_path_factory):
    d = tmp_path_factory.mktemp("phantoms")
    code = main(["synth", "phantoms", "--out", str(d), "--n-cases", "3", "--dims", "24,24,24",
                 "--semi-axes", "9,7,6",
                 "--seed", "5", "--threads", "1"])
    assert code == 0
    return d


def test_synth_phantoms_manifest(phantoms):
    rows = read_manifest(phantoms / "manifest.csv")
    assert [r["case_id"] for r in rows] == ["case000", "case001", "case002"]
    assert all(Path(r["volume"]).exists() and Path(r["mask"]).exists() for r in rows)
    assert (phantoms / "run.log").exists()


def test_extract_three_phantoms(phantoms, tmp_path, capsys):
    out = tmp_path / "features.csv"
    code = main(["extract", "--manifest", str(phantoms / "manifest.csv"), "--out", str(out),
                 "--threads", "1", "--dump-derived", str(tmp_path / "derived")])
    assert code == 0
    t = read_table_csv(out)
    assert t.values.shape == (3, 1595)
    printed = capsys.readouterr().out
    assert "Original=107" in printed and "Wavelet=744" in printed and "Total=1595" in printed
    assert "Gradient=93" in printed and "Logarithm=93" in printed and "Square-root=93" in printed
    dumped = sorted(p.name for p in (tmp_path / "derived").glob("case000_*.hdr"))
    assert len(dumped) == 18 and "case000_wavelet-HHH.hdr" in dumped
    assert (tmp_path / "features.csv.log").exists()


def test_extract_bad_case(phantoms, tmp_path, capsys):
    manifest = tmp_path / "m.csv"
    text = (phantoms / "manifest.csv").read_text().splitlines()
    rows = [text[0], text[1].replace("case000_image.hdr", str(phantoms / "case000_image.hdr"))
                            .replace("case000_mask.hdr", str(phantoms / "case000_mask.hdr")),
            "broken,nothing.hdr,nothing.hdr,1"]
    manifest.write_text("\n".join(rows) + "\n")
    code = main(["extract", "--manifest", str(manifest), "--out", str(tmp_path / "f.csv"),
                 "--threads", "1"])
    assert code == 1
    assert read_table_csv(tmp_path / "f.csv").case_ids == ("case000",)
    assert "broken" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("case_id,volume_path,mask_path,label\n")
    assert main(["extract", "--manifest", str(empty), "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["extract", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["nonsense"]) == 2
    assert main(["evaluate", "--table", "t.csv", "--out-dir", str(tmp_path), "--kernel", "poly"]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_key = 1\n")
    assert main(["report", "r.json", "--config", str(cfg)]) == 2
    assert main(["report", str(tmp_path / "missing.json")]) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "zero")
    assert main(["synth", "table", "--out", str(tmp_path / "t.csv")]) == 2
    monkeypatch.setenv(THREADS_ENV, "1")
    assert main(["synth", "table", "--out", str(tmp_path / "t.csv")]) == 0


def test_synth_table_and_config_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# smaller table\nn_cases = 12\nn-features = 7\nclass_fractions = 1,1\n")
    out = tmp_path / "t.csv"
    assert main(["synth", "table", "--out", str(out), "--n-cases", "42", "--config", str(cfg)]) == 0
    t = read_table_csv(out)
    assert t.values.shape == (12, 7)
    assert np.bincount(t.labels).tolist() == [6, 6]


def _table_file(tmp_path, **kw):
    path = tmp_path / "table.csv"
    write_table_csv(gen_tabular(**kw), path)
    return path


def test_analyze(tmp_path, capsys):
    rng = np.random.default_rng(0)
    from radiomarker.features.extract import FeatureColumn
    from radiomarker.table import FeatureTable
    x = rng.normal(size=12)
    X = np.c_[x, x, rng.normal(size=12), np.ones(12)]
    cols = [FeatureColumn("original", "GLCM", "a"), FeatureColumn("wavelet-LLL", "GLCM", "b"),
            FeatureColumn("original", "NGTDM", "c"), FeatureColumn("original", "Shape", "d")]
    write_table_csv(FeatureTable([f"c{i}" for i in range(12)], [0, 1] * 6, cols, X),
                    tmp_path / "t.csv")
    out = tmp_path / "analysis"
    assert main(["analyze", "--table", str(tmp_path / "t.csv"), "--out-dir", str(out)]) == 0
    s = json.loads((out / "correlation_summary.json").read_text())
    assert s["n_features"] == 3 and s["n_removed"] == 1
    assert s["fraction_le_half"] < 1.0
    lines = (out / "correlation_matrix.csv").read_text().splitlines()
    assert len(lines) == 4 and lines[0].startswith("feature,")
    assert (out / "pruned_columns.csv").read_text().splitlines()[1] == \
        "original_Shape_d,zero variance"
    assert len((out / "histogram.csv").read_text().splitlines()) == 21
    assert "fraction |r| <= 0.5" in capsys.readouterr().out


def test_analyze_identity_like(tmp_path):
    # orthogonal +-1 columns: every off-diagonal r is exactly 0
    H = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
    from radiomarker.features.extract import FeatureColumn
    from radiomarker.table import FeatureTable
    cols = [FeatureColumn("original", "GLCM", f"f{j}") for j in range(3)]
    write_table_csv(FeatureTable(["a", "b", "c", "d"], [0, 1, 0, 1], cols, H[:, 1:]),
                    tmp_path / "t.csv")
    assert main(["analyze", "--table", str(tmp_path / "t.csv"), "--out-dir", str(tmp_path / "o")]) == 0
    s = json.loads((tmp_path / "o" / "correlation_summary.json").read_text())
    assert s["fraction_le_half"] == 1.0


def test_analyze_degenerate_exit_1(tmp_path):
    path = _table_file(tmp_path, seed=0, n_cases=6, n_features=2, n_informative=1, class_fractions=(1, 1))
    t = read_table_csv(path)
    from radiomarker.table import FeatureTable
    write_table_csv(FeatureTable(t.case_ids, t.labels, t.columns, np.ones_like(t.values)), path)
    assert main(["analyze", "--table", str(path), "--out-dir", str(tmp_path / "o")]) == 1


def test_evaluate_kernels_and_report(tmp_path, capsys):
    path = _table_file(tmp_path, seed=1, n_cases=14, n_features=10, n_informative=3,
                       effect_size=2.0, class_fractions=(2, 1))
    out = tmp_path / "eval"
    base = ["evaluate", "--table", str(path), "--out-dir", str(out), "--threads", "1", *FAST_GRID]
    assert main(base + ["--kernel", "linear"]) == 0
    assert main(base + ["--kernel", "rbf", "--gamma-values", "0.1,1"]) == 0
    lin = json.loads((out / "report_linear.json").read_text())
    rbf = json.loads((out / "report_rbf.json").read_text())
    assert set(lin) == set(rbf)
    assert set(lin["folds"][0]) == set(rbf["folds"][0])
    assert lin["grid"]["gamma_values"] == [] and rbf["grid"]["gamma_values"] == [0.1, 1.0]
    for name in ("roc_linear.csv", "hyper_linear.csv", "confusion_linear.csv", "model_linear.json",
                 "weights_linear.json", "roc_rbf.csv", "model_rbf.json", "run.log"):
        assert (out / name).exists(), name
    assert not (out / "weights_rbf.json").exists()
    capsys.readouterr()
    assert main(["report", str(out / "report_linear.json")]) == 0
    printed = capsys.readouterr().out
    assert "AUC" in printed and "PPV" in printed


def test_evaluate_subset_and_errors(tmp_path):
    path = _table_file(tmp_path, seed=2, n_cases=10, n_features=6, class_fractions=(1, 1))
    out = tmp_path / "eval"
    args = ["evaluate", "--table", str(path), "--out-dir", str(out), "--threads", "1",
            "--no-final", *FAST_GRID]
    assert main(args + ["--feature-type", "FirstOrder"]) == 0
    assert (out / "report_linear_FirstOrder.json").exists()
    assert not (out / "model_linear_FirstOrder.json").exists()
    assert main(args + ["--feature-type", "GLSZM"]) == 2
    assert main(args + ["--C-values", "-1"]) == 2
    t = read_table_csv(path)
    from radiomarker.table import FeatureTable
    write_table_csv(FeatureTable(t.case_ids, [0] * t.n_cases, t.columns, t.values), path)
    assert main(args) == 2


def test_evaluate_constant_subset_exit_1(phantoms, tmp_path, capsys):
    # every phantom shares one ellipsoid, so all Shape columns are constant
    table = tmp_path / "f.csv"
    assert main(["extract", "--manifest", str(phantoms / "manifest.csv"), "--out", str(table),
                 "--threads", "1"]) == 0
    t = read_table_csv(table)
    from radiomarker.table import FeatureTable
    rows = np.r_[t.values, t.values[:1]]
    write_table_csv(FeatureTable([*t.case_ids, "copy"], [0, 1, 0, 1], t.columns, rows), table)
    capsys.readouterr()
    code = main(["evaluate", "--table", str(table), "--out-dir", str(tmp_path / "e"),
                 "--feature-type", "Shape", "--threads", "1", *FAST_GRID])
    assert code == 1
    assert "every column is constant" in capsys.readouterr().err


def _snapshot(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.rglob("*")) if p.suffix in (".csv", ".json")}


def test_byte_identical_reruns(tmp_path, phantoms):
    path = _table_file(tmp_path, seed=3, n_cases=12, n_features=8, n_informative=2,
                       effect_size=1.5, class_fractions=(1, 1))
    snaps = []
    for run, threads in enumerate(("1", "1", "2")):
        out = tmp_path / f"run{run}"
        assert main(["evaluate", "--table", str(path), "--out-dir", str(out / "eval"),
                     "--threads", threads, *FAST_GRID]) == 0
        assert main(["analyze", "--table", str(path), "--out-dir", str(out / "analysis"),
                     "--threads", threads]) == 0
        assert main(["extract", "--manifest", str(phantoms / "manifest.csv"),
                     "--out", str(out / "features.csv"), "--threads", threads]) == 0
        snaps.append(_snapshot(out))
    assert snaps[0] == snaps[1] == snaps[2]
    assert len(snaps[0]) >= 10
