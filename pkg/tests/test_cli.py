import io
import shutil

import numpy as np
import pytest

from pcc import cli, experiments
from pcc import model as pm

from conftest import DATA


def run(argv):
    out = io.StringIO()
    code = cli.main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def wine_csv(tmp_path):
    path = tmp_path / "wine.csv"
    shutil.copy(DATA / "wine.data", path)
    return path


class TestFit:
    def test_summary_and_model(self, tmp_path, wine_csv):
        model_path = tmp_path / "wine.pcc"
        code, text = run(["fit", "--data", wine_csv, "--label-col", 0, "--alpha", 0.2,
                          "--ne", 5, "--per-class", 40, "--seed", 7, "--out", model_path])
        assert code == 0
        assert "N=120 N'=58" in text
        m = pm.load_model(model_path)
        assert (m.spec.d_x, m.spec.n_c, m.n_e, m.spec.alpha) == (13, 3, 5, 0.2)

    def test_same_seed_same_bytes(self, tmp_path, wine_csv):
        outputs = []
        for name in ("a.pcc", "b.pcc"):
            run(["fit", "--data", wine_csv, "--alpha", 0.2, "--ne", 5, "--per-class", 40,
                 "--out", tmp_path / name])
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]

    def test_missing_flag_is_usage_error(self, wine_csv, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["fit", "--data", str(wine_csv), "--alpha", "0.2"])
        assert info.value.code == 1
        assert "usage" in capsys.readouterr().err

    def test_alpha_out_of_range(self, tmp_path, wine_csv):
        code, _ = run(["fit", "--data", wine_csv, "--alpha", 1.5, "--ne", 5,
                       "--per-class", 40, "--out", tmp_path / "m"])
        assert code == 1

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        code, _ = run(["fit", "--data", tmp_path / "nope.csv", "--alpha", 0.2, "--ne", 5,
                       "--per-class", 40, "--out", tmp_path / "m"])
        assert code == 2
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1 and err[0].startswith("pcc: data error")

    def test_too_few_instances_is_data_error(self, tmp_path, wine_csv):
        code, _ = run(["fit", "--data", wine_csv, "--alpha", 0.2, "--ne", 5,
                       "--per-class", 60, "--out", tmp_path / "m"])
        assert code == 2


class TestPredict:
    def test_labels_and_scores(self, tmp_path, wine_csv):
        model_path, scale = tmp_path / "m.pcc", tmp_path / "scale.txt"
        run(["fit", "--data", wine_csv, "--alpha", 0.2, "--ne", 5, "--per-class", 40,
             "--out", model_path, "--scale-out", scale])
        code, text = run(["predict", "--model", model_path, "--input", wine_csv,
                          "--label-col", 0, "--scale", scale])
        assert code == 0
        rows = [line.split(",") for line in text.splitlines()]
        assert len(rows) == 178 and all(len(r) == 4 for r in rows)
        predicted = np.array([int(r[0]) for r in rows])
        scores = np.array([[float(v) for v in r[1:]] for r in rows])
        np.testing.assert_array_equal(predicted, np.argmax(scores, axis=1) + 1)
        truth = np.loadtxt(wine_csv, delimiter=",", usecols=0).astype(int)
        assert np.mean(predicted == truth) > 0.85

    def test_wrong_width(self, tmp_path, wine_csv):
        model_path = tmp_path / "m.pcc"
        run(["fit", "--data", wine_csv, "--alpha", 0.2, "--ne", 5, "--per-class", 40,
             "--out", model_path])
        code, _ = run(["predict", "--model", model_path, "--input", wine_csv])
        assert code == 2

    def test_corrupt_model(self, tmp_path, wine_csv):
        bad = tmp_path / "bad.pcc"
        bad.write_bytes(b"PCCMDL01" + b"\0" * 10)
        code, _ = run(["predict", "--model", bad, "--input", wine_csv])
        assert code == 2


class TestGrid:
    def test_australian_default_axes(self, tmp_path):
        out = tmp_path / "heat.txt"
        code, text = run(["grid", "--data", DATA / "australian.dat", "--label-col", -1,
                          "--per-class", 200, "--out", out])
        assert code == 0
        grid = experiments.read_heatmap(out)
        assert grid.alphas.size == 51 and grid.n_es.tolist() == list(range(1, 17))
        assert set(grid.accuracy) == set(experiments.KINDS)
        assert "selected alpha=" in text

    def test_reproducible(self, tmp_path, wine_csv):
        texts = []
        for name in ("a", "b"):
            run(["grid", "--data", wine_csv, "--per-class", 40, "--alphas", "0:0.25:1",
                 "--nes", "1:16", "--threads", 2, "--out", tmp_path / name])
            texts.append((tmp_path / name).read_bytes())
        assert texts[0] == texts[1]

    def test_bad_range(self, tmp_path, wine_csv):
        code, _ = run(["grid", "--data", wine_csv, "--per-class", 40, "--nes", "1:40",
                       "--out", tmp_path / "h"])
        assert code == 1


class TestMultirunAndProjections:
    def test_multirun_table(self, tmp_path, wine_csv):
        code, text = run(["multirun", "--data", wine_csv, "--alpha", 0.2, "--ne", 4,
                          "--per-class", 40, "--runs", 3, "--seed", 0])
        assert code == 0
        lines = text.splitlines()
        assert lines[0] == "set,mean,std"
        assert [l.split(",")[0] for l in lines[1:4]] == [
            "WithLabels", "TrainNoLabels", "TestNoLabels"]
        assert "seeds=0..2" in lines[4]

    def test_emit_proj(self, tmp_path, wine_csv):
        out = tmp_path / "p.txt"
        code, _ = run(["emit-proj", "--data", wine_csv, "--alpha", 0.9, "--ne", 4,
                       "--per-class", 40, "--pairs", "2,3", "3,4", "--out", out])
        assert code == 0
        text = out.read_text()
        assert "[u2,u3]" in text and "[u3,u4]" in text

    def test_emit_proj_bad_pair(self, tmp_path, wine_csv):
        code, _ = run(["emit-proj", "--data", wine_csv, "--alpha", 0.9, "--ne", 4,
                       "--per-class", 40, "--pairs", "2,9", "--out", tmp_path / "p"])
        assert code == 1


def test_parse_range():
    np.testing.assert_allclose(cli.parse_range("0:0.02:1"), np.arange(51) * 0.02)
    assert cli.parse_range("1:4", int).tolist() == [1, 2, 3, 4]
    assert cli.parse_range("3,5", int).tolist() == [3, 5]
    with pytest.raises(cli.UsageError):
        cli.parse_range("1:0")
