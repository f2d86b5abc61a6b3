import numpy as np
import pytest

from pcc import datasets, experiments
from pcc import model as pm
from pcc.encoding import EncodingSpec
from pcc.errors import DataFormatError, DomainError, PreconditionError
from pcc.experiments import GridResult, InputSetKind, KINDS


@pytest.fixture(scope="module")
def wine_split(wine):
    return datasets.prepare_split(wine, 40, 7)


def constant_grid(value=0.5):
    alphas, n_es = np.array([0.1, 0.2]), np.array([1, 2, 3])
    return GridResult(alphas, n_es, {k: np.full((2, 3), value) for k in KINDS})


class TestEvaluate:
    def test_full_rank_with_labels_is_perfect(self, wine_split):
        train, _ = wine_split
        m = pm.fit(EncodingSpec(train.d_x, train.n_c, 0.3), train)
        assert experiments.evaluate(m, train, InputSetKind.WITH_LABELS) == 1.0

    def test_full_rank_without_labels_degenerates_to_class_one(self, wine_split):
        train, _ = wine_split
        m = pm.fit(EncodingSpec(train.d_x, train.n_c, 0.3), train)
        acc = experiments.evaluate(m, train, InputSetKind.TRAIN_NO_LABELS)
        assert acc == pytest.approx(np.mean(train.labels == 1))

    def test_accuracy_by_rank_matches_truncations(self, wine_split):
        train, test = wine_split
        full = pm.fit(EncodingSpec(train.d_x, train.n_c, 0.4), train)
        n_es = [1, 3, 8, 16]
        curve = experiments.accuracy_by_rank(full, test, False, n_es)
        for k, acc in zip(n_es, curve):
            assert acc == experiments.evaluate(full.truncate(k), test,
                                               InputSetKind.TEST_NO_LABELS)


class TestGridSearch:
    def test_one_by_one(self, wine_split):
        train, test = wine_split
        grid = experiments.grid_search(train, test, [0.2], [4])
        m = pm.fit(EncodingSpec(train.d_x, train.n_c, 0.2), train, 4)
        cell = grid.cell(0.2, 4)
        assert cell[InputSetKind.WITH_LABELS] == experiments.evaluate(
            m, train, InputSetKind.WITH_LABELS)
        assert cell[InputSetKind.TRAIN_NO_LABELS] == experiments.evaluate(
            m, train, InputSetKind.TRAIN_NO_LABELS)
        assert cell[InputSetKind.TEST_NO_LABELS] == experiments.evaluate(
            m, test, InputSetKind.TEST_NO_LABELS)
        assert grid.metadata["N"] == 120 and grid.metadata["N'"] == 58

    def test_axes_sorted_and_bounded(self, wine_split):
        train, test = wine_split
        grid = experiments.grid_search(train, test, [0.6, 0.2], [5, 2])
        np.testing.assert_array_equal(grid.alphas, [0.2, 0.6])
        np.testing.assert_array_equal(grid.n_es, [2, 5])
        for kind in KINDS:
            assert grid.accuracy[kind].shape == (2, 2)
            assert np.all((grid.accuracy[kind] >= 0) & (grid.accuracy[kind] <= 1))

    def test_threads_do_not_change_results(self, wine_split):
        train, test = wine_split
        a = experiments.grid_search(train, test, [0.1, 0.5, 0.9], threads=1)
        b = experiments.grid_search(train, test, [0.1, 0.5, 0.9], threads=3)
        for kind in KINDS:
            np.testing.assert_array_equal(a.accuracy[kind], b.accuracy[kind])

    def test_bad_axes(self, wine_split):
        train, test = wine_split
        with pytest.raises(PreconditionError):
            experiments.grid_search(train, test, [], [1])
        with pytest.raises(DomainError):
            experiments.grid_search(train, test, [0.2], [17])

    def test_default_alphas(self):
        a = experiments.default_alphas()
        assert a.size == 51 and a[0] == 0.0 and a[-1] == 1.0 and a[1] == 0.02

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("PCC_THREADS", "3")
        assert experiments.resolve_threads() == 3
        assert experiments.resolve_threads(2) == 2


class TestSelect:
    def test_constant_grid(self):
        assert experiments.select_hyperparameters(constant_grid()) == (0.1, 1)

    def test_unique_max(self):
        grid = constant_grid()
        grid.accuracy[InputSetKind.TRAIN_NO_LABELS][1, 2] = 0.9
        assert experiments.select_hyperparameters(grid) == (0.2, 3)

    def test_prefers_fewer_components_then_smaller_alpha(self):
        grid = constant_grid()
        acc = grid.accuracy[InputSetKind.TRAIN_NO_LABELS]
        acc[1, 1] = acc[0, 2] = acc[1, 2] = 0.9
        assert experiments.select_hyperparameters(grid) == (0.2, 2)

    def test_other_target(self):
        grid = constant_grid()
        grid.accuracy[InputSetKind.TEST_NO_LABELS][0, 1] = 0.7
        assert experiments.select_hyperparameters(grid, InputSetKind.TEST_NO_LABELS) == (0.1, 2)


class TestRunMulti:
    def test_single_run(self, wine):
        res = experiments.run_multi(wine, 0.2, 4, 1, 0, 40)
        assert res.seeds == [0]
        assert all(v == 0.0 for v in res.stds.values())

    def test_seeds_and_sample_std(self, wine):
        res = experiments.run_multi(wine, 0.2, 4, 3, 10, 40)
        assert res.seeds == [10, 11, 12]
        col = res.per_run[:, 2]
        assert res.stds[InputSetKind.TEST_NO_LABELS] == pytest.approx(np.std(col, ddof=1))
        again = experiments.run_multi(wine, 0.2, 4, 3, 10, 40)
        np.testing.assert_array_equal(res.per_run, again.per_run)

    def test_zero_runs(self, wine):
        with pytest.raises(DomainError):
            experiments.run_multi(wine, 0.2, 4, 0, 0, 40)


class TestHeatmapFile:
    def test_layout(self, tmp_path):
        grid = GridResult(np.array([0.0, 0.5]), np.array([1, 2]),
                          {k: np.array([[0.25, 0.5], [0.75, 1.0]]) for k in KINDS},
                          {"dataset": "toy", "seed": 3})
        path = tmp_path / "h.txt"
        experiments.emit_heatmap(grid, path)
        block = ["alpha\\n_e,1,2", "0.000000,0.250000,0.500000",
                 "0.500000,0.750000,1.000000", ""]
        expected = ["# pcc heatmap dataset=toy seed=3"]
        for name in ("WithLabels", "TrainNoLabels", "TestNoLabels"):
            expected += [f"[{name}]"] + block
        assert path.read_text() == "\n".join(expected)

    def test_roundtrip(self, tmp_path, wine_split):
        train, test = wine_split
        grid = experiments.grid_search(train, test, [0.1, 0.3], [1, 4, 9],
                                       metadata={"seed": 7})
        path = tmp_path / "h.txt"
        experiments.emit_heatmap(grid, path)
        back = experiments.read_heatmap(path)
        np.testing.assert_allclose(back.alphas, grid.alphas, atol=1e-6)
        np.testing.assert_array_equal(back.n_es, grid.n_es)
        for kind in KINDS:
            np.testing.assert_allclose(back.accuracy[kind], grid.accuracy[kind], atol=1e-6)
        assert back.metadata["seed"] == "7"

    def test_unknown_block(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("[Nope]\n")
        with pytest.raises(DataFormatError):
            experiments.read_heatmap(path)


def read_projection_blocks(path):
    blocks, current = {}, None
    for line in path.read_text().splitlines():
        if line.startswith("["):
            current = blocks.setdefault(line, [])
        elif current is not None and line and not line.startswith("coord"):
            current.append([float(v) for v in line.split(",")])
    return {k: np.array(v) for k, v in blocks.items()}


class TestProjections:
    def test_same_component_gives_identical_columns(self, tmp_path, wine_split):
        train, _ = wine_split
        m = pm.fit(EncodingSpec(train.d_x, train.n_c, 0.9), train, 4)
        path = tmp_path / "p.txt"
        experiments.emit_projections(m, train, [(1, 1), (2, 3)], path)
        blocks = read_projection_blocks(path)
        assert list(blocks) == ["[u1,u1]", "[u2,u3]"]
        np.testing.assert_array_equal(blocks["[u1,u1]"][:, 0], blocks["[u1,u1]"][:, 1])
        np.testing.assert_array_equal(blocks["[u2,u3]"][:, 2], train.labels)
        assert blocks["[u2,u3]"].shape == (120, 3)

    def test_pair_out_of_range(self, tmp_path, wine_split):
        m = pm.fit(EncodingSpec(13, 3, 0.9), wine_split[0], 4)
        with pytest.raises(DomainError):
            experiments.emit_projections(m, wine_split[0], [(4, 5)], tmp_path / "p")


def synthetic_digits(seed, per_class):
    """Small 28x28 uint8 images: one noisy template per digit."""
    rng = np.random.default_rng(seed)
    templates = rng.integers(0, 256, (10, 28, 28))
    labels = np.repeat(np.arange(10), per_class)
    noise = rng.integers(-60, 61, (labels.size, 28, 28))
    images = np.clip(templates[labels] + noise, 0, 255).astype(np.uint8)
    order = rng.permutation(labels.size)
    return images[order], labels[order]


class TestBenchmark:
    def test_report_format(self):
        rows = [experiments.BenchmarkRow(0.9, 16, 0.80931, 12704, 1.23456, 0.5)]
        text = experiments.format_benchmark_report(rows)
        lines = text.splitlines()
        assert lines[0] == "config,accuracy,parameters,fit_seconds,eval_seconds"
        assert lines[1] == "M(alpha=0.9,n_e=16),0.8093,12704,1.235,0.500"
        assert all(line.startswith("#") for line in lines[2:])

    def test_pipeline_on_synthetic_idx(self, tmp_path):
        paths = {}
        for part, seed, n in (("train", 1, 30), ("test", 2, 10)):
            images, labels = synthetic_digits(seed, n)
            paths[part] = (tmp_path / f"{part}-img", tmp_path / f"{part}-lab")
            datasets.write_idx(images, labels, *paths[part])
        train = datasets.load_idx(*paths["train"])
        test = datasets.load_idx(*paths["test"])
        rows = experiments.benchmark_mnist_full(train, test, ((0.9, 16), (0.02, 40)))
        assert [r.parameters for r in rows] == [16 * 794, 40 * 794]
        assert all(0.0 <= r.accuracy <= 1.0 for r in rows)
