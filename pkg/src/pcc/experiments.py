"""Experiment harness: input sets, (alpha, n_e) grids, multi-run statistics,
the full-MNIST benchmark, and the text files they produce.
"""
from __future__ import annotations

import enum
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model as pcc_model
from .datasets import prepare_split
from .encoding import EncodingSpec, encode_columns
from .errors import DataFormatError, DomainError, PreconditionError


class InputSetKind(enum.Enum):
    WITH_LABELS = "WithLabels"  # training features + their labels
    TRAIN_NO_LABELS = "TrainNoLabels"  # training features, zero class block
    TEST_NO_LABELS = "TestNoLabels"  # held-out features, zero class block


KINDS = tuple(InputSetKind)


def evaluate(model, data, kind):
    """Accuracy of ``model`` on ``data`` presented as input set ``kind``.

    Pass the training split for the first two kinds and the test split for
    ``TEST_NO_LABELS``; the kind only decides whether labels are fed in.
    """
    labels = data.labels if kind is InputSetKind.WITH_LABELS else None
    predicted, _ = pcc_model.predict_batch(model, data.features, labels)
    return float(np.mean(predicted == data.labels)) if data.n else 0.0


def accuracy_by_rank(model, data, with_labels, n_es):
    """Accuracy of every truncation ``model.truncate(k)`` for ``k`` in ``n_es``.

    The class scores are accumulated one component at a time, so the whole
    curve costs about as much as a single full-rank evaluation.
    """
    spec = model.spec
    z = encode_columns(spec, data.features, data.labels if with_labels else None)
    coords = model.basis.T @ z
    class_rows = model.basis[spec.d_x:]
    norms = np.linalg.norm(z, axis=0)
    wanted = {int(k): i for i, k in enumerate(n_es)}
    out = np.zeros(len(n_es))
    scores = np.zeros((spec.n_c, data.n))
    for k in range(1, max(wanted) + 1):
        scores += np.outer(class_rows[:, k - 1], coords[k - 1])
        if k in wanted:
            predicted = pcc_model.argmax_lowest(scores, norms)
            out[wanted[k]] = np.mean(predicted == data.labels)
    return out


@dataclass(eq=False)
class GridResult:
    alphas: np.ndarray
    n_es: np.ndarray
    accuracy: dict  # InputSetKind -> |alphas| x |n_es| array
    metadata: dict = field(default_factory=dict)

    def cell(self, alpha, n_e):
        i = int(np.argmin(np.abs(self.alphas - alpha)))
        j = int(np.flatnonzero(self.n_es == n_e)[0])
        return {kind: float(self.accuracy[kind][i, j]) for kind in KINDS}


def default_alphas():
    return np.round(np.arange(51) * 0.02, 10)


def resolve_threads(threads=None):
    """Worker count from the argument, else ``PCC_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get("PCC_THREADS", "1") or 1)
    return max(1, int(threads))


def grid_search(train, test, alphas=None, n_es=None, *, threads=None, metadata=None,
                backend=None):
    """Accuracy surfaces over ``alphas x n_es`` for all three input sets.

    One full decomposition per alpha; every ``n_e`` reuses its leading columns.
    """
    spec0 = EncodingSpec(train.d_x, train.n_c, 0.0)
    alphas = default_alphas() if alphas is None else np.asarray(alphas, dtype=float)
    n_es = np.arange(1, spec0.d_z + 1) if n_es is None else np.asarray(n_es, dtype=int)
    if alphas.size == 0 or n_es.size == 0:
        raise PreconditionError("grid axes must be non-empty")
    if n_es.min() < 1 or n_es.max() > spec0.d_z:
        raise DomainError(f"n_e values must lie in 1..{spec0.d_z}")
    alphas = np.sort(alphas)
    n_es = np.sort(n_es)

    def one_alpha(alpha):
        spec = EncodingSpec(train.d_x, train.n_c, float(alpha))
        full = pcc_model.fit(spec, train, backend=backend)
        return (
            accuracy_by_rank(full, train, True, n_es),
            accuracy_by_rank(full, train, False, n_es),
            accuracy_by_rank(full, test, False, n_es),
        )

    workers = resolve_threads(threads)
    if workers == 1:
        rows = [one_alpha(a) for a in alphas]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_alpha, alphas))
    accuracy = {kind: np.array([r[i] for r in rows]) for i, kind in enumerate(KINDS)}
    meta = {"dataset": train.name, "N": train.n, "N'": test.n}
    meta.update(metadata or {})
    return GridResult(alphas, n_es, accuracy, meta)


def select_hyperparameters(grid, target=InputSetKind.TRAIN_NO_LABELS, tol=1e-9):
    """Cheapest best cell: max accuracy on ``target``, then fewest components,
    then smallest alpha."""
    acc = grid.accuracy[target]
    rows, cols = np.nonzero(acc >= acc.max() - tol)
    j = cols.min()
    i = rows[cols == j].min()
    return float(grid.alphas[i]), int(grid.n_es[j])


@dataclass
class MultiRunResult:
    alpha: float
    n_e: int
    seeds: list
    per_run: np.ndarray  # runs x 3, columns ordered as KINDS

    @property
    def means(self):
        return {k: float(self.per_run[:, i].mean()) for i, k in enumerate(KINDS)}

    @property
    def stds(self):
        if self.per_run.shape[0] < 2:
            return {k: 0.0 for k in KINDS}
        return {k: float(self.per_run[:, i].std(ddof=1)) for i, k in enumerate(KINDS)}


def run_multi(data, alpha, n_e, runs, base_seed, per_class, *, rescale="train",
              test_data=None, test_per_class=None, backend=None):
    """Re-split with seeds ``base_seed + i``, refit, and evaluate all sets."""
    if runs < 1:
        raise DomainError(f"runs must be >= 1, got {runs}")
    spec = EncodingSpec(data.d_x, data.n_c, float(alpha))
    seeds = [base_seed + i for i in range(runs)]
    per_run = np.zeros((runs, len(KINDS)))
    for r, seed in enumerate(seeds):
        train, test = prepare_split(data, per_class, seed, rescale=rescale,
                                    test_data=test_data, test_per_class=test_per_class)
        m = pcc_model.fit(spec, train, n_e, seed=seed, backend=backend)
        per_run[r] = [
            evaluate(m, train, InputSetKind.WITH_LABELS),
            evaluate(m, train, InputSetKind.TRAIN_NO_LABELS),
            evaluate(m, test, InputSetKind.TEST_NO_LABELS),
        ]
    return MultiRunResult(float(alpha), int(n_e), seeds, per_run)


MNIST_BENCH_CONFIGS = ((0.9, 16), (0.02, 618))

# published reference numbers, quoted in the report footer only
REFERENCE_MODELS = (
    ("Efficient-CapsNet", 0.99, 161000),
    ("LeNet", 0.99, 60000),
)


@dataclass
class BenchmarkRow:
    alpha: float
    n_e: int
    accuracy: float
    parameters: int
    fit_seconds: float
    eval_seconds: float

    @property
    def config(self):
        return f"M(alpha={self.alpha:g},n_e={self.n_e})"


def benchmark_mnist_full(train, test, configs=MNIST_BENCH_CONFIGS, backend=None):
    """Fit on the full training file, score the full test file (no labels)."""
    rows = []
    for alpha, n_e in configs:
        spec = EncodingSpec(train.d_x, train.n_c, float(alpha))
        t0 = time.perf_counter()
        m = pcc_model.fit(spec, train, int(n_e), backend=backend)
        t1 = time.perf_counter()
        acc = evaluate(m, test, InputSetKind.TEST_NO_LABELS)
        t2 = time.perf_counter()
        rows.append(BenchmarkRow(float(alpha), int(n_e), acc, m.n_parameters,
                                 t1 - t0, t2 - t1))
    return rows


def format_benchmark_report(rows):
    out = io.StringIO()
    out.write("config,accuracy,parameters,fit_seconds,eval_seconds\n")
    for r in rows:
        out.write(f"{r.config},{r.accuracy:.4f},{r.parameters},"
                  f"{r.fit_seconds:.3f},{r.eval_seconds:.3f}\n")
    out.write("# features scaled by 1/255 only; no other preprocessing\n")
    for name, acc, params in REFERENCE_MODELS:
        out.write(f"# reference (published): {name} accuracy={acc} parameters={params}\n")
    return out.getvalue()


def _fmt(v):
    return f"{v:.6f}"


def format_heatmap(grid):
    meta = " ".join(f"{k}={v}" for k, v in grid.metadata.items())
    lines = [f"# pcc heatmap {meta}".rstrip()]
    for kind in KINDS:
        lines.append(f"[{kind.value}]")
        lines.append("alpha\\n_e," + ",".join(str(int(n)) for n in grid.n_es))
        for alpha, row in zip(grid.alphas, grid.accuracy[kind]):
            lines.append(_fmt(alpha) + "," + ",".join(_fmt(v) for v in row))
        lines.append("")
    return "\n".join(lines)


def emit_heatmap(grid, out_path):
    with open(out_path, "w") as fh:
        fh.write(format_heatmap(grid))


def read_heatmap(path):
    """Parse a file written by ``emit_heatmap`` back into a GridResult."""
    metadata = {}
    blocks = {}
    current = None
    n_es = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("# pcc heatmap"):
                for item in line[len("# pcc heatmap"):].split():
                    key, _, value = item.partition("=")
                    metadata[key] = value
            elif line.startswith("["):
                try:
                    current = InputSetKind(line.strip("[]"))
                except ValueError:
                    raise DataFormatError(f"{path}:{lineno}: unknown block {line}") from None
                blocks[current] = ([], [])
            elif line.startswith("alpha"):
                n_es = np.array([int(v) for v in line.split(",")[1:]])
            elif current is None:
                raise DataFormatError(f"{path}:{lineno}: data before any block header")
            else:
                cells = line.split(",")
                blocks[current][0].append(float(cells[0]))
                blocks[current][1].append([float(v) for v in cells[1:]])
    if set(blocks) != set(KINDS):
        raise DataFormatError(f"{path}: expected blocks {[k.value for k in KINDS]}")
    alphas = np.array(blocks[KINDS[0]][0])
    accuracy = {k: np.array(blocks[k][1]) for k in KINDS}
    return GridResult(alphas, n_es, accuracy, metadata)


def emit_projections(model, data, pairs, out_path, with_labels=True):
    """Write coordinates of ``data`` on pairs of components (1-based indices).

    One block per pair, rows ``coord_a,coord_b,label``.  ``with_labels``
    projects the class-encoded training vectors; otherwise the class block
    is zero.
    """
    for a, b in pairs:
        if not (1 <= a <= model.n_e and 1 <= b <= model.n_e):
            raise DomainError(f"component pair ({a}, {b}) outside 1..{model.n_e}")
    z = encode_columns(model.spec, data.features, data.labels if with_labels else None)
    coords = pcc_model.encode(model, z)
    with open(out_path, "w") as fh:
        fh.write(f"# pcc projections alpha={_fmt(model.spec.alpha)} n_e={model.n_e} "
                 f"N={data.n}\n")
        for a, b in pairs:
            fh.write(f"[u{a},u{b}]\ncoord_a,coord_b,label\n")
            for ca, cb, lab in zip(coords[a - 1], coords[b - 1], data.labels):
                fh.write(f"{_fmt(ca)},{_fmt(cb)},{int(lab)}\n")
            fh.write("\n")
