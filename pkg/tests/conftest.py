import os
from pathlib import Path

import numpy as np
import pytest

from pcc import datasets, linalg

DATA = Path(__file__).parent / "data"
FIXTURES = Path(__file__).parent / "fixtures"

try:
    linalg.load_kernels("compiled")
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

BACKENDS = ["compiled", "python"] if HAVE_COMPILED else ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def wine():
    return datasets.load_table(DATA / "wine.data", label_column=0, name="wine")


@pytest.fixture(scope="session")
def australian():
    return datasets.load_table(DATA / "australian.dat", label_column=-1, name="australian")


@pytest.fixture(scope="session")
def eig_reference():
    return np.load(FIXTURES / "eig_reference.npz")


MNIST_FILES = {
    "train_images": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
    "train_labels": ("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    "test_images": ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
    "test_labels": ("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"),
}


def find_mnist():
    """Paths of the official MNIST files under ``$PCC_MNIST_DIR``, or None."""
    root = os.environ.get("PCC_MNIST_DIR")
    if not root:
        return None
    found = {}
    for key, names in MNIST_FILES.items():
        for name in names:
            for candidate in (Path(root) / name, Path(root) / f"{name}.gz"):
                if candidate.exists():
                    found[key] = candidate
                    break
            if key in found:
                break
        else:
            return None
    return found


# --- acceptance criteria summary -------------------------------------------

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "seconds": 0.0,
                                          "notes": []})
    if rep.when == "call":
        entry["seconds"] += rep.duration
    if rep.failed:
        entry["ok"] = False
        entry["notes"].append(item.name)
    elif rep.skipped:
        entry["ok"] = False
        entry["notes"].append(f"{item.name} skipped")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"C{number:>2} {status}  {entry['title']}  ({entry['seconds']:.2f}s)"
        if entry["notes"]:
            line += "  [" + ", ".join(entry["notes"]) + "]"
        terminalreporter.write_line(line)
