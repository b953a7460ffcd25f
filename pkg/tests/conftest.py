import os

import numpy as np
import pytest

import clustershap as cx
from clustershap.shapley import ExplanationConfig

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
IRIS_CSV = os.path.join(DATA_DIR, "iris.csv")
VERTEBRAL_CSV = os.path.join(DATA_DIR, "vertebral_column.csv")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: release acceptance criterion")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            if getattr(rep, "when", "call") != "call" and status != "skipped":
                continue
            keywords = getattr(rep, "keywords", {})
            if "acceptance" in keywords:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, status in sorted(set(lines)):
            terminalreporter.write_line(f"{status:8s} {name}")


@pytest.fixture(scope="session")
def iris():
    return cx.load_dataset(IRIS_CSV, label_column="species")


@pytest.fixture(scope="session")
def vertebral():
    return cx.load_dataset(VERTEBRAL_CSV, label_column="class")


@pytest.fixture(scope="session")
def iris_explained(iris):
    a = cx.annotate(iris, None, "labeled")
    cs = cx.centroids(iris, a)
    em = cx.explain_all(iris, a, cs, ExplanationConfig(seed=42))
    return iris, a, cs, em


def make_blobs(n_per: int, centers: np.ndarray, sigma: float, seed: int):
    rng = np.random.default_rng(seed)
    k, dim = centers.shape
    rows = np.concatenate([centers[c] + rng.normal(0, sigma, (n_per, dim)) for c in range(k)])
    labels = np.repeat(np.arange(k), n_per)
    return rows, labels


def make_synthetic_dataset(seed: int, n: int, m: int, k: int):
    """Well-separated random gaussian clusters; every cluster has >= 4 rows."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 6, (k, m))
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    rows = np.concatenate([centers[c] + rng.normal(0, 1, (sizes[c], m)) for c in range(k)])
    labels = np.repeat(np.arange(k), sizes)
    d = cx.Dataset(rows, tuple(f"f{i}" for i in range(m)), labels)
    a = cx.annotate(d, None, "labeled")
    return d, a
