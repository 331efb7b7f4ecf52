import sys

import numpy as np
import pytest

from concept_forge import kernels
from concept_forge.synthgen import BlobSpec, blobs, figure1_fixture


def available_backends():
    names = ["python"]
    try:
        kernels.get_backend("compiled")
    except ImportError:
        pass
    else:
        names.append("compiled")
    return names


@pytest.fixture(params=available_backends())
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def fig1():
    return figure1_fixture()


@pytest.fixture
def three_blobs():
    spec = BlobSpec.separated((2, 2), 3, 300, 1.0, seed=3)
    return spec, blobs(spec)


def brute_force_assign(cand):
    """Triple loop over samples, concepts and spaces; the assignment oracle."""
    n_concepts, n_spaces, n_samples = cand.shape
    labels = np.full(n_samples, -1, dtype=np.int64)
    for i in range(n_samples):
        for a in range(n_concepts):
            inside_all = all(cand[a, k, i] for k in range(n_spaces))
            clash = any(cand[b, k, i] for b in range(n_concepts) if b != a for k in range(n_spaces))
            if inside_all and not clash:
                labels[i] = a
    return labels


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
