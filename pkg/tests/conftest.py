import sys

import numpy as np
import pytest

from sparsecorrupt import dictionaries as dl
from sparsecorrupt.specs import dictionary_pair


@pytest.fixture(scope="session")
def etf16():
    """16 x 40 approximate ETF split into two 16 x 20 halves."""
    return dictionary_pair("etf:16x20:seed=1:iter=2000", "etf-partner")


@pytest.fixture(scope="session")
def etf64():
    return dictionary_pair("etf:64x80:seed=7", "etf-partner")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def onb_pairs(M):
    out = [(dl.build_dft(M), dl.build_identity(M))]
    if M & (M - 1) == 0:
        out.append((dl.build_hadamard(M), dl.build_identity(M)))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = sorted(getattr(mod, "RESULT_LINES", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
