import numpy as np
import pytest

from thtp.geometry import Network


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class ScriptedRng:
    """Stand-in for ``np.random.Generator`` returning scripted draws."""

    def __init__(self, integers=(), randoms=()):
        self._ints = list(integers)
        self._rands = [np.asarray(r, dtype=float) for r in randoms]
        self.int_calls = []

    def integers(self, high):
        self.int_calls.append(high)
        return self._ints.pop(0)

    def random(self, size=None):
        return self._rands.pop(0)


@pytest.fixture
def scripted():
    return ScriptedRng


def line_network(xs, d_trx=100.0):
    return Network.from_positions([(x, 0.0) for x in xs], d_trx, side=max(xs) + 1)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
