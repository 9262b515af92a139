import numpy as np
import pytest

from concatqec.codes import get_code
from concatqec.concatenation import build_concatenated
from concatqec.pauli import PauliOperator


@pytest.fixture(scope="session")
def hamming():
    return get_code("hamming15")


@pytest.fixture(scope="session")
def c422():
    return get_code("code422")


@pytest.fixture(scope="session")
def ham2(hamming):
    return build_concatenated(hamming, 2)


@pytest.fixture(scope="session")
def c422_2(c422):
    return build_concatenated(c422, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def x_error(n, *qubits):
    """X on the given 1-based qubits."""
    return PauliOperator(n, sum(1 << (q - 1) for q in qubits))


def stabilizer_product(code, rng):
    op = PauliOperator.identity(code.n)
    for g in code.generators:
        if rng.integers(2):
            op = op * g
    return op


# acceptance criteria report one line each, shown after the run
ACCEPTANCE_LINES: dict[int, str] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.ok: bool | None = None
        self.detail = ""

    def check(self, ok: bool, detail: str) -> None:
        self.ok, self.detail = bool(ok), detail
        line = f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}: {self.title} -- {detail}"
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        assert ok, line


@pytest.fixture
def criterion(request):
    number, title = request.node.get_closest_marker("criterion").args
    crit = Criterion(number, title)
    yield crit
    if crit.ok is None:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d} FAIL: {title} -- did not complete"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
