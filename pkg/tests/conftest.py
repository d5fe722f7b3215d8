import pytest

from univcode import sigma


def reference_sigma(L):
    """Straightforward dict-based generator, independent of the library's tables.

    Round r: lay down one cycle of each length 1..r on the next free
    non-power positions, then write 1..n on the following n non-power
    positions, n being the last cycle position.
    """
    e = {}
    pos = 1

    def next_free(p):
        while p & (p - 1) == 0 and p > 1:
            p += 1
        return p

    r = 0
    while pos <= L:
        r += 1
        for k in range(1, r + 1):
            members = []
            while len(members) < k:
                pos = next_free(pos)
                members.append(pos)
                pos += 1
            for j, p in enumerate(members):
                e[p] = members[j - 1]
        n = members[-1]
        for v in range(1, n + 1):
            pos = next_free(pos)
            e[pos] = v
            pos += 1
    for k in range(1, L.bit_length() + 1):
        e[1 << k] = 1 << (2 * k)
    return {i: e[i] for i in range(1, L + 1)}


@pytest.fixture(scope="session")
def ref56():
    return reference_sigma(56)


@pytest.fixture(scope="session")
def ref_big():
    return reference_sigma(20_000)


@pytest.fixture(scope="session")
def table_1m():
    return sigma.default_table().extend_to(10**6)


@pytest.fixture(scope="session")
def reference():
    return reference_sigma


ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    def emit(line):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
