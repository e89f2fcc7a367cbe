import functools

import pytest

from affine_glue import fixtures as F
from affine_glue.embedder import affinize
from affine_glue.unbounded import affinize_unbounded


@functools.lru_cache(maxsize=None)
def embedded(name):
    """(space, result) for a named built-in fixture, computed once per session."""
    if name in F.UNBOUNDED:
        space = F.UNBOUNDED[name]()
        return space, affinize_unbounded(space)
    space = F.BOUNDED[name]()
    return space, affinize(space)


@pytest.fixture
def circle():
    return embedded("circle")


@pytest.fixture
def collision():
    return embedded("collision")


ACCEPTANCE = []


def record(number, ok, detail):
    """Log one acceptance line; shown in the terminal summary and printed immediately."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
