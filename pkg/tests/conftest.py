import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tdlc_lattice import permgroup as pg  # noqa: E402
from tdlc_lattice.branch import tree_group  # noqa: E402
from tdlc_lattice.filtration import FilteredGroup  # noqa: E402


def abelian_chain(n: int, steps: int) -> FilteredGroup:
    """``(Z/n)^2`` with chain ``G, pG, p^2 G, ...`` for ``n`` a power of ``p = 2``."""
    a = pg.cyclic_group(n, 0, 2 * n)
    b = pg.cyclic_group(n, n, 2 * n)
    g = pg.join(a, b)
    chain = [g]
    for s in range(1, steps + 1):
        chain.append(pg.GroupHandle(2 * n, [x ** (2 ** s) for x in g.generators]))
    return FilteredGroup(g, chain, margin=1, name=f"(Z/{n})^2")


@pytest.fixture(scope="session")
def w3():
    return tree_group(2, 3)


@pytest.fixture(scope="session")
def w4():
    return tree_group(2, 4)


@pytest.fixture(scope="session")
def s3xs3():
    g, factors = pg.direct_product(pg.symmetric_group(3), pg.symmetric_group(3))
    return g, factors


@pytest.fixture(scope="session")
def a5xa5():
    g, factors = pg.direct_product(pg.alternating_group(5), pg.alternating_group(5))
    return FilteredGroup.constant(g), factors


@pytest.fixture(scope="session")
def z8sq():
    return abelian_chain(8, 2)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
