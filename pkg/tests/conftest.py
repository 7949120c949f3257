from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def ring():
    from hodge.free_energy import default_ring

    return default_ring()


@pytest.fixture(scope="session")
def recursion(ring):
    from hodge.hodge_recursion import HodgeRecursion

    return HodgeRecursion(ring)


@pytest.fixture(scope="session")
def extractor(recursion):
    from hodge.lambda_extract import Extractor

    return Extractor(recursion)


# ---------------------------------------------------------------------------
# hypothesis strategies
# ---------------------------------------------------------------------------

from gmpy2 import mpq  # noqa: E402
from hypothesis import settings, strategies as st  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

rationals = st.builds(lambda n, d: mpq(n, d), st.integers(-9, 9), st.integers(1, 6))


@st.composite
def diffpolys(draw, ring, *, top: int = 5, max_terms: int = 4, negative: bool = True, log: bool = True):
    out = ring.zero()
    for _ in range(draw(st.integers(1, max_terms))):
        jets = {m: draw(st.integers(0, 2)) for m in range(2, top + 1) if draw(st.booleans())}
        params = {p: draw(st.integers(0, 2)) for p in ring.params}
        out = out + ring.monomial(
            draw(rationals),
            v=draw(st.integers(0, 2)),
            v1=draw(st.integers(-2 if negative else 0, 2)),
            L=draw(st.integers(0, 1)) if log and ring.use_L else 0,
            X=draw(st.integers(0, 1)) if ring.use_X else 0,
            jets=jets,
            params=params,
        )
    return out


# ---------------------------------------------------------------------------
# acceptance summary
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
