from __future__ import annotations

import pytest
from gmpy2 import mpq

from hodge.linalg import InconsistentSystem, RankDeficient, rank, solve


def test_overdetermined_consistent():
    rows = [{0: 1, 1: 1}, {0: 1, 1: -1}, {0: 2}]
    assert solve(rows, [mpq(3), mpq(1), mpq(4)], 2) == [2, 1]


def test_inconsistent():
    with pytest.raises(InconsistentSystem) as err:
        solve([{0: 1}, {0: 1}], [mpq(1), mpq(2)], 1)
    assert err.value.residual != 0


def test_rank_deficient():
    with pytest.raises(RankDeficient) as err:
        solve([{0: 1, 1: 1}], [mpq(1)], 2)
    assert err.value.free


def test_rank():
    assert rank([{0: 1, 1: 2}, {0: 2, 1: 4}, {2: 1}], 3) == 2
