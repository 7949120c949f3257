"""Exact Gaussian elimination with generic right-hand sides."""
from __future__ import annotations

from typing import Callable, Sequence

from gmpy2 import mpq


class InconsistentSystem(ValueError):
    def __init__(self, msg: str, row: int | None = None, residual=None):
        super().__init__(msg)
        self.row = row
        self.residual = residual


class RankDeficient(ValueError):
    def __init__(self, msg: str, free: list):
        super().__init__(msg)
        self.free = free


def _is_zero(x) -> bool:
    if hasattr(x, "terms"):
        return not x.terms
    return not x


def solve(rows: Sequence[dict], rhs: Sequence, n: int, *, zero=None,
          is_zero: Callable = _is_zero, allow_free: bool = False):
    """Solve sum_j rows[i][j] x_j = rhs[i] exactly.

    ``rows`` are sparse dicts column -> rational.  ``rhs`` entries may be
    rationals or any vector type supporting ``+``, ``-`` and scalar ``*``.
    Raises InconsistentSystem on a nonzero residual and RankDeficient if the
    solution is not unique (unless ``allow_free``; free unknowns are then 0).
    Returns the list of n solution values.
    """
    A = [{j: mpq(c) for j, c in r.items() if c} for r in rows]
    b = list(rhs)
    pivots: dict[int, int] = {}  # column -> row
    pivot_rows: list[int] = []
    used = [False] * len(A)
    for col in range(n):
        best = None
        for i, r in enumerate(A):
            if used[i] or col not in r:
                continue
            if best is None or len(r) < len(A[best]):
                best = i
        if best is None:
            continue
        used[best] = True
        prow = A[best]
        inv = 1 / prow[col]
        prow = {j: c * inv for j, c in prow.items()}
        A[best] = prow
        b[best] = b[best] * inv
        for i, r in enumerate(A):
            if i == best or col not in r:
                continue
            f = r[col]
            for j, c in prow.items():
                x = r.get(j, 0) - f * c
                if x:
                    r[j] = x
                else:
                    r.pop(j, None)
            b[i] = b[i] - b[best] * f
        pivots[col] = best
        pivot_rows.append(best)
    for i, r in enumerate(A):
        if not used[i] and not is_zero(b[i]):
            raise InconsistentSystem(f"inconsistent equation {i}", i, b[i])
    free = [c for c in range(n) if c not in pivots]
    if free and not allow_free:
        raise RankDeficient(f"{len(free)} undetermined unknowns", free)
    x = [zero if zero is not None else mpq(0)] * n
    for col, i in pivots.items():
        x[col] = b[i]
    return x


def rank(rows: Sequence[dict], n: int) -> int:
    A = [{j: mpq(c) for j, c in r.items() if c} for r in rows]
    rk = 0
    used = [False] * len(A)
    for col in range(n):
        piv = next((i for i, r in enumerate(A) if not used[i] and col in r), None)
        if piv is None:
            continue
        used[piv] = True
        rk += 1
        prow = A[piv]
        for i, r in enumerate(A):
            if i != piv and col in r:
                f = r[col] / prow[col]
                for j, c in prow.items():
                    x = r.get(j, 0) - f * c
                    if x:
                        r[j] = x
                    else:
                        r.pop(j, None)
    return rk
