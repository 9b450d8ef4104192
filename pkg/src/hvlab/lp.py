"""Dense phase-one simplex for small feasibility problems ``M x = b, x >= 0``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HVLabError

PIVOT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseOneResult:
    x: np.ndarray
    infeasibility: float  # optimal sum of artificial variables
    iterations: int


def phase_one(M: np.ndarray, b: np.ndarray, max_iter: int = 10_000) -> PhaseOneResult:
    """Minimize the total artificial slack of ``M x + r = b`` over ``x, r >= 0``.

    Uses Bland's rule (lowest-index entering column, lowest-index leaving
    basic variable among ratio ties), which cannot cycle. The system is
    feasible iff the returned ``infeasibility`` is zero up to round-off.
    """
    M = np.array(M, dtype=float)
    b = np.array(b, dtype=float)
    m, n = M.shape
    neg = b < 0
    M[neg] *= -1
    b[neg] *= -1

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = M
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -M.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)

    it = 0
    while True:
        candidates = np.flatnonzero(T[m, :-1] < -PIVOT_EPS)
        if candidates.size == 0:
            break
        if it >= max_iter:
            raise HVLabError("phase-one simplex did not converge")
        j = candidates[0]
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_EPS)
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_EPS]
        r = tied[np.argmin(basis[tied])]
        T[r] /= T[r, j]
        pivot_col = T[:, j].copy()
        pivot_col[r] = 0.0
        T -= np.outer(pivot_col, T[r])
        basis[r] = j
        it += 1

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return PhaseOneResult(np.clip(x[:n], 0.0, None), float(max(-T[m, -1], 0.0)), it)
