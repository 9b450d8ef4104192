"""Boole inequality audits and local-polytope membership.

For four 0/1 random variables on one probability space,

    P(f1 != g1) <= P(f1 != g2) + P(f2 != g1) + P(f2 != g2).

The quantum photon statistics at settings a1 = 0, a2 = b2 = 3t, b1 = t turn
this into ``f_theta(t) >= 0``, which fails for many t. ``local_polytope_feasible``
decides the stronger question of whether a 2x2-setting binary table is a
mixture of the 16 deterministic strategies at all.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .finprob import FiniteDistribution
from .lp import phase_one
from .models import FactorizedModel
from .quantum import PHOTON_OUTCOMES, photon_table
from .tables import ConditionalTable

BOOLE_TOL = 1e-12
FEASIBILITY_TOL = 1e-9
DEFAULT_SCAN = (0.0, 2 * math.pi, 1e-3)


@dataclass(frozen=True)
class BooleReport:
    lhs: float
    rhs: float
    slack: float
    holds: bool


def _report(lhs: float, rhs: float) -> BooleReport:
    slack = rhs - lhs
    return BooleReport(lhs, rhs, slack, slack >= -BOOLE_TOL)


def boole_check(pz, f1, f2, g1, g2) -> BooleReport:
    """Evaluate the Boole inequality for four 0/1 maps on a finite space.

    ``pz`` is a ``FiniteDistribution`` (or a sequence of weights); each map is
    a sequence of 0/1 values aligned with it.
    """
    weights = pz.weights if isinstance(pz, FiniteDistribution) else FiniteDistribution(tuple(pz)).weights
    maps = []
    for name, v in zip(("f1", "f2", "g1", "g2"), (f1, f2, g1, g2)):
        v = [int(x) for x in v]
        if len(v) != len(weights):
            raise InputError(f"{name} has {len(v)} values for {len(weights)} atoms")
        if any(x not in (0, 1) for x in v):
            raise InputError(f"{name} must be 0/1 valued")
        maps.append(v)
    f1, f2, g1, g2 = maps

    def differ(x, y):
        return math.fsum(w for w, u, t in zip(weights, x, y) if u != t)

    return _report(differ(f1, g1), differ(f1, g2) + differ(f2, g1) + differ(f2, g2))


def boole_table_check(table: ConditionalTable, ia: Sequence[int] = (0, 1), ib: Sequence[int] = (0, 1)) -> BooleReport:
    """The same inequality on mismatch probabilities read from a conditional table."""
    (a1, a2), (b1, b2) = ia, ib
    mm = table.mismatch
    return _report(mm(a1, b1), mm(a1, b2) + mm(a2, b1) + mm(a2, b2))


def boole_audit_model(m: FactorizedModel) -> list[BooleReport]:
    """Boole reports for every ordered choice of two distinct settings per side."""
    if m.variant != "photon":
        raise InputError("the Boole audit needs binary (photon) outcomes")
    reports = []
    n_a, n_b = len(m.settings_a), len(m.settings_b)
    for a1, a2 in itertools.permutations(range(n_a), 2):
        for b1, b2 in itertools.permutations(range(n_b), 2):
            reports.append(
                boole_check(m.p_z, m.response_f[a1], m.response_f[a2], m.response_g[b1], m.response_g[b2])
            )
    return reports


def f_theta(theta: float) -> float:
    return math.sin(3 * theta) ** 2 + math.sin(2 * theta) ** 2 - math.sin(theta) ** 2


@dataclass(frozen=True, eq=False)
class ViolationScan:
    thetas: np.ndarray
    values: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.thetas.tolist(), self.values.tolist()))

    @property
    def violation_mask(self) -> np.ndarray:
        return self.values < 0

    @property
    def violations(self) -> list[tuple[float, float]]:
        mask = self.violation_mask
        return list(zip(self.thetas[mask].tolist(), self.values[mask].tolist()))


def scan_f(lo: float = DEFAULT_SCAN[0], hi: float = DEFAULT_SCAN[1], step: float = DEFAULT_SCAN[2]) -> ViolationScan:
    """Evaluate ``f_theta`` on ``lo, lo + step, ...`` up to ``hi``."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise InputError(f"scan range [{lo}, {hi}] is empty")
    if not step > 0:
        raise InputError("scan step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    thetas = lo + step * np.arange(n)
    values = np.sin(3 * thetas) ** 2 + np.sin(2 * thetas) ** 2 - np.sin(thetas) ** 2
    return ViolationScan(thetas, values)


def quantum_family_table(theta: float) -> ConditionalTable:
    """Photon table at Alice (0, 3t), Bob (t, 3t)."""
    return photon_table([0.0, 3 * theta], [theta, 3 * theta])


# local polytope


@dataclass(frozen=True)
class DeterministicStrategy:
    alice: tuple[int, int]
    bob: tuple[int, int]

    def table_array(self) -> np.ndarray:
        arr = np.zeros((2, 2, 2, 2))
        for ia, ib in itertools.product(range(2), range(2)):
            arr[ia, ib, self.alice[ia], self.bob[ib]] = 1.0
        return arr


STRATEGIES = tuple(
    DeterministicStrategy(a, b)
    for a, b in itertools.product(itertools.product((0, 1), repeat=2), repeat=2)
)
_VERTICES = np.stack([s.table_array().ravel() for s in STRATEGIES], axis=1)  # (16 cells, 16 strategies)
_SYSTEM = np.vstack([_VERTICES, np.ones((1, len(STRATEGIES)))])


@dataclass(frozen=True, eq=False)
class PolytopeResult:
    feasible: bool
    weights: tuple[float, ...] | None
    residual: float
    strategies: tuple[DeterministicStrategy, ...] = STRATEGIES


def _validate_2222(table: ConditionalTable) -> None:
    if not isinstance(table, ConditionalTable):
        raise InputError("expected a ConditionalTable")
    if table.shape != (2, 2, 2, 2):
        raise InputError(f"polytope test needs 2 settings per side and binary outcomes, got shape {table.shape}")
    if table.outcomes_f != PHOTON_OUTCOMES or table.outcomes_g != PHOTON_OUTCOMES:
        raise InputError("polytope test needs outcomes (0, 1) on both sides")
    if not table.complete:
        raise InputError("polytope test needs every setting pair present")


def local_polytope_feasible(table: ConditionalTable, tol: float = FEASIBILITY_TOL) -> PolytopeResult:
    """Is ``table`` a convex mixture of the 16 deterministic strategies?

    Solves the phase-one LP over strategy weights. ``residual`` is the largest
    cell mismatch of the best weights found; the table is feasible when it is
    at most ``tol``, and the weights are then returned as a witness.
    """
    _validate_2222(table)
    target = np.concatenate([table.probs.ravel(), [1.0]])
    sol = phase_one(_SYSTEM, target)
    w = sol.x
    if w.sum() > 0:
        w = w / w.sum()
    residual = float(np.max(np.abs(_SYSTEM @ w - target)))
    feasible = residual <= tol
    return PolytopeResult(feasible, tuple(w.tolist()) if feasible else None, residual)


def mixture_table(weights: Sequence[float]) -> np.ndarray:
    """The (2, 2, 2, 2) table of a strategy mixture."""
    return (_VERTICES @ np.asarray(weights, dtype=float)).reshape(2, 2, 2, 2)


def mixture_variables(result: PolytopeResult):
    """Read (pz, f1, f2, g1, g2) off a feasible mixture, one atom per strategy."""
    if not result.feasible:
        raise InputError("no mixture to read from an infeasible result")
    s = result.strategies
    return (
        result.weights,
        [x.alice[0] for x in s],
        [x.alice[1] for x in s],
        [x.bob[0] for x in s],
        [x.bob[1] for x in s],
    )
