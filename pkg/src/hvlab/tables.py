"""Conditional outcome tables P(F=λ, G=μ | A=α, B=β)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InputError
from .finprob import NORMALIZATION_TOL, JointTable


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Per setting pair, a joint law over (F, G).

    ``probs[ia, ib, l, m]`` is the probability of outcome pair
    ``(outcomes_f[l], outcomes_g[m])`` at settings ``(settings_a[ia], settings_b[ib])``.
    Setting pairs with ``present[ia, ib] == False`` carry no data (NaN), which
    only happens for empirical tables where that pair was never drawn.
    ``counts`` holds the number of shots per pair for empirical tables.
    """

    settings_a: tuple
    settings_b: tuple
    outcomes_f: tuple
    outcomes_g: tuple
    probs: np.ndarray
    present: np.ndarray | None = None
    counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        sa, sb = tuple(self.settings_a), tuple(self.settings_b)
        of, og = tuple(self.outcomes_f), tuple(self.outcomes_g)
        shape = (len(sa), len(sb), len(of), len(og))
        probs = np.array(self.probs, dtype=float)
        if probs.shape != shape:
            raise InputError(f"table shape {probs.shape} does not match {shape}")
        present = (
            np.ones(shape[:2], dtype=bool)
            if self.present is None
            else np.array(self.present, dtype=bool)
        )
        if present.shape != shape[:2]:
            raise InputError("presence mask must have one entry per setting pair")
        probs[~present] = np.nan
        live = probs[present]
        if live.size and (np.isnan(live).any() or (live < 0).any()):
            raise InputError("probabilities must be nonnegative numbers")
        sums = live.sum(axis=(1, 2)) if live.size else np.array([])
        if sums.size and np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise InputError("every per-setting table must sum to 1")
        object.__setattr__(self, "settings_a", sa)
        object.__setattr__(self, "settings_b", sb)
        object.__setattr__(self, "outcomes_f", of)
        object.__setattr__(self, "outcomes_g", og)
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "present", _frozen(present))
        if self.counts is not None:
            object.__setattr__(self, "counts", _frozen(np.asarray(self.counts, dtype=np.int64)))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.probs.shape

    @property
    def complete(self) -> bool:
        return bool(self.present.all())

    def table(self, ia: int, ib: int) -> JointTable | None:
        """The (F, G) joint table at a setting pair, or None when absent."""
        if not self.present[ia, ib]:
            return None
        return JointTable.from_array(
            ("F", "G"), (self.outcomes_f, self.outcomes_g), self.probs[ia, ib]
        )

    def cell(self, ia: int, ib: int, lam: Hashable, mu: Hashable) -> float:
        return float(
            self.probs[ia, ib, self.outcomes_f.index(lam), self.outcomes_g.index(mu)]
        )

    def mismatch(self, ia: int, ib: int) -> float:
        """P(F != G | a, b), comparing outcome values directly."""
        mask = np.array([[f != g for g in self.outcomes_g] for f in self.outcomes_f])
        return float(self.probs[ia, ib][mask].sum())

    def restrict(self, ia: Sequence[int], ib: Sequence[int]) -> ConditionalTable:
        ia, ib = list(ia), list(ib)
        return ConditionalTable(
            tuple(self.settings_a[i] for i in ia),
            tuple(self.settings_b[j] for j in ib),
            self.outcomes_f,
            self.outcomes_g,
            self.probs[np.ix_(ia, ib)],
            self.present[np.ix_(ia, ib)],
            None if self.counts is None else self.counts[np.ix_(ia, ib)],
        )

    def max_abs_diff(self, other: ConditionalTable) -> float:
        """Largest cell difference over setting pairs present in both tables."""
        if self.shape != other.shape:
            raise InputError(f"table shapes differ: {self.shape} vs {other.shape}")
        both = self.present & other.present
        if not both.any():
            return 0.0
        return float(np.max(np.abs(self.probs[both] - other.probs[both])))
