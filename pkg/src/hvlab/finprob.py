"""Finite probability spaces, random variables and joint tables.

Everything here is finite and exact up to float round-off: a ``SampleSpace``
is an ordered tuple of hashable atoms with a weight per atom, a
``RandomVariable`` is a total map from atoms into a finite codomain, and a
``JointTable`` is the law of a tuple of random variables laid out over the
full product of their codomains.

Sampling uses numpy's Philox generator, a counter-based bit generator keyed
only by the seed, so a given ``(space, seed, n)`` always yields the same stream.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ConditioningError, InputError

NORMALIZATION_TOL = 1e-12
_CHUNK = 1 << 16


def _check_normalized(total: float, what: str) -> None:
    if not math.isfinite(total) or abs(total - 1.0) > NORMALIZATION_TOL:
        raise InputError(f"{what} sums to {total!r}, expected 1")


@dataclass(frozen=True)
class FiniteDistribution:
    """Nonnegative weights summing to one, one per atom."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        if not weights:
            raise InputError("a distribution needs at least one atom")
        if any(not (w >= 0.0) for w in weights):
            raise InputError(f"negative or NaN weight in {weights!r}")
        _check_normalized(math.fsum(weights), "distribution")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int) -> FiniteDistribution:
        if n < 1:
            raise InputError("a distribution needs at least one atom")
        return cls((1.0 / n,) * n)

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]

    def __iter__(self) -> Iterator[float]:
        return iter(self.weights)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)


@dataclass(frozen=True)
class SampleSpace:
    """A finite ordered set of atoms carrying a probability distribution."""

    atoms: tuple[Hashable, ...]
    dist: FiniteDistribution

    def __post_init__(self) -> None:
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if len(set(atoms)) != len(atoms):
            raise InputError("atom identifiers must be unique")
        if len(self.dist) != len(atoms):
            raise InputError(
                f"{len(atoms)} atoms but {len(self.dist)} weights"
            )

    @classmethod
    def from_weights(cls, atoms: Iterable[Hashable], weights: Iterable[float]) -> SampleSpace:
        return cls(tuple(atoms), FiniteDistribution(tuple(weights)))

    @classmethod
    def uniform(cls, atoms: Iterable[Hashable]) -> SampleSpace:
        atoms = tuple(atoms)
        return cls(atoms, FiniteDistribution.uniform(len(atoms)))

    @cached_property
    def _index(self) -> dict[Hashable, int]:
        return {atom: i for i, atom in enumerate(self.atoms)}

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: Hashable) -> bool:
        return atom in self._index

    def index(self, atom: Hashable) -> int:
        return self._index[atom]

    def weight(self, atom: Hashable) -> float:
        return self.dist[self._index[atom]]

    def items(self) -> Iterator[tuple[Hashable, float]]:
        return zip(self.atoms, self.dist.weights)

    def identity(self, name: str = "id") -> RandomVariable:
        """The random variable mapping every atom to itself."""
        return RandomVariable(name, self.atoms, {a: a for a in self.atoms})


@dataclass(frozen=True)
class ProductSpace(SampleSpace):
    """Product of finite spaces; atoms are tuples of factor atoms."""

    factors: tuple[SampleSpace, ...] = ()

    def projection(self, k: int, name: str | None = None) -> RandomVariable:
        """Coordinate projection onto factor ``k``."""
        if not 0 <= k < len(self.factors):
            raise InputError(f"no factor {k} in a {len(self.factors)}-fold product")
        return RandomVariable(
            name if name is not None else f"X{k}",
            self.factors[k].atoms,
            {atom: atom[k] for atom in self.atoms},
        )

    def projections(self, names: Sequence[str] | None = None) -> list[RandomVariable]:
        names = names or [f"X{k}" for k in range(len(self.factors))]
        return [self.projection(k, n) for k, n in enumerate(names)]


@dataclass(frozen=True)
class RandomVariable:
    """A named total map from atoms into a finite ordered codomain."""

    name: str
    codomain: tuple[Hashable, ...]
    assignment: Mapping[Hashable, Hashable] = field(hash=False)

    def __post_init__(self) -> None:
        codomain = tuple(self.codomain)
        if not codomain:
            raise InputError(f"random variable {self.name!r} has an empty codomain")
        if len(set(codomain)) != len(codomain):
            raise InputError(f"codomain of {self.name!r} has repeated values")
        assignment = MappingProxyType(dict(self.assignment))
        allowed = set(codomain)
        for atom, value in assignment.items():
            if value not in allowed:
                raise InputError(
                    f"{self.name!r} maps atom {atom!r} to {value!r}, outside its codomain"
                )
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def from_function(
        cls,
        name: str,
        space: SampleSpace,
        fn: Callable[[Any], Hashable],
        codomain: Iterable[Hashable] | None = None,
    ) -> RandomVariable:
        values = {atom: fn(atom) for atom in space.atoms}
        if codomain is None:
            codomain = dict.fromkeys(values.values())
        return cls(name, tuple(codomain), values)

    def __call__(self, atom: Hashable) -> Hashable:
        return self.assignment[atom]

    def defined_on(self, space: SampleSpace) -> bool:
        return all(atom in self.assignment for atom in space.atoms)


@dataclass(frozen=True)
class JointTable:
    """Joint law of named variables over the full product of their codomains.

    Missing cells passed to the constructor are filled with zero; a key that
    falls outside the product is an error.
    """

    variables: tuple[str, ...]
    codomains: tuple[tuple[Hashable, ...], ...]
    cells: Mapping[tuple, float] = field(hash=False)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        codomains = tuple(tuple(c) for c in self.codomains)
        if len(variables) != len(codomains):
            raise InputError("one codomain per variable is required")
        if len(set(variables)) != len(variables):
            raise InputError(f"repeated variable names in {variables!r}")
        given = dict(self.cells)
        cells = {}
        for key in itertools.product(*codomains):
            p = float(given.pop(key, 0.0))
            if not (p >= 0.0):
                raise InputError(f"negative or NaN probability at {key!r}")
            cells[key] = p
        if given:
            raise InputError(f"cells outside the codomain product: {sorted(map(repr, given))[:3]}")
        _check_normalized(math.fsum(cells.values()), "joint table")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "codomains", codomains)
        object.__setattr__(self, "cells", MappingProxyType(cells))

    @classmethod
    def from_array(
        cls,
        variables: Sequence[str],
        codomains: Sequence[Sequence[Hashable]],
        array: np.ndarray,
    ) -> JointTable:
        array = np.asarray(array, dtype=float)
        shape = tuple(len(c) for c in codomains)
        if array.shape != shape:
            raise InputError(f"array shape {array.shape} does not match codomains {shape}")
        cells = {
            key: float(array[idx])
            for key, idx in zip(
                itertools.product(*codomains), itertools.product(*(range(n) for n in shape))
            )
        }
        return cls(tuple(variables), tuple(tuple(c) for c in codomains), cells)

    def prob(self, *values: Hashable) -> float:
        return self.cells[tuple(values)]

    def to_array(self) -> np.ndarray:
        shape = tuple(len(c) for c in self.codomains)
        return np.array(list(self.cells.values()), dtype=float).reshape(shape)

    def axis(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise InputError(f"no variable {name!r} in table over {self.variables!r}") from None

    def marginal(self, names: Sequence[str]) -> JointTable:
        """Sum out every variable not in ``names``; result follows ``names`` order."""
        axes = [self.axis(n) for n in names]
        arr = self.to_array()
        drop = tuple(i for i in range(len(self.variables)) if i not in axes)
        arr = arr.sum(axis=drop)
        kept = sorted(axes)
        arr = np.moveaxis(arr, [kept.index(a) for a in axes], range(len(axes)))
        return JointTable.from_array(names, [self.codomains[a] for a in axes], arr)

    def max_abs_diff(self, other: JointTable) -> float:
        if self.variables != other.variables or self.codomains != other.codomains:
            raise InputError("tables range over different variables")
        return max(abs(p - other.cells[k]) for k, p in self.cells.items())


@dataclass(frozen=True)
class IndependenceReport:
    independent: bool
    max_residual: float


def product_measure(factors: Sequence[SampleSpace]) -> ProductSpace:
    """Product measure of ``factors``; atoms are tuples in lexicographic order."""
    factors = tuple(factors)
    if not factors:
        raise InputError("product_measure needs at least one factor")
    atoms = tuple(itertools.product(*(f.atoms for f in factors)))
    weights = tuple(
        math.prod(w) for w in itertools.product(*(f.dist.weights for f in factors))
    )
    # Renormalize only to absorb round-off from the products.
    total = math.fsum(weights)
    return ProductSpace(atoms, FiniteDistribution(tuple(w / total for w in weights)), factors)


def _require_defined(space: SampleSpace, rvs: Sequence[RandomVariable]) -> None:
    for rv in rvs:
        if not isinstance(rv, RandomVariable) or not rv.defined_on(space):
            name = getattr(rv, "name", rv)
            raise InputError(f"random variable {name!r} is not defined on every atom of the space")


def push_forward(space: SampleSpace, rvs: Sequence[RandomVariable]) -> JointTable:
    """Joint law of ``rvs`` induced by the space's distribution."""
    rvs = list(rvs)
    _require_defined(space, rvs)
    cells: dict[tuple, list[float]] = {}
    for atom, w in space.items():
        cells.setdefault(tuple(rv(atom) for rv in rvs), []).append(w)
    return JointTable(
        tuple(rv.name for rv in rvs),
        tuple(rv.codomain for rv in rvs),
        {k: math.fsum(ws) for k, ws in cells.items()},
    )


def condition(table: JointTable, given: Mapping[str, Hashable]) -> JointTable:
    """Condition on the event ``{name = value for name, value in given}``.

    Returns the normalized law of the variables not mentioned in ``given``.
    Raises ``ConditioningError`` when the event has probability zero.
    """
    fixed = {}
    for name, value in given.items():
        axis = table.axis(name)
        if value not in table.codomains[axis]:
            raise InputError(f"{value!r} is not a value of {name!r}")
        fixed[axis] = value
    rest = [i for i in range(len(table.variables)) if i not in fixed]
    acc: dict[tuple, list[float]] = {}
    for key, p in table.cells.items():
        if all(key[i] == v for i, v in fixed.items()):
            acc.setdefault(tuple(key[i] for i in rest), []).append(p)
    mass = math.fsum(p for ps in acc.values() for p in ps)
    if mass <= 0.0:
        raise ConditioningError(f"conditioning event {dict(given)!r} has probability zero")
    return JointTable(
        tuple(table.variables[i] for i in rest),
        tuple(table.codomains[i] for i in rest),
        {k: math.fsum(ps) / mass for k, ps in acc.items()},
    )


def independence_residual(table: JointTable) -> float:
    """Max |P(joint) - product of one-variable marginals| over all cells."""
    arr = table.to_array()
    n = arr.ndim
    product = np.ones(arr.shape)
    for axis in range(n):
        others = tuple(i for i in range(n) if i != axis)
        marg = arr.sum(axis=others)
        shape = [1] * n
        shape[axis] = -1
        product = product * marg.reshape(shape)
    return float(np.max(np.abs(arr - product)))


def check_mutual_independence(
    rvs: Sequence[RandomVariable], space: SampleSpace, tol: float
) -> IndependenceReport:
    if not tol > 0:
        raise InputError("tolerance must be positive")
    residual = independence_residual(push_forward(space, rvs))
    return IndependenceReport(residual <= tol, residual)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed only by ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_indices(weights: Sequence[float] | np.ndarray, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` atom indices by inverse-CDF on uniform doubles from ``rng``."""
    cdf = np.cumsum(np.asarray(weights, dtype=float))
    cdf[-1] = 1.0
    u = rng.random(n)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def sample(space: SampleSpace, seed: int, n: int) -> Iterator[Hashable]:
    """Lazily yield ``n`` atoms drawn from ``space``.

    The stream is a function of ``(space, seed, n)`` alone; all generator
    state lives in the returned iterator.
    """
    if n < 0:
        raise InputError("sample size must be nonnegative")
    weights = space.dist.as_array()
    atoms = space.atoms

    def stream() -> Iterator[Hashable]:
        rng = make_rng(seed)
        left = n
        while left > 0:
            k = min(left, _CHUNK)
            for i in sample_indices(weights, rng, k):
                yield atoms[i]
            left -= k

    return stream()
