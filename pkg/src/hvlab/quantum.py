"""Quantum predictions for the photon and spin-one EPR experiments.

Two routes are provided for every statistic: closed forms, and a Born-rule
oracle that builds the state vector and measurement projectors explicitly.
The oracle shares no formulas with the closed forms, so agreement between
the two is a real check.

Conventions
-----------
Photon: basis ``|0>, |1>`` is horizontal/vertical linear polarization and a
polarizer at angle ``a`` passes the state ``cos(a)|0> + sin(a)|1>``.

Spin one: the basis is the Cartesian one in which ``(J_k)_{lm} = -i eps_{klm}``.
In that basis ``(|00> + |11> + |22>)/sqrt(3)`` reproduces the textbook
statistics, and the zero-eigenspace of ``<a, J>`` is spanned by ``a`` itself.
A spin-one outcome is encoded by the position of its single zero: position
``i`` stands for the triple with 0 in slot ``i`` and 1 elsewhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .tables import ConditionalTable

RAY_TOL = 1e-9
# Frames are only orthonormal to RAY_TOL, which bounds how far a spin-one
# joint table built from them can drift from unit mass.
SPIN_TABLE_TOL = 1e-8

PHOTON_OUTCOMES = (0, 1)
SPIN1_OUTCOMES = ((0, 1, 1), (1, 0, 1), (1, 1, 0))


def zero_position(triple: Sequence[int]) -> int:
    """Index of the single 0 in a spin-one outcome triple."""
    triple = tuple(int(v) for v in triple)
    if triple not in SPIN1_OUTCOMES:
        raise InputError(f"{triple!r} is not a spin-one outcome")
    return triple.index(0)


@dataclass(frozen=True)
class Angle:
    """Polarizer angle, reduced into [0, pi)."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v):
            raise InputError(f"angle must be finite, got {v!r}")
        v = math.fmod(v, math.pi)
        if v < 0:
            v += math.pi
        if v >= math.pi:
            v = 0.0
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


def _angle(x: float | Angle) -> float:
    return x.value if isinstance(x, Angle) else Angle(x).value


@dataclass(frozen=True)
class Ray:
    """Unit vector in 3-space taken up to sign; stored with first nonzero entry positive."""

    components: tuple[float, float, float]

    def __post_init__(self) -> None:
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 3 or not all(math.isfinite(c) for c in comps):
            raise InputError(f"a ray needs three finite components, got {self.components!r}")
        norm = math.sqrt(math.fsum(c * c for c in comps))
        if abs(norm - 1.0) > RAY_TOL:
            raise InputError(f"ray {comps!r} has norm {norm!r}")
        for c in comps:
            if abs(c) > RAY_TOL:
                if c < 0:
                    comps = tuple(-x for x in comps)
                break
        # avoid -0.0 so equal rays print and hash identically
        comps = tuple(0.0 if x == 0 else x for x in comps)
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> Ray:
        """Normalize ``v`` and canonicalize its sign."""
        arr = np.asarray(v, dtype=float)
        if arr.shape != (3,):
            raise InputError(f"a ray needs three components, got {v!r}")
        norm = float(np.linalg.norm(arr))
        if not norm > 0 or not math.isfinite(norm):
            raise InputError(f"cannot normalize {v!r}")
        return cls(tuple(arr / norm))

    def as_array(self) -> np.ndarray:
        return np.array(self.components)

    def dot(self, other: Ray) -> float:
        a, b = self.components, other.components
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]

    def parallel(self, other: Ray, tol: float = RAY_TOL) -> bool:
        """True when the two rays coincide up to sign."""
        return max(abs(x - y) for x, y in zip(self.components, other.components)) <= tol


@dataclass(frozen=True)
class Frame:
    """Orthonormal basis of 3-space, each axis up to sign."""

    rays: tuple[Ray, Ray, Ray]

    def __post_init__(self) -> None:
        rays = tuple(r if isinstance(r, Ray) else Ray(tuple(r)) for r in self.rays)
        if len(rays) != 3:
            raise InputError("a frame needs exactly three rays")
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(rays[i].dot(rays[j])) > RAY_TOL:
                    raise InputError(
                        f"frame rays {i} and {j} are not orthogonal (inner product {rays[i].dot(rays[j])!r})"
                    )
        object.__setattr__(self, "rays", rays)

    @classmethod
    def from_rows(cls, values: Sequence[float]) -> Frame:
        """Build from nine reals, one ray per row of three."""
        values = [float(v) for v in values]
        if len(values) != 9:
            raise InputError(f"a frame needs nine reals, got {len(values)}")
        return cls(tuple(Ray(tuple(values[3 * i : 3 * i + 3])) for i in range(3)))

    def as_array(self) -> np.ndarray:
        return np.array([r.components for r in self.rays])

    def rows(self) -> list[float]:
        return [c for r in self.rays for c in r.components]

    def position(self, ray: Ray, tol: float = RAY_TOL) -> int | None:
        """Index of ``ray`` in this frame, or None."""
        for i, r in enumerate(self.rays):
            if r.parallel(ray, tol):
                return i
        return None

    def __getitem__(self, i: int) -> Ray:
        return self.rays[i]


@dataclass(frozen=True)
class PairStats:
    """Joint statistics of two binary outcomes: ``pXY = P(F=X, G=Y)``."""

    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self) -> None:
        ps = (self.p11, self.p10, self.p01, self.p00)
        if any(not (-1e-15 <= p <= 1 + 1e-15) for p in ps):
            raise InputError(f"pair statistics out of range: {ps!r}")
        if abs(math.fsum(ps) - 1.0) > SPIN_TABLE_TOL:
            raise InputError(f"pair statistics sum to {math.fsum(ps)!r}")

    @property
    def mismatch(self) -> float:
        return self.p10 + self.p01

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p10, self.p01, self.p00)

    def max_abs_diff(self, other: PairStats) -> float:
        return max(abs(x - y) for x, y in zip(self.as_tuple(), other.as_tuple()))


@dataclass(frozen=True)
class SpinJointTable:
    """Spin-one joint law indexed by (Alice's zero position, Bob's zero position)."""

    cells: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        cells = tuple(tuple(float(c) for c in row) for row in self.cells)
        if len(cells) != 3 or any(len(row) != 3 for row in cells):
            raise InputError("a spin-one joint table is 3x3")
        if any(c < -1e-15 for row in cells for c in row):
            raise InputError("negative cell in spin-one joint table")
        total = math.fsum(c for row in cells for c in row)
        if abs(total - 1.0) > SPIN_TABLE_TOL:
            raise InputError(f"spin-one joint table sums to {total!r}")
        object.__setattr__(self, "cells", cells)

    def as_array(self) -> np.ndarray:
        return np.array(self.cells)

    def total(self) -> float:
        return math.fsum(c for row in self.cells for c in row)

    def pair_stats(self, i: int, j: int) -> PairStats:
        """Statistics of (F_i, G_j) read off the joint table."""
        arr = self.as_array()
        p00 = arr[i, j]
        p01 = arr[i, :].sum() - p00
        p10 = arr[:, j].sum() - p00
        p11 = arr.sum() - p00 - p01 - p10
        return PairStats(float(p11), float(p10), float(p01), float(p00))

    def alice_zero_marginal(self) -> np.ndarray:
        return self.as_array().sum(axis=1)

    def bob_zero_marginal(self) -> np.ndarray:
        return self.as_array().sum(axis=0)

    def max_abs_diff(self, other: SpinJointTable) -> float:
        return float(np.max(np.abs(self.as_array() - other.as_array())))


# closed forms


def photon_stats(alpha: float | Angle, beta: float | Angle) -> PairStats:
    d = _angle(alpha) - _angle(beta)
    c2 = math.cos(d) ** 2
    s2 = math.sin(d) ** 2
    return PairStats(p11=c2 / 2, p10=s2 / 2, p01=s2 / 2, p00=c2 / 2)


def spin1_pair_stats(a: Ray, b: Ray) -> PairStats:
    # rays equal at RAY_TOL are the same ray, so they correlate perfectly
    c2 = 1.0 if a.parallel(b) else min(1.0, a.dot(b) ** 2)
    return PairStats(p11=(1 + c2) / 3, p10=(1 - c2) / 3, p01=(1 - c2) / 3, p00=c2 / 3)


def spin1_joint(a: Frame, b: Frame) -> SpinJointTable:
    """Cell (i, j) is <a_i, b_j>^2 / 3.

    A ray shared by both frames (equal at ``RAY_TOL``) gets its row and column
    set exactly, so the perfect correlation on it holds without round-off.
    """
    if not isinstance(a, Frame) or not isinstance(b, Frame):
        raise InputError("spin1_joint needs two frames")
    cells = np.array([[ai.dot(bj) ** 2 / 3 for bj in b.rays] for ai in a.rays])
    for i, j in itertools.product(range(3), range(3)):
        if a[i].parallel(b[j]):
            cells[i, :] = 0.0
            cells[:, j] = 0.0
            cells[i, j] = 1 / 3
    return SpinJointTable(tuple(tuple(float(c) for c in row) for row in cells))


# Born-rule oracle


def _polarizer(angle: float) -> np.ndarray:
    v = np.array([math.cos(angle), math.sin(angle)])
    return np.outer(v, v)


_PHOTON_STATE = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)


def born_oracle_photon(alpha: float | Angle, beta: float | Angle) -> PairStats:
    pa, pb = _polarizer(_angle(alpha)), _polarizer(_angle(beta))
    eye = np.eye(2)
    psi = _PHOTON_STATE

    def expect(x: np.ndarray, y: np.ndarray) -> float:
        return float(psi @ np.kron(x, y) @ psi)

    return PairStats(
        p11=expect(pa, pb),
        p10=expect(pa, eye - pb),
        p01=expect(eye - pa, pb),
        p00=expect(eye - pa, eye - pb),
    )


def spin1_operators() -> np.ndarray:
    """The three spin-one components, shape (3, 3, 3), in the Cartesian basis."""
    eps = np.zeros((3, 3, 3))
    for k, l, m in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[k, l, m] = 1.0
        eps[k, m, l] = -1.0
    return -1j * eps


_J = spin1_operators()
_SPIN1_STATE = np.eye(3, dtype=complex).reshape(9) / math.sqrt(3.0)


def spin_component_squared(direction: Ray) -> np.ndarray:
    s = np.tensordot(direction.as_array(), _J, axes=1)
    return s @ s


def zero_projector(direction: Ray) -> np.ndarray:
    """Spectral projector of <direction, J>^2 onto eigenvalue 0."""
    vals, vecs = np.linalg.eigh(spin_component_squared(direction))
    zero = vecs[:, np.abs(vals) < 0.5]
    return zero @ zero.conj().T


def spin1_sum_rule_residual(frame: Frame) -> float:
    """Max entry of |sum_i <a_i, J>^2 - 2 I|; zero for a genuine frame."""
    total = sum(spin_component_squared(r) for r in frame.rays)
    return float(np.max(np.abs(total - 2 * np.eye(3))))


def born_oracle_spin1(a: Frame, b: Frame) -> SpinJointTable:
    psi = _SPIN1_STATE
    pa = [zero_projector(r) for r in a.rays]
    pb = [zero_projector(r) for r in b.rays]
    cells = tuple(
        tuple(float(np.real(psi.conj() @ np.kron(x, y) @ psi)) for y in pb) for x in pa
    )
    return SpinJointTable(cells)


# tables over many settings


def photon_table(
    settings_a: Sequence[float], settings_b: Sequence[float], oracle: bool = False
) -> ConditionalTable:
    """Quantum conditional table for polarizer angles on each side."""
    stats = born_oracle_photon if oracle else photon_stats
    probs = np.empty((len(settings_a), len(settings_b), 2, 2))
    for i, a in enumerate(settings_a):
        for j, b in enumerate(settings_b):
            s = stats(a, b)
            probs[i, j] = [[s.p00, s.p01], [s.p10, s.p11]]
    return ConditionalTable(
        tuple(_angle(a) for a in settings_a),
        tuple(_angle(b) for b in settings_b),
        PHOTON_OUTCOMES,
        PHOTON_OUTCOMES,
        probs,
    )


def spin1_table(
    frames_a: Sequence[Frame], frames_b: Sequence[Frame], oracle: bool = False
) -> ConditionalTable:
    """Quantum conditional table over zero-position-encoded outcome triples."""
    joint = born_oracle_spin1 if oracle else spin1_joint
    probs = np.empty((len(frames_a), len(frames_b), 3, 3))
    for i, a in enumerate(frames_a):
        for j, b in enumerate(frames_b):
            probs[i, j] = joint(a, b).as_array()
    # renormalize each slice: frames accurate only to RAY_TOL
    probs /= probs.sum(axis=(2, 3), keepdims=True)
    return ConditionalTable(
        tuple(frames_a), tuple(frames_b), SPIN1_OUTCOMES, SPIN1_OUTCOMES, probs
    )
