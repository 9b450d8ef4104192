"""Random models and frames for property tests and audits."""

from __future__ import annotations

import numpy as np

from .models import FactorizedModel, StochasticKernelModel, outcomes_for
from .quantum import Frame, Ray


def random_simplex(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    """Strictly positive weights summing to one."""
    w = rng.exponential(size=n) + 1e-3
    return tuple(w / w.sum())


def random_frame(rng: np.random.Generator) -> Frame:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return Frame.from_rows(q.T.ravel())


def random_frame_sharing(rng: np.random.Generator, a: Frame, i: int, j: int) -> Frame:
    """Random frame whose ray ``j`` is exactly ``a[i]``; the other two are rotated about it."""
    k, l = [m for m in range(3) if m != i]
    phi = rng.uniform(0, 2 * np.pi)
    u, v = a[k].as_array(), a[l].as_array()
    others = [np.cos(phi) * u + np.sin(phi) * v, -np.sin(phi) * u + np.cos(phi) * v]
    slots = [m for m in range(3) if m != j]
    rays = [None, None, None]
    rays[j] = a[i]
    for slot, vec in zip(slots, others):
        rays[slot] = Ray.from_vector(vec)
    return Frame(tuple(rays))


def _settings(rng: np.random.Generator, variant: str, n: int) -> tuple:
    if variant == "photon":
        return tuple(np.sort(rng.uniform(0, np.pi, size=n)))
    return tuple(random_frame(rng) for _ in range(n))


def random_factorized_model(
    rng: np.random.Generator,
    variant: str = "photon",
    n_a: int = 2,
    n_b: int = 2,
    max_z: int = 20,
) -> FactorizedModel:
    outcomes = outcomes_for(variant)
    n_z = int(rng.integers(1, max_z + 1))
    f = rng.integers(0, len(outcomes), size=(n_a, n_z))
    g = rng.integers(0, len(outcomes), size=(n_b, n_z))
    return FactorizedModel(
        variant,
        _settings(rng, variant, n_a),
        _settings(rng, variant, n_b),
        tuple(range(n_z)),
        tuple(tuple(outcomes[k] for k in row) for row in f),
        tuple(tuple(outcomes[k] for k in row) for row in g),
        random_simplex(rng, n_a),
        random_simplex(rng, n_b),
        random_simplex(rng, n_z),
    )


def random_kernel_model(
    rng: np.random.Generator,
    variant: str = "photon",
    n_a: int = 2,
    n_b: int = 2,
    max_z: int = 20,
    deterministic_fraction: float = 0.2,
) -> StochasticKernelModel:
    """Kernel model; a fraction of kernel rows are made 0/1 to exercise degenerate pieces."""
    n_out = len(outcomes_for(variant))
    n_z = int(rng.integers(1, max_z + 1))

    def kernel(n: int) -> np.ndarray:
        k = rng.dirichlet(np.ones(n_out), size=(n, n_z))
        hard = rng.random((n, n_z)) < deterministic_fraction
        k[hard] = np.eye(n_out)[rng.integers(0, n_out, size=int(hard.sum()))]
        return k

    return StochasticKernelModel(
        variant,
        _settings(rng, variant, n_a),
        _settings(rng, variant, n_b),
        tuple(range(n_z)),
        kernel(n_a),
        kernel(n_b),
        random_simplex(rng, n_a),
        random_simplex(rng, n_b),
        random_simplex(rng, n_z),
    )
