"""Hidden-variable models and the checks that relate them.

A ``RawModel`` is the general object: a finite state space carrying the
settings ``A, B``, outcomes ``F, G`` and hidden variable ``Z`` as random
variables. A ``FactorizedModel`` has Freedom and Parameter Independence built
in: settings and hidden variable are drawn independently and outcomes are
response functions of (own setting, hidden variable). A
``StochasticKernelModel`` replaces the response functions by outcome
distributions.

``factorize`` turns a raw model that passes both checks into a factorized one,
and ``derandomize`` turns a stochastic model into a factorized one over an
enlarged hidden-variable space with the same statistics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Hashable, Sequence

import numpy as np

from .errors import ConditioningError, InputError, RefusalError
from .finprob import (
    NORMALIZATION_TOL,
    FiniteDistribution,
    JointTable,
    RandomVariable,
    SampleSpace,
    check_mutual_independence,
    condition,
    independence_residual,
    make_rng,
    product_measure,
    push_forward,
    sample_indices,
)
from .quantum import PHOTON_OUTCOMES, SPIN1_OUTCOMES, Frame
from .tables import ConditionalTable

VARIANTS = ("photon", "spin1")
_NAMES = ("A", "B", "F", "G", "Z")


def outcomes_for(variant: str) -> tuple:
    if variant == "photon":
        return PHOTON_OUTCOMES
    if variant == "spin1":
        return SPIN1_OUTCOMES
    raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def _positive_dist(weights: Sequence[float] | None, n: int, what: str) -> tuple[float, ...]:
    if weights is None:
        return FiniteDistribution.uniform(n).weights
    dist = FiniteDistribution(tuple(weights))
    if len(dist) != n:
        raise InputError(f"{what}: {len(dist)} weights for {n} values")
    if min(dist.weights) <= 0.0:
        raise InputError(f"{what} must give every declared value positive probability")
    return dist.weights


def _unique(values: Sequence, what: str) -> tuple:
    values = tuple(values)
    if not values:
        raise InputError(f"{what} must be nonempty")
    if len(set(values)) != len(values):
        raise InputError(f"{what} has repeated values")
    return values


@dataclass(frozen=True, eq=False)
class RawModel:
    """Finite state space with settings, outcomes and hidden variable as random variables."""

    space: SampleSpace
    a: RandomVariable
    b: RandomVariable
    f: RandomVariable
    g: RandomVariable
    z: RandomVariable

    def __post_init__(self) -> None:
        for label, rv in zip(_NAMES, self.variables(named=False)):
            if not isinstance(rv, RandomVariable) or not rv.defined_on(self.space):
                raise InputError(f"random variable {label} is not total on the state space")

    def variables(self, named: bool = True) -> list[RandomVariable]:
        rvs = [self.a, self.b, self.f, self.g, self.z]
        if not named:
            return rvs
        return [RandomVariable(n, rv.codomain, rv.assignment) for n, rv in zip(_NAMES, rvs)]

    def joint(self) -> JointTable:
        """Law of (A, B, F, G, Z)."""
        return push_forward(self.space, self.variables())

    def conditional_table(self) -> ConditionalTable:
        """P(F, G | A, B) by conditioning; pairs of probability zero are absent."""
        a, b, f, g, _ = self.variables()
        joint = push_forward(self.space, [a, b, f, g])
        shape = (len(a.codomain), len(b.codomain), len(f.codomain), len(g.codomain))
        probs = np.full(shape, np.nan)
        present = np.zeros(shape[:2], dtype=bool)
        for (i, alpha), (j, beta) in itertools.product(
            enumerate(a.codomain), enumerate(b.codomain)
        ):
            try:
                cond = condition(joint, {"A": alpha, "B": beta})
            except ConditioningError:
                continue
            probs[i, j] = cond.to_array()
            present[i, j] = True
        return ConditionalTable(a.codomain, b.codomain, f.codomain, g.codomain, probs, present)


@dataclass(frozen=True, eq=False)
class FactorizedModel:
    """Deterministic local model in product form.

    ``response_f[ia][iz]`` is Alice's outcome at setting ``settings_a[ia]`` and
    hidden value ``z[iz]``; likewise ``response_g`` for Bob. Photon outcomes
    are 0/1, spin-one outcomes are the triples in ``SPIN1_OUTCOMES``. Setting
    and hidden-variable distributions default to uniform and must have full
    support.
    """

    variant: str
    settings_a: tuple
    settings_b: tuple
    z: tuple
    response_f: tuple
    response_g: tuple
    p_a: tuple | None = None
    p_b: tuple | None = None
    p_z: tuple | None = None

    def __post_init__(self) -> None:
        outcomes = outcomes_for(self.variant)
        sa = _unique(self.settings_a, "settings_a")
        sb = _unique(self.settings_b, "settings_b")
        zs = _unique(self.z, "z")
        if self.variant == "spin1" and not all(isinstance(s, Frame) for s in sa + sb):
            raise InputError("spin-one settings must be frames")
        set_ = object.__setattr__
        set_(self, "settings_a", sa)
        set_(self, "settings_b", sb)
        set_(self, "z", zs)
        set_(self, "p_a", _positive_dist(self.p_a, len(sa), "p_a"))
        set_(self, "p_b", _positive_dist(self.p_b, len(sb), "p_b"))
        set_(self, "p_z", _positive_dist(self.p_z, len(zs), "p_z"))
        for name, resp, n in (("response_f", self.response_f, len(sa)), ("response_g", self.response_g, len(sb))):
            resp = tuple(tuple(_outcome(v, self.variant) for v in row) for row in resp)
            if len(resp) != n or any(len(row) != len(zs) for row in resp):
                raise InputError(f"{name} must give an outcome for every (setting, z)")
            for row in resp:
                for v in row:
                    if v not in outcomes:
                        raise InputError(f"{name} outcome {v!r} not in {outcomes!r}")
            set_(self, name, resp)

    @property
    def outcomes(self) -> tuple:
        return outcomes_for(self.variant)

    def f_index(self) -> np.ndarray:
        """Outcome indices of ``response_f``, shape (n_settings_a, n_z)."""
        idx = {o: k for k, o in enumerate(self.outcomes)}
        return np.array([[idx[v] for v in row] for row in self.response_f], dtype=np.int64)

    def g_index(self) -> np.ndarray:
        idx = {o: k for k, o in enumerate(self.outcomes)}
        return np.array([[idx[v] for v in row] for row in self.response_g], dtype=np.int64)

    def reweighted(self, p_a=None, p_b=None) -> FactorizedModel:
        return replace(self, p_a=p_a if p_a is not None else self.p_a, p_b=p_b if p_b is not None else self.p_b)

    def induced_raw_model(self) -> RawModel:
        """The raw model on X = settings_a x settings_b x z with the product measure."""
        factors = [
            SampleSpace.from_weights(range(len(self.settings_a)), self.p_a),
            SampleSpace.from_weights(range(len(self.settings_b)), self.p_b),
            SampleSpace.from_weights(range(len(self.z)), self.p_z),
        ]
        space = product_measure(factors)
        out = self.outcomes
        rv = RandomVariable.from_function
        return RawModel(
            space,
            rv("A", space, lambda x: self.settings_a[x[0]], self.settings_a),
            rv("B", space, lambda x: self.settings_b[x[1]], self.settings_b),
            rv("F", space, lambda x: self.response_f[x[0]][x[2]], out),
            rv("G", space, lambda x: self.response_g[x[1]][x[2]], out),
            rv("Z", space, lambda x: self.z[x[2]], self.z),
        )


def _outcome(v, variant: str):
    if variant == "spin1" and isinstance(v, (list, tuple)):
        return tuple(int(x) for x in v)
    if variant == "photon" and isinstance(v, (bool, np.integer, int)):
        return int(v)
    return v


@dataclass(frozen=True, eq=False)
class StochasticKernelModel:
    """Local model whose outcomes are drawn from per-(setting, z) distributions.

    ``kernel_f[ia, iz, k]`` is P(F = outcomes[k] | A = settings_a[ia], Z = z[iz]).
    """

    variant: str
    settings_a: tuple
    settings_b: tuple
    z: tuple
    kernel_f: np.ndarray
    kernel_g: np.ndarray
    p_a: tuple | None = None
    p_b: tuple | None = None
    p_z: tuple | None = None

    def __post_init__(self) -> None:
        outcomes = outcomes_for(self.variant)
        sa = _unique(self.settings_a, "settings_a")
        sb = _unique(self.settings_b, "settings_b")
        zs = _unique(self.z, "z")
        set_ = object.__setattr__
        set_(self, "settings_a", sa)
        set_(self, "settings_b", sb)
        set_(self, "z", zs)
        set_(self, "p_a", _positive_dist(self.p_a, len(sa), "p_a"))
        set_(self, "p_b", _positive_dist(self.p_b, len(sb), "p_b"))
        set_(self, "p_z", _positive_dist(self.p_z, len(zs), "p_z"))
        for name, n in (("kernel_f", len(sa)), ("kernel_g", len(sb))):
            k = np.array(getattr(self, name), dtype=float)
            if k.shape != (n, len(zs), len(outcomes)):
                raise InputError(f"{name} has shape {k.shape}, expected {(n, len(zs), len(outcomes))}")
            if (k < 0).any() or np.isnan(k).any():
                raise InputError(f"{name} has negative or NaN entries")
            if np.max(np.abs(k.sum(axis=2) - 1.0)) > NORMALIZATION_TOL:
                raise InputError(f"every row of {name} must sum to 1")
            k.flags.writeable = False
            set_(self, name, k)

    @property
    def outcomes(self) -> tuple:
        return outcomes_for(self.variant)

    def predicted_table(self) -> ConditionalTable:
        """P(F=l, G=m | a, b) = sum_z P_Z(z) k_f(l | a, z) k_g(m | b, z)."""
        probs = np.einsum("z,azl,bzm->ablm", np.array(self.p_z), self.kernel_f, self.kernel_g)
        return ConditionalTable(self.settings_a, self.settings_b, self.outcomes, self.outcomes, probs)

    def joint(self) -> JointTable:
        """Full law of (A, B, F, G, Z) with independent settings and hidden variable."""
        arr = np.einsum(
            "a,b,z,azl,bzm->ablmz",
            np.array(self.p_a),
            np.array(self.p_b),
            np.array(self.p_z),
            self.kernel_f,
            self.kernel_g,
        )
        arr = arr / arr.sum()
        return JointTable.from_array(
            _NAMES,
            (self.settings_a, self.settings_b, self.outcomes, self.outcomes, self.z),
            arr,
        )


# checks on raw models


@dataclass(frozen=True)
class FreedomReport:
    probabilistic: bool
    surjective: bool
    residual: float
    pairwise: dict = field(hash=False)
    missing: tuple | None = None


def check_freedom(m: RawModel, tol: float = 1e-12) -> FreedomReport:
    """Freedom of (A, B, Z) in both senses.

    ``probabilistic``: mutual independence under P within ``tol``.
    ``surjective``: every (a, b, z) in the product of codomains is hit by some
    state, regardless of weight. ``pairwise`` holds the residuals for the pairs.
    """
    a, b, _, _, z = m.variables()
    report = check_mutual_independence([a, b, z], m.space, tol)
    pairwise = {}
    for x, y in ((a, b), (a, z), (b, z)):
        pairwise[x.name + y.name] = independence_residual(push_forward(m.space, [x, y]))
    hit = {(a(x), b(x), z(x)) for x in m.space.atoms}
    missing = next(
        (t for t in itertools.product(a.codomain, b.codomain, z.codomain) if t not in hit),
        None,
    )
    return FreedomReport(report.independent, missing is None, report.max_residual, pairwise, missing)


@dataclass(frozen=True)
class ParameterIndependenceReport:
    holds: bool
    f_hat: dict | None = field(default=None, hash=False)
    g_hat: dict | None = field(default=None, hash=False)
    witness: str | None = None


def _extract(space: SampleSpace, setting: RandomVariable, z: RandomVariable, out: RandomVariable):
    table: dict[tuple, Hashable] = {}
    for x, w in space.items():
        if w <= 0.0:
            continue
        key = (setting(x), z(x))
        seen = table.setdefault(key, out(x))
        if seen != out(x):
            return None, (
                f"{out.name} takes values {seen!r} and {out(x)!r} at "
                f"{setting.name}={key[0]!r}, {z.name}={key[1]!r}"
            )
    return table, None


def check_parameter_independence(m: RawModel) -> ParameterIndependenceReport:
    """F constant on every positive-weight fiber of (A, Z), G on every fiber of (B, Z)."""
    a, b, f, g, z = m.variables()
    f_hat, why = _extract(m.space, a, z, f)
    if f_hat is None:
        return ParameterIndependenceReport(False, witness=why)
    g_hat, why = _extract(m.space, b, z, g)
    if g_hat is None:
        return ParameterIndependenceReport(False, witness=why)
    return ParameterIndependenceReport(True, f_hat, g_hat)


def _variant_of(rv: RandomVariable) -> str:
    values = set(rv.codomain)
    if values <= set(PHOTON_OUTCOMES) and all(not isinstance(v, tuple) for v in values):
        return "photon"
    if values <= set(SPIN1_OUTCOMES):
        return "spin1"
    raise InputError(f"outcome values {rv.codomain!r} fit neither the photon nor the spin-one variant")


def factorize(m: RawModel, tol: float = 1e-12) -> FactorizedModel:
    """Product-form model reproducing ``m``'s conditional statistics.

    Raises ``RefusalError`` naming "Freedom" or "Parameter Independence" when
    the corresponding check fails.
    """
    freedom = check_freedom(m, tol)
    if not freedom.probabilistic:
        raise RefusalError("Freedom", f"(A, B, Z) are not independent (residual {freedom.residual:.3g})")
    pi = check_parameter_independence(m)
    if not pi.holds:
        raise RefusalError("Parameter Independence", pi.witness or "")
    variant = _variant_of(m.f)
    if _variant_of(m.g) != variant:
        raise InputError("F and G belong to different variants")
    a, b, _, _, z = m.variables()
    law = {rv.name: push_forward(m.space, [rv]) for rv in (a, b, z)}
    p_a = [law["A"].prob(v) for v in a.codomain]
    p_b = [law["B"].prob(v) for v in b.codomain]
    if min(p_a) <= 0 or min(p_b) <= 0:
        raise RefusalError("Freedom", "every declared setting needs positive probability")
    support = [v for v in z.codomain if law["Z"].prob(v) > 0]
    p_z = np.array([law["Z"].prob(v) for v in support])
    return FactorizedModel(
        variant,
        a.codomain,
        b.codomain,
        tuple(support),
        tuple(tuple(pi.f_hat[(alpha, zz)] for zz in support) for alpha in a.codomain),
        tuple(tuple(pi.g_hat[(beta, zz)] for zz in support) for beta in b.codomain),
        tuple(p_a),
        tuple(p_b),
        tuple(p_z / p_z.sum()),
    )


# statistics of factorized models


def predicted_table(m: FactorizedModel) -> ConditionalTable:
    """P(F=l, G=m | a, b) = sum_z P_Z(z) [F(a, z) = l] [G(b, z) = m]."""
    n_out = len(m.outcomes)
    f_hot = np.eye(n_out)[m.f_index()]
    g_hot = np.eye(n_out)[m.g_index()]
    probs = np.einsum("z,azl,bzm->ablm", np.array(m.p_z), f_hot, g_hot)
    return ConditionalTable(m.settings_a, m.settings_b, m.outcomes, m.outcomes, probs)


def simulate(m: FactorizedModel, shots: int, seed: int) -> ConditionalTable:
    """Empirical conditional frequencies from ``shots`` independent runs.

    Draw order (part of the reproducibility contract): all setting indices for
    Alice, then all for Bob, then all hidden-variable indices, each through
    ``sample_indices`` on one Philox stream keyed by ``seed``. Setting pairs
    that are never drawn are marked absent.
    """
    if shots < 1:
        raise InputError("shots must be at least 1")
    rng = make_rng(seed)
    ia = sample_indices(m.p_a, rng, shots)
    ib = sample_indices(m.p_b, rng, shots)
    iz = sample_indices(m.p_z, rng, shots)
    lam = m.f_index()[ia, iz]
    mu = m.g_index()[ib, iz]
    n_a, n_b, n_out = len(m.settings_a), len(m.settings_b), len(m.outcomes)
    flat = ((ia * n_b + ib) * n_out + lam) * n_out + mu
    counts = np.bincount(flat, minlength=n_a * n_b * n_out * n_out).reshape(n_a, n_b, n_out, n_out)
    per_pair = counts.sum(axis=(2, 3))
    present = per_pair > 0
    probs = np.full(counts.shape, np.nan)
    probs[present] = counts[present] / per_pair[present][:, None, None]
    return ConditionalTable(m.settings_a, m.settings_b, m.outcomes, m.outcomes, probs, present, per_pair)


# stochastic models


@dataclass(frozen=True)
class BellLocalityReport:
    bell_local: bool
    freedom: bool
    locality_residual: float
    freedom_residual: float


def check_bell_locality(joint: JointTable, tol: float = 1e-12) -> BellLocalityReport:
    """Factorization P(F,G|A,B,Z) = P(F|A,Z) P(G|B,Z) and P(Z|A,B) = P(Z).

    ``joint`` must contain variables named A, B, F, G, Z (any others are
    summed out). Only conditionals with positive-probability conditions are
    compared.
    """
    arr = joint.marginal(list(_NAMES)).to_array()  # axes a, b, f, g, z
    p_abz = arr.sum(axis=(2, 3))
    p_afz = arr.sum(axis=(1, 3))
    p_bgz = arr.sum(axis=(0, 2))
    p_az = p_afz.sum(axis=1)
    p_bz = p_bgz.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        f_cond = p_afz / p_az[:, None, :]
        g_cond = p_bgz / p_bz[:, None, :]
        fg_cond = arr / p_abz[:, :, None, None, :]
    product = f_cond[:, None, :, None, :] * g_cond[None, :, None, :, :]
    live = np.broadcast_to((p_abz > 0)[:, :, None, None, :], arr.shape)
    loc = float(np.max(np.abs(fg_cond - product)[live])) if live.any() else 0.0

    p_ab = p_abz.sum(axis=2)
    p_z = p_abz.sum(axis=(0, 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        z_cond = p_abz / p_ab[:, :, None]
    ok = p_ab > 0
    free = float(np.max(np.abs(z_cond[ok] - p_z[None, :]))) if ok.any() else 0.0
    return BellLocalityReport(loc <= tol, free <= tol, loc, free)


def embed_table(table: ConditionalTable, p_a=None, p_b=None) -> JointTable:
    """Joint law of (A, B, F, G, Z) for a conditional table with a one-point Z."""
    if not table.complete:
        raise InputError("cannot embed a table with absent setting pairs")
    n_a, n_b = len(table.settings_a), len(table.settings_b)
    pa = np.array(_positive_dist(p_a, n_a, "p_a"))
    pb = np.array(_positive_dist(p_b, n_b, "p_b"))
    arr = pa[:, None, None, None, None] * pb[None, :, None, None, None] * table.probs[..., None]
    return JointTable.from_array(
        _NAMES,
        (tuple(range(n_a)), tuple(range(n_b)), table.outcomes_f, table.outcomes_g, (0,)),
        arr / arr.sum(),
    )


def _partition(rows: np.ndarray, order: Sequence[int]) -> list[tuple[float, float, list[int]]]:
    """Split [0, 1] at every cumulative kernel value.

    ``rows[k]`` is an outcome distribution; outcomes occupy consecutive
    intervals in ``order``. Returns (lo, hi, outcome index per row) for each
    piece of positive length.
    """
    cum = np.cumsum(rows[:, order], axis=1)
    cum[:, -1] = 1.0
    cuts = np.unique(np.concatenate([[0.0, 1.0], cum.ravel()]))
    cuts = cuts[(cuts >= 0.0) & (cuts <= 1.0)]
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        pos = [int(np.searchsorted(c, mid, side="right")) for c in cum]
        pieces.append((float(lo), float(hi), [order[min(p, len(order) - 1)] for p in pos]))
    return pieces


@dataclass(frozen=True, eq=False)
class DerandomizationResult:
    model: FactorizedModel
    table: ConditionalTable
    max_abs_diff: float
    certified: bool


def derandomize(m: StochasticKernelModel, tol: float = 1e-12) -> DerandomizationResult:
    """Deterministic model with the same statistics as ``m``.

    The hidden variable is extended by two uniform coordinates ``s, t`` in
    [0, 1]. Alice's outcome at setting a is the outcome whose slice of [0, 1]
    (laid out by cumulative kernel probability, outcome 1 first for photons
    so that F = 1 exactly when s <= P(F=1 | a, z)) contains s; Bob's likewise
    with t. Only the finitely many pieces cut out by the kernel values matter,
    so the new hidden variable ranges over (z, s-piece, t-piece) with weight
    P_Z(z) times the two piece lengths. ``certified`` compares the resulting
    table against the model's own prediction at ``tol``.
    """
    n_out = len(m.outcomes)
    order = [1, 0] if m.variant == "photon" else list(range(n_out))
    labels, weights, f_rows, g_rows = [], [], [], []
    for iz, (z, pz) in enumerate(zip(m.z, m.p_z)):
        s_pieces = _partition(m.kernel_f[:, iz, :], order)
        t_pieces = _partition(m.kernel_g[:, iz, :], order)
        for (k, (s_lo, s_hi, f_out)), (l, (t_lo, t_hi, g_out)) in itertools.product(
            enumerate(s_pieces), enumerate(t_pieces)
        ):
            labels.append((z, k, l))
            weights.append(pz * (s_hi - s_lo) * (t_hi - t_lo))
            f_rows.append(f_out)
            g_rows.append(g_out)
    weights = np.array(weights)
    outcomes = m.outcomes
    model = FactorizedModel(
        m.variant,
        m.settings_a,
        m.settings_b,
        tuple(labels),
        tuple(tuple(outcomes[row[ia]] for row in f_rows) for ia in range(len(m.settings_a))),
        tuple(tuple(outcomes[row[ib]] for row in g_rows) for ib in range(len(m.settings_b))),
        m.p_a,
        m.p_b,
        tuple(weights / weights.sum()),
    )
    table = predicted_table(model)
    diff = table.max_abs_diff(m.predicted_table())
    return DerandomizationResult(model, table, diff, diff <= tol)


# perfect correlation for spin-one models


@dataclass(frozen=True)
class PerfectCorrelationReport:
    holds: bool
    checked: int
    witness: dict | None = field(default=None, hash=False)
    skipped: tuple = ()


def check_perfect_correlation(
    m: FactorizedModel, frame_pairs: Sequence[tuple[Frame, Frame]] | None = None
) -> PerfectCorrelationReport:
    """Whenever a_i = +-b_j, Alice's component i must equal Bob's component j for every z.

    ``frame_pairs`` defaults to every (Alice setting, Bob setting) pair. Pairs
    sharing no ray are skipped and listed in the report by setting index.
    """
    if m.variant != "spin1":
        raise InputError("perfect correlation applies to spin-one models")
    if frame_pairs is None:
        frame_pairs = list(itertools.product(m.settings_a, m.settings_b))
    pos_a = {s: i for i, s in enumerate(m.settings_a)}
    pos_b = {s: i for i, s in enumerate(m.settings_b)}
    checked = 0
    skipped = []
    for fa, fb in frame_pairs:
        if fa not in pos_a or fb not in pos_b:
            raise InputError("frame pairs must be drawn from the model's settings")
        ia, ib = pos_a[fa], pos_b[fb]
        shared = [(i, j) for i in range(3) for j in range(3) if fa[i].parallel(fb[j])]
        if not shared:
            skipped.append((ia, ib))
            continue
        for iz, z in enumerate(m.z):
            f_out, g_out = m.response_f[ia][iz], m.response_g[ib][iz]
            for i, j in shared:
                checked += 1
                if f_out[i] != g_out[j]:
                    witness = {"z": z, "frame_a": ia, "frame_b": ib, "i": i, "j": j}
                    return PerfectCorrelationReport(False, checked, witness, tuple(skipped))
    return PerfectCorrelationReport(True, checked, None, tuple(skipped))
