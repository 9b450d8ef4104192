"""Ray sets, orthogonality graphs and 0/1 colorings.

A coloring gives each ray 0 or 1 so that every orthogonal triad has exactly
one 0 and no orthogonal pair has two 0s. The pair rule matters because two
orthogonal rays always complete to a frame, even if the third ray is not in
the set. A spin-one outcome triple is a coloring of one frame, with the zero
in the measured ``<a_i, J>^2 = 0`` slot.

``search_coloring`` is a complete backtracking search with unit propagation;
on the 33-ray Peres set it exhausts without a coloring.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .models import FactorizedModel, check_perfect_correlation
from .quantum import RAY_TOL, Frame, Ray


@dataclass(frozen=True)
class RaySet:
    """Distinct rays (up to sign, at ``RAY_TOL``)."""

    rays: tuple[Ray, ...]

    def __post_init__(self) -> None:
        rays = tuple(r if isinstance(r, Ray) else Ray.from_vector(r) for r in self.rays)
        for i, j in itertools.combinations(range(len(rays)), 2):
            if rays[i].parallel(rays[j]):
                raise InputError(f"rays {i} and {j} coincide up to sign")
        object.__setattr__(self, "rays", rays)

    @classmethod
    def from_vectors(cls, vectors: Iterable[Sequence[float]], dedupe: bool = False) -> RaySet:
        rays: list[Ray] = []
        for v in vectors:
            r = Ray.from_vector(v)
            if dedupe and any(r.parallel(s) for s in rays):
                continue
            rays.append(r)
        return cls(tuple(rays))

    def __len__(self) -> int:
        return len(self.rays)

    def __getitem__(self, i: int) -> Ray:
        return self.rays[i]

    def index(self, ray: Ray) -> int | None:
        for i, r in enumerate(self.rays):
            if r.parallel(ray):
                return i
        return None

    def negated(self, i: int) -> RaySet:
        """Same set with ray ``i`` given by its negative (canonicalizes back)."""
        rays = list(self.rays)
        rays[i] = Ray(tuple(-c for c in rays[i].components))
        return RaySet(tuple(rays))


@dataclass(frozen=True)
class OrthoGraph:
    rays: RaySet
    pairs: tuple[tuple[int, int], ...]
    triads: tuple[tuple[int, int, int], ...]
    neighbors: tuple[frozenset, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        nbrs = [set() for _ in self.rays.rays]
        for i, j in self.pairs:
            nbrs[i].add(j)
            nbrs[j].add(i)
        object.__setattr__(self, "neighbors", tuple(frozenset(s) for s in nbrs))

    def __len__(self) -> int:
        return len(self.rays)

    def triad_frame(self, t: tuple[int, int, int]) -> Frame:
        return Frame(tuple(self.rays[i] for i in t))

    def frames(self) -> list[Frame]:
        return [self.triad_frame(t) for t in self.triads]


def orthogonality_graph(rays: RaySet, tol: float = RAY_TOL) -> OrthoGraph:
    """Orthogonal pairs (|<r_i, r_j>| <= tol) and the triples pairwise among them."""
    vecs = np.array([r.components for r in rays.rays]).reshape(-1, 3)
    gram = np.abs(vecs @ vecs.T)
    n = len(rays)
    pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n) if gram[i, j] <= tol)
    adj = [set() for _ in range(n)]
    for i, j in pairs:
        adj[i].add(j)
        adj[j].add(i)
    triads = tuple(
        (i, j, k)
        for i, j in pairs
        for k in sorted(adj[i] & adj[j])
        if k > j
    )
    return OrthoGraph(rays, pairs, triads)


def peres33() -> RaySet:
    """The 33 rays built from components 0, +-1, +-sqrt(2) (Peres' set)."""
    r2 = math.sqrt(2.0)
    shapes = [(0.0, 0.0, 1.0), (0.0, 1.0, 1.0), (0.0, 1.0, -1.0), (0.0, 1.0, r2), (0.0, 1.0, -r2)]
    shapes += [(s1, s2, r2) for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)]
    vectors = []
    for shape in shapes:
        for perm in itertools.permutations(range(3)):
            vectors.append(tuple(shape[p] for p in perm))
    return RaySet.from_vectors(vectors, dedupe=True)


@dataclass(frozen=True)
class Coloring:
    value: tuple[int, ...]

    def __post_init__(self) -> None:
        value = tuple(int(v) for v in self.value)
        if any(v not in (0, 1) for v in value):
            raise InputError("colorings are 0/1 valued")
        object.__setattr__(self, "value", value)

    def __getitem__(self, i: int) -> int:
        return self.value[i]

    def __len__(self) -> int:
        return len(self.value)

    def outcome(self, triad: Sequence[int]) -> tuple[int, int, int]:
        """The outcome triple this coloring assigns to a frame."""
        return tuple(self.value[i] for i in triad)


@dataclass(frozen=True)
class VerifyReport:
    valid: bool
    violation: tuple[str, tuple[int, ...]] | None = None


def verify_coloring(g: OrthoGraph, c: Coloring) -> VerifyReport:
    if len(c) != len(g):
        raise InputError(f"coloring has {len(c)} values for {len(g)} rays")
    for t in g.triads:
        if sum(c[i] == 0 for i in t) != 1:
            return VerifyReport(False, ("triad", t))
    for i, j in g.pairs:
        if c[i] == 0 and c[j] == 0:
            return VerifyReport(False, ("pair", (i, j)))
    return VerifyReport(True)


@dataclass(frozen=True)
class SearchReport:
    colorable: bool
    witness: Coloring | None
    nodes_explored: int
    exhausted: bool
    count: int | None = None


class _Search:
    def __init__(self, g: OrthoGraph, count: bool):
        self.g = g
        self.count_mode = count
        self.n = len(g)
        self.triads_of = [[] for _ in range(self.n)]
        for t in g.triads:
            for i in t:
                self.triads_of[i].append(t)
        self.nodes = 0
        self.count = 0
        self.witness: list[int] | None = None

    def propagate(self, assign: list[int | None], trail: list[int], queue: list[int]) -> bool:
        while queue:
            i = queue.pop()
            if assign[i] == 0:
                for j in self.g.neighbors[i]:
                    if assign[j] == 0:
                        return False
                    if assign[j] is None:
                        assign[j] = 1
                        trail.append(j)
                        queue.append(j)
            for t in self.triads_of[i]:
                vals = [assign[k] for k in t]
                if vals.count(1) == 3:
                    return False
                if vals.count(1) == 2 and None in vals:
                    k = t[vals.index(None)]
                    assign[k] = 0
                    trail.append(k)
                    queue.append(k)
        return True

    def pick(self, assign: list[int | None]) -> int | None:
        best, best_key = None, None
        for i in range(self.n):
            if assign[i] is not None:
                continue
            touched = sum(1 for t in self.triads_of[i] if any(assign[k] is not None for k in t))
            key = (touched, len(self.triads_of[i]), len(self.g.neighbors[i]))
            if best_key is None or key > best_key:
                best, best_key = i, key
        return best

    def run(self, assign: list[int | None]) -> bool:
        """Returns True to stop (witness found in witness mode)."""
        i = self.pick(assign)
        if i is None:
            if self.count_mode:
                self.count += 1
                return False
            self.witness = list(assign)
            return True
        for v in (0, 1):
            self.nodes += 1
            trail = [i]
            assign[i] = v
            if self.propagate(assign, trail, [i]) and self.run(assign):
                return True
            for k in trail:
                assign[k] = None
        return False


def search_coloring(g: OrthoGraph, count: bool = False) -> SearchReport:
    """Complete backtracking search for a coloring.

    Branches on the most constrained open ray (most triads already touched,
    then most triads, then most neighbors; lowest index on ties), trying 0
    before 1. With ``count=True`` the whole tree is walked and every coloring
    is counted.
    """
    s = _Search(g, count)
    assign: list[int | None] = [None] * len(g)
    stopped = s.run(assign)
    if count:
        return SearchReport(s.count > 0, None, s.nodes, True, s.count)
    if stopped:
        witness = Coloring(tuple(s.witness))
        if not verify_coloring(g, witness).valid:
            raise AssertionError("search produced an invalid coloring")
        return SearchReport(True, witness, s.nodes, False)
    return SearchReport(False, None, s.nodes, True)


def brute_force_colorings(g: OrthoGraph) -> list[Coloring]:
    """Every valid coloring by enumerating all 2^n assignments."""
    if len(g) > 20:
        raise InputError("brute force is limited to 20 rays")
    out = []
    for bits in itertools.product((0, 1), repeat=len(g)):
        c = Coloring(bits)
        if verify_coloring(g, c).valid:
            out.append(c)
    return out


def coloring_model(g: OrthoGraph, colorings: Sequence[Coloring], p_z=None) -> FactorizedModel:
    """Spin-one model whose settings are the triad frames and whose hidden value picks a coloring.

    Both wings answer every frame with the outcome the chosen coloring assigns.
    """
    frames = g.frames()
    if not frames:
        raise InputError("the ray set contains no complete frame")
    responses = tuple(tuple(c.outcome(t) for c in colorings) for t in g.triads)
    return FactorizedModel(
        "spin1", tuple(frames), tuple(frames), tuple(range(len(colorings))), responses, responses, p_z=p_z
    )


@dataclass(frozen=True)
class ObstructionReport:
    model_exists: bool
    status: str
    colorings: tuple[Coloring, ...] = ()
    search: SearchReport | None = None
    failure: dict | None = field(default=None, hash=False)
    uncovered: tuple[int, ...] = ()


def frame_function_obstruction(rays: RaySet, model: FactorizedModel | None = None) -> ObstructionReport:
    """Derive a frame function from a model, or show that none can exist.

    Without a model: search for a coloring; if none exists, no deterministic
    model with Parameter Independence, Freedom and perfect correlation can be
    defined on these frames.

    With a spin-one model whose settings cover every triad frame: check
    perfect correlation, read off a per-ray value for each hidden value
    (``F~(ray, z)``), and verify it is a coloring. The first failure is
    returned as the contradiction witness.
    """
    g = orthogonality_graph(rays)
    if model is None:
        rep = search_coloring(g)
        if rep.colorable:
            return ObstructionReport(True, "model exists", (rep.witness,), rep)
        return ObstructionReport(False, "no model exists", (), rep)

    if model.variant != "spin1":
        raise InputError("frame-function analysis needs a spin-one model")
    settings = list(model.settings_a) + list(model.settings_b)
    for t in g.triads:
        if not any(_same_frame(g, t, s) for s in settings):
            raise InputError(f"model settings do not cover the frame of triad {t}")

    pc = check_perfect_correlation(model)
    if not pc.holds:
        return ObstructionReport(False, "perfect correlation fails", failure={"check": "perfect correlation", **pc.witness})

    colorings = []
    uncovered: set[int] = set()
    for iz, z in enumerate(model.z):
        values: dict[int, int] = {}
        sides = ((model.settings_a, model.response_f), (model.settings_b, model.response_g))
        for frames, responses in sides:
            for k, frame in enumerate(frames):
                outcome = responses[k][iz]
                for slot, ray in enumerate(frame.rays):
                    idx = rays.index(ray)
                    if idx is None:
                        continue
                    prev = values.setdefault(idx, outcome[slot])
                    if prev != outcome[slot]:
                        return ObstructionReport(
                            False,
                            "not a frame function",
                            failure={"check": "frame function", "z": z, "ray": idx},
                        )
        missing = [i for i in range(len(rays)) if i not in values]
        uncovered.update(missing)
        # rays outside every setting frame sit in no triad, so 1 is always safe
        c = Coloring(tuple(values.get(i, 1) for i in range(len(rays))))
        check = verify_coloring(g, c)
        if not check.valid:
            kind, where = check.violation
            return ObstructionReport(
                False, "not a coloring", failure={"check": kind, "z": z, "rays": list(where)}
            )
        colorings.append(c)
    return ObstructionReport(True, "model consistent", tuple(colorings), uncovered=tuple(sorted(uncovered)))


def _same_frame(g: OrthoGraph, triad: Sequence[int], frame: Frame) -> bool:
    return all(frame.position(g.rays[i]) is not None for i in triad)

