"""Epsilon-greedy walk over symmetry points with stochastic design generators."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Protocol, Union

import numpy as np

from symmorph.design import (
    AttributeAction,
    DesignGraph,
    OrbitUndefinedError,
    SkeletonAction,
    apply_skeleton_actions,
    design_to_dict,
    initial_design,
    orbits,
)
from symmorph.group import (
    ConfigurationError,
    Pure,
    Subgroup,
    SubgroupLattice,
    SymmetryPoint,
    lattice_for,
    neighbors,
    perm_rep,
    sorted_points,
    subgroup_from_label,
    trivial_subgroup,
)
from symmorph.maps import delta_skel, project_vectors, symmetrize_design

# spawn-key streams of the master seed
_GENERATE, _EVALUATE, _STEP = 0, 1, 2


class SearchError(RuntimeError):
    def __init__(self, iteration: int, message: str):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class RandomRollout:
    p_add: float = 0.4
    p_del: float = 0.1
    scalar_sigma: float = 0.5
    vector_sigma: float = 0.5


@dataclass(frozen=True)
class HillClimb:
    """Random rollout followed by ``population`` symmetrized attribute mutations, keeping improvements."""

    population: int = 8
    mutation_sigma: float = 0.1
    p_add: float = 0.4
    p_del: float = 0.1
    scalar_sigma: float = 0.5
    vector_sigma: float = 0.5


Generator = Union[RandomRollout, HillClimb]

_GENERATORS = {"random_rollout": RandomRollout, "hill_climb": HillClimb}


@dataclass(frozen=True)
class SearchConfig:
    n: int = 4
    K: int = 3
    epsilon: float = 0.01
    iterations: int = 100
    batch_size: int = 16
    N_skel: int = 5
    N_attr: int = 1
    generator: Generator = field(default_factory=RandomRollout)
    seed: int = 0
    scalar_names: tuple[str, ...] = ("motor", "size")
    workers: int = 1

    def __post_init__(self):
        if self.n < 3:
            raise ConfigurationError(f"n must be >= 3, got {self.n}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.K < 1 or self.N_skel < 1 or self.N_attr < 1:
            raise ConfigurationError("K, N_skel and N_attr must all be >= 1")
        if self.iterations < 0 or self.batch_size < 1:
            raise ConfigurationError("iterations must be >= 0 and batch_size >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")
        g = self.generator
        if g.p_add < 0 or g.p_del < 0 or g.p_add + g.p_del > 1:
            raise ConfigurationError("need p_add, p_del >= 0 and p_add + p_del <= 1")
        object.__setattr__(self, "scalar_names", tuple(sorted(self.scalar_names)))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchConfig":
        data = dict(data)
        data.pop("oracle", None)
        gen = dict(data.pop("generator", {}) or {})
        kind = gen.pop("type", "random_rollout")
        if kind not in _GENERATORS:
            raise ConfigurationError(f"unknown generator type {kind!r}")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        try:
            generator = _GENERATORS[kind](**gen)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None
        if "scalar_names" in data:
            data["scalar_names"] = tuple(data["scalar_names"])
        return cls(generator=generator, **data)

    def to_dict(self) -> dict:
        out = asdict(self)
        kind = next(k for k, v in _GENERATORS.items() if isinstance(self.generator, v))
        out["generator"] = {"type": kind, **asdict(self.generator)}
        out["scalar_names"] = list(self.scalar_names)
        out.pop("workers")
        return out


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


# --------------------------------------------------------------------------
# oracles


class FitnessOracle(Protocol):
    def evaluate(self, design: DesignGraph, rng: np.random.Generator) -> float: ...


def structural_asymmetry(design: DesignGraph, G: Subgroup, tol: float = 1e-9) -> int:
    """Count orbit-mate pairs with different child counts or scalar attributes.

    Children are matched by sibling index up to the shorter list, so the
    count is defined even when the skeleton does not admit ``G``.
    """
    bad: set[frozenset] = set()
    kids = design.children
    for g in G:
        if g.is_identity:
            continue
        p = perm_rep(g)
        queue = [(i + 1, p[i] + 1) for i in range(design.n)]
        while queue:
            v, u = queue.pop()
            if v == u:
                continue
            a, b = design.by_id[v], design.by_id[u]
            if len(kids[v]) != len(kids[u]) or abs(a.z - b.z) > tol or any(
                abs(a.scalars[k] - b.scalars[k]) > tol for k in design.scalar_names
            ):
                bad.add(frozenset((v, u)))
            queue.extend(zip(kids[v], kids[u]))
    return len(bad)


@dataclass(frozen=True)
class PlantedSymmetryOracle:
    """Fitness peaks (at zero, before noise) exactly on ``g_star``-symmetric designs."""

    g_star: Subgroup
    lambda_struct: float = 1.0
    noise_sigma: float = 0.0
    tol: float = 1e-9

    def evaluate(self, design: DesignGraph, rng: np.random.Generator) -> float:
        c = design.coordinates()
        try:
            residual = float(np.linalg.norm(c - project_vectors(c, self.g_star, design)))
        except OrbitUndefinedError:
            # the projection is an orthogonal projector, so |c| bounds the residual
            residual = float(np.linalg.norm(c))
        penalty = structural_asymmetry(design, self.g_star, self.tol)
        noise = self.noise_sigma * float(rng.standard_normal()) if self.noise_sigma else 0.0
        return -residual - self.lambda_struct * penalty + noise


def planted_symmetry_oracle(G_star: Subgroup, lambda_struct: float = 1.0, noise_sigma: float = 0.0) -> PlantedSymmetryOracle:
    return PlantedSymmetryOracle(G_star, lambda_struct, noise_sigma)


def oracle_from_dict(data: Mapping[str, Any], n: int) -> FitnessOracle:
    data = dict(data)
    kind = data.pop("type", "planted")
    if kind != "planted":
        raise ConfigurationError(f"unknown oracle type {kind!r}")
    try:
        g_star = subgroup_from_label(str(data.pop("g_star")), n)
    except KeyError:
        raise ConfigurationError("planted oracle needs 'g_star'") from None
    return PlantedSymmetryOracle(g_star, float(data.pop("lambda_struct", 1.0)), float(data.pop("noise_sigma", 0.0)))


def oracle_to_dict(oracle: FitnessOracle) -> dict:
    if isinstance(oracle, PlantedSymmetryOracle):
        return {
            "type": "planted",
            "g_star": oracle.g_star.label,
            "lambda_struct": oracle.lambda_struct,
            "noise_sigma": oracle.noise_sigma,
        }
    return {"type": type(oracle).__name__}


# --------------------------------------------------------------------------
# design generation


def _skeleton_proposals(design: DesignGraph, gen: Generator, rng: np.random.Generator) -> dict[int, SkeletonAction]:
    u = rng.random(len(design))
    kids = design.children
    out = {}
    for x, j in zip(u, design.joints):
        if x < gen.p_add:
            act = SkeletonAction.ADD
        elif x < gen.p_add + gen.p_del and j.parent is not None and not kids[j.id]:
            act = SkeletonAction.DEL
        else:
            act = SkeletonAction.NONE
        out[j.id] = act
    return out


def _attribute_proposals(design: DesignGraph, names, scalar_sigma, vector_sigma, rng, base=None):
    m = len(design)
    sc = rng.normal(0.0, scalar_sigma, size=(m, len(names)))
    vec = rng.normal(0.0, vector_sigma, size=(m, 2))
    out = {}
    for i, j in enumerate(design.joints):
        s = {k: float(sc[i, a]) for a, k in enumerate(names)}
        v = (float(vec[i, 0]), float(vec[i, 1]))
        if base is not None:
            s = {k: j.scalars[k] + s[k] for k in names}
            v = (j.vector[0] + v[0], j.vector[1] + v[1])
        out[j.id] = AttributeAction(s, v)
    return out


def _rollout(point: SymmetryPoint, config: SearchConfig, rng: np.random.Generator) -> DesignGraph:
    gen = config.generator
    design = initial_design(config.n, config.scalar_names)
    G = point.governing
    for _ in range(config.N_skel):
        partition = orbits(design, G)
        proposals = _skeleton_proposals(design, gen, rng)
        design = apply_skeleton_actions(design, delta_skel(proposals, partition))
    for _ in range(config.N_attr):
        proposals = _attribute_proposals(design, config.scalar_names, gen.scalar_sigma, gen.vector_sigma, rng)
        design = symmetrize_design(design, point, attribute_actions=proposals, phase="attribute")
    return design


def generate_design(
    point: SymmetryPoint,
    config: SearchConfig,
    rng: np.random.Generator,
    oracle: FitnessOracle | None = None,
) -> DesignGraph:
    """One design-stage episode at ``point``; the result is symmetric for ``point.governing``."""
    design = _rollout(point, config, rng)
    gen = config.generator
    if isinstance(gen, HillClimb):
        if oracle is None:
            raise ConfigurationError("the hill-climb generator needs a fitness oracle")
        best = oracle.evaluate(design, rng)
        for _ in range(gen.population):
            proposals = _attribute_proposals(
                design, config.scalar_names, gen.mutation_sigma, gen.mutation_sigma, rng, base=design
            )
            cand = symmetrize_design(design, point, attribute_actions=proposals, phase="attribute")
            f = oracle.evaluate(cand, rng)
            if f > best:
                design, best = cand, f
    return design


# --------------------------------------------------------------------------
# search loop


def epsilon_greedy_step(
    current: SymmetryPoint,
    values: Mapping[SymmetryPoint, float],
    lattice: SubgroupLattice,
    K: int,
    epsilon: float,
    rng: np.random.Generator,
) -> SymmetryPoint:
    options = sorted_points(neighbors(current, lattice, K))
    if rng.random() < epsilon:
        return options[int(rng.integers(len(options)))]
    scores = [values.get(p, 0.0) for p in options]
    best = max(scores)
    tied = [p for p, s in zip(options, scores) if s == best]
    return tied[int(rng.integers(len(tied)))]


@dataclass
class IterationRecord:
    iteration: int
    point: SymmetryPoint
    mean_fitness: float
    best_fitness: float
    best_design: DesignGraph

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "point": self.point.label,
            "nearest_subgroup": self.point.nearest_subgroup().label,
            "mean_fitness": self.mean_fitness,
            "best_fitness": self.best_fitness,
            "best_design": design_to_dict(self.best_design),
        }


@dataclass
class SearchResult:
    trajectory: list[IterationRecord]
    final_point: SymmetryPoint
    final_value_dict: dict[SymmetryPoint, float]

    def to_dict(self, config: SearchConfig | None = None, oracle: FitnessOracle | None = None) -> dict:
        out = {
            "trajectory": [r.to_dict() for r in self.trajectory],
            "final_point": self.final_point.label,
            "final_nearest_subgroup": self.final_point.nearest_subgroup().label,
            "final_value_dict": {p.label: v for p, v in self.final_value_dict.items()},
        }
        if config is not None:
            out["config"] = config.to_dict()
        if oracle is not None:
            out["oracle"] = oracle_to_dict(oracle)
        return out


def mean(values) -> float:
    return math.fsum(values) / len(values)


def _episode(args) -> tuple[DesignGraph, float]:
    point, config, oracle, it, ep = args
    design = generate_design(point, config, substream(config.seed, _GENERATE, it, ep), oracle)
    return design, float(oracle.evaluate(design, substream(config.seed, _EVALUATE, it, ep)))


def run_search(config: SearchConfig, oracle: FitnessOracle, workers: int | None = None) -> SearchResult:
    """Walk the symmetry points starting from the trivial subgroup.

    Each iteration evaluates ``batch_size`` designs at the current point,
    overwrites that point's value with the batch mean and takes one
    epsilon-greedy step.  Every episode draws from its own sub-stream of the
    seed, so results do not depend on ``workers``.
    """
    workers = config.workers if workers is None else workers
    lattice = lattice_for(config.n)
    current: SymmetryPoint = Pure(trivial_subgroup(config.n))
    values: dict[SymmetryPoint, float] = {}
    trajectory: list[IterationRecord] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for it in range(config.iterations):
            jobs = [(current, config, oracle, it, ep) for ep in range(config.batch_size)]
            try:
                results = list(pool.map(_episode, jobs)) if pool else [_episode(j) for j in jobs]
            except (ConfigurationError, SearchError):
                raise
            except Exception as exc:
                raise SearchError(it, f"{type(exc).__name__}: {exc}") from exc
            fits = [f for _, f in results]
            best_idx = max(range(len(fits)), key=lambda i: fits[i])
            values[current] = mean(fits)
            trajectory.append(IterationRecord(it, current, values[current], fits[best_idx], results[best_idx][0]))
            current = epsilon_greedy_step(current, values, lattice, config.K, config.epsilon, substream(config.seed, _STEP, it))
    finally:
        if pool is not None:
            pool.shutdown()
    ordered = {p: values[p] for p in sorted_points(values)}
    return SearchResult(trajectory, current, ordered)
