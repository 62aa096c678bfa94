"""Self-verification suite: group laws, projection theorems, lattice counts."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from symmorph.design import (
    AttributeAction,
    DesignGraph,
    SkeletonAction,
    apply_attribute_actions,
    apply_skeleton_actions,
    initial_design,
    orbits,
)
from symmorph.group import (
    DihedralElement,
    Interpolated,
    Subgroup,
    compose,
    divisors,
    enumerate_subgroups,
    group_elements,
    inverse,
    lattice_for,
    matrix_rep,
    perm_rep,
    subgroup_count,
)
from symmorph.maps import (
    act,
    blend_projection,
    decomposition_check,
    delta_skel,
    project_vectors,
    project_vectors_interpolated,
    symmetric_residual,
)

ALGEBRAIC_TOL = 1e-12
SYMMETRY_TOL = 1e-9


def random_compatible_design(
    n: int,
    G: Subgroup,
    rng: np.random.Generator,
    steps: int = 2,
    p_add: float = 0.5,
    p_del: float = 0.1,
    scalar_names=("motor",),
) -> DesignGraph:
    """A multi-layer design whose skeleton admits ``G``, with unconstrained random attributes."""
    design = initial_design(n, scalar_names)
    for _ in range(steps):
        kids = design.children
        acts = {}
        for j, x in zip(design.joints, rng.random(len(design))):
            if x < p_add:
                acts[j.id] = SkeletonAction.ADD
            elif x < p_add + p_del and j.parent is not None and not kids[j.id]:
                acts[j.id] = SkeletonAction.DEL
            else:
                acts[j.id] = SkeletonAction.NONE
        design = apply_skeleton_actions(design, delta_skel(acts, orbits(design, G)))
    attrs = {
        j.id: AttributeAction(
            {k: float(v) for k, v in zip(design.scalar_names, rng.normal(size=len(design.scalar_names)))},
            tuple(float(v) for v in rng.normal(size=2)),
        )
        for j in design.joints
    }
    return apply_attribute_actions(design, attrs)


def brute_force_subgroups(n: int) -> set[frozenset]:
    """Every subset of Dih_n closed under composition (and hence a subgroup)."""
    elems = group_elements(n)
    e = DihedralElement.identity(n)
    rest = [g for g in elems if g != e]
    found = set()
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            s = frozenset(combo) | {e}
            if all(compose(a, b) in s for a in s for b in s):
                found.add(s)
    return found


@dataclass
class Check:
    name: str
    tolerance: float | None = None
    cases: int = 0
    failures: int = 0
    max_residual: float = 0.0
    notes: list[str] = field(default_factory=list)

    def record(self, residual: float, ok: bool | None = None, note: str | None = None) -> None:
        self.cases += 1
        self.max_residual = max(self.max_residual, float(residual))
        if ok is None:
            ok = self.tolerance is None or residual <= self.tolerance
        if not ok:
            self.failures += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "notes": list(self.notes),
        }


def check_group_axioms(ns, exhaustive_max: int = 8, rng=None) -> Check:
    chk = Check("group_axioms")
    rng = rng or np.random.default_rng(0)
    for n in ns:
        elems = group_elements(n)
        e = DihedralElement.identity(n)
        if n <= exhaustive_max:
            triples = itertools.product(elems, repeat=3)
        else:
            idx = rng.integers(len(elems), size=(2000, 3))
            triples = ((elems[a], elems[b], elems[c]) for a, b, c in idx)
        for a, b, c in triples:
            ok = compose(compose(a, b), c) == compose(a, compose(b, c))
            chk.record(0.0 if ok else 1.0, ok, f"associativity fails for {a},{b},{c}")
        for a in elems:
            ok = compose(a, e) == a == compose(e, a) and compose(a, inverse(a)) == e == compose(inverse(a), a)
            chk.record(0.0 if ok else 1.0, ok, f"identity/inverse fails for {a}")
    return chk


def check_representations(ns) -> Check:
    chk = Check("representation_homomorphism", ALGEBRAIC_TOL)
    for n in ns:
        elems = group_elements(n)
        for a, b in itertools.product(elems, repeat=2):
            ab = compose(a, b)
            res = float(np.max(np.abs(matrix_rep(ab) - matrix_rep(a) @ matrix_rep(b))))
            pa, pb, pab = perm_rep(a), perm_rep(b), perm_rep(ab)
            perm_ok = all(pab[i] == pa[pb[i]] for i in range(n))
            chk.record(res, res <= ALGEBRAIC_TOL and perm_ok, f"{a}*{b}")
        for g in elems:
            m, p = matrix_rep(g), perm_rep(g)
            for i in range(n):
                t = 2 * np.pi * i / n
                landed = m @ np.array([np.cos(t), np.sin(t)])
                s = 2 * np.pi * p[i] / n
                res = float(np.max(np.abs(landed - [np.cos(s), np.sin(s)])))
                chk.record(res, res <= SYMMETRY_TOL, f"anchor {i} under {g}")
    return chk


def check_subgroup_counts(ns, brute_force_max: int = 6) -> Check:
    chk = Check("subgroup_enumeration")
    for n in ns:
        subs = enumerate_subgroups(n)
        ok = len(subs) == subgroup_count(n) == sum(1 + d for d in divisors(n))
        ok = ok and len({s.elements for s in subs}) == len(subs)
        chk.record(0.0 if ok else 1.0, ok, f"count mismatch for n={n}")
        if n <= brute_force_max:
            ok = {s.elements for s in subs} == brute_force_subgroups(n)
            chk.record(0.0 if ok else 1.0, ok, f"brute-force mismatch for n={n}")
    return chk


def check_projection_theorem(ns, trials: int, rng: np.random.Generator) -> tuple[Check, Check, Check]:
    inv = Check("projection_invariance", SYMMETRY_TOL)
    idem = Check("projection_idempotence", ALGEBRAIC_TOL)
    fix = Check("projection_fixing", ALGEBRAIC_TOL)
    ns = list(ns)
    for _ in range(trials):
        n = ns[int(rng.integers(len(ns)))]
        subs = enumerate_subgroups(n)
        G = subs[int(rng.integers(len(subs)))]
        design = random_compatible_design(n, G, rng)
        c = design.coordinates()
        p = project_vectors(c, G, design)
        inv.record(symmetric_residual(p, G, design), note=f"n={n} {G.label}")
        pp = project_vectors(p, G, design)
        idem.record(float(np.max(np.abs(pp - p))), note=f"n={n} {G.label}")
        # a symmetric input built independently: orbit sums of M_g c P_{g^-1}
        sym = sum(act(c, g, design) for g in G)
        fixed = project_vectors(sym, G, design)
        fix.record(float(np.max(np.abs(fixed - sym))) / max(1.0, float(np.max(np.abs(sym)))), note=f"n={n} {G.label}")
    return inv, idem, fix


def check_interpolation_theorem(ns, rng: np.random.Generator, Ks=(1, 3, 5)) -> tuple[Check, Check]:
    sym = Check("interpolated_invariance", SYMMETRY_TOL)
    ends = Check("interpolated_endpoints", ALGEBRAIC_TOL)
    for n in ns:
        lattice = lattice_for(n)
        for lo, hi in lattice.sorted_covers():
            design = random_compatible_design(n, hi, rng)
            c = design.coordinates()
            p_lo = project_vectors(c, lo, design)
            p_hi = project_vectors(c, hi, design)
            for K in Ks:
                for j in range(1, K):
                    out = project_vectors_interpolated(c, Interpolated(lo, hi, j, K), design)
                    sym.record(symmetric_residual(out, lo, design), note=f"n={n} {lo.label}<{hi.label} j={j} K={K}")
                beta0 = lo.order / hi.order
                r0 = float(np.max(np.abs(blend_projection(c, lo, hi, beta0, design) - p_hi)))
                r1 = float(np.max(np.abs(blend_projection(c, lo, hi, 1.0, design) - p_lo)))
                ends.record(r0, note=f"j=0 on {lo.label}<{hi.label}")
                ends.record(r1, note=f"j=K on {lo.label}<{hi.label}")
    return sym, ends


def check_decomposition(ns, rng: np.random.Generator, samples: int = 20) -> Check:
    chk = Check("decomposition_identity", SYMMETRY_TOL)
    for n in ns:
        for lo, hi in lattice_for(n).sorted_covers():
            design = random_compatible_design(n, hi, rng)
            for _ in range(samples):
                c = rng.normal(size=(2, len(design)))
                chk.record(decomposition_check(lo, hi, c, design), note=f"n={n} {lo.label}<{hi.label}")
    return chk


def run_verification(n_min: int = 3, n_max: int = 8, trials: int = 1000, seed: int = 0) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    ns = list(range(n_min, n_max + 1))
    checks = [
        check_group_axioms(ns, rng=rng),
        check_representations(ns),
        check_subgroup_counts(ns),
        *check_projection_theorem(ns, trials, rng),
        *check_interpolation_theorem(ns, rng),
        check_decomposition(ns, rng),
    ]
    return {
        "n_min": n_min,
        "n_max": n_max,
        "trials": trials,
        "seed": seed,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
