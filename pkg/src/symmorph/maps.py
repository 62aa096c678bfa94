"""Orbit-constrained action maps and the group-average projections of joint vectors.

For a subgroup ``G`` the projection averages ``M_g c P_{g^-1}`` over ``g in G``:
column ``u`` of each term is ``M_g`` applied to the column of the joint that
``g`` carries onto ``u``.  The result is invariant under every ``g in G`` and
the map is the identity on already-symmetric matrices.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Mapping, TypeVar

import numpy as np

from symmorph.design import (
    AttributeAction,
    DesignGraph,
    OrbitPartition,
    OrbitUndefinedError,
    SkeletonAction,
    apply_attribute_actions,
    apply_skeleton_actions,
    extended_perm,
    orbits,
)
from symmorph.group import (
    DihedralElement,
    GroupError,
    Interpolated,
    Pure,
    Subgroup,
    SymmetryPoint,
    matrix_rep,
)

T = TypeVar("T")


def _broadcast_representative(actions: Mapping[int, T], partition: OrbitPartition) -> dict[int, T]:
    return {v: actions[partition.representative(v)] for v in partition.orbit_of}


def delta_skel(actions: Mapping[int, SkeletonAction], partition: OrbitPartition) -> dict[int, SkeletonAction]:
    """Every joint adopts the skeleton action of its orbit's smallest-id member."""
    return _broadcast_representative(actions, partition)


def delta_attr_scalar(actions: Mapping[int, T], partition: OrbitPartition) -> dict[int, T]:
    """Same broadcast for scalar attribute actions (any per-joint payload works)."""
    return _broadcast_representative(actions, partition)


def _check_shape(c: np.ndarray, design: DesignGraph) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (2, len(design)):
        raise ValueError(f"coordinate matrix must be 2 x {len(design)}, got {c.shape}")
    return c


def _average(c: np.ndarray, elements: Iterable[DihedralElement], design: DesignGraph) -> np.ndarray:
    index = design.index
    ids = design.ids
    out = np.zeros_like(c)
    count = 0
    for g in elements:
        sigma = extended_perm(g, design)
        dest = [index[sigma[v]] for v in ids]
        term = np.empty_like(c)
        term[:, dest] = matrix_rep(g) @ c
        out += term
        count += 1
    return out / count


def project_vectors(c: np.ndarray, G: Subgroup, design: DesignGraph) -> np.ndarray:
    """Group average of ``c`` over ``G``; lands in the ``G``-symmetric set and is idempotent."""
    c = _check_shape(c, design)
    return _average(c, G.sorted_elements, design)


def coset_average(c: np.ndarray, lower: Subgroup, upper: Subgroup, design: DesignGraph) -> np.ndarray:
    """Average over ``upper - lower`` (the elements of ``upper`` outside ``lower``)."""
    c = _check_shape(c, design)
    rest = [g for g in upper.sorted_elements if g not in lower.elements]
    if not rest:
        raise GroupError(f"{upper.label} - {lower.label} is empty")
    return _average(c, rest, design)


def blend_projection(c: np.ndarray, lower: Subgroup, upper: Subgroup, beta: float, design: DesignGraph) -> np.ndarray:
    """``beta * proj_lower(c) + (1 - beta) * coset_average(c)`` for ``lower < upper``."""
    if not lower < upper:
        raise GroupError(f"{lower.label} is not a proper subgroup of {upper.label}")
    return beta * project_vectors(c, lower, design) + (1.0 - beta) * coset_average(c, lower, upper, design)


def project_vectors_interpolated(c: np.ndarray, point: Interpolated, design: DesignGraph) -> np.ndarray:
    return blend_projection(c, point.lower, point.upper, point.beta, design)


def project_point(c: np.ndarray, point: SymmetryPoint, design: DesignGraph) -> np.ndarray:
    if isinstance(point, Pure):
        return project_vectors(c, point.group, design)
    return project_vectors_interpolated(c, point, design)


def decomposition_check(lower: Subgroup, upper: Subgroup, c: np.ndarray, design: DesignGraph) -> float:
    """Max-abs residual of ``proj_upper = b0 proj_lower + (1 - b0) coset_average`` with ``b0 = |lower|/|upper|``."""
    if not lower < upper:
        raise GroupError(f"{lower.label} is not a proper subgroup of {upper.label}")
    beta0 = lower.order / upper.order
    lhs = project_vectors(c, upper, design)
    rhs = blend_projection(c, lower, upper, beta0, design)
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def act(c: np.ndarray, g: DihedralElement, design: DesignGraph) -> np.ndarray:
    """``M_g c P_{g^-1}``: the coordinate matrix of the transformed design."""
    return _average(_check_shape(c, design), [g], design)


def symmetric_residual(c: np.ndarray, G: Subgroup, design: DesignGraph) -> float:
    """Max over ``g in G`` of ``|M_g c P_{g^-1} - c|``; zero iff ``c`` is ``G``-symmetric."""
    c = _check_shape(c, design)
    worst = 0.0
    for g in G.sorted_elements:
        term = act(c, g, design)
        if c.size:
            worst = max(worst, float(np.max(np.abs(term - c))))
    return worst


# --------------------------------------------------------------------------
# design pipeline


def symmetrize_design(
    design: DesignGraph,
    point: SymmetryPoint,
    skeleton_actions: Mapping[int, SkeletonAction] | None = None,
    attribute_actions: Mapping[int, AttributeAction] | None = None,
    phase: str = "skeleton",
) -> DesignGraph:
    """Constrain raw per-joint actions to the point's symmetry and apply them.

    ``phase="skeleton"`` broadcasts orbit-representative skeleton actions;
    ``phase="attribute"`` broadcasts scalars/z and projects the vector actions.
    Orbits always come from the governing (lower) subgroup.  At an
    interpolated point whose skeleton does not admit the upper subgroup the
    vector projection falls back to the lower subgroup's own projection.
    """
    G = point.governing
    partition = orbits(design, G)
    if phase == "skeleton":
        actions = {v: SkeletonAction.NONE for v in design.ids}
        actions.update(skeleton_actions or {})
        return apply_skeleton_actions(design, delta_skel(actions, partition))
    if phase != "attribute":
        raise ValueError(f"unknown phase {phase!r}")

    actions = {
        j.id: AttributeAction(dict(j.scalars), j.vector, j.z) for j in design.joints
    }
    actions.update(attribute_actions or {})
    # a missing z means "keep the current value", which must be resolved before broadcasting
    actions = {
        v: a if a.z is not None else replace(a, z=design.by_id[v].z) for v, a in actions.items()
    }
    shared = delta_attr_scalar(actions, partition)
    c = np.array([actions[v].vector for v in design.ids], dtype=float).T.reshape(2, len(design))
    if isinstance(point, Interpolated):
        try:
            c = project_vectors_interpolated(c, point, design)
        except OrbitUndefinedError:
            c = project_vectors(c, G, design)
    else:
        c = project_vectors(c, G, design)
    final = {
        v: AttributeAction(shared[v].scalars, (c[0, i], c[1, i]), shared[v].z)
        for i, v in enumerate(design.ids)
    }
    return apply_attribute_actions(design, final)


def symmetrize_existing(design: DesignGraph, point: SymmetryPoint) -> DesignGraph:
    """Re-run the attribute phase with the design's own attributes as the actions."""
    return symmetrize_design(design, point, phase="attribute")
