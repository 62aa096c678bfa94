"""Layered joint-tree robot designs and the dihedral action on them."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from symmorph.group import (
    DihedralElement,
    Subgroup,
    UnsupportedOrderError,
    matrix_rep,
    perm_rep,
)

DEFAULT_TOL = 1e-9


class DesignError(ValueError):
    pass


class OrbitUndefinedError(DesignError):
    """The skeleton is not compatible with the group action."""

    def __init__(self, joint_id: int, message: str):
        super().__init__(message)
        self.joint_id = joint_id


class IllegalActionError(DesignError):
    pass


class SchemaError(DesignError):
    pass


class SkeletonAction(enum.Enum):
    ADD = "AddJoint"
    DEL = "DelJoint"
    NONE = "NoChange"


@dataclass(frozen=True)
class AttributeAction:
    scalars: Mapping[str, float] = field(default_factory=dict)
    vector: tuple[float, float] = (0.0, 0.0)
    z: float | None = None


@dataclass(frozen=True)
class Joint:
    id: int
    parent: int | None  # None = attached to the torso
    layer: int
    sibling_index: int
    scalars: Mapping[str, float]
    vector: tuple[float, float] = (0.0, 0.0)
    z: float = 0.0


@dataclass(frozen=True)
class DesignGraph:
    n: int
    joints: tuple[Joint, ...]  # sorted by id
    scalar_names: tuple[str, ...] = ()
    next_id: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.next_id <= self.max_id:
            object.__setattr__(self, "next_id", self.max_id + 1)

    @property
    def max_id(self) -> int:
        return self.joints[-1].id if self.joints else 0

    @cached_property
    def by_id(self) -> dict[int, Joint]:
        return {j.id: j for j in self.joints}

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(j.id for j in self.joints)

    @cached_property
    def index(self) -> dict[int, int]:
        return {jid: i for i, jid in enumerate(self.ids)}

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        kids: dict[int, list[Joint]] = {j.id: [] for j in self.joints}
        for j in self.joints:
            if j.parent is not None:
                kids[j.parent].append(j)
        return {k: tuple(c.id for c in sorted(v, key=lambda c: c.sibling_index)) for k, v in kids.items()}

    @cached_property
    def layer_order(self) -> tuple[int, ...]:
        """Joint ids sorted by (layer, id): parents always precede children."""
        return tuple(j.id for j in sorted(self.joints, key=lambda j: (j.layer, j.id)))

    @property
    def num_layers(self) -> int:
        return max(j.layer for j in self.joints)

    def __len__(self):
        return len(self.joints)

    def coordinates(self) -> np.ndarray:
        """The 2 x |V| coordinate matrix, columns in joint-id order."""
        return np.array([j.vector for j in self.joints], dtype=float).T.reshape(2, len(self.joints))


def initial_design(n: int, scalar_names: Iterable[str] = ()) -> DesignGraph:
    if n < 3:
        raise UnsupportedOrderError(f"designs need n >= 3, got {n}")
    names = tuple(sorted(scalar_names))
    joints = tuple(
        Joint(i + 1, None, 1, i, {s: 0.0 for s in names}) for i in range(n)
    )
    return DesignGraph(n, joints, names, n + 1)


def validate(design: DesignGraph) -> None:
    """Check the structural invariants; raise ``SchemaError`` on violation."""
    n = design.n
    roots = [j for j in design.joints if j.parent is None]
    if [(j.id, j.layer, j.sibling_index) for j in roots] != [(i + 1, 1, i) for i in range(n)]:
        raise SchemaError(f"layer 1 must be joints 1..{n} with sibling_index 0..{n - 1}")
    ids = [j.id for j in design.joints]
    if ids != sorted(set(ids)):
        raise SchemaError("joint ids must be unique and sorted")
    for j in design.joints:
        if set(j.scalars) != set(design.scalar_names):
            raise SchemaError(f"joint {j.id} scalar names {sorted(j.scalars)} != {list(design.scalar_names)}")
        if j.parent is None:
            continue
        parent = design.by_id.get(j.parent)
        if parent is None:
            raise SchemaError(f"joint {j.id} has unknown parent {j.parent}")
        if j.layer != parent.layer + 1:
            raise SchemaError(f"joint {j.id} layer {j.layer} != parent layer + 1")
    for pid, kids in design.children.items():
        sib = [design.by_id[c].sibling_index for c in kids]
        if sib != list(range(len(kids))):
            raise SchemaError(f"children of joint {pid} have non-contiguous sibling indices {sib}")


# --------------------------------------------------------------------------
# group action


def extended_perm(g: DihedralElement, design: DesignGraph) -> dict[int, int]:
    """Joint relabeling induced by ``g``: layer 1 by anchors, deeper layers by sibling index."""
    if g.n != design.n:
        raise DesignError(f"element of Dih_{g.n} applied to a design with n={design.n}")
    p = perm_rep(g)
    sigma = {i + 1: p[i] + 1 for i in range(design.n)}
    kids = design.children
    for v in design.layer_order:
        cv = kids[v]
        if not cv:
            continue
        u = sigma[v]
        cu = kids[u]
        if len(cu) != len(cv):
            raise OrbitUndefinedError(
                v, f"joint {v} has {len(cv)} children but its image {u} under {g.name} has {len(cu)}"
            )
        for a, b in zip(cv, cu):
            sigma[a] = b
    return sigma


def orbit_partition_from_perms(ids: Iterable[int], perms: Iterable[Mapping[int, int]]) -> "OrbitPartition":
    perms = list(perms)
    orbit_of: dict[int, int] = {}
    orbits: list[list[int]] = []
    for v in sorted(ids):
        if v in orbit_of:
            continue
        members = sorted({p[v] for p in perms} | {v})
        for m in members:
            orbit_of[m] = len(orbits)
        orbits.append(members)
    return OrbitPartition(orbit_of, tuple(tuple(o) for o in orbits))


@dataclass(frozen=True)
class OrbitPartition:
    orbit_of: Mapping[int, int]
    orbits: tuple[tuple[int, ...], ...]

    def representative(self, v: int) -> int:
        return self.orbits[self.orbit_of[v]][0]

    def as_sets(self) -> set[frozenset]:
        return {frozenset(o) for o in self.orbits}


def orbits(design: DesignGraph, G: Subgroup) -> OrbitPartition:
    perms = [extended_perm(g, design) for g in G]
    return orbit_partition_from_perms(design.ids, perms)


def transform_design(design: DesignGraph, g: DihedralElement) -> DesignGraph:
    """``D_g``: joint ``sigma(v)`` receives ``v``'s attributes with the vector rotated/reflected."""
    sigma = extended_perm(g, design)
    m = matrix_rep(g)
    src = {u: v for v, u in sigma.items()}
    joints = []
    for j in design.joints:
        s = design.by_id[src[j.id]]
        vec = m @ np.asarray(s.vector, dtype=float)
        joints.append(replace(j, scalars=dict(s.scalars), vector=(float(vec[0]), float(vec[1])), z=s.z))
    return replace(design, joints=tuple(joints))


def is_symmetric(design: DesignGraph, G: Subgroup, tol: float = DEFAULT_TOL) -> bool:
    for g in G:
        if g.is_identity:
            continue
        try:
            sigma = extended_perm(g, design)
        except OrbitUndefinedError:
            return False
        m = matrix_rep(g)
        for v, u in sigma.items():
            a, b = design.by_id[v], design.by_id[u]
            if abs(a.z - b.z) > tol:
                return False
            if any(abs(a.scalars[k] - b.scalars[k]) > tol for k in design.scalar_names):
                return False
            x = m[0, 0] * a.vector[0] + m[0, 1] * a.vector[1]
            y = m[1, 0] * a.vector[0] + m[1, 1] * a.vector[1]
            if abs(x - b.vector[0]) > tol or abs(y - b.vector[1]) > tol:
                return False
    return True


def designs_equal(a: DesignGraph, b: DesignGraph, tol: float = 0.0) -> bool:
    """Same skeleton and ids; attributes equal within ``tol``."""
    if a.n != b.n or a.scalar_names != b.scalar_names or a.ids != b.ids:
        return False
    for x, y in zip(a.joints, b.joints):
        if (x.parent, x.layer, x.sibling_index) != (y.parent, y.layer, y.sibling_index):
            return False
        vals_x = [x.z, *x.vector, *(x.scalars[k] for k in a.scalar_names)]
        vals_y = [y.z, *y.vector, *(y.scalars[k] for k in a.scalar_names)]
        if any(abs(p - q) > tol for p, q in zip(vals_x, vals_y)):
            return False
    return True


# --------------------------------------------------------------------------
# edits


def apply_skeleton_actions(design: DesignGraph, actions: Mapping[int, SkeletonAction]) -> DesignGraph:
    """Apply one simultaneous skeleton step. Joints missing from ``actions`` do nothing."""
    unknown = set(actions) - set(design.by_id)
    if unknown:
        raise IllegalActionError(f"actions for unknown joints {sorted(unknown)}")
    kids = design.children
    deleted = set()
    added = []
    for jid in design.ids:
        act = SkeletonAction(actions.get(jid, SkeletonAction.NONE))
        if act is SkeletonAction.DEL:
            j = design.by_id[jid]
            if j.parent is None:
                raise IllegalActionError(f"joint {jid} is attached to the torso and cannot be deleted")
            if kids[jid]:
                raise IllegalActionError(f"joint {jid} has children and cannot be deleted")
            deleted.add(jid)
        elif act is SkeletonAction.ADD:
            added.append(jid)
    if not deleted and not added:
        return design

    new_sib: dict[int, int] = {}
    count: dict[int, int] = {}
    for pid in design.ids:
        k = 0
        for c in kids[pid]:
            if c not in deleted:
                new_sib[c] = k
                k += 1
        count[pid] = k
    joints = []
    for j in design.joints:
        if j.id in deleted:
            continue
        if j.parent is not None and new_sib[j.id] != j.sibling_index:
            j = replace(j, sibling_index=new_sib[j.id])
        joints.append(j)
    next_id = design.next_id
    zero = {s: 0.0 for s in design.scalar_names}
    for pid in added:
        parent = design.by_id[pid]
        joints.append(Joint(next_id, pid, parent.layer + 1, count[pid], dict(zero)))
        count[pid] += 1
        next_id += 1
    return DesignGraph(design.n, tuple(joints), design.scalar_names, next_id)


def apply_attribute_actions(design: DesignGraph, actions: Mapping[int, AttributeAction]) -> DesignGraph:
    """Overwrite attributes per joint; joints missing from ``actions`` keep theirs."""
    names = set(design.scalar_names)
    joints = []
    for j in design.joints:
        act = actions.get(j.id)
        if act is None:
            joints.append(j)
            continue
        bad = set(act.scalars) - names
        if bad:
            raise SchemaError(f"unknown scalar attributes {sorted(bad)}; declared {sorted(names)}")
        scalars = dict(j.scalars)
        scalars.update({k: float(v) for k, v in act.scalars.items()})
        joints.append(
            replace(
                j,
                scalars=scalars,
                vector=(float(act.vector[0]), float(act.vector[1])),
                z=j.z if act.z is None else float(act.z),
            )
        )
    unknown = set(actions) - set(design.by_id)
    if unknown:
        raise SchemaError(f"attribute actions for unknown joints {sorted(unknown)}")
    return replace(design, joints=tuple(joints))


def with_coordinates(design: DesignGraph, c: np.ndarray) -> DesignGraph:
    c = np.asarray(c, dtype=float)
    joints = tuple(
        replace(j, vector=(float(c[0, i]), float(c[1, i]))) for i, j in enumerate(design.joints)
    )
    return replace(design, joints=joints)


# --------------------------------------------------------------------------
# JSON


def fmt_float(x: float) -> str:
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite value {x} cannot be serialized")
    return format(x, ".17g")


def canonical_json(obj, indent: int = 2) -> str:
    """Sorted keys, floats at 17 significant digits, stable bytes."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj, level: int, indent: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(obj[k], level + 1, indent)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_dump(x, level + 1, indent) for x in obj) + "]"
        items = [pad + _dump(x, level + 1, indent) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def design_to_dict(design: DesignGraph) -> dict:
    return {
        "n": design.n,
        "joints": [
            {
                "id": j.id,
                "parent": "torso" if j.parent is None else j.parent,
                "layer": j.layer,
                "sibling_index": j.sibling_index,
                "scalars": {k: float(v) for k, v in j.scalars.items()},
                "vector": [float(j.vector[0]), float(j.vector[1])],
                "z": float(j.z),
            }
            for j in design.joints
        ],
    }


def design_from_dict(data: Mapping) -> DesignGraph:
    try:
        n = int(data["n"])
        raw = sorted(data["joints"], key=lambda r: int(r["id"]))
        joints = []
        for r in raw:
            parent = r["parent"]
            vec = r.get("vector", [0.0, 0.0])
            if len(vec) != 2:
                raise SchemaError(f"joint {r['id']}: vector must have two entries")
            joints.append(
                Joint(
                    int(r["id"]),
                    None if parent == "torso" else int(parent),
                    int(r["layer"]),
                    int(r["sibling_index"]),
                    {str(k): float(v) for k, v in r.get("scalars", {}).items()},
                    (float(vec[0]), float(vec[1])),
                    float(r.get("z", 0.0)),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed design JSON: {exc}") from exc
    if n < 3:
        raise SchemaError(f"design n must be >= 3, got {n}")
    names = tuple(sorted(joints[0].scalars)) if joints else ()
    design = DesignGraph(n, tuple(joints), names)
    validate(design)
    return design


def design_to_json(design: DesignGraph) -> str:
    return canonical_json(design_to_dict(design))


def design_from_json(text: str) -> DesignGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return design_from_dict(data)
