"""Dihedral group algebra, subgroup classification and the subgroup lattice.

Elements of ``Dih_n`` are written ``rho_k`` (counterclockwise rotation by
``2*pi*k/n``) and ``pi_k = rho^k pi`` (reflection about the line at angle
``pi*k/n``).  ``compose(a, b)`` is the product ``a*b``: apply ``b`` first,
then ``a``, so that ``matrix_rep(compose(a, b)) == matrix_rep(a) @ matrix_rep(b)``.

Anchor/joint ``i`` (0-indexed here, ``v_{i+1}`` in 1-indexed joint ids) sits
at angle ``2*pi*i/n``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Union

import numpy as np


class GroupError(ValueError):
    pass


class OrderMismatchError(GroupError):
    pass


class UnsupportedOrderError(GroupError):
    pass


class LatticeError(GroupError):
    pass


class ConfigurationError(GroupError):
    pass


class LabelError(GroupError):
    pass


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise UnsupportedOrderError(f"Dih_n requires n >= 3, got {n!r}")


@dataclass(frozen=True, order=True)
class DihedralElement:
    n: int
    reflection: bool
    k: int

    def __post_init__(self):
        _check_order(self.n)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "reflection", bool(self.reflection))
        object.__setattr__(self, "k", int(self.k) % self.n)

    @classmethod
    def rotation(cls, n: int, k: int) -> "DihedralElement":
        return cls(n, False, k)

    @classmethod
    def reflect(cls, n: int, k: int) -> "DihedralElement":
        return cls(n, True, k)

    @classmethod
    def identity(cls, n: int) -> "DihedralElement":
        return cls(n, False, 0)

    @property
    def is_identity(self) -> bool:
        return not self.reflection and self.k == 0

    @property
    def name(self) -> str:
        return f"{'p' if self.reflection else 'r'}{self.k}"

    def __repr__(self):
        return f"{self.name}[n={self.n}]"

    def __mul__(self, other: "DihedralElement") -> "DihedralElement":
        return compose(self, other)


def compose(a: DihedralElement, b: DihedralElement) -> DihedralElement:
    """Group product ``a*b`` (``b`` acts first)."""
    if a.n != b.n:
        raise OrderMismatchError(f"cannot compose elements of Dih_{a.n} and Dih_{b.n}")
    if a.reflection:
        # pi_a rho_b = pi_{a-b};  pi_a pi_b = rho_{a-b}
        return DihedralElement(a.n, not b.reflection, a.k - b.k)
    # rho_a rho_b = rho_{a+b};  rho_a pi_b = pi_{a+b}
    return DihedralElement(a.n, b.reflection, a.k + b.k)


def inverse(g: DihedralElement) -> DihedralElement:
    if g.reflection:
        return g
    return DihedralElement(g.n, False, -g.k)


def group_elements(n: int) -> list[DihedralElement]:
    """All ``2n`` elements, rotations first."""
    _check_order(n)
    return [DihedralElement(n, r, k) for r in (False, True) for k in range(n)]


@lru_cache(maxsize=None)
def matrix_rep(g: DihedralElement) -> np.ndarray:
    """2x2 orthogonal matrix of ``g``; exact 0/+-1 entries where the angle allows."""
    if g.reflection:
        # reflection about the line at angle pi*k/n
        c, s = _cos_sin(g.k, g.n)
        m = np.array([[c, s], [s, -c]])
    else:
        c, s = _cos_sin(g.k, g.n)
        m = np.array([[c, -s], [s, c]])
    m.setflags(write=False)
    return m


def _cos_sin(num: int, den: int) -> tuple[float, float]:
    # cos/sin of 2*pi*num/den, snapped to exact values on the quarter turns
    frac = Fraction(num, den) % 1
    exact = {Fraction(0): (1.0, 0.0), Fraction(1, 4): (0.0, 1.0),
             Fraction(1, 2): (-1.0, 0.0), Fraction(3, 4): (0.0, -1.0)}
    if frac in exact:
        return exact[frac]
    angle = 2 * math.pi * float(frac)
    return math.cos(angle), math.sin(angle)


@lru_cache(maxsize=None)
def perm_rep(g: DihedralElement) -> tuple[int, ...]:
    """Image of each anchor under ``g``: ``perm_rep(g)[i]`` is where anchor ``i`` lands."""
    if g.reflection:
        return tuple((g.k - i) % g.n for i in range(g.n))
    return tuple((i + g.k) % g.n for i in range(g.n))


def perm_matrix(g: DihedralElement) -> np.ndarray:
    """Permutation matrix with ``P[perm(j), j] = 1``, so ``P_a @ P_b == P_{a*b}``."""
    p = perm_rep(g)
    out = np.zeros((g.n, g.n), dtype=int)
    out[list(p), list(range(g.n))] = 1
    return out


def perm_cycles(perm: Iterable[int]) -> str:
    """1-indexed cycle notation including fixed points, e.g. ``(1)(2 4)(3)``."""
    perm = list(perm)
    seen, parts = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        cycle, i = [], start
        while i not in seen:
            seen.add(i)
            cycle.append(str(i + 1))
            i = perm[i]
        parts.append("(" + " ".join(cycle) + ")")
    return "".join(parts)


# --------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class Subgroup:
    n: int
    elements: frozenset
    label: str  # machine grammar: H4, K0, H2.0

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def display(self) -> str:
        kind, nums = _parse_label_parts(self.label)
        if len(nums) == 2:
            return f"H_{{{nums[0]},{nums[1]}}}"
        return f"{kind}_{nums[0]}"

    @cached_property
    def sorted_elements(self) -> tuple[DihedralElement, ...]:
        return tuple(sorted(self.elements))

    @property
    def sort_key(self) -> tuple:
        kind, nums = _parse_label_parts(self.label)
        return (self.order, kind, len(nums), nums)

    def __contains__(self, g) -> bool:
        return g in self.elements

    def __iter__(self):
        return iter(self.sorted_elements)

    def __len__(self):
        return len(self.elements)

    def __lt__(self, other: "Subgroup") -> bool:
        return self.n == other.n and self.elements < other.elements

    def __le__(self, other: "Subgroup") -> bool:
        return self.n == other.n and self.elements <= other.elements

    def __repr__(self):
        return f"Subgroup({self.label}, n={self.n})"

    def listing(self) -> str:
        return f"{self.label} := {{{','.join(g.name for g in self.sorted_elements)}}}"


_LABEL_RE = re.compile(r"^(H|K)(\d+)(?:\.(\d+))?$")


def _parse_label_parts(label: str) -> tuple[str, tuple[int, ...]]:
    m = _LABEL_RE.match(label)
    if m is None:
        raise LabelError(f"malformed subgroup label {label!r}")
    kind, a, b = m.groups()
    if kind == "K" and b is not None:
        raise LabelError(f"malformed subgroup label {label!r}")
    nums = (int(a),) if b is None else (int(a), int(b))
    return kind, nums


def classify(n: int, elements: Iterable[DihedralElement]) -> str:
    """Canonical label of a closed element set.

    Rotations of a subgroup are the multiples of some ``d | n``; its
    reflections (if any) are ``pi_{l + m d}`` with ``0 <= l < d``.
    ``H_{n,l}`` coincides with ``K_l`` and is always labelled ``K``.
    """
    rot = [g.k for g in elements if not g.reflection]
    ref = [g.k for g in elements if g.reflection]
    d = n
    for k in rot:
        d = math.gcd(d, k)
    if not ref:
        return f"H{d}"
    l = min(ref)
    if d == n:
        return f"K{l}"
    return f"H{d}.{l}"


def _closure(n: int, generators: Iterable[DihedralElement]) -> frozenset:
    gens = list(generators)
    e = DihedralElement.identity(n)
    found = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = compose(x, s)
                if y not in found:
                    found.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(found)


def generate_subgroup(generators: Iterable[DihedralElement], n: int | None = None) -> Subgroup:
    """Smallest subgroup containing ``generators`` (``n`` is needed when empty)."""
    gens = list(generators)
    ns = {g.n for g in gens}
    if n is not None:
        ns.add(n)
    if len(ns) > 1:
        raise OrderMismatchError(f"generators from different groups: n in {sorted(ns)}")
    if not ns:
        raise ValueError("n is required for an empty generating set")
    (n,) = ns
    _check_order(n)
    elements = _closure(n, gens)
    return Subgroup(n, elements, classify(n, elements))


def canonical_generators(label: str, n: int) -> list[DihedralElement]:
    kind, nums = _parse_label_parts(label)
    if kind == "K":
        (i,) = nums
        if not 0 <= i < n:
            raise LabelError(f"K_i needs 0 <= i < {n}, got {label!r}")
        return [DihedralElement.reflect(n, i)]
    d = nums[0]
    if d < 1 or n % d:
        raise LabelError(f"{label!r}: {d} does not divide {n}")
    if len(nums) == 1:
        return [DihedralElement.rotation(n, d)]
    l = nums[1]
    if not 0 <= l < d:
        raise LabelError(f"{label!r}: need 0 <= l < k")
    return [DihedralElement.rotation(n, d), DihedralElement.reflect(n, l)]


def subgroup_from_label(label: str, n: int) -> Subgroup:
    _check_order(n)
    return generate_subgroup(canonical_generators(label, n), n)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def subgroup_count(n: int) -> int:
    return sum(1 + d for d in divisors(n))


def trivial_subgroup(n: int) -> Subgroup:
    return generate_subgroup([], n)


def full_group(n: int) -> Subgroup:
    return subgroup_from_label("H1.0", n)


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[Subgroup, ...]:
    labels = []
    for d in divisors(n):
        labels.append(f"H{d}")
        labels.extend(f"K{l}" if d == n else f"H{d}.{l}" for l in range(d))
    groups = [subgroup_from_label(lab, n) for lab in labels]
    return tuple(sorted(groups, key=lambda s: s.sort_key))


def enumerate_subgroups(n: int) -> list[Subgroup]:
    """All subgroups of ``Dih_n``, ordered by size then label."""
    _check_order(n)
    return list(_enumerate(n))


# --------------------------------------------------------------------------
# lattice


@dataclass(frozen=True)
class SubgroupLattice:
    n: int
    nodes: tuple[Subgroup, ...]
    covers: frozenset  # of (lower, upper)

    @cached_property
    def _by_label(self) -> dict[str, Subgroup]:
        return {s.label: s for s in self.nodes}

    def __getitem__(self, label: str) -> Subgroup:
        try:
            return self._by_label[label]
        except KeyError:
            raise LabelError(f"no subgroup {label!r} in Dih_{self.n}") from None

    @cached_property
    def _up(self) -> dict[Subgroup, tuple[Subgroup, ...]]:
        up = {s: [] for s in self.nodes}
        for lo, hi in self.covers:
            up[lo].append(hi)
        return {s: tuple(sorted(v, key=lambda x: x.sort_key)) for s, v in up.items()}

    @cached_property
    def _down(self) -> dict[Subgroup, tuple[Subgroup, ...]]:
        down = {s: [] for s in self.nodes}
        for lo, hi in self.covers:
            down[hi].append(lo)
        return {s: tuple(sorted(v, key=lambda x: x.sort_key)) for s, v in down.items()}

    def upper_covers(self, g: Subgroup) -> tuple[Subgroup, ...]:
        return self._up[g]

    def lower_covers(self, g: Subgroup) -> tuple[Subgroup, ...]:
        return self._down[g]

    @property
    def bottom(self) -> Subgroup:
        return self.nodes[0]

    @property
    def top(self) -> Subgroup:
        return self.nodes[-1]

    def sorted_covers(self) -> list[tuple[Subgroup, Subgroup]]:
        return sorted(self.covers, key=lambda p: (p[0].sort_key, p[1].sort_key))


def build_lattice(subgroups: Iterable[Subgroup]) -> SubgroupLattice:
    nodes = sorted(set(subgroups), key=lambda s: s.sort_key)
    ns = {s.n for s in nodes}
    if len(ns) != 1:
        raise LatticeError(f"subgroups must share one n, got {sorted(ns)}")
    (n,) = ns
    if len(nodes) != subgroup_count(n) or {s.elements for s in nodes} != {
        s.elements for s in _enumerate(n)
    }:
        raise LatticeError(f"incomplete subgroup list for Dih_{n}: {len(nodes)} of {subgroup_count(n)}")
    covers = set()
    for lo in nodes:
        for hi in nodes:
            if lo < hi and not any(lo < h < hi for h in nodes):
                covers.add((lo, hi))
    return SubgroupLattice(n, tuple(nodes), frozenset(covers))


@lru_cache(maxsize=None)
def lattice_for(n: int) -> SubgroupLattice:
    return build_lattice(enumerate_subgroups(n))


# --------------------------------------------------------------------------
# symmetry points


@dataclass(frozen=True)
class Pure:
    group: Subgroup

    @property
    def governing(self) -> Subgroup:
        return self.group

    @property
    def beta(self) -> float:
        return 1.0

    @property
    def label(self) -> str:
        return self.group.label

    @property
    def display(self) -> str:
        return self.group.display

    @property
    def sort_key(self) -> tuple:
        return (0, self.group.sort_key)

    def nearest_subgroup(self) -> Subgroup:
        return self.group

    def __repr__(self):
        return f"Pure({self.label})"


@dataclass(frozen=True)
class Interpolated:
    """Grid point ``j`` of ``K`` on the covering edge ``lower < upper``.

    ``j`` counts steps away from ``upper``: ``j = 0`` would be ``upper`` and
    ``j = K`` would be ``lower``.
    """

    lower: Subgroup
    upper: Subgroup
    j: int
    K: int

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigurationError(f"{self.lower.label} is not a proper subgroup of {self.upper.label}")
        if not 1 <= self.j <= self.K - 1:
            raise ConfigurationError(f"interior grid index needs 1 <= j <= K-1, got j={self.j}, K={self.K}")

    @property
    def governing(self) -> Subgroup:
        return self.lower

    @property
    def beta0(self) -> Fraction:
        return Fraction(self.lower.order, self.upper.order)

    @property
    def beta_exact(self) -> Fraction:
        b0 = self.beta0
        return b0 + Fraction(self.j, self.K) * (1 - b0)

    @property
    def beta(self) -> float:
        return float(self.beta_exact)

    @property
    def label(self) -> str:
        return f"mid({self.lower.label},{self.upper.label},{self.j},{self.K})"

    @property
    def display(self) -> str:
        terms = [(self.j, 0, self.lower), (self.K - self.j, 1, self.upper)]
        terms.sort(key=lambda t: (t[0], t[1]))
        return " + ".join(f"{w}/{self.K} {g.display}" for w, _, g in terms)

    @property
    def sort_key(self) -> tuple:
        return (1, self.lower.sort_key, self.upper.sort_key, self.K, self.j)

    def nearest_subgroup(self) -> Subgroup:
        # ties (j/K == 1/2) resolve to the lower subgroup
        return self.lower if 2 * self.j >= self.K else self.upper

    def __repr__(self):
        return f"Interpolated({self.label})"


SymmetryPoint = Union[Pure, Interpolated]


def grid_point(lower: Subgroup, upper: Subgroup, j: int, K: int) -> SymmetryPoint:
    """Point ``j`` on the edge, collapsing the endpoints to pure subgroups."""
    if j <= 0:
        return Pure(upper)
    if j >= K:
        return Pure(lower)
    return Interpolated(lower, upper, j, K)


def neighbors(point: SymmetryPoint, lattice: SubgroupLattice, K: int) -> frozenset:
    """Neighbor set of a symmetry point, always including the point itself."""
    if K < 1:
        raise ConfigurationError(f"K must be >= 1, got {K}")
    if isinstance(point, Pure):
        g = point.group
        if g not in lattice._up:
            raise ConfigurationError(f"{g.label} is not in the lattice of Dih_{lattice.n}")
        out = {point}
        for hi in lattice.upper_covers(g):
            out.add(grid_point(g, hi, K - 1, K))
        for lo in lattice.lower_covers(g):
            out.add(grid_point(lo, g, 1, K))
        return frozenset(out)
    if point.K != K:
        raise ConfigurationError(f"point {point.label} uses K={point.K}, requested K={K}")
    if (point.lower, point.upper) not in lattice.covers:
        raise ConfigurationError(f"{point.label} does not lie on a covering edge")
    return frozenset(grid_point(point.lower, point.upper, point.j + d, K) for d in (-1, 0, 1))


def sorted_points(points: Iterable[SymmetryPoint]) -> list[SymmetryPoint]:
    return sorted(points, key=lambda p: p.sort_key)


def all_points(lattice: SubgroupLattice, K: int) -> list[SymmetryPoint]:
    pts: list[SymmetryPoint] = [Pure(g) for g in lattice.nodes]
    for lo, hi in lattice.sorted_covers():
        pts.extend(Interpolated(lo, hi, j, K) for j in range(1, K))
    return sorted_points(pts)


_MID_RE = re.compile(r"^mid\(([^,()]+),([^,()]+),(-?\d+),(-?\d+)\)$")


def parse_point(text: str, n: int, K: int | None = None) -> SymmetryPoint:
    """Parse ``H4``, ``K0``, ``H2.0`` or ``mid(H4,K0,1,3)``."""
    text = text.strip().replace(" ", "")
    lattice = lattice_for(n)
    m = _MID_RE.match(text)
    if m is None:
        return Pure(_lookup(lattice, text))
    lo, hi = _lookup(lattice, m.group(1)), _lookup(lattice, m.group(2))
    j, k = int(m.group(3)), int(m.group(4))
    if K is not None and k != K:
        raise LabelError(f"{text!r} uses K={k}, expected K={K}")
    if (lo, hi) not in lattice.covers:
        raise LabelError(f"{text!r}: ({lo.label}, {hi.label}) is not a covering pair")
    if not 1 <= j <= k - 1:
        raise LabelError(f"{text!r}: interior index must satisfy 1 <= j <= K-1")
    return Interpolated(lo, hi, j, k)


def _lookup(lattice: SubgroupLattice, label: str) -> Subgroup:
    try:
        g = subgroup_from_label(label, lattice.n)
    except UnsupportedOrderError:
        raise
    except GroupError as exc:
        raise LabelError(str(exc)) from None
    return g


# --------------------------------------------------------------------------
# text exports


def lattice_to_dot(lattice: SubgroupLattice, K: int = 1) -> str:
    lines = [f'digraph "Dih_{lattice.n}" {{', "  rankdir=BT;"]
    for s in lattice.nodes:
        lines.append(f'  "{s.label}" [label="{s.label}\\n|G|={s.order}"];')
    for lo, hi in lattice.sorted_covers():
        if K <= 1:
            lines.append(f'  "{lo.label}" -> "{hi.label}";')
            continue
        chain = [lo.label] + [Interpolated(lo, hi, j, K).label for j in range(K - 1, 0, -1)] + [hi.label]
        for j in range(K - 1, 0, -1):
            lines.append(f'  "{Interpolated(lo, hi, j, K).label}" [shape=point, width=0.08, label=""];')
        for a, b in zip(chain, chain[1:]):
            lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def subgroup_listing(n: int) -> str:
    return "".join(s.listing() + "\n" for s in enumerate_subgroups(n))
