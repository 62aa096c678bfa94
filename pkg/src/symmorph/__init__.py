"""Symmetry-constrained robot morphology design over dihedral subgroups."""
from symmorph.group import (
    DihedralElement,
    Interpolated,
    Pure,
    Subgroup,
    SubgroupLattice,
    build_lattice,
    compose,
    enumerate_subgroups,
    generate_subgroup,
    inverse,
    matrix_rep,
    neighbors,
    parse_point,
    perm_rep,
)

__version__ = "0.1.0"

__all__ = [
    "DihedralElement",
    "Interpolated",
    "Pure",
    "Subgroup",
    "SubgroupLattice",
    "build_lattice",
    "compose",
    "enumerate_subgroups",
    "generate_subgroup",
    "inverse",
    "matrix_rep",
    "neighbors",
    "parse_point",
    "perm_rep",
]
