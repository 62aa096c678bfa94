"""Test-side oracles that avoid the library's own projection code."""
import math

import numpy as np

from symmorph.design import extended_perm, orbits


def anchor_angle(i, n):
    return 2 * math.pi * i / n


def geometric_matrix(n, reflection, k):
    """Rotation/reflection matrix computed directly from the angle."""
    if reflection:
        t = 2 * math.pi * k / n
        return np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]])
    t = 2 * math.pi * k / n
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def geometric_perm(n, reflection, k):
    """Anchor permutation found by moving each anchor and locating the nearest one."""
    m = geometric_matrix(n, reflection, k)
    anchors = np.array([[math.cos(anchor_angle(i, n)), math.sin(anchor_angle(i, n))] for i in range(n)])
    out = []
    for a in anchors:
        b = m @ a
        out.append(int(np.argmin(np.linalg.norm(anchors - b, axis=1))))
    return tuple(out)


def brute_force_projection(c, elements, n):
    """Layer-1-only group average with explicit matrices: (1/|G|) sum M_g c P_{g^-1}."""
    total = np.zeros_like(c, dtype=float)
    for reflection, k in elements:
        m = geometric_matrix(n, reflection, k)
        perm = geometric_perm(n, reflection, k)
        p = np.zeros((n, n))
        for j, i in enumerate(perm):
            p[i, j] = 1.0
        # P_{g^-1} = P_g^T for a permutation matrix
        total += m @ c @ p.T
    return total / len(elements)


def orbit_symmetric_coordinates(design, G, rng):
    """A G-symmetric coordinate matrix built orbit by orbit.

    Each orbit representative gets a random vector averaged over its
    stabilizer; every other orbit member is the image of the representative.
    """
    perms = {g: extended_perm(g, design) for g in G}
    index = design.index
    c = np.zeros((2, len(design)))
    for orbit in orbits(design, G).orbits:
        r = orbit[0]
        w = rng.normal(size=2)
        stab = [g for g in G if perms[g][r] == r]
        base = sum(geometric_matrix(g.n, g.reflection, g.k) @ w for g in stab) / len(stab)
        for g in G:
            c[:, index[perms[g][r]]] = geometric_matrix(g.n, g.reflection, g.k) @ base
    return c
