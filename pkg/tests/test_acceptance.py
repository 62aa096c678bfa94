"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import itertools
import json
import time
from fractions import Fraction

import numpy as np

from helpers import brute_force_projection, orbit_symmetric_coordinates
from symmorph.cli import main
from symmorph.design import (
    AttributeAction,
    SkeletonAction,
    apply_skeleton_actions,
    initial_design,
    is_symmetric,
    orbits,
)
from symmorph.group import (
    Interpolated,
    Pure,
    all_points,
    compose,
    divisors,
    enumerate_subgroups,
    group_elements,
    lattice_for,
    matrix_rep,
    neighbors,
    perm_matrix,
)
from symmorph.maps import (
    blend_projection,
    decomposition_check,
    project_vectors,
    project_vectors_interpolated,
    symmetric_residual,
    symmetrize_design,
    symmetrize_existing,
)
from symmorph.search import SearchConfig, generate_design, planted_symmetry_oracle, run_search, substream
from symmorph.verify import brute_force_subgroups, random_compatible_design

DIH4_SUBGROUPS = {
    "H1": {"r0", "r1", "r2", "r3"},
    "H2": {"r0", "r2"},
    "H4": {"r0"},
    "K0": {"r0", "p0"},
    "K1": {"r0", "p1"},
    "K2": {"r0", "p2"},
    "K3": {"r0", "p3"},
    "H1.0": {"r0", "r1", "r2", "r3", "p0", "p1", "p2", "p3"},
    "H2.0": {"r0", "r2", "p0", "p2"},
    "H2.1": {"r0", "r2", "p1", "p3"},
}


def test_c1_subgroup_enumeration(acceptance_report):
    t0 = time.perf_counter()
    got = {s.label: {g.name for g in s.elements} for s in enumerate_subgroups(4)}
    table_ok = got == DIH4_SUBGROUPS
    counts_ok = all(len(enumerate_subgroups(n)) == sum(1 + d for d in divisors(n)) for n in range(3, 13))
    brute_ok = all({s.elements for s in enumerate_subgroups(n)} == brute_force_subgroups(n) for n in range(3, 7))
    elapsed = time.perf_counter() - t0
    ok = table_ok and counts_ok and brute_ok and elapsed < 5
    acceptance_report(
        "1 subgroup enumeration",
        ok,
        f"Dih4 table {table_ok}, counts n=3..12 {counts_ok}, brute force n=3..6 {brute_ok}, {elapsed:.2f}s",
    )
    assert ok


DIH4_MATRICES = {
    "r0": [[1, 0], [0, 1]],
    "r1": [[0, -1], [1, 0]],
    "r2": [[-1, 0], [0, -1]],
    "r3": [[0, 1], [-1, 0]],
    "p0": [[1, 0], [0, -1]],
    "p1": [[0, 1], [1, 0]],
    "p2": [[-1, 0], [0, 1]],
    "p3": [[0, -1], [-1, 0]],
}


def test_c2_representations(acceptance_report):
    elems = {g.name: g for g in group_elements(4)}
    mats_ok = all(np.array_equal(matrix_rep(elems[k]), np.array(v, float)) for k, v in DIH4_MATRICES.items())
    p0 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
    perm_ok = np.array_equal(perm_matrix(elems["p0"]), p0)
    # P_r3 must be the inverse of P_r1, not a copy of it
    typo_ok = np.array_equal(perm_matrix(elems["r3"]), np.linalg.inv(perm_matrix(elems["r1"])).round().astype(int))
    worst = 0.0
    perms_ok = True
    for n in range(3, 9):
        for a, b in itertools.product(group_elements(n), repeat=2):
            ab = compose(a, b)
            worst = max(worst, float(np.max(np.abs(matrix_rep(ab) - matrix_rep(a) @ matrix_rep(b)))))
            perms_ok &= np.array_equal(perm_matrix(ab), perm_matrix(a) @ perm_matrix(b))
    ok = mats_ok and perm_ok and typo_ok and perms_ok and worst <= 1e-12
    acceptance_report(
        "2 representations",
        ok,
        f"matrices {mats_ok}, P_pi0 {perm_ok}, P_rho3 = P_rho1^-1 {typo_ok}, "
        f"homomorphism n<=8 max residual {worst:.1e}",
    )
    assert ok


def test_c3_k0_closed_form(acceptance_report):
    rng = np.random.default_rng(0)
    K0 = lattice_for(4)["K0"]
    d = initial_design(4)
    worst_closed = worst_brute = 0.0
    for _ in range(100):
        c = rng.normal(size=(2, 4))
        x, y = c
        a, b = (x[1] + x[3]) / 2, (y[1] - y[3]) / 2
        closed = np.array([[x[0], a, x[2], a], [0.0, b, 0.0, -b]])
        out = project_vectors(c, K0, d)
        worst_closed = max(worst_closed, float(np.max(np.abs(out - closed))))
        brute = brute_force_projection(c, [(False, 0), (True, 0)], 4)
        worst_brute = max(worst_brute, float(np.max(np.abs(out - brute))))
    ok = worst_closed <= 1e-12 and worst_brute <= 1e-12
    acceptance_report(
        "3 K0 closed form",
        ok,
        f"100 matrices, closed-form residual {worst_closed:.1e}, brute-force residual {worst_brute:.1e}",
    )
    assert ok


def test_c4_projection_theorem(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    inv = idem = fix = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 9))
        subs = enumerate_subgroups(n)
        G = subs[int(rng.integers(len(subs)))]
        d = random_compatible_design(n, G, rng, steps=2)
        c = rng.normal(size=(2, len(d)))
        out = project_vectors(c, G, d)
        inv = max(inv, symmetric_residual(out, G, d))
        idem = max(idem, float(np.max(np.abs(project_vectors(out, G, d) - out))))
        sym = orbit_symmetric_coordinates(d, G, rng)
        fix = max(fix, float(np.max(np.abs(project_vectors(sym, G, d) - sym))))
    elapsed = time.perf_counter() - t0
    ok = inv <= 1e-9 and idem <= 1e-12 and fix <= 1e-12 and elapsed < 60
    acceptance_report(
        "4 projection invariance/idempotence/fixing",
        ok,
        f"1000 trials, invariance {inv:.1e}, idempotence {idem:.1e}, fixing {fix:.1e}, {elapsed:.1f}s",
    )
    assert ok


def test_c5_decomposition_identity(acceptance_report):
    rng = np.random.default_rng(5)
    worst = 0.0
    beta_ok = True
    pairs = 0
    for n in (4, 6):
        for lo, hi in lattice_for(n).sorted_covers():
            pairs += 1
            beta_ok &= Interpolated(lo, hi, 1, 2).beta0 == Fraction(lo.order, hi.order)
            d = random_compatible_design(n, hi, rng, steps=2)
            for _ in range(100):
                worst = max(worst, decomposition_check(lo, hi, rng.normal(size=(2, len(d))), d))
    ok = worst <= 1e-9 and beta_ok
    acceptance_report(
        "5 decomposition identity",
        ok,
        f"{pairs} covering pairs x 100 matrices, residual {worst:.1e}, beta0 exact {beta_ok}",
    )
    assert ok


def test_c6_interpolation_theorem(acceptance_report):
    rng = np.random.default_rng(6)
    sym = ends = 0.0
    points = 0
    for lo, hi in lattice_for(4).sorted_covers():
        d = random_compatible_design(4, hi, rng, steps=2)
        c = rng.normal(size=(2, len(d)))
        for K in (1, 3, 5):
            for j in range(1, K):
                out = project_vectors_interpolated(c, Interpolated(lo, hi, j, K), d)
                sym = max(sym, symmetric_residual(out, lo, d))
                points += 1
        b0 = lo.order / hi.order
        ends = max(
            ends,
            float(np.max(np.abs(blend_projection(c, lo, hi, b0, d) - project_vectors(c, hi, d)))),
            float(np.max(np.abs(blend_projection(c, lo, hi, 1.0, d) - project_vectors(c, lo, d)))),
        )
    ok = sym <= 1e-9 and ends <= 1e-12
    acceptance_report(
        "6 interpolated projections",
        ok,
        f"{points} interior points, lower-symmetry residual {sym:.1e}, endpoint residual {ends:.1e}",
    )
    assert ok


def _skeleton(design):
    return [(j.id, j.parent, j.layer, j.sibling_index) for j in design.joints]


def test_c7_realizability_and_fixing(acceptance_report):
    lat = lattice_for(4)
    pts = all_points(lat, 3)
    cfg = SearchConfig(n=4, K=3)
    pick = np.random.default_rng(7)
    passed = 0
    for seed in range(500):
        point = pts[int(pick.integers(len(pts)))]
        passed += is_symmetric(generate_design(point, cfg, substream(seed, 7)), point.governing, 1e-9)

    skel_ok = True
    attr_worst = 0.0
    for G in enumerate_subgroups(4):
        for _ in range(10):
            d = symmetrize_existing(random_compatible_design(4, G, pick, steps=2), Pure(G))
            part = orbits(d, G)
            skel = {v: [SkeletonAction.ADD, SkeletonAction.NONE][part.orbit_of[v] % 2] for v in d.ids}
            skel_ok &= symmetrize_design(d, Pure(G), skel) == apply_skeleton_actions(d, skel)
            same = {j.id: AttributeAction(dict(j.scalars), j.vector, j.z) for j in d.joints}
            again = symmetrize_design(d, Pure(G), attribute_actions=same, phase="attribute")
            skel_ok &= _skeleton(again) == _skeleton(d)
            attr_worst = max(
                attr_worst,
                float(np.max(np.abs(again.coordinates() - d.coordinates()))),
                max(abs(a.scalars[k] - b.scalars[k]) for a, b in zip(again.joints, d.joints) for k in d.scalar_names),
            )
    ok = passed == 500 and skel_ok and attr_worst <= 1e-12
    acceptance_report(
        "7 generated designs symmetric, pipeline fixing",
        ok,
        f"{passed}/500 rollouts symmetric, skeleton preserved {skel_ok}, attribute drift {attr_worst:.1e}",
    )
    assert ok


def test_c8_neighbor_sets(acceptance_report):
    lat = lattice_for(4)
    k0 = Pure(lat["K0"])
    one = {q.display for q in neighbors(k0, lat, 1)}
    three = {q.display for q in neighbors(k0, lat, 3)}
    ok = one == {"H_4", "K_0", "H_{2,0}"} and three == {"1/3 H_4 + 2/3 K_0", "1/3 H_{2,0} + 2/3 K_0", "K_0"}
    acceptance_report("8 neighbors of K0", ok, f"K=1 {sorted(one)}, K=3 {sorted(three)}")
    assert ok


# Pilot (seeds 0-7, same settings): every seed ended nearest H2.0 or H1.0
# (final points mid(H2.0,H1.0,2,3) x4, H2.0 x3, mid(H2.0,H1.0,1,3) x1),
# roughly 50 s total on one core.  The threshold keeps the stated 6 of 8.
PLANTED_SEEDS = range(8)
PLANTED_THRESHOLD = 6


def test_c9_planted_search(acceptance_report):
    lat = lattice_for(4)
    oracle = planted_symmetry_oracle(lat["H2.0"], lambda_struct=1.0, noise_sigma=0.0)
    supergroups = {"H2.0", "H1.0"}
    t0 = time.perf_counter()
    finals = []
    for seed in PLANTED_SEEDS:
        cfg = SearchConfig(n=4, K=3, epsilon=0.01, iterations=300, batch_size=16, seed=seed)
        finals.append(run_search(cfg, oracle).final_point)
    elapsed = time.perf_counter() - t0
    hits = sum(p.nearest_subgroup().label in supergroups for p in finals)
    ok = hits >= PLANTED_THRESHOLD and elapsed < 120
    acceptance_report(
        "9 planted-symmetry search",
        ok,
        f"{hits}/8 seeds nearest H2.0 or H1.0 ({', '.join(p.label for p in finals)}), {elapsed:.1f}s",
    )
    assert ok


def test_c10_determinism(acceptance_report, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "n": 4,
                "K": 3,
                "iterations": 20,
                "batch_size": 8,
                "seed": 11,
                "epsilon": 0.1,
                "oracle": {"type": "planted", "g_star": "H2.0", "noise_sigma": 0.5},
            }
        )
    )
    reports = []
    for i, extra in enumerate([[], [], ["--workers", "4"]]):
        out = tmp_path / f"s{i}.json"
        assert main(["search", "--config", str(cfg), "--out", str(out), "--seed", "11", *extra]) == 0
        reports.append(out.read_bytes())
    search_ok = reports[0] == reports[1] == reports[2]
    verify = []
    for i in range(2):
        out = tmp_path / f"v{i}.json"
        assert main(["verify", "--n-min", "3", "--n-max", "6", "--trials", "100", "--seed", "3", "--out", str(out)]) == 0
        verify.append(out.read_bytes())
    capsys.readouterr()
    verify_ok = verify[0] == verify[1]
    ok = search_ok and verify_ok
    acceptance_report(
        "10 byte-identical reports",
        ok,
        f"search serial/serial/4-worker identical {search_ok}, verify identical {verify_ok}",
    )
    assert ok
