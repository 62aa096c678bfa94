"""Command-line entry point.

Exit codes: 0 ok, 1 failed check or property, 2 usage/input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from symmorph.design import DEFAULT_TOL, DesignError, design_from_json, design_to_json, canonical_json, fmt_float, is_symmetric
from symmorph.group import GroupError, lattice_for, lattice_to_dot, neighbors, parse_point, sorted_points, enumerate_subgroups
from symmorph.maps import symmetrize_existing
from symmorph.search import SearchConfig, SearchError, oracle_from_dict, run_search
from symmorph.verify import run_verification


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _write(path: str, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


def cmd_subgroups(args) -> int:
    for s in enumerate_subgroups(args.n):
        print(f"{s.label}\t|G|={s.order}\t{s.listing().split(' := ')[1]}")
    return 0


def cmd_lattice(args) -> int:
    dot = lattice_to_dot(lattice_for(args.n), args.k)
    if args.dot:
        _write(args.dot, dot)
    else:
        sys.stdout.write(dot)
    return 0


def cmd_neighbors(args) -> int:
    point = parse_point(args.point, args.n)
    for p in sorted_points(neighbors(point, lattice_for(args.n), args.k)):
        print(f"{p.label}\t{p.display}")
    return 0


def cmd_symmetrize(args) -> int:
    design = design_from_json(Path(args.design).read_text(encoding="utf-8"))
    point = parse_point(args.point, design.n)
    _write(args.out, design_to_json(symmetrize_existing(design, point)))
    return 0


def cmd_check(args) -> int:
    design = design_from_json(Path(args.design).read_text(encoding="utf-8"))
    point = parse_point(args.group, design.n)
    ok = is_symmetric(design, point.governing, args.tol)
    print(f"{'symmetric' if ok else 'not symmetric'} under {point.governing.label} (tol {args.tol:g})")
    return 0 if ok else 1


def cmd_search(args) -> int:
    raw = _read_json(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.workers is not None:
        raw["workers"] = args.workers
    config = SearchConfig.from_dict(raw)
    oracle = oracle_from_dict(raw.get("oracle", {"g_star": "H1.0"}), config.n)
    result = run_search(config, oracle)
    _write(args.out, canonical_json(result.to_dict(config, oracle)))
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "point", "mean_fitness", "best_fitness"])
        for r in result.trajectory:
            w.writerow([r.iteration, r.point.label, fmt_float(r.mean_fitness), fmt_float(r.best_fitness)])
        _write(args.csv, buf.getvalue())
    print(f"final point {result.final_point.label} ({result.final_point.display})")
    return 0


def cmd_verify(args) -> int:
    if args.n_min < 3 or args.n_max < args.n_min:
        raise UsageError("need 3 <= n-min <= n-max")
    report = run_verification(args.n_min, args.n_max, args.trials, args.seed)
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: {c['cases']} cases, max residual {c['max_residual']:.3g}")
    if args.out:
        _write(args.out, canonical_json(report))
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symmorph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("subgroups", help="list the subgroups of Dih_n")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_subgroups)

    p = sub.add_parser("lattice", help="export the covering lattice as DOT")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1, help="intervals per covering edge")
    p.add_argument("--dot", help="output path (stdout if omitted)")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("neighbors", help="neighbor set of a symmetry point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("symmetrize", help="project a design onto a symmetry point")
    p.add_argument("--design", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_symmetrize)

    p = sub.add_parser("check", help="test whether a design is G-symmetric")
    p.add_argument("--design", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="run the epsilon-greedy symmetry search")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GroupError, DesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
