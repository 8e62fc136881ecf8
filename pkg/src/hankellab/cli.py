"""Command-line entry point ``lab``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from hankellab import atoms, hankel, harness


def _suite_parser(sub, name):
    p = sub.add_parser(name, help=f"run the {name} suite")
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out", type=Path, help="report stem; writes <stem>.csv and <stem>.json")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=_run_suite, suite=name)


def _run_suite(args) -> int:
    try:
        cfg = harness.ExperimentConfig.load(args.config, suite=args.suite, seed=args.seed,
                                            trials=args.trials, threads=args.threads,
                                            out=str(args.out) if args.out else None)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = harness.run_suite(cfg)
    out = cfg.out or f"reports/{cfg.suite}"
    csv_path, json_path = report.write(out)
    print(f"{cfg.suite}: {len(report.rows)} rows, max_ratio={report.max_ratio:.6g}, "
          f"failures={report.failures}")
    print(f"wrote {csv_path} and {json_path}")
    return 1 if report.failures else 0


def _validate_atom(args) -> int:
    try:
        atom = atoms.load_atom(args.inp)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = atoms.validate_atom(atom)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0 if report.ok else 1


def _norms(args) -> int:
    try:
        phi = hankel.AnalyticSymbol.from_bytes(args.symbol.read_bytes())
        H = hankel.hankel_matrix(phi)
        out = {"N": phi.N, "p": args.p, "schatten": hankel.schatten_norm(H, args.p)}
        if phi.zero_axis_excluded and phi.coeffs.any():
            out["besov"] = hankel.besov_lattice_norm(phi, args.p)
            out["ratio"] = out["schatten"] / out["besov"]
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Numerical experiments for small Hankel operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in harness.SUITES:
        _suite_parser(sub, name)
    va = sub.add_parser("validate-atom", help="check an atom manifest")
    va.add_argument("--in", dest="inp", type=Path, required=True)
    va.set_defaults(func=_validate_atom)
    nm = sub.add_parser("norms", help="Schatten and Besov norms of a symbol file")
    nm.add_argument("--symbol", type=Path, required=True)
    nm.add_argument("--p", type=float, required=True)
    nm.set_defaults(func=_norms)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
