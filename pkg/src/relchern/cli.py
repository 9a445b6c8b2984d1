"""Command-line front end.

    relchern verify <suite> [--seed S --max-level N --n --r --p --prec --rho --trials --out --format]
    relchern eval cocycle --input F --n N --convention complex|padic [--prec M]

Exit codes: 0 all checks pass, 1 a check failed, 2 input error,
3 precision or certificate failure.  ``RELCHERN_OUT_DIR`` sets the default
output directory for reports.
"""

from __future__ import annotations

import argparse
import os
import sys

from gmpy2 import mpq

from .exact import CertificateError, UniverseError
from .report import build_report, render, write_atomic
from .serialize import ParseError
from .simplicial import SimplicialError
from .suites import SUITES, SuiteConfig, digest, run_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3
OUT_ENV = "RELCHERN_OUT_DIR"


def run_suite(config: SuiteConfig) -> dict:
    checks = run_checks(config)
    return build_report(config.suite, config.limits(), checks, config.timing)


def _default_out(name: str, fmt: str) -> str | None:
    d = os.environ.get(OUT_ENV)
    return os.path.join(d, f"{name}.{fmt}") if d else None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relchern", description="Exact verification of relative Chern character identities.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-level", type=int, default=4, help="truncation level N of the Dupont bases")
    v.add_argument("--n", type=int)
    v.add_argument("--r", type=int)
    v.add_argument("--p", type=int)
    v.add_argument("--prec", type=int, default=4, help="p-adic precision M")
    v.add_argument("--rho", default="2", help="Gauss-norm radius (rational)")
    v.add_argument("--trials", type=int)
    v.add_argument("--out")
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--timing", action="store_true", help="include wall times (breaks byte-identical reports)")

    e = sub.add_parser("eval", help="evaluate a cocycle on a fixture")
    e.add_argument("what", choices=("cocycle",))
    e.add_argument("--input", required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--convention", choices=("complex", "padic"), default="complex")
    e.add_argument("--prec", type=int, default=4)
    e.add_argument("--rho", default="2")
    e.add_argument("--out")
    return ap


def _verify(args) -> int:
    cfg = SuiteConfig(args.suite, args.seed, args.max_level, args.n, args.r, args.p, args.prec,
                      str(mpq(args.rho)), args.trials, args.out, args.format, args.timing)
    report = run_suite(cfg)
    text = render(report, cfg.format)
    out = cfg.out or _default_out(f"{cfg.suite}-seed{cfg.seed}", cfg.format)
    if out:
        write_atomic(out, text)
    s = report["summary"]
    print(f"{cfg.suite}: {s['passed']}/{s['total']} checks passed" + (f" (report: {out})" if out else ""))
    for rec in report["checks"]:
        if rec["verdict"] != "pass":
            print(f"FAIL {rec['id']}: expected {rec['expected']}, got {rec['actual']}")
    return EXIT_OK if s["failed"] == 0 else EXIT_FAIL


def _eval(args) -> int:
    from . import chern_weil as cw
    from . import padic as pa
    from .fixtures import load_json, load_matrix_path, load_unit_tuple

    data = load_json(args.input)
    n = args.n
    record = {"input_digest": digest(data), "n": n, "convention": args.convention}
    ok = True
    if args.convention == "complex":
        sigma = load_matrix_path(data)
        if sigma.q != 2 * n - 1:
            raise ValueError(f"path lives on Δ^{sigma.q}, but n={n} needs Δ^{2 * n - 1}")
        value = cw.explicit_cocycle(sigma, n)
        check = cw.explicit_cocycle_via_chern(sigma, n)
        ok = value == check
        record.update(value=str(value), cross_check=str(check), verdict="pass" if ok else "fail")
        print(value)
    else:
        gs = load_unit_tuple(data)
        if len(gs) != 2 * n - 1:
            raise ValueError(f"need {2 * n - 1} matrices for n={n}, got {len(gs)}")
        val = pa.padic_cocycle(gs, n, args.prec, mpq(args.rho))
        record.update(value=str(val.value), precision=f"{val.p}^{val.M}", truncation=val.order,
                      recheck=val.recheck_order, verdict="pass")
        print(val)
    out = args.out or _default_out("eval-cocycle", "json")
    if out:
        write_atomic(out, render(record, "json"))
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    from .fixtures import FixtureError
    from .padic import PrecisionError

    args = _parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        return _eval(args)
    except (CertificateError, PrecisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (FixtureError, ParseError, SimplicialError, UniverseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
