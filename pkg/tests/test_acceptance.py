"""Acceptance criteria, run on the full seeded corpora with exact equality.

Each test records one line ``criterion N: PASS|FAIL ...``; the lines are
printed together at the end of the pytest run (see conftest.py) and also
when this file is executed directly.
"""

import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest
from gmpy2 import mpq

from relchern import chern_weil as cw
from relchern import cli
from relchern.exact import reduce_mod
from relchern.suites import SuiteConfig, golden_path, run_checks

RESULTS: dict = {}


def record(num: int, title: str, ok: bool, detail: str = "") -> None:
    RESULTS[num] = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    print(RESULTS[num])


def run(suite: str, **kw):
    t0 = time.perf_counter()
    checks = run_checks(SuiteConfig(suite, **kw))
    return checks, time.perf_counter() - t0


def failures(checks) -> list:
    return [c.id for c in checks if not c.passed]


def summary(checks, secs, limit=None) -> str:
    s = f"{sum(c.passed for c in checks)}/{len(checks)} checks, {secs:.1f}s"
    return s + (f" (limit {limit}s)" if limit else "")


def assert_suite(num, title, checks, secs, limit=None, extra_ok=True):
    bad = failures(checks)
    ok = not bad and bool(checks) and extra_ok and (limit is None or secs < limit)
    record(num, title, ok, summary(checks, secs, limit))
    assert not bad, bad[:10]
    assert checks
    assert extra_ok
    if limit is not None:
        assert secs < limit, f"took {secs:.1f}s, limit {limit}s"


def test_criterion_01_dupont_identities():
    checks, secs = run("dupont")
    cases = {c.id.rsplit("/", 1)[0] for c in checks}
    bases = {c.id.split("/")[1] for c in checks}
    assert_suite(1, "Dupont identities on 300 seeded forms", checks, secs, 120,
                 len(cases) == 300 and len(bases) == 5)


def test_criterion_02_beta_table():
    table = {1: mpq(1), 2: mpq(-1, 6), 3: mpq(1, 30), 4: mpq(-1, 140), 5: mpq(1, 630)}
    checks, secs = run("beta")
    direct = all(cw.beta_integral(n) == v == cw.beta_closed_form(n) for n, v in table.items())
    assert_suite(2, "beta table n = 1..5", checks, secs, None, direct and len(checks) == 5)


def test_criterion_03_simplex_integrals():
    checks, secs = run("simplex")
    expect = {c.id: c.expected for c in checks}
    frozen = {"simplex/n=1/dx1..dx1": "1", "simplex/n=1/dx0..dx0": "-1",
              "simplex/n=2/dx1..dx3": "1/6", "simplex/n=2/dx0..dx2": "-1/6",
              "simplex/n=3/dx1..dx5": "1/120", "simplex/n=3/dx0..dx4": "-1/120"}
    assert_suite(3, "simplex volume integrals n = 1..3", checks, secs, None, expect == frozen)


def test_criterion_04_chern_weil_identities():
    checks, secs = run("chern_weil")
    bundles = {c.id.split("/")[1] for c in checks}
    kinds = {c.id.rsplit("/", 1)[1] for c in checks}
    want = {"gauge_law", "conjugation", "closed", "index_independent", "whitney", "gauge_invariant"}
    assert_suite(4, "Chern-Weil identities on 50 bundles, n <= 3, r <= 4", checks, secs, 300,
                 len(bundles) == 50 and want <= kinds)


def test_criterion_05_relative_classes():
    checks, secs = run("relative")
    kinds = {c.id.rsplit("/", 1)[1] for c in checks}
    assert_suite(5, "relative boundary identity and two-parameter relation, n <= 2", checks, secs, 300,
                 {"boundary", "two_parameter"} <= kinds)


def test_criterion_06_explicit_cocycle():
    checks, secs = run("explicit")
    ns = {c.id.split("/")[1] for c in checks}
    golden = cw.explicit_cocycle(golden_path(), 2)
    assert_suite(6, "explicit cocycle: both pipelines agree, n in {1,2,3}", checks, secs, 600,
                 ns == {"n=1", "n=2", "n=3"} and golden == mpq(-1, 24))


def test_criterion_07_line_bundle():
    checks, secs = run("line_bundle")
    E, G = cw.line_bundle_fixture()
    got, want = cw.line_bundle_check(E, G)
    assert_suite(7, "line bundle: int Ch_1 = -dlog g", checks, secs, None, got == want and bool(want))


def test_criterion_08_lazard():
    checks, secs = run("lazard")
    trials = [c for c in checks if not c.id.endswith("linear_part")]
    grids = {c.id.rsplit("/", 1)[0] for c in trials}
    nonzero = sum(1 for c in trials if c.expected != "0")
    assert_suite(8, "Lazard comparison, 8 grid points x 20 tuples", checks, secs, 600,
                 len(grids) == 8 and len(trials) == 160 and nonzero > 100)


def test_criterion_09_nu_certificates():
    checks, secs = run("nu")
    assert_suite(9, "nu-map norm certificates and Neumann inverse mod p^4", checks, secs, None, len(checks) == 100)


def test_criterion_10_padic_log():
    checks, secs = run("padic_log")
    got = {c.id: c.actual for c in checks}
    want = {}
    for p in (5, 7):
        # the log series in exact fractions, far past the precision
        log = sum(Fraction((-1) ** (k + 1) * p ** k, k) for k in range(1, 40))
        want[f"padic_log/p={p}/M=4"] = str(reduce_mod(-mpq(log.numerator, log.denominator), p, 4))
    assert_suite(10, "p-adic n = 1 against -log(1+p) mod p^4, p = 5, 7", checks, secs, None,
                 got == want == {"padic_log/p=5/M=4": "70", "padic_log/p=7/M=4": "1904"})


def test_criterion_11_factor_two():
    checks, secs = run("factor2")
    ns = {c.id.split("/")[1] for c in checks}
    assert_suite(11, "Burgos factor 2 at the cocycle level, n in {1,2}", checks, secs, None, ns == {"n=1", "n=2"})


def test_criterion_12_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.OUT_ENV, raising=False)
    t0 = time.perf_counter()
    ok = True
    runs = [("relative", ["--seed", "7"]), ("lazard", ["--seed", "7", "--trials", "3"]),
            ("explicit", ["--seed", "7", "--trials", "2"]), ("nu", ["--seed", "7", "--format", "csv"])]
    for name, extra in runs:
        blobs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}.out"
            assert cli.main(["verify", name, *extra, "--out", str(out)]) == cli.EXIT_OK
            blobs.append(out.read_bytes())
        ok = ok and blobs[0] == blobs[1]
    # separate processes with different string-hash seeds
    blobs = []
    for hs in ("1", "2"):
        out = tmp_path / f"proc-{hs}.json"
        env = dict(os.environ, PYTHONHASHSEED=hs)
        res = subprocess.run([sys.executable, "-m", "relchern.cli", "verify", "relative", "--seed", "7",
                              "--out", str(out)], env=env, capture_output=True, text=True)
        assert res.returncode == cli.EXIT_OK, res.stderr
        blobs.append(out.read_bytes())
    ok = ok and blobs[0] == blobs[1]
    secs = time.perf_counter() - t0
    record(12, "repeated runs with equal seeds give byte-identical reports", ok,
           f"{len(runs)} suites x 2 runs in-process, 2 runs across processes, {secs:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
