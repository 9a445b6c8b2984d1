"""Report assembly and atomic JSON/CSV output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

from . import __version__

CSV_FIELDS = ("id", "inputs_digest", "expected", "actual", "verdict")


def build_report(suite: str, config: dict, checks: list, timing: bool = False) -> dict:
    records = []
    for c in checks:
        rec = {"id": c.id, "inputs_digest": c.inputs_digest, "expected": c.expected,
               "actual": c.actual, "verdict": c.verdict}
        if timing:
            rec["wall_time"] = c.wall_time
        records.append(rec)
    passed = sum(1 for c in checks if c.passed)
    return {
        "suite": suite,
        "version": __version__,
        "config": config,
        "checks": records,
        "summary": {"total": len(checks), "passed": passed, "failed": len(checks) - passed},
    }


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        fields = CSV_FIELDS + (("wall_time",) if report["checks"] and "wall_time" in report["checks"][0] else ())
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for rec in report["checks"]:
            w.writerow(rec)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
