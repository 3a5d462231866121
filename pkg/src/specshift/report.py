"""Run reports and their serialization.

The report JSON and every CSV body are byte-deterministic for a given
config (floats at 17 significant digits, '\\n' endings, sorted keys);
wall-clock timings and timestamps go to a separate metadata file so that
repeated runs produce identical primary artifacts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Sequence, Tuple

from . import __version__
from .kernels import BACKEND


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


@dataclass
class RunReport:
    name: str
    config: Dict[str, Any]
    records: List[Dict[str, Any]] = field(default_factory=list)
    tables: Dict[str, Tuple[Sequence[str], List[tuple]]] = field(default_factory=dict)
    wall_time_s: float = 0.0

    def overall_pass(self, strict: bool = False) -> bool:
        ok = all(r["pass"] for r in self.records)
        if strict:
            ok = ok and not any(r.get("warning", False) for r in self.records)
        return ok

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": 1,
            "name": self.name,
            "package_version": __version__,
            "backend": BACKEND,
            "config": self.config,
            "records": self.records,
            "overall_pass": self.overall_pass(),
        }


def write_csv(path: str, header: Sequence[str], rows: List[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_report(report: RunReport, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, report.name)
    report_path = base + "_report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    meta = {
        "name": report.name,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": report.wall_time_s,
    }
    with open(base + "_meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for table_name, (header, rows) in sorted(report.tables.items()):
        write_csv(f"{base}_{table_name}.csv", header, rows)
    return report_path


def summarize(report: RunReport) -> str:
    lines = [f"scenario {report.name}: {'PASS' if report.overall_pass() else 'FAIL'}"]
    for r in report.records:
        status = "pass" if r["pass"] else "FAIL"
        if r.get("warning"):
            status += " (warn)"
        resid = r.get("residual")
        tol = r.get("tolerance")
        detail = ""
        if resid is not None:
            detail = f" residual={fmt(resid)}"
            if tol is not None:
                detail += f" tol={fmt(tol)}"
        lines.append(f"  [{status}] {r['experiment']}/{r['check']}{detail}")
    return "\n".join(lines)
