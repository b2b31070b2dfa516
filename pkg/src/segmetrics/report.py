"""Report files: metric JSON/CSV plus one CSV per distribution."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional

from .pipeline import ComparisonReport, MetricReport

DISTRIBUTIONS = ("path_lengths", "out_degrees", "closeness", "betweenness", "attack_path_lengths")


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    return path


def _write_rows(path: Path, header: Iterable[str], rows: Iterable) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _scalar_rows(scalars: dict):
    return [(k, "" if v is None else v) for k, v in scalars.items()]


def distribution_rows(reports: Iterable[MetricReport]) -> dict[str, tuple[list, list]]:
    """Header and rows for every per-node / per-length distribution."""
    out = {name: (["mode"], []) for name in DISTRIBUTIONS}
    out["path_lengths"] = (["mode", "length", "count"], [])
    out["out_degrees"] = (["mode", "node", "out_degree"], [])
    out["closeness"] = (["mode", "node", "closeness"], [])
    out["betweenness"] = (["mode", "node", "betweenness"], [])
    out["attack_path_lengths"] = (["mode", "length", "count"], [])
    for r in reports:
        e = r.exposure
        out["path_lengths"][1].extend((r.mode, k, v) for k, v in sorted(e.path_length_histogram.items()))
        out["out_degrees"][1].extend((r.mode, k, v) for k, v in e.out_degree_per_node.items())
        out["closeness"][1].extend((r.mode, k, v) for k, v in e.closeness_per_node.items())
        if r.robustness is not None:
            rb = r.robustness
            out["betweenness"][1].extend((r.mode, k, v) for k, v in rb.betweenness_per_node.items())
            out["attack_path_lengths"][1].extend(
                (r.mode, k, v) for k, v in sorted(rb.attack_path_length_histogram.items()))
    return out


def write_distributions(out: Path, reports: Iterable[MetricReport]) -> list[Path]:
    written = []
    for name, (header, rows) in distribution_rows(list(reports)).items():
        if rows:
            written.append(_write_rows(out / f"{name}.csv", header, rows))
    return written


def write_analysis(out: Path, report: MetricReport, fmt: str = "json") -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        doc = {"mode": report.mode, **report.exposure.to_dict()}
        written.append(_write_json(out / "exposure.json", doc))
        if report.robustness is not None:
            doc = {"mode": report.mode, **report.robustness.to_dict()}
            written.append(_write_json(out / "robustness.json", doc))
    elif fmt == "csv":
        written.append(_write_rows(out / "exposure.csv", ["metric", "value"],
                                   _scalar_rows(report.exposure.scalars())))
        if report.robustness is not None:
            written.append(_write_rows(out / "robustness.csv", ["metric", "value"],
                                       _scalar_rows(report.robustness.scalars())))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if report.risk is not None:
        path = out / "risk.csv"
        path.write_text(report.risk.to_csv())
        written.append(path)
    written += write_distributions(out, [report])
    return written


def write_comparison(out: Path, cmp: ComparisonReport, fmt: str = "json") -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        written.append(_write_json(out / "comparison.json", cmp.to_dict()))
    elif fmt == "csv":
        rows = []
        for key, imp in cmp.improvement_percentages.items():
            f, s = cmp.flat.metric(key), cmp.segmented.metric(key)
            rows.append([key] + ["" if v is None else v for v in (f, s, imp)])
        written.append(_write_rows(out / "comparison.csv", ["metric", "flat", "segmented", "improvement"], rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    risk_rows = []
    for r in (cmp.flat, cmp.segmented):
        if r.risk is not None:
            risk_rows.extend((r.mode, k, v, r.risk.method) for k, v in r.risk.values.items())
    if risk_rows:
        written.append(_write_rows(out / "risk.csv", ["mode", "privilege_node", "probability", "method"],
                                   risk_rows))
    written += write_distributions(out, [cmp.flat, cmp.segmented])
    return written


def schema_path(name: str) -> Path:
    return Path(__file__).with_name("schemas") / f"{name}.schema.json"


def load_schema(name: str) -> dict:
    return json.loads(schema_path(name).read_text())
