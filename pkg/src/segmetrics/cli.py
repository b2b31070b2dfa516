"""Command-line front end.

    segmetrics analyze --network net.json --rules rules.csv [--scan scan.json] --out DIR
    segmetrics compare --network net.json --flat-rules flat.csv --seg-rules seg.csv [--scan scan.json] --out DIR
    segmetrics synth --config synth.json --out DIR
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from . import ingest, pipeline, report, synth
from .model import MAX_PORT, SpecError, protocol_universe, validate_policy

log = logging.getLogger("segmetrics")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True, type=Path, help="network spec (JSON)")
    p.add_argument("--scan", type=Path, help="scan file (JSON findings or .nessus XML)")
    p.add_argument("--out", type=Path, default=Path("report"), help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--protocols", type=int, default=3, help="protocol universe size")
    p.add_argument("--port-space", type=int, default=MAX_PORT)
    p.add_argument("--count-vertices", action="store_true",
                   help="measure connectivity path length in vertices instead of hops")
    p.add_argument("--risk-method", choices=("auto", "exact", "iterative"), default="auto")
    p.add_argument("--export-graph", action="store_true", help="also write attack graph JSON and dot files")
    p.add_argument("--no-plots", action="store_true", help="skip the PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segmetrics", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="metrics for one policy")
    _common(a)
    a.add_argument("--rules", type=Path, help="rule table (CSV); optional in flat mode")
    a.add_argument("--mode", choices=("flat", "segmented"))
    a.add_argument("--robustness", action="store_true", help="require robustness analysis (needs --scan)")

    c = sub.add_parser("compare", help="flat versus segmented comparison")
    _common(c)
    c.add_argument("--flat-rules", type=Path, help="flat rule table; defaults to the generic rule only")
    c.add_argument("--seg-rules", required=True, type=Path)

    s = sub.add_parser("synth", help="generate a synthetic enterprise")
    s.add_argument("--config", type=Path, help="synth config (JSON); defaults if omitted")
    s.add_argument("--seed", type=int, help="override the config seed")
    s.add_argument("--out", type=Path, default=Path("synth"))
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None


def _load(args):
    universe = protocol_universe(args.protocols)
    spec = ingest.parse_network(_read(args.network), universe)
    scan = ingest.parse_scan(_read(args.scan), spec) if args.scan else None
    return universe, spec, scan


def _emit(args, written: list[Path]) -> None:
    for path in written:
        print(path)


def cmd_analyze(args) -> int:
    if args.robustness and not args.scan:
        raise SpecError("--robustness needs --scan")
    universe, spec, scan = _load(args)
    if args.rules:
        policy = ingest.parse_rules(_read(args.rules), universe, args.mode, args.port_space)
    elif args.mode == "flat":
        policy = ingest.flat_policy(port_space=args.port_space)
    else:
        raise SpecError("--rules is required unless --mode flat")
    result = pipeline.analyze(spec, policy, scan, universe, args.count_vertices, args.risk_method)
    written = report.write_analysis(args.out, result, args.format)
    if args.export_graph and result.attack_graph is not None:
        (args.out / "attack_graph.json").write_text(result.attack_graph.to_json())
        (args.out / "attack_graph.dot").write_text(result.attack_graph.to_dot())
        written += [args.out / "attack_graph.json", args.out / "attack_graph.dot"]
    if not args.no_plots:
        from .plotting import plot_reports
        written += plot_reports(args.out, [result])
    _emit(args, written)
    return 0


def cmd_compare(args) -> int:
    universe, spec, scan = _load(args)
    if args.flat_rules:
        flat = ingest.parse_rules(_read(args.flat_rules), universe, "flat", args.port_space)
        problems = validate_policy(flat, spec)
        if problems:
            raise SpecError(f"{args.flat_rules}: " + "; ".join(v.message for v in problems))
    else:
        flat = ingest.flat_policy(port_space=args.port_space)
    seg = ingest.parse_rules(_read(args.seg_rules), universe, "segmented", args.port_space)
    cmp = pipeline.compare(spec, flat, seg, scan, universe=universe,
                           count_vertices=args.count_vertices, risk_method=args.risk_method)
    written = report.write_comparison(args.out, cmp, args.format)
    if args.export_graph:
        for r in (cmp.flat, cmp.segmented):
            if r.attack_graph is not None:
                p = args.out / f"attack_graph_{r.mode}.json"
                p.write_text(r.attack_graph.to_json())
                written.append(p)
    if not args.no_plots:
        from .plotting import plot_comparison
        written += plot_comparison(args.out, cmp)
    _emit(args, written)
    for key, value in cmp.improvement_percentages.items():
        if value is not None:
            print(f"{key}\t{value:.2f}%")
    return 0


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig.from_json(_read(args.config)) if args.config else synth.SynthConfig()
    if args.seed is not None:
        cfg = synth.SynthConfig(**{**cfg.__dict__, "seed": args.seed})
    net = synth.generate(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    files = {
        "network.json": ingest.emit_network(net.spec),
        "rules_flat.csv": ingest.emit_rules(net.flat),
        "rules_segmented.csv": ingest.emit_rules(net.segmented),
        "scan.json": ingest.emit_scan(net.scan),
    }
    for name, text in files.items():
        (args.out / name).write_text(text)
        print(args.out / name)
    print(f"hosts={len(net.spec.hosts)} services={len(net.spec.services)} "
          f"segmented_rules={len(net.segmented.rules)} findings={len(net.scan.records)}")
    return 0


COMMANDS = {"analyze": cmd_analyze, "compare": cmd_compare, "synth": cmd_synth}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
