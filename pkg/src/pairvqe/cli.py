"""Command-line front end: scan manifests, resource counts, populations."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import load_manifest, report_populations, resource_counts, run_scan


def _apply_overrides(manifest, args):
    vqe = manifest.vqe
    if args.seed is not None:
        vqe = replace(vqe, seed=args.seed)
    if args.shots is not None:
        vqe = replace(vqe, shots=args.shots)
    if args.mode is not None:
        vqe = replace(vqe, mode=args.mode, optimizer=None, energy_tolerance=None)
    manifest = replace(manifest, vqe=vqe)
    if args.workers is not None:
        manifest = replace(manifest, workers=args.workers)
    return manifest


def _cmd_scan(args) -> int:
    manifest = _apply_overrides(load_manifest(args.manifest), args)
    if args.output is not None:
        manifest = replace(manifest, output=args.output)
    report = run_scan(manifest)
    if manifest.output is None:
        sys.stdout.write(report.to_csv())
    for row in report.rows:
        status = "ok" if row.error is None else f"FAILED ({row.error})"
        logging.info("%-10s %7.1fs %s", row.label, row.wall_time, status)
    return 0 if report.ok else 1


def _cmd_resources(args) -> int:
    counts = resource_counts(args.occ, args.vir, args.depth)
    print(f"qubits={counts.qubits} parameters={counts.parameters} "
          f"two_qubit_gates={counts.two_qubit_gates}")
    return 0


def _cmd_populations(args) -> int:
    manifest = _apply_overrides(load_manifest(args.manifest), args)
    report = report_populations(manifest, args.geometry, args.top)
    text = report.to_csv()
    if args.output:
        Path(args.output).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairvqe",
                                     description="pair-correlated VQE scans over FCIDUMP fixtures")
    parser.add_argument("--verbose", "-v", action="store_true", help="chatty logging")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the optimizer seed")
    common.add_argument("--shots", type=int, default=None, help="override the shot count")
    common.add_argument("--mode", choices=("exact", "sampled"), default=None,
                        help="override the evaluation mode")
    common.add_argument("--workers", type=int, default=None, help="parallel geometries")

    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", parents=[common], help="run a manifest scan")
    scan.add_argument("manifest", help="TOML manifest path")
    scan.add_argument("--output", default=None, help="CSV destination (default: manifest setting)")
    scan.set_defaults(func=_cmd_scan)

    res = sub.add_parser("resources", help="circuit resource counts")
    res.add_argument("--occ", type=int, required=True)
    res.add_argument("--vir", type=int, required=True)
    res.add_argument("--depth", type=int, default=1)
    res.set_defaults(func=_cmd_resources)

    pops = sub.add_parser("populations", parents=[common],
                          help="seniority-zero populations, pair state vs FCI")
    pops.add_argument("manifest", help="TOML manifest path")
    pops.add_argument("--geometry", required=True, help="scan point label")
    pops.add_argument("--top", type=int, default=5)
    pops.add_argument("--output", default=None)
    pops.set_defaults(func=_cmd_populations)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
