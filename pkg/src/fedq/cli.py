"""Command-line entry points.

Subcommands::

    fedq run   <manifest.json>  [--threads N] [--output-dir DIR]
    fedq sweep <manifest.json>  [--threads N] [--output-dir DIR]
    fedq qstar <map> --gamma G  [--tol T] [--output-dir DIR]

``run`` executes a single-point manifest (it refuses manifests that
declare sweep axes); ``sweep`` expands the axes into a grid.  The output
root falls back to the FEDQ_OUTPUT_ROOT environment variable and then to
``./runs``.  Exit codes: 0 success, 2 configuration error, 1 runtime
error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import FedqError, ParamOutOfRangeError
from .harness import RunManifest, compute_qstar, run_experiment


def _load_manifest(path: str, output_dir: str | None) -> RunManifest:
    manifest = RunManifest.from_file(path)
    if output_dir:
        manifest = dataclasses.replace(manifest, output_dir=output_dir)
    return manifest


def _cmd_run(args: argparse.Namespace) -> int:
    manifest = _load_manifest(args.manifest, args.output_dir)
    if manifest.sweep:
        raise ParamOutOfRangeError("manifest declares sweep axes; use 'fedq sweep'")
    written = run_experiment(manifest, threads=args.threads)
    for path in written:
        print(path)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    manifest = _load_manifest(args.manifest, args.output_dir)
    written = run_experiment(manifest, threads=args.threads)
    for path in written:
        print(path)
    return 0


def _cmd_qstar(args: argparse.Namespace) -> int:
    q_path, p_path = compute_qstar(args.map, args.gamma, args.tol, args.output_dir or "runs")
    print(q_path)
    print(p_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("run", _cmd_run), ("sweep", _cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} a manifest")
        p.add_argument("manifest", help="path to a JSON manifest")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results are identical for any value)")
        p.add_argument("--output-dir", default=None, help="override the manifest output directory")
        p.set_defaults(fn=fn)

    p = sub.add_parser("qstar", help="compute and export the fixed-point oracle for a map")
    p.add_argument("map", help="bundled map name or map file path")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(fn=_cmd_qstar)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParamOutOfRangeError, FileNotFoundError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"fedq: configuration error: {exc}", file=sys.stderr)
        return 2
    except FedqError as exc:
        print(f"fedq: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
