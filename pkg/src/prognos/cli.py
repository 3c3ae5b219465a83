"""Command line interface: analyze a frame directory, generate synthetic
sequences, and score reports against ground truth.

    prognos analyze <dir> [--out DIR] [flags...]
    prognos synth <scenario> <outdir>
    prognos score <report> <manifest>

Flags mirror the engine configuration; a flat ``key = value`` config file
can supply any of them, with command line flags taking precedence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .detector import InstabilityDetector
from .exceptions import PrognosError
from .kvformat import format_kv, parse_kv
from .reports import read_report, score_run, write_all
from .synth import read_manifest, read_scenario, write_sequence

_CONFIG_KEYS = {
    "stride": int,
    "window": str,
    "drop_threshold": float,
    "root_vote_fraction": float,
    "drop_vote_fraction": float,
    "chain_recalc": str,
    "phi_grid": str,
    "eps_denominator": float,
    "eps_delta_h": float,
    "n_dims": int,
    "datum_fallback_zero": lambda s: s.lower() in ("1", "true", "yes"),
}


def _parse_window(text: str):
    if text in ("full", "none", ""):
        return None
    try:
        rows, cols = text.split(",")
        r0, r1 = (int(v) for v in rows.split(":"))
        c0, c1 = (int(v) for v in cols.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"window must look like r0:r1,c0:c1, got {text!r}"
        ) from None
    return (r0, r1, c0, c1)


def _parse_phi_grid(text: str):
    return tuple(float(p) for p in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prognos",
        description="Instability prognosis over XYZM point-grid frame sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the pipeline over a frame directory")
    analyze.add_argument("frame_dir", type=Path)
    analyze.add_argument("--out", type=Path, default=Path("prognos_out"))
    analyze.add_argument("--config", type=Path, default=None)
    analyze.add_argument("--stride", type=int, default=None)
    analyze.add_argument("--window", type=_parse_window, default=None)
    analyze.add_argument("--drop-threshold", type=float, default=None)
    analyze.add_argument("--root-vote-fraction", type=float, default=None)
    analyze.add_argument("--drop-vote-fraction", type=float, default=None)
    analyze.add_argument("--chain-recalc", choices=("every", "once"), default=None)
    analyze.add_argument("--phi-grid", type=_parse_phi_grid, default=None)
    analyze.add_argument("--n-dims", type=int, default=None)
    analyze.add_argument(
        "--datum-fallback-zero", action="store_true", default=None
    )

    synth = sub.add_parser("synth", help="generate a synthetic sequence")
    synth.add_argument("scenario", type=Path)
    synth.add_argument("outdir", type=Path)

    score = sub.add_parser("score", help="score a report against a manifest")
    score.add_argument("report", type=Path)
    score.add_argument("manifest", type=Path)
    return parser


def _detector_from(args: argparse.Namespace) -> InstabilityDetector:
    params: dict[str, object] = {}
    if args.config is not None:
        raw = parse_kv(Path(args.config).read_text())
        for key, value in raw.items():
            if key not in _CONFIG_KEYS:
                raise PrognosError(f"unknown config key {key!r}")
            parsed = _CONFIG_KEYS[key](value)
            if key == "window":
                parsed = _parse_window(value)
            elif key == "phi_grid":
                parsed = _parse_phi_grid(value)
            params[key] = parsed
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            params[key] = flag
    return InstabilityDetector(**params)


def cmd_analyze(args: argparse.Namespace) -> int:
    detector = _detector_from(args)
    detector.fit(args.frame_dir)
    report_path = write_all(detector.result_, Path(args.frame_dir).name, args.out)
    summary = detector.decision_path()
    if summary["predicted_frame"] is not None:
        print(
            f"prediction: frame {summary['predicted_frame']} "
            f"(time index {summary['prediction_index']})"
        )
    else:
        print("no prediction")
    print(f"report: {report_path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    manifest = write_sequence(scenario, args.outdir)
    print(f"manifest: {manifest}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    outcome = score_run(read_report(args.report), read_manifest(args.manifest))
    sys.stdout.write(format_kv(outcome))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_score(args)
    except PrognosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
