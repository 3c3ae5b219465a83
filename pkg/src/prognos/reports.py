"""Report, log, and CSV emission plus the scoring of a run against truth.

All outputs are deterministic: identical inputs and configuration produce
byte-identical files (floats are written with round-trip ``repr``, no
timestamps).
"""

from __future__ import annotations

import csv
from pathlib import Path

from .exceptions import PredictionAfterFailureError, RunMismatchError
from .kvformat import format_kv, parse_kv
from .pipeline import PairRecord, RunResult
from .prognosis import lead_percentage


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_pairs_csv(result: RunResult, path: str | Path) -> None:
    """Per-pair summary: triggers, per-dimension chains, residual means."""
    n_dims = result.config.n_dims
    header = [
        "t",
        "frame_prev",
        "frame_cur",
        "n_valid",
        "system_pd",
        "chain_trigger",
        "energy_trigger",
        "gti",
        "drop_count",
    ]
    for d in range(n_dims):
        header += [
            f"max_chain_d{d}",
            f"critical_short_d{d}",
            f"critical_long_d{d}",
            f"mean_residual_d{d}",
        ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in result.records:
            row = [
                rec.t,
                rec.frame_prev,
                rec.frame_cur,
                rec.n_valid,
                int(rec.system_pd),
                int(rec.chain_triggered),
                int(rec.energy_triggered),
                _fmt(rec.gti),
                rec.drop_count,
            ]
            for d in range(n_dims):
                row += [
                    int(rec.max_chain[d].max()),
                    _fmt(float(rec.critical_short[d].min())),
                    _fmt(float(rec.critical_long[d].min())),
                    _fmt(float(rec.residual[d].mean())),
                ]
            writer.writerow(row)


def write_datum_csv(result: RunResult, path: str | Path) -> None:
    """Datum-fit diagnostics per pair per dimension."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "dim", "retained", "dropped", "m_bar", "rms_residual"])
        for rec in result.records:
            for d in range(result.config.n_dims):
                writer.writerow(
                    [
                        rec.t,
                        d,
                        int(rec.datum_retained[d]),
                        int(rec.datum_dropped[d]),
                        _fmt(float(rec.datum_m_bar[d])),
                        _fmt(float(rec.datum_rms[d])),
                    ]
                )


def write_pdi_histogram_csv(result: RunResult, path: str | Path) -> None:
    """Fraction of roots per PDI category per dimension per pair."""
    n_dims = result.config.n_dims
    header = ["t", "dim"] + [f"cat{c}" for c in range(1, 10)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in result.records:
            for d in range(n_dims):
                writer.writerow(
                    [rec.t, d] + [_fmt(float(v)) for v in rec.pdi_hist[d]]
                )


def write_profiles_csv(result: RunResult, path: str | Path) -> None:
    """Zoom-out profile dump: level factor and curvature statistics."""
    header = [
        "t",
        "dim",
        "root",
        "level",
        "factor",
        "mean_abs_kappa",
        "mean_kappa_short",
        "mean_kappa_long",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in result.records:
            n_levels, n_dims, n_roots = rec.mean_abs_kappa.shape
            for d in range(n_dims):
                for k in range(n_roots):
                    for lv in range(n_levels):
                        writer.writerow(
                            [
                                rec.t,
                                d,
                                k,
                                lv,
                                _fmt(float(rec.factors[lv])),
                                _fmt(float(rec.mean_abs_kappa[lv, d, k])),
                                _fmt(float(rec.mean_kappa_short[lv, d, k])),
                                _fmt(float(rec.mean_kappa_long[lv, d, k])),
                            ]
                        )


def write_trigger_log(records: list[PairRecord], path: str | Path) -> None:
    """Line-oriented event log: ``t=.. event=.. dim=.. root=.. value=..``."""
    lines = []
    for rec in records:
        for event, dim, root, value in rec.events:
            lines.append(
                f"t={rec.t} event={event} dim={dim} root={root} value={_fmt(value)}"
            )
    Path(path).write_text("".join(line + "\n" for line in lines))


def _indices(values: list[int]) -> str:
    return ",".join(str(v) for v in values) if values else "none"


def write_report(result: RunResult, run_id: str, path: str | Path) -> None:
    """Final prognosis report with the full configuration in the header."""
    items: dict[str, object] = {"run": run_id}
    for key, value in result.config.as_dict().items():
        items[f"config.{key}"] = value
    items.update(
        {
            "pairs": result.n_pairs,
            "onset_index": result.onset_index if result.onset_index is not None else "none",
            "chain_trigger_indices": _indices(result.state.chain_trigger_indices),
            "energy_trigger_indices": _indices(result.state.energy_trigger_indices),
            "gti": _fmt(result.state.gti),
            "prediction_index": (
                result.prediction_index if result.prediction_index is not None else "none"
            ),
            "predicted_frame": (
                result.predicted_frame if result.predicted_frame is not None else "none"
            ),
        }
    )
    Path(path).write_text(format_kv(items))


def read_report(path: str | Path) -> dict[str, str]:
    return parse_kv(Path(path).read_text())


def write_all(result: RunResult, run_id: str, outdir: str | Path) -> Path:
    """Emit the full report bundle into a directory; returns the report path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_pairs_csv(result, outdir / "pairs.csv")
    write_datum_csv(result, outdir / "datum.csv")
    write_pdi_histogram_csv(result, outdir / "pdi_histogram.csv")
    write_profiles_csv(result, outdir / "profiles.csv")
    write_trigger_log(result.records, outdir / "triggers.log")
    report = outdir / "report.txt"
    write_report(result, run_id, report)
    return report


def score_run(report: dict[str, str], manifest: dict[str, str]) -> dict[str, object]:
    """Classify a run against its ground truth.

    Outcomes: ``lead`` (prediction before a real burst, with the lead
    percentage and whether it falls in the 0-30% band), ``miss`` (burst with
    no or late prediction), ``false_positive`` (prediction on a no-failure
    run), ``true_negative`` (clean no-failure run).
    """
    if report.get("run") != manifest.get("run_id"):
        raise RunMismatchError(
            f"report run {report.get('run')!r} does not match manifest "
            f"{manifest.get('run_id')!r}"
        )
    label = manifest.get("label")
    predicted = report.get("predicted_frame", "none")
    has_prediction = predicted not in ("none", "", None)
    out: dict[str, object] = {"run": report.get("run"), "label": label}
    if label == "burst":
        actual = int(manifest["burst_frame"])
        out["burst_frame"] = actual
        if not has_prediction:
            out["outcome"] = "miss"
            return out
        pred = int(predicted)
        out["predicted_frame"] = pred
        try:
            lead = lead_percentage(pred, actual)
        except PredictionAfterFailureError:
            out["outcome"] = "miss"
            return out
        if pred >= actual:
            out["outcome"] = "miss"
            return out
        out["outcome"] = "lead"
        out["lead_percent"] = lead
        out["within_band"] = bool(0.0 <= lead <= 30.0)
        return out
    if has_prediction:
        out["outcome"] = "false_positive"
        out["predicted_frame"] = int(predicted)
    else:
        out["outcome"] = "true_negative"
    return out
