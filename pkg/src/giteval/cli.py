"""Command-line entry points.

Subcommands: attributes, densify, eval-ope, eval-rope, report. Every run
writes a manifest.json capturing all effective configuration, and
re-running a command with `--config manifest.json` reproduces the output
files byte for byte (the output directory itself is not part of the
manifest). Configuration precedence: built-in defaults, then the config
file (GITEVAL_CONFIG or --config), then command-line flags.

Exit code is 0 iff no sequence-level errors occurred; errors are
enumerated on standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import attributes as attr_mod
from . import dataset as ds
from . import densify as dens
from . import metrics as met
from .attributes import ThresholdConfig
from .protocol import ProtocolError, TcpListener, spawn_client
from .session import SessionAborted, SessionConfig, SessionResult, run_session

ROPE_METRICS = ("PRE", "NPRE", "SR_IOU")

GRIDS = {
    "PRE": {"lo": 0.0, "hi": 50.0, "points": 51},
    "NPRE": {"lo": 0.0, "hi": 1.0, "points": 101},
    "SR_IOU": {"lo": 0.0, "hi": 1.0, "points": 101},
    "SR_GIOU": {"lo": -1.0, "hi": 1.0, "points": 101},
    "SR_DIOU": {"lo": -1.0, "hi": 1.0, "points": 101},
}

DEFAULTS: dict = {
    "dataset": None,
    "results": None,
    "client": None,
    "listen": None,
    "jobs": 1,
    "tau1": 0.9,
    "tau2": 0.5,
    "tau_fail": 0.5,
    "timeout": 30.0,
    "thresholds": {},
    "metrics": list(met.METRIC_NAMES),
    "rank_metric": "SR_IOU",
    "attributes": list(attr_mod.FLAG_NAMES),
    "min_attribute_count": 10,
    "attributes_dir": None,
    "tracker_name": None,
    "manual": None,
    "keyframes": None,
    "forward": None,
    "backward": None,
    "shotcut": None,
    "inputs": [],
    "sigmoid": "logistic",
    "grids": GRIDS,
}


class CliError(Exception):
    pass


def _load_config_file(path: str, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_bytes().decode("utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CliError(f"config file {path} is not valid UTF-8 JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    declared = data.pop("command", None)
    if declared is not None and declared != command:
        raise CliError(
            f"config file {path} was written for {declared!r}, not {command!r}"
        )
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise CliError(f"unknown config keys in {path}: {sorted(unknown)}")
    return data


def effective_config(args: argparse.Namespace, command: str) -> dict:
    cfg = {key: value for key, value in DEFAULTS.items()}
    config_path = args.config or os.environ.get("GITEVAL_CONFIG")
    if config_path:
        cfg.update(_load_config_file(config_path, command))
    if getattr(args, "thresholds", None):
        overrides = _load_json(Path(args.thresholds), "thresholds file")
        if not isinstance(overrides, dict):
            raise CliError("thresholds file must hold a JSON object")
        cfg["thresholds"] = {**cfg["thresholds"], **overrides}
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and key != "thresholds":
            cfg[key] = value
    if cfg["sigmoid"] != "logistic":
        raise CliError(f"unsupported sigmoid {cfg['sigmoid']!r}; only 'logistic' exists")
    # normalize to the full effective threshold set so manifests are complete
    cfg["thresholds"] = ThresholdConfig.from_dict(cfg["thresholds"]).to_dict()
    cfg["grids"] = GRIDS
    return cfg


def _load_json(path: Path, what: str):
    try:
        return json.loads(path.read_bytes().decode("utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CliError(f"{what} {path} is not valid UTF-8 JSON: {exc}") from None


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_curve_csv(path: Path, curve: met.EvaluationCurve) -> None:
    lines = ["threshold,value"]
    lines += [
        f"{float(t)!r},{float(v)!r}" for t, v in zip(curve.thresholds, curve.values)
    ]
    _write_lines(path, lines)


def _write_manifest(out: Path, command: str, cfg: dict, keys: list[str]) -> None:
    manifest: dict = {"command": command}
    for key in keys:
        manifest[key] = cfg[key]
    _write_json(out / "manifest.json", manifest)


def _require(cfg: dict, key: str, flag: str):
    if cfg.get(key) in (None, ""):
        raise CliError(f"missing required option {flag}")
    return cfg[key]


def _sequence_dirs(dataset_root: str) -> list[Path]:
    root = Path(dataset_root)
    if not root.is_dir():
        raise CliError(f"dataset root {root} is not a directory")
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not dirs:
        raise CliError(f"dataset root {root} holds no sequence directories")
    return dirs


def _run_jobs(keys, fn, jobs: int):
    """Run fn over keys, jobs-wide; returns (results, errors) keyed
    deterministically regardless of scheduling."""
    results: dict = {}
    errors: list[tuple[str, str]] = []
    if jobs <= 1:
        for key in keys:
            try:
                results[key] = fn(key)
            except Exception as exc:
                errors.append((str(key), str(exc)))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {key: pool.submit(fn, key) for key in keys}
            for key, future in futures.items():
                try:
                    results[key] = future.result()
                except Exception as exc:
                    errors.append((str(key), str(exc)))
    return results, errors


def _report_errors(errors: list[tuple[str, str]]) -> int:
    for name, message in errors:
        print(f"error: {name}: {message}", file=sys.stderr)
    return 1 if errors else 0


# --- attributes -----------------------------------------------------------


def cmd_attributes(cfg: dict, out: Path) -> int:
    dataset_root = _require(cfg, "dataset", "--dataset")
    thresholds = ThresholdConfig.from_dict(cfg["thresholds"])
    seq_dirs = _sequence_dirs(dataset_root)

    def work(seq_dir: Path):
        record = ds.load_sequence(seq_dir)
        vectors = attr_mod.sequence_attributes(ds.iter_frames(record), record, thresholds)
        return record, vectors

    results, errors = _run_jobs(seq_dirs, work, cfg["jobs"])

    summary: dict = {"sequences": {}, "totals": {flag: 0 for flag in attr_mod.FLAG_NAMES}}
    for seq_dir in seq_dirs:
        if seq_dir not in results:
            continue
        record, vectors = results[seq_dir]
        _write_lines(out / f"{record.id}.csv", attr_mod.attribute_csv_lines(vectors))
        counts = {
            flag: sum(1 for vec in vectors if vec.flag(flag))
            for flag in attr_mod.FLAG_NAMES
        }
        summary["sequences"][record.id] = {"frames": len(vectors), "flags": counts}
        for flag, count in counts.items():
            summary["totals"][flag] += count
    _write_json(out / "summary.json", summary)
    _write_manifest(out, "attributes", cfg, ["dataset", "jobs", "thresholds"])
    return _report_errors(errors)


# --- densify ---------------------------------------------------------------


def _parse_keyframes(text: str) -> list[int]:
    indices = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        try:
            indices.append(int(line.strip()))
        except ValueError:
            raise CliError(
                f"keyframe file line {lineno}: expected an integer, got {line.strip()!r}"
            ) from None
    return indices


def cmd_densify(cfg: dict, out: Path) -> int:
    paths = {
        key: Path(_require(cfg, key, f"--{key}"))
        for key in ("manual", "keyframes", "forward", "backward")
    }
    try:
        manual_boxes = ds.parse_groundtruth(paths["manual"].read_text(encoding="utf-8"))
        keyframes = _parse_keyframes(paths["keyframes"].read_text(encoding="utf-8"))
        forward = ds.parse_results(paths["forward"].read_text(encoding="utf-8"), "forward")
        backward = ds.parse_results(paths["backward"].read_text(encoding="utf-8"), "backward")
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}") from None
    for lineno, box in enumerate(manual_boxes, start=1):
        if box is None:
            raise CliError(f"manual track line {lineno}: keyframe has no box")
    n = len(forward)
    if cfg["shotcut"]:
        shotcut = ds.parse_flags(Path(cfg["shotcut"]).read_text(encoding="utf-8"), n)
    else:
        shotcut = [False] * n

    track = dens.densify_sequence(
        keyframes, manual_boxes, forward, backward, shotcut, cfg["tau1"], cfg["tau2"]
    )
    (out / "dense.txt").parent.mkdir(parents=True, exist_ok=True)
    (out / "dense.txt").write_text(ds.serialize_track(track.boxes), encoding="utf-8")
    _write_lines(out / "provenance.csv", dens.provenance_csv_lines(track))
    _write_manifest(
        out,
        "densify",
        cfg,
        ["manual", "keyframes", "forward", "backward", "shotcut", "tau1", "tau2"],
    )
    return 0


# --- eval-ope ---------------------------------------------------------------


def _load_attribute_vectors(cfg: dict, seq_dir: Path, record) -> list | None:
    candidates = []
    if cfg["attributes_dir"]:
        candidates.append(Path(cfg["attributes_dir"]) / f"{record.id}.csv")
    candidates.append(seq_dir / "attributes.csv")
    for path in candidates:
        if path.is_file():
            vectors = attr_mod.parse_attribute_csv(path.read_text(encoding="utf-8"))
            if len(vectors) != len(record):
                raise CliError(
                    f"{path}: {len(vectors)} attribute rows for {len(record)} frames"
                )
            return vectors
    return None


def _pool_attribute_curves(subsets, min_count: int, metrics):
    pooled: dict = {}
    for flag, parts in subsets.items():
        if parts:
            scores = met.FrameScores(
                distance=np.concatenate([p.distance for p in parts]),
                npre=np.concatenate([p.npre for p in parts]),
                iou=np.concatenate([p.iou for p in parts]),
                giou=np.concatenate([p.giou for p in parts]),
                diou=np.concatenate([p.diou for p in parts]),
            )
            count = int(scores.iou.size)
        else:
            scores, count = None, 0
        if count < min_count:
            pooled[flag] = met.AttributeBreakdown(flag, count, None)
        else:
            pooled[flag] = met.AttributeBreakdown(
                flag, count, met.curves_from_scores(scores, metrics)
            )
    return pooled


def _curve_summary(curve: met.EvaluationCurve) -> dict:
    return {"auc": float(curve.auc), "rank_score": float(curve.rank_score)}


def cmd_eval_ope(cfg: dict, out: Path) -> int:
    dataset_root = _require(cfg, "dataset", "--dataset")
    results_root = Path(_require(cfg, "results", "--results"))
    if cfg["client"] or cfg["listen"]:
        raise CliError("eval-ope reads result files; --client/--listen are for eval-rope")
    if not results_root.is_dir():
        raise CliError(f"results root {results_root} is not a directory")
    metrics = cfg["metrics"]
    errors: list[tuple[str, str]] = []

    seq_dirs = _sequence_dirs(dataset_root)
    records: dict = {}
    attr_vectors: dict = {}
    for seq_dir in seq_dirs:
        try:
            record = ds.load_sequence(seq_dir)
            records[record.id] = record
            attr_vectors[record.id] = _load_attribute_vectors(cfg, seq_dir, record)
        except (ds.DatasetError, CliError, ValueError) as exc:
            errors.append((seq_dir.name, str(exc)))

    trackers = sorted(p.name for p in results_root.iterdir() if p.is_dir())
    if not trackers:
        raise CliError(f"results root {results_root} holds no tracker directories")

    summary: dict = {
        "mechanism": "OPE",
        "rank_metric": cfg["rank_metric"],
        "trackers": {},
    }
    rankable: list[tuple[str, float]] = []
    for tracker in trackers:
        evaluations = []
        sequences_summary: dict = {}
        attr_subsets: dict = {flag: [] for flag in cfg["attributes"]}
        missing_attrs: list[str] = []
        for seq_id in sorted(records):
            record = records[seq_id]
            result_path = results_root / tracker / f"{seq_id}.txt"
            if not result_path.is_file():
                errors.append((f"{tracker}/{seq_id}", f"missing result file {result_path}"))
                continue
            try:
                result = ds.parse_results(
                    result_path.read_bytes().decode("utf-8"), seq_id
                )
                evaluation = met.evaluate_ope(record, result, metrics)
            except (ds.DatasetError, met.MetricsError, UnicodeDecodeError) as exc:
                errors.append((f"{tracker}/{seq_id}", str(exc)))
                continue
            evaluations.append(evaluation)
            sequences_summary[seq_id] = {
                name: _curve_summary(curve) for name, curve in evaluation.curves.items()
            }
            vectors = attr_vectors.get(seq_id)
            if vectors is None:
                missing_attrs.append(seq_id)
                continue
            for flag in cfg["attributes"]:
                mask = np.array(
                    [vectors[f - 1].flag(flag) for f in evaluation.eligible_frames],
                    dtype=bool,
                )
                if mask.any():
                    attr_subsets[flag].append(met.subset_scores(evaluation.scores, mask))
        if not evaluations:
            errors.append((tracker, "no sequences evaluated"))
            continue
        agg = met.aggregate(evaluations, metrics)
        for name, curve in agg.curves.items():
            _write_curve_csv(out / "curves" / tracker / f"{name}.csv", curve)
        breakdowns = _pool_attribute_curves(
            attr_subsets, cfg["min_attribute_count"], metrics
        )
        attr_summary: dict = {}
        for flag, breakdown in sorted(breakdowns.items()):
            entry: dict = {"frames": breakdown.frame_count}
            if breakdown.curves is None:
                entry["insufficient"] = True
            else:
                for name, curve in breakdown.curves.items():
                    entry[name] = _curve_summary(curve)
                    _write_curve_csv(
                        out / "curves" / tracker / f"attr_{flag}_{name}.csv", curve
                    )
            attr_summary[flag] = entry
        summary["trackers"][tracker] = {
            "frames": agg.total_frames,
            "aggregate": {n: _curve_summary(c) for n, c in agg.curves.items()},
            "per_sequence_mean": agg.per_sequence_mean,
            "sequences": sequences_summary,
            "attributes": attr_summary,
            "attributes_missing": sorted(missing_attrs),
        }
        rank_curve = agg.curves.get(cfg["rank_metric"])
        if rank_curve is None:
            raise CliError(f"rank metric {cfg['rank_metric']!r} not among {metrics}")
        rankable.append((tracker, float(rank_curve.rank_score)))

    _write_json(out / "summary.json", summary)
    _write_lines(
        out / "ranking.md",
        _ranking_table("OPE", cfg["rank_metric"], summary["trackers"], rankable),
    )
    _write_manifest(
        out,
        "eval-ope",
        cfg,
        [
            "dataset",
            "results",
            "jobs",
            "metrics",
            "rank_metric",
            "attributes",
            "min_attribute_count",
            "attributes_dir",
            "grids",
        ],
    )
    return _report_errors(errors)


def _ranking_table(
    mechanism: str, rank_metric: str, trackers: dict, rankable: list[tuple[str, float]]
) -> list[str]:
    ordered = sorted(rankable, key=lambda item: (-item[1], item[0]))
    lines = [
        f"# {mechanism} ranking",
        "",
        f"Ranked by {rank_metric} rank score; rank 1/2/3 are the "
        "red/blue/green rows of the plot convention.",
        "",
        "| Rank | Tracker | " + " | ".join(met.METRIC_NAMES) + " |",
        "|---:|---|" + "---:|" * len(met.METRIC_NAMES),
    ]
    for rank, (tracker, _) in enumerate(ordered, start=1):
        entry = trackers[tracker]["aggregate"]
        cells = [
            f"{entry[name]['rank_score']:.4f}" if name in entry else "-"
            for name in met.METRIC_NAMES
        ]
        lines.append(f"| {rank} | {tracker} | " + " | ".join(cells) + " |")
    return lines


# --- eval-rope ---------------------------------------------------------------


def _session_json(result: SessionResult) -> dict:
    return {
        "sequence": result.sequence_id,
        "schedule_size": result.schedule_size,
        "restarts_used": result.restarts_used,
        "restarts": [list(pair) for pair in result.restarts],
        "skipped": list(result.skipped),
        "rho": result.rho,
        "scored": [
            [
                frame,
                [float(v) for v in score.box.as_tuple()],
                float(score.iou),
                float(score.distance),
                float(score.npre),
            ]
            for frame, score in sorted(result.scored.items())
        ],
    }


def _rope_curves(sessions: list[SessionResult]) -> dict[str, met.EvaluationCurve]:
    distances, npres, ious = [], [], []
    for session in sessions:
        for _, score in sorted(session.scored.items()):
            distances.append(score.distance)
            npres.append(score.npre)
            ious.append(score.iou)
    if not ious:
        raise met.MetricsError("no scored frames across sessions")
    return {
        "PRE": met.precision_curve(distances),
        "NPRE": met.npre_curve(npres),
        "SR_IOU": met.success_curve(ious, (0.0, 1.0), "SR_IOU"),
    }


def cmd_eval_rope(cfg: dict, out: Path) -> int:
    dataset_root = _require(cfg, "dataset", "--dataset")
    if bool(cfg["client"]) == bool(cfg["listen"]):
        raise CliError("eval-rope needs exactly one of --client or --listen")
    if cfg["results"]:
        raise CliError("eval-rope runs a live client; --results is for eval-ope")
    tracker_name = cfg["tracker_name"] or (
        Path(str(cfg["client"]).split()[0]).name if cfg["client"] else "listener"
    )
    session_config = SessionConfig(tau_fail=cfg["tau_fail"], timeout=cfg["timeout"])
    errors: list[tuple[str, str]] = []
    sessions: list[SessionResult] = []

    listener = None
    if cfg["listen"]:
        host, _, port = str(cfg["listen"]).rpartition(":")
        if not host:
            raise CliError("--listen expects host:port")
        listener = TcpListener(host, int(port))
    try:
        for seq_dir in _sequence_dirs(dataset_root):
            try:
                record = ds.load_sequence(seq_dir)
            except ds.DatasetError as exc:
                errors.append((seq_dir.name, str(exc)))
                continue
            if not record.restart_schedule:
                print(
                    f"warning: {record.id}: no restart schedule, skipping",
                    file=sys.stderr,
                )
                continue
            try:
                if listener is not None:
                    transport = listener.accept(timeout=cfg["timeout"])
                else:
                    transport = spawn_client(cfg["client"])
                with transport:
                    result = run_session(record, transport, session_config)
            except (SessionAborted, ProtocolError, OSError) as exc:
                errors.append((record.id, str(exc)))
                continue
            try:
                result.rho = met.sequence_correlation(record)
            except Exception as exc:
                warnings.warn(
                    f"{record.id}: correlation unavailable ({exc}); assuming 1.0",
                    RuntimeWarning,
                )
                result.rho = 1.0
            sessions.append(result)
            _write_json(out / "sessions" / f"{record.id}.json", _session_json(result))
    finally:
        if listener is not None:
            listener.close()

    summary: dict = {"mechanism": "R-OPE", "tracker": tracker_name}
    if sessions:
        report = met.robustness(
            [(s.rho, s.schedule_size, s.restarts_used) for s in sessions]
        )
        summary["robustness"] = {
            "R": report.r,
            "weight": report.weight_name,
            "videos": {
                s.sequence_id: {
                    "rho": video.rho,
                    "schedule_size": video.schedule_size,
                    "restarts_used": video.restarts_used,
                    "contribution": video.contribution,
                }
                for s, video in zip(sessions, report.videos)
            },
        }
        try:
            curves = _rope_curves(sessions)
        except met.MetricsError as exc:
            errors.append((tracker_name, str(exc)))
            curves = {}
        summary["curves"] = {name: _curve_summary(c) for name, c in curves.items()}
        for name, curve in curves.items():
            _write_curve_csv(out / "curves" / f"{name}.csv", curve)
        summary["sessions"] = {
            s.sequence_id: {
                "schedule_size": s.schedule_size,
                "restarts_used": s.restarts_used,
                "scored_frames": len(s.scored),
                "skipped_frames": len(s.skipped),
                "rho": s.rho,
            }
            for s in sessions
        }
    else:
        errors.append((tracker_name, "no sessions completed"))
    _write_json(out / "summary.json", summary)
    _write_manifest(
        out,
        "eval-rope",
        cfg,
        [
            "dataset",
            "client",
            "listen",
            "jobs",
            "tau_fail",
            "timeout",
            "tracker_name",
            "sigmoid",
            "grids",
        ],
    )
    return _report_errors(errors)


# --- report ------------------------------------------------------------------


def cmd_report(cfg: dict, out: Path) -> int:
    inputs = [Path(p) for p in cfg["inputs"]]
    if not inputs:
        raise CliError("report needs at least one evaluation output directory")
    merged: dict = {"inputs": [str(p) for p in inputs], "tables": {}, "curve_index": []}
    rows: list[dict] = []
    for input_dir in inputs:
        summary_path = input_dir / "summary.json"
        if not summary_path.is_file():
            raise CliError(f"{input_dir} holds no summary.json")
        summary = _load_json(summary_path, "summary")
        mechanism = summary.get("mechanism", "?")
        if "trackers" in summary:
            for tracker, entry in summary["trackers"].items():
                row = {"tracker": tracker, "mechanism": mechanism}
                for name, stats in entry.get("aggregate", {}).items():
                    row[name] = stats["rank_score"]
                rows.append(row)
        else:
            row = {"tracker": summary.get("tracker", "?"), "mechanism": mechanism}
            for name, stats in summary.get("curves", {}).items():
                row[name] = stats["rank_score"]
            if "robustness" in summary:
                row["ROBUSTNESS"] = summary["robustness"]["R"]
            rows.append(row)
        merged["curve_index"] += sorted(
            str(p.relative_to(input_dir)) for p in input_dir.rglob("*.csv")
        )

    metric_names = list(met.METRIC_NAMES) + ["ROBUSTNESS"]
    for name in metric_names:
        scored_rows = [r for r in rows if name in r]
        if not scored_rows:
            continue
        ordered = sorted(scored_rows, key=lambda r: (-r[name], r["tracker"]))
        merged["tables"][name] = [
            {
                "rank": rank,
                "tracker": row["tracker"],
                "mechanism": row["mechanism"],
                "score": row[name],
            }
            for rank, row in enumerate(ordered, start=1)
        ]

    lines = ["# Evaluation report", ""]
    for name, table in merged["tables"].items():
        lines += [f"## {name}", "", "| Rank | Tracker | Mechanism | Score |", "|---:|---|---|---:|"]
        lines += [
            f"| {row['rank']} | {row['tracker']} | {row['mechanism']} | {row['score']:.4f} |"
            for row in table
        ]
        lines.append("")
    lines += ["## Curve CSV index", ""]
    lines += [f"- {path}" for path in merged["curve_index"]]
    _write_lines(out / "report.md", lines)
    _write_json(out / "report.json", merged)
    _write_manifest(out, "report", cfg, ["inputs"])
    return 0


# --- argument parsing ---------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (or set GITEVAL_CONFIG)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--jobs", type=int, help="parallel sequence workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="giteval",
        description="Evaluation engine for long-term global instance tracking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attributes", help="compute per-frame challenge attributes")
    _add_common(p)
    p.add_argument("--dataset", help="dataset root (one directory per sequence)")
    p.add_argument("--thresholds", help="JSON file of threshold overrides")

    p = sub.add_parser("densify", help="densify sparse manual annotations")
    _add_common(p)
    p.add_argument("--manual", help="manual keyframe track file")
    p.add_argument("--keyframes", help="1-based keyframe index file")
    p.add_argument("--forward", help="forward-pass result track")
    p.add_argument("--backward", help="backward-pass result track")
    p.add_argument("--shotcut", help="shot-cut flag file")
    p.add_argument("--tau1", type=float, help="manual-agreement DIoU gate")
    p.add_argument("--tau2", type=float, help="pass-agreement DIoU gate")

    p = sub.add_parser("eval-ope", help="one-pass evaluation from result files")
    _add_common(p)
    p.add_argument("--dataset", help="dataset root")
    p.add_argument("--results", help="results root (one directory per tracker)")
    p.add_argument(
        "--attribute",
        dest="attributes",
        action="append",
        help="attribute flag to break down (repeatable; default all)",
    )
    p.add_argument("--attributes-dir", dest="attributes_dir", help="attribute CSV directory")

    p = sub.add_parser("eval-rope", help="restart-driven interactive evaluation")
    _add_common(p)
    p.add_argument("--dataset", help="dataset root")
    p.add_argument("--client", help="tracker client command (child process over pipes)")
    p.add_argument("--listen", help="host:port to await a TCP client per sequence")
    p.add_argument("--tau-fail", dest="tau_fail", type=float, help="failure IoU threshold")
    p.add_argument("--tracker-name", dest="tracker_name", help="label for reports")

    p = sub.add_parser("report", help="merge evaluation outputs into one report")
    _add_common(p)
    p.add_argument("inputs", nargs="*", help="evaluation output directories")

    return parser


COMMANDS = {
    "attributes": cmd_attributes,
    "densify": cmd_densify,
    "eval-ope": cmd_eval_ope,
    "eval-rope": cmd_eval_rope,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "inputs", None) == []:
        args.inputs = None  # let the config file supply them
    try:
        cfg = effective_config(args, args.command)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except (CliError, ds.DatasetError, dens.DensifyError, met.MetricsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
