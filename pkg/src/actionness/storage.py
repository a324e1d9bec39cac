"""JSON and CSV serialization for signals, annotations, labels, and reports.

All writers serialize deterministically (sorted keys, fixed layout) and
replace the target file atomically, so identical inputs yield byte-identical
outputs.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adm import PseudoLabel
from .decoder import Proposal
from .errors import InvalidInputError
from .evaluation import EvalReport, GroundTruthInstance
from .signal import PointAnnotation, ProbabilitySignal


def write_json_atomic(path: Path | str, payload) -> None:
    """Serialize deterministically, then move the finished file into place."""
    path = Path(path)
    text = json.dumps(payload, indent=2, sort_keys=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
            handle.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_json(path: Path | str):
    path = Path(path)
    try:
        with path.open() as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON in {path}: {exc}") from exc


# --- probability signals -------------------------------------------------

def signal_to_dict(signal: ProbabilitySignal) -> dict:
    return {
        "video_id": signal.video_id,
        "level": signal.level,
        "length": signal.length,
        "num_classes": signal.num_classes,
        "values": signal.values.tolist(),
    }


def signal_from_dict(payload: dict) -> ProbabilitySignal:
    try:
        values = np.asarray(payload["values"], dtype=np.float64)
        signal = ProbabilitySignal(str(payload["video_id"]), int(payload["level"]), values)
        declared = (int(payload["length"]), int(payload["num_classes"]))
    except KeyError as exc:
        raise InvalidInputError(f"signal record missing field {exc}") from exc
    if (signal.length, signal.num_classes) != declared:
        raise InvalidInputError(
            f"declared dimensions {declared} do not match values shape "
            f"{(signal.length, signal.num_classes)} for video {signal.video_id!r}"
        )
    return signal


def save_signals(path: Path | str, signals: Sequence[ProbabilitySignal]) -> None:
    write_json_atomic(path, [signal_to_dict(s) for s in signals])


def load_signals(path: Path | str) -> list[ProbabilitySignal]:
    """Load signals from one JSON file or every ``*.json`` file in a directory."""
    path = Path(path)
    if path.is_dir():
        signals: list[ProbabilitySignal] = []
        for file in sorted(path.glob("*.json")):
            signals.extend(load_signals(file))
        return signals
    payload = load_json(path)
    records = payload if isinstance(payload, list) else [payload]
    return [signal_from_dict(record) for record in records]


def group_signals_by_video(
    signals: Iterable[ProbabilitySignal],
) -> dict[str, list[ProbabilitySignal]]:
    grouped: dict[str, list[ProbabilitySignal]] = {}
    for signal in signals:
        grouped.setdefault(signal.video_id, []).append(signal)
    for levels in grouped.values():
        levels.sort(key=lambda s: s.level)
    return grouped


# --- annotations and ground truth ----------------------------------------

def save_annotations(path: Path | str, points: Sequence[PointAnnotation]) -> None:
    write_json_atomic(
        path,
        [{"video_id": p.video_id, "t": p.t, "class_id": p.class_id} for p in points],
    )


def load_annotations(path: Path | str) -> list[PointAnnotation]:
    payload = load_json(path)
    if not isinstance(payload, list):
        raise InvalidInputError(f"annotation file {path} must hold a JSON array")
    try:
        return [
            PointAnnotation(str(r["video_id"]), int(r["t"]), int(r["class_id"])) for r in payload
        ]
    except KeyError as exc:
        raise InvalidInputError(f"annotation record missing field {exc}") from exc


def save_ground_truth(path: Path | str, instances: Sequence[GroundTruthInstance]) -> None:
    write_json_atomic(
        path,
        [
            {"video_id": g.video_id, "start": g.start, "end": g.end, "class_id": g.class_id}
            for g in instances
        ],
    )


def load_ground_truth(path: Path | str) -> list[GroundTruthInstance]:
    payload = load_json(path)
    if not isinstance(payload, list):
        raise InvalidInputError(f"ground-truth file {path} must hold a JSON array")
    try:
        return [
            GroundTruthInstance(
                str(r["video_id"]), int(r["start"]), int(r["end"]), int(r["class_id"])
            )
            for r in payload
        ]
    except KeyError as exc:
        raise InvalidInputError(f"ground-truth record missing field {exc}") from exc


# --- pseudo-labels --------------------------------------------------------

def pseudo_labels_to_records(labels: Sequence[PseudoLabel]) -> list[dict]:
    """Group labels per video in the on-disk layout."""
    by_video: dict[str, list[PseudoLabel]] = {}
    for label in labels:
        by_video.setdefault(label.video_id, []).append(label)
    records = []
    for video_id in sorted(by_video):
        records.append(
            {
                "video_id": video_id,
                "labels": [
                    {
                        "t": label.t,
                        "t_star": label.t_star,
                        "sigma": label.sigma,
                        "omega": label.omega,
                        "delta": label.delta,
                        "start": label.start,
                        "end": label.end,
                        "class_id": label.class_id,
                        "degenerate": label.degenerate,
                    }
                    for label in by_video[video_id]
                ],
            }
        )
    return records


def save_pseudo_labels(path: Path | str, labels: Sequence[PseudoLabel]) -> None:
    write_json_atomic(path, pseudo_labels_to_records(labels))


def load_pseudo_labels(path: Path | str) -> list[PseudoLabel]:
    payload = load_json(path)
    if not isinstance(payload, list):
        raise InvalidInputError(f"pseudo-label file {path} must hold a JSON array")
    labels = []
    try:
        for record in payload:
            video_id = str(record["video_id"])
            for item in record["labels"]:
                labels.append(
                    PseudoLabel(
                        video_id=video_id,
                        t=int(item["t"]),
                        t_star=int(item["t_star"]),
                        sigma=float(item["sigma"]),
                        omega=float(item["omega"]),
                        delta=float(item["delta"]),
                        start=int(item["start"]),
                        end=int(item["end"]),
                        class_id=int(item["class_id"]),
                        degenerate=bool(item["degenerate"]),
                    )
                )
    except KeyError as exc:
        raise InvalidInputError(f"pseudo-label record missing field {exc}") from exc
    return labels


# --- proposals ------------------------------------------------------------

def proposals_to_records(proposals: Sequence[Proposal]) -> list[dict]:
    by_video: dict[str, list[Proposal]] = {}
    for proposal in proposals:
        by_video.setdefault(proposal.video_id, []).append(proposal)
    return [
        {
            "video_id": video_id,
            "proposals": [
                {
                    "start": p.start,
                    "end": p.end,
                    "class_id": p.class_id,
                    "score": p.score,
                }
                for p in by_video[video_id]
            ],
        }
        for video_id in sorted(by_video)
    ]


def save_proposals(path: Path | str, proposals: Sequence[Proposal]) -> None:
    write_json_atomic(path, proposals_to_records(proposals))


def load_proposals(path: Path | str) -> list[Proposal]:
    payload = load_json(path)
    if not isinstance(payload, list):
        raise InvalidInputError(f"proposal file {path} must hold a JSON array")
    proposals = []
    try:
        for record in payload:
            video_id = str(record["video_id"])
            for item in record["proposals"]:
                proposals.append(
                    Proposal(
                        video_id,
                        int(item["start"]),
                        int(item["end"]),
                        int(item["class_id"]),
                        float(item["score"]),
                    )
                )
    except KeyError as exc:
        raise InvalidInputError(f"proposal record missing field {exc}") from exc
    return proposals


# --- evaluation reports ----------------------------------------------------

def _threshold_key(threshold: float) -> str:
    return f"{threshold:g}"


def report_to_dict(report: EvalReport) -> dict:
    classes = sorted({class_id for class_id, _ in report.ap})
    return {
        "thresholds": report.thresholds,
        "ap": {
            str(class_id): {
                _threshold_key(t): report.ap[(class_id, t)] for t in report.thresholds
            }
            for class_id in classes
        },
        "map_at": {_threshold_key(t): report.map_at[t] for t in report.thresholds},
        "average_map": report.average_map,
    }


def save_report_json(path: Path | str, report: EvalReport, extra: dict | None = None) -> None:
    payload = report_to_dict(report)
    if extra:
        payload.update(extra)
    write_json_atomic(path, payload)


def save_report_csv(path: Path | str, report: EvalReport) -> None:
    """One row per tIoU threshold; columns are per-class AP and the mAP."""
    path = Path(path)
    classes = sorted({class_id for class_id, _ in report.ap})
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["tiou"] + [f"class_{c}" for c in classes] + ["mAP"])
            for threshold in report.thresholds:
                row = [f"{threshold:g}"]
                row += [f"{report.ap[(c, threshold)]:.6f}" for c in classes]
                row.append(f"{report.map_at[threshold]:.6f}")
                writer.writerow(row)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
