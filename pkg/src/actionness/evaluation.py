"""Interval overlap, average precision, mAP reports, and pseudo-label quality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import InvalidInputError

if TYPE_CHECKING:  # pragma: no cover - typing only, avoids an import cycle
    from .adm import PseudoLabel
    from .decoder import Proposal


@dataclass(frozen=True)
class GroundTruthInstance:
    """One annotated action interval (inclusive endpoints)."""

    video_id: str
    start: int
    end: int
    class_id: int

    def __post_init__(self):
        if self.start > self.end:
            raise InvalidInputError(
                f"instance must satisfy start <= end, got [{self.start}, {self.end}]"
            )

    @property
    def interval(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass
class EvalReport:
    """AP per (class, threshold), mAP per threshold, and the range average."""

    thresholds: list[float]
    ap: dict[tuple[int, float], float]
    map_at: dict[float, float]
    average_map: float


@dataclass
class PseudoLabelQuality:
    """Pseudo-label statistics: count ratio, best-match tIoU, detection quality."""

    alpha: float
    mean_tiou: float
    eval: EvalReport


def tiou(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Temporal IoU of two inclusive intervals, counted in snippets."""
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def _score_order(proposal) -> tuple:
    return (-proposal.score, proposal.video_id, proposal.start, proposal.end)


def average_precision(
    proposals: Sequence["Proposal"],
    gt: Sequence[GroundTruthInstance],
    tiou_threshold: float,
) -> float:
    """All-point (precision-envelope) AP for a single class.

    Proposals are visited in descending score order; each matches at most one
    still-unmatched ground-truth instance of the same video, chosen by largest
    tIoU, and counts as a true positive when that tIoU reaches the threshold.
    """
    if not gt:
        raise InvalidInputError("average_precision requires at least one ground-truth instance")
    if not 0.0 < tiou_threshold <= 1.0:
        raise InvalidInputError(f"tiou_threshold must be in (0, 1], got {tiou_threshold}")
    if not proposals:
        return 0.0

    by_video: dict[str, list[GroundTruthInstance]] = {}
    for instance in gt:
        by_video.setdefault(instance.video_id, []).append(instance)
    matched = {video: [False] * len(items) for video, items in by_video.items()}

    ordered = sorted(proposals, key=_score_order)
    tp = np.zeros(len(ordered))
    for rank, proposal in enumerate(ordered):
        candidates = by_video.get(proposal.video_id, [])
        best_index, best_value = -1, 0.0
        for index, instance in enumerate(candidates):
            if matched[proposal.video_id][index]:
                continue
            value = tiou((proposal.start, proposal.end), instance.interval)
            if value > best_value:
                best_index, best_value = index, value
        if best_index >= 0 and best_value >= tiou_threshold:
            matched[proposal.video_id][best_index] = True
            tp[rank] = 1.0

    cum_tp = np.cumsum(tp)
    ranks = np.arange(1, len(ordered) + 1)
    recall = cum_tp / len(gt)
    precision = cum_tp / ranks

    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(mpre.size - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.flatnonzero(mrec[1:] != mrec[:-1]) + 1
    return float(np.sum((mrec[steps] - mrec[steps - 1]) * mpre[steps]))


def map_report(
    proposals: Sequence["Proposal"],
    gt: Sequence[GroundTruthInstance],
    thresholds: Sequence[float],
) -> EvalReport:
    """AP per class and threshold; mAP averages only classes that have GT."""
    if not gt:
        raise InvalidInputError("map_report requires ground truth")
    if not thresholds:
        raise InvalidInputError("map_report requires at least one tIoU threshold")
    thresholds = [float(t) for t in thresholds]
    classes = sorted({instance.class_id for instance in gt})
    by_class_proposals = {c: [p for p in proposals if p.class_id == c] for c in classes}
    by_class_gt = {c: [g for g in gt if g.class_id == c] for c in classes}

    ap: dict[tuple[int, float], float] = {}
    map_at: dict[float, float] = {}
    for threshold in thresholds:
        values = []
        for class_id in classes:
            value = average_precision(
                by_class_proposals[class_id], by_class_gt[class_id], threshold
            )
            ap[(class_id, threshold)] = value
            values.append(value)
        map_at[threshold] = float(np.mean(values))
    average_map = float(np.mean(list(map_at.values())))
    return EvalReport(thresholds, ap, map_at, average_map)


def pseudo_label_quality(
    pseudo_labels: Sequence["PseudoLabel"],
    gt: Sequence[GroundTruthInstance],
    thresholds: Sequence[float],
) -> PseudoLabelQuality:
    """Count ratio, mean best-match tIoU, and unit-score detection quality."""
    from .decoder import Proposal

    if not gt:
        raise InvalidInputError("pseudo_label_quality requires ground truth")
    alpha = len(pseudo_labels) / len(gt)
    best_matches = []
    for instance in gt:
        candidates = (
            label
            for label in pseudo_labels
            if label.video_id == instance.video_id and label.class_id == instance.class_id
        )
        best_matches.append(
            max(
                (tiou((label.start, label.end), instance.interval) for label in candidates),
                default=0.0,
            )
        )
    as_proposals = [
        Proposal(label.video_id, label.start, label.end, label.class_id, 1.0)
        for label in pseudo_labels
    ]
    report = map_report(as_proposals, gt, thresholds)
    return PseudoLabelQuality(alpha, float(np.mean(best_matches)), report)
