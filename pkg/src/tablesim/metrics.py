"""Evaluation metrics: class-wise mIoU and mAP over yaw-oriented boxes."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import constants
from .errors import LengthMismatchError
from .geometry import BBox3D, iou_3d


def confusion_matrix(pred: np.ndarray, gt: np.ndarray, num_classes: int) -> np.ndarray:
    """counts[g, p] over paired labels."""
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    gt = np.asarray(gt, dtype=np.int64).reshape(-1)
    if len(pred) != len(gt):
        raise LengthMismatchError(f"pred {len(pred)} vs gt {len(gt)} labels")
    if (pred < 0).any() or (pred >= num_classes).any() \
            or (gt < 0).any() or (gt >= num_classes).any():
        raise ValueError("labels outside [0, num_classes)")
    return np.bincount(gt * num_classes + pred,
                       minlength=num_classes * num_classes
                       ).reshape(num_classes, num_classes)


def miou(pred: np.ndarray, gt: np.ndarray, num_classes: int
         ) -> tuple[float, np.ndarray]:
    """Mean of class-wise intersection over union.

    Per class c: IoU = TP / (TP + FP + FN). Classes absent from both pred
    and gt carry NaN and are excluded from the mean.
    """
    cm = confusion_matrix(pred, gt, num_classes)
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = tp + fp + fn
    per_class = np.full(num_classes, np.nan)
    present = denom > 0
    per_class[present] = tp[present] / denom[present]
    mean = float(np.nanmean(per_class)) if present.any() else float("nan")
    return mean, per_class


def _average_precision(scores: np.ndarray, is_tp: np.ndarray, n_gt: int) -> float:
    """All-point interpolation: area under the precision envelope."""
    if n_gt == 0:
        return float("nan")
    if len(scores) == 0:
        return 0.0
    order = np.argsort(-scores, kind="stable")
    tp = is_tp[order].astype(np.float64)
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(1.0 - tp)
    recall = cum_tp / n_gt
    precision = cum_tp / (cum_tp + cum_fp)
    # precision envelope from the right, then integrate over recall steps
    env = np.maximum.accumulate(precision[::-1])[::-1]
    prev_r = 0.0
    ap = 0.0
    for r, p in zip(recall, env):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return float(ap)


def map_at(dets: Sequence, gts: Sequence,
           iou_thresh: float = constants.MAP_IOU_THRESHOLD
           ) -> tuple[float, dict[int, float]]:
    """Mean average precision at a 3D IoU threshold.

    ``dets``: (BBox3D, score) or (BBox3D, score, scene_id) tuples, class
    taken from the box's semantic_id. ``gts``: BBox3D or (BBox3D, scene_id).
    Matching is greedy by descending score, one gt matched at most once,
    restricted to the same scene. Classes with at least one gt count toward
    the mean; AP uses all-point interpolation.
    """
    norm_dets = []
    for d in dets:
        box, score = d[0], float(d[1])
        scene = int(d[2]) if len(d) > 2 else 0
        norm_dets.append((box, score, scene))
    norm_gts = []
    for g in gts:
        if isinstance(g, BBox3D):
            norm_gts.append((g, 0))
        else:
            norm_gts.append((g[0], int(g[1])))

    classes = sorted({b.semantic_id for b, _ in norm_gts})
    per_class: dict[int, float] = {}
    for cls in classes:
        cls_gts = [(b, s) for b, s in norm_gts if b.semantic_id == cls]
        cls_dets = [(b, sc, scn) for b, sc, scn in norm_dets if b.semantic_id == cls]
        cls_dets.sort(key=lambda d: -d[1])
        matched = [False] * len(cls_gts)
        is_tp = np.zeros(len(cls_dets), dtype=bool)
        scores = np.array([d[1] for d in cls_dets], dtype=np.float64)
        for i, (box, _score, scene) in enumerate(cls_dets):
            best_iou = 0.0
            best_j = -1
            for j, (gbox, gscene) in enumerate(cls_gts):
                if matched[j] or gscene != scene:
                    continue
                iou = iou_3d(box, gbox)
                if iou > best_iou:
                    best_iou = iou
                    best_j = j
            if best_j >= 0 and best_iou >= iou_thresh:
                matched[best_j] = True
                is_tp[i] = True
        per_class[cls] = _average_precision(scores, is_tp, len(cls_gts))
    vals = [v for v in per_class.values() if not np.isnan(v)]
    mean = float(np.mean(vals)) if vals else float("nan")
    return mean, per_class
