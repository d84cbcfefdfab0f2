"""
RSpatio - Avaliação (ACLE / AOR)
================================

Métricas de benchmark de tracking:
- ACLE: erro médio de localização do centro (pixels)
- AOR: sobreposição média (intersecção / união)

Frames com ground truth oculto ficam de fora das duas métricas e são
contados à parte.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from .frames import BoundingBox

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundTruth:
    """Caixa por frame; None marca um frame oculto ("occ")."""

    boxes: tuple

    @classmethod
    def from_list(cls, boxes: Iterable[Optional[BoundingBox]]) -> "GroundTruth":
        return cls(tuple(boxes))

    def __len__(self) -> int:
        return len(self.boxes)

    def __getitem__(self, index: int) -> Optional[BoundingBox]:
        return self.boxes[index]

    def __iter__(self):
        return iter(self.boxes)

    @property
    def occluded_indices(self) -> List[int]:
        return [i for i, bb in enumerate(self.boxes) if bb is None]


@dataclass
class EvalReport:
    """
    Resultado da avaliação de uma sequência.

    Attributes:
        acle: média de per_frame_cle
        aor: média de per_frame_overlap, em [0, 1]
        per_frame_cle: erro por frame (None nos frames ocultos)
        per_frame_overlap: sobreposição por frame (None nos frames ocultos)
        evaluated_frames: frames com ground truth visível
        occluded_frames: frames com ground truth oculto
    """

    acle: float
    aor: float
    per_frame_cle: List[Optional[float]] = field(default_factory=list)
    per_frame_overlap: List[Optional[float]] = field(default_factory=list)
    evaluated_frames: int = 0
    occluded_frames: int = 0

    def to_dict(self) -> dict:
        return {
            "acle_px": self.acle,
            "aor": self.aor,
            "evaluated_frames": self.evaluated_frames,
            "occluded_frames": self.occluded_frames,
        }


def center_error(pred: BoundingBox, gt: BoundingBox) -> float:
    """Distância euclidiana entre os centros (x + w/2, y + h/2)."""
    px, py = pred.center
    gx, gy = gt.center
    return math.hypot(px - gx, py - gy)


def overlap_ratio(pred: BoundingBox, gt: BoundingBox) -> float:
    """Intersecção sobre união; caixas degeneradas valem 0."""
    if pred.is_degenerate or gt.is_degenerate:
        return 0.0
    inter = pred.intersection(gt)
    if inter is None:
        return 0.0
    union = pred.area + gt.area - inter.area
    return inter.area / union


def _check_lengths(preds: Sequence[BoundingBox], gts: Sequence[Optional[BoundingBox]]) -> None:
    if len(preds) != len(gts):
        raise ValueError(f"frame count mismatch: {len(preds)} predictions vs {len(gts)} ground truth")


def acle(preds: Sequence[BoundingBox], gts: Sequence[Optional[BoundingBox]]) -> float:
    """Média do erro de centro sobre os frames com ground truth visível."""
    _check_lengths(preds, gts)
    errors = [center_error(p, g) for p, g in zip(preds, gts) if g is not None]
    if not errors:
        raise ValueError("no evaluated frames")
    return math.fsum(errors) / len(errors)


def aor(preds: Sequence[BoundingBox], gts: Sequence[Optional[BoundingBox]]) -> float:
    """Média da sobreposição sobre os frames com ground truth visível."""
    _check_lengths(preds, gts)
    overlaps = [overlap_ratio(p, g) for p, g in zip(preds, gts) if g is not None]
    if not overlaps:
        raise ValueError("no evaluated frames")
    return math.fsum(overlaps) / len(overlaps)


def evaluate(preds: Sequence[BoundingBox], gts: Sequence[Optional[BoundingBox]]) -> EvalReport:
    """
    Avalia uma sequência completa.

    Args:
        preds: caixas previstas, uma por frame
        gts: ground truth, uma entrada por frame (None = oculto)

    Returns:
        EvalReport
    """
    _check_lengths(preds, gts)
    per_frame_cle: List[Optional[float]] = []
    per_frame_overlap: List[Optional[float]] = []
    for pred, gt in zip(preds, gts):
        if gt is None:
            per_frame_cle.append(None)
            per_frame_overlap.append(None)
        else:
            per_frame_cle.append(center_error(pred, gt))
            per_frame_overlap.append(overlap_ratio(pred, gt))

    evaluated = [e for e in per_frame_cle if e is not None]
    if not evaluated:
        raise ValueError("no evaluated frames")
    overlaps = [o for o in per_frame_overlap if o is not None]

    report = EvalReport(
        acle=math.fsum(evaluated) / len(evaluated),
        aor=math.fsum(overlaps) / len(overlaps),
        per_frame_cle=per_frame_cle,
        per_frame_overlap=per_frame_overlap,
        evaluated_frames=len(evaluated),
        occluded_frames=len(per_frame_cle) - len(evaluated),
    )
    logger.info(
        f"Avaliação: ACLE={report.acle:.2f}px, AOR={report.aor:.3f} "
        f"({report.evaluated_frames} frames, {report.occluded_frames} ocultos)"
    )
    return report
