"""
RSpatio - Tracker RGB-D
=======================

Ciclo de tracking por frame:

    frame 0:  modelo do objecto + descritor de referência na caixa inicial
    normal:   K-means -> componentes -> CCR -> IM -> mapa mascarado -> mean-shift
              -> teste de oclusão -> actualização do modelo
    oclusão:  re-localização directa -> oclusor -> candidato -> verificação
              -> janela deslizante -> re-aquisição

Erros de um módulo num frame marcam o frame como falhado; o tracker mantém
a última caixa e continua.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import cv2
import numpy as np

from .config import TrackerConfig
from .depth_segmentation import connected_components, kmeans_depth, target_component_mask
from .descriptors import RSpatiogram
from .evaluation import EvalReport, GroundTruth, evaluate
from .frames import BoundingBox, RgbdFrame
from .localization import VanishedTargetError, masked_map, mean_shift_trace
from .object_model import ObjectModel, background_margin, build_model, likelihood_map, update_model
from .occlusion import (
    Candidate,
    NoOccluderEvidenceError,
    OcclusionState,
    detect_occlusion,
    generate_candidate,
    locate_occluder,
    score_candidate,
    sliding_window_search,
)

logger = logging.getLogger(__name__)

FRAME_ERRORS = (ValueError, np.linalg.LinAlgError, cv2.error)
TARGET_LOST = "target lost"


class SequenceError(ValueError):
    """Frame sem o qual a sequência não pode ser seguida (o primeiro frame)."""

    def __init__(self, index: int, message: str):
        super().__init__(f"frame {index} unusable: {message}")
        self.index = index


@dataclass
class FrameResult:
    """Resultado de um frame."""

    index: int
    bb: BoundingBox
    occluded: bool = False
    similarity: float = 0.0
    failed: bool = False
    reason: str = ""
    elapsed_ms: float = 0.0
    degraded: bool = False
    recovered: bool = False
    model_hash: str = ""


@dataclass
class TrackResult:
    """Uma entrada por frame de entrada, pela ordem dos frames."""

    sequence: str
    frames: List[FrameResult] = field(default_factory=list)
    config: TrackerConfig = field(default_factory=TrackerConfig)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def boxes(self) -> List[BoundingBox]:
        return [f.bb for f in self.frames]

    @property
    def occluded_frames(self) -> int:
        return sum(f.occluded for f in self.frames)

    @property
    def failed_frames(self) -> int:
        return sum(f.failed for f in self.frames)

    @property
    def ms_per_frame(self) -> float:
        if not self.frames:
            return 0.0
        return sum(f.elapsed_ms for f in self.frames) / len(self.frames)

    def evaluate(self, ground_truth: GroundTruth) -> EvalReport:
        return evaluate(self.boxes, list(ground_truth))


class RGBDTracker:
    """
    Tracker de um único alvo.

    Exemplo:
        tracker = RGBDTracker(TrackerConfig())
        results = [tracker.initialize(frames[0], init_box)]
        for i, frame in enumerate(frames[1:], start=1):
            results.append(tracker.track(frame, i))
    """

    def __init__(self, config: Optional[TrackerConfig] = None):
        self.config = config or TrackerConfig()
        self.matcher = self.config.matcher
        self.model: Optional[ObjectModel] = None
        self.bb: Optional[BoundingBox] = None
        self.state = OcclusionState()
        self.lost = False

    @property
    def reference(self) -> Optional[RSpatiogram]:
        return self.state.reference_descriptor

    def _build_model(self, frame: RgbdFrame, bb: BoundingBox) -> ObjectModel:
        cfg = self.config
        return build_model(
            frame,
            bb,
            bg_margin=background_margin(bb, cfg.bg_margin_min, cfg.bg_margin_frac),
            quantizer=cfg.quantizer,
            alpha=cfg.alpha,
            epsilon=cfg.epsilon,
            seed=cfg.seed,
        )

    def initialize(self, frame: RgbdFrame, bb: BoundingBox, index: int = 0) -> FrameResult:
        """Constrói o modelo e a referência na caixa inicial."""
        start = time.perf_counter()
        frame.require_inside(bb)
        self.model = self._build_model(frame, bb)
        self.state = OcclusionState(reference_descriptor=self.matcher.describe(frame, bb))
        self.bb = bb
        self.lost = False
        logger.info(
            f"Modelo construído em {bb.as_tuple()}: {len(self.model.active_bins)} bins activos, "
            f"profundidade {self.model.target_depth:.1f}"
        )
        return FrameResult(
            index=index,
            bb=bb,
            similarity=1.0,
            elapsed_ms=(time.perf_counter() - start) * 1000.0,
            model_hash=self.model.fingerprint(),
        )

    def track(self, frame: RgbdFrame, index: int) -> FrameResult:
        """Processa um frame (depois de initialize)."""
        if self.model is None or self.bb is None:
            raise RuntimeError("tracker not initialized")

        start = time.perf_counter()
        if self.lost:
            result = FrameResult(index, self.bb, occluded=True, failed=True, reason=TARGET_LOST)
        else:
            try:
                if self.state.occluded:
                    result = self._recover(frame, index)
                else:
                    result = self._follow(frame, index)
            except FRAME_ERRORS as exc:
                logger.warning(f"Frame {index} falhou: {exc}")
                result = FrameResult(
                    index, self.bb, occluded=self.state.occluded, failed=True, reason=str(exc)
                )

        result.elapsed_ms = (time.perf_counter() - start) * 1000.0
        result.model_hash = self.model.fingerprint()
        return result

    def skip(self, index: int, reason: str) -> FrameResult:
        """Frame sem dados utilizáveis: mantém a caixa e marca-o como falhado."""
        return FrameResult(
            index,
            self.bb,
            occluded=self.state.occluded,
            failed=True,
            reason=reason,
            model_hash=self.model.fingerprint() if self.model is not None else "",
        )

    # Localização

    def _localize(self, frame: RgbdFrame, bb: BoundingBox) -> Tuple[BoundingBox, bool]:
        """Mean-shift sobre IM * CCR na região de pesquisa em volta de `bb`."""
        cfg = self.config
        region = bb.scale(cfg.search_scale).clip(frame.bounds)
        if region is None:
            raise ValueError(f"region outside frame: {bb.as_tuple()}")

        valid = frame.depth_valid[region.slices] if frame.depth_valid is not None else None
        clusters = kmeans_depth(
            frame.depth[region.slices], cfg.kmeans_clusters, cfg.kmeans_max_iter, cfg.seed, valid
        )
        components = connected_components(clusters)
        cx, cy = bb.center
        ccr = target_component_mask(
            components,
            (cx - region.x, cy - region.y),
            self.model.target_depth,
            BoundingBox(0, 0, region.w, region.h),
            cfg.depth_tolerance,
        )

        im = likelihood_map(frame, region, self.model, cfg.quantizer)
        m = masked_map(im, ccr, origin=(region.x, region.y))
        trace = mean_shift_trace(
            m, bb, cfg.mean_shift_max_iter, cfg.mean_shift_eps, bounds=frame.bounds
        )
        return trace.bb, ccr.degraded

    def _is_occluded(self, frame: RgbdFrame, bb: BoundingBox) -> bool:
        cfg = self.config
        return detect_occlusion(
            bb, frame.depth, self.model.target_depth, cfg.occlusion_fraction, cfg.depth_tolerance
        )

    # Estados

    def _follow(self, frame: RgbdFrame, index: int) -> FrameResult:
        cfg = self.config
        previous = self.bb
        try:
            bb, degraded = self._localize(frame, previous)
            vanished = False
        except VanishedTargetError:
            bb, degraded, vanished = previous, False, True

        occluded = detect_occlusion(
            bb,
            frame.depth,
            self.model.target_depth,
            cfg.occlusion_fraction,
            cfg.depth_tolerance,
            vanished=vanished,
        )
        if occluded:
            self.state.enter()
            logger.info(f"Frame {index}: oclusão detectada em {previous.as_tuple()}")
            return FrameResult(index, previous, occluded=True, degraded=degraded)

        descriptor = self.matcher.describe(frame, bb)
        similarity = self.matcher.similarity(descriptor, self.reference)
        self.model = update_model(self.model, self._build_model(frame, bb), cfg.forgetting_factor)
        self.state.reference_descriptor = descriptor
        self.bb = bb
        return FrameResult(index, bb, similarity=similarity, degraded=degraded)

    def _recover(self, frame: RgbdFrame, index: int) -> FrameResult:
        cfg = self.config
        held = self.bb
        self.state.frames_occluded += 1
        if self.state.frames_occluded > cfg.max_occluded_frames:
            self.lost = True
            logger.warning(
                f"Frame {index}: alvo abandonado após {cfg.max_occluded_frames} frames em oclusão"
            )
            return FrameResult(index, held, occluded=True, failed=True, reason=TARGET_LOST)

        relocated = self._try_relocalize(frame, held)
        if relocated is not None:
            return self._reacquire(index, relocated[0], relocated[1], "re-localização directa")

        try:
            occluder = locate_occluder(
                frame.depth, held, self.model.target_depth, cfg.depth_quantizer, cfg.depth_tolerance
            )
            self.state.observe(occluder)
        except NoOccluderEvidenceError:
            occluder = self.state.last_occluder
            if occluder is None:
                return FrameResult(index, held, occluded=True)

        candidate = generate_candidate(
            frame.depth,
            occluder,
            self.model.target_depth,
            cfg.candidate_radius_scale * held.diagonal,
            held,
            cfg.depth_quantizer,
            cfg.depth_tolerance,
            min_size=max(cfg.grid_rows, cfg.grid_cols),
        )
        if candidate is None:
            return FrameResult(index, held, occluded=True)

        scored = score_candidate(candidate, frame, self.reference, self.matcher)
        if scored.similarity > cfg.similarity_threshold:
            source = "candidato aceite"
        else:
            scored = sliding_window_search(
                frame,
                candidate,
                self.reference,
                cfg.search_expand,
                cfg.stride_frac,
                cfg.top_frac,
                self.matcher,
            )
            source = "janela deslizante"

        handed = self._hand_off(frame, scored)
        if handed is None:
            return FrameResult(index, held, occluded=True, similarity=scored.similarity)
        bb, degraded = handed
        similarity = score_candidate(Candidate(bb), frame, self.reference, self.matcher).similarity
        logger.debug(
            f"Frame {index}: {source} {scored.bb.as_tuple()} rho={scored.similarity:.3f}, "
            f"localizado em {bb.as_tuple()} rho={similarity:.3f}"
        )
        return self._reacquire(index, bb, similarity, source, degraded=degraded)

    def _try_relocalize(
        self, frame: RgbdFrame, held: BoundingBox
    ) -> Optional[Tuple[BoundingBox, float]]:
        """Caixa re-localizada em volta da caixa mantida, se verificar acima do limiar."""
        try:
            bb, _ = self._localize(frame, held)
        except VanishedTargetError:
            return None
        if self._is_occluded(frame, bb):
            return None
        similarity = self.matcher.box_similarity(frame, bb, self.reference)
        if similarity > self.config.similarity_threshold:
            return bb, similarity
        return None

    def _hand_off(self, frame: RgbdFrame, candidate: Candidate) -> Optional[Tuple[BoundingBox, bool]]:
        """Re-centra o candidato no tamanho do tracker e passa-o à localização."""
        cx, cy = candidate.bb.center
        start = BoundingBox.from_center(cx, cy, self.bb.w, self.bb.h).shift_inside(frame.bounds)
        try:
            bb, degraded = self._localize(frame, start)
        except VanishedTargetError:
            return None
        if self._is_occluded(frame, bb):
            return None
        return bb, degraded

    def _reacquire(
        self, index: int, bb: BoundingBox, similarity: float, source: str, degraded: bool = False
    ) -> FrameResult:
        frames_occluded = self.state.frames_occluded
        self.state.clear()
        self.bb = bb
        logger.info(
            f"Frame {index}: alvo re-adquirido em {bb.as_tuple()} ({source}, rho={similarity:.3f}, "
            f"{frames_occluded} frames em oclusão)"
        )
        return FrameResult(index, bb, similarity=similarity, degraded=degraded, recovered=True)


def run_tracker(sequence, config: Optional[TrackerConfig] = None) -> TrackResult:
    """
    Corre o tracker sobre uma sequência.

    Args:
        sequence: objecto com name, init_box, frame(i) e __len__ (RgbdSequence, SyntheticSequence)
        config: TrackerConfig (por omissão, a configuração de referência)

    Returns:
        TrackResult com uma entrada por frame
    """
    config = config or TrackerConfig()
    tracker = RGBDTracker(config)
    result = TrackResult(sequence=sequence.name, config=config)

    for index in range(len(sequence)):
        if index == 0:
            try:
                first = sequence.frame(0)
                result.frames.append(tracker.initialize(first, sequence.init_box))
            except FRAME_ERRORS as exc:
                raise SequenceError(0, f"{sequence.name}: {exc}") from exc
            continue
        try:
            frame = sequence.frame(index)
        except FRAME_ERRORS as exc:
            logger.warning(f"Frame {index} ilegível: {exc}")
            result.frames.append(tracker.skip(index, str(exc)))
            continue
        result.frames.append(tracker.track(frame, index))

    logger.info(
        f"Sequência {sequence.name}: {len(result)} frames, {result.occluded_frames} em oclusão, "
        f"{result.failed_frames} falhados, {result.ms_per_frame:.1f} ms/frame"
    )
    return result
