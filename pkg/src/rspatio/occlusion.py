"""
RSpatio - Oclusão e Recuperação
===============================

Quando o alvo fica (quase) totalmente oculto:
1. Detecção: fracção da caixa mais perto que o alvo, ou ausência de evidência
2. Localização do oclusor via spatiogram de profundidade
3. Candidato: pico de profundidade do alvo perto do oclusor
4. Verificação com o r-spatiogram (limiar 0.95)
5. Fallback: pesquisa por janela deslizante
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .descriptors import Quantizer, RSpatiogram, RSpatiogramMatcher, depth_spatiogram
from .frames import BoundingBox, RgbdFrame

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_QUANTIZER = Quantizer(levels_per_channel=32, channel_count=1)


class NoOccluderEvidenceError(ValueError):
    """Nenhum bin de profundidade mais perto que o alvo dentro da caixa."""

    def __init__(self, message: str = "no occluder evidence"):
        super().__init__(message)


@dataclass(frozen=True)
class Occluder:
    """Posição (centróide no frame) e profundidade (centro do bin) do oclusor."""

    centroid: Tuple[float, float]
    depth: float


@dataclass(frozen=True)
class Candidate:
    """Caixa candidata à re-aquisição e a sua semelhança com a referência."""

    bb: BoundingBox
    similarity: float = 0.0


@dataclass
class OcclusionState:
    """
    Estado de oclusão do tracker (escrito apenas pelo ciclo de tracking).

    A referência fica congelada enquanto `occluded` estiver activo.
    """

    occluded: bool = False
    occluder_centroid: Optional[Tuple[float, float]] = None
    occluder_depth: Optional[float] = None
    frames_occluded: int = 0
    reference_descriptor: Optional[RSpatiogram] = None

    def enter(self) -> None:
        self.occluded = True
        self.frames_occluded = 1
        self.occluder_centroid = None
        self.occluder_depth = None

    def observe(self, occluder: Occluder) -> None:
        self.occluder_centroid = occluder.centroid
        self.occluder_depth = occluder.depth

    @property
    def last_occluder(self) -> Optional[Occluder]:
        if self.occluder_centroid is None or self.occluder_depth is None:
            return None
        return Occluder(self.occluder_centroid, self.occluder_depth)

    def clear(self) -> None:
        self.occluded = False
        self.frames_occluded = 0
        self.occluder_centroid = None
        self.occluder_depth = None


def detect_occlusion(
    bb: BoundingBox,
    depth: np.ndarray,
    model_depth: float,
    occlusion_fraction: float = 0.5,
    depth_tolerance: float = 15.0,
    vanished: bool = False,
) -> bool:
    """
    True se a fracção de pixels da caixa mais perto que o alvo
    (profundidade > model_depth + tolerância) exceder `occlusion_fraction`,
    ou se a localização não encontrou evidência do alvo.
    """
    if vanished:
        return True
    height, width = depth.shape
    if bb.is_degenerate or not BoundingBox(0, 0, width, height).contains_box(bb):
        raise ValueError(f"bounding box outside frame: {bb.as_tuple()}")
    closer = depth[bb.slices] > model_depth + depth_tolerance
    return bool(closer.mean() > occlusion_fraction)


def locate_occluder(
    depth: np.ndarray,
    bb: BoundingBox,
    model_depth: float,
    quantizer: Quantizer = DEFAULT_DEPTH_QUANTIZER,
    depth_tolerance: float = 15.0,
) -> Occluder:
    """
    Oclusor dentro da caixa: o bin mais povoado entre os mais perto que o alvo.

    Returns:
        Occluder com a média espacial do bin (coordenadas do frame) e o centro do bin
    """
    spatiogram = depth_spatiogram(depth[bb.slices], quantizer)
    centers = np.array([quantizer.bin_center(b) for b in range(quantizer.bin_count)])
    closer = (centers > model_depth + depth_tolerance) & (spatiogram.tallies > 0)
    if not closer.any():
        raise NoOccluderEvidenceError()

    tallies = np.where(closer, spatiogram.tallies, -1)
    best = int(np.argmax(tallies))
    return Occluder(
        centroid=spatiogram.mean_in_frame(best, bb),
        depth=float(centers[best]),
    )


def _search_region(center: Tuple[float, float], radius: float, bounds: BoundingBox):
    side = max(1, int(math.ceil(2 * radius)))
    return BoundingBox.from_center(center[0], center[1], side, side).clip(bounds)


def generate_candidate(
    depth: np.ndarray,
    occluder: Occluder,
    model_depth: float,
    search_radius: float,
    last_bb: BoundingBox,
    quantizer: Quantizer = DEFAULT_DEPTH_QUANTIZER,
    depth_tolerance: float = 15.0,
    min_size: int = 1,
) -> Optional[Candidate]:
    """
    Candidato de re-emergência em volta do oclusor.

    Procura, no spatiogram de profundidade da região de pesquisa, o bin mais
    povoado mais longe que o oclusor e a `depth_tolerance` do alvo. A caixa
    fica centrada na média espacial desse bin, com área igual ao número de
    pixels do bin e a proporção de `last_bb`.

    Returns:
        Candidate, ou None se não houver pico
    """
    height, width = depth.shape
    bounds = BoundingBox(0, 0, width, height)
    region = _search_region(occluder.centroid, search_radius, bounds)
    if region is None:
        return None

    spatiogram = depth_spatiogram(depth[region.slices], quantizer)
    centers = np.array([quantizer.bin_center(b) for b in range(quantizer.bin_count)])
    eligible = (
        (spatiogram.tallies > 0)
        & (centers < occluder.depth)
        & (np.abs(centers - model_depth) <= depth_tolerance)
    )
    if not eligible.any():
        return None

    best = int(np.argmax(np.where(eligible, spatiogram.tallies, -1)))
    area = float(spatiogram.tallies[best])
    aspect = last_bb.w / last_bb.h
    w = max(min_size, int(round(math.sqrt(area * aspect))))
    h = max(min_size, int(round(area / max(w, 1))))

    cx, cy = spatiogram.mean_in_frame(best, region)
    bb = BoundingBox.from_center(cx, cy, w, h).shift_inside(bounds)
    logger.debug(f"Candidato em {bb.as_tuple()} (bin {best}, {int(area)} pixels)")
    return Candidate(bb=bb)


def score_candidate(
    candidate: Candidate,
    frame: RgbdFrame,
    reference: RSpatiogram,
    matcher: RSpatiogramMatcher = RSpatiogramMatcher(),
) -> Candidate:
    """Candidato com a semelhança r-spatiogram à referência preenchida."""
    try:
        similarity = matcher.box_similarity(frame, candidate.bb, reference)
    except ValueError as exc:
        logger.debug(f"Candidato {candidate.bb.as_tuple()} sem descritor: {exc}")
        similarity = 0.0
    return replace(candidate, similarity=similarity)


def verify_candidate(
    candidate: Candidate,
    frame: RgbdFrame,
    reference: RSpatiogram,
    threshold: float = 0.95,
    matcher: RSpatiogramMatcher = RSpatiogramMatcher(),
) -> bool:
    """Aceite sse rho(descritor(candidato), referência) > threshold."""
    return score_candidate(candidate, frame, reference, matcher).similarity > threshold


def sliding_window_search(
    frame: RgbdFrame,
    candidate: Candidate,
    reference: RSpatiogram,
    expand: float = 2.0,
    stride_frac: float = 0.1,
    top_frac: float = 0.1,
    matcher: RSpatiogramMatcher = RSpatiogramMatcher(),
) -> Candidate:
    """
    Pesquisa por janela deslizante na área do candidato expandida.

    A janela tem o tamanho do candidato; o passo é `stride_frac` da largura /
    altura da área. Guardam-se os melhores `top_frac` (ceil, mínimo 1) e
    devolve-se o de menor dissemelhança (1 - rho). Empates: primeiro na
    ordem de varrimento (linha a linha).
    """
    bounds = frame.bounds
    window_w, window_h = candidate.bb.w, candidate.bb.h
    area = candidate.bb.scale(expand).clip(bounds)

    if area is None or area.w < window_w or area.h < window_h:
        center = area.center if area is not None else candidate.bb.center
        single = BoundingBox.from_center(center[0], center[1], window_w, window_h)
        return score_candidate(Candidate(single.shift_inside(bounds)), frame, reference, matcher)

    stride_x = max(1, int(round(stride_frac * area.w)))
    stride_y = max(1, int(round(stride_frac * area.h)))

    scored = []
    for y in range(area.y, area.y + area.h - window_h + 1, stride_y):
        for x in range(area.x, area.x + area.w - window_w + 1, stride_x):
            window = Candidate(BoundingBox(x, y, window_w, window_h))
            scored.append(score_candidate(window, frame, reference, matcher))

    keep = max(1, math.ceil(top_frac * len(scored)))
    order = sorted(range(len(scored)), key=lambda i: (-scored[i].similarity, i))
    top = [scored[i] for i in order[:keep]]
    best = min(top, key=lambda c: 1.0 - c.similarity)

    logger.debug(
        f"Janela deslizante: {len(scored)} posições, melhor {best.bb.as_tuple()} "
        f"(rho={best.similarity:.3f})"
    )
    return best
