"""
RSpatio - Localização (mapa mascarado + mean-shift)
===================================================

M = IM * CCR sobre a região de pesquisa; a caixa é deslocada para o
centróide ponderado do mapa sob a janela até o deslocamento ser menor que
`stop_eps` ou atingir `max_iter`. O tamanho da caixa nunca muda.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .depth_segmentation import ComponentMask
from .frames import BoundingBox

logger = logging.getLogger(__name__)


class VanishedTargetError(ValueError):
    """Massa nula sob a janela: não há evidência do alvo (sinal para o teste de oclusão)."""

    def __init__(self, message: str = "vanished target evidence"):
        super().__init__(message)


@dataclass(frozen=True)
class MaskedMap:
    """Mapa não-negativo sobre a região de pesquisa, com a origem em coordenadas do frame."""

    values: np.ndarray
    origin: Tuple[int, int] = (0, 0)

    @property
    def extent(self) -> BoundingBox:
        height, width = self.values.shape
        return BoundingBox(self.origin[0], self.origin[1], width, height)


@dataclass
class MeanShiftTrace:
    """Caixa final, número de iterações e deslocamento de cada iteração."""

    bb: BoundingBox
    iterations: int = 0
    shifts: List[float] = field(default_factory=list)


def masked_map(
    im: np.ndarray,
    ccr: Union[ComponentMask, np.ndarray],
    origin: Tuple[int, int] = (0, 0),
) -> MaskedMap:
    """Produto elemento a elemento IM * CCR."""
    mask = ccr.mask if isinstance(ccr, ComponentMask) else np.asarray(ccr)
    im = np.asarray(im, dtype=np.float64)
    if im.shape != mask.shape:
        raise ValueError(f"dimension mismatch: IM {im.shape} vs CCR {mask.shape}")
    return MaskedMap(values=im * mask, origin=origin)


def weighted_centroid(m: MaskedMap, window: BoundingBox) -> Tuple[float, float]:
    """
    Centróide ponderado (em coordenadas do frame) do mapa sob a janela.

    A janela é recortada à extensão do mapa.
    """
    inside = window.clip(m.extent)
    if inside is None:
        raise VanishedTargetError()

    local = inside.translate(-m.origin[0], -m.origin[1])
    weights = m.values[local.slices]
    mass = float(weights.sum())
    if mass <= 0.0:
        raise VanishedTargetError()

    xs = inside.x + np.arange(inside.w) + 0.5
    ys = inside.y + np.arange(inside.h) + 0.5
    cx = float((weights.sum(axis=0) * xs).sum() / mass)
    cy = float((weights.sum(axis=1) * ys).sum() / mass)
    return cx, cy


def mean_shift_trace(
    m: MaskedMap,
    init: BoundingBox,
    max_iter: int = 20,
    stop_eps: float = 1.0,
    bounds: Optional[BoundingBox] = None,
) -> MeanShiftTrace:
    """
    Mean-shift com registo das iterações.

    Args:
        m: mapa mascarado
        init: caixa inicial
        max_iter: limite de iterações
        stop_eps: paragem quando o deslocamento < stop_eps (pixels)
        bounds: limites do frame; None = extensão do mapa

    Returns:
        MeanShiftTrace
    """
    if init.clip(m.extent) is None:
        raise ValueError(f"initial box {init.as_tuple()} does not intersect the map")
    bounds = bounds or m.extent

    trace = MeanShiftTrace(bb=init)
    for _ in range(max_iter):
        cx, cy = weighted_centroid(m, trace.bb)
        ox, oy = trace.bb.center
        shift = math.hypot(cx - ox, cy - oy)

        trace.bb = BoundingBox.from_center(cx, cy, init.w, init.h).shift_inside(bounds)
        trace.iterations += 1
        trace.shifts.append(shift)
        if shift < stop_eps:
            break

    logger.debug(f"Mean-shift: {trace.iterations} iterações, deslocamentos {trace.shifts}")
    return trace


def mean_shift(
    m: MaskedMap,
    init: BoundingBox,
    max_iter: int = 20,
    stop_eps: float = 1.0,
    bounds: Optional[BoundingBox] = None,
) -> BoundingBox:
    """Mean-shift até ao centróide do mapa mascarado; devolve a caixa final."""
    return mean_shift_trace(m, init, max_iter, stop_eps, bounds).bb
