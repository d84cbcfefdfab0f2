"""
RSpatio - Frames e Bounding Boxes
=================================

Tipos base partilhados por todos os módulos:
- BoundingBox: rectângulo alinhado aos eixos (x, y, w, h)
- RgbdFrame: imagem de cor + profundidade normalizada do mesmo instante

Convenção de coordenadas: a coluna i / linha j ocupa [i, i+1) x [j, j+1),
o centro do pixel é (i + 0.5, j + 0.5) e o centro de uma caixa é
(x + w/2, y + h/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class BoundingBox:
    """Rectângulo em coordenadas de imagem (canto superior esquerdo + extensão)."""

    x: int
    y: int
    w: int
    h: int

    @classmethod
    def from_center(cls, cx: float, cy: float, w: int, h: int) -> "BoundingBox":
        """Caixa de tamanho (w, h) cujo centro fica o mais perto possível de (cx, cy)."""
        return cls(round_half_up(cx - w / 2), round_half_up(cy - h / 2), int(w), int(h))

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)

    @property
    def area(self) -> int:
        return max(self.w, 0) * max(self.h, 0)

    @property
    def is_degenerate(self) -> bool:
        return self.w <= 0 or self.h <= 0

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)

    @property
    def slices(self) -> Tuple[slice, slice]:
        """Slices (linhas, colunas) para indexar arrays numpy."""
        return (slice(self.y, self.y + self.h), slice(self.x, self.x + self.w))

    def contains_box(self, other: "BoundingBox") -> bool:
        return (
            other.x >= self.x
            and other.y >= self.y
            and other.x + other.w <= self.x + self.w
            and other.y + other.h <= self.y + self.h
        )

    def intersection(self, other: "BoundingBox") -> Optional["BoundingBox"]:
        x0 = max(self.x, other.x)
        y0 = max(self.y, other.y)
        x1 = min(self.x + self.w, other.x + other.w)
        y1 = min(self.y + self.h, other.y + other.h)
        if x1 <= x0 or y1 <= y0:
            return None
        return BoundingBox(x0, y0, x1 - x0, y1 - y0)

    def translate(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def scale(self, factor: float) -> "BoundingBox":
        """Escala a caixa em torno do seu centro."""
        cx, cy = self.center
        w = max(1, round_half_up(self.w * factor))
        h = max(1, round_half_up(self.h * factor))
        return BoundingBox.from_center(cx, cy, w, h)

    def clip(self, bounds: "BoundingBox") -> Optional["BoundingBox"]:
        """Intersecção com `bounds`; pode encolher a caixa."""
        return self.intersection(bounds)

    def shift_inside(self, bounds: "BoundingBox") -> "BoundingBox":
        """Desloca a caixa para dentro de `bounds` mantendo w, h (encolhe só se não couber)."""
        w = min(self.w, bounds.w)
        h = min(self.h, bounds.h)
        x = min(max(self.x, bounds.x), bounds.x + bounds.w - w)
        y = min(max(self.y, bounds.y), bounds.y + bounds.h - h)
        return BoundingBox(x, y, w, h)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class RgbdFrame:
    """
    Frame RGB-D alinhado.

    Attributes:
        color: imagem H x W x 3, uint8, ordem RGB
        depth: profundidade normalizada H x W em [0, 255] (maior = mais perto)
        depth_valid: máscara opcional de pixels com profundidade válida
    """

    color: np.ndarray
    depth: np.ndarray
    depth_valid: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.color.ndim != 3 or self.color.shape[2] != 3:
            raise ValueError(f"color image must be H x W x 3, got {self.color.shape}")
        if self.depth.shape != self.color.shape[:2]:
            raise ValueError(
                f"color and depth dimensions differ: {self.color.shape[:2]} vs {self.depth.shape}"
            )
        if self.depth_valid is not None and self.depth_valid.shape != self.depth.shape:
            raise ValueError("depth validity mask does not match depth dimensions")

    @property
    def height(self) -> int:
        return int(self.depth.shape[0])

    @property
    def width(self) -> int:
        return int(self.depth.shape[1])

    @property
    def bounds(self) -> BoundingBox:
        return BoundingBox(0, 0, self.width, self.height)

    def require_inside(self, bb: BoundingBox, what: str = "bounding box") -> None:
        """Valida que `bb` é não-degenerada e está dentro do frame."""
        if bb.is_degenerate:
            raise ValueError(f"degenerate {what}: {bb.as_tuple()}")
        if not self.bounds.contains_box(bb):
            raise ValueError(f"{what} outside frame: {bb.as_tuple()}")
