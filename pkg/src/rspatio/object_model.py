"""
RSpatio - Modelo do Objecto (log-likelihood positivo)
=====================================================

Modelo de aparência do alvo sobre bins de cor RGB quantizada:
- LR(b) = max(ln(max(H_obj(b), eps) / max(H_bg(b), eps)), 0)
- só uma fracção alpha dos bins é avaliada: os bins ocupados pelo objecto
  mais uma amostra aleatória (seed fixa) dos restantes
- o fundo é o anel em volta da caixa do objecto
- actualização com factor de esquecimento lambda
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .descriptors import Quantizer, compute_histogram
from .frames import BoundingBox, RgbdFrame

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-6
DEFAULT_ALPHA = 0.7


@dataclass(frozen=True)
class FeatureVector:
    """Vector de features de um pixel: canais R, G, B."""

    r: int
    g: int
    b: int

    def __post_init__(self):
        for name in ("r", "g", "b"):
            value = getattr(self, name)
            if not 0 <= value <= 255:
                raise ValueError(f"channel {name}={value} outside [0, 255]")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b])


@dataclass(frozen=True)
class ObjectModel:
    """
    Modelo do objecto.

    Attributes:
        lr: (B,) log-likelihood positivo por bin
        active_bins: índices ordenados dos bins avaliados
        epsilon: valor mínimo nos histogramas
        alpha: fracção de bins activos
        target_depth: mediana da profundidade normalizada do alvo
        rng_seed: seed da selecção de bins
    """

    lr: np.ndarray
    active_bins: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    alpha: float = DEFAULT_ALPHA
    target_depth: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        self.lr.setflags(write=False)
        self.active_bins.setflags(write=False)

    @property
    def bin_count(self) -> int:
        return int(self.lr.shape[0])

    def fingerprint(self) -> str:
        """Hash estável do estado do modelo (lr + profundidade do alvo)."""
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.lr, dtype=np.float64).tobytes())
        digest.update(np.float64(self.target_depth).tobytes())
        return digest.hexdigest()


def quantize_feature(feature: FeatureVector, quantizer: Quantizer) -> int:
    """Índice de bin conjunto de um vector RGB."""
    return int(quantizer.quantize(feature.as_array()))


def select_active_bins(
    bin_count: int, alpha: float, seed: int, required: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Selecciona round(alpha * B) bins activos.

    Os bins em `required` (os bins ocupados pelo objecto) entram primeiro; o
    resto da quota é uma amostra uniforme, sem reposição, dos restantes bins.
    Se `required` exceder a quota, a amostra é feita só entre eles.

    Returns:
        Índices ordenados
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    size = max(1, int(math.floor(alpha * bin_count + 0.5)))
    if size >= bin_count:
        return np.arange(bin_count)

    rng = np.random.default_rng(seed)
    if required is None:
        return np.sort(rng.choice(bin_count, size=size, replace=False))

    required = np.unique(np.asarray(required, dtype=np.int64))
    if required.size and (required[0] < 0 or required[-1] >= bin_count):
        raise ValueError(f"required bins outside [0, {bin_count})")
    if required.size >= size:
        return np.sort(rng.choice(required, size=size, replace=False))
    rest = np.setdiff1d(np.arange(bin_count), required)
    sampled = rng.choice(rest, size=size - required.size, replace=False)
    return np.sort(np.concatenate([required, sampled]))


def log_likelihood_ratio(
    h_obj: np.ndarray, h_bg: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> np.ndarray:
    """Parte positiva do log-likelihood ratio entre histogramas de objecto e fundo."""
    h_obj = np.asarray(h_obj, dtype=np.float64)
    h_bg = np.asarray(h_bg, dtype=np.float64)
    if h_obj.shape != h_bg.shape:
        raise ValueError(f"histogram shape mismatch: {h_obj.shape} vs {h_bg.shape}")
    ratio = np.log(np.maximum(h_obj, epsilon) / np.maximum(h_bg, epsilon))
    return np.maximum(ratio, 0.0)


def background_margin(bb: BoundingBox, minimum: int = 10, fraction: float = 0.5) -> int:
    """Largura do anel de fundo: max(minimum, fraction * min(w, h))."""
    return max(int(minimum), int(round(fraction * min(bb.w, bb.h))))


def background_ring_pixels(frame: RgbdFrame, bb: BoundingBox, margin: int) -> np.ndarray:
    """Pixels de cor do anel (caixa expandida por `margin`, recortada ao frame, menos a caixa)."""
    expanded = BoundingBox(bb.x - margin, bb.y - margin, bb.w + 2 * margin, bb.h + 2 * margin)
    expanded = expanded.clip(frame.bounds)

    ring = np.ones((expanded.h, expanded.w), dtype=bool)
    inner = bb.translate(-expanded.x, -expanded.y)
    ring[inner.slices] = False

    pixels = frame.color[expanded.slices][ring]
    if pixels.size == 0:
        raise ValueError(f"empty background ring around {bb.as_tuple()}")
    return pixels


def build_model(
    frame: RgbdFrame,
    object_bb: BoundingBox,
    bg_margin: Optional[int] = None,
    quantizer: Quantizer = Quantizer(),
    alpha: float = DEFAULT_ALPHA,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
) -> ObjectModel:
    """
    Constrói o modelo do objecto a partir da caixa e do anel de fundo.

    Args:
        frame: frame RGB-D
        object_bb: caixa do objecto (dentro do frame)
        bg_margin: largura do anel; None = max(10, 0.5 * min(w, h))
        quantizer: quantizador RGB
        alpha: fracção de bins activos
        epsilon: piso dos histogramas
        seed: seed da selecção de bins

    Returns:
        ObjectModel
    """
    frame.require_inside(object_bb)
    margin = background_margin(object_bb) if bg_margin is None else int(bg_margin)
    if margin <= 0:
        raise ValueError(f"background margin must be positive, got {margin}")

    h_obj = compute_histogram(frame.color[object_bb.slices], quantizer)
    h_bg = compute_histogram(background_ring_pixels(frame, object_bb, margin), quantizer)

    active = select_active_bins(quantizer.bin_count, alpha, seed, np.flatnonzero(h_obj > 0))
    lr = np.zeros(quantizer.bin_count)
    lr[active] = log_likelihood_ratio(h_obj[active], h_bg[active], epsilon)

    target_depth = float(np.median(frame.depth[object_bb.slices]))

    return ObjectModel(
        lr=lr,
        active_bins=active,
        epsilon=epsilon,
        alpha=alpha,
        target_depth=target_depth,
        rng_seed=seed,
    )


def likelihood_map(
    frame: RgbdFrame, region: BoundingBox, model: ObjectModel, quantizer: Quantizer = Quantizer()
) -> np.ndarray:
    """Mapa intermédio IM(x, y) = LR(F(x, y)) sobre a região."""
    frame.require_inside(region, "region")
    if quantizer.bin_count != model.bin_count:
        raise ValueError(
            f"quantizer has {quantizer.bin_count} bins, model has {model.bin_count}"
        )
    return model.lr[quantizer.quantize(frame.color[region.slices])]


def update_model(prev: ObjectModel, current: ObjectModel, forgetting: float = 0.1) -> ObjectModel:
    """
    Combina modelos: lr = lambda * lr_current + (1 - lambda) * lr_prev.

    A combinação é escrita como prev + lambda * (current - prev), o que deixa
    prev intacto para lambda = 0 e quando os modelos coincidem.
    """
    if prev.bin_count != current.bin_count:
        raise ValueError(f"model shape mismatch: {prev.bin_count} vs {current.bin_count}")
    if not 0.0 <= forgetting <= 1.0:
        raise ValueError(f"forgetting factor must lie in [0, 1], got {forgetting}")

    lr = prev.lr + forgetting * (current.lr - prev.lr)
    lr = np.clip(lr, np.minimum(prev.lr, current.lr), np.maximum(prev.lr, current.lr))

    depth = prev.target_depth + forgetting * (current.target_depth - prev.target_depth)

    return ObjectModel(
        lr=lr,
        active_bins=np.union1d(prev.active_bins, current.active_bins),
        epsilon=prev.epsilon,
        alpha=prev.alpha,
        target_depth=float(depth),
        rng_seed=prev.rng_seed,
    )
