"""
RSpatio - Descritores (histograma, spatiogram, r-spatiogram)
============================================================

Calcula descritores de região sobre cor quantizada ou profundidade:
- Histograma normalizado
- Spatiogram: histograma + média (e covariância opcional) espacial por bin
- r-spatiogram: spatiogram + rácios por sub-região de cada bin

E a medida de semelhança entre r-spatiograms (Bhattacharyya ponderado pela
distância espacial e pela semelhança de composição por sub-região).

As médias espaciais ficam em coordenadas normalizadas à região ([-1, 1] por
eixo, centros de pixel), para que caixas de tamanhos diferentes sejam
comparáveis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .frames import BoundingBox, RgbdFrame

logger = logging.getLogger(__name__)

# Regularização aplicada a covariâncias degeneradas (pixels colineares)
COVARIANCE_RIDGE = 1e-4

# Sigma isotrópico (unidades normalizadas) quando não há covariâncias
DEFAULT_SPATIAL_SIGMA = 0.25


@dataclass(frozen=True)
class Quantizer:
    """
    Quantizador uniforme conjunto.

    Cada canal em [0, 255] é dividido em `levels_per_channel` níveis e os
    níveis combinam-se posicionalmente (primeiro canal mais significativo).
    """

    levels_per_channel: int = 8
    channel_count: int = 3

    def __post_init__(self):
        if self.levels_per_channel < 1 or self.channel_count < 1:
            raise ValueError("quantizer levels and channel count must be positive")

    @property
    def bin_count(self) -> int:
        return self.levels_per_channel**self.channel_count

    def quantize(self, values: np.ndarray) -> np.ndarray:
        """
        Converte pixels em índices de bin.

        Args:
            values: array (..., channel_count) ou (...) quando channel_count == 1

        Returns:
            Array inteiro com o índice de bin de cada pixel, em [0, B)
        """
        values = np.asarray(values)
        if self.channel_count > 1 and (values.ndim == 0 or values.shape[-1] != self.channel_count):
            raise ValueError(
                f"expected {self.channel_count} channels, got array of shape {values.shape}"
            )
        if values.size and (values.min() < 0 or values.max() > 255):
            raise ValueError("pixel values outside quantizer range [0, 255]")

        levels = np.floor(values.astype(np.float64) * self.levels_per_channel / 256.0)
        levels = np.clip(levels, 0, self.levels_per_channel - 1).astype(np.int64)

        if self.channel_count == 1:
            return levels

        index = np.zeros(levels.shape[:-1], dtype=np.int64)
        for channel in range(self.channel_count):
            index = index * self.levels_per_channel + levels[..., channel]
        return index

    def bin_center(self, bin_index: int) -> float:
        """Valor central de um bin (só faz sentido para 1 canal)."""
        width = 256.0 / self.levels_per_channel
        return (bin_index + 0.5) * width


@dataclass(frozen=True)
class SubregionGrid:
    """Grelha regular rows x cols; o resto da divisão vai para a última linha/coluna."""

    rows: int = 3
    cols: int = 3

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("subregion grid dimensions must be positive")

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    def cell_index(self, height: int, width: int) -> np.ndarray:
        """Índice de célula (row-major) de cada pixel de uma região height x width."""
        if height < self.rows or width < self.cols:
            raise ValueError(
                f"grid exceeds region: {self.rows}x{self.cols} grid on {height}x{width} region"
            )
        row_idx = np.minimum(np.arange(height) // (height // self.rows), self.rows - 1)
        col_idx = np.minimum(np.arange(width) // (width // self.cols), self.cols - 1)
        return row_idx[:, None] * self.cols + col_idx[None, :]


def _freeze(*arrays: Optional[np.ndarray]) -> None:
    for array in arrays:
        if array is not None:
            array.setflags(write=False)


@dataclass(frozen=True)
class Spatiogram:
    """
    Spatiogram de uma região.

    Attributes:
        counts: (B,) contagens normalizadas (soma 1)
        means: (B, 2) média (x, y) normalizada por bin; (0, 0) nos bins vazios
        covariances: (B, 2, 2) covariâncias por bin, ou None
        tallies: (B,) contagens inteiras de pixels
        region_shape: (altura, largura) da região descrita
    """

    counts: np.ndarray
    means: np.ndarray
    covariances: Optional[np.ndarray]
    tallies: np.ndarray
    region_shape: tuple

    def __post_init__(self):
        _freeze(self.counts, self.means, self.covariances, self.tallies)

    @property
    def bin_count(self) -> int:
        return int(self.counts.shape[0])

    def mean_in_frame(self, bin_index: int, origin: BoundingBox) -> tuple:
        """Converte a média de um bin para coordenadas do frame (centros de pixel)."""
        height, width = self.region_shape
        mx, my = self.means[bin_index]
        return (origin.x + (mx + 1.0) * width / 2.0, origin.y + (my + 1.0) * height / 2.0)


@dataclass(frozen=True)
class RSpatiogram:
    """
    r-spatiogram: spatiogram + rácios por sub-região.

    Attributes:
        base: Spatiogram da região inteira
        ratios: (B, M) fracção da contagem de cada bin que cai em cada sub-região
        cell_tallies: (B, M) contagens inteiras por bin e sub-região
    """

    base: Spatiogram
    ratios: np.ndarray
    cell_tallies: np.ndarray

    def __post_init__(self):
        _freeze(self.ratios, self.cell_tallies)

    @property
    def counts(self) -> np.ndarray:
        return self.base.counts

    @property
    def means(self) -> np.ndarray:
        return self.base.means

    @property
    def covariances(self) -> Optional[np.ndarray]:
        return self.base.covariances

    @property
    def bin_count(self) -> int:
        return self.base.bin_count

    @property
    def cell_count(self) -> int:
        return int(self.ratios.shape[1])


def _require_nonempty(region: np.ndarray) -> None:
    if region.size == 0 or region.shape[0] == 0 or region.shape[1] == 0:
        raise ValueError("empty region")


def normalized_coordinates(height: int, width: int) -> tuple:
    """Grelhas (x, y) em [-1, 1] com centros de pixel: (2(i + 0.5) / w) - 1."""
    xs = 2.0 * (np.arange(width) + 0.5) / width - 1.0
    ys = 2.0 * (np.arange(height) + 0.5) / height - 1.0
    return np.meshgrid(xs, ys)


def _spatiogram_from_bins(bins: np.ndarray, bin_count: int, with_covariance: bool) -> Spatiogram:
    height, width = bins.shape
    flat = bins.ravel()
    xs, ys = normalized_coordinates(height, width)
    xs = xs.ravel()
    ys = ys.ravel()

    tallies = np.bincount(flat, minlength=bin_count)
    occupied = tallies > 0
    safe = np.where(occupied, tallies, 1).astype(np.float64)

    counts = tallies / float(flat.size)

    means = np.zeros((bin_count, 2))
    means[:, 0] = np.bincount(flat, weights=xs, minlength=bin_count) / safe
    means[:, 1] = np.bincount(flat, weights=ys, minlength=bin_count) / safe
    means[~occupied] = 0.0

    covariances = None
    if with_covariance:
        exx = np.bincount(flat, weights=xs * xs, minlength=bin_count) / safe
        eyy = np.bincount(flat, weights=ys * ys, minlength=bin_count) / safe
        exy = np.bincount(flat, weights=xs * ys, minlength=bin_count) / safe

        covariances = np.zeros((bin_count, 2, 2))
        covariances[:, 0, 0] = np.maximum(exx - means[:, 0] ** 2, 0.0)
        covariances[:, 1, 1] = np.maximum(eyy - means[:, 1] ** 2, 0.0)
        covariances[:, 0, 1] = covariances[:, 1, 0] = exy - means[:, 0] * means[:, 1]
        covariances[~occupied] = 0.0

        det = np.linalg.det(covariances)
        degenerate = occupied & (det <= 1e-12)
        covariances[degenerate] += COVARIANCE_RIDGE * np.eye(2)

    return Spatiogram(
        counts=counts,
        means=means,
        covariances=covariances,
        tallies=tallies,
        region_shape=(height, width),
    )


def compute_histogram(region: np.ndarray, quantizer: Quantizer) -> np.ndarray:
    """
    Histograma normalizado de uma região.

    Args:
        region: pixels da região (h x w x C, ou h x w para 1 canal)
        quantizer: quantizador de features

    Returns:
        Vector (B,) com soma 1
    """
    region = np.asarray(region)
    _require_nonempty(region)
    bins = quantizer.quantize(region).ravel()
    return np.bincount(bins, minlength=quantizer.bin_count) / float(bins.size)


def compute_rspatiogram(
    region: np.ndarray,
    quantizer: Quantizer,
    grid: SubregionGrid = SubregionGrid(),
    with_covariance: bool = False,
) -> RSpatiogram:
    """
    r-spatiogram de uma região.

    Args:
        region: pixels da região
        quantizer: quantizador de features
        grid: partição em sub-regiões
        with_covariance: calcular covariâncias espaciais por bin

    Returns:
        RSpatiogram com contagens, médias, rácios e (opcionalmente) covariâncias
    """
    region = np.asarray(region)
    _require_nonempty(region)
    height, width = region.shape[:2]
    cells = grid.cell_index(height, width)

    bins = quantizer.quantize(region)
    base = _spatiogram_from_bins(bins, quantizer.bin_count, with_covariance)

    joint = bins.ravel() * grid.cell_count + cells.ravel()
    cell_tallies = np.bincount(joint, minlength=quantizer.bin_count * grid.cell_count)
    cell_tallies = cell_tallies.reshape(quantizer.bin_count, grid.cell_count)

    occupied = base.tallies > 0
    ratios = np.zeros(cell_tallies.shape)
    ratios[occupied] = cell_tallies[occupied] / base.tallies[occupied, None]

    return RSpatiogram(base=base, ratios=ratios, cell_tallies=cell_tallies)


def depth_spatiogram(
    depth_region: np.ndarray,
    quantizer: Quantizer = Quantizer(levels_per_channel=32, channel_count=1),
    with_covariance: bool = False,
) -> Spatiogram:
    """Spatiogram de profundidade normalizada (valores em [0, 255])."""
    depth_region = np.asarray(depth_region)
    _require_nonempty(depth_region)
    if quantizer.channel_count != 1:
        raise ValueError("depth spatiogram needs a single-channel quantizer")
    bins = quantizer.quantize(depth_region)
    return _spatiogram_from_bins(bins, quantizer.bin_count, with_covariance)


def ratio_similarity(
    ratios_a: np.ndarray, ratios_b: np.ndarray, clamped: bool = False
) -> np.ndarray:
    """
    Semelhança por bin entre vectores de rácios.

    rDist_b = sum_i |r_ib - r'_ib|. Forma literal: s_b = |1 - rDist_b|.
    Variante `clamped`: s_b = max(0, 1 - rDist_b / 2), monótona.
    """
    ratios_a = np.asarray(ratios_a, dtype=np.float64)
    ratios_b = np.asarray(ratios_b, dtype=np.float64)
    if ratios_a.shape != ratios_b.shape or ratios_a.ndim != 2:
        raise ValueError(f"descriptor shape mismatch: {ratios_a.shape} vs {ratios_b.shape}")

    r_dist = np.abs(ratios_a - ratios_b).sum(axis=1)
    if clamped:
        return np.maximum(0.0, 1.0 - r_dist / 2.0)
    return np.abs(1.0 - r_dist)


def _spatial_weights(
    means_a: np.ndarray,
    means_b: np.ndarray,
    cov_a: Optional[np.ndarray],
    cov_b: Optional[np.ndarray],
    sigma: float,
) -> np.ndarray:
    delta = means_a - means_b

    if cov_a is None or cov_b is None:
        return np.exp(-(delta**2).sum(axis=1) / (8.0 * sigma**2))

    # 8*pi*|S S'|^(1/4) * N(mu; mu', 2(S + S'))
    combined = 2.0 * (cov_a + cov_b)
    a = combined[:, 0, 0]
    b = combined[:, 0, 1]
    d = combined[:, 1, 1]
    det_combined = a * d - b * b
    maha = (d * delta[:, 0] ** 2 - 2.0 * b * delta[:, 0] * delta[:, 1] + a * delta[:, 1] ** 2) / det_combined
    gaussian = np.exp(-0.5 * maha) / (2.0 * math.pi * np.sqrt(det_combined))

    det_a = cov_a[:, 0, 0] * cov_a[:, 1, 1] - cov_a[:, 0, 1] * cov_a[:, 1, 0]
    det_b = cov_b[:, 0, 0] * cov_b[:, 1, 1] - cov_b[:, 0, 1] * cov_b[:, 1, 0]
    return 8.0 * math.pi * (det_a * det_b) ** 0.25 * gaussian


def rspatiogram_similarity(
    a: RSpatiogram,
    b: RSpatiogram,
    sigma: float = DEFAULT_SPATIAL_SIGMA,
    clamped: bool = False,
) -> float:
    """
    Semelhança rho entre dois r-spatiograms.

    rho = sum_b s_b * sqrt(n_b n'_b) * w_b, com s_b por bin e w_b o peso
    gaussiano espacial. Sem covariâncias (em qualquer dos lados) usa-se
    Sigma = sigma^2 I, ou seja w_b = exp(-|mu_b - mu'_b|^2 / (8 sigma^2)).
    """
    if a.bin_count != b.bin_count or a.ratios.shape != b.ratios.shape:
        raise ValueError(
            f"descriptor shape mismatch: B={a.bin_count}/{b.bin_count}, "
            f"M={a.cell_count}/{b.cell_count}"
        )

    overlap = a.counts * b.counts
    active = overlap > 0
    if not active.any():
        return 0.0

    s = ratio_similarity(a.ratios[active], b.ratios[active], clamped=clamped)
    cov_a = a.covariances[active] if a.covariances is not None else None
    cov_b = b.covariances[active] if b.covariances is not None else None
    weights = _spatial_weights(a.means[active], b.means[active], cov_a, cov_b, sigma)

    return float(np.sum(s * np.sqrt(overlap[active]) * weights))


@dataclass(frozen=True)
class RSpatiogramMatcher:
    """
    Agrupa os parâmetros do descritor de aparência usados pelo tracker.

    Exemplo:
        matcher = RSpatiogramMatcher()
        reference = matcher.describe(frame, bb)
        rho = matcher.similarity(reference, matcher.describe(frame, other_bb))
    """

    quantizer: Quantizer = Quantizer()
    grid: SubregionGrid = SubregionGrid()
    with_covariance: bool = False
    sigma: float = DEFAULT_SPATIAL_SIGMA
    clamped: bool = False

    def describe(self, frame: RgbdFrame, bb: BoundingBox) -> RSpatiogram:
        frame.require_inside(bb)
        return compute_rspatiogram(
            frame.color[bb.slices], self.quantizer, self.grid, self.with_covariance
        )

    def similarity(self, a: RSpatiogram, b: RSpatiogram) -> float:
        return rspatiogram_similarity(a, b, sigma=self.sigma, clamped=self.clamped)

    def box_similarity(self, frame: RgbdFrame, bb: BoundingBox, reference: RSpatiogram) -> float:
        return self.similarity(self.describe(frame, bb), reference)
