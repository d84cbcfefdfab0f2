"""
RSpatio - Segmentação de Profundidade
=====================================

Pipeline de profundidade por frame:
1. Normalização para [0, 255] com inversão (mais perto = maior)
2. K-means 1-D sobre os valores válidos (inicialização nos quantis)
3. Componentes conexas (8-conectividade) por cluster
4. Máscara CCR da componente do alvo
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import cv2
import numpy as np
import pandas as pd
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .frames import BoundingBox

logger = logging.getLogger(__name__)

DEFAULT_CLUSTERS = 4
DEFAULT_DEPTH_TOLERANCE = 15.0


@dataclass(frozen=True)
class ClusterMap:
    """
    Resultado do K-means de profundidade.

    Attributes:
        labels: índice de cluster por pixel, em [0, K)
        centers: centros ordenados ascendentemente
        requested_clusters: K pedido (pode ser maior que len(centers))
    """

    labels: np.ndarray
    centers: np.ndarray
    requested_clusters: int

    @property
    def cluster_count(self) -> int:
        return int(self.centers.shape[0])

    @property
    def reduced(self) -> bool:
        return self.cluster_count < self.requested_clusters


@dataclass(frozen=True)
class ComponentSet:
    """
    Componentes conexas de igual cluster.

    Attributes:
        labels: id de componente por pixel (denso, a partir de 0)
        records: DataFrame com component_id, cluster, depth, area, centroid_x, centroid_y
    """

    labels: np.ndarray
    records: pd.DataFrame

    @property
    def component_count(self) -> int:
        return len(self.records)

    def depth_of(self, component_id: int) -> float:
        return float(self.records.at[component_id, "depth"])


@dataclass(frozen=True)
class ComponentMask:
    """Máscara CCR binária sobre a região pedida."""

    mask: np.ndarray
    degraded: bool = False
    component_id: Optional[int] = None


def normalize_depth(
    raw: np.ndarray,
    invalid_marker: float = 0,
    depth_range: Optional[Tuple[float, float]] = None,
) -> np.ndarray:
    """
    Normaliza profundidade bruta para [0, 255], invertida.

    O mínimo bruto (mais perto) vai para 255, o máximo para 0. Pixels
    inválidos ficam a 0. Profundidade de 8 bits é tratada como já normalizada.

    Args:
        raw: profundidade bruta (mm) ou normalizada em uint8
        invalid_marker: valor que marca pixels inválidos
        depth_range: (perto, longe) fixos; None = mínimo/máximo deste frame

    Returns:
        Array float64 em [0, 255]
    """
    raw = np.asarray(raw)
    valid = raw != invalid_marker
    if not valid.any():
        raise ValueError("empty depth frame")

    if raw.dtype == np.uint8:
        return np.where(valid, raw, 0).astype(np.float64)

    values = raw.astype(np.float64)
    if depth_range is None:
        near = float(values[valid].min())
        far = float(values[valid].max())
    else:
        near, far = (float(v) for v in depth_range)

    normalized = np.zeros(values.shape)
    if far <= near:
        normalized[valid] = 255.0
    else:
        clipped = np.clip(values[valid], near, far)
        normalized[valid] = (far - clipped) * 255.0 / (far - near)
    return normalized


def _quantile_init(values: np.ndarray, clusters: int) -> np.ndarray:
    positions = (np.arange(clusters) + 0.5) / clusters
    init = np.quantile(values, positions)
    if np.unique(init).size < clusters:
        # quantis repetidos: usar os quantis dos valores distintos
        init = np.quantile(np.unique(values), positions)
    return init


def kmeans_depth(
    depth: np.ndarray,
    clusters: int = DEFAULT_CLUSTERS,
    max_iter: int = 50,
    seed: int = 0,
    valid: Optional[np.ndarray] = None,
) -> ClusterMap:
    """
    K-means (Lloyd) 1-D sobre a profundidade normalizada.

    Args:
        depth: profundidade normalizada
        clusters: K (>= 2)
        max_iter: limite de iterações
        seed: seed passada ao KMeans (a inicialização é determinística)
        valid: máscara de pixels a usar no ajuste; None = todos

    Returns:
        ClusterMap com centros ordenados e cada pixel no centro mais próximo
    """
    if clusters < 2:
        raise ValueError(f"K must be at least 2, got {clusters}")
    depth = np.asarray(depth, dtype=np.float64)
    if depth.size == 0:
        raise ValueError("empty depth frame")

    values = depth[valid] if valid is not None else depth.ravel()
    if values.size == 0:
        raise ValueError("empty depth frame")

    distinct = np.unique(values).size
    k = min(clusters, distinct)
    if k < clusters:
        logger.debug(f"K-means: apenas {distinct} valores distintos, K reduzido de {clusters} para {k}")

    if k == 1:
        centers = np.array([values.mean()])
    else:
        init = _quantile_init(values, k).reshape(-1, 1)
        model = KMeans(
            n_clusters=k,
            init=init,
            n_init=1,
            max_iter=max_iter,
            tol=0.0,
            random_state=seed,
            algorithm="lloyd",
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            model.fit(values.reshape(-1, 1))
        centers = np.sort(model.cluster_centers_.ravel())

    labels = np.abs(depth[..., None] - centers).argmin(axis=-1)
    return ClusterMap(labels=labels, centers=centers, requested_clusters=clusters)


def connected_components(cluster_map: ClusterMap) -> ComponentSet:
    """
    Componentes 8-conexas de pixels com o mesmo cluster.

    Returns:
        ComponentSet com ids densos e registos (área, centróide, cluster)
    """
    labels = cluster_map.labels
    component_labels = np.full(labels.shape, -1, dtype=np.int64)
    rows = []
    next_id = 0

    for cluster in range(cluster_map.cluster_count):
        binary = (labels == cluster).astype(np.uint8)
        if not binary.any():
            continue
        count, local, stats, centroids = cv2.connectedComponentsWithStats(binary, connectivity=8)
        inside = local > 0
        component_labels[inside] = local[inside] - 1 + next_id
        for local_id in range(1, count):
            rows.append(
                {
                    "component_id": next_id + local_id - 1,
                    "cluster": cluster,
                    "depth": float(cluster_map.centers[cluster]),
                    "area": int(stats[local_id, cv2.CC_STAT_AREA]),
                    "centroid_x": float(centroids[local_id, 0]) + 0.5,
                    "centroid_y": float(centroids[local_id, 1]) + 0.5,
                }
            )
        next_id += count - 1

    records = pd.DataFrame(
        rows, columns=["component_id", "cluster", "depth", "area", "centroid_x", "centroid_y"]
    ).set_index("component_id", drop=False)
    return ComponentSet(labels=component_labels, records=records)


def target_component_mask(
    components: ComponentSet,
    target_center: Tuple[float, float],
    target_depth: float,
    region: BoundingBox,
    depth_tolerance: float = DEFAULT_DEPTH_TOLERANCE,
) -> ComponentMask:
    """
    Máscara CCR da componente do alvo dentro de `region`.

    Usa a componente sob `target_center` se a sua profundidade estiver a
    `depth_tolerance` do alvo; senão a maior componente (dentro da região)
    que passe o teste; senão uma máscara toda a 1 (modo degradado).
    """
    height, width = components.labels.shape
    if region.is_degenerate or not BoundingBox(0, 0, width, height).contains_box(region):
        raise ValueError(f"region outside frame: {region.as_tuple()}")

    local = components.labels[region.slices]
    depths = components.records["depth"].to_numpy()
    passing = np.abs(depths - target_depth) <= depth_tolerance

    cx, cy = int(np.floor(target_center[0])), int(np.floor(target_center[1]))
    if 0 <= cx < width and 0 <= cy < height:
        center_id = int(components.labels[cy, cx])
        if passing[center_id]:
            mask = (local == center_id).astype(np.uint8)
            if mask.any():
                return ComponentMask(mask=mask, component_id=center_id)

    areas = np.bincount(local.ravel(), minlength=len(depths))
    areas = np.where(passing, areas, 0)
    if areas.max(initial=0) > 0:
        best = int(np.argmax(areas))
        return ComponentMask(mask=(local == best).astype(np.uint8), component_id=best)

    logger.warning(
        f"Nenhuma componente a {depth_tolerance} da profundidade do alvo ({target_depth:.1f}); "
        "máscara degradada"
    )
    return ComponentMask(mask=np.ones(local.shape, dtype=np.uint8), degraded=True)
