"""
RSpatio - Configuração do Tracker
=================================

Todos os parâmetros livres num único dataclass, serializável para um
ficheiro de texto `chave = valor` (comentários com #).

Exemplo:
    config = TrackerConfig.from_file("tracker.cfg").with_env_overrides()
    config.save("out/tracker.cfg")
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Union

from dotenv.parser import parse_stream

from .descriptors import Quantizer, RSpatiogramMatcher, SubregionGrid

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "RSPATIO_SEED"
DEPTH_NORMALIZATION_MODES = ("sequence", "frame")


@dataclass(frozen=True)
class TrackerConfig:
    """Parâmetros do tracker (valores por omissão = configuração de referência)."""

    levels_per_channel: int = 8
    depth_levels: int = 32
    grid_rows: int = 3
    grid_cols: int = 3
    alpha: float = 0.7
    epsilon: float = 1e-6
    forgetting_factor: float = 0.1
    kmeans_clusters: int = 4
    kmeans_max_iter: int = 50
    depth_tolerance: float = 15.0
    occlusion_fraction: float = 0.5
    similarity_threshold: float = 0.95
    stride_frac: float = 0.1
    top_frac: float = 0.1
    search_expand: float = 2.0
    search_scale: float = 1.5
    candidate_radius_scale: float = 1.5
    mean_shift_max_iter: int = 20
    mean_shift_eps: float = 1.0
    seed: int = 0
    clamped_ratio: bool = False
    with_covariance: bool = False
    spatial_sigma: float = 0.25
    bg_margin_min: int = 10
    bg_margin_frac: float = 0.5
    max_occluded_frames: int = 300
    depth_normalization: str = "sequence"

    def __post_init__(self):
        checks = [
            (self.levels_per_channel >= 1, "levels_per_channel must be >= 1"),
            (self.depth_levels >= 1, "depth_levels must be >= 1"),
            (self.grid_rows >= 1 and self.grid_cols >= 1, "grid dimensions must be >= 1"),
            (0.0 < self.alpha <= 1.0, "alpha must lie in (0, 1]"),
            (self.epsilon > 0.0, "epsilon must be positive"),
            (0.0 <= self.forgetting_factor <= 1.0, "forgetting_factor must lie in [0, 1]"),
            (self.kmeans_clusters >= 2, "kmeans_clusters must be >= 2"),
            (self.kmeans_max_iter >= 1, "kmeans_max_iter must be >= 1"),
            (self.depth_tolerance >= 0.0, "depth_tolerance must be non-negative"),
            (0.0 <= self.occlusion_fraction < 1.0, "occlusion_fraction must lie in [0, 1)"),
            (0.0 <= self.similarity_threshold <= 1.0, "similarity_threshold must lie in [0, 1]"),
            (0.0 < self.stride_frac <= 1.0, "stride_frac must lie in (0, 1]"),
            (0.0 < self.top_frac <= 1.0, "top_frac must lie in (0, 1]"),
            (self.search_expand >= 1.0, "search_expand must be >= 1"),
            (self.search_scale >= 1.0, "search_scale must be >= 1"),
            (self.candidate_radius_scale > 0.0, "candidate_radius_scale must be positive"),
            (self.mean_shift_max_iter >= 1, "mean_shift_max_iter must be >= 1"),
            (self.mean_shift_eps > 0.0, "mean_shift_eps must be positive"),
            (self.spatial_sigma > 0.0, "spatial_sigma must be positive"),
            (self.bg_margin_min >= 1, "bg_margin_min must be >= 1"),
            (self.bg_margin_frac >= 0.0, "bg_margin_frac must be non-negative"),
            (self.max_occluded_frames >= 1, "max_occluded_frames must be >= 1"),
            (
                self.depth_normalization in DEPTH_NORMALIZATION_MODES,
                f"depth_normalization must be one of {DEPTH_NORMALIZATION_MODES}",
            ),
        ]
        for ok, message in checks:
            if not ok:
                raise ValueError(message)

    # Objectos derivados

    @property
    def quantizer(self) -> Quantizer:
        return Quantizer(levels_per_channel=self.levels_per_channel, channel_count=3)

    @property
    def depth_quantizer(self) -> Quantizer:
        return Quantizer(levels_per_channel=self.depth_levels, channel_count=1)

    @property
    def grid(self) -> SubregionGrid:
        return SubregionGrid(rows=self.grid_rows, cols=self.grid_cols)

    @property
    def matcher(self) -> RSpatiogramMatcher:
        return RSpatiogramMatcher(
            quantizer=self.quantizer,
            grid=self.grid,
            with_covariance=self.with_covariance,
            sigma=self.spatial_sigma,
            clamped=self.clamped_ratio,
        )

    # Serialização

    def dumps(self) -> str:
        """Texto canónico: um campo por linha, na ordem do dataclass."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TrackerConfig":
        """Lê o formato `chave = valor` (mesma sintaxe de um ficheiro .env)."""
        known = {f.name: f for f in fields(cls)}
        values = {}
        for binding in parse_stream(io.StringIO(text)):
            if binding.error or (binding.key is not None and binding.value is None):
                raise ValueError(
                    f"malformed config line {binding.original.line}: "
                    f"{binding.original.string.strip()!r}"
                )
            if binding.key is None:
                continue
            if binding.key not in known:
                raise ValueError(f"unknown config key: {binding.key}")
            values[binding.key] = _parse_value(
                binding.key, binding.value.strip(), known[binding.key].type
            )
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TrackerConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Ficheiro não encontrado: {path}")
        config = cls.loads(path.read_text(encoding="utf-8"))
        logger.info(f"Configuração carregada de {path}")
        return config

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    def with_env_overrides(self) -> "TrackerConfig":
        """Aplica RSPATIO_SEED (se definida) por cima da seed do ficheiro."""
        raw = os.getenv(SEED_ENV_VAR)
        if raw is None or not raw.strip():
            return self
        try:
            seed = int(raw.strip())
        except ValueError as exc:
            raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc
        logger.info(f"Seed {seed} de {SEED_ENV_VAR} sobrepõe a seed {self.seed}")
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return asdict(self)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key: str, value: str, annotation) -> object:
    kind = annotation if isinstance(annotation, str) else getattr(annotation, "__name__", "")
    try:
        if kind == "bool":
            lowered = value.lower()
            if lowered not in ("true", "false"):
                raise ValueError(value)
            return lowered == "true"
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError as exc:
        raise ValueError(f"invalid value for {key}: {value!r}") from exc
    return value
