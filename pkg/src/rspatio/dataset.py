"""
RSpatio - Carregamento de Sequências RGB-D
==========================================

Lê sequências no formato:

    <seq>/rgb/      imagens de cor numeradas (8 bits)
    <seq>/depth/    imagens de profundidade numeradas (16 bits, mm)
    <seq>/init.txt  "x,y,w,h" da caixa inicial
    <seq>/gt.txt    opcional, uma linha "x,y,w,h" ou "occ" por frame

Os frames são ordenados pelo último número inteiro do nome do ficheiro, o
que cobre nomes com zeros à esquerda e o esquema "r-<timestamp>-<n>.png".
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import cv2
import numpy as np
import pandas as pd

from .depth_segmentation import normalize_depth
from .evaluation import GroundTruth
from .frames import BoundingBox, RgbdFrame, round_half_up

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".tif", ".tiff"}
INVALID_DEPTH = 0

_NUMBER = re.compile(r"(\d+)")


def frame_number(path: Path) -> int:
    """Último inteiro no nome do ficheiro (sem extensão)."""
    numbers = _NUMBER.findall(path.stem)
    if not numbers:
        raise ValueError(f"unnumbered frame file: {path.name}")
    return int(numbers[-1])


def decode_princeton_depth(raw: np.ndarray) -> np.ndarray:
    """Desfaz a rotação de 3 bits usada no armazenamento de profundidade de 16 bits."""
    raw = np.asarray(raw).astype(np.uint16)
    return ((raw >> 3) | (raw << 13)).astype(np.uint16)


def parse_init_box(text: str) -> BoundingBox:
    """Interpreta "x,y,w,h" (vírgulas ou espaços)."""
    line = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
    parts = [p for p in re.split(r"[,\s]+", line) if p]
    try:
        if len(parts) != 4:
            raise ValueError(line)
        x, y, w, h = (round_half_up(float(p)) for p in parts)
    except ValueError as exc:
        raise ValueError(f"unparsable init box: {line!r}") from exc
    bb = BoundingBox(x, y, w, h)
    if bb.is_degenerate:
        raise ValueError(f"degenerate bounding box: {bb.as_tuple()}")
    return bb


def read_ground_truth(path: Union[str, Path]) -> GroundTruth:
    """
    Lê gt.txt: "x,y,w,h" por linha; "occ" (ou NaN) marca frame oculto.

    Returns:
        GroundTruth com None nos frames ocultos
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Ficheiro não encontrado: {path}")

    df = pd.read_csv(
        path,
        header=None,
        names=["x", "y", "w", "h"],
        na_values=["occ", "NaN", "nan"],
        skip_blank_lines=True,
        skipinitialspace=True,
    )
    try:
        df = df.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as exc:
        raise ValueError(f"unparsable ground truth in {path}: {exc}") from exc

    boxes: List[Optional[BoundingBox]] = []
    for row in df.itertuples(index=False):
        if any(pd.isna(v) for v in row):
            boxes.append(None)
        else:
            boxes.append(BoundingBox(*(round_half_up(float(v)) for v in row)))

    gt = GroundTruth.from_list(boxes)
    logger.info(f"Ground truth: {len(gt)} frames, {len(gt.occluded_indices)} ocultos")
    return gt


def _numbered_images(folder: Path) -> Dict[int, Path]:
    if not folder.is_dir():
        raise FileNotFoundError(f"Pasta não encontrada: {folder}")
    images = {}
    for path in folder.iterdir():
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        number = frame_number(path)
        if number in images:
            raise ValueError(f"duplicate frame number {number} in {folder}")
        images[number] = path
    return dict(sorted(images.items()))


def read_color(path: Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise ValueError(f"unreadable image: {path}")
    if image.ndim == 2:
        image = cv2.cvtColor(image, cv2.COLOR_GRAY2RGB)
    elif image.shape[2] == 4:
        image = cv2.cvtColor(image, cv2.COLOR_BGRA2RGB)
    else:
        image = cv2.cvtColor(image, cv2.COLOR_BGR2RGB)
    if image.dtype != np.uint8:
        raise ValueError(f"color image must be 8-bit: {path}")
    return image


def read_raw_depth(path: Path, princeton_depth: bool = False) -> np.ndarray:
    depth = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if depth is None:
        raise ValueError(f"unreadable image: {path}")
    if depth.ndim == 3:
        depth = depth[..., 0]
    if princeton_depth and depth.dtype == np.uint16:
        depth = decode_princeton_depth(depth)
    return depth


@dataclass
class RgbdSequence:
    """
    Sequência carregada (frames lidos sob pedido).

    Attributes:
        name: nome da pasta
        init_box: caixa do frame 0
        ground_truth: GroundTruth ou None
        color_paths / depth_paths: ficheiros ordenados
        depth_range: (perto, longe) em unidades brutas; None = por frame
        princeton_depth: descodificar a rotação de bits da profundidade
    """

    name: str
    init_box: BoundingBox
    color_paths: List[Path]
    depth_paths: List[Path]
    ground_truth: Optional[GroundTruth] = None
    depth_range: Optional[Tuple[float, float]] = None
    princeton_depth: bool = False
    root: Optional[Path] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.color_paths)

    def frame(self, index: int) -> RgbdFrame:
        color = read_color(self.color_paths[index])
        raw = read_raw_depth(self.depth_paths[index], self.princeton_depth)
        valid = raw != INVALID_DEPTH
        if valid.any():
            depth = normalize_depth(raw, INVALID_DEPTH, self.depth_range)
        else:
            logger.warning(f"Frame {index}: sem profundidade válida")
            depth = np.zeros(raw.shape)
        return RgbdFrame(color=color, depth=depth, depth_valid=valid)

    def frames(self) -> Iterator[RgbdFrame]:
        for index in range(len(self)):
            yield self.frame(index)


class SequenceLoader:
    """
    Carrega sequências RGB-D de disco.

    Exemplo:
        loader = SequenceLoader()
        sequence = loader.load("data/bear_front")
        for frame in sequence.frames():
            ...
    """

    def __init__(self, depth_normalization: str = "sequence", princeton_depth: bool = False):
        if depth_normalization not in ("sequence", "frame"):
            raise ValueError(f"unknown depth normalization: {depth_normalization}")
        self.depth_normalization = depth_normalization
        self.princeton_depth = princeton_depth

    def load(self, path: Union[str, Path]) -> RgbdSequence:
        """
        Carrega uma sequência.

        Args:
            path: pasta da sequência

        Returns:
            RgbdSequence
        """
        root = Path(path)
        if not root.is_dir():
            raise FileNotFoundError(f"Pasta não encontrada: {root}")

        colors = _numbered_images(root / "rgb")
        depths = _numbered_images(root / "depth")
        for position, number in enumerate(colors):
            if number not in depths:
                raise ValueError(f"missing depth frame {position}")
        if len(colors) != len(depths):
            raise ValueError(f"frame count mismatch: {len(colors)} color vs {len(depths)} depth")
        if not colors:
            raise ValueError(f"empty sequence: {root}")

        init_path = root / "init.txt"
        if not init_path.exists():
            raise FileNotFoundError(f"Ficheiro não encontrado: {init_path}")
        init_box = parse_init_box(init_path.read_text(encoding="utf-8"))

        ground_truth = None
        gt_path = root / "gt.txt"
        if gt_path.exists():
            ground_truth = read_ground_truth(gt_path)
            if len(ground_truth) != len(colors):
                raise ValueError(
                    f"frame count mismatch: {len(colors)} frames vs {len(ground_truth)} ground truth"
                )

        color_paths = list(colors.values())
        depth_paths = [depths[number] for number in colors]

        depth_range = None
        if self.depth_normalization == "sequence":
            depth_range = self._sequence_depth_range(depth_paths)

        logger.info(f"Carregada sequência {root.name}: {len(color_paths)} frames")
        return RgbdSequence(
            name=root.name,
            init_box=init_box,
            color_paths=color_paths,
            depth_paths=depth_paths,
            ground_truth=ground_truth,
            depth_range=depth_range,
            princeton_depth=self.princeton_depth,
            root=root,
        )

    def _sequence_depth_range(self, depth_paths: List[Path]) -> Optional[Tuple[float, float]]:
        """Mínimo e máximo da profundidade válida em toda a sequência."""
        near, far = np.inf, -np.inf
        for path in depth_paths:
            raw = read_raw_depth(path, self.princeton_depth)
            if raw.dtype == np.uint8:
                return None
            valid = raw[raw != INVALID_DEPTH]
            if valid.size:
                near = min(near, float(valid.min()))
                far = max(far, float(valid.max()))
        if not np.isfinite(near):
            return None
        return (near, far)


def load_sequence(
    path: Union[str, Path], depth_normalization: str = "sequence", princeton_depth: bool = False
) -> RgbdSequence:
    """Atalho para SequenceLoader(...).load(path)."""
    return SequenceLoader(depth_normalization, princeton_depth).load(path)


def discover_sequences(root: Union[str, Path]) -> List[Path]:
    """Subpastas de `root` com o layout de sequência (rgb/, depth/, init.txt)."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"Pasta não encontrada: {root}")
    return sorted(
        p
        for p in root.iterdir()
        if p.is_dir() and (p / "rgb").is_dir() and (p / "depth").is_dir() and (p / "init.txt").exists()
    )
