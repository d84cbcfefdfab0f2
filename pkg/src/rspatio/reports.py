"""
RSpatio - Relatórios
====================

Escreve os resultados de tracking:
- ficheiro de caixas por frame (CSV)
- registo de métricas (chave = valor)
- série de erro de centro por frame (CSV, pronta para gráfico)
- resumo de benchmark em Markdown com os valores de referência publicados
"""

from __future__ import annotations

import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from .evaluation import EvalReport, GroundTruth, evaluate
from .frames import BoundingBox
from .tracker import TrackResult

logger = logging.getLogger(__name__)

BOXES_COLUMNS = ["frame_index", "x", "y", "w", "h", "occluded", "similarity"]
CLE_COLUMNS = ["frame_index", "cle_px", "occluded", "tracker_occluded"]

# Valores publicados (ACLE px, AOR) do método r-spatiogram nas sequências Princeton
REFERENCE_RESULTS: Dict[str, tuple] = {
    "bear_front": (3.8, 0.92),
    "child_no1": (8.7, 0.80),
    "face_occ5": (6.3, 0.96),
    "new_ex_occ4": (11.2, 0.93),
    "zcup_move_1": (17.4, 0.45),
    "dog_occ_2": (8.7, 0.91),
    "express1_occ": (13.8, 0.77),
    "library2_1_occ": (10.8, 0.88),
    "hand_occ": (16.8, 0.82),
}


def boxes_frame(result: TrackResult) -> pd.DataFrame:
    """Caixas por frame como DataFrame (colunas BOXES_COLUMNS)."""
    rows = [
        {
            "frame_index": f.index,
            "x": f.bb.x,
            "y": f.bb.y,
            "w": f.bb.w,
            "h": f.bb.h,
            "occluded": int(f.occluded),
            "similarity": float(f.similarity),
        }
        for f in result.frames
    ]
    return pd.DataFrame(rows, columns=BOXES_COLUMNS)


def read_boxes(path: Union[str, Path]) -> List[BoundingBox]:
    """Lê um ficheiro de caixas escrito por write_boxes."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Ficheiro não encontrado: {path}")
    df = pd.read_csv(path)
    missing = [c for c in BOXES_COLUMNS[:5] if c not in df.columns]
    if missing:
        raise ValueError(f"boxes file missing columns: {missing}")
    df = df.sort_values("frame_index", kind="stable")
    return [BoundingBox(int(r.x), int(r.y), int(r.w), int(r.h)) for r in df.itertuples(index=False)]


def format_metrics(metrics: Dict[str, object]) -> str:
    lines = []
    for key, value in metrics.items():
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> Dict[str, float]:
    metrics = {}
    for line in text.splitlines():
        if "=" in line:
            key, value = (part.strip() for part in line.split("=", 1))
            metrics[key] = float(value)
    return metrics


class ReportGenerator:
    """
    Escreve os ficheiros de resultado de uma sequência.

    Exemplo:
        generator = ReportGenerator("out/bear_front")
        paths = generator.emit(result, ground_truth)
    """

    BOXES_FILE = "boxes.csv"
    METRICS_FILE = "metrics.txt"
    CLE_FILE = "cle.csv"

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def _prepare(self) -> None:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"unwritable output path {self.out_dir}: {exc}") from exc

    def write_boxes(self, result: TrackResult) -> Path:
        self._prepare()
        path = self.out_dir / self.BOXES_FILE
        boxes_frame(result).to_csv(path, index=False, lineterminator="\n")
        return path

    def write_cle(self, report: EvalReport, result: Optional[TrackResult] = None) -> Path:
        """
        Uma linha por frame; cle_px fica vazio nos frames com ground truth oculto.

        `occluded` marca o ground truth oculto, `tracker_occluded` o estado do tracker.
        """
        self._prepare()
        path = self.out_dir / self.CLE_FILE
        flags = [f.occluded for f in result.frames] if result is not None else []
        rows = [
            {
                "frame_index": i,
                "cle_px": cle,
                "occluded": int(cle is None),
                "tracker_occluded": int(flags[i]) if i < len(flags) else 0,
            }
            for i, cle in enumerate(report.per_frame_cle)
        ]
        table = pd.DataFrame(rows, columns=CLE_COLUMNS)
        table["cle_px"] = table["cle_px"].astype(float)
        table.to_csv(path, index=False, na_rep="", lineterminator="\n")
        return path

    def write_metrics(self, report: EvalReport, result: TrackResult) -> Path:
        self._prepare()
        path = self.out_dir / self.METRICS_FILE
        metrics = {
            "acle_px": float(report.acle),
            "aor": float(report.aor),
            "frames": len(result),
            "occluded_frames": result.occluded_frames,
            "ms_per_frame": float(result.ms_per_frame),
        }
        path.write_text(format_metrics(metrics), encoding="utf-8")
        return path

    def emit(
        self, result: TrackResult, ground_truth: Optional[GroundTruth] = None
    ) -> Dict[str, object]:
        """
        Escreve caixas, métricas e série de CLE.

        Sem ground truth só o ficheiro de caixas é escrito e as métricas
        ficam ausentes (None).

        Returns:
            dict com os caminhos boxes, metrics, cle e o EvalReport (report)
        """
        paths: Dict[str, object] = {
            "boxes": self.write_boxes(result),
            "metrics": None,
            "cle": None,
            "report": None,
        }
        if ground_truth is None:
            logger.info(f"{result.sequence}: sem ground truth, métricas ausentes")
            return paths

        report = evaluate(result.boxes, list(ground_truth))
        paths["metrics"] = self.write_metrics(report, result)
        paths["cle"] = self.write_cle(report, result)
        paths["report"] = report
        logger.info(f"Relatório de {result.sequence} guardado em {self.out_dir}")
        return paths

    def export_json(self, result: TrackResult) -> Path:
        """Exporta o resultado completo (incluindo razões de falha) em JSON."""
        self._prepare()
        path = self.out_dir / "track.json"
        data = {
            "sequence": result.sequence,
            "config": result.config.to_dict(),
            "frames": [
                {
                    "index": f.index,
                    "bb": list(f.bb.as_tuple()),
                    "occluded": f.occluded,
                    "similarity": f.similarity,
                    "failed": f.failed,
                    "reason": f.reason,
                    "degraded": f.degraded,
                    "recovered": f.recovered,
                    "model_hash": f.model_hash,
                }
                for f in result.frames
            ],
        }
        path.write_text(json.dumps(data, indent=2, ensure_ascii=False), encoding="utf-8")
        return path


def _cell(value: Optional[float], fmt: str) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return format(value, fmt)


def bench_summary_markdown(rows: List[Dict[str, object]]) -> str:
    """
    Tabela de benchmark em Markdown.

    Cada linha: sequence, frames, acle_px, aor, occluded_frames, ms_per_frame
    (acle_px / aor podem ser None sem ground truth). Os valores de referência
    entram lado a lado quando o nome da sequência coincide.
    """
    now = datetime.now()
    md = f"""# RSpatio - Resumo de Benchmark

Gerado em {now.strftime('%d/%m/%Y %H:%M')}

| Sequência | Frames | ACLE (px) | AOR | Frames em oclusão | ms/frame | ACLE ref. | AOR ref. |
|-----------|--------|-----------|-----|-------------------|----------|-----------|----------|
"""
    for row in rows:
        ref_acle, ref_aor = REFERENCE_RESULTS.get(str(row["sequence"]), (None, None))
        md += (
            f"| {row['sequence']} | {row['frames']} | {_cell(row.get('acle_px'), '.1f')} "
            f"| {_cell(row.get('aor'), '.2f')} | {row['occluded_frames']} "
            f"| {_cell(row.get('ms_per_frame'), '.1f')} | {_cell(ref_acle, '.1f')} "
            f"| {_cell(ref_aor, '.2f')} |\n"
        )

    evaluated = [r for r in rows if r.get("acle_px") is not None]
    if evaluated:
        mean_acle = sum(float(r["acle_px"]) for r in evaluated) / len(evaluated)
        mean_aor = sum(float(r["aor"]) for r in evaluated) / len(evaluated)
        md += f"\n**Média** ({len(evaluated)} sequências): ACLE {mean_acle:.1f} px, AOR {mean_aor:.2f}\n"

    md += """
Os valores de referência dependem de hiperparâmetros não publicados
(bins, sub-regiões, alpha, K, tamanhos de pesquisa); a comparação é
indicativa, sem tolerância numérica.
"""
    return md


def write_bench_summary(rows: List[Dict[str, object]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(bench_summary_markdown(rows), encoding="utf-8")
    logger.info(f"Resumo de benchmark guardado em {path}")
    return path
