"""
RSpatio - Tracking RGB-D com r-spatiograms
==========================================

Tracker de um único alvo em sequências RGB-D que combina:
- Modelo do objecto por log-likelihood positivo sobre cor quantizada
- Segmentação de profundidade (K-means + componentes conexas)
- Localização por mean-shift no mapa mascarado
- Recuperação de oclusões com spatiograms de profundidade e r-spatiograms
- Métricas ACLE / AOR e gerador de sequências sintéticas

Uso básico:
    from rspatio import RSpatioTracking

    engine = RSpatioTracking()
    engine.load("data/bear_front")
    metrics = engine.run()
    engine.save_report("results/bear_front")
"""

__version__ = "1.0.0"

from typing import Optional

from .config import TrackerConfig
from .dataset import SequenceLoader, load_sequence
from .descriptors import RSpatiogramMatcher
from .evaluation import evaluate
from .reports import ReportGenerator
from .synthetic import SceneSpec, render_sequence, synthesize_sequence
from .tracker import RGBDTracker, TrackResult, run_tracker

__all__ = [
    "TrackerConfig",
    "SequenceLoader",
    "RSpatiogramMatcher",
    "RGBDTracker",
    "ReportGenerator",
    "SceneSpec",
    "TrackResult",
    "load_sequence",
    "render_sequence",
    "run_tracker",
    "synthesize_sequence",
    "RSpatioTracking",
]


class RSpatioTracking:
    """
    Classe principal que orquestra carregamento, tracking, avaliação e relatório.

    Exemplo:
        engine = RSpatioTracking(TrackerConfig(seed=3))
        engine.load("data/face_occ5")
        metrics = engine.run()
        engine.save_report("results/face_occ5")
    """

    def __init__(self, config: Optional[TrackerConfig] = None):
        self.config = config or TrackerConfig()
        self.sequence = None
        self.result: Optional[TrackResult] = None

    def load(self, path, princeton_depth: bool = False) -> "RSpatioTracking":
        """Carrega uma sequência de disco."""
        self.sequence = load_sequence(path, self.config.depth_normalization, princeton_depth)
        return self

    def use(self, sequence) -> "RSpatioTracking":
        """Usa uma sequência já carregada (por exemplo, render_sequence)."""
        self.sequence = sequence
        return self

    def run(self) -> dict:
        """
        Corre o tracker e avalia quando há ground truth.

        Returns:
            dict com frames, occluded_frames, failed_frames, ms_per_frame e,
            com ground truth, acle_px e aor
        """
        if self.sequence is None:
            raise ValueError("Sequência não carregada. Use load() primeiro.")

        self.result = run_tracker(self.sequence, self.config)
        metrics = {
            "frames": len(self.result),
            "occluded_frames": self.result.occluded_frames,
            "failed_frames": self.result.failed_frames,
            "ms_per_frame": self.result.ms_per_frame,
        }
        if self.sequence.ground_truth is not None:
            report = evaluate(self.result.boxes, list(self.sequence.ground_truth))
            metrics["acle_px"] = report.acle
            metrics["aor"] = report.aor
        return metrics

    def save_report(self, out_dir) -> dict:
        """Escreve caixas, métricas e série de CLE em `out_dir`."""
        if self.result is None:
            raise ValueError("Tracker ainda não correu. Use run() primeiro.")
        return ReportGenerator(out_dir).emit(self.result, self.sequence.ground_truth)
