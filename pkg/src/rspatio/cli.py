"""
RSpatio - Linha de comandos
===========================

Uso:
    rspatio track <seq-dir> [--config tracker.cfg] [--out results/]
    rspatio eval <boxes.csv> <gt.txt>
    rspatio synth <scene.json> --out <dir> [--seed 0]
    rspatio bench <dataset-root> [--config tracker.cfg] [--out bench/] [--workers 4]

A variável de ambiente RSPATIO_SEED (ou um ficheiro .env) sobrepõe a seed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv
from tqdm import tqdm

from .config import TrackerConfig
from .dataset import discover_sequences, load_sequence, read_ground_truth
from .evaluation import evaluate
from .reports import ReportGenerator, read_boxes, write_bench_summary
from .synthetic import SceneSpec, synthesize_sequence
from .tracker import run_tracker

logger = logging.getLogger(__name__)


def _load_config(path: Optional[str]) -> TrackerConfig:
    config = TrackerConfig.from_file(path) if path else TrackerConfig()
    return config.with_env_overrides()


def track_sequence(
    seq_dir: Path, config: TrackerConfig, out_dir: Path, princeton_depth: bool = False
) -> Dict[str, object]:
    """Carrega, segue e escreve os resultados de uma sequência; devolve a linha de resumo."""
    sequence = load_sequence(seq_dir, config.depth_normalization, princeton_depth)
    result = run_tracker(sequence, config)

    generator = ReportGenerator(out_dir)
    outputs = generator.emit(result, sequence.ground_truth)
    generator.export_json(result)
    config.save(out_dir / "tracker.cfg")

    report = outputs["report"]
    return {
        "sequence": sequence.name,
        "frames": len(result),
        "acle_px": report.acle if report is not None else None,
        "aor": report.aor if report is not None else None,
        "occluded_frames": result.occluded_frames,
        "failed_frames": result.failed_frames,
        "ms_per_frame": result.ms_per_frame,
    }


def _bench_one(job: tuple) -> Dict[str, object]:
    seq_dir, config, out_dir, princeton_depth = job
    return track_sequence(seq_dir, config, out_dir / seq_dir.name, princeton_depth)


def cmd_track(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    row = track_sequence(Path(args.sequence), config, Path(args.out), args.princeton_depth)

    print(f"✅ {row['sequence']}: {row['frames']} frames, {row['occluded_frames']} em oclusão")
    if row["acle_px"] is not None:
        print(f"   ACLE = {row['acle_px']:.2f} px | AOR = {row['aor']:.3f}")
    else:
        print("   Sem ground truth: métricas ausentes")
    print(f"   Resultados em: {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    boxes = read_boxes(args.boxes)
    gt = read_ground_truth(args.ground_truth)
    report = evaluate(boxes, list(gt))
    print(f"ACLE = {report.acle:.3f} px")
    print(f"AOR  = {report.aor:.4f}")
    print(f"Frames avaliados: {report.evaluated_frames} ({report.occluded_frames} ocultos)")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SceneSpec.from_file(args.spec)
    out = synthesize_sequence(spec, args.seed, args.out)
    print(f"✅ {spec.frames} frames de '{spec.name}' escritos em {out}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    root = Path(args.root)
    out_dir = Path(args.out)
    sequences = discover_sequences(root)
    if not sequences:
        print(f"❌ Nenhuma sequência encontrada em {root}")
        return 1

    jobs = [(seq, config, out_dir, args.princeton_depth) for seq in sequences]
    rows: List[Dict[str, object]] = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            for row in tqdm(pool.map(_bench_one, jobs), total=len(jobs), desc="bench"):
                rows.append(row)
    else:
        for job in tqdm(jobs, desc="bench"):
            rows.append(_bench_one(job))

    summary = write_bench_summary(rows, out_dir / "summary.md")
    print("=" * 50)
    for row in rows:
        acle = f"{row['acle_px']:.1f}" if row["acle_px"] is not None else "-"
        aor = f"{row['aor']:.2f}" if row["aor"] is not None else "-"
        print(f"{row['sequence']:<20} ACLE {acle:>6}  AOR {aor:>5}")
    print("=" * 50)
    print(f"Resumo: {summary}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rspatio", description="RSpatio RGB-D tracker")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="Seguir uma sequência")
    track.add_argument("sequence", help="Pasta da sequência (rgb/, depth/, init.txt)")
    track.add_argument("--config", "-c", default=None, help="Ficheiro de configuração")
    track.add_argument("--out", "-o", default="results", help="Pasta de resultados")
    track.add_argument("--princeton-depth", action="store_true", help="Descodificar profundidade com bits rodados")
    track.set_defaults(func=cmd_track)

    ev = sub.add_parser("eval", help="Avaliar um ficheiro de caixas contra ground truth")
    ev.add_argument("boxes", help="Ficheiro de caixas (boxes.csv)")
    ev.add_argument("ground_truth", help="Ficheiro de ground truth (gt.txt)")
    ev.set_defaults(func=cmd_eval)

    synth = sub.add_parser("synth", help="Gerar uma sequência sintética")
    synth.add_argument("spec", help="Cena em JSON")
    synth.add_argument("--out", "-o", required=True, help="Pasta de destino")
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_synth)

    bench = sub.add_parser("bench", help="Correr todas as sequências de uma pasta")
    bench.add_argument("root", help="Pasta com as sequências")
    bench.add_argument("--config", "-c", default=None)
    bench.add_argument("--out", "-o", default="bench")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--princeton-depth", action="store_true")
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, OSError) as exc:
        logger.error(str(exc))
        print(f"❌ {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
