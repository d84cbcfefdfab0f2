#!/usr/bin/env python3
"""
Run the tracker on the built-in synthetic scenes and write a benchmark summary.

Usage:
    python synthetic_benchmark.py [--config tracker.cfg] [--out bench_synthetic/] [--seed 0]
"""

import sys
import argparse
import logging
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dotenv import load_dotenv

from rspatio.config import TrackerConfig
from rspatio.reports import ReportGenerator, write_bench_summary
from rspatio.synthetic import linear_motion_scene, occlusion_scene, render_sequence
from rspatio.tracker import run_tracker


def main():
    parser = argparse.ArgumentParser(description="RSpatio synthetic benchmark")
    parser.add_argument("--config", "-c", help="Tracker config file", default=None)
    parser.add_argument("--out", "-o", help="Output folder", default="bench_synthetic")
    parser.add_argument("--seed", type=int, default=0, help="Noise seed")
    args = parser.parse_args()

    load_dotenv()
    logging.basicConfig(level=logging.WARNING)

    config = TrackerConfig.from_file(args.config) if args.config else TrackerConfig()
    config = config.with_env_overrides()
    out_dir = Path(args.out)

    rows = []
    for spec in (linear_motion_scene(), occlusion_scene()):
        print(f"🎬 Rendering '{spec.name}' ({spec.frames} frames)...")
        sequence = render_sequence(spec, seed=args.seed, depth_normalization=config.depth_normalization)

        print("🎯 Tracking...")
        result = run_tracker(sequence, config)
        outputs = ReportGenerator(out_dir / spec.name).emit(result, sequence.ground_truth)
        report = outputs["report"]

        recovered = [f.index for f in result.frames if f.recovered]
        print(f"   ✅ ACLE {report.acle:.2f} px | AOR {report.aor:.3f}")
        print(f"   🙈 {result.occluded_frames} frames em oclusão, re-aquisição: {recovered or '-'}")

        rows.append(
            {
                "sequence": spec.name,
                "frames": len(result),
                "acle_px": report.acle,
                "aor": report.aor,
                "occluded_frames": result.occluded_frames,
                "ms_per_frame": result.ms_per_frame,
            }
        )

    summary = write_bench_summary(rows, out_dir / "summary.md")
    print("")
    print("=" * 50)
    print("📊 SUMMARY")
    print("=" * 50)
    for row in rows:
        print(f"{row['sequence']:<16} ACLE {row['acle_px']:6.2f}  AOR {row['aor']:.3f}")
    print("=" * 50)
    print(f"Summary saved to: {summary}")


if __name__ == "__main__":
    main()
