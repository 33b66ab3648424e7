"""Rate-versus-N curves for BB84 and the six-state protocol under all three analyses.

Writes one gnuplot data file per protocol (blocks per attack model and QBER)
plus a CSV with the same rows.

    python3 scripts/reproduce_figures.py --out results --count 17
"""
import argparse
import os
from dataclasses import dataclass

from finikey.cli import SweepRequest, run_sweep
from finikey.protocol import AttackModel, Protocol, ProtocolSpec


@dataclass
class FigureConfig:
    out_dir: str = "results"
    qbers: tuple = (0.01, 0.1)
    n_min: float = 1e4
    n_max: float = 1e12
    count: int = 17
    eps_total: float = 1e-9
    sifting_ratio: float = 1.0
    workers: int | None = None


def run(cfg: FigureConfig):
    os.makedirs(cfg.out_dir, exist_ok=True)
    for protocol in Protocol:
        spec = ProtocolSpec(protocol, sifting_ratio=cfg.sifting_ratio)
        for fmt, ext in (("gnuplot", "dat"), ("csv", "csv")):
            request = SweepRequest(spec, tuple(AttackModel), tuple(cfg.qbers), cfg.n_min, cfg.n_max, cfg.count,
                                   cfg.eps_total, output_format=fmt)
            path = os.path.join(cfg.out_dir, f"rates_{protocol.value}.{ext}")
            with open(path, "w", newline="") as fh:
                fh.write(run_sweep(request, cfg.workers))
            print("wrote", path)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default=FigureConfig.out_dir)
    p.add_argument("--count", type=int, default=FigureConfig.count)
    p.add_argument("--sifting-ratio", type=float, default=FigureConfig.sifting_ratio)
    p.add_argument("--workers", type=int)
    a = p.parse_args()
    run(FigureConfig(out_dir=a.out, count=a.count, sifting_ratio=a.sifting_ratio, workers=a.workers))


if __name__ == "__main__":
    main()
