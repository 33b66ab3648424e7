"""Relative gain of the coherent-attack rate over the post-selection rate at the
four benchmark points, next to the reference percentages.

    python3 scripts/compare_table.py [--sifting-ratio 0.5]
"""
import argparse

from finikey.cli import compare_rates, improvement_percent
from finikey.protocol import AttackModel, Protocol, ProtocolSpec

# protocol, QBER, N, reference increase of r_coh over r_post in percent
REFERENCE_POINTS = [
    (Protocol.BB84, 0.01, 1e6, 43),
    (Protocol.BB84, 0.1, 1e10, 33),
    (Protocol.SIX_STATE, 0.01, 1e6, 51),
    (Protocol.SIX_STATE, 0.1, 1e8, 45),
]


def table(sifting_ratio: float = 1.0, eps_total: float = 1e-9):
    rows = []
    for protocol, q, N, reference in REFERENCE_POINTS:
        points = compare_rates(ProtocolSpec(protocol, sifting_ratio=sifting_ratio), N, q, eps_total)
        r = {model: p.key_rate for model, p in points.items()}
        pct = improvement_percent(r[AttackModel.COHERENT], r[AttackModel.POSTSELECTION])
        rows.append((protocol.value, q, N, r[AttackModel.COLLECTIVE], r[AttackModel.COHERENT],
                     r[AttackModel.POSTSELECTION], pct, reference))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sifting-ratio", type=float, default=1.0)
    p.add_argument("--eps-total", type=float, default=1e-9)
    a = p.parse_args()
    print(f"{'protocol':10} {'Q':>5} {'N':>7} {'r_coll':>10} {'r_coh':>10} {'r_post':>10} {'gain%':>7} {'ref%':>5}")
    for proto, q, N, coll, coh, post, pct, pub in table(a.sifting_ratio, a.eps_total):
        gain = "undef" if pct is None else f"{pct:.1f}"
        print(f"{proto:10} {q:5.2f} {N:7.0e} {coll:10.6f} {coh:10.6f} {post:10.6f} {gain:>7} {pub:5d}")


if __name__ == "__main__":
    main()
