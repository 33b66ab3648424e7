"""How the coherent-over-post-selection gain at the reference points depends on
the sifting ratio N_s/N.

The fixed costs (the -1/N term, the (2/N) log2(2 eps_PA) term and the
30 log2(N+1)/N post-selection penalty) are per initial signal while the
statistical corrections scale with the sifted block, so the ratio of rates
does not cancel.
"""
import argparse

from compare_table import table

DEFAULT_RATIOS = (1.0, 0.5, 0.25)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ratios", default=",".join(str(r) for r in DEFAULT_RATIOS))
    a = p.parse_args()
    ratios = [float(r) for r in a.ratios.split(",")]
    results = {ratio: table(ratio) for ratio in ratios}
    header = "protocol   Q     N      ref%  " + "  ".join(f"s={r:<5g}" for r in ratios)
    print(header)
    for i, row in enumerate(results[ratios[0]]):
        proto, q, N, *_, pub = row
        gains = []
        for ratio in ratios:
            pct = results[ratio][i][6]
            gains.append("  undef " if pct is None else f"{pct:7.1f}")
        print(f"{proto:10} {q:4.2f} {N:6.0e} {pub:5d}  " + "  ".join(gains))


if __name__ == "__main__":
    main()
