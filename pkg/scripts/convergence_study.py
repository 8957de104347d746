"""Sup-distance between cut-off and piecewise trajectories as delta shrinks, over a fan of starts
around C(0).  Also fits the rate d ~ delta^k on the smallest deltas."""

import argparse

import numpy as np

from contactlab import io
from contactlab.cutoff import StripStart
from contactlab.disk import SQRT_PI
from contactlab.piecewise import convergence_test


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-T", type=float, default=2.5)
    ap.add_argument("--deltas", default="0.1,0.03,0.01,0.003,0.001")
    ap.add_argument("--offsets", default="-1,-0.3,0.3,1")
    ap.add_argument("--bs", default="0.1,0.3,0.6,1.0")
    ap.add_argument("--samples", type=int, default=1001)
    ap.add_argument("--out")
    args = ap.parse_args()

    deltas = [float(x) for x in args.deltas.split(",")]
    a_c = -SQRT_PI * args.T
    conf = {"script": "convergence_study", "T": args.T, "deltas": deltas, "offsets": args.offsets, "bs": args.bs}
    rows = []
    for s in map(float, args.offsets.split(",")):
        for b in map(float, args.bs.split(",")):
            rep = convergence_test(StripStart(complex(a_c + s, b)), args.T, deltas, args.samples)
            d = np.asarray(rep.distances)
            rate = float(np.polyfit(np.log(deltas[-3:]), np.log(np.maximum(d[-3:], 1e-300)), 1)[0]) \
                if d.max() > 1e-12 else float("nan")
            rows.append((s, b, rep.crossing_kind, *d, rate))
            print(f"offset={s:+.2f} b={b:.2f} {rep.crossing_kind:<9s} "
                  + " ".join(f"{x:.2e}" for x in d) + f"  rate={rate:.2f}")
    cols = ["offset", "b", "crossing"] + [f"d_{x:g}" for x in deltas] + ["rate"]
    print(io.write_csv(io.output_dir(args.out) / "convergence.csv", cols, rows, conf))


if __name__ == "__main__":
    main()
