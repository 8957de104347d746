"""Certification reports over a delta x width grid, plus the no-kappa control at each delta."""

import argparse

from contactlab import io
from contactlab.construction import certify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-T", type=float, default=10.0)
    ap.add_argument("--deltas", default="0.04,0.02,0.01")
    ap.add_argument("--widths", default="0.5,0.25,0.125")
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--fibers", type=int, default=64)
    ap.add_argument("--s-grid", type=int, default=256, dest="s_grid")
    ap.add_argument("--out")
    args = ap.parse_args()

    deltas = [float(x) for x in args.deltas.split(",")]
    widths = [float(x) for x in args.widths.split(",")]
    res = dict(resolution=args.resolution, fibers=args.fibers, s_grid=args.s_grid)
    conf = {"script": "certify_sweep", "T": args.T, "deltas": deltas, "widths": widths, **res}
    rows = []
    for d in deltas:
        for w in [*widths, None]:
            rep = certify(T=args.T, delta=d, width=w or 0.25, kappa="finger" if w else "none", **res)
            rows.append((d, w if w else "none", rep.oscillation_bound, rep.translated_point_margin,
                         rep.translated_point_floor, int(rep.passed)))
            print(f"delta={d:<6g} kappa={'none' if w is None else w:<6} bound={rep.oscillation_bound:.6f} "
                  f"margin={rep.translated_point_margin:.3e} floor={rep.translated_point_floor:.1e} "
                  f"{'PASS' if rep.passed else 'FAIL'}")
    print(io.write_csv(io.output_dir(args.out) / "certify_sweep.csv",
                       ["delta", "width", "oscillation_bound", "margin", "floor", "passed"], rows, conf))


if __name__ == "__main__":
    main()
