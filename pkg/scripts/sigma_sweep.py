"""Sigma (g = 0) of the cut-off flow over a grid of T and delta, with its distances to C(0) and C(T)."""

import argparse

from contactlab import io
from contactlab.cli import sigma_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ts", default="2,5,10")
    ap.add_argument("--deltas", default="0.1,0.05,0.02,0.01")
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--out")
    args = ap.parse_args()

    Ts = [float(x) for x in args.Ts.split(",")]
    deltas = [float(x) for x in args.deltas.split(",")]
    conf = {"script": "sigma_sweep", "Ts": Ts, "deltas": deltas, "resolution": args.resolution}
    rows = []
    for T in Ts:
        for d in deltas:
            _, s = sigma_summary(T, d, args.resolution)
            rows.append((T, d, s["points"], s["max_residual"], s["hausdorff_to_C_0"], s["hausdorff_flowed_to_C_T"]))
            print(f"T={T:<5g} delta={d:<6g} max|g|={s['max_residual']:.1e} "
                  f"H(Sigma, C(0))={s['hausdorff_to_C_0']:.2e} H(flowed, C(T))={s['hausdorff_flowed_to_C_T']:.2e}")
    path = io.write_csv(io.output_dir(args.out) / "sigma_sweep.csv",
                        ["T", "delta", "points", "max_residual", "hausdorff_C0", "hausdorff_flowed_CT"], rows, conf)
    print(path)


if __name__ == "__main__":
    main()
