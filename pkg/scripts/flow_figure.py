"""Phase portraits of the uncut and cut-off disk flows, with C(0), C(T/2) and C(T)."""

import argparse

import numpy as np

from contactlab import io
from contactlab.cli import parse_starts
from contactlab.cutoff import HamiltonianSchedule, integrate_cutoff
from contactlab.disk import arc_C, exact_flow
from contactlab.svg import phase_portrait


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-T", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--starts", default="grid:8")
    ap.add_argument("--samples", type=int, default=301)
    ap.add_argument("--out")
    args = ap.parse_args()

    out = io.output_dir(args.out)
    starts = parse_starts(args.starts)
    times = np.linspace(0, args.T, args.samples)
    C = arc_C(args.T, 401)
    arcs = [("C(0)", C.samples), ("C(T/2)", C.at_time(args.T / 2)), ("C(T)", C.at_time(args.T))]
    sched = HamiltonianSchedule(args.T, args.delta)
    for mode in ("exact", "cutoff"):
        conf = {"script": "flow_figure", "mode": mode, "T": args.T, "delta": args.delta, "starts": args.starts}
        if mode == "exact":
            trajs = [exact_flow(z, times) for z in starts]
        else:
            trajs = [integrate_cutoff(z, sched, times=times).points for z in starts]
        path = out / f"flow_{mode}.svg"
        path.write_text(phase_portrait(trajs, arcs, conf, f"{mode} flow, T={args.T}"))
        print(path)


if __name__ == "__main__":
    main()
