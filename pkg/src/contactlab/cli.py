"""Command-line entry point: ``contactlab {flow,sigma,certify,sweep}``.

Parameters come from defaults, then an optional ``--config`` JSON file, then
explicit flags.  Exit codes: 0 success, 1 a checked criterion failed,
2 invalid configuration, 3 a pipeline stage failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import io
from .construction import CertificationError, certify, hausdorff_to_arc
from .cutoff import (
    SIGMA_TOL,
    HamiltonianSchedule,
    NoBracket,
    SmoothingProfile,
    StepFailure,
    flow_strip_points,
    integrate_cutoff,
    sigma_set,
)
from .disk import RADIUS, SQRT_PI, arc_C, exact_flow
from .svg import phase_portrait

log = logging.getLogger("contactlab")

EXIT_OK, EXIT_CRITERION, EXIT_CONFIG, EXIT_STAGE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --- configs -----------------------------------------------------------------------


def _positive(name, v):
    if not v > 0:
        raise ConfigError(f"{name} must be positive (got {v})")


def _deltas(name, ds):
    if not ds or any(d <= 0 for d in ds):
        raise ConfigError(f"{name} must be a nonempty list of positive numbers")


@dataclass
class FlowConfig:
    mode: str = "exact"
    T: float = 5.0
    delta: float = 0.01
    starts: str = "grid:20"
    samples: int = 201
    mu: str = "quadratic-spline"
    seed: int = 0
    out: str | None = None

    def validate(self):
        if self.mode not in ("exact", "cutoff"):
            raise ConfigError("mode must be 'exact' or 'cutoff'")
        _positive("T", self.T)
        _positive("delta", self.delta)
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        SmoothingProfile(self.mu).kind
        parse_starts(self.starts, self.seed)


@dataclass
class SigmaConfig:
    T: float = 10.0
    deltas: list = field(default_factory=lambda: [0.01])
    resolution: int = 64
    mu: str = "quadratic-spline"
    out: str | None = None

    def validate(self):
        _positive("T", self.T)
        _deltas("deltas", self.deltas)
        if self.resolution < 8:
            raise ConfigError("resolution must be at least 8")
        SmoothingProfile(self.mu).kind


@dataclass
class CertifyConfig:
    T: float = 10.0
    delta: float = 0.01
    width: float = 0.25
    eps: float = 0.4
    kappa: str = "finger"
    n: int = 1
    resolution: int = 64
    fibers: int = 64
    s_grid: int = 256
    r_minus: float = 0.1 * RADIUS
    r_plus: float = 1e-4 * RADIUS
    eps_disk: float = 0.2 * RADIUS
    mu: str = "quadratic-spline"
    out: str | None = None

    def validate(self):
        for k in ("T", "delta", "eps", "r_minus", "r_plus", "eps_disk"):
            _positive(k, getattr(self, k))
        if self.kappa not in ("finger", "none"):
            raise ConfigError("kappa must be 'finger' or 'none'")
        if self.kappa == "finger":
            _positive("width", self.width)
        if self.n < 1 or self.resolution < 8 or self.fibers < 1 or self.s_grid < 2:
            raise ConfigError("n >= 1, resolution >= 8, fibers >= 1 and s_grid >= 2 are required")
        SmoothingProfile(self.mu).kind

    def certify_kwargs(self):
        d = asdict(self)
        d.pop("out")
        return d


@dataclass
class SweepConfig:
    T: float = 10.0
    deltas: list = field(default_factory=lambda: [0.04, 0.02, 0.01])
    widths: list = field(default_factory=lambda: [0.5, 0.25, 0.125])
    eps: float = 0.4
    resolution: int = 32
    fibers: int = 32
    s_grid: int = 128
    out: str | None = None

    def validate(self):
        _positive("T", self.T)
        _positive("eps", self.eps)
        _deltas("deltas", self.deltas)
        _deltas("widths", self.widths)
        if self.resolution < 8:
            raise ConfigError("resolution must be at least 8")


CONFIGS = {"flow": FlowConfig, "sigma": SigmaConfig, "certify": CertifyConfig, "sweep": SweepConfig}


def build_config(command: str, file_values: dict, flag_values: dict):
    cls = CONFIGS[command]
    names = {f.name for f in fields(cls)}
    unknown = set(file_values) - names
    if unknown:
        raise ConfigError(f"unknown config keys for '{command}': {sorted(unknown)}")
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    try:
        cfg = cls(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        cfg.validate()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def parse_starts(spec: str, seed: int = 0) -> np.ndarray:
    """``grid:N`` (N x N grid clipped to the open disk), ``random:N`` or ``p,q;p,q;...``."""
    try:
        if spec.startswith("grid:"):
            m = int(spec[5:])
            g = np.linspace(-RADIUS, RADIUS, m + 2)[1:-1]
            z = (g[None, :] + 1j * g[:, None]).ravel()
            return z[np.abs(z) < RADIUS * (1 - 1e-9)]
        if spec.startswith("random:"):
            m = int(spec[7:])
            rng = np.random.default_rng(seed)
            r = RADIUS * np.sqrt(rng.uniform(0, 1, m)) * (1 - 1e-9)
            return r * np.exp(2j * np.pi * rng.uniform(0, 1, m))
        pts = [complex(*map(float, s.split(","))) for s in spec.split(";") if s.strip()]
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse starts {spec!r}") from exc
    z = np.array(pts)
    if z.size == 0 or np.any(np.abs(z) > RADIUS + 1e-12):
        raise ConfigError("starts must be a nonempty list of points in the disk")
    return z


# --- commands ------------------------------------------------------------------------


def cmd_flow(cfg: FlowConfig) -> int:
    out = io.output_dir(cfg.out)
    conf = {"command": "flow", **asdict(cfg)}
    conf.pop("out")
    starts = parse_starts(cfg.starts, cfg.seed)
    times = np.linspace(0.0, cfg.T, cfg.samples)
    sched = HamiltonianSchedule(cfg.T, cfg.delta, SmoothingProfile(cfg.mu))
    trajs = []
    for z0 in starts:
        if cfg.mode == "exact":
            trajs.append(exact_flow(z0, times))
        else:
            trajs.append(integrate_cutoff(z0, sched, times=times).points)
    rows = ((k, t, z.real, z.imag) for k, tr in enumerate(trajs) for t, z in zip(times, tr))
    io.write_csv(out / "flow.csv", ["start", "t", "p", "q"], rows, conf)
    C = arc_C(cfg.T, 401)
    arcs = [("C(0)", C.samples), ("C(T/2)", C.at_time(cfg.T / 2)), ("C(T)", C.at_time(cfg.T))]
    svg = phase_portrait(trajs, arcs, conf, f"{cfg.mode} flow, T={cfg.T}")
    (out / "flow.svg").write_text(svg)
    log.info("wrote %s and %s", out / "flow.csv", out / "flow.svg")
    return EXIT_OK


def sigma_summary(T: float, delta: float, resolution: int, mu: str = "quadratic-spline"):
    sched = HamiltonianSchedule(T, delta, SmoothingProfile(mu))
    sig = sigma_set(sched, resolution)
    full = sig.full_strip()
    flowed = flow_strip_points(full, sched)
    a_T = SQRT_PI * T
    return sig, {
        "delta": delta,
        "points": int(full.size),
        "max_residual": float(np.max(np.abs(sig.residuals))),
        "hausdorff_flowed_to_C_T": hausdorff_to_arc(flowed, a_T, "north"),
        "hausdorff_to_C_0": hausdorff_to_arc(full, -a_T, "south"),
        "strip_hausdorff_flowed_to_C_T": float(np.max(np.abs(flowed.real - a_T))),
    }


def cmd_sigma(cfg: SigmaConfig) -> int:
    out = io.output_dir(cfg.out)
    conf = {"command": "sigma", **asdict(cfg)}
    conf.pop("out")
    rows, table = [], []
    for d in cfg.deltas:
        try:
            sig, summ = sigma_summary(cfg.T, d, cfg.resolution, cfg.mu)
        except NoBracket as exc:
            print(f"sigma: {exc}. Try a smaller delta or a larger T.", file=sys.stderr)
            return EXIT_STAGE
        except StepFailure as exc:
            print(f"sigma: integration failed: {exc}", file=sys.stderr)
            return EXIT_STAGE
        pts = sig.points
        rows += [(d, z.real, z.imag, r) for z, r in zip(pts, sig.residuals)]
        table.append(summ)
    io.write_csv(out / "sigma.csv", ["delta", "p", "q", "g_residual"], rows, conf)
    ok = all(t["max_residual"] < SIGMA_TOL for t in table)
    dist = [t["hausdorff_flowed_to_C_T"] for t in table]
    io.write_json(out / "sigma.json", {"sweep": table, "residuals_ok": ok,
                                       "hausdorff_nonincreasing": bool(np.all(np.diff(dist) <= 1e-9))}, conf)
    for t in table:
        print(f"delta={t['delta']:<8g} points={t['points']:<4d} max|g|={t['max_residual']:.2e} "
              f"H(flowed Sigma, C(T))={t['hausdorff_flowed_to_C_T']:.3e}")
    return EXIT_OK if ok else EXIT_CRITERION


def cmd_certify(cfg: CertifyConfig) -> int:
    out = io.output_dir(cfg.out)
    conf = {"command": "certify", **cfg.certify_kwargs()}
    try:
        rep = certify(**cfg.certify_kwargs())
    except CertificationError as exc:
        print(f"certify: {exc}", file=sys.stderr)
        return EXIT_STAGE
    io.write_json(out / "certificate.json", {"report": rep.to_dict()}, conf)
    io.write_text(out / "certificate.txt", rep.to_text(), conf)
    sys.stdout.write(rep.to_text())
    return EXIT_OK if rep.passed else EXIT_CRITERION


def cmd_sweep(cfg: SweepConfig) -> int:
    out = io.output_dir(cfg.out)
    conf = {"command": "sweep", **asdict(cfg)}
    conf.pop("out")
    rows, grid = [], {}
    for d in cfg.deltas:
        for w in cfg.widths:
            try:
                rep = certify(T=cfg.T, delta=d, width=w, eps=cfg.eps, resolution=cfg.resolution,
                              fibers=cfg.fibers, s_grid=cfg.s_grid)
            except CertificationError as exc:
                print(f"sweep: delta={d} width={w}: {exc}", file=sys.stderr)
                return EXIT_STAGE
            grid[(d, w)] = rep.oscillation_bound
            rows.append((d, w, rep.length_gamma, rep.length_kappa, rep.oscillation_bound,
                         rep.translated_point_margin, int(rep.passed)))
    io.write_csv(out / "sweep.csv", ["delta", "width", "length_gamma", "length_kappa", "oscillation_bound",
                                     "translated_point_margin", "passed"], rows, conf)
    mono = sweep_monotone(grid, cfg.deltas, cfg.widths)
    io.write_json(out / "sweep.json", {"rows": [dict(zip(["delta", "width", "oscillation_bound"], r[:2] + r[4:5]))
                                                for r in rows], "monotone": mono}, conf)
    for r in rows:
        print(f"delta={r[0]:<8g} width={r[1]:<8g} bound={r[4]:.9f} margin={r[5]:.3e}")
    return EXIT_OK if mono else EXIT_CRITERION


def sweep_monotone(grid: dict, deltas, widths) -> bool:
    """oscillation_bound nonincreasing as delta decreases and as width decreases."""
    ds = sorted(deltas, reverse=True)
    ws = sorted(widths, reverse=True)
    ok = True
    for w in ws:
        v = [grid[(d, w)] for d in ds]
        ok &= bool(np.all(np.diff(v) <= 0))
    for d in ds:
        v = [grid[(d, w)] for w in ws]
        ok &= bool(np.all(np.diff(v) <= 0))
    return ok


# --- parser ----------------------------------------------------------------------------


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="contactlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with parameters; flags override it")
        p.add_argument("--out", help=f"output directory (default ${io.ENV_OUTPUT_DIR} or ./contactlab-out)")

    p = sub.add_parser("flow", help="integrate the exact or cut-off flow and draw a phase portrait")
    common(p)
    m = p.add_mutually_exclusive_group()
    m.add_argument("--exact", dest="mode", action="store_const", const="exact")
    m.add_argument("--cutoff", dest="mode", action="store_const", const="cutoff")
    p.add_argument("-T", type=float, dest="T")
    p.add_argument("--delta", type=float)
    p.add_argument("--starts", help="grid:N, random:N or 'p,q;p,q'")
    p.add_argument("--samples", type=int)
    p.add_argument("--mu")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sigma", help="scaling-factor-1 set and its distance to C(T)")
    common(p)
    p.add_argument("-T", type=float, dest="T")
    p.add_argument("--delta", type=float, help="single delta (shorthand for --deltas)")
    p.add_argument("--deltas", type=_floats)
    p.add_argument("--resolution", type=int)
    p.add_argument("--mu")

    p = sub.add_parser("certify", help="run the full pipeline and write a certification report")
    common(p)
    p.add_argument("-T", type=float, dest="T")
    p.add_argument("--delta", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--kappa", choices=["finger", "none"])
    p.add_argument("--n", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--fibers", type=int)
    p.add_argument("--s-grid", type=int, dest="s_grid")
    p.add_argument("--r-minus", type=float, dest="r_minus")
    p.add_argument("--r-plus", type=float, dest="r_plus")
    p.add_argument("--eps-disk", type=float, dest="eps_disk")
    p.add_argument("--mu")

    p = sub.add_parser("sweep", help="oscillation bound over a delta x width grid")
    common(p)
    p.add_argument("-T", type=float, dest="T")
    p.add_argument("--deltas", type=_floats)
    p.add_argument("--widths", type=_floats)
    p.add_argument("--eps", type=float)
    p.add_argument("--resolution", type=int)
    p.add_argument("--fibers", type=int)
    p.add_argument("--s-grid", type=int, dest="s_grid")
    return ap


COMMANDS = {"flow": cmd_flow, "sigma": cmd_sigma, "certify": cmd_certify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    if args.command == "sigma" and flags.get("delta") is not None:
        if flags.get("deltas") is None:
            flags["deltas"] = [flags["delta"]]
    flags.pop("delta", None) if args.command == "sigma" else None
    try:
        file_values = {}
        if args.config:
            with open(args.config) as fh:
                file_values = json.load(fh)
            if not isinstance(file_values, dict):
                raise ConfigError("config file must hold a JSON object")
        cfg = build_config(args.command, file_values, flags)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"contactlab {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except (StepFailure, NoBracket) as exc:
        print(f"contactlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
