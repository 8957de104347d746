"""The discontinuous delta -> 0 limit of the cut-off flow.

For p <= eta(t) the limit field is the uncut X = pR + V; for p > eta(t) it is
the rigid rotation eta(t) R.  Both regimes integrate in closed form: the inner
one is the strip translation w -> w + 2 sqrt(pi) t, the outer one turns the
disk by gd(a_b(t)) - gd(a_b(t0)) where a_b is the strip coordinate of the
boundary trajectory.  Regime switches are located by scanning the event
function E(t) = p(u(t)) - eta(t) on a node grid and bisecting.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .cutoff import HamiltonianSchedule, StripStart, integrate_cutoff
from .disk import (
    NORTH,
    RADIUS,
    SOUTH,
    SQRT_PI,
    DiskPoint,
    FixedPointSingular,
    as_z,
    disk_to_strip,
    gd,
    log_norm_term,
    p_in_strip,
    q_in_strip,
    strip_to_disk,
    vector_field_X,
)
from .quadrature import adaptive_simpson

EVENT_TOL = 1e-13  # |E| below this counts as "on the interface"
BISECT_TOL = 1e-12
GRAZE_SLOPE = 1e-9


class MultipleCrossings(RuntimeError):
    """A second transversal regime switch; the limit dynamics allow at most one."""


class Regime(str, enum.Enum):
    INNER = "inner"
    OUTER = "outer"


class CrossingKind(str, enum.Enum):
    ENTRANCE = "entrance"
    EXIT = "exit"
    NONE = "none"


def limit_field(z, t: float, sched: HamiltonianSchedule):
    """pR + V where p <= eta(t), eta(t) R where p > eta(t); odd in p."""
    zz = np.asarray(as_z(z), dtype=complex)
    eta = sched.eta_of_t(t)
    p = zz.real
    rot = 2j * np.pi * zz  # R on the disk, as a complex velocity
    v = np.where(np.abs(p) <= eta, vector_field_X(zz), np.sign(p) * eta * rot)
    if isinstance(z, DiskPoint):
        return float(v.real), float(v.imag)
    return v if np.ndim(v) else complex(v)


@dataclass(frozen=True)
class Segment:
    """One regime on [t0, t1].

    Inner segments carry the strip coordinate ``w0`` at t0 (None for a pole,
    which is fixed); outer segments carry the disk point ``z0`` at t0.
    """

    t0: float
    t1: float
    regime: Regime
    w0: complex | None = None
    z0: complex | None = None
    T: float = 1.0

    def _ab(self, t):
        return -SQRT_PI * self.T + 2 * SQRT_PI * np.asarray(t, dtype=float)

    def strip(self, t):
        if self.regime is not Regime.INNER or self.w0 is None:
            raise ValueError("strip coordinates only exist on non-fixed inner segments")
        return self.w0 + 2 * SQRT_PI * (np.asarray(t, dtype=float) - self.t0)

    def at(self, t):
        if self.regime is Regime.INNER:
            if self.w0 is None:
                return np.full(np.shape(t), self.z0, dtype=complex) if np.ndim(t) else complex(self.z0)
            return strip_to_disk(self.strip(t))
        turn = gd(self._ab(t)) - gd(self._ab(self.t0))
        return self.z0 * np.exp(1j * turn)

    def p(self, t):
        if self.regime is Regime.INNER and self.w0 is not None:
            return p_in_strip(self.strip(t))
        return np.real(self.at(t))

    def q(self, t):
        if self.regime is Regime.INNER and self.w0 is not None:
            return q_in_strip(self.strip(t))
        return np.imag(self.at(t))


@dataclass(frozen=True)
class PiecewiseTrajectory:
    segments: tuple[Segment, ...]
    crossing_time: float | None
    crossing_slope: float | None
    schedule: HamiltonianSchedule = field(repr=False)
    reflected: bool = False

    def _segment(self, t: float) -> Segment:
        for s in self.segments:
            if t <= s.t1:
                return s
        return self.segments[-1]

    def at(self, t):
        """u(t) for scalar or array t, in the caller's half of the disk."""
        if np.ndim(t):
            return np.array([self.at(float(x)) for x in np.asarray(t).ravel()]).reshape(np.shape(t))
        z = complex(self._segment(float(t)).at(float(t)))
        return -z.conjugate() if self.reflected else z

    def sample(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        out = np.empty(times.shape, dtype=complex)
        for s in self.segments:
            m = (times >= s.t0) & (times <= s.t1)
            out[m] = s.at(times[m])
        return -out.conj() if self.reflected else out

    @property
    def inner_interval(self) -> tuple[float, float] | None:
        inner = [s for s in self.segments if s.regime is Regime.INNER]
        return (inner[0].t0, inner[0].t1) if inner else None


def _event(seg: Segment, t, eta_of_t):
    return seg.p(t) - eta_of_t(t)


def _violates(regime: Regime, e):
    return e > EVENT_TOL if regime is Regime.INNER else e < -EVENT_TOL


def _bisect(seg: Segment, lo: float, hi: float, eta_of_t) -> float:
    """Shrink [lo, hi] around the switch, lo on the regime's side and hi violating it."""
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if _violates(seg.regime, _event(seg, mid, eta_of_t)):
            hi = mid
        else:
            lo = mid
    return hi


def _switch(seg: Segment, t: float, T: float) -> Segment:
    z = complex(seg.at(t))
    if seg.regime is Regime.INNER:
        return Segment(t, T, Regime.OUTER, z0=z, T=T)
    return Segment(t, T, Regime.INNER, w0=complex(disk_to_strip(z)), T=T)


def _scan(seg: Segment, nodes: np.ndarray, eta_of_t):
    """First node where the segment leaves its regime, or None."""
    bad = np.flatnonzero(_violates(seg.regime, _event(seg, nodes, eta_of_t)))
    return None if bad.size == 0 else int(bad[0])


def integrate_piecewise(z0, sched: HamiltonianSchedule, nodes: int | None = None) -> PiecewiseTrajectory:
    """Flow line of the limit field from ``z0`` over [0, T] with event-detected regime switches.

    ``z0`` is a disk point or a StripStart.  Points with p < 0 are reflected to
    the right half first and the result is reflected back.  ``nodes`` sets the
    scan grid for the event function (default 4000 per unit time, at least 2000).
    """
    T = sched.T
    n = nodes or max(2000, int(4000 * T))
    grid = np.linspace(0.0, T, n + 1)
    eta_of_t = sched.eta_of_t

    reflected = False
    if isinstance(z0, StripStart):
        w = complex(z0.w)
        if w.imag > np.pi / 2:
            w, reflected = complex(w.real, np.pi - w.imag), True
        start = Segment(0.0, T, Regime.INNER, w0=w, T=T)
    else:
        z = complex(as_z(z0))
        if z.real < 0:
            z, reflected = -z.conjugate(), True
        try:
            w = complex(disk_to_strip(z))
        except FixedPointSingular:
            pole = NORTH if z.imag > 0 else SOUTH
            seg = Segment(0.0, T, Regime.INNER, w0=None, z0=pole, T=T)
            return PiecewiseTrajectory((seg,), None, None, sched, reflected)
        start = Segment(0.0, T, Regime.INNER, w0=w, T=T)
    if _violates(Regime.INNER, _event(start, 0.0, eta_of_t)):
        start = Segment(0.0, T, Regime.OUTER, z0=complex(start.at(0.0)), T=T)

    segments: list[Segment] = []
    seg, t_cross, slope = start, None, None
    lo_idx = 0
    while True:
        idx = _scan(seg, grid[lo_idx:], eta_of_t)
        if idx is None:
            segments.append(Segment(seg.t0, T, seg.regime, seg.w0, seg.z0, T))
            break
        k = lo_idx + idx
        lo = seg.t0 if k == 0 else max(seg.t0, grid[k - 1])
        t_star = _bisect(seg, lo, grid[k], eta_of_t)
        e_slope = _slope(seg, t_star, sched)
        if t_cross is not None:
            if abs(e_slope) < GRAZE_SLOPE:
                # tangential touch: stay in the current regime
                lo_idx = k + 1
                continue
            raise MultipleCrossings(f"second crossing at t={t_star:.12f} after t={t_cross:.12f} "
                                    f"(E' = {e_slope:.3e})")
        segments.append(Segment(seg.t0, t_star, seg.regime, seg.w0, seg.z0, T))
        t_cross, slope = t_star, e_slope
        seg = _switch(seg, t_star, T)
        lo_idx = k
    return PiecewiseTrajectory(tuple(segments), t_cross, slope, sched, reflected)


def _slope(seg: Segment, t: float, sched: HamiltonianSchedule) -> float:
    """E'(t*) = 2 pi eta (q(z(t*)) - q(u(t*))), the same from either regime when p(u) = eta."""
    eta = float(sched.eta_of_t(t))
    return 2 * np.pi * eta * (float(sched.boundary.q(t)) - float(seg.q(t)))


def classify_crossing(traj: PiecewiseTrajectory) -> CrossingKind:
    if traj.crossing_time is None:
        return CrossingKind.NONE
    first = traj.segments[0].regime
    return CrossingKind.ENTRANCE if first is Regime.OUTER else CrossingKind.EXIT


def scaling_exponent_piecewise(traj: PiecewiseTrajectory, tol: float = 1e-12, exact: bool = False) -> float:
    """-2 pi int q(u(t)) dt over the inner interval (0 when there is none).

    The default is adaptive Simpson; ``exact=True`` uses the closed form
    -(N(a(t2)) - N(a(t1))) of the strip translation.
    """
    inner = [s for s in traj.segments if s.regime is Regime.INNER]
    if not inner or inner[0].w0 is None:
        return 0.0
    s = inner[0]
    if s.t1 <= s.t0:
        return 0.0
    if exact:
        w1, w2 = s.strip(s.t0), s.strip(s.t1)
        return float(-(log_norm_term(w2.real, w2.imag) - log_norm_term(w1.real, w1.imag)))
    # reflection flips p only, so q and hence g are unchanged
    return adaptive_simpson(lambda t: -2 * np.pi * float(s.q(t)), s.t0, s.t1, tol)


@dataclass(frozen=True)
class ConvergenceReport:
    start: complex
    T: float
    deltas: tuple[float, ...]
    distances: tuple[float, ...]
    crossing_time: float | None
    crossing_kind: str
    g_piecewise: float
    g_cutoff: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        d = np.asarray(self.distances)
        return bool(np.all(np.diff(d) <= 1e-12 + 1e-9 * d[:-1]))

    @property
    def ratio(self) -> float:
        return self.distances[-1] / self.distances[0] if self.distances[0] > 0 else 0.0

    def to_json(self) -> str:
        return json.dumps({
            "schema": 1,
            "start": [self.start.real, self.start.imag],
            "T": self.T,
            "deltas": list(self.deltas),
            "sup_distances": list(self.distances),
            "crossing_time": self.crossing_time,
            "crossing_kind": self.crossing_kind,
            "g_piecewise": self.g_piecewise,
            "g_cutoff": list(self.g_cutoff),
            "monotone": self.monotone,
            "ratio_last_first": self.ratio,
        }, sort_keys=True, indent=2)


def sup_distance(z0, sched: HamiltonianSchedule, samples: int = 2001, pw: PiecewiseTrajectory | None = None) -> float:
    """max over a time grid of |cut-off(t) - piecewise(t)| in the disk."""
    times = np.linspace(0.0, sched.T, samples)
    pw = pw or integrate_piecewise(z0, sched)
    cut = integrate_cutoff(z0, sched, times=times)
    return float(np.max(np.abs(cut.points - pw.sample(times))))


def convergence_test(z0, T: float, deltas, samples: int = 2001) -> ConvergenceReport:
    deltas = tuple(float(d) for d in deltas)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    # the limit dynamics do not depend on delta
    pw = integrate_piecewise(z0, HamiltonianSchedule(T, deltas[0]))
    dist, gs = [], []
    for d in deltas:
        sched = HamiltonianSchedule(T, d)
        dist.append(sup_distance(z0, sched, samples, pw))
        gs.append(float(integrate_cutoff(z0, sched, times=np.array([0.0, T])).g[-1]))
    start = complex(strip_to_disk(z0.w)) if isinstance(z0, StripStart) else complex(as_z(z0))
    return ConvergenceReport(start, T, deltas, tuple(dist), pw.crossing_time, classify_crossing(pw).value,
                             scaling_exponent_piecewise(pw), tuple(gs))


__all__ = [
    "RADIUS",
    "ConvergenceReport",
    "CrossingKind",
    "MultipleCrossings",
    "PiecewiseTrajectory",
    "Regime",
    "Segment",
    "classify_crossing",
    "convergence_test",
    "integrate_piecewise",
    "limit_field",
    "scaling_exponent_piecewise",
    "sup_distance",
]
