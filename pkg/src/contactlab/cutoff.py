"""The time-dependent cut-off flow phi_{delta,t} and its scaling-factor-1 set."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .disk import (
    RADIUS,
    SQRT_PI,
    BoundaryTrajectory,
    DiskPoint,
    FixedPointSingular,
    as_z,
    disk_to_strip,
    ell_in_strip,
    p_in_strip,
    p_integral,
    q_in_strip,
    strip_to_disk,
)
from .quadrature import adaptive_simpson

log = logging.getLogger(__name__)

STEP_TOL = 1e-10
SIGMA_TOL = 1e-8


class StepFailure(RuntimeError):
    pass


class NoBracket(RuntimeError):
    pass


# --- profiles -----------------------------------------------------------------


@dataclass(frozen=True)
class SmoothingProfile:
    """Convex mu with mu = 1/2 on x <= 0 and mu = x on x >= 1.

    ``quadratic-spline`` is 1/2 + x^2/2 on [0, 1] (C^1); ``smoothstep`` is
    1/2 + x^3 - x^4/2 (C^2).  Both are evaluated by the compiled kernel.
    """

    name: str = "quadratic-spline"

    @property
    def kind(self) -> int:
        try:
            return {"quadratic-spline": K.PROFILE_QUADRATIC, "smoothstep": K.PROFILE_SMOOTHSTEP}[self.name]
        except KeyError:
            raise ValueError(f"unknown smoothing profile {self.name!r}") from None

    def __call__(self, x):
        return np.vectorize(K.mu, otypes=[float])(x, self.kind)

    def derivative(self, x):
        return np.vectorize(K.dmu, otypes=[float])(x, self.kind)


QUADRATIC = SmoothingProfile("quadratic-spline")
SMOOTHSTEP = SmoothingProfile("smoothstep")


@dataclass(frozen=True)
class CutoffProfile:
    delta: float
    eta: float
    mu: SmoothingProfile = QUADRATIC

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0 <= self.eta <= RADIUS + 1e-15:
            raise ValueError("eta must lie in [0, 1/sqrt(pi)]")


def f_cutoff(p, prof: CutoffProfile):
    """(f, f') of f(p) = eta + delta - delta mu((eta - p + delta)/delta), extended oddly."""
    kind = prof.mu.kind
    if np.ndim(p) == 0:
        return K.cutoff(float(p), prof.eta, prof.delta, kind)
    pp = np.asarray(p, dtype=float)
    f = np.empty_like(pp)
    fp = np.empty_like(pp)
    for idx, v in np.ndenumerate(pp):
        f[idx], fp[idx] = K.cutoff(v, prof.eta, prof.delta, kind)
    return f, fp


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Cut-off data: f_t = f_{delta, eta(t)} with eta(t) = p(z(t)) on the boundary trajectory."""

    T: float
    delta: float
    mu: SmoothingProfile = QUADRATIC
    trajectory_source: str = "boundary"

    def __post_init__(self):
        if self.T <= 0 or self.delta <= 0:
            raise ValueError("need T > 0 and delta > 0")
        if self.trajectory_source != "boundary":
            raise ValueError("only the boundary trajectory source is supported")

    @property
    def boundary(self) -> BoundaryTrajectory:
        return BoundaryTrajectory(self.T)

    def eta_of_t(self, t):
        return self.boundary.eta(t)

    def profile(self, t: float) -> CutoffProfile:
        return CutoffProfile(self.delta, float(min(self.eta_of_t(t), RADIUS)), self.mu)

    def to_json(self) -> str:
        return json.dumps(
            {"T": self.T, "delta": self.delta, "mu": self.mu.name, "trajectory_source": self.trajectory_source},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> HamiltonianSchedule:
        d = json.loads(text)
        extra = set(d) - {"T", "delta", "mu", "trajectory_source"}
        if extra:
            raise ValueError(f"unknown schedule keys: {sorted(extra)}")
        return cls(float(d["T"]), float(d["delta"]), SmoothingProfile(d.get("mu", "quadratic-spline")),
                   d.get("trajectory_source", "boundary"))


# --- the field ----------------------------------------------------------------


def X_cutoff(z, t: float, sched: HamiltonianSchedule):
    """f_t(p) R + f_t'(p) V on the disk; returns a complex velocity (or (dp, dq) for a DiskPoint)."""
    zz = np.asarray(as_z(z), dtype=complex)
    p, q = zz.real, zz.imag
    f, fp = f_cutoff(p, sched.profile(t))
    v = 2 * np.pi * f * (-q + 1j * p) + 1j * fp * (1 - np.pi * (p * p + q * q))
    if isinstance(z, DiskPoint):
        return float(v.real), float(v.imag)
    return v if np.ndim(v) else complex(v)


# --- integration --------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Cut-off flow line sampled at ``times``.

    ``strip`` holds the strip coordinate of each sample (nan at a fixed
    point), ``g`` the scaling exponent accumulated since t = 0 and ``phase``
    the accumulated rotation of the fiber coordinates.
    """

    times: np.ndarray
    points: np.ndarray
    strip: np.ndarray
    g: np.ndarray
    phase: np.ndarray
    step: float
    error_estimate: float
    n_substeps: int
    fixed_point: bool = False

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    @property
    def ell(self) -> np.ndarray:
        if self.fixed_point:
            return np.zeros_like(self.times)
        return ell_in_strip(self.strip)


@dataclass(frozen=True)
class StripStart:
    """Marks a starting point given in strip coordinates (precise near the poles)."""

    w: complex


def integrate_cutoff(z0, sched: HamiltonianSchedule, h: float = 1e-2, tol: float | None = STEP_TOL,
                     t_end: float | None = None, times=None) -> Trajectory:
    """RK4 integration of the cut-off flow from ``z0`` over [0, T].

    ``z0`` is a disk point (complex or DiskPoint) or a StripStart.  Output is
    sampled every ``h`` (or at the given ``times``); each output interval is
    subdivided until the local error estimate is below ``tol``.  ``tol=None``
    gives fixed-step RK4.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    t_end = sched.T if t_end is None else t_end
    if times is None:
        n = max(1, int(np.ceil(t_end / h - 1e-9)))
        times = np.linspace(0.0, t_end, n + 1)
    times = np.asarray(times, dtype=float)
    if isinstance(z0, StripStart):
        w0 = complex(z0.w)
    else:
        try:
            w0 = complex(disk_to_strip(as_z(z0)))
        except FixedPointSingular:
            # the poles are fixed: p = 0 there and V vanishes on the boundary
            zf = complex(as_z(z0))
            zf = 1j * RADIUS * np.sign(zf.imag)
            pts = np.full(times.shape, zf, dtype=complex)
            zeros = np.zeros_like(times)
            return Trajectory(times, pts, np.full(times.shape, np.nan + 0j), zeros, zeros, h, 0.0, 0, True)
    y0 = np.array([w0.real, w0.imag, 0.0, 0.0])
    ys, status, n_sub, err = K.integrate(y0, times, sched.T, sched.delta, sched.mu.kind,
                                         -1.0 if tol is None else tol, 1e-13 * max(1.0, sched.T))
    if status == K.STATUS_STEP_FAILURE:
        raise StepFailure(f"step size underflow integrating from w0={w0} (delta={sched.delta}, T={sched.T})")
    strip = ys[:, 0] + 1j * ys[:, 1]
    return Trajectory(times, strip_to_disk(strip), strip, ys[:, 2], ys[:, 3], h, err, n_sub)


def scaling_exponent_cutoff(z0, sched: HamiltonianSchedule, h: float = 1e-2, tol: float | None = STEP_TOL) -> float:
    """-2 pi int_0^T f_t'(p) q dt along the cut-off flow line of ``z0``.

    The integrand is carried as an extra state of the RK4 integration, which
    on a pure quadrature reduces to composite Simpson on every substep.
    """
    traj = integrate_cutoff(z0, sched, h=h, tol=tol, times=np.array([0.0, sched.T]))
    return float(traj.g[-1])


def scaling_exponent_from_fiber(traj: Trajectory) -> float:
    """Second route: the fiber radius squared scales by e^g, so g = ln ell(T) - ln ell(0)."""
    ell = traj.ell
    return float(np.log(ell[-1]) - np.log(ell[0]))


# --- the scaling-factor-1 set ---------------------------------------------------


@dataclass(frozen=True)
class SigmaSet:
    """Zeros of the cut-off scaling exponent on transversals to C(0), right half {p >= 0}."""

    schedule: HamiltonianSchedule
    strip: np.ndarray
    residuals: np.ndarray
    b: np.ndarray = field(repr=False)

    @property
    def points(self) -> np.ndarray:
        return strip_to_disk(self.strip)

    def full_strip(self) -> np.ndarray:
        """Both halves: reflection p -> -p is b -> pi - b (the b = pi/2 point is not repeated)."""
        right = self.strip
        left = (right.real + 1j * (np.pi - right.imag))[::-1]
        if np.isclose(right[-1].imag, np.pi / 2):
            left = left[1:]
        return np.concatenate([right, left])


def transversal_bs(resolution: int, boundary: bool = True) -> np.ndarray:
    """b_k = k pi / (2 resolution) for k = 1..resolution, plus the boundary line b = 0."""
    k = np.arange(0 if boundary else 1, resolution + 1)
    return np.pi / 2 * k / resolution


def sigma_set(sched: HamiltonianSchedule, resolution: int = 64, half_width: float | None = None,
              h: float = 1e-2, tol: float = STEP_TOL, boundary: bool = True,
              center: float | None = None) -> SigmaSet:
    """Bisect g = 0 along the strip transversals b = const crossing C(0).

    Transversal k runs over a in [a_C - L, a_C + L] at b_k = k pi / (2 resolution),
    k = 0..resolution (k = 0 is the boundary arc, dropped when ``boundary`` is false), with a_C = -sqrt(pi) T and L = 2 delta (total length 4 delta
    in the conformal strip chart).  ``center`` moves the transversals off a_C.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    L = 2 * sched.delta if half_width is None else half_width
    a_c = -SQRT_PI * sched.T if center is None else center
    bs = transversal_bs(resolution, boundary)

    def g_of(a, b):
        return scaling_exponent_cutoff(StripStart(complex(a, b)), sched, h=h, tol=tol)

    roots, res = [], []
    for b in bs:
        lo, hi = a_c - L, a_c + L
        glo, ghi = g_of(lo, b), g_of(hi, b)
        if glo == 0.0:
            roots.append(lo), res.append(0.0)
            continue
        if np.sign(glo) == np.sign(ghi):
            raise NoBracket(f"g does not change sign on the transversal b={b:.6f} "
                            f"(g={glo:.3e}, {ghi:.3e}); lower delta or widen the transversal")
        a_star = brentq(g_of, lo, hi, args=(b,), xtol=1e-14, rtol=1e-15, maxiter=200)
        r = g_of(a_star, b)
        if abs(r) >= SIGMA_TOL:
            raise NoBracket(f"root on b={b:.6f} has residual {r:.3e}")
        roots.append(a_star)
        res.append(r)
    strip = np.asarray(roots) + 1j * bs
    return SigmaSet(sched, strip, np.asarray(res), bs)


def flow_strip_points(strip: np.ndarray, sched: HamiltonianSchedule, t: float | None = None,
                      h: float = 1e-2, tol: float = STEP_TOL) -> np.ndarray:
    """Images of strip points under the cut-off flow at time t (default T), in strip coordinates."""
    t = sched.T if t is None else t
    return np.array([integrate_cutoff(StripStart(w), sched, h=h, tol=tol, times=np.array([0.0, t])).strip[-1]
                     for w in np.atleast_1d(strip)])


# --- length ---------------------------------------------------------------------


def max_f(sched: HamiltonianSchedule, t):
    """max over |p| <= 1/sqrt(pi) of f_t: eta + delta/2 unless the plateau is cut by the boundary."""
    eta = np.minimum(sched.eta_of_t(t), RADIUS)
    if np.ndim(eta) == 0:
        return float(K.cutoff(RADIUS, float(eta), sched.delta, sched.mu.kind)[0])
    return np.array([K.cutoff(RADIUS, float(e), sched.delta, sched.mu.kind)[0] for e in eta])


def shelukhin_length(sched: HamiltonianSchedule, tol: float = 1e-10) -> float:
    """int_0^T max_p f_t(p) dt, the Shelukhin-Hofer length of the path phi_{delta,t}."""
    return adaptive_simpson(lambda t: max_f(sched, t), 0.0, sched.T, tol, breakpoints=_plateau_times(sched))


def shelukhin_length_bound(sched: HamiltonianSchedule) -> float:
    """int_0^T (eta(t) + delta/2) dt = p_integral(T) + delta T / 2 <= (1 + delta T) / 2."""
    return p_integral(sched.T) + 0.5 * sched.delta * sched.T


def shelukhin_length_grid(sched: HamiltonianSchedule, n_p: int = 2001, tol: float = 1e-10) -> float:
    """Same length with the max taken over a p-grid on [-1/sqrt(pi), 1/sqrt(pi)]."""
    grid = np.linspace(-RADIUS, RADIUS, n_p)

    def m(t):
        prof = sched.profile(t)
        return float(np.max(np.abs(f_cutoff(grid, prof)[0])))

    return adaptive_simpson(m, 0.0, sched.T, tol, breakpoints=_plateau_times(sched))


def _plateau_times(sched):
    """Times where eta(t) + delta = 1/sqrt(pi); max_p f_t has a kink there."""
    if sched.delta >= RADIUS:
        return ()
    a = np.arccosh(RADIUS / (RADIUS - sched.delta))
    return tuple(0.5 * sched.T + s * a / (2 * SQRT_PI) for s in (-1, 1))


# --- lifted field on the sphere (ambient coordinates) ---------------------------


def lifted_field(c: np.ndarray, t: float, sched: HamiltonianSchedule) -> np.ndarray:
    """f_t(p) R + f_t'(p) V on the sphere, in ambient coordinates (p, q, x_1, y_1, ...)."""
    from .sphere import field_V, reeb

    f, fp = f_cutoff(c[..., 0], sched.profile(t))
    return np.asarray(f)[..., None] * reeb(c) + np.asarray(fp)[..., None] * field_V(c)


def p_q_of(traj: Trajectory):
    if traj.fixed_point:
        return traj.points.real, traj.points.imag
    return p_in_strip(traj.strip), q_in_strip(traj.strip)
