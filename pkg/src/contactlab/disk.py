"""Closed-form dynamics of the projected flow X = pR + V on the disk D(1).

The disk is {pi(p^2 + q^2) <= 1}; points are handled as complex numbers
z = p + iq.  The strip chart w = a + ib, 0 <= b <= pi, linearises the flow to
w' = 2 sqrt(pi).  Near the two fixed points +-i/sqrt(pi) disk coordinates
lose relative precision, so quantities that matter there (p, q, the fiber
radius, offsets from the poles) are also given directly in strip
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import adaptive_simpson

SQRT_PI = np.sqrt(np.pi)
RADIUS = 1.0 / SQRT_PI
NORTH = 1j * RADIUS
SOUTH = -1j * RADIUS
DISK_TOL = 1e-12
FIXED_POINT_TOL = 1e-9


class FixedPointSingular(ValueError):
    """The fixed points +-i/sqrt(pi) have no finite strip coordinate."""


@dataclass(frozen=True)
class DiskPoint:
    p: float
    q: float

    def __post_init__(self):
        if np.pi * (self.p**2 + self.q**2) > 1 + DISK_TOL:
            raise ValueError(f"({self.p}, {self.q}) lies outside D(1)")

    @property
    def z(self) -> complex:
        return complex(self.p, self.q)

    @classmethod
    def from_complex(cls, z) -> DiskPoint:
        z = complex(z)
        return cls(z.real, z.imag)


@dataclass(frozen=True)
class StripPoint:
    a: float
    b: float

    def __post_init__(self):
        if not 0.0 <= self.b <= np.pi:
            raise ValueError(f"b = {self.b} outside [0, pi]")

    @property
    def w(self) -> complex:
        return complex(self.a, self.b)


def as_z(obj):
    if isinstance(obj, DiskPoint):
        return obj.z
    return np.asarray(obj, dtype=complex) if np.ndim(obj) else complex(obj)


def _ab(obj):
    if isinstance(obj, StripPoint):
        return obj.a, obj.b
    w = np.asarray(obj, dtype=complex)
    return w.real, w.imag


# --- chart ------------------------------------------------------------------


def strip_to_disk(w):
    """z = (i e^w + 1) / (sqrt(pi) (e^w + i)); accepts StripPoint or complex arrays."""
    a, b = _ab(w)
    # divide through by e^a for large a so the result stays finite
    big = np.asarray(a) > 0
    ew = np.exp(np.where(big, -a, a) + 1j * np.where(big, -b, b))
    z = np.where(big, (1j + ew) / (SQRT_PI * (1 + 1j * ew)), (1j * ew + 1) / (SQRT_PI * (ew + 1j)))
    if isinstance(w, StripPoint):
        return DiskPoint.from_complex(z)
    return z if np.ndim(z) else complex(z)


def disk_to_strip(z):
    """Inverse chart: e^w = (1 - i sqrt(pi) z) / (sqrt(pi) z - i), b folded into [0, pi]."""
    zz = as_z(z)
    arr = np.asarray(zz, dtype=complex)
    if np.any(np.abs(arr - NORTH) < FIXED_POINT_TOL) or np.any(np.abs(arr - SOUTH) < FIXED_POINT_TOL):
        raise FixedPointSingular("point within 1e-9 of a fixed point of the flow")
    w = np.log((1 - 1j * SQRT_PI * arr) / (SQRT_PI * arr - 1j))
    b = w.imag
    b = np.where(b < 0, np.where(b > -np.pi / 2, 0.0, np.pi), b)
    out = w.real + 1j * b
    if isinstance(z, DiskPoint):
        return StripPoint(float(out.real), float(out.imag))
    return out if np.ndim(out) else complex(out)


def _sech_ratio(a, b):
    """(1 / cosh a, sin b / cosh a) evaluated without overflow."""
    e = np.exp(-np.abs(a))
    sech = 2 * e / (1 + e * e)
    return sech, np.sin(b) * sech


def q_in_strip(w):
    """sqrt(pi) q = sinh a / (cosh a + sin b)."""
    a, b = _ab(w)
    sech, sb = _sech_ratio(a, b)
    return np.tanh(a) / (SQRT_PI * (1 + sb))


def p_in_strip(w):
    """sqrt(pi) p = cos b / (cosh a + sin b)."""
    a, b = _ab(w)
    sech, sb = _sech_ratio(a, b)
    return np.cos(b) * sech / (SQRT_PI * (1 + sb))


def ell_in_strip(w):
    """1 - pi |z|^2 = 2 sin b / (cosh a + sin b); this is pi times the squared fiber radius."""
    a, b = _ab(w)
    sech, sb = _sech_ratio(a, b)
    return 2 * sb / (1 + sb)


def pole_offset(w, pole: str = "north"):
    """z - i/sqrt(pi) (or z + i/sqrt(pi)) computed without cancellation."""
    a, b = _ab(w)
    if pole == "north":
        # z - i/sqrt(pi) = 2 / (sqrt(pi)(e^w + i)) = 2 e^{-w} / (sqrt(pi)(1 + i e^{-w}))
        em = np.exp(-(a + 1j * b))
        return 2 * em / (SQRT_PI * (1 + 1j * em))
    # z + i/sqrt(pi) = 2i e^w / (sqrt(pi)(e^w + i))
    ep = np.exp(a + 1j * b)
    return 2j * ep / (SQRT_PI * (ep + 1j))


def pole_distance(w, pole: str = "north"):
    return np.abs(pole_offset(w, pole))


# --- the vector field and its flow -----------------------------------------


def vector_field_X(z):
    """(dp, dq) = (-2 pi p q, 1 + pi (p^2 - q^2)); as a complex number this is i pi z^2 + i."""
    zz = as_z(z)
    v = 1j * np.pi * np.asarray(zz) ** 2 + 1j
    if isinstance(z, DiskPoint):
        return float(v.real), float(v.imag)
    return v


def exact_flow(z, t):
    """Time-t flow of z' = i pi z^2 + i, as a disk automorphism.

    With u = sqrt(pi) z the solution is u(t) = (u0 + i tanh(sqrt(pi) t)) / (1 - i u0 tanh(sqrt(pi) t)),
    which is the strip translation w -> w + 2 sqrt(pi) t read in disk coordinates and
    keeps the fixed points +-i/sqrt(pi) in place.
    """
    zz = as_z(z)
    u = SQRT_PI * np.asarray(zz)
    th = 1j * np.tanh(SQRT_PI * np.asarray(t, dtype=float))
    out = (u + th) / (SQRT_PI * (1 - u * th))
    if isinstance(z, DiskPoint):
        return DiskPoint.from_complex(out)
    return out if np.ndim(out) else complex(out)


def flow_in_strip(w, t):
    a, b = _ab(w)
    return a + 2 * SQRT_PI * np.asarray(t, dtype=float) + 1j * b


# --- scaling exponent of the uncut flow -------------------------------------


def log_norm_term(tau, b):
    """N(tau) = ln(e^{2 tau} + 2 sin(b) e^tau + 1) - tau = ln(2 (cosh tau + sin b))."""
    at = np.abs(tau)
    e = np.exp(-at)
    return at + np.log1p(e * e + 2 * np.sin(b) * e)


def scaling_exponent_exact(w0, T):
    """g = -2 pi int_0^T q(phi_t) dt = -(N(a + 2 sqrt(pi) T) - N(a))."""
    a, b = _ab(w0)
    return -(log_norm_term(a + 2 * SQRT_PI * np.asarray(T, dtype=float), b) - log_norm_term(a, b))


def scaling_exponent_quadrature(z0, T, tol=1e-10):
    """Reference route: adaptive Simpson of -2 pi q along exact_flow."""
    z0 = as_z(z0)
    return adaptive_simpson(lambda t: -2 * np.pi * exact_flow(z0, t).imag, 0.0, T, tol)


# --- the arc C ---------------------------------------------------------------


@dataclass(frozen=True)
class ArcC:
    """Scaling-factor-1 set of the time-T uncut flow: the strip segment a = -sqrt(pi) T."""

    T: float
    b: np.ndarray
    samples: np.ndarray

    @property
    def a(self) -> float:
        return -SQRT_PI * self.T

    @property
    def strip(self) -> np.ndarray:
        return self.a + 1j * self.b

    def at_time(self, t: float) -> np.ndarray:
        """Samples of C(t) = phi_t(C), the strip segment a = -sqrt(pi) T + 2 sqrt(pi) t."""
        return strip_to_disk(flow_in_strip(self.strip, t))


def arc_C(T: float, m: int, half: bool = False) -> ArcC:
    """m samples of C, uniform in b over [0, pi] (or [0, pi/2] when ``half``)."""
    if T <= 0 or m < 2:
        raise ValueError("need T > 0 and m >= 2")
    b = np.linspace(0.0, np.pi / 2 if half else np.pi, m)
    return ArcC(T, b, strip_to_disk(-SQRT_PI * T + 1j * b))


def fit_circle(points: np.ndarray):
    """Algebraic least-squares circle fit; returns (center, radius, max residual)."""
    x, y = points.real, points.imag
    # shift/scale for conditioning
    c0 = points.mean()
    s = max(np.abs(points - c0).max(), 1e-300)
    u, v = (x - c0.real) / s, (y - c0.imag) / s
    A = np.column_stack([u, v, np.ones_like(u)])
    rhs = -(u * u + v * v)
    (D, E, F), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cu, cv = -D / 2, -E / 2
    rad = np.sqrt(cu * cu + cv * cv - F)
    center = c0 + s * (cu + 1j * cv)
    radius = s * rad
    resid = np.abs(np.abs(points - center) - radius).max()
    return complex(center), float(radius), float(resid)


def boundary_crossing_angle(center: complex, radius: float) -> float:
    """Angle between a circle and the boundary circle |z| = 1/sqrt(pi) at an intersection point."""
    d = abs(center)
    # law of cosines in the triangle (0, center, intersection point)
    cos_t = (RADIUS**2 + radius**2 - d**2) / (2 * RADIUS * radius)
    return float(np.arccos(np.clip(cos_t, -1.0, 1.0)))


# --- boundary trajectory and the integral estimate --------------------------


def gd(x):
    """Gudermannian function, 2 arctan(tanh(x / 2))."""
    return 2 * np.arctan(np.tanh(np.asarray(x, dtype=float) / 2))


@dataclass(frozen=True)
class BoundaryTrajectory:
    """z(t) = strip_to_disk(-sqrt(pi) T + 2 sqrt(pi) t), on the right boundary arc; q(z(T/2)) = 0."""

    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")

    def a(self, t):
        return -SQRT_PI * self.T + 2 * SQRT_PI * np.asarray(t, dtype=float)

    def __call__(self, t):
        return strip_to_disk(self.a(t) + 0j)

    def eta(self, t):
        """p(z(t)) = sech(a(t)) / sqrt(pi)."""
        return p_in_strip(self.a(t) + 0j)

    def q(self, t):
        return np.tanh(self.a(t)) / SQRT_PI

    def angle(self, t):
        """Polar angle of z(t), which equals gd(a(t))."""
        return gd(self.a(t))

    def eta_integral(self, t0, t1):
        """int_{t0}^{t1} eta dt in closed form: (gd(a(t1)) - gd(a(t0))) / (2 pi)."""
        return (gd(self.a(t1)) - gd(self.a(t0))) / (2 * np.pi)


def boundary_trajectory(T: float) -> BoundaryTrajectory:
    return BoundaryTrajectory(T)


def p_integral(T: float, tol: float = 1e-10) -> float:
    """int_0^T p(z(t)) dt along the boundary trajectory, by adaptive Simpson."""
    if T <= 0:
        raise ValueError("T must be positive")
    z = BoundaryTrajectory(T)
    return adaptive_simpson(lambda t: float(z.eta(t)), 0.0, T, tol)


def p_integral_deficit(T: float, tol: float = 1e-12) -> float:
    """1/2 - p_integral(T) to relative accuracy, by quadrature of the two tails.

    The whole boundary flow line sweeps half a turn, so by symmetry the deficit is
    2 int_T^inf eta dt = (1/pi) int_{sqrt(pi) T}^inf sech(a) da
                       = (e^{-sqrt(pi) T} / pi) int_0^inf 2 / (e^u + e^{-2 sqrt(pi) T} e^{-u}) du.
    Factoring out e^{-sqrt(pi) T} keeps it representable when it is far below the
    spacing of doubles near 1/2.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    c = np.exp(-2 * SQRT_PI * T)
    inner = adaptive_simpson(lambda u: 2.0 / (np.exp(u) + c * np.exp(-u)), 0.0, 60.0, tol)
    return float(np.exp(-SQRT_PI * T) * inner / np.pi)

