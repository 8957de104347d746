"""Liouville form, contact vector fields and the Reeb flow on the unit-capacity sphere.

Coordinates on R^{2n+2} are ordered ``(p, q, x_1, y_1, ..., x_n, y_n)``.  All
field evaluators are vectorised over leading axes: an array of shape
``(..., 2n+2)`` is a batch of points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

SQRT_PI = np.sqrt(np.pi)
RADIUS = 1.0 / SQRT_PI
SPHERE_TOL = 1e-12
TANGENT_TOL = 1e-10
RENORM_TOL = 1e-10

FIELD_NAMES = ("R", "F", "JF", "V", "X")


class DimensionError(ValueError):
    pass


def _dim(coords: np.ndarray) -> int:
    m = np.shape(coords)[-1]
    if m < 4 or m % 2:
        raise DimensionError(f"expected 2n+2 coordinates with n >= 1, got {m}")
    return (m - 2) // 2


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "n", _dim(c))
        err = abs(np.pi * c @ c - 1.0)
        if err > SPHERE_TOL:
            raise ValueError(f"point is off the sphere (|pi|z|^2 - 1| = {err:.3e})")


@dataclass(frozen=True)
class TangentVector:
    base: SpherePoint
    dir: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dir, dtype=float)
        object.__setattr__(self, "dir", d)
        if d.shape != self.base.coords.shape:
            raise DimensionError("tangent vector and base point have different dimensions")
        if abs(self.base.coords @ d) > TANGENT_TOL * max(1.0, np.linalg.norm(d)):
            raise ValueError("vector is not tangent to the sphere")


def on_sphere(coords) -> SpherePoint:
    return SpherePoint(np.asarray(coords, dtype=float))


def random_points(rng: np.random.Generator, size: int, n: int = 1) -> np.ndarray:
    """Uniform random points on the sphere pi|z|^2 = 1 in R^{2n+2}."""
    z = rng.standard_normal((size, 2 * n + 2))
    return z / (SQRT_PI * np.linalg.norm(z, axis=-1, keepdims=True))


def random_tangents(rng: np.random.Generator, points: np.ndarray) -> np.ndarray:
    v = rng.standard_normal(points.shape)
    nrm2 = np.sum(points * points, axis=-1, keepdims=True)
    return v - np.sum(v * points, axis=-1, keepdims=True) / nrm2 * points


def normalize(coords: np.ndarray) -> np.ndarray:
    """Radially project back onto the sphere where the constraint has drifted past 1e-10."""
    c = np.array(coords, dtype=float)
    viol = np.abs(np.pi * np.sum(c * c, axis=-1) - 1.0)
    bad = viol > RENORM_TOL
    if np.any(bad):
        log.debug("renormalising %d point(s), max violation %.3e", int(np.sum(bad)), float(viol.max()))
        c[bad] = c[bad] / (SQRT_PI * np.linalg.norm(c[bad], axis=-1, keepdims=True))
    return c


# --- fields -----------------------------------------------------------------


def reeb(c: np.ndarray) -> np.ndarray:
    out = np.empty_like(c, dtype=float)
    out[..., 0::2] = -c[..., 1::2]
    out[..., 1::2] = c[..., 0::2]
    return 2 * np.pi * out


def field_F(c: np.ndarray, i: int) -> np.ndarray:
    n = _dim(c)
    if not 1 <= i <= n:
        raise IndexError(f"index {i} out of range 1..{n}")
    p, q, x, y = c[..., 0], c[..., 1], c[..., 2 * i], c[..., 2 * i + 1]
    out = np.zeros_like(c, dtype=float)
    out[..., 0] = -x
    out[..., 1] = y
    out[..., 2 * i] = p
    out[..., 2 * i + 1] = -q
    return 2 * np.pi * out


def field_JF(c: np.ndarray, i: int) -> np.ndarray:
    n = _dim(c)
    if not 1 <= i <= n:
        raise IndexError(f"index {i} out of range 1..{n}")
    p, q, x, y = c[..., 0], c[..., 1], c[..., 2 * i], c[..., 2 * i + 1]
    out = np.zeros_like(c, dtype=float)
    out[..., 0] = -y
    out[..., 1] = -x
    out[..., 2 * i] = q
    out[..., 2 * i + 1] = p
    return 2 * np.pi * out


def field_V(c: np.ndarray) -> np.ndarray:
    n = _dim(c)
    out = np.zeros_like(c, dtype=float)
    for i in range(1, n + 1):
        out += 0.5 * (c[..., 2 * i + 1, None] * field_F(c, i) - c[..., 2 * i, None] * field_JF(c, i))
    return out


def field_X(c: np.ndarray) -> np.ndarray:
    return c[..., 0, None] * reeb(c) + field_V(c)


def field(name: str, at: SpherePoint, i: int | None = None) -> TangentVector:
    c = at.coords
    if name == "R":
        v = reeb(c)
    elif name in ("F", "F_i"):
        v = field_F(c, 1 if i is None else i)
    elif name in ("JF", "JF_i"):
        v = field_JF(c, 1 if i is None else i)
    elif name == "V":
        v = field_V(c)
    elif name == "X":
        v = field_X(c)
    else:
        raise KeyError(f"unknown field {name!r}; expected one of {FIELD_NAMES}")
    return TangentVector(at, v)


# --- forms ------------------------------------------------------------------


def liouville_form(c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """lambda_c(v) = 1/2 sum over planes of (u dv - v du)."""
    if np.shape(c)[-1] != np.shape(v)[-1]:
        raise DimensionError("point and vector have different dimensions")
    u, w = c[..., 0::2], c[..., 1::2]
    du, dw = v[..., 0::2], v[..., 1::2]
    return 0.5 * np.sum(u * dw - w * du, axis=-1)


def omega(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The constant-coefficient form d(lambda) = dp^dq + sum dx^dy."""
    return np.sum(a[..., 0::2] * b[..., 1::2] - a[..., 1::2] * b[..., 0::2], axis=-1)


def liouville(at: SpherePoint, v: TangentVector) -> float:
    if v.base is not at and not np.array_equal(v.base.coords, at.coords):
        raise ValueError("tangent vector is based at a different point")
    if v.dir.shape != at.coords.shape:
        raise DimensionError("point and vector have different dimensions")
    return float(liouville_form(at.coords, v.dir))


def contact_residual(c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """|dp(v) + dlambda(X, v) + 2 pi q lambda(v)| for batches of tangent pairs."""
    return np.abs(v[..., 0] + omega(field_X(c), v) + 2 * np.pi * c[..., 1] * liouville_form(c, v))


def verify_contact_identity(at: SpherePoint, v: TangentVector) -> float:
    return float(contact_residual(at.coords, v.dir))


# --- Reeb flow and projection -------------------------------------------------


def reeb_rotate(c: np.ndarray, s) -> np.ndarray:
    """Rotate every complex coordinate by exp(2 pi i s); broadcasts over s."""
    s = np.asarray(s, dtype=float)
    cs, sn = np.cos(2 * np.pi * s)[..., None], np.sin(2 * np.pi * s)[..., None]
    u, w = c[..., 0::2], c[..., 1::2]
    out = np.empty(np.broadcast_shapes(np.shape(c), s.shape + (np.shape(c)[-1],)))
    out[..., 0::2] = cs * u - sn * w
    out[..., 1::2] = sn * u + cs * w
    return out


def reeb_flow(at: SpherePoint, s: float) -> SpherePoint:
    return SpherePoint(reeb_rotate(at.coords, s))


def project(c: np.ndarray) -> np.ndarray:
    """Projection to the (p, q) plane as a complex number p + iq."""
    return c[..., 0] + 1j * c[..., 1]


def project_to_disk(at: SpherePoint):
    from .disk import DiskPoint

    return DiskPoint(float(at.coords[0]), float(at.coords[1]))


def lift(z0, fiber) -> np.ndarray:
    """Sphere point over the disk point ``z0`` with fiber direction ``fiber``.

    ``fiber`` is a complex array of shape (..., n); it is rescaled so the result
    lies on the sphere.  Points over the boundary circle ignore ``fiber``.
    """
    z0 = np.asarray(z0, dtype=complex)
    fiber = np.asarray(fiber, dtype=complex)
    n = fiber.shape[-1]
    rad2 = np.clip(1.0 / np.pi - np.abs(z0) ** 2, 0.0, None)
    fn = np.linalg.norm(fiber, axis=-1)
    scale = np.sqrt(rad2) / np.where(fn > 0, fn, 1.0)
    w = fiber * scale[..., None]
    out = np.empty(np.broadcast_shapes(z0.shape, fiber.shape[:-1]) + (2 * n + 2,))
    out[..., 0] = z0.real
    out[..., 1] = z0.imag
    out[..., 2::2] = w.real
    out[..., 3::2] = w.imag
    return out


def as_complex(c: np.ndarray) -> np.ndarray:
    return c[..., 0::2] + 1j * c[..., 1::2]


def from_complex(z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out
