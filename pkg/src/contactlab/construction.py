"""Sphere-level pipeline: gamma (cut-off flow), kappa (strict displacing isotopy),
their composition psi, the scaling-factor-1 set and the translated-point search.

Points of the sphere pi|z|^2 = 1 in C^{n+1} are handled as real arrays in the
layout of :mod:`contactlab.sphere`; ``z_0 = p + iq`` is the disk coordinate and
``z_1..z_n`` are the fiber coordinates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import directed_hausdorff

from .cutoff import (
    QUADRATIC,
    HamiltonianSchedule,
    SigmaSet,
    SmoothingProfile,
    StripStart,
    f_cutoff,
    integrate_cutoff,
    shelukhin_length,
    sigma_set,
)
from .disk import RADIUS, SQRT_PI, FixedPointSingular, disk_to_strip, pole_offset, strip_to_disk
from .sphere import as_complex, from_complex, liouville_form, reeb_rotate

log = logging.getLogger(__name__)

SCHEMA = 1
DEFAULT_R_MINUS = 0.1 * RADIUS
DEFAULT_R_PLUS = 1e-4 * RADIUS
DEFAULT_EPS_DISK = 0.2 * RADIUS
TOL_DISPLACE = 1e-8


class DisplacementFailed(RuntimeError):
    pass


class CertificationError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


# --- gamma ----------------------------------------------------------------------


@dataclass(frozen=True)
class Gamma:
    """gamma_t = phi_{tT}, the cut-off flow run at speed T; t in [0, 1]."""

    schedule: HamiltonianSchedule

    @property
    def T(self) -> float:
        return self.schedule.T

    @property
    def length(self) -> float:
        return shelukhin_length(self.schedule)

    def hamiltonian(self, c: np.ndarray, t: float) -> np.ndarray:
        """T h_{tT}; the contact Hamiltonian of f R + f' V is f(p)."""
        f, _ = f_cutoff(c[..., 0], self.schedule.profile(t * self.T))
        return self.T * np.asarray(f)

    def apply(self, c: np.ndarray, t: float = 1.0) -> np.ndarray:
        """gamma_t on sphere points: the disk part follows the cut-off flow and every
        fiber coordinate is multiplied by sqrt(ell(tT) / ell(0)) e^{i theta}."""
        c = np.atleast_2d(np.asarray(c, dtype=float))
        out = np.empty_like(c)
        for k, row in enumerate(c):
            out[k] = self._apply_one(row, t)
        return out

    def _apply_one(self, c, t):
        z = as_complex(c)
        try:
            w0 = complex(disk_to_strip(z[0]))
        except FixedPointSingular:
            return c.copy()  # the poles are fixed and carry no fiber
        return self.apply_strip(w0, z[1:], t)

    def apply_strip(self, w0: complex, fiber: np.ndarray, t: float = 1.0) -> np.ndarray:
        """Same map for a point given by strip coordinate and fiber (precise near the poles)."""
        if t == 0:
            return from_complex(np.concatenate([[complex(strip_to_disk(w0))], fiber]))
        end, _, mult = self.flow_with_exponent(w0, t)
        return from_complex(np.concatenate([[complex(strip_to_disk(end))], fiber * mult]))

    def flow_with_exponent(self, w0: complex, t: float = 1.0):
        """(end strip coordinate, g, fiber multiplier) of the flow line from strip point w0."""
        tr = integrate_cutoff(StripStart(w0), self.schedule, times=np.array([0.0, t * self.T]))
        ell = tr.ell
        mult = np.sqrt(ell[-1] / ell[0]) * np.exp(1j * tr.phase[-1]) if ell[0] > 0 else 0j
        return complex(tr.strip[-1]), float(tr.g[-1]), complex(mult)


def build_gamma(T: float, delta: float, mu: SmoothingProfile = QUADRATIC) -> Gamma:
    return Gamma(HamiltonianSchedule(T, delta, mu))


# --- kappa ----------------------------------------------------------------------


def finger_profile(s, width: float):
    """Odd, nondecreasing F with F(s) = s on |s| <= w/2, constant 3w/4 beyond |s| = w; C^1."""
    s = np.asarray(s, dtype=float)
    w = width
    a = np.abs(s)
    mid = a - (a - w / 2) ** 2 / w
    val = np.where(a <= w / 2, a, np.where(a <= w, mid, 0.75 * w))
    return np.sign(s) * val


def finger_slope(s, width: float):
    a = np.abs(np.asarray(s, dtype=float))
    w = width
    return np.where(a <= w / 2, 1.0, np.where(a <= w, 1.0 - 2 * (a - w / 2) / w, 0.0))


def rotation_moment(c: np.ndarray) -> np.ndarray:
    """n(c) = 2 pi Im(z_0 conj(z_1)), the contact Hamiltonian of the real rotation of the (z_0, z_1) plane."""
    z = as_complex(c)
    return 2 * np.pi * np.imag(z[..., 0] * np.conj(z[..., 1]))


@dataclass(frozen=True)
class DisplacingIsotopy:
    """kappa_t generated by k = c F(n), F the finger profile of the given width.

    n and F(n) are invariant under the Reeb flow, so k descends to the
    projective space and its contact flow is strict.  The flow turns the
    (z_0, z_1) plane by 2 pi t c F'(n) and then applies the Reeb flow for time
    t c (F(n) - n F'(n)).  With c = 1/4 the time-1 map sends the lift of
    i/sqrt(pi) to the fiber over the disk center.  ``width = 0`` is the identity.
    """

    width: float
    n: int = 1
    coefficient: float = 0.25

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be nonnegative")
        if self.n < 1:
            raise ValueError("sphere dimension n must be at least 1")

    @property
    def is_identity(self) -> bool:
        return self.width == 0

    def hamiltonian(self, c: np.ndarray, t: float = 0.0) -> np.ndarray:
        if self.is_identity:
            return np.zeros(np.shape(c)[:-1])
        return self.coefficient * finger_profile(rotation_moment(c), self.width)

    @property
    def length(self) -> float:
        """int_0^1 max |k_t| dt; n ranges over [-1, 1] on the sphere and F is odd and increasing."""
        return 0.0 if self.is_identity else float(self.coefficient * finger_profile(1.0, self.width))

    @property
    def hofer_norm(self) -> float:
        """int_0^1 (max k_t - min k_t) dt."""
        return 2 * self.length

    def apply(self, c: np.ndarray, t: float = 1.0) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if self.is_identity or t == 0:
            return c.copy()
        nm = rotation_moment(c)
        F, dF = finger_profile(nm, self.width), finger_slope(nm, self.width)
        th = 2 * np.pi * t * self.coefficient * dF
        z = as_complex(c).copy()
        z0, z1 = z[..., 0].copy(), z[..., 1].copy()
        z[..., 0] = np.cos(th) * z0 - np.sin(th) * z1
        z[..., 1] = np.sin(th) * z0 + np.cos(th) * z1
        return reeb_rotate(from_complex(z), t * self.coefficient * (F - nm * dF))

    def inverse(self, c: np.ndarray, t: float = 1.0) -> np.ndarray:
        """n is preserved by the flow, so the inverse is the same formula at -t."""
        return self.apply(c, -t)


def build_kappa(width: float, n: int = 1, tol_displace: float = TOL_DISPLACE,
                coefficient: float = 0.25) -> DisplacingIsotopy:
    kappa = DisplacingIsotopy(width, n, coefficient)
    if kappa.is_identity:
        return kappa
    top = np.zeros(2 * n + 2)
    top[1] = RADIUS
    miss = float(np.abs(as_complex(kappa.apply(top))[0]))
    if miss > tol_displace:
        raise DisplacementFailed(f"time-1 map leaves the lift of i/sqrt(pi) at disk radius {miss:.3e}")
    return kappa


# --- composition ----------------------------------------------------------------


@dataclass(frozen=True)
class ComposedIsotopy:
    gamma: Gamma
    kappa: DisplacingIsotopy

    def apply(self, c: np.ndarray, t: float = 1.0) -> np.ndarray:
        return self.kappa.apply(self.gamma.apply(c, t), t)

    def hamiltonian(self, c: np.ndarray, t: float) -> np.ndarray:
        """k_t + T h_{tT} o kappa_t^{-1}."""
        return self.kappa.hamiltonian(c, t) + self.gamma.hamiltonian(self.kappa.inverse(c, t), t)

    @property
    def length_bound(self) -> float:
        """length(psi) <= length(kappa) + length(gamma)."""
        return self.kappa.length + self.gamma.length


def compose_psi(gamma: Gamma, kappa: DisplacingIsotopy) -> ComposedIsotopy:
    return ComposedIsotopy(gamma, kappa)


# --- numerical checks on sphere maps -----------------------------------------------


def conformal_exponent(mapping, c: np.ndarray, h: float = 1e-4) -> float:
    """ln of lambda(d mapping (R)) at c: the scaling exponent, via a 4th-order central difference
    along the Reeb orbit (R spans the complement of the contact plane and lambda(R) = 1)."""
    pts = reeb_rotate(c, np.array([-2 * h, -h, h, 2 * h]))
    img = np.array([np.asarray(mapping(p)).reshape(-1) for p in pts])
    d = (img[0] - 8 * img[1] + 8 * img[2] - img[3]) / (12 * h)
    return float(np.log(liouville_form(np.asarray(mapping(c)).reshape(-1), d)))


def generating_hamiltonian(isotopy, c: np.ndarray, t: float, h: float = 1e-5) -> float:
    """lambda(d/dt isotopy_t(c)) at isotopy_t(c), by a central difference in t."""
    a, b = isotopy.apply(c, t - h).reshape(-1), isotopy.apply(c, t + h).reshape(-1)
    y = isotopy.apply(c, t).reshape(-1)
    return float(liouville_form(y, (b - a) / (2 * h)))


# --- Sigma on the sphere and translated points ---------------------------------------


def fiber_samples(n: int, m: int) -> np.ndarray:
    """m unit fiber directions; for n = 1 these are the angles 2 pi k / m."""
    ang = 2 * np.pi * np.arange(m) / m
    out = np.zeros((m, n), dtype=complex)
    out[:, 0] = np.exp(1j * ang)
    return out


@dataclass(frozen=True)
class LiftedSigma:
    """Sphere samples over the disk set Sigma (both halves) and their images under gamma_1."""

    strip: np.ndarray
    points: np.ndarray
    gamma_image: np.ndarray
    g: np.ndarray


def lift_sigma(sigma: SigmaSet, gamma: Gamma, n: int = 1, fibers: int = 64) -> LiftedSigma:
    """pr^{-1}(Sigma) sampled over ``fibers`` directions, pushed through gamma_1 via the strip."""
    strip = sigma.full_strip()
    dirs = fiber_samples(n, fibers)
    pts, imgs, gs = [], [], []
    for w in strip:
        z0 = complex(strip_to_disk(w))
        rad = np.sqrt(max(1.0 / np.pi - abs(z0) ** 2, 0.0))
        end, g, mult = gamma.flow_with_exponent(complex(w))
        z_end = complex(strip_to_disk(end))
        for d in dirs:
            fib = rad * d
            pts.append(from_complex(np.concatenate([[z0], fib])))
            imgs.append(from_complex(np.concatenate([[z_end], fib * mult])))
            gs.append(g)
    return LiftedSigma(strip, np.array(pts), np.array(imgs), np.array(gs))


def reeb_distance(x: np.ndarray, y: np.ndarray, s) -> np.ndarray:
    """|y - R_s(x)| in the ambient space."""
    return np.linalg.norm(y - reeb_rotate(x, s), axis=-1)


def reeb_distance_min(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """min_s |y - R_s(x)| in closed form: sqrt(|x|^2 + |y|^2 - 2 |<y, x>|) with the Hermitian product."""
    zx, zy = as_complex(x), as_complex(y)
    inner = np.abs(np.sum(zy * np.conj(zx), axis=-1))
    d2 = np.sum(np.abs(zx) ** 2, axis=-1) + np.sum(np.abs(zy) ** 2, axis=-1) - 2 * inner
    return np.sqrt(np.clip(d2, 0.0, None))


def translated_point_search(points: np.ndarray, images: np.ndarray, s_grid: int = 256, refine: int = 8) -> float:
    """min over samples x and s in [0, 1) of |psi_1(x) - R_s(x)|.

    The s-grid minimum of every sample is computed; the ``refine`` smallest
    are polished by bounded scalar minimisation around their grid minimiser.
    """
    s = np.arange(s_grid) / s_grid
    d = np.stack([reeb_distance(points, images, si) for si in s], axis=1)
    k = np.argmin(d, axis=1)
    best = d[np.arange(len(points)), k]
    order = np.argsort(best)[:refine]
    margin = float(best.min())
    for i in order:
        s0 = s[k[i]]
        res = minimize_scalar(lambda x: float(reeb_distance(points[i], images[i], x)),
                              bounds=(s0 - 1.0 / s_grid, s0 + 1.0 / s_grid), method="bounded",
                              options={"xatol": 1e-12})
        margin = min(margin, float(res.fun))
    return margin


def mesh_floor(points: np.ndarray, images: np.ndarray, fibers: int) -> float:
    """Resolution floor for a sampled margin: the largest gap between neighbouring samples
    (along the fiber circle and along Sigma) of the points plus that of their images.

    The continuous minimum can undercut the sampled one by at most roughly this amount,
    so only margins above it certify the absence of translated points.
    """

    def gap(x):
        x = x.reshape(-1, fibers, x.shape[-1])
        around = np.linalg.norm(np.roll(x, 1, axis=1) - x, axis=-1).max()
        along = np.linalg.norm(x[1:] - x[:-1], axis=-1).max() if len(x) > 1 else 0.0
        return float(max(around, along))

    return gap(points) + gap(images)


def rotational_bound(points: np.ndarray, images: np.ndarray) -> float:
    """Gap between the radius intervals of pr(points) and pr(images), 0 if they overlap.

    The Reeb flow preserves |pr|, and |x - y| >= ||pr x| - |pr y||, so this is
    a lower bound for the translated-point margin.
    """
    r1 = np.abs(as_complex(points)[..., 0])
    r2 = np.abs(as_complex(images)[..., 0])
    return float(max(r2.min() - r1.max(), r1.min() - r2.max(), 0.0))


# --- Hausdorff helpers -------------------------------------------------------------


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite complex point sets."""
    A = np.column_stack([np.real(a), np.imag(a)])
    B = np.column_stack([np.real(b), np.imag(b)])
    return float(max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0]))


def arc_strip(a: float, m: int = 2049) -> np.ndarray:
    return a + 1j * np.linspace(0.0, np.pi, m)


def hausdorff_to_arc(strip_pts: np.ndarray, a_arc: float, pole: str, m: int = 2049) -> float:
    """Disk-unit Hausdorff distance from strip points to the arc {a = a_arc}, measured in
    coordinates relative to ``pole`` so nothing is lost near the fixed points."""
    return hausdorff(pole_offset(strip_pts, pole), pole_offset(arc_strip(a_arc, m), pole))


# --- certification --------------------------------------------------------------------


@dataclass
class CertificationReport:
    length_gamma: float
    length_kappa: float
    length_psi: float
    oscillation_bound: float
    sigma_hausdorff_to_C0: float
    displacement_margins: dict
    translated_point_margin: float
    parameters: dict
    rotational_bound: float = 0.0
    translated_point_floor: float = 0.0
    criteria: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())

    @property
    def achieved_eps(self) -> float:
        return self.oscillation_bound - 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = SCHEMA
        d["achieved_eps"] = self.achieved_eps
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        p = self.parameters
        lines = [
            f"certification  T={p['T']}  delta={p['delta']}  kappa={p['kappa']}  width={p['width']}  eps={p['eps']}",
            f"  length(gamma)            {self.length_gamma:.12f}",
            f"  length(kappa)            {self.length_kappa:.12f}",
            f"  length(psi) <=           {self.length_psi:.12f}",
            f"  oscillation bound        {self.oscillation_bound:.12f}  (achieved eps {self.achieved_eps:.6f})",
            f"  Sigma to C(0) Hausdorff  {self.sigma_hausdorff_to_C0:.3e}",
            f"  translated-point margin  {self.translated_point_margin:.6e}",
            f"  resolution floor         {self.translated_point_floor:.6e}",
            f"  rotational lower bound   {self.rotational_bound:.6e}",
        ]
        for k, v in sorted(self.displacement_margins.items()):
            lines.append(f"  margin {k:<18}{v:.6e}")
        for k, v in sorted(self.criteria.items()):
            lines.append(f"  [{'PASS' if v else 'FAIL'}] {k}")
        return "\n".join(lines) + "\n"


def _disk_circle(center: complex, radius: float, m: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(m) / m)


def inclusion_margins(sigma_strip: np.ndarray, image_strip: np.ndarray, kappa: DisplacingIsotopy,
                      r_minus: float, r_plus: float, eps_disk: float, n: int = 1, samples: int = 64) -> dict:
    """Positive numbers certify the three inclusions.

    sigma_in_U_minus:  r_- - max distance of Sigma from -i/sqrt(pi)
    image_in_U_plus:   r_+ - max distance of gamma_1(Sigma) from i/sqrt(pi)
    kappa_U_plus:      eps_disk - max |pr kappa_1(x)| over lifts of the closed disk U_+
                       (sampled on its boundary circle and center, all fiber angles)
    disjoint:          distance between D(eps_disk) and U_-
    """
    m = {
        "sigma_in_U_minus": r_minus - float(np.max(np.abs(pole_offset(sigma_strip, "south")))),
        "image_in_U_plus": r_plus - float(np.max(np.abs(pole_offset(image_strip, "north")))),
        "disjoint": (RADIUS - r_minus) - eps_disk,
    }
    if kappa.is_identity:
        m["kappa_U_plus"] = eps_disk - RADIUS
        return m
    ring = np.concatenate([[0.0], _disk_circle(0.0, 1.0, samples)])
    worst = 0.0
    for rho in (0.25, 0.5, 1.0):
        for u in ring:
            z0 = 1j * RADIUS + rho * r_plus * u
            if abs(z0) > RADIUS:
                z0 = z0 / abs(z0) * RADIUS
            rad = np.sqrt(max(1.0 / np.pi - abs(z0) ** 2, 0.0))
            for d in fiber_samples(n, 16):
                c = from_complex(np.concatenate([[z0], rad * d]))
                worst = max(worst, float(np.abs(as_complex(kappa.apply(c))[0])))
    m["kappa_U_plus"] = eps_disk - worst
    return m


def certify(T: float = 10.0, delta: float = 0.01, width: float = 0.25, eps: float = 0.4, kappa: str = "finger",
            n: int = 1, resolution: int = 64, fibers: int = 64, s_grid: int = 256,
            r_minus: float = DEFAULT_R_MINUS, r_plus: float = DEFAULT_R_PLUS, eps_disk: float = DEFAULT_EPS_DISK,
            mu: str = "quadratic-spline") -> CertificationReport:
    """Full pipeline; failed criteria are recorded in the report, stage errors raise CertificationError."""
    params = dict(T=T, delta=delta, width=width, eps=eps, kappa=kappa, n=n, resolution=resolution,
                  fibers=fibers, s_grid=s_grid, r_minus=r_minus, r_plus=r_plus, eps_disk=eps_disk, mu=mu)
    if kappa not in ("finger", "none"):
        raise ValueError(f"unknown kappa family {kappa!r}")

    def stage(name, fn, *a, **kw):
        try:
            return fn(*a, **kw)
        except Exception as exc:  # surfaced with the stage attached
            raise CertificationError(name, exc) from exc

    gamma = stage("gamma", build_gamma, T, delta, SmoothingProfile(mu))
    kap = stage("kappa", build_kappa, width if kappa == "finger" else 0.0, n)
    psi = compose_psi(gamma, kap)
    length_gamma = stage("length", lambda: gamma.length)
    sig = stage("sigma", sigma_set, gamma.schedule, resolution)
    lifted = stage("lift", lift_sigma, sig, gamma, n, fibers)
    images = stage("kappa-image", kap.apply, lifted.gamma_image)
    margin = stage("translated-points", translated_point_search, lifted.points, images, s_grid)
    rot = rotational_bound(lifted.points, images)
    floor = mesh_floor(lifted.points, images, fibers)

    full = sig.full_strip()
    image_strip = stage("flow-sigma", lambda: np.array([gamma.flow_with_exponent(w)[0] for w in full]))
    h0 = hausdorff_to_arc(full, -SQRT_PI * T, "south")
    margins = inclusion_margins(full, image_strip, kap, r_minus, r_plus, eps_disk, n)

    length_psi = kap.length + length_gamma
    osc = 2 * length_psi
    rep = CertificationReport(
        length_gamma=length_gamma,
        length_kappa=kap.length,
        length_psi=length_psi,
        oscillation_bound=osc,
        sigma_hausdorff_to_C0=h0,
        displacement_margins=margins,
        translated_point_margin=margin,
        parameters=params,
        rotational_bound=rot,
        translated_point_floor=floor,
    )
    rep.criteria = {
        "oscillation_below_1_plus_eps": bool(osc < 1 + eps),
        "no_translated_points": bool(margin > floor),
        "inclusions": bool(all(v > 0 for v in margins.values())),
    }
    return rep
