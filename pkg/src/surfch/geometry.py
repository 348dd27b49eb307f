"""Analytic descriptions of the evolving surfaces.

Each surface family is a closed surface ``Gamma(t)`` given by a level set
together with a material parametrization: an exact flow map carrying points of
``Gamma(0)`` to ``Gamma(t)`` and the corresponding velocity field. Mesh nodes
follow the flow map exactly, so no ODE integration error enters the node
trajectories.

Supported families:

``stationary_sphere``
    Sphere of fixed radius ``a``; zero velocity.
``expanding_sphere``
    Level set ``x^2 + y^2 + z^2 = a^2 e^t``; flow ``x(t) = e^{t/2} x0``,
    velocity ``x/2`` (radius grows like the inverse mean curvature flow).
``expanding_torus``
    Level set ``(sqrt(x^2+y^2) - R - t)^2 + z^2 = r^2``; material points move
    radially outward in the xy-plane at unit speed, velocity
    ``(x, y, 0)/sqrt(x^2+y^2)``. The surface divergence of this velocity is
    positive everywhere.
``shrinking_torus``
    Level set ``(sqrt(x^2+y^2) - R)^2 + z^2 = (r (1-t))^2``; the minor circle
    scales toward the core ring, velocity
    ``-((rho-R) x/rho, (rho-R) y/rho, z)/(1-t)`` with ``rho = sqrt(x^2+y^2)``.
    The minor radius degenerates at ``t = 1``; times ``t >= 0.99`` are
    rejected. The surface divergence of this velocity is negative.

The level sets do not determine tangential motion; the parametrizations above
are one admissible realization (fixed angular coordinates).
"""

from __future__ import annotations

import dataclasses

import numpy as np

KINDS = (
    "stationary_sphere",
    "expanding_sphere",
    "expanding_torus",
    "shrinking_torus",
)

# Accepted distance-to-surface bound for torus closest-point projection. The
# tube radius is 0.25; beyond 0.2 the projection is considered unreliable.
TORUS_PROJECTION_BOUND = 0.2

_SHRINKING_T_MAX = 0.99


@dataclasses.dataclass(frozen=True)
class SurfaceFamily:
    """A time-parametrized closed surface with an exact flow map.

    Parameters
    ----------
    kind:
        One of :data:`KINDS`.
    radius:
        Sphere radius at ``t = 0`` (sphere kinds only).
    major_radius, minor_radius:
        Torus radii at ``t = 0`` (torus kinds only).
    t_max:
        Upper end of the valid time interval. Defaults to ``inf`` except for
        the shrinking torus, which rejects ``t >= 0.99``.
    """

    kind: str
    radius: float = 1.0
    major_radius: float = 0.75
    minor_radius: float = 0.25
    t_max: float = np.inf
    t_max_open: bool = False  # reject t == t_max as well (degenerate endpoint)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")

    @property
    def is_sphere(self) -> bool:
        return self.kind in ("stationary_sphere", "expanding_sphere")

    @property
    def is_torus(self) -> bool:
        return not self.is_sphere

    def check_time(self, t: float) -> None:
        """Raise ValueError when ``t`` lies outside the valid interval."""
        bad = not np.isfinite(t) or t < 0.0 or t > self.t_max
        if self.t_max_open and t >= self.t_max:
            bad = True
        if bad:
            end = f"{self.t_max})" if self.t_max_open else f"{self.t_max}]"
            raise ValueError(
                f"time {t} outside the valid interval [0, {end} for {self.kind}"
            )

    def sphere_radius_at(self, t: float) -> float:
        if self.kind == "stationary_sphere":
            return self.radius
        if self.kind == "expanding_sphere":
            return self.radius * float(np.exp(0.5 * t))
        raise ValueError(f"{self.kind} is not a sphere")

    def torus_radii_at(self, t: float) -> tuple[float, float]:
        """(major, minor) radii of the torus at time ``t``."""
        if self.kind == "expanding_torus":
            return self.major_radius + t, self.minor_radius
        if self.kind == "shrinking_torus":
            return self.major_radius, self.minor_radius * (1.0 - t)
        raise ValueError(f"{self.kind} is not a torus")


def stationary_sphere(radius: float = 1.0) -> SurfaceFamily:
    return SurfaceFamily("stationary_sphere", radius=radius)


def expanding_sphere(radius: float = 1.0) -> SurfaceFamily:
    return SurfaceFamily("expanding_sphere", radius=radius)


def expanding_torus() -> SurfaceFamily:
    return SurfaceFamily("expanding_torus")


def shrinking_torus() -> SurfaceFamily:
    return SurfaceFamily("shrinking_torus", t_max=_SHRINKING_T_MAX, t_max_open=True)


def family_from_kind(kind: str) -> SurfaceFamily:
    factories = {
        "stationary_sphere": stationary_sphere,
        "expanding_sphere": expanding_sphere,
        "expanding_torus": expanding_torus,
        "shrinking_torus": shrinking_torus,
    }
    if kind not in factories:
        raise ValueError(f"unknown surface kind {kind!r}")
    return factories[kind]()


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 3:
        raise ValueError("points must have shape (..., 3)")
    return pts


def level_set(family: SurfaceFamily, x, t: float):
    """Level-set value whose zero set is ``Gamma(t)``. Not a distance."""
    family.check_time(t)
    pts = _as_points(x)
    if family.is_sphere:
        a = family.sphere_radius_at(t)
        return np.sum(pts * pts, axis=-1) - a * a
    big_r, small_r = family.torus_radii_at(t)
    rho = np.hypot(pts[..., 0], pts[..., 1])
    return (rho - big_r) ** 2 + pts[..., 2] ** 2 - small_r * small_r


def flow_map(family: SurfaceFamily, x0, t: float) -> np.ndarray:
    """Map reference points on ``Gamma(0)`` to their position on ``Gamma(t)``.

    The input must lie on ``Gamma(0)`` (level-set value within 1e-10); the
    output lies on ``Gamma(t)`` exactly up to round-off, and the map is the
    identity at ``t = 0``.
    """
    family.check_time(t)
    pts = _as_points(x0)
    lv = level_set(family, pts, 0.0)
    if np.max(np.abs(lv), initial=0.0) > 1e-10:
        raise ValueError("reference point does not lie on the initial surface")

    if family.kind == "stationary_sphere":
        return pts.copy()
    if family.kind == "expanding_sphere":
        return pts * np.exp(0.5 * t)
    rho0 = np.hypot(pts[..., 0], pts[..., 1])
    if family.kind == "expanding_torus":
        scale = (rho0 + t) / rho0
        out = pts.copy()
        out[..., 0] = pts[..., 0] * scale
        out[..., 1] = pts[..., 1] * scale
        return out
    # shrinking torus: scale the minor circle about the core ring by (1 - t)
    big_r = family.major_radius
    shrink = 1.0 - t
    rho_new = big_r + (rho0 - big_r) * shrink
    scale = rho_new / rho0
    out = pts.copy()
    out[..., 0] = pts[..., 0] * scale
    out[..., 1] = pts[..., 1] * scale
    out[..., 2] = pts[..., 2] * shrink
    return out


def velocity(family: SurfaceFamily, x, t: float) -> np.ndarray:
    """Material velocity of the surface at a point ``x`` on ``Gamma(t)``."""
    family.check_time(t)
    pts = _as_points(x)
    if family.kind == "stationary_sphere":
        return np.zeros_like(pts)
    if family.kind == "expanding_sphere":
        return 0.5 * pts
    rho = np.hypot(pts[..., 0], pts[..., 1])
    out = np.empty_like(pts)
    if family.kind == "expanding_torus":
        out[..., 0] = pts[..., 0] / rho
        out[..., 1] = pts[..., 1] / rho
        out[..., 2] = 0.0
        return out
    big_r = family.major_radius
    rate = 1.0 / (1.0 - t)
    radial = (rho - big_r) * rate
    out[..., 0] = -radial * pts[..., 0] / rho
    out[..., 1] = -radial * pts[..., 1] / rho
    out[..., 2] = -pts[..., 2] * rate
    return out


def closest_point(family: SurfaceFamily, x, t: float) -> np.ndarray:
    """Project points near ``Gamma(t)`` onto the surface along its normal.

    Spheres project radially (any nonzero point is accepted). Tori project
    through the core ring; points farther than ``TORUS_PROJECTION_BOUND`` from
    the surface, or too close to the symmetry axis or core ring for the
    projection to be defined, are rejected.
    """
    family.check_time(t)
    pts = _as_points(x)
    if family.is_sphere:
        a = family.sphere_radius_at(t)
        norms = np.linalg.norm(pts, axis=-1)
        if np.min(norms, initial=np.inf) <= 0.0:
            raise ValueError("cannot project the origin onto a sphere")
        return pts * (a / norms)[..., None]

    big_r, small_r = family.torus_radii_at(t)
    rho = np.hypot(pts[..., 0], pts[..., 1])
    if np.min(rho, initial=np.inf) < 1e-12:
        raise ValueError("cannot project points on the symmetry axis")
    ring_dist = np.hypot(rho - big_r, pts[..., 2])
    signed = ring_dist - small_r
    if np.max(np.abs(signed), initial=0.0) > TORUS_PROJECTION_BOUND:
        raise ValueError(
            "point outside the accepted tubular neighbourhood "
            f"(|distance| > {TORUS_PROJECTION_BOUND})"
        )
    if np.min(ring_dist, initial=np.inf) < 1e-12:
        raise ValueError("cannot project points on the core ring")
    ratio = (big_r + (rho - big_r) * (small_r / ring_dist)) / rho
    out = np.empty_like(pts)
    out[..., 0] = pts[..., 0] * ratio
    out[..., 1] = pts[..., 1] * ratio
    out[..., 2] = pts[..., 2] * (small_r / ring_dist)
    return out


def unit_normal(family: SurfaceFamily, x, t: float) -> np.ndarray:
    """Outward unit normal of ``Gamma(t)`` (normalized level-set gradient)."""
    family.check_time(t)
    pts = _as_points(x)
    if family.is_sphere:
        norms = np.linalg.norm(pts, axis=-1)
        return pts / norms[..., None]
    big_r, _ = family.torus_radii_at(t)
    rho = np.hypot(pts[..., 0], pts[..., 1])
    grad = np.empty_like(pts)
    radial = rho - big_r
    grad[..., 0] = radial * pts[..., 0] / rho
    grad[..., 1] = radial * pts[..., 1] / rho
    grad[..., 2] = pts[..., 2]
    norms = np.linalg.norm(grad, axis=-1)
    return grad / norms[..., None]


def tangential_projection(family: SurfaceFamily, x, t: float, vectors) -> np.ndarray:
    """Remove the normal component of ambient ``vectors`` attached at ``x``."""
    nu = unit_normal(family, x, t)
    vec = np.asarray(vectors, dtype=float)
    return vec - np.sum(vec * nu, axis=-1, keepdims=True) * nu


def exact_area(family: SurfaceFamily, t: float) -> float:
    """Closed-form area of ``Gamma(t)``."""
    family.check_time(t)
    if family.is_sphere:
        a = family.sphere_radius_at(t)
        return float(4.0 * np.pi * a * a)
    big_r, small_r = family.torus_radii_at(t)
    return float(4.0 * np.pi**2 * big_r * small_r)


def surface_integral(family: SurfaceFamily, t: float, fn, n: int = 192) -> float:
    """Integrate ``fn(x, y, z)`` over the exact surface ``Gamma(t)``.

    Parametric product quadrature: Gauss-Legendre (polar) x trapezoid
    (azimuth) on spheres, trapezoid x trapezoid on tori. Both converge
    spectrally for smooth integrands, so the default resolution reaches
    round-off for the fields used in this package.
    """
    family.check_time(t)
    phi = 2.0 * np.pi * np.arange(n) / n  # periodic direction(s)
    if family.is_sphere:
        a = family.sphere_radius_at(t)
        mu, w_mu = np.polynomial.legendre.leggauss(n)  # mu = cos(polar angle)
        sin_pol = np.sqrt(1.0 - mu**2)
        x = a * np.outer(sin_pol, np.cos(phi))
        y = a * np.outer(sin_pol, np.sin(phi))
        z = a * np.outer(mu, np.ones(n))
        vals = np.asarray(fn(x, y, z), dtype=float)
        vals = np.broadcast_to(vals, x.shape)
        return float(a * a * (2.0 * np.pi / n) * np.dot(w_mu, vals.sum(axis=1)))
    big_r, small_r = family.torus_radii_at(t)
    theta = phi
    ring = big_r + small_r * np.cos(phi)  # distance from axis per minor angle
    x = np.outer(np.cos(theta), ring)
    y = np.outer(np.sin(theta), ring)
    z = np.broadcast_to(small_r * np.sin(phi), (n, n))
    vals = np.asarray(fn(x, y, z), dtype=float)
    vals = np.broadcast_to(vals, x.shape)
    jac = small_r * ring  # area element r (R + r cos(phi)) dtheta dphi
    return float((2.0 * np.pi / n) ** 2 * np.sum(vals * jac[None, :]))


def random_surface_points(
    family: SurfaceFamily, t: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample points of ``Gamma(t)`` (uniform in parameters, not in area)."""
    family.check_time(t)
    if family.is_sphere:
        a = family.sphere_radius_at(t)
        pts = rng.normal(size=(count, 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        return a * pts
    big_r, small_r = family.torus_radii_at(t)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=count)
    ring = big_r + small_r * np.cos(phi)
    return np.column_stack(
        (ring * np.cos(theta), ring * np.sin(theta), small_r * np.sin(phi))
    )
