"""Per-step scalar observables of a simulation trajectory.

The energy reported is the discrete Ginzburg-Landau functional: the stiffness
quadratic form for the gradient part plus the vertex-quadrature (lumped)
integral of the potential. Velocity divergence is the elementwise tangential
divergence of the nodal-interpolated velocity; its sign is the analytically
relevant growth/shrink indicator, so the minimum over elements is recorded.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import assembly, geometry, meshing, potential


@dataclasses.dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    time: float
    mass: float
    energy: float
    max_abs_u: float
    min_gap: float
    newton_iters: int
    mesh_is_acute: bool
    min_div_v: float


def gl_energy(
    mesh: meshing.SurfaceMesh,
    values,
    params: potential.PotentialParams,
    stiffness=None,
    lumped_diag=None,
) -> float:
    """(eps/2) u'Au + (1/eps) sum_i Mbar_ii F(u_i); requires |u_i| <= 1."""
    u = np.asarray(values, dtype=float)
    if np.max(np.abs(u)) > 1.0:
        raise ValueError("energy is defined only for |u_i| <= 1")
    a = assembly.stiffness(mesh) if stiffness is None else stiffness
    d = assembly.lumped_mass_diagonal(mesh) if lumped_diag is None else lumped_diag
    eps = params.epsilon
    gradient_part = 0.5 * eps * float(u @ (a @ u))
    potential_part = float(np.dot(d, potential.F_total(u, params))) / eps
    return gradient_part + potential_part


def discrete_div_velocity(
    mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily, t: float | None = None
) -> np.ndarray:
    """Tangential divergence of the interpolated velocity, one value per
    triangle (piecewise constant for linear elements).

    The velocity is sampled at the mesh's own time unless t overrides it.
    """
    time = mesh.time if t is None else float(t)
    v = geometry.velocity(family, mesh.vertices, time)
    _, grads = assembly.areas_and_gradients(mesh)
    return np.einsum("tad,tad->t", grads, v[mesh.triangles])


def lumped_mass_integral(mesh: meshing.SurfaceMesh, values, lumped_diag=None) -> float:
    d = assembly.lumped_mass_diagonal(mesh) if lumped_diag is None else lumped_diag
    return float(np.dot(d, np.asarray(values, dtype=float)))


def make_record(
    mesh: meshing.SurfaceMesh,
    family: geometry.SurfaceFamily,
    values,
    params: potential.PotentialParams,
    step: int,
    time: float,
    newton_iters: int,
    stiffness=None,
    lumped_diag=None,
) -> DiagnosticsRecord:
    u = np.asarray(values, dtype=float)
    max_abs = float(np.max(np.abs(u)))
    return DiagnosticsRecord(
        step=step,
        time=time,
        mass=lumped_mass_integral(mesh, u, lumped_diag),
        energy=gl_energy(mesh, u, params, stiffness, lumped_diag),
        max_abs_u=max_abs,
        min_gap=1.0 - max_abs,
        newton_iters=newton_iters,
        mesh_is_acute=meshing.quality(mesh).is_acute,
        min_div_v=float(discrete_div_velocity(mesh, family).min()),
    )


def eoc(errors, hs) -> np.ndarray:
    """Orders log(e_k/e_{k+1}) / log(h_k/h_{k+1}) for a refinement sequence."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if e.shape != h.shape or e.ndim != 1 or e.size < 2:
        raise ValueError("need matching error/h sequences of length >= 2")
    if np.any(e <= 0.0) or np.any(h <= 0.0):
        raise ValueError("errors and mesh sizes must be positive")
    if np.any(np.diff(h) >= 0.0):
        raise ValueError("mesh sizes must be strictly decreasing")
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


def interior_minimum_step(energies) -> bool:
    """Whether the trace minimum falls strictly inside [5%, 95%] of the steps."""
    e = np.asarray(energies, dtype=float)
    idx = int(np.argmin(e))
    lo = 0.05 * (e.size - 1)
    hi = 0.95 * (e.size - 1)
    return lo <= idx <= hi
