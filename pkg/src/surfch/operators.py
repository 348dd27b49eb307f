"""Discrete operators on mesh snapshots.

Interpolation and Ritz projection carry smooth fields onto the mesh; the
inverse Laplacians and their negative-order norms measure mean-zero nodal
fields in the dual seminorm that drives the stability analysis; prolongation
transports coefficients from a coarse mesh to a fine one for error studies.

Scalar fields are callables ``g(x, y, z)`` accepting coordinate arrays and
broadcasting; gradients return an array of ambient 3-vectors.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from . import assembly, geometry, meshing
from .assembly import FeFunction

MEAN_ZERO_TOL = 1e-10
RESIDUAL_TOL = 1e-10


def interpolate(mesh: meshing.SurfaceMesh, g) -> FeFunction:
    """Nodal interpolant: coefficient i is ``g`` at vertex i."""
    x, y, z = mesh.vertices.T
    values = np.broadcast_to(
        np.asarray(g(x, y, z), dtype=float), (mesh.vertex_count,)
    ).copy()
    if not np.all(np.isfinite(values)):
        raise ValueError("field evaluated to a non-finite value at a vertex")
    return assembly.fe_function(mesh, values)


class MeanConstrainedSolver:
    """Stiffness solve with a lumped-mean constraint via a bordered system.

    Factorizes [[A, d], [d^T, 0]] once (d the lumped mass diagonal) and
    solves A c + mu d = b, d.c = target. When b has zero component sum the
    multiplier mu vanishes and c solves A c = b exactly among fields of the
    prescribed lumped mean.
    """

    def __init__(self, stiffness: sparse.csr_array, lumped_diag: np.ndarray):
        self.stiffness = stiffness
        self.lumped_diag = lumped_diag
        n = stiffness.shape[0]
        column = sparse.csr_array(lumped_diag[:, None])
        bordered = sparse.block_array(
            [[stiffness, column], [column.T, None]], format="csc"
        )
        self._lu = splu(bordered)
        self._n = n

    def solve(self, rhs: np.ndarray, mean_target: float = 0.0) -> np.ndarray:
        full = np.concatenate([rhs, [mean_target]])
        solution = self._lu.solve(full)
        coeffs = solution[: self._n]
        multiplier = solution[-1]
        residual = self.stiffness @ coeffs + multiplier * self.lumped_diag - rhs
        scale = max(float(np.linalg.norm(rhs)), 1.0)
        if np.linalg.norm(residual) > RESIDUAL_TOL * scale:
            raise ArithmeticError(
                "constrained stiffness solve did not reach the residual tolerance"
            )
        return coeffs


class NegNormWorkspace:
    """Matrices and factorization bound to one mesh snapshot.

    Holds the stiffness matrix, both mass matrices, and the LU of the
    mean-constrained system; valid only for fields living on the snapshot it
    was built from (checked through FeFunction.mesh_time).
    """

    def __init__(self, mesh: meshing.SurfaceMesh):
        self.mesh = mesh
        self.stiffness = assembly.stiffness(mesh)
        self.lumped_diag = assembly.lumped_mass_diagonal(mesh)
        self.consistent_mass = assembly.consistent_mass(mesh)
        self.solver = MeanConstrainedSolver(self.stiffness, self.lumped_diag)

    def coefficients_of(self, z) -> np.ndarray:
        if isinstance(z, FeFunction):
            if z.mesh_time != self.mesh.time:
                raise ValueError(
                    "field is bound to a different mesh snapshot "
                    f"(time {z.mesh_time} vs {self.mesh.time})"
                )
            return z.coefficients
        arr = np.asarray(z, dtype=float)
        if arr.shape != (self.mesh.vertex_count,):
            raise ValueError("coefficient vector does not match the mesh")
        return arr

    def require_mean_zero(self, coeffs: np.ndarray) -> None:
        mean = float(np.dot(self.lumped_diag, coeffs))
        norm = np.sqrt(np.sum(self.lumped_diag * coeffs * coeffs))
        if abs(mean) > MEAN_ZERO_TOL * max(1.0, norm):
            raise ValueError(f"field must have zero lumped mean, got {mean:.3e}")


def inv_laplacian_lumped(ws: NegNormWorkspace, z) -> FeFunction:
    """Solve A c = M_lumped z with zero lumped mean; z must be mean-zero."""
    coeffs = ws.coefficients_of(z)
    ws.require_mean_zero(coeffs)
    solution = ws.solver.solve(ws.lumped_diag * coeffs)
    return assembly.fe_function(ws.mesh, solution)


def inv_laplacian_consistent(ws: NegNormWorkspace, z) -> FeFunction:
    """Solve A c = M z with zero lumped mean; z must be mean-zero."""
    coeffs = ws.coefficients_of(z)
    ws.require_mean_zero(coeffs)
    solution = ws.solver.solve(ws.consistent_mass @ coeffs)
    return assembly.fe_function(ws.mesh, solution)


def neg_norm_lumped(ws: NegNormWorkspace, z) -> float:
    inverse = inv_laplacian_lumped(ws, z).coefficients
    return float(np.sqrt(inverse @ (ws.stiffness @ inverse)))


def neg_norm_consistent(ws: NegNormWorkspace, z) -> float:
    inverse = inv_laplacian_consistent(ws, z).coefficients
    return float(np.sqrt(inverse @ (ws.stiffness @ inverse)))


def _lifted_quadrature(mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily):
    """Quadrature nodes on the mesh and their closest points on the surface."""
    corners = meshing.triangle_corner_points(mesh)
    flat = np.einsum("qa,tad->tqd", assembly.QUADRATURE_POINTS, corners)
    lifted = geometry.closest_point(
        family, flat.reshape(-1, 3), mesh.time
    ).reshape(flat.shape)
    return flat, lifted


def ritz_projection(
    mesh: meshing.SurfaceMesh,
    family: geometry.SurfaceFamily,
    field,
    gradient,
) -> FeFunction:
    """Energy projection of a smooth field, matching its exact surface mean.

    Solves A c = b with b from the field's tangential gradient at lifted
    quadrature points, constrained so the consistent-mass integral of the
    result equals the integral of ``field`` over the exact surface.
    """
    t = mesh.time
    _, lifted = _lifted_quadrature(mesh, family)
    flat_lifted = lifted.reshape(-1, 3)
    ambient = np.asarray(
        gradient(flat_lifted[:, 0], flat_lifted[:, 1], flat_lifted[:, 2]),
        dtype=float,
    )
    normals = geometry.unit_normal(family, flat_lifted, t)
    tangential = ambient - normals * np.einsum("kd,kd->k", ambient, normals)[:, None]
    tangential = tangential.reshape(lifted.shape)

    areas, grads = assembly.areas_and_gradients(mesh)
    contributions = areas[:, None] * np.einsum(
        "q,tqd,tad->ta", assembly.QUADRATURE_WEIGHTS, tangential, grads
    )
    rhs = np.zeros(mesh.vertex_count)
    np.add.at(rhs, mesh.triangles, contributions)

    target = geometry.surface_integral(family, t, field)
    solver = MeanConstrainedSolver(
        assembly.stiffness(mesh), assembly.lumped_mass_diagonal(mesh)
    )
    return assembly.fe_function(mesh, solver.solve(rhs, mean_target=target))


def h1_seminorm(mesh: meshing.SurfaceMesh, values, stiffness=None) -> float:
    matrix = assembly.stiffness(mesh) if stiffness is None else stiffness
    arr = np.asarray(values, dtype=float)
    return float(np.sqrt(max(arr @ (matrix @ arr), 0.0)))


def l2_norm(mesh: meshing.SurfaceMesh, values, mass=None) -> float:
    matrix = assembly.consistent_mass(mesh) if mass is None else mass
    arr = np.asarray(values, dtype=float)
    return float(np.sqrt(max(arr @ (matrix @ arr), 0.0)))


def lumped_norm(mesh: meshing.SurfaceMesh, values, diag=None) -> float:
    d = assembly.lumped_mass_diagonal(mesh) if diag is None else diag
    arr = np.asarray(values, dtype=float)
    return float(np.sqrt(np.sum(d * arr * arr)))


def l2_error_vs_field(
    mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily, values, field
) -> float:
    """L2 distance between a nodal field and a smooth field at lifted points."""
    _, lifted = _lifted_quadrature(mesh, family)
    flat = lifted.reshape(-1, 3)
    exact = np.asarray(field(flat[:, 0], flat[:, 1], flat[:, 2]), dtype=float)
    exact = np.broadcast_to(exact, (flat.shape[0],)).reshape(lifted.shape[:2])
    arr = np.asarray(values, dtype=float)
    discrete = arr[mesh.triangles] @ assembly.QUADRATURE_POINTS.T
    areas = meshing.triangle_areas(mesh)
    squared = np.sum(
        areas[:, None] * assembly.QUADRATURE_WEIGHTS[None, :]
        * (discrete - exact) ** 2
    )
    return float(np.sqrt(squared))


def h1_error_vs_gradient(
    mesh: meshing.SurfaceMesh, family: geometry.SurfaceFamily, values, gradient
) -> float:
    """Tangential-gradient L2 distance against a smooth field's gradient."""
    _, lifted = _lifted_quadrature(mesh, family)
    flat = lifted.reshape(-1, 3)
    ambient = np.asarray(gradient(flat[:, 0], flat[:, 1], flat[:, 2]), dtype=float)
    normals = geometry.unit_normal(family, flat, mesh.time)
    tangential = ambient - normals * np.einsum("kd,kd->k", ambient, normals)[:, None]
    tangential = tangential.reshape(lifted.shape)

    areas, grads = assembly.areas_and_gradients(mesh)
    arr = np.asarray(values, dtype=float)
    discrete = np.einsum("ta,tad->td", arr[mesh.triangles], grads)
    diff = tangential - discrete[:, None, :]
    squared = np.einsum(
        "t,q,tqd,tqd->", areas, assembly.QUADRATURE_WEIGHTS, diff, diff
    )
    return float(np.sqrt(squared))


class _TriangleGrid:
    """Uniform spatial hash of triangles by bounding box, for point queries."""

    def __init__(self, mesh: meshing.SurfaceMesh, cell: float):
        self.cell = cell
        self.cells: dict[tuple[int, int, int], list[int]] = {}
        corners = meshing.triangle_corner_points(mesh)
        lo = np.floor(corners.min(axis=1) / cell).astype(np.int64)
        hi = np.floor(corners.max(axis=1) / cell).astype(np.int64)
        for t in range(corners.shape[0]):
            for i in range(lo[t, 0], hi[t, 0] + 1):
                for j in range(lo[t, 1], hi[t, 1] + 1):
                    for k in range(lo[t, 2], hi[t, 2] + 1):
                        self.cells.setdefault((i, j, k), []).append(t)

    def candidates(self, point: np.ndarray) -> np.ndarray:
        base = np.floor(point / self.cell).astype(np.int64)
        found: set[int] = set()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for dk in (-1, 0, 1):
                    key = (base[0] + di, base[1] + dj, base[2] + dk)
                    found.update(self.cells.get(key, ()))
        return np.fromiter(sorted(found), dtype=np.int64, count=len(found))


def _closest_point_barycentric(point, a, b, c):
    """Closest points on triangles (a, b, c) to ``point``; squared distances
    and barycentric coordinates, vectorized over the triangle axis."""
    ab = b - a
    ac = c - a
    ap = point - a
    d1 = np.einsum("td,td->t", ab, ap)
    d2 = np.einsum("td,td->t", ac, ap)
    bp = point - b
    d3 = np.einsum("td,td->t", ab, bp)
    d4 = np.einsum("td,td->t", ac, bp)
    cp = point - c
    d5 = np.einsum("td,td->t", ab, cp)
    d6 = np.einsum("td,td->t", ac, cp)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    n = a.shape[0]
    bary = np.zeros((n, 3))
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = d1 / (d1 - d3)
        w_ac = d2 / (d2 - d6)
        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom

    corner_a = (d1 <= 0.0) & (d2 <= 0.0)
    corner_b = (d3 >= 0.0) & (d4 <= d3)
    corner_c = (d6 >= 0.0) & (d5 <= d6)
    edge_ab = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    edge_ac = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    edge_bc = (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)

    conditions = [corner_a, corner_b, corner_c, edge_ab, edge_ac, edge_bc]
    b0 = np.select(conditions, [1.0, 0.0, 0.0, 1.0 - v_ab, 1.0 - w_ac, 0.0],
                   default=1.0 - v_in - w_in)
    b1 = np.select(conditions, [0.0, 1.0, 0.0, v_ab, 0.0, 1.0 - w_bc],
                   default=v_in)
    b2 = np.select(conditions, [0.0, 0.0, 1.0, 0.0, w_ac, w_bc],
                   default=w_in)
    bary[:, 0], bary[:, 1], bary[:, 2] = b0, b1, b2

    closest = bary[:, :1] * a + bary[:, 1:2] * b + bary[:, 2:3] * c
    gap = closest - point
    return np.einsum("td,td->t", gap, gap), bary


def prolong(
    coarse: meshing.SurfaceMesh, coarse_values, fine: meshing.SurfaceMesh
) -> FeFunction:
    """Evaluate a coarse nodal field at fine vertices by triangle matching.

    Each fine vertex takes the barycentric-linear value at its closest point
    among nearby coarse triangles (ties resolved toward the smallest triangle
    index). Vertices farther than half the coarse mesh size from every coarse
    triangle are a matching error.
    """
    if coarse.family != fine.family:
        raise ValueError("meshes belong to different surface families")
    if coarse.time != fine.time:
        raise ValueError("meshes are snapshots at different times")
    values = np.asarray(coarse_values, dtype=float)
    if values.shape != (coarse.vertex_count,):
        raise ValueError("coefficient vector does not match the coarse mesh")

    h_coarse = meshing.quality(coarse).h
    tolerance_sq = (0.5 * h_coarse) ** 2
    grid = _TriangleGrid(coarse, cell=h_coarse)
    corners = meshing.triangle_corner_points(coarse)

    out = np.empty(fine.vertex_count)
    for i, point in enumerate(fine.vertices):
        cand = grid.candidates(point)
        if cand.size == 0:
            raise ValueError(f"fine vertex {i} has no nearby coarse triangle")
        dist_sq, bary = _closest_point_barycentric(
            point, corners[cand, 0], corners[cand, 1], corners[cand, 2]
        )
        best = int(np.argmin(dist_sq))
        if dist_sq[best] > tolerance_sq:
            raise ValueError(
                f"fine vertex {i} is {np.sqrt(dist_sq[best]):.3e} away from the "
                "closest coarse triangle, beyond half the coarse mesh size"
            )
        out[i] = bary[best] @ values[coarse.triangles[cand[best]]]
    return assembly.fe_function(fine, out)
