"""Finite element matrices over a mesh snapshot.

Piecewise linear elements on triangles. Three matrices are produced per
snapshot: the lumped mass matrix (diagonal, entry i is one third of the area
incident to vertex i), the consistent mass matrix, and the stiffness matrix
built from in-plane basis gradients. All are returned as ``scipy.sparse``
CSR with full symmetric storage; entries (i, j) and (j, i) are assigned the
same float, so symmetry holds bitwise, not just within round-off.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import sparse

from . import meshing

# Degree-4 quadrature on the reference triangle: 6 points in barycentric
# coordinates, weights relative to unit total measure.
_QUAD_A = 0.445948490915965
_QUAD_B = 0.091576213509771
_QUAD_WA = 0.223381589678011
_QUAD_WB = 0.109951743655322

QUADRATURE_POINTS = np.array(
    [
        [1.0 - 2.0 * _QUAD_A, _QUAD_A, _QUAD_A],
        [_QUAD_A, 1.0 - 2.0 * _QUAD_A, _QUAD_A],
        [_QUAD_A, _QUAD_A, 1.0 - 2.0 * _QUAD_A],
        [1.0 - 2.0 * _QUAD_B, _QUAD_B, _QUAD_B],
        [_QUAD_B, 1.0 - 2.0 * _QUAD_B, _QUAD_B],
        [_QUAD_B, _QUAD_B, 1.0 - 2.0 * _QUAD_B],
    ]
)
QUADRATURE_WEIGHTS = np.array(
    [_QUAD_WA, _QUAD_WA, _QUAD_WA, _QUAD_WB, _QUAD_WB, _QUAD_WB]
)


@dataclasses.dataclass(frozen=True)
class FeFunction:
    """Nodal coefficient vector bound to the mesh snapshot at ``mesh_time``."""

    coefficients: np.ndarray
    mesh_time: float

    def __post_init__(self) -> None:
        self.coefficients.setflags(write=False)


def fe_function(mesh: meshing.SurfaceMesh, values) -> FeFunction:
    coeffs = np.ascontiguousarray(values, dtype=float)
    if coeffs.shape != (mesh.vertex_count,):
        raise ValueError(
            f"expected {mesh.vertex_count} nodal values, got shape {coeffs.shape}"
        )
    return FeFunction(coefficients=coeffs, mesh_time=mesh.time)


def areas_and_gradients(mesh: meshing.SurfaceMesh) -> tuple[np.ndarray, np.ndarray]:
    """Triangle areas and in-plane basis gradients, shapes (M,) and (M, 3, 3).

    Gradient of basis a is (n x e_a) / (2|K|) with e_a the edge opposite
    corner a, traversed in orientation order.
    """
    pts = meshing.triangle_corner_points(mesh)
    e0 = pts[:, 2] - pts[:, 1]
    e1 = pts[:, 0] - pts[:, 2]
    e2 = pts[:, 1] - pts[:, 0]
    normal = np.cross(e2, -e1)
    double_area = np.linalg.norm(normal, axis=1)
    unit_normal = normal / double_area[:, None]
    grads = np.stack(
        [np.cross(unit_normal, e) for e in (e0, e1, e2)], axis=1
    ) / double_area[:, None, None]
    return 0.5 * double_area, grads


def basis_gradients(mesh: meshing.SurfaceMesh) -> np.ndarray:
    return areas_and_gradients(mesh)[1]


def _assemble_symmetric(
    vertex_count: int, triangles: np.ndarray, kernels: np.ndarray
) -> sparse.csr_array:
    """Scatter bitwise-symmetric 3x3 element kernels into global CSR.

    Each vertex pair is accumulated once under its canonical (min, max) key
    in triangle order, then mirrored, so the result carries no duplicate
    entries and (i, j) and (j, i) hold the identical float.
    """
    local_a, local_b = np.triu_indices(3)
    gi = triangles[:, local_a].ravel()
    gj = triangles[:, local_b].ravel()
    vals = kernels[:, local_a, local_b].ravel()
    rows = np.minimum(gi, gj)
    cols = np.maximum(gi, gj)

    keys = rows * np.int64(vertex_count) + cols
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.bincount(inverse, weights=vals, minlength=uniq.size)
    upper_r = uniq // vertex_count
    upper_c = uniq % vertex_count

    strict = upper_r != upper_c
    data = np.concatenate([summed, summed[strict]])
    r = np.concatenate([upper_r, upper_c[strict]])
    c = np.concatenate([upper_c, upper_r[strict]])
    return sparse.csr_array(
        (data, (r, c)), shape=(vertex_count, vertex_count)
    )


def lumped_mass_diagonal(mesh: meshing.SurfaceMesh) -> np.ndarray:
    areas = meshing.triangle_areas(mesh)
    return np.bincount(
        mesh.triangles.ravel(),
        weights=np.repeat(areas / 3.0, 3),
        minlength=mesh.vertex_count,
    )


def lumped_mass(mesh: meshing.SurfaceMesh) -> sparse.csr_array:
    diag = lumped_mass_diagonal(mesh)
    idx = np.arange(mesh.vertex_count)
    return sparse.csr_array(
        (diag, (idx, idx)), shape=(mesh.vertex_count, mesh.vertex_count)
    )


def consistent_mass(mesh: meshing.SurfaceMesh) -> sparse.csr_array:
    areas = meshing.triangle_areas(mesh)
    kernel = np.full((3, 3), 1.0 / 12.0)
    kernel[np.diag_indices(3)] = 1.0 / 6.0
    kernels = areas[:, None, None] * kernel[None, :, :]
    return _assemble_symmetric(mesh.vertex_count, mesh.triangles, kernels)


def stiffness(mesh: meshing.SurfaceMesh) -> sparse.csr_array:
    areas, grads = areas_and_gradients(mesh)
    kernels = np.empty((mesh.triangle_count, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            val = areas * np.einsum("td,td->t", grads[:, a], grads[:, b])
            kernels[:, a, b] = val
            kernels[:, b, a] = val
    return _assemble_symmetric(mesh.vertex_count, mesh.triangles, kernels)
