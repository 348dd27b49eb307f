"""Shared helpers for building small test meshes."""

import numpy as np

from surfch import geometry, meshing


def patch_mesh(vertices, triangles):
    """Bare mesh wrapper for elementwise oracles; skips structural validation."""
    verts = np.asarray(vertices, dtype=float)
    return meshing.SurfaceMesh(
        vertices=verts,
        triangles=np.asarray(triangles, dtype=np.int64),
        time=0.0,
        family=geometry.stationary_sphere(),
        reference_vertices=verts.copy(),
    )


def unit_right_triangle():
    return patch_mesh(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [[0, 1, 2]]
    )
