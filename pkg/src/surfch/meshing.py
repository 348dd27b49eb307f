"""Triangulated surfaces: construction, advection, and quality measurement.

Meshes store their reference vertex positions (time 0) once; a mesh at a later
time is a derived view whose vertices are the exact flow-map images of the
reference vertices, so repeated advection never accumulates error.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import geometry

MAX_ICOSPHERE_LEVEL = 8

# Triangles thinner than this fraction of h^2 make the stiffness kernel
# overflow; treated as a hard validity floor.
DEGENERATE_AREA_FACTOR = 1e-14


@dataclasses.dataclass(frozen=True)
class SurfaceMesh:
    """Triangulated snapshot of an evolving surface.

    ``vertices`` are the positions at ``time``; ``reference_vertices`` are the
    same nodes at time 0. Connectivity is shared by all snapshots of the same
    mesh. Arrays are read-only.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    time: float
    family: geometry.SurfaceFamily
    reference_vertices: np.ndarray

    def __post_init__(self) -> None:
        for name in ("vertices", "triangles", "reference_vertices"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def family_tag(self) -> str:
        return self.family.kind

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]


@dataclasses.dataclass(frozen=True)
class MeshQuality:
    """Size and angle summary of a mesh snapshot.

    ``h`` is the largest triangle diameter (longest edge), ``rho_min`` the
    smallest inradius, and ``is_acute`` holds exactly when the largest angle
    does not exceed pi/2 (with 1e-12 slack for round-off).
    """

    h: float
    rho_min: float
    min_angle: float
    max_angle: float
    is_acute: bool


def _new_mesh(
    reference_vertices: np.ndarray,
    triangles: np.ndarray,
    family: geometry.SurfaceFamily,
) -> SurfaceMesh:
    ref = np.ascontiguousarray(reference_vertices, dtype=float)
    tri = np.ascontiguousarray(triangles, dtype=np.int64)
    return SurfaceMesh(
        vertices=ref.copy(), triangles=tri, time=0.0, family=family,
        reference_vertices=ref,
    )


_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1.0, _GOLDEN, 0.0], [1.0, _GOLDEN, 0.0],
        [-1.0, -_GOLDEN, 0.0], [1.0, -_GOLDEN, 0.0],
        [0.0, -1.0, _GOLDEN], [0.0, 1.0, _GOLDEN],
        [0.0, -1.0, -_GOLDEN], [0.0, 1.0, -_GOLDEN],
        [_GOLDEN, 0.0, -1.0], [_GOLDEN, 0.0, 1.0],
        [-_GOLDEN, 0.0, -1.0], [-_GOLDEN, 0.0, 1.0],
    ]
)

_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [5, 4, 9], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def _subdivide(points: list[np.ndarray], faces: np.ndarray) -> np.ndarray:
    """One 4-to-1 refinement; new unit-sphere midpoints append to ``points``."""
    cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = cache.get(key)
        if idx is None:
            p = points[a] + points[b]
            points.append(p / np.linalg.norm(p))
            idx = len(points) - 1
            cache[key] = idx
        return idx

    out = np.empty((4 * faces.shape[0], 3), dtype=np.int64)
    for k, (a, b, c) in enumerate(faces):
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out[4 * k + 0] = (a, ab, ca)
        out[4 * k + 1] = (b, bc, ab)
        out[4 * k + 2] = (c, ca, bc)
        out[4 * k + 3] = (ab, bc, ca)
    return out


def make_icosphere(level: int, family: geometry.SurfaceFamily) -> SurfaceMesh:
    """Subdivided icosahedron projected onto the family's initial sphere.

    Produces ``20 * 4**level`` triangles and ``10 * 4**level + 2`` vertices
    with consistent outward orientation.
    """
    if not family.is_sphere:
        raise ValueError("icosphere meshes require a sphere family")
    if level < 0 or level > MAX_ICOSPHERE_LEVEL:
        raise ValueError(f"icosphere level must be in [0, {MAX_ICOSPHERE_LEVEL}]")

    base = _ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES, axis=1)[:, None]
    points = list(base)
    faces = _ICOSAHEDRON_FACES
    for _ in range(level):
        faces = _subdivide(points, faces)

    verts = geometry.closest_point(family, np.array(points), 0.0)
    return _new_mesh(verts, faces, family)


def make_torus_mesh(
    n_theta: int, n_phi: int, family: geometry.SurfaceFamily
) -> SurfaceMesh:
    """Structured torus grid with alternating diagonals.

    ``n_theta`` counts major-circle subdivisions, ``n_phi`` minor-circle ones;
    the result has ``n_theta * n_phi`` vertices and ``2 * n_theta * n_phi``
    consistently outward-oriented triangles. Grids coarser than 8x8 degrade
    angle quality quickly; 3 is the hard floor.
    """
    if not family.is_torus:
        raise ValueError("torus grids require a torus family")
    if n_theta < 3 or n_phi < 3:
        raise ValueError("torus grid needs at least 3 subdivisions per direction")

    big_r, small_r = family.torus_radii_at(0.0)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    ring = big_r + small_r * np.cos(phi)
    verts = np.empty((n_theta * n_phi, 3))
    verts[:, 0] = (np.cos(theta)[:, None] * ring[None, :]).ravel()
    verts[:, 1] = (np.sin(theta)[:, None] * ring[None, :]).ravel()
    verts[:, 2] = np.broadcast_to(small_r * np.sin(phi), (n_theta, n_phi)).ravel()

    tris = np.empty((2 * n_theta * n_phi, 3), dtype=np.int64)
    k = 0
    for i in range(n_theta):
        ip = (i + 1) % n_theta
        for j in range(n_phi):
            jp = (j + 1) % n_phi
            v00 = i * n_phi + j
            v10 = ip * n_phi + j
            v01 = i * n_phi + jp
            v11 = ip * n_phi + jp
            # orientation: (theta, phi) order is right-handed wrt the outward
            # normal, so counterclockwise parameter loops face outward
            if (i + j) % 2 == 0:
                tris[k] = (v00, v10, v11)
                tris[k + 1] = (v00, v11, v01)
            else:
                tris[k] = (v00, v10, v01)
                tris[k + 1] = (v10, v11, v01)
            k += 2
    return _new_mesh(verts, tris, family)


def advect_mesh(
    mesh: SurfaceMesh, family: geometry.SurfaceFamily, t_new: float
) -> SurfaceMesh:
    """Move the mesh nodes along the family's flow map to time ``t_new``."""
    if family != mesh.family:
        raise ValueError("mesh was generated by a different surface family")
    moved = geometry.flow_map(family, mesh.reference_vertices, t_new)
    return SurfaceMesh(
        vertices=moved,
        triangles=mesh.triangles,
        time=t_new,
        family=mesh.family,
        reference_vertices=mesh.reference_vertices,
    )


def triangle_corner_points(mesh: SurfaceMesh) -> np.ndarray:
    """Corner coordinates per triangle, shape (M, 3 corners, 3 coords)."""
    return mesh.vertices[mesh.triangles]


def triangle_areas(mesh: SurfaceMesh) -> np.ndarray:
    pts = triangle_corner_points(mesh)
    cross = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def mesh_area(mesh: SurfaceMesh) -> float:
    return float(triangle_areas(mesh).sum())


def quality(mesh: SurfaceMesh) -> MeshQuality:
    """Measure h (max diameter), min inradius, and the angle range."""
    pts = triangle_corner_points(mesh)
    # edge i is opposite corner i
    e0 = np.linalg.norm(pts[:, 2] - pts[:, 1], axis=1)
    e1 = np.linalg.norm(pts[:, 0] - pts[:, 2], axis=1)
    e2 = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
    lengths = np.stack([e0, e1, e2], axis=1)

    areas = triangle_areas(mesh)
    perimeter = lengths.sum(axis=1)
    inradius = 2.0 * areas / perimeter

    angles = np.empty_like(lengths)
    for i in range(3):
        a = lengths[:, i]
        b = lengths[:, (i + 1) % 3]
        c = lengths[:, (i + 2) % 3]
        cosine = (b * b + c * c - a * a) / (2.0 * b * c)
        angles[:, i] = np.arccos(np.clip(cosine, -1.0, 1.0))

    max_angle = float(angles.max())
    return MeshQuality(
        h=float(lengths.max()),
        rho_min=float(inradius.min()),
        min_angle=float(angles.min()),
        max_angle=max_angle,
        is_acute=bool(max_angle <= np.pi / 2.0 + 1e-12),
    )


def undirected_edges(mesh: SurfaceMesh) -> tuple[np.ndarray, np.ndarray]:
    """Unique undirected edges and the number of triangles sharing each."""
    tri = mesh.triangles
    raw = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    raw = np.sort(raw, axis=1)
    edges, counts = np.unique(raw, axis=0, return_counts=True)
    return edges, counts


def euler_characteristic(mesh: SurfaceMesh) -> int:
    edges, _ = undirected_edges(mesh)
    return mesh.vertex_count - edges.shape[0] + mesh.triangle_count


def validate_mesh(mesh: SurfaceMesh) -> None:
    """Check the structural invariants; raise ValueError on the first failure.

    Validates closed-manifold connectivity (every edge in exactly two
    triangles, each direction used once), the Euler characteristic of the
    family's topology, the degenerate-area floor, and that vertices lie on the
    family's surface at the mesh time.
    """
    _, counts = undirected_edges(mesh)
    if not np.all(counts == 2):
        raise ValueError("mesh is not a closed 2-manifold (open or junk edges)")

    tri = mesh.triangles
    directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    _, dir_counts = np.unique(directed, axis=0, return_counts=True)
    if not np.all(dir_counts == 1):
        raise ValueError("mesh orientation is inconsistent")

    chi = euler_characteristic(mesh)
    expected = 2 if mesh.family.is_sphere else 0
    if chi != expected:
        raise ValueError(f"Euler characteristic {chi}, expected {expected}")

    pts = triangle_corner_points(mesh)
    edge_vectors = np.concatenate(
        [pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 1], pts[:, 0] - pts[:, 2]]
    )
    h = float(np.linalg.norm(edge_vectors, axis=1).max())
    if triangle_areas(mesh).min() <= DEGENERATE_AREA_FACTOR * h * h:
        raise ValueError("mesh contains a degenerate triangle")

    lv = geometry.level_set(mesh.family, mesh.vertices, mesh.time)
    if np.max(np.abs(lv)) > 1e-10:
        raise ValueError("mesh vertices do not lie on the tagged surface")
