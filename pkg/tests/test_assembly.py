"""Mass and stiffness assembly against hand-computed element oracles."""

import numpy as np
import pytest
from conftest import patch_mesh, unit_right_triangle

from surfch import assembly, geometry, meshing


def exact_symmetry_defect(matrix):
    gap = (matrix - matrix.T).tocoo()
    return 0.0 if gap.nnz == 0 else float(np.max(np.abs(gap.data)))


@pytest.fixture(scope="module")
def sphere_mesh():
    return meshing.make_icosphere(2, geometry.stationary_sphere())


class TestLumpedMass:
    def test_single_triangle_oracle(self):
        diag = assembly.lumped_mass_diagonal(unit_right_triangle())
        np.testing.assert_allclose(diag, [1.0 / 6.0] * 3, rtol=0, atol=1e-16)

    def test_trace_equals_area(self):
        mesh = meshing.make_icosphere(3, geometry.stationary_sphere())
        diag = assembly.lumped_mass_diagonal(mesh)
        assert diag.sum() == pytest.approx(meshing.mesh_area(mesh), rel=1e-12)

    def test_entries_positive(self):
        mesh = meshing.make_torus_mesh(10, 8, geometry.expanding_torus())
        assert assembly.lumped_mass_diagonal(mesh).min() > 0.0

    def test_matrix_is_diagonal(self, sphere_mesh):
        mat = assembly.lumped_mass(sphere_mesh).tocoo()
        assert np.all(mat.row == mat.col)


class TestConsistentMass:
    def test_single_triangle_oracle(self):
        mat = assembly.consistent_mass(unit_right_triangle()).toarray()
        expected = np.full((3, 3), 1.0 / 24.0)
        expected[np.diag_indices(3)] = 1.0 / 12.0
        np.testing.assert_allclose(mat, expected, rtol=0, atol=1e-16)

    def test_row_sums_match_lumped_diagonal(self, sphere_mesh):
        mat = assembly.consistent_mass(sphere_mesh)
        diag = assembly.lumped_mass_diagonal(sphere_mesh)
        np.testing.assert_allclose(
            mat @ np.ones(sphere_mesh.vertex_count), diag, rtol=1e-14
        )

    def test_positive_definite_dense_oracle(self, sphere_mesh):
        dense = assembly.consistent_mass(sphere_mesh).toarray()
        assert dense.shape == (162, 162)
        assert np.linalg.eigvalsh(dense).min() > 0.0

    def test_exact_symmetry(self, sphere_mesh):
        assert exact_symmetry_defect(assembly.consistent_mass(sphere_mesh)) == 0.0


class TestStiffness:
    def test_single_triangle_oracle(self):
        mat = assembly.stiffness(unit_right_triangle()).toarray()
        expected = np.array(
            [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]]
        )
        np.testing.assert_allclose(mat, expected, rtol=0, atol=1e-15)

    def test_annihilates_constants(self, sphere_mesh):
        mat = assembly.stiffness(sphere_mesh)
        out = mat @ np.full(sphere_mesh.vertex_count, 3.7)
        assert np.max(np.abs(out)) < 1e-12

    def test_row_sums_vanish(self):
        mesh = meshing.make_torus_mesh(12, 10, geometry.shrinking_torus())
        mat = assembly.stiffness(mesh)
        scale = np.abs(mat.diagonal()).max()
        assert np.max(np.abs(mat @ np.ones(mesh.vertex_count))) < 1e-12 * scale

    def test_psd_with_constant_kernel_dense_oracle(self, sphere_mesh):
        dense = assembly.stiffness(sphere_mesh).toarray()
        eigvals = np.linalg.eigvalsh(dense)
        assert abs(eigvals[0]) < 1e-12
        assert eigvals[1] > 1e-3

    def test_acute_mesh_offdiagonals_nonpositive(self, sphere_mesh):
        assert meshing.quality(sphere_mesh).is_acute
        mat = assembly.stiffness(sphere_mesh).tocoo()
        off = mat.data[mat.row != mat.col]
        assert off.max() <= 1e-14

    def test_exact_symmetry(self):
        mesh = meshing.make_torus_mesh(11, 9, geometry.expanding_torus())
        moved = meshing.advect_mesh(mesh, mesh.family, 0.37)
        assert exact_symmetry_defect(assembly.stiffness(moved)) == 0.0


class TestFeFunction:
    def test_binds_time_and_length(self, sphere_mesh):
        fn = assembly.fe_function(sphere_mesh, np.zeros(162))
        assert fn.mesh_time == sphere_mesh.time
        assert fn.coefficients.shape == (162,)

    def test_rejects_wrong_length(self, sphere_mesh):
        with pytest.raises(ValueError):
            assembly.fe_function(sphere_mesh, np.zeros(161))

    def test_coefficients_read_only(self, sphere_mesh):
        fn = assembly.fe_function(sphere_mesh, np.zeros(162))
        with pytest.raises(ValueError):
            fn.coefficients[0] = 1.0


def test_quadrature_rule_degree4_exact():
    # exactness on monomials b0^p b1^q: integral over the reference triangle
    # is p! q! / (p + q + 2)!
    from math import factorial

    pts, wts = assembly.QUADRATURE_POINTS, assembly.QUADRATURE_WEIGHTS
    assert wts.sum() == pytest.approx(1.0, abs=1e-15)
    for p in range(5):
        for q in range(5 - p):
            approx = np.sum(wts * pts[:, 0] ** p * pts[:, 1] ** q)
            exact = 2.0 * factorial(p) * factorial(q) / factorial(p + q + 2)
            assert approx == pytest.approx(exact, abs=1e-14)


@pytest.fixture(scope="module")
def test_meshes():
    return [
        meshing.make_icosphere(2, geometry.stationary_sphere()),
        meshing.make_icosphere(3, geometry.expanding_sphere()),
        meshing.make_torus_mesh(12, 10, geometry.expanding_torus()),
    ]


class TestNormAndQuadratureBounds:
    def test_consistent_norm_below_lumped_norm(self, test_meshes):
        rng = np.random.default_rng(42)
        for mesh in test_meshes:
            consistent = assembly.consistent_mass(mesh)
            lumped = assembly.lumped_mass_diagonal(mesh)
            for _ in range(200):
                z = rng.standard_normal(mesh.vertex_count)
                consistent_norm = np.sqrt(z @ (consistent @ z))
                lumped_norm = np.sqrt(np.sum(lumped * z * z))
                assert consistent_norm <= lumped_norm + 1e-12

    def test_mass_gap_bounded_by_h2_gradient_product(self):
        # |z (M_lumped - M) w| <= C h^2 |z|_A |w|_A with C <= 3/4 per element
        rng = np.random.default_rng(7)
        family = geometry.stationary_sphere()
        constants = []
        for level in (2, 3, 4):
            mesh = meshing.make_icosphere(level, family)
            gap = assembly.lumped_mass(mesh) - assembly.consistent_mass(mesh)
            stiff = assembly.stiffness(mesh)
            h = meshing.quality(mesh).h
            worst = 0.0
            for _ in range(50):
                z = rng.standard_normal(mesh.vertex_count)
                w = rng.standard_normal(mesh.vertex_count)
                numerator = abs(z @ (gap @ w))
                denominator = (
                    h * h * np.sqrt(z @ (stiff @ z)) * np.sqrt(w @ (stiff @ w))
                )
                worst = max(worst, numerator / denominator)
            constants.append(worst)
        assert all(c < 1.0 for c in constants)
        for coarse, fine in zip(constants, constants[1:]):
            assert fine < coarse * 1.2


class TestMonotoneMapInequalities:
    def test_acute_composition_energy_bound(self):
        # on acute meshes, for nondecreasing lam with slope <= 1:
        # energy of interpolated lam(phi) <= cross energy against phi
        rng = np.random.default_rng(11)
        for level in (2, 3):
            mesh = meshing.make_icosphere(level, geometry.stationary_sphere())
            assert meshing.quality(mesh).is_acute
            stiff = assembly.stiffness(mesh)
            for _ in range(50):
                phi = 3.0 * rng.standard_normal(mesh.vertex_count)
                mapped = np.tanh(phi)
                assert mapped @ (stiff @ mapped) <= phi @ (stiff @ mapped) + 1e-10

    def test_composition_interpolation_gap(self):
        # L2 gap between interpolated and composed tanh(phi) <= C h |grad|
        family = geometry.stationary_sphere()
        constants = []
        for level in (2, 3, 4):
            mesh = meshing.make_icosphere(level, family)
            stiff = assembly.stiffness(mesh)
            h = meshing.quality(mesh).h
            phi = 2.0 * mesh.vertices[:, 0] * np.cos(mesh.vertices[:, 1])
            mapped = np.tanh(phi)

            bary = assembly.QUADRATURE_POINTS
            weights = assembly.QUADRATURE_WEIGHTS
            areas = meshing.triangle_areas(mesh)
            phi_tri = phi[mesh.triangles]
            mapped_tri = mapped[mesh.triangles]
            interp_at_quad = mapped_tri @ bary.T
            composed_at_quad = np.tanh(phi_tri @ bary.T)
            sq = (interp_at_quad - composed_at_quad) ** 2
            l2_gap = np.sqrt(np.sum(areas[:, None] * sq * weights[None, :]))

            seminorm = np.sqrt(mapped @ (stiff @ mapped))
            constants.append(l2_gap / (h * seminorm))
        assert all(c < 1.0 for c in constants)
        for coarse, fine in zip(constants, constants[1:]):
            assert fine < coarse * 1.2
