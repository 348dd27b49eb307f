"""Tests for the per-step observables: energy, divergence sign, EOC."""

import numpy as np
import pytest

from surfch import assembly, diagnostics, geometry, meshing, operators, potential


@pytest.fixture(scope="module")
def sphere_mesh():
    return meshing.make_icosphere(2, geometry.stationary_sphere())


class TestGlEnergy:
    def test_zero_field_value(self, sphere_mesh):
        params = potential.PotentialParams(theta=0.4, epsilon=0.1)
        u = np.zeros(sphere_mesh.vertex_count)
        expected = meshing.mesh_area(sphere_mesh) / (2.0 * 0.1)
        assert diagnostics.gl_energy(sphere_mesh, u, params) == pytest.approx(
            expected, rel=1e-12
        )

    def test_saturated_field_value(self, sphere_mesh):
        params = potential.PotentialParams(theta=0.4, epsilon=0.1)
        u = np.ones(sphere_mesh.vertex_count)
        expected = meshing.mesh_area(sphere_mesh) * 0.4 * np.log(2.0) / 0.1
        assert diagnostics.gl_energy(sphere_mesh, u, params) == pytest.approx(
            expected, rel=1e-12
        )

    def test_sign_flip_invariance(self, sphere_mesh):
        params = potential.PotentialParams(theta=0.4, epsilon=0.1)
        rng = np.random.default_rng(7)
        u = rng.uniform(-0.99, 0.99, sphere_mesh.vertex_count)
        assert diagnostics.gl_energy(sphere_mesh, u, params) == diagnostics.gl_energy(
            sphere_mesh, -u, params
        )

    def test_domain_error_beyond_one(self, sphere_mesh):
        params = potential.PotentialParams(theta=0.4, epsilon=0.1)
        u = np.zeros(sphere_mesh.vertex_count)
        u[3] = 1.0 + 1e-12
        with pytest.raises(ValueError):
            diagnostics.gl_energy(sphere_mesh, u, params)

    def test_matrix_reuse_matches_assembly(self, sphere_mesh):
        params = potential.PotentialParams(theta=0.3, epsilon=0.2)
        rng = np.random.default_rng(11)
        u = rng.uniform(-0.9, 0.9, sphere_mesh.vertex_count)
        a = assembly.stiffness(sphere_mesh)
        d = assembly.lumped_mass_diagonal(sphere_mesh)
        assert diagnostics.gl_energy(
            sphere_mesh, u, params, stiffness=a, lumped_diag=d
        ) == diagnostics.gl_energy(sphere_mesh, u, params)


class TestDiscreteDivVelocity:
    def test_stationary_sphere_zero(self, sphere_mesh):
        div = diagnostics.discrete_div_velocity(sphere_mesh, sphere_mesh.family)
        assert div.shape == (sphere_mesh.triangle_count,)
        assert np.all(div == 0.0)

    def test_expanding_sphere_constant_one(self):
        family = geometry.expanding_sphere()
        mesh = meshing.make_icosphere(2, family)
        div = diagnostics.discrete_div_velocity(mesh, family)
        # V = x/2 is linear, so its interpolant is exact and the tangential
        # divergence is the trace of the in-plane projector over two.
        assert np.max(np.abs(div - 1.0)) < 1e-12

    def test_expanding_sphere_area_rate_identity(self):
        family = geometry.expanding_sphere()
        mesh = meshing.make_icosphere(3, family)
        div = diagnostics.discrete_div_velocity(mesh, family)
        areas = meshing.triangle_areas(mesh)
        assert float(np.dot(areas, div)) == pytest.approx(
            meshing.mesh_area(mesh), rel=1e-12
        )

    def test_expanding_torus_assumption_holds(self):
        family = geometry.expanding_torus()
        mesh = meshing.make_torus_mesh(30, 25, family)
        div = diagnostics.discrete_div_velocity(mesh, family)
        assert float(div.min()) > -1e-8
        assert float(div.max()) > 0.0

    def test_shrinking_torus_assumption_violated(self):
        family = geometry.shrinking_torus()
        mesh = meshing.make_torus_mesh(30, 25, family)
        div = diagnostics.discrete_div_velocity(mesh, family)
        assert float(div.min()) < 0.0

    def test_time_override_matches_mesh_time(self):
        family = geometry.expanding_torus()
        mesh = meshing.advect_mesh(
            meshing.make_torus_mesh(12, 9, family), family, 0.25
        )
        explicit = diagnostics.discrete_div_velocity(mesh, family, t=0.25)
        implicit = diagnostics.discrete_div_velocity(mesh, family)
        assert np.array_equal(explicit, implicit)


class TestEoc:
    def test_published_sphere_table_rows_1_2(self):
        orders = diagnostics.eoc(
            [4.052072, 2.016871], [6.437694e-1, 3.218847e-1]
        )
        assert orders[0] == pytest.approx(1.006541, abs=1e-5)

    def test_published_sphere_table_rows_3_4(self):
        orders = diagnostics.eoc(
            [9.449989e-1, 3.987348e-1], [1.609424e-1, 8.047118e-2]
        )
        assert orders[0] == pytest.approx(1.244883, abs=1e-5)

    def test_halving_gives_exactly_one(self):
        orders = diagnostics.eoc([0.5, 0.25, 0.125], [0.4, 0.2, 0.1])
        assert np.all(orders == 1.0)

    @pytest.mark.parametrize(
        "errors,hs",
        [
            ([1.0], [0.5]),
            ([1.0, 0.5], [0.5]),
            ([1.0, 0.5], [0.5, 0.5]),
            ([1.0, 0.5], [0.25, 0.5]),
            ([1.0, -0.5], [0.5, 0.25]),
            ([1.0, 0.0], [0.5, 0.25]),
            ([1.0, 0.5], [0.5, -0.25]),
        ],
    )
    def test_rejects_bad_input(self, errors, hs):
        with pytest.raises(ValueError):
            diagnostics.eoc(errors, hs)


class TestRecord:
    def test_fields_are_consistent(self):
        family = geometry.expanding_torus()
        mesh = meshing.make_torus_mesh(16, 12, family)
        params = potential.PotentialParams(theta=0.4, epsilon=0.1)
        u = operators.interpolate(
            mesh, lambda x, y, z: 0.9 * x * np.cos(0.5 * np.pi * y)
        ).coefficients
        record = diagnostics.make_record(
            mesh, family, u, params, step=5, time=0.0, newton_iters=3
        )
        d = assembly.lumped_mass_diagonal(mesh)
        assert record.step == 5 and record.newton_iters == 3
        assert record.mass == pytest.approx(float(np.dot(d, u)), abs=1e-15)
        assert record.max_abs_u == pytest.approx(np.max(np.abs(u)), abs=0)
        assert record.min_gap == pytest.approx(1.0 - np.max(np.abs(u)), abs=0)
        assert record.min_gap > 0.0
        assert record.energy == pytest.approx(
            diagnostics.gl_energy(mesh, u, params), rel=1e-15
        )
        assert record.mesh_is_acute == meshing.quality(mesh).is_acute
        assert record.min_div_v == pytest.approx(
            float(diagnostics.discrete_div_velocity(mesh, family).min()), abs=0
        )


class TestInteriorMinimum:
    def test_interior_dip_detected(self):
        energies = [3.0, 2.0, 1.0, 1.5, 2.5]
        assert diagnostics.interior_minimum_step(energies)

    def test_minimum_at_start_is_not_interior(self):
        energies = np.linspace(1.0, 2.0, 100)
        assert not diagnostics.interior_minimum_step(energies)

    def test_minimum_at_end_is_not_interior(self):
        energies = np.linspace(2.0, 1.0, 100)
        assert not diagnostics.interior_minimum_step(energies)
