import pytest

from surfch import verify


@pytest.fixture(scope="module")
def all_results():
    return verify.run_suites(seed=0)


class TestDispatch:
    def test_empty_selection_runs_every_suite(self, all_results):
        assert {r.suite for r in all_results} == set(verify.SUITES)

    def test_named_selection_runs_only_that_suite(self):
        results = verify.run_suites(("potential",), seed=0)
        assert results and all(r.suite == "potential" for r in results)

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError, match="unknown suite"):
            verify.run_suite("nope")

    def test_selection_order_preserved(self):
        results = verify.run_suites(("solver", "geometry"), seed=0)
        suites = [r.suite for r in results]
        assert suites.index("solver") < suites.index("geometry")


class TestResults:
    def test_no_failures(self, all_results):
        failed = verify.failures(all_results)
        assert failed == [], [r.line() for r in failed]

    def test_statuses_are_known(self, all_results):
        assert {r.status for r in all_results} <= {verify.PASS, verify.FAIL, verify.INFO}

    def test_line_format(self, all_results):
        r = all_results[0]
        assert r.line() == f"{r.suite}.{r.check} {r.status} {r.measured}"

    def test_expected_checks_present(self, all_results):
        ids = {r.check_id for r in all_results}
        required = {
            "assembly.intmbound0",
            "assembly.intmbound2",
            "assembly.stiffness_acute_signs",
            "assembly.acuteineq",
            "assembly.enthalpybound",
            "potential.c1_knot_continuity",
            "operators.inverse_laplacian_round_trip",
            "solver.jacobian_matches_finite_difference",
        }
        for delta in verify.SLOPE_BOUND_DELTAS:
            for name in ("phidbound1", "phidbound2", "phidbound3"):
                required.add(f"potential.{name}(delta={delta:g})")
        assert required <= ids

    def test_informational_lines_do_not_fail(self, all_results):
        infos = [r for r in all_results if r.status == verify.INFO]
        assert infos
        assert not verify.failures(infos)

    def test_failure_region_reports_literal_slope_break(self, all_results):
        (region,) = [r for r in all_results if r.check == "failure_region"]
        # pairs inside one linear branch always exceed the bare 1/delta slope
        assert "fails" in region.measured

    def test_deterministic_for_fixed_seed(self):
        one = verify.run_suite("potential", seed=3)
        two = verify.run_suite("potential", seed=3)
        assert [r.line() for r in one] == [r.line() for r in two]
