"""Simplex solver unit tests and oracle cross-checks against closed forms."""

import numpy as np
import pytest

import doeblin as db
from doeblin import InfeasibilityError, ValidationError, lp

from helpers import random_pmf, table_diag_mass, table_union_mass

TRIO = [[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]]
SYM08 = [[0.2, 0.4, 0.4], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]]


class TestSimplex:
    def test_known_min(self):
        # min x + y  s.t.  x + 2y = 4  ->  (0, 2)
        prob = lp.LpProblem(np.array([1.0, 1.0]), np.array([[1.0, 2.0]]), np.array([4.0]), "min")
        sol = lp.solve(prob)
        assert sol.value == pytest.approx(2.0, abs=1e-12)
        assert np.allclose(sol.x, [0.0, 2.0])

    def test_known_max(self):
        prob = lp.LpProblem(np.array([1.0, 1.0]), np.array([[1.0, 2.0]]), np.array([4.0]), "max")
        sol = lp.solve(prob)
        assert sol.value == pytest.approx(4.0, abs=1e-12)
        assert np.allclose(sol.x, [4.0, 0.0])

    def test_negative_rhs_handled(self):
        # -x - 2y = -4 is the same feasible set as above.
        prob = lp.LpProblem(np.array([1.0, 1.0]), np.array([[-1.0, -2.0]]), np.array([-4.0]), "min")
        assert lp.solve(prob).value == pytest.approx(2.0, abs=1e-12)

    def test_infeasible(self):
        prob = lp.LpProblem(np.array([1.0]), np.array([[-1.0]]), np.array([1.0]), "min")
        with pytest.raises(InfeasibilityError):
            lp.solve(prob)

    def test_unbounded(self):
        # max x + y with only x - y = 0.
        prob = lp.LpProblem(np.array([1.0, 1.0]), np.array([[1.0, -1.0]]), np.array([0.0]), "max")
        with pytest.raises(InfeasibilityError):
            lp.solve(prob)

    def test_redundant_constraint(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        prob = lp.LpProblem(np.array([1.0, 1.0]), A, np.array([4.0, 8.0]), "min")
        assert lp.solve(prob).value == pytest.approx(2.0, abs=1e-12)

    def test_duality_and_duals(self):
        prob = lp.LpProblem(np.array([1.0, 1.0]), np.array([[1.0, 2.0]]), np.array([4.0]), "min")
        sol = lp.solve(prob)
        assert sol.duality_gap <= 1e-10
        # dual: max 4y with y <= 1, 2y <= 1 -> y = 1/2.
        assert sol.duals[0] == pytest.approx(0.5, abs=1e-12)

    def test_exact_mode_matches_float(self):
        res_f = lp.coupling_union_opt(SYM08, "min")
        res_x = lp.coupling_union_opt(SYM08, "min", exact=True)
        assert res_x.value == pytest.approx(res_f.value, abs=1e-12)
        assert res_x.duality_gap == 0.0


class TestCouplingOracle:
    def test_diag_two_rows_is_one_minus_tv(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            p, q = random_pmf(rng, 4), random_pmf(rng, 4)
            res = lp.coupling_diag_opt([p, q], "max")
            assert res.value == pytest.approx(1 - db.tv_distance(p, q), abs=1e-9)

    def test_diag_trio(self):
        res = lp.coupling_diag_opt(TRIO, "max")
        assert res.value == pytest.approx(0.6, abs=1e-9)

    def test_diag_identical(self):
        p = [0.2, 0.3, 0.5]
        res = lp.coupling_diag_opt([p, p, p], "max")
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_union_two_rows_is_one_plus_tv(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            p, q = random_pmf(rng, 3), random_pmf(rng, 3)
            res = lp.coupling_union_opt([p, q], "min")
            assert res.value == pytest.approx(1 + db.tv_distance(p, q), abs=1e-9)

    def test_union_supercritical_trio(self):
        res = lp.coupling_union_opt(SYM08, "min")
        assert res.value == pytest.approx(1.4, abs=1e-9)

    def test_union_identical(self):
        p = [0.2, 0.3, 0.5]
        res = lp.coupling_union_opt([p, p, p], "min")
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_witness_feasible(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n, m = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            pmfs = [random_pmf(rng, m) for _ in range(n)]
            res = lp.coupling_diag_opt(pmfs, "max")
            assert res.max_marginal_residual < 1e-9
            assert res.min_mass >= -1e-12
            assert res.duality_gap <= 1e-8
            assert res.solution.dual_feasibility_margin >= -1e-8

    def test_witness_objective_consistent(self):
        res = lp.coupling_diag_opt(TRIO, "max")
        assert table_diag_mass(res.witness) == pytest.approx(res.value, abs=1e-9)
        res = lp.coupling_union_opt(TRIO, "min")
        assert table_union_mass(res.witness) == pytest.approx(res.value, abs=1e-9)

    def test_size_cap(self):
        pmfs = [np.full(10, 0.1)] * 6  # 10^6 variables
        with pytest.raises(ValidationError):
            lp.coupling_diag_opt(pmfs, "max")

    def test_single_marginal_rejected(self):
        with pytest.raises(ValidationError):
            lp.coupling_diag_opt([[0.5, 0.5]], "max")


class TestEstimatorOracle:
    def test_worked(self):
        W1 = [[0.5, 0.5], [0.25, 0.75]]
        value, kernel = lp.estimator_opt(W1, "min")
        assert value == pytest.approx(0.375, abs=1e-12)
        assert kernel.matrix.shape == (2, 2)
        value, _ = lp.estimator_opt(W1, "max")
        assert value == pytest.approx(0.625, abs=1e-12)

    def test_equal_rows(self):
        W = [[0.3, 0.7]] * 4
        lo, _ = lp.estimator_opt(W, "min")
        hi, _ = lp.estimator_opt(W, "max")
        assert lo == pytest.approx(0.25, abs=1e-12)
        assert hi == pytest.approx(0.25, abs=1e-12)

    def test_matches_trace_over_random(self):
        rng = np.random.default_rng(24)
        for _ in range(20):
            W = np.stack([random_pmf(rng, 3) for _ in range(3)])
            lo, _ = lp.estimator_opt(W, "min")
            hi, _ = lp.estimator_opt(W, "max")
            assert lo == pytest.approx(db.doeblin(W) / 3, abs=1e-12)
            assert hi == pytest.approx(db.max_doeblin(W) / 3, abs=1e-12)
