import numpy as np
import pytest

import mmbm
from mmbm.errors import ConvergenceError, ValidationError

from conftest import random_model


class TestStationaryRowVector:
    def test_single_state_generator(self):
        assert mmbm.stationary_row_vector([[0.0]]) == pytest.approx([1.0])

    def test_symmetric_two_state(self):
        v = mmbm.stationary_row_vector([[-1.0, 1.0], [1.0, -1.0]])
        assert v == pytest.approx([0.5, 0.5])

    def test_hand_solved_two_state(self):
        # v @ G = 0 with G = [[-2,2],[1,-1]] gives v2 = 2 v1
        v = mmbm.stationary_row_vector([[-2.0, 2.0], [1.0, -1.0]])
        assert v == pytest.approx([1.0 / 3.0, 2.0 / 3.0], abs=1e-14)

    def test_stochastic_kind(self):
        b = np.array([[0.0, 1.0], [1.0, 0.0]])
        v = mmbm.stationary_row_vector(b, kind="stochastic")
        assert v == pytest.approx([0.5, 0.5])

    def test_defining_system_residual_and_positivity(self):
        rng = np.random.default_rng(7)
        for m in (2, 3, 5, 8):
            q = rng.uniform(0.0, 1.0, size=(m, m))
            np.fill_diagonal(q, 0.0)
            np.fill_diagonal(q, -q.sum(axis=1))
            v = mmbm.stationary_row_vector(q)
            assert np.max(np.abs(v @ q)) <= 1e-12
            assert v.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(v > 0.0)

    def test_reducible_rejected(self):
        q = [[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]]
        with pytest.raises(ValidationError) as exc:
            mmbm.stationary_row_vector(q)
        assert exc.value.check == "irreducible"

    def test_bad_row_sums_rejected(self):
        with pytest.raises(ValidationError) as exc:
            mmbm.stationary_row_vector([[-1.0, 0.5], [1.0, -1.0]])
        assert exc.value.check == "generator-row-sums"

    def test_negative_off_diagonal_rejected(self):
        with pytest.raises(ValidationError):
            mmbm.stationary_row_vector([[1.0, -1.0], [1.0, -1.0]])


class TestMatrixExponential:
    def test_zero_time_is_identity(self):
        m = np.array([[3.0, -2.0], [5.0, 7.0]])
        assert np.array_equal(mmbm.matrix_exponential(m, 0.0), np.eye(2))

    def test_scalar(self):
        out = mmbm.matrix_exponential([[-2.0]], 1.0)
        assert out[0, 0] == pytest.approx(0.1353352832366127, rel=1e-13)

    def test_diagonal(self):
        out = mmbm.matrix_exponential(np.diag([-1.0, -3.0]), 2.0)
        want = np.diag([np.exp(-2.0), np.exp(-6.0)])
        assert np.allclose(out, want, rtol=1e-13, atol=0)

    def test_semigroup_property(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = rng.normal(size=(4, 4))
            m = m - (np.max(np.linalg.eigvals(m).real) + 0.5) * np.eye(4)
            s, t = rng.uniform(0.0, 5.0, size=2)
            lhs = mmbm.matrix_exponential(m, s + t)
            rhs = mmbm.matrix_exponential(m, s) @ mmbm.matrix_exponential(m, t)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            mmbm.matrix_exponential([[np.nan]], 1.0)
        with pytest.raises(ValidationError):
            mmbm.matrix_exponential([[1.0]], -1.0)


class TestSolveStableQuadratic:
    def test_scalar_zero_rate_admits_zero_root(self):
        sol = mmbm.solve_stable_quadratic([[0.0]], [-1.0], [1.0], 0.0)
        # roots of u(u/2 - 1) are 0 and 2; the stable choice is 0
        assert abs(sol.U[0, 0]) <= 1e-12
        assert sol.residual_norm <= 1e-12

    def test_scalar_positive_rate(self):
        sol = mmbm.solve_stable_quadratic([[0.0]], [-1.0], [1.0], 1.5)
        # u^2/2 - u - 3/2 = 0 has roots 3 and -1; stable root is -1
        assert sol.U[0, 0] == pytest.approx(-1.0, abs=1e-12)

    def test_reference_model_generator_structure(self, ref_model):
        sol = mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu, ref_model.sigma, 0.0)
        assert sol.residual_norm <= 1e-10
        assert np.max(np.abs(sol.U.sum(axis=1))) <= 1e-10
        off = sol.U - np.diag(np.diag(sol.U))
        assert np.min(off) >= -1e-12
        eigs = np.linalg.eigvals(sol.U)
        assert np.sum(np.abs(eigs.real) <= 1e-9) == 1

    def test_reference_model_killed_spectrum(self, ref_model):
        sol = mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu, ref_model.sigma, 1.0)
        assert sol.residual_norm <= 1e-10
        assert np.all(np.linalg.eigvals(sol.U).real < 0.0)

    def test_against_eigen_oracle(self, ref_model):
        # independent route: raw eigendecomposition of the companion matrix
        m = ref_model.m
        for q in (0.0, 1.0, 4.0):
            sol = mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu,
                                              ref_model.sigma, q)
            th2inv = np.diag(1.0 / ref_model.sigma**2)
            comp = np.zeros((2 * m, 2 * m))
            comp[:m, m:] = np.eye(m)
            comp[m:, :m] = -2.0 * th2inv @ (ref_model.Q - q * np.eye(m))
            comp[m:, m:] = -2.0 * th2inv @ np.diag(ref_model.mu)
            w, v = np.linalg.eig(comp)
            sel = np.argsort(w.real)[:m]
            u_oracle = np.real(np.linalg.solve(v[:m, sel].T, v[m:, sel].T).T)
            assert np.max(np.abs(sol.U - u_oracle)) <= 1e-8

    def test_diagonal_matrix_inputs_accepted(self, ref_model):
        sol_v = mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu, ref_model.sigma, 1.0)
        sol_m = mmbm.solve_stable_quadratic(ref_model.Q, np.diag(ref_model.mu),
                                            np.diag(ref_model.sigma), 1.0)
        assert np.array_equal(sol_v.U, sol_m.U)

    def test_invalid_inputs(self, ref_model):
        with pytest.raises(ValidationError):
            mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu, [1.0, -2.0], 0.0)
        with pytest.raises(ValidationError):
            mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu, ref_model.sigma, -1.0)


class TestSolveRiccatiPsi:
    def test_stochastic_without_deadline(self, m1_model):
        ric = mmbm.solve_riccati_psi(m1_model, 1e4, 0.0)
        assert ric.psi[0, 0] == pytest.approx(1.0, abs=1e-10)
        assert np.array_equal(ric.psi_q, ric.psi)
        assert np.all(ric.psi_c == 0.0)

    def test_huge_deadline_rate_kills_returns(self, ref_model, m1_model):
        for model in (m1_model, ref_model):
            ric = mmbm.solve_riccati_psi(model, 1e4, 1e12)
            assert np.max(ric.psi_q) <= 1e-6

    def test_residual_and_bounds(self, ref_model):
        ric = mmbm.solve_riccati_psi(ref_model, 1e4, 1.0)
        m = ref_model.m
        sq = 100.0
        c_up = ref_model.mu + sq * ref_model.sigma
        c_dn = sq * ref_model.sigma - ref_model.mu
        lhs = (np.diag(1e4 / c_up)
               + ((ref_model.Q - (1e4 + 1.0) * np.eye(m)) / c_up[:, None]) @ ric.psi_q
               + ric.psi_q @ ((ref_model.Q - (1e4 + 1.0) * np.eye(m)) / c_dn[:, None])
               + 1e4 * (ric.psi_q / c_dn[None, :]) @ ric.psi_q)
        assert np.linalg.norm(lhs, np.inf) <= 1e-12
        assert np.min(ric.psi_q) >= 0.0
        assert np.all(ric.psi_q <= ric.psi + 1e-14)
        assert np.max(ric.psi) <= 1.0 + 1e-12
        assert np.max(np.abs(ric.psi.sum(axis=1) - 1.0)) <= 1e-10
        assert np.allclose(ric.psi_c, ric.psi - ric.psi_q, atol=0, rtol=0)

    def test_monotone_in_deadline_rate(self, ref_model):
        qs = (0.25, 1.0, 4.0, 16.0)
        mats = [mmbm.solve_riccati_psi(ref_model, 1e4, q).psi_q for q in qs]
        for lo, hi in zip(mats[1:], mats[:-1]):
            assert np.all(lo <= hi + 1e-12)

    def test_rate_threshold_enforced(self, ref_model):
        # threshold for the reference model is (3/2)^2 = 2.25
        assert ref_model.rate_threshold() == pytest.approx(2.25)
        with pytest.raises(ValidationError) as exc:
            mmbm.solve_riccati_psi(ref_model, 2.0, 1.0)
        assert exc.value.check == "oscillation-rate"

    def test_first_order_expansion_scaling(self, ref_model):
        # || psi_q - I - Theta U(q)/sqrt(lam) || * lam stays bounded and
        # varies by less than a factor 3 over two decades of lam
        uq = mmbm.solve_stable_quadratic(ref_model.Q, ref_model.mu,
                                         ref_model.sigma, 1.0).U
        scaled = []
        for lam in (1e3, 1e4, 1e5):
            ric = mmbm.solve_riccati_psi(ref_model, lam, 1.0)
            err = ric.psi_q - np.eye(2) - ref_model.sigma[:, None] * uq / np.sqrt(lam)
            scaled.append(np.linalg.norm(err, np.inf) * lam)
        assert max(scaled) / min(scaled) < 3.0


def test_quadratic_contract_on_random_models():
    rng = np.random.default_rng(123)
    for _ in range(20):
        model = random_model(rng, int(rng.integers(2, 9)))
        s0 = mmbm.solve_stable_quadratic(model.Q, model.mu, model.sigma, 0.0)
        s1 = mmbm.solve_stable_quadratic(model.Q, model.mu, model.sigma, 1.0)
        assert s0.residual_norm <= 1e-10
        assert s1.residual_norm <= 1e-10
        assert np.max(np.abs(s0.U.sum(axis=1))) <= 1e-10
        assert np.all(np.linalg.eigvals(s1.U).real < 0.0)
