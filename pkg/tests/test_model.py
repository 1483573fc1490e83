import numpy as np
import pytest

import mmbm
from mmbm.errors import ValidationError


class TestValidateModel:
    def test_single_phase(self, m1_model):
        assert m1_model.alpha == pytest.approx([1.0])
        assert m1_model.drift == pytest.approx(-1.0)
        assert m1_model.m == 1

    def test_reference_model(self, ref_model):
        assert ref_model.alpha == pytest.approx([2.0 / 3.0, 1.0 / 3.0], abs=1e-14)
        assert ref_model.drift == pytest.approx(-5.0 / 3.0, abs=1e-14)

    def test_positive_drift_rejected(self):
        with pytest.raises(ValidationError) as exc:
            mmbm.validate_model([[-1.0, 1.0], [2.0, -2.0]], [3.0, -1.0], [1.0, 2.0])
        assert exc.value.check == "mean-drift-negative"
        # drift would be 2/3*3 + 1/3*(-1) = 5/3
        assert "1.66667" in str(exc.value)

    def test_zero_drift_rejected(self):
        with pytest.raises(ValidationError):
            mmbm.validate_model([[-1.0, 1.0], [1.0, -1.0]], [-1.0, 1.0], [1.0, 1.0])

    def test_nonpositive_volatility_rejected(self):
        with pytest.raises(ValidationError) as exc:
            mmbm.validate_model([[0.0]], [-1.0], [0.0])
        assert exc.value.check == "volatility-positive"

    def test_reducible_generator_rejected(self):
        q = [[0.0, 0.0], [1.0, -1.0]]
        with pytest.raises(ValidationError) as exc:
            mmbm.validate_model(q, [-1.0, -1.0], [1.0, 1.0])
        assert exc.value.check == "irreducible"

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            mmbm.validate_model([[0.0]], [-1.0, -2.0], [1.0])

    def test_arrays_immutable(self, ref_model):
        with pytest.raises(ValueError):
            ref_model.Q[0, 0] = 5.0
        with pytest.raises(ValueError):
            ref_model.mu[0] = 5.0


class TestMeanDrift:
    def test_single_phase(self, m1_model):
        assert mmbm.mean_drift(m1_model) == -1.0

    def test_reference(self, ref_model):
        assert mmbm.mean_drift(ref_model) == pytest.approx(-5.0 / 3.0, abs=1e-14)


class TestValidateSticky:
    def test_omega_derived(self, ref_model):
        spec = mmbm.validate_sticky([1.0, 2.0], ref_model)
        assert spec.omega == pytest.approx([1.0, 4.0])

    def test_nonpositive_rejected(self, ref_model):
        with pytest.raises(ValidationError):
            mmbm.validate_sticky([1.0, 0.0], ref_model)

    def test_wrong_length_rejected(self, ref_model):
        with pytest.raises(ValidationError):
            mmbm.validate_sticky([1.0], ref_model)


class TestValidateResample:
    def test_swap_example(self, ref_model):
        spec = mmbm.validate_resample(ref_model, [[0.0, 1.0], [1.0, 0.0]],
                                      [[-1.0, 0.0], [0.0, -1.0]])
        assert np.allclose(spec.B, [[0.0, 1.0], [1.0, 0.0]], atol=0)
        assert spec.beta == pytest.approx([0.5, 0.5])
        # default Qtilde is A @ Q
        assert np.allclose(spec.Qtilde, spec.A @ ref_model.Q, atol=0)

    def test_weighted_example(self, ref_model):
        spec = mmbm.validate_resample(ref_model, [[0.5, 0.5], [1.0, 0.0]],
                                      [[-1.0, 0.0], [0.0, -1.0]])
        assert np.allclose(spec.B, [[0.5, 0.5], [1.0, 0.0]], atol=0)
        assert spec.beta == pytest.approx([2.0 / 3.0, 1.0 / 3.0], abs=1e-14)

    def test_diagonal_pair_rejected(self, ref_model):
        # A + Atilde = 0 is not an irreducible generator
        with pytest.raises(ValidationError) as exc:
            mmbm.validate_resample(ref_model, np.diag([1.0, 1.0]), -np.diag([1.0, 1.0]))
        assert exc.value.check == "resample-generator-irreducible"

    def test_sign_violations_rejected(self, ref_model):
        with pytest.raises(ValidationError):
            mmbm.validate_resample(ref_model, [[0.0, -1.0], [1.0, 0.0]],
                                   [[-1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(ValidationError):
            mmbm.validate_resample(ref_model, [[0.0, 1.0], [1.0, 0.0]],
                                   [[-1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValidationError):
            mmbm.validate_resample(ref_model, [[0.0, 1.0], [1.0, 0.0]],
                                   [[-2.0, 0.0], [0.0, -1.0]])

    def test_explicit_qtilde_row_sums_checked(self, ref_model):
        with pytest.raises(ValidationError):
            mmbm.validate_resample(ref_model, [[0.0, 1.0], [1.0, 0.0]],
                                   [[-1.0, 0.0], [0.0, -1.0]],
                                   Qtilde=[[1.0, 1.0], [0.0, 0.0]])

    def test_b_stochastic_and_stationary(self, ref_model):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a = rng.uniform(0.0, 1.0, size=(2, 2))
            at = rng.uniform(0.0, 0.5, size=(2, 2))
            np.fill_diagonal(at, 0.0)
            np.fill_diagonal(at, -(a.sum(axis=1) + at.sum(axis=1)))
            spec = mmbm.validate_resample(ref_model, a, at)
            assert np.max(np.abs(spec.B.sum(axis=1) - 1.0)) <= 1e-12
            assert np.max(np.abs(spec.beta @ spec.B - spec.beta)) <= 1e-12
