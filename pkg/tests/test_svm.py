"""RBF kernel and SMO solver behavior, including backend parity."""

import math

import numpy as np
import pytest

from clinlab.errors import DimensionMismatch, SingleClassData
from clinlab.svm import (
    SmoConfig,
    SvmModel,
    active_backend,
    decision_values,
    dual_objective,
    predict,
    predict_labels,
    rbf_kernel,
    rbf_kernel_matrix,
    solver_backends,
    train_smo,
)


def blobs(seed=0, n=20, gap=6.0):
    rng = np.random.default_rng(seed)
    neg = rng.normal(-gap / 2, 1.0, size=(n, 2))
    pos = rng.normal(gap / 2, 1.0, size=(n, 2))
    x = np.vstack([neg, pos])
    y = np.array([-1] * n + [1] * n)
    return x, y


class TestKernel:
    def test_identical_points_give_one(self):
        x = np.array([0.3, -1.2, 4.0])
        assert rbf_kernel(x, x, gamma=2.5) == 1.0
        k = rbf_kernel_matrix(np.array([x]), np.array([x]), gamma=2.5)
        assert k[0, 0] == 1.0

    def test_unit_distance_reference_value(self):
        v = rbf_kernel(np.array([0.0, 0.0]), np.array([1.0, 0.0]), gamma=1.0)
        assert v == pytest.approx(math.exp(-1.0), abs=1e-9)

    def test_vanishing_gamma_limit(self):
        v = rbf_kernel(np.array([0.0]), np.array([100.0]), gamma=1e-12)
        assert v == pytest.approx(1.0, abs=1e-6)

    def test_nonpositive_gamma_rejected(self):
        x = np.array([1.0])
        for gamma in (0.0, -1.0):
            with pytest.raises(ValueError):
                rbf_kernel(x, x, gamma)
            with pytest.raises(ValueError):
                rbf_kernel_matrix(np.array([x]), np.array([x]), gamma)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            rbf_kernel(np.array([1.0, 2.0]), np.array([1.0]), gamma=1.0)
        with pytest.raises(DimensionMismatch):
            rbf_kernel_matrix(np.zeros((2, 3)), np.zeros((2, 2)), gamma=1.0)

    def test_matrix_matches_pairwise(self):
        rng = np.random.default_rng(41)
        a = rng.normal(size=(5, 3))
        b = rng.normal(size=(4, 3))
        k = rbf_kernel_matrix(a, b, gamma=0.7)
        for i in range(5):
            for j in range(4):
                assert k[i, j] == pytest.approx(rbf_kernel(a[i], b[j], 0.7), abs=1e-12)

    def test_symmetric_with_unit_diagonal(self):
        rng = np.random.default_rng(42)
        a = rng.normal(size=(6, 2))
        k = rbf_kernel_matrix(a, a, gamma=1.3)
        assert np.allclose(k, k.T, atol=1e-15)
        assert np.array_equal(np.diag(k), np.ones(6))


class TestTrainSmo:
    def test_two_point_decision_boundary_at_origin(self):
        x = np.array([[-1.0], [1.0]])
        y = np.array([-1, 1])
        model = train_smo(x, y, cost=10.0, gamma=1.0)
        assert abs(decision_values(model, np.array([[0.0]]))[0]) < 1e-6
        assert predict(model, np.array([1.0]))[0] == 1
        assert predict(model, np.array([-1.0]))[0] == -1

    def test_dual_feasibility(self):
        for trial in range(5):
            x, y = blobs(seed=trial, gap=2.0)
            cost = 2.0
            model = train_smo(x, y, cost=cost, gamma=0.5, config=SmoConfig(seed=trial))
            alpha = model.alpha
            assert abs(float((alpha * y).sum())) < 1e-6
            assert float(alpha.min()) >= 0.0
            assert float(alpha.max()) <= cost + 1e-12

    def test_hard_separation_classifies_training_data(self):
        x, y = blobs(seed=3)
        model = train_smo(x, y, cost=10.0, gamma=1.0)
        assert np.array_equal(predict_labels(model, x), y)

    def test_dual_coef_within_budget(self):
        x, y = blobs(seed=5, gap=1.0)  # overlapping: alphas hit the box
        cost = 0.5
        model = train_smo(x, y, cost=cost, gamma=1.0)
        assert float(np.abs(model.dual_coef).max()) <= cost + 1e-12

    def test_class_weights_scale_the_boxes(self):
        x, y = blobs(seed=6, gap=0.5)
        cost = 1.0
        model = train_smo(
            x, y, cost=cost, gamma=1.0, config=SmoConfig(class_weights=(1.0, 3.0))
        )
        pos = model.dual_coef > 0
        assert float(model.dual_coef[pos].max()) <= 3.0 * cost + 1e-12
        assert float(-model.dual_coef[~pos].min()) <= 1.0 * cost + 1e-12
        # weighted positives can exceed the unweighted budget
        assert float(model.dual_coef[pos].max()) > cost

    def test_zero_decision_value_is_negative(self):
        model = SvmModel(
            support_vectors=np.zeros((0, 2)),
            dual_coef=np.zeros(0),
            bias=0.0,
            gamma=1.0,
            cost=1.0,
        )
        label, dv = predict(model, np.array([5.0, 5.0]))
        assert dv == 0.0
        assert label == -1

    def test_single_class_rejected(self):
        x = np.zeros((4, 2))
        with pytest.raises(SingleClassData):
            train_smo(x, np.ones(4), cost=1.0, gamma=1.0)

    def test_bad_labels_rejected(self):
        x = np.zeros((3, 1))
        with pytest.raises(ValueError):
            train_smo(x, np.array([0, 1, 2]), cost=1.0, gamma=1.0)

    def test_non_finite_features_rejected(self):
        x = np.array([[1.0], [np.nan]])
        with pytest.raises(ValueError):
            train_smo(x, np.array([-1, 1]), cost=1.0, gamma=1.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            train_smo(np.zeros((3, 2)), np.array([-1, 1]), cost=1.0, gamma=1.0)
        with pytest.raises(DimensionMismatch):
            train_smo(np.zeros(3), np.array([-1, 1, 1]), cost=1.0, gamma=1.0)

    def test_nonpositive_parameters_rejected(self):
        x, y = blobs(seed=7, n=4)
        with pytest.raises(ValueError):
            train_smo(x, y, cost=0.0, gamma=1.0)
        with pytest.raises(ValueError):
            train_smo(x, y, cost=1.0, gamma=-2.0)

    def test_same_seed_bitwise_reproducible(self):
        x, y = blobs(seed=8, gap=1.5)
        a = train_smo(x, y, cost=1.0, gamma=1.0, config=SmoConfig(seed=99))
        b = train_smo(x, y, cost=1.0, gamma=1.0, config=SmoConfig(seed=99))
        assert np.array_equal(a.alpha, b.alpha)
        assert a.bias == b.bias
        assert a.sweeps == b.sweeps

    def test_support_vectors_are_active_rows(self):
        x, y = blobs(seed=9)
        model = train_smo(x, y, cost=10.0, gamma=1.0)
        assert model.n_support == model.support_vectors.shape[0]
        assert model.n_support >= 2  # at least one per class
        rows = {tuple(r) for r in x}
        assert all(tuple(sv) in rows for sv in model.support_vectors)

    def test_decision_values_match_kernel_expansion(self):
        x, y = blobs(seed=10)
        model = train_smo(x, y, cost=1.0, gamma=0.8)
        probe = np.array([[0.5, -0.2], [2.0, 2.0]])
        k = rbf_kernel_matrix(probe, model.support_vectors, 0.8)
        expected = k @ model.dual_coef + model.bias
        assert np.allclose(decision_values(model, probe), expected, atol=1e-12)

    def test_probe_width_checked(self):
        x, y = blobs(seed=11)
        model = train_smo(x, y, cost=1.0, gamma=1.0)
        with pytest.raises(DimensionMismatch):
            decision_values(model, np.zeros((1, 5)))


class TestModelSerialization:
    def test_round_trip_preserves_decision_function(self):
        x, y = blobs(seed=12)
        model = train_smo(
            x, y, cost=3.0, gamma=0.4,
            labels=("neg", "pos"), encoder_fingerprint="sha256:abc",
        )
        again = SvmModel.from_dict(model.to_dict())
        assert again.to_dict() == model.to_dict()  # diagnostics not serialized
        assert again.labels == ("neg", "pos")
        assert again.encoder_fingerprint == "sha256:abc"
        probe = np.array([[0.1, 0.2]])
        assert decision_values(again, probe)[0] == decision_values(model, probe)[0]

    def test_validation_rejects_inconsistent_fields(self):
        with pytest.raises(ValueError):
            SvmModel(
                support_vectors=np.zeros((2, 2)),
                dual_coef=np.zeros(3),
                bias=0.0,
                gamma=1.0,
                cost=1.0,
            )
        with pytest.raises(ValueError):
            SvmModel(
                support_vectors=np.zeros((1, 1)),
                dual_coef=np.array([5.0]),  # exceeds the cost budget
                bias=0.0,
                gamma=1.0,
                cost=1.0,
            )

    def test_config_round_trip(self):
        config = SmoConfig(tol=1e-4, max_passes=3, max_sweeps=50, class_weights=(1.0, 2.0), seed=5)
        assert SmoConfig.from_dict(config.to_dict()) == config
        assert SmoConfig.from_dict({}) == SmoConfig()

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SmoConfig(tol=0.0)
        with pytest.raises(ValueError):
            SmoConfig(max_passes=0)
        with pytest.raises(ValueError):
            SmoConfig(class_weights=(1.0, -1.0))


class TestBackends:
    def test_active_backend_is_registered(self):
        assert active_backend() in solver_backends()

    def test_backends_agree_exactly(self):
        backends = solver_backends()
        if len(backends) < 2:
            pytest.skip("only one solver backend available")
        x, y = blobs(seed=13, gap=1.5)
        yf = y.astype(np.float64)
        kernel = rbf_kernel_matrix(x, x, 1.0)
        c_row = np.full(x.shape[0], 2.0)
        results = {
            name: impl.solve(kernel, yf, c_row, 1e-3, 5, 1000, 123)
            for name, impl in backends.items()
        }
        (alpha_a, bias_a, sweeps_a, _), (alpha_b, bias_b, sweeps_b, _) = results.values()
        assert np.array_equal(np.asarray(alpha_a), np.asarray(alpha_b))
        assert sweeps_a == sweeps_b
        assert bias_a == pytest.approx(bias_b, abs=1e-12)
        w = np.asarray(alpha_a) * yf
        assert dual_objective(kernel, yf, np.asarray(alpha_a)) == pytest.approx(
            dual_objective(kernel, yf, np.asarray(alpha_b)), abs=1e-12
        )
        assert abs(float(w.sum())) < 1e-9

    def test_backends_agree_on_overlapping_classes(self):
        # Overlap forces many sweeps with error refreshes between them, so
        # this catches any divergence in the refresh path, not just the
        # per-pair updates.
        backends = solver_backends()
        if len(backends) < 2:
            pytest.skip("only one solver backend available")
        rng = np.random.default_rng(5)
        x = np.vstack([
            rng.normal(-0.7, 1.0, size=(100, 3)),
            rng.normal(0.7, 1.0, size=(100, 3)),
        ])
        yf = np.concatenate([-np.ones(100), np.ones(100)])
        kernel = rbf_kernel_matrix(x, x, 0.5)
        c_row = np.full(200, 10.0)
        results = {
            name: impl.solve(kernel, yf, c_row, 1e-3, 5, 1000, 9)
            for name, impl in backends.items()
        }
        (alpha_a, bias_a, sweeps_a, _), (alpha_b, bias_b, sweeps_b, _) = results.values()
        assert sweeps_a > 10  # the problem is genuinely hard
        assert np.array_equal(np.asarray(alpha_a), np.asarray(alpha_b))
        assert sweeps_a == sweeps_b
        assert bias_a == bias_b
