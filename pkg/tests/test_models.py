import numpy as np
import pytest

from semigauss import MODEL_NAMES, ValidationError, finite_difference_check, make_model

CATALOG_INSTANCES = {
    "harmonic": dict(omega=1.3),
    "free": {},
    "inverted": dict(lam=0.9),
    "pendulum": dict(v0=1.0),
    "wannier_stark": dict(v=1.0, eps=0.1),
    "quartic": {},
    "aniso_harmonic_2d": dict(omega1=1.0, omega2=np.sqrt(2.0)),
}


def every_model():
    return [make_model(name, **params) for name, params in CATALOG_INSTANCES.items()]


class TestCatalog:
    def test_names_complete(self):
        assert set(MODEL_NAMES) == set(CATALOG_INSTANCES)

    def test_unknown_name(self):
        with pytest.raises(ValidationError):
            make_model("kepler")

    def test_missing_parameter(self):
        with pytest.raises(ValidationError):
            make_model("harmonic")

    def test_invalid_parameter(self):
        with pytest.raises(ValidationError):
            make_model("harmonic", omega=-2.0)

    def test_extra_parameter(self):
        with pytest.raises(ValidationError):
            make_model("free", omega=1.0)


class TestKnownDerivatives:
    def test_harmonic_hessian_constant(self):
        model = make_model("harmonic", omega=1.0)
        for X in ([0.0, 0.0], [1.5, -2.0], [0.3, 7.0]):
            assert np.array_equal(model.hess(np.array(X)), np.eye(2))

    def test_pendulum_hessian(self):
        model = make_model("pendulum", v0=1.0)
        X = np.array([0.6, 1.234])
        assert np.allclose(model.hess(X), np.diag([1.0, np.cos(1.234)]))

    def test_wannier_stark_gradient_at_origin(self):
        model = make_model("wannier_stark", v=1.0, eps=0.1)
        assert np.allclose(model.grad(np.zeros(2)), [0.0, 0.1])

    def test_quartic_values(self):
        model = make_model("quartic")
        X = np.array([2.0, 3.0])
        assert model.value(X) == pytest.approx(2.0 + 81.0 / 4.0)
        assert np.allclose(model.grad(X), [2.0, 27.0])
        assert np.allclose(model.hess(X), np.diag([1.0, 27.0]))

    def test_aniso_2d(self):
        model = make_model("aniso_harmonic_2d", omega1=1.0, omega2=2.0)
        X = np.array([0.0, 0.0, 1.0, 1.0])
        assert model.value(X) == pytest.approx(0.5 * (1.0 + 4.0))
        assert np.allclose(model.hess(X), np.diag([1.0, 1.0, 1.0, 4.0]))


class TestFiniteDifferences:
    def test_harmonic_is_exact(self):
        model = make_model("harmonic", omega=1.0)
        report = finite_difference_check(model, [0.7, -1.2], h=1e-5)
        assert report.grad_error < 1e-9
        assert report.hess_error < 1e-9

    def test_pendulum(self):
        model = make_model("pendulum", v0=1.0)
        report = finite_difference_check(model, [0.3, 1.1], h=1e-5)
        assert report.grad_error < 1e-6
        assert report.hess_error < 1e-6

    def test_quartic_gradient(self):
        model = make_model("quartic")
        report = finite_difference_check(model, [0.0, 2.0], h=1e-4)
        assert report.grad_error < 1e-6

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValidationError):
            finite_difference_check(make_model("free"), [1.0, 0.0], h=0.0)

    @pytest.mark.parametrize("model", every_model(), ids=lambda m: m.name)
    def test_catalog_randomized(self, model):
        rng = np.random.default_rng(hash(model.name) % 2 ** 32)
        for _ in range(20):
            X = rng.uniform(-1.0, 1.0, 2 * model.d)
            X *= 5.0 / max(1.0, np.linalg.norm(X))
            report = finite_difference_check(model, X, h=1e-5)
            assert report.grad_error < 1e-6
            assert report.hess_error < 1e-5

    @pytest.mark.parametrize("model", every_model(), ids=lambda m: m.name)
    def test_hessian_exactly_symmetric(self, model):
        rng = np.random.default_rng(1 + hash(model.name) % 2 ** 32)
        for _ in range(10):
            H = model.hess(rng.uniform(-3.0, 3.0, 2 * model.d))
            assert np.array_equal(H, H.T)


class TestPotentials:
    def test_split_form_matches_value(self):
        for model in every_model():
            if model.potential is None:
                continue
            q = np.linspace(-3.0, 3.0, 7)
            for qi in q:
                X = np.array([0.0, qi])
                assert model.potential(qi) == pytest.approx(model.value(X))

    def test_potential_vectorized(self):
        model = make_model("pendulum", v0=2.0)
        q = np.linspace(-2.0, 2.0, 32)
        assert model.potential(q).shape == q.shape

    def test_aniso_has_no_split_form(self):
        assert make_model("aniso_harmonic_2d", omega1=1.0, omega2=2.0).potential is None
