import numpy as np
import pytest

from semigauss import (PhaseSpacePoint, SiegelForm, ValidationError, WignerForm,
                       hs_norm, mobius_transform, polar_decompose,
                       siegel_from_wigner_form, symplectic_defect,
                       symplectic_unity, wigner_form_from_siegel)


def random_siegel(rng, d):
    a = rng.standard_normal((d, d))
    re = 0.5 * (a + a.T)
    b = rng.standard_normal((d, d))
    im = b @ b.T + 0.3 * np.eye(d)
    return SiegelForm(re + 1j * im)


def random_symplectic(rng, d):
    """exp(J A) with A symmetric is symplectic."""
    a = rng.standard_normal((2 * d, 2 * d))
    sym = 0.5 * (a + a.T)
    from scipy.linalg import expm
    return expm(symplectic_unity(d) @ sym)


class TestSymplecticUnity:
    def test_d1_matrix(self):
        assert np.array_equal(symplectic_unity(1), [[0.0, -1.0], [1.0, 0.0]])

    def test_square_is_minus_identity(self):
        J = symplectic_unity(1)
        assert np.array_equal(J @ J, -np.eye(2))
        assert np.array_equal(J.T, -J)

    def test_hs_norm_d2(self):
        assert hs_norm(symplectic_unity(2)) == pytest.approx(2.0)

    def test_rejects_zero_dimension(self):
        with pytest.raises(ValidationError):
            symplectic_unity(0)


class TestHsNorm:
    def test_values(self):
        assert hs_norm(symplectic_unity(1)) == pytest.approx(np.sqrt(2.0))
        assert hs_norm(np.eye(2)) == pytest.approx(np.sqrt(2.0))
        assert hs_norm([[1.0, 0.0], [2.0, 1.0]]) == pytest.approx(np.sqrt(6.0))
        assert hs_norm(np.zeros((3, 3))) == 0.0


class TestPolarDecompose:
    def test_identity(self):
        Q, P = polar_decompose(np.eye(2))
        assert np.allclose(Q, np.eye(2))
        assert np.allclose(P, np.eye(2))

    def test_rotation_input_is_orthogonal_factor(self):
        th = 0.7
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        Q, P = polar_decompose(R)
        assert np.allclose(Q, R, atol=1e-12)
        assert np.allclose(P, np.eye(2), atol=1e-12)

    def test_shear_eigenvalues(self):
        # S^T S = [[2, 1], [1, 1]] has sqrt-eigenvalues (sqrt(5) +/- 1) / 2
        S = np.array([[1.0, 0.0], [1.0, 1.0]])
        Q, P = polar_decompose(S)
        expected = np.array([(np.sqrt(5) - 1) / 2, (np.sqrt(5) + 1) / 2])
        assert np.allclose(np.sort(np.linalg.eigvalsh(P)), expected)

    @pytest.mark.parametrize("d", [1, 2])
    def test_factor_properties_random(self, d):
        rng = np.random.default_rng(7 + d)
        for _ in range(20):
            S = random_symplectic(rng, d)
            Q, P = polar_decompose(S)
            assert hs_norm(Q @ P - S) < 1e-10
            assert hs_norm(Q.T @ Q - np.eye(2 * d)) < 1e-10
            assert np.linalg.eigvalsh(P).min() > 0.0
            assert symplectic_defect(Q) < 1e-9
            assert symplectic_defect(P) < 1e-9

    def test_rejects_non_symplectic(self):
        with pytest.raises(ValidationError):
            polar_decompose(np.diag([2.0, 3.0]))


class TestSiegelForm:
    def test_symmetrizes_roundoff(self):
        Z = SiegelForm(np.array([[1.0 + 1j, 0.5 + 1e-13],
                                 [0.5, 2.0 + 2j]]))
        assert np.array_equal(Z.Z, Z.Z.T)

    def test_rejects_gross_asymmetry(self):
        with pytest.raises(ValidationError):
            SiegelForm(np.array([[1j, 0.5], [0.7, 2j]]))

    def test_rejects_indefinite_imaginary_part(self):
        with pytest.raises(ValidationError):
            SiegelForm(np.array([[-1j]]))

    def test_accepts_strong_squeezing(self):
        # ten orders of magnitude between the squeezed axes, above the
        # relative positive-definiteness floor
        SiegelForm(np.diag([1e-6j, 1e4j]))


class TestWignerForm:
    def test_identity_case(self):
        G = wigner_form_from_siegel(SiegelForm(1j * np.eye(1)))
        assert np.allclose(G.G, np.eye(2))

    def test_d1_block_formula(self):
        # Z = x + i y: G = [[1/y, -x/y], [-x/y, y + x^2/y]]
        x, y = 0.8, 1.7
        G = wigner_form_from_siegel(SiegelForm([[x + 1j * y]])).G
        expected = np.array([[1 / y, -x / y], [-x / y, y + x * x / y]])
        assert np.allclose(G, expected)
        assert np.linalg.det(G) == pytest.approx(1.0, abs=1e-12)

    def test_one_plus_i(self):
        G = wigner_form_from_siegel(SiegelForm([[1.0 + 1j]])).G
        assert np.allclose(G, [[1.0, -1.0], [-1.0, 2.0]])

    @pytest.mark.parametrize("d", [1, 2])
    def test_det_one_and_symplectic_symmetry(self, d):
        rng = np.random.default_rng(11 + d)
        J = symplectic_unity(d)
        for _ in range(25):
            G = wigner_form_from_siegel(random_siegel(rng, d)).G
            assert abs(np.linalg.det(G) - 1.0) < 1e-9
            assert hs_norm(J.T @ G @ J - np.linalg.inv(G)) < 1e-9
            assert np.trace(G) >= 2 * d - 1e-12

    def test_rejects_wrong_determinant(self):
        with pytest.raises(ValidationError):
            WignerForm(2.0 * np.eye(2))


class TestSiegelWignerRoundTrip:
    def test_identity(self):
        Z = siegel_from_wigner_form(WignerForm(np.eye(2)))
        assert np.allclose(Z.Z, 1j * np.eye(1))

    def test_known_pair(self):
        Z = siegel_from_wigner_form(WignerForm([[1.0, -1.0], [-1.0, 2.0]]))
        assert np.allclose(Z.Z, [[1.0 + 1j]])

    @pytest.mark.parametrize("d", [1, 2])
    def test_random_round_trip(self, d):
        rng = np.random.default_rng(13 + d)
        for _ in range(25):
            Z = random_siegel(rng, d)
            Z2 = siegel_from_wigner_form(wigner_form_from_siegel(Z))
            assert np.linalg.norm(Z.Z - Z2.Z) < 1e-12 * max(1.0, np.linalg.norm(Z.Z))


class TestMobius:
    def test_identity_action(self):
        Z = SiegelForm([[0.3 + 0.9j]])
        assert np.allclose(mobius_transform(np.eye(2), Z).Z, Z.Z)

    def test_shear_on_i(self):
        S = np.array([[1.0, 0.0], [1.0, 1.0]])
        Z = mobius_transform(S, SiegelForm([[1j]]))
        assert np.allclose(Z.Z, [[0.5 + 0.5j]])

    def test_rotation_fixed_point(self):
        Z = mobius_transform(symplectic_unity(1), SiegelForm([[1j]]))
        assert np.allclose(Z.Z, [[1j]])

    @pytest.mark.parametrize("d", [1, 2])
    def test_group_action(self, d):
        rng = np.random.default_rng(17 + d)
        for _ in range(50):
            S1 = random_symplectic(rng, d)
            S2 = random_symplectic(rng, d)
            Z = random_siegel(rng, d)
            via_two = mobius_transform(S2, mobius_transform(S1, Z))
            direct = mobius_transform(S2 @ S1, Z)
            assert np.linalg.norm(via_two.Z - direct.Z) < 1e-8 * max(
                1.0, np.linalg.norm(direct.Z))

    @pytest.mark.parametrize("d", [1, 2])
    def test_stays_in_siegel_space(self, d):
        rng = np.random.default_rng(19 + d)
        for _ in range(30):
            Z = mobius_transform(random_symplectic(rng, d), random_siegel(rng, d))
            assert np.linalg.eigvalsh(Z.imag).min() > 0.0


class TestPhaseSpacePoint:
    def test_vector_round_trip(self):
        X = PhaseSpacePoint([1.0, 2.0], [3.0, 4.0])
        assert np.array_equal(X.vector, [1.0, 2.0, 3.0, 4.0])
        assert PhaseSpacePoint.from_vector(X.vector).d == 2

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            PhaseSpacePoint([np.nan], [0.0])

    def test_rejects_mismatched_dims(self):
        with pytest.raises(ValidationError):
            PhaseSpacePoint([1.0, 2.0], [3.0])

    def test_immutable(self):
        X = PhaseSpacePoint([1.0], [2.0])
        with pytest.raises(ValueError):
            X.p[0] = 5.0


class TestMobiusConditioning:
    def test_conditioning_guard_reports_estimate(self):
        from semigauss import ConditioningError
        # extreme anisotropic squeeze: C Z + D has condition 1e13
        S = np.diag([1e13, 1.0, 1e-13, 1.0])
        Z = SiegelForm(1j * np.eye(2))
        with pytest.raises(ConditioningError) as excinfo:
            mobius_transform(S, Z)
        assert "condition estimate" in str(excinfo.value)
