import numpy as np
import pytest

from subnewton.geometry import (
    ConeBasis,
    RestrictedSpectrum,
    check_symmetric,
    restricted_condition_number,
    restricted_eigenvalues,
    restricted_matrix_norm,
    restricted_vector_norm,
)


def random_orthonormal(rng, p, r):
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    return q[:, :r]


def random_symmetric(rng, p):
    a = rng.standard_normal((p, p))
    return 0.5 * (a + a.T)


# -- ConeBasis -----------------------------------------------------------------


def test_identity_basis_shape():
    u = ConeBasis.identity(4)
    assert u.ambient_dim == 4
    assert u.subspace_dim == 4
    assert np.array_equal(u.columns, np.eye(4))


def test_basis_rejects_non_orthonormal():
    with pytest.raises(ValueError, match="orthonormal"):
        ConeBasis(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_basis_rejects_wide_matrix():
    rng = np.random.default_rng(0)
    u = random_orthonormal(rng, 3, 3)
    with pytest.raises(ValueError):
        ConeBasis(np.hstack([u, u[:, :1]]))


def test_basis_accepts_tiny_orthonormality_error():
    rng = np.random.default_rng(1)
    u = random_orthonormal(rng, 6, 3)
    ConeBasis(u + 1e-14 * rng.standard_normal(u.shape))


# -- restricted vector norm ------------------------------------------------------


def test_vector_norm_full_space_is_euclidean():
    u = ConeBasis.identity(2)
    assert restricted_vector_norm(np.array([3.0, 4.0]), u) == pytest.approx(5.0, abs=1e-14)


def test_vector_norm_coordinate_axis():
    u = ConeBasis(np.array([[1.0], [0.0]]))
    assert restricted_vector_norm(np.array([3.0, 4.0]), u) == pytest.approx(3.0, abs=1e-14)


def test_vector_norm_matches_explicit_projector():
    # independent oracle: ||U^T v|| equals ||P v|| for the projector P = U U^T
    rng = np.random.default_rng(7)
    u = random_orthonormal(rng, 5, 2)
    v = rng.standard_normal(5)
    projector = u @ u.T
    expected = np.linalg.norm(projector @ v)
    assert restricted_vector_norm(v, ConeBasis(u)) == pytest.approx(expected, rel=1e-12)


def test_vector_norm_dimension_mismatch():
    with pytest.raises(ValueError):
        restricted_vector_norm(np.ones(3), ConeBasis.identity(2))


# -- restricted eigenvalues and matrix norm --------------------------------------


def test_eigenvalues_identity_basis():
    spec = restricted_eigenvalues(np.diag([1.0, 2.0, 3.0]), ConeBasis.identity(3))
    assert np.allclose(spec.eigenvalues, [1.0, 2.0, 3.0], atol=1e-12)
    assert spec.smallest == pytest.approx(1.0)
    assert spec.largest == pytest.approx(3.0)


def test_eigenvalues_principal_submatrix():
    u = ConeBasis(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
    spec = restricted_eigenvalues(np.diag([1.0, 2.0, 3.0]), u)
    assert np.allclose(spec.eigenvalues, [1.0, 3.0], atol=1e-12)


def test_eigenvalues_match_dense_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = random_symmetric(rng, 6)
        u = random_orthonormal(rng, 6, 3)
        expected = np.sort(np.linalg.eigvalsh(u.T @ a @ u))
        spec = restricted_eigenvalues(a, ConeBasis(u))
        assert np.allclose(spec.eigenvalues, expected, atol=1e-10)


def test_matrix_norm_diagonal():
    assert restricted_matrix_norm(np.diag([1.0, -3.0]), ConeBasis.identity(2)) == pytest.approx(3.0)


def test_matrix_norm_eigenvector_restriction():
    rng = np.random.default_rng(13)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    a = q @ np.diag([2.0, -1.0, 0.5, 0.1]) @ q.T
    u = ConeBasis(q[:, :1])
    assert restricted_matrix_norm(a, u) == pytest.approx(2.0, rel=1e-10)


def test_matrix_norm_is_max_abs_of_spectrum():
    rng = np.random.default_rng(17)
    a = random_symmetric(rng, 5)
    u = ConeBasis(random_orthonormal(rng, 5, 3))
    spec = restricted_eigenvalues(a, u)
    expected = max(abs(spec.smallest), abs(spec.largest))
    assert restricted_matrix_norm(a, u) == pytest.approx(expected, rel=1e-12)


def test_matrix_norm_monotone_in_span():
    rng = np.random.default_rng(19)
    a = random_symmetric(rng, 6)
    full = random_orthonormal(rng, 6, 4)
    for r in range(1, 4):
        smaller = restricted_matrix_norm(a, ConeBasis(full[:, :r]))
        larger = restricted_matrix_norm(a, ConeBasis(full[:, : r + 1]))
        assert larger >= smaller - 1e-12


def test_asymmetric_input_rejected():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="symmetric"):
        restricted_matrix_norm(a, ConeBasis.identity(2))
    with pytest.raises(ValueError, match="symmetric"):
        restricted_eigenvalues(a, ConeBasis.identity(2))


def test_check_symmetric_symmetrizes_rounding_noise():
    rng = np.random.default_rng(23)
    a = random_symmetric(rng, 4)
    noisy = a + 1e-13 * rng.standard_normal((4, 4))
    out = check_symmetric(noisy)
    assert np.array_equal(out, out.T)
    assert np.allclose(out, a, atol=1e-12)


# -- RestrictedSpectrum / condition number ---------------------------------------


def test_spectrum_requires_ascending_order():
    with pytest.raises(ValueError):
        RestrictedSpectrum(np.array([2.0, 1.0]))


def test_condition_number_direct_quotients():
    assert restricted_condition_number(1.0, 1.0) == pytest.approx(1.0)
    assert restricted_condition_number(10.0, 2.0) == pytest.approx(5.0)


def test_condition_number_rejects_bad_inputs():
    with pytest.raises(ValueError):
        restricted_condition_number(1.0, 0.0)
    with pytest.raises(ValueError):
        restricted_condition_number(1.0, 2.0)


def test_condition_number_matches_component_enumeration():
    # brute-force kappa on a synthetic quadratic with known component spectra
    rng = np.random.default_rng(29)
    mats = []
    for _ in range(6):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        mats.append(q @ np.diag(rng.uniform(0.5, 4.0, size=3)) @ q.T)
    mats = np.array(mats)
    k_bound = max(np.linalg.eigvalsh(m)[-1] for m in mats)
    gamma = np.linalg.eigvalsh(mats.mean(axis=0))[0]
    expected = k_bound / gamma
    assert restricted_condition_number(k_bound, gamma) == pytest.approx(expected, rel=1e-12)
