"""Subspace-restricted norms, spectra, and condition numbers.

All restricted quantities are taken relative to an orthonormal basis U of a
subspace: for a vector, ||U^T v||_2; for a symmetric matrix, the spectrum of
U^T A U. With U equal to the identity these reduce to the usual Euclidean /
operator quantities.
"""

from dataclasses import dataclass, field

import numpy as np

ORTHONORMALITY_TOL = 1e-12
SYMMETRY_TOL = 1e-10


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a, name="matrix", tol=SYMMETRY_TOL):
    """Validate symmetry of a square matrix and return (A + A^T)/2."""
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if float(np.abs(a - a.T).max(initial=0.0)) > tol * scale:
        raise ValueError(f"{name} is not symmetric to tolerance {tol:g}")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class ConeBasis:
    """Orthonormal basis (columns) of the subspace restricting the geometry."""

    columns: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = _as_matrix(self.columns, "basis")
        p, r = u.shape
        if not 1 <= r <= p:
            raise ValueError(f"basis must have 1 <= r <= p columns, got shape {u.shape}")
        gram = u.T @ u
        if float(np.abs(gram - np.eye(r)).max()) > ORTHONORMALITY_TOL:
            raise ValueError(
                f"basis columns are not orthonormal to tolerance {ORTHONORMALITY_TOL:g}"
            )
        object.__setattr__(self, "columns", u)

    @property
    def ambient_dim(self):
        return self.columns.shape[0]

    @property
    def subspace_dim(self):
        return self.columns.shape[1]

    @classmethod
    def identity(cls, p):
        if p < 1:
            raise ValueError("dimension must be positive")
        return cls(np.eye(int(p)))


@dataclass(frozen=True)
class RestrictedSpectrum:
    """Eigenvalues of U^T A U in ascending order."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size < 1:
            raise ValueError("eigenvalues must form a non-empty 1-d sequence")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def smallest(self):
        return float(self.eigenvalues[0])

    @property
    def largest(self):
        return float(self.eigenvalues[-1])


def _basis_columns(basis, p):
    if basis is None:
        return None
    if not isinstance(basis, ConeBasis):
        basis = ConeBasis(basis)
    if basis.ambient_dim != p:
        raise ValueError(
            f"basis ambient dimension {basis.ambient_dim} does not match vector dimension {p}"
        )
    return basis.columns


def restricted_vector_norm(v, basis=None):
    """||U^T v||_2; plain Euclidean norm when basis is None/identity."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("v must be a 1-d array")
    u = _basis_columns(basis, v.shape[0])
    if u is None:
        return float(np.linalg.norm(v))
    return float(np.linalg.norm(u.T @ v))


def restricted_eigenvalues(a, basis=None):
    """Spectrum of U^T A U (A symmetrized first), ascending."""
    a = check_symmetric(a, "A")
    u = _basis_columns(basis, a.shape[0])
    if u is not None:
        a = u.T @ a @ u
        a = 0.5 * (a + a.T)
    return RestrictedSpectrum(np.linalg.eigvalsh(a))


def restricted_matrix_norm(a, basis=None):
    """Operator norm of U^T A U, i.e. the largest |eigenvalue|."""
    spec = restricted_eigenvalues(a, basis)
    return float(max(abs(spec.smallest), abs(spec.largest)))


def restricted_condition_number(curvature_bound, strong_convexity):
    """Ratio K/gamma of a component-curvature bound to a strong-convexity bound."""
    k = float(curvature_bound)
    g = float(strong_convexity)
    if not np.isfinite(g) or g <= 0.0:
        raise ValueError(f"strong-convexity bound must be positive, got {g!r}")
    if not np.isfinite(k) or k < g:
        raise ValueError(f"curvature bound must satisfy K >= gamma > 0, got K={k!r}, gamma={g!r}")
    return k / g
