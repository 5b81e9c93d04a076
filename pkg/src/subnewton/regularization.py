"""Eigenvalue regularization of estimated Hessians.

Two operators: a spectral floor that lifts every eigenvalue below lambda up
to lambda (keeping eigenvectors), and a ridge shift H + lambda I. The floor
threshold can be chosen from a pilot estimate so the floored spectrum stays
inside the range the contraction analysis needs.
"""

import math

import numpy as np

from .errors import DegeneratePilotError
from .geometry import check_symmetric

THRESHOLD_RULES = ("global", "local")

# Relative nudge making the strict inequality of the local threshold rule
# hold when the two accuracy levels coincide.
_STRICTNESS_NUDGE = 1e-12


def spectral_floor(hessian, lam):
    """Replace eigenvalues of H below lam by lam, keeping eigenvectors.

    The map is idempotent and 1-Lipschitz in the Frobenius norm.
    """
    lam = float(lam)
    if not lam > 0.0:
        raise ValueError(f"floor level must be positive, got {lam!r}")
    h = check_symmetric(hessian, "hessian")
    try:
        eigvals, eigvecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigendecomposition failed: {exc}") from exc
    floored = np.maximum(eigvals, lam)
    out = (eigvecs * floored) @ eigvecs.T
    return 0.5 * (out + out.T)


def ridge_shift(hessian, lam):
    """H + lam * I with lam >= 0."""
    lam = float(lam)
    if not lam >= 0.0 or not np.isfinite(lam):
        raise ValueError(f"ridge level must be finite and >= 0, got {lam!r}")
    h = check_symmetric(hessian, "hessian")
    return h + lam * np.eye(h.shape[0])


def spectral_threshold(pilot_hessian, epsilon, epsilon0, rule="global"):
    """Floor level derived from a pilot Hessian estimate.

    `epsilon` is the accuracy of the main estimate, `epsilon0` the accuracy
    of the pilot. The "global" rule returns the smallest admissible level
    ((1-eps)/(1-eps0)) * lambda_min(pilot); the "local" rule multiplies by
    (6 sqrt(p) + 3)/(6 sqrt(p) + 2) and nudges upward so the required strict
    inequality holds.
    """
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"rule must be one of {THRESHOLD_RULES}, got {rule!r}")
    eps = float(epsilon)
    eps0 = float(epsilon0)
    if not 0.0 < eps < 1.0 or not 0.0 < eps0 < 1.0:
        raise ValueError("epsilon and epsilon0 must lie in (0, 1)")
    h = check_symmetric(pilot_hessian, "pilot hessian")
    lam_min = float(np.linalg.eigvalsh(h)[0])
    if lam_min <= 0.0:
        raise DegeneratePilotError(
            f"pilot smallest eigenvalue is {lam_min:.6g}; cannot derive a positive floor"
        )
    level = (1.0 - eps) / (1.0 - eps0) * lam_min
    if rule == "local":
        root = 6.0 * math.sqrt(h.shape[0])
        level *= (root + 3.0) / (root + 2.0)
        level *= 1.0 + _STRICTNESS_NUDGE
    return level
