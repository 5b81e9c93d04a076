"""Finite-sum objectives F(x) = (1/n) sum_i f_i(x) with per-component oracles.

Supported families:

* generalized linear models f_i(x) = Phi(a_i^T x) - b_i a_i^T x with
  Phi(t) = t^2/2 ("ols"), log(1 + e^t) ("logistic"), e^t ("poisson");
* smoothed support-vector machines with a squared hinge,
  f_i(x) = C * max(0, 1 - b_i a_i^T x)^2 + ||x||^2 / 2 ("svm"), where the
  ridge term is folded into every component so the uniform average matches
  the usual penalized primal objective;
* synthetic strongly convex quadratics f_i(x) = x^T A_i x / 2 - c_i^T x with
  a closed-form common minimizer ("quadratic").

Every oracle exposes multiplicity-weighted aggregation primitives so that
full evaluations and sub-sampled averages share one code path.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .geometry import ConeBasis

GLM_KINDS = ("ols", "logistic", "poisson")
KINDS = GLM_KINDS + ("svm", "quadratic")

# exp(t) overflows float64 just above 709; refuse earlier with a clear error.
POISSON_EXP_LIMIT = 700.0

_SQRT3 = float(np.sqrt(3.0))


def _check_vector(x, p, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (p,):
        raise ValueError(f"{name} must have shape ({p},), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains non-finite entries")
    return x


def validate_labels(kind, labels):
    """Check the label vector against the domain of the objective family."""
    b = np.asarray(labels, dtype=float)
    if b.ndim != 1:
        raise ValueError("labels must be a 1-d array")
    if not np.isfinite(b).all():
        raise ValueError("labels contain non-finite entries")
    if kind == "logistic":
        if not np.isin(b, (0.0, 1.0)).all():
            raise ValueError("logistic labels must lie in {0, 1}")
    elif kind == "poisson":
        if (b < 0).any() or (b != np.round(b)).any():
            raise ValueError("poisson labels must be non-negative integers")
    elif kind == "svm":
        if not np.isin(b, (-1.0, 1.0)).all():
            raise ValueError("svm labels must lie in {-1, +1}")
    elif kind not in ("ols",):
        raise ValueError(f"unknown kind {kind!r}")
    return b


@dataclass(frozen=True)
class Dataset:
    """Feature rows a_i (n x p) and labels b_i (n,)."""

    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.features, dtype=float)
        b = np.asarray(self.labels, dtype=float)
        if a.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if b.shape != (a.shape[0],):
            raise ValueError(
                f"labels shape {b.shape} does not match {a.shape[0]} feature rows"
            )
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("dataset contains non-finite entries")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("dataset must have at least one row and one column")
        object.__setattr__(self, "features", a)
        object.__setattr__(self, "labels", b)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]


class ComponentOracle:
    """Base interface: per-component values/derivatives plus weighted sums.

    ``weighted_*`` methods compute sum_i w_i * (component quantity); full
    evaluations use w = 1/n and sub-sampled averages use multiplicity/|S|,
    so both flow through identical reductions.
    """

    n = None
    p = None
    kind = None

    # -- per-component primitives -------------------------------------------------
    def component_value(self, i, x):
        raise NotImplementedError

    def component_gradient(self, i, x):
        raise NotImplementedError

    def component_hessian(self, i, x):
        raise NotImplementedError

    def _check_index(self, i):
        i = int(i)
        if not 0 <= i < self.n:
            raise ValueError(f"component index {i} out of range [0, {self.n})")
        return i

    # -- weighted aggregation -----------------------------------------------------
    def weighted_value(self, x, weights):
        raise NotImplementedError

    def weighted_gradient(self, x, weights):
        raise NotImplementedError

    def weighted_hessian(self, x, weights):
        raise NotImplementedError

    def _uniform_weights(self):
        return np.full(self.n, 1.0 / self.n)

    # -- full (uniformly averaged) evaluations ------------------------------------
    def value(self, x):
        return self.weighted_value(x, self._uniform_weights())

    def gradient(self, x):
        return self.weighted_gradient(x, self._uniform_weights())

    def hessian(self, x):
        return self.weighted_hessian(x, self._uniform_weights())

    # -- analysis helpers ----------------------------------------------------------
    def component_gradient_norms(self, x):
        """All ||grad f_i(x)||_2 as an (n,) array."""
        x = _check_vector(x, self.p)
        return np.array(
            [np.linalg.norm(self.component_gradient(i, x)) for i in range(self.n)]
        )

    def max_component_gradient_norm(self, x):
        return float(self.component_gradient_norms(x).max())

    def component_spectral_bounds(self, x, basis=None):
        """All ||U^T grad^2 f_i(x) U||_2 as an (n,) array."""
        x = _check_vector(x, self.p)
        u = None if basis is None else _basis_matrix(basis, self.p)
        out = np.empty(self.n)
        for i in range(self.n):
            h = self.component_hessian(i, x)
            if u is not None:
                h = u.T @ h @ u
            ev = np.linalg.eigvalsh(0.5 * (h + h.T))
            out[i] = max(abs(ev[0]), abs(ev[-1]))
        return out

    def curvature_bounds(self, x, basis=None):
        """(K, gamma): max restricted component curvature and the restricted
        smallest eigenvalue of the averaged Hessian at x."""
        x = _check_vector(x, self.p)
        big = float(self.component_spectral_bounds(x, basis).max())
        h = self.hessian(x)
        u = None if basis is None else _basis_matrix(basis, self.p)
        if u is not None:
            h = u.T @ h @ u
        gamma = float(np.linalg.eigvalsh(0.5 * (h + h.T))[0])
        return big, gamma

    def second_moment(self, x, basis=None):
        """(1/n) sum_i (U^T grad^2 f_i(x) U)^2, the averaged squared restricted
        component Hessian (drives the intrinsic-dimension sample sizes)."""
        x = _check_vector(x, self.p)
        u = None if basis is None else _basis_matrix(basis, self.p)
        r = self.p if u is None else u.shape[1]
        acc = np.zeros((r, r))
        for i in range(self.n):
            h = self.component_hessian(i, x)
            if u is not None:
                h = u.T @ h @ u
            h = 0.5 * (h + h.T)
            acc += h @ h
        acc /= self.n
        return 0.5 * (acc + acc.T)

    def hessian_lipschitz_bound(self, domain="l1-ball"):
        """Upper bound on the per-component Hessian Lipschitz constant, or
        None when the family has no such constant (svm squared hinge)."""
        return None


def _basis_matrix(basis, p):
    if isinstance(basis, ConeBasis):
        u = basis.columns
    else:
        u = ConeBasis(basis).columns
    if u.shape[0] != p:
        raise ValueError(f"basis ambient dimension {u.shape[0]} does not match p={p}")
    return u


class GLMOracle(ComponentOracle):
    """f_i(x) = Phi(a_i^T x) - b_i a_i^T x for a scalar link Phi."""

    def __init__(self, kind, dataset):
        if kind not in GLM_KINDS:
            raise ValueError(f"kind must be one of {GLM_KINDS}, got {kind!r}")
        if not isinstance(dataset, Dataset):
            dataset = Dataset(*dataset)
        validate_labels(kind, dataset.labels)
        self.kind = kind
        self.dataset = dataset
        self.n = dataset.n
        self.p = dataset.p
        self._row_norms = np.linalg.norm(dataset.features, axis=1)

    # scalar link and its derivatives, vectorized over t
    def _phi(self, t):
        if self.kind == "ols":
            return 0.5 * t * t
        if self.kind == "logistic":
            return np.logaddexp(0.0, t)
        self._guard_exp(t)
        return np.exp(t)

    def _phi1(self, t):
        if self.kind == "ols":
            return np.asarray(t, dtype=float)
        if self.kind == "logistic":
            return expit(t)
        self._guard_exp(t)
        return np.exp(t)

    def _phi2(self, t):
        if self.kind == "ols":
            return np.ones_like(np.asarray(t, dtype=float))
        if self.kind == "logistic":
            return expit(t) * expit(-t)
        self._guard_exp(t)
        return np.exp(t)

    def _guard_exp(self, t):
        m = float(np.max(np.asarray(t, dtype=float), initial=-np.inf))
        if m > POISSON_EXP_LIMIT:
            raise OverflowError(
                f"poisson link argument {m:.3g} exceeds {POISSON_EXP_LIMIT:g}; "
                "rescale the features or restrict the domain"
            )

    def _margins(self, x):
        x = _check_vector(x, self.p)
        return self.dataset.features @ x

    def component_value(self, i, x):
        i = self._check_index(i)
        t = float(self.dataset.features[i] @ _check_vector(x, self.p))
        return float(self._phi(t) - self.dataset.labels[i] * t)

    def component_gradient(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        t = float(self.dataset.features[i] @ x)
        return (float(self._phi1(t)) - self.dataset.labels[i]) * self.dataset.features[i]

    def component_hessian(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        a = self.dataset.features[i]
        t = float(a @ x)
        return float(self._phi2(t)) * np.outer(a, a)

    def weighted_value(self, x, weights):
        t = self._margins(x)
        return float(weights @ (self._phi(t) - self.dataset.labels * t))

    def weighted_gradient(self, x, weights):
        t = self._margins(x)
        coef = (self._phi1(t) - self.dataset.labels) * weights
        return self.dataset.features.T @ coef

    def weighted_hessian(self, x, weights):
        t = self._margins(x)
        coef = self._phi2(t) * weights
        a = self.dataset.features
        h = a.T @ (coef[:, None] * a)
        return 0.5 * (h + h.T)

    def component_gradient_norms(self, x):
        t = self._margins(x)
        return np.abs(self._phi1(t) - self.dataset.labels) * self._row_norms

    def component_spectral_bounds(self, x, basis=None):
        t = self._margins(x)
        if basis is None:
            sq = self._row_norms**2
        else:
            u = _basis_matrix(basis, self.p)
            sq = np.linalg.norm(self.dataset.features @ u, axis=1) ** 2
        return self._phi2(t) * sq

    def second_moment(self, x, basis=None):
        # (phi'' u u^T)^2 = phi''^2 ||u||^2 u u^T for the restricted row u
        t = self._margins(x)
        rows = (
            self.dataset.features
            if basis is None
            else self.dataset.features @ _basis_matrix(basis, self.p)
        )
        coef = self._phi2(t) ** 2 * np.linalg.norm(rows, axis=1) ** 2 / self.n
        v = rows.T @ (coef[:, None] * rows)
        return 0.5 * (v + v.T)

    def hessian_lipschitz_bound(self, domain="l1-ball"):
        cubes = self._row_norms**3
        if self.kind == "ols":
            return 0.0
        if self.kind == "logistic":
            # |Phi'''| <= 1/(6 sqrt 3) everywhere for the logistic link
            return float(cubes.max()) / (6.0 * _SQRT3)
        if domain != "l1-ball":
            raise ValueError("poisson Lipschitz bound is only available over the unit l1 ball")
        inf_norms = np.abs(self.dataset.features).max(axis=1)
        return float((np.exp(inf_norms) * cubes).max())


class SvmOracle(ComponentOracle):
    """Squared-hinge SVM components with the ridge folded into each f_i."""

    kind = "svm"

    def __init__(self, dataset, penalty=1.0):
        if not isinstance(dataset, Dataset):
            dataset = Dataset(*dataset)
        validate_labels("svm", dataset.labels)
        if not penalty > 0:
            raise ValueError(f"penalty must be positive, got {penalty!r}")
        self.dataset = dataset
        self.penalty = float(penalty)
        self.n = dataset.n
        self.p = dataset.p
        self._row_norms = np.linalg.norm(dataset.features, axis=1)

    def _active(self, x):
        x = _check_vector(x, self.p)
        t = self.dataset.features @ x
        return t, self.dataset.labels * t < 1.0

    def hinge_margin(self, x):
        """Smallest |b_i a_i^T x - 1|: distance of x from the hinge kinks."""
        t, _ = self._active(x)
        return float(np.abs(self.dataset.labels * t - 1.0).min())

    def component_value(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        t = float(self.dataset.features[i] @ x)
        gap = max(0.0, 1.0 - self.dataset.labels[i] * t)
        return self.penalty * gap * gap + 0.5 * float(x @ x)

    def component_gradient(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        a = self.dataset.features[i]
        b = self.dataset.labels[i]
        t = float(a @ x)
        g = x.copy()
        if b * t < 1.0:
            g = g + 2.0 * self.penalty * (t - b) * a
        return g

    def component_hessian(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        a = self.dataset.features[i]
        h = np.eye(self.p)
        if self.dataset.labels[i] * float(a @ x) < 1.0:
            h = h + 2.0 * self.penalty * np.outer(a, a)
        return h

    def weighted_value(self, x, weights):
        x = _check_vector(x, self.p)
        t, act = self._active(x)
        gap = np.where(act, 1.0 - self.dataset.labels * t, 0.0)
        total = float(np.sum(weights))
        return float(weights @ (self.penalty * gap * gap)) + 0.5 * total * float(x @ x)

    def weighted_gradient(self, x, weights):
        x = _check_vector(x, self.p)
        t, act = self._active(x)
        coef = 2.0 * self.penalty * np.where(act, t - self.dataset.labels, 0.0) * weights
        return self.dataset.features.T @ coef + float(np.sum(weights)) * x

    def weighted_hessian(self, x, weights):
        x = _check_vector(x, self.p)
        _, act = self._active(x)
        coef = 2.0 * self.penalty * np.where(act, weights, 0.0)
        a = self.dataset.features
        h = a.T @ (coef[:, None] * a) + float(np.sum(weights)) * np.eye(self.p)
        return 0.5 * (h + h.T)

    def component_gradient_norms(self, x):
        x = _check_vector(x, self.p)
        t, act = self._active(x)
        coef = 2.0 * self.penalty * np.where(act, t - self.dataset.labels, 0.0)
        # ||coef * a + x||^2 expanded with a^T x = t
        sq = coef**2 * self._row_norms**2 + 2.0 * coef * t + float(x @ x)
        return np.sqrt(np.maximum(sq, 0.0))

    def component_spectral_bounds(self, x, basis=None):
        _, act = self._active(x)
        if basis is None:
            sq = self._row_norms**2
        else:
            u = _basis_matrix(basis, self.p)
            sq = np.linalg.norm(self.dataset.features @ u, axis=1) ** 2
        return np.where(act, 2.0 * self.penalty * sq, 0.0) + 1.0

    def hessian_lipschitz_bound(self, domain="l1-ball"):
        return None


class QuadraticOracle(ComponentOracle):
    """f_i(x) = x^T A_i x / 2 - c_i^T x with symmetric PSD A_i."""

    kind = "quadratic"

    def __init__(self, matrices, linear):
        a = np.asarray(matrices, dtype=float)
        c = np.asarray(linear, dtype=float)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ValueError("matrices must have shape (n, p, p)")
        if c.shape != a.shape[:2]:
            raise ValueError("linear terms must have shape (n, p)")
        if not (np.isfinite(a).all() and np.isfinite(c).all()):
            raise ValueError("quadratic data contains non-finite entries")
        sym_err = np.abs(a - np.transpose(a, (0, 2, 1))).max()
        if sym_err > 1e-10 * max(1.0, float(np.abs(a).max())):
            raise ValueError("component matrices must be symmetric")
        self.matrices = 0.5 * (a + np.transpose(a, (0, 2, 1)))
        self.linear = c
        self.n = a.shape[0]
        self.p = a.shape[1]

    @property
    def solution(self):
        """Common minimizer of the uniform average (unconstrained)."""
        return np.linalg.solve(self.matrices.mean(axis=0), self.linear.mean(axis=0))

    def component_value(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        return float(0.5 * x @ self.matrices[i] @ x - self.linear[i] @ x)

    def component_gradient(self, i, x):
        i = self._check_index(i)
        x = _check_vector(x, self.p)
        return self.matrices[i] @ x - self.linear[i]

    def component_hessian(self, i, x):
        i = self._check_index(i)
        _check_vector(x, self.p)
        return self.matrices[i].copy()

    def weighted_value(self, x, weights):
        x = _check_vector(x, self.p)
        h = np.tensordot(weights, self.matrices, axes=1)
        return float(0.5 * x @ h @ x - (weights @ self.linear) @ x)

    def weighted_gradient(self, x, weights):
        x = _check_vector(x, self.p)
        h = np.tensordot(weights, self.matrices, axes=1)
        return h @ x - weights @ self.linear

    def weighted_hessian(self, x, weights):
        _check_vector(x, self.p)
        h = np.tensordot(weights, self.matrices, axes=1)
        return 0.5 * (h + h.T)

    def component_gradient_norms(self, x):
        x = _check_vector(x, self.p)
        g = np.einsum("ijk,k->ij", self.matrices, x) - self.linear
        return np.linalg.norm(g, axis=1)

    def component_spectral_bounds(self, x, basis=None):
        _check_vector(x, self.p)
        out = np.empty(self.n)
        for i in range(self.n):
            h = self.matrices[i]
            if basis is not None:
                u = _basis_matrix(basis, self.p)
                h = u.T @ h @ u
            ev = np.linalg.eigvalsh(h)
            out[i] = max(abs(ev[0]), abs(ev[-1]))
        return out

    def hessian_lipschitz_bound(self, domain="l1-ball"):
        return 0.0


# ---------------------------------------------------------------------------
# functional wrappers over the oracle interface
# ---------------------------------------------------------------------------

_WHAT = ("value", "gradient", "hessian")


def component_eval(oracle, i, x, what="value"):
    """Evaluate one component: value, gradient, or Hessian at x."""
    if what not in _WHAT:
        raise ValueError(f"what must be one of {_WHAT}, got {what!r}")
    return getattr(oracle, f"component_{what}")(i, x)


def full_eval(oracle, x, what="value"):
    """Evaluate the uniform average over all components at x."""
    if what not in _WHAT:
        raise ValueError(f"what must be one of {_WHAT}, got {what!r}")
    return getattr(oracle, what)(x)


def gradient_bound(oracle, x=None, mode="uniform"):
    """Upper bound G with ||grad f_i|| <= G for all components.

    mode="uniform": closed-form bound valid for every x in the unit l1 ball
    (GLM families only). mode="pointwise": bound at the supplied x (svm only).
    """
    if mode == "uniform":
        if oracle.kind not in GLM_KINDS:
            raise ValueError(f"uniform gradient bound requires a GLM family, got {oracle.kind!r}")
        a = oracle.dataset.features
        b = np.abs(oracle.dataset.labels)
        norms = np.linalg.norm(a, axis=1)
        inf_norms = np.abs(a).max(axis=1)
        if oracle.kind == "ols":
            peak = inf_norms
        elif oracle.kind == "logistic":
            peak = expit(inf_norms)
        else:
            if float(inf_norms.max()) > POISSON_EXP_LIMIT:
                raise OverflowError("poisson link bound overflows; rescale the features")
            peak = np.exp(inf_norms)
        return float(((peak + b) * norms).max())
    if mode == "pointwise":
        if oracle.kind != "svm":
            raise ValueError(f"pointwise gradient bound requires the svm family, got {oracle.kind!r}")
        if x is None:
            raise ValueError("pointwise gradient bound requires x")
        x = _check_vector(x, oracle.p)
        a = oracle.dataset.features
        norms = np.linalg.norm(a, axis=1)
        c = oracle.penalty
        return float(
            np.linalg.norm(x) * float((2.0 * c * norms**2 + 1.0).max())
            + 2.0 * c * float((np.abs(oracle.dataset.labels) * norms).max())
        )
    raise ValueError(f"mode must be 'uniform' or 'pointwise', got {mode!r}")


# ---------------------------------------------------------------------------
# synthetic problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticProblem:
    oracle: ComponentOracle
    solution: np.ndarray  # None for families without a closed form


def _synthetic_features(rng, n, p, conditioning):
    """Unit-norm rows with anisotropy controlled by `conditioning`."""
    z = rng.standard_normal((n, p))
    if conditioning > 1.0:
        scales = np.sqrt(np.logspace(0.0, -np.log10(conditioning), p))
        z = z * scales
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0] = 1.0
    return z / norms[:, None]


def make_synthetic(kind, n, p, conditioning=1.0, seed=0, svm_penalty=1.0):
    """Deterministic synthetic problem of the requested family.

    Returns a SyntheticProblem; `solution` is the exact minimizer for
    "quadratic" and None otherwise (use the reference minimizer there).
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if conditioning < 1.0:
        raise ValueError("conditioning must be >= 1")
    rng = np.random.default_rng(seed)

    if kind == "quadratic":
        mats = np.empty((n, p, p))
        eigs = np.logspace(0.0, np.log10(conditioning), p) if p > 1 else np.ones(1)
        for i in range(n):
            q, _ = np.linalg.qr(rng.standard_normal((p, p)))
            scale = rng.uniform(0.75, 1.25)
            mats[i] = (q * (scale * eigs)) @ q.T
            mats[i] = 0.5 * (mats[i] + mats[i].T)
        lin = rng.standard_normal((n, p))
        oracle = QuadraticOracle(mats, lin)
        return SyntheticProblem(oracle, oracle.solution)

    feats = _synthetic_features(rng, n, p, conditioning)
    w = rng.standard_normal(p)
    w *= 0.5 / np.linalg.norm(w)
    margins = feats @ w

    if kind == "ols":
        labels = margins + 0.1 * rng.standard_normal(n)
    elif kind == "logistic":
        labels = (rng.random(n) < expit(margins)).astype(float)
        if labels.min() == labels.max():  # force both classes at tiny n
            labels[0] = 1.0 - labels[0]
    elif kind == "poisson":
        labels = rng.poisson(np.exp(margins)).astype(float)
    else:  # svm
        labels = np.sign(margins + 0.3 * rng.standard_normal(n))
        labels[labels == 0] = 1.0
        if labels.min() == labels.max():
            labels[0] = -labels[0]
        return SyntheticProblem(SvmOracle(Dataset(feats, labels), svm_penalty), None)

    return SyntheticProblem(GLMOracle(kind, Dataset(feats, labels)), None)


def make_oracle(kind, dataset, svm_penalty=1.0):
    """Wrap a Dataset in the oracle for `kind` (GLM families and svm)."""
    if kind in GLM_KINDS:
        return GLMOracle(kind, dataset)
    if kind == "svm":
        return SvmOracle(dataset, svm_penalty)
    raise ValueError(f"kind must be one of {GLM_KINDS + ('svm',)}, got {kind!r}")


# ---------------------------------------------------------------------------
# CSV dataset format: header "b,a1,...,ap", one row per component
# ---------------------------------------------------------------------------


def save_dataset_csv(dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["b"] + [f"a{j + 1}" for j in range(dataset.p)])
        for i in range(dataset.n):
            row = [format(dataset.labels[i], ".17g")]
            row += [format(v, ".17g") for v in dataset.features[i]]
            writer.writerow(row)


def load_dataset_csv(path, kind=None):
    """Read a dataset; when `kind` is given, labels are validated for it."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    p = len(header) - 1
    expected = ["b"] + [f"a{j + 1}" for j in range(p)]
    if p < 1 or [h.strip() for h in header] != expected:
        raise ValueError(f"{path}: header must be 'b,a1,...,ap', got {','.join(header)!r}")
    data = np.empty((len(rows), p + 1))
    for i, row in enumerate(rows):
        if len(row) != p + 1:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, expected {p + 1}")
        try:
            data[i] = [float(v) for v in row]
        except ValueError as exc:
            raise ValueError(f"{path}: row {i + 2}: {exc}") from None
    dataset = Dataset(data[:, 1:], data[:, 0])
    if kind is not None:
        validate_labels(kind, dataset.labels)
    return dataset
