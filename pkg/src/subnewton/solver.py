"""Iteration drivers for sub-sampled Newton-type methods.

Each driver minimizes F(x) = (1/n) sum_i f_i(x) by repeatedly solving the
local quadratic model

    min_{z in X}  g^T (z - x_k) + (z - x_k)^T H (z - x_k) / 2

with unit step length, where H is a sub-sampled (optionally regularized)
Hessian estimate and g is the full or sub-sampled gradient:

* "fixed":     sampled Hessian at a fixed accuracy, full gradient;
* "scheduled": like "fixed" with a per-iteration accuracy schedule;
* "spectral":  fixed accuracy plus a spectral floor whose level comes from a
               pilot estimate drawn each iteration;
* "ridge":     fixed accuracy plus a constant ridge shift;
* "split":     sampled gradient and Hessian from independent draws, with a
               geometrically tightening gradient accuracy;
* "shared":    one shared draw for both, with a geometrically tightening
               common accuracy.

All randomness flows through per-(iteration, purpose) Philox streams derived
from the config seed, so a (config, seed) pair fully determines the run.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import kernels, problems, regularization, sampling
from .errors import CurvatureError, DegeneratePilotError, SubproblemError

DRIVERS = ("fixed", "scheduled", "spectral", "ridge", "split", "shared")
SCHEDULES = ("constant", "geometric", "log_global", "log_local")
REGIMES = ("global", "local")

DEFAULT_INNER_TOL = 1e-10
DEFAULT_INNER_CAP = 100_000


# ---------------------------------------------------------------------------
# constraint sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Unconstrained:
    kind = "unconstrained"

    def project(self, x):
        return np.asarray(x, dtype=float).copy()

    def contains(self, x, tol=1e-12):
        return bool(np.isfinite(np.asarray(x, dtype=float)).all())


@dataclass(frozen=True)
class L1Ball:
    radius: float
    kind = "l1_ball"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"l1 radius must be positive, got {self.radius!r}")

    def project(self, x):
        return kernels.project_l1(np.asarray(x, dtype=float), self.radius)

    def contains(self, x, tol=1e-12):
        return float(np.abs(np.asarray(x, dtype=float)).sum()) <= self.radius + tol * (
            1.0 + self.radius
        )


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray
    kind = "box"

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        lo, hi = np.broadcast_arrays(lo, hi)
        if (lo > hi).any():
            raise ValueError("box lower bounds exceed upper bounds")
        object.__setattr__(self, "lower", lo.copy())
        object.__setattr__(self, "upper", hi.copy())

    def _bounds(self, p):
        lo = np.broadcast_to(self.lower, (p,))
        hi = np.broadcast_to(self.upper, (p,))
        return lo, hi

    def project(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self._bounds(x.shape[0])
        return kernels.project_box(x, lo, hi)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        lo, hi = self._bounds(x.shape[0])
        scale = tol * (1.0 + float(np.abs(x).max(initial=0.0)))
        return bool((x >= lo - scale).all() and (x <= hi + scale).all())


# ---------------------------------------------------------------------------
# accuracy schedules
# ---------------------------------------------------------------------------


def epsilon_schedule(schedule, k, epsilon=None, rho=None):
    """Per-iteration accuracy target.

    "constant": epsilon; "geometric": rho^k * epsilon;
    "log_global": 1/(1 + 2 ln(4 + k)); "log_local": 1/(1 + 4 ln(4 + k)).
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")
    k = int(k)
    if k < 0:
        raise ValueError(f"iteration index must be >= 0, got {k}")
    if schedule == "log_global":
        return 1.0 / (1.0 + 2.0 * math.log(4.0 + k))
    if schedule == "log_local":
        return 1.0 / (1.0 + 4.0 * math.log(4.0 + k))
    if epsilon is None or not 0.0 < float(epsilon) < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if schedule == "constant":
        return float(epsilon)
    if rho is None or not 0.0 < float(rho) < 1.0:
        raise ValueError(f"geometric schedule needs rho in (0, 1), got {rho!r}")
    return float(rho) ** k * float(epsilon)


# ---------------------------------------------------------------------------
# quadratic model solve
# ---------------------------------------------------------------------------


def solve_quadratic_model(
    x_k, g, hessian, constraint=None, inner_tol=DEFAULT_INNER_TOL, inner_cap=DEFAULT_INNER_CAP
):
    """Unit-step minimizer of the local quadratic model over the constraint.

    Unconstrained: Cholesky solve with one refinement pass; the residual
    ||H step + g|| must reach inner_tol * (1 + ||g||) or CurvatureError is
    raised. Constrained: accelerated projected gradient run to the same
    scaled tolerance on the fixed-point residual; exceeding inner_cap raises
    SubproblemError. Returns (x_next, info) with info carrying "residual"
    and "inner_iterations".
    """
    x_k = np.asarray(x_k, dtype=float)
    g = np.asarray(g, dtype=float)
    h = np.asarray(hessian, dtype=float)
    if constraint is None:
        constraint = Unconstrained()
    tol = float(inner_tol) * (1.0 + float(np.linalg.norm(g)))

    if isinstance(constraint, Unconstrained):
        try:
            factor = scipy.linalg.cho_factor(h, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise CurvatureError(f"model Hessian is not positive definite: {exc}") from exc
        step = scipy.linalg.cho_solve(factor, -g, check_finite=False)
        resid = float(np.linalg.norm(h @ step + g))
        if resid > tol:
            step = step + scipy.linalg.cho_solve(factor, -(g + h @ step), check_finite=False)
            resid = float(np.linalg.norm(h @ step + g))
        if not np.isfinite(resid) or resid > tol:
            raise CurvatureError(
                f"model solve residual {resid:.3e} exceeds tolerance {tol:.3e}; "
                "the Hessian estimate is numerically singular"
            )
        return x_k + step, {"residual": resid, "inner_iterations": 0}

    eigvals = np.linalg.eigvalsh(0.5 * (h + h.T))
    lip = float(eigvals[-1])
    if not lip > 0.0:
        raise CurvatureError("model Hessian has no positive curvature")
    if isinstance(constraint, L1Ball):
        args = (kernels.KIND_L1, constraint.radius, None, None)
    elif isinstance(constraint, Box):
        lo, hi = constraint._bounds(x_k.shape[0])
        args = (kernels.KIND_BOX, 0.0, np.ascontiguousarray(lo), np.ascontiguousarray(hi))
    else:
        raise ValueError(f"unsupported constraint {constraint!r}")
    z, iters, resid = kernels.solve_projected_quadratic(
        x_k, g, h, lip, args[0], args[1], args[2], args[3], tol, int(inner_cap)
    )
    if resid > tol:
        raise SubproblemError(
            f"inner solver stopped at residual {resid:.3e} > {tol:.3e} "
            f"after {iters} iterations"
        )
    return np.asarray(z), {"residual": float(resid), "inner_iterations": int(iters)}


# ---------------------------------------------------------------------------
# driver configuration and trace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmConfig:
    """Everything a driver run depends on besides the problem itself."""

    driver: str = "fixed"
    epsilon: float = 0.25
    delta: float = 0.1
    schedule: str = "constant"
    rho: float = None
    epsilon0: float = 0.5  # pilot accuracy for the spectral driver
    epsilon_grad: float = None  # initial gradient accuracy for "split"
    ridge: float = None
    spectral_rule: str = "global"
    variant: str = "basic"
    replacement: str = "with"
    kappa: float = None
    kappa_first_power: bool = False
    gradient_bound: object = "max"  # "max" | "uniform" | "pointwise" | number
    sample_size: object = None  # None | "full" | int override
    max_iterations: int = 50
    step_tol: float = 1e-12
    inner_tol: float = DEFAULT_INNER_TOL
    inner_cap: int = DEFAULT_INNER_CAP
    seed: int = 0

    def __post_init__(self):
        if self.driver not in DRIVERS:
            raise ValueError(f"driver must be one of {DRIVERS}, got {self.driver!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        needs_rho = (
            (self.driver == "scheduled" and self.schedule == "geometric")
            or self.driver in ("split", "shared")
        )
        if needs_rho and (self.rho is None or not 0.0 < self.rho < 1.0):
            raise ValueError(f"driver {self.driver!r} needs rho in (0, 1), got {self.rho!r}")
        if self.driver == "spectral" and not 0.0 < self.epsilon0 < 1.0:
            raise ValueError(f"epsilon0 must lie in (0, 1), got {self.epsilon0!r}")
        if self.driver == "split":
            if self.epsilon_grad is None or not self.epsilon_grad > 0.0:
                raise ValueError(
                    f"split driver needs epsilon_grad > 0, got {self.epsilon_grad!r}"
                )
        if self.driver == "ridge":
            if self.ridge is None or not self.ridge >= 0.0:
                raise ValueError(f"ridge driver needs ridge >= 0, got {self.ridge!r}")
        if self.spectral_rule not in regularization.THRESHOLD_RULES:
            raise ValueError(f"spectral_rule must be global or local, got {self.spectral_rule!r}")
        if self.variant not in sampling.HESSIAN_VARIANTS:
            raise ValueError(
                f"variant must be one of {sampling.HESSIAN_VARIANTS}, got {self.variant!r}"
            )
        if self.replacement not in sampling.SCHEMES:
            raise ValueError(f"replacement must be with/without, got {self.replacement!r}")
        if self.kappa is not None and not self.kappa >= 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa!r}")
        if isinstance(self.gradient_bound, str):
            if self.gradient_bound not in ("max", "uniform", "pointwise"):
                raise ValueError(f"unknown gradient_bound {self.gradient_bound!r}")
        elif not float(self.gradient_bound) >= 0.0:
            raise ValueError(f"gradient_bound must be >= 0, got {self.gradient_bound!r}")
        if self.sample_size is not None and self.sample_size != "full":
            if int(self.sample_size) < 1:
                raise ValueError(f"sample_size must be positive, got {self.sample_size!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.step_tol > 0.0:
            raise ValueError("step_tol must be positive")

    def with_seed(self, seed):
        if isinstance(seed, (tuple, list)):
            return replace(self, seed=tuple(int(s) for s in seed))
        return replace(self, seed=int(seed))


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray = field(repr=False)
    err: float = None
    step_norm: float = None
    eps_k: float = None
    eps2_k: float = None
    lambda_k: float = None
    sample_hess: int = None
    sample_grad: int = None
    model_residual: float = None
    inner_iterations: int = None


@dataclass
class IterationTrace:
    """Iterate history: records[0] is the start point, one record per update."""

    records: list
    termination: str = None
    config: AlgorithmConfig = None
    x_star: np.ndarray = None
    alpha: float = 1.0  # unit step length throughout

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self):
        return len(self.records) - 1

    @property
    def final_x(self):
        return self.records[-1].x

    def iterates(self):
        return np.array([r.x for r in self.records])

    def errors(self, x_star=None):
        """||x_k - x*|| per record; uses stored err fields when x_star is None."""
        if x_star is not None:
            ref = np.asarray(x_star, dtype=float)
            return np.array([float(np.linalg.norm(r.x - ref)) for r in self.records])
        if any(r.err is None for r in self.records):
            raise ValueError("trace has no stored errors; pass x_star")
        return np.array([r.err for r in self.records])


# ---------------------------------------------------------------------------
# driver loop
# ---------------------------------------------------------------------------


def _resolve_kappa(config, oracle, x0):
    if config.kappa is not None:
        return float(config.kappa)
    big, gamma = oracle.curvature_bounds(x0)
    if gamma <= 0.0:
        raise ValueError(
            "cannot derive a condition-number bound at the start point "
            f"(smallest averaged-Hessian eigenvalue {gamma:.3g}); supply kappa"
        )
    return max(1.0, big / gamma)


def _gradient_bound_value(config, oracle, x):
    gb = config.gradient_bound
    if isinstance(gb, str):
        if gb == "max":
            return oracle.max_component_gradient_norm(x)
        if gb == "uniform":
            return problems.gradient_bound(oracle, mode="uniform")
        return problems.gradient_bound(oracle, x, mode="pointwise")
    return float(gb)


def _hessian_size(config, eps, kappa, p, d_intrinsic, n):
    if config.sample_size == "full":
        return None  # sentinel: deterministic exhaustive sample
    if config.sample_size is not None:
        return int(config.sample_size)
    size = sampling.hessian_sample_size(
        config.variant,
        eps,
        config.delta,
        kappa,
        p,
        d_intrinsic=d_intrinsic,
        kappa_first_power=config.kappa_first_power,
    )
    if config.replacement == "without":
        size = min(size, n)
    return size


def _draw(n, size, config, k, purpose):
    if size is None:
        return sampling.full_sample(n)
    return sampling.draw_sample(
        n,
        size,
        scheme=config.replacement,
        seed=sampling.stream_seed(config.seed, k, purpose),
    )


def run_algorithm(config, oracle, constraint=None, x0=None, x_star=None):
    """Run the configured driver; returns an IterationTrace.

    The iterate whose update step falls below step_tol * (1 + ||x_k||) is
    discarded and the run reports "tolerance" termination; otherwise the run
    stops at max_iterations. Model-solve failures propagate as
    CurvatureError/SubproblemError tagged with the iteration index.
    """
    if not isinstance(config, AlgorithmConfig):
        raise ValueError("config must be an AlgorithmConfig")
    if constraint is None:
        constraint = Unconstrained()
    n, p = oracle.n, oracle.p
    x = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (p,):
        raise ValueError(f"x0 must have shape ({p},), got {x.shape}")
    if not constraint.contains(x):
        raise ValueError("x0 is not feasible for the constraint set")
    ref = None if x_star is None else np.asarray(x_star, dtype=float)

    needs_kappa = config.sample_size is None
    kappa = _resolve_kappa(config, oracle, x) if needs_kappa else None
    d_intrinsic = None
    if needs_kappa and config.variant == "intrinsic":
        d_intrinsic = sampling.intrinsic_dimension(oracle.second_moment(x))

    records = [
        IterationRecord(k=0, x=x.copy(), err=None if ref is None else float(np.linalg.norm(x - ref)))
    ]
    termination = "max_iterations"

    for k in range(config.max_iterations):
        eps_k = eps2_k = lam_k = None
        sample_grad_size = None
        try:
            if config.driver in ("fixed", "spectral", "ridge"):
                eps_k = config.epsilon
            elif config.driver == "scheduled":
                eps_k = epsilon_schedule(config.schedule, k, config.epsilon, config.rho)
            elif config.driver == "split":
                eps_k = config.epsilon
                eps2_k = config.rho**k * config.epsilon_grad
            else:  # shared
                eps_k = config.rho**k * config.epsilon

            size_h = _hessian_size(config, eps_k, kappa, p, d_intrinsic, n)

            if config.driver == "shared":
                g_bound = _gradient_bound_value(config, oracle, x)
                size_g = sampling.gradient_sample_size(g_bound, eps_k, config.delta)
                if config.replacement == "without":
                    size_g = min(size_g, n)
                size = size_g if size_h is None else max(size_h, size_g)
                s_shared = _draw(n, size, config, k, sampling.PURPOSE_SHARED)
                grad = sampling.assemble_subsampled_gradient(oracle, x, s_shared)
                hess = sampling.assemble_subsampled_hessian(oracle, x, s_shared)
                sample_hess_size = s_shared.size
                sample_grad_size = s_shared.size
            else:
                s_h = _draw(n, size_h, config, k, sampling.PURPOSE_HESSIAN)
                hess = sampling.assemble_subsampled_hessian(oracle, x, s_h)
                sample_hess_size = s_h.size
                if config.driver == "split":
                    g_bound = _gradient_bound_value(config, oracle, x)
                    size_g = sampling.gradient_sample_size(g_bound, eps2_k, config.delta)
                    if config.replacement == "without":
                        size_g = min(size_g, n)
                    s_g = _draw(n, size_g, config, k, sampling.PURPOSE_GRADIENT)
                    grad = sampling.assemble_subsampled_gradient(oracle, x, s_g)
                    sample_grad_size = s_g.size
                else:
                    grad = oracle.gradient(x)

            if config.driver == "spectral":
                size_0 = _hessian_size(
                    replace(config, epsilon=config.epsilon0), config.epsilon0, kappa, p,
                    d_intrinsic, n,
                )
                s_0 = _draw(n, size_0, config, k, sampling.PURPOSE_PILOT)
                pilot = sampling.assemble_subsampled_hessian(oracle, x, s_0)
                lam_k = regularization.spectral_threshold(
                    pilot, config.epsilon, config.epsilon0, rule=config.spectral_rule
                )
                hess = regularization.spectral_floor(hess, lam_k)
            elif config.driver == "ridge":
                lam_k = float(config.ridge)
                hess = regularization.ridge_shift(hess, lam_k)

            x_new, info = solve_quadratic_model(
                x, grad, hess, constraint, config.inner_tol, config.inner_cap
            )
        except (CurvatureError, SubproblemError, DegeneratePilotError) as exc:
            raise type(exc)(f"iteration {k}: {exc}") from exc

        step = float(np.linalg.norm(x_new - x))
        if step <= config.step_tol * (1.0 + float(np.linalg.norm(x))):
            termination = "tolerance"
            break
        x = x_new
        records.append(
            IterationRecord(
                k=k + 1,
                x=x.copy(),
                err=None if ref is None else float(np.linalg.norm(x - ref)),
                step_norm=step,
                eps_k=eps_k,
                eps2_k=eps2_k,
                lambda_k=lam_k,
                sample_hess=int(sample_hess_size),
                sample_grad=None if sample_grad_size is None else int(sample_grad_size),
                model_residual=info["residual"],
                inner_iterations=info["inner_iterations"],
            )
        )

    return IterationTrace(records=records, termination=termination, config=config, x_star=ref)


# ---------------------------------------------------------------------------
# rate-constant calculators for the error recursions
# ---------------------------------------------------------------------------


def _check_regime(regime):
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}, got {regime!r}")


def _check_rate_inputs(epsilon, gamma, lipschitz):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if not lipschitz >= 0.0:
        raise ValueError(f"lipschitz must be >= 0, got {lipschitz!r}")


def linear_phase_constants(epsilon, gamma, lipschitz, regime="global"):
    """(rho0, xi) of the one-step recursion err' <= rho0 err + xi err^2 for a
    sampled-Hessian, full-gradient step. `gamma` is the strong-convexity
    level of the regime (averaged over the region, or at the minimizer)."""
    _check_regime(regime)
    _check_rate_inputs(epsilon, gamma, lipschitz)
    if regime == "global":
        return epsilon / (1.0 - epsilon), lipschitz / (2.0 * (1.0 - epsilon) * gamma)
    return 2.0 * epsilon / (1.0 - epsilon), 3.0 * lipschitz / ((1.0 - epsilon) * gamma)


def mixed_constants(epsilon_h, epsilon_g, gamma, lipschitz, regime="global"):
    """(eta, rho0, xi) of err' <= eta + rho0 err + xi err^2 when the gradient
    is sampled (absolute accuracy epsilon_g) independently of the Hessian."""
    _check_regime(regime)
    _check_rate_inputs(epsilon_h, gamma, lipschitz)
    if not epsilon_g >= 0.0:
        raise ValueError(f"epsilon_g must be >= 0, got {epsilon_g!r}")
    rho0, xi = linear_phase_constants(epsilon_h, gamma, lipschitz, regime)
    scale = 1.0 if regime == "global" else 2.0
    return scale * epsilon_g / ((1.0 - epsilon_h) * gamma), rho0, xi


def shared_constants(epsilon, gamma_star, lipschitz):
    """(eta, xi) of err' <= eta + xi err^2 for the shared-draw driver near the
    minimizer (eta absorbs the common accuracy epsilon of both estimates)."""
    _check_rate_inputs(epsilon, gamma_star, lipschitz)
    return (
        2.0 * epsilon / ((1.0 - epsilon) * gamma_star),
        lipschitz / ((1.0 - epsilon) * gamma_star),
    )


def spectral_constants(epsilon, level, gamma, lipschitz, p=None, regime="global"):
    """(rho0, xi) when the estimate is floored at `level` >= (1-eps) gamma."""
    _check_regime(regime)
    _check_rate_inputs(epsilon, gamma, lipschitz)
    if not level > 0.0:
        raise ValueError(f"floor level must be positive, got {level!r}")
    rho0 = (level - (1.0 - epsilon) * gamma + gamma * epsilon) / level
    if regime == "global":
        return rho0, lipschitz / (2.0 * level)
    if p is None or int(p) < 1:
        raise ValueError("local spectral constants need the dimension p")
    return rho0, (math.sqrt(int(p)) + 0.5) * lipschitz / level


def ridge_constants(epsilon, level, gamma, lipschitz, regime="global"):
    """(rho0, xi) when the estimate is shifted by `level` * identity."""
    _check_regime(regime)
    _check_rate_inputs(epsilon, gamma, lipschitz)
    if not level >= 0.0:
        raise ValueError(f"ridge level must be >= 0, got {level!r}")
    if regime == "global":
        return (
            (level + gamma * epsilon) / ((1.0 - epsilon) * gamma + level),
            lipschitz / (2.0 * (1.0 - epsilon) * gamma + 2.0 * level),
        )
    return (
        (2.0 * level + 2.0 * gamma * epsilon) / ((1.0 - epsilon) * gamma + 2.0 * level),
        3.0 * lipschitz / ((1.0 - epsilon) * gamma + 2.0 * level),
    )


def contraction_radius(rho, rho0, xi):
    """Start radius (rho - rho0)/xi inside which the per-step error ratio
    stays below the target rate rho."""
    if not 0.0 <= rho0 < rho < 1.0:
        raise ValueError(f"need 0 <= rho0 < rho < 1, got rho0={rho0!r}, rho={rho!r}")
    if not xi > 0.0:
        raise ValueError(f"xi must be positive, got {xi!r}")
    return (rho - rho0) / xi


def local_region_radius(epsilon, gamma_star, lipschitz):
    """Radius (1 - eps) gamma* / (2 L) of the region where the local-regime
    recursions apply."""
    _check_rate_inputs(epsilon, gamma_star, lipschitz)
    if lipschitz == 0.0:
        return math.inf
    return (1.0 - epsilon) * gamma_star / (2.0 * lipschitz)


def slow_schedule_radius(gamma, lipschitz, regime="global"):
    """Start radius under which the logarithmic accuracy schedules yield a
    1/log(3 + k) rate."""
    _check_regime(regime)
    if not gamma > 0.0 or not lipschitz > 0.0:
        raise ValueError("gamma and lipschitz must be positive")
    if regime == "global":
        return 2.0 * gamma / ((1.0 + 4.0 * math.log(2.0)) * lipschitz)
    return 2.0 * gamma / (3.0 * (1.0 + 8.0 * math.log(2.0)) * lipschitz)


def split_envelope(rho, rho0, rho1, epsilon_h, gamma, lipschitz, regime="global"):
    """Envelope parameters for the split driver with gradient accuracy
    epsilon_g^(k) = rho^k epsilon_g: returns dict with the start radius
    `sigma`, the largest admissible initial gradient accuracy `eps_grad_max`,
    and the largest admissible Hessian accuracy `eps_h_max`. If the run
    starts within sigma and the accuracies comply, err_k <= rho^k sigma."""
    _check_regime(regime)
    if not (0.0 < rho1 < rho and 0.0 <= rho0):
        raise ValueError(f"need rho0 >= 0 and rho1 in (0, rho), got {rho0!r}, {rho1!r}")
    if not 0.0 < rho0 + rho1 < rho < 1.0:
        raise ValueError(f"need rho0 + rho1 < rho < 1, got {rho0!r} + {rho1!r} vs {rho!r}")
    _check_rate_inputs(epsilon_h, gamma, lipschitz)
    if lipschitz == 0.0:
        raise ValueError("envelope parameters need lipschitz > 0")
    if regime == "global":
        eps_h_max = rho0 / (1.0 + rho0)
        sigma = 2.0 * (rho - (rho0 + rho1)) * (1.0 - epsilon_h) * gamma / lipschitz
        eps_grad_max = (1.0 - epsilon_h) * gamma * rho1 * sigma
    else:
        eps_h_max = rho0 / (2.0 + rho0)
        sigma = (rho - (rho0 + rho1)) * (1.0 - epsilon_h) * gamma / (3.0 * lipschitz)
        eps_grad_max = (1.0 - epsilon_h) * gamma * rho1 * sigma / 2.0
    return {"sigma": sigma, "eps_grad_max": eps_grad_max, "eps_h_max": eps_h_max}


def shared_envelope(rho, rho0, epsilon, gamma_star, lipschitz):
    """Envelope parameters for the shared-draw driver with accuracy
    eps^(k) = rho^k eps: returns dict with start radius `sigma` and the
    bound `eps_condition_rhs` that eps/(1-eps)^2 must not exceed."""
    if not 0.0 < rho0 < rho < 1.0:
        raise ValueError(f"need 0 < rho0 < rho < 1, got rho0={rho0!r}, rho={rho!r}")
    _check_rate_inputs(epsilon, gamma_star, lipschitz)
    if lipschitz == 0.0:
        raise ValueError("envelope parameters need lipschitz > 0")
    sigma = (rho - rho0) * (1.0 - epsilon) * gamma_star / (2.0 * lipschitz)
    rhs = rho0 * (rho - rho0) * gamma_star * gamma_star / (4.0 * lipschitz)
    return {
        "sigma": sigma,
        "eps_condition_rhs": rhs,
        "eps_condition_ok": epsilon / (1.0 - epsilon) ** 2 <= rhs,
    }


def quadratic_phase_radius(xi0, beta, epsilon, gamma, lipschitz):
    """Error level above which a regularized step contracts quadratically
    with coefficient xi0, provided the level rule below is followed."""
    if not beta > 1.0:
        raise ValueError(f"beta must exceed 1, got {beta!r}")
    if not xi0 > 0.0:
        raise ValueError(f"xi0 must be positive, got {xi0!r}")
    _check_rate_inputs(epsilon, gamma, lipschitz)
    if lipschitz == 0.0:
        raise ValueError("quadratic phase region needs lipschitz > 0")
    return (beta * lipschitz - 2.0 * gamma * xi0 + 4.0 * gamma * xi0 * epsilon) / (
        (beta - 1.0) * lipschitz * xi0
    )


def quadratic_phase_level(mode, xi0, beta, epsilon, gamma, lipschitz):
    """Smallest regularization level activating the quadratic phase:
    beta L / (2 xi0) for the spectral floor, (beta L - 2 (1-eps) gamma xi0)
    / (2 xi0) for the ridge shift."""
    if mode not in ("spectral", "ridge"):
        raise ValueError(f"mode must be spectral or ridge, got {mode!r}")
    if not beta > 1.0 or not xi0 > 0.0:
        raise ValueError("need beta > 1 and xi0 > 0")
    _check_rate_inputs(epsilon, gamma, lipschitz)
    if mode == "spectral":
        return beta * lipschitz / (2.0 * xi0)
    return (beta * lipschitz - (1.0 - epsilon) * 2.0 * gamma * xi0) / (2.0 * xi0)
