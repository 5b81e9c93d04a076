"""Diagnostics: ground truth, rate fitting, recursion and concentration checks.

Everything here consumes the oracle/driver layers and produces small report
objects. Monte-Carlo experiments derive each trial's randomness from
(master seed, trial index, purpose) so reports are reproducible at any
parallelism level.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, sampling, solver
from .errors import ReferenceSolveError

WILSON_Z = 1.6448536269514722  # one-sided 95% normal quantile


def wilson_lower(successes, trials, z=WILSON_Z):
    """One-sided Wilson lower confidence bound for a binomial frequency."""
    trials = int(trials)
    successes = int(successes)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    phat = successes / trials
    z2 = z * z
    center = phat + z2 / (2.0 * trials)
    radius = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    return max(0.0, (center - radius) / (1.0 + z2 / trials))


# ---------------------------------------------------------------------------
# ground truth
# ---------------------------------------------------------------------------


def reference_minimizer(
    oracle,
    constraint=None,
    x0=None,
    max_iterations=200,
    step_tol=1e-14,
    grad_tol=1e-10,
):
    """Deterministic full-data Newton run to machine-level step norms.

    All problem kinds share this x* pathway. Unconstrained solutions must
    reach ||grad F(x*)|| <= grad_tol; constrained ones must satisfy the
    projected-gradient fixed-point residual to the same tolerance. A simple
    halving line search guards the early iterations far from x*; near the
    solution the accepted step is always the unit Newton step.
    """
    if constraint is None:
        constraint = solver.Unconstrained()
    p = oracle.p
    x = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float).copy()
    if not constraint.contains(x):
        x = constraint.project(x)
    value = oracle.value(x)

    converged = False
    for _ in range(int(max_iterations)):
        g = oracle.gradient(x)
        h = oracle.hessian(x)
        x_new, _ = solver.solve_quadratic_model(x, g, h, constraint)
        direction = x_new - x
        step = float(np.linalg.norm(direction))
        if step <= step_tol:
            converged = True
            break
        t = 1.0
        for _ in range(60):
            candidate = x + t * direction
            cand_value = oracle.value(candidate)
            if cand_value <= value or t * step <= step_tol:
                break
            t *= 0.5
        x = x + t * direction
        value = oracle.value(x)
    if not converged:
        raise ReferenceSolveError(
            f"full Newton did not reach step norm {step_tol:g} in {max_iterations} iterations"
        )

    g = oracle.gradient(x)
    if isinstance(constraint, solver.Unconstrained):
        resid = float(np.linalg.norm(g))
    else:
        resid = float(np.linalg.norm(x - constraint.project(x - g)))
    if resid > grad_tol * (1.0 + float(np.linalg.norm(g))):
        raise ReferenceSolveError(
            f"converged point fails first-order optimality: residual {resid:.3e}"
        )
    return x


def local_curvature(oracle, x_star, basis=None):
    """Smallest restricted eigenvalue of the averaged Hessian at x*."""
    h = oracle.hessian(np.asarray(x_star, dtype=float))
    if basis is None:
        basis = geometry.ConeBasis.identity(oracle.p)
    return geometry.restricted_eigenvalues(h, basis).smallest


def hessian_lipschitz(oracle, domain="l1-ball"):
    """Analytic per-component Hessian Lipschitz bound, or None when the
    family has no such constant."""
    return oracle.hessian_lipschitz_bound(domain)


# ---------------------------------------------------------------------------
# Monte-Carlo concentration experiments
# ---------------------------------------------------------------------------


@dataclass
class ConcentrationReport:
    family: str
    size: int
    trials: int
    epsilon: float
    delta: float
    frequencies: dict
    wilson: dict
    details: dict = field(default_factory=dict)

    def frequency(self, statement):
        return self.frequencies[statement]


def _resolve_basis(basis, p):
    if basis is None:
        return geometry.ConeBasis.identity(p)
    if isinstance(basis, geometry.ConeBasis):
        return basis
    return geometry.ConeBasis(basis)


def _scaled_size(size, size_scale):
    if size_scale != 1.0:
        if not size_scale > 0.0:
            raise ValueError(f"size_scale must be positive, got {size_scale!r}")
        size = max(1, math.ceil(size * size_scale))
    return int(size)


def hessian_concentration(
    oracle,
    x,
    epsilon,
    delta,
    trials,
    variant="basic",
    replacement="with",
    basis=None,
    seed=0,
    size=None,
    size_scale=1.0,
    kappa=None,
    kappa_first_power=False,
):
    """Empirical frequencies of the sampled-Hessian concentration statements.

    Statements per draw, with gamma the smallest restricted eigenvalue of
    the full Hessian at x: "spectrum" (every restricted eigenvalue within
    relative epsilon of its full counterpart), "operator" (restricted
    operator deviation <= eps * gamma), "min_eig" (sampled restricted floor
    >= (1-eps) gamma), "ratio" (deviation / sampled floor <= eps/(1-eps)),
    and "operator_joint" (the previous three together).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = np.asarray(x, dtype=float)
    u = _resolve_basis(basis, oracle.p)
    cols = u.columns
    full = cols.T @ oracle.hessian(x) @ cols
    full = 0.5 * (full + full.T)
    full_ev = np.linalg.eigvalsh(full)
    gamma = float(full_ev[0])
    if gamma <= 0.0:
        raise ValueError(f"restricted curvature at x is not positive ({gamma:.3g})")

    if kappa is None:
        kappa = float(oracle.component_spectral_bounds(x, u).max()) / gamma
    d_intrinsic = None
    if variant == "intrinsic" and size is None:
        d_intrinsic = sampling.intrinsic_dimension(oracle.second_moment(x, u))
    if size is None:
        size = sampling.hessian_sample_size(
            variant,
            epsilon,
            delta,
            kappa,
            u.subspace_dim,
            d_intrinsic=d_intrinsic,
            kappa_first_power=kappa_first_power,
        )
    size = _scaled_size(size, size_scale)
    if replacement == "without":
        size = min(size, oracle.n)

    names = ("spectrum", "operator", "min_eig", "ratio", "operator_joint")
    counts = dict.fromkeys(names, 0)
    worst = {"spectrum": 0.0, "operator": 0.0, "ratio": 0.0, "min_eig": math.inf}
    for t in range(int(trials)):
        s = sampling.draw_sample(
            oracle.n,
            size,
            scheme=replacement,
            seed=sampling.stream_seed(seed, t, sampling.PURPOSE_HESSIAN),
        )
        sub = sampling.assemble_subsampled_hessian(oracle, x, s)
        sub_r = cols.T @ sub @ cols
        sub_r = 0.5 * (sub_r + sub_r.T)
        ev = np.linalg.eigvalsh(sub_r)
        dev = np.linalg.eigvalsh(sub_r - full)
        op = max(abs(float(dev[0])), abs(float(dev[-1])))
        low = float(ev[0])

        spectrum_ok = bool(
            np.all(ev >= (1.0 - epsilon) * full_ev) and np.all(ev <= (1.0 + epsilon) * full_ev)
        )
        operator_ok = op <= epsilon * gamma
        min_eig_ok = low >= (1.0 - epsilon) * gamma
        ratio = op / low if low > 0.0 else math.inf
        ratio_ok = ratio <= epsilon / (1.0 - epsilon)

        counts["spectrum"] += spectrum_ok
        counts["operator"] += operator_ok
        counts["min_eig"] += min_eig_ok
        counts["ratio"] += ratio_ok
        counts["operator_joint"] += operator_ok and min_eig_ok and ratio_ok
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(ev - full_ev) / np.where(full_ev > 0, full_ev, np.inf)
        worst["spectrum"] = max(worst["spectrum"], float(rel.max()))
        worst["operator"] = max(worst["operator"], op / (epsilon * gamma))
        worst["ratio"] = max(worst["ratio"], ratio / (epsilon / (1.0 - epsilon)))
        worst["min_eig"] = min(worst["min_eig"], low / gamma)

    freqs = {k: counts[k] / trials for k in names}
    wilson = {k: wilson_lower(counts[k], trials) for k in names}
    details = {"gamma": gamma, "kappa": float(kappa), "worst": worst}
    if d_intrinsic is not None:
        details["intrinsic_dimension"] = d_intrinsic
    return ConcentrationReport(
        family="hessian",
        size=size,
        trials=int(trials),
        epsilon=float(epsilon),
        delta=float(delta),
        frequencies=freqs,
        wilson=wilson,
        details=details,
    )


def gradient_concentration(
    oracle,
    x,
    epsilon,
    delta,
    trials,
    replacement="with",
    basis=None,
    seed=0,
    size=None,
    size_scale=1.0,
    g_bound=None,
):
    """Empirical frequency of the sampled-gradient deviation statement
    ||restricted(g_S - grad F)|| <= epsilon at the size computed from the
    uniform norm bound g_bound (default: the exact max component gradient
    norm at x)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = np.asarray(x, dtype=float)
    u = _resolve_basis(basis, oracle.p)
    cols = u.columns
    full = oracle.gradient(x)
    if g_bound is None:
        g_bound = oracle.max_component_gradient_norm(x)
    if size is None:
        size = sampling.gradient_sample_size(g_bound, epsilon, delta)
    size = _scaled_size(size, size_scale)
    if replacement == "without":
        size = min(size, oracle.n)

    successes = 0
    worst = 0.0
    for t in range(int(trials)):
        s = sampling.draw_sample(
            oracle.n,
            size,
            scheme=replacement,
            seed=sampling.stream_seed(seed, t, sampling.PURPOSE_GRADIENT),
        )
        sub = sampling.assemble_subsampled_gradient(oracle, x, s)
        dev = float(np.linalg.norm(cols.T @ (sub - full)))
        successes += dev <= epsilon
        worst = max(worst, dev / epsilon)

    freq = successes / trials
    return ConcentrationReport(
        family="gradient",
        size=size,
        trials=int(trials),
        epsilon=float(epsilon),
        delta=float(delta),
        frequencies={"deviation": freq},
        wilson={"deviation": wilson_lower(successes, trials)},
        details={"g_bound": float(g_bound), "worst": {"deviation": worst}},
    )


@dataclass
class ContractionReport:
    trials: int
    bound: float
    ratios: np.ndarray
    frequencies: dict
    wilson: dict
    details: dict = field(default_factory=dict)


def single_step_contraction(
    oracle,
    x_star,
    epsilon,
    delta,
    trials,
    distance,
    bound=None,
    variant="basic",
    replacement="with",
    constraint=None,
    seed=0,
    kappa=None,
    gamma=None,
    lipschitz=None,
    size=None,
):
    """One sampled-Hessian full-gradient step from random points at the given
    distance from x*; reports how often the error ratio stays within `bound`
    (default rho0 + xi * distance from the one-step recursion constants)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x_star = np.asarray(x_star, dtype=float)
    p = oracle.p
    if gamma is None:
        gamma = local_curvature(oracle, x_star)
    if bound is None:
        if lipschitz is None:
            raise ValueError("pass either an explicit bound or lipschitz")
        rho0, xi = solver.linear_phase_constants(epsilon, gamma, lipschitz)
        bound = rho0 + xi * float(distance)
    if kappa is None:
        big, gam = oracle.curvature_bounds(x_star)
        if gam <= 0.0:
            raise ValueError("cannot derive kappa at x*; supply it")
        kappa = max(1.0, big / gam)
    if size is None:
        size = sampling.hessian_sample_size(variant, epsilon, delta, kappa, p)
    if replacement == "without":
        size = min(size, oracle.n)

    ratios = np.empty(int(trials))
    successes = 0
    for t in range(int(trials)):
        rng = sampling.generator(sampling.stream_seed(seed, t, sampling.PURPOSE_PILOT))
        direction = rng.standard_normal(p)
        x0 = x_star + float(distance) * direction / np.linalg.norm(direction)
        if constraint is not None:
            x0 = constraint.project(x0)
        start = float(np.linalg.norm(x0 - x_star))
        s = sampling.draw_sample(
            oracle.n,
            size,
            scheme=replacement,
            seed=sampling.stream_seed(seed, t, sampling.PURPOSE_HESSIAN),
        )
        hess = sampling.assemble_subsampled_hessian(oracle, x0, s)
        grad = oracle.gradient(x0)
        x1, _ = solver.solve_quadratic_model(x0, grad, hess, constraint)
        ratios[t] = float(np.linalg.norm(x1 - x_star)) / start
        successes += ratios[t] <= bound

    return ContractionReport(
        trials=int(trials),
        bound=float(bound),
        ratios=ratios,
        frequencies={"contraction": successes / trials},
        wilson={"contraction": wilson_lower(successes, trials)},
        details={"size": int(size), "gamma": float(gamma), "kappa": float(kappa)},
    )


# ---------------------------------------------------------------------------
# recursion and rate checks on traces
# ---------------------------------------------------------------------------


def _errors_of(trace, x_star):
    if isinstance(trace, solver.IterationTrace):
        return trace.errors(x_star)
    errors = np.asarray(trace, dtype=float)
    if errors.ndim != 1 or errors.size < 2:
        raise ValueError("need a 1-d error sequence with at least 2 entries")
    if (errors < 0).any():
        raise ValueError("error norms must be nonnegative")
    return errors


@dataclass
class RecursionReport:
    steps: list
    holds: list
    margins: list
    frequency: float

    @property
    def all_hold(self):
        return all(self.holds)


def recursion_check(trace, x_star=None, rho0=0.0, xi=0.0, eta=0.0, floor=0.0, slack=0.0):
    """Per-step check of err' <= eta + rho0 err + xi err^2 (with relative
    slack). Steps whose endpoints sit at/below `floor` are skipped as
    noise-dominated."""
    errors = _errors_of(trace, x_star)
    steps, holds, margins = [], [], []
    for k in range(errors.size - 1):
        e0, e1 = float(errors[k]), float(errors[k + 1])
        if e0 <= floor or e1 <= floor:
            continue
        rhs = eta + rho0 * e0 + xi * e0 * e0
        steps.append(k)
        holds.append(e1 <= rhs * (1.0 + slack))
        margins.append(rhs - e1)
    frequency = sum(holds) / len(holds) if holds else 1.0
    return RecursionReport(steps=steps, holds=holds, margins=margins, frequency=frequency)


@dataclass
class RateReport:
    errors: np.ndarray
    ratios: np.ndarray
    q_linear_ratio: float
    q_linear: bool
    superlinear: bool
    envelope_rho: float
    envelope_sigma: float
    phase_index: int = None


def fit_rates(trace, x_star=None, rho0=None, xi=None, floor=0.0, tail=4, slack=0.1):
    """Rate diagnostics for an error sequence.

    The sequence is truncated at the first entry <= floor (later entries are
    numerical noise). Needs at least 3 iterations after truncation. The
    Q-linear ratio is the max tail ratio; the q_linear flag additionally
    requires the tail ratios to be constant within the given relative slack.
    The superlinear flag requires strictly decreasing tail ratios. The
    R-envelope (sigma, rho) comes from a least-squares fit of log errors,
    with sigma the smallest valid envelope scale for the fitted rho. When
    (rho0, xi) are given, phase_index is the first k whose linear term
    rho0 * err exceeds the quadratic term xi * err^2.
    """
    errors = _errors_of(trace, x_star)
    below = np.nonzero(errors <= floor)[0]
    if below.size:
        errors = errors[: below[0]]
    if errors.size < 4:
        raise ValueError("insufficient data: need at least 3 iterations above the floor")

    ratios = errors[1:] / errors[:-1]
    tail_r = ratios[-int(tail):]
    q_ratio = float(tail_r.max())
    q_linear = q_ratio < 1.0 and float(tail_r.max() - tail_r.min()) <= slack * q_ratio
    superlinear = tail_r.size >= 2 and bool(np.all(np.diff(tail_r) < 0.0))

    k = np.arange(errors.size, dtype=float)
    log_e = np.log(errors)
    slope = float(np.polyfit(k, log_e, 1)[0])
    env_rho = math.exp(slope)
    env_sigma = float(np.exp(log_e - k * slope).max())

    phase_index = None
    if rho0 is not None and xi is not None and rho0 > 0.0 and xi > 0.0:
        crossing = np.nonzero(rho0 * errors > xi * errors**2)[0]
        if crossing.size:
            phase_index = int(crossing[0])

    return RateReport(
        errors=errors,
        ratios=ratios,
        q_linear_ratio=q_ratio,
        q_linear=q_linear,
        superlinear=superlinear,
        envelope_rho=env_rho,
        envelope_sigma=env_sigma,
        phase_index=phase_index,
    )


def envelope_check(trace, rho, sigma, x_star=None):
    """Whether err_k <= sigma * rho^k for every k; returns the worst ratio
    err_k / (sigma rho^k) alongside."""
    if not 0.0 < rho < 1.0 or not sigma > 0.0:
        raise ValueError("need rho in (0, 1) and sigma > 0")
    errors = _errors_of(trace, x_star)
    bound = sigma * rho ** np.arange(errors.size)
    worst = float((errors / bound).max())
    return {"holds": worst <= 1.0, "worst": worst}


# ---------------------------------------------------------------------------
# derivative validation
# ---------------------------------------------------------------------------


def finite_difference_check(oracle, x, order="gradient", step=None, component=None):
    """Worst relative error of the analytic gradient (or Hessian) against
    central differences with step 1e-6 (1 + ||x||). SVM points must sit at
    least 10 steps away from a hinge kink."""
    if order not in ("gradient", "hessian"):
        raise ValueError(f"order must be gradient or hessian, got {order!r}")
    x = np.asarray(x, dtype=float)
    p = oracle.p
    h = float(step) if step is not None else 1e-6 * (1.0 + float(np.linalg.norm(x)))
    if hasattr(oracle, "hinge_margin"):
        margin = oracle.hinge_margin(x)
        row_scale = float(np.abs(oracle.dataset.features).sum(axis=1).max())
        if margin <= 10.0 * h * max(1.0, row_scale):
            raise ValueError(
                f"x sits {margin:.3g} from a hinge kink; move it or shrink the step"
            )

    if component is None:
        value, gradient, hessian = oracle.value, oracle.gradient, oracle.hessian
    else:
        i = int(component)
        value = lambda z: oracle.component_value(i, z)
        gradient = lambda z: oracle.component_gradient(i, z)
        hessian = lambda z: oracle.component_hessian(i, z)

    if order == "gradient":
        analytic = gradient(x)
        fd = np.empty(p)
        for j in range(p):
            e = np.zeros(p)
            e[j] = h
            fd[j] = (value(x + e) - value(x - e)) / (2.0 * h)
        scale = max(1e-8, float(np.abs(analytic).max()))
        return float(np.abs(fd - analytic).max()) / scale

    analytic = hessian(x)
    fd = np.empty((p, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        fd[:, j] = (gradient(x + e) - gradient(x - e)) / (2.0 * h)
    fd = 0.5 * (fd + fd.T)
    scale = max(1e-8, float(np.abs(analytic).max()))
    return float(np.abs(fd - analytic).max()) / scale


# ---------------------------------------------------------------------------
# quadratic-phase verification for regularized drivers
# ---------------------------------------------------------------------------


@dataclass
class QuadraticPhaseReport:
    applicable: bool
    radius: float = None
    required_level: float = None
    level_ok: bool = None
    steps: list = field(default_factory=list)
    holds: list = field(default_factory=list)

    @property
    def all_hold(self):
        return all(self.holds)


def quadratic_phase_check(
    trace,
    x_star,
    xi0,
    beta,
    epsilon,
    gamma,
    lipschitz,
    level=None,
    mode=None,
):
    """Checks err' <= xi0 err^2 at every step whose error sits above the
    quadratic-phase radius. Problems without a Hessian Lipschitz constant
    (or with L = 0) have no such region and report applicable=False. When
    (level, mode) are given, level_ok records whether the regularization
    level meets the phase's minimum."""
    if lipschitz is None or lipschitz == 0.0:
        return QuadraticPhaseReport(applicable=False)
    radius = solver.quadratic_phase_radius(xi0, beta, epsilon, gamma, lipschitz)
    required = level_ok = None
    if level is not None:
        if mode is None:
            raise ValueError("pass mode=spectral|ridge along with level")
        required = solver.quadratic_phase_level(mode, xi0, beta, epsilon, gamma, lipschitz)
        level_ok = level >= required
    errors = _errors_of(trace, x_star)
    steps, holds = [], []
    for k in range(errors.size - 1):
        if errors[k] >= radius:
            steps.append(k)
            holds.append(bool(errors[k + 1] <= xi0 * errors[k] ** 2))
    return QuadraticPhaseReport(
        applicable=True,
        radius=radius,
        required_level=required,
        level_ok=level_ok,
        steps=steps,
        holds=holds,
    )
