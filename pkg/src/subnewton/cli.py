"""Command-line entry point: run, verify, gen-data, report.

Configs are YAML documents validated strictly: unknown keys and
out-of-range values are listed with their dotted field paths and the
command exits with code 1. Run exit codes: 0 termination-by-tolerance,
1 configuration error, 2 max-iterations, 3 solver failure. All emitted
floats carry 17 significant digits so files round-trip exactly and a
(config, seed) pair reproduces output bytes.
"""

import argparse
import json
import math
import os
import sys

import numpy as np
import yaml

from . import harness, problems, sampling, solver
from .errors import (
    CurvatureError,
    DegeneratePilotError,
    ReferenceSolveError,
    SubproblemError,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_ITERATIONS = 2
EXIT_SOLVER = 3

SEED_ENV = "SUBNEWTON_SEED"

TRACE_KEYS = (
    "k",
    "x",
    "err",
    "step_norm",
    "eps_k",
    "eps2_k",
    "lambda_k",
    "sample_hess",
    "sample_grad",
    "model_residual",
    "inner_iterations",
)

REPORT_COLUMNS = (
    "k",
    "err",
    "ratio",
    "step_norm",
    "eps_k",
    "eps2_k",
    "lambda_k",
    "sample_hess",
    "sample_grad",
)

CHECK_NAMES = (
    "hessian-spectrum",
    "hessian-operator",
    "gradient-deviation",
    "single-step-contraction",
    "convergence-rates",
)


class ConfigError(ValueError):
    """Raised with one message line per offending config field."""


# ---------------------------------------------------------------------------
# deterministic JSON with 17-significant-digit reals
# ---------------------------------------------------------------------------


def _fmt(value):
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if not math.isfinite(f):
            raise ValueError(f"cannot serialize non-finite value {f!r}")
        return format(f, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        items = value.tolist() if isinstance(value, np.ndarray) else value
        return "[" + ", ".join(_fmt(v) for v in items) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def json_line(record):
    """One deterministic JSON line preserving the record's key order."""
    return _fmt(dict(record))


# ---------------------------------------------------------------------------
# strict config walking
# ---------------------------------------------------------------------------


class _Walker:
    def __init__(self):
        self.errors = []

    def fail(self, path, message):
        self.errors.append(f"{path}: {message}")

    def raise_if_failed(self):
        if self.errors:
            raise ConfigError("\n".join(self.errors))

    def mapping(self, node, path, default_empty=True):
        if node is None and default_empty:
            return {}
        if not isinstance(node, dict):
            self.fail(path, f"must be a mapping, got {type(node).__name__}")
            return None
        return dict(node)

    def reject_unknown(self, node, path):
        for key in node:
            full = f"{path}.{key}" if path else str(key)
            self.fail(full, "unknown key")

    # -- field takers; each pops the key -----------------------------------
    def _pop(self, node, key):
        if key in node:
            return True, node.pop(key)
        return False, None

    def number(
        self,
        node,
        key,
        path,
        default=None,
        required=False,
        integer=False,
        minimum=None,
        maximum=None,
        exclusive=False,
    ):
        present, value = self._pop(node, key)
        full = f"{path}.{key}"
        if not present:
            if required:
                self.fail(full, "is required")
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(full, f"must be a number, got {value!r}")
            return default
        if integer:
            if isinstance(value, float) and not value.is_integer():
                self.fail(full, f"must be an integer, got {value!r}")
                return default
            value = int(value)
        else:
            value = float(value)
        if minimum is not None and (value < minimum or (exclusive and value == minimum)):
            self.fail(full, self._range_msg(minimum, maximum, exclusive))
            return default
        if maximum is not None and (value > maximum or (exclusive and value == maximum)):
            self.fail(full, self._range_msg(minimum, maximum, exclusive))
            return default
        return value

    @staticmethod
    def _range_msg(minimum, maximum, exclusive):
        if minimum is not None and maximum is not None:
            br = "()" if exclusive else "[]"
            return f"must lie in {br[0]}{minimum}, {maximum}{br[1]}"
        if minimum is not None:
            return f"must be {'>' if exclusive else '>='} {minimum}"
        return f"must be {'<' if exclusive else '<='} {maximum}"

    def unit_open(self, node, key, path, default=None, required=False):
        return self.number(
            node, key, path, default=default, required=required, minimum=0.0, maximum=1.0,
            exclusive=True,
        )

    def choice(self, node, key, path, options, default=None, required=False):
        present, value = self._pop(node, key)
        full = f"{path}.{key}"
        if not present:
            if required:
                self.fail(full, "is required")
            return default
        if value not in options:
            self.fail(full, f"must be one of {', '.join(map(str, options))}; got {value!r}")
            return default
        return value

    def string(self, node, key, path, default=None, required=False):
        present, value = self._pop(node, key)
        full = f"{path}.{key}"
        if not present:
            if required:
                self.fail(full, "is required")
            return default
        if not isinstance(value, str):
            self.fail(full, f"must be a string, got {value!r}")
            return default
        return value

    def boolean(self, node, key, path, default=False):
        present, value = self._pop(node, key)
        if not present:
            return default
        if not isinstance(value, bool):
            self.fail(f"{path}.{key}", f"must be true or false, got {value!r}")
            return default
        return value

    def vector(self, node, key, path, default=None, required=False):
        """A scalar or list of numbers; returns a float array or None."""
        present, value = self._pop(node, key)
        full = f"{path}.{key}"
        if not present:
            if required:
                self.fail(full, "is required")
            return default
        if isinstance(value, bool):
            self.fail(full, "must be a number or list of numbers")
            return default
        if isinstance(value, (int, float)):
            return np.array([float(value)])
        if isinstance(value, list) and value and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            return np.array([float(v) for v in value])
        self.fail(full, "must be a number or non-empty list of numbers")
        return default


def _load_yaml(path):
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _env_seed(walker):
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        walker.fail(SEED_ENV, f"must be an integer, got {raw!r}")
        return None


# ---------------------------------------------------------------------------
# block builders
# ---------------------------------------------------------------------------


def _build_problem(walker, node, path, default_seed):
    block = walker.mapping(node, path, default_empty=False)
    if block is None:
        return None
    kind = walker.choice(block, "kind", path, problems.KINDS, required=True)
    source = walker.choice(block, "source", path, ("synthetic", "csv"), default="synthetic")
    svm_penalty = walker.number(block, "svm_penalty", path, default=1.0, minimum=0.0, exclusive=True)
    result = None
    if source == "csv":
        for key in ("n", "p", "conditioning"):
            if key in block:
                walker.fail(f"{path}.{key}", "is only valid with source: synthetic")
                block.pop(key)
        csv_path = walker.string(block, "path", path, required=True)
        if kind == "quadratic":
            walker.fail(f"{path}.kind", "quadratic problems have no CSV form")
        elif csv_path is not None and not walker.errors:
            try:
                dataset = problems.load_dataset_csv(csv_path, kind=kind)
                result = problems.SyntheticProblem(
                    problems.make_oracle(kind, dataset, svm_penalty), None
                )
            except (OSError, ValueError) as exc:
                walker.fail(f"{path}.path", str(exc))
    else:
        if "path" in block:
            walker.fail(f"{path}.path", "is only valid with source: csv")
            block.pop("path")
        n = walker.number(block, "n", path, required=True, integer=True, minimum=1)
        p = walker.number(block, "p", path, required=True, integer=True, minimum=1)
        conditioning = walker.number(block, "conditioning", path, default=1.0, minimum=1.0)
        seed = walker.number(block, "seed", path, default=default_seed, integer=True)
        if not walker.errors:
            result = problems.make_synthetic(
                kind, n, p, conditioning=conditioning, seed=seed, svm_penalty=svm_penalty
            )
    walker.reject_unknown(block, path)
    return result


def _build_constraint(walker, node, path):
    block = walker.mapping(node, path)
    if block is None:
        return None
    kind = walker.choice(
        block, "type", path, ("unconstrained", "l1_ball", "box"), default="unconstrained"
    )
    constraint = solver.Unconstrained()
    if kind == "l1_ball":
        radius = walker.number(block, "radius", path, required=True, minimum=0.0, exclusive=True)
        if radius is not None:
            constraint = solver.L1Ball(radius)
    elif kind == "box":
        lower = walker.vector(block, "lower", path, required=True)
        upper = walker.vector(block, "upper", path, required=True)
        if lower is not None and upper is not None:
            try:
                constraint = solver.Box(lower, upper)
            except ValueError as exc:
                walker.fail(path, str(exc))
    else:
        for key in ("radius", "lower", "upper"):
            if key in block:
                walker.fail(f"{path}.{key}", f"is not valid for type: {kind}")
                block.pop(key)
    walker.reject_unknown(block, path)
    return constraint


def _build_algorithm(walker, node, path, seed):
    block = walker.mapping(node, path, default_empty=False)
    if block is None:
        return None
    fields = {
        "driver": walker.choice(block, "driver", path, solver.DRIVERS, required=True),
        "epsilon": walker.unit_open(block, "epsilon", path, required=True),
        "delta": walker.unit_open(block, "delta", path, required=True),
        "schedule": walker.choice(block, "schedule", path, solver.SCHEDULES, default="constant"),
        "rho": walker.unit_open(block, "rho", path),
        "epsilon0": walker.unit_open(block, "epsilon0", path, default=0.5),
        "epsilon_grad": walker.number(block, "epsilon_grad", path, minimum=0.0, exclusive=True),
        "ridge": walker.number(block, "ridge", path, minimum=0.0),
        "spectral_rule": walker.choice(
            block, "spectral_rule", path, ("global", "local"), default="global"
        ),
        "variant": walker.choice(
            block, "variant", path, sampling.HESSIAN_VARIANTS, default="basic"
        ),
        "replacement": walker.choice(block, "replacement", path, sampling.SCHEMES, default="with"),
        "kappa": walker.number(block, "kappa", path, minimum=1.0),
        "kappa_first_power": walker.boolean(block, "kappa_first_power", path),
        "max_iterations": walker.number(
            block, "max_iterations", path, default=50, integer=True, minimum=1
        ),
        "step_tol": walker.number(
            block, "step_tol", path, default=1e-12, minimum=0.0, exclusive=True
        ),
        "inner_tol": walker.number(
            block, "inner_tol", path, default=solver.DEFAULT_INNER_TOL, minimum=0.0,
            exclusive=True,
        ),
        "inner_cap": walker.number(
            block, "inner_cap", path, default=solver.DEFAULT_INNER_CAP, integer=True, minimum=1
        ),
    }
    present, gb = walker._pop(block, "gradient_bound")
    if present:
        if isinstance(gb, str) and gb in ("max", "uniform", "pointwise"):
            fields["gradient_bound"] = gb
        elif isinstance(gb, (int, float)) and not isinstance(gb, bool) and gb >= 0:
            fields["gradient_bound"] = float(gb)
        else:
            walker.fail(
                f"{path}.gradient_bound", f"must be max, uniform, pointwise, or >= 0; got {gb!r}"
            )
    present, size = walker._pop(block, "sample_size")
    if present:
        if size == "full":
            fields["sample_size"] = "full"
        elif isinstance(size, int) and not isinstance(size, bool) and size >= 1:
            fields["sample_size"] = size
        else:
            walker.fail(f"{path}.sample_size", f"must be 'full' or a positive integer, got {size!r}")
    walker.reject_unknown(block, path)
    if walker.errors:
        return None
    try:
        return solver.AlgorithmConfig(seed=seed, **fields)
    except ValueError as exc:
        walker.fail(path, str(exc))
        return None


def _build_point(walker, node, key, path, p, allow_reference=False):
    present, value = walker._pop(node, key)
    full = f"{path}.{key}" if path else key
    if not present or value == "zeros":
        return np.zeros(p)
    if allow_reference and value == "reference":
        return "reference"
    if (
        isinstance(value, list)
        and value
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        arr = np.array([float(v) for v in value])
        if arr.shape != (p,):
            walker.fail(full, f"must have {p} entries, got {arr.size}")
            return None
        return arr
    walker.fail(full, f"must be 'zeros' or a list of {p} numbers")
    return None


# ---------------------------------------------------------------------------
# run command
# ---------------------------------------------------------------------------


def _trace_record(record):
    return json_line({key: getattr(record, key) for key in TRACE_KEYS})


def _summary_record(trace):
    last = trace.records[-1]
    return json_line(
        {
            "termination": trace.termination,
            "iterations": trace.iterations,
            "final_err": last.err,
            "final_step_norm": last.step_norm,
        }
    )


def _cmd_run(args):
    walker = _Walker()
    try:
        doc = _load_yaml(args.config)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = walker.number(doc, "seed", "", default=0, integer=True)
    env = _env_seed(walker)
    if env is not None:
        seed = env
    problem = _build_problem(walker, doc.pop("problem", None), "problem", seed)
    constraint = _build_constraint(walker, doc.pop("constraint", None), "constraint")
    config = _build_algorithm(walker, doc.pop("algorithm", None), "algorithm", seed)

    init = walker.mapping(doc.pop("init", None), "init")
    x0 = None
    if init is not None and problem is not None:
        x0 = _build_point(walker, init, "x0", "init", problem.oracle.p)
        walker.reject_unknown(init, "init")

    out = walker.mapping(doc.pop("output", None), "output")
    trace_path = None
    compute_reference = False
    if out is not None:
        trace_path = walker.string(out, "trace", "output")
        compute_reference = walker.boolean(out, "compute_reference", "output")
        walker.reject_unknown(out, "output")
    walker.reject_unknown(doc, "")

    try:
        walker.raise_if_failed()
    except ConfigError as exc:
        for line in str(exc).splitlines():
            print(f"config: {line}", file=sys.stderr)
        return EXIT_CONFIG

    oracle = problem.oracle
    try:
        x_star = None
        if compute_reference:
            x_star = (
                problem.solution
                if problem.solution is not None
                else harness.reference_minimizer(oracle, constraint)
            )
        trace = solver.run_algorithm(config, oracle, constraint, x0=x0, x_star=x_star)
    except ValueError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        CurvatureError,
        SubproblemError,
        DegeneratePilotError,
        ReferenceSolveError,
        OverflowError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    lines = [_trace_record(r) for r in trace.records]
    lines.append(_summary_record(trace))
    if trace_path is not None:
        try:
            with open(trace_path, "w") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            print(f"error: cannot write trace: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    print(lines[-1])
    return EXIT_OK if trace.termination == "tolerance" else EXIT_MAX_ITERATIONS


# ---------------------------------------------------------------------------
# verify command
# ---------------------------------------------------------------------------


def _check_common(walker, block, path):
    return {
        "epsilon": walker.unit_open(block, "epsilon", path, required=True),
        "delta": walker.unit_open(block, "delta", path, required=True),
        "trials": walker.number(block, "trials", path, default=100, integer=True, minimum=1),
        "threshold": walker.number(
            block, "threshold", path, default=0.9, minimum=0.0, maximum=1.0
        ),
        "size": walker.number(block, "size", path, integer=True, minimum=1),
        "size_scale": walker.number(
            block, "size_scale", path, default=1.0, minimum=0.0, exclusive=True
        ),
        "replacement": walker.choice(
            block, "replacement", path, sampling.SCHEMES, default="with"
        ),
    }


def _parse_checks(walker, node, path, seed):
    if node is None:
        return []
    if not isinstance(node, list):
        walker.fail(path, f"must be a list, got {type(node).__name__}")
        return []
    parsed = []
    for idx, item in enumerate(node):
        cpath = f"{path}[{idx}]"
        block = walker.mapping(item, cpath, default_empty=False)
        if block is None:
            continue
        name = walker.choice(block, "name", cpath, CHECK_NAMES, required=True)
        if name is None:
            continue
        spec = {"name": name}
        if name in ("hessian-spectrum", "hessian-operator"):
            spec.update(_check_common(walker, block, cpath))
            spec["variant"] = walker.choice(
                block, "variant", cpath, sampling.HESSIAN_VARIANTS, default="basic"
            )
            spec["kappa_first_power"] = walker.boolean(block, "kappa_first_power", cpath)
        elif name == "gradient-deviation":
            spec.update(_check_common(walker, block, cpath))
            present, bound = walker._pop(block, "bound")
            if not present or bound == "max":
                spec["bound"] = "max"
            elif bound == "uniform":
                spec["bound"] = "uniform"
            elif isinstance(bound, (int, float)) and not isinstance(bound, bool) and bound > 0:
                spec["bound"] = float(bound)
            else:
                walker.fail(f"{cpath}.bound", f"must be max, uniform, or > 0; got {bound!r}")
        elif name == "single-step-contraction":
            spec.update(_check_common(walker, block, cpath))
            spec["distance"] = walker.number(
                block, "distance", cpath, required=True, minimum=0.0, exclusive=True
            )
            spec["bound"] = walker.number(block, "bound", cpath, minimum=0.0, exclusive=True)
            spec["lipschitz"] = walker.number(block, "lipschitz", cpath, minimum=0.0)
            spec["variant"] = walker.choice(
                block, "variant", cpath, sampling.HESSIAN_VARIANTS, default="basic"
            )
        else:  # convergence-rates
            spec["runs"] = walker.number(block, "runs", cpath, default=20, integer=True, minimum=1)
            spec["threshold"] = walker.number(
                block, "threshold", cpath, default=0.9, minimum=0.0, maximum=1.0
            )
            spec["expect"] = walker.choice(
                block, "expect", cpath, ("superlinear", "q_linear"), required=True
            )
            spec["start_distance"] = walker.number(
                block, "start_distance", cpath, required=True, minimum=0.0, exclusive=True
            )
            spec["floor"] = walker.number(block, "floor", cpath, default=1e-13, minimum=0.0)
            spec["tail"] = walker.number(block, "tail", cpath, default=4, integer=True, minimum=2)
            spec["algorithm"] = _build_algorithm(
                walker, block.pop("algorithm", None), f"{cpath}.algorithm", seed
            )
        walker.reject_unknown(block, cpath)
        parsed.append(spec)
    return parsed


def _run_check(spec, oracle, constraint, point, x_star_fn, seed):
    name = spec["name"]
    if name in ("hessian-spectrum", "hessian-operator"):
        report = harness.hessian_concentration(
            oracle,
            point,
            spec["epsilon"],
            spec["delta"],
            spec["trials"],
            variant=spec["variant"],
            replacement=spec["replacement"],
            seed=seed,
            size=spec["size"],
            size_scale=spec["size_scale"],
            kappa_first_power=spec["kappa_first_power"],
        )
        statement = "spectrum" if name == "hessian-spectrum" else "operator_joint"
        statistic = report.wilson[statement]
        details = {
            "size": report.size,
            "frequency": report.frequencies[statement],
            "wilson_lower": statistic,
            "frequencies": report.frequencies,
        }
    elif name == "gradient-deviation":
        bound = spec["bound"]
        g_bound = None
        if bound == "uniform":
            g_bound = problems.gradient_bound(oracle, mode="uniform")
        elif isinstance(bound, float):
            g_bound = bound
        report = harness.gradient_concentration(
            oracle,
            point,
            spec["epsilon"],
            spec["delta"],
            spec["trials"],
            replacement=spec["replacement"],
            seed=seed,
            size=spec["size"],
            size_scale=spec["size_scale"],
            g_bound=g_bound,
        )
        statistic = report.wilson["deviation"]
        details = {
            "size": report.size,
            "frequency": report.frequencies["deviation"],
            "wilson_lower": statistic,
            "g_bound": report.details["g_bound"],
        }
    elif name == "single-step-contraction":
        lipschitz = spec["lipschitz"]
        if spec["bound"] is None and lipschitz is None:
            lipschitz = harness.hessian_lipschitz(oracle)
            if lipschitz is None:
                raise ValueError(
                    "single-step-contraction: no analytic lipschitz for this family; "
                    "pass bound or lipschitz"
                )
        report = harness.single_step_contraction(
            oracle,
            x_star_fn(),
            spec["epsilon"],
            spec["delta"],
            spec["trials"],
            spec["distance"],
            bound=spec["bound"],
            variant=spec["variant"],
            replacement=spec["replacement"],
            constraint=constraint,
            seed=seed,
            lipschitz=lipschitz,
            size=spec["size"],
        )
        statistic = report.wilson["contraction"]
        details = {
            "bound": report.bound,
            "frequency": report.frequencies["contraction"],
            "wilson_lower": statistic,
            "size": report.details["size"],
        }
    else:  # convergence-rates
        config = spec["algorithm"]
        x_star = x_star_fn()
        successes = 0
        for r in range(spec["runs"]):
            rng = sampling.generator((seed, r, 101))
            direction = rng.standard_normal(oracle.p)
            x0 = x_star + spec["start_distance"] * direction / np.linalg.norm(direction)
            if constraint is not None:
                x0 = constraint.project(x0)
            trace = solver.run_algorithm(
                config.with_seed((seed, r)), oracle, constraint, x0=x0, x_star=x_star
            )
            rates = harness.fit_rates(
                trace, x_star=x_star, floor=spec["floor"], tail=spec["tail"]
            )
            successes += rates.superlinear if spec["expect"] == "superlinear" else rates.q_linear
        statistic = successes / spec["runs"]
        details = {"runs": spec["runs"], "frequency": statistic}
    passed = statistic >= spec["threshold"]
    return {
        "name": name,
        "passed": passed,
        "statistic": statistic,
        "threshold": spec["threshold"],
        **details,
    }


def _cmd_verify(args):
    walker = _Walker()
    try:
        doc = _load_yaml(args.config)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = walker.number(doc, "seed", "", default=0, integer=True)
    env = _env_seed(walker)
    if env is not None:
        seed = env
    problem = _build_problem(walker, doc.pop("problem", None), "problem", seed)
    constraint = _build_constraint(walker, doc.pop("constraint", None), "constraint")
    point = None
    if problem is not None:
        point = _build_point(walker, doc, "point", "", problem.oracle.p, allow_reference=True)
    checks = _parse_checks(walker, doc.pop("checks", None), "checks", seed)
    report_path = walker.string(doc, "output", "")
    walker.reject_unknown(doc, "")
    try:
        walker.raise_if_failed()
    except ConfigError as exc:
        for line in str(exc).splitlines():
            print(f"config: {line}", file=sys.stderr)
        return EXIT_CONFIG

    oracle = problem.oracle
    cache = {}

    def x_star_fn():
        if "x_star" not in cache:
            cache["x_star"] = (
                problem.solution
                if problem.solution is not None
                else harness.reference_minimizer(oracle, constraint)
            )
        return cache["x_star"]

    if isinstance(point, str):  # "reference"
        point = x_star_fn()

    records = []
    try:
        for spec in checks:
            record = _run_check(spec, oracle, constraint, point, x_star_fn, seed)
            records.append(record)
            status = "PASS" if record["passed"] else "FAIL"
            print(
                f"check {record['name']}: {status} "
                f"(statistic={record['statistic']:.4g}, threshold={record['threshold']:.4g})"
            )
    except (
        ValueError,
        OverflowError,
        CurvatureError,
        SubproblemError,
        DegeneratePilotError,
        ReferenceSolveError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    all_passed = all(r["passed"] for r in records)
    report = {"seed": seed, "checks": records, "passed": all_passed}
    if report_path is not None:
        try:
            with open(report_path, "w") as fh:
                fh.write(json_line(report) + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    print(f"verify: {'PASS' if all_passed else 'FAIL'} ({len(records)} checks)")
    return EXIT_OK if all_passed else EXIT_CONFIG


# ---------------------------------------------------------------------------
# gen-data and report commands
# ---------------------------------------------------------------------------


def _cmd_gen_data(args):
    kinds = problems.GLM_KINDS + ("svm",)
    if args.kind not in kinds:
        print(f"config: kind: must be one of {', '.join(kinds)}", file=sys.stderr)
        return EXIT_CONFIG
    if args.n < 1 or args.p < 1:
        print("config: n and p must be positive", file=sys.stderr)
        return EXIT_CONFIG
    if args.conditioning < 1.0:
        print("config: conditioning: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    problem = problems.make_synthetic(
        args.kind,
        args.n,
        args.p,
        conditioning=args.conditioning,
        seed=args.seed,
        svm_penalty=args.svm_penalty,
    )
    try:
        problems.save_dataset_csv(problem.oracle.dataset, args.out)
    except OSError as exc:
        print(f"error: cannot write dataset: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {args.kind} dataset n={args.n} p={args.p} to {args.out}")
    return EXIT_OK


def _cmd_report(args):
    try:
        with open(args.trace) as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
    except OSError as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    for i, line in enumerate(lines):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            print(f"error: {args.trace}:{i + 1}: invalid JSON: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(record, dict) and "k" in record:
            rows.append(record)
    out_lines = [",".join(REPORT_COLUMNS)]
    prev_err = None
    for record in rows:
        err = record.get("err")
        ratio = None
        if err is not None and prev_err is not None and prev_err > 0:
            ratio = err / prev_err
        prev_err = err
        cells = []
        for col in REPORT_COLUMNS:
            value = ratio if col == "ratio" else record.get(col)
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(format(value, ".17g"))
            else:
                cells.append(str(value))
        out_lines.append(",".join(cells))
    try:
        with open(args.out, "w") as fh:
            fh.write("\n".join(out_lines) + "\n")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="subnewton",
        description="Sub-sampled Newton drivers, diagnostics, and dataset tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a driver per a YAML config")
    run_p.add_argument("config", help="path to the run config")

    ver_p = sub.add_parser("verify", help="run concentration/rate checks per a YAML config")
    ver_p.add_argument("config", help="path to the verify config")

    gen_p = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    gen_p.add_argument("--kind", required=True, help="ols|logistic|poisson|svm")
    gen_p.add_argument("--n", type=int, required=True)
    gen_p.add_argument("--p", type=int, required=True)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--conditioning", type=float, default=1.0)
    gen_p.add_argument("--svm-penalty", type=float, default=1.0, dest="svm_penalty")
    gen_p.add_argument("--out", required=True)

    rep_p = sub.add_parser("report", help="summarize a JSONL trace into a CSV rate table")
    rep_p.add_argument("--trace", required=True)
    rep_p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "verify": _cmd_verify,
        "gen-data": _cmd_gen_data,
        "report": _cmd_report,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
