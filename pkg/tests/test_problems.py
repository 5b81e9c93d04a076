import numpy as np
import pytest
from scipy.special import expit

from subnewton.geometry import ConeBasis
from subnewton.problems import (
    Dataset,
    GLMOracle,
    QuadraticOracle,
    SvmOracle,
    component_eval,
    full_eval,
    gradient_bound,
    load_dataset_csv,
    make_oracle,
    make_synthetic,
    save_dataset_csv,
    validate_labels,
)

ALL_KINDS = ("ols", "logistic", "poisson", "svm", "quadratic")


def make_problem(kind, n=12, p=3, seed=0):
    return make_synthetic(kind, n, p, seed=seed).oracle


def stored_order_weighted(oracle, x, weights, what):
    """Independent oracle: accumulate weighted components one by one in index order."""
    total = None
    for i in range(oracle.n):
        term = weights[i] * np.asarray(component_eval(oracle, i, x, what))
        total = term if total is None else total + term
    return total


def central_difference_gradient(fun, x, h):
    p = x.size
    out = np.empty(p)
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        out[j] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out


# -- datasets and label validation -----------------------------------------------


def test_dataset_shape_validation():
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 2)), np.ones(4))
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]), np.array([1.0]))


def test_label_domains():
    validate_labels("ols", np.array([-1.5, 2.0]))
    validate_labels("logistic", np.array([0.0, 1.0]))
    validate_labels("poisson", np.array([0.0, 3.0]))
    validate_labels("svm", np.array([-1.0, 1.0]))
    with pytest.raises(ValueError):
        validate_labels("logistic", np.array([0.0, 2.0]))
    with pytest.raises(ValueError):
        validate_labels("poisson", np.array([1.5]))
    with pytest.raises(ValueError):
        validate_labels("poisson", np.array([-1.0]))
    with pytest.raises(ValueError):
        validate_labels("svm", np.array([0.0, 1.0]))


def test_component_index_range():
    oracle = make_problem("ols")
    with pytest.raises(ValueError):
        oracle.component_value(-1, np.zeros(3))
    with pytest.raises(ValueError):
        oracle.component_value(oracle.n, np.zeros(3))


# -- hand-computed component formulas ---------------------------------------------


def test_ols_component_gradient_by_hand():
    data = Dataset(np.array([[1.0, 0.0]]), np.array([1.0]))
    oracle = GLMOracle("ols", data)
    # (a^T x - b) a = (2 - 1) (1, 0)
    assert np.allclose(oracle.component_gradient(0, np.array([2.0, 0.0])), [1.0, 0.0])


def test_logistic_gradient_factor_at_zero_margin():
    data = Dataset(np.array([[0.4, -0.3]]), np.array([1.0]))
    oracle = GLMOracle("logistic", data)
    g = oracle.component_gradient(0, np.zeros(2))
    # sigmoid(0) = 1/2 so the factor is (0.5 - b)
    assert np.allclose(g, (0.5 - 1.0) * data.features[0], atol=1e-14)


def test_logistic_hessian_factor():
    data = Dataset(np.array([[1.0, 2.0]]), np.array([0.0]))
    oracle = GLMOracle("logistic", data)
    x = np.array([0.3, -0.1])
    t = float(data.features[0] @ x)
    expected = expit(t) * (1.0 - expit(t)) * np.outer(data.features[0], data.features[0])
    assert np.allclose(oracle.component_hessian(0, x), expected, atol=1e-14)


def test_poisson_gradient_at_zero_margins():
    # e^0 = 1, so the full gradient is (1/n) sum (1 - b_i) a_i
    oracle = make_problem("poisson", n=9, p=4, seed=3)
    a = oracle.dataset.features
    b = oracle.dataset.labels
    expected = (1.0 - b) @ a / oracle.n
    assert np.allclose(oracle.gradient(np.zeros(4)), expected, atol=1e-14)


def test_poisson_overflow_guard():
    data = Dataset(np.array([[1.0]]), np.array([0.0]))
    oracle = GLMOracle("poisson", data)
    with pytest.raises(OverflowError):
        oracle.component_value(0, np.array([701.0]))
    with pytest.raises(OverflowError):
        oracle.gradient(np.array([800.0]))


def test_svm_inactive_component_is_pure_ridge():
    data = Dataset(np.array([[1.0, 0.0]]), np.array([1.0]))
    oracle = SvmOracle(data, penalty=2.0)
    x = np.array([2.0, 1.0])  # b a^T x = 2 > 1, hinge inactive
    assert np.allclose(oracle.component_gradient(0, x), x)
    assert np.allclose(oracle.component_hessian(0, x), np.eye(2))


def test_svm_active_component_by_hand():
    a = np.array([0.6, -0.8])
    data = Dataset(a[None, :], np.array([-1.0]))
    c = 1.5
    oracle = SvmOracle(data, penalty=c)
    x = np.array([0.2, 0.1])
    t = float(a @ x)
    assert data.labels[0] * t < 1.0
    expected_g = 2.0 * c * (t - (-1.0)) * a + x
    expected_h = 2.0 * c * np.outer(a, a) + np.eye(2)
    assert np.allclose(oracle.component_gradient(0, x), expected_g, atol=1e-14)
    assert np.allclose(oracle.component_hessian(0, x), expected_h, atol=1e-14)


def test_svm_value_objective_matches_primal_form():
    oracle = make_problem("svm", n=8, p=3, seed=2)
    x = np.array([0.3, -0.2, 0.5])
    t = oracle.dataset.features @ x
    gaps = np.maximum(0.0, 1.0 - oracle.dataset.labels * t)
    primal = oracle.penalty / oracle.n * np.sum(gaps**2) + 0.5 * x @ x
    assert oracle.value(x) == pytest.approx(primal, rel=1e-12)


def test_quadratic_single_component_solution():
    oracle = QuadraticOracle(np.eye(2)[None, :, :], np.array([[1.0, 1.0]]))
    assert np.allclose(oracle.solution, [1.0, 1.0], atol=1e-14)


def test_quadratic_requires_symmetric_components():
    bad = np.array([[[1.0, 2.0], [0.0, 1.0]]])
    with pytest.raises(ValueError, match="symmetric"):
        QuadraticOracle(bad, np.zeros((1, 2)))


def test_quadratic_all_identity_full_hessian():
    mats = np.repeat(np.eye(3)[None, :, :], 5, axis=0)
    oracle = QuadraticOracle(mats, np.zeros((5, 3)))
    assert np.allclose(full_eval(oracle, np.ones(3), "hessian"), np.eye(3), atol=1e-14)


def test_two_component_gradient_average():
    mats = np.repeat(np.eye(2)[None, :, :], 2, axis=0)
    # gradients at x=0 are -c_i; choose c to make them (1,0) and (0,1)
    lin = -np.array([[1.0, 0.0], [0.0, 1.0]])
    oracle = QuadraticOracle(mats, lin)
    assert np.allclose(oracle.gradient(np.zeros(2)), [0.5, 0.5], atol=1e-14)


# -- aggregation paths -------------------------------------------------------------


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("what", ["value", "gradient", "hessian"])
def test_weighted_matches_stored_order_accumulation(kind, what):
    oracle = make_problem(kind, n=14, p=3, seed=5)
    rng = np.random.default_rng(8)
    x = 0.2 * rng.standard_normal(3)
    weights = rng.random(14)
    weights /= weights.sum()
    got = getattr(oracle, f"weighted_{what}")(x, weights)
    expected = stored_order_weighted(oracle, x, weights, what)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_full_eval_is_uniform_weighting(kind):
    oracle = make_problem(kind, n=10, p=3, seed=6)
    x = np.full(3, 0.1)
    w = np.full(10, 0.1)
    assert full_eval(oracle, x, "value") == oracle.weighted_value(x, w)
    assert np.array_equal(full_eval(oracle, x, "gradient"), oracle.weighted_gradient(x, w))
    assert np.array_equal(full_eval(oracle, x, "hessian"), oracle.weighted_hessian(x, w))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_full_gradient_matches_finite_differences(kind):
    oracle = make_problem(kind, n=20, p=4, seed=7)
    rng = np.random.default_rng(9)
    x = 0.15 * rng.standard_normal(4)
    if kind == "svm" and oracle.hinge_margin(x) < 1e-4:
        x = x * 1.07
    h = 1e-6 * (1.0 + np.linalg.norm(x))
    fd = central_difference_gradient(oracle.value, x, h)
    g = oracle.gradient(x)
    assert np.abs(fd - g).max() <= 1e-5 * max(1e-8, np.abs(g).max())


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_component_hessians_symmetric_and_curved(kind):
    oracle = make_problem(kind, n=8, p=3, seed=10)
    rng = np.random.default_rng(11)
    x = 0.2 * rng.standard_normal(3)
    for i in range(oracle.n):
        h = oracle.component_hessian(i, x)
        assert np.allclose(h, h.T, atol=1e-12)
        low = np.linalg.eigvalsh(h)[0]
        if kind == "svm":
            assert low >= 1.0 - 1e-12  # ridge folded into every component
        elif kind != "quadratic":
            assert low >= -1e-12  # GLM components are PSD


def test_hessian_constant_for_quadratic_families():
    for kind in ("ols", "quadratic"):
        oracle = make_problem(kind, n=6, p=3, seed=12)
        h1 = oracle.hessian(np.zeros(3))
        h2 = oracle.hessian(np.array([1.0, -2.0, 0.5]))
        assert np.array_equal(h1, h2)
        assert oracle.hessian_lipschitz_bound() == 0.0


# -- analysis helpers ---------------------------------------------------------------


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gradient_norms_match_componentwise(kind):
    oracle = make_problem(kind, n=9, p=3, seed=13)
    x = np.array([0.1, -0.3, 0.2])
    norms = oracle.component_gradient_norms(x)
    expected = [np.linalg.norm(oracle.component_gradient(i, x)) for i in range(oracle.n)]
    assert np.allclose(norms, expected, rtol=1e-12, atol=1e-14)
    assert oracle.max_component_gradient_norm(x) == pytest.approx(max(expected), rel=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_spectral_bounds_match_dense_eig(kind):
    oracle = make_problem(kind, n=7, p=3, seed=14)
    rng = np.random.default_rng(15)
    x = 0.1 * rng.standard_normal(3)
    u = ConeBasis(np.linalg.qr(rng.standard_normal((3, 2)))[0][:, :2])
    bounds = oracle.component_spectral_bounds(x, u)
    for i in range(oracle.n):
        restricted = u.columns.T @ oracle.component_hessian(i, x) @ u.columns
        ev = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
        assert bounds[i] == pytest.approx(max(abs(ev[0]), abs(ev[-1])), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_curvature_bounds_dominate_full_hessian(kind):
    oracle = make_problem(kind, n=10, p=3, seed=16)
    x = np.full(3, 0.05)
    big, gamma = oracle.curvature_bounds(x)
    ev = np.linalg.eigvalsh(oracle.hessian(x))
    assert gamma == pytest.approx(ev[0], rel=1e-10, abs=1e-12)
    assert big >= ev[-1] - 1e-10


@pytest.mark.parametrize("kind", ("ols", "logistic", "poisson", "svm"))
def test_second_moment_matches_componentwise_loop(kind):
    oracle = make_problem(kind, n=8, p=3, seed=17)
    x = np.array([0.2, 0.0, -0.1])
    acc = np.zeros((3, 3))
    for i in range(oracle.n):
        h = oracle.component_hessian(i, x)
        acc += h @ h
    acc /= oracle.n
    assert np.allclose(oracle.second_moment(x), acc, rtol=1e-12, atol=1e-14)


# -- gradient-norm bounds ------------------------------------------------------------


def test_uniform_bound_ols_single_row():
    data = Dataset(np.array([[1.0, 0.0]]), np.array([0.0]))
    oracle = GLMOracle("ols", data)
    assert gradient_bound(oracle, mode="uniform") == pytest.approx(1.0)


def test_uniform_bound_zero_feature_row():
    data = Dataset(np.array([[0.0, 0.0]]), np.array([0.0]))
    oracle = GLMOracle("logistic", data)
    assert gradient_bound(oracle, mode="uniform") == 0.0


@pytest.mark.parametrize("kind", ("ols", "logistic", "poisson"))
def test_uniform_bound_sound_over_l1_ball(kind):
    oracle = make_problem(kind, n=15, p=4, seed=18)
    g = gradient_bound(oracle, mode="uniform")
    rng = np.random.default_rng(19)
    for _ in range(200):
        x = rng.standard_normal(4)
        x = x / np.abs(x).sum() * rng.random()  # random point of the unit l1 ball
        assert oracle.max_component_gradient_norm(x) <= g * (1.0 + 1e-12)


def test_uniform_bound_rejects_svm():
    oracle = make_problem("svm")
    with pytest.raises(ValueError, match="GLM"):
        gradient_bound(oracle, mode="uniform")


def test_pointwise_bound_svm():
    oracle = make_problem("svm", n=12, p=3, seed=20)
    c = oracle.penalty
    norms = np.linalg.norm(oracle.dataset.features, axis=1)
    assert gradient_bound(oracle, np.zeros(3), mode="pointwise") == pytest.approx(
        2.0 * c * (np.abs(oracle.dataset.labels) * norms).max()
    )
    rng = np.random.default_rng(21)
    for _ in range(50):
        x = rng.standard_normal(3)
        bound = gradient_bound(oracle, x, mode="pointwise")
        assert oracle.max_component_gradient_norm(x) <= bound * (1.0 + 1e-12)


def test_pointwise_bound_rejects_glm():
    oracle = make_problem("logistic")
    with pytest.raises(ValueError, match="svm"):
        gradient_bound(oracle, np.zeros(3), mode="pointwise")


def test_logistic_lipschitz_bound_formula():
    oracle = make_problem("logistic", n=10, p=3, seed=22)
    cubes = np.linalg.norm(oracle.dataset.features, axis=1) ** 3
    assert oracle.hessian_lipschitz_bound() == pytest.approx(
        cubes.max() / (6.0 * np.sqrt(3.0)), rel=1e-12
    )


def test_logistic_lipschitz_bound_sound_on_sampled_pairs():
    oracle = make_problem("logistic", n=6, p=3, seed=23)
    bound = oracle.hessian_lipschitz_bound()
    rng = np.random.default_rng(24)
    for _ in range(100):
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        i = rng.integers(oracle.n)
        dh = oracle.component_hessian(i, u) - oracle.component_hessian(i, v)
        rate = np.abs(np.linalg.eigvalsh(dh)).max() / np.linalg.norm(u - v)
        assert rate <= bound * (1.0 + 1e-9)


def test_svm_has_no_lipschitz_constant():
    assert make_problem("svm").hessian_lipschitz_bound() is None


# -- synthetic generation and CSV round-trip -----------------------------------------


def test_make_synthetic_deterministic():
    a = make_synthetic("logistic", 30, 4, seed=77)
    b = make_synthetic("logistic", 30, 4, seed=77)
    assert np.array_equal(a.oracle.dataset.features, b.oracle.dataset.features)
    assert np.array_equal(a.oracle.dataset.labels, b.oracle.dataset.labels)


def test_make_synthetic_quadratic_solution_is_stationary():
    prob = make_synthetic("quadratic", 4, 3, seed=7)
    assert np.linalg.norm(prob.oracle.gradient(prob.solution)) <= 1e-12


@pytest.mark.parametrize("kind", ("ols", "logistic", "poisson", "svm"))
def test_make_synthetic_labels_valid(kind):
    prob = make_synthetic(kind, 25, 3, seed=31)
    validate_labels(kind if kind != "quadratic" else "ols", prob.oracle.dataset.labels)
    norms = np.linalg.norm(prob.oracle.dataset.features, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)  # rows normalized for the GLM bounds


def test_make_oracle_dispatch():
    data = make_synthetic("logistic", 10, 2, seed=1).oracle.dataset
    assert isinstance(make_oracle("logistic", data), GLMOracle)
    with pytest.raises(ValueError):
        make_oracle("quadratic", data)


def test_csv_round_trip_exact(tmp_path):
    prob = make_synthetic("poisson", 17, 3, seed=41)
    path = tmp_path / "data.csv"
    save_dataset_csv(prob.oracle.dataset, path)
    loaded = load_dataset_csv(path, kind="poisson")
    assert np.array_equal(loaded.features, prob.oracle.dataset.features)
    assert np.array_equal(loaded.labels, prob.oracle.dataset.labels)
    with open(path) as fh:
        assert fh.readline().strip() == "b,a1,a2,a3"


def test_csv_header_and_row_validation(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("label,a1\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        load_dataset_csv(bad_header)
    ragged = tmp_path / "r.csv"
    ragged.write_text("b,a1,a2\n1,2,3\n1,2\n")
    with pytest.raises(ValueError, match="row 3"):
        load_dataset_csv(ragged)
    empty = tmp_path / "e.csv"
    empty.write_text("b,a1\n")
    with pytest.raises(ValueError, match="no data rows"):
        load_dataset_csv(empty)
