"""Sample-size calculators, seeded index draws, and sub-sampled assembly.

Sizes follow matrix-concentration bounds: with the returned |S|, the
sub-sampled Hessian/gradient deviates from the full average by at most a
relative/absolute epsilon with probability 1 - delta. Draws use the Philox
counter-based 64-bit generator with one stream per (seed, iteration,
purpose) so that independent draws inside one iteration never share state.
"""

import math
from dataclasses import dataclass, field

import numpy as np

HESSIAN_VARIANTS = ("basic", "convex", "intrinsic")
SCHEMES = ("with", "without")

# Stream purposes for per-iteration splitting.
PURPOSE_HESSIAN = 0
PURPOSE_GRADIENT = 1
PURPOSE_SHARED = 2
PURPOSE_PILOT = 3

# Above this size a with-replacement multiset is drawn directly as its
# multiplicity vector (multinomial) instead of an explicit index array; the
# two are exact samplers of the same law and the switch depends only on
# (n, size, scheme), so determinism is preserved.
INDEX_LIMIT = 1 << 23


def _check_open_unit(value, name):
    v = float(value)
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return v


@dataclass(frozen=True)
class SampleSizePolicy:
    """Which concentration bound sizes the Hessian draw, and at what accuracy."""

    variant: str
    epsilon: float
    delta: float
    replacement: str = "with"

    def __post_init__(self):
        if self.variant not in HESSIAN_VARIANTS + ("gradient",):
            raise ValueError(
                f"variant must be one of {HESSIAN_VARIANTS + ('gradient',)}, got {self.variant!r}"
            )
        _check_open_unit(self.epsilon, "epsilon")
        _check_open_unit(self.delta, "delta")
        if self.replacement not in SCHEMES:
            raise ValueError(f"replacement must be 'with' or 'without', got {self.replacement!r}")
        if self.variant == "intrinsic":
            if self.epsilon > 0.5:
                raise ValueError("intrinsic variant requires epsilon <= 1/2")
            if self.replacement != "with":
                raise ValueError("intrinsic variant requires with-replacement sampling")


def hessian_sample_bound(
    variant, epsilon, delta, kappa, p, d_intrinsic=None, kappa_first_power=False
):
    """Real-valued bound before the ceiling; see hessian_sample_size."""
    eps = _check_open_unit(epsilon, "epsilon")
    dlt = _check_open_unit(delta, "delta")
    kap = float(kappa)
    if not kap >= 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa!r}")
    if variant not in HESSIAN_VARIANTS:
        raise ValueError(f"variant must be one of {HESSIAN_VARIANTS}, got {variant!r}")
    kpow = kap if kappa_first_power else kap * kap
    if variant == "intrinsic":
        if eps > 0.5:
            raise ValueError("intrinsic variant requires epsilon <= 1/2")
        if d_intrinsic is None:
            raise ValueError("intrinsic variant requires d_intrinsic")
        d = float(d_intrinsic)
        if not d >= 1.0:
            raise ValueError(f"intrinsic dimension must be >= 1, got {d_intrinsic!r}")
        return 16.0 * kpow * math.log(8.0 * d / dlt) / (3.0 * eps * eps)
    if int(p) < 1:
        raise ValueError(f"p must be a positive dimension, got {p!r}")
    lead = 16.0 if variant == "basic" else 4.0
    return lead * kpow * math.log(2.0 * int(p) / dlt) / (eps * eps)


def hessian_sample_size(
    variant, epsilon, delta, kappa, p, d_intrinsic=None, kappa_first_power=False
):
    """Smallest integer |S| satisfying the chosen Hessian concentration bound.

    variant "basic" covers arbitrary (possibly non-convex) components,
    "convex" assumes every component is convex (smaller constant), and
    "intrinsic" replaces the ambient-dimension log factor with the intrinsic
    dimension d of the second-moment matrix. `kappa_first_power` switches to
    the cheaper first-power-condition-number form of the size (off by
    default; the squared form is the one all guarantees here use).
    """
    bound = hessian_sample_bound(
        variant, epsilon, delta, kappa, p, d_intrinsic, kappa_first_power
    )
    return max(1, math.ceil(bound))


def gradient_sample_bound(g_bound, epsilon, delta):
    eps = float(epsilon)
    if not eps > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    dlt = _check_open_unit(delta, "delta")
    g = float(g_bound)
    if not g >= 0.0 or not np.isfinite(g):
        raise ValueError(f"gradient bound must be finite and >= 0, got {g_bound!r}")
    radical = 1.0 + math.sqrt(8.0 * math.log(1.0 / dlt))
    return (g * g / (eps * eps)) * radical * radical


def gradient_sample_size(g_bound, epsilon, delta):
    """Smallest |S| making ||full gradient - sampled gradient|| <= epsilon
    hold with probability 1 - delta, given ||grad f_i|| <= g_bound for all i."""
    return max(1, math.ceil(gradient_sample_bound(g_bound, epsilon, delta)))


def intrinsic_dimension(second_moment):
    """trace(V) / ||V||_2 for a PSD second-moment matrix V (scale-invariant)."""
    v = np.asarray(second_moment, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("second-moment matrix must be square")
    if not np.isfinite(v).all():
        raise ValueError("second-moment matrix contains non-finite entries")
    v = 0.5 * (v + v.T)
    ev = np.linalg.eigvalsh(v)
    top = float(ev[-1])
    if top <= 0.0:
        raise ValueError("second-moment matrix must be nonzero PSD")
    if float(ev[0]) < -1e-10 * top:
        raise ValueError("second-moment matrix must be PSD")
    return float(np.clip(ev, 0.0, None).sum() / top)


# ---------------------------------------------------------------------------
# draws
# ---------------------------------------------------------------------------


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    return np.random.SeedSequence(int(seed))


def generator(seed):
    """Philox generator for the given seed scalar/tuple."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed)))


def stream_seed(seed, iteration, purpose):
    """Per-(iteration, purpose) stream key derived from a master seed."""
    base = seed if isinstance(seed, (tuple, list)) else (seed,)
    return tuple(int(s) for s in base) + (int(iteration), int(purpose))


class SampleSet:
    """A drawn multiset of component indices over population {0..n-1}.

    Stores either an explicit index array or, for very large
    with-replacement draws, only the multiplicity vector. `counts` is the
    canonical representation used by the assembly routines.
    """

    def __init__(self, population, size, scheme, indices=None, counts=None, seed_key=None):
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be 'with' or 'without', got {scheme!r}")
        self.population = int(population)
        self.size = int(size)
        self.scheme = scheme
        self.seed_key = seed_key
        self._indices = indices
        self._counts = counts
        if indices is None and counts is None:
            raise ValueError("SampleSet needs indices or counts")

    @property
    def counts(self):
        if self._counts is None:
            self._counts = np.bincount(self._indices, minlength=self.population)
        return self._counts

    @property
    def indices(self):
        """An index-array realization (sorted when reconstructed from counts)."""
        if self._indices is None:
            self._indices = np.repeat(
                np.arange(self.population, dtype=np.int64), self.counts
            )
        return self._indices

    def weights(self):
        """Multiplicity weights summing to 1: counts / size."""
        return self.counts / self.size


def full_sample(n):
    """Deterministic exhaustive sample: every index exactly once."""
    if n < 1:
        raise ValueError("population must be positive")
    return SampleSet(n, n, "without", counts=np.ones(n, dtype=np.int64), seed_key=None)


def draw_sample(n, size, scheme="with", seed=0):
    """Draw |S|=size indices from {0..n-1}, uniformly, per `scheme`.

    Identical (seed, n, size, scheme) always produce the identical multiset.
    """
    n = int(n)
    size = int(size)
    if n < 1:
        raise ValueError("population must be positive")
    if size < 1:
        raise ValueError("sample size must be positive")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be 'with' or 'without', got {scheme!r}")
    if scheme == "without" and size > n:
        raise ValueError(f"cannot draw {size} without replacement from {n}")
    key = seed if isinstance(seed, tuple) else None
    rng = generator(seed)
    if scheme == "without":
        idx = np.sort(rng.choice(n, size=size, replace=False)).astype(np.int64)
        return SampleSet(n, size, scheme, indices=idx, seed_key=key)
    if size > INDEX_LIMIT:
        counts = rng.multinomial(size, np.full(n, 1.0 / n)).astype(np.int64)
        return SampleSet(n, size, scheme, counts=counts, seed_key=key)
    idx = rng.integers(0, n, size=size, dtype=np.int64)
    return SampleSet(n, size, scheme, indices=idx, seed_key=key)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsampledModel:
    """Gradient/Hessian estimate for one iteration plus draw provenance."""

    gradient: np.ndarray = field(repr=False)
    hessian: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)


def _check_sample(oracle, sample):
    if sample.population != oracle.n:
        raise ValueError(
            f"sample population {sample.population} does not match oracle n={oracle.n}"
        )


def assemble_subsampled_hessian(oracle, x, sample):
    """Multiplicity-weighted average of component Hessians over the multiset."""
    _check_sample(oracle, sample)
    return oracle.weighted_hessian(x, sample.weights())


def assemble_subsampled_gradient(oracle, x, sample):
    """Multiplicity-weighted average of component gradients over the multiset."""
    _check_sample(oracle, sample)
    return oracle.weighted_gradient(x, sample.weights())
