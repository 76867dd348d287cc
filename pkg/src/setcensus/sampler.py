"""Boltzmann sampling of labeled forests of connected structures.

The Boltzmann model at parameter x draws a number of components kappa from
Poisson(C(x)), then kappa independent component sizes with
P(size = j) proportional to |C_j| x^j / j!.  Conditioning the size vector on
total n and dressing the sizes with a uniform set partition and uniform
component structures yields an exactly uniform object among those with n
vertices and the drawn number of components.

Size tables are truncated at n_max and renormalized; the truncated model is
itself an exact Boltzmann model for the truncated class, which gives the
cross-check identity (valid whenever n_max >= n - k + 1):

    (k!/n!) * count(n, k) = C(x)^k * x^{-n} * P(size_1 + ... + size_k = n)

with C(x) the truncated normalizer.  sum_size_probability_exact evaluates the
right-hand P as an exact rational; mc_sum_probability estimates it by
simulation.

All randomness flows through a caller-supplied numpy Generator; a fixed seed
fixes every sample exactly.
"""

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import asymptotics
from . import powerseries as ps
from . import species
from .errors import (
    DivergenceError,
    DomainError,
    PrecisionError,
    RetryBudgetError,
)

DEFAULT_MASS_TOL = 1e-6
_MAX_TABLE = 5_000_000  # cap for direct-formula weight tables
_MAX_BLOCK_TABLE = 200_000  # cap for O(n_max^2) block fixed-point tables
_FORMULA_HEAD = 64  # synthetic classes: exact integers this far, formula beyond


@dataclass(frozen=True)
class SizeDistribution:
    """Truncated, renormalized component-size law at Boltzmann parameter x.

    pmf[j] is P(size = j + 1) for j = 0..n_max-1.  normalizer is the truncated
    EGF value sum_{j <= n_max} |C_j| x^j / j!; truncated_mass estimates the
    probability mass of sizes beyond n_max under the untruncated model (nan
    when the class has no tail model).
    """

    x: float
    n_max: int
    pmf: np.ndarray
    truncated_mass: float
    normalizer: float
    cdf: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class Composition:
    """A draw from the unconditioned Boltzmann model: component sizes only."""

    kappa: int
    sizes: tuple

    def __post_init__(self):
        if len(self.sizes) != self.kappa:
            raise DomainError("composition size list does not match kappa")


@dataclass(frozen=True)
class LabeledForest:
    """A labeled forest on vertices 1..n: vertex blocks and tree edges per block."""

    n: int
    blocks: tuple  # tuple of sorted vertex tuples
    trees: tuple  # tree[i] is a tuple of (u, v) edges with u < v, on blocks[i]


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    trials: int
    hits: int


# --- weight tables --------------------------------------------------------------


def _log_factorials(M):
    # lgamma(n+1) for n = 1..M via cumulative sum
    return np.cumsum(np.log(np.arange(1, M + 1, dtype=float)))


def _weights(cls, x, M):
    """w[j] = |C_{j+1}| x^{j+1} / (j+1)! as float64, j = 0..M-1."""
    if cls.coeff_source is species.CoeffSource.BLOCK_DERIVED:
        if M > _MAX_BLOCK_TABLE:
            raise PrecisionError(
                f"block-derived size table of length {M} exceeds the supported "
                f"maximum {_MAX_BLOCK_TABLE}; pass a smaller n_max",
                suggested=_MAX_BLOCK_TABLE,
            )
        return _tilted_block_weights(cls, x, M)
    if M > _MAX_TABLE:
        raise PrecisionError(
            f"size table of length {M} exceeds the supported maximum {_MAX_TABLE}; "
            "pass a smaller n_max",
            suggested=_MAX_TABLE,
        )
    ns = np.arange(1, M + 1, dtype=float)
    logfact = _log_factorials(M)
    if cls.coeff_source is species.CoeffSource.CLOSED_FORM:
        # the only closed form is Cayley's n^{n-2}
        logw = (ns - 2.0) * np.log(ns) + ns * math.log(x) - logfact
        return np.exp(logw)
    if cls.coeff_source is species.CoeffSource.SYNTHETIC:
        g = cls.growth
        head = species.coefficients(cls, min(M, _FORMULA_HEAD))
        logw = math.log(g.b) - (1.0 + g.alpha) * np.log(ns) + ns * math.log(x / g.rho)
        w = np.exp(logw)
        for j, c in enumerate(head):
            w[j] = 0.0 if c == 0 else math.exp(math.log(c) + (j + 1) * math.log(x) - logfact[j])
        return w
    # explicit list: exact integers, growth formula beyond the list if declared
    stored = species.coefficients(cls, min(M, cls.list_length))
    if M > cls.list_length and cls.growth is None:
        raise DomainError(
            f"class {cls.name} defines coefficients only up to n = {cls.list_length} "
            "and declares no growth parameters"
        )
    w = np.zeros(M)
    for j, c in enumerate(stored):
        if c:
            w[j] = math.exp(math.log(c) + (j + 1) * math.log(x) - logfact[j])
    if M > cls.list_length:
        g = cls.growth
        tail_ns = ns[cls.list_length:]
        w[cls.list_length:] = np.exp(
            math.log(g.b) - (1.0 + g.alpha) * np.log(tail_ns) + tail_ns * math.log(x / g.rho)
        )
    return w


def _tilted_block_weights(cls, x, M):
    """Tilted fixed-point solve in float64: w_n = y_n x^n / n stays O(1)."""
    spec = cls.block_spec
    Y = np.zeros(M + 1)
    A = np.zeros(M + 1)
    E = np.zeros(M + 1)
    E[0] = 1.0
    ks = np.arange(M + 1, dtype=float)
    kind = spec.kind
    if kind == "cactus":
        S = np.zeros(M + 1)
    elif kind == "complete":
        EY = np.zeros(M + 1)
        EY[0] = 1.0
    elif kind == "poly":
        tail = [float(c) for c in spec.bprime_series(species._poly_degree(spec)).coeffs[1:]]
        while tail and tail[-1] == 0.0:
            tail.pop()
        P = [np.zeros(M + 1) for _ in tail]
    for n in range(1, M + 1):
        Y[n] = x * E[n - 1]
        if kind == "edge":
            A[n] = Y[n]
        elif kind == "cactus":
            S[n] = Y[n] + float(np.dot(Y[1:n], S[n - 1:0:-1]))
            A[n] = 0.5 * (Y[n] + S[n])
        elif kind == "complete":
            EY[n] = float(np.dot(ks[1 : n + 1] * Y[1 : n + 1], EY[n - 1 :: -1])) / n
            A[n] = EY[n]
        else:
            for d in range(1, len(tail) + 1):
                if d == 1:
                    P[0][n] = Y[n]
                elif d <= n:
                    P[d - 1][n] = float(np.dot(P[d - 2][d - 1 : n], Y[n - d + 1 : 0 : -1]))
            A[n] = sum(c * P[d][n] for d, c in enumerate(tail) if c)
        E[n] = float(np.dot(ks[1 : n + 1] * A[1 : n + 1], E[n - 1 :: -1])) / n
    return Y[1:] / np.arange(1, M + 1, dtype=float)


def _full_value(cls, x):
    """C(x) under the class model, or nan when no tail model exists."""
    if cls.coeff_source is species.CoeffSource.EXPLICIT_LIST and cls.growth is None:
        w = _weights(cls, x, cls.list_length)
        return float(np.sum(w))
    C, _A, _D = asymptotics._egf_at(cls, x)
    return C


def size_distribution(cls, x, n_max=None, mass_tol=DEFAULT_MASS_TOL):
    """Component-size table of the Boltzmann model at parameter x.

    With n_max omitted, the table grows until the untruncated model keeps less
    than mass_tol of its probability beyond the table (bare coefficient lists
    use their full length).
    """
    if not (isinstance(x, (int, float)) and x > 0 and math.isfinite(x)):
        raise DomainError(f"boltzmann parameter x = {x} must be a positive real")
    x = float(x)
    if cls.growth is not None and x > cls.growth.rho * (1.0 + 1e-12):
        raise DivergenceError(
            f"x = {x} exceeds the radius of convergence rho = {cls.growth.rho}"
        )
    bare_list = cls.coeff_source is species.CoeffSource.EXPLICIT_LIST and cls.growth is None
    if n_max is not None:
        if n_max != int(n_max) or n_max < 1:
            raise DomainError(f"n_max = {n_max} must be a positive integer")
        M = int(n_max)
        w = _weights(cls, x, M)
    elif bare_list:
        M = cls.list_length
        w = _weights(cls, x, M)
    else:
        C_full = _full_value(cls, x)
        M = 256
        while True:
            w = _weights(cls, x, M)
            s = float(np.sum(w))
            if C_full - s <= mass_tol * C_full:
                break
            cap = _MAX_BLOCK_TABLE if cls.coeff_source is species.CoeffSource.BLOCK_DERIVED else _MAX_TABLE
            if M >= cap:
                raise PrecisionError(
                    f"size table reached {M} entries with truncated mass still above "
                    f"{mass_tol}; pass n_max explicitly",
                    suggested=M,
                )
            M = min(2 * M, cap)
    s = float(np.sum(w))
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"size weights sum to {s} at x = {x}")
    if bare_list and M >= cls.list_length:
        trunc = 0.0
    else:
        C_full = _full_value(cls, x)
        trunc = max((C_full - s) / C_full, 0.0) if math.isfinite(C_full) else math.nan
    pmf = w / s
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    pmf.setflags(write=False)
    cdf.setflags(write=False)
    return SizeDistribution(
        x=x, n_max=M, pmf=pmf, truncated_mass=trunc, normalizer=s, cdf=cdf
    )


# --- drawing ---------------------------------------------------------------------


def sample_size(dist, rng):
    """One component size by inverse-CDF lookup."""
    return int(np.searchsorted(dist.cdf, rng.random(), side="right")) + 1


def _draw_sizes(dist, rng, count):
    u = rng.random(count)
    return np.searchsorted(dist.cdf, u, side="right") + 1


def sample_set(cls, x, rng, dist=None):
    """Unconditioned Boltzmann draw: kappa ~ Poisson(C(x)), then iid sizes."""
    if dist is None:
        dist = size_distribution(cls, x)
    kappa = int(rng.poisson(dist.normalizer))
    sizes = tuple(int(v) for v in _draw_sizes(dist, rng, kappa)) if kappa else ()
    return Composition(kappa=kappa, sizes=sizes)


def sample_partition(sizes, rng):
    """Uniform ordered set partition of 1..sum(sizes) with the given block sizes."""
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise DomainError("all block sizes must be positive")
    n = sum(sizes)
    perm = rng.permutation(n) + 1
    blocks = []
    at = 0
    for s in sizes:
        blocks.append(tuple(sorted(int(v) for v in perm[at : at + s])))
        at += s
    return tuple(blocks)


def _prufer_decode(m, seq):
    """Edges of the labeled tree on 0..m-1 with Pruefer sequence seq (len m-2)."""
    degree = [1] * m
    for v in seq:
        degree[v] += 1
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    edges = []
    for v in seq:
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1 and v < ptr:
            leaf = v
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges.append((leaf, m - 1))
    return edges


def _uniform_tree_edges(labels, rng):
    """Uniform labeled tree on the given vertex labels, as sorted edge tuples."""
    m = len(labels)
    if m == 1:
        return ()
    if m == 2:
        return ((min(labels), max(labels)),)
    seq = [int(v) for v in rng.integers(0, m, size=m - 2)]
    edges = _prufer_decode(m, seq)
    out = []
    for a, b in edges:
        u, v = labels[a], labels[b]
        out.append((u, v) if u < v else (v, u))
    return tuple(out)


_forest_dist_cache = {}
_forest_dist_lock = threading.Lock()


def _forest_distribution(n, k, x):
    key = (n, k, x)
    with _forest_dist_lock:
        dist = _forest_dist_cache.get(key)
        if dist is None:
            trees = species.builtin("trees")
            dist = size_distribution(trees, x, n_max=n - k + 1)
            if len(_forest_dist_cache) > 64:
                _forest_dist_cache.clear()
            _forest_dist_cache[key] = dist
    return dist


def sample_forest(n, k, x=None, rng=None, max_rejects=10_000):
    """Uniform labeled forest of exactly k trees on vertices 1..n.

    Component sizes come from the Boltzmann size law conditioned on total n by
    rejection (at parameter x; the default picks the saddle x_lambda for
    lambda = k/n above the threshold 1/2, the radius e^{-1} otherwise), the
    vertex partition is uniform given the sizes, and each component is a
    uniform labeled tree via a Pruefer draw.
    """
    if n != int(n) or n < 1:
        raise DomainError(f"n = {n} must be a positive integer")
    if k != int(k) or not (1 <= k <= n):
        raise DomainError(f"k = {k} must be an integer in [1, n = {n}]")
    n, k = int(n), int(k)
    if rng is None:
        rng = np.random.default_rng()
    trees_cls = species.builtin("trees")
    if x is None:
        lam = k / n
        lam_star = asymptotics.lambda_star(trees_cls)
        if lam > lam_star + 1e-12 and lam < 1.0:
            x = asymptotics.solve_supercritical(trees_cls, lam).x_lambda
        else:
            x = trees_cls.growth.rho
    x = float(x)
    dist = _forest_distribution(n, k, x)
    sizes = None
    attempts = 0
    while attempts <= max_rejects:
        attempts += 1
        draw = _draw_sizes(dist, rng, k)
        if int(draw.sum()) == n:
            sizes = [int(v) for v in draw]
            break
    if sizes is None:
        raise RetryBudgetError(
            f"no size vector with total {n} in {attempts} attempts at x = {x}",
            acceptance_rate=0.0,
            attempts=attempts,
        )
    blocks = sample_partition(sizes, rng)
    forest_trees = tuple(_uniform_tree_edges(b, rng) for b in blocks)
    return LabeledForest(n=n, blocks=blocks, trees=forest_trees)


# --- sum-probability cross-checks -------------------------------------------------


def sum_size_probability_exact(cls, x, k, n, n_max=None):
    """P(size_1 + ... + size_k = n) under the truncated table, as a Fraction.

    x must be a Fraction (or int); the table is truncated at n_max (default
    n - k + 1, the largest size that can appear in an accepted draw).
    """
    if not isinstance(x, (Fraction, int)):
        raise DomainError("exact sum probabilities require a Fraction-valued x")
    x = Fraction(x)
    if x <= 0:
        raise DomainError(f"boltzmann parameter x = {x} must be positive")
    if k != int(k) or n != int(n) or not (1 <= k <= n):
        raise DomainError(f"need integers 1 <= k = {k} <= n = {n}")
    n, k = int(n), int(k)
    M = n - k + 1 if n_max is None else int(n_max)
    if M < 1:
        raise DomainError(f"n_max = {M} must be positive")
    counts = species.coefficients(cls, M)
    fact = 1
    coeffs = [Fraction(0)]
    for j in range(1, M + 1):
        fact *= j
        coeffs.append(Fraction(counts[j - 1], fact) * x**j)
    wseries = ps.SeriesExact(coeffs + [Fraction(0)] * max(0, n - M))
    total = sum(coeffs, Fraction(0))
    if total == 0:
        raise DomainError("all truncated size weights vanish")
    conv = ps.pow(wseries, k, n)
    return conv.coeffs[n] / total**k


def mc_sum_probability(cls, x, k, n, trials, rng, dist=None):
    """Monte Carlo estimate of P(size_1 + ... + size_k = n) with its stderr."""
    if k != int(k) or n != int(n) or not (1 <= k <= n):
        raise DomainError(f"need integers 1 <= k = {k} <= n = {n}")
    if trials != int(trials) or trials < 1:
        raise DomainError(f"trials = {trials} must be a positive integer")
    n, k, trials = int(n), int(k), int(trials)
    if dist is None:
        dist = size_distribution(cls, float(x), n_max=n - k + 1)
    hits = 0
    chunk = max(1, min(trials, 10_000_000 // max(k, 1)))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        draws = _draw_sizes(dist, rng, m * k).reshape(m, k)
        hits += int(np.count_nonzero(draws.sum(axis=1) == n))
        done += m
    p = hits / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    return MCEstimate(estimate=p, stderr=stderr, trials=trials, hits=hits)


def chi_square_sf(statistic, df):
    """Upper tail of the chi-square distribution (regularized incomplete gamma)."""
    if df <= 0:
        raise DomainError(f"df = {df} must be positive")
    if statistic < 0:
        return 1.0
    with mpmath.workdps(30):
        return float(mpmath.gammainc(df / 2.0, statistic / 2.0, mpmath.inf, regularized=True))
