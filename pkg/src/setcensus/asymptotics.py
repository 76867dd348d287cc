"""Asymptotic counting of labeled forests of connected structures.

The number of objects with n vertices and N = floor(lambda*n) components obeys
one of three first-order formulas depending on where lambda sits relative to
the threshold lambda* = C(rho) / (rho*C'(rho)):

* below (0 < lambda < lambda*): constant * n^{-alpha} * rho^{-n} * C(rho)^N * n!/N!
* at the threshold: the n-power becomes n^{-1/alpha} for alpha < 2,
  (n*log(lambda*'n))^{-1/2} for alpha = 2, and n^{-1/2} for alpha > 2;
* above (lambda* < lambda < 1): constant * n^{-1/2} * x_lambda^{-n} *
  C(x_lambda)^N * n!/N!, where x_lambda solves x*C'(x)/C(x) = 1/lambda.

Block-specified classes additionally get the closed recipe that produces their
growth constants (zeta, b, rho, lambda*, C(rho)) from scalar evaluations of
the block EGF B alone.

Scalar values of C, x*C', x^2*C'' for synthetic and list classes are computed
from a coefficient head plus an analytic tail (Hurwitz zeta / Lerch
transcendent applied to the growth formula), which keeps the evaluation
accurate even where the raw series converges too slowly to sum term by term.
"""

import math
from dataclasses import dataclass
from enum import Enum

import mpmath

from . import species
from .errors import (
    DivergenceError,
    DomainError,
    InternalConsistencyError,
    NotSubcriticalError,
)

_CRITICAL_WINDOW = 1e-9  # |lambda - lambda*| below this counts as critical
_ALPHA_TOL = 1e-12
_RESIDUAL_TOL = 1e-10
_HEAD_TERMS = 64


class Regime(str, Enum):
    BELOW = "below"
    CRITICAL = "critical"
    ABOVE = "above"


class AlphaCase(str, Enum):
    LT2 = "alpha_lt_2"
    EQ2 = "alpha_eq_2"
    GT2 = "alpha_gt_2"


@dataclass(frozen=True)
class RecipeConstants:
    """Outputs of the subcritical block recipe."""

    zeta: float
    b: float
    rho: float
    lambda_star: float
    C_rho: float


@dataclass(frozen=True)
class SupercriticalPoint:
    """Saddle data at a supercritical component density lambda."""

    lam: float
    y_lambda: float
    x_lambda: float
    C_x_lambda: float
    sigma2: float


@dataclass(frozen=True)
class EstimateFactors:
    """Additive decomposition of a log-count estimate.

    log_count = log_constant + n_power_exponent*log(n)
              + log_power_exponent*log(log(lambda_star*n))
              + log_rho_inv_n + N_log_h + log_factorial_ratio
    (the log-log term is present only in the alpha = 2 critical cell).
    """

    log_constant: float
    n_power_exponent: float
    log_power_exponent: float
    log_rho_inv_n: float
    N_log_h: float
    log_factorial_ratio: float


@dataclass(frozen=True)
class RegimeEstimate:
    regime: Regime
    alpha_case: AlphaCase
    n: int
    N: int
    lam: float
    lambda_star: float
    log_count: float
    factors: EstimateFactors


# --- gamma --------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(z):
    """Gamma function on the reals (Lanczos approximation with reflection)."""
    z = float(z)
    if z <= 0 and z == math.floor(z):
        raise DomainError(f"gamma has a pole at {z}")
    if z < 0.5:
        return math.pi / (math.sin(math.pi * z) * gamma_fn(1.0 - z))
    z -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


# --- root finding -------------------------------------------------------------


def _bisect(f, lo, hi, iters=110):
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise InternalConsistencyError(
            f"root not bracketed on [{lo}, {hi}]: f = {flo}, {fhi}"
        )
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def _newton_polish(f, fprime, x, lo, hi, steps=4):
    for _ in range(steps):
        d = fprime(x)
        if d == 0:
            break
        nxt = x - f(x) / d
        if not (lo <= nxt <= hi):
            break
        if abs(nxt - x) <= 1e-16 * max(1.0, abs(x)):
            x = nxt
            break
        x = nxt
    return x


# --- the subcritical block recipe ----------------------------------------------


def solve_zeta(cls):
    """Root of zeta * B''(zeta) = 1 inside (0, R), the subcriticality witness."""
    spec = cls.block_spec
    if spec is None:
        raise DomainError(f"class {cls.name} carries no block specification")
    Bpp, Bppp, R = spec.Bpp, spec.Bppp, spec.R

    def g(t):
        return t * Bpp(t) - 1.0

    lo = 1e-12
    if g(lo) >= 0:
        lo = 1e-300
    hi = None
    if math.isinf(R):
        cand = 1.0
        for _ in range(64):
            if g(cand) > 0:
                hi = cand
                break
            cand *= 2.0
    else:
        for k in range(1, 54):
            cand = R * (1.0 - 2.0**-k)
            if g(cand) > 0:
                hi = cand
                break
    if hi is None:
        raise NotSubcriticalError(
            f"class {cls.name} is not subcritical: t*B''(t) stays below 1 on (0, R)"
        )
    zeta = _bisect(g, lo, hi)
    zeta = _newton_polish(g, lambda t: Bpp(t) + t * Bppp(t), zeta, lo, hi)
    if abs(zeta * Bpp(zeta) - 1.0) > _RESIDUAL_TOL:
        raise InternalConsistencyError(
            f"zeta residual too large: {zeta * Bpp(zeta) - 1.0}"
        )
    return zeta


def recipe_constants(cls):
    """Growth constants of a subcritical block class, cached on the class."""
    cached = cls._scalar_cache.get("recipe")
    if cached is not None:
        return cached
    spec = cls.block_spec
    if spec is None:
        raise DomainError(f"class {cls.name} carries no block specification")
    zeta = solve_zeta(cls)
    b = zeta / math.sqrt(2 * math.pi * (1.0 + zeta**2 * spec.Bppp(zeta)))
    rho = zeta * math.exp(-spec.Bp(zeta))
    lam_star = 1.0 - spec.Bp(zeta) + spec.B(zeta) / zeta
    C_rho = zeta * lam_star
    if not (0.0 < lam_star < 1.0):
        raise DomainError(
            f"class {cls.name} has degenerate threshold lambda* = {lam_star}"
        )
    rc = RecipeConstants(zeta=zeta, b=b, rho=rho, lambda_star=lam_star, C_rho=C_rho)
    cls._scalar_cache["recipe"] = rc
    return rc


# --- scalar EGF evaluation ------------------------------------------------------


def _egf_at(cls, x, need_second=False):
    """(C(x), x*C'(x), x^2*C''(x)) as floats; the third entry may be inf.

    Results are cached per class and x.  For block classes the values come
    from the inverse of y*exp(-B'(y)); for synthetic and growth-annotated list
    classes from an exact coefficient head plus an analytic tail.
    """
    if not (isinstance(x, (int, float)) and x > 0 and math.isfinite(x)):
        raise DomainError(f"evaluation point x = {x} must be a positive real")
    x = float(x)
    cached = cls._scalar_cache.get(x)
    if cached is not None and (not need_second or cached[2] is not None):
        return cached
    if cls.block_spec is not None:
        vals = _egf_block(cls, x)
    elif cls.coeff_source is species.CoeffSource.SYNTHETIC:
        # head long enough that the coefficient-rounding tail 0.5*x^n/n! is dwarfed
        head = max(_HEAD_TERMS, int(3 * cls.growth.rho) + 48)
        vals = _egf_head_tail(cls, x, species.coefficients(cls, head))
    elif cls.coeff_source is species.CoeffSource.EXPLICIT_LIST:
        vals = _egf_head_tail(cls, x, species.coefficients(cls, cls.list_length))
    else:
        raise DomainError(f"class {cls.name} supports no scalar EGF evaluation")
    cls._scalar_cache[x] = vals
    return vals


def _egf_block(cls, x):
    spec = cls.block_spec
    rc = recipe_constants(cls)
    if x > rc.rho * (1.0 + 1e-12):
        raise DivergenceError(
            f"x = {x} exceeds the radius of convergence rho = {rc.rho}"
        )
    if x >= rc.rho * (1.0 - 1e-14):
        y = rc.zeta
    else:
        def f(t):
            return t * math.exp(-spec.Bp(t)) - x

        y = _bisect(f, 1e-300, rc.zeta)
        y = _newton_polish(
            f,
            lambda t: math.exp(-spec.Bp(t)) * (1.0 - t * spec.Bpp(t)),
            y,
            0.0,
            rc.zeta,
        )
    C = y - y * spec.Bp(y) + spec.B(y)
    A = y
    denom = 1.0 - y * spec.Bpp(y)
    D = math.inf if denom <= 0 else y / denom - y
    return (C, A, D)


def _egf_head_tail(cls, x, head_coeffs):
    growth = cls.growth
    sC = sA = sD = 0.0
    lx = math.log(x)
    for n, c in enumerate(head_coeffs, start=1):
        if c == 0:
            continue
        term = math.exp(math.log(c) + n * lx - math.lgamma(n + 1))
        sC += term
        sA += n * term
        sD += n * (n - 1) * term
    if growth is None:
        # bare list: the stored coefficients are the whole model
        return (sC, sA, sD)
    b, rho, alpha = growth.b, growth.rho, growth.alpha
    z = x / rho
    if z > 1.0 + 1e-12:
        raise DivergenceError(f"x = {x} exceeds the radius of convergence rho = {rho}")
    if z > 1.0 - 1e-12:
        z = 1.0
    H = len(head_coeffs)

    def tail(s):
        # sum_{n > H} n^{-s} z^n; requires s > 1 when z = 1
        with mpmath.workdps(40):
            if z == 1.0:
                if s <= 1.0:
                    return math.inf
                return float(mpmath.zeta(s, H + 1))
            return float(z ** (H + 1) * mpmath.lerchphi(z, s, H + 1))

    tC = tail(1.0 + alpha)
    tA = tail(alpha)
    tA1 = tail(alpha - 1.0)
    sC += b * tC
    sA += b * tA
    sD = sD + b * (tA1 - tA) if math.isfinite(tA1) else math.inf
    return (sC, sA, sD)


def lambda_star(cls):
    """Threshold density C(rho) / (rho * C'(rho))."""
    if cls.block_spec is not None:
        return recipe_constants(cls).lambda_star
    if cls.growth is None:
        raise DomainError(
            f"class {cls.name} declares no growth parameters; lambda* is undefined"
        )
    C, A, _ = _egf_at(cls, cls.growth.rho)
    val = C / A
    if not (0.0 < val < 1.0):
        raise DomainError(f"class {cls.name} has degenerate threshold lambda* = {val}")
    return val


def _growth_constants(cls):
    """(b, rho, alpha, lambda_star, C_rho) for any class supporting asymptotics."""
    if cls.block_spec is not None and cls.coeff_source is species.CoeffSource.BLOCK_DERIVED:
        rc = recipe_constants(cls)
        alpha = cls.growth.alpha if cls.growth else species.SUBCRITICAL_ALPHA
        return rc.b, rc.rho, alpha, rc.lambda_star, rc.C_rho
    if cls.growth is None:
        raise DomainError(
            f"class {cls.name} declares no growth parameters; asymptotics are unavailable"
        )
    g = cls.growth
    C, A, _ = _egf_at(cls, g.rho)
    lam_star = C / A
    if not (0.0 < lam_star < 1.0):
        raise DomainError(
            f"class {cls.name} has degenerate threshold lambda* = {lam_star}"
        )
    return g.b, g.rho, g.alpha, lam_star, C


# --- supercritical saddle -------------------------------------------------------


def solve_supercritical(cls, lam):
    """Saddle point x_lambda with x*C'(x)/C(x) = 1/lambda, for lambda* < lambda < 1."""
    lam = float(lam)
    lam_star = lambda_star(cls)
    if not (lam_star < lam < 1.0):
        raise DomainError(
            f"lambda = {lam} is not in the supercritical range ({lam_star}, 1)"
        )
    if cls.block_spec is not None:
        return _supercritical_block(cls, lam)
    return _supercritical_scalar(cls, lam, lam_star)


def _supercritical_block(cls, lam):
    spec = cls.block_spec
    rc = recipe_constants(cls)

    def h(t):
        return 1.0 - spec.Bp(t) + spec.B(t) / t

    def f(t):
        return h(t) - lam

    # h decreases from 1 at 0+ to lambda* at zeta
    y = _bisect(f, 1e-12 * rc.zeta, rc.zeta)

    def hprime(t):
        return -spec.Bpp(t) + spec.Bp(t) / t - spec.B(t) / t**2

    y = _newton_polish(f, hprime, y, 0.0, rc.zeta)
    if abs(h(y) - lam) > _RESIDUAL_TOL:
        raise InternalConsistencyError(f"saddle residual too large at lambda = {lam}")
    x = y * math.exp(-spec.Bp(y))
    C = lam * y
    denom = 1.0 - y * spec.Bpp(y)
    D = y / denom - y
    sigma2 = D / C + 1.0 / lam - 1.0 / lam**2
    return SupercriticalPoint(lam=lam, y_lambda=y, x_lambda=x, C_x_lambda=C, sigma2=sigma2)


def _supercritical_scalar(cls, lam, lam_star):
    rho = cls.growth.rho
    target = 1.0 / lam

    def m(x):
        C, A, _ = _egf_at(cls, x)
        return A / C

    def f(x):
        return m(x) - target

    x = _bisect(f, rho * 1e-9, rho, iters=70)

    def mprime(x):
        C, A, D = _egf_at(cls, x, need_second=True)
        return (C * (A + D) - A * A) / (x * C * C)

    x = _newton_polish(f, mprime, x, 0.0, rho, steps=3)
    C, A, D = _egf_at(cls, x, need_second=True)
    if abs(A / C - target) > _RESIDUAL_TOL:
        raise InternalConsistencyError(f"saddle residual too large at lambda = {lam}")
    sigma2 = D / C + 1.0 / lam - 1.0 / lam**2
    return SupercriticalPoint(lam=lam, y_lambda=A, x_lambda=x, C_x_lambda=C, sigma2=sigma2)


# --- regime constants -----------------------------------------------------------


def constant_below(cls, lam):
    """Leading constant in the sparse-components regime 0 < lambda < lambda*."""
    lam = float(lam)
    b, _rho, alpha, lam_star, C_rho = _growth_constants(cls)
    if not (0.0 < lam < lam_star):
        raise DomainError(f"lambda = {lam} is not in (0, lambda* = {lam_star})")
    return b * lam / (C_rho * (1.0 - lam / lam_star) ** (alpha + 1.0))


def constant_critical(cls):
    """Leading constant at lambda = lambda* (defined for alpha <= 2)."""
    b, _rho, alpha, lam_star, C_rho = _growth_constants(cls)
    if alpha < 2.0 - _ALPHA_TOL:
        num = alpha * C_rho
        den = lam_star * b * abs(gamma_fn(1.0 - alpha))
        return (num / den) ** (1.0 / alpha) / abs(gamma_fn(-1.0 / alpha))
    if abs(alpha - 2.0) <= _ALPHA_TOL:
        return math.sqrt(C_rho / (b * math.pi * lam_star))
    raise DomainError(
        "for alpha > 2 the critical constant is the gaussian one; "
        "use constant_above at lambda = lambda*"
    )


def _sigma2_at_rho(cls):
    b, rho, alpha, lam_star, C_rho = _growth_constants(cls)
    if alpha <= 2.0 + _ALPHA_TOL:
        raise DomainError("the variance at rho is finite only for alpha > 2")
    _C, _A, D = _egf_at(cls, rho, need_second=True)
    return D / C_rho + 1.0 / lam_star - 1.0 / lam_star**2


def constant_above(cls, lam):
    """Gaussian constant 1/sqrt(2*pi*sigma2*lambda) for lambda* <= lambda < 1.

    lambda = lambda* itself is admitted only when alpha > 2 (where the
    variance stays finite at rho).
    """
    lam = float(lam)
    _b, _rho, alpha, lam_star, _C = _growth_constants(cls)
    if not (lam_star <= lam < 1.0):
        raise DomainError(f"lambda = {lam} is not in [lambda* = {lam_star}, 1)")
    if abs(lam - lam_star) < _CRITICAL_WINDOW:
        sigma2 = _sigma2_at_rho(cls)
        lam_eff = lam_star
    else:
        sigma2 = solve_supercritical(cls, lam).sigma2
        lam_eff = lam
    if not (sigma2 > 0 and math.isfinite(sigma2)):
        raise DomainError(f"variance {sigma2} is not positive finite at lambda = {lam}")
    return 1.0 / math.sqrt(2.0 * math.pi * sigma2 * lam_eff)


# --- the regime classifier ------------------------------------------------------


def estimate(cls, n, lam):
    """First-order estimate of log count(n, floor(lambda*n)) with its factors."""
    if n != int(n) or n < 2:
        raise DomainError(f"n = {n} must be an integer with n >= 2")
    n = int(n)
    lam = float(lam)
    if not (0.0 < lam < 1.0):
        raise DomainError(f"lambda = {lam} must lie strictly between 0 and 1")
    N = int(math.floor(lam * n + 1e-9))
    if N < 1:
        raise DomainError(f"floor(lambda*n) = {N}; need at least one component")

    b, rho, alpha, lam_star, C_rho = _growth_constants(cls)
    if alpha < 2.0 - _ALPHA_TOL:
        alpha_case = AlphaCase.LT2
    elif abs(alpha - 2.0) <= _ALPHA_TOL:
        alpha_case = AlphaCase.EQ2
    else:
        alpha_case = AlphaCase.GT2

    log_power = 0.0
    if lam < lam_star - _CRITICAL_WINDOW:
        regime = Regime.BELOW
        const = constant_below(cls, lam)
        n_power = -alpha
        x_base, h = rho, C_rho
    elif lam <= lam_star + _CRITICAL_WINDOW:
        regime = Regime.CRITICAL
        x_base, h = rho, C_rho
        if alpha_case is AlphaCase.LT2:
            const = constant_critical(cls)
            n_power = -1.0 / alpha
        elif alpha_case is AlphaCase.EQ2:
            if lam_star * n <= 1.0:
                raise DomainError(
                    f"n = {n} is too small for the log-corrected critical formula"
                )
            const = constant_critical(cls)
            n_power = -0.5
            log_power = -0.5
        else:
            const = constant_above(cls, lam_star)
            n_power = -0.5
    else:
        regime = Regime.ABOVE
        sp = solve_supercritical(cls, lam)
        const = constant_above(cls, lam)
        n_power = -0.5
        x_base, h = sp.x_lambda, sp.C_x_lambda

    factors = EstimateFactors(
        log_constant=math.log(const),
        n_power_exponent=n_power,
        log_power_exponent=log_power,
        log_rho_inv_n=-n * math.log(x_base),
        N_log_h=N * math.log(h),
        log_factorial_ratio=math.lgamma(n + 1) - math.lgamma(N + 1),
    )
    log_count = (
        factors.log_constant
        + factors.n_power_exponent * math.log(n)
        + (factors.log_power_exponent * math.log(math.log(lam_star * n)) if log_power else 0.0)
        + factors.log_rho_inv_n
        + factors.N_log_h
        + factors.log_factorial_ratio
    )
    return RegimeEstimate(
        regime=regime,
        alpha_case=alpha_case,
        n=n,
        N=N,
        lam=lam,
        lambda_star=lam_star,
        log_count=log_count,
        factors=factors,
    )
