"""Registry and validation of connected classes.

A connected class C is the unit the whole toolkit counts and samples: the
composite class under study is SET(C), with EGF exp(C(x)).  Classes arrive
four ways:

* built-ins: labeled trees, cactus graphs, Husimi trees (blocks are single
  edges, edges-or-cycles, and complete graphs respectively);
* synthetic classes whose counts are defined directly by the growth formula
  |C_n| = round(b * n^{-(1+alpha)} * rho^{-n} * n!);
* explicit coefficient lists, optionally with declared growth parameters;
* definition files (JSON) covering the two previous forms plus named or
  polynomial block specifications.

Block-specified classes get their coefficients from the fixed point
y = x*exp(B'(y)) and their growth parameters from the subcritical recipe in
the asymptotics module; every block class of this kind has alpha = 3/2.
"""

import json
import math
import re
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath

from . import powerseries as ps
from .errors import DomainError, UnknownClassError, ValidationError

SCHEMA_VERSION = "1"

# tail exponent forced by subcriticality for every block-specified class
SUBCRITICAL_ALPHA = 1.5

_BUILTIN_NAMES = ("trees", "cacti", "husimi")


class CoeffSource(str, Enum):
    CLOSED_FORM = "closed_form"
    BLOCK_DERIVED = "block_derived"
    EXPLICIT_LIST = "explicit_list"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class GrowthParams:
    """Parameters of the coefficient asymptotics |C_n| ~ b n^{-(1+alpha)} rho^{-n} n!."""

    b: float
    rho: float
    alpha: float

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValidationError(f"growth parameter b must be positive, got {self.b}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValidationError(f"growth parameter rho must be positive, got {self.rho}")
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            raise ValidationError(f"growth parameter alpha must exceed 1, got {self.alpha}")


@dataclass(frozen=True)
class BlockSpec:
    """Scalar evaluators and series coefficients of a 2-connected block family B.

    kind selects the incremental composer used by the fixed-point solver:
    "edge" (B = u^2/2), "cactus" (B = u^2/4 - u/2 - log(1-u)/2), "complete"
    (B = e^u - u - 1) or "poly" (B' a finite polynomial).  R is the radius of
    convergence of B, possibly infinite.
    """

    kind: str
    B: object
    Bp: object
    Bpp: object
    Bppp: object
    R: float
    bprime_series_provider: object

    def bprime_series(self, T):
        """Truncated SeriesExact of B' through order T."""
        return self.bprime_series_provider(T)


class ConnectedClass:
    """A registered connected class: coefficients, growth data, optional blocks.

    Instances are immutable after registration; the coefficient memo grows
    monotonically under a lock and behaves as if every call recomputed.
    """

    def __init__(self, name, coeff_source, growth=None, block_spec=None):
        self.name = name
        self.coeff_source = coeff_source
        self.growth = growth
        self.block_spec = block_spec
        self.coeff_provider = None
        self.list_length = None  # explicit lists only
        self._memo = []
        self._lock = threading.Lock()
        self._scalar_cache = {}

    def __repr__(self):
        return f"ConnectedClass({self.name!r}, source={self.coeff_source.value})"


# --- built-in block specifications ------------------------------------------


def _edge_spec():
    def provider(T):
        coeffs = [Fraction(0), Fraction(1)][: T + 1]
        coeffs += [Fraction(0)] * (T + 1 - len(coeffs))
        return ps.SeriesExact(coeffs)

    return BlockSpec(
        kind="edge",
        B=lambda t: t * t / 2,
        Bp=lambda t: t,
        Bpp=lambda t: 1.0,
        Bppp=lambda t: 0.0,
        R=math.inf,
        bprime_series_provider=provider,
    )


def _cactus_spec():
    def provider(T):
        coeffs = [Fraction(0), Fraction(1)] + [Fraction(1, 2)] * (T - 1)
        return ps.SeriesExact(coeffs[: T + 1])

    return BlockSpec(
        kind="cactus",
        B=lambda t: t * t / 4 - t / 2 - math.log1p(-t) / 2,
        Bp=lambda t: t / 2 - 0.5 + 1 / (2 * (1 - t)),
        Bpp=lambda t: 0.5 + 1 / (2 * (1 - t) ** 2),
        Bppp=lambda t: 1 / (1 - t) ** 3,
        R=1.0,
        bprime_series_provider=provider,
    )


def _complete_spec():
    def provider(T):
        coeffs = [Fraction(0)] + [Fraction(1, math.factorial(k)) for k in range(1, T + 1)]
        return ps.SeriesExact(coeffs[: T + 1])

    return BlockSpec(
        kind="complete",
        B=lambda t: math.exp(t) - t - 1,
        Bp=lambda t: math.expm1(t),
        Bpp=math.exp,
        Bppp=math.exp,
        R=math.inf,
        bprime_series_provider=provider,
    )


def _poly_spec(tail):
    """BlockSpec for B'(u) = sum_d tail[d-1] u^d given as exact rationals."""
    tail = tuple(tail)

    def provider(T):
        coeffs = [Fraction(0)] + list(tail)
        coeffs = coeffs[: T + 1] + [Fraction(0)] * max(0, T + 1 - len(tail) - 1)
        return ps.SeriesExact(coeffs)

    def B(t):
        return sum(float(c) * t ** (d + 1) / (d + 1) for d, c in enumerate(tail, start=1))

    def Bp(t):
        return sum(float(c) * t**d for d, c in enumerate(tail, start=1))

    def Bpp(t):
        return sum(float(c) * d * t ** (d - 1) for d, c in enumerate(tail, start=1))

    def Bppp(t):
        return sum(float(c) * d * (d - 1) * t ** (d - 2) for d, c in enumerate(tail, start=1) if d >= 2)

    return BlockSpec(kind="poly", B=B, Bp=Bp, Bpp=Bpp, Bppp=Bppp, R=math.inf,
                     bprime_series_provider=provider)


_NAMED_SPECS = {"edge": _edge_spec, "cactus": _cactus_spec, "complete": _complete_spec}


def _validate_block_spec(spec, order=40, tol=1e-9):
    # series coefficients and scalar evaluator must describe the same B'
    t = min(spec.R, 2.0) / 2
    bp = spec.bprime_series(order)
    approx = 0.0
    for k in range(order, 0, -1):
        approx = approx * t + float(bp.coeffs[k])
    approx *= t
    target = spec.Bp(t)
    if abs(approx - target) > tol * max(1.0, abs(target)):
        raise ValidationError(
            f"block spec inconsistent: series B'({t}) = {approx} vs scalar {target}"
        )


# --- incremental composers for the fixed-point solver -----------------------


class _CactusDerivativeComposer:
    """[x^n] B'(y) with B'(u) = u/2 + u/(2(1-u)); S tracks y/(1-y) = y + y*S."""

    def __init__(self, zero, half):
        self.S = [zero]
        self.half = half

    def step(self, y, n):
        s = y[n]
        S = self.S
        for j in range(1, n):
            yj = y[j]
            if yj:
                s += yj * S[n - j]
        S.append(s)
        return self.half * (y[n] + s)


class _ExpDerivativeComposer:
    """[x^n] B'(y) with B'(u) = e^u - 1, via the exp recurrence on y."""

    def __init__(self, zero, one):
        self.zero = zero
        self.E = [one]

    def step(self, y, n):
        s = self.zero
        E = self.E
        for j in range(1, n + 1):
            yj = y[j]
            if yj:
                s += j * yj * E[n - j]
        val = s / n
        E.append(val)
        return val


def _composer_factory(spec, kernel):
    if spec.kind == "cactus":
        half = Fraction(1, 2) if kernel.exact else mpmath.mpf("0.5")
        return lambda: _CactusDerivativeComposer(kernel.zero, half)
    if spec.kind == "complete":
        return lambda: _ExpDerivativeComposer(kernel.zero, kernel.one)
    # edge and poly kinds share the generic polynomial composer
    tail = [kernel.one] if spec.kind == "edge" else None
    if tail is None:
        exact_tail = spec.bprime_series(max(2, _poly_degree(spec))).coeffs[1:]
        if kernel.exact:
            tail = list(exact_tail)
        else:
            tail = [ps._to_mpf(c) for c in exact_tail]
    return lambda: ps.PolynomialComposer(tail, kernel.zero)


def _poly_degree(spec):
    T = 64
    while True:
        probe = spec.bprime_series(T)
        deg = 0
        for k, c in enumerate(probe.coeffs):
            if c:
                deg = k
        if deg < T:
            return deg
        T *= 2


def y_series(cls, T, exact=True, precision_bits=ps.DEFAULT_PRECISION_BITS):
    """Series y = x*C'(x) of a block-specified class through order T."""
    if cls.block_spec is None:
        raise DomainError(f"class {cls.name} carries no block specification")
    kernel = ps._Kernel(exact=exact, precision_bits=precision_bits)
    factory = _composer_factory(cls.block_spec, kernel)
    return ps.solve_fixed_point_with_composer(T, factory, kernel)


# --- coefficient computation --------------------------------------------------


def coefficients(cls, n_max):
    """|C_1..n_max| as exact integers, memoized monotonically."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    with cls._lock:
        if len(cls._memo) < n_max:
            cls._memo = _compute_coefficients(cls, n_max)
        return list(cls._memo[:n_max])


def _compute_coefficients(cls, n_max):
    if cls.coeff_source is CoeffSource.BLOCK_DERIVED:
        y = y_series(cls, n_max, exact=True)
        return ps.connected_coeffs_from_y(y, n_max)
    if cls.coeff_source is CoeffSource.SYNTHETIC:
        return _synthetic_vector(cls.growth, n_max)
    return [cls.coeff_provider(n) for n in range(1, n_max + 1)]


def _cayley(n):
    # labeled trees on n vertices
    return 1 if n <= 2 else n ** (n - 2)


def _round_half_away(q):
    """Round a positive Fraction half away from zero."""
    quot, rem = divmod(q.numerator, q.denominator)
    return quot + (1 if 2 * rem >= q.denominator else 0)


def _synthetic_coeff(growth, n):
    """max(round(b n^{-(1+alpha)} rho^{-n} n!), [n=1]), rounding half away from zero."""
    b, rho, alpha = growth.b, growth.rho, growth.alpha
    if float(alpha).is_integer():
        # b and rho are dyadic rationals, so the value is an exact Fraction
        q = Fraction(b) * Fraction(rho) ** (-n) * math.factorial(n) / n ** (1 + int(alpha))
        val = _round_half_away(q)
    else:
        bits = (
            math.log2(b)
            - (1 + alpha) * math.log2(n)
            - n * math.log2(rho)
            + (math.lgamma(n + 1) / math.log(2))
        )
        prec = max(96, int(bits) + 96)
        with mpmath.workprec(prec):
            v = (
                mpmath.mpf(b)
                * mpmath.power(n, -(1 + alpha))
                * mpmath.power(mpmath.mpf(rho), -n)
                * mpmath.factorial(n)
            )
            val = int(mpmath.floor(v + mpmath.mpf("0.5")))
    if n == 1:
        val = max(val, 1)
    return val


def _synthetic_vector(growth, n_max):
    if float(growth.alpha).is_integer():
        out = []
        fact = 1
        rinv = Fraction(1) / Fraction(growth.rho)
        rpow = Fraction(1)
        bq = Fraction(growth.b)
        a1 = 1 + int(growth.alpha)
        for n in range(1, n_max + 1):
            fact *= n
            rpow *= rinv
            val = _round_half_away(bq * rpow * fact / n**a1)
            out.append(max(val, 1) if n == 1 else val)
        return out
    return [_synthetic_coeff(growth, n) for n in range(1, n_max + 1)]


# --- class factories ----------------------------------------------------------

_builtin_cache = {}
_builtin_lock = threading.Lock()


def builtin(name):
    """One of the registered built-in classes: trees, cacti, husimi."""
    if name not in _BUILTIN_NAMES:
        raise UnknownClassError(
            f"unknown class {name!r}; built-ins are {', '.join(_BUILTIN_NAMES)}"
        )
    with _builtin_lock:
        if name not in _builtin_cache:
            _builtin_cache[name] = _make_builtin(name)
        return _builtin_cache[name]


def _make_builtin(name):
    if name == "trees":
        spec = _edge_spec()
        growth = GrowthParams(1 / math.sqrt(2 * math.pi), math.exp(-1), SUBCRITICAL_ALPHA)
        cls = ConnectedClass("trees", CoeffSource.CLOSED_FORM, growth, spec)
        cls.coeff_provider = _cayley
    else:
        spec = _cactus_spec() if name == "cacti" else _complete_spec()
        cls = ConnectedClass(name, CoeffSource.BLOCK_DERIVED, None, spec)
        _attach_recipe_growth(cls)
        cls.coeff_provider = lambda n, _cls=cls: coefficients(_cls, n)[n - 1]
    _validate_block_spec(spec)
    _validate_first_coefficient(cls)
    return cls


def _attach_recipe_growth(cls):
    from . import asymptotics  # deferred: asymptotics imports this module

    rc = asymptotics.recipe_constants(cls)
    cls.growth = GrowthParams(rc.b, rc.rho, SUBCRITICAL_ALPHA)


def _validate_first_coefficient(cls):
    if cls.coeff_provider(1) < 1:
        raise ValidationError(
            f"class {cls.name} has |C_1| = 0; single-vertex structures are required "
            "(otherwise the size support would live on a sublattice)"
        )


def synthetic(b, rho, alpha):
    """Class whose coefficients are defined by the growth formula itself.

    coeff_provider(n) = max(round(b n^{-(1+alpha)} rho^{-n} n!), [n = 1]) with
    round-half-away-from-zero; growth parameters are recorded as declared.
    """
    growth = GrowthParams(float(b), float(rho), float(alpha))
    name = f"synthetic(b={growth.b:g},rho={growth.rho:g},alpha={growth.alpha:g})"
    cls = ConnectedClass(name, CoeffSource.SYNTHETIC, growth, None)
    cls.coeff_provider = lambda n, _g=growth: _synthetic_coeff(_g, n)
    _validate_first_coefficient(cls)
    return cls


def from_coefficients(name, values, growth=None):
    """Class defined by an explicit list of counts |C_1..len(values)|."""
    _validate_name(name)
    counts = []
    for i, v in enumerate(values, start=1):
        c = int(v)
        if c < 0:
            raise ValidationError(f"coefficient |C_{i}| = {c} is negative")
        counts.append(c)
    if not counts:
        raise ValidationError("coefficient list is empty")
    if counts[0] < 1:
        raise ValidationError(
            "|C_1| = 0 violates the single-vertex assumption (C_1 must be non-empty)"
        )
    cls = ConnectedClass(name, CoeffSource.EXPLICIT_LIST, growth, None)
    cls.list_length = len(counts)
    stored = tuple(counts)

    def provider(n, _stored=stored, _name=name):
        if n > len(_stored):
            raise DomainError(
                f"class {_name} defines coefficients only up to n = {len(_stored)}"
            )
        return _stored[n - 1]

    cls.coeff_provider = provider
    return cls


_NAME_RE = re.compile(r"^[\w()=.,+-]{1,100}$")


def _validate_name(name):
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise ValidationError(f"invalid class name {name!r}")


def from_file(path):
    """Load a class definition document (see export for the mirror format)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read class definition {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ValidationError("class definition must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}")
    name = doc.get("name")
    _validate_name(name)

    growth = None
    if "growth" in doc:
        g = doc["growth"]
        if not isinstance(g, dict) or set(g) - {"b", "rho", "alpha"}:
            raise ValidationError("growth must be an object with keys b, rho, alpha")
        try:
            growth = GrowthParams(float(g["b"]), float(g["rho"]), float(g["alpha"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"bad growth parameters: {e}") from e

    has_coeffs = "coefficients" in doc
    has_block = "block" in doc
    if has_coeffs == has_block:
        raise ValidationError("exactly one of 'coefficients' or 'block' is required")

    if has_coeffs:
        raw = doc["coefficients"]
        if not isinstance(raw, list):
            raise ValidationError("'coefficients' must be an array of decimal strings")
        try:
            values = [int(str(v)) for v in raw]
        except ValueError as e:
            raise ValidationError(f"bad coefficient entry: {e}") from e
        return from_coefficients(name, values, growth)

    block = doc["block"]
    if not isinstance(block, dict) or "kind" not in block:
        raise ValidationError("'block' must be an object with a 'kind'")
    kind = block["kind"]
    if kind in _NAMED_SPECS:
        spec = _NAMED_SPECS[kind]()
    elif kind == "poly":
        raw = block.get("bprime")
        if not isinstance(raw, list) or not raw:
            raise ValidationError("poly block needs a non-empty 'bprime' coefficient array")
        try:
            coeffs = [Fraction(str(v)) for v in raw]
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"bad bprime entry: {e}") from e
        if coeffs[0] != 0:
            raise ValidationError("bprime must have zero constant term")
        if any(c < 0 for c in coeffs):
            raise ValidationError("bprime coefficients must be non-negative")
        spec = _poly_spec(coeffs[1:])
    else:
        raise ValidationError(
            f"unknown block kind {kind!r}; expected edge, cactus, complete or poly"
        )
    _validate_block_spec(spec)
    cls = ConnectedClass(name, CoeffSource.BLOCK_DERIVED, None, spec)
    _attach_recipe_growth(cls)
    cls.coeff_provider = lambda n, _cls=cls: coefficients(_cls, n)[n - 1]
    _validate_first_coefficient(cls)
    if growth is not None:
        _check_growth_agreement(cls, growth)
    return cls


def _check_growth_agreement(cls, declared, rel_tol=1e-3):
    computed = cls.growth
    for field_name in ("b", "rho", "alpha"):
        got = getattr(computed, field_name)
        want = getattr(declared, field_name)
        if abs(got - want) > rel_tol * max(abs(got), 1e-12):
            raise ValidationError(
                f"declared growth {field_name} = {want} conflicts with the "
                f"block-derived value {got}"
            )


def export(cls, terms):
    """Serializable definition document reproducing |C_1..terms| exactly."""
    if terms < 1:
        raise DomainError("terms must be at least 1")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": cls.name,
        "coefficients": [str(c) for c in coefficients(cls, terms)],
    }
    if cls.growth is not None:
        doc["growth"] = {"b": cls.growth.b, "rho": cls.growth.rho, "alpha": cls.growth.alpha}
    return doc


def to_file(cls, terms, path):
    """Write the export document as JSON."""
    doc = export(cls, terms)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
