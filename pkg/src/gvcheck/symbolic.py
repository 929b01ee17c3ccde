"""Exact symbolic scalar fields over named coordinates.

A :class:`ScalarExpr` is kept in a canonical fraction ``num / den`` where
both sides are sparse polynomials over an extended generator set:
coordinate symbols plus interned transcendental atoms ``exp``, ``log``,
``psi0`` and ``flatexp``.  Arithmetic normalizes eagerly, so structural
equality decides semantic equality on the polynomial/rational fragment.

The two flat atoms are first class and are never expanded into
exp-of-quotient trees, so their flatness at the boundary is exact by
construction:

* ``flatexp(u)`` is exp(-1/u) for u > 0 and 0 for u <= 0, with the
  derivative rewrite d flatexp(u) = flatexp(u)/u^2 * du.
* ``psi0(t)`` is exp(-1/t^2) / (1 + exp(-1/t^2)) for t != 0 and 0 at
  t = 0, with d psi0(t) = 2 psi0(t) (1 - psi0(t)) / t^3 * dt.  Its values
  lie in [0, 1/2].

Zero testing is a semi-decision: PROVED-ZERO comes only from exact
normalization, NONZERO only from a numeric witness that clears the
configured tolerances at a sampled point, and everything else stays
UNDECIDED.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, EvaluationError
from .verdicts import ZeroOutcome, ZeroStatus

_MASK64 = (1 << 64) - 1

ATOM_KINDS = ("exp", "log", "psi0", "flatexp")
_KIND_INDEX = {k: i for i, k in enumerate(ATOM_KINDS)}


def mix_seed(seed, index):
    """Derive a per-index sub-seed from a master seed (splitmix64 step).

    Each sample point gets its own stream, so results do not depend on
    the order in which samples are drawn.
    """
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# generators: coordinate symbols and interned atoms


class CoordGen:
    __slots__ = ("name", "skey", "_h")

    def __init__(self, name):
        self.name = name
        self.skey = (0, name)
        self._h = hash(self.skey)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, CoordGen) and other.name == self.name)

    def __repr__(self):
        return self.name


class AtomGen:
    """A transcendental atom applied to a canonical argument expression."""

    __slots__ = ("kind", "arg", "skey", "_h")

    def __init__(self, kind, arg):
        self.kind = kind
        self.arg = arg
        self.skey = (1, _KIND_INDEX[kind], arg.key)
        self._h = hash(self.skey)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, AtomGen) and other.skey == self.skey)

    def __repr__(self):
        return "%s(%s)" % (self.kind, self.arg)


_COORD_GENS: dict = {}
_ATOM_GENS: dict = {}


def _coord_gen(name):
    g = _COORD_GENS.get(name)
    if g is None:
        g = _COORD_GENS.setdefault(name, CoordGen(name))
    return g


def _atom_gen(kind, arg):
    key = (kind, arg.key)
    g = _ATOM_GENS.get(key)
    if g is None:
        g = _ATOM_GENS.setdefault(key, AtomGen(kind, arg))
    return g


# ---------------------------------------------------------------------------
# sparse polynomials over the generators

# A monomial is a tuple of (generator, positive exponent) pairs sorted by
# the generator sort key; the empty tuple is the constant monomial.


def _mono_key(mono):
    return tuple((g.skey, e) for g, e in mono)


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ga, ea = a[i]
        gb, eb = b[j]
        if ga.skey == gb.skey:
            out.append((ga, ea + eb))
            i += 1
            j += 1
        elif ga.skey < gb.skey:
            out.append((ga, ea))
            i += 1
        else:
            out.append((gb, eb))
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("terms", "key")

    def __init__(self, terms):
        self.terms = terms
        self.key = tuple(
            sorted(((_mono_key(m), (c.numerator, c.denominator)) for m, c in terms.items()))
        )

    @property
    def is_zero(self):
        return not self.terms

    def add(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly(out)

    def neg(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def mul(self, other):
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    s = s + c
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return Poly(out)

    def scale(self, c):
        if not c:
            return _P_ZERO
        return Poly({m: v * c for m, v in self.terms.items()})

    def pow(self, k):
        result = _P_ONE
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            base = base.mul(base)
            k >>= 1
        return result


_P_ZERO = Poly({})
_P_ONE = Poly({(): Fraction(1)})


def _poly_const(c):
    c = Fraction(c)
    return Poly({(): c}) if c else _P_ZERO


def _poly_gen(gen):
    return Poly({((gen, 1),): Fraction(1)})


def _content(poly):
    """Per-generator minimum exponent across all terms."""
    it = iter(poly.terms)
    first = next(it)
    content = {g: e for g, e in first}
    for mono in it:
        if not content:
            break
        exps = {g: e for g, e in mono}
        for g in list(content):
            e = exps.get(g)
            if e is None:
                del content[g]
            else:
                content[g] = min(content[g], e)
    return content


def _divide_content(poly, content):
    out = {}
    for mono, c in poly.terms.items():
        kept = []
        for g, e in mono:
            e -= content.get(g, 0)
            if e:
                kept.append((g, e))
        out[tuple(kept)] = c
    return Poly(out)


# ---------------------------------------------------------------------------
# canonical scalar expressions


class ScalarExpr:
    """Immutable canonical fraction of two polynomials.

    Use the module constructors (:func:`sym`, :func:`rat`, :func:`exp`,
    ...) and the arithmetic operators; the internal constructor assumes
    already-canonical data.
    """

    __slots__ = ("num", "den", "key", "_h")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        self.key = (num.key, den.key)
        self._h = hash(self.key)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return isinstance(other, ScalarExpr) and other.key == self.key

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_one(self):
        return self.key == ONE.key

    def as_fraction(self):
        """Exact rational value, or None if the expression is not constant."""
        if self.den.key != _P_ONE.key:
            return None
        if self.num.is_zero:
            return Fraction(0)
        if len(self.num.terms) == 1 and () in self.num.terms:
            return self.num.terms[()]
        return None

    def is_constant(self):
        """True when the expression is a literal rational constant."""
        return self.as_fraction() is not None

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _make(
            self.num.mul(other.den).add(other.num.mul(self.den)),
            self.den.mul(other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(self.num.neg(), self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _make(self.num.mul(other.num), self.den.mul(other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _make(self.num.mul(other.den), self.den.mul(other.num))

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("exponents must be integers")
        if k >= 0:
            return _make(self.num.pow(k), self.den.pow(k))
        if self.is_zero:
            raise ZeroDivisionError("zero expression raised to a negative power")
        return _make(self.den.pow(-k), self.num.pow(-k))

    # -- rendering ----------------------------------------------------

    def __str__(self):
        num = _poly_str(self.num)
        if self.den.key == _P_ONE.key:
            return num
        den = _poly_str(self.den)
        if len(self.num.terms) > 1:
            num = "(%s)" % num
        return "%s / (%s)" % (num, den)

    def __repr__(self):
        return "<expr %s>" % self

    # -- convenience method forms of the module operations -------------

    def partial(self, name):
        return partial(self, name)

    def eval(self, point):
        return evaluate(self, point)

    def subs(self, mapping):
        return substitute(self, mapping)


def _coerce(v):
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (int, Fraction)):
        return ScalarExpr(_poly_const(v), _P_ONE)
    return NotImplemented


def _make(num, den):
    """Canonicalize a raw fraction of polynomials."""
    if den.is_zero:
        raise ZeroDivisionError("denominator normalizes to the zero polynomial")
    if num.is_zero:
        return ZERO
    # cancel shared monomial content
    cn = _content(num)
    if cn:
        cd = _content(den)
        shared = {g: min(e, cd[g]) for g, e in cn.items() if g in cd}
        shared = {g: e for g, e in shared.items() if e > 0}
        if shared:
            num = _divide_content(num, shared)
            den = _divide_content(den, shared)
    # fold num = c * den into the constant c
    if len(num.terms) == len(den.terms):
        ratio = None
        for m, c in num.terms.items():
            d = den.terms.get(m)
            if d is None:
                ratio = None
                break
            r = c / d
            if ratio is None:
                ratio = r
            elif ratio != r:
                ratio = None
                break
        if ratio is not None:
            return ScalarExpr(_poly_const(ratio), _P_ONE)
    # normalize scale: leading denominator coefficient becomes 1
    lead = max(den.terms, key=_mono_key)
    c = den.terms[lead]
    if c != 1:
        inv = 1 / c
        num = num.scale(inv)
        den = den.scale(inv)
    return ScalarExpr(num, den)


ZERO = ScalarExpr(_P_ZERO, _P_ONE)
ONE = ScalarExpr(_P_ONE, _P_ONE)


# ---------------------------------------------------------------------------
# constructors


def sym(name):
    """The coordinate symbol ``name``."""
    return ScalarExpr(_poly_gen(_coord_gen(name)), _P_ONE)


def rat(p, q=1):
    """Exact rational constant p/q."""
    return ScalarExpr(_poly_const(Fraction(p, q)), _P_ONE)


def const(value):
    """Exact constant from an int or Fraction."""
    return ScalarExpr(_poly_const(Fraction(value)), _P_ONE)


def _atom_expr(kind, arg):
    return ScalarExpr(_poly_gen(_atom_gen(kind, arg)), _P_ONE)


def exp(u):
    """Atom exp(u).  exp(0) folds to 1."""
    u = _coerce(u)
    if u.is_zero:
        return ONE
    return _atom_expr("exp", u)


def log(u):
    """Atom log(u).  log(1) folds to 0.  Evaluation requires u > 0."""
    u = _coerce(u)
    if u.is_one:
        return ZERO
    return _atom_expr("log", u)


def psi0(u):
    """Flat sigmoid atom: exp(-1/u^2)/(1+exp(-1/u^2)) for u != 0, else 0.

    Smooth on all of R, flat at u = 0, with values in [0, 1/2].
    psi0(0) folds to the zero expression.
    """
    u = _coerce(u)
    if u.is_zero:
        return ZERO
    return _atom_expr("psi0", u)


def flatexp(u):
    """Flat exponential atom: exp(-1/u) for u > 0, identically 0 for u <= 0.

    A nonpositive constant argument folds to the zero expression.
    """
    u = _coerce(u)
    c = u.as_fraction()
    if c is not None and c <= 0:
        return ZERO
    return _atom_expr("flatexp", u)


# ---------------------------------------------------------------------------
# normalization and calculus


def normalize(e):
    """Return the canonical form of ``e``.

    Construction already normalizes eagerly, so this is the identity on
    :class:`ScalarExpr` values; it exists as the explicit, idempotent
    entry point and coerces plain numbers.
    """
    c = _coerce(e)
    if c is NotImplemented:
        raise TypeError("cannot normalize %r" % (e,))
    return c


def _atom_derivative(gen):
    """d atom / d arg, expressed with the atom itself and rational factors."""
    u = gen.arg
    a = ScalarExpr(_poly_gen(gen), _P_ONE)
    if gen.kind == "exp":
        return a
    if gen.kind == "log":
        return ONE / u
    if gen.kind == "psi0":
        # 2 psi0(u) (1 - psi0(u)) / u^3, extended by 0 across u = 0
        return rat(2) * a * (ONE - a) / (u * u * u)
    if gen.kind == "flatexp":
        # flatexp(u)/u^2 for u > 0, extended by 0; exact flatness preserved
        return a / (u * u)
    raise AssertionError(gen.kind)


def _poly_partial(poly, name):
    total = ZERO
    for mono, c in poly.terms.items():
        for i, (g, e) in enumerate(mono):
            if isinstance(g, CoordGen):
                if g.name != name:
                    continue
                dgen = ONE
            else:
                darg = partial(g.arg, name)
                if darg.is_zero:
                    continue
                dgen = _atom_derivative(g) * darg
            rest = list(mono[:i]) + list(mono[i + 1:])
            if e > 1:
                rest.append((g, e - 1))
            rest.sort(key=lambda p: p[0].skey)
            factor = ScalarExpr(Poly({tuple(rest): c * e}), _P_ONE)
            total = total + factor * dgen
    return total


def partial(e, name):
    """Exact partial derivative of ``e`` with respect to coordinate ``name``."""
    e = normalize(e)
    dn = _poly_partial(e.num, name)
    if e.den.key == _P_ONE.key:
        return dn
    dd = _poly_partial(e.den, name)
    den_expr = ScalarExpr(e.den, _P_ONE)
    num_expr = ScalarExpr(e.num, _P_ONE)
    return (dn * den_expr - num_expr * dd) / (den_expr * den_expr)


def free_coords(e):
    """Names of the coordinates the expression actually depends on."""
    out = set()

    def walk_poly(p):
        for mono in p.terms:
            for g, _ in mono:
                if isinstance(g, CoordGen):
                    out.add(g.name)
                else:
                    walk_poly(g.arg.num)
                    walk_poly(g.arg.den)

    walk_poly(e.num)
    walk_poly(e.den)
    return frozenset(out)


def denominators(e):
    """All denominators whose nonvanishing the expression relies on.

    Returns the top-level denominator (when not 1) together with the
    denominators appearing inside atom arguments, so callers can emit a
    nonvanishing-on-region obligation for each.
    """
    found = []
    seen = set()

    def note(poly):
        expr = ScalarExpr(poly, _P_ONE)
        if expr.key not in seen:
            seen.add(expr.key)
            found.append(expr)

    def walk(expr):
        if expr.den.key != _P_ONE.key:
            note(expr.den)
        for poly in (expr.num, expr.den):
            for mono in poly.terms:
                for g, _ in mono:
                    if isinstance(g, AtomGen):
                        walk(g.arg)

    walk(normalize(e))
    return tuple(found)


def substitute(e, mapping):
    """Substitute expressions for coordinate symbols (exact composition).

    ``mapping`` maps coordinate names to ScalarExpr (or numbers);
    unmentioned coordinates stay themselves.
    """
    e = normalize(e)
    table = {k: normalize(v) for k, v in mapping.items()}

    def sub_poly(p):
        total = ZERO
        for mono, c in p.terms.items():
            term = ScalarExpr(_poly_const(c), _P_ONE)
            for g, exp_ in mono:
                if isinstance(g, CoordGen):
                    base = table.get(g.name)
                    if base is None:
                        base = ScalarExpr(_poly_gen(g), _P_ONE)
                else:
                    base = _atom_expr(g.kind, sub_expr(g.arg))
                term = term * base**exp_
            total = total + term
        return total

    def sub_expr(x):
        num = sub_poly(x.num)
        den = sub_poly(x.den)
        return num / den

    return sub_expr(e)


# ---------------------------------------------------------------------------
# evaluation


def _ipow(base, k):
    # repeated multiplication keeps results reproducible across platforms
    out = 1.0
    for _ in range(k):
        out *= base
    return out


def _eval_gen(gen, point, cache):
    v = cache.get(gen)
    if v is not None:
        return v
    if isinstance(gen, CoordGen):
        try:
            v = float(point[gen.name])
        except KeyError:
            raise EvaluationError("unbound coordinate %r" % gen.name, offender=gen.name, point=dict(point))
    else:
        u = _eval_expr(gen.arg, point, cache)
        kind = gen.kind
        try:
            if kind == "exp":
                v = math.exp(u)
            elif kind == "log":
                if u <= 0.0:
                    raise DomainError("log of non-positive value %r" % u, offender=str(gen), point=dict(point))
                v = math.log(u)
            elif kind == "psi0":
                if u == 0.0:
                    v = 0.0
                else:
                    g = math.exp(-1.0 / (u * u))
                    v = g / (1.0 + g)
            else:  # flatexp
                v = 0.0 if u <= 0.0 else math.exp(-1.0 / u)
        except OverflowError:
            raise EvaluationError("overflow evaluating %s" % gen, offender=str(gen), point=dict(point))
    cache[gen] = v
    return v


def _eval_poly(poly, point, cache):
    total = 0.0
    for mono, c in poly.terms.items():
        v = float(c)
        for g, e in mono:
            v *= _ipow(_eval_gen(g, point, cache), e)
        total += v
    return total


def _eval_expr(e, point, cache):
    num = _eval_poly(e.num, point, cache)
    if e.den.key == _P_ONE.key:
        return num
    den = _eval_poly(e.den, point, cache)
    if den == 0.0:
        raise EvaluationError(
            "division by zero evaluating %s" % e,
            offender=str(ScalarExpr(e.den, _P_ONE)),
            point=dict(point),
        )
    return num / den


def evaluate(e, point):
    """Binary-64 evaluation at a point (mapping of coordinate name to float).

    Raises :class:`EvaluationError` on division by zero or overflow and
    :class:`DomainError` for log outside its domain.  Hardware underflow
    of the flat atoms to exact 0.0 is accepted.
    """
    return _eval_expr(normalize(e), point, {})


def _scale_at(e, point, cache):
    """Magnitude scale of e at a point: term-wise absolute sum of the numerator
    over the absolute denominator.  Used for relative tolerances."""
    total = 0.0
    for mono, c in e.num.terms.items():
        v = abs(float(c))
        for g, ex in mono:
            v *= _ipow(abs(_eval_gen(g, point, cache)), ex)
        total += v
    if e.den.key == _P_ONE.key:
        return total
    den = _eval_poly(e.den, point, cache)
    if den == 0.0:
        raise EvaluationError("division by zero in scale", offender=str(e), point=dict(point))
    return total / abs(den)


# ---------------------------------------------------------------------------
# zero testing


@dataclass(frozen=True)
class ZeroTestConfig:
    """Sampling budget and tolerances for the numeric zero-test fallback."""

    sample_count: int = 32
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    rng_seed: int = 20140917

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")

    def with_seed(self, seed):
        return ZeroTestConfig(self.sample_count, self.abs_tol, self.rel_tol, seed & _MASK64)


def is_zero_on(e, region, cfg=None):
    """Tri-state zero test of ``e`` on a sampleable region.

    PROVED-ZERO when normalization reduces e to the zero expression;
    NONZERO with a witness point when a seeded sample clears the mixed
    absolute/relative tolerance; UNDECIDED otherwise.  ``region`` only
    needs a ``sample_point(seed, index)`` method.
    """
    e = normalize(e)
    if e.is_zero:
        return ZeroOutcome(ZeroStatus.PROVED_ZERO)
    if cfg is None:
        cfg = ZeroTestConfig()
    max_abs = 0.0
    skipped = 0
    for i in range(cfg.sample_count):
        point = region.sample_point(cfg.rng_seed, i)
        try:
            cache = {}
            v = _eval_expr(e, point, cache)
            scale = _scale_at(e, point, cache)
        except EvaluationError:
            skipped += 1
            continue
        threshold = cfg.abs_tol + cfg.rel_tol * scale
        if abs(v) > threshold:
            return ZeroOutcome(ZeroStatus.NONZERO, witness=dict(point), value=v)
        if abs(v) > max_abs:
            max_abs = abs(v)
    detail = "max |value| %.3e over %d samples" % (max_abs, cfg.sample_count - skipped)
    if skipped:
        detail += " (%d samples skipped: evaluation error)" % skipped
    return ZeroOutcome(ZeroStatus.UNDECIDED, detail=detail)


# ---------------------------------------------------------------------------
# rendering


def _frac_str(c):
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def _gen_str(g):
    if isinstance(g, CoordGen):
        return g.name
    return "%s(%s)" % (g.kind, g.arg)


def _mono_str(mono):
    parts = []
    for g, e in mono:
        s = _gen_str(g)
        parts.append(s if e == 1 else "%s^%d" % (s, e))
    return "*".join(parts)


def _poly_str(p):
    if p.is_zero:
        return "0"
    bits = []
    for mono, c in sorted(p.terms.items(), key=lambda t: _mono_key(t[0])):
        ms = _mono_str(mono)
        if not ms:
            bits.append(_frac_str(c))
        elif c == 1:
            bits.append(ms)
        elif c == -1:
            bits.append("-" + ms)
        else:
            bits.append("%s*%s" % (_frac_str(c), ms))
    out = bits[0]
    for b in bits[1:]:
        out += " - " + b[1:] if b.startswith("-") else " + " + b
    return out


def _frac_latex(c):
    if c.denominator == 1:
        return str(c.numerator)
    sign = "-" if c.numerator < 0 else ""
    return r"%s\tfrac{%d}{%d}" % (sign, abs(c.numerator), c.denominator)


_ATOM_LATEX = {
    "exp": r"\exp",
    "log": r"\log",
    "psi0": r"\psi_0",
    "flatexp": r"\operatorname{flatexp}",
}


def _gen_latex(g):
    if isinstance(g, CoordGen):
        return g.name
    return r"%s\!\left(%s\right)" % (_ATOM_LATEX[g.kind], to_latex(g.arg))


def _poly_latex(p):
    if p.is_zero:
        return "0"
    bits = []
    for mono, c in sorted(p.terms.items(), key=lambda t: _mono_key(t[0])):
        ms = r" \, ".join(
            _gen_latex(g) if e == 1 else "%s^{%d}" % (_gen_latex(g), e) for g, e in mono
        )
        if not ms:
            bits.append(_frac_latex(c))
        elif c == 1:
            bits.append(ms)
        elif c == -1:
            bits.append("-" + ms)
        else:
            bits.append(r"%s \, %s" % (_frac_latex(c), ms))
    out = bits[0]
    for b in bits[1:]:
        out += " - " + b[1:] if b.startswith("-") else " + " + b
    return out


def to_latex(e):
    """LaTeX rendering of a scalar expression."""
    e = normalize(e)
    num = _poly_latex(e.num)
    if e.den.key == _P_ONE.key:
        return num
    return r"\frac{%s}{%s}" % (num, _poly_latex(e.den))
