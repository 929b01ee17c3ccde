"""Weak and strong test functions: bumps, covers, flatness verification.

A weak test function of a closed set vanishes exactly on it and is
positive elsewhere; a strong one additionally has all derivatives
vanishing on the set.  The constructions here are the classical ones
over the flat atoms: the sigmoid psi0, the quotient smooth step, radial
bumps with a fixed 2:1 support ratio, and finite sums of bumps covering
the complement of the set.  Flatness is decided numerically by
finite-difference decay near the set, with a structural shortcut when
every term of the expression carries a flat atom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from .errors import CoverageError, PreconditionError
from .symbolic import (
    ONE,
    ScalarExpr,
    ZERO,
    ZeroTestConfig,
    const,
    evaluate,
    flatexp,
    mix_seed,
    normalize,
    psi0,
    rat,
    sym,
)
from .verdicts import CheckEntry, StructuredReport, Verdict

FLAT_DISTANCES = (0.1, 0.01, 0.001)
FLAT_TOL = 1e-6


def smooth_step(u) -> ScalarExpr:
    """Monotone step built from flat atoms: 0 for u <= 0, 1 for u >= 1."""
    u = normalize(u)
    a = flatexp(u)
    b = flatexp(const(1) - u)
    return a / (a + b)


def strengthen(f) -> ScalarExpr:
    """Compose with the flat sigmoid: same zeros, all derivatives flat there."""
    return psi0(normalize(f))


@dataclass(frozen=True)
class BumpSpec:
    """A radial bump: 1 on the closed ball B(center, radius), 0 outside
    B(center, 2*radius).  When a chart box is supplied, the support ball
    must fit inside it."""

    center: dict
    radius: object
    box: dict | None = None

    def __post_init__(self):
        r = rat(self.radius) if not isinstance(self.radius, ScalarExpr) else self.radius
        rv = r.as_fraction()
        if rv is None or rv <= 0:
            raise ValueError("bump radius must be a positive rational constant")
        object.__setattr__(self, "radius", r)
        if self.box is not None:
            for name, c in self.center.items():
                lo, hi = self.box[name]
                if not (lo < float(c) - 2 * float(rv) and float(c) + 2 * float(rv) < hi):
                    raise ValueError(
                        "support ball of bump at %s leaves the chart box along %r"
                        % (self.center, name)
                    )

    def dist2(self, point) -> float:
        return sum((point[n] - float(c)) ** 2 for n, c in self.center.items())

    def in_inner(self, point) -> bool:
        return self.dist2(point) <= float(self.radius.as_fraction()) ** 2


def bump(b: BumpSpec) -> ScalarExpr:
    """The expression of a radial bump from its spec."""
    d2 = ZERO
    for name, c in b.center.items():
        delta = sym(name) - rat(c)
        d2 = d2 + delta * delta
    r2 = b.radius * b.radius
    u = (r2 * rat(4) - d2) / (r2 * rat(3))
    return smooth_step(u)


@dataclass(frozen=True)
class ClosedSetSpec:
    """A closed reference set inside a sampling window.

    Three descriptions are supported:

    * ``zeroset``: the zero set of ``expr`` (anchors must be supplied,
      since zero sets cannot be hit by random sampling);
    * ``balls``: a finite union of closed balls (center, radius);
    * ``complement-of-balls``: the window minus a union of open balls.

    ``box`` is the window used to sample the complement and, where
    possible, the set itself.  ``anchors`` are explicit points on (or
    adjacent to) the set, used by the flatness check.
    """

    coords: tuple
    box: dict
    kind: str
    expr: ScalarExpr | None = None
    balls: tuple = ()
    anchors: tuple = ()

    _KINDS = ("zeroset", "balls", "complement-of-balls")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError("unknown closed-set kind %r" % self.kind)
        if self.kind == "zeroset" and self.expr is None:
            raise ValueError("zeroset description needs an expression")
        if self.kind != "zeroset" and self.expr is not None:
            raise ValueError("only the zeroset description takes an expression")
        object.__setattr__(self, "balls", tuple((dict(c), float(r)) for c, r in self.balls))
        object.__setattr__(self, "anchors", tuple(dict(a) for a in self.anchors))

    def _draw(self, rng: Random) -> dict:
        return {n: rng.uniform(*self.box[n]) for n in self.coords}

    def _in_ball(self, point, strict: bool) -> bool:
        for center, r in self.balls:
            d2 = sum((point[n] - center[n]) ** 2 for n in self.coords)
            if d2 < r * r or (not strict and d2 == r * r):
                return True
        return False

    def contains(self, point, tol: float = 1e-9) -> bool:
        if self.kind == "zeroset":
            return abs(evaluate(self.expr, point)) <= tol
        if self.kind == "balls":
            return self._in_ball(point, strict=False)
        return all(self.box[n][0] <= point[n] <= self.box[n][1] for n in self.coords) and not self._in_ball(
            point, strict=True
        )

    def sample_complement(self, seed: int, count: int, tol: float = 1e-9) -> list:
        """Window samples off the set; may return fewer when the
        complement is empty or thin."""
        out = []
        attempts = 0
        index = 0
        while len(out) < count and attempts < 50 * max(count, 1):
            rng = Random(mix_seed(seed, index))
            index += 1
            attempts += 1
            p = self._draw(rng)
            if not self.contains(p, tol):
                out.append(p)
        return out

    def sample_set(self, seed: int, count: int) -> list:
        """Points of the set itself: anchors, ball interiors, or
        rejection samples, depending on the description."""
        out = list(self.anchors)
        if self.kind == "zeroset":
            return out[:count] if count < len(out) else out
        index = 0
        attempts = 0
        while len(out) < count and attempts < 50 * max(count, 1):
            rng = Random(mix_seed(seed ^ 0x5E7, index))
            index += 1
            attempts += 1
            p = self._draw(rng)
            if self.contains(p):
                out.append(p)
        return out

    def boundary_anchors(self, seed: int, per_ball: int = 2) -> list:
        """Flatness base points: explicit anchors, plus sphere points
        for the ball description."""
        out = list(self.anchors)
        if self.kind == "balls":
            for k, (center, r) in enumerate(self.balls):
                rng = Random(mix_seed(seed ^ 0xB0A7, k))
                for _ in range(per_ball):
                    direction = [rng.gauss(0.0, 1.0) for _ in self.coords]
                    norm = math.sqrt(sum(d * d for d in direction)) or 1.0
                    out.append(
                        {
                            n: center[n] + r * d / norm
                            for n, d in zip(self.coords, direction)
                        }
                    )
        elif self.kind == "complement-of-balls":
            out.extend(self.sample_set(seed, max(0, 4 - len(out))))
        return out


def weak_test_from_cover(balls, m0: ClosedSetSpec, cfg: ZeroTestConfig):
    """Sum of bumps as a weak test function for the set's complement.

    The inner balls must cover every sampled complement point (a gap
    raises a coverage error with the witness); the sum must then vanish
    at sampled set points and anchors and be positive at the covered
    complement samples.  Returns (expression, report).
    """
    balls = tuple(balls)
    complement = m0.sample_complement(cfg.rng_seed, cfg.sample_count, cfg.abs_tol)
    for p in complement:
        if not any(b.in_inner(p) for b in balls):
            raise CoverageError(
                "complement sample lies in no inner ball", witness=p
            )
    phi = ZERO
    for b in balls:
        phi = phi + bump(b)
    entries = [
        CheckEntry(
            "coverage",
            Verdict.PASS,
            detail="%d complement samples covered by %d inner balls"
            % (len(complement), len(balls)),
        )
    ]
    bad_zero = None
    for p in m0.sample_set(cfg.rng_seed, cfg.sample_count):
        if evaluate(phi, p) != 0.0:
            bad_zero = p
            break
    entries.append(
        CheckEntry(
            "vanishes-on-set",
            Verdict.FAIL if bad_zero else Verdict.PASS,
            detail="a bump support reaches the set" if bad_zero else "",
            witness_point=bad_zero,
        )
    )
    bad_pos = None
    for p in complement:
        if not evaluate(phi, p) > 0.0:
            bad_pos = p
            break
    entries.append(
        CheckEntry(
            "positive-on-complement",
            Verdict.FAIL if bad_pos else Verdict.PASS,
            witness_point=bad_pos,
        )
    )
    return phi, StructuredReport(tuple(entries))


def _has_flat_atom(e: ScalarExpr) -> bool:
    """True when every numerator term carries a psi0/flatexp factor."""
    if e.is_zero:
        return True
    for mono in e.num.terms:
        if not any(getattr(g, "kind", None) in ("psi0", "flatexp") for g, _ in mono):
            return False
    return True


def _directional_fd(phi, base, direction, h, order):
    """Central finite difference of the given order along a direction."""

    def at(s):
        return evaluate(
            phi, {n: base[n] + s * d for n, d in zip(sorted(base), direction)}
        )

    # direction is aligned with sorted coordinate order of the base point
    if order == 1:
        return (at(h) - at(-h)) / (2 * h)
    if order == 2:
        return (at(h) - 2 * at(0.0) + at(-h)) / (h * h)
    return (at(1.5 * h) - 3 * at(0.5 * h) + 3 * at(-0.5 * h) - at(-1.5 * h)) / (h ** 3)


def flatness_check(phi, m0: ClosedSetSpec, cfg: ZeroTestConfig) -> StructuredReport:
    """Do all derivatives of phi vanish on approach to the set?

    For each anchor and seeded unit direction, directional derivatives
    of orders 1..3 are estimated by central differences at base points
    anchor + d*direction for d in {1e-1, 1e-2, 1e-3} (step d/4).  Each
    order passes when the closest estimate is below 1e-6 and no larger
    than the farthest one.  A structural entry records when every term
    of phi carries a flat atom.
    """
    phi = normalize(phi)
    entries = []
    if _has_flat_atom(phi):
        entries.append(
            CheckEntry(
                "structural-flatness",
                Verdict.PASS,
                detail="every numerator term carries a flat atom factor",
            )
        )
    anchors = m0.boundary_anchors(cfg.rng_seed)
    if not anchors:
        raise PreconditionError(
            "flatness check needs anchors or a ball description of the set"
        )
    names = sorted(m0.coords)
    probes = []
    for k, a in enumerate(anchors):
        rng = Random(mix_seed(cfg.rng_seed ^ 0xF1A7, k))
        for _ in range(2):
            v = [rng.gauss(0.0, 1.0) for _ in names]
            norm = math.sqrt(sum(x * x for x in v)) or 1.0
            probes.append((a, [x / norm for x in v]))
    for order in (1, 2, 3):
        estimates = []
        worst_point = None
        for d in FLAT_DISTANCES:
            worst = 0.0
            for a, u in probes:
                base = {n: a[n] + d * x for n, x in zip(names, u)}
                value = abs(_directional_fd(phi, base, u, d / 4.0, order))
                if value > worst:
                    worst = value
                    if d == FLAT_DISTANCES[-1]:
                        worst_point = base
            estimates.append(worst)
        ok = estimates[-1] < FLAT_TOL and estimates[-1] <= estimates[0] + 1e-9
        entries.append(
            CheckEntry(
                "order-%d" % order,
                Verdict.PASS if ok else Verdict.FAIL,
                detail="estimates " + ", ".join(
                    "%g: %.3e" % (d, e) for d, e in zip(FLAT_DISTANCES, estimates)
                ),
                witness_point=None if ok else worst_point,
            )
        )
    return StructuredReport(tuple(entries))
