"""Open regions in a single global chart, with seeded rejection sampling.

A :class:`Region` is the set of points satisfying a conjunction of
strict inequalities ``g > 0`` inside a finite bounding box.  The box is
the sampling window (and the working volume for coverage arguments);
membership is decided by the constraints alone.  All sampling is
deterministic: sample ``index`` under a given seed always yields the
same point, independent of evaluation order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import SamplingError
from .symbolic import evaluate, free_coords, mix_seed, normalize

_MAX_REJECT = 2000


@dataclass(frozen=True)
class Region:
    """Conjunction of strict inequalities over a boxed chart.

    ``constraints`` are expressions required to be > 0; an empty tuple
    means the whole box.  ``box`` maps every chart coordinate to finite
    (lo, hi) bounds.
    """

    coords: tuple
    constraints: tuple = ()
    box: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(normalize(g) for g in self.constraints))
        for c in self.coords:
            lo, hi = self.box[c]
            if not (lo < hi):
                raise ValueError("empty box bound for %r" % c)
        for g in self.constraints:
            extra = free_coords(g) - set(self.coords)
            if extra:
                raise ValueError("constraint uses coordinates outside the chart: %s" % sorted(extra))

    def contains(self, point):
        """Strict membership: every constraint evaluates positive."""
        return all(evaluate(g, point) > 0.0 for g in self.constraints)

    def sample_point(self, seed, index):
        """Rejection-sample the region; deterministic per (seed, index)."""
        rng = random.Random(mix_seed(seed, index))
        for _ in range(_MAX_REJECT):
            point = {c: rng.uniform(*self.box[c]) for c in self.coords}
            if self.contains(point):
                return point
        raise SamplingError(
            "no sample found in region %s after %d attempts (region may be empty or thin)"
            % (self.name or self.constraints, _MAX_REJECT)
        )

    def sample_points(self, seed, count):
        return [self.sample_point(seed, i) for i in range(count)]


def box_region(coords, box, name="box"):
    """The whole working box as a region."""
    return Region(tuple(coords), (), dict(box), name=name)


def intersect(a: Region, b: Region, name=""):
    """Intersection of two regions on the same chart.

    The box of the intersection is the per-coordinate overlap of the two
    sampling boxes; raises ValueError when the boxes do not overlap.
    """
    if a.coords != b.coords:
        raise ValueError("regions live on different charts")
    box = {}
    for c in a.coords:
        lo = max(a.box[c][0], b.box[c][0])
        hi = min(a.box[c][1], b.box[c][1])
        if not (lo < hi):
            raise ValueError("sampling boxes do not overlap on %r" % c)
        box[c] = (lo, hi)
    seen = []
    for g in a.constraints + b.constraints:
        if g not in seen:
            seen.append(g)
    return Region(a.coords, tuple(seen), box, name=name or "%s&%s" % (a.name, b.name))


def hull_box(regions):
    """Smallest box containing every region's box (per coordinate)."""
    coords = regions[0].coords
    out = {}
    for c in coords:
        out[c] = (min(r.box[c][0] for r in regions), max(r.box[c][1] for r in regions))
    return out
