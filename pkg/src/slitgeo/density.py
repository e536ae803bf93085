"""Primitive lattice point counting and density in sectors and strips.

dens(R) = #(Z ∩ R) / area(R) for primitive integer vectors Z.  The regions
here are the ones with proven density floors:

  * doubled differences 2Ω \\ Ω of compact convex sets pinned at the three
    unit corners: dens > 8/27 (sharp on the triangle family);
  * sector differences over intervals with unimodular rational endpoints:
    dens > 8/27, and > 4/27π for spectrum-certified sector widths;
  * flow strips {|v x θ| < ε, b < |v| <= 2b, v·θ > 0} with a convergent in
    [1/ε, b]: dens > 2/27π.

The strip corollary powers the builders: it guarantees of order b·ε child
candidates with cross products pinned in the window [c1 ε|w|, ε|w|].
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .cfrac import spec_of
from .errors import BudgetExceeded, HypothesisViolated
from .lattice import (
    Direction,
    IntVec2,
    SlitConfig,
    WVec,
    cross_int,
    enumerate_in_strip,
    reduce_primitive,
    unimodular_complement,
)
from .reals import Real, asin_enclosure

PI = Real.pi()


@dataclass(frozen=True)
class Region:
    """A countable region with certified area enclosure.

    kinds: "triangle-diff" (2Ω_a \\ Ω_a for the corner triangle of size a),
    "sector-diff" (2Ω(I,b) \\ Ω(I,b) for an endpoint-vector interval I),
    "strip" (Σ(θ, ε, b)).  `area_lo`/`area_hi` bound the true area; for the
    triangle family they coincide (rational).
    """

    kind: str
    params: dict
    area_lo: Real
    area_hi: Real

    @staticmethod
    def triangle_diff(a: Fraction) -> "Region":
        if not 0 < a:
            raise ValueError("need a > 0")
        area = Fraction(3, 2) * a * a
        r = Real.of(area)
        return Region("triangle-diff", {"a": a}, r, r)

    @staticmethod
    def sector_diff(e1: IntVec2, e2: IntVec2, b: int) -> "Region":
        """2Ω(I,b) \\ Ω(I,b) for the salient sector between e1 and e2."""
        if cross_int(e1, e2) < 0:
            e1, e2 = e2, e1
        if cross_int(e1, e2) == 0:
            raise ValueError("degenerate sector")
        _, u1 = reduce_primitive(e1)
        _, u2 = reduce_primitive(e2)
        sin_angle = Real.of(cross_int(u1, u2)) / (u1.length() * u2.length())
        angle = asin_enclosure(sin_angle)
        if u1.dot(u2) < 0:
            angle = PI - angle
        area = angle * Fraction(3, 2) * b * b
        return Region("sector-diff", {"e1": u1, "e2": u2, "b": b}, area, area)

    @staticmethod
    def strip(theta: Direction, eps: Fraction, b: Fraction, *,
              theta_desc: dict | None = None) -> "Region":
        """Σ = {|v x θ| < ε, b < |v| <= 2b, v·θ > 0}; area via the sandwich
        2bε(1 - ε²/4b²) <= area <= 2bε(1 + ε²/2b²) valid for ε <= 1 <= b."""
        if not (0 < eps <= 1 <= b):
            raise ValueError("strip needs 0 < eps <= 1 <= b")
        be = Fraction(2) * b * eps
        lo = Real.of(be * (1 - eps * eps / (4 * b * b)))
        hi = Real.of(be * (1 + eps * eps / (2 * b * b)))
        params = {"eps": eps, "b": b, "theta": theta}
        if theta_desc:
            params["theta_desc"] = theta_desc
        return Region("strip", params, lo, hi)


@dataclass(frozen=True)
class DensityReport:
    region: Region
    count: int
    dens_lo: Real
    dens_hi: Real
    bound: Fraction | None
    bound_desc: str
    hypothesis_met: bool | None
    passed: bool | None

    def dens_float(self) -> float:
        return (self.dens_lo.mid_float() + self.dens_hi.mid_float()) / 2


def count_primitive(region: Region, cfg: SlitConfig) -> int:
    """Exact number of primitive lattice points in the region."""
    if region.kind == "triangle-diff":
        a = region.params["a"]
        hi = math.ceil(2 * a)
        cnt = 0
        for p in range(0, hi + 1):
            for q in range(0, hi + 1):
                if (p or q) and math.gcd(p, q) == 1 and a < p + q <= 2 * a:
                    cnt += 1
        return cnt
    if region.kind == "sector-diff":
        u1, u2, b = region.params["e1"], region.params["e2"], region.params["b"]
        cnt = 0
        bb = 2 * b
        for p in range(-bb, bb + 1):
            for q in range(-bb, bb + 1):
                if (p == 0 and q == 0) or math.gcd(abs(p), abs(q)) != 1:
                    continue
                v = IntVec2(p, q)
                # closed salient cone from u1 counterclockwise to u2
                if cross_int(u1, v) < 0 or cross_int(v, u2) < 0:
                    continue
                ls = v.len_sq
                if b * b < ls <= 4 * b * b:
                    cnt += 1
        return cnt
    if region.kind == "strip":
        eps, b, theta = region.params["eps"], region.params["b"], region.params["theta"]
        got = enumerate_in_strip("Z", theta, Real.of(eps), Real.of(b),
                                 Real.of(2 * b), cfg)
        return len(got)
    raise ValueError(f"unknown region kind {region.kind}")


def spectrum_hypothesis(theta_or_w, eps: Fraction, b: Fraction, cfg: SlitConfig) -> bool:
    """Whether the convergent spectrum meets the window [1/eps, b].

    Only convergents whose successor is strictly longer qualify: the 0th
    convergent can be longer than its successor, and a window met only by
    such a head vector does not feed the multiple-of-a-convergent counting
    argument (its successor may sit below the window rather than beyond b).
    """
    if b < 1 / eps:
        return False
    seq = spec_of(theta_or_w, Real.of(b), cfg)
    inv_sq = Fraction(1) / (eps * eps)
    b_sq = b * b
    vs = seq.convergents
    for k, v in enumerate(vs):
        if inv_sq <= v.len_sq <= b_sq:
            if k + 1 < len(vs) and vs[k + 1].len_sq <= v.len_sq:
                continue
            return True
    return False


def dens_of(region: Region, cfg: SlitConfig) -> DensityReport:
    """Count, density enclosure, and the applicable proven floor.

    triangle-diff carries the convex 8/27 floor; sector-diff 4/27π and strip
    2/27π when their spectrum hypothesis holds (reported, not assumed).
    """
    count = count_primitive(region, cfg)
    dens_lo = Real.of(count) / region.area_hi
    dens_hi = Real.of(count) / region.area_lo
    hypothesis: bool | None = None
    if region.kind == "triangle-diff":
        bound, desc = Fraction(8, 27), "8/27"
        bound_val = Real.of(bound)
    elif region.kind == "sector-diff":
        bound, desc = Fraction(4, 27), "4/27pi"
        bound_val = Real.of(bound) / PI
        hypothesis = region.params.get("hypothesis_met")
    else:
        bound, desc = Fraction(2, 27), "2/27pi"
        bound_val = Real.of(bound) / PI
        theta = region.params["theta"]
        hypothesis = spectrum_hypothesis(theta, region.params["eps"],
                                         region.params["b"], cfg)
    if hypothesis is False:
        passed = None  # floor not asserted without the hypothesis
    else:
        passed = dens_lo.gt(bound_val, max_prec=cfg.precision_bits,
                            what="density floor")
    return DensityReport(region, count, dens_lo, dens_hi, bound, desc,
                         hypothesis, passed)


# ----------------------------------------------------------------------------
# child candidates (the strip corollary, applied to a W-vector)


def children_candidates(w: WVec, eps: Real, b: Real, c1: Fraction,
                        cfg: SlitConfig, *, budget: int | None = None
                        ) -> list[IntVec2]:
    """All primitive v with w·v > 0, b <= |v| <= 2b, c1 ε|w| <= |w x v| <= ε|w|.

    When spec(w) meets [1/ε, b] the count is at least rho1·b·ε for the
    calibrated universal constants (tested on the battery, not assumed).
    """
    theta = Direction.of_wvec(w)
    return enumerate_in_strip(
        "Z", theta, eps, b, b * 2, cfg,
        include_b_lo=True,
        cross_lo=eps * c1,
        cross_hi_strict=False,
        budget=budget,
    )


# ----------------------------------------------------------------------------
# minimal rational intervals (test utility for the sector battery)


def farey_neighbor(v: IntVec2, b: int, rng_sign: int = 1) -> IntVec2:
    """A neighbor u with |cross(v, u)| = 1, |u| <= b, and |u + v| > b.

    This makes (v, u) the endpoints of a minimal interval at scale b: any
    vector strictly between them is at least as long as the mediant.
    """
    if not v.is_primitive():
        raise ValueError("need a primitive endpoint")
    u0 = unimodular_complement(v)
    if rng_sign < 0:
        u0 = -u0
    # slide along the solution line to the longest representative within b;
    # |u0 + k v| is convex in k, so the maximum sits at a window edge
    lo, hi = _k_window(u0, v, b)
    if lo > hi:
        raise ValueError("no neighbor within the scale")
    cl, ch = u0 + v.scale(lo), u0 + v.scale(hi)
    return ch if ch.len_sq >= cl.len_sq else cl


def _k_window(u0: IntVec2, v: IntVec2, b: int) -> tuple[int, int]:
    # integer k with |u0 + k v|^2 <= b^2
    a = v.len_sq
    bb = 2 * u0.dot(v)
    c = u0.len_sq - b * b
    disc = bb * bb - 4 * a * c
    if disc < 0:
        return 1, 0
    root = math.isqrt(disc)
    lo = math.ceil((-bb - root) / (2 * a)) - 1
    hi = math.floor((-bb + root) / (2 * a)) + 1
    while lo <= hi and (u0 + v.scale(lo)).len_sq > b * b:
        lo += 1
    while hi >= lo and (u0 + v.scale(hi)).len_sq > b * b:
        hi -= 1
    return lo, hi


def random_minimal_interval(rng: random.Random, b: int) -> tuple[IntVec2, IntVec2]:
    """Random minimal-interval endpoint pair (cross ±1, both lengths <= b)."""
    while True:
        v = IntVec2(rng.randint(-b, b), rng.randint(-b, b))
        if v.is_zero() or v.len_sq > b * b or not v.is_primitive():
            continue
        try:
            u = farey_neighbor(v, b, rng.choice([1, -1]))
        except ValueError:
            continue
        assert abs(cross_int(v, u)) == 1
        if (v + u).len_sq <= b * b or v.dot(u) < 0:
            # mediant inside scale, or obtuse pair (minimality argument
            # needs v·u >= 0): not a minimal interval, draw again
            continue
        return v, u


def stern_brocot_decompose(e1: IntVec2, e2: IntVec2, b: int,
                           limit: int = 10_000) -> list[tuple[IntVec2, IntVec2]]:
    """Split a rational-endpoint interval into minimal ones at scale b.

    Descends through mediants: an interval is minimal once its mediant is
    longer than b.  Endpoints must satisfy |e1|, |e2| <= b.
    """
    _, e1 = reduce_primitive(e1)
    _, e2 = reduce_primitive(e2)
    if cross_int(e1, e2) < 0:
        e1, e2 = e2, e1
    if cross_int(e1, e2) != 1:
        raise HypothesisViolated("descent needs unimodular endpoints", ["mediant"])
    out: list[tuple[IntVec2, IntVec2]] = []
    stack = [(e1, e2)]
    while stack:
        a, c = stack.pop()
        if len(out) + len(stack) > limit:
            raise BudgetExceeded("interval decomposition", float(limit), limit)
        med = a + c
        d, med_p = reduce_primitive(med)
        assert d == 1, "mediant of a unimodular pair is primitive"
        if med_p.len_sq > b * b:
            out.append((a, c))
        else:
            stack.append((a, med_p))
            stack.append((med_p, c))
    return out
