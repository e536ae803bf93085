"""Vector-form continued fractions.

The convergents of a direction are the integer vectors v_k = (p_k, q_k) of
the classical expansion of its slope, with the recurrence
v_{k+1} = a_{k+1} v_k + v_{k-1} seeded by v_0 = (a_0, 1), v_{-1} = (1, 0).
Consecutive convergents satisfy v_k x v_{k+1} = (-1)^{k+1} and the sandwich

    1/|v_{k+1} + v_k|  <  |w x v_k| / |w|  <  1/|v_{k+1}|

for any owner vector w of that direction.  Conventions for edge directions:
the spectrum of (1, 0) is {(1, 0)} and the spectrum of -w is the negation of
the spectrum of w.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisViolated
from .reals import Real
from .lattice import (
    Direction,
    IntVec2,
    SlitConfig,
    WVec,
    convergent_pairs,
)

Owner = "WVec | Direction"


def _owner_direction(owner) -> Direction:
    if isinstance(owner, Direction):
        return owner
    if isinstance(owner, WVec):
        return owner.direction()
    raise TypeError("owner must be a WVec or Direction")


@dataclass(frozen=True)
class ConvergentSeq:
    """Convergents of an owner direction up to a length bound.

    `convergents` holds every v_k with |v_k| <= bound plus the first
    exceeding one; `sign` is -1 when the owner points into the lower
    halfplane (members are already negated accordingly).
    """

    quotients: tuple[int, ...]
    convergents: tuple[IntVec2, ...]
    sign: int
    rational: bool
    owner_x: Real
    owner_y: Real

    def __len__(self) -> int:
        return len(self.convergents)

    def lengths_sq(self) -> list[int]:
        return [v.len_sq for v in self.convergents]

    def index_of(self, v: IntVec2) -> int | None:
        """Index of ±v among the stored convergents, or None."""
        for i, c in enumerate(self.convergents):
            if (c.p, c.q) == (v.p, v.q) or (c.p, c.q) == (-v.p, -v.q):
                return i
        return None

    def cross_with_owner(self, k: int) -> Real:
        v = self.convergents[k]
        return self.owner_x * v.q - self.owner_y * v.p

    def owner_norm(self) -> Real:
        return (self.owner_x * self.owner_x + self.owner_y * self.owner_y).sqrt()

    def selfcheck(self, cfg: SlitConfig) -> None:
        """Re-derive the defining identities; raises on any failure.

        Checks the recurrence, the alternating unit cross products, length
        monotonicity from k = 1 on, and both sandwich inequalities with
        positive margin (the sandwich is skipped at the final convergent of
        a rational owner, where the cross product is exactly zero).
        """
        vs = self.convergents
        mp = cfg.precision_bits
        for k in range(2, len(vs)):
            if vs[k] != vs[k - 1].scale(self.quotients[k]) + vs[k - 2]:
                raise AssertionError(f"recurrence fails at k={k}")
        for k in range(len(vs) - 1):
            if vs[k].cross(vs[k + 1]) != (-1) ** (k + 1):
                raise AssertionError(f"unit cross product fails at k={k}")
        for k in range(1, len(vs) - 1):
            if not vs[k + 1].len_sq > vs[k].len_sq:
                raise AssertionError(f"length monotonicity fails at k={k}")
        norm = self.owner_norm()
        last = len(vs) - 2 if self.rational else len(vs) - 1
        for k in range(0, last):
            ratio = abs(self.cross_with_owner(k)) / norm
            hi = 1 / vs[k + 1].length()
            lo = 1 / (vs[k + 1] + vs[k]).length()
            if not (ratio.lt(hi, max_prec=mp) and ratio.gt(lo, max_prec=mp)):
                raise AssertionError(f"sandwich fails at k={k}")


def spec_of(owner, length_bound: Real | int, cfg: SlitConfig, *,
            squared: bool = False) -> ConvergentSeq:
    """Convergent spectrum of a WVec or Direction up to `length_bound`.

    Returns every convergent with |v_k| <= length_bound plus the first one
    exceeding it (the sandwich needs the successor).  The bound must be at
    least 1.  With squared=True the bound is interpreted as a squared
    length, which lets callers compare against integer lengths exactly.
    """
    bound = Real.of(length_bound) if isinstance(length_bound, int) else length_bound
    if bound.cmp(1, cfg.precision_bits) < 0:
        raise ValueError("length bound must be at least 1")
    theta = _owner_direction(owner)
    ox, oy = (owner.x, owner.y) if isinstance(owner, WVec) else (theta.x, theta.y)
    bound_sq = bound if squared else bound * bound

    if theta.exact is not None and theta.exact.q == 0:
        v = IntVec2(1, 0) if theta.exact.p > 0 else IntVec2(-1, 0)
        return ConvergentSeq((0,), (v,), 1 if theta.exact.p > 0 else -1, True, ox, oy)

    ysign = oy.sign(cfg.precision_bits, what="owner y-sign")
    if ysign == 0:
        raise ValueError("owner with zero y-part must carry an exact direction")
    sign = 1 if ysign > 0 else -1
    pos = theta if sign > 0 else -theta

    quotients: list[int] = []
    members: list[IntVec2] = []
    exhausted = True
    for a, v in convergent_pairs(pos, cfg):
        quotients.append(a)
        members.append(v if sign > 0 else -v)
        if Real.of(v.len_sq).cmp(bound_sq, cfg.precision_bits,
                                 what="spectrum bound") > 0:
            exhausted = False
            break
    return ConvergentSeq(tuple(quotients), tuple(members), sign, exhausted, ox, oy)


def cf_of_fraction(value: Fraction) -> list[int]:
    """Canonical (shortest) continued fraction of a rational; test shim.

    The expansion of a rational is unique only up to the tail identity
    [..., a] = [..., a-1, 1]; `rational_cf_forms` returns both.
    """
    p, q = value.numerator, value.denominator
    out = []
    a = p // q
    out.append(a)
    p, q = q, p - a * q
    while q:
        a = p // q
        out.append(a)
        p, q = q, p - a * q
    return out


def rational_cf_forms(value: Fraction) -> tuple[list[int], list[int]]:
    short = cf_of_fraction(value)
    if len(short) == 1:
        return short, short
    long = short[:-1] + [short[-1] - 1, 1] if short[-1] > 1 else short
    return short, long


def is_convergent(v: IntVec2, w: WVec, cfg: SlitConfig) -> bool:
    """Whether ±v appears among the convergents of w.

    Fast positive route: if 2 |v| |w x v| <= |w| the membership is forced
    and only confirmed by lookup; otherwise decided by direct lookup.  The
    angle hypothesis |v| cos(angle(w, y-axis)) > 1 is required.
    """
    if not v.is_primitive():
        raise ValueError("membership test requires a primitive vector")
    mp = cfg.precision_bits
    # |v| * |w.y| / |w| > 1  <=>  v^2 * w.y^2 > w^2
    lhs = (w.y * w.y) * v.len_sq
    if not lhs.gt(w.len_sq, max_prec=mp, what="angle precondition"):
        raise HypothesisViolated("angle precondition", ["angle precondition"])
    seq = spec_of(w, v.len_sq, cfg, squared=True)
    member = seq.index_of(v) is not None
    forced = (abs(w.cross_vec(v)) * 2 * v.length()).le(w.length, max_prec=mp,
                                                       what="convergent test")
    if forced and not member:
        raise AssertionError("forced membership not confirmed by lookup")
    return member


def next_after(v: IntVec2, w: WVec, cfg: SlitConfig) -> IntVec2:
    """The convergent of w immediately following ±v."""
    seq = spec_of(w, v.len_sq, cfg, squared=True)
    idx = seq.index_of(v)
    if idx is None:
        raise ValueError(f"{v} is not a convergent of {w}")
    if idx + 1 >= len(seq.convergents):
        raise ValueError("successor not available: v is the first bound-exceeding convergent")
    succ = seq.convergents[idx + 1]
    stored = seq.convergents[idx]
    if (stored.p, stored.q) != (v.p, v.q):
        succ = -succ
    return succ
