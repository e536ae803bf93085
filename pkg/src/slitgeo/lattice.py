"""Exact lattice primitives and strip enumeration.

Vectors live in two families: `IntVec2` (primitive integer vectors, the class
`Z`) and `WVec` (holonomy-translated vectors s*(x0,y0)+n, the class `W`).
The union V = W ∪ Z is the set of saddle-connection holonomy vectors of the
g-cyclic cover; everything downstream is driven by cross products within it.

Strip enumeration works in a unimodular basis (u1, u2) of consecutive
convergents of the target direction, so that one basis vector runs along the
strip and the other across it.  Candidate (a, b) coefficient boxes are
derived by exact 2x2 inversion (the determinant is ±1), every candidate is
then kept or dropped by certified interval comparisons.  This makes the cost
linear in the output size even when the strip lives at scales like 1e90.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Literal, Sequence

from .errors import BudgetExceeded, PrecisionExhausted
from .reals import (
    Real,
    START_PREC,
    ceil_lower,
    context,
    floor_upper,
    int_bounds,
)

# ----------------------------------------------------------------------------
# integer vectors


@dataclass(frozen=True, slots=True)
class IntVec2:
    """Exact integer lattice vector."""

    p: int
    q: int

    def __add__(self, other: "IntVec2") -> "IntVec2":
        return IntVec2(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "IntVec2") -> "IntVec2":
        return IntVec2(self.p - other.p, self.q - other.q)

    def __neg__(self) -> "IntVec2":
        return IntVec2(-self.p, -self.q)

    def scale(self, k: int) -> "IntVec2":
        return IntVec2(k * self.p, k * self.q)

    def cross(self, other: "IntVec2") -> int:
        return self.p * other.q - self.q * other.p

    def dot(self, other: "IntVec2") -> int:
        return self.p * other.p + self.q * other.q

    @property
    def len_sq(self) -> int:
        return self.p * self.p + self.q * self.q

    def length(self) -> Real:
        return Real.sqrt_int(self.len_sq)

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def is_primitive(self) -> bool:
        return math.gcd(abs(self.p), abs(self.q)) == 1

    def __iter__(self):
        return iter((self.p, self.q))

    def __repr__(self) -> str:
        return f"({self.p},{self.q})"


def cross_int(a: IntVec2, b: IntVec2) -> int:
    """Exact cross product ad - bc of integer vectors."""
    return a.p * b.q - a.q * b.p


def reduce_primitive(v: IntVec2) -> tuple[int, IntVec2]:
    """Split v = d*u with u primitive and d = gcd(|p|, |q|)."""
    if v.is_zero():
        raise ValueError("degenerate vector")
    d = math.gcd(abs(v.p), abs(v.q))
    return d, IntVec2(v.p // d, v.q // d)


def unimodular_complement(u: IntVec2) -> IntVec2:
    """Some integer vector w with cross(u, w) = 1 (u must be primitive)."""
    if not u.is_primitive():
        raise ValueError("complement requires a primitive vector")
    # solve u.p * y - u.q * x = 1
    g, x, y = _ext_gcd(u.p, u.q)
    assert g == 1
    # u.p * x + u.q * y = 1  ->  cross(u, (-y, x)) = u.p*x + u.q*y = 1
    return IntVec2(-y, x)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ----------------------------------------------------------------------------
# holonomy-translated vectors


@dataclass(frozen=True, eq=False)
class WVec:
    """Vector s*(x0, y0) + n in the translated lattice W."""

    s: int
    n: IntVec2
    x0: Real = field(repr=False)
    y0: Real = field(repr=False)

    def __post_init__(self):
        if self.s not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def key(self) -> tuple[int, int, int]:
        return (self.s, self.n.p, self.n.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, WVec) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    @cached_property
    def x(self) -> Real:
        return self.x0 * self.s + self.n.p

    @cached_property
    def y(self) -> Real:
        return self.y0 * self.s + self.n.q

    @cached_property
    def len_sq(self) -> Real:
        return self.x * self.x + self.y * self.y

    @cached_property
    def length(self) -> Real:
        return self.len_sq.sqrt()

    def __neg__(self) -> "WVec":
        return WVec(-self.s, -self.n, self.x0, self.y0)

    def translate(self, v: IntVec2, k: int = 1) -> "WVec":
        """The vector self + k*v (stays in W)."""
        return WVec(self.s, self.n + v.scale(k), self.x0, self.y0)

    def cross_vec(self, v: IntVec2) -> Real:
        return self.x * v.q - self.y * v.p

    def dot_vec(self, v: IntVec2) -> Real:
        return self.x * v.p + self.y * v.q

    def cross_w(self, other: "WVec") -> Real:
        return self.x * other.y - self.y * other.x

    def direction(self) -> "Direction":
        return Direction(self.x / self.length, self.y / self.length, None)

    def __repr__(self) -> str:
        sgn = "+" if self.s > 0 else "-"
        return f"W[{sgn}({self.n.p},{self.n.q})]"


def cross_w(w: WVec, v: IntVec2, cfg: "SlitConfig | None" = None) -> Real:
    """Certified cross product w x v = s*(x0*q - y0*p) + n x v.

    Never exactly zero for config holonomies with irrational slope; callers
    resolve signs with escalation up to cfg.precision_bits.
    """
    return w.cross_vec(v)


# ----------------------------------------------------------------------------
# directions


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit vector with certified components.

    `exact` is set when the direction is that of an integer vector; those
    directions have a finite convergent spectrum and the enumeration engine
    switches to the exact lattice basis.
    """

    x: Real
    y: Real
    exact: IntVec2 | None = None

    @staticmethod
    def of_intvec(v: IntVec2) -> "Direction":
        _, u = reduce_primitive(v)
        norm = u.length()
        return Direction(Real.of(u.p) / norm, Real.of(u.q) / norm, u)

    @staticmethod
    def of_wvec(w: WVec) -> "Direction":
        return w.direction()

    @staticmethod
    def of_reals(x: Real, y: Real) -> "Direction":
        norm = (x * x + y * y).sqrt()
        return Direction(x / norm, y / norm, None)

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.exact if self.exact else None)

    def cross(self, v) -> Real:
        """v x theta for an IntVec2 or WVec v."""
        if isinstance(v, IntVec2):
            return self.y * v.p - self.x * v.q
        return v.x * self.y - v.y * self.x

    def dot(self, v) -> Real:
        if isinstance(v, IntVec2):
            return self.x * v.p + self.y * v.q
        return v.x * self.x + v.y * self.y

    def __repr__(self) -> str:
        try:
            return f"Dir({self.x.decimal(10)},{self.y.decimal(10)})"
        except Exception:
            return "Dir(<unevaluated>)"


def vlen_sq(v) -> Real | int:
    return v.len_sq


def vcross(a, b) -> Real | int:
    """Cross product between any mix of IntVec2 and WVec."""
    if isinstance(a, IntVec2) and isinstance(b, IntVec2):
        return a.cross(b)
    ax, ay = (Real.of(a.p), Real.of(a.q)) if isinstance(a, IntVec2) else (a.x, a.y)
    bx, by = (Real.of(b.p), Real.of(b.q)) if isinstance(b, IntVec2) else (b.x, b.y)
    return ax * by - ay * bx


# ----------------------------------------------------------------------------
# configuration

_PRESETS: dict[str, tuple] = {
    # name -> (x0 builder, y0 builder, default c0, default d0, default dio bound)
    "sqrt2m1_sqrt3m1": (
        lambda: Real.sqrt_int(2) - 1,
        lambda: Real.sqrt_int(3) - 1,
        Fraction("0.045"),
        Fraction(3),
        10_000,
    ),
    "sqrt5m2_sqrt3m1": (
        lambda: Real.sqrt_int(5) - 2,
        lambda: Real.sqrt_int(3) - 1,
        Fraction("0.02"),
        Fraction(3),
        2_000,
    ),
    "sqrt7m2_sqrt2m1": (
        lambda: Real.sqrt_int(7) - 2,
        lambda: Real.sqrt_int(2) - 1,
        Fraction("0.02"),
        Fraction(3),
        2_000,
    ),
    "sqrt10m3_sqrt6m2": (
        lambda: Real.sqrt_int(10) - 3,
        lambda: Real.sqrt_int(6) - 2,
        Fraction("0.02"),
        Fraction(3),
        2_000,
    ),
}

DEFAULT_PRESET = "sqrt2m1_sqrt3m1"


def preset_names() -> list[str]:
    return list(_PRESETS)


@dataclass(frozen=True, eq=False)
class SlitConfig:
    """Cover parameters: genus, slit holonomy and arithmetic policy.

    The holonomy pair comes from a named preset (quadratic irrationals, the
    recommended route) or from exact decimal strings.  Irrationality cannot
    be decided from decimals, so the Diophantine quality is only ever
    verified over the finite scan range `dio_check_bound`.
    """

    genus: int
    x0: Real
    y0: Real
    c0: Fraction
    d0: Fraction
    precision_bits: int = 1 << 15
    dio_check_bound: int = 10_000
    preset: str | None = None
    x0_text: str | None = None
    y0_text: str | None = None
    enum_budget: int = 2_000_000

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")
        if self.precision_bits < 256:
            raise ValueError("precision_bits must be at least 256")
        for name, val in (("x0", self.x0), ("y0", self.y0)):
            if not (val.sign(max_prec=1024) > 0 and (val - 1).sign(max_prec=1024) < 0):
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.c0 <= 0 or self.d0 <= 0:
            raise ValueError("c0 and d0 must be positive")

    @staticmethod
    def from_preset(name: str = DEFAULT_PRESET, **overrides) -> "SlitConfig":
        try:
            fx, fy, c0, d0, bound = _PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; known: {preset_names()}")
        kw = dict(
            genus=2,
            x0=fx(),
            y0=fy(),
            c0=c0,
            d0=d0,
            dio_check_bound=bound,
            preset=name,
        )
        kw.update(overrides)
        return SlitConfig(**kw)

    @staticmethod
    def from_dict(data: dict) -> "SlitConfig":
        data = dict(data)
        preset = data.pop("preset", None)
        overrides: dict = {}
        for key in ("genus", "precision_bits", "dio_check_bound", "enum_budget"):
            if key in data:
                overrides[key] = int(data.pop(key))
        for key in ("c0", "d0"):
            if key in data:
                overrides[key] = Fraction(str(data.pop(key)))
        x0_text = data.pop("x0", None)
        y0_text = data.pop("y0", None)
        if data:
            raise ValueError(f"unknown config keys: {sorted(data)}")
        if preset is not None:
            if x0_text is not None or y0_text is not None:
                raise ValueError("give either a preset or x0/y0, not both")
            return SlitConfig.from_preset(preset, **overrides)
        if x0_text is None or y0_text is None:
            raise ValueError("config needs a preset or both x0 and y0")
        overrides.setdefault("genus", 2)
        overrides.setdefault("c0", Fraction("0.01"))
        overrides.setdefault("d0", Fraction(3))
        return SlitConfig(
            x0=Real.from_decimal(str(x0_text)),
            y0=Real.from_decimal(str(y0_text)),
            x0_text=str(x0_text),
            y0_text=str(y0_text),
            **overrides,
        )

    def to_dict(self) -> dict:
        out: dict = {
            "genus": self.genus,
            "c0": str(self.c0),
            "d0": str(self.d0),
            "precision_bits": self.precision_bits,
            "dio_check_bound": self.dio_check_bound,
            "enum_budget": self.enum_budget,
        }
        if self.preset:
            out["preset"] = self.preset
        else:
            out["x0"] = self.x0_text
            out["y0"] = self.y0_text
        return out

    def wvec(self, s: int, n: IntVec2) -> WVec:
        return WVec(s, n, self.x0, self.y0)

    def verify_dio(self, bound: int | None = None) -> "DioReport":
        b = bound if bound is not None else self.dio_check_bound
        key = (id(self.x0), id(self.y0), self.c0, self.d0, b)
        rep = _dio_cache.get(key)
        if rep is None:
            rep = _dio_scan(self, b)
            _dio_cache[key] = rep
        return rep


@dataclass(frozen=True)
class DioReport:
    passed: bool
    bound: int
    worst_pair: tuple[int, int]
    worst_quality: str  # decimal of min max(|m|,|n|)^d0 * dist(m x0 + n y0, Z)


_dio_cache: dict = {}


def _dio_scan(cfg: SlitConfig, bound: int) -> DioReport:
    """Two-stage Diophantine-quality scan.

    Stage 1 is a float64 sweep with a slack that dominates its rounding
    error; stage 2 rechecks every survivor with certified arithmetic.
    """
    import numpy as np

    fx = cfg.x0.mid_float(96)
    fy = cfg.y0.mid_float(96)
    d0f = float(cfg.d0)
    c0f = float(cfg.c0)
    ns = np.arange(-bound, bound + 1, dtype=np.float64)
    ns_i = np.arange(-bound, bound + 1)
    survivors: list[tuple[int, int]] = []
    for m in range(0, bound + 1):
        vals = m * fx + ns * fy
        vals = np.abs(vals - np.rint(vals))
        mx = np.maximum(abs(m), np.abs(ns_i)).astype(np.float64)
        if m == 0:
            mx[ns_i == 0] = np.nan
        q = vals * mx**d0f
        slack = mx**d0f * (abs(m) + np.abs(ns_i) + 2) * 2.0**-50
        keep = np.nonzero(q < c0f + slack + 1e-12)[0]
        for j in keep:
            survivors.append((m, int(ns_i[j])))
    best: tuple[Real, tuple[int, int]] | None = None
    prec = max(256, cfg.precision_bits // 8)
    for m, n in survivors:
        val = cfg.x0 * m + cfg.y0 * n
        frac = val - val.floor(max_prec=cfg.precision_bits)
        dist = rmin_frac(frac)
        quality = dist * (max(abs(m), abs(n)) ** cfg.d0.numerator if cfg.d0.denominator == 1
                          else _pow_frac(max(abs(m), abs(n)), cfg.d0))
        if best is None or quality.lt(best[0], max_prec=cfg.precision_bits):
            best = (quality, (m, n))
    if best is None:
        # nothing even came close: quality bounded below by c0 everywhere
        return DioReport(True, bound, (0, 0), "")
    quality, pair = best
    passed = quality.gt(Real.of(cfg.c0), max_prec=cfg.precision_bits)
    return DioReport(passed, bound, pair, quality.decimal(17))


def rmin_frac(frac: Real) -> Real:
    """min(frac, 1-frac) for frac in [0, 1): distance to the nearest integer."""
    one_minus = Real.of(1) - frac
    return frac if frac.le(one_minus) else one_minus


def _pow_frac(base: int, e: Fraction) -> Real:
    return (Real.of(base).log() * Fraction(e)).exp()


# ----------------------------------------------------------------------------
# convergent iteration (shared by the basis finder and by slitgeo.cfrac)


def convergent_pairs(theta: Direction, cfg: SlitConfig | None = None,
                     max_prec: int | None = None) -> Iterator[tuple[int, IntVec2]]:
    """Yield (quotient a_k, convergent v_k) for a direction with y-part > 0.

    Quotients are recovered from the exact cross-product recurrence
    c_k = v_k x theta,  a_{k+1} = floor(-c_{k-1} / c_k), so no rounding error
    accumulates along the expansion.  Terminates only for rational slopes
    (exact directions); callers bound the iteration.
    """
    limit = max_prec if max_prec is not None else (cfg.precision_bits if cfg else None)
    if theta.exact is not None:
        e = theta.exact
        if e.q < 0 or (e.q == 0 and e.p < 0):
            e = -e
        if e.q == 0:
            yield 0, IntVec2(1, 0)
            return
        # finite expansion of the rational slope p/q
        for a, v in _rational_convergents(e.p, e.q):
            yield a, v
        return
    hint = START_PREC
    ysign = theta.y.sign(limit, what="direction y-sign")
    tx, ty = (theta.x, theta.y) if ysign > 0 else (-theta.x, -theta.y)

    def cross(v: IntVec2) -> Real:
        # rebuilt flat from the integer convergent: no error accumulation and
        # no closure chains along the expansion
        return tx * v.q - ty * v.p

    a0 = (tx / ty).floor(limit, what="quotient a0")
    v_prev, v_cur = IntVec2(1, 0), IntVec2(a0, 1)
    yield a0, v_cur
    while True:
        ratio = -cross(v_prev) / cross(v_cur)
        a = ratio.floor(limit, hint=hint, what="quotient extraction")
        hint = max(hint, _resolved_prec(ratio, a))
        v_prev, v_cur = v_cur, v_cur.scale(a) + v_prev
        yield a, v_cur


def _resolved_prec(ratio: Real, a: int) -> int:
    # precision at which the floor actually resolved (largest cached level)
    return max(ratio._cache.keys(), default=START_PREC)


def _rational_convergents(p: int, q: int) -> Iterator[tuple[int, IntVec2]]:
    a0 = p // q
    v_prev, v_cur = IntVec2(1, 0), IntVec2(a0, 1)
    yield a0, v_cur
    r_prev, r_cur = q, p - a0 * q
    while r_cur:
        a = r_prev // r_cur
        r_prev, r_cur = r_cur, r_prev - a * r_cur
        v_prev, v_cur = v_cur, v_cur.scale(a) + v_prev
        yield a, v_cur


class ConvergentCache:
    """Lazily grown convergent list of a direction, for repeated basis queries.

    Profile sweeps ask for a reduced basis at hundreds of scales along one
    direction; recomputing the expansion from scratch each time would repeat
    the same quotient extractions.
    """

    def __init__(self, theta: Direction, cfg: SlitConfig | None = None):
        self.theta = theta
        self.cfg = cfg
        self._vs: list[IntVec2] = []
        self._gen = convergent_pairs(theta, cfg)
        self._done = False

    def _grow_past(self, s2_log2: float) -> None:
        while not self._done and (not self._vs or _len_sq_log2(self._vs[-1]) <= s2_log2):
            try:
                _, v = next(self._gen)
            except StopIteration:
                self._done = True
                return
            self._vs.append(v)

    def basis(self, scale_log2: float) -> tuple[IntVec2, IntVec2]:
        scale_log2 = max(scale_log2, 0.6)
        s2 = 2 * scale_log2
        self._grow_past(s2)
        vs = self._vs
        if self._done and (not vs or _len_sq_log2(vs[-1]) <= s2):
            u1 = vs[-1] if vs else IntVec2(1, 0)
            return u1, unimodular_complement(u1)
        # last index with len_sq below scale (lengths increase from k = 1 on)
        idx = None
        for k in range(len(vs) - 1, -1, -1):
            if _len_sq_log2(vs[k]) <= s2:
                idx = k
                break
        if idx is None:
            return IntVec2(1, 0), _reduce_pair(IntVec2(1, 0), vs[0])
        if idx == len(vs) - 1:
            self._grow_past(_len_sq_log2(vs[idx]))
        return vs[idx], _reduce_pair(vs[idx], vs[idx + 1])


def _len_sq_log2(v: IntVec2) -> float:
    n = v.len_sq
    return float(n.bit_length()) if n else float("-inf")


def _reduce_pair(u1: IntVec2, u2: IntVec2) -> IntVec2:
    """Gauss-reduce u2 against u1 (keeps unimodularity).

    Convergent pairs straddling a huge spectrum gap are badly unbalanced;
    subtracting the nearest multiple of u1 keeps the second basis vector at
    the scale of the first, which keeps coefficient boxes near the band
    area.
    """
    ls = u1.len_sq
    k = (2 * u2.dot(u1) + ls) // (2 * ls)
    return u2 - u1.scale(k)


def direction_basis(theta: Direction, scale_log2: float,
                    cfg: SlitConfig | None = None) -> tuple[IntVec2, IntVec2]:
    """Unimodular basis (u1, u2): u1 the longest convergent with
    log2|u1| <= scale_log2 (magnitudes are passed in log2 units so that
    scales far outside float range stay representable).

    For exact directions whose vector is shorter than the scale the basis is
    (that vector, a unimodular complement).
    """
    scale_log2 = max(scale_log2, 0.6)
    s2 = 2 * scale_log2
    if theta.exact is not None and _len_sq_log2(theta.exact) <= s2:
        e = theta.exact
        if e.q < 0 or (e.q == 0 and e.p < 0):
            e = -e
        return e, unimodular_complement(e)
    prev: IntVec2 | None = None
    for _, v in convergent_pairs(theta, cfg):
        if _len_sq_log2(v) > s2:
            # prev is the longest convergent within scale; v completes the basis.
            # If even v0 exceeds the scale, (1,0) pairs with v0 unimodularly.
            u1 = prev if prev is not None else IntVec2(1, 0)
            assert abs(cross_int(u1, v)) == 1
            return u1, _reduce_pair(u1, v)
        prev = v
    # rational slope exhausted below the scale
    return prev, unimodular_complement(prev)


# ----------------------------------------------------------------------------
# strip enumeration

GEN_PREC = 192

Selector = Literal["Z", "W", "V"]


def _coeff_box(theta: Direction, u1: IntVec2, u2: IntVec2,
               c_lo: Real, c_hi: Real, d_lo: Real, d_hi: Real
               ) -> tuple[int, int, int, int]:
    """Bounding (a, b) box for {v = a u1 + b u2: v x θ in [c_lo, c_hi],
    v·θ in [d_lo, d_hi]}.

    Uses the exact inverse of [[u1xθ, u2xθ], [u1·θ, u2·θ]] (determinant ±1),
    evaluated in interval arithmetic; rounding is outward so the box is a
    certified superset.
    """
    x1, x2 = theta.cross(u1), theta.cross(u2)
    d1, d2 = theta.dot(u1), theta.dot(u2)
    det = cross_int(u1, u2)  # = x1*d2 - d1*x2 times |theta|^2 = ±1

    def image(fc, fd):
        # [a; b] = det * [[d2, -x2], [-d1, x1]] [fc; fd]  (1/det = det for det = ±1)
        a = (d2 * fc - x2 * fd) * det
        b = (x1 * fd - d1 * fc) * det
        return a, b

    a_lo = a_hi = b_lo = b_hi = None
    for fc in (c_lo, c_hi):
        for fd in (d_lo, d_hi):
            a, b = image(fc, fd)
            al, ah = int_bounds(a, GEN_PREC)
            bl, bh = int_bounds(b, GEN_PREC)
            a_lo = al if a_lo is None else min(a_lo, al)
            a_hi = ah if a_hi is None else max(a_hi, ah)
            b_lo = bl if b_lo is None else min(b_lo, bl)
            b_hi = bh if b_hi is None else max(b_hi, bh)
    return a_lo, a_hi, b_lo, b_hi


def _band_candidates(theta: Direction, cross_band: tuple[Real, Real],
                     dot_band: tuple[Real, Real], cfg: SlitConfig,
                     offset: WVec | None = None, budget: int | None = None,
                     what: str = "strip enumeration",
                     cache: ConvergentCache | None = None) -> Iterator[IntVec2]:
    """Superset of integer n with (n+offset) x θ and (n+offset)·θ inside the
    given signed bands.  The enumerated box covers only the band rectangle,
    so narrow off-center windows stay cheap."""
    limit = budget if budget is not None else cfg.enum_budget
    c_lo, c_hi = cross_band
    d_lo, d_hi = dot_band
    width_l2 = (c_hi - c_lo).mag_log2()
    height_l2 = (d_hi - d_lo).mag_log2()
    scale_l2 = _balanced_scale_log2(width_l2, height_l2)
    u1, u2 = cache.basis(scale_l2) if cache is not None else \
        direction_basis(theta, scale_l2, cfg)
    if offset is not None:
        oc, od = theta.cross(offset), theta.dot(offset)
        c_lo, c_hi = c_lo - oc, c_hi - oc
        d_lo, d_hi = d_lo - od, d_hi - od
    a_lo, a_hi, b_lo, b_hi = _coeff_box(theta, u1, u2, c_lo, c_hi, d_lo, d_hi)
    count = (a_hi - a_lo + 1) * (b_hi - b_lo + 1)
    if count > limit:
        raise BudgetExceeded(what, float(count), limit)
    for b in range(b_lo, b_hi + 1):
        base = u2.scale(b)
        for a in range(a_lo, a_hi + 1):
            yield IntVec2(a * u1.p + base.p, a * u1.q + base.q)


def _strip_candidates(theta: Direction, cross_max: Real, dot_max: Real,
                      cfg: SlitConfig, offset: WVec | None = None,
                      budget: int | None = None, what: str = "strip enumeration",
                      cache: ConvergentCache | None = None) -> Iterator[IntVec2]:
    """Superset of integer n with |(n+offset) x θ| <= cross_max, |(n+offset)·θ| <= dot_max."""
    return _band_candidates(theta, (-cross_max, cross_max), (-dot_max, dot_max),
                            cfg, offset, budget, what, cache)


def _balanced_scale_log2(width_log2: float, height_log2: float) -> float:
    if not (width_log2 < height_log2):
        return 0.6
    return (height_log2 - width_log2) / 2


def _angle_cmp(a, b, cfg: SlitConfig) -> int:
    """Canonical order inside an open halfplane: ascending counterclockwise."""
    c = vcross(a, b)
    if isinstance(c, int):
        return -1 if c > 0 else (1 if c < 0 else 0)
    return -c.sign(cfg.precision_bits, what="angle sort")


def _sorted_by_angle(items: list, cfg: SlitConfig) -> list:
    import functools

    return sorted(items, key=functools.cmp_to_key(lambda a, b: _angle_cmp(a, b, cfg)))


def enumerate_in_strip(set_selector: Selector, theta: Direction, eps: Real,
                       b_lo: Real, b_hi: Real, cfg: SlitConfig, *,
                       include_b_lo: bool = False,
                       cross_lo: Real | None = None,
                       cross_hi_strict: bool = True,
                       budget: int | None = None) -> list:
    """Exactly the vectors v of the selected family with

        |v x θ| < eps   (<= when cross_hi_strict=False),
        b_lo < |v| <= b_hi   (b_lo <= |v| when include_b_lo),
        v · θ > 0,
        and optionally |v x θ| >= cross_lo.

    Z results are primitive; W results are WVec.  Output is sorted by angle
    (counterclockwise), then length; deterministic.
    """
    if not (b_lo.sign(cfg.precision_bits) > 0 and b_hi.gt(b_lo, max_prec=cfg.precision_bits)):
        raise ValueError("need 0 < b_lo < b_hi")
    if eps.sign(cfg.precision_bits) <= 0:
        raise ValueError("eps must be positive")
    out: list = []
    lo_sq, hi_sq = b_lo * b_lo, b_hi * b_hi
    mp = cfg.precision_bits

    def keep(v, vx_theta: Real | None = None) -> bool:
        c = theta.cross(v)
        sc = abs(c)
        cu = sc.cmp(eps, mp, what="strip cross upper")
        if cu > 0 or (cross_hi_strict and cu == 0):
            return False
        if cross_lo is not None and sc.cmp(cross_lo, mp, what="strip cross lower") < 0:
            return False
        ls = vlen_sq(v)
        ls_r = Real.of(ls) if isinstance(ls, int) else ls
        cl = ls_r.cmp(lo_sq, mp, what="strip length lower")
        if cl < 0 or (not include_b_lo and cl == 0):
            return False
        if ls_r.cmp(hi_sq, mp, what="strip length upper") > 0:
            return False
        if theta.dot(v).sign(mp, what="strip dot") <= 0:
            return False
        return True

    zero = Real.of(0)
    if cross_lo is None:
        bands = [(-eps, eps)]
    else:
        bands = [(cross_lo, eps), (-eps, -cross_lo)]
    dot_band = (zero, b_hi)
    if set_selector in ("Z", "V"):
        for band in bands:
            for n in _band_candidates(theta, band, dot_band, cfg, None, budget,
                                      what="Z strip"):
                if n.is_zero() or not n.is_primitive():
                    continue
                if keep(n):
                    out.append(n)
    if set_selector in ("W", "V"):
        for s in (1, -1):
            off = cfg.wvec(s, IntVec2(0, 0))
            for band in bands:
                for n in _band_candidates(theta, band, dot_band, cfg, off, budget,
                                          what="W strip"):
                    w = cfg.wvec(s, n)
                    if keep(w):
                        out.append(w)
    return _sorted_by_angle(out, cfg)


def strip_halfplane(set_selector: Selector, theta: Direction, cross_max: Real,
                    dot_max: Real, cfg: SlitConfig, *,
                    budget: int | None = None,
                    cache: "ConvergentCache | None" = None) -> list:
    """Family vectors with |v x θ| <= cross_max, |v·θ| <= dot_max, canonical halfplane.

    Closed bounds, one representative per ± pair ({v·θ > 0} plus the
    {v·θ = 0, v x θ > 0} edge).  Unsorted; internal helper for shortest-vector
    scans where the dot product may vanish exactly.
    """
    mp = cfg.precision_bits
    out: list = []

    def keep(v) -> bool:
        # candidate filter: keeping a borderline vector is always safe, so
        # window comparisons that stay indeterminate resolve to "keep"
        try:
            if abs(theta.cross(v)).cmp(cross_max, mp, what="halfplane cross") > 0:
                return False
            d = theta.dot(v)
            if d.cmp(dot_max, mp, what="halfplane dot hi") > 0:
                return False
        except PrecisionExhausted:
            d = theta.dot(v)
        ds = d.sign(mp, what="halfplane dot sign")
        if ds < 0:
            return False
        if ds == 0 and theta.cross(v).sign(mp, what="halfplane edge") <= 0:
            return False
        return True

    if set_selector in ("Z", "V"):
        for n in _strip_candidates(theta, cross_max, dot_max, cfg, None, budget,
                                   what="Z halfplane strip", cache=cache):
            if n.is_zero() or not n.is_primitive():
                continue
            if keep(n):
                out.append(n)
    if set_selector in ("W", "V"):
        for s in (1, -1):
            off = cfg.wvec(s, IntVec2(0, 0))
            for n in _strip_candidates(theta, cross_max, dot_max, cfg, off, budget,
                                       what="W halfplane strip", cache=cache):
                w = cfg.wvec(s, n)
                if keep(w):
                    out.append(w)
    return out


def ball_vectors(set_selector: Selector, radius_sq: Real, cfg: SlitConfig, *,
                 theta: Direction | None = None,
                 budget: int | None = None) -> list:
    """All family vectors with |v|^2 <= radius_sq, canonical halfplane only.

    The halfplane is {v·θ > 0} ∪ {v·θ = 0, v x θ > 0} for the given θ
    (default (0,1)); each ± pair contributes one representative.
    """
    if theta is None:
        theta = Direction.of_intvec(IntVec2(0, 1))
    r = radius_sq.sqrt()
    mp = cfg.precision_bits
    out: list = []

    def keep(v) -> bool:
        ls = vlen_sq(v)
        ls_r = Real.of(ls) if isinstance(ls, int) else ls
        if ls_r.cmp(radius_sq, mp, what="ball radius") > 0:
            return False
        d = theta.dot(v).sign(mp, what="ball halfplane")
        if d < 0:
            return False
        if d == 0 and theta.cross(v).sign(mp, what="ball halfplane edge") <= 0:
            return False
        return True

    if set_selector in ("Z", "V"):
        for n in _strip_candidates(theta, r, r, cfg, None, budget, what="Z ball"):
            if n.is_zero() or not n.is_primitive():
                continue
            if keep(n):
                out.append(n)
    if set_selector in ("W", "V"):
        for s in (1, -1):
            off = cfg.wvec(s, IntVec2(0, 0))
            for n in _strip_candidates(theta, r, r, cfg, off, budget, what="W ball"):
                w = cfg.wvec(s, n)
                if keep(w):
                    out.append(w)
    return _sorted_by_angle(out, cfg)
