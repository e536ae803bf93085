"""Directions diverging slower than a prescribed rate.

Each state is a pair (w, v) with w in the translated lattice and v a
primitive integer vector with small |w x v|.  There is a unique u with

    |w x u| < |w x v| / 2,   |u x v| = 1,   w·u > 0,

and three continuations v^0 = u - σv, v^1 = u + σv, v^2 = 2u + σv (σ chosen
so the cross products satisfy (1+δ), (1-δ), (1-2δ) times |w x v| for
δ = |w x u|/|w x v| in (0, 1/2)).  The per-step rule drives the valley value
m = (1/2) log(1/|w x w'|) toward the target rate r(t):

  (A) if m_j > r(t_j) + log2: take i = 0 (m decreases by at most log2);
  (B) else take i in {0, 1} with |m_{j+1} - r(t_{j+1})| <= log2 if possible
      (ties toward 0);
  (C) else take the i in {1, 2} with the larger next-step δ (ties toward 1).

All step bookkeeping uses the half-log convention
t = (1/2) log(|w|^2/|w x w'|), m = (1/2) log(1/|w x w'|); the doubled values
are the peak/valley coordinates of the piecewise-linear model and are what
`to_profile_chain` feeds downstream (both conventions are recorded in
certificates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import ConstructionStalled, HypothesisViolated
from .lattice import IntVec2, SlitConfig, WVec, cross_int, unimodular_complement, _ext_gcd
from .reals import LOG2, Real

HALF_INV_2SQRT2 = Fraction(1, 1)  # placeholder for clarity; bound handled via Real


def _bound_1_over_2sqrt2() -> Real:
    return 1 / (Real.sqrt_int(2) * 2)


@dataclass(frozen=True)
class RateFn:
    """Target rate r(t): increasing to infinity with r(t) r'(t) -> 0.

    Presets carry symbolic derivatives so the hypothesis is checkable on the
    queried range; table rates interpolate a user-supplied monotone table.
    """

    name: str
    fn: Callable[[float], float]
    deriv: Callable[[float], float]
    real_fn: Callable[[Real], Real]

    @staticmethod
    def preset(name: str) -> "RateFn":
        if name == "log":
            return RateFn(
                "log",
                lambda t: math.log(1 + t),
                lambda t: 1 / (1 + t),
                lambda t: (Real.of(1) + t).log(),
            )
        if name == "sqrtlog":
            return RateFn(
                "sqrtlog",
                lambda t: math.sqrt(math.log(1 + t)),
                lambda t: 1 / (2 * math.sqrt(math.log(1 + t)) * (1 + t)) if t > 0 else 1.0,
                lambda t: (Real.of(1) + t).log().sqrt(),
            )
        if name == "loglog10":
            return RateFn(
                "loglog10",
                lambda t: math.log(math.log(10 + t)),
                lambda t: 1 / ((10 + t) * math.log(10 + t)),
                lambda t: (Real.of(10) + t).log().log(),
            )
        raise ValueError(f"unknown rate preset {name!r}")

    @staticmethod
    def from_table(points: list[tuple[float, float]]) -> "RateFn":
        pts = sorted(points)
        if len(pts) < 2 or any(b[1] <= a[1] for a, b in zip(pts, pts[1:])):
            raise ValueError("rate table must be increasing")

        def fn(t: float) -> float:
            if t <= pts[0][0]:
                return pts[0][1]
            for (t0, r0), (t1, r1) in zip(pts, pts[1:]):
                if t <= t1:
                    return r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            (t0, r0), (t1, r1) = pts[-2], pts[-1]
            return r1 + (r1 - r0) * (t - t1) / (t1 - t0)

        def deriv(t: float) -> float:
            h = max(1e-6, abs(t) * 1e-6)
            return (fn(t + h) - fn(t - h)) / (2 * h)

        return RateFn("table", fn, deriv, lambda t: Real.of(Fraction(fn(t.mid_float()))))

    def scaled(self, factor: Fraction, name: str | None = None) -> "RateFn":
        f = float(factor)
        return RateFn(
            name or f"{self.name}*{factor}",
            lambda t: self.fn(t) * f,
            lambda t: self.deriv(t) * f,
            lambda t: self.real_fn(t) * factor,
        )

    def check_hypothesis(self, t_lo: float, t_hi: float, samples: int = 64) -> bool:
        """Spot-check monotonicity and r r' -> small over [t_lo, t_hi]."""
        last = None
        prods = []
        for i in range(samples + 1):
            t = t_lo + (t_hi - t_lo) * i / samples
            v = self.fn(t)
            if last is not None and v < last - 1e-12:
                return False
            last = v
            prods.append(abs(v * self.deriv(t)))
        head = sum(prods[: 8]) / 8
        tail = sum(prods[-8:]) / 8
        return tail <= head + 1e-9


def u_of(w: WVec, v: IntVec2, cfg: SlitConfig) -> IntVec2:
    """The unique u with |w x u| < |w x v|/2, |u x v| = 1, w·u > 0.

    Solutions of u x v = ±1 form two lines u0 + k v; the cross window has
    width exactly one in k, so it pins one integer on each line and the two
    are negatives of each other; the dot condition picks the sign.
    """
    if not v.is_primitive():
        raise ValueError("v must be primitive")
    mp = cfg.precision_bits
    wxv = w.cross_vec(v)
    if not abs(wxv).lt(_bound_1_over_2sqrt2(), max_prec=mp, what="u_of window"):
        raise HypothesisViolated("need |w x v| < 1/(2 sqrt 2)", ["u_of"])
    u0 = -unimodular_complement(v)        # u0 x v = +1
    # |w x (u0 + k v)| < |w x v|/2: open unit window around -wxu0/wxv
    center = -(w.cross_vec(u0)) / wxv
    k = (center + Fraction(1, 2)).floor(mp, what="u_of window pick")
    u = u0 + v.scale(k)
    if w.dot_vec(u).sign(mp, what="u_of dot") < 0:
        u = -u
    assert abs(cross_int(u, v)) == 1
    if not abs(w.cross_vec(u)).lt(abs(wxv) / 2, max_prec=mp, what="u_of check"):
        raise HypothesisViolated("cross window empty at this precision", ["u_of"])
    return u


def candidates3(w: WVec, v: IntVec2, u: IntVec2, cfg: SlitConfig
                ) -> tuple[IntVec2, IntVec2, IntVec2, int]:
    """Continuations (v0, v1, v2) and the orientation sign σ.

    σ = +1 when w lies angularly between u and v; the cross products then
    order as |w x v2| <= |w x v1| <= |w x v| <= |w x v0| <= 2 |w x v|.
    """
    mp = cfg.precision_bits
    su = w.cross_vec(u).sign(mp, what="sigma u side")
    sv = w.cross_vec(v).sign(mp, what="sigma v side")
    sigma = 1 if su != sv else -1
    v1 = u + v.scale(sigma)
    v2 = u.scale(2) + v.scale(sigma)
    v0 = u - v.scale(sigma)
    for c in (v0, v1, v2):
        assert c.is_primitive()
    return v0, v1, v2, sigma


@dataclass(frozen=True)
class SlowStep:
    j: int
    w: WVec
    v: IntVec2
    u: IntVec2 | None
    sigma: int
    delta: Real | None      # |w x u| / |w x v|, in (0, 1/2)
    rule: str               # "init", "A", "B0", "B1", "C1", "C2"
    t: Real                 # half-log valley time
    m: Real                 # half-log valley value


@dataclass(frozen=True)
class SlowSeq:
    steps: tuple[SlowStep, ...]
    rate: RateFn
    burn_in: int

    def vectors(self) -> list[WVec]:
        return [s.w for s in self.steps]

    def to_profile_chain(self) -> list[WVec]:
        """The W-chain in the doubled (peak/valley model) convention."""
        return self.vectors()


def _half_log_tm(w_prev: WVec, w_next: WVec) -> tuple[Real, Real]:
    x = abs(w_prev.cross_w(w_next))
    m = -(x.log()) / 2
    t = w_next.len_sq.log() / 2 - x.log() / 2
    return t, m


def step(state: tuple[WVec, IntVec2], rate: RateFn, cfg: SlitConfig, *,
         m_cur: Real, t_cur: Real, g: int | None = None
         ) -> tuple[WVec, IntVec2, str]:
    """One selection step; returns (w_{j+1}, v_{j+1}, rule tag).

    Candidates whose continuation would leave the construction undefined
    (|w' x v'| >= 1/(2 sqrt2), so no next u exists) are skipped; this also
    preserves the cross-product smallness the piecewise-linear model needs.
    """
    w, v = state
    g = g if g is not None else cfg.genus
    mp = cfg.precision_bits
    u = u_of(w, v, cfg)
    v0, v1, v2, _sigma = candidates3(w, v, u, cfg)
    bound = _bound_1_over_2sqrt2()

    def admissible(vi: IntVec2) -> bool:
        return abs(w.cross_vec(vi)).lt(bound, max_prec=mp, what="step window")

    def tm(vi: IntVec2) -> tuple[Real, Real, WVec]:
        wn = w.translate(vi, g)
        t_n, m_n = _half_log_tm(w, wn)
        return t_n, m_n, wn

    r_cur = rate.real_fn(t_cur)
    if (m_cur - r_cur).gt(LOG2, max_prec=mp, what="rule A trigger") and admissible(v0):
        wn = w.translate(v0, g)
        return wn, v0, "A"
    for tag, vi in (("B0", v0), ("B1", v1)):
        if not admissible(vi):
            continue
        t_n, m_n, wn = tm(vi)
        if abs(m_n - rate.real_fn(t_n)).le(LOG2, max_prec=mp, what="rule B window"):
            return wn, vi, tag
    picks = [vi for vi in (v1, v2) if admissible(vi)]
    if not picks:
        raise ConstructionStalled("no admissible continuation in rule C")
    if len(picks) == 2:
        d1 = _next_delta(w, v1, cfg)
        d2 = _next_delta(w, v2, cfg)
        vi = v2 if d2.gt(d1, max_prec=mp, what="rule C compare") else v1
    else:
        vi = picks[0]
    tag = "C1" if vi == v1 else "C2"
    return w.translate(vi, g), vi, tag


def _next_delta(w: WVec, vi: IntVec2, cfg: SlitConfig) -> Real:
    wn = w.translate(vi, cfg.genus)
    un = u_of(wn, vi, cfg)
    return abs(wn.cross_vec(un)) / abs(wn.cross_vec(vi))


def initial_pair(w0: WVec, rate: RateFn, cfg: SlitConfig,
                 eps_init: Fraction) -> IntVec2:
    """First continuation v1: a convergent of w0 with |w0 x v1| <= eps_init
    / (2 sqrt2) and valley value well above the target rate."""
    from .cfrac import spec_of

    mp = cfg.precision_bits
    bound = _bound_1_over_2sqrt2() * eps_init
    margin = -Real.of(eps_init).log() / 2
    for limit in (10 ** 6, 10 ** 12, 10 ** 24):
        seq = spec_of(w0, limit, cfg)
        for v in seq.convergents:
            if not abs(w0.cross_vec(v)).lt(bound, max_prec=mp, what="init window"):
                continue
            wn = w0.translate(v, cfg.genus)
            t1, m1 = _half_log_tm(w0, wn)
            if (m1 - rate.real_fn(t1) - LOG2 - margin).sign(mp, what="init margin") > 0:
                return v
    raise ConstructionStalled("no initial continuation below the scan bound")


def build_slow(w0: WVec, rate: RateFn, steps: int, cfg: SlitConfig, *,
               eps_init: Fraction = Fraction(1, 100),
               rate_window: tuple[float, float] | None = None) -> SlowSeq:
    """Run the selection rule for `steps` steps from w0.

    The rate hypothesis is spot-checked on the queried window.  Burn-in is
    the first index with m_j <= r(t_j) + log2; from there on the clause
    verifier (see `verify_clauses`) applies.
    """
    if steps < 2:
        raise ValueError("need at least 2 steps")
    v1 = initial_pair(w0, rate, cfg, eps_init)
    w1 = w0.translate(v1, cfg.genus)
    t1, m1 = _half_log_tm(w0, w1)
    out = [SlowStep(0, w0, v1, None, 0, None, "init", Real.of(0), Real.of(0)),
           SlowStep(1, w1, v1, None, 0, None, "init", t1, m1)]
    w_cur, v_cur, t_cur, m_cur = w1, v1, t1, m1
    mp = cfg.precision_bits
    for j in range(2, steps + 1):
        u = u_of(w_cur, v_cur, cfg)
        delta = abs(w_cur.cross_vec(u)) / abs(w_cur.cross_vec(v_cur))
        w_next, v_next, tag = step((w_cur, v_cur), rate, cfg,
                                   m_cur=m_cur, t_cur=t_cur)
        t_next, m_next = _half_log_tm(w_cur, w_next)
        out.append(SlowStep(j, w_next, v_next, u, 0, delta, tag, t_next, m_next))
        w_cur, v_cur, t_cur, m_cur = w_next, v_next, t_next, m_next
    # burn-in: first index with m_j <= r(t_j) + log2 (stays below from there on)
    burn_in = steps
    for s in out[1:]:
        if s.m.le(rate.real_fn(s.t) + LOG2, max_prec=mp, what="burn-in scan"):
            burn_in = s.j
            break
    if rate_window is None:
        rate_window = (max(out[1].t.mid_float(), 0.0) or 1.0,
                       max(out[-1].t.mid_float(), 1.0))
    if not rate.check_hypothesis(*rate_window):
        raise HypothesisViolated("rate fails the slow-increase hypothesis",
                                 ["rate"])
    return SlowSeq(tuple(out), rate, burn_in)


@dataclass(frozen=True)
class ClauseReport:
    ok: bool
    failures: list
    checked: dict

    def __bool__(self) -> bool:
        return self.ok


def verify_clauses(run: SlowSeq, cfg: SlitConfig, *, c0: Fraction,
                   band: tuple[Fraction, Fraction]) -> ClauseReport:
    """Post-hoc verification of the four conclusions past burn-in.

    (a) m_j <= r(t_j) + log2;
    (b) |m_{j+1} - r(t_{j+1})| <= log2 or m_{j+1} >= m_j;
    (c) m_{j+1} < r(t_{j+1}) - log2 implies m_{j+1} > m_j + c0 e^{-m_j};
    (d) |w_{j+1}| / (|w_j| e^{m^full_j}) inside the calibrated band, with
        m^full = 2m the doubled-convention valley value (growth is governed
        by the full-log scale).
    """
    mp = cfg.precision_bits
    failures = []
    checked = {"a": 0, "b": 0, "c": 0, "d": 0}
    steps = run.steps
    rate = run.rate
    lo, hi = Real.of(band[0]), Real.of(band[1])
    for i in range(run.burn_in, len(steps)):
        s = steps[i]
        checked["a"] += 1
        if not s.m.le(rate.real_fn(s.t) + LOG2, max_prec=mp, what="clause a"):
            failures.append(("a", s.j))
        if i + 1 < len(steps):
            nxt = steps[i + 1]
            checked["b"] += 1
            in_band = abs(nxt.m - rate.real_fn(nxt.t)).le(LOG2, max_prec=mp,
                                                          what="clause b band")
            if not in_band and not nxt.m.ge(s.m, max_prec=mp, what="clause b mono"):
                failures.append(("b", nxt.j))
            below = (nxt.m - rate.real_fn(nxt.t) + LOG2).sign(mp, what="clause c trigger")
            if below < 0:
                checked["c"] += 1
                floor = s.m + (-s.m).exp() * c0
                if not nxt.m.gt(floor, max_prec=mp, what="clause c floor"):
                    failures.append(("c", nxt.j))
            checked["d"] += 1
            growth = nxt.w.length / (s.w.length * (s.m * 2).exp())
            if not (growth.ge(lo, max_prec=mp, what="clause d lo")
                    and growth.le(hi, max_prec=mp, what="clause d hi")):
                failures.append(("d", nxt.j))
    return ClauseReport(not failures, failures, checked)


def slow_for_target(w0: WVec, target: RateFn, steps: int, cfg: SlitConfig, *,
                    eps_margin: Fraction = Fraction(2),
                    eps_init: Fraction = Fraction(1, 100)) -> tuple[SlowSeq, RateFn]:
    """Divergence slower than a prescribed target R(t).

    Chooses r with R <= (2+ε) r in the doubled convention, i.e.
    r(t) = R(2t) / (2 (2+ε)) on the half-log scale, runs the construction,
    and returns the run plus the chosen r.  The peak values of the doubled
    chain then satisfy M_j <= R(T_j) on the computed range past burn-in.
    """
    factor = 1 / (Fraction(2) * (2 + eps_margin))
    r = RateFn(
        f"{target.name}-wrapped",
        lambda t: target.fn(2 * t) * float(factor),
        lambda t: 2 * target.deriv(2 * t) * float(factor),
        lambda t: target.real_fn(t * 2) * factor,
    )
    run = build_slow(w0, r, steps, cfg, eps_init=eps_init)
    return run, r


def peak_values(run: SlowSeq, *, halved: bool = True) -> list[tuple[Real, Real]]:
    """(T_j, M_j) of the peak model for the run's chain.

    halved=True (default) divides by two, matching the run's own t/m
    convention; halved=False gives the raw peak/valley model coordinates.
    """
    out = []
    steps = run.steps
    for i in range(len(steps) - 1):
        w, wn = steps[i].w, steps[i + 1].w
        x = abs(w.cross_w(wn))
        T = w.length.log() + wn.length.log() - x.log()
        M = wn.length.log() - w.length.log() - x.log()
        if halved:
            T, M = T / 2, M / 2
        out.append((T, M))
    return out
