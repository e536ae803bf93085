"""Shortest-vector profiles along the g_t flow and their closed-form model.

The flow g_t^θ contracts the θ-component by e^{t/2} and expands the
perpendicular one, so

    |g_t^θ v|^2 = (v·θ)^2 e^{-t} + (v x θ)^2 e^{t}.

The divergence proxy is f(t) = -log ℓ(g_t^θ V)^2 with ℓ the shortest flowed
vector of the saddle-connection set V.  For sequences of W-vectors produced
by the builders, f stays within bounded distance of a piecewise linear model
whose critical points have closed forms in the pairwise lengths and cross
products; this module computes both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, HypothesisViolated, PrecisionExhausted
from .lattice import (
    ConvergentCache,
    Direction,
    IntVec2,
    SlitConfig,
    Selector,
    WVec,
    ball_vectors,
    reduce_primitive,
    strip_halfplane,
    vlen_sq,
)
from .reals import LOG2, Real, SQRT2

TimeLike = "Real | Fraction | int"


def _as_real(t) -> Real:
    if isinstance(t, Real):
        return t
    return Real.of(t if isinstance(t, (int, Fraction)) else Fraction(t))


def _len_sq_real(v) -> Real:
    ls = vlen_sq(v)
    return Real.of(ls) if isinstance(ls, int) else ls


def gt_length_sq(v, theta: Direction, t) -> Real:
    """|g_t^θ v|^2 with certified error."""
    tr = _as_real(t)
    d = theta.dot(v)
    c = theta.cross(v)
    return d * d * (-tr).exp() + c * c * tr.exp()


def peak_of(v, theta: Direction, max_prec: int | None = None) -> tuple[Real, Real]:
    """Maximizer and maximum of t -> -log |g_t^θ v|^2.

    T = log|v·θ| - log|v x θ|,  M = -log|v·θ| - log|v x θ| - log 2.
    Requires both products nonzero.
    """
    d = abs(theta.dot(v))
    c = abs(theta.cross(v))
    if d.sign(max_prec, what="peak dot") == 0 or c.sign(max_prec, what="peak cross") == 0:
        raise HypothesisViolated("no interior peak", ["degenerate product"])
    ld, lc = d.log(), c.log()
    return ld - lc, -ld - lc - LOG2


def crossing_of(v, vp, theta: Direction, cfg: SlitConfig | None = None
                ) -> tuple[Real, Real]:
    """Unique t > 0 with |g_t v| = |g_t v'| and the value m = -log |g_t v|^2.

    Hypotheses (checked): |v| < |v'|, |v' x θ| <= |v x θ|/sqrt2 and
    |v'·θ| >= sqrt2 |v·θ|.
    """
    mp = cfg.precision_bits if cfg else None
    dv, dvp = abs(theta.dot(v)), abs(theta.dot(vp))
    cv, cvp = abs(theta.cross(v)), abs(theta.cross(vp))
    bad = []
    if not _len_sq_real(v).lt(_len_sq_real(vp), max_prec=mp, what="valley lengths"):
        bad.append("|v| < |v'|")
    if not cvp.le(cv / SQRT2, max_prec=mp, what="valley cross"):
        bad.append("|v' x θ| <= |v x θ|/sqrt2")
    if not dvp.ge(dv * SQRT2, max_prec=mp, what="valley dot"):
        bad.append("|v'·θ| >= sqrt2 |v·θ|")
    if bad:
        raise HypothesisViolated("valley hypotheses violated", bad)
    e2t = (dvp * dvp - dv * dv) / (cv * cv - cvp * cvp)
    t = e2t.log() / 2
    m = -(dv * dv * (-t).exp() + cv * cv * t.exp()).log()
    return t, m


def svc_holds(v, theta: Direction, cfg: SlitConfig, *,
              set_selector: Selector = "V", budget: int | None = None) -> bool:
    """Shortest-vector criterion: 2|v||v x θ| <= min |v x u| over competitors.

    Competitors are the family vectors u with |u| <= sqrt2 |v|, u != ±v; when
    the criterion holds, v realizes the family's shortest flowed vector for
    an interval of times around its peak.
    """
    lhs = v.length() if isinstance(v, IntVec2) else v.length
    lhs = lhs * abs(theta.cross(v)) * 2
    radius_sq = _len_sq_real(v) * 2
    best: Real | None = None
    mp = cfg.precision_bits
    for u in ball_vectors(set_selector, radius_sq, cfg, budget=budget):
        if _same_pm(u, v):
            continue
        c = abs(_cross_generic(v, u))
        if best is None:
            best = c
            continue
        try:
            if c.lt(best, max_prec=mp, what="svc competitor min"):
                best = c
        except PrecisionExhausted:
            # indistinguishable from the current minimum: the min value is
            # unchanged either way
            continue
    if best is None:
        return True
    return lhs.le(best, max_prec=mp, what="svc criterion")


def _same_pm(a, b) -> bool:
    if isinstance(a, IntVec2) and isinstance(b, IntVec2):
        return (a.p, a.q) in ((b.p, b.q), (-b.p, -b.q))
    if isinstance(a, WVec) and isinstance(b, WVec):
        return a.key() == b.key() or a.key() == (-b).key()
    return False


def _cross_generic(a, b) -> Real:
    from .lattice import vcross

    c = vcross(a, b)
    return Real.of(c) if isinstance(c, int) else c


@dataclass(frozen=True)
class ShortestResult:
    length_sq: Real
    witnesses: tuple
    tie: bool

    def witness(self):
        return self.witnesses[0]

    def length(self) -> Real:
        return self.length_sq.sqrt()


class _FlowScan:
    """Shared state for shortest-vector scans along one direction."""

    def __init__(self, theta: Direction, cfg: SlitConfig,
                 set_selector: Selector = "V", budget: int | None = None):
        self.theta = theta
        self.cfg = cfg
        self.selector = set_selector
        self.budget = budget
        self.cache = ConvergentCache(theta, cfg)
        self.warm: list = []

    def upper_bound_sq(self, t: Real, emt: Real, ept: Real) -> Real:
        tf = t.mid_float()
        scale_log2 = max(tf, 0.0) / 2 / 0.6931471805599453
        u1, u2 = self.cache.basis(scale_log2)
        probes: list = [u1, u2]
        probes += [IntVec2(0, 1), IntVec2(1, 0)] if tf < 2 else []
        probes += self.warm
        best: Real | None = None
        for u in probes:
            d = self.theta.dot(u)
            c = self.theta.cross(u)
            val = d * d * emt + c * c * ept
            if best is None:
                best = val
                continue
            try:
                if val.lt(best, max_prec=self.cfg.precision_bits,
                          what="witness probe"):
                    best = val
            except PrecisionExhausted:
                continue  # equal to the current bound: same upper bound
        return best

    def shortest(self, t) -> ShortestResult:
        tr = _as_real(t)
        emt, ept = (-tr).exp(), tr.exp()
        ub_sq = self.upper_bound_sq(tr, emt, ept)
        # dyadic inflation keeps witness-derived bounds off exact candidate ties
        ub = ub_sq.sqrt() * Fraction(65537, 65536)
        cross_max = ub * (-tr / 2).exp()
        dot_max = ub * (tr / 2).exp()
        cands = strip_halfplane(self.selector, self.theta, cross_max, dot_max,
                                self.cfg, budget=self.budget, cache=self.cache)
        best_sq: Real | None = None
        winners: list = []
        tie = False
        mp = self.cfg.precision_bits
        for u in cands:
            d = self.theta.dot(u)
            c = self.theta.cross(u)
            val = d * d * emt + c * c * ept
            if best_sq is None:
                best_sq, winners = val, [u]
                continue
            try:
                cmp = val.cmp(best_sq, mp, what="shortest comparison")
            except PrecisionExhausted:
                winners.append(u)
                tie = True
                continue
            if cmp < 0:
                best_sq, winners, tie = val, [u], False
            elif cmp == 0:
                winners.append(u)
                tie = True
        if best_sq is None:
            raise BudgetExceeded("shortest_at found no candidates", 0.0,
                                 self.budget or self.cfg.enum_budget)
        self.warm = winners[:2]
        return ShortestResult(best_sq, tuple(winners), tie)


def shortest_at(theta: Direction, t, cfg: SlitConfig, *,
                set_selector: Selector = "V", budget: int | None = None
                ) -> ShortestResult:
    """A vector of the family minimizing |g_t^θ ·| and the minimum length.

    Candidates come from the strip |v x θ| <= ℓ_ub e^{-t/2}, |v·θ| <= ℓ_ub
    e^{t/2}, where ℓ_ub is the flowed length of a known witness.  Exact ties
    between non-parallel vectors are reported with all witnesses.
    """
    return _FlowScan(theta, cfg, set_selector, budget).shortest(t)


@dataclass(frozen=True)
class BruteSample:
    t: Fraction
    f: Real
    witnesses: tuple
    tie: bool

    @property
    def f_float(self) -> float:
        return self.f.mid_float()

    def witness_kind(self) -> str:
        return "Z" if isinstance(self.witnesses[0], IntVec2) else "W"


@dataclass(frozen=True)
class BruteProfile:
    theta: Direction
    samples: tuple[BruteSample, ...]

    def times(self) -> list[float]:
        return [float(s.t) for s in self.samples]

    def values(self) -> list[float]:
        return [s.f_float for s in self.samples]

    def check_lipschitz(self, slack: float = 1e-9) -> None:
        ts, fs = self.times(), self.values()
        for i in range(len(ts) - 1):
            dt = ts[i + 1] - ts[i]
            if abs(fs[i + 1] - fs[i]) > dt + slack:
                raise AssertionError(f"not 1-Lipschitz at t={ts[i]:.4f}")


def brute_profile(theta: Direction, t_lo, t_hi, step, cfg: SlitConfig, *,
                  set_selector: Selector = "V", budget: int | None = None
                  ) -> BruteProfile:
    """Grid samples of f(t) = -log ℓ(g_t^θ V)^2 with per-sample witnesses."""
    lo, hi, st = Fraction(t_lo), Fraction(t_hi), Fraction(step)
    if hi < lo:
        raise ValueError("need t_lo <= t_hi")
    if st <= 0:
        raise ValueError("step must be positive")
    scan = _FlowScan(theta, cfg, set_selector, budget)
    samples = []
    t = lo
    while t <= hi:
        res = scan.shortest(t)
        samples.append(BruteSample(t, -res.length_sq.log(), res.witnesses, res.tie))
        t += st
    return BruteProfile(theta, tuple(samples))


# ----------------------------------------------------------------------------
# piecewise-linear model


@dataclass(frozen=True)
class PLProfile:
    """Critical points of the piecewise linear model for a W-vector chain.

    peaks[j] = (T_j, M_j) and valleys[j] = (t_{j+1}, m_{j+1}) belong to the
    consecutive pair (w_j, w_{j+1}); slopes are ±1 between critical points.
    Interleaving t_j < T_j holds from index j1 on.
    """

    peaks: tuple[tuple[Real, Real], ...]
    valleys: tuple[tuple[Real, Real], ...]
    j1: int

    def n_pairs(self) -> int:
        return len(self.peaks)

    def peak_floats(self) -> list[tuple[float, float]]:
        return [(T.mid_float(), M.mid_float()) for T, M in self.peaks]

    def valley_floats(self) -> list[tuple[float, float]]:
        return [(t.mid_float(), m.mid_float()) for t, m in self.valleys]

    def model(self) -> "PiecewiseLinear":
        pts = []
        for j in range(self.j1, self.n_pairs()):
            if j > self.j1:
                t, m = self.valleys[j - 1]
                pts.append((t.mid_float(), m.mid_float()))
            T, M = self.peaks[j]
            pts.append((T.mid_float(), M.mid_float()))
        return PiecewiseLinear(tuple(pts))


@dataclass(frozen=True)
class PiecewiseLinear:
    points: tuple[tuple[float, float], ...]

    def __call__(self, t: float) -> float:
        pts = self.points
        if t <= pts[0][0]:
            return pts[0][1] - (pts[0][0] - t)
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t <= t1:
                lam = (t - t0) / (t1 - t0)
                return v0 + lam * (v1 - v0)
        t_last, v_last = pts[-1]
        return v_last - (t - t_last)


@dataclass(frozen=True)
class PairChecks:
    """Margins of the chain hypotheses for one consecutive pair."""

    j: int
    v_step: IntVec2
    divisible: bool
    primitive: bool
    v_longer: bool
    dot_positive: bool
    cross_small: bool | None
    ratio_small: bool | None

    def clauses_failing(self) -> list[str]:
        out = []
        if not (self.divisible and self.primitive and self.v_longer and self.dot_positive):
            out.append("(i)")
        if self.cross_small is False:
            out.append("(ii)")
        if self.ratio_small is False:
            out.append("(iii)")
        return out


def check_pl_hypotheses(seq: list[WVec], cfg: SlitConfig) -> list[PairChecks]:
    """Per-pair hypothesis report for the piecewise-linear model.

    (i) each w_{j+1} = w_j + g v' with v' primitive, |v'| > |w_j|, w_j·v' > 0;
    (ii) |w_j x w_{j+1}| < g / (2 sqrt2) past the first index;
    (iii) |w_j| |w_j x w_{j+1}| / (|w_{j+1}| |w_j x w_{j-1}|) < 1/(5g+5)
          past the first index.
    """
    g = cfg.genus
    mp = cfg.precision_bits
    out: list[PairChecks] = []
    crosses: list[Real] = []
    for j in range(len(seq) - 1):
        w, wn = seq[j], seq[j + 1]
        dn = wn.n - w.n
        divisible = wn.s == w.s and dn.p % g == 0 and dn.q % g == 0
        vstep = IntVec2(dn.p // g, dn.q // g) if divisible else IntVec2(0, 0)
        primitive = divisible and not vstep.is_zero() and vstep.is_primitive()
        v_longer = divisible and Real.of(vstep.len_sq).gt(w.len_sq, max_prec=mp,
                                                          what="(i) |v'|>|w|")
        dot_positive = divisible and w.dot_vec(vstep).sign(mp, what="(i) dot") > 0
        cross = abs(w.cross_w(wn))
        crosses.append(cross)
        cross_small = None
        if j >= 1:
            cross_small = cross.lt(Fraction(g) / 2 / SQRT2, max_prec=mp,
                                   what="(ii) cross bound")
        ratio_small = None
        if j >= 1:
            ratio = (w.length * cross) / (wn.length * crosses[j - 1])
            ratio_small = ratio.lt(Fraction(1, 5 * g + 5), max_prec=mp,
                                   what="(iii) ratio bound")
        out.append(PairChecks(j, vstep, divisible, primitive, v_longer,
                              dot_positive, cross_small, ratio_small))
    return out


def pl_profile(seq: list[WVec], theta: Direction, cfg: SlitConfig) -> PLProfile:
    """Closed-form critical points for a chain of W-vectors.

    T_j = log(|w_j||w_{j+1}| / x_j),  M_j = log((|w_{j+1}|/|w_j|) / x_j),
    t_{j+1} = log(|w_{j+1}|^2 / x_j),  m_{j+1} = log(1 / x_j),
    with x_j = |w_j x w_{j+1}|.  Hypotheses (i)-(iii) are checked first;
    interleaving is enforced from the first index j1 with t_j < T_j.
    """
    if len(seq) < 2:
        raise ValueError("need at least two vectors")
    checks = check_pl_hypotheses(seq, cfg)
    failing = sorted({c for ch in checks for c in ch.clauses_failing()})
    if failing:
        raise HypothesisViolated(f"chain hypotheses violated: {failing}", failing)
    mp = cfg.precision_bits
    peaks = []
    valleys = []
    for j in range(len(seq) - 1):
        w, wn = seq[j], seq[j + 1]
        x = abs(w.cross_w(wn))
        lw, lwn, lx = w.length.log(), wn.length.log(), x.log()
        peaks.append((lw + lwn - lx, lwn - lw - lx))
        valleys.append((lwn * 2 - lx, -lx))
    j1 = None
    for j in range(1, len(peaks)):
        t_j = valleys[j - 1][0]
        if t_j.lt(peaks[j][0], max_prec=mp, what="interleaving t<T"):
            j1 = j
            break
    if j1 is None:
        raise HypothesisViolated("no index with valley before peak", ["interleaving"])
    for j in range(j1, len(peaks)):
        assert valleys[j - 1][0].lt(peaks[j][0], max_prec=mp), "t_j < T_j fails"
        assert peaks[j][0].lt(valleys[j][0], max_prec=mp), "T_j < t_{j+1} fails"
    return PLProfile(tuple(peaks), tuple(valleys), j1)


def rate_estimate(profile: PLProfile) -> tuple[list[Real], list[Real]]:
    """Diagnostics (M_j/T_j) and (log M_j / log T_j) for stored peaks.

    The first sequence tending to 0 witnesses slow divergence; the second,
    eventually below 1 - 1/e0-style thresholds, witnesses a sublinear rate.
    Entries are emitted for every stored j with T_j > 1 and M_j > 1 (the
    logs need positive arguments).
    """
    if profile.n_pairs() < 3:
        raise ValueError("need at least 3 peaks")
    ratio_tail: list[Real] = []
    rate_tail: list[Real] = []
    for T, M in profile.peaks:
        ratio_tail.append(M / T)
        if T.gt(1) and M.gt(1):
            rate_tail.append(M.log() / T.log())
    return ratio_tail, rate_tail
