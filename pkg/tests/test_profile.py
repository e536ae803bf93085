import math
import random
from fractions import Fraction

import pytest

from slitgeo.errors import HypothesisViolated
from slitgeo.lattice import Direction, IntVec2, SlitConfig
from slitgeo.profile import (
    BruteProfile,
    PLProfile,
    brute_profile,
    crossing_of,
    gt_length_sq,
    peak_of,
    pl_profile,
    rate_estimate,
    shortest_at,
    svc_holds,
)
from slitgeo.reals import Real


@pytest.fixture(scope="module")
def cfg():
    return SlitConfig.from_preset()


def th(p, q):
    return Direction.of_intvec(IntVec2(p, q))


def test_gt_length_sq_trivial():
    assert abs(gt_length_sq(IntVec2(1, 0), th(1, 0), 1).mid_float() - math.exp(-1)) < 1e-14
    assert abs(gt_length_sq(IntVec2(0, 1), th(1, 0), 1).mid_float() - math.exp(1)) < 1e-14
    assert abs(gt_length_sq(IntVec2(1, 0), th(1, 1), 0).mid_float() - 1) < 1e-14


def test_gt_preserves_cross_products(cfg):
    # |g_t u x g_t v| = |u x v|: checked through the length form on random data
    rng = random.Random(9)
    for _ in range(20):
        u = IntVec2(rng.randint(-9, 9), rng.randint(-9, 9))
        v = IntVec2(rng.randint(-9, 9), rng.randint(-9, 9))
        if u.is_zero() or v.is_zero():
            continue
        theta = Direction.of_wvec(cfg.wvec(1, IntVec2(rng.randint(-3, 3), rng.randint(1, 5))))
        t = Fraction(rng.randint(-8, 8), 4)
        tr = Real.of(t)
        # flowed components: dot' = dot e^{-t/2}, cross' = cross e^{t/2}
        du, cu = theta.dot(u), theta.cross(u)
        dv, cv = theta.dot(v), theta.cross(v)
        flowed = (du * dv * (-tr).exp() * 0 + du * cv - cu * dv)  # dot'*cross' terms
        target = Real.of(u.cross(v))
        # u x v = (u x θ)(v·θ) - (u·θ)(v x θ) is flow-invariant
        lhs = cu * dv - du * cv
        assert abs(lhs + target).lt(Fraction(1, 10**25)) or \
               abs(lhs - target).lt(Fraction(1, 10**25))


def test_peak_trivial():
    T, M = peak_of(IntVec2(1, 0), th(1, 1))
    assert abs(T.mid_float()) < 1e-25 and abs(M.mid_float()) < 1e-18


def test_peak_degenerate_raises():
    with pytest.raises(HypothesisViolated, match="no interior peak"):
        peak_of(IntVec2(1, 0), th(1, 0))


def _grid_max_oracle(v, w, lo, hi):
    """Independent maximization of -log |g_t v|^2: coarse grid plus golden
    section, all in 40-digit mpmath so float noise cannot stall the bracket.
    Components are recomputed from the raw integers, not through Real."""
    from mpmath import mp

    mp.dps = 40
    x0 = mp.sqrt(2) - 1
    y0 = mp.sqrt(3) - 1
    wx, wy = w.s * x0 + w.n.p, w.s * y0 + w.n.q
    norm = mp.sqrt(wx * wx + wy * wy)
    tx, ty = wx / norm, wy / norm
    dv = tx * v.p + ty * v.q
    cv = ty * v.p - tx * v.q

    def f(t):
        return -mp.log(dv * dv * mp.exp(-t) + cv * cv * mp.exp(t))

    ts = [mp.mpf(lo) + (hi - lo) * i / mp.mpf(400) for i in range(401)]
    tb = max(ts, key=f)
    a, b = tb - (hi - lo) / mp.mpf(400), tb + (hi - lo) / mp.mpf(400)
    gr = (mp.sqrt(5) - 1) / 2
    for _ in range(120):
        c, d = b - gr * (b - a), a + gr * (b - a)
        if f(c) > f(d):
            b = d
        else:
            a = c
    t_star = (a + b) / 2
    return float(t_star), float(f(t_star))


def test_peak_matches_grid_maximization(cfg):
    rng = random.Random(41)
    done = 0
    while done < 100:
        v = IntVec2(rng.randint(-20, 20), rng.randint(-20, 20))
        if v.is_zero():
            continue
        w = cfg.wvec(rng.choice([1, -1]), IntVec2(rng.randint(-4, 4), rng.randint(1, 6)))
        theta = Direction.of_wvec(w)
        if abs(theta.dot(v).mid_float()) < 1e-3 or abs(theta.cross(v).mid_float()) < 1e-3:
            continue
        T, M = peak_of(v, theta)
        Tf = T.mid_float()
        t_star, m_star = _grid_max_oracle(v, w, Tf - 2, Tf + 2)
        assert abs(Tf - t_star) < 1e-9
        assert abs(M.mid_float() - m_star) < 1e-9
        done += 1


def test_crossing_trivial_axis():
    t, m = crossing_of(IntVec2(1, 0), IntVec2(0, 2), th(0, 1))
    assert abs(t.mid_float() - math.log(2)) < 1e-15
    assert abs(m.mid_float() + math.log(2)) < 1e-15


def _bisect_crossing_oracle(v, vp, theta, hi):
    dv, cv = theta.dot(v).mid_float(), theta.cross(v).mid_float()
    dp, cp = theta.dot(vp).mid_float(), theta.cross(vp).mid_float()

    def diff(t):
        a = dv * dv * math.exp(-t) + cv * cv * math.exp(t)
        b = dp * dp * math.exp(-t) + cp * cp * math.exp(t)
        return a - b

    a, b = 0.0, hi
    assert diff(a) * diff(b) < 0
    for _ in range(200):
        mid = (a + b) / 2
        if diff(a) * diff(mid) <= 0:
            b = mid
        else:
            a = mid
    return (a + b) / 2


def test_crossing_matches_bisection(cfg):
    rng = random.Random(17)
    done = 0
    while done < 100:
        w = cfg.wvec(1, IntVec2(rng.randint(-3, 3), rng.randint(1, 6)))
        theta = Direction.of_wvec(w)
        v = IntVec2(rng.randint(-8, 8), rng.randint(-8, 8))
        vp = IntVec2(rng.randint(-40, 40), rng.randint(-40, 40))
        if v.is_zero() or vp.is_zero():
            continue
        try:
            t, m = crossing_of(v, vp, theta, cfg)
        except HypothesisViolated:
            continue
        tf = t.mid_float()
        t_star = _bisect_crossing_oracle(v, vp, theta, 2 * tf + 2)
        assert abs(tf - t_star) < 1e-12
        done += 1


def test_crossing_hypothesis_error_lists_clauses():
    with pytest.raises(HypothesisViolated) as err:
        crossing_of(IntVec2(0, 2), IntVec2(1, 0), th(0, 1))
    assert err.value.clauses


def test_svc_trivial_cases(cfg):
    assert svc_holds(IntVec2(1, 0), th(1, 0), cfg)
    assert not svc_holds(IntVec2(1, 0), th(1, 1), cfg, set_selector="Z")


def test_svc_implies_shortest_witness(cfg):
    # whenever the criterion holds, the brute scan at the peak time returns ±v
    rng = random.Random(5)
    confirmed = 0
    while confirmed < 5:
        w = cfg.wvec(1, IntVec2(rng.randint(-2, 2), rng.randint(1, 4)))
        theta = Direction.of_wvec(w)
        seq_v = IntVec2(rng.randint(-6, 6), rng.randint(-6, 6))
        if seq_v.is_zero() or not seq_v.is_primitive():
            continue
        if theta.cross(seq_v).mid_float() == 0 or abs(theta.dot(seq_v).mid_float()) < 1e-6:
            continue
        if not svc_holds(seq_v, theta, cfg):
            continue
        T, _ = peak_of(seq_v, theta)
        res = shortest_at(theta, Fraction(T.mid_float()).limit_denominator(10**6), cfg)
        wits = {(u.p, u.q) for u in res.witnesses if isinstance(u, IntVec2)}
        assert (seq_v.p, seq_v.q) in wits or (-seq_v.p, -seq_v.q) in wits
        confirmed += 1


def test_shortest_unit_lattice(cfg):
    res = shortest_at(th(0, 1), 0, cfg, set_selector="Z")
    assert abs(res.length().mid_float() - 1) < 1e-20
    keys = {(v.p, v.q) for v in res.witnesses}
    assert keys <= {(1, 0), (0, 1), (-1, 0), (0, -1)} and len(keys) >= 2


def test_shortest_axis_flow_exhaustive(cfg):
    # exhaustive scan over |p|,|q| <= 50 as the independent oracle
    for t in (Fraction(2), Fraction(7, 2)):
        res = shortest_at(th(0, 1), t, cfg, set_selector="Z")
        tf = float(t)
        best = None
        for p in range(-50, 51):
            for q in range(-50, 51):
                if (p == 0 and q == 0) or math.gcd(abs(p), abs(q)) != 1:
                    continue
                val = q * q * math.exp(-tf) + p * p * math.exp(tf)
                best = val if best is None else min(best, val)
        assert abs(res.length_sq.mid_float() - best) < 1e-12


def test_shortest_full_family_small_ball(cfg):
    # compare against an exhaustive scan of all family vectors of length <= 3
    from slitgeo.lattice import ball_vectors

    res = shortest_at(th(0, 1), 0, cfg)
    cands = ball_vectors("V", Real.of(9), cfg)
    best = min(c.len_sq.mid_float() if not isinstance(c, IntVec2) else c.len_sq
               for c in cands)
    assert abs(res.length_sq.mid_float() - best) < 1e-14


def test_brute_profile_axis_vee(cfg):
    bp = brute_profile(th(0, 1), -2, 2, Fraction(1, 2), cfg, set_selector="Z")
    bp.check_lipschitz()
    vals = bp.values()
    assert abs(vals[0] - 2) < 1e-12 and abs(vals[-1] - 2) < 1e-12
    assert abs(min(vals)) < 1e-12


def test_brute_profile_single_sample(cfg):
    bp = brute_profile(th(0, 1), 1, 1, Fraction(1, 4), cfg, set_selector="Z")
    assert len(bp.samples) == 1


def test_pl_profile_slope_identity(cfg):
    # M_j - m_{j+1} = log(|w_{j+1}|/|w_j|) = t_{j+1} - T_j for any valid chain
    from slitgeo.builder import BuilderConfig, build, default_root

    bcfg = BuilderConfig(depth=3)
    tree = build(default_root(cfg, bcfg), 3, cfg, bcfg, mode="path")
    seq = tree.a_path()
    theta = seq.vectors[-1].direction()
    prof = pl_profile(list(seq.vectors), theta, cfg)
    for j in range(prof.n_pairs()):
        T, M = prof.peaks[j]
        t, m = prof.valleys[j]
        lhs = M - m
        rhs = t - T
        assert abs(lhs - rhs).lt(Fraction(1, 10**20))


def test_pl_profile_rejects_bad_chain(cfg):
    w0 = cfg.wvec(1, IntVec2(0, 2))
    w_bad = w0.translate(IntVec2(1, 0), cfg.genus)  # |v'| < |w0|
    with pytest.raises(HypothesisViolated) as err:
        pl_profile([w0, w_bad], w_bad.direction(), cfg)
    assert "(i)" in err.value.clauses


def test_rate_estimate_constant_slope_synthetic():
    vals = [Real.of(k) for k in (10, 100, 1000)]
    prof = PLProfile(tuple((v, v) for v in vals),
                     tuple((v * 2, v) for v in vals), 1)
    ratio, rate = rate_estimate(prof)
    for r in ratio:
        assert abs(r.mid_float() - 1) < 1e-15
