import math
import random
from fractions import Fraction

import pytest

from slitgeo.errors import BudgetExceeded
from slitgeo.lattice import (
    Direction,
    IntVec2,
    SlitConfig,
    cross_int,
    cross_w,
    enumerate_in_strip,
    reduce_primitive,
    unimodular_complement,
)
from slitgeo.reals import Real


@pytest.fixture(scope="module")
def cfg():
    return SlitConfig.from_preset()


def test_cross_int_examples():
    assert cross_int(IntVec2(1, 0), IntVec2(0, 1)) == 1
    assert cross_int(IntVec2(2, 1), IntVec2(3, 2)) == 1


def test_cross_int_bilinear_antisymmetric():
    rng = random.Random(11)
    for _ in range(200):
        a = IntVec2(rng.randint(-50, 50), rng.randint(-50, 50))
        b = IntVec2(rng.randint(-50, 50), rng.randint(-50, 50))
        c = IntVec2(rng.randint(-50, 50), rng.randint(-50, 50))
        assert cross_int(a, b) == -cross_int(b, a)
        assert cross_int(a, b + c) == cross_int(a, b) + cross_int(a, c)
        k = rng.randint(-5, 5)
        assert cross_int(a.scale(k), b) == k * cross_int(a, b)


def test_reduce_primitive():
    assert reduce_primitive(IntVec2(4, 6)) == (2, IntVec2(2, 3))
    assert reduce_primitive(IntVec2(0, 5)) == (5, IntVec2(0, 1))
    assert reduce_primitive(IntVec2(3, -7)) == (1, IntVec2(3, -7))
    with pytest.raises(ValueError, match="degenerate"):
        reduce_primitive(IntVec2(0, 0))


def test_unimodular_complement():
    rng = random.Random(3)
    for _ in range(100):
        v = IntVec2(rng.randint(-40, 40), rng.randint(-40, 40))
        if v.is_zero() or not v.is_primitive():
            continue
        w = unimodular_complement(v)
        assert cross_int(v, w) == 1


def test_cross_w_trivial_cases(cfg):
    w = cfg.wvec(1, IntVec2(0, 0))
    assert abs(cross_w(w, IntVec2(0, 1)) - cfg.x0).lt(Fraction(1, 10**30))
    w2 = cfg.wvec(1, IntVec2(1, 0))
    assert abs(cross_w(w2, IntVec2(1, 0)) + cfg.y0).lt(Fraction(1, 10**30))


def test_cross_w_against_independent_evaluation(cfg):
    # s(x0 q - y0 p) + n x v recomputed with mpmath directly at 256 bits
    from mpmath import mp

    mp.prec = 256
    x0 = mp.sqrt(2) - 1
    y0 = mp.sqrt(3) - 1
    w = cfg.wvec(1, IntVec2(5, 3))
    v = IntVec2(2, 1)
    expected = (x0 * v.q - y0 * v.p) + cross_int(IntVec2(5, 3), v)
    got = cross_w(w, v)
    assert abs(got.mid_float() - float(expected)) < 1e-15


def test_cross_w_additive(cfg):
    rng = random.Random(5)
    for _ in range(30):
        w = cfg.wvec(rng.choice([1, -1]), IntVec2(rng.randint(-9, 9), rng.randint(-9, 9)))
        u = IntVec2(rng.randint(-9, 9), rng.randint(-9, 9))
        v = IntVec2(rng.randint(-9, 9), rng.randint(-9, 9))
        lhs = cross_w(w, u + v)
        rhs = cross_w(w, u) + cross_w(w, v)
        assert abs(lhs - rhs).lt(Fraction(1, 10**30))


def test_wvec_value_and_length(cfg):
    w = cfg.wvec(-1, IntVec2(2, 3))
    assert abs(w.x.mid_float() - (2 - (math.sqrt(2) - 1))) < 1e-14
    assert abs(w.y.mid_float() - (3 - (math.sqrt(3) - 1))) < 1e-14
    assert w.length.sign() == 1


def test_direction_unit_norm(cfg):
    th = Direction.of_wvec(cfg.wvec(1, IntVec2(0, 2)))
    err = th.x * th.x + th.y * th.y - 1
    assert abs(err).lt(Fraction(1, 10**30))


def test_strip_example_diagonal(cfg):
    th = Direction.of_intvec(IntVec2(1, 1))
    res = enumerate_in_strip("Z", th, Real.of(1), Real.of(1), Real.of(2), cfg)
    assert res == [IntVec2(1, 1)]


def test_strip_example_axis_empty(cfg):
    th = Direction.of_intvec(IntVec2(1, 0))
    res = enumerate_in_strip("Z", th, Real.of(Fraction(1, 2)), Real.of(1), Real.of(3), cfg)
    assert res == []


def test_strip_example_below_min_length(cfg):
    th = Direction.of_intvec(IntVec2(2, 1))
    res = enumerate_in_strip("V", th, Real.of(1), Real.of(Fraction(1, 8)),
                             Real.of(Fraction(1, 4)), cfg)
    assert res == []


def _brute_strip(theta_xy, eps, b_lo, b_hi, box):
    tx, ty = theta_xy
    out = []
    for p in range(-box, box + 1):
        for q in range(-box, box + 1):
            if math.gcd(abs(p), abs(q)) != 1:
                continue
            cross = abs(p * ty - q * tx)
            dot = p * tx + q * ty
            ln = math.hypot(p, q)
            if cross < eps - 1e-12 and b_lo + 1e-12 < ln <= b_hi + 1e-12 and dot > 1e-12:
                out.append((p, q))
    return sorted(out)


def test_strip_matches_exhaustive_scan(cfg):
    rng = random.Random(17)
    for _ in range(20):
        vp = IntVec2(rng.randint(1, 6), rng.randint(1, 6))
        if vp.is_zero():
            continue
        th = Direction.of_intvec(vp)
        eps = Fraction(rng.randint(1, 8), 8)
        b_hi = rng.randint(2, 12)
        b_lo = Fraction(b_hi, 2)
        res = enumerate_in_strip("Z", th, Real.of(eps), Real.of(b_lo), Real.of(b_hi), cfg)
        got = sorted((v.p, v.q) for v in res)
        d, u = reduce_primitive(vp)
        tx, ty = u.p / math.hypot(u.p, u.q), u.q / math.hypot(u.p, u.q)
        ref = _brute_strip((tx, ty), float(eps), float(b_lo), float(b_hi), b_hi + 1)
        assert got == ref


def test_strip_stable_under_precision(cfg):
    w = cfg.wvec(1, IntVec2(1, 4))
    th = Direction.of_wvec(w)
    lo = SlitConfig.from_preset(precision_bits=4096)
    res_hi = enumerate_in_strip("V", th, Real.of(Fraction(1, 3)), Real.of(1), Real.of(8), cfg)
    res_lo = enumerate_in_strip("V", th, Real.of(Fraction(1, 3)), Real.of(1), Real.of(8), lo)
    def key(v):
        return (v.p, v.q) if isinstance(v, IntVec2) else v.key()
    assert [key(v) for v in res_hi] == [key(v) for v in res_lo]


def test_strip_budget(cfg):
    th = Direction.of_intvec(IntVec2(1, 1))
    with pytest.raises(BudgetExceeded):
        enumerate_in_strip("Z", th, Real.of(1000), Real.of(1), Real.of(10000), cfg,
                           budget=1000)


def test_strip_sorted_by_angle(cfg):
    w = cfg.wvec(1, IntVec2(0, 3))
    th = Direction.of_wvec(w)
    res = enumerate_in_strip("Z", th, Real.of(Fraction(1, 2)), Real.of(1), Real.of(30), cfg)
    assert len(res) >= 3
    for a, b in zip(res, res[1:]):
        assert cross_int(a, b) > 0  # strictly counterclockwise


def test_dio_preset_passes_at_full_bound(cfg):
    rep = cfg.verify_dio()
    assert rep.passed and rep.bound == 10_000


def test_dio_rejects_rational_pair():
    bad = SlitConfig.from_dict({
        "x0": "0.5", "y0": "0.25", "c0": "0.045", "d0": 3,
        "dio_check_bound": 50,
    })
    rep = bad.verify_dio(50)
    assert not rep.passed


def test_config_roundtrip(cfg):
    d = cfg.to_dict()
    cfg2 = SlitConfig.from_dict(d)
    assert cfg2.preset == cfg.preset
    assert cfg2.c0 == cfg.c0
    assert abs(cfg2.x0 - cfg.x0).lt(Fraction(1, 10**30))


def test_config_validation():
    with pytest.raises(ValueError, match="genus"):
        SlitConfig.from_preset(genus=1)
