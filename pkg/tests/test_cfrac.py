import math
import random
from fractions import Fraction

import pytest

from slitgeo.cfrac import (
    cf_of_fraction,
    is_convergent,
    next_after,
    rational_cf_forms,
    spec_of,
)
from slitgeo.errors import HypothesisViolated
from slitgeo.lattice import Direction, IntVec2, SlitConfig
from slitgeo.reals import Real


@pytest.fixture(scope="module")
def cfg():
    return SlitConfig.from_preset()


def golden_direction():
    return Direction.of_reals((Real.sqrt_int(5) + 1) / 2, Real.of(1))


def test_golden_ratio_convergents(cfg):
    # frozen from the brute-force best-approximation scan below (q <= 100)
    seq = spec_of(golden_direction(), 100, cfg)
    got = [(v.p, v.q) for v in seq.convergents]
    assert got[:9] == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8),
                       (21, 13), (34, 21), (55, 34)]


def _best_approximations(alpha: float, qmax: int) -> list[tuple[int, int]]:
    """Brute-force best approximations of the second kind, independent oracle."""
    out = []
    best = float("inf")
    for q in range(1, qmax + 1):
        p = round(alpha * q)
        err = abs(q * alpha - p)
        if err < best - 1e-13:
            best = err
            out.append((p, q))
    return out


def test_convergents_are_best_approximations(cfg):
    # oracle computed in floats: scales are small enough that 1e-13 slack is safe
    alpha = (1 + math.sqrt(5)) / 2
    oracle = _best_approximations(alpha, 100)
    # k = 0 is excluded: the 0th convergent is a best approximation only when
    # the fractional part of the slope is <= 1/2, which fails for the golden ratio
    seq = spec_of(golden_direction(), 300, cfg)
    got = [(v.p, v.q) for v in seq.convergents[1:] if 1 <= v.q <= 100]
    assert got == oracle


def test_rational_shim_22_over_7():
    short, long = rational_cf_forms(Fraction(22, 7))
    assert cf_of_fraction(Fraction(22, 7)) in (short, long)
    assert short == [3, 7] and long == [3, 6, 1]


def test_spec_edge_conventions(cfg):
    seq = spec_of(Direction.of_intvec(IntVec2(1, 0)), 10, cfg)
    assert [(v.p, v.q) for v in seq.convergents] == [(1, 0)]
    th = golden_direction()
    pos = spec_of(th, 40, cfg)
    neg = spec_of(-th, 40, cfg)
    assert [(-v.p, -v.q) for v in neg.convergents] == \
           [(v.p, v.q) for v in pos.convergents]


def test_identities_for_random_owners(cfg):
    rng = random.Random(23)
    count = 0
    while count < 25:
        n = IntVec2(rng.randint(-6, 6), rng.randint(-6, 6))
        s = rng.choice([1, -1])
        w = cfg.wvec(s, n)
        if w.len_sq.mid_float() < 0.3:
            continue
        seq = spec_of(w, 300, cfg)
        seq.selfcheck(cfg)
        count += 1


def test_is_convergent_for_stored_vectors(cfg):
    w = cfg.wvec(1, IntVec2(0, 2))
    seq = spec_of(w, 200, cfg)
    for v in seq.convergents[1:-1]:
        if (v.len_sq) * 4 > w.len_sq.mid_float() ** 0 and is_fine_angle(v, w):
            assert is_convergent(v, w, cfg)


def is_fine_angle(v, w) -> bool:
    lhs = (w.y * w.y) * v.len_sq
    return lhs.mid_float() > w.len_sq.mid_float() * 1.001


def test_semiconvergent_rejected(cfg):
    w = cfg.wvec(1, IntVec2(0, 2))
    seq = spec_of(w, 4000, cfg)
    found = False
    for k in range(1, len(seq.quotients) - 1):
        if seq.quotients[k + 1] >= 2:
            semi = seq.convergents[k] + seq.convergents[k - 1]
            if semi.is_primitive() and is_fine_angle(semi, w):
                assert not is_convergent(semi, w, cfg)
                found = True
    assert found


def test_angle_precondition_raises(cfg):
    w = cfg.wvec(1, IntVec2(40, 1))  # nearly horizontal owner
    with pytest.raises(HypothesisViolated):
        is_convergent(IntVec2(1, 0), w, cfg)


def test_next_after_golden_like(cfg):
    w = cfg.wvec(1, IntVec2(0, 2))
    seq = spec_of(w, 500, cfg)
    for k in range(1, len(seq.convergents) - 1):
        assert next_after(seq.convergents[k], w, cfg) == seq.convergents[k + 1]
    assert next_after(-seq.convergents[1], w, cfg) == -seq.convergents[2]


def test_next_after_rejects_non_convergent(cfg):
    w = cfg.wvec(1, IntVec2(0, 2))
    with pytest.raises(ValueError):
        next_after(IntVec2(9991, 7), w, cfg)


def test_sandwich_margins_positive(cfg):
    w = cfg.wvec(-1, IntVec2(3, 5))
    seq = spec_of(w, 500, cfg)
    norm = seq.owner_norm()
    mp = cfg.precision_bits
    for k in range(len(seq.convergents) - 1):
        ratio = abs(seq.cross_with_owner(k)) / norm
        hi = 1 / seq.convergents[k + 1].length()
        lo = 1 / (seq.convergents[k + 1] + seq.convergents[k]).length()
        assert (hi - ratio).sign(mp) > 0
        assert (ratio - lo).sign(mp) > 0
