"""Certified real arithmetic.

A `Real` is a lazily evaluated real number: it stores a closure that can
produce an interval enclosure of the exact value at any requested working
precision.  Enclosures are outward rounded (mpmath's interval context), so

  * the exact value always lies inside the reported interval, and
  * re-evaluating at a higher precision never widens the interval.

Comparisons are resolved by escalating the working precision (doubling,
starting from a small hint) until the relevant intervals separate.  If they
still overlap at the configured maximum, `PrecisionExhausted` is raised: the
constructions in this package branch on strict inequalities and silently
guessing a side is never acceptable.

Exact leaf values (integers, fractions, square roots of integers) make every
derived quantity recomputable, which is what allows certificates to be
re-verified later at doubled precision.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Union

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext

from .errors import PrecisionExhausted

Scalar = Union[int, Fraction, "Real"]

START_PREC = 64

_contexts: dict[int, MPIntervalContext] = {}


def context(prec: int) -> MPIntervalContext:
    ctx = _contexts.get(prec)
    if ctx is None:
        ctx = MPIntervalContext()
        ctx.prec = prec
        _contexts[prec] = ctx
    return ctx


_default_max_prec = 1 << 15


def default_max_prec() -> int:
    return _default_max_prec


def set_default_max_prec(bits: int) -> None:
    """Set the package-wide precision ceiling (the CLI wires this to config)."""
    global _default_max_prec
    if bits < START_PREC:
        raise ValueError(f"max precision must be at least {START_PREC} bits")
    _default_max_prec = bits


def _endpoints(enc) -> tuple:
    # libmp mpf tuples of the two endpoints
    return enc._mpi_


class Real:
    """A real number with certified interval enclosures at any precision."""

    __slots__ = ("_fn", "_cache")

    def __init__(self, fn: Callable[[int], object]):
        self._fn = fn
        self._cache: dict[int, object] = {}

    def enclosure(self, prec: int):
        enc = self._cache.get(prec)
        if enc is None:
            enc = self._fn(prec)
            self._cache[prec] = enc
        return enc

    # -- construction ------------------------------------------------------

    @staticmethod
    def of(value: Scalar) -> "Real":
        if isinstance(value, Real):
            return value
        if isinstance(value, int):
            return Real(lambda p, n=value: context(p).mpf(n))
        if isinstance(value, Fraction):
            num, den = value.numerator, value.denominator
            if den == 1:
                return Real.of(num)
            return Real(lambda p, a=num, b=den: context(p).mpf(a) / context(p).mpf(b))
        raise TypeError(f"cannot wrap {type(value).__name__} as Real")

    @staticmethod
    def from_decimal(text: str) -> "Real":
        """Exact value of a decimal literal (parsed as a rational)."""
        return Real.of(Fraction(text))

    @staticmethod
    def sqrt_int(n: int) -> "Real":
        if n < 0:
            raise ValueError("sqrt of negative integer")
        return Real(lambda p: context(p).sqrt(context(p).mpf(n)))

    @staticmethod
    def pi() -> "Real":
        return Real(lambda p: +context(p).pi)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: self.enclosure(p) + o.enclosure(p))

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: self.enclosure(p) - o.enclosure(p))

    def __rsub__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: o.enclosure(p) - self.enclosure(p))

    def __mul__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: self.enclosure(p) * o.enclosure(p))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: self.enclosure(p) / o.enclosure(p))

    def __rtruediv__(self, other: Scalar) -> "Real":
        o = Real.of(other)
        return Real(lambda p: o.enclosure(p) / self.enclosure(p))

    def __neg__(self) -> "Real":
        return Real(lambda p: -self.enclosure(p))

    def __abs__(self) -> "Real":
        return Real(lambda p: abs(self.enclosure(p)))

    def __pow__(self, k: int) -> "Real":
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported; use exp/log")
        return Real(lambda p: self.enclosure(p) ** k)

    def sqrt(self) -> "Real":
        def fn(p):
            ctx = context(p)
            enc = self.enclosure(p)
            lo, hi = _endpoints(enc)
            if libmp.mpf_sign(hi) < 0:
                raise ValueError("sqrt of a certified-negative quantity")
            if libmp.mpf_sign(lo) < 0:
                from mpmath import mp

                enc = ctx.mpf([0, mp.make_mpf(hi)])
            return ctx.sqrt(enc)

        return Real(fn)

    def log(self) -> "Real":
        def fn(p):
            ctx = context(p)
            enc = self.enclosure(p)
            lo, hi = _endpoints(enc)
            if libmp.mpf_sign(hi) <= 0:
                raise ValueError("log of a certified-nonpositive quantity")
            if libmp.mpf_sign(lo) <= 0:
                # enclosure still touches 0 at this precision: the lower log
                # endpoint is unknown, report (-inf, log hi]
                from mpmath import mp

                hi_log = mp.make_mpf(libmp.mpf_log(hi, p, "u"))
                return ctx.mpf(["-inf", hi_log])
            return ctx.log(enc)

        return Real(fn)

    def exp(self) -> "Real":
        return Real(lambda p: context(p).exp(self.enclosure(p)))

    # -- resolution ----------------------------------------------------------

    def sign(self, max_prec: int | None = None, hint: int = START_PREC,
             what: str = "sign") -> int:
        """Certified sign: -1, 0 or 1.

        0 is returned only when the enclosure is the exact point 0 (which
        happens for integer/rational data); an irrational value never
        compares equal, it either separates from 0 or the precision ceiling
        is hit.
        """
        limit = _default_max_prec if max_prec is None else max_prec
        prec = max(START_PREC, min(hint, limit))
        while True:
            enc = self.enclosure(prec)
            lo, hi = _endpoints(enc)
            if libmp.mpf_sign(lo) > 0:
                return 1
            if libmp.mpf_sign(hi) < 0:
                return -1
            if lo == libmp.fzero and hi == libmp.fzero:
                return 0
            if prec >= limit:
                raise PrecisionExhausted(what, limit)
            prec = min(2 * prec, limit)

    def cmp(self, other: Scalar, max_prec: int | None = None,
            hint: int = START_PREC, what: str = "compare") -> int:
        return (self - other).sign(max_prec, hint, what)

    def lt(self, other: Scalar, **kw) -> bool:
        return self.cmp(other, **kw) < 0

    def le(self, other: Scalar, **kw) -> bool:
        return self.cmp(other, **kw) <= 0

    def gt(self, other: Scalar, **kw) -> bool:
        return self.cmp(other, **kw) > 0

    def ge(self, other: Scalar, **kw) -> bool:
        return self.cmp(other, **kw) >= 0

    def is_zero(self, max_prec: int | None = None) -> bool:
        return self.sign(max_prec) == 0

    def floor(self, max_prec: int | None = None, hint: int = START_PREC,
              what: str = "floor") -> int:
        """Certified floor; escalates while the enclosure straddles an integer."""
        limit = _default_max_prec if max_prec is None else max_prec
        prec = max(START_PREC, min(hint, limit))
        while True:
            enc = self.enclosure(prec)
            lo, hi = _endpoints(enc)
            if lo != libmp.fninf and hi != libmp.finf:
                flo = int(libmp.to_int(libmp.mpf_floor(lo), "f"))
                fhi = int(libmp.to_int(libmp.mpf_floor(hi), "f"))
                if flo == fhi:
                    return flo
            if prec >= limit:
                raise PrecisionExhausted(what, limit)
            prec = min(2 * prec, limit)

    # -- inspection / serialization ------------------------------------------

    def _tight(self, rel_bits: int, start: int, limit: int):
        """Escalate until the enclosure is finite and relatively tight.

        Large-integer cancellations can leave low-precision enclosures
        unbounded; rendering must not report those artifacts.  Tightness is
        tested on libmp exponents so magnitudes far outside float range are
        handled exactly.
        """
        prec = max(START_PREC, start)
        while True:
            enc = self.enclosure(prec)
            lo, hi = _endpoints(enc)
            if lo != libmp.fninf and hi != libmp.finf:
                width = libmp.mpf_sub(hi, lo, 53, "u")
                if width == libmp.fzero:
                    return enc, prec
                mags = [t[2] + t[3] for t in (lo, hi) if t[1]]
                m_scale = max(mags) if mags else -(1 << 60)
                m_width = width[2] + width[3]
                if m_width <= m_scale - rel_bits:
                    return enc, prec
            if prec >= limit:
                return enc, prec
            prec = min(2 * prec, limit)

    def mid_float(self, prec: int = 128) -> float:
        """Midpoint as a float; diagnostic use only, not certified."""
        enc, p = self._tight(53, prec, _default_max_prec)
        lo, hi = _endpoints(enc)
        mid = libmp.mpf_shift(libmp.mpf_add(lo, hi, p + 4, "n"), -1)
        return libmp.to_float(mid, strict=False)

    def decimal(self, digits: int = 17, prec: int | None = None) -> str:
        """Deterministic decimal rendering of a tight-enclosure midpoint."""
        start = prec if prec is not None else max(START_PREC, 4 * digits)
        enc, p = self._tight(int(3.5 * digits) + 8, start, _default_max_prec)
        lo, hi = _endpoints(enc)
        mid = libmp.mpf_shift(libmp.mpf_add(lo, hi, p + 4, "n"), -1)
        return libmp.to_str(mid, digits)

    def mag_log2(self, rel_bits: int = 24) -> float:
        """log2 of |value| as a float; safe for magnitudes far outside float
        range.  Returns -inf for exact zero."""
        enc, p = self._tight(rel_bits, START_PREC, _default_max_prec)
        lo, hi = _endpoints(enc)
        mags = []
        for t in (lo, hi):
            if t == libmp.fzero:
                continue
            sign, man, exp, bc = t
            if man:
                mags.append(exp + bc)
            elif t in (libmp.finf, libmp.fninf):
                return float("inf")
        if not mags:
            return float("-inf")
        return float(max(mags))

    def width_log2(self, prec: int = 128) -> float:
        """log2 of the enclosure width at `prec`; -inf for exact points."""
        lo, hi = _endpoints(self.enclosure(prec))
        d = libmp.mpf_sub(hi, lo, 53, "u")
        if d == libmp.fzero:
            return float("-inf")
        import math

        return math.log2(abs(libmp.to_float(d, strict=False)) or 5e-324)

    def __repr__(self) -> str:
        try:
            return f"Real({self.decimal(12)})"
        except Exception:
            return "Real(<unevaluated>)"


# -- helpers ---------------------------------------------------------------

ZERO = Real.of(0)
ONE = Real.of(1)
TWO = Real.of(2)
SQRT2 = Real.sqrt_int(2)
LOG2 = Real.of(2).log()


def rmin(a: Real, b: Real, **kw) -> Real:
    return a if a.le(b, **kw) else b


def rmax(a: Real, b: Real, **kw) -> Real:
    return a if a.ge(b, **kw) else b


def asin_enclosure(x: Real) -> Real:
    """arcsin for |x| < 1, via atan2 on certified components."""

    def fn(p):
        ctx = context(p)
        xe = x.enclosure(p)
        one = ctx.mpf(1)
        inner = one - xe * xe
        lo, hi = _endpoints(inner)
        if libmp.mpf_sign(hi) <= 0:
            raise ValueError("asin argument certified outside (-1, 1)")
        if libmp.mpf_sign(lo) <= 0:
            inner = ctx.mpf((libmp.fzero, hi))
        return ctx.atan2(xe, ctx.sqrt(inner))

    return Real(fn)


def int_bounds(x: Real, start: int = 128, limit: int | None = None) -> tuple[int, int]:
    """Certified integer bracket [floor(lo), ceil(hi)] of an enclosure that
    has been escalated until its width is at most 1 (the right tolerance
    for integer coefficient boxes); falls back to the widest available
    bracket at the precision ceiling."""
    lim = _default_max_prec if limit is None else limit
    prec = max(START_PREC, min(start, lim))
    while True:
        enc = x.enclosure(prec)
        lo, hi = _endpoints(enc)
        if lo != libmp.fninf and hi != libmp.finf:
            width = libmp.mpf_sub(hi, lo, 53, "u")
            if libmp.mpf_cmp(width, libmp.fone) <= 0:
                break
        if prec >= lim:
            if lo == libmp.fninf or hi == libmp.finf:
                raise PrecisionExhausted("integer bracket", lim)
            break
        prec = min(2 * prec, lim)
    return (int(libmp.to_int(libmp.mpf_floor(lo), "f")),
            int(libmp.to_int(libmp.mpf_ceil(hi), "c")))


def floor_upper(x: Real, prec: int = 128) -> int:
    """floor of the enclosure's upper endpoint: a certified integer >= floor(x)."""
    lo, hi = _endpoints(x.enclosure(prec))
    if hi == libmp.finf:
        raise ValueError("unbounded enclosure")
    return int(libmp.to_int(libmp.mpf_floor(hi), "f"))


def ceil_lower(x: Real, prec: int = 128) -> int:
    """ceil of the enclosure's lower endpoint: a certified integer <= ceil(x)."""
    lo, hi = _endpoints(x.enclosure(prec))
    if lo == libmp.fninf:
        raise ValueError("unbounded enclosure")
    return int(libmp.to_int(libmp.mpf_ceil(lo), "c"))
