"""Construction of admissible W-vector chains with slowly divergent limits.

A child of w at level j is w' = w + g v' (v' primitive, longer than w,
positively oriented) whose length and cross product are pinned to

    |w|^{1+δ_j} <= |w'| <= C |w|^{1+δ_j},
    1/(C log|w|) <= |w x w'| <= C / log|w|,

with δ_j = e0/(j+1) and C = max(2g+1, e^{2 e0}/c1).  Chains of children
have summable consecutive cross products, so their directions converge to a
nonergodic direction; the decay schedule δ_j makes the divergence rate
sublinear with exponent at most 1 - 1/e0.

Candidate children come from the strip corollary applied with
1/ε = e^t |w| log|w| and b = |w|^{1+δ_j}; survivors must keep a dense
convergent spectrum at the next level (the class W_{j+1}), which is decided
exactly from the spectrum gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cfrac import ConvergentSeq, spec_of
from .density import children_candidates
from .errors import ConstructionStalled, HypothesisViolated
from .lattice import Direction, IntVec2, SlitConfig, WVec, enumerate_in_strip
from .reals import Real, asin_enclosure, rmin

from .calibration import DEFAULT_CONSTANTS, CalibratedConstants


@dataclass(frozen=True)
class BuilderConfig:
    """Knobs of the chain construction; constants default to the shipped
    calibration (see slitgeo.calibration)."""

    e0: Fraction = Fraction(4)
    depth: int = 5
    branching_cap: int = 8
    t_max: Fraction | None = None          # default: e0
    constants: CalibratedConstants = DEFAULT_CONSTANTS
    angle_cos_min: Fraction = Fraction(3, 4)
    candidate_target: int = 48             # strip narrowing target per node
    seed: int = 0

    def __post_init__(self):
        if self.e0 <= 2:
            raise ValueError("e0 must exceed max(d0, 2)")

    def delta(self, j: int) -> Fraction:
        return self.e0 / (j + 1)

    @property
    def t_max_eff(self) -> Fraction:
        return self.t_max if self.t_max is not None else self.e0

    def c_child(self, cfg: SlitConfig) -> Real:
        exp_part = (Real.of(2 * self.e0)).exp() / Fraction(self.constants.c1)
        lin = Real.of(2 * cfg.genus + 1)
        return exp_part if exp_part.ge(lin) else lin

    def validate(self, cfg: SlitConfig) -> None:
        if self.e0 <= max(cfg.d0, 2):
            raise ValueError("e0 must exceed max(d0, 2)")


@dataclass(frozen=True)
class ChildCert:
    """Recorded margins of the six child inequalities for one step."""

    j: int
    v_step: IntVec2
    ok: bool
    clauses: dict = field(default_factory=dict)   # name -> bool
    margins: dict = field(default_factory=dict)   # name -> decimal string

    def failing(self) -> list[str]:
        return [k for k, v in self.clauses.items() if not v]


def is_child(w: WVec, wn: WVec, j: int, cfg: SlitConfig,
             bcfg: BuilderConfig | None = None) -> ChildCert:
    """Decide the level-j child relation with a margin certificate."""
    bcfg = bcfg or BuilderConfig()
    g = cfg.genus
    mp = cfg.precision_bits
    delta = bcfg.delta(j)
    clauses: dict = {}
    margins: dict = {}

    dn = wn.n - w.n
    divisible = wn.s == w.s and dn.p % g == 0 and dn.q % g == 0
    clauses["offset_in_gZ2"] = divisible
    v = IntVec2(dn.p // g, dn.q // g) if divisible else IntVec2(0, 0)
    clauses["v_primitive"] = divisible and not v.is_zero() and v.is_primitive()
    if not clauses["v_primitive"]:
        return ChildCert(j, v, False, clauses, margins)

    def record(name: str, lhs: Real, rhs: Real) -> bool:
        # checks lhs <= rhs, records the margin rhs - lhs
        diff = rhs - lhs
        ok = diff.sign(mp, what=f"child {name}") >= 0
        clauses[name] = ok
        margins[name] = diff.decimal(17)
        return ok

    lw, lwn = w.length.log(), wn.length.log()
    logw = lw
    c_child = bcfg.c_child(cfg)
    cross = abs(w.cross_w(wn))

    record("len_lo", logw * (1 + delta), lwn)
    record("len_hi", lwn, logw * (1 + delta) + c_child.log())
    record("cross_lo", (1 / (c_child * logw)), cross)
    record("cross_hi", cross, c_child / logw)
    clauses["v_longer"] = Real.of(v.len_sq).gt(w.len_sq, max_prec=mp,
                                               what="child |v'|>|w|")
    margins["v_longer"] = (Real.of(v.len_sq) - w.len_sq).decimal(17)
    dot = w.dot_vec(v)
    clauses["dot_positive"] = dot.sign(mp, what="child dot") > 0
    margins["dot_positive"] = dot.decimal(17)
    ok = all(clauses.values())
    return ChildCert(j, v, ok, clauses, margins)


class ChainBuilder:
    """Stateful builder sharing spectra and membership caches across levels."""

    def __init__(self, cfg: SlitConfig, bcfg: BuilderConfig):
        bcfg.validate(cfg)
        self.cfg = cfg
        self.bcfg = bcfg
        self._spectra: dict = {}      # w.key() -> ConvergentSeq (largest bound so far)
        self._spectra_b2: dict = {}   # w.key() -> float log2 of bound_sq
        self._wj: dict = {}           # (w.key(), j) -> bool

    # -- spectra -----------------------------------------------------------

    def spectrum(self, w: WVec, bound: Real, bound_log2: float) -> ConvergentSeq:
        key = w.key()
        have = self._spectra_b2.get(key)
        if have is None or have < bound_log2 - 1e-9:
            self._spectra[key] = spec_of(w, bound, self.cfg)
            self._spectra_b2[key] = bound_log2
        return self._spectra[key]

    def _pow_len(self, w: WVec, expo: Fraction) -> tuple[Real, float]:
        lw = w.length.log()
        val = (lw * expo).exp()
        return val, float(expo) * w.len_sq.mag_log2() / 2

    # -- membership in the dense-spectrum classes ---------------------------

    def in_Wj(self, w: WVec, j: int) -> bool:
        """Dense-spectrum membership at level j.

        The condition spec(w) ∩ [e^t |w| log|w|, |w|^{1+t}] != ∅ is decided
        exactly for all t in [δ_j, t_max) via the spectrum gaps; beyond
        t_max (default e0) it holds by the Diophantine argument once
        |w| >= L0, which the caller guarantees.
        """
        key = (w.key(), j)
        got = self._wj.get(key)
        if got is None:
            got = self._in_wj_uncached(w, j)
            self._wj[key] = got
        return got

    def _in_wj_uncached(self, w: WVec, j: int) -> bool:
        cfg, bcfg = self.cfg, self.bcfg
        mp = cfg.precision_bits
        delta = bcfg.delta(j)
        t_max = bcfg.t_max_eff
        if delta >= t_max:
            return True
        lw = w.length.log()
        llw = lw.log()
        # the window [e^t |w| log|w|, |w|^{1+t}] is nonempty iff
        # E(t) = t (log|w| - 1) - loglog|w| >= 0; E is linear in t
        for t in (delta, t_max):
            e_val = (lw - 1) * t - llw
            if e_val.sign(mp, what="window emptiness") < 0:
                return False
        bound, bl2 = self._pow_len(w, 1 + t_max)
        seq = self.spectrum(w, bound, bl2)
        scale = lw + llw  # log(|w| log|w|)
        vs = seq.convergents
        for k in range(len(vs) - 1):
            a_k = Real.of(vs[k].len_sq).log() / 2 - scale
            b_k = (Real.of(vs[k + 1].len_sq).log() / 2) / lw - 1
            # failure interval (a_k, b_k) must avoid [δ_j, t_max)
            if a_k.cmp(t_max, mp, what="gap vs t_max") < 0 and \
               b_k.cmp(delta, mp, what="gap vs delta") > 0 and \
               a_k.lt(b_k, max_prec=mp, what="gap nonempty"):
                return False
        return True

    # -- children ------------------------------------------------------------

    def children_of(self, w: WVec, j: int) -> list[WVec]:
        """Level-j children of w, sorted by angle, at most branching_cap.

        Determines the strip from the largest convergent below |w|^{1+δ_j};
        at scales where the full window holds more candidates than the
        budget, only the bottom sub-band of the cross window is enumerated
        (any sub-band produces valid children; the count floors are only
        asserted on the calibration battery).
        """
        cfg, bcfg = self.cfg, self.bcfg
        mp = cfg.precision_bits
        g = cfg.genus
        delta = bcfg.delta(j)
        L0 = Fraction(bcfg.constants.L0)
        if not w.len_sq.ge(L0 * L0, max_prec=mp, what="root scale"):
            raise ConstructionStalled(f"|w| below L0={L0} at level {j}")
        if not self.in_Wj(w, j):
            raise ConstructionStalled(
                f"vector leaves the dense-spectrum class at level {j}",
                {"j": j, "w": w.key()})
        b, bl2 = self._pow_len(w, 1 + delta)
        seq = self.spectrum(w, b, bl2)
        vs = seq.convergents
        if len(vs) < 2 or seq.rational:
            raise ConstructionStalled("spectrum too short", {"j": j})
        v_k = vs[-2]
        lw = w.length.log()
        llw = lw.log()
        log_vk = Real.of(v_k.len_sq).log() / 2
        t1 = log_vk - lw - llw
        t_cap = Real.of(self.bcfg.e0 + delta)
        t_used = rmin(t1, t_cap, max_prec=mp, what="t cap")
        # eps = exp(-t) / (|w| log|w|); when t = t1 this is exactly 1/|v_k|
        if t_used is t1:
            eps = 1 / Real.sqrt_int(v_k.len_sq)
        else:
            eps = (-t_cap).exp() / (w.length * lw)
        c1 = Fraction(bcfg.constants.c1)
        cands = self._strip_candidates(w, eps, b, bl2, c1)
        children: list[WVec] = []
        diag = {"j": j, "candidates": len(cands), "t_used": t_used.decimal(8),
                "rejected_child": 0, "rejected_class": 0}
        for v in cands:
            wn = w.translate(v, g)
            cert = is_child(w, wn, j, cfg, bcfg)
            if not cert.ok:
                diag["rejected_child"] += 1
                continue
            if not self.in_Wj(wn, j + 1):
                diag["rejected_class"] += 1
                continue
            children.append(wn)
            if len(children) >= bcfg.branching_cap:
                break
        if not children:
            raise ConstructionStalled(f"construction stalled at level {j}", diag)
        return children

    def _strip_candidates(self, w: WVec, eps: Real, b: Real, bl2: float,
                          c1: Fraction) -> list[IntVec2]:
        theta = Direction.of_wvec(w)
        target = self.bcfg.candidate_target
        expect_log2 = math.log2(3.0) + bl2 + eps.mag_log2() + \
            math.log2(float(1 - c1))
        cross_lo = eps * c1
        if expect_log2 <= math.log2(4.0 * target):
            cross_hi = eps
        else:
            # bottom sub-band [c1 eps, c1 eps + target/(3b)] of the window;
            # the full window would hold ~2^expect_log2 candidates
            cross_hi = cross_lo + Real.of(Fraction(target, 3)) / b
        return enumerate_in_strip(
            "Z", theta, cross_hi, b, b * 2, self.cfg,
            include_b_lo=True, cross_lo=cross_lo, cross_hi_strict=False)


# ----------------------------------------------------------------------------
# chains, trees, and their summaries


@dataclass(frozen=True)
class AdmissibleSeq:
    vectors: tuple[WVec, ...]
    certs: tuple[ChildCert, ...]

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass
class TreeNode:
    w: WVec
    j: int
    children: list["TreeNode"] = field(default_factory=list)
    child_certs: list[ChildCert] = field(default_factory=list)
    m_count: int = 0
    eps_min_log2: float | None = None
    stalled: str | None = None


@dataclass
class BuildTree:
    root: TreeNode
    cfg: SlitConfig
    bcfg: BuilderConfig

    def level_nodes(self, j: int) -> list[TreeNode]:
        out, cur = [], [self.root]
        for _ in range(j):
            cur = [c for n in cur for c in n.children]
        return cur

    def min_counts(self) -> list[int]:
        out = []
        j = 0
        while True:
            nodes = self.level_nodes(j)
            if not nodes or all(not n.children for n in nodes):
                break
            out.append(min(n.m_count for n in nodes))
            j += 1
        return out

    def min_separation_log2(self, j: int) -> float | None:
        nodes = self.level_nodes(j)
        seps = [n.eps_min_log2 for n in nodes if n.eps_min_log2 is not None]
        return min(seps) if seps else None

    def a_path(self) -> AdmissibleSeq:
        vecs, certs = [self.root.w], []
        node = self.root
        while node.children:
            mid = len(node.children) // 2
            certs.append(node.child_certs[mid])
            node = node.children[mid]
            vecs.append(node.w)
        return AdmissibleSeq(tuple(vecs), tuple(certs))


def check_root(w0: WVec, cfg: SlitConfig) -> None:
    """Root admissibility: |w0| > 1 and offset in g Z^2."""
    g = cfg.genus
    if w0.n.p % g or w0.n.q % g:
        raise HypothesisViolated("root offset not in g Z^2", ["root"])
    if not w0.len_sq.gt(1, max_prec=cfg.precision_bits, what="root length"):
        raise HypothesisViolated("root too short", ["root"])


def default_root(cfg: SlitConfig, bcfg: BuilderConfig) -> WVec:
    """Near-vertical root s(x0,y0) + g(0,k): smallest k meeting L0 and the
    angle budget."""
    g = cfg.genus
    L0 = Fraction(bcfg.constants.L0)
    k = 1
    while True:
        w = cfg.wvec(1, IntVec2(0, g * k))
        ok_len = w.len_sq.ge(L0 * L0, max_prec=cfg.precision_bits,
                             what="root length")
        cos2 = (w.y * w.y) / w.len_sq
        ok_ang = cos2.ge(bcfg.angle_cos_min ** 2, max_prec=cfg.precision_bits,
                         what="root angle")
        if ok_len and ok_ang:
            return w
        k += 1
        if k > 10_000:
            raise ConstructionStalled("no admissible root found")


def build(w0: WVec, depth: int, cfg: SlitConfig,
          bcfg: BuilderConfig | None = None, *, mode: str = "path") -> BuildTree:
    """Expand the admissibility tree under w0.

    mode "path" keeps one branch, always descending into the angular median
    child; mode "tree" expands every branch up to branching_cap.  A stalled
    node is recorded and the remaining branches continue.
    """
    bcfg = bcfg or BuilderConfig()
    check_root(w0, cfg)
    builder = ChainBuilder(cfg, bcfg)
    root = TreeNode(w0, 0)
    tree = BuildTree(root, cfg, bcfg)
    frontier = [root]
    for j in range(depth):
        nxt: list[TreeNode] = []
        for node in frontier:
            try:
                kids = builder.children_of(node.w, j)
            except ConstructionStalled as exc:
                node.stalled = str(exc)
                if mode == "path":
                    raise
                continue
            node.m_count = len(kids)
            node.eps_min_log2 = _min_separation_log2(kids)
            picks = [kids[len(kids) // 2]] if mode == "path" else kids
            for kw in picks:
                cert = is_child(node.w, kw, j, cfg, bcfg)
                child = TreeNode(kw, j + 1)
                node.children.append(child)
                node.child_certs.append(cert)
                nxt.append(child)
        frontier = nxt
        if not frontier:
            break
    return tree


def _min_separation_log2(kids: list[WVec]) -> float | None:
    """log2 of the smallest angular separation (sine) of adjacent children."""
    if len(kids) < 2:
        return None
    best = None
    for a, b in zip(kids, kids[1:]):
        s = abs(a.cross_w(b)).mag_log2() - \
            (a.len_sq.mag_log2() + b.len_sq.mag_log2()) / 2
        best = s if best is None else min(best, s)
    return best


# ----------------------------------------------------------------------------
# limits and dimension diagnostics


def companion_vector(w: WVec, cfg: SlitConfig) -> IntVec2:
    """The integer vector minimizing |w x u| among |u| <= sqrt2 |w|.

    By the best-approximation property this is the largest convergent of w
    within that ball.
    """
    bound_sq = w.len_sq * 2
    seq = spec_of(w, bound_sq, cfg, squared=True)
    vs = seq.convergents
    if len(vs) >= 2 and not seq.rational:
        return vs[-2]
    return vs[-1]


def interval_halfwidth(w: WVec, cfg: SlitConfig) -> Real:
    """Half-width of the direction interval I(w) = arcsin(|w x v| / (2|w|^2))."""
    v = companion_vector(w, cfg)
    return asin_enclosure(abs(w.cross_vec(v)) / (w.len_sq * 2))


def limit_direction(seq: AdmissibleSeq, cfg: SlitConfig) -> tuple[Direction, Real]:
    """Direction of the last chain vector and a certified error bound.

    The nested direction intervals I(w_j) shrink along the chain; the limit
    lies within the half-width of the last one.
    """
    if len(seq) < 2:
        raise ValueError("need a chain of length at least 2")
    w_last = seq.vectors[-1]
    return Direction.of_wvec(w_last), interval_halfwidth(w_last, cfg)


def nested_intervals_hold(seq: AdmissibleSeq, cfg: SlitConfig) -> bool:
    """Check closure(I(w_{j+1})) ⊂ I(w_j) numerically along the chain."""
    mp = cfg.precision_bits
    for w, wn in zip(seq.vectors, seq.vectors[1:]):
        h = interval_halfwidth(w, cfg)
        hn = interval_halfwidth(wn, cfg)
        gap = asin_enclosure(abs(w.cross_w(wn)) / (w.length * wn.length))
        if not (gap + hn).lt(h, max_prec=mp, what="nested intervals"):
            return False
    return True


def hausdorff_partial(tree: BuildTree, j: int) -> tuple[float, Fraction]:
    """Depth-j dimension diagnostics.

    Returns the tree quotient log(m_0 ... m_{j-1}) / (-log(m_j eps_j)) and
    the closed-form comparator (1/2)(1 - prod_{i<j} 1/(1+δ_i)), which
    increases to 1/2.
    """
    comparator = hausdorff_comparator(tree.bcfg.e0, j)
    counts = tree.min_counts()
    if len(counts) <= j:
        raise ValueError("tree too thin")
    if any(c == 0 for c in counts[: j + 1]):
        raise ValueError("tree too thin")
    eps_j_log2 = tree.min_separation_log2(j)
    if eps_j_log2 is None:
        raise ValueError("tree too thin")
    num = sum(math.log(c) for c in counts[:j])
    den = -(math.log(counts[j]) + eps_j_log2 * math.log(2))
    return num / den, comparator


def hausdorff_comparator(e0: Fraction, j: int) -> Fraction:
    prod = Fraction(1)
    for i in range(j):
        prod *= 1 / (1 + e0 / (i + 1))
    return Fraction(1, 2) * (1 - prod)
