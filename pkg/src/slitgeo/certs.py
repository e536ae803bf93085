"""JSON certificates and their replay verification.

Every builder run emits a certificate holding the exact integer data that
defines the construction (root, per-step vectors, chosen continuations,
rule tags) plus decimal snapshots of the derived quantities.  `verify`
reconstructs the run from the integer data at doubled working precision and
re-checks every recorded inequality, so a certificate is evidence that can
be audited independently of the producing process.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .builder import BuilderConfig, ChildCert, check_root, is_child
from .calibration import CalibratedConstants
from .errors import VerificationFailure
from .lattice import IntVec2, SlitConfig, WVec
from .profile import check_pl_hypotheses, pl_profile
from .reals import LOG2, Real
from .slow import RateFn, SlowSeq, candidates3, u_of, verify_clauses

SCHEMA_VERSION = 1


def _vec(v: IntVec2) -> list[int]:
    return [v.p, v.q]


def _unvec(x) -> IntVec2:
    return IntVec2(int(x[0]), int(x[1]))


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ----------------------------------------------------------------------------
# admissible-path certificates


def path_certificate(seq_vectors: list[WVec], certs: list[ChildCert],
                     cfg: SlitConfig, bcfg: BuilderConfig,
                     profile=None, extras: dict | None = None) -> dict:
    root = seq_vectors[0]
    steps = []
    for j, cert in enumerate(certs):
        steps.append({
            "j": j,
            "v": _vec(cert.v_step),
            "clauses": dict(cert.clauses),
            "margins": dict(cert.margins),
        })
    out = {
        "kind": "admissible-path",
        "version": SCHEMA_VERSION,
        "tool": f"slitgeo {__version__}",
        "config": cfg.to_dict(),
        "builder": {
            "e0": str(bcfg.e0),
            "t_max": str(bcfg.t_max_eff),
            "branching_cap": bcfg.branching_cap,
            "angle_cos_min": str(bcfg.angle_cos_min),
            "constants": bcfg.constants.to_dict(),
        },
        "root": {"s": root.s, "n": _vec(root.n)},
        "steps": steps,
    }
    if profile is not None:
        out["profile"] = {
            "j1": profile.j1,
            "T": [T.decimal(17) for T, _ in profile.peaks],
            "M": [M.decimal(17) for _, M in profile.peaks],
            "t": [t.decimal(17) for t, _ in profile.valleys],
            "m": [m.decimal(17) for _, m in profile.valleys],
        }
    if extras:
        out.update(extras)
    return out


def rebuild_path(cert: dict, cfg: SlitConfig) -> tuple[list[WVec], BuilderConfig]:
    bdata = cert["builder"]
    bcfg = BuilderConfig(
        e0=Fraction(bdata["e0"]),
        t_max=Fraction(bdata["t_max"]),
        branching_cap=int(bdata["branching_cap"]),
        angle_cos_min=Fraction(bdata["angle_cos_min"]),
        constants=CalibratedConstants.from_dict(bdata["constants"]),
    )
    root = cfg.wvec(int(cert["root"]["s"]), _unvec(cert["root"]["n"]))
    vectors = [root]
    for stepdata in cert["steps"]:
        v = _unvec(stepdata["v"])
        vectors.append(vectors[-1].translate(v, cfg.genus))
    return vectors, bcfg


def _verify_path(cert: dict, cfg: SlitConfig) -> list[str]:
    bad: list[str] = []
    vectors, bcfg = rebuild_path(cert, cfg)
    try:
        check_root(vectors[0], cfg)
    except Exception as exc:
        bad.append(f"root: {exc}")
    for j, stepdata in enumerate(cert["steps"]):
        rec = is_child(vectors[j], vectors[j + 1], j, cfg, bcfg)
        if not rec.ok:
            bad.append(f"step {j}: child clauses {rec.failing()}")
        if not stepdata["clauses"].get("v_primitive", False):
            bad.append(f"step {j}: recorded clauses already failing")
    checks = check_pl_hypotheses(vectors, cfg)
    for ch in checks:
        fails = ch.clauses_failing()
        if fails:
            bad.append(f"pair {ch.j}: model hypotheses {fails}")
    if "profile" in cert:
        try:
            prof = pl_profile(vectors, vectors[-1].direction(), cfg)
        except Exception as exc:
            bad.append(f"profile: {exc}")
        else:
            stored = cert["profile"]
            if stored["j1"] != prof.j1:
                bad.append("profile: j1 mismatch")
            for name, pairs, idx in (("T", prof.peaks, 0), ("M", prof.peaks, 1),
                                     ("t", prof.valleys, 0), ("m", prof.valleys, 1)):
                for k, val in enumerate(stored[name]):
                    fresh = pairs[k][idx]
                    if abs(fresh - frac_from_decimal(val)).gt(
                            Fraction(1, 10**9), max_prec=cfg.precision_bits):
                        bad.append(f"profile: {name}[{k}] drifted")
    return bad


def frac_from_decimal(text: str) -> Fraction:
    """Fraction from a decimal string, scientific notation included."""
    t = text.strip().lower()
    if "e" in t:
        mant, expo = t.split("e")
        return Fraction(mant) * Fraction(10) ** int(expo)
    return Fraction(t)


# ----------------------------------------------------------------------------
# slow-sequence certificates


def slow_certificate(run: SlowSeq, cfg: SlitConfig, *, c0: Fraction,
                     band: tuple[Fraction, Fraction],
                     rate_desc: dict, extras: dict | None = None) -> dict:
    steps = []
    for s in run.steps:
        steps.append({
            "j": s.j,
            "rule": s.rule,
            "w_s": s.w.s,
            "w_n": _vec(s.w.n),
            "v": _vec(s.v),
            "u": _vec(s.u) if s.u is not None else None,
            "t_half": s.t.decimal(17),
            "m_half": s.m.decimal(17),
            "t_full": (s.t * 2).decimal(17),
            "m_full": (s.m * 2).decimal(17),
        })
    out = {
        "kind": "slow-sequence",
        "version": SCHEMA_VERSION,
        "tool": f"slitgeo {__version__}",
        "config": cfg.to_dict(),
        "rate": rate_desc,
        "clause_constants": {"c0": str(c0), "band_lo": str(band[0]),
                             "band_hi": str(band[1])},
        "burn_in": run.burn_in,
        "convention": {
            "stored": "half-log: t = log(|w|^2/|w x w'|)/2, m = log(1/|w x w'|)/2",
            "model": "peak/valley coordinates are the doubled values",
        },
        "steps": steps,
    }
    if extras:
        out.update(extras)
    return out


def _rate_from_desc(desc: dict) -> RateFn:
    name = desc["name"]
    if name.endswith("-wrapped"):
        base = RateFn.preset(desc["target"])
        factor = Fraction(desc["factor"])
        return RateFn(
            name,
            lambda t: base.fn(2 * t) * float(factor),
            lambda t: 2 * base.deriv(2 * t) * float(factor),
            lambda t: base.real_fn(t * 2) * factor,
        )
    if name == "table":
        return RateFn.from_table([tuple(p) for p in desc["points"]])
    rate = RateFn.preset(name)
    if "scale" in desc:
        rate = rate.scaled(Fraction(desc["scale"]))
    return rate


def _verify_slow(cert: dict, cfg: SlitConfig) -> list[str]:
    bad: list[str] = []
    rate = _rate_from_desc(cert["rate"])
    g = cfg.genus
    mp = cfg.precision_bits
    steps = cert["steps"]
    vectors: list[WVec] = []
    for sd in steps:
        vectors.append(cfg.wvec(int(sd["w_s"]), _unvec(sd["w_n"])))
    for i in range(1, len(steps)):
        sd = steps[i]
        w_prev, w_cur = vectors[i - 1], vectors[i]
        v = _unvec(sd["v"])
        if w_cur != w_prev.translate(v, g):
            bad.append(f"step {sd['j']}: chain broken")
            continue
        x = abs(w_prev.cross_w(w_cur))
        t_fresh = w_cur.len_sq.log() / 2 - x.log() / 2
        m_fresh = -(x.log()) / 2
        for name, fresh in (("t_half", t_fresh), ("m_half", m_fresh)):
            stored = frac_from_decimal(sd[name])
            if abs(fresh - stored).gt(Fraction(1, 10**9), max_prec=mp):
                bad.append(f"step {sd['j']}: {name} drifted")
        if sd["u"] is not None:
            u = _unvec(sd["u"])
            vp = _unvec(steps[i - 1]["v"])
            if abs(u.cross(vp)) != 1:
                bad.append(f"step {sd['j']}: |u x v| != 1")
            if w_prev.dot_vec(u).sign(mp) <= 0:
                bad.append(f"step {sd['j']}: w·u <= 0")
            if not abs(w_prev.cross_vec(u)).lt(abs(w_prev.cross_vec(vp)) / 2,
                                               max_prec=mp):
                bad.append(f"step {sd['j']}: u window violated")
            fresh_u = u_of(w_prev, vp, cfg)
            if fresh_u != u:
                bad.append(f"step {sd['j']}: u not the canonical choice")
    run = _rehydrate_slow(cert, vectors, rate)
    rep = verify_clauses(run, cfg,
                         c0=Fraction(cert["clause_constants"]["c0"]),
                         band=(Fraction(cert["clause_constants"]["band_lo"]),
                               Fraction(cert["clause_constants"]["band_hi"])))
    for clause, j in rep.failures:
        bad.append(f"clause ({clause}) fails at j={j}")
    if "thm2" in cert:
        bad.extend(_verify_thm2(cert, vectors, cfg))
    return bad


def _rehydrate_slow(cert: dict, vectors: list[WVec], rate: RateFn) -> SlowSeq:
    from .slow import SlowStep

    steps = []
    for i, sd in enumerate(cert["steps"]):
        if i == 0:
            t = Real.of(0)
            m = Real.of(0)
        else:
            x = abs(vectors[i - 1].cross_w(vectors[i]))
            m = -(x.log()) / 2
            t = vectors[i].len_sq.log() / 2 - x.log() / 2
        steps.append(SlowStep(sd["j"], vectors[i], _unvec(sd["v"]),
                              _unvec(sd["u"]) if sd["u"] else None, 0, None,
                              sd["rule"], t, m))
    return SlowSeq(tuple(steps), rate, int(cert["burn_in"]))


def _verify_thm2(cert: dict, vectors: list[WVec], cfg: SlitConfig) -> list[str]:
    # the bound is checked in the run's half-log convention (see the
    # certificate's "convention" block)
    bad = []
    mp = cfg.precision_bits
    target = RateFn.preset(cert["thm2"]["target"])
    start = int(cert["thm2"]["holds_from"])
    for i in range(start, len(vectors) - 1):
        w, wn = vectors[i], vectors[i + 1]
        x = abs(w.cross_w(wn))
        T = ((w.len_sq.log() + wn.len_sq.log()) / 2 - x.log()) / 2
        M = ((wn.len_sq.log() - w.len_sq.log()) / 2 - x.log()) / 2
        if not M.le(target.real_fn(T), max_prec=mp):
            bad.append(f"target-rate bound fails at j={i}")
    return bad


# ----------------------------------------------------------------------------
# density battery certificates


def density_certificate(cases: list[dict], cfg: SlitConfig, battery: str,
                        extras: dict | None = None) -> dict:
    out = {
        "kind": "density-battery",
        "version": SCHEMA_VERSION,
        "tool": f"slitgeo {__version__}",
        "config": cfg.to_dict(),
        "battery": battery,
        "cases": cases,
    }
    if extras:
        out.update(extras)
    return out


def _verify_density(cert: dict, cfg: SlitConfig) -> list[str]:
    from .density import Region, count_primitive, dens_of

    bad: list[str] = []
    for i, case in enumerate(cert["cases"]):
        kind = case["region"]
        if kind == "triangle-diff":
            region = Region.triangle_diff(Fraction(case["a"]))
        elif kind == "sector-diff":
            region = Region.sector_diff(_unvec(case["e1"]), _unvec(case["e2"]),
                                        int(case["b"]))
        elif kind == "strip":
            w = cfg.wvec(int(case["w_s"]), _unvec(case["w_n"]))
            region = Region.strip(w.direction(), Fraction(case["eps"]),
                                  Fraction(case["b"]))
        else:
            bad.append(f"case {i}: unknown region {kind}")
            continue
        count = count_primitive(region, cfg)
        if count != int(case["count"]):
            bad.append(f"case {i}: count {count} != recorded {case['count']}")
        rep = dens_of(region, cfg)
        if case.get("passed") and rep.passed is not True:
            bad.append(f"case {i}: floor no longer certified")
    return bad


# ----------------------------------------------------------------------------
# entry point


def verify_certificate(cert: dict, precision_factor: int = 2) -> None:
    """Replay a certificate with `precision_factor`-times the precision.

    Raises VerificationFailure listing every failing clause.
    """
    base = SlitConfig.from_dict(cert["config"])
    cfg = SlitConfig.from_dict({**cert["config"],
                                "precision_bits": base.precision_bits
                                * precision_factor})
    kind = cert.get("kind")
    if kind == "admissible-path":
        bad = _verify_path(cert, cfg)
    elif kind == "slow-sequence":
        bad = _verify_slow(cert, cfg)
    elif kind == "density-battery":
        bad = _verify_density(cert, cfg)
    else:
        raise VerificationFailure(f"unknown certificate kind {kind!r}", ["kind"])
    if bad:
        raise VerificationFailure(
            f"{len(bad)} clause(s) failed verification", bad)
