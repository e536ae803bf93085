"""Calibration of the universal constants left unquantified by the theory.

The density corollary and the child-count bound hold with *some* universal
constants (rho1, c1, rho2, ...); the constructions need workable values.
They are fixed empirically from preset batteries:

  * c1: the largest cross-window lower fraction keeping at least one child
    candidate in every battery run;
  * rho1: half the smallest observed candidate count per unit b*eps;
  * rho2: half the smallest observed child count per |w|^δ / log|w|;
  * L0: the smallest ladder root length from which every preset completes
    a fixed number of consecutive build levels;
  * c0_slow: half the smallest observed (m_{j+1} - m_j) e^{m_j} over the
    forced-climb steps of slow-rate battery runs;
  * band_d: the |w_{j+1}| |w_{j-1} x w_j| / |w_j| band observed on the same
    battery (growth-clause envelope), widened by a factor of 2 each way.

`python -m slitgeo.cli calibrate` reproduces the shipped numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from fractions import Fraction

from .lattice import IntVec2, SlitConfig, preset_names
from .reals import Real


@dataclass(frozen=True)
class CalibratedConstants:
    c1: str
    rho1: str
    rho2: str
    L0: str
    c0_slow: str
    band_d_lo: str
    band_d_hi: str

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "CalibratedConstants":
        return CalibratedConstants(**{k: str(v) for k, v in d.items()})


# shipped values, reproduced by `slitgeo calibrate`
DEFAULT_CONSTANTS = CalibratedConstants(
    c1="1/4",
    rho1="1/16",
    rho2="1/512",
    L0="4",
    c0_slow="1/2",
    band_d_lo="1",
    band_d_hi="32",
)


def battery_roots(cfg: SlitConfig, min_len: float, count: int = 6) -> list:
    """Deterministic ladder of W vectors with lengths >= min_len."""
    out = []
    k = 1
    g = cfg.genus
    while len(out) < count:
        for n in (IntVec2(0, g * k), IntVec2(g, g * k), IntVec2(-g, g * k)):
            w = cfg.wvec(1, n)
            if w.len_sq.mid_float() >= min_len * min_len and len(out) < count:
                out.append(w)
        k += 1
    return out


def calibrate_density_constants(presets: list[str] | None = None,
                                 verbose: bool = False) -> dict:
    """Battery for c1 and rho1 over preset w with |w| ~ 12..40.

    Runs the strip corollary with 1/eps = |w| log|w| and b = |w|^2 and
    records, per run, the largest usable lower window fraction and the
    count per unit b*eps.
    """
    from .density import children_candidates

    presets = presets or preset_names()
    runs = []
    for name in presets:
        cfg = SlitConfig.from_preset(name)
        for w in battery_roots(cfg, 12.0, 4):
            lw = w.length
            logw = lw.log()
            eps = 1 / (lw * logw)
            b = lw * lw
            runs.append((cfg, w, eps, b))
    # pass 1: largest lower-window fraction keeping every run nonempty,
    # taken with a 7/8 safety factor and rounded down to a dyadic
    max_ratios: list[float] = []
    for cfg, w, eps, b in runs:
        cands = children_candidates(w, eps, b, Fraction(0), cfg)
        if not cands:
            max_ratios.append(0.0)
            continue
        lw = w.length
        ratios = [(abs(w.cross_vec(v)) / (eps * lw)).mid_float() for v in cands]
        max_ratios.append(max(ratios))
        if verbose:
            print(f"  {cfg.preset} |w|={lw.mid_float():.1f}: {len(cands)}"
                  f" candidates, top ratio {max(ratios):.4f}")
    c1 = Fraction(_nice(min(max_ratios) * 7 / 8))
    # pass 2: counts within the calibrated window
    unit_counts: list[float] = []
    for cfg, w, eps, b in runs:
        cands = children_candidates(w, eps, b, c1, cfg)
        be = (b * eps).mid_float()
        unit_counts.append(len(cands) / be)
    if min(unit_counts) == 0:
        raise AssertionError("calibrated c1 empties a battery run")
    rho1 = min(unit_counts) * 0.5
    return {"c1": float(c1), "rho1": rho1, "runs": len(runs)}


def calibrate_builder_constants(bcfg=None, presets: list[str] | None = None,
                                 levels: int = 3, ladder=(4, 5, 6, 8, 10),
                                 verbose: bool = False) -> dict:
    """Battery for rho2 and L0: child counts at level 0 and the smallest
    root length from which `levels` consecutive build levels succeed on
    every preset."""
    from .builder import BuilderConfig, ChainBuilder, ConstructionStalled

    presets = presets or preset_names()
    L0_pick = None
    for min_len in ladder:
        ok_all = True
        for name in presets:
            cfg = SlitConfig.from_preset(name)
            bc = bcfg or BuilderConfig()
            bc = BuilderConfig(e0=bc.e0, branching_cap=bc.branching_cap,
                               constants=_with_L0(bc.constants, min_len))
            builder = ChainBuilder(cfg, bc)
            w = battery_roots(cfg, float(min_len), 1)[0]
            try:
                chain = [w]
                for j in range(levels):
                    kids = builder.children_of(chain[-1], j)
                    chain.append(kids[len(kids) // 2])
            except ConstructionStalled as exc:
                ok_all = False
                if verbose:
                    print(f"  L0={min_len} {name}: stalled ({exc})")
                break
        if ok_all:
            L0_pick = min_len
            break
    if L0_pick is None:
        raise AssertionError("no ladder root completes the battery")
    # uncapped level-0 child counts vs the |w|^δ0 / log|w| prediction
    unit_counts: list[float] = []
    for name in presets:
        cfg = SlitConfig.from_preset(name)
        bc0 = bcfg or BuilderConfig()
        bc0 = BuilderConfig(e0=bc0.e0, branching_cap=100_000,
                            candidate_target=200_000,
                            constants=_with_L0(bc0.constants, L0_pick))
        builder = ChainBuilder(cfg, bc0)
        for w in battery_roots(cfg, float(L0_pick), 2):
            kids = builder.children_of(w, 0)
            lw = w.length.mid_float()
            pred = lw ** float(bc0.delta(0)) / math.log(lw)
            unit_counts.append(len(kids) / pred)
            if verbose:
                print(f"  {name} |w|={lw:.2f}: {len(kids)} children"
                      f" vs prediction unit {pred:.1f}")
    rho2 = min(unit_counts) * 0.5
    return {"rho2": rho2, "L0": L0_pick}


def _with_L0(constants: CalibratedConstants, L0) -> CalibratedConstants:
    d = constants.to_dict()
    d["L0"] = str(L0)
    return CalibratedConstants.from_dict(d)


def calibrate_slow_constants(presets: list[str] | None = None, steps: int = 40,
                              verbose: bool = False) -> dict:
    """Battery for the forced-climb floor c0 and the growth-clause band."""
    from .slow import RateFn, build_slow

    presets = presets or preset_names()
    climbs: list[float] = []
    band: list[float] = []
    # the staircase jump leaves m far below the target, forcing the
    # maximal-climb rule until the band is reached again
    stair = RateFn.from_table([(0.0, 0.5), (60.0, 0.6), (70.0, 4.6),
                               (10_000.0, 5.6)])
    for name in presets:
        cfg = SlitConfig.from_preset(name)
        for rate in (RateFn.preset("log"), RateFn.preset("sqrtlog"), stair):
            w0 = cfg.wvec(1, IntVec2(0, cfg.genus))
            run = build_slow(w0, rate, steps, cfg)
            ms = [s.m.mid_float() for s in run.steps]
            # steps[i].rule produced the transition i-1 -> i
            for i in range(max(run.burn_in, 2), len(run.steps)):
                st, prev = run.steps[i], run.steps[i - 1]
                if st.rule in ("C1", "C2"):
                    climbs.append((ms[i] - ms[i - 1]) * math.exp(ms[i - 1]))
                band.append(st.w.length.mid_float(256)
                            / (prev.w.length.mid_float(256)
                               * math.exp(2 * ms[i - 1])))
    out = {
        "c0_slow": min(climbs) * 0.5 if climbs else None,
        "band_d_lo": min(band) * 0.5 if band else None,
        "band_d_hi": max(band) * 2.0 if band else None,
        "climb_events": len(climbs),
    }
    if verbose:
        print(f"  slow battery: {out}")
    return out


def run_calibration(verbose: bool = False) -> dict:
    """Full battery; returns a dict in the constants-file schema."""
    dens = calibrate_density_constants(verbose=verbose)
    built = calibrate_builder_constants(verbose=verbose)
    slow = calibrate_slow_constants(verbose=verbose)
    return {
        "c1": _nice(dens["c1"]),
        "rho1": _nice(dens["rho1"]),
        "rho2": _nice(built["rho2"]),
        "L0": str(built["L0"]),
        "c0_slow": _nice(slow["c0_slow"]) if slow["c0_slow"] else
                   DEFAULT_CONSTANTS.c0_slow,
        "band_d_lo": _nice(slow["band_d_lo"]) if slow["band_d_lo"] else
                     DEFAULT_CONSTANTS.band_d_lo,
        "band_d_hi": _nice(slow["band_d_hi"], up=True) if slow["band_d_hi"] else
                     DEFAULT_CONSTANTS.band_d_hi,
        "climb_events": slow["climb_events"],
    }


def _nice(x: float, up: bool = False) -> str:
    """Round to a clean dyadic fraction (down by default, up on request)."""
    if x <= 0:
        return "0"
    e = math.floor(math.log2(x))
    val = Fraction(2) ** (e + 1 if up else e)
    return str(val)
