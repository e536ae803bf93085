"""Command line entry point.

Subcommands: convergents, profile, predict, density, nonergodic, slow,
calibrate, verify.  Every run writes its outputs plus a manifest with the
config snapshot, seed and content digests; identical config and seed give
byte-identical outputs.  Exit codes: 0 success, 1 usage, 2 precision
exhausted, 3 budget exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .calibration import CalibratedConstants, DEFAULT_CONSTANTS, run_calibration
from .certs import (
    density_certificate,
    dumps,
    path_certificate,
    sha256_hex,
    slow_certificate,
    verify_certificate,
)
from .errors import (
    BudgetExceeded,
    PrecisionExhausted,
    SlitgeoError,
    VerificationFailure,
)
from .lattice import Direction, IntVec2, SlitConfig
from .reals import Real, set_default_max_prec

PRECISION_ENV = "SLITGEO_PRECISION"


class _Usage(Exception):
    pass


def _load_config(args) -> SlitConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    else:
        data = {"preset": "sqrt2m1_sqrt3m1"}
    if os.environ.get(PRECISION_ENV):
        data["precision_bits"] = int(os.environ[PRECISION_ENV])
    cfg = SlitConfig.from_dict(data)
    set_default_max_prec(cfg.precision_bits)
    return cfg


def _load_constants(args) -> CalibratedConstants:
    path = getattr(args, "constants", None)
    if not path:
        return DEFAULT_CONSTANTS
    with open(path) as fh:
        data = json.load(fh)
    data.pop("climb_events", None)
    return CalibratedConstants.from_dict(data)


class _Outputs:
    def __init__(self, out_dir: str):
        self.dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.digests: dict[str, str] = {}

    def write_text(self, name: str, text: str) -> None:
        data = text.encode()
        with open(os.path.join(self.dir, name), "wb") as fh:
            fh.write(data)
        self.digests[name] = "sha256:" + sha256_hex(data)

    def write_json(self, name: str, obj: dict) -> None:
        self.write_text(name, dumps(obj))

    def finish(self, subcommand: str, cfg: SlitConfig, seed: int | None,
               extra: dict | None = None) -> None:
        manifest = {
            "tool": f"slitgeo {__version__}",
            "subcommand": subcommand,
            "seed": seed,
            "config": cfg.to_dict(),
            "outputs": dict(sorted(self.digests.items())),
        }
        if extra:
            manifest.update(extra)
        self.write_text("manifest.json", dumps(manifest))


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ----------------------------------------------------------------------------
# subcommands


def _cmd_convergents(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    w = cfg.wvec(args.sign, IntVec2(args.np, args.nq))
    from .cfrac import spec_of

    seq = spec_of(w, args.bound, cfg)
    rows = []
    for k, v in enumerate(seq.convergents):
        rows.append([k, seq.quotients[k], v.p, v.q,
                     v.length().decimal(17),
                     seq.cross_with_owner(k).decimal(17)])
    out.write_text("convergents.csv",
                   _csv_text(["k", "a_k", "p_k", "q_k", "length",
                              "cross_with_owner"], rows))
    out.finish("convergents", cfg, None,
               {"owner": {"s": w.s, "n": [w.n.p, w.n.q]}, "bound": args.bound})
    return 0


def _build_path(cfg, args):
    from .builder import BuilderConfig, build, default_root, limit_direction
    from .profile import pl_profile, rate_estimate

    bcfg = BuilderConfig(e0=Fraction(args.e0), depth=args.depth,
                         constants=_load_constants(args), seed=args.seed)
    root = default_root(cfg, bcfg)
    tree = build(root, args.depth, cfg, bcfg, mode=args.mode)
    seq = tree.a_path()
    theta, err = limit_direction(seq, cfg)
    prof = pl_profile(list(seq.vectors), theta, cfg)
    return bcfg, tree, seq, theta, err, prof


def _cmd_nonergodic(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    from .profile import rate_estimate

    bcfg, tree, seq, theta, err, prof = _build_path(cfg, args)
    ratio, rate = rate_estimate(prof)
    rows = []
    for j in range(len(seq.vectors) - 1):
        w, wn = seq.vectors[j], seq.vectors[j + 1]
        cross = abs(w.cross_w(wn))
        T, M = prof.peaks[j]
        t, m = prof.valleys[j]
        rows.append([
            j, w.length.decimal(17), cross.decimal(17),
            T.decimal(17), M.decimal(17), t.decimal(17), m.decimal(17),
            rate[j].decimal(17) if j < len(rate) else "",
        ])
    out.write_text("nonergodic.csv",
                   _csv_text(["j", "len_w", "cross", "T", "M", "t", "m",
                              "rate_estimate"], rows))
    cert = path_certificate(list(seq.vectors), list(seq.certs), cfg, bcfg,
                            profile=prof, extras={
                                "mode": args.mode,
                                "limit_direction_error_log2": err.mag_log2(),
                                "tree_counts": tree.min_counts(),
                            })
    out.write_json("nonergodic.json", cert)
    out.finish("nonergodic", cfg, args.seed,
               {"e0": str(args.e0), "depth": args.depth, "mode": args.mode})
    return 0


def _cmd_profile(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    with open(args.cert) as fh:
        cert = json.load(fh)
    from .certs import rebuild_path
    from .profile import brute_profile, pl_profile

    vectors, _ = rebuild_path(cert, cfg)
    theta = vectors[-1].direction()
    prof = pl_profile(vectors, theta, cfg)
    lam = prof.model()
    bp = brute_profile(theta, Fraction(args.t_lo), Fraction(args.t_hi),
                       Fraction(args.step), cfg)
    rows = []
    for s in bp.samples:
        wit = s.witnesses[0]
        p, q = (wit.p, wit.q) if s.witness_kind() == "Z" else (wit.n.p, wit.n.q)
        rows.append([str(s.t), s.f.decimal(17), f"{lam(float(s.t)):.12f}",
                     p, q, s.witness_kind()])
    out.write_text("profile.csv",
                   _csv_text(["t", "f_brute", "lambda", "witness_p",
                              "witness_q", "witness_kind"], rows))
    out.finish("profile", cfg, None,
               {"window": [str(args.t_lo), str(args.t_hi), str(args.step)]})
    return 0


def _cmd_predict(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    with open(args.cert) as fh:
        cert = json.load(fh)
    from .certs import rebuild_path
    from .profile import pl_profile

    vectors, _ = rebuild_path(cert, cfg)
    theta = vectors[-1].direction()
    prof = pl_profile(vectors, theta, cfg)
    points = []
    for j in range(prof.n_pairs()):
        w, wn = vectors[j], vectors[j + 1]
        cross = abs(w.cross_w(wn))
        T, M = prof.peaks[j]
        t, m = prof.valleys[j]
        points.append({
            "j": j,
            "T": T.decimal(17), "M": M.decimal(17),
            "t": t.decimal(17), "m": m.decimal(17),
            "inputs": {
                "len_w": w.length.decimal(17),
                "len_w_next": wn.length.decimal(17),
                "cross": cross.decimal(17),
            },
        })
    out.write_json("predict.json", {"j1": prof.j1, "points": points})
    out.finish("predict", cfg, None)
    return 0


def _cmd_density(args) -> int:
    import random

    cfg = _load_config(args)
    out = _Outputs(args.out)
    from .density import Region, dens_of, random_minimal_interval

    if args.battery:
        rng = random.Random(args.seed)
        cases = []
        rows = []
        for i in range(args.sector_cases):
            v, u = random_minimal_interval(rng, args.b)
            rep = dens_of(Region.sector_diff(v, u, args.b), cfg)
            cases.append({"region": "sector-diff", "e1": [v.p, v.q],
                          "e2": [u.p, u.q], "b": args.b, "count": rep.count,
                          "passed": bool(rep.passed)})
            rows.append(["sector-diff", i, rep.count,
                         rep.dens_lo.decimal(12), "8/27", rep.passed])
        for i in range(args.strip_cases):
            case, rep = _random_strip_case(rng, cfg)
            cases.append(case)
            rows.append(["strip", i, rep.count, rep.dens_lo.decimal(12),
                         "2/27pi", rep.passed])
        out.write_text("density_battery.csv",
                       _csv_text(["region", "i", "count", "dens_lo", "bound",
                                  "passed"], rows))
        out.write_json("density_battery.json",
                       density_certificate(cases, cfg, "sector+strip",
                                           {"seed": args.seed, "b": args.b}))
        out.finish("density", cfg, args.seed, {"battery": True})
        return 0

    if args.shape == "triangle":
        region = Region.triangle_diff(Fraction(args.a))
    elif args.shape == "strip":
        w = cfg.wvec(1, IntVec2(args.np, args.nq))
        region = Region.strip(w.direction(), Fraction(args.eps), Fraction(args.b))
    else:
        raise _Usage(f"unsupported shape {args.shape!r}")
    rep = dens_of(region, cfg)
    out.write_json("density.json", {
        "shape": args.shape,
        "count": rep.count,
        "dens_lo": rep.dens_lo.decimal(17),
        "dens_hi": rep.dens_hi.decimal(17),
        "bound": rep.bound_desc,
        "hypothesis_met": rep.hypothesis_met,
        "passed": rep.passed,
    })
    out.finish("density", cfg, None, {"shape": args.shape})
    return 0


def _random_strip_case(rng, cfg):
    import math

    from .cfrac import spec_of
    from .density import Region, dens_of

    while True:
        n = IntVec2(rng.randint(-6, 6), rng.randint(2, 9))
        w = cfg.wvec(rng.choice([1, -1]), n)
        if w.len_sq.mid_float() < 2:
            continue
        seq = spec_of(w, 60, cfg)
        usable = [v for v in seq.convergents[:-1] if 4 <= v.len_sq <= 45 * 45]
        if not usable:
            continue
        vk = usable[rng.randrange(len(usable))]
        ln = math.isqrt(vk.len_sq)
        eps = Fraction(1, ln)
        b = Fraction(rng.randint(max(ln + 1, 2 * ln - 4), 4 * ln))
        region = Region.strip(w.direction(), eps, b)
        rep = dens_of(region, cfg)
        if rep.hypothesis_met:
            case = {"region": "strip", "w_s": w.s, "w_n": [n.p, n.q],
                    "eps": str(eps), "b": str(b), "count": rep.count,
                    "passed": bool(rep.passed)}
            return case, rep


def _cmd_slow(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    from .slow import RateFn, build_slow, slow_for_target, verify_clauses

    constants = _load_constants(args)
    c0 = Fraction(constants.c0_slow)
    band = (Fraction(constants.band_d_lo), Fraction(constants.band_d_hi))
    w0 = cfg.wvec(1, IntVec2(0, cfg.genus))
    extras: dict = {}
    if args.thm2_target:
        target = RateFn.preset(args.thm2_target)
        run, chosen = slow_for_target(w0, target, args.steps, cfg,
                                      eps_margin=Fraction(args.eps_margin),
                                      eps_init=Fraction(args.eps_init))
        rate_desc = {"name": chosen.name, "target": args.thm2_target,
                     "factor": str(Fraction(1, 2 * (2 + Fraction(args.eps_margin))))}
        holds_from = _thm2_holds_from(run, target, cfg)
        extras["thm2"] = {"target": args.thm2_target,
                          "holds_from": holds_from,
                          "eps_margin": str(args.eps_margin)}
    else:
        if args.rate == "custom-table":
            with open(args.rate_table) as fh:
                pts = [tuple(map(float, row)) for row in csv.reader(fh)]
            rate = RateFn.from_table(pts)
            rate_desc = {"name": "table", "points": pts}
        else:
            rate = RateFn.preset(args.rate)
            rate_desc = {"name": args.rate}
        run = build_slow(w0, rate, args.steps, cfg,
                         eps_init=Fraction(args.eps_init))
    rep = verify_clauses(run, cfg, c0=c0, band=band)
    if not rep.ok:
        raise VerificationFailure("clause verification failed on the fresh run",
                                  [f"({c}) at j={j}" for c, j in rep.failures])
    rows = []
    for s in run.steps:
        rows.append([s.j, s.rule, s.t.decimal(17), s.m.decimal(17),
                     run.rate.real_fn(s.t).decimal(17) if s.j else "0",
                     s.w.length.decimal(17)])
    out.write_text("slow.csv",
                   _csv_text(["j", "rule", "t", "m", "r_of_t", "len_w"], rows))
    extras["clauses_checked"] = rep.checked
    cert = slow_certificate(run, cfg, c0=c0, band=band, rate_desc=rate_desc,
                            extras=extras)
    out.write_json("slow.json", cert)
    out.finish("slow", cfg, None, {"steps": args.steps,
                                   "eps_init": str(args.eps_init)})
    return 0


def _thm2_holds_from(run, target, cfg) -> int:
    from .slow import peak_values

    mp = cfg.precision_bits
    peaks = peak_values(run, halved=True)
    holds_from = None
    for i, (T, M) in enumerate(peaks):
        if i < run.burn_in:
            continue
        if M.le(target.real_fn(T), max_prec=mp):
            if holds_from is None:
                holds_from = i
        else:
            holds_from = None
    if holds_from is None:
        raise VerificationFailure("prescribed-rate bound never settles",
                                  ["thm2"])
    return holds_from


def _cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    out = _Outputs(args.out)
    result = run_calibration(verbose=args.verbose)
    out.write_json("constants.json", result)
    out.finish("calibrate", cfg, None)
    return 0


def _cmd_verify(args) -> int:
    _load_config(args)
    with open(args.cert) as fh:
        cert = json.load(fh)
    verify_certificate(cert, precision_factor=2)
    print(f"{args.cert}: verified at doubled precision")
    return 0


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="slitgeo",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"slitgeo {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, constants=False):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", default="out", help="output directory")
        if constants:
            sp.add_argument("--constants", help="calibrated constants JSON")

    sp = sub.add_parser("convergents", help="convergent spectrum CSV of a W vector")
    common(sp)
    sp.add_argument("--sign", type=int, default=1, choices=(1, -1))
    sp.add_argument("--np", type=int, required=True)
    sp.add_argument("--nq", type=int, required=True)
    sp.add_argument("--bound", type=int, default=1000)
    sp.set_defaults(fn=_cmd_convergents)

    sp = sub.add_parser("profile", help="brute f(t) against the model, CSV")
    common(sp)
    sp.add_argument("--cert", required=True, help="admissible-path certificate")
    sp.add_argument("--t-lo", dest="t_lo", required=True)
    sp.add_argument("--t-hi", dest="t_hi", required=True)
    sp.add_argument("--step", default="1/4")
    sp.set_defaults(fn=_cmd_profile)

    sp = sub.add_parser("predict", help="model critical points with provenance")
    common(sp)
    sp.add_argument("--cert", required=True)
    sp.set_defaults(fn=_cmd_predict)

    sp = sub.add_parser("density", help="density reports and batteries")
    common(sp)
    sp.add_argument("--shape", choices=("triangle", "strip"), default="triangle")
    sp.add_argument("--a", default="1", help="triangle size")
    sp.add_argument("--eps", default="1/10")
    sp.add_argument("--b", type=int, default=50)
    sp.add_argument("--np", type=int, default=0)
    sp.add_argument("--nq", type=int, default=2)
    sp.add_argument("--battery", action="store_true")
    sp.add_argument("--sector-cases", type=int, default=200)
    sp.add_argument("--strip-cases", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_density)

    sp = sub.add_parser("nonergodic", help="build an admissible chain")
    common(sp, constants=True)
    sp.add_argument("--e0", default="4")
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--mode", choices=("path", "tree"), default="path")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_nonergodic)

    sp = sub.add_parser("slow", help="build a prescribed-rate chain")
    common(sp, constants=True)
    sp.add_argument("--rate", choices=("log", "sqrtlog", "custom-table"),
                    default="log")
    sp.add_argument("--rate-table", help="CSV of (t, r) rows for custom-table")
    sp.add_argument("--steps", type=int, default=30)
    sp.add_argument("--eps-init", dest="eps_init", default="1/100")
    sp.add_argument("--thm2-target", dest="thm2_target",
                    choices=("loglog10",), default=None)
    sp.add_argument("--eps-margin", dest="eps_margin", default="2")
    sp.set_defaults(fn=_cmd_slow)

    sp = sub.add_parser("calibrate", help="reproduce the constants file")
    common(sp)
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(fn=_cmd_calibrate)

    sp = sub.add_parser("verify", help="replay a certificate at doubled precision")
    common(sp)
    sp.add_argument("--cert", required=True)
    sp.set_defaults(fn=_cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 0 on --help/--version
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        for clause in exc.clauses:
            print(f"  - {clause}", file=sys.stderr)
        return 4
    except SlitgeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
