"""Command-line entry point: one command per job, exit 0 iff every check passes."""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io, planar
from .config import JobConfig, defaults_for, load_config, parse_inline
from .dual import GridDomain, complete_to_maximal, is_r_maximal
from .errors import ConfigurationError, ConstantWidthError
from .geometry import Norm, PointCloud, diameter, sample_sphere
from .median import build_body, family, r_star_refined, seed_from_config
from .verification import (CheckResult, VerificationReport, input_hash, verify_body, verify_cloud,
                           verify_family_continuity)

log = logging.getLogger("constwidth")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# --------------------------------------------------------------------------- helpers

def _seed(cfg):
    spec = cfg["seed"]
    if isinstance(spec, str):
        spec = {"builtin": spec}
    spec = dict(spec)
    if "builtin" in spec:
        spec.setdefault("eps", cfg["eps"])
        spec.setdefault("rng_seed", cfg["rng_seed"])
        if cfg["dim"] is not None:
            spec.setdefault("dimension", cfg["dim"])
    return seed_from_config(spec)


def _directions(dim, samples, scheme, seed):
    count = samples or (4096 if dim == 2 else 10000)
    scheme = scheme or ("uniform" if dim == 2 else "fibonacci")
    return sample_sphere(dim, count, scheme, seed=seed)


def _rho(spec):
    """Radius-of-curvature piece: a number, or {"const": c, "cos": {k: a}, "sin": {k: b}}."""
    if isinstance(spec, (int, float)):
        return float(spec)
    if not isinstance(spec, dict) or set(spec) - {"const", "cos", "sin"}:
        raise ConfigurationError("rho must be a number or a mapping with keys const, cos, sin")
    c0 = float(spec.get("const", 0.0))
    cs = {int(k): float(v) for k, v in (spec.get("cos") or {}).items()}
    sn = {int(k): float(v) for k, v in (spec.get("sin") or {}).items()}

    def rho(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, c0)
        for k, v in cs.items():
            out = out + v * np.cos(k * t)
        for k, v in sn.items():
            out = out + v * np.sin(k * t)
        return out

    return rho


def _write_curve(out, curve):
    if out is None:
        return None
    p = Path(out)
    pts = curve.points[:-1]
    if p.suffix.lower() == ".svg":
        return io.write_svg(p, pts)
    return io.write_csv(p, pts, t=curve.t[:-1] if p.suffix.lower() == ".csv" else None)


def _write_body(out, body):
    if out is None:
        return None
    if body.dim == 2:
        p = Path(out)
        if p.suffix.lower() == ".svg":
            return io.write_svg(p, body.boundary)
        return io.write_csv(p, body.boundary)
    if Path(out).suffix.lower() == ".csv":
        return io.write_csv(out, body.boundary)
    pts, faces = io.hull_mesh(body.boundary, body.directions)
    return io.write_mesh(out, pts, faces)


def _planar_report(curve, cfg, extra=None):
    body = curve.as_body()
    rep = verify_body(body, tol=cfg["tol"])
    per = planar.barbier_perimeter(curve) if curve.closed else math.nan
    ptol = 1e-6 * curve.r if curve.beta.exact else 1e-5 * curve.r
    rep.add(CheckResult("closure", curve.closed, curve.closure_residual, curve.closure_tol))
    rep.add(CheckResult("barbier_perimeter", bool(abs(per - math.pi * curve.r) <= ptol),
                        abs(per - math.pi * curve.r), ptol, {"perimeter": per, "pi_r": math.pi * curve.r}))
    rep.provenance.update({"steps": curve.steps, "profile": curve.beta.to_json(), **(extra or {})})
    return rep


# --------------------------------------------------------------------------- commands

def cmd_construct(cfg):
    g = _seed(cfg)
    dirs = _directions(g.dim, cfg["samples"], cfg["scheme"], cfg["rng_seed"])
    rs = r_star_refined(g)
    r = cfg["r"] if cfg["r"] is not None else cfg["r_factor"] * rs.value
    body = build_body(g, r, dirs, override=cfg["override"])
    wdirs = _directions(g.dim, cfg["width_directions"], cfg["scheme"], cfg["rng_seed"])
    rep = verify_body(body, wdirs, tol=cfg["tol"])
    rep.provenance.update({"seed": repr(g), "r_star": rs.value, "r_star_samples": rs.samples,
                           "r_star_direction": rs.direction})
    _write_body(cfg["out"], body)
    return rep, None


def cmd_family(cfg):
    g = _seed(cfg)
    dirs = _directions(g.dim, cfg["samples"], cfg["scheme"], cfg["rng_seed"])
    lams = cfg["lambdas"] if cfg["lambdas"] is not None else np.linspace(0.0, 1.0, cfg["steps"] + 1).tolist()
    r = cfg["r"] if cfg["r"] is not None else r_star_refined(g).value
    bodies = family(g, r, lams, dirs)
    rep = VerificationReport(provenance={"seed": repr(g), "r": r, "lambdas": list(lams),
                                         "boundary_samples": len(dirs)})
    rep.add(verify_family_continuity(bodies, lams))
    if cfg["out"] is not None:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        ext = ".csv" if g.dim == 2 else ".off"
        for i, b in enumerate(bodies):
            _write_body(out / f"body_{i:03d}{ext}", b)
    return rep, None


def cmd_rstar(cfg):
    g = _seed(cfg)
    rs = r_star_refined(g, start=cfg["start"], cap=cfg["cap"], rtol=cfg["rtol"])
    rep = VerificationReport(provenance={"seed": repr(g)})
    rep.add(CheckResult("r_star", True, 0.0, cfg["rtol"], {
        "r_star": rs.value, "direction": rs.direction, "eigenvalue": rs.eigenvalue, "samples": rs.samples}))
    text = f"{round(rs.value, 12)!r}\nmaximizing direction: {np.array2string(rs.direction, precision=8)}"
    return rep, text


def cmd_planar(cfg):
    spec = cfg["profile"]
    if isinstance(spec, str):
        spec = parse_inline(spec, "profile")
    beta = planar.profile_from_config(spec)
    curve = planar.curve_from_beta(beta, cfg["r"], cfg["steps"])
    _write_curve(cfg["out"], curve)
    return _planar_report(curve, cfg), None


def cmd_reuleaux(cfg):
    curve = planar.curve_from_beta(planar.reuleaux_beta(cfg["k"]), cfg["r"], cfg["steps"])
    _write_curve(cfg["out"], curve)
    rep = _planar_report(curve, cfg, {"k": cfg["k"]})
    return rep, None


def cmd_embed_arc(cfg):
    rho = _rho(cfg["rho"])
    emb = planar.embed_arc(rho, cfg["theta_star"], cfg["r"], cfg["steps"])
    rep = _planar_report(emb.curve, cfg, {"theta_star": emb.theta_star, "constant": emb.constant})
    gap = planar.arc_containment(emb, rho)
    rep.add(CheckResult("containment", gap <= cfg["tol"], gap, cfg["tol"]))
    _write_curve(cfg["out"], emb.curve)
    if cfg["profile_out"] is not None:
        t = np.linspace(0.0, math.pi, 1025)
        io.write_csv(cfg["profile_out"], np.column_stack([t, emb.beta(t)]))
    return rep, None


def cmd_complete(cfg):
    norm = Norm.parse(cfg["norm"])
    c = io.read_cloud(cfg["in"])
    c = PointCloud(c.points, norm)
    r = float(cfg["r"])
    grid = GridDomain.around(c, r, cfg["h"], budget=cfg["budget"])
    d = complete_to_maximal(c, r, grid)
    res = is_r_maximal(d, r, grid, cfg["tol"])
    rep = VerificationReport(provenance={"input_hash": input_hash(c, r), "norm": norm.value, "h": grid.h,
                                         "grid_shape": list(grid.shape), "input_points": len(c),
                                         "output_points": len(d)})
    rep.add(CheckResult("r_maximal", res.maximal, res.distance, res.bound,
                        {"witness": res.witness} if res.witness is not None else {}))
    diam = diameter(d)
    cell = grid.quantization(norm)
    rep.add(CheckResult("diameter", diam <= r + cell, max(diam - r, 0.0), cell, {"diameter": diam}))
    if cfg["out"] is not None:
        io.write_csv(cfg["out"], d.points)
    return rep, None


def cmd_verify(cfg):
    c = io.read_cloud(cfg["in"])
    dirs = None
    if cfg["directions"]:
        dirs = sample_sphere(c.dim, cfg["directions"], "uniform" if c.dim == 2 else "fibonacci")
    rep = verify_cloud(c, float(cfg["r"]), cfg["tol"], dirs)
    return rep, None


COMMAND_FUNCS = {"construct": cmd_construct, "family": cmd_family, "rstar": cmd_rstar, "planar": cmd_planar,
                 "reuleaux": cmd_reuleaux, "embed-arc": cmd_embed_arc, "complete": cmd_complete,
                 "verify": cmd_verify}


def run(cfg: JobConfig, stdout=None) -> int:
    """Execute one job; returns the exit status."""
    stdout = stdout or sys.stdout
    cfg.validate()
    rep, text = COMMAND_FUNCS[cfg.command](cfg)
    rep.provenance["config"] = cfg.effective()
    if text:
        print(text, file=stdout)
    print(rep.summary(), file=stdout)
    report_path = cfg["report"]
    if report_path is not None:
        io.write_report(report_path, rep)
    if rep.passed:
        return EXIT_OK
    print(f"checks failed; report: {report_path if report_path else '(not written, use --report)'}",
          file=stdout)
    return EXIT_FAIL


# --------------------------------------------------------------------------- parsing

def _flag(p, *names, **kw):
    p.add_argument(*names, default=argparse.SUPPRESS, **kw)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _flag(common, "--config", dest="config", help="YAML or JSON job file")
    _flag(common, "--emit-config", dest="emit_config", help="write the effective configuration here")
    _flag(common, "--report", help="write the JSON report here")
    _flag(common, "--rng-seed", dest="rng_seed", type=int, help="seed for every random choice (default 0)")
    _flag(common, "-v", "--verbose", dest="verbose", action="count")

    parser = argparse.ArgumentParser(prog="constwidth", parents=[common], allow_abbrev=False,
                                     description="Construct and verify sets of constant width.")
    sub = parser.add_subparsers(dest="command")

    def seed_flags(p):
        _flag(p, "--seed", help="built-in seed name or inline JSON seed spec")
        _flag(p, "--eps", type=float)
        _flag(p, "--dim", type=int)
        _flag(p, "--samples", type=int)
        _flag(p, "--scheme")

    p = sub.add_parser("construct", allow_abbrev=False, parents=[common], help="body from an odd seed function")
    seed_flags(p)
    _flag(p, "--r", type=float)
    _flag(p, "--r-factor", dest="r_factor", type=float)
    _flag(p, "--width-directions", dest="width_directions", type=int)
    _flag(p, "--tol", type=float)
    _flag(p, "--override", action="store_true")
    _flag(p, "--out")

    p = sub.add_parser("family", allow_abbrev=False, parents=[common], help="homotopy of bodies for lambda in [0, 1]")
    seed_flags(p)
    _flag(p, "--r", type=float)
    _flag(p, "--steps", type=int)
    _flag(p, "--lambdas", type=lambda s: [float(v) for v in s.split(",")])
    _flag(p, "--out", help="output directory")

    p = sub.add_parser("rstar", allow_abbrev=False, parents=[common], help="smallest admissible width of a seed")
    _flag(p, "--seed")
    _flag(p, "--eps", type=float)
    _flag(p, "--dim", type=int)
    _flag(p, "--start", type=int)
    _flag(p, "--cap", type=int)
    _flag(p, "--rtol", type=float)

    p = sub.add_parser("planar", allow_abbrev=False, parents=[common], help="curve from a curvature profile")
    _flag(p, "--profile", help="inline JSON profile or a .json/.yaml file")
    _flag(p, "--r", type=float)
    _flag(p, "--steps", type=int)
    _flag(p, "--tol", type=float)
    _flag(p, "--out", help=".svg or .csv")

    p = sub.add_parser("reuleaux", allow_abbrev=False, parents=[common], help="Reuleaux (2k+1)-gon")
    _flag(p, "--k", type=int)
    _flag(p, "--r", type=float)
    _flag(p, "--steps", type=int)
    _flag(p, "--tol", type=float)
    _flag(p, "--out", help=".svg or .csv")

    p = sub.add_parser("embed-arc", allow_abbrev=False, parents=[common], help="extend a curve piece to a constant-width curve")
    _flag(p, "--rho", type=lambda s: parse_inline(s, "rho"), help="number or JSON {const, cos, sin}")
    _flag(p, "--theta-star", dest="theta_star", type=float)
    _flag(p, "--r", type=float)
    _flag(p, "--steps", type=int)
    _flag(p, "--tol", type=float)
    _flag(p, "--out")
    _flag(p, "--profile-out", dest="profile_out")

    p = sub.add_parser("complete", allow_abbrev=False, parents=[common], help="complete a cloud to a maximal set on a grid")
    _flag(p, "--in", dest="in")
    _flag(p, "--r", type=float)
    _flag(p, "--norm")
    _flag(p, "--h", type=float)
    _flag(p, "--budget", type=int)
    _flag(p, "--tol", type=float)
    _flag(p, "--out")

    p = sub.add_parser("verify", allow_abbrev=False, parents=[common], help="check a boundary sample")
    _flag(p, "--in", dest="in")
    _flag(p, "--r", type=float)
    _flag(p, "--tol", type=float)
    _flag(p, "--directions", type=int)
    return parser


_META = ("config", "emit_config", "verbose", "command")


def config_from_args(ns: argparse.Namespace) -> JobConfig:
    args = vars(ns)
    command = args.get("command")
    base = load_config(args["config"], command) if "config" in args else None
    if base is None and command is None:
        raise ConfigurationError("no command given")
    cmd = command or base.command
    opts = dict(base.options) if base is not None else {}
    for k, v in args.items():
        if k not in _META:
            opts[k] = v
    if command is not None and "seed" in args and isinstance(args["seed"], str) and args["seed"].lstrip()[:1] == "{":
        opts["seed"] = parse_inline(args["seed"], "seed")
    known = defaults_for(cmd)
    return JobConfig(cmd, {k: v for k, v in opts.items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if getattr(ns, "verbose", 0) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        cfg.validate()
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(ns, "emit_config", None):
        Path(ns.emit_config).write_text(cfg.dump())
    try:
        return run(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstantWidthError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
