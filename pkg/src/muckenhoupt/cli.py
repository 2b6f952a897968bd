"""Config-driven experiment runner.

    muckenhoupt run CONFIG.json [--seed N] [--samples N] [--workers N] [--out DIR]

Writes ``<prefix>_report.json`` (resolved config echoed, verdicts, fitted constants,
per-point records) and one CSV per curve into the output directory.  Exit
status: 0 on completion with a verdict, 2 when the verdict is Inconclusive,
1 on any error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .ap import BallFamily, default_family, doubling_ratio, estimate_ap_constant, subset_ratio_scan
from .density import (
    Constant,
    DistancePower,
    Exponential,
    ProductOfRadialPowers,
    RadialPower,
    ap_membership,
    closed_form_mass,
)
from .errors import MuckenhouptError, NotIntegrable
from .geometry import Ball, Hyperplane, PointSet, Shell, Sphere
from .homogeneity import Verdict, default_schedule, ratio_curve
from .integrate import mass
from .isotropy import IsotropyVerdict, default_isotropy_schedule, isotropy_ratio_curve

EXPERIMENTS = ("mass", "ap-scan", "doubling", "subset-scan", "homogeneity", "isotropy")

DEFAULT_BUDGET = {"samples": 200_000, "quad_abs_tol": 1e-10, "quad_rel_tol": 1e-8}


class ConfigError(MuckenhouptError, ValueError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        self.bare = message
        prefix = f"line {line}: " if line else ""
        super().__init__(prefix + message)


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


# -- density / parameter parsing ----------------------------------------------


def _vec(spec, key, dim, default=None):
    val = spec.get(key, default)
    if val is None:
        raise ConfigError(f"missing key '{key}'", key=key)
    arr = np.asarray(val, dtype=float).reshape(-1)
    if dim is not None and arr.size != dim:
        raise ConfigError(f"'{key}' must have {dim} coordinates, got {arr.size}", key=key)
    return arr


def _unit(n, axis=0):
    e = np.zeros(n)
    e[axis] = 1.0
    return e


def density_from_config(spec: dict):
    """Build a density from ``{"kind": ..., "dim": ..., ...}``."""
    if "kind" not in spec:
        raise ConfigError("density needs a 'kind'", key="density")
    kind = spec["kind"]
    dim = spec.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ConfigError("density needs an integer 'dim'", key="density")
    if kind == "constant":
        return Constant(spec.get("value", 1.0), dim)
    if kind == "radial_power":
        return RadialPower(_vec(spec, "center", dim, [0.0] * dim), _req(spec, "beta"))
    if kind == "product":
        facs = spec.get("factors")
        if not facs:
            raise ConfigError("product density needs 'factors'", key="kind")
        return ProductOfRadialPowers(tuple((_vec(f, "center", dim), _req(f, "beta")) for f in facs))
    if kind == "distance_power":
        return DistancePower(_set_from_config(_req(spec, "set"), dim), _req(spec, "beta"))
    if kind == "exponential":
        return Exponential(_vec(spec, "direction", dim, _unit(dim)), _req(spec, "rate"))
    raise ConfigError(f"unknown density kind '{kind}'", key="kind")


def _req(spec, key):
    if key not in spec:
        raise ConfigError(f"missing key '{key}'", key=key)
    return spec[key]


def _set_from_config(spec, dim):
    kind = _req(spec, "kind")
    if kind == "hyperplane":
        return Hyperplane(_vec(spec, "normal", dim), spec.get("offset", 0.0))
    if kind == "sphere":
        return Sphere(_vec(spec, "center", dim, [0.0] * dim), _req(spec, "radius"))
    if kind == "points":
        pts = np.asarray(_req(spec, "points"), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ConfigError(f"'points' must be a list of {dim}-vectors", key="points")
        return PointSet(pts)
    raise ConfigError(f"unknown set kind '{kind}'", key="set")


def _ball(spec, dim):
    return Ball(_vec(spec, "center", dim, [0.0] * dim), _req(spec, "radius"))


_PARAM_DEFAULTS = {
    "mass": {"region": None},
    "ap-scan": {"p": 2.0, "j_min": -6, "j_max": 12, "centers": None},
    "doubling": {"balls": None, "p": None, "C": None},
    "subset-scan": {"ball": None, "thetas": [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9], "p": None, "C": None},
    "homogeneity": {"x1": None, "x2": None, "schedule": None, "tol": 0.02},
    "isotropy": {"x1": None, "v1": None, "x2": None, "v2": None, "schedule": None, "tol": 0.05},
}


def resolve_config(raw: dict, *, seed=None, samples=None) -> dict:
    """Fill defaults and apply command-line overrides; returns a new dict."""
    cfg = copy.deepcopy(raw)
    if seed is not None:
        cfg["seed"] = seed
    if "seed" not in cfg:
        raise ConfigError("a 'seed' is required (in the config or via --seed)", 1)
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or not 0 <= cfg["seed"] < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {cfg['seed']!r}", key="seed")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"'experiment' must be one of {', '.join(EXPERIMENTS)}; got {exp!r}", key="experiment")
    if "density" not in cfg or not isinstance(cfg["density"], dict):
        raise ConfigError("missing 'density' object", 1)
    params = dict(_PARAM_DEFAULTS[exp])
    params.update(cfg.get("parameters", {}))
    cfg["parameters"] = params
    budget = dict(DEFAULT_BUDGET)
    budget.update(cfg.get("budget", {}))
    if samples is not None:
        budget["samples"] = samples
    if not isinstance(budget["samples"], int) or budget["samples"] < 100:
        raise ConfigError(f"budget.samples must be an integer >= 100, got {budget['samples']!r}", key="samples")
    cfg["budget"] = budget
    out = {"dir": "out", "prefix": exp}
    out.update(cfg.get("output", {}))
    cfg["output"] = out
    return cfg


_REQUIRED = {
    "mass": ("region",),
    "doubling": ("balls",),
    "subset-scan": ("ball",),
    "homogeneity": ("x1", "x2"),
    "isotropy": ("x1", "v1", "x2", "v2"),
}


def _check_parameters(cfg, d):
    """Check required parameters and resolve the geometry-dependent defaults."""
    params = cfg["parameters"]
    _missing(params, *_REQUIRED.get(cfg["experiment"], ()))
    if params.get("schedule") is None:
        if cfg["experiment"] == "homogeneity":
            x1 = _vec(params, "x1", d.dim)
            dist = float(np.linalg.norm(x1 - _vec(params, "x2", d.dim)))
            params["schedule"] = default_schedule(dist) if dist > 0 else [2.0**j for j in range(8)]
        elif cfg["experiment"] == "isotropy":
            params["schedule"] = default_isotropy_schedule(
                d, _vec(params, "x1", d.dim), _vec(params, "x2", d.dim)
            )


def _missing(params, *keys):
    for k in keys:
        if params.get(k) is None:
            raise ConfigError(f"parameters.{k} is required", key=k)


# -- serialization -------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _ball_cols(b: Ball):
    return [*b.center.tolist(), b.radius]


def _ball_header(n):
    return [f"c{i}" for i in range(n)] + ["radius"]


# -- experiments -----------------------------------------------------------------


def _run_mass(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    _missing(p, "region")
    reg = p["region"]
    if reg.get("inner", 0.0):
        region = Shell(_vec(reg, "center", d.dim), reg["inner"], _req(reg, "radius"))
    else:
        region = _ball(reg, d.dim)
    est = mass(d, region, budget["samples"], cfg["seed"], workers=workers,
               closed_form=p.get("closed_form", True))
    exact = closed_form_mass(d, region)
    result = {"mass": est.to_dict(), "closed_form": exact}
    rows = [[est.value, est.std_error, est.n_samples, est.method.value, exact]]
    csvs = {"mass": (["value", "std_error", "n_samples", "method", "closed_form"], rows)}
    return result, csvs, None


def _run_ap_scan(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    ps = p["p"] if isinstance(p["p"], list) else [p["p"]]
    fam = default_family(d, p["j_min"], p["j_max"])
    if p.get("centers"):
        fam = BallFamily([np.asarray(c, float) for c in p["centers"]], fam.radii)
    scans, rows = [], []
    for q in ps:
        scan = estimate_ap_constant(d, float(q), fam, budget["samples"], cfg["seed"], workers=workers)
        scans.append(scan.to_dict())
        for rec in scan.records:
            rows.append([q, *_ball_cols(rec.ball), rec.product, rec.std_error, rec.error])
    header = ["p", *_ball_header(d.dim), "product", "std_error", "error"]
    verdict = "; ".join(s["verdict"] for s in scans)
    return {"scans": scans}, {"ap_scan": (header, rows)}, verdict


def _run_doubling(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    _missing(p, "balls")
    reports, rows = [], []
    for i, spec in enumerate(p["balls"]):
        rep = doubling_ratio(d, _ball(spec, d.dim), budget["samples"], cfg["seed"] + i,
                             C=p["C"], p=p["p"], workers=workers)
        reports.append({**rep.to_dict(), "within_bound": rep.within_bound})
        rows.append([*_ball_cols(rep.ball), rep.ratio, rep.std_error, rep.bound, rep.within_bound])
    header = [*_ball_header(d.dim), "ratio", "std_error", "bound", "within_bound"]
    verdict = None
    if p["C"] is not None and p["p"] is not None:
        verdict = "doubling bound holds" if all(r["within_bound"] for r in reports) else "doubling bound violated"
    return {"reports": reports}, {"doubling": (header, rows)}, verdict


def _run_subset(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    _missing(p, "ball")
    scan = subset_ratio_scan(d, _ball(p["ball"], d.dim), p["thetas"], budget["samples"], cfg["seed"],
                             C=p["C"], p=p["p"], workers=workers)
    rows = [[pt.theta, pt.volume_ratio, pt.mass_ratio, pt.std_error, pt.lower_bound_holds] for pt in scan.points]
    header = ["theta", "volume_ratio", "mass_ratio", "std_error", "lower_bound_holds"]
    return {"scan": scan.to_dict()}, {"subset_scan": (header, rows)}, None


def _run_homogeneity(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    _missing(p, "x1", "x2")
    curve = ratio_curve(d, p["x1"], p["x2"], p["schedule"], budget["samples"], cfg["seed"],
                        workers=workers, tol=p["tol"])
    return {"curve": curve.to_dict()}, {"homogeneity": (curve.header, curve.rows())}, curve.verdict


def _run_isotropy(d, cfg, workers):
    p, budget = cfg["parameters"], cfg["budget"]
    _missing(p, "x1", "v1", "x2", "v2")
    curve = isotropy_ratio_curve(d, (p["x1"], p["v1"]), (p["x2"], p["v2"]), p["schedule"],
                                 abs_tol=budget["quad_abs_tol"], rel_tol=budget["quad_rel_tol"], tol=p["tol"])
    return {"curve": curve.to_dict()}, {"isotropy": (curve.header, curve.rows())}, curve.verdict


_RUNNERS = {
    "mass": _run_mass,
    "ap-scan": _run_ap_scan,
    "doubling": _run_doubling,
    "subset-scan": _run_subset,
    "homogeneity": _run_homogeneity,
    "isotropy": _run_isotropy,
}


def run(cfg: dict, out_dir: Path | None = None, workers: int = 1) -> int:
    """Run a resolved config and write its artifacts; returns the exit status."""
    d = density_from_config(cfg["density"])
    result, csvs, verdict = _RUNNERS[cfg["experiment"]](d, cfg, workers)
    out = Path(out_dir if out_dir is not None else cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    prefix = cfg["output"]["prefix"]
    memberships = {}
    for q in (1.0, 2.0, 4.0):
        memberships[str(q)] = ap_membership(d, q).value
    inconclusive = verdict in (Verdict.INCONCLUSIVE, IsotropyVerdict.INCONCLUSIVE)
    report = {
        "config": cfg,
        "verdict": verdict.value if hasattr(verdict, "value") else verdict,
        "ap_membership": memberships,
        "result": result,
        "csv": sorted(f"{prefix}_{name}.csv" for name in csvs),
    }
    with open(out / f"{prefix}_report.json", "w") as fh:
        json.dump(_jsonable(report), fh, indent=2)
        fh.write("\n")
    for name, (header, rows) in csvs.items():
        write_csv(out / f"{prefix}_{name}.csv", header, rows)
    return 2 if inconclusive else 0


def load_config(path: str, *, seed=None, samples=None) -> dict:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1)
    try:
        cfg = resolve_config(raw, seed=seed, samples=samples)
        _check_parameters(cfg, density_from_config(cfg["density"]))
    except ConfigError as exc:
        line = exc.line or (_line_of(text, exc.key) if exc.key else None)
        raise ConfigError(exc.bare, line or 1) from None
    return cfg


def _u64(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="muckenhoupt", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=_u64, help="override the config seed")
    r.add_argument("--samples", type=int, help="Monte Carlo samples per mass estimate")
    r.add_argument("--workers", type=int, default=1, help="threads for chunked sampling (does not change results)")
    r.add_argument("--out", help="output directory")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, samples=args.samples)
        return run(cfg, args.out, max(1, args.workers))
    except NotIntegrable as exc:
        print(f"error: density violates integrability: {exc}", file=sys.stderr)
        return 1
    except (MuckenhouptError, OSError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
