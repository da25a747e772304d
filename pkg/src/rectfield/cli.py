"""Command-line front end: config parsing, check suites, CSV emission.

Configuration is a single strict JSON object (unknown keys are fatal) that
can also be assembled from command-line flags; all randomness flows from
the config seed.  Every run echoes its parsed configuration to
``config_echo.json`` in the output directory, writes CSV artifacts with a
header row and 17-significant-digit floats, and prints one summary line per
check.  Exit codes: 0 success, 1 failed check (reports still written),
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import movingavg, quadrature, spectral
from .increments import ProbePlan, classify_stationarity
from .kernels import (
    FBS,
    FieldSpec,
    MildTheta,
    MovingPair,
    Strict2D,
    StrictGeneral,
    StrictWeights,
    YHalf,
    ZHalf,
    make_kernel,
)
from .lamperti import c_theta, mild_criterion_residual, StationaryCov
from .simulate import (
    Grid,
    cov_matrix,
    empirical_cov,
    grid_from_axes,
    limit_partial_sums,
    mc_increment_stationarity,
    sample_field,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main"]


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (tuple, list, np.ndarray)):
        return "[" + " ".join(f"{float(v):.17g}" for v in np.atleast_1d(x)) + "]"
    return str(x)


# --------------------------------------------------------------------------
# Field-spec (de)serialization
# --------------------------------------------------------------------------

_SPEC_FIELDS = {
    "fbs": {"H"},
    "strict": {"H", "weights"},
    "strict2d": {"H", "gamma"},
    "mildtheta": {"H", "theta"},
    "yhalf": {"theta"},
    "zhalf": {"gamma"},
    "movingpair": {"H", "d0", "d1"},
}


def _signs_from_key(key: str) -> tuple:
    table = {"+": 1, "-": -1}
    try:
        return tuple(table[c] for c in key)
    except (KeyError, TypeError):
        raise ConfigError(
            f"spec.weights: keys must be strings of '+'/'-', got {key!r}") from None


def _key_from_signs(e) -> str:
    return "".join("+" if v > 0 else "-" for v in e)


def spec_from_dict(d) -> FieldSpec:
    if not isinstance(d, dict):
        raise ConfigError("spec: expected a JSON object")
    family = d.get("family")
    if family is None:
        raise ConfigError("spec.family: missing")
    if family not in _SPEC_FIELDS:
        raise ConfigError(f"spec.family: unknown family {family!r} "
                          f"(known: {sorted(_SPEC_FIELDS)})")
    keys = set(d) - {"family"}
    extra = keys - _SPEC_FIELDS[family]
    if extra:
        raise ConfigError(f"spec: unknown keys {sorted(extra)} for {family!r}")
    missing = _SPEC_FIELDS[family] - keys
    if missing:
        raise ConfigError(f"spec: missing keys {sorted(missing)} for {family!r}")
    try:
        if family == "fbs":
            return FBS(tuple(float(h) for h in d["H"]))
        if family == "strict":
            w = {_signs_from_key(k): float(v) for k, v in d["weights"].items()}
            return StrictGeneral(tuple(float(h) for h in d["H"]),
                                 StrictWeights(w))
        if family == "strict2d":
            h1, h2 = (float(h) for h in d["H"])
            return Strict2D(h1, h2, float(d["gamma"]))
        if family == "mildtheta":
            h1, h2 = (float(h) for h in d["H"])
            return MildTheta(h1, h2, float(d["theta"]))
        if family == "yhalf":
            return YHalf(float(d["theta"]))
        if family == "zhalf":
            return ZHalf(float(d["gamma"]))
        h1, h2 = (float(h) for h in d["H"])
        return MovingPair(h1, h2, float(d["d0"]), float(d["d1"]))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"spec ({family}): {exc}") from exc


def spec_to_dict(spec: FieldSpec) -> dict:
    d = {"family": spec.family}
    if isinstance(spec, FBS):
        d["H"] = list(spec.H)
    elif isinstance(spec, StrictGeneral):
        d["H"] = list(spec.H)
        d["weights"] = {_key_from_signs(e): g for e, g in
                        sorted(spec.weights.gamma_by_sign.items())}
    elif isinstance(spec, Strict2D):
        d["H"] = [spec.h1, spec.h2]
        d["gamma"] = spec.gamma
    elif isinstance(spec, MildTheta):
        d["H"] = [spec.h1, spec.h2]
        d["theta"] = spec.theta
    elif isinstance(spec, YHalf):
        d["theta"] = spec.theta
    elif isinstance(spec, ZHalf):
        d["gamma"] = spec.gamma
    elif isinstance(spec, MovingPair):
        d["H"] = [spec.h1, spec.h2]
        d["d0"] = spec.d0
        d["d1"] = spec.d1
    return d


# --------------------------------------------------------------------------
# Config validation
# --------------------------------------------------------------------------

_COMMANDS = ("cov", "density", "check", "classify", "simulate", "mc",
             "limit-demo")

_COMMON_KEYS = {"command", "seed", "tol", "out", "n_samples"}
_COMMAND_KEYS = {
    "cov": {"spec", "s", "t"},
    "density": {"spec", "x"},
    "check": {"suite"},
    "classify": {"spec", "probes"},
    "simulate": {"spec", "grid", "n_workers"},
    "mc": {"spec", "probes", "n_workers"},
    "limit-demo": {"r1", "r2", "t_axes", "t_points", "n_reps"},
}
_PROBE_KEYS = {"n_pairs", "n_shifts", "box", "shift_box", "seed"}
_DEFAULT_TOL = {"check": 1e-6, "cov": 1e-6, "density": 1e-6,
                "classify": 1e-6, "simulate": 1e-6, "mc": 1e-6,
                "limit-demo": 1e-6}
_DEFAULT_N = {"simulate": 5000, "mc": 20000}


def _point_list(value, name):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected numbers") from None
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ConfigError(f"{name}: expected a point or a list of points")
    return arr


@dataclass
class RunConfig:
    command: str
    spec: FieldSpec | None
    params: dict

    def canonical(self) -> dict:
        out = {"command": self.command}
        if self.spec is not None:
            out["spec"] = spec_to_dict(self.spec)
        for k in sorted(self.params):
            v = self.params[k]
            if isinstance(v, np.ndarray):
                v = v.tolist()
            out[k] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.canonical(), indent=2, sort_keys=True)

    def __eq__(self, other):
        return (isinstance(other, RunConfig)
                and self.canonical() == other.canonical())


def validate_config(cfg: dict) -> RunConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a JSON object")
    command = cfg.get("command")
    if command is None:
        raise ConfigError("command: missing")
    if command not in _COMMANDS:
        raise ConfigError(f"command: unknown command {command!r} "
                          f"(known: {list(_COMMANDS)})")
    allowed = _COMMON_KEYS | _COMMAND_KEYS[command]
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} for command "
                          f"{command!r} (strict mode)")

    params: dict = {}
    params["seed"] = int(cfg.get("seed", 0))
    if not 0 <= params["seed"] < 2**64:
        raise ConfigError(f"seed: must be an unsigned 64-bit integer, "
                          f"got {params['seed']}")
    params["tol"] = float(cfg.get("tol", _DEFAULT_TOL[command]))
    params["out"] = str(cfg.get("out", "."))

    spec = None
    if "spec" in _COMMAND_KEYS[command]:
        if "spec" not in cfg:
            raise ConfigError(f"spec: required for command {command!r}")
        spec = spec_from_dict(cfg["spec"])

    if command == "cov":
        for key in ("s", "t"):
            if key not in cfg:
                raise ConfigError(f"{key}: required for command 'cov'")
            pt = _point_list(cfg[key], key)
            if pt.shape != (1, len(spec.hurst)):
                raise ConfigError(
                    f"{key}: expected one point of dimension {len(spec.hurst)}")
            if np.any(pt < 0.0):
                raise ConfigError(f"{key}: coordinates must be nonnegative")
            params[key] = pt[0].tolist()
    elif command == "density":
        if "x" not in cfg:
            raise ConfigError("x: required for command 'density'")
        pts = _point_list(cfg["x"], "x")
        if pts.shape[1] != len(spec.hurst):
            raise ConfigError(f"x: points must have dimension {len(spec.hurst)}")
        params["x"] = pts.tolist()
    elif command == "check":
        suite = cfg.get("suite")
        if suite not in ("lemmas", "densities", "criteria", "ma"):
            raise ConfigError(f"suite: expected one of lemmas/densities/"
                              f"criteria/ma, got {suite!r}")
        params["suite"] = suite
    elif command in ("classify", "mc"):
        probes = cfg.get("probes", {})
        if not isinstance(probes, dict):
            raise ConfigError("probes: expected an object")
        extra = set(probes) - _PROBE_KEYS
        if extra:
            raise ConfigError(f"probes: unknown keys {sorted(extra)}")
        params["probes"] = {k: (float(v) if k in ("box", "shift_box")
                                else int(v)) for k, v in probes.items()}
        if command == "mc":
            params["n_samples"] = int(cfg.get("n_samples", _DEFAULT_N["mc"]))
            params["n_workers"] = int(cfg.get("n_workers", 1))
    elif command == "simulate":
        grid = cfg.get("grid", {"axes": [[0.5, 1.0, 1.5, 2.0, 2.5]]
                                * len(spec.hurst)})
        if not isinstance(grid, dict) or not ({"axes", "points"} & set(grid)):
            raise ConfigError("grid: expected {'axes': [...]} or {'points': [...]}")
        if set(grid) - {"axes", "points"}:
            raise ConfigError(f"grid: unknown keys {sorted(set(grid) - {'axes', 'points'})}")
        if "axes" in grid and "points" in grid:
            raise ConfigError("grid: give either axes or points, not both")
        params["grid"] = {k: np.asarray(v, dtype=float).tolist()
                          for k, v in grid.items()}
        params["n_samples"] = int(cfg.get("n_samples", _DEFAULT_N["simulate"]))
        params["n_workers"] = int(cfg.get("n_workers", 1))
    elif command == "limit-demo":
        for key in ("r1", "r2"):
            if key not in cfg:
                raise ConfigError(f"{key}: required for command 'limit-demo'")
            params[key] = int(cfg[key])
        if "t_points" in cfg and "t_axes" in cfg:
            raise ConfigError("limit-demo: give either t_axes or t_points")
        if "t_points" in cfg:
            params["t_points"] = _point_list(cfg["t_points"], "t_points").tolist()
        else:
            axes = cfg.get("t_axes", [0.5, 1.0, 1.5, 2.0])
            axes = np.asarray(axes, dtype=float).tolist()
            params["t_axes"] = axes
        params["n_reps"] = int(cfg.get("n_reps", 2000))

    return RunConfig(command=command, spec=spec, params=params)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config; errors cite the offending location."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"JSON parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return validate_config(raw)


# --------------------------------------------------------------------------
# Check suites
# --------------------------------------------------------------------------

def _suite_lemmas(tol):
    rows = []
    for chk in quadrature.identity_sweep():
        rows.append({
            "identity": chk.identity,
            "params": json.dumps(chk.params, sort_keys=True),
            "numeric_re": chk.numeric.real, "numeric_im": chk.numeric.imag,
            "closed_re": chk.closed.real, "closed_im": chk.closed.imag,
            "abs_err": chk.abs_error, "tol": tol,
            "pass": chk.passed(tol),
        })
    return rows


def _zero_row(name, params, value, tol):
    return {"identity": name, "params": json.dumps(params, sort_keys=True),
            "numeric_re": value, "numeric_im": 0.0,
            "closed_re": 0.0, "closed_im": 0.0,
            "abs_err": abs(value), "tol": tol, "pass": abs(value) <= tol}


def _pair_row(name, params, got, want, tol):
    return {"identity": name, "params": json.dumps(params, sort_keys=True),
            "numeric_re": got, "numeric_im": 0.0,
            "closed_re": want, "closed_im": 0.0,
            "abs_err": abs(got - want), "tol": tol,
            "pass": abs(got - want) <= tol}


def _suite_densities(tol):
    rows = []
    xs = np.arange(-10.0, 10.0 + 1e-9, 0.1)
    rel = max(abs(spectral.g_fbm(0.5, x) - spectral.g_w(x)) / spectral.g_w(x)
              for x in xs)
    rows.append(_zero_row("half_reduces_to_cauchy", {"grid": "[-10,10]/0.1"},
                          rel, 1e-10))
    for H in (0.1, 0.3, 0.5, 0.7, 0.9):
        mass = spectral.cov_from_density(spectral.fbm_density(H), (0.0,)).value
        rows.append(_pair_row("unit_mass", {"H": H}, mass, 1.0, 1e-6))
    from .lamperti import c_fbs_stationary
    for H in (0.3, 0.7):
        for v in (-2.0, 0.7, 2.5):
            got = spectral.cov_from_density(spectral.fbm_density(H), (v,)).value
            want = c_fbs_stationary((H,), (v,))
            rows.append(_pair_row("fourier_reconstruction", {"H": H, "v": v},
                                  got, want, 1e-4))
    for H, s, t in ((0.3, 1.0, 2.0), (0.7, 0.5, 3.0), (0.5, 1.0, math.e)):
        spec_v, closed_v = spectral.fbm_spectral_cov_check(H, s, t)
        rows.append(_pair_row("fbm_spectral_representation",
                              {"H": H, "s": s, "t": t}, spec_v, closed_v, 1e-4))
    return rows


def _suite_criteria(tol):
    rows = []
    vgrid = np.linspace(-3.0, 3.0, 7)
    for h1, h2 in ((0.3, 0.7), (0.5, 0.5)):
        for theta in (-1.0, 1.0):
            C = StationaryCov(2, lambda v, a=h1, b=h2, th=theta: c_theta(a, b, th, v))
            worst = max(abs(mild_criterion_residual(C, (h1, h2), (v1, v2)))
                        for v1 in vgrid for v2 in vgrid)
            rows.append(_zero_row("mild_criterion", {"H": [h1, h2],
                                                     "theta": theta},
                                  worst, 1e-12))
    H = (0.3, 0.7)
    dens = spectral.product_density(H)
    worst = max(abs(spectral.density_criterion_residual(dens, H, (x1, x2)))
                for x1 in (-2.0, 0.5, 1.5) for x2 in (-1.0, 0.4, 2.0))
    rows.append(_zero_row("density_criterion_even", {"H": list(H)}, worst, 1e-12))

    def perturbed(x):
        x = np.atleast_1d(x)
        return (spectral.g_product(H, x)
                * (1.0 + 0.5 * math.tanh(x[0]) * math.tanh(x[1])))

    fdens = spectral.SpectralDensity(2, perturbed)
    worst = max(abs(spectral.density_criterion_residual(fdens, H, (x1, x2)))
                for x1 in (-2.0, 0.5, 1.5) for x2 in (-1.0, 0.4, 2.0))
    rows.append(_zero_row("density_criterion_odd_perturbation",
                          {"H": list(H), "delta": 0.5}, worst, 1e-12))
    scaled = spectral.SpectralDensity(
        2, lambda x: 1.1 * spectral.g_product(H, x))
    resid = spectral.density_criterion_residual(scaled, H, (0.5, 0.4))
    expect = 0.1 * 4 * spectral.g_product(H, (0.5, 0.4))
    rows.append(_pair_row("density_criterion_detects_scaling",
                          {"H": list(H)}, resid, expect, 1e-12))
    return rows


def _suite_ma(tol):
    from .kernels import cov_fbs
    rows = []
    for h1, h2, d0, d1 in ((0.3, 0.7, 1.0, 0.0), (0.5, 0.5, 1.0, 0.0),
                           (0.5, 0.5, 0.0, 1.0)):
        chk = movingavg.validate_dd(h1, h2, d0, d1)
        rows.append(_zero_row("dd_constraint", {"H": [h1, h2], "d0": d0,
                                                "d1": d1}, chk.residual, 1e-12))
    d0 = d1 = 1.0 / math.sqrt(3.0)
    chk = movingavg.validate_dd(0.25, 0.25, d0, d1)
    rows.append(_zero_row("dd_constraint", {"H": [0.25, 0.25], "d0": d0,
                                            "d1": d1}, chk.residual, 1e-12))

    spec = MovingPair(0.3, 0.7, 1.0, 0.0)
    rng = np.random.default_rng(5)
    for _ in range(4):
        s = rng.uniform(0.3, 2.0, 2)
        t = rng.uniform(0.3, 2.0, 2)
        got = movingavg.cov_moving_pair(spec, s, t)
        want = cov_fbs((0.3, 0.7), s, t)
        rows.append(_pair_row("ma_reproduces_fbs",
                              {"s": list(s), "t": list(t)}, got, want, 1e-3))
    sin2 = math.sin(math.pi * 0.3) * math.sin(math.pi * 0.7)
    for d0 in (1.0, 0.4, -0.6):
        d1 = -d0 * sin2 + math.sqrt(max(d0 * d0 * (sin2 * sin2 - 1.0) + 1.0, 0.0))
        sp = MovingPair(0.3, 0.7, d0, d1)
        got = movingavg.cov_moving_pair(sp, (1.0, 1.0), (1.0, 1.0))
        rows.append(_pair_row("unit_variance_on_constraint",
                              {"d0": d0, "d1": d1}, got, 1.0, 1e-3))
    sp = MovingPair(0.5, 0.5, 0.0, 1.0)
    got = movingavg.cov_moving_pair(sp, (1.0, 1.0), (1.0, 1.0))
    rows.append(_pair_row("unit_variance_half_pair", {"d0": 0.0, "d1": 1.0},
                          got, 1.0, 1e-3))
    return rows


_SUITES = {"lemmas": _suite_lemmas, "densities": _suite_densities,
           "criteria": _suite_criteria, "ma": _suite_ma}


# --------------------------------------------------------------------------
# Command execution
# --------------------------------------------------------------------------

def _write_csv(path: Path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def run(config: RunConfig) -> int:
    """Execute a validated config; write CSV artifacts and echo the config."""
    out_dir = Path(config.params["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_echo.json").write_text(config.to_json() + "\n")
    handler = _HANDLERS[config.command]
    return handler(config, out_dir)


def _run_cov(cfg, out_dir):
    kernel = make_kernel(cfg.spec)
    value = kernel.evaluate(cfg.params["s"], cfg.params["t"])
    _write_csv(out_dir / "cov.csv",
               [{"family": cfg.spec.family, "s": cfg.params["s"],
                 "t": cfg.params["t"], "value": value}],
               ["family", "s", "t", "value"])
    print(f"cov[{cfg.spec.family}] K(s,t) = {value:.17g}")
    return 0


def _run_density(cfg, out_dir):
    H = cfg.spec.hurst
    rows = []
    for pt in cfg.params["x"]:
        rows.append({"x": pt, "value": spectral.g_product(H, pt)})
    _write_csv(out_dir / "density.csv", rows, ["x", "value"])
    print(f"density[{cfg.spec.family}] wrote {len(rows)} values")
    return 0


def _run_check(cfg, out_dir):
    suite = cfg.params["suite"]
    rows = _SUITES[suite](cfg.params["tol"])
    cols = ["identity", "params", "numeric_re", "numeric_im", "closed_re",
            "closed_im", "abs_err", "tol", "pass"]
    _write_csv(out_dir / f"check_{suite}.csv", rows, cols)
    n_fail = sum(not r["pass"] for r in rows)
    for r in rows:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status} {r['identity']} {r['params']} abs_err={r['abs_err']:.3e}")
    print(f"suite {suite}: {len(rows) - n_fail}/{len(rows)} passed")
    return 0 if n_fail == 0 else 1


def _probe_plan(cfg):
    opts = cfg.params.get("probes", {})
    if not opts:
        return None
    n = len(cfg.spec.hurst)
    return ProbePlan.default(
        n,
        n_pairs=opts.get("n_pairs", 20),
        n_shifts=opts.get("n_shifts", 10),
        box=opts.get("box", 2.0),
        shift_box=opts.get("shift_box", 3.0),
        seed=opts.get("seed", 20240601))


def _run_classify(cfg, out_dir):
    kernel = make_kernel(cfg.spec)
    report = classify_stationarity(kernel, plan=_probe_plan(cfg))
    label = report.label.value if report.label is not None else "inconclusive"
    _write_csv(out_dir / "classify.csv",
               [{"family": cfg.spec.family, "label": label,
                 "max_var_residual": report.max_var_residual,
                 "max_cross_residual": report.max_cross_residual}],
               ["family", "label", "max_var_residual", "max_cross_residual"])
    probe_rows = [{"kind": r["kind"], "u1": r["u1"], "u2": r["u2"],
                   "h": r["h"], "value": r["value"],
                   "reference": r["reference"], "residual": r["residual"]}
                  for r in report.rows]
    _write_csv(out_dir / "classify_probes.csv", probe_rows,
               ["kind", "u1", "u2", "h", "value", "reference", "residual"])
    print(f"classify[{cfg.spec.family}] -> {label} "
          f"(var {report.max_var_residual:.2e}, cross {report.max_cross_residual:.2e})")
    return 0 if report.label is not None else 1


def _run_simulate(cfg, out_dir):
    grid_cfg = cfg.params["grid"]
    if "axes" in grid_cfg:
        grid = grid_from_axes(grid_cfg["axes"])
    else:
        grid = Grid(np.asarray(grid_cfg["points"], dtype=float))
    batch = sample_field(cfg.spec, grid, cfg.params["seed"],
                         cfg.params["n_samples"],
                         n_workers=cfg.params["n_workers"])
    kernel = make_kernel(cfg.spec)
    analytic = cov_matrix(kernel, grid)
    emp, se = empirical_cov(batch, analytic)

    t_cols = [f"t{k + 1}" for k in range(grid.dim)]
    grid_rows = [dict({"index": i},
                      **{c: grid.points[i, k] for k, c in enumerate(t_cols)})
                 for i in range(grid.n_points)]
    _write_csv(out_dir / "grid.csv", grid_rows, ["index"] + t_cols)
    sample_rows = [{"rep": r, "point": p, "value": batch.values[r, p]}
                   for r in range(batch.n_samples)
                   for p in range(grid.n_points)]
    _write_csv(out_dir / "samples.csv", sample_rows, ["rep", "point", "value"])

    report_rows, within = [], 0
    for i in range(grid.n_points):
        for j in range(i, grid.n_points):
            z = (emp[i, j] - analytic[i, j]) / se[i, j]
            within += abs(z) <= 4.0
            report_rows.append({"probe": f"{i}-{j}", "statistic": "cov",
                                "estimate": emp[i, j], "se": se[i, j],
                                "reference": analytic[i, j], "z": z})
    _write_csv(out_dir / "report.csv", report_rows,
               ["probe", "statistic", "estimate", "se", "reference", "z"])
    total = len(report_rows)
    frac = within / total
    print(f"simulate[{cfg.spec.family}] n={batch.n_samples} "
          f"{within}/{total} covariance entries within 4 SE")
    return 0 if frac >= 0.95 else 1


def _run_mc(cfg, out_dir):
    rows = mc_increment_stationarity(
        cfg.spec, plan=_probe_plan(cfg), seed=cfg.params["seed"],
        n_samples=cfg.params["n_samples"],
        n_workers=cfg.params["n_workers"])
    out_rows = [{"probe": r["probe"], "kind": r["kind"], "h": r["h"],
                 "estimate": r["estimate"], "se": r["se"],
                 "reference": r["reference"], "analytic": r["analytic"],
                 "z_reference": r["z_reference"],
                 "z_analytic": r["z_analytic"]} for r in rows]
    _write_csv(out_dir / "mc.csv", out_rows,
               ["probe", "kind", "h", "estimate", "se", "reference",
                "analytic", "z_reference", "z_analytic"])
    bad = sum(abs(r["z_analytic"]) > 4.0 for r in rows)
    print(f"mc[{cfg.spec.family}] {len(rows) - bad}/{len(rows)} probes "
          f"within 4 SE of analytic increment covariance")
    return 0 if bad / max(len(rows), 1) <= 0.05 else 1


def _run_limit_demo(cfg, out_dir):
    if "t_points" in cfg.params:
        t_points = np.asarray(cfg.params["t_points"], dtype=float)
    else:
        axes = cfg.params["t_axes"]
        t_points = np.asarray([(a, b) for a in axes for b in axes])
    demo = limit_partial_sums(cfg.params["r1"], cfg.params["r2"], t_points,
                              seed=cfg.params["seed"],
                              n_reps=cfg.params["n_reps"])
    rows, ok = [], 0
    m = len(t_points)
    for i in range(m):
        for j in range(i, m):
            bound = 0.05 * abs(demo.limit_cov[i, j]) + 4.0 * demo.se[i, j]
            passed = abs(demo.emp_cov[i, j] - demo.limit_cov[i, j]) <= bound
            ok += passed
            rows.append({"t_i": t_points[i], "t_j": t_points[j],
                         "estimate": demo.emp_cov[i, j], "se": demo.se[i, j],
                         "exact_prelimit": demo.exact_cov[i, j],
                         "limit": demo.limit_cov[i, j], "pass": passed})
    _write_csv(out_dir / "limit_demo.csv", rows,
               ["t_i", "t_j", "estimate", "se", "exact_prelimit", "limit",
                "pass"])
    total = len(rows)
    print(f"limit-demo r=({cfg.params['r1']},{cfg.params['r2']}) "
          f"n_reps={demo.n_reps}: {ok}/{total} entries within 5% + 4 SE "
          f"of the limit covariance")
    return 0 if ok == total else 1


_HANDLERS = {
    "cov": _run_cov,
    "density": _run_density,
    "check": _run_check,
    "classify": _run_classify,
    "simulate": _run_simulate,
    "mc": _run_mc,
    "limit-demo": _run_limit_demo,
}


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rectfield",
        description="Self-similar Gaussian random fields: kernels, spectral "
                    "densities, oracle checks, and exact simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", help="output directory for CSV artifacts")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--n-samples", type=int, dest="n_samples")

    def spec_flags(p):
        p.add_argument("--spec", help="family name (fbs, strict2d, ...)")
        p.add_argument("--H", type=float, nargs="+", help="Hurst components")
        p.add_argument("--theta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--d0", type=float)
        p.add_argument("--d1", type=float)

    p = sub.add_parser("cov", help="evaluate a covariance kernel at (s, t)")
    common(p); spec_flags(p)
    p.add_argument("--s", type=float, nargs="+")
    p.add_argument("--t", type=float, nargs="+")

    p = sub.add_parser("density", help="evaluate a spectral density")
    common(p); spec_flags(p)
    p.add_argument("--x", type=float, nargs="+")

    p = sub.add_parser("check", help="run a verification suite")
    common(p)
    p.add_argument("--suite", choices=("lemmas", "densities", "criteria", "ma"))

    p = sub.add_parser("classify", help="classify increment stationarity")
    common(p); spec_flags(p)

    p = sub.add_parser("simulate", help="sample a field and verify covariance")
    common(p); spec_flags(p)
    p.add_argument("--n-workers", type=int, dest="n_workers")

    p = sub.add_parser("mc", help="Monte Carlo increment-stationarity probes")
    common(p); spec_flags(p)
    p.add_argument("--n-workers", type=int, dest="n_workers")

    p = sub.add_parser("limit-demo", help="partial-sum convergence demo")
    common(p)
    p.add_argument("--r1", type=int)
    p.add_argument("--r2", type=int)
    p.add_argument("--n-reps", type=int, dest="n_reps")
    return parser


def _spec_dict_from_flags(args) -> dict | None:
    if getattr(args, "spec", None) is None:
        return None
    d = {"family": args.spec}
    if args.H is not None:
        d["H"] = list(args.H)
    for key in ("theta", "gamma", "d0", "d1"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    return d


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg: dict = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"config error: cannot read {args.config}: {exc}",
                  file=sys.stderr)
            return 2
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            print(f"config error: JSON parse error at line {exc.lineno}, "
                  f"column {exc.colno}: {exc.msg}", file=sys.stderr)
            return 2
        if not isinstance(raw, dict):
            print("config error: top level: expected a JSON object",
                  file=sys.stderr)
            return 2
        cfg.update(raw)
    cfg["command"] = args.command
    spec_d = _spec_dict_from_flags(args)
    if spec_d is not None:
        cfg["spec"] = spec_d
    for key in ("out", "seed", "tol", "n_samples", "n_workers", "suite",
                "r1", "r2", "n_reps"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    for key in ("s", "t", "x"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = list(v)
    try:
        config = validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
