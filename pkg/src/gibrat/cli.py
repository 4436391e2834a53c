"""Command-line experiment runner.

Every subcommand reads an optional JSON config, fills in defaults, writes
the fully resolved config to ``<out>/config.json`` and emits CSV/JSON
results whose header lines carry the SHA-256 of that resolved config.
Replaying ``--config <out>/config.json`` reproduces every CSV body byte
for byte; only the ``# generated`` header line differs.

Exit codes: 0 ok, 2 configuration error or refused input, 3 numerical
failure, 4 failed self-check.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import diffusion, first_order, fourier_metric, kinetic_mc, oracles, wild_series
from .effects import EffectDistribution, make_scaled_bounded, make_symmetric_two_point
from .errors import ConfigError, DomainError, NumericalError, ResourceError
from .grids import CharacteristicFunctionGrid, GridDensity, log_grid

SCHEMA_VERSION = 1
ENV_PREFIX = "GIBRAT_"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFCHECK = 0, 2, 3, 4

_GRID = {"x_min": 1e-12, "x_max": 1e12, "n": 2048}

DEFAULTS = {
    "moments": {
        "effect": {"kind": "two_point_first_order", "epsilon": 0.1},
        "initial": {"kind": "dirac", "x0": 1.0},
        "n_particles": 100_000,
        "frequency": 1.0,
        "times": [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        "orders": [0, 1, 2, 3],
        "workers": 1,
    },
    "simulate": {
        "effect": {"kind": "symmetric_two_point", "epsilon": 0.01},
        "initial": {"kind": "dirac", "x0": 1.0},
        "n_particles": 100_000,
        "frequency": 1.0,
        "tau": 50.0,
        "bins": {"x_min": 1e-3, "x_max": 1e3, "n": 60},
        "workers": 1,
        "save_sizes": False,
    },
    "wild": {
        "t": 0.5,
        "epsilons": [1e-2, 1e-3, 1e-4],
        "base": None,
        "xi_min": 0.1,
        "xi_max": 10.0,
        "n_xi": 201,
        "tol": 1e-14,
        "metric_grid": {"xi_min": 1e-3, "xi_max": 1e2, "points_per_decade": 64},
        "third_moment_rate": "6sigma",
    },
    "diffuse": {
        "initial": {"kind": "lognormal", "t0": 0.01, "m": 1.0},
        "times": [0.5, 1.0, 2.0],
        "grid": dict(_GRID),
        "method": "nodes",
        "write_density": True,
    },
    "converge": {
        "initial": {"kind": "bimodal", "weights": [0.9, 0.1], "locs": [0.3, 10.0],
                    "sds": [0.5, 0.5]},
        "times": [1.0, 2.0, 4.0, 8.0, 16.0],
        "grid": dict(_GRID),
        "n": 2048,
        "width": 12.0,
        "slope_window": [-0.65, -0.35],
    },
    "first-order": {
        "initial": {"kind": "lognormal", "t0": 0.25, "m": 1.0},
        "times": [0.0, 0.5, 1.0, 2.0, 4.0],
        "grid": {"x_min": 1e-8, "x_max": 1e8, "n": 2048},
        "write_density": True,
    },
    "metric": {
        "t": 0.5,
        "epsilon": 1e-3,
        "base": None,
        "tol": 1e-14,
        "metric_grid": {"xi_min": 1e-3, "xi_max": 1e2, "points_per_decade": 64},
        "third_moment_rate": "6sigma",
        "refine": True,
    },
}

# sub-records merged key by key; everything else is replaced wholesale
_MERGED = {"grid", "bins", "metric_grid"}


class SelfCheckFailed(Exception):
    pass


# -- configuration --------------------------------------------------------------


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _unknown(keys, allowed, where, text):
    for k in keys:
        if k not in allowed:
            line = _line_of(text, k)
            at = f" (line {line})" if line else ""
            raise ConfigError(f"unknown key {k!r} in {where}{at}; allowed: {sorted(allowed)}")


def load_config(path):
    """Parse a JSON config file; returns ``(record, text)``."""
    text = Path(path).read_text()
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(rec, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return rec, text


def resolve_config(command, record=None, text=None, seed=None, oracle_tol=None):
    """Merge a user record over the defaults of ``command``.

    The record has the shape ``{"schema_version", "command", "seed",
    "oracle_tol", "params": {...}}``; every key is optional except that
    unknown keys anywhere in the fixed schema are errors.
    """
    record = dict(record or {})
    _unknown(record, {"schema_version", "command", "seed", "oracle_tol", "params"},
             "config", text)
    version = record.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    if record.get("command", command) != command:
        raise ConfigError(f"config is for {record['command']!r}, not {command!r}")
    params = copy.deepcopy(DEFAULTS[command])
    user = record.get("params", {})
    if not isinstance(user, dict):
        raise ConfigError("params must be an object")
    _unknown(user, params, f"params of {command!r}", text)
    for k, v in user.items():
        if k in _MERGED and isinstance(params[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"params.{k} must be an object")
            _unknown(v, params[k], f"params.{k}", text)
            params[k].update(v)
        else:
            params[k] = v
    seed = record.get("seed", 0) if seed is None else seed
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    tol = record.get("oracle_tol", 1e-12) if oracle_tol is None else oracle_tol
    try:
        tol = float(tol)
    except (TypeError, ValueError):
        raise ConfigError(f"oracle_tol must be a number, got {tol!r}") from None
    if not 0 < tol < 1:
        raise ConfigError("oracle_tol must lie in (0, 1)")
    return {"schema_version": SCHEMA_VERSION, "command": command, "seed": seed,
            "oracle_tol": tol, "params": params}


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- output -----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Output:
    """Writes result files into one directory, stamping each with the config hash."""

    def __init__(self, out_dir, cfg):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.files = []

    def config(self):
        p = self.dir / "config.json"
        p.write_text(json.dumps(self.cfg, indent=2, sort_keys=True) + "\n")
        self.files.append(p)

    def csv(self, name, columns, rows, note=None):
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        lines = [f"# gibrat {self.cfg['command']}", f"# config_sha256: {self.hash}"]
        if note:
            lines.append(f"# {note}")
        lines.append(f"# generated: {stamp}")
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        p = self.dir / name
        p.write_text("\n".join(lines) + "\n")
        self.files.append(p)
        return p

    def json(self, name, record):
        rec = {"config_sha256": self.hash, **record}
        p = self.dir / name
        p.write_text(json.dumps(rec, indent=2, sort_keys=True, default=_jsonable) + "\n")
        self.files.append(p)
        return p


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if hasattr(v, "as_dict"):
        return v.as_dict()
    raise TypeError(f"not serializable: {type(v)}")


def csv_body(path):
    """Lines of a CSV output with the ``#`` header lines removed."""
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]


# -- builders -------------------------------------------------------------------


def _grid(spec):
    return log_grid(float(spec["x_min"]), float(spec["x_max"]), int(spec["n"]))


def _grid_density(record, x):
    """Initial density on ``x`` for the deterministic solvers."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ConfigError("initial datum needs a 'kind'")
    kind = record["kind"]
    fields = {k: v for k, v in record.items() if k != "kind"}
    try:
        if kind == "lognormal":
            t0 = fields.pop("t0")
            return diffusion.LognormalSource(t0, **fields).on_grid(x)
        if kind == "bimodal":
            return diffusion.bimodal_lognormal(x, **fields)
        if kind == "log_critical_tail":
            # u ~ 1/(x log x)^2 for large x: finite mean, divergent log second moment
            if fields:
                raise TypeError(f"unexpected fields {sorted(fields)}")
            u = 1.0 / ((1.0 + x) ** 2 * np.log(math.e + x) ** 2)
            return GridDensity(x, u / np.trapezoid(x * u, np.log(x)), meta={"initial": kind})
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad fields for initial datum {kind!r}: {exc}") from None
    raise ConfigError(f"unsupported initial datum kind {kind!r}")


def _effect(record):
    if not isinstance(record, dict):
        raise ConfigError("effect must be an object")
    return EffectDistribution.from_config(record)


def _diffusive_effect(base, eps):
    """``sqrt(eps) X`` for the configured base (default: the symmetric ``+-sqrt(2 eps)``)."""
    if base is None:
        return make_symmetric_two_point(eps)
    if not isinstance(base, dict) or set(base) != {"points", "weights"}:
        raise ConfigError("base must be an object with exactly 'points' and 'weights'")
    return make_scaled_bounded(base["points"], base["weights"], eps)


def _kinetic_lognormal_cf(d, t, xi, tol):
    # diffusion time t <-> kinetic time 2 t / (sigma eps); Dirac(1) start
    tau = 2.0 * t / (d.sigma * d.epsilon)
    return wild_series.wild_cf(wild_series.dirac_cf(1.0), d, tau, xi, tol)


def _oracle_spec(cfg):
    tol = cfg["oracle_tol"]
    return oracles.QuadratureSpec(abs_tol=0.1 * tol, rel_tol=tol)


def _oracle_cf(t, xi, spec):
    """Lognormal-source CF on a grid symmetric about 0 (only ``xi > 0`` computed)."""
    pos = xi[xi > 0]
    vals = oracles.lognormal_cf_grid(t, 1.0, pos, spec)
    lookup = dict(zip(pos.tolist(), vals))
    out = np.array([lookup[abs(v)] if v > 0 else np.conj(lookup[-v]) for v in xi.tolist()])
    return CharacteristicFunctionGrid(xi, out, {"provenance": "oracle", "t": t})


# -- subcommands ----------------------------------------------------------------


def run_moments(cfg, out):
    p = cfg["params"]
    d = _effect(p["effect"])
    initial = kinetic_mc.initial_from_config(p["initial"])
    times = [float(v) for v in p["times"]]
    if any(b < a for a, b in zip(times, times[1:])) or times[0] < 0:
        raise ConfigError("times must be nonnegative and nondecreasing")
    orders = [int(n) for n in p["orders"]]
    e = kinetic_mc.init_ensemble(p["n_particles"], initial, cfg["seed"], p["frequency"],
                                 p["workers"])
    rows, bad = [], []
    for tau in times:
        e = kinetic_mc.evolve_exact(e, d, tau - e.time, p["workers"])
        for n in orders:
            emp, se = kinetic_mc.empirical_moment(e, n)
            ana = _initial_moment(initial, n) * math.exp(d.growth_rate(p["frequency"], n) * tau)
            rows.append((tau, n, emp, ana, se))
            if abs(emp - ana) > 4 * se + 1e-12 * abs(ana):
                bad.append((tau, n))
    out.csv("moments.csv", ["tau", "n", "empirical", "analytic", "stderr"], rows,
            "empirical: sample mean of x^n; analytic: m_n(0) exp(lambda_n tau)")
    slopes = {}
    for n in orders:
        sel = [(r[0], r[2]) for r in rows if r[1] == n and r[2] > 0]
        if len(sel) >= 2:
            ts, ms = zip(*sel)
            slopes[str(n)] = float(np.polyfit(ts, np.log(ms), 1)[0])
    rates = {str(n): d.growth_rate(p["frequency"], n) for n in orders}
    out.json("summary.json", {"log_moment_slopes": slopes, "growth_rates": rates,
                              "outside_4_stderr": bad})
    if bad:
        raise SelfCheckFailed(f"moments outside 4 standard errors at (tau, n) = {bad}")


def _initial_moment(initial, n):
    if isinstance(initial, kinetic_mc.Dirac):
        return initial.x0**n
    return initial.m**n * math.exp(n * (n - 1) * initial.t0)


def run_simulate(cfg, out):
    p = cfg["params"]
    d = _effect(p["effect"])
    initial = kinetic_mc.initial_from_config(p["initial"])
    e = kinetic_mc.init_ensemble(p["n_particles"], initial, cfg["seed"], p["frequency"],
                                 p["workers"])
    m0 = _initial_moment(initial, 1)
    e = kinetic_mc.evolve_exact(e, d, float(p["tau"]), p["workers"])
    b = p["bins"]
    edges = np.geomspace(float(b["x_min"]), float(b["x_max"]), int(b["n"]) + 1)
    h = kinetic_mc.histogram(e, edges)
    rows = [(lo, hi, c, v) for lo, hi, c, v in
            zip(edges[:-1], edges[1:], h.meta["counts"], h.values)]
    out.csv("histogram.csv", ["x_left", "x_right", "count", "density"], rows,
            "empirical density of firm sizes")
    if p["save_sizes"]:
        kinetic_mc.save_ensemble(e, out.dir / "ensemble")
    mean, se = kinetic_mc.empirical_moment(e, 1)
    m2, se2 = kinetic_mc.empirical_moment(e, 2)
    out.json("summary.json", {
        "tau": e.time, "n": e.n, "mean": mean, "mean_stderr": se, "m2": m2, "m2_stderr": se2,
        "m2_analytic": _initial_moment(initial, 2) * math.exp(d.growth_rate(p["frequency"], 2)
                                                              * e.time),
        "atom_at_zero": h.atom_at_zero, "underflow": h.meta["underflow"],
        "overflow": h.meta["overflow"],
    })
    if abs(mean - m0 * math.exp(d.growth_rate(p["frequency"], 1) * e.time)) > 4 * se + 1e-12:
        raise SelfCheckFailed("mean size drifted by more than 4 standard errors")


def run_wild(cfg, out):
    p = cfg["params"]
    t = float(p["t"])
    eps = [float(v) for v in p["epsilons"]]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("epsilons must be strictly decreasing")
    xi = np.geomspace(float(p["xi_min"]), float(p["xi_max"]), int(p["n_xi"]))
    spec = _oracle_spec(cfg)
    oracle = oracles.lognormal_cf_grid(t, 1.0, xi, spec)
    mg = fourier_metric.MetricGridSpec(**p["metric_grid"])
    grid = mg.grid()
    oracle_m = _oracle_cf(t, grid, spec)
    rows, sweep = [], []
    for e in eps:
        d = _diffusive_effect(p["base"], e)
        k = _kinetic_lognormal_cf(d, t, xi, p["tol"])
        err = np.abs(k.values - oracle)
        km = _kinetic_lognormal_cf(d, t, grid, p["tol"])
        bp = _bound_params(d, t, p["third_moment_rate"])
        rep = fourier_metric.verify_bound(km, oracle_m, bp, mg)
        rows.extend((e, x, v, rep.bound) for x, v in zip(xi, err))
        sweep.append({"epsilon": e, "sup_error": float(err.max()),
                      "argmax_xi": float(xi[int(err.argmax())]), "d3": rep.measured,
                      "d3_argmax_xi": rep.argmax_xi, "bound": rep.bound,
                      "satisfied": rep.satisfied, "d3_over_sqrt_eps": rep.scaled,
                      "k_max": km.meta["truncation"].k_max})
    out.csv("wild.csv", ["epsilon", "xi", "abs_error", "bound"], rows,
            "abs_error: |wild - oracle| at diffusion time t; bound: d_3 bound")
    sup = [s["sup_error"] for s in sweep]
    d3 = [s["d3"] for s in sweep]
    slope = float(np.polyfit(np.log(eps), np.log(sup), 1)[0]) if len(eps) > 1 else None
    d3_slope = float(np.polyfit(np.log(eps), np.log(d3), 1)[0]) if len(eps) > 1 else None
    ratios = [s["d3_over_sqrt_eps"] for s in sweep]
    out.json("summary.json", {"t": t, "sweep": sweep, "sup_error_slope": slope,
                              "d3_slope": d3_slope,
                              "d3_over_sqrt_eps_spread": max(ratios) / min(ratios)})
    if not all(s["satisfied"] for s in sweep):
        raise SelfCheckFailed("measured d_3 exceeds the bound")


def _base_moment(d, n):
    return d.moment(n) / d.epsilon ** (n / 2)


def _bound_params(d, t, rate):
    # the bound runs on the kinetic clock eps * tau = 2 t / sigma; Dirac(1) has m3 = 1
    return fourier_metric.AppendixBoundParams(d.epsilon, d.sigma, _base_moment(d, 3), 1.0,
                                              2.0 * t / d.sigma, rate)


def run_diffuse(cfg, out):
    p = cfg["params"]
    x = _grid(p["grid"])
    u0 = _grid_density(p["initial"], x)
    m1, m2 = u0.moment(1), u0.moment(2)
    rows, dens, bad = [], [], []
    for t in (float(v) for v in p["times"]):
        u = diffusion.solve(u0, t, method=p["method"])
        mass, mean, sec = u.moment(0), u.moment(1), u.moment(2)
        ratio = sec / m2
        rows.append((t, mass, mean, sec, ratio, math.exp(2 * t)))
        if (abs(mass - u0.moment(0)) > 1e-8 or abs(mean - m1) > 1e-8 * m1
                or abs(ratio / math.exp(2 * t) - 1) > 1e-5):
            bad.append(t)
        if p["write_density"]:
            dens.extend((t, xv, uv) for xv, uv in zip(u.x, u.values))
    out.csv("diffuse.csv", ["t", "mass", "mean", "m2", "m2_ratio", "m2_ratio_analytic"], rows,
            "moments of the solution by quadrature in log x")
    if p["write_density"]:
        out.csv("density.csv", ["t", "x", "u"], dens)
    if bad:
        raise SelfCheckFailed(f"moment laws violated at t = {bad}")


def run_converge(cfg, out, force=False):
    p = cfg["params"]
    u0 = _grid_density(p["initial"], _grid(p["grid"]))
    report = diffusion.check_initial_conditions(u0)
    if not report.admissible and not force:
        raise _Refused(
            "initial datum is not admissible: "
            f"int x log^2 x u0 = {report.log_second_moment}, "
            f"int x u0 log u0 = {report.weighted_entropy}; rerun with --force to proceed"
        )
    series = diffusion.convergence_series(u0, p["times"], int(p["n"]), float(p["width"]))
    rows = [(t, dist) for t, dist, _ in series]
    out.csv("converge.csv", ["t", "weighted_l1"], rows,
            "weighted_l1: int x |u - matched source| dx")
    fit = diffusion.convergence_rate_fit([r[0] for r in rows], [r[1] for r in rows])
    out.json("summary.json", {"slope": fit.slope, "intercept": fit.intercept,
                              "residual": fit.residual, "admissible": report.admissible,
                              "log_second_moment": report.log_second_moment,
                              "weighted_entropy": report.weighted_entropy})
    win = p["slope_window"]
    if win is not None and not win[0] <= fit.slope <= win[1]:
        raise SelfCheckFailed(f"fitted slope {fit.slope} outside {win}")


class _Refused(Exception):
    pass


def run_first_order(cfg, out):
    p = cfg["params"]
    g0 = _grid_density(p["initial"], _grid(p["grid"]))
    m1, m2 = g0.moment(1), g0.moment(2)
    rows, dens, bad = [], [], []
    for t in (float(v) for v in p["times"]):
        g = first_order.density_solution(g0, t)
        atom, mean, sec = g.atom_at_zero, g.moment(1), g.moment(2)
        ana = first_order.moment_law(m2, 2, t)
        rows.append((t, atom, mean, sec, ana))
        if (abs(atom + math.expm1(-t)) > 1e-12 or abs(mean - m1) > 1e-8 * m1
                or abs(sec - ana) > 1e-8 * ana):
            bad.append(t)
        if p["write_density"]:
            dens.extend((t, xv, uv) for xv, uv in zip(g.x, g.values))
    out.csv("first_order.csv", ["t", "atom_at_zero", "mean", "m2", "m2_analytic"], rows,
            "m2_analytic: m2(0) e^t")
    if p["write_density"]:
        out.csv("density.csv", ["t", "x", "continuous_density"], dens)
    out.json("summary.json", {"records": [
        {"t": r[0], "atom_at_zero": r[1], "mean": r[2], "m2": r[3]} for r in rows]})
    if bad:
        raise SelfCheckFailed(f"mixture diagnostics failed at t = {bad}")


def run_metric(cfg, out):
    p = cfg["params"]
    t, e = float(p["t"]), float(p["epsilon"])
    d = _diffusive_effect(p["base"], e)
    mg = fourier_metric.MetricGridSpec(**p["metric_grid"])
    spec = _oracle_spec(cfg)
    fine_spec = mg.refined(2) if p["refine"] else mg
    fine = fine_spec.grid()
    k_fine = _kinetic_lognormal_cf(d, t, fine, p["tol"])
    o_fine = _oracle_cf(t, fine, spec)
    coarse = mg.grid()
    # the doubled grid contains the coarse one; pick its points out exactly
    idx = np.searchsorted(fine, coarse)
    if not np.array_equal(fine[idx], coarse):
        idx = None
    if idx is None:
        k = _kinetic_lognormal_cf(d, t, coarse, p["tol"])
        o = _oracle_cf(t, coarse, spec)
    else:
        k = CharacteristicFunctionGrid(coarse, k_fine.values[idx], k_fine.meta)
        o = CharacteristicFunctionGrid(coarse, o_fine.values[idx], o_fine.meta)
    bp = _bound_params(d, t, p["third_moment_rate"])
    rep = fourier_metric.verify_bound(k, o, bp, mg)
    record = json.loads(rep.to_json())
    if p["refine"]:
        ref = fourier_metric.d_s(k_fine, o_fine, 3, fine_spec)
        record["refined_measured"] = ref.value
        record["refinement_change"] = (abs(ref.value - rep.measured) / ref.value
                                       if ref.value else 0.0)
    rows = [(x, a.real, a.imag, b.real, b.imag, abs(a - b) / abs(x) ** 3)
            for x, a, b in zip(coarse, k.values, o.values)]
    out.csv("metric.csv", ["xi", "kinetic_re", "kinetic_im", "diffusion_re", "diffusion_im",
                           "ratio_s3"], rows)
    out.json("report.json", record)
    if not rep.satisfied:
        raise SelfCheckFailed("measured d_3 exceeds the bound")


RUNNERS = {
    "moments": run_moments,
    "simulate": run_simulate,
    "wild": run_wild,
    "diffuse": run_diffuse,
    "converge": run_converge,
    "first-order": run_first_order,
    "metric": run_metric,
}


# -- entry point ------------------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="gibrat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--out", help="output directory (default: ./out/<command>)")
        sp.add_argument("--oracle-tol", type=float, help="relative tolerance of the oracles")
        sp.add_argument("--force", action="store_true", default=None,
                        help="proceed with inadmissible initial data")
    return ap


def _env(name, env):
    return env.get(ENV_PREFIX + name)


def main(argv=None, env=None):
    """Run the CLI; returns the exit code."""
    env = os.environ if env is None else env
    args = _parser().parse_args(argv)
    command = args.command
    try:
        cfg_path = args.config or _env("CONFIG", env)
        record, text = load_config(cfg_path) if cfg_path else ({}, None)
        seed = args.seed if args.seed is not None else _env("SEED", env)
        tol = args.oracle_tol if args.oracle_tol is not None else _env("ORACLE_TOL", env)
        cfg = resolve_config(command, record, text, seed, tol)
        force = args.force
        if force is None:
            force = (_env("FORCE", env) or "").lower() in ("1", "true", "yes")
        out_dir = args.out or _env("OUT", env) or os.path.join("out", command)
        out = Output(out_dir, cfg)
        out.config()
        runner = RUNNERS[command]
        if command == "converge":
            runner(cfg, out, force=force)
        else:
            runner(cfg, out)
    except (ConfigError, DomainError, _Refused, OSError) as exc:
        print(f"gibrat {command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ResourceError, FloatingPointError) as exc:
        print(f"gibrat {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SelfCheckFailed as exc:
        print(f"gibrat {command}: self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    print(f"gibrat {command}: wrote {', '.join(str(f) for f in out.files)}")
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
