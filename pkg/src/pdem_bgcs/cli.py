"""Command-line driver: data dumps, figure tables and verification suites.

Usage examples::

    pdem-bgcs model --lambda 0.25
    pdem-bgcs state --lambda-prime 0.9 --z 1+0.5j --out state.csv
    pdem-bgcs figures fig4 --out fig4.csv
    pdem-bgcs verify all

Exit codes: 0 success, 1 contract failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra, bgcs, model, stats
from .errors import ConfigError, PdemError
from .specfun import PrecisionConfig

FIG_LAMBDAS = (-0.85, -0.55, -0.25, 0.25, 0.55, 0.85)
FIG_LAMBDA_PRIMES = (0.39, 0.9, 1.5, 2.6)

# key -> parser for config-file values; keys mirror the long flags
_KEYS = {
    "alpha": float,
    "lambda": float,
    "lambda_prime": float,
    "z": complex,
    "z_re": float,
    "z_im": float,
    "trunc": int,
    "rel_tol": float,
    "out": str,
    "format": str,
    "x0": float,
    "v0": float,
    "dt": float,
    "steps": int,
    "stride": int,
    "x_max": float,
    "n_points": int,
    "z_max": float,
    "z_points": int,
    "n_max": int,
}

_DEFAULTS = {
    "alpha": 1.0,
    "format": "csv",
    "x0": 1.0,
    "v0": 0.0,
    "stride": 10,
    "n_points": 201,
    "z_max": 5.0,
    "z_points": 50,
}


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        w.writerows([_fmt(v) for v in row] for row in table.rows)
        return buf.getvalue()
    payload = {
        "columns": table.columns,
        "rows": [[_jsonable(v) for v in row] for row in table.rows],
    }
    if table.meta:
        payload["meta"] = {k: _jsonable(v) for k, v in sorted(table.meta.items())}
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


# --- configuration -------------------------------------------------------------

def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file, ``#`` comments, keys as in the long flags."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < command-line flags."""
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not cfg["alpha"] > 0:
        raise ConfigError("alpha must be positive")
    if "rel_tol" in cfg and not 0 < cfg["rel_tol"] <= 1e-3:
        raise ConfigError("rel_tol must lie in (0, 1e-3]")
    for key in ("trunc", "steps", "stride", "n_points", "z_points", "n_max"):
        if key in cfg and cfg[key] < 1:
            raise ConfigError(f"{key} must be a positive integer")
    if "dt" in cfg and not cfg["dt"] > 0:
        raise ConfigError("dt must be positive")
    if not cfg["z_max"] > 0:
        raise ConfigError("z_max must be positive")
    if "z" in cfg and ("z_re" in cfg or "z_im" in cfg):
        raise ConfigError("give either --z or --z-re/--z-im, not both")
    if "lambda" in cfg and "lambda_prime" in cfg:
        raise ConfigError("give either --lambda or --lambda-prime, not both")
    return cfg


def _precision(cfg) -> PrecisionConfig | None:
    return PrecisionConfig(rel_tol=cfg["rel_tol"]) if "rel_tol" in cfg else None


def _z(cfg, default=None):
    if "z" in cfg:
        return complex(cfg["z"])
    if "z_re" in cfg or "z_im" in cfg:
        return complex(cfg.get("z_re", 0.0), cfg.get("z_im", 0.0))
    return default


def _lambda_prime(cfg, default=None):
    if "lambda_prime" in cfg:
        lp = cfg["lambda_prime"]
    elif "lambda" in cfg:
        lp = cfg["lambda"] / (2.0 * cfg["alpha"])
    else:
        return default
    if not math.isfinite(lp):
        raise ConfigError("lambda' must be finite")
    try:
        bgcs.check_lambda_prime(lp, cfg.get("trunc", bgcs.MAX_TRUNCATION))
    except PdemError as exc:
        raise ConfigError(str(exc)) from None
    return lp


def _params(cfg, lam=None) -> model.OscillatorParams:
    lam = cfg.get("lambda", 2.0 * cfg["alpha"] * cfg.get("lambda_prime", 0.0)) if lam is None else lam
    try:
        return model.OscillatorParams(cfg["alpha"], lam)
    except PdemError as exc:
        raise ConfigError(str(exc)) from None


# --- data commands -------------------------------------------------------------

def potential_rows(params: model.OscillatorParams, x_max: float, n_points: int):
    x = np.linspace(-x_max, x_max, n_points)
    mass, pot = model.evaluate_model(params, x)
    return x, mass, pot


def _default_x_max(params):
    w = params.domain_halfwidth
    return 3.0 if not math.isfinite(w) else 0.99 * w


def cmd_model(cfg) -> Table:
    params = _params(cfg)
    x_max = cfg.get("x_max", _default_x_max(params))
    if params.lam < 0 and x_max >= params.domain_halfwidth:
        raise ConfigError("x_max must lie inside the wall 1/sqrt(|lambda|)")
    x, mass, pot = potential_rows(params, x_max, cfg["n_points"])
    return Table(["x", "mass", "V"], list(zip(x, mass, pot)))


def cmd_orbit(cfg) -> Table:
    params = _params(cfg)
    try:
        params.check_inside(cfg["x0"])
    except PdemError as exc:
        raise ConfigError(str(exc)) from None
    orbit = model.integrate_orbit(params, cfg["x0"], cfg["v0"], cfg.get("dt"), cfg.get("steps"))
    s = cfg["stride"]
    rows = list(zip(orbit.times[::s], orbit.positions[::s], orbit.velocities[::s]))
    meta = {
        "amplitude": orbit.amplitude,
        "measured_omega": orbit.measured_omega,
        "predicted_omega": model.frequency_law(params, orbit.amplitude),
        "energy_drift": orbit.energy_drift,
    }
    return Table(["t", "x", "v"], rows, meta)


def cmd_state(cfg) -> Table:
    lp = _lambda_prime(cfg, 0.0)
    z = _z(cfg, 1.0)
    st = bgcs.make_state(z, lp, cfg.get("trunc"), _precision(cfg))
    rows = [(n, c.real, c.imag, abs(c) ** 2) for n, c in enumerate(st.coeffs)]
    meta = {"norm_factor": st.norm_factor, "truncation": st.truncation,
            "tail_bound": st.tail_bound, "norm_source": st.norm_source}
    return Table(["n", "re_c", "im_c", "abs2_c"], rows, meta)


def cmd_moments(cfg) -> Table:
    lp = _lambda_prime(cfg, 1.5)
    if not lp > 0.5:
        raise ConfigError("moment check needs lambda' > 1/2")
    n_max = cfg.get("n_max", 5)
    if n_max > 6:
        raise ConfigError("n_max must be at most 6")
    kw = {} if "rel_tol" not in cfg else {"cfg": PrecisionConfig(rel_tol=cfg["rel_tol"])}
    res = bgcs.moment_check(lp, n_max, **kw)
    return Table(["n", "lhs", "rhs", "rel_err", "quad_err"], [tuple(r) for r in res])


def _z_grid(cfg):
    k = np.arange(1, cfg["z_points"] + 1)
    return k * (cfg["z_max"] / cfg["z_points"])


def figure_table(which: str, cfg) -> Table:
    """Long-format data behind one figure."""
    pc = _precision(cfg)
    if which == "fig1":
        rows = []
        for lam in FIG_LAMBDAS:
            params = _params(cfg, lam)
            # one x range for all panels, clipped inside each wall
            x_max = cfg.get("x_max", 3.0)
            if params.lam < 0:
                x_max = min(x_max, _default_x_max(params))
            x, _, pot = potential_rows(params, x_max, cfg["n_points"])
            rows += [(lam, xi, vi) for xi, vi in zip(x, pot)]
        return Table(["lambda", "x", "V"], rows)
    if which == "fig2":
        r = abs(_z(cfg, 2.0))
        n_max = cfg.get("n_max", 40)
        rows = []
        for lp in FIG_LAMBDA_PRIMES:
            s = stats.summarize(r, lp, pc)
            p = s.p_n
            pois = stats.poisson_reference(s.mean, len(p) - 1)
            rows += [(lp, n, p[n], pois[n]) for n in range(min(n_max + 1, len(p)))]
        return Table(["lambda_prime", "n", "P_n", "P_n_poisson"], rows)
    if which in ("fig3", "fig4"):
        rows = []
        for lp in FIG_LAMBDA_PRIMES:
            for r in _z_grid(cfg):
                s = stats.summarize(r, lp, pc)
                rows.append((lp, r, s.mean, s.variance) if which == "fig3"
                            else (lp, r, s.mandel_q, s.g2))
        cols = ["mean", "variance"] if which == "fig3" else ["Q", "g2"]
        return Table(["lambda_prime", "abs_z"] + cols, rows)
    raise ConfigError(f"unknown figure {which!r}")


# --- verification ---------------------------------------------------------------

VERIFY_COLUMNS = ["suite", "check", "value", "bound", "status"]


class Report:
    def __init__(self):
        self.rows = []

    def check(self, suite, name, value, bound, ok=None):
        if ok is None:
            ok = bool(value <= bound)
        self.rows.append((suite, name, value, bound, "pass" if ok else "fail"))

    def info(self, suite, name, value):
        self.rows.append((suite, name, value, None, "info"))

    @property
    def failed(self):
        return [r for r in self.rows if r[4] == "fail"]


def verify_classical(rep: Report, cfg):
    lams = [cfg["lambda"]] if "lambda" in cfg else [-0.55, -0.25, 0.25, 0.55]
    t0 = time.perf_counter()
    for lam in lams:
        params = _params(cfg, lam)
        for amp in (0.5, 1.0):
            if lam < 0 and amp >= params.domain_halfwidth:
                continue
            orbit = model.integrate_orbit(params, amp, 0.0)
            want = model.frequency_law(params, amp)
            rel = abs(orbit.measured_omega - want) / want
            rep.check("classical", f"omega lambda={lam:g} A={amp:g}", rel, 1e-4)
    rep.check("classical", "frequency sweep runtime [s]", time.perf_counter() - t0, 5.0)
    lts = [lams[0] / cfg["alpha"]] if "lambda" in cfg else [0.0, -0.25, 0.25]
    for lt in lts:
        if lt >= 1.0:
            continue
        params = model.OscillatorParams(1.0, lt)
        g = model.ground_state_grid(params)
        rep.check("classical", f"ground residual lambda~={lt:g}", g.residual, 1e-5)
        zmax = g.zeta_grid[-1]
        coarse = model.ground_state_grid(params, zmax, (len(g.zeta_grid) - 1) // 2 + 1)
        ratio = coarse.residual / g.residual
        rep.check("classical", f"ground h-halving ratio lambda~={lt:g}", abs(ratio - 4.0), 0.8)


def verify_algebra(rep: Report, cfg):
    lps = [cfg["lambda_prime"]] if "lambda_prime" in cfg else [-0.5, 0.0, 0.39, 0.9, 1.5, 2.6]
    for lp in lps:
        real = algebra.build_realization(lp, 6, "formal")
        rpt = algebra.check_algebra(real)
        rep.check("algebra", f"casimir - 1/4 lambda'={lp:g}", rpt.casimir_max_dev, 1e-12)
        if lp == 0.0:
            rep.check("algebra", "[L-,L+] - 1 lambda'=0", rpt.scalar_one_deviation, 1e-12)
            rep.check("algebra", "[K-,K+] - 2K0 lambda'=0",
                      float(np.max(rpt.kk_closure_residual)), 1e-12)
    if "lambda_prime" not in cfg:
        rpt = algebra.check_algebra(algebra.build_realization(0.1, 6, "formal"))
        rep.check("algebra", "[K-,K+] - 2K0 at lambda'=0.1 n=0 equals 0.36",
                  abs(rpt.kk_closure_residual[0] - 0.36), 1e-12)
    # closure table: informational only
    for lp in lps:
        rpt = algebra.check_algebra(algebra.build_realization(lp, 6, "formal"))
        for name, value in rpt.rows():
            if value is not None:
                rep.info("algebra", f"{name} lambda'={lp:g}", value)


def verify_coherent(rep: Report, cfg):
    pc = _precision(cfg)
    lps = [cfg["lambda_prime"]] if "lambda_prime" in cfg else [-0.5, 0.9, 1.5, 2.6]
    zs = [_z(cfg)] if _z(cfg) is not None else [0.25, 1 + 0j, 2j, 3 + 1j]
    for lp in lps:
        for z in zs:
            t0 = time.perf_counter()
            st = bgcs.make_state(z, lp, None, pc)
            real = algebra.build_realization(lp, st.truncation, "formal")
            res = bgcs.eigen_residual(st, real)
            tag = f"lambda'={lp:g} z={z:g}"
            rep.check("coherent", f"eigen_residual {tag}", res, max(1e-10, 10 * st.tail_bound))
            rep.check("coherent", f"state runtime [s] {tag}", time.perf_counter() - t0, 1.0)
            if st.norm_source == "closed":
                direct = bgcs.truncated_norm_sum(z, lp, st.truncation)
                rel = abs(direct - st.norm_factor) / st.norm_factor
                rep.check("coherent", f"norm sum vs 0F3 {tag}", rel, 1e-10)
            ov = bgcs.overlap(z, z + 0.5j, lp, pc)
            od = bgcs.overlap_direct(z, z + 0.5j, lp, pc)
            rep.check("coherent", f"overlap closed vs direct {tag}", abs(ov - od), 1e-10)
    moment_lps = [lp for lp in lps if lp > 0.5] if "lambda_prime" in cfg else [0.9, 1.5, 2.6]
    t0 = time.perf_counter()
    for lp in moment_lps:
        for m in bgcs.moment_check(lp, 5):
            rep.check("coherent", f"moment n={m.n} lambda'={lp:g}", m.rel_err, 1e-5)
    if moment_lps:
        rep.check("coherent", "moment runtime [s]", time.perf_counter() - t0, 60.0)


def verify_stats(rep: Report, cfg):
    pc = _precision(cfg)
    lps = [cfg["lambda_prime"]] if "lambda_prime" in cfg else [-0.5, 0.39, 0.9, 1.5, 2.6]
    zs = [abs(_z(cfg))] if _z(cfg) is not None else [0.25, 1.0, 2.0, 5.0]
    for lp in lps:
        for r in zs:
            s = stats.summarize(r, lp, pc)
            tag = f"lambda'={lp:g} |z|={r:g}"
            if s.closed is not None:
                rep.check("stats", f"closed vs direct {tag}", s.cross_check_err, 1e-9)
            if s.mean > 0:
                rep.check("stats", f"g2 - (Q/mean + 1) {tag}",
                          abs(s.g2 - (s.mandel_q / s.mean + 1.0)), 1e-10)
    sign_lps = [lp for lp in lps if lp in FIG_LAMBDA_PRIMES] if "lambda_prime" in cfg \
        else list(FIG_LAMBDA_PRIMES)
    grid = np.linspace(0.05, 5.0, 100)
    for lp in sign_lps:
        q_max = g_max = f_max = -math.inf
        for r in grid:
            s = stats.summarize(r, lp, pc)
            q_max, g_max, f_max = max(q_max, s.mandel_q), max(g_max, s.g2), max(f_max, s.fano)
        rep.check("stats", f"max Q lambda'={lp:g}", q_max, 0.0, q_max < 0)
        rep.check("stats", f"max g2 lambda'={lp:g}", g_max, 1.0, g_max < 1)
        rep.check("stats", f"max Fano lambda'={lp:g}", f_max, 1.0, f_max < 1)
        lim = stats.small_z_g2_limit(lp)
        dev = abs(stats.g2(1e-3, lp, pc) - lim)
        rep.check("stats", f"small-|z| g2 limit at |z|=1e-3 lambda'={lp:g}", dev, 1e-6)


SUITES = {
    "classical": verify_classical,
    "algebra": verify_algebra,
    "coherent": verify_coherent,
    "stats": verify_stats,
}


def run_verification(suite: str, cfg) -> Table:
    rep = Report()
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        SUITES[name](rep, cfg)
    table = Table(VERIFY_COLUMNS, rep.rows)
    table.meta["failed"] = len(rep.failed)
    return table


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float)
    common.add_argument("--lambda", dest="lambda", type=float)
    common.add_argument("--lambda-prime", type=float)
    common.add_argument("--z", type=complex, help="complex label, e.g. 1+0.5j")
    common.add_argument("--z-re", type=float)
    common.add_argument("--z-im", type=float)
    common.add_argument("--trunc", type=int, help="Fock truncation N")
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--config", help="key=value file; flags override it")

    p = argparse.ArgumentParser(prog="pdem-bgcs", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    m = sub.add_parser("model", parents=[common], help="mass and potential on a grid")
    m.add_argument("--x-max", type=float)
    m.add_argument("--n-points", type=int)
    o = sub.add_parser("orbit", parents=[common], help="RK4 classical orbit")
    o.add_argument("--x0", type=float)
    o.add_argument("--v0", type=float)
    o.add_argument("--dt", type=float)
    o.add_argument("--steps", type=int)
    o.add_argument("--stride", type=int)
    sub.add_parser("state", parents=[common], help="coherent-state coefficients")
    mo = sub.add_parser("moments", parents=[common], help="resolution-of-unity moments")
    mo.add_argument("--n-max", type=int)
    f = sub.add_parser("figures", parents=[common], help="figure data tables")
    f.add_argument("which", choices=("fig1", "fig2", "fig3", "fig4"))
    f.add_argument("--x-max", type=float)
    f.add_argument("--n-points", type=int)
    f.add_argument("--z-max", type=float)
    f.add_argument("--z-points", type=int)
    f.add_argument("--n-max", type=int)
    v = sub.add_parser("verify", parents=[common], help="invariant suites")
    v.add_argument("suite", choices=("classical", "algebra", "coherent", "stats", "all"))
    return p


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _log_error(out: str | None, msg: str):
    print(f"error: {msg}", file=sys.stderr)
    if out:
        Path(str(out) + ".err.log").write_text(msg + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out
    try:
        cfg = resolve(args)
        out = cfg.get("out")
        if args.command == "model":
            table = cmd_model(cfg)
        elif args.command == "orbit":
            table = cmd_orbit(cfg)
        elif args.command == "state":
            table = cmd_state(cfg)
        elif args.command == "moments":
            table = cmd_moments(cfg)
        elif args.command == "figures":
            table = figure_table(args.which, cfg)
        else:
            table = run_verification(args.suite, cfg)
    except ConfigError as exc:
        _log_error(out, f"configuration: {exc}")
        return 2
    except (PdemError, ArithmeticError, ValueError) as exc:
        _log_error(out, f"{type(exc).__name__}: {exc}")
        return 1
    _emit(render(table, cfg["format"]), out)
    if args.command == "verify" and table.meta["failed"]:
        failed = [r[1] for r in table.rows if r[4] == "fail"]
        _log_error(out, "failed checks: " + "; ".join(failed))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
