"""Command-line front end producing plot-ready CSV/JSON tables.

Usage::

    faraday-squeezing spectrum --kappa2 1 --gamma 0.1 --gamma-p 0.1 --omega 0:5:101
    faraday-squeezing twocell --gamma 0.05 --gamma-p 0.05 --larmor 10 --omega 0:20:401
    faraday-squeezing pulse --kt 0:10:101 --gamma-t 0,0.1
    faraday-squeezing optimize --alpha-tau2 3:1000:60:log
    faraday-squeezing montecarlo --kind pulse --T 1 --n-traj 10000
    faraday-squeezing sweep --param gamma_p --values 0.01:1:20:log
    faraday-squeezing verify --skip montecarlo

Exit codes: 0 success, 1 verification failure, 2 invalid configuration.
Without ``--output`` tables go to stdout, or to
``$FARADAY_SQUEEZING_OUTDIR/<mode>.<format>`` when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import closed_forms as cf
from . import linear_io as lio
from . import stochastic as mc
from . import verify
from .errors import FaradaySqueezingError
from .params import CouplingParams, MicroscopicParams, derive_coupling, derive_rates

OUTDIR_ENV = "FARADAY_SQUEEZING_OUTDIR"
MODES = ("spectrum", "twocell", "pulse", "optimize", "montecarlo", "sweep", "verify")


class ConfigError(Exception):
    pass


def parse_grid(text):
    """``min:max:points[:log]`` -> increasing numpy array."""
    parts = str(text).split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise ConfigError(f"grid must be min:max:points[:log], got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid must be min:max:points[:log], got {text!r}") from None
    if n < 2 or not hi > lo:
        raise ConfigError(f"grid needs points >= 2 and max > min, got {text!r}")
    if len(parts) == 4:
        if lo <= 0:
            raise ConfigError("log grid needs min > 0")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def parse_list(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


# -- parameters ---------------------------------------------------------------

_MICRO = ("n_atoms", "sigma_res", "beam_area", "photon_flux", "linewidth", "detuning")


def _add_params(p):
    g = p.add_argument_group("coupling parameters")
    g.add_argument("--kappa2", type=float, default=1.0)
    g.add_argument("--tau", type=float, default=1.0)
    g.add_argument("--gamma", type=float, default=0.1)
    g.add_argument("--gamma-p", dest="gamma_p", type=float, default=0.1)
    g.add_argument("--larmor", dest="omega_larmor", type=float, default=0.0)
    g.add_argument("--gamma1", type=float, default=None, help="override gamma + gamma_p")
    g.add_argument("--gamma2", type=float, default=None, help="override (gamma+gamma_p)^2/gamma_p")
    m = p.add_argument_group("microscopic parameters (replace --kappa2/--gamma when all given)")
    m.add_argument("--n-atoms", dest="n_atoms", type=float)
    m.add_argument("--sigma", dest="sigma_res", type=float)
    m.add_argument("--beam-area", dest="beam_area", type=float)
    m.add_argument("--photon-flux", dest="photon_flux", type=float)
    m.add_argument("--linewidth", type=float)
    m.add_argument("--detuning", type=float)


def _coupling(a):
    kappa2, gamma = a.kappa2, a.gamma
    given = [getattr(a, k) is not None for k in _MICRO]
    if any(given):
        if not all(given):
            raise ConfigError("microscopic input needs all of " + ", ".join(_MICRO))
        c = derive_coupling(MicroscopicParams(**{k: getattr(a, k) for k in _MICRO}))
        kappa2, gamma = c["kappa2"], c["gamma"]
    return CouplingParams(kappa2, a.tau, gamma, a.gamma_p, a.omega_larmor)


def _rates(a, p):
    return derive_rates(p, gamma1=a.gamma1, gamma2=a.gamma2)


# -- commands -----------------------------------------------------------------

def run_spectrum(a, twocell=False):
    p = _coupling(a)
    if not twocell:
        p = CouplingParams(p.kappa2, p.tau, p.gamma, p.gamma_p, 0.0)
    d = _rates(a, p)
    w = parse_grid(a.omega)
    v = (cf.twocell_spectrum if twocell else cf.vx_spectrum)(d, w).v_x
    cols = {"omega": w, "v_x": v}
    if a.vp:
        model = (lio.build_two_cell if twocell else lio.build_single_cell)(p, d)
        cols["v_p_numeric"] = lio.output_spectra(model, w)[1]
    if a.tau_out is not None:
        cols = {k: (c if k == "omega" else cf.apply_output_loss(c, a.tau_out))
                for k, c in cols.items()}
    cols["v_x_db"] = cf.to_decibel(cols["v_x"])
    return _rows(cols), 0


def run_pulse(a):
    kt = parse_grid(a.kt)
    if kt[0] < 0:
        raise ConfigError("kappa2*tau^2*T must be >= 0")
    tau, T = a.tau, 1.0
    if tau == 0:
        raise ConfigError("pulse mode needs tau > 0")
    rows = []
    undamped = cf.pulse_variances_undamped(kt / tau**2, tau)
    for gT in parse_list(a.gamma_t):
        pv = cf.pulse_variances(kt / tau**2, tau, gT / T, T)
        for i, k in enumerate(kt):
            row = {"kappa2_tau2_T": k, "gamma_T": gT, "var_x": pv.var_x[i], "var_p": pv.var_p[i],
                   "var_x_undamped": undamped.var_x[i], "var_p_undamped": undamped.var_p[i]}
            if a.numeric:
                num = lio.pulse_variances_numeric(k / tau**2, tau, gT / T, T)
                row.update(var_x_numeric=num.var_x, var_p_numeric=num.var_p)
            rows.append(row)
    return rows, 0


def run_optimize(a):
    grid = parse_grid(a.alpha_tau2)
    if grid[0] <= 2:
        raise ConfigError(f"alpha*tau^2 must be > 2 (got {grid[0]:g}): no interior optimum")
    rows, status = [], 0
    for at in grid:
        exact, num = cf.v_opt(at), cf.optimize_beta(at)
        disc = max(abs(num.beta_star / exact.beta_star - 1), abs(num.v_opt / exact.v_opt - 1))
        if disc >= 1e-6:
            status = 1
        rows.append({
            "alpha_tau2": at, "beta_star": exact.beta_star, "v_opt": exact.v_opt,
            "v_opt_db": exact.v_opt_db, "asymptote": 4 / at,
            "mean_spin_fraction": exact.beta_star / (1 + exact.beta_star),
            "beta_star_numeric": num.beta_star, "v_opt_numeric": num.v_opt,
            "rel_discrepancy": disc,
        })
    return rows, status


def run_montecarlo(a):
    p = _coupling(a)
    if a.kind == "pulse":
        p = CouplingParams(p.kappa2, p.tau, p.gamma, p.gamma_p)
        dt = a.dt if a.dt is not None else min(a.T / 1e3, 0.999 * mc.ACCURACY_GUARD
                                               / max(p.gamma + p.kappa2 * p.tau**2, 1e-300))
        cfg = mc.SimConfig(dt=dt, duration=a.T, n_traj=a.n_traj, seed=a.seed, workers=a.workers)
        est = mc.estimate_pulse_variance(p, a.T, cfg)
        ref = cf.pulse_variances(p.kappa2, p.tau, p.gamma, a.T)
        return [{"T": a.T, "var_x": est.var_x, "stderr_x": est.stderr_x, "var_x_closed": ref.var_x,
                 "var_p": est.var_p, "stderr_p": est.stderr_p, "var_p_closed": ref.var_p,
                 "n_traj": a.n_traj, "dt": dt}], 0
    twocell = a.kind == "twocell"
    if not twocell:
        p = CouplingParams(p.kappa2, p.tau, p.gamma, p.gamma_p)
    d = _rates(a, p)
    model = (lio.build_two_cell if twocell else lio.build_single_cell)(p, d)
    dt = a.dt if a.dt is not None else 1e-3
    cfg = mc.SimConfig(dt=dt, duration=a.duration, seed=a.seed, segment_length=a.segment_length)
    est = mc.estimate_spectrum(mc.simulate_cw(model, cfg).x_out, cfg)
    ref = (cf.twocell_spectrum if twocell else cf.vx_spectrum)(d, est.omegas).v_x
    return _rows({"omega": est.omegas, "v_hat": est.v_hat, "stderr": est.stderr,
                  "v_closed": ref}), 0


_SWEEPABLE = ("kappa2", "tau", "gamma", "gamma_p", "omega_larmor")


def run_sweep(a):
    if a.param not in _SWEEPABLE:
        raise ConfigError(f"--param must be one of {', '.join(_SWEEPABLE)}")
    base = _coupling(a)
    rows = []
    for value in parse_grid(a.values):
        fields = {k: getattr(base, k) for k in _SWEEPABLE}
        fields[a.param] = value
        p = CouplingParams(**fields)
        d = _rates(a, p)
        fn = cf.twocell_spectrum if p.omega_larmor else cf.vx_spectrum
        v = fn(d, a.omega).v_x
        rows.append({a.param: value, "omega": a.omega, "v_x": v, "v_x_db": cf.to_decibel(v)})
    return rows, 0


def run_verify(a):
    checks = verify.run_all(skip=a.skip or (), seed=a.seed)
    rows = [{"check": c.name, "tier": c.tier, "tolerance": c.tolerance,
             "deviation": c.deviation, "passed": c.passed, "detail": c.detail} for c in checks]
    return rows, 0 if all(c.passed for c in checks) else 1


# -- output -------------------------------------------------------------------

def _rows(cols):
    keys = list(cols)
    arrays = [np.atleast_1d(cols[k]) for k in keys]
    return [{k: arr[i] for k, arr in zip(keys, arrays)} for i in range(len(arrays[0]))]


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return v


def _cell(v):
    v = _plain(v)
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(rows):
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def to_json(rows, metadata):
    def clean(v):
        v = _plain(v)
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    doc = {"metadata": metadata, "rows": [{k: clean(v) for k, v in r.items()} for r in rows]}
    return json.dumps(doc, indent=1) + "\n"


def _emit(text, a):
    path = a.output
    if path is None and os.environ.get(OUTDIR_ENV):
        path = os.path.join(os.environ[OUTDIR_ENV], f"{a.mode}.{a.format}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="faraday-squeezing", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values; flags override it")
    common.add_argument("--output", "-o", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)

    for name in ("spectrum", "twocell"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} squeezing spectrum")
        _add_params(sp)
        sp.add_argument("--omega", default="0:5:101" if name == "spectrum" else "0:20:401")
        sp.add_argument("--vp", action="store_true", help="add numeric anti-squeezing column")
        sp.add_argument("--tau-out", type=float, default=None, help="transmission after the cell")

    sp = sub.add_parser("pulse", parents=[common], help="square-pulse variances vs kappa2*tau^2*T")
    sp.add_argument("--kt", default="0:10:101", help="grid over kappa2*tau^2*T")
    sp.add_argument("--gamma-t", default="0,0.1", help="comma-separated gamma*T values")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--numeric", action="store_true", help="add covariance-ODE columns")

    sp = sub.add_parser("optimize", parents=[common], help="optimal pumping ratio vs alpha*tau^2")
    sp.add_argument("--alpha-tau2", default="3:1000:60:log")

    sp = sub.add_parser("montecarlo", parents=[common], help="stochastic trajectory estimates")
    _add_params(sp)
    sp.add_argument("--kind", choices=("cw", "twocell", "pulse"), default="cw")
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--duration", type=float, default=2000.0)
    sp.add_argument("--segment-length", type=int, default=4096)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--n-traj", type=int, default=10_000)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("sweep", parents=[common], help="variance at fixed omega vs one parameter")
    _add_params(sp)
    sp.add_argument("--param", required=True)
    sp.add_argument("--values", required=True)
    sp.add_argument("--omega", type=float, default=0.0)

    sp = sub.add_parser("verify", parents=[common], help="run the cross-tier agreement checks")
    sp.add_argument("--skip", action="append", choices=("montecarlo",))
    return parser


_RUNNERS = {
    "spectrum": run_spectrum,
    "twocell": lambda a: run_spectrum(a, twocell=True),
    "pulse": run_pulse,
    "optimize": run_optimize,
    "montecarlo": run_montecarlo,
    "sweep": run_sweep,
    "verify": run_verify,
}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.mode]
        known = {act.dest for act in sub._actions}
        unknown = set(file_cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**file_cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        rows, status = _RUNNERS[args.mode](args)
    except (ConfigError, FaradaySqueezingError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    metadata = {"mode": args.mode, "version": __version__, "seed": args.seed,
                "config": {k: v for k, v in sorted(vars(args).items()) if k != "mode"}}
    text = to_json(rows, metadata) if args.format == "json" else to_csv(rows)
    _emit(text, args)
    return status


if __name__ == "__main__":
    sys.exit(main())
