"""Cross-tier agreement checks: closed forms vs transfer matrices vs
moment ODE vs Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.stats import norm

from . import closed_forms as cf
from . import linear_io as lio
from . import stochastic as mc
from .params import CouplingParams, derive_rates, pulse_rates


@dataclass
class Check:
    name: str
    tier: str
    tolerance: str
    deviation: float
    passed: bool
    detail: str = ""


def random_parameter_sets(n, seed=0, larmor=False):
    """Random valid cw configurations: kappa2 log-uniform in [0.01, 100]*gamma1,
    tau uniform in [0.1, 1], beta log-uniform in [0.1, 10]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        gamma = 10 ** rng.uniform(-2, 0)
        beta = 10 ** rng.uniform(-1, 1)
        gamma_p = beta * gamma
        tau = rng.uniform(0.1, 1.0)
        kappa2 = 10 ** rng.uniform(-2, 2) * (gamma + gamma_p)
        omega_l = 0.0
        if larmor:
            omega_l = rng.uniform(-20, 20) * (gamma + gamma_p + kappa2 * tau**2)
        out.append(CouplingParams(kappa2, tau, gamma, gamma_p, omega_l))
    return out


def random_frequencies(d, n, rng):
    scale = d.gamma1 + d.kappa_tilde2 + abs(d.omega_larmor)
    w = 10 ** rng.uniform(-2, 1.5, n) * scale * rng.choice([-1, 1], n)
    w[0] = 0.0
    return w


def _rel(a, b):
    return np.abs(np.asarray(a) / np.asarray(b) - 1)


def check_single_cell_freq(n_params=100, n_freq=20, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for p in random_parameter_sets(n_params, seed):
        d = derive_rates(p)
        w = random_frequencies(d, n_freq, rng)
        vx, _ = lio.output_spectra(lio.build_single_cell(p, d), w)
        worst = max(worst, float(_rel(vx, cf.vx_spectrum(d, w).v_x).max()))
    return Check("single-cell spectrum: closed form vs transfer matrix", "deterministic",
                 f"rel < {tol:g}", worst, worst < tol)


def check_two_cell_freq(n_params=100, n_freq=20, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for p in random_parameter_sets(n_params, seed + 7, larmor=True):
        d = derive_rates(p)
        w = random_frequencies(d, n_freq, rng)
        vx, _ = lio.output_spectra(lio.build_two_cell(p, d), w)
        worst = max(worst, float(_rel(vx, cf.twocell_spectrum(d, w).v_x).max()))
    return Check("two-cell spectrum: closed form vs transfer matrix", "deterministic",
                 f"rel < {tol:g}", worst, worst < tol)


PULSE_POINTS = [(1.0, 0.0), (1.0, 0.1), (10.0, 0.0), (10.0, 0.1)]
PULSE_TAUS = [1.0, 0.8]


def check_pulse_covariance(tol=1e-8):
    worst = 0.0
    T = 1.0
    for k2T, gT in PULSE_POINTS:
        for tau in PULSE_TAUS:
            p = CouplingParams(k2T / T, tau, gT / T)
            num = lio.covariance_propagate(
                lio.ExtendedPulseModel(lio.build_single_cell(p, pulse_rates(p))), T, T / 1e4)
            ref = cf.pulse_variances(p.kappa2, tau, p.gamma, T)
            worst = max(worst, float(_rel(num.var_x, ref.var_x)), float(_rel(num.var_p, ref.var_p)))
    return Check("pulse variances: closed form vs covariance ODE", "deterministic",
                 f"rel < {tol:g}", worst, worst < tol)


def check_optimizer(grid=(3.0, 10.0, 100.0, 1e3), tol=1e-6):
    worst = 0.0
    for a in grid:
        exact, num = cf.v_opt(a), cf.optimize_beta(a)
        worst = max(worst, float(_rel(num.beta_star, exact.beta_star)),
                    float(_rel(num.v_opt, exact.v_opt)))
    return Check("beta optimum: closed form vs golden-section search", "deterministic",
                 f"rel < {tol:g}", worst, worst < tol)


def check_headline():
    db = cf.v_opt(100.0).v_opt_db
    return Check("squeezing at alpha*tau^2 = 100, optimal beta", "deterministic",
                 "11.1 +/- 0.1 dB", abs(db - 11.1), abs(db - 11.1) <= 0.1, f"{db:.4f} dB")


def check_sideband(tol=5e-3):
    p = CouplingParams(1.0, 1.0, 0.1 * 0.5, 0.1 * 0.5, 1e3)
    d = derive_rates(p)
    delta = np.linspace(-5, 5, 1001)
    dev = float(np.max(np.abs(cf.twocell_spectrum(d, d.omega_larmor + delta).v_x
                              - cf.twocell_sideband_limit(d, delta))))
    return Check("two-cell sideband reduces to single-cell Lorentzian", "deterministic",
                 f"abs < {tol:g}", dev, dev < tol)


def check_vacuum():
    p = CouplingParams(0.0, 0.7, 0.1, 0.2, 3.0)
    d = derive_rates(p)
    w = np.linspace(-10, 10, 41)
    devs = [
        np.abs(cf.vx_spectrum(d, w).v_x - 0.5).max(),
        np.abs(cf.twocell_spectrum(d, w).v_x - 0.5).max(),
        *[np.abs(v - 0.5).max() for v in lio.output_spectra(lio.build_single_cell(p, d), w)],
        *[np.abs(v - 0.5).max() for v in lio.output_spectra(lio.build_two_cell(p, d), w)],
    ]
    pv = cf.pulse_variances(0.0, 0.7, 0.1, 1.0)
    pn = lio.pulse_variances_numeric(0.0, 0.7, 0.1, 1.0)
    devs += [abs(pv.var_x - 0.5), abs(pv.var_p - 0.5), abs(pn.var_x - 0.5), abs(pn.var_p - 0.5)]
    dev = float(max(devs))
    return Check("kappa = 0 gives vacuum in every deterministic tier", "deterministic",
                 "abs < 1e-12", dev, dev < 1e-12)


def check_loss_rescaling(tol=1e-12):
    worst = 0.0
    w = np.linspace(-5, 5, 21)
    for kappa2, tau, tau2 in [(1.0, 0.9, 0.5), (3.0, 0.4, 1.0), (0.2, 1.0, 0.3)]:
        a = derive_rates(CouplingParams(kappa2, tau, 0.1, 0.1))
        b = derive_rates(CouplingParams(kappa2 * tau**2 / tau2**2, tau2, 0.1, 0.1))
        worst = max(worst, float(_rel(cf.vx_spectrum(a, w).v_x, cf.vx_spectrum(b, w).v_x).max()))
    return Check("inter-pass loss only rescales the coupling", "deterministic",
                 f"rel < {tol:g}", worst, worst < tol)


def check_pulse_montecarlo(n_traj=10_000, seed=0, workers=1, n_sigma=3.0):
    worst = 0.0
    T = 1.0
    for k2T, gT in PULSE_POINTS:
        for tau in PULSE_TAUS:
            p = CouplingParams(k2T / T, tau, gT / T)
            rate = p.gamma + p.kappa2 * tau**2
            dt = min(T / 1e3, 0.999 * mc.ACCURACY_GUARD / rate)
            est = mc.estimate_pulse_variance(p, T, mc.SimConfig(dt=dt, n_traj=n_traj, seed=seed,
                                                                workers=workers))
            ref = cf.pulse_variances(p.kappa2, tau, p.gamma, T)
            worst = max(worst, abs(est.var_x - ref.var_x) / est.stderr_x,
                        abs(est.var_p - ref.var_p) / est.stderr_p)
    return Check("pulse variances: closed form vs Monte Carlo", "montecarlo",
                 f"< {n_sigma:g} stderr", worst, worst < n_sigma)


def check_calibration(seed=0, family_p=2.7e-3):
    """Flatness of the estimate for white noise of intensity 1/2.

    The per-bin threshold is Bonferroni-adjusted so that the chance of a
    false alarm over all independent bins equals that of a single 3 sigma
    test (``family_p``).
    """
    cfg = mc.SimConfig(dt=1e-3, duration=1.0, segment_length=64, seed=seed)
    x = mc.white_noise_series(64 * 400, cfg.dt, seed=seed)
    est = mc.estimate_spectrum(x, cfg)
    # real input: bins at -w and +w are the same estimate
    half = est.omegas >= 0
    n_bins = int(half.sum())
    limit = float(norm.isf(family_p / (2 * n_bins)))
    z = float(np.max(np.abs(est.v_hat[half] - 0.5) / est.stderr[half]))
    return Check("white-noise calibration of the spectral estimator", "montecarlo",
                 f"< {limit:.2f} stderr in all {n_bins} bins", z, z < limit)


LARMOR_CASE = dict(kappa2=1.0, tau=1.0, gamma=0.05, gamma_p=0.05, omega_larmor=10.0)


def larmor_montecarlo(seed=0, duration=1500.0):
    """Monte Carlo spectrum at the reference Larmor configuration, with a
    frequency grid that contains omega = Omega exactly."""
    p = CouplingParams(**LARMOR_CASE)
    L = 2**17
    j = math.floor(1.5e-4 * p.omega_larmor * L / (2 * math.pi))
    dt = 2 * math.pi * j / (p.omega_larmor * L)
    cfg = mc.SimConfig(dt=dt, duration=duration, segment_length=L, seed=seed)
    series = mc.simulate_cw(lio.build_two_cell(p), cfg)
    return p, mc.estimate_spectrum(series.x_out, cfg)


def locate_dip(omegas, v, center, half_width):
    """Center of a Lorentzian dip fitted to ``v`` within ``center +/- half_width``."""
    sel = np.abs(omegas - center) <= half_width
    x, y = omegas[sel], v[sel]

    def lorentz(w, c, depth, width):
        return 0.5 - depth / (1 + ((w - c) / width) ** 2)

    popt, _ = curve_fit(lorentz, x, y, p0=[x[np.argmin(y)], 0.5 - y.min(), 1.0])
    return float(popt[0])


def check_larmor_montecarlo(seed=0, n_sigma=3.0):
    p, est = larmor_montecarlo(seed)
    d = derive_rates(p)
    i = int(np.argmin(np.abs(est.omegas - p.omega_larmor)))
    z = abs(est.v_hat[i] - cf.twocell_spectrum(d, est.omegas[i]).v_x) / est.stderr[i]
    width = d.gamma1 + d.kappa_tilde2
    off = max(abs(locate_dip(est.omegas, est.v_hat, s * p.omega_larmor, 3 * width)
                  - s * p.omega_larmor) for s in (1, -1))
    ok = z < n_sigma and off < est.bin_width
    return Check("two-cell spectrum at omega = Omega: closed form vs Monte Carlo", "montecarlo",
                 f"< {n_sigma:g} stderr; dips within one bin", float(z), ok,
                 f"dip offset {off:.3g}, bin {est.bin_width:.3g}")


DETERMINISTIC = (
    check_single_cell_freq, check_two_cell_freq, check_pulse_covariance, check_optimizer,
    check_headline, check_sideband, check_vacuum, check_loss_rescaling,
)
MONTECARLO = (check_pulse_montecarlo, check_calibration, check_larmor_montecarlo)


def run_all(skip=(), seed=0):
    checks = []
    for fn in DETERMINISTIC:
        checks.append(fn())
    if "montecarlo" not in skip:
        for fn in MONTECARLO:
            checks.append(fn(seed=seed))
    return checks
