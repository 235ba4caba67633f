"""Closed-form squeezing spectra, pulse-mode variances and the pumping optimum.

Conventions: quadrature variances are normalized so that vacuum is 1/2.
Squeezing in dB is positive below vacuum.

The pulse formulas carry a per-quadrature decay rate ``gamma_q`` (``gamma +
kappa2*tau**2`` for x, ``gamma`` for p). It is unrelated to the optical
pumping rate ``CouplingParams.gamma_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ConvergenceError, DomainError, NonPositiveVariance, RegimeError
from .params import DerivedRates

__all__ = [
    "SpectrumPoint",
    "PulseVariances",
    "OptimumReport",
    "vx_spectrum",
    "vx_spectrum_subtractive",
    "vx_zero",
    "v_opt",
    "optimize_beta",
    "golden_section_search",
    "pulse_variances",
    "pulse_variances_undamped",
    "twocell_spectrum",
    "twocell_sideband_limit",
    "apply_output_loss",
    "to_decibel",
]

VACUUM = 0.5

# Below this value of gamma_q*T the pulse bracket is summed as a power series;
# the direct form loses ~ -log10(g**2) digits to cancellation.
SERIES_SWITCH = 0.5
_SERIES_ORDER = 30
_SERIES_COEFFS = np.array(
    [(-1) ** n * (4 - 2**n) / factorial(n) for n in range(3, _SERIES_ORDER + 1)]
)


def to_decibel(v):
    """Squeezing in dB relative to vacuum, ``-10 log10(v / 0.5)``."""
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise NonPositiveVariance(f"variance must be > 0, got {v!r}")
    out = -10.0 * np.log10(arr / VACUUM)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectrumPoint:
    """Variance of the x quadrature at angular frequency ``omega``.

    Fields are floats or equally shaped arrays.
    """

    omega: float | np.ndarray
    v_x: float | np.ndarray

    @property
    def v_x_db(self):
        return to_decibel(self.v_x)


@dataclass(frozen=True)
class PulseVariances:
    var_x: float
    var_p: float
    duration: float
    stderr_x: float | None = None
    stderr_p: float | None = None

    @property
    def product(self) -> float:
        return self.var_x * self.var_p


@dataclass(frozen=True)
class OptimumReport:
    alpha_tau2: float
    beta_star: float
    v_opt: float
    method: str = "closed-form"
    n_evaluations: int = 0

    @property
    def v_opt_db(self) -> float:
        return to_decibel(self.v_opt)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


# -- continuous wave, single cell ---------------------------------------------

def vx_spectrum(d: DerivedRates, omega) -> SpectrumPoint:
    """Lorentzian squeezing spectrum of the single-cell cw setup.

    Evaluated in the cancellation-free form
    ``(g1**2 + w**2 + 2*g2*k) / (2*((g1 + k)**2 + w**2))`` with
    ``k = kappa2 * tau**2``.
    """
    w2 = np.square(np.asarray(omega, dtype=float))
    g1, g2, k = d.gamma1, d.gamma2, d.kappa_tilde2
    v = 0.5 * (g1**2 + w2 + 2.0 * g2 * k) / ((g1 + k) ** 2 + w2)
    return SpectrumPoint(_scalar_or_array(omega), _scalar_or_array(v))


def vx_spectrum_subtractive(d: DerivedRates, omega):
    """Same spectrum written as vacuum minus a Lorentzian dip."""
    w2 = np.square(np.asarray(omega, dtype=float))
    g1, g2, k = d.gamma1, d.gamma2, d.kappa_tilde2
    v = 0.5 * (1.0 - (2.0 * (g1 - g2) * k + k**2) / ((g1 + k) ** 2 + w2))
    return _scalar_or_array(v)


def vx_zero(alpha, beta, tau=1.0):
    """Zero-frequency variance when light scattering is the only decoherence.

    Uses ``kappa2 = gamma * alpha`` and ``gamma_p = beta * gamma``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(alpha < 0) or np.any(beta <= 0) or not 0 < tau <= 1:
        raise DomainError("vx_zero needs alpha >= 0, beta > 0, 0 < tau <= 1")
    at = alpha * tau**2
    v = 0.5 * (1 + beta) ** 2 * (beta + 2 * at) / (beta * (1 + beta + at) ** 2)
    return _scalar_or_array(v)


def _check_optimum_domain(alpha_tau2):
    if not alpha_tau2 > 2:
        raise DomainError(
            f"alpha*tau^2 = {alpha_tau2} <= 2: no interior optimum over beta; "
            "V(0) decreases monotonically toward 1/2 as beta -> inf"
        )


def v_opt(alpha_tau2: float) -> OptimumReport:
    """Optimal zero-frequency variance over the pumping ratio beta."""
    a = float(alpha_tau2)
    _check_optimum_domain(a)
    beta_star = (1 + a) / (a - 2)
    v = 0.5 * (2 * a - 1) ** 3 / ((a - 1) * (1 + a) ** 3)
    return OptimumReport(alpha_tau2=a, beta_star=beta_star, v_opt=v)


_INV_PHI = (math.sqrt(5) - 1) / 2
_INV_PHI2 = (3 - math.sqrt(5)) / 2


def golden_section_search(f, a, b, tol=1e-10, max_iter=500):
    """Minimize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x_min, f_min, n_evaluations)``; stops once the bracket is
    narrower than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    n_eval = 2
    while h > tol:
        if n_eval > max_iter:
            raise ConvergenceError("golden-section search exceeded max_iter")
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
        n_eval += 1
    x = c if fc < fd else d
    return x, min(fc, fd), n_eval


def optimize_beta(alpha_tau2: float, bracket=(1e-3, 1e3), rtol=1e-10) -> OptimumReport:
    """Numerically minimize the zero-frequency variance over beta.

    Golden-section search in ``log(beta)``; serves as an independent check
    of :func:`v_opt`.
    """
    a = float(alpha_tau2)
    _check_optimum_domain(a)
    lo, hi = math.log(bracket[0]), math.log(bracket[1])

    def objective(log_beta):
        return vx_zero(a, math.exp(log_beta), 1.0)

    x, fx, n_eval = golden_section_search(objective, lo, hi, tol=rtol)
    if x - lo < 1e3 * rtol or hi - x < 1e3 * rtol:
        raise ConvergenceError(
            f"minimum at the edge of the beta bracket {bracket}; bracket failed"
        )
    return OptimumReport(alpha_tau2=a, beta_star=math.exp(x), v_opt=fx,
                         method="golden-section", n_evaluations=n_eval)


# -- pulses ------------------------------------------------------------------

def _bracket_over_cube(g):
    """``(2g + 1 - (2 - exp(-g))**2) / g**3``, finite at ``g = 0`` (value 2/3)."""
    g = np.asarray(g, dtype=float)
    out = np.empty_like(g)
    small = g < SERIES_SWITCH
    gs = g[small]
    # Horner on the series in ascending powers of g
    acc = np.zeros_like(gs)
    for c in _SERIES_COEFFS[::-1]:
        acc = acc * gs + c
    out[small] = acc
    gl = g[~small]
    out[~small] = (2 * gl + 1 - (2 - np.exp(-gl)) ** 2) / gl**3
    return out


def _pulse_quadrature(kappa2, tau_q, gamma_q, T, sign):
    g = np.asarray(gamma_q, dtype=float) * T
    h = _bracket_over_cube(g)
    return 0.5 * (1 + sign * kappa2**2 * tau_q**2 * T**2 * h / 2)


def pulse_variances(kappa2, tau, gamma, T) -> PulseVariances:
    """Square-pulse mode variances ``(Var x_T, Var p_T)``.

    The mean spin is assumed preserved over the pulse, so the atomic decay
    and noise strength both equal ``gamma``.
    """
    kappa2 = np.asarray(kappa2, dtype=float)
    if T <= 0 or np.any(kappa2 < 0) or gamma < 0 or not 0 <= tau <= 1:
        raise DomainError("pulse_variances needs T > 0, kappa2 >= 0, gamma >= 0, 0 <= tau <= 1")
    var_x = _pulse_quadrature(kappa2, tau**2, gamma + kappa2 * tau**2, T, -1)
    var_p = _pulse_quadrature(kappa2, tau, gamma, T, +1)
    return PulseVariances(_scalar_or_array(var_x), _scalar_or_array(var_p), float(T))


def pulse_variances_undamped(kappa_hat2, tau=1.0) -> PulseVariances:
    """Undamped (``gamma = 0``) pulse variances in terms of ``kappa_hat2 = kappa2*T``.

    At ``tau = 1`` this is ``Var x = (3 + e^{-2k} - 4e^{-k})/(4k)`` and
    ``Var p = 1/2 + k**2/6``. For ``tau < 1`` the x quadrature sees
    ``k*tau**2`` and the p quadrature picks up a factor ``tau**2`` on
    its excess noise.
    """
    if not np.all(np.asarray(kappa_hat2) >= 0) or not 0 <= tau <= 1:
        raise DomainError("pulse_variances_undamped needs kappa_hat2 >= 0, 0 <= tau <= 1")
    k = np.asarray(kappa_hat2, dtype=float)
    kx = k * tau**2
    with np.errstate(invalid="ignore", divide="ignore"):
        # (3 + e^{-2k} - 4e^{-k}) factorized as (1 - e^{-k})(3 - e^{-k})
        var_x = np.where(kx > 0, -np.expm1(-kx) * (3 - np.exp(-kx)) / (4 * kx), 0.5)
    var_p = 0.5 + k**2 * tau**2 / 6
    return PulseVariances(_scalar_or_array(var_x), _scalar_or_array(var_p), float("nan"))


# -- two cells with Larmor precession ----------------------------------------

def twocell_spectrum(d: DerivedRates, omega) -> SpectrumPoint:
    """Spectrum of two oppositely polarized cells precessing at ``d.omega_larmor``."""
    w2 = np.square(np.asarray(omega, dtype=float))
    g1, g2, k = d.gamma1, d.gamma2, d.kappa_tilde2
    W2 = d.omega_larmor**2
    A = g1 + 2 * k
    num = 4 * k**2 * (g1**2 + w2) + 4 * k * (g1 - g2) * (g1**2 + w2 + W2)
    den = g1**2 * A**2 + 2 * A * g1 * (w2 + W2) + (w2 - W2) ** 2 + 4 * k**2 * w2
    v = 0.5 * (1 - num / den)
    return SpectrumPoint(_scalar_or_array(omega), _scalar_or_array(v))


SIDEBAND_RATIO = 50.0


def twocell_sideband_limit(d: DerivedRates, delta):
    """Single-cell Lorentzian that the two-cell spectrum approaches near ``omega = Omega + delta``."""
    scale = max(d.gamma1, d.kappa_tilde2)
    if not abs(d.omega_larmor) > SIDEBAND_RATIO * scale:
        raise RegimeError(
            f"|Omega| = {abs(d.omega_larmor)} is not > {SIDEBAND_RATIO:g} * "
            f"max(gamma1, kappa_tilde2) = {SIDEBAND_RATIO * scale}"
        )
    return vx_spectrum(d, delta).v_x


def apply_output_loss(v, tau_out):
    """Mix the variance with vacuum through an amplitude transmission ``tau_out``."""
    if not 0 <= tau_out <= 1:
        raise DomainError(f"tau_out must lie in [0, 1], got {tau_out}")
    t2 = tau_out**2
    return _scalar_or_array(t2 * np.asarray(v, dtype=float) + (1 - t2) * VACUUM)
