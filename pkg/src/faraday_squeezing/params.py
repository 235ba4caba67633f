"""Physical parameters of the double-pass Faraday setup and derived rates.

All rates share a single user-chosen inverse-time unit. Results depend only
on dimensionless combinations, so ``kappa2 = 1`` is a convenient default.

Naming note: ``gamma_p`` here is always the optical *pumping* rate. The
pulse formulas use a per-quadrature decay rate, which lives in
:mod:`faraday_squeezing.closed_forms` as ``gamma_q``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import DomainError, GammaPZero

__all__ = [
    "CouplingParams",
    "DerivedRates",
    "MicroscopicParams",
    "derive_rates",
    "pulse_rates",
    "derive_coupling",
    "mean_spin_fraction",
]


def _check_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CouplingParams:
    """Effective parameters of one configuration.

    Attributes
    ----------
    kappa2 : float
        Coupling strength kappa^2 (rate).
    tau : float
        Amplitude transmission between the two passes, in [0, 1].
    gamma : float
        Light-induced atomic decay rate.
    gamma_p : float
        Optical pumping rate.
    omega_larmor : float
        Larmor frequency, zero for the single-cell setup.
    """

    kappa2: float
    tau: float = 1.0
    gamma: float = 0.0
    gamma_p: float = 0.0
    omega_larmor: float = 0.0

    def __post_init__(self):
        for name in ("kappa2", "tau", "gamma", "gamma_p", "omega_larmor"):
            _check_finite(name, getattr(self, name))
        if self.kappa2 < 0:
            raise DomainError(f"kappa2 must be >= 0, got {self.kappa2}")
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if self.gamma_p < 0:
            raise DomainError(f"gamma_p must be >= 0, got {self.gamma_p}")

    @property
    def kappa(self) -> float:
        return math.sqrt(self.kappa2)

    def require_cw(self):
        """Raise :class:`GammaPZero` unless a cw steady state exists."""
        if self.gamma_p == 0:
            raise GammaPZero(
                "gamma_p = 0: the mean spin is not maintained, the cw model is undefined"
            )


@dataclass(frozen=True)
class DerivedRates:
    """Rates derived from :class:`CouplingParams`.

    ``beta`` and ``alpha_tau2`` are ``inf`` when ``gamma == 0``; check
    :attr:`gamma_zero` before using them.
    """

    gamma1: float
    gamma2: float
    beta: float
    kappa_tilde2: float
    alpha_tau2: float
    rho: float
    omega_larmor: float = 0.0
    gamma_zero: bool = False
    overridden: bool = field(default=False, compare=False)

    @property
    def kappa_tilde(self) -> float:
        return math.sqrt(self.kappa_tilde2)


def derive_rates(p: CouplingParams, *, gamma1: float | None = None,
                 gamma2: float | None = None) -> DerivedRates:
    """Compute gamma1 = gamma + gamma_p, gamma2 = gamma1**2 / gamma_p and friends.

    ``gamma1`` and ``gamma2`` may be overridden to account for extra
    decoherence channels; no model of such channels is assumed. When
    ``gamma2`` is not overridden, ``gamma_p > 0`` is required.
    """
    g1 = p.gamma + p.gamma_p if gamma1 is None else float(gamma1)
    if gamma2 is None:
        p.require_cw()
        g2 = (p.gamma + p.gamma_p) ** 2 / p.gamma_p
    else:
        g2 = float(gamma2)
    if g1 < 0 or g2 < 0:
        raise DomainError("gamma1 and gamma2 must be non-negative")

    kt2 = p.kappa2 * p.tau**2
    gamma_zero = p.gamma == 0
    if gamma_zero:
        beta = math.inf
        alpha_tau2 = math.inf
    else:
        beta = p.gamma_p / p.gamma
        alpha_tau2 = kt2 / p.gamma
    return DerivedRates(
        gamma1=g1,
        gamma2=g2,
        beta=beta,
        kappa_tilde2=kt2,
        alpha_tau2=alpha_tau2,
        rho=math.sqrt(1.0 - p.tau**2),
        omega_larmor=p.omega_larmor,
        gamma_zero=gamma_zero,
        overridden=gamma1 is not None or gamma2 is not None,
    )


def pulse_rates(p: CouplingParams) -> DerivedRates:
    """Rates for the pulsed setup, where the mean spin is not replenished.

    Both the decay and the noise strength equal ``gamma`` in that case.
    """
    return derive_rates(p, gamma1=p.gamma, gamma2=p.gamma)


@dataclass(frozen=True)
class MicroscopicParams:
    n_atoms: float
    sigma_res: float
    beam_area: float
    photon_flux: float
    linewidth: float
    detuning: float

    def __post_init__(self):
        for name in ("n_atoms", "sigma_res", "beam_area", "photon_flux", "linewidth"):
            value = getattr(self, name)
            _check_finite(name, value)
            if value <= 0:
                raise DomainError(f"{name} must be > 0, got {value}")
        _check_finite("detuning", self.detuning)
        if self.detuning == 0:
            raise DomainError("detuning must be non-zero")
        if abs(self.detuning) < 10 * self.linewidth:
            warnings.warn(
                "|detuning| is not large compared to the linewidth; the "
                "off-resonant Faraday description may not apply",
                stacklevel=2,
            )


def derive_coupling(m: MicroscopicParams) -> dict:
    """Return ``{'gamma', 'alpha', 'kappa2'}`` from microscopic quantities.

    ``alpha = N sigma / A`` is the resonant optical depth,
    ``gamma = Phi (sigma/A) (Gamma/Delta)**2`` the scattering rate and
    ``kappa2 = gamma * alpha``.
    """
    ratio = m.sigma_res / m.beam_area
    gamma = m.photon_flux * ratio * (m.linewidth / m.detuning) ** 2
    alpha = m.n_atoms * ratio
    return {"gamma": gamma, "alpha": alpha, "kappa2": gamma * alpha}


def mean_spin_fraction(d: DerivedRates | CouplingParams) -> float:
    """Steady-state J_x in units of N/2, i.e. gamma_p / (gamma + gamma_p)."""
    if isinstance(d, CouplingParams):
        d.require_cw()
        return d.gamma_p / (d.gamma + d.gamma_p)
    if d.gamma_zero:
        return 1.0
    if d.beta == 0:
        raise GammaPZero("gamma_p = 0: no polarized steady state")
    if math.isinf(d.beta):
        return 1.0
    return d.beta / (1.0 + d.beta)
