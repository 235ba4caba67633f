"""Linear quantum Langevin input-output models and their deterministic solvers.

A model is the linear system::

    dX/dt = D X + B h(t)
    y     = C X + F h(t)

with state ``X`` (atomic quadratures), white-noise channels ``h`` (input
field, inter-pass loss noise, atomic noise) and outputs ``y = (x_out, p_out)``.
Channels are uncorrelated with ``<h_k(t) h_k(t')> = I_k delta(t - t')``.

The two passes are treated as simultaneous (zero propagation delay). The
90 degree polarization rotations are absorbed into the variable definitions.

Two independent routes are provided: frequency-domain transfer matrices for
stationary spectra, and second-moment ODE propagation for pulse modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .closed_forms import PulseVariances
from .errors import DomainError, SingularMatrix, StepTooLarge
from .params import CouplingParams, DerivedRates, derive_rates, pulse_rates

__all__ = [
    "NoiseChannel",
    "LinearIOModel",
    "ExtendedPulseModel",
    "build_single_cell",
    "build_two_cell",
    "freq_response",
    "spectrum_from_response",
    "output_spectra",
    "vp_spectrum_numeric",
    "steady_state_covariance",
    "propagate_covariance",
    "covariance_propagate",
    "pulse_variances_numeric",
]

VACUUM = 0.5


@dataclass(frozen=True)
class NoiseChannel:
    name: str
    intensity: float = VACUUM

    def __post_init__(self):
        if self.intensity < 0:
            raise DomainError(f"channel {self.name}: intensity must be >= 0")


@dataclass(frozen=True, eq=False)
class LinearIOModel:
    drift: np.ndarray
    noise_input: np.ndarray
    output_state: np.ndarray
    output_feedthrough: np.ndarray
    channels: tuple
    state_names: tuple = ()

    def __post_init__(self):
        n, m = self.noise_input.shape
        if self.drift.shape != (n, n):
            raise DomainError("drift must be n x n with n = noise_input rows")
        if self.output_state.shape != (2, n) or self.output_feedthrough.shape != (2, m):
            raise DomainError("output matrices must be 2 x n and 2 x m")
        if len(self.channels) != m:
            raise DomainError("one NoiseChannel per noise_input column")

    @property
    def state_dim(self) -> int:
        return self.drift.shape[0]

    @property
    def intensities(self) -> np.ndarray:
        return np.array([c.intensity for c in self.channels])

    @property
    def channel_names(self) -> tuple:
        return tuple(c.name for c in self.channels)

    def diffusion(self) -> np.ndarray:
        """State diffusion matrix ``B N B^T``."""
        return (self.noise_input * self.intensities) @ self.noise_input.T


def _vacuum_channels(names):
    return tuple(NoiseChannel(n) for n in names)


def build_single_cell(p: CouplingParams, d: DerivedRates | None = None) -> LinearIOModel:
    """Double pass through one cell, state ``(x_at, p_at)``.

    The field between the passes, ``x' = tau*(x_in + kappa*p_at) + rho*F_x``,
    is substituted into the atomic equations and the outputs.
    """
    if d is None:
        d = derive_rates(p)
    k, tau, rho = p.kappa, p.tau, d.rho
    g1, kt2 = d.gamma1, d.kappa_tilde2
    s = math.sqrt(2 * d.gamma2)
    # channels: x_in, p_in, F_x, F_p, G_x, G_p
    drift = np.array([[-g1, 0.0], [0.0, -(g1 + kt2)]])
    B = np.array([
        [0.0, k, 0.0, 0.0, s, 0.0],
        [-k * tau**2, 0.0, -k * tau * rho, 0.0, 0.0, s],
    ])
    C = np.array([[0.0, tau * k], [-k * tau, 0.0]])
    F = np.array([
        [tau, 0.0, rho, 0.0, 0.0, 0.0],
        [0.0, tau, 0.0, rho, 0.0, 0.0],
    ])
    return LinearIOModel(drift, B, C, F,
                         _vacuum_channels(("x_in", "p_in", "F_x", "F_p", "G_x", "G_p")),
                         ("x_at", "p_at"))


def build_two_cell(p: CouplingParams, d: DerivedRates | None = None) -> LinearIOModel:
    """Two oppositely polarized cells in a bias field, state ``(x1, p1, x2, p2)``.

    Both cells see the same light; Larmor precession turns cell 1 by
    ``+Omega`` and cell 2 by ``-Omega``. The intermediate field is
    ``x' = tau*(x_in + kappa*(p1 + p2)) + rho*F_x``.
    """
    if d is None:
        d = derive_rates(p)
    k, tau, rho = p.kappa, p.tau, d.rho
    g1, kt2, W = d.gamma1, d.kappa_tilde2, p.omega_larmor
    s = math.sqrt(2 * d.gamma2)
    drift = np.zeros((4, 4))
    B = np.zeros((4, 8))
    # channels: x_in, p_in, F_x, F_p, G_x1, G_p1, G_x2, G_p2
    for cell, sign in ((0, 1.0), (1, -1.0)):
        ix, ip = 2 * cell, 2 * cell + 1
        drift[ix, ix] = -g1
        drift[ix, ip] = sign * W
        drift[ip, ip] = -g1
        drift[ip, ix] = -sign * W
        drift[ip, 1] -= kt2
        drift[ip, 3] -= kt2
        B[ix, 1] = k
        B[ip, 0] = -k * tau**2
        B[ip, 2] = -k * tau * rho
        B[ix, 4 + 2 * cell] = s
        B[ip, 5 + 2 * cell] = s
    C = np.array([[0.0, tau * k, 0.0, tau * k], [-k * tau, 0.0, -k * tau, 0.0]])
    F = np.zeros((2, 8))
    F[0, 0], F[0, 2] = tau, rho
    F[1, 1], F[1, 3] = tau, rho
    names = ("x_in", "p_in", "F_x", "F_p", "G_x1", "G_p1", "G_x2", "G_p2")
    return LinearIOModel(drift, B, C, F, _vacuum_channels(names), ("x1", "p1", "x2", "p2"))


def freq_response(m: LinearIOModel, omega) -> np.ndarray:
    """Transfer matrix ``C (i omega - D)^{-1} B + F`` from channels to outputs.

    Shape ``(2, n_channels)`` for scalar ``omega``; a leading axis is added
    for an array of frequencies.
    """
    w = np.asarray(omega, dtype=float)
    n = m.state_dim
    lhs = 1j * w[..., None, None] * np.eye(n) - m.drift
    cond = np.linalg.cond(lhs)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e14):
        bad = np.atleast_1d(w)[np.atleast_1d(~(np.isfinite(cond) & (cond <= 1e14)))]
        raise SingularMatrix(f"i*omega - D is singular at omega = {bad.tolist()}")
    rhs = np.broadcast_to(m.noise_input.astype(complex), lhs.shape[:-2] + m.noise_input.shape)
    return m.output_state @ np.linalg.solve(lhs, rhs) + m.output_feedthrough


def spectrum_from_response(t_row, channels) -> np.ndarray | float:
    """Output noise spectrum ``sum_k I_k |T_k|^2`` for one transfer-matrix row."""
    intens = np.array([c.intensity for c in channels])
    v = np.sum(intens * np.abs(np.asarray(t_row)) ** 2, axis=-1)
    return float(v) if np.ndim(v) == 0 else v


def output_spectra(m: LinearIOModel, omega):
    """``(V_x, V_p)`` of the two outputs at each frequency."""
    T = freq_response(m, omega)
    return (spectrum_from_response(T[..., 0, :], m.channels),
            spectrum_from_response(T[..., 1, :], m.channels))


def vp_spectrum_numeric(p: CouplingParams, omega):
    """Anti-squeezed (p quadrature) cw spectrum of the single-cell setup."""
    model = build_two_cell(p) if p.omega_larmor else build_single_cell(p)
    return output_spectra(model, omega)[1]


def steady_state_covariance(m: LinearIOModel) -> np.ndarray:
    """Stationary state covariance, the solution of ``D S + S D^T + B N B^T = 0``."""
    if np.any(np.linalg.eigvals(m.drift).real >= 0):
        raise DomainError("drift is not Hurwitz; no stationary state exists")
    return solve_continuous_lyapunov(m.drift, -m.diffusion())


def _rk4_linear_map(A, Q, h):
    """One classical RK4 step of ``dS/dt = A S + S A^T + Q`` as an affine map on vec(S)."""
    n = A.shape[0]
    eye = np.eye(n)
    L = np.kron(A, eye) + np.kron(eye, A)
    L2 = L @ L
    L3 = L2 @ L
    P = np.eye(n * n) + h * L + h**2 / 2 * L2 + h**3 / 6 * L3 + h**4 / 24 * (L3 @ L)
    r = (h * np.eye(n * n) + h**2 / 2 * L + h**3 / 6 * L2 + h**4 / 24 * L3) @ Q.reshape(-1)
    return P, r


def propagate_covariance(A, Q, S0, t, n_steps):
    """Integrate ``dS/dt = A S + S A^T + Q`` from ``S0`` over ``t`` with fixed RK4 steps."""
    P, r = _rk4_linear_map(np.asarray(A, float), np.asarray(Q, float), t / n_steps)
    s = np.asarray(S0, float).reshape(-1).copy()
    for _ in range(n_steps):
        s = P @ s + r
    S = s.reshape(A.shape)
    return 0.5 * (S + S.T)


@dataclass(frozen=True, eq=False)
class ExtendedPulseModel:
    """A model augmented with accumulators ``X_T, P_T = T^{-1/2} int_0^T y dt``.

    ``initial_atomic_cov`` defaults to the vacuum spin state (1/2 per
    quadrature). Accumulators always start at zero.
    """

    base: LinearIOModel
    initial_atomic_cov: np.ndarray = field(default=None)

    def matrices(self, T):
        """Drift, diffusion and initial covariance of the extended state."""
        m = self.base
        n = m.state_dim
        w = 1.0 / math.sqrt(T)
        A = np.zeros((n + 2, n + 2))
        A[:n, :n] = m.drift
        A[n:, :n] = w * m.output_state
        Bx = np.vstack([m.noise_input, w * m.output_feedthrough])
        # Same white noises drive the state and the accumulators: keep cross terms.
        Q = (Bx * m.intensities) @ Bx.T
        S0 = np.zeros((n + 2, n + 2))
        S0[:n, :n] = VACUUM * np.eye(n) if self.initial_atomic_cov is None else self.initial_atomic_cov
        return A, Q, S0


def covariance_propagate(m: ExtendedPulseModel, T, dt=None) -> PulseVariances:
    """Pulse-mode variances from the exact second-moment ODE.

    ``dt`` defaults to ``T / 1e4`` and must not exceed ``T / 1e3``.
    """
    if T <= 0:
        raise DomainError("T must be > 0")
    if dt is None:
        dt = T / 1e4
    if dt > T / 1e3 * (1 + 1e-12):
        raise StepTooLarge(f"dt = {dt} exceeds T/1000 = {T / 1e3}")
    n_steps = max(1, round(T / dt))
    A, Q, S0 = m.matrices(T)
    S = propagate_covariance(A, Q, S0, T, n_steps)
    n = m.base.state_dim
    return PulseVariances(float(S[n, n]), float(S[n + 1, n + 1]), float(T))


def pulse_variances_numeric(kappa2, tau, gamma, T, dt=None) -> PulseVariances:
    """Single-cell pulse variances via :func:`covariance_propagate`."""
    p = CouplingParams(kappa2=kappa2, tau=tau, gamma=gamma)
    model = build_single_cell(p, pulse_rates(p))
    return covariance_propagate(ExtendedPulseModel(model), T, dt)
