"""Monte Carlo trajectories of the Langevin equations.

For linear dynamics driven by Gaussian white noise, symmetric-ordered
quantum moments coincide with the moments of the classical stochastic
process, so classical trajectories give an independent check of the
analytic spectra and pulse variances.

White noise ``h`` with ``<h(t) h(t')> = I delta(t - t')`` is represented by
per-step increments ``w_k ~ N(0, I dt)``. Output samples are step averages
``y_k = C X_k + F w_k / dt``, so unit-normalized white noise has per-sample
variance ``I / dt`` and periodograms need no further scale factors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .closed_forms import PulseVariances
from .errors import CalibrationError, DomainError, SeriesTooShort, StepTooLarge, UnstableStep
from .linear_io import LinearIOModel, build_single_cell, steady_state_covariance
from .params import CouplingParams, pulse_rates

__all__ = [
    "SimConfig",
    "CwSeries",
    "EstimatedSpectrum",
    "simulate_cw",
    "estimate_spectrum",
    "estimate_pulse_variance",
    "white_noise_series",
]

# dt * (fastest relaxation rate) must stay below this
ACCURACY_GUARD = 0.01
# trajectories per random substream; fixed so results do not depend on workers
BLOCK_SIZE = 1000
_CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    dt: float
    duration: float = 1.0
    n_traj: int = 10_000
    seed: int = 0
    segment_length: int = 4096
    burn_in: float | None = None
    initial_state: str = "steady"
    workers: int = 1

    def __post_init__(self):
        if not self.dt > 0 or not self.duration > 0:
            raise DomainError("dt and duration must be > 0")
        L = self.segment_length
        if L < 2 or L & (L - 1):
            raise DomainError(f"segment_length must be a power of two, got {L}")
        if self.n_traj < 2:
            raise DomainError("n_traj must be >= 2")
        if self.initial_state not in ("steady", "vacuum"):
            raise DomainError("initial_state must be 'steady' or 'vacuum'")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def _check_step(m: LinearIOModel, dt, allow_marginal):
    eig = np.linalg.eigvals(m.drift)
    rate = np.max(np.abs(eig.real)) if eig.size else 0.0
    if dt * rate > ACCURACY_GUARD:
        raise StepTooLarge(
            f"dt * max relaxation rate = {dt * rate:.3g} exceeds {ACCURACY_GUARD}"
        )
    amp = np.abs(1 + dt * eig)
    unstable = amp > 1 + 1e-15 if allow_marginal else amp >= 1
    if np.any(unstable):
        raise UnstableStep(f"|1 + dt*eig(D)| = {amp.max():.17g} >= 1 for dt = {dt}")


@dataclass(frozen=True, eq=False)
class CwSeries:
    x_out: np.ndarray
    p_out: np.ndarray
    dt: float


def _initial_state(m, cfg, rng):
    n = m.state_dim
    if cfg.initial_state == "steady":
        cov = steady_state_covariance(m)
    else:
        cov = 0.5 * np.eye(n)
    return np.linalg.cholesky(cov) @ rng.standard_normal(n)


def simulate_cw(m: LinearIOModel, cfg: SimConfig) -> CwSeries:
    """Euler-Maruyama run of a stationary model, returning output samples.

    The update is ``X_{k+1} = (1 + dt D) X_k + B w_k``. It is carried out
    in the eigenbasis of ``1 + dt D`` with a first-order recursive filter,
    which is algebraically the same recursion.
    """
    dt = cfg.dt
    _check_step(m, dt, allow_marginal=False)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    gamma_min = np.min(-np.linalg.eigvals(m.drift).real)
    burn_in = 10.0 / gamma_min if cfg.burn_in is None else cfg.burn_in
    n_burn = int(round(burn_in / dt))
    n_keep = int(round(cfg.duration / dt))

    M = np.eye(m.state_dim) + dt * m.drift
    lam, V = np.linalg.eig(M)
    if np.linalg.cond(V) > 1e8:
        raise DomainError("drift is (nearly) defective; eigenbasis update is ill-conditioned")
    Vinv = np.linalg.inv(V)
    Bz = Vinv @ m.noise_input
    scale = np.sqrt(m.intensities * dt)

    z = Vinv @ _initial_state(m, cfg, rng).astype(complex)
    x_out = np.empty(n_keep)
    p_out = np.empty(n_keep)
    pos = -n_burn
    total = n_burn + n_keep
    done = 0
    while done < total:
        n = min(_CHUNK, total - done)
        w = rng.standard_normal((n, m.noise_input.shape[1])) * scale
        drive = w @ Bz.T
        Z = np.empty((n, m.state_dim), dtype=complex)
        for j in range(m.state_dim):
            # Z[k] holds z before step k; filt[k] = z after step k
            filt, _ = signal.lfilter([1.0], [1.0, -lam[j]], drive[:, j], zi=[lam[j] * z[j]])
            Z[0, j] = z[j]
            Z[1:, j] = filt[:-1]
            z[j] = filt[-1]
        X = (Z @ V.T).real
        y = X @ m.output_state.T + w @ m.output_feedthrough.T / dt
        lo, hi = pos, pos + n
        keep_from = max(0, -lo)
        if keep_from < n:
            x_out[lo + keep_from:hi] = y[keep_from:, 0]
            p_out[lo + keep_from:hi] = y[keep_from:, 1]
        pos += n
        done += n
    return CwSeries(x_out, p_out, dt)


@dataclass(frozen=True, eq=False)
class EstimatedSpectrum:
    omegas: np.ndarray
    v_hat: np.ndarray
    stderr: np.ndarray
    n_segments: int

    @property
    def bin_width(self) -> float:
        return float(self.omegas[1] - self.omegas[0])


def _average(x, dt, L, batch=32):
    """Mean and standard error over half-overlapping Hann-windowed periodograms.

    Segments are transformed in batches so memory does not grow with the
    series length.
    """
    win = signal.get_window("hann", L)
    norm = dt / np.sum(win**2)
    segs = np.lib.stride_tricks.sliding_window_view(x, L)[:: L // 2]
    n_seg = segs.shape[0]
    total = np.zeros(L)
    total_sq = np.zeros(L)
    for i in range(0, n_seg, batch):
        P = np.abs(np.fft.fft(segs[i:i + batch] * win, axis=1)) ** 2 * norm
        total += P.sum(axis=0)
        total_sq += (P**2).sum(axis=0)
    mean = total / n_seg
    var = (total_sq - n_seg * mean**2) / (n_seg - 1)
    # neighbouring half-overlapping segments are correlated
    rho = (np.sum(win[: L // 2] * win[L // 2:]) / np.sum(win**2)) ** 2
    inflation = 1 + 2 * rho * (n_seg - 1) / n_seg
    se = np.sqrt(np.maximum(var, 0.0) * inflation / n_seg)
    omegas = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(L, d=dt))
    return omegas, np.fft.fftshift(mean), np.fft.fftshift(se), n_seg


def white_noise_series(n, dt, intensity=0.5, seed=0):
    """Samples of white noise with symmetric spectral density ``intensity``."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) * math.sqrt(intensity / dt)


@lru_cache(maxsize=32)
def _calibrate(L):
    n_seg = max(16, min(256, (1 << 21) // L))
    dt = 1.0
    x = white_noise_series((n_seg + 1) * L // 2, dt, seed=12345)
    _, v, _, n = _average(x, dt, L)
    level = float(v.mean())
    # bins are exponential-distributed; 5 sigma on the grand mean
    tol = 5 * 0.5 / math.sqrt(n * L / 2)
    if abs(level - 0.5) > tol:
        raise CalibrationError(f"white-noise calibration gave {level}, expected 0.5 +/- {tol}")
    return level


def estimate_spectrum(series, cfg: SimConfig) -> EstimatedSpectrum:
    """Two-sided Welch estimate of the noise spectrum in angular frequency.

    Hann-windowed segments with half overlap. White noise of per-sample
    variance ``1/(2 dt)`` yields a flat ``1/2``.
    """
    if isinstance(series, CwSeries):
        series = series.x_out
    x = np.asarray(series, dtype=float)
    L = cfg.segment_length
    if x.size < 8 * L:
        raise SeriesTooShort(f"need at least {8 * L} samples, got {x.size}")
    _calibrate(L)
    omegas, v, se, n_seg = _average(x, cfg.dt, L)
    return EstimatedSpectrum(omegas, v, se, n_seg)


def _pulse_block(m, T, n_steps, count, seed, block):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    dt = T / n_steps
    n_ch = m.noise_input.shape[1]
    scale = np.sqrt(m.intensities * dt)
    M = (np.eye(m.state_dim) + dt * m.drift).T
    Bt = m.noise_input.T
    Ct = m.output_state.T * (dt / math.sqrt(T))
    Ft = m.output_feedthrough.T / math.sqrt(T)
    X = rng.standard_normal((count, m.state_dim)) * math.sqrt(0.5)
    acc = np.zeros((count, 2))
    for _ in range(n_steps):
        w = rng.standard_normal((count, n_ch)) * scale
        acc += X @ Ct + w @ Ft
        X = X @ M + w @ Bt
    return acc


def estimate_pulse_variance(p: CouplingParams, T, cfg: SimConfig,
                            model: LinearIOModel | None = None) -> PulseVariances:
    """Sample variances of the square-pulse mode over ``cfg.n_traj`` trajectories.

    Atoms start in the vacuum spin state. Trajectory blocks of
    ``BLOCK_SIZE`` draw from independent substreams keyed by block index
    and are reduced in index order, so results are identical for any
    ``cfg.workers``.
    """
    if T <= 0:
        raise DomainError("T must be > 0")
    if model is None:
        model = build_single_cell(p, pulse_rates(p))
    n_steps = max(1, math.ceil(T / cfg.dt - 1e-9))
    _check_step(model, T / n_steps, allow_marginal=True)
    counts = [min(BLOCK_SIZE, cfg.n_traj - b) for b in range(0, cfg.n_traj, BLOCK_SIZE)]

    def run(block):
        return _pulse_block(model, T, n_steps, counts[block], cfg.seed, block)

    if cfg.workers == 1:
        parts = [run(b) for b in range(len(counts))]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, range(len(counts))))
    acc = np.concatenate(parts)
    n = acc.shape[0]
    var = acc.var(axis=0, ddof=1)
    se = var * math.sqrt(2.0 / (n - 1))
    return PulseVariances(float(var[0]), float(var[1]), float(T), float(se[0]), float(se[1]))
