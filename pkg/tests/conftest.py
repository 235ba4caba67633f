import numpy as np
import pytest
from scipy.linalg import expm

from faraday_squeezing import CouplingParams, derive_rates


@pytest.fixture
def ref_params():
    """kappa2 = 1, tau = 1, gamma = gamma_p = 0.1 (alpha = 10, beta = 1)."""
    p = CouplingParams(kappa2=1.0, tau=1.0, gamma=0.1, gamma_p=0.1)
    return p, derive_rates(p)


@pytest.fixture
def larmor_params():
    p = CouplingParams(kappa2=1.0, tau=1.0, gamma=0.05, gamma_p=0.05, omega_larmor=10.0)
    return p, derive_rates(p)


def van_loan_covariance(A, Q, S0, t):
    """Exact covariance of dX = A X dt + dW, Cov(dW) = Q dt, via one matrix exponential."""
    n = A.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -A
    M[:n, n:] = Q
    M[n:, n:] = A.T
    E = expm(M * t)
    Phi = E[n:, n:].T
    return Phi @ S0 @ Phi.T + Phi @ E[:n, n:]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
