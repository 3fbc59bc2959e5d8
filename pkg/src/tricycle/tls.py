"""Driven two-level system coupled to a bosonic bath.

Hamiltonian ``H = hbar * omega * sigma_z / 2`` with the excited level first in
the vectorized layout.  Rates follow ``gamma = gamma0 * omega**alpha`` and the
bath occupation is Bose-Einstein at the reservoir temperature.
"""

import numpy as np
from scipy.special import expit

from .exceptions import NonThermalStateError
from .protocol import check_unit_interval, domega_ds_raw, omega_raw
from .superop import C01, C10, P0, P1

_OVERFLOW = 700.0


def mean_occupation(omega, beta, hbar=1.0):
    """Bose-Einstein occupation ``1 / (exp(beta hbar omega) - 1)``; exactly 0 past ``x > 700``."""
    x = beta * hbar * np.asarray(omega, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        n = np.where(x > _OVERFLOW, 0.0, 1.0 / np.expm1(np.minimum(x, _OVERFLOW)))
    return n if n.ndim else float(n)


def damping_rate(omega, gamma0=1.0, alpha=0.0):
    return gamma0 * np.asarray(omega, dtype=float) ** alpha


def hamiltonian_vector(omega, hbar=1.0):
    """Vectorized ``hbar omega sigma_z / 2`` for scalar or array ``omega``."""
    half = 0.5 * hbar * np.asarray(omega, dtype=float)
    out = np.zeros(half.shape + (4,), dtype=complex)
    out[..., P1] = half
    out[..., P0] = -half
    return out


def liouvillian(omega, gamma, n):
    """Generator of the damped, driven two-level system in the vectorized basis."""
    omega, gamma, n = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (omega, gamma, n)))
    L = np.zeros(omega.shape + (4, 4), dtype=complex)
    down = gamma * (n + 1.0)
    up = gamma * n
    L[..., P1, P1] = -down
    L[..., P1, P0] = up
    L[..., P0, P1] = down
    L[..., P0, P0] = -up
    dephase = -gamma * (n + 0.5)
    L[..., C10, C10] = dephase - 1j * omega
    L[..., C01, C01] = dephase + 1j * omega
    return L


def drazin_tls(omega, gamma, n):
    """Closed-form Drazin inverse of :func:`liouvillian`."""
    omega, gamma, n = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (omega, gamma, n)))
    D = np.zeros(omega.shape + (4, 4), dtype=complex)
    denom = gamma * (2.0 * n + 1.0) ** 2
    D[..., P1, P1] = -(n + 1.0) / denom
    D[..., P1, P0] = n / denom
    D[..., P0, P1] = (n + 1.0) / denom
    D[..., P0, P0] = -n / denom
    dephase = -gamma * (n + 0.5)
    D[..., C10, C10] = 1.0 / (dephase - 1j * omega)
    D[..., C01, C01] = 1.0 / (dephase + 1j * omega)
    return D


def gibbs_state(omega, beta, hbar=1.0):
    """Instantaneous equilibrium state; ``beta = 0`` gives the maximally mixed state."""
    x = beta * hbar * np.asarray(omega, dtype=float)
    p1 = expit(-x)
    out = np.zeros(x.shape + (4,), dtype=complex)
    out[..., P1] = p1
    out[..., P0] = 1.0 - p1
    return out


def _occupation_derivative(b, s):
    """``d rho11 / ds`` along branch ``b``, valid for any real ``s``."""
    w = omega_raw(b, s)
    p1 = expit(-b.beta * b.hbar * w)
    # d p1 / d(beta hbar omega) = -p1 (1 - p1), identical to -n(n+1)/(2n+1)^2.
    return -p1 * (1.0 - p1) * b.beta * b.hbar * domega_ds_raw(b, s)


def d_gibbs_ds_raw(b, s):
    s = np.asarray(s, dtype=float)
    dp = _occupation_derivative(b, s)
    out = np.zeros(s.shape + (4,), dtype=complex)
    out[..., P1] = dp
    out[..., P0] = -dp
    return out


def d_gibbs_ds(b, s):
    """Analytic ``d/ds`` of the branch's Gibbs state (a traceless vector)."""
    return d_gibbs_ds_raw(b, check_unit_interval(s))


def branch_generator(b, s):
    """``(omega, gamma, n)`` of branch ``b`` at rescaled times ``s`` (no domain check)."""
    w = omega_raw(b, s)
    return w, damping_rate(w, b.gamma0, b.alpha), mean_occupation(w, b.beta, b.hbar)


def branch_liouvillian(b, s):
    return liouvillian(*branch_generator(b, s))


def branch_drazin(b, s):
    return drazin_tls(*branch_generator(b, s))


def effective_temperature(state, omega, hbar=1.0, kB=1.0):
    """Temperature that reproduces the level populations of ``state`` at splitting ``omega``."""
    state = np.asarray(state)
    rho1 = float(np.real(state[P1]))
    rho0 = float(np.real(state[P0]))
    if not (rho0 > rho1 > 0.0):
        raise NonThermalStateError(
            f"effective temperature needs rho0 > rho1 > 0, got rho0={rho0}, rho1={rho1}"
        )
    return hbar * omega / (kB * np.log(rho0 / rho1))
