"""Vectorized two-level density-matrix algebra.

States and observables are length-4 complex arrays in the fixed order
``(rho11, rho10, rho01, rho00)``; superoperators are 4x4 complex arrays acting
on that layout.  Every function accepts a leading batch shape, so a whole
quadrature grid can be pushed through in one call.
"""

import numpy as np

from .exceptions import DegenerateSpectrumError, DomainError, HermiticityError

#: Indices of the populations and coherences in the vectorized layout.
P1, C10, C01, P0 = 0, 1, 2, 3

IDENTITY = np.eye(4, dtype=complex)

# Tr[A rho] = sum_ij A_ij rho_ji, i.e. coherences pair crosswise.
_PAIRING = np.array([P1, C01, C10, P0])


def state_vector(rho11, rho10=0.0, rho00=None):
    """Build a Hermitian state vector; ``rho00`` defaults to ``1 - rho11``."""
    if rho00 is None:
        rho00 = 1.0 - rho11
    return np.array([rho11, rho10, np.conj(rho10), rho00], dtype=complex)


def observable_vector(a11, a10=0.0, a00=0.0):
    """Vectorize the Hermitian observable ``[[a11, a10], [conj(a10), a00]]``."""
    return np.array([a11, a10, np.conj(a10), a00], dtype=complex)


def to_matrix(x):
    """Reshape a vectorized operator into its 2x2 matrix ``[[x11, x10], [x01, x00]]``."""
    x = np.asarray(x)
    return x.reshape(x.shape[:-1] + (2, 2))


def check_state(x, traceless=False, atol=1e-12):
    """Raise :class:`DomainError` unless ``x`` is a physical (or traceless) state.

    Physical states have unit trace, Hermitian coherences and populations in
    ``[0, 1]``.  Difference vectors (``traceless=True``) only need zero trace
    and Hermiticity.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != 4:
        raise DomainError(f"state vectors have 4 entries, got shape {x.shape}")
    trace = x[..., P1] + x[..., P0]
    target = 0.0 if traceless else 1.0
    if np.any(np.abs(trace - target) > atol):
        raise DomainError(f"trace {np.max(np.abs(trace - target)):.3e} away from {target}")
    herm = np.abs(x[..., C01] - np.conj(x[..., C10]))
    if np.any(herm > atol):
        raise DomainError(f"coherences not conjugate (max mismatch {np.max(herm):.3e})")
    if not traceless:
        pops = x[..., [P1, P0]]
        if np.any(np.abs(pops.imag) > atol):
            raise DomainError("populations have an imaginary part")
        if np.any(pops.real < -atol) or np.any(pops.real > 1 + atol):
            raise DomainError("populations outside [0, 1]")
    return x


def trace_pair(obs, x, tol=1e-10):
    """Return the real expectation ``Tr[obs @ x]`` of vectorized operators.

    Raises :class:`HermiticityError` if the imaginary residue exceeds ``tol``
    (relative to the magnitude of the result, floored at 1).
    """
    obs = np.asarray(obs, dtype=complex)
    x = np.asarray(x, dtype=complex)
    value = np.sum(obs * x[..., _PAIRING], axis=-1)
    scale = np.maximum(1.0, np.abs(value.real))
    if np.any(np.abs(value.imag) > tol * scale):
        raise HermiticityError(
            f"imaginary residue {np.max(np.abs(value.imag)):.3e} in trace pairing"
        )
    return value.real


def apply(s, x):
    """Matrix-vector product of a (batched) superoperator with a (batched) state."""
    return np.einsum("...ij,...j->...i", np.asarray(s), np.asarray(x))


def drazin(s, kernel_tol=1e-12, gap_tol=1e-9):
    """Drazin inverse of a generator with a one-dimensional, gapped kernel.

    With ``P`` the spectral projector onto the kernel (right null vector times
    left null vector, normalized), ``L^D = (L + P)^{-1} - P``.  The eigenvalue
    of smallest modulus is taken as the stationary one.  Tolerances are scaled
    by ``max(1, ||s||)``.
    """
    s = np.asarray(s, dtype=complex)
    if s.shape[-2:] != (4, 4):
        raise DomainError(f"expected a 4x4 superoperator, got shape {s.shape}")
    if s.ndim > 2:
        flat = s.reshape(-1, 4, 4)
        out = np.stack([drazin(m, kernel_tol, gap_tol) for m in flat])
        return out.reshape(s.shape)

    scale = max(1.0, np.linalg.norm(s, 2))
    evals, right = np.linalg.eig(s)
    order = np.argsort(np.abs(evals))
    lam0, lam1 = evals[order[0]], evals[order[1]]
    if abs(lam0) >= kernel_tol * scale:
        raise DegenerateSpectrumError(f"no stationary eigenvalue (smallest |lambda| = {abs(lam0):.3e})")
    if abs(lam1) < gap_tol * scale:
        raise DegenerateSpectrumError(
            f"kernel is not one-dimensional or spectral gap too small (|lambda_1| = {abs(lam1):.3e})"
        )
    r = right[:, order[0]]
    levals, left = np.linalg.eig(s.T)
    l = left[:, np.argmin(np.abs(levals))]
    P = np.outer(r, l) / (l @ r)
    return np.linalg.inv(s + P) - P


def drazin_residuals(s, sd):
    """Relative residuals of the three defining Drazin identities.

    Returns ``(L Ld L - L, Ld L Ld - Ld, L Ld - Ld L)`` as max-abs errors, each
    normalized by the max-abs entry of the matrix it should reproduce.
    """
    s = np.asarray(s, dtype=complex)
    sd = np.asarray(sd, dtype=complex)

    def rel(a, b):
        return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)

    comm = s @ sd - sd @ s
    return (
        rel(s @ sd @ s, s),
        rel(sd @ s @ sd, sd),
        np.max(np.abs(comm)) / max(np.max(np.abs(s @ sd)), 1e-300),
    )
