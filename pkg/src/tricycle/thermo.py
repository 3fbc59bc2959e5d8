"""Quadrature and the slow-driving thermodynamic functionals.

Per-branch quantities (entropy change, dissipation coefficient ``sigma``,
thermodynamic length) do not depend on the branch duration and are cached on
the duration-free branch shape.  Heats and cycle metrics then follow
algebraically for any choice of durations.
"""

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson as _scipy_simpson
from scipy.special import entr

from .exceptions import ConsistencyError, DomainError, QuadratureError
from .protocol import domega_ds_raw, omega_raw
from .superop import P0, P1, apply, trace_pair
from .tls import branch_drazin, d_gibbs_ds_raw, gibbs_state, hamiltonian_vector

FD_STEP = 1e-5
SIGMA_ROUTE_RTOL = 1e-6
Q0_ROUTE_TOL = 1e-8
LENGTH_CLAMP = -1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Simpson rule on ``nodes`` points, refined ``refinement`` times by doubling."""

    nodes: int = 801
    refinement: int = 1

    def __post_init__(self):
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise DomainError(f"Simpson needs an odd node count >= 3, got {self.nodes}")
        if self.refinement < 0:
            raise DomainError("refinement must be >= 0")

    def node_counts(self):
        return [(self.nodes - 1) * 2**k + 1 for k in range(self.refinement + 1)]


DEFAULT_QUADRATURE = QuadratureSpec()


def simpson(values, a=0.0, b=1.0):
    """Composite Simpson sum of equally spaced samples (odd count) on ``[a, b]``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Simpson needs an odd sample count >= 3, got {n}")
    return _scipy_simpson(values, dx=(b - a) / (n - 1), axis=-1)


def integrate_with_estimate(f, spec=DEFAULT_QUADRATURE):
    """Integrate vectorized ``f`` over ``[0, 1]``.

    Returns ``(value, estimate)`` where ``value`` comes from the finest grid and
    ``estimate`` is the change produced by the last doubling (``nan`` when
    ``spec.refinement == 0``).
    """
    previous = None
    value = estimate = np.nan
    for n in spec.node_counts():
        s = np.linspace(0.0, 1.0, n)
        y = np.asarray(f(s), dtype=float)
        if not np.all(np.isfinite(y)):
            raise QuadratureError(f"non-finite integrand sample on the {n}-node grid")
        value = float(simpson(y))
        if previous is not None:
            estimate = abs(value - previous)
        previous = value
    return value, estimate


def integrate(f, spec=DEFAULT_QUADRATURE):
    return integrate_with_estimate(f, spec)[0]


def entropy(state):
    """Von Neumann entropy of a diagonal state, ``-sum p ln p`` with ``0 ln 0 = 0``."""
    state = np.asarray(state)
    pops = np.real(state[..., [P1, P0]])
    if np.any(pops < 0.0):
        raise DomainError("negative population in entropy")
    return entr(pops).sum(axis=-1)


def _gibbs_at(b, s):
    return gibbs_state(omega_raw(b, s), b.beta, b.hbar)


def delta_S_eq(b):
    """Equilibrium entropy change from the start to the end of branch ``b``."""
    return float(entropy(_gibbs_at(b, 1.0)) - entropy(_gibbs_at(b, 0.0)))


def lag_vector(b, s):
    """First-order lag ``L^D(s) d rho_eq/ds`` (multiply by ``1/tau`` for the state correction)."""
    return apply(branch_drazin(b, s), d_gibbs_ds_raw(b, s))


def _hamiltonian(b, s):
    return hamiltonian_vector(omega_raw(b, s), b.hbar)


def _dhamiltonian(b, s):
    return hamiltonian_vector(domega_ds_raw(b, s), b.hbar)


def sigma_routes(b, spec=DEFAULT_QUADRATURE, step=FD_STEP):
    """Both evaluations of the dissipation coefficient: ``(direct, by_parts)``.

    The direct route differentiates the lag vector by central differences; the
    by-parts route moves the derivative onto the Hamiltonian and keeps the
    boundary term explicitly.
    """

    def direct(s):
        dlag = (lag_vector(b, s + step) - lag_vector(b, s - step)) / (2.0 * step)
        return trace_pair(_hamiltonian(b, s), dlag)

    def by_parts(s):
        return -trace_pair(_dhamiltonian(b, s), lag_vector(b, s))

    boundary = float(
        trace_pair(_hamiltonian(b, 1.0), lag_vector(b, 1.0))
        - trace_pair(_hamiltonian(b, 0.0), lag_vector(b, 0.0))
    )
    return b.beta * integrate(direct, spec), b.beta * (boundary + integrate(by_parts, spec))


def sigma(b, spec=DEFAULT_QUADRATURE):
    """First-order dissipation coefficient of branch ``b`` (non-positive)."""
    direct, by_parts = sigma_routes(b, spec)
    if abs(direct - by_parts) > SIGMA_ROUTE_RTOL * max(abs(direct), abs(by_parts)) + 1e-14:
        raise ConsistencyError(
            f"sigma routes disagree on branch {b.label}: direct={direct!r}, by-parts={by_parts!r}"
        )
    return direct


def length_integrand(b, s):
    """``Tr[dH/ds L^D drho_eq/ds]``, clamped at zero inside the noise band."""
    g = trace_pair(_dhamiltonian(b, s), lag_vector(b, s))
    if np.any(g < LENGTH_CLAMP):
        raise QuadratureError(
            f"length integrand {np.min(g):.3e} < 0 on branch {b.label}; sign convention broken"
        )
    return np.maximum(g, 0.0)


def thermo_length(b, spec=DEFAULT_QUADRATURE):
    """Thermodynamic length of branch ``b`` in rescaled time."""
    return integrate(lambda s: np.sqrt(length_integrand(b, s)), spec)


def q0_quadrature(b, spec=DEFAULT_QUADRATURE):
    """Quasi-static heat as ``int Tr[H drho_eq/ds] ds``."""
    return integrate(lambda s: trace_pair(_hamiltonian(b, s), d_gibbs_ds_raw(b, s)), spec)


@dataclass(frozen=True)
class BranchFunctionals:
    """Duration-independent functionals of one branch."""

    label: str
    beta: float
    dS_eq: float
    sigma: float
    length: float
    q0_quadrature: float


@functools.lru_cache(maxsize=256)
def _functionals(shape, spec):
    return BranchFunctionals(
        label=shape.label,
        beta=shape.beta,
        dS_eq=delta_S_eq(shape),
        sigma=sigma(shape, spec),
        length=thermo_length(shape, spec),
        q0_quadrature=q0_quadrature(shape, spec),
    )


def branch_functionals(b, spec=DEFAULT_QUADRATURE):
    return _functionals(b.shape_key(), spec)


@dataclass(frozen=True)
class BranchThermo:
    label: str
    tau: float
    beta: float
    dS_eq: float
    sigma: float
    q0: float
    q1: float
    q: float
    length: float
    q0_quadrature: float


def thermo_from_functionals(fn, tau):
    q0 = fn.dS_eq / fn.beta
    q1 = fn.sigma / (fn.beta * tau)
    return BranchThermo(
        label=fn.label, tau=tau, beta=fn.beta, dS_eq=fn.dS_eq, sigma=fn.sigma,
        q0=q0, q1=q1, q=q0 + q1, length=fn.length, q0_quadrature=fn.q0_quadrature,
    )


def branch_thermo(b, spec=DEFAULT_QUADRATURE):
    """Heats and geometry of branch ``b`` at its own duration.

    Raises :class:`ConsistencyError` when the quadrature and entropy routes to
    the quasi-static heat differ by more than ``1e-8 * max(1, |Q0|)``.
    """
    out = thermo_from_functionals(branch_functionals(b, spec), b.tau)
    if abs(out.q0 - out.q0_quadrature) > Q0_ROUTE_TOL * max(1.0, abs(out.q0)):
        raise ConsistencyError(
            f"Q0 routes disagree on branch {b.label}: entropy={out.q0!r}, quadrature={out.q0_quadrature!r}"
        )
    return out


def reversible_cop(Tc, Th, Tp):
    return Tc * (Th - Tp) / (Th * (Tp - Tc))


def reversible_heat_pump_cop(Tc, Th, Tp):
    return Th * (Tp - Tc) / (Tp * (Th - Tc))


def carnot_cop(Tc, Tp):
    return Tc / (Tp - Tc)


def carnot_efficiency(Tc, Tp):
    return (Tp - Tc) / Tp


@dataclass(frozen=True)
class CycleMetrics:
    eps: float
    eps_r: float
    R: float
    tau: float
    dS_en: float
    Lbar2: float
    lh: float
    rh: float
    psi: float
    psi_r: float
    eta: float
    eta_c: float
    P: float
    W: float
    # diagnostics beyond the headline metrics
    tradeoff_rhs: float = 0.0
    dS_en_heat_route: float = 0.0
    heat_balance: float = 0.0
    branches: dict = field(default_factory=dict, compare=False)

    @property
    def lh_minus_rh(self):
        return self.lh - self.rh

    @property
    def tradeoff_residual(self):
        """``lh - dS_en / ((beta_c - beta_p) tau)``; zero only when the heats sum to zero."""
        return self.lh - self.tradeoff_rhs


def _temperatures(cfg):
    return cfg.c.reservoir.T, cfg.h.reservoir.T, cfg.p.reservoir.T


def cycle_branch_thermo(cfg, spec=DEFAULT_QUADRATURE):
    return {label: branch_thermo(b, spec) for label, b in cfg.branches.items()}


def heat_pump_metrics(cfg, spec=DEFAULT_QUADRATURE, thermo=None):
    """``(psi, psi_r, qdot_h)`` for the reversed (heat-pump) operation.

    ``psi = Q_h / Q_p`` with each heat from its own branch.
    """
    th = thermo or cycle_branch_thermo(cfg, spec)
    Tc, Th, Tp = _temperatures(cfg)
    psi = th["h"].q / th["p"].q
    return psi, reversible_heat_pump_cop(Tc, Th, Tp), th["h"].q / cfg.total_time


def heat_pump_bound(cfg, spec=DEFAULT_QUADRATURE, thermo=None):
    """Both sides of ``qdot_h (psi_r/psi - 1) >= sum beta L^2 / ((beta_c - beta_h) tau_v tau)``."""
    th = thermo or cycle_branch_thermo(cfg, spec)
    psi, psi_r, qdot_h = heat_pump_metrics(cfg, spec, th)
    tau = cfg.total_time
    dbeta = cfg.c.beta - cfg.h.beta
    rhs = sum(t.beta * t.length**2 / (dbeta * t.tau * tau) for t in th.values())
    return qdot_h * (psi_r / psi - 1.0), rhs


def engine_reduction_metrics(cfg, spec=DEFAULT_QUADRATURE, thermo=None):
    """Two-reservoir reduction using only the c and p strokes.

    Returns ``(eps2, eps_carnot, P, eta, eta_c)`` with ``W = -(Q_c + Q_p)``,
    ``eps2 = Q_c / W``, ``P = W / (tau_c + tau_p)`` and ``eta = W / (-Q_p)``,
    the efficiency of the same strokes run as an engine.
    """
    th = thermo or {k: branch_thermo(b, spec) for k, b in (("c", cfg.c), ("p", cfg.p))}
    Tc, _, Tp = _temperatures(cfg)
    qc, qp = th["c"].q, th["p"].q
    W = -(qc + qp)
    tau = cfg.c.tau + cfg.p.tau
    return qc / W, carnot_cop(Tc, Tp), W / tau, W / (-qp), carnot_efficiency(Tc, Tp)


def cycle_metrics(cfg, spec=DEFAULT_QUADRATURE):
    """Refrigerator metrics and both sides of the geometric trade-off bound.

    ``lh = R (eps_r/eps - 1)`` and ``rh = Lbar2 / tau``.  The entropy production
    is taken as ``-sum sigma_v / tau_v``; its heat route ``-sum beta_v Q_v`` and
    the trade-off right-hand side are kept as diagnostics.
    """
    th = cycle_branch_thermo(cfg, spec)
    Tc, Th, Tp = _temperatures(cfg)
    bc, bp = cfg.c.beta, cfg.p.beta
    tau = cfg.total_time
    eps = th["c"].q / th["h"].q
    eps_r = reversible_cop(Tc, Th, Tp)
    R = th["c"].q / tau
    dS_en = -sum(t.sigma / t.tau for t in th.values())
    Lbar2 = sum(t.beta * t.length**2 / ((bc - bp) * t.tau) for t in th.values())
    lh = R * (eps_r / eps - 1.0)
    psi, psi_r, _ = heat_pump_metrics(cfg, spec, th)
    _, _, P, eta, eta_c = engine_reduction_metrics(cfg, spec, th)
    return CycleMetrics(
        eps=eps, eps_r=eps_r, R=R, tau=tau, dS_en=dS_en, Lbar2=Lbar2,
        lh=lh, rh=Lbar2 / tau, psi=psi, psi_r=psi_r, eta=eta, eta_c=eta_c,
        P=P, W=-(th["c"].q + th["p"].q),
        tradeoff_rhs=dS_en / ((bc - bp) * tau),
        dS_en_heat_route=-sum(t.beta * t.q for t in th.values()),
        heat_balance=sum(t.q for t in th.values()),
        branches=th,
    )
