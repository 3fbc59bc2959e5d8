"""Direct integration of the master equation around the cycle.

This is the independent check on the slow-driving expansion: states and heats
come from a fixed-step RK4 solution of ``d rho/dt = L(t) rho`` rather than
from the Drazin-inverse formulas.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DomainError, IntegratorError
from .protocol import domega_ds_raw, omega_raw
from .superop import C10, P0, P1, apply, trace_pair
from .thermo import branch_thermo, entropy, lag_vector, simpson
from .tls import branch_generator, branch_liouvillian, gibbs_state, hamiltonian_vector

MIN_STEPS = 1000
DEFAULT_MIN_STEPS = 4000
POSITIVITY_TOL = 1e-7


@dataclass
class Trajectory:
    label: str
    tau: float
    s: np.ndarray
    states: np.ndarray

    @property
    def t(self):
        return self.tau * self.s

    @property
    def final(self):
        return self.states[-1]


def trace_norm(x):
    """Trace norm of a vectorized Hermitian 2x2 operator (batched)."""
    x = np.asarray(x)
    a, d = x[..., P1].real, x[..., P0].real
    off = np.abs(x[..., C10])
    mid = 0.5 * (a + d)
    rad = np.sqrt((0.5 * (a - d)) ** 2 + off**2)
    return np.abs(mid + rad) + np.abs(mid - rad)


def default_steps(b, minimum=DEFAULT_MIN_STEPS):
    """``20 tau / dt_char`` with ``dt_char`` the fastest relaxation time on the branch, rounded up to even."""
    s = np.linspace(0.0, 1.0, 201)
    _, gamma, n = branch_generator(b, s)
    rate = float(np.max(gamma * (2.0 * n + 1.0)))
    steps = max(minimum, int(math.ceil(20.0 * b.tau * rate)))
    return steps + steps % 2


def _check_physical(states, label):
    pops = states[:, [P1, P0]].real
    worst = max(-pops.min(), pops.max() - 1.0, 0.0)
    coh = np.abs(states[:, C10]) ** 2 - pops[:, 0] * pops[:, 1]
    worst = max(worst, float(coh.max()))
    if worst > POSITIVITY_TOL:
        raise IntegratorError(
            f"branch {label}: positivity breached by {worst:.3e}; step size too coarse"
        )


def evolve_branch(b, initial, steps=None):
    """Classic RK4 over ``[0, tau]`` with ``steps`` equal steps (``steps >= 1000``, even).

    Returns the states at every step so heats can be integrated by Simpson's rule.
    """
    if steps is None:
        steps = default_steps(b)
    if steps < MIN_STEPS:
        raise DomainError(f"need at least {MIN_STEPS} steps, got {steps}")
    if steps % 2:
        raise DomainError("step count must be even for Simpson heat integration")
    h = b.tau / steps
    gens = branch_liouvillian(b, np.linspace(0.0, 1.0, 2 * steps + 1))
    states = np.empty((steps + 1, 4), dtype=complex)
    rho = np.asarray(initial, dtype=complex).copy()
    states[0] = rho
    for k in range(steps):
        L0, Lm, L1 = gens[2 * k], gens[2 * k + 1], gens[2 * k + 2]
        k1 = L0 @ rho
        k2 = Lm @ (rho + 0.5 * h * k1)
        k3 = Lm @ (rho + 0.5 * h * k2)
        k4 = L1 @ (rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = rho
    _check_physical(states, b.label)
    return Trajectory(b.label, b.tau, np.linspace(0.0, 1.0, steps + 1), states)


def branch_heat(b, traj):
    """``int Tr[H(t) L(t) rho(t)] dt`` over the trajectory grid."""
    s = traj.s
    H = hamiltonian_vector(omega_raw(b, s), b.hbar)
    rate = trace_pair(H, apply(branch_liouvillian(b, s), traj.states))
    return float(simpson(rate, 0.0, b.tau))


def branch_drive_work(b, traj):
    """``int Tr[rho dH/dt] dt``, the work done by the drive during the stroke."""
    dH = hamiltonian_vector(domega_ds_raw(b, traj.s), b.hbar)
    return float(simpson(trace_pair(dH, traj.states)))


@dataclass
class CycleRun:
    trajectories: dict
    heats: dict
    drive_work: dict
    quench_energy: dict
    initial: np.ndarray
    final: np.ndarray
    energy_initial: float
    energy_final: float
    entropy_jumps: dict = field(default_factory=dict)

    @property
    def closure_norm(self):
        return float(trace_norm(self.final - self.initial))

    @property
    def throughput(self):
        parts = list(self.heats.values()) + list(self.drive_work.values()) + list(self.quench_energy.values())
        return sum(abs(x) for x in parts)

    @property
    def energy_audit(self):
        """Heats + drive work + quench energies minus the net energy change (bookkeeping residual)."""
        total = sum(self.heats.values()) + sum(self.drive_work.values()) + sum(self.quench_energy.values())
        return total - (self.energy_final - self.energy_initial)


def _energy(b, s, rho):
    return float(trace_pair(hamiltonian_vector(omega_raw(b, s), b.hbar), rho))


def run_cycle(cfg, steps_per_branch=None, initial=None):
    """Integrate c -> quench -> h -> quench -> p -> quench starting from the Gibbs state at A.

    The state is carried unchanged through each quench; the energy jump
    ``Tr[(H_after - H_before) rho]`` is recorded separately.
    """
    order = [("c", "h"), ("h", "p"), ("p", "c")]
    branches = cfg.branches
    rho0 = gibbs_state(omega_raw(cfg.c, 0.0), cfg.c.beta, cfg.c.hbar) if initial is None else np.asarray(initial, dtype=complex)
    rho = rho0
    trajs, heats, works, quench, jumps = {}, {}, {}, {}, {}
    for label, nxt in order:
        b = branches[label]
        steps = steps_per_branch if steps_per_branch is not None else default_steps(b)
        traj = evolve_branch(b, rho, steps)
        trajs[label] = traj
        heats[label] = branch_heat(b, traj)
        works[label] = branch_drive_work(b, traj)
        before = traj.final
        rho = before.copy()  # sudden quench: the state is not touched
        key = f"{label}->{nxt}"
        quench[key] = _energy(branches[nxt], 0.0, rho) - _energy(b, 1.0, before)
        jumps[key] = float(entropy(rho) - entropy(before))
    return CycleRun(
        trajectories=trajs, heats=heats, drive_work=works, quench_energy=quench,
        initial=rho0, final=rho,
        energy_initial=_energy(cfg.c, 0.0, rho0), energy_final=_energy(cfg.c, 0.0, rho),
        entropy_jumps=jumps,
    )


@dataclass
class ScalingReport:
    taus: list
    state_errors: list
    heat_errors: list
    slope_state: float
    slope_heat: float
    exact: bool = False
    window: tuple = (-2.5, -1.5)

    @property
    def passed(self):
        if self.exact:
            return True
        lo, hi = self.window
        return lo <= self.slope_state <= hi and lo <= self.slope_heat <= hi


def _loglog_slope(taus, errs):
    return float(np.polyfit(np.log(taus), np.log(errs), 1)[0])


def perturbation_order_check(cfg, tau_list, steps=None, exact_tol=1e-13):
    """Measure how the first-order expansion's state and heat errors scale with duration.

    ``tau_list`` must hold at least three durations, each double the previous.
    Errors are taken on branch c starting from its Gibbs state.
    """
    taus = [float(t) for t in tau_list]
    if len(taus) < 3:
        raise DomainError("need at least three durations on the ladder")
    for lo, hi in zip(taus, taus[1:]):
        if abs(hi / lo - 2.0) > 1e-9:
            raise DomainError(f"ladder must double at every rung, got {lo} -> {hi}")

    state_errs, heat_errs = [], []
    for tau in taus:
        b = replace(cfg.c, tau=tau)
        rho0 = gibbs_state(omega_raw(b, 0.0), b.beta, b.hbar)
        traj = evolve_branch(b, rho0, steps if steps is not None else default_steps(b))
        pert = gibbs_state(omega_raw(b, traj.s), b.beta, b.hbar) + lag_vector(b, traj.s) / tau
        state_errs.append(float(np.max(trace_norm(traj.states - pert))))
        th = branch_thermo(b)
        heat_errs.append(abs(branch_heat(b, traj) - th.q))

    if max(state_errs) <= exact_tol and max(heat_errs) <= exact_tol:
        return ScalingReport(taus, state_errs, heat_errs, math.nan, math.nan, exact=True)
    for errs, name in ((state_errs, "state"), (heat_errs, "heat")):
        if any(b >= a for a, b in zip(errs, errs[1:])):
            raise IntegratorError(f"{name} error does not decrease along the ladder: {errs}")
    return ScalingReport(
        taus, state_errs, heat_errs, _loglog_slope(taus, state_errs), _loglog_slope(taus, heat_errs)
    )
