import math
from dataclasses import replace

import numpy as np
import pytest

from tricycle.exceptions import DomainError
from tricycle.oracle import (
    default_steps, evolve_branch, perturbation_order_check, run_cycle, trace_norm,
)
from tricycle.protocol import BranchProtocol, Reservoir, build_cycle
from tricycle.superop import state_vector
from tricycle.tls import gibbs_state, mean_occupation


def _static(tau=3.0):
    return BranchProtocol(Reservoir("c", 2.0), delta=2.0, zeta=2.0, tau=tau, alpha=0.8, driven=False)


def test_trace_norm():
    assert trace_norm(state_vector(0.3)) == pytest.approx(1.0)
    assert trace_norm(np.array([0.1, 0, 0, -0.1])) == pytest.approx(0.2)


def test_static_gibbs_is_fixed():
    b = _static()
    rho = gibbs_state(4.0, b.beta)
    traj = evolve_branch(b, rho, 2000)
    assert np.max(np.abs(traj.final - rho)) < 1e-10


def test_static_offset_decay():
    b = _static()
    eps0 = 0.05
    rho = gibbs_state(4.0, b.beta) + np.array([eps0, 0, 0, -eps0])
    traj = evolve_branch(b, rho, 4000)
    n = mean_occupation(4.0, b.beta)
    gamma = 4.0**0.8
    expected = eps0 * math.exp(-gamma * (2 * n + 1) * b.tau)
    got = (traj.final - gibbs_state(4.0, b.beta))[0].real
    assert got == pytest.approx(expected, rel=1e-6)


def test_step_validation():
    b = _static()
    with pytest.raises(DomainError):
        evolve_branch(b, gibbs_state(4.0, b.beta), 999)
    with pytest.raises(DomainError):
        evolve_branch(b, gibbs_state(4.0, b.beta), 1001)
    assert default_steps(b) % 2 == 0


@pytest.mark.slow
def test_cycle_run_closes_and_audits():
    cfg = build_cycle(alpha=0.8, taus=(100.0, 100.0, 100.0))
    run = run_cycle(cfg)
    assert run.closure_norm < 1e-4
    assert abs(run.energy_audit) < 1e-8 * run.throughput
    # quenches leave the state, and hence its entropy, untouched
    assert all(j == 0.0 for j in run.entropy_jumps.values())
    for v in "chp":
        assert run.heats[v] == pytest.approx(
            {"c": 0.7799, "h": 0.5828, "p": -1.1790}[v], abs=2e-3
        )


@pytest.mark.slow
def test_perturbation_ratios():
    rep = perturbation_order_check(build_cycle(alpha=0.8), [40.0, 80.0, 160.0])
    e, d = rep.state_errors, rep.heat_errors
    assert 3 <= e[0] / e[1] <= 5
    assert 3 <= d[1] / d[2] <= 5
    assert rep.passed


def test_static_ladder_is_exact():
    rep = perturbation_order_check(build_cycle(alpha=0.8, driven=False), [40.0, 80.0, 160.0], steps=1000)
    assert rep.exact and rep.passed
    assert math.isnan(rep.slope_state)


def test_ladder_validation():
    with pytest.raises(DomainError):
        perturbation_order_check(build_cycle(), [40.0, 80.0])
    with pytest.raises(DomainError):
        perturbation_order_check(build_cycle(), [40.0, 80.0, 200.0])
