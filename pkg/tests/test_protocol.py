import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tricycle.exceptions import DomainError
from tricycle.protocol import (
    BranchProtocol, Orientation, Reservoir, build_cycle, close_parameters, domega_ds, omega,
    quench_ratios, validate_cycle,
)


def test_closure_default_params():
    zp, dh, dp = close_parameters(2.0, 6.0, 2.4, 2.0, 2.0, 2.0)
    assert (zp, dh, dp) == pytest.approx((1.25, 2.0, 3.2), rel=1e-15)


@given(st.floats(1.0 + 1e-6, 1e3))
def test_symmetric_zeta_closure(z):
    zp, _, _ = close_parameters(2.0, 6.0, 2.4, z, z, 1.0)
    assert zp == pytest.approx((1 + z * z) / (2 * z), rel=1e-14)
    assert zp > 1


def test_closure_rejects_bad_ordering():
    with pytest.raises(DomainError):
        close_parameters(2.0, 2.2, 2.4, 2.0, 2.0, 2.0)


def test_omega_examples():
    fwd = BranchProtocol(Reservoir("c", 2.0), delta=2.0, zeta=2.0)
    rev = BranchProtocol(Reservoir("p", 2.4), delta=3.2, zeta=1.25, orientation=Orientation.REVERSED)
    assert omega(fwd, 0.0) == pytest.approx(6.0)
    assert omega(fwd, 1.0) == pytest.approx(2.0)
    assert omega(rev, 0.0) == pytest.approx(0.8)
    assert omega(rev, 0.0) == pytest.approx(2.4 / 6.0 * omega(build_cycle().h, 1.0))


def test_domega_examples():
    fwd = BranchProtocol(Reservoir("c", 2.0), delta=2.0, zeta=2.0)
    rev = BranchProtocol(Reservoir("p", 2.4), delta=3.2, zeta=1.25, orientation=Orientation.REVERSED)
    for b in (fwd, rev):
        assert domega_ds(b, 0.0) == pytest.approx(0.0, abs=1e-14)
        assert domega_ds(b, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert domega_ds(fwd, 0.5) == pytest.approx(-2 * math.pi)


@pytest.mark.parametrize("orientation", list(Orientation))
def test_domega_matches_finite_difference(orientation):
    b = BranchProtocol(Reservoir("c", 2.0), delta=1.3, zeta=1.7, orientation=orientation)
    s = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (omega(b, s + h) - omega(b, s - h)) / (2 * h)
    np.testing.assert_allclose(domega_ds(b, s), fd, rtol=1e-7, atol=1e-8)


def test_static_branch_is_constant():
    b = BranchProtocol(Reservoir("c", 2.0), delta=2.0, zeta=2.0, driven=False)
    assert np.all(omega(b, np.linspace(0, 1, 5)) == 4.0)
    assert np.all(domega_ds(b, np.linspace(0, 1, 5)) == 0.0)


def test_domain_checks():
    b = build_cycle().c
    with pytest.raises(DomainError):
        omega(b, 1.5)
    with pytest.raises(DomainError):
        BranchProtocol(Reservoir("c", 2.0), delta=2.0, zeta=0.9)
    with pytest.raises(DomainError):
        Reservoir("x", 1.0)


def test_validate_default_params_clean():
    assert validate_cycle(build_cycle()) == []


def test_validate_detects_perturbed_delta_h():
    cfg = build_cycle()
    bad = replace(cfg, h=replace(cfg.h, delta=cfg.h.delta * 1.01))
    names = [v.check for v in validate_cycle(bad)]
    assert any(n.startswith("closure c->h") for n in names)


def test_validate_detects_ordering():
    cfg = build_cycle()
    bad = replace(cfg, p=replace(cfg.p, reservoir=Reservoir("p", 7.0)))
    assert any(v.check.startswith("ordering") for v in validate_cycle(bad))


def test_quench_ratios_match_temperatures():
    for name, (wr, tr) in quench_ratios(build_cycle()).items():
        assert wr == pytest.approx(tr, rel=1e-14), name


def test_with_durations_and_alpha():
    cfg = build_cycle().with_durations(3.0, 4.0, 5.0).with_alpha(1.2)
    assert cfg.taus == {"c": 3.0, "h": 4.0, "p": 5.0}
    assert cfg.total_time == 12.0
    assert {b.alpha for b in cfg.branches.values()} == {1.2}
