"""Cosine frequency schedules and the quench closure of the tricycle.

All schedules are evaluated in rescaled time ``s = t / tau`` on ``[0, 1]``;
the branch duration only enters thermodynamic quantities as a prefactor.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError


class Orientation(enum.Enum):
    FORWARD = "forward"
    REVERSED = "reversed"


@dataclass(frozen=True)
class Reservoir:
    label: str
    T: float
    kB: float = 1.0

    def __post_init__(self):
        if self.label not in ("c", "h", "p"):
            raise DomainError(f"reservoir label must be one of c, h, p; got {self.label!r}")
        if not self.T > 0:
            raise DomainError(f"temperature must be positive, got {self.T}")

    @property
    def beta(self):
        return 1.0 / (self.kB * self.T)


@dataclass(frozen=True)
class BranchProtocol:
    """One isothermal stroke: ``omega(s) = delta * (cos(pi s) + zeta)``.

    Reversed branches run ``cos(pi (1 - s))``.  ``driven=False`` freezes the
    frequency at ``delta * zeta``; it exists for static-drive checks.
    """

    reservoir: Reservoir
    delta: float
    zeta: float
    tau: float = 1.0
    orientation: Orientation = Orientation.FORWARD
    alpha: float = 0.0
    gamma0: float = 1.0
    hbar: float = 1.0
    driven: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"amplitude delta must be positive, got {self.delta}")
        if not self.zeta > 1:
            raise DomainError(f"displacement zeta must exceed 1, got {self.zeta}")
        if not self.tau > 0:
            raise DomainError(f"duration tau must be positive, got {self.tau}")
        if self.alpha < 0:
            raise DomainError(f"spectral exponent alpha must be >= 0, got {self.alpha}")
        if not self.gamma0 > 0:
            raise DomainError(f"coupling gamma0 must be positive, got {self.gamma0}")

    @property
    def label(self):
        return self.reservoir.label

    @property
    def beta(self):
        return self.reservoir.beta

    def shape_key(self):
        """The branch with its duration normalized; duration-free functionals cache on this."""
        return replace(self, tau=1.0)


@dataclass(frozen=True)
class CycleConfig:
    c: BranchProtocol
    h: BranchProtocol
    p: BranchProtocol
    hbar: float = 1.0
    kB: float = 1.0

    @property
    def branches(self):
        return {"c": self.c, "h": self.h, "p": self.p}

    @property
    def taus(self):
        return {"c": self.c.tau, "h": self.h.tau, "p": self.p.tau}

    @property
    def total_time(self):
        return self.c.tau + self.h.tau + self.p.tau

    def with_durations(self, tau_c=None, tau_h=None, tau_p=None):
        return replace(
            self,
            c=self.c if tau_c is None else replace(self.c, tau=tau_c),
            h=self.h if tau_h is None else replace(self.h, tau=tau_h),
            p=self.p if tau_p is None else replace(self.p, tau=tau_p),
        )

    def with_alpha(self, alpha):
        return replace(
            self,
            c=replace(self.c, alpha=alpha),
            h=replace(self.h, alpha=alpha),
            p=replace(self.p, alpha=alpha),
        )


def close_parameters(Tc, Th, Tp, zeta_c, zeta_h, delta_c):
    """Solve the three quench-matching conditions for ``(zeta_p, delta_h, delta_p)``."""
    if not (zeta_c > 1 and zeta_h > 1):
        raise DomainError("zeta_c and zeta_h must exceed 1")
    if not delta_c > 0:
        raise DomainError("delta_c must be positive")
    if not Th > Tp > Tc > 0:
        raise DomainError(f"need Th > Tp > Tc > 0, got Tc={Tc}, Tp={Tp}, Th={Th}")
    zeta_p = (1 + zeta_c * zeta_h) / (zeta_c + zeta_h)
    if not zeta_p > 1:
        raise DomainError(f"closure gives zeta_p = {zeta_p} <= 1; omega_p would reach zero")
    delta_h = Th * (zeta_c - 1) / (Tc * (1 + zeta_h)) * delta_c
    delta_p = Tp * (zeta_c + zeta_h) / (Tc * (1 + zeta_h)) * delta_c
    return zeta_p, delta_h, delta_p


def build_cycle(
    Tc=2.0,
    Th=6.0,
    Tp=2.4,
    zeta_c=2.0,
    zeta_h=2.0,
    delta_c=None,
    alpha=0.0,
    gamma0=1.0,
    taus=(1.0, 1.0, 1.0),
    hbar=1.0,
    kB=1.0,
    driven=True,
):
    """Closed tricycle from its seeds.  Defaults are the reference parameter set.

    ``delta_c`` defaults to ``kB * Tc / hbar``.
    """
    if delta_c is None:
        delta_c = kB * Tc / hbar
    zeta_p, delta_h, delta_p = close_parameters(Tc, Th, Tp, zeta_c, zeta_h, delta_c)
    common = dict(alpha=alpha, gamma0=gamma0, hbar=hbar, driven=driven)
    tau_c, tau_h, tau_p = taus
    return CycleConfig(
        c=BranchProtocol(Reservoir("c", Tc, kB), delta_c, zeta_c, tau_c, **common),
        h=BranchProtocol(Reservoir("h", Th, kB), delta_h, zeta_h, tau_h, **common),
        p=BranchProtocol(
            Reservoir("p", Tp, kB), delta_p, zeta_p, tau_p, orientation=Orientation.REVERSED, **common
        ),
        hbar=hbar,
        kB=kB,
    )


def build_two_reservoir_cycle(Tc=2.0, Tp=2.4, zeta_c=2.0, delta_c=None, alpha=0.0, gamma0=1.0,
                              taus=(1.0, 1.0), hbar=1.0, kB=1.0):
    """Carnot-like cycle with only the c and p strokes, quenched directly into each other.

    Matching ``omega_p(0) = (Tp/Tc) omega_c(1)`` and ``omega_c(0) = (Tc/Tp) omega_p(1)``
    gives ``zeta_p = zeta_c`` and ``delta_p = (Tp/Tc) delta_c``.  The returned
    config carries a placeholder h branch identical to c; only c and p are used
    by the two-reservoir metrics.
    """
    if delta_c is None:
        delta_c = kB * Tc / hbar
    common = dict(alpha=alpha, gamma0=gamma0, hbar=hbar)
    c = BranchProtocol(Reservoir("c", Tc, kB), delta_c, zeta_c, taus[0], **common)
    p = BranchProtocol(Reservoir("p", Tp, kB), Tp / Tc * delta_c, zeta_c, taus[1],
                       orientation=Orientation.REVERSED, **common)
    return CycleConfig(c=c, h=replace(c, reservoir=Reservoir("h", Tc, kB)), p=p, hbar=hbar, kB=kB)


def _phase(b, s):
    return np.pi * (1.0 - s) if b.orientation is Orientation.REVERSED else np.pi * s


def check_unit_interval(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(~np.isfinite(arr)):
        raise DomainError("rescaled time s must lie in [0, 1]")
    return arr


def omega_raw(b, s):
    """Schedule without the domain check; smooth continuation outside [0, 1]."""
    s = np.asarray(s, dtype=float)
    if not b.driven:
        return np.full_like(s, b.delta * b.zeta)
    return b.delta * (np.cos(_phase(b, s)) + b.zeta)


def domega_ds_raw(b, s):
    s = np.asarray(s, dtype=float)
    if not b.driven:
        return np.zeros_like(s)
    # d/ds cos(pi (1 - s)) = +pi sin(pi (1 - s)); written with the chain-rule sign.
    sign = -1.0 if b.orientation is Orientation.FORWARD else 1.0
    return sign * np.pi * b.delta * np.sin(_phase(b, s))


def omega(b, s):
    """Angular frequency of branch ``b`` at rescaled time ``s``."""
    out = omega_raw(b, check_unit_interval(s))
    return out if out.ndim else float(out)


def domega_ds(b, s):
    """Derivative of :func:`omega` with respect to ``s``; zero at both endpoints."""
    out = domega_ds_raw(b, check_unit_interval(s))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Violation:
    check: str
    magnitude: float

    def __str__(self):
        return f"{self.check}: {self.magnitude:.3e}"


def validate_cycle(cfg, rtol=1e-10):
    """List the violated cycle invariants; an empty list means the config is valid."""
    out = []
    c, h, p = cfg.c, cfg.h, cfg.p
    Tc, Th, Tp = c.reservoir.T, h.reservoir.T, p.reservoir.T
    if not Th > Tp:
        out.append(Violation("ordering Th > Tp", Tp - Th))
    if not Tp > Tc:
        out.append(Violation("ordering Tp > Tc", Tc - Tp))
    if not Tc > 0:
        out.append(Violation("positivity Tc > 0", -Tc))
    for label, b in cfg.branches.items():
        if b.label != label:
            out.append(Violation(f"branch {label} attached to reservoir {b.label}", 1.0))
        if abs(b.beta * b.reservoir.T * b.reservoir.kB - 1.0) > 1e-14:
            out.append(Violation(f"beta*T*kB = 1 on branch {label}", abs(b.beta * b.reservoir.T * b.reservoir.kB - 1.0)))
        if b.hbar != cfg.hbar or b.reservoir.kB != cfg.kB:
            out.append(Violation(f"constants on branch {label} differ from cycle constants", 1.0))
    expected = {
        "c": Orientation.FORWARD, "h": Orientation.FORWARD, "p": Orientation.REVERSED,
    }
    for label, b in cfg.branches.items():
        if b.orientation is not expected[label]:
            out.append(Violation(f"orientation of branch {label}", 1.0))

    def ratio_check(name, lhs, rhs):
        err = abs(lhs / rhs - 1.0)
        if not err <= rtol:
            out.append(Violation(name, err))

    ratio_check("closure c->h: delta_c(zeta_c-1)/[delta_h(zeta_h+1)] = Tc/Th",
                c.delta * (c.zeta - 1) / (h.delta * (h.zeta + 1)), Tc / Th)
    ratio_check("closure h->p: delta_h(zeta_h-1)/[delta_p(zeta_p-1)] = Th/Tp",
                h.delta * (h.zeta - 1) / (p.delta * (p.zeta - 1)), Th / Tp)
    ratio_check("closure p->c: delta_p(zeta_p+1)/[delta_c(zeta_c+1)] = Tp/Tc",
                p.delta * (p.zeta + 1) / (c.delta * (c.zeta + 1)), Tp / Tc)
    return out


def quench_ratios(cfg):
    """Frequency ratio across each quench paired with its temperature ratio.

    Returns ``{name: (omega_after / omega_before, T_after / T_before)}``.
    """
    c, h, p = cfg.c, cfg.h, cfg.p
    pairs = {"c->h": (c, h), "h->p": (h, p), "p->c": (p, c)}
    return {
        name: (float(omega_raw(after, 0.0) / omega_raw(before, 1.0)),
               after.reservoir.T / before.reservoir.T)
        for name, (before, after) in pairs.items()
    }


__all__ = [
    "Orientation", "Reservoir", "BranchProtocol", "CycleConfig", "Violation",
    "close_parameters", "build_cycle", "build_two_reservoir_cycle", "omega", "domega_ds",
    "omega_raw", "domega_ds_raw", "validate_cycle", "quench_ratios",
]
