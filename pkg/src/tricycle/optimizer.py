"""Duration allocation from the stationarity condition of the cooling-rate Lagrangian.

With both multipliers eliminated the optimum satisfies

    dS_h tau_h^2 / S_h + dS_p tau_p^2 / S_p + dS_c tau_c^2 / S_c + 2 (tau_c + tau_h + tau_p) = 0

where ``dS_v`` are equilibrium entropy changes and ``S_v`` dissipation
coefficients.  Both are independent of the durations, so the condition is a
quadratic in any single duration.
"""

import math
from dataclasses import dataclass, field

from .exceptions import DomainError, InfeasibleError
from .thermo import DEFAULT_QUADRATURE, branch_functionals, reversible_cop

LABELS = ("c", "h", "p")


def constraint_residual(dS, Sg, taus):
    """Left-hand side of the time constraint; ``dS``, ``Sg``, ``taus`` map c/h/p to floats."""
    for v in LABELS:
        if Sg[v] == 0:
            raise ZeroDivisionError(f"sigma_{v} = 0: the constraint does not apply to a static branch")
    return sum(dS[v] * taus[v] ** 2 / Sg[v] for v in LABELS) + 2.0 * sum(taus[v] for v in LABELS)


def quadratic_roots(a, b, c):
    """Real roots of ``a x^2 + b x + c`` by the cancellation-free formula, ascending.

    Raises :class:`InfeasibleError` (carrying the discriminant) when there are none.
    """
    if a == 0:
        if b == 0:
            raise InfeasibleError("degenerate quadratic", discriminant=None)
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise InfeasibleError(f"no real root (discriminant {disc:.6g})", discriminant=disc)
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0:
        return [0.0, 0.0]
    return sorted([q / a, c / q])


def _positive_root(a, C, score):
    """Positive root of ``a x^2 + 2 x + C``; of two, the one with the larger ``score``."""
    try:
        roots = quadratic_roots(a, 2.0, C)
    except InfeasibleError as exc:
        raise InfeasibleError(f"no positive duration: {exc}", discriminant=exc.discriminant) from None
    positive = [r for r in roots if r > 0]
    if not positive:
        raise InfeasibleError(
            f"no positive root among {roots}", discriminant=4.0 - 4.0 * a * C
        )
    if len(positive) == 1:
        return positive[0], 1
    return max(positive, key=score), 2


def _cooling_score(dS, Sg, tau_c, fixed):
    # R up to the positive factor 1/beta_c.
    qc = dS["c"] + Sg["c"] / tau_c

    def score(x):
        return qc / (fixed + x)

    return score


def solve_tau_h(dS, Sg, tau_c, tau_p):
    """Hot-branch duration solving the constraint at fixed ``(tau_c, tau_p)``.

    Requires ``dS_h / S_h < 0``.  Of two positive roots the one giving the
    larger cooling rate is returned.
    """
    return _solve_tau_h(dS, Sg, tau_c, tau_p)[0]


def _solve_tau_h(dS, Sg, tau_c, tau_p):
    a = dS["h"] / Sg["h"]
    if not a < 0:
        raise DomainError(f"need dS_h / sigma_h < 0, got {a}")
    C = dS["p"] * tau_p**2 / Sg["p"] + dS["c"] * tau_c**2 / Sg["c"] + 2.0 * (tau_c + tau_p)
    return _positive_root(a, C, _cooling_score(dS, Sg, tau_c, tau_c + tau_p))


@dataclass(frozen=True)
class AllocationResult:
    tau_c: float
    tau_h: float
    tau_p: float
    residual: float
    dS: dict = field(compare=False)
    Sg: dict = field(compare=False)
    positive_roots: int = 1

    @property
    def taus(self):
        return {"c": self.tau_c, "h": self.tau_h, "p": self.tau_p}

    @property
    def tau(self):
        return self.tau_c + self.tau_h + self.tau_p

    @property
    def residual_ok(self):
        return abs(self.residual) < 1e-9 * 2.0 * self.tau


def branch_coefficients(cfg, spec=DEFAULT_QUADRATURE):
    """``(dS, Sg)`` dictionaries for the three branches of ``cfg``."""
    fns = {v: branch_functionals(b, spec) for v, b in cfg.branches.items()}
    return {v: f.dS_eq for v, f in fns.items()}, {v: f.sigma for v, f in fns.items()}


def allocate_tau_h(cfg, tau_c, tau_p, spec=DEFAULT_QUADRATURE):
    """:func:`solve_tau_h` on the functionals of ``cfg``, packaged as an :class:`AllocationResult`."""
    dS, Sg = branch_coefficients(cfg, spec)
    tau_h, nroots = _solve_tau_h(dS, Sg, tau_c, tau_p)
    taus = {"c": tau_c, "h": tau_h, "p": tau_p}
    return AllocationResult(tau_c, tau_h, tau_p, constraint_residual(dS, Sg, taus), dS, Sg, nroots)


def solve_fixed_cop(cfg, tau_c, eps_target, spec=DEFAULT_QUADRATURE):
    """Durations ``(tau_h, tau_p)`` reaching COP ``eps_target`` at the given ``tau_c``.

    ``tau_h`` follows from the COP in closed form, then ``tau_p`` from the time
    constraint (quadratic with positive leading coefficient).
    """
    Tc, Th, Tp = cfg.c.reservoir.T, cfg.h.reservoir.T, cfg.p.reservoir.T
    eps_r = reversible_cop(Tc, Th, Tp)
    # eps_r carries rounding from the temperature differences; treat targets within 1e-12 as reaching it
    if not 0 < eps_target < eps_r * (1.0 - 1e-12):
        raise InfeasibleError(f"target COP {eps_target} outside (0, eps_r = {eps_r})")
    dS, Sg = branch_coefficients(cfg, spec)

    denom = Tc * (dS["c"] + Sg["c"] / tau_c) / (Th * eps_target) - dS["h"]
    tau_h = Sg["h"] / denom if denom != 0 else math.inf
    if not (0 < tau_h < math.inf):
        raise InfeasibleError(f"COP {eps_target} needs tau_h = {tau_h}")

    a = dS["p"] / Sg["p"]
    C = dS["h"] * tau_h**2 / Sg["h"] + dS["c"] * tau_c**2 / Sg["c"] + 2.0 * (tau_c + tau_h)
    tau_p, nroots = _positive_root(a, C, _cooling_score(dS, Sg, tau_c, tau_c + tau_h))
    taus = {"c": tau_c, "h": tau_h, "p": tau_p}
    return AllocationResult(tau_c, tau_h, tau_p, constraint_residual(dS, Sg, taus), dS, Sg, nroots)
