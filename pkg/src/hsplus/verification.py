"""Invariant suites for the analytic results, reported as named PASS/FAIL checks."""

import math
from dataclasses import dataclass

import numpy as np

from .kappa_posterior import (
    ConcentrationBound,
    KappaPosterior,
    concentration_bound,
    log_marginal_derivatives,
    posterior_mse,
)
from .priors import PriorSpec, marginal_bounds, marginal_theta_density, origin_mass

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def suite_bounds():
    grid = np.logspace(-3, 1, 200)
    checks = []
    for fam in ("hs+", "hs"):
        spec = PriorSpec(fam, 1.0)
        bad = []
        for th in grid:
            b = marginal_bounds(spec, th)
            p = marginal_theta_density(spec, th)
            if not b.contains(p):
                bad.append(th)
        checks.append(Check(f"bounds/{fam}/bracket", not bad,
                            f"{len(bad)} of {grid.size} grid points outside the bracket"))
    hs, hsp = PriorSpec("hs"), PriorSpec("hs+")
    near = np.logspace(-6, -3, 13)
    ok = all(marginal_theta_density(hsp, t) > marginal_theta_density(hs, t) for t in near)
    checks.append(Check("bounds/origin-dominance", ok, "p_hs+ > p_hs on [1e-6, 1e-3]"))
    tail = np.logspace(1, 4, 13)
    ratio = [marginal_theta_density(hsp, t) / marginal_theta_density(hs, t) for t in tail]
    checks.append(Check("bounds/tail-ratio-increasing", bool(np.all(np.diff(ratio) > 0)),
                        f"ratio {ratio[0]:.4g} -> {ratio[-1]:.4g} on [10, 1e4]"))
    return checks


def suite_concentration():
    checks = []
    params = ConcentrationBound(epsilon=0.25, eta=0.25, delta=1.0 / 9.0)
    for fam in ("hs+",):
        for tau in (0.5, 0.1, 0.01):
            spec = PriorSpec(fam, tau)
            for y in (0.0, 1.0, 2.0, 4.0, 6.0):
                kp = KappaPosterior(y, spec)
                lo = kp.below(params.epsilon)
                lo_b = concentration_bound("left", y, spec, params)
                hi = kp.above(params.eta)
                hi_b = concentration_bound("right", y, spec, params)
                checks.append(Check(f"concentration/left/y={y:g}/tau={tau:g}", lo <= lo_b,
                                    f"P(kappa<1/4)={lo:.5g} bound={lo_b:.5g}"))
                checks.append(Check(f"concentration/right/y={y:g}/tau={tau:g}", hi <= hi_b,
                                    f"P(kappa>1/4)={hi:.5g} bound={hi_b:.5g}"))
    return checks


def suite_tweedie():
    checks = []
    for fam in ("hs", "hs+"):
        for tau in (1.0, 0.1):
            spec = PriorSpec(fam, tau)
            for y in (0.5, 2.0, 5.0):
                direct = y * (1.0 - KappaPosterior(y, spec).mean())
                g, h = log_marginal_derivatives(y, spec)
                gap = abs(direct - (y + g))
                checks.append(Check(f"tweedie/{fam}/tau={tau:g}/y={y:g}", gap < 1e-6,
                                    f"|difference|={gap:.3g}"))
    for fam in ("hs", "hs+"):
        spec = PriorSpec(fam, 1.0)
        for y in (0.0, 1.0, 3.0, 8.0):
            _, h = log_marginal_derivatives(y, spec)
            checks.append(Check(f"tweedie/{fam}/variance/y={y:g}", 1.0 + h > 0.0,
                                f"1 + (log m)''={1.0 + h:.6g}"))
    return checks


def suite_mass():
    checks = []
    for fam in ("hs+", "hs"):
        spec = PriorSpec(fam)
        closed = origin_mass(spec, 10 ** 8, "closed-form")
        quad = origin_mass(spec, 10 ** 8, "expansion-quadrature")
        rel = abs(closed - quad) / quad
        checks.append(Check(f"mass/{fam}/closed-vs-quadrature", rel < 0.05, f"relative gap {rel:.3g}"))
    ns = [10 ** k for k in range(2, 13)]
    ratios = [origin_mass(PriorSpec("hs+"), n, "leading") / origin_mass(PriorSpec("hs"), n, "leading")
              for n in ns]
    checks.append(Check("mass/leading-ratio-increasing", bool(np.all(np.diff(ratios) > 0)),
                        f"ratio {ratios[0]:.4g} -> {ratios[-1]:.4g} for n=1e2..1e12"))
    return checks


def suite_mse():
    checks = []
    hs, hsp = PriorSpec("hs"), PriorSpec("hs+")
    for y in (8.0, 12.0, 20.0, 30.0):
        a, b = posterior_mse(y, hs), posterior_mse(y, hsp)
        checks.append(Check(f"mse/order/y={y:g}", b < a, f"HS={a:.8g} HS+={b:.8g}"))
    y = 30.0
    scaled = y * y * math.log(y) * (posterior_mse(y, hs) - posterior_mse(y, hsp))
    checks.append(Check("mse/gap-scaling/y=30", 0.3 < scaled < 3.0, f"y^2 log(y) gap={scaled:.4g}"))
    return checks


SUITES = {
    "bounds": suite_bounds,
    "concentration": suite_concentration,
    "tweedie": suite_tweedie,
    "mass": suite_mass,
    "mse": suite_mse,
}


def run_suite(name):
    """Run one suite (or ``"all"``) and return its checks."""
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn())
        return out
    try:
        return SUITES[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}") from None
