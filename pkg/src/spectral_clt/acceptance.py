"""The acceptance battery run by ``spectral-clt suite``.

Monte Carlo criteria are evaluated on a panel of master seeds and pass when
at least ``min_passes`` seeds pass; analytic criteria are seed free. Criteria
run in the order of :data:`CRITERIA`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .experiments import ExperimentConfig, run_experiment
from .fourier import dft_at, dft_naive
from .rng import SplitMix64, derive_seed
from .simulate import iid_gauss, ma1, slow_decay, two_state
from .spectral import (
    fourier_coefficient,
    integrate_g,
    linear_condfn_norm,
    linear_g,
    markov_condfn_norm,
    markov_eigen,
    spectral_model,
)

SEED_PANEL = (1, 2, 3, 4, 5)
MIN_PASSES = 4

TAUBERIAN_THETAS = (0.005, 0.01, 0.02)
TAUBERIAN_BAND = (0.4, 2.5)
TAUBERIAN_MONOTONE_THETAS = (0.5, 0.1, 0.01)
TAUBERIAN_J = 1_000_000


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "details": self.details,
                "reports": [r.to_dict() for r in self.reports]}


def _panel(name, build, seeds, min_passes, workers):
    """Run ``build(seed)`` configs on every seed; pass when enough seeds pass."""
    reports, per_seed = [], []
    for seed in seeds:
        cfgs = build(seed)
        rs = [run_experiment(c, workers=workers) for c in cfgs]
        reports.extend(rs)
        per_seed.append(all(r.passed for r in rs))
    passes = sum(per_seed)
    need = min(min_passes, len(seeds))
    details = {"seeds": list(seeds), "seed_passed": per_seed, "seed_passes": passes,
               "required": need}
    return CriterionResult(name, passes >= need, details, reports)


def fixed_frequency_clt(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    return _panel("1_fixed_frequency_clt",
                  lambda s: [ExperimentConfig("fixed_freq_clt", ma1(), 4096, 2000, (2.0,), s)],
                  seeds, min_passes, workers)


def cross_frequency(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    return _panel("2_cross_frequency",
                  lambda s: [ExperimentConfig("cross_freq", ma1(), 4096, 2000, (1.0, 2.0), s)],
                  seeds, min_passes, workers)


def periodogram_chi2(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    return _panel("3_periodogram_chi2",
                  lambda s: [ExperimentConfig("periodogram_chi2", iid_gauss(), 1024, 2000, (2.0,), s),
                             ExperimentConfig("periodogram_chi2", ma1(), 1024, 2000, (2.0,), s)],
                  seeds, min_passes, workers)


def annealed_clt(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    return _panel("4_annealed_clt",
                  lambda s: [ExperimentConfig("annealed", ma1(), 4096, 4000, (), s)],
                  seeds, min_passes, workers)


def invariance_identity(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    return _panel("5_invariance_identity",
                  lambda s: [ExperimentConfig("invariance_identity", iid_gauss(), 2048, 500, (), s,
                                              n_grid=128)],
                  seeds, min_passes, workers)


def variance_convergence(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1):
    ladder = tuple(64 * 2 ** k for k in range(7))
    return _panel("6_variance_convergence",
                  lambda s: [ExperimentConfig("variance_convergence", ma1(), 4096, 2000, (2.0,), s,
                                              n_ladder=ladder)],
                  seeds, min_passes, workers)


def regularity_diagnostics(**_):
    coeffs = ma1().coeffs
    d = {}
    checks = []
    for theta in (1.0, 2.0):
        v16 = linear_condfn_norm(coeffs, theta, 16) / 16
        v1024 = linear_condfn_norm(coeffs, theta, 1024) / 1024
        d[f"ma1.theta={theta}.norm_over_n.16"] = v16
        d[f"ma1.theta={theta}.norm_over_n.1024"] = v1024
        checks.append(v1024 <= (16 / 1024) * 1.05 * v16)
    decomp = markov_eigen(two_state(0.25))
    theta = math.pi / 2
    norms = [markov_condfn_norm(decomp, theta, n) for n in range(1, 4097)]
    d["two_state.max_norm"] = max(norms)
    d["two_state.bound"] = 4.0 * decomp.c0 / (1.0 - math.cos(theta) ** 2)
    checks.append(max(norms) <= d["two_state.bound"])
    d["two_state.norm_over_n.16"] = norms[15] / 16
    d["two_state.norm_over_n.4096"] = norms[4095] / 4096
    checks.append(norms[4095] / 4096 <= 0.25 * norms[15] / 16)
    d["checks"] = checks
    return CriterionResult("7_regularity_diagnostics", all(checks), d)


def tauberian_pole(J=TAUBERIAN_J, **_):
    coeffs = slow_decay(J).coeffs
    d = {"J": J, "band": list(TAUBERIAN_BAND)}
    ok = True
    for theta in TAUBERIAN_THETAS:
        g = float(linear_g(coeffs, theta))
        ratio = g * abs(theta) * math.log(abs(theta)) ** 2 / math.pi
        d[f"theta={theta}.g"] = g
        d[f"theta={theta}.ratio"] = ratio
        ok &= TAUBERIAN_BAND[0] <= ratio <= TAUBERIAN_BAND[1]
    gs = [float(linear_g(coeffs, t)) for t in TAUBERIAN_MONOTONE_THETAS]
    d["monotone_g"] = gs
    d["monotone"] = all(a < b for a, b in zip(gs, gs[1:]))
    return CriterionResult("8_tauberian_pole", bool(ok and d["monotone"]), d)


def analytic_identities(**_):
    d = {}
    ok = True
    for label, spec in (("ma1", ma1()), ("two_state", two_state(0.25))):
        model = spectral_model(spec)
        covs = model.autocov(5)
        worst = 0.0
        for j in range(6):
            coef = fourier_coefficient(model.g, j)
            worst = max(worst, abs(coef - covs[j]))
        integral, _ = integrate_g(model.g)
        rel = abs(integral - 2 * math.pi * model.c0) / (2 * math.pi * model.c0)
        d[f"{label}.max_coef_err"] = worst
        d[f"{label}.integral_rel_err"] = rel
        ok &= worst <= 1e-6 and rel <= 1e-6
    return CriterionResult("9_analytic_identities", bool(ok), d)


def goertzel_consistency(cases=1000, seed=20100601, **_):
    """Goertzel against direct summation on random (path, theta) pairs, n <= 4096."""
    worst = 0.0
    for case in range(cases):
        rng = SplitMix64(derive_seed(seed, case))
        n = 1 + int(rng.uniforms(1)[0] * 4096)
        theta = 1e-3 + (math.pi - 1e-3) * rng.uniforms(1)[0]
        if rng.uniforms(1)[0] < 0.5:
            theta = -theta
        x = rng.standard_normals(n)
        ref = dft_naive(x, theta)
        err = abs(dft_at(x, theta) - ref) / abs(ref)
        worst = max(worst, err)
    return CriterionResult("10_goertzel_vs_naive", worst <= 1e-9,
                           {"cases": cases, "max_rel_err": worst})


CRITERIA = (
    fixed_frequency_clt,
    cross_frequency,
    periodogram_chi2,
    annealed_clt,
    invariance_identity,
    variance_convergence,
    regularity_diagnostics,
    tauberian_pole,
    analytic_identities,
    goertzel_consistency,
)


def run_suite(seeds=SEED_PANEL, min_passes=MIN_PASSES, workers=1, log=None):
    results = []
    for crit in CRITERIA:
        res = crit(seeds=seeds, min_passes=min_passes, workers=workers)
        if log is not None:
            log(f"{'PASS' if res.passed else 'FAIL'} {res.name}")
        results.append(res)
    return {
        "passed": all(r.passed for r in results),
        "seeds": list(seeds),
        "min_passes": min_passes,
        "criteria": [r.to_dict() for r in results],
    }
