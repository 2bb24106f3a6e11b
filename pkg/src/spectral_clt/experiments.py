"""Replicated Monte Carlo checks of the Fourier-transform limit theorems.

Replicate ``r`` of an experiment uses the path seed ``derive_seed(master, r)``.
Replicates are processed in fixed-size chunks whose results are written into
an index-ordered buffer, so a report is bit-identical for any worker count.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import TWO_PI, degenerate_frequency, is_power_of_two
from .exceptions import ConfigurationError
from .fourier import goertzel_batch
from .rng import SplitMix64, derive_seed
from .simulate import generate, generate_paths
from .spectral import cesaro_variance, spectral_model
from .stats import (
    KS_CRIT_1PCT,
    annealed_mixture_cdf,
    chi2_2_cdf,
    ks_statistic,
    normal_cdf,
    sample_moments_2d,
)

KINDS = (
    "fixed_freq_clt",
    "cross_freq",
    "annealed",
    "periodogram_chi2",
    "invariance_identity",
    "variance_convergence",
    "regularity_diag",
)

DEFAULT_TOLERANCES = {
    "fixed_freq_clt": {"var_rel": 0.05, "mean_sigmas": 3.0, "corr_sigmas": 3.0,
                       "ks_crit": KS_CRIT_1PCT},
    "cross_freq": {"corr_sigmas": 3.0},
    "annealed": {"ks_crit": KS_CRIT_1PCT, "quad_allowance": 1e-3},
    "periodogram_chi2": {"ks_crit": KS_CRIT_1PCT, "mean_halfwidth": 6.0},
    "invariance_identity": {"ratio_tol": 0.10},
    "variance_convergence": {"se_mult": 3.0, "cesaro_gap": 1e-3, "mc_gap": 0.01},
    "regularity_diag": {"decay_factor": 0.25},
}

CHUNK_SIZE = 128
MIN_REPLICATES = 100
MIN_LENGTH = 16
PILOT_FACTOR = 10
_PILOT_TAG = 0x5049_4C4F_5453_4545
_AUX_STREAM_OFFSET = 1 << 32
_ANNEALED_GUARD = 1e-6


@dataclass
class ExperimentConfig:
    kind: str
    process: object
    n: int
    replicates: int
    thetas: tuple
    master_seed: int
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    n_grid: int = 128
    n_ladder: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        self.n = int(self.n)
        self.replicates = int(self.replicates)
        self.master_seed = int(self.master_seed)
        if self.n < MIN_LENGTH:
            raise ConfigurationError(f"n={self.n} too small; need n >= {MIN_LENGTH}")
        if self.replicates < MIN_REPLICATES:
            raise ConfigurationError(
                f"replicates={self.replicates} too small; need at least {MIN_REPLICATES}"
            )
        thetas = tuple(float(t) for t in self.thetas)
        for t in thetas:
            if not math.isfinite(t):
                raise ConfigurationError(f"theta={t} is not finite")
            bad = degenerate_frequency(t)
            if bad is not None:
                raise ConfigurationError(f"theta={bad} excluded (degenerate frequency)")
        self.thetas = thetas
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES[self.kind])
        if unknown:
            raise ConfigurationError(
                f"unknown tolerances for {self.kind}: {', '.join(sorted(unknown))}"
            )
        self.tolerances = {**DEFAULT_TOLERANCES[self.kind],
                           **{k: float(v) for k, v in self.tolerances.items()}}
        self.n_grid = int(self.n_grid)
        if self.n_grid < 2:
            raise ConfigurationError("n_grid must be at least 2")
        if self.n_ladder is None:
            start = MIN_LENGTH if self.kind == "regularity_diag" else 64
            ladder = []
            m = min(start, self.n)
            while m < self.n:
                ladder.append(m)
                m *= 2
            ladder.append(self.n)
            self.n_ladder = tuple(ladder)
        else:
            self.n_ladder = tuple(sorted(int(m) for m in self.n_ladder))
            if not self.n_ladder or self.n_ladder[0] < 1 or self.n_ladder[-1] > self.n:
                raise ConfigurationError("n_ladder entries must lie in [1, n]")

    def to_dict(self):
        return {
            "kind": self.kind,
            "process": self.process.to_dict(),
            "n": self.n,
            "replicates": self.replicates,
            "thetas": list(self.thetas),
            "master_seed": self.master_seed,
            "tolerances": dict(self.tolerances),
            "output": dict(self.output),
            "n_grid": self.n_grid,
            "n_ladder": list(self.n_ladder),
        }


@dataclass
class Report:
    kind: str
    parameters: dict
    statistics: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    samples_written: str = None
    flags: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v["passed"] for v in self.verdicts.values())

    def check(self, name, statistic, threshold, tolerance, op="<="):
        """Record the verdict ``statistics[statistic] <op> threshold``."""
        value = self.statistics[statistic]
        if op == "<=":
            ok = value <= threshold
        elif op == ">=":
            ok = value >= threshold
        else:
            raise ValueError(op)
        self.verdicts[name] = {
            "passed": bool(ok),
            "statistic": statistic,
            "op": op,
            "threshold": float(threshold),
            "tolerance": tolerance,
        }

    def to_dict(self):
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "statistics": self.statistics,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "samples_written": self.samples_written,
            "flags": list(self.flags),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


# -- replicate engine --------------------------------------------------------

def replicate_seeds(master, count):
    return [derive_seed(master, r) for r in range(count)]


def _run_chunked(task, seeds, args, workers):
    chunks = [seeds[i:i + CHUNK_SIZE] for i in range(0, len(seeds), CHUNK_SIZE)]
    if workers is None or workers <= 1 or len(chunks) == 1:
        parts = [task(chunk, *args) for chunk in chunks]
    else:
        from joblib import Parallel, delayed

        parts = Parallel(n_jobs=min(workers, len(chunks)))(
            delayed(task)(chunk, *args) for chunk in chunks
        )
    return np.concatenate(parts, axis=0)


def _paths(spec, n, seeds, path_source):
    if path_source is None:
        return generate_paths(spec, n, seeds)
    return np.stack([np.asarray(path_source(s, n), dtype=np.float64) for s in seeds])


def _task_dft(seeds, spec, n, thetas, path_source=None):
    X = _paths(spec, n, seeds, path_source)
    return np.stack([goertzel_batch(X, t) for t in thetas], axis=1)


def _annealed_theta(seed):
    rng = SplitMix64(derive_seed(seed, _AUX_STREAM_OFFSET))
    while True:
        t = TWO_PI * rng.uniforms(1)[0]
        if min(t, abs(t - math.pi), TWO_PI - t) >= _ANNEALED_GUARD:
            return t


def _task_annealed(seeds, spec, n):
    X = generate_paths(spec, n, seeds)
    th = np.array([_annealed_theta(s) for s in seeds])
    return np.stack([th, goertzel_batch(X, th).real], axis=1)


def _task_max_functional(seeds, spec, n, grid, path_source=None):
    X = _paths(spec, n, seeds, path_source)
    k = np.arange(1, n + 1, dtype=np.float64)
    out = np.empty((X.shape[0], grid.size))
    for i, t in enumerate(grid):
        partial = np.cumsum(X * np.cos(k * t), axis=1)
        out[:, i] = np.max(partial, axis=1) ** 2
    return out


def _task_ladder(seeds, spec, ladder, theta):
    n_max = ladder[-1]
    X = generate_paths(spec, n_max, seeds)
    j = np.arange(1, n_max + 1, dtype=np.float64)
    sums = np.cumsum(X * np.exp(1j * j * theta), axis=1)
    idx = np.asarray(ladder) - 1
    return np.abs(sums[:, idx]) ** 2 / np.asarray(ladder, dtype=np.float64)


def _require_kind(cfg, kind):
    if cfg.kind != kind:
        raise ConfigurationError(f"config kind is {cfg.kind!r}, expected {kind!r}")


def _oracle_g(cfg, model, report, workers):
    """Return ``g`` at ``cfg.thetas``: closed form, or a flagged pilot estimate."""
    if model is not None:
        return [float(model.g(t)) for t in cfg.thetas]
    pilot_master = derive_seed(cfg.master_seed ^ _PILOT_TAG, 0)
    seeds = replicate_seeds(pilot_master, PILOT_FACTOR * cfg.replicates)
    S = _run_chunked(_task_dft, seeds, (cfg.process, cfg.n, cfg.thetas), workers)
    g = (np.abs(S) ** 2).mean(axis=0) / cfg.n
    report.flags.append("oracle_variance=pilot_monte_carlo")
    report.statistics["pilot_replicates"] = len(seeds)
    return [float(v) for v in g]


def _write_samples(cfg, rows):
    path = cfg.output.get("samples")
    if not path:
        return None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "theta", "re", "im", "periodogram"])
        for r, theta, re, im, per in rows:
            w.writerow([r, repr(float(theta)), repr(float(re)), repr(float(im)), repr(float(per))])
    return path


def _sample_rows(S, thetas, n):
    """Rows ``(replicate, theta, Re V, Im V, I_n)`` with ``V = S_n / sqrt(n)``."""
    root = math.sqrt(n)
    for r in range(S.shape[0]):
        for i, t in enumerate(thetas):
            s = S[r, i]
            yield r, t, s.real / root, s.imag / root, (abs(s) ** 2) / (TWO_PI * n)


# -- experiments -------------------------------------------------------------

def run_fixed_freq_clt(cfg, workers=1):
    """Re and Im of ``S_n(theta)/sqrt(n)`` against i.i.d. N(0, g(theta)/2)."""
    _require_kind(cfg, "fixed_freq_clt")
    if not cfg.thetas:
        raise ConfigurationError("fixed_freq_clt needs at least one theta")
    report = Report(cfg.kind, cfg.to_dict())
    tol = cfg.tolerances
    R = cfg.replicates
    model = spectral_model(cfg.process)
    g = _oracle_g(cfg, model, report, workers)
    S = _run_chunked(_task_dft, replicate_seeds(cfg.master_seed, R),
                     (cfg.process, cfg.n, cfg.thetas), workers)
    V = S / math.sqrt(cfg.n)
    st = report.statistics
    for i, theta in enumerate(cfg.thetas):
        p = f"theta{i}."
        target = g[i] / 2.0
        mom = sample_moments_2d(np.stack([V[:, i].real, V[:, i].imag], axis=1))
        sd = math.sqrt(target)
        std_cdf = lambda x, sd=sd: normal_cdf(x / sd)
        st[p + "theta"] = theta
        st[p + "g"] = g[i]
        st[p + "target_var"] = target
        st[p + "mean_re"], st[p + "mean_im"] = mom.mean
        st[p + "var_re"] = mom.cov[0][0]
        st[p + "var_im"] = mom.cov[1][1]
        st[p + "cov_re_im"] = mom.cov[0][1]
        st[p + "corr_re_im"] = mom.corr
        st[p + "var_re_rel_err"] = abs(mom.cov[0][0] / target - 1.0)
        st[p + "var_im_rel_err"] = abs(mom.cov[1][1] / target - 1.0)
        st[p + "abs_mean_re"] = abs(mom.mean[0])
        st[p + "abs_mean_im"] = abs(mom.mean[1])
        st[p + "abs_corr_re_im"] = abs(mom.corr)
        st[p + "ks_re_sqrtR"] = ks_statistic(V[:, i].real, std_cdf) * math.sqrt(R)
        st[p + "ks_im_sqrtR"] = ks_statistic(V[:, i].imag, std_cdf) * math.sqrt(R)
        mean_bound = tol["mean_sigmas"] * sd / math.sqrt(R)
        corr_bound = tol["corr_sigmas"] / math.sqrt(R)
        report.check(p + "mean_re", p + "abs_mean_re", mean_bound, "mean_sigmas")
        report.check(p + "mean_im", p + "abs_mean_im", mean_bound, "mean_sigmas")
        report.check(p + "var_re", p + "var_re_rel_err", tol["var_rel"], "var_rel")
        report.check(p + "var_im", p + "var_im_rel_err", tol["var_rel"], "var_rel")
        report.check(p + "corr_re_im", p + "abs_corr_re_im", corr_bound, "corr_sigmas")
        report.check(p + "ks_re", p + "ks_re_sqrtR", tol["ks_crit"], "ks_crit")
        report.check(p + "ks_im", p + "ks_im_sqrtR", tol["ks_crit"], "ks_crit")
    report.samples_written = _write_samples(cfg, _sample_rows(S, cfg.thetas, cfg.n))
    return report


def run_cross_frequency(cfg, theta1=None, theta2=None, workers=1):
    """Correlations between (Re, Im) of ``V_n`` at two distinct frequencies."""
    _require_kind(cfg, "cross_freq")
    if theta1 is None or theta2 is None:
        if len(cfg.thetas) != 2:
            raise ConfigurationError("cross_freq needs exactly two thetas")
        theta1, theta2 = cfg.thetas
    for t in (theta1, theta2):
        bad = degenerate_frequency(float(t))
        if bad is not None:
            raise ConfigurationError(f"theta={bad} excluded (degenerate frequency)")
    if math.isclose(theta1, theta2, rel_tol=0.0, abs_tol=1e-12):
        raise ConfigurationError("cross_freq needs two distinct frequencies")
    thetas = (float(theta1), float(theta2))
    report = Report(cfg.kind, {**cfg.to_dict(), "thetas": list(thetas)})
    R = cfg.replicates
    S = _run_chunked(_task_dft, replicate_seeds(cfg.master_seed, R),
                     (cfg.process, cfg.n, thetas), workers)
    cols = np.stack([S[:, 0].real, S[:, 0].imag, S[:, 1].real, S[:, 1].imag], axis=1)
    names = ("re1", "im1", "re2", "im2")
    bound = cfg.tolerances["corr_sigmas"] / math.sqrt(R)
    for a in range(4):
        for b in range(a + 1, 4):
            mom = sample_moments_2d(cols[:, [a, b]])
            key = f"corr_{names[a]}_{names[b]}"
            report.statistics[key] = mom.corr
            report.statistics["abs_" + key] = abs(mom.corr)
            if a < 2 <= b:
                report.check(key, "abs_" + key, bound, "corr_sigmas")
    report.samples_written = _write_samples(cfg, _sample_rows(S, thetas, cfg.n))
    return report


def run_annealed(cfg, workers=1):
    """``Re S_n(U)/sqrt(n)`` with random ``U`` against the Gaussian scale mixture."""
    _require_kind(cfg, "annealed")
    model = spectral_model(cfg.process)
    if model is None:
        raise ConfigurationError("annealed experiment needs a closed-form spectral density")
    report = Report(cfg.kind, cfg.to_dict())
    R = cfg.replicates
    out = _run_chunked(_task_annealed, replicate_seeds(cfg.master_seed, R),
                       (cfg.process, cfg.n), workers)
    th, re = out[:, 0], out[:, 1] / math.sqrt(cfg.n)
    D = ks_statistic(re, lambda x: annealed_mixture_cdf(model.g, x))
    st = report.statistics
    st["ks"] = D
    st["ks_sqrtR"] = D * math.sqrt(R)
    st["mean_re"] = math.fsum(re.tolist()) / R
    st["theta_mean"] = math.fsum(th.tolist()) / R
    threshold = cfg.tolerances["ks_crit"] + cfg.tolerances["quad_allowance"] * math.sqrt(R)
    report.check("ks_mixture", "ks_sqrtR", threshold, "ks_crit+quad_allowance")
    if cfg.output.get("samples"):
        rows = ((r, th[r], re[r], float("nan"), float("nan")) for r in range(R))
        report.samples_written = _write_samples(cfg, rows)
    return report


def run_periodogram_chi2(cfg, workers=1):
    """``2|S_n|^2 / (n g(theta))`` against chi^2(2)."""
    _require_kind(cfg, "periodogram_chi2")
    if not cfg.thetas:
        raise ConfigurationError("periodogram_chi2 needs at least one theta")
    report = Report(cfg.kind, cfg.to_dict())
    model = spectral_model(cfg.process)
    g = _oracle_g(cfg, model, report, workers)
    for i, gi in enumerate(g):
        if gi <= 1e-8:
            raise ConfigurationError(
                f"g(theta={cfg.thetas[i]}) = {gi:.3g} is degenerate for this process"
            )
    R = cfg.replicates
    S = _run_chunked(_task_dft, replicate_seeds(cfg.master_seed, R),
                     (cfg.process, cfg.n, cfg.thetas), workers)
    half = cfg.tolerances["mean_halfwidth"] / math.sqrt(R)
    st = report.statistics
    for i, theta in enumerate(cfg.thetas):
        p = f"theta{i}."
        U = (np.abs(S[:, i]) ** 2) / (cfg.n * g[i] / 2.0)
        mean_u = math.fsum(U.tolist()) / R
        st[p + "theta"] = theta
        st[p + "g"] = g[i]
        st[p + "ks_sqrtR"] = ks_statistic(U, chi2_2_cdf) * math.sqrt(R)
        st[p + "mean_u"] = mean_u
        st[p + "mean_u_dev"] = abs(mean_u - 2.0)
        report.check(p + "ks_chi2", p + "ks_sqrtR", cfg.tolerances["ks_crit"], "ks_crit")
        report.check(p + "mean_u", p + "mean_u_dev", half, "mean_halfwidth")
    report.samples_written = _write_samples(cfg, _sample_rows(S, cfg.thetas, cfg.n))
    return report


def run_invariance_identity(cfg, workers=1, path_source=None):
    """Normalised frequency integral of ``E[max_m sum_{k<=m} X_k cos(k theta)]^2``.

    The periodic trapezoid rule runs over ``theta_j = 2 pi j / n_grid`` for
    j = 1..n_grid-1; the j = 0 node is left out. ``path_source(seed, n)``
    replaces the process generator (test hook).
    """
    _require_kind(cfg, "invariance_identity")
    if not is_power_of_two(cfg.n):
        raise ConfigurationError(f"invariance_identity needs a power-of-two n, got {cfg.n}")
    report = Report(cfg.kind, cfg.to_dict())
    model = spectral_model(cfg.process)
    c0 = model.c0 if model is not None else cfg.process.variance
    grid = TWO_PI * np.arange(1, cfg.n_grid) / cfg.n_grid
    report.flags.append("theta=0 excluded from frequency grid")
    R = cfg.replicates
    M = _run_chunked(_task_max_functional, replicate_seeds(cfg.master_seed, R),
                     (cfg.process, cfg.n, grid, path_source), workers)
    scale = (TWO_PI / cfg.n_grid) / (c0 * cfg.n * math.pi)
    per_rep = M.sum(axis=1) * scale
    ratio = math.fsum(per_rep.tolist()) / R
    dev = per_rep - ratio
    se = math.sqrt(math.fsum((dev * dev).tolist()) / (R - 1) / R)
    st = report.statistics
    st["ratio"] = ratio
    st["ratio_se"] = se
    st["ratio_abs_err"] = abs(ratio - 1.0)
    st["c0"] = c0
    report.check("ratio", "ratio_abs_err", cfg.tolerances["ratio_tol"], "ratio_tol")
    return report


def run_variance_convergence(cfg, workers=1):
    """Monte Carlo ``E|S_n|^2/n`` against the exact Cesaro formula along ``n_ladder``."""
    _require_kind(cfg, "variance_convergence")
    if len(cfg.thetas) != 1:
        raise ConfigurationError("variance_convergence needs exactly one theta")
    model = spectral_model(cfg.process)
    if model is None:
        raise ConfigurationError("variance_convergence needs closed-form covariances")
    theta = cfg.thetas[0]
    ladder = cfg.n_ladder
    report = Report(cfg.kind, cfg.to_dict())
    tol = cfg.tolerances
    R = cfg.replicates
    vals = _run_chunked(_task_ladder, replicate_seeds(cfg.master_seed, R),
                        (cfg.process, ladder, theta), workers)
    g = float(model.g(theta))
    covs = model.autocov(ladder[-1] - 1)
    st = report.statistics
    st["g"] = g
    gaps = []
    for col, m in enumerate(ladder):
        v = vals[:, col]
        mc = math.fsum(v.tolist()) / R
        dev = v - mc
        se = math.sqrt(math.fsum((dev * dev).tolist()) / (R - 1) / R)
        ces = cesaro_variance(covs[:m], m, theta)
        p = f"n{m}."
        st[p + "mc"] = mc
        st[p + "se"] = se
        st[p + "cesaro"] = ces
        st[p + "mc_cesaro_dev"] = abs(mc - ces)
        st[p + "cesaro_gap"] = abs(ces - g)
        st[p + "mc_gap"] = abs(mc - g)
        gaps.append(abs(ces - g))
        report.check(p + "mc_matches_cesaro", p + "mc_cesaro_dev", tol["se_mult"] * se, "se_mult")
    lo, hi = ladder[0], ladder[-1]
    report.check("gap_shrinks", f"n{hi}.cesaro_gap", gaps[0], None)
    short_memory = model.provider == "markov" or 8 * (model.coeffs.size - 1) < hi
    if short_memory:
        report.check("cesaro_gap", f"n{hi}.cesaro_gap", tol["cesaro_gap"], "cesaro_gap")
        report.check("mc_gap", f"n{hi}.mc_gap", tol["mc_gap"] + tol["se_mult"] * st[f"n{hi}.se"],
                     "mc_gap+se_mult")
    else:
        report.flags.append(f"long memory filter: no absolute gap tolerance (n_min={lo})")
    return report


def run_regularity_diag(cfg, workers=1):
    """``||E(S_n(theta)|F_0)||^2 / n`` along ``n_ladder``: decay to 0 and the Markov bound."""
    _require_kind(cfg, "regularity_diag")
    model = spectral_model(cfg.process)
    if model is None:
        raise ConfigurationError("regularity_diag is unsupported for gaussian_functional processes")
    report = Report(cfg.kind, cfg.to_dict())
    st = report.statistics
    ladder = cfg.n_ladder
    lo, hi = ladder[0], ladder[-1]
    c0 = model.c0
    for i, theta in enumerate(cfg.thetas):
        p = f"theta{i}."
        st[p + "theta"] = theta
        norms = [model.condfn_norm(theta, m) for m in ladder]
        for m, v in zip(ladder, norms):
            st[f"{p}n{m}.norm"] = v
            st[f"{p}n{m}.norm_over_n"] = v / m
        report.check(p + "decay", f"{p}n{hi}.norm_over_n",
                     cfg.tolerances["decay_factor"] * norms[0] / lo, "decay_factor")
        if model.provider == "markov":
            bound = 4.0 * c0 / (1.0 - math.cos(theta) ** 2)
            st[p + "bound"] = bound
            st[p + "max_norm"] = max(norms)
            report.check(p + "bound", p + "max_norm", bound, None)
    return report


RUNNERS = {
    "fixed_freq_clt": run_fixed_freq_clt,
    "cross_freq": run_cross_frequency,
    "annealed": run_annealed,
    "periodogram_chi2": run_periodogram_chi2,
    "invariance_identity": run_invariance_identity,
    "variance_convergence": run_variance_convergence,
    "regularity_diag": run_regularity_diag,
}


def run_experiment(cfg, workers=1):
    report = RUNNERS[cfg.kind](cfg, workers=workers)
    out = cfg.output.get("report")
    if out:
        with open(out, "w") as fh:
            fh.write(report.to_json())
    return report


def default_workers():
    env = os.environ.get("SPECTRAL_CLT_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
