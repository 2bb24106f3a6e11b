"""Distribution functions, Kolmogorov-Smirnov distance and moment summaries."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .spectral import QUADRATURE_POINTS, quadrature_grid

# Asymptotic Kolmogorov quantiles for sqrt(R) * D.
KS_CRIT_5PCT = 1.358
KS_CRIT_1PCT = 1.628


def normal_cdf(x):
    """Standard normal distribution function; scalar or array input."""
    out = special.ndtr(np.asarray(x, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def chi2_2_cdf(x):
    """Distribution function of chi^2 with two degrees of freedom, ``1 - exp(-x/2)``."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("chi2_2_cdf is defined for x >= 0")
    out = -np.expm1(-0.5 * arr)
    return float(out) if out.ndim == 0 else out


def ks_statistic(sample, cdf):
    """One-sample Kolmogorov-Smirnov distance ``sup_x |F_R(x) - F(x)|``.

    ``cdf`` must accept a sorted numpy array and return the model CDF at
    each point.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    R = x.size
    if R == 0:
        raise ValueError("ks_statistic needs a non-empty sample")
    F = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, R + 1)
    d_plus = np.max(i / R - F)
    d_minus = np.max(F - (i - 1) / R)
    return float(max(d_plus, d_minus, 0.0))


@dataclass(frozen=True)
class MomentSummary2D:
    count: int
    mean: tuple
    cov: tuple

    @property
    def corr(self):
        denom = math.sqrt(self.cov[0][0] * self.cov[1][1])
        return self.cov[0][1] / denom if denom > 0.0 else 0.0


def sample_moments_2d(samples):
    """Mean and unbiased covariance of 2-vectors.

    Sums are exactly rounded (``math.fsum``), so the result does not depend
    on the order of the samples or on how they were gathered from workers.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an array of shape (count, 2), got {arr.shape}")
    count = arr.shape[0]
    if count < 2:
        raise ValueError("sample_moments_2d needs at least two samples")
    a = arr[:, 0].tolist()
    b = arr[:, 1].tolist()
    ma = math.fsum(a) / count
    mb = math.fsum(b) / count
    da = arr[:, 0] - ma
    db = arr[:, 1] - mb
    caa = math.fsum((da * da).tolist()) / (count - 1)
    cbb = math.fsum((db * db).tolist()) / (count - 1)
    cab = math.fsum((da * db).tolist()) / (count - 1)
    return MomentSummary2D(count, (ma, mb), ((caa, cab), (cab, cbb)))


def annealed_mixture_cdf(g, x, points=QUADRATURE_POINTS):
    """CDF of ``sqrt(g(U)/2) * Z`` with ``U ~ Unif[0, 2 pi)`` and ``Z ~ N(0, 1)``.

    ``g`` maps an array of frequencies to density values. The average over U
    uses the ``points``-point periodic trapezoid rule; grid points where
    ``g < 1e-12`` contribute the point mass at 0. ``x`` may be an array.
    """
    th = quadrature_grid(points)
    gv = np.asarray(g(th), dtype=np.float64)
    xs = np.asarray(x, dtype=np.float64)
    flat = xs.ravel()
    live = gv >= 1e-12
    scale = np.sqrt(gv[live] / 2.0)
    n_dead = int(np.sum(~live))
    out = np.empty(flat.shape)
    # chunk to bound memory at len(x) * points
    step = max(1, 2_000_000 // max(scale.size, 1))
    for s in range(0, flat.size, step):
        xv = flat[s:s + step]
        acc = special.ndtr(xv[:, None] / scale[None, :]).sum(axis=1) if scale.size else 0.0
        acc = acc + n_dead * (xv >= 0.0)
        out[s:s + step] = acc / points
    out = out.reshape(xs.shape)
    return float(out) if out.ndim == 0 else out
