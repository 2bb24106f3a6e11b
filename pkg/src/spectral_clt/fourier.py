"""Fourier sums of real paths with the 1-based phase convention.

Every transform here evaluates

    S_n(theta) = sum_{j=1}^{n} X_j exp(i j theta),

i.e. the first sample carries phase ``exp(i theta)``, not 1. Compared with
the usual 0-based DFT this multiplies each value by ``exp(i theta)``: phases
shift, moduli (and therefore periodograms) do not.

Single frequencies use a Goertzel/Clenshaw recurrence run backwards over the
path,

    s_k = X_k + 2 cos(theta) s_{k+1} - s_{k+2},   S_n = exp(i theta) s_1 - s_2,

which needs one cos/sin pair per frequency. The recurrence is carried in
``numpy.longdouble`` (64-bit mantissa on x86). Its rounding error grows
roughly like ``eps * n / |sin theta|``; with eps ~ 1.1e-19, n <= 2**20 and
|theta| >= 1e-3 that is below 1e-10 relative to ``sum |X_j|``, so no
periodic renormalisation of the recurrence is needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import TWO_PI, check_path, check_paths, check_theta, is_power_of_two


@dataclass(frozen=True, eq=False)
class PartialSumPath:
    """Prefix sums ``S_m(theta)``, m = 1..n, as a complex array."""

    values: np.ndarray
    theta: float

    def __len__(self):
        return self.values.size

    def scaled(self):
        """Return ``W_n(m/n) = S_m / sqrt(n)`` for m = 1..n."""
        return self.values / math.sqrt(self.values.size)


def _as_values(path):
    return check_path(getattr(path, "values", path))


def goertzel_batch(X, theta):
    """Evaluate ``S_n(theta)`` for every row of ``X``.

    ``theta`` is a scalar or one frequency per row. Returns a complex128
    array of length ``X.shape[0]``. Rows are processed independently, so the
    value for a row does not depend on which other rows share the batch.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("expected a non-empty 2-D array of paths")
    th = np.broadcast_to(np.asarray(theta, dtype=np.longdouble), (X.shape[0],))
    cos_t = np.cos(th)
    sin_t = np.sin(th)
    coef = 2.0 * cos_t
    cols = np.asarray(X.T, dtype=np.longdouble, order="C")
    s1 = np.zeros(X.shape[0], dtype=np.longdouble)
    s2 = np.zeros_like(s1)
    for k in range(cols.shape[0] - 1, -1, -1):
        s0 = cols[k] + coef * s1 - s2
        s2 = s1
        s1 = s0
    re = cos_t * s1 - s2
    im = sin_t * s1
    return re.astype(np.float64) + 1j * im.astype(np.float64)


def dft_at(path, theta):
    """``S_n(theta)`` of a single path, as a Python complex."""
    x = _as_values(path)
    theta = check_theta(theta)
    return complex(goertzel_batch(x[None, :], theta)[0])


def dft_naive(path, theta):
    """Direct summation of ``X_j exp(i j theta)``; slow reference for tests."""
    x = _as_values(path)
    # phases j*theta in extended precision so the reference is not limited by
    # rounding of large arguments
    arg = np.arange(1, x.size + 1, dtype=np.longdouble) * np.longdouble(float(theta))
    re = np.sum(x * np.cos(arg))
    im = np.sum(x * np.sin(arg))
    return complex(float(re), float(im))


def partial_dft_path(path, theta):
    x = _as_values(path)
    theta = check_theta(theta)
    j = np.arange(1, x.size + 1, dtype=np.float64)
    sums = np.cumsum(x * np.exp(1j * j * theta))
    return PartialSumPath(sums, math.fmod(theta, TWO_PI) % TWO_PI)


def partial_dft_batch(X, theta):
    """Prefix sums ``S_m(theta)`` for each row of ``X``; shape (B, n) complex."""
    X = check_paths(X)
    j = np.arange(1, X.shape[1] + 1, dtype=np.float64)
    return np.cumsum(X * np.exp(1j * j * float(theta)), axis=1)


def _bit_reverse_permutation(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_radix2(a, sign):
    """Iterative decimation-in-time radix-2 transform along the last axis.

    Computes ``sum_m a_m exp(sign * 2 pi i j m / n)`` for j = 0..n-1.
    """
    n = a.shape[-1]
    lead = a.shape[:-1]
    out = a[..., _bit_reverse_permutation(n)].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * tw
        out = np.concatenate((even + odd, even - odd), axis=-1).reshape(lead + (n,))
        size *= 2
    return out


def fft_grid(path):
    """``S_n(2 pi j / n)`` for j = 0..n-1 via a radix-2 FFT.

    Only power-of-two lengths are supported; use :func:`dft_at` for others.
    """
    x = _as_values(path)
    n = x.size
    if not is_power_of_two(n):
        raise ValueError(
            f"fft_grid needs a power-of-two length, got n={n}; use dft_at for arbitrary n"
        )
    # S_n(theta_j) = exp(i theta_j) * sum_{m=0}^{n-1} X_{m+1} exp(i theta_j m)
    grid = TWO_PI * np.arange(n) / n
    return np.exp(1j * grid) * _fft_radix2(x, +1)


def periodogram_at(path, theta):
    """``I_n(theta) = |S_n(theta)|^2 / (2 pi n)``."""
    x = _as_values(path)
    s = dft_at(x, theta)
    return (s.real ** 2 + s.imag ** 2) / (TWO_PI * x.size)
