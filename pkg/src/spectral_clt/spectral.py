"""Closed-form spectral quantities for linear filters and reversible chains.

Conventions: ``g(theta)`` is the limit of ``E|S_n(theta)|^2 / n`` and
``g / (2 pi)`` is the spectral density, so that

    (1 / 2 pi) * integral_0^{2 pi} g(theta) exp(i j theta) d theta = c_j.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ._validation import TWO_PI, check_coeffs
from .exceptions import ConfigurationError, MarkovSpecError

QUADRATURE_POINTS = 4096
JACOBI_MAX_STATES = 64
_HORNER_MAX = 512
_UNIT_EIG_TOL = 1e-12


# -- linear filters ----------------------------------------------------------

def linear_transfer(coeffs, theta):
    """Transfer function ``A(e^{i theta}) = sum_j a_j exp(i j theta)``.

    Accepts a scalar or an array of frequencies. Short filters are evaluated
    by Horner's rule; long ones by a direct phase sum per frequency.
    """
    a = check_coeffs(coeffs)
    th = np.asarray(theta, dtype=np.float64)
    if a.size <= _HORNER_MAX:
        z = np.exp(1j * th)
        acc = np.zeros_like(z)
        for c in a[::-1]:
            acc = acc * z + c
        out = acc
    else:
        j = np.arange(a.size, dtype=np.float64)
        flat = th.ravel()
        out = np.empty(flat.shape, dtype=np.complex128)
        for i, t in enumerate(flat):
            out[i] = np.dot(a, np.exp(1j * (j * t)))
        out = out.reshape(th.shape)
    return complex(out) if out.ndim == 0 else out


def linear_g(coeffs, theta):
    """``g(theta) = |A(e^{i theta})|^2``."""
    A = linear_transfer(coeffs, theta)
    return (np.real(A) ** 2 + np.imag(A) ** 2) if isinstance(A, np.ndarray) else abs(A) ** 2


def linear_autocov(coeffs, maxlag):
    """``c_j = sum_k a_k a_{k+j}`` for j = 0..maxlag (zero beyond the filter length)."""
    a = check_coeffs(coeffs)
    maxlag = int(maxlag)
    if maxlag < 0:
        raise ValueError("maxlag must be non-negative")
    J = a.size - 1
    if a.size <= 4096:
        full = np.correlate(a, a, mode="full")
    else:
        full = signal.fftconvolve(a, a[::-1], mode="full")
    c = full[J:]
    out = np.zeros(maxlag + 1)
    k = min(maxlag + 1, c.size)
    out[:k] = c[:k]
    return out


def cesaro_variance(covs, n, theta, return_info=False):
    """Exact ``E|S_n(theta)|^2 / n = sum_{|j|<n} (1 - |j|/n) c_j exp(i j theta)``.

    ``covs`` holds ``c_0, c_1, ...``; lags it does not cover are treated as
    zero, which is exact for truncated linear filters. With
    ``return_info=True`` a ``(value, info)`` pair is returned where
    ``info["missing_lags"]`` counts the lags that were filled with zeros.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    c = np.asarray(covs, dtype=np.float64).ravel()
    if c.size == 0:
        raise ValueError("covs must contain at least c_0")
    L = min(n - 1, c.size - 1)
    lags = np.arange(-L, L + 1)
    weights = 1.0 - np.abs(lags) / n
    terms = weights * c[np.abs(lags)] * np.exp(1j * lags * float(theta))
    total = np.sum(terms)
    # c_{-j} = c_j pairs conjugate phases, so the imaginary part must vanish
    if abs(total.imag) > 1e-10:
        raise ArithmeticError(f"Cesaro sum has imaginary part {total.imag:.3g}")
    missing = max(0, (n - 1) - (c.size - 1))
    if return_info:
        return float(total.real), {"missing_lags": missing}
    return float(total.real)


def linear_condfn_norm(coeffs, theta, n):
    """``||E(S_n(theta) | F_0)||^2`` for the truncated filter.

    With ``E(X_l | F_0) = sum_{m>=0} a_{l+m} eps_{-m}`` this equals
    ``sum_{m>=0} |sum_{l=1}^{min(n, J-m)} exp(i l theta) a_{l+m}|^2``.
    """
    a = check_coeffs(coeffs)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    J = a.size - 1
    if J == 0:
        return 0.0
    b = a[1:]  # b[t] = a_{t+1}
    n_eff = min(n, J)
    w = np.exp(1j * np.arange(1, n_eff + 1) * float(theta))
    # conv[m + n_eff - 1] = sum_{l=1}^{n_eff} w_l a_{l+m}
    conv = signal.convolve(b, w[::-1], mode="full")
    inner = conv[n_eff - 1:n_eff - 1 + J]
    return float(np.sum(inner.real ** 2 + inner.imag ** 2))


# -- reversible Markov chains ------------------------------------------------

def jacobi_eigh(A, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol`` times
    ``max(1, ||A||_F)``. Returns ``(eigenvalues, eigenvectors)`` with
    eigenvectors in columns, eigenvalues in descending order.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("jacobi_eigh needs a square matrix")
    n = A.shape[0]
    if n > JACOBI_MAX_STATES:
        raise ValueError(f"jacobi_eigh supports at most {JACOBI_MAX_STATES} states, got {n}")
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(A), initial=0.0)):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A[offdiag]))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                phi = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(phi) > 1e150:
                    t = 0.5 / phi
                else:
                    t = (1.0 if phi >= 0.0 else -1.0) / (abs(phi) + math.sqrt(phi * phi + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order]


@dataclass(frozen=True, eq=False)
class EigenDecomp:
    """Spectral measure of an observable: masses ``weights`` at ``eigenvalues``."""

    eigenvalues: np.ndarray
    weights: np.ndarray

    @property
    def c0(self):
        return float(np.sum(self.weights))

    def autocov(self, maxlag):
        """``c_j = sum_i w_i lambda_i^j`` for j = 0..maxlag."""
        j = np.arange(int(maxlag) + 1)
        return (self.weights[None, :] * self.eigenvalues[None, :] ** j[:, None]).sum(axis=1)


def markov_eigen(spec):
    """Eigenvalues of ``Q`` and the spectral weights of ``spec.f``.

    ``Q`` is symmetrised as ``D^{1/2} Q D^{-1/2}`` with ``D = diag(pi)`` and
    diagonalised by :func:`jacobi_eigh`. The weight at eigenvalue ``lambda_i``
    is the squared ``L^2(pi)`` projection of ``f`` onto its eigenvector.
    """
    pi = np.asarray(spec.stationary, dtype=np.float64)
    Q = np.asarray(spec.transition, dtype=np.float64)
    flux = pi[:, None] * Q
    if np.max(np.abs(flux - flux.T)) > 1e-10:
        raise MarkovSpecError("reversible", "chain is not reversible; spectral calculus needs Q = Q*")
    if np.any(pi <= 0.0):
        raise MarkovSpecError("ergodic", "stationary vector has zero mass on some state")
    root = np.sqrt(pi)
    sym = root[:, None] * Q / root[None, :]
    vals, vecs = jacobi_eigh(sym)
    if np.sum(np.abs(vals - 1.0) < 1e-9) > 1:
        raise MarkovSpecError("ergodic", "eigenvalue 1 is repeated: chain is reducible (not ergodic)")
    vals = np.clip(vals, -1.0, 1.0)
    proj = vecs.T @ (root * spec.f)
    weights = proj ** 2
    # f is centred, so its mass on the constant eigenvector is rounding noise
    weights[np.abs(vals - 1.0) < 1e-9] = 0.0
    c0 = float(pi @ spec.f ** 2)
    if abs(weights.sum() - c0) > 1e-10 * max(1.0, c0):
        raise ArithmeticError("spectral weights do not sum to c_0")
    vals.setflags(write=False)
    weights.setflags(write=False)
    return EigenDecomp(vals, weights)


def _check_no_unit_mass(decomp):
    unit = np.abs(decomp.eigenvalues) >= 1.0 - _UNIT_EIG_TOL
    if np.any(decomp.weights[unit] > 1e-12 * max(decomp.c0, 1e-300)):
        raise ConfigurationError(
            "observable has spectral mass at |lambda| = 1 (non-ergodic or periodic); g is not defined"
        )


def markov_g(decomp, theta):
    """``g(theta) = sum_i w_i (1 - l_i^2) / (1 - 2 l_i cos theta + l_i^2)``."""
    _check_no_unit_mass(decomp)
    th = np.asarray(theta, dtype=np.float64)
    lam = decomp.eigenvalues
    w = decomp.weights
    keep = w > 0.0
    lam, w = lam[keep], w[keep]
    cos_t = np.cos(th)[..., None]
    vals = np.sum(w * (1.0 - lam ** 2) / (1.0 - 2.0 * lam * cos_t + lam ** 2), axis=-1)
    return float(vals) if vals.ndim == 0 else vals


def markov_condfn_norm(decomp, theta, n):
    """``||E(S_n(theta)|F_0)||^2 = sum_i w_i |sum_{k=1}^n (l_i e^{i theta})^k|^2``."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    total = 0.0
    for lam, w in zip(decomp.eigenvalues.tolist(), decomp.weights.tolist()):
        if w == 0.0 or lam == 0.0:
            continue
        z = lam * complex(math.cos(theta), math.sin(theta))
        if abs(1.0 - z) < 1e-14:
            geo = complex(n)
        else:
            geo = z * (1.0 - z ** n) / (1.0 - z)
        total += w * (geo.real ** 2 + geo.imag ** 2)
    return total


# -- unified model -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Closed-form ``g``, ``c_j`` and conditional norms for one process spec."""

    provider: str
    coeffs: np.ndarray = None
    decomp: EigenDecomp = None

    @property
    def c0(self):
        if self.provider == "linear":
            return float(np.dot(self.coeffs, self.coeffs))
        return self.decomp.c0

    @property
    def is_finite_filter(self):
        return self.provider == "linear"

    def g(self, theta):
        if self.provider == "linear":
            return linear_g(self.coeffs, theta)
        return markov_g(self.decomp, theta)

    def autocov(self, maxlag):
        if self.provider == "linear":
            return linear_autocov(self.coeffs, maxlag)
        return self.decomp.autocov(maxlag)

    def cesaro_variance(self, n, theta):
        return cesaro_variance(self.autocov(int(n) - 1), n, theta)

    def condfn_norm(self, theta, n):
        if self.provider == "linear":
            return linear_condfn_norm(self.coeffs, theta, n)
        return markov_condfn_norm(self.decomp, theta, n)


def spectral_model(spec):
    """Build the closed-form model for ``spec``; ``None`` when none exists."""
    kind = getattr(spec, "kind", None)
    if kind == "linear":
        return SpectralModel("linear", coeffs=spec.coeffs)
    if kind == "markov":
        return SpectralModel("markov", decomp=markov_eigen(spec))
    return None


# -- quadrature --------------------------------------------------------------

def quadrature_grid(points=QUADRATURE_POINTS):
    return TWO_PI * np.arange(points) / points


def fourier_coefficient(g, j, points=QUADRATURE_POINTS):
    """``(1/2pi) integral_0^{2pi} g(theta) exp(i j theta) d theta`` by the periodic trapezoid rule."""
    th = quadrature_grid(points)
    vals = np.asarray(g(th), dtype=np.float64)
    return complex(np.mean(vals * np.exp(1j * j * th)))


def integrate_g(g, points=QUADRATURE_POINTS, exclude_radius=0.0):
    """Integral of ``g`` over [0, 2 pi] by the periodic trapezoid rule.

    Grid points within ``exclude_radius`` of 0 (mod 2 pi) are dropped, which
    is how a pole at the origin is kept out of the sum. Returns
    ``(integral, excluded_width)``; the mass of ``g`` on the excluded
    neighbourhood is not included in ``integral``.
    """
    th = quadrature_grid(points)
    dist = np.minimum(th, TWO_PI - th)
    keep = dist >= exclude_radius
    vals = np.asarray(g(th[keep]), dtype=np.float64)
    excluded = 0.0 if exclude_radius <= 0.0 else 2.0 * exclude_radius
    if exclude_radius > 0.0 and not np.all(keep):
        warnings.warn(
            f"{int(np.sum(~keep))} grid points near theta=0 excluded from the quadrature",
            UserWarning,
            stacklevel=2,
        )
    return float(np.sum(vals) * TWO_PI / points), excluded
