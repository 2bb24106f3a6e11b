"""Seeded generators for the stationary process classes.

Every generator is a pure function of ``(spec, n, seed)``. Initial conditions
are drawn from the exact stationary law, so no warm-up samples are discarded:

* linear filters draw ``J`` pre-innovations ``eps_{1-J} .. eps_0``;
* Markov chains draw ``xi_0`` from the stationary vector;
* the AR(1) driving a Gaussian functional starts from N(0, 1/(1 - phi^2)).
"""

import bisect
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from ._validation import check_coeffs
from .exceptions import ConfigurationError, MarkovSpecError
from .rng import SplitMix64

INNOVATIONS = ("gaussian", "rademacher")
NONLINEARITIES = ("sign", "cube")

# np.convolve is exact enough and faster below this filter length.
_DIRECT_CONV_MAX = 64


@dataclass(frozen=True, eq=False)
class LinearSpec:
    """Causal linear filter ``X_k = sum_j coeffs[j] * eps_{k-j}``.

    ``coeffs`` is a finite truncation of the (possibly infinite) filter;
    ``tail_energy`` records the squared mass dropped by the truncation when
    it is known.
    """

    coeffs: np.ndarray
    innovation: str = "gaussian"
    name: str = "linear"
    tail_energy: float = 0.0

    def __post_init__(self):
        arr = check_coeffs(self.coeffs)
        if not np.any(arr != 0.0):
            raise ConfigurationError("linear process needs at least one nonzero coefficient")
        if self.innovation not in INNOVATIONS:
            raise ConfigurationError(
                f"unknown innovation {self.innovation!r}; expected one of {INNOVATIONS}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    kind = "linear"

    @property
    def truncation(self):
        return self.coeffs.size - 1

    def to_dict(self):
        d = {"kind": "linear", "innovation": self.innovation, "name": self.name}
        if self.name == "slow_decay":
            d["J"] = self.truncation
            d["tail_energy"] = self.tail_energy
        else:
            d["coeffs"] = [float(c) for c in self.coeffs]
        return d


@dataclass(frozen=True, eq=False)
class MarkovSpec:
    """Finite-state reversible chain observed through ``f``.

    ``stationary`` may be omitted; it is then computed from ``transition``.
    Construction checks row-stochasticity, stationarity, detailed balance and
    centring of ``f``, raising :class:`MarkovSpecError` naming the first
    violated invariant.
    """

    transition: np.ndarray
    f: np.ndarray
    stationary: np.ndarray = None
    name: str = "markov"

    kind = "markov"

    def __post_init__(self):
        Q = np.array(self.transition, dtype=np.float64)
        f = np.array(self.f, dtype=np.float64).ravel()
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
            raise MarkovSpecError("stochastic", f"transition must be square, got shape {Q.shape}")
        S = Q.shape[0]
        if f.size != S:
            raise ConfigurationError(f"f has length {f.size}, expected {S}")
        if np.any(Q < 0.0):
            i = int(np.argwhere(Q < 0.0)[0][0])
            raise MarkovSpecError("stochastic", f"transition row {i} has a negative entry")
        row_err = np.abs(Q.sum(axis=1) - 1.0)
        if np.any(row_err > 1e-12):
            i = int(np.argmax(row_err > 1e-12))
            raise MarkovSpecError(
                "stochastic", f"transition row {i} sums to {Q[i].sum():.15g}, not 1"
            )
        if self.stationary is None:
            pi = stationary_distribution(Q)
        else:
            pi = np.array(self.stationary, dtype=np.float64).ravel()
            if pi.size != S or np.any(pi < 0.0) or abs(pi.sum() - 1.0) > 1e-10:
                raise MarkovSpecError("stationary", "stationary vector is not a probability vector")
        if np.max(np.abs(pi @ Q - pi)) > 1e-10:
            raise MarkovSpecError("stationary", "stationary vector is not invariant: pi Q != pi")
        flux = pi[:, None] * Q
        if np.max(np.abs(flux - flux.T)) > 1e-10:
            raise MarkovSpecError(
                "reversible", "detailed balance pi_i Q_ij = pi_j Q_ji fails; chain is not reversible"
            )
        if abs(float(pi @ f)) > 1e-10:
            raise MarkovSpecError("centered", f"observable is not centred: E_pi f = {pi @ f:.3g}")
        for arr in (Q, f, pi):
            arr.setflags(write=False)
        object.__setattr__(self, "transition", Q)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "stationary", pi)

    @property
    def n_states(self):
        return self.transition.shape[0]

    def to_dict(self):
        return {
            "kind": "markov",
            "name": self.name,
            "transition": self.transition.tolist(),
            "f": self.f.tolist(),
            "stationary": self.stationary.tolist(),
        }


@dataclass(frozen=True)
class GaussianFunctionalSpec:
    """``X_k = h(Y_k) - centering`` for a stationary Gaussian AR(1) ``Y``."""

    phi: float
    h: str = "sign"
    centering: float = None
    name: str = "gaussian_functional"

    kind = "gaussian_functional"

    def __post_init__(self):
        phi = float(self.phi)
        if not abs(phi) < 1.0:
            raise ConfigurationError(f"AR(1) coefficient must satisfy |phi| < 1, got {phi}")
        if self.h not in NONLINEARITIES:
            raise ConfigurationError(f"unknown nonlinearity {self.h!r}; expected one of {NONLINEARITIES}")
        # Both nonlinearities are odd, so the stationary mean is 0.
        if self.centering is None:
            object.__setattr__(self, "centering", 0.0)
        elif self.centering != 0.0:
            raise ConfigurationError("centering must equal the stationary mean of h(Y), which is 0")
        object.__setattr__(self, "phi", phi)

    @property
    def marginal_variance(self):
        """Variance of the driving AR(1), 1 / (1 - phi^2)."""
        return 1.0 / (1.0 - self.phi ** 2)

    @property
    def variance(self):
        """Var X_0 in closed form: 1 for sign, 15 sigma^6 for cube."""
        if self.h == "sign":
            return 1.0
        return 15.0 * self.marginal_variance ** 3

    def to_dict(self):
        return {"kind": "gaussian_functional", "name": self.name, "phi": self.phi, "h": self.h,
                "centering": self.centering}


@dataclass(frozen=True, eq=False)
class Path:
    """Realisation ``X_1 .. X_n`` with the spec and seed that produced it."""

    values: np.ndarray
    spec: object
    seed: int
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.values.size

    def to_csv(self, fh=None):
        """Write ``index,value`` rows (1-based index); return text if ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "value"])
        for k, v in enumerate(self.values, start=1):
            writer.writerow([k, repr(float(v))])
        if fh is None:
            return buf.getvalue()
        return None


def stationary_distribution(Q):
    """Left Perron vector of a stochastic matrix, normalised to sum 1."""
    Q = np.asarray(Q, dtype=np.float64)
    w, v = np.linalg.eig(Q.T)
    k = int(np.argmin(np.abs(w - 1.0)))
    pi = np.real(v[:, k])
    pi = pi / pi.sum()
    pi[np.abs(pi) < 1e-300] = 0.0
    if np.any(pi < -1e-12):
        raise MarkovSpecError("stationary", "could not find a nonnegative stationary vector")
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


# -- presets -----------------------------------------------------------------

def iid_gauss():
    return LinearSpec(np.array([1.0]), name="iid_gauss")


def ma1(coeffs=(1.0, 0.5), innovation="gaussian"):
    return LinearSpec(np.asarray(coeffs, dtype=float), innovation=innovation, name="ma1")


def slow_decay_coeffs(J):
    """``a_0 = a_1 = 1`` and ``a_j = j^{-1/2} / log j`` for ``2 <= j <= J``."""
    if J < 1:
        raise ConfigurationError("slow_decay truncation J must be at least 1")
    j = np.arange(2, J + 1, dtype=np.float64)
    return np.concatenate(([1.0, 1.0], 1.0 / (np.sqrt(j) * np.log(j))))


def slow_decay_tail_energy(J):
    """Approximate ``sum_{j > J} a_j^2 = sum 1/(j log^2 j)`` by the midpoint integral 1/log(J + 1/2)."""
    return 1.0 / math.log(J + 0.5)


def slow_decay(J=100_000, innovation="gaussian"):
    return LinearSpec(slow_decay_coeffs(J), innovation=innovation, name="slow_decay",
                      tail_energy=slow_decay_tail_energy(J))


def two_state(p, f=(1.0, -1.0)):
    """Symmetric two-state chain switching with probability ``p``; eigenvalue ``1 - 2p``."""
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"switch probability must lie in [0, 1], got {p}")
    Q = np.array([[1.0 - p, p], [p, 1.0 - p]])
    return MarkovSpec(Q, np.asarray(f, dtype=float), np.array([0.5, 0.5]), name="two_state")


# -- generators --------------------------------------------------------------

def _check_n(n):
    n = int(n)
    if n < 1:
        raise ConfigurationError(f"path length must be positive, got {n}")
    return n


def _innovations(rng, spec, count):
    if spec.innovation == "gaussian":
        return rng.standard_normals(count)
    return rng.rademachers(count)


def gen_linear(spec, n, seed):
    n = _check_n(n)
    a = spec.coeffs
    J = a.size - 1
    eps = _innovations(SplitMix64(seed), spec, n + J)
    if a.size <= _DIRECT_CONV_MAX:
        x = np.convolve(eps, a, mode="valid")
    else:
        x = signal.fftconvolve(eps, a, mode="valid")
    return Path(x, spec, int(seed), {"truncation": J, "tail_energy": spec.tail_energy})


def gen_markov(spec, n, seed):
    n = _check_n(n)
    u = SplitMix64(seed).uniforms(n + 1)
    last = spec.n_states - 1
    pi_cdf = np.cumsum(spec.stationary).tolist()
    row_cdf = [np.cumsum(row).tolist() for row in spec.transition]
    state = min(bisect.bisect_right(pi_cdf, u[0]), last)
    states = np.empty(n, dtype=np.intp)
    for k, uk in enumerate(u[1:].tolist()):
        state = min(bisect.bisect_right(row_cdf[state], uk), last)
        states[k] = state
    return Path(spec.f[states].copy(), spec, int(seed))


def gen_gaussian_functional(spec, n, seed):
    n = _check_n(n)
    eps = SplitMix64(seed).standard_normals(n + 1)
    y0 = eps[0] * math.sqrt(spec.marginal_variance)
    y, _ = signal.lfilter([1.0], [1.0, -spec.phi], eps[1:], zi=[spec.phi * y0])
    if spec.h == "sign":
        x = np.sign(y)
    else:
        x = y ** 3
    return Path(x - spec.centering, spec, int(seed))


_GENERATORS = {
    "linear": gen_linear,
    "markov": gen_markov,
    "gaussian_functional": gen_gaussian_functional,
}


def generate(spec, n, seed):
    """Dispatch to the generator matching ``spec.kind``."""
    try:
        gen = _GENERATORS[spec.kind]
    except (KeyError, AttributeError):
        raise ConfigurationError(f"unsupported process spec {spec!r}") from None
    return gen(spec, n, seed)


def generate_paths(spec, n, seeds):
    """Stack one path per seed into an array of shape (len(seeds), n)."""
    out = np.empty((len(seeds), int(n)))
    for i, s in enumerate(seeds):
        out[i] = generate(spec, n, s).values
    return out
