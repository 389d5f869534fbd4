"""Symmetric b-bit scalar quantizers, Lloyd-Max design and channel constants.

A quantizer is parameterized on the positive half-line: thresholds
``0 = t_0 < t_1 < ... < t_{K-1} < t_K = inf`` with ``K = 2**(b-1)`` bins and
one positive level per bin. Negative inputs mirror the positive side.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DomainError, IterationLimitError
from .noise import ADDITIVE, ADVERSARIAL_FLIP, RANDOM_FLIP, NoiseModel
from .stats import normal_pdf, normal_quantile, normal_sf

__all__ = [
    "Quantizer",
    "ChannelConstants",
    "quantize",
    "lloyd_max_iterations",
    "lloyd_max_design",
    "partition_moments",
    "channel_constants",
    "distortion",
    "omega_optimal",
]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class Quantizer:
    bits: int
    thresholds: tuple
    levels: tuple

    def __post_init__(self):
        b = int(self.bits)
        if b < 1:
            raise DomainError("bit depth must be >= 1")
        t = tuple(float(v) for v in self.thresholds)
        mu = tuple(float(v) for v in self.levels)
        K = 2 ** (b - 1)
        if len(t) != K - 1 or len(mu) != K:
            raise DomainError(
                "b=%d needs %d thresholds and %d levels, got %d and %d"
                % (b, K - 1, K, len(t), len(mu))
            )
        if not all(math.isfinite(v) for v in t + mu):
            raise DomainError("thresholds and levels must be finite")
        edges = (0.0,) + t + (math.inf,)
        if any(edges[k] >= edges[k + 1] for k in range(K)):
            raise DomainError("thresholds must be positive and strictly increasing")
        for k in range(K):
            if not edges[k] < mu[k] < edges[k + 1]:
                raise DomainError("level %d=%g outside its bin" % (k + 1, mu[k]))
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "levels", mu)

    @property
    def n_bins(self):
        """Number of bins K on the positive half-line."""
        return len(self.levels)

    @property
    def edges(self):
        return np.array((0.0,) + self.thresholds + (math.inf,))

    @property
    def codebook(self):
        """All 2**b output values in increasing order."""
        mu = np.array(self.levels)
        return np.concatenate([-mu[::-1], mu])

    def __call__(self, z):
        return quantize(self, z)

    def scaled(self, c):
        """The same quantizer with thresholds and levels multiplied by c > 0."""
        if not c > 0:
            raise DomainError("scale factor must be positive")
        return Quantizer(
            self.bits,
            tuple(c * v for v in self.thresholds),
            tuple(c * v for v in self.levels),
        )

    def to_record(self):
        """Serialize as ``b;t1,...,t_{K-1};mu1,...,muK`` (17 significant digits)."""
        fmt = lambda vals: ",".join("%.17g" % v for v in vals)  # noqa: E731
        return "%d;%s;%s" % (self.bits, fmt(self.thresholds), fmt(self.levels))

    @classmethod
    def from_record(cls, text):
        parts = text.strip().split(";")
        if len(parts) != 3:
            raise DomainError("quantizer record needs three ';'-separated fields")
        parse = lambda s: tuple(float(v) for v in s.split(",")) if s else ()  # noqa: E731
        return cls(int(parts[0]), parse(parts[1]), parse(parts[2]))

    def bin_index(self, z):
        """0-based bin index of |z|, using half-open bins [t_{k-1}, t_k)."""
        return np.searchsorted(np.asarray(self.thresholds), np.abs(z), side="right")


@dataclass(frozen=True)
class ChannelConstants:
    """The triple (lambda, Psi, Omega = Psi / lambda).

    Omega is ``inf`` when lambda <= 0, which only happens for flip channels
    at or past their breakdown point.
    """

    lam: float
    psi: float
    omega: float


def quantize(q, z):
    """Apply ``q`` elementwise; zero maps to ``+mu_1``."""
    z = np.asarray(z, dtype=float)
    mu = np.asarray(q.levels)
    out = np.where(z >= 0.0, 1.0, -1.0) * mu[q.bin_index(z)]
    return out[()] if out.ndim == 0 else out


def _half_bin_moments(edges):
    """Mass, first and second moments of N(0,1) restricted to each [a, b).

    ``edges`` are nonnegative and increasing, last one may be inf. Upper-tail
    probabilities are used so far-right bins do not cancel.
    """
    a, b = edges[:-1], edges[1:]
    prob = normal_sf(a) - normal_sf(b)
    pa, pb = normal_pdf(a), normal_pdf(b)
    first = pa - pb
    finite = np.isfinite(b)
    bpb = np.zeros_like(b)
    bpb[finite] = b[finite] * pb[finite]
    second = prob + a * pa - bpb
    return prob, first, second


def _conditional_means(edges_std):
    prob, first, _ = _half_bin_moments(edges_std)
    return first / prob


def _distortion_unit(t, mu):
    """E[(h - Q(h))^2] for h ~ N(0, 1) and arbitrary (t, mu)."""
    edges = np.concatenate([[0.0], t, [math.inf]])
    prob, first, second = _half_bin_moments(edges)
    return float(2.0 * np.sum(second - 2.0 * mu * first + mu * mu * prob))


def _initial_levels(K):
    # (2k-1)/(2K) quantiles of the half-normal
    u = (2.0 * np.arange(1, K + 1) - 1.0) / (2.0 * K)
    return normal_quantile(0.5 + 0.5 * u)


def lloyd_max_iterations(b, max_iter=20000):
    """Yield the alternating Lloyd-Max steps for a unit-variance Gaussian.

    Each item is ``(step, thresholds, levels, distortion, change)`` where
    ``step`` is ``"t"`` (thresholds moved to level midpoints) or ``"mu"``
    (levels moved to bin centroids) and ``change`` is the largest parameter
    move made by that step.
    """
    if b < 1:
        raise DomainError("bit depth must be >= 1")
    K = 2 ** (b - 1)
    mu = _initial_levels(K)
    t = 0.5 * (mu[:-1] + mu[1:])
    for _ in range(max_iter):
        new_t = 0.5 * (mu[:-1] + mu[1:])
        dt = float(np.max(np.abs(new_t - t))) if K > 1 else 0.0
        t = new_t
        yield "t", t, mu, _distortion_unit(t, mu), dt
        new_mu = _conditional_means(np.concatenate([[0.0], t, [math.inf]]))
        dmu = float(np.max(np.abs(new_mu - mu)))
        mu = new_mu
        yield "mu", t, mu, _distortion_unit(t, mu), dmu


def _centroid_map(mu):
    """One Lloyd-Max sweep at unit variance: thresholds to midpoints, levels to centroids."""
    t = 0.5 * (mu[:-1] + mu[1:])
    return _conditional_means(np.concatenate([[0.0], t, [math.inf]]))


def _centroid_map_bands(mu):
    """Tridiagonal Jacobian of :func:`_centroid_map` in ``solve_banded`` layout."""
    K = mu.size
    t = 0.5 * (mu[:-1] + mu[1:])
    a = np.concatenate([[0.0], t])
    b = np.concatenate([t, [math.inf]])
    prob, first, _ = _half_bin_moments(np.concatenate([[0.0], t, [math.inf]]))
    c = first / prob
    # d c / d a = pdf(a) (c - a) / P and d c / d b = pdf(b) (b - c) / P
    dc_da = normal_pdf(a) * (c - a) / prob
    dc_db = np.zeros(K)
    dc_db[:-1] = normal_pdf(b[:-1]) * (b[:-1] - c[:-1]) / prob[:-1]
    dc_da[0] = 0.0
    bands = np.zeros((3, K))
    bands[0, 1:] = 0.5 * dc_db[:-1]
    bands[1] = 0.5 * (dc_da + dc_db)
    bands[2, :-1] = 0.5 * dc_da[1:]
    return bands


def _newton_step(mu, residual):
    """Damped Newton step on ``F(mu) - mu = 0``; ``None`` if no step reduces the residual."""
    g = _centroid_map(mu) - mu
    bands = _centroid_map_bands(mu)
    bands[1] -= 1.0
    try:
        step = linalg.solve_banded((1, 1), bands, -g)
    except (linalg.LinAlgError, ValueError):
        return None
    s = 1.0
    while s > 1e-6:
        new = mu + s * step
        if new[0] > 0 and np.all(np.diff(new) > 0):
            r = float(np.max(np.abs(_centroid_map(new) - new)))
            if r < residual:
                return new, r
        s *= 0.5
    return None


@functools.lru_cache(maxsize=64)
def _lloyd_max_unit(b, tol, max_iter):
    # The Lloyd-Max fixed point solves F(mu) = mu for the centroid map F.
    # Plain alternation contracts very slowly for b >= 4, so Newton's method
    # on F(mu) - mu (tridiagonal Jacobian) is used, falling back to plain
    # sweeps if a damped step fails to reduce the residual.
    if b < 1:
        raise DomainError("bit depth must be >= 1")
    mu = _initial_levels(2 ** (b - 1))
    residual = float(np.max(np.abs(_centroid_map(mu) - mu)))
    for _ in range(max_iter):
        if residual < tol:
            break
        res = _newton_step(mu, residual)
        if res is None:
            new = _centroid_map(mu)
            mu, residual = new, float(np.max(np.abs(_centroid_map(new) - new)))
        else:
            mu, residual = res
    else:
        if not residual < tol:
            t = 0.5 * (mu[:-1] + mu[1:])
            raise IterationLimitError(
                "Lloyd-Max did not converge in %d iterations (b=%d)" % (max_iter, b),
                last_iterate=(tuple(t), tuple(mu)),
                residual=residual,
            )
    t = 0.5 * (mu[:-1] + mu[1:])
    return tuple(t), tuple(mu)


def lloyd_max_design(b, source_std=1.0, tol=1e-10, max_iter=500):
    """MSE-optimal b-bit quantizer for a N(0, source_std**2) source.

    Solves the Lloyd-Max fixed-point equations (levels are bin centroids,
    thresholds are level midpoints) at unit variance by damped Newton
    iteration from levels at the half-normal quantiles, then rescales. The
    returned levels satisfy the centroid condition to within ``tol``.
    Raises :class:`IterationLimitError` if that is not reached within
    ``max_iter`` iterations. :func:`lloyd_max_iterations` exposes the plain
    alternation.
    """
    if not source_std > 0:
        raise DomainError("source_std must be positive")
    if not tol > 0:
        raise DomainError("tol must be positive")
    t, mu = _lloyd_max_unit(int(b), float(tol), int(max_iter))
    q = Quantizer(int(b), t, mu)
    return q if source_std == 1.0 else q.scaled(float(source_std))


def partition_moments(q, sigma=0.0):
    """Bin probabilities alpha and conditional means E under N(0, 1 + sigma^2).

    ``alpha[k] = P(|g| in R_k)`` and ``E[k] = E[g | g in R_k]`` for
    ``g ~ N(0, 1 + sigma**2)``, bins taken on the positive half-line.
    """
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    scale = math.sqrt(1.0 + sigma * sigma)
    prob, first, _ = _half_bin_moments(q.edges / scale)
    return 2.0 * prob, scale * first / prob


def _flip_alpha(alpha, kind, p, K):
    if kind == RANDOM_FLIP:
        # each magnitude has 2 of the 2K-1 alternative codewords, its own bin 1
        others = 2 * K - 1
        return alpha * (1.0 - p) + alpha * p / others + 2.0 * p * (1.0 - alpha) / others
    out = (1.0 - p) * alpha
    out[-1] = alpha[-1] + p * np.sum(alpha[:-1])
    return out


def channel_constants(q, model=None):
    """(lambda, Psi, Omega) of quantizer ``q`` under a noise model.

    Additive noise uses the moments at total variance 1 + sigma^2. The flip
    channels are evaluated with the clean (sigma = 0) bin moments; lambda is
    linear in p and can turn nonpositive, in which case Omega is ``inf``.
    """
    if model is None:
        model = NoiseModel.additive(0.0)
    mu = np.asarray(q.levels)
    K = q.n_bins
    if model.kind == ADDITIVE:
        sigma = model.param
        alpha, E = partition_moments(q, sigma)
        lam = float(np.dot(alpha, E * mu) / (1.0 + sigma * sigma))
    else:
        p = model.param
        alpha0, E0 = partition_moments(q, 0.0)
        lam0 = float(np.dot(alpha0, E0 * mu))
        if model.kind == RANDOM_FLIP:
            lam = lam0 * ((1.0 - p) - p / (2.0 ** q.bits - 1.0))
        elif model.kind == ADVERSARIAL_FLIP:
            lam = (1.0 - p) * lam0 - p * mu[-1] * SQRT_2_OVER_PI
        alpha = _flip_alpha(alpha0, model.kind, p, K)
    psi = math.sqrt(float(np.dot(alpha, mu * mu)))
    omega = psi / lam if lam > 0 else math.inf
    return ChannelConstants(lam, psi, omega)


def distortion(q, source_std=1.0):
    """Mean squared quantization error E[(h - Q(h))^2], h ~ N(0, source_std^2)."""
    if not source_std > 0:
        raise DomainError("source_std must be positive")
    s = float(source_std)
    t = np.asarray(q.thresholds) / s
    mu = np.asarray(q.levels) / s
    return s * s * _distortion_unit(t, mu)


def omega_optimal(b, sigma=0.0):
    """Smallest attainable Omega at bit depth b: sqrt((1 + sigma^2) / lambda_{b,0})."""
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    q0 = lloyd_max_design(b)
    lam0 = channel_constants(q0).lam
    return math.sqrt((1.0 + sigma * sigma) / lam0)
