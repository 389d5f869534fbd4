"""Maximum likelihood estimation of the signal norm from quantized data.

Two settings are covered. Without noise the observations are i.i.d.
N(0, psi^2) seen through the bins, so only the bin counts matter. With
additive noise and a known (or plugged-in) direction, each observation
constrains ``psi * z_i + sigma * eps_i`` to an interval, and (psi, sigma)
are estimated jointly by coordinate ascent with golden-section line searches.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channels import codeword_index
from .exceptions import DegenerateCountError, DomainError, UnidentifiableError
from .stats import log_normal_interval, normal_pdf, normal_quantile

__all__ = [
    "BinInterval",
    "ScaleEstimate",
    "bin_intervals",
    "interval_bounds",
    "bin_counts",
    "golden_section_max",
    "noiseless_log_likelihood",
    "scale_mle_noiseless",
    "noisy_log_likelihood",
    "separation_interval",
    "scale_mle_noisy",
    "prop1_exponent",
    "prop1_tail_bound",
    "prop1_epsilon",
    "combine_direction_scale",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BinInterval:
    lower: float
    upper: float


@dataclass(frozen=True)
class ScaleEstimate:
    psi_hat: float
    sigma_hat: float = 0.0
    converged: bool = True
    log_likelihood: float = 0.0
    sweeps: int = 0
    separated: bool = False

    def csv_row(self):
        return "%.12g,%.12g,%d,%.12g" % (
            self.psi_hat, self.sigma_hat, int(self.converged), self.log_likelihood)


def _signed_bins(y, q):
    idx = codeword_index(y, q)
    K = q.n_bins
    sign = np.where(idx >= K, 1.0, -1.0)
    k = np.where(idx >= K, idx - K, K - 1 - idx)
    return sign, k


def interval_bounds(y, q):
    """Arrays ``(lower, upper)`` of the pre-quantization interval of each y_i."""
    sign, k = _signed_bins(y, q)
    edges = q.edges
    lo, hi = edges[k], edges[k + 1]
    lower = np.where(sign > 0, lo, -hi)
    upper = np.where(sign > 0, hi, -lo)
    return lower, upper


def bin_intervals(y, q):
    """Interval [l_i, u_i] that contained each observation before quantization."""
    lower, upper = interval_bounds(y, q)
    return [BinInterval(float(a), float(b)) for a, b in zip(lower, upper)]


def bin_counts(y, q):
    """Number of observations with |y_i| in each of the K bins."""
    _, k = _signed_bins(y, q)
    return np.bincount(k, minlength=q.n_bins)


def golden_section_max(f, lo, hi, xtol=1e-10, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket end points are compared against the interior optimum so that
    a maximum at the boundary is reported correctly.
    """
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * (1.0 + abs(c) + abs(d)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    for edge in (lo, hi):
        fe = f(edge)
        if fe > fx:
            x, fx = edge, fe
    return x, fx


def noiseless_log_likelihood(psi, counts, thresholds):
    """sum_k m_k log(2 (Phi(t_k/psi) - Phi(t_{k-1}/psi)))."""
    if psi <= 0:
        return -math.inf if np.any(np.asarray(counts)[1:]) else 0.0
    edges = np.concatenate([[0.0], thresholds, [math.inf]]) / psi
    logp = math.log(2.0) + log_normal_interval(edges[:-1], edges[1:])
    counts = np.asarray(counts, dtype=float)
    used = counts > 0
    return float(np.sum(counts[used] * logp[used]))


def _noiseless_score(psi, counts, thresholds):
    """d/dpsi of :func:`noiseless_log_likelihood` over the occupied bins."""
    counts = np.asarray(counts, dtype=float)
    used = counts > 0
    edges = np.concatenate([[0.0], thresholds, [math.inf]]) / psi
    a, b = edges[:-1][used], edges[1:][used]
    logp = log_normal_interval(a, b)
    with np.errstate(invalid="ignore"):
        # h * pdf(h) / P, with the ratio formed in log space for far-tail bins
        ga = np.where(np.isfinite(a), a * np.exp(-0.5 * a * a - logp), 0.0)
        gb = np.where(np.isfinite(b), b * np.exp(-0.5 * b * b - logp), 0.0)
    return float(np.sum(counts[used] * (ga - gb)) / (psi * math.sqrt(2.0 * math.pi)))


def _polish_score_root(psi, counts, thresholds, xtol):
    # golden section resolves the flat maximum only to ~sqrt(eps); refine on the score
    score = lambda p: _noiseless_score(p, counts, thresholds)  # noqa: E731
    width = 1e-6 * psi
    for _ in range(8):
        lo, hi = psi - width, psi + width
        if lo > 0 and score(lo) > 0 > score(hi):
            return float(optimize.brentq(score, lo, hi, xtol=xtol * psi, rtol=4 * np.finfo(float).eps))
        width *= 10.0
    return psi


def scale_mle_noiseless(counts, q, xtol=1e-13):
    """MLE of psi from bin counts when there is no additive noise.

    K = 2 uses the closed form ``t1 / Phi^-1((1 + m1/m) / 2)``. For K >= 3 the
    log-likelihood is maximized by golden-section search, then refined by
    root-finding on the score.
    """
    counts = np.asarray(counts, dtype=float)
    K = q.n_bins
    if K == 1:
        raise UnidentifiableError("a 1-bit quantizer carries no information about the scale")
    if counts.size != K:
        raise DomainError("expected %d bin counts, got %d" % (K, counts.size))
    if np.any(counts < 0) or counts.sum() < 1:
        raise DomainError("counts must be nonnegative with a positive total")
    t = np.asarray(q.thresholds)
    m = counts.sum()
    nonzero = np.flatnonzero(counts)
    if K == 2:
        frac = counts[0] / m
        if frac <= 0.0 or frac >= 1.0:
            raise DegenerateCountError("all observations fall in one bin; the MLE is 0 or infinite")
        psi = float(t[0] / normal_quantile(0.5 * (1.0 + frac)))
    else:
        if nonzero.size == 1 and nonzero[0] in (0, K - 1):
            raise DegenerateCountError("all observations in an outer bin; the MLE is 0 or infinite")
        hi = 10.0 * _count_spread(counts, t)
        psi, _ = golden_section_max(
            lambda p: noiseless_log_likelihood(p, counts, t), 1e-9 * hi, hi, xtol=xtol)
        psi = _polish_score_root(psi, counts, t, xtol)
    return ScaleEstimate(psi, 0.0, True, noiseless_log_likelihood(psi, counts, t))


def _count_spread(counts, t):
    edges = np.concatenate([[0.0], t])
    width = np.diff(edges)
    mids = np.concatenate([edges[:-1] + width / 2, [t[-1] + width[-1] / 2]])
    return float(math.sqrt(np.dot(counts, mids ** 2) / counts.sum()))


def noisy_log_likelihood(psi, sigma, z, lower, upper):
    """sum_i log(Phi((u_i - psi z_i)/sigma) - Phi((l_i - psi z_i)/sigma))."""
    c = psi * z
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.sum(log_normal_interval((lower - c) / sigma, (upper - c) / sigma)))


def separation_interval(z, lower, upper):
    """Set of psi >= 0 with psi * z_i in [l_i, u_i] for all i, or ``None``."""
    lo, hi = 0.0, math.inf
    pos, neg, zero = z > 0, z < 0, z == 0
    if np.any(zero & ((lower > 0) | (upper < 0))):
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        if np.any(pos):
            lo = max(lo, float(np.max(lower[pos] / z[pos])))
            hi = min(hi, float(np.min(upper[pos] / z[pos])))
        if np.any(neg):
            lo = max(lo, float(np.max(upper[neg] / z[neg])))
            hi = min(hi, float(np.min(lower[neg] / z[neg])))
    if lo > hi:
        return None
    return lo, hi


def _reconstruction_spread(lower, upper):
    finite = np.isfinite(lower) & np.isfinite(upper)
    half = 0.5 * float(np.median(upper[finite] - lower[finite])) if np.any(finite) else 1.0
    recon = np.where(finite, 0.5 * (lower + upper),
                     np.where(np.isfinite(lower), lower + half, upper - half))
    return float(np.std(recon))


def scale_mle_noisy(z, intervals, init_sigma, grid=20, tol=1e-10, max_sweeps=200, xtol=1e-10):
    """Joint MLE of (psi, sigma) from interval-censored linear predictions.

    ``z[i]`` is ``<a_i, x_u>`` for the (true or estimated) unit direction and
    ``intervals`` the bins the observations fell into, either a list of
    :class:`BinInterval` or a pair of arrays ``(lower, upper)``. If some psi
    places every ``psi * z_i`` inside its interval the likelihood reaches one
    with sigma = 0; that case is reported with ``separated=True``.

    Otherwise a ``grid`` x ``grid`` scan over the brackets picks the starting
    point (the scan includes ``(0, init_sigma)``), followed by alternating
    golden-section maximization in psi and sigma until the log-likelihood
    gains less than ``tol`` in a sweep.
    """
    z = np.asarray(z, dtype=float)
    if isinstance(intervals, tuple) and len(intervals) == 2 and np.ndim(intervals[0]) == 1:
        lower, upper = (np.asarray(v, dtype=float) for v in intervals)
    else:
        lower = np.array([iv.lower for iv in intervals], dtype=float)
        upper = np.array([iv.upper for iv in intervals], dtype=float)
    if not (z.size == lower.size == upper.size):
        raise DomainError("z and intervals must have the same length")
    if not np.all(np.isfinite(z)) or np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
        raise DomainError("non-finite inputs to the likelihood")
    if not init_sigma > 0:
        raise DomainError("init_sigma must be positive")

    spread = _reconstruction_spread(lower, upper)
    zscale = float(np.std(z))
    s_hi = 10.0 * max(spread, init_sigma)
    s_lo = 1e-6

    def loglik(p, s):
        return noisy_log_likelihood(p, s, z, lower, upper)

    if zscale == 0.0:
        s, ll = golden_section_max(lambda s: loglik(0.0, s), s_lo, s_hi, xtol=xtol)
        return ScaleEstimate(0.0, s, False, ll)

    sep = separation_interval(z, lower, upper)
    if sep is not None:
        lo, hi = sep
        psi = 0.5 * (lo + hi) if math.isfinite(hi) else lo
        return ScaleEstimate(psi, 0.0, True, 0.0, 0, True)

    p_hi = 10.0 * max(spread, init_sigma) / zscale
    best = (loglik(0.0, init_sigma), 0.0, float(init_sigma))
    for p in np.linspace(0.0, p_hi, grid):
        for s in np.linspace(s_lo + (s_hi - s_lo) / grid, s_hi, grid):
            v = loglik(p, s)
            if v > best[0]:
                best = (v, float(p), float(s))
    ll, psi, sigma = best

    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = ll
        p_new, v = golden_section_max(lambda p: loglik(p, sigma), 0.0, p_hi, xtol=xtol)
        if v > ll:
            psi, ll = p_new, v
        s_new, v = golden_section_max(lambda s: loglik(psi, s), s_lo, s_hi, xtol=xtol)
        if v > ll:
            sigma, ll = s_new, v
        if ll - start < tol:
            converged = True
            break
    return ScaleEstimate(psi, sigma, converged, ll, sweeps)


def prop1_exponent(t1, psi_star):
    """c = 2 * (phi'(t1 / psi*))^2 with phi'(x) = -x phi(x)."""
    x = t1 / psi_star
    return 2.0 * (x * normal_pdf(x)) ** 2


def prop1_tail_bound(t1, psi_star, m, eps):
    """Failure probability 2 exp(-c m eps^2) for the 2-bit closed-form MLE."""
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    if not psi_star > 0:
        raise DomainError("psi_star must be positive")
    return 2.0 * math.exp(-prop1_exponent(t1, psi_star) * m * eps * eps)


def prop1_epsilon(t1, psi_star, m, level):
    """Relative deviation eps at which the tail bound equals ``level``."""
    return math.sqrt(math.log(2.0 / level) / (prop1_exponent(t1, psi_star) * m))


def combine_direction_scale(x_hat, psi_hat):
    """Full-signal estimate psi_hat * x_hat."""
    if psi_hat < 0:
        raise DomainError("psi_hat must be nonnegative")
    x = np.asarray(getattr(x_hat, "x_hat", x_hat), dtype=float)
    return psi_hat * x
