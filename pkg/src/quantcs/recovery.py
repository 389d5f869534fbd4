"""Quantized Gaussian measurements and the canonical linear estimator.

The estimator forms the marginal statistic ``eta = A.T @ y / m`` and then
maximizes ``<eta, x>`` over the signal class intersected with the unit
ball. Each class has an exact combinatorial or spectral solution.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DomainError
from .quantizer import Quantizer, quantize
from .signals import FusedSparse, GroupSparse, L1Ball, LowRank, Sparse
from .stats import truncated_svd

__all__ = [
    "MeasurementSet",
    "DirectionEstimate",
    "symmetric_sqrt",
    "simulate_measurements",
    "marginal_statistic",
    "recover_direction",
    "recover_direction_anisotropic",
    "projected_marginal",
    "fused_partition",
    "l2_error",
    "export_measurements",
    "import_measurements",
]


@dataclass(frozen=True)
class MeasurementSet:
    """Design matrix, quantized observations and the ensemble they came from.

    ``cov`` is ``None`` for the isotropic ensemble; otherwise rows of ``A``
    are N(0, cov) and ``cov_sqrt`` is its symmetric square root.
    """

    A: np.ndarray
    y: np.ndarray
    quantizer: Quantizer
    cov: np.ndarray = None
    cov_sqrt: np.ndarray = None

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def isotropic(self):
        return self.cov is None


@dataclass(frozen=True)
class DirectionEstimate:
    """Unit-norm maximizer, or the zero vector with ``degenerate`` set."""

    x_hat: np.ndarray
    degenerate: bool = False


def symmetric_sqrt(cov):
    """Symmetric positive definite square root of a covariance matrix."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DomainError("covariance must be square")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12):
        raise DomainError("covariance must be symmetric")
    w, V = np.linalg.eigh(cov)
    if w[0] <= 0:
        raise DomainError("covariance is not positive definite (min eigenvalue %g)" % w[0])
    return (V * np.sqrt(w)) @ V.T


def draw_design(stream, m, n, cov_sqrt=None):
    A = np.reshape(stream.normal(m * n), (m, n))
    if cov_sqrt is not None:
        A = A @ cov_sqrt
    return A


def simulate_measurements(signal, m, sigma, q, stream, cov=None):
    """Draw ``A`` and observe ``y_i = Q(<a_i, x*> + sigma * eps_i)``.

    ``A`` is drawn first (row-major), then the noise vector. With ``cov``
    given, rows are multiplied by the symmetric square root of ``cov``.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    x = np.asarray(getattr(signal, "x_star", signal), dtype=float)
    cov_sqrt = None
    if cov is not None:
        cov = np.asarray(cov, dtype=float)
        cov_sqrt = symmetric_sqrt(cov)
    A = draw_design(stream, int(m), x.size, cov_sqrt)
    eps = stream.normal(int(m))
    y = quantize(q, A @ x + sigma * eps)
    return MeasurementSet(A, np.atleast_1d(y), q, cov, cov_sqrt)


def marginal_statistic(ms):
    return ms.A.T @ ms.y / ms.m


def _top_k(scores, k):
    # ties keep the lower index
    return np.sort(np.argsort(-scores, kind="stable")[:k])


def fused_partition(eta, max_breaks):
    """Best split of ``eta`` into at most ``max_breaks + 1`` contiguous blocks.

    Maximizes sum over blocks of (block sum)^2 / (block length) by dynamic
    programming in O(n^2 s). Returns the block boundaries ``[0, ..., n]``.
    """
    eta = np.asarray(eta, dtype=float)
    n = eta.size
    n_blocks = min(max_breaks + 1, n)
    P = np.concatenate([[0.0], np.cumsum(eta)])
    idx = np.arange(n + 1)
    best = np.full(n + 1, -np.inf)
    best[1:] = P[1:] ** 2 / idx[1:]
    arg = [np.zeros(n + 1, dtype=int)]
    for _ in range(1, n_blocks):
        new = best.copy()
        choice = np.full(n + 1, -1, dtype=int)
        for i in range(2, n + 1):
            j = idx[1:i]
            cand = best[j] + (P[i] - P[j]) ** 2 / (i - j)
            k = int(np.argmax(cand))
            if cand[k] > new[i]:
                new[i] = cand[k]
                choice[i] = j[k]
        best = new
        arg.append(choice)
    bounds = [n]
    i, level = n, len(arg) - 1
    while level > 0:
        j = arg[level][i]
        if j >= 0:
            bounds.append(j)
            i = j
        level -= 1
    bounds.append(0)
    return sorted(set(bounds))


def _block_means(eta, bounds):
    x = np.empty_like(eta)
    for a, b in zip(bounds[:-1], bounds[1:]):
        x[a:b] = eta[a:b].mean()
    return x


def _l1_ball_direction(eta, radius, tol=1e-10, max_iter=200):
    def direction(theta):
        v = np.sign(eta) * np.maximum(np.abs(eta) - theta, 0.0)
        return v / np.linalg.norm(v)

    x = eta / np.linalg.norm(eta)
    if np.sum(np.abs(x)) <= radius:
        return x
    lo, hi = 0.0, float(np.max(np.abs(eta)))
    # fallback when several entries tie for the maximum and no theta is feasible
    ties = np.abs(eta) == hi
    x_hi = np.where(ties, np.sign(eta), 0.0) * radius / np.sum(ties)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        xm = direction(mid)
        l1 = np.sum(np.abs(xm))
        if l1 > radius:
            lo = mid
        else:
            hi, x_hi = mid, xm
            if radius - l1 <= tol * radius:
                break
    return x_hi


def _direction_raw(eta, c):
    if isinstance(c, Sparse):
        x = np.zeros_like(eta)
        S = _top_k(np.abs(eta), c.s)
        x[S] = eta[S]
        return x
    if isinstance(c, GroupSparse):
        norms = np.array([np.linalg.norm(eta[list(g)]) for g in c.groups])
        x = np.zeros_like(eta)
        for ell in _top_k(norms, c.s):
            g = list(c.groups[ell])
            x[g] = eta[g]
        return x
    if isinstance(c, FusedSparse):
        return _block_means(eta, fused_partition(eta, c.s))
    if isinstance(c, LowRank):
        U, s, V = truncated_svd(np.reshape(eta, (c.n1, c.n2)), c.s)
        return ((U * s) @ V.T).ravel()
    raise DomainError("unsupported signal class %r" % (c,))


def _check_dim(eta, c):
    eta = np.asarray(eta, dtype=float).ravel()
    if eta.size != c.dim:
        raise DomainError("eta has length %d, class needs %d" % (eta.size, c.dim))
    return eta


def recover_direction(eta, signal_class):
    """Exact maximizer of ``<eta, x>`` over the class intersected with the unit ball."""
    c = signal_class
    eta = _check_dim(eta, c)
    if not np.any(eta):
        return DirectionEstimate(np.zeros_like(eta), degenerate=True)
    if isinstance(c, L1Ball):
        return DirectionEstimate(_l1_ball_direction(eta, c.radius))
    x = _direction_raw(eta, c)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return DirectionEstimate(x, degenerate=True)
    return DirectionEstimate(x / nrm)


def recover_direction_anisotropic(eta, cov, signal_class):
    """Canonical estimator for N(0, cov) designs: whiten the statistic by cov^-1."""
    cov = np.asarray(cov, dtype=float)
    try:
        factor = linalg.cho_factor(cov)
    except (linalg.LinAlgError, ValueError) as exc:
        raise DomainError("covariance is not positive definite") from exc
    zeta = linalg.cho_solve(factor, np.asarray(eta, dtype=float))
    return recover_direction(zeta, signal_class)


def projected_marginal(eta, signal_class, lam):
    """Euclidean projection of ``eta`` onto ``lam * K`` divided by ``lam``.

    Defined for the cone classes only. For sparse vectors this is plain hard
    thresholding.
    """
    c = signal_class
    if not getattr(c, "is_cone", False):
        raise DomainError("projected_marginal needs a cone class, got %s" % type(c).__name__)
    if not lam > 0:
        raise DomainError("scale must be positive")
    eta = _check_dim(eta, c)
    # lam * K == K for a cone
    return _direction_raw(eta, c) / lam


def l2_error(estimate, truth):
    x = np.asarray(getattr(estimate, "x_hat", estimate), dtype=float).ravel()
    t = np.asarray(getattr(truth, "x_star", truth), dtype=float).ravel()
    if x.size != t.size:
        raise DomainError("length mismatch: %d vs %d" % (x.size, t.size))
    return float(np.linalg.norm(x - t))


def export_measurements(ms, a_path, y_path, cov_path=None):
    """Write ``A`` and ``y`` as CSV (17 significant digits).

    The ``y`` file starts with a ``# quantizer=...`` metadata line. The
    covariance, if any, goes to ``cov_path``.
    """
    np.savetxt(a_path, ms.A, delimiter=",", fmt="%.17g")
    with open(y_path, "w", newline="") as fh:
        fh.write("# quantizer=%s\n" % ms.quantizer.to_record())
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"])
        for v in ms.y:
            w.writerow(["%.17g" % v])
    if ms.cov is not None:
        if cov_path is None:
            raise DomainError("anisotropic measurement sets need a covariance path")
        np.savetxt(cov_path, ms.cov, delimiter=",", fmt="%.17g")


def import_measurements(a_path, y_path, cov_path=None):
    A = np.loadtxt(a_path, delimiter=",", ndmin=2)
    with open(y_path) as fh:
        head = fh.readline()
        if not head.startswith("# quantizer="):
            raise DomainError("%s: missing quantizer metadata line" % y_path)
        q = Quantizer.from_record(head[len("# quantizer="):])
        rows = list(csv.reader(fh))
    y = np.array([float(r[0]) for r in rows[1:]])
    if y.size != A.shape[0]:
        raise DomainError("A has %d rows but y has %d entries" % (A.shape[0], y.size))
    cov = cov_sqrt = None
    if cov_path is not None:
        cov = np.loadtxt(cov_path, delimiter=",", ndmin=2)
        cov_sqrt = symmetric_sqrt(cov)
    return MeasurementSet(A, y, q, cov, cov_sqrt)

