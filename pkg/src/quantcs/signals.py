"""Structured signal classes, ground-truth samplers and design-size formulas.

Five classes are supported: s-sparse vectors, piecewise-constant vectors with
at most s breakpoints (fused sparsity), group-sparse vectors, rank-s matrices
(vectorized row-major) and the l1/l2 ball intersection. All logs are natural.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .stats import truncated_svd

__all__ = [
    "Sparse",
    "FusedSparse",
    "GroupSparse",
    "LowRank",
    "L1Ball",
    "GroundTruthSignal",
    "signal_class_from_dict",
    "sample_signal",
    "width_bound",
    "measurement_count",
    "design_dimensions",
    "fused_blocks",
    "signal_to_csv",
    "signal_from_csv",
]


def _check_int(name, v, lo, hi=None):
    if int(v) != v or v < lo or (hi is not None and v > hi):
        bound = "[%d, %s]" % (lo, "inf" if hi is None else hi)
        raise DomainError("%s=%r outside %s" % (name, v, bound))


@dataclass(frozen=True)
class Sparse:
    s: int
    n: int
    kind = "sparse"
    is_cone = True

    def __post_init__(self):
        _check_int("n", self.n, 1)
        _check_int("s", self.s, 1, self.n)

    @property
    def dim(self):
        return self.n

    def contains(self, x, tol=1e-12):
        return int(np.sum(np.abs(x) > tol)) <= self.s

    def to_dict(self):
        return {"kind": self.kind, "s": self.s, "n": self.n}


@dataclass(frozen=True)
class FusedSparse:
    """Piecewise-constant vectors with at most ``s`` jumps."""

    s: int
    n: int
    kind = "fused"
    is_cone = True

    def __post_init__(self):
        _check_int("n", self.n, 2)
        _check_int("s", self.s, 1, self.n - 1)

    @property
    def dim(self):
        return self.n

    def contains(self, x, tol=1e-12):
        return int(np.sum(np.abs(np.diff(x)) > tol)) <= self.s

    def to_dict(self):
        return {"kind": self.kind, "s": self.s, "n": self.n}


@dataclass(frozen=True)
class GroupSparse:
    """At most ``s`` active groups of a fixed partition of range(n)."""

    groups: tuple
    s: int
    kind = "group"
    is_cone = True

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        flat = sorted(i for g in groups for i in g)
        if not groups or any(len(g) == 0 for g in groups):
            raise DomainError("groups must be nonempty")
        if flat != list(range(len(flat))):
            raise DomainError("groups must partition range(n) disjointly")
        object.__setattr__(self, "groups", groups)
        _check_int("s", self.s, 1, len(groups))

    @classmethod
    def equal(cls, n, L, s):
        """Partition range(n) into L contiguous groups; the last takes the remainder."""
        _check_int("L", L, 1, n)
        size = n // L
        bounds = [k * size for k in range(L)] + [n]
        return cls(tuple(tuple(range(bounds[k], bounds[k + 1])) for k in range(L)), s)

    @property
    def n(self):
        return sum(len(g) for g in self.groups)

    @property
    def L(self):
        return len(self.groups)

    @property
    def dim(self):
        return self.n

    def contains(self, x, tol=1e-12):
        active = sum(1 for g in self.groups if np.any(np.abs(x[list(g)]) > tol))
        return active <= self.s

    def to_dict(self):
        if self == GroupSparse.equal(self.n, self.L, self.s):
            return {"kind": self.kind, "n": self.n, "L": self.L, "s": self.s}
        return {"kind": self.kind, "groups": [list(g) for g in self.groups], "s": self.s}


@dataclass(frozen=True)
class LowRank:
    """n1 x n2 matrices of rank at most ``s``, flattened row-major."""

    n1: int
    n2: int
    s: int
    kind = "lowrank"
    is_cone = True

    def __post_init__(self):
        _check_int("n1", self.n1, 1)
        _check_int("n2", self.n2, 1)
        _check_int("s", self.s, 1, min(self.n1, self.n2))

    @property
    def dim(self):
        return self.n1 * self.n2

    def contains(self, x, tol=1e-8):
        sv = np.linalg.svd(np.reshape(x, (self.n1, self.n2)), compute_uv=False)
        return int(np.sum(sv > tol * max(sv[0], 1e-300))) <= self.s

    def to_dict(self):
        return {"kind": self.kind, "n1": self.n1, "n2": self.n2, "s": self.s}


@dataclass(frozen=True)
class L1Ball:
    """The set {x : ||x||_1 <= radius, ||x||_2 <= 1}.

    ``s`` is the sparsity assumed of the truth; it enters the width bound and
    the sampler. When omitted it defaults to floor(radius**2), the largest
    support on which every unit vector fits inside the l1 ball.
    """

    radius: float
    n: int
    s: int = field(default=None)
    kind = "l1ball"
    is_cone = False

    def __post_init__(self):
        _check_int("n", self.n, 1)
        if not self.radius >= 1:
            raise DomainError("radius must be >= 1 (the l1 norm of any unit vector)")
        s = self.s
        if s is None:
            s = max(1, min(self.n, int(math.floor(self.radius ** 2 + 1e-12))))
        _check_int("s", s, 1, self.n)
        object.__setattr__(self, "s", int(s))

    @property
    def dim(self):
        return self.n

    def contains(self, x, tol=1e-9):
        return float(np.sum(np.abs(x))) <= self.radius * (1 + tol) and float(np.linalg.norm(x)) <= 1 + tol

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius, "n": self.n, "s": self.s}


def signal_class_from_dict(d):
    """Inverse of ``cls.to_dict()``; also accepts plain JSON config objects."""
    d = dict(d)
    kind = d.pop("kind")
    if kind == "sparse":
        return Sparse(int(d["s"]), int(d["n"]))
    if kind == "fused":
        return FusedSparse(int(d["s"]), int(d["n"]))
    if kind == "group":
        if "groups" in d:
            return GroupSparse(tuple(tuple(g) for g in d["groups"]), int(d["s"]))
        return GroupSparse.equal(int(d["n"]), int(d["L"]), int(d["s"]))
    if kind == "lowrank":
        return LowRank(int(d["n1"]), int(d["n2"]), int(d["s"]))
    if kind == "l1ball":
        s = d.get("s")
        return L1Ball(float(d["radius"]), int(d["n"]), None if s is None else int(s))
    raise DomainError("unknown signal class %r" % (kind,))


@dataclass(frozen=True)
class GroundTruthSignal:
    x_star: np.ndarray
    signal_class: object
    norm: float

    @property
    def direction(self):
        return self.x_star / self.norm

    def with_norm(self, psi):
        """Same direction rescaled to 2-norm ``psi``."""
        if not psi > 0:
            raise DomainError("norm must be positive")
        return GroundTruthSignal(self.direction * psi, self.signal_class, float(psi))


def fused_blocks(n, n_blocks):
    """Boundaries of ``n_blocks`` equal contiguous blocks; the last absorbs any remainder."""
    size = n // n_blocks
    return [k * size for k in range(n_blocks)] + [n]


def _unit(x):
    return x / np.linalg.norm(x)


def sample_signal(signal_class, f, m, lambda_ref, stream):
    """Draw a unit-norm ground truth from ``signal_class``.

    Magnitudes are U([beta, 2*beta]) with the class-specific beta of
    :func:`design_dimensions` evaluated at the given ``m``; the vector is
    normalized afterwards. Fused signals use ``s`` equal blocks with
    alternating values +1, -1, ... .
    """
    if not f > 0:
        raise DomainError("signal strength f must be positive")
    if not lambda_ref > 0:
        raise DomainError("lambda_ref must be positive")
    if m < 1:
        raise DomainError("m must be >= 1")
    c = signal_class
    lam = float(lambda_ref)
    if isinstance(c, (Sparse, L1Ball)):
        beta = (2 * f / lam) * math.sqrt(math.log(c.n) / m) if c.n > 1 else 2 * f / lam
        support = np.sort(stream.permutation(c.n)[: c.s])
        signs = np.where(stream.uniform(size=c.s) < 0.5, -1.0, 1.0)
        mags = stream.uniform(size=c.s, low=beta, high=2 * beta)
        x = np.zeros(c.n)
        x[support] = signs * mags
    elif isinstance(c, FusedSparse):
        n_blocks = min(c.s, c.n)
        bounds = fused_blocks(c.n, n_blocks)
        x = np.empty(c.n)
        for k in range(n_blocks):
            x[bounds[k]: bounds[k + 1]] = 1.0 if k % 2 == 0 else -1.0
    elif isinstance(c, GroupSparse):
        beta = (2 * f / lam) * math.sqrt(math.log(c.L) / m) if c.L > 1 else 2 * f / lam
        x = np.zeros(c.n)
        for g in c.groups[: c.s]:
            idx = list(g)
            scale = stream.uniform(low=beta, high=2 * beta)
            x[idx] = scale * stream.normal(len(idx))
    elif isinstance(c, LowRank):
        beta = 2 * f / lam
        G = np.reshape(stream.normal(c.n1 * c.n2), (c.n1, c.n2))
        U, _, V = truncated_svd(G, c.s)
        d = stream.uniform(size=c.s, low=beta, high=2 * beta)
        x = ((U * d) @ V.T).ravel()
    else:
        raise DomainError("unsupported signal class %r" % (c,))
    return GroundTruthSignal(_unit(x), c, 1.0)


def width_bound(signal_class):
    """Closed-form upper bound on the Gaussian width of the spherical tangent cone."""
    c = signal_class
    if isinstance(c, (Sparse, FusedSparse)):
        return 3.5 * math.sqrt(2 * c.s * math.log(math.e * c.n / (2 * c.s)))
    if isinstance(c, GroupSparse):
        gmax = max(len(g) for g in c.groups)
        return 2 * math.sqrt(2 * c.s * gmax) + math.sqrt(4 * c.s * math.log(math.e * c.L / (2 * c.s)))
    if isinstance(c, LowRank):
        return math.sqrt(2 * c.s * c.n1) + math.sqrt(2 * c.s * c.n2)
    if isinstance(c, L1Ball):
        return 2 * math.sqrt(2) * 3.5 * math.sqrt(2 * c.s * math.log(math.e * c.n / (2 * c.s)))
    raise DomainError("unsupported signal class %r" % (c,))


def measurement_count(signal_class, f, lambda_ref):
    """Unrounded number of measurements (3 f / lambda_ref)^2 * complexity."""
    if not f > 0 or not lambda_ref > 0:
        raise DomainError("f and lambda_ref must be positive")
    c = signal_class
    lead = (3.0 * f / lambda_ref) ** 2
    if isinstance(c, (Sparse, FusedSparse, L1Ball)):
        return lead * c.s * math.log(c.n)
    if isinstance(c, GroupSparse):
        return lead * c.s * (c.n / c.L + math.log(c.L))
    if isinstance(c, LowRank):
        return lead * c.s * (c.n1 + c.n2)
    raise DomainError("unsupported signal class %r" % (c,))


def design_dimensions(signal_class, f, lambda_ref):
    """``(m, beta)``: nearest-integer measurement count and magnitude floor."""
    c = signal_class
    m_exact = measurement_count(c, f, lambda_ref)
    m = max(1, int(math.floor(m_exact + 0.5)))
    if isinstance(c, LowRank):
        beta = 2.0 * f / lambda_ref
    else:
        log_size = math.log(c.L) if isinstance(c, GroupSparse) else math.log(c.n)
        beta = (2.0 * f / lambda_ref) * math.sqrt(log_size / m_exact)
    return m, beta


def _class_header(c):
    return ";".join("%s=%s" % (k, v) for k, v in c.to_dict().items() if k != "groups")


def signal_to_csv(signal):
    """CSV text: a metadata comment row, a column header, one value per line."""
    c = signal.signal_class
    meta = _class_header(c)
    if isinstance(c, GroupSparse) and "groups" in c.to_dict():
        meta += ";groups=" + "|".join(" ".join(str(i) for i in g) for g in c.groups)
    buf = io.StringIO()
    buf.write("# %s;norm=%.17g\n" % (meta, signal.norm))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value"])
    for v in signal.x_star:
        w.writerow(["%.17g" % v])
    return buf.getvalue()


def signal_from_csv(text):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DomainError("signal CSV must start with a '#' metadata row")
    meta = dict(kv.split("=", 1) for kv in lines[0][1:].strip().split(";"))
    norm = float(meta.pop("norm"))
    if "groups" in meta:
        meta["groups"] = [[int(i) for i in g.split()] for g in meta["groups"].split("|")]
    for k in ("s", "n", "n1", "n2", "L"):
        if k in meta:
            meta[k] = None if meta[k] == "None" else int(meta[k])
    if "radius" in meta:
        meta["radius"] = float(meta["radius"])
    c = signal_class_from_dict(meta)
    rows = list(csv.reader(lines[1:]))
    x = np.array([float(r[0]) for r in rows[1:]])
    return GroundTruthSignal(x, c, norm)
