"""Post-quantization bin-flip channels and bit-depth trade-off reports."""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .noise import ADDITIVE, ADVERSARIAL_FLIP, FLIP_KINDS, RANDOM_FLIP, NoiseModel
from .quantizer import SQRT_2_OVER_PI, channel_constants, lloyd_max_design

__all__ = [
    "TradeoffRow",
    "BreakdownRow",
    "codeword_index",
    "apply_bin_flips",
    "breakdown_point",
    "breakdown_table",
    "flip_omega_curve",
    "tradeoff_table",
    "format_tradeoff",
    "tradeoff_csv",
    "format_breakdown",
    "breakdown_csv",
]


@dataclass(frozen=True)
class TradeoffRow:
    mechanism: str
    param: float
    b: int
    b_prime: int
    ratio: float
    required: float
    verdict: str


@dataclass(frozen=True)
class BreakdownRow:
    mechanism: str
    b: int
    breakdown: float


def codeword_index(y, q, rtol=1e-12):
    """Index of each entry of ``y`` in ``q.codebook`` (increasing order).

    Raises :class:`DomainError` if an entry is not one of the 2**b levels.
    """
    y = np.asarray(y, dtype=float)
    book = q.codebook
    idx = np.clip(np.searchsorted(book, y), 0, book.size - 1)
    lower = np.clip(idx - 1, 0, book.size - 1)
    closer = np.abs(book[lower] - y) < np.abs(book[idx] - y)
    idx = np.where(closer, lower, idx)
    bad = np.abs(book[idx] - y) > rtol * np.abs(book[idx])
    if np.any(bad):
        raise DomainError("value %r is not a level of the quantizer" % (y[bad][0],))
    return idx


def apply_bin_flips(y, q, model, stream):
    """Corrupt quantized observations by one of the flip mechanisms.

    Each entry is flipped independently with probability ``model.param``.
    Random flips move to one of the other 2**b - 1 codewords chosen
    uniformly; adversarial flips send ``s * mu_k`` to ``-s * mu_K``.
    Draw order: one uniform per entry for the flip decision, then one uniform
    per flipped entry (in entry order) for the random-flip target.
    """
    if model.kind not in FLIP_KINDS:
        raise DomainError("apply_bin_flips needs a flip noise model")
    y = np.asarray(y, dtype=float)
    idx = codeword_index(y, q)
    book = q.codebook
    n_code = book.size
    flip = stream.uniform(size=y.shape) < model.param
    out = y.copy()
    if not np.any(flip):
        return out
    if model.kind == RANDOM_FLIP:
        r = np.floor(stream.uniform(size=int(flip.sum())) * (n_code - 1)).astype(int)
        r = np.minimum(r, n_code - 2)
        src = idx[flip]
        target = np.where(r < src, r, r + 1)
        out[flip] = book[target]
    else:
        out[flip] = -np.sign(y[flip]) * q.levels[-1]
    return out


def breakdown_point(q, mechanism):
    """Smallest flip probability at which lambda stops being positive."""
    if mechanism == RANDOM_FLIP:
        return 1.0 - 0.5 ** q.bits
    if mechanism == ADVERSARIAL_FLIP:
        lam0 = channel_constants(q).lam
        return lam0 / (lam0 + q.levels[-1] * SQRT_2_OVER_PI)
    raise DomainError("breakdown point is defined for flip mechanisms only")


def breakdown_table(bit_depths, mechanisms=FLIP_KINDS):
    rows = []
    for mech in mechanisms:
        for b in bit_depths:
            rows.append(BreakdownRow(mech, int(b), breakdown_point(lloyd_max_design(b), mech)))
    return rows


def flip_omega_curve(b, mechanism, ps):
    """Psi/lambda of the clean Lloyd-Max quantizer across flip probabilities."""
    q = lloyd_max_design(b)
    return np.array([channel_constants(q, NoiseModel(mechanism, p)).omega for p in ps])


def _design_for(b, model):
    # additive: optimum for N(0, 1 + sigma^2); flips: clean-channel optimum
    if model.kind == ADDITIVE:
        return lloyd_max_design(b, math.sqrt(1.0 + model.param ** 2))
    return lloyd_max_design(b)


def _ratio(om_b, om_bp):
    if math.isinf(om_b) and math.isinf(om_bp):
        return math.nan
    if math.isinf(om_bp):
        return 0.0
    return om_b / om_bp


def tradeoff_table(bit_depths, model):
    """Table rows comparing consecutive bit depths under ``model``.

    ``b_prime`` beats ``b`` at a fixed bit budget when the error-constant
    ratio Omega_b / Omega_b' exceeds sqrt(b' / b). Past a breakdown point the
    ratio is ``inf`` (b has broken down) or ``0`` (b' has); ``nan`` when both.
    """
    bits = [int(b) for b in bit_depths]
    if not bits or any(b < 1 for b in bits):
        raise DomainError("bit depths must be >= 1")
    if len(set(bits)) != len(bits):
        raise DomainError("bit depths must be distinct")
    omegas = {b: channel_constants(_design_for(b, model), model).omega for b in bits}
    rows = []
    for b, bp in zip(bits[:-1], bits[1:]):
        ratio = _ratio(omegas[b], omegas[bp])
        required = math.sqrt(bp / b)
        if ratio != ratio:
            verdict = "neither"
        elif ratio > required:
            verdict = "b=%d wins" % bp
        else:
            verdict = "b=%d wins" % b
        rows.append(TradeoffRow(model.kind, model.param, b, bp, ratio, required, verdict))
    return rows


def format_tradeoff(rows):
    lines = ["%-17s %6s %3s %3s %9s %9s  %s" % (
        "mechanism", "param", "b", "b'", "ratio", "required", "verdict")]
    for r in rows:
        lines.append("%-17s %6.3f %3d %3d %9.4f %9.4f  %s" % (
            r.mechanism, r.param, r.b, r.b_prime, r.ratio, r.required, r.verdict))
    return "\n".join(lines)


def tradeoff_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mechanism", "b", "b_prime", "ratio", "required", "verdict"])
    for r in rows:
        w.writerow([r.mechanism, r.b, r.b_prime, "%.12g" % r.ratio, "%.12g" % r.required, r.verdict])
    return buf.getvalue()


def _fraction(p, b):
    denom = 2 ** b
    num = round(p * denom)
    if abs(num / denom - p) < 1e-12:
        return "%d/%d" % (num, denom)
    return ""


def format_breakdown(rows):
    lines = ["%-17s %3s %10s %7s %8s" % ("mechanism", "b", "breakdown", "rounded", "exact")]
    for r in rows:
        lines.append("%-17s %3d %10.6f %7.2f %8s" % (
            r.mechanism, r.b, r.breakdown, r.breakdown, _fraction(r.breakdown, r.b)))
    return "\n".join(lines)


def breakdown_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mechanism", "b", "breakdown"])
    for r in rows:
        w.writerow([r.mechanism, r.b, "%.12g" % r.breakdown])
    return buf.getvalue()
