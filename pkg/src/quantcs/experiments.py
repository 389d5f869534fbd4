"""Reproducible Monte-Carlo experiments comparing bit depths.

A run sweeps a grid of (noise parameter, sparsity/rank s, signal strength f)
and, for every grid point and replicate, samples a ground truth, draws one
Gaussian design, observes it through each requested quantizer, recovers the
direction and optionally the scale, and records the errors.

All bit depths of one (grid point, replicate) share the same signal, design
matrix and noise draws. Their replicate stream is seeded with
``derive_seed(base_seed, grid_index, replicate)``, so results do not depend
on the number of workers.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .channels import apply_bin_flips
from .exceptions import DegenerateCountError, DomainError
from .noise import ADDITIVE, NOISE_KINDS, NoiseModel
from .quantizer import channel_constants, lloyd_max_design, quantize
from .recovery import draw_design, l2_error, recover_direction
from .scale import bin_counts, interval_bounds, scale_mle_noiseless, scale_mle_noisy
from .signals import sample_signal, signal_class_from_dict, design_dimensions
from .stats import RandomStream, derive_seed

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "reference_lambda",
    "run_experiment",
    "emit_csv",
    "rows_to_csv",
    "read_csv",
    "summarize",
    "summary_csv",
]

_CLASS_KEYS = ("class", "n", "L", "n1", "n2", "radius")


@dataclass
class ExperimentConfig:
    """Everything needed to replay an experiment.

    ``s`` and ``f`` are grids; ``signal`` holds the remaining class
    parameters (``n``, ``L``, ``n1``, ``n2``, ``radius``). ``m_mode`` is
    ``"equal_m"`` (every bit depth gets the design m) or ``"equal_bits"``
    (b-bit runs get ``m * max(bits) / b`` so bit budgets match).
    ``design_std`` picks the Lloyd-Max source: ``"unit"`` designs for
    N(0, 1), ``"matched"`` for N(0, 1 + sigma^2).
    """

    signal: dict = field(default_factory=lambda: {"class": "sparse", "n": 500})
    s: list = field(default_factory=lambda: [10])
    f: list = field(default_factory=lambda: [1.0])
    bits: list = field(default_factory=lambda: [1, 2])
    noise: str = ADDITIVE
    noise_params: list = field(default_factory=lambda: [0.0])
    replicates: int = 20
    seed: int = 0
    m_mode: str = "equal_m"
    design_std: str = "unit"
    estimate_scale: bool = False
    psi_star: float = 1.0
    workers: int = 1
    output: str = None

    def __post_init__(self):
        for name in ("s", "f", "bits", "noise_params"):
            v = getattr(self, name)
            if not isinstance(v, (list, tuple)):
                v = [v]
            if not v:
                raise DomainError("grid %r must be nonempty" % name)
            setattr(self, name, list(v))
        self.bits = [int(b) for b in self.bits]
        self.s = [int(s) for s in self.s]
        self.f = [float(f) for f in self.f]
        self.noise_params = [float(p) for p in self.noise_params]
        if self.noise not in NOISE_KINDS:
            raise DomainError("noise must be one of %s" % (NOISE_KINDS,))
        if int(self.replicates) < 1:
            raise DomainError("replicates must be >= 1")
        self.replicates = int(self.replicates)
        if self.m_mode not in ("equal_m", "equal_bits"):
            raise DomainError("m_mode must be 'equal_m' or 'equal_bits'")
        if self.design_std not in ("unit", "matched"):
            raise DomainError("design_std must be 'unit' or 'matched'")
        if "class" not in self.signal:
            raise DomainError("signal needs a 'class' entry")
        for p in self.noise_params:
            NoiseModel(self.noise, p)

    @classmethod
    def from_dict(cls, d):
        """Build from a flat JSON-style mapping (class keys sit at top level)."""
        d = dict(d)
        signal = {k: d.pop(k) for k in _CLASS_KEYS if k in d}
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DomainError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        if signal:
            d["signal"] = signal
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = asdict(self)
        d.update(d.pop("signal"))
        return d

    def signal_class(self, s):
        d = dict(self.signal)
        d["kind"] = d.pop("class")
        d["s"] = s
        return signal_class_from_dict(d)

    def grid(self):
        return [(p, s, f) for p in self.noise_params for s in self.s for f in self.f]


@dataclass
class ResultRow:
    signal_class: str
    b: int
    noise: str
    noise_param: float
    s: int
    f: float
    m: int
    replicate: int
    seed: int
    l2_error_direction: float
    l2_error_combined: float = None
    psi_hat: float = None
    sigma_hat: float = None
    flag: str = "ok"


_COLUMNS = [f.name for f in fields(ResultRow)]


def _design_quantizer(b, config, sigma):
    std = math.sqrt(1.0 + sigma * sigma) if config.design_std == "matched" else 1.0
    return lloyd_max_design(b, std)


def reference_lambda(config, noise_param):
    """lambda of the 1-bit quantizer under the configured channel."""
    model = NoiseModel(config.noise, noise_param)
    q1 = _design_quantizer(1, config, model.sigma)
    return channel_constants(q1, model).lam


def _m_for(b, m, config):
    if config.m_mode == "equal_bits":
        return int(round(m * max(config.bits) / b))
    return m


def _estimate_scale(A, x_dir, y, q):
    """Plug-in joint MLE of (psi, sigma) given an estimated direction."""
    try:
        init = scale_mle_noiseless(bin_counts(y, q), q).psi_hat
    except DegenerateCountError:
        init = 1.0
    lower, upper = interval_bounds(y, q)
    return scale_mle_noisy(A @ x_dir, (lower, upper), init)


def _run_cell(config, grid_index, replicate):
    p, s, f = config.grid()[grid_index]
    cls = config.signal_class(s)
    model = NoiseModel(config.noise, p)
    seed = derive_seed(config.seed, grid_index, replicate)
    kind = cls.to_dict()["kind"]
    lam = reference_lambda(config, p)
    base = dict(signal_class=kind, noise=config.noise, noise_param=p, s=s, f=f,
                replicate=replicate, seed=seed)
    if not lam > 0:
        return [ResultRow(b=b, m=0, l2_error_direction=math.nan, flag="beyond_breakdown", **base)
                for b in config.bits]

    m, _ = design_dimensions(cls, f, lam)
    stream = RandomStream(seed)
    truth = sample_signal(cls, f, m, lam, stream)
    x_star = truth.direction * config.psi_star
    ms = {b: _m_for(b, m, config) for b in config.bits}
    m_max = max(ms.values())
    A = draw_design(stream, m_max, x_star.size)
    eps = stream.normal(m_max)
    signal_part = A @ x_star + model.sigma * eps

    rows = []
    for b in config.bits:
        mb = ms[b]
        q = _design_quantizer(b, config, model.sigma)
        y = quantize(q, signal_part[:mb])
        if model.is_flip:
            y = apply_bin_flips(y, q, model, stream.spawn(b))
        Ab = A[:mb]
        eta = Ab.T @ y / mb
        est = recover_direction(eta, cls)
        row = ResultRow(b=b, m=mb, l2_error_direction=l2_error(est, truth.direction),
                        flag="degenerate" if est.degenerate else "ok", **base)
        if config.estimate_scale:
            if b == 1:
                row.flag = "scale_unidentifiable"
            else:
                sc = _estimate_scale(Ab, est.x_hat, y, q)
                row.psi_hat, row.sigma_hat = sc.psi_hat, sc.sigma_hat
                row.l2_error_combined = l2_error(sc.psi_hat * est.x_hat, x_star)
        rows.append(row)
    return rows


def _run_task(args):
    config, g, r = args
    return _run_cell(config, g, r)


def run_experiment(config):
    """Run every (grid point, replicate) and return rows in canonical order.

    Order: noise parameter, s, f, bit depth, replicate. The output is the
    same for any ``config.workers``.
    """
    n_grid = len(config.grid())
    tasks = [(config, g, r) for g in range(n_grid) for r in range(config.replicates)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        results = [_run_task(t) for t in tasks]
    rows = []
    for g in range(n_grid):
        cell = results[g * config.replicates:(g + 1) * config.replicates]
        for bi in range(len(config.bits)):
            rows.extend(rep[bi] for rep in cell)
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in _COLUMNS])
    return buf.getvalue()


def emit_csv(rows, path):
    """Write rows (header first) to ``path``; I/O errors name the path."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(rows_to_csv(rows))
    except OSError as exc:
        raise OSError("cannot write results to %s: %s" % (path, exc.strerror or exc)) from exc
    return path


_PARSERS = {
    "b": int, "s": int, "m": int, "replicate": int, "seed": int,
    "noise_param": float, "f": float, "l2_error_direction": float,
    "l2_error_combined": float, "psi_hat": float, "sigma_hat": float,
}


def read_csv(source):
    """Parse CSV text or a file path back into :class:`ResultRow` objects."""
    text = source
    if not ("\n" in source or "," in source) and os.path.exists(source):
        with open(source) as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        kw = {}
        for k, v in rec.items():
            if v == "" and k not in ("signal_class", "noise", "flag"):
                kw[k] = None
            else:
                kw[k] = _PARSERS.get(k, str)(v)
        rows.append(ResultRow(**kw))
    return rows


def summarize(rows):
    """Mean and standard deviation of errors per (noise param, s, f, b) cell."""
    cells = {}
    for r in rows:
        key = (r.noise, r.noise_param, r.s, r.f, r.b)
        cells.setdefault(key, []).append(r)
    out = []
    for (noise, p, s, f, b), rs in cells.items():
        err = np.array([r.l2_error_direction for r in rs], dtype=float)
        comb = np.array([r.l2_error_combined for r in rs if r.l2_error_combined is not None], dtype=float)
        out.append(dict(
            noise=noise, noise_param=p, s=s, f=f, b=b, m=rs[0].m, replicates=len(rs),
            mean_error=float(np.mean(err)),
            sd_error=float(np.std(err, ddof=1)) if len(err) > 1 else 0.0,
            mean_combined=float(np.mean(comb)) if comb.size else None,
            sd_combined=float(np.std(comb, ddof=1)) if comb.size > 1 else None,
        ))
    return out


def summary_csv(summary):
    cols = ["noise", "noise_param", "s", "f", "b", "m", "replicates",
            "mean_error", "sd_error", "mean_combined", "sd_combined"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for rec in summary:
        w.writerow([_fmt(rec[c]) for c in cols])
    return buf.getvalue()


def with_overrides(config, **overrides):
    """Copy of ``config`` with non-None overrides applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
