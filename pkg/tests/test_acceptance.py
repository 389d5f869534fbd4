"""Acceptance checks 1-10.

Each test prints one ``criterion N: PASS|FAIL`` line with the measured
quantities and asserts the stated tolerance and runtime. Seeds are fixed in
advance; see the decisions ledger for the choices made here.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate, stats

import oracles
from quantcs import quantizer as qmod
from quantcs.channels import breakdown_point
from quantcs.experiments import ExperimentConfig, rows_to_csv, run_experiment, summarize
from quantcs.noise import ADVERSARIAL_FLIP, RANDOM_FLIP, NoiseModel
from quantcs.quantizer import channel_constants, distortion, lloyd_max_design, omega_optimal, quantize
from quantcs.recovery import projected_marginal, recover_direction
from quantcs.scale import interval_bounds, prop1_epsilon, scale_mle_noiseless, scale_mle_noisy, bin_counts
from quantcs.signals import FusedSparse, GroupSparse, LowRank, Sparse
from quantcs.stats import RandomStream


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print("\ncriterion %d: %s  %s" % (n, "PASS" if ok else "FAIL", detail))
        assert ok, "criterion %d failed: %s" % (n, detail)
    return emit


def test_criterion_01_lloyd_max(report):
    qmod._lloyd_max_unit.cache_clear()
    t0 = time.perf_counter()
    q = lloyd_max_design(2, 1.0)
    d = distortion(q)
    elapsed = time.perf_counter() - t0
    # numeric-integration oracle for the distortion
    t1 = q.thresholds[0]
    oracle = 2 * sum(integrate.quad(lambda h, mu=mu: (h - mu) ** 2 * stats.norm.pdf(h), a, b)[0]
                     for mu, a, b in zip(q.levels, (0.0, t1), (t1, np.inf)))
    ok = (abs(t1 - 0.98163) <= 1e-3
          and abs(q.levels[0] - 0.45278) <= 1e-3 and abs(q.levels[1] - 1.51040) <= 1e-3
          and abs(d - 0.11755) <= 5e-4 and abs(d - oracle) <= 1e-9 and elapsed < 1.0)
    report(1, ok, "t1=%.6f mu=(%.6f, %.6f) D=%.6f quad=%.6f time=%.3fs"
           % (t1, q.levels[0], q.levels[1], d, oracle, elapsed))


def test_criterion_02_table1(report):
    t0 = time.perf_counter()
    ratios = {}
    for sigma in (0.0, 1.0, 2.0):
        om = [omega_optimal(b, sigma) for b in (1, 2, 3, 4)]
        ratios[sigma] = [om[0] / om[1], om[1] / om[2], om[2] / om[3]]
    elapsed = time.perf_counter() - t0
    want = [1.178, 1.046, 1.013]
    r0 = ratios[0.0]
    close = all(abs(r - w) <= 2e-3 for r, w in zip(r0, want))
    invariant = all(abs(ratios[s][i] - r0[i]) <= 1e-9 for s in (1.0, 2.0) for i in range(3))
    report(2, close and invariant and elapsed < 1.0,
           "ratios=%s sigma-spread=%.1e time=%.3fs"
           % (", ".join("%.4f" % r for r in r0),
              max(abs(ratios[s][i] - r0[i]) for s in (1.0, 2.0) for i in range(3)), elapsed))


def test_criterion_03_table2(report):
    t0 = time.perf_counter()
    rnd = [breakdown_point(lloyd_max_design(b), RANDOM_FLIP) for b in (1, 2, 3, 4)]
    adv = [breakdown_point(lloyd_max_design(b), ADVERSARIAL_FLIP) for b in (1, 2, 3, 4)]
    elapsed = time.perf_counter() - t0
    exact = rnd == [1 / 2, 3 / 4, 7 / 8, 15 / 16]
    near = all(abs(a - w) <= 5e-3 for a, w in zip(adv, (0.50, 0.4225, 0.36, 0.31)))
    report(3, exact and near and elapsed < 1.0,
           "random=%s adversarial=%s time=%.3fs"
           % (rnd, ", ".join("%.4f" % a for a in adv), elapsed))


def test_criterion_04_linearity(report):
    n, m, reps = 10, 5000, 200
    x = np.linspace(-1.0, 1.0, n) + 0.3
    x /= np.linalg.norm(x)
    t0 = time.perf_counter()
    worst, ok = 0.0, True
    for b in (1, 2):
        q = lloyd_max_design(b)
        for sigma in (0.0, 1.0):
            lam = channel_constants(q, NoiseModel.additive(sigma)).lam
            stream = RandomStream(4000 + 10 * b + int(sigma))
            etas = np.empty((reps, n))
            for r in range(reps):
                A = stream.normal(m * n).reshape(m, n)
                y = quantize(q, A @ x + sigma * stream.normal(m))
                etas[r] = A.T @ y / m
            se = etas.std(axis=0, ddof=1) / math.sqrt(reps)
            z = np.abs(etas.mean(axis=0) - lam * x) / se
            worst = max(worst, float(z.max()))
            ok &= bool(np.all(z <= 3.0))
    elapsed = time.perf_counter() - t0
    report(4, ok and elapsed < 30, "max |mean - lambda x|/SE = %.2f (limit 3) time=%.1fs" % (worst, elapsed))


def test_criterion_05_asymptotic_variance(report):
    n, m, reps = 10, 100_000, 500
    # three equal nonzero coordinates; the seven zero coordinates share the
    # limiting variance Psi^2 / lambda^2 and are pooled
    x = np.zeros(n)
    x[:3] = 1 / math.sqrt(3)
    zero = slice(3, n)
    cases = [(b, s) for b in (1, 2) for s in (0.0, 1.0)]
    quant = {b: lloyd_max_design(b) for b in (1, 2)}
    dev = {c: np.empty((reps, n)) for c in cases}
    stream = RandomStream(5005)
    t0 = time.perf_counter()
    for r in range(reps):
        A = stream.normal(m * n).reshape(m, n)
        z = A @ x
        eps = stream.normal(m)
        for b, s in cases:
            y = quantize(quant[b], z + s * eps)
            eta = A.T @ y / m
            dev[(b, s)][r] = math.sqrt(m) * (eta / np.linalg.norm(eta) - x)
    elapsed = time.perf_counter() - t0
    parts, ok = [], True
    for b, s in cases:
        c = channel_constants(quant[b], NoiseModel.additive(s))
        target = (c.psi / c.lam) ** 2
        var = float(np.mean(dev[(b, s)][:, zero].var(axis=0, ddof=1)))
        rel = var / target - 1
        ok &= abs(rel) <= 0.10
        parts.append("b=%d s=%g var=%.4f target=%.4f (%+.1f%%)" % (b, s, var, target, 100 * rel))
    report(5, ok and elapsed < 300, "; ".join(parts) + " time=%.1fs" % elapsed)


def test_criterion_06_tradeoff_experiment(report):
    config = ExperimentConfig(signal={"class": "sparse", "n": 500}, s=[10], f=[4.0], bits=[1, 2],
                              noise="additive", noise_params=[1.0], replicates=100, seed=2024)
    t0 = time.perf_counter()
    eq_m = {c["b"]: c for c in summarize(run_experiment(config))}
    eq_bits = {c["b"]: c for c in summarize(run_experiment(replace(config, m_mode="equal_bits")))}
    elapsed = time.perf_counter() - t0
    ratio = eq_m[1]["mean_error"] / eq_m[2]["mean_error"]
    budget_ok = eq_bits[1]["mean_error"] < eq_bits[2]["mean_error"]
    ok = abs(ratio - 1.178) <= 0.08 and budget_ok and eq_bits[1]["m"] == 2 * eq_bits[2]["m"] and elapsed < 600
    report(6, ok, "equal m=%d ratio=%.4f; equal bits err(b=1, m=%d)=%.5f err(b=2, m=%d)=%.5f time=%.1fs"
           % (eq_m[1]["m"], ratio, eq_bits[1]["m"], eq_bits[1]["mean_error"],
              eq_bits[2]["m"], eq_bits[2]["mean_error"], elapsed))


def test_criterion_07_projection_oracles(report):
    rng = np.random.default_rng(7007)
    t0 = time.perf_counter()
    worst, dominated = 0.0, True
    for _ in range(500):
        n = int(rng.integers(2, 13))
        eta = rng.standard_normal(n)
        s = int(rng.integers(1, n))
        L = int(rng.integers(1, n + 1))
        groups = tuple(tuple(int(i) for i in g) for g in np.array_split(rng.permutation(n), L))
        gs = int(rng.integers(1, L + 1))
        checks = [
            (recover_direction(eta, Sparse(s, n)), oracles.sparse_value(eta, s)),
            (recover_direction(eta, FusedSparse(s, n)), oracles.fused_value(eta, s)),
            (recover_direction(eta, GroupSparse(groups, gs)), oracles.group_value(eta, groups, gs)),
        ]
        for est, val in checks:
            worst = max(worst, abs(float(eta @ est.x_hat) - val))
        n1 = int(rng.integers(1, 5))
        n2 = int(rng.integers(1, 12 // n1 + 1))  # n1 * n2 <= 12
        r = int(rng.integers(1, min(n1, n2) + 1))
        e2 = rng.standard_normal(n1 * n2)
        best = float(e2 @ recover_direction(e2, LowRank(n1, n2, r)).x_hat)
        for _ in range(100):
            dominated &= bool(e2 @ oracles.random_lowrank_unit(rng, n1, n2, r) <= best + 1e-12)
    elapsed = time.perf_counter() - t0
    report(7, worst <= 1e-12 and dominated and elapsed < 60,
           "max objective gap=%.1e lowrank dominance=%s time=%.1fs" % (worst, dominated, elapsed))


def test_criterion_08_cone_equivalence(report):
    rng = np.random.default_rng(8008)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(200):
        kind = i % 4
        if kind == 0:
            n = int(rng.integers(2, 30))
            c = Sparse(int(rng.integers(1, n + 1)), n)
        elif kind == 1:
            n = int(rng.integers(2, 30))
            c = FusedSparse(int(rng.integers(1, n)), n)
        elif kind == 2:
            n = int(rng.integers(2, 30))
            L = int(rng.integers(1, n + 1))
            c = GroupSparse.equal(n, L, int(rng.integers(1, L + 1)))
        else:
            n1, n2 = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            c = LowRank(n1, n2, int(rng.integers(1, min(n1, n2) + 1)))
        eta = rng.standard_normal(c.dim)
        p = projected_marginal(eta, c, float(rng.uniform(0.05, 3.0)))
        worst = max(worst, float(np.max(np.abs(p / np.linalg.norm(p) - recover_direction(eta, c).x_hat))))
    elapsed = time.perf_counter() - t0
    report(8, worst <= 1e-12 and elapsed < 10, "max deviation=%.1e time=%.2fs" % (worst, elapsed))


def test_criterion_09_scale_mle(report):
    m, reps = 10_000, 200
    q = lloyd_max_design(2)
    q = q.scaled(1.0 / q.thresholds[0])  # t1 = psi* = 1
    stream = RandomStream(9009)
    t0 = time.perf_counter()
    dev = np.empty(reps)
    for r in range(reps):
        y = quantize(q, stream.normal(m))
        dev[r] = abs(scale_mle_noiseless(bin_counts(y, q), q).psi_hat - 1.0)
    p95 = float(np.quantile(dev, 0.95))
    eps = prop1_epsilon(1.0, 1.0, m, 0.05)
    q2 = lloyd_max_design(2)
    z = stream.normal(m)
    y = quantize(q2, z + stream.normal(m))
    est = scale_mle_noisy(z, interval_bounds(y, q2), 1.0)
    elapsed = time.perf_counter() - t0
    ok = (p95 <= 1.2 * eps and abs(est.psi_hat - 1) <= 0.05 and abs(est.sigma_hat - 1) <= 0.10
          and elapsed < 120)
    report(9, ok, "p95|psi-1|=%.4f bound eps=%.4f (x1.2=%.4f); noisy psi=%.4f sigma=%.4f time=%.1fs"
           % (p95, eps, 1.2 * eps, est.psi_hat, est.sigma_hat, elapsed))


def test_criterion_10_determinism(report):
    configs = [
        ExperimentConfig(signal={"class": "sparse", "n": 80}, s=[3, 5], f=[1.0, 2.0], bits=[1, 2, 3],
                         noise="additive", noise_params=[0.0, 1.0], replicates=3, seed=10,
                         estimate_scale=True),
        ExperimentConfig(signal={"class": "group", "n": 60, "L": 12}, s=[2], f=[1.0], bits=[1, 2],
                         noise="random_flip", noise_params=[0.1, 0.6], replicates=4, seed=11),
        ExperimentConfig(signal={"class": "fused", "n": 50}, s=[2], f=[1.5], bits=[1, 2],
                         noise="adversarial_flip", noise_params=[0.2, 0.55], replicates=4, seed=12,
                         m_mode="equal_bits"),
    ]
    t0 = time.perf_counter()
    same = True
    for c in configs:
        ref = rows_to_csv(run_experiment(c)).encode()
        for workers in (1, 2, 4):
            same &= rows_to_csv(run_experiment(replace(c, workers=workers))).encode() == ref
    elapsed = time.perf_counter() - t0
    report(10, same, "3 configs x workers {1, 1, 2, 4} byte-identical=%s time=%.1fs" % (same, elapsed))
