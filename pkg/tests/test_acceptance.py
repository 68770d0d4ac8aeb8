"""Acceptance gate: one test per criterion at its stated tolerance.

Each test records a ``PASS``/``FAIL`` line in ``RESULTS`` (printed in the
pytest terminal summary); ``python tests/test_acceptance.py`` prints the
same lines directly.
"""

from __future__ import annotations

import itertools
import math
import random
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.special import gamma

from minball.conditions import (Certificate, ConditionInput, HypothesisError, check_operator, check_theorem_A,
                                check_theorem_C, critical_c, grid_feasible, recheck_certificate, reduce_C_to_A,
                                synthesize_certificate)
from minball.fr_integrals import FRQuery, classify_asymptotics, expected_class, series_estimator
from minball.kernels import KernelParams, calibrate, cone_constant
from minball.operators import (OperatorParams, adjoint_power_constant, apply_S_adjoint, pairing_F_TstarG,
                               pairing_TF_G, power_function, ratio_probe, reproducing_check)
from minball.sampling import RngState, sample_ball_star, sample_boundary, sample_M
from minball.transfer import isometric_mass_constant, verify_intertwine, verify_isometry

RESULTS: dict[str, str] = {}


def record(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} -- {detail}"
    RESULTS[str(num)] = line
    print(line)
    assert ok, line


# ------------------------------------------------------------------ 1


def test_criterion_1_beta_identity():
    t0 = time.time()
    worst = 0.0
    for n, s in itertools.product((2, 3), (0.0, 1.0, 2.5)):
        g = np.random.default_rng(100 + 10 * n + int(2 * s))
        # polar form dm = m_n t^{2n-3} dt dmu, t uniform, evaluated at actual cone points (m_n = 1)
        t = g.uniform(0, 1, 100_000)
        z = sample_boundary(g, n, 100_000) * t[:, None]
        vals = t ** (2 * n - 3) * (1 - np.sum(np.abs(z) ** 2, 1)) ** s
        exact = 0.5 * gamma(n - 1) * gamma(s + 1) / gamma(n + s)
        worst = max(worst, abs(vals.mean() / exact - 1))
    dt = time.time() - t0
    record(1, "beta identity", worst < 0.02 and dt < 10, f"max rel err {worst:.4f} (< 0.02), {dt:.1f}s (< 10s)")


# ------------------------------------------------------------------ 2


def test_criterion_2_mu_invariance():
    worst = 0.0
    for n in (2, 3):
        g = np.random.default_rng(200 + n)
        xi = sample_boundary(g, n, 100_000)
        z = 0.8 * sample_boundary(g, n, 1)[0]
        x = xi @ np.conj(z)
        for k in (1, 2):
            v = x**k
            se = math.hypot(v.real.std(ddof=1), v.imag.std(ddof=1)) / math.sqrt(len(v))
            worst = max(worst, abs(v.mean()) / se)
    record(2, "mu invariance", worst < 3, f"max |mean|/stderr {worst:.2f} (< 3)")


# ------------------------------------------------------------------ 3


def test_criterion_3_forelli_rudin():
    t0 = time.time()
    wrong, cells = [], 0
    for c, s, d, n in itertools.product((-1, -0.5, 0, 0.5, 1, 2), (0, 1), (0, 1), (2, 3)):
        for which in ("I", "J"):
            q = FRQuery(c, s, d, n=n)
            cells += 1
            if classify_asymptotics(q, series_estimator(q, which)).label != expected_class(c):
                wrong.append((which, c, s, d, n))
    dt = time.time() - t0
    record(3, "Forelli-Rudin classification", not wrong and dt < 300,
           f"{len(wrong)} misclassified of {cells} (48 cells x I, J), {dt:.1f}s")


# ------------------------------------------------------------------ 4


def test_criterion_4_reproducing():
    worst, bad = 0.0, 0
    for domain, s in itertools.product(("M", "ball"), (0.0, 1.0)):
        rows = reproducing_check(domain, 2, s, 100_000, seed=42, eval_count=20)
        worst = max(worst, max(r["sigmas"] for r in rows))
        bad += sum(r["sigmas"] >= 3 for r in rows)
    record(4, "reproducing property", bad == 0,
           f"max {worst:.2f} sigma over 4 functions x 20 points x 4 settings; {bad} at >= 3 sigma")


# ------------------------------------------------------------------ 5


def _random_tuple(rng: random.Random) -> ConditionInput:
    rf = lambda lo, hi, den=12: F(rng.randint(int(lo * den), int(hi * den)), den)
    n = rng.choice([2, 3])
    p = 1 + rf(1 / 12, 3)
    q = p + rf(0, 3)
    s, b2, b1 = rf(-0.9, 3), rf(-1.5, 3), rf(-2, 2)
    r = max(F(-1), -1 - q * b1) + rf(0.1, 3)
    inp = ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=F(0))
    return ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=critical_c(inp))


def test_criterion_5_certificate_equivalence():
    rng = random.Random(7)
    dis = unsound = grid_bad = feasible = 0
    for i in range(500):
        inp = _random_tuple(rng)
        truth = check_theorem_A(inp)
        cert = synthesize_certificate(inp)
        ok = isinstance(cert, Certificate)
        feasible += ok
        dis += ok != truth
        if ok and (recheck_certificate(cert, inp) or cert.margin <= 0):
            unsound += 1
        if i < 100:
            grid_bad += grid_feasible(inp) != truth
    record(5, "certificate equivalence", dis == 0 and unsound == 0 and grid_bad == 0,
           f"{dis} disagreements / 500 ({feasible} feasible), {unsound} unsound, grid oracle {100 - grid_bad}/100")


# ------------------------------------------------------------------ 6


def test_criterion_6_adjoint_and_constancy():
    op = OperatorParams(n=2, b1=0.3, b2=0.5, c=1.0, s=0.2, r=0.4, p=2, q=3)
    g = np.random.default_rng(600)
    worst_pair = 0.0
    for k in range(10):
        a, b, cc = g.normal(size=3)
        f = lambda w, a=a, b=b: 1 + a * w[:, 0] * np.conj(w[:, 1]) + 1j * b * w[:, 2]
        h = lambda w, cc=cc: np.abs(w[:, 0]) ** 2 + cc * w[:, 1] + 0.5
        A = [sample_M(RngState(1000 + 4 * k + i), 2, op.s, 3000) for i in range(2)]
        B = [sample_M(RngState(2000 + 4 * k + i), 2, op.r, 3000) for i in range(2)]
        left = pairing_TF_G(f, h, op, A[0], B[0])
        right = pairing_F_TstarG(f, h, op, A[1], B[1])
        worst_pair = max(worst_pair, abs(left.value - right.value) / math.hypot(left.stderr, right.stderr))
    op18 = OperatorParams(n=2, b1=0.3, b2=0.5, c=2.0, s=0.2, r=0.4, p=2, q=3)
    tc = sample_M(RngState(3), 2, op18.r, 200_000)
    N = 0.7
    z = sample_boundary(np.random.default_rng(4), 2, 10) * np.linspace(0.1, 0.95, 10)[:, None]
    est = apply_S_adjoint(power_function(N), z, op18, tc)
    rad = (1 - np.sum(np.abs(z) ** 2, 1)) ** (op18.b2 - op18.s)
    ratio, se = est.value / rad, est.stderr / rad
    exact = adjoint_power_constant(op18, N)
    worst_exact = float(np.max(np.abs(ratio - exact) / se))
    mean = np.sum(ratio / se**2) / np.sum(1 / se**2)
    worst_const = float(np.max(np.abs(ratio - mean) / se))
    ok = worst_pair < 3 and worst_const < 3 and worst_exact < 3
    record(6, "adjoint identity and power constancy", ok,
           f"pairs max {worst_pair:.2f} sigma; ratio spread {worst_const:.2f} sigma, vs closed form "
           f"{worst_exact:.2f} sigma")


# ------------------------------------------------------------------ 7


def test_criterion_7_necessity_probe():
    rng = random.Random(11)
    rf = lambda lo, hi, den=8: F(rng.randint(math.ceil(lo * den), math.floor(hi * den)), den)
    sat, vio = [], []
    while len(sat) + len(vio) < 20:
        n = rng.choice([2, 3])
        p = rf(1.25, 3)
        q = p + rf(0, 2)
        s, b2, b1 = rf(-0.5, 2), rf(-0.5, 2), rf(-0.5, 1)
        r = max(F(-1), -1 - q * b1) + rf(0.25, 2)
        inp = ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=F(0))
        bound = critical_c(inp)
        if not s + 1 < p * (b2 + 1):
            continue
        violating = len(sat) >= 10
        c = bound + F(1, 2) if violating else bound
        # the probe needs the holomorphic target integral and the source norm to converge
        if q * c - n - 1 - q * b1 - r <= F(1, 4) or p * (n + 1 + b2) - n - 1 - s <= F(1, 4):
            continue
        assert check_theorem_A(ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=c)) is not violating
        op = OperatorParams(n, float(b1), float(b2), float(c), float(s), float(r), float(p), float(q))
        ratios = [row["ratio"] for row in ratio_probe(op, "xi", [0.5, 0.9, 0.99])]
        (vio if violating else sat).append(ratios)
    grow = [r[-1] / r[0] for r in vio]
    rise = [max(r) / r[0] for r in sat]
    two_sided = sum(abs(r[-1] / r[0] - 1) <= 0.5 for r in sat)
    inversions = sum(a >= b for a in rise for b in grow)
    ok = min(grow) > 2 and max(rise) <= 1.5 and inversions == 0
    record(7, "necessity growth probe", ok,
           f"violating last/first min {min(grow):.2f} (> 2); satisfying max/first max {max(rise):.2f} (<= 1.5), "
           f"{two_sided}/10 also within 50% two-sided; {inversions} inversions")


# ------------------------------------------------------------------ 8

BATTERY = {
    "one": lambda z: np.ones(len(z)),
    "z1": lambda z: z[:, 0],
    "conj z1": lambda z: np.conj(z[:, 0]),
    "z1 conj z2": lambda z: z[:, 0] * np.conj(z[:, 1]),
    "|z2|^2": lambda z: np.abs(z[:, 1]) ** 2,
}


def test_criterion_8_transfer():
    n = 2
    mn = isometric_mass_constant(n)
    iso = 0.0
    for lam in (0.0, 1.0):
        cM = sample_M(RngState(1), n, lam, 100_000, m_n=mn)
        cB = sample_ball_star(RngState(2), n, 100_000, lam)
        for p, f in itertools.product((1.0, 2.0, 3.0), BATTERY.values()):
            iso = max(iso, verify_isometry(f, p, lam, cM, cB).sigmas)
    g = np.random.default_rng(77)
    z = sample_boundary(g, n, 20) * np.sqrt(g.uniform(0.05, 0.7, 20))[:, None]
    errs, sig = {}, 0.0
    for lam in (0.0, 1.0):
        for N in (25_000, 100_000):
            cM = sample_M(RngState(1), n, lam, N, m_n=mn)
            cB = sample_ball_star(RngState(2), n, N, lam)
            kM = calibrate(KernelParams(n, lam, C=cone_constant(n, lam, mn)), cM)
            kB = calibrate(KernelParams(n, lam), cB)
            reps = [verify_intertwine(f, lam, z, cM, cB, kM, kB) for f in BATTERY.values()]
            errs[lam, N] = max(r.max_abs_error for r in reps)
            sig = max(sig, max(r.max_sigmas for r in reps))
    shrink = all(errs[lam, 100_000] < errs[lam, 25_000] for lam in (0.0, 1.0))
    detail = ", ".join(f"lam={lam:g}: {errs[lam, 25_000]:.4f} -> {errs[lam, 100_000]:.4f}" for lam in (0.0, 1.0))
    record(8, "transfer isometry and intertwining", iso < 3 and sig < 3 and shrink,
           f"isometry max {iso:.2f} sigma; intertwining max {sig:.2f} sigma; max error {detail}")


# ------------------------------------------------------------------ 9


def _reduction_grid():
    ps = [F(1), F(5, 4), F(3, 2), F(2), F(3)]
    qoff = [F(0), F(1, 2), F(1), F(5, 2)]
    lams = [F(-1, 2), F(-1, 4), F(0), F(1, 3), F(1, 2), F(1), F(2), F(5)]
    ss = [F(-1, 2), F(-1, 4), F(0), F(1, 4), F(1, 2), F(1), F(2), F(3)]
    for n, p, qo, lam, lt, s in itertools.product((2, 3), ps, qoff, lams, lams, ss):
        yield ConditionInput(n, p, p + qo, s=s, lam=lam, lam_t=lt)


def _disagreements(substitution: str) -> tuple[int, int]:
    bad = cells = 0
    for inp in _reduction_grid():
        cells += 1
        try:
            reduced = check_operator(reduce_C_to_A(inp, substitution))
        except HypothesisError:
            reduced = None
        bad += reduced != check_theorem_C(inp)
    return bad, cells


def test_criterion_9_reduction_coherence():
    bad, cells = _disagreements("shifted")
    matched, _ = _disagreements("matched")
    record(9, "reduction coherence", bad == 0,
           f"substitution c = n+1+lam: {bad} of {cells} cells disagree; "
           f"c = n+1 (p > 1) / n+1+s (p = 1): {matched} disagree")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
