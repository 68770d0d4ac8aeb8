"""Discretized T, S, their adjoints, the weighted Bergman projections, and norm probes.

On M, for ``z, w`` in M::

    S f(z) = (1-|z|^2)^{b1} int_M f(w) (1 - z.conj(w))^{-c} (1-|w|^2)^{b2} dm(w)
    T f(z) = (1-|z|^2)^{b1} int_M f(w) |1 - z.conj(w)|^{-c} (1-|w|^2)^{b2} dm(w)

Integrals are sums over a :class:`SampleCloud`; a cloud drawn for weight
``cloud.s`` is re-weighted by ``(1-|w|^2)^{e - cloud.s}`` to represent weight
``e``. Everything evaluated at several points returns an :class:`Estimate`
of arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fr_integrals import FRQuery, series_J
from .geometry import DomainError, as_point, minimal_norm
from .kernels import (SINGULAR_TOL, KernelParams, SingularityError, _profile, cone_constant,
                      kernel_ball, kernel_M)
from .sampling import (DOMAIN_BALL, DOMAIN_M, Estimate, SampleCloud, beta_mass, gauss_jacobi_unit,
                       invariant_integral, quadrature_nodes)

Func = Callable[[np.ndarray], np.ndarray]

_BLOCK = 4_000_000  # entries per kernel block


@dataclass(frozen=True)
class OperatorParams:
    n: int = 2
    b1: float = 0.0
    b2: float = 0.0
    c: float = 3.0
    s: float = 0.0
    r: float = 0.0
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if not 1 <= self.p <= self.q < math.inf:
            raise DomainError("need 1 <= p <= q < inf")
        if self.s <= -1:
            raise DomainError("need s > -1")
        if not self.r > max(-1.0, -1.0 - self.q * self.b1):
            raise DomainError("need r > max(-1, -1 - q b1)")

    @property
    def p_conj(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def q_conj(self) -> float:
        return math.inf if self.q == 1 else self.q / (self.q - 1)

    @classmethod
    def from_condition(cls, inp) -> "OperatorParams":
        return cls(inp.n, float(inp.b1), float(inp.b2), float(inp.c), float(inp.s), float(inp.r),
                   float(inp.p), float(inp.q))


def combined_stderr(*errs) -> float:
    return float(math.sqrt(sum(float(np.max(np.abs(e))) ** 2 for e in errs)))


# ------------------------------------------------------------------ helpers


def _points(z, dim: int) -> tuple[np.ndarray, bool]:
    z = as_point(z)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[-1] != dim:
        raise DomainError(f"evaluation points must live in C^{dim}")
    return z, single


def reweighted(cloud: SampleCloud, exponent: float) -> np.ndarray:
    """Cloud weights representing weight ``exponent`` instead of ``cloud.s``."""
    if exponent == cloud.s:
        return cloud.weights
    if cloud.domain == DOMAIN_M:
        base = 1.0 - cloud.radii_sq
    else:
        base = 1.0 - minimal_norm(cloud.points) ** 2
    return cloud.weights * base ** (exponent - cloud.s)


def _row_estimates(block_fn, z: np.ndarray, fw: np.ndarray, count: int) -> Estimate:
    """``sum_i K(z_j, w_i) fw_i`` for each row j, with per-row MC stderr."""
    rows = max(1, _BLOCK // max(count, 1))
    vals, errs = [], []
    for start in range(0, len(z), rows):
        K = block_fn(z[start:start + rows])
        contrib = K * fw[None, :] * count
        vals.append(contrib.mean(axis=1))
        errs.append(contrib.std(axis=1, ddof=1) / math.sqrt(count) if count > 1 else np.zeros(len(K)))
    return Estimate(np.concatenate(vals), np.concatenate(errs))


def _finish(est: Estimate, single: bool) -> Estimate:
    v, e = est
    if not np.iscomplexobj(v) or np.all(np.imag(v) == 0):
        v = np.real(v)
    if single:
        return Estimate(v[0].item(), float(e[0]))
    return Estimate(v, e)


def _pairing_block(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    x = z @ np.conj(w).T
    if np.any(np.abs(1 - x) < SINGULAR_TOL):
        raise SingularityError("1 - z.conj(w) vanishes on the cloud")
    return x


def _require_M(cloud: SampleCloud, n: int) -> None:
    if cloud.domain != DOMAIN_M or cloud.n != n:
        raise DomainError(f"need a cloud on M with n = {n}")


# ---------------------------------------------------------------- operators


def _apply(f: Func, z, op: OperatorParams, cloud: SampleCloud, modulus: bool) -> Estimate:
    _require_M(cloud, op.n)
    z, single = _points(z, op.n + 1)
    fw = np.asarray(f(cloud.points)) * reweighted(cloud, op.b2)
    pts = cloud.points

    def block(zz):
        x = _pairing_block(zz, pts)
        k = np.abs(1 - x) ** (-op.c) if modulus else (1 - x) ** (-op.c)
        return k

    est = _row_estimates(block, z, fw, len(cloud))
    pre = (1 - np.sum(np.abs(z) ** 2, axis=1)) ** op.b1
    return _finish(Estimate(est.value * pre, est.stderr * pre), single)


def apply_S(f: Func, z, op: OperatorParams, cloud: SampleCloud) -> Estimate:
    """S f at z (principal-branch power of ``1 - z.conj(w)``)."""
    return _apply(f, z, op, cloud, modulus=False)


def apply_T(f: Func, z, op: OperatorParams, cloud: SampleCloud) -> Estimate:
    """T f at z (kernel ``|1 - z.conj(w)|^{-c}``)."""
    return _apply(f, z, op, cloud, modulus=True)


def _adjoint(g: Func, z, op: OperatorParams, target_cloud: SampleCloud, modulus: bool) -> Estimate:
    _require_M(target_cloud, op.n)
    z, single = _points(z, op.n + 1)
    pts = target_cloud.points
    gw = (np.asarray(g(pts)) * reweighted(target_cloud, op.r)
          * (1 - target_cloud.radii_sq) ** op.b1)

    def block(zz):
        x = _pairing_block(zz, pts)
        return np.abs(1 - x) ** (-op.c) if modulus else (1 - x) ** (-op.c)

    est = _row_estimates(block, z, gw, len(target_cloud))
    pre = (1 - np.sum(np.abs(z) ** 2, axis=1)) ** (op.b2 - op.s)
    return _finish(Estimate(est.value * pre, est.stderr * pre), single)


def apply_T_adjoint(g: Func, z, op: OperatorParams, target_cloud: SampleCloud) -> Estimate:
    """Adjoint of T between L^2((1-|w|^2)^s dm) and L^2((1-|z|^2)^r dm).

    ``(1-|z|^2)^{b2-s} int_M (1-|w|^2)^{b1} |1 - z.conj(w)|^{-c} g(w) (1-|w|^2)^r dm(w)``.
    """
    return _adjoint(g, z, op, target_cloud, modulus=True)


def apply_S_adjoint(g: Func, z, op: OperatorParams, target_cloud: SampleCloud) -> Estimate:
    """Adjoint of S: as :func:`apply_T_adjoint` with kernel ``(1 - z.conj(w))^{-c}``.

    For radial g this is an exact multiple of ``(1-|z|^2)^{b2-s}`` (mean value
    property of the holomorphic kernel).
    """
    return _adjoint(g, z, op, target_cloud, modulus=False)


def double_integral(H: Callable[[np.ndarray, np.ndarray], np.ndarray], cloud_a: SampleCloud,
                    wa: np.ndarray, cloud_b: SampleCloud, wb: np.ndarray) -> Estimate:
    """``sum_ij H(a_i, b_j) wa_i wb_j`` over two independent clouds.

    Standard error from the two-sample decomposition:
    ``var(row means)/N_a + var(column means)/N_b``.
    """
    Na, Nb = len(wa), len(wb)
    M = np.asarray(H(cloud_a.points, cloud_b.points)) * (wa * Na)[:, None] * (wb * Nb)[None, :]
    rows, cols = M.mean(axis=1), M.mean(axis=0)
    var = np.var(rows, ddof=1) / Na + np.var(cols, ddof=1) / Nb
    return Estimate(M.mean(), float(math.sqrt(var)))


def pairing_TF_G(f: Func, g: Func, op: OperatorParams, src: SampleCloud, tgt: SampleCloud,
                 modulus: bool = True) -> Estimate:
    """``<T f, g>`` in ``L^2((1-|z|^2)^r dm)``; src carries w, tgt carries z."""
    fw = reweighted(src, op.b2)
    gw = reweighted(tgt, op.r)

    def H(zs, ws):
        x = _pairing_block(zs, ws)
        k = np.abs(1 - x) ** (-op.c) if modulus else (1 - x) ** (-op.c)
        pre = (1 - np.sum(np.abs(zs) ** 2, axis=1)) ** op.b1
        return pre[:, None] * k * np.asarray(f(ws))[None, :] * np.conj(np.asarray(g(zs)))[:, None]

    return double_integral(H, tgt, gw, src, fw)


def pairing_F_TstarG(f: Func, g: Func, op: OperatorParams, src: SampleCloud, tgt: SampleCloud,
                     modulus: bool = True) -> Estimate:
    """``<f, T* g>`` in ``L^2((1-|w|^2)^s dm)``; src carries w, tgt carries z."""
    fw = reweighted(src, op.s)
    gw = reweighted(tgt, op.r) * (1 - tgt.radii_sq) ** op.b1

    def H(ws, zs):
        x = _pairing_block(ws, zs)
        k = np.abs(1 - x) ** (-op.c) if modulus else (1 - x) ** (-op.c)
        pre = (1 - np.sum(np.abs(ws) ** 2, axis=1)) ** (op.b2 - op.s)
        adj = pre[:, None] * k * np.asarray(g(zs))[None, :]
        return np.asarray(f(ws))[:, None] * np.conj(adj)

    return double_integral(H, src, fw, tgt, gw)


# -------------------------------------------------------------- projections


def project_M(f: Func, z, s: float, cloud: SampleCloud, kp: KernelParams) -> Estimate:
    """P_{s,M} f(z) on a cloud over M; stderr includes the calibration error."""
    _require_M(cloud, kp.n)
    if kp.s != s:
        raise DomainError("kernel weight does not match s")
    z, single = _points(z, kp.n + 1)
    fw = np.asarray(f(cloud.points)) * reweighted(cloud, s)
    pts = cloud.points
    est = _row_estimates(lambda zz: np.stack([kernel_M(zi, pts, kp) for zi in zz]), z, fw, len(cloud))
    se = np.hypot(est.stderr, np.abs(est.value) * kp.C_rel_stderr)
    return _finish(Estimate(est.value, se), single)


def project_ball(f: Func, z, s: float, cloud: SampleCloud, kp: KernelParams,
                 method: str = "auto") -> Estimate:
    """P_{s,B*} f(z) on a cloud over B*; stderr includes the calibration error."""
    if cloud.domain != DOMAIN_BALL or cloud.n != kp.n:
        raise DomainError(f"need a cloud on B* with n = {kp.n}")
    if kp.s != s:
        raise DomainError("kernel weight does not match s")
    z, single = _points(z, kp.n)
    fw = np.asarray(f(cloud.points)) * reweighted(cloud, s)
    pts = cloud.points
    est = _row_estimates(lambda zz: np.stack([kernel_ball(zi, pts, kp, method) for zi in zz]),
                         z, fw, len(cloud))
    se = np.hypot(est.stderr, np.abs(est.value) * kp.ball_rel_stderr)
    return _finish(Estimate(est.value, se), single)


# -------------------------------------------------------------------- norms


def lp_norm(f: Func, p: float, cloud: SampleCloud, weight: float | None = None) -> Estimate:
    """Discretized L^p norm on the cloud's domain.

    ``weight`` re-targets the weight exponent (default: the cloud's own). On
    B* the density ``|z.z|^{(p-2)/2}`` is attached here. ``p = inf`` returns
    the cloud supremum with zero stderr.
    """
    vals = np.abs(np.asarray(f(cloud.points)))
    if p == math.inf:
        return Estimate(float(vals.max()), 0.0)
    if p < 1:
        raise DomainError("need p >= 1")
    w = reweighted(cloud, cloud.s if weight is None else weight)
    if cloud.domain == DOMAIN_BALL and p != 2:
        w = w * np.abs(np.sum(cloud.points**2, axis=1)) ** ((p - 2) / 2)
    contrib = vals**p * w * len(cloud)
    I = contrib.mean()
    se_I = contrib.std(ddof=1) / math.sqrt(len(cloud)) if len(cloud) > 1 else 0.0
    if cloud.domain == DOMAIN_BALL and weight is None:
        # the weight normalizer itself is random on B*
        se_I = math.hypot(se_I, I * cloud.mass_stderr / cloud.total_mass) if cloud.total_mass else se_I
    norm = I ** (1 / p)
    se = se_I / (p * I ** (1 - 1 / p)) if I > 0 else 0.0
    return Estimate(float(norm), float(se))


# ----------------------------------------------------------- test families


def power_function(N: float) -> Func:
    """``f_N(w) = (1-|w|^2)^N`` on M."""
    return lambda w: (1 - np.sum(np.abs(w) ** 2, axis=-1)) ** N


def xi_function(xi, b2: float) -> Func:
    """``f_xi(w) = (1-|xi|^2)^{n+1+b2} [n-1 + (n+1+2 b2) w.conj(xi)] / (1 - w.conj(xi))^{n+1+b2}``."""
    xi = as_point(xi)
    n = xi.shape[-1] - 1
    scale = (1 - np.sum(np.abs(xi) ** 2)) ** (n + 1 + b2)
    return lambda w: scale * _profile(np.sum(w * np.conj(xi), axis=-1), n, b2)


def power_lower_limit(op: OperatorParams) -> float:
    """Admissible f_N need ``N > max(-(1+r)/q', -1-r-b1)``."""
    qc = op.q_conj
    first = -(1 + op.r) / qc if qc != math.inf else 0.0
    return max(first, -1 - op.r - op.b1)


def adjoint_power_constant(op: OperatorParams, N: float, m_n: float = 1.0) -> float:
    """``S* f_N = C_N (1-|z|^2)^{b2-s}`` with ``C_N = int_M (1-|w|^2)^{b1+N+r} dm``."""
    return beta_mass(op.n, op.b1 + N + op.r, m_n)


def xi_source_norm(op: OperatorParams, R: float, m_n: float = 1.0, refine: float = 1.0) -> float:
    """``||f_xi||`` in ``L^p((1-|w|^2)^s dm)`` for ``|xi| = R`` by invariant quadrature.

    Node counts follow :func:`quadrature_nodes` scaled by ``refine``; accuracy
    is ~1e-10 up to ``|xi| = 0.9999`` and degrades beyond (node cap).
    """
    n, b2, p = op.n, op.b2, op.p
    a, b = n - 1, n + 1 + 2 * b2

    def g(x, u):
        return np.abs(a + b * x) ** p / np.abs(1 - x) ** (p * (n + 1 + b2))

    nodes = max(8, int(refine * quadrature_nodes(R, 64)))
    mod_nodes = max(8, int(refine * quadrature_nodes(R, 40)))
    angles = max(16, int(refine * 96))
    I = invariant_integral(g, R, n, op.s, nodes=nodes, angles=angles, m_n=m_n, modulus_nodes=mod_nodes)
    return float(((1 - R * R) ** (p * (n + 1 + b2)) * I) ** (1 / p))


def xi_target_norm(op: OperatorParams, R: float, m_n: float = 1.0) -> float:
    """``||S f_xi||`` in ``L^q((1-|z|^2)^r dm)``, exact.

    Reproducing the holomorphic factor ``(1 - z.conj(w))^{-c}`` against the
    cone kernel gives ``S f_xi(z) = (1-|z|^2)^{b1} (1-R^2)^{n+1+b2} (1 - z.conj(xi))^{-c} / C``,
    whose q-th power integrates to a J-series.
    """
    n, q = op.n, op.q
    s4 = q * op.b1 + op.r
    c4 = q * op.c - n - 1 - s4
    C = cone_constant(n, op.b2, m_n)
    J = series_J(R, FRQuery(c4, s4, 0, radii=(0.5,), n=n), m_n)
    return float((1 - R * R) ** (n + 1 + op.b2) / C * J ** (1 / q))


def power_target_norm(op: OperatorParams, N: float, m_n: float = 1.0, nodes: int = 64) -> float:
    """``||T f_N||`` in ``L^q((1-|z|^2)^r dm)``: Gauss-Jacobi in |z|^2 over exact J-series."""
    n, q = op.n, op.q
    s_in = N + op.b2
    if s_in <= -1:
        raise DomainError("f_N (1-|w|^2)^{b2} is not integrable")
    c_in = op.c - n - 1 - s_in
    u, wu = gauss_jacobi_unit(nodes, float(q * op.b1 + op.r), float(n - 2))
    fq = FRQuery(c_in, s_in, 0, radii=(0.5,), n=n)
    J = np.array([series_J(math.sqrt(x), fq, m_n) for x in u])
    return float((0.5 * m_n * np.sum(wu * J**q)) ** (1 / q))


def ratio_probe(op: OperatorParams, family: str, ladder, m_n: float = 1.0,
                nodes: int = 64) -> list[dict]:
    """Rows ``family_param, source_norm, target_norm, ratio, stderr`` along a ladder.

    ``"xi"`` (ladder of |xi|): target is ``||S f_xi||``, a lower bound for
    ``||T |f_xi| ||`` since ``|S f| <= T|f|``. ``"power"`` (ladder of N): target
    ``||T f_N||``. ``"zero"``: f = 0, every ratio undefined. The stderr column
    is the change under a coarser quadrature (values are deterministic).
    """
    rows = []
    for param in ladder:
        param = float(param)
        if family == "zero":
            rows.append({"family_param": param, "source_norm": 0.0, "target_norm": 0.0,
                         "ratio": None, "stderr": None})
            continue
        if family == "xi":
            if not 0 <= param < 1:
                raise DomainError("xi radii must lie in [0, 1)")
            src = xi_source_norm(op, param, m_n)
            src_coarse = xi_source_norm(op, param, m_n, refine=0.5)
            tgt = xi_target_norm(op, param, m_n)
            tgt_coarse = tgt
        elif family == "power":
            if param <= power_lower_limit(op):
                raise DomainError(f"N = {param} below the admissible range")
            src = src_coarse = beta_mass(op.n, op.s + op.p * param, m_n) ** (1 / op.p)
            tgt = power_target_norm(op, param, m_n, nodes)
            tgt_coarse = power_target_norm(op, param, m_n, nodes // 2)
        else:
            raise DomainError(f"unknown family {family!r}")
        ratio = tgt / src if src > 0 else None
        err = abs(ratio - tgt_coarse / src_coarse) if ratio is not None else None
        rows.append({"family_param": param, "source_norm": src, "target_norm": tgt,
                     "ratio": ratio, "stderr": err})
    return rows


# ------------------------------------------------------- reproducing check

HOLOMORPHIC_BATTERY: dict[str, Func] = {
    "1": lambda z: np.ones(z.shape[:-1], dtype=complex),
    "z1": lambda z: z[..., 0],
    "z1*z2": lambda z: z[..., 0] * z[..., 1],
    "z1^2": lambda z: z[..., 0] ** 2,
}


def reproducing_check(domain: str, n: int, s: float, count: int, seed: int = 42,
                      eval_count: int = 20, max_radius: float = 0.7, workers: int = 1,
                      functions: dict[str, Func] | None = None) -> list[dict]:
    """Project a battery of holomorphic functions and compare with direct evaluation.

    The cloud comes from streams 0..7 of ``seed``; evaluation points from an
    independent stream, with radius (|z| on M, N* on B*) uniform in
    ``(0, max_radius)``.
    """
    from .kernels import calibrate
    from .sampling import RngState, sample_ball_star, sample_boundary, sample_M, sample_streams

    functions = functions or HOLOMORPHIC_BATTERY
    g = RngState(seed, 1000).generator()
    if domain == "M":
        cloud = sample_streams(sample_M, seed, count, workers=workers, n=n, s=s)
        kp = calibrate(KernelParams(n, s, C=cone_constant(n, s)), cloud)
        z = sample_boundary(g, n, eval_count) * g.uniform(0, max_radius, eval_count)[:, None]
        proj = lambda f: project_M(f, z, s, cloud, kp)
    elif domain in ("ball", DOMAIN_BALL):
        cloud = sample_streams(sample_ball_star, seed, count, workers=workers, n=n, s=s)
        kp = calibrate(KernelParams(n, s), cloud)
        v = sample_ball_star(g, n, eval_count).points
        z = v / minimal_norm(v)[:, None] * g.uniform(0, max_radius, eval_count)[:, None]
        proj = lambda f: project_ball(f, z, s, cloud, kp)
    else:
        raise DomainError(f"unknown domain {domain!r}")
    rows = []
    for name, f in functions.items():
        est = proj(f)
        exact = np.asarray(f(z))
        for i in range(len(z)):
            err = abs(est.value[i] - exact[i])
            se = float(est.stderr[i])
            rows.append({"domain": "M" if domain == "M" else "ball", "s": s, "function": name, "point": i,
                         "value": complex(est.value[i]), "exact": complex(exact[i]), "stderr": se,
                         "sigmas": err / se if se > 0 else (0.0 if err == 0 else math.inf)})
    return rows
