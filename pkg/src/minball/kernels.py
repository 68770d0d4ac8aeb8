"""Weighted Bergman kernels on the cone manifold M and on the minimal ball B*.

On M (weight ``(1-|w|^2)^s``)::

    K(z, w) = C (n - 1 + (n + 1 + 2s) z.conj(w)) / (1 - z.conj(w))^(n+1+s)

On B* the kernel is ``ball_norm * A(X, Y) / (X^2 - Y)^(n+1+s)`` with
``X = 1 - z.conj(w)`` and ``Y = (z.z) conj(w.w)``. Pushing the cone kernel
through the 2-to-1 map ``(z', z_{n+1}) -> z'`` gives the closed form

    A(X, Y) / (X^2 - Y)^(n+1+s) = [k(P + Q) - k(P - Q)] / (2Q),  P = 1 - X,  Q^2 = Y,

where ``k`` is the cone kernel profile. Expanding in ``Q`` yields the series
for ``A`` with bracket ``2(n+s) X - (n+1+2s)(n+s-2k)/(n+s+1) (X^2 - Y)``.
The variant without the factor ``X`` on ``2(n+s)`` is kept as ``"uncorrected"``;
it does not reproduce holomorphic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import DomainError, as_point
from .sampling import DOMAIN_BALL, DOMAIN_M, SampleCloud, beta_mass

SINGULAR_TOL = 1e-14
SERIES_CAP = 500


class SingularityError(ArithmeticError):
    """The kernel denominator vanished (to ``SINGULAR_TOL``)."""


class SeriesDivergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class KernelParams:
    n: int = 2
    s: float = 0.0
    C: float = 1.0
    ball_norm: float = 1.0
    # "hermitian": (1 - z.conj(w))^2 - Y in the ball denominator; "bilinear": (1 - z.w)^2 - Y
    ball_denominator: str = "hermitian"
    # "corrected": bracket 2(n+s)X - ...; "uncorrected": bracket 2(n+s) - ...
    a_variant: str = "corrected"
    C_rel_stderr: float = 0.0
    ball_rel_stderr: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")
        if self.s <= -1:
            raise DomainError("s must exceed -1")
        if self.C <= 0 or self.ball_norm <= 0:
            raise DomainError("kernel constants must be positive")
        if self.ball_denominator not in ("hermitian", "bilinear"):
            raise DomainError(f"unknown ball_denominator {self.ball_denominator!r}")
        if self.a_variant not in ("corrected", "uncorrected"):
            raise DomainError(f"unknown a_variant {self.a_variant!r}")


def cone_constant(n: int, s: float, m_n: float = 1.0) -> float:
    """Exact C for the measure ``(1-|w|^2)^s dm``: ``K(0, w) = C (n-1)`` must integrate to 1."""
    return 1.0 / ((n - 1) * beta_mass(n, s, m_n))


def _pair(z, w):
    z, w = as_point(z), as_point(w)
    if z.shape[-1] != w.shape[-1]:
        raise DomainError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    return z, w


def _profile(x, n: int, s: float):
    """Cone kernel without the constant, as a function of ``x = z.conj(w)``."""
    return (n - 1 + (n + 1 + 2 * s) * x) / (1 - x) ** (n + 1 + s)


def kernel_M(z, w, kp: KernelParams):
    """``K_{s,M}(z, w)``; broadcasts ``z`` of shape (m,) against ``w`` of shape (..., m)."""
    z, w = _pair(z, w)
    x = np.sum(z * np.conj(w), axis=-1)
    if np.any(np.abs(1 - x) < SINGULAR_TOL):
        raise SingularityError("1 - z.conj(w) vanishes")
    return kp.C * _profile(x, kp.n, kp.s)


def generalized_binomial(a: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= (a - i) / (i + 1)
    return out


def A_series(X, Y, n: int, s: float, tol: float = 1e-15, variant: str = "corrected",
             return_terms: bool = False):
    """Sum ``A(X, Y)`` term by term.

    Integer ``n + s`` gives a finite sum (the binomial factor vanishes after
    ``ceil((n+s+1)/2)`` terms). Otherwise the sum stops once every entry has
    seen three consecutive terms below ``tol`` times its running sum.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    X, Y = np.broadcast_arrays(X, Y)
    m = n + s
    beta = n + 1 + 2 * s
    lead = 2 * m * (X if variant == "corrected" else 1.0)
    if variant not in ("corrected", "uncorrected"):
        raise DomainError(f"unknown variant {variant!r}")
    if np.any(X == 0):
        raise SingularityError("A(X, Y) needs X != 0")
    base = X ** (m - 1)
    ratio = Y / X**2
    total = np.zeros(X.shape, dtype=complex)
    quiet = np.zeros(X.shape, dtype=int)
    ratio_k = np.ones(X.shape, dtype=complex)
    terms = 0
    for k in range(SERIES_CAP):
        b = generalized_binomial(m + 1, 2 * k + 1)
        if b == 0.0:
            break
        term = b * base * ratio_k * (lead - beta * (m - 2 * k) / (m + 1) * (X**2 - Y))
        total = total + term
        terms += 1
        small = np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= 3):
            break
        ratio_k = ratio_k * ratio
    else:
        raise SeriesDivergenceError(f"A(X, Y) did not settle within {SERIES_CAP} terms")
    out = total if total.ndim else complex(total)
    return (out, terms) if return_terms else out


def _ball_XY(z, w, kp: KernelParams):
    z, w = _pair(z, w)
    P = np.sum(z * np.conj(w), axis=-1)
    Y = np.sum(z * z, axis=-1) * np.conj(np.sum(w * w, axis=-1))
    X = 1 - P
    Xd = X if kp.ball_denominator == "hermitian" else 1 - np.sum(z * w, axis=-1)
    return X, Y, Xd


def kernel_ball(z, w, kp: KernelParams, method: str = "auto"):
    """``K_{s,B*}(z, w)``.

    ``method="series"`` sums A(X, Y); ``"closed"`` uses the odd-part formula;
    ``"auto"`` picks the series where ``|Y| <= |X|^2 / 4`` and the closed form
    elsewhere (only available for the corrected, Hermitian reading).
    """
    X, Y, Xd = _ball_XY(z, w, kp)
    X, Y, Xd = np.broadcast_arrays(X, Y, Xd)
    D = Xd**2 - Y
    if np.any(np.abs(D) < SINGULAR_TOL):
        raise SingularityError("(1 - z.conj(w))^2 - Y vanishes")
    m = kp.n + kp.s
    exact_form = kp.a_variant == "corrected" and kp.ball_denominator == "hermitian"
    if method == "closed" and not exact_form:
        raise DomainError("closed form exists only for the corrected Hermitian kernel")
    if method == "series" or not exact_form:
        use_series = np.ones(X.shape, dtype=bool)
    elif method == "closed":
        use_series = np.zeros(X.shape, dtype=bool)
    else:
        use_series = np.abs(Y) <= 0.25 * np.abs(X) ** 2
    out = np.empty(X.shape, dtype=complex)
    if np.any(use_series):
        Xs, Ys, Ds = X[use_series], Y[use_series], D[use_series]
        out[use_series] = A_series(Xs, Ys, kp.n, kp.s, variant=kp.a_variant) / Ds ** (m + 1)
    rest = ~use_series
    if np.any(rest):
        P = 1 - X[rest]
        Q = np.sqrt(Y[rest])
        out[rest] = (_profile(P + Q, kp.n, kp.s) - _profile(P - Q, kp.n, kp.s)) / (2 * Q)
    out = kp.ball_norm * out
    return out if out.ndim else complex(out)


def ball_constant_value(n: int, s: float) -> float:
    """``A(1, 0) = (n+s)(n+1)``, the value of the un-normalized kernel at w = 0."""
    return (n + s) * (n + 1)


def calibrate(kp: KernelParams, cloud: SampleCloud) -> KernelParams:
    """Rescale C (cloud on M) or ball_norm (cloud on B*) so that P[1](0) = 1 on ``cloud``."""
    if not math.isclose(cloud.s, kp.s, rel_tol=0, abs_tol=1e-12):
        raise DomainError(f"cloud weight {cloud.s} does not match kernel weight {kp.s}")
    if cloud.points.shape[1] != (kp.n + 1 if cloud.domain == DOMAIN_M else kp.n):
        raise DomainError("cloud dimension does not match n")
    zero = np.zeros(cloud.points.shape[1], dtype=complex)
    if cloud.domain == DOMAIN_M:
        p1 = np.sum(cloud.weights * kernel_M(zero, cloud.points, kp))
        if abs(p1) < 1e-300:
            raise DomainError("projection of 1 vanishes on this cloud")
        return replace(kp, C=kp.C / float(np.real(p1)), C_rel_stderr=0.0)
    if cloud.domain == DOMAIN_BALL:
        p1 = np.sum(cloud.weights * kernel_ball(zero, cloud.points, kp))
        if abs(p1) < 1e-300:
            raise DomainError("projection of 1 vanishes on this cloud")
        rel = cloud.mass_stderr / cloud.total_mass if cloud.total_mass else 0.0
        return replace(kp, ball_norm=kp.ball_norm / float(np.real(p1)), ball_rel_stderr=rel)
    raise DomainError(f"unknown cloud domain {cloud.domain!r}")
