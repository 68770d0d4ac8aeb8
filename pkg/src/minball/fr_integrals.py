"""Forelli-Rudin integrals on the cone and their boundary growth.

For z in M with |z| = r::

    I_c(z)     = int_dM |z.conj(xi)|^{2d} / |1 - z.conj(xi)|^{n+c} dmu(xi)
    J_{c,s}(z) = int_M  |z.conj(w)|^{2d} / |1 - z.conj(w)|^{n+c+s+1} (1-|w|^2)^s dm(w)

Both depend only on r. The law of ``zeta = xi0 . conj(xi)`` under mu is
circle-invariant with ``E|zeta|^{2k} = 1 / d_k``, where ``d_k`` is the
dimension of degree-k harmonic polynomials in n+1 variables. Expanding
``|1 - r zeta|^{-2a}`` then gives the exact series

    I = sum_k ((a)_k / k!)^2 r^{2k+2d} / d_{k+d},                       a = (n+c)/2
    J = (m_n/2) sum_k ((a)_k / k!)^2 r^{2k+2d} B(n-1+k+d, s+1) / d_{k+d}, a = (n+c+s+1)/2

which the ``series_*`` estimators evaluate. The Monte-Carlo estimators
sample mu directly and are usable away from the boundary only: the peak of
the integrand at r = 0.999 has mu-mass of order (1-r)^n.

``pairing="bilinear"`` replaces ``z.conj(xi)`` by ``z.xi`` in the numerator.
On the cone that factor vanishes at the peak and the growth drops from c to
c - 2d, so the classification below assumes the Hermitian numerator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import betaln, gammaln

from .geometry import DomainError, as_point
from .sampling import Estimate, radial_angular_integrate, sample_boundary, _rng

BOUNDED = "Bounded"
POWER = "PowerGrowth"
LOG = "LogGrowth"
INCONCLUSIVE = "Inconclusive"

STABLE = 0.25


@dataclass(frozen=True)
class FRQuery:
    c: float
    s: float = 0.0
    d: int = 0
    radii: tuple[float, ...] = (0.9, 0.99, 0.999, 0.9999)
    n: int = 2
    pairing: str = "hermitian"

    def __post_init__(self):
        if self.s <= -1:
            raise DomainError("s must exceed -1")
        if self.d < 0 or int(self.d) != self.d:
            raise DomainError("d must be a non-negative integer")
        r = list(self.radii)
        if any(b <= a for a, b in zip(r, r[1:])) or not r or r[0] <= 0 or r[-1] >= 1:
            raise DomainError("probe radii must increase strictly inside (0, 1)")
        if self.pairing not in ("hermitian", "bilinear"):
            raise DomainError(f"unknown pairing {self.pairing!r}")


def harmonic_dim(k, n: int):
    """Dimension of degree-k harmonic polynomials in n+1 real variables."""
    k = np.asarray(k)
    out = np.vectorize(lambda j: math.comb(j + n, n) - (math.comb(j + n - 2, n) if j >= 2 else 0))(k)
    return out if out.ndim else int(out)


def _log_harmonic_dim(k: np.ndarray, n: int) -> np.ndarray:
    # d_k = (2k + n - 1) (k + n - 2)! / (k! (n - 1)!)
    return np.log(2 * k + n - 1) + gammaln(k + n - 1) - gammaln(k + 1) - gammaln(n)


def _log_abs_poch_ratio(a: float, count: int) -> np.ndarray:
    """log |(a)_k / k!| for k < count; -inf once the Pochhammer symbol hits zero."""
    j = np.arange(count - 1)
    steps = np.abs(a + j)
    with np.errstate(divide="ignore"):
        logs = np.log(steps) - np.log(j + 1)
    return np.concatenate([[0.0], np.cumsum(logs)])


def _series_terms(r: float, c_exp: float) -> int:
    if r <= 0:
        return 1
    tail = -2.0 * math.log(r)
    k = 80.0 / tail
    k += (abs(c_exp) + 4) * math.log(k + 10) / tail
    return int(min(max(k, 50), 5_000_000)) + 50


def cone_probe(r: float, n: int) -> np.ndarray:
    """``r (e_1 + i e_2)/sqrt(2)``, a point of M at radius r."""
    z = np.zeros(n + 1, dtype=complex)
    z[0], z[1] = 1 / math.sqrt(2), 1j / math.sqrt(2)
    return r * z


def series_I(r: float, q: FRQuery) -> float:
    """Exact value of I_c at radius r (Hermitian numerator)."""
    if q.pairing != "hermitian":
        raise DomainError("the moment series covers the Hermitian numerator only")
    if not 0 <= r < 1:
        raise DomainError("radius must lie in [0, 1)")
    if r == 0:
        return 1.0 if q.d == 0 else 0.0
    a = (q.n + q.c) / 2
    K = _series_terms(r, q.c)
    k = np.arange(K)
    lt = 2 * _log_abs_poch_ratio(a, K) + (2 * k + 2 * q.d) * math.log(r) - _log_harmonic_dim(k + q.d, q.n)
    return float(np.exp(lt).sum())


def series_J(r: float, q: FRQuery, m_n: float = 1.0) -> float:
    """Exact value of J_{c,s} at radius r (Hermitian numerator)."""
    if q.pairing != "hermitian":
        raise DomainError("the moment series covers the Hermitian numerator only")
    if not 0 <= r < 1:
        raise DomainError("radius must lie in [0, 1)")
    if r == 0:
        return 0.5 * m_n * math.exp(betaln(q.n - 1, q.s + 1)) if q.d == 0 else 0.0
    a = (q.n + q.c + q.s + 1) / 2
    K = _series_terms(r, q.c)
    k = np.arange(K)
    lt = (2 * _log_abs_poch_ratio(a, K) + (2 * k + 2 * q.d) * math.log(r)
          + betaln(q.n - 1 + k + q.d, q.s + 1) - _log_harmonic_dim(k + q.d, q.n))
    return float(0.5 * m_n * np.exp(lt).sum())


def _numerator(z: np.ndarray, pts: np.ndarray, q: FRQuery) -> np.ndarray:
    if q.d == 0:
        return np.ones(pts.shape[:-1])
    if q.pairing == "hermitian":
        pair = np.sum(z * np.conj(pts), axis=-1)
    else:
        pair = np.sum(z * pts, axis=-1)
    return np.abs(pair) ** (2 * q.d)


def _check_z(z, q: FRQuery) -> np.ndarray:
    z = as_point(z)
    if z.shape[-1] != q.n + 1:
        raise DomainError(f"probe point must live in C^{q.n + 1}")
    if np.sum(np.abs(z) ** 2) >= 1:
        raise DomainError("probe point must satisfy |z| < 1")
    return z


def estimate_I(z, q: FRQuery, rng=None, count: int = 100_000) -> Estimate:
    """Monte-Carlo I_c(z) over mu."""
    z = _check_z(z, q)
    xi = sample_boundary(_rng(rng), q.n, count)
    x = xi @ np.conj(z)
    vals = _numerator(z, xi, q) / np.abs(1 - np.conj(x)) ** (q.n + q.c)
    se = float(np.std(vals, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return Estimate(float(vals.mean()), se)


def estimate_J(z, q: FRQuery, radial_nodes: int = 64, angular_count: int = 10_000, rng=None,
               m_n: float = 1.0) -> Estimate:
    """J_{c,s}(z): Gauss-Jacobi in the radius, Monte-Carlo over mu."""
    z = _check_z(z, q)
    expo = q.n + q.c + q.s + 1

    def integrand(w):
        x = np.sum(z * np.conj(w), axis=-1)
        return _numerator(z, w, q) / np.abs(1 - x) ** expo

    return radial_angular_integrate(integrand, q.n, q.s, radial_nodes, angular_count, rng, m_n)


Estimator = Callable[[float], Estimate]


def series_estimator(q: FRQuery, which: str = "I", m_n: float = 1.0) -> Estimator:
    if which == "I":
        return lambda r: Estimate(series_I(r, q), 0.0)
    if which == "J":
        return lambda r: Estimate(series_J(r, q, m_n), 0.0)
    raise DomainError(f"unknown integral {which!r}")


def mc_estimator(q: FRQuery, which: str = "I", rng=None, count: int = 100_000,
                 radial_nodes: int = 64, m_n: float = 1.0) -> Estimator:
    g = _rng(rng)
    if which == "I":
        return lambda r: estimate_I(cone_probe(r, q.n), q, g, count)
    if which == "J":
        return lambda r: estimate_J(cone_probe(r, q.n), q, radial_nodes, count, g, m_n)
    raise DomainError(f"unknown integral {which!r}")


@dataclass
class Classification:
    label: str
    exponent: float | None
    rows: list[dict] = field(default_factory=list)
    fitted_exponent: float | None = None

    def __str__(self) -> str:
        return f"{self.label}({self.exponent:g})" if self.label == POWER else self.label


def expected_class(c: float) -> str:
    """Growth class predicted by the Forelli-Rudin estimates."""
    if c < 0:
        return BOUNDED
    if c == 0:
        return LOG
    return POWER


def _varies_less(a: float, b: float, tol: float = STABLE) -> bool:
    return a != 0 and abs(b - a) < tol * abs(a)


def classify_asymptotics(q: FRQuery, estimator: Estimator) -> Classification:
    """Decide Bounded / PowerGrowth(c) / LogGrowth from the last two probe radii.

    A class is accepted when its compensated value moves by less than 25%
    between the two outermost radii; candidates are tried in that order.
    """
    if len(q.radii) < 3:
        raise DomainError("need at least three probe radii")
    rows = []
    for r in q.radii:
        est = estimator(r)
        h = 1 - r * r
        row = {"radius": r, "estimate": float(est.value), "stderr": float(est.stderr),
               "log_compensated": float(est.value) / math.log(1 / h)}
        if q.c > 0:
            row["power_compensated"] = float(est.value) * h**q.c
        rows.append(row)
    a, b = rows[-2], rows[-1]
    fitted = None
    if a["estimate"] > 0 and b["estimate"] > 0:
        fitted = math.log(b["estimate"] / a["estimate"]) / math.log((1 - a["radius"] ** 2) / (1 - b["radius"] ** 2))
    if _varies_less(a["estimate"], b["estimate"]):
        label, expo, key = BOUNDED, None, "estimate"
    elif _varies_less(a["log_compensated"], b["log_compensated"]):
        label, expo, key = LOG, None, "log_compensated"
    elif q.c > 0 and _varies_less(a["power_compensated"], b["power_compensated"]):
        label, expo, key = POWER, q.c, "power_compensated"
    else:
        label, expo, key = INCONCLUSIVE, None, None
    for row in rows:
        row["compensated_value"] = row[key] if key else float("nan")
        row["class"] = label
    return Classification(label, expo, rows, fitted)
