"""Seedable samplers for dM, M and B*, plus Monte-Carlo and radial-quadrature integrators.

Polar formula on the cone: for f on M,

    int_M f(z) (1-|z|^2)^s dm(z) = m_n int_0^1 t^{2n-3} (1-t^2)^s int_dM f(t xi) dmu(xi) dt,

and the substitution ``u = t^2`` turns the radial part into a Beta(n-1, s+1)
law with normalizer ``(m_n / 2) B(n-1, s+1)``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import betaln, hyp2f1, roots_jacobi

from .geometry import BoundaryFrame, DomainError, minimal_norm

DOMAIN_M = "M"
DOMAIN_BALL = "BallStar"

_CHUNK = 4096


class Estimate(NamedTuple):
    value: complex | float
    stderr: float


class NonFiniteError(FloatingPointError):
    """An integrand returned NaN or Inf; ``point`` is the first offender."""

    def __init__(self, point):
        self.point = np.asarray(point)
        super().__init__(f"non-finite integrand value at {self.point!r}")


@dataclass(frozen=True)
class RngState:
    seed: int = 42
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed & (2**64 - 1), self.stream]))

    def spawn(self, stream: int) -> "RngState":
        return RngState(self.seed, stream)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    return np.random.default_rng(rng)


def beta_mass(n: int, s: float, m_n: float = 1.0) -> float:
    """``int_M (1-|z|^2)^s dm = (m_n/2) B(n-1, s+1)``."""
    if s <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {s}")
    return 0.5 * m_n * math.exp(betaln(n - 1, s + 1))


@lru_cache(maxsize=64)
def gauss_jacobi_unit(count: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1] for the weight ``(1-x)^a x^b``."""
    y, w = roots_jacobi(count, a, b)
    x = (1.0 + y) / 2.0
    w = w / 2.0 ** (a + b + 1.0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# ---------------------------------------------------------------- boundary


def sample_haar_frames(rng, n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """First two columns of Haar orthogonal (n+1)x(n+1) matrices, batched.

    QR of a Gaussian (n+1)x2 block with the R-diagonal made positive is
    exactly Haar on the Stiefel manifold of orthonormal 2-frames.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    g = _rng(rng).standard_normal((count, n + 1, 2))
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diagonal(r, axis1=1, axis2=2))
    sign[sign == 0] = 1.0
    q = q * sign[:, None, :]
    return q[:, :, 0], q[:, :, 1]


def sample_haar_frame(rng, n: int) -> BoundaryFrame:
    x, y = sample_haar_frames(rng, n, 1)
    return BoundaryFrame(x[0], y[0])


def sample_boundary(rng, n: int, count: int) -> np.ndarray:
    """``count`` points of dM distributed by mu."""
    x, y = sample_haar_frames(rng, n, count)
    return (x + 1j * y) / np.sqrt(2.0)


# ------------------------------------------------------------------ clouds


@dataclass
class SampleCloud:
    """Weighted points representing a (weighted) measure on M or B*.

    ``weights`` sum to ``total_mass``. ``mass_stderr`` is nonzero only when
    the total mass is itself a Monte-Carlo estimate (clouds on B* with s != 0).
    """

    points: np.ndarray
    weights: np.ndarray
    domain: str
    s: float
    total_mass: float
    n: int
    mass_stderr: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.ndim != 2 or len(self.points) != len(self.weights):
            raise DomainError("cloud needs (count, dim) points and matching weights")
        if np.any(self.weights <= 0):
            raise DomainError("cloud weights must be positive")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def radii_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.points) ** 2, axis=1)

    def normalized(self) -> "SampleCloud":
        """Same points with weights rescaled to a probability measure."""
        return SampleCloud(self.points, self.weights / self.total_mass, self.domain, self.s,
                           1.0, self.n, self.mass_stderr / self.total_mass, dict(self.meta))


def sample_M(rng, n: int, s: float, count: int, m_n: float = 1.0) -> SampleCloud:
    """Points ``t xi`` with ``xi ~ mu`` and ``t^2 ~ Beta(n-1, s+1)``; equal weights.

    The weight ``(1-|z|^2)^s t^{2n-3}`` is folded into the radial law, so
    the cloud represents ``(1-|z|^2)^s dm`` with exact total mass.
    """
    if s <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {s}")
    if count < 1:
        raise DomainError("count must be >= 1")
    g = _rng(rng)
    xi = sample_boundary(g, n, count)
    t = np.sqrt(g.beta(n - 1, s + 1, size=count))
    mass = beta_mass(n, s, m_n)
    return SampleCloud(t[:, None] * xi, np.full(count, mass / count), DOMAIN_M, s, mass, n,
                       meta={"m_n": m_n})


def _uniform_unit_ball(g: np.random.Generator, n: int, count: int) -> np.ndarray:
    v = g.standard_normal((count, 2 * n))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v *= g.random(count)[:, None] ** (1.0 / (2 * n))
    return v[:, :n] + 1j * v[:, n:]


def sample_ball_star(rng, n: int, count: int, s: float = 0.0) -> SampleCloud:
    """Uniform points of B* by rejection from the Euclidean unit ball.

    ``N*(z) >= |z|`` so B* sits inside the unit ball. ``v`` is normalized
    Lebesgue measure on B*, hence weights ``(1 - N*^2)^s / count``.
    """
    if s <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {s}")
    if count < 1:
        raise DomainError("count must be >= 1")
    g = _rng(rng)
    kept: list[np.ndarray] = []
    have = drawn = 0
    while have < count:
        rate = have / drawn if have else 0.25
        batch = max(1024, int(1.3 * (count - have) / rate))
        cand = _uniform_unit_ball(g, n, batch)
        drawn += batch
        ok = cand[minimal_norm(cand) < 1.0]
        kept.append(ok)
        have += len(ok)
    pts = np.concatenate(kept)
    pts = pts[:count]
    dens = (1.0 - minimal_norm(pts) ** 2) ** s
    weights = dens / count
    mass = float(weights.sum())
    mass_se = float(np.std(dens, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
    return SampleCloud(pts, weights, DOMAIN_BALL, s, mass, n, mass_se,
                       meta={"acceptance": have / drawn})


def merge_clouds(clouds: list[SampleCloud]) -> SampleCloud:
    """Concatenate clouds of the same measure, rescaling to a single cloud."""
    first = clouds[0]
    total = sum(len(c) for c in clouds)
    pts = np.concatenate([c.points for c in clouds])
    w = np.concatenate([c.weights * len(c) for c in clouds]) / total
    if first.domain == DOMAIN_M:
        mass, se = first.total_mass, 0.0
    else:
        mass = float(w.sum())
        dens = w * total
        se = float(np.std(dens, ddof=1) / math.sqrt(total)) if total > 1 else 0.0
    return SampleCloud(pts, w, first.domain, first.s, mass, first.n, se, dict(first.meta))


def sample_streams(sampler: Callable[..., SampleCloud], seed: int, count: int, streams: int = 8,
                   workers: int = 1, **kwargs) -> SampleCloud:
    """Draw ``count`` points split over fixed RNG streams, merged in stream order.

    The split depends only on ``streams``, so the result is identical for any
    ``workers``.
    """
    sizes = [count // streams + (1 if i < count % streams else 0) for i in range(streams)]
    jobs = [(RngState(seed, i), k) for i, k in enumerate(sizes) if k > 0]

    def run(job):
        state, k = job
        return sampler(state, count=k, **kwargs)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return merge_clouds(parts)


# -------------------------------------------------------------- integrators


def _check_finite(values: np.ndarray, points: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        raise NonFiniteError(points[idx[0]] if points.ndim == 2 else points[idx])


def mc_integrate(f: Callable[[np.ndarray], np.ndarray], cloud: SampleCloud) -> Estimate:
    """Weighted sum of ``f`` over the cloud, with its Monte-Carlo standard error."""
    vals = np.asarray(f(cloud.points))
    _check_finite(vals, cloud.points)
    contrib = vals * cloud.weights * len(cloud)
    est = contrib.mean()
    se = float(np.std(contrib, ddof=1) / math.sqrt(len(cloud))) if len(cloud) > 1 else 0.0
    if np.isrealobj(est) or abs(np.imag(est)) == 0:
        est = float(np.real(est))
    return Estimate(est, se)


def radial_angular_integrate(f: Callable[[np.ndarray], np.ndarray], n: int, s: float,
                             radial_nodes: int = 64, angular_count: int = 10_000, rng=None,
                             m_n: float = 1.0) -> Estimate:
    """``int_M f (1-|z|^2)^s dm`` with Gauss-Jacobi in ``u = t^2`` and MC over mu.

    Every angular sample carries the full radial rule, so the standard error
    is the spread of the per-direction radial integrals.
    """
    if s <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {s}")
    if radial_nodes < 4:
        raise DomainError("radial_nodes must be >= 4")
    u, wu = gauss_jacobi_unit(radial_nodes, float(s), float(n - 2))
    t = np.sqrt(u)
    g = _rng(rng)
    per_dir = []
    left = angular_count
    while left > 0:
        k = min(_CHUNK, left)
        xi = sample_boundary(g, n, k)
        pts = t[None, :, None] * xi[:, None, :]
        vals = np.asarray(f(pts))
        _check_finite(vals, pts.reshape(-1, n + 1) if vals.ndim == 2 else pts)
        per_dir.append(0.5 * m_n * (vals * wu[None, :]).sum(axis=1))
        left -= k
    per_dir = np.concatenate(per_dir)
    est = per_dir.mean()
    se = float(np.std(per_dir, ddof=1) / math.sqrt(len(per_dir))) if len(per_dir) > 1 else 0.0
    if np.iscomplexobj(est) and np.imag(est) == 0:
        est = float(np.real(est))
    return Estimate(est, se)


def modulus_law(n: int, v: np.ndarray) -> np.ndarray:
    """Density of ``V = |xi_0 . conj(xi)|^2`` for ``xi ~ mu`` and fixed unit ``xi_0`` on the cone.

    ``((n-1)/2) (1-v)^(n-2) v^((n-3)/2) 2F1((n-1)/2, n-2; n-1; 1-v)``; its
    moments are ``E V^k = 1/d_k`` with d_k the dimension of degree-k
    harmonics in n+1 real variables.
    """
    v = np.asarray(v, dtype=float)
    return (0.5 * (n - 1) * (1 - v) ** (n - 2) * v ** ((n - 3) / 2)
            * hyp2f1((n - 1) / 2, n - 2, n - 1, 1 - v))


LOWER_MODULUS_NODES = 40


@lru_cache(maxsize=64)
def modulus_rule(n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for :func:`modulus_law`: ``count`` nodes on [1/2, 1], 40 on [0, 1/2].

    Upper half: Gauss-Jacobi with the endpoint factor ``(1-v)^(n-2)``, so the
    nodes crowd v -> 1 where boundary peaks live. Lower half (fixed size,
    nothing peaks there): Gauss-Legendre after ``v = tau^4 / 2``, which smooths
    the ``v^(-1/2)`` / ``log v`` behaviour of the density at 0 while keeping
    ``1 - v`` away from 1 in floating point.
    """
    y, wy = gauss_jacobi_unit(count, float(n - 2), 0.0)
    v1 = 0.5 + np.asarray(y) / 2
    w1 = np.asarray(wy) * 0.5 ** (n - 1) * modulus_law(n, v1) / (1 - v1) ** (n - 2)
    x, wx = leggauss(LOWER_MODULUS_NODES)
    tau = (x + 1) / 2
    v0 = tau**4 / 2
    w0 = wx * tau**3 * modulus_law(n, v0)
    v, w = np.r_[v0, v1], np.r_[w0, w1]
    v.setflags(write=False)
    w.setflags(write=False)
    return v, w


def quadrature_nodes(R: float, floor: int, cap: int = 800) -> int:
    """Gauss-Jacobi size resolving a peak of width ``1-R`` at the endpoint (spacing ~ 1/N^2)."""
    return int(min(cap, max(floor, math.ceil(8 / math.sqrt(1 - R)))))


def invariant_integral(g: Callable[[np.ndarray, float], np.ndarray], R: float, n: int, s: float,
                       nodes: int | None = None, angles: int = 96, m_n: float = 1.0,
                       modulus_nodes: int | None = None) -> complex | float:
    """Deterministic ``int_M g(w.conj(xi), |w|^2) (1-|w|^2)^s dm(w)`` for ``|xi| = R``.

    For ``w = t eta`` with ``eta ~ mu`` the pairing is ``t R zeta`` where
    ``|zeta|^2`` follows :func:`modulus_law` and the phase is uniform.
    Gauss-Jacobi handles t^2 and |zeta|^2 (node counts default to
    :func:`quadrature_nodes`, growing like ``(1-R)^(-1/2)``); the phase uses a
    trapezoid rule after the Poisson substitution
    ``e^{i phi} = (e^{i theta} + k)/(1 + k e^{i theta})`` with ``k`` the
    modulus, which clusters nodes at the peak ``x ~ |x|``.
    """
    if s <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {s}")
    if not 0 <= R < 1:
        raise DomainError("R must lie in [0, 1)")
    nodes = nodes or quadrature_nodes(R, 64)
    modulus_nodes = modulus_nodes or quadrature_nodes(R, 40)
    u, wu = gauss_jacobi_unit(nodes, float(s), float(n - 2))
    V, wmod = modulus_rule(n, modulus_nodes)
    mod = np.sqrt(V)
    e = np.exp(2j * np.pi * np.arange(angles) / angles)
    total = 0.0
    for ui, wi in zip(u, wu):
        k = (math.sqrt(ui) * R * mod)[:, None]
        x = k * (e + k) / (1 + k * e)
        jac = (1 - k**2) / np.abs(1 + k * e) ** 2
        vals = np.asarray(g(x, ui)) * jac
        _check_finite(vals, x)
        total = total + wi * np.sum(wmod * vals.mean(axis=1))
    out = 0.5 * m_n * total
    if np.iscomplexobj(out) and np.imag(out) == 0:
        out = float(np.real(out))
    return out


# --------------------------------------------------------------------- csv


def write_cloud_csv(cloud: SampleCloud, path: str | Path) -> None:
    path = Path(path)
    dim = cloud.points.shape[1]
    with path.open("w", newline="") as fh:
        fh.write(f"# domain={cloud.domain} s={cloud.s!r} n={cloud.n} total_mass={cloud.total_mass!r} "
                 f"mass_stderr={cloud.mass_stderr!r}\n")
        wr = csv.writer(fh)
        wr.writerow([f"{part}_{j}" for j in range(dim) for part in ("re", "im")] + ["weight"])
        for z, w in zip(cloud.points, cloud.weights):
            row = []
            for c in z:
                row += [repr(float(c.real)), repr(float(c.imag))]
            wr.writerow(row + [repr(float(w))])


def read_cloud_csv(path: str | Path) -> SampleCloud:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().lstrip("#").split()
        meta = dict(item.split("=", 1) for item in header)
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    coords = data[:, :-1]
    pts = coords[:, 0::2] + 1j * coords[:, 1::2]
    return SampleCloud(pts, data[:, -1], meta["domain"], float(meta["s"]), float(meta["total_mass"]),
                       int(meta["n"]), float(meta["mass_stderr"]))
