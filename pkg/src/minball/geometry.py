"""Complex pairings, the minimal-ball norm, and points of the null cone.

Points are plain complex numpy arrays. A batch of points is an array of
shape ``(count, dim)``; every function here broadcasts over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONE_TOL = 1e-12
FRAME_TOL = 1e-12


class DomainError(ValueError):
    """A point or parameter lies outside the domain an operation needs."""


def as_point(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0 or z.shape[-1] < 2:
        raise DomainError(f"points need dimension >= 2, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("point has non-finite coordinates")
    return z


def _check_dims(z: np.ndarray, w: np.ndarray) -> None:
    if z.shape[-1] != w.shape[-1]:
        raise DomainError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")


def bilinear(z, w):
    """``z . w = sum z_j w_j`` with no conjugation."""
    z, w = as_point(z), as_point(w)
    _check_dims(z, w)
    return np.sum(z * w, axis=-1)


def hermitian(z, w):
    """``z . conj(w)``."""
    z, w = as_point(z), as_point(w)
    _check_dims(z, w)
    return np.sum(z * np.conj(w), axis=-1)


def sq_norm(z):
    z = np.asarray(z, dtype=complex)
    return np.sum(np.abs(z) ** 2, axis=-1)


def minimal_norm(z):
    """``N*(z) = sqrt(|z|^2 + |z . z|)``; the minimal ball is ``N* < 1``."""
    z = as_point(z)
    return np.sqrt(sq_norm(z) + np.abs(np.sum(z * z, axis=-1)))


def in_minimal_ball(z):
    return minimal_norm(z) < 1.0


def cone_defect(z):
    """Relative defect ``|z . z| / |z|^2`` (0 at the origin)."""
    z = as_point(z)
    nrm = sq_norm(z)
    zz = np.abs(np.sum(z * z, axis=-1))
    return np.where(nrm > 0, zz / np.where(nrm > 0, nrm, 1.0), 0.0)


def on_cone(z, tol: float = CONE_TOL):
    return cone_defect(z) <= tol


def in_manifold(z, tol: float = CONE_TOL):
    """Membership in M: on the cone and inside the open unit ball."""
    return on_cone(z, tol) & (sq_norm(z) < 1.0)


@dataclass(frozen=True)
class BoundaryFrame:
    """Two orthonormal real vectors; ``(x + iy)/sqrt(2)`` is a point of dM."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size < 3:
            raise DomainError("frame vectors must be equal-length 1-d arrays in R^{n+1}, n >= 2")
        if (
            abs(x @ x - 1.0) > FRAME_TOL
            or abs(y @ y - 1.0) > FRAME_TOL
            or abs(x @ y) > FRAME_TOL
        ):
            raise DomainError("frame vectors are not orthonormal")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size - 1

    @property
    def point(self) -> np.ndarray:
        return (self.x + 1j * self.y) / np.sqrt(2.0)


@dataclass(frozen=True)
class ManifoldPoint:
    z: np.ndarray

    def __post_init__(self):
        z = as_point(self.z)
        if z.ndim != 1:
            raise DomainError("ManifoldPoint holds a single point")
        if not on_cone(z):
            raise DomainError("point is not on the null cone")
        if sq_norm(z) >= 1.0:
            raise DomainError("point is outside the unit ball")
        object.__setattr__(self, "z", z)

    @property
    def radius(self) -> float:
        return float(np.sqrt(sq_norm(self.z)))


def frame_to_point(frame: BoundaryFrame, t: float) -> np.ndarray:
    """Scale the boundary point of ``frame`` to radius ``t`` in (0, 1]."""
    if not 0.0 < t <= 1.0:
        raise DomainError(f"radius must lie in (0, 1], got {t}")
    return t * frame.point


def frames_to_points(x: np.ndarray, y: np.ndarray, t=1.0) -> np.ndarray:
    """Batch version of :func:`frame_to_point` without per-frame validation."""
    t = np.asarray(t, dtype=float)
    return (x + 1j * y) / np.sqrt(2.0) * (t[..., None] if t.ndim else t)


def project_to_ball(z):
    """Coordinate map ``(z_1, ..., z_{n+1}) -> (z_1, ..., z_n)`` from M into B*.

    On the cone ``N*(F(z))^2 = |z|^2``, so M lands inside the minimal ball.
    """
    z = as_point(z)
    if not np.all(on_cone(z, 1e-10)):
        raise DomainError("input is not on the null cone")
    return z[..., :-1]


def lift_coordinate(zp):
    """One of the two cone points above ``zp`` in B*: last coordinate ``sqrt(-zp . zp)``."""
    zp = as_point(zp)
    last = np.sqrt(-np.sum(zp * zp, axis=-1) + 0j)
    return np.concatenate([zp, last[..., None]], axis=-1)
