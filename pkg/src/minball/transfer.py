"""The lift from functions on B* to functions on M.

``(I f)(z) = z_{n+1} f(z_1, ..., z_n) / (2(n+1))^{1/p}``. The coordinate map
F(z) = (z_1, ..., z_n) is 2-to-1 from M onto B* with ``N*(F z) = |z|`` and
``|z_{n+1}|^2 = |F(z).F(z)|``, which is where the density ``|z.z|^{(p-2)/2}``
of the B* norm comes from. With v normalized on B*, the lift is an exact
isometry when dm on M has total-mass constant ``m_n = 4 n (n+1)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import DomainError, as_point
from .kernels import KernelParams
from .operators import Func, lp_norm, project_ball, project_M
from .sampling import DOMAIN_BALL, DOMAIN_M, SampleCloud


def isometric_mass_constant(n: int) -> float:
    """Total-mass constant m_n of dm on M making the lift isometric."""
    return 4.0 * n * (n + 1) ** 2


@dataclass(frozen=True)
class LiftedFunction:
    base: Callable[[np.ndarray], np.ndarray]
    p: float

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("need p >= 1")

    def __call__(self, z) -> np.ndarray:
        z = as_point(z)
        n = z.shape[-1] - 1
        return z[..., n] * np.asarray(self.base(z[..., :n])) / (2 * (n + 1)) ** (1 / self.p)


def lift(f: Func, p: float) -> LiftedFunction:
    return LiftedFunction(f, p)


def _check_clouds(cloud_M: SampleCloud, cloud_B: SampleCloud, lam: float) -> None:
    if cloud_M.domain != DOMAIN_M or cloud_B.domain != DOMAIN_BALL:
        raise DomainError("need one cloud on M and one on B*")
    if cloud_M.n != cloud_B.n:
        raise DomainError("clouds disagree on n")
    for cl in (cloud_M, cloud_B):
        if not math.isclose(cl.s, lam, abs_tol=1e-12):
            raise DomainError(f"cloud weight {cl.s} does not match lambda = {lam}")


@dataclass
class IsometryReport:
    p: float
    lam: float
    norm_M: float
    norm_M_stderr: float
    norm_B: float
    norm_B_stderr: float

    @property
    def relative_error(self) -> float:
        return abs(self.norm_M - self.norm_B) / self.norm_B

    @property
    def relative_stderr(self) -> float:
        return math.hypot(self.norm_M_stderr, self.norm_B_stderr) / self.norm_B

    @property
    def sigmas(self) -> float:
        return self.relative_error / self.relative_stderr if self.relative_stderr else math.inf

    def to_json(self) -> dict:
        return {"p": self.p, "lambda": self.lam,
                "norm_M": self.norm_M, "norm_M_stderr": self.norm_M_stderr,
                "norm_B": self.norm_B, "norm_B_stderr": self.norm_B_stderr,
                "relative_error": self.relative_error, "relative_stderr": self.relative_stderr,
                "sigmas": self.sigmas}


def verify_isometry(f: LiftedFunction | Func, p: float, lam: float, cloud_M: SampleCloud,
                    cloud_B: SampleCloud) -> IsometryReport:
    """Compare ``||I f||`` on M with ``||f||`` on B* (density ``|z.z|^{(p-2)/2}`` included).

    ``cloud_M`` must carry the isometric mass constant (see
    :func:`isometric_mass_constant`); a lifted function tagged with another p
    is rejected.
    """
    _check_clouds(cloud_M, cloud_B, lam)
    if isinstance(f, LiftedFunction):
        if f.p != p:
            raise DomainError(f"lifted with p = {f.p} but the isometry is tested at p = {p}")
        lifted, base = f, f.base
    else:
        lifted, base = lift(f, p), f
    nB = lp_norm(base, p, cloud_B)
    if nB.value == 0:
        raise DomainError("f has zero norm")
    nM = lp_norm(lifted, p, cloud_M)
    return IsometryReport(p, lam, nM.value, nM.stderr, nB.value, nB.stderr)


@dataclass
class IntertwineReport:
    max_abs_error: float
    max_sigmas: float
    scale: float
    rows: list[dict]

    def to_json(self) -> dict:
        return {"max_abs_error": self.max_abs_error, "max_sigmas": self.max_sigmas,
                "scale": self.scale, "rows": self.rows}


def verify_intertwine(f: Func, lam: float, eval_points, cloud_M: SampleCloud, cloud_B: SampleCloud,
                      kp_M: KernelParams, kp_B: KernelParams, p: float = 2.0) -> IntertwineReport:
    """``P_M (I f)`` against ``I (P_B f)`` at points of M, from the same lam-weighted clouds."""
    _check_clouds(cloud_M, cloud_B, lam)
    z = np.atleast_2d(as_point(eval_points))
    n = cloud_M.n
    lifted = lift(f, p)
    left = project_M(lifted, z, lam, cloud_M, kp_M)
    right_B = project_ball(f, z[:, :n], lam, cloud_B, kp_B)
    k = z[:, n] / (2 * (n + 1)) ** (1 / p)
    right = np.asarray(right_B.value) * k
    right_se = np.asarray(right_B.stderr) * np.abs(k)
    lv, ls = np.atleast_1d(left.value), np.atleast_1d(left.stderr)
    diff = np.abs(lv - right)
    comb = np.hypot(ls, right_se)
    sig = np.where(comb > 0, diff / np.where(comb > 0, comb, 1), np.where(diff > 0, np.inf, 0.0))
    rows = [{"left": complex(a), "left_stderr": float(b), "right": complex(c), "right_stderr": float(d),
             "abs_error": float(e), "sigmas": float(g)}
            for a, b, c, d, e, g in zip(lv, ls, right, right_se, diff, sig)]
    scale = float(np.max(np.abs(right))) if len(right) else 0.0
    return IntertwineReport(float(diff.max()), float(sig.max()), scale, rows)
