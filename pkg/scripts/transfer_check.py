"""Isometry and intertwining of the lift B* -> M as the clouds grow."""

from __future__ import annotations

import argparse

import numpy as np

from minball.kernels import KernelParams, calibrate, cone_constant
from minball.sampling import RngState, sample_ball_star, sample_boundary, sample_M
from minball.transfer import isometric_mass_constant, verify_intertwine, verify_isometry

BATTERY = {
    "one": lambda z: np.ones(len(z)),
    "z1": lambda z: z[:, 0],
    "conj z1": lambda z: np.conj(z[:, 0]),
    "z1 conj z2": lambda z: z[:, 0] * np.conj(z[:, 1]),
    "|z2|^2": lambda z: np.abs(z[:, 1]) ** 2,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--lam", type=float, default=0.0)
    ap.add_argument("--sizes", default="12500,25000,50000,100000")
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    n, lam, mn = args.n, args.lam, isometric_mass_constant(args.n)
    g = np.random.default_rng(args.seed + 1000)
    z = sample_boundary(g, n, args.points) * np.sqrt(g.uniform(0.05, 0.7, args.points))[:, None]
    print(f"{'N':>8} {'iso max sigma':>14} {'tw max |err|':>13} {'tw max sigma':>13}")
    for N in (int(x) for x in args.sizes.split(",")):
        cM = sample_M(RngState(args.seed), n, lam, N, m_n=mn)
        cB = sample_ball_star(RngState(args.seed + 1), n, N, lam)
        iso = max(verify_isometry(f, p, lam, cM, cB).sigmas for f in BATTERY.values() for p in (1.0, 2.0, 3.0))
        kM = calibrate(KernelParams(n, lam, C=cone_constant(n, lam, mn)), cM)
        kB = calibrate(KernelParams(n, lam), cB)
        reps = [verify_intertwine(f, lam, z, cM, cB, kM, kB) for f in BATTERY.values()]
        print(f"{N:8d} {iso:14.2f} {max(r.max_abs_error for r in reps):13.5f} "
              f"{max(r.max_sigmas for r in reps):13.2f}")


if __name__ == "__main__":
    main()
