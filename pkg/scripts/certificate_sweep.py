"""Random rational tuples at the critical exponent: certificate feasibility vs the exact condition."""

from __future__ import annotations

import argparse
import random
from collections import Counter
from fractions import Fraction as F

from minball.conditions import (Certificate, ConditionInput, check_theorem_A, critical_c, grid_feasible,
                                recheck_certificate, synthesize_certificate)


def random_tuple(rng: random.Random) -> ConditionInput:
    rf = lambda lo, hi, den=12: F(rng.randint(int(lo * den), int(hi * den)), den)
    n = rng.choice([2, 3])
    p = 1 + rf(1 / 12, 3)
    q = p + rf(0, 3)
    s, b2, b1 = rf(-0.9, 3), rf(-1.5, 3), rf(-2, 2)
    r = max(F(-1), -1 - q * b1) + rf(0.1, 3)
    inp = ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=F(0))
    return ConditionInput(n, p, q, b1=b1, b2=b2, s=s, r=r, c=critical_c(inp))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--grid", type=int, default=100, help="how many tuples to confirm by grid search")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    disagree, grid_bad, reasons, margins = 0, 0, Counter(), []
    for i in range(args.count):
        inp = random_tuple(rng)
        truth = check_theorem_A(inp)
        cert = synthesize_certificate(inp)
        if isinstance(cert, Certificate):
            assert not recheck_certificate(cert, inp)
            margins.append(cert.margin)
        else:
            reasons[cert.violated] += 1
        disagree += isinstance(cert, Certificate) != truth
        if i < args.grid:
            grid_bad += grid_feasible(inp) != truth
    print(f"tuples {args.count}: feasible {len(margins)}, disagreements {disagree}")
    print(f"grid oracle: {min(args.grid, args.count) - grid_bad}/{min(args.grid, args.count)} agree")
    if margins:
        print(f"smallest certificate margin {min(margins)} ({float(min(margins)):.4g})")
    for name, k in reasons.most_common():
        print(f"infeasible via {name}: {k}")


if __name__ == "__main__":
    main()
