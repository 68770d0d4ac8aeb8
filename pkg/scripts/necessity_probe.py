"""Ratio ||S f_xi|| / ||f_xi|| along |xi| -> 1 at and above the critical exponent."""

from __future__ import annotations

import argparse

from minball.conditions import ConditionInput, critical_c
from minball.operators import OperatorParams, ratio_probe


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--p", default="2")
    ap.add_argument("--q", default="3")
    ap.add_argument("--b1", default="1/4")
    ap.add_argument("--b2", default="1/2")
    ap.add_argument("--s", default="0")
    ap.add_argument("--r", default="1/2")
    ap.add_argument("--offsets", default="0,1/4,1/2,1", help="c - critical values to probe")
    ap.add_argument("--ladder", default="0.5,0.9,0.99,0.999")
    args = ap.parse_args()
    base = ConditionInput(args.n, args.p, args.q, b1=args.b1, b2=args.b2, s=args.s, r=args.r, c=0)
    bound = critical_c(base)
    ladder = [float(x) for x in args.ladder.split(",")]
    print(f"critical c = {bound} ({float(bound):.4f})")
    print(f"{'c - crit':>9}  " + "  ".join(f"|xi|={x:<7g}" for x in ladder) + "  last/first")
    for off in args.offsets.split(","):
        c = bound + ConditionInput(2, 1, 1, c=off).c
        op = OperatorParams(args.n, float(base.b1), float(base.b2), float(c), float(base.s), float(base.r),
                            float(base.p), float(base.q))
        rows = ratio_probe(op, "xi", ladder)
        ratios = [row["ratio"] for row in rows]
        print(f"{off:>9}  " + "  ".join(f"{x:<12.5g}" for x in ratios) + f"  {ratios[-1] / ratios[0]:.3f}")


if __name__ == "__main__":
    main()
