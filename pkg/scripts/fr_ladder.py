"""Growth of I_c / J_{c,s} along a radius ladder, with the classifier verdict per c."""

from __future__ import annotations

import argparse

from minball.fr_integrals import FRQuery, classify_asymptotics, expected_class, series_estimator


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--s", type=float, default=0.0)
    ap.add_argument("--d", type=int, default=0)
    ap.add_argument("--integral", choices=("I", "J"), default="I")
    ap.add_argument("--c", type=lambda t: [float(x) for x in t.split(",")], default=[-1, -0.5, 0, 0.5, 1, 2])
    ap.add_argument("--decades", type=int, default=4)
    args = ap.parse_args()
    radii = tuple(1 - 10.0 ** -k for k in range(1, args.decades + 1))
    print(f"{'c':>6} {'class':>12} {'expected':>12} {'fitted':>8}  values at r = " + ", ".join(f"{r:g}" for r in radii))
    for c in args.c:
        q = FRQuery(c, args.s, args.d, radii=radii, n=args.n)
        res = classify_asymptotics(q, series_estimator(q, args.integral))
        fit = f"{res.fitted_exponent:8.3f}" if res.fitted_exponent is not None else f"{'-':>8}"
        vals = ", ".join(f"{row['estimate']:.4g}" for row in res.rows)
        print(f"{c:6g} {res.label:>12} {expected_class(c):>12} {fit}  {vals}")


if __name__ == "__main__":
    main()
