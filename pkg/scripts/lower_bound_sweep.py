#!/usr/bin/env python3
"""Sweep the hard block-diagonal instance: brute-force best c-column error
vs the 1 + k/(2c) lower-bound prediction.

For each c the script exhaustively searches all c-subsets of columns and
reports the ratio of the best achievable span-restricted rank-k error to the
SVD optimum, next to the asymptotic prediction.

    python3 scripts/lower_bound_sweep.py --n 4 --k 1 --max-c 3
"""

import argparse

from optcur.instances import gen_adversarial, brute_force_best_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4, help="block width")
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=1e-10)
    ap.add_argument("--max-c", type=int, default=3)
    args = ap.parse_args()

    inst = gen_adversarial(args.n, args.k, args.alpha)
    print("instance: t=%d, ell=%d, opt^2=%.6f" % (inst.t, inst.ell,
                                                  inst.opt_sq))
    print("%4s %12s %12s %14s" % ("c", "best err^2", "ratio",
                                  "1 + k/(2c)"))
    for c in range(args.k, args.max_c + 1):
        subset, best = brute_force_best_columns(inst.A, c, args.k)
        print("%4d %12.6f %12.6f %14.6f   cols=%s" %
              (c, best, best / inst.opt_sq,
               1.0 + args.k / (2.0 * c), list(subset)))


if __name__ == "__main__":
    main()
