"""Euclidean against sup-norm tube volumes, and the decay rate of their difference."""
import argparse
import csv
import sys

import numpy as np
from scipy import stats

from fzeta.constructions import build_algebraic_qp
from fzeta.drums import Norm, cantor, make_tube, norm_difference, power_tail, tube_volume

DRUMS = {
    "powertail-2": lambda: power_tail(2.0),
    "cantor-1/4-2": lambda: cantor(0.25, 2.0),
    "algebraic-2": lambda: build_algebraic_qp(2, -2.5)[0],
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-min", type=float, default=1e2)
    ap.add_argument("--t-max", type=float, default=1e5)
    ap.add_argument("--points", type=int, default=31)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    t = np.geomspace(args.t_min, args.t_max, args.points)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["drum", "t", "sup", "euclid", "difference"])
    for name, make in DRUMS.items():
        drum = make()
        sup = tube_volume(make_tube(drum, Norm.SUP), t)
        euc = tube_volume(make_tube(drum, Norm.EUCLID), t)
        diff = norm_difference(drum, t)
        for row in zip(t, sup, euc, diff):
            w.writerow([name] + [repr(float(v)) for v in row])
        slope = stats.linregress(np.log(t), np.log(diff)).slope
        print(f"{name}: D = {drum.dimension:.4f}, difference slope {slope:.3f}", file=sys.stderr)
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
