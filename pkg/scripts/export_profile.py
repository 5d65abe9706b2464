"""Write the log-periodic profile of a Cantor drum next to sampled tube/t^(N+D) values."""
import argparse
import csv
import math
import sys

import numpy as np

from fzeta.drums import cantor, make_tube, tube_volume
from fzeta.minkowski import periodic_profile


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=0.25)
    ap.add_argument("--b", type=float, default=2.0)
    ap.add_argument("--periods", type=int, default=2)
    ap.add_argument("--samples", type=int, default=256)
    ap.add_argument("--start-level", type=int, default=25, help="t starts at a^-level")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    drum = cantor(args.a, args.b)
    prof = periodic_profile(drum)
    d = drum.dimension
    tau0 = args.start_level * math.log(1.0 / args.a)
    tau = tau0 + np.linspace(0.0, args.periods * prof.period, args.samples * args.periods)
    t = np.exp(tau)
    ratio = tube_volume(make_tube(drum), t) / t ** (2.0 + d)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["tau", "profile", "sampled", "gap"])
    for x, g, r in zip(tau, prof(tau), ratio):
        w.writerow([repr(float(x)), repr(float(g)), repr(float(r)), repr(float(r - g))])
    if fh is not sys.stdout:
        fh.close()
    print(f"period {prof.period:.6f}  min {prof.min_value:.10f}  max {prof.max_value:.10f}  "
          f"worst gap {np.max(np.abs(ratio - prof(tau))):.2e}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
