"""Argument-principle pole search against the predicted lattice for a preset drum."""
import argparse
import csv
import sys
import time

from fzeta.complex_dims import Window, locate_poles, pole_lattice
from fzeta.verify import PRESETS
from fzeta.zeta import ZetaHandle, ZetaKind


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="cantor-1/4-2", choices=sorted(PRESETS))
    ap.add_argument("--kind", default="distance", choices=["distance", "tube"])
    ap.add_argument("--height", type=float, default=20.0, help="search |Im s| <= height")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    drum = PRESETS[args.preset]()
    d = drum.dimension
    window = Window(d - 1.0 + 0.0123, d + 0.5 + 0.0123, -args.height, args.height)
    start = time.perf_counter()
    found = locate_poles(ZetaHandle(drum, ZetaKind(args.kind)), window)
    elapsed = time.perf_counter() - start
    lattice = pole_lattice(drum, window, args.kind)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["re", "im", "res_re", "res_im", "lattice_re", "lattice_im", "distance", "residue_error"])
    for p in found:
        q = min(lattice, key=lambda c: abs(c.location - p.location)) if lattice else None
        if q is None:
            w.writerow([p.location.real, p.location.imag, p.residue.real, p.residue.imag, "", "", "", ""])
            continue
        w.writerow([repr(p.location.real), repr(p.location.imag), repr(p.residue.real),
                    repr(p.residue.imag), repr(q.location.real), repr(q.location.imag),
                    repr(abs(p.location - q.location)), repr(abs(p.residue - q.residue))])
    if fh is not sys.stdout:
        fh.close()
    print(f"{len(found)} poles found, {len(lattice)} predicted, {elapsed:.2f} s", file=sys.stderr)
    return 0 if len(found) == len(lattice) else 1


if __name__ == "__main__":
    sys.exit(main())
