"""p(U 1_{[-1,1]}) and p(U 1_{x<0}) across the pushed range a > 2; writes a CSV."""
import argparse

import numpy as np

from frontlab import analysis as an
from frontlab import front as fr
from frontlab.sim import FrontIndicator, FrontLeftOf

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", default="2.05,2.1,2.25,2.5,3,4,6,8,16")
    ap.add_argument("--dx", type=float, default=0.01)
    ap.add_argument("--out", default="proportion_sweep.csv")
    args = ap.parse_args()
    a = [float(v) for v in args.a.split(",")]
    g = fr.Grid(-60.0, 60.0, args.dx)
    window = an.proportion_sweep(a, FrontIndicator(-1.0, 1.0), g)
    half = an.proportion_sweep(a, FrontLeftOf(0.0), g)
    table = np.column_stack([window, half[:, 1]])
    np.savetxt(args.out, table, delimiter=",", header="a,p_window,p_left_half", comments="", fmt="%.10g")
    for row in table:
        print("a = %-6g p[-1,1] = %.6f  p(x<0) = %.6f" % tuple(row))
