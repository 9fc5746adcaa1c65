"""lambda_0, lambda_1, the essential edge and the gap eta across a and rho."""
import argparse

from frontlab import front as fr
from frontlab import spectral as sp

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dx", type=float, default=0.02)
    args = ap.parse_args()
    g = fr.Grid(-60.0, 60.0, args.dx)
    fronts = [(f"a={a:g}", fr.analytic_front_monostable(a, g)) for a in (2.5, 3.0, 4.0, 8.0)]
    fronts += [(f"rho={r:g}", fr.analytic_front_bistable(r, g)) for r in (0.1, 0.25, 0.4)]
    print(f"{'front':>9} {'c':>8} {'lambda0':>10} {'lambda1':>10} {'edge':>9} {'eta':>9} unreliable")
    for label, f in fronts:
        r = sp.spectrum(f)
        print(f"{label:>9} {f.speed:8.5f} {r.lambda0:10.2e} {r.eigenvalues[1]:10.5f} {r.essential_edge:9.5f} {r.gap:9.5f} {r.gap_unreliable}")
