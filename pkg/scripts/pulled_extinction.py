"""KPP (a = 0) component U 1_{[-5,5]}: window max and ray max against time."""
import argparse

from frontlab import analysis as an
from frontlab import front as fr
from frontlab import reaction as rx
from frontlab import sim

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=float, default=200.0)
    ap.add_argument("--dx", type=float, default=0.02)
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--out", default="pulled_extinction.csv")
    args = ap.parse_args()
    front = fr.solve_front(rx.monostable_kpp(0.0), fr.Grid(-100.0, 100.0, args.dx))
    s = sim.init_component(front, sim.FrontIndicator(-5.0, 5.0))
    obs = [an.observe_window_max(front), an.observe_ray_max(front, 1.0), an.observe_W(front)]
    series, _ = sim.evolve(s, args.T, obs, stride=max(1, round(5.0 / args.dt)), dt=args.dt)
    series.to_csv(args.out)
    for t, rec in zip(series.times[::4], series.records[::4]):
        print(f"t = {t:7.2f}  " + "  ".join(f"{k} = {v:.3e}" for k, v in rec.items()))
