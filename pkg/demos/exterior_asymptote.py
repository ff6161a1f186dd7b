"""Orbits starting outside the strip approach the diagonal y = x.

Uses the stiff route in coordinates (r, y) = (x - y, y) and prints |x - y|
at a few times.
"""
import numpy as np

from canardkit import models, slowfast
from canardkit.numerics import integrate_stiff


def main():
    ext = models.dtc(models.DtcParams(0.1), coords="exterior")
    ts = np.array([0.0, 5.0, 20.0, 50.0, 100.0, 200.0])
    print("start      " + "  ".join(f"t={t:<8g}" for t in ts))
    for start in ((2.0, 0.0), (-3.0, 0.0), (3.0, 0.0)):
        traj = integrate_stiff(lambda t, u: ext.field(u, t), ext.initial(start), (0.0, ts[-1]), ts,
                               jac=lambda t, u: ext.jac(u), coords=ext.coords)
        d = slowfast.asymptote_distance(traj)
        print(f"{str(start):10s} " + "  ".join(f"{v:<10.3e}" for v in d))


if __name__ == "__main__":
    main()
