"""Per-passage delays of the double transcritical system grow.

The orbit from (1e-3, 0) bounces between the invariant lines x = -1 and
x = +1. Each time it lingers near the repelling part of a line for longer
than the time before. Integrated in strip coordinates x = tanh(s), which
keep the exponentially thin approach resolvable.
"""
from canardkit import models, slowfast
from canardkit.numerics import IntegratorConfig, integrate


def main():
    p = models.DtcParams(0.1)
    strip = models.dtc(p, coords="strip")
    traj, _ = integrate(strip, strip.initial([1e-3, 0.0]),
                        IntegratorConfig(step=1e-5, max_time=800.0, record_stride=100))
    traj = strip.physical(traj)
    for br in slowfast.critical_set(models.dtc(p), (-20.0, 20.0), 401):
        if br.label == "y=x":
            continue
        recs = [r for r in slowfast.measure_delays(traj, br, 0.05) if r.complete]
        print(f"near {br.label}:")
        for r in recs:
            print(f"  passage {r.passage_index}: t = {r.entry_time:8.2f} .. {r.exit_time:8.2f}"
                  f"  delay {r.duration:7.2f}")


if __name__ == "__main__":
    main()
