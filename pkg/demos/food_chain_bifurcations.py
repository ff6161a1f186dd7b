"""Fast-subsystem structure of the dimensionless food chain.

Prints the three bifurcation values of the predator level z and the fast
equilibria with their types on either side of each one.
"""
from canardkit import models, slowfast


def main():
    p = models.TABLE_PARAMS
    pts = {b.kind: b.slow_value for b in slowfast.find_bifurcations_tritrophic(p)}
    for kind, z in pts.items():
        print(f"{kind:28s} z = {z:.10f}")
    print(f"closed form z_T = {models.z_T(p):.10f}")
    for z in sorted(pts.values()):
        for side, zz in (("below", z - 1e-4), ("above", z + 1e-4)):
            eq = slowfast.tritrophic_fast_equilibria(p, zz)
            desc = ", ".join(f"({x:.3f}, {y:.3f}) {c}" for (x, y), c in eq)
            print(f"  {side} {z:.6f}: {desc}")


if __name__ == "__main__":
    main()
