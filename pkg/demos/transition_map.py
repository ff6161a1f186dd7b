"""Passage time through a saddle box: closed form, implicit root, simulation.

The normal form X' = 2 (b - 1) X - 2 X Y, Y' = -eps Y is entered on
Y = delta with X = C exp(-k / eps) and left on X = eta. The closed form uses
the principal Lambert W branch; the leading-order forms drop the O(1)
corrections.
"""
from canardkit import canard_formulas as cf
from canardkit import models, slowfast
from canardkit.numerics import IntegratorConfig, Section


def main():
    entry = cf.EntryParams(C=0.1, k=0.5)
    print(" eps        T formula      T root         T simulated    Y_out formula  Y_out leading")
    for eps in (0.1, 0.05, 0.025):
        s = cf.TransitionSetup(b=2.0, delta=0.5, eta=0.05, epsilon=eps)
        T = cf.transition_time_exact(s, entry)
        sys_ = models.dtcbnl(models.DtcbnlParams(s.b, eps))
        rec = slowfast.numeric_transition_map(
            sys_, (entry.x0(eps), s.delta), Section(0, s.eta, "increasing", bounds={1: (0.0, s.delta)}),
            IntegratorConfig(step=1e-5, max_time=2 * T + 10, record_stride=10 ** 6))
        print(f" {eps:<9g}  {T:<13.8f}  {cf.transition_time_root(s, entry):<13.8f}  {rec.time:<13.8f}"
              f"  {cf.exit_value_exact(s, entry):<13.6e}  {cf.exit_value_leading(s, entry.k):.6e}")


if __name__ == "__main__":
    main()
