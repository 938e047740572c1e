"""Off-shell verification of conserved currents against the defining
equation, including a purely spatial conservation law whose density
vanishes identically, and detection of a corrupted flux.
"""

from peakonlaws.conslaw import (
    ConservedCurrent,
    EquationSpec,
    characteristic_check,
    flux_momentum,
)
from peakonlaws.expr import SamplingPolicy, parse


def main():
    policy = SamplingPolicy(seed=42)

    # a conservation law with T = 0: the flux alone satisfies
    # D_x Phi = Q * (m_t + f*m + (g*m)_x) for arbitrary u(t,x)
    eq = EquationSpec.from_strings("-2*u*ux", "u^2-3*ux^2")
    cur = ConservedCurrent(
        "purely-spatial",
        parse("0"),
        parse("(u^3-u*ux^2-(u^2-3*ux^2)*m+utx)^2-(u^2*ux-ux^3+ut)^2"),
        parse("2*u*(ux^2-u^2)+2*(u^2-3*ux^2)*m-2*utx"),
    )
    v = characteristic_check(cur, eq, policy)
    print(f"purely spatial current: zero={v.conserved} residual={v.residual_max:.3e}")

    # the closed-form momentum current of Camassa-Holm
    ch = EquationSpec.from_strings("ux", "u")
    cur = flux_momentum(ch)
    v = characteristic_check(cur, ch, policy)
    print(f"CH momentum current:    zero={v.conserved} residual={v.residual_max:.3e}")
    print(f"  T   = {cur.T}")
    print(f"  Phi = {cur.Phi}")
    print(f"  Q   = {cur.Q}")

    # corrupting the flux must be detected, with a witness point
    bad = ConservedCurrent("corrupted", cur.T, cur.Phi + parse("u"), cur.Q)
    v = characteristic_check(bad, ch, policy)
    print(f"corrupted current:      zero={v.conserved} residual={v.residual_max:.3e}")
    print(f"  witness: {v.witness}")


if __name__ == "__main__":
    main()
