"""Classify the classical peakon equations and the singular overlap family.

Reproduces the conserved-norm grid for Camassa-Holm, Degasperis-Procesi,
Novikov and modified Camassa-Holm, then shows the two-parameter
gradient-energy solution sets for equations with richer structure.
"""

from peakonlaws.conslaw import EquationSpec, classify
from peakonlaws.expr import SamplingPolicy

EQUATIONS = [
    ("Camassa-Holm", "ux", "u", {}),
    ("Degasperis-Procesi", "2*ux", "u", {}),
    ("Novikov", "u*ux", "u^2", {}),
    ("modified Camassa-Holm", "0", "u^2-ux^2", {}),
    ("singular overlap family", "a*ux/u^3", "a/u^2", {"a": 1.0}),
    ("m-L2 family, h(u)=u^2", "-u*ux", "u^2", {}),
]


def yn(verdict):
    return {True: "Y", False: "N", None: "?"}[verdict.conserved]


def main():
    policy = SamplingPolicy(seed=42)
    print(f"{'equation':<24} {'momentum':>8} {'H1':>4} {'L2(m)':>6} {'wH2':>4}   gradient-energy set")
    for name, f, g, params in EQUATIONS:
        eq = EquationSpec.from_strings(f, g, params)
        rep = classify(eq, policy)
        ge = rep.grad_energy
        if ge.kind == "point":
            desc = f"point (mu={ge.mu:.3g}, nu={ge.nu:.3g})"
        elif ge.kind == "line":
            desc = f"line through (mu={ge.mu:.3g}, nu={ge.nu:.3g}), direction {ge.direction}"
        else:
            desc = ge.kind
        print(f"{name:<24} {yn(rep.momentum):>8} {yn(rep.h1):>4} {yn(rep.l2m):>6} "
              f"{yn(rep.weighted_h2):>4}   {desc}")
        for cur in rep.fluxes:
            print(f"{'':24} flux [{cur.name}]: T = {cur.T}")


if __name__ == "__main__":
    main()
