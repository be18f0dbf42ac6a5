"""Periodic data rigidity at small perturbation amplitude.

Two perturbations of the same hyperbolic automorphism, same size, very
different fates:

  * F = G o Psi o G^{-1} is smoothly conjugate to Psi by construction, so
    every periodic orbit must carry the algebraic stable exponent
    lambda_s(Psi).
  * a generic shear of the same amplitude has no reason to be conjugate,
    and its periodic exponents drift away from lambda_s immediately.

The conjugacy solver tells the same story from the other side: it finds
the displacement field relating the perturbed map to its linear part and
reports how far the map sits from the algebraic model.

Run: python3 demos/rigidity_lab.py
"""

import math

from nilflow.cli import fixture_path, parse_system
from nilflow.dynlab import (
    ConjugatedMap,
    PerturbedMap,
    rigidity_experiment,
    solve_conjugacy,
)


def main():
    defn = parse_system(fixture_path("heisenberg"))
    am = defn.automap
    lam = math.log(3 - math.sqrt(5))
    print(f"algebraic stable exponent: {lam:.12f}")
    print()

    G = ConjugatedMap(am, amplitude=0.05)
    rep = rigidity_experiment(G, 3)
    print("conjugated control, eps = 0.05, periods <= 3:")
    print(f"  orbits: {len(rep.periods)}")
    print(f"  exponent spread:  {rep.spread:.3e}")
    print(f"  worst |deviation| from lambda_s: {rep.deviation:.3e}")
    print()

    F = PerturbedMap(am, amplitude=0.05)
    rep = rigidity_experiment(F, 3)
    print("generic shear, eps = 0.05, periods <= 3:")
    print(f"  orbits: {len(rep.periods)}")
    print(f"  exponent spread:  {rep.spread:.3e}")
    print(f"  worst |deviation| from lambda_s: {rep.deviation:.3e}")
    print()

    F = PerturbedMap(am, amplitude=0.01)
    fld = solve_conjugacy(F, grid_n=17)
    print("conjugacy solve for the eps = 0.01 shear:")
    print(f"  sweeps: {len(fld.history)}")
    print(f"  final residual: {fld.residual:.3e}")
    print(f"  sup displacement from identity: {fld.sup_displacement:.4f}")
    print()
    print("The displacement stays of the order of eps, but the periodic")
    print("exponents above already rule out a smooth conjugacy for the")
    print("generic shear: matching periodic data is not optional, it is")
    print("the whole dichotomy.")


if __name__ == "__main__":
    main()
