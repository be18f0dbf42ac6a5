"""Tour of the exact layer: build algebras, check automorphisms, factor
spectra.

Run: python3 demos/algebra_tour.py
"""

import sys

from nilflow.cli import cmd_analyze, fixture_path, parse_system


def main():
    for name in ("heisenberg", "example5d"):
        defn = parse_system(fixture_path(name))
        print("=" * 60)
        cmd_analyze(defn, sys.stdout)
        print()

    print("=" * 60)
    print("The Heisenberg report shows the smallest interesting case: the")
    print("horizontal block [[4,2],[2,2]] has spectrum 3 +- sqrt(5), both")
    print("non-units, so preimage sets of the induced endomorphism spread")
    print("out exponentially fast; the single stable eigendirection gives")
    print("lambda_s = ln(3 - sqrt 5) as the rigid periodic exponent.")
    print()
    print("The 5-dimensional example is hyperbolic but its horizontal")
    print("block factors as (x - 2)(x^2 - 3x + 1), and the quadratic has")
    print("unit roots: the map fails total non-invertibility, one of the")
    print("two hypotheses that drive both density and rigidity.")


if __name__ == "__main__":
    main()
