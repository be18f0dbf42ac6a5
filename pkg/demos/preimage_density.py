"""Preimage equidistribution: count fibers and watch covering radii decay.

For a totally non-invertible hyperbolic automorphism the preimage sets
Psi^{-k}(x) become epsilon-dense at a geometric rate.  An invertible
linear part is the sharp obstruction: the cat map has a single preimage
per point and its covering radius never moves.

Run: python3 demos/preimage_density.py
"""

from nilflow.cli import fixture_path, parse_system
from nilflow.density import density_experiment
from nilflow.endo import AutoMap
from nilflow.liealg import abelian
from nilflow.nilgroup import ManifoldPoint, identity
from nilflow.ratcore import RatMatrix


def show(title, report):
    print(title)
    print("  k  count  covering radius  ratio")
    for k, c, r in zip(report.ks, report.counts, report.radii):
        print(f"  {k}  {c:5d}  {r:15.6f}")
    print(f"  fitted contraction ratio: {report.fitted_mu:.4f}")
    print()


def main():
    defn = parse_system(fixture_path("heisenberg"))
    base = ManifoldPoint(identity(defn.algebra))
    show("Heisenberg fixture (degree 16 per step):",
         density_experiment(defn.automap, base, 4))

    torus = abelian(2)
    base2 = ManifoldPoint(identity(torus))
    doubling = AutoMap(torus, RatMatrix([[2, 0], [0, 2]]))
    show("Torus doubling (4 preimages per step):",
         density_experiment(doubling, base2, 6))

    cat = AutoMap(torus, RatMatrix([[2, 1], [1, 1]]))
    show("Cat map (invertible, no density):",
         density_experiment(cat, base2, 4))


if __name__ == "__main__":
    main()
