"""Preimage fibers, covering radii, and the density budget."""

import numpy as np
import pytest

from nilflow.density import (
    BudgetError,
    DensityReport,
    covering_radius,
    density_experiment,
    preimages,
)
from nilflow.nilgroup import ManifoldPoint, identity, reduce
from tests.conftest import rand_rationals
from nilflow.nilgroup import point


@pytest.fixture
def torus_base(torus2):
    return ManifoldPoint(identity(torus2))


@pytest.fixture
def heis_base(heis):
    return ManifoldPoint(identity(heis))


def test_preimage_counts_doubling(doubling, torus_base):
    for k in (1, 2, 3):
        fib = preimages(doubling, torus_base, k)
        assert len(fib) == 4 ** k
        assert len(set(fib)) == 4 ** k


def test_preimage_counts_heisenberg(heis_am, heis_base):
    for k in (1, 2):
        fib = preimages(heis_am, heis_base, k)
        assert len(set(fib)) == 16 ** k


def test_preimages_forward_map_exactly(heis_am, heis_base):
    fib = preimages(heis_am, heis_base, 1)
    for p in fib:
        q, _ = reduce(heis_am.apply(p.rep))
        assert q == heis_base


def test_preimages_of_generic_point(heis_am, heis):
    rng = np.random.default_rng(67)
    x, _ = reduce(point(heis, rand_rationals(rng, 3)))
    fib = preimages(heis_am, x, 1)
    assert len(set(fib)) == 16
    for p in fib:
        q, _ = reduce(heis_am.apply(p.rep))
        assert q == x


def test_invertible_map_single_preimage(cat_map, torus_base):
    for k in (1, 2, 3):
        fib = preimages(cat_map, torus_base, k)
        assert len(fib) == 1


def test_covering_radius_regular_grid(torus2):
    # the 2^-k lattice on the 2-torus has covering radius sqrt(2)/2 * 2^-k
    for k in (1, 2, 3):
        n = 2 ** k
        pts = np.stack(np.meshgrid(*(np.arange(n) / n,) * 2),
                       axis=-1).reshape(-1, 2)
        r = covering_radius(pts, algebra=torus2, grid_n=129)
        assert r == pytest.approx(np.sqrt(2) / 2 / n, rel=0.05)


def test_covering_radius_single_point(torus2):
    r = covering_radius(np.zeros((1, 2)), algebra=torus2, grid_n=65)
    # worst point of the unit 2-torus sits half a diagonal away
    assert 0.5 <= r <= np.sqrt(2) / 2 + 0.01


def test_density_experiment_report(heis_am, heis_base):
    rep = density_experiment(heis_am, heis_base, 3)
    assert rep.counts == [16, 256, 4096]
    assert all(b < a for a, b in zip(rep.radii, rep.radii[1:]))
    ratios = [b / a for a, b in zip(rep.radii, rep.radii[1:])]
    assert all(r <= 0.8 for r in ratios)
    assert 0 < rep.fitted_mu < 1
    csv = rep.to_csv()
    assert csv.splitlines()[0] == "k,count,covering_radius,ratio"
    assert "fitted_mu" in csv.splitlines()[-1]


def test_density_experiment_requires_depth(heis_am, heis_base):
    with pytest.raises(ValueError):
        density_experiment(heis_am, heis_base, 1)


def test_budget_cap(monkeypatch, heis_am, heis_base):
    monkeypatch.setenv("NILFLOW_MAX_POINTS", "100")
    with pytest.raises(BudgetError):
        density_experiment(heis_am, heis_base, 2)


def test_budget_env_must_be_integer(monkeypatch, heis_am, heis_base):
    monkeypatch.setenv("NILFLOW_MAX_POINTS", "lots")
    with pytest.raises(BudgetError):
        density_experiment(heis_am, heis_base, 2)
