import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeinspect.planner import (
    build_instance,
    instance_from_positions,
    noon_bean_transform,
    random_instance,
    solve_atsp,
    solve_atsp_bruteforce,
    solve_exact,
    solve_via_noon_bean,
)

TWO = [("A", (0, 0, 0), (10, 0, 0)), ("B", (12, 0, 0), (20, 0, 0))]


def test_arc_costs_zero_or_at_least_m():
    inst = random_instance(4, 5)
    mat, mp = noon_bean_transform(inst)
    finite = mat[np.isfinite(mat)]
    assert np.all((finite == 0) | (finite >= mp.big_m))
    finite_costs = inst.cost_matrix[np.isfinite(inst.cost_matrix)]
    assert mp.big_m > finite_costs.sum()


def test_two_cluster_bruteforce():
    inst = instance_from_positions(TWO)
    mat, mp = noon_bean_transform(inst)
    assert mat.shape == (5, 5)  # four nodes plus the path depot
    cost, order = solve_atsp_bruteforce(mat)
    assert mp.gtsp_cost(cost) == pytest.approx(solve_exact(inst).total_cost, abs=1e-9)
    assert mp.to_tour(order, inst).total_cost == pytest.approx(solve_exact(inst).total_cost)


def test_five_cluster_mapped_tour():
    inst = random_instance(21, 5)
    mat, mp = noon_bean_transform(inst)
    cost, order = solve_atsp_bruteforce(mat)
    tour = mp.to_tour(order, inst)
    inst.check_tour(tour.entries)
    exact = solve_exact(inst).total_cost
    assert tour.total_cost == pytest.approx(exact, rel=1e-12)
    assert mp.gtsp_cost(cost) == pytest.approx(exact, rel=1e-9, abs=1e-6)


def test_held_karp_agrees_with_bruteforce():
    rng = np.random.default_rng(0)
    for n in range(2, 8):
        c = rng.uniform(0, 10, (n, n))
        c[rng.random((n, n)) < 0.2] = np.inf
        np.fill_diagonal(c, np.inf)
        a, _ = solve_atsp(c)
        b, _ = solve_atsp_bruteforce(c)
        assert (math.isinf(a) and math.isinf(b)) or a == pytest.approx(b)


def test_viaduct_via_reduction(viaduct):
    inst = build_instance(viaduct)
    assert solve_via_noon_bean(inst).total_cost == pytest.approx(solve_exact(inst).total_cost, rel=1e-12)


def test_revisit_is_not_a_valid_image():
    inst = instance_from_positions(TWO)
    _, mp = noon_bean_transform(inst)
    # depot, A1, B1, A2, B2 visits cluster A twice
    with pytest.raises(ValueError):
        mp.to_tour([4, 0, 1, 2, 3], inst)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 5))
def test_reduction_optimum_equals_exact(seed, n):
    inst = random_instance(seed, n) if n > 2 else instance_from_positions(
        [(c, *np.random.default_rng(seed).uniform(0, 50, (2, 3))) for c in "AB"]
    )
    mat, mp = noon_bean_transform(inst)
    cost, order = solve_atsp(mat)
    exact = solve_exact(inst).total_cost
    assert mp.gtsp_cost(cost) == pytest.approx(exact, rel=1e-9, abs=1e-6)
    assert mp.to_tour(order, inst).total_cost == pytest.approx(exact, rel=1e-12)
