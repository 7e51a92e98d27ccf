import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import centre
from oracles import independent_sets
from pshardcore.contour_engine import make_contour
from pshardcore.errors import NoRootInBracket, UnsupportedHost
from pshardcore.graph_core import EVEN, ODD, ball
from pshardcore.hardcore_solver import TildeWeights
from pshardcore.lattice_gallery import HostSpec, generate
from pshardcore.phase_diagram import (
    coexistence_solve,
    cutoff_parameter,
    free_energy_estimate,
    iterate_psi,
    odd_activity,
    prepare,
    smoothstep_cutoff,
    truncated_weight,
)


@pytest.fixture(scope="module")
def square_ctx():
    return prepare(HostSpec("grid_zd", side=34), m=6)


@pytest.fixture(scope="module")
def dice_ctx():
    return prepare(HostSpec("dice", side=34), m=6)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-5, max_value=20, allow_nan=False), st.floats(min_value=0.01, max_value=5))
def test_cutoff_shape(s, kappa):
    value = smoothstep_cutoff(s, kappa)
    assert 0.0 <= value <= 1.0
    if s <= kappa:
        assert value == 1.0
    if s >= 2 * kappa:
        assert value == 0.0
    assert smoothstep_cutoff(s + 0.01, kappa) <= value


@pytest.mark.parametrize("kappa", [0.3, 1.0, 4.0])
def test_cutoff_is_continuously_differentiable(kappa):
    h = 1e-6
    for knot in (kappa, 2 * kappa):
        left = (smoothstep_cutoff(knot, kappa) - smoothstep_cutoff(knot - h, kappa)) / h
        right = (smoothstep_cutoff(knot + h, kappa) - smoothstep_cutoff(knot, kappa)) / h
        # a one-sided quotient of a cubic with zero slope is off by at most 3h/kappa^2
        slack = 3 * h / kappa**2 + 1e-9
        assert abs(left) <= slack and abs(right) <= slack
    assert smoothstep_cutoff(1.5 * kappa, kappa) == pytest.approx(0.5)


def test_truncated_weight_rules():
    window, basis, sym = generate(HostSpec("grid_zd", side=12))
    v = centre(window, EVEN)
    star = make_contour(window.incident[v], basis)
    outer = make_contour(ball(window, v, 2).boundary, basis)
    assert len(outer.interior) > 1
    table = TildeWeights(basis, 50.0, 50.0)
    degrees = sym.degrees
    assert truncated_weight(star, table[star], 10.0, 0.1, degrees) == table[star]
    assert truncated_weight(outer, table[outer], None, 0.1, degrees) == table[outer]
    assert truncated_weight(outer, table[outer], 0.0, 0.1, degrees) == table[outer]
    # the even phase loses badly: even contours are cut off entirely
    assert truncated_weight(outer, table[outer], 5.0, 0.1, degrees) == 0.0
    # a negative gap only damps odd contours
    assert truncated_weight(outer, table[outer], -5.0, 0.1, degrees) == table[outer]


def test_odd_activity_scaling():
    assert odd_activity(16.0, 1.0, (4, 4)) == 16.0
    assert odd_activity(10.0, 0.5, (3, 6)) == pytest.approx(50.0)


def test_iteration_invariants(dice_ctx):
    run = iterate_psi(dice_ctx, 60.0, 1.3)
    first = run.states[0]
    assert first.psi_e == first.q_e == math.log(60.0) / 3
    assert first.psi_o == first.q_o
    for s in run.states:
        assert min(s.a_e, s.a_o) == 0.0
        assert s.a_e >= 0.0 and s.a_o >= 0.0
        assert s.kappa == pytest.approx(cutoff_parameter(dice_ctx, 60.0))
    assert run.symmetry_gap < 1e-12


@pytest.mark.parametrize("lam", [1e3, 1e4])
def test_leading_bulk_term_is_one_star(dice_ctx, lam):
    """The only order-1/lambda cluster through a vertex is the star at that vertex."""
    st_ = iterate_psi(dice_ctx, lam, 1.0).states[-1]
    lam_o = odd_activity(lam, 1.0, dice_ctx.degrees)
    assert st_.bulk_e * lam == pytest.approx(1.0, abs=10 / lam)
    assert st_.bulk_o * lam_o == pytest.approx(1.0, abs=10 / lam)


def test_square_grid_coexistence_is_symmetric(square_ctx):
    for lam in (50.0, 400.0):
        point = coexistence_solve(square_ctx, lam, tol=1e-12)
        assert abs(point.rho - 1.0) <= 1e-10
        assert abs(point.psi_e - point.psi_o) <= 1e-12


def test_decorated_host_refused():
    with pytest.raises(UnsupportedHost):
        prepare(HostSpec("decorated_zd2", side=20))


def test_bracket_without_root(square_ctx):
    with pytest.raises(NoRootInBracket):
        coexistence_solve(square_ctx, 50.0, bracket=(1.5, 2.0))


def test_dice_shift_decays(dice_ctx):
    shifts = []
    for lam in (50.0, 100.0, 200.0, 400.0):
        p = coexistence_solve(dice_ctx, lam)
        shifts.append(p.log_lam_o - 2 * math.log(lam))
        assert abs(p.residual) < 1e-9
    assert all(a > b > 0 for a, b in zip(shifts, shifts[1:]))
    products = [lam * s for lam, s in zip((50, 100, 200, 400), shifts)]
    assert all(a < b for a, b in zip(products, products[1:]))


def test_free_energy_counts_independent_sets(grid):
    window, basis, _ = grid
    v = centre(window, EVEN)
    points = free_energy_estimate(window, basis, 1, 1, None, [1, 2], centre=v)
    for p in points:
        patch = ball(window, v, p.radius)
        count = sum(1 for _ in independent_sets(window, patch.vertices, frozenset(), frozenset()))
        assert p.value == pytest.approx(math.log(count) / len(patch.induced_edges), rel=1e-12)
    assert points[1].surface_ratio < points[0].surface_ratio
    exact_half = free_energy_estimate(window, basis, Fraction(1, 2), Fraction(1, 2), EVEN, [2], centre=v)[0]
    assert math.isfinite(exact_half.value)
