import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import centre
from oracles import independent_sets as brute_sets
from oracles import weight_of
from pshardcore.errors import ActivityTooSmall, CapExceeded, ConfigError
from pshardcore.graph_core import EVEN, ODD, Patch, ball
from pshardcore.hardcore_solver import (
    Sampler,
    TildeWeights,
    activity,
    boundary_set,
    contour_Z,
    exact_Z,
    external_Z,
    fptas_log_Z,
    host_threshold,
    independent_sets,
    kp_chain_holds,
    lambda_star,
    marginal,
    polymer_Z,
    sample,
    truncation_order,
)
from pshardcore.lattice_gallery import HostSpec, generate


def _oracle_Z(window, patch, bcond, lam_e, lam_o):
    vac = bcond.forced - bcond.occupied
    return sum(weight_of(window, s, lam_e, lam_o) for s in brute_sets(window, patch.vertices, bcond.occupied, vac))


def test_cross_fixture_value(grid):
    window, basis, _ = grid
    cross = ball(window, centre(window, EVEN), 1)
    assert exact_Z(cross, EVEN, 5, 9, basis) == 5
    assert boundary_set(cross, EVEN, basis).forced == cross.vertices


def test_forced_set_is_one_layer(grid):
    window, basis, _ = grid
    v = centre(window)
    x, y = window.coords[v]
    square = Patch(window, frozenset(window.coords.index((x + a, y + b)) for a in range(-2, 4) for b in range(-2, 4)))
    assert len(boundary_set(square, EVEN, basis).free) == 16


@pytest.mark.parametrize("bc, radius", [(EVEN, 2), (ODD, 2), (None, 2), (EVEN, 3), (ODD, 3)])
def test_exact_Z_matches_subset_listing(grid, bc, radius):
    window, basis, _ = grid
    patch = ball(window, centre(window), radius)
    lam_e, lam_o = Fraction(3, 2), Fraction(7)
    bcond = boundary_set(patch, bc, basis)
    assert exact_Z(patch, bc, lam_e, lam_o, basis) == _oracle_Z(window, patch, bcond, lam_e, lam_o)
    assert len(list(independent_sets(patch, bc, basis))) == len(
        list(brute_sets(window, patch.vertices, bcond.occupied, bcond.forced - bcond.occupied))
    )


def test_exact_Z_with_pins(dice):
    window, basis, _ = dice
    patch = ball(window, centre(window), 2)
    v = centre(window)
    lam = Fraction(2)
    z = exact_Z(patch, EVEN, lam, lam, basis)
    z_on = exact_Z(patch, EVEN, lam, lam, basis, occupied=(v,))
    z_off = exact_Z(patch, EVEN, lam, lam, basis, vacant=(v,))
    assert z_on + z_off == z


@pytest.mark.parametrize("host", ["grid", "dice"])
def test_four_partition_functions_agree(host, request):
    window, basis, _ = request.getfixturevalue(host)
    patch = ball(window, centre(window), 3 if host == "grid" else 2)
    for lam_e, lam_o in ((Fraction(1, 2), Fraction(10)), (Fraction(3), Fraction(3))):
        for bc in (EVEN, ODD):
            z = exact_Z(patch, bc, lam_e, lam_o, basis)
            assert contour_Z(patch, bc, lam_e, lam_o, basis) == z
            assert polymer_Z(patch, bc, lam_e, lam_o, basis) == z
            assert external_Z(patch, bc, lam_e, lam_o, basis) == z


def test_tilde_weight_of_star_is_plain_weight(grid):
    window, basis, _ = grid
    from pshardcore.contour_engine import make_contour

    g = make_contour(window.incident[centre(window)], basis)
    table = TildeWeights(basis, Fraction(4), Fraction(9))
    # a one-vertex interior holds no contours, so both normalised interior sums are 1
    assert table[g] == Fraction(1, 4)


def test_fkg_boundary_ordering(grid):
    """Even boundary raises the occupation of an even vertex compared with odd boundary."""
    window, basis, _ = grid
    patch = ball(window, centre(window), 3)
    v = centre(window, EVEN)
    for lam in (Fraction(1), Fraction(4)):
        assert marginal(patch, EVEN, lam, lam, v, basis) >= marginal(patch, None, lam, lam, v, basis)
        assert marginal(patch, None, lam, lam, v, basis) >= marginal(patch, ODD, lam, lam, v, basis)


def test_marginal_monotone_in_activity(grid):
    window, basis, _ = grid
    patch = ball(window, centre(window), 3)
    v = centre(window, EVEN)
    values = [marginal(patch, EVEN, lam, lam, v, basis) for lam in (1, 2, 5, 20)]
    assert values == sorted(values)


def test_lambda_star_for_square_grid():
    th = lambda_star(6, 4, 4)
    assert kp_chain_holds(6, th.tau, 4)
    assert not kp_chain_holds(6, th.tau * (1 - 1e-9), 4)
    assert abs(th.log_lambda - 4 * (th.tau + 3)) < 1e-12
    assert 59.77 < th.log_lambda < 59.78
    assert math.log(th.value) >= th.log_lambda


def test_host_threshold_reads_basis(grid):
    _, basis, _ = grid
    th = host_threshold(basis)
    assert (th.D, th.degree, th.min_size) == (6, 4, 4)


def test_truncation_order_grows_with_precision():
    assert truncation_order(100, 1e-3, 12.0, 4) <= truncation_order(100, 1e-9, 12.0, 4)
    assert truncation_order(1, 0.5, 100.0, 4) == 4


def test_activity_parsing():
    assert activity("3/2") == Fraction(3, 2)
    assert activity(2) == Fraction(2)
    assert isinstance(activity("2", exact=False), float)
    with pytest.raises(ConfigError):
        activity(0)


def test_fptas_refuses_small_activity(grid):
    window, basis, _ = grid
    with pytest.raises(ActivityTooSmall):
        fptas_log_Z(ball(window, centre(window), 3), EVEN, 100, 100, 0.01, basis)


def test_fptas_at_threshold(grid):
    window, basis, _ = grid
    patch = ball(window, centre(window), 3)
    lam = Fraction(host_threshold(basis).value)
    log_z, cert = fptas_log_Z(patch, EVEN, lam, lam, 1e-6, basis)
    z = exact_Z(patch, EVEN, lam, lam, basis)
    xi = z / lam ** patch.parity_count(EVEN) - 1
    assert abs(math.log1p(float(xi)) - cert.log_xi) <= cert.tail_bound
    assert cert.certified and cert.kp.passed
    assert abs(log_z - math.log(z)) <= 1e-12 * abs(log_z) + cert.tail_bound


def test_independent_set_cap(grid12):
    window, basis, _ = grid12
    with pytest.raises(CapExceeded):
        list(independent_sets(ball(window, centre(window), 4), EVEN, basis, cap=10))


def test_sampler_refuses_uncertified(grid):
    _, basis, _ = grid
    with pytest.raises(ActivityTooSmall):
        Sampler(basis, 5, 5, 0.01)


def test_sample_is_seeded(grid):
    window, basis, _ = grid
    patch = ball(window, centre(window), 3)
    a = sample(patch, EVEN, 2, 2, 0.01, 11, basis, n=20, strict=False)
    b = sample(patch, EVEN, 2, 2, 0.01, 11, basis, n=20, strict=False)
    assert a == b


def test_sampler_law_on_small_patch(grid):
    """Empirical law against exact probabilities; slack of four standard errors per state."""
    window, basis, _ = grid
    patch = ball(window, centre(window), 3)
    lam = Fraction(2)
    bcond = boundary_set(patch, EVEN, basis)
    states = list(brute_sets(window, patch.vertices, bcond.occupied, bcond.forced - bcond.occupied))
    weights = [weight_of(window, s, lam, lam) for s in states]
    total = sum(weights)
    n = 4000
    sampler = Sampler(basis, lam, lam, 0.01, strict=False, exact_below=1)
    rng = random.Random(5)
    counts = Counter(sampler.draw(patch, EVEN, rng) for _ in range(n))
    assert set(counts) <= set(states)
    for s, w in zip(states, weights):
        p = float(w / total)
        assert abs(counts[s] / n - p) <= 4 * math.sqrt(p * (1 - p) / n) + 1e-3


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=12), st.sampled_from([EVEN, ODD]))
def test_contour_Z_equals_exact_for_random_activities(a, b, bc):
    window, basis, _ = generate(HostSpec("grid_zd", side=10))
    patch = ball(window, centre(window), 3)
    lam_e, lam_o = Fraction(a, 3), Fraction(b, 2)
    assert contour_Z(patch, bc, lam_e, lam_o, basis) == exact_Z(patch, bc, lam_e, lam_o, basis)


def test_fptas_on_patch_without_contours(grid):
    window, basis, _ = grid
    v = centre(window, EVEN)
    pair = Patch(window, frozenset({v, window.adjacency[v][0]}))
    lam = Fraction(host_threshold(basis).value)
    log_z, cert = fptas_log_Z(pair, EVEN, lam, lam, 0.1, basis)
    assert cert.polymers == 0 and not cert.admissible
    assert log_z == pytest.approx(math.log(exact_Z(pair, EVEN, lam, lam, basis)))
