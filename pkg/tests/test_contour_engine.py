import itertools
from collections import Counter
from fractions import Fraction

import pytest

from conftest import centre
from oracles import aux_neighbours, connected_edge_sets, independent_sets, is_valid_contour, local_region, weight_of
from pshardcore.contour_engine import (
    admissible_patch,
    classify_set,
    compatible,
    contours_from_independent_set,
    contours_in,
    enumerate_contours,
    independent_set_from_contours,
    make_contour,
    precedes,
    weight,
)
from pshardcore.errors import (
    BoundaryViolation,
    IncompatiblePair,
    InvalidFamily,
    NotBasisConnected,
    ParityViolation,
    WindowTooSmall,
)
from pshardcore.graph_core import EVEN, ODD, Patch, ball
from pshardcore.hardcore_solver import boundary_set
from pshardcore.lattice_gallery import HostSpec, generate


def star(window, basis, v):
    return make_contour(window.incident[v], basis)


def test_star_at_even_vertex(grid):
    window, basis, _ = grid
    v = centre(window, EVEN)
    g = star(window, basis, v)
    assert g.label == EVEN and g.int_o == {v} and not g.int_e
    assert (g.b_e, g.b_o) == (1, 0)
    assert weight(g, 7, 7) == Fraction(1, 7)
    assert weight(g, 1, 1) == 1


def test_star_at_odd_vertex(grid):
    window, basis, _ = grid
    v = centre(window, ODD)
    g = star(window, basis, v)
    assert g.label == ODD and (g.b_e, g.b_o) == (0, 1)
    assert weight(g, 2, 5) == Fraction(1, 5)


def test_plaquette_and_far_stars_rejected(grid):
    window, basis, _ = grid
    with pytest.raises(ParityViolation):
        make_contour(basis.cycles[40], basis)
    a = window.incident[window.coords.index((3, 3))]
    b = window.incident[window.coords.index((6, 6))]
    with pytest.raises(NotBasisConnected):
        make_contour(set(a) | set(b), basis)


def test_contour_near_frame_refused(grid):
    window, basis, _ = grid
    v = window.coords.index((1, 2))
    with pytest.raises(WindowTooSmall):
        make_contour(window.incident[v], basis)


def test_compatibility(grid12):
    window, basis, _ = grid12
    at = lambda x, y: star(window, basis, window.coords.index((x, y)))  # noqa: E731
    g = at(4, 4)
    assert not compatible(g, g)
    assert compatible(at(3, 3), at(7, 7))
    assert not compatible(at(4, 4), at(5, 5))
    assert compatible(at(3, 3), at(7, 7)) and not (at(3, 3).edges & at(7, 7).edges)


def test_order_on_nested_contours(grid12):
    window, basis, _ = grid12
    v = window.coords.index((6, 6))
    inner = star(window, basis, v)
    box = Patch(window, ball(window, v, 3).vertices)
    outer = make_contour(box.boundary & set().union(*(window.incident[u] for u in box.vertices)), basis)
    assert precedes(inner, outer)
    assert not precedes(outer, inner)
    assert inner.interior < outer.interior
    far = star(window, basis, window.coords.index((3, 9)))
    with pytest.raises(IncompatiblePair):
        precedes(inner, star(window, basis, window.coords.index((7, 7))))
    assert not precedes(far, inner) and not precedes(inner, far)


def test_order_laws_on_enumerated_contours(grid12):
    window, basis, _ = grid12
    patch = ball(window, centre(window), 4)
    cs = contours_in(patch, basis)
    pairs = [(a, b) for a in cs for b in cs if a is not b and compatible(a, b)]
    rel = {(a.key, b.key) for a, b in pairs if precedes(a, b)}
    for a, b in pairs:
        if (a.key, b.key) in rel:
            assert (b.key, a.key) not in rel
            assert a.interior < b.interior
    for g in cs:
        assert (g.key, g.key) not in rel
    by_key = {g.key: g for g in cs}
    for (a, b), (c, d) in itertools.product(rel, rel):
        if b == c and compatible(by_key[a], by_key[d]):
            assert (a, d) in rel


def test_classify_far_opposite_stars(grid12):
    window, basis, _ = grid12
    a = star(window, basis, window.coords.index((3, 3)))
    b = star(window, basis, window.coords.index((7, 8)))
    assert a.label != b.label
    cs = classify_set([a, b])
    assert cs.pairwise_compatible and not cs.matching and cs.external_parity == "mixed"
    single = classify_set([a])
    assert single.matching and single.external == (a,)
    assert classify_set([]).matching


def test_bijection_examples(grid):
    window, basis, _ = grid
    v = centre(window, EVEN)
    patch = ball(window, v, 3)
    evens = frozenset(u for u in patch.vertices if window.parity[u] == EVEN)
    assert len(contours_from_independent_set(evens, patch, EVEN, basis)) == 0
    cs = contours_from_independent_set(evens - {v}, patch, EVEN, basis)
    assert [g.key for g in cs.contours] == [tuple(sorted(window.incident[v]))]
    assert independent_set_from_contours(cs, patch, EVEN, basis) == evens - {v}
    assert independent_set_from_contours([], patch, EVEN, basis) == evens
    with pytest.raises(BoundaryViolation):
        contours_from_independent_set(evens - {min(evens)}, patch, EVEN, basis)
    odd_star = star(window, basis, window.adjacency[v][0])
    with pytest.raises(InvalidFamily):
        independent_set_from_contours([odd_star], patch, EVEN, basis)


@pytest.mark.parametrize("host", ["grid", "dice"])
def test_weight_identity(host, request):
    """Weight of every admissible set equals the ground weight times the product of contour weights."""
    window, basis, _ = request.getfixturevalue(host)
    patch = ball(window, centre(window), 3 if host == "grid" else 2)
    lam_e, lam_o = Fraction(3), Fraction(5, 2)
    for bc in (EVEN, ODD):
        bcond = boundary_set(patch, bc, basis)
        ground = (lam_e, lam_o)[bc] ** patch.parity_count(bc)
        vac = bcond.forced - bcond.occupied
        for occ in independent_sets(window, patch.vertices, bcond.occupied, vac):
            cs = contours_from_independent_set(occ, patch, bc, basis)
            prod = ground
            for g in cs.contours:
                prod *= weight(g, lam_e, lam_o)
            assert prod == weight_of(window, occ, lam_e, lam_o)
            assert cs.pairwise_compatible and cs.matching
            assert cs.external_parity in ("empty", ("even", "odd")[bc])
            assert cs.union() == {
                e for e in patch.induced_edges if not set(window.edges[e]) & occ
            }


def test_every_contour_has_a_witness_set(grid12):
    """Each enumerated contour is exactly the unoccupied edge set of some independent set."""
    window, basis, _ = grid12
    patch = ball(window, centre(window), 4)
    for g in contours_in(patch, basis, k=10):
        occ = independent_set_from_contours([g], patch, g.label, basis)
        cs = contours_from_independent_set(occ, patch, g.label, basis)
        assert [h.key for h in cs.contours] == [g.key]


def test_b_value_law_regular(grid12):
    window, basis, _ = grid12
    patch = ball(window, centre(window), 4)
    for g in contours_in(patch, basis):
        assert Fraction(g.b_e + g.b_o) == Fraction(g.size, 4)


def test_b_value_law_biregular():
    window, basis, sym = generate(HostSpec("dice", side=14))
    d_e, d_o = sym.degrees
    patch = ball(window, centre(window), 3)
    cs = contours_in(patch, basis, k=12)
    assert cs
    for g in cs:
        if g.label == EVEN:
            n_o = sum(1 for v in g.int_o if window.parity[v] == ODD)
            assert Fraction(g.b_e) == Fraction(g.size, d_e) + Fraction(d_o, d_e) * n_o
        else:
            n_e = sum(1 for v in g.int_e if window.parity[v] == EVEN)
            assert Fraction(g.b_o) == Fraction(g.size, d_o) + Fraction(d_e, d_o) * n_e


def test_b_value_law_matched():
    window, basis, _ = generate(HostSpec("slab_zd2", side=9))
    v = centre(window)
    patch = ball(window, v, 2)
    for g in contours_in(patch, basis, k=10):
        assert Fraction(g.b_e + g.b_o) >= Fraction(g.size, window.max_degree)


def test_small_sizes(grid):
    window, basis, _ = grid
    e = window.edge_id(44, 45)
    assert enumerate_contours(e, 3, basis) == []
    four = enumerate_contours(e, 4, basis)
    assert sorted(g.key for g in four) == sorted(tuple(sorted(window.incident[v])) for v in (44, 45))


def test_enumeration_matches_brute_force(grid12):
    window, basis, _ = grid12
    e = window.edge_id(window.coords.index((5, 5)), window.coords.index((5, 6)))
    k = 6
    region, shell = local_region(window, e, k + 1)
    interior = lambda f: not any(window.frame[v] for v in window.edges[f])  # noqa: E731
    levels = connected_edge_sets(e, k, aux_neighbours(basis.cycles), interior)
    brute = {tuple(sorted(s)) for size in levels for s in levels[size] if is_valid_contour(window, s, region, shell)}
    assert {g.key for g in enumerate_contours(e, k, basis)} == brute


def test_region_search_equals_edge_growth(dice):
    window, basis, _ = dice
    patch = ball(window, centre(window), 2)
    whole = contours_in(patch, basis)
    k = max(g.size for g in whole)
    assert contours_in(patch, basis, k=k) == whole
    assert contours_in(patch, basis, k=k, threads=3) == whole


def test_cross_patch_has_no_contours(grid):
    window, basis, _ = grid
    v = centre(window)
    assert contours_in(ball(window, v, 1), basis) == []
    b2 = contours_in(ball(window, v, 2), basis)
    assert [g.key for g in b2] == [tuple(sorted(window.incident[v]))]


def test_admissible_patch(grid):
    window, _, _ = grid
    v = centre(window, EVEN)
    assert admissible_patch(ball(window, v, 1))
    assert admissible_patch(Patch(window, frozenset({v})))
    x, y = window.coords[v]
    square = {window.coords.index((x + a, y + b)) for a in (0, 1) for b in (0, 1)}
    assert not admissible_patch(Patch(window, frozenset(square)))


def test_admissible_boundary_is_a_contour(grid):
    window, basis, _ = grid
    patch = ball(window, centre(window, EVEN), 2)
    assert admissible_patch(patch)
    g = make_contour(patch.boundary, basis)
    assert any(comp == patch.vertices for comp, _ in g.interior_components)


def test_external_factorisation(grid12):
    """Families with one prescribed external contour factor over its interior components."""
    window, basis, _ = grid12
    patch = ball(window, centre(window), 4)
    by_external = Counter()
    occupied, vacant = _bc_sets(patch, basis)
    for occ in independent_sets(window, patch.vertices, occupied, vacant):
        cs = contours_from_independent_set(occ, patch, EVEN, basis)
        by_external[tuple(g.key for g in cs.external)] += 1
    assert by_external[()] == 1
    singles = [key for key in by_external if len(key) == 1]
    assert singles
    for (key,) in singles:
        g = make_contour(key, basis)
        expect = 1
        for comp, phase in g.interior_components:
            sub = Patch(window, comp)
            occ, vac = _bc_sets(sub, basis, phase)
            expect *= sum(1 for _ in independent_sets(window, comp, occ, vac))
        assert by_external[(key,)] == expect


def _bc_sets(patch, basis, parity=EVEN):
    bcond = boundary_set(patch, parity, basis)
    return bcond.occupied, bcond.forced - bcond.occupied
