import itertools

import pytest
from hypothesis import given, settings, strategies as st

from oracles import aux_neighbours
from pshardcore.cycle_space import (
    CycleBasis,
    basis_connected,
    basis_report,
    enumerate_short_cycles,
    gf2_rank,
    invariant_completion,
    link_components,
    validate_spans,
)
from pshardcore.errors import ValidationError
from pshardcore.graph_core import Patch
from pshardcore.lattice_gallery import HostSpec, generate


def _brute_D(window, cycles):
    nbrs = aux_neighbours(cycles)
    return max(len(s) for s in nbrs.values())


@pytest.mark.parametrize(
    "spec",
    [HostSpec("grid_zd", side=8), HostSpec("dice", side=10), HostSpec("slab_zd2", side=6), HostSpec("grid_zd", d=3, side=5)],
)
def test_D_matches_per_edge_count(spec):
    window, basis, _ = generate(spec)
    assert basis.D == _brute_D(window, basis.cycles)


def test_D_values():
    assert generate(HostSpec("grid_zd", side=8))[1].D == 6
    assert generate(HostSpec("dice", side=10))[1].D == 6


def test_cylinder_D_stable_across_lengths():
    a = generate(HostSpec("cylinder", k=4, length=8))[1].D
    b = generate(HostSpec("cylinder", k=4, length=12))[1].D
    assert a == b


def _bipartition_connected(edges, cycles):
    """Definition: no split of the set into two nonempty sides is avoided by every basis cycle."""
    edges = sorted(edges)
    if len(edges) <= 1:
        return True
    first, rest = edges[0], edges[1:]
    for r in range(len(rest)):
        for side in itertools.combinations(rest, r):
            a = {first, *side}
            b = set(edges) - a
            if not any(set(c) & a and set(c) & b for c in cycles):
                return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=39), min_size=1, max_size=6))
def test_basis_connected_matches_bipartition_definition(edge_ids):
    window, basis, _ = generate(HostSpec("grid_zd", side=5))
    edges = {e % len(window.edges) for e in edge_ids}
    assert basis_connected(edges, basis) == _bipartition_connected(edges, basis.cycles)


def test_basis_connected_examples(grid):
    window, basis, _ = grid
    assert basis_connected([0], basis)
    assert basis_connected([], basis)
    sq = basis.cycles[10]
    assert basis_connected(sq[:2], basis)
    far = [window.edge_id(11, 12), window.edge_id(87, 88)]
    assert not basis_connected(far, basis)
    assert len(link_components(far, basis)) == 2


@pytest.mark.parametrize("family", ["grid_zd", "dice"])
def test_invariant_completion_is_all_four_cycles(family):
    window, basis, _ = generate(HostSpec(family, side=8))
    done = invariant_completion(basis)
    assert set(done.cycles) == set(basis.cycles)


def test_tree_has_no_short_cycles():
    from pshardcore.graph_core import build_window

    window = build_window([0, 1, 0, 1], [True, False, False, False], [(0, 1), (1, 2), (1, 0), (2, 3)])
    assert enumerate_short_cycles(window, 6) == []
    basis = CycleBasis.from_cycles(window, [])
    assert validate_spans(basis, Patch(window, frozenset({1, 2, 3})))


def test_span_and_deficit(grid):
    window, basis, _ = grid
    patch = Patch(window, window.interior)
    assert validate_spans(basis, patch)
    interior_square = next(i for i, c in enumerate(basis.cycles) if all(v in window.interior for v in basis.cycle_vertices[i]))
    pruned = CycleBasis(window, tuple(c for i, c in enumerate(basis.cycles) if i != interior_square))
    assert not validate_spans(pruned, patch)
    report = basis_report(basis, patch)
    assert report["D"] == 6 and report["span"] is True


def test_non_cycle_rejected(grid):
    window, basis, _ = grid
    with pytest.raises(ValidationError):
        CycleBasis.from_cycles(window, [basis.cycles[0][:3]])
    with pytest.raises(ValidationError):
        CycleBasis.from_cycles(window, [sorted(set(basis.cycles[0]) | set(basis.cycles[40]))])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=(1 << 7) - 1), max_size=8))
def test_gf2_rank_counts_span(rows):
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    assert 2 ** gf2_rank(rows) == len(span)
