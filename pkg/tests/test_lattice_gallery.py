import pytest

from pshardcore.cycle_space import validate_spans
from pshardcore.errors import UnsupportedFamily
from pshardcore.graph_core import Patch
from pshardcore.lattice_gallery import FAMILIES, HostSpec, generate


def test_grid_metadata():
    window, basis, sym = generate(HostSpec("grid_zd", d=2, side=10))
    assert window.max_degree == 4
    assert sym.kind == "vertex_transitive"
    assert basis.L == 4 and len(basis) == 81


def test_dice_metadata():
    window, _, sym = generate(HostSpec("dice", side=8))
    assert sym.degrees == (3, 6)
    assert sym.kind == "parity_transitive"


def test_slab_matching_is_layer_swap():
    window, _, sym = generate(HostSpec("slab_zd2", side=8))
    assert sym.kind == "matched_automorphic"
    for v, u in sym.matching.items():
        assert window.coords[u] == window.coords[v][:-1] + (1 - window.coords[v][-1],)
        assert window.parity[u] != window.parity[v]
        assert u in window.adjacency[v]


def test_decorated_has_no_symmetry():
    _, _, sym = generate(HostSpec("decorated_zd2", side=6))
    assert sym.kind == "none"


def test_generators_are_automorphisms():
    window, _, sym = generate(HostSpec("dice", side=10))
    edges = set(window.edges)
    for g in sym.generators:
        for u, v in window.edges:
            if u in g and v in g:
                a, b = g[u], g[v]
                assert (min(a, b), max(a, b)) in edges


@pytest.mark.parametrize("family", FAMILIES)
def test_every_family_spans_its_interior(family):
    window, basis, _ = generate(HostSpec(family, side=6, length=6))
    assert validate_spans(basis, Patch(window, window.interior))


def test_odd_cylinder_refused():
    with pytest.raises(UnsupportedFamily):
        generate(HostSpec("cylinder", k=3))
    with pytest.raises(UnsupportedFamily):
        generate(HostSpec("moebius"))
