"""Contours of the hard-core model and their combinatorics.

A contour is a nonempty basis-connected edge set such that, once its edges
are deleted, every component sees endpoints of a single parity.  A
component whose contour-incident vertices are odd is an *even-occupied*
component (its even sites can all be occupied), and vice versa.  The
contour takes the label of its exterior component, the one meeting the
frame; the finite components make up the interior ``int_e`` (even-occupied
parts) and ``int_o`` (odd-occupied parts).

Weights use the occupancy deficits ``b_e, b_o``: for an even contour
``b_e = |int_o ∩ V_e|`` and ``b_o = -|int_o ∩ V_o|``; for an odd contour
``b_e = -|int_e ∩ V_e|`` and ``b_o = |int_e ∩ V_o|``.
"""

from __future__ import annotations

import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

from .cycle_space import CycleBasis, basis_connected, exiting_edges, link_closure, link_components
from .errors import (
    BoundaryViolation,
    CapExceeded,
    IncompatiblePair,
    InvalidFamily,
    NotBasisConnected,
    NotIndependent,
    ParityViolation,
    ValidationError,
    WindowTooSmall,
)
from .graph_core import EVEN, ODD, PARITY_NAMES, Patch, exterior_boundary, parity_code


@dataclass(frozen=True, eq=False)
class Contour:
    edges: frozenset[int]
    label: int
    interior_components: tuple[tuple[frozenset[int], int], ...]
    int_e: frozenset[int]
    int_o: frozenset[int]
    b_e: int
    b_o: int
    basis: CycleBasis

    @cached_property
    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.edges))

    @property
    def size(self) -> int:
        return len(self.edges)

    @cached_property
    def interior(self) -> frozenset[int]:
        return self.int_e | self.int_o

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.basis.window.vertices_of(self.edges))

    @cached_property
    def closure(self) -> frozenset[int]:
        return link_closure(self.edges, self.basis)

    @property
    def label_name(self) -> str:
        return PARITY_NAMES[self.label]

    def flipped_interior(self) -> frozenset[int]:
        """Interior region occupied by the phase opposite to the label."""
        return self.int_o if self.label == EVEN else self.int_e

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, Contour) and self.key == other.key and self.basis is other.basis

    def __lt__(self, other: "Contour") -> bool:
        return (self.size, self.key) < (other.size, other.key)

    def __repr__(self) -> str:
        return f"Contour({self.label_name}, size={self.size}, |int_e|={len(self.int_e)}, |int_o|={len(self.int_o)})"


_CACHE: "weakref.WeakKeyDictionary[CycleBasis, dict]" = weakref.WeakKeyDictionary()


def _cache(basis: CycleBasis) -> dict:
    store = _CACHE.get(basis)
    if store is None:
        store = {}
        _CACHE[basis] = store
    return store


def make_contour(edge_set: Iterable[int], basis: CycleBasis, inside: frozenset[int] | None = None) -> Contour:
    """Validate an edge set as a contour and compute its interior decomposition.

    ``inside`` is an optional hint: a vertex set whose complement is known
    to lie in the exterior component (for example a hole-free patch that
    contains the edges).
    """
    edges = frozenset(edge_set)
    key = tuple(sorted(edges))
    store = _cache(basis)
    hit = store.get(key)
    if hit is not None:
        if isinstance(hit, Exception):
            raise hit
        return hit
    try:
        contour = _build_contour(edges, basis, inside)
    except (ValidationError, WindowTooSmall) as exc:
        store[key] = exc
        raise
    store[key] = contour
    return contour


def _build_contour(edges: frozenset[int], basis: CycleBasis, inside: frozenset[int] | None) -> Contour:
    window = basis.window
    if not edges:
        raise NotBasisConnected("a contour must contain at least one edge")
    ends = sorted(window.vertices_of(edges))
    if any(window.frame[v] for v in ends):
        raise WindowTooSmall("contour touches the frame")
    if not basis_connected(edges, basis):
        raise NotBasisConnected("edge set is not basis connected")
    finite, outer = window.components_avoiding(edges, ends, inside=inside)
    parity = window.parity
    outer_par = {parity[v] for v in outer}
    if len(outer_par) != 1:
        raise ParityViolation("exterior component sees contour vertices of both parities")
    label = EVEN if outer_par == {ODD} else ODD
    end_set = set(ends)
    comps = []
    int_e: set[int] = set()
    int_o: set[int] = set()
    for comp in finite:
        par = {parity[v] for v in comp if v in end_set}
        if len(par) != 1:
            raise ParityViolation("an interior component sees contour vertices of both parities")
        phase = ODD if par == {EVEN} else EVEN
        comps.append((comp, phase))
        (int_o if phase == ODD else int_e).update(comp)
    if label == EVEN:
        b_e = sum(1 for v in int_o if parity[v] == EVEN)
        b_o = -sum(1 for v in int_o if parity[v] == ODD)
    else:
        b_e = -sum(1 for v in int_e if parity[v] == EVEN)
        b_o = sum(1 for v in int_e if parity[v] == ODD)
    comps.sort(key=lambda c: min(c[0]))
    return Contour(edges, label, tuple(comps), frozenset(int_e), frozenset(int_o), b_e, b_o, basis)


def is_contour(edge_set: Iterable[int], basis: CycleBasis, inside: frozenset[int] | None = None) -> Contour | None:
    try:
        return make_contour(edge_set, basis, inside)
    except (ValidationError, WindowTooSmall):
        return None


# ------------------------------------------------------------------ weights


def weight(gamma: Contour, lam_e, lam_o, exact: bool = True):
    """``lam_e**(-b_e) * lam_o**(-b_o)``; exact Fraction, or its logarithm when ``exact`` is false."""
    if exact:
        return Fraction(lam_e) ** (-gamma.b_e) * Fraction(lam_o) ** (-gamma.b_o)
    return -gamma.b_e * math.log(lam_e) - gamma.b_o * math.log(lam_o)


def compatible(a: Contour, b: Contour) -> bool:
    """Compatible means the union is not basis connected (a contour is never compatible with itself)."""
    return a.closure.isdisjoint(b.edges)


def precedes(inner: Contour, outer: Contour) -> bool:
    """``inner ≺ outer``: every endpoint of ``inner`` lies in the interior of ``outer``."""
    if not compatible(inner, outer):
        raise IncompatiblePair("the order is only defined on compatible contours")
    return inner.vertices <= outer.interior


# -------------------------------------------------------------- families


@dataclass(frozen=True)
class ContourSet:
    contours: tuple[Contour, ...]
    pairwise_compatible: bool
    matching: bool
    external: tuple[Contour, ...]
    external_parity: str  # "even", "odd", "mixed" or "empty"

    def union(self) -> frozenset[int]:
        out: set[int] = set()
        for g in self.contours:
            out |= g.edges
        return frozenset(out)

    def __len__(self) -> int:
        return len(self.contours)


def is_matching(contours: Sequence[Contour], basis: CycleBasis, inside: frozenset[int] | None = None) -> bool:
    """Every component of the window minus the union sees a single contour parity."""
    if not contours:
        return True
    window = basis.window
    removed: set[int] = set()
    for g in contours:
        removed |= g.edges
    ends = sorted(window.vertices_of(removed))
    finite, outer = window.components_avoiding(removed, ends, inside=inside)
    par = window.parity
    if len({par[v] for v in outer}) > 1:
        return False
    end_set = set(ends)
    return all(len({par[v] for v in comp if v in end_set}) == 1 for comp in finite)


def classify_set(contours: Iterable[Contour], inside: frozenset[int] | None = None) -> ContourSet:
    gs = tuple(sorted(set(contours)))
    ok = all(compatible(a, b) for i, a in enumerate(gs) for b in gs[i + 1:])
    if ok:
        external = tuple(g for g in gs if not any(g.vertices <= h.interior for h in gs if h is not g))
    else:
        external = ()
    labels = {g.label for g in external}
    if not gs:
        ext_par = "empty"
    elif len(labels) == 1:
        ext_par = PARITY_NAMES[labels.pop()]
    else:
        ext_par = "mixed"
    matching = is_matching(gs, gs[0].basis, inside) if gs else True
    return ContourSet(gs, ok, matching, external, ext_par)


# ------------------------------------------------------- patches and the bijection


_HOLE_FREE: "weakref.WeakKeyDictionary[Patch, bool]" = weakref.WeakKeyDictionary()


def hole_free(patch: Patch) -> bool:
    """Every boundary edge leads to the exterior (no enclosed holes)."""
    hit = _HOLE_FREE.get(patch)
    if hit is None:
        hit = patch.boundary == exterior_boundary(patch)
        _HOLE_FREE[patch] = hit
    return hit


def forced_vertices(basis: CycleBasis, patch: Patch) -> frozenset[int]:
    """Vertices of the patch incident to its boundary or lying on a basis cycle that exits it."""
    w = basis.window
    vs = patch.vertices
    out = {v for v in vs if any(w.other_end(e, v) not in vs for e in w.incident[v])}
    for e in exiting_edges(basis, vs):
        out.update(v for v in w.edges[e] if v in vs)
    return frozenset(out)


def allowed_edges(basis: CycleBasis, patch: Patch) -> frozenset[int]:
    """Patch edges that avoid every basis cycle exiting the patch."""
    return patch.induced_edges - exiting_edges(basis, patch.vertices)


def _inside_hint(patch: Patch) -> frozenset[int] | None:
    return patch.vertices if hole_free(patch) else None


def contours_from_independent_set(occupied: Iterable[int], patch: Patch, bc, basis: CycleBasis) -> ContourSet:
    """Split the unoccupied edges of an independent set into maximal basis-connected contours."""
    bc = parity_code(bc)
    w = basis.window
    occ = frozenset(occupied)
    vs = patch.vertices
    if not occ <= vs:
        raise NotIndependent("occupied vertices outside the patch")
    for v in occ:
        if any(u in occ for u in w.adjacency[v]):
            raise NotIndependent(f"vertices {v} and a neighbour are both occupied")
    for v in forced_vertices(basis, patch):
        if (w.parity[v] == bc) != (v in occ):
            raise BoundaryViolation(f"vertex {v} breaks the {PARITY_NAMES[bc]} boundary condition")
    free_edges = [e for e in patch.induced_edges if not (w.edges[e][0] in occ or w.edges[e][1] in occ)]
    inside = _inside_hint(patch)
    pieces = [make_contour(p, basis, inside) for p in link_components(free_edges, basis)]
    return classify_set(pieces, inside)


def independent_set_from_contours(family, patch: Patch, bc, basis: CycleBasis) -> frozenset[int]:
    """Rebuild the independent set whose unoccupied edges are exactly the family's edges."""
    bc = parity_code(bc)
    inside = _inside_hint(patch)
    cs = family if isinstance(family, ContourSet) else classify_set(family, inside)
    if not cs.pairwise_compatible:
        raise InvalidFamily("contours are not pairwise compatible")
    if not cs.matching:
        raise InvalidFamily("family is not matching")
    if cs.external_parity not in ("empty", PARITY_NAMES[bc]):
        raise InvalidFamily(f"external contours are {cs.external_parity}, boundary condition is {PARITY_NAMES[bc]}")
    allowed = allowed_edges(basis, patch)
    union = cs.union()
    if not union <= allowed:
        raise InvalidFamily("family uses edges outside the patch or on exiting basis cycles")
    w = basis.window
    vs = patch.vertices
    on_boundary = {v for v in vs if any(w.other_end(e, v) not in vs for e in w.incident[v])}
    ends = w.vertices_of(union)
    seen: set[int] = set()
    occ: set[int] = set()
    for s in sorted(vs):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for e in w.incident[v]:
                u = w.other_end(e, v)
                if u in vs and u not in comp and e not in union:
                    comp.add(u)
                    stack.append(u)
        seen |= comp
        if comp & on_boundary:
            fill = bc
        else:
            touched = {w.parity[v] for v in comp if v in ends}
            if len(touched) != 1:
                raise InvalidFamily("a component of the patch is cut off from both the boundary and the family")
            fill = 1 - touched.pop()
        occ.update(v for v in comp if w.parity[v] == fill)
    return frozenset(occ)


def admissible_patch(patch: Patch) -> bool:
    """All patch-side endpoints of boundary edges share one parity."""
    w = patch.parent
    vs = patch.vertices
    par = {w.parity[v] for v in vs for e in w.incident[v] if w.other_end(e, v) not in vs}
    return len(par) <= 1


# ------------------------------------------------------------ enumeration


def _edge_sets(
    basis: CycleBasis,
    root: int,
    max_size: int,
    allowed: Callable[[int], bool],
    above_root: bool,
) -> Iterator[frozenset[int]]:
    """Basis-connected edge sets containing ``root``, pruned by a local contour test.

    In a contour no edge outside it has both endpoints on it (those
    endpoints would share a component while having opposite parities).  An
    edge that the search has ruled out for good therefore kills the branch
    as soon as both its endpoints are touched.
    """
    links = basis.links
    window = basis.window
    ends = window.edges
    inc = window.incident

    def ok(x: int) -> bool:
        return (not above_root or x > root) and allowed(x)

    if not ok(root) and not (above_root and allowed(root)):
        return
    touch: dict[int, int] = {}
    in_sub: set[int] = set()

    def add(x: int) -> list[int]:
        fresh = []
        for v in ends[x]:
            c = touch.get(v, 0)
            if c == 0:
                fresh.append(v)
            touch[v] = c + 1
        in_sub.add(x)
        return fresh

    def remove(x: int) -> None:
        for v in ends[x]:
            touch[v] -= 1
        in_sub.discard(x)

    def blocked(newly: list[int], nbhd: set[int], ext: set[int]) -> bool:
        for v in newly:
            for x in inc[v]:
                if x in in_sub:
                    continue
                a, b = ends[x]
                other = b if a == v else a
                if touch.get(other, 0) and (not ok(x) or (x in nbhd and x not in ext)):
                    return True
        return False

    def extend(sub: list[int], ext: list[int], nbhd: set[int]) -> Iterator[frozenset[int]]:
        yield frozenset(sub)
        if len(sub) == max_size:
            return
        ext = list(ext)
        while ext:
            x = ext.pop()
            fresh = [u for u in links[x] if u not in nbhd]
            new_nbhd = nbhd.union(fresh)
            new_ext = ext + [u for u in fresh if ok(u)]
            newly = add(x)
            sub.append(x)
            if not blocked(newly, new_nbhd, set(new_ext)):
                yield from extend(sub, new_ext, new_nbhd)
            sub.pop()
            remove(x)
            a, b = ends[x]
            if touch.get(a, 0) and touch.get(b, 0):
                break

    nbhd = {root} | set(links[root])
    ext0 = [u for u in links[root] if ok(u)]
    newly = add(root)
    if not blocked(newly, nbhd, set(ext0)):
        yield from extend([root], ext0, nbhd)
    remove(root)


def _interior_edge(basis: CycleBasis, e: int) -> bool:
    w = basis.window
    a, b = w.edges[e]
    return not (w.frame[a] or w.frame[b])


def enumerate_contours(e: int, k: int, basis: CycleBasis, budget: int = 2_000_000) -> list[Contour]:
    """All contours with at most ``k`` edges that contain edge ``e``."""
    if not _interior_edge(basis, e):
        raise WindowTooSmall(f"edge {e} touches the frame")
    w = basis.window
    a, b = w.edges[e]
    if min(w.frame_distance[a], w.frame_distance[b]) <= (k + 1) // 2:
        raise WindowTooSmall(f"edge {e} is too close to the frame for contours of size {k}")
    out = []
    seen = 0
    for s in _edge_sets(basis, e, k, lambda x: _interior_edge(basis, x), above_root=False):
        seen += 1
        if seen > budget:
            raise CapExceeded(f"more than {budget} candidate edge sets through edge {e}")
        g = is_contour(s, basis)
        if g is not None:
            out.append(g)
    return sorted(out)


def contours_in(
    patch: Patch,
    basis: CycleBasis,
    k: int | None = None,
    label=None,
    threads: int = 1,
    budget: int = 5_000_000,
) -> list[Contour]:
    """Contours of at most ``k`` edges lying in the patch and avoiding exiting basis cycles.

    With ``k=None`` every such contour is listed by a region search (see
    ``regions``); otherwise edge sets are grown from each allowed edge.
    """
    allowed = allowed_edges(basis, patch)
    if any(basis.window.frame[v] for v in patch.vertices):
        raise WindowTooSmall("patch touches the frame")
    labels = (EVEN, ODD) if label is None else (parity_code(label),)
    inside = _inside_hint(patch)
    if k is None:
        found: set[Contour] = set()
        for lab in labels:
            for region in regions(patch, basis, lab, allowed):
                g = _region_contour(region, patch, basis, inside)
                if g is not None:
                    found.add(g)
        return sorted(found)
    if k < 1:
        return []
    roots = sorted(allowed)

    def grow(root: int) -> list[Contour]:
        res = []
        count = 0
        for s in _edge_sets(basis, root, k, allowed.__contains__, above_root=True):
            count += 1
            if count > budget:
                raise CapExceeded(f"more than {budget} candidate edge sets from edge {root}")
            g = is_contour(s, basis, inside)
            if g is not None and g.label in labels:
                res.append(g)
        return res

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(grow, roots))
    else:
        batches = [grow(r) for r in roots]
    return sorted(g for batch in batches for g in batch)


def _region_contour(region: frozenset[int], patch: Patch, basis: CycleBasis, inside) -> Contour | None:
    w = basis.window
    cut = frozenset(e for v in region for e in w.incident[v] if w.other_end(e, v) not in region)
    if not basis_connected(cut, basis):
        return None
    return is_contour(cut, basis, inside)


def regions(patch: Patch, basis: CycleBasis, label: int, allowed: frozenset[int] | None = None) -> Iterator[frozenset[int]]:
    """Nonempty vertex sets whose edge boundary could be a ``label`` contour in the patch.

    The region is the interior part occupied by the opposite phase.  Across
    each boundary edge the region-side endpoint must have parity ``label``,
    and edges outside ``allowed`` may not be cut at all.  Vertices are
    assigned in breadth-first order with every constraint checked as soon
    as both endpoints are decided.
    """
    w = basis.window
    if allowed is None:
        allowed = allowed_edges(basis, patch)
    vs = patch.vertices
    order: list[int] = []
    seen: set[int] = set()
    for s in sorted(vs):
        if s in seen:
            continue
        seen.add(s)
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in w.adjacency[v]:
                if u in vs and u not in seen:
                    seen.add(u)
                    queue.append(u)
    pos = {v: i for i, v in enumerate(order)}
    # checks[i]: constraints against neighbours decided no later than order[i]
    checks: list[list[tuple[int, int, bool]]] = [[] for _ in order]
    fixed_out: set[int] = set()
    for v in order:
        for e in w.incident[v]:
            u = w.other_end(e, v)
            if u not in vs:
                fixed_out.add(v)  # a cut boundary edge would leave the patch
                continue
            if pos[u] < pos[v]:
                checks[pos[v]].append((u, e, e in allowed))
    parity = w.parity
    state: dict[int, bool] = {}

    def consistent(v: int) -> bool:
        inv = state[v]
        for u, e, ok in checks[pos[v]]:
            inu = state[u]
            if inu == inv:
                continue
            if not ok:
                return False
            side = v if inv else u
            if parity[side] != label:
                return False
        return True

    def rec(i: int, count: int) -> Iterator[frozenset[int]]:
        if i == len(order):
            if count:
                yield frozenset(v for v, s in state.items() if s)
            return
        v = order[i]
        for choice in ((False,) if v in fixed_out else (False, True)):
            state[v] = choice
            if consistent(v):
                yield from rec(i + 1, count + choice)
        del state[v]

    yield from rec(0, 0)


def contour_table_row(g: Contour) -> dict:
    return {
        "size": g.size,
        "label": g.label_name,
        "b_e": g.b_e,
        "b_o": g.b_o,
        "int_e": len(g.int_e),
        "int_o": len(g.int_o),
        "edges": " ".join(str(e) for e in g.key),
    }
