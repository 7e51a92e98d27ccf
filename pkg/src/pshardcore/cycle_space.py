"""Cycle bases, the auxiliary edge graph, and basis connectivity.

A basis is any family of cycles whose GF(2) span is the cycle space; no
independence is asked for.  Two edges are *linked* when some basis cycle
contains both, and an edge set is basis connected exactly when it is
connected under this link relation.  (A bipartition of the set is crossed
by a basis cycle iff some link joins the two sides, so a set with no
uncrossed bipartition is the same thing as a link-connected set.)
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CapExceeded, ValidationError
from .graph_core import HostWindow, Patch, connected_components


@dataclass(frozen=True, eq=False)
class CycleBasis:
    window: HostWindow
    cycles: tuple[tuple[int, ...], ...]

    @classmethod
    def from_cycles(cls, window: HostWindow, cycles: Iterable[Iterable[int]]) -> "CycleBasis":
        canon = sorted({tuple(sorted(set(c))) for c in cycles})
        for cyc in canon:
            _check_simple_cycle(window, cyc)
        return cls(window, tuple(canon))

    @cached_property
    def per_edge(self) -> tuple[tuple[int, ...], ...]:
        table: list[list[int]] = [[] for _ in self.window.edges]
        for i, cyc in enumerate(self.cycles):
            for e in cyc:
                table[e].append(i)
        return tuple(tuple(t) for t in table)

    @cached_property
    def cycle_vertices(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(self.window.vertices_of(c)) for c in self.cycles)

    @cached_property
    def per_vertex(self) -> tuple[tuple[int, ...], ...]:
        table: list[list[int]] = [[] for _ in range(self.window.n)]
        for i, vs in enumerate(self.cycle_vertices):
            for v in vs:
                table[v].append(i)
        return tuple(tuple(t) for t in table)

    @cached_property
    def links(self) -> tuple[frozenset[int], ...]:
        """Auxiliary graph: for each edge, the other edges sharing a basis cycle with it."""
        table: list[set[int]] = [set() for _ in self.window.edges]
        for cyc in self.cycles:
            for e in cyc:
                table[e].update(cyc)
        for e, t in enumerate(table):
            t.discard(e)
        return tuple(frozenset(t) for t in table)

    @cached_property
    def D(self) -> int:
        return compute_D(self)

    @cached_property
    def L(self) -> int:
        return max((len(c) for c in self.cycles), default=0)

    def __len__(self) -> int:
        return len(self.cycles)


def _check_simple_cycle(window: HostWindow, cyc: Sequence[int]) -> None:
    if len(cyc) < 3:
        raise ValidationError(f"cycle {list(cyc)} is shorter than 3 edges")
    deg: dict[int, int] = {}
    for e in cyc:
        if not 0 <= e < len(window.edges):
            raise ValidationError(f"cycle references unknown edge {e}")
        for v in window.edges[e]:
            deg[v] = deg.get(v, 0) + 1
    if any(d != 2 for d in deg.values()):
        raise ValidationError(f"edge set {list(cyc)} is not a simple cycle")
    if len(connected_components_edges(window, cyc)) != 1:
        raise ValidationError(f"edge set {list(cyc)} is a union of several cycles")


def connected_components_edges(window: HostWindow, edge_set: Iterable[int]) -> list[frozenset[int]]:
    """Components (as edge sets) of the graph formed by an edge set."""
    edge_set = list(edge_set)
    by_vertex: dict[int, list[int]] = {}
    for e in edge_set:
        for v in window.edges[e]:
            by_vertex.setdefault(v, []).append(e)
    seen: set[int] = set()
    comps = []
    for e in edge_set:
        if e in seen:
            continue
        comp = {e}
        queue = [e]
        while queue:
            f = queue.pop()
            for v in window.edges[f]:
                for g in by_vertex[v]:
                    if g not in comp:
                        comp.add(g)
                        queue.append(g)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def compute_D(basis: CycleBasis) -> int:
    """Largest number of other edges any edge shares a basis cycle with."""
    return max((len(t) for t in basis.links), default=0)


def link_components(edge_set: Iterable[int], basis: CycleBasis) -> list[frozenset[int]]:
    """Maximal basis-connected pieces of an edge set."""
    remaining = set(edge_set)
    links = basis.links
    pieces = []
    while remaining:
        start = min(remaining)
        remaining.discard(start)
        comp = {start}
        queue = deque([start])
        while queue:
            e = queue.popleft()
            for f in links[e]:
                if f in remaining:
                    remaining.discard(f)
                    comp.add(f)
                    queue.append(f)
        pieces.append(frozenset(comp))
    return pieces


def basis_connected(edge_set: Iterable[int], basis: CycleBasis) -> bool:
    """True when the edge set is connected in the auxiliary graph (empty and singletons count)."""
    return len(link_components(edge_set, basis)) <= 1


def link_closure(edge_set: Iterable[int], basis: CycleBasis) -> frozenset[int]:
    """The edge set together with every edge linked to one of its edges."""
    out = set(edge_set)
    for e in list(out):
        out |= basis.links[e]
    return frozenset(out)


def cycle_exits(basis: CycleBasis, cycle: int, vertices: frozenset[int] | set[int]) -> bool:
    """A cycle exits a vertex set when it has vertices both inside and outside it."""
    vs = basis.cycle_vertices[cycle]
    inside = sum(1 for v in vs if v in vertices)
    return 0 < inside < len(vs)


def exiting_cycles(basis: CycleBasis, vertices: frozenset[int] | set[int]) -> frozenset[int]:
    """Indices of basis cycles that exit the vertex set."""
    candidates = {c for v in vertices for c in basis.per_vertex[v]}
    return frozenset(c for c in candidates if cycle_exits(basis, c, vertices))


def exiting_edges(basis: CycleBasis, vertices: frozenset[int] | set[int]) -> frozenset[int]:
    """Edges lying on some basis cycle that exits the vertex set."""
    out: set[int] = set()
    for c in exiting_cycles(basis, vertices):
        out.update(basis.cycles[c])
    return frozenset(out)


def enumerate_short_cycles(window: HostWindow, max_len: int, budget: int = 200_000) -> list[tuple[int, ...]]:
    """Every simple cycle of at most ``max_len`` edges, as sorted edge-index tuples.

    Each cycle is found from its smallest vertex, walking only through larger
    vertices, and is kept in one of its two orientations.
    """
    adj = window.adjacency
    found: list[tuple[int, ...]] = []
    for s in range(window.n):
        path = [s]
        on_path = {s}

        def walk(v: int) -> None:
            for u in adj[v]:
                if u == s and len(path) >= 3:
                    if path[1] < path[-1]:
                        cyc = [window.edge_id(path[i], path[i + 1]) for i in range(len(path) - 1)]
                        cyc.append(window.edge_id(path[-1], s))
                        found.append(tuple(sorted(cyc)))
                        if len(found) > budget:
                            raise CapExceeded(f"more than {budget} cycles of length <= {max_len}")
                    continue
                if u <= s or u in on_path or len(path) >= max_len:
                    continue
                path.append(u)
                on_path.add(u)
                walk(u)
                path.pop()
                on_path.discard(u)

        walk(s)
    return sorted(set(found))


def invariant_completion(basis: CycleBasis, budget: int = 200_000) -> CycleBasis:
    """All cycles of the window no longer than the longest basis cycle."""
    if basis.L == 0:
        return CycleBasis(basis.window, ())
    cycles = enumerate_short_cycles(basis.window, basis.L, budget=budget)
    return CycleBasis(basis.window, tuple(cycles))


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of integers read as bit vectors."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                rank += 1
                break
    return rank


def cycle_space_dimension(patch: Patch) -> int:
    comps = connected_components(patch.parent, patch.vertices)
    return len(patch.induced_edges) - len(patch.vertices) + len(comps)


def validate_spans(basis: CycleBasis, patch: Patch) -> bool:
    """Do the basis cycles lying inside the patch span its whole cycle space?"""
    edges = sorted(patch.induced_edges)
    pos = {e: i for i, e in enumerate(edges)}
    rows = []
    for cyc in basis.cycles:
        if all(e in pos for e in cyc):
            rows.append(sum(1 << pos[e] for e in cyc))
    return gf2_rank(rows) == cycle_space_dimension(patch)


def basis_report(basis: CycleBasis, patch: Patch | None = None) -> dict:
    report = {"cycles": len(basis), "D": basis.D, "L": basis.L}
    if patch is not None:
        report["span"] = validate_spans(basis, patch)
        report["cycle_space_dim"] = cycle_space_dimension(patch)
    return report
