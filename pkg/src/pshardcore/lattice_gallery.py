"""Generators for the example host graphs with plaquette bases and symmetry data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .cycle_space import CycleBasis
from .errors import UnsupportedFamily, ValidationError
from .graph_core import EVEN, ODD, HostWindow, build_window

FAMILIES = ("grid_zd", "dice", "cylinder", "slab_zd2", "decorated_zd2")
SYMMETRY_KINDS = ("vertex_transitive", "matched_automorphic", "parity_transitive", "none")


@dataclass(frozen=True)
class HostSpec:
    """Which lattice to build.  ``side`` counts the whole window, frame included."""

    family: str
    side: int = 10
    d: int = 2
    k: int = 4
    length: int = 10
    frame_depth: int = 0  # 0 picks the family default

    def label(self) -> str:
        if self.family == "cylinder":
            return f"cylinder(k={self.k},length={self.length},frame={self.depth})"
        if self.family == "dice":
            return f"dice(side={self.side},frame={self.depth})"
        return f"{self.family}(d={self.d},side={self.side},frame={self.depth})"

    @property
    def depth(self) -> int:
        if self.frame_depth:
            return self.frame_depth
        return 2 if self.family == "dice" else 1


@dataclass(frozen=True)
class SymmetryData:
    kind: str
    degrees: tuple[int, int]
    matching: dict[int, int] | None = field(default=None, compare=False)
    generators: tuple[dict[int, int], ...] = field(default=(), compare=False)


def generate(spec: HostSpec) -> tuple[HostWindow, CycleBasis, SymmetryData]:
    builders: dict[str, Callable] = {
        "grid_zd": _grid,
        "dice": _dice,
        "cylinder": _cylinder,
        "slab_zd2": _slab,
        "decorated_zd2": _decorated,
    }
    if spec.family not in builders:
        raise UnsupportedFamily(f"unknown family {spec.family!r}; choose one of {', '.join(FAMILIES)}")
    if spec.family in ("grid_zd", "slab_zd2", "decorated_zd2") and spec.d not in (2, 3):
        raise UnsupportedFamily(f"dimension d={spec.d} outside the supported range (2, 3)")
    return builders[spec.family](spec)


def _finish(name, coords, parity, frame, edges, cycles, kind, maps, matching=None):
    index = {c: i for i, c in enumerate(coords)}
    window = build_window(parity, frame, [(index[a], index[b]) for a, b in edges], name=name, coords=coords)
    basis = CycleBasis.from_cycles(window, [[window.edge_id(index[a], index[b]) for a, b in cyc] for cyc in cycles])
    gens = tuple({index[c]: index[m] for c in coords if (m := f(c)) in index} for f in maps)
    match = None
    if matching is not None:
        match = {index[c]: index[m] for c in coords if (m := matching(c)) in index}
    degrees = window.degree_by_parity()
    if not window.interior:
        raise ValidationError(f"{name}: window has no interior vertices")
    return window, basis, SymmetryData(kind=kind, degrees=degrees, matching=match, generators=gens)


def _in_box(side: int, depth: int):
    return lambda x: any(c < depth or c >= side - depth for c in x)


def _grid_parts(d: int, side: int):
    pts = list(itertools.product(range(side), repeat=d))
    pset = set(pts)
    unit = [tuple(int(i == a) for i in range(d)) for a in range(d)]
    add = lambda x, y: tuple(p + q for p, q in zip(x, y))  # noqa: E731
    edges = [(x, add(x, u)) for x in pts for u in unit if add(x, u) in pset]
    squares = []
    for x in pts:
        for a, b in itertools.combinations(range(d), 2):
            xa, xb = add(x, unit[a]), add(x, unit[b])
            xab = add(xa, unit[b])
            if xab in pset:
                squares.append([(x, xa), (xa, xab), (xb, xab), (x, xb)])
    return pts, edges, squares, unit, add


def _grid(spec: HostSpec):
    side, depth = spec.side, spec.depth
    if side - 2 * depth < 1:
        raise ValidationError("grid window has no interior")
    pts, edges, squares, unit, add = _grid_parts(spec.d, side)
    frame = _in_box(side, depth)
    maps = [lambda x, u=u: add(x, u) for u in unit]
    return _finish(
        spec.label(), pts, [sum(x) % 2 for x in pts], [frame(x) for x in pts], edges, squares,
        "vertex_transitive", maps,
    )


def _slab(spec: HostSpec):
    side, depth = spec.side, spec.depth
    if side - 2 * depth < 1:
        raise ValidationError("slab window has no interior")
    base, base_edges, base_sq, unit, add = _grid_parts(spec.d, side)
    pts = [x + (h,) for h in (0, 1) for x in base]
    edges = [(a + (h,), b + (h,)) for h in (0, 1) for a, b in base_edges]
    edges += [(x + (0,), x + (1,)) for x in base]
    cycles = [[(a + (h,), b + (h,)) for a, b in sq] for h in (0, 1) for sq in base_sq]
    for a, b in base_edges:
        cycles.append([(a + (0,), b + (0,)), (b + (0,), b + (1,)), (a + (1,), b + (1,)), (a + (0,), a + (1,))])
    frame = _in_box(side, depth)
    flip = lambda p: p[:-1] + (1 - p[-1],)  # noqa: E731
    maps = [lambda p, u=u: add(p[:-1], u) + (p[-1],) for u in unit] + [flip]
    return _finish(
        spec.label(), pts, [sum(p) % 2 for p in pts], [frame(p[:-1]) for p in pts], edges, cycles,
        "matched_automorphic", maps, matching=flip,
    )


def _decorated(spec: HostSpec):
    side, depth = spec.side, spec.depth
    if side - 2 * depth < 1:
        raise ValidationError("decorated window has no interior")
    base, edges, squares, unit, add = _grid_parts(spec.d, side)
    pts = [x + (0,) for x in base] + [x + (leaf,) for x in base for leaf in (1, 2)]
    lift = lambda x: x + (0,)  # noqa: E731
    all_edges = [(lift(a), lift(b)) for a, b in edges]
    all_edges += [(lift(x), x + (leaf,)) for x in base for leaf in (1, 2)]
    cycles = [[(lift(a), lift(b)) for a, b in sq] for sq in squares]
    parity = [(sum(p[:-1]) + (p[-1] > 0)) % 2 for p in pts]
    frame = _in_box(side, depth)
    return _finish(spec.label(), pts, parity, [frame(p[:-1]) for p in pts], all_edges, cycles, "none", [])


_TRI = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def _dice(spec: HostSpec):
    """Dice lattice on triangular-lattice coordinates.

    Sites with ``(i - j) % 3 == 0`` are the degree-six hubs (odd); the other
    two sublattices are the degree-three sites (even).  Only hub-to-site
    bonds are kept, and every rhombus is a pair of triangles sharing a
    site-to-site bond.
    """
    side, depth = spec.side, spec.depth
    if side - 2 * depth < 1:
        raise ValidationError("dice window has no interior")
    hub = lambda p: (p[0] - p[1]) % 3 == 0  # noqa: E731
    grid = set(itertools.product(range(side), repeat=2))
    nb = lambda p: [(p[0] + a, p[1] + b) for a, b in _TRI if (p[0] + a, p[1] + b) in grid]  # noqa: E731
    edges = set()
    for p in grid:
        if hub(p):
            for q in nb(p):
                edges.add((p, q))
    used = {x for e in edges for x in e}
    pts = sorted(used)
    cycles = []
    for p in pts:
        if hub(p):
            continue
        for q in nb(p):
            if hub(q) or q < p:
                continue
            apex = sorted(set(nb(p)) & set(nb(q)))
            if len(apex) == 2:
                a, b = apex
                cycles.append([(a, p), (a, q), (b, p), (b, q)])
    frame = _in_box(side, depth)
    maps = [lambda p: (p[0] + 1, p[1] + 1), lambda p: (p[0] + 2, p[1] - 1)]
    canon = lambda e: e if e in edges else (e[1], e[0])  # noqa: E731
    return _finish(
        spec.label(), pts, [ODD if hub(p) else EVEN for p in pts], [frame(p) for p in pts],
        sorted(edges), [[canon(e) for e in c] for c in cycles], "parity_transitive", maps,
    )


def _cylinder(spec: HostSpec):
    k, length, depth = spec.k, spec.length, spec.depth
    if k < 2 or k % 2:
        raise UnsupportedFamily("cylinder width must be even (odd widths are not bipartite)")
    if length - depth < 1:
        raise ValidationError("cylinder window has no interior")
    pts = [(x, y) for y in range(length) for x in range(k)]
    ring = [((x, y), ((x + 1) % k, y)) for y in range(length) for x in range(k if k > 2 else 1)]
    up = [((x, y), (x, y + 1)) for y in range(length - 1) for x in range(k)]
    squares = []
    for y in range(length - 1):
        for x in range(k if k > 2 else 1):
            x1 = (x + 1) % k
            squares.append([((x, y), (x1, y)), ((x1, y), (x1, y + 1)), ((x, y + 1), (x1, y + 1)), ((x, y), (x, y + 1))])
    if k > 2:
        squares.append([((x, 0), ((x + 1) % k, 0)) for x in range(k)])
    rot = lambda p: ((p[0] + 1) % k, p[1])  # noqa: E731
    return _finish(
        spec.label(), pts, [(x + y) % 2 for x, y in pts], [y >= length - depth for _, y in pts],
        ring + up, squares, "matched_automorphic", [rot], matching=rot,
    )
