"""Finite windows of infinite bipartite host graphs.

A window keeps a *frame* layer of vertices that stands in for infinity:
whatever is connected to the frame is treated as the unbounded part of
the graph.  Vertices carry a parity (``EVEN``/``ODD``) and every edge joins
the two classes.  Edges are canonical ``(min, max)`` pairs stored in sorted
order, so an edge is identified by its index everywhere else in the package.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from ._enum import connected_subsets
from .errors import (
    CapExceeded,
    ConfigError,
    FrameDisconnected,
    NonBipartite,
    ValidationError,
    WindowTooSmall,
)

EVEN = 0
ODD = 1
PARITY_NAMES = ("even", "odd")


def parity_code(name: str | int) -> int:
    """Accept ``"even"``/``"e"``/``0`` or ``"odd"``/``"o"``/``1``."""
    if name in (EVEN, ODD):
        return int(name)
    key = str(name).strip().lower()
    if key in ("e", "even"):
        return EVEN
    if key in ("o", "odd"):
        return ODD
    raise ValueError(f"unknown parity {name!r}")


@dataclass(frozen=True, eq=False)
class HostWindow:
    parity: tuple[int, ...]
    frame: tuple[bool, ...]
    edges: tuple[tuple[int, int], ...]
    name: str = ""
    coords: tuple | None = field(default=None, repr=False)

    @cached_property
    def n(self) -> int:
        return len(self.parity)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append(i)
            inc[v].append(i)
        return tuple(tuple(a) for a in inc)

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @cached_property
    def frame_distance(self) -> tuple[int, ...]:
        """Graph distance of every vertex to the frame (``n`` when unreachable)."""
        dist = [self.n] * self.n
        queue = deque()
        for v in range(self.n):
            if self.frame[v]:
                dist[v] = 0
                queue.append(v)
        while queue:
            v = queue.popleft()
            for u in self.adjacency[v]:
                if dist[u] > dist[v] + 1:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return tuple(dist)

    @cached_property
    def margin(self) -> int:
        """Depth of the window: largest distance from an interior vertex to the frame."""
        return max((d for v, d in enumerate(self.frame_distance) if not self.frame[v]), default=0)

    @cached_property
    def interior(self) -> frozenset[int]:
        return frozenset(v for v in range(self.n) if not self.frame[v])

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]

    def other_end(self, edge: int, v: int) -> int:
        a, b = self.edges[edge]
        return b if a == v else a

    def even_endpoint(self, edge: int) -> int:
        a, b = self.edges[edge]
        return a if self.parity[a] == EVEN else b

    def vertices_of(self, edge_set: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for e in edge_set:
            out.update(self.edges[e])
        return out

    def degree_by_parity(self) -> tuple[int, int]:
        """Maximum degree over interior even and interior odd vertices."""
        best = [0, 0]
        for v in self.interior:
            best[self.parity[v]] = max(best[self.parity[v]], len(self.adjacency[v]))
        return best[EVEN], best[ODD]

    def components_avoiding(
        self,
        removed: frozenset[int] | set[int],
        seeds: Iterable[int],
        outside: frozenset[int] | set[int] | None = None,
        inside: frozenset[int] | set[int] | None = None,
    ) -> tuple[list[frozenset[int]], set[int]]:
        """Split the seeds into components of the window minus the ``removed`` edges.

        Returns ``(finite, exterior_seeds)``: the fully explored components
        that never reach the frame, and the seeds lying in the component
        that meets the frame.  Each search expands the vertex closest to the
        frame first, so an exterior seed resolves after a short walk.
        ``outside`` optionally lists vertices already known to be exterior;
        ``inside``, when given, marks every vertex outside it as exterior.
        """
        dist = self.frame_distance
        inc = self.incident
        edges = self.edges
        frame = self.frame
        exterior: set[int] = set(outside) if outside else set()
        in_finite: set[int] = set()
        finite: list[frozenset[int]] = []
        exterior_seeds: set[int] = set()
        for s in seeds:
            if s in in_finite:
                continue
            if s in exterior or frame[s] or (inside is not None and s not in inside):
                exterior_seeds.add(s)
                exterior.add(s)
                continue
            seen = {s}
            heap = [(dist[s], s)]
            hit = False
            while heap and not hit:
                _, v = heapq.heappop(heap)
                for e in inc[v]:
                    if e in removed:
                        continue
                    a, b = edges[e]
                    u = b if a == v else a
                    if u in seen:
                        continue
                    if u in exterior or frame[u] or (inside is not None and u not in inside):
                        hit = True
                        break
                    seen.add(u)
                    heapq.heappush(heap, (dist[u], u))
            if hit:
                exterior |= seen
                exterior_seeds.add(s)
            else:
                finite.append(frozenset(seen))
                in_finite |= seen
        return finite, exterior_seeds


@dataclass(frozen=True, eq=False)
class Patch:
    """A finite induced subgraph of interior vertices."""

    parent: HostWindow
    vertices: frozenset[int]

    def __post_init__(self):
        bad = [v for v in self.vertices if v < 0 or v >= self.parent.n]
        if bad:
            raise ValidationError(f"patch vertices out of range: {bad[:5]}")

    @cached_property
    def induced_edges(self) -> frozenset[int]:
        vs = self.vertices
        w = self.parent
        return frozenset(e for v in vs for e in w.incident[v] if w.other_end(e, v) in vs)

    @cached_property
    def boundary(self) -> frozenset[int]:
        return boundary_edges(self)

    def parity_count(self, parity: int) -> int:
        return sum(1 for v in self.vertices if self.parent.parity[v] == parity)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: int) -> bool:
        return v in self.vertices

    def is_connected(self) -> bool:
        return len(connected_components(self.parent, self.vertices)) <= 1


def connected_components(window: HostWindow, vertices: Iterable[int]) -> list[frozenset[int]]:
    """Components of the subgraph induced on ``vertices``."""
    vs = set(vertices)
    comps = []
    seen: set[int] = set()
    for s in sorted(vs):
        if s in seen:
            continue
        comp = {s}
        queue = [s]
        while queue:
            v = queue.pop()
            for u in window.adjacency[v]:
                if u in vs and u not in comp:
                    comp.add(u)
                    queue.append(u)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def build_window(
    parity: Sequence[int],
    frame: Sequence[bool],
    edges: Iterable[tuple[int, int]],
    name: str = "",
    coords=None,
) -> HostWindow:
    """Validate raw vertex/edge data and return an immutable window."""
    n = len(parity)
    if len(frame) != n:
        raise ValidationError("parity and frame lists differ in length")
    canon = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"edge ({u},{v}) references a missing vertex")
        if u == v:
            raise NonBipartite(f"self-loop at vertex {u}")
        if parity[u] == parity[v]:
            raise NonBipartite(f"edge ({u},{v}) joins two vertices of the same parity")
        canon.add((u, v) if u < v else (v, u))
    window = HostWindow(
        parity=tuple(int(p) for p in parity),
        frame=tuple(bool(f) for f in frame),
        edges=tuple(sorted(canon)),
        name=name,
        coords=tuple(coords) if coords is not None else None,
    )
    framed = [v for v in range(n) if window.frame[v]]
    if framed and len(connected_components(window, framed)) != 1:
        raise FrameDisconnected("frame vertices do not form a single connected layer")
    return window


def boundary_edges(patch: Patch) -> frozenset[int]:
    """Edges of the host with exactly one endpoint in the patch."""
    vs = patch.vertices
    w = patch.parent
    out = set()
    for v in vs:
        for e in w.incident[v]:
            if w.other_end(e, v) not in vs:
                out.add(e)
    return frozenset(out)


def exterior_boundary(patch: Patch) -> frozenset[int]:
    """Boundary edges whose outside endpoint lies in the component meeting the frame."""
    w = patch.parent
    if any(w.frame[v] for v in patch.vertices):
        raise WindowTooSmall("patch touches the frame")
    bnd = boundary_edges(patch)
    if not bnd:
        return bnd
    vs = patch.vertices
    reach = set()
    queue = deque(v for v in range(w.n) if w.frame[v])
    reach.update(queue)
    while queue:
        v = queue.popleft()
        for u in w.adjacency[v]:
            if u not in vs and u not in reach:
                reach.add(u)
                queue.append(u)
    out = set()
    for e in bnd:
        a, b = w.edges[e]
        outer = b if a in vs else a
        if outer in reach:
            out.add(e)
    return frozenset(out)


def ball(window: HostWindow, v: int, k: int) -> Patch:
    """Breadth-first ball of radius ``k`` around ``v``; must stay off the frame."""
    if k < 0:
        raise ValueError("radius must be non-negative")
    if window.frame_distance[v] <= k:
        raise WindowTooSmall(f"ball of radius {k} around {v} reaches the frame")
    dist = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if dist[x] == k:
            continue
        for u in window.adjacency[x]:
            if u not in dist:
                dist[u] = dist[x] + 1
                queue.append(u)
    return Patch(window, frozenset(dist))


def isoperimetric_profile(
    window: HostWindow,
    t: int,
    cap: int = 8,
    roots: Iterable[int] | None = None,
) -> Fraction:
    """Smallest boundary-to-volume ratio over connected interior sets of size at most ``t``.

    Only connected sets are searched.  Without ``roots`` every interior
    vertex far enough from the frame is used as a root; passing a single
    root is enough on vertex-transitive hosts.
    """
    if t > cap:
        raise CapExceeded(f"isoperimetric profile requested for t={t} above cap {cap}")
    if t < 1:
        raise ValueError("t must be positive")
    dist = window.frame_distance
    if roots is None:
        roots = [v for v in range(window.n) if dist[v] > t]
        above = True
    else:
        roots = list(roots)
        above = False
    if not roots:
        raise WindowTooSmall(f"no vertex at distance > {t} from the frame")
    best: Fraction | None = None
    safe = lambda u: dist[u] > 0  # noqa: E731
    for r in roots:
        for s in connected_subsets(window.adjacency, r, t, allowed=safe, above_root=above):
            bnd = sum(1 for x in s for u in window.adjacency[x] if u not in s)
            ratio = Fraction(bnd, len(s))
            if best is None or ratio < best:
                best = ratio
    return best


def isoperimetric_constant(
    window: HostWindow, cap: int = 8, roots: Iterable[int] | None = None, form: str = "log"
) -> float:
    """Largest ``C`` with ``profile(t) >= C g(t)`` for every ``t`` up to ``cap``.

    ``form="log"`` uses ``g(t) = log(t+1)/t``; ``form="sqrt"`` uses ``g(t) = t**-0.5``.
    """
    if form not in ("log", "sqrt"):
        raise ValueError("form must be 'log' or 'sqrt'")
    roots = list(roots) if roots is not None else None
    best = math.inf
    for t in range(1, cap + 1):
        phi = float(isoperimetric_profile(window, t, cap=cap, roots=roots))
        best = min(best, phi * t / math.log(t + 1) if form == "log" else phi * math.sqrt(t))
    return best


# ---------------------------------------------------------------- .hcg files


def hcg_text(window: HostWindow, cycles: Iterable[Iterable[int]] = (), comments: Iterable[str] = ()) -> str:
    lines = ["hcg 1"] + [f"# {c}" for c in comments]
    for v in range(window.n):
        lines.append(f"v {v} {'eo'[window.parity[v]]} {'f' if window.frame[v] else 'i'}")
    for u, v in window.edges:
        lines.append(f"e {u} {v}")
    for cyc in cycles:
        lines.append("c " + " ".join(str(e) for e in sorted(cyc)))
    return "\n".join(lines) + "\n"


def write_hcg(path: str | Path, window: HostWindow, cycles: Iterable[Iterable[int]] = (), comments=()) -> None:
    Path(path).write_text(hcg_text(window, cycles, comments), encoding="utf-8")


def read_hcg(path: str | Path) -> tuple[HostWindow, list[list[int]]]:
    """Parse an ``.hcg`` file; cycle lines refer to edges by their line order."""
    verts: dict[int, tuple[int, bool]] = {}
    raw_edges: list[tuple[int, int]] = []
    raw_cycles: list[list[int]] = []
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0].split() != ["hcg", "1"]:
        raise ConfigError(f"{path}:1: missing 'hcg 1' header")
    for lineno, line in enumerate(text[1:], start=2):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v" and len(parts) == 4:
                if parts[3] not in ("i", "f"):
                    raise ValueError(parts[3])
                verts[int(parts[1])] = (parity_code(parts[2]), parts[3] == "f")
            elif parts[0] == "e" and len(parts) == 3:
                raw_edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "c" and len(parts) >= 2:
                raw_cycles.append([int(x) for x in parts[1:]])
            else:
                raise ValueError(line)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: cannot parse line {line!r}") from exc
    n = len(verts)
    if sorted(verts) != list(range(n)):
        raise ConfigError(f"{path}: vertex ids must be dense from 0")
    window = build_window(
        [verts[v][0] for v in range(n)], [verts[v][1] for v in range(n)], raw_edges, name=Path(path).stem
    )
    remap = [window.edge_id(u, v) for u, v in raw_edges]
    cycles = []
    for cyc in raw_cycles:
        try:
            cycles.append(sorted(remap[e] for e in cyc))
        except IndexError as exc:
            raise ConfigError(f"{path}: cycle references unknown edge id") from exc
    return window, cycles
