"""Abstract polymer models and their cluster expansion.

Polymers are indices ``0..n-1`` with a size, a weight, and a symmetric
incompatibility relation (every polymer is incompatible with itself).
Clusters are enumerated as unordered multisets; the ordered-multiset sum
of the expansion is recovered by multiplying each multiset by its number
of distinct orderings, ``n! / prod(mult!)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .errors import CapExceeded, NotCertified, WeightBoundViolated


@dataclass(frozen=True, eq=False)
class PolymerModel:
    sizes: tuple[int, ...]
    weights: tuple
    conflicts: tuple[frozenset[int], ...]  # incompatible partners, self excluded
    ids: tuple = ()
    supports: tuple[frozenset[int], ...] | None = None
    basis: object = field(default=None, repr=False)

    @classmethod
    def build(cls, sizes, weights, incompatible_pairs: Iterable[tuple[int, int]], ids=(), supports=None, basis=None):
        n = len(sizes)
        if len(weights) != n:
            raise ValueError("one weight per polymer is required")
        table: list[set[int]] = [set() for _ in range(n)]
        for a, b in incompatible_pairs:
            if a != b:
                table[a].add(b)
                table[b].add(a)
        return cls(tuple(sizes), tuple(weights), tuple(frozenset(t) for t in table), tuple(ids), supports, basis)

    @classmethod
    def from_contours(cls, contours: Sequence, weights: Sequence, basis=None) -> "PolymerModel":
        """Contours as polymers: incompatible when their union is basis connected.

        ``basis`` is only needed when the list may be empty.
        """
        contours = list(contours)
        by_edge: dict[int, list[int]] = {}
        for i, g in enumerate(contours):
            for e in g.edges:
                by_edge.setdefault(e, []).append(i)
        table: list[set[int]] = [set() for _ in contours]
        for i, g in enumerate(contours):
            for e in g.closure:
                for j in by_edge.get(e, ()):
                    if j != i:
                        table[i].add(j)
                        table[j].add(i)
        basis = contours[0].basis if contours else basis
        return cls(
            tuple(g.size for g in contours),
            tuple(weights),
            tuple(frozenset(t) for t in table),
            tuple(contours),
            tuple(g.edges for g in contours),
            basis,
        )

    def __len__(self) -> int:
        return len(self.sizes)

    def incompatible(self, a: int, b: int) -> bool:
        return a == b or b in self.conflicts[a]

    def with_weights(self, weights: Sequence) -> "PolymerModel":
        return PolymerModel(self.sizes, tuple(weights), self.conflicts, self.ids, self.supports, self.basis)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << j for j in t) for t in self.conflicts)


# ------------------------------------------------------------------ exact Xi


def xi_exact(model: PolymerModel, cap: int | None = 24):
    """Sum over pairwise compatible subsets of the product of weights."""
    n = len(model)
    if cap is not None and n > cap:
        raise CapExceeded(f"{n} polymers exceed the exhaustive cap of {cap}")
    return CompatibleSum(model).value((1 << n) - 1)


class CompatibleSum:
    """Memoised partition function of any sub-collection of a model's polymers.

    Sub-collections are bitmasks.  Evaluation branches on a polymer of
    largest degree (leave it out, or take it and drop its conflicts) and
    factorises over connected pieces of the conflict graph.
    """

    def __init__(self, model: PolymerModel):
        self.model = model
        self.nbr = model.masks
        self.one = _one(model.weights)
        self.memo: dict[int, object] = {0: self.one}

    def _pieces(self, mask: int) -> list[int]:
        nbr = self.nbr
        out = []
        while mask:
            low = mask & -mask
            comp = low
            frontier = low
            while frontier:
                b = frontier & -frontier
                frontier ^= b
                fresh = nbr[b.bit_length() - 1] & mask & ~comp
                comp |= fresh
                frontier |= fresh
            out.append(comp)
            mask &= ~comp
        return out

    def value(self, mask: int):
        hit = self.memo.get(mask)
        if hit is not None:
            return hit
        nbr = self.nbr
        w = self.model.weights
        comps = self._pieces(mask)
        if len(comps) > 1:
            val = self.one
            for c in comps:
                val = val * self.value(c)
        else:
            best, deg = -1, -1
            m = mask
            while m:
                b = m & -m
                m ^= b
                i = b.bit_length() - 1
                d = bin(nbr[i] & mask).count("1")
                if d > deg:
                    best, deg = i, d
            bit = 1 << best
            val = self.value(mask & ~bit) + w[best] * self.value(mask & ~bit & ~nbr[best])
        self.memo[mask] = val
        return val


def _one(weights):
    for x in weights:
        if isinstance(x, Fraction) or isinstance(x, int):
            continue
        return type(x)(1)
    return Fraction(1)


# ------------------------------------------------------------------ Ursell


def ursell(n: int, edges: Iterable[tuple[int, int]], cap: int = 9) -> Fraction:
    """Ursell function of a graph on ``0..n-1``.

    ``C(S)``, the signed count of connected spanning edge sets of ``H[S]``,
    comes from splitting the signed count of all spanning edge sets
    (which is 1 when ``H[S]`` has no edges and 0 otherwise) by the
    component of the lowest vertex.
    """
    if n > cap:
        raise CapExceeded(f"Ursell function on {n} vertices exceeds cap {cap}")
    adj = [0] * n
    for a, b in edges:
        if a != b:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return Fraction(_connected_signed_count(n, tuple(adj)), math.factorial(n))


@lru_cache(maxsize=4096)
def _connected_signed_count(n: int, adj: tuple[int, ...]) -> int:
    full = (1 << n) - 1
    empty_inside = [False] * (full + 1)
    for s in range(full + 1):
        ok = True
        m = s
        while m:
            b = m & -m
            m ^= b
            if adj[b.bit_length() - 1] & s:
                ok = False
                break
        empty_inside[s] = ok
    conn = [0] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        total = 1 if empty_inside[s] else 0
        rest = s ^ low
        sub = rest
        # proper subsets T of s that contain the low bit: T = low | sub, sub ⊊ rest
        while True:
            sub = (sub - 1) & rest
            if sub == rest:
                break
            t = low | sub
            if empty_inside[s ^ t]:
                total -= conn[t]
            if sub == 0:
                break
        conn[s] = total
    return conn[full]


# ------------------------------------------------------------------ clusters


@dataclass(frozen=True)
class Cluster:
    polymers: tuple[int, ...]  # sorted, with repetition
    ursell: Fraction  # phi(H(X))
    orderings: int  # distinct orderings of the multiset
    total_size: int

    @property
    def coefficient(self) -> Fraction:
        return self.ursell * self.orderings

    def weight(self, model: PolymerModel):
        val = self.coefficient
        for p in self.polymers:
            val = val * model.weights[p]
        return val

    def support(self, model: PolymerModel) -> frozenset[int]:
        out: set[int] = set()
        for p in set(self.polymers):
            out |= model.supports[p]
        return frozenset(out)


def _incompatibility_graph(model: PolymerModel, members: tuple[int, ...]) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i in range(len(members))
        for j in range(i + 1, len(members))
        if model.incompatible(members[i], members[j])
    ]


def make_cluster(model: PolymerModel, members: Iterable[int]) -> Cluster:
    members = tuple(sorted(members))
    n = len(members)
    phi = ursell(n, _incompatibility_graph(model, members), cap=max(9, n))
    orderings = math.factorial(n)
    for c in Counter(members).values():
        orderings //= math.factorial(c)
    return Cluster(members, phi, orderings, sum(model.sizes[p] for p in members))


def enumerate_clusters(
    model: PolymerModel,
    m: int,
    roots: Iterable[int] | None = None,
    budget: int = 2_000_000,
) -> list[Cluster]:
    """Clusters of total size at most ``m`` (containing a root polymer, if given).

    Multisets grow one incompatible polymer at a time; every connected
    multiset can be built this way from any of its members, and keeping
    a set of sorted tuples removes repeats.
    """
    sizes = model.sizes
    start = sorted(set(range(len(model)) if roots is None else roots))
    frontier = {(p,) for p in start if sizes[p] <= m}
    seen = set(frontier)
    while frontier:
        nxt = set()
        for members in frontier:
            room = m - sum(sizes[p] for p in members)
            cands = set()
            for p in set(members):
                cands.add(p)
                cands.update(model.conflicts[p])
            for q in cands:
                if sizes[q] <= room:
                    key = tuple(sorted(members + (q,)))
                    if key not in seen:
                        seen.add(key)
                        nxt.add(key)
            if len(seen) > budget:
                raise CapExceeded(f"more than {budget} clusters of total size <= {m}")
        frontier = nxt
    return [make_cluster(model, members) for members in sorted(seen, key=lambda t: (len(t), t))]


def cluster_sum(model: PolymerModel, clusters: Iterable[Cluster]):
    terms = [c.weight(model) for c in clusters]
    if any(isinstance(t, float) for t in terms):
        return math.fsum(float(t) for t in terms)
    return sum(terms, Fraction(0))


# ------------------------------------------------------------------ KP


def log_abs(x) -> float:
    """``log|x|`` without underflow for exact rationals; ``-inf`` at zero."""
    if x == 0:
        return -math.inf
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return math.log(abs(x.numerator)) - math.log(x.denominator)
    return math.log(abs(float(x)))


@dataclass(frozen=True)
class KPReport:
    tau: float
    passed: bool
    margin: float  # smallest alpha1 - lhs over polymers and probes
    eta: float
    alpha1: tuple[float, ...]
    alpha2: tuple[float, ...]
    probe_count: int
    probe_alpha1: float = 1.0

    def tail_bound(self, m: int) -> float:
        """Bound on the summed |w(X)| of clusters with total size above ``m``."""
        decay = math.exp(-(2 * self.tau / 3) * (m + 1))
        if self.probe_count:
            return self.probe_count * self.probe_alpha1 * decay
        return sum(self.alpha1) * decay

    def as_text(self) -> str:
        return "\n".join(
            f"{k}={v}"
            for k, v in (
                ("tau", repr(self.tau)),
                ("pass", str(self.passed).lower()),
                ("margin", repr(self.margin)),
                ("eta", repr(self.eta)),
                ("polymers", len(self.alpha1)),
                ("probes", self.probe_count),
            )
        ) + "\n"


def kp_verify(
    model: PolymerModel,
    tau: float,
    alpha1=None,
    alpha2=None,
    probes: bool = True,
    probe_edges: Iterable[int] | None = None,
    unseen_per_edge: float = 0.0,
) -> KPReport:
    """Check the weight bound and the Kotecký–Preiss inequality for every polymer.

    Default schedule: ``alpha1 = |polymer|`` and ``alpha2 = (2 tau / 3) |polymer|``.
    With ``probes`` and edge supports available, edges (``probe_edges``, or
    every edge some polymer uses) are also checked as zero-weight one-edge
    polymers; those checks give the tail bound on truncated sums.

    ``unseen_per_edge`` accounts for polymers left out of the model: it is
    an upper bound on their boosted weights summed over polymers through a
    fixed edge, charged once for every edge linked to the polymer checked.
    """
    n = len(model)
    a1 = tuple(float(s) for s in model.sizes) if alpha1 is None else tuple(alpha1(p) for p in range(n))
    a2 = tuple(2 * tau / 3 * s for s in model.sizes) if alpha2 is None else tuple(alpha2(p) for p in range(n))
    logs = [log_abs(x) for x in model.weights]
    offenders = [p for p in range(n) if logs[p] > -tau * model.sizes[p] + 1e-12]
    if offenders:
        raise WeightBoundViolated(
            f"{len(offenders)} polymer(s) exceed |w| <= exp(-tau |polymer|) at tau={tau}", offenders=offenders
        )
    boost = [math.exp(logs[p] + a1[p] + a2[p]) if logs[p] > -math.inf else 0.0 for p in range(n)]
    links = model.basis.links if model.basis is not None else None
    if unseen_per_edge and links is None:
        raise ValueError("accounting for unseen polymers needs the cycle basis")

    def reach(edges: Iterable[int]) -> int:
        near = set()
        for e in edges:
            near.add(e)
            near.update(links[e])
        return len(near)

    margin = math.inf
    for p in range(n):
        lhs = math.fsum([boost[p]] + [boost[q] for q in model.conflicts[p]])
        if unseen_per_edge:
            lhs += unseen_per_edge * reach(model.supports[p])
        margin = min(margin, a1[p] - lhs)
    probe_count = 0
    if probes and model.supports is not None and links is not None:
        by_edge: dict[int, list[int]] = {}
        for p, sup in enumerate(model.supports):
            for e in sup:
                by_edge.setdefault(e, []).append(p)
        targets = sorted(by_edge) if probe_edges is None else sorted(set(probe_edges))
        probe_count = len(targets)
        for e in targets:
            near = set()
            for f in (e, *links[e]):
                near.update(by_edge.get(f, ()))
            lhs = math.fsum(boost[q] for q in near)
            if unseen_per_edge:
                lhs += unseen_per_edge * reach((e,))
            margin = min(margin, 1.0 - lhs)
    if margin == math.inf:
        margin = 0.0
    return KPReport(tau, margin >= 0, margin, math.exp(-tau / 3), a1, a2, probe_count)


def log_xi_truncated(model: PolymerModel, m: int, report: KPReport):
    """Cluster sum through total size ``m`` and the certified bound on what is left out."""
    if not report.passed:
        raise NotCertified("cluster expansion is not certified for this model (KP check failed)")
    clusters = enumerate_clusters(model, m)
    return cluster_sum(model, clusters), report.tail_bound(m)


# ------------------------------------------------------------------ bulk/surface split


@dataclass(frozen=True)
class BulkSurface:
    q: dict  # vertex -> Q(v)
    surface: object
    log_xi_patch: object
    parity: int


def q_and_surface(model: PolymerModel, patch, parity, m: int) -> BulkSurface:
    """Per-vertex bulk terms and the boundary correction for a patch, truncated at total size ``m``.

    Every cluster contributes ``w(X)/|support|`` to each edge of its support.
    ``Q(v)`` collects that over edges at ``v``; the surface term collects
    it over clusters that use a polymer not allowed in the patch, summed on
    edges at patch vertices of the given parity.  Returns also the truncated
    log-partition function of the polymers allowed in the patch.
    """
    from .contour_engine import allowed_edges
    from .graph_core import parity_code

    if model.supports is None or model.basis is None:
        raise ValueError("bulk/surface split needs polymers with edge supports")
    parity = parity_code(parity)
    window = model.basis.window
    allowed = allowed_edges(model.basis, patch)
    inside_ok = [sup <= allowed for sup in model.supports]
    targets = sorted(v for v in patch.vertices if window.parity[v] == parity)
    target_edges = {e for v in targets for e in window.incident[v]}
    roots = [p for p, sup in enumerate(model.supports) if sup & target_edges]
    clusters = enumerate_clusters(model, m, roots=roots)
    exact = not any(isinstance(x, float) for x in model.weights)
    zero = Fraction(0) if exact else 0.0
    q = {v: zero for v in targets}
    surface = zero
    log_xi = zero
    for c in clusters:
        sup = c.support(model)
        share = c.weight(model) / len(sup)
        outside = not all(inside_ok[p] for p in c.polymers)
        if not outside:
            log_xi += c.weight(model)
        for v in targets:
            k = sum(1 for e in window.incident[v] if e in sup)
            if k:
                q[v] += k * share
                if outside:
                    surface += k * share
    return BulkSurface(q, surface, log_xi, parity)
