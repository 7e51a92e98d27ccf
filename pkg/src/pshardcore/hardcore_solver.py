"""Partition functions, tilde weights, the truncated-expansion counter and the sampler.

Three routes to the same partition function on a patch with a parity
boundary condition:

* ``exact_Z`` counts independent sets directly;
* ``contour_Z`` sums contour weights over compatible, matching families
  whose external contours carry the boundary parity;
* ``polymer_Z`` sums tilde weights over compatible families of contours of
  the boundary parity only (a genuine polymer model).

Activities may be ints/Fractions (exact arithmetic) or floats.
"""

from __future__ import annotations

import bisect
import math
import random
import sys
import weakref
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .contour_engine import (
    Contour,
    admissible_patch,
    allowed_edges,
    classify_set,
    compatible,
    contours_from_independent_set,
    contours_in,
    enumerate_contours,
    forced_vertices,
    hole_free,
    independent_set_from_contours,
    precedes,
    weight,
)
from .cycle_space import CycleBasis
from .errors import ActivityTooSmall, CapExceeded, ConfigError, NotCertified, ValidationError, WeightBoundViolated, WindowTooSmall
from .graph_core import EVEN, ODD, PARITY_NAMES, Patch, parity_code
from .polymer_cluster import (
    CompatibleSum,
    KPReport,
    PolymerModel,
    enumerate_clusters,
    kp_verify,
    log_abs,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

FREE = None


def activity(x, exact: bool | None = None):
    """Normalise an activity: strings and ints become Fractions unless floats are requested."""
    if isinstance(x, str):
        x = Fraction(x) if exact is not False else float(x)
    if isinstance(x, int) and not isinstance(x, bool):
        x = Fraction(x)
    if exact is False:
        x = float(x)
    if x <= 0:
        raise ConfigError("activities must be positive")
    return x


def _bc_code(bc):
    if bc is None or bc == "free":
        return FREE
    return parity_code(bc)


# ------------------------------------------------------------------ boundary conditions


@dataclass(frozen=True)
class BoundaryCondition:
    parity: int | None
    forced: frozenset[int]
    occupied: frozenset[int]
    free: tuple[int, ...]

    @property
    def name(self) -> str:
        return "free" if self.parity is None else PARITY_NAMES[self.parity]


def boundary_set(patch: Patch, parity, basis: CycleBasis) -> BoundaryCondition:
    """Vertices fixed by the boundary condition and which of them are occupied."""
    w = basis.window
    if any(w.frame[v] for v in patch.vertices):
        raise WindowTooSmall("patch touches the frame")
    code = _bc_code(parity)
    if code is FREE:
        return BoundaryCondition(None, frozenset(), frozenset(), tuple(sorted(patch.vertices)))
    forced = forced_vertices(basis, patch)
    occ = frozenset(v for v in forced if w.parity[v] == code)
    return BoundaryCondition(code, forced, occ, tuple(sorted(patch.vertices - forced)))


# ------------------------------------------------------------------ exact counting


_POLY_CACHE: "weakref.WeakKeyDictionary[Patch, dict]" = weakref.WeakKeyDictionary()


def _candidates(patch: Patch, bcond: BoundaryCondition, basis: CycleBasis) -> list[int]:
    adj = basis.window.adjacency
    occ = bcond.occupied
    return [v for v in bcond.free if not any(u in occ for u in adj[v])]


def occupancy_polynomial(patch: Patch, bc, basis: CycleBasis, cap: int = 40) -> dict[tuple[int, int], int]:
    """Number of admissible independent sets by (occupied even, occupied odd)."""
    store = _POLY_CACHE.setdefault(patch, {})
    key = ("poly", _bc_code(bc), id(basis))
    if key in store:
        return store[key]
    bcond = boundary_set(patch, bc, basis)
    w = basis.window
    cand = _candidates(patch, bcond, basis)
    if len(cand) > cap:
        raise CapExceeded(f"{len(cand)} free vertices exceed the exact-count cap of {cap}")
    base = (
        sum(1 for v in bcond.occupied if w.parity[v] == EVEN),
        sum(1 for v in bcond.occupied if w.parity[v] == ODD),
    )
    poly = _independence_polynomial(cand, w)
    out = {(a + base[0], b + base[1]): c for (a, b), c in poly.items()}
    store[key] = out
    return out


def _independence_polynomial(vertices: list[int], window) -> dict[tuple[int, int], int]:
    pos = {v: i for i, v in enumerate(vertices)}
    nbr = [0] * len(vertices)
    for v, i in pos.items():
        for u in window.adjacency[v]:
            j = pos.get(u)
            if j is not None:
                nbr[i] |= 1 << j
    par = [window.parity[v] for v in vertices]
    memo: dict[int, dict] = {0: {(0, 0): 1}}

    def mul(p, q):
        out: dict = {}
        for (a, b), c in p.items():
            for (x, y), d in q.items():
                k = (a + x, b + y)
                out[k] = out.get(k, 0) + c * d
        return out

    def solve(mask: int) -> dict:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        low = mask & -mask
        comp, frontier = low, low
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            fresh = nbr[b.bit_length() - 1] & mask & ~comp
            comp |= fresh
            frontier |= fresh
        if comp != mask:
            res = mul(solve(comp), solve(mask & ~comp))
        else:
            i = low.bit_length() - 1
            skip = solve(mask & ~low)
            take = solve(mask & ~low & ~nbr[i])
            shift = (1, 0) if par[i] == EVEN else (0, 1)
            res = dict(skip)
            for (a, b), c in take.items():
                k = (a + shift[0], b + shift[1])
                res[k] = res.get(k, 0) + c
        memo[mask] = res
        return res

    return solve((1 << len(vertices)) - 1)


def _evaluate(poly: dict, lam_e, lam_o):
    total = 0
    for (a, b), c in sorted(poly.items()):
        total += c * lam_e**a * lam_o**b
    return total


def exact_Z(patch: Patch, bc, lam_e, lam_o, basis: CycleBasis, occupied: Iterable[int] = (), vacant: Iterable[int] = ()):
    """Weighted count of independent sets obeying the boundary condition (and optional pins)."""
    lam_e, lam_o = activity(lam_e), activity(lam_o)
    occupied, vacant = frozenset(occupied), frozenset(vacant)
    if not occupied and not vacant:
        return _evaluate(occupancy_polynomial(patch, bc, basis), lam_e, lam_o)
    bcond = boundary_set(patch, bc, basis)
    w = basis.window
    cand = set(_candidates(patch, bcond, basis))
    base = [0, 0]
    for v in bcond.occupied:
        base[w.parity[v]] += 1
    for v in occupied:
        if v in bcond.occupied:
            continue
        if v not in cand:
            return 0 * lam_e
        if any(u in occupied for u in w.adjacency[v]):
            return 0 * lam_e
        base[w.parity[v]] += 1
        cand.discard(v)
        cand.difference_update(w.adjacency[v])
    if vacant & bcond.occupied:
        return 0 * lam_e
    cand -= vacant
    poly = _independence_polynomial(sorted(cand), w)
    return lam_e ** base[0] * lam_o ** base[1] * _evaluate(poly, lam_e, lam_o)


def independent_sets(patch: Patch, bc, basis: CycleBasis, cap: int = 26):
    """Every independent set obeying the boundary condition, as frozensets."""
    bcond = boundary_set(patch, bc, basis)
    w = basis.window
    cand = _candidates(patch, bcond, basis)
    if len(cand) > cap:
        raise CapExceeded(f"{len(cand)} free vertices exceed the enumeration cap of {cap}")
    adj = w.adjacency
    chosen: list[int] = []
    blocked: Counter = Counter()

    def rec(i: int):
        if i == len(cand):
            yield bcond.occupied | frozenset(chosen)
            return
        yield from rec(i + 1)
        v = cand[i]
        if not blocked[v]:
            chosen.append(v)
            for u in adj[v]:
                blocked[u] += 1
            yield from rec(i + 1)
            for u in adj[v]:
                blocked[u] -= 1
            chosen.pop()

    yield from rec(0)


def set_weight(occ: Iterable[int], lam_e, lam_o, window):
    n = [0, 0]
    for v in occ:
        n[window.parity[v]] += 1
    return lam_e ** n[0] * lam_o ** n[1]


def marginal(patch: Patch, bc, lam_e, lam_o, v: int, basis: CycleBasis):
    """Probability that ``v`` is occupied, by exact counting."""
    if v not in patch.vertices:
        raise ValidationError(f"vertex {v} is not in the patch")
    z = exact_Z(patch, bc, lam_e, lam_o, basis)
    return exact_Z(patch, bc, lam_e, lam_o, basis, occupied=(v,)) / z


# ------------------------------------------------------------------ contour sums


def _prefix(patch: Patch, bc: int, lam_e, lam_o):
    lam = lam_e if bc == EVEN else lam_o
    return lam ** patch.parity_count(bc)


def contour_families(patch: Patch, bc, basis: CycleBasis) -> Counter:
    """Laurent exponents ``(sum b_e, sum b_o)`` of every admissible contour family, with multiplicity.

    Walks all pairwise compatible subsets of the patch's contours and keeps
    the matching ones whose external contours all carry the boundary parity.
    """
    code = parity_code(bc)
    store = _POLY_CACHE.setdefault(patch, {})
    key = ("families", code, id(basis))
    if key in store:
        return store[key]
    cs = contours_in(patch, basis)
    n = len(cs)
    conflict = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if not compatible(cs[i], cs[j]):
                conflict[i] |= 1 << j
                conflict[j] |= 1 << i
    inside = patch.vertices if hole_free(patch) else None
    out: Counter = Counter()
    chosen: list[int] = []

    def rec(i: int, banned: int):
        fam = [cs[k] for k in chosen]
        if not fam:
            out[(0, 0)] += 1
        else:
            info = classify_set(fam, inside)
            if info.matching and info.external_parity == PARITY_NAMES[code]:
                out[(sum(g.b_e for g in fam), sum(g.b_o for g in fam))] += 1
        for j in range(i, n):
            if banned >> j & 1:
                continue
            chosen.append(j)
            rec(j + 1, banned | conflict[j])
            chosen.pop()

    rec(0, 0)
    store[key] = out
    return out


def contour_Z(patch: Patch, bc, lam_e, lam_o, basis: CycleBasis):
    """Boundary-parity ground-state weight times the sum over admissible contour families."""
    lam_e, lam_o = activity(lam_e), activity(lam_o)
    code = parity_code(bc)
    total = 0
    for (be, bo), c in sorted(contour_families(patch, code, basis).items()):
        total += c * lam_e ** (-be) * lam_o ** (-bo)
    return _prefix(patch, code, lam_e, lam_o) * total


class TildeWeights:
    """Tilde weights and normalised interior partition functions, memoised per activity pair.

    The tilde weight of an even contour multiplies its weight by the ratio
    of odd to even partition functions of its odd-occupied interior (and
    symmetrically for odd contours).  Interior partition functions come
    from the polymer sum on that interior, which only involves contours
    with strictly smaller interiors; interiors with holes fall back to
    exact counting.
    """

    def __init__(self, basis: CycleBasis, lam_e, lam_o):
        self.basis = basis
        self.lam_e = activity(lam_e)
        self.lam_o = activity(lam_o)
        self._tilde: dict[Contour, object] = {}
        self._xi: dict[tuple[frozenset[int], int], object] = {}
        self.fallbacks = 0

    def lam(self, parity: int):
        return self.lam_e if parity == EVEN else self.lam_o

    def __getitem__(self, g: Contour):
        hit = self._tilde.get(g)
        if hit is not None:
            return hit
        base = weight(g, self.lam_e, self.lam_o) if _is_exact(self.lam_e, self.lam_o) else math.exp(
            weight(g, self.lam_e, self.lam_o, exact=False)
        )
        region = g.int_o if g.label == EVEN else g.int_e
        other = 1 - g.label
        val = base * self.xi(region, other) / self.xi(region, g.label)
        self._tilde[g] = val
        return val

    def xi(self, region: frozenset[int], parity: int):
        """Normalised partition function of a vertex set (product over its components)."""
        from .graph_core import connected_components

        total = 1 if _is_exact(self.lam_e, self.lam_o) else 1.0
        for comp in connected_components(self.basis.window, region):
            total = total * self._xi_component(comp, parity)
        return total

    def _xi_component(self, comp: frozenset[int], parity: int):
        key = (comp, parity)
        hit = self._xi.get(key)
        if hit is not None:
            return hit
        patch = Patch(self.basis.window, comp)
        if hole_free(patch):
            cs = contours_in(patch, self.basis, label=parity)
            model = PolymerModel.from_contours(cs, [self[g] for g in cs])
            val = CompatibleSum(model).value((1 << len(cs)) - 1) if cs else (1 if _is_exact(self.lam_e, self.lam_o) else 1.0)
        else:
            self.fallbacks += 1
            val = exact_Z(patch, parity, self.lam_e, self.lam_o, self.basis) / _prefix(patch, parity, self.lam_e, self.lam_o)
        self._xi[key] = val
        return val

    def table(self, contours: Iterable[Contour]) -> list[tuple[Contour, object]]:
        return [(g, self[g]) for g in sorted(contours, key=lambda g: (len(g.interior), g.size, g.key))]


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def tilde_weights(patch: Patch, lam_e, lam_o, basis: CycleBasis, table: TildeWeights | None = None):
    """Tilde weight of every contour of the patch, in increasing interior size."""
    table = table or TildeWeights(basis, lam_e, lam_o)
    return table.table(contours_in(patch, basis))


def _need_hole_free(patch: Patch) -> None:
    if not hole_free(patch):
        raise ValidationError("the polymer representation needs a patch without holes")


def polymer_Z(patch: Patch, bc, lam_e, lam_o, basis: CycleBasis, table: TildeWeights | None = None):
    """Boundary-parity ground-state weight times the polymer partition function of tilde weights."""
    _need_hole_free(patch)
    code = parity_code(bc)
    table = table or TildeWeights(basis, lam_e, lam_o)
    return _prefix(patch, code, table.lam_e, table.lam_o) * table.xi(patch.vertices, code)


def external_Z(patch: Patch, bc, lam_e, lam_o, basis: CycleBasis, table: TildeWeights | None = None):
    """Sum over mutually external compatible families with interiors resummed at the boundary parity."""
    _need_hole_free(patch)
    code = parity_code(bc)
    table = table or TildeWeights(basis, lam_e, lam_o)
    cs = contours_in(patch, basis, label=code)
    terms = [table[g] * table.xi(g.int_e, code) * table.xi(g.int_o, code) for g in cs]
    n = len(cs)
    clash = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            a, b = cs[i], cs[j]
            if not compatible(a, b) or precedes(a, b) or precedes(b, a):
                clash[i] |= 1 << j
                clash[j] |= 1 << i

    one = 1 if _is_exact(table.lam_e, table.lam_o) else 1.0

    def rec(i: int, banned: int):
        total = one
        for j in range(i, n):
            if not banned >> j & 1:
                total += terms[j] * rec(j + 1, banned | clash[j])
        return total

    return _prefix(patch, code, table.lam_e, table.lam_o) * rec(0, 0)


# ------------------------------------------------------------------ activity threshold


@dataclass(frozen=True)
class ActivityThreshold:
    D: int
    degree: int
    min_size: int
    tau: float
    log_lambda: float

    @property
    def value(self) -> int:
        """Integer activity at or above the threshold."""
        return math.floor(math.exp(self.log_lambda)) + 1

    def as_text(self) -> str:
        return (
            f"D={self.D}\ndegree={self.degree}\nmin_contour={self.min_size}\n"
            f"tau={self.tau!r}\nlog_lambda_star={self.log_lambda!r}\nlambda_star={self.value}\n"
        )


def kp_chain_ratio(D: int, tau: float) -> float:
    return math.e**2 * D * math.exp(-tau / 3)


def kp_chain_holds(D: int, tau: float, min_size: int) -> bool:
    """Counting bound for contours through an edge, summed with the KP boost, stays below 1 per edge."""
    r = kp_chain_ratio(D, tau)
    return r < 1 and r**min_size / (1 - r) <= math.e


def unseen_tail(D: int, tau: float, above: int) -> float:
    """Boosted weight bound of contours through a fixed edge with more than ``above`` edges."""
    r = kp_chain_ratio(D, tau)
    if r >= 1:
        return math.inf
    return r ** (above + 1) / ((1 - r) * math.e * D)


def lambda_star(D: int, degree: int, min_size: int) -> ActivityThreshold:
    """Smallest activity whose decay rate ``log(lambda)/degree - 3`` passes the KP counting chain."""
    lo, hi = 0.0, 1.0
    while not kp_chain_holds(D, hi, min_size):
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if kp_chain_holds(D, mid, min_size):
            hi = mid
        else:
            lo = mid
    return ActivityThreshold(D, degree, min_size, hi, degree * (hi + 3))


def smallest_contour(basis: CycleBasis, kmax: int = 12) -> int:
    """Size of the smallest contour through an edge nearest the middle of the window."""
    w = basis.window
    best = max(range(len(w.edges)), key=lambda e: (min(w.frame_distance[v] for v in w.edges[e]), -e))
    for k in range(1, kmax + 1):
        try:
            if enumerate_contours(best, k, basis):
                return k
        except WindowTooSmall as exc:
            raise WindowTooSmall(f"window too small to find the smallest contour: {exc}") from exc
    raise CapExceeded(f"no contour of size <= {kmax} found")


def host_threshold(basis: CycleBasis) -> ActivityThreshold:
    return lambda_star(basis.D, basis.window.max_degree, smallest_contour(basis))


# ------------------------------------------------------------------ FPTAS


@dataclass(frozen=True)
class Certificate:
    certified: bool
    tau: float
    m: int
    tail_bound: float
    eps: float
    polymers: int
    clusters: int
    admissible: bool
    threshold: ActivityThreshold
    log_xi: float = 0.0  # truncated cluster sum, without the ground-state term
    kp: KPReport | None = field(default=None, repr=False)

    def as_text(self) -> str:
        rows = [
            ("certified", str(self.certified).lower()),
            ("tau", repr(self.tau)),
            ("truncation", self.m),
            ("tail_bound", repr(self.tail_bound)),
            ("eps", repr(self.eps)),
            ("polymers", self.polymers),
            ("clusters", self.clusters),
            ("admissible_patch", str(self.admissible).lower()),
            ("log_lambda_star", repr(self.threshold.log_lambda)),
            ("log_xi", repr(self.log_xi)),
        ]
        if self.kp is not None:
            rows.append(("kp_margin", repr(self.kp.margin)))
        return "".join(f"{k}={v}\n" for k, v in rows)


def truncation_order(n_edges: int, eps: float, tau: float, min_size: int) -> int:
    return max(math.ceil(2 * math.log(max(n_edges, 1) / eps) / tau), min_size)


def fptas_log_Z(
    patch: Patch,
    bc,
    lam_e,
    lam_o,
    eps: float,
    basis: CycleBasis,
    threshold: ActivityThreshold | None = None,
    table: TildeWeights | None = None,
):
    """Truncated cluster expansion of ``log Z`` with a certified error bound.

    The polymers are the boundary-parity contours of the patch with at
    most ``m`` edges; larger contours enter the KP check only through the
    counting bound, and the tail bound covers every omitted cluster.
    Returns ``(log Z estimate, Certificate)``.
    """
    if not 0 < eps:
        raise ConfigError("eps must be positive")
    code = parity_code(bc)
    _need_hole_free(patch)
    threshold = threshold or host_threshold(basis)
    lam_e, lam_o = activity(lam_e), activity(lam_o)
    log_lam = min(log_abs(lam_e), log_abs(lam_o))
    if log_lam < threshold.log_lambda:
        raise ActivityTooSmall(
            f"activity exp({log_lam:.4g}) is below the certified threshold exp({threshold.log_lambda:.4g})"
        )
    tau = log_lam / threshold.degree - 3
    allowed = allowed_edges(basis, patch)
    m = truncation_order(len(allowed), eps, tau, threshold.min_size)
    cs = contours_in(patch, basis, k=m, label=code)
    table = table or TildeWeights(basis, lam_e, lam_o)
    model = PolymerModel.from_contours(cs, [table[g] for g in cs], basis)
    try:
        report = kp_verify(model, tau, probe_edges=allowed, unseen_per_edge=unseen_tail(basis.D, tau, m))
    except WeightBoundViolated as exc:
        raise NotCertified(f"weight bound fails: {exc}") from exc
    if not report.passed:
        raise NotCertified(f"KP condition fails with margin {report.margin:.3g}")
    clusters = enumerate_clusters(model, m) if cs else []
    value = math.fsum(_to_float(c.weight(model)) for c in clusters)
    tail = report.tail_bound(m) if allowed else 0.0
    lam = lam_e if code == EVEN else lam_o
    log_z = patch.parity_count(code) * log_abs(lam) + value
    cert = Certificate(True, tau, m, tail, eps, len(cs), len(clusters), admissible_patch(patch), threshold, value, report)
    return log_z, cert


def _to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator if x.denominator < 1 << 1000 else math.copysign(
            math.exp(log_abs(x)), x
        )
    return float(x)


# ------------------------------------------------------------------ sampler


class Sampler:
    """Draws independent sets from the hard-core measure on a patch.

    A draw picks boundary-parity contours one at a time in canonical
    order, accepting each with the conditional probability implied by the
    polymer partition function of the remaining candidates, keeps the
    external ones, and recurses into their interiors with the matching
    boundary parities.  Regions with fewer than ``exact_below`` free
    vertices, and regions with holes, are sampled exactly.  The final
    contour family is mapped back to an independent set.

    Polymer partition functions come from the truncated cluster expansion
    when the activity is certified, or from exact summation otherwise
    (``strict=False``).
    """

    def __init__(
        self,
        basis: CycleBasis,
        lam_e,
        lam_o,
        eps: float,
        strict: bool = True,
        exact_below: int = 12,
        threshold: ActivityThreshold | None = None,
    ):
        self.basis = basis
        self.table = TildeWeights(basis, lam_e, lam_o)
        self.eps = eps
        self.exact_below = exact_below
        self.threshold = threshold or host_threshold(basis)
        log_lam = min(log_abs(self.table.lam_e), log_abs(self.table.lam_o))
        self.certified = log_lam >= self.threshold.log_lambda
        if strict and not self.certified:
            raise ActivityTooSmall(
                f"activity exp({log_lam:.4g}) is below the certified threshold exp({self.threshold.log_lambda:.4g})"
            )
        self.tau = log_lam / self.threshold.degree - 3
        self._plans: dict[tuple[frozenset[int], int], object] = {}

    # -- plans

    def _plan(self, region: frozenset[int], parity: int):
        key = (region, parity)
        plan = self._plans.get(key)
        if plan is None:
            patch = Patch(self.basis.window, region)
            bcond = boundary_set(patch, parity, self.basis)
            if len(bcond.free) < self.exact_below or not hole_free(patch):
                plan = _ExactPlan(patch, parity, self)
            else:
                plan = _PolymerPlan(patch, parity, self)
            self._plans[key] = plan
        return plan

    def family(self, region: frozenset[int], parity: int, rng: random.Random) -> list[Contour]:
        return self._plan(region, parity).draw(rng)

    def draw(self, patch: Patch, bc, rng: random.Random) -> frozenset[int]:
        code = parity_code(bc)
        fam = self.family(patch.vertices, code, rng)
        return independent_set_from_contours(fam, patch, code, self.basis)


class _ExactPlan:
    def __init__(self, patch: Patch, parity: int, sampler: Sampler):
        w = sampler.basis.window
        lam_e = float(sampler.table.lam_e)
        lam_o = float(sampler.table.lam_o)
        sets = list(independent_sets(patch, parity, sampler.basis))
        # weights relative to the heaviest set keep float sums finite
        logs = [sum(math.log(lam_e) if w.parity[v] == EVEN else math.log(lam_o) for v in s) for s in sets]
        top = max(logs)
        acc = 0.0
        self.cum = []
        for x in logs:
            acc += math.exp(x - top)
            self.cum.append(acc)
        self.sets = sets
        self.patch = patch
        self.parity = parity
        self.basis = sampler.basis
        self._families: dict[int, list[Contour]] = {}

    def draw(self, rng: random.Random) -> list[Contour]:
        i = bisect.bisect_right(self.cum, rng.random() * self.cum[-1])
        i = min(i, len(self.sets) - 1)
        fam = self._families.get(i)
        if fam is None:
            fam = list(contours_from_independent_set(self.sets[i], self.patch, self.parity, self.basis).contours)
            self._families[i] = fam
        return fam


class _PolymerPlan:
    def __init__(self, patch: Patch, parity: int, sampler: Sampler):
        self.sampler = sampler
        cs = contours_in(patch, sampler.basis, label=parity)
        self.contours = cs
        weights = [sampler.table[g] for g in cs]
        self.model = PolymerModel.from_contours(cs, weights, sampler.basis)
        self.fweights = [_to_float(x) for x in weights]
        self.full = (1 << len(cs)) - 1
        self.nbr = self.model.masks
        if sampler.certified:
            n = max(len(cs), 1)
            allowed = allowed_edges(sampler.basis, patch)
            m = sampler.threshold.min_size
            # per-step ratio error stays below eps / (4 n)
            while True:
                tail_edge = unseen_tail(sampler.basis.D, sampler.tau, m)
                bound = len(allowed) * math.exp(-(2 * sampler.tau / 3) * (m + 1))
                if bound <= sampler.eps / (4 * n) or m > 64:
                    break
                m += 1
            sized = PolymerModel.from_contours(
                [g for g in cs if g.size <= m], [w for g, w in zip(cs, weights) if g.size <= m], sampler.basis
            )
            report = kp_verify(sized, sampler.tau, probe_edges=allowed, unseen_per_edge=tail_edge)
            if not report.passed:
                raise NotCertified(f"KP condition fails with margin {report.margin:.3g}")
            index = {g: i for i, g in enumerate(cs)}
            self.clusters = []
            for c in enumerate_clusters(sized, m) if sized.sizes else []:
                mask = 0
                for p in set(c.polymers):
                    mask |= 1 << index[sized.ids[p]]
                self.clusters.append((mask, _to_float(c.weight(sized))))
            self.exact = None
        else:
            self.exact = CompatibleSum(self.model.with_weights(self.fweights))
        self._log_xi: dict[int, float] = {}

    def log_xi(self, mask: int) -> float:
        hit = self._log_xi.get(mask)
        if hit is None:
            if self.exact is not None:
                hit = math.log(self.exact.value(mask))
            else:
                hit = math.fsum(w for cm, w in self.clusters if cm & ~mask == 0)
            self._log_xi[mask] = hit
        return hit

    def draw(self, rng: random.Random) -> list[Contour]:
        remaining = self.full
        chosen = []
        for i in range(len(self.contours)):
            bit = 1 << i
            if not remaining & bit:
                continue
            take_mask = remaining & ~bit & ~self.nbr[i]
            p = self.fweights[i] * math.exp(self.log_xi(take_mask) - self.log_xi(remaining))
            if rng.random() < p:
                chosen.append(self.contours[i])
                remaining = take_mask
            else:
                remaining &= ~bit
        external = [g for g in chosen if not any(g is not h and precedes(g, h) for h in chosen)]
        fam = list(external)
        for g in external:
            for comp, phase in g.interior_components:
                fam.extend(self.sampler.family(comp, phase, rng))
        return fam


def sample(patch: Patch, bc, lam_e, lam_o, eps: float, seed: int, basis: CycleBasis, n: int = 1, strict: bool = True):
    """``n`` seeded draws; the same seed always yields the same list."""
    sampler = Sampler(basis, lam_e, lam_o, eps, strict=strict)
    rng = random.Random(seed)
    return [sampler.draw(patch, bc, rng) for _ in range(n)]
