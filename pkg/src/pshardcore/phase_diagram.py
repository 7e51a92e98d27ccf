"""Truncated weights, truncated free energies and the coexistence curve.

Hosts must look the same from every vertex of a parity class, so the
per-vertex bulk term of each phase is a single number.  The odd activity
is written ``lam_o = rho * lam_e ** (deg_o / deg_e)`` and the coexistence
point is the ``rho`` where the two truncated free energies meet.

Truncated weights are built class by class (class = interior size).
Class-one contours keep their tilde weight; a contour of class ``n+1``
has its tilde weight damped by the cutoff of the free-energy gap of
step ``n`` scaled by the square root of its interior size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .contour_engine import Contour, enumerate_contours
from .cycle_space import CycleBasis
from .errors import ActivityTooSmall, NoRootInBracket, UnsupportedHost, WindowTooSmall
from .graph_core import EVEN, ODD, HostWindow, ball, isoperimetric_constant
from .hardcore_solver import TildeWeights, exact_Z, host_threshold
from .lattice_gallery import HostSpec, SymmetryData, generate
from .polymer_cluster import PolymerModel, enumerate_clusters, kp_verify, log_abs
from .errors import WeightBoundViolated

PHASE_KINDS = ("vertex_transitive", "parity_transitive")


def smoothstep_cutoff(s: float, kappa: float) -> float:
    """1 up to ``kappa``, 0 from ``2 kappa`` on, cubic and C¹ in between."""
    if s <= kappa:
        return 1.0
    if s >= 2 * kappa:
        return 0.0
    t = (s - kappa) / kappa
    return 1.0 - t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class CutoffFunction:
    kappa: float

    def __call__(self, s: float) -> float:
        return smoothstep_cutoff(s, self.kappa)


@dataclass(frozen=True)
class PhaseState:
    n: int
    psi_e: float
    psi_o: float
    q_e: float
    q_o: float
    a_e: float
    a_o: float
    kappa: float
    rho: float
    bulk_e: float = 0.0
    bulk_o: float = 0.0

    @property
    def gap(self) -> float:
        return self.psi_o - self.psi_e


@dataclass
class _Term:
    polymers: tuple[int, ...]
    coefficient: float
    share: float  # edges of the support at the centre / support size
    top_class: int


@dataclass
class PhaseContext:
    """Everything about a host that does not depend on the activities."""

    window: HostWindow
    basis: CycleBasis
    sym: SymmetryData
    m: int
    degrees: tuple[int, int]
    centres: dict
    c_iso: float
    polymers: dict = field(default_factory=dict)  # parity -> list of contours
    terms: dict = field(default_factory=dict)  # (parity, centre) -> list of _Term
    label: str = ""

    @property
    def max_class(self) -> int:
        return max((len(g.interior) for gs in self.polymers.values() for g in gs), default=0)


def check_host(sym: SymmetryData) -> None:
    if sym.kind not in PHASE_KINDS:
        raise UnsupportedHost(
            f"host symmetry kind '{sym.kind}' is not supported by the phase-diagram solver; "
            f"it needs a host that is vertex transitive or transitive within each parity class "
            f"({', '.join(PHASE_KINDS)})"
        )


def _central(window: HostWindow, parity: int, avoid=()) -> int:
    dist = window.frame_distance
    cands = [v for v in range(window.n) if window.parity[v] == parity and v not in avoid]
    return max(cands, key=lambda v: (dist[v], -v))


def prepare(spec: HostSpec | tuple, m: int = 6, iso_cap: int = 8) -> PhaseContext:
    """Enumerate every contour that can sit in a cluster of total size ``m`` touching a centre vertex."""
    if isinstance(spec, HostSpec):
        window, basis, sym = generate(spec)
        label = spec.label()
    else:
        window, basis, sym = spec
        label = window.name
    check_host(sym)
    degrees = window.degree_by_parity()
    centres = {}
    for x in (EVEN, ODD):
        v = _central(window, x)
        alt = None
        for g in sym.generators:
            u = g.get(v)
            if u is not None and window.parity[u] == x and u != v:
                alt = u
                break
        centres[x] = (v, alt)
    ctx = PhaseContext(window, basis, sym, m, degrees, centres, 0.0, label=label)
    roots = [v for x in (EVEN, ODD) for v in centres[x] if v is not None]
    need = m + (m + 1) // 2 + 2
    for v in roots:
        if window.frame_distance[v] <= need:
            raise WindowTooSmall(f"phase solver needs frame distance > {need} around vertex {v}")
    ctx.c_iso = isoperimetric_constant(window, cap=iso_cap, roots=[centres[EVEN][0], centres[ODD][0]], form="sqrt")
    found = _reachable_contours(basis, roots, m)
    for x in (EVEN, ODD):
        ctx.polymers[x] = sorted(g for g in found if g.label == x)
        model = PolymerModel.from_contours(ctx.polymers[x], [0.0] * len(ctx.polymers[x]))
        for v in centres[x]:
            if v is None:
                continue
            at_v = set(window.incident[v])
            rooted = [i for i, g in enumerate(ctx.polymers[x]) if g.edges & at_v]
            terms = []
            for c in enumerate_clusters(model, m, roots=rooted):
                sup = c.support(model)
                k = sum(1 for e in sup if e in at_v)
                if k:
                    top = max(len(ctx.polymers[x][p].interior) for p in c.polymers)
                    terms.append(_Term(c.polymers, float(c.coefficient), k / len(sup), top))
            ctx.terms[(x, v)] = terms
    return ctx


def _reachable_contours(basis: CycleBasis, roots: Sequence[int], m: int) -> set[Contour]:
    """Contours reachable from edges at the roots by incompatibility chains of total size at most ``m``."""
    window = basis.window
    cache: dict[tuple[int, int], list[Contour]] = {}

    def through(e: int, k: int) -> list[Contour]:
        key = (e, k)
        if key not in cache:
            cache[key] = enumerate_contours(e, k, basis)
        return cache[key]

    spent: dict[Contour, int] = {}
    frontier: list[tuple[Contour, int]] = []
    for v in roots:
        for e in window.incident[v]:
            for g in through(e, m):
                if spent.get(g, m + 1) > g.size:
                    spent[g] = g.size
                    frontier.append((g, g.size))
    while frontier:
        nxt = []
        for g, used in frontier:
            room = m - used
            if room < 1:
                continue
            for e in g.closure:
                for h in through(e, room):
                    cost = used + h.size
                    if cost <= m and spent.get(h, m + 1) > cost:
                        spent[h] = cost
                        nxt.append((h, cost))
        frontier = nxt
    return set(spent)


# ------------------------------------------------------------------ the iteration


def odd_activity(lam_e: float, rho: float, degrees: tuple[int, int]) -> float:
    return rho * lam_e ** (degrees[ODD] / degrees[EVEN])


def cutoff_parameter(ctx: PhaseContext, lam_e: float) -> float:
    return ctx.c_iso * math.log(lam_e) / (8 * ctx.degrees[EVEN])


def truncated_weight(g: Contour, tilde, gap_prev: float | None, kappa: float, degrees: tuple[int, int]):
    """Truncated weight of one contour from its tilde weight and the previous class's free-energy gap.

    ``gap_prev`` is ``psi_o - psi_e`` after the previous class, or ``None``
    for class one (whose truncated weight is its tilde weight).
    """
    if len(g.interior) <= 1 or gap_prev is None:
        return tilde
    if g.label == EVEN:
        s = gap_prev * degrees[ODD] * math.sqrt(sum(1 for v in g.int_o if g.basis.window.parity[v] == ODD))
    else:
        s = -gap_prev * degrees[EVEN] * math.sqrt(sum(1 for v in g.int_e if g.basis.window.parity[v] == EVEN))
    return tilde * smoothstep_cutoff(s, kappa)


@dataclass
class PsiRun:
    states: list[PhaseState]
    weights: dict  # parity -> list of truncated weights
    symmetry_gap: float
    certified: bool
    kp_margin: float | None


def iterate_psi(ctx: PhaseContext, lam_e: float, rho: float, n_max: int | None = None) -> PsiRun:
    """Truncated free energies for classes ``0..n_max`` at one activity pair."""
    lam_e = float(lam_e)
    n_max = ctx.max_class if n_max is None else n_max
    deg = ctx.degrees
    lam_o = odd_activity(lam_e, rho, deg)
    table = TildeWeights(ctx.basis, lam_e, lam_o)
    kappa = cutoff_parameter(ctx, lam_e)
    q = {EVEN: math.log(lam_e) / deg[EVEN], ODD: math.log(lam_o) / deg[ODD]}
    classes = {x: [len(g.interior) for g in ctx.polymers[x]] for x in (EVEN, ODD)}
    tildes = {x: [table[g] for g in ctx.polymers[x]] for x in (EVEN, ODD)}
    hat = {x: [0.0] * len(ctx.polymers[x]) for x in (EVEN, ODD)}
    states = [_state(0, q, {EVEN: 0.0, ODD: 0.0}, deg, kappa, rho)]
    sym_gap = 0.0
    for n in range(1, n_max + 1):
        gap_prev = None if n == 1 else states[-1].gap
        for x in (EVEN, ODD):
            for i, g in enumerate(ctx.polymers[x]):
                if classes[x][i] == n:
                    hat[x][i] = truncated_weight(g, tildes[x][i], gap_prev, kappa, deg)
        bulk = {}
        for x in (EVEN, ODD):
            v, alt = ctx.centres[x]
            bulk[x] = _bulk(ctx.terms[(x, v)], hat[x], n)
            if alt is not None and (x, alt) in ctx.terms:
                other = _bulk(ctx.terms[(x, alt)], hat[x], n)
                sym_gap = max(sym_gap, abs(other - bulk[x]))
        states.append(_state(n, q, bulk, deg, kappa, rho))
    certified, margin = _certify(ctx, lam_e, lam_o, hat)
    return PsiRun(states, hat, sym_gap, certified, margin)


def _bulk(terms: list[_Term], weights: list[float], n: int) -> float:
    parts = []
    for t in terms:
        if t.top_class > n:
            continue
        val = t.coefficient * t.share
        for p in t.polymers:
            val *= weights[p]
        parts.append(val)
    return math.fsum(parts)


def _state(n, q, bulk, deg, kappa, rho) -> PhaseState:
    pe = q[EVEN] + bulk[EVEN] / deg[EVEN]
    po = q[ODD] + bulk[ODD] / deg[ODD]
    top = max(pe, po)
    return PhaseState(n, pe, po, q[EVEN], q[ODD], top - pe, top - po, kappa, rho, bulk[EVEN], bulk[ODD])


def _certify(ctx: PhaseContext, lam_e: float, lam_o: float, hat: dict) -> tuple[bool, float | None]:
    """Activity above the host threshold and KP passing for the truncated weights."""
    threshold = host_threshold(ctx.basis)
    if min(math.log(lam_e), math.log(lam_o)) < threshold.log_lambda:
        return False, None
    tau = min(math.log(lam_e), math.log(lam_o)) / threshold.degree - 3
    margin = math.inf
    for x in (EVEN, ODD):
        model = PolymerModel.from_contours(ctx.polymers[x], hat[x])
        try:
            report = kp_verify(model, tau)
        except WeightBoundViolated:
            return False, None
        margin = min(margin, report.margin)
    return margin >= 0, margin


# ------------------------------------------------------------------ coexistence


@dataclass(frozen=True)
class CoexistencePoint:
    lam_e: float
    rho: float
    log_lam_o: float
    psi_e: float
    psi_o: float
    residual: float
    certified: bool
    n: int
    m: int
    c_iso: float
    kappa: float
    iterations: int

    @property
    def lam_o(self) -> float:
        return math.exp(self.log_lam_o)

    def row(self) -> dict:
        return {
            "lambda_e": repr(self.lam_e),
            "rho_c": repr(self.rho),
            "log_lambda_o_c": repr(self.log_lam_o),
            "psi_e": repr(self.psi_e),
            "psi_o": repr(self.psi_o),
            "residual": repr(self.residual),
            "certified": str(self.certified).lower(),
        }


def coexistence_solve(
    ctx: PhaseContext,
    lam_e: float,
    n_max: int | None = None,
    tol: float = 1e-10,
    bracket: tuple[float, float] = (0.5, 2.0),
    strict: bool = False,
    grid: int = 9,
) -> CoexistencePoint:
    """Root in ``rho`` of the truncated free-energy gap by bisection on the bracket.

    The gap is sampled on a grid first; it must increase strictly across
    the bracket (which makes the root unique) and change sign.
    """
    lam_e = float(lam_e)
    n_max = ctx.max_class if n_max is None else n_max

    def gap(rho: float) -> tuple[float, PsiRun]:
        run = iterate_psi(ctx, lam_e, rho, n_max)
        return run.states[-1].gap, run

    lo, hi = bracket
    samples = [lo + (hi - lo) * i / (grid - 1) for i in range(grid)]
    values = [gap(r)[0] for r in samples]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise NoRootInBracket("free-energy gap is not increasing across the bracket; uniqueness cannot be asserted")
    if values[0] > 0 or values[-1] < 0:
        raise NoRootInBracket(
            f"free-energy gap has no sign change on [{lo}, {hi}] (gap {values[0]:.3g} .. {values[-1]:.3g})"
        )
    f_lo, f_hi = values[0], values[-1]
    steps = 0
    while hi - lo > tol and steps < 200:
        mid = (lo + hi) / 2
        f_mid = gap(mid)[0]
        steps += 1
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    rho = (lo + hi) / 2
    if lo < hi and f_hi != f_lo:
        # one secant step inside the final bracket
        rho = min(max(lo - f_lo * (hi - lo) / (f_hi - f_lo), lo), hi)
    res, run = gap(rho)
    if strict and not run.certified:
        raise ActivityTooSmall(f"coexistence at lambda_e={lam_e} is not certified (activity below threshold or KP fails)")
    st = run.states[-1]
    log_lam_o = math.log(rho) + (ctx.degrees[ODD] / ctx.degrees[EVEN]) * math.log(lam_e)
    return CoexistencePoint(
        lam_e, rho, log_lam_o, st.psi_e, st.psi_o, res, run.certified, st.n, ctx.m, ctx.c_iso, st.kappa, steps
    )


# ------------------------------------------------------------------ finite-volume free energy


@dataclass(frozen=True)
class FreeEnergyPoint:
    radius: int
    vertices: int
    edges: int
    boundary: int
    value: float

    @property
    def surface_ratio(self) -> float:
        return self.boundary / self.vertices


def free_energy_estimate(window: HostWindow, basis: CycleBasis, lam_e, lam_o, bc, radii: Sequence[int], centre: int | None = None):
    """``log Z`` over ``|E|`` on growing balls, by exact counting."""
    centre = _central(window, EVEN) if centre is None else centre
    out = []
    for r in radii:
        patch = ball(window, centre, r)
        z = exact_Z(patch, bc, lam_e, lam_o, basis)
        edges = len(patch.induced_edges)
        out.append(FreeEnergyPoint(r, len(patch), edges, len(patch.boundary), log_abs(z) / edges))
    return out
