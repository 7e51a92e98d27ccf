"""Batch command-line front end.

Every command resolves one effective configuration (built-in defaults,
then an optional ``key=value`` file, then flags) and writes a plain-text
artifact that starts with that configuration as ``#`` comment lines.
The thread count is left out of the header because results never depend
on it.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .contour_engine import (
    contour_table_row,
    contours_from_independent_set,
    contours_in,
    enumerate_contours,
    independent_set_from_contours,
)
from .cycle_space import CycleBasis, basis_report, invariant_completion
from .errors import CapExceeded, ConfigError, HardcoreError, ValidationError, WindowTooSmall
from .graph_core import EVEN, ODD, Patch, ball, hcg_text, parity_code, read_hcg
from .hardcore_solver import (
    Sampler,
    TildeWeights,
    activity,
    boundary_set,
    contour_Z,
    exact_Z,
    external_Z,
    fptas_log_Z,
    host_threshold,
    independent_sets,
    marginal,
    polymer_Z,
)
from .lattice_gallery import FAMILIES, HostSpec, SymmetryData, generate
from .phase_diagram import coexistence_solve, prepare
from .polymer_cluster import PolymerModel, cluster_sum, enumerate_clusters, log_abs, ursell

COMMANDS = ("gen", "basis", "contours", "clusters", "count", "sample", "marginal", "phase", "selftest")
FIXTURES = {"z2": "z2.hcg"}
PATCH_FIXTURES = {"cross": "cross.patch"}


def _bool(text: str) -> bool:
    key = str(text).strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


# name -> (converter, default, help).  Defaults are resolved before anything runs
# so the artifact header always shows the value that was actually used.
OPTIONS: dict[str, tuple] = {
    "host": (str, "grid_zd", f"lattice family ({', '.join(FAMILIES)}), bundled fixture 'z2', or an .hcg path"),
    "side": (int, 10, "window side, frame included"),
    "dim": (int, 2, "dimension for grid_zd, slab_zd2, decorated_zd2"),
    "width": (int, 4, "cylinder circumference"),
    "length": (int, 10, "cylinder length"),
    "frame_depth": (int, 0, "frame layers (0 = family default)"),
    "patch": (str, "ball:3", "ball:R, ball:R@V, vertices:V,V,..., file:PATH, or bundled 'cross'"),
    "bc": (str, "even", "boundary condition: even, odd (free for exact counts)"),
    "lam_e": (str, "1", "even activity: rational, decimal, or 'star' for the certified threshold"),
    "lam_o": (str, "same", "odd activity, 'same' copies lam_e"),
    "eps": (float, 0.01, "target accuracy for fptas and sample"),
    "seed": (int, 0, "random seed"),
    "draws": (int, 100, "number of samples"),
    "k": (int, 6, "contour size budget"),
    "m": (int, 6, "cluster size budget (clusters, phase)"),
    "cap": (int, 26, "largest free-vertex count the exact oracles accept"),
    "arith": (str, "exact", "exact (rationals) or float"),
    "strict": (_bool, False, "refuse activities below the certified threshold"),
    "iso_cap": (int, 8, "largest set size in the isoperimetric search"),
    "label": (str, "both", "contour label filter: even, odd, both"),
    "edge": (int, -1, "root edge for contour enumeration (-1 = use the patch)"),
    "vertex": (int, -1, "vertex for marginals (-1 = most central vertex of the patch)"),
    "bracket": (str, "0.5,2.0", "rho bracket for the coexistence root"),
    "tol": (float, 1e-10, "bisection tolerance on rho"),
}
HIDDEN = ("threads", "config", "out")
ALIASES = {
    "host": ("--family",),
    "k": ("--size",),
    "m": ("--max-size",),
    "lam_e": ("--lambda-e",),
    "lam_o": ("--lambda-o",),
    "draws": ("--n",),
}
_ALIAS_KEYS = {flag[2:].replace("-", "_"): name for name, flags in ALIASES.items() for flag in flags}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for name, (conv, _, text) in OPTIONS.items():
        flags = ("--" + name.replace("_", "-"), *ALIASES.get(name, ()))
        if conv is _bool:
            common.add_argument(*flags, dest=name, action=argparse.BooleanOptionalAction, default=None, help=text)
        else:
            common.add_argument(*flags, dest=name, type=conv, default=None, help=text)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: available CPUs)")
    common.add_argument("--config", default=None, help="key=value file; flags override it")
    common.add_argument("--out", default=None, help="artifact path (default: stdout)")

    parser = _Parser(prog="pshardcore", description="Contour and polymer tools for the bipartite hard-core model.")
    parser.add_argument("--version", action="version", version=f"pshardcore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", parents=[common], help="write a host window as .hcg")
    p = sub.add_parser("basis", parents=[common], help="validate or complete a cycle basis")
    p.add_argument("action", choices=("validate", "complete"))
    p = sub.add_parser("contours", parents=[common], help="list contours as CSV")
    p.add_argument("action", choices=("enum",))
    sub.add_parser("clusters", parents=[common], help="list clusters of small contours with Ursell weights")
    p = sub.add_parser("count", parents=[common], help="partition function of a patch")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--fptas", dest="mode", action="store_const", const="fptas")
    sub.add_parser("sample", parents=[common], help="seeded samples of the hard-core measure")
    sub.add_parser("marginal", parents=[common], help="exact occupation probability of one vertex")
    sub.add_parser("phase", parents=[common], help="coexistence points; --lam-e takes a comma list")
    sub.add_parser("selftest", parents=[common], help="oracle-equivalence checks on small instances")
    return parser


def read_config(path: str) -> dict:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        key = key.replace("-", "_")
        key = _ALIAS_KEYS.get(key, key)
        if key == "threads":
            conv = int
        elif key == "mode":
            conv = str
        elif key in OPTIONS:
            conv = OPTIONS[key][0]
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def effective_config(args: argparse.Namespace) -> dict:
    cfg = {name: default for name, (_, default, _) in OPTIONS.items()}
    cfg["threads"] = os.cpu_count() or 1
    if args.config:
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None:
            cfg[key] = value
    if cfg["command"] == "count":
        cfg.setdefault("mode", "exact")
        cfg["mode"] = cfg.get("mode") or "exact"
    if cfg["lam_o"] == "same":
        cfg["lam_o"] = cfg["lam_e"]
    if cfg["arith"] not in ("exact", "float"):
        raise ConfigError(f"arith must be 'exact' or 'float', not {cfg['arith']!r}")
    if cfg["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    return cfg


def header(cfg: dict) -> list[str]:
    keys = sorted(k for k in cfg if k not in HIDDEN)
    return [f"# pshardcore {__version__}"] + [f"# {k}={cfg[k]}" for k in keys]


# ------------------------------------------------------------------ inputs


def _fixture(name: str) -> Path:
    return Path(str(resources.files("pshardcore") / "fixtures" / name))


def load_host(cfg: dict):
    """Return ``(window, basis, symmetry)`` for the configured host."""
    host = cfg["host"]
    if host in FAMILIES:
        spec = HostSpec(host, cfg["side"], cfg["dim"], cfg["width"], cfg["length"], cfg["frame_depth"])
        return generate(spec)
    path = _fixture(FIXTURES[host]) if host in FIXTURES else Path(host)
    if not path.is_file():
        raise ConfigError(f"host {host!r} is neither a known family, a bundled fixture, nor a readable file")
    window, cycles = read_hcg(path)
    basis = CycleBasis.from_cycles(window, cycles)
    return window, basis, SymmetryData("none", window.degree_by_parity())


def central_vertex(window, vertices, parity=None) -> int:
    dist = window.frame_distance
    cands = [v for v in vertices if parity is None or window.parity[v] == parity]
    if not cands:
        raise ConfigError("no vertex of the requested parity in the patch")
    return max(cands, key=lambda v: (dist[v], -v))


def _read_patch_file(path: Path, cfg: dict) -> list[int]:
    host, verts = None, None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "host" and len(parts) == 2:
            host = parts[1]
        elif parts[0] == "vertices":
            try:
                verts = [int(x) for x in parts[1:]]
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: vertex ids must be integers") from exc
        else:
            raise ConfigError(f"{path}:{lineno}: cannot parse line {line!r}")
    if verts is None:
        raise ConfigError(f"{path}: no 'vertices' line")
    if host is not None and host != cfg["host"]:
        raise ConfigError(f"patch {path.name} belongs to host {host!r}; pass --host {host}")
    return verts


def load_patch(cfg: dict, window) -> Patch:
    spec = cfg["patch"]
    kind, _, arg = spec.partition(":")
    try:
        if spec in PATCH_FIXTURES:
            return Patch(window, frozenset(_read_patch_file(_fixture(PATCH_FIXTURES[spec]), cfg)))
        if kind == "ball":
            radius, _, centre = arg.partition("@")
            v = int(centre) if centre else central_vertex(window, range(window.n), EVEN)
            return ball(window, v, int(radius))
        if kind == "vertices":
            return Patch(window, frozenset(int(x) for x in arg.split(",") if x.strip()))
        if kind == "file":
            return Patch(window, frozenset(_read_patch_file(Path(arg), cfg)))
    except ValueError as exc:
        raise ConfigError(f"bad patch spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown patch spec {spec!r}")


def load_activities(cfg: dict, basis):
    exact = cfg["arith"] == "exact"
    out = []
    for key in ("lam_e", "lam_o"):
        text = cfg[key]
        if text == "star":
            value = host_threshold(basis).value
            out.append(Fraction(value) if exact else float(value))
            continue
        try:
            out.append(activity(text, exact=exact))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad activity {key}={text!r}") from exc
    return out


def _bc(cfg: dict, allow_free: bool = False):
    text = cfg["bc"]
    if allow_free and text == "free":
        return "free"
    try:
        return parity_code(text)
    except ValueError as exc:
        raise ConfigError(f"bad boundary condition {text!r}") from exc


def _num(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _kv(rows) -> list[str]:
    return [f"{k}={v}" for k, v in rows]


def _csv(columns, rows) -> list[str]:
    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(str(row[c]) for c in columns))
    return out


# ------------------------------------------------------------------ commands


def cmd_gen(cfg):
    window, basis, sym = load_host(cfg)
    comments = [line[2:] for line in header(cfg)] + [f"symmetry={sym.kind}", f"D={basis.D}"]
    return hcg_text(window, basis.cycles, comments).splitlines(), 0


def cmd_basis(cfg):
    window, basis, _ = load_host(cfg)
    if cfg["action"] == "complete":
        done = invariant_completion(basis)
        comments = [line[2:] for line in header(cfg)] + [f"{k}={v}" for k, v in basis_report(done).items()]
        return hcg_text(window, done.cycles, comments).splitlines(), 0
    report = basis_report(basis, Patch(window, window.interior))
    lines = header(cfg) + _kv((k, str(v).lower() if isinstance(v, bool) else v) for k, v in report.items())
    try:
        th = host_threshold(basis)
    except (WindowTooSmall, CapExceeded) as exc:
        lines.append(f"threshold=unavailable ({exc})")
    else:
        lines += _kv([("tau_star", repr(th.tau)), ("log_lambda_star", repr(th.log_lambda)), ("min_contour", th.min_size)])
    return lines, 0 if report["span"] else ValidationError.exit_code


def cmd_contours(cfg):
    window, basis, _ = load_host(cfg)
    if cfg["edge"] >= 0:
        found = enumerate_contours(cfg["edge"], cfg["k"], basis)
    else:
        patch = load_patch(cfg, window)
        label = None if cfg["label"] == "both" else cfg["label"]
        found = contours_in(patch, basis, k=cfg["k"], label=label, threads=cfg["threads"])
    if cfg["label"] != "both":
        found = [g for g in found if g.label == parity_code(cfg["label"])]
    rows = [contour_table_row(g) for g in found]
    cols = ["size", "label", "b_e", "b_o", "int_e", "int_o", "edges"]
    return header(cfg) + [f"# contours={len(rows)}"] + _csv(cols, rows), 0


def cmd_clusters(cfg):
    window, basis, _ = load_host(cfg)
    patch = load_patch(cfg, window)
    code = _bc(cfg)
    lam_e, lam_o = load_activities(cfg, basis)
    cs = contours_in(patch, basis, k=cfg["m"], label=code, threads=cfg["threads"])
    table = TildeWeights(basis, lam_e, lam_o)
    model = PolymerModel.from_contours(cs, [table[g] for g in cs])
    clusters = enumerate_clusters(model, cfg["m"]) if cs else []
    rows = [
        {
            "polymers": " ".join(str(p) for p in c.polymers),
            "size": c.total_size,
            "ursell": str(c.coefficient),
            "weight": _num(c.weight(model)),
        }
        for c in clusters
    ]
    total = cluster_sum(model, clusters) if clusters else 0
    meta = [f"# polymers={len(cs)}", f"# clusters={len(clusters)}", f"# log_xi_truncated={_num(total)}"]
    meta += [f"# polymer {i}: {' '.join(map(str, g.key))}" for i, g in enumerate(cs)]
    return header(cfg) + meta + _csv(["polymers", "size", "ursell", "weight"], rows), 0


def cmd_count(cfg):
    window, basis, _ = load_host(cfg)
    patch = load_patch(cfg, window)
    lam_e, lam_o = load_activities(cfg, basis)
    lines = header(cfg)
    if cfg["mode"] == "fptas":
        log_z, cert = fptas_log_Z(patch, _bc(cfg), lam_e, lam_o, cfg["eps"], basis)
        if not cert.admissible:
            print("warning: patch boundary is not of one parity; the certificate is outside its proven range", file=sys.stderr)
        lines += [f"log_Z={log_z!r}"] + cert.as_text().splitlines()
        return lines, 0
    bc = _bc(cfg, allow_free=True)
    bcond = boundary_set(patch, None if bc == "free" else bc, basis)
    if len(bcond.free) > cfg["cap"]:
        raise CapExceeded(f"{len(bcond.free)} free vertices exceed the exact-count cap {cfg['cap']}")
    z = exact_Z(patch, None if bc == "free" else bc, lam_e, lam_o, basis)
    lines += _kv(
        [
            ("vertices", len(patch)),
            ("free_vertices", len(bcond.free)),
            ("Z", _num(z)),
            ("log_Z", repr(log_abs(z))),
        ]
    )
    return lines, 0


def _draw_chunk(basis, lam_e, lam_o, cfg, patch, code, indices):
    sampler = Sampler(basis, lam_e, lam_o, cfg["eps"], strict=cfg["strict"])
    # one generator per draw keeps every draw independent of the chunking
    return [sampler.draw(patch, code, random.Random(f"{cfg['seed']}/{i}")) for i in indices]


def cmd_sample(cfg):
    window, basis, _ = load_host(cfg)
    patch = load_patch(cfg, window)
    code = _bc(cfg)
    lam_e, lam_o = load_activities(cfg, basis)
    n, threads = cfg["draws"], min(cfg["threads"], max(cfg["draws"], 1))
    chunks = [list(range(t, n, threads)) for t in range(threads)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: _draw_chunk(basis, lam_e, lam_o, cfg, patch, code, idx), chunks))
    else:
        parts = [_draw_chunk(basis, lam_e, lam_o, cfg, patch, code, chunks[0])]
    draws = [None] * n
    for idx, part in zip(chunks, parts):
        for i, s in zip(idx, part):
            draws[i] = s
    rows = [{"draw": i, "size": len(s), "occupied": " ".join(map(str, sorted(s)))} for i, s in enumerate(draws)]
    return header(cfg) + _csv(["draw", "size", "occupied"], rows), 0


def cmd_marginal(cfg):
    window, basis, _ = load_host(cfg)
    patch = load_patch(cfg, window)
    lam_e, lam_o = load_activities(cfg, basis)
    v = cfg["vertex"] if cfg["vertex"] >= 0 else central_vertex(window, patch.vertices)
    if v not in patch:
        raise ConfigError(f"vertex {v} is not in the patch")
    p = marginal(patch, _bc(cfg, allow_free=True), lam_e, lam_o, v, basis)
    rows = [("vertex", v), ("parity", "eo"[window.parity[v]]), ("marginal", _num(p)), ("marginal_float", repr(float(p)))]
    return header(cfg) + _kv(rows), 0


def cmd_phase(cfg):
    window, basis, sym = load_host(cfg)
    try:
        lams = [float(x) for x in cfg["lam_e"].split(",")]
        lo, hi = (float(x) for x in cfg["bracket"].split(","))
    except ValueError as exc:
        raise ConfigError(f"phase needs numeric lam_e list and bracket: {exc}") from exc
    host = cfg["host"]
    if host in FAMILIES:
        spec = HostSpec(host, cfg["side"], cfg["dim"], cfg["width"], cfg["length"], cfg["frame_depth"])
        ctx = prepare(spec, m=cfg["m"], iso_cap=cfg["iso_cap"])
    else:
        ctx = prepare((window, basis, sym), m=cfg["m"], iso_cap=cfg["iso_cap"])
    ratio = ctx.degrees[ODD] / ctx.degrees[EVEN]
    rows = []
    for lam in lams:
        pt = coexistence_solve(ctx, lam, tol=cfg["tol"], bracket=(lo, hi), strict=cfg["strict"])
        row = pt.row()
        shift = pt.log_lam_o - ratio * math.log(lam)
        row["shift"] = repr(shift)
        row["lambda_e_times_shift"] = repr(lam * shift)
        rows.append(row)
    meta = [f"# c_iso={ctx.c_iso!r}", f"# classes={ctx.max_class}", f"# degrees={ctx.degrees[EVEN]},{ctx.degrees[ODD]}"]
    cols = list(rows[0]) if rows else []
    return header(cfg) + meta + _csv(cols, rows), 0


# ------------------------------------------------------------------ selftest


def _brute_ursell(n: int, edges) -> Fraction:
    edges = list(edges)
    total = 0
    for mask in range(1 << len(edges)):
        chosen = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in chosen:
            parent[find(a)] = find(b)
        if len({find(x) for x in range(n)}) == 1:
            total += (-1) ** len(chosen)
    return Fraction(total, math.factorial(n))


def selftest_checks(cfg) -> list[tuple[str, bool, str]]:
    results = []
    grid = generate(HostSpec("grid_zd", side=10))
    dice = generate(HostSpec("dice", side=12))

    def check(name, fn):
        try:
            ok, detail = fn()
        except HardcoreError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))

    def bijection():
        count = 0
        for window, basis, _ in (grid, dice):
            patch = ball(window, central_vertex(window, range(window.n), EVEN), 3)
            for bc in (EVEN, ODD):
                for occ in independent_sets(patch, bc, basis):
                    fam = contours_from_independent_set(occ, patch, bc, basis)
                    if independent_set_from_contours(fam, patch, bc, basis) != frozenset(occ):
                        return False, f"round trip fails on {sorted(occ)}"
                    count += 1
        return True, f"{count} independent sets"

    def partition_functions():
        count = 0
        for window, basis, _ in (grid, dice):
            patch = ball(window, central_vertex(window, range(window.n), EVEN), 3)
            for lam_e, lam_o in ((Fraction(1, 2), Fraction(3)), (Fraction(10), Fraction(1))):
                for bc in (EVEN, ODD):
                    vals = [f(patch, bc, lam_e, lam_o, basis) for f in (exact_Z, contour_Z, polymer_Z, external_Z)]
                    if len(set(vals)) != 1:
                        return False, f"mismatch {vals}"
                    count += 1
        return True, f"{count} cases agree exactly"

    def enumeration():
        window, basis, _ = grid
        patch = ball(window, central_vertex(window, range(window.n), EVEN), 3)
        by_region = contours_in(patch, basis)
        kmax = max(g.size for g in by_region)
        by_growth = contours_in(patch, basis, k=kmax)
        return by_region == by_growth, f"{len(by_region)} contours, largest {kmax}"

    def ursell_values():
        graphs = [(2, [(0, 1)]), (3, [(0, 1), (1, 2)]), (3, [(0, 1), (1, 2), (0, 2)]), (4, [(0, 1), (1, 2), (2, 3), (3, 0)])]
        bad = [(n, e) for n, e in graphs if ursell(n, e) != _brute_ursell(n, e)]
        return not bad, "edge-subset brute force" if not bad else f"differs on {bad}"

    def fptas_tail():
        window, basis, _ = grid
        patch = ball(window, central_vertex(window, range(window.n), EVEN), 3)
        lam = Fraction(host_threshold(basis).value)
        _, cert = fptas_log_Z(patch, EVEN, lam, lam, 1e-6, basis)
        z = exact_Z(patch, EVEN, lam, lam, basis)
        xi = z / lam ** patch.parity_count(EVEN) - 1
        err = abs(math.log1p(float(xi)) - cert.log_xi)
        return err <= cert.tail_bound, f"error {err:.3g} <= tail {cert.tail_bound:.3g}"

    def sampler_support():
        window, basis, _ = grid
        patch = ball(window, central_vertex(window, range(window.n), EVEN), 3)
        legal = {frozenset(s) for s in independent_sets(patch, EVEN, basis)}
        sampler = Sampler(basis, 3, 3, 0.01, strict=False)
        rng = random.Random(cfg["seed"])
        draws = [sampler.draw(patch, EVEN, rng) for _ in range(200)]
        bad = sum(1 for s in draws if s not in legal)
        return bad == 0, f"{len(draws)} draws, {bad} outside the support"

    check("bijection round trip", bijection)
    check("partition function equality", partition_functions)
    check("region search = edge growth", enumeration)
    check("ursell coefficients", ursell_values)
    check("fptas error within tail", fptas_tail)
    check("sampler support", sampler_support)
    return results


def cmd_selftest(cfg):
    results = selftest_checks(cfg)
    width = max(len(name) for name, _, _ in results)
    lines = header(cfg) + [f"{'check':<{width}}  result  detail"]
    lines += [f"{name:<{width}}  {'PASS' if ok else 'FAIL':<6}  {detail}" for name, ok, detail in results]
    failed = sum(1 for _, ok, _ in results if not ok)
    lines.append(f"{len(results) - failed}/{len(results)} passed")
    return lines, 0 if not failed else 1


HANDLERS = {
    "gen": cmd_gen,
    "basis": cmd_basis,
    "contours": cmd_contours,
    "clusters": cmd_clusters,
    "count": cmd_count,
    "sample": cmd_sample,
    "marginal": cmd_marginal,
    "phase": cmd_phase,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    """Parse ``argv``, execute one command, write its artifact, and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
        cfg = effective_config(args)
        lines, status = HANDLERS[cfg["command"]](cfg)
    except HardcoreError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    text = "\n".join(lines) + "\n"
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
