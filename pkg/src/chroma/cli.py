"""Command line entry point: ``chroma <subcommand> [flags]``.

Every command writes one JSON document (or CSV where noted) that embeds the
resolved run configuration.  Exact rationals are written as "num/den".
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ChromaError, InvalidInput, SizeCapError

COMMANDS = ("count", "sample", "couple", "height", "cutsets", "separator", "frozen",
            "bounds", "fkg", "fkg-search", "ssm")


# ---------------------------------------------------------------- serialization

def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in items]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, float) and not np.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return x


def _emit(args, payload, text=None):
    if text is None:
        payload = dict(payload)
        payload["config"] = args.run_config
        text = json.dumps(_jsonable(payload), sort_keys=True) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_with_config(args, header, rows):
    lines = ["# " + json.dumps(_jsonable(args.run_config), sort_keys=True), header]
    lines += rows
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- input files

def _read_ints(path):
    text = Path(path).read_text()
    vals = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        vals += [int(t) for t in line.replace(",", " ").split()]
    return vals


def _read_boundary(path):
    """JSON {"vertex": color} or lines "vertex color"."""
    if path is None:
        return {}
    text = Path(path).read_text().strip()
    if text.startswith("{"):
        return {int(k): int(v) for k, v in json.loads(text).items()}
    vals = _read_ints(path)
    if len(vals) % 2:
        raise InvalidInput("boundary file needs 'vertex color' pairs")
    return dict(zip(vals[::2], vals[1::2]))


def _read_triple(path):
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#") and "triple:" in line:
            return tuple(int(t) for t in line.split("triple:", 1)[1].split()[:3])
    return None


def _graph(args):
    from .lattice import parse_graph
    if not args.graph:
        raise InvalidInput("--graph is required")
    return parse_graph(args.graph)


def _vertex_list(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _int_range(text):
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return _vertex_list(text)


# ---------------------------------------------------------------- commands

def cmd_count(args):
    from .exact import count_colorings, count_transfer_matrix
    G = _graph(args)
    tau = _read_boundary(args.boundary)
    if args.method == "transfer":
        n = count_transfer_matrix(G, args.q, tau)
    elif args.method == "brute":
        n = count_colorings(G, args.q, tau)
    else:
        try:
            n = count_transfer_matrix(G, args.q, tau)
        except (InvalidInput, SizeCapError):
            n = count_colorings(G, args.q, tau)
    _emit(args, {"count": str(n)})


def cmd_sample(args):
    G = _graph(args)
    if args.method == "cftp":
        from .dynamics import cftp_heights
        fixed = {v: 0 for v in G.rim if G.parity(v) == 0} if G.rim else None
        if fixed is None:
            raise InvalidInput("cftp sampling needs a rimmed window (window:d=2,L=...)")
        h = cftp_heights(G, fixed, args.seed, args.size)
        _emit(args, {"heights": h.tolist(), "method": "cftp"})
        return
    from .dynamics import ChainState, glauber_sweep
    from .exact import find_extension, sample_colorings
    tau = _read_boundary(args.boundary)
    if args.method == "exact":
        rows = sample_colorings(G, args.q, tau, args.size, np.random.default_rng(args.seed))
        _emit(args, {"colorings": rows.tolist(), "method": "exact"})
        return
    out = []
    for s in range(args.size):
        start = find_extension(G, args.q, tau, rng=np.random.default_rng([args.seed, s]))
        state = ChainState(tuple(start), frozenset(tau), args.seed + s)
        for _ in range(args.sweeps):
            state = glauber_sweep(state, G, args.q)
        out.append(list(state.config))
    _emit(args, {"colorings": out, "method": "glauber", "sweeps": args.sweeps})


def cmd_couple(args):
    from .dynamics import scan_coupling
    G = _graph(args)
    tau1, tau2 = _read_boundary(args.tau1), _read_boundary(args.tau2)
    res = scan_coupling(G, args.q, tau1, tau2, args.sweeps, args.reps, args.seed)
    rows = [f"{v},{res.disagreement[v]:.6f},{res.stderr[v]:.6f}" for v in G.vertices]
    _emit(args, None, _csv_with_config(args, "vertex,disagreement,stderr", rows))


def cmd_height(args):
    from . import heights
    if args.op == "scan":
        Ls = _int_range(args.L)
        rows = heights.variance_mod3_scan(Ls, args.samples, args.seed)
        _emit(args, None, _csv_with_config(args, heights.CSV_HEADER, [r.csv() for r in rows]))
        return
    G = _graph(args)
    if args.op == "lift":
        f = _read_ints(args.coloring)
        h = heights.coloring_to_height(f, G)
        _emit(args, {"heights": list(h)})
    elif args.op == "project":
        h = _read_ints(args.heights)
        _emit(args, {"coloring": list(heights.height_to_coloring(h))})
    elif args.op == "logconcavity":
        fixed = {v: 0 for v in G.rim if G.parity(v) == 0}
        v = heights.center(G) if args.vertex is None else args.vertex
        rep = heights.log_concavity_check(G, fixed, v)
        _emit(args, {"holds": rep.holds, "monotone": rep.monotone,
                     "symmetric": rep.symmetric, "checked": rep.checked,
                     "violations": rep.violations,
                     "marginal": {str(k): p for k, p in sorted(rep.marginal.values.items())}})


def cmd_cutsets(args):
    from .cutsets import enumerate_contours
    ells = _int_range(args.ell)
    if args.d != 2:
        raise InvalidInput("exhaustive census is implemented for d = 2")
    census = enumerate_contours(max(ells), args.kind)
    rows = [f"{ell},{census[ell].count}" for ell in ells]
    if args.format == "json":
        _emit(args, {"census": {str(ell): census[ell].count for ell in ells},
                     "kind": args.kind, "d": args.d})
    else:
        _emit(args, None, _csv_with_config(args, "ell,count", rows))


def cmd_separator(args):
    from .cutsets import build_separator
    G = _graph(args)
    S = set(_read_ints(args.set))
    res = build_separator(S, G, seed=args.seed)
    _emit(args, {"certified": res.certified, "U": sorted(res.U), "size": len(res.U),
                 "size_bound": res.size_bound, "ell": res.ell, "s": res.s, "t": res.t,
                 "checks": res.checks,
                 "parts": {k: {n: sorted(x) for n, x in v.items()}
                           for k, v in res.parts.items()}})


def cmd_frozen(args):
    from .cutsets import frozen_check
    from .lattice import is_proper
    G = _graph(args)
    f = _read_ints(args.coloring)
    if not is_proper(f, G, args.q):
        raise InvalidInput("coloring is not proper")
    v = frozen_check(f, G, args.q, args.radius)
    _emit(args, {"frozen_at_radius": v.frozen_at_radius, "radius": v.radius,
                 "witness": v.witness})


def cmd_bounds(args):
    from . import bounds
    if args.op == "peierls":
        if args.exact_box:
            rep = bounds.peierls_check(args.beta, args.exact_box)
            _emit(args, {"probability": rep.lhs, "peierls_sum": rep.rhs, "holds": rep.holds,
                         "census": rep.inputs["census"]})
        else:
            partial, tail = bounds.peierls_parts(args.d, args.beta, args.ell_max, C=args.C)
            _emit(args, {"partial": partial, "tail": tail, "sum": partial + tail,
                         "C": args.C})
    elif args.op == "shearer":
        rep = bounds.shearer_check(_graph(args), args.q)
        _emit(args, {"count": str(rep.lhs), "kdd_count": str(rep.rhs), "holds": rep.holds,
                     **rep.flags})
    elif args.op == "droplet":
        G = _graph(args)
        P0 = _pattern(args.p0)
        P = _pattern(args.pattern)
        rep = bounds.droplet_ratio(G, args.q, P0, P, _vertex_list(args.U or ""))
        _emit(args, {"ratio": rep.lhs, "rhs": float(rep.rhs), "holds": rep.holds,
                     **rep.flags})
    elif args.op == "regions":
        G = _graph(args)
        f = _read_ints(args.coloring)
        p0 = _pattern(args.p0) if args.p0 else None
        dec = bounds.classify_regions(f, G, args.q, p0)
        labels = []
        for v in G.vertices:
            tags = [str(P) for P, Z in dec.Z.items() if v in Z]
            kind = "bad" if v in dec.bad else "overlap" if v in dec.overlap else \
                tags[0] if tags else ""
            labels.append(f"{v},{kind},{int(v in dec.star)}")
        _emit(args, None, _csv_with_config(args, "vertex,region,in_star", labels))
    elif args.op == "regime":
        rep = bounds.dobrushin_regime_report(args.d, args.q, args.beta)
        _emit(args, {"regime": rep.label, "dobrushin": rep.holds})


def _pattern(text):
    from .lattice import Pattern
    if not text or "|" not in text:
        raise InvalidInput("patterns are written like 12|34")
    a, b = text.strip("()").split("|")
    return Pattern(frozenset(map(int, a)), frozenset(map(int, b)))


def cmd_fkg(args):
    from . import fkg
    G = _graph(args)
    out = {}
    triple = tuple(_vertex_list(args.triple)) if args.triple else \
        (_read_triple(args.graph) if Path(args.graph).exists() else None)
    if args.family == "color1":
        sites = _vertex_list(args.sites) if args.sites else \
            [v for v in G.vertices if G.parity(v) == G.parity(triple[0] if triple else 0)]
        fam = fkg.color_one_family(G, args.q, sites)
    else:
        if args.sites:
            vs = _vertex_list(args.sites)
            pairs = list(zip(vs[::2], vs[1::2]))
        elif triple:
            u, v, w = triple
            pairs = [(u, v), (v, w)]
        else:
            raise InvalidInput("equal-pairs needs --sites or a triple")
        fam = fkg.equal_pairs_family(G, args.q, pairs)
        out["covariance"] = fkg.correlation(fam, 0, 1)
    lat = fkg.fkg_lattice_check(fam)
    pa = fkg.positive_association_check(fam)
    out.update(family=args.family, sites=list(fam.sites), lattice_holds=lat.holds,
               lattice_witness=lat.witness, association_holds=pa.holds,
               association_mode=pa.mode)
    if triple:
        r1, r2 = fkg.conditional_ratios(G, args.q, *triple)
        out["triple"] = list(triple)
        out["ratios"] = [r1, r2]
    _emit(args, out)


def cmd_fkg_search(args):
    from . import fkg
    target = None if args.target == "lattice" else \
        tuple(Fraction(t) for t in args.target.split(","))
    res = fkg.counterexample_search(args.budget, args.q, args.seed, target)
    payload = {"found": res.found, "edges": [list(e) for e in res.edges], "n": res.n,
               "side_a": list(res.side_a), "lattice_violation": res.lattice_violation,
               "examined": res.examined}
    if res.u is not None:
        payload.update(triple=[res.u, res.v, res.w], ratios=list(res.ratios))
    if args.write_edges and res.found:
        lines = []
        if res.u is not None:
            lines.append(f"# triple: {res.u} {res.v} {res.w}")
        lines += [f"{a} {b}" for a, b in res.edges]
        Path(args.write_edges).write_text("\n".join(lines) + "\n")
    _emit(args, payload)


def cmd_ssm(args):
    from .exact import ssm_certificate
    G = _graph(args)
    tau1, tau2 = _read_boundary(args.tau1), _read_boundary(args.tau2)
    rep = ssm_certificate(G, args.q, set(tau1), tau1, tau2, _vertex_list(args.target))
    _emit(args, {"tv": rep.lhs, "rhs": "inf" if rep.rhs is None else rep.rhs,
                 "distance": rep.distance, "holds": rep.holds})


HANDLERS = {"count": cmd_count, "sample": cmd_sample, "couple": cmd_couple,
            "height": cmd_height, "cutsets": cmd_cutsets, "separator": cmd_separator,
            "frozen": cmd_frozen, "bounds": cmd_bounds, "fkg": cmd_fkg,
            "fkg-search": cmd_fkg_search, "ssm": cmd_ssm}


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="chroma", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        s = sub.add_parser(name, **kw)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", default=None, help="output file (default stdout)")
        s.add_argument("--threads", type=int, default=None)
        return s

    s = add("count", help="exact number of proper colorings")
    s.add_argument("--graph", required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--boundary")
    s.add_argument("--method", choices=("auto", "brute", "transfer"), default="auto")

    s = add("sample", help="sample colorings or height functions")
    s.add_argument("--graph", required=True)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--boundary")
    s.add_argument("--method", choices=("exact", "glauber", "cftp"), default="exact")
    s.add_argument("--sweeps", type=int, default=100)
    s.add_argument("--size", type=int, default=1)

    s = add("couple", help="scan coupling of two boundary conditions (CSV)")
    s.add_argument("--graph", required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--tau1", required=True)
    s.add_argument("--tau2", required=True)
    s.add_argument("--sweeps", type=int, required=True)
    s.add_argument("--reps", type=int, required=True)

    s = add("height", help="height-function tools")
    s.add_argument("--op", choices=("lift", "project", "logconcavity", "scan"), required=True)
    s.add_argument("--graph")
    s.add_argument("--coloring")
    s.add_argument("--heights")
    s.add_argument("--vertex", type=int)
    s.add_argument("--L", default="8,16,32")
    s.add_argument("--samples", type=int, default=1000)

    s = add("cutsets", help="contour and odd-cutset census")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--ell", default="4..12")
    s.add_argument("--kind", choices=("all", "odd"), default="all")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    s = add("separator", help="build and certify a separator for an odd set")
    s.add_argument("--graph", required=True)
    s.add_argument("--set", required=True)
    s.add_argument("--report", choices=("json",), default="json")

    s = add("frozen", help="frozen-coloring check")
    s.add_argument("--graph", required=True)
    s.add_argument("--coloring", required=True)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--radius", type=int, required=True)

    s = add("bounds", help="Peierls, Shearer, droplet, region and regime reports")
    s.add_argument("--op", choices=("peierls", "shearer", "droplet", "regions", "regime"),
                   required=True)
    s.add_argument("--graph")
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--ell-max", type=int, default=12)
    s.add_argument("--C", type=float, default=10.0)
    s.add_argument("--exact-box", type=int, default=None,
                   help="compare with the exact Ising probability on this box side")
    s.add_argument("--p0")
    s.add_argument("--pattern")
    s.add_argument("--U")
    s.add_argument("--coloring")

    s = add("fkg", help="FKG lattice condition and positive association")
    s.add_argument("--graph", required=True)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--family", choices=("color1", "equal-pairs"), default="color1")
    s.add_argument("--sites")
    s.add_argument("--triple")

    s = add("fkg-search", help="search small bipartite graphs for FKG failures")
    s.add_argument("--budget", type=int, default=9)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--target", default="23/56,9/22",
                   help="ratio pair, or 'lattice' for any lattice violation")
    s.add_argument("--write-edges")

    s = add("ssm", help="exact strong-spatial-mixing certificate")
    s.add_argument("--graph", required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--tau1", required=True)
    s.add_argument("--tau2", required=True)
    s.add_argument("--target", required=True)
    return p


def _run_config(args):
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("CHROMA_THREADS", "1"))
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
    cfg["threads"] = threads
    cfg["version"] = __version__
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bounds" and args.op == "peierls" and args.beta is None:
        parser.error("--beta is required for --op peierls")
    args.run_config = _run_config(args)
    try:
        HANDLERS[args.command](args)
    except ChromaError as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
