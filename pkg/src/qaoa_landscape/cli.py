"""Command-line pipeline: generate graphs, optimize, connect, analyze, render.

Exit codes: 0 success (including warnings such as budget exhaustion),
1 internal failure, 2 usage or input error.  Every output write goes through
a temp-file rename and is recorded in a manifest (sha256) in the output
directory; commands re-hash known input files and warn on mismatch.
Configuration comes from flags, optionally seeded by a key=value config
file; the only environment override is the output directory.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, graphs, landscape, optim, viz
from .sim import cost_diagonal

MANIFEST_NAME = "manifest.txt"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# manifest / io helpers
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_verified(path: Path, text: str, stage: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
        os.chmod(path, 0o644)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    _manifest_record(path, stage)


def _manifest_path(for_file: Path) -> Path:
    return for_file.parent / MANIFEST_NAME


def _manifest_record(path: Path, stage: str) -> None:
    digest = _sha256(path)
    mpath = _manifest_path(path)
    lines = []
    if mpath.exists():
        lines = [ln for ln in mpath.read_text().splitlines()
                 if ln and ln.split("\t")[1] != path.name]
    lines.append(f"{stage}\t{path.name}\t{digest}")
    mpath.write_text("\n".join(lines) + "\n")


def _manifest_check(path: Path) -> None:
    mpath = _manifest_path(path)
    if not mpath.exists():
        return
    for ln in mpath.read_text().splitlines():
        parts = ln.split("\t")
        if len(parts) == 3 and parts[1] == path.name:
            if _sha256(path) != parts[2]:
                print(f"warning: {path} does not match its manifest hash",
                      file=sys.stderr)
            return


def _read_input(path_str: str) -> Path:
    path = Path(path_str)
    if not path.exists():
        raise UsageError(f"input file not found: {path}")
    _manifest_check(path)
    return path


def _outdir(args) -> Path:
    if getattr(args, "outdir", None):
        return Path(args.outdir)
    env = os.environ.get("QAOA_LANDSCAPE_OUTDIR")
    return Path(env) if env else Path(".")


def _apply_config_file(argv: list[str]) -> list[str]:
    """Prepend key=value pairs from --config FILE as --key value defaults."""
    if "--config" not in argv:
        return argv
    k = argv.index("--config")
    if k + 1 >= len(argv):
        raise UsageError("--config needs a file argument")
    cfg_path = Path(argv[k + 1])
    if not cfg_path.exists():
        raise UsageError(f"config file not found: {cfg_path}")
    pre: list[str] = []
    for line_no, raw in enumerate(cfg_path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{cfg_path}:{line_no}: expected key=value")
        key, _, val = line.partition("=")
        pre.extend([f"--{key.strip()}", val.strip()])
    rest = argv[:k] + argv[k + 2:]
    return rest[:1] + pre + rest[1:]


# ---------------------------------------------------------------------------
# graph sources
# ---------------------------------------------------------------------------

def resolve_graph_source(source: str) -> tuple[graphs.WeightedGraph, str]:
    """A file path or a builtin spec: complete:N, cubic:N:K, variable-weight:X."""
    if source.startswith("complete:"):
        n = int(source.split(":")[1])
        return graphs.complete_graph(n), f"K{n}"
    if source.startswith("cubic:"):
        _, n, k = source.split(":")
        g = graphs.cubic_graphs(int(n))[int(k) - 1]
        return g, f"cubic{n}-{k}"
    if source.startswith("variable-weight:"):
        x = float(source.split(":")[1])
        return graphs.variable_weight_graph(x), f"vw-x{x:g}"
    path = _read_input(source)
    try:
        g = graphs.parse_graph(path.read_text())
    except graphs.GraphParseError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return g, path.stem


def _solution_set(g, alt_mode: str):
    if alt_mode == "none":
        base = graphs.brute_force_maxcut(g, include_alternative=False)
        return base
    if alt_mode == "auto":
        return graphs.brute_force_maxcut(g, include_alternative=True)
    pattern = alt_mode
    if len(pattern) != g.n_vertices:
        raise UsageError(f"--alt pattern length {len(pattern)} != {g.n_vertices} vertices")
    base = graphs.brute_force_maxcut(g, include_alternative=False)
    alt_states = graphs.pattern_states(pattern)
    if alt_states & base.solutions:
        raise UsageError("--alt pattern states coincide with the Max-Cut solutions")
    return graphs.SolutionSet(cut_value=base.cut_value, solutions=base.solutions,
                              alternative=alt_states)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_graph(args) -> int:
    if args.graph_cmd == "check":
        path = Path(args.file)
        if not path.exists():
            raise UsageError(f"input file not found: {path}")
        try:
            g = graphs.parse_graph(path.read_text())
        except graphs.GraphParseError as exc:
            print(f"{path}: invalid edge list: {exc}", file=sys.stderr)
            return 2
        print(f"{path}: ok ({g.n_vertices} vertices, {len(g.edges)} edges)")
        return 0

    outdir = _outdir(args)
    if args.family == "complete":
        if args.n is None:
            raise UsageError("--family complete needs --n")
        g = graphs.complete_graph(args.n)
        out = Path(args.out) if args.out else outdir / f"K{args.n}.txt"
        _write_verified(out, graphs.serialize_graph(g), "graph")
        print(f"wrote {out}")
    elif args.family == "cubic":
        if args.n is None:
            raise UsageError("--family cubic needs --n")
        members = graphs.cubic_graphs(args.n)
        base = Path(args.out) if args.out else outdir / f"cubic{args.n}.txt"
        for k, g in enumerate(members, start=1):
            out = base.with_name(f"{base.stem}-{k}{base.suffix}")
            _write_verified(out, graphs.serialize_graph(g), "graph")
            print(f"wrote {out}")
    elif args.family == "variable-weight":
        if args.x is None:
            raise UsageError("--family variable-weight needs --x")
        g = graphs.variable_weight_graph(args.x)
        out = Path(args.out) if args.out else outdir / f"vw-x{args.x:g}.txt"
        _write_verified(out, graphs.serialize_graph(g), "graph")
        print(f"wrote {out}")
    else:
        raise UsageError(f"unknown family {args.family!r}")
    return 0


def cmd_optimize(args) -> int:
    g, gid = resolve_graph_source(args.graph)
    if args.graph_id:
        gid = args.graph_id
    sols = _solution_set(g, args.alt)
    cfg = optim.BasinHoppingConfig(
        steps=args.steps, temperature=args.temperature,
        max_perturbation=args.perturb, rms_threshold=args.rms,
        dedup_energy=args.dedup, seed=args.seed)
    if args.jobs > 1:
        db = optim.basin_hop_parallel(g, args.layers, cfg, jobs=args.jobs,
                                      graph_id=gid, solutions=sols)
    else:
        db = optim.basin_hop(g, args.layers, cfg, graph_id=gid, solutions=sols)
    out = Path(args.out) if args.out else _outdir(args) / f"{gid}-L{args.layers}.db"
    out.parent.mkdir(parents=True, exist_ok=True)
    optim.save_database(db, out)
    _manifest_record(out, "optimize")
    value, is_global = analysis.hcmp(db)
    star = "" if is_global else "*"
    print(f"M={len(db.records)} HCMP={value:.6f}{star} GM={db.records[0].energy:.9f} "
          f"accept_fraction={db.accept_fraction:.4f} failed_steps={db.failed_steps}")
    print(f"wrote {out}")
    return 0


def cmd_connect(args) -> int:
    db_path = _read_input(args.db)
    db = optim.load_database(db_path)
    g, _ = resolve_graph_source(args.graph)
    sols = _solution_set(g, args.alt)
    cfg = landscape.LandscapeConfig(budget_factor=args.budget_factor)
    net = landscape.connect_database(g, db, cfg, solutions=sols, jobs=args.jobs)
    prefix = Path(args.out_prefix) if args.out_prefix else \
        _outdir(args) / db_path.stem
    prefix.parent.mkdir(parents=True, exist_ok=True)
    min_path = prefix.with_suffix(".min")
    ts_path = prefix.with_suffix(".ts")
    optim.save_database(net.minima, min_path)
    _manifest_record(min_path, "connect")
    landscape.save_network(net, ts_path)
    _manifest_record(ts_path, "connect")
    comps = net.components()
    print(f"{len(net.transition_states)} transition states, {len(comps)} component(s), "
          f"{len(net.minima.records)} minima, attempts {net.attempts_used}/{net.budget}")
    if len(comps) > 1:
        sizes = sorted((len(c) for c in comps), reverse=True)
        print(f"warning: connection budget exhausted; component sizes {sizes}",
              file=sys.stderr)
    print(f"wrote {min_path} {ts_path}")
    return 0


def _load_network_pair(prefix: str):
    min_path = _read_input(prefix + ".min")
    ts_path = _read_input(prefix + ".ts")
    mdb = optim.load_database(min_path)
    return landscape.load_network(mdb, ts_path)


def cmd_analyze(args) -> int:
    db = optim.load_database(_read_input(args.db))
    connected = None
    if args.network:
        net = _load_network_pair(args.network)
        if net.minima.graph_id != db.graph_id or net.minima.layers != db.layers:
            raise UsageError("network files describe a different (graph, L) than --db")
        connected = net.minima
    if args.thresholds == "require" and connected is None and not args.hulls_from_db:
        raise UsageError("threshold metrics need a post-connection network "
                         "(--network PREFIX), or pass --hulls-from-db to override")
    hull_db = connected if connected is not None else (db if args.hulls_from_db else None)
    if hull_db is not None:
        report = analysis.build_report(db, hull_db, p_op=args.pop)
    else:
        report = analysis.build_report(db, None, p_op=args.pop)
        report.d1 = report.d2 = report.d3 = report.d4 = None
        report.p1 = report.p2 = None
        report.hulls_source = None
    sys.stdout.write(report.to_text())
    if args.out_prefix:
        prefix = Path(args.out_prefix)
        _write_verified(prefix.with_suffix(".report.txt"), report.to_text(), "analyze")
        _write_verified(prefix.with_suffix(".report.tsv"),
                        analysis.REPORT_ROW_HEADER + "\n" + report.to_row() + "\n",
                        "analyze")
        print(f"wrote {prefix.with_suffix('.report.txt')} {prefix.with_suffix('.report.tsv')}")
    return 0


def cmd_sweep(args) -> int:
    reports = []
    for db_file in args.dbs:
        db = optim.load_database(_read_input(db_file))
        reports.append(analysis.build_report(db, None, p_op=args.pop))
    reports.sort(key=lambda r: r.layers)
    print("L\tM\tHCMP\tF")
    for r in reports:
        star = "" if r.hcmp_is_global else "*"
        f_txt = "-" if r.f_metric is None else f"{r.f_metric:.6f}"
        print(f"{r.layers}\t{r.m}\t{r.hcmp:.6f}{star}\t{f_txt}")
    l_min, l_ad = analysis.sweep_candidates(reports)
    print(f"l_min_candidate={l_min if l_min is not None else '-'} "
          f"l_ad_candidate={l_ad if l_ad is not None else '-'}")
    return 0


def cmd_render(args) -> int:
    net = _load_network_pair(args.network)
    if not net.minima.records:
        raise UsageError("network has no minima")
    tree = viz.build_disconnectivity(net, spacing=args.spacing, top=args.top)
    svg = viz.render_disconnectivity(tree, coloring=args.color,
                                     grayscale=args.grayscale)
    out = Path(args.out) if args.out else _outdir(args) / (Path(args.network).name + ".svg")
    _write_verified(out, svg, "render")
    print(f"wrote {out}")
    if args.scatter:
        pts = analysis.solution_scatter(net.minima)
        hull_s = analysis.convex_hull(pts) if len(pts) >= 2 else None
        t_pts = analysis.alternative_scatter(net.minima)
        hull_t = analysis.convex_hull(t_pts) if t_pts is not None and len(t_pts) >= 2 else None
        text = viz.scatter_export(net.minima, hull_s=hull_s, hull_t=hull_t)
        spath = Path(args.scatter)
        _write_verified(spath, text, "render")
        print(f"wrote {spath}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qaoa-landscape",
                                description="Cost-landscape exploration for "
                                            "QAOA Max-Cut ansatze")
    p.add_argument("--config", help="key=value config file applied as defaults")
    sub = p.add_subparsers(dest="cmd", required=True)

    pg = sub.add_parser("graph", help="generate or validate edge-list files")
    gsub = pg.add_subparsers(dest="graph_cmd", required=True)
    ggen = gsub.add_parser("gen", help="write builtin graph families")
    ggen.add_argument("--family", required=True,
                      choices=["complete", "cubic", "variable-weight"])
    ggen.add_argument("--n", type=int)
    ggen.add_argument("--x", type=float)
    ggen.add_argument("--out")
    ggen.add_argument("--outdir")
    gchk = gsub.add_parser("check", help="validate an edge-list file")
    gchk.add_argument("file")

    po = sub.add_parser("optimize", help="basin-hopping minima database")
    po.add_argument("graph", help="edge-list file or builtin (complete:N, "
                                  "cubic:N:K, variable-weight:X)")
    po.add_argument("--layers", type=int, required=True)
    po.add_argument("--steps", type=int, default=10000)
    po.add_argument("--temperature", type=float, default=1.0)
    po.add_argument("--perturb", type=float, default=1.0)
    po.add_argument("--rms", type=float, default=1e-10)
    po.add_argument("--dedup", type=float, default=1e-9)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--jobs", type=int, default=1)
    po.add_argument("--alt", default="auto",
                    help="'auto' (second-best cut), 'none', or an explicit "
                         "two-letter pattern like abab")
    po.add_argument("--graph-id")
    po.add_argument("--out")
    po.add_argument("--outdir")

    pc = sub.add_parser("connect", help="grow the transition-state network")
    pc.add_argument("--db", required=True)
    pc.add_argument("--graph", required=True)
    pc.add_argument("--alt", default="auto")
    pc.add_argument("--budget-factor", type=int, default=10)
    pc.add_argument("--jobs", type=int, default=1)
    pc.add_argument("--out-prefix")
    pc.add_argument("--outdir")

    pa = sub.add_parser("analyze", help="landscape metrics report")
    pa.add_argument("--db", required=True)
    pa.add_argument("--network", help="prefix of .min/.ts pair from connect")
    pa.add_argument("--pop", type=float, default=0.5)
    pa.add_argument("--thresholds", choices=["auto", "require", "skip"],
                    default="auto")
    pa.add_argument("--hulls-from-db", action="store_true",
                    help="compute hull metrics from the raw database "
                         "(overrides the post-connection provenance default)")
    pa.add_argument("--out-prefix")
    pa.add_argument("--outdir")

    ps = sub.add_parser("sweep", help="multi-L table with layer-count candidates")
    ps.add_argument("dbs", nargs="+")
    ps.add_argument("--pop", type=float, default=0.5)

    pr = sub.add_parser("render", help="disconnectivity SVG and scatter export")
    pr.add_argument("--network", required=True)
    pr.add_argument("--color", choices=["solution", "alternative"],
                    default="solution")
    pr.add_argument("--grayscale", action="store_true")
    pr.add_argument("--spacing", type=float)
    pr.add_argument("--top", type=float)
    pr.add_argument("--scatter")
    pr.add_argument("--out")
    pr.add_argument("--outdir")
    return p


_COMMANDS = {
    "graph": cmd_graph,
    "optimize": cmd_optimize,
    "connect": cmd_connect,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "render": cmd_render,
}


def main(argv=None) -> int:
    argv = list(sys.argv if argv is None else ["qaoa-landscape"] + list(argv))
    try:
        argv = _apply_config_file(argv)
        args = build_parser().parse_args(argv[1:])
        return _COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except graphs.GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
