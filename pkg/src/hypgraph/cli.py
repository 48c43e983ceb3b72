"""Command-line entry point: ``hypgraph <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import parse_n_grid, run_scaling_experiment, write_fit_csv, write_records_csv
from .components import connected_components
from .covering import check_containment, write_reports_jsonl
from .errors import HypGraphError
from .geometry import ModelParams
from .graph import GeometricGraph, build_edges_bucketed, read_edges_csv, write_edges_csv, write_summary_json
from .render import write_svg
from .sampler import read_vertices_csv, sample_vertices, write_vertices_csv
from .verify import dumps_report, run_verify
from .zones import build_zone_catalog, decompose_layers, write_catalog_json


def _meta_path(vertices_path) -> Path:
    return Path(str(vertices_path) + ".meta.json")


def _model_args(p, required=True):
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--nu", type=float, default=None if not required else 1.0)
    p.add_argument("--n", type=float, required=required)
    p.add_argument("--seed", type=int, default=0)


def _params(args) -> ModelParams:
    return ModelParams(args.alpha, 1.0 if args.nu is None else args.nu, args.n, args.seed)


def _load_graph(args) -> GeometricGraph:
    """Vertices and edges from CSV; parameters from the sidecar or from flags."""
    meta = _meta_path(args.in_vertices)
    if args.alpha is not None and args.n is not None:
        params = _params(args)
    elif meta.exists():
        d = json.loads(meta.read_text())
        params = ModelParams(d["alpha"], d["nu"], d["n"], d.get("seed", 0))
    else:
        raise HypGraphError(f"no {meta.name} next to the vertex file; pass --alpha, --nu and --n")
    sample = read_vertices_csv(args.in_vertices, params)
    return GeometricGraph(sample, read_edges_csv(args.in_edges))


def _graph_from_model(args) -> GeometricGraph:
    params = _params(args)
    return build_edges_bucketed(sample_vertices(params, mode=getattr(args, "mode", "poisson")))


def cmd_generate(args):
    params = _params(args)
    sample = sample_vertices(params, mode=args.mode)
    graph = build_edges_bucketed(sample)
    write_vertices_csv(sample, args.out_vertices)
    _meta_path(args.out_vertices).write_text(json.dumps(params.as_dict(), sort_keys=True) + "\n")
    write_edges_csv(graph, args.out_edges)
    print(json.dumps({"n_vertices": graph.n_vertices, "n_edges": graph.n_edges}))
    return 0


def cmd_components(args):
    graph = _load_graph(args)
    comps = connected_components(graph)
    extra = {"n_components": comps.count, "size_L1": comps.size_L1, "size_L2": comps.size_L2}
    if args.summary:
        write_summary_json(graph, args.summary, extra)
    print(json.dumps(extra))
    return 0


def _layers_and_catalog(args, graph):
    layers = decompose_layers(graph, base_offset=args.layer_base, spacing=args.layer_spacing)
    return layers, build_zone_catalog(graph, layers, c=args.c)


def cmd_zones(args):
    graph = _graph_from_model(args)
    _, cat = _layers_and_catalog(args, graph)
    write_catalog_json(cat, args.out)
    print(json.dumps({"E_R": cat.E_R, "layers": len(cat.layers), "degenerate": cat.degenerate}))
    return 0


def cmd_cover(args):
    graph = _graph_from_model(args)
    layers, cat = _layers_and_catalog(args, graph)
    if not cat.E_R:
        print(json.dumps({"E_R": False, "diagnostics": cat.diagnostics}))
        return 2
    reports, summary = check_containment(graph, layers, cat)
    write_reports_jsonl(reports, args.out)
    summary.pop("failures")
    print(json.dumps(summary, sort_keys=True))
    return 0 if summary["containment_fail"] == 0 else 1


def cmd_scaling(args):
    alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    fit = run_scaling_experiment(alphas, parse_n_grid(args.n_grid), args.seeds, nu=args.nu,
                                 workers=args.workers, base_seed=args.seed, min_seeds=args.min_seeds)
    write_records_csv(fit.records, args.out, timings=args.timings)
    if args.fit_out:
        write_fit_csv(fit, args.fit_out)
    for a, af in fit.fits.items():
        print(f"alpha={a:g} slope={af.slope:.4f} target={af.target:.4f}")
    return 0


def cmd_verify(args):
    report = run_verify(seed=args.seed, workers=args.workers)
    text = dumps_report(report)
    if args.out:
        Path(args.out).write_text(text)
    for name, res in report["checks"].items():
        print(f"{'PASS' if res['passed'] else 'FAIL'} {name}")
    return 0 if report["passed"] else 1


def cmd_render(args):
    write_svg(_load_graph(args), args.out)
    return 0


def _zone_args(p):
    _model_args(p)
    p.add_argument("--mode", choices=["poisson", "fixed"], default="poisson")
    p.add_argument("--c", type=float, default=10.0)
    p.add_argument("--layer-base", type=float, default=None, help="default 4 alpha / (alpha - 1)")
    p.add_argument("--layer-spacing", type=float, default=3.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypgraph", description="Subcritical random hyperbolic graph toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a graph and write vertex and edge CSVs")
    _model_args(p)
    p.add_argument("--mode", choices=["poisson", "fixed"], default="poisson")
    p.add_argument("--out-vertices", default="v.csv")
    p.add_argument("--out-edges", default="e.csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("components", help="component sizes of a stored graph")
    p.add_argument("--in-vertices", required=True)
    p.add_argument("--in-edges", required=True)
    p.add_argument("--summary", default="out.json")
    _model_args(p, required=False)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("zones", help="separation-zone catalog as JSON")
    _zone_args(p)
    p.add_argument("--out", default="catalog.json")
    p.set_defaults(func=cmd_zones)

    p = sub.add_parser("cover", help="covering-component reports as JSONL")
    _zone_args(p)
    p.add_argument("--out", default="reports.jsonl")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("scaling", help="largest-component scaling experiment")
    p.add_argument("--alphas", default="1.2,1.5,2.0")
    p.add_argument("--n-grid", default="4096:1048576:x2")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--min-seeds", type=int, default=30, help="lower only for smoke runs")
    p.add_argument("--timings", action="store_true", help="add wall-time columns (breaks byte identity)")
    p.add_argument("--fit-out", default=None, help="per-cell medians and fitted slopes")
    p.add_argument("--out", default="scaling.csv")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("verify", help="run the oracle and invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="SVG drawing in the native representation")
    p.add_argument("--in-vertices", required=True)
    p.add_argument("--in-edges", required=True)
    p.add_argument("--out", default="fig.svg")
    _model_args(p, required=False)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HypGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
