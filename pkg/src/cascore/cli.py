"""``cascore`` command-line interface.

Every command writes its results as files into ``--out`` together with a
``manifest.json`` describing the resolved configuration and input
digests. Exit codes: 0 success, 1 degenerate computation, 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchgen import GenConfig, generate
from .ecg import EcgConfig, cas_ecg
from .graph import Cover, GraphFormatError, Partition
from .io import (dump_cover, dump_edge_list, dump_node_list, dump_partition, label_index,
                 load_cover, load_node_list, load_partition, read_edge_list)
from .louvain import louvain, louvain_level1, modularity
from .metrics import ami, onmi, roc
from .overlap import DEFAULT_TAU_GRID, RefineConfig, count_outliers, ego_split, refine_grid
from .scores import ScoreKind, max_scores, score_all

EXIT_OK, EXIT_DEGENERATE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad or missing input; maps to exit code 2."""


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_graph(path):
    if not Path(path).is_file():
        raise InputError(f"cannot read {path}: no such file")
    try:
        return read_edge_list(path)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _sniff_cover(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "\t" in raw or "," in line or line.split()[-1] == "-":
            return True
    return False


def _load_communities(path, graph, fmt: str = "auto"):
    text = _read(path)
    try:
        if fmt == "cover" or (fmt == "auto" and _sniff_cover(text)):
            return load_cover(text, graph.index)
        return load_partition(text, graph.index)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def threads_from(args) -> int:
    env = os.environ.get("CASCORE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"CASCORE_THREADS must be an integer, got {env!r}") from None
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


class Run:
    """Collects outputs of one command and writes them with a manifest."""

    def __init__(self, args, inputs: list):
        self.args = args
        self.out = Path(args.out)
        self.inputs = [p for p in inputs if p]
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def finish(self, primary: str | None = None, figures=()) -> None:
        if self.args.stdout and primary is not None:
            sys.stdout.write(self.files[primary])
            return
        self.out.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (self.out / name).write_text(text, encoding="utf-8")
        for fig in figures:
            fig(self.out)
        (self.out / "manifest.json").write_text(self.manifest(), encoding="utf-8")

    def manifest(self) -> str:
        config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(self.args).items())
                  if k not in ("func", "threads", "stdout")}
        doc = {
            "command": self.args.command,
            "config": config,
            "seed": getattr(self.args, "seed", None),
            "inputs": {str(p): _digest(p) for p in self.inputs},
            "outputs": sorted(self.files),
            "version": __version__,
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -------------------------------------------------------------------

def cmd_score(args) -> int:
    graph = _load_graph(args.graph)
    comms = _load_communities(args.communities, graph, args.format)
    table = score_all(graph, comms)
    if args.node is not None:
        if args.node not in graph.index:
            raise InputError(f"unknown node {args.node!r}")
        table = table.select(table.node == graph.index[args.node])
    if args.top is not None:
        table = table.top(args.top, args.score)
    run = Run(args, [args.graph, args.communities])
    run.add("scores.csv", table.to_csv(graph.labels))
    run.finish("scores.csv")
    return EXIT_OK


def cmd_partition(args) -> int:
    graph = _load_graph(args.graph)
    part = louvain_level1(graph, args.seed) if args.level1 else louvain(graph, args.seed)
    run = Run(args, [args.graph])
    run.add("partition.txt", dump_partition(part, graph.labels))
    run.add("summary.json", _json({"communities": part.n_communities,
                                   "modularity": round(modularity(graph, part), 12)}))
    run.finish("partition.txt")
    return EXIT_OK


def _ecg_config(args, scheme=None, kind=None) -> EcgConfig:
    return EcgConfig(k=args.k, scheme=scheme or args.scheme, kind=kind or args.score,
                     floor=args.floor, seed=args.seed)


def cmd_ecg(args) -> int:
    graph = _load_graph(args.graph)
    part, weighted = cas_ecg(graph, _ecg_config(args), threads=threads_from(args), return_weighted=True)
    run = Run(args, [args.graph])
    run.add("partition.txt", dump_partition(part, graph.labels))
    run.add("summary.json", _json({"communities": part.n_communities,
                                   "modularity": round(modularity(graph, part), 12)}))
    if args.dump_weights:
        run.add("weighted.edges", dump_edge_list(weighted, weights=True))
    run.finish("partition.txt")
    return EXIT_OK


def rank_outliers(graph, part: Partition, kind) -> list[tuple[int, float, int]]:
    """(node, max score, best community) ordered from most to least outlying."""
    best_c, best_s = max_scores(graph, part, kind)
    rounded = np.round(best_s, 12)
    order = sorted(range(graph.n_nodes), key=lambda v: (rounded[v], graph.labels[v]))
    return [(v, float(best_s[v]), int(best_c[v])) for v in order]


def cmd_outliers(args) -> int:
    graph = _load_graph(args.graph)
    if args.partition:
        part = _load_communities(args.partition, graph, "partition")
    elif args.partitioner == "ecg":
        part = cas_ecg(graph, _ecg_config(args, kind=args.ecg_score), threads=threads_from(args))
    else:
        part = louvain(graph, args.seed)
    ranked = rank_outliers(graph, part, args.score)
    run = Run(args, [args.graph, args.partition, args.truth])
    lines = ["rank,node,max_cas,community\n"]
    lines += [f"{i},{graph.labels[v]},{s:.6f},{c}\n" for i, (v, s, c) in enumerate(ranked, start=1)]
    run.add("outliers.csv", "".join(lines))
    figures = []
    if args.truth:
        try:
            truth = load_node_list(_read(args.truth), graph.index)
        except GraphFormatError as exc:
            raise InputError(f"{args.truth}: {exc}") from None
        is_out = np.zeros(graph.n_nodes, dtype=bool)
        is_out[truth] = True
        scores = np.zeros(graph.n_nodes)
        scores[[v for v, _, _ in ranked]] = [s for _, s, _ in ranked]
        curve = roc(scores, is_out)
        found = np.cumsum([is_out[v] for v, _, _ in ranked])
        run.add("roc.csv", curve.to_csv())
        run.add("auc.json", curve.summary_json())
        run.add("outliers_found.csv", "rank,outliers_found\n"
                + "".join(f"{i},{f}\n" for i, f in enumerate(found.tolist(), start=1)))
        if not args.no_plots:
            from .plotting import line_figure, roc_figure
            label = ScoreKind.parse(args.score).value.upper()
            figures.append(lambda out: roc_figure({label: curve}, out / "roc.svg"))
            figures.append(lambda out: line_figure(range(1, len(found) + 1), {"outliers found": found},
                                                   out / "outliers_found.svg", "rank", "outliers found"))
    run.finish("outliers.csv", figures)
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --tau-grid {text!r}") from None


def cmd_refine(args) -> int:
    graph = _load_graph(args.graph)
    if args.init == "ego-split":
        initial = ego_split(graph, args.seed, args.ego_min_size)
    else:
        if not args.cover:
            raise InputError("a cover file is required unless --init ego-split is given")
        initial = _load_communities(args.cover, graph, "cover")
        initial = initial.to_cover() if isinstance(initial, Partition) else initial
    truth = None
    if args.truth:
        truth = _load_communities(args.truth, graph, "cover")
        truth = truth.to_cover() if isinstance(truth, Partition) else truth
    try:
        config = RefineConfig(args.score, args.tau, args.min_size)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    grid = sorted(set(_parse_grid(args.tau_grid)) | {config.tau})
    results = dict(refine_grid(graph, initial, config.kind, grid, config.min_size))
    refined = results[config.tau]
    if all(len(c) == 0 for c in refined.communities):
        print(f"warning: every community is empty at tau={config.tau}; all nodes are outliers",
              file=sys.stderr)

    run = Run(args, [args.graph, args.cover, args.truth])
    run.add("cover.txt", dump_cover(refined, graph.labels))
    if args.init == "ego-split":
        run.add("initial_cover.txt", dump_cover(initial, graph.labels))
    header = "tau,outliers" + (",onmi" if truth is not None else "") + "\n"
    rows = []
    for tau in grid:
        row = f"{tau:g},{count_outliers(results[tau], graph)}"
        if truth is not None:
            row += f",{_safe_onmi(results[tau], truth):.6f}"
        rows.append(row + "\n")
    run.add("tau_grid.csv", header + "".join(rows))
    summary = {"tau": config.tau, "score": config.kind.value,
               "outliers_before": count_outliers(initial, graph),
               "outliers_after": count_outliers(refined, graph)}
    if truth is not None:
        summary["onmi_before"] = round(_safe_onmi(initial, truth), 12)
        summary["onmi_after"] = round(_safe_onmi(refined, truth), 12)
        print(f"onmi before={summary['onmi_before']:.4f} after={summary['onmi_after']:.4f}",
              file=sys.stderr)
    run.add("summary.json", _json(summary))
    figures = []
    if not args.no_plots:
        from .plotting import bar_figure
        counts = [count_outliers(results[t], graph) for t in grid]
        figures.append(lambda out: bar_figure([f"{t:g}" for t in grid], counts, out / "tau_grid.svg",
                                              "threshold", "outlier nodes"))
    run.finish("cover.txt", figures)
    return EXIT_OK


def _safe_onmi(a, b) -> float:
    nonempty = [c for c in a.communities if len(c)]
    if not nonempty:
        return 0.0
    return onmi(Cover(a.n_nodes, nonempty), b)


def cmd_generate(args) -> int:
    overrides = {k: getattr(args, k) for k in ("n", "gamma", "d_min", "d_max", "beta", "s_min", "s_max",
                                               "xi", "n_outliers", "eta", "seed")}
    try:
        text = _read(args.config) if args.config else ""
        config = GenConfig.from_text(text, **overrides)
        graph, cover, outliers = generate(config)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    run = Run(args, [args.config])
    run.add("graph.edges", dump_edge_list(graph))
    run.add("truth.cover", dump_cover(cover, graph.labels))
    run.add("outliers.txt", dump_node_list(outliers, graph.labels))
    run.add("config.txt", config.to_text())
    run.finish("graph.edges")
    return EXIT_OK


def cmd_eval(args) -> int:
    pred_text, truth_text = _read(args.pred), _read(args.truth)
    is_cover = args.format == "cover" or (args.format == "auto" and
                                          (_sniff_cover(pred_text) or _sniff_cover(truth_text)))
    if args.graph:
        index = _load_graph(args.graph).index
    else:
        index = label_index(pred_text, truth_text, cover=is_cover)
    metrics = {}
    try:
        if is_cover:
            a, b = load_cover(pred_text, index), load_cover(truth_text, index)
            metrics["onmi"] = round(onmi(a, b), 12)
            if a.is_partition() and b.is_partition():
                metrics["ami"] = round(ami(a.to_partition(), b.to_partition()), 12)
        else:
            p, t = load_partition(pred_text, index), load_partition(truth_text, index)
            metrics["ami"] = round(ami(p, t), 12)
    except GraphFormatError as exc:
        raise InputError(str(exc)) from None
    run = Run(args, [args.pred, args.truth, args.graph])
    run.add("metrics.json", _json(metrics))
    run.finish("metrics.json")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_csv
    text = _read(args.csv)
    name = args.name or (Path(args.csv).stem + ".svg")
    run = Run(args, [args.csv])
    try:
        run.finish(None, [lambda out: plot_csv(text, out / name)])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--stdout", action="store_true", help="print the primary output instead of writing files")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: all cores; CASCORE_THREADS overrides)")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def _ecg_flags(p: argparse.ArgumentParser, score_flag: str = "--score") -> None:
    p.add_argument("--k", type=int, default=16, help="ensemble size")
    p.add_argument("--scheme", choices=["ecg", "or", "and"], default="ecg")
    p.add_argument(score_flag, choices=["ief", "nief", "p"], default="p",
                   help="CAS score used by the or/and schemes")
    p.add_argument("--floor", type=float, default=0.05, help="minimum edge weight")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cascore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="CAS scores for every touched (node, community) pair")
    p.add_argument("graph")
    p.add_argument("communities", help="partition or cover file")
    p.add_argument("--format", choices=["auto", "partition", "cover"], default="auto")
    p.add_argument("--node", help="only rows of this node label")
    p.add_argument("--top", type=int, help="keep each node's N best communities")
    p.add_argument("--score", choices=["ief", "nief", "p"], default="p", help="ranking score for --top")
    _common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("partition", help="Louvain partition")
    p.add_argument("graph")
    p.add_argument("--level1", action="store_true", help="stop after the first local-moving level")
    _common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("ecg", help="ECG / CAS-ECG partition")
    p.add_argument("graph")
    _ecg_flags(p)
    p.add_argument("--dump-weights", action="store_true", help="also write the reweighted edge list")
    _common(p)
    p.set_defaults(func=cmd_ecg)

    p = sub.add_parser("outliers", help="rank nodes by maximum CAS score")
    p.add_argument("graph")
    p.add_argument("--partition", help="partition file (default: compute one)")
    p.add_argument("--partitioner", choices=["louvain", "ecg"], default="louvain")
    p.add_argument("--score", choices=["ief", "nief", "p"], default="p")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--scheme", choices=["ecg", "or", "and"], default="and")
    p.add_argument("--ecg-score", choices=["ief", "nief", "p"], default="p")
    p.add_argument("--floor", type=float, default=0.05)
    p.add_argument("--truth", help="file listing the true outlier nodes")
    p.add_argument("--no-plots", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_outliers)

    p = sub.add_parser("refine", help="threshold refinement of a cover")
    p.add_argument("graph")
    p.add_argument("cover", nargs="?")
    p.add_argument("--init", choices=["file", "ego-split"], default="file")
    p.add_argument("--score", choices=["ief", "nief", "p"], default="nief")
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--tau-grid", default=",".join(f"{t:g}" for t in DEFAULT_TAU_GRID))
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--ego-min-size", type=int, default=10, help="minimum ego-split community size")
    p.add_argument("--truth", help="true cover, for oNMI before/after")
    p.add_argument("--no-plots", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("generate", help="ABCD-lite benchmark graph")
    p.add_argument("--config", help="key=value configuration file")
    for name, typ in (("n", int), ("gamma", float), ("d-min", int), ("d-max", int), ("beta", float),
                      ("s-min", int), ("s-max", int), ("xi", float), ("n-outliers", int), ("eta", float)):
        p.add_argument(f"--{name}", type=typ, default=None)
    _common(p, seed=False)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="compare predicted and true communities")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--format", choices=["auto", "partition", "cover"], default="auto")
    p.add_argument("--graph", help="edge list supplying the node universe")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render a CSV output as SVG")
    p.add_argument("csv")
    p.add_argument("--name", help="output file name (default: <csv stem>.svg)")
    _common(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"cascore {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"cascore {args.command}: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
