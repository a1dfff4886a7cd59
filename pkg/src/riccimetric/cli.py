"""Command-line entry point: ``riccimetric <command> ...``.

Every command validates its whole plan before computing anything, keeps
outputs in memory until the work has succeeded, then writes each file
through a temporary sibling and an atomic rename.

Exit statuses: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .alignment import METRICS, align, coordinates, metric_graph, similarity_matrix
from .comparison import distance_matrix
from .curvature import METHODS, CurvatureParams, curvature_map
from .flow import FlowParams, metric_uniformity, ricci_flow
from .generators import GroundTruthMap, generate, perturb
from .graph import GraphError, load_graph, save_graph
from .transport import TransportError

log = logging.getLogger("riccimetric")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
MODELS = ("gnp", "kleinberg", "pref-attach", "random-regular")
# parameters each model takes, mapped from CLI flag names
MODEL_FLAGS = {
    "gnp": ("n", "p"),
    "kleinberg": ("n", "q", "r"),
    "pref-attach": ("n", "k"),
    "random-regular": ("n", "d"),
}


@dataclass
class CommandPlan:
    command: str
    params: dict = field(default_factory=dict)


class UsageError(Exception):
    pass


def _method(text: str) -> str:
    m = text.upper()
    if m not in METHODS:
        raise argparse.ArgumentTypeError(f"method must be one of {', '.join(METHODS)}")
    return m


def _unit_interval(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return x


def _positive(kind):
    def parse(text: str):
        x = kind(text)
        if not x > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return x
    return parse


def _nonnegative_int(text: str) -> int:
    x = int(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riccimetric",
                                description="Ricci curvature, Ricci flow metrics and network alignment.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def curvature_flags(sp):
        sp.add_argument("--method", type=_method, default="ATD", help="ATD (default) or OTD")
        sp.add_argument("--alpha", type=_unit_interval, default=0.5, help="mass kept on the node (default 0.5)")

    g = sub.add_parser("generate", help="sample a model graph")
    g.add_argument("--model", required=True, choices=MODELS)
    g.add_argument("--n", type=_positive(int), required=True, help="nodes (grid side for kleinberg)")
    g.add_argument("--p", type=float, help="edge probability (gnp)")
    g.add_argument("--q", type=_nonnegative_int, help="long-range links per node (kleinberg)")
    g.add_argument("--r", type=float, help="distance exponent (kleinberg)")
    g.add_argument("--k", type=_positive(int), help="edges per new node (pref-attach)")
    g.add_argument("--d", type=_positive(int), help="degree (random-regular)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)

    pt = sub.add_parser("perturb", help="delete random nodes or edges")
    pt.add_argument("-i", "--input", required=True)
    what = pt.add_mutually_exclusive_group(required=True)
    what.add_argument("--remove-nodes", type=_nonnegative_int)
    what.add_argument("--remove-edges", type=_nonnegative_int)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("-o", "--output", required=True)
    pt.add_argument("--truth", help="write the ground-truth correspondence here")

    c = sub.add_parser("curvature", help="per-edge Ollivier-Ricci curvature")
    c.add_argument("-i", "--input", required=True)
    c.add_argument("-o", "--output", required=True)
    curvature_flags(c)
    c.add_argument("--denominator", choices=("distance", "weight"), default="distance")

    f = sub.add_parser("flow", help="run the discrete Ricci flow")
    f.add_argument("-i", "--input", required=True)
    f.add_argument("-o", "--output", required=True, help="flowed edge list")
    f.add_argument("--history", help="per-iteration curvature summary CSV")
    curvature_flags(f)
    f.add_argument("--eps", type=_positive(float), default=1.0, help="step size (default 1.0)")
    f.add_argument("--iterations", type=_positive(int), default=50)
    f.add_argument("--tol", type=float, default=1e-4, help="stop when no curvature moves this much")

    u = sub.add_parser("uniformity", help="IQR of T/d over the edges of a weighted graph")
    u.add_argument("-i", "--input", required=True)
    u.add_argument("-o", "--output", help="per-edge ratio CSV")
    curvature_flags(u)

    a = sub.add_parser("align", help="landmark alignment of two graphs")
    a.add_argument("--g1", required=True)
    a.add_argument("--g2", required=True)
    a.add_argument("--landmarks", type=_positive(int), default=2)
    a.add_argument("--metric", choices=METRICS, default="rf-atd")
    a.add_argument("--matcher", choices=("hungarian", "greedy"), default="hungarian")
    a.add_argument("--repeats", type=_positive(int), default=10)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--truth", help="ground-truth map (default: nodes with equal names)")
    a.add_argument("--eps", type=_positive(float), help="connected-equivalence threshold")
    a.add_argument("--anonymize", action="store_true",
                   help="shuffle g2 nodes before matching so equal names cannot break ties")
    a.add_argument("-o", "--output", help="JSON report")
    a.add_argument("--matrix", help="similarity matrix CSV of the first repeat")

    cm = sub.add_parser("compare", help="curvature-signature EMD between graphs")
    cm.add_argument("--inputs", nargs="+", required=True)
    cm.add_argument("--labels", nargs="+")
    cm.add_argument("-o", "--output", required=True)
    curvature_flags(cm)
    return p


def _readable(path: str):
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise UsageError(f"cannot read input file {path!r}")


def _writable(path: str | None):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent):
        raise UsageError(f"output directory {parent!r} does not exist")


def _validate(cmd: str, ns: argparse.Namespace) -> dict:
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose")}
    for key in ("input", "g1", "g2", "truth") if cmd != "perturb" else ("input",):
        if params.get(key):
            _readable(params[key])
    for path in params.get("inputs") or ():
        _readable(path)
    for key in ("output", "history", "matrix") + (("truth",) if cmd == "perturb" else ()):
        _writable(params.get(key))

    if cmd == "generate":
        needed = MODEL_FLAGS[ns.model]
        missing = [f"--{k}" for k in needed if params[k] is None]
        if missing:
            raise UsageError(f"model {ns.model} needs {', '.join(missing)}")
        extra = [f"--{k}" for k in ("p", "q", "r", "k", "d") if k not in needed and params[k] is not None]
        if extra:
            raise UsageError(f"model {ns.model} does not take {', '.join(extra)}")
        if ns.model == "gnp" and not 0.0 <= ns.p <= 1.0:
            raise UsageError(f"--p must lie in [0, 1], got {ns.p}")
    elif cmd == "flow":
        if ns.tol < 0:
            raise UsageError(f"--tol must be >= 0, got {ns.tol}")
    elif cmd == "compare":
        if len(ns.inputs) < 2:
            raise UsageError("compare needs at least two --inputs")
        if ns.labels is not None and len(ns.labels) != len(ns.inputs):
            raise UsageError("give one --labels entry per input")
    return params


def parse(argv: list[str] | None = None) -> CommandPlan:
    """Parse and validate; usage problems exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        params = _validate(ns.command, ns)
    except UsageError as e:
        parser.error(str(e))
    params["verbose"] = ns.verbose
    return CommandPlan(ns.command, params)


def _read(path: str):
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def _write_atomic(path: str, text: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent.resolve())
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_generate(p: dict) -> tuple[dict[str, str], str]:
    kw = {k: p[k] for k in MODEL_FLAGS[p["model"]]}
    g = generate(p["model"], p["seed"], **kw)
    summary = f"generated {p['model']}: {g.number_of_nodes()} nodes, {g.number_of_edges()} edges"
    return {p["output"]: save_graph(g)}, summary


def _run_perturb(p: dict):
    g = _read(p["input"])
    g2, truth = perturb(g, p["seed"], remove_nodes=p["remove_nodes"] or 0,
                        remove_edges=p["remove_edges"] or 0)
    out = {p["output"]: save_graph(g2)}
    if p["truth"]:
        out[p["truth"]] = truth.dumps()
    summary = (f"removed {len(truth.removed_nodes)} nodes and {len(truth.removed_edges)} edges: "
               f"{g2.number_of_nodes()} nodes, {g2.number_of_edges()} edges left")
    return out, summary


def _run_curvature(p: dict):
    g = _read(p["input"])
    cm = curvature_map(g, CurvatureParams(p["alpha"], p["method"], p["denominator"]))
    k = cm.kappa
    summary = (f"{p['method']} curvature on {len(k)} edges: min {k.min():.6g} max {k.max():.6g} "
               f"mean {k.mean():.6g} std {k.std():.6g}")
    return {p["output"]: cm.to_csv()}, summary


def _run_flow(p: dict):
    g = _read(p["input"])
    params = FlowParams(p["eps"], p["iterations"], p["tol"], p["method"], p["alpha"])
    flowed, history = ricci_flow(g, params)
    out = {p["output"]: save_graph(flowed)}
    if p["history"]:
        out[p["history"]] = history.to_csv()
    last = history[-1]
    state = "converged" if history.converged else "stopped"
    summary = (f"flow {state} after {len(history) - 1} updates: "
               f"kappa mean {last.kappa_mean:.6g} std {last.kappa_std:.6g}")
    return out, summary


def _run_uniformity(p: dict):
    g = _read(p["input"])
    rep = metric_uniformity(g, CurvatureParams(p["alpha"], p["method"]))
    out = {}
    if p["output"]:
        out[p["output"]] = "u,v,ratio\n" + "".join(f"{u},{v},{r:.17g}\n" for (u, v), r in rep.ratios.items())
    return out, f"IQR {rep.iqr:.6g}"


def _run_align(p: dict):
    g1, g2 = _read(p["g1"]), _read(p["g2"])
    if p["truth"]:
        with open(p["truth"], encoding="utf-8") as fh:
            truth = GroundTruthMap.loads(fh.read())
    else:
        truth = GroundTruthMap.identity(g1, g2)
    h1, h2 = metric_graph(g1, p["metric"]), metric_graph(g2, p["metric"])
    rep = align(g1, g2, truth, p["landmarks"], p["metric"], p["matcher"], p["repeats"], p["seed"],
                p["eps"], metric_graphs=(h1, h2), anonymize=p["anonymize"])
    out = {}
    if p["output"]:
        doc = {
            "params": {k: p[k] for k in ("g1", "g2", "truth", "landmarks", "metric", "matcher",
                                         "repeats", "seed", "eps", "anonymize")},
            "seeds": rep.seeds,
            "accuracy": {"mean": rep.accuracy_mean, "std": rep.accuracy_std, "runs": rep.accuracies},
            "runs": [{"seed": s, "landmarks": L, "eps": e, "accuracy": r.accuracy,
                      "total_cost": r.total_cost, "matching": r.matching}
                     for s, L, e, r in zip(rep.seeds, rep.landmark_sets, rep.eps, rep.runs)],
        }
        out[p["output"]] = json.dumps(doc, indent=2) + "\n"
    if p["matrix"]:
        L = rep.landmark_sets[0]
        S = similarity_matrix(coordinates(h1, L), coordinates(h2, [truth.pairs[x] for x in L]))
        out[p["matrix"]] = S.to_csv()
    summary = (f"accuracy {rep.accuracy_mean:.4f} ± {rep.accuracy_std:.4f} "
               f"over {len(rep.seeds)} landmark draws ({p['metric']}, {p['matcher']})")
    return out, summary


def _run_compare(p: dict):
    graphs = [_read(path) for path in p["inputs"]]
    labels = p["labels"] or [Path(path).stem for path in p["inputs"]]
    dm = distance_matrix(graphs, labels, CurvatureParams(p["alpha"], p["method"]))
    off = dm.d[~np.eye(len(labels), dtype=bool)]
    summary = f"compared {len(labels)} graphs: EMD min {off.min():.6g} max {off.max():.6g}"
    return {p["output"]: dm.to_csv()}, summary


RUNNERS = {
    "generate": _run_generate,
    "perturb": _run_perturb,
    "curvature": _run_curvature,
    "flow": _run_flow,
    "uniformity": _run_uniformity,
    "align": _run_align,
    "compare": _run_compare,
}


def execute(plan: CommandPlan) -> int:
    """Run a validated plan; returns the exit status."""
    try:
        outputs, summary = RUNNERS[plan.command](plan.params)
        for path, text in outputs.items():
            _write_atomic(path, text)
    except (TransportError, FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"riccimetric {plan.command}: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphError, ValueError, KeyError, OSError) as e:
        print(f"riccimetric {plan.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    print(summary)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    plan = parse(argv)
    logging.basicConfig(level=logging.DEBUG if plan.params["verbose"] else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    return execute(plan)


if __name__ == "__main__":
    sys.exit(main())
