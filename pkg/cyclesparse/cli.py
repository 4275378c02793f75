"""Command-line interface for cyclesparse."""
import json
import logging
import math
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import biclique, reduce
from .core import (
    CYCLE_ALGOS,
    DENSE_LIMIT,
    MATCHING_RULES,
    BicliqueConfig,
    CycleConfig,
    ReduceConfig,
    SketchConfig,
    SparsifyConfig,
    rng_stream,
)
from .cycles import decompose as decompose_graph
from .exceptions import (
    ComponentMismatchError,
    ConvergenceError,
    GraphParseError,
    InternalConsistencyError,
    InvalidInputRange,
    InvalidInputType,
    InvalidInputValue,
    MissingItems,
    NotEulerianError,
    PreconditionError,
    RetryBudgetExhausted,
)
from .graph import Graph, load_graph, save_graph
from .linalg import asym_error_norm, certify_spectral_approx
from .report import ApproxReport, read_report, round_floats, sha256_hex
from .resistance import (
    approx_effective_resistances,
    exact_edge_resistances,
    exact_effective_resistances,
    foster_residual,
)
from .sketch import quadratic_form_errors, spectral_sketch
from .sparsify import degree_preserving_sparsify, eulerian_sparsify
from .validate import validate_decomposition

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}
FORMATS = ["edgelist", "json"]
NOT_REPLAYED = {"report_path", "output", "verbose", "timing"}
SCHUR_TOL = 1e-8
FOSTER_TOL = 1e-6

INPUT_ERRORS = (
    GraphParseError,
    InvalidInputRange,
    InvalidInputType,
    InvalidInputValue,
    MissingItems,
    NotEulerianError,
    ValidationError,
)
RUN_ERRORS = (
    ComponentMismatchError,
    ConvergenceError,
    InternalConsistencyError,
    PreconditionError,
    RetryBudgetExhausted,
)


class _Group(click.Group):
    """Group that turns bad input into usage errors and failed runs into exit code 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except INPUT_ERRORS as ex:
            raise click.UsageError(str(ex), ctx) from ex
        except RUN_ERRORS as ex:
            raise click.ClickException(str(ex)) from ex


def _common_options(func):
    options = [
        click.option(
            "--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Random seed."
        ),
        click.option(
            "--report",
            "report_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="Path of the JSON verification report.",
        ),
        click.option(
            "-o",
            "--output",
            type=click.Path(dir_okay=False),
            default=None,
            help="Output file, defaults to stdout.",
        ),
        click.option("-v", "--verbose", count=True, help="Log to stderr, repeat for debug."),
        click.option("--timing", is_flag=True, help="Record wall-clock time in the report."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _cycle_options(func):
    options = [
        click.option(
            "--cycle-algo",
            type=click.Choice(CYCLE_ALGOS, case_sensitive=False),
            default="naive",
            show_default=True,
            help="Cycle decomposition algorithm.",
        ),
        click.option(
            "--k", type=click.IntRange(min=1), default=None, help="Target set size parameter."
        ),
        click.option(
            "--levels",
            type=click.IntRange(min=0),
            default=1,
            show_default=True,
            help="Recursion depth.",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _format_option(func):
    return click.option(
        "--format",
        "fmt",
        type=click.Choice(FORMATS, case_sensitive=False),
        default="edgelist",
        show_default=True,
        help="Output graph format.",
    )(func)


def _configure_logging(verbose: int) -> None:
    if not verbose:
        return
    logger = logging.getLogger("cyclesparse")
    logger.setLevel(logging.DEBUG if verbose > 1 else logging.INFO)
    if not any(getattr(h, "_cyclesparse", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._cyclesparse = True  # type: ignore
        logger.addHandler(handler)


def _replay_argv(ctx: click.Context) -> Tuple[List[str], Dict[str, Any]]:
    """Arguments and flag values that reproduce the current invocation."""
    argv = [ctx.info_name or ctx.command.name]
    flags: Dict[str, Any] = {}
    for param in ctx.command.params:
        if param.name in NOT_REPLAYED:
            continue
        value = ctx.params[param.name]
        if isinstance(value, tuple):
            value = [list(v) if isinstance(v, tuple) else v for v in value]
        flags[param.name] = value
        if isinstance(param, click.Argument):
            argv.append(str(value))
            continue
        name = max(param.opts, key=len)
        if param.is_flag:
            if value:
                argv.append(name)
            elif param.secondary_opts:
                argv.append(max(param.secondary_opts, key=len))
            continue
        if value is None:
            continue
        items = value if param.multiple else [value]
        for item in items:
            argv.append(name)
            argv.extend(str(x) for x in (item if isinstance(item, list) else [item]))
    return argv, flags


def _read_graph(path: str, directed: bool) -> Tuple[Graph, bytes]:
    data = Path(path).read_bytes()
    return load_graph(data.decode("utf-8"), directed=directed), data


def _graph_doc(g: Graph, fmt: str) -> str:
    if fmt == "edgelist":
        return save_graph(g)
    doc = {"n": g.n, "directed": g.directed, "edges": [[e.u, e.v, e.w] for e in g.edges]}
    return json.dumps(doc, sort_keys=True) + "\n"


def _finish(
    ctx: click.Context,
    data: bytes,
    doc: str,
    checks: Dict[str, bool],
    metrics: Dict[str, Any],
    edge_counts: Sequence[int] = (),
    started: Optional[float] = None,
) -> None:
    """Write the output and the report, and exit with 1 when a check failed."""
    params = ctx.params
    output = params.get("output")
    if output:
        Path(output).write_text(doc)
    else:
        click.echo(doc, nl=False)
    argv, flags = _replay_argv(ctx)
    report = ApproxReport(
        command=ctx.info_name,
        argv=argv,
        seed=params.get("seed", 0),
        input_sha256=sha256_hex(data),
        output_sha256=sha256_hex(doc),
        flags=flags,
        edge_counts=list(edge_counts),
        checks=checks,
        metrics=round_floats(metrics),
        wall_clock=time.perf_counter() - started if params.get("timing") and started else None,
    )
    if params.get("report_path"):
        report.write(params["report_path"])
    if not report.passed:
        click.echo(f"Failed checks: {', '.join(report.failed_checks)}", err=True)
        ctx.exit(1)


@click.group(cls=_Group, context_settings=CONTEXT_SETTINGS)
def main():
    """Degree preserving sparsifiers, sketches and reductions built on short cycle decompositions.

    Every subcommand reads a graph in the edge-list format (an optional
    ``# n=<int> directed=<0|1>`` header followed by ``u v w`` lines), writes its result to
    stdout or --output and, with --report, a JSON verification report. The exit code is 1
    when one of the reported checks fails.

    Examples:

        $ cyclesparse decompose graph.txt --cycle-algo naive --report dec.json

        $ cyclesparse sparsify graph.txt --eps 0.5 --seed 3 -o sparse.txt

        $ cyclesparse verify --certificate dec.json
    """  # noqa: D412


@main.command(context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@_cycle_options
@_common_options
@click.pass_context
def decompose(
    ctx: click.Context,
    graph: str,
    cycle_algo: str,
    k: Optional[int],
    levels: int,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Split the edges of GRAPH into short edge-disjoint cycles and leftover edges."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=False)
    config = CycleConfig(algo=cycle_algo, k=k, levels=levels)
    dec = decompose_graph(g, config, rng=rng_stream(seed, "cli", "decompose"))
    check = validate_decomposition(g, dec)
    metrics = {
        "cycles": len(dec.cycles),
        "extras": len(dec.extras),
        "max_length": dec.max_length,
        "length_bound": dec.length_bound,
        "extras_bound": dec.extras_bound,
        "problems": list(check.problems),
    }
    _finish(ctx, data, dec.to_json() + "\n", {"cycles_valid": check.ok}, metrics, [g.m], started)


def _sparsify_config(eps, seed, max_edges, max_rounds, certify, cycle_algo, k, levels):
    return SparsifyConfig(
        eps=eps,
        seed=seed,
        max_edges=max_edges,
        max_rounds=max_rounds,
        certify_rounds=certify,
        cycle=CycleConfig(algo=cycle_algo, k=k, levels=levels),
    )


def _sparsify_options(func):
    options = [
        click.option("--eps", type=float, default=0.5, show_default=True, help="Target error."),
        click.option(
            "--max-edges",
            type=click.IntRange(min=1),
            default=None,
            help="Explicit stop edge count.",
        ),
        click.option(
            "--max-rounds",
            type=click.IntRange(min=1),
            default=64,
            show_default=True,
            help="Round cap.",
        ),
        click.option(
            "--certify/--no-certify", default=False, help="Check the dense error against --eps."
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@main.command(context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@_sparsify_options
@_format_option
@_cycle_options
@_common_options
@click.pass_context
def sparsify(
    ctx: click.Context,
    graph: str,
    eps: float,
    max_edges: Optional[int],
    max_rounds: int,
    certify: bool,
    fmt: str,
    cycle_algo: str,
    k: Optional[int],
    levels: int,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Degree preserving spectral sparsifier of the undirected GRAPH."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=False)
    config = _sparsify_config(eps, seed, max_edges, max_rounds, certify, cycle_algo, k, levels)
    result = degree_preserving_sparsify(g, config)
    checks = {"degrees_exact": result.graph.weighted_degrees() == g.weighted_degrees()}
    metrics: Dict[str, Any] = {
        "stop_threshold": result.stop_threshold,
        "rounds": len(result.rounds),
        "spectral_error": result.certificate.error if result.certificate else None,
    }
    if certify:
        checks["spectral"] = result.certificate is not None and result.certificate.holds(eps)
    counts = [g.m] + [r.edges_after for r in result.rounds]
    _finish(ctx, data, _graph_doc(result.graph, fmt), checks, metrics, counts, started)


@main.command("sparsify-eulerian", context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@_sparsify_options
@_format_option
@_cycle_options
@_common_options
@click.pass_context
def sparsify_eulerian(
    ctx: click.Context,
    graph: str,
    eps: float,
    max_edges: Optional[int],
    max_rounds: int,
    certify: bool,
    fmt: str,
    cycle_algo: str,
    k: Optional[int],
    levels: int,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Sparsifier of the Eulerian directed GRAPH, Eulerian after every round."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=True)
    config = _sparsify_config(eps, seed, max_edges, max_rounds, certify, cycle_algo, k, levels)
    result = eulerian_sparsify(g, config)
    checks = {"eulerian": result.graph.is_eulerian()}
    metrics: Dict[str, Any] = {
        "stop_threshold": result.stop_threshold,
        "rounds": len(result.rounds),
        "asym_error": result.asym_norm,
    }
    if certify:
        checks["asym_error"] = result.asym_norm is not None and result.asym_norm <= eps
    counts = [g.m] + [r.edges_after for r in result.rounds]
    _finish(ctx, data, _graph_doc(result.graph, fmt), checks, metrics, counts, started)


@main.command(context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", type=float, default=0.5, show_default=True, help="Target error.")
@click.option("--alpha", type=float, default=None, help="Degree threshold of the sampling step.")
@click.option("--max-rounds", type=click.IntRange(min=1), default=None, help="Round cap.")
@_format_option
@_cycle_options
@_common_options
@click.pass_context
def sketch(
    ctx: click.Context,
    graph: str,
    eps: float,
    alpha: Optional[float],
    max_rounds: Optional[int],
    fmt: str,
    cycle_algo: str,
    k: Optional[int],
    levels: int,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Graphical spectral sketch of the undirected GRAPH."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=False)
    config = SketchConfig(
        eps=eps,
        alpha=alpha,
        max_rounds=max_rounds,
        seed=seed,
        cycle=CycleConfig(algo=cycle_algo, k=k, levels=levels),
    )
    result = spectral_sketch(g, config)
    checks = {"degrees_exact": result.graph.weighted_degrees() == g.weighted_degrees()}
    metrics = {"alphas": list(result.alphas), "gammas": list(result.gammas)}
    doc = _graph_doc(result.graph, fmt)
    _finish(ctx, data, doc, checks, metrics, result.edge_counts, started)


@main.command(context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--exact", is_flag=True, help="Dense exact resistances instead of projections.")
@click.option(
    "--theta",
    type=float,
    default=math.log(1.5),
    show_default=True,
    help="Accuracy of the projections as a log factor.",
)
@click.option(
    "--pair",
    "pairs",
    type=(int, int),
    multiple=True,
    help="Vertex pair, repeat for several; needs --exact. Defaults to all edges.",
)
@_common_options
@click.pass_context
def resistances(
    ctx: click.Context,
    graph: str,
    exact: bool,
    theta: float,
    pairs: Sequence[Tuple[int, int]],
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Effective resistances of GRAPH written as ``u v r`` lines."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=False)
    checks: Dict[str, bool] = {}
    metrics: Dict[str, Any] = {}
    if pairs:
        if not exact:
            raise click.UsageError("--pair needs --exact.", ctx)
        values = exact_effective_resistances(g, pairs)
        frame = pd.DataFrame(
            {"u": [p[0] for p in pairs], "v": [p[1] for p in pairs], "r": values}
        )
    else:
        if exact:
            est = exact_edge_resistances(g)
        else:
            est = approx_effective_resistances(g, theta, rng_stream(seed, "cli", "resistances"))
        frame = est.to_frame(g)
        residual = foster_residual(g, est)
        metrics["foster_residual"] = residual
        if exact:
            checks["foster"] = abs(residual) <= FOSTER_TOL * max(g.n, 1)
    doc = frame.to_csv(
        sep=" ", header=False, index=False, columns=["u", "v", "r"], float_format="%.12g"
    )
    _finish(ctx, data, doc, checks, metrics, [g.m], started)


def _parse_vertices(text: str) -> List[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError as ex:
        raise InvalidInputType("f", "comma separated integers", "0,3,5") from ex


@main.command("schur-step", context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--f", "f_vertices", type=str, default=None, help="Eliminated vertices, e.g., 0,3,5.")
@click.option("--dd", is_flag=True, help="Pick the eliminated vertices as a 1.1-DD subset.")
@click.option("--sketch", "sketch_it", is_flag=True, help="Sketch the cliques, do not list them.")
@click.option("--eps", type=float, default=0.5, show_default=True, help="Sketch target error.")
@click.option("--phi", type=float, default=None, help="Conductance target of the sketch.")
@click.option("--q", type=click.IntRange(min=0), default=None, help="Sketch recursion depth.")
@click.option(
    "--matching-rule",
    type=click.Choice(MATCHING_RULES, case_sensitive=False),
    default="stated",
    show_default=True,
    help="Matching count rule of the biclique sampler.",
)
@_common_options
@click.pass_context
def schur_step(
    ctx: click.Context,
    graph: str,
    f_vertices: Optional[str],
    dd: bool,
    sketch_it: bool,
    eps: float,
    phi: Optional[float],
    q: Optional[int],
    matching_rule: str,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Squared Schur form of GRAPH for eliminating the vertices of --f or --dd."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=False)
    if f_vertices is not None:
        f = _parse_vertices(f_vertices)
    elif dd:
        f = list(biclique.dd_subset(g, rng=rng_stream(seed, "cli", "schur-step", "dd")))
    else:
        raise click.UsageError("Pass the eliminated vertices with --f or --dd.", ctx)
    step = biclique.schur_step_cliques(g, f)
    checks: Dict[str, bool] = {}
    metrics: Dict[str, Any] = {
        "f_size": len(step.f),
        "cliques": len(step.f_cliques) + len(step.c_cliques),
        "bicliques": len(step.bicliques),
    }
    squared = None
    if g.n <= DENSE_LIMIT:
        squared = step.squared_matrix()
        err = biclique.schur_identity_error(g, step.f, squared)
        metrics["schur_identity_error"] = err
        checks["schur_identity"] = err <= SCHUR_TOL
    if sketch_it:
        config = BicliqueConfig(eps=eps, phi=phi, q=q, matching_rule=matching_rule)
        out = biclique.sketch_schur_step(
            g, step.f, config, rng=rng_stream(seed, "cli", "schur-step", "sketch")
        )
        metrics["sketch_edges"] = out.m
        if squared is not None:
            try:
                metrics["sketch_error"] = certify_spectral_approx(squared, out.laplacian()).error
            except ComponentMismatchError:
                metrics["sketch_error"] = None
    else:
        out = step.materialize().combined()
    doc = {
        "n": out.n,
        "f": list(step.f),
        "edges": [[u, v, float(w)] for u, v, w in out.edges],
    }
    text = json.dumps(round_floats(doc), sort_keys=True) + "\n"
    _finish(ctx, data, text, checks, metrics, [g.m], started)


@main.command("reduce-weights", context_settings=CONTEXT_SETTINGS)
@click.argument("graph", type=click.Path(exists=True, dir_okay=False))
@click.option("--xi", type=click.IntRange(min=1), default=None, help="Class bucket period.")
@click.option("--lead-bits", type=click.IntRange(min=1), default=None, help="Leading bits kept.")
@click.option("--move-threshold", type=float, default=None, help="Weight ratio a move needs.")
@click.option("--certify/--no-certify", default=False, help="Check the dense error against n**-2.")
@_common_options
@click.pass_context
def reduce_weights(
    ctx: click.Context,
    graph: str,
    xi: Optional[int],
    lead_bits: Optional[int],
    move_threshold: Optional[float],
    certify: bool,
    seed: int,
    report_path: Optional[str],
    output: Optional[str],
    verbose: int,
    timing: bool,
):
    """Reduce the Eulerian GRAPH to a sparse part plus power-of-two classes."""
    started = time.perf_counter()
    _configure_logging(verbose)
    g, data = _read_graph(graph, directed=True)
    config = ReduceConfig(xi=xi, lead_bits=lead_bits, move_threshold=move_threshold)
    red = reduce.reduce_to_unit(g, config)
    checks = {"degrees_exact": reduce.reconstruct_degrees(red) == g.weighted_degrees()}
    metrics: Dict[str, Any] = {
        "vertex_total": red.vertex_total,
        "edge_total": red.edge_total,
        "moves": red.moves,
        "touched_max": max(red.touched.values(), default=0),
    }
    if certify and g.n <= DENSE_LIMIT:
        rebuilt = reduce.reconstruct(red.sparse, [c.graph for c in red.classes])
        err = asym_error_norm(g.symmetric_laplacian(), g.laplacian(), rebuilt).value
        metrics["asym_error"] = err
        checks["asym_error"] = err <= float(max(g.n, 2)) ** -2
    doc = {
        "n": g.n,
        "classes": [
            {
                "index": c.index,
                "bucket": c.bucket,
                "piece": c.piece,
                "arcs": [[e.u, e.v, e.w] for e in c.graph.edges],
            }
            for c in red.classes
        ],
        "sparse": [[u, v, str(w)] for (u, v), w in red.sparse.arcs().items()],
    }
    _finish(ctx, data, json.dumps(doc, sort_keys=True) + "\n", checks, metrics, [g.m], started)


def _replay(report: ApproxReport) -> Tuple[bool, str]:
    with tempfile.TemporaryDirectory() as tmp:
        rep, out = Path(tmp, "report.json"), Path(tmp, "output")
        argv = list(report.argv) + ["--report", str(rep), "--output", str(out)]
        try:
            main.main(args=argv, prog_name="cyclesparse", standalone_mode=False)
        except click.ClickException as ex:
            return False, f"replay failed: {ex.format_message()}"
        if not rep.exists():
            return False, "replay wrote no report"
        expected = report.copy(update={"wall_clock": None}).to_json()
        actual = rep.read_text()
    if actual != expected:
        return False, "replayed report differs"
    return True, "replayed report is identical"


@main.command(context_settings=CONTEXT_SETTINGS)
@click.option(
    "--certificate",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Report to replay byte for byte.",
)
@click.option(
    "--vectors",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Whitespace separated test vectors, one per line.",
)
@click.option("--original", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--sketch", "sketch_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--eps", type=float, default=0.5, show_default=True, help="Allowed relative error.")
@click.option(
    "--min-pass",
    type=click.FloatRange(0, 1),
    default=0.95,
    show_default=True,
    help="Fraction of vectors that must pass.",
)
@click.option("-v", "--verbose", count=True, help="Log to stderr, repeat for debug.")
@click.pass_context
def verify(
    ctx: click.Context,
    certificate: Optional[str],
    vectors: Optional[str],
    original: Optional[str],
    sketch_path: Optional[str],
    eps: float,
    min_pass: float,
    verbose: int,
):
    """Replay a stored report, or check a sketch against fixed vectors.

    Examples:

        $ cyclesparse verify --certificate run.json

        $ cyclesparse verify --vectors x.txt --original g.txt --sketch h.txt --eps 0.3
    """  # noqa: D412
    _configure_logging(verbose)
    if certificate:
        ok, message = _replay(read_report(certificate))
        click.echo(message)
        if not ok:
            ctx.exit(1)
        return
    if not (vectors and original and sketch_path):
        raise click.UsageError(
            "Pass --certificate, or --vectors with --original and --sketch.", ctx
        )
    g, _ = _read_graph(original, directed=False)
    h, _ = _read_graph(sketch_path, directed=False)
    xs = pd.read_csv(vectors, sep=r"\s+", header=None).to_numpy(dtype=float)
    if xs.shape[1] != g.n or h.n != g.n:
        raise click.UsageError(f"Vectors and graphs must have {g.n} entries.", ctx)
    errors = quadratic_form_errors(g, h, xs)
    fraction = float(np.mean(errors <= eps))
    summary = {
        "trials": int(len(errors)),
        "passed": int(np.sum(errors <= eps)),
        "fraction": fraction,
        "max_error": float(errors.max()),
    }
    click.echo(json.dumps(round_floats(summary), sort_keys=True))
    if fraction < min_pass:
        ctx.exit(1)
