"""Command-line entry points: completion runs, log simulation, parameter sweeps, serving."""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .graph import load_data_graph
from .harness import report, result_records, run_experiment, summarize
from .log import (
    SimulationConfig,
    cooccurrence_ingest,
    datapos_simulate,
    import_positive_sets,
    inject_negatives,
    load_entity_windows,
    load_log,
    save_log,
)
from .query import load_query_graph
from .rankers import RANKER_IDS, RdpConfig, make_ranker


def _load_targets(graph, targets_dir: str):
    paths = sorted(Path(targets_dir).glob("*.qg"))
    if not paths:
        raise click.ClickException(f"no *.qg target files in {targets_dir}")
    return [(p.stem, load_query_graph(str(p), graph)) for p in paths]


def _int_list(_ctx, _param, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of integers")


@click.group()
def main():
    """Edge-suggestion experiment harness and services."""


@main.command("run")
@click.option("--graph-nodes", required=True, type=click.Path(exists=True))
@click.option("--graph-edges", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--targets", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ranker", type=click.Choice(RANKER_IDS), default="rdp")
@click.option("--n-paths", type=int, default=10, show_default=True)
@click.option("--tau", type=int, default=10, show_default=True)
@click.option("--cap", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="write TSV records here")
def run_cmd(graph_nodes, graph_edges, log_path, targets, ranker, n_paths, tau, cap, seed, out):
    """Run the completion experiment for one ranker over a target directory."""
    graph = load_data_graph(graph_nodes, graph_edges)
    log = load_log(log_path)
    target_list = _load_targets(graph, targets)
    results = run_experiment(
        graph,
        target_list,
        lambda s: make_ranker(ranker, log, RdpConfig(n_paths, tau, s)),
        cap=cap,
        seed=seed,
    )
    records = result_records(ranker, results)
    text = report({ranker: results})
    if out:
        Path(out).write_text("\n".join(records) + "\n" + text + "\n", encoding="utf-8")
    click.echo("\n".join(records))
    click.echo(text)


@main.command("simulate-log")
@click.option("--method", type=click.Choice(["datapos", "cooccur", "import"]), required=True)
@click.option("--graph-nodes", required=True, type=click.Path(exists=True))
@click.option("--graph-edges", required=True, type=click.Path(exists=True))
@click.option("--windows", type=click.Path(exists=True), default=None,
              help="entity-window file (cooccur)")
@click.option("--sets", "sets_path", type=click.Path(exists=True), default=None,
              help="positive-set file (import)")
@click.option("--rho-w", type=int, default=None, help="co-occurrence support threshold")
@click.option("--rho-d", type=int, default=None, help="data-graph support threshold")
@click.option("--max-itemset-size", type=int, default=5, show_default=True)
@click.option("--inject-negatives/--no-inject-negatives", "with_negatives",
              default=True, show_default=True)
@click.option("--max-negatives", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def simulate_cmd(method, graph_nodes, graph_edges, windows, sets_path, rho_w, rho_d,
                 max_itemset_size, with_negatives, max_negatives, out):
    """Simulate a query log and write it in the one-session-per-line format."""
    graph = load_data_graph(graph_nodes, graph_edges)
    cfg = SimulationConfig(rho_w=rho_w, rho_d=rho_d, max_itemset_size=max_itemset_size)
    if method == "datapos":
        if rho_d is None:
            raise click.ClickException("--rho-d is required for datapos")
        log = datapos_simulate(graph, cfg)
    elif method == "cooccur":
        if rho_w is None:
            raise click.ClickException("--rho-w is required for cooccur")
        if not windows:
            raise click.ClickException("--windows is required for cooccur")
        log = cooccurrence_ingest(load_entity_windows(windows), graph, cfg)
    else:
        if not sets_path:
            raise click.ClickException("--sets is required for import")
        log = import_positive_sets(sets_path, graph)
    if with_negatives:
        log = inject_negatives(log, graph, max_negatives=max_negatives)
    save_log(log, out)
    click.echo(f"wrote {len(log)} sessions to {out}")


@main.command("sweep")
@click.option("--graph-nodes", required=True, type=click.Path(exists=True))
@click.option("--graph-edges", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--targets", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--ranker", type=click.Choice(["rdp", "rdp-noneg"]), default="rdp")
@click.option("--n-paths", callback=_int_list, default="1,5,10,25", show_default=True)
@click.option("--tau", callback=_int_list, default="1,5,10,25", show_default=True)
@click.option("--cap", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def sweep_cmd(graph_nodes, graph_edges, log_path, targets, ranker, n_paths, tau, cap, seed, out):
    """Grid over path counts and the log-subset threshold."""
    graph = load_data_graph(graph_nodes, graph_edges)
    log = load_log(log_path)
    target_list = _load_targets(graph, targets)
    lines = ["ranker\tn_paths\ttau\tmean_sugg\tmedian_sugg\tcompleted\tcapped"]
    for n in n_paths:
        for t in tau:
            results = run_experiment(
                graph,
                target_list,
                lambda s, n=n, t=t: make_ranker(ranker, log, RdpConfig(n, t, s)),
                cap=cap,
                seed=seed,
            )
            s = summarize(f"{ranker}(N={n},tau={t})", results)
            lines.append(
                f"{ranker}\t{n}\t{t}\t{s.mean_suggestions:.2f}\t"
                f"{s.median_suggestions:.1f}\t{s.completion_fraction:.3f}\t{s.capped_runs}"
            )
    text = "\n".join(lines)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    click.echo(text)


@main.command("serve")
@click.option("--graph-nodes", required=True, type=click.Path(exists=True))
@click.option("--graph-edges", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--ranker", type=click.Choice(RANKER_IDS), default="rdp")
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--n-paths", type=int, default=10, show_default=True)
@click.option("--tau", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True), default=None,
              help="directory with the built frontend")
def serve_cmd(graph_nodes, graph_edges, log_path, ranker, k, n_paths, tau, seed,
              host, port, static_dir):
    """Start the suggestion service (and optionally serve the frontend)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    graph = load_data_graph(graph_nodes, graph_edges)
    config = ServiceConfig(
        k=k,
        ranker_id=ranker,
        rdp=RdpConfig(n_paths=n_paths, tau=tau, rng_seed=seed),
        log_path=log_path,
        host=host,
        port=port,
    )
    app = create_app(graph, config, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
