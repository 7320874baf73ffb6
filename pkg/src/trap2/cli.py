"""Command-line entry point: gen, train, explain, eval, export-dot.

All randomness flows through explicit --seed flags, values from a --config
JSON file are overridden by explicitly given flags, and every run is
idempotent: same flags, same bytes out. Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from .baselines import grad_explainer, greedy_explainer, random_explainer, GREEDY_MODES
from .datasets import DATASET_KINDS, DatasetSpec, generate
from .evaluation import METHODS, evaluate
from .explanation import load_explanation, save_explanation, to_dot
from .graph import load_graph, save_graph
from .perturbation import PerturbationConfig
from .predictor import ReferenceGCN, load_model, save_model, train_gcn
from .surrogate import WEIGHT_MODES, explain_graph, explain_node
from .translation import translate


def _fail(exc: Exception) -> None:
    raise click.ClickException(str(exc))


@click.group()
def main() -> None:
    """Explain graph neural network predictions with local surrogates."""


def _load_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _fail(exc)


# -- gen ---------------------------------------------------------------


@main.command()
@click.option("--dataset", "-d", type=click.Choice(DATASET_KINDS), required=True)
@click.option("--seed", type=int, default=None, show_default="0")
@click.option("--base-nodes", type=int, default=None, show_default="300 (BA) / full tree")
@click.option("--motifs", type=int, default=None, show_default="80",
              help="Total planted motifs (split across the two communities).")
@click.option("--noise-edge-fraction", type=float, default=None, show_default="0.1")
@click.option("--feature-dim", type=int, default=None, show_default="10")
@click.option("--ba-m", type=int, default=None, show_default="5", help="Edges per new BA node.")
@click.option("--tree-depth", type=int, default=None, show_default="8")
@click.option("--motif-anchors", type=int, default=None, show_default="2 (houses) / 1 (trees)",
              help="Attachment edges per motif.")
@click.option("--inter-community-edges", type=int, default=None, show_default="1% of nodes")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file with DatasetSpec fields; flags override it.")
@click.option("--output", "-o", type=click.Path(), required=True)
def gen(dataset, seed, base_nodes, motifs, noise_edge_fraction, feature_dim,
        ba_m, tree_depth, motif_anchors, inter_community_edges, config_path, output):
    """Generate a synthetic benchmark graph with motif ground truth."""
    fields = dict(_load_json_config(config_path))
    fields["kind"] = dataset
    overrides = {
        "seed": seed,
        "base_nodes": base_nodes,
        "motif_count": motifs,
        "noise_edge_fraction": noise_edge_fraction,
        "feature_dim": feature_dim,
        "ba_m": ba_m,
        "tree_depth": tree_depth,
        "motif_anchors": motif_anchors,
        "inter_community_edges": inter_community_edges,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    try:
        g = generate(DatasetSpec(**fields))
        save_graph(g, output)
    except (ValueError, TypeError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {output}: {g.n} nodes, {g.num_edges} edges, "
               f"{int(g.node_labels.max()) + 1} classes")


# -- train -------------------------------------------------------------


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--output", "-o", type=click.Path(), required=True)
@click.option("--epochs", type=int, default=8000, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--hidden", type=int, default=20, show_default=True)
@click.option("--depth", type=int, default=3, show_default=True,
              help="Message-passing layers; also the hop radius the model sees.")
@click.option("--split", type=float, default=0.8, show_default=True,
              help="Training fraction of nodes.")
@click.option("--weight-decay", type=float, default=0.0, show_default=True)
@click.option("--class-balance/--no-class-balance", default=False, show_default=True,
              help="Weight the loss by inverse class frequency.")
@click.option("--stratify/--no-stratify", default=False, show_default=True,
              help="Split train/test per class.")
@click.option("--seed", type=int, default=0, show_default=True)
def train(graph_path, output, epochs, lr, hidden, depth, split, weight_decay,
          class_balance, stratify, seed):
    """Train the reference classifier on a labeled graph."""
    try:
        g = load_graph(graph_path)
        if g.node_labels is None:
            raise ValueError("graph has no node labels to train on")
        model = ReferenceGCN(
            feature_dim=g.d,
            num_classes=int(g.node_labels.max()) + 1,
            hidden=hidden,
            depth=depth,
            seed=seed,
        )
        report = train_gcn(
            model, g, split=split, epochs=epochs, lr=lr, seed=seed,
            weight_decay=weight_decay, class_balance=class_balance,
            stratify=stratify,
        )
        save_model(model, output)
    except (ValueError, OSError) as exc:
        _fail(exc)
    click.echo(
        f"wrote {output}: train accuracy {report.train_accuracy:.4f}, "
        f"test accuracy {report.test_accuracy:.4f} ({report.epochs} epochs)"
    )


# -- shared explanation options -----------------------------------------

_PERTURB_OPTIONS = [
    click.option("--structure-pattern", type=click.Choice(["adding", "removing", "adding-and-removing", "none"]),
                 default=None, show_default="removing"),
    click.option("--feature-pattern", type=click.Choice(["masking", "scaling", "none"]),
                 default=None, show_default="masking"),
    click.option("--p1", type=float, default=None, show_default="0.5",
                 help="Edge-keep probability."),
    click.option("--p2", type=float, default=None, show_default="0.8",
                 help="Feature-keep probability."),
    click.option("--protect-one-hop/--no-protect-one-hop", default=None,
                 show_default="off", help="Pin existing edges at the explained node."),
    click.option("-m", "--perturbations", type=int, default=None, show_default="1500",
                 help="Number of perturbed instances."),
    click.option("--energy-hops", type=int, default=None, show_default="3",
                 help="Hop bound K of the structural energy."),
    click.option("--delta", type=float, default=None, show_default="25",
                 help="Similarity kernel width."),
    click.option("--lambda-a", type=float, default=None, show_default="1"),
    click.option("--lambda-x", type=float, default=None, show_default="1"),
    click.option("--normalize-feature-energy/--no-normalize-feature-energy", default=None,
                 show_default="off"),
    click.option("--literal-cosine/--no-literal-cosine", default=None, show_default="off",
                 help="Feed cosine similarity (not distance) to the kernel."),
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="JSON file with perturbation fields; flags override it."),
]

_FIT_OPTIONS = [
    click.option("--l1", type=float, default=1e-3, show_default=True,
                 help="L1 regularization strength of the surrogate."),
    click.option("--fit-epochs", type=int, default=300, show_default=True),
    click.option("--fit-lr", type=float, default=0.01, show_default=True),
    click.option("--weight-mode", type=click.Choice(WEIGHT_MODES), default="inverse",
                 show_default=True, help="Energy-to-sample-weight mapping."),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _build_pcfg(config_path, seed, structure_pattern, feature_pattern, p1, p2,
                protect_one_hop, perturbations, energy_hops, delta, lambda_a,
                lambda_x, normalize_feature_energy, literal_cosine) -> PerturbationConfig:
    fields = dict(_load_json_config(config_path))
    overrides = {
        "structure_pattern": structure_pattern,
        "feature_pattern": feature_pattern,
        "p1": p1,
        "p2": p2,
        "protect_one_hop": protect_one_hop,
        "m": perturbations,
        "K": energy_hops,
        "delta": delta,
        "lambda_A": lambda_a,
        "lambda_X": lambda_x,
        "normalize_feature_energy": normalize_feature_energy,
        "literal_cosine": literal_cosine,
        "seed": seed,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return PerturbationConfig.from_dict(fields)


# -- explain -------------------------------------------------------------


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--node", type=int, default=None,
              help="Node to explain; omit with --graph-level.")
@click.option("--graph-level", is_flag=True, default=False,
              help="Explain the graph-level prediction (graph-task models).")
@click.option("--method", type=click.Choice(METHODS), default="trap2", show_default=True)
@click.option("--n-select", type=int, default=None, show_default="n_hat/4",
              help="Subgraph size to extract.")
@click.option("--seed", type=int, default=None, show_default="0")
@click.option("--output", "-o", type=click.Path(), required=True)
@click.option("--export-dot", "dot_path", type=click.Path(), default=None,
              help="Also write a GraphViz rendering.")
@_add_options(_PERTURB_OPTIONS)
@_add_options(_FIT_OPTIONS)
def explain(graph_path, model_path, node, graph_level, method, n_select, seed,
            output, dot_path, l1, fit_epochs, fit_lr, weight_mode, **pflags):
    """Explain one prediction and write the explanation JSON."""
    try:
        g = load_graph(graph_path)
        model = load_model(model_path)
        cfg = _build_pcfg(seed=seed, **pflags)
        if graph_level:
            if node is not None:
                raise ValueError("--node and --graph-level are mutually exclusive")
            if method != "trap2":
                raise ValueError("graph-level explanations support only the trap2 method")
            expl = explain_graph(
                g, model, cfg, l1=l1, fit_epochs=fit_epochs, fit_lr=fit_lr,
                weight_mode=weight_mode, n_select=n_select,
            )
        else:
            if node is None:
                raise ValueError("either --node or --graph-level is required")
            if method == "trap2":
                expl = explain_node(
                    g, node, model, cfg, l1=l1, fit_epochs=fit_epochs,
                    fit_lr=fit_lr, weight_mode=weight_mode, n_select=n_select,
                )
            else:
                dom = translate(g, node, model.depth)
                if method == "random":
                    expl = random_explainer(dom, cfg.seed, n_select)
                elif method == "greedy":
                    expl = greedy_explainer(dom, model, n_select=n_select)
                else:
                    expl = grad_explainer(dom, model, n_select=n_select)
        save_explanation(expl, output)
        if dot_path is not None:
            Path(dot_path).write_text(to_dot(expl, _domain_edges(g, expl)))
    except (ValueError, TypeError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {output}: method={expl.method} "
               f"selected={expl.selected_nodes}")


def _domain_edges(g, expl) -> list[tuple[int, int]]:
    ids = np.asarray(expl.node_ids)
    sub = g.A[np.ix_(ids, ids)]
    us, vs = np.nonzero(np.triu(sub))
    return [(int(ids[u]), int(ids[v])) for u, v in zip(us, vs)]


# -- eval ----------------------------------------------------------------


@main.command("eval")
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--methods", default="trap2,random,greedy,grad", show_default=True,
              help="Comma-separated subset of: " + ",".join(METHODS))
@click.option("--dataset-name", default=None, show_default="graph file stem")
@click.option("--sample", type=int, default=None, show_default="all motif nodes",
              help="Evaluate a seeded sample of motif nodes.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel per-node explanation; output independent of it.")
@click.option("--greedy-mode", type=click.Choice(GREEDY_MODES), default="mask-edges",
              show_default=True)
@click.option("--seed", type=int, default=None, show_default="0")
@click.option("--output", "-o", "output_prefix", type=click.Path(), required=True,
              help="Writes <prefix>.csv and <prefix>.json.")
@_add_options(_PERTURB_OPTIONS)
@_add_options(_FIT_OPTIONS)
def eval_cmd(graph_path, model_path, methods, dataset_name, sample, workers,
             greedy_mode, seed, output_prefix, l1, fit_epochs, fit_lr,
             weight_mode, **pflags):
    """Score explanation methods against motif ground truth; write CSV + JSON."""
    methods = tuple(m.strip() for m in methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise click.UsageError(f"unknown method {m!r}; choose from {METHODS}")
    try:
        g = load_graph(graph_path)
        model = load_model(model_path)
        cfg = _build_pcfg(seed=None, **pflags)
        report = evaluate(
            g, model, methods, cfg,
            dataset_name=dataset_name or Path(graph_path).stem,
            sample=sample, seed=seed if seed is not None else 0, workers=workers,
            l1=l1, fit_epochs=fit_epochs, fit_lr=fit_lr, weight_mode=weight_mode,
            greedy_mode=greedy_mode,
        )
        report.to_csv(f"{output_prefix}.csv")
        report.to_json(f"{output_prefix}.json")
    except (ValueError, TypeError, OSError) as exc:
        _fail(exc)
    for row in report.rows:
        click.echo(
            f"{row.dataset} {row.method:>7s} {row.metric:>14s}: "
            f"{row.mean:.4f} (std {row.std:.4f}, n={row.n_nodes})"
        )
    click.echo(f"wrote {output_prefix}.csv and {output_prefix}.json")


# -- export-dot -----------------------------------------------------------


@main.command("export-dot")
@click.option("--explanation", "expl_path", type=click.Path(exists=True), required=True)
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None,
              help="Adds the unselected domain edges as dashed context.")
@click.option("--output", "-o", type=click.Path(), required=True)
def export_dot(expl_path, graph_path, output):
    """Render a saved explanation as a GraphViz DOT file."""
    try:
        expl = load_explanation(expl_path)
        edges = None
        if graph_path is not None:
            edges = _domain_edges(load_graph(graph_path), expl)
        Path(output).write_text(to_dot(expl, edges))
    except (ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
