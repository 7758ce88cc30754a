"""Command line surface: one-shot explain runs, synthetic data generation,
the benchmark harness, and the HTTP service.

Exit codes: 0 success, 2 argument errors, 3 data/generation errors.
"""

from __future__ import annotations

import csv as csv_module
import json
import os
import sys
from pathlib import Path

import click

from .dataset import DataError, apply_derived_columns, load_csv
from .pipeline import ExplainOptions, ExplainRequest, explain_evolving
from .synthbench import (
    SyntheticSpec,
    bottom_up_segment,
    distance_percent,
    export_dataset,
    generate_synthetic,
    metric_rank_experiment,
    synthetic_cube,
)

CONFIG_ENV = "SEGEXPLAIN_CONFIG"
PORT_ENV = "SEGEXPLAIN_PORT"


def _load_defaults(config_path: str | None) -> dict:
    path = config_path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
def main() -> None:
    """Explain aggregated time series via evolving top contributors."""


@main.command("explain")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--time", "time_attr", required=True)
@click.option("--measure", default=None)
@click.option("--agg", type=click.Choice(["sum", "count", "avg"]), default="sum")
@click.option("--explain-by", required=True, help="comma-separated attribute list")
@click.option("--m", default=3, show_default=True)
@click.option("--max-order", default=3, show_default=True, help="max predicates per explanation")
@click.option("--k", default="auto", show_default=True, help="'auto' or a segment count")
@click.option("--k-max", default=20, show_default=True)
@click.option("--smooth", default=1, show_default=True, help="moving-average window")
@click.option("--filter-ratio", default=0.001, show_default=True)
@click.option("--no-guess-verify", is_flag=True, default=False)
@click.option("--no-sketch", is_flag=True, default=False)
@click.option("--metric", default="tse", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--plot", "plot_path", default=None, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def cli_explain(
    input_path,
    time_attr,
    measure,
    agg,
    explain_by,
    m,
    max_order,
    k,
    k_max,
    smooth,
    filter_ratio,
    no_guess_verify,
    no_sketch,
    metric,
    out_path,
    plot_path,
    config_path,
):
    """Explain one CSV: segmentation plus per-segment top explanations."""
    defaults = _load_defaults(config_path)
    if k != "auto":
        try:
            k = int(k)
        except ValueError:
            raise click.UsageError(f"--k must be 'auto' or an integer, got {k!r}")
    attrs = [a.strip() for a in explain_by.split(",") if a.strip()]
    request = ExplainRequest(
        time_attr=time_attr,
        agg=agg,
        measure=measure,
        explain_by=attrs,
        m=int(defaults.get("m", m)),
        beta_max=int(defaults.get("max_order", max_order)),
        k=k,
        k_max=k_max,
        smooth_window=int(defaults.get("smooth", smooth)),
        opts=ExplainOptions(
            filter_ratio=float(defaults.get("filter_ratio", filter_ratio)),
            guess_verify=not no_guess_verify,
            sketching=not no_sketch,
            variance_metric=defaults.get("metric", metric),
        ),
    )
    try:
        relation = load_csv(input_path, time_attr=time_attr)
        derived = defaults.get("derived_columns")
        if derived:
            relation = apply_derived_columns(relation, derived)
        result = explain_evolving(relation, request)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    Path(out_path).write_text(result.to_json(), encoding="utf-8")
    if plot_path:
        from .render import render_svg

        render_svg(result, plot_path)
    click.echo(
        f"k={result.chosen_k} cuts={[str(result.cube.timestamps[c]) for c in result.scheme.cuts]} "
        f"total_ms={result.timings_ms['total']}"
    )


def _parse_snr_list(text: str) -> list[float | None]:
    out: list[float | None] = []
    for token in text.split(","):
        token = token.strip()
        out.append(None if token in ("inf", "none") else float(token))
    return out


@main.command("synth")
@click.option("--snr", "snr_list", default="50", show_default=True, help="comma-separated dB levels")
@click.option("--seeds", default=1, show_default=True, help="datasets per SNR level")
@click.option("--n", default=100, show_default=True)
@click.option("--categories", default=3, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cli_synth(snr_list, seeds, n, categories, out_dir):
    """Generate ground-truthed synthetic datasets (CSV + truth sidecars)."""
    if seeds < 1:
        raise click.UsageError("--seeds must be >= 1")
    try:
        for snr in _parse_snr_list(snr_list):
            for seed in range(seeds):
                spec = SyntheticSpec(n=n, categories=categories, snr_db=snr, seed=seed)
                relation, truth = generate_synthetic(spec)
                stem = f"synth_snr{'inf' if snr is None else int(snr)}_seed{seed}"
                export_dataset(relation, truth, out_dir, stem)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    click.echo(f"wrote {seeds * len(_parse_snr_list(snr_list))} datasets to {out_dir}")


@main.command("bench")
@click.option("--snr", "snr_list", default="35,40,45,50", show_default=True)
@click.option("--seeds", default=5, show_default=True)
@click.option("--n", default=100, show_default=True)
@click.option("--methods", default="tse,bottomup", show_default=True)
@click.option("--metrics", default="all", show_default=True, help="'all' or comma-separated ids")
@click.option("--samples", default=1000, show_default=True, help="random schemes per dataset")
@click.option("--seed", default=0, show_default=True, help="master seed for scheme sampling")
@click.option("--out", "out_dir", required=True, type=click.Path())
def cli_bench(snr_list, seeds, n, methods, metrics, samples, seed, out_dir):
    """Accuracy benchmark against ground truth plus the metric-rank study."""
    from .metrics import VARIANCE_METRICS

    if samples < 1:
        raise click.UsageError("--samples must be >= 1")
    if seeds < 1:
        raise click.UsageError("--seeds must be >= 1")
    method_list = [mtd.strip() for mtd in methods.split(",") if mtd.strip()]
    unknown = set(method_list) - {"tse", "bottomup"}
    if unknown:
        raise click.UsageError(f"unknown methods: {sorted(unknown)}")
    metric_list = VARIANCE_METRICS if metrics == "all" else tuple(metrics.split(","))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        datasets, accuracy_rows = [], []
        for snr in _parse_snr_list(snr_list):
            for s in range(seeds):
                relation, truth = generate_synthetic(SyntheticSpec(n=n, snr_db=snr, seed=s))
                datasets.append((relation, truth))
                row = {"snr_db": snr, "seed": s, "k": truth.k}
                if "tse" in method_list:
                    result = explain_evolving(
                        relation,
                        ExplainRequest(
                            time_attr="T", agg="count", explain_by=["category"], k=truth.k
                        ),
                    )
                    row["tse_distance_percent"] = distance_percent(result.scheme, truth)
                if "bottomup" in method_list:
                    scheme = bottom_up_segment(synthetic_cube(relation).overall_values, truth.k)
                    row["bottomup_distance_percent"] = distance_percent(scheme, truth)
                accuracy_rows.append(row)

        rank_report = metric_rank_experiment(
            datasets, metrics=metric_list, sample_count=samples, seed=seed
        )
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)

    report = {
        "accuracy": accuracy_rows,
        "metric_rank": rank_report,
        "config": {
            "snr": snr_list,
            "seeds": seeds,
            "n": n,
            "methods": method_list,
            "samples": samples,
        },
    }
    (out / "bench_report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    with open(out / "accuracy.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv_module.DictWriter(
            fh,
            fieldnames=["snr_db", "seed", "k", "tse_distance_percent", "bottomup_distance_percent"],
        )
        writer.writeheader()
        writer.writerows(accuracy_rows)
    with open(out / "metric_rank.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv_module.writer(fh)
        writer.writerow(["snr_db", *metric_list])
        for snr, ranks in sorted(
            rank_report["mean_rank_by_snr"].items(), key=lambda kv: (kv[0] is None, kv[0])
        ):
            writer.writerow([snr, *[ranks[mtd] for mtd in metric_list]])
    click.echo(f"bench report written to {out}")


@main.command("serve")
@click.option("--port", default=None, type=int, help=f"defaults to ${PORT_ENV} or 8000")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", default=None, type=click.Path())
def cli_serve(port, host, static_dir):
    """Run the HTTP service for the explorer UI."""
    from .service import serve

    resolved = port if port is not None else int(os.environ.get(PORT_ENV, "8000"))
    click.echo(f"serving on http://{host}:{resolved}")
    serve(port=resolved, static_dir=static_dir, host=host)


if __name__ == "__main__":
    main()
