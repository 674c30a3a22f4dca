"""Command-line interface.

Studies are described by a TOML manifest (dataset paths, embedder files,
search-space overrides, study settings) plus flag overrides. Exit codes:
0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .datamodel import DEFAULT_CONFIG, PipelineConfig
from .embed import EmbedderRegistry, default_registry, load_external_embeddings
from .errors import AutoERError
from .ingest import DatasetBundle, load_collection, load_ground_truth, validate_bundle
from .pipeline import PipelineExecutor
from .predict import (
    ForestModel,
    ForestParams,
    fit_forest,
    generate_instances,
    lodo_evaluate,
    recommend as recommend_config,
    tune_forest,
)
from .profiling import profile_dataset
from .tune import SearchSpace, TrialLog, f1_ratio, grid_search, runtime_ratio, tune

REPORT_CHECKPOINTS = tuple(range(5, 101, 5))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("AUTOER_THREADS", "1")))
    except ValueError:
        return 1


def _fail_usage(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _load_manifest(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        _fail_usage(f"manifest not found: {path}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        _fail_usage(f"bad manifest {path}: {exc}")


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _load_one_bundle(spec: dict, base: Path) -> DatasetBundle:
    for key in ("e1", "e2"):
        if key not in spec:
            _fail_usage(f"dataset entry missing {key!r}")
    e1_path = _resolve(base, spec["e1"])
    e2_path = _resolve(base, spec["e2"])
    for p in (e1_path, e2_path):
        if not p.is_file():
            _fail_usage(f"dataset file not found: {p}")
    e1 = load_collection(e1_path, id_column=spec.get("id_column", "id"))
    e2 = load_collection(e2_path, id_column=spec.get("id_column", "id"))
    name = spec.get("name", e1_path.stem)
    bundle = DatasetBundle(e1=e1, e2=e2, gt=None, name=name)
    if "gt" in spec:
        gt_path = _resolve(base, spec["gt"])
        if not gt_path.is_file():
            _fail_usage(f"ground-truth file not found: {gt_path}")
        gt = load_ground_truth(gt_path, bundle=bundle)
        bundle = DatasetBundle(e1=e1, e2=e2, gt=gt, name=name)
    report = validate_bundle(bundle)
    if not report.ok:
        _fail_usage(f"dataset {name!r} failed validation: {report.violations[0]}")
    return bundle


def _load_bundles(manifest: dict, base: Path) -> list[DatasetBundle]:
    if "datasets" in manifest:
        specs = manifest["datasets"]
    elif "dataset" in manifest:
        specs = [manifest["dataset"]]
    else:
        _fail_usage("manifest needs a [dataset] table or [[datasets]] list")
    return [_load_one_bundle(spec, base) for spec in specs]


def _build_registry(manifest: dict, base: Path, bundles: list[DatasetBundle]) -> EmbedderRegistry:
    registry = default_registry()
    all_ids = [eid for b in bundles for eid in (*b.e1.ids, *b.e2.ids)]
    for name, path in manifest.get("embedders", {}).items():
        p = _resolve(base, path)
        if not p.is_file():
            _fail_usage(f"embedding file not found: {p}")
        load_external_embeddings(p, name, all_ids, registry=registry)
    return registry


def _build_space(manifest: dict, registry: EmbedderRegistry) -> SearchSpace:
    spec = manifest.get("space", {})
    embedders = tuple(spec.get("embedders", registry.names()))
    kwargs = {}
    for key in ("k_min", "k_max"):
        if key in spec:
            kwargs[key] = int(spec[key])
    if "clusterings" in spec:
        kwargs["clusterings"] = tuple(spec["clusterings"])
    if "threshold_grid" in spec:
        kwargs["threshold_grid"] = tuple(float(t) for t in spec["threshold_grid"])
    for key in ("threshold_low", "threshold_high"):
        if key in spec:
            kwargs[key] = float(spec[key])
    return SearchSpace(embedders=embedders, **kwargs)


def _outdir(manifest: dict, base: Path, override: Optional[str]) -> Path:
    # flag paths are cwd-relative, manifest paths are manifest-relative
    if override:
        out = Path(override)
    else:
        out = _resolve(base, manifest.get("study", {}).get("outdir", "autoer_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_config(text: str) -> PipelineConfig:
    parts = text.split(",")
    if len(parts) != 4:
        _fail_usage(f"config must be 'embedder,k,clustering,threshold', got {text!r}")
    try:
        return PipelineConfig(parts[0], int(parts[1]), parts[2], float(parts[3]))
    except (ValueError, TypeError) as exc:
        _fail_usage(str(exc))


@click.group()
def main() -> None:
    """Auto-configuring end-to-end entity resolution."""


@main.command("profile")
@click.option("--manifest", "manifest_path", required=True, type=str)
@click.option("--outdir", default=None, type=str)
@click.option("--alt-f10", is_flag=True, help="Include the alternate sparsity formula.")
def cmd_profile(manifest_path: str, outdir: Optional[str], alt_f10: bool) -> None:
    """Emit the 12 dataset features as JSON and a CSV row per dataset."""
    manifest = _load_manifest(manifest_path)
    base = Path(manifest_path).parent
    bundles = _load_bundles(manifest, base)
    out = _outdir(manifest, base, outdir)
    rows = []
    for bundle in bundles:
        features = profile_dataset(bundle.e1, bundle.e2)
        d = features.to_dict(include_alt_f10=alt_f10)
        d["dataset"] = bundle.name
        rows.append(d)
    (out / "features.json").write_text(json.dumps(rows, indent=2, sort_keys=True), encoding="utf-8")
    fieldnames = ["dataset"] + [k for k in rows[0] if k != "dataset"]
    with open(out / "features.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    click.echo(json.dumps(rows, sort_keys=True))


@main.command("run")
@click.option("--manifest", "manifest_path", required=True, type=str)
@click.option("--config", "config_text", default=None, type=str,
              help="embedder,k,clustering,threshold")
@click.option("--default-config", is_flag=True, help="Use (st5, 10, UMC, 0.5).")
@click.option("--no-gt", is_flag=True, help="Skip metrics even if a ground truth is present.")
@click.option("--swap", is_flag=True, help="E1 queries an index over E2.")
@click.option("--outdir", default=None, type=str)
def cmd_run(manifest_path, config_text, default_config, no_gt, swap, outdir) -> None:
    """Execute one pipeline configuration and emit the result as JSON."""
    if default_config and config_text:
        _fail_usage("--config and --default-config are mutually exclusive")
    if default_config:
        cfg = DEFAULT_CONFIG
    elif config_text:
        cfg = _parse_config(config_text)
    else:
        _fail_usage("one of --config or --default-config is required")
    manifest = _load_manifest(manifest_path)
    base = Path(manifest_path).parent
    bundles = _load_bundles(manifest, base)
    registry = _build_registry(manifest, base, bundles)
    out = _outdir(manifest, base, outdir)
    for bundle in bundles:
        if no_gt:
            bundle = DatasetBundle(e1=bundle.e1, e2=bundle.e2, gt=None, name=bundle.name)
        result = PipelineExecutor(bundle, registry, swap=swap).run(cfg)
        payload = result.to_json()
        (out / f"run_{bundle.name}.json").write_text(payload + "\n", encoding="utf-8")
        click.echo(payload)


@main.command("grid")
@click.option("--manifest", "manifest_path", required=True, type=str)
@click.option("--outdir", default=None, type=str)
def cmd_grid(manifest_path, outdir) -> None:
    """Exhaustive grid search; emits the trial log and the best config."""
    manifest = _load_manifest(manifest_path)
    base = Path(manifest_path).parent
    bundles = _load_bundles(manifest, base)
    registry = _build_registry(manifest, base, bundles)
    space = _build_space(manifest, registry)
    out = _outdir(manifest, base, outdir)
    for bundle in bundles:
        log = grid_search(bundle, space, registry)
        log.to_jsonl(out / f"grid_{bundle.name}.jsonl")
        best = log.best()
        payload = json.dumps(
            {"dataset": bundle.name, "config": best.config.to_dict(), "f1": best.f1},
            sort_keys=True,
        )
        (out / f"grid_best_{bundle.name}.json").write_text(payload + "\n", encoding="utf-8")
        click.echo(payload)


@main.command("tune")
@click.option("--manifest", "manifest_path", required=True, type=str)
@click.option("--sampler", default=None, type=str, help="random|qmc|tpe|gp|grid")
@click.option("--budget", default=None, type=int)
@click.option("--seeds", "n_seeds", default=None, type=int, help="Number of seeds (0..n-1).")
@click.option("--outdir", default=None, type=str)
def cmd_tune(manifest_path, sampler, budget, n_seeds, outdir) -> None:
    """Sampler-driven search; emits one trial log per seed plus the best config."""
    manifest = _load_manifest(manifest_path)
    study = manifest.get("study", {})
    sampler = sampler or study.get("sampler", "tpe")
    budget = budget if budget is not None else int(study.get("budget", 100))
    n_seeds = n_seeds if n_seeds is not None else int(study.get("seeds", 1))
    base = Path(manifest_path).parent
    bundles = _load_bundles(manifest, base)
    registry = _build_registry(manifest, base, bundles)
    space = _build_space(manifest, registry)
    out = _outdir(manifest, base, outdir)
    for bundle in bundles:
        if sampler == "grid":
            log = grid_search(bundle, space, registry)
            log.to_jsonl(out / f"tune_{bundle.name}_grid.jsonl")
            best = log.best()
        else:
            if sampler not in ("random", "qmc", "tpe", "gp"):
                _fail_usage(f"unknown sampler {sampler!r}")
            if budget < 1:
                _fail_usage(f"budget must be >= 1, got {budget}")
            executor = PipelineExecutor(bundle, registry)
            best = None
            for seed in range(n_seeds):
                log, seed_best = tune(bundle, space, sampler, budget, seed, registry, executor=executor)
                log.to_jsonl(out / f"tune_{bundle.name}_{sampler}_seed{seed}.jsonl")
                if best is None or seed_best.f1 > best.f1:
                    best = seed_best
        payload = json.dumps(
            {"dataset": bundle.name, "sampler": sampler,
             "config": best.config.to_dict(), "f1": best.f1},
            sort_keys=True,
        )
        (out / f"tune_best_{bundle.name}.json").write_text(payload + "\n", encoding="utf-8")
        click.echo(payload)


@main.command("recommend")
@click.option("--manifest", "manifest_path", required=True, type=str)
@click.option("--mode", default="grid", type=click.Choice(["grid", "sampling", "all"]))
@click.option("--model", "model_path", default=None, type=str,
              help="Reuse a fitted model file instead of retraining.")
@click.option("--lodo", is_flag=True, help="Leave-one-dataset-out over all datasets.")
@click.option("--outdir", default=None, type=str)
def cmd_recommend(manifest_path, mode, model_path, lodo, outdir) -> None:
    """Recommend a config per dataset; reports actual F1 when a truth exists."""
    manifest = _load_manifest(manifest_path)
    base = Path(manifest_path).parent
    bundles = _load_bundles(manifest, base)
    registry = _build_registry(manifest, base, bundles)
    space = _build_space(manifest, registry)
    out = _outdir(manifest, base, outdir)
    n_jobs = _threads()
    study = manifest.get("study", {})
    seed = int(study.get("seed", 0))
    if lodo:
        reports = lodo_evaluate(bundles, mode, registry, space, seed=seed, n_jobs=n_jobs)
        payload = json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
        (out / "lodo_reports.json").write_text(payload + "\n", encoding="utf-8")
        click.echo(payload)
        return
    if model_path:
        p = Path(model_path)
        if not p.is_file():
            _fail_usage(f"model file not found: {model_path}")
        model = ForestModel.from_json(p)
    else:
        labelled = [b for b in bundles if b.gt is not None and len(b.gt) > 0]
        if not labelled:
            _fail_usage("training a model needs at least one dataset with a ground truth")
        instances = generate_instances(labelled, mode, registry, space)
        if len(instances.datasets()) >= 2:
            params = tune_forest(instances, seed=seed, n_jobs=n_jobs)
        else:
            params = ForestParams()  # single dataset: no stratified split possible
        model = fit_forest(instances, params, seed=seed, n_jobs=n_jobs)
        model.to_json(out / "model.json")
    candidates = list(space.grid_points())
    results = []
    for bundle in bundles:
        features = profile_dataset(bundle.e1, bundle.e2)
        cfg = recommend_config(model, features, candidates)
        entry = {"dataset": bundle.name, "config": cfg.to_dict()}
        if bundle.gt is not None and len(bundle.gt) > 0:
            result = PipelineExecutor(bundle, registry).run(cfg)
            entry["f1"] = result.metrics.f1
        results.append(entry)
    payload = json.dumps(results, indent=2, sort_keys=True)
    (out / "recommendations.json").write_text(payload + "\n", encoding="utf-8")
    click.echo(payload)


@main.command("report")
@click.argument("log_dir", type=str)
@click.option("--outdir", default=None, type=str)
def cmd_report(log_dir, outdir) -> None:
    """Turn a directory of trial logs into F1-ratio and runtime-ratio curves.

    If a grid log is present its best F1 and total runtime are the ratio
    denominators; otherwise raw cumulative-best F1 is reported. Checkpoints
    run from 5 to 100 trials in steps of 5, one curve per sampler.
    """
    directory = Path(log_dir)
    if not directory.is_dir():
        _fail_usage(f"not a directory: {log_dir}")
    logs = [TrialLog.from_jsonl(p) for p in sorted(directory.glob("*.jsonl"))]
    if not logs:
        _fail_usage(f"no .jsonl trial logs in {log_dir}")
    out = Path(outdir) if outdir else directory
    out.mkdir(parents=True, exist_ok=True)
    grid_logs = [log for log in logs if log.sampler == "grid"]
    sampler_logs = [log for log in logs if log.sampler != "grid"]
    if not sampler_logs:
        _fail_usage("no sampler logs to report on")
    grid_best = grid_logs[0].best().f1 if grid_logs else None
    grid_runtime = grid_logs[0].total_runtime_s if grid_logs else None

    by_sampler: dict[str, list[TrialLog]] = {}
    for log in sampler_logs:
        by_sampler.setdefault(log.sampler, []).append(log)

    value_name = "f1_ratio" if grid_best else "cumulative_best_f1"
    with open(out / "f1_curves.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sampler", "trials", value_name])
        for sampler in sorted(by_sampler):
            group = by_sampler[sampler]
            for n in REPORT_CHECKPOINTS:
                values = []
                for log in group:
                    if len(log.trials) < n:
                        continue
                    curve = f1_ratio(log, grid_best) if grid_best else log.cumulative_best_f1()
                    values.append(curve[n - 1])
                if values:
                    writer.writerow([sampler, n, repr(sum(values) / len(values))])
    if grid_runtime:
        with open(out / "runtime_ratios.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sampler", "seed", "runtime_ratio"])
            for sampler in sorted(by_sampler):
                for log in by_sampler[sampler]:
                    writer.writerow(
                        [sampler, log.seed, repr(runtime_ratio(log.total_runtime_s, grid_runtime))]
                    )
    click.echo(f"wrote reports to {out}")


def entrypoint() -> None:
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except AutoERError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
