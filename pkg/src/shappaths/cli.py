"""Command-line pipeline: simulate/load -> train -> explain -> cluster ->
embed -> plots -> report, with seeded, resumable, hash-checked runs.

Every subcommand accepts --config (JSON) and mirrors its keys as flags;
flags win. Artifacts land in one run directory (--out, else
$SHAPPATHS_OUT/<config-hash>, else ./runs/<config-hash>). Exit codes:
0 success, 2 config or data error, 3 missing upstream artifact,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (Dataset, ScalingMeta, SimulationSpec, SplitSpec, load_csv,
                   load_idx_images, min_max_scale, simulate, split_indices, write_csv)
from .errors import (ConfigError, DataError, InvalidSpecError, MissingArtifactError,
                     ModelIOError, NumericalError, ShappathsError)
from .explain import (load_tensor, mean_abs, kernel_shap, sample_background,
                      save_tensor, tree_shap)
from .manifest import ENV_OUT, RunManifest, config_hash, resolve_config
from .models import evaluate, load_model, save_model, train_boosted, train_mlp, train_tree
from .subgroup import ClusterLabeling, HdbscanParams, cluster_purity, hdbscan, pca_fit, pca_transform
from .viz import (PlotSpec, build_paths, classical_waterfall, cluster_heatmap,
                  paths_to_csv, pca_scatter, project_paths, render_paths, stacked_bar)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_NUMERICAL = 4


# ---------------------------------------------------------------------------
# config plumbing

def _load_file_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return loaded


def _dataset_overrides(args) -> dict:
    ds: dict = {}
    for flag, key in [("n", "n_samples"), ("p", "n_features"),
                      ("half_width", "half_width"), ("csv", "path"),
                      ("target", "target"), ("idx_images", "images"),
                      ("idx_labels", "labels"),
                      ("train_fraction", "train_fraction")]:
        value = getattr(args, flag, None)
        if value is not None:
            ds[key] = value
    if getattr(args, "scale", False):
        ds["scale"] = True
    if getattr(args, "stratified", False):
        ds["stratified"] = True
    if getattr(args, "csv", None):
        ds["source"] = "csv"
    if getattr(args, "idx_images", None):
        ds["source"] = "idx"
    return ds


def _overrides(args) -> dict:
    over: dict = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    ds = _dataset_overrides(args)
    if ds:
        over["dataset"] = ds
    explain = {}
    for flag, key in [("on", "on"), ("background", "background_size"),
                      ("coalitions", "n_coalitions")]:
        value = getattr(args, flag, None)
        if value is not None:
            explain[key] = value
    if explain:
        over["explain"] = explain
    cluster = {}
    for flag, key in [("source", "source"), ("min_cluster_size", "min_cluster_size"),
                      ("min_samples", "min_samples")]:
        value = getattr(args, flag, None)
        if value is not None:
            cluster[key] = value
    if cluster and getattr(args, "command") in ("cluster",):
        over["cluster"] = cluster
    plots = {}
    for flag, key in [("top_n", "top_n"), ("width", "width"), ("height", "height"),
                      ("sample", "waterfall_sample"), ("class_index", "waterfall_class")]:
        value = getattr(args, flag, None)
        if value is not None:
            plots[key] = value
    if plots:
        over["plots"] = plots
    return over


def _open_run(args) -> RunManifest:
    config = resolve_config(_load_file_config(getattr(args, "config", None)),
                            _overrides(args))
    out = getattr(args, "out", None)
    if out:
        run_dir = Path(out)
    else:
        import os

        root = Path(os.environ.get(ENV_OUT, "runs"))
        run_dir = root / config_hash(config)[:12]
    return RunManifest(run_dir, config, __version__)


# ---------------------------------------------------------------------------
# dataset artifact IO

def _save_dataset(manifest: RunManifest, ds: Dataset, scaling: ScalingMeta | None,
                  train_idx: np.ndarray, test_idx: np.ndarray,
                  provenance: dict) -> None:
    csv_path = manifest.set_artifact("dataset_csv", "dataset.csv")
    write_csv(ds, csv_path, target_column_name="__target__")
    meta = {
        "n": ds.n, "p": ds.p, "k": ds.k,
        "feature_names": list(ds.feature_names),
        "class_names": list(ds.class_names),
        "scaling": scaling.to_dict() if scaling else None,
        "split": {"train": train_idx.tolist(), "test": test_idx.tolist()},
        "provenance": provenance,
    }
    json_path = manifest.set_artifact("dataset_manifest", "dataset.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, separators=(",", ":"))


def _load_dataset(manifest: RunManifest) -> tuple[Dataset, dict]:
    csv_path = manifest.require("dataset_csv", hint="run `shappaths simulate` or `load` first")
    json_path = manifest.require("dataset_manifest", hint="run `shappaths simulate` or `load` first")
    ds = load_csv(csv_path, "__target__")
    with open(json_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    # class order in the CSV is first-appearance; restore the saved order
    if list(ds.class_names) != meta["class_names"]:
        remap = {name: i for i, name in enumerate(meta["class_names"])}
        labels = np.array([remap[ds.class_names[v]] for v in ds.labels])
        ds = Dataset(ds.features, labels, ds.feature_names, tuple(meta["class_names"]))
    return ds, meta


def _ingest(manifest: RunManifest) -> None:
    config = manifest.config
    ds_cfg = config["dataset"]
    source = ds_cfg["source"]
    if source == "simulate":
        spec = SimulationSpec(n_samples=ds_cfg["n_samples"],
                              n_features=ds_cfg["n_features"],
                              domain_half_width=ds_cfg["half_width"],
                              seed=config["seed"]).resolved()
        ds = simulate(spec)
        provenance = {"source": "simulate", "seed": config["seed"],
                      "noise_coefficients": spec.noise_coefficients.tolist()}
    elif source == "csv":
        ds = load_csv(ds_cfg["path"], ds_cfg["target"])
        provenance = {"source": "csv", "path": str(ds_cfg["path"]),
                      "target": ds_cfg["target"]}
    else:
        ds = load_idx_images(ds_cfg["images"], ds_cfg["labels"])
        provenance = {"source": "idx", "images": str(ds_cfg["images"]),
                      "labels": str(ds_cfg["labels"])}
    scaling = None
    if ds_cfg["scale"]:
        ds, scaling = min_max_scale(ds)
    train_idx, test_idx = split_indices(
        ds.labels, SplitSpec(train_fraction=ds_cfg["train_fraction"],
                             stratified=ds_cfg["stratified"], seed=config["seed"]))
    _save_dataset(manifest, ds, scaling, train_idx, test_idx, provenance)
    print(f"dataset: n={ds.n} p={ds.p} k={ds.k} "
          f"(train {train_idx.size} / test {test_idx.size}) -> {manifest.run_dir}")


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    manifest = _open_run(args)
    if manifest.config["dataset"]["source"] != "simulate":
        raise ConfigError("simulate requires dataset.source == 'simulate'")
    with manifest.stage("simulate"):
        _ingest(manifest)
    return EXIT_OK


def cmd_load(args) -> int:
    manifest = _open_run(args)
    if manifest.config["dataset"]["source"] not in ("csv", "idx"):
        raise ConfigError("load requires a csv or idx dataset source")
    with manifest.stage("load"):
        _ingest(manifest)
    return EXIT_OK


def _train_one(kind: str, params: dict, train: Dataset, seed: int):
    if kind == "tree":
        return train_tree(train, **params)
    if kind == "boosted":
        return train_boosted(train, **params)
    if kind == "mlp":
        p = dict(params)
        hidden = tuple(p.pop("hidden", ()))
        return train_mlp(train, (train.p, *hidden, train.k), seed=seed, **p)
    raise ConfigError(f"unknown model kind {kind!r}")


def _selected_kinds(args, manifest: RunManifest) -> list[str]:
    configured = list(manifest.config["models"].keys())
    requested = getattr(args, "model", None)
    if requested in (None, "all"):
        return configured
    if requested not in configured:
        raise ConfigError(f"model {requested!r} is not configured (have {configured})")
    return [requested]


def cmd_train(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    train = ds.take(meta["split"]["train"])
    test = ds.take(meta["split"]["test"])
    metrics_path = manifest.set_artifact("metrics", "metrics.json")
    metrics = {}
    if metrics_path.exists():
        with open(metrics_path, encoding="utf-8") as fh:
            metrics = json.load(fh)
    for kind in _selected_kinds(args, manifest):
        with manifest.stage(f"train.{kind}"):
            model = _train_one(kind, manifest.config["models"][kind], train,
                               manifest.config["seed"])
            save_model(model, manifest.set_artifact(f"model_{kind}", f"model_{kind}.json"))
            report = evaluate(model, test)
            metrics[kind] = {"accuracy": report.accuracy,
                             "classes": report.as_rows()}
            print(f"train {kind}: test accuracy {report.accuracy:.3f}")
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, sort_keys=True, separators=(",", ":"))
    manifest.save()
    return EXIT_OK


def _explained_rows(meta: dict, on: str) -> np.ndarray:
    if on == "train":
        return np.array(meta["split"]["train"], dtype=int)
    if on == "test":
        return np.array(meta["split"]["test"], dtype=int)
    return np.arange(meta["n"])


def cmd_explain(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    cfg = manifest.config["explain"]
    rows = _explained_rows(meta, cfg["on"])
    X = ds.features[rows]
    train_rows = np.array(meta["split"]["train"], dtype=int)
    for kind in _selected_kinds(args, manifest):
        method = cfg["methods"].get(kind, "tree" if kind in ("tree", "boosted") else "kernel")
        model_path = manifest.require(f"model_{kind}",
                                      hint=f"run `shappaths train --model {kind}` first")
        model = load_model(model_path)
        with manifest.stage(f"explain.{kind}"):
            if method == "tree":
                tensor = tree_shap(model, X, feature_names=ds.feature_names,
                                   class_names=ds.class_names, sample_ids=rows)
            elif method == "kernel":
                background = sample_background(ds.features[train_rows],
                                               size=cfg["background_size"],
                                               seed=manifest.config["seed"])
                tensor = kernel_shap(model, X, background,
                                     n_coalitions=cfg["n_coalitions"],
                                     seed=manifest.config["seed"],
                                     feature_names=ds.feature_names,
                                     class_names=ds.class_names, sample_ids=rows)
            else:
                raise ConfigError(f"unknown explain method {method!r} for {kind}")
            save_tensor(tensor,
                        manifest.set_artifact(f"shap_{kind}", f"shap_{kind}.json"),
                        manifest.set_artifact(f"shap_{kind}_csv", f"shap_{kind}.csv"))
            gap = np.abs(tensor.values.sum(axis=1)
                         - (model.predict_margin(X) - tensor.base)).max()
            print(f"explain {kind} [{method}]: n={tensor.n} "
                  f"max additivity gap {gap:.2e}")
    return EXIT_OK


def _load_tensor_for(manifest: RunManifest, kind: str):
    json_path = manifest.require(f"shap_{kind}",
                                 hint=f"run `shappaths explain --model {kind}` first")
    csv_path = manifest.require(f"shap_{kind}_csv")
    return load_tensor(json_path, csv_path)


def _cluster_source(args, manifest: RunManifest) -> str:
    return getattr(args, "source", None) or manifest.config["cluster"]["source"]


def cmd_cluster(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    source = _cluster_source(args, manifest)
    tensor = _load_tensor_for(manifest, source)
    cfg = manifest.config["cluster"]
    with manifest.stage("cluster"):
        from .explain import flatten

        labeling = hdbscan(flatten(tensor),
                           HdbscanParams(min_cluster_size=cfg["min_cluster_size"],
                                         min_samples=cfg["min_samples"]))
        path = manifest.set_artifact("clusters", "clusters.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id,label,stability\n")
            for sid, lab in zip(tensor.sample_ids, labeling.labels):
                stab = "" if lab == -1 else repr(float(labeling.stability[lab]))
                fh.write(f"{int(sid)},{int(lab)},{stab}\n")
        truth = ds.labels[tensor.sample_ids]
        report = cluster_purity(labeling, truth)
        purity_path = manifest.set_artifact("purity", "purity.json")
        with open(purity_path, "w", encoding="utf-8") as fh:
            json.dump({"source": source,
                       "n_clusters": labeling.n_clusters,
                       "noise": report.noise_count,
                       "purity": report.purity.tolist(),
                       "majority_class": [ds.class_names[c]
                                          for c in report.majority_class],
                       "contingency": report.contingency.tolist(),
                       "class_names": list(ds.class_names)},
                      fh, sort_keys=True, separators=(",", ":"))
        print(f"cluster [{source}]: {labeling.n_clusters} clusters, "
              f"{labeling.n_noise} noise points")
    return EXIT_OK


def _load_labeling(manifest: RunManifest, n: int) -> ClusterLabeling:
    path = manifest.require("clusters", hint="run `shappaths cluster` first")
    labels, stabilities = [], {}
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            _, lab, stab = line.rstrip("\n").split(",")
            labels.append(int(lab))
            if stab:
                stabilities[int(lab)] = float(stab)
    n_clusters = max(stabilities) + 1 if stabilities else 0
    stability = np.array([stabilities.get(c, 0.0) for c in range(n_clusters)])
    return ClusterLabeling(labels=np.array(labels), n_clusters=n_clusters,
                           stability=stability)


def cmd_embed(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    source = _cluster_source(args, manifest)
    tensor = _load_tensor_for(manifest, source)
    with manifest.stage("embed"):
        from .explain import flatten

        flat = flatten(tensor)
        model = pca_fit(flat, r=min(2, min(flat.shape[0] - 1, flat.shape[1])))
        scores = pca_transform(model, flat)
        path = manifest.set_artifact("embedding", "embed.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id," + ",".join(f"pc{i + 1}" for i in range(scores.shape[1])) + "\n")
            for sid, row in zip(tensor.sample_ids, scores):
                fh.write(f"{int(sid)}," + ",".join(repr(float(v)) for v in row) + "\n")
        if manifest.has("clusters"):
            labeling = _load_labeling(manifest, tensor.n)
            colors, names = labeling, None
            title = f"SHAP embedding [{source}] by cluster"
        else:
            colors, names = ds.labels[tensor.sample_ids], list(ds.class_names)
            title = f"SHAP embedding [{source}] by class"
        svg = pca_scatter(scores, colors, _plot_spec(manifest), label_names=names,
                          title=title)
        _write_text(manifest.set_artifact("scatter_svg", "scatter.svg"), svg)
        print(f"embed [{source}]: wrote {path.name} and scatter.svg")
    return EXIT_OK


def _plot_spec(manifest: RunManifest) -> PlotSpec:
    plots = manifest.config["plots"]
    return PlotSpec(width=plots["width"], height=plots["height"], top_n=plots["top_n"])


def _write_text(path: Path, content: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


def cmd_waterfall(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    source = getattr(args, "source", None) or manifest.config["cluster"]["source"]
    tensor = _load_tensor_for(manifest, source)
    spec = _plot_spec(manifest)
    if args.clustered:
        labeling = _load_labeling(manifest, tensor.n)
        with manifest.stage("waterfall.clustered"):
            paths = build_paths(tensor, labeling, top_n=spec.top_n)
            projected, _ = project_paths(paths, r=2)
            footnote = (f"noise: {labeling.n_noise} samples excluded"
                        if labeling.n_noise else "")
            svg = render_paths(projected, spec, feature_names=tensor.feature_names,
                               footnote=footnote)
            name = f"waterfall_clustered_{source}"
            _write_text(manifest.set_artifact(f"{name}_svg", f"{name}.svg"), svg)
            _write_text(manifest.set_artifact(f"{name}_csv", f"{name}.csv"),
                        paths_to_csv(projected, feature_names=tensor.feature_names))
            print(f"waterfall [{source}]: {len(projected)} clustered paths")
    else:
        sample = manifest.config["plots"]["waterfall_sample"]
        class_index = manifest.config["plots"]["waterfall_class"]
        with manifest.stage("waterfall.classical"):
            svg = classical_waterfall(tensor, sample, class_index, spec)
            name = f"waterfall_{source}_s{sample}_c{class_index}"
            _write_text(manifest.set_artifact(f"{name}_svg", f"{name}.svg"), svg)
            print(f"waterfall [{source}]: sample {sample}, class {class_index}")
    return EXIT_OK


def cmd_bar(args) -> int:
    manifest = _open_run(args)
    source = getattr(args, "source", None) or manifest.config["cluster"]["source"]
    tensor = _load_tensor_for(manifest, source)
    with manifest.stage(f"bar.{source}"):
        svg = stacked_bar(mean_abs(tensor), _plot_spec(manifest),
                          feature_names=tensor.feature_names,
                          class_names=tensor.class_names)
        _write_text(manifest.set_artifact(f"bar_{source}_svg", f"bar_{source}.svg"), svg)
        print(f"bar [{source}]: wrote bar_{source}.svg")
    return EXIT_OK


def cmd_heatmap(args) -> int:
    manifest = _open_run(args)
    ds, meta = _load_dataset(manifest)
    source = _cluster_source(args, manifest)
    tensor = _load_tensor_for(manifest, source)
    labeling = _load_labeling(manifest, tensor.n)
    spec = _plot_spec(manifest)
    with manifest.stage("heatmap"):
        totals = mean_abs(tensor).sum(axis=1)
        order = np.lexsort((np.arange(tensor.p), -totals))[: spec.top_n]
        explained = ds.take(tensor.sample_ids)
        svg = cluster_heatmap(explained, labeling, feature_subset=[int(j) for j in order],
                              spec=spec)
        _write_text(manifest.set_artifact("heatmap_svg", "heatmap.svg"), svg)
        print(f"heatmap: {labeling.n_clusters} clusters x {order.size} features")
    return EXIT_OK


def cmd_report(args) -> int:
    manifest = _open_run(args)
    required = ["dataset_manifest", "metrics"]
    missing = [name for name in required if not manifest.has(name)]
    tensors = [k for k in manifest.config["models"] if manifest.has(f"shap_{k}")]
    if not tensors:
        missing.append("shap_<model>")
    if missing:
        raise MissingArtifactError(
            manifest.run_dir / "manifest.json",
            hint="incomplete run, missing stages: " + ", ".join(missing))
    with manifest.stage("report"):
        html = _render_report(manifest)
        path = manifest.set_artifact("report", "report.html")
        _write_text(path, html)
        print(f"report: {path}")
    return EXIT_OK


def _render_report(manifest: RunManifest) -> str:
    from html import escape

    with open(manifest.require("metrics"), encoding="utf-8") as fh:
        metrics = json.load(fh)
    parts = [
        "<!DOCTYPE html>",
        "<html><head><meta charset='utf-8'><title>shappaths report</title>",
        "<style>body{font-family:Helvetica,Arial,sans-serif;margin:2em;}"
        "table{border-collapse:collapse;margin:1em 0;}"
        "td,th{border:1px solid #ccc;padding:4px 10px;text-align:right;}"
        "th{background:#f5f5f5;}td:first-child,th:first-child{text-align:left;}"
        "h2{margin-top:1.6em;}</style></head><body>",
        f"<h1>shappaths run {manifest.hash[:12]}</h1>",
        "<h2>Model performance</h2>",
    ]
    for kind in manifest.config["models"]:
        if kind not in metrics:
            continue
        entry = metrics[kind]
        parts.append(f"<h3>{kind}</h3><table><tr><th>class</th><th>precision</th>"
                     "<th>recall</th><th>support</th></tr>")
        for row in entry["classes"]:
            parts.append(f"<tr><td>{escape(str(row['class']))}</td>"
                         f"<td>{row['precision']:.2f}</td>"
                         f"<td>{row['recall']:.2f}</td><td>{row['support']}</td></tr>")
        support = sum(r["support"] for r in entry["classes"])
        parts.append(f"<tr><td>accuracy</td><td></td>"
                     f"<td>{entry['accuracy']:.2f}</td><td>{support}</td></tr></table>")
    if manifest.has("purity"):
        with open(manifest.require("purity"), encoding="utf-8") as fh:
            purity = json.load(fh)
        parts.append(f"<h2>Subgroups ({purity['source']} SHAP)</h2>")
        parts.append(f"<p>{purity['n_clusters']} clusters, {purity['noise']} noise "
                     "samples.</p><table><tr><th>cluster</th><th>size</th>"
                     "<th>majority class</th><th>purity</th></tr>")
        for c, row in enumerate(purity["contingency"]):
            parts.append(f"<tr><td>{c}</td><td>{sum(row)}</td>"
                         f"<td>{escape(str(purity['majority_class'][c]))}</td>"
                         f"<td>{purity['purity'][c]:.2f}</td></tr>")
        parts.append("</table>")
    parts.append("<h2>Plots</h2>")
    for name, filename in sorted(manifest.state["artifacts"].items()):
        if filename.endswith(".svg"):
            with open(manifest.run_dir / filename, encoding="utf-8") as fh:
                parts.append(f"<div>{fh.read()}</div>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shappaths",
        description="SHAP tensors, subgroup discovery, and waterfall paths")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="run directory")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="generate the synthetic dataset")
    common(p)
    p.add_argument("--n", type=int, help="number of samples")
    p.add_argument("--p", type=int, help="number of features")
    p.add_argument("--half-width", dest="half_width", type=float)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--scale", action="store_true")

    p = sub.add_parser("load", help="load a CSV or IDX dataset")
    common(p)
    p.add_argument("--csv", help="CSV file with a header row")
    p.add_argument("--target", help="target column name")
    p.add_argument("--idx-images", dest="idx_images")
    p.add_argument("--idx-labels", dest="idx_labels")
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--scale", action="store_true")

    p = sub.add_parser("train", help="train configured models")
    common(p)
    p.add_argument("--model", choices=["tree", "boosted", "mlp", "all"], default="all")

    p = sub.add_parser("explain", help="compute SHAP tensors")
    common(p)
    p.add_argument("--model", choices=["tree", "boosted", "mlp", "all"], default="all")
    p.add_argument("--on", choices=["test", "train", "all"])
    p.add_argument("--background", type=int, help="background rows for kernel SHAP")
    p.add_argument("--coalitions", type=int, help="kernel SHAP coalition budget")

    p = sub.add_parser("cluster", help="HDBSCAN over a flattened SHAP tensor")
    common(p)
    p.add_argument("--source", choices=["tree", "boosted", "mlp"])
    p.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    p.add_argument("--min-samples", dest="min_samples", type=int)

    p = sub.add_parser("embed", help="PCA embedding of a flattened SHAP tensor")
    common(p)
    p.add_argument("--source", choices=["tree", "boosted", "mlp"])

    p = sub.add_parser("waterfall", help="classical or clustered waterfall plot")
    common(p)
    p.add_argument("--source", choices=["tree", "boosted", "mlp"])
    p.add_argument("--clustered", action="store_true")
    p.add_argument("--sample", type=int, help="sample position (classical)")
    p.add_argument("--class-index", dest="class_index", type=int)
    p.add_argument("--top-n", dest="top_n", type=int)

    p = sub.add_parser("bar", help="stacked mean-|SHAP| bars")
    common(p)
    p.add_argument("--source", choices=["tree", "boosted", "mlp"])
    p.add_argument("--top-n", dest="top_n", type=int)

    p = sub.add_parser("heatmap", help="cluster-mean heatmap of raw features")
    common(p)
    p.add_argument("--source", choices=["tree", "boosted", "mlp"])
    p.add_argument("--top-n", dest="top_n", type=int)

    p = sub.add_parser("report", help="single-page HTML summary")
    common(p)
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "load": cmd_load,
    "train": cmd_train,
    "explain": cmd_explain,
    "cluster": cmd_cluster,
    "embed": cmd_embed,
    "waterfall": cmd_waterfall,
    "bar": cmd_bar,
    "heatmap": cmd_heatmap,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, InvalidSpecError, DataError, ModelIOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShappathsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
