"""End-to-end runs behind the CLI subcommands: ingest, probe, dims, analogy,
report.  Every output file is written atomically and CSV bodies are
byte-identical across reruns of the same configuration."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from layerprobe import corpus, geometry, metrics, tensorstore
from layerprobe.analogy import (
    WordEncoding,
    ranks_csv_lines,
    read_queries_csv,
    run_analogy_suite,
    wholeword_win_count,
)
from layerprobe.config import RunConfig, expand_conllu_paths
from layerprobe.probes import HighCardinalityError
from layerprobe.probes.tuning import fit_family, predict_family, tune


def _ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)


def _config_to_jsonable(config):
    if dataclasses.is_dataclass(config):
        return dataclasses.asdict(config)
    return config


def _config_hash(config: RunConfig) -> str:
    return hashlib.sha256(
        json.dumps(config.raw, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()[:16]


def _write_run_meta(config: RunConfig, command: str) -> None:
    """Timestamps live in their own file so report bodies stay byte-identical."""
    import datetime

    _ensure_dir(config.output)
    path = os.path.join(config.output, "run_meta.json")
    meta = {}
    if os.path.exists(path):
        with open(path, encoding="utf-8") as f:
            meta = json.load(f)
    meta[command] = {
        "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config_hash": _config_hash(config),
    }
    metrics.atomic_write_text(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- ingest


def ingest_run(config: RunConfig, log=print) -> dict:
    """Parse CoNLL-U inputs, build the dataset, write manifest, split, and
    control mappings, and report headline statistics."""
    paths = expand_conllu_paths(config.conllu)
    if not paths:
        raise FileNotFoundError("no CoNLL-U inputs configured")
    sentences = []
    for path in paths:
        if not os.path.exists(path):
            raise FileNotFoundError(f"CoNLL-U input not found: {path}")
        with open(path, encoding="utf-8") as f:
            try:
                sentences.extend(corpus.parse_conllu(f))
            except corpus.ConlluParseError as err:
                raise corpus.ConlluParseError(f"{path}: {err}") from err
    data = corpus.build_dataset(sentences)
    if not data:
        raise corpus.ConlluParseError("inputs yielded no labelable data points")

    split = corpus.stratified_split(data, seed=config.seeds["split"])
    controls = {
        task: corpus.gen_control_labels(data, task, seed=config.seeds["control"])
        for task in ("lemma", "inflection")
    }

    _ensure_dir(config.output)
    manifest_lines = []
    for dp in data:
        manifest_lines.append(
            json.dumps(
                {
                    "id": dp.uid,
                    "text": dp.sentence.text,
                    "target_index": dp.target_index,
                    "lemma": dp.lemma,
                    "inflection": dp.inflection.value,
                    "pos": dp.pos.value,
                },
                ensure_ascii=False,
            )
        )
    metrics.atomic_write_text(config.manifest, "\n".join(manifest_lines) + "\n")
    metrics.atomic_write_text(config.split, split.to_json() + "\n")
    for task, mapping in controls.items():
        metrics.atomic_write_text(config.controls[task], mapping.to_json() + "\n")

    stats = corpus.dataset_statistics(data)
    log(f"data points: {stats['data_points']}")
    log(f"unique sentences: {stats['unique_sentences']}")
    log(f"unique lemmas: {stats['unique_lemmas']}")
    log(f"unique word forms: {stats['unique_word_forms']}")
    log("category distribution:")
    for pos, count in stats["pos_counts"].items():
        log(f"  {pos:<12} {count:>8}  {100 * stats['pos_shares'][pos]:5.1f}%")
    log("inflection distribution:")
    for label, count in stats["inflection_counts"].items():
        log(f"  {label:<12} {count:>8}  {100 * stats['inflection_shares'][label]:5.1f}%")
    log(
        "sentence length (tokens): mean {:.1f}, median {:.0f}, min {}, max {}".format(
            stats["sentence_tokens_mean"],
            stats["sentence_tokens_median"],
            stats["sentence_tokens_min"],
            stats["sentence_tokens_max"],
        )
    )
    log(
        "target words per sentence: mean {:.1f}, median {:.0f}, min {}, max {}".format(
            stats["targets_per_sentence_mean"],
            stats["targets_per_sentence_median"],
            stats["targets_per_sentence_min"],
            stats["targets_per_sentence_max"],
        )
    )
    metrics.write_summary_json(
        os.path.join(config.output, "ingest_summary.json"),
        {"statistics": stats, "seeds": config.seeds, "inputs": paths},
    )
    _write_run_meta(config, "ingest")
    return stats


# ---------------------------------------------------------------- probe


def _split_positions(rows, split_assignment):
    position_of = {row["id"]: i for i, row in enumerate(rows)}
    return {
        name: np.array(
            [position_of[uid] for uid in split_assignment.ids_for(name)],
            dtype=np.int64,
        )
        for name in corpus.SPLIT_NAMES
    }


def _task_labels(rows, task):
    if task == "lemma":
        return np.array([row["lemma"] for row in rows])
    return np.array([row["inflection"] for row in rows])


def _control_labels(rows, mapping):
    return np.array([mapping.label_for(corpus.manifest_form(row)) for row in rows])


def _probe_cell(
    family,
    task,
    grid,
    X_parts,
    labels,
    control,
    ids_parts,
    seed,
):
    """Tune on validation, evaluate on test, and run the matched control
    probe with the same tuned hyperparameters."""
    (X_train, X_val, X_test) = X_parts
    (ids_train, ids_val, ids_test) = ids_parts
    y_train, y_val, y_test = (labels[ids] for ids in ids_parts)
    result = tune(
        family,
        (X_train, y_train, ids_train),
        (X_val, y_val, ids_val),
        grid,
        seed=seed,
    )
    predicted = predict_family(family, result.probe, X_test)
    acc = metrics.accuracy(predicted, y_test)
    classes = sorted(set(np.concatenate([y_train, y_test]).tolist()))
    f1 = metrics.macro_f1(predicted, y_test, classes)

    ctrl_train, ctrl_test = control[ids_train], control[ids_test]
    ctrl_probe = fit_family(family, X_train, ctrl_train, result.config, seed=seed)
    ctrl_predicted = predict_family(family, ctrl_probe, X_test)
    ctrl_acc = metrics.accuracy(ctrl_predicted, ctrl_test)

    return {
        "accuracy": acc,
        "macro_f1": f1,
        "control_accuracy": ctrl_acc,
        "selectivity": metrics.selectivity(acc, ctrl_acc),
        "validation_accuracy": result.validation_accuracy,
        "chosen_config": _config_to_jsonable(result.config),
        "n_test": int(len(ids_test)),
    }


def probe_run(config: RunConfig, workers: int | None = None, resume: bool = True, log=print) -> dict:
    """Layer x task x family probing sweep over every configured model."""
    rows = corpus.load_manifest(config.manifest)
    with open(config.manifest, "rb") as f:
        manifest_bytes = f.read()
    with open(config.split, encoding="utf-8") as f:
        split_assignment = corpus.SplitAssignment.from_json(f.read())
    controls = {}
    for task in config.tasks:
        with open(config.controls[task], encoding="utf-8") as f:
            controls[task] = corpus.ControlMapping.from_json(f.read())

    positions = _split_positions(rows, split_assignment)
    labels = {task: _task_labels(rows, task) for task in config.tasks}
    control_labels = {task: _control_labels(rows, controls[task]) for task in config.tasks}
    seed = config.seeds["probe"]
    run_hash = _config_hash(config)

    cells_dir = os.path.join(config.output, "cells")
    reports_dir = os.path.join(config.output, "reports")
    _ensure_dir(cells_dir)
    _ensure_dir(reports_dir)

    skipped = []
    all_cells = {}
    for model in config.models:
        # Alignment is checked before any training happens.
        header = tensorstore.validate_store(model.store, manifest_bytes)
        model_cells_dir = os.path.join(cells_dir, model.model_id)
        _ensure_dir(model_cells_dir)

        for layer in range(header.layer_count):
            pending = []
            for task in config.tasks:
                for family in config.families:
                    cell_path = os.path.join(
                        model_cells_dir, f"{task}__{family}__layer{layer:03d}.json"
                    )
                    if resume and os.path.exists(cell_path):
                        with open(cell_path, encoding="utf-8") as f:
                            cell = json.load(f)
                        if cell.get("config_hash") == run_hash:
                            all_cells[(model.model_id, task, family, layer)] = cell
                            continue
                    pending.append((task, family, cell_path))
            if not pending:
                continue

            X = tensorstore.read_layer(model.store, layer).astype(np.float64)
            X_parts = tuple(X[positions[name]] for name in corpus.SPLIT_NAMES)
            ids_parts = tuple(positions[name] for name in corpus.SPLIT_NAMES)

            def run_one(task, family):
                try:
                    return _probe_cell(
                        family,
                        task,
                        config.grid_for(family),
                        X_parts,
                        labels[task],
                        control_labels[task],
                        ids_parts,
                        seed,
                    )
                except HighCardinalityError as err:
                    return {"skipped": str(err)}

            max_workers = workers or config.workers or (os.cpu_count() or 1)
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = {
                    (task, family): pool.submit(run_one, task, family)
                    for task, family, _ in pending
                }
            for task, family, cell_path in pending:
                cell = futures[(task, family)].result()
                cell.update(
                    {
                        "model": model.model_id,
                        "task": task,
                        "family": family,
                        "layer": layer,
                        "seed": seed,
                        "config_hash": run_hash,
                    }
                )
                metrics.atomic_write_text(
                    cell_path, json.dumps(cell, indent=2, sort_keys=True) + "\n"
                )
                all_cells[(model.model_id, task, family, layer)] = cell
                if "skipped" in cell:
                    note = f"{model.model_id}/{task}/{family}/layer{layer}: {cell['skipped']}"
                    skipped.append(note)
                    log(f"skipped {note}")
                else:
                    log(
                        f"{model.model_id} layer {layer:>2} {task:<10} {family:<6} "
                        f"acc {cell['accuracy']:.4f} f1 {cell['macro_f1']:.4f} "
                        f"sel {cell['selectivity']:+.4f}"
                    )

        _write_model_reports(config, model.model_id, header.layer_count, all_cells, reports_dir)

    summary = {
        "config": config.raw,
        "config_hash": run_hash,
        "seeds": config.seeds,
        "skipped": sorted(skipped),
        "models": [m.model_id for m in config.models],
    }
    metrics.write_summary_json(os.path.join(config.output, "probe_summary.json"), summary)
    _write_run_meta(config, "probe")
    return summary


def _write_model_reports(config, model_id, layer_count, all_cells, reports_dir):
    for task in config.tasks:
        for family in config.families:
            rows = []
            for layer in range(layer_count):
                cell = all_cells.get((model_id, task, family, layer))
                if cell is None or "skipped" in cell:
                    continue
                gap = None
                linear_cell = all_cells.get((model_id, task, "linear", layer))
                if family != "linear" and linear_cell and "skipped" not in linear_cell:
                    gap = metrics.separability_gap(
                        cell["accuracy"], linear_cell["accuracy"]
                    )
                rows.append(
                    {
                        "layer": layer,
                        "accuracy": cell["accuracy"],
                        "macro_f1": cell["macro_f1"],
                        "selectivity": cell["selectivity"],
                        "gap": gap,
                    }
                )
            if rows:
                metrics.write_report_csv(
                    os.path.join(reports_dir, f"{model_id}__{task}__{family}.csv"),
                    rows,
                )


# ---------------------------------------------------------------- dims


def dims_run(config: RunConfig, log=print) -> dict:
    """Per-layer intrinsic dimensionality profiles for every model."""
    with open(config.manifest, "rb") as f:
        manifest_bytes = f.read()
    with open(config.split, encoding="utf-8") as f:
        split_assignment = corpus.SplitAssignment.from_json(f.read())
    rows = corpus.load_manifest(config.manifest)
    positions = _split_positions(rows, split_assignment)[config.pca_split]

    dims_dir = os.path.join(config.output, "dims")
    _ensure_dir(dims_dir)
    out = {}
    for model in config.models:
        tensorstore.validate_store(model.store, manifest_bytes)
        profile = geometry.dim_profile(
            model.store,
            thresholds=config.thresholds,
            row_indices=positions,
            on_degenerate="skip",
        )
        for layer in profile.degenerate_layers:
            log(f"{model.model_id}: layer {layer} degenerate (zero variance), skipped")
        metrics.atomic_write_text(
            os.path.join(dims_dir, f"{model.model_id}__profile.csv"),
            "\n".join(geometry.profile_csv_rows(profile)) + "\n",
        )
        metrics.atomic_write_text(
            os.path.join(dims_dir, f"{model.model_id}__summary.csv"),
            "\n".join(geometry.summary_csv_rows(profile)) + "\n",
        )
        anchors = profile.summary_layers()
        for name, layer in anchors.items():
            if layer in profile.ids:
                log(
                    f"{model.model_id} {name} layer {layer}: "
                    + " ".join(f"ID{t}={profile.ids[layer][t]}" for t in (50, 70, 90) if t in profile.ids[layer])
                )
        out[model.model_id] = profile
    _write_run_meta(config, "dims")
    return out


# ---------------------------------------------------------------- analogy


def encodings_from_table(table) -> dict[str, WordEncoding]:
    if not table.encodings:
        raise tensorstore.StoreFormatError("store embedding table has no word encodings")
    encodings = {}
    for word, entry in table.encodings.items():
        encodings[word] = WordEncoding(
            word=word,
            subtoken_ids=tuple(entry["subtoken"]),
            wholeword_ids=tuple(entry["wholeword"]),
            wholeword_is_fallback=bool(entry.get("fallback", False)),
        )
    return encodings


def analogy_run(config: RunConfig, log=print) -> dict:
    """Rank analogy queries under both composition modes."""
    queries = read_queries_csv(config.analogy_queries)
    candidate_words = None
    if config.analogy_words:
        with open(config.analogy_words, encoding="utf-8") as f:
            candidate_words = [line.strip() for line in f if line.strip()]

    analogy_dir = os.path.join(config.output, "analogy")
    _ensure_dir(analogy_dir)
    out = {}
    for model in config.models:
        table = tensorstore.read_embedding(model.store)
        encodings = encodings_from_table(table)
        if candidate_words is None:
            pool = sorted(
                {w for q in queries for w in (q.a, q.b, q.c, q.expected)}
                & set(encodings)
            )
        else:
            pool = candidate_words
        results = run_analogy_suite(queries, table, encodings, candidate_words=pool)
        metrics.atomic_write_text(
            os.path.join(analogy_dir, f"{model.model_id}__ranks.csv"),
            "\n".join(ranks_csv_lines(results)) + "\n",
        )
        wins = wholeword_win_count(results)
        scored = [r for r in results if r.error is None]
        for r in results:
            if r.error:
                log(f"{model.model_id}: coverage error: {r.error}")
        log(
            f"{model.model_id}: wholeword strictly better on {wins}/{len(scored)} scored queries"
        )
        out[model.model_id] = {"results": results, "wholeword_wins": wins}
    _write_run_meta(config, "analogy")
    return out


# ---------------------------------------------------------------- report


def report_run(config: RunConfig, log=print) -> None:
    """Aggregate per-(model, task, family) CSVs into plot-data bundles."""
    reports_dir = os.path.join(config.output, "reports")
    if not os.path.isdir(reports_dir):
        raise FileNotFoundError(f"no reports directory at {reports_dir}; run probe first")
    accuracy_rows, selectivity_rows, gap_rows = [], [], []
    for name in sorted(os.listdir(reports_dir)):
        if not name.endswith(".csv"):
            continue
        stem = name[: -len(".csv")]
        try:
            model_id, task, family = stem.split("__")
        except ValueError:
            continue
        for row in metrics.read_csv_rows(os.path.join(reports_dir, name)):
            key = f"{model_id},{task},{family},{row['layer']}"
            accuracy_rows.append(f"{key},{row['accuracy']}")
            if row["selectivity"]:
                selectivity_rows.append(f"{key},{row['selectivity']}")
            if row["gap"]:
                gap_rows.append(f"{key},{row['gap']}")
    plots_dir = os.path.join(config.output, "plots")
    _ensure_dir(plots_dir)
    bundles = {
        "accuracy_by_layer.csv": ("model,task,family,layer,accuracy", accuracy_rows),
        "selectivity_by_layer.csv": ("model,task,family,layer,selectivity", selectivity_rows),
        "gap_by_layer.csv": ("model,task,family,layer,gap", gap_rows),
    }
    for filename, (headerline, rows) in bundles.items():
        metrics.atomic_write_text(
            os.path.join(plots_dir, filename), "\n".join([headerline] + rows) + "\n"
        )
        log(f"wrote {filename} ({len(rows)} rows)")
