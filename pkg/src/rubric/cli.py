"""Command-line entry points: train, grade, serve, and supporting tools.

Exit codes: 0 success; 2 input parse or validation error (with
line-numbered diagnostics where the input is a file); 3 infeasible grid
stratification; 4 expert failure while grading; 1 other errors.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import clock
from .classifiers import (
    GridSearchSpec,
    LabeledExample,
    default_grid_spec,
    evaluate,
    grid_search,
    train_cell,
)
from .config import ServiceConfig, load_registry, load_service_config, write_registry_file
from .corpus_io import read_corpus, read_labels
from .errors import (
    ExpertFailure,
    InfeasibleStratification,
    NotApproved,
    RubricError,
    UnresolvableModel,
)
from .experts import ExpertDescriptor, run_pipeline
from .feedback import default_template_set, load_template_set, save_template_set, validate_template_set
from .features import vectorize
from .preprocess import RawEssay, default_config, normalize
from .reporting import ReportFormat, assemble_report, render_report, round_half_up_2dp
from .store.artifacts import ModelStore
from .store.jobs import JobStore
from .synth import default_generator_spec, generate

EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_EXPERT = 4


def _die(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _load_corpus_and_labels(corpus_path: str, labels_path: str):
    try:
        essays = read_corpus(corpus_path)
        labels = read_labels(labels_path)
    except ValueError as exc:
        _die(EXIT_PARSE, str(exc))
    missing = [e.essay_id for e in essays if e.essay_id not in labels]
    if missing:
        _die(EXIT_PARSE, f"{labels_path}: no labels for essay ids: {', '.join(missing[:5])}"
                         + (" ..." if len(missing) > 5 else ""))
    return essays, labels


def _normalize_corpus(essays):
    config = default_config()
    normalized = []
    for essay in essays:
        try:
            normalized.append(normalize(essay, config))
        except RubricError as exc:
            _die(EXIT_PARSE, f"essay {essay.essay_id}: {exc}")
    return normalized


@click.group()
@click.version_option(package_name="rubric")
def main():
    """Rubric-based essay scoring and feedback."""


@main.command()
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--count", type=int, default=1000, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Probability that a recorded label is re-drawn.")
@click.option("--out-corpus", type=click.Path(dir_okay=False), required=True)
@click.option("--out-labels", type=click.Path(dir_okay=False), required=True)
def synth(seed, count, noise, out_corpus, out_labels):
    """Generate a deterministic synthetic corpus with ground-truth labels."""
    from .corpus_io import write_corpus, write_labels

    try:
        spec = default_generator_spec(seed=seed, essay_count=count, label_noise=noise)
    except ValueError as exc:
        _die(EXIT_PARSE, str(exc))
    essays, labels = generate(spec)
    write_corpus(essays, out_corpus)
    write_labels(labels, out_labels)
    click.echo(f"wrote {len(essays)} essays to {out_corpus} and labels to {out_labels}")


@main.command()
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dimension", default="all", show_default=True,
              help="One dimension id, or 'all'.")
@click.option("--grid", "grid_path", type=click.Path(exists=True, dir_okay=False),
              help="Grid spec file; defaults to the stock grid.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--models-dir", type=click.Path(file_okay=False), required=True)
@click.option("--registry-out", type=click.Path(dir_okay=False),
              help="Also write a registry file referencing the new models.")
@click.option("--templates-dir", type=click.Path(file_okay=False),
              help="Directory for feedback template files (default: next to the registry).")
def train(corpus, labels, dimension, grid_path, seed, models_dir, registry_out, templates_dir):
    """Grid-search, retrain the winner and save one model per dimension."""
    essays, label_map = _load_corpus_and_labels(corpus, labels)

    all_dims = sorted({d for scores in label_map.values() for d in scores})
    if dimension == "all":
        dims = all_dims
    elif dimension in all_dims:
        dims = [dimension]
    else:
        _die(EXIT_PARSE, f"unknown dimension {dimension!r}; labels cover: {', '.join(all_dims)}")

    incomplete = [
        e.essay_id for e in essays
        if any(d not in label_map[e.essay_id] for d in dims)
    ]
    if incomplete:
        _die(EXIT_PARSE, f"{labels}: essays missing scores for requested dimensions: "
                         + ", ".join(incomplete[:5]))

    if grid_path:
        try:
            with open(grid_path, encoding="utf-8") as fh:
                spec = GridSearchSpec.from_dict(json.load(fh))
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            _die(EXIT_PARSE, f"{grid_path}: bad grid spec: {exc}")
    else:
        spec = default_grid_spec(seed=seed)

    normalized = _normalize_corpus(essays)
    store = ModelStore(models_dir)
    descriptors = []
    templates_base = Path(templates_dir) if templates_dir else (
        Path(registry_out).parent / "templates" if registry_out else None
    )

    for dim in dims:
        y = [label_map[e.essay_id][dim] for e in essays]
        click.echo(f"== {dim}: grid search over {len(spec.feature_configs)} feature configs ==")
        try:
            result = grid_search(normalized, y, spec)
        except InfeasibleStratification as exc:
            _die(EXIT_INFEASIBLE, f"{dim}: {exc}")
        click.echo(result.table_str())
        click.echo(f"{dim}: winner is cell {result.best_index}: {result.best.describe()}")

        model, vocab = train_cell(normalized, y, result.best, seed=seed)
        X = [vectorize(e, vocab) for e in normalized]
        training_report = evaluate(model, [LabeledExample(fv, lab) for fv, lab in zip(X, y)])
        version = store.save(model, vocab, dim, eval_report=training_report)
        click.echo(f"{dim}: saved {dim}/{version} (training accuracy "
                   f"{training_report.accuracy:.3f}, macro-F1 {training_report.macro_f1:.3f})")

        template_ref = f"templates/{dim}.json"
        if templates_base is not None:
            templates_base.mkdir(parents=True, exist_ok=True)
            template_path = templates_base / f"{dim}.json"
            if not template_path.exists():
                save_template_set(default_template_set(dim), template_path)
            if registry_out:
                rel = template_path.resolve()
                base = Path(registry_out).resolve().parent
                try:
                    template_ref = str(rel.relative_to(base))
                except ValueError:
                    template_ref = str(rel)
        descriptors.append(
            ExpertDescriptor(
                dimension_id=dim,
                display_name=f"Dimension {dim}",
                weight=Fraction(1),
                model_ref=f"{dim}/{version}",
                template_set_ref=template_ref,
            )
        )

    if registry_out:
        write_registry_file(descriptors, registry_out)
        click.echo(f"wrote registry for {len(descriptors)} dimensions to {registry_out}")


@main.command()
@click.option("--essay", "essay_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="File holding one essay record (same shape as a corpus line).")
@click.option("--models", "models_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--registry", "registry_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="-", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
def grade(essay_path, models_dir, registry_file, out_path, fmt):
    """Score one essay through the full pipeline and print the assessment."""
    try:
        record = json.loads(Path(essay_path).read_text(encoding="utf-8"))
        essay = RawEssay.from_dict(record)
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        _die(EXIT_PARSE, f"{essay_path}: bad essay record: {exc}")

    try:
        registry = load_registry(registry_file, models_dir)
    except UnresolvableModel as exc:
        _die(EXIT_EXPERT, f"{exc.dimension_id}: {exc}" if exc.dimension_id else str(exc))
    except RubricError as exc:
        _die(EXIT_PARSE, f"{registry_file}: {exc}")

    try:
        master = run_pipeline(essay, registry, default_config())
    except ExpertFailure as exc:
        _die(EXIT_EXPERT, f"{exc.dimension_id}: {exc.cause}")
    except RubricError as exc:
        _die(EXIT_PARSE, str(exc))

    if fmt == "json":
        rendered = json.dumps(master.to_dict(), sort_keys=True, separators=(",", ":"),
                              ensure_ascii=False)
    else:
        lines = [f"essay {master.essay_id} ({essay.customer_name})"]
        lines.append(f"{'dimension':<12} {'score':>5}  {'confidence':>10}  feedback")
        for dim, res in master.results.items():
            lines.append(f"{dim:<12} {res.score:>5}  {res.confidence:>10.3f}  {res.feedback_text}")
        lines.append(f"final score: {round_half_up_2dp(master.final_score)} "
                     f"(exact {master.final_score})")
        rendered = "\n".join(lines)

    if out_path == "-":
        click.echo(rendered)
    else:
        Path(out_path).write_text(rendered + "\n", encoding="utf-8")
        click.echo(f"wrote assessment for {master.essay_id} to {out_path}")


@main.command(name="evaluate")
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--models", "models_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--registry", "registry_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dimension", default="all", show_default=True)
def evaluate_cmd(corpus, labels, models_dir, registry_file, dimension):
    """Evaluate stored models against a labeled corpus."""
    essays, label_map = _load_corpus_and_labels(corpus, labels)
    try:
        registry = load_registry(registry_file, models_dir)
    except RubricError as exc:
        _die(EXIT_PARSE, f"{registry_file}: {exc}")
    dims = list(registry.dimension_ids) if dimension == "all" else [dimension]
    unknown = [d for d in dims if d not in registry.dimension_ids]
    if unknown:
        _die(EXIT_PARSE, f"unknown dimension {unknown[0]!r}")

    normalized = _normalize_corpus(essays)
    click.echo(f"{'dimension':<12} {'accuracy':>9} {'macro_f1':>9}")
    for dim in dims:
        expert = registry[dim]
        testset = []
        for essay, raw in zip(normalized, essays):
            if dim not in label_map[raw.essay_id]:
                _die(EXIT_PARSE, f"{labels}: essay {raw.essay_id} has no score for {dim}")
            fv = vectorize(essay, expert.vocabulary)
            testset.append(LabeledExample(fv, label_map[raw.essay_id][dim]))
        report = evaluate(expert.model, testset)
        click.echo(f"{dim:<12} {report.accuracy:>9.3f} {report.macro_f1:>9.3f}")


@main.command(name="lint-templates")
@click.argument("paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=True))
def lint_templates(paths):
    """Validate feedback template files; nonzero exit if any diagnostic."""
    files: list[Path] = []
    for p in paths:
        path = Path(p)
        files.extend(sorted(path.glob("*.json")) if path.is_dir() else [path])
    if not files:
        _die(EXIT_PARSE, "no template files found")
    failed = False
    for f in files:
        try:
            template_set = load_template_set(f)
        except (json.JSONDecodeError, KeyError) as exc:
            click.echo(f"{f}: unreadable: {exc}")
            failed = True
            continue
        diagnostics = validate_template_set(template_set)
        for d in diagnostics:
            click.echo(f"{f}: {d}")
        failed = failed or bool(diagnostics)
    if failed:
        sys.exit(1)
    click.echo(f"ok: {len(files)} template file(s) valid")


@main.command()
@click.option("--store", "store_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--job-id", required=True)
@click.option("--models", "models_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--registry", "registry_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["structured", "printable"]),
              default="structured", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="-", show_default=True)
def report(store_dir, job_id, models_dir, registry_file, fmt, out_path):
    """Render the customer report for an approved job."""
    try:
        registry = load_registry(registry_file, models_dir)
        job = JobStore(store_dir).get_job(job_id)
        doc = render_report(assemble_report(job, registry), ReportFormat(fmt.upper()))
    except NotApproved as exc:
        _die(1, str(exc))
    except RubricError as exc:
        _die(EXIT_PARSE, str(exc))
    if out_path == "-":
        sys.stdout.buffer.write(doc + b"\n")
    else:
        Path(out_path).write_bytes(doc)
        click.echo(f"wrote {fmt} report for job {job_id} to {out_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path, host):
    """Run the HTTP grading service."""
    import uvicorn

    from .service import create_app

    try:
        config = load_service_config(config_path)
        app = create_app(config)
    except (ValueError, RubricError) as exc:
        _die(EXIT_PARSE, f"{config_path}: {exc}")
    uvicorn.run(app, host=host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
