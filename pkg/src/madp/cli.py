"""Operator command line: ingest documents, run the pipeline, serve the review
API, evaluate corpora (with stage ablations), and emit sustainability reports.

Every command that touches documents appends to the event log under --workdir,
so `madp queue ls` after `madp run` shows exactly what the service would.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import click

from . import codec, evaluation
from .model import PipelineConfig, load_config
from .runtime import Runtime
from .sustainability import ScenarioParams, full_report, scenario_report

log = logging.getLogger("madp")


def _load_pipeline_config(config_path) -> PipelineConfig:
    path = config_path or os.environ.get("MADP_CONFIG")
    if path:
        return load_config(path)
    return PipelineConfig()


def _runtime_for(workdir, corpus, config_path, ablate=frozenset()) -> Runtime:
    config = _load_pipeline_config(config_path)
    if corpus is not None:
        c = evaluation.load_corpus(Path(corpus))
        if config_path is None and not os.environ.get("MADP_CONFIG"):
            config = c.config
        labeled = [(b, _truth_label(c, b)) for b in c.bundles if b.doc_id in c.truths]
        from .classify import train_signatures
        signatures = train_signatures(labeled, config) if labeled else []
        return Runtime(workdir=Path(workdir) if workdir else None, config=config,
                       backends=c.backends, signatures=signatures, ablate=ablate)
    return Runtime(workdir=Path(workdir) if workdir else None, config=config,
                   ablate=ablate)


def _truth_label(corpus, bundle):
    from .model import CategoryLabel, DocType
    supplier, doc_type = corpus.truths[bundle.doc_id].category
    return CategoryLabel(supplier, DocType(doc_type), 1.0)


def _emit(data, out):
    text = json.dumps(data, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="debug logging")
def main(verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--workdir", required=True, type=click.Path())
def ingest(source, workdir):
    """Append DocBundle JSON files under SOURCE to the event log."""
    Path(workdir).mkdir(parents=True, exist_ok=True)
    runtime = Runtime(workdir=Path(workdir))
    source = Path(source)
    paths = [source] if source.is_file() else sorted(source.glob("*.json"))
    count = 0
    for path in paths:
        bundle = codec.bundle_from_json(json.loads(path.read_text(encoding="utf-8")))
        if bundle.doc_id in runtime.bundles:
            log.info("skipping %s: already ingested", bundle.doc_id)
            continue
        runtime.ingest(bundle)
        count += 1
    click.echo(f"ingested {count} bundles ({len(runtime.bundles)} total)")


@main.command()
@click.option("--workdir", required=True, type=click.Path())
@click.option("--corpus", type=click.Path(exists=True),
              help="corpus root providing scripted answers and training labels")
@click.option("--config", "config_path", type=click.Path(exists=True))
def run(workdir, corpus, config_path):
    """Process every ingested bundle that has not been classified yet."""
    runtime = _runtime_for(workdir, corpus, config_path)
    processed = runtime.run_all()
    stats = runtime.stats()
    click.echo(f"processed {len(processed)} bundles; "
               f"{stats.total_docs} documents terminal, "
               f"{len([t for t in runtime.tasks.values() if t.status != 'resolved'])} awaiting review")


@main.command()
@click.option("--workdir", required=True, type=click.Path())
@click.option("--corpus", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(workdir, corpus, config_path, port, host):
    """Serve the review HTTP API over the event log in --workdir."""
    import uvicorn

    from .service import create_app
    runtime = _runtime_for(workdir, corpus, config_path)
    uvicorn.run(create_app(runtime), host=host, port=port)


@main.command("eval")
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--ablate", default="", help="comma-separated stages: classificator,splitter,parser")
@click.option("--out", type=click.Path())
@click.option("--markdown", is_flag=True, help="emit a markdown table instead of JSON")
def eval_cmd(corpus, ablate, out, markdown):
    """Run the pipeline over a labeled corpus and score it."""
    stages = frozenset(s.strip() for s in ablate.split(",") if s.strip())
    unknown = stages - {"classificator", "splitter", "parser"}
    if unknown:
        raise click.BadParameter(f"unknown stages: {sorted(unknown)}")
    c = evaluation.load_corpus(Path(corpus))
    report = evaluation.corpus_report(c, ablate=stages)
    if markdown:
        click.echo(report.to_markdown())
    else:
        _emit(report.to_json(), out)


@main.command()
@click.option("--scenario", type=click.Choice(["manual", "pure_ai", "ai_hitl"]))
@click.option("--params", "params_path", type=click.Path(exists=True),
              help="JSON file overriding scenario parameter defaults")
@click.option("--out", type=click.Path())
def sustain(scenario, params_path, out):
    """Environmental footprint report (all scenarios, or one with --scenario)."""
    base = None
    if params_path:
        raw = json.loads(Path(params_path).read_text(encoding="utf-8"))
        try:
            base = dataclasses.replace(ScenarioParams(), **raw)
        except TypeError as exc:
            raise click.BadParameter(str(exc))
    if scenario:
        from .sustainability import scenario_params
        _emit(scenario_report(scenario, scenario_params(scenario, base)).to_json(), out)
    else:
        _emit(full_report(base), out)


@main.group()
def queue():
    """Inspect the human-review queue."""


@queue.command("ls")
@click.option("--workdir", required=True, type=click.Path(exists=True))
@click.option("--status", type=click.Choice(["pending", "in_progress", "resolved"]))
def queue_ls(workdir, status):
    runtime = Runtime(workdir=Path(workdir))
    tasks = runtime.queue(status)
    if not tasks:
        click.echo("queue empty")
        return
    for t in tasks:
        reasons = "; ".join(t["reasons"])
        click.echo(f"{t['doc_id']:<24} {t['status']:<12} {'/'.join(t['category']):<28} {reasons}")


if __name__ == "__main__":
    sys.exit(main())
