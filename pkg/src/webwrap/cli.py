"""Command-line interface; every command prints the exact JSON the
matching HTTP route would return.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .api import Engine, EngineConfig, canonical_json, create_app
from .errors import WrapError
from .sorter import DEFAULT_TOP_N


def _source_from_arg(source: str) -> dict:
    if source.startswith(("http://", "https://")):
        return {"url": source}
    path = Path(source)
    return {"html": path.read_text(encoding="utf-8")}


def _parse_pairs(pairs: tuple[str, ...], what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise click.UsageError(f"{what} must look like name=value, got {pair!r}")
        out[name] = value
    return out


@click.group()
@click.option("--store", envvar="STORE_DIR", default="./wrapstore",
              show_default=True, help="Service store directory.")
@click.option("--fixtures", envvar="FIXTURES_DIR", default=None,
              help="Fixture corpus directory (offline mode).")
@click.option("--lexicon", envvar="PAGINATION_LEXICON", default=None,
              help="Extra pagination words, one per line.")
@click.pass_context
def main(ctx, store, fixtures, lexicon):
    """Turn web-page data into callable services."""
    ctx.obj = EngineConfig(
        store_dir=Path(store),
        fixtures_dir=Path(fixtures) if fixtures else None,
        lexicon_file=Path(lexicon) if lexicon else None,
    )


def _run(ctx, fn):
    try:
        result = fn(Engine(ctx.obj))
    except WrapError as exc:
        click.echo(canonical_json(exc.to_json()), err=True)
        sys.exit(1)
    click.echo(canonical_json(result))


@main.command()
@click.argument("source")
@click.pass_context
def analyze(ctx, source):
    """Detect query forms in SOURCE (url or HTML file)."""
    _run(ctx, lambda e: e.analyze(_source_from_arg(source)))


@main.command()
@click.argument("source")
@click.option("--form", "form_choice", type=int, default=None,
              help="Form index to fill and submit first.")
@click.option("--button", "button_choice", type=int, default=None,
              help="Query-button index within the chosen form.")
@click.option("--values", multiple=True, metavar="FIELD=VALUE",
              help="Field values for the submission (repeatable).")
@click.option("--top-n", type=int, default=DEFAULT_TOP_N, show_default=True)
@click.pass_context
def segment(ctx, source, form_choice, button_choice, values, top_n):
    """Segment SOURCE into ranked blocks (submitting a form first if asked)."""
    field_values = _parse_pairs(values, "--values")
    _run(ctx, lambda e: e.segment(_source_from_arg(source), form_choice=form_choice,
                                  button_choice=button_choice,
                                  field_values=field_values, top_n=top_n))


@main.command()
@click.argument("definition", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def create(ctx, definition):
    """Create a service from a definition draft (JSON file)."""
    import json

    draft = json.loads(Path(definition).read_text(encoding="utf-8"))
    _run(ctx, lambda e: e.create(draft))


@main.command()
@click.argument("service_id", type=int)
@click.argument("params", nargs=-1)
@click.pass_context
def invoke(ctx, service_id, params):
    """Invoke a service with name=value request parameters."""
    query = _parse_pairs(params, "params")
    _run(ctx, lambda e: e.invoke(service_id, query))


@main.command()
@click.option("--port", envvar="PORT", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
def serve(ctx, port, host):
    """Run the REST API server."""
    import uvicorn

    uvicorn.run(create_app(ctx.obj), host=host, port=port)


if __name__ == "__main__":
    main()
