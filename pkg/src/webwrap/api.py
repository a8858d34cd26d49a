"""REST surface over the engine, plus the shared request handlers the CLI
reuses so both interfaces emit identical JSON.

Routes:
    POST   /wrappers/analyze      detect forms, return analysis + preview
    POST   /wrappers/segment      (optionally submit a form, then) segment
    POST   /wrappers              create a service from a definition draft
    GET    /wrappers              list service summaries
    GET    /wrappers/{id}         fetch a definition (api_key withheld)
    PUT    /wrappers/{id}         patch a definition
    DELETE /wrappers/{id}         remove a definition
    GET    /call_service/{id}     invoke with query parameters
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import Response

from .annotate import annotate_blocks, annotate_form_analysis
from .dom import DomNode, parse_document
from .errors import RuleGenerationError, ValidationError, WrapError
from .forms import extract_forms
from .invoker import Invoker, PaginationLexicon, build_form_request
from .provider import FixtureProvider, LiveProvider, PageRequest
from .registry import Registry, public_view
from .rules import generate_rules, suggest_field_names
from .segmenter import segment
from .sorter import DEFAULT_TOP_N, sort_blocks

_STATUS_BY_CODE = {
    "validation": 400,
    "parameter": 400,
    "decode": 400,
    "filter_path": 400,
    "resolution": 400,
    "frame": 400,
    "alignment": 400,
    "empty_rules": 400,
    "not_in_document": 400,
    "authorization": 401,
    "not_found": 404,
    "upstream": 502,
    "fixture_missing": 502,
    "submission": 502,
    "extraction": 502,
}


def status_for(error: WrapError) -> int:
    return _STATUS_BY_CODE.get(error.code, 500)


def canonical_json(obj) -> str:
    """The one JSON rendering used by both the HTTP API and the CLI."""
    return json.dumps(obj, ensure_ascii=False, indent=2)


@dataclass
class EngineConfig:
    store_dir: Path
    fixtures_dir: Optional[Path] = None
    lexicon_file: Optional[Path] = None

    @classmethod
    def from_env(cls) -> "EngineConfig":
        return cls(
            store_dir=Path(os.environ.get("STORE_DIR", "./wrapstore")),
            fixtures_dir=Path(os.environ["FIXTURES_DIR"]) if os.environ.get("FIXTURES_DIR") else None,
            lexicon_file=Path(os.environ["PAGINATION_LEXICON"]) if os.environ.get("PAGINATION_LEXICON") else None,
        )


class Engine:
    """Request handlers shared by the HTTP routes and the CLI commands."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.registry = Registry(config.store_dir)
        if config.fixtures_dir is not None:
            self.provider = FixtureProvider(config.fixtures_dir)
        else:
            self.provider = LiveProvider()
        if config.lexicon_file is not None:
            self.lexicon = PaginationLexicon.from_file(config.lexicon_file)
        else:
            self.lexicon = PaginationLexicon()

    def _load_source(self, source: dict) -> tuple[DomNode, str]:
        if not isinstance(source, dict):
            raise ValidationError("source must be an object with url or html", fields=["source"])
        html = source.get("html")
        url = source.get("url") or ""
        if html is not None:
            doc = parse_document(html, base_url=url,
                                 iframe_loader=self.provider.iframe_loader)
            return doc, url
        if not url:
            raise ValidationError("source needs a url or inline html", fields=["source"])
        data, final_url = self.provider.fetch(PageRequest(url=url))
        doc = parse_document(data, base_url=final_url,
                             iframe_loader=self.provider.iframe_loader)
        return doc, final_url

    def analyze(self, source: dict) -> dict:
        doc, url = self._load_source(source)
        analysis = extract_forms(doc, url)
        return {
            "analysis": analysis.to_json(),
            "annotated_html": annotate_form_analysis(doc, analysis),
        }

    def segment(self, source: dict, form_choice: Optional[int] = None,
                button_choice: Optional[int] = None,
                field_values: Optional[dict[str, str]] = None,
                top_n: int = DEFAULT_TOP_N) -> dict:
        doc, url = self._load_source(source)
        if form_choice is not None:
            analysis = extract_forms(doc, url)
            if not 0 <= form_choice < len(analysis.forms):
                raise ValidationError(f"form_choice {form_choice} out of range",
                                      fields=["form_choice"])
            form = analysis.forms[form_choice]
            by_name = {rec.name: rec for rec in form.input_list if rec.name}
            overrides = {}
            for name, value in (field_values or {}).items():
                rec = by_name.get(name)
                if rec is None:
                    raise ValidationError(f"form has no field named {name!r}",
                                          fields=["field_values"])
                overrides[rec.css_selector.serialize()] = value
            request = build_form_request(doc, form, overrides, url, button_index=button_choice)
            data, url = self.provider.fetch(request)
            doc = parse_document(data, base_url=url,
                                 iframe_loader=self.provider.iframe_loader)

        ranked = sort_blocks(segment(doc), n=top_n)
        blocks = []
        for rb in ranked:
            entry = {
                "rank": rb.rank,
                "fallback": rb.fallback,
                "block": rb.block.to_json(),
            }
            try:
                rules = generate_rules(rb.block, doc)
                names = suggest_field_names(rb.block, rules, doc)
                entry["rules"] = rules.to_json()
                entry["field_names"] = [fn.to_json() for fn in names]
            except RuleGenerationError:
                entry["rules"] = None
                entry["field_names"] = []
            blocks.append(entry)
        return {
            "url": url,
            "blocks": blocks,
            "annotated_html": annotate_blocks(doc, ranked),
        }

    def create(self, draft: dict) -> dict:
        doc = self.registry.create(draft)
        return {
            "id": doc["id"],
            "api_url": f"/call_service/{doc['id']}",
            "api_key": doc["api_key"],
        }

    def get_wrapper(self, service_id: int) -> dict:
        return public_view(self.registry.get(service_id))

    def list_wrappers(self) -> list[dict]:
        return self.registry.list_services()

    def update_wrapper(self, service_id: int, patch: dict) -> dict:
        return public_view(self.registry.update(service_id, patch))

    def delete_wrapper(self, service_id: int) -> dict:
        self.registry.delete(service_id)
        return {"deleted": service_id}

    def invoke(self, service_id: int, params: dict[str, str]) -> dict:
        service = self.registry.service_definition(service_id)
        invoker = Invoker(self.provider, lexicon=self.lexicon)
        return invoker.invoke(service, params)


def create_app(config: EngineConfig | None = None) -> FastAPI:
    engine = Engine(config or EngineConfig.from_env())
    app = FastAPI(title="webwrap", docs_url=None, redoc_url=None)
    app.state.engine = engine

    def respond(payload, status: int = 200) -> Response:
        return Response(content=canonical_json(payload), status_code=status,
                        media_type="application/json")

    @app.exception_handler(WrapError)
    async def wrap_error_handler(_request: Request, exc: WrapError):
        return respond(exc.to_json(), status=status_for(exc))

    @app.post("/wrappers/analyze")
    def analyze(body: dict = Body(...)):
        return respond(engine.analyze(body.get("source") or {}))

    @app.post("/wrappers/segment")
    def segment_route(body: dict = Body(...)):
        return respond(engine.segment(
            body.get("source") or {},
            form_choice=body.get("form_choice"),
            button_choice=body.get("button_choice"),
            field_values=body.get("field_values"),
            top_n=body.get("top_n", DEFAULT_TOP_N),
        ))

    @app.post("/wrappers")
    def create(body: dict = Body(...)):
        return respond(engine.create(body))

    @app.get("/wrappers")
    def list_wrappers():
        return respond(engine.list_wrappers())

    @app.get("/wrappers/{service_id}")
    def get_wrapper(service_id: int):
        return respond(engine.get_wrapper(service_id))

    @app.put("/wrappers/{service_id}")
    def update_wrapper(service_id: int, body: dict = Body(...)):
        return respond(engine.update_wrapper(service_id, body))

    @app.delete("/wrappers/{service_id}")
    def delete_wrapper(service_id: int):
        return respond(engine.delete_wrapper(service_id))

    @app.get("/call_service/{service_id}")
    def call_service(service_id: int, request: Request):
        return respond(engine.invoke(service_id, dict(request.query_params)))

    return app
