"""Durable service definitions: one JSON document per service.

Storage is a directory of ``service_<id>.json`` files plus an index that
carries the monotonic id counter. Writes go through write-then-rename so
a crash never leaves a torn document; mutations serialize on one lock
while reads hit an immutable in-memory snapshot.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import NotFoundError, ValidationError
from .forms import FormAnalysis
from .rules import ExtractionRules, FieldName
from .segmenter import Block

SCHEMA_VERSION = 1
RESERVED_PARAMS = {"key", "__max_page"}


@dataclass
class ServiceBlock:
    name: str
    block: Block
    rules: ExtractionRules
    field_names: list[FieldName] = field(default_factory=list)

    def names_map(self) -> dict[int, str]:
        return {fn.field_id: fn.name for fn in self.field_names}

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "block": self.block.to_json(),
            "rules": self.rules.to_json(),
            "field_names": [fn.to_json() for fn in self.field_names],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ServiceBlock":
        return cls(
            name=doc["name"],
            block=Block.from_json(doc["block"]),
            rules=ExtractionRules.from_json(doc["rules"]),
            field_names=[FieldName.from_json(f) for f in doc.get("field_names", [])],
        )


@dataclass
class ServiceDefinition:
    name: str
    source_url: str
    description: str = ""
    form_analysis: Optional[FormAnalysis] = None
    field_bindings: dict[str, str] = field(default_factory=dict)  # param -> field css_selector
    example_values: dict[str, str] = field(default_factory=dict)
    blocks: list[ServiceBlock] = field(default_factory=list)
    id: Optional[int] = None
    api_key: Optional[str] = None
    created_at: str = ""
    schema_version: int = SCHEMA_VERSION

    @property
    def has_form(self) -> bool:
        return self.form_analysis is not None and self.form_analysis.main_form_index is not None

    def selected_form(self):
        assert self.form_analysis is not None and self.form_analysis.main_form_index is not None
        return self.form_analysis.forms[self.form_analysis.main_form_index]

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "source_url": self.source_url,
            "form_analysis": self.form_analysis.to_json() if self.form_analysis else None,
            "field_bindings": dict(self.field_bindings),
            "example_values": dict(self.example_values),
            "blocks": [b.to_json() for b in self.blocks],
            "api_key": self.api_key,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ServiceDefinition":
        fa = doc.get("form_analysis")
        return cls(
            name=doc.get("name", ""),
            description=doc.get("description", ""),
            source_url=doc.get("source_url", ""),
            form_analysis=FormAnalysis.from_json(fa) if fa else None,
            field_bindings=dict(doc.get("field_bindings", {})),
            example_values=dict(doc.get("example_values", {})),
            blocks=[ServiceBlock.from_json(b) for b in doc.get("blocks", [])],
            id=doc.get("id"),
            api_key=doc.get("api_key"),
            created_at=doc.get("created_at", ""),
            schema_version=doc.get("schema_version", SCHEMA_VERSION),
        )


def validate_definition(definition: ServiceDefinition) -> None:
    """Raise ValidationError listing every offending field."""
    bad: list[str] = []
    if not definition.name.strip():
        bad.append("name")
    if not definition.source_url.strip():
        bad.append("source_url")
    if not definition.blocks:
        bad.append("blocks")
    names = [b.name for b in definition.blocks]
    if len(set(names)) != len(names) or any(not n.strip() for n in names):
        bad.append("blocks.name")

    for param in definition.field_bindings:
        if param in RESERVED_PARAMS:
            bad.append(f"field_bindings.{param}")

    fa = definition.form_analysis
    if fa is None:
        if definition.field_bindings:
            bad.append("field_bindings")
    else:
        if fa.main_form_index is None or not (0 <= fa.main_form_index < len(fa.forms)):
            bad.append("form_analysis.main_form_index")
        else:
            form = fa.forms[fa.main_form_index]
            if form.main_btn_index is not None and not (
                    0 <= form.main_btn_index < len(form.query_button_list)):
                bad.append("form_analysis.main_btn_index")
            field_selectors = {f.css_selector.serialize() for f in form.input_list}
            for param, selector in definition.field_bindings.items():
                if selector not in field_selectors:
                    bad.append(f"field_bindings.{param}")
    for param in definition.example_values:
        if param not in definition.field_bindings:
            bad.append(f"example_values.{param}")

    if bad:
        raise ValidationError("invalid service definition", fields=sorted(set(bad)))


class Registry:
    """Service store over one directory; safe for concurrent handlers."""

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index_path = self.store_dir / "index.json"
        if self._index_path.exists():
            self._index = json.loads(self._index_path.read_text(encoding="utf-8"))
        else:
            self._index = {"schema_version": SCHEMA_VERSION, "next_id": 1, "services": {}}
        cache: dict[int, dict] = {}
        for sid, fname in self._index["services"].items():
            cache[int(sid)] = json.loads((self.store_dir / fname).read_text(encoding="utf-8"))
        self._cache = cache

    def _write_atomic(self, path: Path, doc: dict) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, ensure_ascii=False, indent=2), encoding="utf-8")
        os.replace(tmp, path)

    def _persist_index(self) -> None:
        self._write_atomic(self._index_path, self._index)

    def create(self, draft: dict) -> dict:
        definition = ServiceDefinition.from_json(draft)
        definition.id = None
        validate_definition(definition)
        with self._lock:
            sid = self._index["next_id"]
            self._index["next_id"] = sid + 1
            definition.id = sid
            definition.api_key = secrets.token_hex(16)
            definition.created_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
            doc = definition.to_json()
            fname = f"service_{sid}.json"
            self._write_atomic(self.store_dir / fname, doc)
            self._index["services"][str(sid)] = fname
            self._persist_index()
            cache = dict(self._cache)
            cache[sid] = doc
            self._cache = cache
        return doc

    def get(self, service_id: int) -> dict:
        doc = self._cache.get(service_id)
        if doc is None:
            raise NotFoundError(f"no service with id {service_id}")
        return doc

    def update(self, service_id: int, patch: dict) -> dict:
        with self._lock:
            doc = self._cache.get(service_id)
            if doc is None:
                raise NotFoundError(f"no service with id {service_id}")
            merged = dict(doc)
            for key, value in patch.items():
                if key in ("id", "api_key", "created_at", "schema_version"):
                    continue
                merged[key] = value
            definition = ServiceDefinition.from_json(merged)
            validate_definition(definition)
            self._write_atomic(self.store_dir / self._index["services"][str(service_id)], merged)
            cache = dict(self._cache)
            cache[service_id] = merged
            self._cache = cache
        return merged

    def delete(self, service_id: int) -> None:
        with self._lock:
            if service_id not in self._cache:
                raise NotFoundError(f"no service with id {service_id}")
            fname = self._index["services"].pop(str(service_id))
            self._persist_index()
            try:
                (self.store_dir / fname).unlink()
            except FileNotFoundError:
                pass
            cache = dict(self._cache)
            del cache[service_id]
            self._cache = cache

    def list_services(self) -> list[dict]:
        out = []
        for sid in sorted(self._cache):
            doc = self._cache[sid]
            out.append({"id": sid, "name": doc.get("name", ""),
                        "source_url": doc.get("source_url", ""),
                        "created_at": doc.get("created_at", "")})
        return out

    def service_definition(self, service_id: int) -> ServiceDefinition:
        return ServiceDefinition.from_json(self.get(service_id))


def public_view(doc: dict) -> dict:
    """A service document safe to return to non-owners (no api_key)."""
    out = dict(doc)
    out.pop("api_key", None)
    return out
