"""Service invocation: parameter triage, form submission, paginated
extraction, and result filtering.

Request parameters split three ways: system parameters (``key``,
``__max_page``), application parameters (bound to form fields), and
filter parameters (predicates over output fields, ``name`` or
``name__<op>`` with dotted paths reaching into link fields). Anything
else is dropped and reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import urljoin

from .dom import DomNode, SelectorPath, iter_elements, parse_document, resolve_selector, selector_of
from .errors import (
    AuthorizationError, ExtractionError, FilterPathError, ParameterError,
    ResolutionError, SubmissionError, UpstreamError,
)
from .forms import FormRecord, detect_click_bound
from .provider import GET, POST, PageRequest, normalize_url
from .registry import RESERVED_PARAMS, ServiceBlock, ServiceDefinition
from .rules import extract, field_paths, named_record
from .segmenter import locate_sub_blocks

FILTER_OPS = ("gt", "ge", "lt", "le", "ne")


@dataclass
class FilterPredicate:
    path: str          # dotted field path, e.g. "pc.price"
    op: str            # eq | ne | gt | ge | lt | le
    operand: str

    def to_json(self) -> dict:
        return {"path": self.path, "op": self.op, "operand": self.operand}


@dataclass
class ParamPartition:
    system: dict[str, str] = field(default_factory=dict)
    application: dict[str, str] = field(default_factory=dict)
    filters: dict[str, FilterPredicate] = field(default_factory=dict)
    dropped: list[str] = field(default_factory=list)


def _split_filter_name(name: str) -> tuple[str, str]:
    for op in FILTER_OPS:
        suffix = f"__{op}"
        if name.endswith(suffix) and len(name) > len(suffix):
            return name[: -len(suffix)], op
    return name, "eq"


def known_field_paths(service: ServiceDefinition) -> set[str]:
    paths: set[str] = set()
    for sb in service.blocks:
        paths |= field_paths(sb.rules, sb.names_map())
    return paths


def analyze_params(service: ServiceDefinition, query: dict[str, str]) -> ParamPartition:
    """Triage request parameters; unknown names are dropped, not errors."""
    part = ParamPartition()
    known = known_field_paths(service)
    for name, value in query.items():
        if name in RESERVED_PARAMS:
            part.system[name] = value
        elif name in service.field_bindings:
            part.application[name] = value
        else:
            base, op = _split_filter_name(name)
            if base in known:
                part.filters[name] = FilterPredicate(path=base, op=op, operand=value)
            else:
                part.dropped.append(name)
    return part


def default_system_hook(service: ServiceDefinition, system: dict[str, str]) -> int:
    """Key check plus page-budget parsing; replaceable per deployment."""
    if service.api_key:
        if system.get("key") != service.api_key:
            raise AuthorizationError("missing or wrong service key")
    raw = system.get("__max_page")
    if raw is None:
        return 1
    try:
        budget = int(raw)
    except ValueError:
        raise ParameterError(f"__max_page must be a positive integer, got {raw!r}") from None
    if budget <= 0:
        raise ParameterError(f"__max_page must be a positive integer, got {raw!r}")
    return budget


# Pagination

@dataclass
class PaginationLexicon:
    next_words: frozenset[str] = frozenset({"next", "next page", ">", "»", "下一页"})
    other_words: frozenset[str] = frozenset({"last page", "last"})
    numerals: bool = True

    @classmethod
    def from_file(cls, path: str | Path) -> "PaginationLexicon":
        """Extend the built-in next-words with one word per line."""
        words = {line.strip().lower() for line in Path(path).read_text(encoding="utf-8").splitlines()
                 if line.strip()}
        base = cls()
        return cls(next_words=base.next_words | frozenset(words),
                   other_words=base.other_words, numerals=base.numerals)


def _element_text(el: DomNode) -> str:
    parts: list[str] = []
    stack = [el]
    while stack:
        node = stack.pop()
        if node.kind == "text":
            parts.append(node.text)
        elif node.kind == "element":
            stack.extend(reversed(node.children))
    return " ".join(" ".join(parts).split())


def find_next_page(page: DomNode, lexicon: PaginationLexicon | None = None) -> Optional[SelectorPath]:
    """Depth-first scan for a pagination control; None means last page.

    Explicit next-page wording wins over numerals and "last page" texts.
    """
    lex = lexicon or PaginationLexicon()
    first_other: DomNode | None = None
    for el in iter_elements(page):
        if el.tag != "a" and not detect_click_bound(el):
            continue
        text = _element_text(el).lower()
        if not text:
            continue
        if text in lex.next_words:
            return selector_of(el, page)
        if first_other is None and (text in lex.other_words or (lex.numerals and text.isdigit())):
            first_other = el
    return selector_of(first_other, page) if first_other is not None else None


# Filtering

def _descend(record: dict, path: str):
    value = record
    for part in path.split("."):
        if not isinstance(value, dict) or part not in value:
            return None, False
        value = value[part]
    return value, True


def _predicate_holds(record: dict, pred: FilterPredicate) -> bool:
    value, found = _descend(record, pred.path)
    if not found or value is None or isinstance(value, dict):
        return False
    try:
        left, right = float(value), float(pred.operand)
        numeric = True
    except (TypeError, ValueError):
        numeric = False
    if numeric:
        return {
            "eq": left == right, "ne": left != right,
            "gt": left > right, "ge": left >= right,
            "lt": left < right, "le": left <= right,
        }[pred.op]
    if pred.op == "eq":
        return str(value) == pred.operand
    if pred.op == "ne":
        return str(value) != pred.operand
    return False


def filter_records(records: list[dict], predicates: list[FilterPredicate],
                   known_paths: set[str] | None = None) -> list[dict]:
    """Conjunction of predicates, order preserving.

    ``known_paths`` distinguishes a predicate over a nonexistent field
    (an error) from one that merely matches nothing.
    """
    if known_paths is not None:
        for pred in predicates:
            if pred.path not in known_paths:
                raise FilterPathError(f"no output field at path {pred.path!r}")
    if not predicates:
        return list(records)
    return [r for r in records if all(_predicate_holds(r, p) for p in predicates)]


# Form submission

_TRUTHY = {"1", "true", "on", "yes", "checked"}


def build_form_request(document: DomNode, form: FormRecord,
                       overrides: dict[str, str], base_url: str,
                       button_index: Optional[int] = None) -> PageRequest:
    """Declarative submission of a detected form.

    ``overrides`` maps field css_selector strings to values; unspecified
    fields keep their recorded values. Anchor/image/other buttons submit
    as GET to their href; without one the submission needs a script
    runtime and fails.
    """
    try:
        form_el = resolve_selector(document, form.css_selector)
    except ResolutionError as exc:
        raise UpstreamError(f"form no longer present on the page: {exc.message}") from exc

    values: list[tuple[str, str]] = []
    for rec in form.input_list:
        if not rec.name:
            continue
        if rec.input_type in ("password", "file"):
            continue
        sel = rec.css_selector.serialize()
        override = overrides.get(sel)
        if rec.input_type == "checkbox":
            if override is not None:
                if override.strip().lower() in _TRUTHY:
                    values.append((rec.name, rec.value or "on"))
            elif rec.checked:
                values.append((rec.name, rec.value or "on"))
            continue
        value = override if override is not None else rec.value
        values.append((rec.name, value))

    method = form_el.attr("method", "get").strip().upper() or GET
    action = urljoin(base_url, form_el.attr("action") or base_url)

    if button_index is not None and form.query_button_list:
        btn = form.query_button_list[button_index]
        try:
            btn_el = resolve_selector(document, btn.css_selector)
        except ResolutionError as exc:
            raise UpstreamError(f"query button no longer present: {exc.message}") from exc
        if btn.source_kind in ("anchor", "image", "click-bound-other") and btn_el.tag == "a":
            href = btn_el.attr("href").strip()
            if not href or href.lower().startswith("javascript:"):
                raise SubmissionError(
                    "query button submits through script; a script runtime is required")
            method = GET
            action = urljoin(base_url, href)
        elif btn.source_kind in ("image", "click-bound-other") and btn_el.tag not in ("input", "button"):
            raise SubmissionError(
                "query button submits through script; a script runtime is required")
        elif btn_el.tag == "input" and btn_el.attr("type", "").lower() == "submit" and btn_el.attr("name"):
            values.append((btn_el.attr("name"), btn_el.attr("value")))

    if method not in (GET, POST):
        method = GET
    if values:
        return PageRequest(url=action, method=method,
                           form_target=form.css_selector.serialize(), field_values=values)
    return PageRequest(url=action, method=method)


# End-to-end invocation

SystemHook = Callable[[ServiceDefinition, dict], int]


class Invoker:
    """Stateless executor; one instance may serve concurrent invocations."""

    def __init__(self, provider, lexicon: PaginationLexicon | None = None,
                 system_hook: SystemHook | None = None):
        self.provider = provider
        self.lexicon = lexicon or PaginationLexicon()
        self.system_hook = system_hook or default_system_hook

    def _parse(self, data: bytes, url: str) -> DomNode:
        return parse_document(data, base_url=url, iframe_loader=self.provider.iframe_loader)

    def _result_page(self, service: ServiceDefinition,
                     application: dict[str, str]) -> tuple[DomNode, str]:
        if service.has_form:
            data, url = self.provider.fetch(PageRequest(url=service.source_url))
            query_doc = self._parse(data, url)
            form = service.selected_form()
            overrides = {}
            for param, selector in service.field_bindings.items():
                if param in application:
                    overrides[selector] = application[param]
                elif param in service.example_values:
                    overrides[selector] = service.example_values[param]
            request = build_form_request(query_doc, form, overrides, url,
                                         button_index=form.main_btn_index)
            data, url = self.provider.fetch(request)
        else:
            data, url = self.provider.fetch(PageRequest(url=service.source_url))
        return self._parse(data, url), url

    def _block_records(self, page: DomNode, sb: ServiceBlock, page_url: str) -> list[dict]:
        try:
            subs = locate_sub_blocks(page, sb.block)
        except ResolutionError as exc:
            raise ExtractionError(
                f"block {sb.name!r}: parent selector "
                f"{sb.block.parent_selector.serialize()!r} failed: {exc.message}",
                details={"block": sb.name},
            ) from exc
        selectors = [selector_of(s, page) for s in subs]
        names = sb.names_map()
        return [named_record(rec, sb.rules, names)
                for rec in extract(page, selectors, sb.rules, base_url=page_url)]

    def execute(self, service: ServiceDefinition, application: dict[str, str],
                page_budget: int) -> tuple[dict[str, list[dict]], int]:
        """Submit, extract, and paginate. Returns (records per block, pages)."""
        page, page_url = self._result_page(service, application)
        per_block: dict[str, list[dict]] = {sb.name: [] for sb in service.blocks}
        visited = {normalize_url(page_url)}
        pages = 1
        while True:
            for sb in service.blocks:
                try:
                    per_block[sb.name].extend(self._block_records(page, sb, page_url))
                except ExtractionError as exc:
                    exc.details["pages_succeeded"] = pages - 1
                    raise
            if pages >= page_budget:
                break
            nxt = find_next_page(page, self.lexicon)
            if nxt is None:
                break
            el = resolve_selector(page, nxt)
            href = el.attr("href").strip()
            if not href or href.lower().startswith(("javascript:", "#")):
                break
            url = urljoin(page_url, href)
            if normalize_url(url) in visited:
                break
            data, page_url = self.provider.fetch(PageRequest(url=url))
            visited.add(normalize_url(page_url))
            page = self._parse(data, page_url)
            pages += 1
        return per_block, pages

    def invoke(self, service: ServiceDefinition, query: dict[str, str]) -> dict:
        """Full invocation: triage, authorize, execute, filter, assemble."""
        partition = analyze_params(service, query)
        page_budget = self.system_hook(service, partition.system)
        per_block, pages = self.execute(service, partition.application, page_budget)
        predicates = list(partition.filters.values())
        known = known_field_paths(service)
        blocks = {name: filter_records(records, predicates, known_paths=known)
                  for name, records in per_block.items()}
        return {
            "service_id": service.id,
            "blocks": blocks,
            "pages_fetched": pages,
            "dropped_params": partition.dropped,
        }
