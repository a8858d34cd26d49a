"""Extraction-rule generation, execution, and field naming.

Rules cover the three data-carrier categories of a sub-block: ranked text
segments, images (``img`` src and inline-style ``background_img``), and
hyperlinks with nested text/image rules. Rule selectors are rooted at the
sub-block element so one rules document serves every sub-block and
survives row-count changes between invocations; header cells are written
with ``td`` steps and resolved with td/th equivalence so one document
serves header and data rows alike.

A link rule whose content sits directly on the anchor is serialized with
an empty ``css_selector``; its nested selectors then address the anchor
itself.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional
from urllib.parse import urljoin

from .dom import (
    DOCUMENT, ELEMENT, TEXT, DomNode, SelectorPath, SelectorStep,
    owning_document, resolve_selector, resolve_steps, text_segments,
)
from .errors import (
    AlignmentError, ExtractionError, FrameError, NotInDocumentError,
    ResolutionError, RuleGenerationError,
)
from .segmenter import NON_CONTENT_TAGS, Block

IMG = "img"
BACKGROUND_IMG = "background_img"


@dataclass
class TextRule:
    id: int
    rank: int
    css_selector: str

    def to_json(self) -> dict:
        return {"id": self.id, "rank": self.rank, "css_selector": self.css_selector}


@dataclass
class ImageRule:
    id: int
    type: str
    css_selector: str

    def to_json(self) -> dict:
        return {"id": self.id, "type": self.type, "css_selector": self.css_selector}


@dataclass
class LinkRule:
    id: int
    css_selector: str
    texts: list[TextRule] = field(default_factory=list)
    images: list[ImageRule] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "css_selector": self.css_selector,
            "texts": [t.to_json() for t in self.texts],
            "images": [i.to_json() for i in self.images],
        }


@dataclass
class ExtractionRules:
    texts: list[TextRule] = field(default_factory=list)
    images: list[ImageRule] = field(default_factory=list)
    links: list[LinkRule] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "texts": [t.to_json() for t in self.texts],
            "images": [i.to_json() for i in self.images],
            "links": [l.to_json() for l in self.links],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExtractionRules":
        return cls(
            texts=[TextRule(t["id"], t["rank"], t["css_selector"]) for t in doc.get("texts", [])],
            images=[ImageRule(i["id"], i["type"], i["css_selector"]) for i in doc.get("images", [])],
            links=[
                LinkRule(
                    l["id"], l["css_selector"],
                    texts=[TextRule(t["id"], t["rank"], t["css_selector"]) for t in l.get("texts", [])],
                    images=[ImageRule(i["id"], i["type"], i["css_selector"]) for i in l.get("images", [])],
                )
                for l in doc.get("links", [])
            ],
        )

    def all_ids(self) -> list[int]:
        ids = [t.id for t in self.texts] + [i.id for i in self.images]
        for l in self.links:
            ids.append(l.id)
            ids.extend(t.id for t in l.texts)
            ids.extend(i.id for i in l.images)
        return ids


@dataclass
class FieldName:
    field_id: int
    name: str
    provenance: str  # table-header | attribute | placeholder | oracle | generic

    def to_json(self) -> dict:
        return {"field_id": self.field_id, "name": self.name, "provenance": self.provenance}

    @classmethod
    def from_json(cls, doc: dict) -> "FieldName":
        return cls(doc["field_id"], doc["name"], doc["provenance"])


_URL_RE = re.compile(r"""url\(\s*['"]?([^'")]+)['"]?\s*\)""", re.IGNORECASE)


def background_url(style: str) -> Optional[str]:
    """Image URL from an inline style's background declarations, if any."""
    if not style or "url(" not in style.lower():
        return None
    for decl in style.split(";"):
        name, _, value = decl.partition(":")
        if name.strip().lower() in ("background", "background-image"):
            m = _URL_RE.search(value)
            if m:
                return m.group(1).strip()
    return None


def _norm_tag(tag: str) -> str:
    return "td" if tag == "th" else tag


def _cell_equiv(step_tag: str, node_tag: str) -> bool:
    return _norm_tag(step_tag) == _norm_tag(node_tag)


def _norm_step(node: DomNode) -> SelectorStep:
    siblings = node.parent.element_children()
    tag = _norm_tag(node.tag)
    same = sum(1 for s in siblings if _norm_tag(s.tag) == tag)
    return SelectorStep(tag, siblings.index(node) + 1 if same > 1 else None)


def relative_path(node: DomNode, root: DomNode) -> SelectorPath:
    """Selector path of ``node`` below ``root``, with td/th normalized."""
    frames: list[tuple[SelectorStep, ...]] = []
    steps: list[SelectorStep] = []
    cur = node
    while cur is not root:
        parent = cur.parent
        if parent is None:
            raise NotInDocumentError("node is not inside the rule root")
        steps.insert(0, _norm_step(cur))
        if parent.kind == DOCUMENT:
            frames.insert(0, tuple(steps))
            steps = []
            holder = parent.parent
            if holder is None:
                raise NotInDocumentError("node is not inside the rule root")
            cur = holder
        else:
            cur = parent
    frames.insert(0, tuple(steps))
    return SelectorPath(frames=tuple(frames))


def resolve_relative(root: DomNode, path: SelectorPath) -> Optional[DomNode]:
    """Resolve a rule selector below a sub-block root; None when absent."""
    cur = root
    try:
        for fi, frame in enumerate(path.frames):
            if fi > 0:
                if cur.kind != ELEMENT or cur.tag != "iframe":
                    return None
                inner = cur.inner_document()
                if inner is None:
                    return None
                cur = inner
            cur = resolve_steps(cur, frame, tag_equiv=_cell_equiv)
    except ResolutionError:
        return None
    return cur


# Carrier scan: document-order data carriers inside one sub-block.

@dataclass
class _Scan:
    texts: list[tuple[DomNode, int]] = field(default_factory=list)     # (element, rank)
    images: list[tuple[DomNode, str]] = field(default_factory=list)    # (element, type)
    links: list[tuple[DomNode, "_Scan"]] = field(default_factory=list)  # (anchor, content)


def _collect(el: DomNode, sink: _Scan, divert_links: bool) -> None:
    if el.tag in NON_CONTENT_TAGS:
        return
    if background_url(el.attr("style")):
        sink.images.append((el, BACKGROUND_IMG))
    if el.tag == "img" and el.attr("src"):
        sink.images.append((el, IMG))
    rank = 0
    for child in el.children:
        if child.kind == TEXT:
            if child.text.strip():
                rank += 1
                sink.texts.append((el, rank))
        elif child.kind == ELEMENT:
            if divert_links and child.tag == "a":
                sink.links.append((child, _scan_link(child)))
            else:
                _collect(child, sink, divert_links)
        elif child.kind == DOCUMENT:
            for inner in child.element_children():
                if divert_links and inner.tag == "a":
                    sink.links.append((inner, _scan_link(inner)))
                else:
                    _collect(inner, sink, divert_links)


def _scan_link(anchor: DomNode) -> _Scan:
    content = _Scan()
    _collect(anchor, content, divert_links=False)
    return content


def scan_carriers(root: DomNode) -> _Scan:
    sink = _Scan()
    if root.tag == "a":
        sink.links.append((root, _scan_link(root)))
    else:
        _collect(root, sink, divert_links=True)
    return sink


def _link_paths(anchor: DomNode, content: _Scan, root: DomNode):
    anchor_path = relative_path(anchor, root).serialize()
    text_items = [(relative_path(el, root).serialize(), rank) for el, rank in content.texts]
    image_items = [(relative_path(el, root).serialize(), kind) for el, kind in content.images]
    nested_paths = [p for p, _ in text_items] + [p for p, _ in image_items]
    if nested_paths and all(p == anchor_path for p in nested_paths):
        own_path = ""  # nested selectors address the anchor directly
    else:
        own_path = anchor_path
    return own_path, anchor_path, text_items, image_items


def generate_rules(block: Block, document: DomNode) -> ExtractionRules:
    """Build the rules document covering every carrier of the block.

    Carriers are unioned across sub-blocks (first-seen order) so a text
    present in only some rows still gets a rule; extraction yields null
    where a row lacks the carrier.
    """
    roots = [resolve_selector(document, s) for s in block.sub_block_selectors]

    texts: dict[tuple[str, int], None] = {}
    images: dict[tuple[str, str], None] = {}
    links: dict[str, dict] = {}
    for root in roots:
        scan = scan_carriers(root)
        for el, rank in scan.texts:
            texts.setdefault((relative_path(el, root).serialize(), rank))
        for el, kind in scan.images:
            images.setdefault((relative_path(el, root).serialize(), kind))
        for anchor, content in scan.links:
            own_path, anchor_path, text_items, image_items = _link_paths(anchor, content, root)
            entry = links.setdefault(anchor_path, {"own_path": own_path, "texts": {}, "images": {}})
            for item in text_items:
                entry["texts"].setdefault(item)
            for item in image_items:
                entry["images"].setdefault(item)

    if not texts and not images and not links:
        raise RuleGenerationError("block has no data carriers (texts, images, or links)")

    rules = ExtractionRules()
    next_id = 0
    for path, rank in texts:
        rules.texts.append(TextRule(next_id, rank, path))
        next_id += 1
    for path, kind in images:
        rules.images.append(ImageRule(next_id, kind, path))
        next_id += 1
    for entry in links.values():
        link = LinkRule(next_id, entry["own_path"])
        next_id += 1
        for path, rank in entry["texts"]:
            link.texts.append(TextRule(next_id, rank, path))
            next_id += 1
        for path, kind in entry["images"]:
            link.images.append(ImageRule(next_id, kind, path))
            next_id += 1
        rules.links.append(link)
    return rules


def _text_value(root: DomNode, rule: TextRule) -> Optional[str]:
    el = resolve_relative(root, SelectorPath.parse(rule.css_selector))
    if el is None:
        return None
    segments = text_segments(el)
    if rule.rank <= len(segments):
        return segments[rule.rank - 1].content.strip()
    return None


def _frame_base(el: DomNode, fallback: str) -> str:
    # relative urls resolve against the document that holds the element,
    # which differs from the page base inside iframes
    return owning_document(el).base_url or fallback


def _image_value(root: DomNode, rule: ImageRule, base: str) -> Optional[str]:
    el = resolve_relative(root, SelectorPath.parse(rule.css_selector))
    if el is None:
        return None
    if rule.type == IMG:
        src = el.attr("src")
    else:
        src = background_url(el.attr("style"))
    return urljoin(_frame_base(el, base), src) if src else None


def _locate_anchor(root: DomNode, rule: LinkRule) -> Optional[DomNode]:
    if rule.css_selector:
        return resolve_relative(root, SelectorPath.parse(rule.css_selector))
    for nested in (rule.texts, rule.images):
        for r in nested:
            el = resolve_relative(root, SelectorPath.parse(r.css_selector))
            if el is None:
                continue
            while el is not None and el is not root.parent:
                if el.kind == ELEMENT and el.tag == "a":
                    return el
                el = el.parent
    return root if root.tag == "a" else None


def extract(page: DomNode, sub_block_selectors: list[SelectorPath],
            rules: ExtractionRules, base_url: str | None = None) -> list[dict[int, object]]:
    """One record per sub-block, mapping rule id to extracted value.

    Text values are stripped segment contents; image and link URLs are
    resolved against the page base; carriers missing from a particular
    sub-block come back as None.
    """
    base = base_url if base_url is not None else page.base_url
    records: list[dict[int, object]] = []
    for sel in sub_block_selectors:
        try:
            root = resolve_selector(page, sel)
        except (ResolutionError, FrameError) as exc:
            raise ExtractionError(
                f"sub-block selector {sel.serialize()!r} failed to resolve: {exc.message}",
                details={"selector": sel.serialize()},
            ) from exc
        record: dict[int, object] = {}
        for tr in rules.texts:
            record[tr.id] = _text_value(root, tr)
        for ir in rules.images:
            record[ir.id] = _image_value(root, ir, base)
        for lr in rules.links:
            anchor = _locate_anchor(root, lr)
            href = anchor.attr("href") if anchor is not None else ""
            record[lr.id] = urljoin(_frame_base(anchor, base), href) if href else None
            for tr in lr.texts:
                record[tr.id] = _text_value(root, tr)
            for ir in lr.images:
                record[ir.id] = _image_value(root, ir, base)
        records.append(record)
    return records


def carrier_skeletons(block: Block, document: DomNode) -> list[list[dict]]:
    """Aligned per-sub-block carrier descriptors (block_fields backend)."""
    roots = [resolve_selector(document, s) for s in block.sub_block_selectors]
    all_rows: list[list[dict]] = []
    shape0: tuple[int, int, int] | None = None
    for sel, root in zip(block.sub_block_selectors, roots):
        scan = scan_carriers(root)
        shape = (len(scan.texts), len(scan.images), len(scan.links))
        if shape0 is None:
            shape0 = shape
        elif shape != shape0:
            raise AlignmentError(
                f"sub-block {sel.serialize()!r} has {shape} carriers, expected {shape0}",
                sub_block=sel.serialize(),
            )
        row: list[dict] = []
        for el, rank in scan.texts:
            row.append({"kind": "text", "css_selector": relative_path(el, root).serialize(),
                        "rank": rank})
        for el, kind in scan.images:
            row.append({"kind": kind, "css_selector": relative_path(el, root).serialize()})
        for anchor, content in scan.links:
            row.append({"kind": "link", "css_selector": relative_path(anchor, root).serialize(),
                        "texts": len(content.texts), "images": len(content.images)})
        all_rows.append(row)
    return all_rows


# Field naming

NameOracle = Callable[[list[str]], Optional[str]]

_GENERIC_PREFIX = "field_"
_RESERVED_NAMES = {"href"}  # the link object already carries this key


def _header_texts(block: Block, document: DomNode,
                  roots: list[DomNode]) -> Optional[list[str]]:
    if not roots or roots[0].tag != "tr":
        return None

    def header_of(row: DomNode) -> Optional[list[str]]:
        cells = row.element_children()
        if cells and all(c.tag == "th" for c in cells):
            return [(_first_text(c) or "") for c in cells]
        return None

    for root in roots:
        labels = header_of(root)
        if labels is not None:
            return labels
    # Rows split from their header (e.g. thead/tbody): search the table.
    container = resolve_selector(document, block.parent_selector)
    table = container
    while table is not None and not (table.kind == ELEMENT and table.tag == "table"):
        table = table.parent
    if table is None:
        return None
    stack = list(table.element_children())
    while stack:
        el = stack.pop(0)
        if el.tag == "tr":
            labels = header_of(el)
            if labels is not None:
                return labels
        stack.extend(el.element_children())
    return None


def _first_text(el: DomNode) -> Optional[str]:
    segs = text_segments(el)
    return segs[0].content.strip() if segs else None


def _column_of(path_str: str) -> Optional[int]:
    path = SelectorPath.parse(path_str)
    if path.is_empty or not path.frames[0]:
        return None
    first = path.frames[0][0]
    return first.index or 1


def _resolve_on_rows(roots: list[DomNode], path_str: str) -> Optional[DomNode]:
    for root in roots:
        el = resolve_relative(root, SelectorPath.parse(path_str))
        if el is not None:
            return el
    return None


def suggest_field_names(block: Block, rules: ExtractionRules, document: DomNode,
                        name_oracle: NameOracle | None = None) -> list[FieldName]:
    """Initial output-field names, one per rule id.

    Priority: table column headers, then name/id/class attributes, then
    placeholder, then the pluggable oracle, then ``field_k``. Names are
    unique within the block (suffix-disambiguated).
    """
    roots = [resolve_selector(document, s) for s in block.sub_block_selectors]
    headers = _header_texts(block, document, roots)

    # (rule, kind, lookup path, rank-or-None) in id order
    flat: list[tuple[object, str, str, Optional[int]]] = []
    for tr in rules.texts:
        flat.append((tr, "text", tr.css_selector, tr.rank))
    for ir in rules.images:
        flat.append((ir, "image", ir.css_selector, None))
    for lr in rules.links:
        anchor_path = lr.css_selector
        if not anchor_path and (lr.texts or lr.images):
            anchor_path = (lr.texts + lr.images)[0].css_selector
        flat.append((lr, "link", anchor_path, None))
        for tr in lr.texts:
            flat.append((tr, "text", tr.css_selector, tr.rank))
        for ir in lr.images:
            flat.append((ir, "image", ir.css_selector, None))
    flat.sort(key=lambda item: item[0].id)

    rank_counts: dict[str, int] = {}
    for rule, kind, path, rank in flat:
        if kind == "text":
            rank_counts[path] = max(rank_counts.get(path, 0), rank or 0)

    used: set[str] = set(_RESERVED_NAMES)
    out: list[FieldName] = []
    for ordinal, (rule, kind, path, rank) in enumerate(flat, start=1):
        name: Optional[str] = None
        provenance = "generic"

        if headers is not None:
            col = _column_of(path)
            if col is not None and col <= len(headers) and headers[col - 1]:
                name = headers[col - 1]
                provenance = "table-header"

        el = _resolve_on_rows(roots, path) if name is None else None
        if name is None and el is not None:
            for attr_name in ("name", "id", "class"):
                value = el.attr(attr_name).strip()
                if value:
                    name = value.split()[0] if attr_name == "class" else value
                    provenance = "attribute"
                    break
        if name is None and el is not None:
            placeholder = el.attr("placeholder").strip()
            if placeholder:
                name = placeholder
                provenance = "placeholder"
        if name is None and name_oracle is not None and kind == "text":
            samples = []
            for root in roots[:5]:
                node = resolve_relative(root, SelectorPath.parse(path))
                if node is not None:
                    segs = text_segments(node)
                    if rank and rank <= len(segs):
                        samples.append(segs[rank - 1].content.strip())
            guess = name_oracle(samples)
            if guess:
                name = guess
                provenance = "oracle"
        if name is None:
            name = f"{_GENERIC_PREFIX}{ordinal}"
            provenance = "generic"

        if kind == "text" and rank_counts.get(path, 0) > 1 and provenance != "generic":
            name = f"{name}_{rank}"

        final = name
        suffix = 2
        while final in used:
            final = f"{name}_{suffix}"
            suffix += 1
        used.add(final)
        out.append(FieldName(field_id=rule.id, name=final, provenance=provenance))
    return out


def named_record(record: dict[int, object], rules: ExtractionRules,
                 names: dict[int, str]) -> dict:
    """Re-key one extracted record by field names, nesting link contents."""
    out: dict[str, object] = {}
    for tr in rules.texts:
        out[names[tr.id]] = record.get(tr.id)
    for ir in rules.images:
        out[names[ir.id]] = record.get(ir.id)
    for lr in rules.links:
        nested: dict[str, object] = {"href": record.get(lr.id)}
        for tr in lr.texts:
            nested[names[tr.id]] = record.get(tr.id)
        for ir in lr.images:
            nested[names[ir.id]] = record.get(ir.id)
        out[names[lr.id]] = nested
    return out


def field_paths(rules: ExtractionRules, names: dict[int, str]) -> set[str]:
    """Every dotted path a filter predicate may legally name."""
    paths: set[str] = set()
    for tr in rules.texts:
        paths.add(names[tr.id])
    for ir in rules.images:
        paths.add(names[ir.id])
    for lr in rules.links:
        base = names[lr.id]
        paths.add(base)
        paths.add(f"{base}.href")
        for tr in lr.texts:
            paths.add(f"{base}.{names[tr.id]}")
        for ir in lr.images:
            paths.add(f"{base}.{names[ir.id]}")
    return paths
