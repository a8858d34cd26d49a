"""Annotated-page rendering for the selection UI.

Marks are attached as ``data-wrap-mark`` attributes plus one injected
stylesheet and a badge list appended at the end of ``<body>``, so no
existing element changes its position: every selector computed on the
original document still resolves on the annotated copy. Stripping the
annotations restores the original structure.
"""

from __future__ import annotations

from html import escape

from .dom import (
    DOCUMENT, ELEMENT, TEXT, DomNode, VOID_ELEMENTS, iter_elements,
    parse_document, resolve_selector,
)
from .forms import FormAnalysis
from .sorter import RankedBlock

MARK_ATTR = "data-wrap-mark"
BADGES_ATTR = "data-wrap-badges"
STYLE_MARKER_ATTR = "data-wrap-style"

_BADGE_CSS = (
    f"[{MARK_ATTR}]{{outline:2px solid #e8590c;outline-offset:1px;}}"
    f"[{MARK_ATTR}]::after{{content:attr({MARK_ATTR});background:#e8590c;color:#fff;"
    "font:bold 11px/1.5 sans-serif;padding:0 4px;border-radius:3px;margin-left:4px;}"
    f"[{BADGES_ATTR}]{{position:fixed;bottom:8px;right:8px;background:#fff8;"
    "font:12px sans-serif;padding:4px;}"
    f"[{BADGES_ATTR}] span{{margin:0 3px;color:#e8590c;font-weight:bold;}}"
)


def _serialize_annotated(node: DomNode, marks: dict[int, str],
                         style_host: DomNode | None, badge_host: DomNode | None,
                         parts: list[str]) -> None:
    if node.kind == DOCUMENT:
        for child in node.children:
            _serialize_annotated(child, marks, style_host, badge_host, parts)
        return
    if node.kind == TEXT:
        parent = node.parent
        if parent is not None and parent.kind == ELEMENT and parent.tag in ("script", "style"):
            parts.append(node.text)
        else:
            parts.append(escape(node.text, quote=False))
        return

    attrs = "".join(
        f" {name}" if value == "" else f' {name}="{escape(value)}"'
        for name, value in node.attrs.items()
    )
    mark = marks.get(id(node))
    if mark is not None:
        attrs += f' {MARK_ATTR}="{escape(mark)}"'
    if node.tag in VOID_ELEMENTS:
        parts.append(f"<{node.tag}{attrs}>")
        return
    parts.append(f"<{node.tag}{attrs}>")
    for child in node.children:
        if child.kind == DOCUMENT:
            continue
        _serialize_annotated(child, marks, style_host, badge_host, parts)
    if node is style_host:
        parts.append(f'<style {STYLE_MARKER_ATTR}>{_BADGE_CSS}</style>')
    if node is badge_host:
        badges = "".join(f"<span>{escape(m)}</span>" for m in marks.values())
        parts.append(f"<div {BADGES_ATTR}>{badges}</div>")
    parts.append(f"</{node.tag}>")


def _annotated_html(document: DomNode, marks: dict[int, str]) -> str:
    if not marks:
        from .dom import serialize_html

        return serialize_html(document)
    roots = document.element_children()
    root = roots[0] if roots else None
    head = body = None
    if root is not None:
        for child in root.element_children():
            if child.tag == "head" and head is None:
                head = child
            elif child.tag == "body" and body is None:
                body = child
    style_host = head or root
    badge_host = body or root
    parts: list[str] = []
    _serialize_annotated(document, marks, style_host, badge_host, parts)
    return "".join(parts)


def annotate_form_analysis(document: DomNode, analysis: FormAnalysis) -> str:
    """Annotated page HTML with T marks on fields and B marks on buttons."""
    marks: dict[int, str] = {}
    for form in analysis.forms:
        for rec in form.input_list:
            if rec.ui_mark:
                marks[id(resolve_selector(document, rec.css_selector))] = rec.ui_mark
        for btn in form.query_button_list:
            if btn.ui_mark:
                marks[id(resolve_selector(document, btn.css_selector))] = btn.ui_mark
    return _annotated_html(document, marks)


def annotate_blocks(document: DomNode, ranked: list[RankedBlock]) -> str:
    """Annotated page HTML with the block rank on each block parent."""
    marks: dict[int, str] = {}
    for rb in ranked:
        parent = resolve_selector(document, rb.block.parent_selector)
        marks[id(parent)] = str(rb.rank)
    return _annotated_html(document, marks)


def strip_annotations(html: str | bytes) -> DomNode:
    """Parse annotated HTML and remove every injected artifact."""
    doc = parse_document(html)
    for el in list(iter_elements(doc)):
        el.attrs.pop(MARK_ATTR, None)
        drop = [c for c in el.children
                if c.kind == ELEMENT and (BADGES_ATTR in c.attrs or STYLE_MARKER_ATTR in c.attrs)]
        for d in drop:
            el.children.remove(d)
    return doc
